use clap::Parser;

use tvgam_cli::commands::{run, Cli};

fn main() {
    let cli = Cli::parse();
    let mut stdout = std::io::stdout().lock();
    if let Err(err) = run(cli, &mut stdout) {
        eprintln!("tvgam: {err}");
        std::process::exit(err.exit_code() as i32);
    }
}
