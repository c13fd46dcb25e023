//! Subcommands. Output goes to the supplied writer or to files named by flags.

use std::io::Write;
use std::path::{Path, PathBuf};

use clap::{Args, Parser, Subcommand};
use serde::Serialize;
use tvgam::bounds::{certify, erm_excess_bound, uniform_deviation_bound, CertificateKind};
use tvgam::complexity::{
    estimate_complexity, scaling_experiment, synthetic_features, tightness_experiment,
    FeatureDistribution, NoiseKind,
};
use tvgam::solver::{fit_oracle_l1_with, objective, OracleConfig};
use tvgam::{fit, Extension, FitConfig, LossKind, LossSpec};

use crate::error::CliError;
use crate::ingest::{ingest_csv, Table};
use crate::model_file::{FitMetadata, ModelFile};

#[derive(Debug, Parser)]
#[command(name = "tvgam", version, about = "Total-variation regularized additive models")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Fit one model per lambda and write model files plus a JSON-lines report.
    Fit(FitArgs),
    /// Write one prediction per input row as CSV.
    Predict(PredictArgs),
    /// Mean loss, penalized objective and budget of a model on a dataset.
    Evaluate(EvaluateArgs),
    /// Monte-Carlo complexity estimate with the closed-form bound.
    Complexity(ComplexityArgs),
    /// Generalization certificate for given constants.
    Certify(CertifyArgs),
    /// Sign classes versus the budget-2 class on hypercube data.
    Tightness(TightnessArgs),
    /// Complexity estimates over a grid of feature counts and sample sizes.
    Scaling(ScalingArgs),
}

#[derive(Debug, Args)]
pub struct LossArgs {
    #[arg(long, default_value = "squared")]
    pub loss: LossKind,
    /// Cap the loss at this value.
    #[arg(long)]
    pub clip: Option<f64>,
    /// Bound on |prediction| used to bound the squared loss.
    #[arg(long)]
    pub prediction_bound: Option<f64>,
    /// Bound on |target| used to bound the squared loss.
    #[arg(long)]
    pub target_bound: Option<f64>,
}

impl LossArgs {
    fn spec(&self) -> Result<LossSpec, CliError> {
        let mut spec = LossSpec::new(self.loss);
        match (self.prediction_bound, self.target_bound) {
            (Some(a), Some(y)) => spec = spec.with_range(a, y),
            (None, None) => {}
            _ => {
                return Err(CliError::Config(
                    "--prediction-bound and --target-bound go together".into(),
                ))
            }
        }
        if let Some(c) = self.clip {
            if !(c > 0.0 && c.is_finite()) {
                return Err(CliError::Config(format!("--clip must be positive, got {c}")));
            }
            spec = spec.clipped(c);
        }
        Ok(spec)
    }
}

#[derive(Debug, Args)]
pub struct FitArgs {
    #[arg(long)]
    pub input: PathBuf,
    #[arg(long)]
    pub target: String,
    #[command(flatten)]
    pub loss: LossArgs,
    /// One value or a comma-separated grid.
    #[arg(long, value_delimiter = ',', required = true)]
    pub lambda: Vec<f64>,
    /// Recorded in the model file; fitting is deterministic.
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
    #[arg(long)]
    pub intercept: bool,
    #[arg(long, default_value = "compact")]
    pub extension: Extension,
    #[arg(long, default_value_t = 10_000)]
    pub max_iters: usize,
    #[arg(long, default_value_t = 1e-8)]
    pub tol: f64,
    /// Model path; with several lambdas `_lambda{i}` is appended to the stem.
    #[arg(long)]
    pub out: PathBuf,
    /// JSON-lines report path (stdout when absent).
    #[arg(long)]
    pub report: Option<PathBuf>,
}

#[derive(Debug, Args)]
pub struct PredictArgs {
    #[arg(long)]
    pub model: PathBuf,
    #[arg(long)]
    pub input: PathBuf,
    /// Column to drop from the input before predicting.
    #[arg(long)]
    pub target: Option<String>,
    /// Overrides the extension mode stored in the model.
    #[arg(long)]
    pub extension: Option<Extension>,
    /// CSV output path (stdout when absent).
    #[arg(long)]
    pub out: Option<PathBuf>,
}

#[derive(Debug, Args)]
pub struct EvaluateArgs {
    #[arg(long)]
    pub model: PathBuf,
    #[arg(long)]
    pub input: PathBuf,
    #[arg(long)]
    pub target: String,
    #[command(flatten)]
    pub loss: LossArgs,
    /// Penalty weight for the reported objective (the model's own when absent).
    #[arg(long)]
    pub lambda: Option<f64>,
    #[arg(long)]
    pub extension: Option<Extension>,
}

#[derive(Debug, Args)]
pub struct ComplexityArgs {
    /// CSV of features; synthetic data from --p, --m and --distribution when absent.
    #[arg(long)]
    pub input: Option<PathBuf>,
    /// Column to drop from the input.
    #[arg(long)]
    pub target: Option<String>,
    #[arg(long)]
    pub p: Option<usize>,
    #[arg(long)]
    pub m: Option<usize>,
    #[arg(long, default_value = "uniform")]
    pub distribution: FeatureDistribution,
    #[arg(long, default_value = "rademacher")]
    pub noise: NoiseKind,
    #[arg(long = "C", default_value_t = 1.0)]
    pub budget: f64,
    #[arg(long, default_value_t = 1000)]
    pub draws: usize,
    #[arg(long)]
    pub seed: u64,
}

#[derive(Debug, Clone, Copy, clap::ValueEnum)]
pub enum CertifyKind {
    Uniform,
    Erm,
}

#[derive(Debug, Args)]
pub struct CertifyArgs {
    #[arg(long)]
    pub p: usize,
    #[arg(long)]
    pub m: usize,
    #[arg(long = "C")]
    pub budget: f64,
    #[arg(long)]
    pub delta: f64,
    #[arg(long, value_enum, default_value = "uniform")]
    pub kind: CertifyKind,
    /// Lipschitz constant of the loss; taken from --loss when absent.
    #[arg(long)]
    pub rho: Option<f64>,
    /// Bound on the loss; taken from --loss when absent.
    #[arg(long)]
    pub c: Option<f64>,
    #[command(flatten)]
    pub loss: LossArgs,
}

#[derive(Debug, Args)]
pub struct TightnessArgs {
    /// Comma-separated feature counts.
    #[arg(long, value_delimiter = ',', required = true)]
    pub p: Vec<usize>,
    /// Comma-separated sample sizes.
    #[arg(long, value_delimiter = ',', required = true)]
    pub m: Vec<usize>,
    #[arg(long, default_value_t = 1000)]
    pub draws: usize,
    #[arg(long)]
    pub seed: u64,
    /// CSV table path; the JSON report goes to stdout.
    #[arg(long)]
    pub out: Option<PathBuf>,
}

#[derive(Debug, Args)]
pub struct ScalingArgs {
    #[arg(long, value_delimiter = ',', required = true)]
    pub p: Vec<usize>,
    #[arg(long, value_delimiter = ',', required = true)]
    pub m: Vec<usize>,
    #[arg(long = "C", default_value_t = 1.0)]
    pub budget: f64,
    #[arg(long, default_value_t = 1000)]
    pub draws: usize,
    #[arg(long)]
    pub seed: u64,
    #[arg(long, default_value = "uniform")]
    pub distribution: FeatureDistribution,
    #[arg(long)]
    pub out: Option<PathBuf>,
}

pub fn run(cli: Cli, stdout: &mut dyn Write) -> Result<(), CliError> {
    match cli.command {
        Command::Fit(a) => cmd_fit(&a, stdout),
        Command::Predict(a) => cmd_predict(&a, stdout),
        Command::Evaluate(a) => cmd_evaluate(&a, stdout),
        Command::Complexity(a) => cmd_complexity(&a, stdout),
        Command::Certify(a) => cmd_certify(&a, stdout),
        Command::Tightness(a) => cmd_tightness(&a, stdout),
        Command::Scaling(a) => cmd_scaling(&a, stdout),
    }
}

fn emit(out: &mut dyn Write, text: &str) -> Result<(), CliError> {
    out.write_all(text.as_bytes())
        .map_err(|e| CliError::Data(format!("writing output: {e}")))
}

fn json_line(value: &impl Serialize) -> String {
    let mut s = serde_json::to_string(value).expect("reports serialize");
    s.push('\n');
    s
}

fn json_pretty(value: &impl Serialize) -> String {
    let mut s = serde_json::to_string_pretty(value).expect("reports serialize");
    s.push('\n');
    s
}

fn write_file(path: &Path, text: &str) -> Result<(), CliError> {
    std::fs::write(path, text).map_err(|e| CliError::Data(format!("{}: {e}", path.display())))
}

/// `dir/stem_lambda{i}.ext` for grids of more than one value.
pub fn grid_path(out: &Path, index: usize, grid_len: usize) -> PathBuf {
    if grid_len == 1 {
        return out.to_path_buf();
    }
    let stem = out.file_stem().map_or_else(String::new, |s| s.to_string_lossy().into_owned());
    let name = match out.extension() {
        Some(ext) => format!("{stem}_lambda{index}.{}", ext.to_string_lossy()),
        None => format!("{stem}_lambda{index}"),
    };
    out.with_file_name(name)
}

#[derive(Serialize)]
struct FitLine<'a> {
    lambda: f64,
    model: String,
    solver: &'a str,
    objective: f64,
    iterations: usize,
    converged: bool,
    budget_used: f64,
    objective_trace: &'a [f64],
}

fn cmd_fit(a: &FitArgs, stdout: &mut dyn Write) -> Result<(), CliError> {
    let loss = a.loss.spec()?;
    if let Some(&bad) = a.lambda.iter().find(|l| !(**l >= 0.0 && l.is_finite())) {
        return Err(CliError::Config(format!("lambda must be finite and >= 0, got {bad}")));
    }
    let smooth = loss.kind.is_smooth();
    if !smooth && a.intercept {
        return Err(CliError::Config(format!(
            "--intercept is not supported for {} loss",
            loss.kind
        )));
    }
    let table = ingest_csv(&a.input, Some(&a.target))?;
    let data = &table.dataset;
    loss.check_targets(data.targets())?;

    let mut report = String::new();
    let mut unconverged = Vec::new();
    for (i, &lambda) in a.lambda.iter().enumerate() {
        let (model, meta, trace) = if smooth {
            let config = FitConfig {
                lambda,
                max_outer_iters: a.max_iters,
                tol: a.tol,
                seed: a.seed,
                intercept: a.intercept,
                ..FitConfig::default()
            };
            let (model, r) = fit(data, &loss, &config)?;
            let meta = FitMetadata {
                lambda,
                loss: loss.kind,
                seed: a.seed,
                objective: r.final_objective,
                iterations: r.iterations,
                converged: r.converged,
                solver: "backfit".into(),
            };
            (model, meta, r.objective_trace)
        } else {
            // Oracle iterations are far cheaper than backfitting cycles.
            let config = OracleConfig {
                max_iters: a.max_iters.max(1) * 100,
                ..OracleConfig::default()
            };
            let r = fit_oracle_l1_with(data, &loss, lambda, &config)?;
            let meta = FitMetadata {
                lambda,
                loss: loss.kind,
                seed: a.seed,
                objective: r.objective,
                iterations: r.iterations,
                converged: r.converged,
                solver: "interval_lasso".into(),
            };
            (r.model, meta, Vec::new())
        };
        let model = model.with_extension(a.extension);
        let path = grid_path(&a.out, i, a.lambda.len());
        let file = ModelFile::from_model(&model, table.feature_names.clone(), meta.clone());
        file.write(&path)?;
        if !meta.converged {
            unconverged.push(lambda);
        }
        report.push_str(&json_line(&FitLine {
            lambda,
            model: path.display().to_string(),
            solver: &meta.solver,
            objective: meta.objective,
            iterations: meta.iterations,
            converged: meta.converged,
            budget_used: file.budget_used,
            objective_trace: &trace,
        }));
    }
    match &a.report {
        Some(path) => write_file(path, &report)?,
        None => emit(stdout, &report)?,
    }
    if unconverged.is_empty() {
        Ok(())
    } else {
        Err(CliError::NonConvergence(format!(
            "iteration limit reached before convergence for lambda {unconverged:?}"
        )))
    }
}

fn load_for(model: &Path, extension: Option<Extension>, table: &Table) -> Result<tvgam::GamModel, CliError> {
    let file = ModelFile::read(model)?;
    if file.p != table.dataset.p() {
        return Err(CliError::Data(format!(
            "model has {} features but the data has {}",
            file.p,
            table.dataset.p()
        )));
    }
    let model = file.to_model()?;
    Ok(match extension {
        Some(e) => model.with_extension(e),
        None => model,
    })
}

fn cmd_predict(a: &PredictArgs, stdout: &mut dyn Write) -> Result<(), CliError> {
    let table = ingest_csv(&a.input, a.target.as_deref())?;
    let model = load_for(&a.model, a.extension, &table)?;
    let mut text = String::from("prediction\n");
    for i in 0..table.dataset.m() {
        let y = model.predict(table.dataset.row(i))?;
        text.push_str(&format!("{y:?}\n"));
    }
    match &a.out {
        Some(path) => write_file(path, &text),
        None => emit(stdout, &text),
    }
}

#[derive(Serialize)]
struct Evaluation {
    m: usize,
    loss: LossKind,
    mean_loss: f64,
    lambda: f64,
    objective: f64,
    budget_used: f64,
}

fn cmd_evaluate(a: &EvaluateArgs, stdout: &mut dyn Write) -> Result<(), CliError> {
    let loss = a.loss.spec()?;
    let table = ingest_csv(&a.input, Some(&a.target))?;
    let file = ModelFile::read(&a.model)?;
    let model = load_for(&a.model, a.extension, &table)?;
    let lambda = a.lambda.unwrap_or(file.fit.lambda);
    let data = &table.dataset;
    let total = objective(&model, data, &loss, 0.0)?;
    let eval = Evaluation {
        m: data.m(),
        loss: loss.kind,
        mean_loss: total / data.m() as f64,
        lambda,
        objective: objective(&model, data, &loss, lambda)?,
        budget_used: model.budget_used(),
    };
    emit(stdout, &json_pretty(&eval))
}

fn cmd_complexity(a: &ComplexityArgs, stdout: &mut dyn Write) -> Result<(), CliError> {
    let data = match (&a.input, a.p, a.m) {
        (Some(path), None, None) => ingest_csv(path, a.target.as_deref())?.dataset,
        (None, Some(p), Some(m)) => synthetic_features(a.distribution, p, m, a.seed, 0)?,
        _ => {
            return Err(CliError::Config(
                "give either --input or both --p and --m".into(),
            ))
        }
    };
    let report = estimate_complexity(&data, a.budget, a.noise, a.draws, a.seed)?;
    emit(stdout, &json_pretty(&report))?;
    if report.within_bound() {
        Ok(())
    } else {
        Err(CliError::BoundViolation(format!(
            "estimate {} exceeds the bound {} by more than three standard errors ({})",
            report.estimate,
            report.bound.unwrap_or(f64::NAN),
            report.std_error
        )))
    }
}

fn cmd_certify(a: &CertifyArgs, stdout: &mut dyn Write) -> Result<(), CliError> {
    let kind = match a.kind {
        CertifyKind::Uniform => CertificateKind::UniformDeviation,
        CertifyKind::Erm => CertificateKind::ErmExcess,
    };
    let cert = match (a.rho, a.c) {
        (Some(rho), Some(c)) => match kind {
            CertificateKind::UniformDeviation => {
                uniform_deviation_bound(a.p, a.m, a.budget, rho, c, a.delta)?
            }
            CertificateKind::ErmExcess => erm_excess_bound(a.p, a.m, a.budget, rho, c, a.delta)?,
        },
        (None, None) => certify(kind, &a.loss.spec()?, a.p, a.m, a.budget, a.delta)?,
        _ => return Err(CliError::Config("--rho and --c go together".into())),
    };
    emit(stdout, &json_pretty(&cert))
}

fn cmd_tightness(a: &TightnessArgs, stdout: &mut dyn Write) -> Result<(), CliError> {
    let mut reports = Vec::new();
    for &p in &a.p {
        for &m in &a.m {
            reports.push(tightness_experiment(p, m, a.draws, a.seed)?);
        }
    }
    if let Some(path) = &a.out {
        let mut csv = String::from(
            "p,m,draws,seed,budget,sign_class,sign_class_std_error,gam,gam_std_error,combined_std_error,ordering_holds\n",
        );
        for r in &reports {
            csv.push_str(&format!(
                "{},{},{},{},{:?},{:?},{:?},{:?},{:?},{:?},{}\n",
                r.p,
                r.m,
                r.draws,
                r.seed,
                r.budget,
                r.sign_class,
                r.sign_class_std_error,
                r.gam,
                r.gam_std_error,
                r.combined_std_error,
                r.ordering_holds
            ));
        }
        write_file(path, &csv)?;
    }
    emit(stdout, &json_pretty(&reports))
}

fn cmd_scaling(a: &ScalingArgs, stdout: &mut dyn Write) -> Result<(), CliError> {
    let rows = scaling_experiment(&a.p, &a.m, a.budget, a.draws, a.seed, a.distribution)?;
    if let Some(path) = &a.out {
        let mut csv = String::from("p,m,estimate,std_error,bound,ratio\n");
        let opt = |v: Option<f64>| v.map_or_else(String::new, |x| format!("{x:?}"));
        for r in &rows {
            csv.push_str(&format!(
                "{},{},{:?},{:?},{},{}\n",
                r.p,
                r.m,
                r.estimate,
                r.std_error,
                opt(r.bound),
                opt(r.ratio)
            ));
        }
        write_file(path, &csv)?;
    }
    emit(stdout, &json_pretty(&rows))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn grid_paths() {
        let out = Path::new("/tmp/x/model.json");
        assert_eq!(grid_path(out, 0, 1), out);
        assert_eq!(grid_path(out, 2, 3), Path::new("/tmp/x/model_lambda2.json"));
        assert_eq!(grid_path(Path::new("m"), 1, 2), Path::new("m_lambda1"));
    }
}
