//! Seeded counter-based streams. Every Monte-Carlo draw owns a stream, so
//! results do not depend on how draws are scheduled.

use rand::{Rng, RngCore, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;

/// Stream reserved for synthetic feature generation; draw streams count up
/// from zero and never reach it.
pub(crate) const DATA_STREAM: u64 = 1 << 62;

pub(crate) fn stream(seed: u64, stream: u64) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(stream);
    rng
}

/// Emits `m` independent uniform signs as `write(index, value)`.
pub(crate) fn fill_signs(rng: &mut ChaCha8Rng, mut write: impl FnMut(usize, f64), m: usize) {
    let mut i = 0;
    while i < m {
        let bits = rng.next_u64();
        for b in 0..64.min(m - i) {
            write(i + b, if (bits >> b) & 1 == 1 { 1.0 } else { -1.0 });
        }
        i += 64;
    }
}

pub(crate) fn fill_normals(rng: &mut ChaCha8Rng, mut write: impl FnMut(usize, f64), m: usize) {
    for i in 0..m {
        write(i, rng.sample(StandardNormal));
    }
}
