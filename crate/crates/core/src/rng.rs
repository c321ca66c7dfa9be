//! Counter-based random streams. Every consumer derives its generator from
//! `(master seed, purpose, index)`, so results do not depend on scheduling.

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

/// Stream domains; keeps the streams of different stages apart.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
#[repr(u64)]
pub enum Purpose {
    Grids = 1,
    Cuts = 2,
    Beta = 3,
    Trials = 4,
    Symmetry = 5,
}

/// Generator for `index` within `purpose` under `seed`.
pub fn stream(seed: u64, purpose: Purpose, index: u64) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed ^ ((purpose as u64) << 56));
    rng.set_stream(index);
    rng
}

/// Per-trial generator for Monte Carlo trial `trial`.
pub fn trial_rng(seed: u64, trial: u64) -> ChaCha8Rng {
    stream(seed, Purpose::Trials, trial)
}
