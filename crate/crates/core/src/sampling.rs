//! Seeded sampling plumbing. Every trial draws from its own ChaCha stream
//! keyed by `(seed, trial index)`, so results do not depend on scheduling.

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use crate::error::Result;
use crate::metric::{Point, UnitSpeedRay};

pub fn trial_rng(seed: u64, trial: u64) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(trial);
    rng
}

/// Draws single points of a space.
pub trait PointSampler: Sync {
    fn sample(&self, rng: &mut ChaCha8Rng) -> Point;
}

/// Draws pairs `(x, y)` intended to satisfy `d(x, y) <= d(x, ray)`.
/// Callers re-verify admissibility; `None` means the draw was abandoned.
pub trait PairSampler: Sync {
    fn sample_pair(&self, ray: &UnitSpeedRay, rng: &mut ChaCha8Rng) -> Result<Option<(Point, Point)>>;
}

/// Draws pairs of points for distortion estimates.
pub struct PairsFrom<'a>(pub &'a dyn PointSampler);

impl PairsFrom<'_> {
    pub fn draw(&self, rng: &mut ChaCha8Rng) -> (Point, Point) {
        (self.0.sample(rng), self.0.sample(rng))
    }
}

/// Log-uniform draw in `[lo, hi]` (both positive).
pub fn log_uniform(rng: &mut ChaCha8Rng, lo: f64, hi: f64) -> f64 {
    use rand::Rng;
    if hi <= lo {
        return lo;
    }
    (lo.ln() + rng.gen::<f64>() * (hi.ln() - lo.ln())).exp()
}
