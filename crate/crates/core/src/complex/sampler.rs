use num::BigInt;
use rand::Rng;
use rand_chacha::ChaCha8Rng;

use super::{EdgeId, EdgeKind, RayComplex};
use crate::error::Result;
use crate::metric::{Point, UnitSpeedRay};
use crate::sampling::{log_uniform, PairSampler, PointSampler};
use crate::scalar::{q, Scalar, Q};

/// Offsets are drawn on a grid of `1/DENOM` so arithmetic stays cheap.
const DENOM: i64 = 64;

fn grid_value(x: f64) -> Q {
    Q::new(BigInt::from((x * DENOM as f64).floor() as i64), BigInt::from(DENOM))
}

/// Uniform choice of edge, then an offset: uniform on segments, log-uniform
/// up to `ray_scale` on rays.
pub struct ComplexPointSampler<'a> {
    space: &'a RayComplex,
    edges: Vec<EdgeId>,
    ray_scale: f64,
}

impl<'a> ComplexPointSampler<'a> {
    pub fn new(space: &'a RayComplex, ray_scale: f64) -> Self {
        let edges = (0..space.edge_count()).map(EdgeId).collect();
        ComplexPointSampler { space, edges, ray_scale }
    }

    /// Restricts sampling to the named edges; unknown names are ignored.
    pub fn with_edges<'n>(mut self, names: impl IntoIterator<Item = &'n str>) -> Self {
        self.edges = names.into_iter().filter_map(|n| self.space.edge_id(n)).collect();
        self
    }

    fn offset(&self, rng: &mut ChaCha8Rng, kind: &EdgeKind) -> Q {
        match kind {
            EdgeKind::Segment(len) => {
                let l = len.to_f64();
                grid_value(rng.gen::<f64>() * l).min(len.clone())
            }
            EdgeKind::Ray => {
                if rng.gen_bool(0.05) {
                    q(0)
                } else {
                    grid_value(log_uniform(rng, 1.0 / DENOM as f64, self.ray_scale))
                }
            }
        }
    }
}

impl PointSampler for ComplexPointSampler<'_> {
    fn sample(&self, rng: &mut ChaCha8Rng) -> Point {
        let e = self.edges[rng.gen_range(0..self.edges.len())];
        let offset = self.offset(rng, self.space.edge_kind(e));
        Point::Complex { space: self.space.space_id(), edge: e, offset }
    }
}

/// Pairs `(x, y)` with `y` uniform (by length) in the exact closed ball of
/// radius `d(x, ray)` around `x`.
pub struct ComplexPairSampler<'a> {
    points: ComplexPointSampler<'a>,
}

impl<'a> ComplexPairSampler<'a> {
    pub fn new(space: &'a RayComplex, ray_scale: f64) -> Self {
        ComplexPairSampler { points: ComplexPointSampler::new(space, ray_scale) }
    }
}

impl PairSampler for ComplexPairSampler<'_> {
    fn sample_pair(&self, ray: &UnitSpeedRay, rng: &mut ChaCha8Rng) -> Result<Option<(Point, Point)>> {
        let space = self.points.space;
        let x = self.points.sample(rng);
        let radius = crate::contraction::project_onto(space, &x, ray, 0.0)?.distance;
        let ball = space.ball(&x, &radius)?;
        let total: f64 = ball.iter().map(|(_, lo, hi)| (hi - lo).to_f64()).sum();
        if total <= 0.0 {
            return Ok(Some((x.clone(), x)));
        }
        let mut pick = rng.gen::<f64>() * total;
        for (e, lo, hi) in &ball {
            let len = (hi - lo).to_f64();
            if pick <= len {
                let offset = (lo + grid_value(pick)).min(hi.clone());
                return Ok(Some((x, Point::Complex { space: space.space_id(), edge: *e, offset })));
            }
            pick -= len;
        }
        let (e, _, hi) = ball.last().expect("ball contains x");
        Ok(Some((x, Point::Complex { space: space.space_id(), edge: *e, offset: hi.clone() })))
    }
}
