use rand::Rng;
use rand_chacha::ChaCha8Rng;

use super::{AnnulusSpace, Polar};
use crate::error::Result;
use crate::metric::{uniform, MetricSpace, Point, UnitSpeedRay};
use crate::sampling::{log_uniform, PairSampler, PointSampler};

/// Cover points with `t` uniform in a window and height `r - 1`
/// log-uniform, mixed with points on attached rays.
#[derive(Clone)]
pub struct AnnulusPointSampler<'a> {
    space: &'a AnnulusSpace,
    t_range: (f64, f64),
    height: (f64, f64),
    attached_fraction: f64,
}

impl<'a> AnnulusPointSampler<'a> {
    pub fn new(space: &'a AnnulusSpace, t_range: (f64, f64), height: (f64, f64)) -> Self {
        let attached_fraction = if space.rays().is_empty() { 0.0 } else { 0.2 };
        AnnulusPointSampler { space, t_range, height, attached_fraction }
    }

    pub fn attached_fraction(mut self, p: f64) -> Self {
        self.attached_fraction = if self.space.rays().is_empty() { 0.0 } else { p };
        self
    }
}

impl PointSampler for AnnulusPointSampler<'_> {
    fn sample(&self, rng: &mut ChaCha8Rng) -> Point {
        let id = self.space.id();
        if self.attached_fraction > 0.0 && rng.gen_bool(self.attached_fraction) {
            let rays = self.space.rays();
            let ray = rays[rng.gen_range(0..rays.len())].id;
            let s = log_uniform(rng, self.height.0, self.height.1) - self.height.0;
            return Point::Attached { space: id, ray, s };
        }
        let t = uniform(rng, self.t_range.0, self.t_range.1);
        let r = 1.0 + log_uniform(rng, self.height.0, self.height.1);
        Point::Annulus { space: id, t, r }
    }
}

/// Pairs `(x, y)` with `d(x, y) <= d(x, ray)`: `x` from a point sampler, `y`
/// proposed near `x` (planar offsets in the local frame, points further out
/// along `x`'s attached ray, or points on other attached rays) and accepted
/// only after an exact distance check.
pub struct AnnulusPairSampler<'a> {
    points: AnnulusPointSampler<'a>,
    tol: f64,
}

impl<'a> AnnulusPairSampler<'a> {
    pub fn new(points: AnnulusPointSampler<'a>, tol: f64) -> Self {
        AnnulusPairSampler { points, tol }
    }

    fn propose(&self, x: &Point, radius: f64, rng: &mut ChaCha8Rng) -> Result<Option<Point>> {
        let space = self.points.space;
        let id = space.id();
        let (centre, budget) = match x {
            Point::Attached { ray, s, .. } => {
                if rng.gen_bool(0.5) || *s >= radius {
                    let lo = (s - radius).max(0.0);
                    return Ok(Some(Point::Attached { space: id, ray: *ray, s: uniform(rng, lo, s + radius) }));
                }
                (space.base_of(*ray)?, radius - s)
            }
            Point::Annulus { t, r, .. } => (Polar { t: *t, r: *r }, radius),
            Point::Complex { .. } => return Ok(None),
        };
        if !space.rays().is_empty() && rng.gen_bool(0.2) {
            let target = &space.rays()[rng.gen_range(0..space.rays().len())];
            let gap = super::kernel::dist(centre, target.base);
            if gap <= budget {
                return Ok(Some(Point::Attached { space: id, ray: target.id, s: uniform(rng, 0.0, budget - gap) }));
            }
        }
        let rho = budget * rng.gen::<f64>().sqrt();
        let theta = uniform(rng, -std::f64::consts::PI, std::f64::consts::PI);
        let (px, py) = (centre.r + rho * theta.cos(), rho * theta.sin());
        let r = px.hypot(py);
        if r < 1.0 {
            return Ok(None);
        }
        Ok(Some(Point::Annulus { space: id, t: centre.t + py.atan2(px), r }))
    }
}

impl PairSampler for AnnulusPairSampler<'_> {
    fn sample_pair(&self, ray: &UnitSpeedRay, rng: &mut ChaCha8Rng) -> Result<Option<(Point, Point)>> {
        let space = self.points.space;
        let x = self.points.sample(rng);
        let radius = crate::contraction::project_onto(space, &x, ray, self.tol)?.distance;
        for _ in 0..8 {
            if let Some(y) = self.propose(&x, radius, rng)? {
                if space.distance(&x, &y)? <= radius {
                    return Ok(Some((x, y)));
                }
            }
        }
        Ok(None)
    }
}
