//! Empirical quasi-isometry constants of a map between two spaces.

use std::collections::BTreeMap;

use serde::Serialize;

use crate::complex::{EdgeKind, RayComplex};
use crate::error::{Error, Result};
use crate::metric::{MetricSpace, Point};
use crate::sampling::{trial_rng, PointSampler};
use crate::scalar::{Scalar, Q};

/// A map between point sets of two spaces.
pub trait PointMap: Sync {
    fn apply(&self, p: &Point) -> Result<Point>;
}

/// The identity on a space.
pub struct Identity;

impl PointMap for Identity {
    fn apply(&self, p: &Point) -> Result<Point> {
        Ok(p.clone())
    }
}

/// Identity between two complexes with the same edge names: rays keep their
/// parameter, segments are rescaled proportionally to the target length.
pub struct IdentityByName<'a> {
    from: &'a RayComplex,
    to: &'a RayComplex,
}

impl<'a> IdentityByName<'a> {
    pub fn new(from: &'a RayComplex, to: &'a RayComplex) -> Self {
        IdentityByName { from, to }
    }
}

impl PointMap for IdentityByName<'_> {
    fn apply(&self, p: &Point) -> Result<Point> {
        let (e, offset) = self.from.locate(p)?;
        let name = self.from.edge_name(e);
        let target = self.to.edge_id(name).ok_or_else(|| Error::UnknownLabel(format!("{name} in target space")))?;
        let offset: Q = match (self.from.edge_kind(e), self.to.edge_kind(target)) {
            (EdgeKind::Segment(a), EdgeKind::Segment(b)) => offset * b / a,
            (EdgeKind::Ray, EdgeKind::Ray) => offset.clone(),
            _ => return Err(Error::Domain(format!("edge `{name}` changes kind between spaces"))),
        };
        self.to.point_at(target, offset)
    }
}

#[derive(Clone, Debug, Serialize)]
pub struct ScaleBucket {
    /// Pairs with `floor(log2 d) = scale` (scale 0 also holds `d < 1`).
    pub scale: i32,
    pub count: usize,
    pub min_ratio: f64,
    pub max_ratio: f64,
}

#[derive(Clone, Debug, Serialize)]
pub struct DistortionReport {
    pub pairs: usize,
    /// Pairs with `d >= floor` used to fit the multiplicative constant.
    pub floor: f64,
    pub lambda: f64,
    pub epsilon: f64,
    /// Largest `|d(phi p, phi q) - d(p, q)|`.
    pub max_additive_residual: f64,
    pub buckets: Vec<ScaleBucket>,
}

/// Samples `n` pairs and fits `(lambda, epsilon)` with
/// `d/lambda - epsilon <= d' <= lambda d + epsilon` on the sample.
///
/// `lambda` is the largest two-sided ratio `max(d'/d, d/d')` over pairs with
/// `d >= floor`; `epsilon` is then the smallest additive slack that makes
/// every sampled pair (including short ones) satisfy both inequalities.
pub fn qi_distortion_estimate<A: MetricSpace, B: MetricSpace>(
    map: &dyn PointMap,
    from: &A,
    to: &B,
    sampler: &dyn PointSampler,
    n: usize,
    floor: f64,
    seed: u64,
) -> Result<DistortionReport> {
    if n < 2 {
        return Err(Error::Precondition("need at least two pairs".into()));
    }
    let mut rows = Vec::with_capacity(n);
    for trial in 0..n {
        let mut rng = trial_rng(seed, trial as u64);
        let p = sampler.sample(&mut rng);
        let q = sampler.sample(&mut rng);
        let d = from.distance(&p, &q)?.to_f64();
        let d2 = to.distance(&map.apply(&p)?, &map.apply(&q)?)?.to_f64();
        rows.push((d, d2));
    }
    let mut lambda: f64 = 1.0;
    for &(d, d2) in &rows {
        if d >= floor && d > 0.0 && d2 > 0.0 {
            lambda = lambda.max(d2 / d).max(d / d2);
        }
    }
    let mut epsilon: f64 = 0.0;
    let mut residual: f64 = 0.0;
    let mut buckets: BTreeMap<i32, ScaleBucket> = BTreeMap::new();
    for &(d, d2) in &rows {
        epsilon = epsilon.max(d2 - lambda * d).max(d / lambda - d2);
        residual = residual.max((d2 - d).abs());
        if d > 0.0 && d2 > 0.0 {
            let scale = if d < 1.0 { 0 } else { d.log2().floor() as i32 };
            let ratio = d2 / d;
            let b = buckets.entry(scale).or_insert(ScaleBucket { scale, count: 0, min_ratio: ratio, max_ratio: ratio });
            b.count += 1;
            b.min_ratio = b.min_ratio.min(ratio);
            b.max_ratio = b.max_ratio.max(ratio);
        }
    }
    Ok(DistortionReport {
        pairs: n,
        floor,
        lambda,
        epsilon: epsilon.max(0.0),
        max_additive_residual: residual,
        buckets: buckets.into_values().collect(),
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::complex::ComplexPointSampler;
    use crate::zoo::{build_x, build_y_range};

    #[test]
    fn identity_on_x_is_an_isometry() {
        let x = build_x(6).unwrap();
        let s = ComplexPointSampler::new(&x, 128.0);
        let r = qi_distortion_estimate(&Identity, &x, &x, &s, 200, 1.0, 3).unwrap();
        assert_eq!((r.lambda, r.epsilon, r.max_additive_residual), (1.0, 0.0, 0.0));
    }

    #[test]
    fn identity_x_to_y_is_coarsely_lipschitz() {
        let x = crate::zoo::build_x_range(3, 10).unwrap();
        let y = build_y_range(3, 10).unwrap();
        let s = ComplexPointSampler::new(&x, 2048.0);
        let r = qi_distortion_estimate(&IdentityByName::new(&x, &y), &x, &y, &s, 300, 1.0, 5).unwrap();
        assert!(r.lambda.is_finite() && r.lambda < 10.0, "{r:?}");
    }
}
