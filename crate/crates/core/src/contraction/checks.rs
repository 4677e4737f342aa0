//! Consequences of strong contraction checked on concrete rays: bounded
//! projections of far-away segments, asymptoticity, the first time one ray
//! escapes the `2C` neighbourhood of another, and Morse deviation.

use serde::Serialize;

use super::{joint_diameter, project, project_onto, ProjectionPiece};
use crate::error::{Error, Result};
use crate::metric::{MetricSpace, PathPolyline, UnitSpeedRay};
use crate::minimize::bisect_level;
use crate::scalar::Scalar;

#[derive(Clone, Debug, Serialize)]
pub struct GitReport {
    pub c: f64,
    pub min_distance: f64,
    pub diameter: f64,
    /// `diam(pi(segment)) <= 4C`.
    pub passed: bool,
    pub samples: usize,
}

/// Projects the sample points of `segment` onto `ray` and compares the
/// diameter of the image with `4C`. Requires `d(segment, ray) >= 2C`.
pub fn git_check<M: MetricSpace>(space: &M, ray: &UnitSpeedRay, segment: &PathPolyline<M::Scalar>, c: f64, tol: f64) -> Result<GitReport> {
    let mut pieces: Vec<ProjectionPiece<M::Scalar>> = Vec::new();
    let mut min_distance = f64::INFINITY;
    for p in &segment.points {
        let set = project(space, p, &[ray], tol)?;
        min_distance = min_distance.min(set.distance.to_f64());
        pieces.extend(set.pieces);
    }
    if min_distance < 2.0 * c {
        return Err(Error::Precondition(format!("segment comes within {min_distance} of the ray, below 2C = {}", 2.0 * c)));
    }
    // One ray: the diameter is the spread of the extreme parameters.
    let lo = pieces.iter().map(|p| p.lo.clone()).reduce(Scalar::min_of).expect("non-empty polyline");
    let hi = pieces.iter().map(|p| p.hi.clone()).reduce(Scalar::max_of).expect("non-empty polyline");
    let ends = [ProjectionPiece { ray: 0, lo, hi }];
    let diameter = joint_diameter(space, &[ray], &[&ends[0]])?.to_f64();
    Ok(GitReport { c, min_distance, diameter, passed: diameter <= 4.0 * c, samples: segment.points.len() })
}

/// Distance from `beta(t)` to `alpha`, as a float.
fn distance_to_ray<M: MetricSpace>(space: &M, alpha: &UnitSpeedRay, beta: &UnitSpeedRay, t: f64, tol: f64) -> Result<f64> {
    let p = space.ray_point(beta, &M::Scalar::from_f64(t))?;
    Ok(project_onto(space, &p, alpha, tol)?.distance.to_f64())
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum AsymptoticVerdict {
    Asymptotic,
    Divergent,
}

#[derive(Clone, Debug, Serialize)]
pub struct AsymptoticReport {
    pub verdict: AsymptoticVerdict,
    pub c: f64,
    pub horizon: f64,
    /// `sup_t d(beta(t), alpha)` over the sampled parameters.
    pub sup: f64,
    pub sup_at: f64,
    pub within_5c: bool,
    pub within_6c: bool,
    /// Maxima over `[H/4, H/2]` and `(H/2, H]`.
    pub mid_max: f64,
    pub late_max: f64,
}

/// Decides whether `beta` stays within `6C` of `alpha` on `[0, H]` without
/// growing in the last half of the window.
pub fn asymptotic_check<M: MetricSpace>(
    space: &M,
    alpha: &UnitSpeedRay,
    beta: &UnitSpeedRay,
    c: f64,
    horizon: f64,
    samples: usize,
) -> Result<AsymptoticReport> {
    let samples = samples.max(8);
    let mut sup = 0.0f64;
    let mut sup_at = 0.0;
    let (mut mid_max, mut late_max) = (0.0f64, 0.0f64);
    for k in 0..=samples {
        let t = horizon * k as f64 / samples as f64;
        let d = distance_to_ray(space, alpha, beta, t, 1e-9)?;
        if d > sup {
            sup = d;
            sup_at = t;
        }
        if t > horizon / 2.0 {
            late_max = late_max.max(d);
        } else if t >= horizon / 4.0 {
            mid_max = mid_max.max(d);
        }
    }
    let slack = 1e-9 * (1.0 + mid_max);
    let verdict = if sup <= 6.0 * c && late_max <= mid_max + slack {
        AsymptoticVerdict::Asymptotic
    } else if sup > 6.0 * c && late_max > mid_max + slack {
        AsymptoticVerdict::Divergent
    } else {
        return Err(Error::Inconclusive(format!(
            "sup {sup} vs 6C = {}, late max {late_max} vs mid max {mid_max}",
            6.0 * c
        )));
    };
    Ok(AsymptoticReport {
        verdict,
        c,
        horizon,
        sup,
        sup_at,
        within_5c: sup <= 5.0 * c,
        within_6c: sup <= 6.0 * c,
        mid_max,
        late_max,
    })
}

#[derive(Clone, Debug, Serialize)]
pub struct EscapeTime {
    /// Last time `beta` is within `2C` of `alpha`.
    pub t: f64,
    pub c: f64,
    pub level: f64,
    pub step: f64,
    /// `beta` stays outside the level on `(t, tail_checked_to]` at the sweep step.
    pub tail_checked_to: f64,
}

/// `T(alpha, beta) = sup { t : d(beta(t), alpha) <= 2C }`.
///
/// Sweeps at step `C / 4` on a window that doubles until the last crossing is
/// followed by a tail at least as long as the time before it, then bisects
/// the crossing.
pub fn t_first_escape<M: MetricSpace>(space: &M, alpha: &UnitSpeedRay, beta: &UnitSpeedRay, c: f64, max_horizon: f64) -> Result<EscapeTime> {
    let level = 2.0 * c;
    let step = c / 4.0;
    if step <= 0.0 {
        return Err(Error::Domain(format!("contraction constant {c} must be positive")));
    }
    let f = |t: f64| distance_to_ray(space, alpha, beta, t, 1e-9);
    let f0 = f(0.0)?;
    if f0 > level {
        return Err(Error::Precondition(format!("d(beta(0), alpha) = {f0} exceeds 2C = {level}")));
    }
    let mut samples = vec![(0.0, f0)];
    let mut window = (64.0 * step).min(max_horizon);
    loop {
        while samples.last().expect("non-empty").0 < window {
            let t = (samples.last().expect("non-empty").0 + step).min(window);
            samples.push((t, f(t)?));
        }
        let last_in = samples.iter().rposition(|&(_, d)| d <= level).expect("f(0) <= level");
        let at_limit = window >= max_horizon;
        if last_in + 1 == samples.len() {
            if at_limit {
                if samples.iter().all(|&(_, d)| d <= level) {
                    return Err(Error::NeverEscapes { level });
                }
                return Err(Error::Inconclusive(format!("beta is back within 2C at the horizon {max_horizon}")));
            }
            window = (2.0 * window).min(max_horizon);
            continue;
        }
        let crossing = samples[last_in + 1].0;
        if window < 2.0 * crossing && !at_limit {
            window = (2.0 * window).min(max_horizon);
            continue;
        }
        let (a, b) = (samples[last_in].0, crossing);
        let t = bisect_level(&f, a, b, level)?;
        return Ok(EscapeTime { t, c, level, step, tail_checked_to: window });
    }
}

#[derive(Clone, Debug, Serialize)]
pub struct MorseWitness {
    pub lambda: f64,
    pub epsilon: f64,
    /// `max_k d(p_k, gamma)` over the polyline samples.
    pub deviation: f64,
    pub worst_index: usize,
}

/// Checks that `path` is a `(lambda, epsilon)`-quasi-geodesic with endpoints
/// on `ray` (on its samples) and reports its largest distance from the ray.
pub fn morse_witness<M: MetricSpace>(
    space: &M,
    ray: &UnitSpeedRay,
    path: &PathPolyline<M::Scalar>,
    lambda: f64,
    epsilon: f64,
    tol: f64,
) -> Result<MorseWitness> {
    let eps = M::Scalar::engine_eps().max(tol) * 16.0;
    for end in [path.start(), path.end()] {
        let d = project_onto(space, end, ray, tol)?.distance.to_f64();
        if d > eps {
            return Err(Error::Precondition(format!("endpoint {end} is {d} from the ray")));
        }
    }
    let n = path.points.len();
    for i in 0..n {
        for j in i + 1..n {
            let len = (path.cumulative[j].clone() - path.cumulative[i].clone()).to_f64();
            let d = space.distance(&path.points[i], &path.points[j])?.to_f64();
            if d < len / lambda - epsilon - eps || d > lambda * len + epsilon + eps {
                return Err(Error::Precondition(format!(
                    "samples {i} and {j} break the ({lambda}, {epsilon}) bounds: d = {d}, length = {len}"
                )));
            }
        }
    }
    let mut deviation = 0.0f64;
    let mut worst_index = 0;
    for (k, p) in path.points.iter().enumerate() {
        let d = project_onto(space, p, ray, tol)?.distance.to_f64();
        if d > deviation {
            deviation = d;
            worst_index = k;
        }
    }
    Ok(MorseWitness { lambda, epsilon, deviation, worst_index })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::annulus::AnnulusSpace;
    use crate::metric::MetricSpace;
    use crate::scalar::q;
    use crate::zoo::build_x;

    #[test]
    fn escape_of_beta_from_alpha() {
        let x = build_x(4).unwrap();
        let (a, b) = (x.rc_ray("alpha").unwrap(), x.rc_ray("beta").unwrap());
        let e = t_first_escape(&x, &a, &b, 1.0, 1e4).unwrap();
        assert!((e.t - 2.0).abs() < 1e-8, "{e:?}");
        assert!(matches!(t_first_escape(&x, &a, &a, 1.0, 1e3), Err(Error::NeverEscapes { .. })));
        let g = x.ray_from_basepoint("g2").unwrap();
        assert!(matches!(t_first_escape(&x, &g, &b, 0.5, 1e3), Ok(_)));
    }

    #[test]
    fn annulus_asymptotic_and_divergent() {
        let s = AnnulusSpace::bare();
        let (a, b) = (s.alpha(), s.beta());
        let c = 1.1 * std::f64::consts::FRAC_PI_2;
        let same = asymptotic_check(&s, &a, &a, c, 200.0, 64).unwrap();
        assert_eq!(same.verdict, AsymptoticVerdict::Asymptotic);
        let apart = asymptotic_check(&s, &a, &b, c, 200.0, 64).unwrap();
        assert_eq!(apart.verdict, AsymptoticVerdict::Divergent);
    }

    #[test]
    fn git_and_morse_in_x() {
        let x = build_x(6).unwrap();
        let a = x.rc_ray("alpha").unwrap();
        let seg = x.geodesic(&x.point("g5", q(3)).unwrap(), &x.point("g5", q(40)).unwrap(), 1.0).unwrap();
        let r = git_check(&x, &a, &seg, 1.0, 0.0).unwrap();
        assert_eq!(r.diameter, 0.0);
        assert!(r.passed);
        let detour = PathPolyline::through(
            &x,
            vec![x.point("alpha", q(3)).unwrap(), x.point("g5", q(0)).unwrap(), x.point("alpha", q(7)).unwrap()],
        )
        .unwrap();
        assert!(morse_witness(&x, &a, &detour, 2.0, 0.0, 0.0).is_err());
        let w = morse_witness(&x, &a, &detour, 20.0, 0.0, 0.0).unwrap();
        assert_eq!(w.deviation, 32.0);
    }
}
