//! Closest-point projections onto rays, empirical contraction profiles and
//! the strong-contraction constant.
//!
//! A ray is `rho`-contracting when every pair `x, y` with
//! `d(x, y) <= d(x, gamma)` has `diam(pi(x) U pi(y)) <= rho(d(x, gamma))`.
//! Profiles bucket sampled pairs by `floor(log2 R)` (bucket 0 holds `R < 2`)
//! and report the largest diameter per bucket together with a witness pair.

mod checks;
mod claim;

use rayon::prelude::*;
use serde::Serialize;

use crate::annulus::{AnnulusPairSampler, AnnulusPointSampler, AnnulusSpace};
use crate::boundary::BoundaryPoint;
use crate::complex::RayComplex;
use crate::error::{Error, Result};
use crate::metric::{MetricSpace, Point, RayProjection, SpaceId, UnitSpeedRay};
use crate::sampling::{trial_rng, PairSampler};
use crate::scalar::{q, q_frac, q_pow2, Scalar};

pub use checks::{
    asymptotic_check, git_check, morse_witness, t_first_escape, AsymptoticReport, AsymptoticVerdict, EscapeTime,
    GitReport, MorseWitness,
};
pub use claim::{claim_check, neighborhood_basis_check, BasisReport, BasisRow, ClaimPair, ClaimReport};

/// Parameter horizon that contains every near-minimiser of `t -> d(x, ray(t))`:
/// such a `t` satisfies `t <= 2 d(x, ray(0)) + tol`.
pub fn auto_horizon<M: MetricSpace>(space: &M, x: &Point, ray: &UnitSpeedRay) -> Result<M::Scalar> {
    let d0 = space.distance(x, &space.ray_point(ray, &M::Scalar::zero())?)?;
    Ok(d0.clone() + d0 + M::Scalar::from_i64(1))
}

/// Closest-point projection of `x` onto one ray with an automatic horizon.
pub fn project_onto<M: MetricSpace>(space: &M, x: &Point, ray: &UnitSpeedRay, tol: f64) -> Result<RayProjection<M::Scalar>> {
    space.project_onto_ray(x, ray, &auto_horizon(space, x, ray)?, tol)
}

/// A piece of a projection set: parameters `[lo, hi]` on target ray `ray`.
#[derive(Clone, Debug, Serialize)]
pub struct ProjectionPiece<S: Scalar> {
    pub ray: usize,
    #[serde(serialize_with = "crate::report::ser_display")]
    pub lo: S,
    #[serde(serialize_with = "crate::report::ser_display")]
    pub hi: S,
}

#[derive(Clone, Debug, Serialize)]
pub struct ProjectionSet<S: Scalar> {
    #[serde(serialize_with = "crate::report::ser_display")]
    pub distance: S,
    pub pieces: Vec<ProjectionPiece<S>>,
}

/// Projection onto the union of `targets`: the closest pieces on every ray
/// whose distance is within `tol` of the overall minimum (exact ties in
/// exact spaces).
pub fn project<M: MetricSpace>(space: &M, x: &Point, targets: &[&UnitSpeedRay], tol: f64) -> Result<ProjectionSet<M::Scalar>> {
    if targets.is_empty() {
        return Err(Error::Domain("projection onto an empty union".into()));
    }
    let per: Vec<RayProjection<M::Scalar>> =
        targets.iter().map(|r| project_onto(space, x, r, tol)).collect::<Result<_>>()?;
    let best = per.iter().map(|p| p.distance.clone()).reduce(Scalar::min_of).expect("non-empty");
    let slack = if M::Scalar::EXACT { M::Scalar::zero() } else { M::Scalar::from_f64(tol) };
    let mut pieces = Vec::new();
    for (k, p) in per.into_iter().enumerate() {
        if p.distance <= best.clone() + slack.clone() {
            pieces.extend(p.intervals.into_iter().map(|(lo, hi)| ProjectionPiece { ray: k, lo, hi }));
        }
    }
    Ok(ProjectionSet { distance: best, pieces })
}

/// Diameter of the union of projection pieces.
pub fn joint_diameter<M: MetricSpace>(
    space: &M,
    targets: &[&UnitSpeedRay],
    pieces: &[&ProjectionPiece<M::Scalar>],
) -> Result<M::Scalar> {
    let ends: Vec<(usize, M::Scalar)> = pieces.iter().flat_map(|p| [(p.ray, p.lo.clone()), (p.ray, p.hi.clone())]).collect();
    let mut diam = M::Scalar::zero();
    for (i, (ra, a)) in ends.iter().enumerate() {
        for (rb, b) in &ends[i + 1..] {
            let d = if ra == rb {
                (a.clone() - b.clone()).abs_val()
            } else {
                space.distance(&space.ray_point(targets[*ra], a)?, &space.ray_point(targets[*rb], b)?)?
            };
            diam = diam.max_of(d);
        }
    }
    Ok(diam)
}

/// A sampled pair, its radius `R = d(x, gamma)` and `diam(pi(x) U pi(y))`.
#[derive(Clone, Debug, Serialize)]
pub struct Witness {
    pub x: Point,
    pub y: Point,
    pub radius: f64,
    pub diameter: f64,
}

/// Evaluates one candidate pair. `None` if `d(x, y) > d(x, gamma)`.
pub fn contraction_witness<M: MetricSpace>(space: &M, ray: &UnitSpeedRay, x: &Point, y: &Point, tol: f64) -> Result<Option<Witness>> {
    let px = project_onto(space, x, ray, tol)?;
    let dxy = space.distance(x, y)?;
    let slack = if M::Scalar::EXACT { 0.0 } else { M::Scalar::engine_eps() * (1.0 + px.distance.to_f64()) };
    if dxy.to_f64() > px.distance.to_f64() + slack && !(M::Scalar::EXACT && dxy <= px.distance) {
        return Ok(None);
    }
    let py = project_onto(space, y, ray, tol)?;
    let pieces: Vec<ProjectionPiece<M::Scalar>> = px
        .intervals
        .iter()
        .chain(&py.intervals)
        .map(|(lo, hi)| ProjectionPiece { ray: 0, lo: lo.clone(), hi: hi.clone() })
        .collect();
    let refs: Vec<&ProjectionPiece<M::Scalar>> = pieces.iter().collect();
    let diam = joint_diameter(space, &[ray], &refs)?;
    Ok(Some(Witness { x: x.clone(), y: y.clone(), radius: px.distance.to_f64(), diameter: diam.to_f64() }))
}

pub fn bucket_of(radius: f64) -> i32 {
    if radius < 2.0 {
        0
    } else {
        radius.log2().floor() as i32
    }
}

#[derive(Clone, Debug, Serialize)]
pub struct ProfileBin {
    pub bucket: i32,
    /// Smallest radius the bucket can hold.
    pub radius_lo: f64,
    pub count: usize,
    pub max_diameter: f64,
    /// Running maximum over this and all lower buckets.
    pub envelope: f64,
    pub witness: Witness,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
#[serde(tag = "kind", rename_all = "lowercase")]
pub enum Classification {
    Bounded { c: f64 },
    Sublinear { slope: f64 },
    Violated { slope: f64 },
    Inconclusive { reason: String },
}

/// Minimum number of populated buckets for a classification.
pub const MIN_BUCKETS: usize = 6;

#[derive(Clone, Debug, Serialize)]
pub struct ContractionProfile {
    pub ray: String,
    pub space: SpaceId,
    pub seed: u64,
    pub samples: usize,
    pub rejected: usize,
    pub bins: Vec<ProfileBin>,
    pub classification: Classification,
}

impl ContractionProfile {
    pub fn max_diameter(&self) -> f64 {
        self.bins.iter().map(|b| b.max_diameter).fold(0.0, f64::max)
    }

    pub fn bin(&self, bucket: i32) -> Option<&ProfileBin> {
        self.bins.iter().find(|b| b.bucket == bucket)
    }
}

/// Classifies a profile from its populated buckets.
///
/// Bounded: at least [`MIN_BUCKETS`] buckets and the maximum over the last
/// three is at most `1.1 * (max over the earlier ones) + 0.05`. Otherwise the
/// least-squares slope of `log2(envelope)` against the bucket index (buckets
/// `>= 1`) separates sublinear (`< 0.75`) from linear growth.
pub fn classify(bins: &[ProfileBin]) -> Classification {
    if bins.len() < MIN_BUCKETS {
        return Classification::Inconclusive { reason: format!("{} populated buckets, need {MIN_BUCKETS}", bins.len()) };
    }
    let split = bins.len() - 3;
    let early = bins[..split].iter().map(|b| b.max_diameter).fold(0.0, f64::max);
    let late = bins[split..].iter().map(|b| b.max_diameter).fold(0.0, f64::max);
    if late <= 1.1 * early + 0.05 {
        return Classification::Bounded { c: early.max(late) };
    }
    let pts: Vec<(f64, f64)> = bins
        .iter()
        .filter(|b| b.bucket >= 1 && b.envelope > 0.0)
        .map(|b| (b.bucket as f64, b.envelope.log2()))
        .collect();
    if pts.len() < 3 {
        return Classification::Inconclusive { reason: "too few positive buckets for a slope".into() };
    }
    let n = pts.len() as f64;
    let (mx, my) = (pts.iter().map(|p| p.0).sum::<f64>() / n, pts.iter().map(|p| p.1).sum::<f64>() / n);
    let sxy: f64 = pts.iter().map(|p| (p.0 - mx) * (p.1 - my)).sum();
    let sxx: f64 = pts.iter().map(|p| (p.0 - mx).powi(2)).sum();
    let slope = sxy / sxx;
    if slope < 0.75 {
        Classification::Sublinear { slope }
    } else {
        Classification::Violated { slope }
    }
}

/// Assembles bins from witnesses (in order; ties keep the earliest).
pub fn bins_from(witnesses: impl IntoIterator<Item = Witness>) -> Vec<ProfileBin> {
    let mut bins: Vec<ProfileBin> = Vec::new();
    for w in witnesses {
        let b = bucket_of(w.radius);
        match bins.iter_mut().find(|x| x.bucket == b) {
            Some(bin) => {
                bin.count += 1;
                if w.diameter > bin.max_diameter {
                    bin.max_diameter = w.diameter;
                    bin.witness = w;
                }
            }
            None => bins.push(ProfileBin {
                bucket: b,
                radius_lo: if b == 0 { 0.0 } else { (b as f64).exp2() },
                count: 1,
                max_diameter: w.diameter,
                envelope: 0.0,
                witness: w,
            }),
        }
    }
    bins.sort_by_key(|b| b.bucket);
    let mut env: f64 = 0.0;
    for b in &mut bins {
        env = env.max(b.max_diameter);
        b.envelope = env;
    }
    bins
}

/// Samples `n` pairs and builds the contraction profile of `ray`.
/// `extra` pairs (explicit witnesses) are evaluated as well.
pub fn contraction_profile<M: MetricSpace>(
    space: &M,
    ray: &UnitSpeedRay,
    sampler: &dyn PairSampler,
    n: usize,
    seed: u64,
    tol: f64,
    extra: &[(Point, Point)],
) -> Result<ContractionProfile> {
    space.check_ray(ray)?;
    let drawn: Vec<Option<Witness>> = (0..n as u64)
        .into_par_iter()
        .map(|trial| {
            let mut rng = trial_rng(seed, trial);
            match sampler.sample_pair(ray, &mut rng)? {
                Some((x, y)) => contraction_witness(space, ray, &x, &y, tol),
                None => Ok(None),
            }
        })
        .collect::<Result<_>>()?;
    let forced: Vec<Option<Witness>> =
        extra.iter().map(|(x, y)| contraction_witness(space, ray, x, y, tol)).collect::<Result<_>>()?;
    let rejected = drawn.iter().chain(&forced).filter(|w| w.is_none()).count();
    let bins = bins_from(drawn.into_iter().chain(forced).flatten());
    let classification = classify(&bins);
    Ok(ContractionProfile {
        ray: ray.label.clone(),
        space: space.id(),
        seed,
        samples: n + extra.len(),
        rejected,
        bins,
        classification,
    })
}

#[derive(Clone, Debug, Serialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum StrongContraction {
    /// Every recorded pair satisfies the contraction inequality with `rho = c`.
    Constant { c: f64 },
    /// The profile grows; the witness is the pair with the largest diameter
    /// in the top bucket.
    NotStrong { witness: Witness, slope: f64 },
}

/// Reads the strong-contraction constant off a profile.
pub fn strong_contraction_constant(profile: &ContractionProfile) -> Result<StrongContraction> {
    match &profile.classification {
        Classification::Bounded { .. } => Ok(StrongContraction::Constant { c: profile.max_diameter() }),
        Classification::Sublinear { slope } | Classification::Violated { slope } => Ok(StrongContraction::NotStrong {
            witness: profile.bins.last().expect("classified profiles have bins").witness.clone(),
            slope: *slope,
        }),
        Classification::Inconclusive { reason } => Err(Error::Inconclusive(format!("profile of {}: {reason}", profile.ray))),
    }
}

/// Pairs that push the profile of `alpha` in `X` to logarithmic growth:
/// `x = g_i(0)` at distance `2^i` from `alpha` and `y` on `cb_i` half a unit
/// from `beta(i)`. Their projections are `alpha(i)` and `alpha(0)`.
pub fn alpha_log_witnesses(x: &RayComplex, indices: impl IntoIterator<Item = i64>) -> Result<Vec<(Point, Point)>> {
    indices
        .into_iter()
        .map(|i| {
            let gx = x.point(&format!("g{i}"), q(0))?;
            let y = x.point(&format!("cb{i}"), q_pow2(i as u32) - q_frac(1, 2))?;
            Ok((gx, y))
        })
        .collect()
}

/// Sampling settings for strong-contraction constants of annulus rays.
#[derive(Clone, Debug, Serialize)]
pub struct CTableSettings {
    pub samples: usize,
    pub seed: u64,
    pub tol: f64,
    /// `C` is the largest sampled diameter over all representatives times this.
    pub padding: f64,
    pub t_range: (f64, f64),
}

impl Default for CTableSettings {
    fn default() -> Self {
        CTableSettings { samples: 240, seed: 7, tol: 1e-6, padding: 1.1, t_range: (-12.0, 28.0) }
    }
}

#[derive(Clone, Debug, Serialize)]
pub struct CRep {
    pub rep: usize,
    pub max_diameter: f64,
    pub classification: Classification,
}

#[derive(Clone, Debug, Serialize)]
pub struct CEntry {
    pub label: String,
    pub c: f64,
    pub reps: Vec<CRep>,
}

/// Strong-contraction constants `C_eta` for every boundary point of an
/// annulus space: the padded maximum over all representatives. Radii are
/// sampled up to `64 (lead + 16)` so each profile reaches well past the
/// scale of its representative's lead.
pub fn c_table(space: &AnnulusSpace, boundary: &[BoundaryPoint], settings: &CTableSettings) -> Result<Vec<CEntry>> {
    let mut out = Vec::new();
    for (k, b) in boundary.iter().enumerate() {
        let mut reps = Vec::new();
        let mut worst: f64 = 0.0;
        for (j, rep) in b.reps().into_iter().enumerate() {
            let lead = space.lead_length(rep)?;
            let top = 64.0 * (lead + 16.0);
            let points = AnnulusPointSampler::new(space, settings.t_range, (1.0 / 16.0, top));
            let pairs = AnnulusPairSampler::new(points, settings.tol);
            let seed = settings.seed ^ ((k as u64) << 32) ^ j as u64;
            let profile = contraction_profile(space, rep, &pairs, settings.samples, seed, settings.tol, &[])?;
            worst = worst.max(profile.max_diameter());
            reps.push(CRep { rep: j, max_diameter: profile.max_diameter(), classification: profile.classification });
        }
        out.push(CEntry { label: b.label.clone(), c: settings.padding * worst.max(1.0), reps });
    }
    Ok(out)
}

pub fn c_lookup(table: &[CEntry], label: &str) -> Result<f64> {
    table.iter().find(|e| e.label == label).map(|e| e.c).ok_or_else(|| Error::UnknownLabel(label.to_string()))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::complex::ComplexPairSampler;
    use crate::zoo::build_x;

    #[test]
    fn projection_onto_union() {
        let x = build_x(5).unwrap();
        let (a, b) = (x.rc_ray("alpha").unwrap(), x.rc_ray("beta").unwrap());
        let p = x.point("g3", q(0)).unwrap();
        let set = project(&x, &p, &[&a, &b], 0.0).unwrap();
        assert_eq!(set.distance, q(8));
        assert_eq!(set.pieces.len(), 2);
        let refs: Vec<_> = set.pieces.iter().collect();
        assert_eq!(joint_diameter(&x, &[&a, &b], &refs).unwrap(), q(6));
    }

    #[test]
    fn alpha_in_x_grows_logarithmically() {
        // Radii stay below the truncation scale 2^14, past which the finite
        // family makes the profile saturate.
        let x = build_x(14).unwrap();
        let alpha = x.rc_ray("alpha").unwrap();
        let sampler = ComplexPairSampler::new(&x, 1024.0);
        let extra = alpha_log_witnesses(&x, 1..=14).unwrap();
        let p = contraction_profile(&x, &alpha, &sampler, 300, 1, 0.0, &extra).unwrap();
        for i in 3..=14 {
            let bin = p.bin(i).unwrap();
            assert!(bin.max_diameter >= i as f64, "bucket {i}: {}", bin.max_diameter);
            assert!(bin.max_diameter <= 2.5 * i as f64, "bucket {i}: {}", bin.max_diameter);
        }
        assert!(matches!(p.classification, Classification::Sublinear { .. }), "{:?}", p.classification);
        assert!(matches!(strong_contraction_constant(&p).unwrap(), StrongContraction::NotStrong { .. }));
    }

    #[test]
    fn classification_rules() {
        let w = |r: f64, d: f64| Witness { x: Point::Annulus { space: SpaceId(0), t: 0.0, r: 1.0 }, y: Point::Annulus { space: SpaceId(0), t: 0.0, r: 1.0 }, radius: r, diameter: d };
        let flat = bins_from((0..10).map(|b| w((b as f64).exp2() * 2.5, 1.5)));
        assert_eq!(classify(&flat), Classification::Bounded { c: 1.5 });
        let lin = bins_from((0..10).map(|b| w((b as f64).exp2() * 2.5, (b as f64).exp2())));
        assert!(matches!(classify(&lin), Classification::Violated { .. }));
        let log = bins_from((1..12).map(|b| w((b as f64).exp2() * 1.5, b as f64)));
        assert!(matches!(classify(&log), Classification::Sublinear { .. }));
        assert!(matches!(classify(&flat[..4]), Classification::Inconclusive { .. }));
    }
}
