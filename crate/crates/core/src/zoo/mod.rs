//! The example spaces: two ray complexes `X` and `Y`, and two annulus spaces
//! `Xcat0` and `Ycat0`, each with its prebuilt boundary registry.
//!
//! All families are finite truncations with indices up to `N`.
//!
//! - `X`: rays `alpha`, `beta` glued at their origins (the basepoint `o`);
//!   for each `i`, a ray `g{i}` whose origin is joined to `alpha(i)` by a
//!   segment `ca{i}` and to `beta(i)` by a segment `cb{i}`, both of length `2^i`.
//! - `Y`: as `X` but `cb{i}` has length `2^i - 2i`. That length vanishes at
//!   `i = 1`, so the family starts at `i = 3` by default.
//! - `Xcat0`: the punctured-plane cover with a ray attached at `(i, 2^i)`.
//! - `Ycat0`: the cover with a ray attached at `(0, 2^i)`.

pub mod dsl;

use num::Signed;

use crate::annulus::{AnnulusRay, AnnulusSpace, AttachedRay, Polar};
use crate::boundary::BoundaryPoint;
use crate::complex::{BuildError, ComplexRay, RayComplex, RayComplexBuilder};
use crate::error::Result;
use crate::metric::{MetricSpace, RayPath, UnitSpeedRay};
use crate::scalar::{q, q_pow2, Scalar, Q};

/// First index of the `Y` family unless stated otherwise.
pub const Y_DEFAULT_START: i64 = 3;

fn family(start: i64, n: i64, cb_length: impl Fn(i64) -> Q) -> Result<RayComplex, BuildError> {
    if n < start.max(1) {
        return Err(BuildError::EmptyFamily(n));
    }
    let mut b = RayComplexBuilder::new();
    b.ray("alpha")?.ray("beta")?;
    b.glue(("alpha", q(0)), ("beta", q(0)))?;
    b.basepoint(("alpha", q(0)))?;
    for i in start..=n {
        let (g, ca, cb) = (format!("g{i}"), format!("ca{i}"), format!("cb{i}"));
        let la = q_pow2(i as u32);
        let lb = cb_length(i);
        if !lb.is_positive() {
            return Err(BuildError::DegenerateIndex { index: i, length: lb.to_string() });
        }
        b.ray(&g)?.segment(&ca, la.clone())?.segment(&cb, lb.clone())?;
        b.glue((&ca, q(0)), (&g, q(0)))?;
        b.glue((&ca, la), ("alpha", q(i)))?;
        b.glue((&cb, q(0)), (&g, q(0)))?;
        b.glue((&cb, lb), ("beta", q(i)))?;
    }
    b.build()
}

/// `X` with indices `1..=n`.
pub fn build_x(n: i64) -> Result<RayComplex, BuildError> {
    build_x_range(1, n)
}

/// `X` with indices `start..=n`.
pub fn build_x_range(start: i64, n: i64) -> Result<RayComplex, BuildError> {
    family(start, n, |i| q_pow2(i as u32))
}

/// `Y` with indices `3..=n`.
pub fn build_y(n: i64) -> Result<RayComplex, BuildError> {
    build_y_range(Y_DEFAULT_START, n)
}

/// `Y` with indices `start..=n`; fails naming the first index whose
/// `beta` connector would have nonpositive length.
pub fn build_y_range(start: i64, n: i64) -> Result<RayComplex, BuildError> {
    family(start, n, |i| q_pow2(i as u32) - q(2 * i))
}

fn cat0(name: &str, n: i64, base: impl Fn(i64) -> Polar) -> Result<AnnulusSpace> {
    if n < 1 {
        return Err(BuildError::EmptyFamily(n).into());
    }
    AnnulusSpace::new(name, (1..=n).map(|i| AttachedRay { id: i as usize, base: base(i) }).collect())
}

/// Cover with rays attached at `(i, 2^i)`, `i = 1..=n`.
pub fn build_xcat0(n: i64) -> Result<AnnulusSpace> {
    cat0("Xcat0", n, |i| Polar { t: i as f64, r: (i as f64).exp2() })
}

/// Cover with rays attached at `(0, 2^i)`, `i = 1..=n`.
pub fn build_ycat0(n: i64) -> Result<AnnulusSpace> {
    cat0("Ycat0", n, |i| Polar { t: 0.0, r: (i as f64).exp2() })
}

/// Boundary points of a ray complex: one per unbounded edge. The canonical
/// representative leaves the basepoint along a shortest route; the auxiliary
/// one is the bare edge (or, for edges starting at the basepoint, the
/// subray from parameter 1).
pub fn complex_boundary(space: &RayComplex) -> Result<Vec<BoundaryPoint>> {
    let mut out = Vec::new();
    for name in space.ray_names() {
        let canonical = space.ray_from_basepoint(&name)?;
        let bare = space.rc_ray(&name)?;
        let aux = if bare.path == canonical.path {
            let e = space.edge_id(&name).expect("ray edge exists");
            UnitSpeedRay {
                label: name.clone(),
                space: space.id(),
                path: RayPath::Complex(ComplexRay { legs: Vec::new(), tail: e, tail_start: q(1) }),
            }
        } else {
            bare
        };
        let settle = match &canonical.path {
            RayPath::Complex(r) => r.legs.iter().map(|l| l.length()).sum::<Q>().to_f64(),
            RayPath::Annulus(_) => 0.0,
        };
        out.push(BoundaryPoint { label: name, space: space.id(), canonical, aux: vec![aux], settle });
    }
    Ok(out)
}

/// Start of the perturbed representatives in annulus spaces.
pub const PERTURBED_START: Polar = Polar { t: 0.0, r: 1.5 };

/// Boundary points of an annulus space: `alpha`, `beta` and `g{i}` per
/// attached ray. Each has a canonical representative from `o` and one
/// perturbed representative starting at `(0, 1.5)`.
pub fn annulus_boundary(space: &AnnulusSpace) -> Result<Vec<BoundaryPoint>> {
    let o = Polar { t: 0.0, r: 1.0 };
    let mut out = Vec::new();
    for (label, sign) in [("alpha", 1.0), ("beta", -1.0)] {
        out.push(BoundaryPoint {
            label: label.to_string(),
            space: space.id(),
            canonical: space.make_ray(label, AnnulusRay::Circle { sign, offset: 0.0 }),
            aux: vec![space.make_ray(label, AnnulusRay::Wrap { start: PERTURBED_START, sign })],
            settle: 0.0,
        });
    }
    for ray in space.rays() {
        let label = format!("g{}", ray.id);
        let canonical = space.ray_through(&label, ray.id, o)?;
        out.push(BoundaryPoint {
            label: label.clone(),
            space: space.id(),
            settle: space.lead_length(&canonical)?,
            canonical,
            aux: vec![space.ray_through(&label, ray.id, PERTURBED_START)?],
        });
    }
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::metric::gromov_product;

    #[test]
    fn sizes_and_errors() {
        assert_eq!(build_x(3).unwrap().edge_count(), 11);
        assert!(build_x(0).is_err());
        let x1 = build_x(1).unwrap();
        let d = x1.rc_distance(&x1.point("g1", q(0)).unwrap(), &x1.point("alpha", q(1)).unwrap()).unwrap();
        assert_eq!(d, q(2));
        match build_y_range(1, 5) {
            Err(BuildError::DegenerateIndex { index, .. }) => assert_eq!(index, 1),
            other => panic!("{other:?}"),
        }
        let y = build_y(5).unwrap();
        assert_eq!(y.edge_kind(y.edge_id("cb3").unwrap()), &crate::complex::EdgeKind::Segment(q(2)));
        assert_eq!(y.ray_names().len(), 5);
        assert!(build_y(2).is_err());
    }

    #[test]
    fn x_truncations_are_monotone() {
        let (small, big) = (build_x(4).unwrap(), build_x(7).unwrap());
        for (a, b) in [("alpha:3", "g2:5"), ("beta:9", "cb4:3"), ("g1:0", "g4:2")] {
            let p = |s: &RayComplex, lit: &str| {
                let (e, t) = lit.split_once(':').unwrap();
                s.point(e, crate::scalar::parse_q(t).unwrap()).unwrap()
            };
            assert_eq!(small.rc_distance(&p(&small, a), &p(&small, b)).unwrap(), big.rc_distance(&p(&big, a), &p(&big, b)).unwrap());
        }
    }

    #[test]
    fn cat0_bases() {
        let x = build_xcat0(12).unwrap();
        assert_eq!(x.base_of(3).unwrap(), Polar { t: 3.0, r: 8.0 });
        let y = build_ycat0(14).unwrap();
        assert_eq!(y.base_of(3).unwrap(), Polar { t: 0.0, r: 8.0 });
        assert_ne!(x.id(), y.id());
        assert!(build_xcat0(0).is_err());
    }

    #[test]
    fn canonical_reps_start_at_the_basepoint() {
        let x = build_x(5).unwrap();
        for b in complex_boundary(&x).unwrap() {
            let p = x.ray_point(&b.canonical, &q(0)).unwrap();
            assert_eq!(x.rc_distance(&p, &x.basepoint()).unwrap(), q(0), "{}", b.label);
        }
        let a = build_xcat0(5).unwrap();
        for b in annulus_boundary(&a).unwrap() {
            let p = a.ray_point(&b.canonical, &0.0).unwrap();
            assert!(a.distance(&p, &a.basepoint()).unwrap() < 1e-12);
        }
        let xs = complex_boundary(&x).unwrap();
        let g3 = xs.iter().find(|b| b.label == "g3").unwrap();
        let alpha = xs.iter().find(|b| b.label == "alpha").unwrap();
        let v = gromov_product(
            &x,
            &x.ray_point(&alpha.canonical, &q(40)).unwrap(),
            &x.ray_point(&g3.canonical, &q(40)).unwrap(),
            &x.basepoint(),
        )
        .unwrap();
        assert_eq!(v, q(3));
    }
}
