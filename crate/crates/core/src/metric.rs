//! Space-agnostic primitives: points, unit-speed rays, polylines, Gromov
//! products and metric-axiom spot checks.

use std::fmt;

use rand::Rng;
use rand_chacha::ChaCha8Rng;
use serde::ser::SerializeStruct;
use serde::{Serialize, Serializer};
use sha2::{Digest, Sha256};

use crate::annulus::AnnulusRay;
use crate::complex::{ComplexRay, EdgeId};
use crate::error::{Error, Result};
use crate::sampling::{trial_rng, PointSampler};
use crate::scalar::{Scalar, Q};

/// Content hash identifying a space. Two spaces with the same content share an id.
#[derive(Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct SpaceId(pub u64);

impl SpaceId {
    pub fn of_content(bytes: &[u8]) -> Self {
        let digest = Sha256::digest(bytes);
        let mut word = [0u8; 8];
        word.copy_from_slice(&digest[..8]);
        SpaceId(u64::from_be_bytes(word))
    }
}

impl fmt::Display for SpaceId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{:016x}", self.0)
    }
}

impl fmt::Debug for SpaceId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "SpaceId({self})")
    }
}

impl Serialize for SpaceId {
    fn serialize<S: Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        s.serialize_str(&self.to_string())
    }
}

/// A location in one of the implemented spaces. Every point carries the id of
/// its host space; operations reject points from a different space.
#[derive(Clone, Debug, PartialEq)]
pub enum Point {
    /// Point on edge `edge` of a ray complex, at `offset` from the edge origin.
    Complex { space: SpaceId, edge: EdgeId, offset: Q },
    /// Point of the punctured-plane cover: angle coordinate `t` (unbounded), radius `r >= 1`.
    Annulus { space: SpaceId, t: f64, r: f64 },
    /// Point at distance `s` from the base of attached ray `ray`.
    Attached { space: SpaceId, ray: usize, s: f64 },
}

impl Point {
    pub fn space(&self) -> SpaceId {
        match self {
            Point::Complex { space, .. } | Point::Annulus { space, .. } | Point::Attached { space, .. } => *space,
        }
    }

    /// The same coordinates re-homed in another space with the same coordinate system.
    pub fn rebind(&self, space: SpaceId) -> Point {
        let mut p = self.clone();
        match &mut p {
            Point::Complex { space: s, .. } | Point::Annulus { space: s, .. } | Point::Attached { space: s, .. } => *s = space,
        }
        p
    }
}

impl fmt::Display for Point {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Point::Complex { edge, offset, .. } => write!(f, "e{}:{}", edge.0, offset),
            Point::Annulus { t, r, .. } => write!(f, "({t}, {r})"),
            Point::Attached { ray, s, .. } => write!(f, "ray{ray}:{s}"),
        }
    }
}

impl Serialize for Point {
    fn serialize<S: Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        match self {
            Point::Complex { space, edge, offset } => {
                let mut st = s.serialize_struct("ComplexPoint", 3)?;
                st.serialize_field("space", space)?;
                st.serialize_field("edge", &edge.0)?;
                st.serialize_field("offset", &offset.to_string())?;
                st.end()
            }
            Point::Annulus { space, t, r } => {
                let mut st = s.serialize_struct("AnnulusPoint", 3)?;
                st.serialize_field("space", space)?;
                st.serialize_field("t", t)?;
                st.serialize_field("r", r)?;
                st.end()
            }
            Point::Attached { space, ray, s: param } => {
                let mut st = s.serialize_struct("AttachedRayPoint", 3)?;
                st.serialize_field("space", space)?;
                st.serialize_field("ray", ray)?;
                st.serialize_field("s", param)?;
                st.end()
            }
        }
    }
}

/// Geometric description of a ray; evaluated by its host space.
#[derive(Clone, Debug, PartialEq)]
pub enum RayPath {
    Complex(ComplexRay),
    Annulus(AnnulusRay),
}

/// A unit-speed geodesic ray `[0, inf) -> X`.
#[derive(Clone, Debug, PartialEq)]
pub struct UnitSpeedRay {
    pub label: String,
    pub space: SpaceId,
    pub path: RayPath,
}

/// Closest-point set of a point on one ray: parameter intervals `[lo, hi]`
/// (degenerate in exact spaces).
#[derive(Clone, Debug, PartialEq)]
pub struct RayProjection<S> {
    pub distance: S,
    pub intervals: Vec<(S, S)>,
}

/// A metric space the rest of the crate can run experiments on.
pub trait MetricSpace: Sync {
    type Scalar: Scalar;

    fn id(&self) -> SpaceId;

    fn basepoint(&self) -> Point;

    fn distance(&self, p: &Point, q: &Point) -> Result<Self::Scalar>;

    fn ray_point(&self, ray: &UnitSpeedRay, t: &Self::Scalar) -> Result<Point>;

    /// Closest points of `x` on `ray` restricted to parameters `[0, horizon]`.
    /// Errors with [`Error::HorizonTooSmall`] when a minimiser sits at the horizon.
    fn project_onto_ray(
        &self,
        x: &Point,
        ray: &UnitSpeedRay,
        horizon: &Self::Scalar,
        tol: f64,
    ) -> Result<RayProjection<Self::Scalar>>;

    /// A geodesic from `p` to `q` sampled with consecutive points at most
    /// `max_spacing` apart (exact spaces return the vertex route).
    fn geodesic(&self, p: &Point, q: &Point, max_spacing: f64) -> Result<PathPolyline<Self::Scalar>>;

    fn check_point(&self, p: &Point) -> Result<()> {
        if p.space() != self.id() {
            return Err(Error::SpaceMismatch(p.space(), self.id()));
        }
        Ok(())
    }

    fn check_ray(&self, ray: &UnitSpeedRay) -> Result<()> {
        if ray.space != self.id() {
            return Err(Error::SpaceMismatch(ray.space, self.id()));
        }
        Ok(())
    }
}

/// Ordered sample points with cumulative length.
#[derive(Clone, Debug, PartialEq, Serialize)]
#[serde(bound(serialize = "S: Scalar"))]
pub struct PathPolyline<S> {
    pub points: Vec<Point>,
    #[serde(serialize_with = "serialize_scalars")]
    pub cumulative: Vec<S>,
}

fn serialize_scalars<S: Scalar, Ser: Serializer>(v: &[S], s: Ser) -> std::result::Result<Ser::Ok, Ser::Error> {
    s.collect_seq(v.iter().map(|x| x.to_string()))
}

impl<S: Scalar> PathPolyline<S> {
    /// Polyline through `points`, with cumulative length measured by `space`.
    pub fn through<M: MetricSpace<Scalar = S>>(space: &M, points: Vec<Point>) -> Result<Self> {
        if points.is_empty() {
            return Err(Error::Domain("empty polyline".into()));
        }
        let mut cumulative = Vec::with_capacity(points.len());
        let mut acc = S::zero();
        cumulative.push(acc.clone());
        for w in points.windows(2) {
            acc = acc + space.distance(&w[0], &w[1])?;
            cumulative.push(acc.clone());
        }
        Ok(PathPolyline { points, cumulative })
    }

    pub fn length(&self) -> S {
        self.cumulative.last().cloned().unwrap_or_else(S::zero)
    }

    pub fn start(&self) -> &Point {
        &self.points[0]
    }

    pub fn end(&self) -> &Point {
        self.points.last().expect("non-empty polyline")
    }

    /// Checks monotone cumulative length and that consecutive distances sum to it.
    pub fn validate<M: MetricSpace<Scalar = S>>(&self, space: &M) -> Result<f64> {
        let mut sum = 0.0;
        let mut worst: f64 = 0.0;
        for (i, w) in self.points.windows(2).enumerate() {
            if self.cumulative[i + 1] < self.cumulative[i] {
                return Err(Error::Domain("cumulative length decreases".into()));
            }
            sum += space.distance(&w[0], &w[1])?.to_f64();
            worst = worst.max((sum - self.cumulative[i + 1].to_f64()).abs());
        }
        Ok(worst)
    }
}

/// `(x . y)_z = (d(x,z) + d(y,z) - d(x,y)) / 2`, clamped at zero for float engines.
pub fn gromov_product<M: MetricSpace>(space: &M, x: &Point, y: &Point, z: &Point) -> Result<M::Scalar> {
    for p in [x, y, z] {
        space.check_point(p)?;
    }
    let v = (space.distance(x, z)? + space.distance(y, z)? - space.distance(x, y)?).half();
    Ok(v.max_of(M::Scalar::zero()))
}

#[derive(Clone, Debug, Serialize)]
pub struct AxiomViolation {
    pub kind: &'static str,
    pub amount: f64,
    pub points: Vec<Point>,
}

#[derive(Clone, Debug, Serialize)]
pub struct AxiomReport {
    pub trials: usize,
    pub tolerance: f64,
    pub max_symmetry_defect: f64,
    pub max_self_distance: f64,
    pub max_triangle_excess: f64,
    pub max_product_excess: f64,
    pub violations: Vec<AxiomViolation>,
}

impl AxiomReport {
    pub fn passed(&self) -> bool {
        self.violations.is_empty()
    }
}

/// Samples `n` triples and checks symmetry, `d(x,x) = 0`, the triangle
/// inequality and `(x.y)_z <= min(d(x,z), d(y,z))`, all within the engine tolerance.
pub fn metric_axiom_check<M: MetricSpace>(
    space: &M,
    sampler: &dyn PointSampler,
    n: usize,
    seed: u64,
) -> Result<AxiomReport> {
    if n == 0 {
        return Err(Error::Precondition("n must be at least 1".into()));
    }
    let eps = M::Scalar::engine_eps();
    let mut report = AxiomReport {
        trials: n,
        tolerance: eps,
        max_symmetry_defect: 0.0,
        max_self_distance: 0.0,
        max_triangle_excess: 0.0,
        max_product_excess: 0.0,
        violations: Vec::new(),
    };
    for trial in 0..n {
        let mut rng: ChaCha8Rng = trial_rng(seed, trial as u64);
        let x = sampler.sample(&mut rng);
        let y = if rng.gen_bool(0.05) { x.clone() } else { sampler.sample(&mut rng) };
        let z = sampler.sample(&mut rng);
        let dxy = space.distance(&x, &y)?;
        let dyx = space.distance(&y, &x)?;
        let dyz = space.distance(&y, &z)?;
        let dxz = space.distance(&x, &z)?;
        let dxx = space.distance(&x, &x)?;

        let sym = (dxy.clone() - dyx).abs_val().to_f64();
        let selfd = dxx.to_f64();
        let tri = (dxz.clone() - dxy.clone() - dyz.clone()).to_f64().max(0.0);
        let gp = gromov_product(space, &x, &y, &z)?;
        let bound = dxz.min_of(dyz);
        let gp_excess = (gp - bound).to_f64().max(0.0);

        report.max_symmetry_defect = report.max_symmetry_defect.max(sym);
        report.max_self_distance = report.max_self_distance.max(selfd);
        report.max_triangle_excess = report.max_triangle_excess.max(tri);
        report.max_product_excess = report.max_product_excess.max(gp_excess);

        let mut flag = |kind: &'static str, amount: f64| {
            if amount > eps {
                report.violations.push(AxiomViolation {
                    kind,
                    amount,
                    points: vec![x.clone(), y.clone(), z.clone()],
                });
            }
        };
        flag("symmetry", sym);
        flag("identity", selfd);
        flag("triangle", tri);
        flag("gromov-bound", gp_excess);
    }
    Ok(report)
}

/// Uniform parameter in `[lo, hi]` from a trial RNG.
pub(crate) fn uniform(rng: &mut ChaCha8Rng, lo: f64, hi: f64) -> f64 {
    if hi <= lo {
        lo
    } else {
        rng.gen_range(lo..=hi)
    }
}
