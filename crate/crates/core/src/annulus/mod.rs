//! The universal cover of the Euclidean plane minus the open unit disk, with
//! rays wedged on at single points.
//!
//! Points are `(t, r)` with unbounded angle `t` and radius `r >= 1`, or a
//! parameter `s >= 0` on an attached ray. Distances between cover points use
//! the closed form in [`kernel`]; an attached ray meets the cover only at its
//! base, so any path onto it passes through the base.

pub mod kernel;
pub mod mesh;
mod sampler;
pub mod spiral;

use std::fmt::Write as _;

use crate::error::{Error, Result};
use crate::metric::{MetricSpace, PathPolyline, Point, RayPath, RayProjection, SpaceId, UnitSpeedRay};
use crate::minimize::{bisect_level, lipschitz_sublevel};

pub use kernel::{ann_distance, Polar};
pub use sampler::{AnnulusPairSampler, AnnulusPointSampler};

/// Ray shapes that can be evaluated in closed form.
#[derive(Clone, Debug, PartialEq)]
pub enum AnnulusRay {
    /// `t -> (sign * (offset + t), 1)` along the boundary circle.
    Circle { sign: f64, offset: f64 },
    /// Tangent segment from `start` to the circle, then around it in direction `sign`.
    Wrap { start: Polar, sign: f64 },
    /// Geodesic from `start` to the base of attached ray `ray`, then out along that ray.
    ThroughBase { start: Polar, ray: usize },
}

#[derive(Clone, Debug, PartialEq)]
pub struct AttachedRay {
    pub id: usize,
    pub base: Polar,
}

/// The cover with a finite list of attached rays. Basepoint `o = (0, 1)`.
#[derive(Clone, Debug)]
pub struct AnnulusSpace {
    id: SpaceId,
    name: String,
    rays: Vec<AttachedRay>,
}

/// Where a point meets the cover, and how far out along its ray it sits.
struct Anchor {
    base: Polar,
    ray: Option<usize>,
    s: f64,
}

impl AnnulusSpace {
    /// Builds a space; ray ids and bases must be distinct.
    pub fn new(name: &str, rays: Vec<AttachedRay>) -> Result<Self> {
        for (k, a) in rays.iter().enumerate() {
            Polar::new(a.base.t, a.base.r)?;
            for b in &rays[..k] {
                if a.id == b.id || a.base == b.base {
                    return Err(Error::Domain(format!("attached rays {} and {} collide", b.id, a.id)));
                }
            }
        }
        let mut content = format!("annulus {name}\n");
        for a in &rays {
            writeln!(content, "ray {} {:e} {:e}", a.id, a.base.t, a.base.r).unwrap();
        }
        Ok(AnnulusSpace { id: SpaceId::of_content(content.as_bytes()), name: name.to_string(), rays })
    }

    /// The cover with no attached rays.
    pub fn bare() -> Self {
        AnnulusSpace::new("bare", Vec::new()).expect("no rays to collide")
    }

    pub fn name(&self) -> &str {
        &self.name
    }

    pub fn rays(&self) -> &[AttachedRay] {
        &self.rays
    }

    pub fn base_of(&self, ray: usize) -> Result<Polar> {
        self.rays
            .iter()
            .find(|a| a.id == ray)
            .map(|a| a.base)
            .ok_or_else(|| Error::UnknownLabel(format!("attached ray {ray}")))
    }

    pub fn point(&self, t: f64, r: f64) -> Result<Point> {
        Polar::new(t, r)?;
        Ok(Point::Annulus { space: self.id, t, r })
    }

    pub fn attached_point(&self, ray: usize, s: f64) -> Result<Point> {
        self.base_of(ray)?;
        if !(s >= 0.0) {
            return Err(Error::Domain(format!("attached-ray parameter {s} is negative")));
        }
        Ok(Point::Attached { space: self.id, ray, s })
    }

    fn anchor(&self, p: &Point) -> Result<Anchor> {
        self.check_point(p)?;
        match p {
            Point::Annulus { t, r, .. } => Ok(Anchor { base: Polar { t: *t, r: *r }, ray: None, s: 0.0 }),
            Point::Attached { ray, s, .. } => Ok(Anchor { base: self.base_of(*ray)?, ray: Some(*ray), s: *s }),
            Point::Complex { .. } => unreachable!("rejected by check_point"),
        }
    }

    fn dist_anchors(a: &Anchor, b: &Anchor) -> f64 {
        match (a.ray, b.ray) {
            (Some(i), Some(j)) if i == j => (a.s - b.s).abs(),
            _ => a.s + b.s + kernel::dist(a.base, b.base),
        }
    }

    /// Distance between points of the cover or its attached rays.
    pub fn ann_distance_with_rays(&self, p: &Point, q: &Point) -> Result<f64> {
        Ok(Self::dist_anchors(&self.anchor(p)?, &self.anchor(q)?))
    }

    /// `alpha`: `t -> (t, 1)`.
    pub fn alpha(&self) -> UnitSpeedRay {
        self.make_ray("alpha", AnnulusRay::Circle { sign: 1.0, offset: 0.0 })
    }

    /// `beta`: `t -> (-t, 1)`.
    pub fn beta(&self) -> UnitSpeedRay {
        self.make_ray("beta", AnnulusRay::Circle { sign: -1.0, offset: 0.0 })
    }

    /// Geodesic ray from the basepoint out along attached ray `ray`.
    pub fn ray_through(&self, label: &str, ray: usize, start: Polar) -> Result<UnitSpeedRay> {
        self.base_of(ray)?;
        Polar::new(start.t, start.r)?;
        Ok(self.make_ray(label, AnnulusRay::ThroughBase { start, ray }))
    }

    pub fn make_ray(&self, label: &str, path: AnnulusRay) -> UnitSpeedRay {
        UnitSpeedRay { label: label.to_string(), space: self.id, path: RayPath::Annulus(path) }
    }

    fn annulus_ray<'a>(&self, ray: &'a UnitSpeedRay) -> Result<&'a AnnulusRay> {
        self.check_ray(ray)?;
        match &ray.path {
            RayPath::Annulus(a) => Ok(a),
            RayPath::Complex(_) => Err(Error::Domain(format!("ray `{}` is not an annulus ray", ray.label))),
        }
    }

    fn eval(&self, ray: &AnnulusRay, t: f64) -> Result<Point> {
        if !(t >= 0.0) {
            return Err(Error::Domain(format!("ray parameter {t} is negative")));
        }
        Ok(match ray {
            AnnulusRay::Circle { sign, offset } => Point::Annulus { space: self.id, t: sign * (offset + t), r: 1.0 },
            AnnulusRay::Wrap { start, sign } => {
                let lead = kernel::tangent_length(start.r);
                let touch = Polar { t: start.t + sign * kernel::tangent_angle(start.r), r: 1.0 };
                let p = if t <= lead { kernel::geodesic_point(*start, touch, t) } else { Polar { t: touch.t + sign * (t - lead), r: 1.0 } };
                Point::Annulus { space: self.id, t: p.t, r: p.r }
            }
            AnnulusRay::ThroughBase { start, ray } => {
                let base = self.base_of(*ray)?;
                let lead = kernel::dist(*start, base);
                if t < lead {
                    let p = kernel::geodesic_point(*start, base, t);
                    Point::Annulus { space: self.id, t: p.t, r: p.r }
                } else {
                    Point::Attached { space: self.id, ray: *ray, s: t - lead }
                }
            }
        })
    }

    /// Length of the part of a ray before its final piece (the circle or an
    /// attached ray).
    pub fn lead_length(&self, ray: &UnitSpeedRay) -> Result<f64> {
        Ok(match self.annulus_ray(ray)? {
            AnnulusRay::Circle { .. } => 0.0,
            AnnulusRay::Wrap { start, .. } => kernel::tangent_length(start.r),
            AnnulusRay::ThroughBase { start, ray } => kernel::ann_distance(*start, self.base_of(*ray)?)?,
        })
    }

    /// Exact projection onto a boundary-circle ray: the distance is increasing
    /// in the angular gap, so the foot is the clamped angle of the anchor.
    fn project_circle(&self, x: &Anchor, sign: f64, offset: f64, horizon: f64, tol: f64) -> Result<RayProjection<f64>> {
        let f = |t: f64| -> Result<f64> { Ok(x.s + kernel::dist(x.base, Polar { t: sign * (offset + t), r: 1.0 })) };
        let foot = (sign * x.base.t - offset).max(0.0);
        if foot > horizon {
            return Err(Error::HorizonTooSmall { horizon, detail: format!("foot at parameter {foot}") });
        }
        let value = f(foot)?;
        let level = value + tol;
        let mut step = 1e-3f64.max(tol);
        while f(foot + step)? <= level {
            step *= 2.0;
        }
        let hi = bisect_level(&f, foot, foot + step, level)?;
        let lo = if foot == 0.0 || f(0.0)? <= level {
            0.0
        } else {
            let mut back = 1e-3f64.max(tol).min(foot);
            while f(foot - back)? <= level {
                back = (back * 2.0).min(foot);
            }
            bisect_level(&f, foot - back, foot, level)?
        };
        Ok(RayProjection { distance: value, intervals: vec![(lo, hi)] })
    }
}

impl MetricSpace for AnnulusSpace {
    type Scalar = f64;

    fn id(&self) -> SpaceId {
        self.id
    }

    fn basepoint(&self) -> Point {
        Point::Annulus { space: self.id, t: 0.0, r: 1.0 }
    }

    fn distance(&self, p: &Point, q: &Point) -> Result<f64> {
        self.ann_distance_with_rays(p, q)
    }

    fn ray_point(&self, ray: &UnitSpeedRay, t: &f64) -> Result<Point> {
        self.eval(self.annulus_ray(ray)?, *t)
    }

    fn project_onto_ray(&self, x: &Point, ray: &UnitSpeedRay, horizon: &f64, tol: f64) -> Result<RayProjection<f64>> {
        let path = self.annulus_ray(ray)?;
        let anchor = self.anchor(x)?;
        if let AnnulusRay::Circle { sign, offset } = path {
            return self.project_circle(&anchor, *sign, *offset, *horizon, tol);
        }
        let f = |t: f64| -> Result<f64> { Ok(Self::dist_anchors(&anchor, &self.anchor(&self.eval(path, t)?)?)) };
        let m = lipschitz_sublevel(&f, 0.0, *horizon, 1.0, tol)?;
        if m.intervals.iter().any(|&(_, hi)| hi >= horizon - 1e-9) {
            return Err(Error::HorizonTooSmall { horizon: *horizon, detail: format!("near-minimiser at the horizon for {x}") });
        }
        Ok(RayProjection { distance: m.value, intervals: m.intervals })
    }

    fn geodesic(&self, p: &Point, q: &Point, max_spacing: f64) -> Result<PathPolyline<f64>> {
        let (a, b) = (self.anchor(p)?, self.anchor(q)?);
        let spacing = if max_spacing > 0.0 { max_spacing } else { 1.0 };
        let mut points = vec![p.clone()];
        let mut push_segment = |from: f64, to: f64, make: &dyn Fn(f64) -> Point| {
            let n = ((to - from).abs() / spacing).ceil().max(1.0) as usize;
            for k in 1..=n {
                points.push(make(from + (to - from) * k as f64 / n as f64));
            }
        };
        let id = self.id;
        match (a.ray, b.ray) {
            (Some(i), Some(j)) if i == j => {
                push_segment(a.s, b.s, &|s| Point::Attached { space: id, ray: i, s });
            }
            _ => {
                if let Some(i) = a.ray {
                    push_segment(a.s, 0.0, &|s| Point::Attached { space: id, ray: i, s });
                }
                let len = kernel::dist(a.base, b.base);
                let (ba, bb) = (a.base, b.base);
                push_segment(0.0, len, &|s| {
                    let x = kernel::geodesic_point(ba, bb, s);
                    Point::Annulus { space: id, t: x.t, r: x.r }
                });
                if let Some(j) = b.ray {
                    push_segment(0.0, b.s, &|s| Point::Attached { space: id, ray: j, s });
                }
            }
        }
        if points.len() > 1 {
            points.pop();
            points.push(q.clone());
        }
        PathPolyline::through(self, points)
    }

    fn check_point(&self, p: &Point) -> Result<()> {
        if p.space() != self.id {
            return Err(Error::SpaceMismatch(p.space(), self.id));
        }
        match p {
            Point::Annulus { t, r, .. } => Polar::new(*t, *r).map(|_| ()),
            Point::Attached { ray, s, .. } => {
                self.base_of(*ray)?;
                if *s >= 0.0 {
                    Ok(())
                } else {
                    Err(Error::Domain(format!("attached-ray parameter {s} is negative")))
                }
            }
            Point::Complex { .. } => Err(Error::Domain(format!("{p} is not an annulus point"))),
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::zoo::{build_xcat0, build_ycat0};

    #[test]
    fn attached_distances() {
        let y = build_ycat0(14).unwrap();
        let o = y.basepoint();
        let g3 = y.attached_point(3, 0.0).unwrap();
        assert!((y.distance(&o, &g3).unwrap() - 7.0).abs() < 1e-12);
        let g2 = y.attached_point(2, 0.0).unwrap();
        assert!((y.distance(&g2, &g3).unwrap() - 4.0).abs() < 1e-12);
        let up = y.attached_point(3, 5.0).unwrap();
        assert!((y.distance(&up, &g2).unwrap() - 9.0).abs() < 1e-12);
        assert!((y.distance(&up, &y.attached_point(3, 1.5).unwrap()).unwrap() - 3.5).abs() < 1e-12);
        let x = build_xcat0(12).unwrap();
        let d = x.distance(&x.basepoint(), &x.attached_point(3, 0.0).unwrap()).unwrap();
        assert!((d - 9.4918).abs() < 1e-4);
        assert!(x.attached_point(13, 0.0).is_err());
    }

    #[test]
    fn rays_are_unit_speed() {
        let x = build_xcat0(6).unwrap();
        let rays = vec![
            x.alpha(),
            x.beta(),
            x.ray_through("g4", 4, Polar { t: 0.0, r: 1.0 }).unwrap(),
            x.ray_through("g2", 2, Polar { t: 0.0, r: 1.5 }).unwrap(),
            x.make_ray("w", AnnulusRay::Wrap { start: Polar { t: 0.0, r: 1.5 }, sign: 1.0 }),
        ];
        for ray in &rays {
            for &(s, t) in &[(0.0, 1.0), (0.5, 7.25), (3.0, 40.0), (12.0, 13.0), (0.0, 90.0)] {
                let (ps, pt) = (x.ray_point(ray, &s).unwrap(), x.ray_point(ray, &t).unwrap());
                assert!((x.distance(&ps, &pt).unwrap() - (t - s)).abs() < 1e-9, "{} {s} {t}", ray.label);
            }
        }
    }

    #[test]
    fn projection_onto_alpha_is_the_radial_foot() {
        let x = AnnulusSpace::bare();
        let alpha = x.alpha();
        let p = x.point(5.0, 32.0).unwrap();
        let proj = x.project_onto_ray(&p, &alpha, &100.0, 1e-6).unwrap();
        assert_eq!(proj.intervals.len(), 1);
        let (lo, hi) = proj.intervals[0];
        assert!(lo <= 5.0 && 5.0 <= hi && hi - lo < 1e-2, "{lo} {hi}");
        assert!((proj.distance - 31.0).abs() < 1e-12);
        // Same answer from the generic minimiser.
        let shifted = x.make_ray("w", AnnulusRay::Wrap { start: Polar { t: 0.0, r: 1.0 }, sign: 1.0 });
        let generic = x.project_onto_ray(&p, &shifted, &100.0, 1e-6).unwrap();
        assert!((generic.distance - 31.0).abs() < 1e-9);
        assert!(x.project_onto_ray(&p, &alpha, &2.0, 1e-6).is_err());
        let behind = x.point(-2.0, 3.0).unwrap();
        let proj = x.project_onto_ray(&behind, &alpha, &100.0, 1e-6).unwrap();
        assert_eq!(proj.intervals[0].0, 0.0);
    }

    #[test]
    fn geodesic_polylines_have_matching_length() {
        let x = build_xcat0(5).unwrap();
        let p = x.attached_point(2, 3.0).unwrap();
        let q = x.point(-4.0, 2.5).unwrap();
        let path = x.geodesic(&p, &q, 0.1).unwrap();
        assert!((path.length() - x.distance(&p, &q).unwrap()).abs() < 1e-9);
        assert!(path.validate(&x).unwrap() < 1e-9);
        assert_eq!(path.end(), &q);
    }
}
