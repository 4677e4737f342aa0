//! Closed-form distance and geodesics in the universal cover of the plane
//! minus the open unit disk, in coordinates `(t, r)`, `r >= 1`.
//!
//! Two points at angular separation `delta` either see each other (straight
//! chord) or the geodesic wraps the unit circle: tangent segment, arc,
//! tangent segment. The split is at `delta = phi_p + phi_q` where
//! `phi = acos(1/r)` is the angle from a point to its tangency point.

use crate::error::{Error, Result};

/// Coordinates on the cover: unbounded angle `t`, radius `r >= 1`.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Polar {
    pub t: f64,
    pub r: f64,
}

impl Polar {
    pub fn new(t: f64, r: f64) -> Result<Self> {
        if !(r >= 1.0) || !t.is_finite() || !r.is_finite() {
            return Err(Error::Domain(format!("({t}, {r}) is not a point of the cover (need r >= 1)")));
        }
        Ok(Polar { t, r })
    }
}

/// Angle between a point at radius `r` and its tangency point on the circle.
pub fn tangent_angle(r: f64) -> f64 {
    (1.0 / r).clamp(-1.0, 1.0).acos()
}

/// Length of the tangent segment from radius `r` to the circle.
pub fn tangent_length(r: f64) -> f64 {
    ((r - 1.0) * (r + 1.0)).max(0.0).sqrt()
}

/// Straight-segment length (law of cosines in a stable form).
pub fn chord_length(rp: f64, rq: f64, delta: f64) -> f64 {
    let s = (0.5 * delta).sin();
    ((rp - rq) * (rp - rq) + 4.0 * rp * rq * s * s).sqrt()
}

/// Tangent, arc, tangent length; meaningful when `delta >= phi_p + phi_q`.
pub fn wrap_length(rp: f64, rq: f64, delta: f64) -> f64 {
    tangent_length(rp) + tangent_length(rq) + (delta - tangent_angle(rp) - tangent_angle(rq))
}

/// Whether the geodesic between the two points touches the unit circle.
pub fn wraps(p: Polar, q: Polar) -> bool {
    (p.t - q.t).abs() >= tangent_angle(p.r) + tangent_angle(q.r)
}

/// Distance without validation.
pub(crate) fn dist(p: Polar, q: Polar) -> f64 {
    let delta = (p.t - q.t).abs();
    if delta >= tangent_angle(p.r) + tangent_angle(q.r) {
        wrap_length(p.r, q.r, delta)
    } else {
        chord_length(p.r, q.r, delta)
    }
}

/// Closed-form distance between two points of the cover.
pub fn ann_distance(p: Polar, q: Polar) -> Result<f64> {
    Polar::new(p.t, p.r)?;
    Polar::new(q.t, q.r)?;
    Ok(dist(p, q))
}

/// Point at fraction `lambda` of the straight segment from `p` to `q`
/// (valid when the segment stays outside the disk).
fn chord_point(p: Polar, q: Polar, lambda: f64) -> Polar {
    let d = q.t - p.t;
    let (x0, y0) = (p.r, 0.0);
    let (x1, y1) = (q.r * d.cos(), q.r * d.sin());
    let (x, y) = (x0 + lambda * (x1 - x0), y0 + lambda * (y1 - y0));
    Polar { t: p.t + y.atan2(x), r: x.hypot(y).max(1.0) }
}

/// Point at arc length `s` from `p` along the geodesic to `q`.
pub fn geodesic_point(p: Polar, q: Polar, s: f64) -> Polar {
    let total = dist(p, q);
    if total <= 0.0 {
        return p;
    }
    let s = s.clamp(0.0, total);
    if !wraps(p, q) {
        return chord_point(p, q, s / total);
    }
    let sign = if q.t >= p.t { 1.0 } else { -1.0 };
    let (phi_p, phi_q) = (tangent_angle(p.r), tangent_angle(q.r));
    let (lead, tail) = (tangent_length(p.r), tangent_length(q.r));
    let arc = (q.t - p.t).abs() - phi_p - phi_q;
    let touch_p = Polar { t: p.t + sign * phi_p, r: 1.0 };
    let touch_q = Polar { t: q.t - sign * phi_q, r: 1.0 };
    if s <= lead {
        if lead <= 0.0 {
            return touch_p;
        }
        chord_point(p, touch_p, s / lead)
    } else if s <= lead + arc {
        Polar { t: touch_p.t + sign * (s - lead), r: 1.0 }
    } else if tail <= 0.0 {
        q
    } else {
        chord_point(touch_q, q, (s - lead - arc) / tail)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::f64::consts::PI;

    fn p(t: f64, r: f64) -> Polar {
        Polar::new(t, r).unwrap()
    }

    #[test]
    fn quoted_values() {
        assert!((dist(p(0.0, 1.0), p(2.5, 1.0)) - 2.5).abs() < 1e-12);
        assert!((dist(p(0.0, 1.0), p(0.0, 7.0)) - 6.0).abs() < 1e-12);
        let expect = 2.0 * 3f64.sqrt() + 5.0 - 2.0 * (0.5f64).acos();
        assert!((dist(p(0.0, 2.0), p(5.0, 2.0)) - expect).abs() < 1e-12);
        assert!((expect - 6.3697).abs() < 1e-4);
        let d = dist(p(0.0, 1.0), p(3.0, 8.0));
        assert!((d - (63f64.sqrt() + 3.0 - (1.0f64 / 8.0).acos())).abs() < 1e-12);
        assert!((d - 9.4918).abs() < 1e-4);
    }

    #[test]
    fn branches_agree_at_the_split() {
        for &(rp, rq) in &[(1.0, 1.0), (1.5, 3.0), (10.0, 1.01), (400.0, 2.0)] {
            let split = tangent_angle(rp) + tangent_angle(rq);
            assert!((chord_length(rp, rq, split) - wrap_length(rp, rq, split)).abs() < 1e-9);
        }
    }

    #[test]
    fn rejects_points_inside_the_hole() {
        assert!(ann_distance(Polar { t: 0.0, r: 0.5 }, p(0.0, 1.0)).is_err());
    }

    #[test]
    fn geodesic_points_are_on_the_geodesic() {
        let cases = [(p(0.0, 2.0), p(5.0, 2.0)), (p(-1.0, 3.0), p(0.5, 5.0)), (p(4.0, 1.0), p(-PI, 9.0))];
        for (a, b) in cases {
            let total = dist(a, b);
            for k in 0..=20 {
                let s = total * k as f64 / 20.0;
                let x = geodesic_point(a, b, s);
                assert!(x.r >= 1.0);
                assert!((dist(a, x) - s).abs() < 1e-9, "{a:?} {b:?} {s}");
                assert!((dist(x, b) - (total - s)).abs() < 1e-9);
            }
        }
    }
}
