//! The logarithmic spiral map `(t, r) -> (t - log2 r, r)` between two
//! annulus spaces, extended to attached rays by matching ray ids.

use serde::Serialize;

use super::{AnnulusSpace, Polar};
use crate::distortion::PointMap;
use crate::error::{Error, Result};
use crate::metric::{MetricSpace, Point, SpaceId};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum Direction {
    Forward,
    Inverse,
}

pub fn spiral_coords(p: Polar, direction: Direction) -> Polar {
    let shift = p.r.log2();
    match direction {
        Direction::Forward => Polar { t: p.t - shift, r: p.r },
        Direction::Inverse => Polar { t: p.t + shift, r: p.r },
    }
}

/// The spiral map from one annulus space to another.
#[derive(Clone, Debug)]
pub struct SpiralMap {
    from: SpaceId,
    to: SpaceId,
    direction: Direction,
}

impl SpiralMap {
    /// Forward map from `from` to `to`.
    pub fn new(from: &AnnulusSpace, to: &AnnulusSpace) -> Self {
        SpiralMap { from: from.id(), to: to.id(), direction: Direction::Forward }
    }

    pub fn inverse(&self) -> Self {
        let direction = match self.direction {
            Direction::Forward => Direction::Inverse,
            Direction::Inverse => Direction::Forward,
        };
        SpiralMap { from: self.to, to: self.from, direction }
    }

    pub fn direction(&self) -> Direction {
        self.direction
    }

    pub fn log_spiral_map(&self, p: &Point) -> Result<Point> {
        if p.space() != self.from {
            return Err(Error::SpaceMismatch(p.space(), self.from));
        }
        match p {
            Point::Annulus { t, r, .. } => {
                let q = spiral_coords(Polar::new(*t, *r)?, self.direction);
                Ok(Point::Annulus { space: self.to, t: q.t, r: q.r })
            }
            Point::Attached { ray, s, .. } => Ok(Point::Attached { space: self.to, ray: *ray, s: *s }),
            Point::Complex { .. } => Err(Error::Domain(format!("{p} is not an annulus point"))),
        }
    }
}

impl PointMap for SpiralMap {
    fn apply(&self, p: &Point) -> Result<Point> {
        self.log_spiral_map(p)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::zoo::{build_xcat0, build_ycat0};

    #[test]
    fn bases_correspond() {
        let (x, y) = (build_xcat0(12).unwrap(), build_ycat0(12).unwrap());
        for (a, b) in x.rays().iter().zip(y.rays()) {
            let m = spiral_coords(a.base, Direction::Forward);
            assert!((m.t - b.base.t).abs() < 1e-12 && m.r == b.base.r);
        }
        let phi = SpiralMap::new(&x, &y);
        let p = x.point(3.0, 8.0).unwrap();
        assert_eq!(phi.log_spiral_map(&p).unwrap(), y.point(0.0, 8.0).unwrap());
        let q = x.point(-7.5, 1.0).unwrap();
        assert_eq!(phi.log_spiral_map(&q).unwrap(), y.point(-7.5, 1.0).unwrap());
        assert!(phi.log_spiral_map(&y.basepoint()).is_err());
    }
}
