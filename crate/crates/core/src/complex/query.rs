use num::{Signed, Zero};
use serde::Serialize;

use super::{ComplexRay, EdgeId, EdgeKind, RayComplex, SubEdge};
use crate::error::{Error, Result};
use crate::metric::{MetricSpace, PathPolyline, Point, RayPath, RayProjection, SpaceId, UnitSpeedRay};
use crate::scalar::{q, Scalar, Q};

/// Exact geodesic: distance plus a witness polyline through the vertex route.
#[derive(Clone, Debug, Serialize)]
pub struct GeodesicResult {
    #[serde(serialize_with = "crate::report::ser_display")]
    pub distance: Q,
    pub witness: PathPolyline<Q>,
    #[serde(skip)]
    pub legs: Vec<SubEdge>,
}

enum Route {
    Direct,
    /// (vertex, mark on the query edge) at each end.
    Via { from: (usize, Q), to: (usize, Q) },
}

impl RayComplex {
    /// Point on `name` at `offset`, validated against the edge.
    pub fn point(&self, name: &str, offset: Q) -> Result<Point> {
        let e = self.edge_id(name).ok_or_else(|| Error::UnknownLabel(name.to_string()))?;
        self.point_at(e, offset)
    }

    pub fn point_at(&self, edge: EdgeId, offset: Q) -> Result<Point> {
        if !self.edges[edge.0].contains(&offset) {
            return Err(Error::Domain(format!("offset {offset} outside edge `{}`", self.edges[edge.0].name)));
        }
        Ok(Point::Complex { space: self.id, edge, offset })
    }

    pub fn vertex_point(&self, v: usize) -> Point {
        let (e, m) = &self.vertex_locations[v][0];
        Point::Complex { space: self.id, edge: *e, offset: m.clone() }
    }

    pub(crate) fn locate<'a>(&self, p: &'a Point) -> Result<(EdgeId, &'a Q)> {
        match p {
            Point::Complex { space, edge, offset } => {
                if *space != self.id {
                    return Err(Error::SpaceMismatch(*space, self.id));
                }
                if edge.0 >= self.edges.len() || !self.edges[edge.0].contains(offset) {
                    return Err(Error::Domain(format!("point {p} is not on this complex")));
                }
                Ok((*edge, offset))
            }
            other => Err(Error::Domain(format!("{other} is not a ray-complex point"))),
        }
    }

    /// Marks adjacent to `x` on edge `e`: (vertex, distance along the edge, mark).
    pub(crate) fn anchors(&self, e: EdgeId, x: &Q) -> Vec<(usize, Q, Q)> {
        let edge = &self.edges[e.0];
        let at = |k: usize| (edge.mark_vertex[k], (x - &edge.marks[k]).abs(), edge.marks[k].clone());
        match edge.marks.binary_search(x) {
            Ok(k) => vec![at(k)],
            Err(k) if k == edge.marks.len() => vec![at(k - 1)],
            Err(k) => vec![at(k - 1), at(k)],
        }
    }

    fn best_route(&self, p: &Point, q: &Point) -> Result<(Q, Route)> {
        let (e, x) = self.locate(p)?;
        let (f, y) = self.locate(q)?;
        let mut best: Option<(Q, Route)> = None;
        if e == f {
            best = Some(((x - y).abs(), Route::Direct));
        }
        for (u, a, ma) in self.anchors(e, x) {
            for (v, b, mb) in self.anchors(f, y) {
                let Some(duv) = &self.apsp[u][v] else { continue };
                let cand = &a + duv + &b;
                if best.as_ref().is_none_or(|(d, _)| &cand < d) {
                    best = Some((cand, Route::Via { from: (u, ma.clone()), to: (v, mb) }));
                }
            }
        }
        best.ok_or_else(|| Error::Unreachable(format!("no path from {p} to {q}")))
    }

    /// Length of a shortest path in the quotient path metric.
    pub fn rc_distance(&self, p: &Point, q: &Point) -> Result<Q> {
        self.best_route(p, q).map(|(d, _)| d)
    }

    /// Distance from a point to a vertex.
    pub(crate) fn distance_to_vertex(&self, p: &Point, v: usize) -> Result<Q> {
        let (e, x) = self.locate(p)?;
        self.anchors(e, x)
            .into_iter()
            .filter_map(|(u, a, _)| self.apsp[u][v].as_ref().map(|d| a + d))
            .min()
            .ok_or_else(|| Error::Unreachable(format!("vertex {v} from {p}")))
    }

    fn vertex_path(&self, from: usize, to: usize) -> Vec<SubEdge> {
        let mut legs = Vec::new();
        let mut cur = to;
        while cur != from {
            let (prev, k) = self.pred[from][cur].expect("connected complex");
            legs.push(self.adjacency[prev][k].2.clone());
            cur = prev;
        }
        legs.reverse();
        legs
    }

    /// Legs of a shortest route from `p` to `q`; zero-length legs are dropped.
    pub fn route(&self, p: &Point, q: &Point) -> Result<(Q, Vec<SubEdge>)> {
        let (d, route) = self.best_route(p, q)?;
        let (e, x) = self.locate(p)?;
        let (f, y) = self.locate(q)?;
        let mut legs = Vec::new();
        match route {
            Route::Direct => legs.push(SubEdge { edge: e, from: x.clone(), to: y.clone() }),
            Route::Via { from: (u, ma), to: (v, mb) } => {
                legs.push(SubEdge { edge: e, from: x.clone(), to: ma });
                legs.extend(self.vertex_path(u, v));
                legs.push(SubEdge { edge: f, from: mb, to: y.clone() });
            }
        }
        let mut merged: Vec<SubEdge> = Vec::with_capacity(legs.len());
        for leg in legs.into_iter().filter(|l| !l.length().is_zero()) {
            match merged.last_mut() {
                Some(prev)
                    if prev.edge == leg.edge
                        && prev.to == leg.from
                        && (prev.to > prev.from) == (leg.to > leg.from) =>
                {
                    prev.to = leg.to
                }
                _ => merged.push(leg),
            }
        }
        Ok((d, merged))
    }

    /// Shortest path with its witness polyline.
    pub fn rc_geodesic(&self, p: &Point, q: &Point) -> Result<GeodesicResult> {
        let (distance, legs) = self.route(p, q)?;
        let mut points = vec![p.clone()];
        let mut cumulative = vec![crate::scalar::q(0)];
        let mut acc = crate::scalar::q(0);
        for (i, leg) in legs.iter().enumerate() {
            acc += leg.length();
            let end = if i + 1 == legs.len() {
                q.clone()
            } else {
                self.vertex_at(leg.edge, &leg.to)
                    .map(|v| self.vertex_point(v))
                    .unwrap_or(Point::Complex { space: self.id, edge: leg.edge, offset: leg.to.clone() })
            };
            points.push(end);
            cumulative.push(acc.clone());
        }
        if points.len() == 1 && p != q {
            points.push(q.clone());
            cumulative.push(crate::scalar::q(0));
        }
        Ok(GeodesicResult { distance, witness: PathPolyline { points, cumulative }, legs })
    }

    /// The bare edge `label` as a unit-speed ray from its own origin.
    pub fn rc_ray(&self, label: &str) -> Result<UnitSpeedRay> {
        let e = self.ray_edge(label)?;
        Ok(UnitSpeedRay {
            label: label.to_string(),
            space: self.id,
            path: RayPath::Complex(ComplexRay { legs: Vec::new(), tail: e, tail_start: q(0) }),
        })
    }

    /// Geodesic ray from the basepoint that eventually runs along edge `label`:
    /// a shortest route to the last mark of the edge, then the unbounded tail.
    pub fn ray_from_basepoint(&self, label: &str) -> Result<UnitSpeedRay> {
        let e = self.ray_edge(label)?;
        let last = self.edges[e.0].marks.last().expect("marks contain 0").clone();
        let target = Point::Complex { space: self.id, edge: e, offset: last.clone() };
        let (_, legs) = self.route(&self.basepoint(), &target)?;
        Ok(UnitSpeedRay {
            label: label.to_string(),
            space: self.id,
            path: RayPath::Complex(ComplexRay { legs, tail: e, tail_start: last }),
        })
    }

    fn ray_edge(&self, label: &str) -> Result<EdgeId> {
        let e = self.edge_id(label).ok_or_else(|| Error::UnknownLabel(label.to_string()))?;
        if self.edges[e.0].kind != EdgeKind::Ray {
            return Err(Error::UnknownLabel(format!("{label} (not an unbounded edge)")));
        }
        Ok(e)
    }

    pub(crate) fn complex_ray<'a>(&self, ray: &'a UnitSpeedRay) -> Result<&'a ComplexRay> {
        if ray.space != self.id {
            return Err(Error::SpaceMismatch(ray.space, self.id));
        }
        match &ray.path {
            RayPath::Complex(r) => Ok(r),
            RayPath::Annulus(_) => Err(Error::Domain(format!("ray `{}` is not a ray-complex ray", ray.label))),
        }
    }

    pub fn eval_ray(&self, ray: &ComplexRay, t: &Q) -> Result<Point> {
        if t.is_negative() {
            return Err(Error::Domain(format!("ray parameter {t} is negative")));
        }
        let mut acc = q(0);
        for leg in &ray.legs {
            let len = leg.length();
            if t <= &(&acc + &len) {
                let along = t - &acc;
                let offset = if leg.to >= leg.from { &leg.from + &along } else { &leg.from - &along };
                return Ok(Point::Complex { space: self.id, edge: leg.edge, offset });
            }
            acc += len;
        }
        Ok(Point::Complex { space: self.id, edge: ray.tail, offset: &ray.tail_start + (t - &acc) })
    }

    /// Exact closest-point set of `x` on `ray`. Between consecutive marks the
    /// distance to `x` is concave (or V-shaped at `x` itself), so minimisers are
    /// among the marks crossed by the ray and the parameter of `x`.
    pub fn project_exact(&self, x: &Point, ray: &ComplexRay, horizon: &Q) -> Result<RayProjection<Q>> {
        let (xe, xo) = self.locate(x)?;
        let mut candidates: Vec<Q> = Vec::new();
        let mut acc = q(0);
        for leg in &ray.legs {
            let (lo, hi) = if leg.from <= leg.to { (&leg.from, &leg.to) } else { (&leg.to, &leg.from) };
            for m in &self.edges[leg.edge.0].marks {
                if m >= lo && m <= hi {
                    candidates.push(&acc + (m - &leg.from).abs());
                }
            }
            if leg.edge == xe && xo >= lo && xo <= hi {
                candidates.push(&acc + (xo - &leg.from).abs());
            }
            candidates.push(acc.clone());
            acc += leg.length();
        }
        candidates.push(acc.clone());
        for m in &self.edges[ray.tail.0].marks {
            if m >= &ray.tail_start {
                candidates.push(&acc + (m - &ray.tail_start));
            }
        }
        if ray.tail == xe && xo >= &ray.tail_start {
            candidates.push(&acc + (xo - &ray.tail_start));
        }
        candidates.sort();
        candidates.dedup();

        let mut best: Option<Q> = None;
        let mut minimisers: Vec<Q> = Vec::new();
        for t in candidates {
            let d = self.rc_distance(x, &self.eval_ray(ray, &t)?)?;
            match &best {
                Some(b) if &d > b => {}
                Some(b) if &d == b => minimisers.push(t),
                _ => {
                    best = Some(d);
                    minimisers = vec![t];
                }
            }
        }
        if let Some(t) = minimisers.iter().find(|t| *t > horizon) {
            return Err(Error::HorizonTooSmall {
                horizon: horizon.to_f64(),
                detail: format!("minimiser at parameter {t}"),
            });
        }
        Ok(RayProjection {
            distance: best.expect("at least one candidate"),
            intervals: minimisers.into_iter().map(|t| (t.clone(), t)).collect(),
        })
    }

    /// The closed ball `B(x, radius)` as maximal intervals `(edge, lo, hi)`.
    pub fn ball(&self, x: &Point, radius: &Q) -> Result<Vec<(EdgeId, Q, Q)>> {
        let (xe, xo) = self.locate(x)?;
        let to_vertex: Vec<Q> =
            (0..self.vertex_count()).map(|v| self.distance_to_vertex(x, v)).collect::<Result<_>>()?;
        let mut out = Vec::new();
        for (ei, edge) in self.edges.iter().enumerate() {
            let e = EdgeId(ei);
            let mut pieces: Vec<(Q, Q)> = Vec::new();
            let n = edge.marks.len();
            for k in 0..n {
                let a = &edge.marks[k];
                let da = &to_vertex[edge.mark_vertex[k]];
                let slack_a = radius - da;
                if k + 1 < n {
                    let b = &edge.marks[k + 1];
                    let db = &to_vertex[edge.mark_vertex[k + 1]];
                    let slack_b = radius - db;
                    if !slack_a.is_negative() {
                        pieces.push((a.clone(), (a + &slack_a).min(b.clone())));
                    }
                    if !slack_b.is_negative() {
                        pieces.push(((b - &slack_b).max(a.clone()), b.clone()));
                    }
                } else if edge.kind == EdgeKind::Ray && !slack_a.is_negative() {
                    pieces.push((a.clone(), a + &slack_a));
                }
            }
            if e == xe {
                let lo = (xo - radius).max(q(0));
                let hi = match &edge.kind {
                    EdgeKind::Segment(len) => (xo + radius).min(len.clone()),
                    EdgeKind::Ray => xo + radius,
                };
                pieces.push((lo, hi));
            }
            pieces.sort();
            let mut merged: Vec<(Q, Q)> = Vec::new();
            for (lo, hi) in pieces {
                match merged.last_mut() {
                    Some(last) if lo <= last.1 => {
                        if hi > last.1 {
                            last.1 = hi;
                        }
                    }
                    _ => merged.push((lo, hi)),
                }
            }
            out.extend(merged.into_iter().map(|(lo, hi)| (e, lo, hi)));
        }
        Ok(out)
    }
}

impl MetricSpace for RayComplex {
    type Scalar = Q;

    fn id(&self) -> SpaceId {
        self.id
    }

    fn basepoint(&self) -> Point {
        Point::Complex { space: self.id, edge: self.base.0, offset: self.base.1.clone() }
    }

    fn distance(&self, p: &Point, q: &Point) -> Result<Q> {
        self.rc_distance(p, q)
    }

    fn ray_point(&self, ray: &UnitSpeedRay, t: &Q) -> Result<Point> {
        self.eval_ray(self.complex_ray(ray)?, t)
    }

    fn project_onto_ray(&self, x: &Point, ray: &UnitSpeedRay, horizon: &Q, _tol: f64) -> Result<RayProjection<Q>> {
        self.project_exact(x, self.complex_ray(ray)?, horizon)
    }

    fn geodesic(&self, p: &Point, q: &Point, _max_spacing: f64) -> Result<PathPolyline<Q>> {
        Ok(self.rc_geodesic(p, q)?.witness)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::metric::gromov_product;
    use crate::scalar::{q, q_frac};
    use crate::zoo::{build_x, build_y};

    #[test]
    fn distances_in_x() {
        let x = build_x(16).unwrap();
        let g3 = x.point("g3", q(0)).unwrap();
        let a3 = x.point("alpha", q(3)).unwrap();
        assert_eq!(x.rc_distance(&g3, &a3).unwrap(), q(8));
        let b3 = x.point("beta", q(3)).unwrap();
        assert_eq!(x.rc_distance(&g3, &b3).unwrap(), q(8));
        for (s, t) in [(0, 0), (1, 7), (5, 5), (100, 3), (70000, 65536)] {
            let p = x.point("alpha", q(s)).unwrap();
            let r = x.point("beta", q(t)).unwrap();
            assert_eq!(x.rc_distance(&p, &r).unwrap(), q(s + t));
        }
    }

    #[test]
    fn distance_in_y_uses_short_connector() {
        let y = build_y(16).unwrap();
        let g3 = y.point("g3", q(0)).unwrap();
        assert_eq!(y.rc_distance(&y.basepoint(), &g3).unwrap(), q(5));
    }

    #[test]
    fn gromov_example() {
        let x = build_x(16).unwrap();
        let a5 = x.point("alpha", q(5)).unwrap();
        let g31 = x.point("g3", q(1)).unwrap();
        assert_eq!(gromov_product(&x, &a5, &g31, &x.basepoint()).unwrap(), q(3));
        assert_eq!(gromov_product(&x, &a5, &a5, &x.basepoint()).unwrap(), q(5));
        assert_eq!(gromov_product(&x, &a5, &g31, &a5).unwrap(), q(0));
    }

    #[test]
    fn geodesic_witnesses() {
        let x = build_x(16).unwrap();
        let o = x.basepoint();
        let g31 = x.point("g3", q(1)).unwrap();
        let geo = x.rc_geodesic(&o, &g31).unwrap();
        assert_eq!(geo.distance, q(12));
        let expected = vec![
            o.clone(),
            x.point("alpha", q(3)).unwrap(),
            x.point("g3", q(0)).unwrap(),
            g31.clone(),
        ];
        assert_eq!(geo.witness.points, expected);
        assert_eq!(geo.witness.length(), q(12));

        let a5 = x.point("alpha", q(5)).unwrap();
        let b5 = x.point("beta", q(5)).unwrap();
        let geo = x.rc_geodesic(&a5, &b5).unwrap();
        assert_eq!(geo.distance, q(10));
        assert_eq!(geo.witness.points, vec![a5.clone(), o.clone(), b5]);

        let same = x.rc_geodesic(&a5, &a5).unwrap();
        assert_eq!(same.witness.length(), q(0));
        assert_eq!(same.witness.start(), &a5);
        assert_eq!(same.witness.end(), &a5);
    }

    #[test]
    fn rays_are_unit_speed() {
        let x = build_x(16).unwrap();
        let alpha = x.rc_ray("alpha").unwrap();
        assert_eq!(x.ray_point(&alpha, &q(5)).unwrap(), x.point("alpha", q(5)).unwrap());
        let g3 = x.ray_from_basepoint("g3").unwrap();
        let o = x.basepoint();
        for t in [0, 1, 3, 7, 11, 12, 40] {
            let p = x.ray_point(&g3, &q(t)).unwrap();
            assert_eq!(x.rc_distance(&o, &p).unwrap(), q(t));
        }
        let bare = x.rc_ray("g3").unwrap();
        for t in [0, 2, 9] {
            let p = x.ray_point(&bare, &q(t)).unwrap();
            assert_eq!(x.rc_distance(&o, &p).unwrap(), q(11 + t));
        }
        let y = build_y(8).unwrap();
        let beta = y.rc_ray("beta").unwrap();
        for t in [0, 3, 17] {
            let p = y.ray_point(&beta, &q(t)).unwrap();
            assert_eq!(y.rc_distance(&y.basepoint(), &p).unwrap(), q(t));
        }
        assert!(matches!(x.rc_ray("ca3"), Err(Error::UnknownLabel(_))));
        assert!(matches!(x.rc_ray("nope"), Err(Error::UnknownLabel(_))));
    }

    #[test]
    fn projection_ties_are_kept() {
        let x = build_x(8).unwrap();
        let g3 = x.point("g3", q(0)).unwrap();
        let alpha = x.rc_ray("alpha").unwrap();
        let beta = x.rc_ray("beta").unwrap();
        let pa = x.project_onto_ray(&g3, &alpha, &q(1000), 0.0).unwrap();
        let pb = x.project_onto_ray(&g3, &beta, &q(1000), 0.0).unwrap();
        assert_eq!(pa.intervals, vec![(q(3), q(3))]);
        assert_eq!(pb.intervals, vec![(q(3), q(3))]);
        assert_eq!(pa.distance, q(8));
        assert!(matches!(
            x.project_onto_ray(&g3, &alpha, &q(2), 0.0),
            Err(Error::HorizonTooSmall { .. })
        ));
    }

    #[test]
    fn ball_is_exact() {
        let x = build_x(4).unwrap();
        let g2 = x.point("g2", q(0)).unwrap();
        let ball = x.ball(&g2, &q(4)).unwrap();
        for (e, lo, hi) in &ball {
            for f in [q(0), q_frac(1, 3), q(1)] {
                let t = lo + (hi - lo) * f;
                let p = x.point_at(*e, t).unwrap();
                assert!(x.rc_distance(&g2, &p).unwrap() <= q(4));
            }
        }
        let on = |name: &str, t: i64| {
            let e = x.edge_id(name).unwrap();
            ball.iter().any(|(f, lo, hi)| *f == e && lo <= &q(t) && &q(t) <= hi)
        };
        assert!(on("alpha", 2) && on("beta", 2) && on("g2", 4));
        assert!(!on("alpha", 3) && !on("g2", 5));
    }
}
