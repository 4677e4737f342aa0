//! Exact distance and geodesic engine for spaces glued from rays and finite
//! segments.
//!
//! A complex is stored as a finite weighted vertex graph: every gluing
//! location, segment endpoint, ray origin and the basepoint is a *mark* on its
//! edge; glued marks are one vertex; consecutive marks on an edge are joined by
//! a sub-edge. The unbounded tail of a ray past its last mark contributes no
//! vertex. All-pairs vertex distances are precomputed once, so a point query
//! only combines the (at most two) marks adjacent to each query point.

mod query;
mod sampler;

use std::cmp::{Ordering, Reverse};
use std::collections::{BTreeMap, BTreeSet, BinaryHeap};
use std::fmt::Write as _;

use num::{Signed, Zero};

use crate::metric::SpaceId;
use crate::scalar::Q;

pub use query::GeodesicResult;
pub use sampler::{ComplexPairSampler, ComplexPointSampler};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct EdgeId(pub usize);

#[derive(Clone, Debug, PartialEq, Eq)]
pub enum EdgeKind {
    Ray,
    Segment(Q),
}

#[derive(Clone, Debug)]
pub(crate) struct Edge {
    pub name: String,
    pub kind: EdgeKind,
    /// Sorted, always contains 0.
    pub marks: Vec<Q>,
    /// Vertex index of each mark.
    pub mark_vertex: Vec<usize>,
}

impl Edge {
    fn contains(&self, t: &Q) -> bool {
        !t.is_negative()
            && match &self.kind {
                EdgeKind::Ray => true,
                EdgeKind::Segment(len) => t <= len,
            }
    }
}

/// Piece of a route travelled along one edge, from parameter `from` to `to`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct SubEdge {
    pub edge: EdgeId,
    pub from: Q,
    pub to: Q,
}

impl SubEdge {
    pub fn length(&self) -> Q {
        (&self.to - &self.from).abs()
    }
}

/// A unit-speed ray in a complex: finitely many legs followed by an unbounded
/// tail along a ray edge starting at `tail_start`.
#[derive(Clone, Debug, PartialEq)]
pub struct ComplexRay {
    pub legs: Vec<SubEdge>,
    pub tail: EdgeId,
    pub tail_start: Q,
}

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum BuildError {
    #[error("edge `{0}` declared twice")]
    Duplicate(String),
    #[error("undeclared edge `{0}`")]
    Undeclared(String),
    #[error("edge `{name}` has nonpositive length {length}")]
    LengthNonpositive { name: String, length: String },
    #[error("parameter {param} lies outside edge `{name}`")]
    ParamRange { name: String, param: String },
    #[error("no basepoint declared")]
    NoBasepoint,
    #[error("basepoint declared twice")]
    DuplicateBasepoint,
    #[error("space is disconnected; unreachable edges: {}", .0.join(", "))]
    Disconnected(Vec<String>),
    #[error("index {index}: connector length {length} is nonpositive")]
    DegenerateIndex { index: i64, length: String },
    #[error("family needs at least one index (got N = {0})")]
    EmptyFamily(i64),
}

impl BuildError {
    pub fn code(&self) -> &'static str {
        match self {
            BuildError::Duplicate(_) | BuildError::DuplicateBasepoint => "E_DUPLICATE",
            BuildError::Undeclared(_) => "E_UNDECLARED",
            BuildError::LengthNonpositive { .. } | BuildError::DegenerateIndex { .. } => "E_LENGTH_NONPOSITIVE",
            BuildError::ParamRange { .. } => "E_PARAM_RANGE",
            BuildError::NoBasepoint => "E_NO_BASEPOINT",
            BuildError::Disconnected(_) => "E_DISCONNECTED",
            BuildError::EmptyFamily(_) => "E_EMPTY_FAMILY",
        }
    }
}

/// Orders names so that embedded integers compare numerically (`g2 < g10`).
pub fn natural_cmp(a: &str, b: &str) -> Ordering {
    fn chunks(s: &str) -> Vec<(bool, &str)> {
        let mut out = Vec::new();
        let mut start = 0;
        let bytes = s.as_bytes();
        for i in 1..=bytes.len() {
            if i == bytes.len() || bytes[i].is_ascii_digit() != bytes[start].is_ascii_digit() {
                out.push((bytes[start].is_ascii_digit(), &s[start..i]));
                start = i;
            }
        }
        out
    }
    let (ca, cb) = (chunks(a), chunks(b));
    for (x, y) in ca.iter().zip(cb.iter()) {
        let ord = match (x, y) {
            ((true, nx), (true, ny)) => {
                let (tx, ty) = (nx.trim_start_matches('0'), ny.trim_start_matches('0'));
                tx.len().cmp(&ty.len()).then_with(|| tx.cmp(ty)).then_with(|| nx.len().cmp(&ny.len()))
            }
            ((_, sx), (_, sy)) => sx.cmp(sy),
        };
        if ord != Ordering::Equal {
            return ord;
        }
    }
    ca.len().cmp(&cb.len())
}

/// Incremental, name-based construction of a [`RayComplex`].
#[derive(Clone, Debug, Default)]
pub struct RayComplexBuilder {
    edges: Vec<(String, EdgeKind)>,
    glues: Vec<((String, Q), (String, Q))>,
    base: Option<(String, Q)>,
}

impl RayComplexBuilder {
    pub fn new() -> Self {
        Self::default()
    }

    fn find(&self, name: &str) -> Option<&EdgeKind> {
        self.edges.iter().find(|(n, _)| n == name).map(|(_, k)| k)
    }

    fn declare(&mut self, name: &str, kind: EdgeKind) -> Result<(), BuildError> {
        if self.find(name).is_some() {
            return Err(BuildError::Duplicate(name.to_string()));
        }
        self.edges.push((name.to_string(), kind));
        Ok(())
    }

    pub fn ray(&mut self, name: &str) -> Result<&mut Self, BuildError> {
        self.declare(name, EdgeKind::Ray)?;
        Ok(self)
    }

    pub fn segment(&mut self, name: &str, length: Q) -> Result<&mut Self, BuildError> {
        if !length.is_positive() {
            return Err(BuildError::LengthNonpositive { name: name.to_string(), length: length.to_string() });
        }
        self.declare(name, EdgeKind::Segment(length))?;
        Ok(self)
    }

    fn check_location(&self, name: &str, param: &Q) -> Result<(), BuildError> {
        let kind = self.find(name).ok_or_else(|| BuildError::Undeclared(name.to_string()))?;
        let ok = !param.is_negative()
            && match kind {
                EdgeKind::Ray => true,
                EdgeKind::Segment(len) => param <= len,
            };
        if ok {
            Ok(())
        } else {
            Err(BuildError::ParamRange { name: name.to_string(), param: param.to_string() })
        }
    }

    pub fn glue(&mut self, a: (&str, Q), b: (&str, Q)) -> Result<&mut Self, BuildError> {
        self.check_location(a.0, &a.1)?;
        self.check_location(b.0, &b.1)?;
        self.glues.push(((a.0.to_string(), a.1), (b.0.to_string(), b.1)));
        Ok(self)
    }

    pub fn basepoint(&mut self, at: (&str, Q)) -> Result<&mut Self, BuildError> {
        self.check_location(at.0, &at.1)?;
        if self.base.is_some() {
            return Err(BuildError::DuplicateBasepoint);
        }
        self.base = Some((at.0.to_string(), at.1));
        Ok(self)
    }

    pub fn build(&self) -> Result<RayComplex, BuildError> {
        let (base_name, base_param) = self.base.clone().ok_or(BuildError::NoBasepoint)?;

        let mut order: Vec<usize> = (0..self.edges.len()).collect();
        order.sort_by(|&a, &b| natural_cmp(&self.edges[a].0, &self.edges[b].0));
        let by_name: BTreeMap<String, EdgeId> =
            order.iter().enumerate().map(|(new, &old)| (self.edges[old].0.clone(), EdgeId(new))).collect();
        let lookup = |name: &str| by_name[name];

        let mut mark_sets: Vec<BTreeSet<Q>> = order
            .iter()
            .map(|&old| {
                let mut s = BTreeSet::new();
                s.insert(Q::zero());
                if let EdgeKind::Segment(len) = &self.edges[old].1 {
                    s.insert(len.clone());
                }
                s
            })
            .collect();
        for ((an, ap), (bn, bp)) in &self.glues {
            mark_sets[lookup(an).0].insert(ap.clone());
            mark_sets[lookup(bn).0].insert(bp.clone());
        }
        let base_edge = lookup(&base_name);
        mark_sets[base_edge.0].insert(base_param.clone());

        // One node per (edge, mark), then union-find over gluings.
        let mut node_index: BTreeMap<(EdgeId, Q), usize> = BTreeMap::new();
        let mut nodes: Vec<(EdgeId, Q)> = Vec::new();
        for (e, marks) in mark_sets.iter().enumerate() {
            for m in marks {
                node_index.insert((EdgeId(e), m.clone()), nodes.len());
                nodes.push((EdgeId(e), m.clone()));
            }
        }
        let mut parent: Vec<usize> = (0..nodes.len()).collect();
        fn find(parent: &mut [usize], mut i: usize) -> usize {
            while parent[i] != i {
                parent[i] = parent[parent[i]];
                i = parent[i];
            }
            i
        }
        for ((an, ap), (bn, bp)) in &self.glues {
            let a = node_index[&(lookup(an), ap.clone())];
            let b = node_index[&(lookup(bn), bp.clone())];
            let (ra, rb) = (find(&mut parent, a), find(&mut parent, b));
            if ra != rb {
                let (lo, hi) = if ra < rb { (ra, rb) } else { (rb, ra) };
                parent[hi] = lo;
            }
        }
        let mut vertex_of_root: BTreeMap<usize, usize> = BTreeMap::new();
        let mut node_vertex = vec![0usize; nodes.len()];
        for i in 0..nodes.len() {
            let r = find(&mut parent, i);
            let next = vertex_of_root.len();
            node_vertex[i] = *vertex_of_root.entry(r).or_insert(next);
        }
        let vertex_count = vertex_of_root.len();

        let mut edges: Vec<Edge> = order
            .iter()
            .enumerate()
            .map(|(new, &old)| Edge {
                name: self.edges[old].0.clone(),
                kind: self.edges[old].1.clone(),
                marks: mark_sets[new].iter().cloned().collect(),
                mark_vertex: Vec::new(),
            })
            .collect();
        let mut vertex_locations: Vec<Vec<(EdgeId, Q)>> = vec![Vec::new(); vertex_count];
        for (i, (e, m)) in nodes.iter().enumerate() {
            edges[e.0].mark_vertex.push(node_vertex[i]);
            vertex_locations[node_vertex[i]].push((*e, m.clone()));
        }
        for locs in &mut vertex_locations {
            locs.sort_by(|a, b| location_preference(&edges, a, b));
        }

        let mut adjacency: Vec<Vec<(usize, Q, SubEdge)>> = vec![Vec::new(); vertex_count];
        for (e, edge) in edges.iter().enumerate() {
            for k in 0..edge.marks.len().saturating_sub(1) {
                let (a, b) = (&edge.marks[k], &edge.marks[k + 1]);
                let (va, vb) = (edge.mark_vertex[k], edge.mark_vertex[k + 1]);
                let w = b - a;
                adjacency[va].push((vb, w.clone(), SubEdge { edge: EdgeId(e), from: a.clone(), to: b.clone() }));
                adjacency[vb].push((va, w, SubEdge { edge: EdgeId(e), from: b.clone(), to: a.clone() }));
            }
        }

        let (apsp, pred) = all_pairs(&adjacency);
        let unreachable: Vec<String> = edges
            .iter()
            .filter(|e| apsp[0][e.mark_vertex[0]].is_none())
            .map(|e| e.name.clone())
            .collect();
        if !unreachable.is_empty() {
            return Err(BuildError::Disconnected(unreachable));
        }

        let mut lints = Vec::new();
        for edge in &edges {
            if let EdgeKind::Segment(len) = &edge.kind {
                for (k, m) in edge.marks.iter().enumerate() {
                    let endpoint = m.is_zero() || m == len;
                    if endpoint && vertex_locations[edge.mark_vertex[k]].len() == 1 {
                        lints.push(format!("segment `{}` has a free endpoint at {}", edge.name, m));
                    }
                }
            }
        }

        let mut complex = RayComplex {
            id: SpaceId(0),
            edges,
            by_name,
            vertex_locations,
            adjacency,
            apsp,
            pred,
            base: (base_edge, base_param),
            lints,
        };
        complex.id = SpaceId::of_content(complex.canonical_text().as_bytes());
        Ok(complex)
    }
}

/// Rays before segments, then natural name order, then parameter.
fn location_preference(edges: &[Edge], a: &(EdgeId, Q), b: &(EdgeId, Q)) -> Ordering {
    let rank = |e: EdgeId| matches!(edges[e.0].kind, EdgeKind::Segment(_)) as u8;
    rank(a.0)
        .cmp(&rank(b.0))
        .then_with(|| natural_cmp(&edges[a.0 .0].name, &edges[b.0 .0].name))
        .then_with(|| a.1.cmp(&b.1))
}

type Pred = Vec<Vec<Option<(usize, usize)>>>;

/// Exact single-source shortest paths from every vertex.
fn all_pairs(adjacency: &[Vec<(usize, Q, SubEdge)>]) -> (Vec<Vec<Option<Q>>>, Pred) {
    let n = adjacency.len();
    let mut dist = Vec::with_capacity(n);
    let mut pred = Vec::with_capacity(n);
    for s in 0..n {
        let mut d: Vec<Option<Q>> = vec![None; n];
        let mut p: Vec<Option<(usize, usize)>> = vec![None; n];
        let mut heap = BinaryHeap::new();
        d[s] = Some(Q::zero());
        heap.push(Reverse((Q::zero(), s)));
        while let Some(Reverse((du, u))) = heap.pop() {
            if d[u].as_ref().is_some_and(|best| &du > best) {
                continue;
            }
            for (k, (v, w, _)) in adjacency[u].iter().enumerate() {
                let cand = &du + w;
                if d[*v].as_ref().is_none_or(|cur| &cand < cur) {
                    d[*v] = Some(cand.clone());
                    p[*v] = Some((u, k));
                    heap.push(Reverse((cand, *v)));
                }
            }
        }
        dist.push(d);
        pred.push(p);
    }
    (dist, pred)
}

/// A finite gluing of rays and segments with exact rational lengths.
#[derive(Clone, Debug)]
pub struct RayComplex {
    id: SpaceId,
    pub(crate) edges: Vec<Edge>,
    by_name: BTreeMap<String, EdgeId>,
    vertex_locations: Vec<Vec<(EdgeId, Q)>>,
    adjacency: Vec<Vec<(usize, Q, SubEdge)>>,
    apsp: Vec<Vec<Option<Q>>>,
    pred: Pred,
    base: (EdgeId, Q),
    lints: Vec<String>,
}

impl PartialEq for RayComplex {
    fn eq(&self, other: &Self) -> bool {
        self.canonical_text() == other.canonical_text()
    }
}

impl RayComplex {
    pub fn space_id(&self) -> crate::metric::SpaceId {
        self.id
    }

    pub fn edge_count(&self) -> usize {
        self.edges.len()
    }

    pub fn vertex_count(&self) -> usize {
        self.vertex_locations.len()
    }

    pub fn edge_id(&self, name: &str) -> Option<EdgeId> {
        self.by_name.get(name).copied()
    }

    pub fn edge_name(&self, e: EdgeId) -> &str {
        &self.edges[e.0].name
    }

    pub fn edge_kind(&self, e: EdgeId) -> &EdgeKind {
        &self.edges[e.0].kind
    }

    pub fn edge_names(&self) -> impl Iterator<Item = &str> {
        self.edges.iter().map(|e| e.name.as_str())
    }

    /// Names of unbounded edges.
    pub fn ray_names(&self) -> Vec<String> {
        self.edges.iter().filter(|e| e.kind == EdgeKind::Ray).map(|e| e.name.clone()).collect()
    }

    /// Lints raised while building (free segment endpoints).
    pub fn lints(&self) -> &[String] {
        &self.lints
    }

    pub fn basepoint_location(&self) -> (EdgeId, &Q) {
        (self.base.0, &self.base.1)
    }

    /// Gluing classes with at least two locations, each sorted by name.
    pub fn gluing_classes(&self) -> Vec<Vec<(String, Q)>> {
        let mut classes: Vec<Vec<(String, Q)>> = self
            .vertex_locations
            .iter()
            .filter(|locs| locs.len() > 1)
            .map(|locs| {
                let mut named: Vec<(String, Q)> =
                    locs.iter().map(|(e, m)| (self.edges[e.0].name.clone(), m.clone())).collect();
                named.sort_by(|a, b| natural_cmp(&a.0, &b.0).then_with(|| a.1.cmp(&b.1)));
                named
            })
            .collect();
        classes.sort_by(|a, b| natural_cmp(&a[0].0, &b[0].0).then_with(|| a[0].1.cmp(&b[0].1)));
        classes
    }

    /// Canonical text in the `.space` language: sorted ids, expanded
    /// declarations, normalized rational lengths.
    pub fn canonical_text(&self) -> String {
        let mut out = String::new();
        let mut edges: Vec<&Edge> = self.edges.iter().collect();
        edges.sort_by(|a, b| natural_cmp(&a.name, &b.name));
        for e in &edges {
            match &e.kind {
                EdgeKind::Ray => writeln!(out, "ray {}", e.name).unwrap(),
                EdgeKind::Segment(len) => writeln!(out, "seg {} {}", e.name, len).unwrap(),
            }
        }
        for class in self.gluing_classes() {
            let (an, ap) = &class[0];
            for (bn, bp) in &class[1..] {
                writeln!(out, "glue {an}:{ap} {bn}:{bp}").unwrap();
            }
        }
        let (be, bp) = &self.base;
        let base_vertex = self.vertex_at(*be, bp).expect("basepoint is a mark");
        let mut locs: Vec<(String, Q)> = self.vertex_locations[base_vertex]
            .iter()
            .map(|(e, m)| (self.edges[e.0].name.clone(), m.clone()))
            .collect();
        locs.sort_by(|a, b| natural_cmp(&a.0, &b.0).then_with(|| a.1.cmp(&b.1)));
        writeln!(out, "base {}:{}", locs[0].0, locs[0].1).unwrap();
        out
    }

    fn vertex_at(&self, e: EdgeId, t: &Q) -> Option<usize> {
        let edge = &self.edges[e.0];
        edge.marks.binary_search(t).ok().map(|k| edge.mark_vertex[k])
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::scalar::q;

    #[test]
    fn natural_order() {
        let mut v = vec!["g10", "g2", "alpha", "g1", "ca3", "cb12", "cb2"];
        v.sort_by(|a, b| natural_cmp(a, b));
        assert_eq!(v, vec!["alpha", "ca3", "cb2", "cb12", "g1", "g2", "g10"]);
    }

    #[test]
    fn builder_errors_carry_codes() {
        let mut b = RayComplexBuilder::new();
        b.ray("a").unwrap();
        assert_eq!(b.ray("a").unwrap_err().code(), "E_DUPLICATE");
        assert_eq!(b.segment("s", q(-3)).unwrap_err().code(), "E_LENGTH_NONPOSITIVE");
        assert_eq!(b.glue(("a", q(0)), ("zz", q(0))).unwrap_err().code(), "E_UNDECLARED");
        b.segment("s", q(2)).unwrap();
        assert_eq!(b.glue(("s", q(3)), ("a", q(0))).unwrap_err().code(), "E_PARAM_RANGE");
        assert_eq!(b.build().unwrap_err().code(), "E_NO_BASEPOINT");
        b.basepoint(("a", q(0))).unwrap();
        assert_eq!(b.build().unwrap_err().code(), "E_DISCONNECTED");
        b.glue(("s", q(0)), ("a", q(1))).unwrap();
        let c = b.build().unwrap();
        assert_eq!(c.lints().len(), 1, "{:?}", c.lints());
    }

    #[test]
    fn gluing_more_than_two_locations() {
        let mut b = RayComplexBuilder::new();
        b.ray("a").unwrap().ray("b").unwrap().ray("c").unwrap();
        b.glue(("a", q(0)), ("b", q(0))).unwrap();
        b.glue(("b", q(0)), ("c", q(0))).unwrap();
        b.basepoint(("c", q(0))).unwrap();
        let c = b.build().unwrap();
        assert_eq!(c.vertex_count(), 1);
        assert_eq!(c.canonical_text(), "ray a\nray b\nray c\nglue a:0 b:0\nglue a:0 c:0\nbase a:0\n");
    }
}
