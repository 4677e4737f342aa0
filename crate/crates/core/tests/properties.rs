//! Randomised properties of the metric engines, the projection, boundary
//! products and the space description language.

use std::collections::{BTreeMap, BTreeSet};

use boundary_lab::annulus::AnnulusSpace;
use boundary_lab::boundary::{boundary_gromov_product, ProductSchedule};
use boundary_lab::complex::{RayComplex, RayComplexBuilder};
use boundary_lab::contraction::project_onto;
use boundary_lab::suite::random_description;
use boundary_lab::zoo::{self, dsl};
use boundary_lab::{gromov_product, MetricSpace, Point, Q};
use num::{BigInt, Zero};
use proptest::prelude::*;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

fn q(n: i64, d: i64) -> Q {
    Q::new(BigInt::from(n), BigInt::from(d))
}

/// A small complex given by its edges (`None` for rays) and gluings.
#[derive(Clone, Debug)]
struct Shape {
    edges: Vec<Option<Q>>,
    glues: Vec<((usize, Q), (usize, Q))>,
}

fn name(i: usize) -> String {
    format!("e{i}")
}

/// Offsets that are valid on edge `i`, as a strategy over `0..=len` in
/// quarter steps (rays are cut at 24).
fn offset_on(len: &Option<Q>, k: u32) -> Q {
    let top = match len {
        Some(l) => l.clone(),
        None => q(24, 1),
    };
    let v = q(k as i64 % 97, 4);
    if v > top {
        top
    } else {
        v
    }
}

fn shape() -> impl Strategy<Value = Shape> {
    (1usize..12, any::<u64>()).prop_map(|(n, seed)| {
        use rand::Rng;
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let mut edges = vec![None];
        let mut glues = Vec::new();
        for k in 1..n {
            let len = if rng.gen_bool(0.35) { None } else { Some(q(rng.gen_range(1..40), rng.gen_range(1..5))) };
            let host = rng.gen_range(0..k);
            let at = offset_on(&edges[host], rng.gen());
            edges.push(len.clone());
            let end = if len.is_some() && rng.gen_bool(0.3) { len.unwrap() } else { Q::zero() };
            glues.push(((k, end), (host, at)));
        }
        // A few extra gluings close cycles.
        for _ in 0..rng.gen_range(0..3) {
            let (a, b) = (rng.gen_range(0..n), rng.gen_range(0..n));
            let (pa, pb) = (offset_on(&edges[a], rng.gen()), offset_on(&edges[b], rng.gen()));
            glues.push(((a, pa), (b, pb)));
        }
        Shape { edges, glues }
    })
}

fn build(s: &Shape) -> RayComplex {
    let mut b = RayComplexBuilder::new();
    for (i, e) in s.edges.iter().enumerate() {
        match e {
            None => b.ray(&name(i)).unwrap(),
            Some(l) => b.segment(&name(i), l.clone()).unwrap(),
        };
    }
    for ((a, pa), (c, pc)) in &s.glues {
        b.glue((&name(*a), pa.clone()), (&name(*c), pc.clone())).unwrap();
    }
    b.basepoint((&name(0), Q::zero())).unwrap();
    b.build().unwrap()
}

/// Exact distances by Floyd-Warshall on the graph whose nodes are the marked
/// points of every edge (ends, gluing locations and the query points).
fn oracle(s: &Shape, queries: &[(usize, Q)]) -> Vec<Vec<Q>> {
    let mut marks: Vec<BTreeSet<Q>> = s
        .edges
        .iter()
        .map(|e| {
            let mut m = BTreeSet::from([Q::zero()]);
            if let Some(l) = e {
                m.insert(l.clone());
            }
            m
        })
        .collect();
    for ((a, pa), (b, pb)) in &s.glues {
        marks[*a].insert(pa.clone());
        marks[*b].insert(pb.clone());
    }
    for (e, t) in queries {
        marks[*e].insert(t.clone());
    }
    let mut ids: BTreeMap<(usize, Q), usize> = BTreeMap::new();
    for (e, m) in marks.iter().enumerate() {
        for t in m {
            let n = ids.len();
            ids.insert((e, t.clone()), n);
        }
    }
    let n = ids.len();
    let mut d: Vec<Vec<Option<Q>>> = vec![vec![None; n]; n];
    let relax = |d: &mut Vec<Vec<Option<Q>>>, i: usize, j: usize, w: Q| {
        if d[i][j].as_ref().map_or(true, |c| w < *c) {
            d[i][j] = Some(w.clone());
            d[j][i] = Some(w);
        }
    };
    for i in 0..n {
        relax(&mut d, i, i, Q::zero());
    }
    for (e, m) in marks.iter().enumerate() {
        let pts: Vec<&Q> = m.iter().collect();
        for w in pts.windows(2) {
            relax(&mut d, ids[&(e, w[0].clone())], ids[&(e, w[1].clone())], w[1] - w[0]);
        }
    }
    for ((a, pa), (b, pb)) in &s.glues {
        relax(&mut d, ids[&(*a, pa.clone())], ids[&(*b, pb.clone())], Q::zero());
    }
    for k in 0..n {
        for i in 0..n {
            for j in 0..n {
                if let (Some(x), Some(y)) = (&d[i][k], &d[k][j]) {
                    let w = x + y;
                    if d[i][j].as_ref().map_or(true, |c| w < *c) {
                        d[i][j] = Some(w);
                    }
                }
            }
        }
    }
    let idx: Vec<usize> = queries.iter().map(|(e, t)| ids[&(*e, t.clone())]).collect();
    idx.iter().map(|&i| idx.iter().map(|&j| d[i][j].clone().expect("connected")).collect()).collect()
}

fn queries(s: &Shape) -> impl Strategy<Value = Vec<(usize, Q)>> {
    let edges = s.edges.clone();
    prop::collection::vec((0..edges.len(), any::<u32>()), 2..6)
        .prop_map(move |v| v.into_iter().map(|(e, k)| (e, offset_on(&edges[e], k))).collect())
}

fn points(space: &RayComplex, qs: &[(usize, Q)]) -> Vec<Point> {
    qs.iter().map(|(e, t)| space.point(&name(*e), t.clone()).unwrap()).collect()
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn distances_match_floyd_warshall((s, qs) in shape().prop_flat_map(|s| { let qs = queries(&s); (Just(s), qs) })) {
        let space = build(&s);
        let pts = points(&space, &qs);
        let want = oracle(&s, &qs);
        for i in 0..pts.len() {
            for j in 0..pts.len() {
                prop_assert_eq!(&space.distance(&pts[i], &pts[j]).unwrap(), &want[i][j], "pair {} {}", i, j);
            }
        }
    }

    #[test]
    fn complex_metric_axioms((s, qs) in shape().prop_flat_map(|s| { let qs = queries(&s); (Just(s), qs) })) {
        let space = build(&s);
        let pts = points(&space, &qs);
        let d = |a: &Point, b: &Point| space.distance(a, b).unwrap();
        for a in &pts {
            prop_assert!(d(a, a).is_zero());
            for b in &pts {
                prop_assert_eq!(d(a, b), d(b, a));
                for c in &pts {
                    prop_assert!(d(a, c) <= d(a, b) + d(b, c));
                    let g = gromov_product(&space, a, b, c).unwrap();
                    prop_assert!(g >= Q::zero() && g <= d(a, c).min(d(b, c)));
                }
            }
        }
    }

    #[test]
    fn projection_of_a_ray_point_is_itself(seed in any::<u64>(), k in 0u32..400) {
        let x = zoo::build_x(6).unwrap();
        let labels = ["alpha", "beta", "g1", "g4", "g6"];
        let label = labels[(seed % labels.len() as u64) as usize];
        let ray = x.ray_from_basepoint(label).unwrap();
        let t = q(k as i64, 3);
        let p = x.ray_point(&ray, &t).unwrap();
        let proj = project_onto(&x, &p, &ray, 0.0).unwrap();
        prop_assert!(proj.distance.is_zero());
        prop_assert!(proj.intervals.iter().any(|(a, b)| *a <= t && t <= *b));
        // Projecting the projected point again changes nothing.
        let again = project_onto(&x, &x.ray_point(&ray, &proj.intervals[0].0).unwrap(), &ray, 0.0).unwrap();
        prop_assert_eq!(&again.intervals[0].0, &proj.intervals[0].0);
    }

    #[test]
    fn annulus_metric_axioms(pts in prop::collection::vec((-30.0f64..30.0, 1.0f64..40.0), 3..6)) {
        let s = AnnulusSpace::bare();
        let p: Vec<Point> = pts.iter().map(|&(t, r)| s.point(t, r).unwrap()).collect();
        let d = |a: &Point, b: &Point| s.distance(a, b).unwrap();
        for a in &p {
            prop_assert!(d(a, a).abs() < 1e-9);
            for b in &p {
                prop_assert!((d(a, b) - d(b, a)).abs() <= 1e-9 * (1.0 + d(a, b)));
                for c in &p {
                    prop_assert!(d(a, c) <= d(a, b) + d(b, c) + 1e-7 * (1.0 + d(a, c)));
                }
            }
        }
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(50))]

    #[test]
    fn description_round_trip(seed in any::<u64>()) {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let text = random_description(&mut rng);
        let a = dsl::compile_str(&text).unwrap();
        let printed = dsl::serialize(&a);
        let b = dsl::compile_str(&printed).unwrap();
        prop_assert_eq!(a.canonical_text(), b.canonical_text());
        prop_assert_eq!(a.space_id(), b.space_id());
        for (e, _) in a.edge_names().map(|n| (n.to_string(), ())).collect::<Vec<_>>() {
            let (pa, pb) = (a.point(&e, Q::zero()).unwrap(), b.point(&e, Q::zero()).unwrap());
            prop_assert_eq!(a.distance(&a.basepoint(), &pa).unwrap(), b.distance(&b.basepoint(), &pb).unwrap());
        }
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(12))]

    #[test]
    fn boundary_products_are_symmetric(i in 0usize..7, j in 0usize..7) {
        let x = zoo::build_x(5).unwrap();
        let b = zoo::complex_boundary(&x).unwrap();
        prop_assume!(i != j);
        let s = ProductSchedule::default();
        let ab = boundary_gromov_product(&x, &b[i], &b[j], &s).unwrap();
        let ba = boundary_gromov_product(&x, &b[j], &b[i], &s).unwrap();
        prop_assert!(ab.is_converged());
        prop_assert_eq!(ab.value, ba.value);
    }
}
