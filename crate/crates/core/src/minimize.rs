//! Global near-minimisers of Lipschitz functions on an interval.

use std::cmp::Ordering;
use std::collections::BinaryHeap;

use crate::error::{Error, Result};

/// Sublevel set `{t : f(t) <= value + tol}` as maximal intervals.
#[derive(Clone, Debug)]
pub(crate) struct Minimum {
    pub value: f64,
    pub intervals: Vec<(f64, f64)>,
}

struct Cell {
    lower: f64,
    a: f64,
    b: f64,
    fa: f64,
    fb: f64,
}

impl PartialEq for Cell {
    fn eq(&self, other: &Self) -> bool {
        self.lower == other.lower
    }
}
impl Eq for Cell {}
impl PartialOrd for Cell {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}
impl Ord for Cell {
    // Min-heap on the lower bound.
    fn cmp(&self, other: &Self) -> Ordering {
        other.lower.total_cmp(&self.lower).then_with(|| other.a.total_cmp(&self.a))
    }
}

const MAX_EVALS: usize = 200_000;

/// Branch and bound for an `lip`-Lipschitz `f` on `[lo, hi]`, followed by
/// golden-section polishing and bisection of the sublevel-set edges.
pub(crate) fn lipschitz_sublevel(
    f: &dyn Fn(f64) -> Result<f64>,
    lo: f64,
    hi: f64,
    lip: f64,
    tol: f64,
) -> Result<Minimum> {
    let res = tol.sqrt().clamp(1e-6, 1e-2);
    let (flo, fhi) = (f(lo)?, f(hi)?);
    let (mut best, mut argmin) = if flo <= fhi { (flo, lo) } else { (fhi, hi) };
    let mut heap = BinaryHeap::new();
    let cell = |a: f64, b: f64, fa: f64, fb: f64| Cell { lower: (fa + fb - lip * (b - a)) / 2.0, a, b, fa, fb };
    heap.push(cell(lo, hi, flo, fhi));
    let mut leaves: Vec<(f64, f64)> = Vec::new();
    let mut evals = 2usize;
    while let Some(c) = heap.pop() {
        if c.lower > best + tol {
            break;
        }
        if c.b - c.a <= res * (1.0 + best.abs()).min(1e3) {
            leaves.push((c.a, c.b));
            continue;
        }
        let m = 0.5 * (c.a + c.b);
        let fm = f(m)?;
        evals += 1;
        if evals > MAX_EVALS {
            return Err(Error::Inconclusive("minimisation did not resolve within the evaluation budget".into()));
        }
        if fm < best {
            best = fm;
            argmin = m;
        }
        heap.push(cell(c.a, m, c.fa, fm));
        heap.push(cell(m, c.b, fm, c.fb));
    }
    // Leaves popped before `best` settled may be stale; the cluster bisection
    // below trims them.
    leaves.sort_by(|x, y| x.0.total_cmp(&y.0));
    let mut clusters: Vec<(f64, f64)> = Vec::new();
    for (a, b) in leaves {
        match clusters.last_mut() {
            Some(last) if a <= last.1 + 1e-12 => last.1 = last.1.max(b),
            _ => clusters.push((a, b)),
        }
    }
    let mut mins = Vec::with_capacity(clusters.len());
    for &(a, b) in &clusters {
        let (t, v) = golden_section(f, a, b)?;
        if v < best {
            best = v;
            argmin = t;
        }
        mins.push(t);
    }
    let level = best + tol;
    let mut intervals = Vec::new();
    for (&(a, b), &m) in clusters.iter().zip(&mins) {
        if f(m)? > level {
            continue;
        }
        let left = if f(a)? <= level { a } else { bisect_level(f, a, m, level)? };
        let right = if f(b)? <= level { b } else { bisect_level(f, m, b, level)? };
        match intervals.last_mut() {
            Some((_, r)) if left <= *r => *r = r.max(right),
            _ => intervals.push((left, right)),
        }
    }
    if intervals.is_empty() {
        intervals.push((argmin, argmin));
    }
    Ok(Minimum { value: best, intervals })
}

/// Minimum of a unimodal function on `[a, b]`.
pub(crate) fn golden_section(f: &dyn Fn(f64) -> Result<f64>, mut a: f64, mut b: f64) -> Result<(f64, f64)> {
    const INV_PHI: f64 = 0.618_033_988_749_894_8;
    let mut c = b - INV_PHI * (b - a);
    let mut d = a + INV_PHI * (b - a);
    let (mut fc, mut fd) = (f(c)?, f(d)?);
    for _ in 0..80 {
        if b - a <= 1e-12 * (1.0 + a.abs()) {
            break;
        }
        if fc <= fd {
            b = d;
            d = c;
            fd = fc;
            c = b - INV_PHI * (b - a);
            fc = f(c)?;
        } else {
            a = c;
            c = d;
            fc = fd;
            d = a + INV_PHI * (b - a);
            fd = f(d)?;
        }
    }
    let candidates = [(a, f(a)?), (b, f(b)?), (c, fc), (d, fd)];
    Ok(candidates.into_iter().min_by(|x, y| x.1.total_cmp(&y.1)).expect("four candidates"))
}

/// Point of `[a, b]` where `f` crosses `level`, given that exactly one of
/// the endpoints is at or below it. Returns the side inside the sublevel set.
pub(crate) fn bisect_level(f: &dyn Fn(f64) -> Result<f64>, a: f64, b: f64, level: f64) -> Result<f64> {
    let inside_a = f(a)? <= level;
    let (mut inside, mut outside) = if inside_a { (a, b) } else { (b, a) };
    for _ in 0..200 {
        if (outside - inside).abs() <= 1e-12 * (1.0 + inside.abs()) {
            break;
        }
        let m = 0.5 * (inside + outside);
        if f(m)? <= level {
            inside = m;
        } else {
            outside = m;
        }
    }
    Ok(inside)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn finds_v_shaped_minimum() {
        let f = |t: f64| Ok((t - 3.25).abs() + 1.0);
        let m = lipschitz_sublevel(&f, 0.0, 100.0, 1.0, 1e-6).unwrap();
        assert!((m.value - 1.0).abs() < 1e-9);
        assert_eq!(m.intervals.len(), 1);
        let (a, b) = m.intervals[0];
        assert!((a - 3.25).abs() < 2e-6 && (b - 3.25).abs() < 2e-6, "{a} {b}");
    }

    #[test]
    fn keeps_separate_ties() {
        let f = |t: f64| Ok((t - 2.0).abs().min((t - 7.0).abs()));
        let m = lipschitz_sublevel(&f, 0.0, 10.0, 1.0, 1e-7).unwrap();
        assert_eq!(m.intervals.len(), 2, "{:?}", m.intervals);
    }

    #[test]
    fn smooth_minimum_interval_width() {
        let f = |t: f64| Ok((1.0 + (t - 5.0) * (t - 5.0)).sqrt());
        let m = lipschitz_sublevel(&f, 0.0, 50.0, 1.0, 1e-6).unwrap();
        let (a, b) = m.intervals[0];
        // sqrt(1 + d^2) <= 1 + 1e-6 for |d| <= ~1.414e-3
        assert!((b - a - 2.0 * (2e-6f64).sqrt()).abs() < 1e-6, "{a} {b}");
    }
}
