//! Boundary points, Gromov products at infinity, `U(eta, r)` neighbourhoods,
//! convergence tables and continuity tests for boundary bijections.
//!
//! The product at infinity is estimated from canonical representatives as
//! window minima `E(S) = min (alpha(s) . beta(t))_o` over a grid of
//! `s, t in [S, 2S]`, doubling `S` until the last three minima agree. On ray
//! complexes the products are eventually constant, so this terminates with
//! the exact value. The self-product is `+inf` by convention, so `eta` lies in
//! every `U(eta, r)`. Every verdict is relative to the tested radii and
//! indices; reports carry the schedules used.

use std::collections::BTreeMap;

use rayon::prelude::*;
use serde::Serialize;

use crate::error::{Error, Result};
use crate::metric::{gromov_product, MetricSpace, SpaceId, UnitSpeedRay};
use crate::report::ser_display_opt;
use crate::scalar::Scalar;

/// A boundary point: an asymptote class of rays with a canonical
/// representative based at `o` and optional auxiliary representatives.
#[derive(Clone, Debug)]
pub struct BoundaryPoint {
    pub label: String,
    pub space: SpaceId,
    pub canonical: UnitSpeedRay,
    pub aux: Vec<UnitSpeedRay>,
    /// Parameter from which the canonical representative runs along its
    /// final unbounded piece. Product windows start no earlier than this.
    pub settle: f64,
}

impl BoundaryPoint {
    /// Canonical representative first.
    pub fn reps(&self) -> Vec<&UnitSpeedRay> {
        std::iter::once(&self.canonical).chain(&self.aux).collect()
    }
}

pub fn find<'a>(boundary: &'a [BoundaryPoint], label: &str) -> Result<&'a BoundaryPoint> {
    boundary.iter().find(|b| b.label == label).ok_or_else(|| Error::UnknownLabel(label.to_string()))
}

/// Doubling schedule for product estimates.
#[derive(Clone, Debug, Serialize)]
pub struct ProductSchedule {
    pub start: f64,
    pub max_horizon: f64,
    /// Grid points per axis in each window.
    pub grid: usize,
    /// Agreement tolerance for float spaces (exact spaces require equality).
    pub tol: f64,
}

impl Default for ProductSchedule {
    fn default() -> Self {
        ProductSchedule { start: 1.0, max_horizon: (1u64 << 22) as f64, grid: 5, tol: 1e-7 }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum ProductStatus {
    Converged,
    Inconclusive,
}

#[derive(Clone, Debug, Serialize)]
#[serde(bound = "")]
pub struct WindowMin<S: Scalar> {
    pub horizon: f64,
    #[serde(serialize_with = "crate::report::ser_display")]
    pub min: S,
}

/// Estimate of `(eta . zeta)_o`. `value` is `None` for the self-product (`+inf`).
#[derive(Clone, Debug, Serialize)]
#[serde(bound = "")]
pub struct BoundaryProductEstimate<S: Scalar> {
    pub eta: String,
    pub zeta: String,
    #[serde(serialize_with = "ser_display_opt")]
    pub value: Option<S>,
    pub status: ProductStatus,
    pub windows: Vec<WindowMin<S>>,
    /// `50 C_eta` when a contraction constant is known.
    pub error_bar: Option<f64>,
}

impl<S: Scalar> BoundaryProductEstimate<S> {
    pub fn is_converged(&self) -> bool {
        self.status == ProductStatus::Converged
    }

    pub fn value_f64(&self) -> f64 {
        self.value.as_ref().map_or(f64::INFINITY, Scalar::to_f64)
    }
}

fn agree<S: Scalar>(a: &S, b: &S, tol: f64) -> bool {
    if S::EXACT {
        a == b
    } else {
        (a.clone() - b.clone()).abs_val().to_f64() <= tol * (1.0 + a.to_f64().abs())
    }
}

/// Window minimum of `(alpha(s) . beta(t))_o` over `s, t in [S, 2S]`.
fn window_min<M: MetricSpace>(space: &M, a: &UnitSpeedRay, b: &UnitSpeedRay, s: f64, grid: usize) -> Result<M::Scalar> {
    let o = space.basepoint();
    let grid = grid.max(2);
    let params: Vec<M::Scalar> = (0..grid).map(|k| M::Scalar::from_f64(s + s * k as f64 / (grid - 1) as f64)).collect();
    let pa: Vec<_> = params.iter().map(|t| space.ray_point(a, t)).collect::<Result<_>>()?;
    let pb: Vec<_> = params.iter().map(|t| space.ray_point(b, t)).collect::<Result<_>>()?;
    let mut best: Option<M::Scalar> = None;
    for x in &pa {
        for y in &pb {
            let v = gromov_product(space, x, y, &o)?;
            best = Some(match best {
                Some(b) => b.min_of(v),
                None => v,
            });
        }
    }
    Ok(best.expect("non-empty grid"))
}

/// Estimates `(eta . zeta)_o` from the canonical representatives.
pub fn boundary_gromov_product<M: MetricSpace>(
    space: &M,
    eta: &BoundaryPoint,
    zeta: &BoundaryPoint,
    schedule: &ProductSchedule,
) -> Result<BoundaryProductEstimate<M::Scalar>> {
    for b in [eta, zeta] {
        if b.space != space.id() {
            return Err(Error::SpaceMismatch(b.space, space.id()));
        }
    }
    let mut est = BoundaryProductEstimate {
        eta: eta.label.clone(),
        zeta: zeta.label.clone(),
        value: None,
        status: ProductStatus::Converged,
        windows: Vec::new(),
        error_bar: None,
    };
    if eta.label == zeta.label {
        return Ok(est);
    }
    let mut s = schedule.start;
    while s < eta.settle.max(zeta.settle) {
        s *= 2.0;
    }
    while s <= schedule.max_horizon {
        let m = window_min(space, &eta.canonical, &zeta.canonical, s, schedule.grid)?;
        est.windows.push(WindowMin { horizon: s, min: m });
        let w = &est.windows;
        if w.len() >= 3 {
            let n = w.len();
            if agree(&w[n - 1].min, &w[n - 2].min, schedule.tol) && agree(&w[n - 2].min, &w[n - 3].min, schedule.tol) {
                est.value = Some(w[n - 1].min.clone());
                return Ok(est);
            }
        }
        s *= 2.0;
    }
    est.status = ProductStatus::Inconclusive;
    est.value = est.windows.last().map(|w| w.min.clone());
    Ok(est)
}

/// Product estimates for every pair of a finite boundary.
#[derive(Clone, Debug, Serialize)]
pub struct ProductTable<S: Scalar> {
    pub space: SpaceId,
    pub schedule: ProductSchedule,
    pub labels: Vec<String>,
    pub entries: Vec<BoundaryProductEstimate<S>>,
    #[serde(skip)]
    index: BTreeMap<(String, String), usize>,
}

impl<S: Scalar> ProductTable<S> {
    pub fn get(&self, a: &str, b: &str) -> Result<&BoundaryProductEstimate<S>> {
        self.index
            .get(&(a.to_string(), b.to_string()))
            .or_else(|| self.index.get(&(b.to_string(), a.to_string())))
            .map(|&k| &self.entries[k])
            .ok_or_else(|| Error::UnknownLabel(format!("no product for ({a}, {b})")))
    }

    /// Attaches `50 C_eta` error bars from a table of contraction constants.
    pub fn attach_error_bars(&mut self, constants: &BTreeMap<String, f64>) {
        for e in &mut self.entries {
            e.error_bar = constants.get(&e.eta).map(|c| 50.0 * c);
        }
    }

    /// Row-major matrix of values (`inf` on the diagonal).
    pub fn matrix(&self) -> Vec<Vec<f64>> {
        self.labels
            .iter()
            .map(|a| self.labels.iter().map(|b| self.get(a, b).map_or(f64::NAN, |e| e.value_f64())).collect())
            .collect()
    }

    pub fn all_converged(&self) -> bool {
        self.entries.iter().all(BoundaryProductEstimate::is_converged)
    }
}

/// Estimates all unordered pairs (including the diagonal) in parallel.
pub fn product_table<M: MetricSpace>(
    space: &M,
    boundary: &[BoundaryPoint],
    schedule: &ProductSchedule,
) -> Result<ProductTable<M::Scalar>> {
    let pairs: Vec<(usize, usize)> =
        (0..boundary.len()).flat_map(|i| (i..boundary.len()).map(move |j| (i, j))).collect();
    let entries: Vec<_> = pairs
        .par_iter()
        .map(|&(i, j)| boundary_gromov_product(space, &boundary[i], &boundary[j], schedule))
        .collect::<Result<_>>()?;
    let index = entries.iter().enumerate().map(|(k, e)| ((e.eta.clone(), e.zeta.clone()), k)).collect();
    Ok(ProductTable {
        space: space.id(),
        schedule: schedule.clone(),
        labels: boundary.iter().map(|b| b.label.clone()).collect(),
        entries,
        index,
    })
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum Membership {
    In,
    Out,
    Inconclusive,
}

/// Whether `zeta` lies in `U(eta, r)`: in iff the estimate is at least `r - tol`.
pub fn u_set_membership<S: Scalar>(estimate: &BoundaryProductEstimate<S>, r: f64, tol: f64) -> Membership {
    if !estimate.is_converged() {
        return Membership::Inconclusive;
    }
    match &estimate.value {
        None => Membership::In,
        Some(v) if *v >= S::from_f64(r - tol) => Membership::In,
        Some(_) => Membership::Out,
    }
}

/// Labels of `U(eta, r)` within the table's boundary.
pub fn u_set<S: Scalar>(table: &ProductTable<S>, eta: &str, r: f64, tol: f64) -> Result<Vec<String>> {
    let mut out = Vec::new();
    for label in &table.labels {
        match u_set_membership(table.get(eta, label)?, r, tol) {
            Membership::In => out.push(label.clone()),
            Membership::Out => {}
            Membership::Inconclusive => {
                return Err(Error::Inconclusive(format!("product ({eta}, {label}) did not converge")))
            }
        }
    }
    Ok(out)
}

#[derive(Clone, Debug, Serialize)]
pub struct ConvergenceRow {
    pub r: f64,
    /// 1-based position of the first term from which every later tested term is in `U(eta, r)`.
    pub first_position: Option<usize>,
    pub first_label: Option<String>,
    pub inconclusive_terms: Vec<String>,
}

#[derive(Clone, Debug, Serialize)]
pub struct ConvergenceReport {
    pub eta: String,
    pub sequence: Vec<String>,
    pub rows: Vec<ConvergenceRow>,
    /// Converges at every tested radius (over the tested terms only).
    pub converges: bool,
}

/// Convergence of a finite sequence of boundary points to `eta` at the radii in `schedule`.
pub fn converges_in_gp<S: Scalar>(
    table: &ProductTable<S>,
    sequence: &[String],
    eta: &str,
    schedule: &[f64],
    tol: f64,
) -> Result<ConvergenceReport> {
    let estimates: Vec<&BoundaryProductEstimate<S>> =
        sequence.iter().map(|s| table.get(eta, s)).collect::<Result<_>>()?;
    let mut rows = Vec::new();
    for &r in schedule {
        let members: Vec<Membership> = estimates.iter().map(|e| u_set_membership(e, r, tol)).collect();
        let inconclusive_terms = sequence
            .iter()
            .zip(&members)
            .filter(|(_, m)| **m == Membership::Inconclusive)
            .map(|(s, _)| s.clone())
            .collect();
        let tail_start = members.iter().rposition(|m| *m != Membership::In).map_or(0, |k| k + 1);
        let first = (tail_start < sequence.len()).then_some(tail_start);
        rows.push(ConvergenceRow {
            r,
            first_position: first.map(|k| k + 1),
            first_label: first.map(|k| sequence[k].clone()),
            inconclusive_terms,
        });
    }
    let converges = rows.iter().all(|r| r.first_position.is_some() && r.inconclusive_terms.is_empty());
    Ok(ConvergenceReport { eta: eta.to_string(), sequence: sequence.to_vec(), rows, converges })
}

/// Two distinct limits of the same sequence, if any. Terms of the sequence
/// are not considered as limits: in a finite truncation the last term is
/// trivially a "limit" of the terms before it.
pub fn hausdorff_violation_witness<S: Scalar>(
    table: &ProductTable<S>,
    sequence: &[String],
    schedule: &[f64],
    tol: f64,
) -> Result<Option<(String, String)>> {
    let mut limits = Vec::new();
    for label in table.labels.iter().filter(|l| !sequence.contains(l)) {
        if converges_in_gp(table, sequence, label, schedule, tol)?.converges {
            limits.push(label.clone());
            if limits.len() == 2 {
                return Ok(Some((limits[0].clone(), limits[1].clone())));
            }
        }
    }
    Ok(None)
}

#[derive(Clone, Debug, Serialize)]
pub struct ImageTerm {
    pub term: String,
    pub image: String,
    pub product: f64,
}

/// A sequence converging to `eta` whose images stay outside `U(phi eta, r)`.
#[derive(Clone, Debug, Serialize)]
pub struct DiscontinuityCertificate {
    pub eta: String,
    pub image_eta: String,
    pub r: f64,
    pub from_space: SpaceId,
    pub to_space: SpaceId,
    pub outside: Vec<ImageTerm>,
    pub tested_terms: usize,
    pub upstream_schedule: Vec<f64>,
    pub product_schedule: ProductSchedule,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum ContinuityVerdict {
    /// The image sequence converges at every tested radius.
    Continuous,
    Discontinuous,
    /// The upstream sequence does not converge at the tested radii, or the
    /// downstream data neither converges nor certifies a discontinuity.
    Inconclusive,
}

#[derive(Clone, Debug, Serialize)]
pub struct ContinuityReport {
    pub verdict: ContinuityVerdict,
    pub upstream: ConvergenceReport,
    pub downstream: ConvergenceReport,
    pub certificate: Option<DiscontinuityCertificate>,
}

/// Tests continuity at `eta` of the boundary bijection given by
/// `correspondence` (label in the source to label in the target).
///
/// A certificate at radius `r` requires the upstream sequence to converge to
/// `eta`, and image terms outside `U(phi eta, r)` that include the last
/// tested term and make up at least half of the terms.
#[allow(clippy::too_many_arguments)]
pub fn boundary_map_continuity_test<S: Scalar, T: Scalar>(
    correspondence: &BTreeMap<String, String>,
    upstream: &ProductTable<S>,
    downstream: &ProductTable<T>,
    sequence: &[String],
    eta: &str,
    upstream_radii: &[f64],
    downstream_radii: &[f64],
    tol: f64,
) -> Result<ContinuityReport> {
    let image = |l: &str| {
        correspondence.get(l).cloned().ok_or_else(|| Error::UnknownLabel(format!("{l} has no image")))
    };
    let image_eta = image(eta)?;
    let image_seq: Vec<String> = sequence.iter().map(|s| image(s)).collect::<Result<_>>()?;
    let up = converges_in_gp(upstream, sequence, eta, upstream_radii, tol)?;
    let down = converges_in_gp(downstream, &image_seq, &image_eta, downstream_radii, tol)?;
    for row in up.rows.iter().chain(&down.rows) {
        if !row.inconclusive_terms.is_empty() {
            return Err(Error::Inconclusive(format!("unconverged products for {:?}", row.inconclusive_terms)));
        }
    }
    let mut certificate = None;
    if up.converges {
        for &r in downstream_radii {
            let mut outside = Vec::new();
            for (term, img) in sequence.iter().zip(&image_seq) {
                let est = downstream.get(&image_eta, img)?;
                if u_set_membership(est, r, tol) == Membership::Out {
                    outside.push(ImageTerm { term: term.clone(), image: img.clone(), product: est.value_f64() });
                }
            }
            let last_out = outside.last().is_some_and(|t| Some(&t.image) == image_seq.last());
            if last_out && 2 * outside.len() >= sequence.len() {
                certificate = Some(DiscontinuityCertificate {
                    eta: eta.to_string(),
                    image_eta: image_eta.clone(),
                    r,
                    from_space: upstream.space,
                    to_space: downstream.space,
                    outside,
                    tested_terms: sequence.len(),
                    upstream_schedule: upstream_radii.to_vec(),
                    product_schedule: downstream.schedule.clone(),
                });
                break;
            }
        }
    }
    let verdict = match (&certificate, up.converges, down.converges) {
        (Some(_), _, _) => ContinuityVerdict::Discontinuous,
        (None, true, true) => ContinuityVerdict::Continuous,
        _ => ContinuityVerdict::Inconclusive,
    };
    Ok(ContinuityReport { verdict, upstream: up, downstream: down, certificate })
}

/// The label bijection `l -> l` restricted to labels present in both tables.
pub fn matching_labels<S: Scalar, T: Scalar>(a: &ProductTable<S>, b: &ProductTable<T>) -> BTreeMap<String, String> {
    a.labels.iter().filter(|l| b.labels.contains(l)).map(|l| (l.clone(), l.clone())).collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::scalar::q;
    use crate::zoo::{build_x, build_y, complex_boundary};

    #[test]
    fn exact_products_in_x() {
        let x = build_x(6).unwrap();
        let b = complex_boundary(&x).unwrap();
        let t = product_table(&x, &b, &ProductSchedule::default()).unwrap();
        assert!(t.all_converged());
        for i in 1..=6 {
            let g = format!("g{i}");
            assert_eq!(t.get("alpha", &g).unwrap().value, Some(q(i)));
            assert_eq!(t.get(&g, "beta").unwrap().value, Some(q(i)));
        }
        assert_eq!(t.get("alpha", "beta").unwrap().value, Some(q(0)));
        assert_eq!(t.get("g2", "g2").unwrap().value, None);
    }

    #[test]
    fn membership_and_convergence() {
        let x = build_x(8).unwrap();
        let t = product_table(&x, &complex_boundary(&x).unwrap(), &ProductSchedule::default()).unwrap();
        assert_eq!(u_set_membership(t.get("alpha", "g5").unwrap(), 5.0, 0.0), Membership::In);
        assert_eq!(u_set_membership(t.get("alpha", "g5").unwrap(), 6.0, 0.0), Membership::Out);
        assert_eq!(u_set_membership(t.get("alpha", "alpha").unwrap(), 1e9, 0.0), Membership::In);
        let seq: Vec<String> = (1..=8).map(|i| format!("g{i}")).collect();
        let rep = converges_in_gp(&t, &seq, "alpha", &[0.5, 1.0, 2.5, 7.0], 0.0).unwrap();
        assert!(rep.converges);
        let firsts: Vec<_> = rep.rows.iter().map(|r| r.first_position).collect();
        assert_eq!(firsts, vec![Some(1), Some(1), Some(3), Some(7)]);
        let w = hausdorff_violation_witness(&t, &seq, &[1.0, 2.0, 4.0], 0.0).unwrap();
        assert_eq!(w, Some(("alpha".to_string(), "beta".to_string())));
        let constant = vec!["alpha".to_string(); 4];
        assert!(converges_in_gp(&t, &constant, "alpha", &[1.0, 100.0], 0.0).unwrap().converges);
    }

    #[test]
    fn identity_x_to_y_is_discontinuous() {
        let x = crate::zoo::build_x_range(3, 10).unwrap();
        let y = build_y(10).unwrap();
        let tx = product_table(&x, &complex_boundary(&x).unwrap(), &ProductSchedule::default()).unwrap();
        let ty = product_table(&y, &complex_boundary(&y).unwrap(), &ProductSchedule::default()).unwrap();
        let seq: Vec<String> = (3..=10).map(|i| format!("g{i}")).collect();
        let radii = [1.0, 2.0, 3.0];
        let corr = matching_labels(&tx, &ty);
        let rep = boundary_map_continuity_test(&corr, &tx, &ty, &seq, "alpha", &radii, &[1.0], 0.0).unwrap();
        assert_eq!(rep.verdict, ContinuityVerdict::Discontinuous);
        assert_eq!(rep.certificate.unwrap().outside.len(), seq.len());
        let same = boundary_map_continuity_test(&matching_labels(&tx, &tx), &tx, &tx, &seq, "alpha", &radii, &radii, 0.0).unwrap();
        assert_eq!(same.verdict, ContinuityVerdict::Continuous);
    }
}
