//! Numerical instances of the escape-time estimates relating `T(alpha, beta)`
//! to Gromov products, and of the neighbourhood-basis condition built on them.

use serde::Serialize;

use super::checks::t_first_escape;
use crate::boundary::{u_set_membership, BoundaryPoint, Membership, ProductTable};
use crate::error::{Error, Result};
use crate::metric::{gromov_product, MetricSpace};
use crate::scalar::Scalar;

/// Multiplier of `C_eta` in `K_eta`.
pub const K_FACTOR: f64 = 62.0;

#[derive(Clone, Debug, Serialize)]
pub struct ClaimPair {
    pub alpha_rep: usize,
    pub beta_rep: usize,
    pub t: f64,
    /// Products were sampled for `s, t in [window, 2 window]`.
    pub window: f64,
    pub product_min: f64,
    pub product_max: f64,
}

#[derive(Clone, Debug, Serialize)]
pub struct ClaimReport {
    pub eta: String,
    pub zeta: String,
    pub c_eta: f64,
    pub c_zeta: f64,
    pub pairs: Vec<ClaimPair>,
    /// `max |(alpha(s) . beta(t))_o - T(alpha, beta)|` (bound `12 C_eta`).
    pub eq_product: f64,
    /// `max |T(alpha, beta) - T(alpha', beta)|` (bound `13 C_eta`).
    pub eq_swap_alpha: f64,
    /// `max |T(alpha, beta) - T(alpha, beta')|` (bound `13 C_eta`).
    pub eq_swap_beta: f64,
    /// Spread of all sampled products (bound `50 C_eta`).
    pub combined: f64,
    /// `max |T(alpha, beta) - (eta . zeta)_o|` (bound `62 C_eta`).
    pub k_residual: f64,
    pub boundary_product: f64,
    pub violations: Vec<String>,
}

impl ClaimReport {
    pub fn passed(&self) -> bool {
        self.violations.is_empty()
    }
}

/// Grid points per axis for the finite-scale products.
const GRID: usize = 3;

/// Computes `T` for every pair of representatives, samples products at
/// `s, t in [S0, 2 S0]` with `S0 = max(4T, 8)`, and compares every residual
/// with its bound.
pub fn claim_check<M: MetricSpace>(
    space: &M,
    eta: &BoundaryPoint,
    zeta: &BoundaryPoint,
    c_eta: f64,
    c_zeta: f64,
    table: &ProductTable<M::Scalar>,
    max_horizon: f64,
) -> Result<ClaimReport> {
    if eta.label == zeta.label {
        return Err(Error::Precondition("the two boundary points must differ".into()));
    }
    let boundary_product = table.get(&eta.label, &zeta.label)?.value_f64();
    let (ra, rb) = (eta.reps(), zeta.reps());
    let o = space.basepoint();
    let mut pairs = Vec::new();
    let mut t_of = vec![vec![0.0; rb.len()]; ra.len()];
    for (i, a) in ra.iter().enumerate() {
        for (j, b) in rb.iter().enumerate() {
            let t = t_first_escape(space, a, b, c_eta, max_horizon)?.t;
            t_of[i][j] = t;
            let window = (4.0 * t).max(8.0);
            let params: Vec<M::Scalar> =
                (0..GRID).map(|k| M::Scalar::from_f64(window * (1.0 + k as f64 / (GRID - 1) as f64))).collect();
            let (mut lo, mut hi) = (f64::INFINITY, f64::NEG_INFINITY);
            for s in &params {
                let x = space.ray_point(a, s)?;
                for u in &params {
                    let v = gromov_product(space, &x, &space.ray_point(b, u)?, &o)?.to_f64();
                    lo = lo.min(v);
                    hi = hi.max(v);
                }
            }
            pairs.push(ClaimPair { alpha_rep: i, beta_rep: j, t, window, product_min: lo, product_max: hi });
        }
    }
    let eq_product = pairs.iter().map(|p| (p.product_max - p.t).abs().max((p.t - p.product_min).abs())).fold(0.0, f64::max);
    let mut eq_swap_alpha: f64 = 0.0;
    let mut eq_swap_beta: f64 = 0.0;
    for i in 0..ra.len() {
        for j in 0..rb.len() {
            for i2 in 0..ra.len() {
                eq_swap_alpha = eq_swap_alpha.max((t_of[i][j] - t_of[i2][j]).abs());
            }
            for j2 in 0..rb.len() {
                eq_swap_beta = eq_swap_beta.max((t_of[i][j] - t_of[i][j2]).abs());
            }
        }
    }
    let all_lo = pairs.iter().map(|p| p.product_min).fold(f64::INFINITY, f64::min);
    let all_hi = pairs.iter().map(|p| p.product_max).fold(f64::NEG_INFINITY, f64::max);
    let combined = all_hi - all_lo;
    let k_residual = pairs.iter().map(|p| (p.t - boundary_product).abs()).fold(0.0, f64::max);
    let mut violations = Vec::new();
    for (name, value, factor) in [
        ("product vs T", eq_product, 12.0),
        ("T under a change of alpha", eq_swap_alpha, 13.0),
        ("T under a change of beta", eq_swap_beta, 13.0),
        ("product spread", combined, 50.0),
        ("T vs boundary product", k_residual, K_FACTOR),
    ] {
        if !(value <= factor * c_eta) {
            violations.push(format!("{name}: {value} > {factor} C = {}", factor * c_eta));
        }
    }
    Ok(ClaimReport {
        eta: eta.label.clone(),
        zeta: zeta.label.clone(),
        c_eta,
        c_zeta,
        pairs,
        eq_product,
        eq_swap_alpha,
        eq_swap_beta,
        combined,
        k_residual,
        boundary_product,
        violations,
    })
}

#[derive(Clone, Debug, Serialize)]
pub struct BasisRow {
    pub zeta: String,
    pub r_zeta: f64,
    /// Members of `U(zeta, R_zeta)` that are not in `U(eta, r)`.
    pub escapes: Vec<String>,
}

#[derive(Clone, Debug, Serialize)]
pub struct BasisReport {
    pub eta: String,
    pub r: f64,
    pub r_eta: f64,
    /// `U(eta, R_eta)` within the finite boundary.
    pub neighbourhood: Vec<String>,
    pub rows: Vec<BasisRow>,
    pub passed: bool,
}

/// Instantiates `R_eta = r + 2K_eta + 13C_eta` and, for each `zeta` in
/// `U(eta, R_eta)`, `R_zeta = (zeta . eta)_o + K_eta + K_zeta + 6C_eta + 4C_zeta`,
/// then checks `U(zeta, R_zeta) subset U(eta, r)` over the finite boundary.
/// For `zeta = eta` the product is infinite and `U(eta, inf) = {eta}`.
pub fn neighborhood_basis_check<S: Scalar>(
    table: &ProductTable<S>,
    eta: &str,
    r: f64,
    constants: &dyn Fn(&str) -> Result<f64>,
    tol: f64,
) -> Result<BasisReport> {
    let c_eta = constants(eta)?;
    let r_eta = r + 2.0 * K_FACTOR * c_eta + 13.0 * c_eta;
    let member = |a: &str, b: &str, radius: f64| -> Result<bool> {
        match u_set_membership(table.get(a, b)?, radius, tol) {
            Membership::In => Ok(true),
            Membership::Out => Ok(false),
            Membership::Inconclusive => Err(Error::Inconclusive(format!("product ({a}, {b}) did not converge"))),
        }
    };
    let mut neighbourhood = Vec::new();
    for z in &table.labels {
        if member(eta, z, r_eta)? {
            neighbourhood.push(z.clone());
        }
    }
    let mut rows = Vec::new();
    for z in &neighbourhood {
        let c_zeta = constants(z)?;
        let product = table.get(z, eta)?.value_f64();
        let r_zeta = product + K_FACTOR * (c_eta + c_zeta) + 6.0 * c_eta + 4.0 * c_zeta;
        let mut escapes = Vec::new();
        for xi in &table.labels {
            let inside_zeta = if r_zeta.is_finite() { member(z, xi, r_zeta)? } else { xi == z };
            if inside_zeta && !member(eta, xi, r)? {
                escapes.push(xi.clone());
            }
        }
        rows.push(BasisRow { zeta: z.clone(), r_zeta, escapes });
    }
    let passed = rows.iter().all(|row| row.escapes.is_empty());
    Ok(BasisReport { eta: eta.to_string(), r, r_eta, neighbourhood, rows, passed })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::boundary::{product_table, ProductSchedule};
    use crate::zoo::{build_x, complex_boundary};

    #[test]
    fn basis_check_on_x_with_unit_constants() {
        let x = build_x(6).unwrap();
        let b = complex_boundary(&x).unwrap();
        let t = product_table(&x, &b, &ProductSchedule::default()).unwrap();
        let rep = neighborhood_basis_check(&t, "alpha", 2.0, &|_| Ok(1.0), 0.0).unwrap();
        assert!(rep.passed);
        assert_eq!(rep.neighbourhood, vec!["alpha".to_string()]);
        assert!(neighborhood_basis_check(&t, "alpha", 2.0, &|l| Err(Error::UnknownLabel(l.into())), 0.0).is_err());
    }

    #[test]
    fn identical_alpha_reps_give_zero_swap_residual() {
        let x = build_x(4).unwrap();
        let b = complex_boundary(&x).unwrap();
        let t = product_table(&x, &b, &ProductSchedule::default()).unwrap();
        let mut eta = b[0].clone();
        eta.aux = vec![eta.canonical.clone()];
        let rep = claim_check(&x, &eta, &b[1], 1.0, 1.0, &t, 1e4).unwrap();
        assert_eq!(rep.eq_swap_alpha, 0.0);
    }
}
