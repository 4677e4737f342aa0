//! Contraction constants for every boundary point of Xcat0, escape times
//! `T(alpha, beta)` against boundary products, and the neighbourhood-basis
//! condition at `alpha`.

use boundary_lab::boundary::{find, product_table, ProductSchedule};
use boundary_lab::contraction::{c_lookup, c_table, claim_check, neighborhood_basis_check, CTableSettings};
use boundary_lab::zoo::{annulus_boundary, build_xcat0};

fn main() -> boundary_lab::Result<()> {
    let xc = build_xcat0(6)?;
    let boundary = annulus_boundary(&xc)?;
    let constants = c_table(&xc, &boundary, &CTableSettings::default())?;
    for e in &constants {
        println!("C({}) = {:.4}", e.label, e.c);
    }
    let table = product_table(&xc, &boundary, &ProductSchedule::default())?;
    let eta = find(&boundary, "alpha")?;
    for zeta in boundary.iter().filter(|b| b.label != "alpha") {
        let c = (c_lookup(&constants, "alpha")?, c_lookup(&constants, &zeta.label)?);
        let r = claim_check(&xc, eta, zeta, c.0, c.1, &table, 1e7)?;
        let ts: Vec<String> = r.pairs.iter().map(|p| format!("{:.3}", p.t)).collect();
        println!(
            "alpha vs {:<5} T = [{}], product {:.4}, |T - product| = {:.3} C, {}",
            zeta.label,
            ts.join(", "),
            r.boundary_product,
            r.k_residual / c.0,
            if r.passed() { "ok" } else { "violated" }
        );
    }
    let basis = neighborhood_basis_check(&table, "alpha", 1.0, &|l| c_lookup(&constants, l), 1e-9)?;
    println!("basis at alpha: R = {:.2}, neighbourhood {:?}, passed {}", basis.r_eta, basis.neighbourhood, basis.passed);
    Ok(())
}
