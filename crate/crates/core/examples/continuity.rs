//! The identity on labels between the boundaries of X and Y (and of their
//! CAT(0) models) tested for continuity at `alpha` along `g_3, g_4, ...`.

use boundary_lab::boundary::{boundary_map_continuity_test, matching_labels, product_table, ProductSchedule, ProductTable};
use boundary_lab::zoo::{annulus_boundary, build_x, build_xcat0, build_y, build_ycat0, complex_boundary};
use boundary_lab::Scalar;

fn report<A: Scalar, B: Scalar>(name: &str, up: &ProductTable<A>, down: &ProductTable<B>, n: i64) -> boundary_lab::Result<()> {
    let seq: Vec<String> = (3..=n).map(|i| format!("g{i}")).collect();
    let rep = boundary_map_continuity_test(&matching_labels(up, down), up, down, &seq, "alpha", &[1.0, 2.0, 4.0], &[1.0], 1e-9)?;
    println!("{name}: upstream converges {}, verdict {:?}", rep.upstream.converges, rep.verdict);
    if let Some(c) = &rep.certificate {
        let images: Vec<String> = c.outside.iter().map(|t| format!("{}:{:.3}", t.image, t.product)).collect();
        println!("  outside U(alpha, {}) downstream: {}", c.r, images.join(" "));
    }
    Ok(())
}

fn main() -> boundary_lab::Result<()> {
    let s = ProductSchedule::default();
    let (x, y) = (build_x(10)?, build_y(10)?);
    let (tx, ty) = (product_table(&x, &complex_boundary(&x)?, &s)?, product_table(&y, &complex_boundary(&y)?, &s)?);
    report("X -> Y", &tx, &ty, 10)?;
    report("Y -> X", &ty, &tx, 10)?;
    let (xc, yc) = (build_xcat0(8)?, build_ycat0(8)?);
    let (txc, tyc) = (product_table(&xc, &annulus_boundary(&xc)?, &s)?, product_table(&yc, &annulus_boundary(&yc)?, &s)?);
    report("Xcat0 -> Ycat0", &txc, &tyc, 8)?;
    Ok(())
}
