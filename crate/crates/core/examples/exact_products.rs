//! Exact distances and Gromov products in the ray complex X, and the
//! boundary product table computed from them.

use boundary_lab::boundary::{product_table, ProductSchedule};
use boundary_lab::scalar::q;
use boundary_lab::zoo::{build_x, complex_boundary};
use boundary_lab::{gromov_product, MetricSpace};

fn main() -> boundary_lab::Result<()> {
    let x = build_x(16)?;
    let o = x.basepoint();
    let g3 = x.point("g3", q(0))?;
    let a3 = x.point("alpha", q(3))?;
    println!("d(g3(0), alpha(3)) = {}", x.distance(&g3, &a3)?);
    let geo = x.rc_geodesic(&g3, &x.point("beta", q(5))?)?;
    println!("geodesic g3(0) -> beta(5): length {}, {} legs", geo.distance, geo.legs.len());
    for i in [1, 4, 9, 16] {
        let gi = x.point(&format!("g{i}"), q(1))?;
        let p = gromov_product(&x, &x.point("alpha", q(40_000))?, &gi, &o)?;
        println!("(alpha(40000) . g{i}(1))_o = {p}");
    }

    let small = build_x(6)?;
    let table = product_table(&small, &complex_boundary(&small)?, &ProductSchedule::default())?;
    println!("\nboundary products in X(6):");
    for row in table.matrix() {
        let cells: Vec<String> = row.iter().map(ToString::to_string).collect();
        println!("  {}", cells.join("\t"));
    }
    println!("labels: {}", table.labels.join(" "));
    Ok(())
}
