//! Closed-form distances in the universal cover of the punctured plane,
//! compared with shortest paths on a log-polar grid.
//!
//! Set `BOUNDARY_LAB_CACHE` to a directory to reuse grids between runs.

use boundary_lab::annulus::kernel::ann_distance;
use boundary_lab::annulus::mesh::{MeshOracle, MeshWindow};
use boundary_lab::annulus::Polar;

fn main() -> boundary_lab::Result<()> {
    let window = MeshWindow { t: (-10.0, 10.0), r: (1.0, 20.0) };
    let oracle = MeshOracle::new(window, 0.02)?.with_env_cache();
    println!("grid nodes: {}", oracle.node_count());
    let source = oracle.node_near(Polar { t: 0.0, r: 2.0 })?;
    let targets: Vec<Polar> = [(1.0, 2.0), (3.0, 2.0), (3.2, 5.0), (6.0, 1.5), (-4.0, 10.0), (0.0, 12.0)]
        .into_iter()
        .map(|(t, r)| oracle.node_near(Polar { t, r }))
        .collect::<boundary_lab::Result<_>>()?;
    println!("{:>8} {:>8} {:>12} {:>12} {:>8}", "t", "r", "kernel", "grid", "rel err");
    for (p, m) in targets.iter().zip(oracle.distances_from(source, &targets)?) {
        let d = ann_distance(source, *p)?;
        println!("{:>8.3} {:>8.3} {:>12.6} {:>12.6} {:>7.3}%", p.t, p.r, d, m.value, 100.0 * (m.value - d).abs() / d);
    }
    Ok(())
}
