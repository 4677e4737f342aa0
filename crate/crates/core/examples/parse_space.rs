//! The space description language: a small family with a `repeat` block,
//! its canonical form, and a diagnostic for a broken file.

use boundary_lab::scalar::q;
use boundary_lab::zoo::dsl;
use boundary_lab::MetricSpace;

const LADDER: &str = "
ray spine
base spine:0
repeat i=1..4 {
  seg rung{i} 2*i
  ray leaf{i}
  glue rung{i}:0 spine:i
  glue rung{i}:2*i leaf{i}:0
}
";

fn main() -> boundary_lab::Result<()> {
    let space = dsl::compile_str(LADDER)?;
    println!("{} edges, {} vertices", space.edge_count(), space.vertex_count());
    println!("{}", dsl::serialize(&space));
    let far = space.point("leaf4", q(1))?;
    println!("d(base, leaf4(1)) = {}", space.distance(&space.basepoint(), &far)?);

    match dsl::compile_str("ray a\nbase a:0\nseg s 0\nglue s:0 a:1\n") {
        Ok(_) => println!("unexpectedly valid"),
        Err(d) => println!("diagnostic: {d}"),
    }
    Ok(())
}
