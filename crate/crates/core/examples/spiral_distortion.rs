//! Empirical quasi-isometry constants of the logarithmic spiral map between
//! the CAT(0) models, bucketed by scale.

use boundary_lab::annulus::spiral::SpiralMap;
use boundary_lab::annulus::AnnulusPointSampler;
use boundary_lab::distortion::qi_distortion_estimate;
use boundary_lab::zoo::{build_xcat0, build_ycat0};

fn main() -> boundary_lab::Result<()> {
    let (xc, yc) = (build_xcat0(10)?, build_ycat0(10)?);
    let map = SpiralMap::new(&xc, &yc);
    let sampler = AnnulusPointSampler::new(&xc, (-10.0, 20.0), (1.0 / 64.0, 4096.0));
    let rep = qi_distortion_estimate(&map, &xc, &yc, &sampler, 2000, 1.0, 5)?;
    println!("lambda = {:.4}, epsilon = {:.4} over {} pairs", rep.lambda, rep.epsilon, rep.pairs);
    for b in &rep.buckets {
        println!("  scale 2^{:<2} {:>4} pairs, ratio in [{:.3}, {:.3}]", b.scale, b.count, b.min_ratio, b.max_ratio);
    }
    let back = qi_distortion_estimate(&map.inverse(), &yc, &xc, &AnnulusPointSampler::new(&yc, (-10.0, 20.0), (1.0 / 64.0, 4096.0)), 2000, 1.0, 6)?;
    println!("inverse: lambda = {:.4}, epsilon = {:.4}", back.lambda, back.epsilon);
    Ok(())
}
