//! Sampled contraction profiles: `alpha` in X has projections that grow like
//! `log R`, while `alpha` in the CAT(0) model has a bounded profile.

use boundary_lab::annulus::{AnnulusPairSampler, AnnulusPointSampler};
use boundary_lab::complex::ComplexPairSampler;
use boundary_lab::contraction::{alpha_log_witnesses, contraction_profile, strong_contraction_constant, StrongContraction};
use boundary_lab::zoo::{build_x, build_xcat0};

fn main() -> boundary_lab::Result<()> {
    let x = build_x(16)?;
    let alpha = x.rc_ray("alpha")?;
    let witnesses = alpha_log_witnesses(&x, 1..=16)?;
    let sampler = ComplexPairSampler::new(&x, 1024.0);
    let p = contraction_profile(&x, &alpha, &sampler, 1500, 11, 0.0, &witnesses)?;
    println!("alpha in X(16): {:?}", p.classification);
    for bin in &p.bins {
        println!("  R >= {:>7}: max diameter {:>5.1} over {} pairs", bin.radius_lo, bin.max_diameter, bin.count);
    }
    if let StrongContraction::NotStrong { witness, slope } = strong_contraction_constant(&p)? {
        println!("  not strongly contracting: slope {slope:.3}, diameter {} at radius {:.0}", witness.diameter, witness.radius);
    }

    let xc = build_xcat0(8)?;
    let points = AnnulusPointSampler::new(&xc, (-10.0, 40.0), (1.0 / 64.0, 4096.0));
    let pairs = AnnulusPairSampler::new(points, 1e-9);
    let p = contraction_profile(&xc, &xc.alpha(), &pairs, 1500, 11, 1e-9, &[])?;
    println!("\nalpha in Xcat0(8): {:?}, max diameter {:.4}", p.classification, p.max_diameter());
    println!("  strong contraction: {:?}", strong_contraction_constant(&p));
    Ok(())
}
