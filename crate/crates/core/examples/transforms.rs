//! Stieltjes, T and modified S-transforms of a two-atom measure.

use spherical_integrals::{DiscreteMeasure, Result};

fn main() -> Result<()> {
    let mu = DiscreteMeasure::new(vec![1.0, 2.0], vec![0.5, 0.5])?;
    println!("{:>6} {:>12} {:>12}", "z", "G(z)", "T(z)");
    for z in [0.25, 0.5, 2.5, 3.0, 5.0] {
        println!("{z:>6} {:>12.6} {:>12.6}", mu.stieltjes(z)?.value(), mu.t_transform(z)?.value());
    }
    println!("\n{:>6} {:>12} {:>12}", "θ", "T⁻¹(θ)", "S̃(θ)");
    for theta in [-3.0, -1.0, -0.5, 0.5, 1.0, 3.0] {
        println!("{theta:>6} {:>12.6} {:>12.6}", mu.t_inverse(theta)?, mu.s_tilde(theta)?);
    }
    println!("\nS̃(0) = {} (mean), S̃(−1) = {} (harmonic mean)", mu.s_tilde(0.0)?, mu.s_tilde(-1.0)?);
    Ok(())
}
