//! β = 2 spherical integrals at a signature equal normalized Schur polynomials.

use spherical_integrals::montecarlo::{estimate_in_eigs, jitter_distinct, schur_oracle, signature_from_thetas};
use spherical_integrals::randmat::build_spectrum;
use spherical_integrals::{Beta, DiscreteMeasure, Result, SamplingPlan, SpectrumSpec, ThetaVector};

fn main() -> Result<()> {
    let n = 12;
    let spec = SpectrumSpec::new(DiscreteMeasure::new(vec![1.0, 2.0], vec![0.5, 0.5])?, n, Beta::Complex);
    let eigs = jitter_distinct(&build_spectrum(&spec)?, 0.01);
    for values in [vec![1.0], vec![1.0, 0.5], vec![2.0, 1.0, 0.5]] {
        let thetas = ThetaVector::new(values)?;
        let kappa = signature_from_thetas(&thetas, n)?;
        let exact = schur_oracle(&eigs, &kappa)?;
        let mc = estimate_in_eigs(&eigs, Beta::Complex, &thetas, &SamplingPlan::new(32_000, 3))?;
        println!(
            "κ = {:?}: exact {exact:.6}, MC {:.6} ± {:.6}",
            &kappa[..thetas.len()],
            mc.log_mean_per_n,
            mc.stderr
        );
    }
    Ok(())
}
