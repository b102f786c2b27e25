//! Naive, Dirichlet and tilted estimators of (1/N) log I_N against the limit.

use spherical_integrals::montecarlo::{
    estimate_in, estimate_in_rank1_dirichlet, estimate_in_tilted, exact_rank1_two_atoms, limit_target, tilted_proposal,
};
use spherical_integrals::{Beta, DiscreteMeasure, Result, SamplingPlan, SpectrumSpec, ThetaVector};

fn main() -> Result<()> {
    let mu = DiscreteMeasure::new(vec![1.0, 2.0], vec![0.5, 0.5])?;
    let spec = SpectrumSpec::new(mu.clone(), 200, Beta::Real);
    let thetas = ThetaVector::new(vec![1.0])?;
    let plan = SamplingPlan::new(32_000, 1);

    let haar = estimate_in(&spec, &thetas, &plan)?;
    let dirichlet = estimate_in_rank1_dirichlet(&spec, 1.0, &plan)?;
    let proposal = tilted_proposal(&spec, 1.0)?;
    let tilted = estimate_in_tilted(&spec, 1.0, &proposal, &plan)?;
    let exact = exact_rank1_two_atoms(&mu, (100, 100), 1.0, Beta::Real, 200)?;
    let limit = limit_target(&spec, &thetas)?;

    println!("N = 200, θ = 1, β = 1");
    for (name, e) in [("haar", &haar), ("dirichlet", &dirichlet), ("tilted", &tilted)] {
        println!("  {name:<10} {:.6} ± {:.6}", e.log_mean_per_n, e.stderr);
    }
    println!("  tilted ESS {:.0} of {}", tilted.ess.unwrap_or(f64::NAN), tilted.n_samples);
    println!("  quadrature {exact:.6}");
    println!("  limit      {limit:.6}");
    Ok(())
}
