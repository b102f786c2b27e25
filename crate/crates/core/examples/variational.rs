//! The rank-one simplex problem: closed form, mirror ascent, and the
//! interlacing change of variables.

use spherical_integrals::variational::{change_of_variables, maximize_simplex, secular_roots, solve_rank1, AscentOptions};
use spherical_integrals::{rate_single, DiscreteMeasure, Result, SimplexPoint};

fn main() -> Result<()> {
    // bulk ½δ₁ + ½δ₂ with an outlier position at 3
    let mu = DiscreteMeasure::new(vec![1.0, 2.0, 3.0], vec![0.5, 0.5, 0.0])?;
    let bulk = mu.without_null_atoms();
    for theta in [0.5, 2.0] {
        let closed = solve_rank1(theta, &mu, true)?;
        let ascent = maximize_simplex(theta, &mu, &AscentOptions::default())?;
        let j = rate_single(theta, 3.0, &bulk)?;
        println!("θ = {theta} ({:?})", closed.regime);
        println!("  γ̄ closed form {:?}", closed.gamma_star.as_slice());
        println!("  γ̄ ascent      {:?}", ascent.gamma_star.as_slice());
        println!("  f = {:.10} / {:.10}, J = {:.10}", closed.f_value, ascent.f_value, j.j_value);
    }

    let atoms = DiscreteMeasure::new(vec![0.5, 1.0, 1.5, 2.0, 3.0], vec![0.0, 0.3, 0.4, 0.3, 0.0])?;
    let gamma = SimplexPoint::normalized(vec![0.1, 0.25, 0.3, 0.25, 0.1])?;
    let (m, k) = (1, 3);
    let chis = secular_roots(&gamma, &atoms, m, k)?;
    let reduced = change_of_variables(&gamma, &chis, &atoms, m, k)?;
    println!("\nsecular roots {chis:?}");
    println!("γ̄ on atoms {:?}: {:?}, b = {:.6}", reduced.kept, reduced.gamma_bar, reduced.b);
    Ok(())
}
