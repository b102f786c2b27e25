//! The rate function J(θ, λ, μ) across the phase transition at θ = T_μ(λ).

use spherical_integrals::rate::{rate_integral_form, DEFAULT_QUADRATURE_NODES};
use spherical_integrals::{rate_multi, rate_single, DiscreteMeasure, OutlierSet, Result, ThetaVector};

fn main() -> Result<()> {
    let mu = DiscreteMeasure::new(vec![1.0, 2.0], vec![0.5, 0.5])?;
    let lambda = 3.0;
    let threshold = mu.t_transform(lambda)?.value();
    println!("λ = {lambda}: transition at θ = T_μ(λ) = {threshold}\n");
    println!("{:>6} {:>14} {:>12} {:>12}", "θ", "regime", "J", "∫ log S̃");
    for theta in [0.25, 0.5, 1.0, 1.25, 1.5, 2.0, 3.0] {
        let j = rate_single(theta, lambda, &mu)?;
        let integral = rate_integral_form(theta, lambda, &mu, DEFAULT_QUADRATURE_NODES)
            .map(|v| format!("{v:12.8}"))
            .unwrap_or_else(|_| format!("{:>12}", "-"));
        println!("{theta:>6} {:>14?} {:>12.8} {integral}", j.regime, j.j_value);
    }

    let thetas = ThetaVector::new(vec![1.0, 0.5, -0.5])?;
    let outliers = OutlierSet::new(vec![0.5], vec![2.2, 2.5]);
    let r = rate_multi(&thetas, &outliers, &mu)?;
    println!("\nθ̄ = {:?} with outliers {outliers:?}", thetas.values());
    for c in &r.components {
        println!("  J({}, {}) = {:.8}", c.theta, c.lambda, c.j_value);
    }
    println!("  total {:.8}", r.total);
    Ok(())
}
