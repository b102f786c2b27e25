//! Putting θ on the last coordinate instead of the first: the limit no
//! longer sees the spike.

use spherical_integrals::cli::{asymmetry_report, AsymmetryConfig};
use spherical_integrals::{Beta, DiscreteMeasure, Result, SamplingPlan, SpectrumSpec};

fn main() -> Result<()> {
    for lambda in [2.0, 3.0, 5.0] {
        let spectrum = SpectrumSpec::new(DiscreteMeasure::point_mass(1.0)?, 32, Beta::Real)
            .with_outliers(vec![], vec![lambda]);
        let cfg = AsymmetryConfig { spectrum, sampling: SamplingPlan::new(3200, 5), out: None };
        let r = asymmetry_report(&cfg, None)?;
        println!(
            "λ = {lambda}: a = {:.5} ± {:.5}, b = {:.5}, c = {:.5}, spike: {}",
            r.a.log_mean_per_n, r.a.stderr, r.b, r.c, r.genuine_spike
        );
    }
    Ok(())
}
