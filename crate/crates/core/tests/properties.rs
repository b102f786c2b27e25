use proptest::prelude::*;
use spherical_integrals::montecarlo::{estimate_in, estimate_in_rank1_dirichlet, SamplingPlan};
use spherical_integrals::variational::{
    change_of_variables, maximize_simplex, objective_f, secular_roots, solve_rank1, AscentOptions,
};
use spherical_integrals::{rate_multi, rate_single, Beta, DiscreteMeasure, OutlierSet, SimplexPoint, SpectrumSpec, ThetaVector};

fn measure_from(gaps: &[f64], raw: &[f64], start: f64) -> DiscreteMeasure {
    let mut x = start;
    let atoms: Vec<f64> = gaps
        .iter()
        .map(|g| {
            x += g;
            x
        })
        .collect();
    let s: f64 = raw.iter().sum();
    let mut w: Vec<f64> = raw.iter().map(|r| r / s).collect();
    let rest: f64 = w[1..].iter().sum();
    w[0] = 1.0 - rest;
    DiscreteMeasure::new(atoms, w).unwrap()
}

fn arb_measure(max_atoms: usize) -> impl Strategy<Value = DiscreteMeasure> {
    (2..=max_atoms)
        .prop_flat_map(|n| (prop::collection::vec(0.1f64..1.0, n), prop::collection::vec(0.05f64..1.0, n)))
        .prop_map(|(g, w)| measure_from(&g, &w, 0.2))
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(128))]

    #[test]
    fn closed_form_is_the_supremum(mu in arb_measure(5), theta in -3.0f64..3.0, seed in any::<u64>()) {
        let sol = solve_rank1(theta, &mu, false).unwrap();
        let j = rate_single(theta, if theta >= 0.0 { mu.upper_edge() } else { mu.lower_edge() }, &mu).unwrap();
        prop_assert!((sol.f_value - j.j_value).abs() <= 1e-9 * (1.0 + j.j_value.abs()));
        // no random point of the simplex does better
        let mut s = seed;
        for _ in 0..20 {
            let raw: Vec<f64> = (0..mu.len())
                .map(|_| {
                    s = s.wrapping_mul(6364136223846793005).wrapping_add(1442695040888963407);
                    ((s >> 11) as f64 / (1u64 << 53) as f64) + 1e-3
                })
                .collect();
            let g = SimplexPoint::normalized(raw).unwrap();
            prop_assert!(objective_f(theta, &g, &mu) <= sol.f_value + 1e-12);
        }
    }

    #[test]
    fn ascent_agrees_with_closed_form(mu in arb_measure(4), theta in -2.0f64..2.0) {
        let closed = solve_rank1(theta, &mu, false).unwrap();
        let ascent = maximize_simplex(theta, &mu, &AscentOptions::default()).unwrap();
        prop_assert!((closed.f_value - ascent.f_value).abs() <= 1e-8);
    }

    #[test]
    fn change_of_variables_identities(
        mu in arb_measure(7),
        split in (0usize..7, 0usize..7),
        seed in any::<u64>(),
    ) {
        let n = mu.len();
        let k = 1 + split.0 % n;
        let m = split.1 % k;
        let raw: Vec<f64> = (0..n).map(|i| 0.05 + ((seed >> (i * 8)) & 0xff) as f64 / 255.0).collect();
        let gamma = SimplexPoint::normalized(raw).unwrap();
        let chis = secular_roots(&gamma, &mu, m, k).unwrap();
        prop_assert_eq!(chis.len(), k - 1);
        let reduced = change_of_variables(&gamma, &chis, &mu, m, k).unwrap();
        prop_assert_eq!(reduced.kept.len(), n - k + 1);
        prop_assert!(reduced.gamma_bar.iter().all(|&g| g >= 0.0));
        prop_assert!(reduced.b > 0.0);
    }

    #[test]
    fn secular_roots_solve_the_equation(mu in arb_measure(6), raw in prop::collection::vec(0.01f64..1.0, 6)) {
        let gamma = SimplexPoint::normalized(raw[..mu.len()].to_vec()).unwrap();
        let roots = secular_roots(&gamma, &mu, 1, mu.len().min(3)).unwrap();
        for z in roots {
            let terms: Vec<f64> = gamma.as_slice().iter().zip(mu.atoms()).map(|(g, a)| g * a / (z - a)).collect();
            let scale: f64 = terms.iter().map(|t| t.abs()).sum();
            prop_assert!(terms.iter().sum::<f64>().abs() <= 1e-10 * scale);
        }
    }

    #[test]
    fn rate_multi_pairs_sorted_theta_with_sorted_outliers(a in 0.1f64..3.0, b in 0.1f64..3.0) {
        let mu = DiscreteMeasure::new(vec![1.0, 2.0], vec![0.5, 0.5]).unwrap();
        let out = OutlierSet::new(vec![], vec![2.2, 2.5]);
        let r = rate_multi(&ThetaVector::new(vec![a, b]).unwrap(), &out, &mu).unwrap();
        let (lo, hi) = if a <= b { (a, b) } else { (b, a) };
        let expected = rate_single(hi, 2.5, &mu).unwrap().j_value + rate_single(lo, 2.2, &mu).unwrap().j_value;
        prop_assert!((r.total - expected).abs() <= 1e-12);
    }
}

#[test]
fn estimators_agree_on_rank_one() {
    let mu = DiscreteMeasure::new(vec![0.5, 1.0, 2.0], vec![0.25, 0.5, 0.25]).unwrap();
    for (theta, beta, n, outliers) in [
        (0.7, Beta::Real, 24, vec![]),
        (-0.8, Beta::Complex, 24, vec![]),
        (1.5, Beta::Real, 32, vec![2.5]),
    ] {
        let spec = SpectrumSpec::new(mu.clone(), n, beta).with_outliers(vec![], outliers);
        let plan = SamplingPlan::new(12_800, 31);
        let haar = estimate_in(&spec, &ThetaVector::new(vec![theta]).unwrap(), &plan).unwrap();
        let dir = estimate_in_rank1_dirichlet(&spec, theta, &plan.clone().with_seed(32)).unwrap();
        let sigma = haar.stderr.hypot(dir.stderr);
        assert!(
            (haar.log_mean_per_n - dir.log_mean_per_n).abs() <= 3.0 * sigma,
            "θ = {theta}: {haar:?} vs {dir:?}"
        );
    }
}

#[test]
fn identical_seeds_are_bitwise_identical() {
    let spec = SpectrumSpec::new(DiscreteMeasure::new(vec![1.0, 2.0], vec![0.5, 0.5]).unwrap(), 10, Beta::Complex);
    let th = ThetaVector::new(vec![1.0, -0.5]).unwrap();
    let mut plan = SamplingPlan::new(400, 0).with_batches(4);
    plan.worker_seeds = Some(vec![11, 12, 13, 14]);
    let a = estimate_in(&spec, &th, &plan).unwrap();
    let b = estimate_in(&spec, &th, &plan).unwrap();
    assert_eq!(a.log_mean_per_n.to_bits(), b.log_mean_per_n.to_bits());
    assert_eq!(a.stderr.to_bits(), b.stderr.to_bits());
}
