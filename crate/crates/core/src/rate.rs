//! The limiting rate function `J(θ, λ, μ)` and its multi-component pairing.
//!
//! For `θ ≠ 0, −1`,
//!
//! ```text
//! J(θ, λ, μ) = (θ+1) log c − log|θ| − ∫ log|(θ+1)/θ · c − x| dμ(x)
//! ```
//!
//! where `c = θλ/(θ+1)` when `θ` lies strictly beyond `T_μ(λ)` (the outlier
//! pulls the tilt, [`Regime::StuckToEdge`]) and `c = S̃_μ(θ)` otherwise
//! ([`Regime::STransform`]). `J(0, ·, ·) = 0` and `J(−1, λ, μ) = −∫ log x dμ`.
//!
//! The limit of `(1/N) log I_N(θ̄, X_N)` is `(β/2) Σ_i J(θ_σ(i), λ_i, μ)`;
//! nothing here applies the `β/2` factor.

use serde::{Deserialize, Serialize};

use crate::measure::{DiscreteMeasure, TransformValue, EDGE_RTOL};
use crate::quadrature::integrate_gauss_legendre;
use crate::{Error, Result};

/// Default node count for [`rate_integral_form`].
pub const DEFAULT_QUADRATURE_NODES: usize = 64;

/// The argument `θ̄ = (θ_1, …, θ_k)` with its ascending sort permutation.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "Vec<f64>", into = "Vec<f64>")]
pub struct ThetaVector {
    values: Vec<f64>,
    sigma: Vec<usize>,
}

impl TryFrom<Vec<f64>> for ThetaVector {
    type Error = Error;

    fn try_from(values: Vec<f64>) -> Result<Self> {
        ThetaVector::new(values)
    }
}

impl From<ThetaVector> for Vec<f64> {
    fn from(t: ThetaVector) -> Self {
        t.values
    }
}

impl ThetaVector {
    pub fn new(values: Vec<f64>) -> Result<Self> {
        if values.iter().any(|v| !v.is_finite()) {
            return Err(Error::Domain("θ entries must be finite".into()));
        }
        let mut sigma: Vec<usize> = (0..values.len()).collect();
        // stable: ties keep their original order
        sigma.sort_by(|&a, &b| values[a].total_cmp(&values[b]));
        Ok(Self { values, sigma })
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    pub fn len(&self) -> usize {
        self.values.len()
    }

    pub fn is_empty(&self) -> bool {
        self.values.is_empty()
    }

    /// Permutation sorting the entries ascending (0-based indices).
    pub fn sigma(&self) -> &[usize] {
        &self.sigma
    }

    /// Number of nonpositive entries.
    pub fn m(&self) -> usize {
        self.values.iter().filter(|&&v| v <= 0.0).count()
    }

    pub fn negative_count(&self) -> usize {
        self.values.iter().filter(|&&v| v < 0.0).count()
    }

    /// `θ̃ = (θ_2, …, θ_k)`.
    pub fn tail(&self) -> ThetaVector {
        ThetaVector::new(self.values.get(1..).unwrap_or_default().to_vec()).expect("finite entries")
    }

    pub fn scaled(&self, factor: f64) -> ThetaVector {
        ThetaVector::new(self.values.iter().map(|v| v * factor).collect()).expect("finite entries")
    }
}

/// Limits of the extremal eigenvalues that pair with the θ components.
#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct OutlierSet {
    /// `λ_1 ≤ … ≤ λ_m`, each at most `l(μ)`.
    #[serde(default)]
    pub lower: Vec<f64>,
    /// `λ_{m+1} ≤ … ≤ λ_k`, each at least `r(μ)`.
    #[serde(default)]
    pub upper: Vec<f64>,
}

impl OutlierSet {
    pub fn new(lower: Vec<f64>, upper: Vec<f64>) -> Self {
        Self { lower, upper }
    }

    pub fn len(&self) -> usize {
        self.lower.len() + self.upper.len()
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    /// Outliers stuck to the support edges: negative θ entries pair with
    /// `l(μ)`, the others with `r(μ)`.
    pub fn at_edges(thetas: &ThetaVector, mu: &DiscreteMeasure) -> Self {
        let neg = thetas.negative_count();
        Self {
            lower: vec![mu.lower_edge(); neg],
            upper: vec![mu.upper_edge(); thetas.len() - neg],
        }
    }

    pub fn validate(&self, mu: &DiscreteMeasure) -> Result<()> {
        let (l, r) = (mu.lower_edge(), mu.upper_edge());
        let all = self.lower.iter().chain(&self.upper);
        if all.clone().any(|&x| !(x > 0.0 && x.is_finite())) {
            return Err(Error::Domain("outliers must be finite and > 0".into()));
        }
        if self.lower.windows(2).any(|w| w[0] > w[1]) || self.upper.windows(2).any(|w| w[0] > w[1]) {
            return Err(Error::Domain("outlier lists must be sorted ascending".into()));
        }
        if self.lower.iter().any(|&x| x > l * (1.0 + EDGE_RTOL)) {
            return Err(Error::Domain(format!("lower outliers must not exceed l(μ) = {l}")));
        }
        if self.upper.iter().any(|&x| x < r * (1.0 - EDGE_RTOL)) {
            return Err(Error::Domain(format!("upper outliers must be at least r(μ) = {r}")));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "SCREAMING_SNAKE_CASE")]
pub enum Regime {
    /// `c = θλ/(θ+1)`: the paired outlier is far enough to pin the tilt.
    StuckToEdge,
    /// `c = S̃_μ(θ)`: the value does not depend on `λ`.
    STransform,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RateComponent {
    pub theta: f64,
    pub lambda: f64,
    pub c: f64,
    /// `d = (θ+1)c/θ`; absent at `θ = 0` where it diverges.
    pub d: Option<f64>,
    pub regime: Regime,
    pub j_value: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RateResult {
    pub total: f64,
    pub components: Vec<RateComponent>,
}

fn check_domain(theta: f64, lambda: f64, mu: &DiscreteMeasure) -> Result<()> {
    if !theta.is_finite() {
        return Err(Error::Domain(format!("θ = {theta} is not finite")));
    }
    if !(lambda > 0.0 && lambda.is_finite()) {
        return Err(Error::Domain(format!("λ = {lambda} must be finite and > 0")));
    }
    if theta > 0.0 && lambda < mu.upper_edge() * (1.0 - EDGE_RTOL) {
        return Err(Error::Domain(format!(
            "θ = {theta} > 0 needs λ ≥ r(μ) = {}, got {lambda}",
            mu.upper_edge()
        )));
    }
    if theta < 0.0 && lambda > mu.lower_edge() * (1.0 + EDGE_RTOL) {
        return Err(Error::Domain(format!(
            "θ = {theta} < 0 needs λ ≤ l(μ) = {}, got {lambda}",
            mu.lower_edge()
        )));
    }
    Ok(())
}

/// Which branch of the dichotomy applies; `θ = T_μ(λ)` counts as S-transform
/// (both formulas agree there).
pub fn regime(theta: f64, lambda: f64, mu: &DiscreteMeasure) -> Result<Regime> {
    check_domain(theta, lambda, mu)?;
    if theta == 0.0 {
        return Ok(Regime::STransform);
    }
    Ok(match mu.t_transform(lambda)? {
        TransformValue::Finite(t) if (theta > 0.0 && t < theta) || (theta < 0.0 && t > theta) => Regime::StuckToEdge,
        _ => Regime::STransform,
    })
}

/// `J(θ, λ, μ)` with its intermediate quantities.
pub fn rate_single(theta: f64, lambda: f64, mu: &DiscreteMeasure) -> Result<RateComponent> {
    let regime = regime(theta, lambda, mu)?;
    if theta == 0.0 {
        return Ok(RateComponent { theta, lambda, c: mu.mean(), d: None, regime, j_value: 0.0 });
    }
    if theta == -1.0 {
        return Ok(RateComponent {
            theta,
            lambda,
            c: mu.harmonic_mean(),
            d: Some(0.0),
            regime,
            j_value: -mu.log_moment(),
        });
    }
    let (c, d, j_value) = match regime {
        Regime::StuckToEdge => {
            let c = theta * lambda / (theta + 1.0);
            let j = (theta + 1.0) * c.ln() - theta.abs().ln() - mu.log_potential(lambda)?;
            (c, lambda, j)
        }
        Regime::STransform if mu.is_point_mass() => {
            // S̃ ≡ c0, so J = ∫_0^θ log c0 = θ log c0.
            let c0 = mu.upper_edge();
            (c0, (theta + 1.0) * c0 / theta, theta * c0.ln())
        }
        Regime::STransform => {
            let inv = mu.t_inverse_detail(theta)?;
            let c = inv.s_tilde(theta);
            let j = (theta + 1.0) * c.ln() - theta.abs().ln() - mu.log_potential_at(&inv);
            (c, inv.z, j)
        }
    };
    Ok(RateComponent { theta, lambda, c, d: Some(d), regime, j_value })
}

/// `∫_0^θ log S̃_μ(t) dt` by Gauss–Legendre quadrature; valid in the
/// S-transform regime, where it equals [`rate_single`].
pub fn rate_integral_form(theta: f64, lambda: f64, mu: &DiscreteMeasure, n_points: usize) -> Result<f64> {
    if regime(theta, lambda, mu)? != Regime::STransform {
        return Err(Error::Domain(format!(
            "θ = {theta} lies beyond T_μ(λ) for λ = {lambda}; the integral form does not apply"
        )));
    }
    if theta == 0.0 {
        return Ok(0.0);
    }
    if n_points == 0 {
        return Err(Error::Domain("quadrature needs at least one node".into()));
    }
    let mut failure = None;
    let value = integrate_gauss_legendre(
        |t| match mu.s_tilde(t) {
            Ok(s) => s.ln(),
            Err(e) => {
                failure.get_or_insert(e);
                f64::NAN
            }
        },
        0.0,
        theta,
        n_points,
    );
    match failure {
        Some(e) => Err(e),
        None => Ok(value),
    }
}

/// `Σ_i J(θ_σ(i), λ_i, μ)`: the j-th smallest θ pairs with the j-th entry of
/// `outliers.lower`, and the remaining θ (ascending) pair with
/// `outliers.upper` (ascending), so the largest θ meets the largest outlier.
///
/// Zero entries may sit on either side; the lower list length must lie
/// between the number of negative and of nonpositive entries.
pub fn rate_multi(thetas: &ThetaVector, outliers: &OutlierSet, mu: &DiscreteMeasure) -> Result<RateResult> {
    if outliers.len() != thetas.len() {
        return Err(Error::Domain(format!(
            "{} outliers for {} θ components",
            outliers.len(),
            thetas.len()
        )));
    }
    let m = outliers.lower.len();
    if m < thetas.negative_count() || m > thetas.m() {
        return Err(Error::Domain(format!(
            "{m} lower outliers cannot pair with {} negative and {} nonpositive θ entries",
            thetas.negative_count(),
            thetas.m()
        )));
    }
    outliers.validate(mu)?;
    let components = thetas
        .sigma()
        .iter()
        .enumerate()
        .map(|(rank, &i)| {
            let lambda = if rank < m { outliers.lower[rank] } else { outliers.upper[rank - m] };
            rate_single(thetas.values()[i], lambda, mu)
        })
        .collect::<Result<Vec<_>>>()?;
    let total = components.iter().map(|c| c.j_value).sum();
    Ok(RateResult { total, components })
}

/// Right-hand sides of the two Lipschitz estimates on `θ ≥ 0`:
/// `|J(θ,λ) − J(θ,λ′)| ≤ θ |ln λ − ln λ′|` and
/// `|J(θ,λ) − J(θ′,λ)| ≤ ln λ · |θ − θ′|`.
///
/// The second needs `c ≥ 1/λ`; since `c ≥ mean(μ)` for `θ ≥ 0`, this is
/// enforced as `mean(μ) · λ ≥ 1`.
pub fn continuity_bounds(
    theta: f64,
    theta2: f64,
    lambda: f64,
    lambda2: f64,
    mu: &DiscreteMeasure,
) -> Result<(f64, f64)> {
    if theta < 0.0 || theta2 < 0.0 {
        return Err(Error::Domain("continuity bounds are stated for θ ≥ 0".into()));
    }
    // both λ must sit at or above r(μ) even when θ = 0
    for &l in &[lambda, lambda2] {
        check_domain(1.0, l, mu)?;
    }
    check_domain(theta, lambda, mu)?;
    check_domain(theta2, lambda2, mu)?;
    if mu.mean() * lambda < 1.0 {
        return Err(Error::Domain(format!(
            "θ-bound needs mean(μ)·λ ≥ 1, got {}",
            mu.mean() * lambda
        )));
    }
    let bound_lambda = theta * (lambda.ln() - lambda2.ln()).abs();
    let bound_theta = lambda.ln() * (theta - theta2).abs();
    Ok((bound_lambda, bound_theta))
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_abs_diff_eq;
    use proptest::prelude::*;

    fn two_atoms() -> DiscreteMeasure {
        DiscreteMeasure::new(vec![1.0, 2.0], vec![0.5, 0.5]).unwrap()
    }

    /// J(1, 2, ½δ1+½δ2) from the closed-form root of z² − 4.5z + 4 = 0.
    fn j_two_atoms_oracle() -> f64 {
        let d = (4.5 + 4.25f64.sqrt()) / 2.0;
        let c = d / 2.0;
        2.0 * c.ln() - 0.5 * (d - 1.0).ln() - 0.5 * (d - 2.0).ln()
    }

    #[test]
    fn rate_single_examples() {
        assert_eq!(rate_single(0.0, 5.0, &two_atoms()).unwrap().j_value, 0.0);
        let d3 = DiscreteMeasure::point_mass(3.0).unwrap();
        assert_abs_diff_eq!(rate_single(2.0, 3.0, &d3).unwrap().j_value, 2.0 * 3f64.ln(), epsilon = 1e-12);

        let r = rate_single(1.0, 2.0, &two_atoms()).unwrap();
        assert_abs_diff_eq!(r.j_value, j_two_atoms_oracle(), epsilon = 1e-13);
        assert_abs_diff_eq!(r.j_value, 0.45388, epsilon = 1e-5);
        assert_eq!(r.regime, Regime::STransform);

        let d1 = DiscreteMeasure::point_mass(1.0).unwrap();
        assert_eq!(rate_single(-1.0, 0.5, &d1).unwrap().j_value, 0.0);
    }

    #[test]
    fn rate_single_rejects_wrong_side() {
        assert!(matches!(rate_single(1.0, 1.5, &two_atoms()), Err(Error::Domain(_))));
        assert!(matches!(rate_single(-1.0, 1.5, &two_atoms()), Err(Error::Domain(_))));
        assert!(matches!(rate_single(1.0, -2.0, &two_atoms()), Err(Error::Domain(_))));
    }

    #[test]
    fn stuck_regime_generic_formula() {
        // λ = 3 above r = 2: T(3) = 1.25 so θ = 2 is stuck, θ = 1 is not.
        let mu = two_atoms();
        let r = rate_single(2.0, 3.0, &mu).unwrap();
        assert_eq!(r.regime, Regime::StuckToEdge);
        let c = 2.0 * 3.0 / 3.0;
        let expected = 3.0 * f64::ln(c) - f64::ln(2.0) - 0.5 * f64::ln(2.0) - 0.5 * f64::ln(1.0);
        assert_abs_diff_eq!(r.j_value, expected, epsilon = 1e-14);
        assert_eq!(rate_single(1.0, 3.0, &mu).unwrap().regime, Regime::STransform);
    }

    #[test]
    fn integral_form_examples() {
        assert_eq!(rate_integral_form(0.0, 2.0, &two_atoms(), 64).unwrap(), 0.0);
        let v = rate_integral_form(1.0, 2.0, &two_atoms(), 64).unwrap();
        assert_abs_diff_eq!(v, j_two_atoms_oracle(), epsilon = 1e-8);
        let d = DiscreteMeasure::point_mass(2.5).unwrap();
        assert_abs_diff_eq!(rate_integral_form(1.7, 2.5, &d, 16).unwrap(), 1.7 * 2.5f64.ln(), epsilon = 1e-14);
        assert!(matches!(rate_integral_form(2.0, 3.0, &two_atoms(), 64), Err(Error::Domain(_))));
    }

    #[test]
    fn rate_multi_examples() {
        let mu = two_atoms();
        let one = rate_multi(&ThetaVector::new(vec![1.0]).unwrap(), &OutlierSet::new(vec![], vec![2.0]), &mu).unwrap();
        assert_abs_diff_eq!(one.total, j_two_atoms_oracle(), epsilon = 1e-13);
        let two = rate_multi(
            &ThetaVector::new(vec![1.0, 1.0]).unwrap(),
            &OutlierSet::new(vec![], vec![2.0, 2.0]),
            &mu,
        )
        .unwrap();
        assert_abs_diff_eq!(two.total, 2.0 * j_two_atoms_oracle(), epsilon = 1e-13);
        let zeros = ThetaVector::new(vec![0.0; 3]).unwrap();
        assert_eq!(rate_multi(&zeros, &OutlierSet::new(vec![0.5, 1.0], vec![9.0]), &mu).unwrap().total, 0.0);
        assert_eq!(rate_multi(&zeros, &OutlierSet::new(vec![], vec![2.0; 3]), &mu).unwrap().total, 0.0);
    }

    #[test]
    fn rate_multi_pairs_extremes() {
        let mu = two_atoms();
        let thetas = ThetaVector::new(vec![0.5, -0.3, 1.0, -2.0]).unwrap();
        let out = OutlierSet::new(vec![0.4, 0.9], vec![2.2, 2.5]);
        let r = rate_multi(&thetas, &out, &mu).unwrap();
        let pairs: Vec<(f64, f64)> = r.components.iter().map(|c| (c.theta, c.lambda)).collect();
        assert_eq!(pairs, vec![(-2.0, 0.4), (-0.3, 0.9), (0.5, 2.2), (1.0, 2.5)]);
        assert!(rate_multi(&thetas, &OutlierSet::new(vec![0.4], vec![2.0, 2.2, 2.5]), &mu).is_err());
        assert!(rate_multi(&thetas, &OutlierSet::new(vec![0.9, 0.4], vec![2.2, 2.5]), &mu).is_err());
    }

    #[test]
    fn theta_vector_sort_is_stable() {
        let t = ThetaVector::new(vec![1.0, -1.0, 1.0, 0.0, -1.0]).unwrap();
        assert_eq!(t.sigma(), &[1, 4, 3, 0, 2]);
        assert_eq!(t.m(), 3);
        assert_eq!(t.negative_count(), 2);
    }

    #[test]
    fn continuity_bound_examples() {
        let mu = two_atoms();
        let (bl, bt) = continuity_bounds(1.0, 1.1, 2.0, 2.0, &mu).unwrap();
        assert_eq!(bl, 0.0);
        assert_abs_diff_eq!(bt, 0.1 * 2f64.ln(), epsilon = 1e-15);
        let (bl, bt) = continuity_bounds(0.0, 0.0, 2.0, 3.0, &mu).unwrap();
        assert_eq!((bl, bt), (0.0, 0.0));
        assert!(continuity_bounds(-1.0, 0.0, 2.0, 2.0, &mu).is_err());
    }

    #[test]
    fn asymmetry_identity() {
        for (atoms, weights, lambda) in [
            (vec![1.0, 2.0], vec![0.5, 0.5], 3.0),
            (vec![0.3, 0.9, 4.0], vec![0.2, 0.3, 0.5], 4.0),
        ] {
            let mu = DiscreteMeasure::new(atoms, weights).unwrap();
            let inv = mu.pushforward_inverse().unwrap();
            let j = rate_single(-1.0, 1.0 / lambda, &inv).unwrap().j_value;
            assert!((j - mu.log_moment()).abs() <= 1e-10);
        }
    }

    fn arb_measure() -> impl Strategy<Value = DiscreteMeasure> {
        (1usize..6)
            .prop_flat_map(|n| (prop::collection::vec(0.05f64..1.0, n), prop::collection::vec(0.05f64..1.0, n)))
            .prop_map(|(gaps, raw)| {
                let mut x = 0.2;
                let atoms: Vec<f64> = gaps.iter().map(|g| { x += g; x }).collect();
                let s: f64 = raw.iter().sum();
                let mut weights: Vec<f64> = raw.iter().map(|w| w / s).collect();
                let fix: f64 = weights[1..].iter().sum();
                weights[0] = 1.0 - fix;
                DiscreteMeasure::new(atoms, weights).unwrap()
            })
    }

    proptest! {
        #[test]
        fn continuous_across_regime_boundary(mu in arb_measure(), stretch in 1.05f64..3.0) {
            let lambda = mu.upper_edge() * stretch;
            let t = mu.t_transform(lambda).unwrap().value();
            let a = rate_single(t + 1e-7, lambda, &mu).unwrap().j_value;
            let b = rate_single(t - 1e-7, lambda, &mu).unwrap().j_value;
            prop_assert!((a - b).abs() <= 1e-5);
        }

        #[test]
        fn theta_derivative_is_log_s_tilde(mu in arb_measure(), theta in -4.0f64..4.0) {
            prop_assume!(theta.abs() > 1e-3 && (theta + 1.0).abs() > 1e-3);
            let lambda = if theta > 0.0 { mu.upper_edge() } else { mu.lower_edge() };
            let h = 1e-5;
            let fd = (rate_single(theta + h, lambda, &mu).unwrap().j_value
                - rate_single(theta - h, lambda, &mu).unwrap().j_value) / (2.0 * h);
            prop_assert!((fd - mu.s_tilde(theta).unwrap().ln()).abs() <= 1e-6);
        }

        #[test]
        fn lambda_independent_inside_regime(mu in arb_measure(), s1 in 1.0f64..2.0, s2 in 0.0f64..2.0, frac in 0.01f64..0.99) {
            let l1 = mu.upper_edge() * s1;
            let l2 = l1 * (1.0 + s2);
            let t2 = mu.t_transform(l2).unwrap().value().min(50.0);
            let theta = frac * t2;
            prop_assert_eq!(rate_single(theta, l1, &mu).unwrap().j_value, rate_single(theta, l2, &mu).unwrap().j_value);
        }

        #[test]
        fn monotone_and_lipschitz_in_lambda(mu in arb_measure(), theta in 0.0f64..5.0, s1 in 1.0f64..3.0, s2 in 0.0f64..1.0) {
            let l1 = mu.upper_edge() * s1;
            let l2 = l1 * (1.0 + s2);
            let j1 = rate_single(theta, l1, &mu).unwrap().j_value;
            let j2 = rate_single(theta, l2, &mu).unwrap().j_value;
            prop_assert!(j2 >= j1 - 1e-12);
            prop_assert!(j2 - j1 <= theta * (l2.ln() - l1.ln()) + 1e-12);
        }
    }
}
