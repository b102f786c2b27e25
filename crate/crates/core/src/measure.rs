//! Atomic probability measures on the positive half-line and their transforms.
//!
//! For `μ = Σ α_i δ_{μ_i}` this module evaluates
//!
//! * the Stieltjes transform `G(z) = Σ α_i / (z − μ_i)`,
//! * the T-transform `T(z) = z G(z) − 1 = Σ α_i μ_i / (z − μ_i)`,
//! * the inverse of `T` on either side of the support,
//! * the modified S-transform `S̃(θ) = θ/(θ+1) · T⁻¹(θ)`,
//!   extended by the mean at `θ = 0` and the harmonic mean at `θ = −1`,
//! * the log-potential `∫ log|d − x| dμ(x)`.
//!
//! Support edges `l(μ)`, `r(μ)` are the smallest and largest atoms carrying
//! positive mass. Zero-weight atoms are allowed; they are ignored by every
//! transform.

use serde::{Deserialize, Serialize};

use crate::{Error, Result};

/// Relative tolerance used when comparing a point with a support edge.
pub const EDGE_RTOL: f64 = 1e-12;
const WEIGHT_SUM_TOL: f64 = 1e-12;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "MeasureRepr")]
pub struct DiscreteMeasure {
    atoms: Vec<f64>,
    weights: Vec<f64>,
}

#[derive(Deserialize)]
#[serde(deny_unknown_fields)]
struct MeasureRepr {
    atoms: Vec<f64>,
    weights: Vec<f64>,
}

impl TryFrom<MeasureRepr> for DiscreteMeasure {
    type Error = Error;

    fn try_from(r: MeasureRepr) -> Result<Self> {
        DiscreteMeasure::new(r.atoms, r.weights)
    }
}

impl DiscreteMeasure {
    pub fn new(atoms: Vec<f64>, weights: Vec<f64>) -> Result<Self> {
        if atoms.is_empty() {
            return Err(Error::InvalidMeasure("at least one atom is required".into()));
        }
        if atoms.len() != weights.len() {
            return Err(Error::InvalidMeasure(format!(
                "{} atoms but {} weights",
                atoms.len(),
                weights.len()
            )));
        }
        if atoms.iter().any(|&a| !(a > 0.0 && a.is_finite())) {
            return Err(Error::InvalidMeasure("atoms must be finite and > 0".into()));
        }
        if atoms.windows(2).any(|w| w[0] >= w[1]) {
            return Err(Error::InvalidMeasure("atoms must be strictly increasing".into()));
        }
        if weights.iter().any(|&w| !(w >= 0.0 && w.is_finite())) {
            return Err(Error::InvalidMeasure("weights must be finite and >= 0".into()));
        }
        let total: f64 = weights.iter().sum();
        if (total - 1.0).abs() > WEIGHT_SUM_TOL {
            return Err(Error::InvalidMeasure(format!("weights sum to {total}, expected 1")));
        }
        Ok(Self { atoms, weights })
    }

    pub fn point_mass(at: f64) -> Result<Self> {
        Self::new(vec![at], vec![1.0])
    }

    /// Empirical measure of a list of eigenvalues; equal values are merged.
    pub fn empirical(values: &[f64]) -> Result<Self> {
        let groups = group_values(values);
        let n = values.len() as f64;
        let (atoms, weights) = groups.into_iter().map(|(v, c)| (v, c as f64 / n)).unzip();
        Self::new(atoms, weights)
    }

    pub fn atoms(&self) -> &[f64] {
        &self.atoms
    }

    pub fn weights(&self) -> &[f64] {
        &self.weights
    }

    pub fn len(&self) -> usize {
        self.atoms.len()
    }

    pub fn is_empty(&self) -> bool {
        self.atoms.is_empty()
    }

    /// `(atom, weight)` pairs with positive weight.
    pub fn support(&self) -> impl Iterator<Item = (f64, f64)> + '_ {
        self.atoms
            .iter()
            .zip(&self.weights)
            .filter(|(_, &w)| w > 0.0)
            .map(|(&a, &w)| (a, w))
    }

    /// `l(μ)`: smallest atom with positive mass.
    pub fn lower_edge(&self) -> f64 {
        self.support().next().map(|(a, _)| a).expect("measure has positive mass")
    }

    /// `r(μ)`: largest atom with positive mass.
    pub fn upper_edge(&self) -> f64 {
        self.support().last().map(|(a, _)| a).expect("measure has positive mass")
    }

    pub fn mean(&self) -> f64 {
        self.support().map(|(a, w)| a * w).sum()
    }

    /// `(∫ dμ(t)/t)⁻¹`.
    pub fn harmonic_mean(&self) -> f64 {
        1.0 / self.support().map(|(a, w)| w / a).sum::<f64>()
    }

    /// `∫ log x dμ(x)`.
    pub fn log_moment(&self) -> f64 {
        self.support().map(|(a, w)| w * a.ln()).sum()
    }

    /// The same measure with zero-weight atoms dropped.
    pub fn without_null_atoms(&self) -> Self {
        let (atoms, weights) = self.support().unzip();
        Self { atoms, weights }
    }

    pub fn is_point_mass(&self) -> bool {
        self.support().count() == 1
    }

    fn locate(&self, z: f64) -> Result<Location> {
        if !z.is_finite() {
            return Err(Error::Domain(format!("non-finite evaluation point {z}")));
        }
        let (l, r) = (self.lower_edge(), self.upper_edge());
        if near(z, r) {
            Ok(Location::UpperEdge)
        } else if near(z, l) {
            Ok(Location::LowerEdge)
        } else if z > r || z < l {
            Ok(Location::Outside)
        } else {
            Err(Error::Domain(format!("z = {z} lies inside the support [{l}, {r}]")))
        }
    }

    /// Stieltjes transform `G_μ(z)` for `z ≤ l(μ)` or `z ≥ r(μ)`.
    pub fn stieltjes(&self, z: f64) -> Result<TransformValue> {
        Ok(match self.locate(z)? {
            Location::UpperEdge => TransformValue::PlusInfinity,
            Location::LowerEdge => TransformValue::MinusInfinity,
            Location::Outside => TransformValue::Finite(self.support().map(|(a, w)| w / (z - a)).sum()),
        })
    }

    /// `T_μ(z) = z G_μ(z) − 1`, evaluated as `Σ α_i μ_i / (z − μ_i)`.
    pub fn t_transform(&self, z: f64) -> Result<TransformValue> {
        Ok(match self.stieltjes(z)? {
            TransformValue::Finite(_) => {
                TransformValue::Finite(self.support().map(|(a, w)| w * a / (z - a)).sum())
            }
            inf => {
                if z > 0.0 {
                    inf
                } else {
                    inf.negate()
                }
            }
        })
    }

    /// Inverse of `T_μ`: the unique `z` with `T_μ(z) = θ`.
    ///
    /// Positive `θ` is solved on `(r(μ), ∞)` and negative `θ` on `(−∞, l(μ))`,
    /// the two branches where `T_μ` is strictly monotone.
    pub fn t_inverse(&self, theta: f64) -> Result<f64> {
        self.t_inverse_detail(theta).map(|inv| inv.z)
    }

    pub(crate) fn t_inverse_detail(&self, theta: f64) -> Result<TInverse> {
        if !theta.is_finite() || theta == 0.0 {
            return Err(Error::Range(format!("T⁻¹ is undefined at θ = {theta}")));
        }
        let side = if theta > 0.0 { Side::Upper } else { Side::Lower };
        let edge = match side {
            Side::Upper => self.upper_edge(),
            Side::Lower => self.lower_edge(),
        };
        // Offsets of each atom from the edge, so that z − μ_i = gap_i ± w is exact.
        let terms: Vec<(f64, f64, f64)> = self.support().map(|(a, w)| (edge - a, w, a)).collect();
        let eval = |w: f64| -> (f64, f64) {
            let mut t = 0.0;
            let mut dt = 0.0;
            for &(gap, wt, a) in &terms {
                let denom = match side {
                    Side::Upper => gap + w,
                    Side::Lower => gap - w,
                };
                t += wt * a / denom;
                dt += wt * a / (denom * denom);
            }
            // dT/dw: decreasing on the upper branch, increasing on the lower one.
            let dt = match side {
                Side::Upper => -dt,
                Side::Lower => dt,
            };
            (t, dt)
        };
        let w = solve_monotone_offset(eval, theta, edge, side)?;
        let z = match side {
            Side::Upper => edge + w,
            Side::Lower => edge - w,
        };
        let g = terms
            .iter()
            .map(|&(gap, wt, _)| {
                wt / match side {
                    Side::Upper => gap + w,
                    Side::Lower => gap - w,
                }
            })
            .sum();
        Ok(TInverse { z, offset: w, edge, side, g })
    }

    /// Modified S-transform `S̃_μ(θ) = θ/(θ+1) · T_μ⁻¹(θ)`.
    pub fn s_tilde(&self, theta: f64) -> Result<f64> {
        if theta == 0.0 {
            return Ok(self.mean());
        }
        if theta == -1.0 {
            return Ok(self.harmonic_mean());
        }
        let inv = self.t_inverse_detail(theta)?;
        Ok(inv.s_tilde(theta))
    }

    /// `∫ log|d − x| dμ(x)`.
    pub fn log_potential(&self, d: f64) -> Result<f64> {
        let mut acc = 0.0;
        for (a, w) in self.support() {
            if near(d, a) {
                return Err(Error::Singular(format!("d = {d} coincides with an atom")));
            }
            acc += w * (d - a).abs().ln();
        }
        Ok(acc)
    }

    /// Log-potential at `T⁻¹(θ)`, computed from the edge offset so that
    /// the edge atom's term keeps full relative precision.
    pub(crate) fn log_potential_at(&self, inv: &TInverse) -> f64 {
        self.support()
            .map(|(a, w)| {
                let gap = inv.edge - a;
                let dist = match inv.side {
                    Side::Upper => gap + inv.offset,
                    Side::Lower => gap - inv.offset,
                };
                w * dist.abs().ln()
            })
            .sum()
    }

    /// Push-forward by `x ↦ 1/x`.
    pub fn pushforward_inverse(&self) -> Result<Self> {
        if self.atoms.contains(&0.0) {
            return Err(Error::Domain("cannot invert an atom at 0".into()));
        }
        let atoms = self.atoms.iter().rev().map(|a| 1.0 / a).collect();
        let weights = self.weights.iter().rev().copied().collect();
        Ok(Self { atoms, weights })
    }
}

/// Value of `G_μ` or `T_μ`, allowing the infinite limits at atomic edges.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum TransformValue {
    Finite(f64),
    PlusInfinity,
    MinusInfinity,
}

impl TransformValue {
    pub fn is_infinite(&self) -> bool {
        !matches!(self, TransformValue::Finite(_))
    }

    /// The value as an `f64`, with `±∞` for the infinite variants.
    pub fn value(&self) -> f64 {
        match *self {
            TransformValue::Finite(v) => v,
            TransformValue::PlusInfinity => f64::INFINITY,
            TransformValue::MinusInfinity => f64::NEG_INFINITY,
        }
    }

    fn negate(self) -> Self {
        match self {
            TransformValue::Finite(v) => TransformValue::Finite(-v),
            TransformValue::PlusInfinity => TransformValue::MinusInfinity,
            TransformValue::MinusInfinity => TransformValue::PlusInfinity,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub(crate) enum Side {
    Upper,
    Lower,
}

enum Location {
    UpperEdge,
    LowerEdge,
    Outside,
}

/// A solved `T⁻¹(θ)` together with its offset from the nearest edge and `G(z)`.
#[derive(Debug, Clone, Copy)]
pub(crate) struct TInverse {
    pub z: f64,
    pub offset: f64,
    pub edge: f64,
    pub side: Side,
    pub g: f64,
}

impl TInverse {
    /// Since `z G(z) = θ + 1` at the solution, `S̃(θ) = θ / G(z)`, which stays
    /// accurate near `θ = −1` where `z → 0`.
    pub fn s_tilde(&self, theta: f64) -> f64 {
        theta / self.g
    }
}

fn near(x: f64, edge: f64) -> bool {
    (x - edge).abs() <= EDGE_RTOL * edge.abs()
}

/// Solves `T(edge ± w) = θ` for the offset `w > 0` by bracketing followed
/// by safeguarded Newton steps.
fn solve_monotone_offset<F: Fn(f64) -> (f64, f64)>(eval: F, theta: f64, edge: f64, side: Side) -> Result<f64> {
    // f(w) = T(w) − θ is decreasing on the upper branch and increasing on the lower one.
    let sign = match side {
        Side::Upper => 1.0,
        Side::Lower => -1.0,
    };
    // g(w) = sign·(T(w) − θ) is decreasing in w, positive near the edge.
    let g = |w: f64| {
        let (t, dt) = eval(w);
        (sign * (t - theta), sign * dt)
    };
    let tol = 1e-12 * (1.0 + theta.abs());

    let mut lo = 1e-12 * edge;
    let mut expansions = 0;
    while g(lo).0 < 0.0 {
        lo *= 1e-4;
        expansions += 1;
        if expansions > 60 || lo == 0.0 {
            return Err(Error::Convergence(format!("no lower bracket for T⁻¹({theta})")));
        }
    }
    let mut hi = edge.max(f64::MIN_POSITIVE);
    expansions = 0;
    while g(hi).0 > 0.0 {
        lo = hi;
        hi *= 4.0;
        expansions += 1;
        if expansions > 600 || !hi.is_finite() {
            return Err(Error::Convergence(format!("no upper bracket for T⁻¹({theta})")));
        }
    }

    let mut w = if hi / lo > 16.0 { (lo * hi).sqrt() } else { 0.5 * (lo + hi) };
    for _ in 0..500 {
        let (fw, dfw) = g(w);
        if fw == 0.0 {
            return Ok(w);
        }
        if fw > 0.0 {
            lo = w;
        } else {
            hi = w;
        }
        let newton = w - fw / dfw;
        let next = if newton > lo && newton < hi && dfw != 0.0 {
            newton
        } else if hi / lo > 16.0 {
            (lo * hi).sqrt()
        } else {
            0.5 * (lo + hi)
        };
        let settled = (next - w).abs() <= 4.0 * f64::EPSILON * w || hi - lo <= 4.0 * f64::EPSILON * hi;
        w = next;
        if settled {
            break;
        }
    }
    let residual = g(w).0.abs();
    if residual <= tol || hi - lo <= 8.0 * f64::EPSILON * hi {
        Ok(w)
    } else {
        Err(Error::Convergence(format!("T⁻¹({theta}) residual {residual:.3e}")))
    }
}

/// Groups sorted-or-unsorted values into `(value, multiplicity)` pairs in
/// increasing order of value.
pub fn group_values(values: &[f64]) -> Vec<(f64, usize)> {
    let mut sorted = values.to_vec();
    sorted.sort_by(f64::total_cmp);
    let mut out: Vec<(f64, usize)> = Vec::new();
    for v in sorted {
        match out.last_mut() {
            Some((last, count)) if *last == v => *count += 1,
            _ => out.push((v, 1)),
        }
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_abs_diff_eq;
    use proptest::prelude::*;

    fn two_atoms() -> DiscreteMeasure {
        DiscreteMeasure::new(vec![1.0, 2.0], vec![0.5, 0.5]).unwrap()
    }

    #[test]
    fn rejects_malformed_measures() {
        assert!(DiscreteMeasure::new(vec![], vec![]).is_err());
        assert!(DiscreteMeasure::new(vec![2.0, 1.0], vec![0.5, 0.5]).is_err());
        assert!(DiscreteMeasure::new(vec![0.0, 1.0], vec![0.5, 0.5]).is_err());
        assert!(DiscreteMeasure::new(vec![1.0, 2.0], vec![0.5, 0.6]).is_err());
        assert!(DiscreteMeasure::new(vec![1.0, 2.0], vec![1.5, -0.5]).is_err());
    }

    #[test]
    fn stieltjes_examples() {
        let d1 = DiscreteMeasure::point_mass(1.0).unwrap();
        assert_eq!(d1.stieltjes(2.0).unwrap(), TransformValue::Finite(1.0));
        assert_eq!(d1.stieltjes(1.0).unwrap(), TransformValue::PlusInfinity);
        assert_abs_diff_eq!(two_atoms().stieltjes(3.0).unwrap().value(), 0.75, epsilon = 1e-15);
        assert_eq!(two_atoms().stieltjes(1.0).unwrap(), TransformValue::MinusInfinity);
        assert!(matches!(two_atoms().stieltjes(1.5), Err(Error::Domain(_))));
    }

    #[test]
    fn t_transform_examples() {
        let d1 = DiscreteMeasure::point_mass(1.0).unwrap();
        assert_abs_diff_eq!(d1.t_transform(2.0).unwrap().value(), 1.0, epsilon = 1e-15);
        let d3 = DiscreteMeasure::point_mass(3.0).unwrap();
        assert_abs_diff_eq!(d3.t_transform(4.0).unwrap().value(), 3.0, epsilon = 1e-15);
        assert_abs_diff_eq!(two_atoms().t_transform(3.0).unwrap().value(), 1.25, epsilon = 1e-15);
        assert_eq!(two_atoms().t_transform(2.0).unwrap(), TransformValue::PlusInfinity);
        assert_eq!(two_atoms().t_transform(1.0).unwrap(), TransformValue::MinusInfinity);
        // Below zero, T(0) = −1 and T → 0⁻ as z → −∞.
        assert_abs_diff_eq!(two_atoms().t_transform(0.0).unwrap().value(), -1.0, epsilon = 1e-15);
    }

    /// Plain bisection on z, independent of the offset solver.
    fn bisect_t(mu: &DiscreteMeasure, theta: f64, mut lo: f64, mut hi: f64) -> f64 {
        let t = |z: f64| mu.support().map(|(a, w)| w * a / (z - a)).sum::<f64>() - theta;
        let increasing = t(hi) > t(lo);
        for _ in 0..200 {
            let mid = 0.5 * (lo + hi);
            if (t(mid) < 0.0) == increasing {
                lo = mid;
            } else {
                hi = mid;
            }
        }
        0.5 * (lo + hi)
    }

    #[test]
    fn t_inverse_examples() {
        let d3 = DiscreteMeasure::point_mass(3.0).unwrap();
        assert_abs_diff_eq!(d3.t_inverse(1.0).unwrap(), 6.0, epsilon = 1e-12);

        let z = two_atoms().t_inverse(1.0).unwrap();
        let quad_root = (4.5 + 4.25f64.sqrt()) / 2.0;
        assert_abs_diff_eq!(z, quad_root, epsilon = 1e-12);
        assert_abs_diff_eq!(z, bisect_t(&two_atoms(), 1.0, 2.0 + 1e-9, 100.0), epsilon = 1e-9);

        // θ ∈ (−1, 0) is attained on the negative half-line.
        let d1 = DiscreteMeasure::point_mass(1.0).unwrap();
        assert_abs_diff_eq!(d1.t_inverse(-0.5).unwrap(), -1.0, epsilon = 1e-12);
        assert!(matches!(d1.t_inverse(0.0), Err(Error::Range(_))));
    }

    #[test]
    fn t_inverse_meets_residual_tolerance() {
        let mu = DiscreteMeasure::new(vec![0.5, 1.0, 3.0], vec![0.2, 0.5, 0.3]).unwrap();
        for &theta in &[1e-6, 0.3, 1.0, 7.0, 250.0, -1e-6, -0.4, -0.999, -1.001, -3.0, -80.0] {
            let z = mu.t_inverse(theta).unwrap();
            let t = mu.t_transform(z).unwrap().value();
            assert!((t - theta).abs() <= 1e-12 * (1.0 + theta.abs()) * 10.0, "θ={theta}: T(z)={t}");
        }
    }

    #[test]
    fn s_tilde_examples() {
        for c in [0.3, 1.0, 3.0, 17.0] {
            let d = DiscreteMeasure::point_mass(c).unwrap();
            for theta in [1.0, 0.2, -0.5, -2.0] {
                assert_abs_diff_eq!(d.s_tilde(theta).unwrap(), c, epsilon = 1e-12 * c);
            }
        }
        assert_eq!(two_atoms().s_tilde(0.0).unwrap(), 1.5);
        assert_abs_diff_eq!(two_atoms().s_tilde(-1.0).unwrap(), 4.0 / 3.0, epsilon = 1e-15);
    }

    #[test]
    fn s_tilde_extensions_are_continuous() {
        let mu = DiscreteMeasure::new(vec![0.5, 1.0, 3.0], vec![0.2, 0.5, 0.3]).unwrap();
        for eps in [1e-6, -1e-6] {
            assert!((mu.s_tilde(eps).unwrap() - mu.s_tilde(0.0).unwrap()).abs() < 1e-4);
            assert!((mu.s_tilde(-1.0 + eps).unwrap() - mu.s_tilde(-1.0).unwrap()).abs() < 1e-4);
        }
    }

    #[test]
    fn log_potential_examples() {
        let d1 = DiscreteMeasure::point_mass(1.0).unwrap();
        assert_eq!(d1.log_potential(2.0).unwrap(), 0.0);
        let d = (4.5 + 4.25f64.sqrt()) / 2.0;
        let hand = 0.5 * (d - 1.0).ln() + 0.5 * (d - 2.0).ln();
        assert_abs_diff_eq!(two_atoms().log_potential(d).unwrap(), hand, epsilon = 1e-15);
        assert_abs_diff_eq!(hand, 0.53599, epsilon = 1e-5);
        let d3 = DiscreteMeasure::point_mass(3.0).unwrap();
        assert!(matches!(d3.log_potential(3.0), Err(Error::Singular(_))));
    }

    #[test]
    fn pushforward_examples() {
        let d2 = DiscreteMeasure::point_mass(2.0).unwrap();
        assert_eq!(d2.pushforward_inverse().unwrap(), DiscreteMeasure::point_mass(0.5).unwrap());
        let inv = two_atoms().pushforward_inverse().unwrap();
        assert_eq!(inv.atoms(), &[0.5, 1.0]);
        assert_eq!(inv.weights(), &[0.5, 0.5]);
        let m = DiscreteMeasure::new(vec![1.0, 4.0], vec![1.0 / 3.0, 2.0 / 3.0]).unwrap();
        let inv = m.pushforward_inverse().unwrap();
        assert_eq!(inv.atoms(), &[0.25, 1.0]);
        assert_eq!(inv.weights(), &[2.0 / 3.0, 1.0 / 3.0]);
    }

    #[test]
    fn json_shape() {
        let m: DiscreteMeasure = serde_json::from_str(r#"{"atoms":[1,2],"weights":[0.5,0.5]}"#).unwrap();
        assert_eq!(m, two_atoms());
        assert_eq!(serde_json::to_string(&m).unwrap(), r#"{"atoms":[1.0,2.0],"weights":[0.5,0.5]}"#);
        assert!(serde_json::from_str::<DiscreteMeasure>(r#"{"atoms":[1],"weights":[0.5]}"#).is_err());
        assert!(serde_json::from_str::<DiscreteMeasure>(r#"{"atoms":[1],"weights":[1],"x":0}"#).is_err());
    }

    fn arb_measure() -> impl Strategy<Value = DiscreteMeasure> {
        (1usize..6)
            .prop_flat_map(|n| (prop::collection::vec(0.05f64..1.0, n), prop::collection::vec(0.05f64..1.0, n)))
            .prop_map(|(gaps, raw)| {
                let mut x = 0.1;
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
        fn s_tilde_is_increasing(mu in arb_measure(), a in -6.0f64..6.0, b in -6.0f64..6.0) {
            prop_assume!((a - b).abs() > 1e-6);
            let (lo, hi) = if a < b { (a, b) } else { (b, a) };
            let (sl, sh) = (mu.s_tilde(lo).unwrap(), mu.s_tilde(hi).unwrap());
            if mu.is_point_mass() {
                prop_assert!((sl - sh).abs() <= 1e-12 * sh);
            } else {
                prop_assert!(sl < sh);
            }
        }

        #[test]
        fn t_inverse_round_trips(mu in arb_measure(), theta in -20.0f64..20.0) {
            prop_assume!(theta.abs() > 1e-9);
            let z = mu.t_inverse(theta).unwrap();
            let t = mu.t_transform(z).unwrap().value();
            prop_assert!((t - theta).abs() <= 1e-10 * (1.0 + theta.abs()));
        }

        #[test]
        fn pushforward_is_an_involution(mu in arb_measure()) {
            let back = mu.pushforward_inverse().unwrap().pushforward_inverse().unwrap();
            for (x, y) in back.atoms().iter().zip(mu.atoms()) {
                prop_assert!((x - y).abs() <= 1e-14 * y);
            }
            prop_assert_eq!(back.weights(), mu.weights());
        }
    }
}
