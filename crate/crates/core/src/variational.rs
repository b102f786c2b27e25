//! The rank-one variational problem on the simplex and the interlacing
//! identities used when deflating a `k`-component problem to `k − 1`.
//!
//! With `γ` the masses of a uniform sphere vector grouped by the atoms of
//! `μ`, the rank-one limit is `sup_γ f_θ(γ)` with
//! `f_θ(γ) = θ log(Σ γ_i μ_i) − H(γ)` and `H(γ) = −Σ α_i log(γ_i/α_i)`.
//! [`solve_rank1`] gives the maximiser in closed form; [`maximize_simplex`]
//! recovers it numerically without using any transform of `μ`.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::measure::DiscreteMeasure;
use crate::rate::{rate_single, Regime};
use crate::{Error, Result};

const SIMPLEX_TOL: f64 = 1e-12;

/// A point of the probability simplex.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "Vec<f64>", into = "Vec<f64>")]
pub struct SimplexPoint {
    gamma: Vec<f64>,
}

impl TryFrom<Vec<f64>> for SimplexPoint {
    type Error = Error;

    fn try_from(gamma: Vec<f64>) -> Result<Self> {
        SimplexPoint::new(gamma)
    }
}

impl From<SimplexPoint> for Vec<f64> {
    fn from(p: SimplexPoint) -> Self {
        p.gamma
    }
}

impl SimplexPoint {
    pub fn new(gamma: Vec<f64>) -> Result<Self> {
        if gamma.is_empty() || gamma.iter().any(|&g| !(g >= 0.0 && g.is_finite())) {
            return Err(Error::Domain("simplex coordinates must be finite and >= 0".into()));
        }
        let s: f64 = gamma.iter().sum();
        if (s - 1.0).abs() > SIMPLEX_TOL {
            return Err(Error::Domain(format!("simplex coordinates sum to {s}")));
        }
        Ok(Self { gamma })
    }

    /// Rescales a nonnegative vector onto the simplex.
    pub fn normalized(raw: Vec<f64>) -> Result<Self> {
        let s: f64 = raw.iter().sum();
        if !(s > 0.0 && s.is_finite()) {
            return Err(Error::Domain("cannot normalize a vector with zero mass".into()));
        }
        Self::new(raw.into_iter().map(|g| g / s).collect())
    }

    pub fn as_slice(&self) -> &[f64] {
        &self.gamma
    }

    pub fn len(&self) -> usize {
        self.gamma.len()
    }

    pub fn is_empty(&self) -> bool {
        self.gamma.is_empty()
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct VariationalSolution {
    pub gamma_star: SimplexPoint,
    pub c: f64,
    pub f_value: f64,
    pub regime: Regime,
}

/// `H(γ) = −Σ_{α_i > 0} α_i log(γ_i / α_i)`, `+∞` when some `γ_i = 0 < α_i`.
pub fn dirichlet_rate(gamma: &SimplexPoint, alpha: &[f64]) -> f64 {
    gamma
        .as_slice()
        .iter()
        .zip(alpha)
        .filter(|(_, &a)| a > 0.0)
        .map(|(&g, &a)| if g > 0.0 { -a * (g / a).ln() } else { f64::INFINITY })
        .sum()
}

/// `f_θ(γ) = θ log(Σ γ_i μ_i) − H(γ)`.
pub fn objective_f(theta: f64, gamma: &SimplexPoint, mu: &DiscreteMeasure) -> f64 {
    assert_eq!(gamma.len(), mu.len(), "one simplex coordinate per atom");
    let h = dirichlet_rate(gamma, mu.weights());
    if theta == 0.0 {
        return -h;
    }
    let s: f64 = gamma.as_slice().iter().zip(mu.atoms()).map(|(g, a)| g * a).sum();
    theta * s.ln() - h
}

/// Index of the atom a tilt of sign `θ` pushes towards.
fn designated_edge(theta: f64, mu: &DiscreteMeasure) -> usize {
    if theta >= 0.0 {
        mu.len() - 1
    } else {
        0
    }
}

/// Closed-form maximiser of `f_θ` on the simplex.
///
/// The designated edge is the top atom for `θ ≥ 0` and the bottom atom for
/// `θ < 0`. When `edge_weight_zero` is set that atom must carry zero mass (an
/// outlier); otherwise it must be part of the bulk. Other zero-mass atoms get
/// `γ̄_i = 0`. Bulk coordinates follow `γ̄_i = (c/θ) α_i / (d − μ_i)` with
/// `d = (θ+1)c/θ`, and the edge takes the remaining mass.
pub fn solve_rank1(theta: f64, mu: &DiscreteMeasure, edge_weight_zero: bool) -> Result<VariationalSolution> {
    if !theta.is_finite() {
        return Err(Error::Domain(format!("θ = {theta} is not finite")));
    }
    let edge = designated_edge(theta, mu);
    let edge_mass = mu.weights()[edge];
    if edge_weight_zero && edge_mass > 0.0 {
        return Err(Error::Domain(format!(
            "θ = {theta} designates atom {} as the outlier edge, but it carries mass {edge_mass}",
            mu.atoms()[edge]
        )));
    }
    if !edge_weight_zero && edge_mass == 0.0 {
        return Err(Error::Domain(format!(
            "θ = {theta} designates atom {} as a bulk edge, but it carries no mass",
            mu.atoms()[edge]
        )));
    }
    let bulk = mu.without_null_atoms();
    let lambda = mu.atoms()[edge];
    let comp = rate_single(theta, lambda, &bulk)?;

    let mut gamma = vec![0.0; mu.len()];
    if theta == 0.0 {
        gamma.copy_from_slice(mu.weights());
    } else {
        let d = comp.d.expect("d is finite for θ ≠ 0");
        let scale = comp.c / theta;
        let mut rest = 1.0;
        for (i, (&a, &w)) in mu.atoms().iter().zip(mu.weights()).enumerate() {
            if i == edge || w == 0.0 {
                continue;
            }
            gamma[i] = scale * w / (d - a);
            rest -= gamma[i];
        }
        gamma[edge] = rest.max(0.0);
    }
    let gamma_star = SimplexPoint::normalized(gamma)?;
    let f_value = objective_f(theta, &gamma_star, mu);
    Ok(VariationalSolution { gamma_star, c: comp.c, f_value, regime: comp.regime })
}

/// Settings for [`maximize_simplex`].
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct AscentOptions {
    pub iters: usize,
    pub step: f64,
    /// Random Dirichlet(1) start when set; a fixed interior start otherwise.
    pub seed: Option<u64>,
}

impl Default for AscentOptions {
    fn default() -> Self {
        Self { iters: 10_000, step: 0.1, seed: None }
    }
}

const MAX_STEP: f64 = 50.0;
const MAX_REJECTIONS: usize = 50;

/// Exponentiated-gradient ascent of `f_θ` over the simplex.
///
/// Each step maps `γ_i ← γ_i exp(η ∂f/∂γ_i)` and renormalises. Steps that
/// lower `f` are rejected and `η` is halved; accepted steps grow `η`.
/// Returns the best iterate.
pub fn maximize_simplex(theta: f64, mu: &DiscreteMeasure, opts: &AscentOptions) -> Result<VariationalSolution> {
    if opts.iters == 0 || !(opts.step > 0.0) {
        return Err(Error::Domain("ascent needs iters >= 1 and a positive step".into()));
    }
    let n = mu.len();
    let atoms = mu.atoms();
    let alpha = mu.weights();
    let mut gamma: Vec<f64> = match opts.seed {
        Some(seed) => {
            let mut rng = ChaCha8Rng::seed_from_u64(seed);
            (0..n).map(|_| -(1.0 - rng.random::<f64>()).ln()).collect()
        }
        None => alpha.iter().map(|a| a + 1.0 / n as f64).collect(),
    };
    normalize(&mut gamma);

    let objective = |g: &[f64]| -> f64 {
        let s: f64 = g.iter().zip(atoms).map(|(g, a)| g * a).sum();
        let h: f64 = g
            .iter()
            .zip(alpha)
            .filter(|(_, &a)| a > 0.0)
            .map(|(&g, &a)| if g > 0.0 { -a * (g / a).ln() } else { f64::INFINITY })
            .sum();
        if theta == 0.0 {
            -h
        } else {
            theta * s.ln() - h
        }
    };
    let gradient = |g: &[f64], out: &mut [f64]| {
        let s: f64 = g.iter().zip(atoms).map(|(g, a)| g * a).sum();
        for i in 0..n {
            out[i] = theta * atoms[i] / s + if alpha[i] > 0.0 { alpha[i] / g[i] } else { 0.0 };
        }
    };

    let mut f = objective(&gamma);
    let mut step = opts.step;
    let mut grad = vec![0.0; n];
    let mut trial = vec![0.0; n];
    let mut rejections = 0;
    for _ in 0..opts.iters {
        gradient(&gamma, &mut grad);
        // Stationarity on the support: all gradient entries equal θ + 1.
        let mean_grad: f64 = gamma.iter().zip(&grad).map(|(g, d)| g * d).sum();
        let kkt: f64 = gamma.iter().zip(&grad).map(|(g, d)| g * (d - mean_grad).abs()).sum();
        if kkt < 1e-14 {
            break;
        }
        let gmax = grad.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
        for i in 0..n {
            trial[i] = gamma[i] * (step * (grad[i] - gmax)).exp();
        }
        normalize(&mut trial);
        let ft = objective(&trial);
        if ft >= f {
            let gain = ft - f;
            gamma.copy_from_slice(&trial);
            f = ft;
            step = (step * 1.5).min(MAX_STEP);
            rejections = 0;
            if gain == 0.0 && kkt < 1e-10 {
                break;
            }
        } else {
            step *= 0.5;
            rejections += 1;
            if rejections >= MAX_REJECTIONS {
                if kkt <= 1e-6 {
                    break;
                }
                return Err(Error::Convergence(format!(
                    "{MAX_REJECTIONS} consecutive rejected ascent steps at f = {f}, stationarity gap {kkt:.3e}"
                )));
            }
        }
    }

    let edge = designated_edge(theta, mu);
    let c = gamma.iter().zip(atoms).map(|(g, a)| g * a).sum();
    let regime = if alpha[edge] == 0.0 && gamma[edge] > 1e-7 {
        Regime::StuckToEdge
    } else {
        Regime::STransform
    };
    Ok(VariationalSolution { gamma_star: SimplexPoint::new(gamma)?, c, f_value: f, regime })
}

fn normalize(v: &mut [f64]) {
    let s: f64 = v.iter().sum();
    v.iter_mut().for_each(|x| *x /= s);
}

/// Roots of `Σ_i γ_i μ_i / (z − μ_i) = 0`: the `m` smallest followed by the
/// `k − m − 1` largest, one per gap between consecutive atoms.
///
/// Every root is found by bisection on the rational form inside its gap.
pub fn secular_roots(gamma: &SimplexPoint, mu: &DiscreteMeasure, m: usize, k: usize) -> Result<Vec<f64>> {
    let atoms = mu.atoms();
    let n = atoms.len();
    if gamma.len() != n {
        return Err(Error::Domain(format!("{} simplex coordinates for {n} atoms", gamma.len())));
    }
    if k == 0 || m > k - 1 || k - 1 > n.saturating_sub(1) {
        return Err(Error::Domain(format!("cannot take {m} lower and {} upper roots among {n} atoms", k.saturating_sub(m + 1))));
    }
    if let Some(i) = gamma.as_slice().iter().position(|&g| !(g > 0.0)) {
        return Err(Error::Convergence(format!(
            "γ_{i} = 0: the root next to atom {} is not bracketed",
            atoms[i]
        )));
    }
    let upper = k - m - 1;
    let gaps = (0..m).chain(n - 1 - upper..n - 1);
    gaps.map(|j| secular_root_in_gap(gamma.as_slice(), atoms, j)).collect()
}

fn secular_root_in_gap(gamma: &[f64], atoms: &[f64], j: usize) -> Result<f64> {
    let left = atoms[j];
    let width = atoms[j + 1] - left;
    let h = |t: f64| -> f64 {
        gamma
            .iter()
            .zip(atoms)
            .map(|(&g, &a)| g * a / ((left - a) + t))
            .sum()
    };
    let (mut lo, mut hi) = (0.0, width);
    let probe = width * 1e-15;
    if !(h(probe) > 0.0 && h(width - probe) < 0.0) {
        return Err(Error::Convergence(format!(
            "no sign change of the secular function in ({}, {})",
            atoms[j],
            atoms[j + 1]
        )));
    }
    for _ in 0..200 {
        let mid = 0.5 * (lo + hi);
        if mid <= lo || mid >= hi {
            break;
        }
        if h(mid) > 0.0 {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    Ok(left + 0.5 * (lo + hi))
}

/// Output of [`change_of_variables`].
#[derive(Debug, Clone, PartialEq)]
pub struct ReducedWeights {
    /// `γ̄` on the kept atoms, in increasing atom order.
    pub gamma_bar: Vec<f64>,
    /// Positions (in the full atom list) of the kept atoms.
    pub kept: Vec<usize>,
    /// `b = Π χ_j / μ_{p(j)}` over the paired atoms.
    pub b: f64,
}

/// Maps `(γ, χ)` to the decoupled weights
/// `γ̄_i = γ_i Π_j χ_j (μ_{p(j)} − μ_i) / (μ_{p(j)} (χ_j − μ_i))`.
///
/// The atom list is `μ_{−m} < … < μ_{l+k−m}`; the `m` lower roots pair with
/// `μ_{−m}, …, μ_{−1}` and the `k − m − 1` upper roots with
/// `μ_{l+2}, …, μ_{l+k−m}`, leaving `μ_0, …, μ_{l+1}`. Both
/// `Σ γ̄_i = 1` and `Σ μ_i γ̄_i = b Σ μ_i γ_i` are verified to `1e−8`.
pub fn change_of_variables(
    gamma: &SimplexPoint,
    chis: &[f64],
    mu: &DiscreteMeasure,
    m: usize,
    k: usize,
) -> Result<ReducedWeights> {
    let atoms = mu.atoms();
    let n = atoms.len();
    let g = gamma.as_slice();
    if g.len() != n {
        return Err(Error::Domain(format!("{} simplex coordinates for {n} atoms", g.len())));
    }
    if k == 0 || m > k - 1 || n < k {
        return Err(Error::Domain(format!("invalid split m = {m}, k = {k} for {n} atoms")));
    }
    let upper = k - m - 1;
    if chis.len() != m + upper {
        return Err(Error::Domain(format!("expected {} roots, got {}", m + upper, chis.len())));
    }
    // Atom positions paired with each root.
    let paired: Vec<usize> = (0..m).chain(n - upper..n).collect();
    let kept: Vec<usize> = (m..n - upper).collect();

    let mut b = 1.0;
    for (&chi, &p) in chis.iter().zip(&paired) {
        b *= chi / atoms[p];
    }
    let gamma_bar: Vec<f64> = kept
        .iter()
        .map(|&i| {
            let factor: f64 = chis
                .iter()
                .zip(&paired)
                .map(|(&chi, &p)| chi * (atoms[p] - atoms[i]) / (atoms[p] * (chi - atoms[i])))
                .product();
            factor * g[i]
        })
        .collect();

    let total: f64 = gamma_bar.iter().sum();
    if (total - 1.0).abs() > 1e-8 {
        return Err(Error::Identity(format!("Σ γ̄ = {total}, expected 1")));
    }
    let lhs: f64 = kept.iter().zip(&gamma_bar).map(|(&i, gb)| atoms[i] * gb).sum();
    let rhs = b * g.iter().zip(atoms).map(|(g, a)| g * a).sum::<f64>();
    if (lhs - rhs).abs() > 1e-8 * (1.0 + rhs.abs()) {
        return Err(Error::Identity(format!("Σ μ γ̄ = {lhs} but b Σ μ γ = {rhs}")));
    }
    Ok(ReducedWeights { gamma_bar, kept, b })
}
