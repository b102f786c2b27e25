//! Monte Carlo estimators of `(1/N) log I_N(θ̄, X_N)` and exact oracles.
//!
//! Every estimator draws log-weights `w_s`, reduces each batch by
//! log-sum-exp to a batch log-mean, and reports the mean of the batch
//! log-means with the batch-means standard error, both divided by `N`.
//! Batches run in parallel on independent ChaCha streams, so results are
//! bit-for-bit reproducible for a given seed.

use std::io::Write;

use num_bigint::BigInt;
use num_complex::Complex64;
use num_traits::{One, Signed, ToPrimitive, Zero};
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, Gamma};
use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use statrs::function::gamma::ln_gamma;

use crate::measure::{group_values, DiscreteMeasure};
use crate::quadrature::integrate_adaptive;
use crate::randmat::{build_spectrum, conjugate_diagonal, haar_frame, log_delta, Beta, Field, SpectrumSpec};
use crate::rate::{rate_multi, OutlierSet, ThetaVector};
use crate::variational::{solve_rank1, SimplexPoint};
use crate::{Error, Result};

pub const DEFAULT_BATCHES: usize = 32;

/// Below this fraction of `n_samples` the effective sample size triggers a warning.
pub const LOW_ESS_FRACTION: f64 = 0.01;

fn default_batches() -> usize {
    DEFAULT_BATCHES
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SamplingPlan {
    pub n_samples: usize,
    #[serde(default = "default_batches")]
    pub n_batches: usize,
    pub seed: u64,
    /// Explicit per-batch seeds; by default batch `b` uses stream `b` of `seed`.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub worker_seeds: Option<Vec<u64>>,
}

impl SamplingPlan {
    pub fn new(n_samples: usize, seed: u64) -> Self {
        Self { n_samples, n_batches: DEFAULT_BATCHES, seed, worker_seeds: None }
    }

    pub fn with_batches(mut self, n_batches: usize) -> Self {
        self.n_batches = n_batches;
        self
    }

    pub fn with_seed(mut self, seed: u64) -> Self {
        self.seed = seed;
        self
    }

    pub fn batch_size(&self) -> usize {
        self.n_samples / self.n_batches
    }

    pub fn validate(&self) -> Result<()> {
        if self.n_batches < 2 {
            return Err(Error::Domain("at least two batches are needed for an error bar".into()));
        }
        if self.n_samples == 0 || !self.n_samples.is_multiple_of(self.n_batches) {
            return Err(Error::Domain(format!(
                "n_samples = {} must be a positive multiple of n_batches = {}",
                self.n_samples, self.n_batches
            )));
        }
        if let Some(seeds) = &self.worker_seeds {
            if seeds.len() != self.n_batches {
                return Err(Error::Seed(format!("{} worker seeds for {} batches", seeds.len(), self.n_batches)));
            }
            let mut sorted = seeds.clone();
            sorted.sort_unstable();
            if let Some(w) = sorted.windows(2).find(|w| w[0] == w[1]) {
                return Err(Error::Seed(format!("worker seed {} is used twice", w[0])));
            }
        }
        Ok(())
    }

    fn rng(&self, batch: usize) -> ChaCha8Rng {
        match &self.worker_seeds {
            Some(seeds) => ChaCha8Rng::seed_from_u64(seeds[batch]),
            None => {
                let mut rng = ChaCha8Rng::seed_from_u64(self.seed);
                rng.set_stream(batch as u64);
                rng
            }
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct McEstimate {
    pub log_mean_per_n: f64,
    pub stderr: f64,
    pub n_samples: usize,
    pub n_batches: usize,
    /// Effective sample size of the importance weights (tilted estimator only).
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub ess: Option<f64>,
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub warnings: Vec<String>,
}

impl McEstimate {
    fn exact(value: f64, plan: &SamplingPlan) -> Self {
        Self {
            log_mean_per_n: value,
            stderr: 0.0,
            n_samples: plan.n_samples,
            n_batches: plan.n_batches,
            ess: None,
            warnings: Vec::new(),
        }
    }
}

/// `log Σ exp(w)` accumulated in one pass.
#[derive(Debug, Clone, Copy)]
struct LogSumExp {
    max: f64,
    sum: f64,
}

impl LogSumExp {
    fn new() -> Self {
        Self { max: f64::NEG_INFINITY, sum: 0.0 }
    }

    fn push(&mut self, w: f64) {
        if w == f64::NEG_INFINITY {
            return;
        }
        if w > self.max {
            self.sum = self.sum * (self.max - w).exp() + 1.0;
            self.max = w;
        } else {
            self.sum += (w - self.max).exp();
        }
    }

    fn merge(self, other: Self) -> Self {
        let mut out = self;
        if other.max == f64::NEG_INFINITY {
            return out;
        }
        if other.max > out.max {
            out.sum = out.sum * (out.max - other.max).exp() + other.sum;
            out.max = other.max;
        } else {
            out.sum += other.sum * (other.max - out.max).exp();
        }
        out
    }

    fn value(self) -> f64 {
        self.max + self.sum.ln()
    }
}

struct BatchSums {
    first: LogSumExp,
    second: LogSumExp,
}

/// Runs all batches; `sample` returns one log-weight.
fn run_batches<F>(plan: &SamplingPlan, n: usize, track_ess: bool, sample: F) -> Result<McEstimate>
where
    F: Fn(&mut ChaCha8Rng) -> Result<f64> + Sync,
{
    plan.validate()?;
    let size = plan.batch_size();
    let sums = (0..plan.n_batches)
        .into_par_iter()
        .map(|b| {
            let mut rng = plan.rng(b);
            let mut first = LogSumExp::new();
            let mut second = LogSumExp::new();
            for _ in 0..size {
                let w = sample(&mut rng)?;
                if w.is_nan() || w == f64::INFINITY {
                    return Err(Error::Overflow(format!("log-weight {w}")));
                }
                first.push(w);
                if track_ess {
                    second.push(2.0 * w);
                }
            }
            Ok(BatchSums { first, second })
        })
        .collect::<Result<Vec<_>>>()?;

    let ln_size = (size as f64).ln();
    let means: Vec<f64> = sums.iter().map(|s| s.first.value() - ln_size).collect();
    let b = means.len() as f64;
    let avg = means.iter().sum::<f64>() / b;
    let var = means.iter().map(|m| (m - avg).powi(2)).sum::<f64>() / (b - 1.0);
    let mut est = McEstimate {
        log_mean_per_n: avg / n as f64,
        stderr: (var / b).sqrt() / n as f64,
        n_samples: plan.n_samples,
        n_batches: plan.n_batches,
        ess: None,
        warnings: Vec::new(),
    };
    if track_ess {
        let total = sums.iter().fold(LogSumExp::new(), |acc, s| acc.merge(s.first));
        let total_sq = sums.iter().fold(LogSumExp::new(), |acc, s| acc.merge(s.second));
        let ess = (2.0 * total.value() - total_sq.value()).exp();
        if ess < LOW_ESS_FRACTION * plan.n_samples as f64 {
            est.warnings.push(format!("LowESS: effective sample size {ess:.1} of {}", plan.n_samples));
        }
        est.ess = Some(ess);
    }
    Ok(est)
}

/// Naive Haar estimator on the spectrum described by `spec`.
pub fn estimate_in(spec: &SpectrumSpec, thetas: &ThetaVector, plan: &SamplingPlan) -> Result<McEstimate> {
    let eigs = build_spectrum(spec)?;
    estimate_in_eigs(&eigs, spec.beta, thetas, plan)
}

/// Naive Haar estimator for `X = diag(eigs)`.
///
/// Only the first `k` columns of each Haar sample enter `Δ_θ̄`, so each sample
/// costs a thin `N × k` QR. A scalar `X = c₀ I` is handled exactly.
pub fn estimate_in_eigs(eigs: &[f64], beta: Beta, thetas: &ThetaVector, plan: &SamplingPlan) -> Result<McEstimate> {
    plan.validate()?;
    let n = eigs.len();
    let k = thetas.len();
    if n == 0 || k > n {
        return Err(Error::Size(format!("{k} θ components for N = {n}")));
    }
    if eigs.iter().any(|&x| !(x > 0.0 && x.is_finite())) {
        return Err(Error::NotPositiveDefinite);
    }
    let half_beta = beta.value() / 2.0;
    if k == 0 {
        return Ok(McEstimate::exact(0.0, plan));
    }
    if eigs.iter().all(|&x| x == eigs[0]) {
        let sum: f64 = thetas.values().iter().sum();
        return Ok(McEstimate::exact(half_beta * sum * eigs[0].ln(), plan));
    }
    let scale = half_beta * n as f64;
    match beta {
        Beta::Real => run_batches(plan, n, false, |rng| haar_log_weight::<f64>(eigs, thetas, scale, rng)),
        Beta::Complex => run_batches(plan, n, false, |rng| haar_log_weight::<Complex64>(eigs, thetas, scale, rng)),
    }
}

fn haar_log_weight<T: Field>(eigs: &[f64], thetas: &ThetaVector, scale: f64, rng: &mut ChaCha8Rng) -> Result<f64> {
    let frame = haar_frame::<T, _>(eigs.len(), thetas.len(), rng);
    Ok(scale * log_delta(&conjugate_diagonal(eigs, &frame), thetas)?)
}

/// Distinct eigenvalues with their multiplicities.
fn blocks(spec: &SpectrumSpec) -> Result<(Vec<f64>, Vec<f64>, usize)> {
    let eigs = build_spectrum(spec)?;
    let groups = group_values(&eigs);
    let values = groups.iter().map(|g| g.0).collect();
    let counts = groups.iter().map(|g| g.1 as f64).collect();
    Ok((values, counts, eigs.len()))
}

fn sample_dirichlet(gammas: &[Gamma<f64>], rng: &mut ChaCha8Rng, out: &mut [f64]) {
    for (o, g) in out.iter_mut().zip(gammas) {
        *o = g.sample(rng);
    }
    let s: f64 = out.iter().sum();
    out.iter_mut().for_each(|x| *x /= s);
}

fn gamma_laws(shapes: &[f64]) -> Result<Vec<Gamma<f64>>> {
    shapes
        .iter()
        .map(|&a| Gamma::new(a, 1.0).map_err(|e| Error::Domain(format!("Dirichlet parameter {a}: {e}"))))
        .collect()
}

/// Rank-one estimator sampling the block masses `γ` directly from their
/// Dirichlet law with parameters `β·(multiplicity)/2`.
pub fn estimate_in_rank1_dirichlet(spec: &SpectrumSpec, theta: f64, plan: &SamplingPlan) -> Result<McEstimate> {
    plan.validate()?;
    let (values, counts, n) = blocks(spec)?;
    let half_beta = spec.beta.value() / 2.0;
    if theta == 0.0 {
        return Ok(McEstimate::exact(0.0, plan));
    }
    if values.len() == 1 {
        return Ok(McEstimate::exact(half_beta * theta * values[0].ln(), plan));
    }
    let laws = gamma_laws(&counts.iter().map(|c| half_beta * c).collect::<Vec<_>>())?;
    let p = half_beta * n as f64 * theta;
    run_batches(plan, n, false, |rng| {
        let mut g = vec![0.0; values.len()];
        sample_dirichlet(&laws, rng, &mut g);
        Ok(p * g.iter().zip(&values).map(|(g, x)| g * x).sum::<f64>().ln())
    })
}

/// Importance-sampling proposal centred on the finite-`N` maximiser of the
/// rank-one objective: `γ̄` for the empirical measure of the spectrum.
pub fn tilted_proposal(spec: &SpectrumSpec, theta: f64) -> Result<SimplexPoint> {
    let eigs = build_spectrum(spec)?;
    let empirical = DiscreteMeasure::empirical(&eigs)?;
    if empirical.is_point_mass() {
        return SimplexPoint::new(vec![1.0]);
    }
    Ok(solve_rank1(theta, &empirical, false)?.gamma_star)
}

/// Rank-one estimator with a Dirichlet proposal of parameters `(βN/2)·γ̄`.
///
/// Each draw is reweighted by the exact ratio of the target and proposal
/// Dirichlet densities. A warning is attached when the effective sample size
/// drops below 1% of the draws.
pub fn estimate_in_tilted(
    spec: &SpectrumSpec,
    theta: f64,
    gamma_star: &SimplexPoint,
    plan: &SamplingPlan,
) -> Result<McEstimate> {
    plan.validate()?;
    let (values, counts, n) = blocks(spec)?;
    if gamma_star.len() != values.len() {
        return Err(Error::Domain(format!(
            "proposal has {} coordinates for {} distinct eigenvalues",
            gamma_star.len(),
            values.len()
        )));
    }
    if gamma_star.as_slice().iter().any(|&g| !(g > 0.0)) {
        return Err(Error::Domain("proposal coordinates must be strictly positive".into()));
    }
    let half_beta = spec.beta.value() / 2.0;
    if values.len() == 1 {
        return Ok(McEstimate::exact(half_beta * theta * values[0].ln(), plan));
    }
    let target: Vec<f64> = counts.iter().map(|c| half_beta * c).collect();
    let proposal: Vec<f64> = gamma_star.as_slice().iter().map(|g| half_beta * n as f64 * g).collect();
    let log_norm = |a: &[f64]| ln_gamma(a.iter().sum()) - a.iter().map(|&x| ln_gamma(x)).sum::<f64>();
    let norm_diff = log_norm(&target) - log_norm(&proposal);
    let exponent_diff: Vec<f64> = target.iter().zip(&proposal).map(|(a, b)| a - b).collect();
    let laws = gamma_laws(&proposal)?;
    let p = half_beta * n as f64 * theta;
    run_batches(plan, n, true, |rng| {
        let mut g = vec![0.0; values.len()];
        sample_dirichlet(&laws, rng, &mut g);
        let mut w = norm_diff;
        for (gi, d) in g.iter().zip(&exponent_diff) {
            if *d != 0.0 {
                w += d * gi.ln();
            }
        }
        if p != 0.0 {
            w += p * g.iter().zip(&values).map(|(g, x)| g * x).sum::<f64>().ln();
        }
        Ok(w)
    })
}

/// `(1/N) log E[(γ x₁ + (1 − γ) x₂)^{βNθ/2}]` for `γ ~ Beta(βa₁/2, βa₂/2)`.
///
/// Computed by adaptive quadrature after the substitution `γ = sin²φ`, with
/// the integrand scaled by its maximum.
pub fn exact_rank1_two_atoms(mu: &DiscreteMeasure, counts: (usize, usize), theta: f64, beta: Beta, n: usize) -> Result<f64> {
    if mu.len() != 2 {
        return Err(Error::Domain(format!("expected two atoms, got {}", mu.len())));
    }
    exact_rank1_pair((mu.atoms()[0], mu.atoms()[1]), counts, theta, beta, n)
}

/// [`exact_rank1_two_atoms`] for an arbitrary pair of values, which may coincide.
pub fn exact_rank1_pair(x: (f64, f64), counts: (usize, usize), theta: f64, beta: Beta, n: usize) -> Result<f64> {
    let (x1, x2) = x;
    if !(x1 > 0.0 && x2 > 0.0) || n == 0 || counts.0 == 0 || counts.1 == 0 {
        return Err(Error::Domain("two positive values with positive multiplicities are required".into()));
    }
    let half_beta = beta.value() / 2.0;
    let p = half_beta * n as f64 * theta;
    if theta == 0.0 {
        return Ok(0.0);
    }
    if x1 == x2 {
        return Ok(half_beta * theta * x1.ln());
    }
    let a = half_beta * counts.0 as f64;
    let b = half_beta * counts.1 as f64;
    let log_beta_fn = ln_gamma(a) + ln_gamma(b) - ln_gamma(a + b);
    let log_f = |phi: f64| -> f64 {
        let (s, c) = phi.sin_cos();
        let s2 = s * s;
        let mut v = std::f64::consts::LN_2 - log_beta_fn + p * (x2 + (x1 - x2) * s2).ln();
        if a != 0.5 {
            v += (2.0 * a - 1.0) * s.ln();
        }
        if b != 0.5 {
            v += (2.0 * b - 1.0) * c.ln();
        }
        v
    };
    let half_pi = std::f64::consts::FRAC_PI_2;
    // locate the peak on a grid, then refine by golden section
    let grid = 4096;
    let h = half_pi / grid as f64;
    let best = (1..grid).max_by(|&i, &j| log_f(i as f64 * h).total_cmp(&log_f(j as f64 * h))).unwrap_or(1);
    let (mut lo, mut hi) = ((best as f64 - 1.0) * h, (best as f64 + 1.0) * h);
    let ratio = 0.5 * (5f64.sqrt() - 1.0);
    for _ in 0..100 {
        let m1 = hi - ratio * (hi - lo);
        let m2 = lo + ratio * (hi - lo);
        if log_f(m1) < log_f(m2) {
            lo = m1;
        } else {
            hi = m2;
        }
    }
    let peak = log_f(0.5 * (lo + hi)).max(log_f(best as f64 * h));
    let (integral, _) = integrate_adaptive(|phi| (log_f(phi) - peak).exp(), 0.0, half_pi, 64, 1e-11, 20_000)
        .map_err(|e| Error::Quadrature(e.to_string()))?;
    if !(integral > 0.0) {
        return Err(Error::Quadrature(format!("integral {integral} is not positive")));
    }
    Ok((peak + integral.ln()) / n as f64)
}

/// `(1/N) log (s_κ(x) / s_κ(1^N))`, the β = 2 spherical integral at a
/// signature, in exact arithmetic.
///
/// The eigenvalues are converted exactly to integers over a common power of
/// two, the bialternant determinants are evaluated by fraction-free
/// elimination, and `s_κ(1^N)` comes from the hook-content product.
pub fn schur_oracle(eigs: &[f64], kappa: &[i64]) -> Result<f64> {
    let n = eigs.len();
    if n == 0 || kappa.len() != n {
        return Err(Error::Domain(format!("signature of length {} for {n} eigenvalues", kappa.len())));
    }
    if n > MAX_SCHUR_N {
        return Err(Error::Overflow(format!("N = {n} exceeds the exact-arithmetic budget of {MAX_SCHUR_N}")));
    }
    if kappa.windows(2).any(|w| w[0] < w[1]) || kappa[n - 1] < 0 {
        return Err(Error::Domain("κ must be weakly decreasing and nonnegative".into()));
    }
    if kappa[0] > MAX_SCHUR_PART {
        return Err(Error::Overflow(format!("κ₁ = {} exceeds {MAX_SCHUR_PART}", kappa[0])));
    }
    if eigs.iter().any(|&x| !(x > 0.0 && x.is_finite())) {
        return Err(Error::Domain("eigenvalues must be finite and positive".into()));
    }
    let mut sorted = eigs.to_vec();
    sorted.sort_by(f64::total_cmp);
    if let Some(w) = sorted.windows(2).find(|w| w[1] - w[0] < 1e-6 * w[1]) {
        return Err(Error::DegenerateEigenvalues(format!("{} and {} are closer than 1e-6 relative", w[0], w[1])));
    }
    if kappa.iter().all(|&k| k == 0) {
        return Ok(0.0);
    }

    // x_j = m_j / 2^e exactly
    let parts: Vec<(u64, i32)> = eigs.iter().map(|&x| decompose(x)).collect();
    let e = parts.iter().map(|&(_, ex)| -ex).max().unwrap_or(0).max(0);
    let ints: Vec<BigInt> = parts.iter().map(|&(m, ex)| BigInt::from(m) << (ex + e) as usize).collect();

    let powers = |exps: &[usize]| -> Vec<Vec<BigInt>> {
        exps.iter().map(|&p| ints.iter().map(|m| num_traits::pow(m.clone(), p)).collect()).collect()
    };
    let delta: Vec<usize> = (0..n).map(|i| n - 1 - i).collect();
    let shifted: Vec<usize> = (0..n).map(|i| kappa[i] as usize + n - 1 - i).collect();
    let num = bareiss_det(powers(&shifted));
    let den = bareiss_det(powers(&delta));
    if den.is_zero() || num.is_zero() || num.is_negative() != den.is_negative() {
        return Err(Error::DegenerateEigenvalues("bialternant ratio is not positive".into()));
    }
    let size: i64 = kappa.iter().sum();
    let log_schur = big_ln(&num.abs()) - big_ln(&den.abs()) - (size as f64) * e as f64 * std::f64::consts::LN_2;

    let mut log_dim = 0.0;
    for i in 0..n {
        for j in i + 1..n {
            log_dim += ((kappa[i] - kappa[j] + (j - i) as i64) as f64).ln() - ((j - i) as f64).ln();
        }
    }
    Ok((log_schur - log_dim) / n as f64)
}

const MAX_SCHUR_N: usize = 16;
const MAX_SCHUR_PART: i64 = 4096;

/// Mantissa and exponent with `x = m · 2^ex`.
fn decompose(x: f64) -> (u64, i32) {
    let bits = x.to_bits();
    let exp = ((bits >> 52) & 0x7ff) as i32;
    let frac = bits & ((1u64 << 52) - 1);
    if exp == 0 {
        (frac, -1074)
    } else {
        (frac | (1u64 << 52), exp - 1075)
    }
}

fn bareiss_det(mut a: Vec<Vec<BigInt>>) -> BigInt {
    let n = a.len();
    let mut sign = BigInt::one();
    let mut prev = BigInt::one();
    for k in 0..n {
        if a[k][k].is_zero() {
            match (k + 1..n).find(|&r| !a[r][k].is_zero()) {
                Some(r) => {
                    a.swap(k, r);
                    sign = -sign;
                }
                None => return BigInt::zero(),
            }
        }
        for i in k + 1..n {
            for j in k + 1..n {
                let v = &a[i][j] * &a[k][k] - &a[i][k] * &a[k][j];
                a[i][j] = v / &prev;
            }
        }
        prev = a[k][k].clone();
    }
    sign * &a[n - 1][n - 1]
}

fn big_ln(x: &BigInt) -> f64 {
    let bits = x.bits();
    if bits <= 1000 {
        return x.to_f64().expect("finite").ln();
    }
    let shift = bits - 64;
    (x >> shift as usize).to_f64().expect("finite").ln() + shift as f64 * std::f64::consts::LN_2
}

/// `κ = N·θ̄` padded with zeros to length `N`; entries must be integers.
pub fn signature_from_thetas(thetas: &ThetaVector, n: usize) -> Result<Vec<i64>> {
    if thetas.len() > n {
        return Err(Error::Size(format!("{} θ components for N = {n}", thetas.len())));
    }
    let mut kappa = Vec::with_capacity(n);
    for &t in thetas.values() {
        let v = t * n as f64;
        let r = v.round();
        if (v - r).abs() > 1e-9 * (1.0 + v.abs()) {
            return Err(Error::Domain(format!("N·θ = {v} is not an integer")));
        }
        kappa.push(r as i64);
    }
    kappa.resize(n, 0);
    Ok(kappa)
}

/// Spreads each block of `r` equal eigenvalues `v` to `v + spread·(j − (r−1)/2)`.
pub fn jitter_distinct(eigs: &[f64], spread: f64) -> Vec<f64> {
    let mut out = Vec::with_capacity(eigs.len());
    for (v, r) in group_values(eigs) {
        let mid = (r as f64 - 1.0) / 2.0;
        out.extend((0..r).map(|j| v + spread * (j as f64 - mid)));
    }
    out
}

/// One line of a convergence study.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ConvergenceRow {
    #[serde(rename = "N")]
    pub n: usize,
    pub estimate: McEstimate,
    pub j_target: f64,
    pub gap: f64,
}

/// `(β/2) · J(θ̄, outliers, bulk)` for a spectrum family; without explicit
/// outliers the θ components pair with the support edges.
pub fn limit_target(family: &SpectrumSpec, thetas: &ThetaVector) -> Result<f64> {
    let outliers = if family.outlier_count() == 0 {
        OutlierSet::at_edges(thetas, &family.bulk)
    } else {
        family.outliers()
    };
    Ok(family.beta.value() / 2.0 * rate_multi(thetas, &outliers, &family.bulk.without_null_atoms())?.total)
}

/// Runs [`estimate_in`] for each `N` (the family's own `N` is ignored) and
/// compares with [`limit_target`]. Each size gets its own seed derived from
/// `plan.seed` and `N`.
pub fn convergence_study(
    family: &SpectrumSpec,
    n_list: &[usize],
    thetas: &ThetaVector,
    plan: &SamplingPlan,
) -> Result<Vec<ConvergenceRow>> {
    if n_list.windows(2).any(|w| w[0] >= w[1]) {
        return Err(Error::Domain("N-list must be strictly increasing".into()));
    }
    if plan.worker_seeds.is_some() {
        return Err(Error::Seed("explicit worker seeds cannot be shared across sizes".into()));
    }
    let target = limit_target(family, thetas)?;
    n_list
        .iter()
        .map(|&n| {
            let sized = family.at_size(n);
            let p = plan.clone().with_seed(size_seed(plan.seed, n));
            let estimate = estimate_in(&sized, thetas, &p)?;
            let gap = estimate.log_mean_per_n - target;
            Ok(ConvergenceRow { n, estimate, j_target: target, gap })
        })
        .collect()
}

fn size_seed(seed: u64, n: usize) -> u64 {
    seed ^ (n as u64).wrapping_mul(0x9E37_79B9_7F4A_7C15)
}

/// Whether `|gap|` never increases by more than `n_sigma` combined standard errors.
pub fn gaps_nonincreasing(rows: &[ConvergenceRow], n_sigma: f64) -> bool {
    rows.windows(2).all(|w| {
        let sigma = w[0].estimate.stderr.hypot(w[1].estimate.stderr);
        w[1].gap.abs() <= w[0].gap.abs() + n_sigma * sigma
    })
}

/// Writes rows as CSV with header `N,estimate,stderr,target,gap`.
pub fn write_convergence_csv<W: Write>(rows: &[ConvergenceRow], out: W) -> Result<()> {
    let mut w = csv::Writer::from_writer(out);
    let io = |e: csv::Error| Error::Domain(format!("CSV output: {e}"));
    w.write_record(["N", "estimate", "stderr", "target", "gap"]).map_err(io)?;
    for r in rows {
        w.write_record([
            r.n.to_string(),
            r.estimate.log_mean_per_n.to_string(),
            r.estimate.stderr.to_string(),
            r.j_target.to_string(),
            r.gap.to_string(),
        ])
        .map_err(io)?;
    }
    w.flush().map_err(|e| Error::Domain(format!("CSV output: {e}")))?;
    Ok(())
}
