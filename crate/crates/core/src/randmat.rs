//! Spectra, Haar sampling and the log-domain generalized power function.

use nalgebra::{Cholesky, ComplexField, DMatrix, SymmetricEigen};
use num_complex::Complex64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;
use serde::{Deserialize, Serialize};

use crate::measure::{DiscreteMeasure, EDGE_RTOL};
use crate::rate::{OutlierSet, ThetaVector};
use crate::{Error, Result};

/// Symmetry class: `β = 1` real orthogonal, `β = 2` complex unitary.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(try_from = "u8", into = "u8")]
pub enum Beta {
    Real,
    Complex,
}

impl Beta {
    pub fn value(self) -> f64 {
        match self {
            Beta::Real => 1.0,
            Beta::Complex => 2.0,
        }
    }
}

impl TryFrom<u8> for Beta {
    type Error = Error;

    fn try_from(b: u8) -> Result<Self> {
        match b {
            1 => Ok(Beta::Real),
            2 => Ok(Beta::Complex),
            _ => Err(Error::Domain(format!("β must be 1 or 2, got {b}"))),
        }
    }
}

impl From<Beta> for u8 {
    fn from(b: Beta) -> Self {
        match b {
            Beta::Real => 1,
            Beta::Complex => 2,
        }
    }
}

/// Scalar field of an ensemble.
pub trait Field: ComplexField<RealField = f64> + Copy + Send + Sync {
    /// An isotropic Gaussian with `E|z|² = 1`.
    fn gaussian<R: Rng + ?Sized>(rng: &mut R) -> Self;
}

impl Field for f64 {
    fn gaussian<R: Rng + ?Sized>(rng: &mut R) -> Self {
        rng.sample(StandardNormal)
    }
}

impl Field for Complex64 {
    fn gaussian<R: Rng + ?Sized>(rng: &mut R) -> Self {
        let re: f64 = rng.sample(StandardNormal);
        let im: f64 = rng.sample(StandardNormal);
        Complex64::new(re, im) * std::f64::consts::FRAC_1_SQRT_2
    }
}

/// Eigenvalue layout of `X_N`: a bulk following `μ` plus isolated outliers.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SpectrumSpec {
    pub bulk: DiscreteMeasure,
    #[serde(default)]
    pub lower_outliers: Vec<f64>,
    #[serde(default)]
    pub upper_outliers: Vec<f64>,
    #[serde(rename = "N")]
    pub n: usize,
    pub beta: Beta,
}

impl SpectrumSpec {
    pub fn new(bulk: DiscreteMeasure, n: usize, beta: Beta) -> Self {
        Self { bulk, lower_outliers: Vec::new(), upper_outliers: Vec::new(), n, beta }
    }

    pub fn with_outliers(mut self, lower: Vec<f64>, upper: Vec<f64>) -> Self {
        self.lower_outliers = lower;
        self.upper_outliers = upper;
        self
    }

    pub fn outliers(&self) -> OutlierSet {
        OutlierSet::new(self.lower_outliers.clone(), self.upper_outliers.clone())
    }

    pub fn outlier_count(&self) -> usize {
        self.lower_outliers.len() + self.upper_outliers.len()
    }

    /// The same layout at another size.
    pub fn at_size(&self, n: usize) -> Self {
        Self { n, ..self.clone() }
    }
}

/// Eigenvalues of `X_N` in ascending order.
///
/// Bulk atoms receive `⌊α_i (N − #outliers)⌋` copies; leftover slots go to
/// the largest fractional parts, ties broken by larger weight then lower atom.
pub fn build_spectrum(spec: &SpectrumSpec) -> Result<Vec<f64>> {
    let bulk = spec.bulk.without_null_atoms();
    let outliers = spec.outlier_count();
    if spec.n == 0 || spec.n < outliers + bulk.len() {
        return Err(Error::Size(format!(
            "N = {} cannot hold {} outliers and {} bulk atoms",
            spec.n,
            outliers,
            bulk.len()
        )));
    }
    let (l, r) = (bulk.lower_edge(), bulk.upper_edge());
    if spec.lower_outliers.iter().any(|&x| !(x > 0.0 && x <= l * (1.0 + EDGE_RTOL))) {
        return Err(Error::Domain(format!("lower outliers must lie in (0, {l}]")));
    }
    if spec.upper_outliers.iter().any(|&x| !(x.is_finite() && x >= r * (1.0 - EDGE_RTOL))) {
        return Err(Error::Domain(format!("upper outliers must be finite and at least {r}")));
    }

    let slots = spec.n - outliers;
    let exact: Vec<f64> = bulk.weights().iter().map(|w| w * slots as f64).collect();
    let mut counts: Vec<usize> = exact.iter().map(|x| x.floor() as usize).collect();
    let assigned: usize = counts.iter().sum();
    let mut order: Vec<usize> = (0..counts.len()).collect();
    order.sort_by(|&i, &j| {
        let (fi, fj) = (exact[i] - counts[i] as f64, exact[j] - counts[j] as f64);
        fj.total_cmp(&fi)
            .then(bulk.weights()[j].total_cmp(&bulk.weights()[i]))
            .then(i.cmp(&j))
    });
    for &i in order.iter().cycle().take(slots.saturating_sub(assigned)) {
        counts[i] += 1;
    }

    let mut eigs = Vec::with_capacity(spec.n);
    eigs.extend_from_slice(&spec.lower_outliers);
    for (&a, &c) in bulk.atoms().iter().zip(&counts) {
        eigs.extend(std::iter::repeat_n(a, c));
    }
    eigs.extend_from_slice(&spec.upper_outliers);
    eigs.sort_by(f64::total_cmp);
    Ok(eigs)
}

/// First `k` columns of a Haar-distributed `N × N` matrix.
///
/// Gaussian entries are drawn column by column, so the frame for `k` equals
/// the first `k` columns of the frame for any larger `k` with the same stream.
pub fn haar_frame<T: Field, R: Rng + ?Sized>(n: usize, k: usize, rng: &mut R) -> DMatrix<T> {
    assert!(k <= n && n > 0, "frame of {k} columns in dimension {n}");
    let g = DMatrix::<T>::from_fn(n, k, |_, _| T::gaussian(rng));
    let qr = g.qr();
    let r = qr.r();
    let mut q = qr.q();
    for j in 0..k {
        let d = r[(j, j)];
        let modulus = d.modulus();
        if modulus > 0.0 {
            let phase = d.unscale(modulus);
            for i in 0..n {
                q[(i, j)] *= phase;
            }
        }
    }
    q
}

/// A Haar-distributed `N × N` orthogonal (`f64`) or unitary (`Complex64`) matrix.
pub fn haar_sample<T: Field>(n: usize, seed: u64) -> DMatrix<T> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    haar_frame(n, n, &mut rng)
}

/// `F* diag(x) F` for a frame `F`.
pub fn conjugate_diagonal<T: Field>(eigs: &[f64], frame: &DMatrix<T>) -> DMatrix<T> {
    let mut scaled = frame.clone();
    for (i, &x) in eigs.iter().enumerate() {
        for j in 0..frame.ncols() {
            scaled[(i, j)] = scaled[(i, j)].scale(x);
        }
    }
    let mut out = frame.ad_mul(&scaled);
    hermitize(&mut out);
    out
}

/// Forces an exactly Hermitian matrix by averaging with its adjoint.
fn hermitize<T: Field>(m: &mut DMatrix<T>) {
    let adj = m.adjoint();
    *m += adj;
    m.scale_mut(0.5);
}

/// `U* M U`, symmetrised.
pub fn conjugate<T: Field>(m: &DMatrix<T>, u: &DMatrix<T>) -> DMatrix<T> {
    let mut out = u.ad_mul(&(m * u));
    hermitize(&mut out);
    out
}

/// `Σ_{i≤k} (θ_i − θ_{i+1}) log det [M]_i` with `θ_{k+1} = 0`, from one
/// Cholesky factorization of the leading `k × k` block.
pub fn log_delta<T: Field>(m: &DMatrix<T>, thetas: &ThetaVector) -> Result<f64> {
    let k = thetas.len();
    if m.nrows() != m.ncols() {
        return Err(Error::Size(format!("{}×{} matrix is not square", m.nrows(), m.ncols())));
    }
    if k > m.nrows() {
        return Err(Error::Size(format!("{k} θ components for a {}×{} matrix", m.nrows(), m.nrows())));
    }
    if k == 0 {
        return Ok(0.0);
    }
    let block = m.view((0, 0), (k, k)).into_owned();
    let chol = Cholesky::new(block).ok_or(Error::NotPositiveDefinite)?;
    let l = chol.l_dirty();
    let th = thetas.values();
    let mut log_det = 0.0;
    let mut total = 0.0;
    for i in 0..k {
        let d = l[(i, i)].real();
        if !(d > 0.0) {
            return Err(Error::NotPositiveDefinite);
        }
        log_det += 2.0 * d.ln();
        let next = th.get(i + 1).copied().unwrap_or(0.0);
        let w = th[i] - next;
        if w != 0.0 {
            total += w * log_det;
        }
    }
    Ok(total)
}

/// One Schur-complement step of a positive definite matrix.
#[derive(Debug, Clone, PartialEq)]
pub struct Deflation<T: Field> {
    /// `M₁₁`.
    pub a: f64,
    /// `M[2..,2..] − cc*/a`.
    pub y: DMatrix<T>,
    /// `|log Δ_θ̄(M) − (θ₁ log a + log Δ_θ̃(Y))|`.
    pub residual: f64,
}

pub fn deflate<T: Field>(m: &DMatrix<T>, thetas: &ThetaVector) -> Result<Deflation<T>> {
    let n = m.nrows();
    if n < 2 || m.ncols() != n {
        return Err(Error::Size(format!("deflation needs a square matrix of size ≥ 2, got {n}×{}", m.ncols())));
    }
    if thetas.is_empty() || thetas.len() > n {
        return Err(Error::Size(format!("{} θ components for size {n}", thetas.len())));
    }
    let a = m[(0, 0)].real();
    if !(a > 0.0) {
        return Err(Error::NotPositiveDefinite);
    }
    let c = m.view((1, 0), (n - 1, 1)).into_owned();
    let mut y = m.view((1, 1), (n - 1, n - 1)).into_owned() - (&c * c.adjoint()).unscale(a);
    hermitize(&mut y);
    if Cholesky::new(y.clone()).is_none() {
        return Err(Error::NotPositiveDefinite);
    }
    let full = log_delta(m, thetas)?;
    let split = thetas.values()[0] * a.ln() + log_delta(&y, &thetas.tail())?;
    let residual = (full - split).abs();
    if residual > 1e-8 * (1.0 + full.abs()) {
        return Err(Error::Identity(format!("deflation residual {residual:.3e}")));
    }
    Ok(Deflation { a, y, residual })
}

/// Checks `log Δ_{θ′}(U*MU) = −log (U*M⁻¹U)_{NN}` for `θ′ = (0,…,0,1)` on one
/// Haar sample, returning both sides.
///
/// With `θ′` of full length, `Δ_{θ′}` is the ratio of the last two leading
/// minors, i.e. the inverse of the bottom-right entry of the inverse. In
/// distribution the `(1,1)` entry gives the same law.
pub fn inverse_spectrum_identity<T: Field>(m: &DMatrix<T>, seed: u64) -> Result<(f64, f64)> {
    let n = m.nrows();
    if n == 0 || m.ncols() != n {
        return Err(Error::Size("identity needs a nonempty square matrix".into()));
    }
    let u = haar_sample::<T>(n, seed);
    let a = conjugate(m, &u);
    let mut prime = vec![0.0; n];
    prime[n - 1] = 1.0;
    let lhs = log_delta(&a, &ThetaVector::new(prime)?)?;
    let inv = Cholesky::new(m.clone()).ok_or(Error::NotPositiveDefinite)?.inverse();
    let b = conjugate(&inv, &u);
    let rhs = -b[(n - 1, n - 1)].real().ln();
    if (lhs - rhs).abs() > 1e-8 * (1.0 + lhs.abs()) {
        return Err(Error::Identity(format!("log Δ = {lhs} but −log (U*M⁻¹U)_NN = {rhs}")));
    }
    Ok((lhs, rhs))
}

/// Constant `M_eq` with `|log Δ_θ̄(U*XU) − log Δ_θ̄(U*YU)| ≤ M_eq ε` whenever
/// `e^{−ε} ≤ λ_i(X)/λ_i(Y) ≤ e^{ε}`: each minor moves by at most `iε`.
pub fn equicontinuity_constant(thetas: &ThetaVector) -> f64 {
    let th = thetas.values();
    (0..th.len())
        .map(|i| {
            let next = th.get(i + 1).copied().unwrap_or(0.0);
            (i + 1) as f64 * (th[i] - next).abs()
        })
        .sum()
}

/// Eigenvalues of a Hermitian matrix, ascending.
pub fn hermitian_eigenvalues<T: Field>(m: &DMatrix<T>) -> Vec<f64> {
    let mut e: Vec<f64> = SymmetricEigen::new(m.clone()).eigenvalues.iter().copied().collect();
    e.sort_by(f64::total_cmp);
    e
}

/// Whether ascending `inner` (length `n − 1`) interlaces ascending `outer`
/// (length `n`): `outer_i ≤ inner_i ≤ outer_{i+1}` up to `tol` relative.
pub fn interlaces(outer: &[f64], inner: &[f64], tol: f64) -> bool {
    inner.len() + 1 == outer.len()
        && inner.iter().enumerate().all(|(i, &y)| {
            let slack = tol * (1.0 + y.abs());
            outer[i] - slack <= y && y <= outer[i + 1] + slack
        })
}
