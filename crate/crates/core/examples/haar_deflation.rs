//! Haar conjugation, log Δ from one Cholesky factor, and one deflation step.

use nalgebra::{DMatrix, DVector};
use num_complex::Complex64;
use spherical_integrals::randmat::{
    build_spectrum, conjugate, deflate, haar_sample, hermitian_eigenvalues, interlaces, log_delta,
};
use spherical_integrals::{Beta, DiscreteMeasure, Result, SpectrumSpec, ThetaVector};

fn main() -> Result<()> {
    let bulk = DiscreteMeasure::new(vec![1.0, 2.0], vec![0.5, 0.5])?;
    let spec = SpectrumSpec::new(bulk, 8, Beta::Complex).with_outliers(vec![0.5], vec![3.0]);
    let eigs = build_spectrum(&spec)?;
    println!("spectrum {eigs:?}");

    let x = DMatrix::from_diagonal(&DVector::from_vec(eigs.iter().map(|&e| Complex64::new(e, 0.0)).collect()));
    let u = haar_sample::<Complex64>(spec.n, 42);
    let m = conjugate(&x, &u);
    let thetas = ThetaVector::new(vec![1.0, 0.5])?;
    println!("log Δ_θ̄(U*XU) = {:.10}", log_delta(&m, &thetas)?);

    let d = deflate(&m, &thetas)?;
    let y = hermitian_eigenvalues(&d.y);
    println!("a = {:.6}, residual {:.2e}", d.a, d.residual);
    println!("spectrum of Y {:?}", y.iter().map(|v| (v * 1e4).round() / 1e4).collect::<Vec<_>>());
    println!("interlaces: {}", interlaces(&eigs, &y, 1e-10));
    Ok(())
}
