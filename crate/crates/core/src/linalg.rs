//! Thin helpers over `faer` dense matrices.

use faer::Mat;
use num_complex::Complex64;
use rand::Rng;

use crate::error::{Error, Result};

pub type CMat = Mat<Complex64>;

pub fn c(re: f64, im: f64) -> Complex64 {
    Complex64::new(re, im)
}

/// `max |U^† U - I|` over all entries.
pub fn unitarity_deviation(u: &CMat) -> f64 {
    if u.nrows() != u.ncols() {
        return f64::INFINITY;
    }
    let gram = u.adjoint() * u;
    let n = u.nrows();
    let mut worst = 0.0f64;
    for i in 0..n {
        for j in 0..n {
            let target = if i == j { 1.0 } else { 0.0 };
            worst = worst.max((gram[(i, j)] - target).norm());
        }
    }
    worst
}

pub fn check_unitary(u: &CMat, tol: f64) -> Result<()> {
    let dev = unitarity_deviation(u);
    if dev < tol {
        Ok(())
    } else {
        Err(Error::NotUnitary(dev))
    }
}

pub fn complex_eigenvalues(m: &CMat) -> Result<Vec<Complex64>> {
    m.eigenvalues().map_err(|_| Error::Eigensolver)
}

pub fn real_eigenvalues(m: &Mat<f64>) -> Result<Vec<Complex64>> {
    m.eigenvalues().map_err(|_| Error::Eigensolver)
}

/// `diag(e^{iφ}) · m`.
pub fn phase_rows(phases: &[f64], m: &CMat) -> CMat {
    CMat::from_fn(m.nrows(), m.ncols(), |i, j| Complex64::cis(phases[i]) * m[(i, j)])
}

pub fn max_abs_diff(a: &CMat, b: &CMat) -> f64 {
    let mut worst = 0.0f64;
    for i in 0..a.nrows() {
        for j in 0..a.ncols() {
            worst = worst.max((a[(i, j)] - b[(i, j)]).norm());
        }
    }
    worst
}

/// `m^power` by binary exponentiation.
pub fn matrix_power(m: &CMat, mut power: usize) -> CMat {
    let mut result = CMat::identity(m.nrows(), m.ncols());
    let mut base = m.clone();
    while power > 0 {
        if power & 1 == 1 {
            result = &result * &base;
        }
        power >>= 1;
        if power > 0 {
            base = &base * &base;
        }
    }
    result
}

pub fn trace(m: &CMat) -> Complex64 {
    (0..m.nrows()).map(|i| m[(i, i)]).sum()
}

/// Haar-distributed unitary: QR of a complex Ginibre matrix with the phases
/// of `R`'s diagonal divided out.
pub fn random_unitary<R: Rng + ?Sized>(dim: usize, rng: &mut R) -> CMat {
    let mut gauss = || {
        // Box–Muller
        let u1: f64 = 1.0 - rng.random::<f64>();
        let u2: f64 = rng.random();
        (-2.0 * u1.ln()).sqrt() * (2.0 * std::f64::consts::PI * u2).cos()
    };
    let z = CMat::from_fn(dim, dim, |_, _| c(gauss(), gauss()));
    let qr = z.qr();
    let q = qr.compute_Q();
    let r = qr.R();
    CMat::from_fn(dim, dim, |i, j| {
        let d = r[(j, j)];
        let phase = if d.norm() > 0.0 { d / d.norm() } else { c(1.0, 0.0) };
        q[(i, j)] * phase
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    #[test]
    fn random_unitaries_are_unitary() {
        let mut rng = ChaCha8Rng::seed_from_u64(1);
        for dim in [1, 2, 5, 17] {
            let u = random_unitary(dim, &mut rng);
            assert!(unitarity_deviation(&u) < 1e-12);
        }
    }

    #[test]
    fn power_matches_repeated_product() {
        let mut rng = ChaCha8Rng::seed_from_u64(2);
        let u = random_unitary(6, &mut rng);
        let mut direct = CMat::identity(6, 6);
        for _ in 0..13 {
            direct = &direct * &u;
        }
        assert!(max_abs_diff(&direct, &matrix_power(&u, 13)) < 1e-12);
        assert!(max_abs_diff(&CMat::identity(6, 6), &matrix_power(&u, 0)) == 0.0);
    }
}
