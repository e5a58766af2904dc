//! The classical map `T_ij = |S_ij|²`, its Perron data and spectral gap, and
//! the diffusive lattice Markov chain.

use std::f64::consts::PI;

use faer::Mat;
use num_complex::Complex64;
use serde::Serialize;

use crate::error::{Error, Result};
use crate::graph::make_lattice;
use crate::linalg::real_eigenvalues;
use crate::propagator::Propagator;
use crate::stats::{loglog_fit, LineFit};

/// Row-sum tolerance accepted by [`StochasticMatrix::new`].
pub const STOCHASTIC_TOL: f64 = 1e-12;
/// Tolerance for the Perron vector and the leading eigenvalue.
pub const PERRON_TOL: f64 = 1e-10;

#[derive(Debug, Clone)]
pub struct StochasticMatrix {
    m: Mat<f64>,
}

impl StochasticMatrix {
    /// Checks non-negativity and unit row sums.
    pub fn new(m: Mat<f64>) -> Result<Self> {
        let t = StochasticMatrix { m };
        t.validate()?;
        Ok(t)
    }

    /// Wraps a matrix without checks, e.g. to test [`perron_check`].
    pub fn new_unchecked(m: Mat<f64>) -> Self {
        StochasticMatrix { m }
    }

    fn validate(&self) -> Result<()> {
        if self.m.nrows() != self.m.ncols() || self.m.nrows() == 0 {
            return Err(Error::NotStochastic(format!(
                "matrix is {}x{}",
                self.m.nrows(),
                self.m.ncols()
            )));
        }
        for i in 0..self.dim() {
            let row = self.row_sum(i);
            if (row - 1.0).abs() > STOCHASTIC_TOL {
                return Err(Error::NotStochastic(format!("row {i} sums to {row}")));
            }
            if let Some(j) = (0..self.dim()).find(|&j| self.m[(i, j)] < 0.0) {
                return Err(Error::NotStochastic(format!("negative entry at ({i}, {j})")));
            }
        }
        Ok(())
    }

    pub fn dim(&self) -> usize {
        self.m.nrows()
    }

    pub fn matrix(&self) -> &Mat<f64> {
        &self.m
    }

    pub fn get(&self, i: usize, j: usize) -> f64 {
        self.m[(i, j)]
    }

    pub fn row_sum(&self, i: usize) -> f64 {
        (0..self.m.ncols()).map(|j| self.m[(i, j)]).sum()
    }

    pub fn col_sum(&self, j: usize) -> f64 {
        (0..self.m.nrows()).map(|i| self.m[(i, j)]).sum()
    }

    pub fn is_doubly_stochastic(&self, tol: f64) -> bool {
        (0..self.dim()).all(|i| (self.row_sum(i) - 1.0).abs() <= tol && (self.col_sum(i) - 1.0).abs() <= tol)
    }

    pub fn eigenvalues(&self) -> Result<Vec<Complex64>> {
        real_eigenvalues(&self.m)
    }

    pub fn power(&self, mut n: usize) -> Mat<f64> {
        let dim = self.dim();
        let mut result = Mat::<f64>::identity(dim, dim);
        let mut base = self.m.clone();
        while n > 0 {
            if n & 1 == 1 {
                result = &result * &base;
            }
            n >>= 1;
            if n > 0 {
                base = &base * &base;
            }
        }
        result
    }

    /// `Tr Tⁿ` by repeated squaring.
    pub fn trace_power(&self, n: usize) -> f64 {
        let p = self.power(n);
        (0..self.dim()).map(|i| p[(i, i)]).sum()
    }
}

/// Entrywise squared modulus of a unitary propagator.
pub fn to_stochastic(p: &Propagator) -> StochasticMatrix {
    let s = p.matrix();
    StochasticMatrix::new_unchecked(Mat::from_fn(s.nrows(), s.ncols(), |i, j| s[(i, j)].norm_sqr()))
}

/// True when the entries are non-negative and `T · (1,…,1) = (1,…,1)` within
/// 1e-10. For a non-negative matrix these two conditions give spectral radius
/// exactly 1.
pub fn perron_check(t: &StochasticMatrix) -> bool {
    let n = t.dim();
    n > 0
        && t.m.ncols() == n
        && (0..n).all(|i| (0..n).all(|j| t.m[(i, j)] >= 0.0))
        && (0..n).all(|i| (t.row_sum(i) - 1.0).abs() <= PERRON_TOL)
}

#[derive(Debug, Clone, Serialize)]
pub struct GapReport {
    /// Eigenvalue closest to 1.
    pub leading: Complex64,
    /// Largest modulus among the remaining eigenvalues.
    pub subleading_modulus: f64,
    /// `-ln |Λ_1|`, zero when `|Λ_1| = 1`.
    pub gap: f64,
    /// All eigenvalues, by decreasing modulus.
    pub spectrum: Vec<Complex64>,
}

impl GapReport {
    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("gap report serialization cannot fail")
    }

    /// `modulus,argument` lines with a header.
    pub fn spectrum_csv(&self) -> String {
        let mut out = String::from("modulus,argument\n");
        for z in &self.spectrum {
            out.push_str(&format!("{},{}\n", z.norm(), z.arg()));
        }
        out
    }
}

pub fn spectral_gap(t: &StochasticMatrix) -> Result<GapReport> {
    t.validate()?;
    let mut spectrum = t.eigenvalues()?;
    spectrum.sort_by(|a, b| b.norm().total_cmp(&a.norm()));
    let lead = (0..spectrum.len())
        .min_by(|&a, &b| (spectrum[a] - 1.0).norm().total_cmp(&(spectrum[b] - 1.0).norm()))
        .ok_or(Error::Empty("spectrum"))?;
    let leading = spectrum[lead];
    if (leading - 1.0).norm() > PERRON_TOL {
        return Err(Error::NotStochastic(format!("leading eigenvalue {leading} is not 1")));
    }
    let subleading_modulus = spectrum
        .iter()
        .enumerate()
        .filter(|&(i, _)| i != lead)
        .map(|(_, z)| z.norm())
        .fold(0.0, f64::max);
    let gap = if subleading_modulus >= 1.0 - PERRON_TOL {
        0.0
    } else {
        -subleading_modulus.ln()
    };
    spectrum.swap(0, lead);
    Ok(GapReport {
        leading,
        subleading_modulus,
        gap,
        spectrum,
    })
}

/// Uniform `1/(2d)` transitions between consecutive arcs of the periodic
/// `d`-dimensional lattice of side `side` (backtracking included).
pub fn diffusive_transition(d: usize, side: usize) -> Result<StochasticMatrix> {
    if side < 3 {
        return Err(Error::InvalidLattice(format!("side {side} < 3")));
    }
    let g = make_lattice(d, side)?;
    let n = g.n_arcs();
    let p = 1.0 / (2 * d) as f64;
    let mut m = Mat::<f64>::zeros(n, n);
    for e in 0..n {
        let (_, head) = g.arc(e);
        for f in g.out_arcs(head) {
            m[(e, f)] = p;
        }
    }
    StochasticMatrix::new(m)
}

/// Continuum prediction `exp(-(4π²/(2d L²)) Σ m_i²)` for the diffusive mode
/// with wave vector `m`.
pub fn diffusion_spectrum_prediction(d: usize, side: usize, m: &[i64]) -> f64 {
    let m2: f64 = m.iter().map(|&x| (x * x) as f64).sum();
    (-(4.0 * PI * PI) / (2.0 * d as f64 * (side * side) as f64) * m2).exp()
}

/// Exact non-zero eigenvalue of [`diffusive_transition`] for wave vector `m`:
/// `(1/d) Σ cos(2π m_i / L)`.
pub fn diffusive_eigenvalue(side: usize, m: &[i64]) -> f64 {
    m.iter()
        .map(|&x| (2.0 * PI * x as f64 / side as f64).cos())
        .sum::<f64>()
        / m.len() as f64
}

#[derive(Debug, Clone, Serialize)]
pub struct ScalingReport {
    pub sizes: Vec<usize>,
    pub gaps: Vec<f64>,
    /// `α` in `Δ ~ n_E^{-α}`.
    pub alpha: f64,
    pub fit: LineFit,
}

/// Fits `Δ ~ n_E^{-α}` over a family of stochastic matrices.
pub fn gap_scaling_report(family: &[StochasticMatrix]) -> Result<ScalingReport> {
    if family.len() < 2 {
        return Err(Error::Empty("gap scaling needs at least two sizes"));
    }
    let gaps = family
        .iter()
        .map(|t| spectral_gap(t).map(|r| r.gap))
        .collect::<Result<Vec<_>>>()?;
    let sizes: Vec<usize> = family.iter().map(StochasticMatrix::dim).collect();
    gap_scaling_from_gaps(&sizes, &gaps)
}

pub fn gap_scaling_from_gaps(sizes: &[usize], gaps: &[f64]) -> Result<ScalingReport> {
    let xs: Vec<f64> = sizes.iter().map(|&n| n as f64).collect();
    let fit = loglog_fit(&xs, gaps)?;
    Ok(ScalingReport {
        sizes: sizes.to_vec(),
        gaps: gaps.to_vec(),
        alpha: -fit.slope,
        fit,
    })
}

/// `Tr Tⁿ` from the eigenvalues, `Σ λⁿ`.
pub fn trace_power_from_spectrum(spectrum: &[Complex64], n: usize) -> f64 {
    spectrum.iter().map(|z| z.powu(n as u32)).sum::<Complex64>().re
}

/// `Tr Tⁿ = 1 + (n_E - 1)(1 - 4/n_E)ⁿ` for the star graph.
pub fn star_trace_power(n_e: usize, n: usize) -> f64 {
    1.0 + (n_e as f64 - 1.0) * (1.0 - 4.0 / n_e as f64).powi(n as i32)
}
