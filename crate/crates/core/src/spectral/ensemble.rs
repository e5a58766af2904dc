//! Ensembles of propagators sharing one classical map, sampled either by
//! fresh random phases or by sweeping the wavenumber.

use std::f64::consts::TAU;

use rand::Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::EigenphaseSet;
use crate::colouring::{latin::random_latin_square, EdgeColouring};
use crate::error::{Error, Result};
use crate::linalg::{complex_eigenvalues, phase_rows, CMat};
use crate::propagator::{regular_matrix, star_scattering, Coin, QuantumGraph};
use crate::seed::realization_rng;
use crate::stats::mean_stderr;

#[derive(Debug, Clone)]
pub enum ColouringSource {
    Fixed(EdgeColouring),
    /// A fresh Jacobson–Matthews colouring of `K^n` per realization.
    RandomLatin { n: usize },
}

#[derive(Debug, Clone)]
pub enum Construction {
    Generic(QuantumGraph),
    /// Star graph on `lengths.len()` arcs.
    Star { lengths: Vec<f64> },
    Regular { colouring: ColouringSource, coin: Coin },
}

impl Construction {
    /// Dimension of the propagator.
    pub fn dim(&self) -> usize {
        match self {
            Construction::Generic(g) => g.graph().n_arcs(),
            Construction::Star { lengths } => lengths.len(),
            Construction::Regular { coin, colouring } => {
                let n = match colouring {
                    ColouringSource::Fixed(c) => c.n_vertices(),
                    ColouringSource::RandomLatin { n } => *n,
                };
                n * coin.d()
            }
        }
    }

    fn lengths(&self) -> &[f64] {
        match self {
            Construction::Generic(g) => g.lengths(),
            Construction::Star { lengths } => lengths,
            Construction::Regular { coin, .. } => coin.lengths(),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case", tag = "mode")]
pub enum AveragingMode {
    /// Independent uniform phases per realization: one per arc for generic
    /// and star graphs, one per colour for regular graphs.
    RandomPhase,
    /// Phases `k L` with `k` uniform in `[k_min, k_max)`.
    KSweep { k_min: f64, k_max: f64 },
}

#[derive(Debug, Clone)]
pub struct EnsembleSpec {
    pub construction: Construction,
    pub mode: AveragingMode,
    pub realizations: usize,
    pub seed: u64,
    /// Drop the eigenphases nearest to the coin's own spectrum before spacing
    /// statistics. Regular graphs only.
    pub remove_coin_from_nns: bool,
    /// The same removal applied before the form factor.
    pub remove_coin_from_form_factor: bool,
}

impl EnsembleSpec {
    pub fn new(construction: Construction, mode: AveragingMode, realizations: usize, seed: u64) -> Result<Self> {
        if realizations == 0 {
            return Err(Error::Domain("an ensemble needs at least one realization".into()));
        }
        if let AveragingMode::KSweep { k_min, k_max } = mode {
            if !(k_min < k_max && k_min.is_finite() && k_max.is_finite()) {
                return Err(Error::Domain(format!("empty k window [{k_min}, {k_max})")));
            }
        }
        if construction.dim() == 0 {
            return Err(Error::Empty("propagator of dimension zero"));
        }
        let regular = matches!(construction, Construction::Regular { .. });
        Ok(EnsembleSpec {
            construction,
            mode,
            realizations,
            seed,
            remove_coin_from_nns: regular,
            remove_coin_from_form_factor: false,
        })
    }

    /// One realization of the propagator together with the realised coin
    /// (regular graphs only).
    pub fn realization(&self, r: usize) -> Result<(CMat, Option<CMat>)> {
        let mut rng = realization_rng(self.seed, "ensemble", r as u64);
        let colouring = match &self.construction {
            Construction::Regular {
                colouring: ColouringSource::RandomLatin { n },
                ..
            } => Some(EdgeColouring::from_latin_square(&random_latin_square(*n, &mut rng))),
            _ => None,
        };
        let phases: Vec<f64> = match self.mode {
            AveragingMode::RandomPhase => (0..self.construction.lengths().len())
                .map(|_| rng.random::<f64>() * TAU)
                .collect(),
            AveragingMode::KSweep { k_min, k_max } => {
                let k = rng.random_range(k_min..k_max);
                self.construction.lengths().iter().map(|l| k * l).collect()
            }
        };
        Ok(match &self.construction {
            Construction::Generic(g) => (g.matrix_with_phases(&phases), None),
            Construction::Star { lengths } => (phase_rows(&phases, &star_scattering(lengths.len())?), None),
            Construction::Regular { colouring: source, coin } => {
                let c = match source {
                    ColouringSource::Fixed(c) => c,
                    ColouringSource::RandomLatin { .. } => colouring.as_ref().expect("colouring drawn above"),
                };
                if c.n_colours() != coin.d() {
                    return Err(Error::DimensionMismatch(format!(
                        "coin dimension {} does not match colour count {}",
                        coin.d(),
                        c.n_colours()
                    )));
                }
                let realised = coin.with_phases(&phases);
                (regular_matrix(c, &realised), Some(realised))
            }
        })
    }
}

/// Eigenphases of one realization and, for regular graphs, of its coin.
#[derive(Debug, Clone)]
pub struct SpectrumSample {
    pub phases: EigenphaseSet,
    pub coin_phases: Option<EigenphaseSet>,
}

impl SpectrumSample {
    pub fn without_coin(&self) -> EigenphaseSet {
        match &self.coin_phases {
            Some(c) => self.phases.remove_nearest(c.phases()),
            None => self.phases.clone(),
        }
    }
}

/// Diagonalises every realization. Realizations run in parallel on the
/// current rayon pool; the output order and values do not depend on it.
pub fn run_ensemble(spec: &EnsembleSpec) -> Result<Vec<SpectrumSample>> {
    (0..spec.realizations)
        .into_par_iter()
        .map(|r| {
            let (s, coin) = spec.realization(r)?;
            Ok(SpectrumSample {
                phases: EigenphaseSet::from_eigenvalues(&complex_eigenvalues(&s)?)?,
                coin_phases: coin
                    .map(|c| EigenphaseSet::from_eigenvalues(&complex_eigenvalues(&c)?))
                    .transpose()?,
            })
        })
        .collect()
}

/// `K(τ) = ⟨|Tr Sⁿ|²/N⟩` at `τ = n/N` with standard errors.
#[derive(Debug, Clone, Serialize)]
pub struct FormFactorCurve {
    pub dim: usize,
    pub n: Vec<usize>,
    pub tau: Vec<f64>,
    pub k: Vec<f64>,
    pub stderr: Vec<f64>,
    pub realizations: usize,
}

impl FormFactorCurve {
    /// `tau,K,stderr,realizations` lines with a header.
    pub fn to_csv(&self) -> String {
        let mut out = String::from("tau,K,stderr,realizations\n");
        for i in 0..self.n.len() {
            out.push_str(&format!("{},{},{},{}\n", self.tau[i], self.k[i], self.stderr[i], self.realizations));
        }
        out
    }

    /// Mean of `K` over the points with `lo < τ ≤ hi`.
    pub fn mean_over(&self, lo: f64, hi: f64) -> Option<f64> {
        let v: Vec<f64> = (0..self.n.len())
            .filter(|&i| self.tau[i] > lo && self.tau[i] <= hi)
            .map(|i| self.k[i])
            .collect();
        (!v.is_empty()).then(|| v.iter().sum::<f64>() / v.len() as f64)
    }
}

pub fn form_factor_from_spectra(spectra: &[EigenphaseSet], n_list: &[usize]) -> Result<FormFactorCurve> {
    if n_list.is_empty() {
        return Err(Error::Empty("n list"));
    }
    if spectra.is_empty() {
        return Err(Error::Empty("no spectra"));
    }
    if n_list.contains(&0) {
        return Err(Error::Domain("form factor needs n >= 1".into()));
    }
    let mut ns = n_list.to_vec();
    ns.sort_unstable();
    ns.dedup();
    let dim = spectra[0].len();
    let per_realization: Vec<Vec<f64>> = spectra
        .par_iter()
        .map(|set| ns.iter().map(|&n| set.trace_power(n).norm_sqr() / set.len() as f64).collect())
        .collect();
    let (mut k, mut stderr) = (Vec::new(), Vec::new());
    for j in 0..ns.len() {
        let samples: Vec<f64> = per_realization.iter().map(|row| row[j]).collect();
        let (m, se) = mean_stderr(&samples);
        k.push(m);
        stderr.push(se);
    }
    Ok(FormFactorCurve {
        dim,
        tau: ns.iter().map(|&n| n as f64 / dim as f64).collect(),
        n: ns,
        k,
        stderr,
        realizations: spectra.len(),
    })
}

pub fn form_factor(spec: &EnsembleSpec, n_list: &[usize]) -> Result<FormFactorCurve> {
    if n_list.is_empty() {
        return Err(Error::Empty("n list"));
    }
    let samples = run_ensemble(spec)?;
    let sets: Vec<EigenphaseSet> = samples
        .iter()
        .map(|s| {
            if spec.remove_coin_from_form_factor {
                s.without_coin()
            } else {
                s.phases.clone()
            }
        })
        .collect();
    form_factor_from_spectra(&sets, n_list)
}

/// Width-3 moving average over adjacent `n`; endpoints average what exists.
pub fn smooth_boxcar(curve: &FormFactorCurve) -> FormFactorCurve {
    let len = curve.n.len();
    let mut out = curve.clone();
    for i in 0..len {
        let window = i.saturating_sub(1)..(i + 2).min(len);
        let w = window.len() as f64;
        out.k[i] = curve.k[window.clone()].iter().sum::<f64>() / w;
        out.stderr[i] = curve.stderr[window].iter().map(|s| s * s).sum::<f64>().sqrt() / w;
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::colouring::{colour_from_group, GroupSpec};
    use crate::graph::Digraph;
    use crate::linalg::unitarity_deviation;
    use crate::propagator::{fourier_coin, VertexScatteringSet};

    fn loops(n: usize) -> QuantumGraph {
        // `n` disjoint self-loops: S is a diagonal of phases
        let g = Digraph::new(n, (0..n).map(|v| (v, v))).unwrap();
        let scat = VertexScatteringSet::kottos_smilansky(&g).unwrap();
        QuantumGraph::new(g, scat, (0..n).map(|i| 1.0 + 0.37 * i as f64).collect()).unwrap()
    }

    #[test]
    fn diagonal_ensemble_has_unit_form_factor() {
        let spec = EnsembleSpec::new(Construction::Generic(loops(8)), AveragingMode::RandomPhase, 4000, 5).unwrap();
        let curve = form_factor(&spec, &[1, 2, 3, 5, 8]).unwrap();
        for i in 0..curve.n.len() {
            assert!((curve.k[i] - 1.0).abs() < 3.0 * curve.stderr[i] + 1e-12, "n = {}", curve.n[i]);
        }
    }

    #[test]
    fn realizations_are_unitary_and_reproducible() {
        let coin = fourier_coin(3, vec![1.0, 1.3, 1.7]).unwrap();
        for source in [
            ColouringSource::Fixed(colour_from_group(&GroupSpec::Cyclic(3)).unwrap()),
            ColouringSource::RandomLatin { n: 3 },
        ] {
            let spec = EnsembleSpec::new(
                Construction::Regular {
                    colouring: source,
                    coin: coin.clone(),
                },
                AveragingMode::KSweep { k_min: 0.0, k_max: 50.0 },
                3,
                9,
            )
            .unwrap();
            let (a, ca) = spec.realization(2).unwrap();
            let (b, _) = spec.realization(2).unwrap();
            assert!(unitarity_deviation(&a) < 1e-12);
            assert!(unitarity_deviation(&ca.unwrap()) < 1e-12);
            assert_eq!(a, b);
            assert_ne!(a, spec.realization(1).unwrap().0);
        }
    }

    #[test]
    fn coin_spectrum_is_contained_in_regular_spectrum() {
        let coin = fourier_coin(4, vec![1.0, 1.1, 1.2, 1.3]).unwrap();
        let spec = EnsembleSpec::new(
            Construction::Regular {
                colouring: ColouringSource::RandomLatin { n: 4 },
                coin,
            },
            AveragingMode::RandomPhase,
            5,
            1,
        )
        .unwrap();
        assert!(spec.remove_coin_from_nns && !spec.remove_coin_from_form_factor);
        for sample in run_ensemble(&spec).unwrap() {
            let coin = sample.coin_phases.as_ref().unwrap();
            for &c in coin.phases() {
                let nearest = sample
                    .phases
                    .phases()
                    .iter()
                    .map(|&p| super::super::circular_distance(p, c))
                    .fold(f64::INFINITY, f64::min);
                assert!(nearest < 1e-9);
            }
            assert_eq!(sample.without_coin().len(), 12);
        }
    }

    #[test]
    fn spec_validation() {
        let c = Construction::Star { lengths: vec![1.0; 4] };
        assert!(EnsembleSpec::new(c.clone(), AveragingMode::RandomPhase, 0, 1).is_err());
        assert!(EnsembleSpec::new(c.clone(), AveragingMode::KSweep { k_min: 2.0, k_max: 1.0 }, 5, 1).is_err());
        let spec = EnsembleSpec::new(c, AveragingMode::RandomPhase, 2, 1).unwrap();
        assert!(form_factor(&spec, &[]).is_err());
        assert!(form_factor(&spec, &[0]).is_err());
        let curve = form_factor(&spec, &[3, 1, 2, 2]).unwrap();
        assert_eq!(curve.n, vec![1, 2, 3]);
        assert_eq!(curve.tau, vec![0.25, 0.5, 0.75]);
        assert!(curve.k.iter().all(|&k| k >= 0.0));
        assert_eq!(curve.to_csv().lines().next(), Some("tau,K,stderr,realizations"));
    }

    #[test]
    fn boxcar() {
        let curve = FormFactorCurve {
            dim: 4,
            n: vec![1, 2, 3, 4],
            tau: vec![0.25, 0.5, 0.75, 1.0],
            k: vec![0.0, 3.0, 6.0, 9.0],
            stderr: vec![1.0; 4],
            realizations: 1,
        };
        let s = smooth_boxcar(&curve);
        assert_eq!(s.k, vec![1.5, 3.0, 6.0, 7.5]);
        assert!((s.stderr[1] - 3f64.sqrt() / 3.0).abs() < 1e-15);
    }
}
