//! Eigenphases, traces of propagator powers, the periodic-orbit sum, ensemble
//! form factors, spacing statistics and random-matrix references.

mod ensemble;
mod nns;
mod orbits;
mod rmt;

use std::f64::consts::TAU;

use num_complex::Complex64;
use serde::Serialize;

pub use ensemble::{
    form_factor, form_factor_from_spectra, run_ensemble, smooth_boxcar, AveragingMode, ColouringSource,
    Construction, EnsembleSpec, FormFactorCurve, SpectrumSample,
};
pub use nns::{ks_distance, nns, pooled_spacings, unfolded_spacings, SpacingHistogram, DEFAULT_BIN_WIDTH};
pub use orbits::{periodic_orbit_trace, DEFAULT_ORBIT_CAP};
pub use rmt::{diagonal_term, rmt_form_factor, spacing_cdf, spacing_density, star_formfactor_reference, RmtKind};

use crate::error::{Error, Result};
use crate::linalg::{complex_eigenvalues, matrix_power, trace};
use crate::propagator::Propagator;

/// Largest accepted `| |λ| - 1 |` for an eigenvalue of a unitary.
pub const MODULUS_TOL: f64 = 1e-6;

/// Eigenphases in `[0, 2π)`, sorted ascending.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct EigenphaseSet {
    phases: Vec<f64>,
}

impl EigenphaseSet {
    pub fn from_eigenvalues(values: &[Complex64]) -> Result<Self> {
        if let Some(z) = values.iter().find(|z| (z.norm() - 1.0).abs() > MODULUS_TOL) {
            return Err(Error::OffUnitCircle(z.norm()));
        }
        Ok(Self::from_phases(values.iter().map(|z| z.arg()).collect()))
    }

    /// Reduces arbitrary angles into `[0, 2π)` and sorts them.
    pub fn from_phases(phases: Vec<f64>) -> Self {
        let mut phases: Vec<f64> = phases
            .into_iter()
            .map(|p| {
                let r = p.rem_euclid(TAU);
                if r >= TAU { 0.0 } else { r }
            })
            .collect();
        phases.sort_by(f64::total_cmp);
        EigenphaseSet { phases }
    }

    pub fn len(&self) -> usize {
        self.phases.len()
    }

    pub fn is_empty(&self) -> bool {
        self.phases.is_empty()
    }

    pub fn phases(&self) -> &[f64] {
        &self.phases
    }

    /// Mean level density `N / 2π`.
    pub fn mean_density(&self) -> f64 {
        self.len() as f64 / TAU
    }

    /// `Σ_j e^{i n θ_j}`.
    pub fn trace_power(&self, n: usize) -> Complex64 {
        self.phases.iter().map(|&t| Complex64::cis(n as f64 * t)).sum()
    }

    /// Removes, for each target angle in turn, the nearest remaining phase on
    /// the circle.
    pub fn remove_nearest(&self, targets: &[f64]) -> Self {
        let mut keep = vec![true; self.len()];
        for &t in targets {
            let nearest = (0..self.len())
                .filter(|&i| keep[i])
                .min_by(|&a, &b| circular_distance(self.phases[a], t).total_cmp(&circular_distance(self.phases[b], t)));
            if let Some(i) = nearest {
                keep[i] = false;
            }
        }
        EigenphaseSet {
            phases: self.phases.iter().zip(&keep).filter(|(_, &k)| k).map(|(&p, _)| p).collect(),
        }
    }
}

pub fn circular_distance(a: f64, b: f64) -> f64 {
    let d = (a - b).rem_euclid(TAU);
    d.min(TAU - d)
}

pub fn eigenphases(p: &Propagator) -> Result<EigenphaseSet> {
    EigenphaseSet::from_eigenvalues(&complex_eigenvalues(p.matrix())?)
}

/// `Tr Sⁿ` by repeated squaring.
pub fn trace_power(p: &Propagator, n: usize) -> Complex64 {
    trace(&matrix_power(p.matrix(), n))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::graph::Digraph;
    use crate::linalg::{c, random_unitary};
    use crate::propagator::{build_propagator, VertexScatteringSet};
    use crate::CMat;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;
    use std::f64::consts::PI;

    fn two_cycle(l: f64, k: f64) -> Propagator {
        let g = Digraph::new(2, [(0, 1), (1, 0)]).unwrap();
        let scat = VertexScatteringSet::kottos_smilansky(&g).unwrap();
        build_propagator(&g, &scat, &[l, l], k).unwrap()
    }

    #[test]
    fn diagonal_phases() {
        let p = Propagator::from_unitary(CMat::from_fn(2, 2, |i, j| match (i, j) {
            (0, 0) => c(1.0, 0.0),
            (1, 1) => c(0.0, 1.0),
            _ => c(0.0, 0.0),
        }))
        .unwrap();
        let e = eigenphases(&p).unwrap();
        assert!(e.phases()[0].abs() < 1e-14);
        assert!((e.phases()[1] - PI / 2.0).abs() < 1e-14);
    }

    #[test]
    fn two_cycle_phases_and_traces() {
        let (l, k) = (0.9, 4.1);
        let p = two_cycle(l, k);
        let e = eigenphases(&p).unwrap();
        let mut want = vec![(k * l).rem_euclid(TAU), (k * l + PI).rem_euclid(TAU)];
        want.sort_by(f64::total_cmp);
        for (g, w) in e.phases().iter().zip(&want) {
            assert!(circular_distance(*g, *w) < 1e-12);
        }
        assert!(trace_power(&p, 1).norm() < 1e-14);
        assert!((trace_power(&p, 2) - 2.0 * Complex64::cis(2.0 * k * l)).norm() < 1e-13);
    }

    #[test]
    fn identity_trace() {
        let p = Propagator::from_unitary(CMat::identity(5, 5)).unwrap();
        for n in 1..4 {
            assert!((trace_power(&p, n) - 5.0).norm() < 1e-14);
        }
    }

    #[test]
    fn traces_match_eigenphases() {
        let mut rng = ChaCha8Rng::seed_from_u64(21);
        let p = Propagator::from_unitary(random_unitary(50, &mut rng)).unwrap();
        let e = eigenphases(&p).unwrap();
        assert_eq!(e.len(), 50);
        for n in [1, 2, 7, 30] {
            assert!((trace_power(&p, n) - e.trace_power(n)).norm() < 1e-8);
        }
    }

    #[test]
    fn off_circle_rejected() {
        assert!(matches!(
            EigenphaseSet::from_eigenvalues(&[c(1.1, 0.0)]),
            Err(Error::OffUnitCircle(_))
        ));
    }

    #[test]
    fn removal_takes_nearest() {
        let e = EigenphaseSet::from_phases(vec![0.1, 1.0, 2.0, 6.2]);
        let r = e.remove_nearest(&[6.25, 0.0]);
        assert_eq!(r.phases(), &[1.0, 2.0]);
        let r = e.remove_nearest(&[1.1]);
        assert_eq!(r.phases(), &[0.1, 2.0, 6.2]);
    }
}
