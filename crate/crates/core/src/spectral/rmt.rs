//! Reference curves: circular ensembles, Poisson levels and the star graph.

use std::f64::consts::PI;

use serde::{Deserialize, Serialize};

use crate::classical::StochasticMatrix;
use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum RmtKind {
    Cue,
    Coe,
    Poisson,
}

fn check_tau(tau: f64) -> Result<()> {
    if tau >= 0.0 && tau.is_finite() {
        Ok(())
    } else {
        Err(Error::Domain(format!("tau = {tau}")))
    }
}

/// Form factor of the ensemble at `τ ≥ 0`.
///
/// COE: `2τ - τ ln(1 + 2τ)` for `τ ≤ 1` and `2 - τ ln((2τ + 1)/(2τ - 1))`
/// beyond.
pub fn rmt_form_factor(kind: RmtKind, tau: f64) -> Result<f64> {
    check_tau(tau)?;
    Ok(match kind {
        RmtKind::Cue => tau.min(1.0),
        RmtKind::Coe if tau <= 1.0 => 2.0 * tau - tau * (2.0 * tau).ln_1p(),
        RmtKind::Coe => 2.0 - tau * ((2.0 * tau + 1.0) / (2.0 * tau - 1.0)).ln(),
        RmtKind::Poisson => 1.0,
    })
}

/// Spacing density at unit mean spacing: `e^{-s}` for Poisson, Wigner
/// surmises for the circular ensembles.
pub fn spacing_density(kind: RmtKind, s: f64) -> f64 {
    if s < 0.0 {
        return 0.0;
    }
    match kind {
        RmtKind::Poisson => (-s).exp(),
        RmtKind::Coe => PI / 2.0 * s * (-PI * s * s / 4.0).exp(),
        RmtKind::Cue => 32.0 / (PI * PI) * s * s * (-4.0 * s * s / PI).exp(),
    }
}

pub fn spacing_cdf(kind: RmtKind, s: f64) -> f64 {
    if s <= 0.0 {
        return 0.0;
    }
    match kind {
        RmtKind::Poisson => -(-s).exp_m1(),
        RmtKind::Coe => -(-PI * s * s / 4.0).exp_m1(),
        RmtKind::Cue => {
            let x = 2.0 * s / PI.sqrt();
            libm::erf(x) - 4.0 * s / PI * (-x * x).exp()
        }
    }
}

/// Star graph form factor: `e^{-4τ} + 8τ³`, and with `higher_order` also
/// `-(32/3)τ⁴ + (16/3)τ⁵`.
pub fn star_formfactor_reference(tau: f64, higher_order: bool) -> f64 {
    let mut k = (-4.0 * tau).exp() + 8.0 * tau.powi(3);
    if higher_order {
        k += -32.0 / 3.0 * tau.powi(4) + 16.0 / 3.0 * tau.powi(5);
    }
    k
}

/// `g (n/N) Tr Tⁿ`.
pub fn diagonal_term(t: &StochasticMatrix, n: usize, g: u32) -> Result<f64> {
    if !(1..=2).contains(&g) {
        return Err(Error::Domain(format!("symmetry factor must be 1 or 2, got {g}")));
    }
    Ok(g as f64 * n as f64 / t.dim() as f64 * t.trace_power(n))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::classical::to_stochastic;
    use crate::propagator::star_propagator;

    fn integrate(f: impl Fn(f64) -> f64, a: f64, b: f64, steps: usize) -> f64 {
        // Simpson
        let h = (b - a) / steps as f64;
        let mut sum = f(a) + f(b);
        for i in 1..steps {
            sum += f(a + i as f64 * h) * if i % 2 == 1 { 4.0 } else { 2.0 };
        }
        sum * h / 3.0
    }

    #[test]
    fn form_factor_values() {
        assert_eq!(rmt_form_factor(RmtKind::Cue, 0.5).unwrap(), 0.5);
        assert_eq!(rmt_form_factor(RmtKind::Cue, 1.5).unwrap(), 1.0);
        let coe = rmt_form_factor(RmtKind::Coe, 0.1).unwrap();
        assert!((coe - (0.2 - 0.1 * 1.2f64.ln())).abs() < 1e-15);
        assert!((coe - 0.181_767_844).abs() < 1e-8);
        for tau in [1e-3f64, 5e-3, 1e-2] {
            let series = 2.0 * tau - 2.0 * tau * tau + 2.0 * tau.powi(3);
            assert!((rmt_form_factor(RmtKind::Coe, tau).unwrap() - series).abs() < 3.0 * tau.powi(4));
        }
        // continuous at τ = 1, tends to 1
        let below = rmt_form_factor(RmtKind::Coe, 1.0).unwrap();
        let above = rmt_form_factor(RmtKind::Coe, 1.0 + 1e-9).unwrap();
        assert!((below - above).abs() < 1e-6);
        assert!((rmt_form_factor(RmtKind::Coe, 1e4).unwrap() - 1.0).abs() < 1e-6);
        assert!(rmt_form_factor(RmtKind::Coe, -0.1).is_err());
    }

    #[test]
    fn densities_are_normalised_with_unit_mean() {
        for kind in [RmtKind::Poisson, RmtKind::Coe, RmtKind::Cue] {
            let norm = integrate(|s| spacing_density(kind, s), 0.0, 40.0, 40_000);
            let mean = integrate(|s| s * spacing_density(kind, s), 0.0, 40.0, 40_000);
            assert!((norm - 1.0).abs() < 1e-9, "{kind:?}");
            assert!((mean - 1.0).abs() < 1e-9, "{kind:?}");
        }
    }

    #[test]
    fn cdfs_integrate_densities() {
        for kind in [RmtKind::Poisson, RmtKind::Coe, RmtKind::Cue] {
            for s in [0.1, 0.5, 1.0, 2.3] {
                let num = integrate(|x| spacing_density(kind, x), 0.0, s, 2000);
                assert!((spacing_cdf(kind, s) - num).abs() < 1e-10, "{kind:?} at {s}");
            }
        }
    }

    #[test]
    fn star_reference() {
        assert_eq!(star_formfactor_reference(0.0, false), 1.0);
        assert_eq!(star_formfactor_reference(0.0, true), 1.0);
        let want = (-0.4f64).exp() + 8e-3;
        assert!((star_formfactor_reference(0.1, false) - want).abs() < 1e-15);
        let higher = want - 32.0 / 3.0 * 1e-4 + 16.0 / 3.0 * 1e-5;
        assert!((star_formfactor_reference(0.1, true) - higher).abs() < 1e-15);
    }

    #[test]
    fn diagonal_terms() {
        let t = to_stochastic(&star_propagator(20, &[1.0; 20], 0.7).unwrap());
        let d = diagonal_term(&t, 5, 2).unwrap();
        assert!((d - 2.0 * 0.25 * (1.0 + 19.0 * 0.8f64.powi(5))).abs() < 1e-10);
        let t4 = to_stochastic(&star_propagator(4, &[1.0; 4], 0.7).unwrap());
        assert!((diagonal_term(&t4, 3, 1).unwrap() - 0.75).abs() < 1e-12);
        assert!(diagonal_term(&t4, 3, 3).is_err());
    }
}
