//! Coined discrete-time quantum walks: coin toss at every site, then a
//! spin-dependent shift.
//!
//! Amplitudes are stored colour-major, `ψ[i·n + v]` for spin `i` at vertex
//! `v`, which is the state order of the regular propagator. Spin 0 is ↑ and
//! spin 1 is ↓. The infinite line is simulated on a ring of `2t + 3` sites
//! centred on the start; amplitude never reaches the seam within `t` steps.

use std::f64::consts::FRAC_1_SQRT_2;

use num_complex::Complex64;
use rand::Rng;
use rayon::prelude::*;
use serde::Serialize;

use crate::colouring::EdgeColouring;
use crate::error::{Error, Result};
use crate::linalg::{c, CMat};
use crate::propagator::Coin;
use crate::seed::realization_rng;
use crate::stats::{loglog_fit, LineFit};

/// Largest accepted deviation of the total probability from 1.
pub const NORM_TOL: f64 = 1e-9;

/// `(1/√2) [[1, 1], [-1, 1]]` with unit lengths.
pub fn hadamard_coin() -> Coin {
    let h = FRAC_1_SQRT_2;
    let sigma = CMat::from_fn(2, 2, |i, j| c(if i == 1 && j == 0 { -h } else { h }, 0.0));
    Coin::new(sigma, vec![1.0, 1.0]).expect("Hadamard matrix is unitary")
}

/// Where each spin component moves, plus an optional per-site swap of the
/// two spin labels and their shifts.
#[derive(Debug, Clone, PartialEq)]
pub struct ShiftRule {
    dest: Vec<Vec<usize>>,
    swap: Vec<bool>,
}

impl ShiftRule {
    /// `dest[i][v]` is the vertex that spin `i` at `v` moves to.
    pub fn new(dest: Vec<Vec<usize>>) -> Result<Self> {
        let n = dest.first().map_or(0, Vec::len);
        if dest.is_empty() || n == 0 {
            return Err(Error::Empty("shift rule"));
        }
        for (i, d) in dest.iter().enumerate() {
            let mut seen = vec![false; n];
            if d.len() != n || d.iter().any(|&w| w >= n || std::mem::replace(&mut seen[w], true)) {
                return Err(Error::InvalidColouring(format!("shift of spin {i} is not a bijection")));
            }
        }
        Ok(ShiftRule {
            swap: vec![false; n],
            dest,
        })
    }

    /// Ring of `n` sites: ↑ moves to `v + 1`, ↓ to `v - 1`.
    pub fn ring(n: usize) -> Result<Self> {
        if n == 0 {
            return Err(Error::Empty("ring"));
        }
        Self::new(vec![
            (0..n).map(|v| (v + 1) % n).collect(),
            (0..n).map(|v| (v + n - 1) % n).collect(),
        ])
    }

    pub fn n_sites(&self) -> usize {
        self.swap.len()
    }

    pub fn n_spins(&self) -> usize {
        self.dest.len()
    }

    pub fn dest(&self, spin: usize, v: usize) -> usize {
        self.dest[spin][v]
    }

    pub fn swaps(&self) -> &[bool] {
        &self.swap
    }

    pub fn with_swaps(mut self, swap: Vec<bool>) -> Result<Self> {
        if swap.len() != self.n_sites() {
            return Err(Error::DimensionMismatch(format!(
                "{} swap flags for {} sites",
                swap.len(),
                self.n_sites()
            )));
        }
        if self.n_spins() != 2 && swap.iter().any(|&s| s) {
            return Err(Error::Domain("spin swaps need exactly two spins".into()));
        }
        self.swap = swap;
        Ok(self)
    }

    /// The edge colouring with `ρ_i = dest_i⁻¹` as row images. Swaps are
    /// site-dependent and have no colouring.
    pub fn to_colouring(&self) -> Result<EdgeColouring> {
        if self.swap.iter().any(|&s| s) {
            return Err(Error::Domain("a disordered rule is not a regular graph".into()));
        }
        let perms = self
            .dest
            .iter()
            .map(|d| {
                let mut inv = vec![0; d.len()];
                for (v, &w) in d.iter().enumerate() {
                    inv[w] = v;
                }
                inv
            })
            .collect();
        EdgeColouring::from_permutations(perms)
    }
}

/// Ring rule with each site independently swapped with probability 1/2.
pub fn disordered_rule(sites: usize, seed: u64) -> Result<ShiftRule> {
    let mut rng = realization_rng(seed, "disorder", 0);
    let swap = (0..sites).map(|_| rng.random_bool(0.5)).collect();
    ShiftRule::ring(sites)?.with_swaps(swap)
}

#[derive(Debug, Clone, PartialEq)]
pub struct WalkState {
    n: usize,
    d: usize,
    amps: Vec<Complex64>,
    t: usize,
    /// Index of the site reported as position 0.
    origin: usize,
}

impl WalkState {
    pub fn localized(n: usize, d: usize, vertex: usize, spin: usize) -> Result<Self> {
        if vertex >= n || spin >= d {
            return Err(Error::Domain(format!("site ({vertex}, {spin}) outside {n} x {d}")));
        }
        let mut amps = vec![c(0.0, 0.0); n * d];
        amps[spin * n + vertex] = c(1.0, 0.0);
        Ok(WalkState { n, d, amps, t: 0, origin: vertex })
    }

    /// Colour-major amplitudes; the norm must be 1 within 1e-12.
    pub fn from_amplitudes(n: usize, d: usize, amps: Vec<Complex64>, origin: usize) -> Result<Self> {
        if amps.len() != n * d {
            return Err(Error::DimensionMismatch(format!("{} amplitudes for {n} x {d}", amps.len())));
        }
        let state = WalkState { n, d, amps, t: 0, origin };
        let norm = state.norm_sqr();
        if (norm - 1.0).abs() > 1e-12 {
            return Err(Error::Unnormalised(norm));
        }
        Ok(state)
    }

    pub fn n_sites(&self) -> usize {
        self.n
    }

    pub fn amplitudes(&self) -> &[Complex64] {
        &self.amps
    }

    pub fn amplitude(&self, v: usize, spin: usize) -> Complex64 {
        self.amps[spin * self.n + v]
    }

    pub fn t(&self) -> usize {
        self.t
    }

    pub fn norm_sqr(&self) -> f64 {
        self.amps.iter().map(|a| a.norm_sqr()).sum()
    }

    pub fn distribution(&self) -> PositionDistribution {
        let positions = (0..self.n).map(|v| v as i64 - self.origin as i64).collect();
        let probabilities = (0..self.n)
            .map(|v| (0..self.d).map(|i| self.amplitude(v, i).norm_sqr()).sum())
            .collect();
        PositionDistribution {
            positions,
            probabilities,
            t: self.t,
        }
    }
}

/// Coin on every site, then the shift. The walk uses the coin's scattering
/// matrix `σ`, i.e. `C(k)` at `k = 0`.
pub fn walk_step(s: &WalkState, coin: &Coin, rule: &ShiftRule) -> Result<WalkState> {
    let (n, d) = (s.n, s.d);
    if coin.d() != d || rule.n_spins() != d {
        return Err(Error::DimensionMismatch(format!(
            "coin has dimension {}, rule has {} spins, state has {d}",
            coin.d(),
            rule.n_spins()
        )));
    }
    if rule.n_sites() != n {
        return Err(Error::DimensionMismatch(format!(
            "rule covers {} sites, state has {n}",
            rule.n_sites()
        )));
    }
    let sigma = coin.sigma();
    let mut out = vec![c(0.0, 0.0); n * d];
    for v in 0..n {
        for i in 0..d {
            let a: Complex64 = (0..d).map(|j| sigma[(i, j)] * s.amps[j * n + v]).sum();
            let label = if rule.swap[v] { 1 - i } else { i };
            out[label * n + rule.dest[label][v]] = a;
        }
    }
    Ok(WalkState {
        n,
        d,
        amps: out,
        t: s.t + 1,
        origin: s.origin,
    })
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct PositionDistribution {
    pub positions: Vec<i64>,
    pub probabilities: Vec<f64>,
    pub t: usize,
}

impl PositionDistribution {
    pub fn total(&self) -> f64 {
        self.probabilities.iter().sum()
    }

    pub fn probability_at(&self, x: i64) -> f64 {
        self.positions
            .iter()
            .position(|&p| p == x)
            .map_or(0.0, |i| self.probabilities[i])
    }

    /// `position,probability,t` lines with a header.
    pub fn to_csv(&self) -> String {
        let mut out = String::from("position,probability,t\n");
        for (x, p) in self.positions.iter().zip(&self.probabilities) {
            out.push_str(&format!("{x},{p},{}\n", self.t));
        }
        out
    }
}

pub fn run_walk(start: &WalkState, t: usize, coin: &Coin, rule: &ShiftRule) -> Result<PositionDistribution> {
    let mut s = start.clone();
    for _ in 0..t {
        s = walk_step(&s, coin, rule)?;
    }
    let dist = s.distribution();
    if (dist.total() - 1.0).abs() > 1e-10 {
        return Err(Error::Unnormalised(dist.total()));
    }
    Ok(dist)
}

/// Standard deviation of the position.
pub fn walk_spread(dist: &PositionDistribution) -> Result<f64> {
    let total = dist.total();
    if (total - 1.0).abs() > NORM_TOL {
        return Err(Error::Unnormalised(total));
    }
    let mean: f64 = dist.positions.iter().zip(&dist.probabilities).map(|(&x, p)| x as f64 * p).sum();
    let second: f64 = dist
        .positions
        .iter()
        .zip(&dist.probabilities)
        .map(|(&x, p)| (x as f64).powi(2) * p)
        .sum();
    Ok((second - mean * mean).max(0.0).sqrt())
}

/// Sites in the window that holds `t` steps of a line walk, and its centre.
pub fn line_window(t: usize) -> (usize, usize) {
    (2 * t + 3, t + 1)
}

/// `σ(t)` at each checkpoint of a single line walk started at `|0, spin⟩`.
/// With `disorder_seed` the shifts are randomly swapped per site.
pub fn line_spread_series(
    coin: &Coin,
    spin: usize,
    checkpoints: &[usize],
    disorder_seed: Option<u64>,
) -> Result<Vec<f64>> {
    let t_max = checkpoints.iter().copied().max().ok_or(Error::Empty("checkpoints"))?;
    let (sites, centre) = line_window(t_max);
    let rule = match disorder_seed {
        Some(seed) => disordered_rule(sites, seed)?,
        None => ShiftRule::ring(sites)?,
    };
    let mut s = WalkState::localized(sites, 2, centre, spin)?;
    let mut spreads = vec![0.0; checkpoints.len()];
    for step in 0..=t_max {
        for (k, _) in checkpoints.iter().enumerate().filter(|(_, &t)| t == step) {
            spreads[k] = walk_spread(&s.distribution())?;
        }
        if step < t_max {
            s = walk_step(&s, coin, &rule)?;
        }
    }
    Ok(spreads)
}

/// `σ_cl(t) = √t` for the unbiased classical walk.
pub fn classical_walk_reference(t: usize) -> f64 {
    (t as f64).sqrt()
}

/// Monte Carlo of the measured walk: after every coin toss the spin is
/// measured, so spin `j` follows spin `i` with probability `|C_ji|²`. Returns
/// the sample standard deviation of the position at each checkpoint.
pub fn measured_walk_spread(coin: &Coin, checkpoints: &[usize], trials: usize, seed: u64) -> Result<Vec<f64>> {
    if coin.d() != 2 {
        return Err(Error::Domain("the measured walk lives on the line (two spins)".into()));
    }
    if trials < 2 {
        return Err(Error::Empty("need at least two trials"));
    }
    let t_max = checkpoints.iter().copied().max().ok_or(Error::Empty("checkpoints"))?;
    let p_up: Vec<f64> = (0..2).map(|i| coin.sigma()[(0, i)].norm_sqr()).collect();
    let paths: Vec<Vec<i64>> = (0..trials)
        .into_par_iter()
        .map(|trial| {
            let mut rng = realization_rng(seed, "measured-walk", trial as u64);
            let (mut x, mut spin) = (0i64, 0usize);
            let mut at = vec![0i64; t_max + 1];
            for slot in at.iter_mut().skip(1) {
                spin = if rng.random_bool(p_up[spin]) { 0 } else { 1 };
                x += if spin == 0 { 1 } else { -1 };
                *slot = x;
            }
            checkpoints.iter().map(|&t| at[t]).collect()
        })
        .collect();
    let n = trials as f64;
    Ok((0..checkpoints.len())
        .map(|k| {
            let mean = paths.iter().map(|p| p[k] as f64).sum::<f64>() / n;
            (paths.iter().map(|p| (p[k] as f64 - mean).powi(2)).sum::<f64>() / n).sqrt()
        })
        .collect())
}

/// Power-law exponent of `σ(t)` from an unweighted log-log fit.
pub fn spread_exponent(ts: &[usize], spreads: &[f64]) -> Result<LineFit> {
    let xs: Vec<f64> = ts.iter().map(|&t| t as f64).collect();
    loglog_fit(&xs, spreads)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::linalg::{matrix_power, unitarity_deviation};
    use crate::propagator::build_regular_propagator;

    fn identity_coin() -> Coin {
        Coin::new(CMat::identity(2, 2), vec![1.0, 1.0]).unwrap()
    }

    #[test]
    fn hadamard_entries() {
        let h = hadamard_coin();
        let s = h.sigma();
        let r = FRAC_1_SQRT_2;
        assert!((s[(0, 0)] - r).norm() < 1e-16 && (s[(1, 0)] + r).norm() < 1e-16);
        assert!((s[(0, 1)] - r).norm() < 1e-16 && (s[(1, 1)] - r).norm() < 1e-16);
        assert!(unitarity_deviation(s) < 1e-15);
        for i in 0..2 {
            for j in 0..2 {
                assert!((s[(i, j)].norm_sqr() - 0.5).abs() < 1e-15);
            }
        }
    }

    #[test]
    fn one_hadamard_step() {
        let (sites, centre) = line_window(1);
        let rule = ShiftRule::ring(sites).unwrap();
        let s0 = WalkState::localized(sites, 2, centre, 0).unwrap();
        let s1 = walk_step(&s0, &hadamard_coin(), &rule).unwrap();
        let r = FRAC_1_SQRT_2;
        assert!((s1.amplitude(centre + 1, 0) - r).norm() < 1e-15);
        assert!((s1.amplitude(centre - 1, 1) + r).norm() < 1e-15);
        let d = s1.distribution();
        assert!((d.probability_at(1) - 0.5).abs() < 1e-15);
        assert!((d.probability_at(-1) - 0.5).abs() < 1e-15);
        assert_eq!(d.probability_at(0), 0.0);
    }

    #[test]
    fn identity_coin_drifts() {
        let rule = ShiftRule::ring(7).unwrap();
        let s = WalkState::localized(7, 2, 3, 0).unwrap();
        let s = walk_step(&s, &identity_coin(), &rule).unwrap();
        assert_eq!(s.amplitude(4, 0), c(1.0, 0.0));
    }

    #[test]
    fn two_steps_match_the_propagator() {
        let rule = ShiftRule::ring(9).unwrap();
        let coin = hadamard_coin();
        let s0 = WalkState::localized(9, 2, 4, 0).unwrap();
        let s2 = walk_step(&walk_step(&s0, &coin, &rule).unwrap(), &coin, &rule).unwrap();
        let p = build_regular_propagator(&rule.to_colouring().unwrap(), &coin, 0.0).unwrap();
        let m = matrix_power(p.matrix(), 2);
        for row in 0..18 {
            let want: Complex64 = (0..18).map(|col| m[(row, col)] * s0.amplitudes()[col]).sum();
            assert!((want - s2.amplitudes()[row]).norm() < 1e-14);
        }
    }

    #[test]
    fn start_distribution_and_spread() {
        let s = WalkState::localized(5, 2, 2, 1).unwrap();
        let d = run_walk(&s, 0, &hadamard_coin(), &ShiftRule::ring(5).unwrap()).unwrap();
        assert_eq!(d.probability_at(0), 1.0);
        assert_eq!(walk_spread(&d).unwrap(), 0.0);
        let pair = PositionDistribution {
            positions: vec![-1, 1],
            probabilities: vec![0.5, 0.5],
            t: 1,
        };
        assert!((walk_spread(&pair).unwrap() - 1.0).abs() < 1e-15);
        let bad = PositionDistribution {
            positions: vec![0],
            probabilities: vec![0.9],
            t: 0,
        };
        assert!(matches!(walk_spread(&bad), Err(Error::Unnormalised(_))));
    }

    #[test]
    fn locality_parity_and_norm() {
        let t = 30;
        let (sites, centre) = line_window(t);
        let rule = ShiftRule::ring(sites).unwrap();
        let mut s = WalkState::localized(sites, 2, centre, 0).unwrap();
        for step in 1..=t {
            s = walk_step(&s, &hadamard_coin(), &rule).unwrap();
            assert!((s.norm_sqr() - 1.0).abs() < 1e-12);
            let d = s.distribution();
            for (x, p) in d.positions.iter().zip(&d.probabilities) {
                if x.unsigned_abs() as usize > step || (x - step as i64).rem_euclid(2) == 1 {
                    assert_eq!(*p, 0.0, "t = {step}, x = {x}");
                }
            }
        }
    }

    #[test]
    fn shifts_commute_on_the_ring() {
        let rule = ShiftRule::ring(11).unwrap();
        for v in 0..11 {
            assert_eq!(rule.dest(0, rule.dest(1, v)), rule.dest(1, rule.dest(0, v)));
        }
    }

    #[test]
    fn disorder_rules() {
        let a = disordered_rule(50, 3).unwrap();
        assert_eq!(a, disordered_rule(50, 3).unwrap());
        assert_ne!(a, disordered_rule(50, 4).unwrap());
        assert!(a.swaps().iter().any(|&s| s) && a.swaps().iter().any(|&s| !s));
        assert!(a.to_colouring().is_err());
        let plain = ShiftRule::ring(50).unwrap().with_swaps(vec![false; 50]).unwrap();
        assert_eq!(plain, ShiftRule::ring(50).unwrap());
        // the disordered step is still unitary
        let mut s = WalkState::localized(50, 2, 25, 0).unwrap();
        for _ in 0..40 {
            s = walk_step(&s, &hadamard_coin(), &a).unwrap();
        }
        assert!((s.norm_sqr() - 1.0).abs() < 1e-12);
    }

    #[test]
    fn disorder_slows_spreading() {
        let ts = [50, 100, 200, 400];
        let clean = line_spread_series(&hadamard_coin(), 0, &ts, None).unwrap();
        let dirty = line_spread_series(&hadamard_coin(), 0, &ts, Some(12)).unwrap();
        let a_clean = spread_exponent(&ts, &clean).unwrap().slope;
        let a_dirty = spread_exponent(&ts, &dirty).unwrap().slope;
        assert!((a_clean - 1.0).abs() < 0.05);
        assert!(a_dirty < 0.9, "disordered exponent {a_dirty}");
    }

    #[test]
    fn classical_reference() {
        assert_eq!(classical_walk_reference(0), 0.0);
        assert_eq!(classical_walk_reference(100), 10.0);
        let s = measured_walk_spread(&hadamard_coin(), &[400], 10_000, 1).unwrap();
        assert!((s[0] / 20.0 - 1.0).abs() < 0.05);
    }

    #[test]
    fn mismatches_are_errors() {
        let s = WalkState::localized(5, 2, 0, 0).unwrap();
        assert!(walk_step(&s, &hadamard_coin(), &ShiftRule::ring(6).unwrap()).is_err());
        let coin3 = crate::propagator::fourier_coin(3, vec![1.0; 3]).unwrap();
        assert!(walk_step(&s, &coin3, &ShiftRule::ring(5).unwrap()).is_err());
        assert!(ShiftRule::new(vec![vec![0, 0]]).is_err());
        assert!(WalkState::from_amplitudes(1, 2, vec![c(1.0, 0.0), c(1.0, 0.0)], 0).is_err());
    }
}
