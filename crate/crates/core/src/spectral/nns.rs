use std::f64::consts::TAU;

use serde::Serialize;

use super::EigenphaseSet;
use crate::error::{Error, Result};

pub const DEFAULT_BIN_WIDTH: f64 = 0.05;

/// Normalised spacing histogram on bins `[i w, (i+1) w)`.
#[derive(Debug, Clone, Serialize)]
pub struct SpacingHistogram {
    pub bin_width: f64,
    /// Bin centres.
    pub s: Vec<f64>,
    pub density: Vec<f64>,
    pub counts: Vec<usize>,
    pub samples: usize,
}

impl SpacingHistogram {
    pub fn from_spacings(spacings: &[f64], bin_width: f64) -> Result<Self> {
        if spacings.is_empty() {
            return Err(Error::Empty("spacings"));
        }
        if !(bin_width > 0.0) {
            return Err(Error::Domain(format!("bin width {bin_width}")));
        }
        let max = spacings.iter().copied().fold(0.0, f64::max);
        let bins = (max / bin_width).floor() as usize + 1;
        let mut counts = vec![0; bins];
        for &s in spacings {
            counts[((s / bin_width).floor() as usize).min(bins - 1)] += 1;
        }
        let total = spacings.len() as f64;
        Ok(SpacingHistogram {
            bin_width,
            s: (0..bins).map(|i| (i as f64 + 0.5) * bin_width).collect(),
            density: counts.iter().map(|&c| c as f64 / (total * bin_width)).collect(),
            counts,
            samples: spacings.len(),
        })
    }

    /// `s,P,count` lines with a header.
    pub fn to_csv(&self) -> String {
        let mut out = String::from("s,P,count\n");
        for i in 0..self.s.len() {
            out.push_str(&format!("{},{},{}\n", self.s[i], self.density[i], self.counts[i]));
        }
        out
    }
}

/// Circular nearest-neighbour spacings unfolded to unit mean, `N·gap/2π`.
pub fn unfolded_spacings(set: &EigenphaseSet) -> Result<Vec<f64>> {
    let p = set.phases();
    if p.len() < 2 {
        return Err(Error::Empty("spacing statistics need at least two phases"));
    }
    let scale = p.len() as f64 / TAU;
    let mut out: Vec<f64> = p.windows(2).map(|w| (w[1] - w[0]) * scale).collect();
    out.push((TAU + p[0] - p[p.len() - 1]) * scale);
    Ok(out)
}

pub fn pooled_spacings(sets: &[EigenphaseSet]) -> Result<Vec<f64>> {
    let mut all = Vec::new();
    for set in sets {
        all.extend(unfolded_spacings(set)?);
    }
    Ok(all)
}

/// Histogram of unfolded spacings pooled over all sets.
pub fn nns(sets: &[EigenphaseSet], bin_width: f64) -> Result<SpacingHistogram> {
    if sets.is_empty() {
        return Err(Error::Empty("no spectra"));
    }
    SpacingHistogram::from_spacings(&pooled_spacings(sets)?, bin_width)
}

/// Kolmogorov–Smirnov distance `sup |F_emp - F|`.
pub fn ks_distance(samples: &[f64], cdf: impl Fn(f64) -> f64) -> Result<f64> {
    if samples.is_empty() {
        return Err(Error::Empty("samples"));
    }
    let mut sorted = samples.to_vec();
    sorted.sort_by(f64::total_cmp);
    let n = sorted.len() as f64;
    Ok(sorted
        .iter()
        .enumerate()
        .map(|(i, &x)| {
            let f = cdf(x);
            (f - i as f64 / n).abs().max(((i + 1) as f64 / n - f).abs())
        })
        .fold(0.0, f64::max))
}
