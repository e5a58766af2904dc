use std::fs;
use std::path::{Path, PathBuf};
use std::time::Instant;

use serde::Serialize;
use serde_json::json;
use sha2::{Digest, Sha256};

use qgraph::classical::{diffusive_transition, gap_scaling_from_gaps, spectral_gap, to_stochastic, StochasticMatrix};
use qgraph::propagator::{build_regular_propagator, star_propagator, Propagator};
use qgraph::qwalk::{
    classical_walk_reference, disordered_rule, hadamard_coin, line_spread_series, line_window, run_walk, ShiftRule,
    WalkState,
};
use qgraph::spectral::{
    eigenphases, form_factor_from_spectra, ks_distance, nns, periodic_orbit_trace, pooled_spacings, run_ensemble,
    smooth_boxcar, spacing_cdf, trace_power, RmtKind,
};

use crate::config::{Built, ConstructionConfig, ExperimentConfig, ExperimentKind, GapScalingConfig, Seeds};

#[derive(Debug, thiserror::Error)]
pub enum RunError {
    #[error("invalid config: {0}")]
    Config(String),
    #[error("numerical failure: {0}")]
    Numerical(#[from] qgraph::Error),
    #[error("{0}")]
    Io(#[from] std::io::Error),
}

impl RunError {
    pub fn exit_code(&self) -> i32 {
        match self {
            RunError::Config(_) => 2,
            RunError::Numerical(_) => 3,
            RunError::Io(_) => 1,
        }
    }
}

/// Files written by one run, in write order.
pub struct Outputs {
    dir: PathBuf,
    files: Vec<(String, String)>,
}

impl Outputs {
    fn new(dir: &Path) -> std::io::Result<Self> {
        fs::create_dir_all(dir)?;
        Ok(Outputs {
            dir: dir.to_path_buf(),
            files: Vec::new(),
        })
    }

    fn write(&mut self, name: &str, contents: &str) -> std::io::Result<()> {
        fs::write(self.dir.join(name), contents)?;
        let digest = hex::encode(Sha256::digest(contents.as_bytes()));
        self.files.push((name.to_string(), digest));
        Ok(())
    }
}

#[derive(Serialize)]
struct Manifest<'a> {
    command: String,
    version: &'static str,
    config: &'a ExperimentConfig,
    seeds: &'a Seeds,
    threads: usize,
    wall_time_s: f64,
    outputs: serde_json::Map<String, serde_json::Value>,
}

/// Runs `kind` and writes its outputs plus `manifest.json` under `out`.
/// Returns a one-line summary.
pub fn run(kind: ExperimentKind, cfg: &ExperimentConfig, out: &Path, threads: usize) -> Result<String, RunError> {
    let start = Instant::now();
    let mut outputs = Outputs::new(out)?;
    let (summary, seeds) = match kind {
        ExperimentKind::Build => build(cfg, &mut outputs)?,
        ExperimentKind::Spectrum => spectrum(cfg, &mut outputs)?,
        ExperimentKind::Formfactor => formfactor(cfg, &mut outputs)?,
        ExperimentKind::Nns => spacing(cfg, &mut outputs)?,
        ExperimentKind::Gap => gap(cfg, &mut outputs)?,
        ExperimentKind::GapScaling => gap_scaling(cfg, &mut outputs)?,
        ExperimentKind::Walk => walk(cfg, &mut outputs)?,
        ExperimentKind::TraceCheck => trace_check(cfg, &mut outputs)?,
    };
    let manifest = Manifest {
        command: kind.to_string(),
        version: env!("CARGO_PKG_VERSION"),
        config: cfg,
        seeds: &seeds,
        threads,
        wall_time_s: start.elapsed().as_secs_f64(),
        outputs: outputs
            .files
            .iter()
            .map(|(f, h)| (f.clone(), json!({ "sha256": h })))
            .collect(),
    };
    let text = serde_json::to_string_pretty(&manifest).map_err(qgraph::Error::from)?;
    fs::write(out.join("manifest.json"), text + "\n")?;
    Ok(summary)
}

fn k_of(cfg: &ExperimentConfig) -> Result<f64, RunError> {
    cfg.k.ok_or_else(|| RunError::Config("k is required".into()))
}

fn propagator(cfg: &ExperimentConfig) -> Result<(Propagator, Seeds), RunError> {
    let k = k_of(cfg)?;
    let (built, seeds) = cfg.build()?;
    let p = match built {
        Built::Graph(g) => g.propagator(k)?,
        Built::Star(lengths) => star_propagator(lengths.len(), &lengths, k)?,
        Built::Regular(colouring, coin) => build_regular_propagator(&colouring, &coin, k)?,
    };
    Ok((p, seeds))
}

fn build(cfg: &ExperimentConfig, out: &mut Outputs) -> Result<(String, Seeds), RunError> {
    let (p, seeds) = propagator(cfg)?;
    out.write("propagator.json", &p.to_json(Some(cfg.seed)))?;
    Ok((format!("propagator of dimension {}", p.dim()), seeds))
}

fn spectrum(cfg: &ExperimentConfig, out: &mut Outputs) -> Result<(String, Seeds), RunError> {
    let (p, seeds) = propagator(cfg)?;
    let set = eigenphases(&p)?;
    let mut csv = String::from("index,phase\n");
    for (i, theta) in set.phases().iter().enumerate() {
        csv.push_str(&format!("{i},{theta}\n"));
    }
    out.write("spectrum.csv", &csv)?;
    Ok((format!("{} eigenphases", set.len()), seeds))
}

fn formfactor(cfg: &ExperimentConfig, out: &mut Outputs) -> Result<(String, Seeds), RunError> {
    let ff = cfg
        .formfactor
        .as_ref()
        .ok_or_else(|| RunError::Config("formfactor section is required".into()))?;
    let (spec, seeds) = cfg.ensemble_spec()?;
    let n_list: Vec<usize> = match (&ff.n, ff.n_max) {
        (Some(n), _) => n.clone(),
        (None, Some(m)) => (1..=m).collect(),
        (None, None) => return Err(RunError::Config("give formfactor.n or formfactor.n_max".into())),
    };
    let samples = run_ensemble(&spec)?;
    let sets: Vec<_> = samples
        .iter()
        .map(|s| {
            if spec.remove_coin_from_form_factor {
                s.without_coin()
            } else {
                s.phases.clone()
            }
        })
        .collect();
    let mut curve = form_factor_from_spectra(&sets, &n_list)?;
    curve.realizations = spec.realizations;
    out.write("formfactor.csv", &curve.to_csv())?;
    if ff.smooth {
        out.write("formfactor_smoothed.csv", &smooth_boxcar(&curve).to_csv())?;
    }
    Ok((
        format!("K(τ) at {} points over {} realizations", curve.n.len(), spec.realizations),
        seeds,
    ))
}

fn spacing(cfg: &ExperimentConfig, out: &mut Outputs) -> Result<(String, Seeds), RunError> {
    let bin_width = cfg
        .nns
        .as_ref()
        .map_or(qgraph::spectral::DEFAULT_BIN_WIDTH, |n| n.bin_width);
    let (spec, seeds) = cfg.ensemble_spec()?;
    let sets: Vec<_> = run_ensemble(&spec)?
        .iter()
        .map(|s| {
            if spec.remove_coin_from_nns {
                s.without_coin()
            } else {
                s.phases.clone()
            }
        })
        .collect();
    let hist = nns(&sets, bin_width)?;
    out.write("nns.csv", &hist.to_csv())?;
    let spacings = pooled_spacings(&sets)?;
    let mut ks = serde_json::Map::new();
    for kind in [RmtKind::Poisson, RmtKind::Coe, RmtKind::Cue] {
        let d = ks_distance(&spacings, |s| spacing_cdf(kind, s))?;
        ks.insert(serde_json::to_value(kind).map_err(qgraph::Error::from)?.as_str().unwrap_or("?").into(), json!(d));
    }
    let summary = json!({ "samples": hist.samples, "bin_width": bin_width, "ks_distance": ks });
    out.write("nns_summary.json", &(serde_json::to_string_pretty(&summary).map_err(qgraph::Error::from)? + "\n"))?;
    Ok((format!("{} spacings", hist.samples), seeds))
}

fn gap(cfg: &ExperimentConfig, out: &mut Outputs) -> Result<(String, Seeds), RunError> {
    let (p, seeds) = propagator(cfg)?;
    let report = spectral_gap(&to_stochastic(&p))?;
    out.write("gap.json", &(report.to_json() + "\n"))?;
    out.write("gap_spectrum.csv", &report.spectrum_csv())?;
    Ok((format!("gap {:.6e}", report.gap), seeds))
}

fn star_transition(n_e: usize) -> Result<StochasticMatrix, RunError> {
    let p = star_propagator(n_e, &vec![1.0; n_e], 0.0)?;
    Ok(to_stochastic(&p))
}

fn gap_scaling(cfg: &ExperimentConfig, out: &mut Outputs) -> Result<(String, Seeds), RunError> {
    let gs = cfg
        .gap_scaling
        .as_ref()
        .ok_or_else(|| RunError::Config("gap_scaling section is required".into()))?;
    let family: Vec<StochasticMatrix> = match gs {
        GapScalingConfig::Star { sizes } => sizes.iter().map(|&n| star_transition(n)).collect::<Result<_, _>>()?,
        GapScalingConfig::Lattice { d, sides } => sides
            .iter()
            .map(|&s| diffusive_transition(*d, s))
            .collect::<Result<_, _>>()?,
    };
    let sizes: Vec<usize> = family.iter().map(StochasticMatrix::dim).collect();
    let gaps = family
        .iter()
        .map(|t| spectral_gap(t).map(|r| r.gap))
        .collect::<Result<Vec<_>, _>>()?;
    let mut csv = String::from("size,gap\n");
    for (n, g) in sizes.iter().zip(&gaps) {
        csv.push_str(&format!("{n},{g}\n"));
    }
    out.write("gap_scaling.csv", &csv)?;
    let report = gap_scaling_from_gaps(&sizes, &gaps)?;
    out.write(
        "gap_scaling.json",
        &(serde_json::to_string_pretty(&report).map_err(qgraph::Error::from)? + "\n"),
    )?;
    let seeds = Seeds {
        master: cfg.seed,
        ..Seeds::default()
    };
    Ok((format!("alpha {:.4}", report.alpha), seeds))
}

fn walk(cfg: &ExperimentConfig, out: &mut Outputs) -> Result<(String, Seeds), RunError> {
    let w = cfg
        .walk
        .as_ref()
        .ok_or_else(|| RunError::Config("walk section is required".into()))?;
    let (coin, mut seeds) = match &cfg.construction {
        Some(ConstructionConfig::Regular { .. }) => match cfg.build()? {
            (Built::Regular(_, coin), seeds) => (coin, seeds),
            _ => unreachable!("regular construction builds a regular graph"),
        },
        None => (
            hadamard_coin(),
            Seeds {
                master: cfg.seed,
                ..Seeds::default()
            },
        ),
        Some(_) => return Err(RunError::Config("walks take a regular construction or none".into())),
    };
    seeds.walk = w.disorder_seed;
    let checkpoints: Vec<usize> = match &w.checkpoints {
        Some(c) => c.clone(),
        None => {
            let mut c: Vec<usize> = (1..=w.t / 50).map(|i| 50 * i).collect();
            if c.last() != Some(&w.t) {
                c.push(w.t);
            }
            c
        }
    };
    let spreads = line_spread_series(&coin, w.start_spin, &checkpoints, w.disorder_seed)?;
    let mut csv = String::from("t,sigma,sigma_classical\n");
    for (t, s) in checkpoints.iter().zip(&spreads) {
        csv.push_str(&format!("{t},{s},{}\n", classical_walk_reference(*t)));
    }
    out.write("spread.csv", &csv)?;

    let (sites, centre) = line_window(w.t);
    let rule = match w.disorder_seed {
        Some(seed) => disordered_rule(sites, seed)?,
        None => ShiftRule::ring(sites)?,
    };
    let start = WalkState::localized(sites, 2, centre, w.start_spin)?;
    let dist = run_walk(&start, w.t, &coin, &rule)?;
    out.write("walk.csv", &dist.to_csv())?;
    Ok((
        format!("σ({}) = {:.4}", w.t, spreads.last().copied().unwrap_or(f64::NAN)),
        seeds,
    ))
}

fn trace_check(cfg: &ExperimentConfig, out: &mut Outputs) -> Result<(String, Seeds), RunError> {
    let k = k_of(cfg)?;
    let (n_max, tol) = cfg.trace_check.as_ref().map_or((8, 1e-8), |t| (t.n_max, t.tolerance));
    let (built, seeds) = cfg.build()?;
    let Built::Graph(g) = built else {
        return Err(RunError::Config("trace-check needs a graph with vertex scattering".into()));
    };
    let p = g.propagator(k)?;
    let mut csv = String::from("n,orbit_re,orbit_im,matrix_re,matrix_im,abs_error\n");
    let mut worst: f64 = 0.0;
    for n in 1..=n_max {
        let orbit = periodic_orbit_trace(&g, k, n, qgraph::spectral::DEFAULT_ORBIT_CAP)?;
        let direct = trace_power(&p, n);
        let err = (orbit - direct).norm();
        worst = worst.max(err);
        csv.push_str(&format!("{n},{},{},{},{},{err}\n", orbit.re, orbit.im, direct.re, direct.im));
    }
    out.write("trace_check.csv", &csv)?;
    if worst > tol {
        return Err(RunError::Numerical(qgraph::Error::Domain(format!(
            "orbit sum and Tr Sⁿ differ by {worst:.3e} > {tol:.1e}"
        ))));
    }
    Ok((format!("max |orbit - Tr Sⁿ| = {worst:.3e}"), seeds))
}
