//! Experiment configuration: one JSON document, unknown keys rejected.

use std::fmt;
use std::path::PathBuf;

use serde::{Deserialize, Serialize};

use qgraph::colouring::{colour_from_group, random_latin_colouring, EdgeColouring, GroupSpec};
use qgraph::graph::{make_complete, make_lattice, Digraph};
use qgraph::linalg::random_unitary;
use qgraph::propagator::{fourier_coin, Coin, QuantumGraph, VertexScatteringSet};
use qgraph::qwalk::hadamard_coin;
use qgraph::seed::{realization_rng, stage_seed};
use qgraph::spectral::{AveragingMode, ColouringSource, Construction, EnsembleSpec};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum ExperimentKind {
    Build,
    Spectrum,
    Formfactor,
    Nns,
    Gap,
    GapScaling,
    Walk,
    TraceCheck,
}

impl fmt::Display for ExperimentKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let s = serde_json::to_value(self).expect("unit variant");
        write!(f, "{}", s.as_str().unwrap_or("?"))
    }
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ExperimentConfig {
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub experiment: Option<ExperimentKind>,
    /// Master seed; every other seed is derived from it unless given.
    #[serde(default)]
    pub seed: u64,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub threads: Option<usize>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub construction: Option<ConstructionConfig>,
    /// Wavenumber for single-propagator experiments.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub k: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub ensemble: Option<EnsembleConfig>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub formfactor: Option<FormFactorConfig>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub nns: Option<NnsConfig>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub walk: Option<WalkConfig>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub gap_scaling: Option<GapScalingConfig>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub trace_check: Option<TraceCheckConfig>,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(tag = "family", rename_all = "kebab-case", deny_unknown_fields)]
pub enum ConstructionConfig {
    /// Star graph modelled on its `n_e` arcs.
    Star { n_e: usize, lengths: LengthsConfig },
    Lattice {
        d: usize,
        side: usize,
        scattering: ScatteringKind,
        lengths: LengthsConfig,
    },
    Complete {
        n: usize,
        scattering: ScatteringKind,
        lengths: LengthsConfig,
    },
    /// Explicit arcs, or a graph JSON file via `path`.
    Graph {
        #[serde(default, skip_serializing_if = "Option::is_none")]
        n: Option<usize>,
        #[serde(default, skip_serializing_if = "Option::is_none")]
        arcs: Option<Vec<[usize; 2]>>,
        #[serde(default, skip_serializing_if = "Option::is_none")]
        path: Option<PathBuf>,
        scattering: ScatteringKind,
        lengths: LengthsConfig,
    },
    Regular { colouring: ColouringConfig, coin: CoinConfig },
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum ScatteringKind {
    KottosSmilansky,
    Fourier,
    /// Haar-random per vertex, seeded from the master seed.
    Random,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(untagged, deny_unknown_fields)]
pub enum LengthsConfig {
    Values { values: Vec<f64> },
    /// Uniform in `[min, max)`.
    Random {
        #[serde(default, skip_serializing_if = "Option::is_none")]
        seed: Option<u64>,
        min: f64,
        max: f64,
    },
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(tag = "source", rename_all = "kebab-case", deny_unknown_fields)]
pub enum ColouringConfig {
    Group { group: GroupSpec },
    /// A Jacobson–Matthews colouring of `K^n`; fresh per realization in
    /// ensembles unless `seed` pins one square.
    Latin {
        n: usize,
        #[serde(default, skip_serializing_if = "Option::is_none")]
        seed: Option<u64>,
    },
    File { path: PathBuf },
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "kebab-case", deny_unknown_fields)]
pub enum CoinConfig {
    Fourier { d: usize, lengths: LengthsConfig },
    Hadamard,
    /// Haar-random `d × d` coin, seeded from the master seed.
    Random { d: usize, lengths: LengthsConfig },
}

impl CoinConfig {
    pub fn d(&self) -> usize {
        match self {
            CoinConfig::Fourier { d, .. } | CoinConfig::Random { d, .. } => *d,
            CoinConfig::Hadamard => 2,
        }
    }
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct EnsembleConfig {
    pub mode: ModeKind,
    /// Wavenumber window of a `k-sweep`.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub k_min: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub k_max: Option<f64>,
    pub realizations: usize,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub seed: Option<u64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub remove_coin_from_nns: Option<bool>,
    #[serde(default)]
    pub remove_coin_from_form_factor: bool,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum ModeKind {
    RandomPhase,
    KSweep,
}

impl EnsembleConfig {
    pub fn averaging(&self) -> Result<AveragingMode, String> {
        match (self.mode, self.k_min, self.k_max) {
            (ModeKind::RandomPhase, None, None) => Ok(AveragingMode::RandomPhase),
            (ModeKind::RandomPhase, _, _) => Err("k_min and k_max only apply to k-sweep".into()),
            (ModeKind::KSweep, Some(k_min), Some(k_max)) => {
                if k_min < k_max && k_min.is_finite() && k_max.is_finite() {
                    Ok(AveragingMode::KSweep { k_min, k_max })
                } else {
                    Err(format!("empty window [{k_min}, {k_max})"))
                }
            }
            (ModeKind::KSweep, _, _) => Err("k-sweep needs k_min and k_max".into()),
        }
    }
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct FormFactorConfig {
    /// Explicit powers `n`; otherwise `1..=n_max`.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub n: Option<Vec<usize>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub n_max: Option<usize>,
    #[serde(default)]
    pub smooth: bool,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct NnsConfig {
    #[serde(default = "default_bin_width")]
    pub bin_width: f64,
}

fn default_bin_width() -> f64 {
    qgraph::spectral::DEFAULT_BIN_WIDTH
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct WalkConfig {
    pub t: usize,
    #[serde(default)]
    pub start_spin: usize,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub disorder_seed: Option<u64>,
    /// Steps at which the spread is recorded; default 50, 100, ... up to `t`.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub checkpoints: Option<Vec<usize>>,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(tag = "family", rename_all = "kebab-case", deny_unknown_fields)]
pub enum GapScalingConfig {
    Star { sizes: Vec<usize> },
    Lattice { d: usize, sides: Vec<usize> },
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct TraceCheckConfig {
    #[serde(default = "default_n_max")]
    pub n_max: usize,
    #[serde(default = "default_tolerance")]
    pub tolerance: f64,
}

fn default_n_max() -> usize {
    8
}

fn default_tolerance() -> f64 {
    1e-8
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum Level {
    Error,
    Warning,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Diagnostic {
    pub level: Level,
    pub field: String,
    pub message: String,
}

impl fmt::Display for Diagnostic {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let level = match self.level {
            Level::Error => "error",
            Level::Warning => "warning",
        };
        write!(f, "{level}: {}: {}", self.field, self.message)
    }
}

struct Diagnostics(Vec<Diagnostic>);

impl Diagnostics {
    fn error(&mut self, field: &str, message: impl Into<String>) {
        self.0.push(Diagnostic {
            level: Level::Error,
            field: field.into(),
            message: message.into(),
        });
    }

    fn warning(&mut self, field: &str, message: impl Into<String>) {
        self.0.push(Diagnostic {
            level: Level::Warning,
            field: field.into(),
            message: message.into(),
        });
    }
}

pub fn parse_config(text: &str) -> Result<ExperimentConfig, serde_json::Error> {
    serde_json::from_str(text)
}

fn check_lengths(diag: &mut Diagnostics, field: &str, lengths: &LengthsConfig, count: Option<usize>) {
    match lengths {
        LengthsConfig::Values { values } => {
            for (i, l) in values.iter().enumerate() {
                if !(*l > 0.0 && l.is_finite()) {
                    diag.error(&format!("{field}.values[{i}]"), format!("length must be positive, got {l}"));
                }
            }
            if let Some(n) = count {
                if values.len() != n {
                    diag.error(&format!("{field}.values"), format!("{} lengths given, {n} needed", values.len()));
                }
            }
        }
        LengthsConfig::Random { min, max, .. } => {
            if !(*min > 0.0 && min.is_finite()) {
                diag.error(&format!("{field}.min"), format!("length must be positive, got {min}"));
            }
            if !(max > min && max.is_finite()) {
                diag.error(&format!("{field}.max"), format!("must exceed min ({min}), got {max}"));
            }
        }
    }
}

/// Colour count of a colouring config, if it can be known without
/// computation beyond reading a file.
fn colouring_d(c: &ColouringConfig) -> Result<usize, String> {
    match c {
        ColouringConfig::Group { group } => Ok(group.order()),
        ColouringConfig::Latin { n, .. } => Ok(*n),
        ColouringConfig::File { path } => EdgeColouring::read_json(path)
            .map(|c| c.n_colours())
            .map_err(|e| format!("{}: {e}", path.display())),
    }
}

impl ExperimentConfig {
    /// Checks every referenced parameter without running anything.
    pub fn validate(&self, kind: ExperimentKind) -> Vec<Diagnostic> {
        let mut diag = Diagnostics(Vec::new());
        if let Some(declared) = self.experiment {
            if declared != kind {
                diag.error("experiment", format!("config declares {declared} but the command runs {kind}"));
            }
        }
        if self.threads == Some(0) {
            diag.error("threads", "must be at least 1");
        }
        let needs_construction = !matches!(kind, ExperimentKind::Walk | ExperimentKind::GapScaling);
        match (&self.construction, needs_construction) {
            (None, true) => diag.error("construction", format!("required for {kind}")),
            (Some(c), _) => self.validate_construction(&mut diag, c, kind),
            (None, false) => {}
        }
        if matches!(kind, ExperimentKind::Build | ExperimentKind::Spectrum | ExperimentKind::Gap | ExperimentKind::TraceCheck)
            && !self.k.is_some_and(f64::is_finite)
        {
            diag.error("k", format!("a finite wavenumber is required for {kind}"));
        }
        if matches!(kind, ExperimentKind::Formfactor | ExperimentKind::Nns) {
            match &self.ensemble {
                None => diag.error("ensemble", format!("required for {kind}")),
                Some(e) => {
                    if e.realizations == 0 {
                        diag.error("ensemble.realizations", "must be at least 1");
                    } else if e.realizations < 100 {
                        diag.warning("ensemble.realizations", "fewer than 100 realizations give noisy statistics");
                    }
                    if let Err(m) = e.averaging() {
                        diag.error("ensemble.mode", m);
                    }
                }
            }
        }
        if kind == ExperimentKind::Formfactor {
            match &self.formfactor {
                None => diag.error("formfactor", "required for formfactor"),
                Some(f) => match (&f.n, f.n_max) {
                    (Some(ns), None) if ns.is_empty() || ns.contains(&0) => {
                        diag.error("formfactor.n", "must be a non-empty list of positive integers")
                    }
                    (Some(_), None) => {}
                    (None, Some(0)) => diag.error("formfactor.n_max", "must be at least 1"),
                    (None, Some(_)) => {}
                    _ => diag.error("formfactor", "give exactly one of n and n_max"),
                },
            }
        }
        if let Some(n) = &self.nns {
            if !(n.bin_width > 0.0) {
                diag.error("nns.bin_width", "must be positive");
            }
        }
        if kind == ExperimentKind::Walk {
            match &self.walk {
                None => diag.error("walk", "required for walk"),
                Some(w) => {
                    if w.t == 0 {
                        diag.error("walk.t", "must be at least 1");
                    }
                    if w.start_spin > 1 {
                        diag.error("walk.start_spin", "must be 0 (up) or 1 (down)");
                    }
                    if let Some(cp) = &w.checkpoints {
                        if cp.iter().any(|&c| c == 0 || c > w.t) {
                            diag.error("walk.checkpoints", format!("entries must lie in 1..={}", w.t));
                        }
                    }
                }
            }
            if let Some(ConstructionConfig::Regular { coin, .. }) = &self.construction {
                if coin.d() != 2 {
                    diag.error("construction.coin.d", "line walks need a two-dimensional coin");
                }
            } else if self.construction.is_some() {
                diag.error("construction", "walks take a regular construction (colouring and coin) or none");
            }
        }
        if kind == ExperimentKind::GapScaling {
            match &self.gap_scaling {
                None => diag.error("gap_scaling", "required for gap-scaling"),
                Some(GapScalingConfig::Star { sizes }) => {
                    if sizes.len() < 2 {
                        diag.error("gap_scaling.sizes", "need at least two sizes");
                    }
                    if sizes.iter().any(|&s| s < 5) {
                        diag.error("gap_scaling.sizes", "star sizes below 5 have no finite gap");
                    }
                }
                Some(GapScalingConfig::Lattice { d, sides }) => {
                    if *d == 0 {
                        diag.error("gap_scaling.d", "must be at least 1");
                    }
                    if sides.len() < 2 {
                        diag.error("gap_scaling.sides", "need at least two sizes");
                    }
                    if sides.iter().any(|&s| s < 3) {
                        diag.error("gap_scaling.sides", "sides must be at least 3");
                    }
                    if sides.iter().any(|&s| s % 2 == 0) {
                        diag.warning("gap_scaling.sides", "even sides are bipartite: |Λ_1| = 1 and the gap is 0");
                    }
                }
            }
        }
        if kind == ExperimentKind::TraceCheck {
            if let Some(t) = &self.trace_check {
                if t.n_max == 0 || t.n_max > qgraph::spectral::DEFAULT_ORBIT_CAP {
                    diag.error(
                        "trace_check.n_max",
                        format!("must lie in 1..={}", qgraph::spectral::DEFAULT_ORBIT_CAP),
                    );
                }
            }
            if matches!(self.construction, Some(ConstructionConfig::Star { .. } | ConstructionConfig::Regular { .. })) {
                diag.error("construction.family", "trace-check needs a graph with vertex scattering");
            }
        }
        diag.0
    }

    fn validate_construction(&self, diag: &mut Diagnostics, c: &ConstructionConfig, kind: ExperimentKind) {
        match c {
            ConstructionConfig::Star { n_e, lengths } => {
                if *n_e < 1 {
                    diag.error("construction.n_e", "must be at least 1");
                }
                check_lengths(diag, "construction.lengths", lengths, Some(*n_e));
            }
            ConstructionConfig::Lattice { d, side, lengths, .. } => {
                if *d == 0 {
                    diag.error("construction.d", "must be at least 1");
                }
                if *side < 2 {
                    diag.error("construction.side", "must be at least 2");
                }
                check_lengths(diag, "construction.lengths", lengths, Some(2 * d * side.pow(*d as u32)));
            }
            ConstructionConfig::Complete { n, lengths, .. } => {
                if *n == 0 {
                    diag.error("construction.n", "must be at least 1");
                }
                check_lengths(diag, "construction.lengths", lengths, Some(n * n));
            }
            ConstructionConfig::Graph {
                n,
                arcs,
                path,
                lengths,
                ..
            } => match self.graph() {
                Err(e) => {
                    let field = if path.is_some() { "construction.path" } else { "construction.arcs" };
                    diag.error(field, e);
                }
                Ok(g) => {
                    if path.is_some() && (n.is_some() || arcs.is_some()) {
                        diag.error("construction", "give either path or n and arcs");
                    }
                    if let Err(e) = g.check_quantisable() {
                        diag.error("construction.arcs", e.to_string());
                    }
                    check_lengths(diag, "construction.lengths", lengths, Some(g.n_arcs()));
                }
            },
            ConstructionConfig::Regular { colouring, coin } => {
                match colouring_d(colouring) {
                    Err(e) => diag.error("construction.colouring.path", e),
                    Ok(cd) if cd != coin.d() => diag.error(
                        "construction.coin.d",
                        format!("coin.d = {} does not match colouring.d = {cd}", coin.d()),
                    ),
                    Ok(_) => {}
                }
                if let ColouringConfig::Group { group } = colouring {
                    if let Err(e) = group.cayley_table() {
                        diag.error("construction.colouring.group", e.to_string());
                    }
                }
                if let ColouringConfig::Latin { n: 0, .. } = colouring {
                    diag.error("construction.colouring.n", "must be at least 1");
                }
                match coin {
                    CoinConfig::Fourier { d, lengths } | CoinConfig::Random { d, lengths } => {
                        if *d == 0 {
                            diag.error("construction.coin.d", "must be at least 1");
                        }
                        check_lengths(diag, "construction.coin.lengths", lengths, Some(*d));
                    }
                    CoinConfig::Hadamard => {}
                }
                if kind == ExperimentKind::TraceCheck {
                    diag.error("construction.family", "trace-check needs a graph with vertex scattering");
                }
            }
        }
    }

    fn graph(&self) -> Result<Digraph, String> {
        let Some(c) = &self.construction else {
            return Err("no construction".into());
        };
        let g = match c {
            ConstructionConfig::Lattice { d, side, .. } => make_lattice(*d, *side),
            ConstructionConfig::Complete { n, .. } => make_complete(*n),
            ConstructionConfig::Graph { n, arcs, path, .. } => match (path, n, arcs) {
                (Some(p), _, _) => Digraph::read_json(p),
                (None, Some(n), Some(arcs)) => Digraph::new(*n, arcs.iter().map(|a| (a[0], a[1]))),
                _ => return Err("give either path or n and arcs".into()),
            },
            _ => return Err("not a graph construction".into()),
        };
        g.map_err(|e| e.to_string())
    }
}

/// Seeds actually used by a run, recorded in the manifest.
#[derive(Debug, Clone, Default, Serialize)]
pub struct Seeds {
    pub master: u64,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub lengths: Option<u64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub scattering: Option<u64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub colouring: Option<u64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub ensemble: Option<u64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub walk: Option<u64>,
}

fn realise_lengths(cfg: &LengthsConfig, count: usize, master: u64, stage: &str, seeds: &mut Option<u64>) -> Vec<f64> {
    use rand::Rng;
    match cfg {
        LengthsConfig::Values { values } => values.clone(),
        LengthsConfig::Random { seed, min, max } => {
            let s = seed.unwrap_or_else(|| stage_seed(master, stage));
            *seeds = Some(s);
            let mut rng = realization_rng(s, stage, 0);
            (0..count).map(|_| rng.random_range(*min..*max)).collect()
        }
    }
}

/// The single-propagator form of a construction.
pub enum Built {
    Graph(QuantumGraph),
    Star(Vec<f64>),
    Regular(EdgeColouring, Coin),
}

impl ExperimentConfig {
    fn build_coin(&self, coin: &CoinConfig, seeds: &mut Seeds) -> qgraph::Result<Coin> {
        match coin {
            CoinConfig::Hadamard => Ok(hadamard_coin()),
            CoinConfig::Fourier { d, lengths } => {
                fourier_coin(*d, realise_lengths(lengths, *d, self.seed, "coin-lengths", &mut seeds.lengths))
            }
            CoinConfig::Random { d, lengths } => {
                let l = realise_lengths(lengths, *d, self.seed, "coin-lengths", &mut seeds.lengths);
                let s = stage_seed(self.seed, "coin");
                seeds.scattering = Some(s);
                Coin::new(random_unitary(*d, &mut realization_rng(s, "coin", 0)), l)
            }
        }
    }

    /// Materialises the construction for a single propagator; a Latin
    /// colouring without a pinned seed draws one from the master seed.
    pub fn build(&self) -> qgraph::Result<(Built, Seeds)> {
        let mut seeds = Seeds {
            master: self.seed,
            ..Seeds::default()
        };
        let c = self
            .construction
            .as_ref()
            .ok_or(qgraph::Error::Empty("construction"))?;
        let built = match c {
            ConstructionConfig::Star { n_e, lengths } => {
                Built::Star(realise_lengths(lengths, *n_e, self.seed, "lengths", &mut seeds.lengths))
            }
            ConstructionConfig::Lattice { scattering, lengths, .. }
            | ConstructionConfig::Complete { scattering, lengths, .. }
            | ConstructionConfig::Graph { scattering, lengths, .. } => {
                let g = self.graph().map_err(qgraph::Error::Parse)?;
                let scat = match scattering {
                    ScatteringKind::KottosSmilansky => VertexScatteringSet::kottos_smilansky(&g)?,
                    ScatteringKind::Fourier => VertexScatteringSet::fourier(&g)?,
                    ScatteringKind::Random => {
                        let s = stage_seed(self.seed, "scattering");
                        seeds.scattering = Some(s);
                        VertexScatteringSet::haar_random(&g, &mut realization_rng(s, "scattering", 0))?
                    }
                };
                let l = realise_lengths(lengths, g.n_arcs(), self.seed, "lengths", &mut seeds.lengths);
                Built::Graph(QuantumGraph::new(g, scat, l)?)
            }
            ConstructionConfig::Regular { colouring, coin } => {
                let col = match colouring {
                    ColouringConfig::Group { group } => colour_from_group(group)?,
                    ColouringConfig::File { path } => EdgeColouring::read_json(path)?,
                    ColouringConfig::Latin { n, seed } => {
                        let s = seed.unwrap_or_else(|| stage_seed(self.seed, "colouring"));
                        seeds.colouring = Some(s);
                        random_latin_colouring(*n, s)?
                    }
                };
                Built::Regular(col, self.build_coin(coin, &mut seeds)?)
            }
        };
        Ok((built, seeds))
    }

    /// The ensemble described by `construction` and `ensemble`.
    pub fn ensemble_spec(&self) -> qgraph::Result<(EnsembleSpec, Seeds)> {
        let e = self.ensemble.as_ref().ok_or(qgraph::Error::Empty("ensemble"))?;
        let fresh_latin = matches!(
            self.construction,
            Some(ConstructionConfig::Regular {
                colouring: ColouringConfig::Latin { seed: None, .. },
                ..
            })
        );
        let (built, mut seeds) = self.build()?;
        let construction = match built {
            Built::Graph(g) => Construction::Generic(g),
            Built::Star(lengths) => Construction::Star { lengths },
            Built::Regular(col, coin) => {
                let colouring = if fresh_latin {
                    seeds.colouring = None;
                    ColouringSource::RandomLatin { n: col.n_vertices() }
                } else {
                    ColouringSource::Fixed(col)
                };
                Construction::Regular { colouring, coin }
            }
        };
        let ensemble_seed = e.seed.unwrap_or_else(|| stage_seed(self.seed, "ensemble"));
        seeds.ensemble = Some(ensemble_seed);
        let mut spec = EnsembleSpec::new(
            construction,
            e.averaging().map_err(qgraph::Error::Domain)?,
            e.realizations,
            ensemble_seed,
        )?;
        if let Some(r) = e.remove_coin_from_nns {
            spec.remove_coin_from_nns = r;
        }
        spec.remove_coin_from_form_factor = e.remove_coin_from_form_factor;
        Ok((spec, seeds))
    }
}
