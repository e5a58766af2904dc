//! Unitary propagators on the arc space of a digraph.
//!
//! Three constructions are provided:
//!
//! * generic quantum graphs `S = D V` from per-vertex scattering matrices,
//!   where `S[(ij), (jk)] = e^{ikL_ij} σ^{(j)}[(ij), (jk)]`;
//! * the star graph, modelled directly on its `n_E` arcs with the central
//!   scattering matrix `-δ + 2/n_E`;
//! * regular quantum graphs `S = (⊕ ρ_i)(C ⊗ I_n)` from an edge-colouring and
//!   a coin, in colour-major state order (state `i·n + a` is the arc of colour
//!   `i` leaving vertex `a`).
//!
//! The propagation phase `e^{ikL}` always multiplies the row of the arc it
//! belongs to. At a vertex, rows of `σ` follow the incoming arcs sorted by tail
//! and columns follow the outgoing arcs sorted by head.

use std::f64::consts::PI;

use num_complex::Complex64;
use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::colouring::{verify_colouring, EdgeColouring};
use crate::error::{Error, Result};
use crate::graph::Digraph;
use crate::linalg::{c, check_unitary, random_unitary, CMat};

/// Tolerance for `max |S^† S - I|` when a propagator or coin is built.
pub const UNITARITY_TOL: f64 = 1e-12;

fn check_lengths(lengths: &[f64]) -> Result<()> {
    match lengths.iter().find(|&&l| !(l > 0.0 && l.is_finite())) {
        Some(&l) => Err(Error::NonPositiveLength(l)),
        None => Ok(()),
    }
}

/// Kottos–Smilansky vertex scattering: `σ_ij = -δ_ij + 2/d`.
pub fn ks_vertex_scattering(d: usize) -> Result<CMat> {
    if d == 0 {
        return Err(Error::Domain("vertex degree must be at least 1".into()));
    }
    let off = 2.0 / d as f64;
    Ok(CMat::from_fn(d, d, |i, j| {
        c(if i == j { off - 1.0 } else { off }, 0.0)
    }))
}

/// The star graph's arc-space scattering matrix `-δ_ij + 2/n_E`.
pub fn star_scattering(n_e: usize) -> Result<CMat> {
    ks_vertex_scattering(n_e)
}

/// Discrete Fourier matrix `e^{2πi jl/d}/√d`, indices `0..d`.
pub fn fourier_matrix(d: usize) -> CMat {
    let norm = (d as f64).sqrt();
    CMat::from_fn(d, d, |j, l| {
        Complex64::cis(2.0 * PI * ((j * l) % d) as f64 / d as f64) / norm
    })
}

/// Local scattering `σ` with one length per colour; the realised coin is
/// `C(k) = diag(e^{ikL_j}) σ`.
#[derive(Debug, Clone)]
pub struct Coin {
    sigma: CMat,
    lengths: Vec<f64>,
}

impl Coin {
    pub fn new(sigma: CMat, lengths: Vec<f64>) -> Result<Self> {
        if sigma.nrows() != sigma.ncols() || sigma.nrows() != lengths.len() {
            return Err(Error::DimensionMismatch(format!(
                "coin matrix is {}x{} but {} lengths were given",
                sigma.nrows(),
                sigma.ncols(),
                lengths.len()
            )));
        }
        check_lengths(&lengths)?;
        check_unitary(&sigma, UNITARITY_TOL)?;
        Ok(Coin { sigma, lengths })
    }

    pub fn d(&self) -> usize {
        self.lengths.len()
    }

    pub fn sigma(&self) -> &CMat {
        &self.sigma
    }

    pub fn lengths(&self) -> &[f64] {
        &self.lengths
    }

    /// `C(k) = D(k) σ`.
    pub fn matrix(&self, k: f64) -> CMat {
        let phases: Vec<f64> = self.lengths.iter().map(|l| k * l).collect();
        self.with_phases(&phases)
    }

    /// `diag(e^{iφ_j}) σ` for arbitrary phases.
    pub fn with_phases(&self, phases: &[f64]) -> CMat {
        crate::linalg::phase_rows(phases, &self.sigma)
    }
}

pub fn fourier_coin(d: usize, lengths: Vec<f64>) -> Result<Coin> {
    if d == 0 {
        return Err(Error::Domain("coin dimension must be at least 1".into()));
    }
    Coin::new(fourier_matrix(d), lengths)
}

/// One unitary per vertex, of dimension equal to the vertex degree.
#[derive(Debug, Clone)]
pub struct VertexScatteringSet {
    matrices: Vec<CMat>,
}

impl VertexScatteringSet {
    pub fn new(g: &Digraph, matrices: Vec<CMat>) -> Result<Self> {
        g.check_quantisable()?;
        if matrices.len() != g.n_vertices() {
            return Err(Error::DimensionMismatch(format!(
                "{} scattering matrices for {} vertices",
                matrices.len(),
                g.n_vertices()
            )));
        }
        for (v, m) in matrices.iter().enumerate() {
            let d = g.out_arcs(v).len();
            if m.nrows() != d || m.ncols() != d {
                return Err(Error::DimensionMismatch(format!(
                    "vertex {v} has degree {d} but its scattering matrix is {}x{}",
                    m.nrows(),
                    m.ncols()
                )));
            }
            check_unitary(m, UNITARITY_TOL)?;
        }
        Ok(VertexScatteringSet { matrices })
    }

    pub fn from_fn(g: &Digraph, f: impl FnMut(usize) -> CMat) -> Result<Self> {
        g.check_quantisable()?;
        let matrices = (0..g.n_vertices()).map(f).collect();
        Self::new(g, matrices)
    }

    pub fn kottos_smilansky(g: &Digraph) -> Result<Self> {
        g.check_quantisable()?;
        Self::from_fn(g, |v| {
            ks_vertex_scattering(g.out_arcs(v).len()).unwrap_or_else(|_| CMat::zeros(0, 0))
        })
    }

    pub fn fourier(g: &Digraph) -> Result<Self> {
        Self::from_fn(g, |v| fourier_matrix(g.out_arcs(v).len()))
    }

    pub fn haar_random<R: Rng + ?Sized>(g: &Digraph, rng: &mut R) -> Result<Self> {
        Self::from_fn(g, |v| random_unitary(g.out_arcs(v).len(), rng))
    }

    pub fn get(&self, v: usize) -> &CMat {
        &self.matrices[v]
    }
}

/// A digraph with vertex scattering matrices and arc lengths.
#[derive(Debug, Clone)]
pub struct QuantumGraph {
    graph: Digraph,
    scattering: VertexScatteringSet,
    lengths: Vec<f64>,
    // position of each arc among the in-arcs of its head
    in_pos: Vec<usize>,
}

impl QuantumGraph {
    pub fn new(graph: Digraph, scattering: VertexScatteringSet, lengths: Vec<f64>) -> Result<Self> {
        graph.check_quantisable()?;
        if lengths.len() != graph.n_arcs() {
            return Err(Error::DimensionMismatch(format!(
                "{} lengths for {} arcs",
                lengths.len(),
                graph.n_arcs()
            )));
        }
        check_lengths(&lengths)?;
        // re-validate dimensions against this graph
        let scattering = VertexScatteringSet::new(&graph, scattering.matrices)?;
        let mut in_pos = vec![0; graph.n_arcs()];
        for v in 0..graph.n_vertices() {
            for (pos, &e) in graph.in_arcs(v).iter().enumerate() {
                in_pos[e] = pos;
            }
        }
        Ok(QuantumGraph {
            graph,
            scattering,
            lengths,
            in_pos,
        })
    }

    pub fn graph(&self) -> &Digraph {
        &self.graph
    }

    pub fn lengths(&self) -> &[f64] {
        &self.lengths
    }

    pub fn scattering(&self) -> &VertexScatteringSet {
        &self.scattering
    }

    /// `V[e, f]` for consecutive arcs `e = (ij)`, `f = (jk)`; zero otherwise.
    pub fn bond_amplitude(&self, e: usize, f: usize) -> Complex64 {
        let (_, j) = self.graph.arc(e);
        let (tail, _) = self.graph.arc(f);
        if tail != j {
            return c(0.0, 0.0);
        }
        let out_pos = f - self.graph.out_arcs(j).start;
        self.scattering.get(j)[(self.in_pos[e], out_pos)]
    }

    /// `S = diag(e^{iφ_e}) V` with one phase per arc.
    pub fn matrix_with_phases(&self, phases: &[f64]) -> CMat {
        let n = self.graph.n_arcs();
        let mut s = CMat::zeros(n, n);
        for e in 0..n {
            let (_, j) = self.graph.arc(e);
            let phase = Complex64::cis(phases[e]);
            let sigma = self.scattering.get(j);
            for (out_pos, f) in self.graph.out_arcs(j).enumerate() {
                s[(e, f)] = phase * sigma[(self.in_pos[e], out_pos)];
            }
        }
        s
    }

    pub fn propagator(&self, k: f64) -> Result<Propagator> {
        let phases: Vec<f64> = self.lengths.iter().map(|l| k * l).collect();
        Propagator::new(
            self.matrix_with_phases(&phases),
            self.lengths.clone(),
            k,
            Provenance::Generic,
        )
    }
}

pub fn build_propagator(
    g: &Digraph,
    scattering: &VertexScatteringSet,
    lengths: &[f64],
    k: f64,
) -> Result<Propagator> {
    QuantumGraph::new(g.clone(), scattering.clone(), lengths.to_vec())?.propagator(k)
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case", tag = "kind")]
pub enum Provenance {
    Generic,
    Star,
    Regular { colouring: String, coin: String },
    Explicit,
}

/// A unitary matrix on arc space with the lengths and wavenumber that produced
/// it.
#[derive(Debug, Clone)]
pub struct Propagator {
    matrix: CMat,
    arc_lengths: Vec<f64>,
    k: f64,
    provenance: Provenance,
}

impl Propagator {
    /// Wraps a matrix after checking unitarity.
    pub fn new(matrix: CMat, arc_lengths: Vec<f64>, k: f64, provenance: Provenance) -> Result<Self> {
        check_unitary(&matrix, UNITARITY_TOL)?;
        if !arc_lengths.is_empty() && arc_lengths.len() != matrix.nrows() {
            return Err(Error::DimensionMismatch(format!(
                "{} arc lengths for a propagator of dimension {}",
                arc_lengths.len(),
                matrix.nrows()
            )));
        }
        Ok(Propagator {
            matrix,
            arc_lengths,
            k,
            provenance,
        })
    }

    /// An arbitrary unitary, e.g. a diagonal test matrix.
    pub fn from_unitary(matrix: CMat) -> Result<Self> {
        Self::new(matrix, Vec::new(), 0.0, Provenance::Explicit)
    }

    pub fn dim(&self) -> usize {
        self.matrix.nrows()
    }

    pub fn matrix(&self) -> &CMat {
        &self.matrix
    }

    pub fn arc_lengths(&self) -> &[f64] {
        &self.arc_lengths
    }

    pub fn k(&self) -> f64 {
        self.k
    }

    pub fn provenance(&self) -> &Provenance {
        &self.provenance
    }

    pub fn to_file(&self, seed: Option<u64>) -> PropagatorFile {
        let n = self.dim();
        PropagatorFile {
            dim: n,
            k: self.k,
            seed,
            provenance: self.provenance.clone(),
            arc_lengths: self.arc_lengths.clone(),
            matrix: (0..n)
                .flat_map(|i| (0..n).map(move |j| (i, j)))
                .map(|(i, j)| [self.matrix[(i, j)].re, self.matrix[(i, j)].im])
                .collect(),
        }
    }

    pub fn to_json(&self, seed: Option<u64>) -> String {
        serde_json::to_string(&self.to_file(seed)).expect("propagator serialization cannot fail")
    }

    pub fn from_json(s: &str) -> Result<Self> {
        let file: PropagatorFile = serde_json::from_str(s)?;
        if file.matrix.len() != file.dim * file.dim {
            return Err(Error::DimensionMismatch(format!(
                "{} entries for dimension {}",
                file.matrix.len(),
                file.dim
            )));
        }
        let m = CMat::from_fn(file.dim, file.dim, |i, j| {
            let [re, im] = file.matrix[i * file.dim + j];
            c(re, im)
        });
        Self::new(m, file.arc_lengths, file.k, file.provenance)
    }
}

/// JSON dump of a propagator: row-major `[re, im]` pairs plus metadata.
#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct PropagatorFile {
    pub dim: usize,
    pub k: f64,
    pub seed: Option<u64>,
    pub provenance: Provenance,
    pub arc_lengths: Vec<f64>,
    pub matrix: Vec<[f64; 2]>,
}

/// Star graph on `n_e` arcs: `S_ij = e^{ikL_i} (-δ_ij + 2/n_e)`.
pub fn star_propagator(n_e: usize, lengths: &[f64], k: f64) -> Result<Propagator> {
    if lengths.len() != n_e {
        return Err(Error::DimensionMismatch(format!(
            "{} lengths for a star with {n_e} arcs",
            lengths.len()
        )));
    }
    check_lengths(lengths)?;
    let phases: Vec<f64> = lengths.iter().map(|l| k * l).collect();
    let m = crate::linalg::phase_rows(&phases, &star_scattering(n_e)?);
    Propagator::new(m, lengths.to_vec(), k, Provenance::Star)
}

/// Block `(i, j)` of the result is `coin[i][j] · ρ_i`; no validation.
pub(crate) fn regular_matrix(c: &EdgeColouring, coin: &CMat) -> CMat {
    let (n, d) = (c.n_vertices(), c.n_colours());
    let mut s = CMat::zeros(n * d, n * d);
    for i in 0..d {
        for (a, &b) in c.perm(i).iter().enumerate() {
            for j in 0..d {
                s[(i * n + a, j * n + b)] = coin[(i, j)];
            }
        }
    }
    s
}

/// `S = (⊕ ρ_i)(C(k) ⊗ I_n)`. Arc `i·n + a` carries length `L_i`.
pub fn build_regular_propagator(c: &EdgeColouring, coin: &Coin, k: f64) -> Result<Propagator> {
    if coin.d() != c.n_colours() {
        return Err(Error::DimensionMismatch(format!(
            "coin dimension {} does not match colour count {}",
            coin.d(),
            c.n_colours()
        )));
    }
    if !verify_colouring(c) {
        return Err(Error::InvalidColouring("colouring does not decompose its host".into()));
    }
    let n = c.n_vertices();
    let lengths = coin
        .lengths()
        .iter()
        .flat_map(|&l| std::iter::repeat_n(l, n))
        .collect();
    Propagator::new(
        regular_matrix(c, &coin.matrix(k)),
        lengths,
        k,
        Provenance::Regular {
            colouring: format!("n={n},d={}", c.n_colours()),
            coin: "custom".into(),
        },
    )
}

/// Blocks `S_m = diag(e^{2πi jm/n}) · C(k)`, `m = 1..n`, of the regular
/// propagator built from the cyclic group `Z_n` and a coin of dimension `n`.
/// Their spectra together are the spectrum of the full `n² × n²` propagator.
pub fn block_diagonalise_cyclic(coin: &Coin, n: usize, k: f64) -> Result<Vec<CMat>> {
    if coin.d() != n {
        return Err(Error::DimensionMismatch(format!(
            "cyclic block diagonalisation needs a coin of dimension {n}, got {}",
            coin.d()
        )));
    }
    let cm = coin.matrix(k);
    Ok((1..=n)
        .map(|m| {
            let phases: Vec<f64> = (0..n)
                .map(|j| 2.0 * PI * ((j * m) % n) as f64 / n as f64)
                .collect();
            crate::linalg::phase_rows(&phases, &cm)
        })
        .collect())
}
