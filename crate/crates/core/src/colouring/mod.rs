//! Edge-colourings of regular digraphs.
//!
//! A colouring with `d` colours on `n` vertices is a list of `n × n`
//! permutation matrices `ρ_0 .. ρ_{d-1}` with pairwise disjoint supports whose
//! sum is the host adjacency matrix. Permutation `i` is stored as its row
//! images: `(ρ_i)[a][perm(i)[a]] = 1`, so arc `(a, perm(i)[a])` has colour `i`.

pub mod latin;

use std::path::Path;

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::graph::{make_complete, AdjacencyMatrix, Digraph};

pub use latin::LatinSquare;

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct EdgeColouring {
    n: usize,
    perms: Vec<Vec<usize>>,
    host: Digraph,
}

/// Serialized form: `{"n": 4, "d": 3, "perms": [[...], ...]}` with each
/// permutation given by its row images.
#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ColouringFile {
    pub n: usize,
    pub d: usize,
    pub perms: Vec<Vec<usize>>,
}

fn is_permutation(images: &[usize], n: usize) -> bool {
    let mut seen = vec![false; n];
    images.len() == n && images.iter().all(|&j| j < n && !std::mem::replace(&mut seen[j], true))
}

impl EdgeColouring {
    /// Pairs permutations with a host graph without checking anything; use
    /// [`verify_colouring`] to test the result.
    pub fn new_unchecked(perms: Vec<Vec<usize>>, host: Digraph) -> Self {
        EdgeColouring {
            n: host.n_vertices(),
            perms,
            host,
        }
    }

    /// Builds a colouring from disjoint permutations; the host is the digraph
    /// whose adjacency matrix is their sum.
    pub fn from_permutations(perms: Vec<Vec<usize>>) -> Result<Self> {
        let n = perms
            .first()
            .map(Vec::len)
            .ok_or_else(|| Error::InvalidColouring("no colours given".into()))?;
        for (i, p) in perms.iter().enumerate() {
            if !is_permutation(p, n) {
                return Err(Error::InvalidColouring(format!(
                    "colour {i} is not a permutation of 0..{n}"
                )));
            }
        }
        let arcs = perms
            .iter()
            .flat_map(|p| p.iter().enumerate().map(|(a, &b)| (a, b)));
        let host = Digraph::new(n, arcs).map_err(|e| match e {
            Error::DuplicateArc(a, b) => {
                Error::InvalidColouring(format!("arc ({a}, {b}) carries two colours"))
            }
            other => other,
        })?;
        Ok(EdgeColouring { n, perms, host })
    }

    /// Colour `s` covers the cells of the square holding symbol `s`.
    pub fn from_latin_square(square: &LatinSquare) -> Self {
        let n = square.order();
        let mut perms = vec![vec![0; n]; n];
        for r in 0..n {
            for c in 0..n {
                perms[square.cell(r, c)][r] = c;
            }
        }
        EdgeColouring {
            n,
            perms,
            host: make_complete(n).expect("n >= 1"),
        }
    }

    pub fn n_vertices(&self) -> usize {
        self.n
    }

    pub fn n_colours(&self) -> usize {
        self.perms.len()
    }

    pub fn perm(&self, colour: usize) -> &[usize] {
        &self.perms[colour]
    }

    pub fn perms(&self) -> &[Vec<usize>] {
        &self.perms
    }

    pub fn host(&self) -> &Digraph {
        &self.host
    }

    /// Dense 0/1 form of `ρ_colour`.
    pub fn rho(&self, colour: usize) -> AdjacencyMatrix {
        let mut m = AdjacencyMatrix::zeros(self.n);
        for (a, &b) in self.perms[colour].iter().enumerate() {
            m.set(a, b, true);
        }
        m
    }

    /// The host arc represented by the line-graph state `(colour, vertex)`
    /// in colour-major ordering: the arc of that colour leaving `vertex`.
    pub fn arc_of_state(&self, colour: usize, vertex: usize) -> (usize, usize) {
        (vertex, self.perms[colour][vertex])
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string(&ColouringFile {
            n: self.n,
            d: self.n_colours(),
            perms: self.perms.clone(),
        })
        .expect("colouring serialization cannot fail")
    }

    pub fn from_json(s: &str) -> Result<Self> {
        let file: ColouringFile = serde_json::from_str(s)?;
        if file.perms.len() != file.d || file.perms.iter().any(|p| p.len() != file.n) {
            return Err(Error::InvalidColouring(format!(
                "expected {} permutations of length {}",
                file.d, file.n
            )));
        }
        Self::from_permutations(file.perms)
    }

    pub fn read_json(path: impl AsRef<Path>) -> Result<Self> {
        Self::from_json(&std::fs::read_to_string(path)?)
    }
}

/// True iff every `ρ_i` is a permutation matrix, no two share a nonzero
/// position, and `Σ ρ_i` equals the host adjacency matrix.
pub fn verify_colouring(c: &EdgeColouring) -> bool {
    let n = c.host.n_vertices();
    if c.n != n || c.perms.is_empty() {
        return false;
    }
    if !c.perms.iter().all(|p| is_permutation(p, n)) {
        return false;
    }
    let mut sum = vec![0usize; n * n];
    for p in &c.perms {
        for (a, &b) in p.iter().enumerate() {
            sum[a * n + b] += 1;
        }
    }
    let a = c.host.adjacency_matrix();
    (0..n).all(|i| (0..n).all(|j| sum[i * n + j] == usize::from(a.get(i, j))))
}

/// Finite group given by its multiplication table.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum GroupSpec {
    Cyclic(usize),
    /// Symmetric group on `m` letters, order `m!`.
    Symmetric(usize),
    /// `table[g][h]` is the index of `g·h`.
    Cayley(Vec<Vec<usize>>),
}

/// A validated Cayley table: a Latin square with an identity row and column.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct CayleyTable {
    table: Vec<Vec<usize>>,
}

impl CayleyTable {
    pub fn new(table: Vec<Vec<usize>>) -> Result<Self> {
        let n = table.len();
        if n == 0 {
            return Err(Error::InvalidCayleyTable("empty table".into()));
        }
        let square = LatinSquare::from_rows(&table)
            .map_err(|_| Error::InvalidCayleyTable("table is not a Latin square".into()))?;
        let has_identity = (0..n).any(|e| {
            (0..n).all(|x| square.cell(e, x) == x && square.cell(x, e) == x)
        });
        if !has_identity {
            return Err(Error::InvalidCayleyTable("no identity element".into()));
        }
        Ok(CayleyTable { table })
    }

    pub fn order(&self) -> usize {
        self.table.len()
    }

    pub fn mul(&self, g: usize, h: usize) -> usize {
        self.table[g][h]
    }
}

impl GroupSpec {
    pub fn order(&self) -> usize {
        match self {
            GroupSpec::Cyclic(n) => *n,
            GroupSpec::Symmetric(m) => (1..=*m).product(),
            GroupSpec::Cayley(t) => t.len(),
        }
    }

    pub fn cayley_table(&self) -> Result<CayleyTable> {
        match self {
            GroupSpec::Cyclic(0) => Err(Error::InvalidCayleyTable("cyclic group of order 0".into())),
            GroupSpec::Cyclic(n) => {
                CayleyTable::new((0..*n).map(|g| (0..*n).map(|h| (g + h) % n).collect()).collect())
            }
            GroupSpec::Symmetric(m) => {
                if *m == 0 || *m > 6 {
                    return Err(Error::InvalidCayleyTable(format!(
                        "symmetric group S_{m} not supported (1 <= m <= 6)"
                    )));
                }
                let elements = permutations_lex(*m);
                let index = |p: &[usize]| elements.binary_search_by(|q| q.as_slice().cmp(p)).unwrap();
                let table = elements
                    .iter()
                    .map(|g| {
                        elements
                            .iter()
                            .map(|h| {
                                let gh: Vec<usize> = h.iter().map(|&x| g[x]).collect();
                                index(&gh)
                            })
                            .collect()
                    })
                    .collect();
                CayleyTable::new(table)
            }
            GroupSpec::Cayley(t) => CayleyTable::new(t.clone()),
        }
    }
}

/// All permutations of `0..m` in lexicographic order (identity first).
fn permutations_lex(m: usize) -> Vec<Vec<usize>> {
    let mut current: Vec<usize> = (0..m).collect();
    let mut out = vec![current.clone()];
    loop {
        let Some(i) = (0..m.saturating_sub(1)).rev().find(|&i| current[i] < current[i + 1]) else {
            return out;
        };
        let j = (i + 1..m).rev().find(|&j| current[j] > current[i]).unwrap();
        current.swap(i, j);
        current[i + 1..].reverse();
        out.push(current.clone());
    }
}

/// Regular representation by left multiplication: `ρ_g e_h = e_{g·h}`, so
/// `(ρ_g)[k][l] = 1` iff `k = g·l`. For the cyclic group this is
/// `(ρ_j)[k][l] = δ_{k, (l + j) mod n}`. The host is `K^n`.
pub fn colour_from_group(spec: &GroupSpec) -> Result<EdgeColouring> {
    let table = spec.cayley_table()?;
    let n = table.order();
    let perms = (0..n)
        .map(|g| {
            let mut images = vec![0; n];
            for l in 0..n {
                images[table.mul(g, l)] = l;
            }
            images
        })
        .collect();
    Ok(EdgeColouring {
        n,
        perms,
        host: make_complete(n)?,
    })
}

/// A random decomposition of `J_n` into `n` permutation matrices, taken from a
/// Jacobson–Matthews random Latin square. Deterministic in `seed`.
pub fn random_latin_colouring(n: usize, seed: u64) -> Result<EdgeColouring> {
    if n == 0 {
        return Err(Error::InvalidColouring("order must be at least 1".into()));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    Ok(EdgeColouring::from_latin_square(&latin::random_latin_square(n, &mut rng)))
}

/// `A^{LG} = (⊕ ρ_i)(J_d ⊗ I_n)`: block `(i, j)` is `ρ_i`. State `i·n + a`
/// is the arc [`EdgeColouring::arc_of_state`]`(i, a)`.
pub fn line_graph_adjacency_from_colouring(c: &EdgeColouring) -> Result<AdjacencyMatrix> {
    if !verify_colouring(c) {
        return Err(Error::InvalidColouring("colouring does not decompose its host".into()));
    }
    let (n, d) = (c.n, c.n_colours());
    let mut a = AdjacencyMatrix::zeros(n * d);
    for i in 0..d {
        for (row, &col) in c.perms[i].iter().enumerate() {
            for j in 0..d {
                a.set(i * n + row, j * n + col, true);
            }
        }
    }
    Ok(a)
}
