//! Finite digraphs, their line digraphs, and the graph families used by the
//! experiments (stars, complete graphs with loops, periodic lattices).
//!
//! Arcs are always kept in lexicographic `(tail, head)` order and every matrix
//! in the crate is indexed by that order, so spectra are reproducible.

use std::fmt::Write as _;
use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// A directed graph on vertices `0..n` with no parallel arcs (loops allowed).
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(try_from = "GraphFile", into = "GraphFile")]
pub struct Digraph {
    n: usize,
    arcs: Vec<(usize, usize)>,
    // arcs are sorted, so the out-arcs of v are the contiguous range
    // out_start[v]..out_start[v + 1], already ordered by head.
    out_start: Vec<usize>,
    // in-arcs of each vertex ordered by tail.
    in_arcs: Vec<Vec<usize>>,
}

/// Serialized form: `{"n": 4, "arcs": [[0, 1], ...]}`.
#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct GraphFile {
    pub n: usize,
    pub arcs: Vec<[usize; 2]>,
}

impl TryFrom<GraphFile> for Digraph {
    type Error = Error;

    fn try_from(file: GraphFile) -> Result<Self> {
        Digraph::new(file.n, file.arcs.iter().map(|&[t, h]| (t, h)))
    }
}

impl From<Digraph> for GraphFile {
    fn from(g: Digraph) -> Self {
        GraphFile {
            n: g.n,
            arcs: g.arcs.iter().map(|&(t, h)| [t, h]).collect(),
        }
    }
}

impl Digraph {
    /// Builds a digraph from an arc list. The arc order of the input is
    /// irrelevant; arcs are re-indexed lexicographically.
    pub fn new(n: usize, arcs: impl IntoIterator<Item = (usize, usize)>) -> Result<Self> {
        if n == 0 {
            return Err(Error::NoVertices);
        }
        let mut arcs: Vec<(usize, usize)> = arcs.into_iter().collect();
        for &(t, h) in &arcs {
            for vertex in [t, h] {
                if vertex >= n {
                    return Err(Error::EndpointOutOfRange { vertex, n });
                }
            }
        }
        arcs.sort_unstable();
        if let Some(w) = arcs.windows(2).find(|w| w[0] == w[1]) {
            return Err(Error::DuplicateArc(w[0].0, w[0].1));
        }

        let mut out_start = vec![0; n + 1];
        for &(t, _) in &arcs {
            out_start[t + 1] += 1;
        }
        for v in 0..n {
            out_start[v + 1] += out_start[v];
        }
        let mut in_arcs = vec![Vec::new(); n];
        for (idx, &(_, h)) in arcs.iter().enumerate() {
            in_arcs[h].push(idx);
        }

        Ok(Digraph {
            n,
            arcs,
            out_start,
            in_arcs,
        })
    }

    /// Rebuilds the digraph whose arcs are the nonzero entries of `a`.
    pub fn from_adjacency(a: &AdjacencyMatrix) -> Result<Self> {
        let n = a.dim();
        let arcs = (0..n).flat_map(|i| (0..n).map(move |j| (i, j)));
        Digraph::new(n, arcs.filter(|&(i, j)| a.get(i, j)))
    }

    pub fn n_vertices(&self) -> usize {
        self.n
    }

    pub fn n_arcs(&self) -> usize {
        self.arcs.len()
    }

    pub fn arcs(&self) -> &[(usize, usize)] {
        &self.arcs
    }

    pub fn arc(&self, index: usize) -> (usize, usize) {
        self.arcs[index]
    }

    /// Index of the arc `(tail, head)`, if present.
    pub fn arc_index(&self, tail: usize, head: usize) -> Option<usize> {
        self.arcs.binary_search(&(tail, head)).ok()
    }

    /// Indices of the arcs leaving `v`, ordered by head.
    pub fn out_arcs(&self, v: usize) -> std::ops::Range<usize> {
        self.out_start[v]..self.out_start[v + 1]
    }

    /// Indices of the arcs entering `v`, ordered by tail.
    pub fn in_arcs(&self, v: usize) -> &[usize] {
        &self.in_arcs[v]
    }

    pub fn adjacency_matrix(&self) -> AdjacencyMatrix {
        let mut a = AdjacencyMatrix::zeros(self.n);
        for &(t, h) in &self.arcs {
            a.set(t, h, true);
        }
        a
    }

    /// The line digraph: one vertex per arc, and an arc `(hi) -> (jk)` whenever
    /// `i == j`. Vertex `e` of the result is arc `e` of `self`.
    pub fn line_digraph(&self) -> Digraph {
        let arcs = self
            .arcs
            .iter()
            .enumerate()
            .flat_map(|(e, &(_, head))| self.out_arcs(head).map(move |f| (e, f)));
        Digraph::new(self.n_arcs().max(1), arcs).expect("line digraph arcs are valid and distinct")
    }

    pub fn degree_profile(&self) -> DegreeProfile {
        DegreeProfile(
            (0..self.n)
                .map(|v| Degree {
                    d_in: self.in_arcs[v].len(),
                    d_out: self.out_arcs(v).len(),
                })
                .collect(),
        )
    }

    /// True iff every vertex has as many incoming as outgoing arcs, the
    /// condition for a unitary vertex scattering matrix to exist there.
    pub fn is_quantisable(&self) -> bool {
        self.degree_profile().iter().all(|d| d.d_in == d.d_out)
    }

    /// Returns the first vertex violating quantisability as an error.
    pub fn check_quantisable(&self) -> Result<()> {
        match self
            .degree_profile()
            .iter()
            .enumerate()
            .find(|(_, d)| d.d_in != d.d_out)
        {
            Some((vertex, d)) => Err(Error::NotQuantisable {
                vertex,
                d_in: d.d_in,
                d_out: d.d_out,
            }),
            None => Ok(()),
        }
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string(self).expect("graph serialization cannot fail")
    }

    pub fn from_json(s: &str) -> Result<Self> {
        Ok(serde_json::from_str(s)?)
    }

    pub fn read_json(path: impl AsRef<Path>) -> Result<Self> {
        Self::from_json(&std::fs::read_to_string(path)?)
    }
}

/// Square 0/1 matrix, row-major.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct AdjacencyMatrix {
    n: usize,
    entries: Vec<bool>,
}

impl AdjacencyMatrix {
    pub fn zeros(n: usize) -> Self {
        AdjacencyMatrix {
            n,
            entries: vec![false; n * n],
        }
    }

    pub fn from_rows(rows: &[Vec<u8>]) -> Result<Self> {
        let n = rows.len();
        let mut a = AdjacencyMatrix::zeros(n);
        for (i, row) in rows.iter().enumerate() {
            if row.len() != n {
                return Err(Error::DimensionMismatch(format!(
                    "row {i} has {} entries, expected {n}",
                    row.len()
                )));
            }
            for (j, &x) in row.iter().enumerate() {
                match x {
                    0 => {}
                    1 => a.set(i, j, true),
                    _ => return Err(Error::Parse(format!("entry ({i}, {j}) = {x} is not 0/1"))),
                }
            }
        }
        Ok(a)
    }

    pub fn dim(&self) -> usize {
        self.n
    }

    pub fn get(&self, i: usize, j: usize) -> bool {
        self.entries[i * self.n + j]
    }

    pub fn set(&mut self, i: usize, j: usize, value: bool) {
        self.entries[i * self.n + j] = value;
    }

    pub fn row_sum(&self, i: usize) -> usize {
        (0..self.n).filter(|&j| self.get(i, j)).count()
    }

    pub fn col_sum(&self, j: usize) -> usize {
        (0..self.n).filter(|&i| self.get(i, j)).count()
    }

    pub fn to_rows(&self) -> Vec<Vec<u8>> {
        (0..self.n)
            .map(|i| (0..self.n).map(|j| u8::from(self.get(i, j))).collect())
            .collect()
    }

    /// Comma-separated 0/1 rows, one line per row.
    pub fn to_csv(&self) -> String {
        let mut out = String::new();
        for row in self.to_rows() {
            let line: Vec<String> = row.iter().map(u8::to_string).collect();
            writeln!(out, "{}", line.join(",")).unwrap();
        }
        out
    }

    pub fn from_csv(s: &str) -> Result<Self> {
        let rows = s
            .lines()
            .filter(|l| !l.trim().is_empty())
            .map(|line| {
                line.split(',')
                    .map(|x| {
                        x.trim()
                            .parse::<u8>()
                            .map_err(|e| Error::Parse(format!("{x:?}: {e}")))
                    })
                    .collect::<Result<Vec<u8>>>()
            })
            .collect::<Result<Vec<_>>>()?;
        Self::from_rows(&rows)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct Degree {
    pub d_in: usize,
    pub d_out: usize,
}

/// Per-vertex in/out degrees.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct DegreeProfile(pub Vec<Degree>);

impl DegreeProfile {
    pub fn iter(&self) -> impl Iterator<Item = &Degree> {
        self.0.iter()
    }

    pub fn get(&self, v: usize) -> Degree {
        self.0[v]
    }
}

/// A central vertex `0` joined to `n_e / 2` leaves by undirected edges, so the
/// digraph has exactly `n_e` arcs.
///
/// The quantum star is modelled directly on this arc space; see
/// [`crate::propagator::star_propagator`].
pub fn make_star(n_e: usize) -> Result<Digraph> {
    if n_e == 0 || n_e % 2 == 1 {
        return Err(Error::OddStar(n_e));
    }
    let leaves = n_e / 2;
    Digraph::new(
        leaves + 1,
        (1..=leaves).flat_map(|leaf| [(0, leaf), (leaf, 0)]),
    )
}

/// The complete digraph `K^n` including loops: adjacency matrix `J_n`.
pub fn make_complete(n: usize) -> Result<Digraph> {
    Digraph::new(n, (0..n).flat_map(|i| (0..n).map(move |j| (i, j))))
}

/// Periodic `d`-dimensional lattice of side `side`, each vertex joined to its
/// `2d` neighbours by pairs of opposite arcs. Vertex `v` has coordinates given
/// by the base-`side` digits of `v`, least significant first.
///
/// For `side == 2` the `+1` and `-1` neighbours coincide and the two wraps are
/// merged into a single edge pair, so vertices have degree `d` rather than `2d`.
pub fn make_lattice(d: usize, side: usize) -> Result<Digraph> {
    if d == 0 {
        return Err(Error::InvalidLattice("dimension must be at least 1".into()));
    }
    if side < 2 {
        return Err(Error::InvalidLattice(format!("side length {side} < 2")));
    }
    let n = side
        .checked_pow(d as u32)
        .ok_or_else(|| Error::InvalidLattice("lattice too large".into()))?;
    let mut arcs = Vec::with_capacity(2 * d * n);
    for v in 0..n {
        for axis in 0..d {
            for step in [1, side - 1] {
                arcs.push((v, lattice_neighbour(v, axis, step, side)));
            }
        }
    }
    arcs.sort_unstable();
    arcs.dedup();
    Digraph::new(n, arcs)
}

/// Vertex reached from `v` by moving `step` (mod side) along `axis`.
pub(crate) fn lattice_neighbour(v: usize, axis: usize, step: usize, side: usize) -> usize {
    let stride = side.pow(axis as u32);
    let coord = (v / stride) % side;
    let moved = (coord + step) % side;
    v - coord * stride + moved * stride
}

#[cfg(test)]
mod tests {
    use super::*;

    fn fig3() -> Digraph {
        let a = AdjacencyMatrix::from_rows(&[
            vec![1, 1, 1, 0],
            vec![0, 1, 1, 1],
            vec![1, 1, 0, 1],
            vec![1, 0, 1, 1],
        ])
        .unwrap();
        Digraph::from_adjacency(&a).unwrap()
    }

    #[test]
    fn smallest_digraphs() {
        let loop1 = Digraph::new(1, [(0, 0)]).unwrap();
        assert_eq!(loop1.n_arcs(), 1);
        let two = Digraph::new(2, [(1, 0), (0, 1)]).unwrap();
        assert_eq!(two.n_arcs(), 2);
        assert_eq!(two.arcs(), &[(0, 1), (1, 0)]);
        assert_eq!(two.adjacency_matrix().to_rows(), vec![vec![0, 1], vec![1, 0]]);
    }

    #[test]
    fn rejects_bad_arcs() {
        assert!(matches!(
            Digraph::new(2, [(0, 1), (0, 1)]),
            Err(Error::DuplicateArc(0, 1))
        ));
        assert!(matches!(
            Digraph::new(2, [(0, 2)]),
            Err(Error::EndpointOutOfRange { vertex: 2, n: 2 })
        ));
        assert!(matches!(Digraph::new(0, []), Err(Error::NoVertices)));
    }

    #[test]
    fn three_regular_example() {
        let g = fig3();
        assert_eq!(g.n_arcs(), 12);
        assert!(g.degree_profile().iter().all(|d| d.d_in == 3 && d.d_out == 3));
        assert_eq!(
            g.adjacency_matrix().to_rows(),
            vec![
                vec![1, 1, 1, 0],
                vec![0, 1, 1, 1],
                vec![1, 1, 0, 1],
                vec![1, 0, 1, 1]
            ]
        );
    }

    #[test]
    fn line_digraph_small_cases() {
        let loop1 = Digraph::new(1, [(0, 0)]).unwrap();
        assert_eq!(loop1.line_digraph(), loop1);

        // arcs (01) and (10) feed each other
        let two = Digraph::new(2, [(0, 1), (1, 0)]).unwrap();
        assert_eq!(two.line_digraph().arcs(), &[(0, 1), (1, 0)]);

        let k3 = make_complete(3).unwrap().line_digraph();
        assert_eq!(k3.n_vertices(), 9);
        assert!(k3.degree_profile().iter().all(|d| d.d_in == 3 && d.d_out == 3));
    }

    #[test]
    fn quantisability() {
        assert!(Digraph::new(2, [(0, 1), (1, 0)]).unwrap().is_quantisable());
        let path = Digraph::new(2, [(0, 1)]).unwrap();
        assert!(!path.is_quantisable());
        assert!(matches!(
            path.check_quantisable(),
            Err(Error::NotQuantisable { vertex: 0, d_in: 0, d_out: 1 })
        ));
    }

    #[test]
    fn star_degrees() {
        assert!(matches!(make_star(3), Err(Error::OddStar(3))));
        let s2 = make_star(2).unwrap();
        assert_eq!(s2.degree_profile().get(0), Degree { d_in: 1, d_out: 1 });
        let s4 = make_star(4).unwrap();
        assert_eq!(s4.n_arcs(), 4);
        assert_eq!(s4.degree_profile().get(0), Degree { d_in: 2, d_out: 2 });
        let s20 = make_star(20).unwrap();
        assert_eq!(s20.degree_profile().get(0), Degree { d_in: 10, d_out: 10 });
        for v in 1..=10 {
            assert_eq!(s20.degree_profile().get(v), Degree { d_in: 1, d_out: 1 });
        }
    }

    #[test]
    fn complete_graphs() {
        assert_eq!(make_complete(1).unwrap().arcs(), &[(0, 0)]);
        assert_eq!(make_complete(5).unwrap().n_arcs(), 25);
        let k24 = make_complete(24).unwrap();
        assert_eq!(k24.n_arcs(), 576);
        assert!(k24.degree_profile().iter().all(|d| d.d_in == 24 && d.d_out == 24));
    }

    #[test]
    fn lattice_sizes() {
        let l = make_lattice(1, 2).unwrap();
        assert_eq!((l.n_vertices(), l.n_arcs()), (2, 2));
        let l = make_lattice(2, 4).unwrap();
        assert_eq!((l.n_vertices(), l.n_arcs()), (16, 64));
        let l = make_lattice(3, 3).unwrap();
        assert_eq!((l.n_vertices(), l.n_arcs()), (27, 162));
        assert!(l.is_quantisable());
        assert!(make_lattice(0, 3).is_err());
        assert!(make_lattice(2, 1).is_err());
    }

    #[test]
    fn json_and_csv_round_trip() {
        let g = fig3();
        let back = Digraph::from_json(&g.to_json()).unwrap();
        assert_eq!(back, g);
        let a = g.adjacency_matrix();
        assert_eq!(AdjacencyMatrix::from_csv(&a.to_csv()).unwrap(), a);
        assert!(Digraph::from_json(r#"{"n":2,"arcs":[[0,1],[0,1]]}"#).is_err());
        assert!(Digraph::from_json(r#"{"n":2,"arcs":[],"extra":1}"#).is_err());
    }
}
