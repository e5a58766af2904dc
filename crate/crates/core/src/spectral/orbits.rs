use std::collections::VecDeque;

use num_complex::Complex64;

use crate::error::{Error, Result};
use crate::propagator::QuantumGraph;

/// Longest orbit enumerated unless the caller raises the cap.
pub const DEFAULT_ORBIT_CAP: usize = 12;

/// `Σ_p A_p e^{ikL_p}` over closed paths of `n` arcs, where `A_p` is the
/// product of vertex scattering amplitudes along the path and `L_p` its total
/// length. Every rotation of a path is counted, so the sum equals `Tr Sⁿ`.
/// Paths are enumerated depth-first on the line digraph.
pub fn periodic_orbit_trace(g: &QuantumGraph, k: f64, n: usize, cap: usize) -> Result<Complex64> {
    if n > cap {
        return Err(Error::OrbitLengthCap { n, cap });
    }
    let n_arcs = g.graph().n_arcs();
    if n == 0 {
        return Ok(Complex64::new(n_arcs as f64, 0.0));
    }
    let mut total = Complex64::new(0.0, 0.0);
    for start in 0..n_arcs {
        let search = OrbitSearch {
            g,
            k,
            n,
            start,
            dist: distances_to(g, start),
        };
        total += search.extend(start, 1, Complex64::new(1.0, 0.0), g.lengths()[start]);
    }
    Ok(total)
}

struct OrbitSearch<'a> {
    g: &'a QuantumGraph,
    k: f64,
    n: usize,
    start: usize,
    // steps needed from each arc back to `start`
    dist: Vec<usize>,
}

impl OrbitSearch<'_> {
    /// Sum over completions of a path of `depth` arcs ending at `arc`.
    fn extend(&self, arc: usize, depth: usize, amplitude: Complex64, length: f64) -> Complex64 {
        let (_, head) = self.g.graph().arc(arc);
        let mut sum = Complex64::new(0.0, 0.0);
        for next in self.g.graph().out_arcs(head) {
            let a = amplitude * self.g.bond_amplitude(arc, next);
            if depth == self.n {
                if next == self.start {
                    sum += a * Complex64::cis(self.k * length);
                }
            } else if self.dist[next] <= self.n - depth {
                sum += self.extend(next, depth + 1, a, length + self.g.lengths()[next]);
            }
        }
        sum
    }
}

/// Breadth-first distances to `target` along the line digraph.
fn distances_to(g: &QuantumGraph, target: usize) -> Vec<usize> {
    let graph = g.graph();
    let mut dist = vec![usize::MAX; graph.n_arcs()];
    dist[target] = 0;
    let mut queue = VecDeque::from([target]);
    while let Some(f) = queue.pop_front() {
        let (tail, _) = graph.arc(f);
        for &e in graph.in_arcs(tail) {
            if dist[e] == usize::MAX {
                dist[e] = dist[f] + 1;
                queue.push_back(e);
            }
        }
    }
    dist
}
