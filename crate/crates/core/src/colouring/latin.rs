//! Random Latin squares via the Jacobson–Matthews Markov chain.
//!
//! The chain walks on the incidence cube `cube[r][c][s] ∈ {-1, 0, 1}` of the
//! square. Proper states are 0/1 cubes with exactly one 1 on every line;
//! improper states carry a single -1 entry. Each move adds +1 on four cells
//! and -1 on four cells of a 2×2×2 sub-cube.

use rand::Rng;

use crate::error::{Error, Result};

/// A Latin square of order `n`: `cell(r, c)` is the symbol in row `r`,
/// column `c`, and every row and column is a permutation of `0..n`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct LatinSquare {
    n: usize,
    cells: Vec<usize>,
}

impl LatinSquare {
    /// `L[r][c] = (r + c) mod n`.
    pub fn cyclic(n: usize) -> Self {
        let cells = (0..n)
            .flat_map(|r| (0..n).map(move |c| (r + c) % n))
            .collect();
        LatinSquare { n, cells }
    }

    pub fn from_rows(rows: &[Vec<usize>]) -> Result<Self> {
        let n = rows.len();
        if rows.iter().any(|r| r.len() != n) {
            return Err(Error::InvalidColouring("Latin square rows must have length n".into()));
        }
        let square = LatinSquare {
            n,
            cells: rows.concat(),
        };
        if !square.is_latin() {
            return Err(Error::InvalidColouring("not a Latin square".into()));
        }
        Ok(square)
    }

    /// Parses comma-separated rows of symbols.
    pub fn from_csv(s: &str) -> Result<Self> {
        let rows = s
            .lines()
            .filter(|l| !l.trim().is_empty())
            .map(|line| {
                line.split(',')
                    .map(|x| {
                        x.trim()
                            .parse::<usize>()
                            .map_err(|e| Error::Parse(format!("{x:?}: {e}")))
                    })
                    .collect::<Result<Vec<_>>>()
            })
            .collect::<Result<Vec<_>>>()?;
        Self::from_rows(&rows)
    }

    pub fn to_csv(&self) -> String {
        let mut out = String::new();
        for r in 0..self.n {
            let row: Vec<String> = (0..self.n).map(|c| self.cell(r, c).to_string()).collect();
            out.push_str(&row.join(","));
            out.push('\n');
        }
        out
    }

    pub fn order(&self) -> usize {
        self.n
    }

    pub fn cell(&self, r: usize, c: usize) -> usize {
        self.cells[r * self.n + c]
    }

    pub fn is_latin(&self) -> bool {
        let n = self.n;
        let is_permutation = |line: Vec<usize>| {
            let mut seen = vec![false; n];
            line.into_iter().all(|s| s < n && !std::mem::replace(&mut seen[s], true))
        };
        (0..n).all(|r| is_permutation((0..n).map(|c| self.cell(r, c)).collect()))
            && (0..n).all(|c| is_permutation((0..n).map(|r| self.cell(r, c)).collect()))
    }
}

struct IncidenceCube {
    n: usize,
    cube: Vec<i8>,
    // Position of the -1 entry while the cube is improper.
    improper: Option<(usize, usize, usize)>,
}

impl IncidenceCube {
    fn from_square(sq: &LatinSquare) -> Self {
        let n = sq.order();
        let mut cube = vec![0; n * n * n];
        for r in 0..n {
            for c in 0..n {
                cube[(r * n + c) * n + sq.cell(r, c)] = 1;
            }
        }
        IncidenceCube {
            n,
            cube,
            improper: None,
        }
    }

    fn idx(&self, r: usize, c: usize, s: usize) -> usize {
        (r * self.n + c) * self.n + s
    }

    fn get(&self, r: usize, c: usize, s: usize) -> i8 {
        self.cube[self.idx(r, c, s)]
    }

    fn add(&mut self, r: usize, c: usize, s: usize, delta: i8) {
        let i = self.idx(r, c, s);
        self.cube[i] += delta;
    }

    /// Indices `x` along a line where the entry is 1; `at(x)` reads the line.
    fn ones_on_line(n: usize, at: impl Fn(usize) -> i8) -> impl Iterator<Item = usize> {
        (0..n).filter(move |&x| at(x) == 1)
    }

    fn pick<R: Rng + ?Sized>(rng: &mut R, mut candidates: impl Iterator<Item = usize>) -> usize {
        let first = candidates.next().expect("line through the improper cell has two 1s");
        match candidates.next() {
            Some(second) if rng.random_bool(0.5) => second,
            _ => first,
        }
    }

    fn step<R: Rng + ?Sized>(&mut self, rng: &mut R) {
        let n = self.n;
        let (r, c, s, r1, c1, s1) = match self.improper {
            None => {
                // uniformly random cell holding a 0
                let (r, c, s) = loop {
                    let (r, c, s) = (
                        rng.random_range(0..n),
                        rng.random_range(0..n),
                        rng.random_range(0..n),
                    );
                    if self.get(r, c, s) == 0 {
                        break (r, c, s);
                    }
                };
                let r1 = Self::ones_on_line(n, |x| self.get(x, c, s)).next().unwrap();
                let c1 = Self::ones_on_line(n, |x| self.get(r, x, s)).next().unwrap();
                let s1 = Self::ones_on_line(n, |x| self.get(r, c, x)).next().unwrap();
                (r, c, s, r1, c1, s1)
            }
            Some((r, c, s)) => {
                let r1 = Self::pick(rng, Self::ones_on_line(n, |x| self.get(x, c, s)));
                let c1 = Self::pick(rng, Self::ones_on_line(n, |x| self.get(r, x, s)));
                let s1 = Self::pick(rng, Self::ones_on_line(n, |x| self.get(r, c, x)));
                (r, c, s, r1, c1, s1)
            }
        };

        self.add(r, c, s, 1);
        self.add(r, c1, s1, 1);
        self.add(r1, c, s1, 1);
        self.add(r1, c1, s, 1);
        self.add(r, c, s1, -1);
        self.add(r, c1, s, -1);
        self.add(r1, c, s, -1);
        self.add(r1, c1, s1, -1);

        self.improper = (self.get(r1, c1, s1) == -1).then_some((r1, c1, s1));
    }

    fn to_square(&self) -> LatinSquare {
        debug_assert!(self.improper.is_none());
        let n = self.n;
        let cells = (0..n * n)
            .map(|rc| {
                (0..n)
                    .find(|&s| self.cube[rc * n + s] == 1)
                    .expect("proper cube has a symbol in every cell")
            })
            .collect();
        LatinSquare { n, cells }
    }
}

/// Runs the Jacobson–Matthews chain from the cyclic square for `moves` steps,
/// then continues until the cube is proper again.
pub fn jacobson_matthews<R: Rng + ?Sized>(n: usize, moves: usize, rng: &mut R) -> LatinSquare {
    let start = LatinSquare::cyclic(n);
    if n < 2 {
        return start;
    }
    let mut cube = IncidenceCube::from_square(&start);
    for _ in 0..moves {
        cube.step(rng);
    }
    while cube.improper.is_some() {
        cube.step(rng);
    }
    cube.to_square()
}

/// Burn-in used by [`random_latin_square`]: `10 n³` moves.
pub fn default_burn_in(n: usize) -> usize {
    10 * n * n * n
}

pub fn random_latin_square<R: Rng + ?Sized>(n: usize, rng: &mut R) -> LatinSquare {
    jacobson_matthews(n, default_burn_in(n), rng)
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    #[test]
    fn cyclic_is_latin() {
        for n in 1..=9 {
            assert!(LatinSquare::cyclic(n).is_latin());
        }
    }

    #[test]
    fn chain_preserves_latin_property() {
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        for n in [2, 3, 5, 8] {
            for moves in [0, 1, 7, 100] {
                assert!(jacobson_matthews(n, moves, &mut rng).is_latin());
            }
        }
    }

    #[test]
    fn chain_leaves_the_cyclic_square() {
        let mut rng = ChaCha8Rng::seed_from_u64(11);
        let sq = random_latin_square(6, &mut rng);
        assert!(sq.is_latin());
        assert_ne!(sq, LatinSquare::cyclic(6));
    }

    #[test]
    fn order_three_squares_are_all_reached() {
        // There are exactly 12 Latin squares of order 3.
        let mut rng = ChaCha8Rng::seed_from_u64(5);
        let mut seen = std::collections::HashSet::new();
        for _ in 0..400 {
            seen.insert(jacobson_matthews(3, 30, &mut rng).cells);
        }
        assert_eq!(seen.len(), 12);
    }

    #[test]
    fn csv_round_trip_and_rejection() {
        let sq = LatinSquare::cyclic(4);
        assert_eq!(LatinSquare::from_csv(&sq.to_csv()).unwrap(), sq);
        assert!(LatinSquare::from_csv("0,1\n0,1\n").is_err());
    }
}
