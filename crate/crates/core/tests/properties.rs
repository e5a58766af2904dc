use std::f64::consts::TAU;

use num_complex::Complex64;
use proptest::prelude::*;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use qgraph::classical::to_stochastic;
use qgraph::colouring::{line_graph_adjacency_from_colouring, random_latin_colouring, verify_colouring};
use qgraph::graph::{AdjacencyMatrix, Digraph};
use qgraph::linalg::{matrix_power, max_abs_diff, random_unitary, trace, unitarity_deviation};
use qgraph::propagator::{build_propagator, build_regular_propagator, Coin, QuantumGraph, VertexScatteringSet};
use qgraph::qwalk::{walk_step, ShiftRule, WalkState};
use qgraph::spectral::{eigenphases, periodic_orbit_trace, unfolded_spacings, EigenphaseSet};
use qgraph::CMat;

/// Arc-disjoint union of random simple cycles: always quantisable.
fn cycle_union(n: usize, cycles: usize, rng: &mut ChaCha8Rng) -> Digraph {
    let mut arcs: Vec<(usize, usize)> = Vec::new();
    for _ in 0..cycles {
        let len = rng.random_range(1..=n);
        let mut verts: Vec<usize> = (0..n).collect();
        for i in 0..len {
            let j = rng.random_range(i..n);
            verts.swap(i, j);
        }
        let cyc: Vec<(usize, usize)> = (0..len).map(|i| (verts[i], verts[(i + 1) % len])).collect();
        if cyc.iter().all(|a| !arcs.contains(a)) {
            arcs.extend(cyc);
        }
    }
    if arcs.is_empty() {
        arcs.push((0, 0));
    }
    Digraph::new(n, arcs).unwrap()
}

fn random_graph(seed: u64, n: usize, cycles: usize) -> (QuantumGraph, ChaCha8Rng) {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let g = cycle_union(n, cycles, &mut rng);
    let scat = VertexScatteringSet::haar_random(&g, &mut rng).unwrap();
    let lengths = (0..g.n_arcs()).map(|_| rng.random_range(0.1..2.0)).collect();
    (QuantumGraph::new(g, scat, lengths).unwrap(), rng)
}

fn random_regular(seed: u64, n: usize) -> (qgraph::colouring::EdgeColouring, Coin) {
    let c = random_latin_colouring(n, seed).unwrap();
    let mut rng = ChaCha8Rng::seed_from_u64(seed ^ 0x5eed);
    let lengths = (0..n).map(|_| rng.random_range(0.1..2.0)).collect();
    (c, Coin::new(random_unitary(n, &mut rng), lengths).unwrap())
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn line_digraph_arc_count(n in 1usize..=4, bits in any::<u16>()) {
        let arcs: Vec<(usize, usize)> = (0..n * n)
            .filter(|i| bits >> i & 1 == 1)
            .map(|i| (i / n, i % n))
            .take(8)
            .collect();
        let g = Digraph::new(n, arcs.clone()).unwrap();
        let want: usize = g.degree_profile().iter().map(|d| d.d_in * d.d_out).sum();
        prop_assert_eq!(g.line_digraph().n_arcs(), want);

        let a = g.adjacency_matrix();
        let balanced = (0..n).all(|v| a.row_sum(v) == a.col_sum(v));
        prop_assert_eq!(g.is_quantisable(), balanced);
        let rebuilt = Digraph::from_adjacency(&AdjacencyMatrix::from_rows(&a.to_rows()).unwrap()).unwrap();
        prop_assert_eq!(rebuilt.arcs(), g.arcs());
    }

    #[test]
    fn generic_propagators_are_unitary_and_local(seed in any::<u64>(), n in 1usize..=5, cycles in 1usize..=6, k in -50.0f64..50.0) {
        let (qg, _) = random_graph(seed, n, cycles);
        let p = qg.propagator(k).unwrap();
        prop_assert!(unitarity_deviation(p.matrix()) < 1e-12);
        let g = qg.graph();
        for e in 0..g.n_arcs() {
            for f in 0..g.n_arcs() {
                if p.matrix()[(e, f)].norm() > 0.0 {
                    prop_assert_eq!(g.arc(e).1, g.arc(f).0);
                }
            }
        }
        let t = to_stochastic(&p);
        prop_assert!(t.is_doubly_stochastic(1e-12));
    }

    #[test]
    fn phase_covariance(seed in any::<u64>(), lambda in 0.1f64..10.0, k in -20.0f64..20.0) {
        let (qg, _) = random_graph(seed, 4, 5);
        let scaled: Vec<f64> = qg.lengths().iter().map(|l| l * lambda).collect();
        let p = qg.propagator(k).unwrap();
        let q = build_propagator(qg.graph(), qg.scattering(), &scaled, k / lambda).unwrap();
        prop_assert!(max_abs_diff(p.matrix(), q.matrix()) < 1e-13);
    }

    #[test]
    fn regular_propagators(seed in any::<u64>(), n in 1usize..=7, k in -20.0f64..20.0) {
        let (c, coin) = random_regular(seed, n);
        prop_assert!(verify_colouring(&c));
        let l = line_graph_adjacency_from_colouring(&c).unwrap();
        prop_assert!((0..n * n).all(|i| l.row_sum(i) == n && l.col_sum(i) == n));
        let p = build_regular_propagator(&c, &coin, k).unwrap();
        prop_assert!(unitarity_deviation(p.matrix()) < 1e-12);
        prop_assert!(to_stochastic(&p).is_doubly_stochastic(1e-12));
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(24))]

    #[test]
    fn orbit_sum_equals_matrix_trace(seed in any::<u64>(), n in 1usize..=4, cycles in 1usize..=5, k in 0.0f64..30.0) {
        let (qg, _) = random_graph(seed, n, cycles);
        let p = qg.propagator(k).unwrap();
        for power in 1..=6 {
            let orbit = periodic_orbit_trace(&qg, k, power, 12).unwrap();
            let direct = trace(&matrix_power(p.matrix(), power));
            prop_assert!((orbit - direct).norm() < 1e-8, "n = {}: {} vs {}", power, orbit, direct);
        }
    }

    #[test]
    fn form_factor_sum_is_basis_independent(seed in any::<u64>(), dim in 2usize..=12) {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let s = random_unitary(dim, &mut rng);
        let v = random_unitary(dim, &mut rng);
        let conj: CMat = &v * &s * v.adjoint();
        let parseval = |m: &CMat| -> f64 {
            (1..=dim).map(|n| trace(&matrix_power(m, n)).norm_sqr()).sum::<f64>() / dim as f64
        };
        let (a, b) = (parseval(&s), parseval(&conj));
        prop_assert!((a - b).abs() < 1e-9 * a.max(1.0));
    }

    #[test]
    fn spacings_close_the_circle(seed in any::<u64>(), dim in 2usize..=30) {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let p = qgraph::Propagator::from_unitary(random_unitary(dim, &mut rng)).unwrap();
        let set = eigenphases(&p).unwrap();
        let spacings = unfolded_spacings(&set).unwrap();
        let raw: f64 = spacings.iter().sum::<f64>() * TAU / dim as f64;
        prop_assert!((raw - TAU).abs() < 1e-10);
        prop_assert!((spacings.iter().sum::<f64>() / dim as f64 - 1.0).abs() < 1e-12);
    }

    #[test]
    fn walks_conserve_norm_and_match_the_propagator(seed in any::<u64>(), sites in 3usize..=12, steps in 1usize..=20) {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let coin = Coin::new(random_unitary(2, &mut rng), vec![1.0, 1.0]).unwrap();
        let rule = ShiftRule::ring(sites).unwrap();
        let raw: Vec<Complex64> = (0..2 * sites)
            .map(|_| Complex64::new(rng.random::<f64>() - 0.5, rng.random::<f64>() - 0.5))
            .collect();
        let norm = raw.iter().map(Complex64::norm_sqr).sum::<f64>().sqrt();
        let amps: Vec<Complex64> = raw.iter().map(|z| z / norm).collect();
        let mut s = WalkState::from_amplitudes(sites, 2, amps.clone(), 0).unwrap();
        for _ in 0..steps {
            s = walk_step(&s, &coin, &rule).unwrap();
            prop_assert!((s.norm_sqr() - 1.0).abs() < 1e-12);
        }
        let p = build_regular_propagator(&rule.to_colouring().unwrap(), &coin, 0.0).unwrap();
        let m = matrix_power(p.matrix(), steps);
        for row in 0..2 * sites {
            let want: Complex64 = (0..2 * sites).map(|col| m[(row, col)] * amps[col]).sum();
            prop_assert!((want - s.amplitudes()[row]).norm() < 1e-10);
        }
    }

    #[test]
    fn coin_phases_are_removed_from_regular_spectra(seed in any::<u64>(), n in 2usize..=6) {
        let (c, coin) = random_regular(seed, n);
        let p = build_regular_propagator(&c, &coin, 1.0).unwrap();
        let all = eigenphases(&p).unwrap();
        let coin_set = EigenphaseSet::from_eigenvalues(
            &qgraph::linalg::complex_eigenvalues(&coin.matrix(1.0)).unwrap(),
        )
        .unwrap();
        prop_assert_eq!(all.remove_nearest(coin_set.phases()).len(), n * n - n);
    }
}

#[test]
fn latin_colourings_are_deterministic() {
    for n in [3, 5, 8] {
        let a = random_latin_colouring(n, 42).unwrap().to_json();
        let b = random_latin_colouring(n, 42).unwrap().to_json();
        assert_eq!(a, b);
    }
}
