//! Quantum graphs built from edge-coloured digraphs: unitary propagators,
//! their classical Markov shadows, spectral statistics and coined walks.

pub mod classical;
pub mod colouring;
pub mod error;
pub mod graph;
pub mod linalg;
pub mod propagator;
pub mod qwalk;
pub mod seed;
pub mod spectral;
pub mod stats;

pub use error::{Error, Result};
pub use graph::Digraph;
pub use linalg::CMat;
pub use propagator::{Coin, Propagator, QuantumGraph};
