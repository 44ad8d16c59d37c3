//! Robustness of directed-network controllability under random node-removal
//! attacks: driver-node counts, attack curves and `R_c`, exhaustive search
//! over small graphs, the degree-band condition on in/out-degrees and random
//! edge rectification towards it.

pub mod attack;
pub mod controllability;
pub mod enc;
pub mod enumeration;
pub mod error;
pub mod experiment;
pub mod generators;
pub mod graph;
pub mod io;
pub mod metrics;
pub mod rng;

pub use error::{Error, Result};
pub use graph::{CanonicalForm, DegreeVector, DirectedGraph, EdgeSet, Side};
