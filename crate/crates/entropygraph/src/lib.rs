//! Maximum-entropy edge models for (almost-)given degree sequences.
//!
//! The crate is organized around five pieces of machinery:
//!
//! - [`degseq`]: degree sequences, Erdős–Gallai conditions (strict, non-strict,
//!   dense), the `S_k` / `ell` statistics and type-(ε,ν) classification.
//! - [`entropy`]: the maximum-entropy Bernoulli edge model `p_ij = r_i r_j / (1 + r_i r_j)`
//!   fitted to a degree sequence, its bipartite and sparse q-model variants, and
//!   the dual objectives used to cross-check the fit.
//! - [`trees`]: labeled-tree enumeration via Prüfer codes, the B-function `ψ`,
//!   wedge sums, and exact weighted embedding sums `F(T,G)`.
//! - [`graphs`]: simple-graph representation, Bernoulli sampling, exact
//!   enumeration of all graphs with a given degree sequence at tiny scale, and
//!   Markov-chain uniform samplers.
//! - [`rounding`]: the constructive rounding of a fractional bipartite weight
//!   matrix to a 0-1 graph whose degrees round the fractional degrees.
//! - [`stats`]: tree-probability estimators, weighted L-discrepancies,
//!   total-sum checks, and the Janson-style lower-tail concentration bound.
//!
//! [`checks`] bundles the numerical validation suite run by the `accept` CLI
//! subcommand and the `acceptance` integration test.

pub mod checks;
pub mod degseq;
pub mod entropy;
pub mod graphs;
pub mod io;
pub mod rounding;
pub mod stats;
pub mod trees;

pub use degseq::DegreeSequence;
pub use entropy::{BipartiteMaxEntropySolution, MaxEntropySolution, QModel};
pub use graphs::{BernoulliModel, SamplerConfig, SimpleGraph};
pub use trees::{LabeledTree, OrderedTree};
