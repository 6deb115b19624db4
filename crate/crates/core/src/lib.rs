//! Exact, asymptotic and simulated step counts of breadth-first search,
//! depth-first search and level-truncated depth-first search when the target
//! is a uniformly random node at a fixed level of a random ordered tree.
//!
//! The crate is organised bottom-up:
//!
//! - [`combinatorics`]: exact binomials, Catalan and ballot numbers.
//! - [`tree`]: ordered trees, the Dyck-word bijection, the three traversals.
//! - [`enumeration`]: exhaustive iteration over all trees with `n` edges and
//!   the brute-force totals used as ground truth.
//! - [`closed_forms`]: the exact formulas for every total.
//! - [`series`]: truncated power series, Fibonacci polynomials and the
//!   generating functions of the BFS and truncation totals.
//! - [`asymptotics`]: the normal CDF, the crossover constant, integer
//!   thresholds and large-`n` checks.
//! - [`gw`]: conditioned Galton–Watson sampling and Monte Carlo estimates.
//! - [`verify`]: pass/fail matrices tying the oracle, closed forms and
//!   series together.

pub mod asymptotics;
pub mod closed_forms;
pub mod combinatorics;
pub mod enumeration;
mod error;
pub mod gw;
pub mod series;
pub mod tree;
pub mod verify;

pub use asymptotics::ThresholdReport;
pub use combinatorics::{ExactInt, ExactRat};
pub use error::{Error, Result};
pub use gw::{EstimateReport, OffspringLaw, SimConfig};
pub use tree::{DyckWord, LevelProfile, OrderedTree, ScoreTable, Step};
