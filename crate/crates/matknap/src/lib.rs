//! Maximization of monotone submodular functions subject to one knapsack
//! constraint and the intersection of `k` matroid constraints.
//!
//! The solver seeds a protected two-element guess and then greedily applies
//! profit-density swaps (one element in, up to `k` out) until no swap
//! improves the objective; enumerating all guesses yields a
//! `(1 − e^{−(k+1)})/(k+1)` approximation. A thresholded mode accepts real
//! swaps only when they grow the objective by a factor of `1 + ε/n²`,
//! bounding the total number of swaps polynomially at the same ratio.
//!
//! The crate ships value oracles (coverage, modular, facility location),
//! matroid families (uniform, partition, graphic, explicit), an exact
//! brute-force search for desk-scale ratio verification, and an experiment
//! harness with a CLI (`matknap`).
//!
//! ```
//! use matknap::matroids::{MatroidSpec, UniformMatroid};
//! use matknap::oracles::{ModularOracle, OracleSpec};
//! use matknap::solver::{brute_force, solve, SolverConfig};
//! use matknap::Instance;
//!
//! # fn main() -> matknap::Result<()> {
//! // Three items, budget 4, at most two picks.
//! let instance = Instance::new(
//!     3,
//!     vec![3.0, 2.0, 2.0],
//!     4.0,
//!     vec![MatroidSpec::Uniform(UniformMatroid::new(2))],
//!     OracleSpec::Modular(ModularOracle::new(vec![6.0, 5.0, 4.0])?),
//! )?;
//! let (solution, _report) = solve(&instance, &SolverConfig::exact())?;
//! assert_eq!(solution.value, 9.0); // items 1 and 2 fit the budget
//! assert_eq!(solution.value, brute_force(&instance, None)?.value);
//! # Ok(())
//! # }
//! ```

pub mod error;
pub mod harness;
pub mod matroids;
pub mod model;
pub mod oracles;
pub mod solver;

pub use error::{Error, Result};
pub use model::{ElementId, ElementSet, Instance, Solution};
pub use solver::{solve, SolverConfig};
