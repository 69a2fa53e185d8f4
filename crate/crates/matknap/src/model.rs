//! Instance and solution data model plus feasibility checking shared by the
//! solvers and the experiment harness.
//!
//! An instance couples a dense ground set `{0, …, n−1}` with nonnegative
//! element costs, a budget, at least one matroid, and a value oracle. A set
//! is feasible when its total cost fits the budget and it is independent in
//! every matroid.

use serde::Serialize;
use std::collections::BTreeSet;

use crate::error::{Error, Result};
use crate::matroids::{independent_in_all, MatroidSpec};
use crate::oracles::{OracleSpec, ValueOracle};

/// Index into the dense ground set, `0 ≤ id < n`.
pub type ElementId = usize;

/// A set of ground-set elements. `BTreeSet` gives deterministic ascending
/// iteration, which downstream tie-breaking relies on.
pub type ElementSet = BTreeSet<ElementId>;

/// A problem instance. Immutable after construction and shareable across
/// worker threads.
#[derive(Clone, Debug, PartialEq)]
pub struct Instance {
    n: usize,
    costs: Vec<f64>,
    budget: f64,
    matroids: Vec<MatroidSpec>,
    oracle: OracleSpec,
}

impl Instance {
    pub fn new(
        n: usize,
        costs: Vec<f64>,
        budget: f64,
        matroids: Vec<MatroidSpec>,
        oracle: OracleSpec,
    ) -> Result<Self> {
        if costs.len() != n {
            return Err(Error::Validation {
                field: "costs",
                message: format!("length {} != n = {n}", costs.len()),
            });
        }
        for (e, &c) in costs.iter().enumerate() {
            if !c.is_finite() || c < 0.0 {
                return Err(Error::Validation {
                    field: "costs",
                    message: format!("cost of element {e} is {c}; must be nonnegative and finite"),
                });
            }
        }
        if !budget.is_finite() || budget < 0.0 {
            return Err(Error::Validation {
                field: "budget",
                message: format!("budget is {budget}; must be nonnegative and finite"),
            });
        }
        if matroids.is_empty() {
            return Err(Error::Validation {
                field: "matroids",
                message: "at least one matroid is required".into(),
            });
        }
        for (j, m) in matroids.iter().enumerate() {
            if let Some(size) = m.ground_size() {
                if size != n {
                    return Err(Error::Validation {
                        field: "matroids",
                        message: format!("matroid {j} ({}) covers {size} elements, expected {n}", m.kind()),
                    });
                }
            }
        }
        if oracle.ground_size() != n {
            return Err(Error::Validation {
                field: "oracle",
                message: format!("oracle covers {} elements, expected {n}", oracle.ground_size()),
            });
        }
        Ok(Self { n, costs, budget, matroids, oracle })
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn costs(&self) -> &[f64] {
        &self.costs
    }

    pub fn cost_of(&self, e: ElementId) -> f64 {
        self.costs[e]
    }

    pub fn budget(&self) -> f64 {
        self.budget
    }

    pub fn matroids(&self) -> &[MatroidSpec] {
        &self.matroids
    }

    /// Number of matroid constraints (the `k` of the k-swap engine).
    pub fn matroid_count(&self) -> usize {
        self.matroids.len()
    }

    pub fn oracle(&self) -> &OracleSpec {
        &self.oracle
    }

    fn check_elements(&self, set: &ElementSet) -> Result<()> {
        if let Some(&id) = set.iter().next_back() {
            if id >= self.n {
                return Err(Error::InvalidElement { id, n: self.n });
            }
        }
        Ok(())
    }

    /// Total cost of a set, summed in ascending id order.
    pub fn total_cost(&self, set: &ElementSet) -> Result<f64> {
        self.check_elements(set)?;
        Ok(set.iter().map(|&e| self.costs[e]).sum())
    }

    /// Independence in the intersection of all matroid constraints.
    pub fn independent(&self, set: &ElementSet) -> Result<bool> {
        self.check_elements(set)?;
        independent_in_all(&self.matroids, set)
    }

    /// A set is feasible when its cost fits the budget and it is
    /// independent in every matroid.
    pub fn is_feasible(&self, set: &ElementSet) -> Result<bool> {
        Ok(self.total_cost(set)? <= self.budget && self.independent(set)?)
    }

    /// Packages a set with its objective value, cost, and feasibility.
    pub fn solution_from_set(&self, set: &ElementSet) -> Result<Solution> {
        self.check_elements(set)?;
        Ok(Solution {
            value: self.oracle.eval(set)?,
            cost: self.total_cost(set)?,
            feasible: self.is_feasible(set)?,
            elements: set.clone(),
        })
    }
}

/// A selected element set together with its recomputable statistics.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct Solution {
    pub elements: ElementSet,
    pub value: f64,
    pub cost: f64,
    pub feasible: bool,
}

impl Solution {
    pub fn empty(instance: &Instance) -> Result<Self> {
        instance.solution_from_set(&ElementSet::new())
    }

    /// `true` when `other` is strictly better: larger value, or equal value
    /// with a lexicographically smaller element set.
    pub fn is_improved_by(&self, other: &Solution) -> bool {
        other.value > self.value || (other.value == self.value && other.elements < self.elements)
    }
}
