//! Greedy-swap solvers for one knapsack plus an intersection of matroid
//! constraints, together with the exact brute-force search and a
//! density-greedy baseline used for comparison.
//!
//! A run guesses a protected seed set `Y` (the empty set, every feasible
//! singleton, and every feasible pair), then repeatedly applies the best
//! positive-density swap: one element enters, up to `k` elements leave, the
//! set stays independent in every matroid, and the budget is never
//! exceeded. The best result over all guesses wins.

use std::cmp::Ordering;
use std::f64::consts::E;

use rayon::prelude::*;
use serde::Serialize;

use crate::error::{Error, Result};
use crate::model::{ElementId, ElementSet, Instance, Solution};
use crate::oracles::Evaluator;

/// Hard cap for exhaustive search without an explicit size cap.
pub const BRUTE_FORCE_MAX_N: usize = 22;

/// One candidate move: `incoming` enters, `removal ⊆ S` leaves (empty for a
/// pure addition), with the resulting set independent in every matroid.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct SwapCandidate {
    pub incoming: ElementId,
    pub removal: ElementSet,
    /// `f((S ∖ removal) ∪ {incoming}) − f(S)`.
    pub gain: f64,
    /// Marginal profit density `gain / c_incoming`; `+∞` for zero-cost
    /// incoming elements with positive gain (zero-cost candidates without
    /// positive gain are dropped at enumeration time).
    pub density: f64,
}

/// Candidate order: density desc, gain desc, incoming asc, removal asc.
fn candidate_order(a: &SwapCandidate, b: &SwapCandidate) -> Ordering {
    b.density
        .total_cmp(&a.density)
        .then_with(|| b.gain.total_cmp(&a.gain))
        .then_with(|| a.incoming.cmp(&b.incoming))
        .then_with(|| a.removal.cmp(&b.removal))
}

/// Which swap enumerator drives the inner loop.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
pub enum SwapEngine {
    /// Single-matroid engine when the instance has one matroid, k-swap
    /// engine otherwise.
    Auto,
    /// Pairwise `(x, y)` enumeration; requires exactly one matroid.
    SingleMatroid,
    /// Removal subsets of size up to the number of matroids.
    KSwap,
}

/// Denominator of the threshold factor `1 + ε/denominator`.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
pub enum ThresholdScale {
    /// `1 + ε/n²`: keeps the guaranteed approximation ratio.
    Quadratic,
    /// `1 + ε/n`: faster, trades away a slice of the ratio; no guarantee
    /// is asserted in this mode.
    Linear,
}

#[derive(Clone, Debug)]
pub struct SolverConfig {
    /// Threshold parameter; `0` disables thresholding entirely.
    pub epsilon: f64,
    /// Protect the guess set from removal for the whole run.
    pub protect_guess: bool,
    /// Safety cap on passes per guess; defaults to `10·n³` when ε = 0 and
    /// unlimited in threshold mode (which terminates on its own).
    pub max_iterations: Option<u64>,
    pub engine: SwapEngine,
    pub threshold_scale: ThresholdScale,
}

impl Default for SolverConfig {
    fn default() -> Self {
        Self {
            epsilon: 0.0,
            protect_guess: true,
            max_iterations: None,
            engine: SwapEngine::Auto,
            threshold_scale: ThresholdScale::Quadratic,
        }
    }
}

impl SolverConfig {
    /// Un-thresholded configuration (ε = 0).
    pub fn exact() -> Self {
        Self::default()
    }

    pub fn with_epsilon(epsilon: f64) -> Self {
        Self { epsilon, ..Self::default() }
    }

    /// Thresholded configuration at the largest ε that keeps the ratio
    /// guarantee for `k` matroids.
    pub fn thresholded_for(k: usize) -> Result<Self> {
        Ok(Self::with_epsilon(default_epsilon(k)?))
    }

    fn validate(&self) -> Result<()> {
        if !self.epsilon.is_finite() || self.epsilon < 0.0 {
            return Err(Error::InvalidArgument(format!(
                "epsilon must be nonnegative and finite, got {}",
                self.epsilon
            )));
        }
        Ok(())
    }

    fn pass_cap(&self, n: usize) -> u64 {
        match self.max_iterations {
            Some(cap) => cap,
            None if self.epsilon == 0.0 => 10 * (n.max(1) as u64).pow(3),
            None => u64::MAX,
        }
    }

    fn threshold_denominator(&self, n: usize) -> f64 {
        match self.threshold_scale {
            ThresholdScale::Quadratic => (n * n) as f64,
            ThresholdScale::Linear => n as f64,
        }
    }
}

#[derive(Clone, Copy)]
enum ResolvedEngine {
    Single,
    KSwap(usize),
}

fn resolve_engine(engine: SwapEngine, instance: &Instance) -> Result<ResolvedEngine> {
    let k = instance.matroid_count();
    match engine {
        SwapEngine::Auto => Ok(if k == 1 { ResolvedEngine::Single } else { ResolvedEngine::KSwap(k) }),
        SwapEngine::SingleMatroid => {
            if k != 1 {
                return Err(Error::Precondition(format!(
                    "single-matroid engine requires exactly one matroid, instance has {k}"
                )));
            }
            Ok(ResolvedEngine::Single)
        }
        SwapEngine::KSwap => Ok(ResolvedEngine::KSwap(k)),
    }
}

/// Per-guess counters.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct GuessStats {
    pub guess: ElementSet,
    pub start_value: f64,
    pub final_value: f64,
    pub accepted_swaps: u64,
    /// Accepted swaps with an empty removal set (pure additions).
    pub phi_swaps: u64,
    pub rejected_swaps: u64,
    pub oracle_calls: u64,
    /// Some popped candidate failed only the budget condition.
    pub budget_rejection_seen: bool,
    /// The pass cap aborted this guess before a local optimum was reached.
    pub cap_hit: bool,
}

/// Aggregated statistics for a full run.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct RunReport {
    /// The guess whose run produced the returned solution.
    pub best_guess: ElementSet,
    pub accepted_swaps: u64,
    pub phi_swaps: u64,
    pub rejected_swaps: u64,
    pub oracle_calls: u64,
    pub cap_hit: bool,
    pub per_guess: Option<Vec<GuessStats>>,
}

/// Outcome of a single greedy pass over the candidate list.
#[derive(Clone, Debug, PartialEq)]
pub struct PassOutcome {
    /// The (possibly updated) solution set.
    pub set: ElementSet,
    /// The swap that was applied, if any.
    pub accepted: Option<SwapCandidate>,
    /// Some candidate was rejected solely by the budget condition.
    pub budget_rejected: bool,
    /// Candidates popped and rejected before acceptance or exhaustion.
    pub rejected: u64,
}

fn apply_swap(s: &ElementSet, candidate: &SwapCandidate) -> ElementSet {
    let mut out = s.clone();
    for y in &candidate.removal {
        out.remove(y);
    }
    out.insert(candidate.incoming);
    out
}

/// All subsets of `members` with size at most `k`, including the empty set.
fn removal_subsets(members: &[ElementId], k: usize) -> Vec<ElementSet> {
    let mut out = vec![ElementSet::new()];
    let mut stack: Vec<ElementId> = Vec::new();
    fn extend(
        members: &[ElementId],
        start: usize,
        left: usize,
        stack: &mut Vec<ElementId>,
        out: &mut Vec<ElementSet>,
    ) {
        if left == 0 {
            return;
        }
        for i in start..members.len() {
            stack.push(members[i]);
            out.push(stack.iter().copied().collect());
            extend(members, i + 1, left - 1, stack, out);
            stack.pop();
        }
    }
    extend(members, 0, k, &mut stack, &mut out);
    out
}

fn push_candidate(
    eval: &mut Evaluator<'_>,
    instance: &Instance,
    base_value: f64,
    x: ElementId,
    removal: ElementSet,
    set: &ElementSet,
    out: &mut Vec<SwapCandidate>,
) -> Result<()> {
    let gain = eval.eval(set)? - base_value;
    let cost = instance.cost_of(x);
    let density = if cost == 0.0 {
        if gain <= 0.0 {
            return Ok(()); // undefined density, can never be accepted
        }
        f64::INFINITY
    } else {
        gain / cost
    };
    out.push(SwapCandidate { incoming: x, removal, gain, density });
    Ok(())
}

fn enumerate_k_swaps(
    eval: &mut Evaluator<'_>,
    instance: &Instance,
    s: &ElementSet,
    k: usize,
    base_value: f64,
) -> Result<Vec<SwapCandidate>> {
    let members: Vec<ElementId> = s.iter().copied().collect();
    let removals = removal_subsets(&members, k);
    let mut out = Vec::new();
    for x in 0..instance.n() {
        if s.contains(&x) || instance.cost_of(x) > instance.budget() {
            continue;
        }
        for removal in &removals {
            let mut candidate_set: ElementSet = s.difference(removal).copied().collect();
            candidate_set.insert(x);
            if instance.independent(&candidate_set)? {
                push_candidate(eval, instance, base_value, x, removal.clone(), &candidate_set, &mut out)?;
            }
        }
    }
    out.sort_by(candidate_order);
    Ok(out)
}

fn enumerate_single_swaps(
    eval: &mut Evaluator<'_>,
    instance: &Instance,
    s: &ElementSet,
    base_value: f64,
) -> Result<Vec<SwapCandidate>> {
    let mut out = Vec::new();
    for x in 0..instance.n() {
        if s.contains(&x) || instance.cost_of(x) > instance.budget() {
            continue;
        }
        let mut with_x = s.clone();
        with_x.insert(x);
        if instance.independent(&with_x)? {
            push_candidate(eval, instance, base_value, x, ElementSet::new(), &with_x, &mut out)?;
        }
        for &y in s {
            let mut swapped = with_x.clone();
            swapped.remove(&y);
            if instance.independent(&swapped)? {
                push_candidate(
                    eval,
                    instance,
                    base_value,
                    x,
                    ElementSet::from([y]),
                    &swapped,
                    &mut out,
                )?;
            }
        }
    }
    out.sort_by(candidate_order);
    Ok(out)
}

/// Enumerates every swap `(x, removal)` for the independent set `s` with
/// `|removal| ≤ k`, sorted by density (then gain, incoming id, removal).
/// Elements costing more than the whole budget are never candidates.
pub fn enumerate_swaps(instance: &Instance, s: &ElementSet, k: usize) -> Result<Vec<SwapCandidate>> {
    if k < 1 || k > instance.matroid_count() {
        return Err(Error::Precondition(format!(
            "swap width must be between 1 and the matroid count {}, got {k}",
            instance.matroid_count()
        )));
    }
    if !instance.independent(s)? {
        return Err(Error::Precondition("enumerate_swaps: current set is dependent".into()));
    }
    let mut eval = Evaluator::new(instance.oracle());
    let base_value = eval.eval(s)?;
    enumerate_k_swaps(&mut eval, instance, s, k, base_value)
}

fn pass_with(
    eval: &mut Evaluator<'_>,
    instance: &Instance,
    s: &ElementSet,
    protect: &ElementSet,
    config: &SolverConfig,
    engine: ResolvedEngine,
) -> Result<PassOutcome> {
    let base_value = eval.eval(s)?;
    let base_cost = instance.total_cost(s)?;
    let candidates = match engine {
        ResolvedEngine::Single => enumerate_single_swaps(eval, instance, s, base_value)?,
        ResolvedEngine::KSwap(k) => enumerate_k_swaps(eval, instance, s, k, base_value)?,
    };
    let denominator = config.threshold_denominator(instance.n());
    let mut budget_rejected = false;
    let mut rejected = 0u64;
    for candidate in candidates {
        if !candidate.removal.is_disjoint(protect) {
            rejected += 1;
            continue;
        }
        if candidate.density <= 0.0 {
            rejected += 1;
            continue;
        }
        let new_set = apply_swap(s, &candidate);
        if config.epsilon > 0.0 && !candidate.removal.is_empty() {
            // Threshold applies to real swaps only, never to pure additions.
            let new_value = eval.eval(&new_set)?;
            if new_value < (1.0 + config.epsilon / denominator) * base_value {
                rejected += 1;
                continue;
            }
        }
        let removal_cost: f64 = candidate.removal.iter().map(|&y| instance.cost_of(y)).sum();
        if instance.cost_of(candidate.incoming) - removal_cost + base_cost > instance.budget() {
            budget_rejected = true;
            rejected += 1;
            continue;
        }
        debug_assert!(instance.is_feasible(&new_set).unwrap_or(false));
        debug_assert!(eval.eval(&new_set).unwrap() > base_value);
        return Ok(PassOutcome { set: new_set, accepted: Some(candidate), budget_rejected, rejected });
    }
    Ok(PassOutcome { set: s.clone(), accepted: None, budget_rejected, rejected })
}

/// Pops candidates in sorted order and applies the first acceptable swap:
/// removal disjoint from `protect`, positive density, threshold satisfied
/// (for real swaps in thresholded mode), and budget respected.
pub fn greedy_swap_pass(
    instance: &Instance,
    s: &ElementSet,
    protect: &ElementSet,
    config: &SolverConfig,
) -> Result<PassOutcome> {
    config.validate()?;
    if !instance.is_feasible(s)? {
        return Err(Error::Precondition("greedy_swap_pass: current set is infeasible".into()));
    }
    if !protect.is_subset(s) {
        return Err(Error::Precondition("greedy_swap_pass: protected set must lie inside the current set".into()));
    }
    let engine = resolve_engine(config.engine, instance)?;
    let mut eval = Evaluator::new(instance.oracle());
    pass_with(&mut eval, instance, s, protect, config, engine)
}

fn run_guess_core(
    instance: &Instance,
    guess: &ElementSet,
    config: &SolverConfig,
    engine: ResolvedEngine,
) -> Result<(Solution, GuessStats)> {
    if !instance.is_feasible(guess)? {
        return Err(Error::Precondition(format!("guess {guess:?} is infeasible")));
    }
    let mut eval = Evaluator::new(instance.oracle());
    let start_value = eval.eval(guess)?;
    let protect = if config.protect_guess { guess.clone() } else { ElementSet::new() };
    let cap = config.pass_cap(instance.n());

    let mut s = guess.clone();
    let mut accepted_swaps = 0u64;
    let mut phi_swaps = 0u64;
    let mut rejected_swaps = 0u64;
    let mut budget_rejection_seen = false;
    let mut cap_hit = false;
    let mut passes = 0u64;
    loop {
        if passes >= cap {
            cap_hit = true;
            break;
        }
        passes += 1;
        let outcome = pass_with(&mut eval, instance, &s, &protect, config, engine)?;
        budget_rejection_seen |= outcome.budget_rejected;
        rejected_swaps += outcome.rejected;
        match outcome.accepted {
            Some(candidate) => {
                accepted_swaps += 1;
                if candidate.removal.is_empty() {
                    phi_swaps += 1;
                }
                s = outcome.set;
            }
            None => break,
        }
    }
    let final_value = eval.eval(&s)?;
    let solution = Solution {
        value: final_value,
        cost: instance.total_cost(&s)?,
        feasible: instance.is_feasible(&s)?,
        elements: s,
    };
    debug_assert!(solution.feasible);
    let stats = GuessStats {
        guess: guess.clone(),
        start_value,
        final_value,
        accepted_swaps,
        phi_swaps,
        rejected_swaps,
        oracle_calls: eval.oracle_calls(),
        budget_rejection_seen,
        cap_hit,
    };
    Ok((solution, stats))
}

/// Runs greedy swap passes from the feasible seed `guess` until no swap is
/// accepted (or the pass cap aborts). With `protect_guess`, the returned
/// set always contains the guess.
pub fn run_with_guess(
    instance: &Instance,
    guess: &ElementSet,
    config: &SolverConfig,
) -> Result<(Solution, RunReport)> {
    config.validate()?;
    let engine = resolve_engine(config.engine, instance)?;
    let (solution, stats) = run_guess_core(instance, guess, config, engine)?;
    let report = RunReport {
        best_guess: guess.clone(),
        accepted_swaps: stats.accepted_swaps,
        phi_swaps: stats.phi_swaps,
        rejected_swaps: stats.rejected_swaps,
        oracle_calls: stats.oracle_calls,
        cap_hit: stats.cap_hit,
        per_guess: Some(vec![stats]),
    };
    Ok((solution, report))
}

/// Guesses tried by [`solve`]: the empty set, every feasible singleton, and
/// every feasible unordered pair, in ascending lexicographic order.
fn enumerate_guesses(instance: &Instance) -> Result<Vec<ElementSet>> {
    let mut guesses = vec![ElementSet::new()];
    for u in 0..instance.n() {
        if instance.is_feasible(&ElementSet::from([u]))? {
            guesses.push(ElementSet::from([u]));
        }
    }
    for u in 0..instance.n() {
        for v in u + 1..instance.n() {
            let pair = ElementSet::from([u, v]);
            if instance.is_feasible(&pair)? {
                guesses.push(pair);
            }
        }
    }
    Ok(guesses)
}

/// Full solver: enumerates guesses, runs greedy swaps per guess (guesses in
/// parallel on the current thread pool), and returns the best solution,
/// breaking value ties toward the lexicographically smallest element set.
/// The reduction is performed in guess order, so results are independent of
/// worker scheduling.
pub fn solve(instance: &Instance, config: &SolverConfig) -> Result<(Solution, RunReport)> {
    config.validate()?;
    let engine = resolve_engine(config.engine, instance)?;
    let guesses = enumerate_guesses(instance)?;
    let results: Vec<(Solution, GuessStats)> = guesses
        .par_iter()
        .map(|guess| run_guess_core(instance, guess, config, engine))
        .collect::<Result<Vec<_>>>()?;

    let mut best: Option<(Solution, ElementSet)> = None;
    let mut accepted_swaps = 0;
    let mut phi_swaps = 0;
    let mut rejected_swaps = 0;
    let mut oracle_calls = 0;
    let mut cap_hit = false;
    let mut per_guess = Vec::with_capacity(results.len());
    for (solution, stats) in results {
        accepted_swaps += stats.accepted_swaps;
        phi_swaps += stats.phi_swaps;
        rejected_swaps += stats.rejected_swaps;
        oracle_calls += stats.oracle_calls;
        cap_hit |= stats.cap_hit;
        let replace = match &best {
            None => true,
            Some((incumbent, _)) => incumbent.is_improved_by(&solution),
        };
        if replace {
            best = Some((solution, stats.guess.clone()));
        }
        per_guess.push(stats);
    }
    let (solution, best_guess) = best.expect("the empty guess is always present");
    let report = RunReport {
        best_guess,
        accepted_swaps,
        phi_swaps,
        rejected_swaps,
        oracle_calls,
        cap_hit,
        per_guess: Some(per_guess),
    };
    Ok((solution, report))
}

/// Exhaustive search over feasible subsets, pruning supersets of infeasible
/// sets. Ties break toward the lexicographically smallest set. Refuses
/// ground sets beyond [`BRUTE_FORCE_MAX_N`] unless `size_cap` bounds the
/// solution cardinality.
pub fn brute_force(instance: &Instance, size_cap: Option<usize>) -> Result<Solution> {
    if size_cap.is_none() && instance.n() > BRUTE_FORCE_MAX_N {
        return Err(Error::Resource(format!(
            "exhaustive search over n = {} requires a size cap (hard limit n <= {BRUTE_FORCE_MAX_N})",
            instance.n()
        )));
    }
    let cap = size_cap.unwrap_or(instance.n());
    let mut eval = Evaluator::uncached(instance.oracle());

    struct Search<'a> {
        instance: &'a Instance,
        cap: usize,
        best_value: f64,
        best_set: ElementSet,
    }

    impl Search<'_> {
        fn visit(
            &mut self,
            eval: &mut Evaluator<'_>,
            current: &mut ElementSet,
            cost: f64,
            next: ElementId,
        ) -> Result<()> {
            let value = eval.eval(current)?;
            if value > self.best_value || (value == self.best_value && *current < self.best_set) {
                self.best_value = value;
                self.best_set = current.clone();
            }
            if current.len() == self.cap {
                return Ok(());
            }
            for e in next..self.instance.n() {
                let new_cost = cost + self.instance.cost_of(e);
                if new_cost > self.instance.budget() {
                    continue;
                }
                current.insert(e);
                if self.instance.independent(current)? {
                    self.visit(eval, current, new_cost, e + 1)?;
                }
                current.remove(&e);
            }
            Ok(())
        }
    }

    let mut search = Search {
        instance,
        cap,
        best_value: f64::NEG_INFINITY,
        best_set: (0..instance.n()).collect(),
    };
    let mut current = ElementSet::new();
    search.visit(&mut eval, &mut current, 0.0, 0)?;
    instance.solution_from_set(&search.best_set)
}

/// Orders a set greedily by marginal value: each next element maximizes the
/// gain over the prefix, ties toward the smallest id.
pub fn optimal_ordering(instance: &Instance, set: &ElementSet) -> Result<Vec<ElementId>> {
    let mut eval = Evaluator::new(instance.oracle());
    let mut remaining: Vec<ElementId> = set.iter().copied().collect();
    let mut prefix = ElementSet::new();
    let mut prefix_value = eval.eval(&prefix)?;
    let mut order = Vec::with_capacity(remaining.len());
    while !remaining.is_empty() {
        let mut best: Option<(usize, f64)> = None;
        for (i, &u) in remaining.iter().enumerate() {
            let mut with_u = prefix.clone();
            with_u.insert(u);
            let gain = eval.eval(&with_u)? - prefix_value;
            if best.is_none_or(|(_, g)| gain > g) {
                best = Some((i, gain));
            }
        }
        let (i, gain) = best.expect("remaining is nonempty");
        let u = remaining.remove(i);
        prefix.insert(u);
        prefix_value += gain;
        order.push(u);
    }
    Ok(order)
}

/// Density-greedy baseline: per guess, repeatedly add the feasible element
/// with the best positive gain-per-cost (no removals), then return the best
/// result over all guesses. Comparison only; no ratio is claimed under
/// matroid constraints.
pub fn greedy_baseline(instance: &Instance) -> Result<Solution> {
    let guesses = enumerate_guesses(instance)?;
    let mut best: Option<Solution> = None;
    for guess in &guesses {
        let solution = grow_greedily(instance, guess)?;
        let replace = match &best {
            None => true,
            Some(incumbent) => incumbent.is_improved_by(&solution),
        };
        if replace {
            best = Some(solution);
        }
    }
    Ok(best.expect("the empty guess is always present"))
}

fn grow_greedily(instance: &Instance, guess: &ElementSet) -> Result<Solution> {
    let mut eval = Evaluator::new(instance.oracle());
    let mut s = guess.clone();
    let mut cost = instance.total_cost(&s)?;
    loop {
        let base_value = eval.eval(&s)?;
        let mut best: Option<SwapCandidate> = None;
        for x in 0..instance.n() {
            if s.contains(&x) || cost + instance.cost_of(x) > instance.budget() {
                continue;
            }
            let mut with_x = s.clone();
            with_x.insert(x);
            if !instance.independent(&with_x)? {
                continue;
            }
            let gain = eval.eval(&with_x)? - base_value;
            if gain <= 0.0 {
                continue;
            }
            let c = instance.cost_of(x);
            let density = if c == 0.0 { f64::INFINITY } else { gain / c };
            let candidate =
                SwapCandidate { incoming: x, removal: ElementSet::new(), gain, density };
            let replace = match &best {
                None => true,
                Some(incumbent) => candidate_order(&candidate, incumbent) == Ordering::Less,
            };
            if replace {
                best = Some(candidate);
            }
        }
        match best {
            Some(candidate) => {
                cost += instance.cost_of(candidate.incoming);
                s.insert(candidate.incoming);
            }
            None => break,
        }
    }
    instance.solution_from_set(&s)
}

/// Largest threshold parameter that keeps the approximation guarantee:
/// `4/(e²−1)` for one matroid, `(2k+2)/(e²−1)` in general (the same value
/// at k = 1).
pub fn default_epsilon(k: usize) -> Result<f64> {
    if k < 1 {
        return Err(Error::InvalidArgument(format!("matroid count must be >= 1, got {k}")));
    }
    Ok((2.0 * k as f64 + 2.0) / (E * E - 1.0))
}

/// Guaranteed approximation ratio `(1 − e^{−(k+1)})/(k+1)` for `k` matroid
/// constraints plus one knapsack.
pub fn guaranteed_ratio(k: usize) -> Result<f64> {
    if k < 1 {
        return Err(Error::InvalidArgument(format!("matroid count must be >= 1, got {k}")));
    }
    let kk = (k + 1) as f64;
    Ok((1.0 - (-kk).exp()) / kk)
}
