//! Monotone submodular value oracles: weighted coverage, modular (additive),
//! and facility location, plus evaluation caching, call counting, and the
//! submodularity/monotonicity contract checker.

use std::collections::{BTreeSet, HashMap};
use std::fmt;

use rand::Rng;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::model::{ElementId, ElementSet};

/// Absolute tolerance for float-valued oracle property checks.
pub const CHECK_TOLERANCE: f64 = 1e-9;

/// Black-box access to a set function `f`. The solver reads the objective
/// only through this interface.
///
/// Implementations must be deterministic: the same set always yields the
/// same value.
pub trait ValueOracle: Send + Sync {
    /// Number of ground-set elements the oracle is defined over.
    fn ground_size(&self) -> usize;

    /// Evaluates `f(set)`.
    fn eval(&self, set: &ElementSet) -> Result<f64>;
}

fn check_element_range(set: &ElementSet, n: usize) -> Result<()> {
    if let Some(&id) = set.iter().next_back() {
        if id >= n {
            return Err(Error::InvalidOracle(format!(
                "element {id} out of range for oracle over {n} elements"
            )));
        }
    }
    Ok(())
}

fn check_nonneg_finite(values: &[f64], field: &'static str) -> Result<()> {
    for (i, &v) in values.iter().enumerate() {
        if !v.is_finite() || v < 0.0 {
            return Err(Error::Validation {
                field,
                message: format!("entry {i} is {v}; must be nonnegative and finite"),
            });
        }
    }
    Ok(())
}

/// Weighted coverage objective: element `u` covers the universe items in
/// `sets[u]`, and `f(S)` is the total weight of the items covered by `S`.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct CoverageOracle {
    universe_size: usize,
    sets: Vec<BTreeSet<usize>>,
    weights: Vec<f64>,
}

impl CoverageOracle {
    /// Builds a coverage oracle; `weights == None` means unit weights.
    pub fn new(
        universe_size: usize,
        sets: Vec<BTreeSet<usize>>,
        weights: Option<Vec<f64>>,
    ) -> Result<Self> {
        if universe_size == 0 {
            return Err(Error::Validation {
                field: "universe_size",
                message: "must be positive".into(),
            });
        }
        for (u, s) in sets.iter().enumerate() {
            if let Some(&j) = s.iter().next_back() {
                if j >= universe_size {
                    return Err(Error::Validation {
                        field: "sets",
                        message: format!("element {u} covers item {j} >= universe_size"),
                    });
                }
            }
        }
        let weights = weights.unwrap_or_else(|| vec![1.0; universe_size]);
        if weights.len() != universe_size {
            return Err(Error::Validation {
                field: "weights",
                message: format!("length {} != universe_size {}", weights.len(), universe_size),
            });
        }
        check_nonneg_finite(&weights, "weights")?;
        Ok(Self { universe_size, sets, weights })
    }

    pub fn universe_size(&self) -> usize {
        self.universe_size
    }

    pub fn sets(&self) -> &[BTreeSet<usize>] {
        &self.sets
    }

    pub fn weights(&self) -> &[f64] {
        &self.weights
    }
}

impl ValueOracle for CoverageOracle {
    fn ground_size(&self) -> usize {
        self.sets.len()
    }

    fn eval(&self, set: &ElementSet) -> Result<f64> {
        check_element_range(set, self.sets.len())?;
        let mut covered = vec![false; self.universe_size];
        for &u in set {
            for &j in &self.sets[u] {
                covered[j] = true;
            }
        }
        // Accumulate in ascending item order for reproducible rounding.
        let mut total = 0.0;
        for (j, &hit) in covered.iter().enumerate() {
            if hit {
                total += self.weights[j];
            }
        }
        Ok(total)
    }
}

/// Additive objective: `f(S) = Σ_{u∈S} profits[u]`. Submodular with equality.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct ModularOracle {
    profits: Vec<f64>,
}

impl ModularOracle {
    pub fn new(profits: Vec<f64>) -> Result<Self> {
        check_nonneg_finite(&profits, "profits")?;
        Ok(Self { profits })
    }

    pub fn profits(&self) -> &[f64] {
        &self.profits
    }
}

impl ValueOracle for ModularOracle {
    fn ground_size(&self) -> usize {
        self.profits.len()
    }

    fn eval(&self, set: &ElementSet) -> Result<f64> {
        check_element_range(set, self.profits.len())?;
        Ok(set.iter().map(|&u| self.profits[u]).sum())
    }
}

/// Facility-location objective over an `n × m` affinity matrix:
/// `f(S) = Σ_j max_{u∈S} affinity[u][j]`, with `f(∅) = 0`.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct FacilityLocationOracle {
    affinity: Vec<Vec<f64>>,
}

impl FacilityLocationOracle {
    pub fn new(affinity: Vec<Vec<f64>>) -> Result<Self> {
        let m = affinity.first().map_or(0, Vec::len);
        for (u, row) in affinity.iter().enumerate() {
            if row.len() != m {
                return Err(Error::Validation {
                    field: "affinity",
                    message: format!("row {u} has length {}, expected {m}", row.len()),
                });
            }
            check_nonneg_finite(row, "affinity")?;
        }
        Ok(Self { affinity })
    }

    pub fn affinity(&self) -> &[Vec<f64>] {
        &self.affinity
    }

    fn columns(&self) -> usize {
        self.affinity.first().map_or(0, Vec::len)
    }
}

impl ValueOracle for FacilityLocationOracle {
    fn ground_size(&self) -> usize {
        self.affinity.len()
    }

    fn eval(&self, set: &ElementSet) -> Result<f64> {
        check_element_range(set, self.affinity.len())?;
        if set.is_empty() {
            return Ok(0.0);
        }
        let mut total = 0.0;
        for j in 0..self.columns() {
            let mut best = 0.0_f64;
            for &u in set {
                best = best.max(self.affinity[u][j]);
            }
            total += best;
        }
        Ok(total)
    }
}

/// Tagged oracle description as it appears in instance files.
#[derive(Clone, Debug, PartialEq, Serialize)]
#[serde(tag = "type", rename_all = "snake_case")]
pub enum OracleSpec {
    Coverage(CoverageOracle),
    Modular(ModularOracle),
    FacilityLocation(FacilityLocationOracle),
}

impl OracleSpec {
    pub fn as_oracle(&self) -> &dyn ValueOracle {
        match self {
            OracleSpec::Coverage(o) => o,
            OracleSpec::Modular(o) => o,
            OracleSpec::FacilityLocation(o) => o,
        }
    }

    pub fn kind(&self) -> &'static str {
        match self {
            OracleSpec::Coverage(_) => "coverage",
            OracleSpec::Modular(_) => "modular",
            OracleSpec::FacilityLocation(_) => "facility_location",
        }
    }
}

impl ValueOracle for OracleSpec {
    fn ground_size(&self) -> usize {
        self.as_oracle().ground_size()
    }

    fn eval(&self, set: &ElementSet) -> Result<f64> {
        self.as_oracle().eval(set)
    }
}

#[derive(Deserialize)]
#[serde(deny_unknown_fields)]
struct CoverageDoc {
    universe_size: usize,
    sets: Vec<BTreeSet<usize>>,
    #[serde(default)]
    weights: Option<Vec<f64>>,
}

#[derive(Deserialize)]
#[serde(deny_unknown_fields)]
struct ModularDoc {
    profits: Vec<f64>,
}

#[derive(Deserialize)]
#[serde(deny_unknown_fields)]
struct FacilityDoc {
    affinity: Vec<Vec<f64>>,
}

// Hand-written so that unknown keys are rejected inside each variant and
// the validating constructors run on every parsed document.
impl<'de> Deserialize<'de> for OracleSpec {
    fn deserialize<D>(deserializer: D) -> std::result::Result<Self, D::Error>
    where
        D: serde::Deserializer<'de>,
    {
        use serde::de::Error as _;
        let mut value = serde_json::Value::deserialize(deserializer)?;
        let obj = value
            .as_object_mut()
            .ok_or_else(|| D::Error::custom("oracle must be an object with a `type` key"))?;
        let tag = obj
            .remove("type")
            .ok_or_else(|| D::Error::custom("oracle is missing the `type` key"))?;
        let tag = tag
            .as_str()
            .ok_or_else(|| D::Error::custom("oracle `type` must be a string"))?
            .to_owned();
        let rest = serde_json::Value::Object(std::mem::take(obj));
        match tag.as_str() {
            "coverage" => {
                let doc: CoverageDoc = serde_json::from_value(rest).map_err(D::Error::custom)?;
                CoverageOracle::new(doc.universe_size, doc.sets, doc.weights)
                    .map(OracleSpec::Coverage)
                    .map_err(D::Error::custom)
            }
            "modular" => {
                let doc: ModularDoc = serde_json::from_value(rest).map_err(D::Error::custom)?;
                ModularOracle::new(doc.profits).map(OracleSpec::Modular).map_err(D::Error::custom)
            }
            "facility_location" => {
                let doc: FacilityDoc = serde_json::from_value(rest).map_err(D::Error::custom)?;
                FacilityLocationOracle::new(doc.affinity)
                    .map(OracleSpec::FacilityLocation)
                    .map_err(D::Error::custom)
            }
            other => Err(D::Error::custom(format!("unknown oracle type `{other}`"))),
        }
    }
}

/// Oracle usage counters.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize)]
pub struct OracleStats {
    /// Total `eval` requests, including those served from the cache.
    pub eval_calls: u64,
    /// Requests answered from the cache.
    pub cache_hits: u64,
}

/// Memoizing front end for a [`ValueOracle`].
///
/// The cache is keyed by the sorted id sequence and is unbounded; solver
/// runs instantiate one evaluator per guess, which clears it between
/// guesses. Caching never changes a returned value.
pub struct Evaluator<'a> {
    oracle: &'a dyn ValueOracle,
    cache: Option<HashMap<Vec<ElementId>, f64>>,
    stats: OracleStats,
}

impl<'a> Evaluator<'a> {
    pub fn new(oracle: &'a dyn ValueOracle) -> Self {
        Self { oracle, cache: Some(HashMap::new()), stats: OracleStats::default() }
    }

    /// An evaluator that forwards every request to the oracle.
    pub fn uncached(oracle: &'a dyn ValueOracle) -> Self {
        Self { oracle, cache: None, stats: OracleStats::default() }
    }

    pub fn eval(&mut self, set: &ElementSet) -> Result<f64> {
        self.stats.eval_calls += 1;
        let Some(cache) = self.cache.as_mut() else {
            return self.oracle.eval(set);
        };
        let key: Vec<ElementId> = set.iter().copied().collect();
        if let Some(&v) = cache.get(&key) {
            self.stats.cache_hits += 1;
            return Ok(v);
        }
        let v = self.oracle.eval(set)?;
        cache.insert(key, v);
        Ok(v)
    }

    pub fn stats(&self) -> OracleStats {
        self.stats
    }

    /// True oracle evaluations performed (requests minus cache hits).
    pub fn oracle_calls(&self) -> u64 {
        self.stats.eval_calls - self.stats.cache_hits
    }
}

/// A witness that an oracle is not monotone submodular.
#[derive(Clone, Debug, PartialEq)]
pub enum OracleViolation {
    /// `f(R) + f(T) < f(R∪T) + f(R∩T)` beyond tolerance.
    Submodularity { r: ElementSet, t: ElementSet, lhs: f64, rhs: f64 },
    /// Marginal gain of `element` grew when the base set grew.
    DiminishingReturns {
        small: ElementSet,
        large: ElementSet,
        element: ElementId,
        small_gain: f64,
        large_gain: f64,
    },
    /// `f` decreased on a superset.
    Monotonicity { subset: ElementSet, superset: ElementSet, f_subset: f64, f_superset: f64 },
}

impl fmt::Display for OracleViolation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            OracleViolation::Submodularity { r, t, lhs, rhs } => write!(
                f,
                "submodularity violated: f({r:?}) + f({t:?}) = {lhs} < {rhs} = f(union) + f(intersection)"
            ),
            OracleViolation::DiminishingReturns { small, large, element, small_gain, large_gain } => {
                write!(
                    f,
                    "diminishing returns violated for element {element}: gain {small_gain} at {small:?} < gain {large_gain} at {large:?}"
                )
            }
            OracleViolation::Monotonicity { subset, superset, f_subset, f_superset } => write!(
                f,
                "monotonicity violated: f({subset:?}) = {f_subset} > {f_superset} = f({superset:?})"
            ),
        }
    }
}

fn random_subset<R: Rng>(rng: &mut R, n: usize) -> ElementSet {
    (0..n).filter(|_| rng.gen_bool(0.5)).collect()
}

/// Samples random set pairs and checks submodularity, diminishing returns,
/// and monotonicity up to [`CHECK_TOLERANCE`]. Returns the first violating
/// tuple found, or `None`.
pub fn check_submodular_monotone(
    oracle: &dyn ValueOracle,
    n: usize,
    trials: u64,
    seed: u64,
) -> Result<Option<OracleViolation>> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut eval = Evaluator::new(oracle);
    for _ in 0..trials {
        let r = random_subset(&mut rng, n);
        let t = random_subset(&mut rng, n);
        let union: ElementSet = r.union(&t).copied().collect();
        let inter: ElementSet = r.intersection(&t).copied().collect();
        let f_r = eval.eval(&r)?;
        let f_t = eval.eval(&t)?;
        let f_union = eval.eval(&union)?;
        let f_inter = eval.eval(&inter)?;
        if f_r + f_t < f_union + f_inter - CHECK_TOLERANCE {
            return Ok(Some(OracleViolation::Submodularity {
                r,
                t,
                lhs: f_r + f_t,
                rhs: f_union + f_inter,
            }));
        }
        if f_r > f_union + CHECK_TOLERANCE {
            return Ok(Some(OracleViolation::Monotonicity {
                subset: r,
                superset: union,
                f_subset: f_r,
                f_superset: f_union,
            }));
        }

        // Diminishing returns: compare the gain of one element on nested sets.
        let large = random_subset(&mut rng, n);
        let outside: Vec<ElementId> = (0..n).filter(|u| !large.contains(u)).collect();
        if outside.is_empty() {
            continue;
        }
        let u = outside[rng.gen_range(0..outside.len())];
        let small: ElementSet = large.iter().copied().filter(|_| rng.gen_bool(0.5)).collect();
        let f_large = eval.eval(&large)?;
        let f_small = eval.eval(&small)?;
        let mut large_u = large.clone();
        large_u.insert(u);
        let mut small_u = small.clone();
        small_u.insert(u);
        let large_gain = eval.eval(&large_u)? - f_large;
        let small_gain = eval.eval(&small_u)? - f_small;
        if small_gain < large_gain - CHECK_TOLERANCE {
            return Ok(Some(OracleViolation::DiminishingReturns {
                small,
                large,
                element: u,
                small_gain,
                large_gain,
            }));
        }
    }
    Ok(None)
}

/// Exhaustive variant of [`check_submodular_monotone`] over all subset pairs.
///
/// Covers submodularity and monotonicity directly; diminishing returns is
/// implied by submodularity over all pairs. Capped at `n ≤ 12`.
pub fn check_submodular_monotone_exhaustive(
    oracle: &dyn ValueOracle,
    n: usize,
) -> Result<Option<OracleViolation>> {
    if n > 12 {
        return Err(Error::Resource(format!(
            "exhaustive oracle check over {n} elements needs 4^{n} pairs; cap is n <= 12"
        )));
    }
    let size = 1usize << n;
    let set_of = |mask: usize| -> ElementSet { (0..n).filter(|&u| mask >> u & 1 == 1).collect() };
    let mut values = Vec::with_capacity(size);
    for mask in 0..size {
        values.push(oracle.eval(&set_of(mask))?);
    }
    for r in 0..size {
        for t in 0..size {
            if values[r] + values[t] < values[r | t] + values[r & t] - CHECK_TOLERANCE {
                return Ok(Some(OracleViolation::Submodularity {
                    r: set_of(r),
                    t: set_of(t),
                    lhs: values[r] + values[t],
                    rhs: values[r | t] + values[r & t],
                }));
            }
        }
        for u in 0..n {
            if r >> u & 1 == 0 {
                let sup = r | 1 << u;
                if values[r] > values[sup] + CHECK_TOLERANCE {
                    return Ok(Some(OracleViolation::Monotonicity {
                        subset: set_of(r),
                        superset: set_of(sup),
                        f_subset: values[r],
                        f_superset: values[sup],
                    }));
                }
            }
        }
    }
    Ok(None)
}
