//! Instance file I/O, seeded random instance generation, experiment
//! orchestration with CSV reports, and ratio-table utilities.

use std::collections::BTreeSet;
use std::fmt::Write as _;
use std::path::PathBuf;
use std::str::FromStr;
use std::time::Instant;

use rand::Rng;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::matroids::{GraphicMatroid, MatroidSpec, PartitionMatroid, UniformMatroid};
use crate::model::Instance;
use crate::oracles::{CoverageOracle, FacilityLocationOracle, ModularOracle, OracleSpec};
use crate::solver::{
    brute_force, default_epsilon, greedy_baseline, guaranteed_ratio, solve, RunReport, SolverConfig,
};

/// Environment variable capping worker parallelism; unset or `0` means all
/// available cores.
pub const THREADS_ENV: &str = "MATKNAP_THREADS";

/// Slack applied to ratio-guarantee comparisons.
pub const RATIO_SLACK: f64 = 1e-9;

#[derive(Deserialize)]
#[serde(deny_unknown_fields)]
struct InstanceDoc {
    n: usize,
    costs: Vec<f64>,
    budget: f64,
    matroids: Vec<MatroidSpec>,
    oracle: OracleSpec,
}

#[derive(Serialize)]
struct InstanceOut<'a> {
    n: usize,
    costs: &'a [f64],
    budget: f64,
    matroids: &'a [MatroidSpec],
    oracle: &'a OracleSpec,
}

/// Parses a JSON instance document, enforcing every structural invariant.
/// Unknown keys are rejected at every level.
pub fn parse_instance(text: &str) -> Result<Instance> {
    let doc: InstanceDoc = serde_json::from_str(text).map_err(|e| Error::Parse(e.to_string()))?;
    Instance::new(doc.n, doc.costs, doc.budget, doc.matroids, doc.oracle)
}

/// Canonical serialization: fixed key order, normalized numbers and set
/// orderings. `parse_instance(serialize_instance(x)) == x`.
pub fn serialize_instance(instance: &Instance) -> String {
    let out = InstanceOut {
        n: instance.n(),
        costs: instance.costs(),
        budget: instance.budget(),
        matroids: instance.matroids(),
        oracle: instance.oracle(),
    };
    let mut text = serde_json::to_string_pretty(&out).expect("instances always serialize");
    text.push('\n');
    text
}

pub fn load_instance(path: &std::path::Path) -> Result<Instance> {
    parse_instance(&std::fs::read_to_string(path)?)
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
pub enum OracleFamily {
    Coverage,
    Modular,
    FacilityLocation,
}

impl FromStr for OracleFamily {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "coverage" => Ok(Self::Coverage),
            "modular" => Ok(Self::Modular),
            "facility_location" => Ok(Self::FacilityLocation),
            other => Err(Error::InvalidArgument(format!(
                "unknown oracle family `{other}` (expected coverage, modular, or facility_location)"
            ))),
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
pub enum MatroidFamily {
    Uniform,
    Partition,
    Graphic,
}

impl FromStr for MatroidFamily {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "uniform" => Ok(Self::Uniform),
            "partition" => Ok(Self::Partition),
            "graphic" => Ok(Self::Graphic),
            other => Err(Error::InvalidArgument(format!(
                "unknown matroid family `{other}` (expected uniform, partition, or graphic)"
            ))),
        }
    }
}

/// Recipe for a deterministic random instance.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct GeneratorSpec {
    pub n: usize,
    /// Number of matroid constraints.
    pub k: usize,
    pub oracle: OracleFamily,
    /// Cycled when shorter than `k`.
    pub matroids: Vec<MatroidFamily>,
    /// Costs are drawn as integers within this inclusive range, keeping all
    /// desk-scale arithmetic exact.
    pub cost_range: (f64, f64),
    /// Budget = fraction × total cost.
    pub budget_fraction: f64,
    pub seed: u64,
}

impl GeneratorSpec {
    pub fn new(n: usize, k: usize, oracle: OracleFamily, matroids: Vec<MatroidFamily>, seed: u64) -> Self {
        Self { n, k, oracle, matroids, cost_range: (1.0, 9.0), budget_fraction: 0.5, seed }
    }

    /// Stable identifier used in reports.
    pub fn id(&self) -> String {
        format!("gen-n{}-k{}-s{}", self.n, self.k, self.seed)
    }
}

/// Builds an instance deterministically from the spec: identical specs and
/// seeds produce identical instances, and generated matroids satisfy the
/// matroid axioms by construction.
pub fn generate_instance(spec: &GeneratorSpec) -> Result<Instance> {
    if spec.k < 1 {
        return Err(Error::InvalidArgument(format!("k must be >= 1, got {}", spec.k)));
    }
    if spec.matroids.is_empty() {
        return Err(Error::InvalidArgument("at least one matroid family is required".into()));
    }
    let (lo_f, hi_f) = spec.cost_range;
    if !(lo_f.is_finite() && hi_f.is_finite()) || lo_f < 0.0 || hi_f < lo_f {
        return Err(Error::InvalidArgument(format!("bad cost range {:?}", spec.cost_range)));
    }
    if !spec.budget_fraction.is_finite() || spec.budget_fraction < 0.0 {
        return Err(Error::InvalidArgument(format!(
            "bad budget fraction {}",
            spec.budget_fraction
        )));
    }
    let (lo, hi) = (lo_f.round() as u64, hi_f.round() as u64);
    let n = spec.n;
    let mut rng = ChaCha8Rng::seed_from_u64(spec.seed);

    let costs: Vec<f64> = (0..n).map(|_| rng.gen_range(lo..=hi) as f64).collect();
    let budget = spec.budget_fraction * costs.iter().sum::<f64>();

    let mut matroids = Vec::with_capacity(spec.k);
    for j in 0..spec.k {
        let family = spec.matroids[j % spec.matroids.len()];
        matroids.push(generate_matroid(family, n, &mut rng)?);
    }
    let oracle = generate_oracle(spec.oracle, n, &mut rng)?;
    Instance::new(n, costs, budget, matroids, oracle)
}

fn generate_matroid(family: MatroidFamily, n: usize, rng: &mut ChaCha8Rng) -> Result<MatroidSpec> {
    Ok(match family {
        MatroidFamily::Uniform => {
            let rank = if n == 0 { 0 } else { rng.gen_range(1..=(3 * n).div_ceil(4)) };
            MatroidSpec::Uniform(UniformMatroid::new(rank))
        }
        MatroidFamily::Partition => {
            let blocks = rng.gen_range(1..=(n / 2).max(1));
            let block_of = (0..n).map(|_| rng.gen_range(0..blocks)).collect();
            let capacity = (0..blocks).map(|_| rng.gen_range(1..=2)).collect();
            MatroidSpec::Partition(PartitionMatroid::new(block_of, capacity)?)
        }
        MatroidFamily::Graphic => {
            let vertex_count = rng.gen_range(2..=n + 2);
            let edges = (0..n)
                .map(|_| {
                    let a = rng.gen_range(0..vertex_count);
                    let mut b = rng.gen_range(0..vertex_count);
                    while b == a {
                        b = rng.gen_range(0..vertex_count);
                    }
                    (a, b)
                })
                .collect();
            MatroidSpec::Graphic(GraphicMatroid::new(vertex_count, edges)?)
        }
    })
}

fn generate_oracle(family: OracleFamily, n: usize, rng: &mut ChaCha8Rng) -> Result<OracleSpec> {
    Ok(match family {
        OracleFamily::Coverage => {
            let m = rng.gen_range((n / 2).max(1)..=(2 * n).max(1));
            let sets: Vec<BTreeSet<usize>> = (0..n)
                .map(|_| {
                    let size = rng.gen_range(0..=m.min(4));
                    let mut s = BTreeSet::new();
                    while s.len() < size {
                        s.insert(rng.gen_range(0..m));
                    }
                    s
                })
                .collect();
            let weights = if rng.gen_bool(0.5) {
                None
            } else {
                Some((0..m).map(|_| rng.gen_range(1..=5) as f64).collect())
            };
            OracleSpec::Coverage(CoverageOracle::new(m, sets, weights)?)
        }
        OracleFamily::Modular => {
            let profits = (0..n).map(|_| rng.gen_range(0..=9) as f64).collect();
            OracleSpec::Modular(ModularOracle::new(profits)?)
        }
        OracleFamily::FacilityLocation => {
            let m = rng.gen_range(1..=(n + 1).max(1));
            let affinity = (0..n)
                .map(|_| {
                    (0..m)
                        .map(|_| if rng.gen_bool(0.3) { 0.0 } else { rng.gen_range(1..=9) as f64 })
                        .collect()
                })
                .collect();
            OracleSpec::FacilityLocation(FacilityLocationOracle::new(affinity)?)
        }
    })
}

/// Best previously published ratio for one knapsack plus `k` matroids:
/// `max_{0 ≤ b ≤ 1} (1 − e^{−b} − ε)·((1 − e^{−b})/b)^k`, computed by a
/// 10⁴-point grid search with local refinement.
pub fn prior_best_ratio(k: usize, eps: f64) -> Result<f64> {
    if k < 1 {
        return Err(Error::InvalidArgument(format!("k must be >= 1, got {k}")));
    }
    if !eps.is_finite() || !(0.0..1.0).contains(&eps) {
        return Err(Error::InvalidArgument(format!("eps must lie in [0, 1), got {eps}")));
    }
    let h = |b: f64| -> f64 {
        // (1 − e^{−b})/b → 1 as b → 0.
        let bracket = if b == 0.0 { 1.0 } else { (1.0 - (-b).exp()) / b };
        (1.0 - (-b).exp() - eps) * bracket.powi(k as i32)
    };
    const GRID: usize = 10_000;
    let step = 1.0 / GRID as f64;
    let mut best_b = 1.0;
    let mut best = h(1.0);
    for i in 1..=GRID {
        let b = i as f64 * step;
        let v = h(b);
        if v > best {
            best = v;
            best_b = b;
        }
    }
    let mut lo = (best_b - step).max(0.0);
    let mut hi = (best_b + step).min(1.0);
    for _ in 0..200 {
        let m1 = lo + (hi - lo) / 3.0;
        let m2 = hi - (hi - lo) / 3.0;
        if h(m1) < h(m2) {
            lo = m1;
        } else {
            hi = m2;
        }
    }
    Ok(best.max(h((lo + hi) / 2.0)))
}

/// Builds the worker pool: explicit count, else the `MATKNAP_THREADS`
/// environment variable, else one thread per core.
pub fn worker_pool(threads: Option<usize>) -> Result<rayon::ThreadPool> {
    let count = match threads {
        Some(t) => t,
        None => match std::env::var(THREADS_ENV) {
            Ok(raw) => raw.trim().parse::<usize>().map_err(|_| {
                Error::InvalidArgument(format!("{THREADS_ENV} must be a nonnegative integer, got `{raw}`"))
            })?,
            Err(_) => 0,
        },
    };
    rayon::ThreadPoolBuilder::new()
        .num_threads(count)
        .build()
        .map_err(|e| Error::InvalidArgument(e.to_string()))
}

/// Threshold mode for the swap solver within an experiment.
#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub enum EpsilonMode {
    /// ε = 0 (no thresholding).
    Zero,
    /// ε = `default_epsilon(k)`.
    Default,
    Fixed(f64),
}

impl EpsilonMode {
    pub fn resolve(&self, k: usize) -> Result<f64> {
        match self {
            EpsilonMode::Zero => Ok(0.0),
            EpsilonMode::Default => default_epsilon(k),
            EpsilonMode::Fixed(eps) => Ok(*eps),
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub enum AlgorithmSpec {
    /// The greedy-swap solver with the given threshold mode.
    GreedySwap(EpsilonMode),
    /// Density-greedy baseline (no removals, no guarantee).
    Baseline,
}

impl AlgorithmSpec {
    pub fn label(&self) -> &'static str {
        match self {
            AlgorithmSpec::GreedySwap(_) => "greedy_swap",
            AlgorithmSpec::Baseline => "baseline",
        }
    }
}

#[derive(Clone, Debug)]
pub enum InstanceSource {
    File(PathBuf),
    Named(String, Instance),
}

impl InstanceSource {
    pub fn generated(spec: &GeneratorSpec) -> Result<Self> {
        Ok(Self::Named(spec.id(), generate_instance(spec)?))
    }

    fn load(&self) -> Result<(String, Instance)> {
        match self {
            InstanceSource::File(path) => {
                let name = path
                    .file_stem()
                    .map(|s| s.to_string_lossy().into_owned())
                    .unwrap_or_else(|| path.display().to_string());
                Ok((name, load_instance(path)?))
            }
            InstanceSource::Named(name, instance) => Ok((name.clone(), instance.clone())),
        }
    }
}

#[derive(Clone, Debug)]
pub struct ExperimentConfig {
    pub sources: Vec<InstanceSource>,
    pub algorithms: Vec<AlgorithmSpec>,
    /// Compute exact optima and ratios via brute force.
    pub brute_force: bool,
    /// CSV output path (timing column included).
    pub output: Option<PathBuf>,
    /// JSON sidecar with full per-guess detail.
    pub detail_output: Option<PathBuf>,
    /// Worker threads; `None` defers to `MATKNAP_THREADS`.
    pub threads: Option<usize>,
}

impl ExperimentConfig {
    pub fn new(sources: Vec<InstanceSource>, algorithms: Vec<AlgorithmSpec>) -> Self {
        Self {
            sources,
            algorithms,
            brute_force: false,
            output: None,
            detail_output: None,
            threads: None,
        }
    }
}

/// One (instance, algorithm) result row.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct ExperimentRow {
    pub instance: String,
    pub n: usize,
    pub k: usize,
    pub algorithm: String,
    pub epsilon: Option<f64>,
    pub value: f64,
    pub cost: f64,
    pub feasible: bool,
    pub opt: Option<f64>,
    pub ratio: Option<f64>,
    pub guaranteed_ratio: f64,
    /// `ok` when the guarantee holds, `FAILURE` when violated, empty when
    /// not applicable (baseline rows or missing optimum).
    pub flag: String,
    pub accepted_swaps: u64,
    pub phi_swaps: u64,
    pub rejected_swaps: u64,
    pub oracle_calls: u64,
    pub note: String,
    pub wall_time_s: f64,
}

#[derive(Clone, Debug, Serialize)]
pub struct RunDetail {
    pub instance: String,
    pub algorithm: String,
    pub epsilon: Option<f64>,
    pub report: Option<RunReport>,
}

#[derive(Clone, Debug)]
pub struct ExperimentReport {
    pub rows: Vec<ExperimentRow>,
    pub details: Vec<RunDetail>,
}

const CSV_COLUMNS: &[&str] = &[
    "instance",
    "n",
    "k",
    "algorithm",
    "epsilon",
    "value",
    "cost",
    "feasible",
    "opt",
    "ratio",
    "guaranteed_ratio",
    "flag",
    "accepted_swaps",
    "phi_swaps",
    "rejected_swaps",
    "oracle_calls",
    "note",
];

fn opt_f64(v: Option<f64>) -> String {
    v.map(|x| x.to_string()).unwrap_or_default()
}

impl ExperimentReport {
    /// Guarantee violations among the greedy-swap rows.
    pub fn failures(&self) -> usize {
        self.rows.iter().filter(|r| r.flag == "FAILURE").count()
    }

    /// Renders the report as CSV. Wall times are environment-dependent, so
    /// `include_timing = false` yields the canonical body used by
    /// determinism comparisons.
    pub fn to_csv(&self, include_timing: bool) -> String {
        let mut out = String::new();
        out.push_str(&CSV_COLUMNS.join(","));
        if include_timing {
            out.push_str(",wall_time_s");
        }
        out.push('\n');
        for row in &self.rows {
            let _ = write!(
                out,
                "{},{},{},{},{},{},{},{},{},{},{},{},{},{},{},{},{}",
                row.instance,
                row.n,
                row.k,
                row.algorithm,
                opt_f64(row.epsilon),
                row.value,
                row.cost,
                row.feasible,
                opt_f64(row.opt),
                opt_f64(row.ratio),
                row.guaranteed_ratio,
                row.flag,
                row.accepted_swaps,
                row.phi_swaps,
                row.rejected_swaps,
                row.oracle_calls,
                row.note,
            );
            if include_timing {
                let _ = write!(out, ",{}", row.wall_time_s);
            }
            out.push('\n');
        }
        out
    }
}

fn run_row(
    name: &str,
    instance: &Instance,
    algorithm: AlgorithmSpec,
    opt: &Option<std::result::Result<f64, String>>,
) -> Result<(ExperimentRow, RunDetail)> {
    let k = instance.matroid_count();
    let started = Instant::now();
    let (solution, report, epsilon) = match algorithm {
        AlgorithmSpec::GreedySwap(mode) => {
            let epsilon = mode.resolve(k)?;
            let config = SolverConfig::with_epsilon(epsilon);
            let (solution, report) = solve(instance, &config)?;
            (solution, Some(report), Some(epsilon))
        }
        AlgorithmSpec::Baseline => (greedy_baseline(instance)?, None, None),
    };
    let wall_time_s = started.elapsed().as_secs_f64();

    let guaranteed = guaranteed_ratio(k)?;
    let (opt_value, note) = match opt {
        None => (None, String::new()),
        Some(Ok(v)) => (Some(*v), String::new()),
        Some(Err(msg)) => (None, msg.clone()),
    };
    let ratio = match opt_value {
        Some(o) if o > 0.0 => Some(solution.value / o),
        _ => None,
    };
    let flag = match (&algorithm, opt_value) {
        (AlgorithmSpec::GreedySwap(_), Some(o)) => {
            if solution.value >= guaranteed * o - RATIO_SLACK {
                "ok".to_string()
            } else {
                "FAILURE".to_string()
            }
        }
        _ => String::new(),
    };
    let (accepted, phi, rejected, calls) = report
        .as_ref()
        .map(|r| (r.accepted_swaps, r.phi_swaps, r.rejected_swaps, r.oracle_calls))
        .unwrap_or_default();
    let row = ExperimentRow {
        instance: name.to_string(),
        n: instance.n(),
        k,
        algorithm: algorithm.label().to_string(),
        epsilon,
        value: solution.value,
        cost: solution.cost,
        feasible: solution.feasible,
        opt: opt_value,
        ratio,
        guaranteed_ratio: guaranteed,
        flag,
        accepted_swaps: accepted,
        phi_swaps: phi,
        rejected_swaps: rejected,
        oracle_calls: calls,
        note,
        wall_time_s,
    };
    let detail = RunDetail {
        instance: name.to_string(),
        algorithm: algorithm.label().to_string(),
        epsilon,
        report,
    };
    Ok((row, detail))
}

/// Runs every (instance, algorithm) pair, rows in deterministic
/// instance-then-algorithm order, and writes the CSV report (and optional
/// per-guess JSON sidecar). Brute-force refusals are recorded per row and
/// the run continues.
pub fn run_experiment(config: &ExperimentConfig) -> Result<ExperimentReport> {
    let mut instances = Vec::with_capacity(config.sources.len());
    for source in &config.sources {
        instances.push(source.load()?);
    }
    let pool = worker_pool(config.threads)?;

    let report = pool.install(|| -> Result<ExperimentReport> {
        let opts: Vec<Option<std::result::Result<f64, String>>> = instances
            .par_iter()
            .map(|(_, instance)| {
                if !config.brute_force {
                    return None;
                }
                Some(match brute_force(instance, None) {
                    Ok(solution) => Ok(solution.value),
                    Err(e) => Err(e.to_string()),
                })
            })
            .collect();

        let jobs: Vec<(usize, AlgorithmSpec)> = instances
            .iter()
            .enumerate()
            .flat_map(|(i, _)| config.algorithms.iter().map(move |&a| (i, a)))
            .collect();
        let results: Vec<(ExperimentRow, RunDetail)> = jobs
            .par_iter()
            .map(|&(i, algorithm)| {
                let (name, instance) = &instances[i];
                run_row(name, instance, algorithm, &opts[i])
            })
            .collect::<Result<Vec<_>>>()?;

        let (rows, details) = results.into_iter().unzip();
        Ok(ExperimentReport { rows, details })
    })?;

    if let Some(path) = &config.output {
        std::fs::write(path, report.to_csv(true))?;
    }
    if let Some(path) = &config.detail_output {
        let body =
            serde_json::to_string_pretty(&report.details).expect("details always serialize");
        std::fs::write(path, body)?;
    }
    Ok(report)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::model::ElementSet;
    use crate::oracles::check_submodular_monotone;
    use proptest::prelude::*;

    const MINIMAL_DOC: &str = r#"{"n":0, "costs":[], "budget":0, "matroids":[{"type":"uniform","rank":0}], "oracle":{"type":"modular","profits":[]}}"#;

    fn coverage_doc() -> String {
        r#"{
            "n": 3,
            "costs": [2, 2, 1],
            "budget": 3,
            "matroids": [{"type": "uniform", "rank": 2}],
            "oracle": {"type": "coverage", "universe_size": 4,
                       "sets": [[0, 1], [1, 2], [3]]}
        }"#
        .to_string()
    }

    #[test]
    fn minimal_document_parses_to_empty_instance() {
        let inst = parse_instance(MINIMAL_DOC).unwrap();
        assert_eq!(inst.n(), 0);
        assert_eq!(inst.budget(), 0.0);
    }

    #[test]
    fn serialization_round_trips() {
        let inst = parse_instance(&coverage_doc()).unwrap();
        let text = serialize_instance(&inst);
        let again = parse_instance(&text).unwrap();
        assert_eq!(inst, again);
        assert_eq!(text, serialize_instance(&again));
    }

    #[test]
    fn integer_costs_convert_exactly() {
        let inst = parse_instance(&coverage_doc()).unwrap();
        assert_eq!(inst.costs(), &[2.0, 2.0, 1.0]);
    }

    #[test]
    fn length_mismatch_names_the_field() {
        let doc = r#"{"n":2, "costs":[1], "budget":1, "matroids":[{"type":"uniform","rank":1}], "oracle":{"type":"modular","profits":[1,2]}}"#;
        assert!(matches!(
            parse_instance(doc),
            Err(Error::Validation { field: "costs", .. })
        ));
    }

    #[test]
    fn unknown_keys_are_rejected() {
        let top = r#"{"n":0, "costs":[], "budget":0, "matroids":[{"type":"uniform","rank":0}], "oracle":{"type":"modular","profits":[]}, "extra":1}"#;
        assert!(matches!(parse_instance(top), Err(Error::Parse(_))));
        let nested = r#"{"n":0, "costs":[], "budget":0, "matroids":[{"type":"uniform","rank":0,"extra":1}], "oracle":{"type":"modular","profits":[]}}"#;
        assert!(matches!(parse_instance(nested), Err(Error::Parse(_))));
    }

    #[test]
    fn syntax_errors_carry_a_location() {
        let err = parse_instance("{\"n\": }").unwrap_err();
        let msg = err.to_string();
        assert!(msg.contains("line"), "missing location in: {msg}");
    }

    #[test]
    fn non_matroid_explicit_family_is_rejected() {
        let doc = r#"{"n":2, "costs":[1,1], "budget":2,
            "matroids":[{"type":"explicit","n":2,"independent_sets":[[],[0,1]]}],
            "oracle":{"type":"modular","profits":[1,1]}}"#;
        assert!(parse_instance(doc).is_err());
    }

    #[test]
    fn generation_is_deterministic_in_the_seed() {
        let spec = GeneratorSpec::new(
            8,
            2,
            OracleFamily::Coverage,
            vec![MatroidFamily::Uniform, MatroidFamily::Partition],
            7,
        );
        assert_eq!(generate_instance(&spec).unwrap(), generate_instance(&spec).unwrap());
        let other = GeneratorSpec { seed: 8, ..spec.clone() };
        assert_ne!(generate_instance(&spec).unwrap(), generate_instance(&other).unwrap());
    }

    #[test]
    fn generated_oracles_pass_contract_checks() {
        for (i, family) in
            [OracleFamily::Coverage, OracleFamily::Modular, OracleFamily::FacilityLocation]
                .iter()
                .enumerate()
        {
            let spec = GeneratorSpec::new(10, 1, *family, vec![MatroidFamily::Uniform], 7 + i as u64);
            let inst = generate_instance(&spec).unwrap();
            let violation =
                check_submodular_monotone(inst.oracle(), inst.n(), 500, 13).unwrap();
            assert_eq!(violation, None);
        }
    }

    #[test]
    fn zero_budget_fraction_forces_empty_solutions() {
        let spec = GeneratorSpec {
            budget_fraction: 0.0,
            ..GeneratorSpec::new(6, 1, OracleFamily::Modular, vec![MatroidFamily::Uniform], 3)
        };
        let inst = generate_instance(&spec).unwrap();
        assert_eq!(inst.budget(), 0.0);
        let (solution, _) = solve(&inst, &SolverConfig::exact()).unwrap();
        assert!(solution.elements.is_empty());
    }

    #[test]
    fn prior_best_ratio_reproduces_reference_bounds() {
        let eps = 1e-9; // reported as "eps -> 0"
        let h2 = prior_best_ratio(2, eps).unwrap();
        let h3 = prior_best_ratio(3, eps).unwrap();
        let h5 = prior_best_ratio(5, eps).unwrap();
        assert!(h2 < 0.262, "h(2) = {h2}");
        assert!(h5 < 0.127, "h(5) = {h5}");
        // The k = 3 maximum genuinely sits just above the 0.192 that the
        // reference table quotes; pin the computed value instead.
        assert!((h3 - 0.19252163).abs() < 1e-6, "h(3) = {h3}");
        // Larger eps only lowers the curve.
        assert!(prior_best_ratio(2, 0.1).unwrap() < h2);
        assert!(prior_best_ratio(0, eps).is_err());
        assert!(prior_best_ratio(2, 1.5).is_err());
    }

    #[test]
    fn worker_pool_sizes_are_respected() {
        let pool = worker_pool(Some(2)).unwrap();
        assert_eq!(pool.current_num_threads(), 2);
    }

    #[test]
    fn experiment_produces_one_row_per_pair() {
        let inst = parse_instance(&coverage_doc()).unwrap();
        let mut config = ExperimentConfig::new(
            vec![InstanceSource::Named("cov".into(), inst)],
            vec![AlgorithmSpec::GreedySwap(EpsilonMode::Zero), AlgorithmSpec::Baseline],
        );
        config.brute_force = true;
        config.threads = Some(1);
        let report = run_experiment(&config).unwrap();
        assert_eq!(report.rows.len(), 2);
        assert_eq!(report.failures(), 0);
        for row in &report.rows {
            assert_eq!(row.opt, Some(3.0));
            assert_eq!(row.ratio, Some(1.0));
        }
        assert_eq!(report.rows[0].flag, "ok");
        assert_eq!(report.rows[1].flag, "");

        let csv = report.to_csv(false);
        assert_eq!(csv.lines().count(), 3);
        assert!(csv.starts_with("instance,n,k,algorithm,epsilon,value,cost,feasible,opt,"));

        let again = run_experiment(&config).unwrap();
        assert_eq!(csv, again.to_csv(false));
    }

    #[test]
    fn two_matroid_batch_has_no_guarantee_failures() {
        let sources: Vec<InstanceSource> = (0..20u64)
            .map(|i| {
                let spec = GeneratorSpec {
                    budget_fraction: [0.3, 0.5, 0.8][(i % 3) as usize],
                    ..GeneratorSpec::new(
                        4 + (i % 5) as usize,
                        2,
                        [OracleFamily::Coverage, OracleFamily::Modular, OracleFamily::FacilityLocation]
                            [(i % 3) as usize],
                        vec![MatroidFamily::Uniform, MatroidFamily::Partition, MatroidFamily::Graphic],
                        400 + i,
                    )
                };
                InstanceSource::generated(&spec).unwrap()
            })
            .collect();
        let mut config = ExperimentConfig::new(
            sources,
            vec![
                AlgorithmSpec::GreedySwap(EpsilonMode::Zero),
                AlgorithmSpec::GreedySwap(EpsilonMode::Default),
            ],
        );
        config.brute_force = true;
        config.threads = Some(2);
        let report = run_experiment(&config).unwrap();
        assert_eq!(report.failures(), 0);
        for row in &report.rows {
            assert_eq!(row.k, 2);
            if let Some(ratio) = row.ratio {
                assert!(ratio >= 0.31674 - RATIO_SLACK, "{}: ratio {ratio}", row.instance);
            }
        }
    }

    #[test]
    fn oversized_brute_force_is_recorded_per_row() {
        let n = crate::solver::BRUTE_FORCE_MAX_N + 1;
        let spec = GeneratorSpec::new(n, 1, OracleFamily::Modular, vec![MatroidFamily::Uniform], 5);
        let mut config = ExperimentConfig::new(
            vec![InstanceSource::generated(&spec).unwrap()],
            vec![AlgorithmSpec::GreedySwap(EpsilonMode::Default)],
        );
        config.brute_force = true;
        config.threads = Some(1);
        let report = run_experiment(&config).unwrap();
        assert_eq!(report.rows.len(), 1);
        assert_eq!(report.rows[0].opt, None);
        assert!(report.rows[0].note.contains("resource limit"));
        assert_eq!(report.failures(), 0);
    }

    proptest! {
        #![proptest_config(ProptestConfig::with_cases(24))]

        #[test]
        fn generated_instances_round_trip(
            n in 0usize..9,
            seed in 0u64..1000,
            oracle_idx in 0usize..3,
            matroid_idx in 0usize..3,
            k in 1usize..3,
        ) {
            let oracle = [OracleFamily::Coverage, OracleFamily::Modular, OracleFamily::FacilityLocation][oracle_idx];
            let matroid = [MatroidFamily::Uniform, MatroidFamily::Partition, MatroidFamily::Graphic][matroid_idx];
            let spec = GeneratorSpec::new(n, k, oracle, vec![matroid], seed);
            let inst = generate_instance(&spec).unwrap();
            let text = serialize_instance(&inst);
            let again = parse_instance(&text).unwrap();
            prop_assert_eq!(&inst, &again);
            prop_assert_eq!(text, serialize_instance(&again));
        }

        #[test]
        fn feasibility_is_downward_monotone_on_generated_instances(
            seed in 0u64..500,
            matroid_idx in 0usize..3,
        ) {
            let matroid = [MatroidFamily::Uniform, MatroidFamily::Partition, MatroidFamily::Graphic][matroid_idx];
            let spec = GeneratorSpec::new(6, 1, OracleFamily::Modular, vec![matroid], seed);
            let inst = generate_instance(&spec).unwrap();
            for mask in 0..(1usize << 6) {
                let s: ElementSet = (0..6).filter(|&e| mask >> e & 1 == 1).collect();
                let sol = inst.solution_from_set(&s).unwrap();
                prop_assert_eq!(sol.feasible, inst.is_feasible(&s).unwrap());
                if sol.feasible {
                    for &e in &s {
                        let mut sub = s.clone();
                        sub.remove(&e);
                        prop_assert!(inst.is_feasible(&sub).unwrap());
                    }
                }
            }
        }
    }
}
