//! Matroid families (uniform, partition, graphic, explicit), intersection
//! handling, axiom checking, and the constructive exchange mappings used as
//! test oracles for the swap engine.

use std::collections::{BTreeMap, BTreeSet};
use std::fmt;

use rand::Rng;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::model::{ElementId, ElementSet};

/// Independence oracle of a matroid over the dense ground set.
pub trait Matroid: Send + Sync {
    /// Tests whether `set` is independent.
    fn is_independent(&self, set: &ElementSet) -> Result<bool>;
}

/// `is_independent(S) ⇔ |S| ≤ rank`. Ground-set size is implicit.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct UniformMatroid {
    pub rank: usize,
}

impl UniformMatroid {
    pub fn new(rank: usize) -> Self {
        Self { rank }
    }
}

impl Matroid for UniformMatroid {
    fn is_independent(&self, set: &ElementSet) -> Result<bool> {
        Ok(set.len() <= self.rank)
    }
}

/// Every element belongs to one block; a set is independent when no block's
/// capacity is exceeded.
#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct PartitionMatroid {
    pub block_of: Vec<usize>,
    pub capacity: Vec<usize>,
}

impl PartitionMatroid {
    pub fn new(block_of: Vec<usize>, capacity: Vec<usize>) -> Result<Self> {
        for (e, &b) in block_of.iter().enumerate() {
            if b >= capacity.len() {
                return Err(Error::Validation {
                    field: "block_of",
                    message: format!("element {e} maps to block {b}, but only {} blocks have capacities", capacity.len()),
                });
            }
        }
        Ok(Self { block_of, capacity })
    }
}

impl Matroid for PartitionMatroid {
    fn is_independent(&self, set: &ElementSet) -> Result<bool> {
        let mut counts = vec![0usize; self.capacity.len()];
        for &e in set {
            let &b = self.block_of.get(e).ok_or(Error::InvalidElement {
                id: e,
                n: self.block_of.len(),
            })?;
            counts[b] += 1;
            if counts[b] > self.capacity[b] {
                return Ok(false);
            }
        }
        Ok(true)
    }
}

/// Element `u` is the edge `edges[u]`; a set is independent when the edge
/// set is acyclic.
#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct GraphicMatroid {
    pub vertex_count: usize,
    pub edges: Vec<(usize, usize)>,
}

impl GraphicMatroid {
    pub fn new(vertex_count: usize, edges: Vec<(usize, usize)>) -> Result<Self> {
        for (e, &(a, b)) in edges.iter().enumerate() {
            if a >= vertex_count || b >= vertex_count {
                return Err(Error::Validation {
                    field: "edges",
                    message: format!("edge {e} = ({a},{b}) has an endpoint >= vertex_count {vertex_count}"),
                });
            }
        }
        Ok(Self { vertex_count, edges })
    }
}

impl Matroid for GraphicMatroid {
    fn is_independent(&self, set: &ElementSet) -> Result<bool> {
        let mut parent: Vec<usize> = (0..self.vertex_count).collect();
        fn find(parent: &mut [usize], mut v: usize) -> usize {
            while parent[v] != v {
                parent[v] = parent[parent[v]];
                v = parent[v];
            }
            v
        }
        for &e in set {
            let &(a, b) = self.edges.get(e).ok_or(Error::InvalidElement {
                id: e,
                n: self.edges.len(),
            })?;
            let (ra, rb) = (find(&mut parent, a), find(&mut parent, b));
            if ra == rb {
                return Ok(false); // closes a cycle (self-loops included)
            }
            parent[ra] = rb;
        }
        Ok(true)
    }
}

/// An explicitly enumerated independence family over `n ≤ 16` elements.
///
/// [`ExplicitMatroid::new`] verifies the matroid axioms; `new_unchecked`
/// skips that and exists so the axiom checker itself can be exercised on
/// broken families.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct ExplicitMatroid {
    n: usize,
    masks: BTreeSet<u32>,
}

pub const EXPLICIT_MATROID_MAX_N: usize = 16;

fn set_to_mask(set: &ElementSet, n: usize) -> Result<u32> {
    let mut mask = 0u32;
    for &e in set {
        if e >= n {
            return Err(Error::InvalidElement { id: e, n });
        }
        mask |= 1 << e;
    }
    Ok(mask)
}

fn mask_to_set(mask: u32, n: usize) -> ElementSet {
    (0..n).filter(|&e| mask >> e & 1 == 1).collect()
}

impl ExplicitMatroid {
    pub fn new(n: usize, independent_sets: Vec<ElementSet>) -> Result<Self> {
        let m = Self::new_unchecked(n, independent_sets)?;
        if let Some(v) = check_matroid_axioms(&m, n)? {
            return Err(Error::Validation {
                field: "independent_sets",
                message: format!("family is not a matroid: {v}"),
            });
        }
        Ok(m)
    }

    pub fn new_unchecked(n: usize, independent_sets: Vec<ElementSet>) -> Result<Self> {
        if n > EXPLICIT_MATROID_MAX_N {
            return Err(Error::Validation {
                field: "n",
                message: format!("explicit matroids are capped at n <= {EXPLICIT_MATROID_MAX_N}, got {n}"),
            });
        }
        let mut masks = BTreeSet::new();
        for s in &independent_sets {
            masks.insert(set_to_mask(s, n)?);
        }
        Ok(Self { n, masks })
    }

    pub fn n(&self) -> usize {
        self.n
    }

    /// The family as canonically ordered sets.
    pub fn independent_sets(&self) -> Vec<ElementSet> {
        self.masks.iter().map(|&m| mask_to_set(m, self.n)).collect()
    }
}

impl Matroid for ExplicitMatroid {
    fn is_independent(&self, set: &ElementSet) -> Result<bool> {
        Ok(self.masks.contains(&set_to_mask(set, self.n)?))
    }
}

/// Tagged matroid description as it appears in instance files.
#[derive(Clone, Debug, PartialEq, Serialize)]
#[serde(tag = "type", rename_all = "snake_case")]
pub enum MatroidSpec {
    Uniform(UniformMatroid),
    Partition(PartitionMatroid),
    Graphic(GraphicMatroid),
    Explicit(ExplicitMatroid),
}

impl MatroidSpec {
    pub fn as_matroid(&self) -> &dyn Matroid {
        match self {
            MatroidSpec::Uniform(m) => m,
            MatroidSpec::Partition(m) => m,
            MatroidSpec::Graphic(m) => m,
            MatroidSpec::Explicit(m) => m,
        }
    }

    pub fn kind(&self) -> &'static str {
        match self {
            MatroidSpec::Uniform(_) => "uniform",
            MatroidSpec::Partition(_) => "partition",
            MatroidSpec::Graphic(_) => "graphic",
            MatroidSpec::Explicit(_) => "explicit",
        }
    }

    /// Ground-set size implied by the family's data, if any. Uniform
    /// matroids fit any ground set.
    pub fn ground_size(&self) -> Option<usize> {
        match self {
            MatroidSpec::Uniform(_) => None,
            MatroidSpec::Partition(m) => Some(m.block_of.len()),
            MatroidSpec::Graphic(m) => Some(m.edges.len()),
            MatroidSpec::Explicit(m) => Some(m.n()),
        }
    }
}

impl Matroid for MatroidSpec {
    fn is_independent(&self, set: &ElementSet) -> Result<bool> {
        self.as_matroid().is_independent(set)
    }
}

impl Serialize for ExplicitMatroid {
    fn serialize<S>(&self, serializer: S) -> std::result::Result<S::Ok, S::Error>
    where
        S: serde::Serializer,
    {
        use serde::ser::SerializeStruct;
        let mut st = serializer.serialize_struct("ExplicitMatroid", 2)?;
        st.serialize_field("n", &self.n)?;
        st.serialize_field("independent_sets", &self.independent_sets())?;
        st.end()
    }
}

#[derive(Deserialize)]
#[serde(deny_unknown_fields)]
struct UniformDoc {
    rank: usize,
}

#[derive(Deserialize)]
#[serde(deny_unknown_fields)]
struct PartitionDoc {
    block_of: Vec<usize>,
    capacity: Vec<usize>,
}

#[derive(Deserialize)]
#[serde(deny_unknown_fields)]
struct GraphicDoc {
    vertex_count: usize,
    edges: Vec<(usize, usize)>,
}

#[derive(Deserialize)]
#[serde(deny_unknown_fields)]
struct ExplicitDoc {
    n: usize,
    independent_sets: Vec<ElementSet>,
}

// Hand-written so that unknown keys are rejected inside each variant and
// the validating constructors run on every parsed document. Explicit
// families must pass the axiom check before use, so parsing runs it.
impl<'de> Deserialize<'de> for MatroidSpec {
    fn deserialize<D>(deserializer: D) -> std::result::Result<Self, D::Error>
    where
        D: serde::Deserializer<'de>,
    {
        use serde::de::Error as _;
        let mut value = serde_json::Value::deserialize(deserializer)?;
        let obj = value
            .as_object_mut()
            .ok_or_else(|| D::Error::custom("matroid must be an object with a `type` key"))?;
        let tag = obj
            .remove("type")
            .ok_or_else(|| D::Error::custom("matroid is missing the `type` key"))?;
        let tag = tag
            .as_str()
            .ok_or_else(|| D::Error::custom("matroid `type` must be a string"))?
            .to_owned();
        let rest = serde_json::Value::Object(std::mem::take(obj));
        match tag.as_str() {
            "uniform" => {
                let doc: UniformDoc = serde_json::from_value(rest).map_err(D::Error::custom)?;
                Ok(MatroidSpec::Uniform(UniformMatroid::new(doc.rank)))
            }
            "partition" => {
                let doc: PartitionDoc = serde_json::from_value(rest).map_err(D::Error::custom)?;
                PartitionMatroid::new(doc.block_of, doc.capacity)
                    .map(MatroidSpec::Partition)
                    .map_err(D::Error::custom)
            }
            "graphic" => {
                let doc: GraphicDoc = serde_json::from_value(rest).map_err(D::Error::custom)?;
                GraphicMatroid::new(doc.vertex_count, doc.edges)
                    .map(MatroidSpec::Graphic)
                    .map_err(D::Error::custom)
            }
            "explicit" => {
                let doc: ExplicitDoc = serde_json::from_value(rest).map_err(D::Error::custom)?;
                ExplicitMatroid::new(doc.n, doc.independent_sets)
                    .map(MatroidSpec::Explicit)
                    .map_err(D::Error::custom)
            }
            other => Err(D::Error::custom(format!("unknown matroid type `{other}`"))),
        }
    }
}

/// Tests a set against every matroid in an intersection.
pub fn independent_in_all(matroids: &[MatroidSpec], set: &ElementSet) -> Result<bool> {
    for m in matroids {
        if !m.is_independent(set)? {
            return Ok(false);
        }
    }
    Ok(true)
}

/// A witness that a set family violates one of the matroid axioms.
#[derive(Clone, Debug, PartialEq)]
pub enum AxiomViolation {
    /// The empty set is not independent.
    EmptySetDependent,
    /// `set` is independent but `subset` is not.
    Hereditary { set: ElementSet, subset: ElementSet },
    /// `larger` and `smaller` are independent with `|larger| > |smaller|`,
    /// yet no element of `larger ∖ smaller` extends `smaller`.
    Exchange { larger: ElementSet, smaller: ElementSet },
}

impl fmt::Display for AxiomViolation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            AxiomViolation::EmptySetDependent => write!(f, "empty set is not independent"),
            AxiomViolation::Hereditary { set, subset } => {
                write!(f, "hereditary violation: {set:?} independent but subset {subset:?} is not")
            }
            AxiomViolation::Exchange { larger, smaller } => write!(
                f,
                "exchange violation: no element of {larger:?} extends {smaller:?}"
            ),
        }
    }
}

/// Exhaustively verifies non-emptiness, hereditary, and exchange over the
/// ground set `{0, …, n−1}`. Returns the first violation found, scanning
/// sets in ascending bitmask order. Capped at `n ≤ 16`.
///
/// The exchange axiom is checked on independent pairs with `|R| = |T| + 1`;
/// together with the hereditary check this is equivalent to the axiom for
/// arbitrary cardinality gaps, and any witness returned violates the
/// general statement as well.
pub fn check_matroid_axioms(matroid: &dyn Matroid, n: usize) -> Result<Option<AxiomViolation>> {
    if n > EXPLICIT_MATROID_MAX_N {
        return Err(Error::Resource(format!(
            "exhaustive axiom check is capped at n <= {EXPLICIT_MATROID_MAX_N}, got {n}; use the sampled checker"
        )));
    }
    let size = 1u32 << n;
    let mut independent = Vec::with_capacity(size as usize);
    for mask in 0..size {
        independent.push(matroid.is_independent(&mask_to_set(mask, n))?);
    }
    if !independent[0] {
        return Ok(Some(AxiomViolation::EmptySetDependent));
    }
    // Hereditary: each independent set's co-atoms, in ascending mask order.
    for mask in 0..size {
        if !independent[mask as usize] {
            continue;
        }
        for e in (0..n).rev() {
            if mask >> e & 1 == 1 {
                let sub = mask & !(1 << e);
                if !independent[sub as usize] {
                    return Ok(Some(AxiomViolation::Hereditary {
                        set: mask_to_set(mask, n),
                        subset: mask_to_set(sub, n),
                    }));
                }
            }
        }
    }
    // Exchange on adjacent cardinalities.
    let mut by_size: Vec<Vec<u32>> = vec![Vec::new(); n + 1];
    for mask in 0..size {
        if independent[mask as usize] {
            by_size[mask.count_ones() as usize].push(mask);
        }
    }
    for t_size in 0..n {
        for &t in &by_size[t_size] {
            for &r in &by_size[t_size + 1] {
                let extra = r & !t;
                let mut extended = false;
                for e in 0..n {
                    if extra >> e & 1 == 1 && independent[(t | 1 << e) as usize] {
                        extended = true;
                        break;
                    }
                }
                if !extended {
                    return Ok(Some(AxiomViolation::Exchange {
                        larger: mask_to_set(r, n),
                        smaller: mask_to_set(t, n),
                    }));
                }
            }
        }
    }
    Ok(None)
}

/// Sampled axiom check for ground sets too large to enumerate: draws random
/// independent pairs and random subsets instead of all of them.
pub fn check_matroid_axioms_sampled(
    matroid: &dyn Matroid,
    n: usize,
    trials: u64,
    seed: u64,
) -> Result<Option<AxiomViolation>> {
    if !matroid.is_independent(&ElementSet::new())? {
        return Ok(Some(AxiomViolation::EmptySetDependent));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    for _ in 0..trials {
        // Grow a random independent set, then test one random co-atom.
        let set = random_independent_set(matroid, n, &mut rng)?;
        if !set.is_empty() {
            let idx = rng.gen_range(0..set.len());
            let &e = set.iter().nth(idx).expect("index in range");
            let mut sub = set.clone();
            sub.remove(&e);
            if !matroid.is_independent(&sub)? {
                return Ok(Some(AxiomViolation::Hereditary { set, subset: sub }));
            }
        }
        // Exchange between two random independent sets.
        let r = random_independent_set(matroid, n, &mut rng)?;
        let t = random_independent_set(matroid, n, &mut rng)?;
        let (larger, smaller) = if r.len() > t.len() { (r, t) } else { (t, r) };
        if larger.len() > smaller.len() {
            let mut extended = false;
            for &e in larger.difference(&smaller) {
                let mut cand = smaller.clone();
                cand.insert(e);
                if matroid.is_independent(&cand)? {
                    extended = true;
                    break;
                }
            }
            if !extended {
                return Ok(Some(AxiomViolation::Exchange { larger, smaller }));
            }
        }
    }
    Ok(None)
}

fn random_independent_set<R: Rng>(
    matroid: &dyn Matroid,
    n: usize,
    rng: &mut R,
) -> Result<ElementSet> {
    let mut order: Vec<ElementId> = (0..n).collect();
    for i in (1..order.len()).rev() {
        order.swap(i, rng.gen_range(0..=i));
    }
    let keep = if n == 0 { 0 } else { rng.gen_range(0..=n) };
    let mut set = ElementSet::new();
    for &e in order.iter().take(keep) {
        set.insert(e);
        if !matroid.is_independent(&set)? {
            set.remove(&e);
        }
    }
    Ok(set)
}

/// Extends the independent set `s` to a maximal independent set inside
/// `s ∪ pool`, scanning `pool` in ascending id order and adding every
/// element that keeps independence.
pub fn extend_to_base(
    matroid: &dyn Matroid,
    s: &ElementSet,
    pool: &ElementSet,
) -> Result<ElementSet> {
    if !matroid.is_independent(s)? {
        return Err(Error::Precondition("extend_to_base: starting set is dependent".into()));
    }
    let mut base = s.clone();
    for &e in pool {
        if base.contains(&e) {
            continue;
        }
        base.insert(e);
        if !matroid.is_independent(&base)? {
            base.remove(&e);
        }
    }
    Ok(base)
}

/// Given two bases and `x ∈ base2 ∖ base1`, returns the smallest-id
/// `y ∈ base1 ∖ base2` such that `(base1 ∖ {y}) ∪ {x}` is again a base.
///
/// Such a `y` always exists for a genuine matroid; absence signals a broken
/// independence oracle and is reported as a contract violation.
pub fn find_exchange_element(
    matroid: &dyn Matroid,
    base1: &ElementSet,
    base2: &ElementSet,
    x: ElementId,
) -> Result<ElementId> {
    if base1.len() != base2.len() {
        return Err(Error::Precondition(format!(
            "find_exchange_element: |base1| = {} != {} = |base2|",
            base1.len(),
            base2.len()
        )));
    }
    if !matroid.is_independent(base1)? || !matroid.is_independent(base2)? {
        return Err(Error::Precondition("find_exchange_element: arguments must be independent".into()));
    }
    if !base2.contains(&x) || base1.contains(&x) {
        return Err(Error::Precondition(format!(
            "find_exchange_element: {x} is not in base2 \\ base1"
        )));
    }
    for &y in base1.difference(base2) {
        let mut cand = base1.clone();
        cand.remove(&y);
        cand.insert(x);
        if matroid.is_independent(&cand)? {
            return Ok(y);
        }
    }
    Err(Error::MatroidContract(format!(
        "no exchange element for {x} between {base1:?} and {base2:?}"
    )))
}

/// A certificate that elements of `T ∖ S` can enter `S` one at a time.
///
/// For each `x ∈ T ∖ S` it names a removal set `b(x) ⊆ S ∖ T` (possibly
/// empty) such that `(S ∖ b(x)) ∪ {x}` stays independent in every matroid,
/// while each `y ∈ S ∖ T` is charged by at most `k` different `x`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct ExchangeMapping {
    assignments: BTreeMap<ElementId, ElementSet>,
}

impl ExchangeMapping {
    /// The mapped elements (`T ∖ S`), in ascending order.
    pub fn domain(&self) -> impl Iterator<Item = ElementId> + '_ {
        self.assignments.keys().copied()
    }

    /// The removal set assigned to `x`.
    pub fn removal_for(&self, x: ElementId) -> Option<&ElementSet> {
        self.assignments.get(&x)
    }

    pub fn assignments(&self) -> &BTreeMap<ElementId, ElementSet> {
        &self.assignments
    }

    pub fn len(&self) -> usize {
        self.assignments.len()
    }

    pub fn is_empty(&self) -> bool {
        self.assignments.is_empty()
    }

    /// Validity predicate: every `(S ∖ b(x)) ∪ {x}` is independent in every
    /// matroid, every `b(x)` lies inside `S ∖ T` with `|b(x)| ≤ k`, and the
    /// domain is exactly `T ∖ S`.
    pub fn is_valid(
        &self,
        matroids: &[MatroidSpec],
        s: &ElementSet,
        t: &ElementSet,
    ) -> Result<bool> {
        let diff_ts: ElementSet = t.difference(s).copied().collect();
        let diff_st: ElementSet = s.difference(t).copied().collect();
        if self.assignments.keys().copied().collect::<ElementSet>() != diff_ts {
            return Ok(false);
        }
        for (&x, removal) in &self.assignments {
            if removal.len() > matroids.len() || !removal.is_subset(&diff_st) {
                return Ok(false);
            }
            let mut swapped: ElementSet = s.difference(removal).copied().collect();
            swapped.insert(x);
            if !independent_in_all(matroids, &swapped)? {
                return Ok(false);
            }
        }
        Ok(true)
    }

    /// Load predicate: each `y ∈ S ∖ T` appears in at most `max_load` of
    /// the removal sets.
    pub fn load_within(&self, max_load: usize) -> bool {
        let mut load: BTreeMap<ElementId, usize> = BTreeMap::new();
        for removal in self.assignments.values() {
            for &y in removal {
                *load.entry(y).or_insert(0) += 1;
            }
        }
        load.values().all(|&c| c <= max_load)
    }
}

/// Constructs the exchange mapping `b : T ∖ S → subsets of S ∖ T` for an
/// intersection of matroids over the ground set `{0, …, n−1}`.
///
/// Per matroid, `T` is first extended to a base within the full ground set,
/// then `S` is extended to a base using only elements of that base.
/// Elements of `T` already absorbed map to the empty removal; each
/// remaining `x ∈ T` must displace one element of `base ∖ target_base`
/// (all of which lie in `S ∖ T`). An element `y` is admissible for `x`
/// exactly when `(base ∖ {y}) ∪ {x}` stays independent — and then
/// `(S ∖ {y}) ∪ {x}` is independent too, since `S ⊆ base`. The bijective
/// base-exchange theorem guarantees a perfect matching of the pending
/// elements into their admissible removals, found here by augmenting
/// paths in ascending id order (a greedy pass that displaces one element
/// at a time can paint itself into a corner, e.g. with parallel graph
/// edges, so the assignment is solved as a matching instead). The
/// per-matroid removals are then united, so each `y ∈ S ∖ T` carries load
/// at most the number of matroids.
pub fn build_exchange_mapping(
    matroids: &[MatroidSpec],
    n: usize,
    s: &ElementSet,
    t: &ElementSet,
) -> Result<ExchangeMapping> {
    if matroids.is_empty() {
        return Err(Error::Precondition("build_exchange_mapping: empty matroid list".into()));
    }
    if !independent_in_all(matroids, s)? || !independent_in_all(matroids, t)? {
        return Err(Error::Precondition(
            "build_exchange_mapping: S and T must be independent in every matroid".into(),
        ));
    }
    let ground: ElementSet = (0..n).collect();
    let mut assignments: BTreeMap<ElementId, ElementSet> =
        t.difference(s).map(|&x| (x, ElementSet::new())).collect();

    for spec in matroids {
        let matroid = spec.as_matroid();
        let target_base = extend_to_base(matroid, t, &ground)?;
        let pool: ElementSet = target_base.difference(s).copied().collect();
        let base = extend_to_base(matroid, s, &pool)?;

        // Elements of T already inside the base map to φ for this matroid.
        let pending: Vec<ElementId> = t.difference(&base).copied().collect();
        if pending.is_empty() {
            continue;
        }
        let removable: Vec<ElementId> = base.difference(&target_base).copied().collect();
        debug_assert!(removable.iter().all(|y| s.contains(y) && !t.contains(y)));

        let mut admissible: Vec<Vec<usize>> = Vec::with_capacity(pending.len());
        for &x in &pending {
            let mut row = Vec::new();
            for (yi, &y) in removable.iter().enumerate() {
                let mut swapped = base.clone();
                swapped.remove(&y);
                swapped.insert(x);
                if matroid.is_independent(&swapped)? {
                    row.push(yi);
                }
            }
            admissible.push(row);
        }

        let mut owner: Vec<Option<usize>> = vec![None; removable.len()];
        for (xi, &x) in pending.iter().enumerate() {
            let mut visited = vec![false; removable.len()];
            if !assign(xi, &admissible, &mut owner, &mut visited) {
                return Err(Error::MatroidContract(format!(
                    "no exchange assignment for {x} between {base:?} and {target_base:?}"
                )));
            }
        }
        for (yi, owner) in owner.iter().enumerate() {
            if let Some(xi) = owner {
                assignments
                    .get_mut(&pending[*xi])
                    .expect("pending elements are in T \\ S")
                    .insert(removable[yi]);
            }
        }
    }
    Ok(ExchangeMapping { assignments })
}

/// Augmenting-path step of the exchange matching.
fn assign(
    xi: usize,
    admissible: &[Vec<usize>],
    owner: &mut [Option<usize>],
    visited: &mut [bool],
) -> bool {
    for &yi in &admissible[xi] {
        if visited[yi] {
            continue;
        }
        visited[yi] = true;
        let free = match owner[yi] {
            None => true,
            Some(current) => assign(current, admissible, owner, visited),
        };
        if free {
            owner[yi] = Some(xi);
            return true;
        }
    }
    false
}

#[cfg(test)]
mod tests {
    use super::*;

    fn set(ids: &[ElementId]) -> ElementSet {
        ids.iter().copied().collect()
    }

    fn triangle() -> GraphicMatroid {
        // Edges 0=(0,1), 1=(1,2), 2=(0,2).
        GraphicMatroid::new(3, vec![(0, 1), (1, 2), (0, 2)]).unwrap()
    }

    #[test]
    fn uniform_matroid_satisfies_axioms() {
        let m = UniformMatroid::new(2);
        assert_eq!(check_matroid_axioms(&m, 4).unwrap(), None);
    }

    #[test]
    fn rank_one_family_on_two_elements_is_a_matroid() {
        let m = ExplicitMatroid::new_unchecked(2, vec![set(&[]), set(&[0]), set(&[1])]).unwrap();
        assert_eq!(check_matroid_axioms(&m, 2).unwrap(), None);
        assert!(ExplicitMatroid::new(2, vec![set(&[]), set(&[0]), set(&[1])]).is_ok());
    }

    #[test]
    fn missing_subset_yields_hereditary_witness() {
        let m = ExplicitMatroid::new_unchecked(2, vec![set(&[]), set(&[0, 1])]).unwrap();
        let violation = check_matroid_axioms(&m, 2).unwrap();
        assert_eq!(
            violation,
            Some(AxiomViolation::Hereditary { set: set(&[0, 1]), subset: set(&[0]) })
        );
        assert!(ExplicitMatroid::new(2, vec![set(&[]), set(&[0, 1])]).is_err());
    }

    #[test]
    fn exchange_violation_is_detected() {
        // {0,1} and {2} are independent but neither 0 nor 1 extends {2}.
        let m = ExplicitMatroid::new_unchecked(
            3,
            vec![set(&[]), set(&[0]), set(&[1]), set(&[2]), set(&[0, 1])],
        )
        .unwrap();
        let violation = check_matroid_axioms(&m, 3).unwrap();
        assert_eq!(
            violation,
            Some(AxiomViolation::Exchange { larger: set(&[0, 1]), smaller: set(&[2]) })
        );
    }

    #[test]
    fn shipped_families_pass_exhaustive_checks() {
        let uniform = MatroidSpec::Uniform(UniformMatroid::new(3));
        let partition = MatroidSpec::Partition(
            PartitionMatroid::new(vec![0, 0, 1, 1, 2, 2, 0, 1], vec![1, 2, 1]).unwrap(),
        );
        let graphic = MatroidSpec::Graphic(
            GraphicMatroid::new(5, vec![(0, 1), (1, 2), (2, 3), (3, 4), (4, 0), (0, 2), (1, 3), (2, 4)])
                .unwrap(),
        );
        for m in [&uniform, &partition, &graphic] {
            assert_eq!(check_matroid_axioms(m.as_matroid(), 8).unwrap(), None);
            assert_eq!(check_matroid_axioms_sampled(m.as_matroid(), 8, 200, 5).unwrap(), None);
        }
    }

    #[test]
    fn explicit_matroid_bases_share_cardinality() {
        let m = ExplicitMatroid::new(
            3,
            vec![set(&[]), set(&[0]), set(&[1]), set(&[2]), set(&[0, 1]), set(&[1, 2])],
        )
        .unwrap();
        let family = m.independent_sets();
        let maximal: Vec<&ElementSet> = family
            .iter()
            .filter(|s| {
                !family.iter().any(|t| t.len() > s.len() && s.iter().all(|e| t.contains(e)))
            })
            .collect();
        assert!(!maximal.is_empty());
        let rank = maximal[0].len();
        assert!(maximal.iter().all(|b| b.len() == rank));
    }

    #[test]
    fn extend_to_base_is_a_fixed_point_on_maximal_sets() {
        let m = UniformMatroid::new(2);
        let s = set(&[1, 4]);
        assert_eq!(extend_to_base(&m, &s, &set(&[0, 2, 3])).unwrap(), s);
    }

    #[test]
    fn extend_to_base_scans_ascending() {
        let m = UniformMatroid::new(2);
        assert_eq!(extend_to_base(&m, &set(&[3]), &set(&[0, 1])).unwrap(), set(&[0, 3]));
    }

    #[test]
    fn extend_to_base_respects_cycles() {
        let m = triangle();
        assert_eq!(extend_to_base(&m, &set(&[0]), &set(&[1, 2])).unwrap(), set(&[0, 1]));
    }

    #[test]
    fn extend_to_base_rejects_dependent_start() {
        let m = UniformMatroid::new(1);
        assert!(matches!(
            extend_to_base(&m, &set(&[0, 1]), &set(&[])),
            Err(Error::Precondition(_))
        ));
    }

    #[test]
    fn find_exchange_prefers_smallest_id() {
        let m = UniformMatroid::new(2);
        assert_eq!(find_exchange_element(&m, &set(&[0, 1]), &set(&[2, 3]), 2).unwrap(), 0);
    }

    #[test]
    fn find_exchange_on_triangle() {
        let m = triangle();
        assert_eq!(find_exchange_element(&m, &set(&[0, 1]), &set(&[0, 2]), 2).unwrap(), 1);
    }

    #[test]
    fn find_exchange_rejects_equal_bases() {
        let m = UniformMatroid::new(2);
        assert!(matches!(
            find_exchange_element(&m, &set(&[0, 1]), &set(&[0, 1]), 0),
            Err(Error::Precondition(_))
        ));
    }

    #[test]
    fn mapping_for_identical_sets_is_empty() {
        let matroids = vec![MatroidSpec::Uniform(UniformMatroid::new(2))];
        let mapping = build_exchange_mapping(&matroids, 4, &set(&[0, 1]), &set(&[0, 1])).unwrap();
        assert!(mapping.is_empty());
        assert!(mapping.is_valid(&matroids, &set(&[0, 1]), &set(&[0, 1])).unwrap());
    }

    #[test]
    fn single_matroid_mapping_is_injective() {
        let matroids = vec![MatroidSpec::Uniform(UniformMatroid::new(2))];
        let (s, t) = (set(&[0, 1]), set(&[2, 3]));
        let mapping = build_exchange_mapping(&matroids, 4, &s, &t).unwrap();
        assert!(mapping.is_valid(&matroids, &s, &t).unwrap());
        assert!(mapping.load_within(1));
        assert_eq!(mapping.len(), 2);
    }

    #[test]
    fn two_matroid_mapping_respects_load_two() {
        let matroids = vec![
            MatroidSpec::Uniform(UniformMatroid::new(2)),
            MatroidSpec::Partition(PartitionMatroid::new(vec![0, 1, 0, 1], vec![1, 1]).unwrap()),
        ];
        let (s, t) = (set(&[0, 1]), set(&[2, 3]));
        let mapping = build_exchange_mapping(&matroids, 4, &s, &t).unwrap();
        assert!(mapping.is_valid(&matroids, &s, &t).unwrap());
        assert!(mapping.load_within(2));
        for x in mapping.domain() {
            assert!(mapping.removal_for(x).unwrap().len() <= 2);
        }
    }

    #[test]
    fn parallel_edges_need_the_matching_step() {
        // Edges 0=(0,1), 1=(1,2), 2=(0,2), 3=(0,1) parallel to edge 0.
        // Swapping elements one at a time can strand element 3: its only
        // admissible removal is edge 0, which a greedy pass may hand to
        // element 2 first.
        let matroids = vec![MatroidSpec::Graphic(
            GraphicMatroid::new(3, vec![(0, 1), (1, 2), (0, 2), (0, 1)]).unwrap(),
        )];
        let (s, t) = (set(&[0, 1]), set(&[2, 3]));
        let mapping = build_exchange_mapping(&matroids, 4, &s, &t).unwrap();
        assert!(mapping.is_valid(&matroids, &s, &t).unwrap());
        assert!(mapping.load_within(1));
        assert_eq!(mapping.removal_for(3).unwrap(), &set(&[0]));
        assert_eq!(mapping.removal_for(2).unwrap(), &set(&[1]));
    }

    #[test]
    fn mapping_rejects_dependent_inputs() {
        let matroids = vec![MatroidSpec::Uniform(UniformMatroid::new(1))];
        assert!(matches!(
            build_exchange_mapping(&matroids, 4, &set(&[0, 1]), &set(&[2])),
            Err(Error::Precondition(_))
        ));
    }

    #[test]
    fn random_triples_yield_valid_mappings() {
        let mut rng = ChaCha8Rng::seed_from_u64(42);
        for trial in 0..60 {
            let n = 4 + (trial % 5);
            let matroids: Vec<MatroidSpec> = match trial % 3 {
                0 => vec![MatroidSpec::Uniform(UniformMatroid::new(1 + trial % 3))],
                1 => vec![
                    MatroidSpec::Uniform(UniformMatroid::new(2 + trial % 2)),
                    MatroidSpec::Partition(
                        PartitionMatroid::new((0..n).map(|e| e % 3).collect(), vec![1, 2, 1]).unwrap(),
                    ),
                ],
                _ => vec![
                    MatroidSpec::Graphic(
                        GraphicMatroid::new(n, (0..n).map(|e| (e % n, (e * 2 + 1) % n)).collect())
                            .unwrap(),
                    ),
                    MatroidSpec::Uniform(UniformMatroid::new(2)),
                ],
            };
            let intersection = IntersectionView(&matroids);
            let s = random_independent_set(&intersection, n, &mut rng).unwrap();
            let t = random_independent_set(&intersection, n, &mut rng).unwrap();
            let mapping = build_exchange_mapping(&matroids, n, &s, &t).unwrap();
            assert!(mapping.is_valid(&matroids, &s, &t).unwrap(), "trial {trial}: invalid mapping");
            assert!(mapping.load_within(matroids.len()), "trial {trial}: load exceeded");
        }
    }

    struct IntersectionView<'a>(&'a [MatroidSpec]);

    impl Matroid for IntersectionView<'_> {
        fn is_independent(&self, set: &ElementSet) -> Result<bool> {
            independent_in_all(self.0, set)
        }
    }
}
