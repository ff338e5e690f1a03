//! Discrete entropy, mixtures, random edges with uniform ordering, ratio
//! sequences, entropic density and the partial-forest sampler.
//!
//! All entropies are in bits. Sums run over supports only, so `0 log 0 = 0`.

use std::collections::{BTreeMap, BTreeSet, HashMap};

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::hom::{is_hom_free, SearchBudget};
use crate::hypergraph::{tent_family, Hypergraph, PartialHypergraph};
use crate::lagrangian::{self, SimplexPoint};
use crate::region::{tent_pairs, TAU_FEAS};
use crate::rng;

const PROB_TOL: f64 = 1e-12;

/// A finitely supported random variable.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DiscreteRV<T: Ord> {
    outcomes: Vec<T>,
    probs: Vec<f64>,
}

impl<T: Ord + Clone> DiscreteRV<T> {
    /// Repeated outcomes are merged and zero-probability outcomes dropped; the
    /// probabilities must sum to one within 1e-12.
    pub fn new(outcomes: Vec<T>, probs: Vec<f64>) -> Result<Self> {
        if outcomes.len() != probs.len() {
            return Err(Error::DimensionMismatch { expected: outcomes.len(), got: probs.len() });
        }
        if probs.iter().any(|p| !p.is_finite() || *p < 0.0) {
            return Err(Error::InvalidArgument("probabilities must be finite and nonnegative".into()));
        }
        let total: f64 = probs.iter().sum();
        if (total - 1.0).abs() > PROB_TOL * (1.0 + probs.len() as f64) {
            return Err(Error::InvalidArgument(format!("probabilities sum to {total}")));
        }
        let mut merged: BTreeMap<T, f64> = BTreeMap::new();
        for (o, p) in outcomes.into_iter().zip(probs) {
            if p > 0.0 {
                *merged.entry(o).or_insert(0.0) += p;
            }
        }
        Ok(Self::from_map(merged))
    }

    fn from_map(map: BTreeMap<T, f64>) -> Self {
        let (outcomes, probs) = map.into_iter().unzip();
        Self { outcomes, probs }
    }

    pub fn uniform(outcomes: Vec<T>) -> Result<Self> {
        let n = outcomes.len();
        if n == 0 {
            return Err(Error::InvalidArgument("empty outcome set".into()));
        }
        Self::new(outcomes, vec![1.0 / n as f64; n])
    }

    pub fn point(outcome: T) -> Self {
        Self { outcomes: vec![outcome], probs: vec![1.0] }
    }

    /// Support, sorted.
    pub fn support(&self) -> &[T] {
        &self.outcomes
    }

    pub fn probs(&self) -> &[f64] {
        &self.probs
    }

    pub fn prob(&self, outcome: &T) -> f64 {
        self.outcomes.binary_search(outcome).map_or(0.0, |i| self.probs[i])
    }

    pub fn iter(&self) -> impl Iterator<Item = (&T, f64)> {
        self.outcomes.iter().zip(self.probs.iter().copied())
    }

    /// `ℍ(X) = −Σ p log₂ p`.
    pub fn entropy(&self) -> f64 {
        entropy_of(self.probs.iter().copied())
    }

    /// Image law under `f`.
    pub fn map<U: Ord + Clone>(&self, f: impl Fn(&T) -> U) -> DiscreteRV<U> {
        let mut merged: BTreeMap<U, f64> = BTreeMap::new();
        for (o, p) in self.iter() {
            *merged.entry(f(o)).or_insert(0.0) += p;
        }
        DiscreteRV::from_map(merged)
    }

    /// Largest absolute difference between the two probability mass functions.
    pub fn distance(&self, other: &Self) -> f64 {
        let mut worst: f64 = 0.0;
        for (o, p) in self.iter() {
            worst = worst.max((p - other.prob(o)).abs());
        }
        for (o, p) in other.iter() {
            worst = worst.max((p - self.prob(o)).abs());
        }
        worst
    }
}

fn entropy_of(probs: impl Iterator<Item = f64>) -> f64 {
    probs.filter(|&p| p > 0.0).map(|p| -p * p.log2()).sum()
}

/// `ℍ(X)` in bits.
pub fn entropy<T: Ord + Clone>(x: &DiscreteRV<T>) -> f64 {
    x.entropy()
}

/// A random tuple of fixed arity.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct JointRV {
    arity: usize,
    law: DiscreteRV<Vec<usize>>,
}

impl JointRV {
    pub fn new(law: DiscreteRV<Vec<usize>>) -> Result<Self> {
        let arity = law.support().first().map_or(0, |t| t.len());
        if law.support().iter().any(|t| t.len() != arity) {
            return Err(Error::InvalidArgument("tuples of mixed arity".into()));
        }
        Ok(Self { arity, law })
    }

    pub fn arity(&self) -> usize {
        self.arity
    }

    pub fn law(&self) -> &DiscreteRV<Vec<usize>> {
        &self.law
    }

    pub fn entropy(&self) -> f64 {
        self.law.entropy()
    }

    fn check_coords(&self, coords: &[usize]) -> Result<()> {
        if let Some(&c) = coords.iter().find(|&&c| c >= self.arity) {
            return Err(Error::InvalidArgument(format!("coordinate {c} out of range for arity {}", self.arity)));
        }
        Ok(())
    }

    /// Law of the sub-tuple on `coords`, in the given order.
    pub fn marginal(&self, coords: &[usize]) -> Result<DiscreteRV<Vec<usize>>> {
        self.check_coords(coords)?;
        Ok(self.law.map(|t| coords.iter().map(|&c| t[c]).collect()))
    }

    /// `ℍ(X_A)` for a coordinate set `A`.
    pub fn joint_entropy(&self, coords: &[usize]) -> Result<f64> {
        Ok(self.marginal(coords)?.entropy())
    }

    /// `ℍ(X_A | X_B) = −Σ_b P(b) Σ_a P(a|b) log₂ P(a|b)`.
    pub fn conditional_entropy(&self, target: &[usize], condition_on: &[usize]) -> Result<f64> {
        self.check_coords(target)?;
        self.check_coords(condition_on)?;
        let mut groups: BTreeMap<Vec<usize>, BTreeMap<Vec<usize>, f64>> = BTreeMap::new();
        for (t, p) in self.law.iter() {
            let b: Vec<usize> = condition_on.iter().map(|&c| t[c]).collect();
            let a: Vec<usize> = target.iter().map(|&c| t[c]).collect();
            *groups.entry(b).or_default().entry(a).or_insert(0.0) += p;
        }
        let mut total = 0.0;
        for inner in groups.values() {
            let pb: f64 = inner.values().sum();
            total += pb * entropy_of(inner.values().map(|p| p / pb));
        }
        Ok(total)
    }

    /// `ℍ(X_A | X_B)` with `B = condition_on` and `A` every other coordinate.
    pub fn conditional_entropy_of_rest(&self, condition_on: &[usize]) -> Result<f64> {
        let rest: Vec<usize> = (0..self.arity).filter(|c| !condition_on.contains(c)).collect();
        self.conditional_entropy(&rest, condition_on)
    }
}

/// `ℍ(X | Y)` for `XY` with the coordinates in `condition_on` playing `Y`.
pub fn conditional_entropy(xy: &JointRV, condition_on: &[usize]) -> Result<f64> {
    xy.conditional_entropy_of_rest(condition_on)
}

/// Law of `X_i` where the index `i` is drawn independently with weight `w_i`.
pub fn mixture<T: Ord + Clone>(xs: &[DiscreteRV<T>], w: &[f64]) -> Result<DiscreteRV<T>> {
    if xs.len() != w.len() {
        return Err(Error::DimensionMismatch { expected: xs.len(), got: w.len() });
    }
    if xs.is_empty() {
        return Err(Error::InvalidArgument("empty mixture".into()));
    }
    if w.iter().any(|p| !p.is_finite() || *p < 0.0) || (w.iter().sum::<f64>() - 1.0).abs() > 1e-12 {
        return Err(Error::InvalidArgument("mixture weights must be a probability vector".into()));
    }
    let mut merged: BTreeMap<T, f64> = BTreeMap::new();
    for (x, &wi) in xs.iter().zip(w) {
        if wi > 0.0 {
            for (o, p) in x.iter() {
                *merged.entry(o.clone()).or_insert(0.0) += wi * p;
            }
        }
    }
    Ok(DiscreteRV::from_map(merged))
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct MixtureBound<T: Ord> {
    pub weights: Vec<f64>,
    pub mixture: DiscreteRV<T>,
    /// `Σ 2^{ℍ(X_i)}`.
    pub lhs: f64,
    /// `a · 2^{ℍ(Z)}`.
    pub rhs: f64,
}

/// The mixture with weights proportional to `2^{ℍ(X_i)}`, which satisfies
/// `Σ 2^{ℍ(X_i)} ≤ a 2^{ℍ(Z)}` when no outcome lies in more than `a` supports.
pub fn mixture_bound_witness<T: Ord + Clone>(xs: &[DiscreteRV<T>], a: usize) -> Result<MixtureBound<T>> {
    if a == 0 || xs.is_empty() {
        return Err(Error::InvalidArgument("need a >= 1 and at least one variable".into()));
    }
    let mut multiplicity: BTreeMap<&T, usize> = BTreeMap::new();
    for x in xs {
        for o in x.support() {
            let m = multiplicity.entry(o).or_insert(0);
            *m += 1;
            if *m > a {
                return Err(Error::Precondition(format!("an outcome lies in more than {a} supports")));
            }
        }
    }
    let powers: Vec<f64> = xs.iter().map(|x| x.entropy().exp2()).collect();
    let lhs: f64 = powers.iter().sum();
    let weights: Vec<f64> = powers.iter().map(|p| p / lhs).collect();
    let z = mixture(xs, &weights)?;
    let rhs = a as f64 * z.entropy().exp2();
    Ok(MixtureBound { weights, mixture: z, lhs, rhs })
}

// ---------------------------------------------------------------------------
// Random edges with uniform ordering

/// Weights on the edges of a host; the induced tuple `(X_1, …, X_r)` picks an
/// edge with probability `w_e` and then a uniformly random ordering of it.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct EdgeDistribution {
    host: Hypergraph,
    weights: Vec<f64>,
    /// `W(S) = Σ_{e ⊇ S} w_e` for every nonempty `S` contained in an edge, sorted.
    #[serde(skip)]
    covers: HashMap<Vec<usize>, f64>,
}

impl EdgeDistribution {
    pub fn new(host: Hypergraph, weights: Vec<f64>) -> Result<Self> {
        if weights.len() != host.edge_count() {
            return Err(Error::DimensionMismatch { expected: host.edge_count(), got: weights.len() });
        }
        let point = SimplexPoint::new(weights)?;
        let weights = point.weights().to_vec();
        let mut covers: HashMap<Vec<usize>, f64> = HashMap::new();
        for (e, &w) in host.edges().iter().zip(&weights) {
            if w == 0.0 {
                continue;
            }
            for mask in 1u32..(1 << e.len()) {
                let s: Vec<usize> = (0..e.len()).filter(|&b| mask >> b & 1 == 1).map(|b| e[b]).collect();
                *covers.entry(s).or_insert(0.0) += w;
            }
        }
        Ok(Self { host, weights, covers })
    }

    pub fn uniform(host: Hypergraph) -> Result<Self> {
        let m = host.edge_count();
        Self::new(host, vec![1.0; m])
    }

    pub fn host(&self) -> &Hypergraph {
        &self.host
    }

    pub fn weights(&self) -> &[f64] {
        &self.weights
    }

    pub fn r(&self) -> usize {
        self.host.r()
    }

    /// `W(S)` for a set of distinct vertices (any order); `W(∅) = 1`.
    pub fn cover_weight(&self, set: &[usize]) -> f64 {
        if set.is_empty() {
            return 1.0;
        }
        let mut s = set.to_vec();
        s.sort_unstable();
        if s.windows(2).any(|w| w[0] == w[1]) {
            return 0.0;
        }
        self.covers.get(&s).copied().unwrap_or(0.0)
    }

    /// Probability that the first `|t|` coordinates equal the tuple `t`.
    pub fn tuple_prob(&self, t: &[usize]) -> f64 {
        let r = self.r();
        let m = t.len();
        let ways: f64 = (r - m + 1..=r).map(|i| i as f64).product();
        self.cover_weight(t) / ways
    }

    /// `ℍ(X_1, …, X_m)`; by symmetry this is the entropy of any `m` coordinates.
    pub fn tuple_entropy(&self, m: usize) -> f64 {
        if m == 0 {
            return 0.0;
        }
        let r = self.r();
        let ways: f64 = (r - m + 1..=r).map(|i| i as f64).product();
        let orderings: f64 = (1..=m).map(|i| i as f64).product();
        self.covers
            .iter()
            .filter(|(s, _)| s.len() == m)
            .map(|(_, &w)| {
                let p = w / ways;
                -orderings * p * p.log2()
            })
            .sum()
    }

    /// Law of a single coordinate: `P(X_1 = v) = (Σ_{e∋v} w_e) / r`.
    pub fn vertex_marginal(&self) -> DiscreteRV<usize> {
        let r = self.r() as f64;
        let mut m: BTreeMap<usize, f64> = BTreeMap::new();
        for (e, &w) in self.host.edges().iter().zip(&self.weights) {
            for &v in e {
                *m.entry(v).or_insert(0.0) += w / r;
            }
        }
        DiscreteRV::from_map(m.into_iter().filter(|(_, p)| *p > 0.0).collect())
    }

    /// The full law of `(X_1, …, X_r)`, with `r!` orderings per edge.
    pub fn joint_law(&self) -> JointRV {
        let r = self.r();
        let fact: f64 = (1..=r).map(|i| i as f64).product();
        let mut map: BTreeMap<Vec<usize>, f64> = BTreeMap::new();
        for (e, &w) in self.host.edges().iter().zip(&self.weights) {
            if w == 0.0 {
                continue;
            }
            let mut perm = e.clone();
            permutations(&mut perm, 0, &mut |t| {
                *map.entry(t.to_vec()).or_insert(0.0) += w / fact;
            });
        }
        JointRV { arity: r, law: DiscreteRV::from_map(map) }
    }

    /// Law of the first `m` coordinates.
    pub fn tuple_law(&self, m: usize) -> DiscreteRV<Vec<usize>> {
        let mut map: BTreeMap<Vec<usize>, f64> = BTreeMap::new();
        for s in self.covers.keys().filter(|s| s.len() == m) {
            let mut t = s.clone();
            permutations(&mut t, 0, &mut |tuple| {
                map.insert(tuple.to_vec(), self.tuple_prob(tuple));
            });
        }
        DiscreteRV::from_map(map)
    }
}

fn permutations(items: &mut Vec<usize>, start: usize, visit: &mut dyn FnMut(&[usize])) {
    if start == items.len() {
        visit(items);
        return;
    }
    for i in start..items.len() {
        items.swap(start, i);
        permutations(items, start + 1, visit);
        items.swap(start, i);
    }
}

/// `x_i = 2^{ℍ(X_i | X_{i+1}, …, X_r) − ℍ(X_i)}`.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct RatioSequence {
    pub x: Vec<f64>,
    /// `ℍ(X_1, …, X_r) − r ℍ(X_1)`.
    pub log2_product: f64,
}

impl RatioSequence {
    pub fn product(&self) -> f64 {
        self.x.iter().product()
    }

    /// Smallest slack over the constraints of `X_{r,k}` (negative when violated).
    pub fn worst_slack(&self, k: usize) -> f64 {
        let r = self.x.len();
        let at = |i: usize| if i == 0 { 0.0 } else { self.x[i - 1] };
        let mut worst = at(1);
        for i in 1..r {
            worst = worst.min(at(i + 1) - at(i));
        }
        for (i, j) in tent_pairs(r, k) {
            worst = worst.min(at(i + j) - at(i) - at(j));
        }
        worst.min(-(at(r) - 1.0).abs())
    }
}

/// The ratio sequence of the random edge `d`. Conditional entropies follow
/// from symmetry: `ℍ(X_i | X_{i+1..r}) = ℍ_{r−i+1} − ℍ_{r−i}` with `ℍ_m` the
/// entropy of `m` coordinates.
pub fn ratio_sequence(d: &EdgeDistribution) -> RatioSequence {
    let r = d.r();
    let h: Vec<f64> = (0..=r).map(|m| d.tuple_entropy(m)).collect();
    let mut x: Vec<f64> = (1..=r).map(|i| (h[r - i + 1] - h[r - i] - h[1]).exp2()).collect();
    x[r - 1] = 1.0;
    RatioSequence { x, log2_product: h[r] - r as f64 * h[1] }
}

// ---------------------------------------------------------------------------
// Entropic density

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct EntropicDensity {
    /// `max 2^{ℍ(X_1..X_r) − r ℍ(X_1)}` found.
    pub value: f64,
    pub witness: EdgeDistribution,
    /// `r! L(H)` from the Lagrangian ascent.
    pub blowup_density: f64,
    /// `|value − blowup_density| < 1e-5`; only then is the value claimed optimal.
    pub agrees_with_lagrangian: bool,
    pub restarts_used: usize,
}

fn log2_factorial(r: usize) -> f64 {
    (1..=r).map(|i| (i as f64).log2()).sum()
}

/// `log₂ r! + ℍ(w) − r ℍ(m(w))` with `m_v = Σ_{e∋v} w_e / r`.
fn entropic_objective(h: &Hypergraph, w: &[f64]) -> f64 {
    let r = h.r();
    let mut m = vec![0.0; h.n()];
    for (e, &we) in h.edges().iter().zip(w) {
        for &v in e {
            m[v] += we / r as f64;
        }
    }
    log2_factorial(r) + entropy_of(w.iter().copied()) - r as f64 * entropy_of(m.into_iter())
}

/// Alternating maximization: `w_e ∝ ∏_{v∈e} m_v(w)`. Each step maximizes a
/// concave minorant that touches the objective, so the value never decreases.
fn entropic_ascent(h: &Hypergraph, mut w: Vec<f64>) -> (f64, Vec<f64>) {
    let r = h.r() as f64;
    let mut value = entropic_objective(h, &w);
    let mut history = std::collections::VecDeque::new();
    for _ in 0..10_000 {
        let mut m = vec![0.0; h.n()];
        for (e, &we) in h.edges().iter().zip(&w) {
            for &v in e {
                m[v] += we / r;
            }
        }
        let mut next: Vec<f64> = h.edges().iter().map(|e| e.iter().map(|&v| m[v]).product()).collect();
        let total: f64 = next.iter().sum();
        if total <= 0.0 {
            break;
        }
        next.iter_mut().for_each(|x| *x /= total);
        let nv = entropic_objective(h, &next);
        if nv < value {
            break;
        }
        w = next;
        value = nv;
        history.push_back(value);
        if history.len() > 50 {
            let old = history.pop_front().unwrap_or(value);
            if value - old < 1e-14 {
                break;
            }
        }
    }
    (value, w)
}

/// Entropic density of `H` by multistart alternating ascent from `restarts`
/// Dirichlet starts plus the start `w_e ∝ ∏ x_v` built from the Lagrangian witness.
pub fn entropic_density(h: &Hypergraph, restarts: usize, seed: u64) -> Result<EntropicDensity> {
    if h.edge_count() == 0 {
        return Err(Error::InvalidArgument("entropic density needs at least one edge".into()));
    }
    let lag = lagrangian::lagrangian_seeded(h, lagrangian::DEFAULT_RESTARTS, 1e-12, seed);
    let x = lag.witness.weights();
    let seeded: Vec<f64> = h.edges().iter().map(|e| e.iter().map(|&v| x[v]).product()).collect();
    let m = h.edge_count();
    let starts: Vec<Vec<f64>> = std::iter::once(seeded)
        .chain((0..restarts).map(|i| rng::dirichlet_ones(&mut rng::stream(seed, 1_000_000 + i as u64), m)))
        .collect();
    let runs: Vec<(f64, Vec<f64>)> = starts
        .into_par_iter()
        .filter(|w| w.iter().sum::<f64>() > 0.0)
        .map(|w| {
            let total: f64 = w.iter().sum();
            entropic_ascent(h, w.into_iter().map(|v| v / total).collect())
        })
        .collect();
    let (log_value, w) = runs
        .into_iter()
        .reduce(|a, b| {
            let better = b.0 > a.0 || (b.0 == a.0 && b.1.iter().zip(&a.1).map(|(p, q)| p.total_cmp(q)).find(|o| o.is_ne()) == Some(std::cmp::Ordering::Less));
            if better { b } else { a }
        })
        .ok_or_else(|| Error::Numerical("no ascent run".into()))?;
    let value = log_value.exp2();
    Ok(EntropicDensity {
        value,
        witness: EdgeDistribution::new(h.clone(), w)?,
        blowup_density: lag.blowup_density,
        agrees_with_lagrangian: (value - lag.blowup_density).abs() < 1e-5,
        restarts_used: restarts,
    })
}

// ---------------------------------------------------------------------------
// Partial forests

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct ForestSequence {
    /// `f[i − 1] = f_i`, the number of vertices `v` with `|e_v| = i`.
    pub f: Vec<usize>,
    /// `e_v` for every vertex, sorted by vertex id.
    pub e_v: Vec<Vec<usize>>,
}

fn validate_order(n: usize, order: &[usize]) -> Result<Vec<usize>> {
    if order.len() != n {
        return Err(Error::DimensionMismatch { expected: n, got: order.len() });
    }
    let mut rank = vec![usize::MAX; n];
    for (pos, &v) in order.iter().enumerate() {
        if v >= n || rank[v] != usize::MAX {
            return Err(Error::InvalidArgument("order must list every vertex exactly once".into()));
        }
        rank[v] = pos;
    }
    Ok(rank)
}

/// Forest sequence of `f` under the order listing vertices from smallest to
/// largest, or `None` when `f` is not a partial forest for that order.
///
/// The edges whose largest vertex is `v` are the sets `{u ∈ E : u ≤ v}` for
/// maximal edges `E ∋ v`, together with their subsets containing `v`; `f` is a
/// partial forest when one of those prefixes contains all the others.
pub fn forest_sequence(f: &PartialHypergraph, order: &[usize]) -> Result<Option<ForestSequence>> {
    let rank = validate_order(f.n(), order)?;
    let mut counts = vec![0usize; f.r()];
    let mut e_v = Vec::with_capacity(f.n());
    for v in 0..f.n() {
        let prefixes: Vec<BTreeSet<usize>> = f
            .maximal_edges()
            .iter()
            .filter(|e| e.contains(&v))
            .map(|e| e.iter().copied().filter(|&u| rank[u] <= rank[v]).collect())
            .collect();
        let Some(top) = prefixes.iter().max_by_key(|p| p.len()) else { return Ok(None) };
        if !prefixes.iter().all(|p| p.is_subset(top)) {
            return Ok(None);
        }
        counts[top.len() - 1] += 1;
        e_v.push(top.iter().copied().collect());
    }
    Ok(Some(ForestSequence { f: counts, e_v }))
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct TreeSample {
    /// Exact law of `(Y_v)_{v ∈ V(F)}`, coordinates indexed by vertex.
    pub law: JointRV,
    pub realized_entropy: f64,
    /// `|V(F)| ℍ(X_1) + Σ_i f_{r+1−i} log₂ x_i`.
    pub predicted_entropy: f64,
    /// Largest deviation between the law of `(Y_v)_{v∈e}` (increasing vertex
    /// order) and the law of `|e|` coordinates of `X`, over all edges `e` of `F`.
    pub max_marginal_error: f64,
}

/// Exact law of the sampler: vertices are processed in the given order and
/// `Y_v` is drawn given `Y_{e_v ∖ v}` from the conditional law of one tuple
/// coordinate given `|e_v| − 1` others:
/// `P(Y_v = y | Y_S = T) = W(T ∪ {y}) / ((r − |S|) W(T))`.
pub fn tree_sampler_entropy(f: &PartialHypergraph, order: &[usize], d: &EdgeDistribution) -> Result<TreeSample> {
    let r = d.r();
    if f.r() != r {
        return Err(Error::UniformityMismatch { left: f.r(), right: r });
    }
    let forest = forest_sequence(f, order)?
        .ok_or_else(|| Error::Precondition("not a partial forest for this order".into()))?;
    let n = f.n();
    let rank = validate_order(n, order)?;
    let host_n = d.host().n();
    let mut states: Vec<(Vec<usize>, f64)> = vec![(vec![usize::MAX; n], 1.0)];
    for &v in order {
        let earlier: Vec<usize> = forest.e_v[v].iter().copied().filter(|&u| u != v).collect();
        let mut next = Vec::new();
        for (assign, p) in &states {
            let image: Vec<usize> = earlier.iter().map(|&u| assign[u]).collect();
            let base = d.cover_weight(&image);
            if base <= 0.0 {
                return Err(Error::Precondition("conditioning event has probability zero".into()));
            }
            for y in 0..host_n {
                if image.contains(&y) {
                    continue;
                }
                let mut with = image.clone();
                with.push(y);
                let q = d.cover_weight(&with) / ((r - earlier.len()) as f64 * base);
                if q > 0.0 {
                    let mut a = assign.clone();
                    a[v] = y;
                    next.push((a, p * q));
                }
            }
        }
        states = next;
    }
    let (outcomes, probs): (Vec<Vec<usize>>, Vec<f64>) = states.into_iter().unzip();
    let law = JointRV::new(DiscreteRV::new(outcomes, probs)?)?;
    let realized = law.entropy();
    let ratio = ratio_sequence(d);
    let h1 = d.tuple_entropy(1);
    let predicted = n as f64 * h1
        + (1..=r).map(|i| forest.f[r - i] as f64 * ratio.x[i - 1].log2()).sum::<f64>();
    let mut faces: BTreeSet<Vec<usize>> = BTreeSet::new();
    for e in f.maximal_edges() {
        for mask in 1u32..(1 << e.len()) {
            faces.insert((0..e.len()).filter(|&b| mask >> b & 1 == 1).map(|b| e[b]).collect());
        }
    }
    let mut worst: f64 = 0.0;
    for face in &faces {
        let mut sorted = face.clone();
        sorted.sort_by_key(|&u| rank[u]);
        let observed = law.marginal(&sorted)?;
        worst = worst.max(observed.distance(&d.tuple_law(face.len())));
    }
    Ok(TreeSample { law, realized_entropy: realized, predicted_entropy: predicted, max_marginal_error: worst })
}

/// The two partial forests used for `x_i + x_j ≤ x_{i+j}`: vertices
/// `v_1..v_r` are `0..r−1` and `w` is `r`; the first has maximal edges
/// `{v_1..v_r}` and `{v_{i+1}..v_r, w}`, the second `{v_1..v_r}` and
/// `{v_1..v_{r−j}, w}`. The natural order is the forest order for both.
pub fn ratio_forests(r: usize, i: usize, j: usize) -> Result<(PartialHypergraph, PartialHypergraph)> {
    if i < 1 || j < 1 || i + j > r {
        return Err(Error::InvalidArgument(format!("need i, j >= 1 and i + j <= r, got r = {r}, i = {i}, j = {j}")));
    }
    let base: Vec<usize> = (0..r).collect();
    let first = PartialHypergraph::new(r, r + 1, vec![base.clone(), (i..r).chain(std::iter::once(r)).collect()])?;
    let second = PartialHypergraph::new(r, r + 1, vec![base, (0..r - j).chain(std::iter::once(r)).collect()])?;
    Ok((first, second))
}

// ---------------------------------------------------------------------------
// Ratio constraints on hom-free hosts

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct RatioCheck {
    pub r: usize,
    pub k: usize,
    pub trials: usize,
    /// Smallest constraint slack over all sequences checked.
    pub worst_slack: f64,
    pub worst_sequence: Vec<f64>,
    /// Every sequence lies in `X_{r,k}` up to 1e-9.
    pub all_inside: bool,
}

/// Checks that ratio sequences of random edges on an `F_{r,k}`-hom-free host
/// lie in `X_{r,k}`: `trials` Dirichlet edge weights plus the entropic-density witness.
pub fn verify_ratio_constraints(
    h: &Hypergraph,
    k: usize,
    trials: usize,
    budget: &SearchBudget,
    seed: u64,
) -> Result<RatioCheck> {
    let r = h.r();
    let family = tent_family(r, k)?;
    if h.edge_count() == 0 {
        return Err(Error::InvalidArgument("host has no edges".into()));
    }
    if !is_hom_free(h, &family, budget)? {
        return Err(Error::Precondition(format!("host is not F_{{{r},{k}}}-hom-free")));
    }
    let m = h.edge_count();
    let mut dists: Vec<EdgeDistribution> = (0..trials)
        .map(|t| EdgeDistribution::new(h.clone(), rng::dirichlet_ones(&mut rng::stream(seed, t as u64), m)))
        .collect::<Result<_>>()?;
    dists.push(entropic_density(h, 20, seed)?.witness);
    let mut worst_slack = f64::INFINITY;
    let mut worst_sequence = Vec::new();
    for d in &dists {
        let seq = ratio_sequence(d);
        let slack = seq.worst_slack(k);
        if slack < worst_slack {
            worst_slack = slack;
            worst_sequence = seq.x.clone();
        }
    }
    Ok(RatioCheck { r, k, trials, worst_slack, worst_sequence, all_inside: worst_slack >= -TAU_FEAS })
}
