//! Uniform and partial hypergraphs together with the named constructions:
//! tents, λ-tents, partial tents, tent families, balanced complete r-partite
//! hypergraphs and blowups.
//!
//! Vertices are dense `usize` labels `0..n`. Edges are stored sorted, and the
//! edge list itself is kept in lexicographic order, so two hypergraphs with the
//! same edge set compare equal.

use std::collections::{BTreeSet, HashSet};

use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// An r-uniform hypergraph on vertices `0..n`.
#[derive(Debug, Clone, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(try_from = "RawHypergraph")]
pub struct Hypergraph {
    r: usize,
    n: usize,
    edges: Vec<Vec<usize>>,
}

#[derive(Deserialize)]
struct RawHypergraph {
    r: usize,
    n: usize,
    edges: Vec<Vec<usize>>,
}

impl TryFrom<RawHypergraph> for Hypergraph {
    type Error = Error;

    fn try_from(raw: RawHypergraph) -> Result<Self> {
        Hypergraph::new(raw.r, raw.n, raw.edges)
    }
}

impl Hypergraph {
    /// Builds a hypergraph, sorting each edge and the edge list.
    ///
    /// Rejects `r < 2`, edges of the wrong size, repeated or out-of-range
    /// vertices and duplicate edges.
    pub fn new(r: usize, n: usize, edges: Vec<Vec<usize>>) -> Result<Self> {
        if r < 2 {
            return Err(Error::InvalidHypergraph(format!("uniformity {r} < 2")));
        }
        let mut canon = Vec::with_capacity(edges.len());
        for mut e in edges {
            e.sort_unstable();
            if e.len() != r {
                return Err(Error::InvalidHypergraph(format!(
                    "edge {e:?} has {} vertices, expected {r}",
                    e.len()
                )));
            }
            if e.windows(2).any(|w| w[0] == w[1]) {
                return Err(Error::InvalidHypergraph(format!("edge {e:?} repeats a vertex")));
            }
            if let Some(&v) = e.last() {
                if v >= n {
                    return Err(Error::InvalidHypergraph(format!(
                        "vertex {v} out of range for n = {n}"
                    )));
                }
            }
            canon.push(e);
        }
        canon.sort();
        if canon.windows(2).any(|w| w[0] == w[1]) {
            return Err(Error::InvalidHypergraph("duplicate edge".into()));
        }
        Ok(Self { r, n, edges: canon })
    }

    /// Hypergraph with no edges.
    pub fn empty(r: usize, n: usize) -> Result<Self> {
        Self::new(r, n, Vec::new())
    }

    pub fn r(&self) -> usize {
        self.r
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn edges(&self) -> &[Vec<usize>] {
        &self.edges
    }

    pub fn edge_count(&self) -> usize {
        self.edges.len()
    }

    pub fn has_edge(&self, e: &[usize]) -> bool {
        let mut key = e.to_vec();
        key.sort_unstable();
        self.edges.binary_search(&key).is_ok()
    }

    /// Number of edges containing each vertex.
    pub fn degrees(&self) -> Vec<usize> {
        let mut deg = vec![0; self.n];
        for e in &self.edges {
            for &v in e {
                deg[v] += 1;
            }
        }
        deg
    }

    /// Applies the vertex relabeling `perm` (vertex `v` becomes `perm[v]`).
    pub fn relabel(&self, perm: &[usize]) -> Result<Self> {
        if perm.len() != self.n {
            return Err(Error::DimensionMismatch { expected: self.n, got: perm.len() });
        }
        let mut seen = vec![false; self.n];
        for &p in perm {
            if p >= self.n || std::mem::replace(&mut seen[p], true) {
                return Err(Error::InvalidArgument("relabeling is not a permutation".into()));
            }
        }
        let edges = self.edges.iter().map(|e| e.iter().map(|&v| perm[v]).collect()).collect();
        Self::new(self.r, self.n, edges)
    }

    /// Same vertex set with the given edges added (duplicates ignored).
    pub fn with_edges(&self, extra: &[Vec<usize>]) -> Result<Self> {
        let mut set: BTreeSet<Vec<usize>> = self.edges.iter().cloned().collect();
        for e in extra {
            let mut e = e.clone();
            e.sort_unstable();
            set.insert(e);
        }
        Self::new(self.r, self.n, set.into_iter().collect())
    }

    /// Sub-hypergraph on the same vertex set keeping the edges at `keep`.
    pub fn edge_subgraph(&self, keep: &[usize]) -> Result<Self> {
        let mut edges = Vec::with_capacity(keep.len());
        for &i in keep {
            let e = self.edges.get(i).ok_or_else(|| {
                Error::InvalidArgument(format!("edge index {i} out of range"))
            })?;
            edges.push(e.clone());
        }
        Self::new(self.r, self.n, edges)
    }

    /// Canonical edge list under vertex relabeling.
    ///
    /// Vertices are colored by iterated refinement of isomorphism-invariant
    /// signatures, then individualized one class at a time; the result is the
    /// lexicographically smallest relabeled edge list over all leaves. Two
    /// hypergraphs with the same `r` and `n` are isomorphic iff their canonical
    /// forms agree. Branches that differ by a transposition of twin vertices are
    /// skipped, so tents and blowups stay cheap; the worst case is still
    /// exponential.
    pub fn canonical_form(&self) -> Vec<Vec<usize>> {
        if self.n == 0 {
            return Vec::new();
        }
        let incident = self.incidence();
        let twins = self.twin_classes(&incident);
        let deg = self.degrees();
        let start = refine_colors(self, &incident, rank(&deg));
        let mut best: Option<Vec<Vec<usize>>> = None;
        self.search_leaves(&incident, &twins, start, &mut best);
        best.unwrap_or_default()
    }

    fn incidence(&self) -> Vec<Vec<usize>> {
        let mut incident = vec![Vec::new(); self.n];
        for (i, e) in self.edges.iter().enumerate() {
            for &v in e {
                incident[v].push(i);
            }
        }
        incident
    }

    /// `twins[v]` is the least vertex `u` such that swapping `u` and `v` is an automorphism.
    fn twin_classes(&self, incident: &[Vec<usize>]) -> Vec<usize> {
        let n = self.n;
        let mut twins: Vec<usize> = (0..n).collect();
        for v in 0..n {
            for u in 0..v {
                if twins[u] == u && self.swap_is_automorphism(u, v, incident) {
                    twins[v] = u;
                    break;
                }
            }
        }
        twins
    }

    fn swap_is_automorphism(&self, u: usize, v: usize, incident: &[Vec<usize>]) -> bool {
        if incident[u].len() != incident[v].len() {
            return false;
        }
        let swapped = |e: &Vec<usize>| {
            let mut m: Vec<usize> = e
                .iter()
                .map(|&x| if x == u { v } else if x == v { u } else { x })
                .collect();
            m.sort_unstable();
            m
        };
        incident[u].iter().all(|&i| self.has_edge(&swapped(&self.edges[i])))
    }

    /// Individualization-refinement: branch on the first non-singleton color
    /// class, one representative per twin class, and keep the smallest
    /// relabeled edge list over all discrete leaves.
    fn search_leaves(
        &self,
        incident: &[Vec<usize>],
        twins: &[usize],
        colors: Vec<usize>,
        best: &mut Option<Vec<Vec<usize>>>,
    ) {
        let n = self.n;
        let mut sizes = vec![0usize; n];
        for &c in &colors {
            sizes[c] += 1;
        }
        let target = (0..n).find(|&c| sizes[c] > 1);
        let Some(target) = target else {
            let mut edges: Vec<Vec<usize>> = self
                .edges
                .iter()
                .map(|e| {
                    let mut m: Vec<usize> = e.iter().map(|&v| colors[v]).collect();
                    m.sort_unstable();
                    m
                })
                .collect();
            edges.sort();
            if best.as_ref().is_none_or(|b| edges < *b) {
                *best = Some(edges);
            }
            return;
        };
        let mut tried: Vec<usize> = Vec::new();
        for v in 0..n {
            if colors[v] != target || tried.contains(&twins[v]) {
                continue;
            }
            tried.push(twins[v]);
            let keyed: Vec<(usize, bool)> = (0..n).map(|u| (colors[u], u != v)).collect();
            let next = refine_colors(self, incident, rank(&keyed));
            self.search_leaves(incident, twins, next, best);
        }
    }

    /// Isomorphism test through canonical forms.
    pub fn is_isomorphic(&self, other: &Hypergraph) -> bool {
        self.r == other.r
            && self.n == other.n
            && self.edges.len() == other.edges.len()
            && self.degree_profile() == other.degree_profile()
            && self.canonical_form() == other.canonical_form()
    }

    fn degree_profile(&self) -> Vec<usize> {
        let mut d = self.degrees();
        d.sort_unstable();
        d
    }

    /// Number of vertices lying in at least one edge.
    pub fn covered_vertices(&self) -> usize {
        self.degrees().iter().filter(|&&d| d > 0).count()
    }
}

fn refine_colors(h: &Hypergraph, incident: &[Vec<usize>], mut colors: Vec<usize>) -> Vec<usize> {
    let n = h.n;
    let count = |c: &[usize]| c.iter().copied().max().map_or(0, |m| m + 1);
    loop {
        let sigs: Vec<Vec<usize>> = (0..n)
            .map(|v| {
                let mut per_edge: Vec<Vec<usize>> = incident[v]
                    .iter()
                    .map(|&i| {
                        let mut c: Vec<usize> =
                            h.edges[i].iter().filter(|&&u| u != v).map(|&u| colors[u]).collect();
                        c.sort_unstable();
                        c
                    })
                    .collect();
                per_edge.sort();
                let mut sig = vec![colors[v], usize::MAX];
                for c in per_edge {
                    sig.extend(c);
                    sig.push(usize::MAX);
                }
                sig
            })
            .collect();
        let next = rank(&sigs);
        let done = count(&next) == count(&colors);
        colors = next;
        if done {
            return colors;
        }
    }
}

fn rank<T: Ord + Clone>(sigs: &[T]) -> Vec<usize> {
    let mut sorted: Vec<T> = sigs.to_vec();
    sorted.sort();
    sorted.dedup();
    sigs.iter().map(|s| sorted.binary_search(s).unwrap_or(0)).collect()
}

/// A simplicial complex given by its maximal edges, each of size at most `r`.
///
/// Every vertex must lie in some maximal edge (an isolated vertex is written
/// as a singleton maximal edge).
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(try_from = "RawPartial")]
pub struct PartialHypergraph {
    r: usize,
    n: usize,
    maximal_edges: Vec<Vec<usize>>,
}

#[derive(Deserialize)]
struct RawPartial {
    r: usize,
    n: usize,
    maximal_edges: Vec<Vec<usize>>,
}

impl TryFrom<RawPartial> for PartialHypergraph {
    type Error = Error;

    fn try_from(raw: RawPartial) -> Result<Self> {
        PartialHypergraph::new(raw.r, raw.n, raw.maximal_edges)
    }
}

impl PartialHypergraph {
    /// Builds a partial hypergraph from its maximal edges. Rejects edges that
    /// are empty, larger than `r`, contain one another, or leave a vertex
    /// uncovered.
    pub fn new(r: usize, n: usize, maximal_edges: Vec<Vec<usize>>) -> Result<Self> {
        if r < 1 {
            return Err(Error::InvalidHypergraph("partial hypergraph needs r >= 1".into()));
        }
        let mut edges = Vec::with_capacity(maximal_edges.len());
        for mut e in maximal_edges {
            e.sort_unstable();
            if e.is_empty() || e.len() > r {
                return Err(Error::InvalidHypergraph(format!(
                    "maximal edge {e:?} must have between 1 and {r} vertices"
                )));
            }
            if e.windows(2).any(|w| w[0] == w[1]) {
                return Err(Error::InvalidHypergraph(format!("edge {e:?} repeats a vertex")));
            }
            if e.iter().any(|&v| v >= n) {
                return Err(Error::InvalidHypergraph(format!("edge {e:?} out of range")));
            }
            edges.push(e);
        }
        edges.sort();
        edges.dedup();
        for (a, ea) in edges.iter().enumerate() {
            for (b, eb) in edges.iter().enumerate() {
                if a != b && is_subset(ea, eb) {
                    return Err(Error::InvalidHypergraph(format!(
                        "{ea:?} is contained in {eb:?}; maximal edges must form an antichain"
                    )));
                }
            }
        }
        let mut covered = vec![false; n];
        edges.iter().flatten().for_each(|&v| covered[v] = true);
        if let Some(v) = covered.iter().position(|c| !c) {
            return Err(Error::InvalidHypergraph(format!("vertex {v} lies in no maximal edge")));
        }
        Ok(Self { r, n, maximal_edges: edges })
    }

    /// Builds the complex generated by arbitrary edges, keeping only the
    /// maximal ones.
    pub fn generated_by(r: usize, n: usize, edges: Vec<Vec<usize>>) -> Result<Self> {
        let mut sorted: Vec<Vec<usize>> = edges
            .into_iter()
            .map(|mut e| {
                e.sort_unstable();
                e.dedup();
                e
            })
            .collect();
        sorted.sort();
        sorted.dedup();
        let maximal: Vec<Vec<usize>> = sorted
            .iter()
            .filter(|e| !sorted.iter().any(|f| f != *e && is_subset(e, f)))
            .cloned()
            .collect();
        Self::new(r, n, maximal)
    }

    pub fn r(&self) -> usize {
        self.r
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn maximal_edges(&self) -> &[Vec<usize>] {
        &self.maximal_edges
    }

    /// Whether `set` is a face of the complex.
    pub fn contains_face(&self, set: &[usize]) -> bool {
        let mut s = set.to_vec();
        s.sort_unstable();
        self.maximal_edges.iter().any(|e| is_subset(&s, e))
    }

    /// Pads every maximal edge to size `r` with fresh vertices, never sharing
    /// fresh vertices between edges.
    pub fn extend(&self) -> Hypergraph {
        let mut next = self.n;
        let edges: Vec<Vec<usize>> = self
            .maximal_edges
            .iter()
            .map(|e| {
                let mut padded = e.clone();
                for _ in e.len()..self.r {
                    padded.push(next);
                    next += 1;
                }
                padded
            })
            .collect();
        Hypergraph::new(self.r, next, edges).expect("padded edges form a valid r-graph")
    }
}

/// `a ⊆ b` for sorted slices.
pub(crate) fn is_subset(a: &[usize], b: &[usize]) -> bool {
    let mut j = 0;
    for &x in a {
        while j < b.len() && b[j] < x {
            j += 1;
        }
        if j == b.len() || b[j] != x {
            return false;
        }
        j += 1;
    }
    true
}

fn intersection_size(a: &[usize], b: &[usize]) -> usize {
    let (mut i, mut j, mut c) = (0, 0, 0);
    while i < a.len() && j < b.len() {
        match a[i].cmp(&b[j]) {
            std::cmp::Ordering::Less => i += 1,
            std::cmp::Ordering::Greater => j += 1,
            std::cmp::Ordering::Equal => {
                c += 1;
                i += 1;
                j += 1;
            }
        }
    }
    c
}

/// A partition `λ_1 >= ... >= λ_m >= 1` of `r` with `λ_1 < r`.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct TentSpec {
    lambda: Vec<usize>,
}

impl TentSpec {
    pub fn new(lambda: Vec<usize>) -> Result<Self> {
        if lambda.len() < 2 {
            return Err(Error::InvalidArgument("a tent partition needs at least two parts".into()));
        }
        if lambda.contains(&0) {
            return Err(Error::InvalidArgument("partition parts must be positive".into()));
        }
        if lambda.windows(2).any(|w| w[0] < w[1]) {
            return Err(Error::InvalidArgument("partition parts must be weakly decreasing".into()));
        }
        Ok(Self { lambda })
    }

    /// The partition `(r - k, 1, ..., 1)` with `k` trailing ones.
    pub fn hook(r: usize, k: usize) -> Result<Self> {
        if k == 0 || k >= r {
            return Err(Error::InvalidArgument(format!("hook (r - k, 1^k) needs 1 <= k < r, got k = {k}")));
        }
        let mut lambda = vec![r - k];
        lambda.extend(std::iter::repeat_n(1, k));
        Self::new(lambda)
    }

    pub fn parts(&self) -> &[usize] {
        &self.lambda
    }

    /// The uniformity `r = Σ λ_i`.
    pub fn r(&self) -> usize {
        self.lambda.iter().sum()
    }
}

/// A nonempty list of hypergraphs sharing the same uniformity.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Family {
    members: Vec<Hypergraph>,
}

impl Family {
    pub fn new(members: Vec<Hypergraph>) -> Result<Self> {
        let first = members
            .first()
            .ok_or_else(|| Error::InvalidArgument("family must be nonempty".into()))?;
        let r = first.r();
        if let Some(bad) = members.iter().find(|m| m.r() != r) {
            return Err(Error::UniformityMismatch { left: r, right: bad.r() });
        }
        Ok(Self { members })
    }

    pub fn members(&self) -> &[Hypergraph] {
        &self.members
    }

    pub fn r(&self) -> usize {
        self.members[0].r()
    }

    pub fn len(&self) -> usize {
        self.members.len()
    }

    pub fn is_empty(&self) -> bool {
        self.members.is_empty()
    }
}

fn check_tent_range(r: usize, i: usize) -> Result<()> {
    if r < 2 {
        return Err(Error::InvalidArgument(format!("uniformity {r} < 2")));
    }
    if i < 1 || i > r / 2 {
        return Err(Error::InvalidArgument(format!("tent index {i} outside [1, {}]", r / 2)));
    }
    Ok(())
}

/// The `(r - i, i)`-tent on `2r - 1` vertices.
///
/// Edges (0-indexed): the base `{0..r-1}`, `{0..i-1} ∪ {r..2r-i-2} ∪ {2r-2}` and
/// `{i..r-1} ∪ {2r-i-1..2r-2}`. The apex `2r - 2` is the only vertex shared by
/// the two non-base edges.
pub fn make_tent(r: usize, i: usize) -> Result<Hypergraph> {
    check_tent_range(r, i)?;
    let base: Vec<usize> = (0..r).collect();
    let left: Vec<usize> = (0..i).chain(r..2 * r - i - 1).chain(std::iter::once(2 * r - 2)).collect();
    let right: Vec<usize> = (i..r).chain(2 * r - i - 1..2 * r - 1).collect();
    Hypergraph::new(r, 2 * r - 1, vec![base, left, right])
}

/// The λ-tent: a base edge `e_0` split into blocks of sizes `λ_1, ..., λ_m`,
/// and for each block an edge containing the block, a common apex and fresh
/// vertices.
pub fn make_general_tent(spec: &TentSpec) -> Result<Hypergraph> {
    let r = spec.r();
    if r < 2 {
        return Err(Error::InvalidArgument("uniformity must be at least 2".into()));
    }
    if spec.parts()[0] >= r {
        return Err(Error::InvalidArgument("largest part must be < r".into()));
    }
    let apex = r;
    let mut next = r + 1;
    let mut start = 0;
    let mut edges = vec![(0..r).collect::<Vec<_>>()];
    for &part in spec.parts() {
        let mut e: Vec<usize> = (start..start + part).collect();
        start += part;
        e.push(apex);
        for _ in 0..(r - part - 1) {
            e.push(next);
            next += 1;
        }
        edges.push(e);
    }
    Hypergraph::new(r, next, edges)
}

/// The partial tent on `r + 1` vertices with maximal edges `{0..r-1}`,
/// `{0..i-1, r}` and `{i..r}`.
pub fn make_partial_tent(r: usize, i: usize) -> Result<PartialHypergraph> {
    check_tent_range(r, i)?;
    let base: Vec<usize> = (0..r).collect();
    let left: Vec<usize> = (0..i).chain(std::iter::once(r)).collect();
    let right: Vec<usize> = (i..=r).collect();
    PartialHypergraph::new(r, r + 1, vec![base, left, right])
}

/// Extension of a partial hypergraph (see [`PartialHypergraph::extend`]).
pub fn extend(f: &PartialHypergraph) -> Hypergraph {
    f.extend()
}

/// The balanced complete r-partite r-graph on `n` vertices; vertex `v` lies in
/// part `v mod r`.
pub fn make_turan_graph(r: usize, n: usize) -> Result<Hypergraph> {
    if r < 2 {
        return Err(Error::InvalidArgument(format!("uniformity {r} < 2")));
    }
    if n < r {
        return Err(Error::InvalidArgument(format!("need n >= r, got n = {n}, r = {r}")));
    }
    let parts: Vec<Vec<usize>> = (0..r).map(|p| (p..n).step_by(r).collect()).collect();
    let mut edges = Vec::new();
    let mut current = Vec::with_capacity(r);
    transversals(&parts, 0, &mut current, &mut edges);
    Hypergraph::new(r, n, edges)
}

fn transversals(parts: &[Vec<usize>], idx: usize, cur: &mut Vec<usize>, out: &mut Vec<Vec<usize>>) {
    if idx == parts.len() {
        out.push(cur.clone());
        return;
    }
    for &v in &parts[idx] {
        cur.push(v);
        transversals(parts, idx + 1, cur, out);
        cur.pop();
    }
}

/// `{Δ_(r-i,i) : 1 <= i <= k}`.
pub fn tent_family(r: usize, k: usize) -> Result<Family> {
    if r < 2 || k < 1 || k > r / 2 {
        return Err(Error::InvalidArgument(format!(
            "tent family needs r >= 2 and 1 <= k <= floor(r/2); got r = {r}, k = {k}"
        )));
    }
    Family::new((1..=k).map(|i| make_tent(r, i)).collect::<Result<Vec<_>>>()?)
}

/// Blowup replacing vertex `v` by `sizes[v]` clones. A set of clones is an
/// edge iff it projects bijectively onto an edge of `h`.
pub fn blowup(h: &Hypergraph, sizes: &[usize]) -> Result<Hypergraph> {
    if sizes.len() != h.n() {
        return Err(Error::DimensionMismatch { expected: h.n(), got: sizes.len() });
    }
    if sizes.contains(&0) {
        return Err(Error::InvalidArgument("blowup sizes must be positive".into()));
    }
    let mut offsets = Vec::with_capacity(sizes.len());
    let mut total = 0;
    for &s in sizes {
        offsets.push(total);
        total += s;
    }
    let mut edges = Vec::new();
    for e in h.edges() {
        let parts: Vec<Vec<usize>> =
            e.iter().map(|&v| (offsets[v]..offsets[v] + sizes[v]).collect()).collect();
        let mut cur = Vec::with_capacity(h.r());
        transversals(&parts, 0, &mut cur, &mut edges);
    }
    Hypergraph::new(h.r(), total, edges)
}

/// Every pair of distinct vertices lies in a common edge.
pub fn is_two_covered(h: &Hypergraph) -> bool {
    let n = h.n();
    let mut covered = vec![false; n * n];
    for e in h.edges() {
        for (a, &u) in e.iter().enumerate() {
            for &v in &e[a + 1..] {
                covered[u * n + v] = true;
            }
        }
    }
    (0..n).all(|u| (u + 1..n).all(|v| covered[u * n + v]))
}

/// All pairs of distinct edges meet in a number of vertices belonging to `l`.
pub fn is_l_intersecting(h: &Hypergraph, l: &BTreeSet<usize>) -> Result<bool> {
    if let Some(&bad) = l.iter().find(|&&s| s >= h.r()) {
        return Err(Error::InvalidArgument(format!("intersection size {bad} >= r = {}", h.r())));
    }
    let edges = h.edges();
    for (a, ea) in edges.iter().enumerate() {
        for eb in &edges[a + 1..] {
            if !l.contains(&intersection_size(ea, eb)) {
                return Ok(false);
            }
        }
    }
    Ok(true)
}

/// Whether `(A, B, C)` in these roles forms a member of `T_{r,k}`:
/// `A ⊆ B ∪ C`, `(B ∩ C) \ A ≠ ∅` and `|A ∩ B| >= r - k`.
pub fn is_t_rk_triple(a: &[usize], b: &[usize], c: &[usize], r: usize, k: usize) -> Result<bool> {
    for e in [a, b, c] {
        if e.len() != r {
            return Err(Error::DimensionMismatch { expected: r, got: e.len() });
        }
    }
    let sa: HashSet<usize> = a.iter().copied().collect();
    let sb: HashSet<usize> = b.iter().copied().collect();
    let sc: HashSet<usize> = c.iter().copied().collect();
    if sa.len() != r || sb.len() != r || sc.len() != r {
        return Err(Error::InvalidArgument("edges must consist of distinct vertices".into()));
    }
    if sa == sb || sb == sc || sa == sc {
        return Err(Error::InvalidArgument("the three edges must be pairwise distinct".into()));
    }
    let covered = sa.iter().all(|v| sb.contains(v) || sc.contains(v));
    let apex = sb.iter().any(|v| sc.contains(v) && !sa.contains(v));
    let overlap = sa.intersection(&sb).count();
    Ok(covered && apex && overlap + k >= r)
}

/// An ordered triple of distinct edge indices `(A, B, C)` of `h` forming a
/// member of `T_{r,k}`, if any.
pub fn find_t_rk_triple(h: &Hypergraph, k: usize) -> Option<(usize, usize, usize)> {
    let m = h.edge_count();
    let e = h.edges();
    for a in 0..m {
        for b in 0..m {
            if b == a {
                continue;
            }
            for c in 0..m {
                if c == a || c == b {
                    continue;
                }
                if is_t_rk_triple(&e[a], &e[b], &e[c], h.r(), k).unwrap_or(false) {
                    return Some((a, b, c));
                }
            }
        }
    }
    None
}

/// Random r-graph on `n` vertices where each r-set is an edge independently
/// with probability `p`.
pub fn random_hypergraph<R: Rng>(r: usize, n: usize, p: f64, rng: &mut R) -> Result<Hypergraph> {
    let mut edges = Vec::new();
    for s in k_subsets(n, r) {
        if rng.gen::<f64>() < p {
            edges.push(s);
        }
    }
    Hypergraph::new(r, n, edges)
}

/// Random r-graph on `n` vertices with exactly `m` distinct edges (capped at
/// the number of r-sets).
pub fn random_hypergraph_with_edges<R: Rng>(r: usize, n: usize, m: usize, rng: &mut R) -> Result<Hypergraph> {
    let mut all = k_subsets(n, r);
    let m = m.min(all.len());
    for i in 0..m {
        let j = rng.gen_range(i..all.len());
        all.swap(i, j);
    }
    all.truncate(m);
    Hypergraph::new(r, n, all)
}

/// All `k`-subsets of `0..n` in lexicographic order.
pub fn k_subsets(n: usize, k: usize) -> Vec<Vec<usize>> {
    let mut out = Vec::new();
    let mut cur = Vec::with_capacity(k);
    fn rec(start: usize, n: usize, k: usize, cur: &mut Vec<usize>, out: &mut Vec<Vec<usize>>) {
        if cur.len() == k {
            out.push(cur.clone());
            return;
        }
        let need = k - cur.len();
        for v in start..n {
            if n - v < need {
                break;
            }
            cur.push(v);
            rec(v + 1, n, k, cur, out);
            cur.pop();
        }
    }
    rec(0, n, k, &mut cur, &mut out);
    out
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    fn pair_intersections(h: &Hypergraph) -> Vec<usize> {
        let e = h.edges();
        let mut s = vec![
            intersection_size(&e[0], &e[1]),
            intersection_size(&e[0], &e[2]),
            intersection_size(&e[1], &e[2]),
        ];
        s.sort_unstable();
        s
    }

    #[test]
    fn triangle_is_the_2_uniform_tent() {
        let t = make_tent(2, 1).unwrap();
        assert_eq!(t.n(), 3);
        assert_eq!(t.edges(), &[vec![0, 1], vec![0, 2], vec![1, 2]]);
    }

    #[test]
    fn tent_4_2_matches_displayed_edges() {
        let t = make_tent(4, 2).unwrap();
        assert_eq!(t.n(), 7);
        assert_eq!(t.edges(), &[vec![0, 1, 2, 3], vec![0, 1, 4, 6], vec![2, 3, 5, 6]]);
    }

    #[test]
    fn tent_intersection_profile() {
        for r in 2..=10 {
            for i in 1..=r / 2 {
                let t = make_tent(r, i).unwrap();
                assert_eq!(t.n(), 2 * r - 1);
                let mut want = vec![1, i, r - i];
                want.sort_unstable();
                assert_eq!(pair_intersections(&t), want, "r={r} i={i}");
            }
        }
    }

    #[test]
    fn tent_range_errors() {
        assert!(make_tent(1, 1).is_err());
        assert!(make_tent(4, 0).is_err());
        assert!(make_tent(4, 3).is_err());
        assert!(make_partial_tent(5, 3).is_err());
    }

    #[test]
    fn general_tent_agrees_with_two_part_tents() {
        let tri = make_general_tent(&TentSpec::new(vec![1, 1]).unwrap()).unwrap();
        assert_eq!(tri.n(), 3);
        assert_eq!(tri.edge_count(), 3);
        for r in 2..=8 {
            for i in 1..=r / 2 {
                let g = make_general_tent(&TentSpec::new(vec![r - i, i]).unwrap()).unwrap();
                assert!(g.is_isomorphic(&make_tent(r, i).unwrap()), "r={r} i={i}");
            }
        }
        let t4 = make_tent(4, 1).unwrap();
        let g31 = make_general_tent(&TentSpec::new(vec![3, 1]).unwrap()).unwrap();
        assert!(t4.is_isomorphic(&g31));
    }

    #[test]
    fn general_tent_structure() {
        let spec = TentSpec::new(vec![1, 1, 1]).unwrap();
        let t = make_general_tent(&spec).unwrap();
        assert_eq!(t.edge_count(), 4);
        assert_eq!(t.n(), 1 + 3 * 2);
        assert!(TentSpec::new(vec![1, 2]).is_err());
        assert!(TentSpec::new(vec![3]).is_err());
        assert!(TentSpec::new(vec![2, 0]).is_err());
    }

    #[test]
    fn partial_tent_edge_sizes() {
        let p = make_partial_tent(8, 3).unwrap();
        let mut sizes: Vec<usize> = p.maximal_edges().iter().map(|e| e.len()).collect();
        sizes.sort_unstable();
        assert_eq!(sizes, vec![4, 6, 8]);
        let p2 = make_partial_tent(2, 1).unwrap();
        assert_eq!(p2.maximal_edges(), &[vec![0, 1], vec![0, 2], vec![1, 2]]);
        assert_eq!(p2.extend(), make_tent(2, 1).unwrap());
    }

    #[test]
    fn extension_of_partial_tent_is_tent() {
        for r in 2..=10 {
            for i in 1..=r / 2 {
                let ext = make_partial_tent(r, i).unwrap().extend();
                assert!(ext.is_isomorphic(&make_tent(r, i).unwrap()), "r={r} i={i}");
            }
        }
    }

    #[test]
    fn extension_examples() {
        let single = PartialHypergraph::new(3, 3, vec![vec![0, 1, 2]]).unwrap();
        let e = single.extend();
        assert_eq!((e.n(), e.edge_count()), (3, 1));
        let two = PartialHypergraph::new(3, 4, vec![vec![0, 1], vec![2, 3]]).unwrap();
        let e = two.extend();
        assert_eq!((e.n(), e.edge_count()), (6, 2));
        assert_eq!(e.edges(), &[vec![0, 1, 4], vec![2, 3, 5]]);
    }

    #[test]
    fn partial_hypergraph_validation() {
        assert!(PartialHypergraph::new(3, 3, vec![vec![0, 1], vec![0, 1, 2]]).is_err());
        assert!(PartialHypergraph::new(2, 3, vec![vec![0, 1, 2]]).is_err());
        assert!(PartialHypergraph::new(3, 4, vec![vec![0, 1, 2]]).is_err());
        let g = PartialHypergraph::generated_by(3, 3, vec![vec![0, 1], vec![0, 1, 2], vec![2]]).unwrap();
        assert_eq!(g.maximal_edges(), &[vec![0, 1, 2]]);
        assert!(g.contains_face(&[2, 0]));
    }

    #[test]
    fn turan_graph_counts() {
        assert_eq!(make_turan_graph(3, 6).unwrap().edge_count(), 8);
        assert_eq!(make_turan_graph(2, 5).unwrap().edge_count(), 6);
        assert_eq!(make_turan_graph(4, 9).unwrap().edge_count(), 24);
        assert!(make_turan_graph(4, 3).is_err());
    }

    #[test]
    fn turan_graph_is_maximal_r_partite() {
        // adding any non-edge would put two vertices of one part in an edge
        let t = make_turan_graph(3, 7).unwrap();
        for s in k_subsets(7, 3) {
            if !t.has_edge(&s) {
                let parts: BTreeSet<usize> = s.iter().map(|v| v % 3).collect();
                assert!(parts.len() < 3);
            }
        }
    }

    #[test]
    fn tent_family_sizes() {
        let f = tent_family(4, 2).unwrap();
        assert_eq!(f.len(), 2);
        assert_eq!(f.members()[0], make_tent(4, 1).unwrap());
        assert_eq!(tent_family(9, 4).unwrap().len(), 4);
        assert_eq!(tent_family(2, 1).unwrap().members()[0], make_tent(2, 1).unwrap());
        assert!(tent_family(4, 3).is_err());
    }

    #[test]
    fn blowup_examples() {
        let edge = Hypergraph::new(2, 2, vec![vec![0, 1]]).unwrap();
        let k22 = blowup(&edge, &[2, 2]).unwrap();
        assert_eq!((k22.n(), k22.edge_count()), (4, 4));
        let t = make_tent(4, 2).unwrap();
        assert!(blowup(&t, &vec![1; t.n()]).unwrap().is_isomorphic(&t));
        for r in 2..=4 {
            let single = Hypergraph::new(r, r, vec![(0..r).collect()]).unwrap();
            for size in 1..=3 {
                let b = blowup(&single, &vec![size; r]).unwrap();
                assert_eq!(b.edge_count(), size.pow(r as u32));
            }
        }
        assert!(blowup(&edge, &[1]).is_err());
        assert!(blowup(&edge, &[1, 0]).is_err());
    }

    #[test]
    fn two_covered_examples() {
        let single = Hypergraph::new(4, 4, vec![vec![0, 1, 2, 3]]).unwrap();
        assert!(is_two_covered(&single));
        assert!(!is_two_covered(&make_tent(4, 1).unwrap()));
        assert!(!is_two_covered(&make_turan_graph(3, 6).unwrap()));
    }

    #[test]
    fn l_intersecting_examples() {
        let single = Hypergraph::new(3, 3, vec![vec![0, 1, 2]]).unwrap();
        assert!(is_l_intersecting(&single, &BTreeSet::new()).unwrap());
        let c4 = make_turan_graph(2, 4).unwrap();
        assert!(!is_l_intersecting(&c4, &BTreeSet::from([0])).unwrap());
        let matching = Hypergraph::new(2, 6, vec![vec![0, 1], vec![2, 3], vec![4, 5]]).unwrap();
        assert!(is_l_intersecting(&matching, &BTreeSet::from([0])).unwrap());
        assert!(is_l_intersecting(&matching, &BTreeSet::from([2])).is_err());
    }

    #[test]
    fn t_rk_triples_in_tents() {
        for r in 2..=8 {
            for i in 1..=r / 2 {
                let t = make_tent(r, i).unwrap();
                let e = t.edges();
                // base edge is {0..r-1}, which sorts first
                let base = &e[0];
                for k in 1..=r / 2 {
                    let any_role = [(1, 2), (2, 1)]
                        .iter()
                        .any(|&(b, c)| is_t_rk_triple(base, &e[b], &e[c], r, k).unwrap());
                    assert_eq!(any_role, i <= k, "r={r} i={i} k={k}");
                    if i > k {
                        let perms = [(0, 1, 2), (0, 2, 1), (1, 0, 2), (1, 2, 0), (2, 0, 1), (2, 1, 0)];
                        for (a, b, c) in perms {
                            assert!(!is_t_rk_triple(&e[a], &e[b], &e[c], r, k).unwrap());
                        }
                        assert_eq!(find_t_rk_triple(&t, k), None);
                    } else {
                        assert!(find_t_rk_triple(&t, k).is_some());
                    }
                }
            }
        }
        let disjoint = [vec![0, 1, 2], vec![3, 4, 5], vec![6, 7, 8]];
        assert!(!is_t_rk_triple(&disjoint[0], &disjoint[1], &disjoint[2], 3, 1).unwrap());
        assert!(is_t_rk_triple(&[0, 1], &[0, 1, 2], &[0, 2], 2, 1).is_err());
    }

    #[test]
    fn t_rk_triple_relabel_invariance() {
        let mut rng = ChaCha8Rng::seed_from_u64(7);
        for _ in 0..30 {
            let h = random_hypergraph_with_edges(3, 7, 4, &mut rng).unwrap();
            let mut perm: Vec<usize> = (0..7).collect();
            for i in (1..7).rev() {
                let j = rng.gen_range(0..=i);
                perm.swap(i, j);
            }
            let g = h.relabel(&perm).unwrap();
            for k in 1..=1 {
                assert_eq!(find_t_rk_triple(&h, k).is_some(), find_t_rk_triple(&g, k).is_some());
            }
            let e = h.edges();
            if e.len() >= 3 {
                let map = |x: &Vec<usize>| x.iter().map(|&v| perm[v]).collect::<Vec<_>>();
                assert_eq!(
                    is_t_rk_triple(&e[0], &e[1], &e[2], 3, 1).unwrap(),
                    is_t_rk_triple(&map(&e[0]), &map(&e[1]), &map(&e[2]), 3, 1).unwrap()
                );
            }
        }
    }

    #[test]
    fn blowups_preserve_t_rk_freeness() {
        let mut rng = ChaCha8Rng::seed_from_u64(11);
        let mut tested = 0;
        for trial in 0..200 {
            let r = 2 + trial % 3;
            let n = r + 1 + rng.gen_range(0..3);
            let m = rng.gen_range(1..=5);
            let h = random_hypergraph_with_edges(r, n, m, &mut rng).unwrap();
            let k = r / 2;
            if find_t_rk_triple(&h, k).is_some() {
                continue;
            }
            tested += 1;
            let sizes: Vec<usize> = (0..n).map(|_| rng.gen_range(1..=3)).collect();
            let b = blowup(&h, &sizes).unwrap();
            if b.edge_count() <= 40 {
                assert_eq!(find_t_rk_triple(&b, k), None, "{h:?} {sizes:?}");
            }
        }
        assert!(tested > 20);
    }

    #[test]
    fn canonical_form_detects_isomorphism() {
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        for _ in 0..40 {
            let h = random_hypergraph(2, 7, 0.4, &mut rng).unwrap();
            let mut perm: Vec<usize> = (0..7).collect();
            for i in (1..7).rev() {
                let j = rng.gen_range(0..=i);
                perm.swap(i, j);
            }
            assert!(h.is_isomorphic(&h.relabel(&perm).unwrap()));
        }
        let path = Hypergraph::new(2, 4, vec![vec![0, 1], vec![1, 2], vec![2, 3]]).unwrap();
        let star = Hypergraph::new(2, 4, vec![vec![0, 1], vec![0, 2], vec![0, 3]]).unwrap();
        assert!(!path.is_isomorphic(&star));
        let c6 = Hypergraph::new(2, 6, (0..6).map(|i| vec![i, (i + 1) % 6]).collect()).unwrap();
        let two_triangles =
            Hypergraph::new(2, 6, vec![vec![0, 1], vec![1, 2], vec![0, 2], vec![3, 4], vec![4, 5], vec![3, 5]])
                .unwrap();
        assert!(!c6.is_isomorphic(&two_triangles));
    }

    #[test]
    fn hypergraph_validation() {
        assert!(Hypergraph::new(2, 3, vec![vec![0, 0]]).is_err());
        assert!(Hypergraph::new(2, 3, vec![vec![0, 3]]).is_err());
        assert!(Hypergraph::new(2, 3, vec![vec![0, 1], vec![1, 0]]).is_err());
        assert!(Hypergraph::new(3, 3, vec![vec![0, 1]]).is_err());
        assert!(Hypergraph::new(1, 3, vec![]).is_err());
        let h = Hypergraph::new(2, 3, vec![vec![2, 1], vec![1, 0]]).unwrap();
        assert_eq!(h.edges(), &[vec![0, 1], vec![1, 2]]);
    }
}
