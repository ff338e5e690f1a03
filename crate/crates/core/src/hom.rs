//! Homomorphism search between small hypergraphs.
//!
//! All searches share one backtracking engine. The pattern is described by a
//! list of vertex blocks (edges of `F`, or maximal edges of a partial `F`); a
//! map is valid when it is injective on every block and sends every block into
//! some edge of the host. For an r-uniform pattern and an r-uniform host that
//! is exactly a homomorphism. The subgraph variant additionally demands global
//! injectivity.

use std::collections::HashSet;
use std::time::{Duration, Instant};

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::hypergraph::{k_subsets, Family, Hypergraph, PartialHypergraph};

/// Limits for exhaustive search.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SearchBudget {
    pub max_nodes: u64,
    pub timeout: Duration,
}

impl Default for SearchBudget {
    fn default() -> Self {
        Self { max_nodes: 10_000_000, timeout: Duration::from_secs(60) }
    }
}

impl SearchBudget {
    pub fn new(max_nodes: u64, timeout: Duration) -> Result<Self> {
        if max_nodes == 0 || timeout.is_zero() {
            return Err(Error::InvalidArgument("search budget must be positive".into()));
        }
        Ok(Self { max_nodes, timeout })
    }
}

/// A total map `V(F) -> V(H)`; `map[v]` is the image of `v`.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct VertexMap {
    pub map: Vec<usize>,
}

impl VertexMap {
    /// Image of a vertex set.
    pub fn image(&self, set: &[usize]) -> Vec<usize> {
        set.iter().map(|&v| self.map[v]).collect()
    }

    /// `other ∘ self`.
    pub fn then(&self, other: &VertexMap) -> VertexMap {
        VertexMap { map: self.map.iter().map(|&v| other.map[v]).collect() }
    }

    /// Whether this is a homomorphism `f -> h`.
    pub fn is_homomorphism(&self, f: &Hypergraph, h: &Hypergraph) -> bool {
        self.map.len() == f.n()
            && self.map.iter().all(|&v| v < h.n())
            && f.edges().iter().all(|e| h.has_edge(&self.image(e)) && distinct(&self.image(e)))
    }

    /// Whether this is a homomorphism from the partial hypergraph `f` to `h`.
    pub fn is_partial_homomorphism(&self, f: &PartialHypergraph, h: &Hypergraph) -> bool {
        if self.map.len() != f.n() || self.map.iter().any(|&v| v >= h.n()) {
            return false;
        }
        let shadow = Shadow::new(h);
        f.maximal_edges().iter().all(|e| {
            let img = self.image(e);
            distinct(&img) && shadow.contains(&img)
        })
    }
}

fn distinct(v: &[usize]) -> bool {
    let mut s = v.to_vec();
    s.sort_unstable();
    s.windows(2).all(|w| w[0] != w[1])
}

/// All subsets of host edges, as sorted vectors.
struct Shadow {
    sets: HashSet<Vec<usize>>,
}

impl Shadow {
    fn new(h: &Hypergraph) -> Self {
        let mut sets = HashSet::new();
        for e in h.edges() {
            let r = e.len();
            for mask in 1u64..(1u64 << r) {
                let sub: Vec<usize> = (0..r).filter(|&b| mask >> b & 1 == 1).map(|b| e[b]).collect();
                sets.insert(sub);
            }
        }
        Self { sets }
    }

    fn contains(&self, set: &[usize]) -> bool {
        let mut s = set.to_vec();
        s.sort_unstable();
        self.sets.contains(&s)
    }
}

struct Search<'a> {
    n_pattern: usize,
    blocks: Vec<Vec<usize>>,
    blocks_of: Vec<Vec<usize>>,
    /// Vertices lying in a single block; in the non-injective search they are
    /// filled in after the others instead of branched on.
    deferred: Vec<bool>,
    /// Pattern vertices with identical block sets, as sorted classes. Swapping
    /// the images of two such vertices preserves a solution, so images are
    /// required to increase along each class.
    twin_class: Vec<Vec<usize>>,
    host_n: usize,
    host_edges: Vec<Vec<usize>>,
    shadow: &'a Shadow,
    injective: bool,
    budget: SearchBudget,
    nodes: u64,
    started: Instant,
}

impl<'a> Search<'a> {
    fn new(
        n_pattern: usize,
        blocks: Vec<Vec<usize>>,
        host: &Hypergraph,
        shadow: &'a Shadow,
        injective: bool,
        budget: SearchBudget,
    ) -> Self {
        let mut blocks_of = vec![Vec::new(); n_pattern];
        for (b, blk) in blocks.iter().enumerate() {
            for &v in blk {
                blocks_of[v].push(b);
            }
        }
        let deferred = (0..n_pattern).map(|v| !injective && blocks_of[v].len() == 1).collect();
        let mut twin_class = vec![Vec::new(); n_pattern];
        for v in 0..n_pattern {
            if blocks_of[v].is_empty() {
                twin_class[v] = vec![v];
                continue;
            }
            twin_class[v] = (0..n_pattern).filter(|&u| blocks_of[u] == blocks_of[v]).collect();
        }
        Self {
            n_pattern,
            blocks,
            blocks_of,
            deferred,
            twin_class,
            host_n: host.n(),
            host_edges: host.edges().to_vec(),
            shadow,
            injective,
            budget,
            nodes: 0,
            started: Instant::now(),
        }
    }

    fn run(&mut self) -> Result<Option<VertexMap>> {
        if self.n_pattern == 0 {
            return Ok(Some(VertexMap { map: Vec::new() }));
        }
        if self.host_n == 0 {
            return Ok(None);
        }
        let covered: Vec<usize> = (0..self.host_n).filter(|&w| self.shadow.contains(&[w])).collect();
        let domains: Vec<Vec<usize>> = (0..self.n_pattern)
            .map(|v| if self.blocks_of[v].is_empty() { (0..self.host_n).collect() } else { covered.clone() })
            .collect();
        let mut assign = vec![usize::MAX; self.n_pattern];
        let mut used = vec![false; self.host_n];
        if self.extend(&domains, &mut assign, &mut used)? {
            Ok(Some(VertexMap { map: assign }))
        } else {
            Ok(None)
        }
    }

    fn tick(&mut self) -> Result<()> {
        self.nodes += 1;
        if self.nodes > self.budget.max_nodes
            || (self.nodes.is_multiple_of(4096) && self.started.elapsed() > self.budget.timeout)
        {
            return Err(Error::BudgetExhausted { nodes: self.nodes });
        }
        Ok(())
    }

    fn block_image(&self, b: usize, assign: &[usize]) -> Vec<usize> {
        self.blocks[b].iter().filter(|&&u| assign[u] != usize::MAX).map(|&u| assign[u]).collect()
    }

    /// Places every deferred vertex on the free slots of a host edge covering
    /// the image of the rest of its block.
    fn fill_deferred(&self, assign: &mut [usize]) -> bool {
        for b in 0..self.blocks.len() {
            let open: Vec<usize> =
                self.blocks[b].iter().copied().filter(|&u| assign[u] == usize::MAX).collect();
            if open.is_empty() {
                continue;
            }
            let img = self.block_image(b, assign);
            let Some(e) = self.host_edges.iter().find(|e| img.iter().all(|x| e.contains(x))) else {
                return false;
            };
            let free: Vec<usize> = e.iter().copied().filter(|x| !img.contains(x)).collect();
            if free.len() < open.len() {
                return false;
            }
            for (u, w) in open.into_iter().zip(free) {
                assign[u] = w;
            }
        }
        true
    }

    /// Backtracking with forward checking: the unassigned vertex with the
    /// fewest remaining candidates is branched on next, and every assignment
    /// prunes the candidates of its block-mates.
    fn extend(&mut self, domains: &[Vec<usize>], assign: &mut Vec<usize>, used: &mut Vec<bool>) -> Result<bool> {
        let next = (0..self.n_pattern)
            .filter(|&v| assign[v] == usize::MAX && !self.deferred[v])
            .min_by_key(|&v| (domains[v].len(), std::cmp::Reverse(self.blocks_of[v].len()), v));
        let Some(v) = next else {
            let snapshot = assign.clone();
            if self.fill_deferred(assign) {
                return Ok(true);
            }
            *assign = snapshot;
            return Ok(false);
        };
        for &w in &domains[v] {
            if self.injective && used[w] {
                continue;
            }
            self.tick()?;
            assign[v] = w;
            if let Some(pruned) = self.propagate(v, domains, assign, used) {
                used[w] = true;
                if self.extend(&pruned, assign, used)? {
                    return Ok(true);
                }
                used[w] = false;
            }
            assign[v] = usize::MAX;
        }
        Ok(false)
    }

    fn propagate(&self, v: usize, domains: &[Vec<usize>], assign: &[usize], used: &[bool]) -> Option<Vec<Vec<usize>>> {
        let w = assign[v];
        let mut next = domains.to_vec();
        for &b in &self.blocks_of[v] {
            let img = self.block_image(b, assign);
            for &u in &self.blocks[b] {
                if assign[u] != usize::MAX || self.deferred[u] {
                    continue;
                }
                next[u].retain(|&x| {
                    if img.contains(&x) {
                        return false;
                    }
                    let mut ext = img.clone();
                    ext.push(x);
                    self.shadow.contains(&ext)
                });
                if next[u].is_empty() {
                    return None;
                }
            }
        }
        for &u in &self.twin_class[v] {
            if u == v || assign[u] != usize::MAX || self.deferred[u] {
                continue;
            }
            next[u].retain(|&x| if u < v { x < w } else { x > w });
            if next[u].is_empty() {
                return None;
            }
        }
        if self.injective {
            for u in 0..self.n_pattern {
                if assign[u] == usize::MAX && u != v {
                    next[u].retain(|&x| x != w && !used[x]);
                    if next[u].is_empty() {
                        return None;
                    }
                }
            }
        }
        Some(next)
    }
}

fn check_uniform(f: usize, h: usize) -> Result<()> {
    if f != h {
        return Err(Error::UniformityMismatch { left: f, right: h });
    }
    Ok(())
}

/// A homomorphism `f -> h`, `None` when none exists. Running out of budget is
/// reported as [`Error::BudgetExhausted`], never as `None`.
pub fn find_homomorphism(f: &Hypergraph, h: &Hypergraph, budget: &SearchBudget) -> Result<Option<VertexMap>> {
    check_uniform(f.r(), h.r())?;
    let shadow = Shadow::new(h);
    Search::new(f.n(), f.edges().to_vec(), h, &shadow, false, *budget).run()
}

/// A homomorphism from a partial hypergraph: injective on every maximal edge,
/// with each maximal edge mapped into some edge of `h`.
pub fn find_partial_homomorphism(
    f: &PartialHypergraph,
    h: &Hypergraph,
    budget: &SearchBudget,
) -> Result<Option<VertexMap>> {
    if f.r() > h.r() {
        return Err(Error::UniformityMismatch { left: f.r(), right: h.r() });
    }
    let shadow = Shadow::new(h);
    Search::new(f.n(), f.maximal_edges().to_vec(), h, &shadow, false, *budget).run()
}

/// An injective homomorphism, i.e. a copy of `f` as a subgraph of `h`.
pub fn find_subgraph_embedding(f: &Hypergraph, h: &Hypergraph, budget: &SearchBudget) -> Result<Option<VertexMap>> {
    check_uniform(f.r(), h.r())?;
    if f.n() > h.n() || f.edge_count() > h.edge_count() {
        return Ok(None);
    }
    let shadow = Shadow::new(h);
    Search::new(f.n(), f.edges().to_vec(), h, &shadow, true, *budget).run()
}

/// No member of `family` maps homomorphically into `h`.
pub fn is_hom_free(h: &Hypergraph, family: &Family, budget: &SearchBudget) -> Result<bool> {
    check_uniform(family.r(), h.r())?;
    for f in family.members() {
        if find_homomorphism(f, h, budget)?.is_some() {
            return Ok(false);
        }
    }
    Ok(true)
}

/// No member of `family` is a subgraph of `h`.
pub fn is_free(h: &Hypergraph, family: &Family, budget: &SearchBudget) -> Result<bool> {
    check_uniform(family.r(), h.r())?;
    for f in family.members() {
        if find_subgraph_embedding(f, h, budget)?.is_some() {
            return Ok(false);
        }
    }
    Ok(true)
}

/// Checks that a homomorphism from `f` exists exactly when one from its
/// extension does.
pub fn verify_extension_equivalence(f: &PartialHypergraph, h: &Hypergraph, budget: &SearchBudget) -> Result<bool> {
    check_uniform(f.r(), h.r())?;
    let partial = find_partial_homomorphism(f, h, budget)?;
    let full = find_homomorphism(&f.extend(), h, budget)?;
    if let Some(m) = &partial {
        debug_assert!(m.is_partial_homomorphism(f, h));
    }
    if let Some(m) = &full {
        debug_assert!(m.is_homomorphism(&f.extend(), h));
    }
    Ok(partial.is_some() == full.is_some())
}

/// Outcome of [`brute_force_ex`].
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct TuranSearch {
    pub n: usize,
    pub ex: usize,
    /// All extremal hypergraphs, one per isomorphism class, in canonical labeling.
    pub extremal: Vec<Hypergraph>,
    /// Number of isomorphism classes of family-free hypergraphs visited.
    pub classes_visited: usize,
}

/// Exact Turán number `ex(n, family)` (subgraph containment) with all
/// extremal hypergraphs up to isomorphism.
///
/// Isomorphism classes of family-free hypergraphs are generated level by level
/// in the number of edges: every class with `m + 1` edges arises from a class
/// with `m` edges by adding one edge, because freeness is inherited by
/// subgraphs. Each level is deduplicated by canonical form. Only tiny instances
/// are accepted: `n <= 8` for graphs and `n <= r + 3` otherwise.
pub fn brute_force_ex(n: usize, family: &Family, budget: &SearchBudget) -> Result<TuranSearch> {
    let r = family.r();
    let cap = if r == 2 { 8 } else { r + 3 };
    if n > cap {
        return Err(Error::InstanceTooLarge(format!("n = {n} exceeds {cap} for r = {r}")));
    }
    if n < r {
        return Err(Error::InvalidArgument(format!("need n >= r, got n = {n}, r = {r}")));
    }
    let started = Instant::now();
    let mut work: u64 = 0;
    let candidates = k_subsets(n, r);
    let mut level: Vec<Hypergraph> = vec![Hypergraph::empty(r, n)?];
    let mut visited = 1;
    loop {
        let mut seen: HashSet<Vec<Vec<usize>>> = HashSet::new();
        let mut next: Vec<Hypergraph> = Vec::new();
        for g in &level {
            for c in &candidates {
                if g.has_edge(c) {
                    continue;
                }
                work += 1;
                if work > budget.max_nodes || started.elapsed() > budget.timeout {
                    return Err(Error::BudgetExhausted { nodes: work });
                }
                let cand = g.with_edges(std::slice::from_ref(c))?;
                let canon = cand.canonical_form();
                if seen.contains(&canon) {
                    continue;
                }
                if is_free(&cand, family, budget)? {
                    seen.insert(canon.clone());
                    next.push(Hypergraph::new(r, n, canon)?);
                } else {
                    seen.insert(canon);
                }
            }
        }
        if next.is_empty() {
            let ex = level[0].edge_count();
            let mut extremal = level;
            extremal.sort_by(|a, b| a.edges().cmp(b.edges()));
            return Ok(TuranSearch { n, ex, extremal, classes_visited: visited });
        }
        visited += next.len();
        level = next;
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::hypergraph::{make_general_tent, make_partial_tent, make_tent, make_turan_graph, tent_family, TentSpec};

    fn budget() -> SearchBudget {
        SearchBudget::default()
    }

    fn single_edge(r: usize) -> Hypergraph {
        Hypergraph::new(r, r, vec![(0..r).collect()]).unwrap()
    }

    #[test]
    fn triangle_maps_to_itself() {
        let k3 = make_tent(2, 1).unwrap();
        let m = find_homomorphism(&k3, &k3, &budget()).unwrap().unwrap();
        assert!(m.is_homomorphism(&k3, &k3));
    }

    #[test]
    fn tents_do_not_map_into_a_single_edge() {
        for r in 2..=7 {
            let fam = tent_family(r, r / 2).unwrap();
            for f in fam.members() {
                assert!(find_homomorphism(f, &single_edge(r), &budget()).unwrap().is_none());
            }
            assert!(is_hom_free(&single_edge(r), &fam, &budget()).unwrap());
        }
    }

    #[test]
    fn hook_tent_maps_into_each_small_tent() {
        for r in 4..=8 {
            for k in 1..=r / 2 {
                let hook = make_general_tent(&TentSpec::hook(r, k).unwrap()).unwrap();
                for i in 1..=k {
                    let t = make_tent(r, i).unwrap();
                    let m = find_homomorphism(&hook, &t, &budget()).unwrap();
                    assert!(m.unwrap().is_homomorphism(&hook, &t), "r={r} k={k} i={i}");
                }
            }
        }
    }

    #[test]
    fn all_ones_tent_maps_into_3_uniform_tent() {
        let t = make_general_tent(&TentSpec::new(vec![1, 1, 1]).unwrap()).unwrap();
        for f in tent_family(3, 1).unwrap().members() {
            assert!(find_homomorphism(&t, f, &budget()).unwrap().is_some());
        }
    }

    #[test]
    fn partial_hom_examples() {
        for r in 2..=7 {
            let whole = PartialHypergraph::new(r, r, vec![(0..r).collect()]).unwrap();
            let m = find_partial_homomorphism(&whole, &single_edge(r), &budget()).unwrap().unwrap();
            let mut img = m.map.clone();
            img.sort_unstable();
            assert_eq!(img, (0..r).collect::<Vec<_>>());
            for i in 1..=r / 2 {
                let p = make_partial_tent(r, i).unwrap();
                assert!(find_partial_homomorphism(&p, &single_edge(r), &budget()).unwrap().is_none());
                let t = make_tent(r, i).unwrap();
                let m = find_partial_homomorphism(&p, &t, &budget()).unwrap().unwrap();
                assert!(m.is_partial_homomorphism(&p, &t));
            }
        }
    }

    #[test]
    fn hom_free_examples() {
        let t = make_tent(4, 1).unwrap();
        let fam = Family::new(vec![t.clone()]).unwrap();
        assert!(!is_hom_free(&t, &fam, &budget()).unwrap());
        for r in 2..=5 {
            let host = make_turan_graph(r, 2 * r).unwrap();
            assert!(is_hom_free(&host, &tent_family(r, r / 2).unwrap(), &budget()).unwrap(), "r={r}");
        }
    }

    #[test]
    fn extension_equivalence_examples() {
        let p = make_partial_tent(4, 2).unwrap();
        assert!(verify_extension_equivalence(&p, &make_tent(4, 2).unwrap(), &budget()).unwrap());
        let whole = PartialHypergraph::new(3, 3, vec![vec![0, 1, 2]]).unwrap();
        let host = make_turan_graph(3, 5).unwrap();
        assert!(verify_extension_equivalence(&whole, &host, &budget()).unwrap());
    }

    #[test]
    fn composition_of_homomorphisms() {
        let k3 = make_tent(2, 1).unwrap();
        let k4 = Hypergraph::new(2, 4, crate::hypergraph::k_subsets(4, 2)).unwrap();
        let c5 = Hypergraph::new(2, 5, (0..5).map(|i| vec![i, (i + 1) % 5]).collect()).unwrap();
        let f = find_homomorphism(&c5, &k3, &budget()).unwrap().unwrap();
        let g = find_homomorphism(&k3, &k4, &budget()).unwrap().unwrap();
        assert!(f.then(&g).is_homomorphism(&c5, &k4));
    }

    #[test]
    fn budget_exhaustion_is_an_error() {
        let tiny = SearchBudget::new(3, Duration::from_secs(10)).unwrap();
        let t = make_tent(5, 2).unwrap();
        let host = make_turan_graph(5, 10).unwrap();
        assert!(matches!(find_homomorphism(&t, &host, &tiny), Err(Error::BudgetExhausted { .. })));
        assert!(SearchBudget::new(0, Duration::from_secs(1)).is_err());
    }

    #[test]
    fn uniformity_mismatch() {
        assert!(find_homomorphism(&single_edge(3), &single_edge(2), &budget()).is_err());
    }

    #[test]
    fn mantel_small() {
        let k3 = tent_family(2, 1).unwrap();
        let s = brute_force_ex(5, &k3, &budget()).unwrap();
        assert_eq!(s.ex, 6);
        assert_eq!(s.extremal.len(), 1);
        assert!(s.extremal[0].is_isomorphic(&make_turan_graph(2, 5).unwrap()));
    }

    #[test]
    fn exact_turan_at_n_equals_r() {
        for r in 3..=5 {
            let s = brute_force_ex(r, &tent_family(r, 1).unwrap(), &budget()).unwrap();
            assert_eq!(s.ex, 1);
            assert_eq!(s.extremal.len(), 1);
        }
    }

    #[test]
    fn exact_turan_guards() {
        let k3 = tent_family(2, 1).unwrap();
        assert!(matches!(brute_force_ex(9, &k3, &budget()), Err(Error::InstanceTooLarge(_))));
        assert!(brute_force_ex(1, &k3, &budget()).is_err());
    }

    fn exhaustive(f: &Hypergraph, h: &Hypergraph, injective: bool) -> bool {
        let (n, m) = (f.n(), h.n());
        let total = m.pow(n as u32);
        (0..total).any(|code| {
            let mut c = code;
            let map: Vec<usize> = (0..n)
                .map(|_| {
                    let d = c % m;
                    c /= m;
                    d
                })
                .collect();
            let vm = VertexMap { map };
            vm.is_homomorphism(f, h) && (!injective || distinct(&vm.map))
        })
    }

    proptest::proptest! {
        #![proptest_config(proptest::prelude::ProptestConfig::with_cases(60))]
        #[test]
        fn search_agrees_with_exhaustive_enumeration(seed in 0u64..10_000, r in 2usize..=3) {
            use rand::SeedableRng;
            let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(seed);
            let f = crate::hypergraph::random_hypergraph(r, r + 2, 0.5, &mut rng).unwrap();
            let h = crate::hypergraph::random_hypergraph(r, r + 3, 0.4, &mut rng).unwrap();
            let hom = find_homomorphism(&f, &h, &budget()).unwrap();
            proptest::prop_assert_eq!(hom.is_some(), exhaustive(&f, &h, false));
            if let Some(m) = hom {
                proptest::prop_assert!(m.is_homomorphism(&f, &h));
            }
            let emb = find_subgraph_embedding(&f, &h, &budget()).unwrap();
            proptest::prop_assert_eq!(emb.is_some(), exhaustive(&f, &h, true));
        }
    }
}
