//! Hypergraph Lagrangians and blowup densities.
//!
//! The Lagrangian of an r-graph `H` is the maximum of the edge polynomial
//! `P(x) = Σ_e ∏_{v∈e} x_v` over the probability simplex on `V(H)`; the blowup
//! density is `r! · L(H)`. The maximum is searched by multistart replicator
//! ascent. Small instances are cross-checked against a grid oracle.

use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::{One, Zero};
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::exact;
use crate::hom::{find_homomorphism, is_hom_free, SearchBudget};
use crate::hypergraph::{Family, Hypergraph};
use crate::rng;

const STALL_WINDOW: usize = 50;
const MAX_ITERATIONS: usize = 10_000;
const RESIDUAL_TOL: f64 = 1e-8;
const GRID_MAX_VERTICES: usize = 12;
const GRID_MAX_STEPS: usize = 40;
const GRID_MAX_POINTS: u128 = 200_000;
const GRID_POLISHED: usize = 8;

pub const DEFAULT_RESTARTS: usize = 200;
pub const DEFAULT_SEED: u64 = 42;

/// A point of the probability simplex.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SimplexPoint {
    weights: Vec<f64>,
}

impl SimplexPoint {
    /// Renormalizes nonnegative weights to sum to one.
    pub fn new(weights: Vec<f64>) -> Result<Self> {
        if weights.iter().any(|w| !w.is_finite() || *w < 0.0) {
            return Err(Error::InvalidArgument("weights must be finite and nonnegative".into()));
        }
        let total: f64 = weights.iter().sum();
        if total <= 0.0 {
            return Err(Error::InvalidArgument("weights must not all vanish".into()));
        }
        Ok(Self { weights: weights.into_iter().map(|w| w / total).collect() })
    }

    pub fn uniform(n: usize) -> Result<Self> {
        Self::new(vec![1.0; n])
    }

    pub fn weights(&self) -> &[f64] {
        &self.weights
    }

    pub fn dim(&self) -> usize {
        self.weights.len()
    }

    pub fn support(&self, threshold: f64) -> Vec<usize> {
        (0..self.weights.len()).filter(|&v| self.weights[v] > threshold).collect()
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Status {
    Converged,
    BudgetLimited,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct LagrangianResult {
    pub value: f64,
    pub witness: SimplexPoint,
    pub blowup_density: f64,
    pub status: Status,
    pub restarts_used: usize,
    /// Fixed-point residual of the witness.
    pub residual: f64,
    /// `Some(true)` when the grid oracle found nothing better than `value`
    /// (up to 1e-6); `None` when the instance is too large for the oracle.
    pub grid_confirmed: Option<bool>,
}

/// `P(x) = Σ_e ∏_{v∈e} x_v`.
pub fn edge_polynomial(h: &Hypergraph, x: &SimplexPoint) -> Result<f64> {
    if x.dim() != h.n() {
        return Err(Error::DimensionMismatch { expected: h.n(), got: x.dim() });
    }
    Ok(poly(h, x.weights()))
}

/// Exact evaluation of the edge polynomial at a rational point.
pub fn edge_polynomial_exact(h: &Hypergraph, x: &[BigRational]) -> Result<BigRational> {
    if x.len() != h.n() {
        return Err(Error::DimensionMismatch { expected: h.n(), got: x.len() });
    }
    Ok(h.edges().iter().fold(BigRational::zero(), |acc, e| {
        acc + e.iter().fold(BigRational::one(), |p, &v| p * &x[v])
    }))
}

fn poly(h: &Hypergraph, x: &[f64]) -> f64 {
    h.edges().iter().map(|e| e.iter().map(|&v| x[v]).product::<f64>()).sum()
}

fn gradient(h: &Hypergraph, x: &[f64]) -> Vec<f64> {
    let mut g = vec![0.0; x.len()];
    for e in h.edges() {
        for (pos, &v) in e.iter().enumerate() {
            let mut p = 1.0;
            for (q, &u) in e.iter().enumerate() {
                if q != pos {
                    p *= x[u];
                }
            }
            g[v] += p;
        }
    }
    g
}

/// Fixed-point residual on the simplex: on the support every partial
/// derivative equals `r·P`, and off the support none exceeds it.
pub fn fixed_point_residual(h: &Hypergraph, x: &SimplexPoint) -> Result<f64> {
    if x.dim() != h.n() {
        return Err(Error::DimensionMismatch { expected: h.n(), got: x.dim() });
    }
    Ok(residual(h, x.weights()))
}

fn residual(h: &Hypergraph, x: &[f64]) -> f64 {
    let g = gradient(h, x);
    let target = h.r() as f64 * poly(h, x);
    let mut worst: f64 = 0.0;
    for v in 0..x.len() {
        let d = g[v] - target;
        if x[v] > 1e-9 {
            worst = worst.max(d.abs());
        } else {
            worst = worst.max(d);
        }
    }
    worst
}

fn project_to_simplex(y: &[f64]) -> Vec<f64> {
    let mut u = y.to_vec();
    u.sort_by(|a, b| b.total_cmp(a));
    let mut cum = 0.0;
    let mut theta = 0.0;
    for (j, &uj) in u.iter().enumerate() {
        cum += uj;
        let t = (cum - 1.0) / (j + 1) as f64;
        if uj - t > 0.0 {
            theta = t;
        }
    }
    y.iter().map(|&v| (v - theta).max(0.0)).collect()
}

/// Replicator ascent from `x`; returns the final point and whether the stall
/// criterion fired before the iteration cap.
fn ascend(h: &Hypergraph, mut x: Vec<f64>, tol: f64) -> (Vec<f64>, bool) {
    let r = h.r() as f64;
    let mut history = std::collections::VecDeque::with_capacity(STALL_WINDOW + 1);
    let mut value = poly(h, &x);
    history.push_back(value);
    for _ in 0..MAX_ITERATIONS {
        let g = gradient(h, &x);
        if value > 1e-200 {
            let denom = r * value;
            for v in 0..x.len() {
                x[v] *= g[v] / denom;
            }
            let s: f64 = x.iter().sum();
            x.iter_mut().for_each(|w| *w /= s);
        } else {
            // the replicator map is undefined at P = 0
            let step: Vec<f64> = x.iter().zip(&g).map(|(a, b)| a + b).collect();
            let mut next = project_to_simplex(&step);
            if next.iter().zip(&x).all(|(a, b)| a == b) {
                next = vec![1.0 / x.len() as f64; x.len()];
            }
            x = next;
        }
        value = poly(h, &x);
        history.push_back(value);
        if history.len() > STALL_WINDOW {
            let old = history.pop_front().unwrap_or(0.0);
            if value - old < tol {
                return (x, true);
            }
        }
    }
    (x, false)
}

/// Drops vanishing coordinates and ascends again on the remaining support.
fn polish(h: &Hypergraph, x: Vec<f64>, tol: f64) -> Vec<f64> {
    let max = x.iter().copied().fold(0.0, f64::max);
    let mut y: Vec<f64> = x.iter().map(|&w| if w < 1e-7 * max { 0.0 } else { w }).collect();
    let s: f64 = y.iter().sum();
    y.iter_mut().for_each(|w| *w /= s);
    if poly(h, &y) < poly(h, &x) {
        return x;
    }
    ascend(h, y, tol).0
}

struct Run {
    value: f64,
    x: Vec<f64>,
    stalled: bool,
}

fn better(a: &Run, b: &Run) -> bool {
    match a.value.total_cmp(&b.value) {
        std::cmp::Ordering::Greater => true,
        std::cmp::Ordering::Less => false,
        std::cmp::Ordering::Equal => {
            a.x.iter().zip(&b.x).map(|(p, q)| p.total_cmp(q)).find(|o| o.is_ne())
                == Some(std::cmp::Ordering::Less)
        }
    }
}

fn single_run(h: &Hypergraph, start: Vec<f64>, tol: f64) -> Run {
    let (x, stalled) = ascend(h, start, tol);
    let x = polish(h, x, tol);
    Run { value: poly(h, &x), x, stalled }
}

/// `L(H)` by replicator ascent from `restarts` Dirichlet(1) starts (plus the
/// barycenter), with seed [`DEFAULT_SEED`].
pub fn lagrangian(h: &Hypergraph, restarts: usize, tol: f64) -> LagrangianResult {
    lagrangian_seeded(h, restarts, tol, DEFAULT_SEED)
}

pub fn lagrangian_seeded(h: &Hypergraph, restarts: usize, tol: f64, seed: u64) -> LagrangianResult {
    let n = h.n();
    let factorial: f64 = (1..=h.r()).map(|i| i as f64).product();
    if h.edge_count() == 0 || n == 0 {
        let witness = SimplexPoint { weights: vec![1.0 / n.max(1) as f64; n] };
        return LagrangianResult {
            value: 0.0,
            witness,
            blowup_density: 0.0,
            status: Status::Converged,
            restarts_used: 0,
            residual: 0.0,
            grid_confirmed: Some(true),
        };
    }
    let tol = if tol > 0.0 { tol } else { 1e-12 };
    let runs: Vec<Run> = (0..=restarts)
        .into_par_iter()
        .map(|i| {
            let start = if i == 0 {
                vec![1.0 / n as f64; n]
            } else {
                rng::dirichlet_ones(&mut rng::stream(seed, i as u64), n)
            };
            single_run(h, start, tol)
        })
        .collect();
    let mut best = &runs[0];
    for run in &runs[1..] {
        if better(run, best) {
            best = run;
        }
    }
    let mut best = Run { value: best.value, x: best.x.clone(), stalled: best.stalled };

    let grid_confirmed = if n <= GRID_MAX_VERTICES {
        let oracle = grid_oracle(h, tol);
        let confirmed = oracle.value <= best.value + 1e-6;
        if better(&oracle, &best) {
            best = oracle;
        }
        Some(confirmed)
    } else {
        None
    };

    let res = residual(h, &best.x);
    let status = if res < RESIDUAL_TOL { Status::Converged } else { Status::BudgetLimited };
    LagrangianResult {
        value: best.value,
        blowup_density: factorial * best.value,
        witness: SimplexPoint { weights: best.x },
        status,
        restarts_used: restarts,
        residual: res,
        grid_confirmed,
    }
}

fn binomial(n: u128, k: u128) -> u128 {
    let k = k.min(n - k.min(n));
    (0..k).fold(1u128, |acc, i| acc * (n - i) / (i + 1))
}

/// Evaluates `P` on the mesh `{x : m·x ∈ ℕ^n}` with the finest `m ≤ 40` that
/// keeps the point count bounded, then polishes the best mesh points.
fn grid_oracle(h: &Hypergraph, tol: f64) -> Run {
    let n = h.n();
    let mut m = GRID_MAX_STEPS;
    while m > 1 && binomial((m + n - 1) as u128, (n - 1) as u128) > GRID_MAX_POINTS {
        m -= 1;
    }
    let mut top: Vec<(f64, Vec<usize>)> = Vec::new();
    let mut counts = vec![0usize; n];
    let mut visit = |c: &[usize]| {
        let x: Vec<f64> = c.iter().map(|&a| a as f64 / m as f64).collect();
        let val = poly(h, &x);
        if top.len() < GRID_POLISHED || val > top[top.len() - 1].0 {
            top.push((val, c.to_vec()));
            top.sort_by(|a, b| b.0.total_cmp(&a.0).then_with(|| a.1.cmp(&b.1)));
            top.truncate(GRID_POLISHED);
        }
    };
    compositions(m, 0, &mut counts, &mut visit);
    let mut best: Option<Run> = None;
    for (_, c) in top {
        // start slightly inside the simplex so every coordinate can move
        let x: Vec<f64> = c.iter().map(|&a| (a as f64 + 1e-3) / (m as f64 + 1e-3 * n as f64)).collect();
        let run = single_run(h, x, tol);
        if best.as_ref().is_none_or(|b| better(&run, b)) {
            best = Some(run);
        }
    }
    best.expect("mesh is nonempty")
}

fn compositions(left: usize, idx: usize, counts: &mut Vec<usize>, visit: &mut dyn FnMut(&[usize])) {
    if idx + 1 == counts.len() {
        counts[idx] = left;
        visit(counts);
        return;
    }
    for a in 0..=left {
        counts[idx] = a;
        compositions(left - a, idx + 1, counts, visit);
    }
}

/// A certified lower bound on `L(H)`: the witness is rounded to rationals with
/// denominators at most 1000, renormalized, and evaluated exactly.
pub fn certified_lower_bound(h: &Hypergraph, witness: &SimplexPoint) -> Result<BigRational> {
    let q = exact::rationalize_simplex(witness.weights(), 1000)?;
    edge_polynomial_exact(h, &q)
}

/// A lower bound on a Turán density obtained from a hom-free host.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct DensityBound {
    /// `r! · L(H)` as found by the ascent.
    pub blowup_density: f64,
    /// `r!` times the exact edge polynomial at the rationalized witness; a
    /// rigorous lower bound on `b(H)`.
    #[serde(serialize_with = "serialize_rational")]
    pub certified: BigRational,
    pub lagrangian: LagrangianResult,
}

fn serialize_rational<S: serde::Serializer>(q: &BigRational, s: S) -> std::result::Result<S::Ok, S::Error> {
    s.serialize_str(&q.to_string())
}

/// `b(H)` as a lower bound on `π(family)` when `H` is hom-free, `None` otherwise.
pub fn density_lower_bound(h: &Hypergraph, family: &Family, budget: &SearchBudget) -> Result<Option<DensityBound>> {
    if !is_hom_free(h, family, budget)? {
        return Ok(None);
    }
    let lagrangian = lagrangian(h, DEFAULT_RESTARTS, 1e-12);
    let factorial: BigInt = (1..=h.r()).map(BigInt::from).product();
    let certified = certified_lower_bound(h, &lagrangian.witness)? * BigRational::from_integer(factorial);
    Ok(Some(DensityBound { blowup_density: lagrangian.blowup_density, certified, lagrangian }))
}

/// Checks that every member of `f_small` is the image of a homomorphism from
/// some member of `f_big`.
pub fn check_density_monotone(f_big: &Family, f_small: &Family, budget: &SearchBudget) -> Result<bool> {
    if f_big.r() != f_small.r() {
        return Err(Error::UniformityMismatch { left: f_big.r(), right: f_small.r() });
    }
    for target in f_small.members() {
        let mut hit = false;
        for source in f_big.members() {
            if find_homomorphism(source, target, budget)?.is_some() {
                hit = true;
                break;
            }
        }
        if !hit {
            return Ok(false);
        }
    }
    Ok(true)
}
