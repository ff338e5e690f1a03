//! The polytope `X_{r,k}` and the maximization of `∏ x_i` over it.
//!
//! A point is `(x_1, …, x_r)` with `0 < x_1 ≤ … ≤ x_r = 1` and
//! `x_i + x_j ≤ x_{i+j}` for `i ≤ k`, `i ≤ j ≤ r − i`; `x_0 = 0` is implicit.
//! The constraints with `i = 1` already force monotonicity, so the solver only
//! carries the tent constraints. `Σ log x_i` is strictly concave, hence any KKT
//! point is the unique global maximizer.

use nalgebra::{DMatrix, DVector};
use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::{One, Signed, Zero};
use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::exact::{self, int, ratio};
use crate::rng;

/// Constraint slack tolerance for float feasibility.
pub const TAU_FEAS: f64 = 1e-9;
/// Tolerance for equalities defining uniform intervals.
pub const TAU_SEG: f64 = 1e-7;
/// Stationarity residual below which a KKT certificate is accepted.
pub const TAU_KKT: f64 = 1e-8;
const TAU_ACTIVE: f64 = 1e-7;

fn check_rk(r: usize, k: usize) -> Result<()> {
    if r < 2 {
        return Err(Error::InvalidArgument(format!("need r >= 2, got {r}")));
    }
    if k < 1 || k > r / 2 {
        return Err(Error::InvalidArgument(format!("need 1 <= k <= floor(r/2), got r = {r}, k = {k}")));
    }
    Ok(())
}

/// The index pairs `(i, j)` with `i ≤ k` and `i ≤ j ≤ r − i`.
pub fn tent_pairs(r: usize, k: usize) -> Vec<(usize, usize)> {
    let mut pairs = Vec::new();
    for i in 1..=k {
        for j in i..=r.saturating_sub(i) {
            pairs.push((i, j));
        }
    }
    pairs
}

/// A constraint of `X_{r,k}`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum Constraint {
    /// `x_i + x_j ≤ x_{i+j}`.
    Tent { i: usize, j: usize },
    /// `x_i ≤ x_{i+1}` (with `x_0 = 0`, so `i = 0` reads `0 < x_1`).
    Monotone { i: usize },
    /// `x_r = 1`.
    LastIsOne,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Violation {
    pub constraint: Constraint,
    /// Amount by which the constraint fails.
    pub excess: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct FeasibilityReport {
    pub feasible: bool,
    pub violations: Vec<Violation>,
}

/// Membership test for `X_{r,k}` with slack `tol`; lists every violated constraint.
pub fn check_feasible(x: &[f64], r: usize, k: usize, tol: f64) -> Result<FeasibilityReport> {
    check_rk(r, k)?;
    if x.len() != r {
        return Err(Error::DimensionMismatch { expected: r, got: x.len() });
    }
    let at = |i: usize| if i == 0 { 0.0 } else { x[i - 1] };
    let mut violations = Vec::new();
    if !x.iter().all(|v| v.is_finite()) {
        return Err(Error::InvalidArgument("coordinates must be finite".into()));
    }
    if (x[r - 1] - 1.0).abs() > tol {
        violations.push(Violation { constraint: Constraint::LastIsOne, excess: (x[r - 1] - 1.0).abs() });
    }
    if x[0] <= 0.0 {
        violations.push(Violation { constraint: Constraint::Monotone { i: 0 }, excess: -x[0] });
    }
    for i in 1..r {
        let d = at(i) - at(i + 1);
        if d > tol {
            violations.push(Violation { constraint: Constraint::Monotone { i }, excess: d });
        }
    }
    for (i, j) in tent_pairs(r, k) {
        let d = at(i) + at(j) - at(i + j);
        if d > tol {
            violations.push(Violation { constraint: Constraint::Tent { i, j }, excess: d });
        }
    }
    Ok(FeasibilityReport { feasible: violations.is_empty(), violations })
}

/// Exact membership test; also returns the tight tent constraints.
#[derive(Debug, Clone, PartialEq)]
pub struct ExactFeasibility {
    pub feasible: bool,
    pub violated: Vec<Constraint>,
    pub tight: Vec<(usize, usize)>,
}

pub fn check_feasible_exact(x: &[BigRational], r: usize, k: usize) -> Result<ExactFeasibility> {
    check_rk(r, k)?;
    if x.len() != r {
        return Err(Error::DimensionMismatch { expected: r, got: x.len() });
    }
    let zero = BigRational::zero();
    let at = |i: usize| if i == 0 { &zero } else { &x[i - 1] };
    let mut violated = Vec::new();
    let mut tight = Vec::new();
    if !x[r - 1].is_one() {
        violated.push(Constraint::LastIsOne);
    }
    if !x[0].is_positive() {
        violated.push(Constraint::Monotone { i: 0 });
    }
    for i in 1..r {
        if at(i) > at(i + 1) {
            violated.push(Constraint::Monotone { i });
        }
    }
    for (i, j) in tent_pairs(r, k) {
        let lhs = at(i) + at(j);
        match lhs.cmp(at(i + j)) {
            std::cmp::Ordering::Greater => violated.push(Constraint::Tent { i, j }),
            std::cmp::Ordering::Equal => tight.push((i, j)),
            std::cmp::Ordering::Less => {}
        }
    }
    Ok(ExactFeasibility { feasible: violated.is_empty(), violated, tight })
}

/// A point of `X_{r,k}`, validated on construction with slack [`TAU_FEAS`].
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "RawPoint")]
pub struct FeasiblePoint {
    r: usize,
    k: usize,
    x: Vec<f64>,
}

#[derive(Deserialize)]
struct RawPoint {
    r: usize,
    k: usize,
    x: Vec<f64>,
}

impl TryFrom<RawPoint> for FeasiblePoint {
    type Error = Error;

    fn try_from(raw: RawPoint) -> Result<Self> {
        FeasiblePoint::new(raw.r, raw.k, raw.x)
    }
}

impl FeasiblePoint {
    pub fn new(r: usize, k: usize, x: Vec<f64>) -> Result<Self> {
        let report = check_feasible(&x, r, k, TAU_FEAS)?;
        if let Some(v) = report.violations.first() {
            return Err(Error::Infeasible(format!("{:?} fails by {:e}", v.constraint, v.excess)));
        }
        Ok(Self { r, k, x })
    }

    /// The point `x_i = i / r`.
    pub fn linear(r: usize, k: usize) -> Result<Self> {
        Self::new(r, k, (1..=r).map(|i| i as f64 / r as f64).collect())
    }

    pub fn r(&self) -> usize {
        self.r
    }

    pub fn k(&self) -> usize {
        self.k
    }

    pub fn x(&self) -> &[f64] {
        &self.x
    }

    /// `x_i` for `0 ≤ i ≤ r`.
    pub fn at(&self, i: usize) -> f64 {
        if i == 0 {
            0.0
        } else {
            self.x[i - 1]
        }
    }

    pub fn product(&self) -> f64 {
        self.x.iter().product()
    }
}

/// `x_i = i / r` in exact arithmetic.
pub fn linear_point_exact(r: usize) -> Vec<BigRational> {
    (1..=r).map(|i| ratio(i as i64, r as i64)).collect()
}

pub fn product_exact(x: &[BigRational]) -> BigRational {
    x.iter().fold(BigRational::one(), |a, b| a * b)
}

// ---------------------------------------------------------------------------
// Solver

/// Constraint rows `a · y ≤ b` over `y = (x_1, …, x_{r−1})`.
struct System {
    pairs: Vec<(usize, usize)>,
    rows: DMatrix<f64>,
    rhs: DVector<f64>,
}

impl System {
    fn new(r: usize, k: usize) -> Self {
        let pairs = tent_pairs(r, k);
        let m = pairs.len();
        let mut rows = DMatrix::zeros(m, r - 1);
        let mut rhs = DVector::zeros(m);
        for (c, &(i, j)) in pairs.iter().enumerate() {
            rows[(c, i - 1)] += 1.0;
            rows[(c, j - 1)] += 1.0;
            if i + j == r {
                rhs[c] = 1.0;
            } else {
                rows[(c, i + j - 1)] -= 1.0;
            }
        }
        Self { pairs, rows, rhs }
    }

    fn slacks(&self, y: &DVector<f64>) -> DVector<f64> {
        &self.rhs - &self.rows * y
    }
}

/// Starting point of the interior-point method.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum Start {
    /// `x_i = (i/r)^p` with `p > 1`.
    Power { p: f64 },
    /// `x_i = g(i/r)` for a random strictly convex `g` with `g(0) = 0`, `g(1) = 1`.
    Random { seed: u64 },
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct MaxOptions {
    pub start: Start,
    /// Re-check the rationalized optimum in exact arithmetic.
    pub exact: bool,
}

impl Default for MaxOptions {
    fn default() -> Self {
        Self { start: Start::Power { p: 1.5 }, exact: false }
    }
}

fn starting_point(r: usize, start: Start) -> Result<Vec<f64>> {
    let g: Box<dyn Fn(f64) -> f64> = match start {
        Start::Power { p } => {
            if !p.is_finite() || p <= 1.0 {
                return Err(Error::InvalidArgument("start exponent must exceed 1".into()));
            }
            Box::new(move |t: f64| t.powf(p))
        }
        Start::Random { seed } => {
            let mut rng = rng::stream(seed, 0);
            let terms: Vec<(f64, f64)> =
                (0..3).map(|_| (rng.gen_range(0.1..1.0), rng.gen_range(1.1..4.0))).collect();
            let norm: f64 = terms.iter().map(|(c, _)| c).sum();
            Box::new(move |t: f64| terms.iter().map(|(c, p)| c * t.powf(*p)).sum::<f64>() / norm)
        }
    };
    Ok((1..r).map(|i| g(i as f64 / r as f64)).collect())
}

fn log_objective(y: &DVector<f64>) -> f64 {
    y.iter().map(|v| v.ln()).sum()
}

/// Minimizes `−t Σ log y_i − Σ log s_c(y)` by damped Newton from a strictly feasible `y`.
/// Stops early when a step can no longer make progress in floating point.
fn center(sys: &System, y: &mut DVector<f64>, t: f64) {
    let barrier = |y: &DVector<f64>| -> f64 {
        let s = sys.slacks(y);
        if y.iter().any(|&v| v <= 0.0) || s.iter().any(|&v| v <= 0.0) {
            return f64::INFINITY;
        }
        -t * log_objective(y) - s.iter().map(|v| v.ln()).sum::<f64>()
    };
    let n = y.len();
    for _ in 0..200 {
        let s = sys.slacks(y);
        let inv_s = s.map(|v| 1.0 / v);
        let mut grad = DVector::from_iterator(n, y.iter().map(|v| -t / v));
        grad += sys.rows.transpose() * &inv_s;
        let mut hess = DMatrix::from_diagonal(&y.map(|v| t / (v * v)));
        let weighted = DMatrix::from_fn(sys.rows.nrows(), n, |c, j| sys.rows[(c, j)] * inv_s[c]);
        hess += weighted.transpose() * &weighted;
        let Some(chol) = hess.cholesky() else { return };
        let step = -chol.solve(&grad);
        let decrement = -grad.dot(&step);
        if decrement / 2.0 < 1e-13 {
            return;
        }
        let f0 = barrier(y);
        let mut alpha = 1.0;
        loop {
            let trial = &*y + &step * alpha;
            if barrier(&trial) <= f0 - 0.25 * alpha * decrement {
                *y = trial;
                break;
            }
            alpha *= 0.5;
            if alpha < 1e-16 {
                return;
            }
        }
    }
}

/// Maximizes `Σ log y_i` subject to the rows of `active` holding with equality,
/// by Newton steps in the null space of the active rows.
fn polish(sys: &System, y: &DVector<f64>, active: &[usize]) -> Option<DVector<f64>> {
    let n = y.len();
    let mut y = y.clone();
    let z = if active.is_empty() {
        DMatrix::identity(n, n)
    } else {
        let a = DMatrix::from_fn(active.len(), n, |c, j| sys.rows[(active[c], j)]);
        let b = DVector::from_iterator(active.len(), active.iter().map(|&c| sys.rhs[c]));
        let correction = a.clone().svd(true, true).solve(&(&a * &y - &b), 1e-10).ok()?;
        y -= correction;
        let eig = (a.transpose() * &a).symmetric_eigen();
        let scale = eig.eigenvalues.amax().max(1.0);
        let null: Vec<usize> = (0..n).filter(|&c| eig.eigenvalues[c].abs() < 1e-10 * scale).collect();
        DMatrix::from_fn(n, null.len(), |j, c| eig.eigenvectors[(j, null[c])])
    };
    if y.iter().any(|&v| v <= 0.0) {
        return None;
    }
    if z.ncols() == 0 {
        return Some(y);
    }
    for _ in 0..100 {
        let gz = z.transpose() * y.map(|v| 1.0 / v);
        if gz.amax() < 1e-15 {
            break;
        }
        let d = DMatrix::from_diagonal(&y.map(|v| 1.0 / (v * v)));
        let h = z.transpose() * d * &z;
        let step = &z * h.cholesky()?.solve(&gz);
        let f0 = log_objective(&y);
        let mut alpha = 1.0;
        loop {
            let trial = &y + &step * alpha;
            if trial.iter().all(|&v| v > 0.0) && log_objective(&trial) >= f0 {
                y = trial;
                break;
            }
            alpha *= 0.5;
            if alpha < 1e-16 {
                return Some(y);
            }
        }
    }
    Some(y)
}

/// Solver status.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum SolveStatus {
    Optimal,
    NotConverged,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Multiplier {
    pub i: usize,
    pub j: usize,
    pub lambda: f64,
}

/// First-order optimality evidence at a feasible point.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct KktCertificate {
    /// Tent constraints holding with equality (within tolerance).
    pub active: Vec<(usize, usize)>,
    pub multipliers: Vec<Multiplier>,
    /// Multiplier of `x_r = 1`.
    pub nu: f64,
    /// Sup-norm of `∇ Σ log x_i − Σ λ a_c` over `x_1, …, x_{r−1}`.
    pub residual: f64,
    /// Whether the residual is below [`TAU_KKT`].
    pub certified: bool,
    /// An improving feasible direction when no certificate exists
    /// (`r` entries, the last being zero).
    pub direction: Option<Vec<f64>>,
}

/// Lawson–Hanson nonnegative least squares `min ‖E λ − g‖, λ ≥ 0`.
/// Returns `λ` and the passive set.
fn nnls(e: &DMatrix<f64>, g: &DVector<f64>) -> (DVector<f64>, Vec<usize>) {
    let n = e.ncols();
    let mut lambda = DVector::zeros(n);
    let mut passive: Vec<usize> = Vec::new();
    let tol = 1e-12 * (1.0 + g.amax()) * (1.0 + e.amax());
    let solve_on = |set: &[usize]| -> DVector<f64> {
        let sub = DMatrix::from_fn(e.nrows(), set.len(), |i, c| e[(i, set[c])]);
        let sol = sub.svd(true, true).solve(g, 1e-13).unwrap_or_else(|_| DVector::zeros(set.len()));
        let mut full = DVector::zeros(n);
        for (c, &j) in set.iter().enumerate() {
            full[j] = sol[c];
        }
        full
    };
    for _ in 0..3 * n + 3 {
        let w = e.transpose() * (g - e * &lambda);
        let candidate = (0..n).filter(|j| !passive.contains(j)).max_by(|&a, &b| w[a].total_cmp(&w[b]));
        let Some(j) = candidate else { break };
        if w[j] <= tol {
            break;
        }
        passive.push(j);
        let mut inner = 0;
        loop {
            inner += 1;
            let s = solve_on(&passive);
            if passive.iter().all(|&p| s[p] > 0.0) || inner > 3 * n + 3 {
                lambda = s;
                break;
            }
            let mut alpha = f64::INFINITY;
            for &p in &passive {
                if s[p] <= 0.0 {
                    alpha = alpha.min(lambda[p] / (lambda[p] - s[p]));
                }
            }
            lambda += (&s - &lambda) * alpha;
            passive.retain(|&p| lambda[p] > tol);
            for j in 0..n {
                if !passive.contains(&j) {
                    lambda[j] = 0.0;
                }
            }
        }
    }
    passive.sort_unstable();
    (lambda, passive)
}

fn kkt_inputs(sys: &System, x: &FeasiblePoint) -> (Vec<usize>, DMatrix<f64>, DVector<f64>) {
    let r = x.r();
    let y = DVector::from_iterator(r - 1, x.x()[..r - 1].iter().copied());
    let slacks = sys.slacks(&y);
    let active: Vec<usize> = (0..sys.pairs.len()).filter(|&c| slacks[c] <= TAU_ACTIVE).collect();
    let e = DMatrix::from_fn(r - 1, active.len(), |v, c| sys.rows[(active[c], v)]);
    let g = y.map(|v| 1.0 / v);
    (active, e, g)
}

/// KKT certificate for `max Σ log x_i` over `X_{r,k}` at `x`, or an improving direction.
pub fn kkt_certificate(x: &FeasiblePoint) -> KktCertificate {
    let r = x.r();
    let sys = System::new(r, x.k());
    let (active, e, g) = kkt_inputs(&sys, x);
    let (lambda, _) = nnls(&e, &g);
    let rho = &g - &e * &lambda;
    let residual = rho.amax();
    let certified = residual < TAU_KKT;
    let mut nu = 1.0;
    let mut multipliers = Vec::new();
    for (c, &row) in active.iter().enumerate() {
        let (i, j) = sys.pairs[row];
        if i + j == r {
            nu += lambda[c];
        }
        multipliers.push(Multiplier { i, j, lambda: lambda[c] });
    }
    let direction = if certified {
        None
    } else {
        let mut d: Vec<f64> = rho.iter().copied().collect();
        d.push(0.0);
        Some(d)
    };
    KktCertificate {
        active: active.iter().map(|&c| sys.pairs[c]).collect(),
        multipliers,
        nu,
        residual,
        certified,
        direction,
    }
}

/// Exact KKT certificate at a rational point: the tight constraints, and
/// nonnegative rational multipliers reproducing the gradient exactly.
#[derive(Debug, Clone, PartialEq)]
pub struct ExactKkt {
    pub multipliers: Vec<((usize, usize), BigRational)>,
    pub nu: BigRational,
}

/// Tries to certify optimality of a rational point exactly. The multiplier
/// support is taken from the float NNLS solution; the multipliers on it are
/// then solved for in rational arithmetic. Returns `None` when that fails.
pub fn kkt_certificate_exact(x: &[BigRational], r: usize, k: usize) -> Result<Option<ExactKkt>> {
    let feas = check_feasible_exact(x, r, k)?;
    if !feas.feasible {
        return Err(Error::Infeasible(format!("violated constraints {:?}", feas.violated)));
    }
    let approx: Vec<f64> = x.iter().map(exact::to_f64).collect();
    let point = FeasiblePoint { r, k, x: approx };
    let sys = System::new(r, k);
    let (active, e, g) = kkt_inputs(&sys, &point);
    let (_, passive) = nnls(&e, &g);
    let support: Vec<(usize, usize)> = passive.iter().map(|&c| sys.pairs[active[c]]).collect();
    if support.iter().any(|p| !feas.tight.contains(p)) {
        return Ok(None);
    }
    // columns a_c over x_1..x_{r-1}
    let column = |(i, j): (usize, usize)| -> Vec<BigRational> {
        let mut col = vec![BigRational::zero(); r - 1];
        col[i - 1] += int(1);
        col[j - 1] += int(1);
        if i + j < r {
            col[i + j - 1] -= int(1);
        }
        col
    };
    let cols: Vec<Vec<BigRational>> = support.iter().map(|&p| column(p)).collect();
    let grad: Vec<BigRational> = x[..r - 1].iter().map(|v| v.recip()).collect();
    let m = cols.len();
    // normal equations (E^T E) λ = E^T g
    let mut mat: Vec<Vec<BigRational>> = (0..m)
        .map(|a| {
            let mut row: Vec<BigRational> = (0..m)
                .map(|b| cols[a].iter().zip(&cols[b]).fold(BigRational::zero(), |s, (p, q)| s + p * q))
                .collect();
            row.push(cols[a].iter().zip(&grad).fold(BigRational::zero(), |s, (p, q)| s + p * q));
            row
        })
        .collect();
    let Some(lambda) = solve_exact(&mut mat) else { return Ok(None) };
    if lambda.iter().any(|l| l.is_negative()) {
        return Ok(None);
    }
    for v in 0..r - 1 {
        let combo = (0..m).fold(BigRational::zero(), |s, c| s + &cols[c][v] * &lambda[c]);
        if combo != grad[v] {
            return Ok(None);
        }
    }
    let mut nu = BigRational::one();
    for (c, &(i, j)) in support.iter().enumerate() {
        if i + j == r {
            nu += &lambda[c];
        }
    }
    Ok(Some(ExactKkt { multipliers: support.into_iter().zip(lambda).collect(), nu }))
}

/// Gaussian elimination on an augmented square system; `None` if singular.
fn solve_exact(mat: &mut [Vec<BigRational>]) -> Option<Vec<BigRational>> {
    let m = mat.len();
    for col in 0..m {
        let pivot = (col..m).find(|&row| !mat[row][col].is_zero())?;
        mat.swap(col, pivot);
        let p = mat[col][col].clone();
        for entry in mat[col].iter_mut() {
            *entry = &*entry / &p;
        }
        for row in 0..m {
            if row != col && !mat[row][col].is_zero() {
                let f = mat[row][col].clone();
                let pivot_row = mat[col].clone();
                for (entry, pv) in mat[row].iter_mut().zip(pivot_row) {
                    *entry = &*entry - &f * pv;
                }
            }
        }
    }
    Some(mat.iter().map(|row| row[m].clone()).collect())
}

/// Exact re-check of a rounded optimum.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ExactCheck {
    /// The rationalized argmax, as fractions.
    pub point: Vec<String>,
    pub feasible: bool,
    pub all_tent_constraints_tight: bool,
    pub product: String,
    pub product_equals_bound: bool,
    pub kkt_exact: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct OptimizationReport {
    pub r: usize,
    pub k: usize,
    pub value: f64,
    pub argmax: FeasiblePoint,
    /// `r! / r^r`.
    pub bound: f64,
    pub bound_exact: String,
    /// `value − bound`.
    pub margin: f64,
    pub kkt: KktCertificate,
    pub status: SolveStatus,
    pub exact: Option<ExactCheck>,
}

/// Maximizes `∏ x_i` over `X_{r,k}` by a log-barrier method followed by an
/// active-set Newton polish, and certifies the result.
pub fn maximize_product(r: usize, k: usize, opts: &MaxOptions) -> Result<OptimizationReport> {
    check_rk(r, k)?;
    let sys = System::new(r, k);
    let mut y = DVector::from_vec(starting_point(r, opts.start)?);
    if r == 2 {
        // the only point is (1/2, 1)
        y[0] = 0.5;
    }
    if r > 2 {
        if sys.slacks(&y).iter().any(|&s| s <= 0.0) {
            return Err(Error::Numerical("starting point is not strictly feasible".into()));
        }
        let m = sys.pairs.len() as f64;
        let mut t = 1.0;
        loop {
            center(&sys, &mut y, t);
            if m / t < 1e-10 {
                break;
            }
            t *= 10.0;
        }
        y = polish_active_set(&sys, y);
    }
    let mut x: Vec<f64> = y.iter().copied().collect();
    x.push(1.0);
    let argmax = FeasiblePoint::new(r, k, x)?;
    let kkt = kkt_certificate(&argmax);
    let status = if kkt.certified { SolveStatus::Optimal } else { SolveStatus::NotConverged };
    let bound_q = exact::edge_density(r);
    let bound = exact::to_f64(&bound_q);
    let value = argmax.product();
    let exact_check = if opts.exact { Some(exact_check(&argmax, &bound_q)?) } else { None };
    Ok(OptimizationReport {
        r,
        k,
        value,
        margin: value - bound,
        argmax,
        bound,
        bound_exact: bound_q.to_string(),
        kkt,
        status,
        exact: exact_check,
    })
}

/// Polishes on the numerically active set, growing it while the polished
/// point violates other constraints.
fn polish_active_set(sys: &System, y: DVector<f64>) -> DVector<f64> {
    let slacks = sys.slacks(&y);
    let mut active: Vec<usize> = (0..sys.pairs.len()).filter(|&c| slacks[c] < TAU_ACTIVE).collect();
    for _ in 0..sys.pairs.len() {
        let Some(cand) = polish(sys, &y, &active) else { return y };
        let s = sys.slacks(&cand);
        let worst = (0..s.len()).filter(|c| !active.contains(c)).min_by(|&a, &b| s[a].total_cmp(&s[b]));
        match worst {
            Some(c) if s[c] < -1e-13 => active.push(c),
            _ => {
                let scale = 1e-12;
                return if log_objective(&cand) >= log_objective(&y) - scale && s.iter().all(|&v| v >= -1e-13) {
                    cand
                } else {
                    y
                };
            }
        }
    }
    y
}

fn exact_check(argmax: &FeasiblePoint, bound: &BigRational) -> Result<ExactCheck> {
    let (r, k) = (argmax.r(), argmax.k());
    let mut q: Vec<BigRational> = argmax.x().iter().map(|&v| exact::rationalize(v, 10_000)).collect::<Result<_>>()?;
    q[r - 1] = BigRational::one();
    let feas = check_feasible_exact(&q, r, k)?;
    let product = product_exact(&q);
    let kkt_exact = feas.feasible && kkt_certificate_exact(&q, r, k)?.is_some();
    Ok(ExactCheck {
        point: q.iter().map(|v| v.to_string()).collect(),
        feasible: feas.feasible,
        all_tent_constraints_tight: feas.feasible && feas.tight.len() == tent_pairs(r, k).len(),
        product_equals_bound: &product == bound,
        product: product.to_string(),
        kkt_exact,
    })
}

// ---------------------------------------------------------------------------
// Closed forms

/// `f′(0) = −k + Σ_{i=k+1}^{r} (r − i)/i`, the log-derivative at `ε = 0` of
/// the product along [`counterexample_at`].
pub fn fprime_zero(r: usize, k: usize) -> Result<BigRational> {
    if k < 1 || k > r {
        return Err(Error::InvalidArgument(format!("need 1 <= k <= r, got r = {r}, k = {k}")));
    }
    let mut total = int(-(k as i64));
    for i in k + 1..=r {
        total += ratio((r - i) as i64, i as i64);
    }
    Ok(total)
}

/// `r (ln r − ln k − 1)`; nonpositive exactly when `r ≤ k e`.
pub fn upper_bound_gap(r: usize, k: usize) -> Result<f64> {
    if k < 1 || r < 1 {
        return Err(Error::InvalidArgument("need r, k >= 1".into()));
    }
    let r = r as f64;
    Ok(r * (r.ln() - (k as f64).ln() - 1.0))
}

/// `x_i = i(1 − ε)/r` for `i ≤ k` and `x_i = (i + (r − i)ε)/r` for `i > k`.
/// Feasible for every `0 ≤ ε < 1`.
pub fn counterexample_at(r: usize, k: usize, eps: &BigRational) -> Result<Vec<BigRational>> {
    check_rk(r, k)?;
    if eps.is_negative() || eps >= &BigRational::one() {
        return Err(Error::InvalidArgument(format!("need 0 <= eps < 1, got {eps}")));
    }
    let rr = int(r as i64);
    Ok((1..=r)
        .map(|i| {
            let ii = int(i as i64);
            if i <= k {
                &ii * (BigRational::one() - eps) / &rr
            } else {
                (&ii + int((r - i) as i64) * eps) / &rr
            }
        })
        .collect())
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Counterexample {
    pub r: usize,
    pub k: usize,
    pub eps: String,
    pub eps_f64: f64,
    pub point: FeasiblePoint,
    pub exact_point: Vec<String>,
    pub feasible_exact: bool,
    pub product: f64,
    pub product_exact: String,
    pub bound_exact: String,
    pub exceeds_bound_exact: bool,
    /// `product / bound − 1`.
    pub relative_margin: f64,
}

/// A point of `X_{r,k}` with `∏ x_i > r!/r^r`, for `1 ≤ k < ⌊r/e⌋`. Starting
/// from `eps0` (default `1/(4r)`), `ε` is halved until the point is feasible
/// and beats the bound, both checked exactly.
pub fn counterexample_point(r: usize, k: usize, eps0: Option<BigRational>) -> Result<Counterexample> {
    check_rk(r, k)?;
    let floor = exact::floor_r_over_e(r);
    if k >= floor {
        return Err(Error::Precondition(format!("need k < floor(r/e) = {floor}, got k = {k}")));
    }
    let mut eps = eps0.unwrap_or_else(|| ratio(1, 4 * r as i64));
    if !eps.is_positive() || eps >= BigRational::one() {
        return Err(Error::InvalidArgument(format!("need 0 < eps < 1, got {eps}")));
    }
    let bound = exact::edge_density(r);
    for _ in 0..200 {
        let q = counterexample_at(r, k, &eps)?;
        let feas = check_feasible_exact(&q, r, k)?;
        let product = product_exact(&q);
        if feas.feasible && product > bound {
            let x: Vec<f64> = q.iter().map(exact::to_f64).collect();
            let ratio_to_bound = exact::to_f64(&(&product / &bound));
            return Ok(Counterexample {
                r,
                k,
                eps_f64: exact::to_f64(&eps),
                eps: eps.to_string(),
                point: FeasiblePoint::new(r, k, x)?,
                exact_point: q.iter().map(|v| v.to_string()).collect(),
                feasible_exact: true,
                product: exact::to_f64(&product),
                product_exact: product.to_string(),
                bound_exact: bound.to_string(),
                exceeds_bound_exact: true,
                relative_margin: ratio_to_bound - 1.0,
            });
        }
        eps /= int(2);
    }
    Err(Error::Numerical(format!("no admissible eps found for r = {r}, k = {k}")))
}

/// Result of [`quartic_inequality`].
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct Quartic {
    pub holds: bool,
    pub lhs: f64,
    pub rhs: f64,
    /// `(b − a)((1 − a)(1 − b) + ab)`.
    pub fprime_zero: f64,
}

/// Compares `(a+ε)(b−ε)(1−a−ε)(1−b+ε)` with `ab(1−a)(1−b)`. Requires
/// `0 < a ≤ b < 1/2` and `ε > 0`; `a = b` is admitted as the boundary case.
pub fn quartic_inequality(a: f64, b: f64, eps: f64) -> Result<Quartic> {
    if !(0.0 < a && a <= b && b < 0.5) || !eps.is_finite() || eps <= 0.0 {
        return Err(Error::InvalidArgument(format!("need 0 < a <= b < 1/2 and eps > 0, got a = {a}, b = {b}, eps = {eps}")));
    }
    let lhs = (a + eps) * (b - eps) * (1.0 - a - eps) * (1.0 - b + eps);
    let rhs = a * b * (1.0 - a) * (1.0 - b);
    Ok(Quartic { holds: lhs > rhs, lhs, rhs, fprime_zero: (b - a) * ((1.0 - a) * (1.0 - b) + a * b) })
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ProbeReport {
    pub r: usize,
    /// `⌊r/e⌋`.
    pub k: usize,
    pub exceeds_bound: bool,
    pub report: OptimizationReport,
}

/// Optimizes at `k = ⌊r/e⌋` and records whether the optimum beats `r!/r^r`.
pub fn probe_floor_case(r: usize) -> Result<ProbeReport> {
    let k = exact::floor_r_over_e(r);
    if k < 1 || k > r / 2 {
        return Err(Error::InvalidArgument(format!("floor(r/e) = {k} is outside [1, floor(r/2)] for r = {r}")));
    }
    let report = maximize_product(r, k, &MaxOptions { exact: true, ..MaxOptions::default() })?;
    Ok(ProbeReport { r, k, exceeds_bound: report.margin > 1e-10, report })
}

// ---------------------------------------------------------------------------
// Segments

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct Segment {
    pub left: usize,
    pub right: usize,
    pub central: bool,
    pub left_crossing: bool,
    pub right_crossing: bool,
    #[serde(rename = "super")]
    pub is_super: bool,
}

impl Segment {
    /// Number of indices, `R − L + 1`.
    pub fn length(&self) -> usize {
        self.right - self.left + 1
    }

    pub fn contains(&self, i: usize) -> bool {
        self.left <= i && i <= self.right
    }
}

/// The maximal uniform intervals of `(x_0, …, x_r)`. Consecutive maximal
/// intervals cannot share an index (a shared index would make their union
/// uniform), so they partition `{0, …, r}`.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct SegmentDecomposition {
    pub r: usize,
    pub k: usize,
    pub segments: Vec<Segment>,
    /// Right endpoint of the initial segment `[0, I]`.
    pub initial_length: usize,
}

impl SegmentDecomposition {
    /// The segment containing index `i`.
    pub fn segment_of(&self, i: usize) -> &Segment {
        self.segments.iter().find(|s| s.contains(i)).expect("segments cover 0..=r")
    }
}

fn classify(r: usize, k: usize, bounds: &[(usize, usize)]) -> SegmentDecomposition {
    let initial = bounds[0].1;
    let segments = bounds
        .iter()
        .map(|&(l, rr)| Segment {
            left: l,
            right: rr,
            central: l > k && rr + k < r,
            left_crossing: l <= k && rr > k,
            right_crossing: l + k < r && rr >= r - k,
            is_super: rr - l == initial,
        })
        .collect();
    SegmentDecomposition { r, k, segments, initial_length: initial }
}

fn segment_bounds(r: usize, uniform: impl Fn(usize, usize) -> bool) -> Vec<(usize, usize)> {
    let mut bounds = Vec::new();
    let mut left = 0;
    while left <= r {
        let mut right = left;
        while right < r && uniform(left, right + 1) {
            right += 1;
        }
        bounds.push((left, right));
        left = right + 1;
    }
    bounds
}

/// Segment structure of a feasible point, with uniformity tested up to `tol`.
pub fn segments(x: &FeasiblePoint, tol: f64) -> SegmentDecomposition {
    let x1 = x.at(1);
    let bounds = segment_bounds(x.r(), |l, i| (x.at(i) - x.at(l) - (i - l) as f64 * x1).abs() <= tol);
    classify(x.r(), x.k(), &bounds)
}

/// Segment structure of a rational point, with exact uniformity.
pub fn segments_exact(x: &[BigRational], k: usize) -> SegmentDecomposition {
    let r = x.len();
    let zero = BigRational::zero();
    let at = |i: usize| if i == 0 { &zero } else { &x[i - 1] };
    let bounds = segment_bounds(r, |l, i| at(i) - at(l) == int((i - l) as i64) * at(1));
    classify(r, k, &bounds)
}

// ---------------------------------------------------------------------------
// Perturbation

/// Signs `s_i ∈ {−1, 0, 1}` for `i = 0..=r` with `x'_i = x_i + s_i ε`.
fn perturbation_signs(dec: &SegmentDecomposition) -> Result<Vec<i8>> {
    let (r, k, big_i) = (dec.r, dec.k, dec.initial_length);
    if big_i + 1 > k {
        return Err(Error::Precondition(format!("initial segment [0, {big_i}] needs I <= k - 1 = {}", k as i64 - 1)));
    }
    let mut signs: Vec<Option<i8>> = vec![None; r + 1];
    let mut set = |i: usize, s: i8| -> Result<()> {
        match signs[i] {
            Some(prev) if prev != s => {
                Err(Error::Precondition(format!("perturbation rules disagree at index {i}")))
            }
            _ => {
                signs[i] = Some(s);
                Ok(())
            }
        }
    };
    set(big_i, 1)?;
    set(r - big_i, -1)?;
    for seg in dec.segments.iter().filter(|s| s.is_super) {
        let (l, rr) = (seg.left, seg.right);
        let endpoint = (l, rr) == (0, big_i) || (l, rr) == (r - big_i, r);
        if !seg.central && !endpoint {
            set(l, -1)?;
            set(rr, 1)?;
        }
        if seg.left_crossing && !seg.right_crossing {
            set(r - l, 1)?;
        }
        if seg.right_crossing && !seg.left_crossing {
            set(r - rr, -1)?;
        }
        if seg.central {
            set(rr, 1)?;
        }
    }
    if signs[0].is_some_and(|s| s != 0) || signs[r].is_some_and(|s| s != 0) {
        return Err(Error::Precondition("perturbation would move x_0 or x_r".into()));
    }
    Ok(signs.into_iter().map(|s| s.unwrap_or(0)).collect())
}

/// Applies the perturbation to a feasible point whose initial segment has
/// `I ≤ k − 1` and which satisfies `x_j + x_{r−j} = 1` for `j ≤ k`:
///
/// 1. `x_I += ε` and `x_{r−I} −= ε`;
/// 2. for every non-central super segment `[L, R]` other than `[0, I]` and
///    `[r − I, r]`: `x_L −= ε`, `x_R += ε`;
/// 3. for a left- but not right-crossing super segment: `x_{r−L} += ε`;
/// 4. for a right- but not left-crossing super segment: `x_{r−R} −= ε`;
/// 5. for a central super segment: `x_R += ε`;
/// 6. every other coordinate is unchanged.
pub fn perturb(x: &FeasiblePoint, eps: f64) -> Result<Vec<f64>> {
    let (r, k) = (x.r(), x.k());
    for j in 1..=k {
        if (x.at(j) + x.at(r - j) - 1.0).abs() > TAU_SEG {
            return Err(Error::Precondition(format!("x_{j} + x_{} != 1", r - j)));
        }
    }
    let signs = perturbation_signs(&segments(x, TAU_SEG))?;
    Ok((1..=r).map(|i| x.at(i) + signs[i] as f64 * eps).collect())
}

/// Exact counterpart of [`perturb`].
pub fn perturb_exact(x: &[BigRational], k: usize, eps: &BigRational) -> Result<Vec<BigRational>> {
    let r = x.len();
    check_rk(r, k)?;
    let zero = BigRational::zero();
    let at = |i: usize| if i == 0 { &zero } else { &x[i - 1] };
    for j in 1..=k {
        if !(at(j) + at(r - j)).is_one() {
            return Err(Error::Precondition(format!("x_{j} + x_{} != 1", r - j)));
        }
    }
    let signs = perturbation_signs(&segments_exact(x, k))?;
    Ok((1..=r).map(|i| at(i) + int(signs[i] as i64) * eps).collect())
}

#[derive(Debug, Clone, PartialEq)]
pub struct PerturbOutcome {
    pub eps: BigRational,
    pub point: Vec<BigRational>,
    pub improvement: BigRational,
}

/// Halves `ε` from `x_1 / 2` until the perturbed point is feasible and has a
/// strictly larger product, all in exact arithmetic.
pub fn perturb_bisect(x: &[BigRational], k: usize) -> Result<PerturbOutcome> {
    let r = x.len();
    let base = product_exact(x);
    let mut eps = &x[0] / int(2);
    for _ in 0..200 {
        let p = perturb_exact(x, k, &eps)?;
        if check_feasible_exact(&p, r, k)?.feasible {
            let prod = product_exact(&p);
            if prod > base {
                return Ok(PerturbOutcome { improvement: prod - &base, eps, point: p });
            }
        }
        eps /= int(2);
    }
    Err(Error::Numerical("no improving eps found".into()))
}

/// Random exact points meeting the perturbation preconditions: symmetric in
/// the first `k` coordinates, feasible, with initial segment `I ≤ k − 1`.
///
/// A point is built from positive integer steps `d_1, …, d_r` with `d_1 = 1`,
/// the last `k` steps mirroring the first `k`, and `x_i = (d_1 + … + d_i) / Σ d`.
/// Candidates failing exact feasibility or `I ≤ k − 1` are discarded.
pub fn perturbation_corpus(count: usize, seed: u64) -> Vec<(usize, Vec<BigRational>)> {
    let mut out = Vec::new();
    let mut attempt = 0u64;
    while out.len() < count && attempt < 200_000 {
        let mut rng = rng::stream(seed, attempt);
        attempt += 1;
        let r = rng.gen_range(5..=12usize);
        let k = rng.gen_range(2..=r / 2);
        if r - k < 2 {
            continue;
        }
        let mut d = vec![1i64; r + 1];
        for dm in &mut d[2..=r - k] {
            *dm = if rng.gen_bool(0.35) { 1 } else { rng.gen_range(2..=4) };
        }
        for j in 1..=k {
            d[r - j + 1] = d[j];
        }
        let total: i64 = d[1..].iter().sum();
        let mut acc = 0;
        let x: Vec<BigRational> = (1..=r)
            .map(|i| {
                acc += d[i];
                BigRational::new(BigInt::from(acc), BigInt::from(total))
            })
            .collect();
        let Ok(feas) = check_feasible_exact(&x, r, k) else { continue };
        if !feas.feasible || segments_exact(&x, k).initial_length + 1 > k {
            continue;
        }
        if out.iter().any(|(kk, p)| *kk == k && p == &x) {
            continue;
        }
        out.push((k, x));
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;

    fn q(v: &[(i64, i64)]) -> Vec<BigRational> {
        v.iter().map(|&(a, b)| ratio(a, b)).collect()
    }

    #[test]
    fn feasibility_examples() {
        for r in 2..=10 {
            for k in 1..=r / 2 {
                let x: Vec<f64> = (1..=r).map(|i| i as f64 / r as f64).collect();
                assert!(check_feasible(&x, r, k, TAU_FEAS).unwrap().feasible);
                let e = check_feasible_exact(&linear_point_exact(r), r, k).unwrap();
                assert!(e.feasible);
                assert_eq!(e.tight.len(), tent_pairs(r, k).len());
            }
        }
        let ones = vec![1.0; 4];
        let rep = check_feasible(&ones, 4, 1, TAU_FEAS).unwrap();
        assert!(!rep.feasible);
        assert!(rep.violations.iter().any(|v| v.constraint == Constraint::Tent { i: 1, j: 1 }));
        assert!(check_feasible(&[0.5], 4, 1, TAU_FEAS).is_err());
        assert!(check_feasible(&ones, 4, 3, TAU_FEAS).is_err());
        let pt = counterexample_at(6, 1, &ratio(1, 100)).unwrap();
        assert!(check_feasible_exact(&pt, 6, 1).unwrap().feasible);
    }

    #[test]
    fn counterexample_family_is_feasible_for_all_eps() {
        for r in 4..=12 {
            for k in 1..=r / 2 {
                for eps in [ratio(0, 1), ratio(1, 1000), ratio(1, 3), ratio(9, 10)] {
                    let pt = counterexample_at(r, k, &eps).unwrap();
                    assert!(check_feasible_exact(&pt, r, k).unwrap().feasible, "r={r} k={k} eps={eps}");
                }
            }
        }
        let pt = counterexample_at(7, 2, &BigRational::zero()).unwrap();
        assert_eq!(product_exact(&pt), exact::edge_density(7));
        assert!(counterexample_at(7, 2, &int(1)).is_err());
    }

    #[test]
    fn maximize_small_cases() {
        let rep = maximize_product(4, 2, &MaxOptions::default()).unwrap();
        assert!((rep.value - 0.09375).abs() < 1e-12);
        for (i, v) in rep.argmax.x().iter().enumerate() {
            assert!((v - (i + 1) as f64 / 4.0).abs() < 1e-9);
        }
        assert_eq!(rep.status, SolveStatus::Optimal);
        let rep = maximize_product(5, 2, &MaxOptions { exact: true, ..Default::default() }).unwrap();
        assert!((rep.value - 0.0384).abs() < 1e-12);
        let ex = rep.exact.unwrap();
        assert!(ex.feasible && ex.product_equals_bound && ex.kkt_exact && ex.all_tent_constraints_tight);
        let rep = maximize_product(6, 1, &MaxOptions::default()).unwrap();
        assert!(rep.value > 720.0 / 46656.0 + 1e-8);
        assert_eq!(rep.status, SolveStatus::Optimal);
        let rep = maximize_product(2, 1, &MaxOptions::default()).unwrap();
        assert_eq!(rep.argmax.x(), &[0.5, 1.0]);
    }

    #[test]
    fn random_starts_agree() {
        let base = maximize_product(9, 2, &MaxOptions::default()).unwrap().value;
        for seed in 0..10 {
            let v = maximize_product(9, 2, &MaxOptions { start: Start::Random { seed }, exact: false }).unwrap().value;
            assert!((v - base).abs() < 1e-8 * base, "seed {seed}");
        }
    }

    #[test]
    fn optimum_is_symmetric() {
        for r in 5..=10 {
            for k in 1..=r / 2 {
                let rep = maximize_product(r, k, &MaxOptions::default()).unwrap();
                for j in 1..=k {
                    assert!((rep.argmax.at(j) + rep.argmax.at(r - j) - 1.0).abs() < 1e-6, "r={r} k={k}");
                }
                assert!(segments(&rep.argmax, TAU_SEG).initial_length >= k, "r={r} k={k}");
            }
        }
    }

    #[test]
    fn kkt_examples() {
        for r in 4..=12 {
            let k = exact::ceil_r_over_e(r);
            let cert = kkt_certificate(&FeasiblePoint::linear(r, k).unwrap());
            assert!(cert.certified, "r={r}");
            assert!(cert.multipliers.iter().all(|m| m.lambda >= 0.0));
            assert!(kkt_certificate_exact(&linear_point_exact(r), r, k).unwrap().is_some());
        }
        let cert = kkt_certificate(&FeasiblePoint::linear(6, 1).unwrap());
        assert!(!cert.certified);
        let d = cert.direction.unwrap();
        let x = FeasiblePoint::linear(6, 1).unwrap();
        let slope: f64 = (0..5).map(|i| d[i] / x.x()[i]).sum();
        assert!(slope > 0.0);
        assert!(kkt_certificate_exact(&linear_point_exact(6), 6, 1).unwrap().is_none());
        // interior point: only the gradient matters and it improves
        let inner = FeasiblePoint::new(4, 1, vec![0.1, 0.3, 0.6, 1.0]).unwrap();
        let cert = kkt_certificate(&inner);
        assert!(!cert.certified);
        assert!(cert.active.is_empty());
    }

    #[test]
    fn improving_direction_keeps_active_constraints() {
        let x = FeasiblePoint::linear(9, 1).unwrap();
        let cert = kkt_certificate(&x);
        let d = cert.direction.unwrap();
        let at = |i: usize| if i == 0 { 0.0 } else { d[i - 1] };
        for &(i, j) in &cert.active {
            assert!(at(i) + at(j) - at(i + j) <= 1e-9);
        }
    }

    #[test]
    fn fprime_examples() {
        assert_eq!(fprime_zero(6, 1).unwrap(), ratio(27, 10));
        assert_eq!(fprime_zero(4, 2).unwrap(), ratio(-5, 3));
        assert_eq!(fprime_zero(5, 5).unwrap(), int(-5));
        assert!(fprime_zero(5, 0).is_err());
        assert!(fprime_zero(5, 6).is_err());
    }

    #[test]
    fn fprime_matches_numeric_derivative() {
        for (r, k) in [(6usize, 1usize), (9, 2), (12, 3)] {
            let h = 1e-7;
            let f = |e: f64| -> f64 {
                (1..=r)
                    .map(|i| {
                        let (i, rr) = (i as f64, r as f64);
                        if i as usize <= k { (i * (1.0 - e) / rr).ln() } else { ((i + (rr - i) * e) / rr).ln() }
                    })
                    .sum()
            };
            let numeric = (f(h) - f(0.0)) / h;
            assert!((numeric - exact::to_f64(&fprime_zero(r, k).unwrap())).abs() < 1e-5);
        }
    }

    #[test]
    fn gap_examples() {
        for r in 4..=40 {
            assert!(upper_bound_gap(r, exact::ceil_r_over_e(r)).unwrap() < 0.0);
        }
        assert!((upper_bound_gap(7, 7).unwrap() + 7.0).abs() < 1e-12);
        assert!(upper_bound_gap(6, 1).unwrap() > 0.0);
    }

    #[test]
    fn counterexample_examples() {
        let c = counterexample_point(6, 1, Some(ratio(1, 100))).unwrap();
        assert!(c.feasible_exact && c.exceeds_bound_exact);
        assert_eq!(c.eps, "1/100");
        let c = counterexample_point(9, 2, None).unwrap();
        assert!(c.relative_margin > 0.0);
        assert!(matches!(counterexample_point(6, 2, None), Err(Error::Precondition(_))));
        assert!(counterexample_point(6, 1, Some(BigRational::zero())).is_err());
    }

    #[test]
    fn quartic_examples() {
        let qv = quartic_inequality(0.1, 0.3, 1e-4).unwrap();
        assert!(qv.holds);
        assert!((qv.fprime_zero - 0.132).abs() < 1e-12);
        assert_eq!(quartic_inequality(0.2, 0.2, 1e-3).unwrap().fprime_zero, 0.0);
        assert!(!quartic_inequality(0.1, 0.3, 0.25).unwrap().holds);
        assert!(quartic_inequality(0.3, 0.1, 0.1).is_err());
        assert!(quartic_inequality(0.1, 0.6, 0.1).is_err());
        assert!(quartic_inequality(0.1, 0.3, 0.0).is_err());
    }

    #[test]
    fn probe_examples() {
        let p = probe_floor_case(3).unwrap();
        assert!((p.report.value - 2.0 / 9.0).abs() < 1e-12);
        assert!(!p.exceeds_bound);
        let p = probe_floor_case(6).unwrap();
        assert_eq!(p.k, 2);
        let p = probe_floor_case(4).unwrap();
        assert_eq!(p.k, 1);
        assert!(probe_floor_case(2).is_err());
    }

    #[test]
    fn segment_examples() {
        for r in 4..=9 {
            let d = segments(&FeasiblePoint::linear(r, 1).unwrap(), TAU_SEG);
            assert_eq!(d.segments.len(), 1);
            assert_eq!(d.initial_length, r);
            assert!(!d.segments[0].central);
        }
        let c = counterexample_point(6, 1, Some(ratio(1, 100))).unwrap();
        let d = segments(&c.point, TAU_SEG);
        let b: Vec<(usize, usize)> = d.segments.iter().map(|s| (s.left, s.right)).collect();
        assert_eq!(b, vec![(0, 1), (2, 6)]);
        assert_eq!(d.initial_length, 1);
        let x = q(&[(1, 9), (3, 9), (4, 9), (6, 9), (7, 9), (1, 1)]);
        let d = segments_exact(&x, 2);
        assert_eq!(d.initial_length, 1);
        assert!(d.segments.iter().filter(|s| s.is_super).all(|s| s.length() == 2));
    }

    #[test]
    fn perturb_examples() {
        let lin = FeasiblePoint::linear(8, 3).unwrap();
        assert!(matches!(perturb(&lin, 0.01), Err(Error::Precondition(_))));
        let corpus = perturbation_corpus(5, 1);
        assert_eq!(corpus.len(), 5);
        for (k, x) in &corpus {
            let r = x.len();
            let fx: Vec<f64> = x.iter().map(exact::to_f64).collect();
            let p = FeasiblePoint::new(r, *k, fx.clone()).unwrap();
            assert_eq!(perturb(&p, 0.0).unwrap(), fx);
            let out = perturb_bisect(x, *k).unwrap();
            assert!(out.improvement.is_positive());
        }
    }

    #[test]
    fn corpus_points_obey_segment_lemmas() {
        for (k, x) in perturbation_corpus(40, 7) {
            let r = x.len();
            let d = segments_exact(&x, k);
            let big_i = d.initial_length;
            assert!(d.segments.iter().all(|s| s.length() <= big_i + 1));
            let zero = BigRational::zero();
            let at = |i: usize| if i == 0 { &zero } else { &x[i - 1] };
            for (i, j) in tent_pairs(r, k) {
                let (s1, s2) = (d.segment_of(i), d.segment_of(i + j));
                if s1.left < s2.left && (s2.left - s1.left > j || (s2.right - s1.right > j && (s1.right + 1).min(j) <= k)) {
                    assert!(at(i) + at(j) < *at(i + j), "r={r} k={k} ({i},{j})");
                }
            }
        }
    }
}
