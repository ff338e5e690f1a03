//! Certificates: a claim, the evidence supporting it, and an anchor into the
//! citation index. Verification re-checks the evidence directly and never
//! re-runs an optimizer or a search.

use std::str::FromStr;

use hypertent::exact::{self, edge_density};
use hypertent::hom::VertexMap;
use hypertent::lagrangian::edge_polynomial_exact;
use hypertent::region::{self, check_feasible, check_feasible_exact, tent_pairs, TAU_FEAS, TAU_KKT};
use hypertent::{Hypergraph, PartialHypergraph};
use num_bigint::BigInt;
use num_rational::BigRational;
use serde::{Deserialize, Serialize};

/// Slack below which a constraint counts as active when checking
/// complementary slackness of float multipliers.
const ACTIVE_SLACK: f64 = 1e-7;

pub struct Citation {
    pub anchor: &'static str,
    pub statement: &'static str,
}

/// The results certificates may point at.
pub const CITATIONS: &[Citation] = &[
    Citation {
        anchor: "product-maximum",
        statement: "For k = ceil(r/e) <= floor(r/2), the maximum of x_1 x_2 ... x_r over X_{r,k} is r!/r^r, attained only at x_i = i/r.",
    },
    Citation {
        anchor: "small-k-construction",
        statement: "For 1 <= k < floor(r/e), an explicit perturbation of x_i = i/r lies in X_{r,k} and has product above r!/r^r.",
    },
    Citation {
        anchor: "blowup-lower-bound",
        statement: "The blowup density r! L(H) is at least r! P(w) for every point w of the simplex; if H is F-hom-free it bounds the Turan density of F from below.",
    },
    Citation {
        anchor: "homomorphism",
        statement: "A vertex map sending every edge (every maximal edge, for partial hypergraphs) injectively into an edge of the host is a homomorphism.",
    },
];

pub fn resolve_anchor(anchor: &str) -> Option<&'static Citation> {
    CITATIONS.iter().find(|c| c.anchor == anchor)
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum Claim {
    /// `max ∏ x_i over X_{r,k} = value`; `equals_bound` additionally claims `value = r!/r^r`.
    ProductMaximum { r: usize, k: usize, value: f64, bound: String, equals_bound: bool },
    /// Some point of `X_{r,k}` has product strictly above `bound = r!/r^r`.
    ExceedsBound { r: usize, k: usize, bound: String },
    /// `r! L(host) >= bound`.
    BlowupLowerBound { bound: String },
    /// The source maps homomorphically into the host.
    Homomorphism,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FloatMultiplier {
    pub i: usize,
    pub j: usize,
    pub lambda: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ExactMultiplier {
    pub i: usize,
    pub j: usize,
    pub lambda: String,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ExactKktEvidence {
    pub point: Vec<String>,
    pub multipliers: Vec<ExactMultiplier>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum Evidence {
    /// A point with KKT multipliers for `max Σ log x_i`, optionally with an
    /// exact rational version.
    Kkt { point: Vec<f64>, multipliers: Vec<FloatMultiplier>, exact: Option<ExactKktEvidence> },
    /// A rational point, entries written as fractions.
    ExactPoint { point: Vec<String> },
    /// A rational point of the simplex on the host's vertices.
    SimplexWitness { host: Hypergraph, weights: Vec<String> },
    VertexMap { source: Hypergraph, host: Hypergraph, map: Vec<usize> },
    PartialVertexMap { source: PartialHypergraph, host: Hypergraph, map: Vec<usize> },
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Certificate {
    pub claim: Claim,
    pub evidence: Evidence,
    pub anchor: String,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Verdict {
    pub anchor: String,
    pub claim: String,
    /// The indexed statement the anchor points at.
    pub cited: Option<String>,
    pub passed: bool,
    /// Every failed condition, named.
    pub failures: Vec<String>,
}

fn claim_name(c: &Claim) -> &'static str {
    match c {
        Claim::ProductMaximum { .. } => "product_maximum",
        Claim::ExceedsBound { .. } => "exceeds_bound",
        Claim::BlowupLowerBound { .. } => "blowup_lower_bound",
        Claim::Homomorphism => "homomorphism",
    }
}

fn parse_rational(s: &str, what: &str, failures: &mut Vec<String>) -> Option<BigRational> {
    match BigRational::from_str(s.trim()) {
        Ok(q) => Some(q),
        Err(_) => {
            failures.push(format!("{what}: cannot parse '{s}' as a fraction"));
            None
        }
    }
}

fn parse_all(items: &[String], what: &str, failures: &mut Vec<String>) -> Option<Vec<BigRational>> {
    let parsed: Vec<Option<BigRational>> = items.iter().map(|s| parse_rational(s, what, failures)).collect();
    parsed.into_iter().collect()
}

pub fn verify(cert: &Certificate) -> Verdict {
    let mut failures = Vec::new();
    if resolve_anchor(&cert.anchor).is_none() {
        failures.push(format!("anchor '{}' is not in the citation index", cert.anchor));
    }
    match (&cert.claim, &cert.evidence) {
        (Claim::ProductMaximum { r, k, value, bound, equals_bound }, Evidence::Kkt { point, multipliers, exact }) => {
            verify_product_maximum(*r, *k, *value, bound, *equals_bound, point, multipliers, exact.as_ref(), &mut failures)
        }
        (Claim::ExceedsBound { r, k, bound }, Evidence::ExactPoint { point }) => {
            verify_exceeds_bound(*r, *k, bound, point, &mut failures)
        }
        (Claim::BlowupLowerBound { bound }, Evidence::SimplexWitness { host, weights }) => {
            verify_blowup_bound(bound, host, weights, &mut failures)
        }
        (Claim::Homomorphism, Evidence::VertexMap { source, host, map }) => {
            let m = VertexMap { map: map.clone() };
            if map.len() != source.n() || !m.is_homomorphism(source, host) {
                failures.push("vertex map is not a homomorphism".into());
            }
        }
        (Claim::Homomorphism, Evidence::PartialVertexMap { source, host, map }) => {
            let m = VertexMap { map: map.clone() };
            if map.len() != source.n() || !m.is_partial_homomorphism(source, host) {
                failures.push("vertex map is not a partial homomorphism".into());
            }
        }
        _ => failures.push("evidence kind does not match the claim".into()),
    }
    Verdict {
        anchor: cert.anchor.clone(),
        claim: claim_name(&cert.claim).into(),
        cited: resolve_anchor(&cert.anchor).map(|c| c.statement.to_string()),
        passed: failures.is_empty(),
        failures,
    }
}

fn check_bound_string(r: usize, bound: &str, failures: &mut Vec<String>) -> Option<BigRational> {
    let expected = edge_density(r);
    let given = parse_rational(bound, "bound", failures)?;
    if given != expected {
        failures.push(format!("bound {given} is not r!/r^r = {expected}"));
    }
    Some(expected)
}

/// `a_c · y` coefficient of `x_v` (1-indexed, `v < r`) in constraint `(i, j)`.
fn coefficient(r: usize, (i, j): (usize, usize), v: usize) -> i64 {
    let mut a = 0;
    if v == i {
        a += 1;
    }
    if v == j {
        a += 1;
    }
    if i + j < r && v == i + j {
        a -= 1;
    }
    a
}

#[allow(clippy::too_many_arguments)]
fn verify_product_maximum(
    r: usize,
    k: usize,
    value: f64,
    bound: &str,
    equals_bound: bool,
    point: &[f64],
    multipliers: &[FloatMultiplier],
    exact_evidence: Option<&ExactKktEvidence>,
    failures: &mut Vec<String>,
) {
    let Some(bound_q) = check_bound_string(r, bound, failures) else { return };
    let pairs = tent_pairs(r, k);
    match check_feasible(point, r, k, TAU_FEAS) {
        Ok(rep) if rep.feasible => {}
        Ok(rep) => failures.push(format!("point violates {} constraint(s)", rep.violations.len())),
        Err(e) => {
            failures.push(format!("point rejected: {e}"));
            return;
        }
    }
    let product: f64 = point.iter().product();
    if (product - value).abs() > 1e-9 * value.abs().max(1e-300) {
        failures.push(format!("value {value:e} does not match the product {product:e} at the point"));
    }
    if equals_bound && (value / exact::to_f64(&bound_q) - 1.0).abs() > 1e-6 {
        failures.push("value is not within 1e-6 relative of r!/r^r".into());
    }
    let at = |i: usize| if i == 0 { 0.0 } else { point[i - 1] };
    let mut grad: Vec<f64> = (1..r).map(|v| 1.0 / at(v)).collect();
    for m in multipliers {
        if !pairs.contains(&(m.i, m.j)) {
            failures.push(format!("multiplier for ({}, {}) names no constraint", m.i, m.j));
            continue;
        }
        if m.lambda.is_nan() || m.lambda < 0.0 {
            failures.push(format!("multiplier for ({}, {}) is negative", m.i, m.j));
        }
        let rhs = if m.i + m.j == r { 1.0 } else { at(m.i + m.j) };
        let slack = rhs - at(m.i) - at(m.j);
        if m.lambda > 1e-9 && slack > ACTIVE_SLACK {
            failures.push(format!("complementary slackness fails at ({}, {}): slack {slack:e}", m.i, m.j));
        }
        for v in 1..r {
            grad[v - 1] -= m.lambda * coefficient(r, (m.i, m.j), v) as f64;
        }
    }
    let residual = grad.iter().fold(0.0f64, |a, g| a.max(g.abs()));
    if residual.is_nan() || residual > TAU_KKT {
        failures.push(format!("stationarity residual {residual:e} exceeds {TAU_KKT:e}"));
    }
    if let Some(ev) = exact_evidence {
        verify_exact_kkt(r, k, ev, point, equals_bound, &bound_q, failures);
    } else if equals_bound {
        failures.push("equality with r!/r^r is claimed without exact evidence".into());
    }
}

fn verify_exact_kkt(
    r: usize,
    k: usize,
    ev: &ExactKktEvidence,
    point: &[f64],
    equals_bound: bool,
    bound: &BigRational,
    failures: &mut Vec<String>,
) {
    let Some(q) = parse_all(&ev.point, "exact point", failures) else { return };
    if q.len() != r {
        failures.push(format!("exact point has {} entries, expected {r}", q.len()));
        return;
    }
    if q.iter().zip(point).any(|(a, b)| (exact::to_f64(a) - b).abs() > 1e-6) {
        failures.push("exact point is not within 1e-6 of the float point".into());
    }
    let feas = match check_feasible_exact(&q, r, k) {
        Ok(f) => f,
        Err(e) => {
            failures.push(format!("exact point rejected: {e}"));
            return;
        }
    };
    if !feas.feasible {
        failures.push(format!("exact point violates {} constraint(s)", feas.violated.len()));
    }
    let product = region::product_exact(&q);
    if equals_bound && &product != bound {
        failures.push(format!("exact product {product} differs from r!/r^r = {bound}"));
    }
    let pairs = tent_pairs(r, k);
    let zero = BigRational::from_integer(BigInt::from(0));
    let at = |i: usize| if i == 0 { zero.clone() } else { q[i - 1].clone() };
    let mut grad: Vec<BigRational> = (1..r).map(|v| BigRational::from_integer(BigInt::from(1)) / at(v)).collect();
    for m in &ev.multipliers {
        let Some(lambda) = parse_rational(&m.lambda, "exact multiplier", failures) else { continue };
        if !pairs.contains(&(m.i, m.j)) {
            failures.push(format!("exact multiplier for ({}, {}) names no constraint", m.i, m.j));
            continue;
        }
        if lambda < zero {
            failures.push(format!("exact multiplier for ({}, {}) is negative", m.i, m.j));
        }
        if lambda != zero && !feas.tight.contains(&(m.i, m.j)) {
            failures.push(format!("exact complementary slackness fails at ({}, {})", m.i, m.j));
        }
        for v in 1..r {
            let a = coefficient(r, (m.i, m.j), v);
            if a != 0 {
                grad[v - 1] -= &lambda * BigRational::from_integer(BigInt::from(a));
            }
        }
    }
    if let Some(v) = grad.iter().position(|g| g != &zero) {
        failures.push(format!("exact stationarity fails at coordinate {}", v + 1));
    }
}

fn verify_exceeds_bound(r: usize, k: usize, bound: &str, point: &[String], failures: &mut Vec<String>) {
    let Some(bound_q) = check_bound_string(r, bound, failures) else { return };
    let Some(q) = parse_all(point, "point", failures) else { return };
    match check_feasible_exact(&q, r, k) {
        Ok(f) if f.feasible => {}
        Ok(f) => failures.push(format!("point violates {} constraint(s)", f.violated.len())),
        Err(e) => {
            failures.push(format!("point rejected: {e}"));
            return;
        }
    }
    let product = region::product_exact(&q);
    if product <= bound_q {
        failures.push(format!("product {product} does not exceed {bound_q}"));
    }
}

fn verify_blowup_bound(bound: &str, host: &Hypergraph, weights: &[String], failures: &mut Vec<String>) {
    let Some(bound_q) = parse_rational(bound, "bound", failures) else { return };
    let Some(w) = parse_all(weights, "weights", failures) else { return };
    let zero = BigRational::from_integer(BigInt::from(0));
    if w.iter().any(|v| v < &zero) {
        failures.push("witness has a negative weight".into());
    }
    let total = w.iter().fold(zero.clone(), |a, b| a + b);
    if total != BigRational::from_integer(BigInt::from(1)) {
        failures.push(format!("witness weights sum to {total}, not 1"));
    }
    match edge_polynomial_exact(host, &w) {
        Ok(p) => {
            let fact: BigInt = (1..=host.r()).map(BigInt::from).product();
            let value = p * BigRational::from_integer(fact);
            if value < bound_q {
                failures.push(format!("r! P(w) = {value} is below the claimed bound {bound_q}"));
            }
        }
        Err(e) => failures.push(format!("witness rejected: {e}")),
    }
}
