use std::fs;
use std::io::Write;
use std::path::Path;
use std::str::FromStr;
use std::time::Duration;

use anyhow::{anyhow, bail, Context, Result};
use hypertent::entropy::{self, EdgeDistribution};
use hypertent::exact::{self, edge_density};
use hypertent::hom::{self, SearchBudget};
use hypertent::hypergraph::{make_general_tent, make_partial_tent, make_tent, tent_family};
use hypertent::lagrangian::{self, edge_polynomial_exact};
use hypertent::region::{self, FeasiblePoint, MaxOptions, OptimizationReport, SolveStatus, Start, TAU_SEG};
use hypertent::{Family, Hypergraph, PartialHypergraph, TentSpec};
use num_bigint::BigInt;
use num_rational::BigRational;
use serde::de::DeserializeOwned;
use serde::Serialize;
use serde_json::{json, Value};

use crate::certificate::{self, Certificate, Claim, Evidence, ExactKktEvidence, ExactMultiplier, FloatMultiplier};
use crate::output::{canonical_json, csv_view};
use crate::{BudgetArgs, Cli, Command, EntropyCmd, Format, HomCmd, ReportCmd, RegionCmd, TentCmd};

/// What a command produced. `ok` is false when a checked property failed.
struct Outcome {
    result: Value,
    certificates: Vec<Certificate>,
    ok: bool,
}

impl Outcome {
    fn plain(result: impl Serialize) -> Result<Self> {
        Ok(Self { result: serde_json::to_value(result)?, certificates: Vec::new(), ok: true })
    }
}

/// Runs the command and writes its output; `Ok(false)` signals a failed check.
pub fn run(cli: &Cli) -> Result<bool> {
    let outcome = dispatch(cli)?;
    let text = match cli.format {
        Format::Json => {
            let doc = json!({
                "config": serde_json::to_value(cli)?,
                "result": outcome.result,
                "certificates": serde_json::to_value(&outcome.certificates)?,
            });
            canonical_json(&doc)
        }
        Format::Csv => csv_view(&outcome.result)?,
    };
    match &cli.output {
        Some(path) => fs::write(path, text).with_context(|| format!("writing {}", path.display()))?,
        None => std::io::stdout().lock().write_all(text.as_bytes())?,
    }
    Ok(outcome.ok)
}

fn dispatch(cli: &Cli) -> Result<Outcome> {
    match &cli.command {
        Command::Tent(cmd) => tent(cmd),
        Command::Hom(cmd) => hom_cmd(cmd),
        Command::Lagrangian(args) => lagrangian_cmd(&args.host, args.restarts, cli.tol.unwrap_or(1e-12), cli.seed),
        Command::Region(cmd) => region_cmd(cmd, cli),
        Command::Entropy(cmd) => entropy_cmd(cmd, cli.seed),
        Command::Report(ReportCmd::TheoremTable { r_min, r_max }) => theorem_table(*r_min, *r_max),
        Command::Report(ReportCmd::CounterexampleTable { r_min, r_max }) => counterexample_table(*r_min, *r_max),
        Command::Verify { certificate } => verify_cmd(certificate),
    }
}

fn read_value(path: &Path) -> Result<Value> {
    let text = fs::read_to_string(path).with_context(|| format!("reading {}", path.display()))?;
    serde_json::from_str(&text).with_context(|| format!("parsing {}", path.display()))
}

/// Reads an input object, unwrapping the `result` of a full output document
/// so that one command's output can feed the next.
fn read_json<T: DeserializeOwned>(path: &Path) -> Result<T> {
    let mut value = read_value(path)?;
    if let Value::Object(map) = &mut value {
        if map.contains_key("config") {
            if let Some(inner) = map.remove("result") {
                value = inner;
            }
        }
    }
    serde_json::from_value(value).with_context(|| format!("parsing {}", path.display()))
}

fn budget(b: &BudgetArgs) -> Result<SearchBudget> {
    if !b.timeout_secs.is_finite() || b.timeout_secs <= 0.0 {
        bail!(hypertent::Error::InvalidArgument("timeout must be positive".into()));
    }
    Ok(SearchBudget::new(b.max_nodes, Duration::from_secs_f64(b.timeout_secs))?)
}


fn fraction(q: &BigRational) -> String {
    q.to_string()
}

// ---------------------------------------------------------------------------

fn tent(cmd: &TentCmd) -> Result<Outcome> {
    match cmd {
        TentCmd::Make { r, i, lambda, partial } => {
            let spec = match (lambda, i) {
                (Some(parts), None) => TentSpec::new(parts.clone())?,
                (None, Some(i)) => {
                    let r = r.ok_or_else(|| hypertent::Error::InvalidArgument("--i needs --r".into()))?;
                    if *i == 0 || *i > r / 2 {
                        bail!(hypertent::Error::InvalidArgument(format!("need 1 <= i <= r/2, got i = {i}")));
                    }
                    TentSpec::new(vec![r - i, *i])?
                }
                _ => bail!(hypertent::Error::InvalidArgument("give exactly one of --i or --lambda".into())),
            };
            if let Some(r) = r {
                if *r != spec.r() {
                    bail!(hypertent::Error::InvalidArgument(format!("--r {r} does not match the partition sum {}", spec.r())));
                }
            }
            let parts = spec.parts();
            if *partial {
                if parts.len() != 2 {
                    bail!(hypertent::Error::InvalidArgument("partial tents are defined for two parts".into()));
                }
                return Outcome::plain(make_partial_tent(spec.r(), parts[1])?);
            }
            let h = if parts.len() == 2 { make_tent(spec.r(), parts[1])? } else { make_general_tent(&spec)? };
            Outcome::plain(h)
        }
        TentCmd::Family { r, k } => Outcome::plain(json!({ "r": r, "k": k, "members": tent_family(*r, *k)?.members() })),
    }
}

fn hom_cmd(cmd: &HomCmd) -> Result<Outcome> {
    match cmd {
        HomCmd::Check { source, host, partial, injective, budget: b } => {
            let b = budget(b)?;
            let h: Hypergraph = read_json(host)?;
            let (found, evidence) = if *partial {
                let f: PartialHypergraph = read_json(source)?;
                let m = hom::find_partial_homomorphism(&f, &h, &b)?;
                let ev = m.as_ref().map(|m| Evidence::PartialVertexMap { source: f.clone(), host: h.clone(), map: m.map.clone() });
                (m, ev)
            } else {
                let f: Hypergraph = read_json(source)?;
                let m = if *injective { hom::find_subgraph_embedding(&f, &h, &b)? } else { hom::find_homomorphism(&f, &h, &b)? };
                let ev = m.as_ref().map(|m| Evidence::VertexMap { source: f.clone(), host: h.clone(), map: m.map.clone() });
                (m, ev)
            };
            let certificates = evidence
                .map(|evidence| Certificate { claim: Claim::Homomorphism, evidence, anchor: "homomorphism".into() })
                .into_iter()
                .collect();
            Ok(Outcome {
                result: json!({ "found": found.is_some(), "map": found, "injective": injective, "partial": partial }),
                certificates,
                ok: true,
            })
        }
        HomCmd::ExactTuran { n, family, forbid, budget: b } => {
            let b = budget(b)?;
            let fam = match family {
                Some((r, k)) => tent_family(*r, *k)?,
                None => Family::new(forbid.iter().map(|p| read_json(p)).collect::<Result<_>>()?)?,
            };
            Outcome::plain(hom::brute_force_ex(*n, &fam, &b)?)
        }
    }
}

fn lagrangian_cmd(host: &Path, restarts: usize, tol: f64, seed: u64) -> Result<Outcome> {
    let h: Hypergraph = read_json(host)?;
    if tol.is_nan() || tol <= 0.0 {
        bail!(hypertent::Error::InvalidArgument("tolerance must be positive".into()));
    }
    let res = lagrangian::lagrangian_seeded(&h, restarts.max(1), tol, seed);
    let q = exact::rationalize_simplex(res.witness.weights(), 1000)?;
    let fact: BigInt = (1..=h.r()).map(BigInt::from).product();
    let certified = edge_polynomial_exact(&h, &q)? * BigRational::from_integer(fact);
    let mut result = serde_json::to_value(&res)?;
    result["certified_blowup_lower_bound"] = json!(fraction(&certified));
    let cert = Certificate {
        claim: Claim::BlowupLowerBound { bound: fraction(&certified) },
        evidence: Evidence::SimplexWitness { host: h, weights: q.iter().map(fraction).collect() },
        anchor: "blowup-lower-bound".into(),
    };
    Ok(Outcome { result, certificates: vec![cert], ok: true })
}

// ---------------------------------------------------------------------------

/// Certificate for an optimization report whose KKT conditions certify it.
fn optimum_certificate(rep: &OptimizationReport) -> Result<Option<Certificate>> {
    if rep.status != SolveStatus::Optimal {
        return Ok(None);
    }
    let (r, k) = (rep.r, rep.k);
    let mut exact_evidence = None;
    let mut equals_bound = false;
    if let Some(check) = &rep.exact {
        if check.feasible && check.kkt_exact {
            let q: Vec<BigRational> = check
                .point
                .iter()
                .map(|s| BigRational::from_str(s).map_err(|e| anyhow!("bad fraction {s}: {e}")))
                .collect::<Result<_>>()?;
            if let Some(ex) = region::kkt_certificate_exact(&q, r, k)? {
                equals_bound = check.product_equals_bound;
                exact_evidence = Some(ExactKktEvidence {
                    point: check.point.clone(),
                    multipliers: ex
                        .multipliers
                        .iter()
                        .map(|((i, j), l)| ExactMultiplier { i: *i, j: *j, lambda: fraction(l) })
                        .collect(),
                });
            }
        }
    }
    Ok(Some(Certificate {
        claim: Claim::ProductMaximum { r, k, value: rep.value, bound: rep.bound_exact.clone(), equals_bound },
        evidence: Evidence::Kkt {
            point: rep.argmax.x().to_vec(),
            multipliers: rep.kkt.multipliers.iter().map(|m| FloatMultiplier { i: m.i, j: m.j, lambda: m.lambda }).collect(),
            exact: exact_evidence,
        },
        anchor: "product-maximum".into(),
    }))
}

fn counterexample_certificate(c: &region::Counterexample) -> Certificate {
    Certificate {
        claim: Claim::ExceedsBound { r: c.r, k: c.k, bound: c.bound_exact.clone() },
        evidence: Evidence::ExactPoint { point: c.exact_point.clone() },
        anchor: "small-k-construction".into(),
    }
}

fn region_cmd(cmd: &RegionCmd, cli: &Cli) -> Result<Outcome> {
    match cmd {
        RegionCmd::Max { r, k, exact, random_start } => {
            let start = if *random_start { Start::Random { seed: cli.seed } } else { Start::Power { p: 1.5 } };
            let rep = region::maximize_product(*r, *k, &MaxOptions { start, exact: *exact })?;
            let certificates = optimum_certificate(&rep)?.into_iter().collect();
            let ok = rep.status == SolveStatus::Optimal;
            Ok(Outcome { result: serde_json::to_value(&rep)?, certificates, ok })
        }
        RegionCmd::Counterexample { r, k, eps } => {
            let eps0 = eps
                .as_deref()
                .map(|s| {
                    BigRational::from_str(s.trim())
                        .map_err(|_| hypertent::Error::InvalidArgument(format!("cannot parse eps '{s}' as a fraction")))
                })
                .transpose()?;
            let c = region::counterexample_point(*r, *k, eps0)?;
            let cert = counterexample_certificate(&c);
            Ok(Outcome { result: serde_json::to_value(&c)?, certificates: vec![cert], ok: true })
        }
        RegionCmd::Segments { point } => {
            let raw: Value = read_json(point)?;
            segments_cmd(&raw, cli.tol.unwrap_or(TAU_SEG))
        }
        RegionCmd::ProbeFloor { r } => Outcome::plain(region::probe_floor_case(*r)?),
    }
}

fn segments_cmd(raw: &Value, tol: f64) -> Result<Outcome> {
    let bad = |m: &str| hypertent::Error::InvalidArgument(format!("point file: {m}"));
    let r = raw.get("r").and_then(Value::as_u64).ok_or_else(|| bad("missing r"))? as usize;
    let k = raw.get("k").and_then(Value::as_u64).ok_or_else(|| bad("missing k"))? as usize;
    let xs = raw.get("x").and_then(Value::as_array).ok_or_else(|| bad("missing x"))?;
    if xs.iter().any(Value::is_string) {
        let q: Vec<BigRational> = xs
            .iter()
            .map(|v| match v {
                Value::String(s) => BigRational::from_str(s.trim()).map_err(|_| bad(&format!("bad fraction '{s}'"))),
                Value::Number(n) => n
                    .as_f64()
                    .and_then(BigRational::from_float)
                    .ok_or_else(|| bad("bad number")),
                _ => Err(bad("entries must be numbers or fraction strings")),
            })
            .collect::<std::result::Result<_, _>>()?;
        let feas = region::check_feasible_exact(&q, r, k)?;
        if !feas.feasible {
            bail!(hypertent::Error::Infeasible(format!("violated constraints {:?}", feas.violated)));
        }
        return Outcome::plain(json!({ "exact": true, "decomposition": region::segments_exact(&q, k) }));
    }
    let x: Vec<f64> = xs.iter().map(|v| v.as_f64().ok_or_else(|| bad("entries must be numbers"))).collect::<std::result::Result<_, _>>()?;
    let p = FeasiblePoint::new(r, k, x)?;
    Outcome::plain(json!({ "exact": false, "tol": tol, "decomposition": region::segments(&p, tol) }))
}

// ---------------------------------------------------------------------------

fn entropy_cmd(cmd: &EntropyCmd, seed: u64) -> Result<Outcome> {
    match cmd {
        EntropyCmd::Density { host, restarts } => {
            let h: Hypergraph = read_json(host)?;
            Outcome::plain(entropy::entropic_density(&h, *restarts, seed)?)
        }
        EntropyCmd::Ratio { host, weights } => {
            let h: Hypergraph = read_json(host)?;
            let raw: Value = read_json(weights)?;
            let w: Vec<f64> = serde_json::from_value(raw.get("weights").cloned().unwrap_or(raw))
                .context("weights must be an array of numbers or {\"weights\": [...]}")?;
            let d = EdgeDistribution::new(h, w)?;
            let seq = entropy::ratio_sequence(&d);
            let r = d.r();
            let slack: Vec<Value> = (1..=r / 2).map(|k| json!({ "k": k, "worst_slack": seq.worst_slack(k) })).collect();
            Outcome::plain(json!({
                "x": seq.x,
                "log2_product": seq.log2_product,
                "product": seq.product(),
                "vertex_entropy": d.tuple_entropy(1),
                "joint_entropy": d.tuple_entropy(r),
                "slack_by_k": slack,
            }))
        }
        EntropyCmd::VerifyRatio { family, host, trials, budget: b } => {
            let b = budget(b)?;
            let (r, k) = *family;
            let h: Hypergraph = read_json(host)?;
            if h.r() != r {
                bail!(hypertent::Error::UniformityMismatch { left: r, right: h.r() });
            }
            let rep = entropy::verify_ratio_constraints(&h, k, *trials, &b, seed)?;
            let ok = rep.all_inside;
            Ok(Outcome { result: serde_json::to_value(&rep)?, certificates: Vec::new(), ok })
        }
    }
}

// ---------------------------------------------------------------------------

const MAX_TABLE_R: usize = 40;

fn check_range(r_min: usize, r_max: usize) -> Result<()> {
    if r_min < 2 || r_min > r_max || r_max > MAX_TABLE_R {
        bail!(hypertent::Error::InvalidArgument(format!("need 2 <= r_min <= r_max <= {MAX_TABLE_R}")));
    }
    Ok(())
}

fn theorem_table(r_min: usize, r_max: usize) -> Result<Outcome> {
    check_range(r_min, r_max)?;
    let mut rows = Vec::new();
    let mut notes = Vec::new();
    let mut certificates = Vec::new();
    let mut ok = true;
    for r in r_min..=r_max {
        let k = exact::ceil_r_over_e(r);
        if k > r / 2 {
            notes.push(format!("r = {r} excluded: ceil(r/e) = {k} exceeds floor(r/2) = {}", r / 2));
            continue;
        }
        let rep = region::maximize_product(r, k, &MaxOptions { exact: true, ..MaxOptions::default() })?;
        let deviation = rep
            .argmax
            .x()
            .iter()
            .enumerate()
            .fold(0.0f64, |a, (i, &x)| a.max((x - (i + 1) as f64 / r as f64).abs()));
        let check = rep.exact.as_ref();
        let row_ok = rep.status == SolveStatus::Optimal && check.is_some_and(|c| c.product_equals_bound && c.kkt_exact);
        ok &= row_ok;
        rows.push(json!({
            "r": r,
            "k": k,
            "optimum": rep.value,
            "bound": rep.bound,
            "bound_exact": rep.bound_exact,
            "relative_gap": (rep.value / rep.bound - 1.0).abs(),
            "argmax_deviation": deviation,
            "kkt_residual": rep.kkt.residual,
            "status": rep.status,
            "exact_all_tight": check.is_some_and(|c| c.all_tent_constraints_tight),
            "exact_product_equals_bound": check.is_some_and(|c| c.product_equals_bound),
            "exact_kkt": check.is_some_and(|c| c.kkt_exact),
        }));
        certificates.extend(optimum_certificate(&rep)?);
    }
    Ok(Outcome { result: json!({ "rows": rows, "notes": notes }), certificates, ok })
}

fn counterexample_table(r_min: usize, r_max: usize) -> Result<Outcome> {
    check_range(r_min, r_max)?;
    let mut rows = Vec::new();
    let mut notes = Vec::new();
    let mut certificates = Vec::new();
    for r in r_min..=r_max {
        let floor = exact::floor_r_over_e(r);
        if floor <= 1 {
            notes.push(format!("r = {r}: no k with 1 <= k < floor(r/e) = {floor}"));
            continue;
        }
        for k in 1..floor {
            let c = region::counterexample_point(r, k, None)?;
            rows.push(json!({
                "r": r,
                "k": k,
                "eps": c.eps,
                "feasible_exact": c.feasible_exact,
                "product": c.product,
                "bound": exact::to_f64(&edge_density(r)),
                "bound_exact": c.bound_exact,
                "exceeds_bound_exact": c.exceeds_bound_exact,
                "relative_margin": c.relative_margin,
            }));
            certificates.push(counterexample_certificate(&c));
        }
    }
    Ok(Outcome { result: json!({ "rows": rows, "notes": notes }), certificates, ok: true })
}

// ---------------------------------------------------------------------------

fn verify_cmd(path: &Path) -> Result<Outcome> {
    let raw = read_value(path)?;
    let items: Vec<Value> = match raw {
        Value::Array(items) => items,
        Value::Object(ref map) if map.contains_key("certificates") => match &map["certificates"] {
            Value::Array(items) => items.clone(),
            _ => bail!(hypertent::Error::InvalidArgument("certificates must be an array".into())),
        },
        other => vec![other],
    };
    if items.is_empty() {
        bail!(hypertent::Error::InvalidArgument("no certificates to verify".into()));
    }
    let certs: Vec<Certificate> = items
        .into_iter()
        .enumerate()
        .map(|(idx, v)| {
            serde_json::from_value(v)
                .map_err(|e| anyhow!(hypertent::Error::InvalidArgument(format!("certificate {idx} is malformed: {e}"))))
        })
        .collect::<Result<_>>()?;
    let verdicts: Vec<certificate::Verdict> = certs.iter().map(certificate::verify).collect();
    let passed = verdicts.iter().all(|v| v.passed);
    Ok(Outcome {
        result: json!({ "checked": verdicts.len(), "passed": passed, "verdicts": verdicts }),
        certificates: Vec::new(),
        ok: passed,
    })
}
