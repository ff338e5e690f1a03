//! Acceptance criteria 1–11. Each test prints one `PASS`/`FAIL` line (written
//! to stdout directly so it shows without `--nocapture`) and then asserts.

use std::io::Write;
use std::time::{Duration, Instant};

use hypertent::entropy::{
    self, mixture_bound_witness, ratio_forests, ratio_sequence, tree_sampler_entropy, DiscreteRV, EdgeDistribution, JointRV,
};
use hypertent::exact::{ceil_r_over_e, edge_density, floor_r_over_e, to_f64};
use hypertent::hom::{brute_force_ex, find_partial_homomorphism, verify_extension_equivalence};
use hypertent::hypergraph::{
    make_partial_tent, make_turan_graph, random_hypergraph, random_hypergraph_with_edges, tent_family,
};
use hypertent::lagrangian::{self, density_lower_bound};
use hypertent::region::{
    self, check_feasible_exact, counterexample_point, fprime_zero, linear_point_exact, maximize_product, perturb_bisect,
    perturbation_corpus, product_exact, tent_pairs, MaxOptions,
};
use hypertent::{Family, Hypergraph, PartialHypergraph, SearchBudget};
use num_rational::BigRational;
use num_traits::Zero;
use proptest::test_runner::{Config, RngAlgorithm, TestCaseError, TestRng, TestRunner};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

fn report(id: u32, name: &str, failures: &[String], elapsed: Duration, limit_secs: f64) {
    let in_time = elapsed.as_secs_f64() < limit_secs;
    let ok = failures.is_empty() && in_time;
    let mut line = format!(
        "criterion {id:>2} {name}: {} ({:.2}s, limit {limit_secs}s)",
        if ok { "PASS" } else { "FAIL" },
        elapsed.as_secs_f64()
    );
    if !in_time {
        line.push_str(" over time limit");
    }
    for f in failures.iter().take(5) {
        line.push_str(&format!("\n    {f}"));
    }
    let _ = writeln!(std::io::stdout().lock(), "{line}");
    assert!(ok, "{line}");
}

fn clique_number(n: usize, edges: &[Vec<usize>]) -> usize {
    let adj = |a: usize, b: usize| edges.iter().any(|e| (e[0] == a && e[1] == b) || (e[0] == b && e[1] == a));
    let mut best = 1;
    for mask in 1u32..(1 << n) {
        let vs: Vec<usize> = (0..n).filter(|&v| mask >> v & 1 == 1).collect();
        if vs.len() > best && vs.iter().enumerate().all(|(a, &u)| vs[a + 1..].iter().all(|&w| adj(u, w))) {
            best = vs.len();
        }
    }
    best
}

#[test]
fn criterion_01_region_optimum() {
    let start = Instant::now();
    let mut failures = Vec::new();
    for r in 4..=12 {
        let k = ceil_r_over_e(r);
        let rep = match maximize_product(r, k, &MaxOptions { exact: true, ..MaxOptions::default() }) {
            Ok(rep) => rep,
            Err(e) => {
                failures.push(format!("r={r}: {e}"));
                continue;
            }
        };
        let bound = to_f64(&edge_density(r));
        if (rep.value / bound - 1.0).abs() > 1e-6 {
            failures.push(format!("r={r}: value {} vs bound {bound}", rep.value));
        }
        let dev = rep.argmax.x().iter().enumerate().fold(0.0f64, |a, (i, &x)| a.max((x - (i + 1) as f64 / r as f64).abs()));
        if dev > 1e-4 {
            failures.push(format!("r={r}: argmax deviates by {dev:e}"));
        }
        let exact = check_feasible_exact(&linear_point_exact(r), r, k).unwrap();
        if !exact.feasible || exact.tight.len() != tent_pairs(r, k).len() {
            failures.push(format!("r={r}: i/r not feasible with every tent constraint tight"));
        }
        if product_exact(&linear_point_exact(r)) != edge_density(r) {
            failures.push(format!("r={r}: exact product of i/r differs from r!/r^r"));
        }
    }
    report(1, "region optimum at k = ceil(r/e)", &failures, start.elapsed(), 10.0);
}

#[test]
fn criterion_02_counterexample() {
    let start = Instant::now();
    let mut failures = Vec::new();
    let mut cases = 0;
    for r in 4..=15 {
        for k in 1..floor_r_over_e(r) {
            cases += 1;
            let bound = edge_density(r);
            match counterexample_point(r, k, None) {
                Ok(c) => {
                    let q: Vec<BigRational> = c.exact_point.iter().map(|s| s.parse().unwrap()).collect();
                    if !check_feasible_exact(&q, r, k).unwrap().feasible {
                        failures.push(format!("(r,k)=({r},{k}): point infeasible"));
                    }
                    if product_exact(&q) <= bound {
                        failures.push(format!("(r,k)=({r},{k}): product does not exceed the bound"));
                    }
                }
                Err(e) => failures.push(format!("(r,k)=({r},{k}): {e}")),
            }
            match maximize_product(r, k, &MaxOptions::default()) {
                Ok(rep) if rep.value - to_f64(&bound) >= 1e-8 => {}
                Ok(rep) => failures.push(format!("(r,k)=({r},{k}): optimum margin {:e}", rep.value - to_f64(&bound))),
                Err(e) => failures.push(format!("(r,k)=({r},{k}): {e}")),
            }
        }
    }
    if cases == 0 {
        failures.push("no (r,k) pairs".into());
    }
    report(2, "points beating r!/r^r for k < floor(r/e)", &failures, start.elapsed(), 30.0);
}

#[test]
fn criterion_03_fprime_sign() {
    let start = Instant::now();
    let mut failures = Vec::new();
    let zero = BigRational::zero();
    for r in 4..=40 {
        let c = ceil_r_over_e(r);
        if fprime_zero(r, c).unwrap() > zero {
            failures.push(format!("r={r}: f'(0) > 0 at k = ceil(r/e)"));
        }
        for k in 1..floor_r_over_e(r) {
            if fprime_zero(r, k).unwrap() <= zero {
                failures.push(format!("r={r}, k={k}: f'(0) <= 0"));
            }
        }
    }
    report(3, "sign of f'(0)", &failures, start.elapsed(), 1.0);
}

#[test]
fn criterion_04_density_anchors() {
    let start = Instant::now();
    let mut failures = Vec::new();
    let budget = SearchBudget::default();
    for r in 4..=8 {
        let edge = Hypergraph::new(r, r, vec![(0..r).collect()]).unwrap();
        for k in 1..=r / 2 {
            match density_lower_bound(&edge, &tent_family(r, k).unwrap(), &budget) {
                Ok(Some(b)) if b.certified == edge_density(r) => {}
                Ok(Some(b)) => failures.push(format!("r={r}, k={k}: certified {} != r!/r^r", b.certified)),
                Ok(None) => failures.push(format!("r={r}, k={k}: single edge reported as not hom-free")),
                Err(e) => failures.push(format!("r={r}, k={k}: {e}")),
            }
        }
    }
    let k3 = Hypergraph::new(2, 3, vec![vec![0, 1], vec![0, 2], vec![1, 2]]).unwrap();
    let l = lagrangian::lagrangian(&k3, lagrangian::DEFAULT_RESTARTS, 1e-12).value;
    if (l - 1.0 / 3.0).abs() > 1e-6 {
        failures.push(format!("L(K3) = {l}"));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(2024);
    let mut graphs = 0;
    while graphs < 50 {
        let n = rng.gen_range(2..=9);
        let g = random_hypergraph(2, n, rng.gen_range(0.2..0.9), &mut rng).unwrap();
        if g.edge_count() == 0 {
            continue;
        }
        graphs += 1;
        let omega = clique_number(n, g.edges());
        let oracle = (1.0 - 1.0 / omega as f64) / 2.0;
        let l = lagrangian::lagrangian(&g, lagrangian::DEFAULT_RESTARTS, 1e-12).value;
        if (l - oracle).abs() > 1e-6 {
            failures.push(format!("graph {:?}: L = {l}, oracle {oracle}", g.edges()));
        }
    }
    report(4, "density anchors and Motzkin-Straus", &failures, start.elapsed(), 60.0);
}

#[test]
fn criterion_05_entropic_equals_blowup() {
    let start = Instant::now();
    let mut failures = Vec::new();
    let mut rng = ChaCha8Rng::seed_from_u64(5);
    for idx in 0..30 {
        let r = [2, 3, 4][idx % 3];
        let n = rng.gen_range(r + 1..=10);
        let m = rng.gen_range(1..=6);
        let h = random_hypergraph_with_edges(r, n, m, &mut rng).unwrap();
        let b = lagrangian::lagrangian_seeded(&h, lagrangian::DEFAULT_RESTARTS, 1e-12, 1000 + idx as u64).blowup_density;
        match entropy::entropic_density(&h, 100, idx as u64) {
            Ok(e) if (e.value - b).abs() < 1e-5 => {}
            Ok(e) => failures.push(format!("{:?}: entropic {} vs blowup {b}", h.edges(), e.value)),
            Err(e) => failures.push(format!("{:?}: {e}", h.edges())),
        }
    }
    report(5, "entropic density equals blowup density", &failures, start.elapsed(), 120.0);
}

#[test]
fn criterion_06_ratio_constraints() {
    let start = Instant::now();
    let mut failures = Vec::new();
    let budget = SearchBudget::default();
    for r in 4..=6 {
        let k = r / 2;
        let hosts = [Hypergraph::new(r, r, vec![(0..r).collect()]).unwrap(), make_turan_graph(r, 2 * r).unwrap()];
        for (name, h) in ["single edge", "T^r(2r)"].iter().zip(hosts) {
            match entropy::verify_ratio_constraints(&h, k, 100, &budget, r as u64) {
                Ok(rep) if rep.all_inside && rep.worst_slack >= -1e-9 => {}
                Ok(rep) => failures.push(format!("r={r} {name}: worst slack {:e} at {:?}", rep.worst_slack, rep.worst_sequence)),
                Err(e) => failures.push(format!("r={r} {name}: {e}")),
            }
        }
    }
    report(6, "ratio sequences lie in X_{r,k}", &failures, start.elapsed(), 60.0);
}

fn runner(seed: u8) -> TestRunner {
    TestRunner::new_with_rng(Config { cases: 1000, failure_persistence: None, ..Config::default() }, TestRng::from_seed(RngAlgorithm::ChaCha, &[seed; 32]))
}

fn random_law(rng: &mut ChaCha8Rng, arity: usize, alphabet: usize) -> JointRV {
    let cells = alphabet.pow(arity as u32);
    let mut p: Vec<f64> = (0..cells).map(|_| if rng.gen_bool(0.3) { 0.0 } else { rng.gen::<f64>() }).collect();
    if p.iter().all(|&v| v == 0.0) {
        p[0] = 1.0;
    }
    let total: f64 = p.iter().sum();
    let outcomes: Vec<Vec<usize>> = (0..cells)
        .map(|c| (0..arity).map(|d| c / alphabet.pow(d as u32) % alphabet).collect())
        .collect();
    JointRV::new(DiscreteRV::new(outcomes, p.iter().map(|v| v / total).collect()).unwrap()).unwrap()
}

fn check(cond: bool, what: &str) -> Result<(), TestCaseError> {
    if cond {
        Ok(())
    } else {
        Err(TestCaseError::fail(what.to_string()))
    }
}

#[test]
fn criterion_07_entropy_identities() {
    let start = Instant::now();
    let mut failures = Vec::new();
    let tol = 1e-9;
    let mut record = |name: &str, res: Result<(), proptest::test_runner::TestError<u64>>| {
        if let Err(e) = res {
            failures.push(format!("{name}: {e}"));
        }
    };

    record(
        "chain rule",
        runner(1).run(&(0u64..u64::MAX), |seed| {
            let mut rng = ChaCha8Rng::seed_from_u64(seed);
            let arity = rng.gen_range(2..=4);
            let j = random_law(&mut rng, arity, 3);
            let sum: f64 = (0..arity).map(|i| j.conditional_entropy(&[i], &(0..i).collect::<Vec<_>>()).unwrap()).sum();
            check((sum - j.entropy()).abs() < tol, "sum of conditionals differs from joint entropy")
        }),
    );
    record(
        "subadditivity",
        runner(2).run(&(0u64..u64::MAX), |seed| {
            let mut rng = ChaCha8Rng::seed_from_u64(seed);
            let j = random_law(&mut rng, 2, 4);
            let (hx, hy) = (j.joint_entropy(&[0]).unwrap(), j.joint_entropy(&[1]).unwrap());
            check(j.entropy() <= hx + hy + tol, "H(X,Y) > H(X) + H(Y)")
        }),
    );
    record(
        "dropping conditions",
        runner(3).run(&(0u64..u64::MAX), |seed| {
            let mut rng = ChaCha8Rng::seed_from_u64(seed);
            let j = random_law(&mut rng, 3, 3);
            let both = j.conditional_entropy(&[0], &[1, 2]).unwrap();
            let one = j.conditional_entropy(&[0], &[1]).unwrap();
            let none = j.joint_entropy(&[0]).unwrap();
            check(both <= one + tol && one <= none + tol, "conditioning increased entropy")
        }),
    );
    record(
        "uniform bound",
        runner(4).run(&(0u64..u64::MAX), |seed| {
            let mut rng = ChaCha8Rng::seed_from_u64(seed);
            let x = random_law(&mut rng, 1, 8).marginal(&[0]).unwrap();
            let s = x.support().len() as f64;
            check(x.entropy() <= s.log2() + tol, "entropy above log of support size")?;
            let u = DiscreteRV::uniform(x.support().to_vec()).unwrap();
            check((u.entropy() - s.log2()).abs() < tol, "uniform law misses the bound")
        }),
    );
    record(
        "ratio product identity",
        runner(5).run(&(0u64..u64::MAX), |seed| {
            let mut rng = ChaCha8Rng::seed_from_u64(seed);
            let r = rng.gen_range(2..=4);
            let n = rng.gen_range(r..=r + 3);
            let m = rng.gen_range(1..=5);
            let h = random_hypergraph_with_edges(r, n, m.min(num_subsets(n, r)), &mut rng).unwrap();
            let w: Vec<f64> = (0..h.edge_count()).map(|_| rng.gen::<f64>() + 1e-3).collect();
            let d = EdgeDistribution::new(h, w).unwrap();
            let joint = d.joint_law();
            let h1 = joint.joint_entropy(&[0]).unwrap();
            let lhs = ratio_sequence(&d).product();
            let rhs = (joint.entropy() - r as f64 * h1).exp2();
            check((lhs - rhs).abs() < tol, "product of ratios differs from 2^(H - rH1)")
        }),
    );
    record(
        "mixture bound",
        runner(6).run(&(0u64..u64::MAX), |seed| {
            let mut rng = ChaCha8Rng::seed_from_u64(seed);
            let a = rng.gen_range(1..=3);
            let mut used = [0usize; 12];
            let mut xs = Vec::new();
            for _ in 0..rng.gen_range(1..=6) {
                let outcomes: Vec<usize> = (0..12).filter(|&o| used[o] < a && rng.gen_bool(0.4)).collect();
                if outcomes.is_empty() {
                    continue;
                }
                outcomes.iter().for_each(|&o| used[o] += 1);
                let p: Vec<f64> = outcomes.iter().map(|_| rng.gen::<f64>() + 1e-3).collect();
                let t: f64 = p.iter().sum();
                xs.push(DiscreteRV::new(outcomes, p.iter().map(|v| v / t).collect()).unwrap());
            }
            if xs.is_empty() {
                return Ok(());
            }
            let w = mixture_bound_witness(&xs, a).unwrap();
            check(w.lhs <= w.rhs + tol, "sum of 2^H exceeds a 2^H(Z)")
        }),
    );
    report(7, "entropy identities (1000 cases each)", &failures, start.elapsed(), 30.0);
}

fn num_subsets(n: usize, r: usize) -> usize {
    (0..r).fold(1, |acc, i| acc * (n - i) / (i + 1))
}

#[test]
fn criterion_08_extension_equivalence() {
    let start = Instant::now();
    let mut failures = Vec::new();
    let budget = SearchBudget::default();
    let mut rng = ChaCha8Rng::seed_from_u64(8);
    let (mut checked, mut positive) = (0, 0);
    for r in 2..=6usize {
        let partials: Vec<PartialHypergraph> = (1..=r / 2).map(|i| make_partial_tent(r, i).unwrap()).collect();
        for _ in 0..50 {
            let n = rng.gen_range(r..=8);
            let max_m = num_subsets(n, r);
            let h = random_hypergraph_with_edges(r, n, rng.gen_range(1..=max_m.min(14)), &mut rng).unwrap();
            for f in &partials {
                checked += 1;
                if matches!(find_partial_homomorphism(f, &h, &budget), Ok(Some(_))) {
                    positive += 1;
                }
                match verify_extension_equivalence(f, &h, &budget) {
                    Ok(true) => {}
                    Ok(false) => failures.push(format!("r={r}: equivalence fails on host {:?}", h.edges())),
                    Err(e) => failures.push(format!("r={r}: {e}")),
                }
            }
        }
    }
    if positive == 0 || positive == checked {
        failures.push(format!("corpus is one-sided: {positive} of {checked} pairs admit a homomorphism"));
    }
    let _ = writeln!(std::io::stdout().lock(), "    {positive} of {checked} (partial tent, host) pairs admit a homomorphism");
    report(8, "partial tents and their extensions", &failures, start.elapsed(), 60.0);
}

#[test]
fn criterion_09_tree_sampler() {
    let start = Instant::now();
    let mut failures = Vec::new();
    for r in 3..=5usize {
        let d = EdgeDistribution::uniform(Hypergraph::new(r, r, vec![(0..r).collect()]).unwrap()).unwrap();
        let order: Vec<usize> = (0..=r).collect();
        for i in 1..r {
            for j in 1..=r - i {
                let (f1, f2) = ratio_forests(r, i, j).unwrap();
                for (which, f) in [("first", f1), ("second", f2)] {
                    match tree_sampler_entropy(&f, &order, &d) {
                        Ok(s) => {
                            if (s.realized_entropy - s.predicted_entropy).abs() > 1e-9 {
                                failures.push(format!("r={r} i={i} j={j} {which}: {} vs {}", s.realized_entropy, s.predicted_entropy));
                            }
                            if s.max_marginal_error > 1e-9 {
                                failures.push(format!("r={r} i={i} j={j} {which}: marginal error {:e}", s.max_marginal_error));
                            }
                        }
                        Err(e) => failures.push(format!("r={r} i={i} j={j} {which}: {e}")),
                    }
                }
            }
        }
    }
    report(9, "tree sampler entropy and marginals", &failures, start.elapsed(), 30.0);
}

#[test]
fn criterion_10_mantel() {
    let start = Instant::now();
    let mut failures = Vec::new();
    let k3 = Family::new(vec![Hypergraph::new(2, 3, vec![vec![0, 1], vec![0, 2], vec![1, 2]]).unwrap()]).unwrap();
    for n in 4..=8 {
        match brute_force_ex(n, &k3, &SearchBudget::default()) {
            Ok(t) => {
                if t.ex != n * n / 4 {
                    failures.push(format!("n={n}: ex = {}", t.ex));
                }
                let turan = make_turan_graph(2, n).unwrap();
                if t.extremal.len() != 1 || !t.extremal[0].is_isomorphic(&turan) {
                    failures.push(format!("n={n}: {} extremal classes", t.extremal.len()));
                }
            }
            Err(e) => failures.push(format!("n={n}: {e}")),
        }
    }
    report(10, "Mantel", &failures, start.elapsed(), 120.0);
}

#[test]
fn criterion_11_perturbation() {
    let start = Instant::now();
    let mut failures = Vec::new();
    let corpus = perturbation_corpus(24, 11);
    if corpus.len() < 20 {
        failures.push(format!("corpus has only {} points", corpus.len()));
    }
    for (k, x) in &corpus {
        let r = x.len();
        let sym = (1..=*k).all(|i| {
            let left = if i == 1 { x[0].clone() } else { &x[i - 1] - &x[i - 2] };
            let right = &x[r - i] - if r - i == 0 { BigRational::zero() } else { x[r - i - 1].clone() };
            left == right
        });
        if !sym || region::segments_exact(x, *k).initial_length + 1 > *k {
            failures.push(format!("corpus point violates the preconditions (r={r}, k={k})"));
            continue;
        }
        match perturb_bisect(x, *k) {
            Ok(out) => {
                if !check_feasible_exact(&out.point, r, *k).unwrap().feasible {
                    failures.push(format!("r={r} k={k}: perturbed point infeasible"));
                }
                if product_exact(&out.point) <= product_exact(x) {
                    failures.push(format!("r={r} k={k}: product did not increase"));
                }
            }
            Err(e) => failures.push(format!("r={r} k={k}: {e}")),
        }
    }
    report(11, "perturbation improves the product", &failures, start.elapsed(), 30.0);
}
