//! End-to-end acceptance checks. Each prints one PASS/FAIL line; the
//! process fails if any check fails.

use std::collections::{BTreeMap, BTreeSet};
use std::sync::Mutex;
use std::time::{Duration, Instant};

use gramwalk::fixtures::{self, ex, grammar_term, lanl};
use gramwalk::graph::{Node, NodeId};
use gramwalk::oracle::{
    blend_teleport, compare_rankings_with, expand_chain, implied_network, power_iteration, solve,
    transition_matrix, ChainOptions, OracleConfig, PowerOptions, TransitionMatrix,
};
use gramwalk::walker::{
    constraint_sets, run, run_with, spawn_walker, step, Program, RankVector, RunConfig, Start,
    StepOutcome, WalkObserver, WalkerState,
};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

type Check = Result<String, String>;

fn ensure(ok: bool, detail: String) -> Check {
    if ok {
        Ok(detail)
    } else {
        Err(detail)
    }
}

fn within(elapsed: Duration, limit: Duration) -> Result<(), String> {
    if elapsed <= limit {
        Ok(())
    } else {
        Err(format!("took {elapsed:?}, limit {limit:?}"))
    }
}

fn keyed(d: &BTreeMap<Node, f64>) -> BTreeMap<String, f64> {
    d.iter().map(|(k, v)| (k.key(), *v)).collect()
}

fn uniform_traversal() -> Check {
    let t = Instant::now();
    let (net, g) = (fixtures::fig10(), fixtures::fig10_grammar());
    let p = Program::new(&net, &g).map_err(|e| e.to_string())?;
    let mut rng = ChaCha8Rng::seed_from_u64(1);
    let mut hits: BTreeMap<String, u32> = BTreeMap::new();
    let trials = 100_000;
    for _ in 0..trials {
        let mut w = p
            .start_at(&grammar_term("A_0"), &ex("a"))
            .map_err(|e| e.to_string())?;
        step(&p, &mut w, &mut RankVector::new(), &mut rng).map_err(|e| e.to_string())?;
        *hits.entry(net.node(w.vertex()).key()).or_default() += 1;
    }
    within(t.elapsed(), Duration::from_secs(5))?;
    let freqs: BTreeMap<_, f64> = hits
        .iter()
        .map(|(k, c)| (k.clone(), *c as f64 / trials as f64))
        .collect();
    let ok = freqs.len() == 3 && freqs.values().all(|f| (f - 1.0 / 3.0).abs() <= 0.01);
    ensure(ok, format!("{freqs:?}"))
}

fn symmetric_stationary() -> Check {
    let t = Instant::now();
    let r = run(
        &fixtures::toy3(),
        &fixtures::coaut_grammar(),
        &RunConfig {
            seed: 1,
            ..RunConfig::default()
        },
    )
    .map_err(|e| e.to_string())?;
    within(t.elapsed(), Duration::from_secs(30))?;
    let want: BTreeSet<Node> = ["r1", "r2", "r3"].iter().map(|r| lanl(r)).collect();
    let ok = r.converged
        && r.normalized.keys().cloned().collect::<BTreeSet<_>>() == want
        && r.normalized.values().all(|v| (v - 1.0 / 3.0).abs() <= 0.02);
    ensure(
        ok,
        format!("converged={} {:?}", r.converged, keyed(&r.normalized)),
    )
}

fn oracle_equivalence() -> Check {
    let t = Instant::now();
    let mut report = Vec::new();
    let mut ok = true;
    let cases = [
        ("toy3/coaut", fixtures::toy3(), fixtures::coaut_grammar()),
        (
            "toy2x2/coaut-prime",
            fixtures::toy2x2(),
            fixtures::coaut_prime_grammar(),
        ),
    ];
    for (name, net, g) in cases {
        let w = run(&net, &g, &estimation_config()).map_err(|e| e.to_string())?;
        let o = solve(&net, &g, &OracleConfig::default()).map_err(|e| e.to_string())?;
        let c = compare_rankings_with(&w.distribution(), &o.distribution(), 0.01);
        ok &= w.converged && o.converged && c.l1 <= 0.02 && c.rank_agreement;
        report.push(format!("{name}: l1={:.4} ranks={}", c.l1, c.rank_agreement));
    }
    within(t.elapsed(), Duration::from_secs(60))?;
    ensure(ok, report.join("; "))
}

fn implied_eigenvector() -> Check {
    let (net, g) = (fixtures::toy3(), fixtures::coaut_grammar());
    let chain = expand_chain(&net, &g, &ChainOptions::default()).map_err(|e| e.to_string())?;
    let opts = PowerOptions {
        tol: 1e-13,
        max_iters: 100_000,
    };
    let mass = chain.stationary(&opts);
    let restricted = chain.counted_distribution(&mass.distribution);
    let implied = implied_network(&chain, &mass.distribution);
    let m = transition_matrix(&implied).map_err(|e| e.to_string())?;
    let r = power_iteration(&m, &opts);
    let via_implied: BTreeMap<Node, f64> = m.order.iter().cloned().zip(r.distribution).collect();
    let gap = restricted
        .iter()
        .map(|(k, v)| (v - via_implied.get(k).copied().unwrap_or(0.0)).abs())
        .fold(0.0, f64::max);
    let lengths = chain.counted_path_lengths();
    let ok = mass.converged
        && r.converged
        && restricted.len() == 3
        && gap <= 1e-9
        && lengths == BTreeSet::from([2]);
    ensure(
        ok,
        format!("max gap {gap:.2e}, counted path lengths {lengths:?}"),
    )
}

#[derive(Default)]
struct Audit {
    /// Per walker: IncrCounts since its last submit or halt.
    shadow: Mutex<BTreeMap<usize, BTreeMap<NodeId, u64>>>,
    expected: Mutex<BTreeMap<NodeId, u64>>,
    discarded: Mutex<u64>,
    mismatches: Mutex<u64>,
}

impl WalkObserver for Audit {
    fn stepped(&self, walker: usize, state: &WalkerState, outcome: &StepOutcome) {
        if *outcome == StepOutcome::Counted {
            *self
                .shadow
                .lock()
                .unwrap()
                .entry(walker)
                .or_default()
                .entry(state.vertex())
                .or_default() += 1;
        }
    }

    fn submitted(&self, walker: usize, counts: &BTreeMap<NodeId, u64>) {
        let mine = self
            .shadow
            .lock()
            .unwrap()
            .remove(&walker)
            .unwrap_or_default();
        if &mine != counts {
            *self.mismatches.lock().unwrap() += 1;
        }
        let mut expected = self.expected.lock().unwrap();
        for (v, c) in counts {
            *expected.entry(*v).or_default() += c;
        }
    }

    fn halted(&self, walker: usize, discarded: &BTreeMap<NodeId, u64>) {
        let mine = self
            .shadow
            .lock()
            .unwrap()
            .remove(&walker)
            .unwrap_or_default();
        if &mine != discarded {
            *self.mismatches.lock().unwrap() += 1;
        }
        *self.discarded.lock().unwrap() += discarded.values().sum::<u64>();
    }
}

fn halt_semantics() -> Check {
    let (net, g) = (fixtures::toy3_solo(), fixtures::coaut_grammar());
    let p = Program::new(&net, &g).map_err(|e| e.to_string())?;
    let audit = Audit::default();
    let cfg = RunConfig {
        seed: 5,
        walkers: 4,
        max_steps: 500_000,
        epsilon: 1e-12,
        ..RunConfig::default()
    };
    let r = run_with(&p, &cfg, &audit).map_err(|e| e.to_string())?;
    let expected: BTreeMap<Node, u64> = audit
        .expected
        .lock()
        .unwrap()
        .iter()
        .map(|(k, v)| (net.node(*k).clone(), *v))
        .collect();
    let discarded = *audit.discarded.lock().unwrap();
    let mismatches = *audit.mismatches.lock().unwrap();
    let total: u64 = r.counts.values().sum();
    let ok = r.stats.halts > 0
        && discarded > 0
        && mismatches == 0
        && r.counts == expected
        && total + discarded + r.stats.pending == r.stats.increments;
    ensure(
        ok,
        format!(
            "halts={} discarded={discarded} submitted={total} pending={} increments={} mismatches={mismatches}",
            r.stats.halts, r.stats.pending, r.stats.increments
        ),
    )
}

fn constraint_replay() -> Check {
    let (net, g) = (fixtures::toy3(), fixtures::coaut_grammar());
    let p = Program::new(&net, &g)
        .map_err(|e| e.to_string())?
        .with_full_history();
    let r1 = p.context_index(&grammar_term("Researcher_1")).unwrap();
    let r3 = p.context_index(&grammar_term("Researcher_3")).unwrap();
    let article = p
        .context_index(&grammar_term("ConferenceArticle_2"))
        .unwrap();
    let mut rng = ChaCha8Rng::seed_from_u64(9);
    let (mut first_entries, mut coauthor_moves) = (0, 0);
    for _ in 0..2_000 {
        let mut w = spawn_walker(&p, &mut rng).map_err(|e| e.to_string())?;
        let mut global = RankVector::new();
        let (x, o) = constraint_sets(&p, &w, r1);
        if !o.is_empty() || !x.is_empty() {
            return Err(format!("O(p)_1 = {o:?}, X(p)_1 = {x:?} at entry"));
        }
        first_entries += 1;
        while w.time() < 3 {
            if w.context() == article && w.cursor() == 0 {
                let w_vertex = w.at(1).expect("full history").vertex;
                let (x, o) = constraint_sets(&p, &w, r3);
                if x != BTreeSet::from([w_vertex]) || !o.is_empty() {
                    return Err(format!("X(p)_3 = {x:?}, O(p)_3 = {o:?}, w = {w_vertex:?}"));
                }
                coauthor_moves += 1;
            }
            step(&p, &mut w, &mut global, &mut rng).map_err(|e| e.to_string())?;
        }
        if w.context() != r3 || w.vertex() == w.at(1).unwrap().vertex {
            return Err("third step did not reach a different coauthor".into());
        }
    }
    Ok(format!(
        "{first_entries} entries with O(p)_1 = {{}}, {coauthor_moves} moves with X(p)_3 = {{w}}"
    ))
}

fn confinement() -> Check {
    let net = fixtures::toy2x2();
    let cfg = RunConfig {
        seed: 2,
        max_steps: 200_000,
        start: Start::At(vec![(grammar_term("University_0"), lanl("U3"))]),
        ..RunConfig::default()
    };
    let support = |g| -> Result<BTreeSet<String>, String> {
        let r = run(&net, &g, &cfg).map_err(|e| e.to_string())?;
        Ok(r.counts.keys().map(Node::key).collect())
    };
    let closed = support(fixtures::coaut_grammar())?;
    let open = support(fixtures::coaut_prime_grammar())?;
    let set = |names: &[&str]| names.iter().map(|n| lanl(n).key()).collect::<BTreeSet<_>>();
    let ok = closed == set(&["r4", "r5"]) && open == set(&["r1", "r2", "r3", "r4", "r5"]);
    ensure(
        ok,
        format!("without Reresolve {closed:?}; with Reresolve {open:?}"),
    )
}

/// Tight stopping rule for comparisons against the exact oracle. At the
/// default epsilon the stopping L1 noise alone often exceeds 0.02.
fn estimation_config() -> RunConfig {
    RunConfig {
        seed: 1,
        epsilon: 1e-5,
        check_every: 1000,
        max_steps: 50_000_000,
        ..RunConfig::default()
    }
}

fn unlabeled_pagerank() -> Check {
    let (net, g) = (fixtures::mixed(), fixtures::unlabeled_grammar());
    let w = run(&net, &g, &estimation_config()).map_err(|e| e.to_string())?;
    let o = solve(
        &net,
        &g,
        &OracleConfig {
            delta: Some(0.85),
            ..OracleConfig::default()
        },
    )
    .map_err(|e| e.to_string())?;
    let c = compare_rankings_with(&w.distribution(), &o.distribution(), 0.01);
    ensure(
        w.converged && o.converged && c.l1 <= 0.02,
        format!("l1={:.4}", c.l1),
    )
}

fn determinism() -> Check {
    let (net, g) = (fixtures::toy2x2(), fixtures::coaut_prime_grammar());
    let cfg = RunConfig {
        seed: 77,
        walkers: 1,
        ..RunConfig::default()
    };
    let a = run(&net, &g, &cfg)
        .map_err(|e| e.to_string())?
        .to_json()
        .to_string();
    let b = run(&net, &g, &cfg)
        .map_err(|e| e.to_string())?
        .to_json()
        .to_string();
    ensure(a == b, format!("{} bytes each", a.len()))
}

fn matrix_properties() -> Check {
    let mut rng = ChaCha8Rng::seed_from_u64(10);
    let (mut worst_row, mut worst_sum) = (0.0f64, 0.0f64);
    for _ in 0..100 {
        let n = rng.gen_range(1..=12);
        let rows = (0..n)
            .map(|_| {
                let raw: Vec<f64> = (0..n)
                    .map(|_| if rng.gen_bool(0.3) { 0.0 } else { rng.gen() })
                    .collect();
                let s: f64 = raw.iter().sum();
                if s == 0.0 {
                    vec![1.0 / n as f64; n]
                } else {
                    raw.iter().map(|x| x / s).collect()
                }
            })
            .collect();
        let a = TransitionMatrix::from_rows(rows).map_err(|e| e.to_string())?;
        let c = blend_teleport(&a, rng.gen_range(0.01..=1.0)).map_err(|e| e.to_string())?;
        worst_row = worst_row.max(c.max_row_error());
        let r = power_iteration(&c, &PowerOptions::default());
        worst_sum = worst_sum.max((r.distribution.iter().sum::<f64>() - 1.0).abs());
    }
    ensure(
        worst_row <= 1e-12 && worst_sum <= 1e-9,
        format!("max row error {worst_row:.1e}, max mass error {worst_sum:.1e}"),
    )
}

type Criterion = (&'static str, fn() -> Check);

fn main() {
    let criteria: [Criterion; 10] = [
        ("uniform traversal on fig10", uniform_traversal),
        (
            "toy3 symmetric stationary distribution",
            symmetric_stationary,
        ),
        ("walker matches exact oracle", oracle_equivalence),
        ("implied network eigenvector", implied_eigenvector),
        ("halt discards local counts", halt_semantics),
        ("Not/Is constraint sets", constraint_replay),
        ("component confinement and teleportation", confinement),
        ("unlabeled grammar is PageRank", unlabeled_pagerank),
        ("seeded determinism", determinism),
        ("matrix properties", matrix_properties),
    ];
    let mut failed = 0;
    for (i, (name, check)) in criteria.iter().enumerate() {
        let t = Instant::now();
        let result = check();
        let secs = t.elapsed().as_secs_f64();
        match result {
            Ok(detail) => println!("criterion {:>2} PASS  {name} ({secs:.2}s): {detail}", i + 1),
            Err(detail) => {
                failed += 1;
                println!("criterion {:>2} FAIL  {name} ({secs:.2}s): {detail}", i + 1);
            }
        }
    }
    if failed > 0 {
        println!("{failed} of {} criteria failed", criteria.len());
        std::process::exit(1);
    }
    println!("all {} criteria passed", criteria.len());
}
