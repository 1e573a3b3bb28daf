use std::collections::BTreeMap;
use std::sync::atomic::{AtomicBool, AtomicU64, Ordering};
use std::sync::Mutex;

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde_json::{json, Value};

use super::ops::{advance, spawn_walker, Event, StepOutcome};
use super::program::Program;
use super::rank::{has_converged, RankVector};
use super::state::WalkerState;
use super::RunError;
use crate::graph::{Node, NodeId, SemanticNetwork};
use crate::output;

/// How walkers are placed at the start of a run.
#[derive(Clone, Debug, PartialEq)]
pub enum Start {
    /// Uniformly over runnable entry contexts and their instances.
    Spawn,
    /// `(context, vertex)` pairs; walker `i` uses entry `i mod len`.
    /// Respawns after a halt still use [`Start::Spawn`].
    At(Vec<(Node, Node)>),
}

#[derive(Clone, Debug, PartialEq)]
pub struct RunConfig {
    pub seed: u64,
    pub walkers: usize,
    pub epsilon: f64,
    /// Rule executions across all walkers.
    pub max_steps: u64,
    /// Non-empty submits between convergence checks.
    pub check_every: u64,
    pub start: Start,
}

impl Default for RunConfig {
    fn default() -> Self {
        RunConfig {
            seed: 0,
            walkers: 1,
            epsilon: 0.001,
            max_steps: 5_000_000,
            check_every: 100,
            start: Start::Spawn,
        }
    }
}

impl RunConfig {
    fn check(&self) -> Result<(), RunError> {
        if self.walkers == 0 {
            return Err(RunError::InvalidConfig("walkers must be at least 1".into()));
        }
        if self.epsilon.is_nan() || self.epsilon <= 0.0 {
            return Err(RunError::InvalidConfig("epsilon must be positive".into()));
        }
        if self.check_every == 0 {
            return Err(RunError::InvalidConfig(
                "check_every must be at least 1".into(),
            ));
        }
        if let Start::At(v) = &self.start {
            if v.is_empty() {
                return Err(RunError::InvalidConfig("no start positions given".into()));
            }
        }
        Ok(())
    }
}

/// Hooks into a run. Called from walker threads.
pub trait WalkObserver: Sync {
    fn spawned(&self, _walker: usize, _state: &WalkerState) {}
    fn stepped(&self, _walker: usize, _state: &WalkerState, _outcome: &StepOutcome) {}
    /// Called with the counts merged into π by one SubmitCounts.
    fn submitted(&self, _walker: usize, _counts: &BTreeMap<NodeId, u64>) {}
    /// Called with the local counts lost by one halt.
    fn halted(&self, _walker: usize, _discarded: &BTreeMap<NodeId, u64>) {}
}

struct NoObserver;
impl WalkObserver for NoObserver {}

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq)]
pub struct RunStats {
    pub increments: u64,
    pub discarded: u64,
    pub halts: u64,
    /// Counts still held by walkers when the run stopped.
    pub pending: u64,
}

#[derive(Clone, Debug, PartialEq)]
pub struct RunResult {
    pub counts: BTreeMap<Node, u64>,
    pub normalized: BTreeMap<Node, f64>,
    pub steps: u64,
    pub submits: u64,
    pub converged: bool,
    pub stats: RunStats,
}

impl RunResult {
    pub fn to_json(&self) -> Value {
        let counts: serde_json::Map<String, Value> = self
            .counts
            .iter()
            .map(|(k, v)| (k.key(), Value::from(*v)))
            .collect();
        let normalized = self.normalized.iter().map(|(k, v)| (k.key(), *v)).collect();
        json!({
            "converged": self.converged,
            "counts": counts,
            "normalized": output::distribution_json(&normalized),
            "steps": self.steps,
            "submits": self.submits,
        })
    }

    /// Normalized values keyed by [`Node::key`].
    pub fn distribution(&self) -> BTreeMap<String, f64> {
        self.normalized.iter().map(|(k, v)| (k.key(), *v)).collect()
    }

    /// Vertices by count, descending, ties by key.
    pub fn ranking(&self) -> Vec<(&Node, u64, f64)> {
        let mut rows: Vec<_> = self
            .counts
            .iter()
            .map(|(k, c)| (k, *c, self.normalized.get(k).copied().unwrap_or(0.0)))
            .collect();
        rows.sort_by(|a, b| b.1.cmp(&a.1).then_with(|| a.0.key().cmp(&b.0.key())));
        rows
    }
}

struct Shared {
    global: RankVector,
    submits: u64,
    checked: u64,
    snapshot: BTreeMap<NodeId, f64>,
    stats: RunStats,
}

/// Runs walkers until convergence or the step budget runs out.
pub fn run(
    net: &SemanticNetwork,
    g: &crate::grammar::Grammar,
    cfg: &RunConfig,
) -> Result<RunResult, RunError> {
    let program = Program::new(net, g)?;
    run_with(&program, cfg, &NoObserver)
}

pub fn run_with(
    program: &Program<'_>,
    cfg: &RunConfig,
    observer: &dyn WalkObserver,
) -> Result<RunResult, RunError> {
    cfg.check()?;
    let starts: Vec<(usize, Node)> = match &cfg.start {
        Start::Spawn => Vec::new(),
        Start::At(v) => v
            .iter()
            .map(|(c, x)| {
                program.start_at(c, x)?;
                Ok((program.context_index(c).expect("checked"), x.clone()))
            })
            .collect::<Result<_, RunError>>()?,
    };
    if starts.is_empty() && program.runnable_entries().is_empty() {
        return Err(RunError::Unrunnable(
            "no entry context resolves to a vertex".into(),
        ));
    }

    let shared = Mutex::new(Shared {
        global: RankVector::new(),
        submits: 0,
        checked: 0,
        snapshot: BTreeMap::new(),
        stats: RunStats::default(),
    });
    let budget = AtomicU64::new(0);
    let done = AtomicBool::new(false);

    let outcome: Result<(), RunError> = std::thread::scope(|scope| {
        let handles: Vec<_> = (0..cfg.walkers)
            .map(|i| {
                let (shared, budget, done, starts) = (&shared, &budget, &done, &starts);
                scope.spawn(move || {
                    let mut rng = ChaCha8Rng::seed_from_u64(cfg.seed);
                    rng.set_stream(i as u64);
                    let mut w = if starts.is_empty() {
                        spawn_walker(program, &mut rng)?
                    } else {
                        let (c, v) = &starts[i % starts.len()];
                        program.start_at(&program.grammar().contexts()[*c].id, v)?
                    };
                    observer.spawned(i, &w);
                    let mut increments = 0u64;
                    while !done.load(Ordering::Relaxed) {
                        if budget.fetch_add(1, Ordering::Relaxed) >= cfg.max_steps {
                            break;
                        }
                        let event = advance(program, &mut w, &mut rng)?;
                        match &event {
                            Event::Counted => increments += 1,
                            Event::Submitted(counts) => {
                                observer.submitted(i, counts);
                                let mut s = shared.lock().expect("run state lock");
                                s.submits += 1;
                                if !counts.is_empty() {
                                    s.global.submit(counts);
                                    s.checked += 1;
                                }
                                if !counts.is_empty() && s.checked % cfg.check_every == 0 {
                                    let now = s.global.normalized();
                                    if !s.snapshot.is_empty()
                                        && has_converged(&s.snapshot, &now, cfg.epsilon)
                                    {
                                        done.store(true, Ordering::Relaxed);
                                    }
                                    s.snapshot = now;
                                }
                            }
                            Event::Halted { discarded } => {
                                observer.halted(i, discarded);
                                observer.spawned(i, &w);
                                let mut s = shared.lock().expect("run state lock");
                                s.stats.halts += 1;
                                s.stats.discarded += discarded.values().sum::<u64>();
                            }
                            Event::Moved | Event::Reresolved { .. } => {}
                        }
                        observer.stepped(i, &w, &event.outcome());
                    }
                    let mut s = shared.lock().expect("run state lock");
                    s.stats.increments += increments;
                    s.stats.pending += w.local_counts().values().sum::<u64>();
                    Ok(())
                })
            })
            .collect();
        handles
            .into_iter()
            .try_for_each(|h| h.join().expect("walker thread panicked"))
    });
    outcome?;

    let s = shared.into_inner().expect("run state lock");
    let net = program.network();
    let steps = budget.load(Ordering::Relaxed).min(cfg.max_steps);
    Ok(RunResult {
        counts: s
            .global
            .counts()
            .iter()
            .map(|(k, v)| (net.node(*k).clone(), *v))
            .collect(),
        normalized: s
            .global
            .normalized()
            .into_iter()
            .map(|(k, v)| (net.node(k).clone(), v))
            .collect(),
        steps,
        submits: s.submits,
        converged: done.load(Ordering::Relaxed),
        stats: s.stats,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::fixtures::{self, grammar_term, lanl};
    use crate::grammar::{Context, Grammar, Rule};
    use std::sync::atomic::AtomicU64;

    fn researchers(r: &RunResult) -> Vec<String> {
        r.normalized.keys().map(|k| k.key()).collect()
    }

    #[test]
    fn toy3_is_symmetric() {
        let (net, g) = (fixtures::toy3(), fixtures::coaut_grammar());
        let cfg = RunConfig {
            seed: 3,
            epsilon: 0.01,
            ..RunConfig::default()
        };
        let r = run(&net, &g, &cfg).unwrap();
        assert!(r.converged);
        assert_eq!(r.normalized.len(), 3);
        for v in r.normalized.values() {
            assert!((v - 1.0 / 3.0).abs() < 0.05, "{:?}", r.normalized);
        }
    }

    #[test]
    fn same_seed_same_result() {
        let (net, g) = (fixtures::toy2x2(), fixtures::coaut_prime_grammar());
        let cfg = RunConfig {
            seed: 42,
            max_steps: 50_000,
            ..RunConfig::default()
        };
        let a = run(&net, &g, &cfg).unwrap();
        let b = run(&net, &g, &cfg).unwrap();
        assert_eq!(a.to_json().to_string(), b.to_json().to_string());
        let c = run(&net, &g, &RunConfig { seed: 43, ..cfg }).unwrap();
        assert_ne!(a.counts, c.counts);
    }

    #[test]
    fn without_teleport_a_component_is_never_left() {
        let (net, g) = (fixtures::toy2x2(), fixtures::coaut_grammar());
        let cfg = RunConfig {
            max_steps: 100_000,
            start: Start::At(vec![(grammar_term("University_0"), lanl("U3"))]),
            ..RunConfig::default()
        };
        let r = run(&net, &g, &cfg).unwrap();
        assert_eq!(researchers(&r), vec![lanl("r4").key(), lanl("r5").key()]);
    }

    #[derive(Default)]
    struct Audit {
        submitted: AtomicU64,
        discarded: AtomicU64,
        counted: AtomicU64,
    }

    impl WalkObserver for Audit {
        fn stepped(&self, _: usize, _: &WalkerState, outcome: &StepOutcome) {
            if *outcome == StepOutcome::Counted {
                self.counted.fetch_add(1, Ordering::Relaxed);
            }
        }
        fn submitted(&self, _: usize, counts: &BTreeMap<NodeId, u64>) {
            self.submitted
                .fetch_add(counts.values().sum(), Ordering::Relaxed);
        }
        fn halted(&self, _: usize, discarded: &BTreeMap<NodeId, u64>) {
            self.discarded
                .fetch_add(discarded.values().sum(), Ordering::Relaxed);
        }
    }

    #[test]
    fn counts_are_conserved_across_halts() {
        let (net, g) = (fixtures::toy3_solo(), fixtures::coaut_grammar());
        let p = Program::new(&net, &g).unwrap();
        let audit = Audit::default();
        let cfg = RunConfig {
            walkers: 4,
            max_steps: 200_000,
            epsilon: 1e-9,
            ..RunConfig::default()
        };
        let r = run_with(&p, &cfg, &audit).unwrap();
        let total: u64 = r.counts.values().sum();
        assert!(r.stats.halts > 0);
        assert_eq!(total, audit.submitted.load(Ordering::Relaxed));
        assert_eq!(r.stats.discarded, audit.discarded.load(Ordering::Relaxed));
        assert_eq!(r.stats.increments, audit.counted.load(Ordering::Relaxed));
        assert_eq!(
            total + r.stats.discarded + r.stats.pending,
            r.stats.increments
        );
        assert_eq!(r.steps, 200_000);
    }

    #[test]
    fn full_teleport_reaches_everything() {
        let net = fixtures::mixed();
        let base = fixtures::unlabeled_grammar();
        let mut contexts = base.contexts().to_vec();
        for r in &mut contexts[0].rules {
            if let Rule::Reresolve { probability, .. } = r {
                *probability = 1.0;
            }
        }
        let g = Grammar::new(contexts);
        let r = run(
            &net,
            &g,
            &RunConfig {
                max_steps: 20_000,
                ..RunConfig::default()
            },
        )
        .unwrap();
        assert_eq!(r.counts.len(), net.vertex_count());
    }

    #[test]
    fn bad_configs_are_rejected() {
        let (net, g) = (fixtures::toy3(), fixtures::coaut_grammar());
        for cfg in [
            RunConfig {
                walkers: 0,
                ..RunConfig::default()
            },
            RunConfig {
                epsilon: 0.0,
                ..RunConfig::default()
            },
            RunConfig {
                check_every: 0,
                ..RunConfig::default()
            },
            RunConfig {
                start: Start::At(vec![]),
                ..RunConfig::default()
            },
        ] {
            assert!(matches!(
                run(&net, &g, &cfg),
                Err(RunError::InvalidConfig(_))
            ));
        }
        let unrunnable = Grammar::new(vec![Context::new("urn:x:c", lanl("Nothing")).entry().rule(
            Rule::IncrCount {
                id: grammar_term("x"),
            },
        )]);
        assert!(matches!(
            run(&net, &unrunnable, &RunConfig::default()),
            Err(RunError::Unrunnable(_))
        ));
    }

    #[test]
    fn budget_exhaustion_is_not_an_error() {
        let (net, g) = (fixtures::toy3(), fixtures::coaut_grammar());
        let r = run(
            &net,
            &g,
            &RunConfig {
                max_steps: 10,
                ..RunConfig::default()
            },
        )
        .unwrap();
        assert!(!r.converged);
        assert_eq!(r.steps, 10);
    }

    proptest::proptest! {
        #![proptest_config(proptest::prelude::ProptestConfig::with_cases(24))]
        #[test]
        fn results_are_distributions_over_researchers(seed in 0..u64::MAX, walkers in 1..4usize) {
            let cfg = RunConfig { seed, walkers, epsilon: 0.05, max_steps: 200_000, ..RunConfig::default() };
            let r = run(&fixtures::toy2x2(), &fixtures::coaut_prime_grammar(), &cfg).unwrap();
            let total: u64 = r.counts.values().sum();
            proptest::prop_assert!(total > 0);
            proptest::prop_assert!((r.normalized.values().sum::<f64>() - 1.0).abs() < 1e-12);
            let researchers: Vec<_> = ["r1", "r2", "r3", "r4", "r5"].map(lanl).into();
            for (k, c) in &r.counts {
                proptest::prop_assert!(researchers.contains(k));
                proptest::prop_assert_eq!(r.normalized[k], *c as f64 / total as f64);
            }
        }
    }
}
