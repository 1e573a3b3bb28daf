//! The individual walker operations, one per rule or attribute.

use std::collections::{BTreeMap, BTreeSet};
use std::sync::Arc;

use rand::Rng;

use super::program::{BoundRule, Path, PatternStep, Program};
use super::rank::RankVector;
use super::state::{StepRecord, WalkerState};
use super::RunError;
use crate::grammar::Direction;
use crate::graph::{NodeId, TripleId};

/// Result of one rule execution.
#[derive(Clone, Debug, PartialEq, Eq)]
pub enum StepOutcome {
    Moved,
    Counted,
    Submitted,
    Reresolved {
        teleported: bool,
    },
    /// The walker was replaced; `discarded` unsubmitted counts were lost.
    Halted {
        discarded: u64,
    },
}

/// A traversable `(triple, grammar edge)` pair.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct Candidate {
    pub triple: TripleId,
    pub edge: usize,
    /// Where the walker ends up.
    pub vertex: NodeId,
    pub label: NodeId,
    pub direction: Direction,
}

/// Internal per-step event; carries the data observers and the run loop need.
#[derive(Debug)]
pub(crate) enum Event {
    Moved,
    Counted,
    Submitted(BTreeMap<NodeId, u64>),
    Reresolved { teleported: bool },
    Halted { discarded: BTreeMap<NodeId, u64> },
}

impl Event {
    pub(crate) fn outcome(&self) -> StepOutcome {
        match self {
            Event::Moved => StepOutcome::Moved,
            Event::Counted => StepOutcome::Counted,
            Event::Submitted(_) => StepOutcome::Submitted,
            Event::Reresolved { teleported } => StepOutcome::Reresolved {
                teleported: *teleported,
            },
            Event::Halted { discarded } => StepOutcome::Halted {
                discarded: discarded.values().sum(),
            },
        }
    }
}

/// Picks an entry context uniformly among those with instances, then a
/// vertex uniformly among its instances.
pub fn spawn_walker<R: Rng + ?Sized>(
    p: &Program<'_>,
    rng: &mut R,
) -> Result<WalkerState, RunError> {
    let entries = p.runnable_entries();
    if entries.is_empty() {
        return Err(RunError::Unrunnable(
            "no entry context resolves to a vertex".into(),
        ));
    }
    let context = entries[rng.gen_range(0..entries.len())];
    let instances = p.instances(context);
    let vertex = instances[rng.gen_range(0..instances.len())];
    Ok(WalkerState::new(
        StepRecord {
            vertex,
            label: None,
            context,
            via: None,
            direction: None,
        },
        p.history_keep(),
    ))
}

/// `(X, O)` for a move into `next`: vertices the resolution must avoid
/// (Not) and, when non-empty, must be one of (Is).
///
/// A step value `m` refers to the vertex `m` steps before the one being
/// resolved, so `m = 1` is the current vertex.
pub fn constraint_sets(
    p: &Program<'_>,
    w: &WalkerState,
    next: usize,
) -> (BTreeSet<NodeId>, BTreeSet<NodeId>) {
    let ctx = &p.contexts[next];
    let resolving = w.time() + 1;
    let lookup = |steps: &[usize]| -> BTreeSet<NodeId> {
        steps
            .iter()
            .filter_map(|m| resolving.checked_sub(*m))
            .filter_map(|k| w.at(k).map(|r| r.vertex))
            .collect()
    };
    (lookup(&ctx.not_steps), lookup(&ctx.is_steps))
}

/// Every way to follow one of `edges` from the current vertex.
pub fn traversal_candidates(p: &Program<'_>, w: &WalkerState, edges: &[usize]) -> Vec<Candidate> {
    let net = p.network();
    let a = w.vertex();
    let mut out = Vec::new();
    let mut sets: BTreeMap<usize, (BTreeSet<NodeId>, BTreeSet<NodeId>)> = BTreeMap::new();
    for &e in edges {
        let edge = &p.edges[e];
        let (x, o) = sets
            .entry(edge.target)
            .or_insert_with(|| constraint_sets(p, w, edge.target));
        let triples = match edge.direction {
            Direction::Out => net.outgoing(a),
            Direction::In => net.incoming(a),
        };
        for &t in triples {
            let ids = net.triple_ids(t);
            let b = match edge.direction {
                Direction::Out => ids.object,
                Direction::In => ids.subject,
            };
            if p.predicate_matches(edge.predicate, ids.predicate)
                && p.resolves(edge.target, b)
                && !x.contains(&b)
                && (o.is_empty() || o.contains(&b))
            {
                out.push(Candidate {
                    triple: t,
                    edge: e,
                    vertex: b,
                    label: ids.predicate,
                    direction: edge.direction,
                });
            }
        }
    }
    out
}

pub fn apply_traverse(p: &Program<'_>, w: &mut WalkerState, c: &Candidate) {
    w.push(StepRecord {
        vertex: c.vertex,
        label: Some(c.label),
        context: p.edges[c.edge].target,
        via: Some(c.edge),
        direction: Some(c.direction),
    });
}

pub fn incr_count(w: &mut WalkerState) {
    w.increment(w.vertex());
    w.advance_cursor();
}

/// Moves the walker's local counts into `global`.
pub fn submit_counts(w: &mut WalkerState, global: &mut RankVector) {
    let local = w.take_counts();
    global.submit(&local);
    w.advance_cursor();
}

/// All network paths matching the grammar pattern of the last `steps`
/// moves (fewer near entry). Attributes are enforced only when obeyed.
/// The walker's own path is always a member.
pub fn reresolve_paths(
    p: &Program<'_>,
    w: &WalkerState,
    steps: usize,
    obey_is: bool,
    obey_not: bool,
) -> Arc<Vec<Path>> {
    let n = w.time();
    let start = n - steps.min(n);
    let pattern: Vec<PatternStep> = (start..=n)
        .map(|k| {
            let r = w.at(k).expect("window lies in retained history");
            (r.context, if k == start { None } else { r.via })
        })
        .collect();
    let cacheable = !obey_is && !obey_not;
    if cacheable {
        if let Some(hit) = p.cached_paths(&pattern) {
            return hit;
        }
    }
    let mut found = Vec::new();
    let mut search = PathSearch {
        p,
        w,
        pattern: &pattern,
        start,
        obey_is,
        obey_not,
        vertices: Vec::with_capacity(pattern.len()),
        labels: Vec::with_capacity(pattern.len()),
        out: &mut found,
    };
    for &v in p.instances(pattern[0].0) {
        if search.allowed(0, v) {
            search.vertices.push(v);
            search.extend();
            search.vertices.pop();
        }
    }
    if cacheable {
        p.cache_paths(pattern, found)
    } else {
        Arc::new(found)
    }
}

struct PathSearch<'s, 'p> {
    p: &'s Program<'p>,
    w: &'s WalkerState,
    pattern: &'s [PatternStep],
    start: usize,
    obey_is: bool,
    obey_not: bool,
    vertices: Vec<NodeId>,
    labels: Vec<NodeId>,
    out: &'s mut Vec<Path>,
}

impl PathSearch<'_, '_> {
    fn extend(&mut self) {
        let j = self.vertices.len();
        if j == self.pattern.len() {
            self.out.push(Path {
                vertices: self.vertices.clone(),
                labels: self.labels.clone(),
            });
            return;
        }
        let (ctx, via) = self.pattern[j];
        let edge = &self.p.edges[via.expect("inner window steps have an edge")];
        let net = self.p.network();
        let a = *self.vertices.last().expect("window start is set");
        let triples = match edge.direction {
            Direction::Out => net.outgoing(a),
            Direction::In => net.incoming(a),
        };
        for &t in triples {
            let ids = net.triple_ids(t);
            let b = match edge.direction {
                Direction::Out => ids.object,
                Direction::In => ids.subject,
            };
            if self.p.predicate_matches(edge.predicate, ids.predicate)
                && self.p.resolves(ctx, b)
                && self.allowed(j, b)
            {
                self.vertices.push(b);
                self.labels.push(ids.predicate);
                self.extend();
                self.labels.pop();
                self.vertices.pop();
            }
        }
    }

    /// Obeyed Is/Not constraints for placing `v` at window position `j`.
    fn allowed(&self, j: usize, v: NodeId) -> bool {
        if !self.obey_is && !self.obey_not {
            return true;
        }
        let ctx = &self.p.contexts[self.pattern[j].0];
        let at = self.start + j;
        let vertex_at = |k: usize| -> Option<NodeId> {
            if k >= self.start {
                Some(self.vertices[k - self.start])
            } else {
                self.w.at(k).map(|r| r.vertex)
            }
        };
        if self.obey_not {
            for m in &ctx.not_steps {
                if let Some(k) = at.checked_sub(*m) {
                    if vertex_at(k) == Some(v) {
                        return false;
                    }
                }
            }
        }
        if self.obey_is {
            let required: Vec<NodeId> = ctx
                .is_steps
                .iter()
                .filter_map(|m| at.checked_sub(*m))
                .filter_map(vertex_at)
                .collect();
            if !required.is_empty() && !required.contains(&v) {
                return false;
            }
        }
        true
    }
}

/// Overwrites the re-resolution window with `path`. Contexts, edges and
/// local counts are untouched.
pub fn apply_reresolve(w: &mut WalkerState, path: &Path) {
    let n = w.time();
    let start = n + 1 - path.vertices.len();
    for (j, v) in path.vertices.iter().enumerate() {
        let r = w.record_mut(start + j);
        r.vertex = *v;
        if j > 0 {
            r.label = Some(path.labels[j - 1]);
        }
    }
}

fn current_path(w: &WalkerState, len: usize) -> Path {
    let n = w.time();
    let start = n + 1 - len;
    let records: Vec<&StepRecord> = (start..=n).map(|k| w.at(k).expect("retained")).collect();
    Path {
        vertices: records.iter().map(|r| r.vertex).collect(),
        labels: records[1..]
            .iter()
            .map(|r| r.label.expect("non-entry records have labels"))
            .collect(),
    }
}

/// Runs the next rule of the current context. Submitted counts go into
/// `global`; on a halt the walker is replaced by a fresh one.
pub fn step<R: Rng + ?Sized>(
    p: &Program<'_>,
    w: &mut WalkerState,
    global: &mut RankVector,
    rng: &mut R,
) -> Result<StepOutcome, RunError> {
    let event = advance(p, w, rng)?;
    if let Event::Submitted(counts) = &event {
        global.submit(counts);
    }
    Ok(event.outcome())
}

pub(crate) fn advance<R: Rng + ?Sized>(
    p: &Program<'_>,
    w: &mut WalkerState,
    rng: &mut R,
) -> Result<Event, RunError> {
    let rules = &p.contexts[w.context()].rules;
    let Some(rule) = rules.get(w.cursor()) else {
        return halt(p, w, rng);
    };
    match rule {
        BoundRule::Traverse(edges) => {
            let candidates = traversal_candidates(p, w, edges);
            if candidates.is_empty() {
                return halt(p, w, rng);
            }
            let c = candidates[rng.gen_range(0..candidates.len())];
            apply_traverse(p, w, &c);
            Ok(Event::Moved)
        }
        BoundRule::IncrCount => {
            incr_count(w);
            Ok(Event::Counted)
        }
        BoundRule::SubmitCounts => {
            let counts = w.take_counts();
            w.advance_cursor();
            Ok(Event::Submitted(counts))
        }
        BoundRule::Reresolve {
            probability,
            steps,
            obey_is,
            obey_not,
        } => {
            w.advance_cursor();
            if !rng.gen_bool(*probability) {
                return Ok(Event::Reresolved { teleported: false });
            }
            let paths = reresolve_paths(p, w, *steps, *obey_is, *obey_not);
            if paths.is_empty() {
                return Ok(Event::Reresolved { teleported: false });
            }
            let chosen = &paths[rng.gen_range(0..paths.len())];
            let teleported = *chosen != current_path(w, chosen.vertices.len());
            apply_reresolve(w, chosen);
            Ok(Event::Reresolved { teleported })
        }
    }
}

fn halt<R: Rng + ?Sized>(
    p: &Program<'_>,
    w: &mut WalkerState,
    rng: &mut R,
) -> Result<Event, RunError> {
    let discarded = w.take_counts();
    *w = spawn_walker(p, rng)?;
    Ok(Event::Halted { discarded })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::fixtures::{self, ex, grammar_term, lanl};
    use crate::graph::Node;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    fn rng() -> ChaCha8Rng {
        ChaCha8Rng::seed_from_u64(11)
    }

    fn ctx(p: &Program<'_>, name: &str) -> usize {
        p.context_index(&grammar_term(name)).unwrap()
    }

    fn id(p: &Program<'_>, n: &Node) -> NodeId {
        p.network().node_id(n).unwrap()
    }

    #[test]
    fn spawn_on_toy3_picks_a_university() {
        let (net, g) = (fixtures::toy3(), fixtures::coaut_grammar());
        let p = Program::new(&net, &g).unwrap();
        let mut r = rng();
        let mut seen = BTreeMap::new();
        for _ in 0..4000 {
            let w = spawn_walker(&p, &mut r).unwrap();
            assert_eq!(w.retained(), 1);
            assert_eq!(w.cursor(), 0);
            assert!(w.local_counts().is_empty());
            assert_eq!(w.current().label, None);
            assert_eq!(w.current().direction, None);
            *seen.entry(w.vertex()).or_insert(0u32) += 1;
        }
        let u1 = seen[&id(&p, &lanl("U1"))] as f64 / 4000.0;
        assert_eq!(seen.len(), 2);
        assert!((u1 - 0.5).abs() < 0.03, "{u1}");
    }

    #[test]
    fn spawn_single_instance() {
        let (net, g) = (fixtures::fig10(), fixtures::fig10_grammar());
        let p = Program::new(&net, &g).unwrap();
        let w = spawn_walker(&p, &mut rng()).unwrap();
        assert_eq!(w.vertex(), id(&p, &ex("a")));
    }

    #[test]
    fn spawn_without_instances_is_unrunnable() {
        let net = fixtures::fig10();
        let g = fixtures::coaut_grammar();
        let p = Program::new(&net, &g).unwrap();
        assert!(matches!(
            spawn_walker(&p, &mut rng()),
            Err(RunError::Unrunnable(_))
        ));
    }

    #[test]
    fn fig10_has_three_candidates() {
        let (net, g) = (fixtures::fig10(), fixtures::fig10_grammar());
        let p = Program::new(&net, &g).unwrap();
        let w = p.start_at(&grammar_term("A_0"), &ex("a")).unwrap();
        let crate::walker::program::BoundRule::Traverse(edges) = &p.contexts[w.context()].rules[0]
        else {
            panic!("traverse expected");
        };
        let c = traversal_candidates(&p, &w, edges);
        let ends: BTreeSet<NodeId> = c.iter().map(|c| c.vertex).collect();
        let want: BTreeSet<NodeId> = ["j", "e", "f"].iter().map(|n| id(&p, &ex(n))).collect();
        assert_eq!(ends, want);
    }

    #[test]
    fn traverse_directions_and_history_growth() {
        let (net, g) = (fixtures::fig10(), fixtures::fig10_grammar());
        let p = Program::new(&net, &g).unwrap().with_full_history();
        let w0 = p.start_at(&grammar_term("A_0"), &ex("a")).unwrap();
        let BoundRule::Traverse(edges) = &p.contexts[w0.context()].rules[0] else {
            panic!("traverse expected");
        };
        for c in traversal_candidates(&p, &w0, edges) {
            let mut w = w0.clone();
            apply_traverse(&p, &mut w, &c);
            assert_eq!(w.retained(), 2);
            let g_last = w.g_history(&p).pop().unwrap();
            let psi_last = w.psi_history(&p).pop().unwrap();
            assert_eq!(g_last.1, Some(ex("omega")));
            assert_eq!(g_last.2, psi_last.2);
            let expect = if g_last.0 == ex("j") {
                Direction::In
            } else {
                Direction::Out
            };
            assert_eq!(g_last.2, Some(expect));
            assert_eq!(psi_last.0, grammar_term("Any_1"));
            assert_eq!(w.cursor(), 0);
        }
    }

    #[test]
    fn not_excludes_the_first_author() {
        let (net, g) = (fixtures::toy3(), fixtures::coaut_grammar());
        let p = Program::new(&net, &g).unwrap().with_full_history();
        let mut w = p
            .start_at(&grammar_term("University_0"), &lanl("U1"))
            .unwrap();
        // walk U1 -> r1 -> c1 by hand
        let moves = [("Researcher_1", "r1"), ("ConferenceArticle_2", "c1")];
        for (c, v) in moves {
            let target = ctx(&p, c);
            let edges: Vec<usize> = (0..p.edges.len())
                .filter(|e| p.edges[*e].target == target)
                .collect();
            let cand = traversal_candidates(&p, &w, &edges)
                .into_iter()
                .find(|x| x.vertex == id(&p, &lanl(v)))
                .unwrap();
            apply_traverse(&p, &mut w, &cand);
        }
        let r3 = ctx(&p, "Researcher_3");
        let (x, o) = constraint_sets(&p, &w, r3);
        assert_eq!(x, BTreeSet::from([id(&p, &lanl("r1"))]));
        assert!(o.is_empty());
        let edges: Vec<usize> = (0..p.edges.len())
            .filter(|e| p.edges[*e].target == r3)
            .collect();
        let c = traversal_candidates(&p, &w, &edges);
        assert_eq!(c.len(), 1);
        assert_eq!(c[0].vertex, id(&p, &lanl("r2")));
        assert_eq!(c[0].direction, Direction::In);
    }

    #[test]
    fn no_matching_triples_means_no_candidates() {
        let (net, g) = (fixtures::toy3(), fixtures::coaut_grammar());
        let p = Program::new(&net, &g).unwrap();
        // a university context placed on a researcher: no incoming locatedAt
        let mut w = p
            .start_at(&grammar_term("Researcher_1"), &lanl("r1"))
            .unwrap();
        w.record_mut(0).context = ctx(&p, "University_0");
        let edges: Vec<usize> = (0..p.edges.len())
            .filter(|e| p.edges[*e].source.0 == ctx(&p, "University_0"))
            .collect();
        assert!(traversal_candidates(&p, &w, &edges).is_empty());
    }

    #[test]
    fn counting_and_submitting() {
        let (net, g) = (fixtures::toy3(), fixtures::coaut_grammar());
        let p = Program::new(&net, &g).unwrap();
        let mut w = p
            .start_at(&grammar_term("Researcher_1"), &lanl("r1"))
            .unwrap();
        let r1 = id(&p, &lanl("r1"));
        incr_count(&mut w);
        assert_eq!(w.local_counts()[&r1], 1);
        incr_count(&mut w);
        assert_eq!(w.local_counts()[&r1], 2);
        assert_eq!(w.local_counts().len(), 1);
        let mut global = RankVector::new();
        submit_counts(&mut w, &mut global);
        assert!(w.local_counts().is_empty());
        assert_eq!(global.counts()[&r1], 2);
        submit_counts(&mut w, &mut global);
        assert_eq!(global.counts()[&r1], 2);
        incr_count(&mut w);
        submit_counts(&mut w, &mut global);
        assert_eq!(global.counts()[&r1], 3);
    }

    #[test]
    fn reresolve_set_on_toy2x2() {
        let (net, g) = (fixtures::toy2x2(), fixtures::coaut_prime_grammar());
        let p = Program::new(&net, &g).unwrap();
        let mut r = rng();
        let mut w = p
            .start_at(&grammar_term("University_0"), &lanl("U3"))
            .unwrap();
        let mut global = RankVector::new();
        // SubmitCounts, Traverse, IncrCount, Traverse: now at ConferenceArticle_2
        for _ in 0..4 {
            step(&p, &mut w, &mut global, &mut r).unwrap();
        }
        assert_eq!(w.context(), ctx(&p, "ConferenceArticle_2"));
        let q = reresolve_paths(&p, &w, 2, false, false);
        assert_eq!(q.len(), 8);
        let mine = current_path(&w, 3);
        assert!(q.contains(&mine));
        let c4 = id(&p, &lanl("c4"));
        assert_eq!(q.iter().filter(|path| path.vertices[2] == c4).count(), 2);

        let before = w.clone();
        apply_reresolve(&mut w, &mine);
        assert_eq!(w, before);

        let other = q.iter().find(|path| path.vertices[2] != c4).unwrap();
        apply_reresolve(&mut w, other);
        assert_eq!(w.retained(), before.retained());
        assert_eq!(w.vertex(), other.vertices[2]);
        assert_eq!(w.psi_history(&p), before.psi_history(&p));
        assert_eq!(w.local_counts(), before.local_counts());
    }

    #[test]
    fn reresolve_fires_at_its_probability() {
        let (net, g) = (fixtures::toy2x2(), fixtures::coaut_prime_grammar());
        let p = Program::new(&net, &g).unwrap();
        let mut r = rng();
        let mut w = spawn_walker(&p, &mut r).unwrap();
        let (mut moved, mut runs) = (0u32, 0u32);
        for _ in 0..400_000 {
            let at_rule = w.context() == ctx(&p, "ConferenceArticle_2") && w.cursor() == 0;
            let retained = w.retained();
            let ev = advance(&p, &mut w, &mut r).unwrap();
            if at_rule {
                runs += 1;
                let Event::Reresolved { teleported } = ev else {
                    panic!("expected a reresolve event");
                };
                moved += teleported as u32;
                assert_eq!(w.retained(), retained);
            }
        }
        // |Q| = 8 and the current path is one of them
        let rate = moved as f64 / runs as f64;
        let want = 0.15 * 7.0 / 8.0;
        assert!((rate - want).abs() < 0.01, "{rate} vs {want}");
    }

    #[test]
    fn halting_discards_local_counts() {
        let (net, g) = (fixtures::toy3_solo(), fixtures::coaut_grammar());
        let p = Program::new(&net, &g).unwrap();
        let mut r = rng();
        let c5 = id(&p, &lanl("c5"));
        let mut global = RankVector::new();
        let mut w = loop {
            let mut w = p
                .start_at(&grammar_term("University_0"), &lanl("U1"))
                .unwrap();
            for _ in 0..4 {
                step(&p, &mut w, &mut global, &mut r).unwrap();
            }
            if w.vertex() == c5 {
                break w;
            }
        };
        assert!(global.counts().is_empty());
        assert_eq!(w.local_counts().values().sum::<u64>(), 1);
        let out = step(&p, &mut w, &mut global, &mut r).unwrap();
        assert_eq!(out, StepOutcome::Halted { discarded: 1 });
        assert!(global.counts().is_empty());
        assert_eq!(w.retained(), 1);
        assert!(w.local_counts().is_empty());
    }

    #[test]
    fn first_step_at_researcher_counts() {
        let (net, g) = (fixtures::toy3(), fixtures::coaut_grammar());
        let p = Program::new(&net, &g).unwrap();
        let mut w = p
            .start_at(&grammar_term("Researcher_1"), &lanl("r2"))
            .unwrap();
        let out = step(&p, &mut w, &mut RankVector::new(), &mut rng()).unwrap();
        assert_eq!(out, StepOutcome::Counted);
    }
}
