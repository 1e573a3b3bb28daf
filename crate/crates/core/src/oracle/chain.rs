use std::collections::{BTreeMap, BTreeSet, HashMap, VecDeque};

use super::power::{closed_classes, power_iteration_from, PowerOptions, PowerResult, SparseRows};
use super::OracleError;
use crate::grammar::{validate_grammar, AttributeKind, Direction, Grammar, Rule};
use crate::graph::{Node, SemanticNetwork, Triple};
use crate::vocab;

/// `(context, rule, edge)` position of a grammar edge.
pub type EdgeRef = (usize, usize, usize);

/// One time step kept in a chain state's window.
#[derive(Clone, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct Slot {
    pub vertex: Node,
    pub context: usize,
    /// Edge followed into this step; `None` at entry.
    pub via: Option<EdgeRef>,
}

/// Rule-level walker state: the next rule to run and the last `k + 1`
/// steps, oldest first. Leading `None`s stand for times before entry.
#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct ChainState {
    pub cursor: usize,
    pub window: Vec<Option<Slot>>,
}

impl ChainState {
    pub fn current(&self) -> &Slot {
        self.window
            .last()
            .and_then(Option::as_ref)
            .expect("window ends at the current step")
    }

    pub fn vertex(&self) -> &Node {
        &self.current().vertex
    }

    pub fn context(&self) -> usize {
        self.current().context
    }
}

/// How Reresolve rules enter the chain.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Teleport {
    /// Each matching path is a transition with probability `d / |Q|`.
    Exact,
    /// Reresolve only advances the rule cursor.
    Ignore,
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct ChainOptions {
    pub max_states: usize,
    pub teleport: Teleport,
}

impl Default for ChainOptions {
    fn default() -> Self {
        ChainOptions {
            max_states: 100_000,
            teleport: Teleport::Exact,
        }
    }
}

/// The walker process of a grammar on a network as an explicit Markov
/// chain, one transition per rule execution.
#[derive(Clone, Debug)]
pub struct ExpandedChain {
    pub states: Vec<ChainState>,
    pub transitions: Vec<Vec<(usize, f64)>>,
    /// Vertex counted when the state's rule is IncrCount.
    pub counted: Vec<Option<Node>>,
    /// Spawn distribution.
    pub start: Vec<(usize, f64)>,
    pub memory_bound: usize,
    /// Transitions that move along a network edge.
    moves: Vec<Vec<bool>>,
}

pub fn expand_chain(
    net: &SemanticNetwork,
    g: &Grammar,
    opts: &ChainOptions,
) -> Result<ExpandedChain, OracleError> {
    let errors: Vec<_> = validate_grammar(g, None)
        .into_iter()
        .filter(|d| d.is_error())
        .collect();
    if !errors.is_empty() {
        return Err(OracleError::InvalidGrammar(errors));
    }
    let x = Expander::new(net, g, opts.teleport);
    let entries: Vec<usize> = g
        .contexts()
        .iter()
        .enumerate()
        .filter(|(i, c)| c.is_entry && !x.instances[*i].is_empty())
        .map(|(i, _)| i)
        .collect();
    if entries.is_empty() {
        return Err(OracleError::Unrunnable(
            "no entry context resolves to a vertex".into(),
        ));
    }

    let mut index: HashMap<ChainState, usize> = HashMap::new();
    let mut states = Vec::new();
    let mut queue = VecDeque::new();
    let mut intern = |s: ChainState,
                      states: &mut Vec<ChainState>,
                      queue: &mut VecDeque<usize>|
     -> Result<usize, OracleError> {
        if let Some(i) = index.get(&s) {
            return Ok(*i);
        }
        if states.len() == opts.max_states {
            return Err(OracleError::Capacity {
                max_states: opts.max_states,
            });
        }
        let i = states.len();
        index.insert(s.clone(), i);
        states.push(s);
        queue.push_back(i);
        Ok(i)
    };

    let mut start = Vec::new();
    for &e in &entries {
        let share = 1.0 / entries.len() as f64 / x.instances[e].len() as f64;
        for v in &x.instances[e] {
            let mut window = vec![None; x.width];
            window[x.width - 1] = Some(Slot {
                vertex: v.clone(),
                context: e,
                via: None,
            });
            let i = intern(ChainState { cursor: 0, window }, &mut states, &mut queue)?;
            start.push((i, share));
        }
    }

    let mut transitions = Vec::new();
    let mut moves = Vec::new();
    while let Some(i) = queue.pop_front() {
        let succ = x.successors(&states[i])?;
        let mut merged: BTreeMap<usize, (f64, bool)> = BTreeMap::new();
        for (s, p, moved) in succ {
            let j = intern(s, &mut states, &mut queue)?;
            let e = merged.entry(j).or_insert((0.0, moved));
            e.0 += p;
        }
        if transitions.len() <= i {
            transitions.resize(i + 1, Vec::new());
            moves.resize(i + 1, Vec::new());
        }
        moves[i] = merged.values().map(|(_, m)| *m).collect();
        transitions[i] = merged.into_iter().map(|(j, (p, _))| (j, p)).collect();
    }

    let counted = states
        .iter()
        .map(|s| match g.contexts()[s.context()].rules.get(s.cursor) {
            Some(Rule::IncrCount { .. }) => Some(s.vertex().clone()),
            _ => None,
        })
        .collect();
    Ok(ExpandedChain {
        states,
        transitions,
        counted,
        start,
        memory_bound: x.width - 1,
        moves,
    })
}

struct Expander<'a> {
    net: &'a SemanticNetwork,
    g: &'a Grammar,
    teleport: Teleport,
    width: usize,
    instances: Vec<BTreeSet<Node>>,
}

type Successor = (ChainState, f64, bool);

impl<'a> Expander<'a> {
    fn new(net: &'a SemanticNetwork, g: &'a Grammar, teleport: Teleport) -> Self {
        Expander {
            net,
            g,
            teleport,
            width: g.memory_bound() + 1,
            instances: g
                .contexts()
                .iter()
                .map(|c| net.instances_of(&c.for_resource))
                .collect(),
        }
    }

    fn successors(&self, s: &ChainState) -> Result<Vec<Successor>, OracleError> {
        let ci = s.context();
        let ctx = &self.g.contexts()[ci];
        let next = |window: Vec<Option<Slot>>| ChainState {
            cursor: s.cursor + 1,
            window,
        };
        match ctx.rules.get(s.cursor) {
            None => Err(OracleError::UnsupportedGrammar {
                context: ctx.id.key(),
                reason: "the rule sequence ends without a Traverse".into(),
            }),
            Some(Rule::IncrCount { .. } | Rule::SubmitCounts { .. }) => {
                Ok(vec![(next(s.window.clone()), 1.0, false)])
            }
            Some(Rule::Reresolve {
                probability,
                steps,
                obeys,
                ..
            }) => {
                let stay = (next(s.window.clone()), 1.0, false);
                if self.teleport == Teleport::Ignore || *probability == 0.0 {
                    return Ok(vec![stay]);
                }
                let paths = self.paths(
                    s,
                    *steps,
                    obeys.contains(&AttributeKind::Is),
                    obeys.contains(&AttributeKind::Not),
                );
                if paths.is_empty() {
                    return Ok(vec![stay]);
                }
                let mut out = vec![(next(s.window.clone()), 1.0 - probability, false)];
                let share = probability / paths.len() as f64;
                let begin = self.width - paths[0].len();
                for path in paths {
                    let mut window = s.window.clone();
                    for (j, v) in path.into_iter().enumerate() {
                        window[begin + j].as_mut().expect("window is filled").vertex = v;
                    }
                    out.push((next(window), share, false));
                }
                Ok(out)
            }
            Some(Rule::Traverse { edges, .. }) => {
                let mut out = Vec::new();
                for (ei, e) in edges.iter().enumerate() {
                    let target = self.g.context_index(&e.target).expect("validated");
                    let tctx = &self.g.contexts()[target];
                    let pick = |kind| -> BTreeSet<&Node> {
                        tctx.steps_of(kind)
                            .into_iter()
                            .filter_map(|m| self.width.checked_sub(m))
                            .filter_map(|k| s.window[k].as_ref().map(|slot| &slot.vertex))
                            .collect()
                    };
                    let (not, is) = (pick(AttributeKind::Not), pick(AttributeKind::Is));
                    for b in self.neighbours(s.vertex(), e.direction, &e.predicate) {
                        if self.instances[target].contains(&b)
                            && !not.contains(&b)
                            && (is.is_empty() || is.contains(&b))
                        {
                            let mut window = s.window[1..].to_vec();
                            window.push(Some(Slot {
                                vertex: b,
                                context: target,
                                via: Some((ci, s.cursor, ei)),
                            }));
                            out.push(ChainState { cursor: 0, window });
                        }
                    }
                }
                if out.is_empty() {
                    return Err(OracleError::UnsupportedGrammar {
                        context: ctx.id.key(),
                        reason: format!("no admissible move from {}", s.vertex().key()),
                    });
                }
                let p = 1.0 / out.len() as f64;
                Ok(out.into_iter().map(|st| (st, p, true)).collect())
            }
        }
    }

    /// One entry per matching triple, so parallel edges count twice.
    fn neighbours(&self, v: &Node, dir: Direction, predicate: &Node) -> Vec<Node> {
        let any = predicate.as_iri() == Some(vocab::RDF_PROPERTY);
        let triples: Vec<Triple> = match dir {
            Direction::Out => self.net.out_triples(v),
            Direction::In => self.net.in_triples(v),
        };
        triples
            .into_iter()
            .filter(|t| any || self.net.is_subproperty_of(t.predicate(), predicate))
            .map(|t| match dir {
                Direction::Out => t.object().clone(),
                Direction::In => t.subject().clone(),
            })
            .collect()
    }

    /// Vertex sequences matching the window's pattern, one per network path.
    fn paths(&self, s: &ChainState, steps: usize, obey_is: bool, obey_not: bool) -> Vec<Vec<Node>> {
        let filled = s.window.iter().filter(|x| x.is_some()).count();
        let len = steps.min(filled - 1) + 1;
        let begin = self.width - len;
        let pattern: Vec<&Slot> = s.window[begin..]
            .iter()
            .map(|x| x.as_ref().expect("filled"))
            .collect();

        let allowed = |j: usize, v: &Node, prefix: &[Node]| -> bool {
            let ctx = &self.g.contexts()[pattern[j].context];
            let at = |m: usize| -> Option<Node> {
                let k = (begin + j).checked_sub(m)?;
                if k >= begin {
                    Some(prefix[k - begin].clone())
                } else {
                    s.window[k].as_ref().map(|x| x.vertex.clone())
                }
            };
            if obey_not
                && ctx
                    .steps_of(AttributeKind::Not)
                    .into_iter()
                    .any(|m| at(m).as_ref() == Some(v))
            {
                return false;
            }
            if obey_is {
                let req: Vec<Node> = ctx
                    .steps_of(AttributeKind::Is)
                    .into_iter()
                    .filter_map(at)
                    .collect();
                if !req.is_empty() && !req.contains(v) {
                    return false;
                }
            }
            true
        };

        let mut frontier: Vec<Vec<Node>> = self.instances[pattern[0].context]
            .iter()
            .filter(|v| allowed(0, v, &[]))
            .map(|v| vec![v.clone()])
            .collect();
        for (j, slot) in pattern.iter().enumerate().take(len).skip(1) {
            let (c, r, e) = slot.via.expect("inner window steps have an edge");
            let Rule::Traverse { edges, .. } = &self.g.contexts()[c].rules[r] else {
                unreachable!("edges come from Traverse rules")
            };
            let edge = &edges[e];
            let mut grown = Vec::new();
            for prefix in frontier {
                let last = prefix.last().expect("non-empty");
                for b in self.neighbours(last, edge.direction, &edge.predicate) {
                    if self.instances[slot.context].contains(&b) && allowed(j, &b, &prefix) {
                        let mut p = prefix.clone();
                        p.push(b);
                        grown.push(p);
                    }
                }
            }
            frontier = grown;
        }
        frontier
    }
}

impl ExpandedChain {
    pub fn len(&self) -> usize {
        self.states.len()
    }

    pub fn is_empty(&self) -> bool {
        self.states.is_empty()
    }

    pub fn rows(&self) -> SparseRows {
        SparseRows::new(self.transitions.clone())
    }

    /// Closed communicating classes, each sorted.
    pub fn closed_classes(&self) -> Vec<Vec<usize>> {
        closed_classes(&self.rows())
    }

    /// True iff the chain has a single closed class, so the long-run
    /// behaviour does not depend on where the walker starts.
    pub fn strongly_connected(&self) -> bool {
        self.closed_classes().len() == 1
    }

    /// Long-run state occupancy from the spawn distribution.
    pub fn stationary(&self, opts: &PowerOptions) -> PowerResult {
        let mut x = vec![0.0; self.len()];
        for (i, p) in &self.start {
            x[*i] += p;
        }
        power_iteration_from(&self.rows(), x, opts)
    }

    /// Long-run share of IncrCount executions per vertex.
    pub fn counted_distribution(&self, mass: &[f64]) -> BTreeMap<Node, f64> {
        let mut out: BTreeMap<Node, f64> = BTreeMap::new();
        for (i, v) in self.counted.iter().enumerate() {
            if let Some(v) = v {
                *out.entry(v.clone()).or_insert(0.0) += mass[i];
            }
        }
        let total: f64 = out.values().sum();
        out.retain(|_, m| *m > 0.0);
        out.values_mut().for_each(|m| *m /= total);
        out
    }

    /// Number of network moves between consecutive counted states, over
    /// all reachable counted states.
    pub fn counted_path_lengths(&self) -> BTreeSet<usize> {
        let mut lengths = BTreeSet::new();
        let cap = self.len();
        for s in (0..self.len()).filter(|i| self.counted[*i].is_some()) {
            let mut seen = BTreeSet::new();
            let mut stack: Vec<(usize, usize)> = self.successors_with_moves(s, 0).collect();
            while let Some((t, d)) = stack.pop() {
                if d > cap || !seen.insert((t, d)) {
                    continue;
                }
                if self.counted[t].is_some() {
                    lengths.insert(d);
                } else {
                    stack.extend(self.successors_with_moves(t, d));
                }
            }
        }
        lengths
    }

    fn successors_with_moves(
        &self,
        s: usize,
        d: usize,
    ) -> impl Iterator<Item = (usize, usize)> + '_ {
        self.transitions[s]
            .iter()
            .zip(&self.moves[s])
            .filter(|((_, p), _)| *p > 0.0)
            .map(move |((t, _), m)| (*t, d + *m as usize))
    }
}
