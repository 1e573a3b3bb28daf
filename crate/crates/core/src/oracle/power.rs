use petgraph::algo::tarjan_scc;
use petgraph::graph::DiGraph;

/// A row-stochastic operator acting on row vectors.
pub trait StochasticOperator {
    fn dim(&self) -> usize;
    /// `out = x · M`.
    fn left_mul(&self, x: &[f64], out: &mut [f64]);
    /// Columns with a positive entry in row `i`.
    fn support(&self, i: usize) -> Vec<usize>;
}

/// Sparse rows of `(column, probability)`.
#[derive(Clone, Debug, PartialEq)]
pub struct SparseRows {
    rows: Vec<Vec<(usize, f64)>>,
}

impl SparseRows {
    pub fn new(rows: Vec<Vec<(usize, f64)>>) -> Self {
        SparseRows { rows }
    }

    pub fn rows(&self) -> &[Vec<(usize, f64)>] {
        &self.rows
    }
}

impl StochasticOperator for SparseRows {
    fn dim(&self) -> usize {
        self.rows.len()
    }

    fn left_mul(&self, x: &[f64], out: &mut [f64]) {
        out.fill(0.0);
        for (i, row) in self.rows.iter().enumerate() {
            if x[i] != 0.0 {
                for (j, p) in row {
                    out[*j] += x[i] * p;
                }
            }
        }
    }

    fn support(&self, i: usize) -> Vec<usize> {
        self.rows[i]
            .iter()
            .filter(|(_, p)| *p > 0.0)
            .map(|(j, _)| *j)
            .collect()
    }
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct PowerOptions {
    pub tol: f64,
    pub max_iters: usize,
}

impl Default for PowerOptions {
    fn default() -> Self {
        PowerOptions {
            tol: 1e-10,
            max_iters: 10_000,
        }
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct PowerResult {
    pub distribution: Vec<f64>,
    pub iterations: usize,
    pub converged: bool,
    /// Some closed class is periodic; the lazy chain `(I + M) / 2` was
    /// iterated instead, which has the same stationary distributions.
    pub periodic: bool,
}

/// Power iteration from the uniform vector.
pub fn power_iteration<M: StochasticOperator + ?Sized>(m: &M, opts: &PowerOptions) -> PowerResult {
    let n = m.dim();
    power_iteration_from(m, vec![1.0 / n as f64; n], opts)
}

/// Iterates `x ← x·M` until the L1 change drops below `opts.tol`.
pub fn power_iteration_from<M: StochasticOperator + ?Sized>(
    m: &M,
    start: Vec<f64>,
    opts: &PowerOptions,
) -> PowerResult {
    let periodic = closed_classes(m).iter().any(|c| period(m, c) > 1);
    let mut x = start;
    let mut next = vec![0.0; x.len()];
    let mut iterations = 0;
    let mut converged = false;
    while iterations < opts.max_iters {
        m.left_mul(&x, &mut next);
        if periodic {
            for (n, xi) in next.iter_mut().zip(&x) {
                *n = 0.5 * (*n + xi);
            }
        }
        let total: f64 = next.iter().sum();
        next.iter_mut().for_each(|v| *v /= total);
        let change: f64 = next.iter().zip(&x).map(|(a, b)| (a - b).abs()).sum();
        std::mem::swap(&mut x, &mut next);
        iterations += 1;
        if change < opts.tol {
            converged = true;
            break;
        }
    }
    PowerResult {
        distribution: x,
        iterations,
        converged,
        periodic,
    }
}

fn support_graph<M: StochasticOperator + ?Sized>(m: &M) -> DiGraph<(), ()> {
    let mut g = DiGraph::new();
    let nodes: Vec<_> = (0..m.dim()).map(|_| g.add_node(())).collect();
    for i in 0..m.dim() {
        for j in m.support(i) {
            g.add_edge(nodes[i], nodes[j], ());
        }
    }
    g
}

/// Strongly connected components with no edge leaving them, each sorted,
/// ordered by smallest member.
pub fn closed_classes<M: StochasticOperator + ?Sized>(m: &M) -> Vec<Vec<usize>> {
    let g = support_graph(m);
    let mut comp = vec![0; m.dim()];
    let sccs = tarjan_scc(&g);
    for (c, members) in sccs.iter().enumerate() {
        for v in members {
            comp[v.index()] = c;
        }
    }
    let mut out: Vec<Vec<usize>> = sccs
        .iter()
        .enumerate()
        .filter(|(c, members)| {
            members
                .iter()
                .all(|v| m.support(v.index()).iter().all(|j| comp[*j] == *c))
        })
        .map(|(_, members)| {
            let mut v: Vec<usize> = members.iter().map(|n| n.index()).collect();
            v.sort_unstable();
            v
        })
        .collect();
    out.sort();
    out
}

/// Period of a communicating class: gcd of `level(u) + 1 − level(v)` over
/// its edges, for BFS levels from any member.
pub fn period<M: StochasticOperator + ?Sized>(m: &M, class: &[usize]) -> usize {
    let inside: std::collections::HashSet<usize> = class.iter().copied().collect();
    let mut level = std::collections::HashMap::new();
    let mut queue = std::collections::VecDeque::new();
    level.insert(class[0], 0i64);
    queue.push_back(class[0]);
    let mut g = 0i64;
    while let Some(u) = queue.pop_front() {
        let lu = level[&u];
        for v in m.support(u).into_iter().filter(|v| inside.contains(v)) {
            match level.get(&v) {
                Some(lv) => g = gcd(g, (lu + 1 - lv).abs()),
                None => {
                    level.insert(v, lu + 1);
                    queue.push_back(v);
                }
            }
        }
    }
    g.max(1) as usize
}

fn gcd(a: i64, b: i64) -> i64 {
    if b == 0 {
        a
    } else {
        gcd(b, a % b)
    }
}
