//! Exact maximum independent set.
//!
//! [`solve_exact`] is a branch-and-reduce search: degree-0/1 rules and
//! degree-2 folding to a fixpoint, connected components solved separately,
//! branching on a maximum-degree vertex, and pruning with
//! `remaining - |maximal matching|`. [`solve_naive`] is the plain
//! include/exclude enumeration used to cross-check it on small graphs.

use std::collections::{BTreeSet, HashSet};
use std::fmt;
use std::str::FromStr;
use std::time::{Duration, Instant};

use serde::Serialize;
use thiserror::Error;

use crate::graph::Graph;

/// How a self-loop affects independence.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Hash, Serialize)]
pub enum LoopPolicy {
    /// A looped vertex is its own neighbor and can never be chosen.
    #[default]
    ExcludeLoopVertex,
    /// Loops are dropped before solving.
    IgnoreLoops,
}

impl fmt::Display for LoopPolicy {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            LoopPolicy::ExcludeLoopVertex => "exclude",
            LoopPolicy::IgnoreLoops => "ignore",
        })
    }
}

impl FromStr for LoopPolicy {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, String> {
        match s {
            "exclude" => Ok(LoopPolicy::ExcludeLoopVertex),
            "ignore" => Ok(LoopPolicy::IgnoreLoops),
            other => Err(format!("unknown loop policy {other:?} (expected exclude|ignore)")),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum SolveError {
    #[error("naive solver handles at most {max} vertices, got {n}")]
    TooLarge { n: usize, max: usize },
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct SolveResult {
    pub n_star: usize,
    /// Ascending vertex ids.
    pub witness: Vec<usize>,
    pub nodes_explored: u64,
    #[serde(skip)]
    pub wall_time: Duration,
    /// False when a time budget cut the search short; `n_star` is then only
    /// a lower bound.
    pub proven: bool,
    pub policy: LoopPolicy,
}

impl SolveResult {
    pub fn ratio(&self, n: usize) -> f64 {
        self.n_star as f64 / n as f64
    }
}

pub fn verify_independent(g: &Graph, s: &[usize], policy: LoopPolicy) -> bool {
    let set: HashSet<usize> = s.iter().copied().collect();
    if set.iter().any(|&v| v >= g.n()) {
        return false;
    }
    set.iter().all(|&v| {
        !(policy == LoopPolicy::ExcludeLoopVertex && g.has_self_loop(v))
            && g.neighbors(v).iter().all(|u| !set.contains(u))
    })
}

pub const NAIVE_MAX_VERTICES: usize = 32;

/// Exhaustive include/exclude enumeration over vertices in id order, pruned
/// when even taking every remaining candidate cannot beat the incumbent.
pub fn solve_naive(g: &Graph, policy: LoopPolicy) -> Result<SolveResult, SolveError> {
    let n = g.n();
    if n > NAIVE_MAX_VERTICES {
        return Err(SolveError::TooLarge { n, max: NAIVE_MAX_VERTICES });
    }
    let start = Instant::now();
    let masks: Vec<u64> = (0..n)
        .map(|v| g.neighbors(v).iter().fold(0u64, |m, &u| m | 1 << u))
        .collect();
    let mut candidates: u64 = (1u64 << n) - 1;
    if policy == LoopPolicy::ExcludeLoopVertex {
        for &v in g.self_loops() {
            candidates &= !(1 << v);
        }
    }
    struct Naive<'a> {
        masks: &'a [u64],
        best: u64,
        nodes: u64,
    }
    impl Naive<'_> {
        fn rec(&mut self, candidates: u64, chosen: u64) {
            self.nodes += 1;
            if candidates == 0 {
                if chosen.count_ones() > self.best.count_ones() {
                    self.best = chosen;
                }
                return;
            }
            if chosen.count_ones() + candidates.count_ones() <= self.best.count_ones() {
                return;
            }
            let v = candidates.trailing_zeros();
            let bit = 1u64 << v;
            self.rec(candidates & !bit & !self.masks[v as usize], chosen | bit);
            self.rec(candidates & !bit, chosen);
        }
    }
    let mut search = Naive { masks: &masks, best: 0, nodes: 0 };
    search.rec(candidates, 0);
    let witness: Vec<usize> = (0..n).filter(|&v| search.best >> v & 1 == 1).collect();
    Ok(SolveResult {
        n_star: witness.len(),
        witness,
        nodes_explored: search.nodes,
        wall_time: start.elapsed(),
        proven: true,
        policy,
    })
}

/// Working graph for the search: vertices are never renumbered, folds
/// append new vertices.
#[derive(Debug, Clone)]
struct Kernel {
    adj: Vec<Vec<usize>>,
    alive: Vec<bool>,
    n_alive: usize,
}

impl Kernel {
    fn from_graph(g: &Graph, policy: LoopPolicy) -> Self {
        let mut k = Kernel {
            adj: (0..g.n()).map(|v| g.neighbors(v).to_vec()).collect(),
            alive: vec![true; g.n()],
            n_alive: g.n(),
        };
        if policy == LoopPolicy::ExcludeLoopVertex {
            for &v in g.self_loops() {
                k.remove(v);
            }
        }
        k
    }

    fn alive_vertices(&self) -> impl Iterator<Item = usize> + '_ {
        (0..self.adj.len()).filter(|&v| self.alive[v])
    }

    fn degree(&self, v: usize) -> usize {
        self.adj[v].len()
    }

    fn adjacent(&self, u: usize, v: usize) -> bool {
        self.adj[u].binary_search(&v).is_ok()
    }

    fn remove(&mut self, v: usize) {
        debug_assert!(self.alive[v]);
        for u in std::mem::take(&mut self.adj[v]) {
            if let Ok(pos) = self.adj[u].binary_search(&v) {
                self.adj[u].remove(pos);
            }
        }
        self.alive[v] = false;
        self.n_alive -= 1;
    }

    fn add_vertex(&mut self, neighbors: Vec<usize>) -> usize {
        let z = self.adj.len();
        for &u in &neighbors {
            // z is larger than every existing id
            self.adj[u].push(z);
        }
        self.adj.push(neighbors);
        self.alive.push(true);
        self.n_alive += 1;
        z
    }

    /// `remaining - |greedy maximal matching|`: each matched pair holds at
    /// most one vertex of an independent set.
    fn upper_bound(&self) -> usize {
        let mut matched = vec![false; self.adj.len()];
        let mut pairs = 0;
        let mut order: Vec<usize> = self.alive_vertices().collect();
        order.sort_by_key(|&v| (self.degree(v), v));
        for u in order {
            if matched[u] {
                continue;
            }
            if let Some(&w) = self.adj[u].iter().find(|&&w| !matched[w]) {
                matched[u] = true;
                matched[w] = true;
                pairs += 1;
            }
        }
        self.n_alive - pairs
    }

    fn components(&self) -> Vec<Vec<usize>> {
        let mut seen = vec![false; self.adj.len()];
        let mut comps = Vec::new();
        for s in self.alive_vertices() {
            if seen[s] {
                continue;
            }
            seen[s] = true;
            let mut comp = vec![s];
            let mut i = 0;
            while i < comp.len() {
                let u = comp[i];
                for &w in &self.adj[u] {
                    if !seen[w] {
                        seen[w] = true;
                        comp.push(w);
                    }
                }
                i += 1;
            }
            comp.sort_unstable();
            comps.push(comp);
        }
        comps
    }

    fn restricted_to(&self, comp: &[usize]) -> Kernel {
        let mut alive = vec![false; self.adj.len()];
        let mut adj = vec![Vec::new(); self.adj.len()];
        for &v in comp {
            alive[v] = true;
            adj[v] = self.adj[v].clone();
        }
        Kernel { adj, alive, n_alive: comp.len() }
    }

    fn greedy(&self) -> Vec<usize> {
        let mut k = self.clone();
        let mut out = Vec::new();
        while k.n_alive > 0 {
            let v = k
                .alive_vertices()
                .min_by_key(|&v| (k.degree(v), v))
                .expect("non-empty");
            for u in k.adj[v].clone() {
                k.remove(u);
            }
            k.remove(v);
            out.push(v);
        }
        out
    }
}

/// A degree-2 vertex `center` whose non-adjacent neighbors `left`, `right`
/// were merged into `merged`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub struct Fold {
    pub merged: usize,
    pub center: usize,
    pub left: usize,
    pub right: usize,
}

#[derive(Debug, Clone, Default)]
struct Trail {
    taken: Vec<usize>,
    folds: Vec<Fold>,
}

impl Trail {
    fn gain(&self) -> usize {
        self.taken.len() + self.folds.len()
    }

    /// Maps a solution of the reduced kernel back through the recorded rules.
    fn unfold(&self, sub: Vec<usize>) -> Vec<usize> {
        let mut set: BTreeSet<usize> = sub.into_iter().chain(self.taken.iter().copied()).collect();
        for f in self.folds.iter().rev() {
            if set.remove(&f.merged) {
                set.insert(f.left);
                set.insert(f.right);
            } else {
                set.insert(f.center);
            }
        }
        set.into_iter().collect()
    }
}

/// Applies the reduction rules to a fixpoint, starting from `dirty`.
/// Degree-0/1 rules are exhausted before each degree-2 step.
fn reduce_kernel(k: &mut Kernel, mut dirty: BTreeSet<usize>, trail: &mut Trail) {
    let mut deg2 = BTreeSet::new();
    loop {
        while let Some(v) = dirty.pop_first() {
            if !k.alive[v] {
                continue;
            }
            match k.degree(v) {
                0 => {
                    trail.taken.push(v);
                    k.remove(v);
                }
                1 => {
                    let u = k.adj[v][0];
                    trail.taken.push(v);
                    dirty.extend(k.adj[u].iter().copied().filter(|&w| w != v));
                    k.remove(v);
                    k.remove(u);
                }
                2 => {
                    deg2.insert(v);
                }
                _ => {}
            }
        }
        let Some(v) = std::iter::from_fn(|| deg2.pop_first())
            .find(|&v| k.alive[v] && k.degree(v) == 2)
        else {
            return;
        };
        let (u, w) = (k.adj[v][0], k.adj[v][1]);
        if k.adjacent(u, w) {
            trail.taken.push(v);
            dirty.extend(k.adj[u].iter().chain(&k.adj[w]).copied());
            k.remove(v);
            k.remove(u);
            k.remove(w);
        } else {
            let mut merged: Vec<usize> = k.adj[u]
                .iter()
                .chain(&k.adj[w])
                .copied()
                .filter(|&x| x != v)
                .collect();
            merged.sort_unstable();
            merged.dedup();
            k.remove(v);
            k.remove(u);
            k.remove(w);
            let z = k.add_vertex(merged.clone());
            trail.folds.push(Fold { merged: z, center: v, left: u, right: w });
            dirty.extend(merged);
            dirty.insert(z);
        }
        dirty.extend(std::mem::take(&mut deg2));
    }
}

/// Result of running the reduction rules on a whole graph.
#[derive(Debug, Clone)]
pub struct Reduction {
    /// The kernel, renumbered `0..n'`.
    pub graph: Graph,
    /// Vertices of `graph` as ids of the working graph (ids `>= n` come from folds).
    pub labels: Vec<usize>,
    /// Independent-set size gained by the rules.
    pub gain: usize,
    /// Vertices fixed into the solution by the rules (working-graph ids).
    pub taken: Vec<usize>,
    pub folds: Vec<Fold>,
}

impl Reduction {
    /// Turns an independent set of the kernel into one of the original
    /// graph of size `witness.len() + gain`.
    pub fn lift(&self, witness: &[usize]) -> Vec<usize> {
        let trail = Trail { taken: self.taken.clone(), folds: self.folds.clone() };
        trail.unfold(witness.iter().map(|&v| self.labels[v]).collect())
    }
}

/// Isolated-vertex, leaf and degree-2 fold rules to a fixpoint. Under
/// [`LoopPolicy::ExcludeLoopVertex`] looped vertices are deleted first
/// (they add nothing to the gain).
pub fn reduce(g: &Graph, policy: LoopPolicy) -> Reduction {
    let mut k = Kernel::from_graph(g, policy);
    let mut trail = Trail::default();
    let dirty = k.alive_vertices().collect();
    reduce_kernel(&mut k, dirty, &mut trail);
    let labels: Vec<usize> = k.alive_vertices().collect();
    let index = |v: usize| labels.binary_search(&v).expect("alive");
    let edges = labels
        .iter()
        .flat_map(|&u| k.adj[u].iter().filter(move |&&w| w > u).map(move |&w| (u, w)))
        .map(|(u, w)| (index(u), index(w)));
    let graph = Graph::from_edges(labels.len(), edges).expect("in range");
    Reduction { graph, gain: trail.gain(), taken: trail.taken, folds: trail.folds, labels }
}

struct Search {
    nodes: u64,
    deadline: Option<Instant>,
    aborted: bool,
}

impl Search {
    /// Best independent set of `k` strictly larger than `floor`, if any.
    fn run(&mut self, mut k: Kernel, dirty: BTreeSet<usize>, floor: i64) -> Option<Vec<usize>> {
        self.nodes += 1;
        if self.aborted || self.deadline.is_some_and(|d| self.nodes.is_multiple_of(64) && Instant::now() > d)
        {
            self.aborted = true;
            return None;
        }
        let mut trail = Trail::default();
        reduce_kernel(&mut k, dirty, &mut trail);
        let need = floor - trail.gain() as i64;
        if k.n_alive == 0 {
            return (need < 0).then(|| trail.unfold(Vec::new()));
        }
        if (k.upper_bound() as i64) <= need {
            return None;
        }
        let comps = k.components();
        let sub = if comps.len() > 1 {
            self.split(&k, comps, need)?
        } else {
            self.branch(k, need)?
        };
        Some(trail.unfold(sub))
    }

    fn split(&mut self, k: &Kernel, mut comps: Vec<Vec<usize>>, need: i64) -> Option<Vec<usize>> {
        comps.sort_by_key(|c| (c.len(), c[0]));
        let parts: Vec<Kernel> = comps.iter().map(|c| k.restricted_to(c)).collect();
        let mut rest_ub: i64 = parts.iter().map(|p| p.upper_bound() as i64).sum();
        let mut total = Vec::new();
        for (part, comp) in parts.into_iter().zip(&comps) {
            rest_ub -= part.upper_bound() as i64;
            // this component must reach need - found - (best case for the rest)
            let floor = (need - total.len() as i64 - rest_ub).max(-1);
            let sol = self.run(part, comp.iter().copied().collect(), floor)?;
            total.extend(sol);
        }
        (total.len() as i64 > need).then_some(total)
    }

    fn branch(&mut self, k: Kernel, need: i64) -> Option<Vec<usize>> {
        let v = k
            .alive_vertices()
            .max_by_key(|&v| (k.degree(v), std::cmp::Reverse(v)))
            .expect("non-empty");
        let mut best = None;
        let mut floor = need;

        let mut with_v = k.clone();
        let closed: Vec<usize> = with_v.adj[v].clone();
        let mut dirty = BTreeSet::new();
        for &u in &closed {
            dirty.extend(with_v.adj[u].iter().copied());
        }
        for &u in &closed {
            with_v.remove(u);
        }
        with_v.remove(v);
        if let Some(mut s) = self.run(with_v, dirty, floor - 1) {
            s.push(v);
            floor = s.len() as i64;
            best = Some(s);
        }

        let mut without_v = k;
        let dirty: BTreeSet<usize> = without_v.adj[v].iter().copied().collect();
        without_v.remove(v);
        if let Some(s) = self.run(without_v, dirty, floor) {
            best = Some(s);
        }
        best
    }
}

/// Exact independence number with a witness. With a `budget`, the search
/// may stop early and report the best set found with `proven == false`.
pub fn solve_exact(g: &Graph, policy: LoopPolicy, budget: Option<Duration>) -> SolveResult {
    let start = Instant::now();
    let kernel = Kernel::from_graph(g, policy);
    let incumbent = kernel.greedy();
    let mut search = Search { nodes: 0, deadline: budget.map(|b| start + b), aborted: false };
    let dirty = kernel.alive_vertices().collect();
    let found = search.run(kernel, dirty, incumbent.len() as i64);
    let mut witness = match found {
        Some(s) if s.len() > incumbent.len() => s,
        _ => incumbent,
    };
    witness.sort_unstable();
    assert!(verify_independent(g, &witness, policy), "solver produced a dependent set");
    SolveResult {
        n_star: witness.len(),
        witness,
        nodes_explored: search.nodes,
        wall_time: start.elapsed(),
        proven: !search.aborted,
        policy,
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::graph::build_inverse_graph;
    use crate::numtheory::Prime;
    use proptest::prelude::*;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    fn path(n: usize) -> Graph {
        Graph::from_edges(n, (1..n).map(|i| (i - 1, i))).unwrap()
    }

    /// Tree MIS by the two-state dynamic program.
    fn tree_mis(g: &Graph) -> usize {
        fn dp(g: &Graph, v: usize, parent: usize) -> (usize, usize) {
            let (mut with, mut without) = (1, 0);
            for &c in g.neighbors(v) {
                if c != parent {
                    let (cw, co) = dp(g, c, v);
                    with += co;
                    without += cw.max(co);
                }
            }
            (with, without)
        }
        let (a, b) = dp(g, 0, usize::MAX);
        a.max(b)
    }

    fn random_tree(n: usize, rng: &mut ChaCha8Rng) -> Graph {
        Graph::from_edges(n, (1..n).map(|v| (rng.gen_range(0..v), v))).unwrap()
    }

    pub(crate) fn random_graph(n: usize, density: f64, rng: &mut ChaCha8Rng) -> Graph {
        let mut edges = Vec::new();
        for u in 0..n {
            for v in u + 1..n {
                if rng.gen_bool(density) {
                    edges.push((u, v));
                }
            }
        }
        Graph::from_edges(n, edges).unwrap()
    }

    #[test]
    fn naive_examples() {
        assert_eq!(solve_naive(&Graph::complete(3), LoopPolicy::default()).unwrap().n_star, 1);
        let two_edges = Graph::from_edges(4, [(0, 1), (2, 3)]).unwrap();
        assert_eq!(solve_naive(&two_edges, LoopPolicy::default()).unwrap().n_star, 2);
        assert_eq!(solve_naive(&Graph::empty(0), LoopPolicy::default()).unwrap().n_star, 0);
        assert_eq!(
            solve_naive(&Graph::empty(33), LoopPolicy::default()),
            Err(SolveError::TooLarge { n: 33, max: 32 })
        );
    }

    #[test]
    fn exact_examples() {
        let c6 = Graph::cycle(6);
        assert_eq!(solve_exact(&c6, LoopPolicy::default(), None).n_star, 3);
        assert_eq!(solve_exact(&Graph::complete(4), LoopPolicy::default(), None).n_star, 1);
        assert_eq!(solve_exact(&Graph::empty(5), LoopPolicy::default(), None).n_star, 5);
        assert_eq!(solve_exact(&Graph::empty(0), LoopPolicy::default(), None).n_star, 0);
    }

    #[test]
    fn p11_regression_pin() {
        let g = build_inverse_graph(Prime::new(11).unwrap());
        let naive = solve_naive(&g, LoopPolicy::ExcludeLoopVertex).unwrap();
        let exact = solve_exact(&g, LoopPolicy::ExcludeLoopVertex, None);
        assert_eq!(naive.n_star, exact.n_star);
        // pinned from the naive oracle
        assert_eq!(naive.n_star, 4);
        assert!(verify_independent(&g, &exact.witness, LoopPolicy::ExcludeLoopVertex));
        assert!(!exact.witness.contains(&0));
        let ignore = solve_naive(&g, LoopPolicy::IgnoreLoops).unwrap();
        assert!(ignore.n_star == naive.n_star || ignore.n_star == naive.n_star + 1);
    }

    #[test]
    fn verify_examples() {
        let g = build_inverse_graph(Prime::new(11).unwrap());
        assert!(verify_independent(&g, &[], LoopPolicy::default()));
        assert!(!verify_independent(&g, &[2, 3], LoopPolicy::default()));
        assert!(!verify_independent(&g, &[0], LoopPolicy::ExcludeLoopVertex));
        assert!(verify_independent(&g, &[0], LoopPolicy::IgnoreLoops));
        assert!(!verify_independent(&g, &[11], LoopPolicy::IgnoreLoops));
        let w = solve_exact(&g, LoopPolicy::default(), None).witness;
        assert!(verify_independent(&g, &w, LoopPolicy::default()));
    }

    #[test]
    fn reduce_examples() {
        let r = reduce(&path(3), LoopPolicy::default());
        assert_eq!((r.graph.n(), r.gain), (0, 2));
        assert_eq!(r.lift(&[]), vec![0, 2]);

        let r = reduce(&Graph::complete(3), LoopPolicy::default());
        assert_eq!((r.graph.n(), r.gain), (0, 1));

        // cubic graphs have nothing to reduce
        let r = reduce(&Graph::complete(4), LoopPolicy::default());
        assert_eq!((r.graph.n(), r.gain), (4, 0));

        let mut rng = ChaCha8Rng::seed_from_u64(7);
        for n in 1..40 {
            let t = random_tree(n, &mut rng);
            let r = reduce(&t, LoopPolicy::default());
            assert_eq!(r.graph.n(), 0);
            assert!(r.folds.is_empty(), "leaf removal alone suffices on trees");
            assert_eq!(r.gain, tree_mis(&t));
            let lifted = r.lift(&[]);
            assert_eq!(lifted.len(), r.gain);
            assert!(verify_independent(&t, &lifted, LoopPolicy::default()));
        }
    }

    #[test]
    fn reductions_are_gain_exact() {
        let mut rng = ChaCha8Rng::seed_from_u64(11);
        for i in 0..300 {
            let n = 4 + i % 18;
            let g = random_graph(n, [0.1, 0.2, 0.3][i % 3], &mut rng);
            let truth = solve_naive(&g, LoopPolicy::default()).unwrap().n_star;
            let r = reduce(&g, LoopPolicy::default());
            let kernel = solve_naive(&r.graph, LoopPolicy::default()).unwrap();
            assert_eq!(r.gain + kernel.n_star, truth);
            let lifted = r.lift(&kernel.witness);
            assert_eq!(lifted.len(), truth);
            assert!(verify_independent(&g, &lifted, LoopPolicy::default()));
        }
    }

    #[test]
    fn budget_reports_not_proven() {
        let g = build_inverse_graph(Prime::new(127).unwrap());
        let r = solve_exact(&g, LoopPolicy::default(), Some(Duration::ZERO));
        assert!(!r.proven);
        assert!(verify_independent(&g, &r.witness, LoopPolicy::default()));
    }

    #[test]
    fn exact_matches_naive_on_inverse_graphs() {
        for pr in Prime::range(3, 31) {
            let g = build_inverse_graph(pr);
            for policy in [LoopPolicy::ExcludeLoopVertex, LoopPolicy::IgnoreLoops] {
                let a = solve_naive(&g, policy).unwrap();
                let b = solve_exact(&g, policy, None);
                assert_eq!(a.n_star, b.n_star, "p={pr} {policy}");
                assert!(b.proven);
            }
        }
    }

    proptest! {
        #![proptest_config(ProptestConfig::with_cases(64))]

        #[test]
        fn deleting_a_vertex_drops_at_most_one(seed in any::<u64>(), n in 2usize..20, v in 0usize..20) {
            let mut rng = ChaCha8Rng::seed_from_u64(seed);
            let g = random_graph(n, 0.25, &mut rng);
            let v = v % n;
            let full = solve_exact(&g, LoopPolicy::default(), None).n_star;
            let less = solve_exact(&g.without_vertex(v), LoopPolicy::default(), None).n_star;
            prop_assert!(less == full || less + 1 == full);
        }

        #[test]
        fn exact_agrees_with_naive(seed in any::<u64>(), n in 1usize..24) {
            let mut rng = ChaCha8Rng::seed_from_u64(seed);
            let g = random_graph(n, 0.2, &mut rng);
            let a = solve_naive(&g, LoopPolicy::default()).unwrap();
            let b = solve_exact(&g, LoopPolicy::default(), None);
            prop_assert_eq!(a.n_star, b.n_star);
            prop_assert!(verify_independent(&g, &a.witness, LoopPolicy::default()));
        }
    }
}
