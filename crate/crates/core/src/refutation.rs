//! Cycle-chain refutation certificates and the closed-form bounds on the
//! best achievable certificate.
//!
//! A certificate covers every vertex exactly `m` times by odd cycles,
//! chains (single edges) and single vertices. An odd cycle of length
//! `2k+1` holds at most `k` independent vertices, a chain or single at most
//! one, which gives `N* <= floor(numerator / denominator * N)`.

use std::collections::BTreeSet;
use std::fmt;

use num_rational::Ratio;
use rand::seq::SliceRandom;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::graph::Graph;
use crate::numtheory::Prime;

#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Serialize, Deserialize)]
pub struct Certificate {
    /// Coverage multiplicity.
    pub m: usize,
    pub odd_cycles: Vec<Vec<usize>>,
    pub chains: Vec<[usize; 2]>,
    pub singles: Vec<usize>,
}

impl Certificate {
    /// Every vertex as a single, `m = 1`. Always valid, bound `N`.
    pub fn trivial(n: usize) -> Self {
        Certificate { m: 1, odd_cycles: Vec::new(), chains: Vec::new(), singles: (0..n).collect() }
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string(self).expect("certificate serializes")
    }

    pub fn from_json(text: &str) -> Result<Self, serde_json::Error> {
        serde_json::from_str(text)
    }

    fn counts(&self) -> PieceCounts {
        PieceCounts {
            cycle_lengths: self.odd_cycles.iter().map(Vec::len).collect(),
            chains: self.chains.len(),
            singles: self.singles.len(),
        }
    }

    /// Pieces sorted so equal covers serialize identically.
    fn normalized(mut self) -> Self {
        for c in &mut self.odd_cycles {
            let i = (0..c.len()).min_by_key(|&i| c[i]).unwrap_or(0);
            c.rotate_left(i);
            if c.len() > 2 && c[c.len() - 1] < c[1] {
                c[1..].reverse();
            }
        }
        for ch in &mut self.chains {
            ch.sort_unstable();
        }
        self.odd_cycles.sort();
        self.chains.sort();
        self.singles.sort();
        self
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct RefutationBound {
    /// `sum_k k n_k + n_chains + n_singles`
    pub numerator: u64,
    /// `sum_k (2k+1) n_k + 2 n_chains + n_singles`, which is `m N` for a valid cover.
    pub denominator: u64,
    pub n: usize,
    /// `numerator / denominator * N` before flooring.
    #[serde(serialize_with = "ser_ratio")]
    pub exact: Ratio<u64>,
    pub bound: usize,
}

fn ser_ratio<S: serde::Serializer>(r: &Ratio<u64>, s: S) -> Result<S::Ok, S::Error> {
    s.serialize_str(&r.to_string())
}

impl fmt::Display for RefutationBound {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(
            f,
            "N* <= floor({}/{} * {}) = floor({}) = {}",
            self.numerator, self.denominator, self.n, self.exact, self.bound
        )
    }
}

/// Piece counts only, for checking the bound arithmetic without a graph.
#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct PieceCounts {
    pub cycle_lengths: Vec<usize>,
    pub chains: usize,
    pub singles: usize,
}

impl PieceCounts {
    pub fn bound(&self, n: usize) -> RefutationBound {
        let numerator = self.cycle_lengths.iter().map(|&l| (l / 2) as u64).sum::<u64>()
            + (self.chains + self.singles) as u64;
        let denominator = self.cycle_lengths.iter().map(|&l| l as u64).sum::<u64>()
            + 2 * self.chains as u64
            + self.singles as u64;
        let exact = if denominator == 0 {
            Ratio::from_integer(0)
        } else {
            Ratio::new(numerator * n as u64, denominator)
        };
        RefutationBound { numerator, denominator, n, bound: exact.to_integer() as usize, exact }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum RefutationError {
    #[error("multiplicity must be positive")]
    ZeroMultiplicity,
    #[error("vertex {vertex} out of range for {n} vertices")]
    VertexOutOfRange { vertex: usize, n: usize },
    #[error("{u}-{v} is not an edge")]
    NonEdge { u: usize, v: usize },
    #[error("cycle {index} has even length {len}; split it into chains")]
    EvenCycle { index: usize, len: usize },
    #[error("cycle {index} has length {len}; cycles need at least 3 vertices")]
    CycleTooShort { index: usize, len: usize },
    #[error("cycle {index} visits vertex {vertex} twice")]
    RepeatedVertex { index: usize, vertex: usize },
    #[error("vertex {vertex} covered {count} times, expected {expected}")]
    NonUniformCoverage { vertex: usize, count: usize, expected: usize },
}

/// Checks the cover and returns the bound it implies.
pub fn verify_certificate(g: &Graph, cert: &Certificate) -> Result<RefutationBound, RefutationError> {
    let n = g.n();
    if cert.m == 0 {
        return Err(RefutationError::ZeroMultiplicity);
    }
    let in_range = |v: usize| {
        if v < n {
            Ok(())
        } else {
            Err(RefutationError::VertexOutOfRange { vertex: v, n })
        }
    };
    let edge = |u: usize, v: usize| {
        if u != v && g.has_edge(u, v) {
            Ok(())
        } else {
            Err(RefutationError::NonEdge { u, v })
        }
    };
    let mut coverage = vec![0usize; n];
    for (index, c) in cert.odd_cycles.iter().enumerate() {
        let len = c.len();
        if len % 2 == 0 {
            return Err(RefutationError::EvenCycle { index, len });
        }
        if len < 3 {
            return Err(RefutationError::CycleTooShort { index, len });
        }
        let mut seen = BTreeSet::new();
        for (i, &v) in c.iter().enumerate() {
            in_range(v)?;
            if !seen.insert(v) {
                return Err(RefutationError::RepeatedVertex { index, vertex: v });
            }
            edge(v, c[(i + 1) % len])?;
            coverage[v] += 1;
        }
    }
    for &[u, v] in &cert.chains {
        in_range(u)?;
        in_range(v)?;
        edge(u, v)?;
        coverage[u] += 1;
        coverage[v] += 1;
    }
    for &v in &cert.singles {
        in_range(v)?;
        coverage[v] += 1;
    }
    if let Some((vertex, &count)) = coverage.iter().enumerate().find(|(_, &c)| c != cert.m) {
        return Err(RefutationError::NonUniformCoverage { vertex, count, expected: cert.m });
    }
    Ok(cert.counts().bound(n))
}

/// All simple odd cycles of length `3..=len_max`, each once, starting at
/// its smallest vertex. Stops after `cap` cycles.
pub fn odd_cycles(g: &Graph, len_max: usize, cap: usize) -> Vec<Vec<usize>> {
    fn dfs(g: &Graph, path: &mut Vec<usize>, len_max: usize, cap: usize, out: &mut Vec<Vec<usize>>) {
        let s = path[0];
        let last = *path.last().expect("non-empty");
        for &w in g.neighbors(last) {
            if out.len() >= cap {
                return;
            }
            if w == s && path.len() >= 3 && path.len() % 2 == 1 && path[1] < last {
                out.push(path.clone());
            } else if w > s && path.len() < len_max && !path.contains(&w) {
                path.push(w);
                dfs(g, path, len_max, cap, out);
                path.pop();
            }
        }
    }
    let mut out = Vec::new();
    for s in 0..g.n() {
        dfs(g, &mut vec![s], len_max, cap, &mut out);
    }
    out.sort_by(|a, b| a.len().cmp(&b.len()).then_with(|| a.cmp(b)));
    out
}

#[derive(Debug, Clone)]
pub struct SearchConfig {
    pub m_max: usize,
    /// Longest odd cycle considered.
    pub len_max: usize,
    /// Search nodes for exhaustive mode, restarts for heuristic mode.
    pub budget: u64,
    pub seed: u64,
}

impl Default for SearchConfig {
    fn default() -> Self {
        SearchConfig { m_max: 2, len_max: 9, budget: 2_000_000, seed: 0 }
    }
}

pub const EXHAUSTIVE_MAX_VERTICES: usize = 20;
const CYCLE_CAP: usize = 200_000;

/// Best certificate found. Exhaustive over covers with `m <= m_max` when
/// `N <= 20`, otherwise greedy disjoint cycle packing with seeded restarts
/// and `m = 1`. Falls back to the trivial certificate.
pub fn search_certificate(g: &Graph, cfg: &SearchConfig) -> Certificate {
    let cycles = odd_cycles(g, cfg.len_max, CYCLE_CAP);
    let best = if g.n() <= EXHAUSTIVE_MAX_VERTICES {
        exhaustive(g, &cycles, cfg)
    } else {
        heuristic(g, &cycles, cfg)
    };
    best.unwrap_or_else(|| Certificate::trivial(g.n()))
}

fn better(a: &Certificate, b: &Certificate, g: &Graph) -> bool {
    let (ba, bb) = (a.counts().bound(g.n()), b.counts().bound(g.n()));
    (ba.bound, ba.exact, a) < (bb.bound, bb.exact, b)
}

#[derive(Clone)]
enum Piece {
    Cycle(usize),
    Chain(usize, usize),
    Single(usize),
}

struct Exhaustive<'a> {
    g: &'a Graph,
    cycles: &'a [Vec<usize>],
    through: Vec<Vec<usize>>,
    left: Vec<usize>,
    chosen: Vec<Piece>,
    /// Numerator of the current partial cover.
    cost: u64,
    best_cost: u64,
    best: Option<Vec<Piece>>,
    nodes: u64,
    budget: u64,
    /// Cheapest cost per unit of coverage among available pieces, `num/den`.
    rate: (u64, u64),
    /// Vertex and piece rank of the last choice; a vertex covered again
    /// takes pieces in non-decreasing rank so each multiset is tried once.
    last: Option<(usize, usize)>,
}

impl Exhaustive<'_> {
    fn rec(&mut self) {
        self.nodes += 1;
        if self.nodes > self.budget {
            return;
        }
        let Some(v) = self.left.iter().position(|&c| c > 0) else {
            if self.cost < self.best_cost {
                self.best_cost = self.cost;
                self.best = Some(self.chosen.clone());
            }
            return;
        };
        let deficit = self.left.iter().sum::<usize>() as u64;
        let (num, den) = self.rate;
        // cost + ceil(deficit * rate) >= best_cost cannot improve
        if self.cost + (deficit * num).div_ceil(den) >= self.best_cost {
            return;
        }
        let min_rank = match self.last {
            Some((u, r)) if u == v => r,
            _ => 0,
        };
        let n_cycles = self.through[v].len();
        for i in min_rank..n_cycles {
            let ci = self.through[v][i];
            if self.cycles[ci].iter().all(|&u| self.left[u] > 0) {
                self.take(v, i, Piece::Cycle(ci), (self.cycles[ci].len() / 2) as u64);
            }
        }
        let g = self.g;
        for (j, &u) in g.neighbors(v).iter().enumerate() {
            let rank = n_cycles + j;
            if rank >= min_rank && u != v && self.left[u] > 0 {
                self.take(v, rank, Piece::Chain(v, u), 1);
            }
        }
        self.take(v, usize::MAX, Piece::Single(v), 1);
    }

    fn vertices(&self, piece: &Piece) -> Vec<usize> {
        match *piece {
            Piece::Cycle(ci) => self.cycles[ci].clone(),
            Piece::Chain(u, v) => vec![u, v],
            Piece::Single(v) => vec![v],
        }
    }

    fn take(&mut self, v: usize, rank: usize, piece: Piece, cost: u64) {
        let vs = self.vertices(&piece);
        for &u in &vs {
            self.left[u] -= 1;
        }
        let saved = self.last.replace((v, rank));
        self.cost += cost;
        self.chosen.push(piece);
        self.rec();
        self.chosen.pop();
        self.cost -= cost;
        self.last = saved;
        for &u in &vs {
            self.left[u] += 1;
        }
    }
}

fn exhaustive(g: &Graph, cycles: &[Vec<usize>], cfg: &SearchConfig) -> Option<Certificate> {
    let n = g.n();
    let mut through = vec![Vec::new(); n];
    for (ci, c) in cycles.iter().enumerate() {
        for &v in c {
            through[v].push(ci);
        }
    }
    let rate = cycles
        .iter()
        .map(|c| Ratio::new((c.len() / 2) as u64, c.len() as u64))
        .chain(std::iter::once(Ratio::new(1, 2)))
        .min()
        .expect("non-empty");
    let mut best: Option<Certificate> = None;
    for m in 1..=cfg.m_max.max(1) {
        let mut search = Exhaustive {
            g,
            cycles,
            through: through.clone(),
            left: vec![m; n],
            chosen: Vec::new(),
            cost: 0,
            // the trivial cover costs m N
            best_cost: (m * n) as u64 + 1,
            best: None,
            nodes: 0,
            budget: cfg.budget,
            rate: (*rate.numer(), *rate.denom()),
            last: None,
        };
        search.rec();
        let Some(pieces) = search.best else { continue };
        let mut cert = Certificate { m, ..Certificate::trivial(0) };
        for p in pieces {
            match p {
                Piece::Cycle(ci) => cert.odd_cycles.push(cycles[ci].clone()),
                Piece::Chain(u, v) => cert.chains.push([u, v]),
                Piece::Single(v) => cert.singles.push(v),
            }
        }
        let cert = cert.normalized();
        if best.as_ref().is_none_or(|b| better(&cert, b, g)) {
            best = Some(cert);
        }
    }
    best
}

fn greedy_cover(g: &Graph, cycles: &[Vec<usize>], order: &[usize]) -> Certificate {
    let n = g.n();
    let mut used = vec![false; n];
    let mut cert = Certificate { m: 1, ..Certificate::trivial(0) };
    for &ci in order {
        let c = &cycles[ci];
        if c.iter().all(|&v| !used[v]) {
            for &v in c {
                used[v] = true;
            }
            cert.odd_cycles.push(c.clone());
        }
    }
    // match leftover vertices, fewest free neighbors first
    let free_deg = |v: usize, used: &[bool]| {
        g.neighbors(v).iter().filter(|&&u| u != v && !used[u]).count()
    };
    let mut rest: Vec<usize> = (0..n).filter(|&v| !used[v]).collect();
    rest.sort_by_key(|&v| (free_deg(v, &used), v));
    for v in rest {
        if used[v] {
            continue;
        }
        let partner = g
            .neighbors(v)
            .iter()
            .copied()
            .filter(|&u| u != v && !used[u])
            .min_by_key(|&u| (free_deg(u, &used), u));
        used[v] = true;
        match partner {
            Some(u) => {
                used[u] = true;
                cert.chains.push([v, u]);
            }
            None => cert.singles.push(v),
        }
    }
    cert.normalized()
}

fn heuristic(g: &Graph, cycles: &[Vec<usize>], cfg: &SearchConfig) -> Option<Certificate> {
    // shortest cycles first; restarts shuffle within each length
    let base: Vec<usize> = (0..cycles.len()).collect();
    let mut best = greedy_cover(g, cycles, &base);
    let mut rng = ChaCha8Rng::seed_from_u64(cfg.seed);
    for _ in 0..cfg.budget.min(64) {
        let mut order = base.clone();
        order.shuffle(&mut rng);
        order.sort_by_key(|&ci| cycles[ci].len());
        let cert = greedy_cover(g, cycles, &order);
        if better(&cert, &best, g) {
            best = cert;
        }
    }
    Some(best)
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum FormulaError {
    #[error("k' must be between 1 and {max}, got {kp}")]
    KPrimeOutOfRange { kp: u32, max: u32 },
    #[error("eps must lie strictly between 0 and 1/2, got {0}")]
    EpsOutOfRange(Ratio<i128>),
    #[error("p = {p} must exceed a(k') = {a}")]
    PrimeTooSmall { p: u64, a: i128 },
    #[error("cannot parse {0:?} as a rational")]
    Parse(String),
}

pub const KPRIME_MAX: u32 = 50;

fn check_kp(kp: u32) -> Result<(), FormulaError> {
    if (1..=KPRIME_MAX).contains(&kp) {
        Ok(())
    } else {
        Err(FormulaError::KPrimeOutOfRange { kp, max: KPRIME_MAX })
    }
}

/// `a(k') = sum_{k=1}^{k'-1} (2k+1) 4^k`
pub fn a_of(kp: u32) -> Result<i128, FormulaError> {
    check_kp(kp)?;
    Ok((1..kp).map(|k| (2 * k as i128 + 1) << (2 * k)).sum())
}

/// `b(k') = sum_{k=1}^{k'-1} k 4^k`
pub fn b_of(kp: u32) -> Result<i128, FormulaError> {
    check_kp(kp)?;
    Ok((1..kp).map(|k| (k as i128) << (2 * k)).sum())
}

/// Parses `"0.1"`, `"1/10"` or `"3"` exactly.
pub fn parse_ratio(s: &str) -> Result<Ratio<i128>, FormulaError> {
    let err = || FormulaError::Parse(s.to_string());
    let s = s.trim();
    if let Some((n, d)) = s.split_once('/') {
        let n: i128 = n.trim().parse().map_err(|_| err())?;
        let d: i128 = d.trim().parse().map_err(|_| err())?;
        if d == 0 {
            return Err(err());
        }
        return Ok(Ratio::new(n, d));
    }
    let (neg, body) = match s.strip_prefix('-') {
        Some(rest) => (true, rest),
        None => (false, s),
    };
    let (int, frac) = body.split_once('.').unwrap_or((body, ""));
    if int.is_empty() && frac.is_empty()
        || !int.chars().chain(frac.chars()).all(|c| c.is_ascii_digit())
        || frac.len() > 30
    {
        return Err(err());
    }
    let digits: i128 = format!("{int}{frac}").parse().map_err(|_| err())?;
    let r = Ratio::new(digits, 10i128.pow(frac.len() as u32));
    Ok(if neg { -r } else { r })
}

fn check_eps(eps: Ratio<i128>) -> Result<(), FormulaError> {
    if eps > Ratio::from_integer(0) && eps < Ratio::new(1, 2) {
        Ok(())
    } else {
        Err(FormulaError::EpsOutOfRange(eps))
    }
}

/// Smallest `k' >= 1` with `k' >= (1/eps - 1) / 2`.
pub fn choose_kprime(eps: Ratio<i128>) -> Result<u32, FormulaError> {
    check_eps(eps)?;
    let need = (eps.recip() - 1) / 2;
    let kp = need.ceil().to_integer().max(1);
    u32::try_from(kp)
        .ok()
        .filter(|&k| k <= KPRIME_MAX)
        .ok_or(FormulaError::KPrimeOutOfRange { kp: u32::MAX, max: KPRIME_MAX })
}

/// `ceil(a(k') + (a(k') - 2 b(k') + 2) / eps)` with `k' = choose_kprime(eps)`.
pub fn p_threshold(eps: Ratio<i128>) -> Result<(u32, i128), FormulaError> {
    let kp = choose_kprime(eps)?;
    let (a, b) = (a_of(kp)?, b_of(kp)?);
    let p = Ratio::from_integer(a) + Ratio::from_integer(a - 2 * b + 2) / eps;
    Ok((kp, p.ceil().to_integer()))
}

/// `b(k') + k'(p - a(k'))/(2k'+1) - 1`: the smallest numerator a
/// certificate can reach when `a(k')` vertices sit on short odd cycles and
/// the rest on `(2k'+1)`-cycles. Divided by `p` it tends to `k'/(2k'+1)`.
pub fn ncc_lower_bound(p: Prime, kp: u32) -> Result<Ratio<i128>, FormulaError> {
    let (a, b) = (a_of(kp)?, b_of(kp)?);
    let n = p.get() as i128;
    if n <= a {
        return Err(FormulaError::PrimeTooSmall { p: p.get(), a });
    }
    let k = kp as i128;
    Ok(Ratio::from_integer(b) + Ratio::new(k * (n - a), 2 * k + 1) - 1)
}
