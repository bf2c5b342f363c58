//! Census of short odd cycles in the inverse graph.
//!
//! A directed path is a word over `{+, -, R}` (`x+1`, `x-1`, `-x^{-1}`).
//! Every cycle can be written starting with `+` and ending with `R`; among
//! all such spellings (every rotation, both directions) the lexicographically
//! least one under `+ < - < R` is the canonical [`CycleSequence`]. Reading a
//! cycle backwards reverses the word and swaps `+` with `-`.
//!
//! Each step acts on `x` as a fractional-linear map, so a word composes into
//! a 2x2 [`MobiusMap`] and its start vertices solve the fixed-point
//! congruence `c x^2 + (d - a) x - b = 0`. The algebra treats `1/0` as the
//! point at infinity while the graph uses `0^{-1} = 0`, so every algebraic
//! root is re-checked by [`walk`].

use std::collections::{BTreeMap, BTreeSet};
use std::fmt;
use std::str::FromStr;

use rayon::prelude::*;
use serde::Serialize;
use thiserror::Error;

use crate::graph::{inverse_step, InverseGraph};
use crate::numtheory::{
    mul_mod, solve_quadratic, NumTheoryError, Prime, ResidueClassification, RootKind,
};

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum Step {
    Plus,
    Minus,
    Inv,
}

impl Step {
    pub fn symbol(self) -> char {
        match self {
            Step::Plus => '+',
            Step::Minus => '-',
            Step::Inv => 'R',
        }
    }

    /// The same edge traversed in the opposite direction.
    pub fn reversed(self) -> Step {
        match self {
            Step::Plus => Step::Minus,
            Step::Minus => Step::Plus,
            Step::Inv => Step::Inv,
        }
    }

    /// Integer matrix of the step's fractional-linear action.
    fn matrix(self) -> [[i64; 2]; 2] {
        match self {
            Step::Plus => [[1, 1], [0, 1]],
            Step::Minus => [[1, -1], [0, 1]],
            Step::Inv => [[0, -1], [1, 0]],
        }
    }

    /// The step's action on a vertex of the inverse graph.
    #[inline]
    pub fn apply(self, x: u64, p: Prime) -> u64 {
        let n = p.get();
        match self {
            Step::Plus => (x + 1) % n,
            Step::Minus => (x + n - 1) % n,
            Step::Inv => inverse_step(x, p),
        }
    }

    fn forbidden_pair(self, next: Step) -> bool {
        matches!(
            (self, next),
            (Step::Plus, Step::Minus) | (Step::Minus, Step::Plus) | (Step::Inv, Step::Inv)
        )
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum SequenceError {
    #[error("unknown symbol {0:?}")]
    BadSymbol(char),
    #[error("cycle sequences have odd length >= 3, got {0}")]
    BadLength(usize),
    #[error("cycle sequences start with '+' and end with 'R'")]
    BadEnds,
    #[error("forbidden adjacent pair at position {0}")]
    ForbiddenPair(usize),
}

/// A cycle written as `[+ ... R]`, odd length, with no `+-`, `-+` or `RR`
/// (cyclically).
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct CycleSequence(Vec<Step>);

impl CycleSequence {
    pub fn new(steps: Vec<Step>) -> Result<Self, SequenceError> {
        let len = steps.len();
        if len < 3 || len.is_multiple_of(2) {
            return Err(SequenceError::BadLength(len));
        }
        if steps[0] != Step::Plus || steps[len - 1] != Step::Inv {
            return Err(SequenceError::BadEnds);
        }
        if let Some(i) = (0..len).find(|&i| steps[i].forbidden_pair(steps[(i + 1) % len])) {
            return Err(SequenceError::ForbiddenPair(i));
        }
        Ok(CycleSequence(steps))
    }

    pub fn steps(&self) -> &[Step] {
        &self.0
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    /// Canonical spelling of the cycle this word describes.
    pub fn canonical(&self) -> CycleSequence {
        canonical_form(&self.0).expect("a valid sequence has a canonical spelling")
    }

    pub fn is_canonical(&self) -> bool {
        self.canonical() == *self
    }

    /// Composition over the integers (entries stay small for the lengths
    /// the census handles; panics on overflow in debug builds).
    pub fn integer_matrix(&self) -> [[i64; 2]; 2] {
        self.0.iter().fold([[1, 0], [0, 1]], |acc, s| mat_mul(s.matrix(), acc))
    }

    /// Square-free `s` such that the fixed-point congruence is equivalent to
    /// `y^2 = s (mod p)` for all `p` not dividing the leading coefficient.
    /// `None` when the congruence is not a genuine quadratic over Z.
    pub fn normal_form(&self) -> Option<i64> {
        let [[a, b], [c, d]] = self.integer_matrix();
        if c == 0 {
            return None;
        }
        let disc = (d - a) * (d - a) + 4 * b * c;
        (disc != 0).then(|| squarefree_part(disc))
    }
}

impl Ord for CycleSequence {
    fn cmp(&self, other: &Self) -> std::cmp::Ordering {
        self.len().cmp(&other.len()).then_with(|| self.0.cmp(&other.0))
    }
}

impl PartialOrd for CycleSequence {
    fn partial_cmp(&self, other: &Self) -> Option<std::cmp::Ordering> {
        Some(self.cmp(other))
    }
}

impl fmt::Display for CycleSequence {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str("[")?;
        for s in &self.0 {
            write!(f, "{}", s.symbol())?;
        }
        f.write_str("]")
    }
}

impl FromStr for CycleSequence {
    type Err = SequenceError;

    fn from_str(s: &str) -> Result<Self, SequenceError> {
        CycleSequence::new(parse_steps(s)?)
    }
}

/// Parses a raw word such as `"[+-R]"`; no cycle-sequence rules applied.
pub fn parse_steps(s: &str) -> Result<Vec<Step>, SequenceError> {
    s.trim()
        .trim_start_matches('[')
        .trim_end_matches(']')
        .chars()
        .map(|c| match c {
            '+' => Ok(Step::Plus),
            '-' | '\u{2212}' => Ok(Step::Minus),
            'R' => Ok(Step::Inv),
            other => Err(SequenceError::BadSymbol(other)),
        })
        .collect()
}

fn canonical_form(word: &[Step]) -> Option<CycleSequence> {
    let reversed: Vec<Step> = word.iter().rev().map(|s| s.reversed()).collect();
    let n = word.len();
    let mut best: Option<Vec<Step>> = None;
    for w in [word, reversed.as_slice()] {
        for shift in 0..n {
            if w[shift] != Step::Plus || w[(shift + n - 1) % n] != Step::Inv {
                continue;
            }
            let rot: Vec<Step> = w[shift..].iter().chain(&w[..shift]).copied().collect();
            if best.as_ref().is_none_or(|b| rot < *b) {
                best = Some(rot);
            }
        }
    }
    best.map(CycleSequence)
}

/// Every canonical cycle sequence of odd length `3..=max_len`, ordered by
/// length and then lexicographically.
pub fn enumerate_sequences(max_len: usize) -> Vec<CycleSequence> {
    let mut out = Vec::new();
    let mut len = 3;
    while len <= max_len {
        let mut word = vec![Step::Plus];
        extend_words(&mut word, len, &mut out);
        len += 2;
    }
    out
}

fn extend_words(word: &mut Vec<Step>, len: usize, out: &mut Vec<CycleSequence>) {
    if word.len() == len {
        if let Ok(seq) = CycleSequence::new(word.clone()) {
            if seq.is_canonical() {
                out.push(seq);
            }
        }
        return;
    }
    let last = *word.last().expect("non-empty");
    for s in [Step::Plus, Step::Minus, Step::Inv] {
        if last.forbidden_pair(s) {
            continue;
        }
        // the final symbol must be R
        if word.len() + 1 == len && s != Step::Inv {
            continue;
        }
        word.push(s);
        extend_words(word, len, out);
        word.pop();
    }
}

fn mat_mul(x: [[i64; 2]; 2], y: [[i64; 2]; 2]) -> [[i64; 2]; 2] {
    [
        [x[0][0] * y[0][0] + x[0][1] * y[1][0], x[0][0] * y[0][1] + x[0][1] * y[1][1]],
        [x[1][0] * y[0][0] + x[1][1] * y[1][0], x[1][0] * y[0][1] + x[1][1] * y[1][1]],
    ]
}

fn squarefree_part(v: i64) -> i64 {
    let sign = v.signum();
    let mut m = v.unsigned_abs();
    let mut f = 2u64;
    while f * f <= m {
        while m.is_multiple_of(f * f) {
            m /= f * f;
        }
        f += 1;
    }
    sign * m as i64
}

/// `x -> (a x + b) / (c x + d)` over F_p.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub struct MobiusMap {
    pub a: u64,
    pub b: u64,
    pub c: u64,
    pub d: u64,
    pub p: u64,
}

impl MobiusMap {
    pub fn identity(p: Prime) -> Self {
        MobiusMap { a: 1, b: 0, c: 0, d: 1, p: p.get() }
    }

    fn generator(step: Step, p: Prime) -> Self {
        let m = step.matrix();
        let r = |v: i64| p.reduce(v);
        MobiusMap { a: r(m[0][0]), b: r(m[0][1]), c: r(m[1][0]), d: r(m[1][1]), p: p.get() }
    }

    /// `self` followed by `next`.
    pub fn then(self, next: MobiusMap) -> MobiusMap {
        let n = self.p;
        let dot = |x: u64, y: u64, z: u64, w: u64| (mul_mod(x, y, n) + mul_mod(z, w, n)) % n;
        MobiusMap {
            a: dot(next.a, self.a, next.b, self.c),
            b: dot(next.a, self.b, next.b, self.d),
            c: dot(next.c, self.a, next.d, self.c),
            d: dot(next.c, self.b, next.d, self.d),
            p: n,
        }
    }

    /// Composes steps in path order (the first step acts first).
    pub fn of_steps(steps: &[Step], p: Prime) -> Self {
        steps
            .iter()
            .fold(MobiusMap::identity(p), |acc, &s| acc.then(MobiusMap::generator(s, p)))
    }

    pub fn determinant(&self) -> u64 {
        let n = self.p;
        (mul_mod(self.a, self.d, n) + n - mul_mod(self.b, self.c, n)) % n
    }

    /// Image of `x` on the projective line; `None` is the point at infinity.
    pub fn apply(&self, x: u64) -> Option<u64> {
        let n = self.p;
        let num = (mul_mod(self.a, x, n) + self.b) % n;
        let den = (mul_mod(self.c, x, n) + self.d) % n;
        let p = Prime::new(n).expect("constructed from a prime");
        crate::numtheory::mod_inverse(den, p).ok().map(|inv| mul_mod(num, inv, n))
    }

    /// Same fractional-linear map (matrices agree up to a nonzero scalar).
    pub fn same_map(&self, other: &MobiusMap) -> bool {
        let n = self.p;
        let lhs = [self.a, self.b, self.c, self.d];
        let rhs = [other.a, other.b, other.c, other.d];
        (0..4).all(|i| (0..4).all(|j| mul_mod(lhs[i], rhs[j], n) == mul_mod(lhs[j], rhs[i], n)))
    }

    pub fn is_identity(&self) -> bool {
        self.same_map(&MobiusMap::identity(Prime::new(self.p).expect("prime")))
    }
}

/// `mobius_of`.
pub fn mobius_of(seq: &CycleSequence, p: Prime) -> MobiusMap {
    MobiusMap::of_steps(seq.steps(), p)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Error)]
pub enum WalkFailure {
    #[error("path ends at {end}, not at its start")]
    DoesNotClose { end: u64 },
    #[error("path revisits vertex {vertex} at step {step}")]
    RevisitsVertex { vertex: u64, step: usize },
    #[error("step {step} from {from} does not follow an edge")]
    MissingEdge { from: u64, step: usize },
}

/// Follows `steps` from `x0` on the graph and returns the visited vertices
/// (start included, closing vertex not repeated) when they form a simple
/// cycle through existing edges.
pub fn walk_steps(steps: &[Step], x0: u64, g: &InverseGraph) -> Result<Vec<u64>, WalkFailure> {
    let p = g.p();
    let mut path = Vec::with_capacity(steps.len());
    path.push(x0);
    let mut x = x0;
    for (i, &s) in steps.iter().enumerate() {
        let y = s.apply(x, p);
        if y == x {
            // the loop at 0 is an edge but cannot be part of a simple cycle
            return Err(if g.has_self_loop(x as usize) {
                WalkFailure::RevisitsVertex { vertex: y, step: i }
            } else {
                WalkFailure::MissingEdge { from: x, step: i }
            });
        }
        if !g.has_edge(x as usize, y as usize) {
            return Err(WalkFailure::MissingEdge { from: x, step: i });
        }
        if i + 1 == steps.len() {
            if y != x0 {
                return Err(WalkFailure::DoesNotClose { end: y });
            }
        } else if path.contains(&y) {
            return Err(WalkFailure::RevisitsVertex { vertex: y, step: i });
        } else {
            path.push(y);
        }
        x = y;
    }
    Ok(path)
}

pub fn walk(seq: &CycleSequence, x0: u64, g: &InverseGraph) -> Result<Vec<u64>, WalkFailure> {
    walk_steps(seq.steps(), x0, g)
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct CensusRow {
    #[serde(serialize_with = "ser_display")]
    pub sequence: CycleSequence,
    /// Roots of the fixed-point congruence over F_p.
    pub classification: ResidueClassification,
    /// Roots confirmed as simple cycles by walking the graph.
    pub starts: Vec<u64>,
    pub count: usize,
    /// Square-free `s` of the normal form `y^2 = s`, when there is one.
    pub normal_form: Option<i64>,
}

fn ser_display<S: serde::Serializer>(v: &CycleSequence, s: S) -> Result<S::Ok, S::Error> {
    s.collect_str(v)
}

impl CensusRow {
    /// Number of roots of the congruence, before walk validation.
    pub fn algebraic_count(&self) -> usize {
        self.classification.solutions.len()
    }

    /// `y²≡s mod p` when the congruence reduces to that form.
    pub fn congruence(&self) -> String {
        self.normal_form.map(|s| format!("y²≡{s} mod p")).unwrap_or_default()
    }
}

/// `fixed_points`: solves the fixed-point congruence and walks every root.
pub fn fixed_points(seq: &CycleSequence, g: &InverseGraph) -> CensusRow {
    let p = g.p();
    let m = mobius_of(seq, p);
    let n = p.get() as i64;
    let (a, b, c, d) = (m.a as i64, m.b as i64, m.c as i64, m.d as i64);
    let classification = match solve_quadratic(c, d - a, (n - b) % n, p) {
        Ok(cls) => cls,
        Err(NumTheoryError::AllZero(_)) => ResidueClassification::degenerate(),
        Err(e) => unreachable!("p is prime: {e}"),
    };
    let starts: Vec<u64> = if classification.kind == RootKind::Degenerate {
        // identity map: no algebraic information, fall back to walking every vertex
        (0..p.get()).filter(|&x| walk(seq, x, g).is_ok()).collect()
    } else {
        classification
            .solutions
            .iter()
            .copied()
            .filter(|&x| walk(seq, x, g).is_ok())
            .collect()
    };
    CensusRow {
        sequence: seq.clone(),
        count: starts.len(),
        starts,
        classification,
        normal_form: seq.normal_form(),
    }
}

/// One row per canonical sequence of odd length `3..=max_len`, in sequence order.
pub fn census(g: &InverseGraph, max_len: usize) -> Vec<CensusRow> {
    enumerate_sequences(max_len)
        .par_iter()
        .map(|seq| fixed_points(seq, g))
        .collect()
}

/// Independent route: depth-first enumeration of every labeled simple cycle
/// of odd length `3..=max_len`, keeping the spellings that are canonical.
/// Returns the start vertices per sequence.
pub fn walk_census(g: &InverseGraph, max_len: usize) -> BTreeMap<CycleSequence, Vec<u64>> {
    let p = g.p();
    let mut found: BTreeMap<CycleSequence, BTreeSet<u64>> = BTreeMap::new();
    let mut path = Vec::with_capacity(max_len);
    let mut word = Vec::with_capacity(max_len);
    for x0 in 0..p.get() {
        path.clear();
        path.push(x0);
        labeled_dfs(g, max_len, &mut path, &mut word, &mut found);
    }
    found
        .into_iter()
        .map(|(k, v)| (k, v.into_iter().collect()))
        .collect()
}

fn labeled_dfs(
    g: &InverseGraph,
    max_len: usize,
    path: &mut Vec<u64>,
    word: &mut Vec<Step>,
    found: &mut BTreeMap<CycleSequence, BTreeSet<u64>>,
) {
    let p = g.p();
    let x = *path.last().expect("non-empty");
    for s in [Step::Plus, Step::Minus, Step::Inv] {
        let y = s.apply(x, p);
        if y == x {
            continue;
        }
        word.push(s);
        if y == path[0] {
            let len = word.len();
            if len >= 3 && len % 2 == 1 {
                if let Ok(seq) = CycleSequence::new(word.clone()) {
                    if seq.is_canonical() {
                        found.entry(seq).or_default().insert(path[0]);
                    }
                }
            }
        } else if word.len() < max_len && !path.contains(&y) {
            path.push(y);
            labeled_dfs(g, max_len, path, word, found);
            path.pop();
        }
        word.pop();
    }
}

/// Census rows as CSV (`census/v1`).
pub const CENSUS_CSV_HEADER: &str =
    "# census/v1\np,sequence,length,congruence,classification,algebraic_roots,count,starts\n";

pub fn census_csv(p: Prime, rows: &[CensusRow]) -> String {
    let mut out = String::from(CENSUS_CSV_HEADER);
    out.push_str(&census_csv_rows(p, rows));
    out
}

/// Data lines only, for concatenating several primes under one header.
pub fn census_csv_rows(p: Prime, rows: &[CensusRow]) -> String {
    let mut out = String::new();
    for r in rows {
        let join = |v: &[u64]| v.iter().map(u64::to_string).collect::<Vec<_>>().join(" ");
        out.push_str(&format!(
            "{},{},{},{},{},{},{},{}\n",
            p,
            r.sequence,
            r.sequence.len(),
            r.congruence(),
            r.classification.kind,
            join(&r.classification.solutions),
            r.count,
            join(&r.starts),
        ));
    }
    out
}
