#![allow(dead_code)]

use invgraph::census::CycleSequence;
use invgraph::numtheory::{legendre, Prime};
use invgraph::Graph;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

pub const TABLE: &str = include_str!("../fixtures/cycle_table.txt");

#[derive(Debug, Clone)]
pub enum Claim {
    /// Roots of `y^2 = a`, with the residue classes stated for two/no roots.
    Residue { a: i64, modulus: u64, two: Vec<u64>, none: Vec<u64> },
    Unique,
    NoSolution,
}

#[derive(Debug, Clone)]
pub struct TableRow {
    pub sequence: CycleSequence,
    pub claim: Claim,
}

impl TableRow {
    /// Number of solutions the table predicts at `p`.
    pub fn predicted(&self, p: Prime) -> usize {
        match &self.claim {
            Claim::Unique => 1,
            Claim::NoSolution => 0,
            Claim::Residue { a, .. } => match legendre(*a, p) {
                1 => 2,
                0 => 1,
                _ => 0,
            },
        }
    }
}

pub fn table() -> Vec<TableRow> {
    let classes = |s: &str| -> Vec<u64> {
        s.split(',').filter(|t| !t.is_empty()).map(|t| t.parse().unwrap()).collect()
    };
    TABLE
        .lines()
        .filter(|l| !l.starts_with('#') && !l.is_empty())
        .map(|l| {
            let f: Vec<&str> = l.split('|').collect();
            let claim = match f[1] {
                "unique" => Claim::Unique,
                "none" => Claim::NoSolution,
                "residue" => Claim::Residue {
                    a: f[2].parse().unwrap(),
                    modulus: f[3].parse().unwrap_or(0),
                    two: classes(f[4]),
                    none: classes(f[5]),
                },
                other => panic!("bad kind {other}"),
            };
            TableRow { sequence: f[0].parse().unwrap(), claim }
        })
        .collect()
}

pub fn p(v: u64) -> Prime {
    Prime::new(v).unwrap()
}

pub fn random_graph(n: usize, density: f64, rng: &mut ChaCha8Rng) -> Graph {
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

pub fn rng(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

/// Rows whose printed classification disagrees with the fixed-point
/// congruence of their own sequence under the x -> x+1, x -> -1/x
/// convention (checked by brute force over F_p).
pub const INCONSISTENT_ROWS: [&str; 13] = [
    "[++++R-R]",
    "[+++R++R]",
    "[+++R--R]",
    "[++R+R-R]",
    "[++R-R+R]",
    "[++R+R+R]",
    "[++R-R-R]",
    "[+++++R++R]",
    "[+++++R--R]",
    "[++++R+++R]",
    "[++++R---R]",
    "[++R+R+R+R]",
    "[++R+R-R+R]",
];
