//! Modular arithmetic over the prime field F_p.
//!
//! Everything here works on canonical residues in `0..p` stored as `u64`;
//! products go through `u128` so any prime below 2^64 is supported.
//!
//! The Legendre symbol has two independent routes: Euler's criterion
//! ([`legendre`]) and the reciprocity recursion ([`legendre_by_reciprocity`]).
//! The census relies on the first; the second exists so the two can be
//! checked against each other.

use std::fmt;

use thiserror::Error;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum NumTheoryError {
    #[error("{0} is not a prime >= 3")]
    NotPrime(u64),
    #[error("{0} has no inverse modulo {1}")]
    NotInvertible(u64, u64),
    #[error("{0} is a quadratic non-residue modulo {1}")]
    NonResidue(u64, u64),
    #[error("all coefficients vanish modulo {0}; every residue is a solution")]
    AllZero(u64),
}

/// An odd prime, checked at construction.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct Prime(u64);

impl Prime {
    pub fn new(value: u64) -> Result<Self, NumTheoryError> {
        if value >= 3 && is_prime(value) {
            Ok(Prime(value))
        } else {
            Err(NumTheoryError::NotPrime(value))
        }
    }

    #[inline]
    pub fn get(self) -> u64 {
        self.0
    }

    /// Canonical representative of `a` in `0..p`.
    #[inline]
    pub fn reduce(self, a: i64) -> u64 {
        a.rem_euclid(self.0 as i64) as u64
    }

    /// All primes `p >= 3` in the inclusive range.
    pub fn range(lo: u64, hi: u64) -> Vec<Prime> {
        (lo.max(3)..=hi).filter_map(|v| Prime::new(v).ok()).collect()
    }
}

impl fmt::Display for Prime {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        self.0.fmt(f)
    }
}

impl TryFrom<u64> for Prime {
    type Error = NumTheoryError;

    fn try_from(value: u64) -> Result<Self, Self::Error> {
        Prime::new(value)
    }
}

#[inline]
pub fn mul_mod(a: u64, b: u64, m: u64) -> u64 {
    ((a as u128 * b as u128) % m as u128) as u64
}

pub fn pow_mod(mut base: u64, mut exp: u64, m: u64) -> u64 {
    let mut acc = 1 % m;
    base %= m;
    while exp > 0 {
        if exp & 1 == 1 {
            acc = mul_mod(acc, base, m);
        }
        base = mul_mod(base, base, m);
        exp >>= 1;
    }
    acc
}

// Witnesses sufficient for every n < 2^64.
const MR_WITNESSES: [u64; 12] = [2, 3, 5, 7, 11, 13, 17, 19, 23, 29, 31, 37];

/// Deterministic Miller-Rabin for 64-bit inputs.
pub fn is_prime(n: u64) -> bool {
    if n < 2 {
        return false;
    }
    for &w in &MR_WITNESSES {
        if n.is_multiple_of(w) {
            return n == w;
        }
    }
    let s = (n - 1).trailing_zeros();
    let d = (n - 1) >> s;
    'witness: for &a in &MR_WITNESSES {
        let mut x = pow_mod(a, d, n);
        if x == 1 || x == n - 1 {
            continue;
        }
        for _ in 1..s {
            x = mul_mod(x, x, n);
            if x == n - 1 {
                continue 'witness;
            }
        }
        return false;
    }
    true
}

/// Multiplicative inverse by the extended Euclidean algorithm.
pub fn mod_inverse(a: u64, p: Prime) -> Result<u64, NumTheoryError> {
    let m = p.get() as i128;
    let a_red = a % p.get();
    if a_red == 0 {
        return Err(NumTheoryError::NotInvertible(a, p.get()));
    }
    let (mut r0, mut r1) = (m, a_red as i128);
    let (mut t0, mut t1) = (0i128, 1i128);
    while r1 != 0 {
        let q = r0 / r1;
        (r0, r1) = (r1, r0 - q * r1);
        (t0, t1) = (t1, t0 - q * t1);
    }
    debug_assert_eq!(r0, 1);
    Ok(t0.rem_euclid(m) as u64)
}

/// Legendre symbol `(a/p)` via Euler's criterion `a^((p-1)/2) mod p`.
pub fn legendre(a: i64, p: Prime) -> i8 {
    let r = p.reduce(a);
    if r == 0 {
        return 0;
    }
    let e = pow_mod(r, (p.get() - 1) / 2, p.get());
    if e == 1 {
        1
    } else {
        debug_assert_eq!(e, p.get() - 1);
        -1
    }
}

/// Legendre symbol through the first supplementary law for the sign, the
/// second supplementary law for factors of two, and quadratic reciprocity
/// (in its Jacobi-symbol form) for the odd part.
pub fn legendre_by_reciprocity(a: i64, p: Prime) -> i8 {
    let n = p.get();
    // (-1/p) = (-1)^((p-1)/2)
    let minus_one = if n % 4 == 1 { 1 } else { -1 };
    let mut sign: i8 = 1;
    let mut top = if a < 0 {
        sign *= minus_one;
        (a.unsigned_abs()) % n
    } else {
        a as u64 % n
    };
    let mut bottom = n;
    if top == 0 {
        return 0;
    }
    loop {
        // (2/n) = (-1)^((n^2-1)/8)
        while top % 2 == 0 {
            top /= 2;
            if bottom % 8 == 3 || bottom % 8 == 5 {
                sign = -sign;
            }
        }
        if top == 1 {
            return sign;
        }
        // (m/n)(n/m) = (-1)^((m-1)/2 (n-1)/2)
        if top % 4 == 3 && bottom % 4 == 3 {
            sign = -sign;
        }
        std::mem::swap(&mut top, &mut bottom);
        top %= bottom;
        if top == 0 {
            // gcd > 1: only reachable for composite moduli, never for a prime p
            return 0;
        }
    }
}

/// Every square root of `a` modulo `p`, ascending.
///
/// Tonelli-Shanks; `{0}` for `a = 0`, two roots otherwise.
pub fn sqrt_mod(a: u64, p: Prime) -> Result<Vec<u64>, NumTheoryError> {
    let n = p.get();
    let a = a % n;
    if a == 0 {
        return Ok(vec![0]);
    }
    if legendre(a as i64, p) != 1 {
        return Err(NumTheoryError::NonResidue(a, n));
    }
    let root = if n % 4 == 3 {
        pow_mod(a, (n + 1) / 4, n)
    } else {
        let s = (n - 1).trailing_zeros();
        let q = (n - 1) >> s;
        let z = (2..n)
            .find(|&z| legendre(z as i64, p) == -1)
            .expect("odd prime has a non-residue");
        let mut m = s;
        let mut c = pow_mod(z, q, n);
        let mut t = pow_mod(a, q, n);
        let mut r = pow_mod(a, q.div_ceil(2), n);
        while t != 1 {
            let mut i = 0;
            let mut t2 = t;
            while t2 != 1 {
                t2 = mul_mod(t2, t2, n);
                i += 1;
            }
            let b = pow_mod(c, 1 << (m - i - 1), n);
            m = i;
            c = mul_mod(b, b, n);
            t = mul_mod(t, c, n);
            r = mul_mod(r, b, n);
        }
        r
    };
    let mut roots = vec![root, n - root];
    roots.sort_unstable();
    Ok(roots)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, serde::Serialize)]
pub enum RootKind {
    TwoSolutions,
    NoSolution,
    /// Exactly one root: a linear equation, or a quadratic with a double root.
    LinearUnique,
    /// The equation vanishes identically (reported by callers, never by
    /// [`solve_quadratic`], which rejects it).
    Degenerate,
}

impl fmt::Display for RootKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let s = match self {
            RootKind::TwoSolutions => "two",
            RootKind::NoSolution => "none",
            RootKind::LinearUnique => "unique",
            RootKind::Degenerate => "degenerate",
        };
        f.write_str(s)
    }
}

#[derive(Debug, Clone, PartialEq, Eq, serde::Serialize)]
pub struct ResidueClassification {
    pub kind: RootKind,
    /// Ascending, distinct residues in `0..p`.
    pub solutions: Vec<u64>,
}

impl ResidueClassification {
    fn from_roots(mut solutions: Vec<u64>) -> Self {
        solutions.sort_unstable();
        solutions.dedup();
        let kind = match solutions.len() {
            0 => RootKind::NoSolution,
            1 => RootKind::LinearUnique,
            2 => RootKind::TwoSolutions,
            _ => unreachable!("a nonzero polynomial of degree <= 2 has at most two roots"),
        };
        ResidueClassification { kind, solutions }
    }

    pub fn degenerate() -> Self {
        ResidueClassification {
            kind: RootKind::Degenerate,
            solutions: Vec::new(),
        }
    }
}

/// All `x` in `0..p` with `a x^2 + b x + c = 0 (mod p)`.
pub fn solve_quadratic(
    a: i64,
    b: i64,
    c: i64,
    p: Prime,
) -> Result<ResidueClassification, NumTheoryError> {
    let n = p.get();
    let (a, b, c) = (p.reduce(a), p.reduce(b), p.reduce(c));
    if a == 0 {
        if b == 0 {
            return if c == 0 {
                Err(NumTheoryError::AllZero(n))
            } else {
                Ok(ResidueClassification::from_roots(vec![]))
            };
        }
        let x = mul_mod(n - c, mod_inverse(b, p)?, n);
        return Ok(ResidueClassification::from_roots(vec![x % n]));
    }
    // discriminant b^2 - 4ac
    let disc = (mul_mod(b, b, n) + n - mul_mod(4 % n, mul_mod(a, c, n), n)) % n;
    let inv_2a = mod_inverse(mul_mod(2, a, n), p)?;
    let neg_b = (n - b) % n;
    match legendre(disc as i64, p) {
        -1 => Ok(ResidueClassification::from_roots(vec![])),
        0 => Ok(ResidueClassification::from_roots(vec![mul_mod(neg_b, inv_2a, n)])),
        _ => {
            let roots = sqrt_mod(disc, p)?;
            let s = roots[0];
            let x1 = mul_mod((neg_b + s) % n, inv_2a, n);
            let x2 = mul_mod((neg_b + n - s) % n, inv_2a, n);
            Ok(ResidueClassification::from_roots(vec![x1, x2]))
        }
    }
}
