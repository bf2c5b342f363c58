//! Normalized adjacency spectra and Hoffman's bound.
//!
//! The eigensolver is dense: Householder reduction to tridiagonal form,
//! implicit QL for the eigenvalues, and inverse iteration on the
//! tridiagonal for the eigenvectors of the extremes, mapped back through
//! the stored reflectors so residuals are checked against the input.

use num_rational::Ratio;
use serde::Serialize;
use thiserror::Error;

use crate::graph::{build_inverse_graph, Graph};
use crate::numtheory::Prime;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum SpectralError {
    #[error("d = {d} is below the maximum degree {max_degree}")]
    DegreeTooSmall { d: usize, max_degree: usize },
    #[error("matrix is not symmetric at ({i}, {j})")]
    NotSymmetric { i: usize, j: usize },
    #[error("empty matrix")]
    Empty,
    #[error("lambda_N = {0} outside [-1, 0)")]
    LambdaOutOfRange(f64),
    #[error("lambda_N = {0} outside [-1, 0)")]
    LambdaOutOfRangeExact(Ratio<i64>),
    #[error("{n} vertices exceed the dense solver limit of {max}; an iterative extremal solver is needed")]
    CapacityExceeded { n: usize, max: usize },
    #[error("eigen solver did not converge")]
    NoConvergence,
}

/// Dense square matrix, row-major.
#[derive(Debug, Clone, PartialEq)]
pub struct DenseMatrix {
    n: usize,
    data: Vec<f64>,
}

impl DenseMatrix {
    pub fn zeros(n: usize) -> Self {
        DenseMatrix { n, data: vec![0.0; n * n] }
    }

    pub fn scaled_identity(n: usize, c: f64) -> Self {
        let mut m = Self::zeros(n);
        for i in 0..n {
            m.set(i, i, c);
        }
        m
    }

    pub fn from_rows(rows: &[Vec<f64>]) -> Self {
        let n = rows.len();
        assert!(rows.iter().all(|r| r.len() == n), "matrix must be square");
        DenseMatrix { n, data: rows.concat() }
    }

    pub fn n(&self) -> usize {
        self.n
    }

    #[inline]
    pub fn get(&self, i: usize, j: usize) -> f64 {
        self.data[i * self.n + j]
    }

    #[inline]
    pub fn set(&mut self, i: usize, j: usize, v: f64) {
        self.data[i * self.n + j] = v;
    }

    pub fn row(&self, i: usize) -> &[f64] {
        &self.data[i * self.n..(i + 1) * self.n]
    }

    pub fn mul_vec(&self, x: &[f64]) -> Vec<f64> {
        (0..self.n).map(|i| dot(self.row(i), x)).collect()
    }

    pub fn trace(&self) -> f64 {
        (0..self.n).map(|i| self.get(i, i)).sum()
    }

    pub fn check_symmetric(&self, tol: f64) -> Result<(), SpectralError> {
        for i in 0..self.n {
            for j in 0..i {
                if (self.get(i, j) - self.get(j, i)).abs() > tol {
                    return Err(SpectralError::NotSymmetric { i, j });
                }
            }
        }
        Ok(())
    }
}

fn dot(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

fn norm(a: &[f64]) -> f64 {
    dot(a, a).sqrt()
}

/// `A_ij = 1/d` on edges, zero diagonal; self-loops are dropped.
pub fn normalized_adjacency(g: &Graph, d: usize) -> Result<DenseMatrix, SpectralError> {
    let max_degree = g.max_degree();
    if d < max_degree || d == 0 {
        return Err(SpectralError::DegreeTooSmall { d, max_degree });
    }
    let mut m = DenseMatrix::zeros(g.n());
    let w = 1.0 / d as f64;
    for (u, v) in g.edges() {
        if u != v {
            m.set(u, v, w);
            m.set(v, u, w);
        }
    }
    Ok(m)
}

/// Householder reduction `A = Q T Q^T`.
struct Tridiagonal {
    diag: Vec<f64>,
    /// `off[i]` couples `i-1` and `i`; `off[0] = 0`.
    off: Vec<f64>,
    /// Reflector `(v, beta)` acting on coordinates `0..v.len()`, in the order applied.
    reflectors: Vec<(Vec<f64>, f64)>,
}

fn tridiagonalize(m: &DenseMatrix) -> Tridiagonal {
    let n = m.n;
    let mut a = m.data.clone();
    let mut off = vec![0.0; n];
    let mut reflectors = Vec::new();
    let mut p = vec![0.0; n];
    for i in (2..n).rev() {
        let x = a[i * n..i * n + i].to_vec();
        let tail = norm(&x[..i - 1]);
        if tail == 0.0 {
            off[i] = x[i - 1];
            continue;
        }
        let xn = norm(&x);
        let alpha = if x[i - 1] > 0.0 { -xn } else { xn };
        let mut v = x;
        v[i - 1] -= alpha;
        let beta = 2.0 / dot(&v, &v);
        for j in 0..i {
            p[j] = beta * dot(&a[j * n..j * n + i], &v);
        }
        let k = 0.5 * beta * dot(&v, &p[..i]);
        for j in 0..i {
            p[j] -= k * v[j];
        }
        for j in 0..i {
            let (vj, qj) = (v[j], p[j]);
            let row = &mut a[j * n..j * n + i];
            for ((r, &vk), &qk) in row.iter_mut().zip(&v).zip(&p[..i]) {
                *r -= vj * qk + qj * vk;
            }
        }
        off[i] = alpha;
        reflectors.push((v, beta));
    }
    if n > 1 {
        off[1] = a[n];
    }
    let diag = (0..n).map(|i| a[i * n + i]).collect();
    reflectors.reverse();
    Tridiagonal { diag, off, reflectors }
}

/// Implicit QL on a symmetric tridiagonal matrix; eigenvalues ascending.
fn tridiagonal_eigenvalues(diag: &[f64], off: &[f64]) -> Result<Vec<f64>, SpectralError> {
    let n = diag.len();
    let mut d = diag.to_vec();
    let mut e = vec![0.0; n];
    e[..n.saturating_sub(1)].copy_from_slice(&off[1..]);
    let eps = f64::EPSILON;
    let mut f = 0.0;
    let mut tst1: f64 = 0.0;
    for l in 0..n {
        tst1 = tst1.max(d[l].abs() + e[l].abs());
        let mut m = l;
        while m < n - 1 && e[m].abs() > eps * tst1 {
            m += 1;
        }
        if m > l {
            let mut iter = 0;
            loop {
                iter += 1;
                if iter > 60 {
                    return Err(SpectralError::NoConvergence);
                }
                let mut g = d[l];
                let mut p = (d[l + 1] - g) / (2.0 * e[l]);
                let mut r = p.hypot(1.0);
                if p < 0.0 {
                    r = -r;
                }
                d[l] = e[l] / (p + r);
                d[l + 1] = e[l] * (p + r);
                let dl1 = d[l + 1];
                let mut h = g - d[l];
                for di in d.iter_mut().skip(l + 2) {
                    *di -= h;
                }
                f += h;
                p = d[m];
                let (mut c, mut c2, mut c3) = (1.0, 1.0, 1.0);
                let el1 = e[l + 1];
                let (mut s, mut s2) = (0.0, 0.0);
                for i in (l..m).rev() {
                    c3 = c2;
                    c2 = c;
                    s2 = s;
                    g = c * e[i];
                    h = c * p;
                    r = p.hypot(e[i]);
                    e[i + 1] = s * r;
                    s = e[i] / r;
                    c = p / r;
                    p = c * d[i] - s * g;
                    d[i + 1] = h + s * (c * g + s * d[i]);
                }
                p = -s * s2 * c3 * el1 * e[l] / dl1;
                e[l] = s * p;
                d[l] = c * p;
                if e[l].abs() <= eps * tst1 {
                    break;
                }
            }
        }
        d[l] += f;
        e[l] = 0.0;
    }
    d.sort_by(f64::total_cmp);
    Ok(d)
}

/// Solves `(T - sigma I) x = b` by Gaussian elimination with partial pivoting.
fn tridiagonal_solve(diag: &[f64], off: &[f64], sigma: f64, b: &[f64]) -> Vec<f64> {
    let n = diag.len();
    let tiny = f64::EPSILON * (diag.iter().chain(off).fold(0.0f64, |m, x| m.max(x.abs())) + 1.0);
    // rows kept as (sub, main, super, super2) after pivoting
    let mut dl: Vec<f64> = off[1..].to_vec();
    let mut dd: Vec<f64> = diag.iter().map(|x| x - sigma).collect();
    let mut du: Vec<f64> = off[1..].to_vec();
    let mut du2 = vec![0.0; n.saturating_sub(2)];
    let mut x = b.to_vec();
    for i in 0..n.saturating_sub(1) {
        if dd[i].abs() >= dl[i].abs() {
            if dd[i] == 0.0 {
                dd[i] = tiny;
            }
            let fact = dl[i] / dd[i];
            dd[i + 1] -= fact * du[i];
            x[i + 1] -= fact * x[i];
            dl[i] = 0.0;
        } else {
            let fact = dd[i] / dl[i];
            dd[i] = dl[i];
            let tmp = dd[i + 1];
            dd[i + 1] = du[i] - fact * tmp;
            if i + 1 < n - 1 {
                du2[i] = du[i + 1];
                du[i + 1] *= -fact;
            }
            du[i] = tmp;
            x.swap(i, i + 1);
            x[i + 1] -= fact * x[i];
        }
    }
    if n > 0 && dd[n - 1] == 0.0 {
        dd[n - 1] = tiny;
    }
    for i in (0..n).rev() {
        let mut s = x[i];
        if i + 1 < n {
            s -= du[i] * x[i + 1];
        }
        if i + 2 < n {
            s -= du2[i] * x[i + 2];
        }
        x[i] = s / dd[i];
    }
    x
}

fn tridiagonal_eigenvector(diag: &[f64], off: &[f64], lambda: f64) -> Vec<f64> {
    let n = diag.len();
    let scale = diag.iter().chain(off).fold(1.0f64, |m, x| m.max(x.abs()));
    let sigma = lambda + 1e3 * f64::EPSILON * scale;
    let mut x: Vec<f64> = (0..n).map(|i| 1.0 + 0.1 * ((i as f64) * 0.7).sin()).collect();
    for _ in 0..4 {
        x = tridiagonal_solve(diag, off, sigma, &x);
        let nx = norm(&x);
        if !nx.is_finite() || nx == 0.0 {
            break;
        }
        x.iter_mut().for_each(|v| *v /= nx);
    }
    x
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct Extremes {
    pub lambda_1: f64,
    pub lambda_2: f64,
    pub lambda_n: f64,
    /// Largest `||M v - lambda v||` over the three extremes, unit `v`.
    pub residual: f64,
}

/// All eigenvalues, ascending.
pub fn eigenvalues(m: &DenseMatrix) -> Result<Vec<f64>, SpectralError> {
    if m.n == 0 {
        return Err(SpectralError::Empty);
    }
    m.check_symmetric(1e-12)?;
    let t = tridiagonalize(m);
    tridiagonal_eigenvalues(&t.diag, &t.off)
}

/// `(lambda_1, lambda_2, lambda_N)` with eigenvector residuals.
pub fn eigen_extremes(m: &DenseMatrix) -> Result<Extremes, SpectralError> {
    if m.n == 0 {
        return Err(SpectralError::Empty);
    }
    m.check_symmetric(1e-12)?;
    let t = tridiagonalize(m);
    let values = tridiagonal_eigenvalues(&t.diag, &t.off)?;
    let n = values.len();
    let (l1, ln) = (values[n - 1], values[0]);
    let l2 = if n > 1 { values[n - 2] } else { l1 };
    let mut residual: f64 = 0.0;
    for lambda in [l1, l2, ln] {
        let mut v = tridiagonal_eigenvector(&t.diag, &t.off, lambda);
        for (r, beta) in &t.reflectors {
            let s = beta * dot(r, &v[..r.len()]);
            for (vi, ri) in v.iter_mut().zip(r) {
                *vi -= s * ri;
            }
        }
        let nv = norm(&v);
        v.iter_mut().for_each(|x| *x /= nv);
        let mv = m.mul_vec(&v);
        let r: f64 = mv.iter().zip(&v).map(|(a, b)| (a - lambda * b).powi(2)).sum::<f64>().sqrt();
        residual = residual.max(if r.is_finite() { r } else { f64::INFINITY });
    }
    Ok(Extremes { lambda_1: l1, lambda_2: l2, lambda_n: ln, residual })
}

/// `-lambda_N / (1 - lambda_N)`.
pub fn hoffman_bound(lambda_n: f64) -> Result<f64, SpectralError> {
    if !(-1.0..0.0).contains(&lambda_n) {
        return Err(SpectralError::LambdaOutOfRange(lambda_n));
    }
    Ok(-lambda_n / (1.0 - lambda_n))
}

pub fn hoffman_bound_exact(lambda_n: Ratio<i64>) -> Result<Ratio<i64>, SpectralError> {
    if lambda_n < Ratio::from_integer(-1) || lambda_n >= Ratio::from_integer(0) {
        return Err(SpectralError::LambdaOutOfRangeExact(lambda_n));
    }
    Ok(-lambda_n / (Ratio::from_integer(1) - lambda_n))
}

pub const DENSE_MAX_VERTICES: usize = 4000;

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SpectralReport {
    pub n: usize,
    pub d: usize,
    pub lambda_1: f64,
    pub lambda_2: f64,
    pub lambda_n: f64,
    /// `max(lambda_2, -lambda_N)`
    pub lambda: f64,
    pub hoffman: f64,
    /// Every vertex has degree exactly `d`; otherwise `hoffman` is not a
    /// theorem-backed bound.
    pub regular: bool,
    pub residual: f64,
}

pub fn graph_report(g: &Graph, d: usize) -> Result<SpectralReport, SpectralError> {
    if g.n() > DENSE_MAX_VERTICES {
        return Err(SpectralError::CapacityExceeded { n: g.n(), max: DENSE_MAX_VERTICES });
    }
    let m = normalized_adjacency(g, d)?;
    let ex = eigen_extremes(&m)?;
    // clamp rounding just below -1 on bipartite graphs
    let hoffman = hoffman_bound(ex.lambda_n.max(-1.0))?;
    Ok(SpectralReport {
        n: g.n(),
        d,
        lambda_1: ex.lambda_1,
        lambda_2: ex.lambda_2,
        lambda_n: ex.lambda_n,
        lambda: ex.lambda_2.max(-ex.lambda_n),
        hoffman,
        regular: g.is_regular() == Some(d),
        residual: ex.residual,
    })
}

/// Report for the inverse graph at `p` with `d = 3`.
pub fn spectral_report(p: Prime) -> Result<SpectralReport, SpectralError> {
    let n = p.get() as usize;
    if n > DENSE_MAX_VERTICES {
        return Err(SpectralError::CapacityExceeded { n, max: DENSE_MAX_VERTICES });
    }
    graph_report(&build_inverse_graph(p), 3)
}
