//! The Poisson extension `P_σ`, its adjoint `P*_μ`, and the two-weight operator norm.

use nalgebra::DMatrix;
use rayon::prelude::*;
use serde::Serialize;

use crate::error::{Error, Result};
use crate::kernel::poisson_unchecked;
use crate::model::{DiscreteMeasure, KernelParams, UpperHalfMeasure};

pub const DEFAULT_TOL: f64 = 1e-10;
pub const DEFAULT_MAX_ITERS: usize = 10_000;
/// Largest total atom count for which the dense SVD fallback is used.
pub const SVD_FALLBACK_ATOMS: usize = 512;

/// Kernel matrix `K[r][c] = P_t(x_r, y_c)` with rows over μ-atoms and columns over σ-atoms.
#[derive(Debug, Clone)]
pub struct OperatorMatrix {
    rows: usize,
    cols: usize,
    entries: Vec<f64>,
    sigma_w: Vec<f64>,
    mu_w: Vec<f64>,
}

impl OperatorMatrix {
    pub fn assemble(params: &KernelParams, sigma: &DiscreteMeasure, mu: &UpperHalfMeasure) -> Result<Self> {
        if sigma.is_empty() {
            return Err(Error::EmptyMeasure { which: "sigma" });
        }
        if mu.is_empty() {
            return Err(Error::EmptyMeasure { which: "mu" });
        }
        let (rows, cols) = (mu.len(), sigma.len());
        let mut entries = vec![0.0; rows * cols];
        let sa = sigma.atoms();
        entries
            .par_chunks_mut(cols)
            .zip(mu.atoms().par_iter())
            .for_each(|(row, m)| {
                for (e, s) in row.iter_mut().zip(sa) {
                    *e = poisson_unchecked(params, m.t, &m.point, &s.point);
                }
            });
        Ok(OperatorMatrix {
            rows,
            cols,
            entries,
            sigma_w: sigma.weights(),
            mu_w: mu.weights(),
        })
    }

    pub fn rows(&self) -> usize {
        self.rows
    }

    pub fn cols(&self) -> usize {
        self.cols
    }

    /// `P_t(x_r, y_c)`.
    pub fn get(&self, r: usize, c: usize) -> f64 {
        self.entries[r * self.cols + c]
    }

    pub fn row(&self, r: usize) -> &[f64] {
        &self.entries[r * self.cols..(r + 1) * self.cols]
    }

    pub fn sigma_weights(&self) -> &[f64] {
        &self.sigma_w
    }

    pub fn mu_weights(&self) -> &[f64] {
        &self.mu_w
    }

    /// `(P_σ f)(x,t) = Σ_y P_t(x,y) f(y) σ({y})` at every μ-atom.
    pub fn forward(&self, f: &[f64]) -> Vec<f64> {
        assert_eq!(f.len(), self.cols, "f must be defined on every sigma atom");
        let fw: Vec<f64> = f.iter().zip(&self.sigma_w).map(|(a, b)| a * b).collect();
        (0..self.rows).map(|r| dot(self.row(r), &fw)).collect()
    }

    /// `(P*_μ g)(y) = Σ_{(x,t)} P_t(x,y) g(x,t) μ({(x,t)})` at every σ-atom.
    pub fn adjoint(&self, g: &[f64]) -> Vec<f64> {
        assert_eq!(g.len(), self.rows, "g must be defined on every mu atom");
        let mut out = vec![0.0; self.cols];
        for r in 0..self.rows {
            let c = g[r] * self.mu_w[r];
            if c != 0.0 {
                for (o, k) in out.iter_mut().zip(self.row(r)) {
                    *o += k * c;
                }
            }
        }
        out
    }

    /// `A = W_μ^{1/2} K W_σ^{1/2}` as a dense matrix.
    pub fn weighted_dense(&self) -> DMatrix<f64> {
        let sq: Vec<f64> = self.sigma_w.iter().map(|w| w.sqrt()).collect();
        DMatrix::from_fn(self.rows, self.cols, |r, c| self.mu_w[r].sqrt() * self.get(r, c) * sq[c])
    }
}

fn dot(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

fn norm2(a: &[f64]) -> f64 {
    dot(a, a).sqrt()
}

/// `⟨P_σ f, g⟩_μ`.
pub fn pairing_mu(m: &OperatorMatrix, f: &[f64], g: &[f64]) -> f64 {
    m.forward(f)
        .iter()
        .zip(g)
        .zip(&m.mu_w)
        .map(|((a, b), w)| a * b * w)
        .sum()
}

/// `⟨f, P*_μ g⟩_σ`.
pub fn pairing_sigma(m: &OperatorMatrix, f: &[f64], g: &[f64]) -> f64 {
    m.adjoint(g)
        .iter()
        .zip(f)
        .zip(&m.sigma_w)
        .map(|((a, b), w)| a * b * w)
        .sum()
}

/// `P_σ f` without assembling a matrix.
pub fn apply_forward(
    params: &KernelParams,
    sigma: &DiscreteMeasure,
    mu: &UpperHalfMeasure,
    f: &[f64],
) -> Vec<f64> {
    assert_eq!(f.len(), sigma.len(), "f must be defined on every sigma atom");
    mu.atoms()
        .iter()
        .map(|m| {
            sigma
                .atoms()
                .iter()
                .zip(f)
                .map(|(s, v)| poisson_unchecked(params, m.t, &m.point, &s.point) * v * s.weight)
                .sum()
        })
        .collect()
}

/// `P*_μ g` without assembling a matrix.
pub fn apply_adjoint(
    params: &KernelParams,
    sigma: &DiscreteMeasure,
    mu: &UpperHalfMeasure,
    g: &[f64],
) -> Vec<f64> {
    assert_eq!(g.len(), mu.len(), "g must be defined on every mu atom");
    sigma
        .atoms()
        .iter()
        .map(|s| {
            mu.atoms()
                .iter()
                .zip(g)
                .map(|(m, v)| poisson_unchecked(params, m.t, &m.point, &s.point) * v * m.weight)
                .sum()
        })
        .collect()
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum NormMethod {
    PowerIteration,
    DenseSvd,
}

/// The operator norm with its top singular pair.
#[derive(Debug, Clone, Serialize)]
pub struct NormResult {
    #[serde(rename = "N")]
    pub value: f64,
    #[serde(rename = "iters")]
    pub iterations: usize,
    /// `‖AᵀAv − N²v‖ / N²` at the returned vector.
    pub residual: f64,
    pub method: NormMethod,
    /// Maximiser `f` on σ-atoms with `‖f‖_{L²(σ)} = 1`.
    #[serde(skip)]
    pub right: Vec<f64>,
    /// `P_σ f / N` on μ-atoms.
    #[serde(skip)]
    pub left: Vec<f64>,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct NormOptions {
    pub tol: f64,
    pub max_iters: usize,
    /// Use the dense SVD if power iteration stalls on a small instance.
    pub svd_fallback: bool,
}

impl Default for NormOptions {
    fn default() -> Self {
        NormOptions {
            tol: DEFAULT_TOL,
            max_iters: DEFAULT_MAX_ITERS,
            svd_fallback: true,
        }
    }
}

/// Power iteration on `AᵀA` from the all-ones vector.
///
/// All kernel entries are positive, so the top singular value is simple and
/// the start vector is not orthogonal to its singular vector.
pub fn power_iteration(m: &OperatorMatrix, tol: f64, max_iters: usize) -> Result<NormResult> {
    let sw: Vec<f64> = m.sigma_w.iter().map(|w| w.sqrt()).collect();
    let mw: Vec<f64> = m.mu_w.iter().map(|w| w.sqrt()).collect();
    let apply_a = |v: &[f64]| -> Vec<f64> {
        let f: Vec<f64> = v.iter().zip(&sw).map(|(a, b)| a * b).collect();
        (0..m.rows).map(|r| mw[r] * dot(m.row(r), &f)).collect()
    };
    let apply_at = |u: &[f64]| -> Vec<f64> {
        let mut out = vec![0.0; m.cols];
        for r in 0..m.rows {
            let c = u[r] * mw[r];
            for (o, k) in out.iter_mut().zip(m.row(r)) {
                *o += k * c;
            }
        }
        out.iter_mut().zip(&sw).for_each(|(o, s)| *o *= s);
        out
    };

    let mut v = vec![1.0 / (m.cols as f64).sqrt(); m.cols];
    let mut best = (0.0f64, f64::INFINITY, v.clone());
    for it in 1..=max_iters {
        let w = apply_at(&apply_a(&v));
        let lambda = dot(&v, &w);
        if !(lambda > 0.0) {
            return Ok(finish(m, 0.0, it, 0.0, NormMethod::PowerIteration, &v, &sw));
        }
        let res = w
            .iter()
            .zip(&v)
            .map(|(a, b)| (a - lambda * b).powi(2))
            .sum::<f64>()
            .sqrt()
            / lambda;
        if res < best.1 {
            best = (lambda, res, v.clone());
        }
        if res <= tol {
            return Ok(finish(m, lambda, it, res, NormMethod::PowerIteration, &v, &sw));
        }
        let nw = norm2(&w);
        v = w.into_iter().map(|x| x / nw).collect();
    }
    Err(Error::NoConvergence {
        iterations: max_iters,
        estimate: best.0.sqrt(),
        residual: best.1,
    })
}

fn finish(
    m: &OperatorMatrix,
    lambda: f64,
    iterations: usize,
    residual: f64,
    method: NormMethod,
    v: &[f64],
    sw: &[f64],
) -> NormResult {
    let value = lambda.max(0.0).sqrt();
    let right: Vec<f64> = v.iter().zip(sw).map(|(a, s)| a / s).collect();
    let left = if value > 0.0 {
        m.forward(&right).into_iter().map(|x| x / value).collect()
    } else {
        vec![0.0; m.rows]
    };
    NormResult {
        value,
        iterations,
        residual,
        method,
        right,
        left,
    }
}

/// Largest singular value of `A` by a dense SVD.
pub fn dense_norm(m: &OperatorMatrix) -> f64 {
    m.weighted_dense()
        .singular_values()
        .iter()
        .fold(0.0f64, |a, &b| a.max(b))
}

fn dense_result(m: &OperatorMatrix) -> NormResult {
    let a = m.weighted_dense();
    let svd = a.svd(false, true);
    let (k, value) = svd
        .singular_values
        .iter()
        .copied()
        .enumerate()
        .fold((0, 0.0f64), |acc, (i, s)| if s > acc.1 { (i, s) } else { acc });
    let vt = svd.v_t.expect("requested right vectors");
    let mut v: Vec<f64> = vt.row(k).iter().copied().collect();
    if v.iter().sum::<f64>() < 0.0 {
        v.iter_mut().for_each(|x| *x = -*x);
    }
    let sw: Vec<f64> = m.sigma_w.iter().map(|w| w.sqrt()).collect();
    finish(m, value * value, 0, 0.0, NormMethod::DenseSvd, &v, &sw)
}

/// `N = ‖P_σ‖_{L²(σ) → L²(μ)}` from an assembled matrix.
pub fn norm_of_matrix(m: &OperatorMatrix, opts: &NormOptions) -> Result<NormResult> {
    match power_iteration(m, opts.tol, opts.max_iters) {
        Err(Error::NoConvergence { .. }) if opts.svd_fallback && m.rows + m.cols <= SVD_FALLBACK_ATOMS => {
            Ok(dense_result(m))
        }
        other => other,
    }
}

/// `N = ‖P_σ‖_{L²(σ) → L²(μ)}`.
pub fn operator_norm(
    params: &KernelParams,
    sigma: &DiscreteMeasure,
    mu: &UpperHalfMeasure,
    opts: &NormOptions,
) -> Result<NormResult> {
    norm_of_matrix(&OperatorMatrix::assemble(params, sigma, mu)?, opts)
}
