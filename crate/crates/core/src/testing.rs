//! Forward and backward testing constants and their comparison with the operator norm.

use rayon::prelude::*;
use serde::Serialize;

use crate::dyadic::{all_cubes, DyadicCube, HatConvention};
use crate::error::{Error, Result};
use crate::generate::{generate, GenConfig};
use crate::io::Instance;
use crate::model::{DiscreteMeasure, KernelParams, UpperHalfMeasure};
use crate::operators::{norm_of_matrix, NormMethod, NormOptions, OperatorMatrix};

/// Relative slack separating floating point noise from a failed necessity check.
pub const DEFAULT_EPS_NUM: f64 = 1e-9;
pub const DEFAULT_RATIO_CEILING: f64 = 100.0;

/// A testing constant and the cube attaining it.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct Tested {
    pub value: f64,
    pub achiever: Option<DyadicCube>,
}

/// Index sets of one cube, resolved against an instance.
struct CubeView {
    cube: DyadicCube,
    /// σ-atoms in `I`.
    sigma_in: Vec<usize>,
    /// σ-atoms in `3I`.
    sigma_triple: Vec<usize>,
    /// μ-atoms in the forward region over `3I`.
    mu_hat_triple: Vec<usize>,
    /// μ-atoms in the Carleson box `Î`.
    mu_box: Vec<usize>,
}

fn views(
    params: &KernelParams,
    sigma: &DiscreteMeasure,
    mu: &UpperHalfMeasure,
    hat: HatConvention,
) -> Vec<CubeView> {
    all_cubes(params)
        .into_par_iter()
        .map(|cube| {
            let triple = cube.triple(params);
            let region = cube.hat_triple(params, hat);
            let boxed = cube.carleson_box(params);
            let sa = sigma.atoms();
            let ma = mu.atoms();
            CubeView {
                cube,
                sigma_in: (0..sa.len()).filter(|&i| cube.contains(&sa[i].point, params)).collect(),
                sigma_triple: (0..sa.len()).filter(|&i| triple.contains(&sa[i].point, params)).collect(),
                mu_hat_triple: (0..ma.len())
                    .filter(|&i| region.contains(&ma[i].point, ma[i].t, params))
                    .collect(),
                mu_box: (0..ma.len())
                    .filter(|&i| boxed.contains(&ma[i].point, ma[i].t, params))
                    .collect(),
            }
        })
        .collect()
}

/// Largest value, first cube on ties.
fn argmax(values: Vec<(DyadicCube, Option<f64>)>) -> Tested {
    let mut best = Tested {
        value: 0.0,
        achiever: None,
    };
    for (cube, v) in values {
        if let Some(v) = v {
            if best.achiever.is_none() || v > best.value {
                best = Tested {
                    value: v,
                    achiever: Some(cube),
                };
            }
        }
    }
    best
}

fn forward_from(m: &OperatorMatrix, views: &[CubeView]) -> Tested {
    let sw = m.sigma_weights();
    let mw = m.mu_weights();
    argmax(
        views
            .par_iter()
            .map(|v| {
                let mass: f64 = v.sigma_in.iter().map(|&c| sw[c]).sum();
                if !(mass > 0.0) {
                    return (v.cube, None);
                }
                let energy: f64 = v
                    .mu_hat_triple
                    .iter()
                    .map(|&r| {
                        let row = m.row(r);
                        let ext: f64 = v.sigma_in.iter().map(|&c| row[c] * sw[c]).sum();
                        ext * ext * mw[r]
                    })
                    .sum();
                (v.cube, Some((energy / mass).sqrt()))
            })
            .collect(),
    )
}

fn backward_from(m: &OperatorMatrix, mu_t: &[f64], views: &[CubeView]) -> Tested {
    let sw = m.sigma_weights();
    let mw = m.mu_weights();
    argmax(
        views
            .par_iter()
            .map(|v| {
                let mass: f64 = v.mu_box.iter().map(|&r| mu_t[r] * mu_t[r] * mw[r]).sum();
                if !(mass > 0.0) {
                    return (v.cube, None);
                }
                let energy: f64 = v
                    .sigma_triple
                    .iter()
                    .map(|&c| {
                        let ext: f64 = v.mu_box.iter().map(|&r| m.get(r, c) * mu_t[r] * mw[r]).sum();
                        ext * ext * sw[c]
                    })
                    .sum();
                (v.cube, Some((energy / mass).sqrt()))
            })
            .collect(),
    )
}

/// `F`: the least constant with `∫_{hat 3I} (P_σ 1_I)² dμ ≤ F² σ(I)` over all dyadic `I`.
pub fn forward_constant(
    params: &KernelParams,
    sigma: &DiscreteMeasure,
    mu: &UpperHalfMeasure,
    hat: HatConvention,
) -> Result<Tested> {
    let m = OperatorMatrix::assemble(params, sigma, mu)?;
    Ok(forward_from(&m, &views(params, sigma, mu, hat)))
}

/// `B`: the least constant with `∫_{3I} P*_μ(t 1_Î)² dσ ≤ B² μ̃(Î)` over all dyadic `I`.
pub fn backward_constant(
    params: &KernelParams,
    sigma: &DiscreteMeasure,
    mu: &UpperHalfMeasure,
) -> Result<Tested> {
    let m = OperatorMatrix::assemble(params, sigma, mu)?;
    let ts: Vec<f64> = mu.atoms().iter().map(|a| a.t).collect();
    Ok(backward_from(&m, &ts, &views(params, sigma, mu, HatConvention::default())))
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct VerifyOptions {
    pub hat: HatConvention,
    pub norm: NormOptions,
    pub eps_num: f64,
}

impl Default for VerifyOptions {
    fn default() -> Self {
        VerifyOptions {
            hat: HatConvention::default(),
            norm: NormOptions::default(),
            eps_num: DEFAULT_EPS_NUM,
        }
    }
}

#[derive(Debug, Clone, Serialize)]
pub struct TestingReport {
    #[serde(rename = "N")]
    pub n: f64,
    #[serde(rename = "F")]
    pub f: f64,
    #[serde(rename = "B")]
    pub b: f64,
    #[serde(rename = "F_achiever")]
    pub f_achiever: Option<DyadicCube>,
    #[serde(rename = "B_achiever")]
    pub b_achiever: Option<DyadicCube>,
    /// `N / (F + B)`, absent when both constants vanish.
    pub ratio: Option<f64>,
    pub f_over_n: Option<f64>,
    pub b_over_n: Option<f64>,
    pub necessity_holds: bool,
    pub eps_num: f64,
    pub hat_convention: HatConvention,
    pub norm_method: NormMethod,
    pub norm_iterations: usize,
    pub norm_residual: f64,
    pub sigma_atoms: usize,
    pub mu_atoms: usize,
    pub params: KernelParams,
    pub seed: Option<u64>,
}

impl TestingReport {
    /// Fails when a testing constant exceeds the norm beyond the numerical slack.
    pub fn check_necessity(&self) -> Result<()> {
        if self.necessity_holds {
            Ok(())
        } else {
            Err(Error::Violation(format!(
                "testing constants exceed the operator norm: F = {}, B = {}, N = {}",
                self.f, self.b, self.n
            )))
        }
    }
}

/// Computes `N`, `F` and `B` for one instance.
pub fn verify(params: &KernelParams, inst: &Instance, opts: &VerifyOptions) -> Result<TestingReport> {
    params.validate()?;
    let m = OperatorMatrix::assemble(params, &inst.sigma, &inst.mu)?;
    let norm = norm_of_matrix(&m, &opts.norm)?;
    let ts: Vec<f64> = inst.mu.atoms().iter().map(|a| a.t).collect();
    let vs = views(params, &inst.sigma, &inst.mu, opts.hat);
    let f = forward_from(&m, &vs);
    let b = backward_from(&m, &ts, &vs);
    let n = norm.value;
    let bound = n * (1.0 + opts.eps_num);
    let div = |a: f64, d: f64| (d > 0.0).then(|| a / d);
    Ok(TestingReport {
        n,
        f: f.value,
        b: b.value,
        f_achiever: f.achiever,
        b_achiever: b.achiever,
        ratio: div(n, f.value + b.value),
        f_over_n: div(f.value, n),
        b_over_n: div(b.value, n),
        necessity_holds: f.value <= bound && b.value <= bound,
        eps_num: opts.eps_num,
        hat_convention: opts.hat,
        norm_method: norm.method,
        norm_iterations: norm.iterations,
        norm_residual: norm.residual,
        sigma_atoms: inst.sigma.len(),
        mu_atoms: inst.mu.len(),
        params: *params,
        seed: None,
    })
}

/// One line of a sweep.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SweepRow {
    pub seed: u64,
    #[serde(rename = "N")]
    pub n: f64,
    #[serde(rename = "F")]
    pub f: f64,
    #[serde(rename = "B")]
    pub b: f64,
    pub ratio: Option<f64>,
    #[serde(rename = "F_achiever")]
    pub f_achiever: String,
    #[serde(rename = "B_achiever")]
    pub b_achiever: String,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SweepConfig {
    pub seed: u64,
    pub instances: usize,
    pub gen: GenConfig,
    pub verify: VerifyOptions,
}

/// Outcome of a sweep, rows ordered by seed.
#[derive(Debug, Clone)]
pub struct Sweep {
    pub rows: Vec<SweepRow>,
    pub reports: Vec<TestingReport>,
}

impl Sweep {
    pub fn max_ratio(&self) -> Option<f64> {
        self.rows.iter().filter_map(|r| r.ratio).reduce(f64::max)
    }

    pub fn necessity_failures(&self) -> Vec<u64> {
        self.reports
            .iter()
            .filter(|r| !r.necessity_holds)
            .filter_map(|r| r.seed)
            .collect()
    }
}

/// Runs `verify` on instances seeded `seed, seed+1, …` in parallel.
pub fn sweep(params: &KernelParams, cfg: &SweepConfig) -> Result<Sweep> {
    let reports = (0..cfg.instances as u64)
        .into_par_iter()
        .map(|i| {
            let seed = cfg.seed.wrapping_add(i);
            let inst = generate(seed, &cfg.gen, params)?;
            let mut rep = verify(params, &inst, &cfg.verify)?;
            rep.seed = Some(seed);
            Ok(rep)
        })
        .collect::<Result<Vec<_>>>()?;
    let id = |c: Option<DyadicCube>| c.map(|c| c.to_string()).unwrap_or_default();
    let rows = reports
        .iter()
        .map(|r| SweepRow {
            seed: r.seed.unwrap_or_default(),
            n: r.n,
            f: r.f,
            b: r.b,
            ratio: r.ratio,
            f_achiever: id(r.f_achiever),
            b_achiever: id(r.b_achiever),
        })
        .collect();
    Ok(Sweep { rows, reports })
}
