//! Principal cubes of `φ` with respect to `μ̃ = t² μ`.

use std::collections::{HashMap, VecDeque};

use serde::Serialize;

use crate::dyadic::{box_sums, BoxSums, DyadicCube};
use crate::error::{Error, Result};
use crate::model::{KernelParams, UpperHalfMeasure};

/// Growth factor of the stopping rule.
pub const GROWTH: f64 = 10.0;
/// Constant of the packing check.
pub const DEFAULT_CP: f64 = 16.0;

/// `α(J) = μ̃(Ĵ)^-1 ∫_Ĵ φ/t dμ̃` from box sums.
pub struct Averages {
    sums: BoxSums,
}

impl Averages {
    pub fn new(params: &KernelParams, mu: &UpperHalfMeasure, phi: &[f64]) -> Self {
        let psi: Vec<f64> = mu.atoms().iter().zip(phi).map(|(a, v)| v / a.t).collect();
        Averages {
            sums: box_sums(params, &mu.tilde(), &psi),
        }
    }

    /// `μ̃(Ĵ)`.
    pub fn mass(&self, params: &KernelParams, j: &DyadicCube) -> f64 {
        self.sums.mass[j.flat_id(params)]
    }

    pub fn alpha(&self, params: &KernelParams, j: &DyadicCube) -> Option<f64> {
        let id = j.flat_id(params);
        (self.sums.mass[id] > 0.0).then(|| self.sums.integral[id] / self.sums.mass[id])
    }
}

#[derive(Debug, Clone, Serialize)]
pub struct Principal {
    pub cube: DyadicCube,
    pub alpha: f64,
    pub mass: f64,
    /// Index of the selecting principal cube; `None` for the root.
    pub parent: Option<usize>,
}

#[derive(Debug, Clone, Serialize)]
pub struct PrincipalForest {
    pub root: DyadicCube,
    pub cubes: Vec<Principal>,
    /// `Σ_G α(G)² μ̃(Ĝ)`.
    pub packing_sum: f64,
    /// `‖φ‖²_{L²(μ)}`.
    pub phi_norm_sq: f64,
    pub constant: f64,
    pub packing_holds: bool,
    /// Cubes with `α(J) > μ̃(Ĵ)^{-1/2} ‖φ‖`; always empty by Cauchy-Schwarz.
    pub average_bound_violations: usize,
    #[serde(skip)]
    index: HashMap<DyadicCube, usize>,
}

impl PrincipalForest {
    pub fn contains(&self, c: &DyadicCube) -> bool {
        self.index.contains_key(c)
    }

    /// `π_𝒢(J)`: the smallest principal cube containing `J`.
    pub fn pi(&self, j: &DyadicCube) -> Option<DyadicCube> {
        if !j.is_within(&self.root) {
            return None;
        }
        let mut c = *j;
        loop {
            if self.index.contains_key(&c) {
                return Some(c);
            }
            c = c.parent()?;
        }
    }
}

/// Breadth-first construction from `root`: below each principal cube `G`, the
/// maximal cubes `J` with `α(J) ≥ 10 α(G)` become principal.
pub fn principal_cubes(
    params: &KernelParams,
    mu: &UpperHalfMeasure,
    phi: &[f64],
    root: DyadicCube,
    constant: f64,
) -> Result<PrincipalForest> {
    if phi.len() != mu.len() {
        return Err(Error::InvalidParams("phi must have one value per mu atom".into()));
    }
    if let Some(i) = phi.iter().position(|v| !(v.is_finite() && *v >= 0.0)) {
        return Err(Error::Domain(format!("phi must be nonnegative, got {} at atom {i}", phi[i])));
    }
    let av = Averages::new(params, mu, phi);
    let root_alpha = av
        .alpha(params, &root)
        .ok_or_else(|| Error::Domain(format!("root box over {root} carries no mu-tilde mass")))?;

    let mut cubes = vec![Principal {
        cube: root,
        alpha: root_alpha,
        mass: av.mass(params, &root),
        parent: None,
    }];
    let mut queue = VecDeque::from([0usize]);
    while let Some(g) = queue.pop_front() {
        let (gc, ga) = (cubes[g].cube, cubes[g].alpha);
        let mut stack: Vec<DyadicCube> = if gc.level < params.depth {
            gc.children().to_vec()
        } else {
            Vec::new()
        };
        while let Some(j) = stack.pop() {
            let Some(a) = av.alpha(params, &j) else {
                continue;
            };
            if a > 0.0 && a >= GROWTH * ga {
                cubes.push(Principal {
                    cube: j,
                    alpha: a,
                    mass: av.mass(params, &j),
                    parent: Some(g),
                });
                queue.push_back(cubes.len() - 1);
            } else if j.level < params.depth {
                stack.extend(j.children());
            }
        }
    }

    let phi_norm_sq: f64 = mu.atoms().iter().zip(phi).map(|(a, v)| v * v * a.weight).sum();
    let packing_sum: f64 = cubes.iter().map(|c| c.alpha * c.alpha * c.mass).sum();
    let phi_norm = phi_norm_sq.sqrt();
    let mut average_bound_violations = 0;
    let mut stack = vec![root];
    while let Some(j) = stack.pop() {
        if let Some(a) = av.alpha(params, &j) {
            if a > phi_norm / av.mass(params, &j).sqrt() * (1.0 + 1e-12) {
                average_bound_violations += 1;
            }
        }
        if j.level < params.depth {
            stack.extend(j.children());
        }
    }
    let index = cubes.iter().enumerate().map(|(i, c)| (c.cube, i)).collect();
    Ok(PrincipalForest {
        root,
        packing_holds: packing_sum <= constant * phi_norm_sq * (1.0 + 1e-12),
        cubes,
        packing_sum,
        phi_norm_sq,
        constant,
        average_bound_violations,
        index,
    })
}
