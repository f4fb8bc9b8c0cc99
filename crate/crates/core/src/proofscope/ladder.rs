//! Level sets of a piece potential, their Whitney families and the stopping sets.

use rayon::prelude::*;
use serde::Serialize;

use crate::dyadic::{whitney, DyadicCube, OpenSet};
use crate::error::{Error, Result};
use crate::kernel::{piece, PieceId};
use crate::model::{DiscreteMeasure, EndTag, KernelParams, Point, UpperHalfMeasure};

/// Whether a piece may act on the part of `φ` supported over `split`.
pub fn compatible(piece: PieceId, split: EndTag) -> bool {
    piece.y_end().is_none_or(|e| e == split)
}

/// `φ` restricted to μ-atoms over `split`.
pub fn restrict_phi(mu: &UpperHalfMeasure, phi: &[f64], split: EndTag) -> Vec<f64> {
    mu.atoms()
        .iter()
        .zip(phi)
        .map(|(a, &v)| if a.point.end == split { v } else { 0.0 })
        .collect()
}

/// One stopping record `(k, I)` with `I` in the Whitney family of `Ω_k`.
#[derive(Debug, Clone, Serialize)]
pub struct Stop {
    pub k: i32,
    pub cube: DyadicCube,
    /// `σ(I)`.
    pub sigma_cube: f64,
    /// `σ(F_k(I))` with `F_k(I) = I ∩ (Ω_{k+ℓ} \ Ω_{k+ℓ+1})`.
    pub sigma_stop: f64,
    /// `σ(F_k(I)) ≥ δ σ(I)` on a cube of positive mass.
    pub flagged: bool,
    /// Finest cells of `F_k(I)`.
    #[serde(skip)]
    pub cells: Vec<usize>,
}

#[derive(Debug, Clone, Serialize)]
pub struct Level {
    pub k: i32,
    pub omega_cells: usize,
    pub whitney: Vec<DyadicCube>,
    pub degenerate: bool,
}

/// The full level-set construction for one piece and one end split.
#[derive(Debug, Clone, Serialize)]
pub struct Ladder {
    pub piece: PieceId,
    pub split: EndTag,
    pub eval_end: EndTag,
    pub shift: i32,
    pub delta: f64,
    /// Potential at the midpoint of every finest cell of `eval_end`.
    #[serde(skip)]
    pub values: Vec<f64>,
    pub k_min: i32,
    pub k_max: i32,
    pub levels: Vec<Level>,
    pub stops: Vec<Stop>,
    /// σ-atoms on `eval_end` as `(cell, weight)`.
    #[serde(skip)]
    pub sigma_cells: Vec<(usize, f64)>,
}

/// `P*_{μ,i,j}(φ)` at the midpoint of every finest cell on the piece's σ-end.
pub fn potential(params: &KernelParams, mu: &UpperHalfMeasure, phi: &[f64], id: PieceId) -> Vec<f64> {
    let end = id.sigma_end();
    (0..params.cells())
        .into_par_iter()
        .map(|c| {
            let x = Point::new(end, params.cell_mid(c)).expect("cell midpoints are positive");
            mu.atoms()
                .iter()
                .zip(phi)
                .filter(|(_, &v)| v != 0.0)
                .map(|(a, &v)| piece(params, id, a.t, &x, &a.point).map(|p| p * v * a.weight))
                .sum::<Result<f64>>()
        })
        .collect::<Result<Vec<_>>>()
        .expect("phi is supported where the piece is defined")
}

impl Ladder {
    /// `Ω_k` on the evaluation end as a cell mask.
    pub fn omega_mask(&self, k: i32) -> Vec<bool> {
        let thr = 2f64.powi(k);
        self.values.iter().map(|&v| v > thr).collect()
    }

    pub fn omega(&self, k: i32) -> OpenSet {
        let mask = self.omega_mask(k);
        let none = vec![false; mask.len()];
        match self.eval_end {
            EndTag::Small => OpenSet::from_cells(none, mask),
            _ => OpenSet::from_cells(mask, none),
        }
        .expect("matching lengths")
    }

    /// `σ` of a set of cells on the evaluation end.
    pub fn sigma_of(&self, mask: &[bool]) -> f64 {
        self.sigma_cells.iter().filter(|(c, _)| mask[*c]).map(|(_, w)| w).sum()
    }

    /// `∫ (P*φ)² dσ` over the evaluation end.
    pub fn energy(&self) -> f64 {
        self.sigma_cells.iter().map(|&(c, w)| self.values[c].powi(2) * w).sum()
    }

    pub fn stops_at(&self, k: i32) -> impl Iterator<Item = &Stop> {
        self.stops.iter().filter(move |s| s.k == k)
    }
}

/// Builds `Ω_k`, the Whitney families `𝓘_k` and every `F_k(I)`.
///
/// The range of `k` covers every level on which some `F_k(I)` can be nonempty.
pub fn ladder(
    params: &KernelParams,
    sigma: &DiscreteMeasure,
    mu: &UpperHalfMeasure,
    phi: &[f64],
    split: EndTag,
    id: PieceId,
    shift: i32,
    delta: f64,
) -> Result<Ladder> {
    if phi.len() != mu.len() {
        return Err(Error::InvalidParams(format!(
            "phi has {} values for {} mu atoms",
            phi.len(),
            mu.len()
        )));
    }
    if let Some(i) = phi.iter().position(|v| !(v.is_finite() && *v >= 0.0)) {
        return Err(Error::Domain(format!("phi must be nonnegative, got {} at atom {i}", phi[i])));
    }
    if !(delta > 0.0 && delta <= 1.0) {
        return Err(Error::InvalidParams(format!("delta must lie in (0, 1], got {delta}")));
    }
    if !compatible(id, split) {
        return Err(Error::InvalidParams(format!("piece ({id}) does not act on the {split} split")));
    }
    let phi_e = restrict_phi(mu, phi, split);
    let eval_end = id.sigma_end();
    let values = potential(params, mu, &phi_e, id);
    let sigma_cells: Vec<(usize, f64)> = sigma
        .atoms()
        .iter()
        .filter(|a| a.point.end == eval_end)
        .map(|a| (params.cell_of(a.point.s), a.weight))
        .collect();

    let mut out = Ladder {
        piece: id,
        split,
        eval_end,
        shift,
        delta,
        values,
        k_min: 0,
        k_max: -1,
        levels: Vec::new(),
        stops: Vec::new(),
        sigma_cells,
    };
    let max = out.values.iter().copied().fold(0.0f64, f64::max);
    let min = out.values.iter().copied().filter(|v| *v > 0.0).fold(f64::INFINITY, f64::min);
    if !(max > 0.0) {
        return Ok(out);
    }
    // Ω_k is nonempty iff 2^k < max, and is every positive cell once 2^k < min.
    out.k_max = max.log2().ceil() as i32 - 1;
    out.k_min = min.log2().floor() as i32 - shift - 1;

    let built: Vec<(Level, Vec<Stop>)> = (out.k_min..=out.k_max)
        .into_par_iter()
        .map(|k| {
            let omega = out.omega(k);
            let fam = whitney(params, &omega);
            let upper = out.omega_mask(k + shift);
            let next = out.omega_mask(k + shift + 1);
            let stops = fam
                .members
                .iter()
                .map(|&cube| {
                    let a = cube.first_cell(params);
                    let cells: Vec<usize> = (a..a + cube.cell_span(params))
                        .filter(|&c| upper[c] && !next[c])
                        .collect();
                    let in_cube = |c: usize| c >= a && c < a + cube.cell_span(params);
                    let sigma_cube: f64 = out
                        .sigma_cells
                        .iter()
                        .filter(|(c, _)| in_cube(*c))
                        .map(|(_, w)| w)
                        .sum();
                    let sigma_stop: f64 = out
                        .sigma_cells
                        .iter()
                        .filter(|(c, _)| in_cube(*c) && upper[*c] && !next[*c])
                        .map(|(_, w)| w)
                        .sum();
                    Stop {
                        k,
                        cube,
                        sigma_cube,
                        sigma_stop,
                        flagged: sigma_cube > 0.0 && sigma_stop >= delta * sigma_cube,
                        cells,
                    }
                })
                .collect();
            let level = Level {
                k,
                omega_cells: omega.count(eval_end),
                whitney: fam.members,
                degenerate: fam.degenerate,
            };
            (level, stops)
        })
        .collect();
    for (level, stops) in built {
        out.levels.push(level);
        out.stops.extend(stops);
    }
    Ok(out)
}

/// Exact structural checks on a ladder.
#[derive(Debug, Clone, Serialize)]
pub struct LadderReport {
    pub piece: String,
    pub split: EndTag,
    pub shift: i32,
    pub delta: f64,
    pub k_min: i32,
    pub k_max: i32,
    pub whitney_cubes: usize,
    pub degenerate_levels: usize,
    /// `Ω_{k+1} ⊆ Ω_k` for every `k`.
    pub nested: bool,
    /// `F_k(I) ⊆ I`, pairwise disjoint in `k` for each `I`.
    pub stops_disjoint: bool,
    /// `∫ (P*φ)² dσ`.
    pub energy: f64,
    /// `Σ_k 4^k σ(Ω_k \ Ω_{k+1})`.
    pub ladder_sum: f64,
    /// `ladder_sum ≤ energy ≤ 4 ladder_sum`.
    pub telescoping_holds: bool,
    /// `Σ_k 4^k Σ_{I ∈ 𝓘_k} σ(F_k(I))`, split into the unflagged part `A` and the flagged part `B`.
    pub a_term: f64,
    pub b_term: f64,
    /// `Σ_k 4^k σ(Ω_{k+ℓ} \ Ω_{k+ℓ+1})`; equals `a_term + b_term` up to cells no Whitney cube covers.
    pub shifted_sum: f64,
    /// `δ Σ_k 4^k σ(Ω_k)`.
    pub absorption_bound: f64,
    /// `a_term ≤ absorption_bound`.
    pub absorption_holds: bool,
}

const SLACK: f64 = 1e-12;

pub fn check_ladder(l: &Ladder) -> LadderReport {
    let mut nested = true;
    let mut ladder_sum = 0.0;
    let mut shifted_sum = 0.0;
    let mut absorption_rhs = 0.0;
    let ks = l.k_min..=l.k_max;
    for k in ks.clone() {
        let cur = l.omega_mask(k);
        let nxt = l.omega_mask(k + 1);
        nested &= nxt.iter().zip(&cur).all(|(a, b)| !a || *b);
        let band: Vec<bool> = cur.iter().zip(&nxt).map(|(a, b)| *a && !b).collect();
        let w = 4f64.powi(k);
        ladder_sum += w * l.sigma_of(&band);
        absorption_rhs += w * l.sigma_of(&cur);
        let up = l.omega_mask(k + l.shift);
        let up1 = l.omega_mask(k + l.shift + 1);
        let band: Vec<bool> = up.iter().zip(&up1).map(|(a, b)| *a && !b).collect();
        shifted_sum += w * l.sigma_of(&band);
    }
    // Levels below k_min carry no σ mass in their bands.
    let mut a_term = 0.0;
    let mut b_term = 0.0;
    let mut stops_disjoint = true;
    let mut seen: std::collections::HashMap<DyadicCube, Vec<usize>> = Default::default();
    for s in &l.stops {
        let w = 4f64.powi(s.k) * s.sigma_stop;
        if s.flagged {
            b_term += w;
        } else {
            a_term += w;
        }
        let cells = seen.entry(s.cube).or_default();
        for &c in &s.cells {
            if cells.contains(&c) {
                stops_disjoint = false;
            }
            cells.push(c);
        }
    }
    let energy = l.energy();
    let absorption_bound = l.delta * absorption_rhs;
    LadderReport {
        piece: l.piece.to_string(),
        split: l.split,
        shift: l.shift,
        delta: l.delta,
        k_min: l.k_min,
        k_max: l.k_max,
        whitney_cubes: l.levels.iter().map(|v| v.whitney.len()).sum(),
        degenerate_levels: l.levels.iter().filter(|v| v.degenerate).count(),
        nested,
        stops_disjoint,
        energy,
        ladder_sum,
        telescoping_holds: ladder_sum <= energy * (1.0 + SLACK) && energy <= 4.0 * ladder_sum * (1.0 + SLACK),
        a_term,
        b_term,
        shifted_sum,
        absorption_bound,
        absorption_holds: a_term <= absorption_bound * (1.0 + SLACK),
    }
}
