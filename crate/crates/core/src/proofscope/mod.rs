//! Numerical checks of the level-set and stopping-time machinery.
//!
//! For a kernel piece and a nonnegative `φ` on the μ-atoms this builds the
//! superlevel sets `Ω_k` of the piece potential, their Whitney families and
//! stopping sets, checks the maximal principle on random configurations,
//! builds the principal cubes of `φ` and counts stopping levels.

pub mod cardinality;
pub mod ladder;
pub mod principal;
pub mod principle;

use serde::Serialize;

pub use cardinality::{cardinality_check, neighbours, CardinalityReport};
pub use ladder::{check_ladder, compatible, ladder, potential, Ladder, LadderReport};
pub use principal::{principal_cubes, Averages, PrincipalForest, DEFAULT_CP};
pub use principle::{maximal_principle_check, Configuration, PrincipleReport};

use crate::dyadic::DyadicCube;
use crate::error::Result;
use crate::io::Instance;
use crate::kernel::PieceId;
use crate::model::{EndTag, KernelParams};

pub const DEFAULT_DELTA: f64 = 0.25;
pub const DEFAULT_SAMPLES: usize = 10_000;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ProofscopeConfig {
    pub piece: PieceId,
    /// End split of `φ`; defaults to the end the piece requires, or the big end.
    pub split: Option<EndTag>,
    pub delta: f64,
    /// Overrides the piece's default level shift.
    pub shift: Option<i32>,
    pub samples: usize,
    pub seed: u64,
    pub packing_constant: f64,
}

impl Default for ProofscopeConfig {
    fn default() -> Self {
        ProofscopeConfig {
            piece: PieceId::P11,
            split: None,
            delta: DEFAULT_DELTA,
            shift: None,
            samples: DEFAULT_SAMPLES,
            seed: 0,
            packing_constant: DEFAULT_CP,
        }
    }
}

/// Root of the principal-cube forest for an end split.
pub fn forest_root(split: EndTag) -> DyadicCube {
    match split {
        EndTag::Small => DyadicCube::top(EndTag::Small),
        _ => DyadicCube::top(EndTag::Big),
    }
}

#[derive(Debug, Clone, Serialize)]
pub struct ProofReport {
    pub piece: String,
    pub split: EndTag,
    pub delta: f64,
    pub shift: i32,
    pub params: KernelParams,
    pub ladder: LadderReport,
    pub maximal_principle: PrincipleReport,
    /// Absent when `φ` vanishes on the root box.
    pub principal: Option<PrincipalForest>,
    pub cardinality: CardinalityReport,
    /// Every exact check passed.
    pub pass: bool,
    pub failed_checks: Vec<String>,
}

/// Runs every check for one instance and `φ`.
pub fn run(params: &KernelParams, inst: &Instance, phi: &[f64], cfg: &ProofscopeConfig) -> Result<ProofReport> {
    params.validate()?;
    let split = cfg.split.or(cfg.piece.y_end()).unwrap_or(EndTag::Big);
    let shift = cfg.shift.unwrap_or_else(|| cfg.piece.level_shift(params));
    let l = ladder(params, &inst.sigma, &inst.mu, phi, split, cfg.piece, shift, cfg.delta)?;
    let lr = check_ladder(&l);
    let mp = maximal_principle_check(params, cfg.piece, cfg.samples, cfg.seed);
    let phi_e = ladder::restrict_phi(&inst.mu, phi, split);
    let root = forest_root(split);
    let principal = principal_cubes(params, &inst.mu, &phi_e, root, cfg.packing_constant).ok();
    let card = cardinality_check(params, &l, principal.as_ref());

    let mut failed = Vec::new();
    let mut need = |ok: bool, name: &str| {
        if !ok {
            failed.push(name.to_string());
        }
    };
    need(lr.nested, "level sets nested");
    need(lr.stops_disjoint, "stopping sets disjoint");
    need(lr.telescoping_holds, "telescoping");
    need(lr.absorption_holds, "A-term absorption");
    need(mp.holds, "maximal principle");
    need(card.holds, "stopping count");
    if let Some(f) = &principal {
        need(f.packing_holds, "principal cube packing");
        need(f.average_bound_violations == 0, "average bound");
    }
    Ok(ProofReport {
        piece: cfg.piece.to_string(),
        split,
        delta: cfg.delta,
        shift,
        params: *params,
        ladder: lr,
        maximal_principle: mp,
        principal,
        cardinality: card,
        pass: failed.is_empty(),
        failed_checks: failed,
    })
}
