//! Randomised checks of the maximal principle `P(t,x,y) ≤ C P(t,z,y)`.
//!
//! Configurations: a dyadic cube `I`, `x ∈ I`, `z` with `ℓ(I) < d(z,x) < 3ℓ(I)`
//! and `(y,t)` outside the tripled box, meaning `y ∉ 3I` or `t > 3ℓ(I)`.

use rand::Rng;
use serde::Serialize;

use crate::dyadic::DyadicCube;
use crate::generate::{log_uniform, rng_for};
use crate::kernel::{piece, PieceId};
use crate::model::{distance, EndTag, KernelParams, Point};

/// One sampled configuration.
#[derive(Debug, Clone, Copy, Serialize)]
pub struct Configuration {
    pub cube: DyadicCube,
    pub x: Point,
    pub z: Point,
    pub y: Point,
    pub t: f64,
    /// `true` for `y ∉ 3I`, `false` for `y ∈ 3I` with `t > 3ℓ(I)`.
    pub far: bool,
    pub ratio: f64,
}

#[derive(Debug, Clone, Serialize)]
pub struct PrincipleReport {
    pub piece: String,
    pub constant: f64,
    pub shift: i32,
    pub requested: usize,
    pub checked: usize,
    pub far_branch: usize,
    pub tall_branch: usize,
    /// Draws rejected because `z` left the profile or the end of `x`.
    pub skipped: usize,
    pub max_ratio: f64,
    pub worst: Option<Configuration>,
    pub failures: Vec<Configuration>,
    pub holds: bool,
}

fn sample_cube(rng: &mut impl Rng, params: &KernelParams, end: EndTag, allow_first: bool) -> DyadicCube {
    loop {
        let level = rng.random_range(0..=params.depth);
        let index = rng.random_range(0..(1u64 << level));
        if allow_first || index >= 1 {
            return DyadicCube { end, level, index };
        }
    }
}

fn random_end(rng: &mut impl Rng) -> EndTag {
    if rng.random_bool(0.5) {
        EndTag::Big
    } else {
        EndTag::Small
    }
}

/// Draws one configuration for `id`, or `None` if `z` falls off the allowed set.
fn draw(rng: &mut impl Rng, params: &KernelParams, id: PieceId) -> Option<Configuration> {
    let unrestricted = id == PieceId::P11;
    let x_end = id.x_end().unwrap_or_else(|| random_end(rng));
    let cube = sample_cube(rng, params, x_end, unrestricted);
    let l = cube.length(params);
    let (lo, hi) = (cube.lo(params), cube.hi(params));
    let mut sx = lo + rng.random::<f64>() * (hi - lo);
    if sx <= 0.0 {
        sx = 0.5 * (lo + hi);
    }
    let x = Point::new(x_end, sx).ok()?;

    let dz = l * (1.0 + 2.0 * rng.random::<f64>());
    if !(dz > l && dz < 3.0 * l) {
        return None;
    }
    let sz = if rng.random_bool(0.5) { sx + dz } else { sx - dz };
    let z = if sz > params.extent {
        return None;
    } else if sz > 0.0 {
        Point::new(x_end, sz).ok()?
    } else if unrestricted && sz < 0.0 && -sz <= params.extent {
        Point::new(x_end.other()?, -sz).ok()?
    } else {
        return None;
    };

    let triple = cube.triple(params);
    let y_end = id.y_end().unwrap_or_else(|| random_end(rng));
    // With I away from the junction, 3I never meets the other end.
    let far = rng.random_bool(0.5) || y_end != x_end;
    // Rejection sampling inside the chosen branch.
    for _ in 0..64 {
        let sy = log_uniform(rng, params.cell_len() * 1e-3, params.extent);
        let y = Point::new(y_end, sy).ok()?;
        let inside = triple.contains(&y, params);
        if far && !inside {
            let t = log_uniform(rng, params.cell_len() * 1e-2, params.extent * 4.0);
            return Some(Configuration { cube, x, z, y, t, far, ratio: 0.0 });
        }
        if !far && inside {
            let t = 3.0 * l * log_uniform(rng, 1.0 + 1e-9, 1e3);
            return Some(Configuration { cube, x, z, y, t, far, ratio: 0.0 });
        }
    }
    None
}

/// Samples admissible configurations for `id` and checks the ratio bound.
pub fn maximal_principle_check(params: &KernelParams, id: PieceId, samples: usize, seed: u64) -> PrincipleReport {
    let constant = id.principle_constant(params);
    let mut rng = rng_for(seed);
    let mut rep = PrincipleReport {
        piece: id.to_string(),
        constant,
        shift: id.level_shift(params),
        requested: samples,
        checked: 0,
        far_branch: 0,
        tall_branch: 0,
        skipped: 0,
        max_ratio: 0.0,
        worst: None,
        failures: Vec::new(),
        holds: true,
    };
    let mut attempts = 0usize;
    while rep.checked < samples && attempts < samples * 100 {
        attempts += 1;
        let Some(mut cfg) = draw(&mut rng, params, id) else {
            rep.skipped += 1;
            continue;
        };
        debug_assert!(distance(&cfg.x, &cfg.z) > cfg.cube.length(params));
        let (Ok(px), Ok(pz)) = (piece(params, id, cfg.t, &cfg.x, &cfg.y), piece(params, id, cfg.t, &cfg.z, &cfg.y)) else {
            rep.skipped += 1;
            continue;
        };
        cfg.ratio = px / pz;
        rep.checked += 1;
        if cfg.far {
            rep.far_branch += 1;
        } else {
            rep.tall_branch += 1;
        }
        if cfg.ratio > rep.max_ratio {
            rep.max_ratio = cfg.ratio;
            rep.worst = Some(cfg);
        }
        if !(cfg.ratio <= constant) {
            rep.holds = false;
            if rep.failures.len() < 16 {
                rep.failures.push(cfg);
            }
        }
    }
    rep
}
