//! Seeded random instances.
//!
//! Positions, heights and weights are log-uniform so that every instance
//! mixes scales from one finest cell up to the full profile extent.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::io::Instance;
use crate::model::{
    DiscreteMeasure, EndTag, KernelParams, MuAtom, Point, SigmaAtom, UpperHalfMeasure,
};

/// Relative frequencies of the three end tags.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct EndMix {
    pub big: f64,
    pub small: f64,
    pub junction: f64,
}

impl Default for EndMix {
    fn default() -> Self {
        EndMix {
            big: 0.45,
            small: 0.45,
            junction: 0.1,
        }
    }
}

impl EndMix {
    fn sample(&self, rng: &mut impl Rng) -> EndTag {
        let total = self.big + self.small + self.junction;
        let u = rng.random::<f64>() * total;
        if u < self.big {
            EndTag::Big
        } else if u < self.big + self.small {
            EndTag::Small
        } else {
            EndTag::Junction
        }
    }
}

/// Generator settings.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct GenConfig {
    pub sigma_atoms: usize,
    pub mu_atoms: usize,
    pub mix: EndMix,
    /// Weights are drawn log-uniformly from `[1/weight_span, weight_span]`.
    pub weight_span: f64,
}

impl GenConfig {
    pub fn new(sigma_atoms: usize, mu_atoms: usize) -> Self {
        GenConfig {
            sigma_atoms,
            mu_atoms,
            mix: EndMix::default(),
            weight_span: 1e3,
        }
    }
}

/// Deterministic RNG for a seed.
pub fn rng_for(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

/// Log-uniform draw on `[lo, hi]`.
pub fn log_uniform(rng: &mut impl Rng, lo: f64, hi: f64) -> f64 {
    (lo.ln() + rng.random::<f64>() * (hi.ln() - lo.ln())).exp()
}

fn random_point(rng: &mut impl Rng, params: &KernelParams, mix: &EndMix) -> Point {
    match mix.sample(rng) {
        EndTag::Junction => Point::junction(),
        end => {
            let s = log_uniform(rng, params.cell_len(), params.extent);
            Point::new(end, s).expect("positive coordinate")
        }
    }
}

/// Draws a raw (unsnapped) instance. The same seed always yields the same instance.
pub fn generate_raw(seed: u64, config: &GenConfig, params: &KernelParams) -> Result<Instance> {
    if config.sigma_atoms == 0 || config.mu_atoms == 0 {
        return Err(Error::InvalidParams("atom counts must be at least 1".into()));
    }
    params.validate()?;
    let mut rng = rng_for(seed);
    let (wlo, whi) = (1.0 / config.weight_span, config.weight_span);
    let mut sigma: Vec<SigmaAtom> = Vec::with_capacity(config.sigma_atoms);
    while sigma.len() < config.sigma_atoms {
        let point = random_point(&mut rng, params, &config.mix);
        let weight = log_uniform(&mut rng, wlo, whi);
        if let Some(a) = sigma.iter_mut().find(|a| a.point == point) {
            a.weight += weight;
            continue;
        }
        sigma.push(SigmaAtom { point, weight });
    }
    let mut mu: Vec<MuAtom> = Vec::with_capacity(config.mu_atoms);
    while mu.len() < config.mu_atoms {
        let point = random_point(&mut rng, params, &config.mix);
        let t = log_uniform(&mut rng, params.cell_len(), params.extent);
        let weight = log_uniform(&mut rng, wlo, whi);
        mu.push(MuAtom { point, t, weight });
    }
    Ok(Instance::new(
        DiscreteMeasure::new(sigma)?,
        UpperHalfMeasure::new(mu)?,
    ))
}

/// Draws an instance and snaps it to the finest dyadic grid.
pub fn generate(seed: u64, config: &GenConfig, params: &KernelParams) -> Result<Instance> {
    Ok(generate_raw(seed, config, params)?.snapped(params).0)
}
