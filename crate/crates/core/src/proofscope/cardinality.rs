//! Counting the levels at which a cube stops.

use std::collections::{BTreeSet, HashMap};

use serde::Serialize;

use super::ladder::Ladder;
use super::principal::PrincipalForest;
use crate::dyadic::DyadicCube;
use crate::model::KernelParams;

#[derive(Debug, Clone, Serialize)]
pub struct CardinalityReport {
    pub delta: f64,
    /// `⌈1/δ⌉`.
    pub bound: usize,
    /// Largest number of `k` with `I ∈ 𝓘_k` and `σ(F_k(I)) ≥ δ σ(I)`, over all `I`.
    pub max_count: usize,
    pub worst_cube: Option<DyadicCube>,
    /// The flagged levels of each cube form a run of consecutive integers.
    pub consecutive: bool,
    pub holds: bool,
    /// Largest number of levels contributing to one principal cube; `None`
    /// when the ladder and the forest live on different ends.
    pub principal_max: Option<usize>,
    pub principal_worst: Option<DyadicCube>,
}

/// Same-level cubes whose union is `3I`: `I` and its neighbours, across the junction if needed.
pub fn neighbours(params: &KernelParams, c: &DyadicCube) -> Vec<DyadicCube> {
    let mut out = vec![*c];
    if c.index + 1 < (1u64 << c.level) {
        out.push(DyadicCube { index: c.index + 1, ..*c });
    }
    if c.index > 0 {
        out.push(DyadicCube { index: c.index - 1, ..*c });
    } else if let Some(o) = c.end.other() {
        out.push(DyadicCube { end: o, ..*c });
    }
    debug_assert!(c.level <= params.depth);
    out
}

pub fn cardinality_check(params: &KernelParams, ladder: &Ladder, forest: Option<&PrincipalForest>) -> CardinalityReport {
    let bound = (1.0 / ladder.delta - 1e-12).ceil() as usize;
    let mut per_cube: HashMap<DyadicCube, Vec<i32>> = HashMap::new();
    for s in ladder.stops.iter().filter(|s| s.flagged) {
        per_cube.entry(s.cube).or_default().push(s.k);
    }
    let mut max_count = 0;
    let mut worst_cube = None;
    let mut consecutive = true;
    let mut keys: Vec<_> = per_cube.keys().copied().collect();
    keys.sort();
    for c in keys {
        let ks = &per_cube[&c];
        if ks.len() > max_count {
            max_count = ks.len();
            worst_cube = Some(c);
        }
        let (lo, hi) = (ks.iter().min().unwrap(), ks.iter().max().unwrap());
        consecutive &= (hi - lo) as usize + 1 == ks.len();
    }

    let mut principal_max = None;
    let mut principal_worst = None;
    if let Some(f) = forest {
        if f.root.end == ladder.eval_end {
            let mut levels: HashMap<DyadicCube, BTreeSet<i32>> = HashMap::new();
            for s in ladder.stops.iter().filter(|s| s.flagged) {
                let Some(next) = ladder.levels.iter().find(|l| l.k == s.k + ladder.shift + 1) else {
                    continue;
                };
                for theta in neighbours(params, &s.cube) {
                    let Some(g_theta) = f.pi(&theta) else {
                        continue;
                    };
                    for j in next.whitney.iter().filter(|j| j.is_within(&theta)) {
                        if let Some(g) = f.pi(j) {
                            if g != g_theta {
                                levels.entry(g).or_default().insert(s.k);
                            }
                        }
                    }
                }
            }
            let mut best = 0;
            let mut keys: Vec<_> = levels.keys().copied().collect();
            keys.sort();
            for g in keys {
                if levels[&g].len() > best {
                    best = levels[&g].len();
                    principal_worst = Some(g);
                }
            }
            principal_max = Some(best);
        }
    }

    CardinalityReport {
        delta: ladder.delta,
        bound,
        max_count,
        worst_cube,
        consecutive,
        holds: max_count <= bound,
        principal_max,
        principal_worst,
    }
}
