//! Two-ended profile model of the connected sum of `R^m` and `R^n x S^(m-n)`.
//!
//! Each end is the ray `[0, S]` measured by distance to the compact core,
//! and the core collapses to a single junction point. Distances between
//! points on different ends pass through the junction.

use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Which part of the manifold a point lives on.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum EndTag {
    /// The `R^m` end.
    #[serde(alias = "m")]
    Big,
    /// The `R^n x S^(m-n)` end.
    #[serde(alias = "n")]
    Small,
    /// The collapsed core `K`.
    #[serde(alias = "k")]
    Junction,
}

impl EndTag {
    pub const ALL: [EndTag; 3] = [EndTag::Big, EndTag::Small, EndTag::Junction];

    /// The opposite end; the junction has none.
    pub fn other(self) -> Option<EndTag> {
        match self {
            EndTag::Big => Some(EndTag::Small),
            EndTag::Small => Some(EndTag::Big),
            EndTag::Junction => None,
        }
    }

    pub fn as_str(self) -> &'static str {
        match self {
            EndTag::Big => "big",
            EndTag::Small => "small",
            EndTag::Junction => "junction",
        }
    }
}

impl fmt::Display for EndTag {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for EndTag {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.trim().to_ascii_lowercase().as_str() {
            "big" | "m" => Ok(EndTag::Big),
            "small" | "n" => Ok(EndTag::Small),
            "junction" | "k" => Ok(EndTag::Junction),
            other => Err(Error::Parse {
                context: "end tag".into(),
                reason: format!("unknown end `{other}` (expected big, small or junction)"),
            }),
        }
    }
}

/// Dimensions and discretisation of the model.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct KernelParams {
    /// Dimension of the big end.
    pub m: u32,
    /// Dimension of the small end.
    pub n: u32,
    /// Profile extent of each end; a power of two so the top dyadic cube is `[0, S)`.
    #[serde(rename = "S")]
    pub extent: f64,
    /// Dyadic depth: cubes exist at levels `0..=L`.
    #[serde(rename = "L")]
    pub depth: u32,
}

impl Default for KernelParams {
    fn default() -> Self {
        KernelParams {
            m: 4,
            n: 3,
            extent: 8.0,
            depth: 6,
        }
    }
}

/// Largest supported dyadic depth. Enumerations are exhaustive, so this keeps them desk-sized.
pub const MAX_DEPTH: u32 = 20;

impl KernelParams {
    pub fn new(m: u32, n: u32, extent: f64, depth: u32) -> Result<Self> {
        let p = KernelParams {
            m,
            n,
            extent,
            depth,
        };
        p.validate()?;
        Ok(p)
    }

    pub fn validate(&self) -> Result<()> {
        if self.n < 3 || self.m <= self.n {
            return Err(Error::InvalidParams(format!(
                "need m > n >= 3, got m = {}, n = {}",
                self.m, self.n
            )));
        }
        if !(self.extent.is_finite() && self.extent >= 1.0) {
            return Err(Error::InvalidParams(format!(
                "S must be a power of two >= 1, got {}",
                self.extent
            )));
        }
        let q = self.extent.log2();
        if q.fract() != 0.0 {
            return Err(Error::InvalidParams(format!(
                "S must be a power of two, got {}",
                self.extent
            )));
        }
        if self.depth == 0 || self.depth > MAX_DEPTH {
            return Err(Error::InvalidParams(format!(
                "L must lie in 1..={MAX_DEPTH}, got {}",
                self.depth
            )));
        }
        Ok(())
    }

    /// Number of finest-level cells on one end.
    pub fn cells(&self) -> usize {
        1usize << self.depth
    }

    /// Side length of a finest-level cell, `S 2^-L`.
    pub fn cell_len(&self) -> f64 {
        self.extent / self.cells() as f64
    }

    /// Finest cell holding profile coordinate `s`; `s = S` belongs to the last cell.
    pub fn cell_of(&self, s: f64) -> usize {
        let c = (s / self.cell_len()).floor();
        if c <= 0.0 {
            0
        } else {
            (c as usize).min(self.cells() - 1)
        }
    }

    /// Midpoint of finest cell `c`.
    pub fn cell_mid(&self, c: usize) -> f64 {
        (c as f64 + 0.5) * self.cell_len()
    }
}

/// A location on the model manifold.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Point {
    pub end: EndTag,
    /// Distance to the junction. Always `0` for the junction itself.
    #[serde(default)]
    pub s: f64,
}

impl Point {
    /// Builds a point, folding `s = 0` on either end into the junction.
    pub fn new(end: EndTag, s: f64) -> Result<Self> {
        if !s.is_finite() || s < 0.0 {
            return Err(Error::Domain(format!("profile coordinate must be finite and >= 0, got {s}")));
        }
        if end == EndTag::Junction || s == 0.0 {
            return Ok(Point::junction());
        }
        Ok(Point { end, s })
    }

    pub fn big(s: f64) -> Self {
        Point::new(EndTag::Big, s).expect("valid big-end coordinate")
    }

    pub fn small(s: f64) -> Self {
        Point::new(EndTag::Small, s).expect("valid small-end coordinate")
    }

    pub fn junction() -> Self {
        Point {
            end: EndTag::Junction,
            s: 0.0,
        }
    }

    pub fn is_junction(&self) -> bool {
        self.end == EndTag::Junction
    }

    /// Profile coordinate of this point when viewed from `end`'s dyadic system.
    ///
    /// The junction is the point `s = 0` of the big end's system; it does not
    /// belong to the small end's cubes.
    pub fn coordinate_on(&self, end: EndTag) -> Option<f64> {
        match (self.end, end) {
            (EndTag::Junction, EndTag::Big) => Some(0.0),
            (a, b) if a == b && a != EndTag::Junction => Some(self.s),
            _ => None,
        }
    }
}

impl fmt::Display for Point {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self.end {
            EndTag::Junction => f.write_str("junction"),
            end => write!(f, "{end}:{}", self.s),
        }
    }
}

impl FromStr for Point {
    type Err = Error;

    /// Parses `big:1.5`, `small:0.5` or `junction`.
    fn from_str(text: &str) -> Result<Self> {
        let text = text.trim();
        let (end, s) = match text.split_once(':') {
            Some((end, s)) => {
                let s: f64 = s.trim().parse().map_err(|e| Error::Parse {
                    context: format!("point `{text}`"),
                    reason: format!("{e}"),
                })?;
                (end.parse::<EndTag>()?, s)
            }
            None => (text.parse::<EndTag>()?, 0.0),
        };
        if end != EndTag::Junction && s == 0.0 && !text.contains(':') {
            return Err(Error::Parse {
                context: format!("point `{text}`"),
                reason: "missing profile coordinate (expected end:s)".into(),
            });
        }
        Point::new(end, s)
    }
}

/// Geodesic distance in the profile model.
pub fn distance(p: &Point, q: &Point) -> f64 {
    match (p.end, q.end) {
        (EndTag::Junction, _) => q.s,
        (_, EndTag::Junction) => p.s,
        (a, b) if a == b => (p.s - q.s).abs(),
        _ => p.s + q.s,
    }
}

/// `|x| = 1 + d(x, K)`; never below one.
pub fn norm_of(p: &Point) -> f64 {
    1.0 + distance(p, &Point::junction())
}

/// Model volume of the ball `B(p, r)`.
///
/// Small radii see the full dimension `m`; large balls that stay inside the
/// small end grow like `r^n`; every other large ball reaches the big end and
/// grows like `r^m`.
pub fn ball_volume(p: &Point, r: f64, params: &KernelParams) -> f64 {
    if r <= 1.0 {
        return r.powi(params.m as i32);
    }
    if p.end == EndTag::Small && r <= p.s {
        r.powi(params.n as i32)
    } else {
        r.powi(params.m as i32)
    }
}

/// One atom of a measure on `M`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SigmaAtom {
    pub point: Point,
    pub weight: f64,
}

/// One atom of a measure on `M x (0, inf)`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct MuAtom {
    pub point: Point,
    pub t: f64,
    pub weight: f64,
}

/// Finite atomic measure on `M`.
#[derive(Debug, Clone, PartialEq, Default)]
pub struct DiscreteMeasure {
    atoms: Vec<SigmaAtom>,
}

/// Finite atomic measure on the upper half space `M x (0, inf)`.
#[derive(Debug, Clone, PartialEq, Default)]
pub struct UpperHalfMeasure {
    atoms: Vec<MuAtom>,
}

fn check_weight(which: &'static str, index: usize, w: f64) -> Result<()> {
    if !(w.is_finite() && w > 0.0) {
        return Err(Error::InvalidAtom {
            which,
            index,
            reason: format!("weight must be finite and > 0, got {w}"),
        });
    }
    Ok(())
}

fn check_point(which: &'static str, index: usize, p: &Point) -> Result<()> {
    let ok = match p.end {
        EndTag::Junction => p.s == 0.0,
        _ => p.s.is_finite() && p.s > 0.0,
    };
    if !ok {
        return Err(Error::InvalidAtom {
            which,
            index,
            reason: format!("invalid point {p}"),
        });
    }
    Ok(())
}

/// Statistics from snapping atoms onto the finest dyadic grid.
#[derive(Debug, Clone, Copy, Default, PartialEq, Serialize)]
pub struct SnapStats {
    /// Atoms whose profile coordinate changed.
    pub moved: usize,
    /// Atoms folded into an earlier atom at the same location.
    pub merged: usize,
    /// Largest coordinate displacement.
    pub max_shift: f64,
}

fn snap_point(p: &Point, params: &KernelParams) -> Point {
    match p.end {
        EndTag::Junction => *p,
        end => Point {
            end,
            s: params.cell_mid(params.cell_of(p.s)),
        },
    }
}

impl DiscreteMeasure {
    pub fn new(atoms: Vec<SigmaAtom>) -> Result<Self> {
        for (i, a) in atoms.iter().enumerate() {
            check_point("sigma", i, &a.point)?;
            check_weight("sigma", i, a.weight)?;
            if atoms[..i].iter().any(|b| b.point == a.point) {
                return Err(Error::InvalidAtom {
                    which: "sigma",
                    index: i,
                    reason: format!("duplicate location {}", a.point),
                });
            }
        }
        Ok(DiscreteMeasure { atoms })
    }

    /// Single atom of mass `weight` at `point`.
    pub fn dirac(point: Point, weight: f64) -> Result<Self> {
        DiscreteMeasure::new(vec![SigmaAtom { point, weight }])
    }

    pub fn atoms(&self) -> &[SigmaAtom] {
        &self.atoms
    }

    pub fn len(&self) -> usize {
        self.atoms.len()
    }

    pub fn is_empty(&self) -> bool {
        self.atoms.is_empty()
    }

    pub fn weights(&self) -> Vec<f64> {
        self.atoms.iter().map(|a| a.weight).collect()
    }

    pub fn total_mass(&self) -> f64 {
        self.atoms.iter().map(|a| a.weight).sum()
    }

    /// Keeps exactly the atoms tagged `end`.
    pub fn restrict(&self, end: EndTag) -> Self {
        DiscreteMeasure {
            atoms: self.atoms.iter().filter(|a| a.point.end == end).copied().collect(),
        }
    }

    /// Multiplies every weight by `c > 0`.
    pub fn scaled(&self, c: f64) -> Self {
        DiscreteMeasure {
            atoms: self
                .atoms
                .iter()
                .map(|a| SigmaAtom {
                    weight: a.weight * c,
                    ..*a
                })
                .collect(),
        }
    }

    /// Moves every end atom to the midpoint of its finest cell, merging collisions.
    pub fn snapped(&self, params: &KernelParams) -> (Self, SnapStats) {
        let mut stats = SnapStats::default();
        let mut out: Vec<SigmaAtom> = Vec::with_capacity(self.atoms.len());
        for a in &self.atoms {
            let p = snap_point(&a.point, params);
            let shift = (p.s - a.point.s).abs();
            if shift > 0.0 {
                stats.moved += 1;
                stats.max_shift = stats.max_shift.max(shift);
            }
            match out.iter_mut().find(|b| b.point == p) {
                Some(b) => {
                    b.weight += a.weight;
                    stats.merged += 1;
                }
                None => out.push(SigmaAtom {
                    point: p,
                    weight: a.weight,
                }),
            }
        }
        (DiscreteMeasure { atoms: out }, stats)
    }
}

impl UpperHalfMeasure {
    pub fn new(atoms: Vec<MuAtom>) -> Result<Self> {
        for (i, a) in atoms.iter().enumerate() {
            check_point("mu", i, &a.point)?;
            check_weight("mu", i, a.weight)?;
            if !(a.t.is_finite() && a.t > 0.0) {
                return Err(Error::InvalidAtom {
                    which: "mu",
                    index: i,
                    reason: format!("t must be finite and > 0, got {}", a.t),
                });
            }
            if atoms[..i].iter().any(|b| b.point == a.point && b.t == a.t) {
                return Err(Error::InvalidAtom {
                    which: "mu",
                    index: i,
                    reason: format!("duplicate location ({}, t = {})", a.point, a.t),
                });
            }
        }
        Ok(UpperHalfMeasure { atoms })
    }

    pub fn dirac(point: Point, t: f64, weight: f64) -> Result<Self> {
        UpperHalfMeasure::new(vec![MuAtom { point, t, weight }])
    }

    pub fn atoms(&self) -> &[MuAtom] {
        &self.atoms
    }

    pub fn len(&self) -> usize {
        self.atoms.len()
    }

    pub fn is_empty(&self) -> bool {
        self.atoms.is_empty()
    }

    pub fn weights(&self) -> Vec<f64> {
        self.atoms.iter().map(|a| a.weight).collect()
    }

    pub fn total_mass(&self) -> f64 {
        self.atoms.iter().map(|a| a.weight).sum()
    }

    pub fn restrict(&self, end: EndTag) -> Self {
        UpperHalfMeasure {
            atoms: self.atoms.iter().filter(|a| a.point.end == end).copied().collect(),
        }
    }

    pub fn scaled(&self, c: f64) -> Self {
        UpperHalfMeasure {
            atoms: self
                .atoms
                .iter()
                .map(|a| MuAtom {
                    weight: a.weight * c,
                    ..*a
                })
                .collect(),
        }
    }

    /// The measure `t^2 dmu`, atom for atom.
    pub fn tilde(&self) -> Self {
        UpperHalfMeasure {
            atoms: self
                .atoms
                .iter()
                .map(|a| MuAtom {
                    weight: a.weight * a.t * a.t,
                    ..*a
                })
                .collect(),
        }
    }

    pub fn snapped(&self, params: &KernelParams) -> (Self, SnapStats) {
        let mut stats = SnapStats::default();
        let mut out: Vec<MuAtom> = Vec::with_capacity(self.atoms.len());
        for a in &self.atoms {
            let p = snap_point(&a.point, params);
            let shift = (p.s - a.point.s).abs();
            if shift > 0.0 {
                stats.moved += 1;
                stats.max_shift = stats.max_shift.max(shift);
            }
            match out.iter_mut().find(|b| b.point == p && b.t == a.t) {
                Some(b) => {
                    b.weight += a.weight;
                    stats.merged += 1;
                }
                None => out.push(MuAtom { point: p, ..*a }),
            }
        }
        (UpperHalfMeasure { atoms: out }, stats)
    }
}
