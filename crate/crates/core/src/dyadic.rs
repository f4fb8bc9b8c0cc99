//! Dyadic intervals on each end, their dilations, Carleson boxes, Whitney
//! decompositions and the dyadic maximal function.
//!
//! Every end carries its own dyadic system `[j S 2^-k, (j+1) S 2^-k)`. The
//! junction is the point `s = 0` of the big end's system, so boxes from the
//! two systems are always nested or disjoint. Dilations are metric: on the
//! far side they are clipped at `S`, and near the junction they spill over
//! onto the other end.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::model::{EndTag, KernelParams, MuAtom, Point, UpperHalfMeasure};

/// Dyadic interval `[index ℓ, (index+1) ℓ)` with `ℓ = S 2^-level` on one end.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub struct DyadicCube {
    pub end: EndTag,
    pub level: u32,
    pub index: u64,
}

impl std::fmt::Display for DyadicCube {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        write!(f, "{}/{}/{}", self.end, self.level, self.index)
    }
}

impl DyadicCube {
    pub fn new(end: EndTag, level: u32, index: u64) -> Result<Self> {
        if end == EndTag::Junction {
            return Err(Error::Domain("the junction carries no dyadic cubes".into()));
        }
        if level >= 64 || index >= (1u64 << level) {
            return Err(Error::Domain(format!("index {index} out of range at level {level}")));
        }
        Ok(DyadicCube { end, level, index })
    }

    pub fn top(end: EndTag) -> Self {
        DyadicCube {
            end,
            level: 0,
            index: 0,
        }
    }

    /// Side length `ℓ(I)`.
    pub fn length(&self, params: &KernelParams) -> f64 {
        params.extent / (1u64 << self.level) as f64
    }

    pub fn lo(&self, params: &KernelParams) -> f64 {
        self.index as f64 * self.length(params)
    }

    pub fn hi(&self, params: &KernelParams) -> f64 {
        (self.index + 1) as f64 * self.length(params)
    }

    pub fn center(&self, params: &KernelParams) -> f64 {
        (self.index as f64 + 0.5) * self.length(params)
    }

    /// Width in finest cells.
    pub fn cell_span(&self, params: &KernelParams) -> usize {
        1usize << (params.depth - self.level)
    }

    /// First finest cell covered.
    pub fn first_cell(&self, params: &KernelParams) -> usize {
        (self.index as usize) << (params.depth - self.level)
    }

    pub fn parent(&self) -> Option<Self> {
        (self.level > 0).then(|| DyadicCube {
            end: self.end,
            level: self.level - 1,
            index: self.index / 2,
        })
    }

    pub fn children(&self) -> [Self; 2] {
        let c = |k| DyadicCube {
            end: self.end,
            level: self.level + 1,
            index: 2 * self.index + k,
        };
        [c(0), c(1)]
    }

    /// Whether `self` is contained in `other` (inclusive).
    pub fn is_within(&self, other: &DyadicCube) -> bool {
        self.end == other.end
            && self.level >= other.level
            && (self.index >> (self.level - other.level)) == other.index
    }

    /// Point membership. The junction belongs to the first cube of the big end.
    pub fn contains(&self, p: &Point, params: &KernelParams) -> bool {
        match p.coordinate_on(self.end) {
            None => false,
            Some(_) if p.is_junction() => self.index == 0,
            Some(s) => {
                let c = params.cell_of(s);
                let a = self.first_cell(params);
                c >= a && c < a + self.cell_span(params)
            }
        }
    }

    /// Dense index over all cubes of both ends (big end first, then by level and index).
    pub fn flat_id(&self, params: &KernelParams) -> usize {
        let per_end = (1usize << (params.depth + 1)) - 1;
        let base = if self.end == EndTag::Big { 0 } else { per_end };
        base + (1usize << self.level) - 1 + self.index as usize
    }

    /// Concentric dilation by `2r + 1`: every point within distance `r ℓ(I)` of `I`.
    pub fn dilate(&self, params: &KernelParams, r: usize) -> Region {
        let span = self.cell_span(params);
        let a = self.first_cell(params) as isize;
        let pad = (r * span) as isize;
        let lo = a - pad;
        let hi = (a + span as isize + pad).min(params.cells() as isize) as usize;
        let spill = if lo < 0 {
            ((-lo) as usize).min(params.cells())
        } else {
            0
        };
        Region {
            end: self.end,
            start: lo.max(0) as usize,
            stop: hi,
            spill,
            touches_junction: lo < 0 || (self.end == EndTag::Big && self.index == 0),
        }
    }

    /// `3I`.
    pub fn triple(&self, params: &KernelParams) -> Region {
        self.dilate(params, 1)
    }

    /// `5I`.
    pub fn quintuple(&self, params: &KernelParams) -> Region {
        self.dilate(params, 2)
    }

    /// Carleson box `I x [0, ℓ(I)]`.
    pub fn carleson_box(&self, params: &KernelParams) -> CarlesonBox {
        CarlesonBox {
            base: *self,
            height: self.length(params),
        }
    }

    /// Upper region over `3I` for the forward testing condition.
    pub fn hat_triple(&self, params: &KernelParams, convention: HatConvention) -> UpperRegion {
        let l = self.length(params);
        UpperRegion {
            base: self.triple(params),
            height: match convention {
                HatConvention::HatOfTriple => 3.0 * l,
                HatConvention::TripleOfHat => 2.0 * l,
            },
        }
    }
}

/// Every dyadic cube of both ends at levels `0..=L`, in `flat_id` order.
pub fn all_cubes(params: &KernelParams) -> Vec<DyadicCube> {
    let mut out = Vec::with_capacity(2 * ((1usize << (params.depth + 1)) - 1));
    for end in [EndTag::Big, EndTag::Small] {
        out.extend(cubes_on(params, end));
    }
    out
}

/// Every dyadic cube of one end at levels `0..=L`.
pub fn cubes_on(params: &KernelParams, end: EndTag) -> impl Iterator<Item = DyadicCube> + '_ {
    (0..=params.depth).flat_map(move |level| {
        (0..(1u64 << level)).map(move |index| DyadicCube { end, level, index })
    })
}

/// The chain of cubes on `end` containing point `p`, from the top cube down to level `L`.
pub fn ancestors_of(params: &KernelParams, end: EndTag, p: &Point) -> Option<Vec<DyadicCube>> {
    let s = p.coordinate_on(end)?;
    let cell = if p.is_junction() { 0 } else { params.cell_of(s) } as u64;
    Some(
        (0..=params.depth)
            .map(|level| DyadicCube {
                end,
                level,
                index: cell >> (params.depth - level),
            })
            .collect(),
    )
}

/// A union of finest cells: `[start, stop)` on `end` plus `[0, spill)` on the other end.
///
/// The junction is a separate point, in the region only when it lies
/// strictly within the dilation radius.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub struct Region {
    pub end: EndTag,
    pub start: usize,
    pub stop: usize,
    pub spill: usize,
    /// Whether the region contains the junction point.
    pub touches_junction: bool,
}

impl Region {
    /// Own-end part as a profile interval `[lo, hi)`.
    pub fn interval(&self, params: &KernelParams) -> (f64, f64) {
        let h = params.cell_len();
        (self.start as f64 * h, self.stop as f64 * h)
    }

    /// Other-end part as `[0, hi)`, if any.
    pub fn spill_interval(&self, params: &KernelParams) -> Option<(EndTag, f64, f64)> {
        (self.spill > 0).then(|| {
            (
                self.end.other().expect("regions live on an end"),
                0.0,
                self.spill as f64 * params.cell_len(),
            )
        })
    }

    pub fn contains(&self, p: &Point, params: &KernelParams) -> bool {
        if p.is_junction() {
            return self.touches_junction;
        }
        let c = params.cell_of(p.s);
        if p.end == self.end {
            c >= self.start && c < self.stop
        } else {
            c < self.spill
        }
    }
}

/// Carleson box `I x [0, ℓ(I)]`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct CarlesonBox {
    pub base: DyadicCube,
    pub height: f64,
}

impl CarlesonBox {
    pub fn contains(&self, p: &Point, t: f64, params: &KernelParams) -> bool {
        t <= self.height && self.base.contains(p, params)
    }
}

/// A region of `M` times `[0, height]`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct UpperRegion {
    pub base: Region,
    pub height: f64,
}

impl UpperRegion {
    pub fn contains(&self, p: &Point, t: f64, params: &KernelParams) -> bool {
        t <= self.height && self.base.contains(p, params)
    }
}

/// How the region over `3I` in the forward testing condition is read.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum HatConvention {
    /// Carleson box of the tripled interval: `3I x [0, 3ℓ(I)]`.
    #[default]
    HatOfTriple,
    /// Concentric triple of the Carleson box: `3I x [0, 2ℓ(I)]`.
    TripleOfHat,
}

impl std::str::FromStr for HatConvention {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "hat-of-triple" => Ok(HatConvention::HatOfTriple),
            "triple-of-hat" => Ok(HatConvention::TripleOfHat),
            _ => Err(Error::Parse {
                context: "hat convention".into(),
                reason: format!("`{s}` (expected hat-of-triple or triple-of-hat)"),
            }),
        }
    }
}

/// An open subset of `M \ K` resolved to finest cells.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct OpenSet {
    big: Vec<bool>,
    small: Vec<bool>,
    prefix_big: Vec<usize>,
    prefix_small: Vec<usize>,
}

fn prefix(cells: &[bool]) -> Vec<usize> {
    let mut out = Vec::with_capacity(cells.len() + 1);
    out.push(0);
    let mut acc = 0;
    for &c in cells {
        acc += c as usize;
        out.push(acc);
    }
    out
}

impl OpenSet {
    pub fn from_cells(big: Vec<bool>, small: Vec<bool>) -> Result<Self> {
        if big.len() != small.len() || !big.len().is_power_of_two() {
            return Err(Error::Domain("open set cell vectors must share a power-of-two length".into()));
        }
        let prefix_big = prefix(&big);
        let prefix_small = prefix(&small);
        Ok(OpenSet {
            big,
            small,
            prefix_big,
            prefix_small,
        })
    }

    pub fn empty(params: &KernelParams) -> Self {
        let n = params.cells();
        OpenSet::from_cells(vec![false; n], vec![false; n]).expect("matching lengths")
    }

    /// Union of half-open profile intervals per end; a cell belongs to the set
    /// when its midpoint does.
    pub fn from_intervals(
        params: &KernelParams,
        big: &[(f64, f64)],
        small: &[(f64, f64)],
    ) -> Result<Self> {
        let mark = |ivs: &[(f64, f64)]| -> Result<Vec<bool>> {
            for &(lo, hi) in ivs {
                if !(lo.is_finite() && hi.is_finite() && lo >= 0.0 && lo <= hi) {
                    return Err(Error::Domain(format!("bad interval [{lo}, {hi})")));
                }
            }
            Ok((0..params.cells())
                .map(|c| {
                    let mid = params.cell_mid(c);
                    ivs.iter().any(|&(lo, hi)| lo <= mid && mid < hi)
                })
                .collect())
        };
        OpenSet::from_cells(mark(big)?, mark(small)?)
    }

    pub fn cells(&self, end: EndTag) -> &[bool] {
        match end {
            EndTag::Big => &self.big,
            EndTag::Small => &self.small,
            EndTag::Junction => &[],
        }
    }

    pub fn is_empty(&self) -> bool {
        self.prefix_big.last() == Some(&0) && self.prefix_small.last() == Some(&0)
    }

    pub fn count(&self, end: EndTag) -> usize {
        match end {
            EndTag::Big => *self.prefix_big.last().unwrap(),
            EndTag::Small => *self.prefix_small.last().unwrap(),
            EndTag::Junction => 0,
        }
    }

    fn full(&self, end: EndTag, a: usize, b: usize) -> bool {
        let p = match end {
            EndTag::Big => &self.prefix_big,
            EndTag::Small => &self.prefix_small,
            EndTag::Junction => return a >= b,
        };
        b <= a || p[b] - p[a] == b - a
    }

    /// Whether the set contains point `p`. The junction is never in the set.
    pub fn contains_point(&self, p: &Point, params: &KernelParams) -> bool {
        !p.is_junction() && self.cells(p.end)[params.cell_of(p.s)]
    }

    /// Region containment. Regions through the junction are never contained.
    pub fn contains_region(&self, r: &Region) -> bool {
        if r.touches_junction {
            return false;
        }
        let other = r.end.other().expect("regions live on an end");
        self.full(r.end, r.start, r.stop) && self.full(other, 0, r.spill)
    }

    /// Whether every cell of `self` is in `other`.
    pub fn is_subset_of(&self, other: &OpenSet) -> bool {
        self.big.iter().zip(&other.big).all(|(a, b)| !a || *b)
            && self.small.iter().zip(&other.small).all(|(a, b)| !a || *b)
    }
}

/// Whitney decomposition of an open set.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct WhitneyFamily {
    pub members: Vec<DyadicCube>,
    /// No cube satisfied `5I ⊄ Ω`, so maximal cubes with `3I ⊂ Ω` were returned instead.
    pub degenerate: bool,
}

/// Maximal dyadic cubes `I` with `3I ⊂ Ω` and `5I ⊄ Ω`.
pub fn whitney(params: &KernelParams, omega: &OpenSet) -> WhitneyFamily {
    if omega.is_empty() {
        return WhitneyFamily {
            members: Vec::new(),
            degenerate: false,
        };
    }
    let members = maximal_cubes(params, |c| {
        omega.contains_region(&c.triple(params)) && !omega.contains_region(&c.quintuple(params))
    });
    if !members.is_empty() {
        return WhitneyFamily {
            members,
            degenerate: false,
        };
    }
    let members = maximal_cubes(params, |c| omega.contains_region(&c.triple(params)));
    WhitneyFamily {
        degenerate: !members.is_empty(),
        members,
    }
}

/// Cubes satisfying `pred` that have no ancestor satisfying it.
fn maximal_cubes(params: &KernelParams, pred: impl Fn(&DyadicCube) -> bool) -> Vec<DyadicCube> {
    let mut out = Vec::new();
    for end in [EndTag::Big, EndTag::Small] {
        let mut stack = vec![DyadicCube::top(end)];
        while let Some(c) = stack.pop() {
            if pred(&c) {
                out.push(c);
            } else if c.level < params.depth {
                let [a, b] = c.children();
                stack.push(b);
                stack.push(a);
            }
        }
    }
    out.sort();
    out
}

impl WhitneyFamily {
    /// Largest number of tripled members covering a single cell.
    pub fn overlap_multiplicity(&self, params: &KernelParams) -> usize {
        let n = params.cells();
        let mut big = vec![0usize; n];
        let mut small = vec![0usize; n];
        for c in &self.members {
            let r = c.triple(params);
            let (own, other) = match r.end {
                EndTag::Big => (&mut big, &mut small),
                _ => (&mut small, &mut big),
            };
            for v in &mut own[r.start..r.stop] {
                *v += 1;
            }
            for v in &mut other[..r.spill] {
                *v += 1;
            }
        }
        big.into_iter().chain(small).max().unwrap_or(0)
    }

    /// Cells of `omega` not covered by any member.
    pub fn uncovered_cells(&self, params: &KernelParams, omega: &OpenSet) -> usize {
        let mut count = 0;
        for end in [EndTag::Big, EndTag::Small] {
            for (c, &inside) in omega.cells(end).iter().enumerate() {
                if inside
                    && !self.members.iter().any(|m| {
                        m.end == end && c >= m.first_cell(params) && c < m.first_cell(params) + m.cell_span(params)
                    })
                {
                    count += 1;
                }
            }
        }
        count
    }
}

/// Per-cube box sums of an atomic measure on the upper half space.
///
/// `mass[id]` is `ν(Î)` and `integral[id]` is `∫_Î ψ dν` for every cube.
#[derive(Debug, Clone)]
pub struct BoxSums {
    pub mass: Vec<f64>,
    pub integral: Vec<f64>,
}

/// Box sums over all cubes for measure `nu` and nonnegative density `psi` on its atoms.
pub fn box_sums(params: &KernelParams, nu: &UpperHalfMeasure, psi: &[f64]) -> BoxSums {
    let total = 2 * ((1usize << (params.depth + 1)) - 1);
    let mut mass = vec![0.0; total];
    let mut integral = vec![0.0; total];
    for (a, &v) in nu.atoms().iter().zip(psi) {
        for_each_box(params, a, |c| {
            let id = c.flat_id(params);
            mass[id] += a.weight;
            integral[id] += v.abs() * a.weight;
        });
    }
    BoxSums { mass, integral }
}

/// Calls `f` for every cube whose Carleson box holds the atom.
fn for_each_box(params: &KernelParams, a: &MuAtom, mut f: impl FnMut(DyadicCube)) {
    for end in [EndTag::Big, EndTag::Small] {
        if let Some(chain) = ancestors_of(params, end, &a.point) {
            for c in chain {
                if a.t <= c.length(params) {
                    f(c);
                }
            }
        }
    }
}

/// Dyadic maximal function `sup_{(x,t) ∈ Ĵ} ν(Ĵ)^-1 ∫_Ĵ |ψ| dν` at one query point.
///
/// Returns 0 when no box around the query carries mass.
pub fn dyadic_maximal(
    params: &KernelParams,
    nu: &UpperHalfMeasure,
    psi: &[f64],
    x: &Point,
    t: f64,
) -> f64 {
    let sums = box_sums(params, nu, psi);
    maximal_from_sums(params, &sums, x, t)
}

/// Maximal function at a query point from precomputed box sums.
pub fn maximal_from_sums(params: &KernelParams, sums: &BoxSums, x: &Point, t: f64) -> f64 {
    let mut best = 0.0f64;
    for end in [EndTag::Big, EndTag::Small] {
        let Some(chain) = ancestors_of(params, end, x) else {
            continue;
        };
        for c in chain {
            if t > c.length(params) {
                break;
            }
            let id = c.flat_id(params);
            if sums.mass[id] > 0.0 {
                best = best.max(sums.integral[id] / sums.mass[id]);
            }
        }
    }
    best
}

/// Maximal function evaluated at every atom of `nu`.
pub fn maximal_at_atoms(params: &KernelParams, nu: &UpperHalfMeasure, psi: &[f64]) -> Vec<f64> {
    let sums = box_sums(params, nu, psi);
    nu.atoms()
        .iter()
        .map(|a| maximal_from_sums(params, &sums, &a.point, a.t))
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;

    fn unit(depth: u32) -> KernelParams {
        KernelParams::new(4, 3, 1.0, depth).unwrap()
    }

    #[test]
    fn triple_examples() {
        let p = unit(4);
        let i = DyadicCube::new(EndTag::Big, 2, 1).unwrap();
        assert_eq!(i.triple(&p).interval(&p), (0.0, 0.75));
        let top = DyadicCube::top(EndTag::Small);
        assert_eq!(top.triple(&p).interval(&p), (0.0, 1.0));
        assert_eq!(top.triple(&p).spill_interval(&p), Some((EndTag::Big, 0.0, 1.0)));
        let first = DyadicCube::new(EndTag::Big, 2, 0).unwrap();
        let r = first.triple(&p);
        assert_eq!(r.interval(&p), (0.0, 0.5));
        assert_eq!(r.spill_interval(&p), Some((EndTag::Small, 0.0, 0.25)));
        let inner = DyadicCube::new(EndTag::Big, 3, 4).unwrap();
        let r = inner.triple(&p);
        assert_eq!(r.interval(&p), (0.375, 0.75));
        assert!(r.spill_interval(&p).is_none());
    }

    #[test]
    fn triple_contains_the_cube() {
        let p = unit(5);
        for c in all_cubes(&p) {
            let r = c.triple(&p);
            for cell in c.first_cell(&p)..c.first_cell(&p) + c.cell_span(&p) {
                let pt = Point::new(c.end, p.cell_mid(cell)).unwrap();
                assert!(r.contains(&pt, &p));
            }
        }
    }

    #[test]
    fn boxes() {
        let p = KernelParams::new(4, 3, 1.0, 3).unwrap();
        let i = DyadicCube::top(EndTag::Big);
        assert_eq!(i.carleson_box(&p).height, 1.0);
        assert_eq!(i.hat_triple(&p, HatConvention::HatOfTriple).height, 3.0);
        assert_eq!(i.hat_triple(&p, HatConvention::TripleOfHat).height, 2.0);
        assert!(i.carleson_box(&p).contains(&Point::big(0.3), 0.9, &p));
        assert!(!i.carleson_box(&p).contains(&Point::big(0.3), 1.1, &p));
    }

    #[test]
    fn junction_belongs_to_the_big_system_only() {
        let p = unit(3);
        let j = Point::junction();
        assert!(DyadicCube::new(EndTag::Big, 3, 0).unwrap().contains(&j, &p));
        assert!(!DyadicCube::new(EndTag::Small, 0, 0).unwrap().contains(&j, &p));
        assert!(!DyadicCube::new(EndTag::Big, 3, 1).unwrap().contains(&j, &p));
    }

    #[test]
    fn cubes_nest_or_are_disjoint() {
        let p = unit(4);
        let cubes = all_cubes(&p);
        for a in &cubes {
            for b in &cubes {
                let (a0, a1) = (a.lo(&p), a.hi(&p));
                let (b0, b1) = (b.lo(&p), b.hi(&p));
                let overlap = a.end == b.end && a0 < b1 && b0 < a1;
                assert_eq!(overlap, a.is_within(b) || b.is_within(a), "{a} vs {b}");
            }
        }
    }

    #[test]
    fn flat_ids_are_dense() {
        let p = unit(4);
        let cubes = all_cubes(&p);
        for (i, c) in cubes.iter().enumerate() {
            assert_eq!(c.flat_id(&p), i);
        }
    }

    #[test]
    fn empty_open_set_has_empty_family() {
        let p = unit(4);
        let w = whitney(&p, &OpenSet::empty(&p));
        assert!(w.members.is_empty());
        assert!(!w.degenerate);
    }

    #[test]
    fn whole_end_decomposes_towards_the_junction() {
        let p = unit(5);
        let omega = OpenSet::from_intervals(&p, &[(0.0, 1.0)], &[]).unwrap();
        let w = whitney(&p, &omega);
        assert!(!w.degenerate);
        let expected: Vec<DyadicCube> = (1..=5)
            .map(|k| DyadicCube::new(EndTag::Big, k, 1).unwrap())
            .collect();
        let mut got = w.members.clone();
        got.sort_by_key(|c| c.level);
        assert_eq!(got, expected);
        assert_eq!(w.uncovered_cells(&p, &omega), 1);
    }

    #[test]
    fn whitney_members_satisfy_definition() {
        let p = unit(5);
        let omega = OpenSet::from_intervals(&p, &[(0.0, 0.5), (0.75, 1.0)], &[(0.25, 0.875)]).unwrap();
        let w = whitney(&p, &omega);
        assert!(!w.members.is_empty());
        for (i, a) in w.members.iter().enumerate() {
            assert!(omega.contains_region(&a.triple(&p)));
            assert!(!omega.contains_region(&a.quintuple(&p)));
            for b in &w.members[i + 1..] {
                assert!(!a.is_within(b) && !b.is_within(a));
            }
        }
        assert!(w.overlap_multiplicity(&p) <= 12);
    }

    #[test]
    fn maximal_of_constant_is_one() {
        let p = KernelParams::default();
        let mu = UpperHalfMeasure::new(vec![
            MuAtom { point: Point::big(1.0625), t: 0.5, weight: 2.0 },
            MuAtom { point: Point::small(3.0625), t: 1.5, weight: 0.5 },
            MuAtom { point: Point::junction(), t: 0.25, weight: 1.0 },
        ])
        .unwrap();
        let m = maximal_at_atoms(&p, &mu, &[1.0, 1.0, 1.0]);
        for v in m {
            assert!((v - 1.0).abs() < 1e-15);
        }
    }

    #[test]
    fn maximal_of_single_indicator() {
        let p = KernelParams::default();
        let mu = UpperHalfMeasure::dirac(Point::big(2.0625), 0.1, 3.0).unwrap();
        assert_eq!(dyadic_maximal(&p, &mu, &[1.0], &Point::big(2.0625), 0.1), 1.0);
        // far above every box
        assert_eq!(dyadic_maximal(&p, &mu, &[1.0], &Point::big(2.0625), 100.0), 0.0);
    }

    #[test]
    fn maximal_two_atoms_matches_enumeration() {
        // Atom a sits in a deep box alone; atom b shares only coarser boxes.
        let p = KernelParams::new(4, 3, 1.0, 3).unwrap();
        let mu = UpperHalfMeasure::new(vec![
            MuAtom { point: Point::big(0.0625), t: 0.1, weight: 1.0 },
            MuAtom { point: Point::big(0.9375), t: 0.1, weight: 3.0 },
        ])
        .unwrap();
        let psi = [1.0, 0.0];
        // Boxes holding a: levels 0..=3 on the big end, all with t <= length.
        // Only the top box also holds b: average there 1/4; deeper boxes average 1.
        let got = dyadic_maximal(&p, &mu, &psi, &Point::big(0.0625), 0.1);
        assert_eq!(got, 1.0);
        let at_b = dyadic_maximal(&p, &mu, &psi, &Point::big(0.9375), 0.1);
        assert_eq!(at_b, 0.25);
    }
}
