//! Whitney families against a brute-force enumeration over real intervals.

use proptest::prelude::*;
use twoweight_core::dyadic::{all_cubes, whitney, DyadicCube, OpenSet};
use twoweight_core::{EndTag, KernelParams};

/// Open set as sorted disjoint intervals per end.
#[derive(Debug, Clone)]
struct Intervals {
    big: Vec<(f64, f64)>,
    small: Vec<(f64, f64)>,
}

fn merge(mut v: Vec<(f64, f64)>) -> Vec<(f64, f64)> {
    v.sort_by(|a, b| a.0.partial_cmp(&b.0).unwrap());
    let mut out: Vec<(f64, f64)> = Vec::new();
    for (a, b) in v {
        match out.last_mut() {
            Some(last) if a <= last.1 => last.1 = last.1.max(b),
            _ => out.push((a, b)),
        }
    }
    out
}

fn covers(set: &[(f64, f64)], a: f64, b: f64) -> bool {
    b <= a || set.iter().any(|&(lo, hi)| lo <= a && b <= hi)
}

impl Intervals {
    fn on(&self, end: EndTag) -> &[(f64, f64)] {
        if end == EndTag::Big {
            &self.big
        } else {
            &self.small
        }
    }

    /// Whether every point within distance `r ℓ` of the cube lies in the set.
    /// The junction is never in the set, and it is within that distance as soon as `lo < r ℓ`.
    fn contains_dilation(&self, p: &KernelParams, c: &DyadicCube, r: f64) -> bool {
        let l = c.length(p);
        let (lo, hi) = (c.lo(p), c.hi(p));
        if lo < r * l {
            return false;
        }
        covers(self.on(c.end), lo - r * l, (hi + r * l).min(p.extent))
    }
}

fn oracle(p: &KernelParams, omega: &Intervals) -> Vec<DyadicCube> {
    let good = |c: &DyadicCube| omega.contains_dilation(p, c, 1.0) && !omega.contains_dilation(p, c, 2.0);
    let cubes = all_cubes(p);
    let sat: Vec<DyadicCube> = cubes.iter().copied().filter(|c| good(c)).collect();
    let maximal = |set: &[DyadicCube]| -> Vec<DyadicCube> {
        let mut out: Vec<DyadicCube> = set
            .iter()
            .copied()
            .filter(|c| !set.iter().any(|d| d != c && c.is_within(d)))
            .collect();
        out.sort();
        out
    };
    if !sat.is_empty() {
        return maximal(&sat);
    }
    let tri: Vec<DyadicCube> = cubes.into_iter().filter(|c| omega.contains_dilation(p, c, 1.0)).collect();
    maximal(&tri)
}

fn open_set() -> impl Strategy<Value = (Vec<(u32, u32)>, Vec<(u32, u32)>)> {
    let ivs = prop::collection::vec((0u32..64, 1u32..40), 0..4);
    (ivs.clone(), ivs)
}

fn to_intervals(p: &KernelParams, raw: &[(u32, u32)]) -> Vec<(f64, f64)> {
    let h = p.cell_len();
    raw.iter()
        .map(|&(a, len)| (a as f64 * h, ((a + len).min(64)) as f64 * h))
        .collect()
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(200))]

    #[test]
    fn whitney_matches_brute_force((rb, rs) in open_set()) {
        let p = KernelParams::default();
        let omega = Intervals { big: merge(to_intervals(&p, &rb)), small: merge(to_intervals(&p, &rs)) };
        let set = OpenSet::from_intervals(&p, &omega.big, &omega.small).unwrap();
        let fam = whitney(&p, &set);
        prop_assert_eq!(&fam.members, &oracle(&p, &omega));
        for (i, a) in fam.members.iter().enumerate() {
            for b in &fam.members[i + 1..] {
                prop_assert!(!a.is_within(b) && !b.is_within(a));
            }
        }
        prop_assert!(fam.overlap_multiplicity(&p) <= 12);
    }
}

#[test]
fn empty_and_full_sets() {
    let p = KernelParams::default();
    assert!(whitney(&p, &OpenSet::empty(&p)).members.is_empty());
    let full = Intervals { big: vec![(0.0, 8.0)], small: vec![(0.0, 8.0)] };
    let set = OpenSet::from_intervals(&p, &full.big, &full.small).unwrap();
    assert_eq!(whitney(&p, &set).members, oracle(&p, &full));
}
