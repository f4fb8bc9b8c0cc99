//! Model Poisson kernel on the two-ended manifold.
//!
//! The kernel is defined as the exact sum of the two-sided comparison
//! expressions for each of the six position cases. In the mixed case
//! (one point per end) the point on the big end always carries the
//! `|.|^(m-2)` weight and the point on the small end the `|.|^(n-2)` weight,
//! which makes the kernel symmetric in its spatial arguments.

use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::model::{distance, norm_of, EndTag, KernelParams, Point};

/// Position case of a pair `(x, y)`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum KernelCase {
    /// Both in the core.
    KK,
    /// Big end and core.
    MK,
    /// Small end and core.
    NK,
    /// One point on each end.
    MN,
    /// Both on the big end.
    MM,
    /// Both on the small end.
    NN,
}

impl KernelCase {
    pub const ALL: [KernelCase; 6] = [
        KernelCase::KK,
        KernelCase::MK,
        KernelCase::NK,
        KernelCase::MN,
        KernelCase::MM,
        KernelCase::NN,
    ];

    /// Dispatch on the end tags; mirrored pairs map to the same case.
    pub fn classify(x: &Point, y: &Point) -> Self {
        use EndTag::*;
        match (x.end, y.end) {
            (Junction, Junction) => KernelCase::KK,
            (Big, Junction) | (Junction, Big) => KernelCase::MK,
            (Small, Junction) | (Junction, Small) => KernelCase::NK,
            (Big, Small) | (Small, Big) => KernelCase::MN,
            (Big, Big) => KernelCase::MM,
            (Small, Small) => KernelCase::NN,
        }
    }

    /// 1-based position of the case in the classical list of estimates.
    pub fn number(self) -> u8 {
        match self {
            KernelCase::KK => 1,
            KernelCase::MK => 2,
            KernelCase::NK => 3,
            KernelCase::MN => 4,
            KernelCase::MM => 5,
            KernelCase::NN => 6,
        }
    }
}

impl fmt::Display for KernelCase {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{:?}", self)
    }
}

/// `t^-k (t / (t + r))^(k+1)`, the basic decay profile.
#[inline]
pub fn decay(k: u32, t: f64, r: f64) -> f64 {
    let q = t / (t + r);
    q.powi(k as i32 + 1) / t.powi(k as i32)
}

/// Kernel value together with the summands that produced it.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct KernelEval {
    pub case: KernelCase,
    pub terms: Vec<f64>,
    pub total: f64,
}

fn check_t(t: f64) -> Result<()> {
    if !(t.is_finite() && t > 0.0) {
        return Err(Error::Domain(format!("t must be finite and > 0, got {t}")));
    }
    Ok(())
}

/// Summands of the model kernel for `(t, x, y)`.
pub fn poisson_terms(params: &KernelParams, t: f64, x: &Point, y: &Point) -> Result<KernelEval> {
    check_t(t)?;
    let case = KernelCase::classify(x, y);
    let (m, n) = (params.m, params.n);
    let d = distance(x, y);
    let lead = decay(m, t, d);
    let terms = match case {
        KernelCase::KK | KernelCase::NK | KernelCase::NN => vec![lead, decay(n, t, d)],
        KernelCase::MK => {
            let big = if x.end == EndTag::Big { x } else { y };
            vec![lead, decay(n, t, d) / norm_of(big).powi(m as i32 - 2)]
        }
        KernelCase::MN => {
            let (big, small) = if x.end == EndTag::Big { (x, y) } else { (y, x) };
            vec![
                lead,
                decay(n, t, d) / norm_of(big).powi(m as i32 - 2),
                lead / norm_of(small).powi(n as i32 - 2),
            ]
        }
        KernelCase::MM => {
            let (nx, ny) = (norm_of(x), norm_of(y));
            vec![lead, decay(n, t, nx + ny) / (nx * ny).powi(m as i32 - 2)]
        }
    };
    let total = terms.iter().sum();
    Ok(KernelEval { case, terms, total })
}

/// The model Poisson kernel `P_t(x, y)`.
pub fn poisson(params: &KernelParams, t: f64, x: &Point, y: &Point) -> Result<f64> {
    check_t(t)?;
    Ok(poisson_unchecked(params, t, x, y))
}

/// Kernel evaluation without the `t` check, for assembly loops over validated atoms.
#[inline]
pub fn poisson_unchecked(params: &KernelParams, t: f64, x: &Point, y: &Point) -> f64 {
    let (m, n) = (params.m, params.n);
    let d = distance(x, y);
    let lead = decay(m, t, d);
    match KernelCase::classify(x, y) {
        KernelCase::KK | KernelCase::NK | KernelCase::NN => lead + decay(n, t, d),
        KernelCase::MK => {
            let big = if x.end == EndTag::Big { x } else { y };
            lead + decay(n, t, d) / norm_of(big).powi(m as i32 - 2)
        }
        KernelCase::MN => {
            let (big, small) = if x.end == EndTag::Big { (x, y) } else { (y, x) };
            lead + decay(n, t, d) / norm_of(big).powi(m as i32 - 2)
                + lead / norm_of(small).powi(n as i32 - 2)
        }
        KernelCase::MM => {
            let (nx, ny) = (norm_of(x), norm_of(y));
            lead + decay(n, t, nx + ny) / (nx * ny).powi(m as i32 - 2)
        }
    }
}

/// One of the structurally distinct kernel pieces used by the level-set argument.
///
/// Pieces are written `P_{t,i,j}(y, x)` with `x` on `M` (where the adjoint is
/// evaluated) and `y` the spatial part of an upper-half-space atom.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum PieceId {
    P11,
    P12,
    P22,
    P23,
    P42,
    P43,
}

impl PieceId {
    pub const ALL: [PieceId; 6] = [
        PieceId::P11,
        PieceId::P12,
        PieceId::P22,
        PieceId::P23,
        PieceId::P42,
        PieceId::P43,
    ];

    pub fn pair(self) -> (u8, u8) {
        match self {
            PieceId::P11 => (1, 1),
            PieceId::P12 => (1, 2),
            PieceId::P22 => (2, 2),
            PieceId::P23 => (2, 3),
            PieceId::P42 => (4, 2),
            PieceId::P43 => (4, 3),
        }
    }

    /// End on which `x` must lie; `None` means unrestricted.
    pub fn x_end(self) -> Option<EndTag> {
        match self {
            PieceId::P11 => None,
            PieceId::P12 | PieceId::P42 | PieceId::P43 => Some(EndTag::Big),
            PieceId::P22 | PieceId::P23 => Some(EndTag::Small),
        }
    }

    /// End on which `y` must lie; `None` means unrestricted.
    pub fn y_end(self) -> Option<EndTag> {
        match self {
            PieceId::P11 => None,
            PieceId::P12 | PieceId::P22 | PieceId::P23 => Some(EndTag::Big),
            PieceId::P42 | PieceId::P43 => Some(EndTag::Small),
        }
    }

    /// The end whose `sigma`-mass the level-set argument for this piece decomposes.
    pub fn sigma_end(self) -> EndTag {
        self.x_end().unwrap_or(EndTag::Big)
    }

    /// Maximal-principle constant for this piece.
    ///
    /// `4^(m+1)` for the pure decay pieces; when the piece carries a weight in
    /// `|x|` the comparability `|z| < 4|x|` adds the corresponding power of 4.
    pub fn principle_constant(self, params: &KernelParams) -> f64 {
        let (m, n) = (params.m as i32, params.n as i32);
        let exp = match self {
            PieceId::P11 | PieceId::P43 => m + 1,
            PieceId::P22 => n + 1,
            PieceId::P12 | PieceId::P23 | PieceId::P42 => m + n - 1,
        };
        4f64.powi(exp)
    }

    /// Smallest shift `l` with `2^l > C + 1`.
    pub fn level_shift(self, params: &KernelParams) -> i32 {
        let c = self.principle_constant(params);
        let mut l = 0;
        while 2f64.powi(l) <= c + 1.0 {
            l += 1;
        }
        l
    }
}

impl fmt::Display for PieceId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let (i, j) = self.pair();
        write!(f, "{i},{j}")
    }
}

impl FromStr for PieceId {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        let compact: String = s.chars().filter(|c| c.is_ascii_digit()).collect();
        match compact.as_str() {
            "11" => Ok(PieceId::P11),
            "12" => Ok(PieceId::P12),
            "22" => Ok(PieceId::P22),
            "23" => Ok(PieceId::P23),
            "42" => Ok(PieceId::P42),
            "43" => Ok(PieceId::P43),
            _ => Err(Error::Parse {
                context: "kernel piece".into(),
                reason: format!("unknown piece `{s}` (expected one of 1,1 1,2 2,2 2,3 4,2 4,3)"),
            }),
        }
    }
}

/// Piece formula from its scalar ingredients: `d = d(x, y)`, `nx = |x|`, `ny = |y|`.
pub fn piece_formula(params: &KernelParams, id: PieceId, t: f64, d: f64, nx: f64, ny: f64) -> f64 {
    let (m, n) = (params.m, params.n);
    match id {
        PieceId::P11 => decay(m, t, d),
        PieceId::P12 => decay(n, t, nx + ny) / (nx * ny).powi(m as i32 - 2),
        PieceId::P22 => decay(n, t, d) / ny.powi(m as i32 - 2),
        PieceId::P23 => decay(m, t, d) / nx.powi(n as i32 - 2),
        PieceId::P42 => decay(n, t, d) / nx.powi(m as i32 - 2),
        PieceId::P43 => decay(m, t, d) / ny.powi(n as i32 - 2),
    }
}

/// Whether `(x, y)` lies in the domain of `id`.
pub fn piece_accepts(id: PieceId, x: &Point, y: &Point) -> bool {
    id.x_end().is_none_or(|e| x.end == e) && id.y_end().is_none_or(|e| y.end == e)
}

/// Kernel piece `P_{t,i,j}(y, x)`.
pub fn piece(params: &KernelParams, id: PieceId, t: f64, x: &Point, y: &Point) -> Result<f64> {
    check_t(t)?;
    if !piece_accepts(id, x, y) {
        return Err(Error::Domain(format!(
            "piece ({id}) is not defined for x = {x}, y = {y}"
        )));
    }
    Ok(piece_formula(params, id, t, distance(x, y), norm_of(x), norm_of(y)))
}
