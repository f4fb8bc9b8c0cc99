//! JSON formats for measures and parameters.
//!
//! Measure files look like
//! `{"sigma":[{"end":"big","s":1.5,"w":2.0}], "mu":[{"end":"small","s":0.5,"t":0.25,"w":1.0}]}`
//! and parameter files like `{"m":4,"n":3,"S":8,"L":6}`.

use std::path::Path;

use serde::{Deserialize, Serialize};
use serde_json::Value;

use crate::error::{Error, Result};
use crate::model::{
    DiscreteMeasure, EndTag, KernelParams, MuAtom, Point, SigmaAtom, SnapStats, UpperHalfMeasure,
};

/// A weight pair `(sigma, mu)`.
#[derive(Debug, Clone, PartialEq, Default)]
pub struct Instance {
    pub sigma: DiscreteMeasure,
    pub mu: UpperHalfMeasure,
}

/// What ingestion did to the raw atoms.
#[derive(Debug, Clone, Copy, Default, PartialEq, Serialize)]
pub struct IngestReport {
    pub sigma: SnapStats,
    pub mu: SnapStats,
}

#[derive(Serialize, Deserialize)]
struct SigmaRecord {
    end: EndTag,
    #[serde(default)]
    s: f64,
    w: f64,
}

#[derive(Serialize, Deserialize)]
struct MuRecord {
    end: EndTag,
    #[serde(default)]
    s: f64,
    t: f64,
    w: f64,
}

#[derive(Serialize)]
struct InstanceFile {
    sigma: Vec<SigmaRecord>,
    mu: Vec<MuRecord>,
}

fn field_err(which: &str, index: usize, reason: impl std::fmt::Display) -> Error {
    Error::Parse {
        context: format!("{which}[{index}]"),
        reason: reason.to_string(),
    }
}

fn atom_point(which: &str, index: usize, end: EndTag, s: f64) -> Result<Point> {
    if end != EndTag::Junction && !(s > 0.0) {
        return Err(field_err(which, index, format!("field `s` must be > 0 on the {end} end, got {s}")));
    }
    Point::new(end, s).map_err(|e| field_err(which, index, e))
}

impl Instance {
    pub fn new(sigma: DiscreteMeasure, mu: UpperHalfMeasure) -> Self {
        Instance { sigma, mu }
    }

    /// Parses the measure JSON without snapping.
    pub fn from_json_str(text: &str) -> Result<Self> {
        let root: Value = serde_json::from_str(text)?;
        let obj = root.as_object().ok_or_else(|| Error::Parse {
            context: "measure file".into(),
            reason: "expected a JSON object with `sigma` and `mu` arrays".into(),
        })?;
        let list = |key: &str| -> Result<Vec<Value>> {
            match obj.get(key) {
                None => Ok(Vec::new()),
                Some(Value::Array(a)) => Ok(a.clone()),
                Some(_) => Err(Error::Parse {
                    context: format!("measure file field `{key}`"),
                    reason: "expected an array".into(),
                }),
            }
        };
        let mut sigma = Vec::new();
        for (i, v) in list("sigma")?.into_iter().enumerate() {
            let r: SigmaRecord = serde_json::from_value(v).map_err(|e| field_err("sigma", i, e))?;
            sigma.push(SigmaAtom {
                point: atom_point("sigma", i, r.end, r.s)?,
                weight: r.w,
            });
        }
        let mut mu = Vec::new();
        for (i, v) in list("mu")?.into_iter().enumerate() {
            let r: MuRecord = serde_json::from_value(v).map_err(|e| field_err("mu", i, e))?;
            mu.push(MuAtom {
                point: atom_point("mu", i, r.end, r.s)?,
                t: r.t,
                weight: r.w,
            });
        }
        Ok(Instance {
            sigma: DiscreteMeasure::new(sigma)?,
            mu: UpperHalfMeasure::new(mu)?,
        })
    }

    pub fn to_json_string(&self) -> Result<String> {
        let file = InstanceFile {
            sigma: self
                .sigma
                .atoms()
                .iter()
                .map(|a| SigmaRecord {
                    end: a.point.end,
                    s: a.point.s,
                    w: a.weight,
                })
                .collect(),
            mu: self
                .mu
                .atoms()
                .iter()
                .map(|a| MuRecord {
                    end: a.point.end,
                    s: a.point.s,
                    t: a.t,
                    w: a.weight,
                })
                .collect(),
        };
        Ok(serde_json::to_string_pretty(&file)?)
    }

    /// Snaps all atoms to the finest dyadic grid of `params`.
    pub fn snapped(&self, params: &KernelParams) -> (Self, IngestReport) {
        let (sigma, s) = self.sigma.snapped(params);
        let (mu, m) = self.mu.snapped(params);
        (Instance { sigma, mu }, IngestReport { sigma: s, mu: m })
    }

    /// Reads and snaps a measure file.
    pub fn load(path: impl AsRef<Path>, params: &KernelParams) -> Result<(Self, IngestReport)> {
        let path = path.as_ref();
        let text = std::fs::read_to_string(path)?;
        let raw = Instance::from_json_str(&text).map_err(|e| match e {
            Error::Parse { context, reason } => Error::Parse {
                context: format!("{}: {context}", path.display()),
                reason,
            },
            other => other,
        })?;
        Ok(raw.snapped(params))
    }
}

/// Reads and validates a parameter file.
pub fn load_params(path: impl AsRef<Path>) -> Result<KernelParams> {
    let text = std::fs::read_to_string(path.as_ref())?;
    let p: KernelParams = serde_json::from_str(&text).map_err(|e| Error::Parse {
        context: format!("params file {}", path.as_ref().display()),
        reason: e.to_string(),
    })?;
    p.validate()?;
    Ok(p)
}
