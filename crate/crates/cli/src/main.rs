//! `twoweight`: command-line front-end for the two-weight Poisson laboratory.
//!
//! Exit status: 0 on success, 1 when an exact check fails, 2 on usage or IO errors.

use std::fs;
use std::io::Write;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use anyhow::{anyhow, bail, Context};
use clap::{Args, Parser, Subcommand};
use serde::{Deserialize, Serialize};

use twoweight_core::dyadic::{maximal_at_atoms, whitney, HatConvention, OpenSet};
use twoweight_core::generate::{generate, GenConfig};
use twoweight_core::io::{load_params, Instance};
use twoweight_core::kernel::{piece, poisson_terms};
use twoweight_core::operators::{operator_norm, NormOptions};
use twoweight_core::proofscope::{self, ProofscopeConfig};
use twoweight_core::testing::{self, SweepConfig, VerifyOptions};
use twoweight_core::{ball_volume, EndTag, Error, KernelParams, PieceId, Point};

#[derive(Parser)]
#[command(name = "twoweight", version, about = "Two-weight inequalities for the Poisson semigroup on a manifold with two ends")]
struct Cli {
    #[command(flatten)]
    common: Common,
    #[command(subcommand)]
    command: Command,
}

/// Flags shared by every subcommand. Each can also be set through a
/// `TWOWEIGHT_`-prefixed environment variable.
#[derive(Args, Debug)]
struct Common {
    /// Parameter file `{"m":..,"n":..,"S":..,"L":..}`; individual flags override it.
    #[arg(long, global = true, env = "TWOWEIGHT_PARAMS")]
    params: Option<PathBuf>,
    /// Dimension of the big end.
    #[arg(long, global = true, env = "TWOWEIGHT_M")]
    m: Option<u32>,
    /// Dimension of the small end.
    #[arg(long, global = true, env = "TWOWEIGHT_N")]
    n: Option<u32>,
    /// Profile extent (a power of two).
    #[arg(long = "S", global = true, env = "TWOWEIGHT_S")]
    extent: Option<f64>,
    /// Dyadic depth.
    #[arg(long = "L", global = true, env = "TWOWEIGHT_L")]
    depth: Option<u32>,
    #[arg(long, global = true, env = "TWOWEIGHT_SEED", default_value_t = 7)]
    seed: u64,
    /// Relative residual tolerance of the norm computation.
    #[arg(long, global = true, env = "TWOWEIGHT_TOL", default_value_t = twoweight_core::operators::DEFAULT_TOL)]
    tol: f64,
    #[arg(long, global = true, env = "TWOWEIGHT_MAX_ITERS", default_value_t = twoweight_core::operators::DEFAULT_MAX_ITERS)]
    max_iters: usize,
    /// Relative slack on the necessity check.
    #[arg(long, global = true, env = "TWOWEIGHT_EPS_NUM", default_value_t = testing::DEFAULT_EPS_NUM)]
    eps_num: f64,
    #[arg(long = "hat-convention", global = true, env = "TWOWEIGHT_HAT_CONVENTION", default_value = "hat-of-triple")]
    hat: HatConvention,
    /// Output file; standard output when absent.
    #[arg(long, global = true, env = "TWOWEIGHT_OUT")]
    out: Option<PathBuf>,
    /// Worker threads for parallel stages (0 = all cores).
    #[arg(long, global = true, env = "TWOWEIGHT_JOBS", default_value_t = 0)]
    jobs: usize,
}

#[derive(Subcommand)]
enum Command {
    /// Evaluate the kernel or one of its pieces.
    #[command(subcommand)]
    Kernel(KernelCmd),
    /// Whitney decomposition of an open set.
    Decompose {
        /// JSON `{"big":[[lo,hi],..],"small":[[lo,hi],..]}`.
        #[arg(long)]
        omega: PathBuf,
    },
    /// Dyadic maximal function at every μ-atom.
    Maximal {
        #[arg(long)]
        measures: PathBuf,
        /// JSON array with one value per μ-atom.
        #[arg(long)]
        psi: PathBuf,
        /// Reference measure of the averages.
        #[arg(long, default_value = "mu-tilde")]
        weight: MaximalWeight,
    },
    /// Operator norm `N`.
    Norm {
        #[arg(long)]
        measures: PathBuf,
    },
    /// `N`, `F`, `B` and the necessity check for one instance.
    Verify {
        #[arg(long)]
        measures: PathBuf,
    },
    /// `verify` over a batch of seeded random instances, written as CSV.
    Sweep {
        #[arg(long, env = "TWOWEIGHT_INSTANCES", default_value_t = 200)]
        instances: usize,
        /// Atoms per measure.
        #[arg(long, env = "TWOWEIGHT_ATOMS", default_value_t = 32)]
        atoms: usize,
        /// Ceiling on `N/(F+B)`.
        #[arg(long, env = "TWOWEIGHT_RATIO_CEILING", default_value_t = testing::DEFAULT_RATIO_CEILING)]
        ratio_ceiling: f64,
    },
    /// Level sets, maximal principle, principal cubes and stopping counts.
    Proofscope {
        #[arg(long)]
        measures: PathBuf,
        #[arg(long, default_value = "1,1")]
        piece: PieceId,
        #[arg(long, env = "TWOWEIGHT_DELTA", default_value_t = proofscope::DEFAULT_DELTA)]
        delta: f64,
        /// JSON array with one nonnegative value per μ-atom; all ones when absent.
        #[arg(long)]
        phi: Option<PathBuf>,
        /// End split of φ (big, small or junction).
        #[arg(long)]
        split: Option<EndTag>,
        #[arg(long, default_value_t = proofscope::DEFAULT_SAMPLES)]
        samples: usize,
    },
    /// Volume ratios showing that the doubling condition fails.
    DemoNondoubling,
    /// Write a random instance in the measure format.
    Generate {
        #[arg(long, env = "TWOWEIGHT_ATOMS", default_value_t = 32)]
        atoms: usize,
        /// μ-atoms, when different from `--atoms`.
        #[arg(long)]
        mu_atoms: Option<usize>,
    },
}

#[derive(Subcommand)]
enum KernelCmd {
    /// Full kernel `P_t(x, y)` with its summands.
    Eval {
        #[arg(long)]
        t: f64,
        /// Point such as `big:1.5`, `small:0.5` or `junction`.
        #[arg(long)]
        x: Point,
        #[arg(long)]
        y: Point,
    },
    /// One kernel piece `P_{t,i,j}`.
    Piece {
        #[arg(long)]
        id: PieceId,
        #[arg(long)]
        t: f64,
        #[arg(long)]
        x: Point,
        #[arg(long)]
        y: Point,
    },
}

#[derive(Clone, Copy, Debug, clap::ValueEnum)]
enum MaximalWeight {
    Mu,
    MuTilde,
}

/// Failure of an exact check; maps to exit status 1.
#[derive(Debug)]
struct CheckFailed(String);

impl std::fmt::Display for CheckFailed {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(&self.0)
    }
}

impl std::error::Error for CheckFailed {}

impl Common {
    fn kernel_params(&self) -> anyhow::Result<KernelParams> {
        let mut p = match &self.params {
            Some(path) => load_params(path)?,
            None => KernelParams::default(),
        };
        if let Some(m) = self.m {
            p.m = m;
        }
        if let Some(n) = self.n {
            p.n = n;
        }
        if let Some(s) = self.extent {
            p.extent = s;
        }
        if let Some(l) = self.depth {
            p.depth = l;
        }
        p.validate()?;
        Ok(p)
    }

    fn verify_options(&self) -> anyhow::Result<VerifyOptions> {
        if !(self.tol > 0.0 && self.eps_num > 0.0) {
            bail!("tolerances must be positive");
        }
        Ok(VerifyOptions {
            hat: self.hat,
            norm: NormOptions {
                tol: self.tol,
                max_iters: self.max_iters,
                svd_fallback: true,
            },
            eps_num: self.eps_num,
        })
    }

    fn emit(&self, text: &str) -> anyhow::Result<()> {
        match &self.out {
            Some(path) => fs::write(path, text).with_context(|| format!("writing {}", path.display())),
            None => {
                let mut out = std::io::stdout().lock();
                let res = out.write_all(text.as_bytes()).and_then(|_| {
                    if text.ends_with('\n') {
                        Ok(())
                    } else {
                        out.write_all(b"\n")
                    }
                });
                match res {
                    Err(e) if e.kind() == std::io::ErrorKind::BrokenPipe => Ok(()),
                    other => Ok(other?),
                }
            }
        }
    }

    fn emit_json<T: Serialize>(&self, value: &T) -> anyhow::Result<()> {
        self.emit(&serde_json::to_string_pretty(value)?)
    }
}

fn read_values(path: &Path, expected: usize, what: &str) -> anyhow::Result<Vec<f64>> {
    let text = fs::read_to_string(path).with_context(|| format!("reading {}", path.display()))?;
    let values: Vec<f64> = serde_json::from_str(&text)
        .map_err(|e| anyhow!("parse error in {}: {e}", path.display()))?;
    if values.len() != expected {
        bail!("{} holds {} {what} values, expected one per mu atom ({expected})", path.display(), values.len());
    }
    Ok(values)
}

#[derive(Deserialize)]
struct OmegaFile {
    #[serde(default)]
    big: Vec<(f64, f64)>,
    #[serde(default)]
    small: Vec<(f64, f64)>,
}

#[derive(Serialize)]
struct DecomposeOut {
    members: Vec<DecomposedCube>,
    degenerate: bool,
    overlap_multiplicity: usize,
    uncovered_cells: usize,
}

#[derive(Serialize)]
struct DecomposedCube {
    end: EndTag,
    level: u32,
    index: u64,
    lo: f64,
    hi: f64,
}

#[derive(Serialize)]
struct NondoublingRow {
    end: EndTag,
    r: f64,
    volume_r: f64,
    volume_2r: f64,
    ratio: f64,
}

fn load(measures: &Path, params: &KernelParams) -> anyhow::Result<Instance> {
    let (inst, report) = Instance::load(measures, params)?;
    if report.sigma.moved + report.mu.moved + report.sigma.merged + report.mu.merged > 0 {
        eprintln!(
            "note: snapped atoms to the finest grid (sigma moved {}, merged {}; mu moved {}, merged {})",
            report.sigma.moved, report.sigma.merged, report.mu.moved, report.mu.merged
        );
    }
    Ok(inst)
}

fn run(cli: Cli) -> anyhow::Result<()> {
    let c = &cli.common;
    if c.jobs > 0 {
        rayon::ThreadPoolBuilder::new().num_threads(c.jobs).build_global().ok();
    }
    let params = c.kernel_params()?;
    match cli.command {
        Command::Kernel(KernelCmd::Eval { t, x, y }) => c.emit_json(&poisson_terms(&params, t, &x, &y)?),
        Command::Kernel(KernelCmd::Piece { id, t, x, y }) => c.emit_json(&serde_json::json!({
            "piece": id.to_string(),
            "value": piece(&params, id, t, &x, &y)?,
            "constant": id.principle_constant(&params),
            "shift": id.level_shift(&params),
        })),
        Command::Decompose { omega } => {
            let text = fs::read_to_string(&omega).with_context(|| format!("reading {}", omega.display()))?;
            let file: OmegaFile =
                serde_json::from_str(&text).map_err(|e| anyhow!("parse error in {}: {e}", omega.display()))?;
            let set = OpenSet::from_intervals(&params, &file.big, &file.small)?;
            let fam = whitney(&params, &set);
            c.emit_json(&DecomposeOut {
                members: fam
                    .members
                    .iter()
                    .map(|m| DecomposedCube {
                        end: m.end,
                        level: m.level,
                        index: m.index,
                        lo: m.lo(&params),
                        hi: m.hi(&params),
                    })
                    .collect(),
                degenerate: fam.degenerate,
                overlap_multiplicity: fam.overlap_multiplicity(&params),
                uncovered_cells: fam.uncovered_cells(&params, &set),
            })
        }
        Command::Maximal { measures, psi, weight } => {
            let inst = load(&measures, &params)?;
            let psi = read_values(&psi, inst.mu.len(), "psi")?;
            let nu = match weight {
                MaximalWeight::Mu => inst.mu.clone(),
                MaximalWeight::MuTilde => inst.mu.tilde(),
            };
            c.emit_json(&serde_json::json!({ "values": maximal_at_atoms(&params, &nu, &psi) }))
        }
        Command::Norm { measures } => {
            let inst = load(&measures, &params)?;
            let opts = c.verify_options()?.norm;
            c.emit_json(&operator_norm(&params, &inst.sigma, &inst.mu, &opts)?)
        }
        Command::Verify { measures } => {
            let inst = load(&measures, &params)?;
            let rep = testing::verify(&params, &inst, &c.verify_options()?)?;
            c.emit_json(&rep)?;
            rep.check_necessity().map_err(|e| CheckFailed(e.to_string()).into())
        }
        Command::Sweep {
            instances,
            atoms,
            ratio_ceiling,
        } => {
            let cfg = SweepConfig {
                seed: c.seed,
                instances,
                gen: GenConfig::new(atoms, atoms),
                verify: c.verify_options()?,
            };
            let sweep = testing::sweep(&params, &cfg)?;
            let mut w = csv::Writer::from_writer(Vec::new());
            for row in &sweep.rows {
                w.serialize(row)?;
            }
            c.emit(&String::from_utf8(w.into_inner()?)?)?;
            let max = sweep.max_ratio();
            eprintln!(
                "{} instances, max N/(F+B) = {}",
                sweep.rows.len(),
                max.map_or("n/a".to_string(), |v| format!("{v:.6}"))
            );
            let failed = sweep.necessity_failures();
            if !failed.is_empty() {
                return Err(CheckFailed(format!("necessity failed for seeds {failed:?}")).into());
            }
            if let Some(v) = max.filter(|v| *v > ratio_ceiling) {
                return Err(CheckFailed(format!("N/(F+B) = {v} exceeds the ceiling {ratio_ceiling}")).into());
            }
            Ok(())
        }
        Command::Proofscope {
            measures,
            piece,
            delta,
            phi,
            split,
            samples,
        } => {
            let inst = load(&measures, &params)?;
            let phi = match phi {
                Some(path) => read_values(&path, inst.mu.len(), "phi")?,
                None => vec![1.0; inst.mu.len()],
            };
            let cfg = ProofscopeConfig {
                piece,
                split,
                delta,
                samples,
                seed: c.seed,
                ..Default::default()
            };
            let rep = proofscope::run(&params, &inst, &phi, &cfg)?;
            c.emit_json(&rep)?;
            if rep.pass {
                Ok(())
            } else {
                Err(CheckFailed(format!("failed checks: {}", rep.failed_checks.join(", "))).into())
            }
        }
        Command::DemoNondoubling => {
            let mut rows = Vec::new();
            let mut r = 2.0;
            while r <= params.extent {
                for end in [EndTag::Big, EndTag::Small] {
                    let x = Point::new(end, r)?;
                    let (v1, v2) = (ball_volume(&x, r, &params), ball_volume(&x, 2.0 * r, &params));
                    rows.push(NondoublingRow {
                        end,
                        r,
                        volume_r: v1,
                        volume_2r: v2,
                        ratio: v2 / v1,
                    });
                }
                r *= 2.0;
            }
            c.emit_json(&rows)
        }
        Command::Generate { atoms, mu_atoms } => {
            let inst = generate(c.seed, &GenConfig::new(atoms, mu_atoms.unwrap_or(atoms)), &params)?;
            c.emit(&inst.to_json_string()?)
        }
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e:#}");
            let check = e.downcast_ref::<CheckFailed>().is_some()
                || matches!(e.downcast_ref::<Error>(), Some(Error::Violation(_)));
            ExitCode::from(if check { 1 } else { 2 })
        }
    }
}
