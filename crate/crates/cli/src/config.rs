//! Experiment configuration: a JSON file overlaid by command-line flags.

use std::path::{Path, PathBuf};

use clap::{Args, ValueEnum};
use coherent_teleport::hilbert::Splitting;
use coherent_teleport::linalg::CMatrix;
use coherent_teleport::teleport::{BMatrix, QuditState, Variant};
use num_complex::Complex64 as C64;
use serde::{Deserialize, Serialize};
use serde_json::Value;

use crate::CliError;

pub const PROTOCOL_TOL: f64 = 1e-10;
pub const OPERATOR_TOL: f64 = 1e-12;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize, ValueEnum)]
#[serde(rename_all = "lowercase")]
pub enum Command {
    Verify,
    Teleport,
    Sweep,
    Spatial,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize, ValueEnum)]
#[serde(rename_all = "lowercase")]
pub enum Scale {
    Linear,
    Log,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize, ValueEnum)]
#[serde(rename_all = "lowercase")]
pub enum Format {
    Csv,
    Json,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize, ValueEnum)]
pub enum SplittingKind {
    #[serde(rename = "half-half")]
    #[value(name = "half-half")]
    HalfHalf,
    #[serde(rename = "regions")]
    Regions,
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Grid {
    pub min: f64,
    pub max: f64,
    pub steps: usize,
    #[serde(default = "default_scale")]
    pub scale: Scale,
}

fn default_scale() -> Scale {
    Scale::Linear
}

#[derive(Clone, Copy, Debug, Default, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Tolerances {
    pub protocol: Option<f64>,
    pub operator: Option<f64>,
}

/// Contents of a `--config` file. Every field is optional; flags win.
#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ExperimentConfig {
    pub command: Option<Command>,
    #[serde(rename = "N", alias = "n")]
    pub n: Option<usize>,
    pub d: Option<f64>,
    pub d_grid: Option<Grid>,
    pub splitting: Option<SplittingKind>,
    pub b: Option<String>,
    pub state: Option<String>,
    pub variant: Option<String>,
    pub output: Option<PathBuf>,
    pub format: Option<Format>,
    #[serde(default)]
    pub tolerance: Tolerances,
    pub sample: Option<u64>,
}

#[derive(Args, Debug, Default)]
pub struct Flags {
    /// JSON config file; flags override its fields.
    #[arg(long)]
    pub config: Option<PathBuf>,
    /// Qudit dimension N.
    #[arg(long)]
    pub n: Option<usize>,
    /// Mean particle number of the beam.
    #[arg(long, conflicts_with_all = ["d_min", "d_max", "d_steps"])]
    pub d: Option<f64>,
    #[arg(long)]
    pub d_min: Option<f64>,
    #[arg(long)]
    pub d_max: Option<f64>,
    #[arg(long)]
    pub d_steps: Option<usize>,
    #[arg(long, value_enum)]
    pub d_scale: Option<Scale>,
    #[arg(long, value_enum)]
    pub splitting: Option<SplittingKind>,
    /// `dft` or a JSON file holding the N x N phase matrix.
    #[arg(long)]
    pub b: Option<String>,
    /// `basis:K`, `uniform`, `random:SEED`, or a JSON file.
    #[arg(long)]
    pub state: Option<String>,
    /// perfect, coherent, coherent+filter or coherent+local-filter.
    #[arg(long)]
    pub variant: Option<String>,
    /// Output path; stdout when absent.
    #[arg(long)]
    pub out: Option<PathBuf>,
    #[arg(long, value_enum)]
    pub format: Option<Format>,
    /// Tolerance for protocol identities.
    #[arg(long)]
    pub tol: Option<f64>,
    /// Draw one outcome with this seed in addition to the enumeration.
    #[arg(long)]
    pub sample: Option<u64>,
}

/// The config after merging file and flags, as echoed in reports.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct Resolved {
    pub command: Command,
    #[serde(rename = "N")]
    pub n: usize,
    pub d: Vec<f64>,
    pub splitting: SplittingKind,
    pub b: String,
    pub state: String,
    pub variant: Variant,
    #[serde(skip)]
    pub output: Option<PathBuf>,
    pub format: Format,
    pub protocol_tolerance: f64,
    pub operator_tolerance: f64,
    pub sample: Option<u64>,
}

fn config_err(msg: impl Into<String>) -> CliError {
    CliError::Config(msg.into())
}

pub fn load_file(path: &Path) -> Result<ExperimentConfig, CliError> {
    let text = std::fs::read_to_string(path).map_err(|e| config_err(format!("{}: {e}", path.display())))?;
    serde_json::from_str(&text).map_err(|e| config_err(format!("{}: {e}", path.display())))
}

pub fn grid_points(g: &Grid) -> Result<Vec<f64>, CliError> {
    if g.steps == 0 || !(g.min > 0.0) || !g.max.is_finite() || g.max < g.min {
        return Err(config_err(format!("invalid d grid {}..{} with {} steps", g.min, g.max, g.steps)));
    }
    if g.steps == 1 {
        return Ok(vec![g.min]);
    }
    let last = (g.steps - 1) as f64;
    Ok((0..g.steps)
        .map(|i| {
            let t = i as f64 / last;
            if i == 0 {
                return g.min;
            }
            if i + 1 == g.steps {
                return g.max;
            }
            match g.scale {
                Scale::Linear => g.min + t * (g.max - g.min),
                Scale::Log => (g.min.ln() + t * (g.max.ln() - g.min.ln())).exp(),
            }
        })
        .collect())
}

pub fn resolve(command: Command, flags: &Flags) -> Result<Resolved, CliError> {
    let file = match &flags.config {
        Some(p) => load_file(p)?,
        None => ExperimentConfig::default(),
    };
    let n = flags.n.or(file.n).unwrap_or(2);
    if n == 0 {
        return Err(config_err("N must be >= 1"));
    }

    let flag_grid = flags.d_min.is_some() || flags.d_max.is_some() || flags.d_steps.is_some();
    let d = if let Some(d) = flags.d {
        vec![d]
    } else if flag_grid || (file.d.is_none() && file.d_grid.is_some()) {
        let base = file.d_grid;
        let grid = Grid {
            min: flags.d_min.or(base.map(|g| g.min)).ok_or_else(|| config_err("--d-min is required for a grid"))?,
            max: flags.d_max.or(base.map(|g| g.max)).ok_or_else(|| config_err("--d-max is required for a grid"))?,
            steps: flags.d_steps.or(base.map(|g| g.steps)).ok_or_else(|| config_err("--d-steps is required for a grid"))?,
            scale: flags.d_scale.or(base.map(|g| g.scale)).unwrap_or(Scale::Linear),
        };
        grid_points(&grid)?
    } else {
        vec![file.d.unwrap_or(1.0)]
    };
    if let Some(bad) = d.iter().find(|d| !(**d > 0.0) || !d.is_finite()) {
        return Err(config_err(format!("d must be positive and finite, got {bad}")));
    }
    if command != Command::Sweep && d.len() != 1 {
        return Err(config_err("only `sweep` accepts a d grid with more than one point"));
    }

    let explicit_splitting = flags.splitting.or(file.splitting);
    let splitting = match (command, explicit_splitting) {
        (Command::Spatial, Some(SplittingKind::HalfHalf)) => {
            return Err(config_err("`spatial` needs the regions splitting; half-half has no regions"))
        }
        (Command::Spatial, _) => SplittingKind::Regions,
        (_, s) => s.unwrap_or(SplittingKind::HalfHalf),
    };

    let variant_name = flags.variant.clone().or(file.variant);
    let variant = match (command, variant_name.as_deref()) {
        (Command::Spatial, None | Some("coherent+filter") | Some("coherent+local-filter")) => Variant::LocallyFiltered,
        (Command::Spatial, Some(other)) => {
            return Err(config_err(format!("`spatial` runs the locally filtered protocol; variant `{other}` is not allowed")))
        }
        (_, None) => Variant::Perfect,
        (_, Some(name)) => name.parse().map_err(|_| {
            config_err(format!("unknown variant `{name}`; expected perfect, coherent, coherent+filter or coherent+local-filter"))
        })?,
    };
    if variant == Variant::LocallyFiltered && splitting != SplittingKind::Regions {
        return Err(config_err("the local filter needs the regions splitting"));
    }

    let tol = |x: Option<f64>, default: f64, what: &str| -> Result<f64, CliError> {
        let t = x.unwrap_or(default);
        if !(t > 0.0) || !t.is_finite() {
            return Err(config_err(format!("{what} tolerance must be positive, got {t}")));
        }
        Ok(t)
    };
    let format_default = if command == Command::Sweep { Format::Csv } else { Format::Json };
    Ok(Resolved {
        command,
        n,
        d,
        splitting,
        b: flags.b.clone().or(file.b).unwrap_or_else(|| "dft".into()),
        state: flags.state.clone().or(file.state).unwrap_or_else(|| "basis:0".into()),
        variant,
        output: flags.out.clone().or(file.output),
        format: flags.format.or(file.format).unwrap_or(format_default),
        protocol_tolerance: tol(flags.tol.or(file.tolerance.protocol), PROTOCOL_TOL, "protocol")?,
        operator_tolerance: tol(file.tolerance.operator, OPERATOR_TOL, "operator")?,
        sample: flags.sample.or(file.sample),
    })
}

impl Resolved {
    pub fn splitting(&self) -> Result<Splitting, CliError> {
        Ok(match self.splitting {
            SplittingKind::HalfHalf => Splitting::half_half(self.n)?,
            SplittingKind::Regions => Splitting::projection_pair(self.n)?,
        })
    }

    /// The phase matrix, unvalidated; callers report its checks.
    pub fn b_matrix(&self) -> Result<BMatrix, CliError> {
        if self.b == "dft" {
            return Ok(BMatrix::dft(self.n)?);
        }
        let value = read_json(Path::new(&self.b))?;
        let m = complex_matrix(&value).ok_or_else(|| config_err(format!("{}: expected an array of rows", self.b)))?;
        if m.nrows() != self.n || m.ncols() != self.n {
            return Err(config_err(format!("{}: expected {n}x{n} entries", self.b, n = self.n)));
        }
        BMatrix::unchecked(m).map_err(|e| config_err(format!("{}: {e}", self.b)))
    }

    pub fn qudit_state(&self) -> Result<QuditState, CliError> {
        let n = self.n;
        let text = self.state.as_str();
        let state = if let Some(k) = text.strip_prefix("basis:") {
            let k: usize = k.parse().map_err(|_| config_err(format!("bad basis index in `{text}`")))?;
            if k >= n {
                return Err(config_err(format!("basis index {k} out of range for N = {n}")));
            }
            QuditState::basis(n, k)
        } else if text == "uniform" {
            QuditState::uniform(n)
        } else if let Some(seed) = text.strip_prefix("random:") {
            let seed: u64 = seed.parse().map_err(|_| config_err(format!("bad seed in `{text}`")))?;
            QuditState::random(n, seed)
        } else {
            return state_from_file(Path::new(text), n);
        };
        state.map_err(|e| config_err(format!("state `{text}`: {e}")))
    }
}

fn read_json(path: &Path) -> Result<Value, CliError> {
    let text = std::fs::read_to_string(path).map_err(|e| config_err(format!("{}: {e}", path.display())))?;
    serde_json::from_str(&text).map_err(|e| config_err(format!("{}: {e}", path.display())))
}

/// A number, or a `[re, im]` pair.
fn complex(v: &Value) -> Option<C64> {
    match v {
        Value::Number(x) => Some(C64::from(x.as_f64()?)),
        Value::Array(p) if p.len() == 2 => Some(C64::new(p[0].as_f64()?, p[1].as_f64()?)),
        _ => None,
    }
}

fn complex_vector(v: &Value) -> Option<Vec<C64>> {
    v.as_array()?.iter().map(complex).collect()
}

fn complex_matrix(v: &Value) -> Option<CMatrix> {
    let rows: Vec<Vec<C64>> = v.as_array()?.iter().map(complex_vector).collect::<Option<_>>()?;
    let cols = rows.first()?.len();
    if rows.iter().any(|r| r.len() != cols) {
        return None;
    }
    Some(CMatrix::from_fn(rows.len(), cols, |i, j| rows[i][j]))
}

/// `{"amplitudes": [...]}` for a pure state (normalized on read) or
/// `{"density": [[...]]}` for a density matrix.
fn state_from_file(path: &Path, n: usize) -> Result<QuditState, CliError> {
    let value = read_json(path)?;
    let bad = |what: &str| config_err(format!("{}: {what}", path.display()));
    let state = if let Some(a) = value.get("amplitudes") {
        let c = complex_vector(a).ok_or_else(|| bad("amplitudes must be numbers or [re, im] pairs"))?;
        if c.len() != n {
            return Err(bad(&format!("expected {n} amplitudes, found {}", c.len())));
        }
        let v = coherent_teleport::linalg::CVector::from_vec(c);
        let norm = v.norm();
        if !(norm > 0.0) {
            return Err(bad("amplitudes are zero"));
        }
        QuditState::pure(&v.unscale(norm))
    } else if let Some(rho) = value.get("density") {
        let m = complex_matrix(rho).ok_or_else(|| bad("density must be an array of rows"))?;
        if m.nrows() != n || m.ncols() != n {
            return Err(bad(&format!("expected a {n}x{n} density matrix")));
        }
        QuditState::from_density(&m)
    } else {
        return Err(bad("expected an `amplitudes` or `density` field"));
    };
    state.map_err(|e| bad(&e.to_string()))
}
