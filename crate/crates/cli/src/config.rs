//! Flat `key = value` experiment configuration.
//!
//! Lines are `key = value`; `#` starts a comment. List keys (`matrix`,
//! `kind`, `d`, `seed`) may be repeated and also accept comma-separated
//! values. Relative matrix paths and `output_dir` resolve against the
//! directory of the config file.

use std::fmt;
use std::path::{Path, PathBuf};
use std::str::FromStr;

use sketchls_core::stopping::{recommend_policy, NormalRatioReading, DEFAULT_BAND, DEFAULT_WINDOW};
use sketchls_core::{Band, SketchKind, SolverKind, StopMode, StoppingPolicy};

use crate::error::{CliError, Result};
use crate::source::MatrixSource;

/// Gaussian payloads with more than this many entries are skipped when
/// `skip_large` is on.
pub const SKIP_LARGE_ENTRIES: f64 = 2e8;

/// Sketch row count, either a multiple of `n` or explicit.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum DRule {
    Multiple(f64),
    Fixed(usize),
}

impl DRule {
    /// `ceil(multiple * n)`, or the fixed value.
    pub fn resolve(self, n: usize) -> usize {
        match self {
            DRule::Multiple(c) => (c * n as f64 - 1e-9).ceil() as usize,
            DRule::Fixed(d) => d,
        }
    }

    /// Checks `n <= d < m`.
    pub fn check(self, m: usize, n: usize) -> Result<usize> {
        let d = self.resolve(n);
        if d < n || d >= m {
            return Err(CliError::config(format!(
                "d = {self} gives {d} rows for a {m}x{n} matrix, need {n} <= d < {m}"
            )));
        }
        Ok(d)
    }
}

impl fmt::Display for DRule {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            DRule::Multiple(c) => write!(f, "{c}n"),
            DRule::Fixed(d) => write!(f, "{d}"),
        }
    }
}

impl FromStr for DRule {
    type Err = CliError;

    fn from_str(s: &str) -> Result<Self> {
        let s = s.trim();
        let bad = || CliError::config(format!("bad d `{s}`, want e.g. `2n`, `1.2n` or `80`"));
        if let Some(c) = s.strip_suffix('n') {
            let c: f64 = if c.is_empty() { 1.0 } else { c.parse().map_err(|_| bad())? };
            if !(c > 0.0 && c.is_finite()) {
                return Err(bad());
            }
            Ok(DRule::Multiple(c))
        } else {
            let d: usize = s.parse().map_err(|_| bad())?;
            if d == 0 {
                return Err(bad());
            }
            Ok(DRule::Fixed(d))
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum SolverChoice {
    Lsqr,
    Lsmr,
    Both,
}

impl SolverChoice {
    pub fn solvers(self) -> Vec<SolverKind> {
        match self {
            SolverChoice::Lsqr => vec![SolverKind::Lsqr],
            SolverChoice::Lsmr => vec![SolverKind::Lsmr],
            SolverChoice::Both => SolverKind::ALL.to_vec(),
        }
    }
}

impl FromStr for SolverChoice {
    type Err = CliError;

    fn from_str(s: &str) -> Result<Self> {
        match s.trim().to_ascii_lowercase().as_str() {
            "lsqr" => Ok(SolverChoice::Lsqr),
            "lsmr" => Ok(SolverChoice::Lsmr),
            "both" => Ok(SolverChoice::Both),
            other => Err(CliError::config(format!("unknown solver `{other}`"))),
        }
    }
}

/// Stopping settings; unset fields fall back to per-solver defaults.
#[derive(Debug, Clone, PartialEq)]
pub struct StopSpec {
    /// `None` picks the recommended rule for each solver.
    pub mode: Option<StopMode>,
    /// Traditional tolerance, or the threshold of `eps` (defaults to the exact distortion).
    pub tol: Option<f64>,
    pub window: usize,
    pub band: Band,
    pub max_iter: Option<usize>,
    pub persistence: usize,
    pub reading: NormalRatioReading,
}

impl Default for StopSpec {
    fn default() -> Self {
        StopSpec {
            mode: None,
            tol: None,
            window: DEFAULT_WINDOW,
            band: DEFAULT_BAND,
            max_iter: None,
            persistence: 1,
            reading: NormalRatioReading::Residual,
        }
    }
}

impl StopSpec {
    /// Policy for one run; `eps` is the exact distortion of its sketch.
    pub fn policy(&self, solver: SolverKind, eps: f64) -> StoppingPolicy {
        let mode = self.mode.unwrap_or_else(|| recommend_policy(solver));
        let mut p = StoppingPolicy::new(mode);
        match (mode, self.tol) {
            (_, Some(t)) => p.tol = t,
            (StopMode::EpsilonThreshold, None) => p.tol = eps,
            _ => {}
        }
        p.window = self.window;
        p.band = self.band;
        p.max_iter = self.max_iter;
        p.persistence = self.persistence;
        p.reading = self.reading;
        p
    }

    pub fn validate(&self) -> Result<()> {
        let probe = self.policy(SolverKind::Lsqr, 0.5);
        probe.validate().map_err(|e| CliError::config(e.to_string()))
    }

    pub fn label(&self, solver: SolverKind) -> &'static str {
        self.mode.unwrap_or_else(|| recommend_policy(solver)).as_str()
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct ExperimentConfig {
    pub matrices: Vec<MatrixSource>,
    pub kinds: Vec<SketchKind>,
    pub d_rules: Vec<DRule>,
    pub solver: SolverChoice,
    pub stop: StopSpec,
    pub seeds: Vec<u64>,
    pub rho: f64,
    pub output_dir: PathBuf,
    pub stride: usize,
    pub skip_large: bool,
    pub figures: bool,
}

impl Default for ExperimentConfig {
    fn default() -> Self {
        ExperimentConfig {
            matrices: Vec::new(),
            kinds: Vec::new(),
            d_rules: Vec::new(),
            solver: SolverChoice::Both,
            stop: StopSpec::default(),
            seeds: Vec::new(),
            rho: sketchls_core::matio::DEFAULT_RESIDUAL_SCALE,
            output_dir: PathBuf::from("out"),
            stride: 1,
            skip_large: true,
            figures: true,
        }
    }
}

fn parse<T: FromStr>(key: &str, v: &str) -> Result<T> {
    v.trim()
        .parse()
        .map_err(|_| CliError::config(format!("bad value `{v}` for `{key}`")))
}

fn parse_bool(key: &str, v: &str) -> Result<bool> {
    match v.trim().to_ascii_lowercase().as_str() {
        "true" | "yes" | "1" | "on" => Ok(true),
        "false" | "no" | "0" | "off" => Ok(false),
        _ => Err(CliError::config(format!("bad value `{v}` for `{key}`, want true or false"))),
    }
}

fn items(v: &str) -> impl Iterator<Item = &str> {
    v.split(',').map(str::trim).filter(|s| !s.is_empty())
}

impl ExperimentConfig {
    /// Parses config text; relative paths resolve against `base`.
    pub fn parse_str(text: &str, base: &Path) -> Result<Self> {
        let mut c = ExperimentConfig::default();
        let mut output_dir = None;
        for (no, raw) in text.lines().enumerate() {
            let line = raw.split('#').next().unwrap_or_default().trim();
            if line.is_empty() {
                continue;
            }
            let (key, value) = line
                .split_once('=')
                .ok_or_else(|| CliError::config(format!("line {}: expected key = value", no + 1)))?;
            let key = key.trim().to_ascii_lowercase().replace('-', "_");
            let value = value.trim();
            let at = |e: CliError| CliError::config(format!("line {}: {}", no + 1, e.to_string().trim_start_matches("config: ")));
            match key.as_str() {
                "matrix" => c.matrices.push(value.parse::<MatrixSource>().map_err(at)?.rebase(base)),
                "kind" => {
                    for k in items(value) {
                        c.kinds.push(k.parse().map_err(|e: sketchls_core::Error| at(CliError::config(e.to_string())))?);
                    }
                }
                "d" => {
                    for d in items(value) {
                        c.d_rules.push(d.parse().map_err(at)?);
                    }
                }
                "seed" | "seeds" => {
                    for s in items(value) {
                        c.seeds.push(parse(&key, s).map_err(at)?);
                    }
                }
                "solver" => c.solver = value.parse().map_err(at)?,
                "stop" => {
                    c.stop.mode = Some(value.parse().map_err(|e: sketchls_core::Error| at(CliError::config(e.to_string())))?)
                }
                "tol" => c.stop.tol = Some(parse(&key, value).map_err(at)?),
                "window" => c.stop.window = parse(&key, value).map_err(at)?,
                "band_lo" => c.stop.band.lo = parse(&key, value).map_err(at)?,
                "band_hi" => c.stop.band.hi = parse(&key, value).map_err(at)?,
                "max_iter" => c.stop.max_iter = Some(parse(&key, value).map_err(at)?),
                "persistence" => c.stop.persistence = parse(&key, value).map_err(at)?,
                "reading" => {
                    c.stop.reading = match value.to_ascii_lowercase().as_str() {
                        "residual" => NormalRatioReading::Residual,
                        "iterate" => NormalRatioReading::Iterate,
                        _ => return Err(at(CliError::config(format!("bad reading `{value}`, want residual or iterate")))),
                    }
                }
                "rho" => c.rho = parse(&key, value).map_err(at)?,
                "output_dir" => output_dir = Some(PathBuf::from(value)),
                "stride" => c.stride = parse(&key, value).map_err(at)?,
                "skip_large" => c.skip_large = parse_bool(&key, value).map_err(at)?,
                "figures" => c.figures = parse_bool(&key, value).map_err(at)?,
                _ => return Err(CliError::config(format!("line {}: unknown key `{key}`", no + 1))),
            }
        }
        if let Some(dir) = output_dir {
            c.output_dir = if dir.is_relative() { base.join(dir) } else { dir };
        } else {
            c.output_dir = base.join("out");
        }
        c.fill_defaults();
        c.validate()?;
        Ok(c)
    }

    pub fn load(path: impl AsRef<Path>) -> Result<Self> {
        let path = path.as_ref();
        let text = std::fs::read_to_string(path)
            .map_err(|e| CliError::config(format!("cannot read {}: {e}", path.display())))?;
        let base = path.parent().filter(|p| !p.as_os_str().is_empty()).unwrap_or(Path::new("."));
        Self::parse_str(&text, base)
    }

    fn fill_defaults(&mut self) {
        if self.kinds.is_empty() {
            self.kinds.push(SketchKind::Gaussian);
        }
        if self.d_rules.is_empty() {
            self.d_rules.push(DRule::Multiple(2.0));
        }
        if self.seeds.is_empty() {
            self.seeds.push(1);
        }
    }

    pub fn validate(&self) -> Result<()> {
        if self.matrices.is_empty() {
            return Err(CliError::config("no `matrix` given"));
        }
        if !(self.rho > 0.0 && self.rho.is_finite()) {
            return Err(CliError::config(format!("rho must be positive, got {}", self.rho)));
        }
        if self.stride == 0 {
            return Err(CliError::config("stride must be at least 1"));
        }
        self.stop.validate()?;
        for src in &self.matrices {
            if let Some((m, n)) = src.known_shape() {
                self.check_d(m, n)?;
            }
        }
        Ok(())
    }

    /// Row counts for an `m x n` matrix; identity sketches are exempt.
    pub fn check_d(&self, m: usize, n: usize) -> Result<Vec<usize>> {
        if self.kinds.iter().all(|k| *k == SketchKind::Identity) {
            return Ok(vec![m]);
        }
        self.d_rules.iter().map(|r| r.check(m, n)).collect()
    }

    /// Whether a Gaussian payload of `d x m` would be skipped.
    pub fn too_large(&self, kind: SketchKind, d: usize, m: usize) -> bool {
        self.skip_large && kind == SketchKind::Gaussian && (d as f64) * (m as f64) > SKIP_LARGE_ENTRIES
    }
}
