//! Where a test matrix comes from.

use std::fmt;
use std::path::{Path, PathBuf};
use std::str::FromStr;

use sketchls_core::matio::{load_matrix_market, synth};
use sketchls_core::MatrixHandle;

use crate::error::{CliError, Result};

#[derive(Debug, Clone, PartialEq)]
pub enum MatrixSource {
    File(PathBuf),
    /// `synthetic:MxN[:cond=C][:seed=S]`; Gaussian entries, or prescribed
    /// condition number with unit norm when `cond` is given.
    Synthetic {
        m: usize,
        n: usize,
        cond: Option<f64>,
        seed: u64,
    },
}

impl MatrixSource {
    /// Short label used in file names and CSV columns.
    pub fn name(&self) -> String {
        match self {
            MatrixSource::File(p) => p
                .file_stem()
                .map(|s| s.to_string_lossy().into_owned())
                .unwrap_or_else(|| p.display().to_string()),
            MatrixSource::Synthetic { m, n, cond, seed } => {
                let mut s = format!("synthetic-{m}x{n}");
                if let Some(c) = cond {
                    s.push_str(&format!("-c{c}"));
                }
                if *seed != 0 {
                    s.push_str(&format!("-s{seed}"));
                }
                s
            }
        }
    }

    /// Column count when known without loading.
    pub fn known_shape(&self) -> Option<(usize, usize)> {
        match self {
            MatrixSource::File(_) => None,
            MatrixSource::Synthetic { m, n, .. } => Some((*m, *n)),
        }
    }

    pub fn load(&self) -> Result<MatrixHandle> {
        Ok(match self {
            MatrixSource::File(p) => load_matrix_market(p)?,
            MatrixSource::Synthetic { m, n, cond, seed } => MatrixHandle::dense(match cond {
                Some(c) => synth::conditioned_matrix(*m, *n, *c, *seed),
                None => synth::gaussian_matrix(*m, *n, *seed),
            }),
        })
    }

    /// Makes a relative file path relative to `base`.
    pub fn rebase(self, base: &Path) -> Self {
        match self {
            MatrixSource::File(p) if p.is_relative() => MatrixSource::File(base.join(p)),
            other => other,
        }
    }
}

impl fmt::Display for MatrixSource {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            MatrixSource::File(p) => write!(f, "{}", p.display()),
            MatrixSource::Synthetic { m, n, cond, seed } => {
                write!(f, "synthetic:{m}x{n}")?;
                if let Some(c) = cond {
                    write!(f, ":cond={c}")?;
                }
                if *seed != 0 {
                    write!(f, ":seed={seed}")?;
                }
                Ok(())
            }
        }
    }
}

impl FromStr for MatrixSource {
    type Err = CliError;

    fn from_str(s: &str) -> Result<Self> {
        let s = s.trim();
        let Some(rest) = s.strip_prefix("synthetic:") else {
            if s.is_empty() {
                return Err(CliError::config("empty matrix source"));
            }
            return Ok(MatrixSource::File(PathBuf::from(s)));
        };
        let mut parts = rest.split(':');
        let shape = parts.next().unwrap_or_default();
        let (m, n) = shape
            .split_once(['x', 'X'])
            .and_then(|(m, n)| Some((m.parse::<usize>().ok()?, n.parse::<usize>().ok()?)))
            .ok_or_else(|| CliError::config(format!("bad synthetic shape `{shape}`, want MxN")))?;
        if n == 0 || m < n {
            return Err(CliError::config(format!("synthetic shape {m}x{n} must have m >= n >= 1")));
        }
        let (mut cond, mut seed) = (None, 0);
        for opt in parts {
            match opt.split_once('=') {
                Some(("cond", v)) => {
                    let c: f64 = v
                        .parse()
                        .map_err(|_| CliError::config(format!("bad cond `{v}`")))?;
                    if !(c >= 1.0 && c.is_finite()) {
                        return Err(CliError::config(format!("cond must be >= 1, got {c}")));
                    }
                    cond = Some(c);
                }
                Some(("seed", v)) => {
                    seed = v
                        .parse()
                        .map_err(|_| CliError::config(format!("bad seed `{v}`")))?;
                }
                _ => return Err(CliError::config(format!("unknown synthetic option `{opt}`"))),
            }
        }
        Ok(MatrixSource::Synthetic { m, n, cond, seed })
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn parses_synthetic() {
        let s: MatrixSource = "synthetic:400x40:cond=100".parse().unwrap();
        assert_eq!(
            s,
            MatrixSource::Synthetic {
                m: 400,
                n: 40,
                cond: Some(100.0),
                seed: 0
            }
        );
        assert_eq!(s.name(), "synthetic-400x40-c100");
        assert_eq!(s.to_string().parse::<MatrixSource>().unwrap(), s);
        assert!("synthetic:4x40".parse::<MatrixSource>().is_err());
        assert!("synthetic:40x4:foo=1".parse::<MatrixSource>().is_err());
    }

    #[test]
    fn file_name_is_stem() {
        let s: MatrixSource = "data/illc1033.mtx".parse().unwrap();
        assert_eq!(s.name(), "illc1033");
    }
}
