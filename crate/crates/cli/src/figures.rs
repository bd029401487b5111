//! Per-figure CSV bundles assembled from trace files.

use std::collections::BTreeMap;
use std::fs;
use std::path::{Path, PathBuf};

use log::warn;
use sketchls_core::trace::{load_trace, TraceRow};

use crate::error::Result;

/// Quantity plotted against `k` in a bundle.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord)]
pub enum FigureStyle {
    /// Unsketched normal-equation ratio.
    Ratio,
    /// Unsketched residual norm.
    Residual,
}

impl FigureStyle {
    pub const ALL: [FigureStyle; 2] = [FigureStyle::Ratio, FigureStyle::Residual];

    pub fn as_str(self) -> &'static str {
        match self {
            FigureStyle::Ratio => "ratio",
            FigureStyle::Residual => "residual",
        }
    }

    fn value(self, row: &TraceRow) -> Option<f64> {
        match self {
            FigureStyle::Ratio => row.ne_ratio,
            FigureStyle::Residual => row.rnorm,
        }
    }
}

/// Parts of a trace file name `matrix__kind__dD__sS__solver.csv`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct TraceKey {
    pub matrix: String,
    pub kind: String,
    pub d: usize,
    pub seed: u64,
    pub solver: String,
}

impl TraceKey {
    pub fn parse(file_name: &str) -> Option<Self> {
        let stem = file_name.strip_suffix(".csv")?;
        let parts: Vec<&str> = stem.split("__").collect();
        let [matrix, kind, d, seed, solver] = parts.as_slice() else {
            return None;
        };
        Some(TraceKey {
            matrix: matrix.to_string(),
            kind: kind.to_string(),
            d: d.strip_prefix('d')?.parse().ok()?,
            seed: seed.strip_prefix('s')?.parse().ok()?,
            solver: solver.to_string(),
        })
    }

    fn series(&self) -> String {
        format!("{}__d{}__s{}", self.matrix, self.d, self.seed)
    }
}

/// Writes one `style__solver__kind.csv` per bundle with a `k` column and one
/// column per problem. Returns the written paths; missing or empty trace
/// directories produce a warning and no bundles.
pub fn emit_figure_data(trace_dir: &Path, out_dir: &Path) -> Result<Vec<PathBuf>> {
    let entries = match fs::read_dir(trace_dir) {
        Ok(e) => e,
        Err(e) => {
            warn!("no traces at {}: {e}", trace_dir.display());
            return Ok(Vec::new());
        }
    };
    let mut files: Vec<(TraceKey, PathBuf)> = Vec::new();
    for entry in entries {
        let path = entry?.path();
        let Some(name) = path.file_name().and_then(|n| n.to_str()) else {
            continue;
        };
        match TraceKey::parse(name) {
            Some(key) => files.push((key, path)),
            None => warn!("skipping {}: not a trace file name", path.display()),
        }
    }
    if files.is_empty() {
        warn!("no trace files in {}; no figure bundles written", trace_dir.display());
        return Ok(Vec::new());
    }

    type Series = BTreeMap<String, Vec<TraceRow>>;
    let mut groups: BTreeMap<(String, String), Series> = BTreeMap::new();
    for (key, path) in files {
        let rows = match load_trace(&path) {
            Ok(r) => r,
            Err(e) => {
                warn!("skipping {}: {e}", path.display());
                continue;
            }
        };
        groups
            .entry((key.solver.clone(), key.kind.clone()))
            .or_default()
            .insert(key.series(), rows);
    }

    fs::create_dir_all(out_dir)?;
    let mut written = Vec::new();
    for ((solver, kind), series) in &groups {
        for style in FigureStyle::ALL {
            let path = out_dir.join(format!("{}__{solver}__{kind}.csv", style.as_str()));
            write_bundle(&path, style, series)?;
            written.push(path);
        }
    }
    Ok(written)
}

fn write_bundle(path: &Path, style: FigureStyle, series: &BTreeMap<String, Vec<TraceRow>>) -> Result<()> {
    let mut w = csv::Writer::from_path(path)?;
    let mut header = vec!["k".to_string()];
    header.extend(series.keys().cloned());
    w.write_record(&header)?;
    let max_k = series
        .values()
        .flat_map(|rows| rows.iter().map(|r| r.k))
        .max()
        .unwrap_or(0);
    let lookup: Vec<BTreeMap<usize, Option<f64>>> = series
        .values()
        .map(|rows| rows.iter().map(|r| (r.k, style.value(r))).collect())
        .collect();
    for k in 1..=max_k {
        let mut rec = vec![k.to_string()];
        for l in &lookup {
            rec.push(l.get(&k).copied().flatten().map(|v| v.to_string()).unwrap_or_default());
        }
        w.write_record(&rec)?;
    }
    w.flush()?;
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn parses_trace_names() {
        let k = TraceKey::parse("illc1033__gaussian__d640__s1__lsqr.csv").unwrap();
        assert_eq!(k.matrix, "illc1033");
        assert_eq!(k.d, 640);
        assert_eq!(k.seed, 1);
        assert_eq!(k.solver, "lsqr");
        assert!(TraceKey::parse("summary.csv").is_none());
        assert!(TraceKey::parse("a__b__x1__s1__lsqr.csv").is_none());
    }
}
