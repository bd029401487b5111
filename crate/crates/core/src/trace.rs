//! Per-iteration CSV traces.

use std::io::{Read, Write};
use std::path::Path;

use crate::error::{Error, Result};
use crate::solvers::IterateRecord;

pub const TRACE_HEADER: [&str; 6] = ["k", "srnorm", "snenorm", "rnorm", "ne_ratio", "stale_flag"];

/// One row of a trace file. Unobserved columns are empty on disk.
#[derive(Debug, Clone, PartialEq)]
pub struct TraceRow {
    pub k: usize,
    pub srnorm: f64,
    pub snenorm: f64,
    pub rnorm: Option<f64>,
    pub ne_ratio: Option<f64>,
    pub stale: bool,
}

impl From<&IterateRecord> for TraceRow {
    fn from(r: &IterateRecord) -> Self {
        TraceRow {
            k: r.k,
            srnorm: r.sketched_residual_norm,
            snenorm: r.sketched_normal_residual_norm,
            rnorm: r.unsketched_residual_norm(),
            ne_ratio: r.unsketched_normal_ratio(),
            stale: r.is_stale(),
        }
    }
}

fn opt(v: Option<f64>) -> String {
    v.map(|x| x.to_string()).unwrap_or_default()
}

pub fn write_trace<W: Write>(w: W, trace: &[IterateRecord]) -> Result<()> {
    let mut wr = csv::Writer::from_writer(w);
    wr.write_record(TRACE_HEADER)?;
    for r in trace.iter().map(TraceRow::from) {
        wr.write_record([
            r.k.to_string(),
            r.srnorm.to_string(),
            r.snenorm.to_string(),
            opt(r.rnorm),
            opt(r.ne_ratio),
            u8::from(r.stale).to_string(),
        ])?;
    }
    wr.flush()?;
    Ok(())
}

pub fn save_trace(path: impl AsRef<Path>, trace: &[IterateRecord]) -> Result<()> {
    write_trace(std::fs::File::create(path)?, trace)
}

pub fn read_trace<R: Read>(r: R) -> Result<Vec<TraceRow>> {
    let mut rd = csv::Reader::from_reader(r);
    let headers = rd.headers()?.clone();
    if headers.iter().ne(TRACE_HEADER.iter().copied()) {
        return Err(Error::invalid(format!("unexpected trace header {headers:?}")));
    }
    let bad = |field: &str, v: &str| Error::invalid(format!("bad {field} value `{v}` in trace"));
    let num = |field: &str, v: &str| v.parse::<f64>().map_err(|_| bad(field, v));
    let maybe = |field: &str, v: &str| {
        if v.is_empty() {
            Ok(None)
        } else {
            num(field, v).map(Some)
        }
    };
    let mut rows = Vec::new();
    for rec in rd.records() {
        let rec = rec?;
        rows.push(TraceRow {
            k: rec[0].parse().map_err(|_| bad("k", &rec[0]))?,
            srnorm: num("srnorm", &rec[1])?,
            snenorm: num("snenorm", &rec[2])?,
            rnorm: maybe("rnorm", &rec[3])?,
            ne_ratio: maybe("ne_ratio", &rec[4])?,
            stale: match &rec[5] {
                "0" => false,
                "1" => true,
                v => return Err(bad("stale_flag", v)),
            },
        });
    }
    Ok(rows)
}

pub fn load_trace(path: impl AsRef<Path>) -> Result<Vec<TraceRow>> {
    read_trace(std::fs::File::open(path)?)
}
