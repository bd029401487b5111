use std::fmt;
use std::io::Write;
use std::str::FromStr;

use crate::error::{Error, Result};

/// Relative slack on every `lhs <= rhs` comparison.
pub const SLACK: f64 = 1e-10;
/// Accuracy of the dense reference solutions in dimensionless units: their
/// normal-equation ratio is certified only to this level. Bounds whose
/// right-hand side vanishes (zero distortion, consistent systems) are
/// compared with an absolute floor of this size, scaled to the quantity.
pub const ORACLE_FLOOR: f64 = 1e-10;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum BoundId {
    GeomPreserve,
    ResidualSandwich,
    ResidualDirection,
    NormalRatioSketched,
    NormalRatioCross,
    BackwardE1,
    BackwardE2,
    SolutionErrRel,
    SolutionErrLs,
    CombinedResidual,
    AcuteCriterion,
    EtaFUpper,
    PinvWedin,
    PinvNonAcute,
}

impl BoundId {
    pub const ALL: [BoundId; 14] = [
        BoundId::GeomPreserve,
        BoundId::ResidualSandwich,
        BoundId::ResidualDirection,
        BoundId::NormalRatioSketched,
        BoundId::NormalRatioCross,
        BoundId::BackwardE1,
        BoundId::BackwardE2,
        BoundId::SolutionErrRel,
        BoundId::SolutionErrLs,
        BoundId::CombinedResidual,
        BoundId::AcuteCriterion,
        BoundId::EtaFUpper,
        BoundId::PinvWedin,
        BoundId::PinvNonAcute,
    ];

    pub fn as_str(self) -> &'static str {
        match self {
            BoundId::GeomPreserve => "GeomPreserve",
            BoundId::ResidualSandwich => "ResidualSandwich",
            BoundId::ResidualDirection => "ResidualDirection",
            BoundId::NormalRatioSketched => "NormalRatioSketched",
            BoundId::NormalRatioCross => "NormalRatioCross",
            BoundId::BackwardE1 => "BackwardE1",
            BoundId::BackwardE2 => "BackwardE2",
            BoundId::SolutionErrRel => "SolutionErrRel",
            BoundId::SolutionErrLs => "SolutionErrLs",
            BoundId::CombinedResidual => "CombinedResidual",
            BoundId::AcuteCriterion => "AcuteCriterion",
            BoundId::EtaFUpper => "EtaFUpper",
            BoundId::PinvWedin => "PinvWedin",
            BoundId::PinvNonAcute => "PinvNonAcute",
        }
    }
}

impl fmt::Display for BoundId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for BoundId {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        BoundId::ALL
            .into_iter()
            .find(|b| b.as_str() == s.trim())
            .ok_or_else(|| Error::invalid(format!("unknown bound id `{s}`")))
    }
}

/// One evaluated inequality `lhs <= rhs`.
#[derive(Debug, Clone, PartialEq)]
pub struct BoundReport {
    pub id: BoundId,
    pub lhs: f64,
    pub rhs: f64,
    /// `rhs - lhs`
    pub margin: f64,
    /// `lhs <= rhs (1 + SLACK) + floor`
    pub passed: bool,
    /// Absolute rounding allowance, zero unless set by the check.
    pub floor: f64,
    pub note: Option<String>,
    /// A failure contradicts a proven inequality. False for sufficient-only criteria
    /// whose hypothesis simply did not hold.
    pub conclusive: bool,
}

impl BoundReport {
    pub fn new(id: BoundId, lhs: f64, rhs: f64) -> Self {
        BoundReport {
            id,
            lhs,
            rhs,
            margin: rhs - lhs,
            passed: compare(lhs, rhs, 0.0),
            floor: 0.0,
            note: None,
            conclusive: true,
        }
    }

    /// A bound whose hypotheses do not hold: `rhs = +inf`, passes.
    pub fn vacuous(id: BoundId, lhs: f64, why: impl Into<String>) -> Self {
        BoundReport::new(id, if lhs.is_nan() { 0.0 } else { lhs }, f64::INFINITY).with_note(why)
    }

    pub fn with_floor(mut self, floor: f64) -> Self {
        self.floor = floor;
        self.passed = compare(self.lhs, self.rhs, floor);
        self
    }

    pub fn with_note(mut self, note: impl Into<String>) -> Self {
        let note = note.into();
        self.note = Some(match self.note.take() {
            Some(prev) => format!("{prev}; {note}"),
            None => note,
        });
        self
    }

    pub fn is_vacuous(&self) -> bool {
        self.rhs == f64::INFINITY
    }

    /// A failed comparison that contradicts a theorem.
    pub fn violated(&self) -> bool {
        !self.passed && self.conclusive
    }
}

fn compare(lhs: f64, rhs: f64, floor: f64) -> bool {
    if rhs == f64::INFINITY {
        !lhs.is_nan()
    } else {
        lhs <= rhs * (1.0 + SLACK) + floor
    }
}

/// Identifies the run a batch of reports belongs to.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct ReportContext {
    pub seed: u64,
    pub kind: String,
    pub matrix: String,
    pub d: usize,
}

pub const REPORT_HEADER: [&str; 10] = [
    "bound_id", "lhs", "rhs", "margin", "passed", "seed", "kind", "matrix", "d", "note",
];

/// Writes the CSV header followed by one row per report.
pub fn write_reports<W: Write>(
    w: W,
    batches: &[(ReportContext, Vec<BoundReport>)],
) -> Result<()> {
    let mut wr = csv::Writer::from_writer(w);
    wr.write_record(REPORT_HEADER)?;
    for (ctx, reports) in batches {
        for r in reports {
            wr.write_record([
                r.id.as_str().to_string(),
                r.lhs.to_string(),
                r.rhs.to_string(),
                r.margin.to_string(),
                r.passed.to_string(),
                ctx.seed.to_string(),
                ctx.kind.clone(),
                ctx.matrix.clone(),
                ctx.d.to_string(),
                r.note.clone().unwrap_or_default(),
            ])?;
        }
    }
    wr.flush()?;
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn pass_rule_uses_relative_slack() {
        assert!(BoundReport::new(BoundId::GeomPreserve, 1.0 + 5e-11, 1.0).passed);
        assert!(!BoundReport::new(BoundId::GeomPreserve, 1.0 + 5e-10, 1.0).passed);
        assert!(BoundReport::new(BoundId::GeomPreserve, 0.0, 0.0).passed);
        assert!(BoundReport::new(BoundId::GeomPreserve, 1e300, f64::INFINITY).passed);
        assert!(!BoundReport::new(BoundId::GeomPreserve, f64::NAN, 1.0).passed);
        assert!(!BoundReport::new(BoundId::GeomPreserve, 1e-12, 0.0).passed);
        assert!(BoundReport::new(BoundId::GeomPreserve, 1e-12, 0.0).with_floor(1e-10).passed);
    }

    #[test]
    fn ids_roundtrip() {
        for id in BoundId::ALL {
            assert_eq!(id.as_str().parse::<BoundId>().unwrap(), id);
        }
    }

    #[test]
    fn csv_has_one_row_per_report() {
        let ctx = ReportContext {
            seed: 3,
            kind: "srht".into(),
            matrix: "m".into(),
            d: 8,
        };
        let reps = vec![
            BoundReport::new(BoundId::BackwardE1, 0.5, 1.0),
            BoundReport::vacuous(BoundId::BackwardE2, 0.0, "x_s = 0"),
        ];
        let mut out = Vec::new();
        write_reports(&mut out, &[(ctx, reps)]).unwrap();
        let text = String::from_utf8(out).unwrap();
        let lines: Vec<&str> = text.lines().collect();
        assert_eq!(lines.len(), 3);
        assert!(lines[0].starts_with("bound_id,lhs,rhs,margin,passed,seed,kind,matrix,d"));
        assert!(lines[2].contains("inf"));
    }
}
