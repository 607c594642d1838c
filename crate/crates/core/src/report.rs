//! Run reports and exit-code policy.

use serde::{Deserialize, Serialize};

use crate::pogen::{PoKind, ProofObligation};
use crate::smt::{Counterexample, Verdict, VerificationResult};

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct PoRecord {
    pub id: String,
    pub kind: PoKind,
    pub status: Verdict,
    pub time_ms: u64,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub counterexample: Option<Counterexample>,
}

#[derive(Debug, Clone, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct Summary {
    pub discharged: usize,
    pub failed: usize,
    pub unknown: usize,
    pub error: usize,
    pub total_ms: u64,
}

impl Summary {
    pub fn tally(records: &[PoRecord]) -> Self {
        let mut s = Summary::default();
        for r in records {
            match r.status {
                Verdict::Discharged => s.discharged += 1,
                Verdict::Failed => s.failed += 1,
                Verdict::Unknown => s.unknown += 1,
                Verdict::Error => s.error += 1,
            }
            s.total_ms += r.time_ms;
        }
        s
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct RunReport {
    pub project: String,
    pub pos: Vec<PoRecord>,
    pub summary: Summary,
    pub version: String,
    pub solver: String,
}

impl RunReport {
    /// Pairs obligations with their results, which must be in the same order.
    pub fn new(
        project: impl Into<String>,
        pos: &[ProofObligation],
        results: &[VerificationResult],
        solver: impl Into<String>,
    ) -> Self {
        let records: Vec<PoRecord> = pos
            .iter()
            .zip(results)
            .map(|(po, r)| PoRecord {
                id: po.id.clone(),
                kind: po.kind,
                status: r.status,
                time_ms: r.solver_time_ms,
                counterexample: r.counterexample.clone(),
            })
            .collect();
        let summary = Summary::tally(&records);
        RunReport {
            project: project.into(),
            pos: records,
            summary,
            version: env!("CARGO_PKG_VERSION").to_string(),
            solver: solver.into(),
        }
    }

    pub fn exit_code(&self) -> ExitCode {
        exit_code(self.pos.iter().map(|r| r.status), false)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord)]
pub enum ExitCode {
    Success = 0,
    Failed = 1,
    Unknown = 2,
    Setup = 3,
}

/// Exit status of a run: frontend or solver-setup errors first, then any
/// failed obligation, then any unknown one.
pub fn exit_code(statuses: impl IntoIterator<Item = Verdict>, diagnostics: bool) -> ExitCode {
    if diagnostics {
        return ExitCode::Setup;
    }
    let all: Vec<Verdict> = statuses.into_iter().collect();
    if all.contains(&Verdict::Failed) {
        ExitCode::Failed
    } else if all.contains(&Verdict::Error) {
        ExitCode::Setup
    } else if all.contains(&Verdict::Unknown) {
        ExitCode::Unknown
    } else {
        ExitCode::Success
    }
}
