use std::collections::BTreeMap;
use std::fmt;

use serde::{Deserialize, Serialize};

/// Verdict for one obligation.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Verdict {
    /// The solver refuted the negated goal.
    Discharged,
    /// The solver found a counterexample.
    Failed,
    /// Timeout or an `unknown` answer.
    Unknown,
    /// The solver could not be run or its output was not understood.
    Error,
}

impl Verdict {
    pub const ALL: [Verdict; 4] = [Verdict::Discharged, Verdict::Failed, Verdict::Unknown, Verdict::Error];

    pub fn as_str(self) -> &'static str {
        match self {
            Verdict::Discharged => "discharged",
            Verdict::Failed => "failed",
            Verdict::Unknown => "unknown",
            Verdict::Error => "error",
        }
    }
}

impl fmt::Display for Verdict {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

/// A value in a solver model. Function interpretations are kept as terms.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum CexValue {
    Int(i64),
    Bool(bool),
    Term(String),
}

impl fmt::Display for CexValue {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            CexValue::Int(v) => write!(f, "{v}"),
            CexValue::Bool(b) => write!(f, "{b}"),
            CexValue::Term(t) => f.write_str(t),
        }
    }
}

/// Counterexample keyed by model names; primed variables end in `'`.
pub type Counterexample = BTreeMap<String, CexValue>;

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct VerificationResult {
    pub po_id: String,
    pub status: Verdict,
    pub counterexample: Option<Counterexample>,
    pub solver_time_ms: u64,
    pub diagnostics: Vec<String>,
}
