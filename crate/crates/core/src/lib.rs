//! Event-B model verifier: a textual model language, proof-obligation
//! generation for machine consistency and refinement, and an SMT-LIB 2
//! backend that discharges obligations through an external solver.

pub mod frontend;
pub mod model;
pub mod pogen;
pub mod report;
pub mod smt;

pub use frontend::{load_files, load_units, Diagnostic, SourceUnit};
pub use model::TypedModel;
pub use pogen::{gen_project_pos, PoKind, PoOptions, ProofObligation};
pub use report::{exit_code, ExitCode, RunReport};
pub use smt::{discharge_all, SolverConfig, Verdict, VerificationResult};
