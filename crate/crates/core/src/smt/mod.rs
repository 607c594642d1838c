//! SMT-LIB 2 backend: script emission, solver processes and verdicts.

mod emit;
mod eval;
mod result;
mod sexp;
mod solver;

pub use emit::{emit, mangle, render_expr, SmtScript};
pub use eval::{confirm_counterexample, eval, is_ground, EvalError, Valuation, Value};
pub use result::{CexValue, Counterexample, Verdict, VerificationResult};
pub use sexp::{parse_all, Sexp};
pub use solver::{discharge, discharge_all, discharge_scripts, parse_model, solver_identity, SolverConfig};
