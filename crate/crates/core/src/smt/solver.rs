//! Solver subprocess driver.

use std::io::{Read, Write};
use std::path::{Path, PathBuf};
use std::process::{Command, Stdio};
use std::sync::atomic::{AtomicUsize, Ordering};
use std::sync::Mutex;
use std::thread;
use std::time::{Duration, Instant};

use wait_timeout::ChildExt;

use super::emit::{emit, SmtScript};
use super::result::{CexValue, Counterexample, Verdict, VerificationResult};
use super::sexp::{parse_all, Sexp};
use crate::pogen::ProofObligation;

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct SolverConfig {
    pub solver_path: PathBuf,
    pub timeout_ms: u64,
    /// Arguments placed before the script, which is fed on standard input.
    pub extra_args: Vec<String>,
}

impl SolverConfig {
    /// Configuration with the stdin flags of well-known solvers filled in.
    pub fn new(solver_path: impl Into<PathBuf>, timeout_ms: u64) -> Self {
        let solver_path = solver_path.into();
        let extra_args = default_args(&solver_path);
        SolverConfig { solver_path, timeout_ms, extra_args }
    }
}

fn default_args(path: &Path) -> Vec<String> {
    let stem = path.file_stem().map(|s| s.to_string_lossy().to_lowercase()).unwrap_or_default();
    if stem.starts_with("z3") {
        vec!["-in".into()]
    } else if stem.starts_with("cvc") {
        vec!["--lang=smt2".into(), "--produce-models".into()]
    } else {
        Vec::new()
    }
}

/// First line of `solver --version`, or a note that it could not be run.
pub fn solver_identity(cfg: &SolverConfig) -> String {
    match Command::new(&cfg.solver_path).arg("--version").stdin(Stdio::null()).output() {
        Ok(out) => {
            let text = String::from_utf8_lossy(&out.stdout);
            text.lines().next().map(str::trim).filter(|l| !l.is_empty()).unwrap_or("unknown").to_string()
        }
        Err(e) => format!("unavailable ({}: {e})", cfg.solver_path.display()),
    }
}

fn excerpt(s: &str) -> String {
    const MAX: usize = 400;
    let t = s.trim();
    if t.chars().count() <= MAX {
        t.to_string()
    } else {
        format!("{}...", t.chars().take(MAX).collect::<String>())
    }
}

/// Runs the solver on one script and classifies its answer.
pub fn discharge(script: &SmtScript, cfg: &SolverConfig) -> VerificationResult {
    let start = Instant::now();
    let result = |status, counterexample, diagnostics| VerificationResult {
        po_id: script.po_id.clone(),
        status,
        counterexample,
        solver_time_ms: start.elapsed().as_millis() as u64,
        diagnostics,
    };
    let child = Command::new(&cfg.solver_path)
        .args(&cfg.extra_args)
        .stdin(Stdio::piped())
        .stdout(Stdio::piped())
        .stderr(Stdio::piped())
        .spawn();
    let mut child = match child {
        Ok(c) => c,
        Err(e) => {
            return result(Verdict::Error, None, vec![format!("cannot start `{}`: {e}", cfg.solver_path.display())])
        }
    };
    let mut stdin = child.stdin.take().expect("piped stdin");
    let text = script.text.clone();
    let writer = thread::spawn(move || stdin.write_all(text.as_bytes()));
    let mut stdout = child.stdout.take().expect("piped stdout");
    let reader = thread::spawn(move || {
        let mut s = String::new();
        let _ = stdout.read_to_string(&mut s);
        s
    });
    let mut stderr = child.stderr.take().expect("piped stderr");
    let err_reader = thread::spawn(move || {
        let mut s = String::new();
        let _ = stderr.read_to_string(&mut s);
        s
    });

    // wait_timeout rounds the remaining time down to whole milliseconds and can
    // return slightly early, so keep waiting until the deadline has passed.
    let deadline = start + Duration::from_millis(cfg.timeout_ms);
    let waited = loop {
        match child.wait_timeout(deadline.saturating_duration_since(Instant::now())) {
            Ok(None) if Instant::now() < deadline => continue,
            other => break other,
        }
    };
    let timed_out = matches!(waited, Ok(None));
    if timed_out {
        let _ = child.kill();
        let _ = child.wait();
    }
    let _ = writer.join();
    let out = reader.join().unwrap_or_default();
    let err = err_reader.join().unwrap_or_default();
    if timed_out {
        return result(Verdict::Unknown, None, vec![format!("timeout after {} ms", cfg.timeout_ms)]);
    }
    if let Err(e) = waited {
        return result(Verdict::Error, None, vec![format!("waiting for solver: {e}")]);
    }

    let mut lines = out.lines().map(str::trim).filter(|l| !l.is_empty());
    match lines.next() {
        Some("unsat") => result(Verdict::Discharged, None, Vec::new()),
        Some("sat") => {
            let rest: Vec<&str> = lines.collect();
            match parse_model(&rest.join("\n"), script) {
                Ok(cex) => result(Verdict::Failed, Some(cex), Vec::new()),
                Err(e) => result(Verdict::Error, None, vec![format!("unreadable model: {e}"), excerpt(&out)]),
            }
        }
        Some("unknown") | Some("timeout") => {
            let mut d = vec!["solver answered unknown".to_string()];
            d.extend(lines.next().map(excerpt));
            result(Verdict::Unknown, None, d)
        }
        _ => {
            let mut d = vec!["unexpected solver output".to_string()];
            if !out.trim().is_empty() {
                d.push(excerpt(&out));
            }
            if !err.trim().is_empty() {
                d.push(excerpt(&err));
            }
            result(Verdict::Error, None, d)
        }
    }
}

fn value(s: &Sexp) -> CexValue {
    match s {
        Sexp::Atom(a) if a == "true" => CexValue::Bool(true),
        Sexp::Atom(a) if a == "false" => CexValue::Bool(false),
        Sexp::Atom(a) => a.parse().map(CexValue::Int).unwrap_or_else(|_| CexValue::Term(a.clone())),
        Sexp::List(items) => match items.as_slice() {
            [Sexp::Atom(m), Sexp::Atom(n)] if m == "-" => match n.parse::<i64>() {
                Ok(v) => CexValue::Int(-v),
                Err(_) => CexValue::Term(s.to_string()),
            },
            _ => CexValue::Term(s.to_string()),
        },
    }
}

fn collect_defs(s: &Sexp, script: &SmtScript, out: &mut Counterexample) {
    let Sexp::List(items) = s else { return };
    match items.as_slice() {
        [Sexp::Atom(head), Sexp::Atom(name), Sexp::List(args), _sort, body] if head == "define-fun" => {
            // Emitted names map back to model names; `|x'|` already reads as `x'`.
            let shown = script
                .symbols
                .iter()
                .find(|(_, emitted)| emitted.trim_matches('|') == name)
                .map(|(shown, _)| shown.clone());
            let Some(shown) = shown else { return };
            let v = if args.is_empty() {
                value(body)
            } else {
                CexValue::Term(format!("(lambda {} {body})", Sexp::List(args.clone())))
            };
            out.insert(shown, v);
        }
        _ => items.iter().for_each(|i| collect_defs(i, script, out)),
    }
}

/// Reads a `(get-model)` response into a counterexample over model names.
pub fn parse_model(text: &str, script: &SmtScript) -> Result<Counterexample, String> {
    let mut out = Counterexample::new();
    for s in parse_all(text)? {
        if let Sexp::List(items) = &s {
            if matches!(items.first(), Some(Sexp::Atom(a)) if a == "error") {
                return Err(s.to_string());
            }
        }
        collect_defs(&s, script, &mut out);
    }
    Ok(out)
}

/// Discharges every obligation in its own solver process, using up to `jobs`
/// concurrent workers. Results come back in obligation order.
pub fn discharge_all(pos: &[ProofObligation], cfg: &SolverConfig, jobs: usize) -> Vec<VerificationResult> {
    let scripts: Vec<SmtScript> = pos.iter().map(emit).collect();
    discharge_scripts(&scripts, cfg, jobs)
}

pub fn discharge_scripts(scripts: &[SmtScript], cfg: &SolverConfig, jobs: usize) -> Vec<VerificationResult> {
    let next = AtomicUsize::new(0);
    let slots: Mutex<Vec<Option<VerificationResult>>> = Mutex::new(vec![None; scripts.len()]);
    thread::scope(|s| {
        for _ in 0..jobs.max(1).min(scripts.len().max(1)) {
            s.spawn(|| loop {
                let i = next.fetch_add(1, Ordering::SeqCst);
                let Some(script) = scripts.get(i) else { break };
                let r = discharge(script, cfg);
                slots.lock().unwrap()[i] = Some(r);
            });
        }
    });
    slots.into_inner().unwrap().into_iter().map(|r| r.expect("every slot filled")).collect()
}

#[cfg(test)]
mod tests {
    use super::*;

    fn script() -> SmtScript {
        SmtScript {
            po_id: "m/e/INV".into(),
            text: String::new(),
            symbols: vec![("x".into(), "x".into()), ("x'".into(), "|x'|".into()), ("f".into(), "f".into())],
        }
    }

    #[test]
    fn model_values_are_unmangled() {
        let text = "(\n (define-fun |x'| () Int (- 1))\n (define-fun x () Int 0)\n (define-fun f ((x!0 Int)) Int (ite (= x!0 1) 2 3))\n (define-fun junk () Int 9)\n)";
        let cex = parse_model(text, &script()).unwrap();
        assert_eq!(cex["x'"], CexValue::Int(-1));
        assert_eq!(cex["x"], CexValue::Int(0));
        assert!(matches!(&cex["f"], CexValue::Term(t) if t.starts_with("(lambda ((x!0 Int))")));
        assert!(!cex.contains_key("junk"));
    }

    #[test]
    fn missing_solver_is_an_error_verdict() {
        let cfg = SolverConfig::new("/nonexistent/solver-binary", 1000);
        let r = discharge(&script(), &cfg);
        assert_eq!(r.status, Verdict::Error);
        assert!(r.counterexample.is_none());
        assert!(discharge_all(&[], &cfg, 4).is_empty());
    }

    #[test]
    fn default_arguments_follow_solver_name() {
        assert_eq!(SolverConfig::new("/usr/bin/z3", 1).extra_args, ["-in"]);
        assert!(SolverConfig::new("mysolver", 1).extra_args.is_empty());
    }
}
