use std::io::Write;
use std::path::{Path, PathBuf};
use std::process::ExitCode as ProcessExit;

use clap::{Args, Parser, Subcommand};
use ebv_core::frontend::{has_errors, Diagnostic};
use ebv_core::pogen::{gen_project_pos, PoOptions, ProofObligation};
use ebv_core::report::{exit_code, ExitCode, RunReport};
use ebv_core::smt::{discharge_scripts, emit, solver_identity, SmtScript, SolverConfig, Verdict};
use ebv_core::{load_files, TypedModel};

#[derive(Parser)]
#[command(name = "ebv", version, about = "Proof-obligation generator and verifier for Event-B models")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Generate and discharge all proof obligations.
    Verify(VerifyArgs),
    /// List proof-obligation ids in generation order without solving.
    Pos(PosArgs),
}

#[derive(Args)]
struct PosArgs {
    /// Model files (`.eb`).
    files: Vec<PathBuf>,
    /// Omit variant lower-bound (NAT) obligations.
    #[arg(long)]
    no_nat_po: bool,
}

#[derive(Args)]
struct VerifyArgs {
    /// Model files (`.eb`).
    files: Vec<PathBuf>,
    /// Per-obligation solver timeout in milliseconds.
    #[arg(long, default_value_t = 10_000, value_name = "MS")]
    timeout: u64,
    /// Number of concurrent solver processes.
    #[arg(long, value_name = "N")]
    jobs: Option<usize>,
    /// Print the run report as JSON.
    #[arg(long)]
    json: bool,
    /// Only discharge obligations whose id matches this glob.
    #[arg(long, value_name = "GLOB")]
    filter: Option<String>,
    /// Solver executable; reads SMT-LIB 2 on standard input.
    #[arg(long, env = "EBV_SOLVER", default_value = "z3", value_name = "PATH")]
    solver: PathBuf,
    /// Write every script sent to the solver into this directory.
    #[arg(long, value_name = "DIR")]
    dump_smt: Option<PathBuf>,
    /// Omit variant lower-bound (NAT) obligations.
    #[arg(long)]
    no_nat_po: bool,
}

fn main() -> ProcessExit {
    let cli = match Cli::try_parse() {
        Ok(c) => c,
        Err(e) => {
            let _ = e.print();
            return if e.use_stderr() { code(ExitCode::Setup) } else { code(ExitCode::Success) };
        }
    };
    code(match cli.command {
        Command::Verify(args) => cmd_verify(args),
        Command::Pos(args) => cmd_pos(args),
    })
}

fn code(c: ExitCode) -> ProcessExit {
    ProcessExit::from(c as u8)
}

fn report_diagnostics(diags: &[Diagnostic]) {
    let mut err = std::io::stderr().lock();
    for d in diags {
        let _ = writeln!(err, "{d}");
    }
}

/// Loads the project, printing diagnostics. `None` on usage or model errors.
fn load(files: &[PathBuf]) -> Option<TypedModel> {
    if files.is_empty() {
        eprintln!("error: no model files given");
        return None;
    }
    let (model, diags) = load_files(files);
    report_diagnostics(&diags);
    (!has_errors(&diags)).then_some(model)
}

fn cmd_pos(args: PosArgs) -> ExitCode {
    let Some(model) = load(&args.files) else { return ExitCode::Setup };
    let pos = gen_project_pos(&model, PoOptions { nat: !args.no_nat_po });
    let mut out = std::io::stdout().lock();
    for po in &pos {
        let _ = writeln!(out, "{}", po.id);
    }
    ExitCode::Success
}

fn project_name(files: &[PathBuf]) -> String {
    let stems: Vec<String> =
        files.iter().map(|f| f.file_stem().map(|s| s.to_string_lossy().into_owned()).unwrap_or_default()).collect();
    stems.join("+")
}

fn dump_scripts(dir: &Path, scripts: &[SmtScript]) -> std::io::Result<()> {
    std::fs::create_dir_all(dir)?;
    for s in scripts {
        std::fs::write(dir.join(format!("{}.smt2", s.po_id.replace('/', "__"))), &s.text)?;
    }
    Ok(())
}

fn cmd_verify(args: VerifyArgs) -> ExitCode {
    let Some(model) = load(&args.files) else { return ExitCode::Setup };
    let mut pos: Vec<ProofObligation> = gen_project_pos(&model, PoOptions { nat: !args.no_nat_po });
    if let Some(f) = &args.filter {
        let pattern = match glob::Pattern::new(f) {
            Ok(p) => p,
            Err(e) => {
                eprintln!("error: invalid --filter pattern `{f}`: {e}");
                return ExitCode::Setup;
            }
        };
        pos.retain(|po| pattern.matches(&po.id));
    }
    let scripts: Vec<SmtScript> = pos.iter().map(emit).collect();
    if let Some(dir) = &args.dump_smt {
        if let Err(e) = dump_scripts(dir, &scripts) {
            eprintln!("error: cannot write scripts to `{}`: {e}", dir.display());
            return ExitCode::Setup;
        }
    }
    let cfg = SolverConfig::new(&args.solver, args.timeout);
    let jobs = args.jobs.unwrap_or_else(|| std::thread::available_parallelism().map(|n| n.get()).unwrap_or(1));
    let results = discharge_scripts(&scripts, &cfg, jobs.max(1));
    let report = RunReport::new(project_name(&args.files), &pos, &results, solver_identity(&cfg));

    let mut out = std::io::stdout().lock();
    if args.json {
        let _ = writeln!(out, "{}", serde_json::to_string_pretty(&report).expect("report serialises"));
    } else {
        for (rec, res) in report.pos.iter().zip(&results) {
            let _ = writeln!(out, "{:<10} {:<4} {} ({} ms)", rec.status, rec.kind, rec.id, rec.time_ms);
            if let Some(cex) = &rec.counterexample {
                let vals: Vec<String> = cex.iter().map(|(k, v)| format!("{k} = {v}")).collect();
                let _ = writeln!(out, "           counterexample: {}", vals.join(", "));
            }
            if rec.status != Verdict::Discharged {
                for d in &res.diagnostics {
                    let _ = writeln!(out, "           {d}");
                }
            }
        }
        let s = &report.summary;
        let _ = writeln!(
            out,
            "{} obligations: {} discharged, {} failed, {} unknown, {} error ({} ms solver time)",
            report.pos.len(),
            s.discharged,
            s.failed,
            s.unknown,
            s.error,
            s.total_ms
        );
    }
    exit_code(report.pos.iter().map(|r| r.status), false)
}
