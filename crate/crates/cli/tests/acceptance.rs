//! Acceptance gate. Each criterion prints one PASS or FAIL line; the process
//! exits non-zero if any criterion fails.

use std::collections::BTreeMap;
use std::path::{Path, PathBuf};
use std::process::Command;
use std::time::{Duration, Instant};

use ebv_core::frontend::{has_errors, load_units, SourceUnit};
use ebv_core::model::{BinOp, Expr, Sort, SymKind, Symbol, TypedModel, UnOp};
use ebv_core::pogen::{complete_frame, gen_project_pos, Goal, Hypothesis, PoKind, PoOptions, ProofObligation};
use ebv_core::smt::{confirm_counterexample, discharge_all, eval, is_ground, SolverConfig, Valuation, Value, Verdict};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

const TIMEOUT_MS: u64 = 10_000;
const CORPUS_WALL_LIMIT: Duration = Duration::from_secs(300);
const ORACLE_CASES: usize = 500;
const MIN_MUTANTS: usize = 10;

/// Model file, expected machine count, pinned obligation count.
const CORPUS: &[(&str, usize, usize)] = &[
    ("binary_search.eb", 3, 52),
    ("minimum.eb", 2, 26),
    ("search.eb", 2, 17),
    ("square_root.eb", 3, 33),
    ("inverse.eb", 2, 34),
];

type Outcome = Result<String, String>;
type Criterion = (&'static str, fn() -> Outcome);

fn corpus_dir() -> PathBuf {
    Path::new(env!("CARGO_MANIFEST_DIR")).join("../../corpus")
}

fn solver() -> SolverConfig {
    let path = std::env::var("EBV_SOLVER").unwrap_or_else(|_| "z3".into());
    SolverConfig::new(path, TIMEOUT_MS)
}

fn jobs() -> usize {
    std::thread::available_parallelism().map(|n| n.get()).unwrap_or(4).min(8)
}

fn read_corpus(file: &str) -> String {
    std::fs::read_to_string(corpus_dir().join(file)).unwrap_or_else(|e| panic!("{file}: {e}"))
}

fn load_text(name: &str, text: &str) -> Result<TypedModel, String> {
    let (model, diags) = load_units(&[SourceUnit::new(name, text)]);
    if has_errors(&diags) {
        return Err(diags.iter().map(|d| d.to_string()).collect::<Vec<_>>().join("; "));
    }
    Ok(model)
}

fn ebv(args: &[&str]) -> std::process::Output {
    Command::new(env!("CARGO_BIN_EXE_ebv")).args(args).output().expect("run ebv")
}

fn corpus_paths() -> Vec<String> {
    CORPUS.iter().map(|(f, _, _)| corpus_dir().join(f).display().to_string()).collect()
}

fn corpus_verification() -> Outcome {
    let start = Instant::now();
    let mut notes = Vec::new();
    for &(file, machines, pinned) in CORPUS {
        let model = load_text(file, &read_corpus(file))?;
        if model.machines.len() != machines {
            return Err(format!("{file}: {} machines, expected {machines}", model.machines.len()));
        }
        let path = corpus_dir().join(file).display().to_string();
        let out = ebv(&["verify", &path, "--json", "--timeout", &TIMEOUT_MS.to_string()]);
        let report: serde_json::Value =
            serde_json::from_slice(&out.stdout).map_err(|e| format!("{file}: bad JSON report: {e}"))?;
        let total = report["pos"].as_array().map_or(0, Vec::len);
        let s = &report["summary"];
        if s["discharged"] != total || total == 0 {
            let bad: Vec<String> = report["pos"]
                .as_array()
                .into_iter()
                .flatten()
                .filter(|p| p["status"] != "discharged")
                .map(|p| format!("{} {}", p["id"], p["status"]))
                .collect();
            return Err(format!("{file}: {}", bad.join(", ")));
        }
        if out.status.code() != Some(0) {
            return Err(format!("{file}: exit code {:?}", out.status.code()));
        }
        if total != pinned {
            return Err(format!("{file}: {total} obligations, pinned {pinned}"));
        }
        notes.push(format!("{file} {total}"));
    }
    let wall = start.elapsed();
    if wall > CORPUS_WALL_LIMIT {
        return Err(format!("wall time {wall:?} exceeds {CORPUS_WALL_LIMIT:?}"));
    }
    Ok(format!("all discharged in {:.1}s ({})", wall.as_secs_f64(), notes.join(", ")))
}

fn po_count_laws() -> Outcome {
    let mut checked = 0;
    for &(file, _, _) in CORPUS {
        let model = load_text(file, &read_corpus(file))?;
        let pos = gen_project_pos(&model, PoOptions::default());
        for m in &model.machines {
            let prefix = format!("{}/", m.name);
            let count = |k: PoKind| pos.iter().filter(|p| p.kind == k && p.id.starts_with(&prefix)).count();
            let events = m.events.len();
            let invs = m.invariants.len();
            let framed = m.events.iter().filter(|e| !e.action.frame.is_empty()).count();
            let variant_events = if m.variant.is_some() {
                m.events.iter().filter(|e| e.status.needs_variant()).count()
            } else {
                0
            };
            let laws = [
                ("INV", count(PoKind::Inv), (events - 1) * invs),
                ("INIT", count(PoKind::Init), invs),
                ("FIS", count(PoKind::Fis), framed),
                ("VAR+NAT", count(PoKind::Var) + count(PoKind::Nat), 2 * variant_events),
            ];
            for (law, got, want) in laws {
                if got != want {
                    return Err(format!("{}: #{law} = {got}, expected {want}", m.name));
                }
            }
            checked += 1;
        }
    }
    Ok(format!("{checked} machines"))
}

struct Mutant {
    name: &'static str,
    file: &'static str,
    from: &'static str,
    to: &'static str,
    kind: PoKind,
}

const COUNTER: &str = "context cc constants n : int axioms @a n >= 0 end
machine counter sees cc variables x : int invariants @inv1 x >= 0 events
  event initialisation then @a x := n end
  event tick then @a x := x + 1 end
end
";

const MUTANTS: &[Mutant] = &[
    Mutant {
        name: "inc loses guard f(r) < v",
        file: "binary_search.eb",
        from: "      @grd1 f(r) < v\n    then\n      @act1 p := r + 1\n      @act2 r :∈ r + 1..q",
        to: "      @grd1 true\n    then\n      @act1 p := r + 1\n      @act2 r :∈ r + 1..q",
        kind: PoKind::Inv,
    },
    Mutant {
        name: "variant q - p becomes p - q",
        file: "binary_search.eb",
        from: "f(k) = v\nvariant q - p",
        to: "f(k) = v\nvariant p - q",
        kind: PoKind::Var,
    },
    Mutant {
        name: "initialisation sets p to 0",
        file: "binary_search.eb",
        from: "      @act1 p := 1\n      @act2 q := n\n      @act3 r :∈ 1..n",
        to: "      @act1 p := 0\n      @act2 q := n\n      @act3 r :∈ 1..n",
        kind: PoKind::Init,
    },
    Mutant {
        name: "counter decrements against x >= 0",
        file: "counter",
        from: "@a x := x + 1",
        to: "@a x := x - 1",
        kind: PoKind::Inv,
    },
    Mutant {
        name: "witness x = r weakened to x >= r",
        file: "square_root.eb",
        from: "@x : x = r",
        to: "@x : x >= r",
        kind: PoKind::Grd,
    },
    Mutant {
        name: "inc range widened to r + 1..q + 1",
        file: "binary_search.eb",
        from: "@act2 r :∈ r + 1..q",
        to: "@act2 r :∈ r + 1..q + 1",
        kind: PoKind::Inv,
    },
    Mutant {
        name: "square-root guard relaxed to n + 1",
        file: "square_root.eb",
        from: "@grd1 (r + 1) * (r + 1) <= n",
        to: "@grd1 (r + 1) * (r + 1) <= n + 1",
        kind: PoKind::Inv,
    },
    Mutant {
        name: "square-root variant n + r",
        file: "square_root.eb",
        from: "r * r <= n\nvariant n - r",
        to: "r * r <= n\nvariant n + r",
        kind: PoKind::Var,
    },
    Mutant {
        name: "theorem strengthened to n > 1",
        file: "binary_search.eb",
        from: "@thm1 n > 0",
        to: "@thm1 n > 1",
        kind: PoKind::Thm,
    },
    Mutant {
        name: "search final loses guard f(r) = v",
        file: "search.eb",
        from: "@grd1 f(r) = v",
        to: "@grd1 true",
        kind: PoKind::Sim,
    },
    Mutant {
        name: "search variant n + r",
        file: "search.eb",
        from: "variant n - r",
        to: "variant n + r",
        kind: PoKind::Var,
    },
    Mutant {
        name: "midpoint rounds down in bs_ref2 inc",
        file: "binary_search.eb",
        from: "@act2 r := (r + 1 + q) / 2",
        to: "@act2 r := (r + q) / 2",
        kind: PoKind::Sim,
    },
    Mutant {
        name: "bs_ref2 final guard weakened to f(r) <= v",
        file: "binary_search.eb",
        from: "      @grd1 f(r) = v\n  end\n  event inc refines inc",
        to: "      @grd1 f(r) <= v\n  end\n  event inc refines inc",
        kind: PoKind::Grd,
    },
    Mutant {
        name: "unsatisfiable witness k = p and k < 0",
        file: "minimum.eb",
        from: "@k : k = p",
        to: "@k : k = p and k < 0",
        kind: PoKind::Wfis,
    },
    Mutant {
        name: "dec range emptied to r..r - 1",
        file: "binary_search.eb",
        from: "@act2 r :∈ p..r - 1",
        to: "@act2 r :∈ r..r - 1",
        kind: PoKind::Fis,
    },
];

fn mutation_suite() -> Outcome {
    let cfg = solver();
    let mut confirmed = 0;
    for m in MUTANTS {
        let original = if m.file == "counter" { COUNTER.to_string() } else { read_corpus(m.file) };
        if original.matches(m.from).count() != 1 {
            return Err(format!("{}: edit site is not unique", m.name));
        }
        let text = original.replacen(m.from, m.to, 1);
        let model = load_text(m.file, &text).map_err(|e| format!("{}: rejected by frontend: {e}", m.name))?;
        let pos = gen_project_pos(&model, PoOptions::default());
        let results = discharge_all(&pos, &cfg, jobs());
        let failed: Vec<(&ProofObligation, _)> =
            pos.iter().zip(&results).filter(|(_, r)| r.status == Verdict::Failed).collect();
        if !failed.iter().any(|(po, _)| po.kind == m.kind) {
            let got: Vec<&str> = failed.iter().map(|(po, _)| po.id.as_str()).collect();
            return Err(format!("{}: no failed {} obligation (failed: {got:?})", m.name, m.kind));
        }
        for (po, r) in &failed {
            let Some(cex) = &r.counterexample else {
                return Err(format!("{}: {} failed without counterexample", m.name, po.id));
            };
            if is_ground(po) {
                match confirm_counterexample(po, cex) {
                    Ok(true) => confirmed += 1,
                    other => return Err(format!("{}: counterexample for {} not confirmed: {other:?}", m.name, po.id)),
                }
            }
        }
    }
    if MUTANTS.len() < MIN_MUTANTS {
        return Err(format!("only {} mutants", MUTANTS.len()));
    }

    // The counter mutant end to end: exit code 1 and a printed counterexample.
    let dir = std::env::temp_dir().join(format!("ebv-acceptance-{}", std::process::id()));
    std::fs::create_dir_all(&dir).map_err(|e| e.to_string())?;
    let path = dir.join("counter_mutant.eb");
    std::fs::write(&path, COUNTER.replace("x := x + 1", "x := x - 1")).map_err(|e| e.to_string())?;
    let out = ebv(&["verify", path.to_str().unwrap()]);
    let stdout = String::from_utf8_lossy(&out.stdout);
    let _ = std::fs::remove_dir_all(&dir);
    if out.status.code() != Some(1) || !(stdout.contains("x = 0") && stdout.contains("x' = -1")) {
        return Err(format!("counter mutant via CLI: exit {:?}\n{stdout}", out.status.code()));
    }
    Ok(format!("{} mutants killed, {confirmed} ground counterexamples confirmed", MUTANTS.len()))
}

struct Gen {
    rng: ChaCha8Rng,
    ints: Vec<Symbol>,
    bools: Vec<Symbol>,
}

impl Gen {
    fn term(&mut self, depth: u32) -> Expr {
        if depth == 0 || self.rng.random_bool(0.35) {
            return if self.rng.random_bool(0.7) {
                let i = self.rng.random_range(0..self.ints.len());
                Expr::Sym(self.ints[i].clone())
            } else {
                Expr::int(self.rng.random_range(-2..=4))
            };
        }
        match self.rng.random_range(0..6) {
            0 => Expr::bin(BinOp::Add, self.term(depth - 1), self.term(depth - 1)),
            1 => Expr::bin(BinOp::Sub, self.term(depth - 1), self.term(depth - 1)),
            2 => Expr::bin(BinOp::Mul, self.term(depth - 1), self.term(depth - 1)),
            3 => Expr::bin(BinOp::Div, self.term(depth - 1), Expr::int(self.rng.random_range(1..=3))),
            4 => Expr::bin(BinOp::Mod, self.term(depth - 1), Expr::int(self.rng.random_range(1..=3))),
            _ => Expr::neg(self.term(depth - 1)),
        }
    }

    fn pred(&mut self, depth: u32) -> Expr {
        if depth == 0 || self.rng.random_bool(0.4) {
            if !self.bools.is_empty() && self.rng.random_bool(0.15) {
                let i = self.rng.random_range(0..self.bools.len());
                return Expr::Sym(self.bools[i].clone());
            }
            let ops = [BinOp::Lt, BinOp::Le, BinOp::Gt, BinOp::Ge, BinOp::Eq, BinOp::Neq];
            let op = ops[self.rng.random_range(0..ops.len())];
            return Expr::bin(op, self.term(2), self.term(2));
        }
        match self.rng.random_range(0..6) {
            0 => Expr::And(vec![self.pred(depth - 1), self.pred(depth - 1)]),
            1 => Expr::Or(vec![self.pred(depth - 1), self.pred(depth - 1)]),
            2 => Expr::Unary(UnOp::Not, Box::new(self.pred(depth - 1))),
            3 => Expr::bin(BinOp::Implies, self.pred(depth - 1), self.pred(depth - 1)),
            4 => Expr::bin(BinOp::Iff, self.pred(depth - 1), self.pred(depth - 1)),
            _ => Expr::bin(BinOp::Eq, self.pred(depth - 1), self.pred(depth - 1)),
        }
    }
}

fn random_po(i: usize, rng: &mut ChaCha8Rng) -> ProofObligation {
    let kinds = [SymKind::Var, SymKind::Primed, SymKind::Param, SymKind::Const];
    let n_int = rng.random_range(1..=3);
    let ints: Vec<Symbol> = (0..n_int).map(|k| Symbol::new(format!("x{k}"), kinds[rng.random_range(0..4)], Sort::Int)).collect();
    let bools: Vec<Symbol> =
        if rng.random_bool(0.3) { vec![Symbol::new("b", SymKind::Var, Sort::Bool)] } else { Vec::new() };
    let mut g = Gen { rng: ChaCha8Rng::seed_from_u64(rng.random()), ints: ints.clone(), bools };
    let mut hyps: Vec<Hypothesis> = ints
        .iter()
        .map(|s| {
            let x = Expr::Sym(s.clone());
            Hypothesis::new(
                format!("bound:{}", s.display_name()),
                Expr::And(vec![Expr::bin(BinOp::Ge, x.clone(), Expr::int(0)), Expr::bin(BinOp::Le, x, Expr::int(3))]),
            )
        })
        .collect();
    for h in 0..g.rng.random_range(0..=2) {
        hyps.push(Hypothesis::new(format!("h{h}"), g.pred(2)));
    }
    // Weakening a hypothesis into the goal now and then keeps valid cases common.
    let goal = if hyps.len() > ints.len() && g.rng.random_bool(0.3) {
        Expr::Or(vec![hyps.last().unwrap().expr.clone(), g.pred(1)])
    } else {
        g.pred(3)
    };
    ProofObligation::new(format!("oracle/{i}/INV"), PoKind::Inv, hyps, Goal::Plain(goal), vec![])
}

/// Enumerates every valuation with integers in [0, 3].
fn brute_force_valid(po: &ProofObligation) -> bool {
    let Goal::Plain(goal) = &po.goal else { unreachable!() };
    let syms = &po.symbols;
    let sizes: Vec<i128> = syms.iter().map(|s| if s.sort == Sort::Bool { 2 } else { 4 }).collect();
    let total: i128 = sizes.iter().product();
    for mut code in 0..total {
        let mut env = Valuation::new();
        for (s, size) in syms.iter().zip(&sizes) {
            let v = code % size;
            code /= size;
            env.insert(s.display_name(), if s.sort == Sort::Bool { Value::Bool(v == 1) } else { Value::Int(v) });
        }
        let holds = |e: &Expr| eval(e, &env).expect("ground") == Value::Bool(true);
        if po.hypotheses.iter().all(|h| holds(&h.expr)) && !holds(goal) {
            return false;
        }
    }
    true
}

fn finite_domain_oracle() -> Outcome {
    let mut rng = ChaCha8Rng::seed_from_u64(0x00eb_0a11);
    let pos: Vec<ProofObligation> = (0..ORACLE_CASES).map(|i| random_po(i, &mut rng)).collect();
    let results = discharge_all(&pos, &solver(), jobs());
    let mut valid = 0;
    for (po, r) in pos.iter().zip(&results) {
        let expected = brute_force_valid(po);
        valid += expected as usize;
        let agrees = match r.status {
            Verdict::Discharged => expected,
            Verdict::Failed => !expected,
            _ => false,
        };
        if !agrees {
            return Err(format!("{}: solver {} but brute force says valid={expected}", po.id, r.status));
        }
        if let (Verdict::Failed, Some(cex)) = (r.status, &r.counterexample) {
            if confirm_counterexample(po, cex) != Ok(true) {
                return Err(format!("{}: counterexample not confirmed", po.id));
            }
        }
    }
    Ok(format!("{ORACLE_CASES}/{ORACLE_CASES} agree ({valid} valid, {} invalid)", ORACLE_CASES - valid))
}

fn strip_times(v: &mut serde_json::Value) {
    match v {
        serde_json::Value::Object(map) => {
            for (k, x) in map.iter_mut() {
                if k == "time_ms" || k == "total_ms" {
                    *x = serde_json::Value::Null;
                } else {
                    strip_times(x);
                }
            }
        }
        serde_json::Value::Array(items) => items.iter_mut().for_each(strip_times),
        _ => {}
    }
}

fn determinism() -> Outcome {
    let paths = corpus_paths();
    let run = |jobs: &str| -> Result<serde_json::Value, String> {
        let mut args = vec!["verify", "--json", "--jobs", jobs];
        args.extend(paths.iter().map(String::as_str));
        let out = ebv(&args);
        let mut v: serde_json::Value = serde_json::from_slice(&out.stdout).map_err(|e| e.to_string())?;
        strip_times(&mut v);
        Ok(v)
    };
    let a = run("8")?;
    let b = run("8")?;
    if a != b {
        return Err("two --json runs differ outside time fields".into());
    }
    let statuses = |v: &serde_json::Value| -> Vec<(String, String)> {
        v["pos"].as_array().into_iter().flatten().map(|p| (p["id"].to_string(), p["status"].to_string())).collect()
    };
    let c = run("1")?;
    if statuses(&a) != statuses(&c) {
        return Err("--jobs 1 and --jobs 8 status sequences differ".into());
    }
    Ok(format!("{} obligations identical across runs and job counts", statuses(&a).len()))
}

fn frame_semantics() -> Outcome {
    let mut pos = Vec::new();
    for &(file, _, _) in CORPUS {
        let model = load_text(file, &read_corpus(file))?;
        for m in &model.machines {
            for e in &m.events {
                let ba = complete_frame(&e.action, &m.variables);
                for d in m.variables.iter().filter(|d| !e.action.frame.contains(&d.name)) {
                    let goal = Expr::eq(Expr::primed(&d.name, d.sort), Expr::var(&d.name, d.sort));
                    pos.push(ProofObligation::new(
                        format!("{}/{}/{}/FRAME", m.name, e.name, d.name),
                        PoKind::Inv,
                        vec![Hypothesis::new(format!("ba:{}", e.name), ba.clone())],
                        Goal::Plain(goal),
                        vec![],
                    ));
                }
            }
        }
    }
    let results = discharge_all(&pos, &solver(), jobs());
    if let Some((po, r)) = pos.iter().zip(&results).find(|(_, r)| r.status != Verdict::Discharged) {
        return Err(format!("{}: {}", po.id, r.status));
    }
    if pos.is_empty() {
        return Err("no unframed variables found".into());
    }
    Ok(format!("{} frame sequents discharged", pos.len()))
}

const COPY_MODEL: &str = "context c constants n : int f : fun axioms @a1 n >= 1 end
machine a sees c variables x : int y : int invariants @i1 x >= 0 @i2 y in 0..n events
  event initialisation then @a x := 0 @b y := 0 end
  event step any k : int where @g1 k > 0 @g2 y < n @g3 f(k) >= x then @a x :| x' = x + k and x' > x @b y := y + 1 end
  event reset where @g1 x > 100 then @a x := 0 end
end
machine b refines a sees c variables x : int y : int invariants @j1 x >= 0 events
  event initialisation then @a x := 0 @b y := 0 end
  event step refines step any k : int where @g1 k > 0 @g2 y < n @g3 f(k) >= x then @a x :| x' = x + k and x' > x @b y := y + 1 end
  event reset refines reset where @g1 x > 100 then @a x := 0 end
end
";

fn tautology_refinement() -> Outcome {
    let model = load_text("copy.eb", COPY_MODEL)?;
    let pos: Vec<ProofObligation> = gen_project_pos(&model, PoOptions::default())
        .into_iter()
        .filter(|p| p.id.starts_with("b/") && matches!(p.kind, PoKind::Grd | PoKind::Sim))
        .collect();
    if let Some(p) = pos.iter().find(|p| !p.is_syntactic_tautology()) {
        return Err(format!("{} is not a syntactic tautology", p.id));
    }
    let results = discharge_all(&pos, &solver(), jobs());
    if let Some((p, r)) = pos.iter().zip(&results).find(|(_, r)| r.status != Verdict::Discharged) {
        return Err(format!("{}: {}", p.id, r.status));
    }
    let kinds: BTreeMap<PoKind, usize> = pos.iter().fold(BTreeMap::new(), |mut m, p| {
        *m.entry(p.kind).or_default() += 1;
        m
    });
    Ok(format!("{} GRD and {} SIM obligations discharged and syntactic", kinds[&PoKind::Grd], kinds[&PoKind::Sim]))
}

fn main() {
    let criteria: [Criterion; 7] = [
        ("corpus verification", corpus_verification),
        ("po-count laws", po_count_laws),
        ("mutation suite", mutation_suite),
        ("finite-domain oracle equivalence", finite_domain_oracle),
        ("determinism", determinism),
        ("frame semantics", frame_semantics),
        ("tautology refinement", tautology_refinement),
    ];
    let mut failures = 0;
    for (name, check) in criteria {
        match check() {
            Ok(detail) => println!("PASS {name}: {detail}"),
            Err(detail) => {
                failures += 1;
                println!("FAIL {name}: {detail}");
            }
        }
    }
    if failures > 0 {
        std::process::exit(1);
    }
}
