//! The `rulealg` command line.
//!
//! Exit codes: 0 on success, 1 when a property or comparison fails, 2 on
//! usage and model errors.

use std::ffi::OsString;
use std::io::Write;
use std::path::{Path, PathBuf};

use clap::{Parser, Subcommand, ValueEnum};
use num_traits::One;
use rulealg_core::algebra::{Algebra, RuleVector, StateVector, Q};
use rulealg_core::model::ModelSpec;
use rulealg_core::ode::{asymptotics_example1, closed_form_example1, derive_moment_odes, integrate_odes, BirthDeathRates, Closure, DeriveOptions, OdeSystem};
use rulealg_core::rule::{Rule, Semantics};
use rulealg_core::Graph;
use serde_json::{json, Value};

use crate::check::{check_model, render_reports, CheckOptions};
use crate::dsl::{self, CompiledModel};
use crate::ensemble::{run_ensemble, uniform_grid, EnsembleConfig};
use crate::io;

/// Largest deviation from the closed form accepted by
/// `integrate --against-closed-form`.
pub const CLOSED_FORM_TOL: f64 = 1e-6;

#[derive(Parser, Debug)]
#[command(name = "rulealg", version, about = "Stochastic graph rewriting: rule algebra, moment equations and simulation")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
    /// Model file (`.model`).
    #[arg(long, global = true)]
    pub model: Option<PathBuf>,
    /// Output directory, created if missing.
    #[arg(long, global = true)]
    pub out: Option<PathBuf>,
    #[arg(long, global = true)]
    pub seed: Option<u64>,
    #[arg(long, global = true)]
    pub runs: Option<u64>,
    #[arg(long = "t-max", global = true)]
    pub t_max: Option<f64>,
    /// Spacing of the sampling grid.
    #[arg(long, global = true)]
    pub grid: Option<f64>,
    /// Maximal number of commutator rounds in `derive` and `integrate`.
    #[arg(long, global = true)]
    pub depth: Option<usize>,
    /// Overrides the semantics of the model and of every rule.
    #[arg(long, global = true, value_enum)]
    pub semantics: Option<SemanticsArg>,
    /// Binds or rebinds a rate, `NAME=VALUE`. Repeatable.
    #[arg(long = "param", global = true, value_name = "NAME=VALUE", value_parser = parse_param)]
    pub params: Vec<(String, f64)>,
    /// Machine-readable output on stdout.
    #[arg(long, global = true)]
    pub json: bool,
}

#[derive(Subcommand, Debug)]
pub enum Command {
    /// Product δ(R2) * δ(R1) of two named rules.
    Compose { r2: String, r1: String },
    /// Commutator [A, B] of two named rules.
    Commutator { a: String, b: String },
    /// Action of δ(R) on a state: a named pattern, or the initial graph.
    Represent {
        rule: String,
        #[arg(long)]
        state: Option<String>,
    },
    /// Moment equations for the observables; writes `odes.json`, `odes.txt`.
    Derive,
    /// Solves the moment equations; writes `odes_solution.csv`.
    Integrate {
        /// Compare with the exact solution of the vertex/edge birth-death
        /// model (rates `nu_p`, `nu_m`, `eps_p`, `eps_m`).
        #[arg(long)]
        against_closed_form: bool,
    },
    /// SSA ensemble; writes `ensemble.csv` and `trajectories.csv`.
    Simulate {
        /// Runs whose full trajectories go to `trajectories.csv`.
        #[arg(long, default_value_t = 10)]
        keep: u64,
        /// Also write the event log of the kept runs to `events.csv`.
        #[arg(long)]
        events: bool,
        /// Check conservation and constraints at every step.
        #[arg(long)]
        audit: bool,
    },
    /// Property checks on the model's rules.
    Check {
        #[arg(long, default_value_t = 200)]
        cases: usize,
        /// Number of reachable states to check against.
        #[arg(long, default_value_t = 8)]
        states: usize,
        /// Size budget for the product checks, in vertices and edges.
        #[arg(long, default_value_t = 30)]
        max_size: usize,
    },
    /// Prints the model in canonical layout.
    Fmt {
        /// Exit with 1 when the file is not in canonical layout.
        #[arg(long)]
        check: bool,
    },
    /// Repeats the command recorded in a `run.json` manifest.
    Rerun { manifest: PathBuf },
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum)]
pub enum SemanticsArg {
    Dpo,
    Sqpo,
}

impl From<SemanticsArg> for Semantics {
    fn from(s: SemanticsArg) -> Self {
        match s {
            SemanticsArg::Dpo => Semantics::Dpo,
            SemanticsArg::Sqpo => Semantics::Sqpo,
        }
    }
}

fn parse_param(s: &str) -> Result<(String, f64), String> {
    let (name, value) = s.split_once('=').ok_or_else(|| format!("expected NAME=VALUE, got `{}`", s))?;
    let value: f64 = value.trim().parse().map_err(|_| format!("`{}` is not a number", value))?;
    Ok((name.trim().to_string(), value))
}

/// Outcome of a failed command, with its exit code.
#[derive(Debug)]
pub struct Exit {
    pub code: i32,
    pub message: String,
}

fn usage(message: impl Into<String>) -> Exit {
    Exit { code: 2, message: message.into() }
}

fn failed(message: impl Into<String>) -> Exit {
    Exit { code: 1, message: message.into() }
}

impl From<std::io::Error> for Exit {
    fn from(e: std::io::Error) -> Self {
        usage(e.to_string())
    }
}

impl From<rulealg_core::ModelError> for Exit {
    fn from(e: rulealg_core::ModelError) -> Self {
        usage(e.to_string())
    }
}

/// Entry point for the binary and for tests.
pub fn run(args: impl IntoIterator<Item = OsString>, out: &mut dyn Write, err: &mut dyn Write) -> i32 {
    let args: Vec<OsString> = args.into_iter().collect();
    let cli = match Cli::try_parse_from(&args) {
        Ok(c) => c,
        Err(e) => {
            let code = if e.use_stderr() { 2 } else { 0 };
            let _ = if code == 0 { write!(out, "{}", e) } else { write!(err, "{}", e) };
            return code;
        }
    };
    let raw: Vec<String> = args.iter().skip(1).map(|a| a.to_string_lossy().into_owned()).collect();
    match execute(&cli, &raw, out, err) {
        Ok(()) => 0,
        Err(e) => {
            let _ = writeln!(err, "error: {}", e.message);
            e.code
        }
    }
}

struct Loaded {
    path: PathBuf,
    model: CompiledModel,
    digest: String,
}

fn load(cli: &Cli, err: &mut dyn Write) -> Result<Loaded, Exit> {
    let path = cli.model.clone().ok_or_else(|| usage("--model is required"))?;
    let src = std::fs::read_to_string(&path).map_err(|e| usage(format!("{}: {}", path.display(), e)))?;
    let shown = path.display().to_string();
    let mut model = dsl::load(&src).map_err(|ds| {
        let lines: Vec<String> = ds.iter().map(|d| d.render(&src, &shown)).collect();
        usage(lines.join("\n"))
    })?;
    for w in &model.warnings {
        writeln!(err, "{}", w.render(&src, &shown))?;
    }
    apply_overrides(cli, &mut model.spec)?;
    let digest = io::model_digest(&model.spec);
    Ok(Loaded { path, model, digest })
}

fn apply_overrides(cli: &Cli, spec: &mut ModelSpec) -> Result<(), Exit> {
    for (name, value) in &cli.params {
        let i = spec.param_index(name).ok_or_else(|| usage(format!("unknown parameter `{}`", name)))?;
        if !(*value > 0.0 && value.is_finite()) {
            return Err(usage(format!("rate `{}` must be strictly positive, got {}", name, value)));
        }
        spec.params[i].value = Some(*value);
    }
    if let Some(s) = cli.semantics {
        spec.semantics = s.into();
        for t in &mut spec.transitions {
            t.semantics = s.into();
        }
    }
    Ok(())
}

fn out_dir(cli: &Cli) -> Result<PathBuf, Exit> {
    let dir = cli.out.clone().unwrap_or_else(|| PathBuf::from("."));
    std::fs::create_dir_all(&dir)?;
    Ok(dir)
}

fn find_rule<'m>(spec: &'m ModelSpec, name: &str) -> Result<&'m Rule, Exit> {
    spec.transitions
        .iter()
        .find(|t| t.name == name)
        .map(|t| &t.rule)
        .or_else(|| spec.observables.iter().find(|o| o.name == name).map(|o| &o.rule))
        .ok_or_else(|| usage(format!("no rule or observable named `{}`", name)))
}

fn print_vector(cli: &Cli, v: &RuleVector, spec: &ModelSpec, out: &mut dyn Write) -> Result<(), Exit> {
    if cli.json {
        writeln!(out, "{}", serde_json::to_string_pretty(&io::rule_vector_json(v, &spec.types)).expect("serializable"))?;
    } else {
        write!(out, "{}", io::rule_vector_text(v, &spec.types))?;
    }
    Ok(())
}

fn binary(cli: &Cli, a: &str, b: &str, err: &mut dyn Write) -> Result<(Loaded, Algebra, RuleVector, RuleVector), Exit> {
    let l = load(cli, err)?;
    let alg = l.model.spec.algebra()?;
    let va = alg.basis(find_rule(&l.model.spec, a)?, Q::one());
    let vb = alg.basis(find_rule(&l.model.spec, b)?, Q::one());
    Ok((l, alg, va, vb))
}

fn execute(cli: &Cli, raw: &[String], out: &mut dyn Write, err: &mut dyn Write) -> Result<(), Exit> {
    match &cli.command {
        Command::Compose { r2, r1 } => {
            let (l, alg, a, b) = binary(cli, r2, r1, err)?;
            print_vector(cli, &alg.product(&a, &b), &l.model.spec, out)
        }
        Command::Commutator { a, b } => {
            let (l, alg, a, b) = binary(cli, a, b, err)?;
            print_vector(cli, &alg.commutator(&a, &b), &l.model.spec, out)
        }
        Command::Represent { rule, state } => {
            let l = load(cli, err)?;
            let spec = &l.model.spec;
            let alg = spec.algebra()?;
            let x: &Graph = match state {
                Some(p) => l.model.patterns.get(p).ok_or_else(|| usage(format!("no pattern named `{}`", p)))?,
                None => &l.model.init,
            };
            let s = alg.represent(&alg.basis(find_rule(spec, rule)?, Q::one()), &StateVector::basis(x));
            if cli.json {
                writeln!(out, "{}", serde_json::to_string_pretty(&io::state_vector_json(&s, &spec.types)).expect("serializable"))?;
            } else {
                write!(out, "{}", io::state_vector_text(&s, &spec.types))?;
            }
            Ok(())
        }
        Command::Derive => {
            let l = load(cli, err)?;
            let sys = derive(cli, &l)?;
            let dir = out_dir(cli)?;
            let j = io::ode_json(&sys, &l.model.spec.types);
            io::write_json(&dir.join("odes.json"), &j)?;
            std::fs::write(dir.join("odes.txt"), io::ode_text(&sys))?;
            write_manifest(cli, raw, &l, &dir, json!({ "status": io::closure_name(sys.status) }))?;
            if cli.json {
                writeln!(out, "{}", serde_json::to_string_pretty(&j).expect("serializable"))?;
            } else {
                write!(out, "{}", io::ode_text(&sys))?;
            }
            Ok(())
        }
        Command::Integrate { against_closed_form } => integrate(cli, raw, *against_closed_form, out, err),
        Command::Simulate { keep, events, audit } => simulate(cli, raw, *keep, *events, *audit, out, err),
        Command::Check { cases, states, max_size } => {
            let l = load(cli, err)?;
            let opts = CheckOptions { cases: *cases, max_states: *states, max_size: *max_size, seed: cli.seed.unwrap_or(0) };
            let reports = check_model(&l.model.spec, &l.model.init, opts);
            let ok = reports.iter().all(|r| r.passed());
            if cli.json {
                let v: Vec<Value> = reports.iter().map(|r| json!({ "name": r.name, "cases": r.cases, "skipped": r.skipped, "failures": r.failures })).collect();
                writeln!(out, "{}", serde_json::to_string_pretty(&v).expect("serializable"))?;
            } else {
                write!(out, "{}", render_reports(&reports))?;
            }
            if cli.out.is_some() {
                let dir = out_dir(cli)?;
                write_manifest(cli, raw, &l, &dir, json!({ "passed": ok }))?;
            }
            if ok {
                Ok(())
            } else {
                Err(failed("property check failed"))
            }
        }
        Command::Fmt { check } => {
            let path = cli.model.clone().ok_or_else(|| usage("--model is required"))?;
            let src = std::fs::read_to_string(&path).map_err(|e| usage(format!("{}: {}", path.display(), e)))?;
            let shown = path.display().to_string();
            let sm = dsl::parse(&src).map_err(|ds| usage(ds.iter().map(|d| d.render(&src, &shown)).collect::<Vec<_>>().join("\n")))?;
            let text = dsl::format(&sm);
            if *check {
                if text != src {
                    return Err(failed(format!("{} is not formatted", shown)));
                }
            } else {
                write!(out, "{}", text)?;
            }
            Ok(())
        }
        Command::Rerun { manifest } => rerun(cli, manifest, out, err),
    }
}

fn derive(cli: &Cli, l: &Loaded) -> Result<OdeSystem, Exit> {
    let mut opts: DeriveOptions = l.model.derive;
    if let Some(d) = cli.depth {
        opts.max_depth = d;
    }
    Ok(derive_moment_odes(&l.model.spec, opts)?)
}

fn integrate(cli: &Cli, raw: &[String], against: bool, out: &mut dyn Write, err: &mut dyn Write) -> Result<(), Exit> {
    let l = load(cli, err)?;
    let spec = &l.model.spec;
    let mut sys = derive(cli, &l)?;
    if let Closure::NonClosing { depth } = sys.status {
        if cli.depth.is_none() {
            return Err(usage(format!("the moment equations do not close within depth {}; pass --depth to integrate the truncated system", depth)));
        }
        sys = sys.truncated();
        writeln!(err, "warning: integrating the system truncated at depth {}", depth)?;
    }
    let params = spec.param_values()?;
    let alg = spec.algebra()?;
    let init = sys.initial_values(&l.model.init, &alg);
    let t_max = cli.t_max.unwrap_or(l.model.simulate.t_max);
    let grid = uniform_grid(t_max, cli.grid.unwrap_or(l.model.simulate.grid));
    let xs = integrate_odes(&sys, &params, &init, &grid)?;
    let values: Vec<Vec<f64>> = xs.iter().map(|x| sys.evaluate_outputs(x)).collect();

    let dir = out_dir(cli)?;
    let mut header = vec!["t".to_string()];
    header.extend(sys.outputs.iter().map(|o| o.name.clone()));
    let rows = grid.iter().zip(&values).map(|(t, v)| std::iter::once(io::float(*t)).chain(v.iter().map(|x| io::float(*x))).collect());
    io::write_csv(&dir.join("odes_solution.csv"), &header, rows)?;

    let mut summary = json!({ "status": io::closure_name(sys.status), "final": values.last() });
    let mut verdict = Ok(());
    if against {
        let dev = closed_form_deviation(spec, &l.model.init, &sys, &grid, &values)?;
        writeln!(out, "max abs deviation from closed form: {:e}", dev.max)?;
        writeln!(out, "asymptotic values: {:?}", dev.asymptotic)?;
        summary["closed_form_max_abs_deviation"] = json!(dev.max);
        if dev.max.is_nan() || dev.max >= CLOSED_FORM_TOL {
            verdict = Err(failed(format!("deviation {:e} exceeds {:e}", dev.max, CLOSED_FORM_TOL)));
        }
    }
    if let Some(last) = values.last() {
        let cells: Vec<String> = sys.outputs.iter().zip(last).map(|(o, x)| format!("{}={}", o.name, x)).collect();
        writeln!(out, "t={}: {}", grid.last().expect("nonempty grid"), cells.join(" "))?;
    }
    write_manifest(cli, raw, &l, &dir, summary)?;
    verdict
}

struct Deviation {
    max: f64,
    asymptotic: [f64; 3],
}

fn closed_form_deviation(spec: &ModelSpec, x0: &Graph, sys: &OdeSystem, grid: &[f64], values: &[Vec<f64>]) -> Result<Deviation, Exit> {
    let need = ["nu_p", "nu_m", "eps_p", "eps_m"];
    let mut r = [0.0; 4];
    for (slot, name) in r.iter_mut().zip(need) {
        let i = spec.param_index(name).ok_or_else(|| usage(format!("closed form needs parameter `{}`", name)))?;
        *slot = spec.params[i].value.ok_or_else(|| usage(format!("parameter `{}` is not bound", name)))?;
    }
    if sys.outputs.len() != 3 || !x0.is_empty() {
        return Err(usage("closed form needs three observables (vertices, pairs, edges) and an empty initial graph"));
    }
    let rates = BirthDeathRates { nu_plus: r[0], nu_minus: r[1], eps_plus: r[2], eps_minus: r[3] };
    let mut max: f64 = 0.0;
    for (t, v) in grid.iter().zip(values) {
        let cf = closed_form_example1(rates, *t)?;
        for k in 0..3 {
            max = max.max((v[k] - cf[k]).abs());
        }
    }
    Ok(Deviation { max, asymptotic: asymptotics_example1(rates) })
}

fn simulate(cli: &Cli, raw: &[String], keep: u64, events: bool, audit: bool, out: &mut dyn Write, err: &mut dyn Write) -> Result<(), Exit> {
    let l = load(cli, err)?;
    let spec = &l.model.spec;
    spec.param_values()?;
    let s = l.model.simulate;
    let step = cli.grid.unwrap_or(s.grid);
    if step.is_nan() || step <= 0.0 {
        return Err(usage("grid spacing must be positive"));
    }
    let cfg = EnsembleConfig {
        runs: cli.runs.unwrap_or(s.runs),
        seed: cli.seed.unwrap_or(s.seed),
        t_max: cli.t_max.unwrap_or(s.t_max),
        grid: uniform_grid(cli.t_max.unwrap_or(s.t_max), step),
        keep,
        record_events: events,
        audit,
    };
    let ens = run_ensemble(spec, &l.model.init, &cfg)?;
    let dir = out_dir(cli)?;
    io::write_csv(&dir.join("ensemble.csv"), &ens.header(), ens.rows())?;

    let mut header = vec!["run".to_string(), "t".to_string()];
    header.extend(ens.names.iter().cloned());
    let rows = ens.kept.iter().flat_map(|t| {
        t.grid.iter().zip(&t.samples).map(move |(time, xs)| {
            let mut row = vec![t.run.to_string(), io::float(*time)];
            row.extend(xs.iter().map(|x| io::float(*x)));
            row
        })
    });
    io::write_csv(&dir.join("trajectories.csv"), &header, rows)?;
    if events {
        let header: Vec<String> = ["run", "t", "transition", "match_digest"].iter().map(|s| s.to_string()).collect();
        let rows = ens.kept.iter().flat_map(|t| {
            t.events.iter().map(move |e| vec![t.run.to_string(), io::float(e.time), spec.transitions[e.transition].name.clone(), format!("{:016x}", e.digest)])
        });
        io::write_csv(&dir.join("events.csv"), &header, rows)?;
    }
    write_manifest(cli, raw, &l, &dir, json!({ "runs": cfg.runs, "seed": cfg.seed, "t_max": cfg.t_max, "grid": step }))?;
    writeln!(out, "{} runs, seed {}, t_max {}", cfg.runs, cfg.seed, cfg.t_max)?;
    if let (Some(k), true) = (ens.grid.len().checked_sub(1), ens.runs > 0) {
        for (i, name) in ens.names.iter().enumerate() {
            writeln!(out, "{} at t={}: {} ± {}", name, ens.grid[k], ens.mean[k][i], ens.se[k][i])?;
        }
    }
    Ok(())
}

/// `args` with the model path made absolute, so the manifest can be
/// replayed from anywhere.
fn replayable_args(raw: &[String], model: &Path) -> Vec<String> {
    let abs = std::fs::canonicalize(model).unwrap_or_else(|_| model.to_path_buf()).display().to_string();
    let mut out = Vec::new();
    let mut it = raw.iter();
    while let Some(a) = it.next() {
        if a == "--model" {
            it.next();
            out.extend(["--model".to_string(), abs.clone()]);
        } else if a.starts_with("--model=") {
            out.extend(["--model".to_string(), abs.clone()]);
        } else {
            out.push(a.clone());
        }
    }
    out
}

fn write_manifest(cli: &Cli, raw: &[String], l: &Loaded, dir: &Path, result: Value) -> Result<(), Exit> {
    let params: serde_json::Map<String, Value> = l.model.spec.params.iter().map(|p| (p.name.clone(), json!(p.value))).collect();
    let overrides: serde_json::Map<String, Value> = cli.params.iter().map(|(n, v)| (n.clone(), json!(v))).collect();
    let m = json!({
        "tool": "rulealg",
        "version": env!("CARGO_PKG_VERSION"),
        "command": raw.iter().find(|a| !a.starts_with('-')).cloned(),
        "args": replayable_args(raw, &l.path),
        "model": l.path.display().to_string(),
        "model_digest": l.digest,
        "semantics": io::semantics_name(l.model.spec.semantics),
        "parameters": params,
        "overrides": {
            "params": overrides,
            "seed": cli.seed,
            "runs": cli.runs,
            "t_max": cli.t_max,
            "grid": cli.grid,
            "depth": cli.depth,
            "semantics": cli.semantics.map(|s| io::semantics_name(s.into())),
        },
        "result": result,
    });
    io::write_json(&dir.join("run.json"), &m)?;
    Ok(())
}

fn rerun(cli: &Cli, manifest: &Path, out: &mut dyn Write, err: &mut dyn Write) -> Result<(), Exit> {
    let text = std::fs::read_to_string(manifest).map_err(|e| usage(format!("{}: {}", manifest.display(), e)))?;
    let m: Value = serde_json::from_str(&text).map_err(|e| usage(format!("{}: {}", manifest.display(), e)))?;
    let args: Vec<String> =
        m["args"].as_array().and_then(|a| a.iter().map(|x| x.as_str().map(String::from)).collect()).ok_or_else(|| usage("manifest has no argument list"))?;
    let mut argv: Vec<OsString> = vec!["rulealg".into()];
    let mut it = args.iter();
    while let Some(a) = it.next() {
        if cli.out.is_some() && a == "--out" {
            it.next();
        } else if !(cli.out.is_some() && a.starts_with("--out=")) {
            argv.push(a.into());
        }
    }
    if let Some(o) = &cli.out {
        argv.push("--out".into());
        argv.push(o.clone().into());
    }
    let again = Cli::try_parse_from(&argv).map_err(|e| usage(e.to_string()))?;
    if matches!(again.command, Command::Rerun { .. }) {
        return Err(usage("a manifest cannot replay another replay"));
    }
    let l = load(&again, err)?;
    if Some(l.digest.as_str()) != m["model_digest"].as_str() {
        return Err(usage(format!("{} changed since the manifest was written", l.path.display())));
    }
    let raw: Vec<String> = argv.iter().skip(1).map(|a| a.to_string_lossy().into_owned()).collect();
    execute(&again, &raw, out, err)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn param_syntax() {
        assert_eq!(parse_param("k=2.5").unwrap(), ("k".to_string(), 2.5));
        assert!(parse_param("k").is_err());
        assert!(parse_param("k=x").is_err());
    }

    #[test]
    fn model_path_becomes_absolute() {
        let raw: Vec<String> = ["derive", "--model=m.model", "--depth", "2"].iter().map(|s| s.to_string()).collect();
        let out = replayable_args(&raw, Path::new("m.model"));
        assert_eq!(out[0], "derive");
        assert_eq!(out[1], "--model");
        assert_eq!(&out[3..], ["--depth", "2"]);
    }

    #[test]
    fn unknown_subcommand_is_a_usage_error() {
        let (mut o, mut e) = (Vec::new(), Vec::new());
        assert_eq!(run(["rulealg", "frobnicate"].map(OsString::from), &mut o, &mut e), 2);
        assert_eq!(run(["rulealg", "--help"].map(OsString::from), &mut o, &mut e), 0);
    }
}
