use std::io::{IsTerminal, Write};
use std::path::{Path, PathBuf};
use std::process::ExitCode;
use std::time::Instant;

use clap::{Parser, Subcommand, ValueEnum};
use rayon::prelude::*;
use serde::Serialize;
use serde_json::{json, Value};

use catflow::compose::{compose_open, correspondence_by_index, correspondence_by_name};
use catflow::cset::write_tables_csv;
use catflow::dot::{cld_to_dot, sfd_to_dot};
use catflow::hom::{find_homomorphisms, name_attrs, Monic, SearchOptions};
use catflow::model::{witness_to_json, Model, NamedComponents};
use catflow::ode::{compile_odes, integrate, Method, Scenario};
use catflow::schemas::{diagram_violations, DiagramKind};
use catflow::signed::{enumerate_implied_links, find_feedback_loops, match_signed_pattern, SignedGraph};
use catflow::ssa::{simulate_ssa, ssa_to_trajectory, DiscreteState, RNG_ALGORITHM};
use catflow::stratify::{pullback, TypedDiagram};
use catflow::translate::{sfd_to_ssd, ssd_to_cld};
use catflow::{models, CSetInstance, Error, Homomorphism, Sign};

#[derive(Parser)]
#[command(name = "catflow", version, about = "Compose, stratify, translate and simulate system dynamics diagrams")]
struct Cli {
    /// Print the run report as JSON on stderr.
    #[arg(long, global = true)]
    json: bool,
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Check a model file for dangling references and malformed diagrams.
    Validate { model: PathBuf },
    /// Glue two open diagrams along one foot each.
    Compose {
        left: PathBuf,
        right: PathBuf,
        /// Foot of the left diagram (1-based).
        #[arg(long, default_value_t = 1)]
        foot_left: usize,
        /// Foot of the right diagram (1-based).
        #[arg(long, default_value_t = 1)]
        foot_right: usize,
        /// Pair the feet by part names instead of by position.
        #[arg(long)]
        match_by_name: bool,
        #[arg(short, long)]
        out: Option<PathBuf>,
    },
    /// Pull back an aggregate and a strata diagram over a type diagram.
    Stratify {
        aggregate: PathBuf,
        strata: PathBuf,
        #[arg(long = "type")]
        type_diagram: PathBuf,
        #[arg(long)]
        aggregate_typing: Option<PathBuf>,
        #[arg(long)]
        strata_typing: Option<PathBuf>,
        /// Search for typings that were not given explicitly.
        #[arg(long)]
        auto_type: bool,
        #[arg(short, long)]
        out: Option<PathBuf>,
    },
    /// Translate an SFD to an SSD or CLD, or an SSD to a CLD.
    Translate {
        model: PathBuf,
        #[arg(long)]
        to: Target,
        #[arg(short, long)]
        out: Option<PathBuf>,
    },
    /// Simulate an SFD deterministically or stochastically.
    Simulate {
        model: PathBuf,
        scenario: PathBuf,
        #[arg(long, value_enum, default_value_t = SimMethod::Rk4)]
        method: SimMethod,
        #[arg(long)]
        seed: Option<u64>,
        /// Sample the stochastic run on a regular grid instead of logging events.
        #[arg(long)]
        sample_dt: Option<f64>,
        /// Independent stochastic runs with seeds seed, seed+1, ...
        #[arg(long)]
        replicates: Option<usize>,
        #[arg(short, long)]
        out: Option<PathBuf>,
    },
    /// Search a diagram for a pattern or for feedback loops.
    Find {
        model: PathBuf,
        #[arg(long, conflicts_with = "loops", required_unless_present = "loops")]
        pattern: Option<PathBuf>,
        /// Loop polarity to look for: + or -.
        #[arg(long, allow_hyphen_values = true)]
        loops: Option<String>,
        #[arg(long, default_value_t = 8)]
        max_len: usize,
        /// Match CLD pattern links to signed paths up to this length.
        #[arg(long)]
        max_path_len: Option<usize>,
        /// Require distinct pattern parts to map to distinct targets.
        #[arg(long)]
        injective: bool,
        #[arg(short, long)]
        out: Option<PathBuf>,
    },
    /// Write a diagram as Graphviz DOT or as one CSV per table.
    Export {
        model: PathBuf,
        /// DOT output file, or `-` for stdout.
        #[arg(long, conflicts_with = "tables", required_unless_present = "tables")]
        dot: Option<PathBuf>,
        #[arg(long)]
        tables: Option<PathBuf>,
        /// Also draw implied links of length up to N (CLDs only).
        #[arg(long)]
        implied: Option<usize>,
    },
    /// Write a built-in example model.
    Example {
        /// Example name; omit to list them.
        name: Option<String>,
        /// Write every example into this directory.
        #[arg(long, conflicts_with = "name")]
        all: Option<PathBuf>,
        #[arg(short, long)]
        out: Option<PathBuf>,
    },
}

#[derive(Clone, Copy, ValueEnum)]
enum Target {
    Ssd,
    Cld,
}

#[derive(Clone, Copy, PartialEq, Eq, ValueEnum)]
enum SimMethod {
    Rk4,
    Euler,
    Ssa,
}

#[derive(Serialize)]
struct RunReport {
    command: String,
    inputs: Vec<String>,
    warnings: Vec<String>,
    outputs: Vec<String>,
    elapsed_ms: f64,
    #[serde(skip_serializing_if = "Option::is_none")]
    rng: Option<String>,
    #[serde(skip_serializing_if = "Option::is_none")]
    error: Option<String>,
    exit_code: u8,
}

struct Run {
    command: &'static str,
    inputs: Vec<String>,
    warnings: Vec<String>,
    outputs: Vec<String>,
    rng: Option<String>,
}

impl Run {
    fn new(command: &'static str) -> Run {
        Run {
            command,
            inputs: Vec::new(),
            warnings: Vec::new(),
            outputs: Vec::new(),
            rng: None,
        }
    }

    fn load(&mut self, path: &Path) -> Result<Model, Failure> {
        self.inputs.push(path.display().to_string());
        Ok(Model::load(path)?)
    }

    /// Writes `text` to `out`, or stdout when absent.
    fn emit(&mut self, out: Option<&Path>, text: &str) -> Result<(), Failure> {
        match out {
            Some(p) => {
                std::fs::write(p, text).map_err(Error::from)?;
                self.outputs.push(p.display().to_string());
            }
            None => {
                let mut so = std::io::stdout().lock();
                so.write_all(text.as_bytes()).map_err(Error::from)?;
                self.outputs.push("<stdout>".into());
            }
        }
        Ok(())
    }

    fn emit_model(&mut self, out: Option<&Path>, model: &Model, provenance: Value) -> Result<(), Failure> {
        let file = model.to_file(Some(provenance))?;
        self.emit(out, &file.to_json_string())
    }

    fn provenance(&self, extra: Value) -> Value {
        let mut p = json!({
            "command": self.command,
            "inputs": self.inputs.iter().map(|i| file_name(i)).collect::<Vec<_>>(),
        });
        if let (Value::Object(p), Value::Object(e)) = (&mut p, extra) {
            p.extend(e);
        }
        p
    }
}

fn file_name(p: &str) -> String {
    Path::new(p)
        .file_name()
        .map_or_else(|| p.to_string(), |n| n.to_string_lossy().into_owned())
}

/// A failed run: domain errors exit 1, parse and usage errors exit 2.
enum Failure {
    Domain(String),
    Usage(String),
}

impl From<Error> for Failure {
    fn from(e: Error) -> Failure {
        if e.is_parse() {
            Failure::Usage(e.to_string())
        } else {
            Failure::Domain(e.to_string())
        }
    }
}

fn usage(msg: impl Into<String>) -> Failure {
    Failure::Usage(msg.into())
}

fn domain(msg: impl Into<String>) -> Failure {
    Failure::Domain(msg.into())
}

fn expect_diagram(model: &Model, path: &Path) -> Result<(DiagramKind, CSetInstance), Failure> {
    model
        .diagram()
        .map(|(k, d)| (k, d.clone()))
        .ok_or_else(|| usage(format!("{}: expected a diagram, found {}", path.display(), model.kind().as_str())))
}

fn expect_kind(model: &Model, path: &Path, kind: DiagramKind) -> Result<CSetInstance, Failure> {
    let (k, d) = expect_diagram(model, path)?;
    if k != kind {
        return Err(usage(format!("{}: expected a {kind} diagram, found {k}", path.display())));
    }
    Ok(d)
}

fn cmd_validate(run: &mut Run, path: &Path) -> Result<(), Failure> {
    let model = run.load(path)?;
    let Some((kind, d)) = model.diagram() else {
        if let Model::Scenario(s) = &model {
            if !(s.dt > 0.0) || !(s.tf > s.t0) {
                return Err(domain("scenario needs dt > 0 and tf > t0"));
            }
        }
        return Ok(());
    };
    let mut problems: Vec<String> = d.validate().iter().map(|v| v.to_string()).collect();
    if problems.is_empty() {
        problems = diagram_violations(kind, d);
    }
    if let Model::Open(_, o) = &model {
        for (i, f) in o.feet.iter().enumerate() {
            problems.extend(f.validate().iter().map(|v| format!("foot {}: {v}", i + 1)));
        }
    }
    if problems.is_empty() {
        Ok(())
    } else {
        let n = problems.len();
        run.warnings.extend(problems);
        Err(domain(format!("{n} violation(s)")))
    }
}

#[allow(clippy::too_many_arguments)]
fn cmd_compose(
    run: &mut Run,
    left: &Path,
    right: &Path,
    foot_left: usize,
    foot_right: usize,
    by_name: bool,
    out: Option<&Path>,
) -> Result<(), Failure> {
    let (lm, rm) = (run.load(left)?, run.load(right)?);
    let (Model::Open(lk, l), Model::Open(rk, r)) = (&lm, &rm) else {
        return Err(usage("compose needs two open diagrams"));
    };
    if lk != rk {
        return Err(usage(format!("cannot compose an open {lk} with an open {rk}")));
    }
    let pick = |n: usize, len: usize, side: &str| {
        if n == 0 || n > len {
            Err(usage(format!("{side} foot {n} out of range 1..={len}")))
        } else {
            Ok(n - 1)
        }
    };
    let lf = pick(foot_left, l.feet.len(), "left")?;
    let rf = pick(foot_right, r.feet.len(), "right")?;
    let corr = if by_name {
        correspondence_by_name(&l.feet[lf], &r.feet[rf])?
    } else {
        correspondence_by_index(&l.feet[lf], &r.feet[rf])?
    };
    let (composite, warnings) = compose_open(l, r, lf, rf, &corr)?;
    run.warnings.extend(warnings.iter().cloned());
    let prov = run.provenance(json!({
        "foot_left": foot_left,
        "foot_right": foot_right,
        "match_by_name": by_name,
        "warnings": warnings,
    }));
    run.emit_model(out, &Model::Open(*lk, composite), prov)
}

fn typed(
    run: &mut Run,
    diagram: CSetInstance,
    type_diagram: &CSetInstance,
    typing: Option<&Path>,
    auto: bool,
) -> Result<TypedDiagram, Failure> {
    match typing {
        Some(p) => {
            let Model::Typing(c) = run.load(p)? else {
                return Err(usage(format!("{}: expected a typing", p.display())));
            };
            let h = c.to_hom(diagram.schema())?;
            Ok(TypedDiagram::new(diagram, type_diagram.clone(), h)?)
        }
        None if auto => Ok(TypedDiagram::auto(diagram, type_diagram.clone())?),
        None => Err(usage("give a typing file for each diagram or pass --auto-type")),
    }
}

#[allow(clippy::too_many_arguments)]
fn cmd_stratify(
    run: &mut Run,
    aggregate: &Path,
    strata: &Path,
    type_path: &Path,
    agg_typing: Option<&Path>,
    strata_typing: Option<&Path>,
    auto: bool,
    out: Option<&Path>,
) -> Result<(), Failure> {
    let am = run.load(aggregate)?;
    let sm = run.load(strata)?;
    let tm = run.load(type_path)?;
    let (kind, t) = expect_diagram(&tm, type_path)?;
    let a = expect_kind(&am, aggregate, kind)?;
    let s = expect_kind(&sm, strata, kind)?;
    let at = typed(run, a, &t, agg_typing, auto)?;
    let st = typed(run, s, &t, strata_typing, auto)?;
    let pb = pullback(&at, &st)?;
    let proj = |h: &Homomorphism| components_json(&NamedComponents::of(h, pb.stratified.schema()));
    let prov = run.provenance(json!({ "projection_aggregate": proj(&pb.p1), "projection_strata": proj(&pb.p2) }));
    run.emit_model(out, &Model::Diagram(kind, pb.stratified), prov)
}

fn components_json(c: &NamedComponents) -> Value {
    Value::Object(
        c.0.iter()
            .map(|(o, v)| (o.clone(), v.iter().map(|x| x + 1).collect::<Vec<_>>().into()))
            .collect(),
    )
}

fn cmd_translate(run: &mut Run, path: &Path, to: Target, out: Option<&Path>) -> Result<(), Failure> {
    let m = run.load(path)?;
    let (kind, d) = expect_diagram(&m, path)?;
    let (result, witness) = match (kind, to) {
        (DiagramKind::Sfd, Target::Ssd) => (Model::Diagram(DiagramKind::Ssd, sfd_to_ssd(&d)?), None),
        (DiagramKind::Sfd, Target::Cld) => {
            let (cld, w) = ssd_to_cld(&sfd_to_ssd(&d)?)?;
            (Model::Diagram(DiagramKind::Cld, cld), Some(w))
        }
        (DiagramKind::Ssd, Target::Cld) => {
            let (cld, w) = ssd_to_cld(&d)?;
            (Model::Diagram(DiagramKind::Cld, cld), Some(w))
        }
        (k, _) => return Err(usage(format!("cannot translate a {k} diagram that way"))),
    };
    let extra = match &witness {
        Some(w) => json!({ "witness": witness_to_json(w) }),
        None => json!({}),
    };
    let prov = run.provenance(extra);
    run.emit_model(out, &result, prov)
}

fn cmd_simulate(
    run: &mut Run,
    path: &Path,
    scen_path: &Path,
    method: SimMethod,
    seed: Option<u64>,
    sample_dt: Option<f64>,
    replicates: Option<usize>,
    out: Option<&Path>,
) -> Result<(), Failure> {
    let m = run.load(path)?;
    let sfd = expect_kind(&m, path, DiagramKind::Sfd)?;
    let Model::Scenario(scen) = run.load(scen_path)? else {
        return Err(usage(format!("{}: expected a scenario", scen_path.display())));
    };
    let sys = compile_odes(&sfd)?;
    run.warnings.extend(sys.warnings.iter().cloned());
    let text = match method {
        SimMethod::Rk4 | SimMethod::Euler => {
            if seed.is_some() || replicates.is_some() {
                return Err(usage("--seed and --replicates apply to --method ssa only"));
            }
            let m = if method == SimMethod::Rk4 { Method::Rk4 } else { Method::Euler };
            integrate(&sys, &scen, m)?.to_csv()?
        }
        SimMethod::Ssa => {
            let seed = seed.ok_or_else(|| usage("--method ssa requires --seed"))?;
            run.rng = Some(format!("{RNG_ALGORITHM} seed {seed}"));
            let init = DiscreteState::from_scenario(&sys, &scen)?;
            match replicates {
                None => {
                    let log = simulate_ssa(&sfd, &init, scen.tf, seed)?;
                    match sample_dt {
                        Some(dt) => ssa_to_trajectory(&log, dt)?.to_csv()?,
                        None => log.to_csv()?,
                    }
                }
                Some(n) => replicate_summary(&sfd, &init, &scen, seed, n)?,
            }
        }
    };
    run.emit(out, &text)
}

/// One row per replicate: its seed, the number of events and final counts.
fn replicate_summary(
    sfd: &CSetInstance,
    init: &DiscreteState,
    scen: &Scenario,
    seed: u64,
    n: usize,
) -> Result<String, Failure> {
    let logs = (0..n as u64)
        .into_par_iter()
        .map(|i| simulate_ssa(sfd, init, scen.tf, seed.wrapping_add(i)))
        .collect::<Result<Vec<_>, Error>>()?;
    let names = logs.first().map(|l| l.stock_names.clone()).unwrap_or_default();
    let mut lines = vec![format!("replicate,seed,events,{}", names.join(","))];
    for (i, log) in logs.iter().enumerate() {
        let counts: Vec<String> = log.final_state().iter().map(|c| c.to_string()).collect();
        lines.push(format!("{},{},{},{}", i + 1, log.seed, log.events.len(), counts.join(",")));
    }
    let mut s = lines.join("\n");
    s.push('\n');
    Ok(s)
}

fn part_label(d: &CSetInstance, ob: usize, row: usize) -> String {
    let s = d.schema();
    let obj = &s.objects()[ob];
    match catflow::schemas::name_attr(obj) {
        Some(a) if !d.name_of(row, a).is_empty() => d.name_of(row, a).to_string(),
        _ => format!("{obj}#{}", row + 1),
    }
}

#[allow(clippy::too_many_arguments)]
fn cmd_find(
    run: &mut Run,
    path: &Path,
    pattern: Option<&Path>,
    loops: Option<&str>,
    max_len: usize,
    max_path_len: Option<usize>,
    injective: bool,
    out: Option<&Path>,
) -> Result<(), Failure> {
    let m = run.load(path)?;
    let (kind, target) = expect_diagram(&m, path)?;
    let report = if let Some(l) = loops {
        let want = Sign::parse(l).ok_or_else(|| usage(format!("--loops takes + or -, got `{l}`")))?;
        if kind != DiagramKind::Cld {
            return Err(usage("--loops needs a CLD"));
        }
        let g = SignedGraph::from_cld(&target)?;
        let found = find_feedback_loops(&g, want, max_len);
        Value::Array(
            found
                .iter()
                .map(|lp| {
                    json!({
                        "sign": lp.sign.symbol(),
                        "length": lp.path.len(),
                        "vertices": lp.path.vertices(&g)[..lp.path.len()].iter().map(|&v| g.names[v].clone()).collect::<Vec<_>>(),
                        "path": lp.path.render(&g),
                    })
                })
                .collect(),
        )
    } else {
        let pp = pattern.expect("clap requires --pattern or --loops");
        let pm = run.load(pp)?;
        let pat = expect_kind(&pm, pp, kind)?;
        match max_path_len {
            Some(k) => {
                if kind != DiagramKind::Cld {
                    return Err(usage("--max-path-len needs CLDs"));
                }
                let pg = SignedGraph::from_cld(&pat)?;
                let tg = SignedGraph::from_cld(&target)?;
                let found = match_signed_pattern(&pg, &tg, k, injective);
                Value::Array(
                    found
                        .iter()
                        .map(|mm| {
                            let vm: serde_json::Map<String, Value> = mm
                                .vertex_map
                                .iter()
                                .enumerate()
                                .map(|(u, &v)| (pg.names[u].clone(), Value::from(tg.names[v].clone())))
                                .collect();
                            json!({
                                "vertex_map": vm,
                                "links": mm.edge_paths.iter().map(|p| p.render(&tg)).collect::<Vec<_>>(),
                                "implied_paths": mm.uses_implied_paths(),
                            })
                        })
                        .collect(),
                )
            }
            None => {
                let opts = SearchOptions {
                    monic: if injective { Monic::All } else { Monic::None },
                    ignore_attrs: name_attrs(),
                    ..SearchOptions::default()
                };
                let found = find_homomorphisms(&pat, &target, &opts)?;
                Value::Array(
                    found
                        .iter()
                        .map(|h| {
                            let s = pat.schema();
                            let mut obj = serde_json::Map::new();
                            for ob in 0..s.objects().len() {
                                if pat.count(ob) == 0 {
                                    continue;
                                }
                                let pairs: serde_json::Map<String, Value> = (0..pat.count(ob))
                                    .map(|r| (part_label(&pat, ob, r), Value::from(part_label(&target, ob, h.apply(ob, r)))))
                                    .collect();
                                obj.insert(s.objects()[ob].clone(), Value::Object(pairs));
                            }
                            Value::Object(obj)
                        })
                        .collect(),
                )
            }
        }
    };
    let mut text = serde_json::to_string_pretty(&report).map_err(Error::from)?;
    text.push('\n');
    run.emit(out, &text)
}

fn cmd_export(
    run: &mut Run,
    path: &Path,
    dot: Option<&Path>,
    tables: Option<&Path>,
    implied: Option<usize>,
) -> Result<(), Failure> {
    let m = run.load(path)?;
    let (kind, d) = expect_diagram(&m, path)?;
    if let Some(dir) = tables {
        for p in write_tables_csv(&d, dir)? {
            run.outputs.push(p.display().to_string());
        }
        return Ok(());
    }
    let text = match kind {
        DiagramKind::Cld => {
            let links = match implied {
                Some(k) => enumerate_implied_links(&SignedGraph::from_cld(&d)?, k),
                None => Vec::new(),
            };
            cld_to_dot(&d, &links)?
        }
        DiagramKind::Sfd => sfd_to_dot(&d)?,
        DiagramKind::Ssd => return Err(usage("DOT export supports CLDs and SFDs")),
    };
    run.emit(dot.filter(|p| *p != Path::new("-")), &text)
}

fn cmd_example(run: &mut Run, name: Option<&str>, all: Option<&Path>, out: Option<&Path>) -> Result<(), Failure> {
    let catalog = models::catalog()?;
    if let Some(dir) = all {
        std::fs::create_dir_all(dir).map_err(Error::from)?;
        for (n, m) in &catalog {
            let p = dir.join(format!("{n}.json"));
            m.to_file(None)?.save(&p)?;
            run.outputs.push(p.display().to_string());
        }
        return Ok(());
    }
    match name {
        None => {
            let list: Vec<&str> = catalog.iter().map(|(n, _)| *n).collect();
            run.emit(None, &format!("{}\n", list.join("\n")))
        }
        Some(n) => {
            let (_, m) = catalog
                .iter()
                .find(|(k, _)| *k == n)
                .ok_or_else(|| usage(format!("no example named `{n}`")))?;
            let text = m.to_file(None)?.to_json_string();
            run.emit(out, &text)
        }
    }
}

fn color_enabled() -> bool {
    match std::env::var("CATFLOW_COLOR").as_deref() {
        Ok("1") => true,
        Ok("0") => false,
        _ => std::io::stderr().is_terminal(),
    }
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(c) => c,
        Err(e) => {
            let code = if e.use_stderr() { 2 } else { 0 };
            let _ = e.print();
            return ExitCode::from(code);
        }
    };
    let start = Instant::now();
    let (name, result, mut run) = dispatch(cli.command);
    let (code, error) = match result {
        Ok(()) => (0u8, None),
        Err(Failure::Domain(m)) => (1, Some(m)),
        Err(Failure::Usage(m)) => (2, Some(m)),
    };
    let report = RunReport {
        command: name.into(),
        inputs: std::mem::take(&mut run.inputs),
        warnings: std::mem::take(&mut run.warnings),
        outputs: std::mem::take(&mut run.outputs),
        elapsed_ms: start.elapsed().as_secs_f64() * 1e3,
        rng: run.rng.take(),
        error,
        exit_code: code,
    };
    let mut err = std::io::stderr().lock();
    if cli.json {
        let _ = writeln!(err, "{}", serde_json::to_string(&report).expect("report serializes"));
    } else {
        let (warn, fail, reset) = if color_enabled() {
            ("\x1b[33m", "\x1b[31m", "\x1b[0m")
        } else {
            ("", "", "")
        };
        for w in &report.warnings {
            let _ = writeln!(err, "{warn}warning:{reset} {w}");
        }
        if let Some(e) = &report.error {
            let _ = writeln!(err, "{fail}error:{reset} {e}");
        }
    }
    ExitCode::from(code)
}

fn dispatch(command: Command) -> (&'static str, Result<(), Failure>, Run) {
    macro_rules! go {
        ($name:literal, |$run:ident| $body:expr) => {{
            let mut $run = Run::new($name);
            let r = $body;
            ($name, r, $run)
        }};
    }
    match command {
        Command::Validate { model } => go!("validate", |run| cmd_validate(&mut run, &model)),
        Command::Compose {
            left,
            right,
            foot_left,
            foot_right,
            match_by_name,
            out,
        } => go!("compose", |run| cmd_compose(
            &mut run,
            &left,
            &right,
            foot_left,
            foot_right,
            match_by_name,
            out.as_deref()
        )),
        Command::Stratify {
            aggregate,
            strata,
            type_diagram,
            aggregate_typing,
            strata_typing,
            auto_type,
            out,
        } => go!("stratify", |run| cmd_stratify(
            &mut run,
            &aggregate,
            &strata,
            &type_diagram,
            aggregate_typing.as_deref(),
            strata_typing.as_deref(),
            auto_type,
            out.as_deref()
        )),
        Command::Translate { model, to, out } => {
            go!("translate", |run| cmd_translate(&mut run, &model, to, out.as_deref()))
        }
        Command::Simulate {
            model,
            scenario,
            method,
            seed,
            sample_dt,
            replicates,
            out,
        } => go!("simulate", |run| cmd_simulate(
            &mut run,
            &model,
            &scenario,
            method,
            seed,
            sample_dt,
            replicates,
            out.as_deref()
        )),
        Command::Find {
            model,
            pattern,
            loops,
            max_len,
            max_path_len,
            injective,
            out,
        } => go!("find", |run| cmd_find(
            &mut run,
            &model,
            pattern.as_deref(),
            loops.as_deref(),
            max_len,
            max_path_len,
            injective,
            out.as_deref()
        )),
        Command::Export {
            model,
            dot,
            tables,
            implied,
        } => go!("export", |run| cmd_export(
            &mut run,
            &model,
            dot.as_deref(),
            tables.as_deref(),
            implied
        )),
        Command::Example { name, all, out } => go!("example", |run| cmd_example(
            &mut run,
            name.as_deref(),
            all.as_deref(),
            out.as_deref()
        )),
    }
}
