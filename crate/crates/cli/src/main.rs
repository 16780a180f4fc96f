use std::path::{Path, PathBuf};
use std::process::ExitCode;
use std::sync::atomic::{AtomicUsize, Ordering};
use std::sync::Mutex;

use anyhow::Context;
use clap::{Args, Parser, Subcommand, ValueEnum};
use otn_design::design::Design;
use otn_design::evaluate::{failure_drill, verify_design, DrillReport};
use otn_design::generate::{generate_instance, GeneratorSpec};
use otn_design::instance::{instance_to_string, parse_instance};
use otn_design::milp::{
    parse_model, write_model, write_solution, Backend, ExternalBackend, HighsBackend, MilpModel, Solution, SolveLimits,
};
use otn_design::pipeline::{run, RunManifest};
use otn_design::{
    validate_instance, Approach, CostModel, DesignConfig, Error, Instance, Survivability, Violation,
};
use otnplan::dot::export_dot;
use otnplan::report;

mod exit {
    pub const IO: u8 = 1;
    pub const INVALID_INSTANCE: u8 = 2;
    pub const SOLVER_MISSING: u8 = 3;
    pub const INFEASIBLE: u8 = 4;
    pub const VERIFICATION: u8 = 5;
    pub const DRILL: u8 = 6;
}

/// Survivable MPLS-over-OTN network design.
#[derive(Parser)]
#[command(name = "otnplan", version)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Write a synthetic instance.
    Generate(GenerateArgs),
    /// Design one or more (option, approach) combinations and report.
    Run(RunArgs),
    /// Export the physical topology, optionally with a design overlay, as DOT.
    Dot(DotArgs),
    /// Verify and failure-drill an existing design.
    Validate(ValidateArgs),
    /// Solve an LP file with the embedded solver (external-solver shim).
    LpSolve(LpSolveArgs),
}

#[derive(Args)]
struct InstanceSource {
    /// Instance JSON file.
    #[arg(long, conflicts_with = "generate", required_unless_present = "generate")]
    instance: Option<PathBuf>,
    /// Generated instance: kind:n:profile:seed[:demands], e.g. mesh:7:2,4,6:1:8.
    #[arg(long)]
    generate: Option<String>,
}

#[derive(Args)]
struct GenerateArgs {
    /// kind:n:profile:seed[:demands]; kind is ring, ring_plus_chords or mesh.
    spec: String,
    /// Wavelengths per link.
    #[arg(long, default_value_t = otn_design::generate::DEFAULT_WAVELENGTHS)]
    wavelengths: u32,
    /// Output file; stdout when omitted.
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Clone, Copy, ValueEnum)]
enum OptionArg {
    None,
    Single,
    Double,
    SpareUnprotected,
    Brs,
}

impl From<OptionArg> for Survivability {
    fn from(o: OptionArg) -> Survivability {
        match o {
            OptionArg::None => Survivability::None,
            OptionArg::Single => Survivability::SingleLayer,
            OptionArg::Double => Survivability::MultiDouble,
            OptionArg::SpareUnprotected => Survivability::MultiSpareUnprotected,
            OptionArg::Brs => Survivability::MultiInterlayerBrs,
        }
    }
}

#[derive(Clone, Copy, PartialEq, ValueEnum)]
enum ApproachArg {
    Sequential,
    Integrated,
    Both,
}

#[derive(Clone, Copy, PartialEq, ValueEnum)]
enum SolverArg {
    /// In-process HiGHS.
    Embedded,
    /// A child process given by --solver-cmd.
    External,
}

#[derive(Args)]
struct RunArgs {
    #[command(flatten)]
    source: InstanceSource,
    #[arg(long, value_enum, default_value = "single")]
    survivability: OptionArg,
    #[arg(long, value_enum, default_value = "sequential")]
    approach: ApproachArg,
    /// Run every survivability option, including none.
    #[arg(long)]
    compare_all: bool,
    /// Relative optimality gap.
    #[arg(long, default_value_t = DesignConfig::DEFAULT_GAP)]
    gap: f64,
    /// Global wall-clock limit per run in seconds, split across stages.
    #[arg(long, default_value_t = DesignConfig::DEFAULT_TIME_LIMIT)]
    time_limit: f64,
    /// Parallel lightpaths per node pair; overrides the instance value.
    #[arg(long)]
    q_max: Option<u8>,
    #[arg(long, value_enum, default_value = "embedded")]
    solver: SolverArg,
    /// External solver command with {lp} {sol} {gap} {time} placeholders.
    /// Defaults to this program's lp-solve subcommand.
    #[arg(long, env = "OTNPLAN_SOLVER_CMD")]
    solver_cmd: Option<String>,
    /// Keep every stage's LP model and solution under OUT/artifacts.
    #[arg(long)]
    keep_artifacts: bool,
    /// Retry an infeasible run once with q_max + 1.
    #[arg(long)]
    auto_grow_q: bool,
    /// Concurrent runs.
    #[arg(long, default_value_t = 1)]
    workers: usize,
    #[arg(long, default_value = "out")]
    out: PathBuf,
    /// Subtract each LSP's bandwidth only once at its destination even when
    /// a protection path also ends there.
    #[arg(long)]
    single_sink_count: bool,
    /// IP interface price.
    #[arg(long)]
    cost_ip: Option<f64>,
    /// OXC port price.
    #[arg(long)]
    cost_oxc: Option<f64>,
    /// Transponder price.
    #[arg(long)]
    cost_transponder: Option<f64>,
    /// Embedded solver random seed.
    #[arg(long, default_value_t = 0)]
    seed: i32,
}

#[derive(Args)]
struct DotArgs {
    #[command(flatten)]
    source: InstanceSource,
    /// Design JSON to overlay.
    #[arg(long)]
    design: Option<PathBuf>,
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Args)]
struct ValidateArgs {
    #[command(flatten)]
    source: InstanceSource,
    #[arg(long)]
    design: PathBuf,
    /// Run manifest holding the configuration the design was built with.
    #[arg(long)]
    manifest: Option<PathBuf>,
}

#[derive(Args)]
struct LpSolveArgs {
    lp: PathBuf,
    sol: PathBuf,
    #[arg(long, default_value_t = 0.0)]
    gap: f64,
    #[arg(long, default_value_t = 3600.0)]
    time: f64,
}

/// A failure with its exit code.
struct Fail(u8, anyhow::Error);

impl<E: Into<anyhow::Error>> From<E> for Fail {
    fn from(e: E) -> Fail {
        Fail(exit::IO, e.into())
    }
}

fn fail(code: u8, msg: impl Into<String>) -> Fail {
    Fail(code, anyhow::anyhow!(msg.into()))
}

fn main() -> ExitCode {
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("warn")).init();
    let cli = Cli::parse();
    let out = match cli.command {
        Command::Generate(a) => cmd_generate(a),
        Command::Run(a) => cmd_run(a),
        Command::Dot(a) => cmd_dot(a),
        Command::Validate(a) => cmd_validate(a),
        Command::LpSolve(a) => cmd_lp_solve(a),
    };
    match out {
        Ok(code) => ExitCode::from(code),
        Err(Fail(code, e)) => {
            eprintln!("error: {e:#}");
            ExitCode::from(code)
        }
    }
}

fn load_instance(src: &InstanceSource) -> Result<Instance, Fail> {
    if let Some(spec) = &src.generate {
        let spec: GeneratorSpec = spec.parse().map_err(|e: String| fail(exit::INVALID_INSTANCE, e))?;
        return generate_instance(&spec).map_err(|e| fail(exit::INVALID_INSTANCE, e));
    }
    let path = src.instance.as_ref().expect("clap requires one instance source");
    let text = std::fs::read_to_string(path).with_context(|| format!("reading {}", path.display()))?;
    parse_instance(&text).map_err(|e| fail(exit::INVALID_INSTANCE, format!("{}: {e}", path.display())))
}

fn write(path: &Path, text: impl AsRef<[u8]>) -> Result<(), Fail> {
    std::fs::write(path, text).with_context(|| format!("writing {}", path.display()))?;
    Ok(())
}

fn to_json<T: serde::Serialize>(v: &T) -> String {
    serde_json::to_string_pretty(v).expect("report types serialize") + "\n"
}

fn cmd_generate(a: GenerateArgs) -> Result<u8, Fail> {
    let mut spec: GeneratorSpec = a.spec.parse().map_err(|e: String| fail(exit::INVALID_INSTANCE, e))?;
    spec.wavelengths = a.wavelengths;
    let inst = generate_instance(&spec).map_err(|e| fail(exit::INVALID_INSTANCE, e))?;
    let text = instance_to_string(&inst);
    match a.out {
        Some(p) => write(&p, text)?,
        None => print!("{text}"),
    }
    Ok(0)
}

fn cmd_dot(a: DotArgs) -> Result<u8, Fail> {
    let inst = load_instance(&a.source)?;
    let design = match &a.design {
        Some(p) => Some(read_design(p)?),
        None => None,
    };
    let text = export_dot(&inst, design.as_ref());
    match a.out {
        Some(p) => write(&p, text)?,
        None => print!("{text}"),
    }
    Ok(0)
}

fn read_design(p: &Path) -> Result<Design, Fail> {
    let text = std::fs::read_to_string(p).with_context(|| format!("reading {}", p.display()))?;
    serde_json::from_str(&text).map_err(|e| fail(exit::IO, format!("{}: {e}", p.display())))
}

fn cmd_lp_solve(a: LpSolveArgs) -> Result<u8, Fail> {
    let text = std::fs::read_to_string(&a.lp).with_context(|| format!("reading {}", a.lp.display()))?;
    let model = parse_model(&text)?;
    let limits = SolveLimits { optimality_gap: a.gap, time_limit: std::time::Duration::from_secs_f64(a.time.max(0.001)) };
    let sol = otn_design::milp::solve(&HighsBackend::default(), &model, &limits);
    write(&a.sol, write_solution(&model, &sol))?;
    Ok(0)
}

fn check_design(design: &Design, inst: &Instance, cfg: &DesignConfig) -> (Vec<Violation>, Vec<DrillReport>, u8) {
    let violations = verify_design(design, inst, cfg);
    let drill = failure_drill(design, inst);
    let code = if !violations.is_empty() {
        exit::VERIFICATION
    } else if design.survivability != Survivability::None && drill.iter().any(|r| !r.restorable) {
        exit::DRILL
    } else {
        0
    };
    (violations, drill, code)
}

fn cmd_validate(a: ValidateArgs) -> Result<u8, Fail> {
    let inst = load_instance(&a.source)?;
    let design = read_design(&a.design)?;
    let cfg = match &a.manifest {
        Some(p) => {
            let text = std::fs::read_to_string(p).with_context(|| format!("reading {}", p.display()))?;
            let m: RunManifest = serde_json::from_str(&text).map_err(|e| fail(exit::IO, format!("{}: {e}", p.display())))?;
            m.config
        }
        None => {
            let mut cfg = DesignConfig::new(&inst, design.survivability, design.approach);
            cfg.interfaces = design.logical.interfaces;
            if let Some(q) = design.logical.lightpaths.iter().map(|lp| lp.key.q).max() {
                cfg.q_max = cfg.q_max.max(q);
            }
            cfg
        }
    };
    let (violations, drill, code) = check_design(&design, &inst, &cfg);
    print!("{}", report::violations_text(&violations));
    let ok = drill.iter().filter(|r| r.restorable).count();
    println!("{ok}/{} single failures restorable", drill.len());
    Ok(code)
}

/// Wraps a backend and saves each stage's model and solution.
struct KeepArtifacts {
    inner: Box<dyn Backend>,
    external: Option<String>,
    dir: PathBuf,
}

impl Backend for KeepArtifacts {
    fn name(&self) -> String {
        self.inner.name()
    }

    fn solve(&self, model: &MilpModel, limits: &SolveLimits) -> Solution {
        let dir = self.dir.join(&model.name);
        let sol = match &self.external {
            Some(cmd) => ExternalBackend { command: cmd.clone(), keep: Some(dir.clone()) }.solve(model, limits),
            None => self.inner.solve(model, limits),
        };
        if std::fs::create_dir_all(&dir).is_ok() {
            if let Ok(text) = write_model(model) {
                let _ = std::fs::write(dir.join("model.lp"), text);
            }
            let _ = std::fs::write(dir.join("rows.json"), to_json(&model.row_tags()));
            let _ = std::fs::write(dir.join("model.sol"), write_solution(model, &sol));
        }
        sol
    }
}

struct Job {
    option: Survivability,
    approach: Approach,
}

impl Job {
    fn stem(&self) -> String {
        format!("{}-{}", self.option.slug(), self.approach.slug())
    }
}

struct Outcome {
    design: Option<Design>,
    code: u8,
    line: String,
}

fn cmd_run(a: RunArgs) -> Result<u8, Fail> {
    let inst = load_instance(&a.source)?;
    let mut prices = CostModel { rate: inst.capacity, ..Default::default() };
    if let Some(c) = a.cost_ip {
        prices.ip_interface = c;
    }
    if let Some(c) = a.cost_oxc {
        prices.oxc_port = c;
    }
    if let Some(c) = a.cost_transponder {
        prices.transponder = c;
    }
    if !prices.is_valid() {
        return Err(fail(exit::INVALID_INSTANCE, "component prices must be positive and finite"));
    }
    let costs = prices.derive();

    let options: Vec<Survivability> = if a.compare_all {
        std::iter::once(Survivability::None).chain(Survivability::PROTECTED).collect()
    } else {
        vec![a.survivability.into()]
    };
    let approaches = match a.approach {
        ApproachArg::Sequential => vec![Approach::Sequential],
        ApproachArg::Integrated => vec![Approach::Integrated],
        ApproachArg::Both => vec![Approach::Sequential, Approach::Integrated],
    };
    let jobs: Vec<Job> = options
        .iter()
        .flat_map(|&option| approaches.iter().map(move |&approach| Job { option, approach }))
        .collect();

    let config = |job: &Job| {
        let mut cfg = DesignConfig::new(&inst, job.option, job.approach).with_gap(a.gap).with_time_limit(a.time_limit);
        if let Some(q) = a.q_max {
            let t = cfg.interfaces;
            cfg = cfg.with_q_max(q, inst.topology.node_count());
            if inst.interfaces.is_some() {
                cfg.interfaces = t;
            }
        }
        cfg.transit_double_count_correction = !a.single_sink_count;
        cfg.auto_grow_q = a.auto_grow_q;
        cfg
    };
    for job in &jobs {
        let v = validate_instance(&inst.topology, &inst.traffic, inst.capacity, &config(job));
        if !v.is_empty() {
            let msgs: Vec<String> = v.iter().map(|x| x.to_string()).collect();
            return Err(fail(exit::INVALID_INSTANCE, format!("invalid instance for {}: {}", job.option, msgs.join("; "))));
        }
    }
    std::fs::create_dir_all(&a.out).with_context(|| format!("creating {}", a.out.display()))?;
    let out = a.out.as_path();

    let external = (a.solver == SolverArg::External).then(|| {
        a.solver_cmd.clone().unwrap_or_else(|| {
            let exe = std::env::current_exe().map(|p| p.display().to_string()).unwrap_or_else(|_| "otnplan".into());
            format!("{exe} lp-solve {{lp}} {{sol}} --gap {{gap}} --time {{time}}")
        })
    });
    let backend_for = |job: &Job| -> Box<dyn Backend> {
        let inner: Box<dyn Backend> = match &external {
            Some(cmd) => Box::new(ExternalBackend { command: cmd.clone(), keep: None }),
            None => Box::new(HighsBackend { seed: a.seed }),
        };
        if a.keep_artifacts {
            Box::new(KeepArtifacts { inner, external: external.clone(), dir: out.join("artifacts").join(job.stem()) })
        } else {
            inner
        }
    };

    let run_job = |job: &Job| -> Result<Outcome, Fail> {
        let cfg = config(job);
        let backend = backend_for(job);
        let stem = job.stem();
        let name = format!("{} {}", job.option, job.approach);
        match run(&inst, &cfg, &costs, backend.as_ref()) {
            Ok(res) => {
                let d = &res.design;
                let (violations, drill, code) = check_design(d, &inst, &res.config);
                write(&out.join(format!("{stem}.design.json")), to_json(d))?;
                write(&out.join(format!("{stem}.manifest.json")), to_json(&RunManifest::new(&inst, &res)))?;
                write(&out.join(format!("{stem}.verify.json")), to_json(&violations))?;
                write(&out.join(format!("{stem}.verify.txt")), report::violations_text(&violations))?;
                write(&out.join(format!("{stem}.drill.json")), to_json(&drill))?;
                write(&out.join(format!("{stem}.drill.txt")), report::drill_text(&drill))?;
                write(&out.join(format!("{stem}.dot")), export_dot(&inst, Some(d)))?;
                let ok = drill.iter().filter(|r| r.restorable).count();
                let total = d.cost.map(|c| c.total).unwrap_or(0.0);
                let line = format!(
                    "{name}: total cost {total:.1}, {} violation(s), {ok}/{} failures restorable",
                    violations.len(),
                    drill.len()
                );
                Ok(Outcome { design: Some(res.design), code, line })
            }
            Err(e) => {
                let code = match &e {
                    Error::SolverMissing(_) => exit::SOLVER_MISSING,
                    Error::StageFailed { .. } => exit::INFEASIBLE,
                    _ => exit::IO,
                };
                if let Error::StageFailed { partial, .. } = &e {
                    write(&out.join(format!("{stem}.partial.json")), to_json(partial.as_ref()))?;
                }
                let hint = if code == exit::SOLVER_MISSING {
                    " (check --solver-cmd / OTNPLAN_SOLVER_CMD, or use --solver embedded)"
                } else {
                    ""
                };
                Ok(Outcome { design: None, code, line: format!("{name}: {e}{hint}") })
            }
        }
    };

    let results: Vec<Mutex<Option<Result<Outcome, Fail>>>> = jobs.iter().map(|_| Mutex::new(None)).collect();
    let next = AtomicUsize::new(0);
    std::thread::scope(|s| {
        for _ in 0..a.workers.clamp(1, jobs.len().max(1)) {
            s.spawn(|| loop {
                let i = next.fetch_add(1, Ordering::SeqCst);
                let Some(job) = jobs.get(i) else { break };
                *results[i].lock().expect("no poisoned slots") = Some(run_job(job));
            });
        }
    });

    let mut designs = Vec::new();
    let mut code = 0u8;
    for slot in results {
        let outcome = slot.into_inner().expect("no poisoned slots").expect("every job ran")?;
        println!("{}", outcome.line);
        if outcome.code != 0 && (code == 0 || outcome.code < code) {
            code = outcome.code;
        }
        designs.extend(outcome.design);
    }
    let refs: Vec<&Design> = designs.iter().collect();
    if !refs.is_empty() {
        write(&out.join("comparison.csv"), report::comparison_csv(&refs))?;
        let table = report::comparison_text(&refs);
        write(&out.join("comparison.txt"), &table)?;
        write(&out.join("costs.csv"), report::costs_csv(&refs))?;
        print!("\n{table}");
    }
    let pairs: Vec<(&Design, &Design)> = options
        .iter()
        .filter_map(|o| {
            let find = |ap| refs.iter().copied().find(|d| d.survivability == *o && d.approach == ap);
            Some((find(Approach::Sequential)?, find(Approach::Integrated)?))
        })
        .collect();
    if !pairs.is_empty() {
        write(&out.join("approaches.csv"), report::approaches_csv(&pairs))?;
        let table = report::approaches_text(&pairs);
        write(&out.join("approaches.txt"), &table)?;
        print!("\n{table}");
    }
    Ok(code)
}
