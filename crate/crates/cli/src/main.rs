mod bench;
mod manifest;

use std::fs;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};
use drr_core::binding::identify;
use drr_core::checks::run_checks;
use drr_core::engine::run_model;
use drr_core::export::export_artifacts;
use drr_core::{
    apply_renewables, build_compact, high_risk_event, init_w0, initial_dispatch, parse_matpower,
    parse_renewables_json, CaseData, CompactPsd, DispatchPoint, DrrError, FeasibilityModel, Method,
    Polytope, Provenance, SlackWeights, StudyConfig, Termination,
};

use manifest::RunManifest;

#[derive(Debug, thiserror::Error)]
pub enum CliError {
    #[error("{path}: {source}")]
    Read {
        path: PathBuf,
        source: std::io::Error,
    },
    #[error(transparent)]
    Drr(#[from] DrrError),
    #[error("{0}")]
    Usage(String),
    #[error(transparent)]
    Io(#[from] std::io::Error),
    #[error(transparent)]
    Json(#[from] serde_json::Error),
}

type Result<T> = std::result::Result<T, CliError>;

#[derive(Parser)]
#[command(
    name = "drr",
    version,
    about = "Dispatchable regions for renewable generation"
)]
struct Cli {
    /// Log progress to stderr.
    #[arg(long, global = true)]
    verbose: bool,
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Compute the region and write all artifacts.
    Compute(ComputeArgs),
    /// Identify the constraints behind each facet of a region.
    Binding(BindingArgs),
    /// Run model self-checks; optionally report the violation at one point.
    Validate(ValidateArgs),
    /// Time every method on a set of cases.
    Bench(bench::BenchArgs),
}

#[derive(Clone, Copy, Debug, ValueEnum)]
enum MethodArg {
    Milp,
    Iblp,
}

impl From<MethodArg> for Method {
    fn from(m: MethodArg) -> Self {
        match m {
            MethodArg::Milp => Method::Milp,
            MethodArg::Iblp => Method::Iblp,
        }
    }
}

#[derive(Args, Clone)]
struct CaseArgs {
    /// MATPOWER case file.
    #[arg(long)]
    case: PathBuf,
    /// Renewable designation JSON; defaults to `<case>_rens.json`.
    #[arg(long)]
    renewables: Option<PathBuf>,
    /// Study configuration (TOML or JSON).
    #[arg(long)]
    config: Option<PathBuf>,
    #[arg(long)]
    seed: Option<u64>,
    /// Worker threads; DRR_THREADS sets the default.
    #[arg(long)]
    threads: Option<usize>,
}

#[derive(Args)]
struct ComputeArgs {
    #[command(flatten)]
    case: CaseArgs,
    #[arg(long, value_enum, default_value = "iblp")]
    method: MethodArg,
    #[arg(long, default_value = "drr_out")]
    out: PathBuf,
    #[arg(long)]
    allow_ambiguous: bool,
}

#[derive(Args)]
struct BindingArgs {
    #[command(flatten)]
    case: CaseArgs,
    /// region.json from an earlier run; computed afresh when absent.
    #[arg(long)]
    region: Option<PathBuf>,
    #[arg(long, value_enum, default_value = "iblp")]
    method: MethodArg,
    #[arg(long, default_value = "drr_out")]
    out: PathBuf,
    #[arg(long)]
    allow_ambiguous: bool,
}

#[derive(Args)]
struct ValidateArgs {
    #[command(flatten)]
    case: CaseArgs,
    /// Renewable output in MW, comma separated, to evaluate.
    #[arg(long, value_delimiter = ',')]
    w: Option<Vec<f64>>,
    #[arg(long, default_value = "drr_out")]
    out: PathBuf,
}

struct Study {
    case: CaseData,
    cfg: StudyConfig,
    dp: DispatchPoint,
    model: CompactPsd,
}

fn read(path: &Path) -> Result<String> {
    fs::read_to_string(path).map_err(|source| CliError::Read {
        path: path.to_path_buf(),
        source,
    })
}

pub(crate) fn sidecar_path(case: &Path, given: Option<&Path>) -> PathBuf {
    given.map(Path::to_path_buf).unwrap_or_else(|| {
        let stem = case
            .file_stem()
            .map(|s| s.to_string_lossy().into_owned())
            .unwrap_or_default();
        case.with_file_name(format!("{stem}_rens.json"))
    })
}

fn env_threads() -> Option<usize> {
    std::env::var("DRR_THREADS")
        .ok()
        .and_then(|v| v.trim().parse().ok())
}

/// Loads inputs and settles the configuration. Threads resolve from the
/// flag, then DRR_THREADS, then the config file, then the method default.
fn load_study(a: &CaseArgs, method: Method, man: &mut RunManifest) -> Result<Study> {
    let rens = sidecar_path(&a.case, a.renewables.as_deref());
    let case_text = read(&a.case)?;
    let rens_text = read(&rens)?;
    man.input(&a.case);
    man.input(&rens);
    let mut cfg = match &a.config {
        Some(p) => {
            let text = read(p)?;
            man.input(p);
            StudyConfig::from_text(&text)?
        }
        None => StudyConfig::default(),
    };
    if let Some(s) = a.seed {
        cfg.seed = s;
    }
    let explicit = a.threads.or_else(env_threads);
    match method {
        Method::Milp => {
            if explicit.is_some_and(|t| t > 1) {
                man.warn("the MILP oracle is serial; --threads is ignored".into());
            }
            cfg.thread_count = 1;
        }
        Method::Iblp => {
            if let Some(t) = explicit {
                cfg.thread_count = t;
            }
        }
    }
    cfg.validate()?;
    man.config = Some(cfg.echo());
    man.threads = Some(cfg.threads());
    let study = man.time("load", || -> Result<Study> {
        let raw = parse_matpower(&case_text)?;
        let specs = parse_renewables_json(&rens_text)?;
        let case = apply_renewables(&raw, &specs)?;
        let dp = initial_dispatch(&case, &cfg)?;
        let model = build_compact(&case, &dp)?;
        Ok(Study {
            case,
            cfg,
            dp,
            model,
        })
    })?;
    Ok(study)
}

fn names(case: &CaseData) -> Vec<String> {
    case.renewables.iter().map(|r| r.name.clone()).collect()
}

fn angle_limits(case: &CaseData) -> bool {
    case.lines
        .iter()
        .any(|l| l.angle_min_rad.is_some() || l.angle_max_rad.is_some())
}

fn exit_for(t: Termination) -> i32 {
    match t {
        Termination::Converged => 0,
        Termination::EmptyRegion => 2,
        Termination::MaxIterations => 3,
    }
}

fn compute(a: &ComputeArgs, man: &mut RunManifest) -> Result<i32> {
    let method: Method = a.method.into();
    let st = load_study(&a.case, method, man)?;
    let w0 = init_w0(&st.case)?;
    let result = man.time("engine", || {
        run_model(
            &st.model,
            &st.dp,
            w0,
            &st.cfg,
            method,
            names(&st.case),
            angle_limits(&st.case),
        )
    })?;
    let code = exit_for(result.termination);
    println!(
        "{}: {:?} after {} iteration(s), {} facet(s)",
        method,
        result.termination,
        result.trace.len(),
        result.polytope.len()
    );
    let (report, event) = if result.termination == Termination::EmptyRegion {
        (None, None)
    } else {
        let report = man.time("binding", || {
            identify(
                &st.model,
                &result.polytope,
                &result.metadata.renewables,
                &st.cfg,
                a.allow_ambiguous,
            )
        });
        let report = match report {
            Ok(r) => Some(r),
            Err(e) if result.termination == Termination::MaxIterations => {
                man.warn(format!("binding identification skipped: {e}"));
                None
            }
            Err(e) => return Err(e.into()),
        };
        let region_mw = result.region_mw();
        let event = man.time("event", || {
            high_risk_event(&region_mw, &result.metadata.w_bar_mw)
        })?;
        (report, Some(event))
    };
    let summary = man.time("export", || {
        export_artifacts(&result, report.as_ref(), event.as_ref(), &a.out)
    })?;
    for f in &summary.files {
        man.artifact(f);
    }
    man.svg_skipped = Some(summary.svg_skipped);
    if let Some(r) = &report {
        print!("{}", r.to_table());
    }
    if let Some(e) = &event {
        println!(
            "high-risk event: {:?} -> {:?} MW, distance {:.4} MW",
            e.from, e.to, e.distance
        );
    }
    Ok(code)
}

/// Reads the region (converted back to per-unit) from a region.json.
fn load_region(path: &Path, base_mva: f64) -> Result<Polytope> {
    let v: serde_json::Value = serde_json::from_str(&read(path)?)?;
    let field = |k: &str| {
        v.get(k)
            .cloned()
            .ok_or_else(|| CliError::Usage(format!("{}: missing `{k}`", path.display())))
    };
    let h: Vec<Vec<f64>> = serde_json::from_value(field("H")?)?;
    let f: Vec<f64> = serde_json::from_value(field("f_mw")?)?;
    let provenance: Vec<Provenance> = serde_json::from_value(field("provenance")?)?;
    let lo: Vec<f64> = serde_json::from_value(field("box_lo_mw")?)?;
    let hi: Vec<f64> = serde_json::from_value(field("box_hi_mw")?)?;
    let dim: usize = serde_json::from_value(field("dim")?)?;
    if h.len() != f.len() || h.len() != provenance.len() || h.iter().any(|r| r.len() != dim) {
        return Err(CliError::Usage(format!(
            "{}: inconsistent region dimensions",
            path.display()
        )));
    }
    Ok(Polytope {
        dim,
        h,
        f: f.iter().map(|x| x / base_mva).collect(),
        provenance,
        box_lo: lo.iter().map(|x| x / base_mva).collect(),
        box_hi: hi.iter().map(|x| x / base_mva).collect(),
    })
}

fn binding(a: &BindingArgs, man: &mut RunManifest) -> Result<i32> {
    let method: Method = a.method.into();
    let st = load_study(&a.case, method, man)?;
    let renewables = names(&st.case);
    let region = match &a.region {
        Some(p) => {
            man.input(p);
            load_region(p, st.model.base_mva)?
        }
        None => {
            let w0 = init_w0(&st.case)?;
            let r = man.time("engine", || {
                run_model(
                    &st.model,
                    &st.dp,
                    w0,
                    &st.cfg,
                    method,
                    renewables.clone(),
                    angle_limits(&st.case),
                )
            })?;
            if r.termination != Termination::Converged {
                println!("region computation ended with {:?}", r.termination);
                return Ok(exit_for(r.termination));
            }
            r.polytope
        }
    };
    if region.dim != st.model.nw {
        return Err(CliError::Usage(format!(
            "region has dimension {} but the case has {} renewables",
            region.dim, st.model.nw
        )));
    }
    let report = man.time("binding", || {
        identify(&st.model, &region, &renewables, &st.cfg, a.allow_ambiguous)
    })?;
    fs::create_dir_all(&a.out)?;
    let path = a.out.join("binding.json");
    let doc = serde_json::json!({
        "report": report,
        "seed": st.cfg.seed,
        "config": st.cfg.echo(),
    });
    fs::write(&path, serde_json::to_string_pretty(&doc)? + "\n")?;
    man.artifact(&path);
    print!("{}", report.to_table());
    Ok(0)
}

fn validate(a: &ValidateArgs, man: &mut RunManifest) -> Result<i32> {
    let st = load_study(&a.case, Method::Iblp, man)?;
    let w0 = init_w0(&st.case)?;
    let checks = man.time("checks", || run_checks(&st.case, &st.model, &w0, &st.cfg))?;
    let mut ok = true;
    for c in &checks {
        println!(
            "{} {}: {}",
            if c.passed { "PASS" } else { "FAIL" },
            c.name,
            c.detail
        );
        ok &= c.passed;
    }
    if let Some(w_mw) = &a.w {
        if w_mw.len() != st.model.nw {
            return Err(CliError::Usage(format!(
                "--w needs {} value(s)",
                st.model.nw
            )));
        }
        let w = st.model.to_pu(w_mw);
        let weights = SlackWeights::from_prices(&st.model, &st.cfg.weights);
        let res = FeasibilityModel::new(&st.model, &weights)?.evaluate(&w)?;
        println!(
            "violation at w = {:?} MW: {:.6} MW",
            w_mw,
            res.objective * st.model.base_mva
        );
        for (d, s) in res.slack_by_row(&st.model, st.cfg.eps_slack) {
            println!("  {:<52} {:>12.6} MW", d.label, s * st.model.base_mva);
        }
    }
    Ok(if ok { 0 } else { 1 })
}

fn out_dir(cmd: &Command) -> PathBuf {
    match cmd {
        Command::Compute(a) => a.out.clone(),
        Command::Binding(a) => a.out.clone(),
        Command::Validate(a) => a.out.clone(),
        Command::Bench(a) => a.out.clone(),
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    env_logger::Builder::new()
        .filter_level(if cli.verbose {
            log::LevelFilter::Info
        } else {
            log::LevelFilter::Warn
        })
        .parse_default_env()
        .init();
    let name = match &cli.command {
        Command::Compute(_) => "compute",
        Command::Binding(_) => "binding",
        Command::Validate(_) => "validate",
        Command::Bench(_) => "bench",
    };
    let mut man = RunManifest::new(name);
    let result = match &cli.command {
        Command::Compute(a) => compute(a, &mut man),
        Command::Binding(a) => binding(a, &mut man),
        Command::Validate(a) => validate(a, &mut man),
        Command::Bench(a) => bench::bench(a, &mut man),
    };
    let code = match result {
        Ok(c) => {
            man.status = match c {
                0 => "ok",
                2 => "empty_region",
                3 => "max_iterations",
                _ => "failed",
            }
            .into();
            c
        }
        Err(e) => {
            eprintln!("error: {e}");
            man.error = Some(e.to_string());
            man.status = "error".into();
            1
        }
    };
    man.exit_code = code;
    if let Err(e) = man.write(&out_dir(&cli.command)) {
        eprintln!("error: could not write manifest: {e}");
    }
    ExitCode::from(code as u8)
}
