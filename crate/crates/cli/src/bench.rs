use std::fmt::Write as _;
use std::fs;
use std::path::{Path, PathBuf};
use std::process::{Command, Stdio};
use std::thread::sleep;
use std::time::{Duration, Instant};

use clap::Args;

use crate::manifest::RunManifest;
use crate::{sidecar_path, CliError, Result};

#[derive(Args)]
pub struct BenchArgs {
    /// Case files; each needs a `<case>_rens.json` beside it.
    #[arg(long = "case", required = true)]
    cases: Vec<PathBuf>,
    #[arg(long)]
    config: Option<PathBuf>,
    #[arg(long)]
    seed: Option<u64>,
    /// Threads for the multi-threaded IBLP column; defaults to all cores.
    #[arg(long)]
    threads: Option<usize>,
    #[arg(long, default_value_t = 3)]
    reps: usize,
    /// Per-run limit in seconds; a cell that hits it is marked with U+2014.
    #[arg(long, default_value_t = 600.0)]
    timeout: f64,
    #[arg(long, default_value = "drr_bench")]
    pub out: PathBuf,
}

enum Outcome {
    Done { seconds: f64, iterations: usize },
    TimedOut,
    Failed(String),
}

fn run_once(
    case: &Path,
    method: &str,
    threads: usize,
    a: &BenchArgs,
    dir: &Path,
) -> Result<Outcome> {
    let exe = std::env::current_exe()?;
    let mut cmd = Command::new(exe);
    cmd.arg("compute")
        .arg("--case")
        .arg(case)
        .arg("--renewables")
        .arg(sidecar_path(case, None))
        .arg("--method")
        .arg(method)
        .arg("--threads")
        .arg(threads.to_string())
        .arg("--out")
        .arg(dir)
        .env_remove("DRR_THREADS")
        .stdout(Stdio::null())
        .stderr(Stdio::null());
    if let Some(c) = &a.config {
        cmd.arg("--config").arg(c);
    }
    if let Some(s) = a.seed {
        cmd.arg("--seed").arg(s.to_string());
    }
    let started = Instant::now();
    let mut child = cmd.spawn()?;
    let limit = Duration::from_secs_f64(a.timeout.max(0.0));
    let status = loop {
        if let Some(s) = child.try_wait()? {
            break s;
        }
        if started.elapsed() > limit {
            let _ = child.kill();
            let _ = child.wait();
            return Ok(Outcome::TimedOut);
        }
        sleep(Duration::from_millis(10));
    };
    let wall = started.elapsed().as_secs_f64();
    if !matches!(status.code(), Some(0 | 2 | 3)) {
        return Ok(Outcome::Failed(format!("exit status {status}")));
    }
    let manifest: serde_json::Value =
        serde_json::from_str(&fs::read_to_string(dir.join("manifest.json"))?)?;
    let seconds = manifest["phases_ms"]["engine"]
        .as_f64()
        .map_or(wall, |ms| ms / 1e3);
    let iterations = fs::read_to_string(dir.join("trace.csv"))?
        .lines()
        .skip(1)
        .filter(|l| !l.is_empty())
        .count();
    Ok(Outcome::Done {
        seconds,
        iterations,
    })
}

fn median(v: &mut [f64]) -> f64 {
    v.sort_by(f64::total_cmp);
    let n = v.len();
    if n % 2 == 1 {
        v[n / 2]
    } else {
        0.5 * (v[n / 2 - 1] + v[n / 2])
    }
}

/// One row per case and method: `milp`, `iblp-st` and `iblp-mt`. Engine
/// time is taken from each child run's manifest.
pub fn bench(a: &BenchArgs, man: &mut RunManifest) -> Result<i32> {
    if a.reps == 0 {
        return Err(CliError::Usage("--reps must be positive".into()));
    }
    let mt = a
        .threads
        .or_else(|| {
            std::env::var("DRR_THREADS")
                .ok()
                .and_then(|v| v.parse().ok())
        })
        .unwrap_or_else(|| std::thread::available_parallelism().map_or(1, |n| n.get()));
    man.threads = Some(mt);
    if mt < 4 {
        man.warn(format!(
            "only {mt} thread(s) available; iblp-mt timings are not meaningful"
        ));
    }
    fs::create_dir_all(&a.out)?;
    let scratch = a.out.join("runs");
    let mut csv = String::from("case,method,threads,median_s,iterations\n");
    for case in &a.cases {
        man.input(case);
        man.input(&sidecar_path(case, None));
        let name = case
            .file_stem()
            .map(|s| s.to_string_lossy().into_owned())
            .unwrap_or_default();
        for (label, method, threads) in [
            ("milp", "milp", 1),
            ("iblp-st", "iblp", 1),
            ("iblp-mt", "iblp", mt),
        ] {
            let mut times = Vec::new();
            let mut iterations = 0;
            let mut cell: Option<String> = None;
            for rep in 0..a.reps {
                let dir = scratch.join(format!("{name}_{label}_{rep}"));
                match run_once(case, method, threads, a, &dir)? {
                    Outcome::Done {
                        seconds,
                        iterations: k,
                    } => {
                        times.push(seconds);
                        iterations = k;
                    }
                    Outcome::TimedOut => {
                        cell = Some("\u{2014}".into());
                        break;
                    }
                    Outcome::Failed(e) => {
                        man.warn(format!("{name} {label}: {e}"));
                        cell = Some("error".into());
                        break;
                    }
                }
            }
            let line = match cell {
                Some(mark) => format!("{name},{label},{threads},{mark},{mark}"),
                None => format!(
                    "{name},{label},{threads},{:.3},{iterations}",
                    median(&mut times)
                ),
            };
            println!("{line}");
            let _ = writeln!(csv, "{line}");
        }
    }
    let path = a.out.join("bench.csv");
    fs::write(&path, csv)?;
    man.artifact(&path);
    Ok(0)
}
