//! Command-line front end over the catalog.
//!
//! Exit codes: 0 success, 1 runtime failure (or a failed verification),
//! 2 hypothesis violation during a solve, 64 usage error. Output files are
//! written to a temporary sibling and renamed into place.

use std::ffi::OsString;
use std::io::Write;
use std::path::{Path, PathBuf};

use clap::{Args, Parser, Subcommand};
use serde::Serialize;

use crate::catalog::ProblemSpec;
use crate::error::{Error, Result};
use crate::funnel::{
    approximation_cascade, contractibility_probe, sample_funnel, CascadeConfig, Strategy,
};
use crate::integrator::{solve, StepControl};
use crate::jumpspace::Trajectory;
use crate::problem::{
    check_growth, check_surfaces, check_transversality, gronwall_bounds, GronwallBounds,
    SamplingGrid, StateBox, VerificationReport,
};

pub const EXIT_OK: i32 = 0;
pub const EXIT_FAILURE: i32 = 1;
pub const EXIT_HYPOTHESIS: i32 = 2;
pub const EXIT_USAGE: i32 = 64;

#[derive(Parser, Debug)]
#[command(
    name = "pulse",
    version,
    about = "Impulsive differential inclusions: solve, verify, sample"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Args, Debug)]
struct Common {
    /// Catalog problem name.
    #[arg(long)]
    problem: String,
    /// Parameter override `key=<json>`, repeatable.
    #[arg(long = "param", value_name = "KEY=JSON")]
    params: Vec<String>,
    /// Verification region override `lo1,lo2,..:hi1,hi2,..`.
    #[arg(long)]
    region: Option<String>,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    /// Output file; stdout when absent.
    #[arg(long)]
    out: Option<PathBuf>,
    #[arg(long = "tol-rel")]
    tol_rel: Option<f64>,
    #[arg(long = "tol-abs")]
    tol_abs: Option<f64>,
    #[arg(long = "tol-event")]
    tol_event: Option<f64>,
}

#[derive(Subcommand, Debug)]
enum Command {
    /// Solve one trajectory under a selection.
    Solve {
        #[command(flatten)]
        common: Common,
        /// zero | center | extreme:<d> | bangbang:<k> | mollified:<n>
        #[arg(long, default_value = "center")]
        selection: String,
        /// Also write a (t, y_1..y_N) table; event times appear twice.
        #[arg(long)]
        csv: Option<PathBuf>,
    },
    /// Check growth, surface and transversality hypotheses on a grid.
    Verify {
        #[command(flatten)]
        common: Common,
        /// Points per state axis.
        #[arg(long, default_value_t = 64)]
        grid: usize,
        /// Points along [0, a].
        #[arg(long = "t-grid", default_value_t = 9)]
        t_grid: usize,
    },
    /// Sample the solution funnel.
    Funnel {
        #[command(flatten)]
        common: Common,
        /// Strategy, repeatable; members cycle through them.
        #[arg(long, default_value = "bangbang:3")]
        selection: Vec<String>,
        #[arg(long, default_value_t = 10)]
        count: usize,
    },
    /// Compare mollification levels.
    Cascade {
        #[command(flatten)]
        common: Common,
        #[arg(long, value_delimiter = ',', default_value = "4,8,16,32")]
        levels: Vec<usize>,
        #[arg(long, default_value_t = 32)]
        count: usize,
        #[arg(long, default_value_t = 5)]
        k: usize,
        #[arg(long, default_value_t = 3)]
        switches: usize,
    },
    /// Probe the contraction homotopy.
    Contract {
        #[command(flatten)]
        common: Common,
        #[arg(long, default_value_t = 16)]
        n: usize,
        #[arg(long, default_value_t = 20)]
        samples: usize,
        #[arg(long = "r-steps", default_value_t = 64)]
        r_steps: usize,
    },
}

/// Failures sorted by exit code.
enum Failure {
    Usage(String),
    Run(Error),
}

impl From<Error> for Failure {
    fn from(e: Error) -> Self {
        Failure::Run(e)
    }
}

type CmdResult = std::result::Result<i32, Failure>;

/// Parses `args` (program name first) and runs the command.
pub fn run<I, T>(args: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(cli) => cli,
        Err(e) => {
            let _ = e.print();
            return if e.use_stderr() { EXIT_USAGE } else { EXIT_OK };
        }
    };
    let outcome = match threads_from_env() {
        Ok(Some(n)) => match rayon::ThreadPoolBuilder::new().num_threads(n).build() {
            Ok(pool) => pool.install(|| dispatch(cli.command)),
            Err(e) => Err(Failure::Run(Error::Contract(e.to_string()))),
        },
        Ok(None) => dispatch(cli.command),
        Err(msg) => Err(Failure::Usage(msg)),
    };
    match outcome {
        Ok(code) => code,
        Err(Failure::Usage(msg)) => {
            eprintln!("error: {msg}");
            EXIT_USAGE
        }
        Err(Failure::Run(e)) => {
            eprintln!("error: {e}");
            if e.is_hypothesis_violation() {
                EXIT_HYPOTHESIS
            } else {
                EXIT_FAILURE
            }
        }
    }
}

fn threads_from_env() -> std::result::Result<Option<usize>, String> {
    match std::env::var("PULSE_THREADS") {
        Err(_) => Ok(None),
        Ok(v) => match v.trim().parse::<usize>() {
            Ok(n) if n >= 1 => Ok(Some(n)),
            _ => Err(format!(
                "PULSE_THREADS must be a positive integer, got `{v}`"
            )),
        },
    }
}

fn dispatch(command: Command) -> CmdResult {
    match command {
        Command::Solve {
            common,
            selection,
            csv,
        } => cmd_solve(&common, &selection, csv.as_deref()),
        Command::Verify {
            common,
            grid,
            t_grid,
        } => cmd_verify(&common, grid, t_grid),
        Command::Funnel {
            common,
            selection,
            count,
        } => cmd_funnel(&common, &selection, count),
        Command::Cascade {
            common,
            levels,
            count,
            k,
            switches,
        } => cmd_cascade(&common, &levels, count, k, switches),
        Command::Contract {
            common,
            n,
            samples,
            r_steps,
        } => cmd_contract(&common, n, samples, r_steps),
    }
}

fn parse_region(raw: &str) -> std::result::Result<StateBox, String> {
    let parse = |s: &str| -> std::result::Result<Vec<f64>, String> {
        s.split(',')
            .map(|x| {
                x.trim()
                    .parse::<f64>()
                    .map_err(|_| format!("bad region bound `{x}`"))
            })
            .collect()
    };
    let (lo, hi) = raw
        .split_once(':')
        .ok_or_else(|| format!("region `{raw}` is not `lo,..:hi,..`"))?;
    Ok(StateBox {
        lower: parse(lo)?,
        upper: parse(hi)?,
    })
}

fn load(
    common: &Common,
) -> std::result::Result<(ProblemSpec, crate::problem::InclusionProblem), Failure> {
    if !crate::catalog::is_registered(&common.problem) {
        return Err(Failure::Usage(format!(
            "unknown problem `{}` (known: {})",
            common.problem,
            crate::catalog::NAMES.join(", ")
        )));
    }
    let mut spec = ProblemSpec::new(&common.problem);
    spec.seed = common.seed;
    for p in &common.params {
        spec.set_param(p)
            .map_err(|e| Failure::Usage(e.to_string()))?;
    }
    if let Some(r) = &common.region {
        spec.region = Some(parse_region(r).map_err(Failure::Usage)?);
    }
    let problem = match spec.build() {
        Ok(p) => p,
        Err(e @ Error::Contract(_)) => return Err(Failure::Usage(e.to_string())),
        Err(e) => return Err(Failure::Run(e)),
    };
    Ok((spec, problem))
}

fn control(common: &Common) -> std::result::Result<StepControl, Failure> {
    let mut ctl = StepControl::default();
    if let Some(v) = common.tol_rel {
        ctl.rtol = v;
    }
    if let Some(v) = common.tol_abs {
        ctl.atol = v;
    }
    if let Some(v) = common.tol_event {
        ctl.event_tol = v;
    }
    ctl.validate().map_err(|e| Failure::Usage(e.to_string()))?;
    Ok(ctl)
}

fn strategy(raw: &str) -> std::result::Result<Strategy, Failure> {
    raw.parse()
        .map_err(|e: Error| Failure::Usage(e.to_string()))
}

/// Writes `bytes` to `path` via a temporary sibling and a rename.
pub fn write_atomic(path: &Path, bytes: &[u8]) -> Result<()> {
    let name = path
        .file_name()
        .map(|n| n.to_string_lossy().into_owned())
        .unwrap_or_else(|| "out".into());
    let tmp = path.with_file_name(format!(".{name}.tmp-{}", std::process::id()));
    let result = (|| {
        let mut f = std::fs::File::create(&tmp)?;
        f.write_all(bytes)?;
        f.sync_all()?;
        std::fs::rename(&tmp, path)
    })();
    if result.is_err() {
        let _ = std::fs::remove_file(&tmp);
    }
    Ok(result?)
}

fn emit(out: Option<&Path>, value: &impl Serialize) -> Result<()> {
    let mut text = serde_json::to_string_pretty(value)?;
    text.push('\n');
    match out {
        Some(path) => write_atomic(path, text.as_bytes()),
        None => {
            std::io::stdout().write_all(text.as_bytes())?;
            Ok(())
        }
    }
}

/// `(t, y_1..y_N)` rows at every node; event times get a pre and a post row.
pub fn trajectory_csv(traj: &Trajectory) -> String {
    let dim = traj.dim();
    let mut out = String::from("t");
    for i in 1..=dim {
        out.push_str(&format!(",y{i}"));
    }
    out.push('\n');
    let row = |out: &mut String, t: f64, y: &[f64]| {
        out.push_str(&t.to_string());
        for v in y {
            out.push(',');
            out.push_str(&v.to_string());
        }
        out.push('\n');
    };
    for (k, piece) in traj.pieces().iter().enumerate() {
        let skip_first = k > 0;
        for (i, &t) in piece.grid().iter().enumerate() {
            if i == 0 && skip_first {
                // The previous event already wrote its post row at this time.
                continue;
            }
            row(&mut out, t, piece.node_value(i));
        }
        if let Some(e) = traj.events().get(k) {
            row(&mut out, e.t, &e.post);
        }
    }
    out
}

fn cmd_solve(common: &Common, selection: &str, csv: Option<&Path>) -> CmdResult {
    let (spec, p) = load(common)?;
    let ctl = control(common)?;
    let strat = strategy(selection)?;
    let bounds = crate::funnel::mollification_box(&p)?;
    let sel = strat.selection(&p, spec.seed, &bounds)?;
    let traj = solve(&p, &sel, &ctl)?;
    if traj.incomplete() {
        eprintln!(
            "warning: {} of {} surfaces fired; missing jumps are recorded at t = {}",
            traj.events().len(),
            traj.surface_count(),
            traj.horizon()
        );
    }
    emit(common.out.as_deref(), &traj)?;
    if let Some(path) = csv {
        write_atomic(path, trajectory_csv(&traj).as_bytes())?;
    }
    Ok(EXIT_OK)
}

#[derive(Serialize)]
struct VerifyOutput {
    problem: String,
    pass: bool,
    gronwall: GronwallBounds,
    reports: Vec<VerificationReport>,
}

fn cmd_verify(common: &Common, grid: usize, t_grid: usize) -> CmdResult {
    let (_, p) = load(common)?;
    if grid == 0 || t_grid == 0 {
        return Err(Failure::Usage("grid sizes must be positive".into()));
    }
    let g = SamplingGrid {
        t_points: t_grid,
        y_points: grid,
    };
    let reports = vec![
        check_growth(&p, g)?,
        check_surfaces(&p, g)?,
        check_transversality(&p, g)?,
    ];
    let pass = reports.iter().all(|r| r.pass);
    emit(
        common.out.as_deref(),
        &VerifyOutput {
            problem: p.name.clone(),
            pass,
            gronwall: gronwall_bounds(&p)?,
            reports,
        },
    )?;
    Ok(if pass { EXIT_OK } else { EXIT_FAILURE })
}

fn cmd_funnel(common: &Common, selections: &[String], count: usize) -> CmdResult {
    let (spec, p) = load(common)?;
    let ctl = control(common)?;
    if count == 0 {
        return Err(Failure::Usage("count must be positive".into()));
    }
    let strategies = selections
        .iter()
        .map(|s| strategy(s))
        .collect::<std::result::Result<Vec<_>, _>>()?;
    let sample = sample_funnel(&p, &strategies, count, spec.seed, &ctl)?;
    emit(common.out.as_deref(), &sample.manifest())?;
    Ok(EXIT_OK)
}

fn cmd_cascade(
    common: &Common,
    levels: &[usize],
    count: usize,
    k: usize,
    switches: usize,
) -> CmdResult {
    let (spec, p) = load(common)?;
    let ctl = control(common)?;
    if levels.is_empty() || levels.windows(2).any(|w| w[0] >= w[1]) || levels[0] == 0 {
        return Err(Failure::Usage(
            "levels must be positive and strictly ascending".into(),
        ));
    }
    if count == 0 || k == 0 {
        return Err(Failure::Usage("count and k must be positive".into()));
    }
    let config = CascadeConfig {
        count,
        seed: spec.seed,
        switches,
        kcenter_k: k,
    };
    let cascade = approximation_cascade(&p, levels, config, &ctl)?;
    emit(common.out.as_deref(), &cascade.report)?;
    Ok(EXIT_OK)
}

fn cmd_contract(common: &Common, n: usize, samples: usize, r_steps: usize) -> CmdResult {
    let (spec, p) = load(common)?;
    let ctl = control(common)?;
    if n == 0 || samples == 0 || r_steps == 0 {
        return Err(Failure::Usage(
            "n, samples and r-steps must be positive".into(),
        ));
    }
    let sample = sample_funnel(
        &p,
        &[Strategy::BangBang { switches: 3 }],
        samples,
        spec.seed,
        &ctl,
    )?;
    let report = contractibility_probe(&p, n, &sample, r_steps, true, &ctl)?;
    emit(common.out.as_deref(), &report)?;
    Ok(EXIT_OK)
}
