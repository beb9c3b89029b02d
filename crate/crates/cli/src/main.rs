mod config;
mod files;
mod manifest;

use std::fmt;
use std::fs;
use std::io::{BufWriter, Write};
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};
use lfne::baseline::{run_baseline, EgConfig};
use lfne::model::fixtures::toy_t1;
use lfne::model::joint_cost;
use lfne::pgs::{run, verify_equilibrium, Icrf, InitStrategy, PgsConfig, RunStatus, Trajectory, VerifyConfig};
use lfne::reformulate::{CapKind, PairKind};
use lfne::ridehail::batch::{run_batch, Algo, BatchConfig};
use lfne::ridehail::{build_game, metrics, sample_params, ShareMode};
use lfne::solver::SolverConfig;
use lfne::Error;
use serde::Serialize;

use config::{pick, ConfigFile};
use files::{check_state_shape, game_digest, read_game, read_params, read_solution, write_json, ParamsFile, SolutionFile};
use manifest::RunManifest;

const EXIT_NOT_CONVERGED: u8 = 2;
const EXIT_INVALID: u8 = 3;
const EXIT_SOLVER: u8 = 4;

#[derive(Debug)]
pub struct CliError {
    code: u8,
    message: String,
}

impl CliError {
    pub fn invalid(message: impl Into<String>) -> Self {
        CliError {
            code: EXIT_INVALID,
            message: message.into(),
        }
    }

    pub fn internal(message: impl Into<String>) -> Self {
        CliError {
            code: EXIT_SOLVER,
            message: message.into(),
        }
    }

    pub fn io(path: &Path, e: std::io::Error) -> Self {
        CliError::invalid(format!("{}: {e}", path.display()))
    }

    /// Errors raised while solving: bad options are the caller's fault, everything else is
    /// a solver failure.
    fn from_solver(e: Error) -> Self {
        fn root(e: &Error) -> &Error {
            match e {
                Error::Leader { source, .. } => root(source),
                other => other,
            }
        }
        let code = match root(&e) {
            Error::InvalidInput(_) | Error::Dimension(_) | Error::Json(_) => EXIT_INVALID,
            _ => EXIT_SOLVER,
        };
        CliError {
            code,
            message: e.to_string(),
        }
    }
}

impl fmt::Display for CliError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.message)
    }
}

#[derive(Parser)]
#[command(name = "lfne", version, about = "Leader-follower Nash equilibria via proximal Gauss-Seidel best responses")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Write a ride-hailing instance (or a built-in fixture) as instance JSON.
    Generate(GenerateArgs),
    /// Run pgs or the extra-gradient baseline on an instance.
    Solve(SolveArgs),
    /// Certify a solution with one ordered round of exact best responses.
    Verify(VerifyArgs),
    /// Run algorithms over many generated instances and aggregate the results.
    Batch(BatchArgs),
}

#[derive(Args)]
struct GenerateArgs {
    /// Number of platforms (leaders).
    #[arg(long, value_parser = clap::value_parser!(u64).range(1..), required_unless_present = "fixture")]
    leaders: Option<u64>,
    /// Drivers (followers) per platform.
    #[arg(long, value_parser = clap::value_parser!(u64).range(1..), required_unless_present = "fixture")]
    followers: Option<u64>,
    /// Service areas.
    #[arg(long, value_parser = clap::value_parser!(u64).range(1..), required_unless_present = "fixture")]
    areas: Option<u64>,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    #[arg(long, value_enum, default_value = "frozen-uniform")]
    share_mode: ShareArg,
    /// Emit a built-in fixture instead of a ride-hailing instance.
    #[arg(long, value_parser = ["toy-t1"], conflicts_with_all = ["leaders", "followers", "areas"])]
    fixture: Option<String>,
    /// Instance JSON path.
    #[arg(long, short)]
    out: PathBuf,
    /// Also write the sampled ride-hailing parameters here.
    #[arg(long)]
    params_out: Option<PathBuf>,
    /// Leave timestamps out of the manifest.
    #[arg(long)]
    no_timing: bool,
}

#[derive(Clone, Copy, clap::ValueEnum)]
enum ShareArg {
    FrozenUniform,
    FrozenPerPlatform,
}

#[derive(Args, Clone, Default)]
struct AlgoOptions {
    /// Initial proximal weight.
    #[arg(long)]
    tau0: Option<f64>,
    /// Proximal decay factor in (0, 1).
    #[arg(long)]
    omega: Option<f64>,
    /// Proximal penalty: squared-euclidean or euclidean-approx.
    #[arg(long)]
    icrf: Option<Icrf>,
    /// Stop once the cost-to-move is at most this.
    #[arg(long)]
    tol: Option<f64>,
    /// Sweep budget (outer iterations for eg).
    #[arg(long)]
    max_sweeps: Option<usize>,
    /// Initial big-M for multipliers.
    #[arg(long)]
    big_m: Option<f64>,
    /// Largest big-M reached by doubling.
    #[arg(long)]
    max_big_m: Option<f64>,
    /// Absolute optimality gap for best-response solves.
    #[arg(long)]
    gap_tol: Option<f64>,
    /// Branch-and-bound node budget per solve.
    #[arg(long)]
    node_limit: Option<usize>,
    /// Largest best-response improvement allowed when confirming a pgs fixed point.
    #[arg(long)]
    confirm_tol: Option<f64>,
    /// Stop pgs on the cost-to-move alone, without the confirming best-response round.
    #[arg(long)]
    no_confirm: bool,
    /// Extra-gradient step.
    #[arg(long)]
    alpha: Option<f64>,
    /// Extra-gradient steps per layer.
    #[arg(long)]
    inner_iters: Option<usize>,
}

#[derive(Args)]
struct SolveArgs {
    #[arg(long, short)]
    instance: PathBuf,
    /// pgs (default) or eg.
    #[arg(long)]
    algo: Option<Algo>,
    #[command(flatten)]
    opts: AlgoOptions,
    /// Seed for randomized initialization.
    #[arg(long)]
    seed: Option<u64>,
    /// Initial state: best-response or random-feasible.
    #[arg(long, value_parser = parse_init)]
    init: Option<InitStrategy>,
    /// JSON file with option defaults; flags override it.
    #[arg(long)]
    config: Option<PathBuf>,
    /// Solution JSON path.
    #[arg(long, short)]
    out: PathBuf,
    /// Trajectory CSV path (default: next to the solution).
    #[arg(long)]
    trajectory: Option<PathBuf>,
    /// Ride-hailing parameter file; adds profit and satisfaction to the solution.
    #[arg(long)]
    params: Option<PathBuf>,
    /// Zero wall-clock fields and omit timestamps so reruns are byte-identical.
    #[arg(long)]
    no_timing: bool,
}

fn parse_init(s: &str) -> Result<InitStrategy, String> {
    match s {
        "best-response" => Ok(InitStrategy::BestResponse),
        "random-feasible" => Ok(InitStrategy::RandomFeasible),
        other => Err(format!("unknown init '{other}' (expected best-response or random-feasible)")),
    }
}

#[derive(Args)]
struct VerifyArgs {
    #[arg(long, short)]
    instance: PathBuf,
    #[arg(long, short)]
    solution: PathBuf,
    /// Largest admissible best-response improvement.
    #[arg(long)]
    tol: Option<f64>,
    /// Largest admissible KKT and feasibility residual.
    #[arg(long)]
    kkt_tol: Option<f64>,
    #[arg(long)]
    big_m: Option<f64>,
    #[arg(long)]
    config: Option<PathBuf>,
    /// Also write the report as JSON.
    #[arg(long)]
    report: Option<PathBuf>,
    #[arg(long)]
    no_timing: bool,
}

#[derive(Args)]
struct BatchArgs {
    #[arg(long)]
    instances: Option<usize>,
    /// First seed; instance k uses seed + k.
    #[arg(long)]
    seed: Option<u64>,
    #[arg(long)]
    leaders: Option<usize>,
    #[arg(long)]
    followers: Option<usize>,
    #[arg(long)]
    areas: Option<usize>,
    /// Comma-separated algorithms, e.g. pgs,eg.
    #[arg(long, value_delimiter = ',')]
    algo: Option<Vec<Algo>>,
    #[command(flatten)]
    opts: AlgoOptions,
    /// Worker threads (0: one per core).
    #[arg(long)]
    jobs: Option<usize>,
    /// Skip certification of converged pgs runs.
    #[arg(long)]
    no_certify: bool,
    #[arg(long)]
    config: Option<PathBuf>,
    /// Directory for instances.csv, summary.csv and trajectories/.
    #[arg(long, short)]
    out_dir: PathBuf,
    #[arg(long)]
    no_timing: bool,
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(c) => c,
        Err(e) => {
            let code = match e.kind() {
                clap::error::ErrorKind::DisplayHelp | clap::error::ErrorKind::DisplayVersion => 0,
                _ => EXIT_INVALID,
            };
            let _ = e.print();
            return ExitCode::from(code);
        }
    };
    let result = match cli.command {
        Command::Generate(a) => cmd_generate(a),
        Command::Solve(a) => cmd_solve(a),
        Command::Verify(a) => cmd_verify(a),
        Command::Batch(a) => cmd_batch(a),
    };
    match result {
        Ok(code) => ExitCode::from(code),
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(e.code)
        }
    }
}

fn cmd_generate(a: GenerateArgs) -> Result<u8, CliError> {
    let timing = !a.no_timing;
    let (game, params) = match a.fixture.as_deref() {
        Some(_) => (toy_t1(), None),
        None => {
            let dims = |v: Option<u64>| v.unwrap_or(1) as usize;
            let mut p = sample_params(dims(a.leaders), dims(a.followers), dims(a.areas), a.seed)
                .map_err(|e| CliError::invalid(e.to_string()))?;
            if let ShareArg::FrozenPerPlatform = a.share_mode {
                p.share_mode = ShareMode::FrozenPerPlatform;
            }
            let g = build_game(&p).map_err(|e| CliError::invalid(e.to_string()))?;
            (g, Some(p))
        }
    };
    #[derive(Serialize)]
    struct GenerateConfig<'a> {
        fixture: Option<&'a str>,
        leaders: Option<u64>,
        followers: Option<u64>,
        areas: Option<u64>,
        share_mode: &'a str,
    }
    let cfg = GenerateConfig {
        fixture: a.fixture.as_deref(),
        leaders: a.leaders,
        followers: a.followers,
        areas: a.areas,
        share_mode: match a.share_mode {
            ShareArg::FrozenUniform => "frozen-uniform",
            ShareArg::FrozenPerPlatform => "frozen-per-platform",
        },
    };
    let mut m = RunManifest::new("generate", &cfg, Some(game_digest(&game)), vec![a.seed]);
    m.stamp_start(timing);
    m.stamp_finish(timing);
    write_json(&a.out, &game, &m)?;
    if let (Some(path), Some(p)) = (&a.params_out, params) {
        let pf = ParamsFile {
            instance_id: game.instance_id.clone(),
            params: p,
        };
        write_json(path, &pf, &m)?;
    }
    println!(
        "wrote {} ({} leaders, instance digest {})",
        a.out.display(),
        game.num_leaders(),
        m.instance_digest.as_deref().unwrap_or("-")
    );
    Ok(0)
}

fn solver_config(o: &AlgoOptions, f: &ConfigFile) -> SolverConfig {
    let d = SolverConfig::default();
    SolverConfig {
        gap_tol: pick(o.gap_tol, f.gap_tol, d.gap_tol),
        node_limit: pick(o.node_limit, f.node_limit, d.node_limit),
        ..d
    }
}

fn pgs_config(o: &AlgoOptions, f: &ConfigFile, seed: Option<u64>, init: Option<InitStrategy>) -> PgsConfig {
    let d = PgsConfig::default();
    PgsConfig {
        tau0: pick(o.tau0, f.tau0, d.tau0),
        omega: pick(o.omega, f.omega, d.omega),
        icrf: pick(o.icrf, f.icrf, d.icrf),
        stop_eps: pick(o.tol, f.tol, d.stop_eps),
        max_sweeps: pick(o.max_sweeps, f.max_sweeps, d.max_sweeps),
        seed: pick(seed, f.seed, d.seed),
        init: pick(init, f.init, d.init),
        big_m: pick(o.big_m, f.big_m, d.big_m),
        max_big_m: pick(o.max_big_m, f.max_big_m, d.max_big_m),
        solver: solver_config(o, f),
        confirm_tol: if o.no_confirm || f.confirm == Some(false) {
            None
        } else {
            Some(pick(o.confirm_tol, f.confirm_tol, d.confirm_tol.unwrap_or(1e-5)))
        },
    }
}

fn eg_config(o: &AlgoOptions, f: &ConfigFile) -> EgConfig {
    let d = EgConfig::default();
    EgConfig {
        alpha: pick(o.alpha, f.alpha, d.alpha),
        inner_iters: pick(o.inner_iters, f.inner_iters, d.inner_iters),
        outer_iters: pick(o.max_sweeps, f.outer_iters.or(f.max_sweeps), d.outer_iters),
        stop_eps: pick(o.tol, f.tol, d.stop_eps),
        icrf: pick(o.icrf, f.icrf, d.icrf),
    }
}

fn strip_timing(t: &mut Trajectory) {
    for r in &mut t.records {
        r.time_s = 0.0;
        r.br_times.iter_mut().for_each(|v| *v = 0.0);
    }
}

fn finite(v: f64) -> Option<f64> {
    v.is_finite().then_some(v)
}

fn write_trajectory(path: &Path, t: &Trajectory, comment: &str) -> Result<(), CliError> {
    files::create_parent(path)?;
    let f = fs::File::create(path).map_err(|e| CliError::io(path, e))?;
    t.write_csv(BufWriter::new(f), Some(comment)).map_err(|e| CliError::io(path, e))
}

fn default_trajectory_path(out: &Path) -> PathBuf {
    let stem = out.file_stem().and_then(|s| s.to_str()).unwrap_or("solution");
    out.with_file_name(format!("{stem}.trajectory.csv"))
}

fn cmd_solve(a: SolveArgs) -> Result<u8, CliError> {
    let timing = !a.no_timing;
    let file = ConfigFile::load(a.config.as_deref())?;
    let algo = match (a.algo, file.algo.clone().map(|l| l.into_vec())) {
        (Some(x), _) => x,
        (None, Some(v)) if v.len() == 1 => v[0],
        (None, Some(_)) => return Err(CliError::invalid("solve runs exactly one algorithm")),
        (None, None) => Algo::Pgs,
    };
    let g = read_game(&a.instance)?;
    let params = match &a.params {
        Some(p) => Some(read_params(p)?.params),
        None => None,
    };
    let instance_digest = game_digest(&g);
    #[derive(Serialize)]
    struct SolveConfig {
        algo: Algo,
        pgs: Option<PgsConfig>,
        eg: Option<EgConfig>,
        timing: bool,
    }
    let (pgs, eg) = match algo {
        Algo::Pgs => (Some(pgs_config(&a.opts, &file, a.seed, a.init)), None),
        Algo::Eg => (None, Some(eg_config(&a.opts, &file))),
    };
    let seed = pgs.as_ref().map(|c| c.seed).unwrap_or(0);
    let cfg = SolveConfig { algo, pgs, eg, timing };
    let mut m = RunManifest::new("solve", &cfg, Some(instance_digest.clone()), vec![seed]);
    m.stamp_start(timing);

    let (state, mut trajectory, status, big_m) = match algo {
        Algo::Pgs => {
            let out = run(&g, cfg.pgs.as_ref().expect("pgs config")).map_err(CliError::from_solver)?;
            (out.state, out.trajectory, out.status, Some(out.big_m))
        }
        Algo::Eg => {
            let out = run_baseline(&g, cfg.eg.as_ref().expect("eg config")).map_err(CliError::from_solver)?;
            (out.state, out.trajectory, out.status, None)
        }
    };
    if !timing {
        strip_timing(&mut trajectory);
    }
    let leader_costs = (0..g.num_leaders())
        .map(|i| joint_cost(&g, i, &state))
        .collect::<lfne::Result<Vec<_>>>()
        .map_err(CliError::from_solver)?;
    let metrics = match &params {
        Some(p) => Some(metrics(p, &state).map_err(|e| CliError::invalid(format!("parameter file does not fit the instance: {e}")))?),
        None => None,
    };
    m.stamp_finish(timing);
    let solution = SolutionFile {
        version: files::SOLUTION_VERSION,
        instance_id: g.instance_id.clone(),
        instance_digest: Some(instance_digest),
        algo,
        status,
        sweeps: trajectory.records.len(),
        final_potential: finite(trajectory.final_potential),
        final_cost_to_move: trajectory.records.last().map(|r| r.cost_to_move),
        leader_costs,
        big_m,
        metrics,
        state,
    };
    write_json(&a.out, &solution, &m)?;
    let tpath = a.trajectory.clone().unwrap_or_else(|| default_trajectory_path(&a.out));
    write_trajectory(&tpath, &trajectory, &m.csv_comment(&format!("algo={algo}")))?;

    let converged = status == RunStatus::Converged;
    println!(
        "{algo}: {} after {} sweeps; final potential {}; cost-to-move {}",
        if converged { "converged" } else { "not converged" },
        solution.sweeps,
        solution.final_potential.map_or("n/a".into(), |v| format!("{v:.9}")),
        solution.final_cost_to_move.map_or("n/a".into(), |v| format!("{v:.3e}")),
    );
    if let Some(b) = &solution.big_m {
        if b.flagged > 0 {
            println!(
                "big-M: {} of {} solves flagged and re-solved with a larger cap (rate {:.3})",
                b.flagged,
                b.solves,
                b.flag_rate()
            );
        }
    }
    println!("wrote {} and {}", a.out.display(), tpath.display());
    Ok(if converged { 0 } else { EXIT_NOT_CONVERGED })
}

fn describe_pair(kind: &PairKind) -> String {
    match kind {
        PairKind::Private { follower, row } => format!("private row {} of follower {}", row + 1, follower + 1),
        PairKind::Shared { copy, row } => format!("shared row {} (copy {})", row + 1, copy + 1),
    }
}

fn cmd_verify(a: VerifyArgs) -> Result<u8, CliError> {
    let timing = !a.no_timing;
    let file = ConfigFile::load(a.config.as_deref())?;
    let g = read_game(&a.instance)?;
    let sol = read_solution(&a.solution)?;
    let digest = game_digest(&g);
    if let Some(d) = &sol.instance_digest {
        if *d != digest {
            return Err(CliError::invalid(format!(
                "solution {} was computed for a different instance (digest {d}, instance has {digest})",
                a.solution.display()
            )));
        }
    }
    check_state_shape(&g, &sol.state)?;
    let d = VerifyConfig::default();
    let cfg = VerifyConfig {
        tol: pick(a.tol, file.verify_tol, d.tol),
        kkt_tol: pick(a.kkt_tol, file.kkt_tol, d.kkt_tol),
        big_m: pick(a.big_m, file.big_m, d.big_m),
        max_big_m: pick(None, file.max_big_m, d.max_big_m),
        solver: SolverConfig {
            gap_tol: pick(None, file.gap_tol, d.solver.gap_tol),
            node_limit: pick(None, file.node_limit, d.solver.node_limit),
            ..d.solver
        },
    };
    let mut m = RunManifest::new("verify", &cfg, Some(digest), vec![]);
    m.stamp_start(timing);
    let rep = verify_equilibrium(&g, &sol.state, &cfg).map_err(CliError::from_solver)?;
    m.stamp_finish(timing);

    let violators = rep.violators(cfg.kkt_tol);
    let mut out = std::io::stdout().lock();
    let mut line = |s: String| {
        let _ = writeln!(out, "{s}");
    };
    for l in &rep.leaders {
        let mut why = Vec::new();
        if l.improvement > cfg.tol {
            why.push(format!("best response improves by {:.3e} > {:.1e}", l.improvement, cfg.tol));
        }
        if l.kkt.max() > cfg.kkt_tol {
            why.push(format!("follower KKT residual {:.3e} > {:.1e}", l.kkt.max(), cfg.kkt_tol));
        }
        if l.leader_infeasibility > cfg.kkt_tol {
            why.push(format!("leader constraints violated by {:.3e}", l.leader_infeasibility));
        }
        if l.solver_status != lfne::solver::SolveStatus::Optimal {
            why.push(format!("best-response solve ended with {:?}", l.solver_status));
        }
        line(format!(
            "leader {}: J = {:.9}, best response {:.9}, improvement {:.3e}, KKT {:.3e}: {}",
            l.leader,
            l.cost,
            l.best_response_cost,
            l.improvement,
            l.kkt.max(),
            if why.is_empty() { "ok".to_string() } else { format!("VIOLATION ({})", why.join("; ")) }
        ));
        for f in &l.audit.flags {
            line(format!(
                "  big-M flag: leader {} {} {} = {:.6} at cap {}",
                l.leader,
                describe_pair(&f.pair),
                match f.cap_kind {
                    CapKind::Multiplier => "multiplier",
                    CapKind::Slack => "slack",
                },
                f.value,
                f.cap
            ));
        }
    }
    if rep.certified {
        line(format!("certified: no leader improves by more than {:.1e}", cfg.tol));
    } else {
        let names: Vec<String> = violators.iter().map(|i| format!("leader {i}")).collect();
        line(format!("not certified: {}", names.join(", ")));
    }
    if let Some(path) = &a.report {
        write_json(path, &rep, &m)?;
    }
    Ok(if rep.certified { 0 } else { EXIT_NOT_CONVERGED })
}

fn cmd_batch(a: BatchArgs) -> Result<u8, CliError> {
    let timing = !a.no_timing;
    let file = ConfigFile::load(a.config.as_deref())?;
    let d = BatchConfig::default();
    let algos = a
        .algo
        .clone()
        .or_else(|| file.algo.clone().map(|l| l.into_vec()))
        .unwrap_or(d.algos.clone());
    let mut cfg = BatchConfig {
        instances: pick(a.instances, file.instances, d.instances),
        base_seed: pick(a.seed, file.seed, d.base_seed),
        platforms: pick(a.leaders, file.leaders, d.platforms),
        drivers: pick(a.followers, file.followers, d.drivers),
        areas: pick(a.areas, file.areas, d.areas),
        algos,
        pgs: pgs_config(&a.opts, &file, None, None),
        eg: eg_config(&a.opts, &file),
        verify: VerifyConfig {
            tol: pick(None, file.verify_tol, d.verify.tol),
            kkt_tol: pick(None, file.kkt_tol, d.verify.kkt_tol),
            ..d.verify.clone()
        },
        certify: !a.no_certify && file.certify.unwrap_or(true),
        jobs: pick(a.jobs, file.jobs, d.jobs),
        trajectory_dir: Some(a.out_dir.join("trajectories")),
        record_timing: timing,
        header_comment: None,
    };
    if cfg.platforms == 0 || cfg.drivers == 0 || cfg.areas == 0 || cfg.instances == 0 {
        return Err(CliError::invalid("instances, leaders, followers and areas must be positive"));
    }
    // thread count does not change results, so it stays out of the digest
    let digest_cfg = BatchConfig { jobs: 0, ..cfg.clone() };
    let seeds: Vec<u64> = (0..cfg.instances as u64).map(|k| cfg.base_seed + k).collect();
    let mut m = RunManifest::new("batch", &digest_cfg, None, seeds);
    m.stamp_start(timing);
    cfg.header_comment = Some(m.csv_comment(""));
    let rep = run_batch(&cfg).map_err(CliError::from_solver)?;
    m.stamp_finish(timing);

    let write = |name: &str, f: &dyn Fn(BufWriter<fs::File>) -> lfne::Result<()>| -> Result<PathBuf, CliError> {
        let path = a.out_dir.join(name);
        files::create_parent(&path)?;
        let file = fs::File::create(&path).map_err(|e| CliError::io(&path, e))?;
        f(BufWriter::new(file)).map_err(|e| CliError::internal(format!("{}: {e}", path.display())))?;
        Ok(path)
    };
    let comment = m.csv_comment("");
    write("instances.csv", &|w| rep.write_instances_csv(w, Some(&comment)))?;
    write("summary.csv", &|w| rep.write_summary_csv(w, Some(&comment)))?;
    write_json(&a.out_dir.join("manifest.json"), &digest_cfg, &m)?;

    println!(
        "{:<5} {:>9} {:>10} {:>9} {:>7} {:>12} {:>12} {:>14}",
        "algo", "instances", "converged", "certified", "errors", "sweeps_mean", "profit_mean", "satisfaction"
    );
    let fmt = |v: Option<f64>, p: usize| v.map_or("-".to_string(), |x| format!("{x:.p$}"));
    for s in &rep.summaries {
        println!(
            "{:<5} {:>9} {:>10} {:>9} {:>7} {:>12} {:>12} {:>14}",
            s.algo.to_string(),
            s.instances,
            format!("{:.0}%", 100.0 * s.converged_fraction),
            s.certified,
            s.errors,
            fmt(s.sweeps_mean, 2),
            fmt(s.profit_mean, 2),
            format!("{}..{}", fmt(s.satisfaction_min, 2), fmt(s.satisfaction_max, 2)),
        );
    }
    println!("wrote {}", a.out_dir.display());
    Ok(0)
}
