//! Batch experiments over generated ride-hail instances.

use std::fmt;
use std::io::Write;
use std::path::PathBuf;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use super::{build_game, metrics, sample_params};
use crate::baseline::{run_baseline, EgConfig};
use crate::error::{Error, Result};
use crate::pgs::{run, verify_equilibrium, PgsConfig, RunStatus, Trajectory, VerifyConfig};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Algo {
    Pgs,
    Eg,
}

impl FromStr for Algo {
    type Err = String;
    fn from_str(s: &str) -> std::result::Result<Self, String> {
        match s {
            "pgs" => Ok(Algo::Pgs),
            "eg" => Ok(Algo::Eg),
            other => Err(format!("unknown algorithm '{other}' (expected pgs or eg)")),
        }
    }
}

impl fmt::Display for Algo {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Algo::Pgs => "pgs",
            Algo::Eg => "eg",
        })
    }
}

#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct BatchConfig {
    pub instances: usize,
    pub base_seed: u64,
    pub platforms: usize,
    pub drivers: usize,
    pub areas: usize,
    pub algos: Vec<Algo>,
    pub pgs: PgsConfig,
    pub eg: EgConfig,
    pub verify: VerifyConfig,
    /// Certify converged pgs outputs with an ordered round of best responses.
    pub certify: bool,
    /// Worker threads; 0 lets the pool decide.
    pub jobs: usize,
    /// Where per-instance trajectories go, as `<algo>_seed<seed>.csv`.
    #[serde(skip)]
    pub trajectory_dir: Option<PathBuf>,
    /// Zero every wall-clock field so reruns are byte-identical.
    pub record_timing: bool,
    /// Written as a `#` comment at the top of every trajectory file.
    #[serde(skip)]
    pub header_comment: Option<String>,
}

impl Default for BatchConfig {
    fn default() -> Self {
        BatchConfig {
            instances: 50,
            base_seed: 0,
            platforms: 3,
            drivers: 3,
            areas: 2,
            algos: vec![Algo::Pgs],
            pgs: PgsConfig::default(),
            eg: EgConfig::default(),
            verify: VerifyConfig::default(),
            certify: true,
            jobs: 0,
            trajectory_dir: None,
            record_timing: true,
            header_comment: None,
        }
    }
}

/// One row of the per-instance CSV.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct InstanceRecord {
    pub algo: Algo,
    pub seed: u64,
    /// `converged`, `sweep_limit` or `error`.
    pub status: String,
    pub sweeps: usize,
    pub final_cost_to_move: Option<f64>,
    /// The cost-to-move increased at least once.
    pub oscillates: bool,
    pub certified: Option<bool>,
    pub max_improvement: Option<f64>,
    pub final_potential: Option<f64>,
    pub profit_mean: Option<f64>,
    pub profit_min: Option<f64>,
    pub profit_max: Option<f64>,
    pub revenue_total: Option<f64>,
    pub wage_bill_total: Option<f64>,
    pub satisfaction_min: Option<f64>,
    pub satisfaction_max: Option<f64>,
    pub br_time_mean: Option<f64>,
    pub big_m_flag_rate: Option<f64>,
    pub time_s: f64,
    pub error: Option<String>,
}

impl InstanceRecord {
    pub fn converged(&self) -> bool {
        self.status == "converged"
    }

    fn failed(algo: Algo, seed: u64, e: &Error) -> Self {
        InstanceRecord {
            algo,
            seed,
            status: "error".into(),
            sweeps: 0,
            final_cost_to_move: None,
            oscillates: false,
            certified: None,
            max_improvement: None,
            final_potential: None,
            profit_mean: None,
            profit_min: None,
            profit_max: None,
            revenue_total: None,
            wage_bill_total: None,
            satisfaction_min: None,
            satisfaction_max: None,
            br_time_mean: None,
            big_m_flag_rate: None,
            time_s: 0.0,
            error: Some(e.to_string()),
        }
    }
}

/// Mean, min and max of a sample; all `None` when it is empty.
#[derive(Clone, Copy, Debug, Default, PartialEq, Serialize, Deserialize)]
pub struct Stat {
    pub mean: Option<f64>,
    pub min: Option<f64>,
    pub max: Option<f64>,
}

impl Stat {
    pub fn of(values: impl IntoIterator<Item = f64>) -> Self {
        let v: Vec<f64> = values.into_iter().collect();
        if v.is_empty() {
            return Stat::default();
        }
        Stat {
            mean: Some(v.iter().sum::<f64>() / v.len() as f64),
            min: Some(v.iter().copied().fold(f64::INFINITY, f64::min)),
            max: Some(v.iter().copied().fold(f64::NEG_INFINITY, f64::max)),
        }
    }
}

/// One row of the aggregate CSV.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct AlgoSummary {
    pub algo: Algo,
    pub instances: usize,
    pub converged: usize,
    pub converged_fraction: f64,
    pub certified: usize,
    pub errors: usize,
    pub oscillating: usize,
    pub sweeps_mean: Option<f64>,
    pub sweeps_min: Option<f64>,
    pub sweeps_max: Option<f64>,
    pub profit_mean: Option<f64>,
    pub profit_min: Option<f64>,
    pub profit_max: Option<f64>,
    pub satisfaction_mean: Option<f64>,
    pub satisfaction_min: Option<f64>,
    pub satisfaction_max: Option<f64>,
    pub br_time_mean: Option<f64>,
    pub br_time_min: Option<f64>,
    pub br_time_max: Option<f64>,
    pub big_m_flag_rate: Option<f64>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct BatchReport {
    pub records: Vec<InstanceRecord>,
    pub summaries: Vec<AlgoSummary>,
}

fn summarize(algo: Algo, rows: &[&InstanceRecord]) -> AlgoSummary {
    let conv: Vec<&&InstanceRecord> = rows.iter().filter(|r| r.converged()).collect();
    let sweeps = Stat::of(conv.iter().map(|r| r.sweeps as f64));
    let ok: Vec<&&InstanceRecord> = rows.iter().filter(|r| r.error.is_none()).collect();
    let profit = Stat::of(ok.iter().filter_map(|r| r.profit_mean));
    let sat_mean = Stat::of(ok.iter().filter_map(|r| Some(0.5 * (r.satisfaction_min? + r.satisfaction_max?))));
    let br = Stat::of(ok.iter().filter_map(|r| r.br_time_mean));
    let flags = Stat::of(ok.iter().filter_map(|r| r.big_m_flag_rate));
    let n = rows.len();
    AlgoSummary {
        algo,
        instances: n,
        converged: conv.len(),
        converged_fraction: if n == 0 { 0.0 } else { conv.len() as f64 / n as f64 },
        certified: rows.iter().filter(|r| r.certified == Some(true)).count(),
        errors: n - ok.len(),
        oscillating: rows.iter().filter(|r| r.oscillates).count(),
        sweeps_mean: sweeps.mean,
        sweeps_min: sweeps.min,
        sweeps_max: sweeps.max,
        profit_mean: profit.mean,
        profit_min: profit.min,
        profit_max: profit.max,
        satisfaction_mean: sat_mean.mean,
        satisfaction_min: Stat::of(ok.iter().filter_map(|r| r.satisfaction_min)).min,
        satisfaction_max: Stat::of(ok.iter().filter_map(|r| r.satisfaction_max)).max,
        br_time_mean: br.mean,
        br_time_min: br.min,
        br_time_max: br.max,
        big_m_flag_rate: flags.mean,
    }
}

fn strip_timing(t: &mut Trajectory) {
    for r in &mut t.records {
        r.time_s = 0.0;
        r.br_times.iter_mut().for_each(|v| *v = 0.0);
    }
}

/// Per-instance results plus everything needed to write its trajectory.
pub struct InstanceRun {
    pub record: InstanceRecord,
    pub trajectory: Option<Trajectory>,
}

/// Generate the instance for `seed` and run `algo` on it.
pub fn run_instance(cfg: &BatchConfig, algo: Algo, seed: u64) -> InstanceRun {
    match try_run_instance(cfg, algo, seed) {
        Ok(r) => r,
        Err(e) => InstanceRun {
            record: InstanceRecord::failed(algo, seed, &e),
            trajectory: None,
        },
    }
}

fn try_run_instance(cfg: &BatchConfig, algo: Algo, seed: u64) -> Result<InstanceRun> {
    let clock = std::time::Instant::now();
    let params = sample_params(cfg.platforms, cfg.drivers, cfg.areas, seed)?;
    let g = build_game(&params)?;
    let (state, mut trajectory, status, flag_rate, oscillates) = match algo {
        Algo::Pgs => {
            let out = run(&g, &cfg.pgs)?;
            let osc = out.trajectory.records.windows(2).any(|w| w[1].cost_to_move > w[0].cost_to_move);
            (out.state, out.trajectory, out.status, Some(out.big_m.flag_rate()), osc)
        }
        Algo::Eg => {
            let out = run_baseline(&g, &cfg.eg)?;
            let osc = out.oscillates();
            (out.state, out.trajectory, out.status, None, osc)
        }
    };
    let converged = status == RunStatus::Converged;
    let (certified, max_improvement) = if cfg.certify && converged && algo == Algo::Pgs {
        let v = verify_equilibrium(&g, &state, &cfg.verify)?;
        (Some(v.certified), Some(v.max_improvement()))
    } else {
        (None, None)
    };
    let m = metrics(&params, &state)?;
    let profits = Stat::of(m.iter().map(|p| p.profit));
    let sats: Vec<f64> = m.iter().flat_map(|p| p.satisfaction.iter().copied()).collect();
    let br_times: Vec<f64> = trajectory.records.iter().flat_map(|r| r.br_times.iter().copied()).collect();
    if !cfg.record_timing {
        strip_timing(&mut trajectory);
    }
    let time_s = if cfg.record_timing { clock.elapsed().as_secs_f64() } else { 0.0 };
    let br_time_mean = if cfg.record_timing { Stat::of(br_times).mean } else { Some(0.0) };
    let record = InstanceRecord {
        algo,
        seed,
        status: if converged { "converged" } else { "sweep_limit" }.into(),
        sweeps: trajectory.records.len(),
        final_cost_to_move: trajectory.records.last().map(|r| r.cost_to_move),
        oscillates,
        certified,
        max_improvement,
        final_potential: Some(trajectory.final_potential),
        profit_mean: profits.mean,
        profit_min: profits.min,
        profit_max: profits.max,
        revenue_total: Some(m.iter().map(|p| p.revenue).sum()),
        wage_bill_total: Some(m.iter().map(|p| p.wage_bill).sum()),
        satisfaction_min: Stat::of(sats.iter().copied()).min,
        satisfaction_max: Stat::of(sats).max,
        br_time_mean,
        big_m_flag_rate: flag_rate,
        time_s,
        error: None,
    };
    Ok(InstanceRun {
        record,
        trajectory: Some(trajectory),
    })
}

/// Run every configured algorithm on seeds `base_seed .. base_seed + instances`.
///
/// Instances run concurrently on a pool of `jobs` threads; per-instance failures are recorded
/// in the report rather than aborting the batch. Rows come back ordered by algorithm, then seed.
pub fn run_batch(cfg: &BatchConfig) -> Result<BatchReport> {
    use rayon::prelude::*;
    if cfg.platforms == 0 || cfg.drivers == 0 || cfg.areas == 0 {
        return Err(Error::InvalidInput("platforms, drivers and areas must be positive".into()));
    }
    if cfg.algos.is_empty() {
        return Err(Error::InvalidInput("no algorithm selected".into()));
    }
    if let Some(dir) = &cfg.trajectory_dir {
        std::fs::create_dir_all(dir)?;
    }
    let jobs: Vec<(Algo, u64)> = cfg
        .algos
        .iter()
        .flat_map(|&a| (0..cfg.instances as u64).map(move |k| (a, cfg.base_seed + k)))
        .collect();
    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(cfg.jobs)
        .build()
        .map_err(|e| Error::Solver(format!("could not start worker pool: {e}")))?;
    let runs: Vec<InstanceRun> = pool.install(|| jobs.par_iter().map(|&(a, s)| run_instance(cfg, a, s)).collect());
    let mut records = Vec::with_capacity(runs.len());
    for r in runs {
        if let (Some(dir), Some(t)) = (&cfg.trajectory_dir, &r.trajectory) {
            let path = dir.join(format!("{}_seed{}.csv", r.record.algo, r.record.seed));
            let file = std::io::BufWriter::new(std::fs::File::create(path)?);
            t.write_csv(file, cfg.header_comment.as_deref())?;
        }
        records.push(r.record);
    }
    let summaries = cfg
        .algos
        .iter()
        .map(|&a| summarize(a, &records.iter().filter(|r| r.algo == a).collect::<Vec<_>>()))
        .collect();
    Ok(BatchReport { records, summaries })
}

fn write_rows<W: Write, T: Serialize>(mut w: W, header_comment: Option<&str>, rows: &[T]) -> Result<()> {
    if let Some(c) = header_comment {
        writeln!(w, "# {c}")?;
    }
    let mut out = csv::Writer::from_writer(w);
    for r in rows {
        out.serialize(r).map_err(std::io::Error::from)?;
    }
    out.flush()?;
    Ok(())
}

impl BatchReport {
    /// One row per (algorithm, instance).
    pub fn write_instances_csv<W: Write>(&self, w: W, header_comment: Option<&str>) -> Result<()> {
        write_rows(w, header_comment, &self.records)
    }

    /// One row per algorithm with mean/min/max aggregates.
    pub fn write_summary_csv<W: Write>(&self, w: W, header_comment: Option<&str>) -> Result<()> {
        write_rows(w, header_comment, &self.summaries)
    }

    pub fn summary(&self, algo: Algo) -> Option<&AlgoSummary> {
        self.summaries.iter().find(|s| s.algo == algo)
    }
}
