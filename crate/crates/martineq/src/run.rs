//! Command execution. Every run is a pure function of its [`Command`]; thread
//! count and the sample cap only decide how (and whether) it runs.

use std::path::Path;
use std::time::Instant;

use martineq_core::ineq::{compare_constants, eval_all_levels, eval_discrete};
use martineq_core::ptree::{random_tree, RandomTreeConfig};
use martineq_core::rng::{derive_seed, stream};
use martineq_core::sharpness::{search, SearchConfig};
use martineq_core::wiener::DEFAULT_SAMPLE_CAP;
use martineq_core::wiener::{gaussian_abs_moment, plan_for, IntegrandSpec, Sampler, SamplingPlan, WienerBatch};
use martineq_core::{Exponent, InequalityId, InequalityReport};
use rand::Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::Result;
use crate::formats::TreeFile;
use crate::report::{CsvRow, GaussianMoment, Outcome, Report, RunManifest, Runtime, Sweep, SweepFailure, SweepRow};

/// Environment variable overriding the stored-sample cap of MC runs.
pub const SAMPLE_CAP_ENV: &str = "MARTINEQ_SAMPLE_CAP";

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "command", rename_all = "kebab-case", deny_unknown_fields)]
pub enum Command {
    VerifyDiscrete {
        source: Option<String>,
        tree: TreeFile,
        p: Exponent,
        /// All levels when absent.
        n: Option<usize>,
        ineq: Vec<InequalityId>,
    },
    VerifyContinuous {
        source: Option<String>,
        spec: IntegrandSpec,
        p: Exponent,
        t: f64,
        paths: usize,
        seed: u64,
        ineq: Vec<InequalityId>,
        allow_inconclusive: bool,
    },
    Sharpness {
        source: Option<String>,
        config: SearchConfig,
    },
    GaussianMoment {
        p: f64,
    },
    CompareConstants {
        p: Exponent,
    },
    RandomTrees {
        count: usize,
        depth: usize,
        seed: u64,
        p: Vec<Exponent>,
    },
}

impl Command {
    pub fn name(&self) -> &'static str {
        match self {
            Command::VerifyDiscrete { .. } => "verify-discrete",
            Command::VerifyContinuous { .. } => "verify-continuous",
            Command::Sharpness { .. } => "sharpness",
            Command::GaussianMoment { .. } => "gaussian-moment",
            Command::CompareConstants { .. } => "compare-constants",
            Command::RandomTrees { .. } => "random-trees",
        }
    }

    pub fn seed(&self) -> Option<u64> {
        match self {
            Command::VerifyContinuous { seed, .. } | Command::RandomTrees { seed, .. } => Some(*seed),
            Command::Sharpness { config, .. } => Some(config.seed),
            _ => None,
        }
    }

    /// Checks everything that can be checked before any computation.
    pub fn check(&self) -> Result<()> {
        let config = |msg: String| Err(martineq_core::Error::Config(msg).into());
        match self {
            Command::VerifyDiscrete { ineq, .. } => match ineq.iter().find(|id| !id.is_tree()) {
                Some(id) => config(format!("{id} cannot be evaluated on a tree")),
                None => Ok(()),
            },
            Command::VerifyContinuous { spec, ineq, t, .. } => {
                if let Some(id) = ineq.iter().find(|id| !id.is_continuous()) {
                    return config(format!("{id} is not a continuous-time inequality"));
                }
                if ineq.is_empty() {
                    return config("at least one --ineq is required".into());
                }
                spec.check()?;
                spec.grid_index(*t)?;
                Ok(())
            }
            Command::RandomTrees { depth, p, .. } => {
                if *depth == 0 {
                    return config("depth must be at least 1".into());
                }
                if p.is_empty() {
                    return config("at least one p is required".into());
                }
                Ok(())
            }
            _ => Ok(()),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct RunOptions {
    /// Worker threads; 0 lets rayon decide.
    pub threads: usize,
    pub sample_cap: u64,
}

impl Default for RunOptions {
    fn default() -> Self {
        Self { threads: 0, sample_cap: DEFAULT_SAMPLE_CAP }
    }
}

impl RunOptions {
    /// Defaults with the sample cap taken from the environment when set.
    pub fn from_env() -> Result<Self> {
        let mut opts = Self::default();
        if let Ok(v) = std::env::var(SAMPLE_CAP_ENV) {
            opts.sample_cap = v
                .trim()
                .parse()
                .map_err(|_| martineq_core::Error::Config(format!("{SAMPLE_CAP_ENV}={v} is not a sample count")))?;
        }
        Ok(opts)
    }

    fn pool(&self) -> Result<rayon::ThreadPool> {
        Ok(rayon::ThreadPoolBuilder::new().num_threads(self.threads).build()?)
    }
}

/// Simulates a batch with chunks spread over the pool; identical to the
/// sequential result.
pub fn simulate_parallel(spec: &IntegrandSpec, plan: &SamplingPlan, opts: &RunOptions) -> Result<WienerBatch> {
    let sampler = Sampler::new(spec, plan)?;
    let chunks = opts
        .pool()?
        .install(|| (0..sampler.chunk_count()).into_par_iter().map(|i| sampler.run_chunk(i)).collect::<Vec<_>>());
    Ok(sampler.assemble(chunks)?)
}

pub fn execute(command: &Command, opts: &RunOptions) -> Result<Report> {
    command.check()?;
    let started = Instant::now();
    let seed = command.seed();
    let (outcome, table) = match command {
        Command::VerifyDiscrete { tree, p, n, ineq, .. } => {
            let tree = tree.to_tree()?;
            let ids: &[InequalityId] = if ineq.is_empty() { &InequalityId::TREE } else { ineq };
            let records = match n {
                Some(n) => ids.iter().map(|&id| eval_discrete(&tree, *n, *p, id)).collect::<Result<Vec<_>, _>>()?,
                None => eval_all_levels(&tree, *p, ids)?,
            };
            inequalities(records, seed)
        }
        Command::VerifyContinuous { spec, p, t, paths, seed: mc_seed, ineq, .. } => {
            let step = spec.grid_index(*t)?;
            let plan = SamplingPlan { sample_cap: opts.sample_cap, ..plan_for(*paths, *mc_seed, step, *p) };
            let batch = simulate_parallel(spec, &plan, opts)?;
            inequalities(batch.evaluate(step, *p, ineq)?, seed)
        }
        Command::Sharpness { config, .. } => sharpness(config)?,
        Command::GaussianMoment { p } => {
            let moment = gaussian_abs_moment(*p)?;
            let norm_sq = if *p > 0.0 { moment.powf(2.0 / p) } else { 1.0 };
            let bound = (*p >= 2.0).then(|| p - 1.0);
            (Outcome::GaussianMoment(GaussianMoment { p: *p, moment, norm_sq, bound }), Vec::new())
        }
        Command::CompareConstants { p } => (Outcome::Constants { comparison: compare_constants(*p) }, Vec::new()),
        Command::RandomTrees { count, depth, seed: sweep_seed, p } => sweep(*count, *depth, *sweep_seed, p, opts)?,
    };
    let threads = opts.pool()?.current_num_threads();
    Ok(Report {
        manifest: RunManifest {
            command: command.name().into(),
            params: command.clone(),
            seed,
            version: env!("CARGO_PKG_VERSION").into(),
            runtime: Runtime { duration_ms: started.elapsed().as_millis() as u64, threads },
        },
        outcome,
        table,
    })
}

fn inequalities(records: Vec<InequalityReport>, seed: Option<u64>) -> (Outcome, Vec<CsvRow>) {
    let table = records.iter().map(|r| CsvRow::from_report(r, seed)).collect();
    (Outcome::Inequalities { records }, table)
}

fn sharpness(config: &SearchConfig) -> Result<(Outcome, Vec<CsvRow>)> {
    let result = search(config)?;
    let level = config.level.map_or(1.0, |n| n as f64);
    let row = CsvRow {
        inequality: config.target.to_string(),
        p: config.p.get(),
        n_or_t: level,
        lhs: result.best_ratio,
        rhs: result.bound,
        constant: result.bound,
        ratio: result.normalized(),
        satisfied: if result.violation.is_some() { "false" } else { "true" },
        ci_lhs: None,
        ci_rhs: None,
        seed: Some(config.seed),
    };
    Ok((Outcome::Sharpness { result }, vec![row]))
}

/// Tree `i` of a sweep: depth in `1..=max_depth`, dimension in `1..=3`,
/// branching in `{2, 3}`, all drawn from sub-seed `derive_seed(seed, i)`.
pub fn sweep_tree(seed: u64, index: usize, max_depth: usize) -> Result<martineq_core::ProbTree> {
    let mut rng = stream(derive_seed(seed, index as u64), 0);
    let depth = rng.random_range(1..=max_depth);
    let dim = rng.random_range(1..=3);
    let cfg = RandomTreeConfig { depth, dim, min_branching: 2, max_branching: 3 };
    Ok(random_tree(&mut rng, &cfg)?)
}

fn sweep(
    count: usize,
    max_depth: usize,
    seed: u64,
    ps: &[Exponent],
    opts: &RunOptions,
) -> Result<(Outcome, Vec<CsvRow>)> {
    let per_tree: Vec<Vec<InequalityReport>> = opts.pool()?.install(|| {
        (0..count)
            .into_par_iter()
            .map(|i| {
                let tree = sweep_tree(seed, i, max_depth)?;
                let mut out = Vec::new();
                for &p in ps {
                    out.extend(eval_all_levels(&tree, p, &InequalityId::TREE)?);
                }
                Ok(out)
            })
            .collect::<Result<_>>()
    })?;

    let mut rows: Vec<SweepRow> = Vec::new();
    let mut failures = Vec::new();
    let mut p2_dev: Option<f64> = None;
    let mut table = Vec::new();
    for (tree, reports) in per_tree.iter().enumerate() {
        for r in reports {
            let row = match rows.iter_mut().find(|row| row.id == r.id && row.p == r.p.get()) {
                Some(row) => row,
                None => {
                    rows.push(SweepRow { id: r.id, p: r.p.get(), evaluated: 0, satisfied: 0, max_ratio: 0.0 });
                    rows.last_mut().expect("just pushed")
                }
            };
            row.evaluated += 1;
            row.satisfied += usize::from(r.satisfied);
            row.max_ratio = row.max_ratio.max(r.ratio);
            if !r.satisfied {
                failures.push(SweepFailure { tree, report: r.clone() });
            }
            if r.id == InequalityId::Prop1Main && r.p.get() == 2.0 {
                let dev = (r.ratio - 1.0).abs();
                p2_dev = Some(p2_dev.map_or(dev, |d| d.max(dev)));
            }
            table.push(CsvRow::from_report(r, Some(seed)));
        }
    }
    Ok((Outcome::Sweep(Sweep { trees: count, rows, p2_main_deviation: p2_dev, failures }), table))
}

/// Re-executes the manifest of the report at `path` and checks that the
/// result matches the recorded one.
pub fn replay(path: &Path, opts: &RunOptions) -> Result<(Report, Report)> {
    let recorded = Report::read_json(path)?;
    let rerun = execute(&recorded.manifest.params, opts)?;
    recorded.ensure_same(&rerun)?;
    Ok((recorded, rerun))
}
