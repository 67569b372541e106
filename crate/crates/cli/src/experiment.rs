//! Running configured chains and writing their artifacts.

use std::collections::BTreeMap;
use std::fs;
use std::io::{BufWriter, Write};
use std::path::{Path, PathBuf};
use std::time::Instant;

use oas_core::diagnostics::{
    component_density_estimate, density_estimate, iat, label_change_rate, m_posterior, occupancy_posterior,
    partition_frequencies, total_variation, ComponentMode, DensityMode,
};
use oas_core::oracle::{exact_partition_posterior, PartitionTable, MAX_ORACLE_N};
use oas_core::species::prediction_rule_simulate;
use oas_core::{
    run_chain, ChainTrace, ComponentFamily, InitMode, MarginalSampler, MixingPrior, NormalInverseGamma,
    NormalInverseWishart, OrderedSampler, SamplerKind, Schedule, SliceSampler,
};
use oas_core::baseline::DEFAULT_SLICE_CAP;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::config::{DataSource, ExperimentConfig, GridConfig, InitChoice};
use crate::data::{load_data, permute_data, Observations};
use crate::error::{CliError, CliResult};
use crate::synth::generate_synthetic;
use crate::trace_io::save_trace;

/// Sampler options that do not change the target distribution.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct RunOptions {
    pub init: InitChoice,
    pub slice_cap: usize,
    pub check_invariants: bool,
}

impl Default for RunOptions {
    fn default() -> Self {
        RunOptions {
            init: InitChoice::SingleBlock,
            slice_cap: DEFAULT_SLICE_CAP,
            check_invariants: false,
        }
    }
}

/// Each sampler draws from its own ChaCha stream, so a chain does not depend
/// on which other samplers share the config.
pub fn chain_rng(seed: u64, kind: SamplerKind) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let stream = SamplerKind::ALL.iter().position(|k| *k == kind).unwrap_or(0);
    rng.set_stream(stream as u64);
    rng
}

/// Run one chain of the given sampler.
pub fn sample_chain<F: ComponentFamily>(
    kind: SamplerKind,
    data: &[F::Obs],
    family: F,
    prior: &MixingPrior,
    schedule: Schedule,
    seed: u64,
    opts: &RunOptions,
) -> oas_core::Result<ChainTrace> {
    let mut rng = chain_rng(seed, kind);
    let start_labels = |rng: &mut ChaCha8Rng| -> oas_core::Result<Vec<usize>> {
        match opts.init {
            InitChoice::PredictionRule => Ok(prediction_rule_simulate(prior, data.len(), rng)?
                .into_iter()
                .map(|d| d - 1)
                .collect()),
            _ => Ok(vec![0; data.len()]),
        }
    };
    let check = opts.check_invariants;
    match kind {
        SamplerKind::Ordered => {
            let init = match opts.init {
                InitChoice::SingleBlock => InitMode::SingleBlock,
                InitChoice::PredictionRule => InitMode::PredictionRule,
                InitChoice::KBlocks(k) => InitMode::KBlocks(k),
            };
            let mut s = OrderedSampler::new(data, family, prior.clone(), init, &mut rng)?;
            run_chain(&mut s, &mut rng, schedule, prior.clone(), seed, check)
        }
        SamplerKind::Marginal => {
            let labels = start_labels(&mut rng)?;
            let mut s = MarginalSampler::new(data, family, prior.clone(), &labels, &mut rng)?;
            run_chain(&mut s, &mut rng, schedule, prior.clone(), seed, check)
        }
        SamplerKind::Slice => {
            let labels = start_labels(&mut rng)?;
            let mut s = SliceSampler::new(data, family, prior.clone(), &labels, &mut rng)?.with_cap(opts.slice_cap);
            run_chain(&mut s, &mut rng, schedule, prior.clone(), seed, check)
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct IatSummary {
    pub tau: f64,
    pub degenerate: bool,
    pub lags_used: usize,
}

fn iat_summary(series: &[f64]) -> Option<IatSummary> {
    iat(series).ok().map(|r| IatSummary {
        tau: r.tau,
        degenerate: r.degenerate,
        lags_used: r.lags_used,
    })
}

/// Contents of `summary.json`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Summary {
    pub sampler: String,
    pub prior: String,
    pub seed: u64,
    pub n: usize,
    pub dim: usize,
    pub iterations: usize,
    pub burn_in: usize,
    pub thin: usize,
    pub kept: usize,
    pub runtime_seconds: f64,
    /// `None` when the trace is too short for the estimator.
    pub iat_k: Option<IatSummary>,
    pub iat_deviance: Option<IatSummary>,
    pub mean_k: f64,
    pub mean_deviance: f64,
    pub k_posterior: BTreeMap<usize, f64>,
    /// Only for priors with a random number of components.
    pub m_posterior: Option<BTreeMap<u64, f64>>,
    pub label_change_rate: f64,
    /// Total variation to the exact partition posterior, when requested.
    pub oracle_tv: Option<f64>,
}

fn mean(xs: &[f64]) -> f64 {
    xs.iter().sum::<f64>() / xs.len().max(1) as f64
}

pub fn summarize<F: ComponentFamily>(
    family: &F,
    trace: &ChainTrace,
    schedule: Schedule,
    dim: usize,
    runtime_seconds: f64,
) -> CliResult<Summary> {
    let ks = trace.k_series();
    let ds = trace.deviance_series();
    Ok(Summary {
        sampler: trace.sampler.clone(),
        prior: trace.prior.to_string(),
        seed: trace.seed,
        n: trace.records.first().map_or(0, |r| r.n()),
        dim,
        iterations: schedule.iterations,
        burn_in: schedule.burn_in,
        thin: schedule.thin,
        kept: trace.len(),
        runtime_seconds,
        iat_k: iat_summary(&ks),
        iat_deviance: iat_summary(&ds),
        mean_k: mean(&ks),
        mean_deviance: mean(&ds),
        k_posterior: occupancy_posterior(trace)?,
        m_posterior: if trace.prior.has_random_m() { Some(m_posterior(trace)?) } else { None },
        label_change_rate: label_change_rate(family, trace)?,
        oracle_tv: None,
    })
}

/// Families whose observations can be laid out on an evaluation grid.
pub trait GridFamily: ComponentFamily {
    fn grid(data: &[Self::Obs], cfg: &GridConfig) -> Vec<Self::Obs>;
    fn coords(y: &Self::Obs) -> Vec<f64>;
    fn coord_names() -> &'static [&'static str];
}

fn span(lo: f64, hi: f64, points: usize) -> Vec<f64> {
    let pad = if hi > lo { 0.1 * (hi - lo) } else { 1.0 };
    let (lo, hi) = (lo - pad, hi + pad);
    (0..points).map(|i| lo + (hi - lo) * i as f64 / (points - 1) as f64).collect()
}

fn bounds(xs: impl Iterator<Item = f64>) -> (f64, f64) {
    xs.fold((f64::INFINITY, f64::NEG_INFINITY), |(lo, hi), x| (lo.min(x), hi.max(x)))
}

impl GridFamily for NormalInverseGamma {
    fn grid(data: &[f64], cfg: &GridConfig) -> Vec<f64> {
        let (lo, hi) = bounds(data.iter().copied());
        span(lo, hi, cfg.points)
    }

    fn coords(y: &f64) -> Vec<f64> {
        vec![*y]
    }

    fn coord_names() -> &'static [&'static str] {
        &["y"]
    }
}

impl GridFamily for NormalInverseWishart {
    fn grid(data: &[[f64; 2]], cfg: &GridConfig) -> Vec<[f64; 2]> {
        let (x0, x1) = bounds(data.iter().map(|p| p[0]));
        let (y0, y1) = bounds(data.iter().map(|p| p[1]));
        let xs = span(x0, x1, cfg.points_2d);
        let ys = span(y0, y1, cfg.points_2d);
        xs.iter().flat_map(|&x| ys.iter().map(move |&y| [x, y])).collect()
    }

    fn coords(y: &[f64; 2]) -> Vec<f64> {
        y.to_vec()
    }

    fn coord_names() -> &'static [&'static str] {
        &["y1", "y2"]
    }
}

fn write_grid<F: GridFamily>(path: &Path, grid: &[F::Obs], columns: &[(&str, Vec<f64>)]) -> CliResult<()> {
    let file = fs::File::create(path).map_err(CliError::io(path))?;
    let mut w = BufWriter::new(file);
    let io = CliError::io(path);
    let mut header: Vec<&str> = F::coord_names().to_vec();
    header.extend(columns.iter().map(|(name, _)| *name));
    let result = (|| -> std::io::Result<()> {
        writeln!(w, "{}", header.join(","))?;
        for (g, y) in grid.iter().enumerate() {
            let mut cells: Vec<String> = F::coords(y).iter().map(f64::to_string).collect();
            cells.extend(columns.iter().map(|(_, v)| v[g].to_string()));
            writeln!(w, "{}", cells.join(","))?;
        }
        w.flush()
    })();
    result.map_err(io)
}

/// Mixture density on a grid (full and empirical estimators) and the weighted
/// densities of the first components.
pub fn write_density_grids<F: GridFamily>(
    dir: &Path,
    family: &F,
    data: &[F::Obs],
    trace: &ChainTrace,
    cfg: &GridConfig,
) -> CliResult<Vec<PathBuf>> {
    let grid = F::grid(data, cfg);
    let mut written = Vec::new();
    let full = density_estimate(family, trace, &grid, DensityMode::Full)?;
    let empirical = density_estimate(family, trace, &grid, DensityMode::Empirical)?;
    let path = dir.join("density.csv");
    write_grid::<F>(&path, &grid, &[("full", full), ("empirical", empirical)])?;
    written.push(path);
    let has_weights = trace.records.iter().any(|r| !r.weights.is_empty());
    let max_k = trace.records.iter().map(|r| r.k).max().unwrap_or(0);
    for j in 1..=max_k.min(cfg.components) {
        let mut columns = Vec::new();
        if has_weights {
            columns.push(("weight", component_density_estimate(family, trace, &grid, j, ComponentMode::Weight)?));
        }
        columns.push(("empirical", component_density_estimate(family, trace, &grid, j, ComponentMode::Empirical)?));
        let path = dir.join(format!("component_{j}.csv"));
        write_grid::<F>(&path, &grid, &columns)?;
        written.push(path);
    }
    Ok(written)
}

/// Artifacts of one chain.
#[derive(Debug, Clone, PartialEq)]
pub struct ChainOutput {
    pub sampler: SamplerKind,
    pub dir: PathBuf,
    pub trace_path: PathBuf,
    pub summary_path: PathBuf,
    pub summary: Summary,
}

/// Load or generate the configured observations, then apply the permutation.
pub fn load_observations(cfg: &ExperimentConfig) -> CliResult<Observations> {
    let data = match cfg.data_source()? {
        DataSource::File(path) => load_data(&path)?,
        DataSource::Synthetic(name, seed) => generate_synthetic(name, seed),
    };
    Ok(match cfg.data.permute_seed {
        Some(seed) => permute_data(&data, seed),
        None => data,
    })
}

fn options(cfg: &ExperimentConfig) -> CliResult<RunOptions> {
    Ok(RunOptions {
        init: cfg.init_choice()?,
        slice_cap: cfg.slice_cap.unwrap_or(DEFAULT_SLICE_CAP),
        check_invariants: cfg.check_invariants,
    })
}

fn oracle_table<F: ComponentFamily>(cfg: &ExperimentConfig, data: &[F::Obs], family: &F) -> CliResult<PartitionTable> {
    if data.len() > MAX_ORACLE_N {
        return Err(CliError::Config(format!(
            "the exact posterior needs n <= {MAX_ORACLE_N}, the data have n = {}",
            data.len()
        )));
    }
    let prior = cfg.prior.build()?;
    exact_partition_posterior(data, &prior, family).map_err(|e| CliError::Config(e.to_string()))
}

fn save_oracle(table: &PartitionTable, output: &Path) -> CliResult<PathBuf> {
    let path = output.join("oracle.csv");
    let file = fs::File::create(&path).map_err(CliError::io(&path))?;
    table.write_csv(BufWriter::new(file)).map_err(CliError::io(&path))?;
    Ok(path)
}

fn run_family<F: GridFamily>(cfg: &ExperimentConfig, data: &[F::Obs], family: F, dim: usize) -> CliResult<Vec<ChainOutput>>
where
    F::Obs: Sync,
{
    let kinds = cfg.samplers()?;
    let prior = cfg.prior.build()?;
    let schedule = cfg.schedule()?;
    let opts = options(cfg)?;
    let oracle = if cfg.compare_oracle {
        let table = oracle_table(cfg, data, &family)?;
        save_oracle(&table, &cfg.output)?;
        Some(table.as_map())
    } else {
        None
    };
    let run_one = |kind: SamplerKind| -> CliResult<ChainOutput> {
        let dir = cfg.output.join(kind.as_str());
        fs::create_dir_all(&dir).map_err(CliError::io(&dir))?;
        let start = Instant::now();
        let trace = sample_chain(kind, data, family.clone(), &prior, schedule, cfg.seed, &opts)?;
        let runtime = start.elapsed().as_secs_f64();
        let trace_path = dir.join("trace.csv");
        save_trace(&trace, &trace_path)?;
        let mut summary = summarize(&family, &trace, schedule, dim, runtime)?;
        if let Some(exact) = &oracle {
            summary.oracle_tv = Some(total_variation(exact.clone(), partition_frequencies(&trace)));
        }
        let summary_path = dir.join("summary.json");
        let json = serde_json::to_string_pretty(&summary).map_err(|e| CliError::Trace(e.to_string()))?;
        fs::write(&summary_path, json + "\n").map_err(CliError::io(&summary_path))?;
        write_density_grids(&dir, &family, data, &trace, &cfg.grid)?;
        Ok(ChainOutput {
            sampler: kind,
            dir,
            trace_path,
            summary_path,
            summary,
        })
    };
    let results: Vec<CliResult<ChainOutput>> = std::thread::scope(|scope| {
        let handles: Vec<_> = kinds.iter().map(|&k| scope.spawn(move || run_one(k))).collect();
        handles
            .into_iter()
            .map(|h| h.join().unwrap_or_else(|_| Err(CliError::Trace("chain thread panicked".into()))))
            .collect()
    });
    let outputs = results.into_iter().collect::<CliResult<Vec<_>>>()?;
    if oracle.is_some() {
        let path = cfg.output.join("oracle_tv.csv");
        let mut text = String::from("sampler,tv\n");
        for o in &outputs {
            text += &format!("{},{}\n", o.sampler, o.summary.oracle_tv.unwrap_or(f64::NAN));
        }
        fs::write(&path, text).map_err(CliError::io(&path))?;
    }
    Ok(outputs)
}

/// Run every configured chain and write its artifacts under
/// `output/<sampler>/`. The observations used are saved as `output/data.csv`.
pub fn run_experiment(cfg: &ExperimentConfig) -> CliResult<Vec<ChainOutput>> {
    cfg.validate()?;
    let data = load_observations(cfg)?;
    fs::create_dir_all(&cfg.output).map_err(CliError::io(&cfg.output))?;
    data.save(&cfg.output.join("data.csv"))?;
    match &data {
        Observations::Univariate(v) => run_family(cfg, v, cfg.family.univariate(v)?, 1),
        Observations::Bivariate(v) => run_family(cfg, v, cfg.family.bivariate(v)?, 2),
    }
}

/// Exact partition posterior of the configured data, written to
/// `output/oracle.csv`.
pub fn run_oracle(cfg: &ExperimentConfig) -> CliResult<(PartitionTable, PathBuf)> {
    cfg.validate()?;
    let data = load_observations(cfg)?;
    fs::create_dir_all(&cfg.output).map_err(CliError::io(&cfg.output))?;
    let table = match &data {
        Observations::Univariate(v) => oracle_table(cfg, v, &cfg.family.univariate(v)?)?,
        Observations::Bivariate(v) => oracle_table(cfg, v, &cfg.family.bivariate(v)?)?,
    };
    let path = save_oracle(&table, &cfg.output)?;
    Ok((table, path))
}
