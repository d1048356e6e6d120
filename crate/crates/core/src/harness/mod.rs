//! Experiment runner behind the command-line tool: count-based GPH tables,
//! averaged log-log periodogram panels, variance-time runs and the generic
//! simulate/estimate pipelines.

pub mod config;

use std::fs;
use std::io::Write;
use std::path::{Path, PathBuf};

use rayon::prelude::*;

use crate::counts::{
    block_sizes_between, variance_time_curve, CountSeries, CountSimulator, DurationModel,
};
use crate::error::{Error, Result};
use crate::estimators::{
    gph, gph_with, local_whittle_gse, local_whittle_noise, write_reports_csv, BandwidthSpec,
    EstimateReport, EstimatorKind, GphRegressor, ReplicationSummary,
};
use crate::fracsim::{simulate_arfima, FracSpec};
use crate::random::{RngStream, StableParams};
use crate::shotnoise::{
    simulate_error_duration, simulate_infinite_source_poisson, simulate_on_off,
    simulate_renewal_reward, DurationLaw, IndependentMarks, ShockLaw, ShotNoisePath,
};
use crate::spectral::{
    averaged_loglog_periodogram, periodogram_with, LogLogAverage, PeriodogramOptions,
};
use crate::stats;
use crate::volatility::{
    log_square_transform, simulate_arch_inf, simulate_fiegarch, simulate_lmsv_lmsd, ArchInfSpec,
    Coefficients, FiegarchSpec, InnovationLaw, LmsvSpec, VolMode,
};
use crate::TimeSeries;

pub use config::{key, Config, ConfigError, KeySpec};

pub const VERSION: &str = env!("CARGO_PKG_VERSION");

/// Failure of a CLI command, carrying the process exit code.
#[derive(Debug, thiserror::Error)]
pub enum HarnessError {
    #[error(transparent)]
    Config(#[from] ConfigError),
    #[error(transparent)]
    Model(#[from] Error),
    #[error("i/o error on {path}: {source}")]
    Io {
        path: String,
        #[source]
        source: std::io::Error,
    },
}

impl HarnessError {
    /// 2 usage, 3 parameter, 4 numerical, 1 anything else.
    pub fn exit_code(&self) -> i32 {
        match self {
            HarnessError::Config(_) => 2,
            HarnessError::Model(e) => match e.root() {
                Error::Parameter(_) | Error::Configuration(_) => 3,
                Error::Numerical(_) => 4,
                Error::Input(_) => 2,
                _ => 1,
            },
            HarnessError::Io { .. } => 1,
        }
    }
}

pub type HarnessResult<T> = std::result::Result<T, HarnessError>;

fn io_err(path: &Path) -> impl FnOnce(std::io::Error) -> HarnessError + '_ {
    move |source| HarnessError::Io {
        path: path.display().to_string(),
        source,
    }
}

/// Runs `f(rep)` for `rep = 0..reps` in parallel, keeping index order.
pub fn replicate<T, F>(reps: usize, f: F) -> Result<Vec<T>>
where
    T: Send,
    F: Fn(usize) -> Result<T> + Sync,
{
    (0..reps)
        .into_par_iter()
        .map(|r| {
            f(r).map_err(|e| Error::Replication {
                rep: r,
                source: Box::new(e),
            })
        })
        .collect()
}

// ---------------------------------------------------------------------------
// Schemas

const COMMON: &[KeySpec] = &[
    key("seed", "1", "master seed"),
    key("reps", "1", "number of replications"),
];

const STABLE_KEYS: &[KeySpec] = &[
    key("alpha", "1.5", "stable tail index"),
    key("beta", "0.8", "stable skewness"),
    key("scale", "1", "stable scale"),
    key("shift", "0", "stable location"),
    key(
        "stable_multiplier",
        "1.21",
        "multiplier applied to stable durations",
    ),
];

const LMSD_KEYS: &[KeySpec] = &[
    key("d", "0.3545", "memory parameter of the latent log-duration"),
    key("ar", "-0.42", "AR coefficients of the latent process"),
    key("ma", "", "MA coefficients of the latent process"),
    key(
        "latent_sd",
        "1",
        "innovation standard deviation of the latent process",
    ),
    key(
        "weibull_shape",
        "1.3376",
        "shape of the unit-mean Weibull innovations",
    ),
    key(
        "lmsd_multiplier",
        "1",
        "multiplier applied to LMSD durations",
    ),
];

fn schema(parts: &[&[KeySpec]], extra: &[KeySpec]) -> Vec<KeySpec> {
    let mut out: Vec<KeySpec> = Vec::new();
    for p in parts.iter().copied().chain(std::iter::once(extra)) {
        for k in p {
            if let Some(slot) = out.iter_mut().find(|e| e.key == k.key) {
                *slot = *k;
            } else {
                out.push(*k);
            }
        }
    }
    out
}

pub fn table1_schema() -> Vec<KeySpec> {
    schema(
        &[COMMON, STABLE_KEYS],
        &[
            key("reps", "500", "number of replications"),
            key("n", "10000", "number of count intervals"),
            key("delta_t", "300,600,1200", "interval widths in seconds"),
            key("m_exponents", "0.5,0.8", "bandwidth exponents, m = n^e"),
            key(
                "d0",
                "auto",
                "null value for t-statistics (auto: 1 - alpha/2)",
            ),
        ],
    )
}

pub fn table2_schema() -> Vec<KeySpec> {
    schema(
        &[COMMON, LMSD_KEYS],
        &[
            key("reps", "200", "number of replications"),
            key("n", "10000", "number of count intervals"),
            key("delta_t", "300,1800,3600", "interval widths in seconds"),
            key("m_exponents", "0.5,0.8", "bandwidth exponents, m = n^e"),
            key("d0", "auto", "null value for t-statistics (auto: d)"),
        ],
    )
}

pub fn figure_schema() -> Vec<KeySpec> {
    schema(
        &[COMMON, STABLE_KEYS, LMSD_KEYS],
        &[
            key("reps", "100", "number of replications"),
            key("n", "10000", "number of count intervals"),
            key("delta_t", "300", "interval width in seconds"),
        ],
    )
}

pub fn variance_time_schema() -> Vec<KeySpec> {
    schema(
        &[COMMON, STABLE_KEYS, LMSD_KEYS],
        &[
            key("reps", "50", "number of replications"),
            key("model", "stable", "stable | lmsd | exponential"),
            key("mean", "1", "mean of exponential durations"),
            key("n", "100000", "number of count intervals"),
            key("delta_t", "1", "interval width in seconds"),
            key("block_min", "10", "smallest block size"),
            key("block_max", "auto", "largest block size (auto: n/100)"),
            key("blocks", "12", "number of block sizes"),
        ],
    )
}

pub fn simulate_schema() -> Vec<KeySpec> {
    schema(
        &[COMMON, STABLE_KEYS, LMSD_KEYS],
        &[
            key(
                "model",
                "arfima",
                "arfima | lmsv | lmsd | fiegarch | arch-inf | renewal-reward | on-off | \
                 error-duration | poisson | counts-stable | counts-lmsd",
            ),
            key("n", "8192", "series length or number of count intervals"),
            key("d", "0.4", "memory parameter"),
            key("ar", "", "AR coefficients"),
            key(
                "latent_sd",
                "1",
                "innovation standard deviation of the latent process",
            ),
            key("omega", "0.1", "FIEGARCH / ARCH intercept"),
            key("theta", "-0.3", "FIEGARCH sign coefficient"),
            key("gamma", "0.5", "FIEGARCH magnitude coefficient"),
            key("arch_scale", "0.9", "sum of the ARCH coefficients"),
            key(
                "truncation_tol",
                "0.2",
                "relative squared-tail tolerance for infinite sums",
            ),
            key("max_lags", "65536", "cap on truncated coefficient lags"),
            key("tail", "1.5", "Pareto tail index of shot-noise durations"),
            key("x_min", "1", "Pareto lower bound"),
            key("shock", "gaussian", "gaussian | constant | rademacher"),
            key("shock_mean", "0", "shock mean (gaussian / constant)"),
            key(
                "shock_sd",
                "1",
                "shock standard deviation or Rademacher scale",
            ),
            key("rate", "1", "Poisson birth rate"),
            key("off_mean", "1", "mean of exponential OFF periods"),
            key("horizon", "8192", "time horizon of continuous-time paths"),
            key("step", "1", "grid step of continuous-time paths"),
            key("delta_t", "300", "interval width for count models"),
        ],
    )
}

pub fn estimate_schema() -> Vec<KeySpec> {
    vec![
        key("input", "", "series CSV to read"),
        key("method", "gph", "gph | whittle | whittle-noise | all"),
        key("m_exp", "0.8", "bandwidth exponent, m = n^e"),
        key("m", "auto", "explicit bandwidth (overrides m_exp)"),
        key("trim", "0", "lowest frequencies excluded"),
        key("center", "true", "mean-center before the DFT"),
        key("transform", "none", "none | log-square"),
        key("regressor", "log", "GPH regressor: log | sine"),
    ]
}

// ---------------------------------------------------------------------------
// Model builders

pub fn stable_model(cfg: &Config) -> HarnessResult<DurationModel> {
    Ok(DurationModel::Stable {
        params: StableParams::new(
            cfg.f64("alpha")?,
            cfg.f64("beta")?,
            cfg.f64("scale")?,
            cfg.f64("shift")?,
        )?,
        multiplier: cfg.f64("stable_multiplier")?,
    })
}

pub fn lmsd_spec(cfg: &Config) -> HarnessResult<LmsvSpec> {
    Ok(LmsvSpec {
        latent: FracSpec {
            d: cfg.f64("d")?,
            ar: cfg.f64_list("ar")?,
            ma: cfg.f64_list("ma")?,
            innovation_sd: cfg.f64("latent_sd")?,
        },
        innovation_law: InnovationLaw::WeibullUnitMean {
            shape: cfg.f64("weibull_shape")?,
        },
        mode: VolMode::Lmsd,
    })
}

pub fn lmsd_model(cfg: &Config) -> HarnessResult<DurationModel> {
    Ok(DurationModel::Lmsd {
        spec: lmsd_spec(cfg)?,
        multiplier: cfg.f64("lmsd_multiplier")?,
    })
}

// ---------------------------------------------------------------------------
// Count experiments

/// Settings of a count-based GPH table.
#[derive(Debug, Clone)]
pub struct CountTableConfig {
    pub model: DurationModel,
    pub n: usize,
    pub delta_ts: Vec<f64>,
    pub m_exponents: Vec<f64>,
    pub reps: usize,
    pub seed: u64,
    pub d0: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct TableRow {
    pub delta_t: f64,
    pub m_exponent: f64,
    pub summary: ReplicationSummary,
}

/// Stream of replication `rep` for interval width number `slot`.
pub fn replication_stream(seed: u64, rep: usize, slot: u64) -> RngStream {
    RngStream::replication(seed, rep).child(slot)
}

/// `reps` count series for one interval width.
pub fn simulate_count_replications(
    model: &DurationModel,
    delta_t: f64,
    n: usize,
    reps: usize,
    seed: u64,
    slot: u64,
) -> Result<Vec<CountSeries>> {
    let sim = CountSimulator::new(model.clone(), delta_t, n)?;
    replicate(reps, |r| sim.simulate(replication_stream(seed, r, slot)))
}

/// GPH summaries of count series at each bandwidth exponent.
pub fn gph_rows(
    series: &[CountSeries],
    delta_t: f64,
    m_exponents: &[f64],
    d0: f64,
) -> Result<Vec<TableRow>> {
    let per_rep: Vec<Vec<f64>> = replicate(series.len(), |r| {
        let x = series[r].to_f64();
        let p = periodogram_with(&x, PeriodogramOptions::default())?;
        m_exponents
            .iter()
            .map(|&e| Ok(gph(&p, BandwidthSpec::from_exponent(x.len(), e))?.d_hat))
            .collect()
    })?;
    let n = series.first().map(|s| s.len()).unwrap_or(0);
    m_exponents
        .iter()
        .enumerate()
        .map(|(i, &e)| {
            let est: Vec<f64> = per_rep.iter().map(|v| v[i]).collect();
            Ok(TableRow {
                delta_t,
                m_exponent: e,
                summary: ReplicationSummary::new(
                    EstimatorKind::Gph,
                    BandwidthSpec::from_exponent(n, e).m,
                    est,
                    d0,
                )?,
            })
        })
        .collect()
}

pub fn run_count_table(cfg: &CountTableConfig) -> Result<Vec<TableRow>> {
    if cfg.reps == 0 || cfg.n < 64 || cfg.delta_ts.iter().any(|&d| !(d > 0.0)) {
        return Err(Error::param(
            "need reps >= 1, n >= 64 and positive interval widths",
        ));
    }
    let mut rows = Vec::new();
    for (i, &dt) in cfg.delta_ts.iter().enumerate() {
        let series =
            simulate_count_replications(&cfg.model, dt, cfg.n, cfg.reps, cfg.seed, i as u64)?;
        rows.extend(gph_rows(&series, dt, &cfg.m_exponents, cfg.d0)?);
    }
    Ok(rows)
}

fn fmt_opt(v: Option<f64>) -> String {
    v.map(|x| format!("{x:?}")).unwrap_or_else(|| "NA".into())
}

pub fn write_table_csv<W: Write>(mut w: W, rows: &[TableRow]) -> std::io::Result<()> {
    writeln!(w, "delta_t,m_exponent,m,reps,mean_d_hat,sd,t_value,d0")?;
    for r in rows {
        let s = &r.summary;
        writeln!(
            w,
            "{:?},{:?},{},{},{:?},{},{},{:?}",
            r.delta_t,
            r.m_exponent,
            s.m,
            s.estimates.len(),
            s.mean,
            fmt_opt(s.sd),
            fmt_opt(s.t_value),
            s.d0
        )?;
    }
    Ok(())
}

/// Averaged log-log periodogram of precomputed count series.
pub fn figure_panel_from_series(series: &[CountSeries]) -> Result<LogLogAverage> {
    let n = series.first().map(|s| s.len()).unwrap_or(0);
    averaged_loglog_periodogram(|r| Ok(series[r].to_f64()), n, series.len())
}

/// Averaged log-log periodogram panel for one duration model.
pub fn figure_panel(
    model: &DurationModel,
    delta_t: f64,
    n: usize,
    reps: usize,
    seed: u64,
    slot: u64,
) -> Result<LogLogAverage> {
    let sim = CountSimulator::new(model.clone(), delta_t, n)?;
    averaged_loglog_periodogram(
        |r| Ok(sim.simulate(replication_stream(seed, r, slot))?.to_f64()),
        n,
        reps,
    )
}

/// Frequency-index bands used to describe the panel shape: the lowest
/// decade `j ∈ [1, 10]` and a decade centred on `√(n/2)`.
pub fn figure_bands(n: usize) -> ((usize, usize), (usize, usize)) {
    let jc = (n as f64 / 2.0).sqrt();
    let lo = (jc / 10f64.sqrt()).round() as usize;
    let hi = (jc * 10f64.sqrt()).round() as usize;
    ((1, 10), (lo.max(11), hi.min(n / 2)))
}

/// Per-replication Hurst estimates and the mean variance-time curve.
#[derive(Debug, Clone, PartialEq)]
pub struct VarianceTimeRun {
    pub block_sizes: Vec<usize>,
    pub mean_variances: Vec<f64>,
    pub hurst: Vec<f64>,
}

pub fn run_variance_time(
    model: &DurationModel,
    delta_t: f64,
    n: usize,
    reps: usize,
    seed: u64,
    block_sizes: &[usize],
) -> Result<VarianceTimeRun> {
    let sim = CountSimulator::new(model.clone(), delta_t, n)?;
    let curves = replicate(reps, |r| {
        let c = sim.simulate(replication_stream(seed, r, 0))?;
        variance_time_curve(&c.to_f64(), block_sizes)
    })?;
    let k = block_sizes.len();
    let mean_variances = (0..k)
        .map(|i| curves.iter().map(|c| c.variances[i]).sum::<f64>() / curves.len() as f64)
        .collect();
    Ok(VarianceTimeRun {
        block_sizes: block_sizes.to_vec(),
        mean_variances,
        hurst: curves.iter().map(|c| c.hurst).collect(),
    })
}

// ---------------------------------------------------------------------------
// Output

/// Writes the metadata header shared by all CSV outputs.
pub fn write_metadata<W: Write>(mut w: W, command: &str, cfg: &Config) -> std::io::Result<()> {
    writeln!(w, "# longmem {VERSION}")?;
    writeln!(w, "# command={command}")?;
    writeln!(w, "# config_hash={}", cfg.hash())?;
    for (k, v) in cfg.entries() {
        writeln!(w, "# {k}={v}")?;
    }
    Ok(())
}

fn write_output<F>(
    dir: &Path,
    name: &str,
    command: &str,
    cfg: &Config,
    body: F,
) -> HarnessResult<PathBuf>
where
    F: FnOnce(&mut Vec<u8>) -> std::io::Result<()>,
{
    fs::create_dir_all(dir).map_err(io_err(dir))?;
    let path = dir.join(name);
    let mut buf = Vec::new();
    write_metadata(&mut buf, command, cfg)
        .and_then(|_| body(&mut buf))
        .map_err(io_err(&path))?;
    fs::write(&path, buf).map_err(io_err(&path))?;
    Ok(path)
}

// ---------------------------------------------------------------------------
// Commands

fn d0_or(cfg: &Config, fallback: f64) -> HarnessResult<f64> {
    Ok(cfg.opt_f64("d0")?.unwrap_or(fallback))
}

fn table_config(cfg: &Config, model: DurationModel, d0: f64) -> HarnessResult<CountTableConfig> {
    Ok(CountTableConfig {
        model,
        n: cfg.usize("n")?,
        delta_ts: cfg.f64_list("delta_t")?,
        m_exponents: cfg.f64_list("m_exponents")?,
        reps: cfg.usize("reps")?,
        seed: cfg.u64("seed")?,
        d0,
    })
}

pub fn cmd_table1(cfg: &Config, out: &Path) -> HarnessResult<Vec<PathBuf>> {
    let d0 = d0_or(cfg, 1.0 - cfg.f64("alpha")? / 2.0)?;
    let rows = run_count_table(&table_config(cfg, stable_model(cfg)?, d0)?)?;
    Ok(vec![write_output(out, "table1.csv", "table1", cfg, |w| {
        write_table_csv(w, &rows)
    })?])
}

pub fn cmd_table2(cfg: &Config, out: &Path) -> HarnessResult<Vec<PathBuf>> {
    let d0 = d0_or(cfg, cfg.f64("d")?)?;
    let rows = run_count_table(&table_config(cfg, lmsd_model(cfg)?, d0)?)?;
    Ok(vec![write_output(out, "table2.csv", "table2", cfg, |w| {
        write_table_csv(w, &rows)
    })?])
}

pub fn cmd_figure(cfg: &Config, out: &Path) -> HarnessResult<Vec<PathBuf>> {
    let (dt, n, reps, seed) = (
        cfg.f64("delta_t")?,
        cfg.usize("n")?,
        cfg.usize("reps")?,
        cfg.u64("seed")?,
    );
    let stable = figure_panel(&stable_model(cfg)?, dt, n, reps, seed, 0)?;
    let lmsd = figure_panel(&lmsd_model(cfg)?, dt, n, reps, seed, 1)?;
    Ok(vec![
        write_output(out, "figure_stable.csv", "figure", cfg, |w| {
            stable.write_csv(w)
        })?,
        write_output(out, "figure_lmsd.csv", "figure", cfg, |w| lmsd.write_csv(w))?,
    ])
}

pub fn cmd_variance_time(cfg: &Config, out: &Path) -> HarnessResult<Vec<PathBuf>> {
    let n = cfg.usize("n")?;
    let model = match cfg
        .choice("model", &["stable", "lmsd", "exponential"])?
        .as_str()
    {
        "stable" => stable_model(cfg)?,
        "lmsd" => lmsd_model(cfg)?,
        _ => DurationModel::Exponential {
            mean: cfg.f64("mean")?,
        },
    };
    let hi = match cfg.raw("block_max") {
        "auto" => n / 100,
        _ => cfg.usize("block_max")?,
    };
    let blocks = block_sizes_between(cfg.usize("block_min")?, hi, cfg.usize("blocks")?);
    let run = run_variance_time(
        &model,
        cfg.f64("delta_t")?,
        n,
        cfg.usize("reps")?,
        cfg.u64("seed")?,
        &blocks,
    )?;
    let curve = write_output(out, "variance_time_curve.csv", "variance-time", cfg, |w| {
        writeln!(w, "block_size,mean_variance")?;
        for (m, v) in run.block_sizes.iter().zip(&run.mean_variances) {
            writeln!(w, "{m},{v:?}")?;
        }
        Ok(())
    })?;
    let reps = write_output(out, "variance_time_hurst.csv", "variance-time", cfg, |w| {
        writeln!(w, "# mean_hurst={:?}", stats::mean(&run.hurst))?;
        writeln!(w, "rep,hurst")?;
        for (r, h) in run.hurst.iter().enumerate() {
            writeln!(w, "{r},{h:?}")?;
        }
        Ok(())
    })?;
    Ok(vec![curve, reps])
}

fn shock_law(cfg: &Config) -> HarnessResult<ShockLaw> {
    let (m, s) = (cfg.f64("shock_mean")?, cfg.f64("shock_sd")?);
    Ok(
        match cfg
            .choice("shock", &["gaussian", "constant", "rademacher"])?
            .as_str()
        {
            "gaussian" => ShockLaw::Gaussian { mean: m, sd: s },
            "constant" => ShockLaw::Constant(m),
            _ => ShockLaw::Rademacher { scale: s },
        },
    )
}

fn write_series(w: &mut Vec<u8>, values: &[f64], step: f64) -> std::io::Result<()> {
    writeln!(w, "# step={step:?}")?;
    writeln!(w, "t,value")?;
    for (i, v) in values.iter().enumerate() {
        writeln!(w, "{},{v:?}", i + 1)?;
    }
    Ok(())
}

pub fn cmd_simulate(cfg: &Config, out: &Path) -> HarnessResult<Vec<PathBuf>> {
    let models = [
        "arfima",
        "lmsv",
        "lmsd",
        "fiegarch",
        "arch-inf",
        "renewal-reward",
        "on-off",
        "error-duration",
        "poisson",
        "counts-stable",
        "counts-lmsd",
    ];
    let model = cfg.choice("model", &models)?;
    let n = cfg.usize("n")?;
    let stream = RngStream::replication(cfg.u64("seed")?, 0);
    let mut rng = stream.rng();
    let latent = FracSpec {
        d: cfg.f64("d")?,
        ar: cfg.f64_list("ar")?,
        ma: cfg.f64_list("ma")?,
        innovation_sd: cfg.f64("latent_sd")?,
    };
    let tol = cfg.f64("truncation_tol")?;
    let max_lags = cfg.usize("max_lags")?;
    let series = |values: Vec<f64>, step: f64| -> HarnessResult<Vec<PathBuf>> {
        Ok(vec![write_output(
            out,
            "series.csv",
            "simulate",
            cfg,
            |w| write_series(w, &values, step),
        )?])
    };
    let path_out = |p: ShotNoisePath| -> HarnessResult<Vec<PathBuf>> {
        let a = write_output(out, "series.csv", "simulate", cfg, |w| {
            write_series(w, &p.values, p.step)
        })?;
        let b = write_output(out, "events.csv", "simulate", cfg, |w| {
            p.events.write_csv(w)
        })?;
        Ok(vec![a, b])
    };
    let durations = || -> HarnessResult<DurationLaw> {
        Ok(DurationLaw::pareto(cfg.f64("tail")?, cfg.f64("x_min")?)?)
    };
    let horizon = cfg.f64("horizon")?;
    let step = cfg.f64("step")?;
    match model.as_str() {
        "arfima" => series(simulate_arfima(&latent, n, &mut rng)?.values, 1.0),
        "lmsv" | "lmsd" => {
            let spec = if model == "lmsv" {
                LmsvSpec {
                    latent,
                    innovation_law: InnovationLaw::Gaussian,
                    mode: VolMode::Lmsv,
                }
            } else {
                lmsd_spec(cfg)?
            };
            series(simulate_lmsv_lmsd(&spec, n, stream)?.x.values, 1.0)
        }
        "fiegarch" => {
            let mut spec = FiegarchSpec::new(
                cfg.f64("omega")?,
                cfg.f64("theta")?,
                cfg.f64("gamma")?,
                Coefficients::FractionalMa {
                    d: cfg.f64("d")?,
                    scale: 1.0,
                },
            );
            spec.truncation_tol = tol;
            spec.max_lags = max_lags;
            series(simulate_fiegarch(&spec, n, &mut rng)?.x.values, 1.0)
        }
        "arch-inf" => {
            let mut spec = ArchInfSpec::new(
                cfg.f64("omega")?,
                Coefficients::FractionalAr {
                    d: cfg.f64("d")?,
                    scale: cfg.f64("arch_scale")?,
                },
            );
            spec.truncation_tol = tol;
            spec.max_lags = max_lags;
            series(simulate_arch_inf(&spec, n, &mut rng)?.x.values, 1.0)
        }
        "renewal-reward" => path_out(simulate_renewal_reward(
            &durations()?,
            &shock_law(cfg)?,
            horizon,
            step,
            &mut rng,
        )?),
        "on-off" => {
            let off = DurationLaw::Exponential {
                mean: cfg.f64("off_mean")?,
            };
            path_out(simulate_on_off(
                &durations()?,
                &off,
                horizon,
                step,
                &mut rng,
            )?)
        }
        "error-duration" => series(
            simulate_error_duration(&shock_law(cfg)?, &durations()?, n, &mut rng)?.values,
            1.0,
        ),
        "poisson" => {
            let marks = IndependentMarks {
                shock: shock_law(cfg)?,
                duration: durations()?,
            };
            path_out(simulate_infinite_source_poisson(
                cfg.f64("rate")?,
                &marks,
                horizon,
                step,
                &mut rng,
            )?)
        }
        _ => {
            let m = if model == "counts-stable" {
                stable_model(cfg)?
            } else {
                lmsd_model(cfg)?
            };
            let c = CountSimulator::new(m, cfg.f64("delta_t")?, n)?.simulate(stream)?;
            Ok(vec![write_output(
                out,
                "counts.csv",
                "simulate",
                cfg,
                |w| c.write_csv(w),
            )?])
        }
    }
}

/// Reads the last column of a CSV written by `simulate` (or any CSV whose
/// first non-comment line is a header).
pub fn read_series_csv(text: &str) -> Result<TimeSeries> {
    let mut values = Vec::new();
    let mut header = false;
    for (i, line) in text.lines().enumerate() {
        let line = line.trim();
        if line.is_empty() || line.starts_with('#') {
            continue;
        }
        if !header {
            header = true;
            continue;
        }
        let last = line.rsplit(',').next().unwrap_or("");
        values.push(
            last.trim()
                .parse::<f64>()
                .map_err(|_| Error::input(format!("line {}: '{last}' is not a number", i + 1)))?,
        );
    }
    Ok(TimeSeries::new(values))
}

/// Estimates configured by an `estimate` run on one series.
pub fn estimate_series(cfg: &Config, series: &TimeSeries) -> HarnessResult<Vec<EstimateReport>> {
    let x = match cfg.choice("transform", &["none", "log-square"])?.as_str() {
        "log-square" => log_square_transform(series),
        _ => series.clone(),
    };
    let p = periodogram_with(
        &x.values,
        PeriodogramOptions {
            center: cfg.bool("center")?,
        },
    )?;
    let m = match cfg.raw("m") {
        "auto" => BandwidthSpec::from_exponent(x.len(), cfg.f64("m_exp")?).m,
        _ => cfg.usize("m")?,
    };
    let bw = BandwidthSpec::new(m, cfg.usize("trim")?);
    let regressor = match cfg.choice("regressor", &["log", "sine"])?.as_str() {
        "sine" => GphRegressor::Sine,
        _ => GphRegressor::LogFrequency,
    };
    let method = cfg.choice("method", &["gph", "whittle", "whittle-noise", "all"])?;
    let mut out = Vec::new();
    if method == "gph" || method == "all" {
        out.push(gph_with(&p, bw, regressor)?);
    }
    if method == "whittle" || method == "all" {
        out.push(local_whittle_gse(&p, bw)?);
    }
    if method == "whittle-noise" || method == "all" {
        out.push(local_whittle_noise(&p, bw)?);
    }
    Ok(out)
}

pub fn cmd_estimate(cfg: &Config, out: &Path) -> HarnessResult<Vec<PathBuf>> {
    let input = cfg.string("input");
    if input.is_empty() {
        return Err(ConfigError::BadValue {
            key: "input".into(),
            message: "an input series CSV is required".into(),
        }
        .into());
    }
    let path = PathBuf::from(&input);
    let text = fs::read_to_string(&path).map_err(io_err(&path))?;
    let reports = estimate_series(cfg, &read_series_csv(&text)?)?;
    Ok(vec![write_output(
        out,
        "estimate.csv",
        "estimate",
        cfg,
        |w| write_reports_csv(w, reports.iter().map(|r| (0, r))),
    )?])
}
