//! Counts of events per clock-time interval from a duration sequence, and
//! the variance-time diagnostic for long-range count dependence.

use std::io::Write;

use crate::error::{Error, Result};
use crate::random::{PositiveStable, RngStream, StableParams, StreamRng};
use crate::stats;
use crate::volatility::{LmsvSampler, LmsvSpec, VolMode};

/// Event counts `ΔN_k = N(origin + kΔt) - N(origin + (k-1)Δt)`, `k = 1..n`.
#[derive(Debug, Clone, PartialEq)]
pub struct CountSeries {
    pub counts: Vec<u64>,
    pub delta_t: f64,
    pub origin: f64,
}

impl CountSeries {
    pub fn len(&self) -> usize {
        self.counts.len()
    }

    pub fn is_empty(&self) -> bool {
        self.counts.is_empty()
    }

    pub fn total(&self) -> u64 {
        self.counts.iter().sum()
    }

    pub fn to_f64(&self) -> Vec<f64> {
        self.counts.iter().map(|&c| c as f64).collect()
    }

    /// Counts over intervals `factor` times wider; a trailing partial block
    /// is dropped.
    pub fn rebin(&self, factor: usize) -> Result<CountSeries> {
        if factor == 0 {
            return Err(Error::param("rebinning factor must be at least 1"));
        }
        Ok(CountSeries {
            counts: self
                .counts
                .chunks_exact(factor)
                .map(|c| c.iter().sum())
                .collect(),
            delta_t: self.delta_t * factor as f64,
            origin: self.origin,
        })
    }

    pub fn write_csv<W: Write>(&self, mut w: W) -> std::io::Result<()> {
        writeln!(w, "# delta_t={:?}", self.delta_t)?;
        writeln!(w, "# origin={:?}", self.origin)?;
        writeln!(w, "interval_index,count")?;
        for (i, c) in self.counts.iter().enumerate() {
            writeln!(w, "{},{}", i + 1, c)?;
        }
        Ok(())
    }

    pub fn read_csv(text: &str) -> Result<CountSeries> {
        let mut delta_t = None;
        let mut origin = 0.0;
        let mut counts = Vec::new();
        let mut seen_header = false;
        for (lineno, line) in text.lines().enumerate() {
            let line = line.trim();
            if line.is_empty() {
                continue;
            }
            if let Some(meta) = line.strip_prefix('#') {
                if let Some((k, v)) = meta.trim().split_once('=') {
                    let parsed = v.trim().parse::<f64>().ok();
                    match k.trim() {
                        "delta_t" => delta_t = parsed,
                        "origin" => origin = parsed.unwrap_or(0.0),
                        _ => {}
                    }
                }
                continue;
            }
            if !seen_header {
                if line != "interval_index,count" {
                    return Err(Error::input("missing interval_index,count header"));
                }
                seen_header = true;
                continue;
            }
            let c = line
                .split_once(',')
                .and_then(|(_, c)| c.trim().parse::<u64>().ok())
                .ok_or_else(|| Error::input(format!("line {}: malformed count row", lineno + 1)))?;
            counts.push(c);
        }
        let delta_t = delta_t.ok_or_else(|| Error::input("count CSV lacks a delta_t header"))?;
        Ok(CountSeries {
            counts,
            delta_t,
            origin,
        })
    }
}

/// Counts events whose times are the cumulative sums of `durations`.
///
/// Interval `k` is `(origin + (k-1)Δt, origin + kΔt]`; events on a boundary
/// go to the earlier interval. Only as many durations as needed are pulled
/// from the iterator.
pub fn durations_to_counts<I>(durations: I, delta_t: f64, n_intervals: usize) -> Result<CountSeries>
where
    I: IntoIterator<Item = f64>,
{
    try_durations_to_counts(durations.into_iter().map(Ok), delta_t, n_intervals)
}

/// As [`durations_to_counts`] for duration sources that can fail.
pub fn try_durations_to_counts<I>(
    durations: I,
    delta_t: f64,
    n_intervals: usize,
) -> Result<CountSeries>
where
    I: IntoIterator<Item = Result<f64>>,
{
    if !(delta_t > 0.0 && delta_t.is_finite()) {
        return Err(Error::param(format!(
            "delta_t must be positive, got {delta_t}"
        )));
    }
    if n_intervals == 0 {
        return Err(Error::param("at least one interval is required"));
    }
    let horizon = delta_t * n_intervals as f64;
    let mut counts = vec![0u64; n_intervals];
    let mut s = 0.0;
    let mut used = 0usize;
    for tau in durations {
        let tau = tau?;
        if !(tau > 0.0 && tau.is_finite()) {
            return Err(Error::input(format!(
                "duration {} is not a positive finite number: {tau}",
                used + 1
            )));
        }
        used += 1;
        s += tau;
        if s > horizon {
            return Ok(CountSeries {
                counts,
                delta_t,
                origin: 0.0,
            });
        }
        let k = ((s / delta_t).ceil() as usize).clamp(1, n_intervals);
        counts[k - 1] += 1;
        if s == horizon {
            return Ok(CountSeries {
                counts,
                delta_t,
                origin: 0.0,
            });
        }
    }
    let more_needed = if used == 0 {
        usize::MAX
    } else {
        ((horizon - s) / (s / used as f64)).ceil() as usize + 1
    };
    Err(Error::Coverage {
        covered: s,
        required: horizon,
        more_needed,
    })
}

/// Endless stream of positive stable durations multiplied by `multiplier`.
#[derive(Debug, Clone)]
pub struct StableDurations {
    sampler: PositiveStable,
    multiplier: f64,
    rng: StreamRng,
}

impl StableDurations {
    pub fn new(params: StableParams, multiplier: f64, stream: RngStream) -> Result<Self> {
        if !(multiplier > 0.0 && multiplier.is_finite()) {
            return Err(Error::param(format!(
                "duration multiplier must be positive, got {multiplier}"
            )));
        }
        Ok(Self {
            sampler: PositiveStable::new(params)?,
            multiplier,
            rng: stream.rng(),
        })
    }

    pub fn acceptance_rate(&self) -> f64 {
        self.sampler.acceptance_rate()
    }
}

impl Iterator for StableDurations {
    type Item = Result<f64>;

    fn next(&mut self) -> Option<Result<f64>> {
        Some(
            self.sampler
                .draw(&mut self.rng)
                .map(|x| x * self.multiplier),
        )
    }
}

/// Duration models used for the count experiments.
#[derive(Debug, Clone)]
pub enum DurationModel {
    /// Positive stable durations times `multiplier`.
    Stable {
        params: StableParams,
        multiplier: f64,
    },
    /// LMSD durations times `multiplier`.
    Lmsd { spec: LmsvSpec, multiplier: f64 },
    /// I.i.d. exponential durations.
    Exponential { mean: f64 },
}

/// Prepared count simulator; LMSD models keep their latent embedding so
/// replications do not rebuild it.
#[derive(Debug, Clone)]
pub struct CountSimulator {
    model: DurationModel,
    delta_t: f64,
    n_intervals: usize,
    lmsd: Option<(usize, LmsvSampler)>,
}

/// Pilot length used to size LMSD duration paths.
const LMSD_PILOT: usize = 1 << 15;

impl CountSimulator {
    pub fn new(model: DurationModel, delta_t: f64, n_intervals: usize) -> Result<Self> {
        if !(delta_t > 0.0) || n_intervals == 0 {
            return Err(Error::param("delta_t must be positive and n at least 1"));
        }
        let lmsd = match &model {
            DurationModel::Stable { params, multiplier } => {
                StableDurations::new(*params, *multiplier, RngStream::new(0, 0))?;
                None
            }
            DurationModel::Exponential { mean } => {
                if !(*mean > 0.0) {
                    return Err(Error::param("exponential mean must be positive"));
                }
                None
            }
            DurationModel::Lmsd { spec, multiplier } => {
                if spec.mode != VolMode::Lmsd {
                    return Err(Error::param("duration model needs an LMSD specification"));
                }
                if !(*multiplier > 0.0) {
                    return Err(Error::param("duration multiplier must be positive"));
                }
                let pilot =
                    LmsvSampler::new(spec, LMSD_PILOT)?.sample(RngStream::new(0x5eed, 0))?;
                let mean = stats::mean(&pilot.x.values) * multiplier;
                let horizon = delta_t * n_intervals as f64;
                let size = ((1.3 * horizon / mean).ceil() as usize).max(1024) + 1024;
                Some((size, LmsvSampler::new(spec, size)?))
            }
        };
        Ok(Self {
            model,
            delta_t,
            n_intervals,
            lmsd,
        })
    }

    pub fn model(&self) -> &DurationModel {
        &self.model
    }

    /// Number of LMSD durations generated per replication, if applicable.
    pub fn lmsd_path_len(&self) -> Option<usize> {
        self.lmsd.as_ref().map(|(n, _)| *n)
    }

    pub fn simulate(&self, stream: RngStream) -> Result<CountSeries> {
        let (dt, n) = (self.delta_t, self.n_intervals);
        match &self.model {
            DurationModel::Stable { params, multiplier } => {
                let src = StableDurations::new(*params, *multiplier, stream)?;
                try_durations_to_counts(src, dt, n)
            }
            DurationModel::Exponential { mean } => {
                let mut rng = stream.rng();
                let mean = *mean;
                let src = std::iter::repeat_with(move || {
                    mean * crate::random::standard_exponential(&mut rng)
                });
                durations_to_counts(src, dt, n)
            }
            DurationModel::Lmsd { spec, multiplier } => {
                let (size, sampler) = self.lmsd.as_ref().expect("prepared in new");
                let c = *multiplier;
                let path = sampler.sample(stream)?;
                match durations_to_counts(path.x.values.iter().map(|x| x * c), dt, n) {
                    Err(Error::Coverage { more_needed, .. }) => {
                        // Rare long excursion of the latent log-duration:
                        // regenerate a longer path from the same stream.
                        let bigger = size + more_needed.saturating_mul(2).max(*size / 2);
                        let path = LmsvSampler::new(spec, bigger)?.sample(stream)?;
                        durations_to_counts(path.x.values.iter().map(|x| x * c), dt, n)
                    }
                    other => other,
                }
            }
        }
    }
}

/// Variance of aggregated counts against block size, with the fitted Hurst
/// exponent (half the log-log slope).
#[derive(Debug, Clone, PartialEq)]
pub struct VarianceTime {
    pub block_sizes: Vec<usize>,
    pub variances: Vec<f64>,
    pub hurst: f64,
}

impl VarianceTime {
    pub fn write_csv<W: Write>(&self, mut w: W) -> std::io::Result<()> {
        writeln!(w, "# hurst={:?}", self.hurst)?;
        writeln!(w, "block_size,variance")?;
        for (m, v) in self.block_sizes.iter().zip(&self.variances) {
            writeln!(w, "{m},{v:?}")?;
        }
        Ok(())
    }
}

/// Twelve roughly log-spaced block sizes from 10 to `n / 100`, or to
/// `n / 10` when the series is too short for the former.
pub fn default_block_sizes(n: usize) -> Vec<usize> {
    let hi = if n / 100 >= 40 { n / 100 } else { n / 10 };
    block_sizes_between(10, hi, 12)
}

/// Up to `count` log-spaced block sizes in `[lo, hi]`, deduplicated.
pub fn block_sizes_between(lo: usize, hi: usize, count: usize) -> Vec<usize> {
    if lo == 0 || hi < lo || count < 2 {
        return Vec::new();
    }
    let mut out: Vec<usize> = (0..count)
        .map(|i| {
            (lo as f64 * (hi as f64 / lo as f64).powf(i as f64 / (count - 1) as f64)).round()
                as usize
        })
        .collect();
    out.dedup();
    out
}

/// Variance of sums over non-overlapping blocks of each size.
pub fn variance_time_curve(counts: &[f64], block_sizes: &[usize]) -> Result<VarianceTime> {
    let n = counts.len();
    if block_sizes.len() < 3 {
        return Err(Error::param("at least 3 block sizes are required"));
    }
    if let Some(&m) = block_sizes.iter().find(|&&m| m == 0 || m > n / 10) {
        return Err(Error::param(format!(
            "block size {m} must lie in [1, n/10] with n = {n}"
        )));
    }
    let first = counts[0];
    if counts.iter().all(|&c| c == first) {
        return Err(Error::Degenerate("counts are constant".into()));
    }
    let variances: Vec<f64> = block_sizes
        .iter()
        .map(|&m| {
            let sums: Vec<f64> = counts.chunks_exact(m).map(|c| c.iter().sum()).collect();
            stats::variance(&sums)
        })
        .collect();
    if variances.iter().any(|&v| !(v > 0.0)) {
        return Err(Error::Degenerate(
            "aggregated counts have zero variance at some block size".into(),
        ));
    }
    let lx: Vec<f64> = block_sizes.iter().map(|&m| (m as f64).ln()).collect();
    let ly: Vec<f64> = variances.iter().map(|v| v.ln()).collect();
    let (_, slope) = stats::ols(&lx, &ly);
    Ok(VarianceTime {
        block_sizes: block_sizes.to_vec(),
        variances,
        hurst: slope / 2.0,
    })
}
