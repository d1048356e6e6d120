//! Discrete Fourier transform, periodogram and averaged log-log periodograms.

use std::cell::RefCell;
use std::f64::consts::PI;
use std::io::Write;
use std::sync::Arc;

use num_complex::Complex64;
use rayon::prelude::*;
use rustfft::{Fft, FftPlanner};

use crate::error::{Error, Result};
use crate::stats;

thread_local! {
    static PLANNER: RefCell<FftPlanner<f64>> = RefCell::new(FftPlanner::new());
}

fn inverse_plan(n: usize) -> Arc<dyn Fft<f64>> {
    PLANNER.with(|p| p.borrow_mut().plan_fft_inverse(n))
}

fn check_input(values: &[f64]) -> Result<()> {
    if values.len() < 4 {
        return Err(Error::input(format!(
            "periodogram needs at least 4 observations, got {}",
            values.len()
        )));
    }
    if let Some(i) = values.iter().position(|v| !v.is_finite()) {
        return Err(Error::input(format!("observation {} is not finite", i + 1)));
    }
    Ok(())
}

/// `J_j = (2πn)^{-1/2} sum_{t=1}^n U_t e^{i t ω_j}` for `j = 0..n`.
pub fn dft(values: &[f64], center: bool) -> Result<Vec<Complex64>> {
    check_input(values)?;
    let n = values.len();
    let m = if center { stats::mean(values) } else { 0.0 };
    let mut buf: Vec<Complex64> = values.iter().map(|&v| Complex64::new(v - m, 0.0)).collect();
    inverse_plan(n).process(&mut buf);
    let norm = (2.0 * PI * n as f64).powf(-0.5);
    for (j, z) in buf.iter_mut().enumerate() {
        let w = 2.0 * PI * j as f64 / n as f64;
        *z *= Complex64::from_polar(norm, w);
    }
    Ok(buf)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct PeriodogramOptions {
    pub center: bool,
}

impl Default for PeriodogramOptions {
    fn default() -> Self {
        Self { center: true }
    }
}

/// Periodogram ordinates `I(ω_j) = |J_j|²` at `ω_j = 2πj/n`,
/// `j = 1..⌊(n-1)/2⌋`, with the Nyquist ordinate kept apart for even `n`.
#[derive(Debug, Clone, PartialEq)]
pub struct PeriodogramSet {
    pub n: usize,
    pub frequencies: Vec<f64>,
    pub ordinates: Vec<f64>,
    pub nyquist: Option<f64>,
    pub centered: bool,
}

impl PeriodogramSet {
    pub fn len(&self) -> usize {
        self.ordinates.len()
    }

    pub fn is_empty(&self) -> bool {
        self.ordinates.is_empty()
    }

    /// `(2π/n)` times the ordinate sum over `j = 1..n-1`, which equals the
    /// divide-by-n sample variance when the series was centered.
    pub fn parseval_sum(&self) -> f64 {
        let s: f64 = 2.0 * self.ordinates.iter().sum::<f64>() + self.nyquist.unwrap_or(0.0);
        2.0 * PI / self.n as f64 * s
    }

    /// Build from precomputed ordinates at `j = 1..=len`.
    pub fn from_ordinates(n: usize, ordinates: Vec<f64>) -> Result<Self> {
        if ordinates.len() > (n.saturating_sub(1)) / 2 {
            return Err(Error::input("more ordinates than Fourier frequencies"));
        }
        Ok(Self {
            n,
            frequencies: (1..=ordinates.len())
                .map(|j| 2.0 * PI * j as f64 / n as f64)
                .collect(),
            ordinates,
            nyquist: None,
            centered: false,
        })
    }
}

pub fn periodogram(values: &[f64]) -> Result<PeriodogramSet> {
    periodogram_with(values, PeriodogramOptions::default())
}

pub fn periodogram_with(values: &[f64], opts: PeriodogramOptions) -> Result<PeriodogramSet> {
    let n = values.len();
    let j = dft(values, opts.center)?;
    let half = (n - 1) / 2;
    Ok(PeriodogramSet {
        n,
        frequencies: (1..=half).map(|k| 2.0 * PI * k as f64 / n as f64).collect(),
        ordinates: j[1..=half].iter().map(|z| z.norm_sqr()).collect(),
        nyquist: n.is_multiple_of(2).then(|| j[n / 2].norm_sqr()),
        centered: opts.center,
    })
}

/// `ω_j^d J_j`, the normalized DFT at Fourier frequency `j`.
pub fn normalized_dft_statistic(
    values: &[f64],
    j: usize,
    d: f64,
    center: bool,
) -> Result<Complex64> {
    let n = values.len();
    if j == 0 || 2 * j >= n {
        return Err(Error::input(format!(
            "frequency index {j} must satisfy 1 <= j < n/2 with n = {n}"
        )));
    }
    let z = dft(values, center)?[j];
    let w = 2.0 * PI * j as f64 / n as f64;
    Ok(z * w.powf(d))
}

/// Per-frequency average of `log10 I(ω_j)` over replications,
/// `j = 1..⌊n/2⌋`.
#[derive(Debug, Clone, PartialEq)]
pub struct LogLogAverage {
    pub n: usize,
    pub log10_frequency: Vec<f64>,
    pub mean_log10_ordinate: Vec<f64>,
    pub reps_used: Vec<usize>,
    /// Zero ordinates left out of the averages.
    pub excluded: usize,
}

impl LogLogAverage {
    /// OLS slope and R² of the averaged curve over `j ∈ [lo, hi]`
    /// (1-based, inclusive).
    pub fn fit(&self, lo: usize, hi: usize) -> Result<(f64, f64)> {
        let hi = hi.min(self.log10_frequency.len());
        if lo < 1 || hi < lo + 1 {
            return Err(Error::input(format!("invalid frequency range {lo}..={hi}")));
        }
        let idx: Vec<usize> = (lo - 1..hi).filter(|&i| self.reps_used[i] > 0).collect();
        let x: Vec<f64> = idx.iter().map(|&i| self.log10_frequency[i]).collect();
        let y: Vec<f64> = idx.iter().map(|&i| self.mean_log10_ordinate[i]).collect();
        if x.len() < 2 {
            return Err(Error::input("fewer than two usable frequencies"));
        }
        let (_, b) = stats::ols(&x, &y);
        Ok((b, stats::r_squared(&x, &y)))
    }

    /// The curve averaged within log-spaced frequency bins over
    /// `j ∈ [lo, hi]`, so that each decade carries equal weight.
    pub fn log_binned(
        &self,
        lo: usize,
        hi: usize,
        bins_per_decade: usize,
    ) -> Result<(Vec<f64>, Vec<f64>)> {
        let hi = hi.min(self.log10_frequency.len());
        if lo < 1 || hi <= lo || bins_per_decade == 0 {
            return Err(Error::input(format!("invalid frequency range {lo}..={hi}")));
        }
        let width = 1.0 / bins_per_decade as f64;
        let base = (lo as f64).log10();
        let (mut xs, mut ys) = (Vec::new(), Vec::new());
        let mut current: Option<usize> = None;
        let (mut sx, mut sy, mut c) = (0.0, 0.0, 0usize);
        for j in lo..=hi {
            let i = j - 1;
            if self.reps_used[i] == 0 {
                continue;
            }
            let bin = (((j as f64).log10() - base) / width).floor() as usize;
            if current != Some(bin) && c > 0 {
                xs.push(sx / c as f64);
                ys.push(sy / c as f64);
                (sx, sy, c) = (0.0, 0.0, 0);
            }
            current = Some(bin);
            sx += self.log10_frequency[i];
            sy += self.mean_log10_ordinate[i];
            c += 1;
        }
        if c > 0 {
            xs.push(sx / c as f64);
            ys.push(sy / c as f64);
        }
        Ok((xs, ys))
    }

    /// OLS slope and R² of the log-binned curve.
    pub fn fit_log_binned(
        &self,
        lo: usize,
        hi: usize,
        bins_per_decade: usize,
    ) -> Result<(f64, f64)> {
        let (x, y) = self.log_binned(lo, hi, bins_per_decade)?;
        if x.len() < 3 {
            return Err(Error::input("fewer than three frequency bins"));
        }
        let (_, b) = stats::ols(&x, &y);
        Ok((b, stats::r_squared(&x, &y)))
    }

    pub fn write_csv<W: Write>(&self, mut w: W) -> std::io::Result<()> {
        writeln!(w, "# log_base=10")?;
        writeln!(w, "# n={}", self.n)?;
        writeln!(w, "# excluded_zero_ordinates={}", self.excluded)?;
        writeln!(w, "log10_frequency,mean_log10_ordinate,reps_used")?;
        for i in 0..self.log10_frequency.len() {
            writeln!(
                w,
                "{:?},{:?},{}",
                self.log10_frequency[i], self.mean_log10_ordinate[i], self.reps_used[i]
            )?;
        }
        Ok(())
    }
}

/// Averages log-periodograms of `reps` series produced by `generate(rep)`.
/// Replications run in parallel and are merged in index order.
pub fn averaged_loglog_periodogram<F>(generate: F, n: usize, reps: usize) -> Result<LogLogAverage>
where
    F: Fn(usize) -> Result<Vec<f64>> + Sync,
{
    if reps < 2 {
        return Err(Error::param("averaging needs at least 2 replications"));
    }
    let per_rep: Vec<Vec<f64>> = (0..reps)
        .into_par_iter()
        .map(|r| {
            let x = generate(r).map_err(|e| Error::Replication {
                rep: r,
                source: Box::new(e),
            })?;
            if x.len() != n {
                return Err(Error::input(format!(
                    "replication {r} produced {} values, expected {n}",
                    x.len()
                )));
            }
            let p = periodogram(&x)?;
            let mut ords = p.ordinates;
            ords.extend(p.nyquist);
            Ok(ords)
        })
        .collect::<Result<_>>()?;
    let k = n / 2;
    let mut sums = vec![0.0; k];
    let mut used = vec![0usize; k];
    let mut excluded = 0;
    for ords in &per_rep {
        for (i, &v) in ords.iter().enumerate() {
            if v > 0.0 {
                sums[i] += v.log10();
                used[i] += 1;
            } else {
                excluded += 1;
            }
        }
    }
    Ok(LogLogAverage {
        n,
        log10_frequency: (1..=k)
            .map(|j| (2.0 * PI * j as f64 / n as f64).log10())
            .collect(),
        mean_log10_ordinate: sums
            .iter()
            .zip(&used)
            .map(|(s, &u)| if u > 0 { s / u as f64 } else { f64::NAN })
            .collect(),
        reps_used: used,
        excluded,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::random::{standard_normal, RngStream};

    fn direct(values: &[f64], j: usize) -> f64 {
        let n = values.len();
        let w = 2.0 * PI * j as f64 / n as f64;
        let (mut re, mut im) = (0.0, 0.0);
        for (t, v) in values.iter().enumerate() {
            let a = w * (t + 1) as f64;
            re += v * a.cos();
            im += v * a.sin();
        }
        (re * re + im * im) / (2.0 * PI * n as f64)
    }

    #[test]
    fn matches_direct_sum_uncentered() {
        let mut rng = RngStream::new(1, 0).rng();
        for n in [4usize, 7, 64, 129, 500, 512] {
            let x: Vec<f64> = (0..n).map(|_| standard_normal(&mut rng) + 3.0).collect();
            let p = periodogram_with(&x, PeriodogramOptions { center: false }).unwrap();
            for (i, &v) in p.ordinates.iter().enumerate() {
                let o = direct(&x, i + 1);
                assert!(
                    (v - o).abs() <= 1e-10 * o.max(1e-300) + 1e-14,
                    "n={n} j={}",
                    i + 1
                );
            }
        }
    }

    #[test]
    fn constant_series_is_zero() {
        let p = periodogram(&[2.5; 64]).unwrap();
        assert!(p.ordinates.iter().all(|&v| v < 1e-28));
    }

    #[test]
    fn short_input_rejected() {
        assert!(matches!(
            periodogram(&[1.0, 2.0, 3.0]),
            Err(Error::Input(_))
        ));
    }

    #[test]
    fn cosine_concentrates() {
        let n = 256;
        let k = 10;
        let x: Vec<f64> = (1..=n)
            .map(|t| (2.0 * PI * k as f64 * t as f64 / n as f64).cos())
            .collect();
        let p = periodogram(&x).unwrap();
        let target = n as f64 / (8.0 * PI);
        assert!((p.ordinates[k - 1] - target).abs() < 1e-9 * target);
        let rest: f64 = p
            .ordinates
            .iter()
            .enumerate()
            .filter(|(i, _)| *i != k - 1)
            .map(|(_, v)| v)
            .sum();
        assert!(rest < 1e-12);
    }

    #[test]
    fn parseval() {
        let mut rng = RngStream::new(2, 0).rng();
        for n in [5usize, 64, 1001, 1 << 16] {
            let x: Vec<f64> = (0..n).map(|_| standard_normal(&mut rng)).collect();
            let p = periodogram(&x).unwrap();
            let v = stats::variance(&x) * (n - 1) as f64 / n as f64;
            assert!((p.parseval_sum() - v).abs() < 1e-10 * v, "n={n}");
        }
    }

    #[test]
    fn white_noise_level() {
        let mut rng = RngStream::new(3, 0).rng();
        let x: Vec<f64> = (0..4096).map(|_| standard_normal(&mut rng)).collect();
        let p = periodogram(&x).unwrap();
        let m = stats::mean(&p.ordinates);
        // Each ordinate is exponential with mean 1/(2π); se ~ mean / sqrt(2047).
        assert!((m - 1.0 / (2.0 * PI)).abs() < 4.0 / (2.0 * PI) / 2047f64.sqrt());
    }

    #[test]
    fn normalized_dft_range_and_d0() {
        let x: Vec<f64> = (0..32).map(|i| (i as f64 * 0.7).sin()).collect();
        assert!(normalized_dft_statistic(&x, 0, 0.2, true).is_err());
        assert!(normalized_dft_statistic(&x, 16, 0.2, true).is_err());
        let z = normalized_dft_statistic(&x, 3, 0.0, false).unwrap();
        assert!((z.norm_sqr() - direct(&x, 3)).abs() < 1e-12);
    }

    #[test]
    fn averaged_white_noise_is_flat() {
        let n = 2048;
        let avg = averaged_loglog_periodogram(
            |r| {
                let mut rng = RngStream::new(4, r as u64).rng();
                Ok((0..n).map(|_| standard_normal(&mut rng)).collect())
            },
            n,
            50,
        )
        .unwrap();
        assert_eq!(avg.log10_frequency.len(), n / 2);
        let (slope, _) = avg.fit(1, n / 2).unwrap();
        assert!(slope.abs() < 0.02, "{slope}");
        assert_eq!(avg.excluded, 0);
    }

    #[test]
    fn log_binned_power_law_is_exact() {
        let n = 4096;
        let k = n / 2;
        let lf: Vec<f64> = (1..=k)
            .map(|j| (2.0 * PI * j as f64 / n as f64).log10())
            .collect();
        let avg = LogLogAverage {
            n,
            mean_log10_ordinate: lf.iter().map(|x| 0.3 - 0.6 * x).collect(),
            log10_frequency: lf,
            reps_used: vec![5; k],
            excluded: 0,
        };
        let (x, _) = avg.log_binned(1, k, 10).unwrap();
        assert!(x.len() > 20 && x.len() < 40);
        assert!(x.windows(2).all(|w| w[1] > w[0]));
        let (b, r2) = avg.fit_log_binned(1, k, 10).unwrap();
        assert!((b + 0.6).abs() < 1e-12 && (r2 - 1.0).abs() < 1e-12);
        assert!(avg.log_binned(5, 5, 10).is_err());
    }

    #[test]
    fn zero_ordinates_are_counted() {
        let n = 8;
        let avg = averaged_loglog_periodogram(|_| Ok(vec![1.0; 8]), n, 3).unwrap();
        assert_eq!(avg.excluded, 3 * 4);
        assert!(avg.reps_used.iter().all(|&u| u == 0));
    }
}
