//! Semiparametric estimators of the memory parameter `d`.

use std::fmt;
use std::io::Write;

use crate::error::{Error, Result};
use crate::shotnoise::StepFunction;
use crate::spectral::PeriodogramSet;
use crate::stats;

/// Lower end of the local Whittle search interval.
pub const WHITTLE_D_MIN: f64 = -0.49;
/// Upper end of the local Whittle search interval.
pub const WHITTLE_D_MAX: f64 = 0.99;
const NOISE_GRID: usize = 64;

/// Frequencies `j = trim+1..=m` used by an estimator.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct BandwidthSpec {
    pub m: usize,
    pub trim: usize,
}

impl BandwidthSpec {
    pub fn new(m: usize, trim: usize) -> Self {
        Self { m, trim }
    }

    /// `m = round(n^exponent)`, no trimming.
    pub fn from_exponent(n: usize, exponent: f64) -> Self {
        Self {
            m: (n as f64).powf(exponent).round() as usize,
            trim: 0,
        }
    }

    pub fn validate(&self, pgram: &PeriodogramSet) -> Result<()> {
        if self.trim + 1 > self.m || 2 * self.m >= pgram.n || self.m > pgram.len() {
            return Err(Error::param(format!(
                "bandwidth m={} trim={} invalid for n={} ({} ordinates available)",
                self.m,
                self.trim,
                pgram.n,
                pgram.len()
            )));
        }
        Ok(())
    }

    fn used(&self) -> usize {
        self.m - self.trim
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum EstimatorKind {
    Gph,
    LocalWhittle,
    LocalWhittleNoise,
    Wavelet,
    WaveletRegression,
}

impl EstimatorKind {
    pub fn name(&self) -> &'static str {
        match self {
            EstimatorKind::Gph => "gph",
            EstimatorKind::LocalWhittle => "local_whittle",
            EstimatorKind::LocalWhittleNoise => "local_whittle_noise",
            EstimatorKind::Wavelet => "wavelet",
            EstimatorKind::WaveletRegression => "wavelet_regression",
        }
    }
}

impl fmt::Display for EstimatorKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

#[derive(Debug, Clone, PartialEq)]
pub enum EstimateWarning {
    /// The minimizer sits on the edge of the search interval.
    Boundary,
    /// The noise ratio was pinned at zero.
    NoisePinned,
}

/// One estimate of `d`.
#[derive(Debug, Clone, PartialEq)]
pub struct EstimateReport {
    pub estimator: EstimatorKind,
    pub d_hat: f64,
    pub n: usize,
    pub m: usize,
    pub trim: usize,
    /// Noise-to-signal ratio for the noise-corrected local Whittle.
    pub aux: Option<f64>,
    pub warnings: Vec<EstimateWarning>,
}

impl EstimateReport {
    pub fn has_warning(&self, w: &EstimateWarning) -> bool {
        self.warnings.contains(w)
    }
}

/// GPH regressor choice.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum GphRegressor {
    /// `-2 log ω_j`.
    #[default]
    LogFrequency,
    /// `-log(4 sin²(ω_j / 2))`.
    Sine,
}

pub fn gph(pgram: &PeriodogramSet, bw: BandwidthSpec) -> Result<EstimateReport> {
    gph_with(pgram, bw, GphRegressor::LogFrequency)
}

/// Least-squares slope of `log I(ω_j)` on the chosen regressor.
pub fn gph_with(
    pgram: &PeriodogramSet,
    bw: BandwidthSpec,
    regressor: GphRegressor,
) -> Result<EstimateReport> {
    bw.validate(pgram)?;
    let mut x = Vec::with_capacity(bw.used());
    let mut y = Vec::with_capacity(bw.used());
    for j in bw.trim + 1..=bw.m {
        let v = pgram.ordinates[j - 1];
        if !(v > 0.0) {
            return Err(Error::Estimation(format!(
                "periodogram ordinate at j={j} is zero; its logarithm is undefined"
            )));
        }
        let w = pgram.frequencies[j - 1];
        x.push(match regressor {
            GphRegressor::LogFrequency => -2.0 * w.ln(),
            GphRegressor::Sine => -(4.0 * (w / 2.0).sin().powi(2)).ln(),
        });
        y.push(v.ln());
    }
    let (_, slope) = stats::ols(&x, &y);
    Ok(EstimateReport {
        estimator: EstimatorKind::Gph,
        d_hat: slope,
        n: pgram.n,
        m: bw.m,
        trim: bw.trim,
        aux: None,
        warnings: Vec::new(),
    })
}

fn golden_section<F: Fn(f64) -> f64>(f: F, mut a: f64, mut b: f64, tol: f64) -> f64 {
    let r = (5f64.sqrt() - 1.0) / 2.0;
    let mut c = b - r * (b - a);
    let mut d = a + r * (b - a);
    let (mut fc, mut fd) = (f(c), f(d));
    while (b - a).abs() > tol {
        if fc < fd {
            b = d;
            d = c;
            fd = fc;
            c = b - r * (b - a);
            fc = f(c);
        } else {
            a = c;
            c = d;
            fc = fd;
            d = a + r * (b - a);
            fd = f(d);
        }
    }
    0.5 * (a + b)
}

/// Grid search refined by golden section. Returns the minimizer and whether
/// it lies at an end of `[lo, hi]`.
fn grid_golden<F: Fn(f64) -> f64>(f: F, lo: f64, hi: f64, points: usize, tol: f64) -> (f64, bool) {
    let step = (hi - lo) / (points - 1) as f64;
    let (mut best, mut best_v) = (0, f64::INFINITY);
    for i in 0..points {
        let v = f(lo + step * i as f64);
        if v < best_v {
            best = i;
            best_v = v;
        }
    }
    let a = lo + step * best.saturating_sub(1) as f64;
    let b = (lo + step * (best + 1) as f64).min(hi);
    let x = golden_section(&f, a, b, tol);
    let at_edge = (x - lo).abs() < 10.0 * tol || (hi - x).abs() < 10.0 * tol;
    (x, at_edge)
}

struct Band {
    log_w: Vec<f64>,
    ords: Vec<f64>,
    mean_log_w: f64,
}

fn band(pgram: &PeriodogramSet, bw: BandwidthSpec) -> Result<Band> {
    bw.validate(pgram)?;
    let r = bw.trim..bw.m;
    let log_w: Vec<f64> = pgram.frequencies[r.clone()]
        .iter()
        .map(|w| w.ln())
        .collect();
    let ords = pgram.ordinates[r].to_vec();
    if ords.iter().all(|&v| v == 0.0) {
        return Err(Error::Estimation(
            "all periodogram ordinates in the band are zero".into(),
        ));
    }
    let mean_log_w = stats::mean(&log_w);
    Ok(Band {
        log_w,
        ords,
        mean_log_w,
    })
}

/// Derivative of the profiled local Whittle objective
/// `R(d) = log((1/m) sum ω_j^{2d} I_j) - 2d mean(log ω_j)`, which is convex.
fn whittle_slope(b: &Band, d: f64) -> f64 {
    let top = b.log_w.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
    let (mut num, mut den) = (0.0, 0.0);
    for (lw, i) in b.log_w.iter().zip(&b.ords) {
        let w = (2.0 * d * (lw - top)).exp() * i;
        num += w * lw;
        den += w;
    }
    2.0 * (num / den - b.mean_log_w)
}

/// Local Whittle (Gaussian semiparametric) estimator over `[-0.49, 0.99]`.
pub fn local_whittle_gse(pgram: &PeriodogramSet, bw: BandwidthSpec) -> Result<EstimateReport> {
    let b = band(pgram, bw)?;
    let (d, edge) = whittle_root(&b);
    Ok(EstimateReport {
        estimator: EstimatorKind::LocalWhittle,
        d_hat: d,
        n: pgram.n,
        m: bw.m,
        trim: bw.trim,
        aux: None,
        warnings: if edge {
            vec![EstimateWarning::Boundary]
        } else {
            Vec::new()
        },
    })
}

/// Bisection on the monotone derivative.
fn whittle_root(b: &Band) -> (f64, bool) {
    let (mut lo, mut hi) = (WHITTLE_D_MIN, WHITTLE_D_MAX);
    if whittle_slope(b, lo) >= 0.0 {
        return (lo, true);
    }
    if whittle_slope(b, hi) <= 0.0 {
        return (hi, true);
    }
    for _ in 0..200 {
        let mid = 0.5 * (lo + hi);
        if mid <= lo || mid >= hi {
            break;
        }
        if whittle_slope(b, mid) > 0.0 {
            hi = mid;
        } else {
            lo = mid;
        }
    }
    (0.5 * (lo + hi), false)
}

/// Criterion with spectral shape `g_j = ω_j^{-2d} + β`.
fn noise_objective(b: &Band, d: f64, beta: f64) -> f64 {
    let m = b.ords.len() as f64;
    let mut s = 0.0;
    let mut l = 0.0;
    for (lw, i) in b.log_w.iter().zip(&b.ords) {
        let g = (-2.0 * d * lw).exp() + beta;
        s += i / g;
        l += g.ln();
    }
    (s / m).ln() + l / m
}

/// Best `β >= 0` for fixed `d`: a log grid scaled to the mean of
/// `ω^{-2d}`, then golden section in log β. Returns `(β, value)`.
fn profile_beta(b: &Band, d: f64) -> (f64, f64) {
    let scale = stats::mean(
        &b.log_w
            .iter()
            .map(|lw| (-2.0 * d * lw).exp())
            .collect::<Vec<_>>(),
    );
    let lo = (scale * 1e-4).ln();
    let hi = (scale * 1e4).ln();
    let step = (hi - lo) / (NOISE_GRID - 1) as f64;
    let mut best = (0usize, f64::INFINITY);
    for k in 0..NOISE_GRID {
        let v = noise_objective(b, d, (lo + step * k as f64).exp());
        if v < best.1 {
            best = (k, v);
        }
    }
    let zero = noise_objective(b, d, 0.0);
    if best.0 == 0 && zero <= best.1 {
        return (0.0, zero);
    }
    let a = lo + step * best.0.saturating_sub(1) as f64;
    let c = (lo + step * (best.0 + 1) as f64).min(hi);
    let lb = golden_section(|x| noise_objective(b, d, x.exp()), a, c, 1e-8);
    let v = noise_objective(b, d, lb.exp());
    if zero <= v {
        (0.0, zero)
    } else {
        (lb.exp(), v)
    }
}

/// Local Whittle estimator with an additive flat noise term; `aux` holds the
/// fitted noise-to-signal ratio β.
pub fn local_whittle_noise(pgram: &PeriodogramSet, bw: BandwidthSpec) -> Result<EstimateReport> {
    let b = band(pgram, bw)?;
    let (d, edge) = grid_golden(
        |d| profile_beta(&b, d).1,
        WHITTLE_D_MIN,
        WHITTLE_D_MAX,
        60,
        1e-6,
    );
    let (mut d, mut edge) = (d, edge);
    let (mut beta, value) = profile_beta(&b, d);
    // The pure-signal optimum is a candidate of the joint problem and is
    // located far more precisely than the flat profile allows.
    let (d0, edge0) = whittle_root(&b);
    if noise_objective(&b, d0, 0.0) <= value {
        d = d0;
        edge = edge0;
        beta = 0.0;
    }
    let mut warnings = Vec::new();
    if edge {
        warnings.push(EstimateWarning::Boundary);
    }
    if beta == 0.0 {
        warnings.push(EstimateWarning::NoisePinned);
    }
    Ok(EstimateReport {
        estimator: EstimatorKind::LocalWhittleNoise,
        d_hat: d,
        n: pgram.n,
        m: bw.m,
        trim: bw.trim,
        aux: Some(beta),
        warnings,
    })
}

/// Rate condition on the bandwidth of the noise-corrected local Whittle
/// estimator, evaluated through the exponent `θ = log m / log n`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct BandwidthCheck {
    pub exponent: f64,
    /// Smallest admissible exponent, `4d / (4d + 1 - δ)`.
    pub lower_bound: f64,
    /// Exponent must stay below 4/5.
    pub upper_bound: f64,
    pub lower_ok: bool,
    pub upper_ok: bool,
    /// `m^{-4d-1+δ} n^{4d} + n^{-4} m^5 log²(m)` at the given `n, m`.
    pub rate_term: f64,
}

impl BandwidthCheck {
    pub fn ok(&self) -> bool {
        self.lower_ok && self.upper_ok
    }
}

pub fn noise_bandwidth_check(n: usize, m: usize, d: f64, delta: f64) -> Result<BandwidthCheck> {
    if n < 2 || m < 2 || !(d > 0.0 && d < 0.5) || !(delta > 0.0 && delta < 1.0) {
        return Err(Error::param(
            "bandwidth check needs n, m >= 2, d in (0, 1/2) and delta in (0, 1)",
        ));
    }
    let (nf, mf) = (n as f64, m as f64);
    let exponent = mf.ln() / nf.ln();
    let lower_bound = 4.0 * d / (4.0 * d + 1.0 - delta);
    let upper_bound = 0.8;
    let rate_term = mf.powf(-4.0 * d - 1.0 + delta) * nf.powf(4.0 * d)
        + nf.powi(-4) * mf.powi(5) * mf.ln().powi(2);
    Ok(BandwidthCheck {
        exponent,
        lower_bound,
        upper_bound,
        lower_ok: exponent > lower_bound,
        upper_ok: exponent < upper_bound,
        rate_term,
    })
}

/// Haar coefficients at one scale.
#[derive(Debug, Clone, PartialEq)]
pub struct ScaleCoefficients {
    pub j: i32,
    pub coeffs: Vec<f64>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct WaveletCoefficients {
    pub scales: Vec<ScaleCoefficients>,
    /// Requested `(j, k)` pairs whose support left the observation window.
    pub excluded: usize,
}

impl WaveletCoefficients {
    /// Count-weighted mean scale index over the admissible set.
    pub fn mean_scale(&self) -> f64 {
        let (mut s, mut c) = (0.0, 0usize);
        for sc in &self.scales {
            s += sc.j as f64 * sc.coeffs.len() as f64;
            c += sc.coeffs.len();
        }
        s / c as f64
    }
}

/// Exact Haar coefficients `w_{j,k} = ∫ ψ_{j,k}(s) X_s ds` with
/// `ψ_{j,k}(s) = 2^{-j/2} ψ(2^{-j} s - k)` and `ψ = 1_{[0,1/2)} - 1_{[1/2,1)}`.
///
/// For each scale all translates with support inside `[0, horizon]` are used,
/// up to `max_translates` if given; requests beyond the window are counted in
/// `excluded`.
pub fn wavelet_coefficients(
    path: &StepFunction,
    scales: std::ops::RangeInclusive<i32>,
    max_translates: Option<usize>,
) -> Result<WaveletCoefficients> {
    let horizon = path.horizon();
    let mut out = Vec::new();
    let mut excluded = 0;
    for j in scales {
        let width = 2f64.powi(j);
        let fit = (horizon / width).floor() as usize;
        let k_max = match max_translates {
            Some(req) => {
                excluded += req.saturating_sub(fit);
                req.min(fit)
            }
            None => fit,
        };
        if k_max == 0 {
            continue;
        }
        let norm = 2f64.powf(-(j as f64) / 2.0);
        let coeffs = (0..k_max)
            .map(|k| {
                let a = width * k as f64;
                let mid = a + width / 2.0;
                let b = a + width;
                norm * (path.integral(a, mid) - path.integral(mid, b))
            })
            .collect();
        out.push(ScaleCoefficients { j, coeffs });
    }
    if out.is_empty() {
        return Err(Error::input(
            "no wavelet support fits inside the observation window",
        ));
    }
    Ok(WaveletCoefficients {
        scales: out,
        excluded,
    })
}

/// Wavelet estimates: contrast minimizer and regression cross-check.
#[derive(Debug, Clone, PartialEq)]
pub struct WaveletEstimate {
    pub contrast: EstimateReport,
    pub regression: EstimateReport,
    pub delta: f64,
}

/// `δ = 2 j̄` with `j̄` the count-weighted mean scale; for this choice the
/// contrast is a wavelet-domain local Whittle criterion.
pub fn whittle_delta(coeffs: &WaveletCoefficients) -> f64 {
    2.0 * coeffs.mean_scale()
}

/// Contrast `log(sum 2^{-2d'j} w²) + δ d' log 2` minimized over `(0, 1/2)`,
/// plus half the slope of `log2(mean w²)` on `j`.
pub fn wavelet_estimator(coeffs: &WaveletCoefficients, delta: f64) -> Result<WaveletEstimate> {
    let usable: Vec<&ScaleCoefficients> = coeffs
        .scales
        .iter()
        .filter(|s| !s.coeffs.is_empty())
        .collect();
    if usable.len() < 2 {
        return Err(Error::Estimation(
            "wavelet estimation needs at least two scales".into(),
        ));
    }
    let total: usize = usable.iter().map(|s| s.coeffs.len()).sum();
    let energy: Vec<(f64, f64)> = usable
        .iter()
        .map(|s| (s.j as f64, s.coeffs.iter().map(|w| w * w).sum::<f64>()))
        .collect();
    if energy.iter().all(|(_, e)| *e == 0.0) {
        return Err(Error::Degenerate(
            "all wavelet coefficients are zero".into(),
        ));
    }
    let ln2 = std::f64::consts::LN_2;
    let contrast = |dp: f64| {
        let s: f64 = energy
            .iter()
            .map(|(j, e)| (-2.0 * dp * j * ln2).exp() * e)
            .sum();
        s.ln() + delta * dp * ln2
    };
    let eps = 1e-9;
    let (d_c, edge) = grid_golden(contrast, eps, 0.5 - eps, 100, 1e-10);

    let mut xs = Vec::new();
    let mut ys = Vec::new();
    for s in &usable {
        let ms = s.coeffs.iter().map(|w| w * w).sum::<f64>() / s.coeffs.len() as f64;
        if ms > 0.0 {
            xs.push(s.j as f64);
            ys.push(ms.log2());
        }
    }
    if xs.len() < 2 {
        return Err(Error::Estimation(
            "fewer than two scales with nonzero energy".into(),
        ));
    }
    let (_, slope) = stats::ols(&xs, &ys);
    let base = |kind, d_hat, warnings| EstimateReport {
        estimator: kind,
        d_hat,
        n: total,
        m: usable.len(),
        trim: 0,
        aux: None,
        warnings,
    };
    Ok(WaveletEstimate {
        contrast: base(
            EstimatorKind::Wavelet,
            d_c,
            if edge {
                vec![EstimateWarning::Boundary]
            } else {
                Vec::new()
            },
        ),
        regression: base(EstimatorKind::WaveletRegression, slope / 2.0, Vec::new()),
        delta,
    })
}

/// `√R (mean - d0) / sd` over `R >= 2` estimates.
///
/// When every estimate is identical the statistic is 0 if they equal `d0`
/// and undefined otherwise.
pub fn t_value(estimates: &[f64], d0: f64) -> Result<f64> {
    if estimates.len() < 2 {
        return Err(Error::param("t-value needs at least 2 estimates"));
    }
    let m = stats::mean(estimates);
    let sd = stats::std_dev(estimates);
    if sd == 0.0 {
        if m == d0 {
            return Ok(0.0);
        }
        return Err(Error::Degenerate(
            "estimates have zero spread; t-value is undefined".into(),
        ));
    }
    Ok((estimates.len() as f64).sqrt() * (m - d0) / sd)
}

/// Replication statistics for one estimator configuration.
#[derive(Debug, Clone, PartialEq)]
pub struct ReplicationSummary {
    pub estimator: EstimatorKind,
    pub m: usize,
    pub estimates: Vec<f64>,
    pub mean: f64,
    /// `None` for a single replication.
    pub sd: Option<f64>,
    pub d0: f64,
    /// `None` when not applicable (one replication or zero spread).
    pub t_value: Option<f64>,
}

impl ReplicationSummary {
    pub fn new(estimator: EstimatorKind, m: usize, estimates: Vec<f64>, d0: f64) -> Result<Self> {
        if estimates.is_empty() {
            return Err(Error::param("no estimates to summarize"));
        }
        if let Some(i) = estimates.iter().position(|d| !d.is_finite()) {
            return Err(Error::Estimation(format!(
                "replication {i} gave a non-finite estimate"
            )));
        }
        let mean = stats::mean(&estimates);
        let (sd, t) = if estimates.len() >= 2 {
            (
                Some(stats::std_dev(&estimates)),
                t_value(&estimates, d0).ok(),
            )
        } else {
            (None, None)
        };
        Ok(Self {
            estimator,
            m,
            estimates,
            mean,
            sd,
            d0,
            t_value: t,
        })
    }
}

/// Per-replication CSV with columns `estimator,n,m,trim,rep,d_hat,aux`.
/// Writes `(replication index, report)` pairs.
pub fn write_reports_csv<'a, W, I>(mut w: W, reports: I) -> std::io::Result<()>
where
    W: Write,
    I: IntoIterator<Item = (usize, &'a EstimateReport)>,
{
    writeln!(w, "estimator,n,m,trim,rep,d_hat,aux")?;
    for (rep, r) in reports {
        let aux = r.aux.map(|a| format!("{a:?}")).unwrap_or_default();
        writeln!(
            w,
            "{},{},{},{},{},{:?},{}",
            r.estimator, r.n, r.m, r.trim, rep, r.d_hat, aux
        )?;
    }
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::f64::consts::PI;

    fn power_law(n: usize, d: f64, c: f64) -> PeriodogramSet {
        let ords = (1..=(n - 1) / 2)
            .map(|j| c * (2.0 * PI * j as f64 / n as f64).powf(-2.0 * d))
            .collect();
        PeriodogramSet::from_ordinates(n, ords).unwrap()
    }

    #[test]
    fn exact_power_law_recovered() {
        let p = power_law(1000, 0.3, 2.0);
        let bw = BandwidthSpec::new(100, 0);
        assert!((gph(&p, bw).unwrap().d_hat - 0.3).abs() < 1e-12);
        assert!((local_whittle_gse(&p, bw).unwrap().d_hat - 0.3).abs() < 1e-12);
        let r = local_whittle_noise(&p, bw).unwrap();
        assert!((r.d_hat - 0.3).abs() < 1e-12, "{}", r.d_hat);
        assert!(r.has_warning(&EstimateWarning::NoisePinned));
        assert_eq!(r.aux, Some(0.0));
    }

    #[test]
    fn noise_term_recovered() {
        let n = 4000;
        let ords = (1..=(n - 1) / 2)
            .map(|j| {
                let w = 2.0 * PI * j as f64 / n as f64;
                w.powf(-0.8) + 3.0
            })
            .collect();
        let p = PeriodogramSet::from_ordinates(n, ords).unwrap();
        let r = local_whittle_noise(&p, BandwidthSpec::new(800, 0)).unwrap();
        assert!((r.d_hat - 0.4).abs() < 1e-4, "{}", r.d_hat);
        assert!((r.aux.unwrap() - 3.0).abs() < 1e-2, "{:?}", r.aux);
    }

    #[test]
    fn scale_invariance() {
        let mut p = power_law(500, 0.2, 1.0);
        for (i, v) in p.ordinates.iter_mut().enumerate() {
            *v *= 1.0 + 0.3 * ((i * 7919) % 13) as f64 / 13.0;
        }
        let mut q = p.clone();
        for v in q.ordinates.iter_mut() {
            *v *= 9.0;
        }
        let bw = BandwidthSpec::new(60, 2);
        assert!((gph(&p, bw).unwrap().d_hat - gph(&q, bw).unwrap().d_hat).abs() < 1e-12);
        let a = local_whittle_gse(&p, bw).unwrap().d_hat;
        let b = local_whittle_gse(&q, bw).unwrap().d_hat;
        assert!((a - b).abs() < 1e-12);
    }

    #[test]
    fn zero_ordinate_and_bad_bandwidth() {
        let mut p = power_law(200, 0.1, 1.0);
        p.ordinates[4] = 0.0;
        match gph(&p, BandwidthSpec::new(20, 0)) {
            Err(Error::Estimation(msg)) => assert!(msg.contains("j=5")),
            other => panic!("{other:?}"),
        }
        assert!(gph(&p, BandwidthSpec::new(100, 0)).is_err());
        assert!(gph(&p, BandwidthSpec::new(3, 3)).is_err());
    }

    #[test]
    fn boundary_warning() {
        let p = power_law(1000, 1.2, 1.0);
        let r = local_whittle_gse(&p, BandwidthSpec::new(100, 0)).unwrap();
        assert!(r.has_warning(&EstimateWarning::Boundary));
        assert!((r.d_hat - WHITTLE_D_MAX).abs() < 1e-6);
    }

    #[test]
    fn sine_regressor_switch() {
        let p = power_law(1000, 0.3, 1.0);
        let bw = BandwidthSpec::new(30, 0);
        let a = gph_with(&p, bw, GphRegressor::Sine).unwrap().d_hat;
        assert!((a - 0.3).abs() < 1e-3 && a != 0.3);
    }

    #[test]
    fn bandwidth_check() {
        let c = noise_bandwidth_check(16384, 1500, 0.4, 0.05).unwrap();
        assert!(c.ok());
        let low = noise_bandwidth_check(16384, 20, 0.4, 0.05).unwrap();
        assert!(!low.lower_ok);
        let high = noise_bandwidth_check(10000, 1585, 0.4, 0.05).unwrap();
        assert!(!high.upper_ok);
    }

    #[test]
    fn t_values() {
        assert_eq!(t_value(&[0.25; 5], 0.25).unwrap(), 0.0);
        let xs = [0.0, 2.0];
        // mean 1, sd √2, R=2: t = √2 (1 - d0)/√2 = 1 - d0
        assert!((t_value(&xs, 0.0).unwrap() - 1.0).abs() < 1e-12);
        assert!(t_value(&[0.3], 0.0).is_err());
        assert!(matches!(
            t_value(&[0.3, 0.3], 0.0),
            Err(Error::Degenerate(_))
        ));
        let s = ReplicationSummary::new(EstimatorKind::Gph, 10, vec![0.2], 0.25).unwrap();
        assert_eq!(s.t_value, None);
        assert_eq!(s.sd, None);
    }

    #[test]
    fn wavelet_on_constant_path_is_zero() {
        let p = StepFunction::from_levels(vec![0.0], vec![3.0], 1024.0);
        let c = wavelet_coefficients(&p, 0..=6, None).unwrap();
        assert!(c.scales.iter().all(|s| s.coeffs.iter().all(|&w| w == 0.0)));
        assert!(matches!(
            wavelet_estimator(&c, 1.0),
            Err(Error::Degenerate(_))
        ));
    }

    #[test]
    fn wavelet_exact_scaling() {
        let d0 = 0.3;
        let scales = (2..8)
            .map(|j| {
                let s = 2f64.powf(d0 * j as f64);
                ScaleCoefficients {
                    j,
                    coeffs: vec![s, -s, s, -s],
                }
            })
            .collect();
        let c = WaveletCoefficients {
            scales,
            excluded: 0,
        };
        let e = wavelet_estimator(&c, whittle_delta(&c)).unwrap();
        assert!((e.regression.d_hat - d0).abs() < 1e-12);
        assert!((e.contrast.d_hat - d0).abs() < 1e-6, "{}", e.contrast.d_hat);
    }

    #[test]
    fn wavelet_single_scale_rejected() {
        let c = WaveletCoefficients {
            scales: vec![ScaleCoefficients {
                j: 3,
                coeffs: vec![1.0, 2.0],
            }],
            excluded: 0,
        };
        assert!(matches!(
            wavelet_estimator(&c, 1.0),
            Err(Error::Estimation(_))
        ));
    }

    #[test]
    fn wavelet_window_exclusion() {
        let p = StepFunction::from_levels(vec![0.0, 5.0], vec![1.0, -1.0], 64.0);
        let c = wavelet_coefficients(&p, 3..=5, Some(4)).unwrap();
        // widths 8, 16, 32 fit 8, 4, 2 translates
        assert_eq!(c.excluded, 2);
        assert_eq!(c.scales[2].coeffs.len(), 2);
        // ψ_{3,0}: ∫_0^4 - ∫_4^8 = 4 - (1 - 3) = 6, times 2^{-3/2}
        assert!((c.scales[0].coeffs[0] - 6.0 * 2f64.powf(-1.5)).abs() < 1e-12);
    }
}
