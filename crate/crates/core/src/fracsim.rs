//! Exact simulation of Gaussian long-memory processes.
//!
//! Fractional noise (ARFIMA(0,d,0)) is generated exactly by circulant
//! embedding of its autocovariance; ARFIMA(p,d,q) applies an ARMA post-filter
//! to that noise with a burn-in.

use std::sync::Arc;

use num_complex::Complex64;
use rand::Rng;
use rustfft::{Fft, FftPlanner};
use statrs::function::gamma::ln_gamma;

use crate::error::{Error, Result};
use crate::random::standard_normal;
use crate::series::TimeSeries;

/// Relative size of a negative embedding eigenvalue that is still clipped to
/// zero instead of failing.
pub const EMBEDDING_CLIP_TOL: f64 = 1e-8;

/// ARFIMA(p, d, q) specification `phi(B) (1-B)^d X_t = theta(B) e_t`.
///
/// `ar` holds `phi_1..phi_p` in the convention
/// `X_t = phi_1 X_{t-1} + ... + u_t`, and `ma` holds `theta_1..theta_q`.
#[derive(Debug, Clone, PartialEq)]
pub struct FracSpec {
    pub d: f64,
    pub ar: Vec<f64>,
    pub ma: Vec<f64>,
    pub innovation_sd: f64,
}

impl FracSpec {
    pub fn fractional(d: f64, innovation_sd: f64) -> Self {
        Self {
            d,
            ar: Vec::new(),
            ma: Vec::new(),
            innovation_sd,
        }
    }

    pub fn validate(&self) -> Result<()> {
        check_d(self.d)?;
        // A zero innovation sd is accepted as the degenerate all-zero process.
        if !(self.innovation_sd >= 0.0 && self.innovation_sd.is_finite()) {
            return Err(Error::param(format!(
                "innovation sd must be nonnegative and finite, got {}",
                self.innovation_sd
            )));
        }
        if self.ar.iter().chain(&self.ma).any(|c| !c.is_finite()) {
            return Err(Error::param("ARMA coefficients must be finite"));
        }
        if !ar_is_stationary(&self.ar) {
            return Err(Error::param(format!(
                "AR polynomial with coefficients {:?} has a root inside the unit circle",
                self.ar
            )));
        }
        Ok(())
    }

    pub fn burn_in(&self) -> usize {
        let order = self.ar.len().max(self.ma.len());
        if order == 0 {
            0
        } else {
            10 * order + 1000
        }
    }
}

fn check_d(d: f64) -> Result<()> {
    if !(d > -0.5 && d < 0.5) {
        return Err(Error::param(format!(
            "memory parameter d must lie in (-0.5, 0.5), got {d}"
        )));
    }
    Ok(())
}

/// Checks that all roots of `1 - phi_1 z - ... - phi_p z^p` lie outside the
/// unit circle by stepping down to partial autocorrelations.
pub fn ar_is_stationary(ar: &[f64]) -> bool {
    let mut a = ar.to_vec();
    while let Some(&r) = a.last() {
        if !(r.abs() < 1.0) {
            return false;
        }
        let k = a.len();
        let denom = 1.0 - r * r;
        let prev: Vec<f64> = (0..k - 1)
            .map(|j| (a[j] + r * a[k - 2 - j]) / denom)
            .collect();
        a = prev;
    }
    true
}

/// Autocovariances `gamma(0..=K)` of ARFIMA(0, d, 0).
#[derive(Debug, Clone, PartialEq)]
pub struct AcvfTable {
    pub values: Vec<f64>,
    pub d: f64,
}

impl AcvfTable {
    pub fn max_lag(&self) -> usize {
        self.values.len() - 1
    }

    /// Extends the table through `max_lag` with the ARFIMA(0,d,0) recursion.
    pub fn extend_to(&mut self, max_lag: usize) {
        let d = self.d;
        while self.values.len() <= max_lag {
            let k = self.values.len() as f64;
            let prev = *self.values.last().unwrap();
            self.values.push(prev * (k - 1.0 + d) / (k - d));
        }
    }
}

/// `gamma(0) = s² Γ(1-2d) / Γ(1-d)²`, then `gamma(k) = gamma(k-1) (k-1+d)/(k-d)`.
pub fn arfima0d0_acvf(d: f64, innovation_sd: f64, max_lag: usize) -> Result<AcvfTable> {
    check_d(d)?;
    if !(innovation_sd > 0.0 && innovation_sd.is_finite()) {
        return Err(Error::param(format!(
            "innovation sd must be positive, got {innovation_sd}"
        )));
    }
    let g0 =
        innovation_sd * innovation_sd * (ln_gamma(1.0 - 2.0 * d) - 2.0 * ln_gamma(1.0 - d)).exp();
    let mut table = AcvfTable {
        values: vec![g0],
        d,
    };
    table.extend_to(max_lag);
    Ok(table)
}

/// Smallest power of two at least `2(n-1)`.
pub fn embedding_size(n: usize) -> usize {
    (2 * (n.max(2) - 1)).next_power_of_two()
}

/// Precomputed circulant embedding for repeated exact draws of length `n`.
#[derive(Clone)]
pub struct CirculantEmbedding {
    n: usize,
    sqrt_eig: Vec<f64>,
    fft: Arc<dyn Fft<f64>>,
    clipped: usize,
}

impl std::fmt::Debug for CirculantEmbedding {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.debug_struct("CirculantEmbedding")
            .field("n", &self.n)
            .field("size", &self.sqrt_eig.len())
            .field("clipped", &self.clipped)
            .finish()
    }
}

impl CirculantEmbedding {
    /// The table is extended as needed to cover lags up to half the
    /// embedding size.
    pub fn new(acvf: &AcvfTable, n: usize) -> Result<Self> {
        if n < 2 {
            return Err(Error::param("series length must be at least 2"));
        }
        let size = embedding_size(n);
        let half = size / 2;
        let mut table = acvf.clone();
        table.extend_to(half);
        let mut row: Vec<Complex64> = (0..size)
            .map(|k| {
                let lag = if k <= half { k } else { size - k };
                Complex64::new(table.values[lag], 0.0)
            })
            .collect();
        let mut planner = FftPlanner::new();
        let fft = planner.plan_fft_forward(size);
        fft.process(&mut row);
        let max = row.iter().map(|c| c.re).fold(f64::MIN, f64::max);
        let mut clipped = 0;
        let mut sqrt_eig = Vec::with_capacity(size);
        for c in &row {
            let mut lam = c.re;
            if lam < 0.0 {
                if -lam > EMBEDDING_CLIP_TOL * max {
                    return Err(Error::Numerical(format!(
                        "circulant embedding has eigenvalue {lam:.3e} (largest {max:.3e}); \
                         the autocovariance is not embeddable at n={n}"
                    )));
                }
                clipped += 1;
                lam = 0.0;
            }
            sqrt_eig.push((lam / size as f64).sqrt());
        }
        Ok(Self {
            n,
            sqrt_eig,
            fft,
            clipped,
        })
    }

    pub fn len(&self) -> usize {
        self.n
    }

    pub fn is_empty(&self) -> bool {
        self.n == 0
    }

    /// Number of slightly negative eigenvalues that were set to zero.
    pub fn clipped_eigenvalues(&self) -> usize {
        self.clipped
    }

    /// One exact zero-mean Gaussian path of length `n`.
    pub fn sample<R: Rng + ?Sized>(&self, rng: &mut R) -> Vec<f64> {
        let mut buf: Vec<Complex64> = self
            .sqrt_eig
            .iter()
            .map(|&s| {
                let re = standard_normal(rng);
                let im = standard_normal(rng);
                Complex64::new(s * re, s * im)
            })
            .collect();
        self.fft.process(&mut buf);
        buf.truncate(self.n);
        buf.into_iter().map(|c| c.re).collect()
    }
}

/// A fractional-noise draw plus embedding diagnostics.
#[derive(Debug, Clone)]
pub struct NoiseSample {
    pub series: TimeSeries,
    pub clipped_eigenvalues: usize,
}

pub fn simulate_fractional_noise<R: Rng + ?Sized>(
    acvf: &AcvfTable,
    n: usize,
    rng: &mut R,
) -> Result<NoiseSample> {
    let emb = CirculantEmbedding::new(acvf, n)?;
    Ok(NoiseSample {
        series: TimeSeries::new(emb.sample(rng)),
        clipped_eigenvalues: emb.clipped_eigenvalues(),
    })
}

/// Applies `x_t = sum phi_i x_{t-i} + u_t + sum theta_j u_{t-j}` with zero
/// pre-sample values.
pub fn arma_filter(input: &[f64], ar: &[f64], ma: &[f64]) -> Vec<f64> {
    let mut out = Vec::with_capacity(input.len());
    for t in 0..input.len() {
        let mut v = input[t];
        for (j, th) in ma.iter().enumerate() {
            if t > j {
                v += th * input[t - j - 1];
            }
        }
        for (i, ph) in ar.iter().enumerate() {
            if t > i {
                v += ph * out[t - i - 1];
            }
        }
        out.push(v);
    }
    out
}

/// Reusable ARFIMA sampler; keeps the embedding across replications.
#[derive(Debug, Clone)]
pub struct ArfimaSampler {
    spec: FracSpec,
    n: usize,
    embedding: Option<CirculantEmbedding>,
}

impl ArfimaSampler {
    pub fn new(spec: &FracSpec, n: usize) -> Result<Self> {
        spec.validate()?;
        if n < 2 {
            return Err(Error::param("series length must be at least 2"));
        }
        let embedding = if spec.innovation_sd > 0.0 {
            let acvf = arfima0d0_acvf(spec.d, spec.innovation_sd, 0)?;
            Some(CirculantEmbedding::new(&acvf, n + spec.burn_in())?)
        } else {
            None
        };
        Ok(Self {
            spec: spec.clone(),
            n,
            embedding,
        })
    }

    pub fn len(&self) -> usize {
        self.n
    }

    pub fn is_empty(&self) -> bool {
        self.n == 0
    }

    pub fn sample<R: Rng + ?Sized>(&self, rng: &mut R) -> Vec<f64> {
        let Some(emb) = &self.embedding else {
            return vec![0.0; self.n];
        };
        let noise = emb.sample(rng);
        if self.spec.ar.is_empty() && self.spec.ma.is_empty() {
            return noise;
        }
        let filtered = arma_filter(&noise, &self.spec.ar, &self.spec.ma);
        filtered[self.spec.burn_in()..].to_vec()
    }
}

pub fn simulate_arfima<R: Rng + ?Sized>(
    spec: &FracSpec,
    n: usize,
    rng: &mut R,
) -> Result<TimeSeries> {
    Ok(TimeSeries::new(ArfimaSampler::new(spec, n)?.sample(rng)))
}
