//! Seeded random streams and the variate generators used by the simulators.
//!
//! Every simulator draws from a [`RngStream`], a `(seed, stream)` pair that
//! maps to a ChaCha8 keystream. Replication `r` of an experiment uses stream
//! `r`, so results do not depend on execution order or thread count.

use std::f64::consts::{FRAC_PI_2, PI};

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, Exp1, Pareto, StandardNormal, Weibull};
use statrs::function::gamma::gamma;

use crate::error::{Error, Result};

/// The generator behind every stream.
pub type StreamRng = ChaCha8Rng;

/// A reproducible source of randomness keyed by `(seed, stream)`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub struct RngStream {
    pub seed: u64,
    pub stream: u64,
}

fn splitmix64(mut z: u64) -> u64 {
    z = z.wrapping_add(0x9e37_79b9_7f4a_7c15);
    z = (z ^ (z >> 30)).wrapping_mul(0xbf58_476d_1ce4_e5b9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94d0_49bb_1331_11eb);
    z ^ (z >> 31)
}

impl RngStream {
    pub fn new(seed: u64, stream: u64) -> Self {
        Self { seed, stream }
    }

    /// Materializes the generator. Equal streams give bit-identical output.
    pub fn rng(&self) -> StreamRng {
        let mut rng = ChaCha8Rng::seed_from_u64(self.seed);
        rng.set_stream(self.stream);
        rng
    }

    /// An independent sub-stream, e.g. the latent and innovation sequences of
    /// one replication.
    pub fn child(&self, tag: u64) -> Self {
        let seed = splitmix64(splitmix64(self.seed) ^ self.stream.rotate_left(17));
        Self { seed, stream: tag }
    }

    /// Stream for replication `rep` of an experiment seeded with `seed`.
    pub fn replication(seed: u64, rep: usize) -> Self {
        Self::new(seed, rep as u64)
    }
}

/// Parameters of an α-stable law in the `S(α, β, scale, shift)`
/// parameterization where α = 2 is Gaussian with variance `2·scale²`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct StableParams {
    pub alpha: f64,
    pub beta: f64,
    pub scale: f64,
    pub shift: f64,
}

impl StableParams {
    pub fn new(alpha: f64, beta: f64, scale: f64, shift: f64) -> Result<Self> {
        let p = Self {
            alpha,
            beta,
            scale,
            shift,
        };
        p.validate()?;
        Ok(p)
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.alpha > 0.0 && self.alpha <= 2.0) {
            return Err(Error::param(format!(
                "stable tail index must lie in (0, 2], got {}",
                self.alpha
            )));
        }
        if !(self.beta.abs() <= 1.0) {
            return Err(Error::param(format!(
                "stable skewness must lie in [-1, 1], got {}",
                self.beta
            )));
        }
        if !(self.scale > 0.0 && self.scale.is_finite()) {
            return Err(Error::param(format!(
                "stable scale must be positive, got {}",
                self.scale
            )));
        }
        if !self.shift.is_finite() {
            return Err(Error::param("stable shift must be finite"));
        }
        Ok(())
    }

    /// One draw by the Chambers–Mallows–Stuck construction.
    pub fn draw<R: Rng + ?Sized>(&self, rng: &mut R) -> f64 {
        // V uniform on (-π/2, π/2), W standard exponential.
        let v = PI * (rng.random::<f64>() - 0.5);
        let w: f64 = Exp1.sample(rng);
        let (a, b) = (self.alpha, self.beta);
        if (a - 1.0).abs() < 1e-12 {
            let h = FRAC_PI_2 + b * v;
            let x = (h * v.tan() - b * ((FRAC_PI_2 * w * v.cos()) / h).ln()) / FRAC_PI_2;
            self.scale * x + b * self.scale * self.scale.ln() / FRAC_PI_2 + self.shift
        } else {
            let t = b * (FRAC_PI_2 * a).tan();
            let shift_b = t.atan() / a;
            let scale_s = (1.0 + t * t).powf(0.5 / a);
            let av = a * (v + shift_b);
            let x = scale_s * av.sin() / v.cos().powf(1.0 / a)
                * ((v - av).cos() / w).powf((1.0 - a) / a);
            self.scale * x + self.shift
        }
    }
}

/// I.i.d. α-stable draws.
pub fn sample_stable<R: Rng + ?Sized>(
    params: &StableParams,
    count: usize,
    rng: &mut R,
) -> Result<Vec<f64>> {
    params.validate()?;
    if count == 0 {
        return Err(Error::param("count must be at least 1"));
    }
    Ok((0..count).map(|_| params.draw(rng)).collect())
}

/// Candidates drawn before the acceptance rate of [`PositiveStable`] is checked.
pub const POSITIVE_STABLE_WARMUP: u64 = 1000;
/// Smallest acceptable fraction of positive candidates.
pub const POSITIVE_STABLE_MIN_ACCEPTANCE: f64 = 0.10;

/// Stable law conditioned on positivity, sampled by rejecting non-positive
/// candidates. Keeps running acceptance counts.
#[derive(Debug, Clone)]
pub struct PositiveStable {
    params: StableParams,
    candidates: u64,
    accepted: u64,
}

impl PositiveStable {
    pub fn new(params: StableParams) -> Result<Self> {
        params.validate()?;
        if !(params.alpha > 1.0 && params.alpha < 2.0) {
            return Err(Error::param(format!(
                "positive stable durations need a tail index in (1, 2), got {}",
                params.alpha
            )));
        }
        Ok(Self {
            params,
            candidates: 0,
            accepted: 0,
        })
    }

    pub fn params(&self) -> &StableParams {
        &self.params
    }

    /// Next positive draw. Fails once the warm-up batch shows an acceptance
    /// rate below [`POSITIVE_STABLE_MIN_ACCEPTANCE`].
    pub fn draw<R: Rng + ?Sized>(&mut self, rng: &mut R) -> Result<f64> {
        loop {
            let x = self.params.draw(rng);
            self.candidates += 1;
            let ok = x > 0.0;
            if ok {
                self.accepted += 1;
            }
            if self.candidates == POSITIVE_STABLE_WARMUP
                && self.acceptance_rate() < POSITIVE_STABLE_MIN_ACCEPTANCE
            {
                return Err(Error::config(format!(
                    "positive stable acceptance rate {:.3} after {} candidates is below {}; \
                     the law is not skewed enough",
                    self.acceptance_rate(),
                    self.candidates,
                    POSITIVE_STABLE_MIN_ACCEPTANCE
                )));
            }
            if ok {
                return Ok(x);
            }
        }
    }

    pub fn acceptance_rate(&self) -> f64 {
        if self.candidates == 0 {
            return 1.0;
        }
        self.accepted as f64 / self.candidates as f64
    }
}

/// Output of [`sample_positive_stable`].
#[derive(Debug, Clone)]
pub struct PositiveDraws {
    pub values: Vec<f64>,
    pub acceptance_rate: f64,
}

pub fn sample_positive_stable<R: Rng + ?Sized>(
    params: &StableParams,
    count: usize,
    rng: &mut R,
) -> Result<PositiveDraws> {
    if count == 0 {
        return Err(Error::param("count must be at least 1"));
    }
    let mut sampler = PositiveStable::new(*params)?;
    let mut values = Vec::with_capacity(count);
    for _ in 0..count {
        values.push(sampler.draw(rng)?);
    }
    // Small requests may finish before the warm-up check fires.
    while sampler.candidates < POSITIVE_STABLE_WARMUP {
        let _ = sampler.draw(rng)?;
    }
    Ok(PositiveDraws {
        values,
        acceptance_rate: sampler.acceptance_rate(),
    })
}

pub fn sample_weibull<R: Rng + ?Sized>(
    shape: f64,
    scale: f64,
    count: usize,
    rng: &mut R,
) -> Result<Vec<f64>> {
    let dist = weibull(shape, scale)?;
    Ok((0..count).map(|_| dist.sample(rng)).collect())
}

pub(crate) fn weibull(shape: f64, scale: f64) -> Result<Weibull<f64>> {
    if !(shape > 0.0 && scale > 0.0) || !shape.is_finite() || !scale.is_finite() {
        return Err(Error::param(format!(
            "Weibull shape and scale must be positive, got shape={shape}, scale={scale}"
        )));
    }
    Weibull::new(scale, shape).map_err(|e| Error::param(e.to_string()))
}

/// Scale giving a unit-mean Weibull law of the given shape.
pub fn weibull_unit_mean_scale(shape: f64) -> f64 {
    1.0 / gamma(1.0 + 1.0 / shape)
}

/// Pareto law with `P(X > x) = (x / x_min)^(-alpha)`, optionally replaced by
/// its equilibrium (integrated-tail) law.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ParetoLaw {
    pub alpha: f64,
    pub x_min: f64,
}

impl ParetoLaw {
    pub fn new(alpha: f64, x_min: f64) -> Result<Self> {
        if !(alpha > 0.0 && x_min > 0.0) || !alpha.is_finite() || !x_min.is_finite() {
            return Err(Error::param(format!(
                "Pareto needs alpha > 0 and x_min > 0, got alpha={alpha}, x_min={x_min}"
            )));
        }
        Ok(Self { alpha, x_min })
    }

    pub fn mean(&self) -> f64 {
        if self.alpha > 1.0 {
            self.alpha * self.x_min / (self.alpha - 1.0)
        } else {
            f64::INFINITY
        }
    }

    pub fn draw<R: Rng + ?Sized>(&self, rng: &mut R) -> f64 {
        // 1 - U lies in (0, 1], keeping the draw finite.
        let u = 1.0 - rng.random::<f64>();
        self.x_min * u.powf(-1.0 / self.alpha)
    }

    /// Draw from the integrated-tail law `P(X_e > x) = E[(X - x)+] / E[X]`.
    ///
    /// Mass `(alpha-1)/alpha` is uniform on `[0, x_min)`; above `x_min` the
    /// tail is `(x / x_min)^(1-alpha) / alpha`.
    pub fn draw_equilibrium<R: Rng + ?Sized>(&self, rng: &mut R) -> f64 {
        let a = self.alpha;
        let u: f64 = rng.random();
        let p0 = (a - 1.0) / a;
        if u < p0 {
            u * self.mean()
        } else {
            self.x_min * (a * (1.0 - u)).powf(-1.0 / (a - 1.0))
        }
    }

    pub fn quantile(&self, p: f64) -> f64 {
        self.x_min * (1.0 - p).powf(-1.0 / self.alpha)
    }
}

pub fn sample_pareto<R: Rng + ?Sized>(
    alpha: f64,
    x_min: f64,
    count: usize,
    equilibrium: bool,
    rng: &mut R,
) -> Result<Vec<f64>> {
    let law = ParetoLaw::new(alpha, x_min)?;
    if equilibrium {
        if alpha <= 1.0 {
            return Err(Error::param(format!(
                "equilibrium Pareto needs a finite mean (alpha > 1), got alpha={alpha}"
            )));
        }
        Ok((0..count).map(|_| law.draw_equilibrium(rng)).collect())
    } else {
        // rand_distr's inverse-transform sampler gives the same law.
        let dist = Pareto::new(x_min, alpha).map_err(|e| Error::param(e.to_string()))?;
        Ok((0..count).map(|_| dist.sample(rng)).collect())
    }
}

pub fn standard_normal<R: Rng + ?Sized>(rng: &mut R) -> f64 {
    StandardNormal.sample(rng)
}

pub fn standard_exponential<R: Rng + ?Sized>(rng: &mut R) -> f64 {
    Exp1.sample(rng)
}
