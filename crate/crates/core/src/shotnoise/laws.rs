//! Duration and shock laws for the shot-noise simulators.

use rand::Rng;
use rand_distr::{Distribution, Gamma};
use statrs::function::gamma::{gamma, gamma_ur};

use crate::error::{Error, Result};
use crate::random::{standard_exponential, standard_normal, ParetoLaw};

/// Law of a positive duration `eta`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum DurationLaw {
    /// Point mass; zero is allowed only where a degenerate law makes sense
    /// (e.g. OFF periods).
    Deterministic(f64),
    Exponential {
        mean: f64,
    },
    Pareto(ParetoLaw),
    Weibull {
        shape: f64,
        scale: f64,
    },
}

impl DurationLaw {
    pub fn pareto(alpha: f64, x_min: f64) -> Result<Self> {
        Ok(DurationLaw::Pareto(ParetoLaw::new(alpha, x_min)?))
    }

    pub fn validate(&self) -> Result<()> {
        let ok = match *self {
            DurationLaw::Deterministic(v) => v >= 0.0 && v.is_finite(),
            DurationLaw::Exponential { mean } => mean > 0.0 && mean.is_finite(),
            DurationLaw::Pareto(p) => p.alpha > 0.0 && p.x_min > 0.0,
            DurationLaw::Weibull { shape, scale } => shape > 0.0 && scale > 0.0,
        };
        if ok {
            Ok(())
        } else {
            Err(Error::param(format!("invalid duration law {self:?}")))
        }
    }

    /// Validates and additionally requires a finite, positive mean.
    pub fn require_finite_mean(&self) -> Result<()> {
        self.validate()?;
        let m = self.mean();
        if !m.is_finite() {
            return Err(Error::param(format!(
                "duration law {self:?} has an infinite mean; stationary versions need a finite mean"
            )));
        }
        Ok(())
    }

    pub fn mean(&self) -> f64 {
        match *self {
            DurationLaw::Deterministic(v) => v,
            DurationLaw::Exponential { mean } => mean,
            DurationLaw::Pareto(p) => p.mean(),
            DurationLaw::Weibull { shape, scale } => scale * gamma(1.0 + 1.0 / shape),
        }
    }

    pub fn draw<R: Rng + ?Sized>(&self, rng: &mut R) -> f64 {
        match *self {
            DurationLaw::Deterministic(v) => v,
            DurationLaw::Exponential { mean } => mean * standard_exponential(rng),
            DurationLaw::Pareto(p) => p.draw(rng),
            DurationLaw::Weibull { shape, scale } => {
                scale * standard_exponential(rng).powf(1.0 / shape)
            }
        }
    }

    /// Draw from the size-biased law `x F(dx) / E[eta]`.
    pub fn draw_length_biased<R: Rng + ?Sized>(&self, rng: &mut R) -> f64 {
        match *self {
            DurationLaw::Deterministic(v) => v,
            DurationLaw::Exponential { mean } => {
                mean * (standard_exponential(rng) + standard_exponential(rng))
            }
            DurationLaw::Pareto(p) => ParetoLaw {
                alpha: p.alpha - 1.0,
                x_min: p.x_min,
            }
            .draw(rng),
            DurationLaw::Weibull { shape, scale } => {
                let g = Gamma::new(1.0 + 1.0 / shape, 1.0)
                    .expect("shape validated positive")
                    .sample(rng);
                scale * g.powf(1.0 / shape)
            }
        }
    }

    /// Draw from the equilibrium law `P(eta_e > x) = E[(eta - x)+] / E[eta]`,
    /// the stationary delay of a renewal process.
    pub fn draw_equilibrium<R: Rng + ?Sized>(&self, rng: &mut R) -> f64 {
        match *self {
            DurationLaw::Pareto(p) => p.draw_equilibrium(rng),
            _ => {
                let u: f64 = rng.random();
                u * self.draw_length_biased(rng)
            }
        }
    }

    /// `P(eta > t)`.
    pub fn survival(&self, t: f64) -> f64 {
        if t < 0.0 {
            return 1.0;
        }
        match *self {
            DurationLaw::Deterministic(v) => {
                if v > t {
                    1.0
                } else {
                    0.0
                }
            }
            DurationLaw::Exponential { mean } => (-t / mean).exp(),
            DurationLaw::Pareto(p) => {
                if t < p.x_min {
                    1.0
                } else {
                    (t / p.x_min).powf(-p.alpha)
                }
            }
            DurationLaw::Weibull { shape, scale } => (-(t / scale).powf(shape)).exp(),
        }
    }

    /// `E[(eta - t)+]` for `t >= 0`.
    pub fn mean_excess(&self, t: f64) -> f64 {
        let t = t.max(0.0);
        match *self {
            DurationLaw::Deterministic(v) => (v - t).max(0.0),
            DurationLaw::Exponential { mean } => mean * (-t / mean).exp(),
            DurationLaw::Pareto(p) => {
                if t <= p.x_min {
                    p.mean() - t
                } else {
                    p.x_min.powf(p.alpha) * t.powf(1.0 - p.alpha) / (p.alpha - 1.0)
                }
            }
            DurationLaw::Weibull { shape, scale } => {
                if t == 0.0 {
                    return self.mean();
                }
                let s = 1.0 / shape;
                scale / shape * gamma(s) * gamma_ur(s, (t / scale).powf(shape))
            }
        }
    }

    pub fn quantile(&self, p: f64) -> f64 {
        match *self {
            DurationLaw::Deterministic(v) => v,
            DurationLaw::Exponential { mean } => -mean * (1.0 - p).ln(),
            DurationLaw::Pareto(law) => law.quantile(p),
            DurationLaw::Weibull { shape, scale } => scale * (-(1.0 - p).ln()).powf(1.0 / shape),
        }
    }
}

/// Law of the shocks `epsilon`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum ShockLaw {
    Constant(f64),
    Gaussian {
        mean: f64,
        sd: f64,
    },
    /// `±scale` with equal probability.
    Rademacher {
        scale: f64,
    },
}

impl ShockLaw {
    pub fn mean(&self) -> f64 {
        match *self {
            ShockLaw::Constant(c) => c,
            ShockLaw::Gaussian { mean, .. } => mean,
            ShockLaw::Rademacher { .. } => 0.0,
        }
    }

    pub fn second_moment(&self) -> f64 {
        match *self {
            ShockLaw::Constant(c) => c * c,
            ShockLaw::Gaussian { mean, sd } => mean * mean + sd * sd,
            ShockLaw::Rademacher { scale } => scale * scale,
        }
    }

    pub fn variance(&self) -> f64 {
        self.second_moment() - self.mean() * self.mean()
    }

    pub fn draw<R: Rng + ?Sized>(&self, rng: &mut R) -> f64 {
        match *self {
            ShockLaw::Constant(c) => c,
            ShockLaw::Gaussian { mean, sd } => mean + sd * standard_normal(rng),
            ShockLaw::Rademacher { scale } => {
                if rng.random::<bool>() {
                    scale
                } else {
                    -scale
                }
            }
        }
    }
}

/// Joint sampler of `(shock, duration)` marks, allowing dependence between
/// the two as long as the duration tail is known.
pub trait MarkSampler: Send + Sync {
    fn draw(&self, rng: &mut dyn rand::RngCore) -> (f64, f64);
    fn mean_duration(&self) -> f64;
    /// `E[epsilon * eta]`.
    fn mean_shock_duration(&self) -> f64;
    fn duration_quantile(&self, p: f64) -> f64;
}

/// Independent shocks and durations.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct IndependentMarks {
    pub shock: ShockLaw,
    pub duration: DurationLaw,
}

impl MarkSampler for IndependentMarks {
    fn draw(&self, rng: &mut dyn rand::RngCore) -> (f64, f64) {
        let e = self.shock.draw(rng);
        let d = self.duration.draw(rng);
        (e, d)
    }

    fn mean_duration(&self) -> f64 {
        self.duration.mean()
    }

    fn mean_shock_duration(&self) -> f64 {
        self.shock.mean() * self.duration.mean()
    }

    fn duration_quantile(&self, p: f64) -> f64 {
        self.duration.quantile(p)
    }
}
