//! Shot-noise processes `X_t = sum_j eps_j 1{t_j <= t < t_j + eta_j}`.
//!
//! Four specializations are simulated in their stationary versions:
//! renewal-reward, ON-OFF, the discrete-time error-duration process and the
//! infinite-source Poisson (M/G/∞) model. Continuous-time paths keep their
//! exact piecewise-constant structure so that integrals along the path are
//! exact rather than grid approximations.

mod laws;

use std::io::Write;

use rand::Rng;

pub use laws::{DurationLaw, IndependentMarks, MarkSampler, ShockLaw};

use crate::error::{Error, Result};
use crate::random::{standard_exponential, RngStream};
use crate::series::TimeSeries;

/// Tail probability left uncovered by pre-sample windows.
pub const WINDOW_TAIL_PROB: f64 = 1e-6;
/// Largest pre-sample window accepted before reporting a configuration error.
pub const MAX_WINDOW: f64 = 1e8;

/// Birth times, shocks and durations of a shot-noise path.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct MarkedEventStream {
    pub births: Vec<f64>,
    pub shocks: Vec<f64>,
    pub durations: Vec<f64>,
}

impl MarkedEventStream {
    pub fn len(&self) -> usize {
        self.births.len()
    }

    pub fn is_empty(&self) -> bool {
        self.births.is_empty()
    }

    fn push(&mut self, birth: f64, shock: f64, duration: f64) {
        self.births.push(birth);
        self.shocks.push(shock);
        self.durations.push(duration);
    }

    /// CSV with header `birth_time,shock,duration`.
    pub fn write_csv<W: Write>(&self, mut w: W) -> std::io::Result<()> {
        writeln!(w, "birth_time,shock,duration")?;
        for i in 0..self.len() {
            writeln!(
                w,
                "{:?},{:?},{:?}",
                self.births[i], self.shocks[i], self.durations[i]
            )?;
        }
        Ok(())
    }

    pub fn read_csv(text: &str) -> Result<Self> {
        let mut out = Self::default();
        let mut lines = text.lines().filter(|l| !l.starts_with('#'));
        match lines.next() {
            Some(h) if h.trim() == "birth_time,shock,duration" => {}
            _ => return Err(Error::input("missing birth_time,shock,duration header")),
        }
        for (i, line) in lines.enumerate() {
            let fields: Vec<&str> = line.split(',').collect();
            if fields.len() != 3 {
                return Err(Error::input(format!("line {}: expected 3 fields", i + 2)));
            }
            let parse = |s: &str| {
                s.trim()
                    .parse::<f64>()
                    .map_err(|e| Error::input(format!("line {}: {e}", i + 2)))
            };
            out.push(parse(fields[0])?, parse(fields[1])?, parse(fields[2])?);
        }
        Ok(out)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ShotNoiseKind {
    RenewalReward,
    OnOff,
    ErrorDuration,
    Poisson,
}

/// Right-continuous piecewise-constant function on `[0, horizon)`.
#[derive(Debug, Clone, PartialEq)]
pub struct StepFunction {
    knots: Vec<f64>,
    levels: Vec<f64>,
    cumulative: Vec<f64>,
    horizon: f64,
}

impl StepFunction {
    /// `knots[0]` must be 0; `levels[i]` holds on `[knots[i], knots[i+1])`.
    fn new(mut knots: Vec<f64>, mut levels: Vec<f64>, horizon: f64) -> Self {
        // Merge repeated knots, keeping the last level.
        let mut k2: Vec<f64> = Vec::with_capacity(knots.len());
        let mut l2: Vec<f64> = Vec::with_capacity(levels.len());
        for (k, l) in knots.drain(..).zip(levels.drain(..)) {
            if let Some(last) = k2.last() {
                if *last == k {
                    *l2.last_mut().unwrap() = l;
                    continue;
                }
            }
            k2.push(k);
            l2.push(l);
        }
        let mut cumulative = Vec::with_capacity(k2.len());
        let mut acc = 0.0;
        for i in 0..k2.len() {
            cumulative.push(acc);
            if i + 1 < k2.len() {
                acc += l2[i] * (k2[i + 1] - k2[i]);
            }
        }
        Self {
            knots: k2,
            levels: l2,
            cumulative,
            horizon,
        }
    }

    /// Path equal to `levels[i]` on `[knots[i], knots[i+1])`; `knots` must
    /// start at 0 and be nondecreasing.
    pub fn from_levels(knots: Vec<f64>, levels: Vec<f64>, horizon: f64) -> Self {
        assert_eq!(knots.len(), levels.len(), "one level per knot");
        assert!(knots.first() == Some(&0.0), "knots start at 0");
        Self::new(knots, levels, horizon)
    }

    fn segment(&self, t: f64) -> usize {
        self.knots.partition_point(|&k| k <= t).saturating_sub(1)
    }

    pub fn value_at(&self, t: f64) -> f64 {
        self.levels[self.segment(t)]
    }

    /// `∫_0^t X_s ds`, exact.
    pub fn integral_to(&self, t: f64) -> f64 {
        let i = self.segment(t);
        self.cumulative[i] + self.levels[i] * (t - self.knots[i])
    }

    pub fn integral(&self, a: f64, b: f64) -> f64 {
        self.integral_to(b) - self.integral_to(a)
    }

    pub fn horizon(&self) -> f64 {
        self.horizon
    }

    pub fn knots(&self) -> &[f64] {
        &self.knots
    }

    pub fn levels(&self) -> &[f64] {
        &self.levels
    }
}

/// Continuous-time shot-noise path with its grid samples and event list.
#[derive(Debug, Clone)]
pub struct ShotNoisePath {
    pub kind: ShotNoiseKind,
    /// Grid step `Δ`; grid points are `k Δ` for `k = 0..values.len()`.
    pub step: f64,
    pub values: Vec<f64>,
    pub events: MarkedEventStream,
    pub path: StepFunction,
}

impl ShotNoisePath {
    fn build(
        kind: ShotNoiseKind,
        path: StepFunction,
        events: MarkedEventStream,
        step: f64,
    ) -> Self {
        let n = grid_len(path.horizon, step);
        let values = (0..n).map(|k| path.value_at(k as f64 * step)).collect();
        Self {
            kind,
            step,
            values,
            events,
            path,
        }
    }

    pub fn horizon(&self) -> f64 {
        self.path.horizon
    }

    pub fn integral(&self, a: f64, b: f64) -> f64 {
        self.path.integral(a, b)
    }

    pub fn series(&self) -> TimeSeries {
        TimeSeries::with_step(self.values.clone(), self.step)
    }
}

fn grid_len(horizon: f64, step: f64) -> usize {
    ((horizon / step) * (1.0 + 1e-12)).floor() as usize
}

fn check_horizon(horizon: f64, step: f64) -> Result<()> {
    if !(horizon > 0.0 && horizon.is_finite()) {
        return Err(Error::param(format!(
            "horizon must be positive, got {horizon}"
        )));
    }
    if !(step > 0.0 && step <= horizon) {
        return Err(Error::param(format!(
            "grid step must lie in (0, horizon], got {step}"
        )));
    }
    Ok(())
}

fn require_positive_mean(law: &DurationLaw, what: &str) -> Result<()> {
    law.require_finite_mean()?;
    if law.mean() <= 0.0 {
        return Err(Error::param(format!(
            "{what} durations must have a positive mean"
        )));
    }
    Ok(())
}

/// Stationary renewal-reward process `X_t = eps_{N(t)}`; the interval
/// straddling time 0 is drawn from the equilibrium law.
pub fn simulate_renewal_reward<R: Rng + ?Sized>(
    duration_law: &DurationLaw,
    shock_law: &ShockLaw,
    horizon: f64,
    step: f64,
    rng: &mut R,
) -> Result<ShotNoisePath> {
    check_horizon(horizon, step)?;
    require_positive_mean(duration_law, "renewal")?;
    let mut events = MarkedEventStream::default();
    let mut t = 0.0;
    let mut first = duration_law.draw_equilibrium(rng);
    // A zero-length equilibrium draw would duplicate the next birth.
    while first <= 0.0 {
        first = duration_law.draw_equilibrium(rng);
    }
    events.push(0.0, shock_law.draw(rng), first);
    t += first;
    while t < horizon {
        let eta = duration_law.draw(rng);
        events.push(t, shock_law.draw(rng), eta);
        t += eta;
    }
    let path = StepFunction::new(events.births.clone(), events.shocks.clone(), horizon);
    Ok(ShotNoisePath::build(
        ShotNoiseKind::RenewalReward,
        path,
        events,
        step,
    ))
}

/// Stationary ON-OFF process. The cycle covering time 0 is length-biased and
/// entered at a uniform phase: ON with probability `E[on] / (E[on] + E[off])`.
pub fn simulate_on_off<R: Rng + ?Sized>(
    on_law: &DurationLaw,
    off_law: &DurationLaw,
    horizon: f64,
    step: f64,
    rng: &mut R,
) -> Result<ShotNoisePath> {
    check_horizon(horizon, step)?;
    require_positive_mean(on_law, "ON")?;
    off_law.require_finite_mean()?;
    let (mon, moff) = (on_law.mean(), off_law.mean());
    let p_on = mon / (mon + moff);
    let mut events = MarkedEventStream::default();
    let mut knots = vec![0.0];
    let mut levels = Vec::new();
    let mut t;
    if rng.random::<f64>() < p_on {
        let u: f64 = rng.random();
        let rest = u * on_law.draw_length_biased(rng);
        events.push(0.0, 1.0, rest);
        levels.push(1.0);
        t = rest;
        let off = off_law.draw(rng);
        if off > 0.0 {
            knots.push(t);
            levels.push(0.0);
        }
        t += off;
    } else {
        let u: f64 = rng.random();
        let rest = u * off_law.draw_length_biased(rng);
        levels.push(0.0);
        t = rest;
    }
    while t < horizon {
        let on = on_law.draw(rng);
        events.push(t, 1.0, on);
        knots.push(t);
        levels.push(1.0);
        t += on;
        let off = off_law.draw(rng);
        if off > 0.0 && t < horizon {
            knots.push(t);
            levels.push(0.0);
        }
        t += off;
    }
    let path = StepFunction::new(knots, levels, horizon);
    Ok(ShotNoisePath::build(
        ShotNoiseKind::OnOff,
        path,
        events,
        step,
    ))
}

fn presample_window(q: f64) -> Result<f64> {
    if !(q.is_finite() && q <= MAX_WINDOW) {
        return Err(Error::config(format!(
            "pre-sample window {q:e} needed to cover the duration tail up to {WINDOW_TAIL_PROB:e} \
             exceeds the limit {MAX_WINDOW:e}"
        )));
    }
    Ok(q)
}

/// Discrete-time error-duration process `X_t = sum_{j<=t} eps_j 1{t < j + eta_j}`
/// for `t = 1..n`, with births `j` covering a pre-sample window.
pub fn simulate_error_duration<R: Rng + ?Sized>(
    shock_law: &ShockLaw,
    duration_law: &DurationLaw,
    n: usize,
    rng: &mut R,
) -> Result<TimeSeries> {
    require_positive_mean(duration_law, "error-duration")?;
    if n == 0 {
        return Err(Error::param("series length must be at least 1"));
    }
    let window = presample_window(duration_law.quantile(1.0 - WINDOW_TAIL_PROB))?.ceil() as i64;
    // diff[t] for t = 1..=n+1 stored at index t.
    let mut diff = vec![0.0; n + 2];
    let n_i = n as i64;
    for j in (1 - window)..=n_i {
        let eps = shock_law.draw(rng);
        let eta = duration_law.draw(rng);
        // Alive for t in [j, j + ceil(eta) - 1].
        let last = j + eta.ceil() as i64 - 1;
        if last < 1 || last < j {
            continue;
        }
        let start = j.max(1) as usize;
        diff[start] += eps;
        let stop = last.min(n_i) as usize + 1;
        diff[stop] -= eps;
    }
    let mut acc = 0.0;
    let values = (1..=n)
        .map(|t| {
            acc += diff[t];
            acc
        })
        .collect();
    Ok(TimeSeries::new(values))
}

/// Infinite-source Poisson model: Poisson(λ) births on `[-W, horizon)`,
/// each contributing its shock for its duration.
pub fn simulate_infinite_source_poisson<R: Rng>(
    rate: f64,
    marks: &dyn MarkSampler,
    horizon: f64,
    step: f64,
    rng: &mut R,
) -> Result<ShotNoisePath> {
    check_horizon(horizon, step)?;
    if !(rate > 0.0 && rate.is_finite()) {
        return Err(Error::param(format!(
            "Poisson rate must be positive, got {rate}"
        )));
    }
    let mean = marks.mean_duration();
    if !(mean.is_finite() && mean > 0.0) {
        return Err(Error::param("durations must have a finite positive mean"));
    }
    let window = presample_window(marks.duration_quantile(1.0 - WINDOW_TAIL_PROB))?;
    let expected = rate * (window + horizon);
    if expected > 1e9 {
        return Err(Error::config(format!(
            "about {expected:e} births would be needed; reduce the rate or horizon"
        )));
    }
    let mut events = MarkedEventStream::default();
    let mut t = -window;
    loop {
        t += standard_exponential(rng) / rate;
        if t >= horizon {
            break;
        }
        let (eps, eta) = marks.draw(rng);
        if t + eta > 0.0 {
            events.push(t, eps, eta);
        }
    }
    // Sweep +eps at max(birth, 0) and -eps at death.
    let mut changes: Vec<(f64, f64)> = Vec::with_capacity(2 * events.len());
    let mut initial = 0.0;
    for i in 0..events.len() {
        let (b, e, d) = (events.births[i], events.shocks[i], events.durations[i]);
        if b <= 0.0 {
            initial += e;
        } else {
            changes.push((b, e));
        }
        if b + d < horizon {
            changes.push((b + d, -e));
        }
    }
    changes.sort_by(|a, b| a.0.total_cmp(&b.0));
    let mut knots = Vec::with_capacity(changes.len() + 1);
    let mut levels = Vec::with_capacity(changes.len() + 1);
    knots.push(0.0);
    levels.push(initial);
    let mut level = initial;
    for (time, delta) in changes {
        level += delta;
        knots.push(time);
        levels.push(level);
    }
    let path = StepFunction::new(knots, levels, horizon);
    Ok(ShotNoisePath::build(
        ShotNoiseKind::Poisson,
        path,
        events,
        step,
    ))
}

/// Point-process setting for [`theoretical_shotnoise_acvf`].
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Arrivals {
    /// Homogeneous Poisson births (infinite-source Poisson).
    Poisson,
    /// Renewal births with durations equal to interarrival times.
    RenewalReward,
    /// Deterministic births at the integers.
    ErrorDuration,
    OnOff,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct AcvfValue {
    pub value: f64,
    /// True when only the large-lag equivalent is available.
    pub asymptotic: bool,
}

/// `cov(X_0, X_t)` for a shot-noise process with independent shocks and
/// durations.
///
/// The exact value `λ E[eps²] E[(eta - t)+]` is returned when the births are
/// Poisson or the shocks are centered. Otherwise only the regularly varying
/// (Pareto) case has a known equivalent, `λ/(α-1) ℓ(t) t^{1-α}` with
/// `ℓ(t) = E[eps²] x_min^α`, which is returned flagged as asymptotic.
pub fn theoretical_shotnoise_acvf(
    duration_law: &DurationLaw,
    shock_law: &ShockLaw,
    rate: f64,
    t: f64,
    arrivals: Arrivals,
) -> Result<AcvfValue> {
    duration_law.require_finite_mean()?;
    if !(rate > 0.0) {
        return Err(Error::param("intensity must be positive"));
    }
    let t = t.abs();
    let centered = shock_law.mean() == 0.0;
    let exact = match arrivals {
        Arrivals::Poisson => true,
        Arrivals::RenewalReward | Arrivals::ErrorDuration => centered,
        Arrivals::OnOff => false,
    };
    if exact {
        return Ok(AcvfValue {
            value: rate * shock_law.second_moment() * duration_law.mean_excess(t),
            asymptotic: false,
        });
    }
    match duration_law {
        DurationLaw::Pareto(p) if p.alpha > 1.0 && p.alpha < 2.0 => {
            let ell = shock_law.second_moment() * p.x_min.powf(p.alpha);
            Ok(AcvfValue {
                value: rate / (p.alpha - 1.0) * ell * t.powf(1.0 - p.alpha),
                asymptotic: true,
            })
        }
        _ => Err(Error::Unsupported(format!(
            "no covariance formula for {duration_law:?} durations with {shock_law:?} shocks under {arrivals:?} arrivals"
        ))),
    }
}

/// Continuous-time model for the superposition experiment.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum ShotNoiseModel {
    RenewalReward {
        duration: DurationLaw,
        shock: ShockLaw,
    },
    OnOff {
        on: DurationLaw,
        off: DurationLaw,
    },
    Poisson {
        rate: f64,
        duration: DurationLaw,
        shock: ShockLaw,
    },
}

impl ShotNoiseModel {
    /// Stationary mean `E[X_t]`.
    pub fn mean(&self) -> f64 {
        match self {
            ShotNoiseModel::RenewalReward { shock, .. } => shock.mean(),
            ShotNoiseModel::OnOff { on, off } => on.mean() / (on.mean() + off.mean()),
            ShotNoiseModel::Poisson {
                rate,
                duration,
                shock,
            } => rate * shock.mean() * duration.mean(),
        }
    }

    pub fn simulate<R: Rng>(&self, horizon: f64, step: f64, rng: &mut R) -> Result<ShotNoisePath> {
        match self {
            ShotNoiseModel::RenewalReward { duration, shock } => {
                simulate_renewal_reward(duration, shock, horizon, step, rng)
            }
            ShotNoiseModel::OnOff { on, off } => simulate_on_off(on, off, horizon, step, rng),
            ShotNoiseModel::Poisson {
                rate,
                duration,
                shock,
            } => {
                let marks = IndependentMarks {
                    shock: *shock,
                    duration: *duration,
                };
                simulate_infinite_source_poisson(*rate, &marks, horizon, step, rng)
            }
        }
    }
}

/// Aggregated centered partial sums
/// `A_{M,T}(t) = sum_{i=1}^M ∫_0^{Tt} (X^{(i)}_s - E X) ds` on a grid of `t`.
///
/// Copy `i` uses child stream `i` of `stream`.
pub fn superpose_partial_sums(
    model: &ShotNoiseModel,
    copies: usize,
    horizon: f64,
    t_grid: &[f64],
    stream: RngStream,
) -> Result<Vec<f64>> {
    if copies == 0 {
        return Err(Error::param("at least one copy is required"));
    }
    if t_grid.iter().any(|&t| !(t >= 0.0 && t.is_finite())) {
        return Err(Error::param("t grid must be nonnegative"));
    }
    let t_max = t_grid.iter().cloned().fold(0.0, f64::max);
    let span = (horizon * t_max).max(f64::MIN_POSITIVE);
    let mean = model.mean();
    let mut total = vec![0.0; t_grid.len()];
    for i in 0..copies {
        let mut rng = stream.child(i as u64).rng();
        let path = model.simulate(span, span, &mut rng)?;
        for (acc, &t) in total.iter_mut().zip(t_grid) {
            let upper = horizon * t;
            *acc += path.path.integral_to(upper) - mean * upper;
        }
    }
    Ok(total)
}
