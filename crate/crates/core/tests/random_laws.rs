use longmem::random::*;
use longmem::stats;
use rayon::prelude::*;
use statrs::distribution::{ContinuousCDF, Normal};
use statrs::function::erf::erfc;
use statrs::function::gamma::gamma;

fn ks_distance(mut xs: Vec<f64>, cdf: impl Fn(f64) -> f64) -> f64 {
    xs.sort_by(f64::total_cmp);
    let n = xs.len() as f64;
    xs.iter()
        .enumerate()
        .map(|(i, &x)| {
            let f = cdf(x);
            (f - i as f64 / n).abs().max(((i + 1) as f64 / n - f).abs())
        })
        .fold(0.0, f64::max)
}

const N_KS: usize = 1_000_000;

#[test]
fn ks_weibull() {
    let (k, s) = (1.3376, 0.7);
    let x = sample_weibull(k, s, N_KS, &mut RngStream::new(1, 0).rng()).unwrap();
    let d = ks_distance(x, |x| 1.0 - (-(x / s).powf(k)).exp());
    assert!(d < 2.0 / (N_KS as f64).sqrt(), "{d}");
}

#[test]
fn ks_pareto() {
    let p = ParetoLaw::new(1.5, 2.0).unwrap();
    let mut rng = RngStream::new(1, 1).rng();
    let x: Vec<f64> = (0..N_KS).map(|_| p.draw(&mut rng)).collect();
    let d = ks_distance(x, |x| 1.0 - (2.0 / x).powf(1.5));
    assert!(d < 2.0 / (N_KS as f64).sqrt(), "{d}");
}

#[test]
fn ks_levy_and_cdf_at_one() {
    let p = StableParams::new(0.5, 1.0, 1.0, 0.0).unwrap();
    let x = sample_stable(&p, N_KS, &mut RngStream::new(1, 2).rng()).unwrap();
    let below = x.iter().filter(|&&v| v <= 1.0).count() as f64 / N_KS as f64;
    let exact = 2.0 * (1.0 - Normal::standard().cdf(1.0));
    assert!(
        (below - exact).abs() < 4.0 * (exact * (1.0 - exact) / N_KS as f64).sqrt(),
        "{below} vs {exact}"
    );
    let d = ks_distance(x, |x| {
        if x <= 0.0 {
            0.0
        } else {
            erfc((1.0 / (2.0 * x)).sqrt())
        }
    });
    assert!(d < 2.0 / (N_KS as f64).sqrt(), "{d}");
}

#[test]
fn ks_gaussian_special_case() {
    // α = 2 with scale σ is N(0, 2σ²).
    let p = StableParams::new(2.0, 0.0, 1.0, 0.0).unwrap();
    let x = sample_stable(&p, N_KS, &mut RngStream::new(1, 3).rng()).unwrap();
    let nd = Normal::new(0.0, 2f64.sqrt()).unwrap();
    let d = ks_distance(x, |x| nd.cdf(x));
    assert!(d < 2.0 / (N_KS as f64).sqrt(), "{d}");

    let mut rng = RngStream::new(1, 4).rng();
    let z: Vec<f64> = (0..N_KS).map(|_| standard_normal(&mut rng)).collect();
    let d = ks_distance(z, |x| Normal::standard().cdf(x));
    assert!(d < 2.0 / (N_KS as f64).sqrt(), "{d}");
}

fn big_stable_sample(p: &StableParams, tag: u64) -> Vec<f64> {
    let mut x: Vec<f64> = (0..10u64)
        .into_par_iter()
        .flat_map_iter(|c| {
            sample_stable(p, 1_000_000, &mut RngStream::new(2, tag).child(c).rng()).unwrap()
        })
        .collect();
    x.sort_by(|a, b| b.total_cmp(a));
    x
}

#[test]
fn stable_tail_ratio() {
    let x = big_stable_sample(&StableParams::new(1.5, 0.8, 1.0, 0.0).unwrap(), 0);
    let n = x.len() as f64;
    let q = x[(n * 1e-3) as usize];
    let above = |t: f64| x.iter().take_while(|&&v| v > t).count() as f64;
    let ratio = above(2.0 * q) / above(q);
    // About 3500 exceedances of 2q: binomial se of the ratio is roughly 0.01.
    assert!((ratio - 2f64.powf(-1.5)).abs() < 0.04, "{ratio}");
}

#[test]
fn stable_tail_slope() {
    for (i, alpha) in [1.2, 1.5, 1.8].into_iter().enumerate() {
        let x = big_stable_sample(
            &StableParams::new(alpha, 0.0, 1.0, 0.0).unwrap(),
            10 + i as u64,
        );
        let n = x.len() as f64;
        let k = (n * 1e-3) as usize;
        let lx: Vec<f64> = x[..k].iter().map(|v| v.ln()).collect();
        let ly: Vec<f64> = (1..=k).map(|r| (r as f64 / n).ln()).collect();
        let (_, slope) = stats::ols(&lx, &ly);
        assert!((slope + alpha).abs() < 0.1, "alpha={alpha}: slope {slope}");
    }
}

#[test]
fn weibull_means() {
    let k = 1.3376;
    let n = 1_000_000;
    let x = sample_weibull(k, 1.0, n, &mut RngStream::new(3, 0).rng()).unwrap();
    let m = stats::mean(&x);
    let se = stats::std_dev(&x) / (n as f64).sqrt();
    assert!((m - gamma(1.0 + 1.0 / k)).abs() < 4.0 * se);
    let x = sample_weibull(
        k,
        weibull_unit_mean_scale(k),
        n,
        &mut RngStream::new(3, 1).rng(),
    )
    .unwrap();
    let se = stats::std_dev(&x) / (n as f64).sqrt();
    assert!((stats::mean(&x) - 1.0).abs() < 4.0 * se);
}

#[test]
fn equilibrium_pareto_hill_index() {
    let p = ParetoLaw::new(1.5, 1.0).unwrap();
    let mut x: Vec<f64> = (0..10u64)
        .into_par_iter()
        .flat_map_iter(|c| {
            let mut rng = RngStream::new(4, c).rng();
            (0..1_000_000).map(move |_| p.draw_equilibrium(&mut rng))
        })
        .collect();
    x.sort_by(|a, b| b.total_cmp(a));
    let k = 10_000;
    let hill = x[..k].iter().map(|v| (v / x[k]).ln()).sum::<f64>() / k as f64;
    let index = 1.0 / hill;
    assert!((index - 0.5).abs() < 0.03, "{index}");
}

#[test]
fn streams_are_thread_independent() {
    let p = StableParams::new(1.5, 0.8, 1.0, 0.0).unwrap();
    let draw =
        |r: u64| sample_stable(&p, 100, &mut RngStream::replication(9, r as usize).rng()).unwrap();
    let serial: Vec<Vec<f64>> = (0..16).map(draw).collect();
    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(4)
        .build()
        .unwrap();
    let parallel: Vec<Vec<f64>> = pool.install(|| (0..16u64).into_par_iter().map(draw).collect());
    assert_eq!(serial, parallel);
}
