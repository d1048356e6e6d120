//! Acceptance suite. Prints one PASS/FAIL line per criterion and exits
//! nonzero if any criterion fails.

use std::f64::consts::PI;
use std::path::Path;
use std::time::Instant;

use longmem::counts::{
    default_block_sizes, variance_time_curve, CountSeries, CountSimulator, DurationModel,
};
use longmem::estimators::{
    gph, wavelet_coefficients, wavelet_estimator, whittle_delta, BandwidthSpec,
};
use longmem::fracsim::{arfima0d0_acvf, CirculantEmbedding, FracSpec};
use longmem::harness::{
    self, figure_bands, figure_panel_from_series, gph_rows, simulate_count_replications, Config,
    TableRow,
};
use longmem::random::{standard_normal, RngStream, StableParams};
use longmem::shotnoise::{
    simulate_infinite_source_poisson, simulate_renewal_reward, theoretical_shotnoise_acvf,
    Arrivals, DurationLaw, IndependentMarks, ShockLaw,
};
use longmem::spectral::{normalized_dft_statistic, periodogram_with, PeriodogramOptions};
use longmem::stats;
use longmem::volatility::{InnovationLaw, LmsvSpec, VolMode};

const SEED: u64 = 20_240_601;

struct Outcome {
    pass: bool,
    detail: String,
}

fn outcome(pass: bool, detail: String) -> Outcome {
    Outcome { pass, detail }
}

fn stable_model() -> DurationModel {
    DurationModel::Stable {
        params: StableParams::new(1.5, 0.8, 1.0, 0.0).unwrap(),
        multiplier: 1.21,
    }
}

fn lmsd_model() -> DurationModel {
    let mut latent = FracSpec::fractional(0.3545, 1.0);
    latent.ar = vec![-0.42];
    DurationModel::Lmsd {
        spec: LmsvSpec {
            latent,
            innovation_law: InnovationLaw::WeibullUnitMean { shape: 1.3376 },
            mode: VolMode::Lmsd,
        },
        multiplier: 1.0,
    }
}

fn row(rows: &[TableRow], e: f64) -> &TableRow {
    rows.iter().find(|r| r.m_exponent == e).unwrap()
}

fn criteria_1_2(stable: &[CountSeries]) -> (Outcome, Outcome) {
    let rows = gph_rows(stable, 300.0, &[0.5, 0.8], 0.25).unwrap();
    let (a, b) = (&row(&rows, 0.5).summary, &row(&rows, 0.8).summary);
    let ta = a.t_value.unwrap();
    let c1 = outcome(
        (0.06..=0.15).contains(&a.mean) && (0.19..=0.28).contains(&b.mean) && ta < -2.0,
        format!(
            "mean d_hat {:.4} (m={}) in [0.06, 0.15], {:.4} (m={}) in [0.19, 0.28], t = {:.2} < -2",
            a.mean, a.m, b.mean, b.m, ta
        ),
    );
    let c2 = outcome(
        a.mean < b.mean,
        format!(
            "mean d_hat {:.4} at m=n^0.5 < {:.4} at m=n^0.8",
            a.mean, b.mean
        ),
    );
    (c1, c2)
}

fn criterion_3(lmsd: &[CountSeries]) -> Outcome {
    let rows = gph_rows(lmsd, 300.0, &[0.5, 0.8], 0.3545).unwrap();
    let (a, b) = (row(&rows, 0.5).summary.mean, row(&rows, 0.8).summary.mean);
    outcome(
        [a, b].iter().all(|m| (0.31..=0.39).contains(m)),
        format!(
            "mean d_hat {a:.4} (m=n^0.5), {b:.4} (m=n^0.8) in [0.31, 0.39], R={}",
            lmsd.len()
        ),
    )
}

fn criterion_4(stable: &[CountSeries], lmsd: &[CountSeries]) -> Outcome {
    let n = stable[0].len();
    let ((l0, l1), (m0, m1)) = figure_bands(n);
    let sp = figure_panel_from_series(stable).unwrap();
    let (low, _) = sp.fit(l0, l1).unwrap();
    let (mid, _) = sp.fit(m0, m1).unwrap();
    let lp = figure_panel_from_series(lmsd).unwrap();
    let (slope, r2) = lp.fit_log_binned(1, n / 2, 10).unwrap();
    let (_, raw_r2) = lp.fit(1, n / 2).unwrap();
    outcome(
        mid.abs() - low.abs() >= 0.15 && r2 >= 0.98,
        format!(
            "stable low-decade slope {low:.3} vs mid-decade [{m0}, {m1}] slope {mid:.3}, gap {:.3} >= 0.15; \
             LMSD line slope {slope:.3} R^2 {r2:.4} >= 0.98 (10 log bins per decade; unbinned R^2 {raw_r2:.4})",
            mid.abs() - low.abs()
        ),
    )
}

fn criterion_5() -> Outcome {
    let n = 1 << 14;
    let reps = 200;
    let ks: Vec<usize> = (4..=14).map(|p| 1usize << p).collect();
    let mut worst: f64 = 0.0;
    let mut parts = Vec::new();
    for (i, d) in [0.1, 0.25, 0.4].into_iter().enumerate() {
        let acvf = arfima0d0_acvf(d, 1.0, n).unwrap();
        let emb = CirculantEmbedding::new(&acvf, n).unwrap();
        let mut sums = vec![0.0; ks.len()];
        let mut counts = vec![0usize; ks.len()];
        for r in 0..reps {
            let x = emb.sample(&mut RngStream::new(SEED + i as u64, r).rng());
            for (q, &k) in ks.iter().enumerate() {
                for block in x.chunks_exact(k) {
                    let s: f64 = block.iter().sum();
                    sums[q] += s * s;
                    counts[q] += 1;
                }
            }
        }
        let lx: Vec<f64> = ks.iter().map(|&k| (k as f64).ln()).collect();
        let ly: Vec<f64> = sums
            .iter()
            .zip(&counts)
            .map(|(s, &c)| (s / c as f64).ln())
            .collect();
        let (_, slope) = stats::ols(&lx, &ly);
        worst = worst.max((slope - (2.0 * d + 1.0)).abs());
        parts.push(format!("d={d}: slope {slope:.4} vs {:.2}", 2.0 * d + 1.0));
    }
    outcome(
        worst <= 0.05,
        format!("{}; max deviation {worst:.4} <= 0.05", parts.join(", ")),
    )
}

fn criterion_6(lmsd: &[CountSeries]) -> Outcome {
    let n = 100_000;
    let stable = simulate_count_replications(&stable_model(), 1.0, n, 50, SEED, 6).unwrap();
    let hs: Vec<f64> = stable
        .iter()
        .map(|c| {
            variance_time_curve(&c.to_f64(), &default_block_sizes(n))
                .unwrap()
                .hurst
        })
        .collect();
    let hl: Vec<f64> = lmsd
        .iter()
        .map(|c| {
            variance_time_curve(&c.to_f64(), &default_block_sizes(c.len()))
                .unwrap()
                .hurst
        })
        .collect();
    let (a, b) = (stats::mean(&hs), stats::mean(&hl));
    outcome(
        (a - 0.75).abs() <= 0.07 && (b - 0.8545).abs() <= 0.07,
        format!(
            "stable H {a:.4} (target 0.75, delta_t=1 s, n=1e5), LMSD H {b:.4} (target 0.8545, delta_t=300 s, n=1e4), R=50"
        ),
    )
}

fn median_statistic(model: &DurationModel, n: usize, d: f64, slot: u64) -> f64 {
    let sim = CountSimulator::new(model.clone(), 1.0, n).unwrap();
    let v = harness::replicate(200, |r| {
        let x = sim
            .simulate(harness::replication_stream(SEED, r, slot))?
            .to_f64();
        Ok(normalized_dft_statistic(&x, 1, d, true)?.norm_sqr())
    })
    .unwrap();
    stats::median(&v)
}

fn criterion_7() -> Outcome {
    let ns = [1_000, 10_000, 100_000];
    let s: Vec<f64> = ns
        .iter()
        .map(|&n| median_statistic(&stable_model(), n, 0.25, 70))
        .collect();
    let l: Vec<f64> = ns
        .iter()
        .map(|&n| median_statistic(&lmsd_model(), n, 0.3545, 71))
        .collect();
    let rs = s[0] / s[2];
    let lmax = l.iter().cloned().fold(f64::MIN, f64::max);
    let lmin = l.iter().cloned().fold(f64::MAX, f64::min);
    let rl = lmax / lmin;
    outcome(
        rs >= 2.0 && rl < 1.5,
        format!(
            "stable medians {:.4}/{:.4}/{:.4} (drop factor {rs:.2} >= 2); LMSD medians {:.4}/{:.4}/{:.4} (spread {rl:.2} < 1.5); delta_t=1 s, R=200",
            s[0], s[1], s[2], l[0], l[1], l[2]
        ),
    )
}

fn criterion_8() -> Outcome {
    let duration = DurationLaw::pareto(1.5, 1.0).unwrap();
    let shock = ShockLaw::Gaussian { mean: 0.0, sd: 1.0 };
    let lags = [1usize, 5, 10];
    let horizon = 2000.0;
    let per_rep = harness::replicate(500, |r| {
        let p = simulate_renewal_reward(
            &duration,
            &shock,
            horizon,
            1.0,
            &mut RngStream::new(SEED + 8, r as u64).rng(),
        )?;
        let x = &p.values;
        Ok(lags
            .iter()
            .map(|&h| (0..x.len() - h).map(|t| x[t] * x[t + h]).sum::<f64>() / (x.len() - h) as f64)
            .collect::<Vec<f64>>())
    })
    .unwrap();
    let mut ok = true;
    let mut parts = Vec::new();
    for (i, &h) in lags.iter().enumerate() {
        let v: Vec<f64> = per_rep.iter().map(|p| p[i]).collect();
        let est = stats::mean(&v);
        let se = stats::std_dev(&v) / (v.len() as f64).sqrt();
        let th = theoretical_shotnoise_acvf(
            &duration,
            &shock,
            1.0 / duration.mean(),
            h as f64,
            Arrivals::RenewalReward,
        )
        .unwrap()
        .value;
        let z = (est - th) / se;
        ok &= z.abs() <= 3.0;
        parts.push(format!("lag {h}: {est:.4} vs {th:.4} ({z:+.2} se)"));
    }
    outcome(ok, format!("{}, R=500", parts.join(", ")))
}

fn two_pass_ols_slope(x: &[f64], y: &[f64]) -> f64 {
    let mx = x.iter().sum::<f64>() / x.len() as f64;
    let my = y.iter().sum::<f64>() / y.len() as f64;
    let sxy: f64 = x.iter().zip(y).map(|(a, b)| (a - mx) * (b - my)).sum();
    let sxx: f64 = x.iter().map(|a| (a - mx) * (a - mx)).sum();
    sxy / sxx
}

fn direct_periodogram(x: &[f64], j: usize) -> f64 {
    let n = x.len();
    let w = 2.0 * PI * j as f64 / n as f64;
    let (mut re, mut im) = (0.0, 0.0);
    for (t, v) in x.iter().enumerate() {
        let a = w * (t + 1) as f64;
        re += v * a.cos();
        im += v * a.sin();
    }
    (re * re + im * im) / (2.0 * PI * n as f64)
}

fn criterion_9() -> Outcome {
    let mut rng = RngStream::new(SEED + 9, 0).rng();
    let mut gph_err: f64 = 0.0;
    let mut per_err: f64 = 0.0;
    for n in [16usize, 63, 128, 255, 512] {
        let x: Vec<f64> = (0..n).map(|_| standard_normal(&mut rng) + 1.5).collect();
        let p = periodogram_with(&x, PeriodogramOptions { center: false }).unwrap();
        for (i, &v) in p.ordinates.iter().enumerate() {
            let o = direct_periodogram(&x, i + 1);
            per_err = per_err.max((v - o).abs() / o);
        }
        let pc = periodogram_with(&x, PeriodogramOptions::default()).unwrap();
        for m in [4, p.len() / 2, p.len()] {
            let est = gph(&pc, BandwidthSpec::new(m, 0)).unwrap().d_hat;
            let reg: Vec<f64> = pc.frequencies[..m].iter().map(|w| -2.0 * w.ln()).collect();
            let ly: Vec<f64> = pc.ordinates[..m].iter().map(|v| v.ln()).collect();
            let o = two_pass_ols_slope(&reg, &ly);
            gph_err = gph_err.max((est - o).abs() / o.abs());
        }
    }
    outcome(
        gph_err <= 1e-12 && per_err <= 1e-10,
        format!(
            "max relative error: GPH {gph_err:.2e} <= 1e-12, periodogram {per_err:.2e} <= 1e-10"
        ),
    )
}

fn criterion_10() -> Outcome {
    let marks = IndependentMarks {
        shock: ShockLaw::Constant(1.0),
        duration: DurationLaw::pareto(1.5, 1.0).unwrap(),
    };
    let t = 65_536.0;
    let est = harness::replicate(50, |r| {
        let p = simulate_infinite_source_poisson(
            1.0,
            &marks,
            t,
            t,
            &mut RngStream::new(SEED + 10, r as u64).rng(),
        )?;
        let c = wavelet_coefficients(&p.path, 4..=13, None)?;
        Ok(wavelet_estimator(&c, whittle_delta(&c))?.regression.d_hat)
    })
    .unwrap();
    let m = stats::mean(&est);
    outcome(
        (m - 0.25).abs() <= 0.1,
        format!(
            "regression d_hat {m:.4} (sd {:.4}) within 0.25 +/- 0.1, T=65536, scales 4..13, R=50",
            stats::std_dev(&est)
        ),
    )
}

type Command = fn(&Config, &Path) -> harness::HarnessResult<Vec<std::path::PathBuf>>;

fn run_cmd(cmd: Command, cfg: &Config, threads: usize) -> Vec<Vec<u8>> {
    let dir = tempfile::tempdir().unwrap();
    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(threads)
        .build()
        .unwrap();
    let paths = pool.install(|| cmd(cfg, dir.path())).unwrap();
    paths.iter().map(|p| std::fs::read(p).unwrap()).collect()
}

fn criterion_11() -> Outcome {
    let small: &[(&str, &str)] = &[("n", "2000"), ("reps", "6"), ("seed", "11")];
    type Case<'a> = (
        &'a str,
        Vec<harness::KeySpec>,
        Command,
        Vec<(&'a str, &'a str)>,
    );
    let cases: Vec<Case> = vec![
        (
            "table1",
            harness::table1_schema(),
            harness::cmd_table1,
            vec![("delta_t", "30,60")],
        ),
        (
            "table2",
            harness::table2_schema(),
            harness::cmd_table2,
            vec![("delta_t", "30,60")],
        ),
        (
            "figure",
            harness::figure_schema(),
            harness::cmd_figure,
            vec![("delta_t", "30")],
        ),
        (
            "variance-time",
            harness::variance_time_schema(),
            harness::cmd_variance_time,
            vec![("n", "20000")],
        ),
    ];
    let mut ok = true;
    let mut names = Vec::new();
    for (name, schema, cmd, extra) in cases {
        let o: Vec<(String, String)> = small
            .iter()
            .chain(extra.iter())
            .map(|(k, v)| (k.to_string(), v.to_string()))
            .collect();
        let cfg = Config::resolve(&schema, None, &o).unwrap();
        let a = run_cmd(cmd, &cfg, 1);
        let b = run_cmd(cmd, &cfg, 1);
        let c = run_cmd(cmd, &cfg, 3);
        let same = a == b && a == c && !a.is_empty();
        ok &= same;
        names.push(format!(
            "{name} {}",
            if same { "identical" } else { "DIFFERS" }
        ));
    }
    outcome(
        ok,
        format!("re-runs and 1 vs 3 threads: {}", names.join(", ")),
    )
}

fn report(id: &str, started: Instant, o: Outcome, failures: &mut Vec<String>) {
    let tag = if o.pass { "PASS" } else { "FAIL" };
    println!(
        "criterion {id}: {tag} [{:.1}s] {}",
        started.elapsed().as_secs_f64(),
        o.detail
    );
    if !o.pass {
        failures.push(id.to_string());
    }
}

fn main() {
    let mut failures = Vec::new();

    let t = Instant::now();
    let stable = simulate_count_replications(&stable_model(), 300.0, 10_000, 100, SEED, 0).unwrap();
    let (c1, c2) = criteria_1_2(&stable);
    report("1", t, c1, &mut failures);
    report("2", t, c2, &mut failures);

    let t = Instant::now();
    let lmsd = simulate_count_replications(&lmsd_model(), 300.0, 10_000, 100, SEED, 1).unwrap();
    report("3", t, criterion_3(&lmsd[..50]), &mut failures);

    let t = Instant::now();
    report("4", t, criterion_4(&stable, &lmsd), &mut failures);

    let t = Instant::now();
    report("5", t, criterion_5(), &mut failures);

    let t = Instant::now();
    report("6", t, criterion_6(&lmsd[..50]), &mut failures);

    let t = Instant::now();
    report("7", t, criterion_7(), &mut failures);

    let t = Instant::now();
    report("8", t, criterion_8(), &mut failures);

    let t = Instant::now();
    report("9", t, criterion_9(), &mut failures);

    let t = Instant::now();
    report("10", t, criterion_10(), &mut failures);

    let t = Instant::now();
    report("11", t, criterion_11(), &mut failures);

    if failures.is_empty() {
        println!("acceptance: all 11 criteria passed");
    } else {
        println!("acceptance: failed criteria {}", failures.join(", "));
        std::process::exit(1);
    }
}
