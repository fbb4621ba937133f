//! Acceptance criteria. Runs without the libtest harness so that every
//! criterion prints exactly one PASS/FAIL line; exits non-zero if any fails.

use std::time::Instant;

use weak_euler::euler::{simulate_coupled, EulerConfig};
use weak_euler::grids::uniform_grid;
use weak_euler::models::assumptions::{check_a1_nondegeneracy, check_a1_small_jumps, probe_points};
use weak_euler::models::holder::{HolderField, DEFAULT_DEPTH};
use weak_euler::models::test_fn::{make_test_function, TestFunctionKind};
use weak_euler::models::{
    make_example1_model, ConstantCoefficients, Example1Config, FieldConfig, LoadConfig,
    ProcessModel,
};
use weak_euler::montecarlo::estimate;
use weak_euler::rates::{
    fit_order, one_step_experiment, weak_error_ladder, Kappa, LadderReference, PathBudget, RateFit,
};
use weak_euler::rng::RngStream;
use weak_euler::stable_rng::{increment, sample_positive_stable, sample_symmetric_1d, StableLaw};
use weak_euler::stats;

// Tolerances, all fixed here.
const COSINE_PATHS: u64 = 1_000_000;
const COSINE_STEPS: usize = 16;
const COSINE_SIGMAS: f64 = 3.0;
const COSINE_SECONDS: f64 = 60.0;
const KS_N: usize = 100_000;
/// 1.63 / sqrt(N) is the 1% critical value of the one-sample KS statistic.
const KS_COEFF: f64 = 1.63;
const HILL_N: usize = 1_000_000;
const HILL_K: usize = 10_000;
const HILL_TOL: f64 = 0.1;
const SELF_SIM_N: usize = 100_000;
const SELF_SIM_LEVEL: f64 = 0.01;
const LADDER_PATHS: u64 = 4096;
const SMOOTH_MIN_SLOPE: f64 = 0.75;
const SMOOTH_MIN_R2: f64 = 0.9;
const ROUGH_MIN_SLOPE: f64 = 0.5;
const ROUGH_MIN_POINTS: usize = 3;
const SLOPE_TOL: f64 = 0.25;
const ONE_STEP_PATHS: u64 = 20_000;
const ONE_STEP_STARTS: usize = 64;
const COUPLED_REL_TOL: f64 = 1e-12;
const COUPLED_PATHS: u64 = 2000;
const PLANAR_TOL: f64 = 1e-6;
const DETERMINISM_PATHS: u64 = 2048;

fn ladder() -> Vec<f64> {
    (3..=8).map(|k| 2f64.powi(-k)).collect()
}

fn rate_model(alpha: f64, beta: f64) -> ProcessModel {
    let cfg = Example1Config {
        c0: 0.5,
        c1: 0.05,
        drift: Some(FieldConfig {
            offset: 1.0,
            amplitude: 1.0,
        }),
        seed: 1,
        ..Default::default()
    };
    make_example1_model(alpha, 1, beta, &cfg).unwrap()
}

fn coupled_ladder(
    model: &ProcessModel,
    g: &(dyn Fn(&[f64]) -> f64 + Sync),
    n: u64,
    workers: usize,
) -> RateFit {
    let d = ladder();
    let delta_ref = d[d.len() - 1] / 8.0;
    let mut fit = weak_error_ladder(
        model,
        g,
        model.beta(),
        1.0,
        &d,
        &LadderReference::CoupledFine { delta_ref },
        PathBudget::fixed(n),
        1,
        workers,
    )
    .unwrap();
    let _ = fit_order(&mut fit);
    fit
}

fn fmt_fit(fit: &RateFit) -> String {
    match (fit.slope, fit.r_squared) {
        (Some(s), Some(r2)) => format!("slope {s:.3}, r^2 {r2:.4}, {} unmasked", fit.unmasked()),
        _ => format!("no slope, {} unmasked", fit.unmasked()),
    }
}

fn c1_cosine() -> (bool, String) {
    let target = (-1.0f64).exp() * 0.3f64.cos();
    let grid = uniform_grid(1.0, COSINE_STEPS).unwrap();
    let mut ok = true;
    let mut notes = Vec::new();
    for alpha in [0.5, 1.0, 1.5, 2.0] {
        let cc = ConstantCoefficients::identity(alpha, vec![0.3]);
        let cfg = EulerConfig {
            model: &cc,
            grid: &grid,
            record_path: false,
        };
        let t = Instant::now();
        let r = estimate(&cfg, &|y: &[f64]| y[0].cos(), COSINE_PATHS, 11, 1).unwrap();
        let secs = t.elapsed().as_secs_f64();
        let z = (r.mean - target).abs() / r.stderr;
        ok &= z <= COSINE_SIGMAS && secs < COSINE_SECONDS && r.overflow_count == 0;
        notes.push(format!("a={alpha}: {:.5} ({z:.2} se, {secs:.1}s)", r.mean));
    }
    (ok, format!("target {target:.5}; {}", notes.join("; ")))
}

fn c2_ks() -> (bool, String) {
    let crit = KS_COEFF / (KS_N as f64).sqrt();
    let cauchy = StableLaw::standard(1.0, 1).unwrap();
    let gauss = StableLaw::standard(2.0, 1).unwrap();
    let mut rng = RngStream::new(21, 0);
    let xs: Vec<f64> = (0..KS_N)
        .map(|_| sample_symmetric_1d(&cauchy, &mut rng).unwrap())
        .collect();
    let d1 = stats::ks_statistic(&xs, stats::cauchy_cdf);
    let xs: Vec<f64> = (0..KS_N)
        .map(|_| sample_symmetric_1d(&gauss, &mut rng).unwrap())
        .collect();
    let d2 = stats::ks_statistic(&xs, stats::gauss2_cdf);
    let xs: Vec<f64> = (0..KS_N)
        .map(|_| sample_positive_stable(0.5, &mut rng).unwrap())
        .collect();
    let d3 = stats::ks_statistic(&xs, stats::levy_half_cdf);
    (
        d1 < crit && d2 < crit && d3 < crit,
        format!("D cauchy {d1:.5}, gauss {d2:.5}, levy {d3:.5}; critical {crit:.5}"),
    )
}

fn c3_hill() -> (bool, String) {
    let mut ok = true;
    let mut notes = Vec::new();
    for alpha in [0.7, 1.3] {
        let law = StableLaw::standard(alpha, 1).unwrap();
        let mut rng = RngStream::new(31, 0);
        let xs: Vec<f64> = (0..HILL_N)
            .map(|_| sample_symmetric_1d(&law, &mut rng).unwrap().abs())
            .collect();
        let h = stats::hill_estimator(&xs, HILL_K).unwrap();
        ok &= (h - alpha).abs() <= HILL_TOL;
        notes.push(format!("a={alpha}: {h:.4}"));
    }
    (ok, notes.join(", "))
}

fn c4_self_similarity() -> (bool, String) {
    let mut ok = true;
    let mut notes = Vec::new();
    for alpha in [0.5, 1.5] {
        let law = StableLaw::standard(alpha, 1).unwrap();
        for t in [0.1, 4.0] {
            let mut a = RngStream::new(41, 0);
            let mut b = RngStream::new(41, 1);
            let xs: Vec<f64> = (0..SELF_SIM_N)
                .map(|_| increment(&law, t, &mut a).unwrap()[0])
                .collect();
            let s = t.powf(1.0 / alpha);
            let ys: Vec<f64> = (0..SELF_SIM_N)
                .map(|_| s * increment(&law, 1.0, &mut b).unwrap()[0])
                .collect();
            let d = stats::ks_two_sample(&xs, &ys);
            ok &= stats::ks_two_sample_passes(&xs, &ys, SELF_SIM_LEVEL);
            notes.push(format!("a={alpha},t={t}: D {d:.5}"));
        }
    }
    (ok, notes.join(", "))
}

fn c5_smooth() -> (bool, String) {
    let m = rate_model(1.5, 2.5);
    let g = make_test_function(&TestFunctionKind::Smooth, 1, 1.5, 2.5, 1).unwrap();
    let t = Instant::now();
    let fit = coupled_ladder(&m, &|y: &[f64]| g.eval(y), LADDER_PATHS, 1);
    let ok = fit.slope.is_some_and(|s| s >= SMOOTH_MIN_SLOPE)
        && fit.r_squared.is_some_and(|r| r >= SMOOTH_MIN_R2);
    (
        ok,
        format!(
            "kappa 1; {} ({:.1}s)",
            fmt_fit(&fit),
            t.elapsed().as_secs_f64()
        ),
    )
}

fn c6_rough() -> (bool, String) {
    let m = rate_model(2.0, 1.5);
    let g = make_test_function(&TestFunctionKind::Weierstrass, 1, 2.0, 1.5, 1).unwrap();
    assert_eq!(g.regularity(), 3.5);
    let t = Instant::now();
    let fit = coupled_ladder(&m, &|y: &[f64]| g.eval(y), LADDER_PATHS, 1);
    let errs = fit.unmasked_errors_by_decreasing_delta();
    let monotone = errs.windows(2).all(|w| w[1] < w[0]);
    let ok = fit.kappa_predicted == Kappa::Order(0.75)
        && fit.unmasked() >= ROUGH_MIN_POINTS
        && monotone
        && fit.slope.is_some_and(|s| s >= ROUGH_MIN_SLOPE);
    (
        ok,
        format!(
            "kappa 0.75; {}, monotone {monotone} ({:.1}s)",
            fmt_fit(&fit),
            t.elapsed().as_secs_f64()
        ),
    )
}

fn c7_one_step() -> (bool, String) {
    let (alpha, beta) = (1.5, 0.7);
    let cfg = Example1Config {
        c0: 1.0,
        c1: 0.3,
        seed: 7,
        ..Default::default()
    };
    let m = make_example1_model(alpha, 1, beta, &cfg).unwrap();
    let f = HolderField::weierstrass(1, beta, 0.0, 1.0, DEFAULT_DEPTH, &mut RngStream::new(7, 99))
        .unwrap();
    let starts = probe_points(1, ONE_STEP_STARTS, 2.0, 7);
    let mut fit = one_step_experiment(
        &m,
        &|y: &[f64]| f.eval(y),
        Some(beta),
        &starts,
        &ladder(),
        ONE_STEP_PATHS,
        7,
        1,
    )
    .unwrap();
    let _ = fit_order(&mut fit);
    let k = beta / alpha;
    let ok = fit.slope.is_some_and(|s| s >= k - SLOPE_TOL);
    (ok, format!("kappa {k:.4}; {}", fmt_fit(&fit)))
}

fn c8_coupled() -> (bool, String) {
    let fine = uniform_grid(1.0, 64).unwrap();
    let coarse = uniform_grid(1.0, 8).unwrap();
    let mut worst = 0.0f64;
    for alpha in [0.5, 1.0, 1.5, 2.0] {
        let cc = ConstantCoefficients {
            alpha,
            drift: (alpha > 1.0).then(|| vec![0.4, -0.2]),
            mixing: vec![1.0, 0.3, -0.2, 0.8],
            loads: (alpha > 0.6).then(|| vec![0.5, 0.25]),
            sub_indices: if alpha > 0.6 {
                vec![0.6 * alpha, 0.3]
            } else {
                Vec::new()
            },
            x0: vec![0.1, -0.4],
        };
        let m = ProcessModel::constant(&cc).unwrap();
        for p in 0..COUPLED_PATHS {
            let (yf, yc) =
                simulate_coupled(&m, &fine, &coarse, &mut RngStream::new(81, p)).unwrap();
            for (a, b) in yf.iter().zip(&yc) {
                worst = worst.max((a - b).abs() / a.abs().max(1.0));
            }
        }
    }
    (
        worst <= COUPLED_REL_TOL,
        format!("max relative gap {worst:.3e}"),
    )
}

fn c9_assumptions() -> (bool, String) {
    let probes1 = probe_points(1, 16, 3.0, 9);
    let one = check_a1_nondegeneracy(
        &ProcessModel::constant(&ConstantCoefficients::identity(1.3, vec![0.0])).unwrap(),
        &probes1,
        16,
    )
    .unwrap();
    let probes2 = probe_points(2, 16, 3.0, 9);
    let planar = check_a1_nondegeneracy(
        &ProcessModel::constant(&ConstantCoefficients::identity(1.0, vec![0.0, 0.0])).unwrap(),
        &probes2,
        16,
    )
    .unwrap();
    let cfg = Example1Config {
        loads: Some(LoadConfig {
            offset: 0.5,
            amplitude: 0.2,
            sub_indices: vec![0.4, 1.1],
        }),
        seed: 9,
        ..Default::default()
    };
    let m = make_example1_model(1.6, 2, 0.6, &cfg).unwrap();
    let probes = probe_points(2, 1000, 4.0, 9);
    let jumps: Vec<f64> = (1..=6)
        .map(|e| check_a1_small_jumps(&m, &probes, 10f64.powi(-e)).unwrap())
        .collect();
    let monotone =
        jumps.windows(2).all(|w| w[1] < w[0]) && jumps[5] < 0.01 * jumps[0] && jumps[5] > 0.0;
    (
        one == 2.0 && (planar - 4.0).abs() <= PLANAR_TOL && monotone,
        format!(
            "d=1: {one}, d=2: {planar:.9}, small jumps {:.3e} -> {:.3e}",
            jumps[0], jumps[5]
        ),
    )
}

fn c10_determinism() -> (bool, String) {
    let grid = uniform_grid(1.0, 32).unwrap();
    let m = rate_model(1.5, 2.5);
    let g = make_test_function(&TestFunctionKind::Smooth, 1, 1.5, 2.5, 1).unwrap();
    let gf = |y: &[f64]| g.eval(y);
    let cfg = EulerConfig {
        model: &m,
        grid: &grid,
        record_path: false,
    };
    let a = estimate(&cfg, &gf, DETERMINISM_PATHS * 4, 5, 1).unwrap();
    let b = estimate(&cfg, &gf, DETERMINISM_PATHS * 4, 5, 8).unwrap();
    let fa = coupled_ladder(&m, &gf, DETERMINISM_PATHS, 1);
    let fb = coupled_ladder(&m, &gf, DETERMINISM_PATHS, 8);
    let same_mean =
        a.mean.to_bits() == b.mean.to_bits() && a.stderr.to_bits() == b.stderr.to_bits();
    let same_slope = fa.slope.map(f64::to_bits) == fb.slope.map(f64::to_bits) && fa.slope.is_some();
    (
        same_mean && same_slope,
        format!("mean {:.17}, slope {:?}", a.mean, fa.slope),
    )
}

type Criterion = fn() -> (bool, String);

fn main() {
    let criteria: [(&str, Criterion); 10] = [
        ("1 universal cosine oracle", c1_cosine),
        ("2 sampler KS tests", c2_ks),
        ("3 Hill tail index", c3_hill),
        ("4 self-similarity", c4_self_similarity),
        ("5 smooth-regime rate", c5_smooth),
        ("6 rough-regime rate", c6_rough),
        ("7 one-step order", c7_one_step),
        ("8 coupled exactness", c8_coupled),
        ("9 nondegeneracy and small-jump checks", c9_assumptions),
        ("10 determinism across worker counts", c10_determinism),
    ];
    let filter: Vec<String> = std::env::args()
        .skip(1)
        .filter(|a| !a.starts_with('-'))
        .collect();
    let mut failed = 0;
    for (name, f) in criteria {
        if !filter.is_empty() && !filter.iter().any(|p| name.contains(p.as_str())) {
            continue;
        }
        let (ok, detail) = f();
        println!("[{}] {name}: {detail}", if ok { "PASS" } else { "FAIL" });
        failed += usize::from(!ok);
    }
    if failed > 0 {
        println!("{failed} acceptance criteria failed");
        std::process::exit(1);
    }
}
