//! Acceptance suite. Prints one PASS/FAIL line per criterion and exits
//! non-zero if any criterion fails.

use std::f64::consts::{PI, SQRT_2};
use std::time::Instant;

use hyperbar_core::calibration::{bootstrap_calibrate, synthetic_quotes, CalibrationSetup};
use hyperbar_core::montecarlo::{mc_european, McConfig};
use hyperbar_core::pricing::{did_book, did_price, dic_book, BarrierContract, GreekMethod, PricingParams};
use hyperbar_core::sampling::{random_model, SamplingBounds};
use hyperbar_core::transforms::{
    black_scholes_call, carr_madan_call, european_calls_quadrature, frfft, talbot_invert, FrfftPlan,
};
use hyperbar_core::wiener_hopf::{assemble_factorization, build_generator, det_k_product, period_roots, RootOptions};
use hyperbar_core::{Complex64 as C64, JumpFamily, ModelPeriod, PiecewiseModel};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

type Outcome = Result<String, String>;

const SPOT: f64 = 4150.0;
const TABLE1: [(f64, f64, f64, f64); 4] = [
    (0.5, 0.0995, 0.0371, 11.1819),
    (0.5, 0.0759, 0.2091, 9.9540),
    (2.0, 0.0786, 0.4738, 7.0322),
    (2.0, 0.0858, 0.8084, 0.2361),
];

// Digital book, spots 92% to 118% in steps of 2%, barrier 90%.
const T2_PRICE: [f64; 14] =
    [0.7261, 0.6446, 0.5893, 0.5478, 0.5140, 0.4850, 0.4592, 0.4358, 0.4144, 0.3946, 0.3762, 0.3592, 0.3433, 0.3285];
const T2_CI: [(f64, f64); 14] = [
    (0.7000, 0.7499),
    (0.6137, 0.6735),
    (0.5566, 0.6207),
    (0.5143, 0.5805),
    (0.4800, 0.5475),
    (0.4506, 0.5189),
    (0.4245, 0.4932),
    (0.4008, 0.4697),
    (0.3795, 0.4483),
    (0.3599, 0.4285),
    (0.3518, 0.4010),
    (0.3250, 0.3917),
    (0.3095, 0.3771),
    (0.3012, 0.3632),
];
/// Units of 1e-3.
const T2_DELTA: [f64; 14] =
    [-1.226, -0.812, -0.577, -0.450, -0.374, -0.328, -0.294, -0.269, -0.247, -0.229, -0.212, -0.198, -0.184, -0.172];
/// Units of 1e-6; the printed numbers are only consistent with this scale.
const T2_GAMMA: [f64; 14] = [7.34, 3.64, 1.92, 1.09, 0.67, 0.46, 0.34, 0.28, 0.24, 0.21, 0.19, 0.17, 0.15, 0.14];

// Call book, strikes 80% to 120% in steps of 2%, T = 1.
const T3_PRICE: [f64; 21] = [
    111.13, 93.48, 77.14, 62.28, 49.08, 37.63, 28.11, 20.94, 15.11, 10.66, 7.36, 4.97, 3.28, 2.12, 1.35, 0.84, 0.51,
    0.30, 0.18, 0.10, 0.06,
];
const T3_CI: [(f64, f64); 21] = [
    (108.85, 111.20),
    (91.46, 93.55),
    (75.35, 77.19),
    (60.71, 62.33),
    (47.71, 49.13),
    (36.7, 37.80),
    (27.43, 28.46),
    (20.13, 21.01),
    (14.45, 15.16),
    (10.12, 10.72),
    (6.92, 7.41),
    (4.63, 5.02),
    (3.03, 3.34),
    (1.94, 2.18),
    (1.22, 1.41),
    (0.74, 0.89),
    (0.47, 0.54),
    (0.25, 0.34),
    (0.16, 0.19),
    (0.08, 0.11),
    (0.03, 0.06),
];
/// Units of 1e-1.
const T3_DELTA: [f64; 21] = [
    -2.458, -2.124, -1.808, -1.514, -1.242, -0.991, -0.783, -0.599, -0.448, -0.326, -0.231, -0.159, -0.107, -0.070,
    -0.045, -0.028, -0.017, -0.010, -0.006, -0.003, -0.002,
];
/// Units of 1e-4.
const T3_GAMMA: [f64; 21] = [
    9.49, 8.43, 7.45, 6.47, 5.57, 4.65, 3.88, 3.07, 2.45, 1.85, 1.37, 0.94, 0.64, 0.43, 0.28, 0.23, 0.18, 0.13, 0.10,
    0.07, 0.03,
];

fn model(rows: &[(f64, f64, f64, f64)]) -> PiecewiseModel {
    let periods = rows
        .iter()
        .map(|&(t, s, p1, p2)| {
            ModelPeriod::new(
                t,
                s,
                vec![],
                vec![JumpFamily::from_density_amplitude(p1, 3.0), JumpFamily::from_density_amplitude(p2, 10.0)],
            )
        })
        .collect();
    PiecewiseModel::risk_neutral(0.03, 0.0, SPOT, periods).unwrap()
}

fn t2_spots() -> Vec<f64> {
    (0..14).map(|i| SPOT * (0.92 + 0.02 * i as f64)).collect()
}

fn t3_strikes() -> Vec<f64> {
    (0..21).map(|i| SPOT * (0.80 + 0.02 * i as f64)).collect()
}

fn ncdf(x: f64) -> f64 {
    0.5 * libm::erfc(-x / SQRT_2)
}

fn err(e: impl std::fmt::Display) -> String {
    e.to_string()
}

/// `|got - want|` within `rel·|want|` or half the last printed digit.
fn close_printed(got: f64, want: f64, rel: f64, half_unit: f64) -> bool {
    (got - want).abs() <= (rel * want.abs()).max(half_unit)
}

fn c1_table2_prices() -> Outcome {
    let m = model(&TABLE1);
    let c = BarrierContract::digital(0.9 * SPOT, m.durations());
    let p = PricingParams { greeks: GreekMethod::Analytic, ..PricingParams::digital() };
    let start = Instant::now();
    let book = did_book(&m, &c, &t2_spots(), &p).map_err(err)?;
    let secs = start.elapsed().as_secs_f64();
    let mut worst: f64 = 0.0;
    let mut bad = Vec::new();
    for (i, r) in book.iter().enumerate() {
        let d = (r.price - T2_PRICE[i]).abs();
        worst = worst.max(d);
        let (lo, hi) = T2_CI[i];
        if d >= 5e-3 || !(lo <= r.price && r.price <= hi) {
            bad.push(format!("{}%: {:.4}", 92 + 2 * i, r.price));
        }
    }
    let msg = format!("max |Δ| {worst:.2e} (tol 5e-3), {} outside CI, {secs:.2} s (limit 60 s)", bad.len());
    if bad.is_empty() && secs < 60.0 {
        Ok(msg)
    } else {
        Err(format!("{msg}; {}", bad.join(", ")))
    }
}

fn c2_table2_greeks() -> Outcome {
    let m = model(&TABLE1);
    let c = BarrierContract::digital(0.9 * SPOT, m.durations());
    let book = did_book(&m, &c, &t2_spots(), &PricingParams::digital()).map_err(err)?;
    let mut bad = Vec::new();
    let (mut wd, mut wg): (f64, f64) = (0.0, 0.0);
    for (i, r) in book.iter().enumerate() {
        let d = r.delta.unwrap() / 1e-3;
        let g = r.gamma.unwrap() / 1e-6;
        wd = wd.max((d / T2_DELTA[i] - 1.0).abs());
        wg = wg.max((g / T2_GAMMA[i] - 1.0).abs());
        if !close_printed(d, T2_DELTA[i], 0.02, 5e-4) || !close_printed(g, T2_GAMMA[i], 0.02, 5e-3) {
            bad.push(format!("{}%: delta {d:.4} gamma {g:.4}", 92 + 2 * i));
        }
    }
    let msg = format!("max rel delta {wd:.2e}, gamma {wg:.2e} (tol 2% or half a printed digit)");
    if bad.is_empty() {
        Ok(msg)
    } else {
        Err(format!("{msg}; {}", bad.join(", ")))
    }
}

fn c3_table3() -> Outcome {
    let m = model(&TABLE1[..2]);
    let c = BarrierContract::call(0.9 * SPOT, SPOT, vec![0.5, 0.5]);
    let p = PricingParams { talbot_m: 7, fft_n: 1024, fft_delta: 0.25, damp_alpha: 0.75, ..PricingParams::call() };
    let book = dic_book(&m, &c, &t3_strikes(), &p).map_err(err)?;
    let mut price_bad = Vec::new();
    let mut greek_bad = Vec::new();
    for (i, r) in book.iter().enumerate() {
        let k = 80 + 2 * i;
        let (lo, hi) = T3_CI[i];
        let tol = (0.02 * T3_PRICE[i]).max(0.05);
        if (r.price - T3_PRICE[i]).abs() > tol || !(lo <= r.price && r.price <= hi) {
            price_bad.push(format!("{k}%: {:.4}", r.price));
        }
        let d = r.delta.unwrap() / 1e-1;
        let g = r.gamma.unwrap() / 1e-4;
        let d_ok = T3_DELTA[i].abs() * 1e-1 <= 1e-8 || close_printed(d, T3_DELTA[i], 0.05, 5e-4);
        let g_ok = T3_GAMMA[i].abs() * 1e-4 <= 1e-8 || close_printed(g, T3_GAMMA[i], 0.05, 5e-3);
        if !d_ok {
            greek_bad.push(format!("{k}% delta {d:.4} vs {}", T3_DELTA[i]));
        }
        if !g_ok {
            greek_bad.push(format!("{k}% gamma {g:.3} vs {}", T3_GAMMA[i]));
        }
    }
    let msg = format!(
        "prices: {} of 21 off (tol max(2%, 0.05) and CI); greeks: {} of 42 off (tol 5%)",
        price_bad.len(),
        greek_bad.len()
    );
    if price_bad.is_empty() && greek_bad.is_empty() {
        Ok(msg)
    } else {
        Err(format!("{msg}; {}", price_bad.into_iter().chain(greek_bad).collect::<Vec<_>>().join(", ")))
    }
}

fn random_models() -> Vec<PiecewiseModel> {
    let mut rng = ChaCha8Rng::seed_from_u64(2024);
    let bounds = SamplingBounds { max_periods: 4, max_families: 3, ..SamplingBounds::default() };
    (0..100).map(|_| random_model(&mut rng, &bounds)).collect()
}

fn c4_determinant(models: &[PiecewiseModel]) -> Outcome {
    let mut rng = ChaCha8Rng::seed_from_u64(4);
    let mut worst: f64 = 0.0;
    for m in models {
        let q: Vec<C64> =
            (0..m.num_periods()).map(|_| C64::new(0.05 + 5.0 * rng.random::<f64>(), 6.0 * rng.random::<f64>() - 3.0)).collect();
        let b = build_generator(m, &q).map_err(err)?;
        for _ in 0..100 {
            let s = C64::new(20.0 * rng.random::<f64>() - 10.0, 20.0 * rng.random::<f64>() - 10.0);
            let det = b.k_matrix(s).determinant().norm();
            let expect = det_k_product(m, &q, s);
            worst = worst.max((det - expect).abs() / expect);
        }
    }
    let msg = format!("10000 evaluations, max rel error {worst:.2e} (tol 1e-8)");
    if worst < 1e-8 {
        Ok(msg)
    } else {
        Err(msg)
    }
}

fn c5_roots(models: &[PiecewiseModel]) -> Outcome {
    let mut rng = ChaCha8Rng::seed_from_u64(5);
    let mut failures = Vec::new();
    let mut count = 0;
    for (mi, m) in models.iter().enumerate() {
        for p in m.periods() {
            let q = 0.01 + 10.0 * rng.random::<f64>();
            count += 1;
            let r = match period_roots(p, C64::new(q, 0.0), &RootOptions::default()) {
                Ok(r) => r,
                Err(e) => {
                    failures.push(format!("model {mi}: {e}"));
                    continue;
                }
            };
            let ladder = |roots: &[C64], rates: Vec<f64>| -> bool {
                if roots.len() != rates.len() + 1 || roots.iter().any(|z| z.im != 0.0 || !(z.re > 0.0)) {
                    return false;
                }
                let mut x: Vec<f64> = roots.iter().map(|z| z.re).collect();
                let mut a = rates;
                x.sort_by(f64::total_cmp);
                a.sort_by(f64::total_cmp);
                // 0 < ρ₁ < α₁ < ρ₂ < … < α_n < ρ_{n+1}
                a.iter().enumerate().all(|(k, &ak)| x[k] < ak && ak < x[k + 1])
            };
            let plus_ok = ladder(&r.plus, p.pos_jumps.iter().map(|f| f.rate).collect());
            let minus: Vec<C64> = r.minus.iter().map(|z| -z).collect();
            let minus_ok = ladder(&minus, p.neg_jumps.iter().map(|f| f.rate).collect());
            if !(plus_ok && minus_ok) {
                failures.push(format!("model {mi} at q = {q}"));
            }
        }
    }
    let msg = format!("{count} periods, {} failures", failures.len());
    if failures.is_empty() {
        Ok(msg)
    } else {
        Err(format!("{msg}; {}", failures.join(", ")))
    }
}

fn c6_wiener_hopf(models: &[PiecewiseModel]) -> Outcome {
    let mut rng = ChaCha8Rng::seed_from_u64(6);
    let (mut res, mut eta): (f64, f64) = (0.0, 0.0);
    let mut failures = Vec::new();
    for (mi, m) in models.iter().enumerate() {
        let q: Vec<C64> = (0..m.num_periods()).map(|_| C64::new(0.05 + 5.0 * rng.random::<f64>(), 0.0)).collect();
        match assemble_factorization(m, &q) {
            Ok(f) => {
                for r in [f.residual_plus, f.residual_minus] {
                    res = res.max(r.0).max(r.1);
                }
                eta = eta.max(f.plus.eta_violation()).max(f.minus.eta_violation());
            }
            Err(e) => failures.push(format!("model {mi}: {e}")),
        }
    }
    let msg = format!("max residual {res:.2e} (tol 1e-8), max η violation {eta:.2e} (tol 1e-10)");
    if failures.is_empty() && res < 1e-8 && eta <= 1e-10 {
        Ok(msg)
    } else {
        Err(format!("{msg}; {}", failures.join(", ")))
    }
}

fn c7_brownian() -> Outcome {
    // (σ, r, d, H/S0, T); the drift is r - d - σ²/2.
    let cases = [
        (0.2, 0.03, 0.0, 0.9, 1.0),
        (0.1, 0.05, 0.0, 0.95, 0.5),
        (0.3, 0.0, 0.02, 0.8, 2.0),
        (0.15, 0.08, 0.0, 0.97, 0.25),
        (0.4, 0.02, 0.01, 0.7, 3.0),
        (0.25, 0.0, 0.06, 0.85, 1.5),
        (0.12, 0.01, 0.0, 0.99, 0.1),
        (0.5, 0.04, 0.0, 0.6, 1.0),
        (0.08, 0.1, 0.0, 0.9, 5.0),
        (0.35, 0.0, 0.0, 0.75, 0.75),
    ];
    let p = PricingParams { talbot_m: 16, ..PricingParams::digital() };
    let mut worst: f64 = 0.0;
    for (sigma, r, d, hb, t) in cases {
        let m = PiecewiseModel::risk_neutral(r, d, 100.0, vec![ModelPeriod::new(t, sigma, vec![], vec![])]).unwrap();
        let got = did_price(&m, &BarrierContract::digital(100.0 * hb, vec![t]), &p).map_err(err)?.price;
        let mu = r - d - 0.5 * sigma * sigma;
        let h = -f64::ln(hb);
        let st = sigma * t.sqrt();
        let hit = ncdf((-h - mu * t) / st) + (-2.0 * mu * h / (sigma * sigma)).exp() * ncdf((-h + mu * t) / st);
        worst = worst.max((got - (-r * t).exp() * hit).abs());
    }
    let msg = format!("10 cases, max |Δ| {worst:.2e} (tol 1e-6)");
    if worst < 1e-6 {
        Ok(msg)
    } else {
        Err(msg)
    }
}

fn c8_talbot() -> Outcome {
    let a = 1.5;
    type Pair = (&'static str, fn(C64, f64) -> C64, fn(f64, f64) -> f64);
    let library: [Pair; 4] = [
        ("1/q", |q, _| 1.0 / q, |_, _| 1.0),
        ("1/q²", |q, _| 1.0 / (q * q), |t, _| t),
        ("1/(q+a)", |q, a| 1.0 / (q + a), |t, a| (-a * t).exp()),
        ("q/(q²+1)", |q, _| q / (q * q + 1.0), |t, _| t.cos()),
    ];
    let mut bad = Vec::new();
    let mut ratio: f64 = 0.0;
    for m in 4..=10 {
        let tol = 10f64.powf(-0.6 * m as f64 + 1.0);
        for (name, fhat, f) in &library {
            for t in [0.5, 1.0, 2.0] {
                let got = talbot_invert(|q| fhat(q[0], a), &[t], m).map_err(err)?;
                let want = f(t, a);
                let rel = (got - want).abs() / want.abs();
                ratio = ratio.max(rel / tol);
                if rel > tol {
                    bad.push(format!("M={m} {name} t={t}: {rel:.1e}"));
                }
            }
        }
    }
    let msg = format!("M = 4..10, worst error / bound {ratio:.2}");
    if bad.is_empty() {
        Ok(msg)
    } else {
        Err(format!("{msg}; {}", bad.join(", ")))
    }
}

fn c9_frfft() -> Outcome {
    let mut rng = ChaCha8Rng::seed_from_u64(9);
    let mut worst: f64 = 0.0;
    for n in [16usize, 64, 256] {
        for _ in 0..5 {
            let x: Vec<C64> = (0..n).map(|_| C64::new(rng.random::<f64>() - 0.5, rng.random::<f64>() - 0.5)).collect();
            let nu = 0.1 * rng.random::<f64>();
            let fast = frfft(&x, nu).map_err(err)?;
            for (k, z) in fast.iter().enumerate() {
                let direct: C64 =
                    x.iter().enumerate().map(|(j, xj)| xj * C64::from_polar(1.0, -2.0 * PI * (j * k) as f64 * nu)).sum();
                worst = worst.max((z - direct).norm());
            }
        }
    }
    let msg = format!("N ∈ {{16, 64, 256}}, max |Δ| {worst:.2e} (tol 1e-10)");
    if worst < 1e-10 {
        Ok(msg)
    } else {
        Err(msg)
    }
}

fn c10_european() -> Outcome {
    let s0 = 100.0;
    let mut bs_worst: f64 = 0.0;
    for (sigma, r, d, t) in [(0.2, 0.03, 0.0, 1.0), (0.1, 0.05, 0.02, 0.25), (0.4, 0.0, 0.0, 3.0)] {
        let m = PiecewiseModel::risk_neutral(r, d, s0, vec![ModelPeriod::new(t, sigma, vec![], vec![])]).unwrap();
        let strikes: Vec<f64> = (0..9).map(|i| 70.0 + 7.5 * i as f64).collect();
        let quad = european_calls_quadrature(&m, 1, &strikes, 0.75).map_err(err)?;
        for (k, p) in strikes.iter().zip(quad) {
            bs_worst = bs_worst.max((p - black_scholes_call(s0, *k, t, r, d, sigma)).abs());
        }
        let grid = carr_madan_call(&m, 1, &FrfftPlan::new(4096, 0.1, 0.5, 0.75).map_err(err)?).map_err(err)?;
        for (k, p) in grid.strikes().iter().zip(&grid.prices) {
            if (0.7 * s0..=1.3 * s0).contains(k) {
                bs_worst = bs_worst.max((p - black_scholes_call(s0, *k, t, r, d, sigma)).abs());
            }
        }
    }
    let m = model(&TABLE1);
    let strikes: Vec<f64> = [0.8, 0.9, 1.0, 1.1, 1.2].iter().map(|x| x * SPOT).collect();
    // Terminal values are exact at any step, so one step per period suffices.
    let cfg = McConfig { paths: 200_000, dt: 0.5, seed: 42, ..McConfig::default() };
    let mut outside = Vec::new();
    for i in [1, 2] {
        let prices = european_calls_quadrature(&m, i, &strikes, 0.75).map_err(err)?;
        let est = mc_european(&m, i, &strikes, &cfg).map_err(err)?;
        for ((k, p), e) in strikes.iter().zip(prices).zip(est) {
            if !e.contains(p) {
                outside.push(format!("T_{i} K={k}: {p:.3} vs ({:.3}, {:.3})", e.ci_low, e.ci_high));
            }
        }
    }
    let msg = format!("BS max |Δ| {bs_worst:.2e} (tol {:.0e}), {} of 10 outside MC CI", 1e-6 * s0, outside.len());
    if bs_worst < 1e-6 * s0 && outside.is_empty() {
        Ok(msg)
    } else {
        Err(format!("{msg}; {}", outside.join(", ")))
    }
}

fn c11_calibration() -> Outcome {
    let mut rng = ChaCha8Rng::seed_from_u64(11);
    let strikes: Vec<f64> = (0..20).map(|i| SPOT * (0.7 + 0.03 * i as f64)).collect();
    let mut worst: f64 = 0.0;
    for _ in 0..5 {
        let rows: Vec<(f64, f64, f64, f64)> = (0..2)
            .map(|_| {
                let u = |rng: &mut ChaCha8Rng, lo: f64, hi: f64| lo + (hi - lo) * rng.random::<f64>();
                (0.5, u(&mut rng, 0.06, 0.25), u(&mut rng, 0.2, 2.0), u(&mut rng, 1.0, 12.0))
            })
            .collect();
        let truth = model(&rows);
        let quotes = synthetic_quotes(&truth, &strikes, 0.75).map_err(err)?;
        let setup = CalibrationSetup::new(truth.durations(), 0.03, 0.0, SPOT, vec![3.0, 10.0]);
        let res = bootstrap_calibrate(&quotes, &setup).map_err(err)?;
        for (fit, row) in res.fits.iter().zip(&rows) {
            for (got, want) in fit.params.iter().zip([row.1, row.2, row.3]) {
                worst = worst.max((got / want - 1.0).abs());
            }
        }
    }
    let msg = format!("5 models, max rel parameter error {worst:.2e} (tol 5e-2)");
    if worst < 0.05 {
        Ok(msg)
    } else {
        Err(msg)
    }
}

fn c12_greeks_vs_fd() -> Outcome {
    let fd = GreekMethod::FiniteDifference { bump: 1e-3 };
    let rel = |a: f64, b: f64| if a.abs() <= 1e-8 { 0.0 } else { (a - b).abs() / a.abs() };
    let mut worst: f64 = 0.0;

    let m = model(&TABLE1);
    let c = BarrierContract::digital(0.9 * SPOT, m.durations());
    let an = did_book(&m, &c, &t2_spots(), &PricingParams::digital()).map_err(err)?;
    let num = did_book(&m, &c, &t2_spots(), &PricingParams { greeks: fd, ..PricingParams::digital() }).map_err(err)?;
    for (a, n) in an.iter().zip(&num) {
        worst = worst.max(rel(a.delta.unwrap(), n.delta.unwrap())).max(rel(a.gamma.unwrap(), n.gamma.unwrap()));
    }
    let did_worst = worst;

    let m = model(&TABLE1[..2]);
    let c = BarrierContract::call(0.9 * SPOT, SPOT, vec![0.5, 0.5]);
    let an = dic_book(&m, &c, &t3_strikes(), &PricingParams::call()).map_err(err)?;
    let num = dic_book(&m, &c, &t3_strikes(), &PricingParams { greeks: fd, ..PricingParams::call() }).map_err(err)?;
    let mut dic_worst: f64 = 0.0;
    for (a, n) in an.iter().zip(&num) {
        dic_worst = dic_worst.max(rel(a.delta.unwrap(), n.delta.unwrap())).max(rel(a.gamma.unwrap(), n.gamma.unwrap()));
    }
    let msg = format!("max rel DID {did_worst:.2e}, DIC {dic_worst:.2e} (tol 2e-2)");
    if did_worst < 2e-2 && dic_worst < 2e-2 {
        Ok(msg)
    } else {
        Err(msg)
    }
}

fn main() {
    let models = random_models();
    let criteria: Vec<(&str, Box<dyn Fn() -> Outcome + '_>)> = vec![
        ("digital book prices and runtime", Box::new(c1_table2_prices)),
        ("digital book Greeks", Box::new(c2_table2_greeks)),
        ("call book prices and Greeks", Box::new(c3_table3)),
        ("determinant identity", Box::new(|| c4_determinant(&models))),
        ("root counts and interlacing", Box::new(|| c5_roots(&models))),
        ("Wiener-Hopf residuals", Box::new(|| c6_wiener_hopf(&models))),
        ("Brownian first passage", Box::new(c7_brownian)),
        ("Talbot accuracy", Box::new(c8_talbot)),
        ("fractional FFT", Box::new(c9_frfft)),
        ("European prices", Box::new(c10_european)),
        ("calibration round trip", Box::new(c11_calibration)),
        ("Greeks vs finite differences", Box::new(c12_greeks_vs_fd)),
    ];
    let mut failed = 0;
    for (i, (name, f)) in criteria.iter().enumerate() {
        let start = Instant::now();
        let outcome = f();
        let secs = start.elapsed().as_secs_f64();
        match outcome {
            Ok(msg) => println!("criterion {:>2} PASS  {name}: {msg} [{secs:.1} s]", i + 1),
            Err(msg) => {
                failed += 1;
                println!("criterion {:>2} FAIL  {name}: {msg} [{secs:.1} s]", i + 1);
            }
        }
    }
    println!("acceptance: {} of {} criteria pass", criteria.len() - failed, criteria.len());
    if failed > 0 {
        std::process::exit(1);
    }
}
