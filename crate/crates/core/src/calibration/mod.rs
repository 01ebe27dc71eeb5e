//! Bootstrap calibration to European call quotes, one maturity at a time.
//!
//! Period `i` is fitted to the quotes at `T_i` with periods `1..i` frozen.
//! Free parameters per period are `σ` and the jump amplitudes `π` of the
//! fixed rates, where a family with amplitude `π` and rate `α` has Lévy
//! density `π e^{-α|x|}` (intensity `π/α`). Positive jumps are only fitted
//! on request.

mod nelder_mead;

use alloc::{format, vec, vec::Vec};

use log::warn;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

pub use nelder_mead::{minimize, Minimum, NelderMeadOptions};

use crate::model::{JumpFamily, ModelPeriod, PiecewiseModel};
use crate::transforms::european_calls_quadrature;
use crate::{Error, Result};

pub const SIGMA_BOUNDS: (f64, f64) = (1e-4, 2.0);
pub const AMPLITUDE_BOUNDS: (f64, f64) = (0.0, 100.0);
/// Quote maturities match schedule maturities up to this.
pub const MATURITY_TOL: f64 = 1e-6;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct MarketQuote {
    pub maturity: f64,
    pub strike: f64,
    pub price: f64,
    pub implied_vol: Option<f64>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct CalibrationSetup {
    /// Period lengths.
    pub schedule: Vec<f64>,
    pub r: f64,
    pub d: f64,
    pub spot: f64,
    pub alpha_plus: Vec<f64>,
    pub alpha_minus: Vec<f64>,
    /// Fit positive amplitudes too; otherwise they are held at zero.
    pub fit_positive: bool,
    pub multistarts: usize,
    pub seed: u64,
    pub damp_alpha: f64,
    pub optimizer: NelderMeadOptions,
}

impl CalibrationSetup {
    pub fn new(schedule: Vec<f64>, r: f64, d: f64, spot: f64, alpha_minus: Vec<f64>) -> Self {
        CalibrationSetup {
            schedule,
            r,
            d,
            spot,
            alpha_plus: Vec::new(),
            alpha_minus,
            fit_positive: false,
            multistarts: 5,
            seed: 7,
            damp_alpha: 0.75,
            optimizer: NelderMeadOptions::default(),
        }
    }

    fn maturities(&self) -> Vec<f64> {
        let mut t = 0.0;
        self.schedule
            .iter()
            .map(|d| {
                t += d;
                t
            })
            .collect()
    }

    fn n_params(&self) -> usize {
        1 + self.alpha_minus.len() + if self.fit_positive { self.alpha_plus.len() } else { 0 }
    }

    /// Period from `[σ, π⁻..., π⁺...]`.
    fn period(&self, i: usize, x: &[f64]) -> ModelPeriod {
        let nm = self.alpha_minus.len();
        let neg = self.alpha_minus.iter().zip(&x[1..1 + nm]).map(|(&a, &p)| JumpFamily::from_density_amplitude(p, a)).collect();
        let pos = self
            .alpha_plus
            .iter()
            .enumerate()
            .map(|(k, &a)| {
                let p = if self.fit_positive { x[1 + nm + k] } else { 0.0 };
                JumpFamily::from_density_amplitude(p, a)
            })
            .collect();
        ModelPeriod::new(self.schedule[i], x[0], pos, neg)
    }

    fn bounds(&self) -> (Vec<f64>, Vec<f64>) {
        let n = self.n_params();
        let mut lo = vec![AMPLITUDE_BOUNDS.0; n];
        let mut hi = vec![AMPLITUDE_BOUNDS.1; n];
        lo[0] = SIGMA_BOUNDS.0;
        hi[0] = SIGMA_BOUNDS.1;
        (lo, hi)
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct MaturityFit {
    pub maturity: f64,
    /// `[σ, π⁻..., π⁺...]` as fitted.
    pub params: Vec<f64>,
    pub rmse: f64,
    pub evals: usize,
    pub converged: bool,
    /// Best objective after each simplex cycle of the winning start.
    pub trace: Vec<f64>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct CalibrationResult {
    pub model: PiecewiseModel,
    pub rmse: f64,
    pub arpe: f64,
    pub fits: Vec<MaturityFit>,
}

impl CalibrationResult {
    pub fn converged(&self) -> bool {
        self.fits.iter().all(|f| f.converged)
    }
}

/// Quotes per schedule maturity, sorted by strike. Duplicate strikes keep
/// the last quote.
pub fn group_quotes(quotes: &[MarketQuote], maturities: &[f64]) -> Result<Vec<Vec<MarketQuote>>> {
    let mut groups: Vec<Vec<MarketQuote>> = vec![Vec::new(); maturities.len()];
    for q in quotes {
        if !(q.strike > 0.0 && q.price > 0.0 && q.strike.is_finite() && q.price.is_finite()) {
            return Err(Error::input(format!("quote at T = {}, K = {} needs positive strike and price", q.maturity, q.strike)));
        }
        let i = maturities
            .iter()
            .position(|t| libm::fabs(t - q.maturity) <= MATURITY_TOL * (1.0 + t))
            .ok_or_else(|| Error::input(format!("maturity {} is not in the schedule", q.maturity)))?;
        let g = &mut groups[i];
        if let Some(old) = g.iter_mut().find(|o| o.strike == q.strike) {
            warn!("duplicate quote at T = {}, K = {}; keeping the last", q.maturity, q.strike);
            *old = *q;
        } else {
            g.push(*q);
        }
    }
    for g in groups.iter_mut() {
        g.sort_by(|a, b| a.strike.total_cmp(&b.strike));
        if g.windows(2).any(|w| w[1].price > w[0].price) {
            warn!("call quotes at T = {} increase with strike", g[0].maturity);
        }
    }
    Ok(groups)
}

fn rmse_at(m: &PiecewiseModel, i: usize, quotes: &[MarketQuote], alpha: f64) -> Result<f64> {
    let strikes: Vec<f64> = quotes.iter().map(|q| q.strike).collect();
    let model = european_calls_quadrature(m, i, &strikes, alpha)?;
    let sse: f64 = model.iter().zip(quotes).map(|(p, q)| (p - q.price) * (p - q.price)).sum();
    Ok(libm::sqrt(sse / quotes.len() as f64))
}

/// Root-mean-square and average relative error of model calls against the
/// quotes, whose maturities must be model maturities.
pub fn fit_metrics(m: &PiecewiseModel, quotes: &[MarketQuote], damp_alpha: f64) -> Result<(f64, f64)> {
    if quotes.is_empty() {
        return Err(Error::input("no quotes"));
    }
    let groups = group_quotes(quotes, &m.maturities())?;
    let (mut sse, mut rel, mut n) = (0.0, 0.0, 0usize);
    for (i, g) in groups.iter().enumerate() {
        if g.is_empty() {
            continue;
        }
        let strikes: Vec<f64> = g.iter().map(|q| q.strike).collect();
        let prices = european_calls_quadrature(m, i + 1, &strikes, damp_alpha)?;
        for (p, q) in prices.iter().zip(g) {
            sse += (p - q.price) * (p - q.price);
            rel += libm::fabs(p - q.price) / q.price;
            n += 1;
        }
    }
    Ok((libm::sqrt(sse / n as f64), rel / n as f64))
}

/// Fits the periods one maturity at a time.
pub fn bootstrap_calibrate(quotes: &[MarketQuote], setup: &CalibrationSetup) -> Result<CalibrationResult> {
    if setup.schedule.is_empty() {
        return Err(Error::input("empty schedule"));
    }
    let n_params = setup.n_params();
    let groups = group_quotes(quotes, &setup.maturities())?;
    for (g, t) in groups.iter().zip(setup.maturities()) {
        if g.len() < n_params {
            return Err(Error::input(format!(
                "insufficient quotes at maturity {t}: {} for {n_params} parameters",
                g.len()
            )));
        }
    }
    let (lo, hi) = setup.bounds();
    let mut rng = ChaCha8Rng::seed_from_u64(setup.seed);
    let mut periods: Vec<ModelPeriod> = Vec::new();
    let mut fits = Vec::new();
    let mut warm = vec![1.0; n_params];
    warm[0] = 0.2;
    for (i, g) in groups.iter().enumerate() {
        let objective = |x: &[f64]| -> f64 {
            let mut ps = periods.clone();
            ps.push(setup.period(i, x));
            match PiecewiseModel::risk_neutral(setup.r, setup.d, setup.spot, ps) {
                Ok(m) => rmse_at(&m, i + 1, g, setup.damp_alpha).unwrap_or(f64::INFINITY),
                Err(_) => f64::INFINITY,
            }
        };
        let mut starts = vec![warm.clone()];
        for _ in 1..setup.multistarts.max(1) {
            let mut x = vec![0.0; n_params];
            x[0] = 0.05 + 0.45 * rng.random::<f64>();
            for v in x.iter_mut().skip(1) {
                *v = libm::exp(libm::log(0.01) + libm::log(2000.0) * rng.random::<f64>());
            }
            starts.push(x);
        }
        let step = |x: &[f64]| -> Vec<f64> { x.iter().enumerate().map(|(j, v)| 0.2 * v + if j == 0 { 0.02 } else { 0.1 }).collect() };
        let mut best: Option<Minimum> = None;
        let mut evals = 0;
        for s in &starts {
            let r = minimize(objective, s, &step(s), &lo, &hi, &setup.optimizer);
            evals += r.evals;
            if best.as_ref().is_none_or(|b| r.value < b.value) {
                best = Some(r);
            }
        }
        let mut best = best.expect("at least one start");
        // Restart from the winner with a fresh simplex.
        let polish = minimize(objective, &best.x, &step(&best.x), &lo, &hi, &setup.optimizer);
        evals += polish.evals;
        if polish.value <= best.value {
            let mut trace = best.trace.clone();
            trace.extend(polish.trace.iter().copied());
            best = Minimum { trace, ..polish };
        }
        if !best.converged {
            warn!("calibration at maturity {} stopped at the evaluation limit", g[0].maturity);
        }
        if !best.value.is_finite() {
            return Err(Error::numerical(format!("no feasible parameters at maturity {}", g[0].maturity)));
        }
        periods.push(setup.period(i, &best.x));
        warm = best.x.clone();
        fits.push(MaturityFit {
            maturity: g[0].maturity,
            params: best.x,
            rmse: best.value,
            evals,
            converged: best.converged,
            trace: best.trace,
        });
    }
    let model = PiecewiseModel::risk_neutral(setup.r, setup.d, setup.spot, periods)?;
    let (rmse, arpe) = fit_metrics(&model, quotes, setup.damp_alpha)?;
    Ok(CalibrationResult { model, rmse, arpe, fits })
}

/// Noise-free quotes generated by a model, `strikes` at every maturity.
pub fn synthetic_quotes(m: &PiecewiseModel, strikes: &[f64], damp_alpha: f64) -> Result<Vec<MarketQuote>> {
    let mut out = Vec::new();
    for (i, t) in m.maturities().iter().enumerate() {
        let prices = european_calls_quadrature(m, i + 1, strikes, damp_alpha)?;
        out.extend(strikes.iter().zip(prices).map(|(&k, p)| MarketQuote { maturity: *t, strike: k, price: p, implied_vol: None }));
    }
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::transforms::black_scholes_call;

    fn quote(t: f64, k: f64, p: f64) -> MarketQuote {
        MarketQuote { maturity: t, strike: k, price: p, implied_vol: None }
    }

    #[test]
    fn grouping_rules() {
        let qs = [quote(0.5, 110.0, 2.0), quote(0.5, 90.0, 12.0), quote(1.0, 100.0, 8.0), quote(0.5, 110.0, 2.5)];
        let g = group_quotes(&qs, &[0.5, 1.0]).unwrap();
        assert_eq!(g[0].len(), 2);
        assert_eq!(g[0][0].strike, 90.0);
        assert_eq!(g[0][1].price, 2.5);
        assert!(group_quotes(&[quote(0.7, 100.0, 1.0)], &[0.5]).is_err());
        assert!(group_quotes(&[quote(0.5, 100.0, -1.0)], &[0.5]).is_err());
    }

    #[test]
    fn metrics_arithmetic() {
        let m = PiecewiseModel::risk_neutral(0.01, 0.0, 100.0, vec![ModelPeriod::new(1.0, 0.2, vec![], vec![])]).unwrap();
        let strikes = [80.0, 95.0, 105.0, 120.0];
        let exact = synthetic_quotes(&m, &strikes, 0.75).unwrap();
        let (r0, a0) = fit_metrics(&m, &exact, 0.75).unwrap();
        assert!(r0 < 1e-12 && a0 < 1e-12);
        let shifted: Vec<MarketQuote> = exact.iter().map(|q| MarketQuote { price: q.price - 1.0, ..*q }).collect();
        let (r1, _) = fit_metrics(&m, &shifted, 0.75).unwrap();
        assert!((r1 - 1.0).abs() < 1e-9);
    }

    #[test]
    fn black_scholes_round_trip() {
        let sigma = 0.23;
        let strikes: Vec<f64> = (0..12).map(|i| 75.0 + 5.0 * i as f64).collect();
        let qs: Vec<MarketQuote> =
            strikes.iter().map(|&k| quote(1.0, k, black_scholes_call(100.0, k, 1.0, 0.02, 0.0, sigma))).collect();
        let setup = CalibrationSetup::new(vec![1.0], 0.02, 0.0, 100.0, vec![3.0, 10.0]);
        let res = bootstrap_calibrate(&qs, &setup).unwrap();
        let p = &res.fits[0].params;
        assert!((p[0] - sigma).abs() < 1e-3 * sigma, "{p:?}");
        assert!(p[1] < 1e-2 && p[2] < 1e-1, "{p:?}");
        assert!(res.rmse < 1e-3);
    }

    #[test]
    fn insufficient_quotes() {
        let setup = CalibrationSetup::new(vec![0.5, 0.5], 0.0, 0.0, 100.0, vec![3.0]);
        let err = bootstrap_calibrate(&[quote(0.5, 100.0, 5.0), quote(0.5, 90.0, 12.0)], &setup).unwrap_err();
        assert!(format!("{err}").contains("insufficient quotes"));
    }
}
