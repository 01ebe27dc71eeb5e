use alloc::{format, vec::Vec};
use core::f64::consts::PI;

use super::fft::FrfftPlan;
use super::interp::{pchip, GridLookup};
use super::quadrature::{integrate, QuadratureOptions};
use crate::model::PiecewiseModel;
use crate::{Error, Result, C64};

fn check_damping(m: &PiecewiseModel, alpha: f64) -> Result<()> {
    if !(alpha > 0.0) {
        return Err(Error::domain(format!("damping α = {alpha} must be positive")));
    }
    let cap = m.min_rate_plus();
    if !(alpha + 1.0 < cap) {
        return Err(Error::domain(format!(
            "α + 1 = {} must stay below the smallest positive jump rate {cap}",
            alpha + 1.0
        )));
    }
    Ok(())
}

fn maturity(m: &PiecewiseModel, i: usize) -> Result<f64> {
    if i == 0 || i > m.num_periods() {
        return Err(Error::input(format!("maturity index {i} outside 1..={}", m.num_periods())));
    }
    Ok(m.maturities()[i - 1])
}

/// `ψ(v) = e^{-rT} Φ(v - (α+1)i) / (α² + α - v² + i(2α+1)v)` for unit spot.
pub fn damped_call_transform(m: &PiecewiseModel, i: usize, v: f64, alpha: f64) -> Result<C64> {
    let t = maturity(m, i)?;
    let u = C64::new(v, -(alpha + 1.0));
    let expo = m.cumulative_exponent(i, u)? - m.r() * t;
    let denom = C64::new(alpha * alpha + alpha - v * v, (2.0 * alpha + 1.0) * v);
    Ok(expo.exp() / denom)
}

/// Call prices on the plan's strike grid.
#[derive(Debug, Clone, PartialEq)]
pub struct CallGrid {
    pub plan: FrfftPlan,
    pub spot: f64,
    /// `ln(K / S0)`.
    pub log_strikes: Vec<f64>,
    pub prices: Vec<f64>,
}

impl CallGrid {
    pub fn strikes(&self) -> Vec<f64> {
        self.log_strikes.iter().map(|k| self.spot * libm::exp(*k)).collect()
    }

    /// Price at an arbitrary strike inside the grid.
    pub fn price_at(&self, strike: f64) -> Result<GridLookup> {
        if !(strike > 0.0) {
            return Err(Error::domain("strike must be positive"));
        }
        pchip(&self.log_strikes, &self.prices, libm::log(strike / self.spot))
    }
}

/// European calls at maturity `T_i` on the FrFFT strike grid.
pub fn carr_madan_call(m: &PiecewiseModel, i: usize, plan: &FrfftPlan) -> Result<CallGrid> {
    check_damping(m, plan.alpha)?;
    let samples = plan
        .frequencies()
        .iter()
        .map(|&v| damped_call_transform(m, i, v, plan.alpha))
        .collect::<Result<Vec<_>>>()?;
    let prices = plan.invert(&samples)?.into_iter().map(|p| p * m.spot()).collect();
    Ok(CallGrid { plan: *plan, spot: m.spot(), log_strikes: plan.log_strikes(), prices })
}

/// Frequency beyond which `|ψ|` stays below `tol`.
fn truncation(m: &PiecewiseModel, i: usize, alpha: f64, tol: f64) -> Result<f64> {
    let below = |v: f64| -> Result<bool> { Ok(damped_call_transform(m, i, v, alpha)?.norm() < tol) };
    let mut v = 8.0;
    while v < 1e6 {
        if below(v)? && below(1.5 * v)? && below(2.0 * v)? {
            return Ok(v);
        }
        v *= 2.0;
    }
    Err(Error::numerical("characteristic function decays too slowly for quadrature"))
}

/// European calls at maturity `T_i` by adaptive quadrature of the damped
/// Fourier integral, one strike set at a time.
pub fn european_calls_quadrature(m: &PiecewiseModel, i: usize, strikes: &[f64], alpha: f64) -> Result<Vec<f64>> {
    check_damping(m, alpha)?;
    if strikes.is_empty() {
        return Ok(Vec::new());
    }
    if let Some(k) = strikes.iter().find(|k| !(**k > 0.0 && k.is_finite())) {
        return Err(Error::domain(format!("strike {k} must be positive")));
    }
    let ks: Vec<f64> = strikes.iter().map(|k| libm::log(k / m.spot())).collect();
    let damp: Vec<f64> = ks.iter().map(|k| libm::exp(-alpha * k) / PI).collect();
    let widest = damp.iter().fold(0.0f64, |a, b| a.max(*b));
    let vmax = truncation(m, i, alpha, 1e-12 / widest)?;
    let opts = QuadratureOptions {
        abs_tol: 1e-10,
        rel_tol: 1e-11,
        initial_panels: libm::ceil(vmax / 2.0) as usize,
        ..QuadratureOptions::default()
    };
    let mut err: Option<Error> = None;
    let vals = integrate(
        |v, out| match damped_call_transform(m, i, v, alpha) {
            Ok(psi) => {
                for (j, o) in out.iter_mut().enumerate() {
                    *o = damp[j] * (C64::from_polar(1.0, -v * ks[j]) * psi).re;
                }
            }
            Err(e) => {
                err.get_or_insert(e);
                out.iter_mut().for_each(|o| *o = 0.0);
            }
        },
        0.0,
        vmax,
        ks.len(),
        &opts,
    )?;
    if let Some(e) = err {
        return Err(e);
    }
    Ok(vals.into_iter().map(|p| p * m.spot()).collect())
}

pub fn european_call_quadrature(m: &PiecewiseModel, i: usize, strike: f64, alpha: f64) -> Result<f64> {
    Ok(european_calls_quadrature(m, i, &[strike], alpha)?[0])
}

fn norm_cdf(x: f64) -> f64 {
    0.5 * libm::erfc(-x / core::f64::consts::SQRT_2)
}

pub fn black_scholes_call(spot: f64, strike: f64, t: f64, r: f64, d: f64, sigma: f64) -> f64 {
    let sd = sigma * libm::sqrt(t);
    let d1 = (libm::log(spot / strike) + (r - d) * t) / sd + 0.5 * sd;
    spot * libm::exp(-d * t) * norm_cdf(d1) - strike * libm::exp(-r * t) * norm_cdf(d1 - sd)
}
