//! Down-and-in digital (DID) and down-and-in call (DIC) prices and Greeks.
//!
//! Both are Laplace transforms in the period lengths, inverted by a nested
//! Talbot sum. Discounting enters only through the shift `q_i + r`, so
//! `c(q) = Π(q_i + r)` carries `e^{-rT}` and nothing else is discounted.
//!
//! With `y = ln(S0/H) > 0`:
//!
//! ```text
//! DID(q)  = e₁ᵀ e^{Q⁻y} 𝟏 / c
//! DIC*(v) = S0 e^{-by} / (b(b-1) c) · e₁ᵀ e^{Q⁻y} K(b)⁻¹K(0)𝟏,   b = α + 1 + iv
//! ```
//!
//! Since `∂y/∂ln S0 = 1`, the Greeks replace `e^{Q⁻y}` by `Q⁻e^{Q⁻y}` (delta,
//! times `1/S0`) and `(Q⁻² - Q⁻)e^{Q⁻y}` (gamma, times `1/S0²`). For the call
//! the spot also enters through `k = ln(K/S0)` and the prefactor, and those
//! dependences cancel in the Fourier kernel, so the same rows apply.

use alloc::{format, vec, vec::Vec};

use crate::model::PiecewiseModel;
use crate::transforms::{european_call_quadrature, pchip, FrfftPlan, NodeLabel, TalbotGrid};
use crate::wiener_hopf::{killed_moment, period_roots, OneSidedFactor, PeriodRoots, RootOptions, Side};
use crate::{Error, Result, C64};

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ContractKind {
    DownAndInDigital,
    DownAndInCall,
}

#[derive(Debug, Clone, PartialEq)]
pub struct BarrierContract {
    pub kind: ContractKind,
    pub barrier: f64,
    /// Only used by the call.
    pub strike: Option<f64>,
    /// Period lengths; must match the leading model periods.
    pub schedule: Vec<f64>,
}

impl BarrierContract {
    pub fn digital(barrier: f64, schedule: Vec<f64>) -> Self {
        BarrierContract { kind: ContractKind::DownAndInDigital, barrier, strike: None, schedule }
    }

    pub fn call(barrier: f64, strike: f64, schedule: Vec<f64>) -> Self {
        BarrierContract { kind: ContractKind::DownAndInCall, barrier, strike: Some(strike), schedule }
    }

    pub fn maturity(&self) -> f64 {
        self.schedule.iter().sum()
    }

    /// `h = ln(H/S0)`.
    pub fn log_barrier(&self, spot: f64) -> f64 {
        libm::log(self.barrier / spot)
    }

    /// The model cut to the schedule, after checking the contract against it.
    fn prepare(&self, m: &PiecewiseModel) -> Result<PiecewiseModel> {
        if !(self.barrier > 0.0 && self.barrier.is_finite()) {
            return Err(Error::input(format!("barrier {} must be positive", self.barrier)));
        }
        if !(self.barrier < m.spot()) {
            return Err(Error::domain(format!(
                "barrier {} must lie below the spot {}",
                self.barrier,
                m.spot()
            )));
        }
        if self.kind == ContractKind::DownAndInCall {
            match self.strike {
                Some(k) if k > 0.0 && k.is_finite() => {}
                _ => return Err(Error::input("a down-and-in call needs a positive strike")),
            }
        }
        let m = m.restricted_to_schedule(&self.schedule)?;
        m.ensure_risk_neutral()?;
        Ok(m)
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum GreekMethod {
    /// Transforms of the spot derivatives.
    Analytic,
    /// Central differences of the price with relative spot bump.
    FiniteDifference { bump: f64 },
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PricingParams {
    pub talbot_m: usize,
    pub fft_n: usize,
    pub fft_delta: f64,
    pub damp_alpha: f64,
    /// Half-width of the log-strike grid; by default it covers the strikes.
    pub x0: Option<f64>,
    pub greeks: GreekMethod,
}

impl PricingParams {
    pub fn digital() -> Self {
        PricingParams { talbot_m: 6, ..Self::call() }
    }

    pub fn call() -> Self {
        PricingParams {
            talbot_m: 7,
            fft_n: 1024,
            fft_delta: 0.25,
            damp_alpha: 0.75,
            x0: None,
            greeks: GreekMethod::Analytic,
        }
    }

    pub fn for_kind(kind: ContractKind) -> Self {
        match kind {
            ContractKind::DownAndInDigital => Self::digital(),
            ContractKind::DownAndInCall => Self::call(),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Method {
    /// Talbot inversion of the spectral transform.
    Talbot,
    /// Talbot in time, fractional FFT in log-strike.
    TalbotFrfft,
    /// Talbot (and FrFFT) prices, Greeks by central differences.
    FiniteDifference,
    /// Adaptive quadrature of the damped Fourier integral.
    Quadrature,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PriceAndGreeks {
    pub price: f64,
    pub delta: Option<f64>,
    pub gamma: Option<f64>,
    pub method: Method,
    pub params: PricingParams,
    /// Whether the strike fell on a grid node (calls only).
    pub snapped: Option<bool>,
}

/// Roots of every period at every Talbot node, shifted by `r` and the
/// contour shift of that period.
struct RootCache {
    roots: Vec<Vec<PeriodRoots>>,
}

impl RootCache {
    fn new(m: &PiecewiseModel, grid: &TalbotGrid) -> Result<Self> {
        Self::shifted(m, grid, &vec![0.0; m.num_periods()])
    }

    fn shifted(m: &PiecewiseModel, grid: &TalbotGrid, gamma: &[f64]) -> Result<Self> {
        let opts = RootOptions::default();
        let roots = m
            .periods()
            .iter()
            .zip(gamma)
            .map(|(p, &g)| {
                (0..grid.m())
                    .map(|k| {
                        let q = grid.node(NodeLabel { k, conj: false }, p.duration) + g + m.r();
                        period_roots(p, q, &opts).map_err(|e| node_error(q, e))
                    })
                    .collect::<Result<Vec<_>>>()
            })
            .collect::<Result<Vec<_>>>()?;
        Ok(RootCache { roots })
    }

    fn get(&self, labels: &[NodeLabel]) -> Vec<PeriodRoots> {
        labels
            .iter()
            .enumerate()
            .map(|(i, l)| {
                let r = &self.roots[i][l.k];
                if l.conj {
                    r.conj()
                } else {
                    r.clone()
                }
            })
            .collect()
    }
}

fn node_error(q: C64, e: Error) -> Error {
    Error::Inversion { node: format!("{q}"), reason: format!("{e}") }
}

/// Infimum factor at the shifted node and `c = Π(q_i + r)`.
fn shifted_factor(m: &PiecewiseModel, q: &[C64], roots: &[PeriodRoots]) -> Result<(OneSidedFactor, C64)> {
    let qs: Vec<C64> = q.iter().map(|z| z + m.r()).collect();
    let c = qs.iter().product();
    let f = OneSidedFactor::from_roots(m, &qs, Side::Infimum, roots)?;
    Ok((f, c))
}

/// `e₁ᵀ e^{Q⁻y} 𝟏 / c` with the factorization at `q + r`, `Re q > 0`.
pub fn did_transform(m: &PiecewiseModel, contract: &BarrierContract, q: &[C64]) -> Result<C64> {
    let m = contract.prepare(m)?;
    if let Some(bad) = q.iter().find(|z| !(z.re > 0.0)) {
        return Err(Error::domain(format!("Laplace variable {bad} must have a positive real part")));
    }
    if q.len() != m.num_periods() {
        return Err(Error::input(format!("expected {} Laplace variables, got {}", m.num_periods(), q.len())));
    }
    let qs: Vec<C64> = q.iter().map(|z| z + m.r()).collect();
    let f = OneSidedFactor::new(&m, &qs, Side::Infimum, &RootOptions::default())?;
    let y = -contract.log_barrier(m.spot());
    Ok(f.exit_mass(y)? / qs.iter().product::<C64>())
}

/// DID prices (and analytic Greeks) for several spots with the barrier fixed.
/// One Talbot sum serves all spots.
pub fn did_book(
    m: &PiecewiseModel,
    contract: &BarrierContract,
    spots: &[f64],
    params: &PricingParams,
) -> Result<Vec<PriceAndGreeks>> {
    if spots.is_empty() {
        return Err(Error::input("no spots given"));
    }
    if let GreekMethod::FiniteDifference { bump } = params.greeks {
        let hs = spots.iter().map(|&s| bump_size(s, bump)).collect::<Result<Vec<_>>>()?;
        let mut all: Vec<f64> = spots.iter().zip(&hs).map(|(s, h)| s - h).collect();
        all.extend_from_slice(spots);
        all.extend(spots.iter().zip(&hs).map(|(s, h)| s + h));
        let p = PricingParams { greeks: GreekMethod::Analytic, ..*params };
        let book = did_book(m, contract, &all, &p)?;
        let ns = spots.len();
        return Ok((0..ns).map(|j| central(&book[j], &book[ns + j], &book[2 * ns + j], hs[j], params)).collect());
    }
    let models = spots.iter().map(|&s| contract.prepare(&m.with_spot(s))).collect::<Result<Vec<_>>>()?;
    let m = &models[0];
    let grid = TalbotGrid::new(params.talbot_m)?;
    let cache = RootCache::new(m, &grid)?;
    let ys: Vec<f64> = spots.iter().map(|&s| libm::log(s / contract.barrier)).collect();
    let ns = spots.len();
    let raw = grid.invert_many(&m.durations(), true, 3 * ns, |q, labels, out| {
        let (f, c) = shifted_factor(m, q, &cache.get(labels)).map_err(|e| node_error(q[0], e))?;
        for (j, (&y, &s)) in ys.iter().zip(spots).enumerate() {
            out[j] = f.exit_mass(y)? / c;
            out[ns + j] = f.first_row(y, |l| l)?.iter().sum::<C64>() / (c * s);
            out[2 * ns + j] = f.first_row(y, |l| l * l - l)?.iter().sum::<C64>() / (c * s * s);
        }
        Ok(())
    })?;
    Ok((0..ns)
        .map(|j| PriceAndGreeks {
            price: raw[j].re,
            delta: Some(raw[ns + j].re),
            gamma: Some(raw[2 * ns + j].re),
            method: Method::Talbot,
            params: *params,
            snapped: None,
        })
        .collect())
}

pub fn did_price(m: &PiecewiseModel, contract: &BarrierContract, params: &PricingParams) -> Result<PriceAndGreeks> {
    let mut r = did_book(m, contract, &[m.spot()], params)?.remove(0);
    r.delta = None;
    r.gamma = None;
    Ok(r)
}

pub fn did_greeks(m: &PiecewiseModel, contract: &BarrierContract, params: &PricingParams) -> Result<PriceAndGreeks> {
    Ok(did_book(m, contract, &[m.spot()], params)?.remove(0))
}

fn bump_size(spot: f64, bump: f64) -> Result<f64> {
    if !(bump > 0.0 && bump < 1.0) {
        return Err(Error::input(format!("relative bump {bump} must lie in (0, 1)")));
    }
    Ok(spot * bump)
}

fn central(down: &PriceAndGreeks, mid: &PriceAndGreeks, up: &PriceAndGreeks, h: f64, params: &PricingParams) -> PriceAndGreeks {
    PriceAndGreeks {
        price: mid.price,
        delta: Some((up.price - down.price) / (2.0 * h)),
        gamma: Some((up.price - 2.0 * mid.price + down.price) / (h * h)),
        method: Method::FiniteDifference,
        params: *params,
        snapped: mid.snapped,
    }
}

/// `DIC*(v)` before time inversion: the Laplace transform in the period
/// lengths of the damped Fourier transform in log-strike, `b = α + 1 + iv`.
pub fn dic_transform(m: &PiecewiseModel, contract: &BarrierContract, b: C64, q: &[C64]) -> Result<C64> {
    let m = contract.prepare(m)?;
    if let Some(bad) = q.iter().find(|z| !(z.re > 0.0)) {
        return Err(Error::domain(format!("Laplace variable {bad} must have a positive real part")));
    }
    if q.len() != m.num_periods() {
        return Err(Error::input(format!("expected {} Laplace variables, got {}", m.num_periods(), q.len())));
    }
    check_strip(&m, b)?;
    let qs: Vec<C64> = q.iter().map(|z| z + m.r()).collect();
    let f = OneSidedFactor::new(&m, &qs, Side::Infimum, &RootOptions::default())?;
    let y = -contract.log_barrier(m.spot());
    let row = f.first_row(y, |_| C64::new(1.0, 0.0))?;
    let moment = killed_moment(&m, &qs, b);
    let v: C64 = row.iter().zip(&f.states).map(|(a, &st)| a * moment[st]).sum();
    Ok(dic_prefactor(m.spot(), y, b) / qs.iter().product::<C64>() * v)
}

fn check_strip(m: &PiecewiseModel, b: C64) -> Result<()> {
    let (lo, hi) = (-m.min_rate_minus(), m.min_rate_plus());
    if !(b.re > lo && b.re < hi && b.re > 1.0) {
        return Err(Error::domain(format!("Re b = {} outside (max(1, {lo}), {hi})", b.re)));
    }
    Ok(())
}

fn dic_prefactor(spot: f64, y: f64, b: C64) -> C64 {
    (-b * y).exp() * spot / (b * (b - 1.0))
}

/// DIC prices and analytic Greeks on the FrFFT log-strike grid.
#[derive(Debug, Clone, PartialEq)]
pub struct DicGrid {
    pub plan: FrfftPlan,
    pub spot: f64,
    /// `ln(K/S0)`.
    pub log_strikes: Vec<f64>,
    pub prices: Vec<f64>,
    pub deltas: Vec<f64>,
    pub gammas: Vec<f64>,
}

impl DicGrid {
    pub fn strikes(&self) -> Vec<f64> {
        self.log_strikes.iter().map(|k| self.spot * libm::exp(*k)).collect()
    }

    /// Price, delta and gamma at `strike`, interpolated in log-strike.
    pub fn at(&self, strike: f64) -> Result<(f64, f64, f64, bool)> {
        if !(strike > 0.0) {
            return Err(Error::domain("strike must be positive"));
        }
        let k = libm::log(strike / self.spot);
        let p = pchip(&self.log_strikes, &self.prices, k)?;
        let d = pchip(&self.log_strikes, &self.deltas, k)?;
        let g = pchip(&self.log_strikes, &self.gammas, k)?;
        Ok((p.value, d.value, g.value, p.snapped))
    }
}

/// Talbot inversion of `DIC*` at every FrFFT frequency, then the FrFFT.
/// The grid covers `strikes` unless `params.x0` fixes its half-width.
pub fn dic_price_grid(
    m: &PiecewiseModel,
    contract: &BarrierContract,
    strikes: &[f64],
    params: &PricingParams,
) -> Result<DicGrid> {
    let m = BarrierContract { kind: ContractKind::DownAndInCall, strike: Some(1.0), ..contract.clone() }.prepare(m)?;
    if let Some(k) = strikes.iter().find(|k| !(**k > 0.0 && k.is_finite())) {
        return Err(Error::domain(format!("strike {k} must be positive")));
    }
    let plan = match params.x0 {
        Some(x0) => FrfftPlan::new(params.fft_n, params.fft_delta, x0, params.damp_alpha)?,
        None => {
            let ks: Vec<f64> = strikes.iter().map(|k| libm::log(k / m.spot())).collect();
            FrfftPlan::covering(params.fft_n, params.fft_delta, params.damp_alpha, &ks)?
        }
    };
    if !(params.damp_alpha > 0.0) {
        return Err(Error::input("damping must be positive"));
    }
    let bs: Vec<C64> = plan.frequencies().iter().map(|&v| C64::new(params.damp_alpha + 1.0, v)).collect();
    check_strip(&m, bs[0])?;
    // The damped price decays like e^{-tail·k} for large log-strikes and the
    // grid aliases it with period 2π/δ.
    let tail = m.min_rate_plus() - bs[0].re;
    if tail * 2.0 * core::f64::consts::PI / params.fft_delta < 30.0 {
        log::warn!(
            "damped call prices decay like exp(-{tail:.3} k); frequency step {} may alias, use a smaller step or damping",
            params.fft_delta
        );
    }
    let spot = m.spot();
    let y = -contract.log_barrier(spot);
    let pref: Vec<C64> = bs.iter().map(|&b| dic_prefactor(spot, y, b)).collect();
    let n = plan.n;
    let grid = TalbotGrid::new(params.talbot_m)?;
    // The transform has poles at q_i = κ_i(b) - r. The contour must pass to
    // their right, and Re κ_i(b) ≤ κ_i(Re b) along the whole frequency grid.
    let gamma: Vec<f64> =
        m.periods().iter().map(|p| (p.laplace_exponent(C64::new(bs[0].re, 0.0)).re - m.r()).max(0.0)).collect();
    let growth = libm::exp(m.periods().iter().zip(&gamma).map(|(p, g)| g * p.duration).sum::<f64>());
    let cache = RootCache::shifted(&m, &grid, &gamma)?;
    let mut moment_sel = vec![C64::new(0.0, 0.0); 0];
    let mut q = vec![C64::new(0.0, 0.0); m.num_periods()];
    let raw = grid.invert_many(&m.durations(), false, 3 * n, |node, labels, out| {
        for ((qi, z), g) in q.iter_mut().zip(node).zip(&gamma) {
            *qi = z + g;
        }
        let q = &q[..];
        let (f, c) = shifted_factor(&m, q, &cache.get(labels)).map_err(|e| node_error(q[0], e))?;
        let qs: Vec<C64> = q.iter().map(|z| z + m.r()).collect();
        let r0 = f.first_row(y, |_| C64::new(1.0, 0.0))?;
        let r1 = f.first_row(y, |l| l)?;
        let r2 = f.first_row(y, |l| l * l - l)?;
        for j in 0..n {
            let moment = killed_moment(&m, &qs, bs[j]);
            moment_sel.clear();
            moment_sel.extend(f.states.iter().map(|&st| moment[st]));
            let dot = |r: &[C64]| -> C64 { r.iter().zip(&moment_sel).map(|(a, b)| a * b).sum() };
            let w = pref[j] / c;
            out[j] = w * dot(&r0);
            out[n + j] = w * dot(&r1) / spot;
            out[2 * n + j] = w * dot(&r2) / (spot * spot);
        }
        Ok(())
    })?;
    let raw: Vec<C64> = raw.into_iter().map(|z| z * growth).collect();
    let prices = plan.invert(&raw[..n])?;
    let deltas = plan.invert(&raw[n..2 * n])?;
    let gammas = plan.invert(&raw[2 * n..])?;
    Ok(DicGrid { plan, spot, log_strikes: plan.log_strikes(), prices, deltas, gammas })
}

/// DIC prices and Greeks at the requested strikes.
pub fn dic_book(
    m: &PiecewiseModel,
    contract: &BarrierContract,
    strikes: &[f64],
    params: &PricingParams,
) -> Result<Vec<PriceAndGreeks>> {
    if strikes.is_empty() {
        return Err(Error::input("no strikes given"));
    }
    match params.greeks {
        GreekMethod::Analytic => {
            let g = dic_price_grid(m, contract, strikes, params)?;
            strikes
                .iter()
                .map(|&k| {
                    let (p, d, gm, snapped) = g.at(k)?;
                    Ok(PriceAndGreeks {
                        price: p,
                        delta: Some(d),
                        gamma: Some(gm),
                        method: Method::TalbotFrfft,
                        params: *params,
                        snapped: Some(snapped),
                    })
                })
                .collect()
        }
        GreekMethod::FiniteDifference { bump } => {
            let s = m.spot();
            let h = bump_size(s, bump)?;
            // The strike grid is relative to spot; pin its width so the three
            // revaluations share one lattice in absolute strike terms.
            let ks: Vec<f64> = strikes.iter().map(|k| libm::log(k / s)).collect();
            let x0 = params.x0.unwrap_or_else(|| {
                FrfftPlan::covering(params.fft_n, params.fft_delta, params.damp_alpha, &ks).map_or(0.25, |p| p.x0) + bump
            });
            let p = PricingParams { x0: Some(x0), greeks: GreekMethod::Analytic, ..*params };
            let at = |spot: f64| -> Result<Vec<PriceAndGreeks>> { dic_book(&m.with_spot(spot), contract, strikes, &p) };
            let (down, mid, up) = (at(s - h)?, at(s)?, at(s + h)?);
            Ok((0..strikes.len()).map(|j| central(&down[j], &mid[j], &up[j], h, params)).collect())
        }
    }
}

pub fn dic_greeks(m: &PiecewiseModel, contract: &BarrierContract, params: &PricingParams) -> Result<PriceAndGreeks> {
    let k = contract.strike.ok_or_else(|| Error::input("a down-and-in call needs a strike"))?;
    Ok(dic_book(m, contract, &[k], params)?.remove(0))
}

pub fn dic_price(m: &PiecewiseModel, contract: &BarrierContract, params: &PricingParams) -> Result<PriceAndGreeks> {
    let mut r = dic_greeks(m, contract, &PricingParams { greeks: GreekMethod::Analytic, ..*params })?;
    r.delta = None;
    r.gamma = None;
    Ok(r)
}

/// European call at maturity `T_i` (1-based) by single-strike quadrature.
pub fn european_call(m: &PiecewiseModel, i: usize, strike: f64, damp_alpha: f64) -> Result<PriceAndGreeks> {
    m.ensure_risk_neutral()?;
    let price = european_call_quadrature(m, i, strike, damp_alpha)?;
    Ok(PriceAndGreeks {
        price,
        delta: None,
        gamma: None,
        method: Method::Quadrature,
        params: PricingParams { damp_alpha, ..PricingParams::call() },
        snapped: None,
    })
}
