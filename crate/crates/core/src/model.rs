//! Hyper-exponential additive process with piecewise constant parameters.
//!
//! Jump families are stored by intensity (expected number of jumps per year)
//! and rate (the inverse mean jump size). A family with intensity `p` and
//! rate `a` contributes `p * a * exp(-a |x|)` to the Lévy density.

use alloc::{format, vec::Vec};
use core::fmt;

use crate::{Error, Result, C64};

/// Positive jump rates must exceed `1 + POSITIVE_RATE_MARGIN`.
pub const POSITIVE_RATE_MARGIN: f64 = 1e-9;
/// Jump rates of one sign must be pairwise further apart than this.
pub const RATE_SEPARATION: f64 = 1e-9;
/// Allowed deviation of `Ψ(-i)` from `r - d`.
pub const MARTINGALE_TOL: f64 = 1e-12;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct JumpFamily {
    pub intensity: f64,
    pub rate: f64,
}

impl JumpFamily {
    pub fn new(intensity: f64, rate: f64) -> Self {
        JumpFamily { intensity, rate }
    }

    /// Family whose Lévy density is `amplitude * exp(-rate |x|)`.
    pub fn from_density_amplitude(amplitude: f64, rate: f64) -> Self {
        JumpFamily { intensity: amplitude / rate, rate }
    }
}

/// Local triplet of one period between consecutive maturities.
#[derive(Debug, Clone, PartialEq)]
pub struct ModelPeriod {
    pub duration: f64,
    pub sigma: f64,
    pub mu: f64,
    pub pos_jumps: Vec<JumpFamily>,
    pub neg_jumps: Vec<JumpFamily>,
}

impl ModelPeriod {
    /// A period with zero drift; use [`PiecewiseModel::risk_neutral`] to set it.
    pub fn new(
        duration: f64,
        sigma: f64,
        pos_jumps: Vec<JumpFamily>,
        neg_jumps: Vec<JumpFamily>,
    ) -> Self {
        ModelPeriod { duration, sigma, mu: 0.0, pos_jumps, neg_jumps }
    }

    pub fn with_drift(mut self, mu: f64) -> Self {
        self.mu = mu;
        self
    }

    pub fn lambda_plus(&self) -> f64 {
        self.pos_jumps.iter().map(|f| f.intensity).sum()
    }

    pub fn lambda_minus(&self) -> f64 {
        self.neg_jumps.iter().map(|f| f.intensity).sum()
    }

    /// `κ(s) = Ψ(-is) = μs + σ²s²/2 + Σ π⁺ s/(α⁺-s) - Σ π⁻ s/(α⁻+s)`.
    ///
    /// No pole check; callers on hot paths stay away from `α⁺` and `-α⁻`.
    /// Families with zero intensity are skipped, so their poles are harmless.
    pub fn laplace_exponent(&self, s: C64) -> C64 {
        let mut v = s * (self.mu + 0.5 * self.sigma * self.sigma * s);
        for f in self.pos_jumps.iter().filter(|f| f.intensity != 0.0) {
            v += f.intensity * s / (f.rate - s);
        }
        for f in self.neg_jumps.iter().filter(|f| f.intensity != 0.0) {
            v -= f.intensity * s / (f.rate + s);
        }
        v
    }

    /// Derivative of [`laplace_exponent`](Self::laplace_exponent) in `s`.
    pub fn laplace_exponent_deriv(&self, s: C64) -> C64 {
        let mut v = self.sigma * self.sigma * s + self.mu;
        for f in self.pos_jumps.iter().filter(|f| f.intensity != 0.0) {
            let t = f.rate - s;
            v += f.intensity * f.rate / (t * t);
        }
        for f in self.neg_jumps.iter().filter(|f| f.intensity != 0.0) {
            let t = f.rate + s;
            v -= f.intensity * f.rate / (t * t);
        }
        v
    }

    /// Characteristic exponent, `E[exp(iuX_t)] = exp(t Ψ(u))`.
    pub fn char_exponent(&self, u: C64) -> Result<C64> {
        let s = C64::new(-u.im, u.re); // s = iu
        self.check_pole(s)?;
        Ok(self.laplace_exponent(s))
    }

    pub(crate) fn check_pole(&self, s: C64) -> Result<()> {
        for f in &self.pos_jumps {
            if (s - f.rate).norm() <= 1e-14 * f.rate {
                return Err(Error::domain(format!("argument hits the pole at s = {}", f.rate)));
            }
        }
        for f in &self.neg_jumps {
            if (s + f.rate).norm() <= 1e-14 * f.rate {
                return Err(Error::domain(format!("argument hits the pole at s = -{}", f.rate)));
            }
        }
        Ok(())
    }

    pub fn levy_density(&self, x: f64) -> Result<f64> {
        if x == 0.0 || !x.is_finite() {
            return Err(Error::domain("Lévy density is defined for finite x != 0"));
        }
        let fams = if x > 0.0 { &self.pos_jumps } else { &self.neg_jumps };
        Ok(fams
            .iter()
            .map(|f| f.intensity * f.rate * libm::exp(-f.rate * libm::fabs(x)))
            .sum())
    }

    /// Smallest positive jump rate, `+inf` without positive jumps.
    pub fn min_rate_plus(&self) -> f64 {
        self.pos_jumps.iter().map(|f| f.rate).fold(f64::INFINITY, f64::min)
    }

    pub fn min_rate_minus(&self) -> f64 {
        self.neg_jumps.iter().map(|f| f.rate).fold(f64::INFINITY, f64::min)
    }
}

/// Drift making `exp(X_t - (r - d) t)` a martingale over the period.
pub fn risk_neutral_drift(period: &ModelPeriod, r: f64, d: f64) -> Result<f64> {
    let mut mu = r - d - 0.5 * period.sigma * period.sigma;
    for f in &period.pos_jumps {
        if f.rate <= 1.0 {
            return Err(Error::InfiniteMoment { rate: f.rate });
        }
        mu -= f.intensity / (f.rate - 1.0);
    }
    for f in &period.neg_jumps {
        mu += f.intensity / (f.rate + 1.0);
    }
    Ok(mu)
}

#[derive(Debug, Clone, PartialEq)]
pub enum Violation {
    NoPeriods,
    NonPositiveSpot,
    NonFinite { field: &'static str },
    NonPositiveDuration { period: usize },
    NonPositiveSigma { period: usize },
    NegativeIntensity { period: usize },
    NonPositiveRate { period: usize },
    PositiveRateTooSmall { period: usize, rate: f64 },
    DuplicateRates { period: usize },
    FamilyCountMismatch { period: usize },
}

impl fmt::Display for Violation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Violation::NoPeriods => write!(f, "model has no periods"),
            Violation::NonPositiveSpot => write!(f, "spot must be positive"),
            Violation::NonFinite { field } => write!(f, "{field} must be finite"),
            Violation::NonPositiveDuration { period } => {
                write!(f, "duration must be positive (period {})", period + 1)
            }
            Violation::NonPositiveSigma { period } => {
                write!(f, "sigma must be positive (period {})", period + 1)
            }
            Violation::NegativeIntensity { period } => {
                write!(f, "jump intensities must be non-negative (period {})", period + 1)
            }
            Violation::NonPositiveRate { period } => {
                write!(f, "jump rates must be positive (period {})", period + 1)
            }
            Violation::PositiveRateTooSmall { period, rate } => {
                write!(f, "positive jump rate {rate} must exceed 1 (period {})", period + 1)
            }
            Violation::DuplicateRates { period } => {
                write!(f, "duplicate jump rates (period {})", period + 1)
            }
            Violation::FamilyCountMismatch { period } => {
                write!(f, "jump family counts differ from period 1 (period {})", period + 1)
            }
        }
    }
}

#[derive(Debug, Clone, Default, PartialEq)]
pub struct ValidationReport {
    pub violations: Vec<Violation>,
}

impl ValidationReport {
    pub fn is_valid(&self) -> bool {
        self.violations.is_empty()
    }
}

impl fmt::Display for ValidationReport {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.violations.is_empty() {
            return write!(f, "valid");
        }
        for (i, v) in self.violations.iter().enumerate() {
            if i > 0 {
                write!(f, "; ")?;
            }
            write!(f, "{v}")?;
        }
        Ok(())
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct PiecewiseModel {
    periods: Vec<ModelPeriod>,
    r: f64,
    d: f64,
    spot: f64,
}

impl PiecewiseModel {
    /// Stores the periods as given, drifts included. Nothing is validated.
    pub fn new(r: f64, d: f64, spot: f64, periods: Vec<ModelPeriod>) -> Self {
        PiecewiseModel { periods, r, d, spot }
    }

    /// Validates the parameters and replaces every drift by the risk-neutral one.
    pub fn risk_neutral(r: f64, d: f64, spot: f64, mut periods: Vec<ModelPeriod>) -> Result<Self> {
        for p in periods.iter_mut() {
            p.mu = 0.0;
        }
        let mut m = PiecewiseModel { periods, r, d, spot };
        m.ensure_valid()?;
        for p in m.periods.iter_mut() {
            p.mu = risk_neutral_drift(p, r, d)?;
        }
        Ok(m)
    }

    pub fn periods(&self) -> &[ModelPeriod] {
        &self.periods
    }

    pub fn num_periods(&self) -> usize {
        self.periods.len()
    }

    pub fn r(&self) -> f64 {
        self.r
    }

    pub fn d(&self) -> f64 {
        self.d
    }

    pub fn spot(&self) -> f64 {
        self.spot
    }

    pub fn n_plus(&self) -> usize {
        self.periods.first().map_or(0, |p| p.pos_jumps.len())
    }

    pub fn n_minus(&self) -> usize {
        self.periods.first().map_or(0, |p| p.neg_jumps.len())
    }

    pub fn durations(&self) -> Vec<f64> {
        self.periods.iter().map(|p| p.duration).collect()
    }

    /// Cumulative maturities `T_i`.
    pub fn maturities(&self) -> Vec<f64> {
        let mut t = 0.0;
        self.periods
            .iter()
            .map(|p| {
                t += p.duration;
                t
            })
            .collect()
    }

    pub fn total_maturity(&self) -> f64 {
        self.periods.iter().map(|p| p.duration).sum()
    }

    pub fn with_spot(&self, spot: f64) -> Self {
        PiecewiseModel { spot, ..self.clone() }
    }

    /// The model restricted to its first `n` periods.
    pub fn truncated(&self, n: usize) -> Result<Self> {
        if n == 0 || n > self.periods.len() {
            return Err(Error::input(format!(
                "cannot keep {n} of {} periods",
                self.periods.len()
            )));
        }
        Ok(PiecewiseModel { periods: self.periods[..n].to_vec(), ..self.clone() })
    }

    /// Truncates the model to a schedule of period lengths, which must agree
    /// with the leading model periods.
    pub fn restricted_to_schedule(&self, schedule: &[f64]) -> Result<Self> {
        if schedule.is_empty() || schedule.len() > self.periods.len() {
            return Err(Error::input(format!(
                "schedule has {} periods, model has {}",
                schedule.len(),
                self.periods.len()
            )));
        }
        for (i, (&t, p)) in schedule.iter().zip(&self.periods).enumerate() {
            if libm::fabs(t - p.duration) > 1e-10 * (1.0 + p.duration) {
                return Err(Error::input(format!(
                    "schedule entry {} ({t}) does not match model period length {}",
                    i + 1,
                    p.duration
                )));
            }
        }
        self.truncated(schedule.len())
    }

    pub fn validate(&self) -> ValidationReport {
        validate_model(self)
    }

    pub fn ensure_valid(&self) -> Result<()> {
        let report = self.validate();
        if report.is_valid() {
            Ok(())
        } else {
            Err(Error::InvalidModel(format!("{report}")))
        }
    }

    /// Valid model whose drifts satisfy the martingale condition.
    pub fn ensure_risk_neutral(&self) -> Result<()> {
        self.ensure_valid()?;
        let target = self.r - self.d;
        for (i, p) in self.periods.iter().enumerate() {
            let v = p.laplace_exponent(C64::new(1.0, 0.0));
            if libm::fabs(v.re - target) > MARTINGALE_TOL * (1.0 + libm::fabs(target)) {
                return Err(Error::InvalidModel(format!(
                    "drift of period {} is not risk-neutral (Ψ(-i) = {}, r - d = {target})",
                    i + 1,
                    v.re
                )));
            }
        }
        Ok(())
    }

    /// `Φ⁽ⁱ⁾(u) = exp(Σ_{j ≤ i} T⁽ʲ⁾ Ψ⁽ʲ⁾(u))` for the first `i` periods (`1 ≤ i ≤ N`).
    pub fn char_function_cumulative(&self, i: usize, u: C64) -> Result<C64> {
        Ok(self.cumulative_exponent(i, u)?.exp())
    }

    /// `Σ_{j ≤ i} T⁽ʲ⁾ Ψ⁽ʲ⁾(u)`.
    pub fn cumulative_exponent(&self, i: usize, u: C64) -> Result<C64> {
        if i == 0 || i > self.periods.len() {
            return Err(Error::input(format!(
                "maturity index {i} outside 1..={}",
                self.periods.len()
            )));
        }
        let mut acc = C64::new(0.0, 0.0);
        for p in &self.periods[..i] {
            acc += p.char_exponent(u)? * p.duration;
        }
        Ok(acc)
    }

    /// Smallest positive jump rate over all periods.
    pub fn min_rate_plus(&self) -> f64 {
        self.periods.iter().map(|p| p.min_rate_plus()).fold(f64::INFINITY, f64::min)
    }

    pub fn min_rate_minus(&self) -> f64 {
        self.periods.iter().map(|p| p.min_rate_minus()).fold(f64::INFINITY, f64::min)
    }
}

pub fn validate_model(m: &PiecewiseModel) -> ValidationReport {
    let mut v = Vec::new();
    if m.periods.is_empty() {
        v.push(Violation::NoPeriods);
    }
    if !m.r.is_finite() {
        v.push(Violation::NonFinite { field: "r" });
    }
    if !m.d.is_finite() {
        v.push(Violation::NonFinite { field: "d" });
    }
    if !(m.spot.is_finite() && m.spot > 0.0) {
        v.push(Violation::NonPositiveSpot);
    }
    let (n_plus, n_minus) = (m.n_plus(), m.n_minus());
    for (i, p) in m.periods.iter().enumerate() {
        let finite = p.duration.is_finite()
            && p.sigma.is_finite()
            && p.mu.is_finite()
            && p.pos_jumps.iter().chain(&p.neg_jumps).all(|f| f.intensity.is_finite() && f.rate.is_finite());
        if !finite {
            v.push(Violation::NonFinite { field: "period parameters" });
            continue;
        }
        if p.duration <= 0.0 {
            v.push(Violation::NonPositiveDuration { period: i });
        }
        if p.sigma <= 0.0 {
            v.push(Violation::NonPositiveSigma { period: i });
        }
        if p.pos_jumps.len() != n_plus || p.neg_jumps.len() != n_minus {
            v.push(Violation::FamilyCountMismatch { period: i });
        }
        if p.pos_jumps.iter().chain(&p.neg_jumps).any(|f| f.intensity < 0.0) {
            v.push(Violation::NegativeIntensity { period: i });
        }
        if p.neg_jumps.iter().any(|f| f.rate <= 0.0) || p.pos_jumps.iter().any(|f| f.rate <= 0.0) {
            v.push(Violation::NonPositiveRate { period: i });
        }
        for f in &p.pos_jumps {
            if f.rate > 0.0 && f.rate <= 1.0 + POSITIVE_RATE_MARGIN {
                v.push(Violation::PositiveRateTooSmall { period: i, rate: f.rate });
            }
        }
        if has_duplicates(&p.pos_jumps) || has_duplicates(&p.neg_jumps) {
            v.push(Violation::DuplicateRates { period: i });
        }
    }
    ValidationReport { violations: v }
}

fn has_duplicates(fams: &[JumpFamily]) -> bool {
    fams.iter().enumerate().any(|(a, fa)| {
        fams[a + 1..].iter().any(|fb| libm::fabs(fa.rate - fb.rate) <= RATE_SEPARATION)
    })
}
