//! Random valid models for stress and property tests.

use alloc::vec::Vec;

use rand::Rng;

use crate::model::{JumpFamily, ModelPeriod, PiecewiseModel};

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SamplingBounds {
    pub max_periods: usize,
    pub max_families: usize,
    pub sigma: (f64, f64),
    pub intensity: (f64, f64),
    pub duration: (f64, f64),
}

impl Default for SamplingBounds {
    fn default() -> Self {
        SamplingBounds {
            max_periods: 4,
            max_families: 3,
            sigma: (0.05, 0.5),
            intensity: (0.05, 3.0),
            duration: (0.1, 2.0),
        }
    }
}

fn uniform<R: Rng + ?Sized>(rng: &mut R, (lo, hi): (f64, f64)) -> f64 {
    lo + (hi - lo) * rng.random::<f64>()
}

/// Increasing rates starting above `floor`, consecutive gaps at least 0.5.
fn rates<R: Rng + ?Sized>(rng: &mut R, n: usize, floor: f64) -> Vec<f64> {
    let mut out = Vec::with_capacity(n);
    let mut last = floor;
    for _ in 0..n {
        last += 0.5 + 6.0 * rng.random::<f64>();
        out.push(last);
    }
    out
}

/// A risk-neutral model with `1..=max_periods` periods and
/// `0..=max_families` families per sign. Rates are shared by all periods.
pub fn random_model<R: Rng + ?Sized>(rng: &mut R, b: &SamplingBounds) -> PiecewiseModel {
    let n = 1 + rng.random_range(0..b.max_periods);
    let n_plus = rng.random_range(0..=b.max_families);
    let n_minus = rng.random_range(0..=b.max_families);
    let a_plus = rates(rng, n_plus, 1.0);
    let a_minus = rates(rng, n_minus, 0.0);
    let periods = (0..n)
        .map(|_| {
            let pos = a_plus.iter().map(|&a| JumpFamily::new(uniform(rng, b.intensity), a)).collect();
            let neg = a_minus.iter().map(|&a| JumpFamily::new(uniform(rng, b.intensity), a)).collect();
            ModelPeriod::new(uniform(rng, b.duration), uniform(rng, b.sigma), pos, neg)
        })
        .collect();
    let r = uniform(rng, (0.0, 0.06));
    let d = uniform(rng, (0.0, 0.03));
    PiecewiseModel::risk_neutral(r, d, 100.0, periods).expect("sampled parameters are valid")
}
