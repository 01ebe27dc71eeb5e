//! JSON model files.
//!
//! ```json
//! { "r": 0.03, "d": 0.0, "spot": 4150.0, "n_plus": 0, "n_minus": 2,
//!   "alpha_plus": [], "alpha_minus": [3.0, 10.0], "jump_weights": "density",
//!   "periods": [ { "duration": 0.5, "sigma": 0.0995,
//!                  "pi_plus": [], "pi_minus": [0.0371, 11.1819] } ] }
//! ```
//!
//! With `"jump_weights": "density"` each `pi` entry is the amplitude of the
//! Lévy density `π e^{-α|x|}`, so the jump intensity is `π/α`. With
//! `"intensity"` (the default) the entries are intensities.
//! Drifts are always derived from the martingale condition.

use std::path::Path;

use hyperbar_core::{JumpFamily, ModelPeriod, PiecewiseModel};
use serde::{Deserialize, Serialize};

use crate::error::{CliError, Context};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, Default)]
#[serde(rename_all = "lowercase")]
pub enum JumpWeights {
    #[default]
    Intensity,
    Density,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct PeriodRecord {
    pub duration: f64,
    pub sigma: f64,
    #[serde(default)]
    pub pi_plus: Vec<f64>,
    #[serde(default)]
    pub pi_minus: Vec<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ModelFile {
    pub r: f64,
    #[serde(default)]
    pub d: f64,
    pub spot: f64,
    pub n_plus: usize,
    pub n_minus: usize,
    #[serde(default)]
    pub alpha_plus: Vec<f64>,
    #[serde(default)]
    pub alpha_minus: Vec<f64>,
    #[serde(default)]
    pub jump_weights: JumpWeights,
    pub periods: Vec<PeriodRecord>,
}

impl ModelFile {
    pub fn parse(text: &str, path: &Path) -> Result<Self, CliError> {
        serde_json::from_str(text).map_err(|e| CliError::Format { path: path.to_path_buf(), msg: e.to_string() })
    }

    pub fn load(path: &Path) -> Result<Self, CliError> {
        let text = std::fs::read_to_string(path).map_err(|source| CliError::Read { path: path.to_path_buf(), source })?;
        Self::parse(&text, path)
    }

    fn family(&self, pi: f64, rate: f64) -> JumpFamily {
        match self.jump_weights {
            JumpWeights::Intensity => JumpFamily::new(pi, rate),
            JumpWeights::Density => JumpFamily::from_density_amplitude(pi, rate),
        }
    }

    /// Risk-neutral model; shape mismatches are reported with the period number.
    pub fn to_model(&self) -> Result<PiecewiseModel, CliError> {
        let bad = |msg: String| CliError::usage(format!("model file: {msg}"));
        if self.alpha_plus.len() != self.n_plus || self.alpha_minus.len() != self.n_minus {
            return Err(bad("n_plus / n_minus disagree with the rate lists".into()));
        }
        let mut periods = Vec::with_capacity(self.periods.len());
        for (i, p) in self.periods.iter().enumerate() {
            if p.pi_plus.len() != self.n_plus || p.pi_minus.len() != self.n_minus {
                return Err(bad(format!("period {} has the wrong number of jump weights", i + 1)));
            }
            let pos = p.pi_plus.iter().zip(&self.alpha_plus).map(|(&w, &a)| self.family(w, a)).collect();
            let neg = p.pi_minus.iter().zip(&self.alpha_minus).map(|(&w, &a)| self.family(w, a)).collect();
            periods.push(ModelPeriod::new(p.duration, p.sigma, pos, neg));
        }
        PiecewiseModel::risk_neutral(self.r, self.d, self.spot, periods).context("model")
    }

    /// File form of a model, jump weights written as `weights`.
    pub fn from_model(m: &PiecewiseModel, weights: JumpWeights) -> Self {
        let first = &m.periods()[0];
        let w = |f: &JumpFamily| match weights {
            JumpWeights::Intensity => f.intensity,
            JumpWeights::Density => f.intensity * f.rate,
        };
        ModelFile {
            r: m.r(),
            d: m.d(),
            spot: m.spot(),
            n_plus: m.n_plus(),
            n_minus: m.n_minus(),
            alpha_plus: first.pos_jumps.iter().map(|f| f.rate).collect(),
            alpha_minus: first.neg_jumps.iter().map(|f| f.rate).collect(),
            jump_weights: weights,
            periods: m
                .periods()
                .iter()
                .map(|p| PeriodRecord {
                    duration: p.duration,
                    sigma: p.sigma,
                    pi_plus: p.pos_jumps.iter().map(w).collect(),
                    pi_minus: p.neg_jumps.iter().map(w).collect(),
                })
                .collect(),
        }
    }
}
