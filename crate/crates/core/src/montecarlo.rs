//! Monte-Carlo oracle: Euler steps for the diffusion, compound-Poisson jumps
//! per grid cell. The running minimum includes the exact Brownian-bridge
//! minimum inside each cell, so barrier monitoring is continuous.
//!
//! Sample `j` draws from ChaCha8 stream `j` of the seed, so results do not
//! depend on how chunks are spread over threads. Chunks have a fixed size
//! and their moments are merged pairwise in index order.

use alloc::{boxed::Box, format, vec, vec::Vec};
use core::ops::Range;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, Exp1, Poisson, StandardNormal};

use crate::model::{JumpFamily, PiecewiseModel};
use crate::pricing::{BarrierContract, ContractKind};
use crate::{Error, Result};

/// Samples per chunk.
pub const CHUNK: usize = 4096;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct McConfig {
    pub paths: usize,
    pub dt: f64,
    pub seed: u64,
    /// Relative spot bump for Greeks.
    pub bump: f64,
    /// Pair each path with its mirrored Gaussian increments.
    pub antithetic: bool,
}

impl Default for McConfig {
    fn default() -> Self {
        McConfig { paths: 200_000, dt: 1e-3, seed: 42, bump: 0.01, antithetic: false }
    }
}

impl McConfig {
    fn check(&self, m: &PiecewiseModel) -> Result<()> {
        if self.paths == 0 {
            return Err(Error::input("at least one path is needed"));
        }
        let shortest = m.durations().into_iter().fold(f64::INFINITY, f64::min);
        if !(self.dt > 0.0 && self.dt <= shortest) {
            return Err(Error::input(format!("time step {} must lie in (0, {shortest}]", self.dt)));
        }
        Ok(())
    }

    /// Independent samples: pairs count once under antithetics.
    pub fn samples(&self) -> usize {
        if self.antithetic {
            self.paths.div_ceil(2)
        } else {
            self.paths
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct McEstimate {
    pub mean: f64,
    pub se: f64,
    pub ci_low: f64,
    pub ci_high: f64,
}

impl McEstimate {
    pub fn from_mean_se(mean: f64, se: f64) -> Self {
        McEstimate { mean, se, ci_low: mean - 1.96 * se, ci_high: mean + 1.96 * se }
    }

    pub fn contains(&self, x: f64) -> bool {
        x >= self.ci_low && x <= self.ci_high
    }
}

/// Running sums of several sample statistics.
#[derive(Debug, Clone, PartialEq)]
pub struct Moments {
    pub n: usize,
    pub sum: Vec<f64>,
    pub sum_sq: Vec<f64>,
}

impl Moments {
    pub fn new(dim: usize) -> Self {
        Moments { n: 0, sum: vec![0.0; dim], sum_sq: vec![0.0; dim] }
    }

    fn push(&mut self, x: &[f64]) {
        self.n += 1;
        for (i, v) in x.iter().enumerate() {
            self.sum[i] += v;
            self.sum_sq[i] += v * v;
        }
    }

    pub fn merge(mut self, other: &Moments) -> Self {
        self.n += other.n;
        for i in 0..self.sum.len() {
            self.sum[i] += other.sum[i];
            self.sum_sq[i] += other.sum_sq[i];
        }
        self
    }

    pub fn estimates(&self) -> Vec<McEstimate> {
        let n = self.n as f64;
        self.sum
            .iter()
            .zip(&self.sum_sq)
            .map(|(s, s2)| {
                let mean = s / n;
                let var = if self.n > 1 { ((s2 - n * mean * mean) / (n - 1.0)).max(0.0) } else { 0.0 };
                McEstimate::from_mean_se(mean, libm::sqrt(var / n))
            })
            .collect()
    }
}

/// Pairwise merge in index order.
pub fn reduce(chunks: &[Moments]) -> Moments {
    match chunks.len() {
        0 => Moments::new(0),
        1 => chunks[0].clone(),
        n => reduce(&chunks[..n / 2]).merge(&reduce(&chunks[n / 2..])),
    }
}

#[derive(Debug, Clone)]
struct PeriodSteps {
    steps: usize,
    drift: f64,
    vol: f64,
    up: Option<(Poisson<f64>, Vec<JumpFamily>)>,
    down: Option<(Poisson<f64>, Vec<JumpFamily>)>,
}

/// Path generator for a model and configuration.
#[derive(Debug, Clone)]
pub struct PathSimulator {
    periods: Vec<PeriodSteps>,
    seed: u64,
}

fn jump_source(fams: &[JumpFamily], dt: f64) -> Result<Option<(Poisson<f64>, Vec<JumpFamily>)>> {
    let lam: f64 = fams.iter().map(|f| f.intensity).sum();
    if lam <= 0.0 {
        return Ok(None);
    }
    let p = Poisson::new(lam * dt).map_err(|e| Error::input(format!("jump intensity: {e}")))?;
    Ok(Some((p, fams.iter().map(|f| JumpFamily::new(f.intensity / lam, f.rate)).collect())))
}

/// Sum of `count` exponential jumps, each family picked with probability `π/λ`.
fn jump_sum(rng: &mut ChaCha8Rng, src: &(Poisson<f64>, Vec<JumpFamily>)) -> f64 {
    let count = src.0.sample(rng) as usize;
    let mut total = 0.0;
    for _ in 0..count {
        let u: f64 = rng.random();
        let mut acc = 0.0;
        let mut rate = src.1[src.1.len() - 1].rate;
        for f in &src.1 {
            acc += f.intensity;
            if u < acc {
                rate = f.rate;
                break;
            }
        }
        let e: f64 = Exp1.sample(rng);
        total += e / rate;
    }
    total
}

/// Minimum of a Brownian bridge from `a` to `b`, given `e = -2σ²dt ln U`.
fn bridge_min(a: f64, b: f64, e: f64) -> f64 {
    0.5 * (a + b - libm::sqrt((b - a) * (b - a) + e))
}

impl PathSimulator {
    pub fn new(m: &PiecewiseModel, cfg: &McConfig) -> Result<Self> {
        m.ensure_valid()?;
        cfg.check(m)?;
        let periods = m
            .periods()
            .iter()
            .map(|p| {
                let steps = libm::ceil(p.duration / cfg.dt - 1e-9).max(1.0) as usize;
                let dt = p.duration / steps as f64;
                Ok(PeriodSteps {
                    steps,
                    drift: p.mu * dt,
                    vol: p.sigma * libm::sqrt(dt),
                    up: jump_source(&p.pos_jumps, dt)?,
                    down: jump_source(&p.neg_jumps, dt)?,
                })
            })
            .collect::<Result<Vec<_>>>()?;
        Ok(PathSimulator { periods, seed: cfg.seed })
    }

    /// `(min X, X_T)` for sample `j`, and for its mirror when `antithetic`.
    pub fn sample(&self, j: usize, antithetic: bool) -> [(f64, f64); 2] {
        let mut rng = ChaCha8Rng::seed_from_u64(self.seed);
        rng.set_stream(j as u64);
        let (mut x, mut lo) = (0.0f64, 0.0f64);
        let (mut xa, mut loa) = (0.0f64, 0.0f64);
        for p in &self.periods {
            for _ in 0..p.steps {
                let z: f64 = StandardNormal.sample(&mut rng);
                let mut jump = 0.0;
                if let Some(src) = &p.up {
                    jump += jump_sum(&mut rng, src);
                }
                if let Some(src) = &p.down {
                    jump -= jump_sum(&mut rng, src);
                }
                // Exact minimum of the Brownian bridge across the step; jumps
                // land at the step end.
                let e: f64 = -2.0 * p.vol * p.vol * libm::log(1.0 - rng.random::<f64>());
                let end = x + p.drift + p.vol * z;
                lo = lo.min(bridge_min(x, end, e));
                x = end + jump;
                lo = lo.min(x);
                if antithetic {
                    let end = xa + p.drift - p.vol * z;
                    loa = loa.min(bridge_min(xa, end, e));
                    xa = end + jump;
                    loa = loa.min(xa);
                }
            }
        }
        [(lo, x), (loa, xa)]
    }
}

/// Per-path `(running minimum of X, X_T)`, no antithetics.
pub fn simulate_min_and_terminal(m: &PiecewiseModel, cfg: &McConfig) -> Result<Vec<(f64, f64)>> {
    let sim = PathSimulator::new(m, cfg)?;
    Ok((0..cfg.paths).map(|j| sim.sample(j, false)[0]).collect())
}

/// A payoff functional `(min X, X_T) ↦ statistics`.
pub type Payoff<'a> = dyn Fn(f64, f64, &mut [f64]) + Sync + 'a;

/// Everything a chunk needs; shareable across threads.
pub struct McTask<'a> {
    pub sim: PathSimulator,
    pub cfg: McConfig,
    pub n_out: usize,
    pub payoff: Box<Payoff<'a>>,
}

impl McTask<'_> {
    pub fn chunks(&self) -> Vec<Range<usize>> {
        let n = self.cfg.samples();
        (0..n.div_ceil(CHUNK)).map(|c| c * CHUNK..((c + 1) * CHUNK).min(n)).collect()
    }

    pub fn run_chunk(&self, range: Range<usize>) -> Moments {
        let mut mom = Moments::new(self.n_out);
        let mut a = vec![0.0; self.n_out];
        let mut b = vec![0.0; self.n_out];
        for j in range {
            let paths = self.sim.sample(j, self.cfg.antithetic);
            (self.payoff)(paths[0].0, paths[0].1, &mut a);
            if self.cfg.antithetic {
                (self.payoff)(paths[1].0, paths[1].1, &mut b);
                a.iter_mut().zip(&b).for_each(|(x, y)| *x = 0.5 * (*x + y));
            }
            mom.push(&a);
        }
        mom
    }

    /// Serial run; the result equals any chunk-parallel run.
    pub fn run(&self) -> Vec<McEstimate> {
        let chunks: Vec<Moments> = self.chunks().into_iter().map(|r| self.run_chunk(r)).collect();
        reduce(&chunks).estimates()
    }
}

fn did_payoff(disc: f64, spots: [f64; 3], barrier: f64, h: f64) -> impl Fn(f64, f64, &mut [f64]) + Sync {
    let lv = spots.map(|s| libm::log(barrier / s));
    move |lo, _x, out| {
        let v = lv.map(|l| if lo <= l { disc } else { 0.0 });
        out[0] = v[1];
        out[1] = (v[2] - v[0]) / (2.0 * h);
        out[2] = (v[2] - 2.0 * v[1] + v[0]) / (h * h);
    }
}

fn dic_payoff(disc: f64, spots: [f64; 3], barrier: f64, strike: f64, h: f64) -> impl Fn(f64, f64, &mut [f64]) + Sync {
    let lv = spots.map(|s| libm::log(barrier / s));
    move |lo, x, out| {
        let e = libm::exp(x);
        let mut v = [0.0; 3];
        for i in 0..3 {
            if lo <= lv[i] {
                v[i] = disc * (spots[i] * e - strike).max(0.0);
            }
        }
        out[0] = v[1];
        out[1] = (v[2] - v[0]) / (2.0 * h);
        out[2] = (v[2] - 2.0 * v[1] + v[0]) / (h * h);
    }
}

/// Price, delta and gamma statistics of a barrier contract, with common random
/// numbers across the bumped spots.
pub fn barrier_task(m: &PiecewiseModel, contract: &BarrierContract, cfg: &McConfig) -> Result<McTask<'static>> {
    let m = m.restricted_to_schedule(&contract.schedule)?;
    let s = m.spot();
    let h = s * cfg.bump;
    if !(cfg.bump >= 0.0 && cfg.bump < 1.0) {
        return Err(Error::input(format!("relative bump {} must lie in [0, 1)", cfg.bump)));
    }
    let spots = [s - h, s, s + h];
    let disc = libm::exp(-m.r() * m.total_maturity());
    let h = h.max(f64::MIN_POSITIVE);
    let payoff: Box<Payoff<'static>> = match contract.kind {
        ContractKind::DownAndInDigital => Box::new(did_payoff(disc, spots, contract.barrier, h)),
        ContractKind::DownAndInCall => {
            let k = contract.strike.ok_or_else(|| Error::input("a down-and-in call needs a strike"))?;
            Box::new(dic_payoff(disc, spots, contract.barrier, k, h))
        }
    };
    Ok(McTask { sim: PathSimulator::new(&m, cfg)?, cfg: *cfg, n_out: 3, payoff })
}

/// Prices of one contract family from a single set of paths: a digital at
/// each of `levels` as spot, or a call at each of `levels` as strike.
pub fn barrier_book_task(m: &PiecewiseModel, contract: &BarrierContract, levels: &[f64], cfg: &McConfig) -> Result<McTask<'static>> {
    let m = m.restricted_to_schedule(&contract.schedule)?;
    let disc = libm::exp(-m.r() * m.total_maturity());
    let (barrier, spot) = (contract.barrier, m.spot());
    let levels = levels.to_vec();
    let n_out = levels.len();
    let payoff: Box<Payoff<'static>> = match contract.kind {
        ContractKind::DownAndInDigital => {
            let lv: Vec<f64> = levels.iter().map(|s| libm::log(barrier / s)).collect();
            Box::new(move |lo, _x, out: &mut [f64]| {
                for (o, l) in out.iter_mut().zip(&lv) {
                    *o = if lo <= *l { disc } else { 0.0 };
                }
            })
        }
        ContractKind::DownAndInCall => {
            let l = libm::log(barrier / spot);
            Box::new(move |lo, x, out: &mut [f64]| {
                let st = spot * libm::exp(x);
                for (o, k) in out.iter_mut().zip(&levels) {
                    *o = if lo <= l { disc * (st - k).max(0.0) } else { 0.0 };
                }
            })
        }
    };
    Ok(McTask { sim: PathSimulator::new(&m, cfg)?, cfg: *cfg, n_out, payoff })
}

pub fn mc_did(m: &PiecewiseModel, contract: &BarrierContract, cfg: &McConfig) -> Result<McEstimate> {
    if contract.kind != ContractKind::DownAndInDigital {
        return Err(Error::input("expected a down-and-in digital"));
    }
    Ok(barrier_task(m, contract, cfg)?.run()[0])
}

pub fn mc_dic(m: &PiecewiseModel, contract: &BarrierContract, cfg: &McConfig) -> Result<McEstimate> {
    if contract.kind != ContractKind::DownAndInCall {
        return Err(Error::input("expected a down-and-in call"));
    }
    Ok(barrier_task(m, contract, cfg)?.run()[0])
}

/// Central-difference `(delta, gamma)` with common random numbers.
pub fn mc_greeks(m: &PiecewiseModel, contract: &BarrierContract, cfg: &McConfig) -> Result<(McEstimate, McEstimate)> {
    if !(cfg.bump > 0.0) {
        return Err(Error::input("a zero bump gives 0/0 difference quotients"));
    }
    let est = barrier_task(m, contract, cfg)?.run();
    Ok((est[1], est[2]))
}

/// Discounted European call payoffs at maturity `T_i` for several strikes.
pub fn mc_european(m: &PiecewiseModel, i: usize, strikes: &[f64], cfg: &McConfig) -> Result<Vec<McEstimate>> {
    let m = m.truncated(i)?;
    let disc = libm::exp(-m.r() * m.total_maturity());
    let s = m.spot();
    let ks = strikes.to_vec();
    let payoff = move |_lo: f64, x: f64, out: &mut [f64]| {
        let st = s * libm::exp(x);
        for (o, k) in out.iter_mut().zip(&ks) {
            *o = disc * (st - k).max(0.0);
        }
    };
    let task = McTask { sim: PathSimulator::new(&m, cfg)?, cfg: *cfg, n_out: strikes.len(), payoff: Box::new(payoff) };
    Ok(task.run())
}
