//! Spectral solution of the matrix Wiener–Hopf system.
//!
//! `K(s)` is block upper bidiagonal across periods, so a null vector for a
//! root of period `i` is known in closed form: it vanishes on later periods,
//! its diffusion entry in period `i` is 1, each jump state carries
//! `α/(α∓s)` times the diffusion entry of its period, and earlier periods
//! follow from `x_w = q_w x_{w+1} / (q_w - κ_w(s))`.
//!
//! Sign conventions. `Q⁺` has eigenvalues `-ρ` for the positive roots `ρ`;
//! `Q⁻` has eigenvalues equal to the negative roots. Both exponentials are
//! taken at a positive distance `x`, so `e^{Q⁻ x}` with `x = ln(S0/H)`
//! describes passage below `H`. The pair `(Q⁺, η⁺)` solves
//!
//! ```text
//! ½ S² Q⁺² - V⁺ Q⁺ + H⁺ + D⁻ η⁺ = 0
//!   η⁺ Q⁺ + C⁻ + T⁻ η⁺ = 0
//! ```
//!
//! which is the stacked identity `½ S̃² W Q⁺² - Ṽ W Q⁺ + Q W = 0` with
//! `W = (I; η⁺)`. For the infimum the middle sign flips to `+`.

use alloc::{format, vec, vec::Vec};

use log::warn;
use nalgebra::DVector;

use super::generator::{build_generator, GeneratorBlocks, StateLayout};
use super::roots::{period_roots, PeriodRoots, RootOptions};
use crate::linalg::{cond1, expm, frobenius, inverse, CMatrix};
use crate::model::PiecewiseModel;
use crate::{Error, Result, C64};

/// Above this condition number of `U` the exponential is taken densely.
pub const SPECTRAL_COND_LIMIT: f64 = 1e8;
/// Above this condition number the factorization is rejected.
pub const MAX_COND: f64 = 1e12;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Side {
    /// First passage above a level: roots with positive real part.
    Supremum,
    /// First passage below a level: roots with negative real part.
    Infimum,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct FactorOptions {
    pub roots: RootOptions,
    /// Bound on both Wiener–Hopf residuals relative to `‖H⁺‖_F`.
    pub residual_tol: f64,
    /// Slack on the sub-probability constraints of `η`.
    pub eta_tol: f64,
}

impl Default for FactorOptions {
    fn default() -> Self {
        FactorOptions { roots: RootOptions::default(), residual_tol: 1e-8, eta_tol: 1e-10 }
    }
}

/// Null vector of `K(s)` for a root `s` of period `period`, in the global
/// state order.
pub fn null_vector(m: &PiecewiseModel, q: &[C64], period: usize, s: C64) -> Result<Vec<C64>> {
    let layout = StateLayout::of(m);
    let mut v = vec![C64::new(0.0, 0.0); layout.dim()];
    let p = &m.periods()[period];
    if s.im == 0.0 {
        if let Some(k) = p.pos_jumps.iter().position(|f| f.intensity == 0.0 && f.rate == s.re) {
            v[layout.pos_jump(period, k)] = C64::new(1.0, 0.0);
            return Ok(v);
        }
        if let Some(j) = p.neg_jumps.iter().position(|f| f.intensity == 0.0 && -f.rate == s.re) {
            v[layout.neg_jump(period, j)] = C64::new(1.0, 0.0);
            return Ok(v);
        }
    }
    let mut x = C64::new(1.0, 0.0);
    for w in (0..=period).rev() {
        let pw = &m.periods()[w];
        if w < period {
            x = q[w] * x / (q[w] - pw.laplace_exponent(s));
        }
        v[layout.diffusion(w)] = x;
        for (k, f) in pw.pos_jumps.iter().enumerate() {
            v[layout.pos_jump(w, k)] = x * f.rate / (f.rate - s);
        }
        for (j, f) in pw.neg_jumps.iter().enumerate() {
            v[layout.neg_jump(w, j)] = x * f.rate / (f.rate + s);
        }
    }
    if v.iter().any(|z| !(z.re.is_finite() && z.im.is_finite())) {
        return Err(Error::numerical(format!("null vector at root {s} is not finite")));
    }
    Ok(v)
}

/// `K(s)⁻¹ K(0) 𝟏` in the global state order, in closed form.
///
/// Singular when `s` is a root of some period.
pub fn killed_moment(m: &PiecewiseModel, q: &[C64], s: C64) -> Vec<C64> {
    let layout = StateLayout::of(m);
    let mut v = vec![C64::new(0.0, 0.0); layout.dim()];
    let mut x = C64::new(1.0, 0.0);
    for w in (0..layout.periods).rev() {
        let pw = &m.periods()[w];
        x = q[w] * x / (q[w] - pw.laplace_exponent(s));
        v[layout.diffusion(w)] = x;
        for (k, f) in pw.pos_jumps.iter().enumerate() {
            v[layout.pos_jump(w, k)] = x * f.rate / (f.rate - s);
        }
        for (j, f) in pw.neg_jumps.iter().enumerate() {
            v[layout.neg_jump(w, j)] = x * f.rate / (f.rate + s);
        }
    }
    v
}

/// One half of the factorization: `(Q, η)` for either the supremum or the
/// infimum, stored spectrally.
#[derive(Debug, Clone)]
pub struct OneSidedFactor {
    pub side: Side,
    /// Roots `ρ` (all periods), one per eigenvector column.
    pub roots: Vec<C64>,
    /// Eigenvalues of `Q`: `-ρ` for the supremum, `ρ` for the infimum.
    pub eigenvalues: Vec<C64>,
    /// Eigenvector matrix restricted to the states the factor lives on.
    pub u: CMatrix,
    pub u_inv: CMatrix,
    /// Eigenvector entries on the remaining states (the `g(ρ)` block).
    pub g: CMatrix,
    /// `‖U‖₁ ‖U⁻¹‖₁`.
    pub cond: f64,
    /// Global indices of the states `U` is written in.
    pub states: Vec<usize>,
    /// Global indices of the other states.
    pub others: Vec<usize>,
    real: bool,
}

impl OneSidedFactor {
    /// Builds the factor from per-period roots; `roots[i]` must belong to
    /// `q[i]`. `q` may lie anywhere the roots are defined, including
    /// `Re q ≤ 0` for contour nodes.
    pub fn from_roots(m: &PiecewiseModel, q: &[C64], side: Side, roots: &[PeriodRoots]) -> Result<Self> {
        let layout = StateLayout::of(m);
        let (states, others): (Vec<usize>, Vec<usize>) = match side {
            Side::Supremum => (layout.upper().collect(), layout.lower().collect()),
            Side::Infimum => (layout.infimum_states(), layout.pos_states().collect()),
        };
        let k = states.len();
        let mut u = CMatrix::zeros(k, k);
        let mut g = CMatrix::zeros(others.len(), k);
        let mut all_roots = Vec::with_capacity(k);
        let mut col = 0;
        for (i, pr) in roots.iter().enumerate() {
            let rs = match side {
                Side::Supremum => &pr.plus,
                Side::Infimum => &pr.minus,
            };
            for &s in rs {
                if col == k {
                    return Err(Error::numerical("too many roots for the factor dimension"));
                }
                let v = null_vector(m, q, i, s)?;
                for (r, &st) in states.iter().enumerate() {
                    u[(r, col)] = v[st];
                }
                for (r, &st) in others.iter().enumerate() {
                    g[(r, col)] = v[st];
                }
                all_roots.push(s);
                col += 1;
            }
        }
        if col != k {
            return Err(Error::numerical(format!("expected {k} roots, found {col}")));
        }
        let u_inv = inverse(&u)?;
        let cond = cond1(&u, &u_inv);
        if !(cond <= MAX_COND) {
            return Err(Error::numerical(format!("eigenvector matrix is near singular (cond {cond:e})")));
        }
        let eigenvalues = match side {
            Side::Supremum => all_roots.iter().map(|s| -s).collect(),
            Side::Infimum => all_roots.clone(),
        };
        let real = q.iter().all(|z| z.im == 0.0);
        Ok(OneSidedFactor { side, roots: all_roots, eigenvalues, u, u_inv, g, cond, states, others, real })
    }

    pub fn new(m: &PiecewiseModel, q: &[C64], side: Side, opts: &RootOptions) -> Result<Self> {
        let roots = m
            .periods()
            .iter()
            .zip(q)
            .map(|(p, &qi)| period_roots(p, qi, opts))
            .collect::<Result<Vec<_>>>()?;
        Self::from_roots(m, q, side, &roots)
    }

    pub fn dim(&self) -> usize {
        self.u.nrows()
    }

    /// `Q = U diag(λ) U⁻¹`.
    pub fn generator(&self) -> CMatrix {
        let mut ul = self.u.clone();
        for (j, &l) in self.eigenvalues.iter().enumerate() {
            ul.column_mut(j).iter_mut().for_each(|z| *z *= l);
        }
        ul * &self.u_inv
    }

    /// `η = [g(ρ)] U⁻¹`. For real `q`, round-off negatives above `-1e-10`
    /// are clamped to zero.
    pub fn eta(&self) -> CMatrix {
        let mut eta = &self.g * &self.u_inv;
        if self.real {
            for z in eta.iter_mut() {
                z.im = 0.0;
                if z.re < 0.0 && z.re > -1e-10 {
                    z.re = 0.0;
                }
            }
        }
        eta
    }

    /// Row vector `e₁ᵀ p(Q) e^{Qx}`, with `p` given by its values on the
    /// eigenvalues (`p(λ) = 1` for the plain exponential).
    pub fn first_row(&self, x: f64, p: impl Fn(C64) -> C64) -> Result<Vec<C64>> {
        let k = self.dim();
        if self.cond < SPECTRAL_COND_LIMIT {
            let mut row = vec![C64::new(0.0, 0.0); k];
            for j in 0..k {
                let l = self.eigenvalues[j];
                let c = self.u[(0, j)] * (l * x).exp() * p(l);
                for (r, out) in row.iter_mut().enumerate() {
                    *out += c * self.u_inv[(j, r)];
                }
            }
            return Ok(row);
        }
        // Dense fallback: p(Q) is reconstructed from its spectral form.
        let qx = self.generator().map(|z| z * x);
        let e = expm(&qx)?;
        let mut pq = self.u.clone();
        for (j, &l) in self.eigenvalues.iter().enumerate() {
            let pl = p(l);
            pq.column_mut(j).iter_mut().for_each(|z| *z *= pl);
        }
        let pq = pq * &self.u_inv;
        let row = pq.row(0) * e;
        Ok(row.iter().copied().collect())
    }

    /// `e₁ᵀ e^{Qx} 𝟏`.
    pub fn exit_mass(&self, x: f64) -> Result<C64> {
        Ok(self.first_row(x, |_| C64::new(1.0, 0.0))?.iter().sum())
    }

    /// Residuals of both Wiener–Hopf equations (Frobenius norms).
    pub fn residuals(&self, blocks: &GeneratorBlocks) -> (f64, f64) {
        let dim = blocks.dim();
        let k = self.dim();
        let qf = self.generator();
        let eta = self.eta();
        let mut w = CMatrix::zeros(dim, k);
        for (r, &st) in self.states.iter().enumerate() {
            w[(st, r)] = C64::new(1.0, 0.0);
        }
        for (r, &st) in self.others.iter().enumerate() {
            for c in 0..k {
                w[(st, c)] = eta[(r, c)];
            }
        }
        let wq = &w * &qf;
        let wq2 = &wq * &qf;
        let sign = match self.side {
            Side::Supremum => -1.0,
            Side::Infimum => 1.0,
        };
        let mut res = &blocks.generator * &w;
        for i in 0..dim {
            for c in 0..k {
                res[(i, c)] += wq2[(i, c)] * (0.5 * blocks.s2[i]) + wq[(i, c)] * (sign * blocks.v[i]);
            }
        }
        let sub = |rows: &[usize]| {
            libm::sqrt(rows.iter().map(|&r| res.row(r).iter().map(|z| z.norm_sqr()).sum::<f64>()).sum())
        };
        (sub(&self.states), sub(&self.others))
    }

    /// Largest violation of `η ≥ 0` and row sums `≤ 1`.
    pub fn eta_violation(&self) -> f64 {
        let eta = &self.g * &self.u_inv;
        let mut worst: f64 = 0.0;
        for r in 0..eta.nrows() {
            let mut sum = 0.0;
            for c in 0..eta.ncols() {
                let z = eta[(r, c)];
                worst = worst.max(-z.re).max(libm::fabs(z.im));
                sum += z.re;
            }
            worst = worst.max(sum - 1.0);
        }
        worst
    }
}

#[derive(Debug, Clone)]
pub struct SpectralFactorization {
    pub q: Vec<C64>,
    pub blocks: GeneratorBlocks,
    pub plus: OneSidedFactor,
    pub minus: OneSidedFactor,
    /// `(eq. 1, eq. 2)` residuals for `(Q⁺, η⁺)` and `(Q⁻, η⁻)`, relative to `‖H⁺‖_F`.
    pub residual_plus: (f64, f64),
    pub residual_minus: (f64, f64),
}

impl SpectralFactorization {
    pub fn side(&self, side: Side) -> &OneSidedFactor {
        match side {
            Side::Supremum => &self.plus,
            Side::Infimum => &self.minus,
        }
    }

    fn q_product(&self) -> C64 {
        self.q.iter().product()
    }
}

/// Full factorization with runtime checks, `Re q_i > 0`.
pub fn assemble_factorization(m: &PiecewiseModel, q: &[C64]) -> Result<SpectralFactorization> {
    assemble_factorization_with(m, q, &FactorOptions::default())
}

pub fn assemble_factorization_with(
    m: &PiecewiseModel,
    q: &[C64],
    opts: &FactorOptions,
) -> Result<SpectralFactorization> {
    m.ensure_valid()?;
    let blocks = build_generator(m, q)?;
    let roots = m
        .periods()
        .iter()
        .zip(q)
        .map(|(p, &qi)| period_roots(p, qi, &opts.roots))
        .collect::<Result<Vec<_>>>()?;
    for (r, qi) in roots.iter().zip(q) {
        if r.plus.iter().any(|z| z.re <= 0.0) || r.minus.iter().any(|z| z.re >= 0.0) {
            return Err(Error::numerical(format!("root count mismatch at q = {qi}")));
        }
    }
    let plus = OneSidedFactor::from_roots(m, q, Side::Supremum, &roots)?;
    let minus = OneSidedFactor::from_roots(m, q, Side::Infimum, &roots)?;
    let scale = frobenius(&blocks.h_plus()).max(f64::MIN_POSITIVE);
    let rel = |r: (f64, f64)| (r.0 / scale, r.1 / scale);
    let residual_plus = rel(plus.residuals(&blocks));
    let residual_minus = rel(minus.residuals(&blocks));
    for (name, r) in [("supremum", residual_plus), ("infimum", residual_minus)] {
        if !(r.0 < opts.residual_tol && r.1 < opts.residual_tol) {
            return Err(Error::numerical(format!(
                "Wiener–Hopf residual of the {name} factor too large: {:e}, {:e}",
                r.0, r.1
            )));
        }
    }
    if q.iter().all(|z| z.im == 0.0) {
        for f in [&plus, &minus] {
            let v = f.eta_violation();
            if v > opts.eta_tol {
                return Err(Error::numerical(format!("η is not sub-stochastic (violation {v:e})")));
            }
        }
    }
    Ok(SpectralFactorization { q: q.to_vec(), blocks, plus, minus, residual_plus, residual_minus })
}

/// Laplace transform in the period lengths of `P(sup X ≤ x)`, `x > 0`.
pub fn sup_transform(f: &SpectralFactorization, x: f64) -> Result<C64> {
    passage_transform(f, Side::Supremum, x)
}

/// Laplace transform in the period lengths of `P(-inf X ≤ x)`, `x > 0`.
pub fn inf_transform(f: &SpectralFactorization, x: f64) -> Result<C64> {
    passage_transform(f, Side::Infimum, x)
}

fn passage_transform(f: &SpectralFactorization, side: Side, x: f64) -> Result<C64> {
    if !(x > 0.0) {
        return Err(Error::domain("level must be positive"));
    }
    let mass = f.side(side).exit_mass(x)?;
    Ok((C64::new(1.0, 0.0) - mass) / f.q_product())
}

/// Laplace transform of `E[e^{sX_T} 1{level x crossed}]`, `x > 0`.
///
/// For the supremum this is `e^{sx}/Πq · e₁ᵀ e^{Q⁺x} K(s)⁻¹K(0)𝟏`; for the
/// infimum (passage below `-x`) the prefactor is `e^{-sx}`.
pub fn joint_transform(f: &SpectralFactorization, side: Side, x: f64, s: C64) -> Result<C64> {
    if !(x > 0.0) {
        return Err(Error::domain("level must be positive"));
    }
    let (lo, hi) = strip(&f.blocks);
    if !(s.re > lo && s.re < hi) {
        return Err(Error::domain(format!("Re s = {} outside the strip ({lo}, {hi})", s.re)));
    }
    let mut s_eval = s;
    let mut moment = killed_moment_blocks(&f.blocks, s_eval);
    if moment.iter().any(|z| !(z.re.is_finite() && z.im.is_finite())) {
        warn!("K(s) singular at s = {s}; perturbing by 1e-9");
        s_eval = s + 1e-9;
        moment = killed_moment_blocks(&f.blocks, s_eval);
    }
    let factor = f.side(side);
    let row = factor.first_row(x, |_| C64::new(1.0, 0.0))?;
    let v: C64 = row.iter().zip(&factor.states).map(|(a, &st)| a * moment[st]).sum();
    let pref = match side {
        Side::Supremum => (s_eval * x).exp(),
        Side::Infimum => (-s_eval * x).exp(),
    };
    Ok(pref * v / f.q_product())
}

fn strip(blocks: &GeneratorBlocks) -> (f64, f64) {
    let l = blocks.layout;
    let mut lo = f64::NEG_INFINITY;
    let mut hi = f64::INFINITY;
    for w in 0..l.periods {
        for k in 0..l.n_plus {
            let i = l.pos_jump(w, k);
            hi = hi.min(-blocks.generator[(i, i)].re);
        }
        for j in 0..l.n_minus {
            let i = l.neg_jump(w, j);
            lo = lo.max(blocks.generator[(i, i)].re);
        }
    }
    (lo, hi)
}

/// `K(s)⁻¹ K(0) 𝟏` by a dense solve.
fn killed_moment_blocks(blocks: &GeneratorBlocks, s: C64) -> Vec<C64> {
    let k = blocks.k_matrix(s);
    let rhs = &blocks.generator * DVector::from_element(blocks.dim(), C64::new(1.0, 0.0));
    match k.lu().solve(&rhs) {
        Some(v) => v.iter().copied().collect(),
        None => vec![C64::new(f64::NAN, 0.0); blocks.dim()],
    }
}
