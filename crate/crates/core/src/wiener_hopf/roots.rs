//! Roots of `κ_i(s) = q` per period.
//!
//! For real `q > 0` every interval of the pole ladder holds exactly one root
//! and a safeguarded Newton iteration finds it. For complex `q` the real
//! roots at `|q|` are carried along the arc `|q| e^{iθt}`, `t: 0 → 1`. The
//! arc also reaches `Re q ≤ 0`, where the roots are the analytic
//! continuation used by contour-based Laplace inversion.

use alloc::{format, vec::Vec};

use crate::model::{ModelPeriod, PiecewiseModel};
use crate::{Error, Result, C64};

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct RootOptions {
    /// Required `|κ(s) - q| / (1 + |q|)` at every returned root.
    pub tol: f64,
    /// Initial number of continuation steps along the arc.
    pub homotopy_steps: usize,
    /// How often a continuation step may be halved before giving up.
    pub max_halvings: usize,
}

impl Default for RootOptions {
    fn default() -> Self {
        RootOptions { tol: 1e-12, homotopy_steps: 16, max_halvings: 24 }
    }
}

/// Roots of one period: `1 + n⁺` with positive and `1 + n⁻` with negative
/// real part. Real roots are sorted by increasing absolute value.
#[derive(Debug, Clone, PartialEq)]
pub struct PeriodRoots {
    pub plus: Vec<C64>,
    pub minus: Vec<C64>,
}

impl PeriodRoots {
    pub fn conj(&self) -> Self {
        PeriodRoots {
            plus: self.plus.iter().map(|z| z.conj()).collect(),
            minus: self.minus.iter().map(|z| z.conj()).collect(),
        }
    }
}

/// Roots for every period, `Re q_i > 0` required. Returns `(ρ⁺, ρ⁻)`
/// concatenated period by period.
pub fn find_roots(m: &PiecewiseModel, q: &[C64]) -> Result<(Vec<C64>, Vec<C64>)> {
    if q.len() != m.num_periods() {
        return Err(Error::input(format!(
            "expected {} Laplace variables, got {}",
            m.num_periods(),
            q.len()
        )));
    }
    let mut plus = Vec::new();
    let mut minus = Vec::new();
    for (p, &qi) in m.periods().iter().zip(q) {
        if !(qi.re > 0.0) {
            return Err(Error::domain(format!("Laplace variable {qi} must have a positive real part")));
        }
        let r = period_roots(p, qi, &RootOptions::default())?;
        let pos = r.plus.iter().filter(|z| z.re > 0.0).count();
        let neg = r.minus.iter().filter(|z| z.re < 0.0).count();
        if pos != r.plus.len() || neg != r.minus.len() {
            return Err(Error::numerical(format!(
                "root count mismatch at q = {qi}: {pos} positive, {neg} negative"
            )));
        }
        plus.extend(r.plus);
        minus.extend(r.minus);
    }
    Ok((plus, minus))
}

/// Roots of `κ(s) = q` for one period, any `q` off the closed negative real axis.
pub fn period_roots(p: &ModelPeriod, q: C64, opts: &RootOptions) -> Result<PeriodRoots> {
    if !(q.re.is_finite() && q.im.is_finite()) || q.norm() == 0.0 {
        return Err(Error::domain(format!("cannot solve for roots at q = {q}")));
    }
    if !(p.sigma > 0.0) {
        return Err(Error::domain("root finding needs a positive volatility"));
    }
    if q.im == 0.0 {
        if q.re < 0.0 {
            return Err(Error::domain(format!("q = {q} lies on the negative real axis")));
        }
        return real_roots(p, q.re);
    }
    let start = real_roots(p, q.norm())?;
    continue_roots(p, start, q, opts)
}

fn real_roots(p: &ModelPeriod, q: f64) -> Result<PeriodRoots> {
    let f = |s: f64| p.laplace_exponent(C64::new(s, 0.0)).re - q;
    let df = |s: f64| p.laplace_exponent_deriv(C64::new(s, 0.0)).re;

    // A family without intensity leaves κ untouched; its factor (s - α) in
    // det K puts a root exactly on the pole.
    let mut pos_poles: Vec<f64> = p.pos_jumps.iter().filter(|f| f.intensity > 0.0).map(|f| f.rate).collect();
    let mut neg_poles: Vec<f64> = p.neg_jumps.iter().filter(|f| f.intensity > 0.0).map(|f| f.rate).collect();
    pos_poles.sort_by(f64::total_cmp);
    neg_poles.sort_by(f64::total_cmp);

    let mut plus = Vec::with_capacity(1 + p.pos_jumps.len());
    let mut lo = 0.0;
    for &b in &pos_poles {
        plus.push(bracketed(&f, &df, lo, b, false)?);
        lo = b;
    }
    let mut hi = lo + 1.0;
    while f(hi) <= 0.0 {
        hi = lo + 2.0 * (hi - lo);
        if !hi.is_finite() {
            return Err(Error::numerical("no bracket for the largest positive root"));
        }
    }
    plus.push(bracketed(&f, &df, lo, hi, false)?);
    plus.extend(p.pos_jumps.iter().filter(|f| f.intensity == 0.0).map(|f| f.rate));
    plus.sort_by(f64::total_cmp);

    let mut minus = Vec::with_capacity(1 + p.neg_jumps.len());
    let mut hi = 0.0;
    for &a in &neg_poles {
        minus.push(bracketed(&f, &df, -a, hi, true)?);
        hi = -a;
    }
    let mut lo = hi - 1.0;
    while f(lo) <= 0.0 {
        lo = hi - 2.0 * (hi - lo);
        if !lo.is_finite() {
            return Err(Error::numerical("no bracket for the most negative root"));
        }
    }
    minus.push(bracketed(&f, &df, lo, hi, true)?);
    minus.extend(p.neg_jumps.iter().filter(|f| f.intensity == 0.0).map(|f| -f.rate));
    minus.sort_by(|a, b| b.total_cmp(a));

    Ok(PeriodRoots {
        plus: plus.into_iter().map(|x| C64::new(x, 0.0)).collect(),
        minus: minus.into_iter().map(|x| C64::new(x, 0.0)).collect(),
    })
}

/// Root of `f` on the open interval `(lo, hi)` where `f` changes sign once.
/// `positive_at_lo` gives the sign near `lo`; the endpoints themselves may be
/// poles and are never evaluated.
fn bracketed(
    f: &impl Fn(f64) -> f64,
    df: &impl Fn(f64) -> f64,
    mut lo: f64,
    mut hi: f64,
    positive_at_lo: bool,
) -> Result<f64> {
    let mut x = 0.5 * (lo + hi);
    for _ in 0..400 {
        let fx = f(x);
        if fx == 0.0 {
            return Ok(x);
        }
        if (fx > 0.0) == positive_at_lo {
            lo = x;
        } else {
            hi = x;
        }
        let step = fx / df(x);
        let newton = x - step;
        let mid = 0.5 * (lo + hi);
        let next = if newton > lo && newton < hi && step.is_finite() { newton } else { mid };
        if libm::fabs(next - x) <= 4.0 * f64::EPSILON * libm::fabs(x) || hi - lo <= 4.0 * f64::EPSILON * libm::fabs(mid)
        {
            let fx = f(next);
            if !fx.is_finite() {
                break;
            }
            return Ok(next);
        }
        x = next;
    }
    Err(Error::numerical(format!("bracketed root search did not converge on ({lo}, {hi})")))
}

fn newton(p: &ModelPeriod, mut s: C64, q: C64, iters: usize) -> Option<C64> {
    for _ in 0..iters {
        let ds = (p.laplace_exponent(s) - q) / p.laplace_exponent_deriv(s);
        if !(ds.re.is_finite() && ds.im.is_finite()) {
            return None;
        }
        s -= ds;
        if ds.norm() <= 1e-15 * (1.0 + s.norm()) {
            return Some(s);
        }
    }
    let resid = (p.laplace_exponent(s) - q).norm();
    (resid <= 1e-11 * (1.0 + q.norm())).then_some(s)
}

/// Carries the real roots at `|q|` along the arc to `q`.
fn continue_roots(p: &ModelPeriod, start: PeriodRoots, q: C64, opts: &RootOptions) -> Result<PeriodRoots> {
    let radius = q.norm();
    let theta = libm::atan2(q.im, q.re);
    let poles: Vec<C64> = p
        .pos_jumps
        .iter()
        .filter(|f| f.intensity > 0.0)
        .map(|f| C64::new(f.rate, 0.0))
        .chain(p.neg_jumps.iter().filter(|f| f.intensity > 0.0).map(|f| C64::new(-f.rate, 0.0)))
        .collect();
    let n_plus = start.plus.len();
    let mut roots: Vec<C64> = start.plus.into_iter().chain(start.minus).collect();
    // Roots sitting on a zero-intensity pole do not move.
    let fixed: Vec<bool> = roots
        .iter()
        .map(|s| {
            p.pos_jumps.iter().any(|f| f.intensity == 0.0 && s.re == f.rate)
                || p.neg_jumps.iter().any(|f| f.intensity == 0.0 && s.re == -f.rate)
        })
        .collect();

    let at = |t: f64| C64::from_polar(radius, theta * t);
    let base_dt = 1.0 / opts.homotopy_steps.max(1) as f64;
    let min_dt = base_dt * libm::pow(0.5, opts.max_halvings as f64);
    let mut t = 0.0;
    let mut dt = base_dt;
    while t < 1.0 {
        let t_next = if t + dt > 1.0 - 1e-12 { 1.0 } else { t + dt };
        let (q_old, q_new) = (at(t), at(t_next));
        match continuation_step(p, &roots, &fixed, &poles, q_old, q_new) {
            Some(next) => {
                roots = next;
                t = t_next;
                dt = (dt * 2.0).min(base_dt);
            }
            None => {
                dt *= 0.5;
                if dt < min_dt {
                    return Err(Error::numerical(format!("root continuation stalled at q = {q}")));
                }
            }
        }
    }
    for (i, s) in roots.iter().enumerate() {
        if fixed[i] {
            continue;
        }
        let resid = (p.laplace_exponent(*s) - q).norm();
        if !(resid <= opts.tol * (1.0 + q.norm()) * (1.0 + s.norm())) {
            return Err(Error::numerical(format!("root residual {resid:e} too large at q = {q}")));
        }
    }
    check_distinct(&roots, q)?;
    let minus = roots.split_off(n_plus);
    Ok(PeriodRoots { plus: roots, minus })
}

fn continuation_step(
    p: &ModelPeriod,
    roots: &[C64],
    fixed: &[bool],
    poles: &[C64],
    q_old: C64,
    q_new: C64,
) -> Option<Vec<C64>> {
    let mut out = Vec::with_capacity(roots.len());
    for (i, &s) in roots.iter().enumerate() {
        if fixed[i] {
            out.push(s);
            continue;
        }
        // Distance to anything the iterate must not jump onto.
        let guard = roots
            .iter()
            .enumerate()
            .filter(|&(j, _)| j != i)
            .map(|(_, r)| (r - s).norm())
            .chain(poles.iter().map(|b| (b - s).norm()))
            .fold(f64::INFINITY, f64::min);
        let pred = s + (q_new - q_old) / p.laplace_exponent_deriv(s);
        let corr = newton(p, pred, q_new, 30)?;
        if (corr - s).norm() > 0.3 * guard {
            return None;
        }
        out.push(corr);
    }
    Some(out)
}

fn check_distinct(roots: &[C64], q: C64) -> Result<()> {
    for i in 0..roots.len() {
        for j in i + 1..roots.len() {
            let scale = 1.0 + roots[i].norm();
            if (roots[i] - roots[j]).norm() <= 1e-9 * scale {
                return Err(Error::numerical(format!("roots coalesce at q = {q}")));
            }
        }
    }
    Ok(())
}
