use alloc::{format, string::String, vec, vec::Vec};
use core::f64::consts::PI;

use crate::{Error, Result, C64};

/// Which Talbot node a Laplace variable came from: `k`, possibly conjugated.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub struct NodeLabel {
    pub k: usize,
    pub conj: bool,
}

/// Fixed Talbot nodes and weights for precision parameter `M`.
///
/// `q_0 = 2M/5`, `q_k = (2kπ/5)(cot(kπ/M) + i)`,
/// `β_0 = ½ e^{q_0}`, `β_k = (1 + i(kπ/M)(1 + cot²(kπ/M)) - i cot(kπ/M)) e^{q_k}`.
#[derive(Debug, Clone, PartialEq)]
pub struct TalbotGrid {
    m: usize,
    nodes: Vec<C64>,
    weights: Vec<C64>,
}

impl TalbotGrid {
    pub fn new(m: usize) -> Result<Self> {
        if m < 2 {
            return Err(Error::input(format!("Talbot precision M = {m} must be at least 2")));
        }
        let mf = m as f64;
        let mut nodes = vec![C64::new(2.0 * mf / 5.0, 0.0)];
        let mut weights = vec![C64::new(0.5 * libm::exp(2.0 * mf / 5.0), 0.0)];
        for k in 1..m {
            let th = k as f64 * PI / mf;
            let cot = libm::cos(th) / libm::sin(th);
            let q = C64::new(2.0 * k as f64 * PI / 5.0 * cot, 2.0 * k as f64 * PI / 5.0);
            let b = C64::new(1.0, th * (1.0 + cot * cot) - cot) * q.exp();
            nodes.push(q);
            weights.push(b);
        }
        Ok(TalbotGrid { m, nodes, weights })
    }

    pub fn m(&self) -> usize {
        self.m
    }

    pub fn nodes(&self) -> &[C64] {
        &self.nodes
    }

    pub fn weights(&self) -> &[C64] {
        &self.weights
    }

    /// Node `label` scaled to horizon `t`.
    pub fn node(&self, label: NodeLabel, t: f64) -> C64 {
        let q = self.nodes[label.k] / t;
        if label.conj {
            q.conj()
        } else {
            q
        }
    }

    /// Nested Talbot sum over `horizons.len()` time dimensions.
    ///
    /// `f(q, labels, out)` writes `out.len()` transform values at the Laplace
    /// vector `q`. With `real_target` the inverse is known to be real, so
    /// only conjugation patterns with the first dimension unconjugated are
    /// visited and twice the real part is returned (imaginary parts zero).
    /// Terms are accumulated in a fixed order.
    pub fn invert_many<F>(&self, horizons: &[f64], real_target: bool, n_out: usize, mut f: F) -> Result<Vec<C64>>
    where
        F: FnMut(&[C64], &[NodeLabel], &mut [C64]) -> Result<()>,
    {
        let dims = horizons.len();
        if dims == 0 {
            return Err(Error::input("Talbot inversion needs at least one horizon"));
        }
        if let Some(t) = horizons.iter().find(|t| !(**t > 0.0 && t.is_finite())) {
            return Err(Error::input(format!("horizon {t} must be positive")));
        }
        let mut acc = vec![C64::new(0.0, 0.0); n_out];
        let mut out = vec![C64::new(0.0, 0.0); n_out];
        let mut labels = vec![NodeLabel { k: 0, conj: false }; dims];
        let mut q = vec![C64::new(0.0, 0.0); dims];
        let n_patterns = 1usize << dims;
        let mut ks = vec![0usize; dims];
        loop {
            for pattern in 0..n_patterns {
                if real_target && pattern & 1 == 1 {
                    continue;
                }
                let mut w = C64::new(1.0, 0.0);
                for d in 0..dims {
                    let conj = (pattern >> d) & 1 == 1;
                    labels[d] = NodeLabel { k: ks[d], conj };
                    q[d] = self.node(labels[d], horizons[d]);
                    let b = self.weights[ks[d]];
                    w *= if conj { b.conj() } else { b };
                }
                out.iter_mut().for_each(|z| *z = C64::new(0.0, 0.0));
                f(&q, &labels, &mut out)?;
                for (a, v) in acc.iter_mut().zip(&out) {
                    if !(v.re.is_finite() && v.im.is_finite()) {
                        return Err(Error::Inversion { node: describe(&q), reason: String::from("non-finite transform value") });
                    }
                    *a += w * v;
                }
            }
            // Odometer over the node indices.
            let mut d = 0;
            loop {
                if d == dims {
                    let scale: f64 = horizons.iter().map(|t| 1.0 / (5.0 * t)).product();
                    return Ok(acc
                        .into_iter()
                        .map(|z| if real_target { C64::new(2.0 * scale * z.re, 0.0) } else { z * scale })
                        .collect());
                }
                ks[d] += 1;
                if ks[d] < self.m {
                    break;
                }
                ks[d] = 0;
                d += 1;
            }
        }
    }
}

fn describe(q: &[C64]) -> String {
    let mut s = String::from("(");
    for (i, z) in q.iter().enumerate() {
        if i > 0 {
            s.push_str(", ");
        }
        s.push_str(&format!("{z}"));
    }
    s.push(')');
    s
}

/// Real-valued inverse of `fhat` at the horizons, using `M` nodes per dimension.
pub fn talbot_invert(mut fhat: impl FnMut(&[C64]) -> C64, horizons: &[f64], m: usize) -> Result<f64> {
    let grid = TalbotGrid::new(m)?;
    let v = grid.invert_many(horizons, true, 1, |q, _, out| {
        out[0] = fhat(q);
        Ok(())
    })?;
    Ok(v[0].re)
}
