use alloc::{vec, vec::Vec};

use crate::{Error, Result};

const XGK: [f64; 8] = [
    0.991455371120812639206854697526329,
    0.949107912342758524526189684047851,
    0.864864423359769072789712788640926,
    0.741531185599394439863864773280788,
    0.586087235467691130294144845693013,
    0.405845151377397166906606412076961,
    0.207784955007898467600689403773245,
    0.000000000000000000000000000000000,
];
const WGK: [f64; 8] = [
    0.022935322010529224963732008058970,
    0.063092092629978553290700663189204,
    0.104790010322250183839876322541518,
    0.140653259715525918745189590510238,
    0.169004726639267902826583426598550,
    0.190350578064785409913256402421014,
    0.204432940075298892414161999234649,
    0.209482141084727828012999174891714,
];
const WG: [f64; 4] = [
    0.129484966168869693270611432679082,
    0.279705391489276667901467771423780,
    0.381830050505118944950369775488975,
    0.417959183673469387755102040816327,
];

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct QuadratureOptions {
    pub abs_tol: f64,
    pub rel_tol: f64,
    /// Maximum number of panels kept at once.
    pub max_panels: usize,
    /// Number of equal panels the interval is cut into before adapting.
    pub initial_panels: usize,
}

impl Default for QuadratureOptions {
    fn default() -> Self {
        QuadratureOptions { abs_tol: 1e-11, rel_tol: 1e-10, max_panels: 20_000, initial_panels: 1 }
    }
}

struct Panel {
    a: f64,
    b: f64,
    value: Vec<f64>,
    error: f64,
}

fn gk15(f: &mut impl FnMut(f64, &mut [f64]), a: f64, b: f64, dim: usize, buf: &mut [f64]) -> Panel {
    let c = 0.5 * (a + b);
    let h = 0.5 * (b - a);
    let mut kron = vec![0.0; dim];
    let mut gauss = vec![0.0; dim];
    f(c, buf);
    for d in 0..dim {
        kron[d] = WGK[7] * buf[d];
        gauss[d] = WG[3] * buf[d];
    }
    for j in 0..7 {
        for sgn in [-1.0, 1.0] {
            f(c + sgn * h * XGK[j], buf);
            for d in 0..dim {
                kron[d] += WGK[j] * buf[d];
                if j % 2 == 1 {
                    gauss[d] += WG[j / 2] * buf[d];
                }
            }
        }
    }
    let mut error: f64 = 0.0;
    for d in 0..dim {
        kron[d] *= h;
        gauss[d] *= h;
        error = error.max(libm::fabs(kron[d] - gauss[d]));
    }
    Panel { a, b, value: kron, error }
}

/// Adaptive Gauss–Kronrod (7/15) integral of a vector-valued `f` over `[a, b]`.
///
/// `f(x, out)` writes `dim` values. The error estimate is the largest
/// component-wise Kronrod–Gauss difference.
pub fn integrate(
    mut f: impl FnMut(f64, &mut [f64]),
    a: f64,
    b: f64,
    dim: usize,
    opts: &QuadratureOptions,
) -> Result<Vec<f64>> {
    if !(a.is_finite() && b.is_finite()) {
        return Err(Error::domain("integration bounds must be finite"));
    }
    let mut buf = vec![0.0; dim];
    let n0 = opts.initial_panels.max(1);
    let width = (b - a) / n0 as f64;
    let mut panels: Vec<Panel> = (0..n0)
        .map(|i| {
            let lo = a + width * i as f64;
            let hi = if i + 1 == n0 { b } else { lo + width };
            gk15(&mut f, lo, hi, dim, &mut buf)
        })
        .collect();
    loop {
        let mut total = vec![0.0; dim];
        let mut err = 0.0;
        for p in &panels {
            for d in 0..dim {
                total[d] += p.value[d];
            }
            err += p.error;
        }
        let scale = total.iter().fold(0.0f64, |m, v| m.max(libm::fabs(*v)));
        if err <= opts.abs_tol.max(opts.rel_tol * scale) {
            return Ok(total);
        }
        if panels.len() >= opts.max_panels {
            return Err(Error::numerical("adaptive quadrature exceeded its panel budget"));
        }
        let (worst, _) = panels
            .iter()
            .enumerate()
            .fold((0, -1.0), |acc, (i, p)| if p.error > acc.1 { (i, p.error) } else { acc });
        let p = panels.swap_remove(worst);
        let mid = 0.5 * (p.a + p.b);
        panels.push(gk15(&mut f, p.a, mid, dim, &mut buf));
        panels.push(gk15(&mut f, mid, p.b, dim, &mut buf));
    }
}

pub fn integrate_scalar(
    mut f: impl FnMut(f64) -> f64,
    a: f64,
    b: f64,
    opts: &QuadratureOptions,
) -> Result<f64> {
    Ok(integrate(|x, out| out[0] = f(x), a, b, 1, opts)?[0])
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn polynomial_and_oscillatory() {
        let o = QuadratureOptions::default();
        let v = integrate_scalar(|x| x * x * x - x, 0.0, 2.0, &o).unwrap();
        assert!((v - 2.0).abs() < 1e-13);
        let v = integrate_scalar(|x| libm::cos(40.0 * x) * libm::exp(-x), 0.0, 10.0, &o).unwrap();
        let expect = {
            // ∫ e^{-x} cos(ωx) = [e^{-x}(ω sin ωx - cos ωx)]/(1+ω²)
            let w: f64 = 40.0;
            let at = |x: f64| libm::exp(-x) * (w * libm::sin(w * x) - libm::cos(w * x)) / (1.0 + w * w);
            at(10.0) - at(0.0)
        };
        assert!((v - expect).abs() < 1e-11);
    }

    #[test]
    fn vector_valued() {
        let v = integrate(
            |x, out| {
                out[0] = libm::exp(x);
                out[1] = libm::sqrt(x);
            },
            0.0,
            1.0,
            2,
            &QuadratureOptions::default(),
        )
        .unwrap();
        assert!((v[0] - (core::f64::consts::E - 1.0)).abs() < 1e-12);
        assert!((v[1] - 2.0 / 3.0).abs() < 1e-10);
    }
}
