use crate::{Error, Result};

/// Value read off a uniform grid, and whether it was an exact node.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct GridLookup {
    pub value: f64,
    pub snapped: bool,
}

/// Monotone cubic (Fritsch–Carlson) interpolation at `x`.
///
/// `xs` must be strictly increasing with at least two points. Points within
/// `1e-9` grid steps of a node return the node value.
pub fn pchip(xs: &[f64], ys: &[f64], x: f64) -> Result<GridLookup> {
    let n = xs.len();
    if n < 2 || ys.len() != n {
        return Err(Error::input("interpolation needs at least two matching points"));
    }
    if !(x >= xs[0] && x <= xs[n - 1]) {
        return Err(Error::domain("interpolation point outside the grid"));
    }
    let i = match xs.partition_point(|&v| v <= x) {
        0 => 0,
        p if p >= n => n - 2,
        p => p - 1,
    };
    let h = xs[i + 1] - xs[i];
    let t = (x - xs[i]) / h;
    if t.abs() < 1e-9 {
        return Ok(GridLookup { value: ys[i], snapped: true });
    }
    if (1.0 - t).abs() < 1e-9 {
        return Ok(GridLookup { value: ys[i + 1], snapped: true });
    }
    let slope = |j: usize| (ys[j + 1] - ys[j]) / (xs[j + 1] - xs[j]);
    let d_mid = slope(i);
    let tangent = |j: usize| -> f64 {
        // End points use the one-sided secant.
        if j == 0 {
            return slope(0);
        }
        if j == n - 1 {
            return slope(n - 2);
        }
        let (a, b) = (slope(j - 1), slope(j));
        if a * b <= 0.0 {
            return 0.0;
        }
        let (ha, hb) = (xs[j] - xs[j - 1], xs[j + 1] - xs[j]);
        let (w1, w2) = (2.0 * hb + ha, hb + 2.0 * ha);
        (w1 + w2) / (w1 / a + w2 / b)
    };
    let (mut m0, mut m1) = (tangent(i), tangent(i + 1));
    if d_mid == 0.0 {
        m0 = 0.0;
        m1 = 0.0;
    }
    let (t2, t3) = (t * t, t * t * t);
    let value = (2.0 * t3 - 3.0 * t2 + 1.0) * ys[i]
        + (t3 - 2.0 * t2 + t) * h * m0
        + (-2.0 * t3 + 3.0 * t2) * ys[i + 1]
        + (t3 - t2) * h * m1;
    Ok(GridLookup { value, snapped: false })
}
