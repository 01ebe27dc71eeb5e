use alloc::{format, vec, vec::Vec};
use core::f64::consts::PI;

use crate::{Error, Result, C64};

/// In-place radix-2 FFT, `X_k = Σ x_j e^{∓2πijk/n}` (`-` forward, `+` inverse,
/// inverse unnormalized).
pub fn fft_in_place(data: &mut [C64], inverse: bool) -> Result<()> {
    let n = data.len();
    if n <= 1 {
        return Ok(());
    }
    if !n.is_power_of_two() {
        return Err(Error::input(format!("FFT length {n} is not a power of two")));
    }
    let bits = n.trailing_zeros();
    for i in 0..n {
        let j = i.reverse_bits() >> (usize::BITS - bits);
        if j > i {
            data.swap(i, j);
        }
    }
    let sign = if inverse { 1.0 } else { -1.0 };
    let mut len = 2;
    while len <= n {
        let ang = sign * 2.0 * PI / len as f64;
        let half = len / 2;
        // Twiddles from the exact angle each time keep round-off flat in n.
        let tw: Vec<C64> = (0..half).map(|k| C64::from_polar(1.0, ang * k as f64)).collect();
        for start in (0..n).step_by(len) {
            for k in 0..half {
                let a = data[start + k];
                let b = data[start + k + half] * tw[k];
                data[start + k] = a + b;
                data[start + k + half] = a - b;
            }
        }
        len <<= 1;
    }
    Ok(())
}

/// Fractional DFT `Σ_j x_j e^{-2πijkν}`, `k = 0..n`, through three FFTs of
/// length `2n` (Bailey–Swarztrauber).
pub fn frfft(x: &[C64], nu: f64) -> Result<Vec<C64>> {
    let n = x.len();
    if n == 0 {
        return Ok(Vec::new());
    }
    if !n.is_power_of_two() {
        return Err(Error::input(format!("fractional FFT length {n} is not a power of two")));
    }
    let chirp = |j: usize| {
        let jf = j as f64;
        C64::from_polar(1.0, -PI * jf * jf * nu)
    };
    let mut y = vec![C64::new(0.0, 0.0); 2 * n];
    let mut z = vec![C64::new(0.0, 0.0); 2 * n];
    for j in 0..n {
        y[j] = x[j] * chirp(j);
        z[j] = chirp(j).conj();
    }
    for j in n..2 * n {
        z[j] = chirp(2 * n - j).conj();
    }
    fft_in_place(&mut y, false)?;
    fft_in_place(&mut z, false)?;
    for (a, b) in y.iter_mut().zip(&z) {
        *a *= b;
    }
    fft_in_place(&mut y, true)?;
    let scale = 1.0 / (2 * n) as f64;
    Ok((0..n).map(|k| y[k] * scale * chirp(k)).collect())
}

/// Log-strike grid and frequency grid for damped Fourier inversion.
///
/// Log-strikes (relative to spot) are `k_u = -x0 + λu`, frequencies
/// `v_j = δj`, with `λ = 2x0/n` and `ν = δx0/(nπ) = δλ/(2π)`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct FrfftPlan {
    pub n: usize,
    pub delta: f64,
    pub x0: f64,
    pub alpha: f64,
}

impl FrfftPlan {
    pub fn new(n: usize, delta: f64, x0: f64, alpha: f64) -> Result<Self> {
        if !n.is_power_of_two() || n < 2 {
            return Err(Error::input(format!("grid size {n} must be a power of two ≥ 2")));
        }
        if !(delta > 0.0 && x0 > 0.0 && alpha > 0.0) {
            return Err(Error::input("grid step, half-range and damping must be positive"));
        }
        Ok(FrfftPlan { n, delta, x0, alpha })
    }

    /// Plan whose log-strike range covers `log_strikes` with a margin.
    pub fn covering(n: usize, delta: f64, alpha: f64, log_strikes: &[f64]) -> Result<Self> {
        let widest = log_strikes.iter().fold(0.0f64, |a, k| a.max(libm::fabs(*k)));
        Self::new(n, delta, (1.25 * widest).max(0.25), alpha)
    }

    pub fn lambda(&self) -> f64 {
        2.0 * self.x0 / self.n as f64
    }

    pub fn nu(&self) -> f64 {
        self.delta * self.x0 / (self.n as f64 * PI)
    }

    pub fn frequencies(&self) -> Vec<f64> {
        (0..self.n).map(|j| self.delta * j as f64).collect()
    }

    pub fn log_strikes(&self) -> Vec<f64> {
        (0..self.n).map(|u| -self.x0 + self.lambda() * u as f64).collect()
    }

    /// `e^{-αk}/π · Re Σ_j w_j δ e^{-iv_j k} F(v_j)` on the log-strike grid,
    /// with trapezoid weights `w_0 = w_{n-1} = ½`.
    pub fn invert(&self, samples: &[C64]) -> Result<Vec<f64>> {
        if samples.len() != self.n {
            return Err(Error::input(format!("expected {} samples, got {}", self.n, samples.len())));
        }
        let x: Vec<C64> = samples
            .iter()
            .enumerate()
            .map(|(j, &f)| {
                let w = if j == 0 || j + 1 == self.n { 0.5 } else { 1.0 };
                let v = self.delta * j as f64;
                f * C64::from_polar(w * self.delta, v * self.x0)
            })
            .collect();
        let sums = frfft(&x, self.nu())?;
        Ok(self
            .log_strikes()
            .iter()
            .zip(&sums)
            .map(|(&k, s)| libm::exp(-self.alpha * k) / PI * s.re)
            .collect())
    }
}
