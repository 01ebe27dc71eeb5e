//! Small dense complex linear algebra helpers on top of nalgebra's LU.

use nalgebra::DMatrix;

use crate::{Error, Result, C64};

pub type CMatrix = DMatrix<C64>;

pub fn norm1(a: &CMatrix) -> f64 {
    (0..a.ncols())
        .map(|j| a.column(j).iter().map(|z| z.norm()).sum::<f64>())
        .fold(0.0, f64::max)
}

pub fn frobenius(a: &CMatrix) -> f64 {
    libm::sqrt(a.iter().map(|z| z.norm_sqr()).sum::<f64>())
}

pub fn inverse(a: &CMatrix) -> Result<CMatrix> {
    a.clone()
        .lu()
        .try_inverse()
        .ok_or_else(|| Error::numerical("singular matrix"))
}

/// `‖A‖₁ ‖A⁻¹‖₁` given both matrices.
pub fn cond1(a: &CMatrix, a_inv: &CMatrix) -> f64 {
    norm1(a) * norm1(a_inv)
}

/// Matrix exponential by degree-13 Padé approximation with scaling and squaring.
pub fn expm(a: &CMatrix) -> Result<CMatrix> {
    const B: [f64; 14] = [
        64764752532480000.0,
        32382376266240000.0,
        7771770303897600.0,
        1187353796428800.0,
        129060195264000.0,
        10559470521600.0,
        670442572800.0,
        33522128640.0,
        1323241920.0,
        40840800.0,
        960960.0,
        16380.0,
        182.0,
        1.0,
    ];
    const THETA13: f64 = 5.371920351148152;
    let n = a.nrows();
    if n != a.ncols() {
        return Err(Error::input("matrix exponential needs a square matrix"));
    }
    if n == 0 {
        return Ok(CMatrix::zeros(0, 0));
    }
    let nrm = norm1(a);
    if !nrm.is_finite() {
        return Err(Error::numerical("matrix exponential of a non-finite matrix"));
    }
    let mut squarings = 0i32;
    if nrm > THETA13 {
        squarings = libm::ceil(libm::log2(nrm / THETA13)) as i32;
    }
    let scale = libm::pow(2.0, -squarings as f64);
    let a = a.map(|z| z * scale);
    let id = CMatrix::identity(n, n);
    let a2 = &a * &a;
    let a4 = &a2 * &a2;
    let a6 = &a4 * &a2;
    let c = |k: usize| C64::new(B[k], 0.0);
    let u_inner = &a6 * (&a6 * c(13) + &a4 * c(11) + &a2 * c(9))
        + &a6 * c(7)
        + &a4 * c(5)
        + &a2 * c(3)
        + &id * c(1);
    let u = &a * u_inner;
    let v = &a6 * (&a6 * c(12) + &a4 * c(10) + &a2 * c(8)) + &a6 * c(6) + &a4 * c(4) + &a2 * c(2) + &id * c(0);
    let p = &v + &u;
    let q = &v - &u;
    let mut r = q
        .lu()
        .solve(&p)
        .ok_or_else(|| Error::numerical("singular Padé denominator"))?;
    for _ in 0..squarings {
        r = &r * &r;
    }
    Ok(r)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn expm_diagonal_and_nilpotent() {
        let d = CMatrix::from_diagonal(&nalgebra::DVector::from_vec(alloc::vec![
            C64::new(-3.0, 0.0),
            C64::new(0.5, 2.0),
            C64::new(12.0, 0.0)
        ]));
        let e = expm(&d).unwrap();
        for i in 0..3 {
            let expect = d[(i, i)].exp();
            assert!((e[(i, i)] - expect).norm() < 1e-13 * expect.norm());
        }
        // exp([[0, t], [0, 0]]) = [[1, t], [0, 1]]
        let mut n = CMatrix::zeros(2, 2);
        n[(0, 1)] = C64::new(7.0, 0.0);
        let e = expm(&n).unwrap();
        assert!((e[(0, 1)] - C64::new(7.0, 0.0)).norm() < 1e-13);
        assert!((e[(0, 0)] - C64::new(1.0, 0.0)).norm() < 1e-14);
    }

    #[test]
    fn expm_generator_rows_sum_to_one() {
        let mut q = CMatrix::zeros(3, 3);
        let rates = [[0.0, 2.0, 1.0], [0.5, 0.0, 0.5], [3.0, 4.0, 0.0]];
        for i in 0..3 {
            let mut s = 0.0;
            for j in 0..3 {
                q[(i, j)] = C64::new(rates[i][j], 0.0);
                s += rates[i][j];
            }
            q[(i, i)] = C64::new(-s, 0.0);
        }
        let e = expm(&q.map(|z| z * 4.0)).unwrap();
        for i in 0..3 {
            let s: C64 = e.row(i).iter().sum();
            assert!((s - C64::new(1.0, 0.0)).norm() < 1e-12);
        }
    }

    #[test]
    fn inverse_and_condition() {
        let mut a = CMatrix::identity(2, 2);
        a[(0, 1)] = C64::new(0.0, 1.0);
        let inv = inverse(&a).unwrap();
        assert!(((&a * &inv) - CMatrix::identity(2, 2)).norm() < 1e-15);
        assert!((cond1(&a, &inv) - 4.0).abs() < 1e-14);
        assert!(inverse(&CMatrix::zeros(2, 2)).is_err());
    }
}
