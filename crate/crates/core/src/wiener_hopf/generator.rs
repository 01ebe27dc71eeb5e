//! Block generator `Q` of the randomized, embedded chain and the matrix
//! polynomial `K(s)`.
//!
//! State order: the `N` diffusion states, then the positive-jump states
//! (period-major, `n⁺` per period), then the negative-jump states.

use alloc::{format, vec, vec::Vec};
use core::ops::Range;

use crate::linalg::CMatrix;
use crate::model::PiecewiseModel;
use crate::{Error, Result, C64};

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct StateLayout {
    pub periods: usize,
    pub n_plus: usize,
    pub n_minus: usize,
}

impl StateLayout {
    pub fn of(m: &PiecewiseModel) -> Self {
        StateLayout { periods: m.num_periods(), n_plus: m.n_plus(), n_minus: m.n_minus() }
    }

    pub fn dim(&self) -> usize {
        self.periods * (1 + self.n_plus + self.n_minus)
    }

    pub fn diffusion(&self, w: usize) -> usize {
        w
    }

    pub fn pos_jump(&self, w: usize, k: usize) -> usize {
        self.periods + w * self.n_plus + k
    }

    pub fn neg_jump(&self, w: usize, j: usize) -> usize {
        self.periods * (1 + self.n_plus) + w * self.n_minus + j
    }

    /// Diffusion and positive-jump states: the `H⁺` block.
    pub fn upper(&self) -> Range<usize> {
        0..self.periods * (1 + self.n_plus)
    }

    /// Negative-jump states: the `T⁻` block.
    pub fn lower(&self) -> Range<usize> {
        self.periods * (1 + self.n_plus)..self.dim()
    }

    /// Diffusion and negative-jump states, in increasing order.
    pub fn infimum_states(&self) -> Vec<usize> {
        (0..self.periods).chain(self.lower()).collect()
    }

    /// Positive-jump states.
    pub fn pos_states(&self) -> Range<usize> {
        self.periods..self.periods * (1 + self.n_plus)
    }
}

#[derive(Debug, Clone)]
pub struct GeneratorBlocks {
    pub layout: StateLayout,
    pub q: Vec<C64>,
    pub generator: CMatrix,
    /// Diagonal of `S̃²`: `σ²` on diffusion states, 0 elsewhere.
    pub s2: Vec<f64>,
    /// Diagonal of `Ṽ`: `μ` on diffusion states, `+1` / `-1` on jump states.
    pub v: Vec<f64>,
}

impl GeneratorBlocks {
    pub fn dim(&self) -> usize {
        self.layout.dim()
    }

    fn block(&self, rows: Range<usize>, cols: Range<usize>) -> CMatrix {
        self.generator
            .view((rows.start, cols.start), (rows.len(), cols.len()))
            .into_owned()
    }

    pub fn h_plus(&self) -> CMatrix {
        self.block(self.layout.upper(), self.layout.upper())
    }

    pub fn d_minus(&self) -> CMatrix {
        self.block(self.layout.upper(), self.layout.lower())
    }

    pub fn c_minus(&self) -> CMatrix {
        self.block(self.layout.lower(), self.layout.upper())
    }

    pub fn t_minus(&self) -> CMatrix {
        self.block(self.layout.lower(), self.layout.lower())
    }

    /// The bidiagonal `G` block with `-q_i` on the diagonal.
    pub fn g(&self) -> CMatrix {
        let n = self.layout.periods;
        let mut g = CMatrix::zeros(n, n);
        for i in 0..n {
            g[(i, i)] = -self.q[i];
            if i + 1 < n {
                g[(i, i + 1)] = self.q[i];
            }
        }
        g
    }

    /// `K(s) = s²/2 S̃² + s Ṽ + Q`.
    pub fn k_matrix(&self, s: C64) -> CMatrix {
        let mut k = self.generator.clone();
        for i in 0..self.dim() {
            k[(i, i)] += s * s * (0.5 * self.s2[i]) + s * self.v[i];
        }
        k
    }
}

pub fn build_generator(m: &PiecewiseModel, q: &[C64]) -> Result<GeneratorBlocks> {
    let layout = StateLayout::of(m);
    if q.len() != layout.periods {
        return Err(Error::input(format!(
            "expected {} Laplace variables, got {}",
            layout.periods,
            q.len()
        )));
    }
    if let Some(bad) = q.iter().find(|z| !(z.re > 0.0)) {
        return Err(Error::domain(format!("Laplace variable {bad} must have a positive real part")));
    }
    let dim = layout.dim();
    let mut gen = CMatrix::zeros(dim, dim);
    let mut s2 = vec![0.0; dim];
    let mut v = vec![0.0; dim];
    for (w, p) in m.periods().iter().enumerate() {
        let dw = layout.diffusion(w);
        gen[(dw, dw)] = -q[w] - (p.lambda_plus() + p.lambda_minus());
        if w + 1 < layout.periods {
            gen[(dw, layout.diffusion(w + 1))] = q[w];
        }
        s2[dw] = p.sigma * p.sigma;
        v[dw] = p.mu;
        for (k, f) in p.pos_jumps.iter().enumerate() {
            let js = layout.pos_jump(w, k);
            gen[(dw, js)] = C64::new(f.intensity, 0.0);
            gen[(js, dw)] = C64::new(f.rate, 0.0);
            gen[(js, js)] = C64::new(-f.rate, 0.0);
            v[js] = 1.0;
        }
        for (j, f) in p.neg_jumps.iter().enumerate() {
            let js = layout.neg_jump(w, j);
            gen[(dw, js)] = C64::new(f.intensity, 0.0);
            gen[(js, dw)] = C64::new(f.rate, 0.0);
            gen[(js, js)] = C64::new(-f.rate, 0.0);
            v[js] = -1.0;
        }
    }
    Ok(GeneratorBlocks { layout, q: q.to_vec(), generator: gen, s2, v })
}

/// `Π_i |κ_i(s) - q_i| Π_k |s - α⁺_k| Π_l |s + α⁻_l|`, the closed form of `|det K(s)|`.
pub fn det_k_product(m: &PiecewiseModel, q: &[C64], s: C64) -> f64 {
    m.periods()
        .iter()
        .zip(q)
        .map(|(p, &qi)| {
            let mut v = (p.laplace_exponent(s) - qi).norm();
            for f in &p.pos_jumps {
                v *= (s - f.rate).norm();
            }
            for f in &p.neg_jumps {
                v *= (s + f.rate).norm();
            }
            v
        })
        .product()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::model::{JumpFamily, ModelPeriod};

    fn c(x: f64) -> C64 {
        C64::new(x, 0.0)
    }

    /// Two periods, Kou jumps in the first, pure diffusion in the second. The
    /// second period still carries one family per sign, with zero intensity.
    fn two_period_example() -> PiecewiseModel {
        PiecewiseModel::new(
            0.0,
            0.0,
            1.0,
            vec![
                ModelPeriod::new(1.0, 0.2, vec![JumpFamily::new(0.7, 5.0)], vec![JumpFamily::new(1.3, 4.0)])
                    .with_drift(0.01),
                ModelPeriod::new(1.0, 0.3, vec![JumpFamily::new(0.0, 5.0)], vec![JumpFamily::new(0.0, 4.0)])
                    .with_drift(-0.02),
            ],
        )
    }

    #[test]
    fn two_period_example_matches_hand_matrix() {
        let (q1, q2) = (1.5, 2.5);
        let b = build_generator(&two_period_example(), &[c(q1), c(q2)]).unwrap();
        // States 0, 1 diffusion; 2, 3 positive jumps; 4, 5 negative jumps.
        // Dropping the zero-intensity states 3 and 5 of period 2 leaves the
        // 4x4 generator [[-q1-λ⁺-λ⁻, q1, λ⁺, λ⁻], [0, -q2, 0, 0],
        // [α⁺, 0, -α⁺, 0], [α⁻, 0, 0, -α⁻]].
        let keep = [0usize, 1, 2, 4];
        let expect = [
            [-q1 - 2.0, q1, 0.7, 1.3],
            [0.0, -q2, 0.0, 0.0],
            [5.0, 0.0, -5.0, 0.0],
            [4.0, 0.0, 0.0, -4.0],
        ];
        for (a, &i) in keep.iter().enumerate() {
            for (bb, &j) in keep.iter().enumerate() {
                assert_eq!(b.generator[(i, j)], c(expect[a][bb]), "entry ({i}, {j})");
            }
        }
        // The dropped states only talk to the period-2 diffusion state.
        assert_eq!(b.generator[(3, 1)], c(5.0));
        assert_eq!(b.generator[(5, 1)], c(4.0));
        let s2 = [0.04, 0.09, 0.0, 0.0, 0.0, 0.0];
        assert!(b.s2.iter().zip(s2).all(|(a, e)| (a - e).abs() < 1e-15));
        assert_eq!(b.v, vec![0.01, -0.02, 1.0, 1.0, -1.0, -1.0]);
        assert_eq!(b.h_plus().nrows(), 4);
        assert_eq!(b.d_minus().shape(), (4, 2));
        assert_eq!(b.c_minus().shape(), (2, 4));
        assert_eq!(b.t_minus().shape(), (2, 2));
        assert_eq!(b.g()[(0, 1)], c(q1));
    }

    #[test]
    fn k_matrix_at_one_entrywise() {
        let m = two_period_example();
        let q = [c(1.5), c(2.5)];
        let b = build_generator(&m, &q).unwrap();
        let k = b.k_matrix(c(1.0));
        assert!((k - &b.generator).iter().enumerate().all(|(idx, z)| {
            let (i, j) = (idx % 6, idx / 6);
            if i != j {
                *z == c(0.0)
            } else {
                (*z - c(0.5 * b.s2[i] + b.v[i])).norm() < 1e-14
            }
        }));
        assert_eq!(b.k_matrix(c(0.0)), b.generator);
        let det = b.k_matrix(c(1.0)).determinant().norm();
        let expect = det_k_product(&m, &q, c(1.0));
        assert!((det - expect).abs() < 1e-12 * expect);
    }

    #[test]
    fn trivial_one_state_generator() {
        let m = PiecewiseModel::new(0.0, 0.0, 1.0, vec![ModelPeriod::new(1.0, 0.2, vec![], vec![])]);
        let b = build_generator(&m, &[c(0.8)]).unwrap();
        assert_eq!(b.generator.shape(), (1, 1));
        assert_eq!(b.generator[(0, 0)], c(-0.8));
        assert!(build_generator(&m, &[c(-0.1)]).is_err());
        assert!(build_generator(&m, &[c(1.0), c(1.0)]).is_err());
    }
}
