//! Local orthonormal bases and their real parameterization.
//!
//! A `d`-dimensional block basis is the column set of a chain of
//! `d(d-1)/2` two-level rotations `T(θ, φ)` acting on index pairs
//! `(0,1), (0,2), …, (d-2,d-1)`; column phases are irrelevant for
//! projective measurements, so `d(d-1)` real numbers cover every basis.
//! For a qubit the chain is a single rotation: the basis
//! `{√(1-t²)|0⟩ + t e^{-iφ}|1⟩, t|0⟩ - √(1-t²) e^{-iφ}|1⟩}`.

use num_traits::Zero;

use crate::error::{QcorrError, Result};
use crate::linalg::{kron, ComplexMatrix};
use crate::scalar::{phase, Real, C};

fn pairs(d: usize) -> impl Iterator<Item = (usize, usize)> {
    (0..d).flat_map(move |i| (i + 1..d).map(move |j| (i, j)))
}

pub fn block_param_count(d: usize) -> usize {
    d * d.saturating_sub(1)
}

/// Angles of one block: `(θ_k, φ_k)` per rotation, in chain order.
#[derive(Clone, Debug, PartialEq)]
pub struct BlockBasis<T> {
    pub dim: usize,
    pub angles: Vec<T>,
}

impl<T: Real> BlockBasis<T> {
    pub fn computational(dim: usize) -> Self {
        Self {
            dim,
            angles: vec![T::zero(); block_param_count(dim)],
        }
    }

    pub fn unitary(&self) -> ComplexMatrix<T> {
        let d = self.dim;
        let mut g = ComplexMatrix::identity(d);
        for (k, (i, j)) in pairs(d).enumerate() {
            let (theta, phi) = (self.angles[2 * k], self.angles[2 * k + 1]);
            let (s, c) = theta.sin_cos();
            let e = phase(phi);
            // g ← g · T(θ, φ), touching columns i and j only
            for r in 0..d {
                let gi = g[(r, i)];
                let gj = g[(r, j)];
                g[(r, i)] = gi * c + gj * e * s;
                g[(r, j)] = gj * c - gi * e.conj() * s;
            }
        }
        g
    }

    /// Parameters whose chain reproduces the columns of `v` up to phases.
    pub fn from_unitary(v: &ComplexMatrix<T>) -> Result<Self> {
        let d = v.rows();
        if !v.is_square() {
            return Err(QcorrError::Dimension("basis matrix must be square".into()));
        }
        let mut w = v.clone();
        let mut angles = Vec::with_capacity(block_param_count(d));
        for (i, j) in pairs(d) {
            let a = w[(i, i)];
            let b = w[(j, i)];
            let theta = b.norm().atan2(a.norm());
            let phi = if b.is_zero() {
                T::zero()
            } else if a.is_zero() {
                b.arg()
            } else {
                b.arg() - a.arg()
            };
            let (s, c) = theta.sin_cos();
            let e = phase(phi);
            // w ← T(θ, φ)† · w on rows i, j
            for k in 0..d {
                let wi = w[(i, k)];
                let wj = w[(j, k)];
                w[(i, k)] = wi * c + wj * e.conj() * s;
                w[(j, k)] = wj * c - wi * e * s;
            }
            angles.push(theta);
            angles.push(phi);
        }
        Ok(Self { dim: d, angles })
    }

    /// Canonical `(t, φ)` of a qubit basis, `t ∈ [0, 1]`, `φ ∈ [0, 2π)`.
    pub fn qubit_coordinates(&self) -> Option<(T, T)> {
        if self.dim != 2 {
            return None;
        }
        let u = self.unitary();
        let (a, b) = (u[(0, 0)], u[(1, 0)]);
        let z = if a.norm() > T::zero() { b * (a.conj() / a.norm()) } else { b };
        let t = z.norm().min(T::one());
        let tau = T::TAU();
        let mut phi = if t > T::zero() { -z.arg() } else { T::zero() };
        phi = phi % tau;
        if phi < T::zero() {
            phi = phi + tau;
        }
        Some((t, phi))
    }
}

/// One parameterized orthonormal basis per partition block; the optimizer's
/// search variable for discord.
#[derive(Clone, Debug, PartialEq)]
pub struct ProductBasisPoint<T> {
    pub blocks: Vec<BlockBasis<T>>,
}

impl<T: Real> ProductBasisPoint<T> {
    pub fn computational(block_dims: &[usize]) -> Self {
        Self {
            blocks: block_dims.iter().map(|&d| BlockBasis::computational(d)).collect(),
        }
    }

    pub fn param_count(block_dims: &[usize]) -> usize {
        block_dims.iter().map(|&d| block_param_count(d)).sum()
    }

    pub fn from_flat(block_dims: &[usize], x: &[T]) -> Self {
        let mut off = 0;
        let blocks = block_dims
            .iter()
            .map(|&d| {
                let n = block_param_count(d);
                let b = BlockBasis {
                    dim: d,
                    angles: x[off..off + n].to_vec(),
                };
                off += n;
                b
            })
            .collect();
        Self { blocks }
    }

    pub fn flat(&self) -> Vec<T> {
        self.blocks.iter().flat_map(|b| b.angles.iter().copied()).collect()
    }

    pub fn from_unitaries(us: &[ComplexMatrix<T>]) -> Result<Self> {
        Ok(Self {
            blocks: us.iter().map(BlockBasis::from_unitary).collect::<Result<_>>()?,
        })
    }

    pub fn basis(&self) -> ProductBasis<T> {
        ProductBasis {
            blocks: self.blocks.iter().map(BlockBasis::unitary).collect(),
        }
    }
}

/// Explicit product basis: one matrix per block whose columns are the
/// block's basis vectors. Not checked for orthonormality on construction.
#[derive(Clone, Debug)]
pub struct ProductBasis<T> {
    pub blocks: Vec<ComplexMatrix<T>>,
}

impl<T: Real> ProductBasis<T> {
    pub fn from_matrices(blocks: Vec<ComplexMatrix<T>>) -> Self {
        Self { blocks }
    }

    pub fn block_dims(&self) -> Vec<usize> {
        self.blocks.iter().map(|b| b.rows()).collect()
    }

    /// Largest `|(B†B - I)_ij|` over all blocks.
    pub fn gram_deviation(&self) -> T {
        self.blocks
            .iter()
            .map(|b| {
                if !b.is_square() {
                    return T::infinity();
                }
                (&b.adjoint() * b).max_abs_diff(&ComplexMatrix::identity(b.cols()))
            })
            .fold(T::zero(), T::max)
    }

    /// `⊗_b U_b` in block order.
    pub fn unitary(&self) -> ComplexMatrix<T> {
        let mut it = self.blocks.iter();
        let first = it.next().cloned().unwrap_or_else(|| ComplexMatrix::identity(1));
        it.fold(first, |acc, b| kron(&acc, b))
    }

    /// Product basis vector `|k⟩`, `k` in row-major block order.
    pub fn vector(&self, k: usize) -> Vec<C<T>> {
        self.unitary().column(k)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::linalg::hermitian_eig;
    use crate::scalar::re;

    fn same_projectors(a: &ComplexMatrix<f64>, b: &ComplexMatrix<f64>) -> f64 {
        let mut worst: f64 = 0.0;
        for k in 0..a.cols() {
            let pa = ComplexMatrix::outer(&a.column(k));
            let pb = ComplexMatrix::outer(&b.column(k));
            worst = worst.max(pa.max_abs_diff(&pb));
        }
        worst
    }

    #[test]
    fn chain_is_unitary() {
        for d in [2, 3, 4] {
            let x: Vec<f64> = (0..block_param_count(d)).map(|k| 0.37 * k as f64 + 0.11).collect();
            let b = BlockBasis { dim: d, angles: x };
            let u = b.unitary();
            let gram = &u.adjoint() * &u;
            assert!(gram.max_abs_diff(&ComplexMatrix::identity(d)) < 1e-12);
        }
    }

    #[test]
    fn decomposition_round_trips() {
        for seed in 0..20u64 {
            for d in [2, 4] {
                let h = ComplexMatrix::<f64>::from_fn(d, d, |i, j| {
                    let x = ((seed as usize + 3) * (i + 1) * 7 + j * 13) as f64;
                    C::new(x.sin(), (x * 0.7).cos())
                })
                .hermitian_part();
                let v = hermitian_eig(&h).unwrap().eigenvectors;
                let b = BlockBasis::from_unitary(&v).unwrap();
                assert!(same_projectors(&b.unitary(), &v) < 1e-12);
            }
        }
    }

    #[test]
    fn qubit_coordinates_match_the_t_phi_form() {
        let (t, phi) = (0.6f64, 1.1f64);
        let c = (1.0 - t * t).sqrt();
        let e = C::new(phi.cos(), -phi.sin());
        let v = ComplexMatrix::from_row_major(2, 2, vec![re(c), re(t), e * t, -(e * c)]).unwrap();
        let b = BlockBasis::from_unitary(&v).unwrap();
        let (t2, phi2) = b.qubit_coordinates().unwrap();
        assert!((t2 - t).abs() < 1e-12 && (phi2 - phi).abs() < 1e-12, "{t2} {phi2}");
        let (t0, _) = BlockBasis::<f64>::computational(2).qubit_coordinates().unwrap();
        assert_eq!(t0, 0.0);
    }

    #[test]
    fn gram_deviation_flags_bad_bases() {
        let good = ProductBasis::from_matrices(vec![ComplexMatrix::<f64>::identity(2); 3]);
        assert!(good.gram_deviation() < 1e-15);
        let bad = ProductBasis::from_matrices(vec![ComplexMatrix::<f64>::from_real_diag(&[1.0, 0.5])]);
        assert!(bad.gram_deviation() > 0.1);
    }
}
