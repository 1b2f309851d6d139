//! Cyclic complex Jacobi eigensolver for small Hermitian matrices.

use num_traits::Zero;

use super::ComplexMatrix;
use crate::error::{QcorrError, Result};
use crate::scalar::{re, Real, C};

const MAX_SWEEPS: usize = 64;

#[derive(Clone, Debug)]
pub struct HermitianEigenSystem<T> {
    /// Ascending.
    pub eigenvalues: Vec<T>,
    /// Eigenvectors as columns, matching `eigenvalues`.
    pub eigenvectors: ComplexMatrix<T>,
}

impl<T: Real> HermitianEigenSystem<T> {
    pub fn dim(&self) -> usize {
        self.eigenvalues.len()
    }

    pub fn vector(&self, k: usize) -> Vec<C<T>> {
        self.eigenvectors.column(k)
    }

    /// `V · diag(f(λ)) · V†`
    pub fn reconstruct_with(&self, f: impl Fn(T) -> T) -> ComplexMatrix<T> {
        let mapped: Vec<T> = self.eigenvalues.iter().map(|&l| f(l)).collect();
        self.reconstruct_from(&mapped)
    }

    /// `V · diag(values) · V†`
    pub fn reconstruct_from(&self, values: &[T]) -> ComplexMatrix<T> {
        let n = self.dim();
        let v = &self.eigenvectors;
        ComplexMatrix::from_fn(n, n, |i, j| {
            let mut acc = C::zero();
            for (k, &w) in values.iter().enumerate() {
                if w != T::zero() {
                    acc = acc + v[(i, k)] * v[(j, k)].conj() * w;
                }
            }
            acc
        })
    }
}

/// Eigendecomposition of the Hermitian part of `m`.
pub fn hermitian_eig<T: Real>(m: &ComplexMatrix<T>) -> Result<HermitianEigenSystem<T>> {
    if !m.is_square() {
        return Err(QcorrError::Dimension(format!(
            "eigendecomposition of a {}x{} matrix",
            m.rows(),
            m.cols()
        )));
    }
    if !m.is_finite() {
        return Err(QcorrError::Domain("non-finite matrix entry".into()));
    }
    let n = m.rows();
    let mut a = m.hermitian_part();
    for i in 0..n {
        a[(i, i)] = re(a[(i, i)].re);
    }
    let mut v = ComplexMatrix::identity(n);
    let eps = T::epsilon();
    let fro = a.as_slice().iter().map(|z| z.norm_sqr()).sum::<T>().sqrt();

    let off_norm = |a: &ComplexMatrix<T>| {
        let mut s = T::zero();
        for p in 0..n {
            for q in p + 1..n {
                s = s + a[(p, q)].norm_sqr();
            }
        }
        (s + s).sqrt()
    };

    let mut sweeps = 0;
    loop {
        let off = off_norm(&a);
        if off <= eps * fro || fro == T::zero() {
            break;
        }
        if sweeps == MAX_SWEEPS {
            if off <= T::of(1e4) * eps * fro {
                break;
            }
            return Err(QcorrError::Numerical {
                sweeps,
                residual: off.to_f64_lossy(),
            });
        }
        sweeps += 1;
        for p in 0..n {
            for q in p + 1..n {
                let apq = a[(p, q)];
                let mag = apq.norm();
                if mag == T::zero() {
                    continue;
                }
                let app = a[(p, p)].re;
                let aqq = a[(q, q)].re;
                // below the resolution of both diagonal entries: drop it
                if mag < eps * eps * (app.abs() + aqq.abs()) {
                    a[(p, q)] = C::zero();
                    a[(q, p)] = C::zero();
                    continue;
                }
                let e = apq / mag;
                let ec = e.conj();
                let theta = (aqq - app) / (mag + mag);
                let t = if theta.abs() > T::of(1e150).min(T::max_value().sqrt()) {
                    T::one() / (theta + theta)
                } else {
                    let sgn = if theta >= T::zero() { T::one() } else { -T::one() };
                    sgn / (theta.abs() + (theta * theta + T::one()).sqrt())
                };
                let cs = T::one() / (t * t + T::one()).sqrt();
                let sn = t * cs;
                // columns: A ← A·G with G = [[c, s], [-s ē, c ē]]
                for k in 0..n {
                    let akp = a[(k, p)];
                    let akq = a[(k, q)];
                    a[(k, p)] = akp * cs - akq * ec * sn;
                    a[(k, q)] = akp * sn + akq * ec * cs;
                    let vkp = v[(k, p)];
                    let vkq = v[(k, q)];
                    v[(k, p)] = vkp * cs - vkq * ec * sn;
                    v[(k, q)] = vkp * sn + vkq * ec * cs;
                }
                // rows: A ← G†·A
                for k in 0..n {
                    let apk = a[(p, k)];
                    let aqk = a[(q, k)];
                    a[(p, k)] = apk * cs - aqk * e * sn;
                    a[(q, k)] = apk * sn + aqk * e * cs;
                }
                a[(p, q)] = C::zero();
                a[(q, p)] = C::zero();
                a[(p, p)] = re(app - t * mag);
                a[(q, q)] = re(aqq + t * mag);
            }
        }
    }

    let mut order: Vec<usize> = (0..n).collect();
    order.sort_by(|&i, &j| a[(i, i)].re.partial_cmp(&a[(j, j)].re).unwrap());
    let eigenvalues = order.iter().map(|&i| a[(i, i)].re).collect();
    let eigenvectors = ComplexMatrix::from_fn(n, n, |i, j| v[(i, order[j])]);
    Ok(HermitianEigenSystem {
        eigenvalues,
        eigenvectors,
    })
}

/// `V·diag(f(clip(λ)))·V†` where eigenvalues below `clip_eps` are set to
/// exactly zero before `f` is applied.
pub fn apply_spectral<T: Real>(
    m: &ComplexMatrix<T>,
    f: impl Fn(T) -> T,
    clip_eps: T,
) -> Result<ComplexMatrix<T>> {
    let sys = hermitian_eig(m)?;
    let mapped: Vec<T> = sys
        .eigenvalues
        .iter()
        .map(|&l| f(if l < clip_eps { T::zero() } else { l }))
        .collect();
    if let Some(bad) = mapped.iter().position(|x| !x.is_finite()) {
        return Err(QcorrError::Domain(format!(
            "f({}) is not finite",
            sys.eigenvalues[bad]
        )));
    }
    Ok(sys.reconstruct_from(&mapped))
}
