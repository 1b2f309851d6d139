//! Dense complex matrices and the handful of kernels the correlation
//! measures are built on: Kronecker products, partial traces, party
//! permutations and Hermitian spectral calculus.
//!
//! Storage is row-major. Party 0 is the leftmost tensor factor.

mod eigen;

use std::ops::{Add, Index, IndexMut, Mul, Sub};

use num_complex::Complex;
use num_traits::{One, Zero};

use crate::error::{QcorrError, Result};
use crate::scalar::{re, Real, C};

pub use eigen::{apply_spectral, hermitian_eig, HermitianEigenSystem};

/// Default threshold below which eigenvalues are treated as exactly zero.
pub const DEFAULT_CLIP_EPS: f64 = 1e-12;

#[derive(Clone, Debug, PartialEq)]
pub struct ComplexMatrix<T> {
    rows: usize,
    cols: usize,
    data: Vec<C<T>>,
}

impl<T: Real> ComplexMatrix<T> {
    pub fn zeros(rows: usize, cols: usize) -> Self {
        Self {
            rows,
            cols,
            data: vec![C::zero(); rows * cols],
        }
    }

    pub fn identity(n: usize) -> Self {
        let mut m = Self::zeros(n, n);
        for i in 0..n {
            m[(i, i)] = C::one();
        }
        m
    }

    pub fn from_fn(rows: usize, cols: usize, mut f: impl FnMut(usize, usize) -> C<T>) -> Self {
        let mut data = Vec::with_capacity(rows * cols);
        for i in 0..rows {
            for j in 0..cols {
                data.push(f(i, j));
            }
        }
        Self { rows, cols, data }
    }

    /// Row-major construction. Fails if `data.len() != rows * cols`.
    pub fn from_row_major(rows: usize, cols: usize, data: Vec<C<T>>) -> Result<Self> {
        if data.len() != rows * cols {
            return Err(QcorrError::Dimension(format!(
                "{} entries for a {rows}x{cols} matrix",
                data.len()
            )));
        }
        Ok(Self { rows, cols, data })
    }

    pub fn from_real_diag(diag: &[T]) -> Self {
        let n = diag.len();
        let mut m = Self::zeros(n, n);
        for (i, &d) in diag.iter().enumerate() {
            m[(i, i)] = re(d);
        }
        m
    }

    /// `|v⟩⟨v|`
    pub fn outer(v: &[C<T>]) -> Self {
        Self::from_fn(v.len(), v.len(), |i, j| v[i] * v[j].conj())
    }

    /// `Σ_k w_k |v_k⟩⟨v_k|`
    pub fn mixture<'a>(terms: impl IntoIterator<Item = (T, &'a [C<T>])>, dim: usize) -> Self {
        let mut m = Self::zeros(dim, dim);
        for (w, v) in terms {
            for i in 0..dim {
                let wi = v[i] * w;
                for j in 0..dim {
                    m.data[i * dim + j] = m.data[i * dim + j] + wi * v[j].conj();
                }
            }
        }
        m
    }

    pub fn rows(&self) -> usize {
        self.rows
    }

    pub fn cols(&self) -> usize {
        self.cols
    }

    pub fn is_square(&self) -> bool {
        self.rows == self.cols
    }

    pub fn as_slice(&self) -> &[C<T>] {
        &self.data
    }

    pub fn column(&self, j: usize) -> Vec<C<T>> {
        (0..self.rows).map(|i| self[(i, j)]).collect()
    }

    pub fn diagonal(&self) -> Vec<C<T>> {
        (0..self.rows.min(self.cols)).map(|i| self[(i, i)]).collect()
    }

    pub fn adjoint(&self) -> Self {
        Self::from_fn(self.cols, self.rows, |i, j| self[(j, i)].conj())
    }

    pub fn scale(&self, s: C<T>) -> Self {
        Self {
            rows: self.rows,
            cols: self.cols,
            data: self.data.iter().map(|&z| z * s).collect(),
        }
    }

    pub fn scale_real(&self, s: T) -> Self {
        self.scale(re(s))
    }

    pub fn trace(&self) -> C<T> {
        (0..self.rows.min(self.cols))
            .map(|i| self[(i, i)])
            .fold(C::zero(), |a, b| a + b)
    }

    /// `Re Tr(self · other)` without forming the product.
    pub fn trace_product_re(&self, other: &Self) -> T {
        let mut acc = T::zero();
        for i in 0..self.rows {
            for k in 0..self.cols {
                acc = acc + (self[(i, k)] * other[(k, i)]).re;
            }
        }
        acc
    }

    pub fn max_abs(&self) -> T {
        self.data.iter().map(|z| z.norm()).fold(T::zero(), T::max)
    }

    /// Element-wise max-norm of the difference; `+∞` on shape mismatch.
    pub fn max_abs_diff(&self, other: &Self) -> T {
        if self.rows != other.rows || self.cols != other.cols {
            return T::infinity();
        }
        self.data
            .iter()
            .zip(&other.data)
            .map(|(a, b)| (*a - *b).norm())
            .fold(T::zero(), T::max)
    }

    pub fn is_finite(&self) -> bool {
        self.data.iter().all(|z| z.re.is_finite() && z.im.is_finite())
    }

    pub fn hermiticity_defect(&self) -> T {
        if !self.is_square() {
            return T::infinity();
        }
        let mut worst = T::zero();
        for i in 0..self.rows {
            for j in i..self.cols {
                worst = worst.max((self[(i, j)] - self[(j, i)].conj()).norm());
            }
        }
        worst
    }

    /// `(M + M†)/2`
    pub fn hermitian_part(&self) -> Self {
        let half = T::of(0.5);
        Self::from_fn(self.rows, self.cols, |i, j| {
            (self[(i, j)] + self[(j, i)].conj()) * half
        })
    }

    pub fn matmul(&self, other: &Self) -> Result<Self> {
        if self.cols != other.rows {
            return Err(QcorrError::Dimension(format!(
                "cannot multiply {}x{} by {}x{}",
                self.rows, self.cols, other.rows, other.cols
            )));
        }
        let mut out = Self::zeros(self.rows, other.cols);
        for i in 0..self.rows {
            for k in 0..self.cols {
                let a = self.data[i * self.cols + k];
                if a.is_zero() {
                    continue;
                }
                let orow = &other.data[k * other.cols..(k + 1) * other.cols];
                let dst = &mut out.data[i * other.cols..(i + 1) * other.cols];
                for (d, b) in dst.iter_mut().zip(orow) {
                    *d = *d + a * *b;
                }
            }
        }
        Ok(out)
    }

    pub fn apply(&self, v: &[C<T>]) -> Vec<C<T>> {
        (0..self.rows)
            .map(|i| {
                self.data[i * self.cols..(i + 1) * self.cols]
                    .iter()
                    .zip(v)
                    .fold(C::zero(), |acc, (a, b)| acc + *a * *b)
            })
            .collect()
    }

    /// `⟨v|M|v⟩`, real part.
    pub fn expectation(&self, v: &[C<T>]) -> T {
        let mv = self.apply(v);
        v.iter().zip(&mv).map(|(a, b)| (a.conj() * b).re).sum()
    }

    /// `U† M U` restricted to its diagonal, real parts.
    pub fn diagonal_in_basis(&self, u: &Self) -> Vec<T> {
        let n = self.rows;
        let mut out = vec![T::zero(); u.cols];
        for (k, o) in out.iter_mut().enumerate() {
            let mut acc = C::zero();
            for i in 0..n {
                let mut row = C::zero();
                for j in 0..n {
                    row = row + self.data[i * n + j] * u.data[j * u.cols + k];
                }
                acc = acc + u.data[i * u.cols + k].conj() * row;
            }
            *o = acc.re;
        }
        out
    }
}

impl<T> Index<(usize, usize)> for ComplexMatrix<T> {
    type Output = Complex<T>;
    #[inline]
    fn index(&self, (i, j): (usize, usize)) -> &Complex<T> {
        &self.data[i * self.cols + j]
    }
}

impl<T> IndexMut<(usize, usize)> for ComplexMatrix<T> {
    #[inline]
    fn index_mut(&mut self, (i, j): (usize, usize)) -> &mut Complex<T> {
        &mut self.data[i * self.cols + j]
    }
}

impl<T: Real> Add for &ComplexMatrix<T> {
    type Output = ComplexMatrix<T>;
    fn add(self, rhs: Self) -> ComplexMatrix<T> {
        assert_eq!((self.rows, self.cols), (rhs.rows, rhs.cols), "shape mismatch");
        ComplexMatrix {
            rows: self.rows,
            cols: self.cols,
            data: self.data.iter().zip(&rhs.data).map(|(a, b)| a + b).collect(),
        }
    }
}

impl<T: Real> Sub for &ComplexMatrix<T> {
    type Output = ComplexMatrix<T>;
    fn sub(self, rhs: Self) -> ComplexMatrix<T> {
        assert_eq!((self.rows, self.cols), (rhs.rows, rhs.cols), "shape mismatch");
        ComplexMatrix {
            rows: self.rows,
            cols: self.cols,
            data: self.data.iter().zip(&rhs.data).map(|(a, b)| a - b).collect(),
        }
    }
}

impl<T: Real> Mul for &ComplexMatrix<T> {
    type Output = ComplexMatrix<T>;
    fn mul(self, rhs: Self) -> ComplexMatrix<T> {
        self.matmul(rhs).expect("shape mismatch")
    }
}

/// Standard Kronecker product; dimensions multiply.
pub fn kron<T: Real>(a: &ComplexMatrix<T>, b: &ComplexMatrix<T>) -> ComplexMatrix<T> {
    let (ar, ac, br, bc) = (a.rows, a.cols, b.rows, b.cols);
    ComplexMatrix::from_fn(ar * br, ac * bc, |i, j| {
        a[(i / br, j / bc)] * b[(i % br, j % bc)]
    })
}

pub fn kron_vec<T: Real>(a: &[C<T>], b: &[C<T>]) -> Vec<C<T>> {
    let mut out = Vec::with_capacity(a.len() * b.len());
    for x in a {
        for y in b {
            out.push(*x * *y);
        }
    }
    out
}

pub fn inner<T: Real>(a: &[C<T>], b: &[C<T>]) -> C<T> {
    a.iter().zip(b).fold(C::zero(), |acc, (x, y)| acc + x.conj() * y)
}

pub fn vec_norm<T: Real>(v: &[C<T>]) -> T {
    v.iter().map(|z| z.norm_sqr()).sum::<T>().sqrt()
}

/// Returns `None` for the zero vector.
pub fn normalized<T: Real>(v: &[C<T>]) -> Option<Vec<C<T>>> {
    let n = vec_norm(v);
    if n <= T::zero() || !n.is_finite() {
        return None;
    }
    Some(v.iter().map(|z| *z / n).collect())
}

fn strides(dims: &[usize]) -> Vec<usize> {
    let mut s = vec![1; dims.len()];
    for i in (0..dims.len().saturating_sub(1)).rev() {
        s[i] = s[i + 1] * dims[i + 1];
    }
    s
}

/// Flat offsets of every multi-index over `parties` (in the given order),
/// enumerated in row-major order of those parties.
fn offsets(dims: &[usize], strides: &[usize], parties: &[usize]) -> Vec<usize> {
    let mut out = vec![0usize];
    for &p in parties {
        let mut next = Vec::with_capacity(out.len() * dims[p]);
        for &o in &out {
            for d in 0..dims[p] {
                next.push(o + d * strides[p]);
            }
        }
        out = next;
    }
    out
}

fn check_dims<T: Real>(m: &ComplexMatrix<T>, dims: &[usize]) -> Result<()> {
    let total: usize = dims.iter().product();
    if !m.is_square() || total != m.rows || dims.iter().any(|&d| d == 0) {
        return Err(QcorrError::Dimension(format!(
            "local dims {dims:?} do not factor a {}x{} matrix",
            m.rows, m.cols
        )));
    }
    Ok(())
}

/// Reduced operator on `keep`; kept parties stay in ascending order.
pub fn partial_trace<T: Real>(
    m: &ComplexMatrix<T>,
    dims: &[usize],
    keep: &[usize],
) -> Result<ComplexMatrix<T>> {
    check_dims(m, dims)?;
    let mut kept: Vec<usize> = keep.to_vec();
    kept.sort_unstable();
    kept.dedup();
    if kept.is_empty() || kept.iter().any(|&k| k >= dims.len()) {
        return Err(QcorrError::Dimension(format!(
            "keep set {keep:?} invalid for {} parties",
            dims.len()
        )));
    }
    let traced: Vec<usize> = (0..dims.len()).filter(|p| !kept.contains(p)).collect();
    let st = strides(dims);
    let ok = offsets(dims, &st, &kept);
    let ot = offsets(dims, &st, &traced);
    let n = ok.len();
    let full = m.rows;
    let mut out = ComplexMatrix::zeros(n, n);
    for (a, &oa) in ok.iter().enumerate() {
        for (b, &ob) in ok.iter().enumerate() {
            let mut acc = C::zero();
            for &r in &ot {
                acc = acc + m.data[(oa + r) * full + ob + r];
            }
            out.data[a * n + b] = acc;
        }
    }
    Ok(out)
}

/// Reorders tensor factors: party `j` of the result is party `order[j]` of
/// the input. Returns the permuted matrix and its local dimensions.
pub fn permute_parties<T: Real>(
    m: &ComplexMatrix<T>,
    dims: &[usize],
    order: &[usize],
) -> Result<(ComplexMatrix<T>, Vec<usize>)> {
    check_dims(m, dims)?;
    let mut sorted = order.to_vec();
    sorted.sort_unstable();
    if sorted != (0..dims.len()).collect::<Vec<_>>() {
        return Err(QcorrError::Dimension(format!(
            "{order:?} is not a permutation of {} parties",
            dims.len()
        )));
    }
    let st = strides(dims);
    let map = offsets(dims, &st, order);
    let n = m.rows;
    let out = ComplexMatrix::from_fn(n, n, |i, j| m.data[map[i] * n + map[j]]);
    Ok((out, order.iter().map(|&p| dims[p]).collect()))
}

/// Same reordering as [`permute_parties`] applied to a state vector.
pub fn permute_vector<T: Real>(v: &[C<T>], dims: &[usize], order: &[usize]) -> Vec<C<T>> {
    let st = strides(dims);
    offsets(dims, &st, order).into_iter().map(|k| v[k]).collect()
}

/// `Re Tr(ρ²)`
pub fn purity<T: Real>(m: &ComplexMatrix<T>) -> T {
    m.trace_product_re(m)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn diag(d: &[f64]) -> ComplexMatrix<f64> {
        ComplexMatrix::from_real_diag(d)
    }

    fn bell() -> ComplexMatrix<f64> {
        let s = 0.5f64.sqrt();
        let v = vec![re(s), C::zero(), C::zero(), re(s)];
        ComplexMatrix::outer(&v)
    }

    #[test]
    fn kron_identity_and_projectors() {
        let i2 = ComplexMatrix::<f64>::identity(2);
        assert_eq!(kron(&i2, &i2), ComplexMatrix::identity(4));
        assert_eq!(kron(&diag(&[1.0, 0.0]), &diag(&[0.0, 1.0])), diag(&[0.0, 1.0, 0.0, 0.0]));
    }

    #[test]
    fn kron_then_trace_recovers_factor() {
        let rho_b = ComplexMatrix::from_row_major(
            2,
            2,
            vec![re(0.7), C::new(0.1, -0.2), C::new(0.1, 0.2), re(0.3)],
        )
        .unwrap();
        let joint = kron(&diag(&[1.0, 0.0]), &rho_b);
        let back = partial_trace(&joint, &[2, 2], &[1]).unwrap();
        assert!(back.max_abs_diff(&rho_b) < 1e-15);
    }

    #[test]
    fn bell_marginal_is_maximally_mixed() {
        let r = partial_trace(&bell(), &[2, 2], &[0]).unwrap();
        assert!(r.max_abs_diff(&diag(&[0.5, 0.5])) < 1e-15);
    }

    #[test]
    fn ghz_two_party_marginal_by_index_contraction() {
        let s = 0.5f64.sqrt();
        let mut v = vec![C::zero(); 8];
        v[0] = re(s);
        v[7] = re(s);
        let ghz = ComplexMatrix::outer(&v);
        let r = partial_trace(&ghz, &[2, 2, 2], &[0, 1]).unwrap();
        // direct contraction: r[ab][a'b'] = Σ_c ρ[abc][a'b'c]
        let mut oracle = ComplexMatrix::<f64>::zeros(4, 4);
        for ab in 0..4 {
            for ab2 in 0..4 {
                for c in 0..2 {
                    oracle[(ab, ab2)] += ghz[(ab * 2 + c, ab2 * 2 + c)];
                }
            }
        }
        assert!(r.max_abs_diff(&oracle) < 1e-15);
        assert!(r.max_abs_diff(&diag(&[0.5, 0.0, 0.0, 0.5])) < 1e-15);
    }

    #[test]
    fn dimension_mismatch_is_reported() {
        let m = ComplexMatrix::<f64>::identity(8);
        assert!(matches!(
            partial_trace(&m, &[2, 2], &[0]),
            Err(QcorrError::Dimension(_))
        ));
        assert!(partial_trace(&m, &[2, 2, 2], &[]).is_err());
        assert!(partial_trace(&m, &[2, 2, 2], &[3]).is_err());
    }

    #[test]
    fn permutation_moves_factors() {
        let a = diag(&[1.0, 0.0]);
        let b = diag(&[0.25, 0.75]);
        let c = diag(&[0.5, 0.5]);
        let abc = kron(&kron(&a, &b), &c);
        let (cab, d) = permute_parties(&abc, &[2, 2, 2], &[2, 0, 1]).unwrap();
        assert_eq!(d, vec![2, 2, 2]);
        assert!(cab.max_abs_diff(&kron(&kron(&c, &a), &b)) < 1e-15);
    }

    #[test]
    fn sequential_and_joint_traces_agree_on_mixed_dims() {
        let n = 12;
        let m = ComplexMatrix::<f64>::from_fn(n, n, |i, j| {
            C::new(((i * 7 + j * 3) % 5) as f64, ((i + 2 * j) % 3) as f64 - 1.0)
        });
        let dims = [2, 3, 2];
        let joint = partial_trace(&m, &dims, &[0]).unwrap();
        let step = partial_trace(&m, &dims, &[0, 1]).unwrap();
        let seq = partial_trace(&step, &[2, 3], &[0]).unwrap();
        assert!(joint.max_abs_diff(&seq) < 1e-12);
    }
}
