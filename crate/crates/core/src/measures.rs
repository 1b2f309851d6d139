//! Closed-form correlation functionals. All logarithms are base 2.

use crate::basis::ProductBasis;
use crate::discord::DiscordResult;
use crate::error::{QcorrError, Result};
use crate::linalg::{hermitian_eig, inner, ComplexMatrix, DEFAULT_CLIP_EPS};
use crate::scalar::{xlog2x_neg, Real};
use crate::states::{MultipartiteState, Partition};

/// Eigenvector overlap with σ's null space above which `S(ρ‖σ) = +∞`.
pub const SUPPORT_OVERLAP_TOL: f64 = 1e-8;

/// Relative-entropy value in bits, with `+∞` carried as a flag.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct EntropyValue<T> {
    pub value: T,
    pub support_violation: bool,
}

impl<T: Real> EntropyValue<T> {
    pub fn finite(v: T) -> Self {
        Self {
            value: v,
            support_violation: false,
        }
    }

    pub fn infinite() -> Self {
        Self {
            value: T::infinity(),
            support_violation: true,
        }
    }

    /// `None` for the `+∞` sentinel.
    pub fn as_finite(&self) -> Option<T> {
        (!self.support_violation).then_some(self.value)
    }
}

/// `-Σ λ log2 λ` over eigenvalues above `clip_eps`, floored at zero.
pub fn matrix_entropy<T: Real>(m: &ComplexMatrix<T>, clip_eps: T) -> Result<T> {
    let eig = hermitian_eig(m)?;
    let s: T = eig
        .eigenvalues
        .iter()
        .filter(|&&l| l > clip_eps)
        .map(|&l| xlog2x_neg(l))
        .sum();
    Ok(s.max(T::zero()))
}

pub fn von_neumann_entropy<T: Real>(s: &MultipartiteState<T>) -> Result<T> {
    matrix_entropy(s.rho(), T::of(DEFAULT_CLIP_EPS))
}

/// Entropy of the marginal on `parties`.
pub fn subsystem_entropy<T: Real>(s: &MultipartiteState<T>, parties: &[usize]) -> Result<T> {
    if parties.len() == s.n_parties() {
        return von_neumann_entropy(s);
    }
    von_neumann_entropy(&s.reduce(parties)?)
}

/// Base-2 Shannon entropy; small negative entries are clipped and the
/// vector renormalized.
pub fn shannon_entropy<T: Real>(p: &[T]) -> T {
    let clipped: Vec<T> = p.iter().map(|&x| x.max(T::zero())).collect();
    let total: T = clipped.iter().copied().sum();
    if total <= T::zero() {
        return T::zero();
    }
    clipped.iter().map(|&x| xlog2x_neg(x / total)).sum()
}

/// `S(ρ‖σ)` for matrices of equal size.
pub fn relative_entropy_matrices<T: Real>(
    rho: &ComplexMatrix<T>,
    sigma: &ComplexMatrix<T>,
    clip_eps: T,
) -> Result<EntropyValue<T>> {
    if rho.rows() != sigma.rows() || !rho.is_square() || !sigma.is_square() {
        return Err(QcorrError::Dimension(format!(
            "relative entropy of {}x{} against {}x{}",
            rho.rows(),
            rho.cols(),
            sigma.rows(),
            sigma.cols()
        )));
    }
    let er = hermitian_eig(rho)?;
    let es = hermitian_eig(sigma)?;
    let n = rho.rows();
    let overlap_tol = T::of(SUPPORT_OVERLAP_TOL);
    let mut value = T::zero();
    for i in 0..n {
        let li = er.eigenvalues[i];
        if li <= clip_eps {
            continue;
        }
        value = value + li * li.log2();
        let u = er.vector(i);
        for j in 0..n {
            let ov = inner(&u, &es.vector(j)).norm_sqr();
            let sj = es.eigenvalues[j];
            if sj <= clip_eps {
                if ov >= overlap_tol {
                    return Ok(EntropyValue::infinite());
                }
                continue;
            }
            value = value - li * ov * sj.log2();
        }
    }
    Ok(EntropyValue::finite(value.max(T::zero())))
}

pub fn relative_entropy<T: Real>(
    rho: &MultipartiteState<T>,
    sigma: &MultipartiteState<T>,
) -> Result<EntropyValue<T>> {
    if rho.dims() != sigma.dims() {
        return Err(QcorrError::Dimension(format!(
            "dims {:?} vs {:?}",
            rho.dims(),
            sigma.dims()
        )));
    }
    relative_entropy_matrices(rho.rho(), sigma.rho(), T::of(DEFAULT_CLIP_EPS))
}

/// `Σ_blocks S(ρ_block) - S(ρ)` on the marginal covered by `part`.
pub fn total_mutual_information<T: Real>(s: &MultipartiteState<T>, part: &Partition) -> Result<T> {
    let (m, p) = s.restrict(part)?;
    let mut t = -von_neumann_entropy(&m)?;
    for b in p.blocks() {
        t = t + subsystem_entropy(&m, b)?;
    }
    Ok(t)
}

/// Outcome distribution of the product-basis measurement, in row-major
/// block order.
pub(crate) fn diagonal_probabilities<T: Real>(
    rho_block_order: &ComplexMatrix<T>,
    basis: &ProductBasis<T>,
) -> Vec<T> {
    rho_block_order.diagonal_in_basis(&basis.unitary())
}

/// Shannon entropy of the diagonal of ρ in a product basis of `part`'s
/// blocks (blocks taken in partition order).
pub fn lambda_functional<T: Real>(
    s: &MultipartiteState<T>,
    part: &Partition,
    basis: &ProductBasis<T>,
) -> Result<T> {
    let (m, p) = s.restrict(part)?;
    let layout = m.block_layout(&p)?;
    if basis.block_dims() != layout.block_dims {
        return Err(QcorrError::Dimension(format!(
            "basis blocks {:?} vs partition blocks {:?}",
            basis.block_dims(),
            layout.block_dims
        )));
    }
    let dev = basis.gram_deviation();
    if dev > T::of(1e-8) {
        return Err(QcorrError::Basis(dev.to_f64_lossy()));
    }
    Ok(shannon_entropy(&diagonal_probabilities(&layout.rho, basis)))
}

/// Classical correlation: the total correlation of the closest classical
/// state `χ` found by the discord search, measured on the same blocks.
pub fn classical_correlation<T: Real>(
    s: &MultipartiteState<T>,
    part: &Partition,
    discord: &DiscordResult<T>,
) -> Result<T> {
    let (m, p) = s.restrict(part)?;
    let chi = &discord.chi;
    if chi.dims() != m.dims() {
        return Err(QcorrError::StateValidation(format!(
            "χ has dims {:?}, state marginal has {:?}",
            chi.dims(),
            m.dims()
        )));
    }
    // χ must be diagonal in the reported product basis
    let layout = chi.block_layout(&p)?;
    let u = discord.best_basis.basis().unitary();
    let rotated = &(&u.adjoint() * &layout.rho) * &u;
    let mut off = T::zero();
    for i in 0..rotated.rows() {
        for j in 0..rotated.cols() {
            if i != j {
                off = off.max(rotated[(i, j)].norm());
            }
        }
    }
    if off > T::of(1e-9) {
        return Err(QcorrError::StateValidation(format!(
            "χ is not diagonal in the reported basis (off-diagonal {off})"
        )));
    }
    total_mutual_information(chi, &p)
}

#[cfg(test)]
mod tests {
    use std::collections::BTreeMap;

    use super::*;
    use crate::scalar::{re, C};
    use crate::states::{named_state, sample_random_mixed};

    fn ghz() -> MultipartiteState<f64> {
        named_state("ghz", &BTreeMap::new()).unwrap()
    }

    fn part(s: &str) -> Partition {
        Partition::parse(s).unwrap()
    }

    #[test]
    fn entropies_of_simple_states() {
        assert!(von_neumann_entropy(&ghz()).unwrap().abs() < 1e-12);
        let mixed = MultipartiteState::<f64>::new(
            vec![2, 2, 2],
            ComplexMatrix::identity(8).scale_real(0.125),
            None,
        )
        .unwrap();
        assert!((von_neumann_entropy(&mixed).unwrap() - 3.0).abs() < 1e-12);
        assert!((subsystem_entropy(&ghz(), &[0]).unwrap() - 1.0).abs() < 1e-12);
    }

    #[test]
    fn shannon_values() {
        assert_eq!(shannon_entropy(&[1.0, 0.0]), 0.0);
        assert!((shannon_entropy(&[0.5f64, 0.5]) - 1.0).abs() < 1e-15);
        let third = 1.0 / 3.0;
        assert!((shannon_entropy(&[third; 3]) - 3f64.log2()).abs() < 1e-12);
        assert!((shannon_entropy(&[0.5f64, 0.5, -1e-13]) - 1.0).abs() < 1e-12);
    }

    #[test]
    fn relative_entropy_cases() {
        let r = sample_random_mixed::<f64>(1, 8);
        assert!(relative_entropy(&r, &r).unwrap().value.abs() < 1e-10);

        let zero = MultipartiteState::new(vec![2], ComplexMatrix::from_real_diag(&[1.0, 0.0]), None).unwrap();
        let one = MultipartiteState::new(vec![2], ComplexMatrix::from_real_diag(&[0.0, 1.0]), None).unwrap();
        let d = relative_entropy(&zero, &one).unwrap();
        assert!(d.support_violation && d.as_finite().is_none());

        // GHZ against its dephased version lives on span{|000⟩,|111⟩}:
        // S = -S(GHZ) - Tr ρ log σ = 0 + 1
        let mut diag = vec![0.0; 8];
        diag[0] = 0.5;
        diag[7] = 0.5;
        let deph = MultipartiteState::new(vec![2, 2, 2], ComplexMatrix::from_real_diag(&diag), None).unwrap();
        let v = relative_entropy(&ghz(), &deph).unwrap();
        assert!(!v.support_violation);
        assert!((v.value - 1.0).abs() < 1e-10);

        assert!(matches!(relative_entropy(&zero, &ghz()), Err(QcorrError::Dimension(_))));
    }

    #[test]
    fn total_correlation_of_ghz_and_bell() {
        let g = ghz();
        assert!((total_mutual_information(&g, &part("A:B:C")).unwrap() - 3.0).abs() < 1e-12);
        assert!((total_mutual_information(&g, &part("A:B")).unwrap() - 1.0).abs() < 1e-12);
        assert!((total_mutual_information(&g, &part("AB:C")).unwrap() - 2.0).abs() < 1e-12);
        let s = 0.5f64.sqrt();
        let bell = MultipartiteState::from_pure(vec![2, 2], &[re(s), C::new(0.0, 0.0), C::new(0.0, 0.0), re(s)], None).unwrap();
        assert!((total_mutual_information(&bell, &part("A:B")).unwrap() - 2.0).abs() < 1e-12);
    }

    #[test]
    fn product_state_has_no_total_correlation() {
        let a = ComplexMatrix::from_real_diag(&[0.3f64, 0.7]);
        let b = ComplexMatrix::from_real_diag(&[0.9, 0.1]);
        let ab = crate::linalg::kron(&crate::linalg::kron(&a, &b), &a);
        let st = MultipartiteState::new(vec![2, 2, 2], ab, None).unwrap();
        for p in ["A:B:C", "AB:C", "A:C", "BC:A"] {
            assert!(total_mutual_information(&st, &part(p)).unwrap().abs() < 1e-12);
        }
    }

    #[test]
    fn lambda_of_ghz_and_maximally_mixed() {
        let comp = ProductBasis::from_matrices(vec![ComplexMatrix::identity(2); 3]);
        assert!((lambda_functional(&ghz(), &part("A:B:C"), &comp).unwrap() - 1.0).abs() < 1e-12);
        let mixed = MultipartiteState::<f64>::new(vec![2, 2, 2], ComplexMatrix::identity(8).scale_real(0.125), None).unwrap();
        let rot = crate::basis::BlockBasis { dim: 2, angles: vec![0.4, 1.3] }.unitary();
        let b = ProductBasis::from_matrices(vec![rot.clone(), rot.clone(), rot]);
        assert!((lambda_functional(&mixed, &part("A:B:C"), &b).unwrap() - 3.0).abs() < 1e-12);
        let bad = ProductBasis::from_matrices(vec![ComplexMatrix::from_real_diag(&[1.0, 0.9]), ComplexMatrix::identity(2), ComplexMatrix::identity(2)]);
        assert!(matches!(lambda_functional(&ghz(), &part("A:B:C"), &bad), Err(QcorrError::Basis(_))));
    }
}
