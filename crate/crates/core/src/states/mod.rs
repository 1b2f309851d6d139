//! Density operators with an explicit tensor factorization, partitions of
//! their parties, and the named state families used throughout the crate.

mod families;
mod io;
mod sampling;

use std::fmt;

use crate::error::{QcorrError, Result};
use crate::linalg::{self, hermitian_eig, ComplexMatrix};
use crate::scalar::{Real, C};

pub use families::{named_state, Family, FamilySpec};
pub use io::{load_state, save_state, state_from_json, state_to_json};
pub use sampling::{rng_for, sample_random_mixed, sample_random_pure, sample_random_pure_from, SamplingMethod};

/// Tolerance for hermiticity, trace and positivity checks.
pub const STATE_TOL: f64 = 1e-9;

#[derive(Clone, Debug)]
pub struct MultipartiteState<T> {
    dims: Vec<usize>,
    rho: ComplexMatrix<T>,
    label: Option<String>,
    origin: Option<FamilySpec>,
}

impl<T: Real> MultipartiteState<T> {
    /// Validates eagerly: finite, Hermitian, unit trace and positive
    /// semidefinite (all within [`STATE_TOL`]), and `∏ dims = dim ρ`.
    pub fn new(dims: Vec<usize>, rho: ComplexMatrix<T>, label: Option<String>) -> Result<Self> {
        let total: usize = dims.iter().product();
        if dims.is_empty() || dims.iter().any(|&d| d == 0) {
            return Err(QcorrError::Dimension(format!("invalid local dims {dims:?}")));
        }
        if !rho.is_square() || rho.rows() != total {
            return Err(QcorrError::Dimension(format!(
                "dims {dims:?} need a {total}x{total} matrix, got {}x{}",
                rho.rows(),
                rho.cols()
            )));
        }
        if !rho.is_finite() {
            return Err(QcorrError::StateValidation("non-finite entry".into()));
        }
        let tol = T::of(STATE_TOL);
        let herm = rho.hermiticity_defect();
        if herm > tol {
            return Err(QcorrError::StateValidation(format!("not Hermitian (defect {herm})")));
        }
        let rho = rho.hermitian_part();
        let tr = rho.trace().re;
        if (tr - T::one()).abs() > tol {
            return Err(QcorrError::StateValidation(format!("trace is {tr}, expected 1")));
        }
        let min_eig = hermitian_eig(&rho)?.eigenvalues[0];
        if min_eig < -tol {
            return Err(QcorrError::StateValidation(format!(
                "negative eigenvalue {min_eig}"
            )));
        }
        Ok(Self {
            dims,
            rho,
            label,
            origin: None,
        })
    }

    /// Pure state `|ψ⟩⟨ψ|`; the vector must be normalized within 1e-9.
    pub fn from_pure(dims: Vec<usize>, psi: &[C<T>], label: Option<String>) -> Result<Self> {
        let n = linalg::vec_norm(psi);
        if (n - T::one()).abs() > T::of(STATE_TOL) {
            return Err(QcorrError::Param(format!("state vector has norm {n}")));
        }
        Self::new(dims, ComplexMatrix::outer(psi), label)
    }

    pub fn with_label(mut self, label: impl Into<String>) -> Self {
        self.label = Some(label.into());
        self
    }

    pub(crate) fn with_origin(mut self, origin: FamilySpec) -> Self {
        self.origin = Some(origin);
        self
    }

    pub fn dims(&self) -> &[usize] {
        &self.dims
    }

    pub fn n_parties(&self) -> usize {
        self.dims.len()
    }

    pub fn dim(&self) -> usize {
        self.rho.rows()
    }

    pub fn rho(&self) -> &ComplexMatrix<T> {
        &self.rho
    }

    pub fn label(&self) -> Option<&str> {
        self.label.as_deref()
    }

    /// The named family this state was built from, if any.
    pub fn origin(&self) -> Option<&FamilySpec> {
        self.origin.as_ref()
    }

    pub fn purity(&self) -> T {
        linalg::purity(&self.rho)
    }

    pub fn is_pure(&self) -> bool {
        self.purity() >= T::one() - T::of(STATE_TOL)
    }

    /// Marginal on `keep` (ascending party order).
    pub fn reduce(&self, keep: &[usize]) -> Result<Self> {
        let rho = linalg::partial_trace(&self.rho, &self.dims, keep)?;
        let mut kept = keep.to_vec();
        kept.sort_unstable();
        kept.dedup();
        let dims = kept.iter().map(|&k| self.dims[k]).collect();
        Ok(Self {
            dims,
            rho,
            label: None,
            origin: None,
        })
    }

    /// Party `j` of the result is party `order[j]` of `self`.
    pub fn permute(&self, order: &[usize]) -> Result<Self> {
        let (rho, dims) = linalg::permute_parties(&self.rho, &self.dims, order)?;
        Ok(Self {
            dims,
            rho,
            label: self.label.clone(),
            origin: None,
        })
    }

    /// Same-shape state from a matrix already known to be a valid density
    /// operator (internal fast path, skips the eigenvalue check).
    pub(crate) fn from_trusted(dims: Vec<usize>, rho: ComplexMatrix<T>) -> Self {
        debug_assert_eq!(dims.iter().product::<usize>(), rho.rows());
        Self {
            dims,
            rho,
            label: None,
            origin: None,
        }
    }

    pub fn max_abs_diff(&self, other: &Self) -> T {
        if self.dims != other.dims {
            return T::infinity();
        }
        self.rho.max_abs_diff(&other.rho)
    }
}

/// Ordered grouping of parties into disjoint blocks, e.g. `AB:C`.
///
/// Measures evaluated on a partition whose blocks do not cover every party
/// act on the marginal of the covered parties, so `A:B` of a three-party
/// state is the bipartite quantity of `ρ_AB`.
#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct Partition {
    blocks: Vec<Vec<usize>>,
}

impl Partition {
    pub fn new(blocks: Vec<Vec<usize>>) -> Result<Self> {
        if blocks.len() < 2 {
            return Err(QcorrError::Partition("need at least two blocks".into()));
        }
        let mut seen = Vec::new();
        for b in &blocks {
            if b.is_empty() {
                return Err(QcorrError::Partition("empty block".into()));
            }
            for &p in b {
                if seen.contains(&p) {
                    return Err(QcorrError::Partition(format!("party {p} appears twice")));
                }
                seen.push(p);
            }
        }
        Ok(Self { blocks })
    }

    /// Parses `"A:B:C"`, `"AB:C"`, `"BC:A"`; letters name parties 0, 1, ….
    pub fn parse(s: &str) -> Result<Self> {
        let blocks = s
            .split(':')
            .map(|blk| {
                blk.trim()
                    .chars()
                    .map(|ch| {
                        if ch.is_ascii_uppercase() {
                            Ok(ch as usize - 'A' as usize)
                        } else {
                            Err(QcorrError::Partition(format!("bad party letter {ch:?} in {s:?}")))
                        }
                    })
                    .collect::<Result<Vec<_>>>()
            })
            .collect::<Result<Vec<_>>>()?;
        Self::new(blocks)
    }

    /// Same grouping with parties sorted inside blocks and blocks sorted;
    /// equal for partitions that differ only in ordering.
    pub fn canonical(&self) -> Self {
        let mut blocks: Vec<Vec<usize>> = self
            .blocks
            .iter()
            .map(|b| {
                let mut b = b.clone();
                b.sort_unstable();
                b
            })
            .collect();
        blocks.sort();
        Self { blocks }
    }

    /// One block per party.
    pub fn finest(parties: &[usize]) -> Result<Self> {
        Self::new(parties.iter().map(|&p| vec![p]).collect())
    }

    pub fn blocks(&self) -> &[Vec<usize>] {
        &self.blocks
    }

    /// Covered parties, ascending.
    pub fn parties(&self) -> Vec<usize> {
        let mut p: Vec<usize> = self.blocks.iter().flatten().copied().collect();
        p.sort_unstable();
        p
    }

    /// Each block split into single parties.
    pub fn refined(&self) -> Self {
        Self {
            blocks: self.blocks.iter().flatten().map(|&p| vec![p]).collect(),
        }
    }

    pub fn check_for(&self, n_parties: usize) -> Result<()> {
        match self.blocks.iter().flatten().find(|&&p| p >= n_parties) {
            Some(p) => Err(QcorrError::Partition(format!(
                "party {p} out of range for a {n_parties}-party state"
            ))),
            None => Ok(()),
        }
    }

    /// Relabels party `p` as `map[p]`.
    pub fn relabeled(&self, map: &[usize]) -> Self {
        Self {
            blocks: self
                .blocks
                .iter()
                .map(|b| b.iter().map(|&p| map[p]).collect())
                .collect(),
        }
    }
}

impl fmt::Display for Partition {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let s: Vec<String> = self
            .blocks
            .iter()
            .map(|b| b.iter().map(|&p| party_letter(p)).collect())
            .collect();
        f.write_str(&s.join(":"))
    }
}

pub fn party_letter(p: usize) -> char {
    (b'A' + p as u8) as char
}

/// A state brought into block order: parties permuted so every block is
/// contiguous and blocks appear in partition order.
#[derive(Clone, Debug)]
pub struct BlockLayout<T> {
    pub rho: ComplexMatrix<T>,
    pub block_dims: Vec<usize>,
    /// Party order of `rho` (indices into the covered-party marginal).
    pub order: Vec<usize>,
    /// Local dims of the covered marginal in its own party order.
    pub marginal_dims: Vec<usize>,
}

impl<T: Real> MultipartiteState<T> {
    /// Marginal on the parties covered by `part`, with the partition
    /// re-indexed onto that marginal.
    pub fn restrict(&self, part: &Partition) -> Result<(Self, Partition)> {
        part.check_for(self.n_parties())?;
        let covered = part.parties();
        let reduced = if covered.len() == self.n_parties() {
            self.clone()
        } else {
            self.reduce(&covered)?
        };
        let mut map = vec![usize::MAX; self.n_parties()];
        for (i, &p) in covered.iter().enumerate() {
            map[p] = i;
        }
        Ok((reduced, part.relabeled(&map)))
    }

    /// Block layout for a partition covering every party of `self`.
    pub fn block_layout(&self, part: &Partition) -> Result<BlockLayout<T>> {
        if part.parties() != (0..self.n_parties()).collect::<Vec<_>>() {
            return Err(QcorrError::Partition(format!(
                "{part} does not cover all {} parties",
                self.n_parties()
            )));
        }
        let order: Vec<usize> = part.blocks().iter().flatten().copied().collect();
        let (rho, _) = linalg::permute_parties(&self.rho, &self.dims, &order)?;
        let block_dims = part
            .blocks()
            .iter()
            .map(|b| b.iter().map(|&p| self.dims[p]).product())
            .collect();
        Ok(BlockLayout {
            rho,
            block_dims,
            order,
            marginal_dims: self.dims.clone(),
        })
    }
}

impl<T: Real> BlockLayout<T> {
    /// Undo the party permutation of a matrix expressed in block order.
    pub fn to_party_order(&self, m: &ComplexMatrix<T>) -> ComplexMatrix<T> {
        let mut inverse = vec![0; self.order.len()];
        for (j, &p) in self.order.iter().enumerate() {
            inverse[p] = j;
        }
        let permuted_dims: Vec<usize> = self.order.iter().map(|&p| self.marginal_dims[p]).collect();
        linalg::permute_parties(m, &permuted_dims, &inverse)
            .expect("layout dims are consistent")
            .0
    }
}

/// Parameters of the five-term canonical form of a three-qubit pure state,
/// `λ0|000⟩ + e^{iφ}λ1|100⟩ + λ2|101⟩ + λ3|110⟩ + λ4|111⟩`.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct AcinParams<T> {
    pub lambdas: [T; 5],
    pub phi: T,
}

impl<T: Real> AcinParams<T> {
    pub fn new(lambdas: [T; 5], phi: T) -> Result<Self> {
        if lambdas.iter().any(|&l| l < T::zero() || !l.is_finite()) {
            return Err(QcorrError::Param("Acín amplitudes must be nonnegative".into()));
        }
        let norm: T = lambdas.iter().map(|&l| l * l).sum();
        if (norm - T::one()).abs() > T::of(1e-12) {
            return Err(QcorrError::Param(format!("Σλ² = {norm}, expected 1")));
        }
        Ok(Self { lambdas, phi })
    }

    pub fn state_vector(&self) -> Vec<C<T>> {
        let l = self.lambdas;
        let mut v = vec![C::new(T::zero(), T::zero()); 8];
        v[0] = crate::scalar::re(l[0]);
        v[4] = crate::scalar::phase(self.phi) * l[1];
        v[5] = crate::scalar::re(l[2]);
        v[6] = crate::scalar::re(l[3]);
        v[7] = crate::scalar::re(l[4]);
        v
    }
}

pub fn from_acin<T: Real>(p: &AcinParams<T>) -> Result<MultipartiteState<T>> {
    AcinParams::new(p.lambdas, p.phi)?;
    MultipartiteState::from_pure(vec![2, 2, 2], &p.state_vector(), Some("acin".into()))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::scalar::re;

    #[test]
    fn partition_parsing_and_display() {
        let p = Partition::parse("BC:A").unwrap();
        assert_eq!(p.blocks(), &[vec![1, 2], vec![0]]);
        assert_eq!(p.to_string(), "BC:A");
        assert_eq!(p.parties(), vec![0, 1, 2]);
        assert!(Partition::parse("AB").is_err());
        assert!(Partition::parse("A:A").is_err());
        assert!(Partition::parse("a:b").is_err());
        assert!(Partition::parse("A::B").is_err());
    }

    #[test]
    fn restrict_reindexes_blocks() {
        let s = named_state::<f64>("ghz", &Default::default()).unwrap();
        let (m, p) = s.restrict(&Partition::parse("C:A").unwrap()).unwrap();
        assert_eq!(m.dims(), &[2, 2]);
        assert_eq!(p.blocks(), &[vec![1], vec![0]]);
    }

    #[test]
    fn validation_rejects_bad_matrices() {
        let bad_trace = ComplexMatrix::<f64>::from_real_diag(&[0.5, 0.4]);
        assert!(matches!(
            MultipartiteState::new(vec![2], bad_trace, None),
            Err(QcorrError::StateValidation(_))
        ));
        let negative = ComplexMatrix::<f64>::from_real_diag(&[1.2, -0.2]);
        assert!(MultipartiteState::new(vec![2], negative, None).is_err());
        let mut nonherm = ComplexMatrix::<f64>::from_real_diag(&[0.5, 0.5]);
        nonherm[(0, 1)] = re(0.1);
        assert!(MultipartiteState::new(vec![2], nonherm, None).is_err());
        let eye = ComplexMatrix::<f64>::identity(8).scale_real(0.125);
        assert!(matches!(
            MultipartiteState::new(vec![2, 2], eye, None),
            Err(QcorrError::Dimension(_))
        ));
    }

    #[test]
    fn acin_special_cases() {
        let z = from_acin(&AcinParams::new([1.0f64, 0.0, 0.0, 0.0, 0.0], 0.0).unwrap()).unwrap();
        assert!((z.rho()[(0, 0)].re - 1.0).abs() < 1e-15);
        let s = 0.5f64.sqrt();
        let ghz = from_acin(&AcinParams::new([s, 0.0, 0.0, 0.0, s], 0.3).unwrap()).unwrap();
        let reference = named_state::<f64>("ghz", &Default::default()).unwrap();
        assert!(ghz.max_abs_diff(&reference) < 1e-15);
        assert!(AcinParams::new([0.5, 0.5, 0.5, 0.5, 0.5], 0.0).is_err());
        assert!(AcinParams::new([-1.0, 0.0, 0.0, 0.0, 0.0], 0.0).is_err());
    }

    #[test]
    fn block_layout_round_trip() {
        let s = sample_random_mixed::<f64>(5, 3);
        let part = Partition::parse("AC:B").unwrap();
        let lay = s.block_layout(&part).unwrap();
        assert_eq!(lay.block_dims, vec![4, 2]);
        assert!(lay.to_party_order(&lay.rho).max_abs_diff(s.rho()) < 1e-15);
    }
}
