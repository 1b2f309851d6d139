//! Relative entropy of discord as a minimization of the diagonal entropy
//! over product bases of the partition blocks.

use rand::Rng;

use crate::basis::ProductBasisPoint;
use crate::error::{QcorrError, Result};
use crate::linalg::{hermitian_eig, ComplexMatrix};
use crate::measures::{shannon_entropy, subsystem_entropy, von_neumann_entropy};
use crate::optim::{multi_start, NelderMead, OptimizerConfig};
use crate::scalar::{re, Real};
use crate::states::{rng_for, BlockLayout, MultipartiteState, Partition, STATE_TOL};

/// Values closer than this count as the same optimum when picking the
/// reported basis.
const TIE_TOL: f64 = 1e-10;

#[derive(Clone, Debug)]
pub struct DiscordMinimum<T> {
    pub value: T,
    pub basis: ProductBasisPoint<T>,
    /// Dephased state at this basis, on the covered parties.
    pub chi: MultipartiteState<T>,
    /// Number of starts that landed in this cluster.
    pub hits: usize,
    /// Earliest start index in the cluster.
    pub first_start: usize,
}

#[derive(Clone, Debug)]
pub struct DiscordResult<T> {
    pub value: T,
    pub best_basis: ProductBasisPoint<T>,
    /// Closest classical state: the marginal on the covered parties
    /// dephased in `best_basis`.
    pub chi: MultipartiteState<T>,
    /// Distinct local minima sorted by value.
    pub local_minima: Vec<DiscordMinimum<T>>,
    pub starts_used: usize,
    pub converged: bool,
    /// Partition re-indexed onto the covered marginal.
    pub partition: Partition,
}

impl<T: Real> DiscordResult<T> {
    /// Starts whose local optimum agrees with the reported value.
    pub fn consensus(&self) -> usize {
        self.local_minima.first().map_or(0, |m| m.hits)
    }
}

/// `Λ` as a function of the flattened basis parameters.
struct DiagonalEntropy<T> {
    layout: BlockLayout<T>,
}

impl<T: Real> DiagonalEntropy<T> {
    fn probabilities(&self, u: &ComplexMatrix<T>) -> Vec<T> {
        self.layout.rho.diagonal_in_basis(u)
    }

    fn eval(&self, x: &[T]) -> T {
        let u = ProductBasisPoint::from_flat(&self.layout.block_dims, x).basis().unitary();
        shannon_entropy(&self.probabilities(&u))
    }

    fn dephased(&self, point: &ProductBasisPoint<T>) -> MultipartiteState<T> {
        let u = point.basis().unitary();
        let p = self.probabilities(&u);
        let n = u.rows();
        let mut chi = ComplexMatrix::zeros(n, n);
        for (k, &pk) in p.iter().enumerate() {
            let pk = pk.max(T::zero());
            for i in 0..n {
                for j in 0..n {
                    chi[(i, j)] = chi[(i, j)] + u[(i, k)] * u[(j, k)].conj() * re(pk);
                }
            }
        }
        MultipartiteState::from_trusted(self.layout.marginal_dims.clone(), self.layout.to_party_order(&chi))
    }
}

fn fourier<T: Real>(d: usize) -> ComplexMatrix<T> {
    let norm = T::one() / T::of(d as f64).sqrt();
    ComplexMatrix::from_fn(d, d, |j, k| {
        let a = T::TAU() * T::of((j * k % d) as f64 / d as f64);
        crate::scalar::C::new(a.cos() * norm, a.sin() * norm)
    })
}

fn wrap_angles<T: Real>(x: &[T]) -> Vec<T> {
    let two_pi = T::TAU();
    x.iter()
        .map(|&a| {
            let w = a % two_pi;
            if w < T::zero() {
                w + two_pi
            } else {
                w
            }
        })
        .collect()
}

/// Deterministic starts first (computational basis, block-marginal
/// eigenbases, one block switched to its Fourier basis), then `cfg.starts`
/// random points.
fn start_points<T: Real>(m: &MultipartiteState<T>, part: &Partition, cfg: &OptimizerConfig) -> Result<Vec<Vec<T>>> {
    let dims: Vec<usize> = part
        .blocks()
        .iter()
        .map(|b| b.iter().map(|&p| m.dims()[p]).product())
        .collect();
    let mut starts = vec![ProductBasisPoint::<T>::computational(&dims).flat()];
    let mut eigvecs = Vec::with_capacity(part.blocks().len());
    for b in part.blocks() {
        let block = m.reduce(b)?;
        eigvecs.push(hermitian_eig(block.rho())?.eigenvectors);
    }
    starts.push(ProductBasisPoint::from_unitaries(&eigvecs)?.flat());
    for k in 0..dims.len() {
        let us: Vec<ComplexMatrix<T>> = dims
            .iter()
            .enumerate()
            .map(|(j, &d)| if j == k { fourier(d) } else { ComplexMatrix::identity(d) })
            .collect();
        starts.push(ProductBasisPoint::from_unitaries(&us)?.flat());
    }

    let n = ProductBasisPoint::<T>::param_count(&dims);
    let mut rng = rng_for(cfg.seed, 0x0d15_c0d);
    for _ in 0..cfg.starts {
        let x: Vec<T> = (0..n).map(|_| T::of(rng.random_range(0.0..std::f64::consts::TAU))).collect();
        starts.push(x);
    }
    Ok(starts)
}

/// Multi-start minimization of `Λ - S(ρ)` over product bases of `part`'s
/// blocks. Blocks covering only some parties act on the corresponding
/// marginal.
pub fn discord<T: Real>(s: &MultipartiteState<T>, part: &Partition, cfg: &OptimizerConfig) -> Result<DiscordResult<T>> {
    let (m, p) = s.restrict(part)?;
    let objective = DiagonalEntropy {
        layout: m.block_layout(&p)?,
    };
    let entropy = von_neumann_entropy(&m)?;
    let starts = start_points(&m, &p, cfg)?;
    let nm = NelderMead::from_config(cfg);
    let runs = multi_start(&nm, &starts, |x| objective.eval(x));

    let mut order: Vec<usize> = (0..runs.len()).collect();
    order.sort_by(|&a, &b| {
        runs[a]
            .value
            .partial_cmp(&runs[b].value)
            .unwrap_or(std::cmp::Ordering::Equal)
            .then(a.cmp(&b))
    });
    let best_value = runs[order[0]].value;
    let best_idx = (0..runs.len())
        .find(|&k| runs[k].value <= best_value + T::of(TIE_TOL))
        .expect("at least one start");

    let vtol = T::of(cfg.cluster_value_tol);
    let stol = T::of(cfg.cluster_state_tol);
    let mut minima: Vec<DiscordMinimum<T>> = Vec::new();
    for &k in &order {
        let basis = ProductBasisPoint::from_flat(&objective.layout.block_dims, &wrap_angles(&runs[k].x));
        let value = runs[k].value - entropy;
        let chi = objective.dephased(&basis);
        if let Some(c) = minima
            .iter_mut()
            .find(|c| (c.value - value).abs() <= vtol && c.chi.max_abs_diff(&chi) <= stol)
        {
            c.hits += 1;
            continue;
        }
        minima.push(DiscordMinimum {
            value,
            basis,
            chi,
            hits: 1,
            first_start: k,
        });
    }

    let best_basis = ProductBasisPoint::from_flat(&objective.layout.block_dims, &wrap_angles(&runs[best_idx].x));
    let chi = objective.dephased(&best_basis);
    Ok(DiscordResult {
        value: runs[best_idx].value - entropy,
        best_basis,
        chi,
        local_minima: minima,
        starts_used: runs.len(),
        converged: runs.iter().any(|r| r.converged),
        partition: p,
    })
}

/// Analytic discord of a pure bipartite state: the entropy of either block.
pub fn discord_pure_bipartite<T: Real>(s: &MultipartiteState<T>, part: &Partition) -> Result<T> {
    if part.blocks().len() != 2 {
        return Err(QcorrError::Partition(format!("{part} is not a bipartition")));
    }
    let (m, p) = s.restrict(part)?;
    let purity = m.purity();
    if purity < T::one() - T::of(STATE_TOL) {
        return Err(QcorrError::Purity(purity.to_f64_lossy()));
    }
    subsystem_entropy(&m, &p.blocks()[1])
}

/// Clustered local minima of the discord search, sorted by value.
pub fn enumerate_local_minima<T: Real>(
    s: &MultipartiteState<T>,
    part: &Partition,
    cfg: &OptimizerConfig,
) -> Result<Vec<DiscordMinimum<T>>> {
    Ok(discord(s, part, cfg)?.local_minima)
}

pub fn closest_classical_state<T: Real>(result: &DiscordResult<T>) -> MultipartiteState<T> {
    result.chi.clone()
}

#[cfg(test)]
mod tests {
    use std::collections::BTreeMap;

    use super::*;
    use crate::measures::relative_entropy;
    use crate::scalar::binary_entropy;
    use crate::states::{named_state, sample_random_pure, SamplingMethod};

    fn fam(name: &str, p: Option<f64>) -> MultipartiteState<f64> {
        let mut m = BTreeMap::new();
        if let Some(p) = p {
            m.insert("p".to_string(), p);
        }
        named_state(name, &m).unwrap()
    }

    fn part(s: &str) -> Partition {
        Partition::parse(s).unwrap()
    }

    fn quick() -> OptimizerConfig {
        OptimizerConfig {
            starts: 6,
            ..Default::default()
        }
    }

    #[test]
    fn ghz_values() {
        let g = fam("ghz", None);
        let d = discord(&g, &part("A:B:C"), &quick()).unwrap();
        assert!((d.value - 1.0).abs() < 1e-8, "{}", d.value);
        let pair = discord(&g, &part("A:B"), &quick()).unwrap();
        assert!(pair.value.abs() < 1e-8);
        let mut diag = vec![0.0; 8];
        diag[0] = 0.5;
        diag[7] = 0.5;
        let expect = ComplexMatrix::from_real_diag(&diag);
        assert!(closest_classical_state(&d).rho().max_abs_diff(&expect) < 1e-6);
    }

    #[test]
    fn value_matches_relative_entropy_to_chi() {
        let s = fam("ghz_plus", Some(0.3));
        let d = discord(&s, &part("A:B:C"), &quick()).unwrap();
        let direct = relative_entropy(&s, &d.chi).unwrap();
        assert!((direct.value - d.value).abs() < 1e-8);
        let q = 0.3;
        assert!((d.value - (binary_entropy(0.3) + q)).abs() < 1e-6, "{}", d.value);
    }

    #[test]
    fn classical_input_is_its_own_chi() {
        let s = fam("counterexample", Some(0.3));
        let d = discord(&s, &part("A:C"), &quick()).unwrap();
        assert!(d.value.abs() < 1e-8);
        let m = s.reduce(&[0, 2]).unwrap();
        assert!(d.chi.max_abs_diff(&m) < 1e-6);
    }

    #[test]
    fn pure_fast_path() {
        let g = fam("ghz", None);
        assert!((discord_pure_bipartite(&g, &part("AB:C")).unwrap() - 1.0).abs() < 1e-12);
        let c = fam("counterexample", Some(0.3));
        assert!(matches!(discord_pure_bipartite(&c, &part("AB:C")), Err(QcorrError::Purity(_))));
        assert!(matches!(discord_pure_bipartite(&g, &part("A:B:C")), Err(QcorrError::Partition(_))));
        let s = sample_random_pure::<f64>(5, SamplingMethod::Haar);
        let d = discord(&s, &part("AB:C"), &OptimizerConfig { starts: 2, ..Default::default() }).unwrap();
        let a = discord_pure_bipartite(&s, &part("AB:C")).unwrap();
        assert!((d.value - a).abs() < 1e-4, "{} vs {}", d.value, a);
    }

    #[test]
    fn maximally_mixed_is_a_single_cluster() {
        let s = MultipartiteState::<f64>::new(vec![2, 2, 2], ComplexMatrix::identity(8).scale_real(0.125), None).unwrap();
        let ms = enumerate_local_minima(&s, &part("A:B:C"), &quick()).unwrap();
        assert!(ms.len() == 1 && ms[0].value.abs() < 1e-9);
    }

    #[test]
    fn deterministic_for_fixed_seed() {
        let s = fam("w", None);
        let a = discord(&s, &part("A:B:C"), &quick()).unwrap();
        let b = discord(&s, &part("A:B:C"), &quick()).unwrap();
        assert_eq!(a.value, b.value);
        assert_eq!(a.best_basis, b.best_basis);
    }
}
