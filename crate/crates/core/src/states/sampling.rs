use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;
use serde::{Deserialize, Serialize};

use super::{AcinParams, MultipartiteState};
use crate::linalg::{self, ComplexMatrix};
use crate::scalar::{Real, C};

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum SamplingMethod {
    /// `(λ0², …, λ4²)` uniform on the 4-simplex, `φ` uniform on `[0, 2π)`.
    #[default]
    AcinUniform,
    /// Normalized complex Gaussian 8-vector.
    Haar,
}

impl std::str::FromStr for SamplingMethod {
    type Err = crate::QcorrError;
    fn from_str(s: &str) -> crate::Result<Self> {
        match s {
            "acin_uniform" | "acin" => Ok(Self::AcinUniform),
            "haar" => Ok(Self::Haar),
            _ => Err(crate::QcorrError::Param(format!("unknown sampling method {s:?}"))),
        }
    }
}

impl std::fmt::Display for SamplingMethod {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(match self {
            Self::AcinUniform => "acin_uniform",
            Self::Haar => "haar",
        })
    }
}

/// Independent, reproducible generator for sub-task `stream` of `seed`.
pub fn rng_for(seed: u64, stream: u64) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(stream);
    rng
}

fn gaussian_c<T: Real, R: Rng + ?Sized>(rng: &mut R) -> C<T> {
    let a: f64 = rng.sample(StandardNormal);
    let b: f64 = rng.sample(StandardNormal);
    C::new(T::of(a), T::of(b))
}

pub fn sample_random_pure_from<T: Real, R: Rng + ?Sized>(
    rng: &mut R,
    method: SamplingMethod,
) -> MultipartiteState<T> {
    let v: Vec<C<T>> = match method {
        SamplingMethod::AcinUniform => {
            // Dirichlet(1,…,1) via normalized exponentials
            let e: Vec<f64> = (0..5)
                .map(|_| -(1.0 - rng.random::<f64>()).ln())
                .collect();
            let total: f64 = e.iter().sum();
            let mut lambdas = [T::zero(); 5];
            for (l, x) in lambdas.iter_mut().zip(&e) {
                *l = T::of((x / total).sqrt());
            }
            let phi = T::of(rng.random::<f64>() * std::f64::consts::TAU);
            let v = AcinParams { lambdas, phi }.state_vector();
            linalg::normalized(&v).expect("nonzero amplitudes")
        }
        SamplingMethod::Haar => {
            let g: Vec<C<T>> = (0..8).map(|_| gaussian_c(rng)).collect();
            linalg::normalized(&g).expect("nonzero gaussian vector")
        }
    };
    MultipartiteState::from_trusted(vec![2, 2, 2], ComplexMatrix::outer(&v))
        .with_label(format!("random_pure({method})"))
}

/// Deterministic in `(seed, method)`.
pub fn sample_random_pure<T: Real>(seed: u64, method: SamplingMethod) -> MultipartiteState<T> {
    sample_random_pure_from(&mut rng_for(seed, 0), method)
}

/// Marginal of a Haar-random pure state on three qubits ⊗ a `rank`-level
/// ancilla. `rank` is clamped to `1..=8`.
pub fn sample_random_mixed<T: Real>(seed: u64, rank: usize) -> MultipartiteState<T> {
    let rank = rank.clamp(1, 8);
    let mut rng = rng_for(seed, 1);
    let g = ComplexMatrix::from_fn(8, rank, |_, _| gaussian_c::<T, _>(&mut rng));
    let w = &g * &g.adjoint();
    let tr = w.trace().re;
    let rho = w.scale_real(T::one() / tr).hermitian_part();
    MultipartiteState::from_trusted(vec![2, 2, 2], rho).with_label(format!("random_mixed(rank={rank})"))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::linalg::{hermitian_eig, partial_trace, purity};

    #[test]
    fn same_seed_same_state() {
        for m in [SamplingMethod::AcinUniform, SamplingMethod::Haar] {
            let a = sample_random_pure::<f64>(9, m);
            let b = sample_random_pure::<f64>(9, m);
            assert_eq!(a.rho(), b.rho());
            assert!((a.purity() - 1.0).abs() < 1e-12);
        }
        assert_eq!(sample_random_mixed::<f64>(4, 8).rho(), sample_random_mixed::<f64>(4, 8).rho());
    }

    #[test]
    fn haar_marginal_purity_moment() {
        // E[Tr ρ_A²] for a Haar state on C^2 ⊗ C^4 is (2+4)/(2·4+1)
        let n = 10_000;
        let mut rng = rng_for(77, 3);
        let mean: f64 = (0..n)
            .map(|_| {
                let s = sample_random_pure_from::<f64, _>(&mut rng, SamplingMethod::Haar);
                purity(&partial_trace(s.rho(), s.dims(), &[0]).unwrap())
            })
            .sum::<f64>()
            / n as f64;
        assert!((mean - 6.0 / 9.0).abs() < 0.01, "mean purity {mean}");
    }

    #[test]
    fn acin_weights_are_simplex_uniform() {
        let n = 10_000;
        let mut rng = rng_for(78, 0);
        let mean: f64 = (0..n)
            .map(|_| {
                let s = sample_random_pure_from::<f64, _>(&mut rng, SamplingMethod::AcinUniform);
                s.rho()[(0, 0)].re
            })
            .sum::<f64>()
            / n as f64;
        assert!((mean - 0.2).abs() < 0.01, "mean λ0² {mean}");
    }

    #[test]
    fn mixed_sampler_rank_and_validity() {
        let pure = sample_random_mixed::<f64>(3, 1);
        assert!((pure.purity() - 1.0).abs() < 1e-12);
        let full = sample_random_mixed::<f64>(3, 8);
        let eig = hermitian_eig(full.rho()).unwrap().eigenvalues;
        let mean = eig.iter().sum::<f64>() / 8.0;
        assert!((mean - 0.125).abs() < 1e-15);
        assert!(eig[0] > 0.0);
        MultipartiteState::new(vec![2, 2, 2], full.rho().clone(), None).unwrap();
    }
}
