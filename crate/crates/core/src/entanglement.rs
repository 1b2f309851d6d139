//! Relative entropy of entanglement: a numerical upper bound from a
//! separable ensemble, and exact values for cataloged families.

use std::f64::consts::LN_2;

use rand::Rng;
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;

use crate::discord::{discord, DiscordResult};
use crate::error::{QcorrError, Result};
use crate::linalg::{hermitian_eig, kron_vec, normalized, ComplexMatrix};
use crate::measures::{relative_entropy_matrices, subsystem_entropy};
use crate::optim::OptimizerConfig;
use crate::scalar::{binary_entropy, re, Real, C};
use crate::states::{rng_for, BlockLayout, Family, FamilySpec, MultipartiteState, Partition, STATE_TOL};

/// Weight below which a term is dropped from the ensemble.
const PRUNE_WEIGHT: f64 = 1e-14;
/// `⟨v|ρ|v⟩` on a null direction of σ above which `S(ρ‖σ) = +∞`.
const SUPPORT_MASS: f64 = 1e-12;
const WEIGHT_SWEEPS: usize = 15;
const ORACLE_SWEEPS: usize = 40;
const ORACLE_RANDOM_STARTS: usize = 3;
const LINE_SEARCH_STEPS: usize = 36;
const LINE_SEARCH_GRID: usize = 30;
/// New atoms this close to an existing one are merged into it.
const DUPLICATE_INFIDELITY: f64 = 1e-10;
/// Stop when the best value improved by less than `STALL_TOL` nats over
/// the last `STALL_WINDOW` iterations.
const STALL_WINDOW: usize = 30;
const STALL_TOL: f64 = 1e-7;
const REFINED_ATOMS: usize = 64;

/// `σ = Σ_k w_k ⊗_b |v_{k,b}⟩⟨v_{k,b}|`, blocks in partition order.
#[derive(Clone, Debug)]
pub struct SeparableEnsemble<T> {
    pub block_dims: Vec<usize>,
    pub weights: Vec<T>,
    /// `terms[k][b]`: normalized vector of block `b` in term `k`.
    pub terms: Vec<Vec<Vec<C<T>>>>,
}

impl<T: Real> SeparableEnsemble<T> {
    fn product(blocks: &[Vec<C<T>>]) -> Vec<C<T>> {
        let mut it = blocks.iter();
        let first = it.next().cloned().unwrap_or_else(|| vec![re(T::one())]);
        it.fold(first, |acc, v| kron_vec(&acc, v))
    }

    /// Density matrix in block order.
    pub fn matrix(&self) -> ComplexMatrix<T> {
        let n: usize = self.block_dims.iter().product();
        let fulls: Vec<Vec<C<T>>> = self.terms.iter().map(|t| Self::product(t)).collect();
        ComplexMatrix::mixture(self.weights.iter().copied().zip(fulls.iter().map(|v| v.as_slice())), n)
    }

    pub fn len(&self) -> usize {
        self.weights.len()
    }

    pub fn is_empty(&self) -> bool {
        self.weights.is_empty()
    }
}

#[derive(Clone, Debug)]
pub struct ReeResult<T> {
    /// Upper bound on the relative entropy of entanglement, bits.
    pub value: T,
    pub ensemble: SeparableEnsemble<T>,
    /// The separable state, on the covered parties in their own order.
    pub sigma: MultipartiteState<T>,
    /// Which seed the search started from: `"marginals"` or `"discord"`.
    pub seeded_from: String,
    pub converged: bool,
    /// Final linearized optimality gap, nats.
    pub gap: T,
    pub iterations: usize,
}

#[derive(Clone)]
struct Atom<T> {
    blocks: Vec<Vec<C<T>>>,
    full: Vec<C<T>>,
}

impl<T: Real> Atom<T> {
    fn new(blocks: Vec<Vec<C<T>>>) -> Self {
        let full = SeparableEnsemble::product(&blocks);
        Self { blocks, full }
    }
}

struct Problem<T> {
    rho: ComplexMatrix<T>,
    dims: Vec<usize>,
    /// `Tr ρ ln ρ`
    rho_log_rho: T,
    clip: T,
    /// Block indices of each row-major basis index.
    digits: Vec<Vec<usize>>,
}

impl<T: Real> Problem<T> {
    fn sigma(&self, atoms: &[Atom<T>], w: &[T]) -> ComplexMatrix<T> {
        let n = self.rho.rows();
        ComplexMatrix::mixture(w.iter().copied().zip(atoms.iter().map(|a| a.full.as_slice())), n)
    }

    /// `S(ρ‖σ)` in nats, `None` when infinite.
    fn value(&self, sigma: &ComplexMatrix<T>) -> Option<T> {
        let eig = hermitian_eig(sigma).ok()?;
        let mut cross = T::zero();
        for j in 0..eig.dim() {
            let r = self.rho.expectation(&eig.vector(j));
            let s = eig.eigenvalues[j];
            if s <= self.clip {
                if r > T::of(SUPPORT_MASS) {
                    return None;
                }
                continue;
            }
            cross = cross + r * s.ln();
        }
        Some((self.rho_log_rho - cross).max(T::zero()))
    }

    /// `Γ = -∇_σ S(ρ‖σ)`, the Fréchet derivative of `ln` at σ applied to ρ.
    fn gradient(&self, sigma: &ComplexMatrix<T>) -> Result<ComplexMatrix<T>> {
        let eig = hermitian_eig(sigma)?;
        let v = &eig.eigenvectors;
        let s = &eig.eigenvalues;
        let n = s.len();
        let mut r = (&(&v.adjoint() * &self.rho) * v).clone();
        for i in 0..n {
            for j in 0..n {
                let l = if s[i] <= self.clip || s[j] <= self.clip {
                    T::zero()
                } else if (s[i] - s[j]).abs() <= T::of(1e-9) * s[i].max(s[j]) {
                    T::of(2.0) / (s[i] + s[j])
                } else {
                    (s[i].ln() - s[j].ln()) / (s[i] - s[j])
                };
                r[(i, j)] = r[(i, j)] * re(l);
            }
        }
        Ok(&(v * &r) * &v.adjoint())
    }

    /// Operator on block `b` obtained by contracting `g` with the other
    /// blocks' vectors.
    fn block_operator(&self, g: &ComplexMatrix<T>, blocks: &[Vec<C<T>>], b: usize) -> ComplexMatrix<T> {
        let nb = self.dims.len();
        let n = g.rows();
        let idx = &self.digits;
        let coeff: Vec<C<T>> = idx
            .iter()
            .map(|d| {
                (0..nb)
                    .filter(|&k| k != b)
                    .fold(re(T::one()), |acc, k| acc * blocks[k][d[k]])
            })
            .collect();
        let db = self.dims[b];
        let mut m = ComplexMatrix::zeros(db, db);
        for r in 0..n {
            let cr = coeff[r].conj();
            for c in 0..n {
                m[(idx[r][b], idx[c][b])] = m[(idx[r][b], idx[c][b])] + cr * g[(r, c)] * coeff[c];
            }
        }
        m.hermitian_part()
    }

    /// Alternating block-wise maximization of `⟨ψ|g|ψ⟩` over product vectors.
    fn ascend(&self, g: &ComplexMatrix<T>, mut blocks: Vec<Vec<C<T>>>) -> Result<(Atom<T>, T)> {
        let mut last = T::neg_infinity();
        for _ in 0..ORACLE_SWEEPS {
            for b in 0..blocks.len() {
                let eig = hermitian_eig(&self.block_operator(g, &blocks, b))?;
                blocks[b] = eig.vector(eig.dim() - 1);
            }
            let atom = Atom::new(blocks.clone());
            let val = g.expectation(&atom.full);
            if val - last <= T::of(1e-12) {
                return Ok((atom, val));
            }
            last = val;
        }
        let atom = Atom::new(blocks);
        let val = g.expectation(&atom.full);
        Ok((atom, val))
    }

    fn random_blocks(&self, rng: &mut ChaCha8Rng) -> Vec<Vec<C<T>>> {
        self.dims
            .iter()
            .map(|&d| {
                let v: Vec<C<T>> = (0..d)
                    .map(|_| {
                        let a: f64 = rng.sample(StandardNormal);
                        let b: f64 = rng.sample(StandardNormal);
                        C::new(T::of(a), T::of(b))
                    })
                    .collect();
                normalized(&v).unwrap_or_else(|| basis_vec(d, 0))
            })
            .collect()
    }

    fn oracle(&self, g: &ComplexMatrix<T>, atoms: &[Atom<T>], w: &[T], rng: &mut ChaCha8Rng) -> Result<(Atom<T>, T)> {
        let mut starts: Vec<Vec<Vec<C<T>>>> = Vec::new();
        // top eigenvector of g, split into block marginal eigenvectors
        let eig = hermitian_eig(g)?;
        let top = eig.vector(eig.dim() - 1);
        let top_state = ComplexMatrix::outer(&top);
        let mut split = Vec::with_capacity(self.dims.len());
        for b in 0..self.dims.len() {
            let m = crate::linalg::partial_trace(&top_state, &self.dims, &[b])?;
            let e = hermitian_eig(&m)?;
            split.push(e.vector(e.dim() - 1));
        }
        starts.push(split);
        let mut by_weight: Vec<usize> = (0..atoms.len()).collect();
        by_weight.sort_by(|&a, &b| w[b].partial_cmp(&w[a]).unwrap_or(std::cmp::Ordering::Equal));
        starts.extend(by_weight.iter().take(6).map(|&k| atoms[k].blocks.clone()));
        for _ in 0..ORACLE_RANDOM_STARTS {
            starts.push(self.random_blocks(rng));
        }
        let mut best: Option<(Atom<T>, T)> = None;
        for s in starts {
            let (a, v) = self.ascend(g, s)?;
            if best.as_ref().is_none_or(|(_, bv)| v > *bv) {
                best = Some((a, v));
            }
        }
        Ok(best.expect("at least one oracle start"))
    }

    /// Multiplicative fixed-point updates of the weights with the atoms held
    /// fixed; only accepted when the objective does not increase.
    fn reweight(&self, atoms: &[Atom<T>], w: &mut [T], f: &mut T) -> Result<()> {
        for _ in 0..WEIGHT_SWEEPS {
            let sigma = self.sigma(atoms, w);
            let g = self.gradient(&sigma)?;
            let mut proposal: Vec<T> = atoms
                .iter()
                .zip(w.iter())
                .map(|(a, &wk)| wk * g.expectation(&a.full).max(T::zero()))
                .collect();
            let total: T = proposal.iter().copied().sum();
            if total <= T::zero() {
                return Ok(());
            }
            proposal.iter_mut().for_each(|x| *x = *x / total);
            let mut step = T::one();
            let mut accepted = false;
            for _ in 0..6 {
                let trial: Vec<T> = w.iter().zip(&proposal).map(|(&a, &b)| a + step * (b - a)).collect();
                if let Some(v) = self.value(&self.sigma(atoms, &trial)) {
                    if v <= *f {
                        let gain = *f - v;
                        w.copy_from_slice(&trial);
                        *f = v;
                        accepted = true;
                        if gain <= T::of(1e-13) {
                            return Ok(());
                        }
                        break;
                    }
                }
                step = step * T::of(0.5);
            }
            if !accepted {
                return Ok(());
            }
        }
        Ok(())
    }

    /// Exact line search on `(1-γ)σ + γ|ψ⟩⟨ψ|`, convex in γ: bracket on a
    /// geometric grid, then golden-section refinement.
    fn line_search(&self, sigma: &ComplexMatrix<T>, atom: &Atom<T>, f0: T) -> (T, T) {
        let target = ComplexMatrix::outer(&atom.full);
        let at = |g: T| {
            let m = &sigma.scale_real(T::one() - g) + &target.scale_real(g);
            self.value(&m).unwrap_or(T::infinity())
        };
        let half = T::of(0.5);
        let mut grid = vec![(T::zero(), f0)];
        let mut g = T::one();
        for _ in 0..LINE_SEARCH_GRID {
            grid.push((g, at(g)));
            g = g * half;
        }
        grid.sort_by(|a, b| a.0.partial_cmp(&b.0).unwrap_or(std::cmp::Ordering::Equal));
        let k = (0..grid.len())
            .min_by(|&a, &b| grid[a].1.partial_cmp(&grid[b].1).unwrap_or(std::cmp::Ordering::Equal))
            .expect("nonempty grid");
        if k == 0 {
            return (T::zero(), f0);
        }
        let (mut a, mut b) = (grid[k - 1].0, grid[(k + 1).min(grid.len() - 1)].0);
        let phi = T::of((5f64.sqrt() - 1.0) / 2.0);
        let mut x1 = b - phi * (b - a);
        let mut x2 = a + phi * (b - a);
        let (mut f1, mut f2) = (at(x1), at(x2));
        for _ in 0..LINE_SEARCH_STEPS {
            if f1 <= f2 {
                b = x2;
                x2 = x1;
                f2 = f1;
                x1 = b - phi * (b - a);
                f1 = at(x1);
            } else {
                a = x1;
                x1 = x2;
                f1 = f2;
                x2 = a + phi * (b - a);
                f2 = at(x2);
            }
        }
        let mut best = grid[k];
        for c in [(x1, f1), (x2, f2)] {
            if c.1 < best.1 {
                best = c;
            }
        }
        if best.1 < f0 {
            best
        } else {
            (T::zero(), f0)
        }
    }

    /// One block-ascent sweep on each atom against the current gradient,
    /// kept only when the objective decreases.
    fn refine_atoms(&self, atoms: &mut [Atom<T>], w: &[T], f: &mut T) -> Result<()> {
        let mut by_weight: Vec<usize> = (0..atoms.len()).collect();
        by_weight.sort_by(|&a, &b| w[b].partial_cmp(&w[a]).unwrap_or(std::cmp::Ordering::Equal));
        for &k in by_weight.iter().take(REFINED_ATOMS) {
            let g = self.gradient(&self.sigma(atoms, w))?;
            let mut blocks = atoms[k].blocks.clone();
            for b in 0..blocks.len() {
                let eig = hermitian_eig(&self.block_operator(&g, &blocks, b))?;
                blocks[b] = eig.vector(eig.dim() - 1);
            }
            let old = std::mem::replace(&mut atoms[k], Atom::new(blocks));
            match self.value(&self.sigma(atoms, w)) {
                Some(v) if v < *f => *f = v,
                _ => atoms[k] = old,
            }
        }
        Ok(())
    }
}

fn block_digits(mut x: usize, dims: &[usize]) -> Vec<usize> {
    let mut d = vec![0; dims.len()];
    for k in (0..dims.len()).rev() {
        d[k] = x % dims[k];
        x /= dims[k];
    }
    d
}

fn basis_vec<T: Real>(d: usize, k: usize) -> Vec<C<T>> {
    let mut v = vec![re(T::zero()); d];
    v[k] = re(T::one());
    v
}

/// Atoms of `⊗_b ρ_b` built from the marginal eigenvectors.
fn marginal_seed<T: Real>(m: &MultipartiteState<T>, part: &Partition) -> Result<(Vec<Atom<T>>, Vec<T>)> {
    let mut systems = Vec::new();
    for b in part.blocks() {
        systems.push(hermitian_eig(m.reduce(b)?.rho())?);
    }
    let mut atoms = vec![(Vec::new(), T::one())];
    for sys in &systems {
        let mut next = Vec::new();
        for (blocks, w) in &atoms {
            for k in 0..sys.dim() {
                let l = sys.eigenvalues[k];
                if l <= T::of(PRUNE_WEIGHT) {
                    continue;
                }
                let mut nb: Vec<Vec<C<T>>> = blocks.clone();
                nb.push(sys.vector(k));
                next.push((nb, *w * l));
            }
        }
        atoms = next;
    }
    let total: T = atoms.iter().map(|(_, w)| *w).sum();
    Ok(atoms
        .into_iter()
        .map(|(b, w)| (Atom::new(b), w / total))
        .unzip())
}

/// Atoms of the closest classical state: the product basis vectors.
fn discord_seed<T: Real>(layout: &BlockLayout<T>, d: &DiscordResult<T>) -> (Vec<Atom<T>>, Vec<T>) {
    let basis = d.best_basis.basis();
    let probs = layout.rho.diagonal_in_basis(&basis.unitary());
    let dims = &layout.block_dims;
    let mut atoms = Vec::new();
    let mut weights = Vec::new();
    for (k, &p) in probs.iter().enumerate() {
        if p <= T::of(PRUNE_WEIGHT) {
            continue;
        }
        let idx = block_digits(k, dims);
        let blocks = idx.iter().enumerate().map(|(b, &i)| basis.blocks[b].column(i)).collect();
        atoms.push(Atom::new(blocks));
        weights.push(p);
    }
    let total: T = weights.iter().copied().sum();
    weights.iter_mut().for_each(|w| *w = *w / total);
    (atoms, weights)
}

/// Upper bound on the relative entropy of entanglement with respect to
/// `part`; runs the discord search to obtain the classical seed.
pub fn ree_upper_bound<T: Real>(s: &MultipartiteState<T>, part: &Partition, cfg: &OptimizerConfig) -> Result<ReeResult<T>> {
    let d = discord(s, part, cfg)?;
    ree_upper_bound_seeded(s, part, cfg, Some(&d))
}

/// As [`ree_upper_bound`], reusing a discord result for the same state and
/// partition when one is available.
pub fn ree_upper_bound_seeded<T: Real>(
    s: &MultipartiteState<T>,
    part: &Partition,
    cfg: &OptimizerConfig,
    seed_discord: Option<&DiscordResult<T>>,
) -> Result<ReeResult<T>> {
    let (m, p) = s.restrict(part)?;
    let layout = m.block_layout(&p)?;
    let rho_eig = hermitian_eig(&layout.rho)?;
    let clip = T::of(cfg.clip_eps);
    let rho_log_rho = rho_eig
        .eigenvalues
        .iter()
        .filter(|&&l| l > clip)
        .map(|&l| l * l.ln())
        .sum();
    let problem = Problem {
        rho: layout.rho.clone(),
        dims: layout.block_dims.clone(),
        rho_log_rho,
        clip,
        digits: (0..layout.rho.rows()).map(|x| block_digits(x, &layout.block_dims)).collect(),
    };
    let max_terms = cfg.ree_terms.unwrap_or_else(|| layout.rho.rows().pow(2)).max(1);

    let (mut atoms, mut w) = marginal_seed(&m, &p)?;
    let mut f = problem
        .value(&problem.sigma(&atoms, &w))
        .ok_or_else(|| QcorrError::Domain("product of marginals does not cover the state's support".into()))?;
    let mut seeded_from = "marginals";
    if let Some(d) = seed_discord {
        let (da, dw) = discord_seed(&layout, d);
        if let Some(fd) = problem.value(&problem.sigma(&da, &dw)) {
            if fd < f {
                atoms = da;
                w = dw;
                f = fd;
                seeded_from = "discord";
            }
        }
    }
    problem.reweight(&atoms, &mut w, &mut f)?;

    let mut rng = rng_for(cfg.seed, 0x5e9a_7ab1);
    let gap_tol = T::of(cfg.ree_gap_tol);
    let mut gap = T::infinity();
    let mut converged = false;
    let mut iterations = 0;
    let mut best = (f, atoms.clone(), w.clone());
    let mut history: Vec<T> = Vec::new();
    while iterations < cfg.ree_iters {
        iterations += 1;
        let sigma = problem.sigma(&atoms, &w);
        let g = problem.gradient(&sigma)?;
        let (atom, top) = problem.oracle(&g, &atoms, &w, &mut rng)?;
        let current: T = atoms.iter().zip(&w).map(|(a, &wk)| wk * g.expectation(&a.full)).sum();
        gap = top - current;
        if gap <= gap_tol || f <= T::zero() {
            converged = true;
            break;
        }
        let (gamma, fnew) = problem.line_search(&sigma, &atom, f);
        if gamma <= T::zero() {
            // no descent along the oracle direction: the oracle missed
            // the true maximizer or we are at numerical precision
            converged = gap <= T::of(1e3) * gap_tol;
            break;
        }
        w.iter_mut().for_each(|x| *x = *x * (T::one() - gamma));
        match atoms
            .iter()
            .position(|a| crate::linalg::inner(&a.full, &atom.full).norm_sqr() > T::one() - T::of(DUPLICATE_INFIDELITY))
        {
            Some(k) => w[k] = w[k] + gamma,
            None => {
                atoms.push(atom);
                w.push(gamma);
            }
        }
        f = problem.value(&problem.sigma(&atoms, &w)).unwrap_or(fnew);
        problem.reweight(&atoms, &mut w, &mut f)?;
        problem.refine_atoms(&mut atoms, &w, &mut f)?;

        let keep: Vec<usize> = (0..w.len()).filter(|&k| w[k] > T::of(PRUNE_WEIGHT)).collect();
        atoms = keep.iter().map(|&k| atoms[k].clone()).collect();
        w = keep.iter().map(|&k| w[k]).collect();
        while w.len() > max_terms {
            let smallest = (0..w.len())
                .min_by(|&a, &b| w[a].partial_cmp(&w[b]).unwrap_or(std::cmp::Ordering::Equal))
                .expect("nonempty");
            atoms.remove(smallest);
            w.remove(smallest);
        }
        let total: T = w.iter().copied().sum();
        w.iter_mut().for_each(|x| *x = *x / total);
        f = problem.value(&problem.sigma(&atoms, &w)).unwrap_or(T::infinity());
        if f < best.0 {
            best = (f, atoms.clone(), w.clone());
        }
        history.push(best.0);
        if history.len() > STALL_WINDOW && history[history.len() - 1 - STALL_WINDOW] - best.0 < T::of(STALL_TOL) {
            break;
        }
    }
    let (_, atoms, w) = best;

    let ensemble = SeparableEnsemble {
        block_dims: layout.block_dims.clone(),
        weights: w,
        terms: atoms.into_iter().map(|a| a.blocks).collect(),
    };
    let sigma_block = ensemble.matrix();
    let value = relative_entropy_matrices(&layout.rho, &sigma_block, clip)?;
    let value = value
        .as_finite()
        .ok_or_else(|| QcorrError::Domain("separable estimate lost the state's support".into()))?;
    let sigma = MultipartiteState::from_trusted(layout.marginal_dims.clone(), layout.to_party_order(&sigma_block));
    Ok(ReeResult {
        value,
        ensemble,
        sigma,
        seeded_from: seeded_from.to_string(),
        converged,
        gap: gap / T::of(LN_2),
        iterations,
    })
}

/// Entropy of entanglement of a pure bipartite state.
pub fn pure_bipartite_ree<T: Real>(s: &MultipartiteState<T>, part: &Partition) -> Result<T> {
    if part.blocks().len() != 2 {
        return Err(QcorrError::Partition(format!("{part} is not a bipartition")));
    }
    let (m, p) = s.restrict(part)?;
    let purity = m.purity();
    if purity < T::one() - T::of(STATE_TOL) {
        return Err(QcorrError::Purity(purity.to_f64_lossy()));
    }
    subsystem_entropy(&m, &p.blocks()[0])
}

/// Exact relative entropy of entanglement for cataloged families.
pub fn ree_closed_form(fam_spec: &FamilySpec, part: &Partition) -> Result<f64> {
    let key = part.canonical().to_string();
    let miss = || QcorrError::CatalogMiss {
        family: fam_spec.family.name().to_string(),
        partition: part.to_string(),
    };
    let p = || fam_spec.p().ok_or_else(|| QcorrError::Param("missing parameter \"p\"".into()));
    let pairs = ["A:B", "A:C", "B:C"];
    let log3 = 3f64.log2();
    match fam_spec.family {
        Family::Ghz | Family::GhzGeneral => {
            let h = match fam_spec.family {
                Family::Ghz => 1.0,
                _ => binary_entropy(p()?),
            };
            match key.as_str() {
                "A:B:C" | "A:BC" | "AC:B" | "AB:C" => Ok(h),
                k if pairs.contains(&k) => Ok(0.0),
                _ => Err(miss()),
            }
        }
        Family::GhzPlus | Family::GhzMinus => {
            let p = p()?;
            match key.as_str() {
                "A:B:C" | "AB:C" | "AC:B" => Ok(binary_entropy(p)),
                "A:BC" => {
                    let lambda = 0.5 + (0.25 - p * (1.0 - p) / 2.0).max(0.0).sqrt();
                    Ok(binary_entropy(lambda))
                }
                // the B:C marginal is entangled and has no closed form here
                "A:B" | "A:C" => Ok(0.0),
                _ => Err(miss()),
            }
        }
        Family::W => match key.as_str() {
            "A:B:C" => Ok(2.0 * log3 - 2.0),
            "A:BC" | "AC:B" | "AB:C" => Ok(log3 - 2.0 / 3.0),
            k if pairs.contains(&k) => Ok(log3 - 4.0 / 3.0),
            _ => Err(miss()),
        },
        Family::Counterexample => {
            // a mixture of two product states
            if key.split(':').count() >= 2 {
                Ok(0.0)
            } else {
                Err(miss())
            }
        }
        _ => Err(miss()),
    }
}
