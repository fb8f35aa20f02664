//! Discrete collision chain: a system `S` collides once with each ancilla of a
//! chain while neighbouring ancillas undergo stochastic partial swaps.
//!
//! Three evaluation paths are provided and cross-checked in the tests:
//!
//! * [`simulate_full_chain`] applies every collision to the joint state;
//! * [`simulate_recursive_joint`] uses the joint recursion in powers of one
//!   collision unitary;
//! * [`reduced_recursion`] works on `S` alone through the maps [`map_ej`].
//!
//! Joint states are ordered `S ⊗ A₁ ⊗ … ⊗ A_N`; site 0 is the system and
//! site `i` is ancilla `i`.

use crate::channel::Superoperator;
use crate::error::{Error, Result};
use crate::linalg::{self, real, CMatrix, CVector, ONE, ZERO};
use crate::state::{self, DensityMatrix, StateTolerance, UnitaryOp};

/// Default cap on the joint Hilbert-space dimension of brute-force paths.
pub const DEFAULT_MAX_JOINT_DIM: usize = 4096;

/// Parameters of a discrete collision chain.
#[derive(Debug, Clone)]
pub struct CollisionChainConfig {
    n_steps: usize,
    p: f64,
    tau: f64,
    sa_unitary: UnitaryOp,
    system_init: DensityMatrix,
    ancilla_init: CVector,
    max_joint_dim: usize,
}

impl CollisionChainConfig {
    pub fn new(
        n_steps: usize,
        p: f64,
        tau: f64,
        sa_unitary: UnitaryOp,
        system_init: DensityMatrix,
        ancilla_init: CVector,
    ) -> Result<Self> {
        if n_steps == 0 {
            return Err(Error::InvalidParameter("n_steps must be positive".into()));
        }
        if !(0.0..=1.0).contains(&p) {
            return Err(Error::InvalidProbability(p));
        }
        if !(tau > 0.0 && tau.is_finite()) {
            return Err(Error::InvalidParameter(format!("tau must be positive, got {tau}")));
        }
        let d_s = system_init.dim();
        let d_a = ancilla_init.len();
        if d_a == 0 || sa_unitary.dim() != d_s * d_a {
            return Err(Error::DimensionMismatch(format!(
                "collision unitary has dimension {}, expected {d_s}·{d_a}",
                sa_unitary.dim()
            )));
        }
        let norm = ancilla_init.norm();
        if (norm - 1.0).abs() > 1e-12 {
            return Err(Error::InvalidParameter(format!(
                "ancilla state has norm {norm}, expected 1"
            )));
        }
        Ok(Self {
            n_steps,
            p,
            tau,
            sa_unitary,
            system_init,
            ancilla_init,
            max_joint_dim: DEFAULT_MAX_JOINT_DIM,
        })
    }

    /// Qubit chain with the resonant exchange coupling of strength `g`,
    /// ancillas starting in the ground state.
    pub fn exchange(n_steps: usize, p: f64, tau: f64, g: f64, system_init: DensityMatrix) -> Result<Self> {
        Self::new(
            n_steps,
            p,
            tau,
            exchange_unitary(g, tau)?,
            system_init,
            linalg::basis_vector(2, 0),
        )
    }

    pub fn with_max_joint_dim(mut self, cap: usize) -> Self {
        self.max_joint_dim = cap;
        self
    }

    pub fn with_n_steps(mut self, n_steps: usize) -> Result<Self> {
        if n_steps == 0 {
            return Err(Error::InvalidParameter("n_steps must be positive".into()));
        }
        self.n_steps = n_steps;
        Ok(self)
    }

    pub fn n_steps(&self) -> usize {
        self.n_steps
    }

    pub fn p(&self) -> f64 {
        self.p
    }

    pub fn tau(&self) -> f64 {
        self.tau
    }

    pub fn sa_unitary(&self) -> &UnitaryOp {
        &self.sa_unitary
    }

    pub fn system_init(&self) -> &DensityMatrix {
        &self.system_init
    }

    pub fn ancilla_init(&self) -> &CVector {
        &self.ancilla_init
    }

    pub fn dim_s(&self) -> usize {
        self.system_init.dim()
    }

    pub fn dim_a(&self) -> usize {
        self.ancilla_init.len()
    }

    pub fn max_joint_dim(&self) -> usize {
        self.max_joint_dim
    }

    /// Subsystem dimensions of the joint state `[d_S, d_A, …, d_A]`.
    pub fn joint_dims(&self) -> Vec<usize> {
        let mut dims = vec![self.dim_a(); self.n_steps + 1];
        dims[0] = self.dim_s();
        dims
    }

    /// Memory rate `Γ = −ln p / τ` of the continuum limit.
    pub fn memory_rate(&self) -> f64 {
        -self.p.ln() / self.tau
    }

    fn check_cap(&self) -> Result<usize> {
        let total = self
            .joint_dims()
            .iter()
            .try_fold(1usize, |acc, &d| acc.checked_mul(d))
            .filter(|&t| t <= self.max_joint_dim);
        total.ok_or_else(|| Error::ResourceLimit {
            required: format!(
                "{}·{}^{}",
                self.dim_s(),
                self.dim_a(),
                self.n_steps
            ),
            cap: self.max_joint_dim,
        })
    }

    /// `σ₀ = ρ₀ ⊗ |a⟩⟨a|^{⊗N}`.
    fn initial_joint(&self) -> CMatrix {
        let anc = linalg::outer(&self.ancilla_init);
        let mut sigma = self.system_init.matrix().clone();
        for _ in 0..self.n_steps {
            sigma = linalg::tensor(&sigma, &anc);
        }
        sigma
    }
}

/// Joint chain state after `step` collisions.
#[derive(Debug, Clone)]
pub struct ChainState {
    pub step: usize,
    pub joint: DensityMatrix,
}

impl ChainState {
    pub fn system_marginal(&self, cfg: &CollisionChainConfig) -> Result<DensityMatrix> {
        state::partial_trace(&self.joint, &cfg.joint_dims(), &[0])
    }
}

/// Exchange Hamiltonian `g(σ₊⊗σ₋ + σ₋⊗σ₊)` on two qubits, basis index `2s + a`
/// with `0` the ground state.
pub fn exchange_hamiltonian(g: f64) -> CMatrix {
    let mut h = CMatrix::zeros(4, 4);
    h[(2, 1)] = real(g);
    h[(1, 2)] = real(g);
    h
}

pub fn exchange_unitary(g: f64, tau: f64) -> Result<UnitaryOp> {
    UnitaryOp::from_hamiltonian(&exchange_hamiltonian(g), tau)
}

/// Swap unitary on two systems of dimension `d`: `|i⟩|j⟩ ↦ |j⟩|i⟩`.
pub fn swap_operator(d: usize) -> CMatrix {
    let mut s = CMatrix::zeros(d * d, d * d);
    for i in 0..d {
        for j in 0..d {
            s[(j * d + i, i * d + j)] = ONE;
        }
    }
    s
}

/// `σ ↦ (1 − p)σ + p ŜσŜ` on two ancillas of dimension `dim_a`.
pub fn partial_swap_map(p: f64, dim_a: usize) -> Result<Superoperator> {
    if !(0.0..=1.0).contains(&p) {
        return Err(Error::InvalidProbability(p));
    }
    let swap = Superoperator::conjugation(&swap_operator(dim_a));
    Ok(&Superoperator::identity(dim_a * dim_a).scale(1.0 - p) + &swap.scale(p))
}

/// Full-space matrix of `op` acting on the listed sites (in the given order)
/// and as the identity elsewhere.
pub fn embed_operator(op: &CMatrix, dims: &[usize], sites: &[usize]) -> Result<CMatrix> {
    let local: usize = sites.iter().map(|&s| dims[s]).product();
    if op.nrows() != local || op.ncols() != local {
        return Err(Error::DimensionMismatch(format!(
            "operator of size {} on sites with dimension {local}",
            op.nrows()
        )));
    }
    let total: usize = dims.iter().product();
    Ok(LocalIndex::new(dims, sites).apply_left(op, &linalg::identity(total)))
}

/// Full-space swap unitary exchanging sites `a` and `b` (of equal dimension).
pub fn embedded_swap(dims: &[usize], a: usize, b: usize) -> Result<CMatrix> {
    if dims[a] != dims[b] {
        return Err(Error::DimensionMismatch("swapped sites differ in dimension".into()));
    }
    let perm = swap_permutation(dims, a, b);
    let total = perm.len();
    let mut s = CMatrix::zeros(total, total);
    for (i, &j) in perm.iter().enumerate() {
        s[(j, i)] = ONE;
    }
    Ok(s)
}

/// Index map for operators acting on a subset of sites. `full[t·kd + k]` is
/// the joint index whose local digits (in `sites` order) encode `k` and whose
/// remaining digits encode `t`.
struct LocalIndex {
    full: Vec<usize>,
    kd: usize,
    td: usize,
}

impl LocalIndex {
    fn new(dims: &[usize], sites: &[usize]) -> Self {
        // Reorder so that the requested sites come first, in order; the index
        // table then reads local digits in `sites` order.
        let mut order: Vec<usize> = sites.to_vec();
        order.extend((0..dims.len()).filter(|s| !sites.contains(s)));
        let permuted: Vec<usize> = order.iter().map(|&s| dims[s]).collect();
        let keep: Vec<usize> = (0..sites.len()).collect();
        let (perm_full, kd, td) = state::index_table(&permuted, &keep);
        // perm_full maps into the permuted ordering; translate back.
        let total = perm_full.len();
        let mut strides = vec![1usize; dims.len()];
        for s in (0..dims.len().saturating_sub(1)).rev() {
            strides[s] = strides[s + 1] * dims[s + 1];
        }
        let mut full = vec![0; total];
        let mut digits = vec![0; dims.len()];
        for (slot, &pi) in perm_full.iter().enumerate() {
            let mut rem = pi;
            for s in (0..permuted.len()).rev() {
                digits[s] = rem % permuted[s];
                rem /= permuted[s];
            }
            full[slot] = order
                .iter()
                .zip(&digits)
                .map(|(&site, &d)| d * strides[site])
                .sum();
        }
        Self { full, kd, td }
    }

    /// `(op ⊗ 1) · m`.
    fn apply_left(&self, op: &CMatrix, m: &CMatrix) -> CMatrix {
        let mut out = CMatrix::zeros(m.nrows(), m.ncols());
        let mut buf = vec![ZERO; self.kd];
        for col in 0..m.ncols() {
            for t in 0..self.td {
                let base = t * self.kd;
                for (k, b) in buf.iter_mut().enumerate() {
                    *b = m[(self.full[base + k], col)];
                }
                for r in 0..self.kd {
                    let mut acc = ZERO;
                    for (k, b) in buf.iter().enumerate() {
                        acc += op[(r, k)] * b;
                    }
                    out[(self.full[base + r], col)] = acc;
                }
            }
        }
        out
    }

    /// `(op ⊗ 1) · m · (op ⊗ 1)†`.
    fn conjugate(&self, op: &CMatrix, m: &CMatrix) -> CMatrix {
        self.apply_left(op, &self.apply_left(op, m).adjoint()).adjoint()
    }
}

fn swap_permutation(dims: &[usize], a: usize, b: usize) -> Vec<usize> {
    let total: usize = dims.iter().product();
    let mut digits = vec![0; dims.len()];
    (0..total)
        .map(|i| {
            let mut rem = i;
            for s in (0..dims.len()).rev() {
                digits[s] = rem % dims[s];
                rem /= dims[s];
            }
            digits.swap(a, b);
            digits.iter().zip(dims).fold(0, |acc, (&d, &n)| acc * n + d)
        })
        .collect()
}

fn permute(m: &CMatrix, perm: &[usize]) -> CMatrix {
    let mut out = CMatrix::zeros(m.nrows(), m.ncols());
    for (j, &pj) in perm.iter().enumerate() {
        for (i, &pi) in perm.iter().enumerate() {
            out[(pi, pj)] = m[(i, j)];
        }
    }
    out
}

fn validated(m: CMatrix, what: &str) -> Result<DensityMatrix> {
    DensityMatrix::with_tolerance(linalg::hermitian_part(&m), StateTolerance::PROPAGATED).map_err(|e| {
        log::error!("{what} failed validation: {e}");
        e
    })
}

/// Brute-force evolution: `σ_n = 𝓤_{S,n} ∘ 𝓢_{n,n−1} ∘ 𝓤_{S,n−1} ∘ … ∘ 𝓤_{S,1}[σ₀]`.
/// Returns `σ₀, σ₁, …, σ_N` on the full `N`-ancilla space.
pub fn simulate_full_chain(cfg: &CollisionChainConfig) -> Result<Vec<ChainState>> {
    cfg.check_cap()?;
    let dims = cfg.joint_dims();
    let u = cfg.sa_unitary.matrix();
    let one_minus_p = real(1.0 - cfg.p);
    let p = real(cfg.p);
    let mut sigma = cfg.initial_joint();
    let mut out = Vec::with_capacity(cfg.n_steps + 1);
    out.push(ChainState {
        step: 0,
        joint: validated(sigma.clone(), "initial joint state")?,
    });
    for k in 1..=cfg.n_steps {
        if k >= 2 && cfg.p > 0.0 {
            let swapped = permute(&sigma, &swap_permutation(&dims, k - 1, k));
            sigma = sigma * one_minus_p + swapped * p;
        }
        sigma = LocalIndex::new(&dims, &[0, k]).conjugate(u, &sigma);
        out.push(ChainState {
            step: k,
            joint: validated(sigma.clone(), "joint chain state")?,
        });
    }
    Ok(out)
}

/// Joint recursion: `σ_n = (1−p) Σ_{j=1}^{n−1} p^{j−1} 𝓤_{S,n}^j[σ_{n−j}] + p^{n−1} 𝓤_{S,n}^n[σ₀]`.
pub fn simulate_recursive_joint(cfg: &CollisionChainConfig) -> Result<Vec<ChainState>> {
    cfg.check_cap()?;
    let dims = cfg.joint_dims();
    let n_max = cfg.n_steps;
    let powers: Vec<CMatrix> = (0..=n_max).map(|j| cfg.sa_unitary.pow(j)).collect();
    let mut sigmas: Vec<CMatrix> = vec![cfg.initial_joint()];
    for n in 1..=n_max {
        let local = LocalIndex::new(&dims, &[0, n]);
        let mut acc = local.conjugate(&powers[n], &sigmas[0]) * real(cfg.p.powi(n as i32 - 1));
        if cfg.p < 1.0 {
            for j in 1..n {
                let w = (1.0 - cfg.p) * cfg.p.powi(j as i32 - 1);
                if w != 0.0 {
                    acc += local.conjugate(&powers[j], &sigmas[n - j]) * real(w);
                }
            }
        }
        sigmas.push(acc);
    }
    sigmas
        .into_iter()
        .enumerate()
        .map(|(step, s)| {
            Ok(ChainState {
                step,
                joint: validated(s, "recursive joint state")?,
            })
        })
        .collect()
}

/// `𝓔_j[ρ] = Tr_A{𝓤^j(ρ ⊗ |a⟩⟨a|)}`, with `𝓔₀ = 𝓘`.
pub fn map_ej(j: usize, cfg: &CollisionChainConfig) -> Superoperator {
    Superoperator::stinespring(&cfg.sa_unitary.pow(j), cfg.dim_s(), cfg.ancilla_init())
}

/// The maps `𝓔₀, 𝓔₁, …, 𝓔_N` for the configured chain.
pub fn maps_ej(cfg: &CollisionChainConfig) -> Vec<Superoperator> {
    let u = cfg.sa_unitary.matrix();
    let mut power = linalg::identity(u.nrows());
    let mut out = Vec::with_capacity(cfg.n_steps + 1);
    for j in 0..=cfg.n_steps {
        if j > 0 {
            power = u * &power;
        }
        out.push(Superoperator::stinespring(&power, cfg.dim_s(), cfg.ancilla_init()));
    }
    out
}

/// Reduced recursion on `S` alone:
/// `ρ_n = (1−p) Σ_{j=1}^{n−1} p^{j−1} 𝓔_j[ρ_{n−j}] + p^{n−1} 𝓔_n[ρ₀]`.
/// Returns `ρ₀, …, ρ_N`.
pub fn reduced_recursion(cfg: &CollisionChainConfig) -> Result<Vec<DensityMatrix>> {
    let maps = maps_ej(cfg);
    let rhos = reduced_recursion_raw(cfg.system_init.matrix(), cfg.p, &maps);
    rhos.into_iter()
        .map(|r| validated(r, "reduced state"))
        .collect()
}

fn reduced_recursion_raw(rho0: &CMatrix, p: f64, maps: &[Superoperator]) -> Vec<CMatrix> {
    let n_max = maps.len() - 1;
    let mut rhos = vec![rho0.clone()];
    for n in 1..=n_max {
        let mut acc = maps[n].apply(rho0) * real(p.powi(n as i32 - 1));
        for j in 1..n {
            let w = (1.0 - p) * p.powi(j as i32 - 1);
            if w != 0.0 {
                acc += maps[j].apply(&rhos[n - j]) * real(w);
            }
        }
        rhos.push(acc);
    }
    rhos
}

/// Outcome of [`verify_delta_recursion`].
#[derive(Debug, Clone, PartialEq)]
pub struct DeltaRecursionReport {
    /// `max_n ‖Δρ_n(difference equation) − (ρ_n − ρ_{n−1})‖_max` over `n = 2..=N`.
    pub max_deviation: f64,
    /// Per-step deviations, index `n − 2`.
    pub deviations: Vec<f64>,
}

/// Checks the difference form of the reduced recursion,
///
/// `Δρ_n = (1−p) Σ_{j=1}^{n−2} p^{j−1} 𝓔_j[Δρ_{n−j}] + (1−p) p^{n−2} 𝓔_{n−1}[ρ₁]
///        + (p^{n−1} 𝓔_n − p^{n−2} 𝓔_{n−1})[ρ₀]`,
///
/// against direct subtraction of consecutive reduced states.
pub fn verify_delta_recursion(cfg: &CollisionChainConfig) -> Result<DeltaRecursionReport> {
    if cfg.n_steps < 3 {
        return Err(Error::InvalidParameter(format!(
            "difference recursion needs at least 3 steps, got {}",
            cfg.n_steps
        )));
    }
    let p = cfg.p;
    let maps = maps_ej(cfg);
    let rhos = reduced_recursion_raw(cfg.system_init.matrix(), p, &maps);
    let delta: Vec<CMatrix> = (0..rhos.len())
        .map(|n| if n == 0 { CMatrix::zeros(rhos[0].nrows(), rhos[0].ncols()) } else { &rhos[n] - &rhos[n - 1] })
        .collect();
    let pw = |e: i32| if e < 0 { 0.0 } else { p.powi(e) };
    let mut deviations = Vec::with_capacity(cfg.n_steps - 1);
    for n in 2..=cfg.n_steps {
        let ni = n as i32;
        let mut lhs = maps[n - 1].apply(&rhos[1]) * real((1.0 - p) * pw(ni - 2));
        lhs += maps[n].apply(&rhos[0]) * real(pw(ni - 1));
        lhs -= maps[n - 1].apply(&rhos[0]) * real(pw(ni - 2));
        for j in 1..=n.saturating_sub(2) {
            lhs += maps[j].apply(&delta[n - j]) * real((1.0 - p) * pw(j as i32 - 1));
        }
        deviations.push(linalg::max_abs_diff(&lhs, &delta[n]));
    }
    let max_deviation = deviations.iter().cloned().fold(0.0, f64::max);
    Ok(DeltaRecursionReport {
        max_deviation,
        deviations,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::linalg::{basis_vector, matrix_unit};
    use crate::random;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    fn random_cfg(n: usize, p: f64, seed: u64) -> CollisionChainConfig {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let tau = 0.4;
        let u = random::exchange_type_unitary(tau, &mut rng);
        let rho = random::density_matrix(2, &mut rng);
        CollisionChainConfig::new(n, p, tau, u, rho, basis_vector(2, 0)).unwrap()
    }

    #[test]
    fn config_validation() {
        let rho = DensityMatrix::basis(2, 1);
        assert!(matches!(
            CollisionChainConfig::exchange(3, 1.2, 0.1, 1.0, rho.clone()),
            Err(Error::InvalidProbability(_))
        ));
        assert!(CollisionChainConfig::exchange(3, 0.5, 0.0, 1.0, rho.clone()).is_err());
        assert!(CollisionChainConfig::exchange(0, 0.5, 0.1, 1.0, rho.clone()).is_err());
        let bad = CollisionChainConfig::new(
            2,
            0.5,
            0.1,
            UnitaryOp::identity(2),
            rho.clone(),
            basis_vector(2, 0),
        );
        assert!(matches!(bad, Err(Error::DimensionMismatch(_))));
        let unnormalized = CollisionChainConfig::new(
            2,
            0.5,
            0.1,
            UnitaryOp::identity(4),
            rho,
            basis_vector(2, 0) * real(1.1),
        );
        assert!(unnormalized.is_err());
    }

    #[test]
    fn partial_swap_examples() {
        assert!(partial_swap_map(0.0, 2).unwrap().max_abs_diff(&Superoperator::identity(4)) < 1e-15);
        let full = partial_swap_map(1.0, 2).unwrap();
        assert!(full.max_abs_diff(&Superoperator::conjugation(&swap_operator(2))) < 1e-15);
        // |01⟩⟨01| has index 1 in the basis {00, 01, 10, 11}.
        let out = partial_swap_map(0.3, 2).unwrap().apply(&matrix_unit(4, 1, 1));
        let mut expected = CMatrix::zeros(4, 4);
        expected[(1, 1)] = real(0.7);
        expected[(2, 2)] = real(0.3);
        assert!(linalg::max_abs_diff(&out, &expected) < 1e-15);
        assert!(matches!(partial_swap_map(-0.1, 2), Err(Error::InvalidProbability(_))));
        let r = partial_swap_map(0.4, 3).unwrap().cpt_check(1e-12); assert!(r.is_cpt, "{r:?}");
    }

    #[test]
    fn local_index_matches_kronecker_embedding() {
        let mut rng = ChaCha8Rng::seed_from_u64(11);
        let dims = [2, 3, 2];
        let op = random::ginibre(4, 4, &mut rng);
        // sites (0, 2): compare against 1-swap-conjugated Kronecker product
        let embedded = embed_operator(&op, &dims, &[0, 2]).unwrap();
        let direct = linalg::tensor(&op, &linalg::identity(3));
        // reorder [0,2,1] → [0,1,2]
        let perm: Vec<usize> = (0..12)
            .map(|i| {
                let (a, c2, b) = (i / 6, (i / 3) % 2, i % 3);
                a * 6 + b * 2 + c2
            })
            .collect();
        assert!(linalg::max_abs_diff(&embedded, &permute(&direct, &perm)) < 1e-14);
        // sites listed in reverse order correspond to conjugating op by the swap
        let reversed = embed_operator(&op, &[2, 2], &[1, 0]).unwrap();
        let s = swap_operator(2);
        assert!(linalg::max_abs_diff(&reversed, &(&s * &op * &s)) < 1e-14);
    }

    #[test]
    fn swap_identities_hold() {
        let mut rng = ChaCha8Rng::seed_from_u64(12);
        let n = 4;
        let dims = [2, 2, 2, 2, 2];
        let u = random::haar_unitary(4, &mut rng);
        for i in 1..n {
            let s = embedded_swap(&dims, i, i + 1).unwrap();
            let ui = embed_operator(u.matrix(), &dims, &[0, i]).unwrap();
            let ui1 = embed_operator(u.matrix(), &dims, &[0, i + 1]).unwrap();
            assert!(linalg::max_abs_diff(&(&s * &ui * &s), &ui1) < 1e-12);
        }
        let cfg = random_cfg(n, 0.5, 3);
        let sigma0 = cfg.initial_joint();
        for i in 1..n {
            let s = embedded_swap(&dims, i, i + 1).unwrap();
            assert!(linalg::max_abs_diff(&(&s * &sigma0 * &s), &sigma0) < 1e-12);
        }
    }

    #[test]
    fn single_collision() {
        let cfg = random_cfg(1, 0.4, 4);
        let states = simulate_full_chain(&cfg).unwrap();
        let sigma0 = cfg.initial_joint();
        let expected = cfg.sa_unitary.conjugate(&sigma0);
        assert!(linalg::max_abs_diff(states[1].joint.matrix(), &expected) < 1e-13);
    }

    #[test]
    fn ancillas_ahead_stay_untouched_without_swaps() {
        let cfg = random_cfg(4, 0.0, 5);
        let dims = cfg.joint_dims();
        let ground = matrix_unit(2, 0, 0);
        for st in simulate_full_chain(&cfg).unwrap() {
            for k in st.step + 1..=cfg.n_steps() {
                let m = state::partial_trace(&st.joint, &dims, &[k]).unwrap();
                assert!(linalg::max_abs_diff(m.matrix(), &ground) < 1e-12);
            }
        }
    }

    #[test]
    fn recursion_n2_written_out() {
        let cfg = random_cfg(2, 0.35, 6);
        let dims = cfg.joint_dims();
        let full = simulate_full_chain(&cfg).unwrap();
        let u2 = embed_operator(cfg.sa_unitary.matrix(), &dims, &[0, 2]).unwrap();
        let u2sq = &u2 * &u2;
        let s1 = full[1].joint.matrix();
        let s0 = full[0].joint.matrix();
        let expected = (&u2 * s1 * u2.adjoint()) * real(0.65) + (&u2sq * s0 * u2sq.adjoint()) * real(0.35);
        assert!(linalg::max_abs_diff(full[2].joint.matrix(), &expected) < 1e-12);
    }

    #[test]
    fn full_chain_and_joint_recursion_agree() {
        for (seed, p) in [(7u64, 0.7), (8, 0.0), (9, 1.0), (10, 0.3)] {
            let cfg = random_cfg(5, p, seed);
            let a = simulate_full_chain(&cfg).unwrap();
            let b = simulate_recursive_joint(&cfg).unwrap();
            for (x, y) in a.iter().zip(&b) {
                assert!(linalg::max_abs_diff(x.joint.matrix(), y.joint.matrix()) < 1e-10);
            }
        }
    }

    #[test]
    fn joint_recursion_at_p1_is_a_single_power() {
        let cfg = random_cfg(3, 1.0, 13);
        let dims = cfg.joint_dims();
        let states = simulate_recursive_joint(&cfg).unwrap();
        let u3 = embed_operator(&cfg.sa_unitary.pow(3), &dims, &[0, 3]).unwrap();
        let expected = &u3 * cfg.initial_joint() * u3.adjoint();
        assert!(linalg::max_abs_diff(states[3].joint.matrix(), &expected) < 1e-12);
    }

    #[test]
    fn cap_is_enforced() {
        let cfg = random_cfg(5, 0.5, 14).with_max_joint_dim(64);
        assert!(simulate_full_chain(&cfg).is_ok());
        let cfg = cfg.with_max_joint_dim(63);
        match simulate_full_chain(&cfg) {
            Err(Error::ResourceLimit { cap, .. }) => assert_eq!(cap, 63),
            other => panic!("expected ResourceLimit, got {other:?}"),
        }
        assert!(matches!(simulate_recursive_joint(&cfg), Err(Error::ResourceLimit { .. })));
        // the reduced path has no cap
        assert_eq!(reduced_recursion(&cfg.with_n_steps(40).unwrap()).unwrap().len(), 41);
    }

    #[test]
    fn exchange_maps_are_amplitude_damping() {
        let g = 1.3;
        let tau = 0.17;
        let cfg = CollisionChainConfig::exchange(12, 0.5, tau, g, DensityMatrix::basis(2, 1)).unwrap();
        for (j, e) in maps_ej(&cfg).iter().enumerate() {
            let eta = (g * j as f64 * tau).cos();
            // oracle: ρ00 += (1−η²)ρ11, ρ11 ↦ η²ρ11, ρ01 ↦ η ρ01
            let mut expected = CMatrix::zeros(4, 4);
            expected[(0, 0)] = ONE;
            expected[(0, 3)] = real(1.0 - eta * eta);
            expected[(1, 1)] = real(eta);
            expected[(2, 2)] = real(eta);
            expected[(3, 3)] = real(eta * eta);
            assert!(linalg::max_abs_diff(e.matrix(), &expected) < 1e-12, "j = {j}");
            assert!(e.cpt_check(1e-10).is_cpt);
        }
        // g jτ = π/2: full decay
        let tau = std::f64::consts::FRAC_PI_2 / (3.0 * g);
        let cfg = CollisionChainConfig::exchange(3, 0.5, tau, g, DensityMatrix::basis(2, 1)).unwrap();
        let out = map_ej(3, &cfg).apply(&matrix_unit(2, 1, 1));
        assert!(linalg::max_abs_diff(&out, &matrix_unit(2, 0, 0)) < 1e-12);
    }

    #[test]
    fn ej_matches_single_pair_evolution() {
        let g = 0.9;
        let tau = 0.3;
        let cfg = CollisionChainConfig::exchange(5, 0.2, tau, g, DensityMatrix::basis(2, 1)).unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(15);
        let rho = random::density_matrix(2, &mut rng);
        for j in 1..=5 {
            let u = exchange_unitary(g, j as f64 * tau).unwrap();
            let joint = linalg::tensor(rho.matrix(), &matrix_unit(2, 0, 0));
            let expected = state::partial_trace_matrix(&u.conjugate(&joint), &[2, 2], &[0]).unwrap();
            assert!(linalg::max_abs_diff(&map_ej(j, &cfg).apply(rho.matrix()), &expected) < 1e-12);
        }
    }

    #[test]
    fn identity_collision_gives_identity_maps() {
        let rho = DensityMatrix::basis(2, 1);
        let cfg = CollisionChainConfig::new(4, 0.3, 0.1, UnitaryOp::identity(4), rho, basis_vector(2, 0)).unwrap();
        for e in maps_ej(&cfg) {
            assert!(e.max_abs_diff(&Superoperator::identity(2)) < 1e-15);
        }
    }

    #[test]
    fn reduced_recursion_endpoints() {
        let cfg = random_cfg(6, 0.0, 16);
        let e1 = map_ej(1, &cfg);
        let rhos = reduced_recursion(&cfg).unwrap();
        let mut rho = cfg.system_init().matrix().clone();
        for r in &rhos[1..] {
            rho = e1.apply(&rho);
            assert!(linalg::max_abs_diff(r.matrix(), &rho) < 1e-12);
        }
        let cfg = random_cfg(6, 1.0, 17);
        let rhos = reduced_recursion(&cfg).unwrap();
        for (n, r) in rhos.iter().enumerate() {
            let expected = map_ej(n, &cfg).apply(cfg.system_init().matrix());
            assert!(linalg::max_abs_diff(r.matrix(), &expected) < 1e-12);
        }
    }

    #[test]
    fn reduced_recursion_matches_brute_force() {
        let cfg = random_cfg(8, 0.5, 18);
        let reduced = reduced_recursion(&cfg).unwrap();
        for st in simulate_full_chain(&cfg).unwrap() {
            let marginal = st.system_marginal(&cfg).unwrap();
            assert!(state::trace_distance(&marginal, &reduced[st.step]).unwrap() < 1e-10);
        }
    }

    #[test]
    fn difference_recursion_holds() {
        for (seed, p) in [(19u64, 0.0), (20, 1.0), (21, 0.45), (22, 0.9)] {
            let cfg = random_cfg(10, p, seed);
            let report = verify_delta_recursion(&cfg).unwrap();
            assert_eq!(report.deviations.len(), 9);
            assert!(report.max_deviation < 1e-10, "p = {p}: {}", report.max_deviation);
        }
        assert!(verify_delta_recursion(&random_cfg(2, 0.5, 1)).is_err());
    }

    #[test]
    fn difference_recursion_needs_p_to_the_n_minus_two() {
        // with p^{n−1} on the 𝓔_{n−1}[ρ₁] term the identity breaks already at n = 3
        let cfg = random_cfg(3, 0.5, 24);
        let p: f64 = 0.5;
        let maps = maps_ej(&cfg);
        let rhos = reduced_recursion_raw(cfg.system_init.matrix(), p, &maps);
        let delta3 = &rhos[3] - &rhos[2];
        let delta2 = &rhos[2] - &rhos[1];
        let rest = maps[1].apply(&delta2) * real(1.0 - p) + maps[3].apply(&rhos[0]) * real(p * p)
            - maps[2].apply(&rhos[0]) * real(p);
        let with = |e: i32| &rest + maps[2].apply(&rhos[1]) * real((1.0 - p) * p.powi(e));
        assert!(linalg::max_abs_diff(&with(1), &delta3) < 1e-12);
        assert!(linalg::max_abs_diff(&with(2), &delta3) > 1e-3);
    }

    #[test]
    fn markov_difference_reduction() {
        let cfg = random_cfg(5, 0.0, 23);
        let rhos = reduced_recursion(&cfg).unwrap();
        let e1 = map_ej(1, &cfg);
        for n in 1..rhos.len() {
            let delta = rhos[n].matrix() - rhos[n - 1].matrix();
            let expected = e1.apply(rhos[n - 1].matrix()) - rhos[n - 1].matrix();
            assert!(linalg::max_abs_diff(&delta, &expected) < 1e-12);
        }
    }
}
