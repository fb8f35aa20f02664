//! Seeded random states, unitaries and Hamiltonians for property tests and
//! randomized scenarios. Every function takes the generator explicitly.

use rand::Rng;
use rand_distr::StandardNormal;

use crate::linalg::{self, c, CMatrix, CVector, C64};
use crate::state::{DensityMatrix, UnitaryOp};

fn gaussian(rng: &mut impl Rng) -> C64 {
    let re: f64 = rng.sample(StandardNormal);
    let im: f64 = rng.sample(StandardNormal);
    c(re, im) * std::f64::consts::FRAC_1_SQRT_2
}

/// Complex Ginibre matrix with i.i.d. standard complex normal entries.
pub fn ginibre(rows: usize, cols: usize, rng: &mut impl Rng) -> CMatrix {
    CMatrix::from_fn(rows, cols, |_, _| gaussian(rng))
}

/// Haar-distributed unitary via QR of a Ginibre matrix, with the phases of
/// `R`'s diagonal absorbed into `Q`.
pub fn haar_unitary(dim: usize, rng: &mut impl Rng) -> UnitaryOp {
    let qr = ginibre(dim, dim, rng).qr();
    let (mut q, r) = qr.unpack();
    for k in 0..dim {
        let d = r[(k, k)];
        let phase = if d.norm() > 0.0 { d / d.norm() } else { linalg::ONE };
        let mut col = q.column_mut(k);
        col *= phase;
    }
    UnitaryOp::new(q).expect("QR factor is unitary")
}

/// Random Hermitian matrix `(G + G†)/2`.
pub fn hermitian(dim: usize, rng: &mut impl Rng) -> CMatrix {
    linalg::hermitian_part(&ginibre(dim, dim, rng))
}

/// Uniformly random pure state vector.
pub fn pure_state(dim: usize, rng: &mut impl Rng) -> CVector {
    let v = CVector::from_fn(dim, |_, _| gaussian(rng));
    let n = v.norm();
    v / c(n, 0.0)
}

/// Full-rank random mixed state `G G† / Tr(G G†)`.
pub fn density_matrix(dim: usize, rng: &mut impl Rng) -> DensityMatrix {
    let g = ginibre(dim, dim, rng);
    let m = &g * g.adjoint();
    let tr = linalg::trace(&m);
    let m = linalg::hermitian_part(&(m / tr));
    DensityMatrix::new(m).expect("Ginibre state is a valid density matrix")
}

/// Random excitation-preserving two-qubit collision unitary `exp(-iHτ)` with
/// `H = g(e^{iφ} σ₊⊗σ₋ + h.c.) + ω_S σ_z⊗1/2 + ω_A 1⊗σ_z/2`.
pub fn exchange_type_unitary(tau: f64, rng: &mut impl Rng) -> UnitaryOp {
    let g: f64 = rng.random_range(0.2..2.0);
    let phi: f64 = rng.random_range(0.0..std::f64::consts::TAU);
    let omega_s: f64 = rng.random_range(-1.0..1.0);
    let omega_a: f64 = rng.random_range(-1.0..1.0);
    let mut h = CMatrix::zeros(4, 4);
    // basis index = 2·s + a
    let coupling = C64::from_polar(g, phi);
    h[(2, 1)] = coupling;
    h[(1, 2)] = coupling.conj();
    for s in 0..2 {
        for a in 0..2 {
            let zs = if s == 1 { 0.5 } else { -0.5 };
            let za = if a == 1 { 0.5 } else { -0.5 };
            h[(2 * s + a, 2 * s + a)] = c(omega_s * zs + omega_a * za, 0.0);
        }
    }
    UnitaryOp::from_hamiltonian(&h, tau).expect("Hermitian exchange Hamiltonian")
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    #[test]
    fn seeded_draws_are_reproducible() {
        let a = haar_unitary(3, &mut ChaCha8Rng::seed_from_u64(42));
        let b = haar_unitary(3, &mut ChaCha8Rng::seed_from_u64(42));
        assert_eq!(a, b);
    }

    #[test]
    fn random_states_are_valid() {
        let mut rng = ChaCha8Rng::seed_from_u64(4);
        for d in 1..6 {
            let rho = density_matrix(d, &mut rng);
            assert!(rho.min_eigenvalue() > -1e-12);
            assert!((pure_state(d, &mut rng).norm() - 1.0).abs() < 1e-14);
        }
    }

    #[test]
    fn exchange_unitary_preserves_excitation_number() {
        let mut rng = ChaCha8Rng::seed_from_u64(8);
        let u = exchange_type_unitary(0.7, &mut rng);
        let m = u.matrix();
        // |00> and |11> are only phased; the single-excitation block is closed.
        for (i, j) in [(0, 1), (0, 2), (0, 3), (3, 1), (3, 2)] {
            assert!(m[(i, j)].norm() < 1e-14 && m[(j, i)].norm() < 1e-14);
        }
    }
}
