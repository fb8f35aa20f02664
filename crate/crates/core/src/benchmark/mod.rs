//! Two-level atom coupled to a bath with a Lorentzian spectral density.
//!
//! The exact reduced dynamics is the amplitude-damping family
//! `ρ(t) = A_{G(t)}[ρ₀]`. The collision-model description uses
//! `𝓔(t) = A_{cos Ωt}` with `Ω = √(γ₀λ/2)` and memory rate `Γ = λ`; the
//! phenomenological and Shabani–Lidar master equations use the kernel
//! `k(t) = λe^{−λt}` with the zero-temperature decay Lindbladian.
//!
//! Qubit basis: index 0 is the ground state, index 1 the excited state.

mod laplace;
mod run;
mod witness;

pub use laplace::{scalar_cm_solve, scalar_cm_solve_with, PartialFractions, ScalarCmMethod, ScalarCmSolution};
pub use run::{run_benchmark, run_benchmark_with, BenchmarkResult, Model, ModelSeries};
pub use witness::{backflow_witness, canonical_pairs, local_maxima, local_minima, BackflowInterval};

use crate::channel::Superoperator;
use crate::error::{Error, Result};
use crate::kernel::{AnalyticTag, GeneratorMapTrajectory, MemoryRate, TimeGrid};
use crate::linalg::{matrix_unit, CMatrix, C64, ONE};

/// Amplitude-damping channel `A_η`: excited population times `|η|²`,
/// coherence `ρ₁₀` times `η`.
pub fn adc_map(eta: C64) -> Result<Superoperator> {
    if eta.norm() > 1.0 + 1e-12 {
        return Err(Error::InvalidParameter(format!(
            "amplitude-damping parameter |η| = {} exceeds 1",
            eta.norm()
        )));
    }
    ExcitationPreservingQubitMap::new(eta.norm_sqr().min(1.0), eta).map(|m| m.to_superoperator())
}

/// Qubit channel that multiplies the excited population by `q`, the coherence
/// `ρ₁₀` by `c`, and moves the lost population to the ground state. Completely
/// positive iff `0 ≤ q ≤ 1` and `|c|² ≤ q`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ExcitationPreservingQubitMap {
    pub q: f64,
    pub c: C64,
}

impl ExcitationPreservingQubitMap {
    pub fn new(q: f64, c: C64) -> Result<Self> {
        if !(-1e-12..=1.0 + 1e-12).contains(&q) {
            return Err(Error::InvalidParameter(format!("population multiplier {q} outside [0, 1]")));
        }
        if c.norm_sqr() > q + 1e-12 {
            return Err(Error::NotCompletelyPositive {
                eigenvalue: q - c.norm_sqr(),
            });
        }
        Ok(Self { q, c })
    }

    /// Reads `(q, c)` off a superoperator, if it has the excitation-preserving form
    /// (within `tol` in max-norm).
    pub fn from_superoperator(s: &Superoperator, tol: f64) -> Option<Self> {
        if s.dim() != 2 {
            return None;
        }
        let m = s.matrix();
        let q = m[(3, 3)].re;
        let c = m[(1, 1)];
        let candidate = Self { q, c };
        (s.max_abs_diff(&candidate.to_superoperator()) <= tol).then_some(candidate)
    }

    /// Vectorized basis order `[ρ₀₀, ρ₁₀, ρ₀₁, ρ₁₁]`.
    pub fn to_superoperator(&self) -> Superoperator {
        let mut m = CMatrix::zeros(4, 4);
        m[(0, 0)] = ONE;
        m[(0, 3)] = C64::new(1.0 - self.q, 0.0);
        m[(1, 1)] = self.c;
        m[(2, 2)] = self.c.conj();
        m[(3, 3)] = C64::new(self.q, 0.0);
        Superoperator::from_matrix(2, m).expect("4x4 by construction")
    }

    pub fn compose(&self, other: &Self) -> Self {
        Self {
            q: self.q * other.q,
            c: self.c * other.c,
        }
    }

    /// `q − |c|²`; nonnegative exactly when the map is completely positive.
    pub fn cp_margin(&self) -> f64 {
        self.q - self.c.norm_sqr()
    }
}

/// Coupling strength `γ₀` and width `λ` of the Lorentzian spectral density.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct LorentzianParams {
    gamma0: f64,
    lambda: f64,
}

impl LorentzianParams {
    pub fn new(gamma0: f64, lambda: f64) -> Result<Self> {
        for (name, v) in [("gamma0", gamma0), ("lambda", lambda)] {
            if !(v > 0.0 && v.is_finite()) {
                return Err(Error::InvalidParameter(format!("{name} must be positive, got {v}")));
            }
        }
        Ok(Self { gamma0, lambda })
    }

    pub fn gamma0(&self) -> f64 {
        self.gamma0
    }

    pub fn lambda(&self) -> f64 {
        self.lambda
    }

    /// `d² = λ² − 2γ₀λ`.
    pub fn d_squared(&self) -> f64 {
        self.lambda * self.lambda - 2.0 * self.gamma0 * self.lambda
    }

    /// `d = √(λ² − 2γ₀λ)`, imaginary below `λ = 2γ₀`.
    pub fn d(&self) -> C64 {
        C64::new(self.d_squared(), 0.0).sqrt()
    }

    /// `Ω = √(γ₀λ/2)`.
    pub fn omega(&self) -> f64 {
        (self.gamma0 * self.lambda / 2.0).sqrt()
    }

    /// Memory rate of the collision-model description, `Γ = λ`.
    pub fn memory_rate(&self) -> MemoryRate {
        MemoryRate::new(self.lambda).expect("λ is positive")
    }

    /// Largest grid spacing accepted by [`run_benchmark`]:
    /// `min(1/(20λ), 1/(20γ₀), (π/Ω)/40)`.
    pub fn max_dt(&self) -> f64 {
        let period = std::f64::consts::PI / self.omega();
        (1.0 / (20.0 * self.lambda))
            .min(1.0 / (20.0 * self.gamma0))
            .min(period / 40.0)
    }

    /// Zero-temperature decay generator `γ₀(σ₋ρσ₊ − ½{σ₊σ₋, ρ})`.
    pub fn lindbladian(&self) -> Superoperator {
        decay_lindbladian(self.gamma0)
    }
}

/// `γ₀(σ₋ρσ₊ − ½{σ₊σ₋, ρ})` with `σ₋ = |0⟩⟨1|`.
pub fn decay_lindbladian(gamma0: f64) -> Superoperator {
    Superoperator::lindbladian(&CMatrix::zeros(2, 2), &[(gamma0, matrix_unit(2, 0, 1))])
}

/// `cosh √w` for real `w` (`cos √−w` when `w < 0`).
fn cosh_sqrt(w: f64) -> f64 {
    if w.abs() < 1e-3 {
        // Σ wᵏ/(2k)!
        let mut term = 1.0;
        let mut sum = 1.0;
        for k in 1..8 {
            term *= w / ((2 * k - 1) * (2 * k)) as f64;
            sum += term;
        }
        sum
    } else if w > 0.0 {
        w.sqrt().cosh()
    } else {
        (-w).sqrt().cos()
    }
}

/// `sinh(√w)/√w` for real `w`.
fn sinhc_sqrt(w: f64) -> f64 {
    if w.abs() < 1e-3 {
        // Σ wᵏ/(2k+1)!
        let mut term = 1.0;
        let mut sum = 1.0;
        for k in 1..8 {
            term *= w / ((2 * k) * (2 * k + 1)) as f64;
            sum += term;
        }
        sum
    } else if w > 0.0 {
        let z = w.sqrt();
        z.sinh() / z
    } else {
        let z = (-w).sqrt();
        z.sin() / z
    }
}

/// Exact amplitude `G(t) = e^{−λt/2}[cosh(dt/2) + (λ/d) sinh(dt/2)]`.
///
/// Evaluated as `e^{−λt/2}[cosh √w + (λt/2) sinh(√w)/√w]` with `w = d²t²/4`,
/// which is real for either sign of `d²` and regular at `d = 0`. For large
/// positive `w` the two exponentials are combined without overflow.
pub fn exact_g(params: &LorentzianParams, t: f64) -> f64 {
    if t == 0.0 {
        return 1.0;
    }
    let lambda = params.lambda;
    let d2 = params.d_squared();
    let w = d2 * t * t / 4.0;
    if w > 1.0 {
        let d = d2.sqrt();
        // d − λ = −2γ₀λ/(d + λ) avoids cancellation
        let slow = -2.0 * params.gamma0 * lambda / (d + lambda);
        0.5 * (1.0 + lambda / d) * (slow * t / 2.0).exp()
            + 0.5 * (1.0 - lambda / d) * (-(d + lambda) * t / 2.0).exp()
    } else {
        (-lambda * t / 2.0).exp() * (cosh_sqrt(w) + lambda * t / 2.0 * sinhc_sqrt(w))
    }
}

/// Collision-model generator `𝓔(t) = A_{cos Ωt}` on `grid`, tagged for the
/// scalar fast path; its fastest timescale is the population period `π/Ω`.
pub fn cm_generator(params: &LorentzianParams, grid: TimeGrid) -> Result<GeneratorMapTrajectory> {
    let omega = params.omega();
    Ok(
        GeneratorMapTrajectory::from_fn(grid, |t| {
            ExcitationPreservingQubitMap {
                q: (omega * t).cos().powi(2),
                c: C64::new((omega * t).cos(), 0.0),
            }
            .to_superoperator()
        })?
        .with_tag(AnalyticTag::AdcCosine { omega })
        .with_timescale(std::f64::consts::PI / omega),
    )
}

/// Default initial state `√0.2|0⟩ + √0.8|1⟩`.
pub fn default_initial_state() -> CMatrix {
    let a0 = 0.2f64.sqrt();
    let a1 = 0.8f64.sqrt();
    CMatrix::from_row_slice(
        2,
        2,
        &[
            C64::new(a0 * a0, 0.0),
            C64::new(a0 * a1, 0.0),
            C64::new(a1 * a0, 0.0),
            C64::new(a1 * a1, 0.0),
        ],
    )
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::linalg::{self, real};
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    #[test]
    fn adc_examples() {
        assert!(adc_map(ONE).unwrap().max_abs_diff(&Superoperator::identity(2)) < 1e-15);
        let out = adc_map(C64::new(0.0, 0.0)).unwrap().apply(&default_initial_state());
        assert!(linalg::max_abs_diff(&out, &matrix_unit(2, 0, 0)) < 1e-15);
        assert!(adc_map(C64::new(0.8, 0.7)).is_err());
        let r = adc_map(C64::new(0.3, 0.4)).unwrap().cpt_check(1e-12);
        assert!(r.is_cpt && r.min_choi_eig.abs() < 1e-12);
    }

    #[test]
    fn adc_matches_kraus_form() {
        // K₀ = |0⟩⟨0| + η*|1⟩⟨1|, K₁ = √(1−|η|²)|0⟩⟨1| acts as ρ₁₀ ↦ ηρ₁₀.
        let eta = C64::from_polar(0.7, 0.9);
        let mut k0 = CMatrix::zeros(2, 2);
        k0[(0, 0)] = ONE;
        k0[(1, 1)] = eta.conj();
        let mut k1 = CMatrix::zeros(2, 2);
        k1[(0, 1)] = real((1.0 - eta.norm_sqr()).sqrt());
        let kraus = crate::channel::KrausChannel::new(vec![k0, k1]).unwrap();
        // With this Kraus convention ρ₀₁ picks up η and ρ₁₀ picks up η*; conjugate to match.
        let mut rho = default_initial_state();
        rho[(1, 0)] = C64::new(0.1, 0.3);
        rho[(0, 1)] = C64::new(0.1, -0.3);
        let via_kraus = kraus.apply(&rho);
        let via_map = adc_map(eta.conj()).unwrap().apply(&rho);
        assert!(linalg::max_abs_diff(&via_kraus, &via_map) < 1e-14);
    }

    #[test]
    fn adc_composition_multiplies_amplitudes() {
        let mut rng = ChaCha8Rng::seed_from_u64(51);
        for _ in 0..20 {
            let e1 = C64::from_polar(rng.random::<f64>(), rng.random::<f64>() * 6.3);
            let e2 = C64::from_polar(rng.random::<f64>(), rng.random::<f64>() * 6.3);
            let composed = adc_map(e1).unwrap().compose(&adc_map(e2).unwrap());
            assert!(composed.max_abs_diff(&adc_map(e1 * e2).unwrap()) < 1e-12);
        }
    }

    #[test]
    fn excitation_preserving_family() {
        assert!(ExcitationPreservingQubitMap::new(0.25, C64::new(0.6, 0.0)).is_err());
        let m = ExcitationPreservingQubitMap::new(0.5, C64::new(0.3, 0.4)).unwrap();
        let s = m.to_superoperator();
        assert_eq!(ExcitationPreservingQubitMap::from_superoperator(&s, 1e-14), Some(m));
        assert!(ExcitationPreservingQubitMap::from_superoperator(&Superoperator::transpose_map(2), 1e-3).is_none());
        // Choi eigenvalues: 0, 1 − q and those of [[1, c], [c*, q]]
        let r = s.cpt_check(1e-12);
        let b = (1.0 + 0.5) / 2.0;
        let disc = ((1.0 - 0.5f64).powi(2) / 4.0 + 0.25).sqrt();
        assert!((r.min_choi_eig - (b - disc).min(0.0)).abs() < 1e-12);
        assert!(r.is_cpt);
    }

    #[test]
    fn exact_g_examples() {
        let p = LorentzianParams::new(1.0, 4.0).unwrap();
        let s2 = 2f64.sqrt();
        let closed = (-2.0f64).exp() * (s2.cosh() + s2 * s2.sinh());
        assert!((exact_g(&p, 1.0) - closed).abs() < 1e-14);
        assert!((exact_g(&p, 1.0) - 0.6652).abs() < 1e-4);
        assert_eq!(exact_g(&p, 0.0), 1.0);
        // Markov regime
        let p = LorentzianParams::new(1.0, 1e4).unwrap();
        for t in [0.5, 1.0, 3.0] {
            assert!((exact_g(&p, t) - (-t / 2.0).exp()).abs() < 1e-3);
        }
    }

    #[test]
    fn exact_g_matches_pseudomode_integration() {
        // Ġ = −(γ₀λ/2) H, Ḣ = G − λH: the memory integral written as an ODE.
        for (g0, lam) in [(1.0, 4.0), (1.0, 0.1), (1.0, 2.0), (0.3, 0.5)] {
            let p = LorentzianParams::new(g0, lam).unwrap();
            let k = g0 * lam / 2.0;
            let f = |y: [f64; 2]| [-k * y[1], y[0] - lam * y[1]];
            let h = 1e-3;
            let mut y = [1.0, 0.0];
            for i in 0..10_000 {
                let a = f(y);
                let b = f([y[0] + 0.5 * h * a[0], y[1] + 0.5 * h * a[1]]);
                let c = f([y[0] + 0.5 * h * b[0], y[1] + 0.5 * h * b[1]]);
                let d = f([y[0] + h * c[0], y[1] + h * c[1]]);
                y[0] += h / 6.0 * (a[0] + 2.0 * b[0] + 2.0 * c[0] + d[0]);
                y[1] += h / 6.0 * (a[1] + 2.0 * b[1] + 2.0 * c[1] + d[1]);
                if (i + 1) % 1000 == 0 {
                    let t = (i + 1) as f64 * h;
                    assert!((exact_g(&p, t) - y[0]).abs() < 1e-10, "γ₀ = {g0}, λ = {lam}, t = {t}");
                }
            }
        }
    }

    #[test]
    fn exact_g_is_continuous_at_critical_width() {
        let crit = LorentzianParams::new(1.0, 2.0).unwrap();
        for t in [0.05, 0.1, 1.0, 5.0, 20.0] {
            let g = exact_g(&crit, t);
            assert!((g - (-t).exp() * (1.0 + t)).abs() < 1e-14);
            // ∂G/∂λ at λ = 2γ₀ = 2, from the series of cosh and sinh(x)/x
            let slope = (-t).exp() * (t.powi(3) / 12.0 - t * t / 4.0);
            for eps in [1e-6, -1e-6] {
                let near = exact_g(&LorentzianParams::new(1.0, 2.0 * (1.0 + eps)).unwrap(), t);
                assert!((near - g - slope * 2.0 * eps).abs() < 1e-10, "t = {t}");
                if t <= 0.1 {
                    assert!((near - g).abs() <= 1e-8);
                }
            }
        }
    }

    #[test]
    fn cm_generator_shape() {
        let p = LorentzianParams::new(1.0, 0.5).unwrap();
        let omega = p.omega();
        let grid = TimeGrid::new(std::f64::consts::FRAC_PI_2 / omega, 11).unwrap();
        let gen = cm_generator(&p, grid).unwrap();
        assert_eq!(gen.maps()[0], Superoperator::identity(2));
        let last = &gen.maps()[10];
        let out = last.apply(&matrix_unit(2, 1, 1));
        assert!(linalg::max_abs_diff(&out, &matrix_unit(2, 0, 0)) < 1e-15);
        assert_eq!(gen.tag(), Some(AnalyticTag::AdcCosine { omega }));
    }
}
