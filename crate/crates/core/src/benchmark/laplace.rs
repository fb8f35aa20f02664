//! Scalar sectors of the collision-model master equation for the benchmark
//! generator `𝓔(t) = A_{cos Ωt}`.
//!
//! The coherence multiplier sees the generator `cos Ωt`, the excited-population
//! multiplier sees `cos² Ωt`. With `u = s + Γ` the Laplace transforms are
//!
//! `c̃ = u / (u² − Γu + Ω²)`,
//! `q̃ = (u² + 2Ω²) / (u³ − Γu² + 4Ω²u − 2ΓΩ²)`,
//!
//! which are inverted by partial fractions, or the renewal equation is stepped
//! directly.

use crate::benchmark::LorentzianParams;
use crate::error::{Error, Result};
use crate::kernel::{scalar_renewal, validate_resolution, TimeGrid};
use crate::linalg::{C64, ZERO};

/// Roots closer than this (relative to their magnitude) count as repeated.
const REPEATED_ROOT_TOL: f64 = 1e-5;

/// Roots of `Σ coeffs[i] x^{n−i}` (highest degree first) from the eigenvalues
/// of the companion matrix.
pub fn polynomial_roots(coeffs: &[f64]) -> Result<Vec<C64>> {
    let lead = *coeffs.first().ok_or_else(|| Error::InvalidParameter("empty polynomial".into()))?;
    if lead == 0.0 {
        return Err(Error::InvalidParameter("leading coefficient is zero".into()));
    }
    let n = coeffs.len() - 1;
    if n == 0 {
        return Ok(Vec::new());
    }
    let companion = faer::Mat::<f64>::from_fn(n, n, |i, j| {
        if i == 0 {
            -coeffs[j + 1] / lead
        } else if i == j + 1 {
            1.0
        } else {
            0.0
        }
    });
    let eig = companion
        .eigenvalues()
        .map_err(|_| Error::Singular("companion eigenvalues did not converge"))?;
    Ok(eig.into_iter().map(|z| C64::new(z.re, z.im)).collect())
}

fn horner(coeffs: &[f64], x: C64) -> C64 {
    coeffs.iter().fold(ZERO, |acc, &a| acc * x + a)
}

fn derivative(coeffs: &[f64]) -> Vec<f64> {
    let n = coeffs.len() - 1;
    coeffs[..n].iter().enumerate().map(|(i, a)| a * (n - i) as f64).collect()
}

/// `f(t) = Σ_k r_k e^{p_k t}`, the inverse Laplace transform of a proper
/// rational function with simple poles.
#[derive(Debug, Clone, PartialEq)]
pub struct PartialFractions {
    poles: Vec<C64>,
    residues: Vec<C64>,
}

impl PartialFractions {
    /// `numerator / denominator` in the variable `u`, inverted in `s = u − shift`.
    /// Coefficients are highest degree first; repeated poles are rejected.
    pub fn new(numerator: &[f64], denominator: &[f64], shift: f64) -> Result<Self> {
        if numerator.len() >= denominator.len() {
            return Err(Error::InvalidParameter("rational function must be strictly proper".into()));
        }
        let roots = polynomial_roots(denominator)?;
        for (i, a) in roots.iter().enumerate() {
            for b in &roots[i + 1..] {
                let scale = a.norm().max(b.norm()).max(1.0);
                if (a - b).norm() < REPEATED_ROOT_TOL * scale {
                    return Err(Error::Singular("repeated pole in partial fractions"));
                }
            }
        }
        let d_prime = derivative(denominator);
        let residues = roots
            .iter()
            .map(|&u| horner(numerator, u) / horner(&d_prime, u))
            .collect();
        Ok(Self {
            poles: roots.into_iter().map(|u| u - shift).collect(),
            residues,
        })
    }

    pub fn poles(&self) -> &[C64] {
        &self.poles
    }

    pub fn residues(&self) -> &[C64] {
        &self.residues
    }

    /// Real part of `Σ r_k e^{p_k t}`.
    pub fn eval(&self, t: f64) -> f64 {
        self.poles
            .iter()
            .zip(&self.residues)
            .map(|(p, r)| (r * (p * t).exp()).re)
            .sum()
    }
}

/// How the scalar sectors were solved.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ScalarCmMethod {
    PartialFractions,
    Volterra,
}

/// Population (`q`) and coherence (`c`) multipliers of `Λ(t)` on a grid.
#[derive(Debug, Clone, PartialEq)]
pub struct ScalarCmSolution {
    pub grid: TimeGrid,
    pub q: Vec<f64>,
    pub c: Vec<f64>,
    pub method: ScalarCmMethod,
}

/// Coherence and population transforms for frequency `Ω` and memory rate `Γ`.
fn sector_fractions(omega: f64, gamma: f64) -> Result<(PartialFractions, PartialFractions)> {
    let w2 = omega * omega;
    let coherence = PartialFractions::new(&[1.0, 0.0], &[1.0, -gamma, w2], gamma)?;
    let population = PartialFractions::new(
        &[1.0, 0.0, 2.0 * w2],
        &[1.0, -gamma, 4.0 * w2, -2.0 * gamma * w2],
        gamma,
    )?;
    Ok((coherence, population))
}

/// Scalar sectors of the benchmark with `Γ = λ`, `Ω = √(γ₀λ/2)`.
pub fn scalar_cm_solve(params: &LorentzianParams, grid: &TimeGrid) -> Result<ScalarCmSolution> {
    scalar_cm_solve_with(params.omega(), params.lambda(), grid, ScalarCmMethod::PartialFractions)
}

/// Scalar sectors for generator `A_{cos Ωt}` and memory rate `gamma`. The
/// partial-fraction path falls back to Volterra stepping on repeated poles.
pub fn scalar_cm_solve_with(
    omega: f64,
    gamma: f64,
    grid: &TimeGrid,
    method: ScalarCmMethod,
) -> Result<ScalarCmSolution> {
    if !(omega > 0.0 && omega.is_finite()) || !(gamma >= 0.0 && gamma.is_finite()) {
        return Err(Error::InvalidParameter(format!(
            "need Ω > 0 and Γ ≥ 0, got Ω = {omega}, Γ = {gamma}"
        )));
    }
    if method == ScalarCmMethod::PartialFractions {
        match sector_fractions(omega, gamma) {
            Ok((coh, pop)) => {
                let times = grid.times();
                let mut q: Vec<f64> = times.iter().map(|&t| pop.eval(t)).collect();
                let mut c: Vec<f64> = times.iter().map(|&t| coh.eval(t)).collect();
                q[0] = 1.0;
                c[0] = 1.0;
                return Ok(ScalarCmSolution {
                    grid: *grid,
                    q,
                    c,
                    method,
                });
            }
            Err(Error::Singular(_)) => {
                log::warn!("repeated pole at Ω = {omega}, Γ = {gamma}; using Volterra stepping");
            }
            Err(e) => return Err(e),
        }
    }
    validate_resolution(grid, gamma, Some(std::f64::consts::PI / omega))?;
    let times = grid.times();
    let cos: Vec<f64> = times.iter().map(|&t| (omega * t).cos()).collect();
    let cos2: Vec<f64> = cos.iter().map(|v| v * v).collect();
    Ok(ScalarCmSolution {
        grid: *grid,
        q: scalar_renewal(gamma, grid, &cos2)?,
        c: scalar_renewal(gamma, grid, &cos)?,
        method: ScalarCmMethod::Volterra,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::benchmark::exact_g;

    #[test]
    fn roots_of_known_polynomials() {
        let mut r = polynomial_roots(&[1.0, -6.0, 11.0, -6.0]).unwrap();
        r.sort_by(|a, b| a.re.partial_cmp(&b.re).unwrap());
        for (z, want) in r.iter().zip([1.0, 2.0, 3.0]) {
            assert!((z - want).norm() < 1e-12);
        }
        let r = polynomial_roots(&[2.0, 0.0, 8.0]).unwrap();
        assert!(r.iter().all(|z| (z.norm() - 2.0).abs() < 1e-12 && z.re.abs() < 1e-12));
    }

    #[test]
    fn partial_fractions_of_simple_transforms() {
        // 1/((s+1)(s+2)) ↦ e^{−t} − e^{−2t}
        let f = PartialFractions::new(&[1.0], &[1.0, 3.0, 2.0], 0.0).unwrap();
        for t in [0.0, 0.3, 2.0] {
            assert!((f.eval(t) - ((-t).exp() - (-2.0 * t).exp())).abs() < 1e-14);
        }
        // s/(s²+4) ↦ cos 2t, written in u = s + 1
        let f = PartialFractions::new(&[1.0, -1.0], &[1.0, -2.0, 5.0], 1.0).unwrap();
        for t in [0.0, 0.7, 3.1] {
            assert!((f.eval(t) - (2.0 * t).cos()).abs() < 1e-13);
        }
        assert!(matches!(
            PartialFractions::new(&[1.0], &[1.0, 2.0, 1.0], 0.0),
            Err(Error::Singular(_))
        ));
    }

    #[test]
    fn single_ancilla_limit() {
        let grid = TimeGrid::new(3.0, 301).unwrap();
        let omega = 1.3;
        for method in [ScalarCmMethod::PartialFractions, ScalarCmMethod::Volterra] {
            let s = scalar_cm_solve_with(omega, 0.0, &grid, method).unwrap();
            for (i, t) in grid.times().into_iter().enumerate() {
                assert!((s.c[i] - (omega * t).cos()).abs() < 1e-12);
                assert!((s.q[i] - (omega * t).cos().powi(2)).abs() < 1e-12);
            }
        }
    }

    #[test]
    fn coherence_is_exact_amplitude() {
        for (g0, lam) in [(1.0, 10.0), (1.0, 0.5), (1.0, 0.1), (0.7, 3.0)] {
            let p = LorentzianParams::new(g0, lam).unwrap();
            let grid = TimeGrid::new(10.0 / lam, 501).unwrap();
            let s = scalar_cm_solve(&p, &grid).unwrap();
            assert_eq!(s.method, ScalarCmMethod::PartialFractions);
            for (i, t) in grid.times().into_iter().enumerate() {
                assert!((s.c[i] - exact_g(&p, t)).abs() < 1e-10, "γ₀ = {g0}, λ = {lam}, t = {t}");
            }
        }
    }

    #[test]
    fn paths_agree() {
        for (g0, lam) in [(1.0, 10.0), (1.0, 0.5), (10.0, 1.0)] {
            let p = LorentzianParams::new(g0, lam).unwrap();
            let grid = TimeGrid::with_max_dt(10.0 / lam, p.max_dt() / 16.0).unwrap();
            let pf = scalar_cm_solve(&p, &grid).unwrap();
            let vt = scalar_cm_solve_with(p.omega(), lam, &grid, ScalarCmMethod::Volterra).unwrap();
            let dq = pf.q.iter().zip(&vt.q).map(|(a, b)| (a - b).abs()).fold(0.0, f64::max);
            let dc = pf.c.iter().zip(&vt.c).map(|(a, b)| (a - b).abs()).fold(0.0, f64::max);
            assert!(dq < 1e-8 && dc < 1e-8, "γ₀ = {g0}, λ = {lam}: {dq:e} {dc:e}");
        }
    }

    #[test]
    fn repeated_pole_falls_back() {
        // Γ = 2Ω makes u² − Γu + Ω² a perfect square.
        let grid = TimeGrid::new(2.0, 401).unwrap();
        let s = scalar_cm_solve_with(1.0, 2.0, &grid, ScalarCmMethod::PartialFractions).unwrap();
        assert_eq!(s.method, ScalarCmMethod::Volterra);
        let p = LorentzianParams::new(1.0, 2.0).unwrap();
        for (i, t) in grid.times().into_iter().enumerate() {
            assert!((s.c[i] - exact_g(&p, t)).abs() < 1e-6);
        }
    }
}
