//! The collision-model master equation
//!
//! `Λ̇(t) = Γ ∫₀ᵗ e^{−Γt′} 𝓔(t′) Λ̇(t−t′) dt′ + e^{−Γt} 𝓔̇(t)`,   `Λ(0) = 𝓘`.
//!
//! Integrating once (or comparing Laplace transforms, both give
//! `Λ̃(s) = 𝓔̃(s+Γ) / (1 − Γ𝓔̃(s+Γ))`) yields the renewal form
//!
//! `Λ(t) = e^{−Γt} 𝓔(t) + Γ ∫₀ᵗ e^{−Γs} 𝓔(s) Λ(t−s) ds`,
//!
//! which needs no derivative of the sampled generator. Both solvers below
//! discretise this form with the same quadrature: Gregory weights rescaled at
//! every step so that `e^{−Γt_n} + s_n h Σ ω_m e^{−Γt_m} = 1` exactly. With
//! this choice each `Λ_n` is a convex-type combination of products of CPT
//! maps, so trace preservation and complete positivity hold to rounding, and
//! `𝓔(t) = e^{𝓛t}` is reproduced exactly.

use crate::channel::Superoperator;
use crate::error::{Error, Result};
use crate::kernel::grid::{validate_resolution, MemoryRate, TimeGrid};
use crate::kernel::quadrature::gregory_weight;
use crate::kernel::trajectory::{GeneratorMapTrajectory, MapTrajectory};
use crate::kernel::volterra::{solve_stepping, ConvolutionKernel, ConvolutionOperator, KernelValue};
use crate::linalg::CMatrix;

/// Hard cap on the number of series terms.
pub const SERIES_MAX_TERMS: usize = 200;
/// Kernel samples with `Γt > KERNEL_CUTOFF` (weight below `1e-20`) are dropped.
pub const KERNEL_CUTOFF: f64 = 46.0;

/// Number of kernel samples kept: all `m` with `Γt_m ≤ KERNEL_CUTOFF`.
pub(crate) fn kernel_support(gamma: f64, grid: &TimeGrid) -> usize {
    if gamma == 0.0 {
        return grid.n_points();
    }
    let m = (KERNEL_CUTOFF / (gamma * grid.dt())).floor() as usize + 1;
    m.min(grid.n_points())
}

/// Per-step scale `s_n = (1 − e^{−Γt_n}) / (h Σ_{m ≤ min(n, M)} ω^{(n)}_m e^{−Γt_m})`,
/// the discrete counterpart of `Γ` that makes the trace weights sum to one.
pub(crate) fn renewal_scale(gamma: f64, grid: &TimeGrid, support: usize) -> Vec<f64> {
    let h = grid.dt();
    let decay: Vec<f64> = (0..grid.n_points()).map(|i| (-gamma * grid.t(i)).exp()).collect();
    (0..grid.n_points())
        .map(|n| {
            if n == 0 || gamma == 0.0 {
                return 0.0;
            }
            let top = n.min(support - 1);
            let sum: f64 = (0..=top).map(|m| gregory_weight(n, m) * decay[m]).sum();
            -(-gamma * grid.t(n)).exp_m1() / (h * sum)
        })
        .collect()
}

/// Kernel samples `A_m = e^{−Γt_m} E_m`.
pub(crate) fn damped<T: KernelValue>(gamma: f64, grid: &TimeGrid, e: &[T]) -> Vec<T> {
    e.iter()
        .enumerate()
        .map(|(m, v)| {
            let mut out = v.zero_like();
            out.add_scaled((-gamma * grid.t(m)).exp(), v);
            out
        })
        .collect()
}

/// Solves the renewal form for generic scalar or matrix samples of `E`.
pub(crate) fn renewal_stepping<T: KernelValue>(gamma: f64, grid: &TimeGrid, e: &[T]) -> Result<Vec<T>> {
    if gamma == 0.0 {
        return Ok(e.to_vec());
    }
    let a = damped(gamma, grid, e);
    let support = kernel_support(gamma, grid);
    let scale = renewal_scale(gamma, grid, support);
    solve_stepping(
        &a,
        &ConvolutionKernel {
            samples: &a,
            h: grid.dt(),
            support,
        },
        &scale,
    )
}

fn checked_samples(gen: &GeneratorMapTrajectory, gamma: f64, grid: &TimeGrid) -> Result<Vec<Superoperator>> {
    validate_resolution(grid, gamma, gen.timescale())?;
    gen.resample(grid)
}

/// Volterra time stepping of the master equation.
pub fn solve_cm_me(gen: &GeneratorMapTrajectory, gamma: MemoryRate, grid: &TimeGrid) -> Result<MapTrajectory> {
    let g = gamma.value();
    let samples = checked_samples(gen, g, grid)?;
    let dim = gen.dim();
    let mats: Vec<CMatrix> = samples.into_iter().map(Superoperator::into_matrix).collect();
    let lambda = renewal_stepping(g, grid, &mats)?;
    to_trajectory(*grid, dim, lambda)
}

fn to_trajectory(grid: TimeGrid, dim: usize, mats: Vec<CMatrix>) -> Result<MapTrajectory> {
    let maps = mats
        .into_iter()
        .map(|m| Superoperator::from_matrix(dim, m))
        .collect::<Result<Vec<_>>>()?;
    MapTrajectory::new(grid, maps)
}

/// Output of [`lambda_series`].
#[derive(Debug, Clone)]
pub struct SeriesSolution {
    pub trajectory: MapTrajectory,
    /// Number of series terms `K` summed.
    pub terms: usize,
}

/// Smallest `K ≥ 1` with `x^K / K! < tol`, capped at [`SERIES_MAX_TERMS`].
pub fn truncation_order(gamma_t_max: f64, tol: f64) -> Result<usize> {
    if gamma_t_max == 0.0 {
        return Ok(1);
    }
    let ln_x = gamma_t_max.ln();
    let ln_tol = tol.ln();
    let mut ln_term = 0.0;
    for k in 1..=SERIES_MAX_TERMS {
        ln_term += ln_x - (k as f64).ln();
        if ln_term < ln_tol {
            return Ok(k);
        }
    }
    Err(Error::TruncationCap {
        cap: SERIES_MAX_TERMS,
    })
}

/// `e^{−Γt} Σ_{k=1}^{K} (Γt)^{k−1}/(k−1)!`, the trace weight of the first `K`
/// series terms; it tends to one as `K` grows.
pub fn trace_weight_sum(gamma: f64, t: f64, terms: usize) -> f64 {
    let x = gamma * t;
    let mut term = (-x).exp();
    let mut sum = 0.0;
    for k in 1..=terms {
        sum += term;
        term *= x / k as f64;
    }
    sum
}

/// Convolution series `Λ = Σ_{k≥1} Γ^{k−1} (e^{−Γ·}𝓔)^{∗k}`, i.e.
/// `Λ(t) = e^{−Γt} Σ_k Γ^{k−1} C_k(t)` with `C₁ = 𝓔`, `C_k = C_{k−1} ∗ 𝓔`.
/// Every term is a positive combination of products of CPT maps.
pub fn lambda_series(
    gen: &GeneratorMapTrajectory,
    gamma: MemoryRate,
    grid: &TimeGrid,
    tol: f64,
) -> Result<SeriesSolution> {
    if !(tol > 0.0) {
        return Err(Error::InvalidParameter(format!("series tolerance must be positive, got {tol}")));
    }
    let g = gamma.value();
    let samples = checked_samples(gen, g, grid)?;
    let dim = gen.dim();
    let terms = truncation_order(g * grid.t_max(), tol)?;
    let mats: Vec<CMatrix> = samples.into_iter().map(Superoperator::into_matrix).collect();
    let a = damped(g, grid, &mats);
    let scale = renewal_scale(g, grid, grid.n_points());
    let mut sum = a.clone();
    if terms > 1 {
        let op = ConvolutionOperator::new(&a, grid.dt(), &scale);
        let mut term = a.clone();
        for _ in 1..terms {
            term = op.apply(&term);
            for (s, t) in sum.iter_mut().zip(&term) {
                *s += t;
            }
        }
    }
    // Λ(0) is the identity exactly; the FFT leaves rounding noise elsewhere.
    sum[0] = mats[0].clone();
    Ok(SeriesSolution {
        trajectory: to_trajectory(*grid, dim, sum)?,
        terms,
    })
}

/// Scalar renewal solve used by the sector-wise fast paths.
pub(crate) fn scalar_renewal(gamma: f64, grid: &TimeGrid, e: &[f64]) -> Result<Vec<f64>> {
    renewal_stepping(gamma, grid, e)
}
