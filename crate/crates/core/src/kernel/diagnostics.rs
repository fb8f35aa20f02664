//! Size of the two terms on the right-hand side of the master equation along
//! a solved trajectory, and the residual of the differential form.

use crate::error::{Error, Result};
use crate::kernel::grid::MemoryRate;
use crate::kernel::quadrature::{derivative, gregory_weight};
use crate::kernel::trajectory::{GeneratorMapTrajectory, MapTrajectory};
use crate::kernel::volterra::KernelValue;
use crate::linalg::{self, CMatrix};

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct KernelTermNorms {
    pub t: f64,
    /// `‖Γ ∫₀ᵗ e^{−Γt′} 𝓔(t′) Λ̇(t−t′) dt′‖₂`.
    pub memory: f64,
    /// `‖e^{−Γt} 𝓔̇(t)‖₂`.
    pub inhomogeneous: f64,
    /// `‖Λ̇(t) − memory term − inhomogeneous term‖₂`.
    pub residual: f64,
}

/// Evaluates both terms with fourth-order differences for `Λ̇`, `𝓔̇` and
/// Gregory quadrature for the memory integral.
pub fn kernel_term_norms(
    gen: &GeneratorMapTrajectory,
    gamma: MemoryRate,
    traj: &MapTrajectory,
) -> Result<Vec<KernelTermNorms>> {
    let grid = traj.grid();
    if grid.n_points() < 5 {
        return Err(Error::InsufficientSamples {
            needed: 5,
            got: grid.n_points(),
        });
    }
    let g = gamma.value();
    let h = grid.dt();
    let e: Vec<CMatrix> = gen.resample(grid)?.into_iter().map(|m| m.into_matrix()).collect();
    let lam: Vec<CMatrix> = traj.maps().iter().map(|m| m.matrix().clone()).collect();
    let de = derivative(&e, h);
    let dl = derivative(&lam, h);
    let decay: Vec<f64> = grid.times().iter().map(|t| (-g * t).exp()).collect();
    Ok((0..grid.n_points())
        .map(|n| {
            let mut memory = e[0].zero_like();
            for m in 0..=n {
                memory.add_scaled_product(g * h * gregory_weight(n, m) * decay[m], &e[m], &dl[n - m]);
            }
            let mut inhom = de[n].zero_like();
            inhom.add_scaled(decay[n], &de[n]);
            let residual = &dl[n] - &memory - &inhom;
            KernelTermNorms {
                t: grid.t(n),
                memory: linalg::spectral_norm(&memory),
                inhomogeneous: linalg::spectral_norm(&inhom),
                residual: linalg::spectral_norm(&residual),
            }
        })
        .collect())
}
