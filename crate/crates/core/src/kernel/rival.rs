//! Memory-kernel master equations used for comparison:
//!
//! * phenomenological: `ρ̇(t) = 𝓛 ∫₀ᵗ k(t′) ρ(t−t′) dt′`;
//! * Shabani–Lidar:    `ρ̇(t) = 𝓛 ∫₀ᵗ k(t′) e^{𝓛t′} ρ(t−t′) dt′`.
//!
//! Integrating in time turns each into a Volterra equation of the second kind,
//! `Λ(t) = 𝓘 + 𝓛 ∫₀ᵗ K(s) Λ(t−s) ds`, with `K(s) = ∫₀ˢ k` (respectively
//! `∫₀ˢ k(u) e^{𝓛u} du`). `K(0) = 0`, so the stepping is explicit. Neither
//! equation is guaranteed to produce CPT maps.

use crate::channel::Superoperator;
use crate::error::{Error, Result};
use crate::kernel::grid::TimeGrid;
use crate::kernel::quadrature::cumulative_integral;
use crate::kernel::trajectory::MapTrajectory;
use crate::kernel::volterra::{solve_stepping, ConvolutionKernel};
use crate::linalg::{self, real, CMatrix};

/// Largest admissible `dt·‖𝓛‖₂` for the rival solvers.
pub const MAX_STEP_NORM: f64 = 0.1;

#[derive(Debug, Clone, PartialEq)]
enum KernelShape {
    Sampled(Vec<f64>),
    /// All mass in the first grid cell.
    DeltaLike,
}

/// A real memory kernel `k(t)` sampled on a time grid.
#[derive(Debug, Clone, PartialEq)]
pub struct MemoryKernel {
    grid: TimeGrid,
    shape: KernelShape,
}

impl MemoryKernel {
    pub fn sampled(grid: TimeGrid, samples: Vec<f64>) -> Result<Self> {
        if samples.len() != grid.n_points() {
            return Err(Error::DimensionMismatch(format!(
                "{} kernel samples for a grid of {} points",
                samples.len(),
                grid.n_points()
            )));
        }
        if samples.iter().any(|v| !v.is_finite()) {
            return Err(Error::InvalidParameter("kernel samples must be finite".into()));
        }
        Ok(Self {
            grid,
            shape: KernelShape::Sampled(samples),
        })
    }

    /// `k(t) = λ e^{−λt}`.
    pub fn exponential(lambda: f64, grid: TimeGrid) -> Result<Self> {
        if !(lambda > 0.0) {
            return Err(Error::InvalidParameter(format!("kernel rate must be positive, got {lambda}")));
        }
        Self::sampled(grid, grid.times().iter().map(|t| lambda * (-lambda * t).exp()).collect())
    }

    /// Unit mass concentrated in the first grid cell: `K(t_m) = 1` for `m ≥ 1`.
    pub fn delta_like(grid: TimeGrid) -> Self {
        Self {
            grid,
            shape: KernelShape::DeltaLike,
        }
    }

    pub fn grid(&self) -> &TimeGrid {
        &self.grid
    }

    /// Kernel samples (for the δ-like kernel: `1/h` on the first point).
    pub fn samples(&self) -> Vec<f64> {
        match &self.shape {
            KernelShape::Sampled(s) => s.clone(),
            KernelShape::DeltaLike => {
                let mut s = vec![0.0; self.grid.n_points()];
                s[0] = 1.0 / self.grid.dt();
                s
            }
        }
    }

    /// `K(t_m) = ∫₀^{t_m} k`.
    pub fn cumulative(&self) -> Vec<f64> {
        match &self.shape {
            KernelShape::Sampled(s) => cumulative_integral(s, self.grid.dt()),
            KernelShape::DeltaLike => (0..self.grid.n_points()).map(|m| if m == 0 { 0.0 } else { 1.0 }).collect(),
        }
    }

    /// `∫₀^{t_m} k(u) e^{𝓛u} du`.
    fn cumulative_propagated(&self, l: &Superoperator) -> Vec<CMatrix> {
        let n = self.grid.n_points();
        match &self.shape {
            KernelShape::Sampled(s) => {
                let h = self.grid.dt();
                let step = linalg::expm(&(l.matrix() * real(h)));
                let mut prop = linalg::identity(l.matrix().nrows());
                let mut samples = Vec::with_capacity(n);
                for (m, k) in s.iter().enumerate() {
                    if m > 0 {
                        prop = &step * &prop;
                    }
                    samples.push(&prop * real(*k));
                }
                cumulative_integral(&samples, h)
            }
            KernelShape::DeltaLike => {
                let d = l.matrix().nrows();
                (0..n)
                    .map(|m| if m == 0 { CMatrix::zeros(d, d) } else { linalg::identity(d) })
                    .collect()
            }
        }
    }
}

fn check_inputs(l: &Superoperator, kernel: &MemoryKernel, grid: &TimeGrid) -> Result<()> {
    if kernel.grid() != grid {
        return Err(Error::DimensionMismatch(
            "memory kernel must be sampled on the solver grid".into(),
        ));
    }
    let norm = linalg::spectral_norm(l.matrix());
    let max_dt = MAX_STEP_NORM / norm;
    if norm > 0.0 && grid.dt() > max_dt * (1.0 + 1e-9) {
        return Err(Error::GridResolution {
            dt: grid.dt(),
            max_dt,
            reason: format!("generator norm {norm:.4}"),
        });
    }
    Ok(())
}

fn solve_second_kind(l: &Superoperator, cumulative: Vec<CMatrix>, grid: &TimeGrid) -> Result<MapTrajectory> {
    let dim = l.dim();
    let a: Vec<CMatrix> = cumulative.iter().map(|k| l.matrix() * k).collect();
    let forcing = vec![linalg::identity(dim * dim); grid.n_points()];
    let x = solve_stepping(
        &forcing,
        &ConvolutionKernel {
            samples: &a,
            h: grid.dt(),
            support: grid.n_points(),
        },
        &vec![1.0; grid.n_points()],
    )?;
    let maps = x
        .into_iter()
        .map(|m| Superoperator::from_matrix(dim, m))
        .collect::<Result<Vec<_>>>()?;
    MapTrajectory::new(*grid, maps)
}

/// Phenomenological memory-kernel master equation.
pub fn solve_phenomenological(l: &Superoperator, kernel: &MemoryKernel, grid: &TimeGrid) -> Result<MapTrajectory> {
    check_inputs(l, kernel, grid)?;
    let id = linalg::identity(l.dim() * l.dim());
    let cumulative = kernel.cumulative().into_iter().map(|k| &id * real(k)).collect();
    solve_second_kind(l, cumulative, grid)
}

/// Shabani–Lidar master equation.
pub fn solve_shabani_lidar(l: &Superoperator, kernel: &MemoryKernel, grid: &TimeGrid) -> Result<MapTrajectory> {
    check_inputs(l, kernel, grid)?;
    let cumulative = kernel.cumulative_propagated(l);
    solve_second_kind(l, cumulative, grid)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::linalg::matrix_unit;

    fn decay(gamma0: f64) -> Superoperator {
        Superoperator::lindbladian(&CMatrix::zeros(2, 2), &[(gamma0, matrix_unit(2, 0, 1))])
    }

    #[test]
    fn delta_kernel_approaches_semigroup() {
        let l = decay(1.0);
        let mut errors = Vec::new();
        for n in [101, 201, 401] {
            let grid = TimeGrid::new(2.0, n).unwrap();
            let kernel = MemoryKernel::delta_like(grid);
            let exact = |i: usize| l.scale(grid.t(i)).exp();
            let ph = solve_phenomenological(&l, &kernel, &grid).unwrap();
            let sl = solve_shabani_lidar(&l, &kernel, &grid).unwrap();
            let err = (0..n)
                .map(|i| ph.maps()[i].distance(&exact(i)).max(sl.maps()[i].distance(&exact(i))))
                .fold(0.0, f64::max);
            errors.push(err);
        }
        assert!(errors[2] < 0.01, "{errors:?}");
        assert!(errors[0] > errors[1] && errors[1] > errors[2], "{errors:?}");
    }

    #[test]
    fn kernel_constructors() {
        let grid = TimeGrid::new(1.0, 11).unwrap();
        assert!(MemoryKernel::sampled(grid, vec![1.0; 10]).is_err());
        assert!(MemoryKernel::exponential(-1.0, grid).is_err());
        let k = MemoryKernel::exponential(2.0, grid).unwrap();
        for (t, c) in grid.times().iter().zip(k.cumulative()) {
            assert!((c - (1.0 - (-2.0 * t).exp())).abs() < 1e-5);
        }
        assert_eq!(MemoryKernel::delta_like(grid).cumulative()[3], 1.0);
    }

    #[test]
    fn coarse_grid_rejected() {
        let l = decay(10.0);
        let grid = TimeGrid::new(1.0, 11).unwrap();
        let k = MemoryKernel::exponential(1.0, grid).unwrap();
        assert!(matches!(solve_phenomenological(&l, &k, &grid), Err(Error::GridResolution { .. })));
        let other = TimeGrid::new(1.0, 1001).unwrap();
        assert!(solve_shabani_lidar(&l, &k, &other).is_err());
    }
}
