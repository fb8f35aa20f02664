use crate::error::{Error, Result};

/// Uniform time grid `t_i = i·dt`, `dt = t_max / (n_points − 1)`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TimeGrid {
    t_max: f64,
    n_points: usize,
}

impl TimeGrid {
    pub fn new(t_max: f64, n_points: usize) -> Result<Self> {
        if !(t_max > 0.0 && t_max.is_finite()) {
            return Err(Error::InvalidParameter(format!("t_max must be positive, got {t_max}")));
        }
        if n_points < 2 {
            return Err(Error::InsufficientSamples {
                needed: 2,
                got: n_points,
            });
        }
        Ok(Self { t_max, n_points })
    }

    /// Coarsest grid on `[0, t_max]` with `dt ≤ max_dt`.
    pub fn with_max_dt(t_max: f64, max_dt: f64) -> Result<Self> {
        if !(max_dt > 0.0) {
            return Err(Error::InvalidParameter(format!("max_dt must be positive, got {max_dt}")));
        }
        let intervals = (t_max / max_dt * (1.0 - 1e-12)).ceil().max(1.0) as usize;
        Self::new(t_max, intervals + 1)
    }

    pub fn t_max(&self) -> f64 {
        self.t_max
    }

    pub fn n_points(&self) -> usize {
        self.n_points
    }

    pub fn dt(&self) -> f64 {
        self.t_max / (self.n_points - 1) as f64
    }

    pub fn t(&self, i: usize) -> f64 {
        if i + 1 == self.n_points {
            self.t_max
        } else {
            i as f64 * self.dt()
        }
    }

    pub fn times(&self) -> Vec<f64> {
        (0..self.n_points).map(|i| self.t(i)).collect()
    }

    /// Grid with every interval split in `factor` pieces.
    pub fn refine(&self, factor: usize) -> Self {
        Self {
            t_max: self.t_max,
            n_points: (self.n_points - 1) * factor + 1,
        }
    }

    /// If `self` is `coarse` sampled every `stride` points (and covers at
    /// least its range), returns `stride`.
    pub fn stride_to(&self, coarse: &TimeGrid) -> Result<usize> {
        let ratio = coarse.dt() / self.dt();
        let stride = ratio.round() as usize;
        if stride == 0 || (ratio - stride as f64).abs() > 1e-9 * ratio {
            return Err(Error::InvalidParameter(format!(
                "grid with dt = {:.6e} is not an integer subsampling of dt = {:.6e}",
                coarse.dt(),
                self.dt()
            )));
        }
        if (coarse.n_points - 1) * stride > self.n_points - 1 {
            return Err(Error::InvalidParameter(format!(
                "generator covers t ≤ {} but the solver grid needs t ≤ {}",
                self.t_max, coarse.t_max
            )));
        }
        Ok(stride)
    }
}

/// Memory rate `Γ ≥ 0` of the continuum limit (`p = e^{−Γτ}`).
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct MemoryRate(f64);

impl MemoryRate {
    pub fn new(gamma: f64) -> Result<Self> {
        if !(gamma >= 0.0 && gamma.is_finite()) {
            return Err(Error::InvalidParameter(format!(
                "memory rate must be finite and nonnegative, got {gamma}"
            )));
        }
        Ok(Self(gamma))
    }

    pub fn value(&self) -> f64 {
        self.0
    }
}

/// Enforces `dt ≤ 1/(20Γ)` and, if a fastest timescale is declared,
/// `dt ≤ T_osc/40`.
pub fn validate_resolution(grid: &TimeGrid, gamma: f64, t_osc: Option<f64>) -> Result<()> {
    let dt = grid.dt();
    let slack = 1.0 + 1e-9;
    if gamma > 0.0 {
        let max_dt = 1.0 / (20.0 * gamma);
        if dt > max_dt * slack {
            return Err(Error::GridResolution {
                dt,
                max_dt,
                reason: format!("memory rate {gamma}"),
            });
        }
    }
    if let Some(t_osc) = t_osc {
        let max_dt = t_osc / 40.0;
        if dt > max_dt * slack {
            return Err(Error::GridResolution {
                dt,
                max_dt,
                reason: format!("oscillation period {t_osc}"),
            });
        }
    }
    Ok(())
}
