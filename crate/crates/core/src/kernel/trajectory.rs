use crate::channel::Superoperator;
use crate::error::{Error, Result};
use crate::kernel::grid::TimeGrid;
use crate::linalg::{self, CMatrix, CVector};
use crate::state::UnitaryOp;

/// Tolerance on `E(0) = 𝓘` and `Λ(0) = 𝓘`.
pub const INITIAL_MAP_TOL: f64 = 1e-12;
/// CPT tolerance for generator samples.
pub const GENERATOR_CPT_TOL: f64 = 1e-9;

/// Closed-form description of a generator, enabling scalar fast paths.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum AnalyticTag {
    /// `E(t) = A_{cos Ωt}`, the amplitude-damping family with cosine amplitude.
    AdcCosine { omega: f64 },
}

/// Samples `E(t_i)` of a family of channels with `E(0) = 𝓘`.
#[derive(Debug, Clone)]
pub struct GeneratorMapTrajectory {
    grid: TimeGrid,
    maps: Vec<Superoperator>,
    tag: Option<AnalyticTag>,
    timescale: Option<f64>,
}

impl GeneratorMapTrajectory {
    pub fn new(grid: TimeGrid, maps: Vec<Superoperator>) -> Result<Self> {
        if maps.len() != grid.n_points() {
            return Err(Error::DimensionMismatch(format!(
                "{} generator samples for a grid of {} points",
                maps.len(),
                grid.n_points()
            )));
        }
        let dim = maps[0].dim();
        if maps.iter().any(|m| m.dim() != dim) {
            return Err(Error::DimensionMismatch("generator samples differ in dimension".into()));
        }
        let deviation = maps[0].max_abs_diff(&Superoperator::identity(dim));
        if deviation > INITIAL_MAP_TOL {
            return Err(Error::NonIdentityInitialMap { deviation });
        }
        for m in &maps {
            let report = m.cpt_check(GENERATOR_CPT_TOL);
            if report.trace_dev > GENERATOR_CPT_TOL {
                return Err(Error::NotTracePreserving {
                    deviation: report.trace_dev,
                });
            }
            if report.min_choi_eig < -GENERATOR_CPT_TOL {
                return Err(Error::NotCompletelyPositive {
                    eigenvalue: report.min_choi_eig,
                });
            }
        }
        Ok(Self {
            grid,
            maps,
            tag: None,
            timescale: None,
        })
    }

    pub fn from_fn(grid: TimeGrid, f: impl Fn(f64) -> Superoperator) -> Result<Self> {
        let maps = grid.times().into_iter().map(f).collect();
        Self::new(grid, maps)
    }

    /// `E(t) = e^{𝓛t}`.
    pub fn semigroup(grid: TimeGrid, l: &Superoperator) -> Result<Self> {
        Self::from_fn(grid, |t| l.scale(t).exp())
    }

    /// `E(t)[ρ] = Tr_A{e^{−iHt}(ρ ⊗ |a⟩⟨a|)e^{iHt}}` for a Hamiltonian on `S ⊗ A`;
    /// the declared timescale is `2π` over the spectral width of `H`.
    pub fn dilation(grid: TimeGrid, h: &CMatrix, dim_s: usize, ancilla: &CVector) -> Result<Self> {
        let d_a = ancilla.len();
        if h.nrows() != dim_s * d_a {
            return Err(Error::DimensionMismatch(format!(
                "Hamiltonian of size {} on {dim_s}·{d_a}",
                h.nrows()
            )));
        }
        let eig = linalg::hermitian_eigenvalues(h);
        let width = eig[eig.len() - 1] - eig[0];
        let maps = grid
            .times()
            .into_iter()
            .map(|t| {
                let u = UnitaryOp::from_hamiltonian(h, t)?;
                Ok(Superoperator::stinespring(u.matrix(), dim_s, ancilla))
            })
            .collect::<Result<Vec<_>>>()?;
        let mut out = Self::new(grid, maps)?;
        if width > 0.0 {
            out.timescale = Some(std::f64::consts::TAU / width);
        }
        Ok(out)
    }

    pub fn with_tag(mut self, tag: AnalyticTag) -> Self {
        self.tag = Some(tag);
        self
    }

    /// Declares the fastest oscillation period of the family.
    pub fn with_timescale(mut self, t_osc: f64) -> Self {
        self.timescale = Some(t_osc);
        self
    }

    pub fn grid(&self) -> &TimeGrid {
        &self.grid
    }

    pub fn maps(&self) -> &[Superoperator] {
        &self.maps
    }

    pub fn tag(&self) -> Option<AnalyticTag> {
        self.tag
    }

    pub fn timescale(&self) -> Option<f64> {
        self.timescale
    }

    pub fn dim(&self) -> usize {
        self.maps[0].dim()
    }

    /// Samples on `grid`, which must be an integer subsampling of this trajectory's grid.
    pub fn resample(&self, grid: &TimeGrid) -> Result<Vec<Superoperator>> {
        let stride = self.grid.stride_to(grid)?;
        Ok((0..grid.n_points()).map(|i| self.maps[i * stride].clone()).collect())
    }
}

/// Samples `Λ(t_i)` of a dynamical map.
#[derive(Debug, Clone)]
pub struct MapTrajectory {
    grid: TimeGrid,
    maps: Vec<Superoperator>,
}

impl MapTrajectory {
    pub fn new(grid: TimeGrid, maps: Vec<Superoperator>) -> Result<Self> {
        if maps.len() != grid.n_points() {
            return Err(Error::DimensionMismatch(format!(
                "{} map samples for a grid of {} points",
                maps.len(),
                grid.n_points()
            )));
        }
        let dim = maps[0].dim();
        let deviation = maps[0].max_abs_diff(&Superoperator::identity(dim));
        if deviation > INITIAL_MAP_TOL {
            return Err(Error::NonIdentityInitialMap { deviation });
        }
        Ok(Self { grid, maps })
    }

    pub fn identity(grid: TimeGrid, dim: usize) -> Self {
        Self {
            grid,
            maps: vec![Superoperator::identity(dim); grid.n_points()],
        }
    }

    pub fn grid(&self) -> &TimeGrid {
        &self.grid
    }

    pub fn maps(&self) -> &[Superoperator] {
        &self.maps
    }

    pub fn dim(&self) -> usize {
        self.maps[0].dim()
    }

    /// `Λ(t_i)[ρ₀]` for every grid point.
    pub fn evolve(&self, rho0: &CMatrix) -> Vec<CMatrix> {
        self.maps.iter().map(|m| m.apply(rho0)).collect()
    }

    /// Largest map-norm distance to another trajectory on the same grid.
    pub fn max_distance(&self, other: &MapTrajectory) -> f64 {
        self.maps
            .iter()
            .zip(&other.maps)
            .map(|(a, b)| a.distance(b))
            .fold(0.0, f64::max)
    }
}
