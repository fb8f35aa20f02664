use std::fmt;
use std::str::FromStr;
use std::sync::Mutex;

use crate::benchmark::witness::{backflow_witness, canonical_pairs, BackflowInterval};
use crate::benchmark::{adc_map, cm_generator, LorentzianParams};
use crate::error::{Error, Result};
use crate::kernel::{
    cpt_certify, solve_cm_me, solve_phenomenological, solve_shabani_lidar, CertificationReport, MapTrajectory,
    MemoryKernel, TimeGrid,
};
use crate::linalg::{real, CMatrix};
use crate::state::DensityMatrix;

/// CPT tolerance used for the per-model reports.
pub const BENCHMARK_CPT_TOL: f64 = 1e-8;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Model {
    Cm,
    Exact,
    Phenomenological,
    ShabaniLidar,
}

impl Model {
    pub const ALL: [Model; 4] = [Model::Cm, Model::Exact, Model::Phenomenological, Model::ShabaniLidar];

    pub fn name(&self) -> &'static str {
        match self {
            Model::Cm => "cm",
            Model::Exact => "exact",
            Model::Phenomenological => "phenomenological",
            Model::ShabaniLidar => "shabani_lidar",
        }
    }
}

impl fmt::Display for Model {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for Model {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        Model::ALL
            .into_iter()
            .find(|m| m.name() == s)
            .ok_or_else(|| Error::UnknownModel(s.to_string()))
    }
}

/// Output of one model.
#[derive(Debug, Clone)]
pub struct ModelSeries {
    pub model: Model,
    pub trajectory: MapTrajectory,
    /// `ρ₁₁(t) / ρ₁₁(0)`.
    pub population_norm: Vec<f64>,
    /// `|ρ₀₁(t)| / |ρ₀₁(0)|`.
    pub coherence_abs_norm: Vec<f64>,
    pub certification: CertificationReport,
    pub backflow: Vec<BackflowInterval>,
}

#[derive(Debug, Clone)]
pub struct BenchmarkResult {
    pub params: LorentzianParams,
    pub grid: TimeGrid,
    pub initial_state: CMatrix,
    /// Sorted by model name.
    pub series: Vec<ModelSeries>,
}

impl BenchmarkResult {
    pub fn get(&self, model: Model) -> Option<&ModelSeries> {
        self.series.iter().find(|s| s.model == model)
    }
}

fn solve_model(model: Model, params: &LorentzianParams, grid: &TimeGrid) -> Result<MapTrajectory> {
    match model {
        Model::Exact => {
            let maps = grid
                .times()
                .into_iter()
                .map(|t| adc_map(real(super::exact_g(params, t))))
                .collect::<Result<Vec<_>>>()?;
            MapTrajectory::new(*grid, maps)
        }
        Model::Cm => solve_cm_me(&cm_generator(params, *grid)?, params.memory_rate(), grid),
        Model::Phenomenological => {
            let kernel = MemoryKernel::exponential(params.lambda(), *grid)?;
            solve_phenomenological(&params.lindbladian(), &kernel, grid)
        }
        Model::ShabaniLidar => {
            let kernel = MemoryKernel::exponential(params.lambda(), *grid)?;
            solve_shabani_lidar(&params.lindbladian(), &kernel, grid)
        }
    }
}

fn model_series(model: Model, params: &LorentzianParams, grid: &TimeGrid, rho0: &CMatrix) -> Result<ModelSeries> {
    let trajectory = solve_model(model, params, grid)?;
    let states = trajectory.evolve(rho0);
    let p0 = rho0[(1, 1)].re;
    let c0 = rho0[(0, 1)].norm();
    Ok(ModelSeries {
        model,
        population_norm: states.iter().map(|r| r[(1, 1)].re / p0).collect(),
        coherence_abs_norm: states.iter().map(|r| r[(0, 1)].norm() / c0).collect(),
        certification: cpt_certify(&trajectory, BENCHMARK_CPT_TOL),
        backflow: backflow_witness(&trajectory, &canonical_pairs())?,
        trajectory,
    })
}

/// Runs the requested models from the default initial state on all available cores.
pub fn run_benchmark(params: &LorentzianParams, grid: &TimeGrid, models: &[Model]) -> Result<BenchmarkResult> {
    let threads = std::thread::available_parallelism().map_or(1, |n| n.get());
    run_benchmark_with(params, grid, models, &super::default_initial_state(), threads)
}

/// Runs the requested models from `rho0`, which needs nonzero excited
/// population and coherence, using at most `threads` workers.
pub fn run_benchmark_with(
    params: &LorentzianParams,
    grid: &TimeGrid,
    models: &[Model],
    rho0: &CMatrix,
    threads: usize,
) -> Result<BenchmarkResult> {
    if models.is_empty() {
        return Err(Error::InvalidParameter("no models requested".into()));
    }
    let mut models = models.to_vec();
    models.sort();
    models.dedup();
    let rho0 = DensityMatrix::new(rho0.clone())?.into_matrix();
    if rho0.nrows() != 2 {
        return Err(Error::DimensionMismatch("benchmark initial state must be a qubit".into()));
    }
    if rho0[(1, 1)].re <= 1e-12 || rho0[(0, 1)].norm() <= 1e-12 {
        return Err(Error::InvalidParameter(
            "initial state needs nonzero excited population and coherence".into(),
        ));
    }
    let max_dt = params.max_dt();
    if grid.dt() > max_dt * (1.0 + 1e-9) {
        return Err(Error::GridResolution {
            dt: grid.dt(),
            max_dt,
            reason: format!("fastest rate of γ₀ = {}, λ = {}, Ω = {:.6}", params.gamma0(), params.lambda(), params.omega()),
        });
    }

    let next = Mutex::new(0usize);
    let results: Mutex<Vec<(usize, Result<ModelSeries>)>> = Mutex::new(Vec::new());
    let workers = threads.clamp(1, models.len());
    std::thread::scope(|scope| {
        for _ in 0..workers {
            scope.spawn(|| loop {
                let idx = {
                    let mut n = next.lock().expect("work counter");
                    let i = *n;
                    *n += 1;
                    i
                };
                let Some(&model) = models.get(idx) else {
                    break;
                };
                let out = model_series(model, params, grid, &rho0);
                results.lock().expect("result buffer").push((idx, out));
            });
        }
    });
    let mut results = results.into_inner().expect("result buffer");
    results.sort_by_key(|(i, _)| *i);
    let series = results.into_iter().map(|(_, r)| r).collect::<Result<Vec<_>>>()?;
    Ok(BenchmarkResult {
        params: *params,
        grid: *grid,
        initial_state: rho0,
        series,
    })
}
