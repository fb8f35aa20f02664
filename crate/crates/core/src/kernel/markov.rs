use crate::channel::Superoperator;
use crate::error::{Error, Result};
use crate::kernel::grid::TimeGrid;
use crate::kernel::trajectory::{GeneratorMapTrajectory, MapTrajectory};
use crate::linalg::real;

/// `𝓕 = 𝓔̇(0)` by the one-sided fourth-order difference
/// `(−25E₀ + 48E₁ − 36E₂ + 16E₃ − 3E₄) / (12h)`.
pub fn markov_limit_generator(gen: &GeneratorMapTrajectory) -> Result<Superoperator> {
    let maps = gen.maps();
    if maps.len() < 5 {
        return Err(Error::InsufficientSamples {
            needed: 5,
            got: maps.len(),
        });
    }
    let h = gen.grid().dt();
    let coeffs = [-25.0, 48.0, -36.0, 16.0, -3.0];
    let mat = coeffs
        .iter()
        .zip(maps)
        .fold(maps[0].matrix().map(|_| real(0.0)), |acc, (w, m)| {
            acc + m.matrix() * real(w / (12.0 * h))
        });
    Superoperator::from_matrix(gen.dim(), mat)
}

/// `Λ(t_i) = e^{𝓕t_i}`.
pub fn lindblad_propagate(f: &Superoperator, grid: &TimeGrid) -> MapTrajectory {
    let maps = grid.times().into_iter().map(|t| f.scale(t).exp()).collect();
    MapTrajectory::new(*grid, maps).expect("e^{0} is the identity")
}
