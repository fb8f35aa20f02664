//! Density matrices, unitary operators, partial traces and the trace distance.

use crate::error::{Error, Result};
use crate::linalg::{self, CMatrix, CVector, C64, ONE, ZERO};

/// Hermiticity tolerance for validated states (max-norm).
pub const HERMITIAN_TOL: f64 = 1e-12;
/// Unit-trace tolerance for validated states.
pub const TRACE_TOL: f64 = 1e-12;
/// Smallest admissible eigenvalue of a numerically positive matrix.
pub const PSD_TOL: f64 = 1e-10;
/// Tolerance on `U†U = 1`.
pub const UNITARY_TOL: f64 = 1e-12;

/// Tolerances used when validating a [`DensityMatrix`].
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct StateTolerance {
    pub hermitian: f64,
    pub trace: f64,
    pub psd: f64,
}

impl StateTolerance {
    pub const STRICT: Self = Self {
        hermitian: HERMITIAN_TOL,
        trace: TRACE_TOL,
        psd: PSD_TOL,
    };

    /// Relaxed tolerance for states produced by long chains of floating-point
    /// operations (joint chain states, propagated states).
    pub const PROPAGATED: Self = Self {
        hermitian: 1e-10,
        trace: 1e-10,
        psd: PSD_TOL,
    };
}

/// A Hermitian, unit-trace, positive-semidefinite matrix.
#[derive(Debug, Clone, PartialEq)]
pub struct DensityMatrix {
    mat: CMatrix,
}

impl DensityMatrix {
    pub fn new(mat: CMatrix) -> Result<Self> {
        Self::with_tolerance(mat, StateTolerance::STRICT)
    }

    pub fn with_tolerance(mat: CMatrix, tol: StateTolerance) -> Result<Self> {
        if mat.nrows() != mat.ncols() || mat.nrows() == 0 {
            return Err(Error::DimensionMismatch(format!(
                "density matrix must be square and nonempty, got {}x{}",
                mat.nrows(),
                mat.ncols()
            )));
        }
        let herm = linalg::hermiticity_deviation(&mat);
        if herm > tol.hermitian {
            return Err(Error::NotHermitian { deviation: herm });
        }
        let tr_dev = (linalg::trace(&mat) - ONE).norm();
        if tr_dev > tol.trace {
            return Err(Error::TraceNotOne { deviation: tr_dev });
        }
        let min_eig = linalg::hermitian_eigenvalues(&mat)[0];
        if min_eig < -tol.psd {
            return Err(Error::NotPositive {
                min_eigenvalue: min_eig,
            });
        }
        Ok(Self { mat })
    }

    pub(crate) fn from_matrix_unchecked(mat: CMatrix) -> Self {
        Self { mat }
    }

    /// Pure state `|ψ⟩⟨ψ|`; `ψ` must be normalised within 1e-12.
    pub fn pure(psi: &CVector) -> Result<Self> {
        let norm = psi.norm();
        if (norm - 1.0).abs() > 1e-12 {
            return Err(Error::InvalidParameter(format!(
                "state vector norm is {norm}, expected 1"
            )));
        }
        Self::new(linalg::outer(psi))
    }

    /// Computational basis projector `|k⟩⟨k|`.
    pub fn basis(dim: usize, k: usize) -> Self {
        Self {
            mat: linalg::matrix_unit(dim, k, k),
        }
    }

    pub fn maximally_mixed(dim: usize) -> Self {
        Self {
            mat: linalg::identity(dim) * linalg::real(1.0 / dim as f64),
        }
    }

    pub fn dim(&self) -> usize {
        self.mat.nrows()
    }

    pub fn matrix(&self) -> &CMatrix {
        &self.mat
    }

    pub fn into_matrix(self) -> CMatrix {
        self.mat
    }

    pub fn min_eigenvalue(&self) -> f64 {
        linalg::hermitian_eigenvalues(&self.mat)[0]
    }

    pub fn trace(&self) -> C64 {
        linalg::trace(&self.mat)
    }

    pub fn tensor(&self, other: &DensityMatrix) -> DensityMatrix {
        Self {
            mat: linalg::tensor(&self.mat, &other.mat),
        }
    }
}

/// A unitary operator, validated on construction.
#[derive(Debug, Clone, PartialEq)]
pub struct UnitaryOp {
    mat: CMatrix,
}

impl UnitaryOp {
    pub fn new(mat: CMatrix) -> Result<Self> {
        if mat.nrows() != mat.ncols() {
            return Err(Error::DimensionMismatch(format!(
                "unitary must be square, got {}x{}",
                mat.nrows(),
                mat.ncols()
            )));
        }
        let dev = linalg::max_abs_diff(&(mat.adjoint() * &mat), &linalg::identity(mat.nrows()));
        if dev > UNITARY_TOL {
            return Err(Error::NotUnitary { deviation: dev });
        }
        Ok(Self { mat })
    }

    pub fn identity(dim: usize) -> Self {
        Self {
            mat: linalg::identity(dim),
        }
    }

    /// `exp(-i H t)` for a Hermitian `H`.
    pub fn from_hamiltonian(h: &CMatrix, t: f64) -> Result<Self> {
        let herm = linalg::hermiticity_deviation(h);
        if herm > HERMITIAN_TOL * linalg::max_abs(h).max(1.0) {
            return Err(Error::NotHermitian { deviation: herm });
        }
        Self::new(linalg::expm(&(h * linalg::c(0.0, -t))))
    }

    pub fn dim(&self) -> usize {
        self.mat.nrows()
    }

    pub fn matrix(&self) -> &CMatrix {
        &self.mat
    }

    pub fn adjoint(&self) -> Self {
        Self {
            mat: self.mat.adjoint(),
        }
    }

    pub fn pow(&self, j: usize) -> CMatrix {
        linalg::matrix_power(&self.mat, j)
    }

    pub fn conjugate(&self, rho: &CMatrix) -> CMatrix {
        &self.mat * rho * self.mat.adjoint()
    }
}

fn check_subsystems(total: usize, dims: &[usize], keep: &[usize]) -> Result<Vec<usize>> {
    let product: usize = dims.iter().product();
    if product != total {
        return Err(Error::DimensionMismatch(format!(
            "subsystem dims {dims:?} multiply to {product}, matrix has dimension {total}"
        )));
    }
    if keep.is_empty() {
        return Err(Error::DimensionMismatch("no subsystem kept".into()));
    }
    let mut keep: Vec<usize> = keep.to_vec();
    keep.sort_unstable();
    if keep.windows(2).any(|w| w[0] == w[1]) {
        return Err(Error::DimensionMismatch(
            "repeated subsystem in keep set".into(),
        ));
    }
    if let Some(&bad) = keep.iter().find(|&&k| k >= dims.len()) {
        return Err(Error::DimensionMismatch(format!(
            "subsystem index {bad} out of range for {} subsystems",
            dims.len()
        )));
    }
    Ok(keep)
}

/// Splits every full index into (kept index, traced index) and returns
/// `full[t * kept_dim + k]` together with the kept and traced dimensions.
pub(crate) fn index_table(dims: &[usize], keep: &[usize]) -> (Vec<usize>, usize, usize) {
    let total: usize = dims.iter().product();
    let kept_dim: usize = keep.iter().map(|&k| dims[k]).product();
    let traced_dim = total / kept_dim;
    let mut full = vec![0usize; total];
    let mut digits = vec![0usize; dims.len()];
    for i in 0..total {
        let mut rem = i;
        for s in (0..dims.len()).rev() {
            digits[s] = rem % dims[s];
            rem /= dims[s];
        }
        let (mut k_idx, mut t_idx) = (0, 0);
        for (s, &d) in digits.iter().enumerate() {
            if keep.binary_search(&s).is_ok() {
                k_idx = k_idx * dims[s] + d;
            } else {
                t_idx = t_idx * dims[s] + d;
            }
        }
        full[t_idx * kept_dim + k_idx] = i;
    }
    (full, kept_dim, traced_dim)
}

/// Partial trace of an arbitrary square matrix over every subsystem not in `keep`.
/// Subsystems are ordered as in the Kronecker product (first = most significant).
pub fn partial_trace_matrix(m: &CMatrix, dims: &[usize], keep: &[usize]) -> Result<CMatrix> {
    if m.nrows() != m.ncols() {
        return Err(Error::DimensionMismatch("partial trace of a non-square matrix".into()));
    }
    let keep = check_subsystems(m.nrows(), dims, keep)?;
    let (full, kd, td) = index_table(dims, &keep);
    let mut out = CMatrix::zeros(kd, kd);
    for col in 0..kd {
        for row in 0..kd {
            let mut acc = ZERO;
            for t in 0..td {
                acc += m[(full[t * kd + row], full[t * kd + col])];
            }
            out[(row, col)] = acc;
        }
    }
    Ok(out)
}

/// Reduced state on the subsystems in `keep`.
pub fn partial_trace(rho: &DensityMatrix, dims: &[usize], keep: &[usize]) -> Result<DensityMatrix> {
    partial_trace_matrix(rho.matrix(), dims, keep).map(DensityMatrix::from_matrix_unchecked)
}

/// Trace distance `½‖a − b‖₁` of two Hermitian matrices.
pub fn trace_distance_matrix(a: &CMatrix, b: &CMatrix) -> Result<f64> {
    if a.shape() != b.shape() {
        return Err(Error::DimensionMismatch(format!(
            "trace distance between {:?} and {:?} matrices",
            a.shape(),
            b.shape()
        )));
    }
    Ok(0.5 * linalg::hermitian_eigenvalues(&(a - b)).iter().map(|v| v.abs()).sum::<f64>())
}

pub fn trace_distance(a: &DensityMatrix, b: &DensityMatrix) -> Result<f64> {
    trace_distance_matrix(a.matrix(), b.matrix())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::linalg::{basis_vector, c, real};
    use crate::random;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    #[test]
    fn rejects_invalid_states() {
        let mut m = linalg::identity(2);
        assert!(matches!(DensityMatrix::new(m.clone()), Err(Error::TraceNotOne { .. })));
        m[(0, 0)] = real(1.5);
        m[(1, 1)] = real(-0.5);
        assert!(matches!(DensityMatrix::new(m), Err(Error::NotPositive { .. })));
        let mut h = linalg::identity(2) * real(0.5);
        h[(0, 1)] = c(0.1, 0.0);
        assert!(matches!(DensityMatrix::new(h), Err(Error::NotHermitian { .. })));
    }

    #[test]
    fn product_state_partial_trace() {
        let mut rng = ChaCha8Rng::seed_from_u64(1);
        for _ in 0..10 {
            let a = random::density_matrix(2, &mut rng);
            let b = random::density_matrix(3, &mut rng);
            let ab = a.tensor(&b);
            let ra = partial_trace(&ab, &[2, 3], &[0]).unwrap();
            let rb = partial_trace(&ab, &[2, 3], &[1]).unwrap();
            assert!(linalg::max_abs_diff(ra.matrix(), a.matrix()) < 1e-12);
            assert!(linalg::max_abs_diff(rb.matrix(), b.matrix()) < 1e-12);
        }
    }

    #[test]
    fn bell_state_marginals_are_maximally_mixed() {
        let s = 1.0 / 2f64.sqrt();
        let phi = (basis_vector(4, 0) + basis_vector(4, 3)) * real(s);
        let bell = DensityMatrix::pure(&phi).unwrap();
        for keep in [0, 1] {
            let r = partial_trace(&bell, &[2, 2], &[keep]).unwrap();
            assert!(linalg::max_abs_diff(r.matrix(), DensityMatrix::maximally_mixed(2).matrix()) < 1e-15);
        }
    }

    /// Explicit index-summation oracle for three qubits.
    fn brute_force_trace_out_middle(m: &CMatrix) -> CMatrix {
        let mut out = CMatrix::zeros(4, 4);
        for a in 0..2 {
            for c_ in 0..2 {
                for a2 in 0..2 {
                    for c2 in 0..2 {
                        let mut acc = ZERO;
                        for b in 0..2 {
                            acc += m[(a * 4 + b * 2 + c_, a2 * 4 + b * 2 + c2)];
                        }
                        out[(a * 2 + c_, a2 * 2 + c2)] = acc;
                    }
                }
            }
        }
        out
    }

    #[test]
    fn three_qubit_partial_trace_matches_index_sum() {
        let mut rng = ChaCha8Rng::seed_from_u64(2);
        let rho = random::density_matrix(8, &mut rng);
        let got = partial_trace(&rho, &[2, 2, 2], &[2, 0]).unwrap();
        let oracle = brute_force_trace_out_middle(rho.matrix());
        assert!(linalg::max_abs_diff(got.matrix(), &oracle) < 1e-12);
        assert!((got.trace() - ONE).norm() < 1e-12);
    }

    #[test]
    fn partial_trace_rejects_bad_dims() {
        let rho = DensityMatrix::maximally_mixed(4);
        assert!(partial_trace(&rho, &[2, 3], &[0]).is_err());
        assert!(partial_trace(&rho, &[2, 2], &[]).is_err());
        assert!(partial_trace(&rho, &[2, 2], &[2]).is_err());
        assert!(partial_trace(&rho, &[2, 2], &[0, 0]).is_err());
    }

    #[test]
    fn trace_distance_basics() {
        let z0 = DensityMatrix::basis(2, 0);
        let z1 = DensityMatrix::basis(2, 1);
        assert_eq!(trace_distance(&z0, &z0).unwrap(), 0.0);
        assert!((trace_distance(&z0, &z1).unwrap() - 1.0).abs() < 1e-15);
        assert!(trace_distance(&z0, &DensityMatrix::basis(3, 0)).is_err());
    }

    #[test]
    fn trace_distance_matches_singular_values() {
        let mut rng = ChaCha8Rng::seed_from_u64(9);
        for _ in 0..20 {
            let a = random::density_matrix(2, &mut rng);
            let b = random::density_matrix(2, &mut rng);
            let diff = a.matrix() - b.matrix();
            let oracle = 0.5 * diff.singular_values().iter().sum::<f64>();
            assert!((trace_distance(&a, &b).unwrap() - oracle).abs() < 1e-12);
        }
    }

    #[test]
    fn unitary_validation() {
        assert!(UnitaryOp::new(linalg::identity(3)).is_ok());
        assert!(matches!(
            UnitaryOp::new(linalg::identity(2) * real(1.1)),
            Err(Error::NotUnitary { .. })
        ));
    }
}
