//! Quantum channels in superoperator, Kraus and Choi form.
//!
//! Conventions:
//!
//! * superoperators act on column-stacked density matrices, so conjugation
//!   `ρ ↦ KρK†` has matrix `conj(K) ⊗ K`;
//! * the Choi matrix is unnormalised, `J = Σᵢⱼ |i⟩⟨j| ⊗ M(|i⟩⟨j|)`, so a
//!   trace-preserving map has `Tr J = d` and `Tr₂ J = 1`.

use std::ops::{Add, Mul, Sub};

use crate::error::{Error, Result};
use crate::linalg::{self, real, CMatrix, CVector, ONE, ZERO};
use crate::state::{DensityMatrix, UnitaryOp};

/// Eigenvalues of the Choi matrix at or below this value are dropped when
/// extracting Kraus operators.
pub const KRAUS_EIGEN_CUTOFF: f64 = 1e-12;
/// Choi eigenvalues below `-KRAUS_NEGATIVE_TOL` make Kraus extraction fail.
pub const KRAUS_NEGATIVE_TOL: f64 = 1e-10;

/// Column-stacking `vec(ρ)`.
pub fn vectorize(m: &CMatrix) -> CVector {
    CVector::from_column_slice(m.as_slice())
}

/// Inverse of [`vectorize`].
pub fn unvectorize(v: &CVector, dim: usize) -> CMatrix {
    CMatrix::from_column_slice(dim, dim, v.as_slice())
}

/// A linear map on `dim × dim` matrices stored as a `dim² × dim²` matrix.
#[derive(Debug, Clone, PartialEq)]
pub struct Superoperator {
    dim: usize,
    mat: CMatrix,
}

impl Superoperator {
    pub fn from_matrix(dim: usize, mat: CMatrix) -> Result<Self> {
        let d2 = dim * dim;
        if mat.nrows() != d2 || mat.ncols() != d2 {
            return Err(Error::DimensionMismatch(format!(
                "superoperator on dimension {dim} must be {d2}x{d2}, got {}x{}",
                mat.nrows(),
                mat.ncols()
            )));
        }
        Ok(Self { dim, mat })
    }

    /// Infers `dim` from a square `dim² × dim²` matrix.
    pub fn from_square(mat: CMatrix) -> Result<Self> {
        let n = mat.nrows();
        let dim = (n as f64).sqrt().round() as usize;
        if dim * dim != n {
            return Err(Error::DimensionMismatch(format!(
                "superoperator size {n} is not a perfect square"
            )));
        }
        Self::from_matrix(dim, mat)
    }

    pub fn identity(dim: usize) -> Self {
        Self {
            dim,
            mat: linalg::identity(dim * dim),
        }
    }

    pub fn zero(dim: usize) -> Self {
        Self {
            dim,
            mat: CMatrix::zeros(dim * dim, dim * dim),
        }
    }

    /// `ρ ↦ K ρ K†`.
    pub fn conjugation(k: &CMatrix) -> Self {
        Self {
            dim: k.nrows(),
            mat: linalg::tensor(&k.map(|z| z.conj()), k),
        }
    }

    /// `ρ ↦ Tr_A{U(ρ ⊗ |a⟩⟨a|)U†}` for a unitary on `S ⊗ A` (system index
    /// most significant) and an ancilla state vector `a`.
    pub fn stinespring(u: &CMatrix, dim_s: usize, ancilla: &CVector) -> Self {
        let d_a = ancilla.len();
        let d2 = dim_s * dim_s;
        let mut mat = CMatrix::zeros(d2, d2);
        for m in 0..d_a {
            let k = CMatrix::from_fn(dim_s, dim_s, |sp, s| {
                (0..d_a).fold(ZERO, |acc, b| acc + u[(sp * d_a + m, s * d_a + b)] * ancilla[b])
            });
            mat += linalg::tensor(&k.map(|z| z.conj()), &k);
        }
        Self { dim: dim_s, mat }
    }

    pub fn unitary(u: &UnitaryOp) -> Self {
        Self::conjugation(u.matrix())
    }

    /// `ρ ↦ A ρ B`.
    pub fn sandwich(a: &CMatrix, b: &CMatrix) -> Self {
        Self {
            dim: a.nrows(),
            mat: linalg::tensor(&b.transpose(), a),
        }
    }

    /// Transposition `ρ ↦ ρᵀ`: positive but not completely positive.
    pub fn transpose_map(dim: usize) -> Self {
        let mut mat = CMatrix::zeros(dim * dim, dim * dim);
        for i in 0..dim {
            for j in 0..dim {
                mat[(j + dim * i, i + dim * j)] = ONE;
            }
        }
        Self { dim, mat }
    }

    /// Lindblad generator `L[ρ] = −i[H, ρ] + Σ γ (JρJ† − ½{J†J, ρ})`.
    pub fn lindbladian(hamiltonian: &CMatrix, jumps: &[(f64, CMatrix)]) -> Self {
        let d = hamiltonian.nrows();
        let id = linalg::identity(d);
        let minus_i = linalg::c(0.0, -1.0);
        let mut mat = (linalg::tensor(&id, hamiltonian) - linalg::tensor(&hamiltonian.transpose(), &id))
            * minus_i;
        for (rate, j) in jumps {
            let jdj = j.adjoint() * j;
            mat += (linalg::tensor(&j.map(|z| z.conj()), j)
                - linalg::tensor(&id, &jdj) * real(0.5)
                - linalg::tensor(&jdj.transpose(), &id) * real(0.5))
                * real(*rate);
        }
        Self { dim: d, mat }
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn matrix(&self) -> &CMatrix {
        &self.mat
    }

    pub fn into_matrix(self) -> CMatrix {
        self.mat
    }

    pub fn apply(&self, rho: &CMatrix) -> CMatrix {
        unvectorize(&(&self.mat * vectorize(rho)), self.dim)
    }

    pub fn apply_state(&self, rho: &DensityMatrix) -> CMatrix {
        self.apply(rho.matrix())
    }

    /// `self ∘ other` (apply `other` first).
    pub fn compose(&self, other: &Superoperator) -> Superoperator {
        Self {
            dim: self.dim,
            mat: &self.mat * &other.mat,
        }
    }

    pub fn scale(&self, w: f64) -> Superoperator {
        Self {
            dim: self.dim,
            mat: &self.mat * real(w),
        }
    }

    pub fn exp(&self) -> Superoperator {
        Self {
            dim: self.dim,
            mat: linalg::expm(&self.mat),
        }
    }

    /// Spectral norm of `self − other` as matrices on the vectorized space.
    pub fn distance(&self, other: &Superoperator) -> f64 {
        linalg::spectral_norm(&(&self.mat - &other.mat))
    }

    pub fn max_abs_diff(&self, other: &Superoperator) -> f64 {
        linalg::max_abs_diff(&self.mat, &other.mat)
    }

    pub fn choi(&self) -> ChoiMatrix {
        let d = self.dim;
        let mut j = CMatrix::zeros(d * d, d * d);
        for i in 0..d {
            for jj in 0..d {
                for k in 0..d {
                    for l in 0..d {
                        j[(i * d + k, jj * d + l)] = self.mat[(k + d * l, i + d * jj)];
                    }
                }
            }
        }
        ChoiMatrix { dim: d, mat: j }
    }

    pub fn to_kraus(&self) -> Result<KrausChannel> {
        self.choi().to_kraus()
    }

    /// Deviation of the trace functional from the identity functional:
    /// `max |(vec 1)ᵀ M − (vec 1)ᵀ|`, i.e. the max-norm of `M†(1) − 1`.
    pub fn trace_deviation(&self) -> f64 {
        let d = self.dim;
        let mut dev: f64 = 0.0;
        for col in 0..d * d {
            let mut acc = ZERO;
            for k in 0..d {
                acc += self.mat[(k * (d + 1), col)];
            }
            let target = if col % (d + 1) == 0 { ONE } else { ZERO };
            dev = dev.max((acc - target).norm());
        }
        dev
    }

    pub fn cpt_check(&self, tol: f64) -> CptReport {
        let min_choi_eig = self.choi().min_eigenvalue();
        let trace_dev = self.trace_deviation();
        CptReport {
            min_choi_eig,
            trace_dev,
            is_cpt: min_choi_eig >= -tol && trace_dev <= tol,
        }
    }
}

impl<'a> Add<&'a Superoperator> for &'a Superoperator {
    type Output = Superoperator;
    fn add(self, rhs: &Superoperator) -> Superoperator {
        Superoperator {
            dim: self.dim,
            mat: &self.mat + &rhs.mat,
        }
    }
}

impl<'a> Sub<&'a Superoperator> for &'a Superoperator {
    type Output = Superoperator;
    fn sub(self, rhs: &Superoperator) -> Superoperator {
        Superoperator {
            dim: self.dim,
            mat: &self.mat - &rhs.mat,
        }
    }
}

impl<'a> Mul<&'a Superoperator> for &'a Superoperator {
    type Output = Superoperator;
    fn mul(self, rhs: &Superoperator) -> Superoperator {
        self.compose(rhs)
    }
}

/// Result of a complete-positivity / trace-preservation check.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CptReport {
    pub min_choi_eig: f64,
    pub trace_dev: f64,
    pub is_cpt: bool,
}

/// Free-function form of [`Superoperator::cpt_check`].
pub fn cpt_check(m: &Superoperator, tol: f64) -> CptReport {
    m.cpt_check(tol)
}

/// Channel as a list of Kraus operators.
#[derive(Debug, Clone, PartialEq)]
pub struct KrausChannel {
    dim: usize,
    ops: Vec<CMatrix>,
}

impl KrausChannel {
    /// Validates shapes and `Σ K†K = 1` within 1e-10.
    pub fn new(ops: Vec<CMatrix>) -> Result<Self> {
        let dim = ops
            .first()
            .map(|k| k.nrows())
            .ok_or_else(|| Error::InvalidParameter("empty Kraus list".into()))?;
        if ops.iter().any(|k| k.nrows() != dim || k.ncols() != dim) {
            return Err(Error::DimensionMismatch(
                "Kraus operators must share one square shape".into(),
            ));
        }
        let sum = ops
            .iter()
            .fold(CMatrix::zeros(dim, dim), |acc, k| acc + k.adjoint() * k);
        let dev = linalg::max_abs_diff(&sum, &linalg::identity(dim));
        if dev > 1e-10 {
            return Err(Error::NotTracePreserving { deviation: dev });
        }
        Ok(Self { dim, ops })
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn operators(&self) -> &[CMatrix] {
        &self.ops
    }

    pub fn to_superoperator(&self) -> Superoperator {
        let d2 = self.dim * self.dim;
        let mat = self.ops.iter().fold(CMatrix::zeros(d2, d2), |acc, k| {
            acc + linalg::tensor(&k.map(|z| z.conj()), k)
        });
        Superoperator { dim: self.dim, mat }
    }

    pub fn to_choi(&self) -> ChoiMatrix {
        self.to_superoperator().choi()
    }

    pub fn apply(&self, rho: &CMatrix) -> CMatrix {
        self.ops
            .iter()
            .fold(CMatrix::zeros(self.dim, self.dim), |acc, k| acc + k * rho * k.adjoint())
    }
}

/// Unnormalised Choi matrix of a map on `dim × dim` matrices.
#[derive(Debug, Clone, PartialEq)]
pub struct ChoiMatrix {
    dim: usize,
    mat: CMatrix,
}

impl ChoiMatrix {
    pub fn from_matrix(dim: usize, mat: CMatrix) -> Result<Self> {
        let d2 = dim * dim;
        if mat.nrows() != d2 || mat.ncols() != d2 {
            return Err(Error::DimensionMismatch(format!(
                "Choi matrix on dimension {dim} must be {d2}x{d2}"
            )));
        }
        Ok(Self { dim, mat })
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn matrix(&self) -> &CMatrix {
        &self.mat
    }

    pub fn min_eigenvalue(&self) -> f64 {
        linalg::hermitian_eigenvalues(&self.mat)[0]
    }

    pub fn to_superoperator(&self) -> Superoperator {
        let d = self.dim;
        let mut s = CMatrix::zeros(d * d, d * d);
        for i in 0..d {
            for j in 0..d {
                for k in 0..d {
                    for l in 0..d {
                        s[(k + d * l, i + d * j)] = self.mat[(i * d + k, j * d + l)];
                    }
                }
            }
        }
        Superoperator { dim: d, mat: s }
    }

    /// Kraus operators from the eigen-decomposition `J = Σ λ v v†`, keeping
    /// `λ > 1e-12`: `K[k, i] = √λ · v[i·d + k]`.
    pub fn to_kraus(&self) -> Result<KrausChannel> {
        let d = self.dim;
        let (values, vectors) = linalg::hermitian_eigen(&self.mat);
        if values[0] < -KRAUS_NEGATIVE_TOL {
            return Err(Error::NotCompletelyPositive {
                eigenvalue: values[0],
            });
        }
        let ops: Vec<CMatrix> = values
            .iter()
            .enumerate()
            .filter(|(_, &v)| v > KRAUS_EIGEN_CUTOFF)
            .map(|(idx, &v)| {
                let s = v.sqrt();
                let col = vectors.column(idx);
                CMatrix::from_fn(d, d, |k, i| col[i * d + k] * s)
            })
            .collect();
        if ops.is_empty() {
            return Err(Error::InvalidParameter("Choi matrix has no positive eigenvalue".into()));
        }
        // Trace preservation is the caller's business; only shapes are enforced here.
        Ok(KrausChannel { dim: d, ops })
    }
}

/// Applies `map` to the vectorized `ρ` and returns the Hermitian-symmetrised output.
pub fn apply_hermitian(map: &Superoperator, rho: &CMatrix) -> CMatrix {
    linalg::hermitian_part(&map.apply(rho))
}
