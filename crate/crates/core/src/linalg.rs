//! Dense complex matrix helpers shared by every other module.

use nalgebra::{DMatrix, DVector};
use num_complex::Complex64;

pub type C64 = Complex64;
pub type CMatrix = DMatrix<C64>;
pub type CVector = DVector<C64>;

pub const ZERO: C64 = C64::new(0.0, 0.0);
pub const ONE: C64 = C64::new(1.0, 0.0);
pub const I: C64 = C64::new(0.0, 1.0);

#[inline]
pub fn c(re: f64, im: f64) -> C64 {
    C64::new(re, im)
}

#[inline]
pub fn real(re: f64) -> C64 {
    C64::new(re, 0.0)
}

pub fn identity(dim: usize) -> CMatrix {
    CMatrix::identity(dim, dim)
}

/// Kronecker product `a ⊗ b`, with `(a ⊗ b)[i·rb + k, j·cb + l] = a[i, j]·b[k, l]`.
pub fn tensor(a: &CMatrix, b: &CMatrix) -> CMatrix {
    a.kronecker(b)
}

/// Kronecker product of a list of matrices, left to right.
pub fn tensor_all<'a>(factors: impl IntoIterator<Item = &'a CMatrix>) -> CMatrix {
    factors
        .into_iter()
        .fold(CMatrix::identity(1, 1), |acc, f| acc.kronecker(f))
}

/// Projector `|ψ⟩⟨ψ|`.
pub fn outer(psi: &CVector) -> CMatrix {
    psi * psi.adjoint()
}

/// Computational basis vector `|k⟩` in dimension `dim`.
pub fn basis_vector(dim: usize, k: usize) -> CVector {
    let mut v = CVector::zeros(dim);
    v[k] = ONE;
    v
}

/// Matrix unit `|i⟩⟨j|`.
pub fn matrix_unit(dim: usize, i: usize, j: usize) -> CMatrix {
    let mut m = CMatrix::zeros(dim, dim);
    m[(i, j)] = ONE;
    m
}

pub fn trace(a: &CMatrix) -> C64 {
    a.diagonal().iter().sum()
}

/// Largest absolute entry.
pub fn max_abs(a: &CMatrix) -> f64 {
    a.iter().fold(0.0, |acc, z| acc.max(z.norm()))
}

/// Largest absolute entry of `a - b`.
pub fn max_abs_diff(a: &CMatrix, b: &CMatrix) -> f64 {
    a.iter()
        .zip(b.iter())
        .fold(0.0, |acc, (x, y)| acc.max((x - y).norm()))
}

/// Max-norm distance from Hermiticity.
pub fn hermiticity_deviation(a: &CMatrix) -> f64 {
    let n = a.nrows();
    let mut dev: f64 = 0.0;
    for i in 0..n {
        for j in i..n {
            dev = dev.max((a[(i, j)] - a[(j, i)].conj()).norm());
        }
    }
    dev
}

/// `(a + a†) / 2`.
pub fn hermitian_part(a: &CMatrix) -> CMatrix {
    (a + a.adjoint()) * real(0.5)
}

/// Matrix 1-norm (maximum absolute column sum).
pub fn norm_1(a: &CMatrix) -> f64 {
    a.column_iter()
        .map(|col| col.iter().map(|z| z.norm()).sum::<f64>())
        .fold(0.0, f64::max)
}

/// Spectral norm (largest singular value).
pub fn spectral_norm(a: &CMatrix) -> f64 {
    if a.is_empty() {
        return 0.0;
    }
    a.clone()
        .singular_values()
        .iter()
        .fold(0.0, |acc: f64, s| acc.max(*s))
}

fn to_faer_hermitian(a: &CMatrix) -> faer::Mat<faer::c64> {
    let h = hermitian_part(a);
    faer::Mat::from_fn(h.nrows(), h.ncols(), |i, j| faer::c64::new(h[(i, j)].re, h[(i, j)].im))
}

/// Eigen-decomposition of a Hermitian matrix. Only the Hermitian part of the
/// input is used. Eigenvalues are returned in ascending order with matching
/// eigenvector columns.
pub fn hermitian_eigen(a: &CMatrix) -> (Vec<f64>, CMatrix) {
    let n = a.nrows();
    if n == 0 {
        return (Vec::new(), CMatrix::zeros(0, 0));
    }
    let eig = to_faer_hermitian(a)
        .self_adjoint_eigen(faer::Side::Lower)
        .expect("self-adjoint eigensolver converges on finite input");
    let (s, u) = (eig.S(), eig.U());
    let values = (0..n).map(|k| s[k].re).collect();
    let vectors = CMatrix::from_fn(n, n, |i, j| C64::new(u[(i, j)].re, u[(i, j)].im));
    (values, vectors)
}

/// Eigenvalues of a Hermitian matrix in ascending order.
pub fn hermitian_eigenvalues(a: &CMatrix) -> Vec<f64> {
    if a.nrows() == 0 {
        return Vec::new();
    }
    let mut values: Vec<f64> = to_faer_hermitian(a)
        .self_adjoint_eigenvalues(faer::Side::Lower)
        .expect("self-adjoint eigensolver converges on finite input");
    values.sort_by(f64::total_cmp);
    values
}

/// Integer matrix power by repeated squaring.
pub fn matrix_power(a: &CMatrix, mut exponent: usize) -> CMatrix {
    let mut result = identity(a.nrows());
    let mut base = a.clone();
    while exponent > 0 {
        if exponent & 1 == 1 {
            result = &result * &base;
        }
        exponent >>= 1;
        if exponent > 0 {
            base = &base * &base;
        }
    }
    result
}

// Padé coefficients b_k and the backward-error thresholds θ_m for
// scaling-and-squaring in double precision.
const PADE3: [f64; 4] = [120.0, 60.0, 12.0, 1.0];
const PADE5: [f64; 6] = [30240.0, 15120.0, 3360.0, 420.0, 30.0, 1.0];
const PADE7: [f64; 8] = [
    17297280.0, 8648640.0, 1995840.0, 277200.0, 25200.0, 1512.0, 56.0, 1.0,
];
const PADE9: [f64; 10] = [
    17643225600.0,
    8821612800.0,
    2075673600.0,
    302702400.0,
    30270240.0,
    2162160.0,
    110880.0,
    3960.0,
    90.0,
    1.0,
];
const PADE13: [f64; 14] = [
    64764752532480000.0,
    32382376266240000.0,
    7771770303897600.0,
    1187353796428800.0,
    129060195264000.0,
    10559470521600.0,
    670442572800.0,
    33522128640.0,
    1323241920.0,
    40840800.0,
    960960.0,
    16380.0,
    182.0,
    1.0,
];
const THETA: [(usize, f64); 4] = [
    (3, 1.495585217958292e-2),
    (5, 2.539398330063230e-1),
    (7, 9.504178996162932e-1),
    (9, 2.097847961257068e0),
];
const THETA_13: f64 = 5.371920351148152;

/// Matrix exponential by scaling and squaring with a diagonal Padé core
/// (degree 3, 5, 7, 9 or 13, chosen from the 1-norm).
///
/// Panics if `a` is not square.
pub fn expm(a: &CMatrix) -> CMatrix {
    let n = a.nrows();
    assert_eq!(n, a.ncols(), "expm requires a square matrix");
    if n == 0 {
        return CMatrix::zeros(0, 0);
    }
    let norm = norm_1(a);
    let id = identity(n);

    for &(m, theta) in &THETA {
        if norm <= theta {
            let coeffs: &[f64] = match m {
                3 => &PADE3,
                5 => &PADE5,
                7 => &PADE7,
                _ => &PADE9,
            };
            return pade_low(a, coeffs, &id);
        }
    }

    let s = if norm > THETA_13 {
        (norm / THETA_13).log2().ceil().max(0.0) as i32
    } else {
        0
    };
    let scaled = a * real(0.5f64.powi(s));
    let mut r = pade13(&scaled, &id);
    for _ in 0..s {
        r = &r * &r;
    }
    r
}

fn pade_low(a: &CMatrix, b: &[f64], id: &CMatrix) -> CMatrix {
    let a2 = a * a;
    let mut odd = id * real(b[1]);
    let mut even = id * real(b[0]);
    let mut power = id.clone();
    let m = b.len() - 1;
    for k in 1..=m / 2 {
        power = &power * &a2;
        even += &power * real(b[2 * k]);
        if 2 * k + 1 <= m {
            odd += &power * real(b[2 * k + 1]);
        }
    }
    let u = a * odd;
    solve_pade(&even, &u)
}

fn pade13(a: &CMatrix, id: &CMatrix) -> CMatrix {
    let b = &PADE13;
    let a2 = a * a;
    let a4 = &a2 * &a2;
    let a6 = &a4 * &a2;
    let inner_u = &a6 * real(b[13]) + &a4 * real(b[11]) + &a2 * real(b[9]);
    let u_poly = &a6 * inner_u
        + &a6 * real(b[7])
        + &a4 * real(b[5])
        + &a2 * real(b[3])
        + id * real(b[1]);
    let u = a * u_poly;
    let inner_v = &a6 * real(b[12]) + &a4 * real(b[10]) + &a2 * real(b[8]);
    let v = &a6 * inner_v
        + &a6 * real(b[6])
        + &a4 * real(b[4])
        + &a2 * real(b[2])
        + id * real(b[0]);
    solve_pade(&v, &u)
}

fn solve_pade(v: &CMatrix, u: &CMatrix) -> CMatrix {
    let q = v - u;
    let p = v + u;
    q.lu()
        .solve(&p)
        .expect("Padé denominator is nonsingular for norms below theta_13")
}
