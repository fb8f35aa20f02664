//! Convolution-type Volterra equations of the second kind on a uniform grid,
//!
//! `X_n = F_n + s_n h Σ_{m=0}^{n} ω^{(n)}_m A_m X_{n−m}`,
//!
//! with Gregory weights `ω^{(n)}`, a per-step scale `s_n` and values that are
//! scalars or (superoperator) matrices. Two evaluation strategies are
//! provided: implicit time stepping and the Neumann series with FFT-based
//! convolutions.

use std::sync::Arc;

use rustfft::{Fft, FftPlanner};

use crate::error::{Error, Result};
use crate::kernel::quadrature::gregory_weight;
use crate::linalg::{self, real, CMatrix, C64, ZERO};

/// Values that can appear as unknowns and kernels of a Volterra equation.
pub trait KernelValue: Clone + Send + Sync {
    fn zero_like(&self) -> Self;
    /// `self += w·x`.
    fn add_scaled(&mut self, w: f64, x: &Self);
    /// `self += w·a·b`.
    fn add_scaled_product(&mut self, w: f64, a: &Self, b: &Self);
    /// `(1 − w·a)⁻¹ rhs`, or `None` if singular.
    fn solve_implicit(a: &Self, w: f64, rhs: Self) -> Option<Self>;
}

impl KernelValue for f64 {
    fn zero_like(&self) -> Self {
        0.0
    }
    fn add_scaled(&mut self, w: f64, x: &Self) {
        *self += w * x;
    }
    fn add_scaled_product(&mut self, w: f64, a: &Self, b: &Self) {
        *self += w * a * b;
    }
    fn solve_implicit(a: &Self, w: f64, rhs: Self) -> Option<Self> {
        let d = 1.0 - w * a;
        (d != 0.0).then(|| rhs / d)
    }
}

impl KernelValue for C64 {
    fn zero_like(&self) -> Self {
        ZERO
    }
    fn add_scaled(&mut self, w: f64, x: &Self) {
        *self += x * w;
    }
    fn add_scaled_product(&mut self, w: f64, a: &Self, b: &Self) {
        *self += a * b * w;
    }
    fn solve_implicit(a: &Self, w: f64, rhs: Self) -> Option<Self> {
        let d = C64::new(1.0, 0.0) - a * w;
        (d != ZERO).then(|| rhs / d)
    }
}

impl KernelValue for CMatrix {
    fn zero_like(&self) -> Self {
        CMatrix::zeros(self.nrows(), self.ncols())
    }
    fn add_scaled(&mut self, w: f64, x: &Self) {
        self.zip_apply(x, |s, v| *s += v * w);
    }
    fn add_scaled_product(&mut self, w: f64, a: &Self, b: &Self) {
        self.gemm(real(w), a, b, real(1.0));
    }
    fn solve_implicit(a: &Self, w: f64, rhs: Self) -> Option<Self> {
        if w == 0.0 || linalg::max_abs(a) == 0.0 {
            return Some(rhs);
        }
        let id = linalg::identity(a.nrows());
        if linalg::max_abs_diff(a, &id) == 0.0 {
            return (w != 1.0).then(|| rhs * real(1.0 / (1.0 - w)));
        }
        (id - a * real(w)).lu().solve(&rhs)
    }
}

/// Kernel samples `A_m`, grid step and the support `M` beyond which the
/// kernel is treated as zero.
pub struct ConvolutionKernel<'a, T> {
    pub samples: &'a [T],
    pub h: f64,
    pub support: usize,
}

impl<T: KernelValue> ConvolutionKernel<'_, T> {
    fn last_index(&self, n: usize) -> usize {
        n.min(self.support).min(self.samples.len() - 1)
    }

    /// `h Σ_{m=lo}^{min(n, M)} ω^{(n)}_m A_m Y_{n−m}` by direct summation.
    fn direct_sum(&self, y: &[T], n: usize, lo: usize, acc: &mut T, scale: f64) {
        for m in lo..=self.last_index(n) {
            acc.add_scaled_product(scale * self.h * gregory_weight(n, m), &self.samples[m], &y[n - m]);
        }
    }
}

/// Implicit time stepping of `X_n = F_n + s_n h Σ ω^{(n)}_m A_m X_{n−m}`.
pub fn solve_stepping<T: KernelValue>(
    forcing: &[T],
    kernel: &ConvolutionKernel<'_, T>,
    scale: &[f64],
) -> Result<Vec<T>> {
    let n_points = forcing.len();
    let mut x: Vec<T> = Vec::with_capacity(n_points);
    x.push(forcing[0].clone());
    for n in 1..n_points {
        let mut acc = forcing[n].clone();
        kernel.direct_sum(&x, n, 1, &mut acc, scale[n]);
        let w0 = scale[n] * kernel.h * gregory_weight(n, 0);
        let xn = T::solve_implicit(&kernel.samples[0], w0, acc)
            .ok_or(Error::Singular("implicit Volterra step"))?;
        x.push(xn);
    }
    Ok(x)
}

/// Linear convolution `P_n = Σ_{m=0}^{n} A_m Y_{n−m}` of matrix sequences via FFT,
/// with the kernel transform computed once.
pub struct FftConvolver {
    n: usize,
    len: usize,
    dim: usize,
    kernel_hat: Vec<Vec<C64>>,
    forward: Arc<dyn Fft<f64>>,
    inverse: Arc<dyn Fft<f64>>,
}

impl FftConvolver {
    pub fn new(kernel: &[CMatrix]) -> Self {
        let n = kernel.len();
        let dim = kernel[0].nrows();
        let len = (2 * n).next_power_of_two();
        let mut planner = FftPlanner::new();
        let forward = planner.plan_fft_forward(len);
        let inverse = planner.plan_fft_inverse(len);
        let mut out = Self {
            n,
            len,
            dim,
            kernel_hat: Vec::new(),
            forward,
            inverse,
        };
        out.kernel_hat = out.transform(kernel);
        out
    }

    fn transform(&self, seq: &[CMatrix]) -> Vec<Vec<C64>> {
        let mut out = Vec::with_capacity(self.dim * self.dim);
        for i in 0..self.dim {
            for j in 0..self.dim {
                let mut buf = vec![ZERO; self.len];
                for (b, m) in buf.iter_mut().zip(seq) {
                    *b = m[(i, j)];
                }
                self.forward.process(&mut buf);
                out.push(buf);
            }
        }
        out
    }

    pub fn convolve(&self, y: &[CMatrix]) -> Vec<CMatrix> {
        let d = self.dim;
        let y_hat = self.transform(y);
        let mut product = vec![vec![ZERO; self.len]; d * d];
        for f in 0..self.len {
            for i in 0..d {
                for j in 0..d {
                    let mut acc = ZERO;
                    for k in 0..d {
                        acc += self.kernel_hat[i * d + k][f] * y_hat[k * d + j][f];
                    }
                    product[i * d + j][f] = acc;
                }
            }
        }
        let norm = 1.0 / self.len as f64;
        let mut out = vec![CMatrix::zeros(d, d); self.n];
        for (idx, buf) in product.iter_mut().enumerate() {
            self.inverse.process(buf);
            let (i, j) = (idx / d, idx % d);
            for (o, v) in out.iter_mut().zip(buf.iter()) {
                o[(i, j)] = v * norm;
            }
        }
        out
    }
}

/// The operator `(T Y)_n = s_n h Σ_{m=0}^{n} ω^{(n)}_m A_m Y_{n−m}` applied
/// through an FFT for the bulk of the Gregory sum plus endpoint corrections.
pub struct ConvolutionOperator<'a> {
    kernel: ConvolutionKernel<'a, CMatrix>,
    scale: &'a [f64],
    fft: FftConvolver,
}

impl<'a> ConvolutionOperator<'a> {
    pub fn new(kernel: &'a [CMatrix], h: f64, scale: &'a [f64]) -> Self {
        Self {
            kernel: ConvolutionKernel {
                samples: kernel,
                h,
                support: kernel.len(),
            },
            scale,
            fft: FftConvolver::new(kernel),
        }
    }

    pub fn apply(&self, y: &[CMatrix]) -> Vec<CMatrix> {
        let full = self.fft.convolve(y);
        let a = self.kernel.samples;
        let h = self.kernel.h;
        full.into_iter()
            .enumerate()
            .map(|(n, conv)| {
                let s = self.scale[n];
                if n == 0 {
                    return conv.zero_like();
                }
                if n <= 4 {
                    let mut acc = conv.zero_like();
                    self.kernel.direct_sum(y, n, 0, &mut acc, s);
                    return acc;
                }
                // Gregory weights differ from 1 only at the three points at each end.
                let mut acc = conv * real(s * h);
                for m in [0, 1, 2, n - 2, n - 1, n] {
                    let w = gregory_weight(n, m) - 1.0;
                    acc.add_scaled_product(s * h * w, &a[m], &y[n - m]);
                }
                acc
            })
            .collect()
    }
}
