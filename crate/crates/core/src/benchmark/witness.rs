//! Information-backflow witness and peak detection on sampled series.

use crate::error::{Error, Result};
use crate::kernel::MapTrajectory;
use crate::linalg::{self, real, CMatrix};
use crate::state::trace_distance_matrix;

/// Smallest time derivative of the trace distance counted as backflow.
pub const BACKFLOW_THRESHOLD: f64 = 1e-8;

/// A closed time interval on which some state pair became more distinguishable.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct BackflowInterval {
    pub start: f64,
    pub end: f64,
}

/// `{|0⟩, |1⟩}` and `{|+⟩, |−⟩}`.
pub fn canonical_pairs() -> Vec<(CMatrix, CMatrix)> {
    let plus = CMatrix::from_element(2, 2, real(0.5));
    let mut minus = plus.clone();
    minus[(0, 1)] = real(-0.5);
    minus[(1, 0)] = real(-0.5);
    vec![(linalg::matrix_unit(2, 0, 0), linalg::matrix_unit(2, 1, 1)), (plus, minus)]
}

/// Grid intervals where `D(Λ(t)ρ_a, Λ(t)ρ_b)` increases faster than
/// [`BACKFLOW_THRESHOLD`] (forward differences) for any of the pairs; overlapping
/// or adjacent intervals are merged.
pub fn backflow_witness(traj: &MapTrajectory, pairs: &[(CMatrix, CMatrix)]) -> Result<Vec<BackflowInterval>> {
    if pairs.is_empty() {
        return Err(Error::InvalidParameter("backflow witness needs at least one state pair".into()));
    }
    for (i, (a, b)) in pairs.iter().enumerate() {
        if linalg::max_abs_diff(a, b) == 0.0 {
            return Err(Error::IdenticalStatePair(i));
        }
    }
    let grid = traj.grid();
    let h = grid.dt();
    let n = grid.n_points();
    let mut rising = vec![false; n - 1];
    for (a, b) in pairs {
        let distances = traj
            .maps()
            .iter()
            .map(|m| trace_distance_matrix(&m.apply(a), &m.apply(b)))
            .collect::<Result<Vec<f64>>>()?;
        for (i, w) in distances.windows(2).enumerate() {
            if (w[1] - w[0]) / h > BACKFLOW_THRESHOLD {
                rising[i] = true;
            }
        }
    }
    let mut intervals: Vec<BackflowInterval> = Vec::new();
    for (i, _) in rising.iter().enumerate().filter(|(_, r)| **r) {
        let (start, end) = (grid.t(i), grid.t(i + 1));
        match intervals.last_mut() {
            Some(last) if last.end >= start => last.end = end,
            _ => intervals.push(BackflowInterval { start, end }),
        }
    }
    Ok(intervals)
}

/// Interior local maxima of `y` whose topographic prominence is at least
/// `min_prominence`. A plateau counts once, at its first sample.
pub fn local_maxima(y: &[f64], min_prominence: f64) -> Vec<usize> {
    let n = y.len();
    let mut peaks = Vec::new();
    let mut i = 1;
    while i + 1 < n {
        if y[i] > y[i - 1] {
            let mut j = i;
            while j + 1 < n && y[j + 1] == y[i] {
                j += 1;
            }
            if j + 1 < n && y[j + 1] < y[i] && prominence(y, i, j) >= min_prominence {
                peaks.push(i);
            }
            i = j + 1;
        } else {
            i += 1;
        }
    }
    peaks
}

/// Interior local minima, as maxima of `−y`.
pub fn local_minima(y: &[f64], min_prominence: f64) -> Vec<usize> {
    let neg: Vec<f64> = y.iter().map(|v| -v).collect();
    local_maxima(&neg, min_prominence)
}

/// Height of the plateau `y[lo..=hi]` above the higher of its two bases.
fn prominence(y: &[f64], lo: usize, hi: usize) -> f64 {
    let peak = y[lo];
    let mut left_min = peak;
    for &v in y[..lo].iter().rev() {
        if v > peak {
            break;
        }
        left_min = left_min.min(v);
    }
    let mut right_min = peak;
    for &v in &y[hi + 1..] {
        if v > peak {
            break;
        }
        right_min = right_min.min(v);
    }
    peak - left_min.max(right_min)
}
