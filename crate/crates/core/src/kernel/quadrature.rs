//! Fixed-step quadrature and differentiation rules on uniform grids.

use crate::kernel::volterra::KernelValue;

/// Weight of sample `m` in the fourth-order Gregory rule for `∫₀^{t_n}` (in
/// units of `h`). Short ranges use trapezoid (n = 1), Simpson (n = 2),
/// Simpson 3/8 (n = 3) and Boole (n = 4).
pub fn gregory_weight(n: usize, m: usize) -> f64 {
    debug_assert!(m <= n);
    match n {
        0 => 0.0,
        1 => 0.5,
        2 => [1.0 / 3.0, 4.0 / 3.0, 1.0 / 3.0][m],
        3 => [3.0 / 8.0, 9.0 / 8.0, 9.0 / 8.0, 3.0 / 8.0][m],
        4 => [14.0, 64.0, 24.0, 64.0, 14.0][m] / 45.0,
        _ => {
            let edge = m.min(n - m);
            match edge {
                0 => 3.0 / 8.0,
                1 => 7.0 / 6.0,
                2 => 23.0 / 24.0,
                _ => 1.0,
            }
        }
    }
}

/// `∫₀^{t_n} f` for every `n`, accumulated interval by interval with the
/// four-point cubic rule (trapezoid when fewer than four samples exist).
pub fn cumulative_integral<T: KernelValue>(samples: &[T], h: f64) -> Vec<T> {
    let n = samples.len();
    let mut out = Vec::with_capacity(n);
    if n == 0 {
        return out;
    }
    let mut acc = samples[0].zero_like();
    out.push(acc.clone());
    for i in 0..n - 1 {
        let terms: Vec<(f64, usize)> = if n < 4 {
            vec![(0.5, i), (0.5, i + 1)]
        } else if i == 0 {
            vec![(9.0, 0), (19.0, 1), (-5.0, 2), (1.0, 3)]
                .into_iter()
                .map(|(w, k)| (w / 24.0, k))
                .collect()
        } else if i == n - 2 {
            vec![(9.0, i + 1), (19.0, i), (-5.0, i - 1), (1.0, i - 2)]
                .into_iter()
                .map(|(w, k)| (w / 24.0, k))
                .collect()
        } else {
            vec![(-1.0, i - 1), (13.0, i), (13.0, i + 1), (-1.0, i + 2)]
                .into_iter()
                .map(|(w, k)| (w / 24.0, k))
                .collect()
        };
        for (w, k) in terms {
            acc.add_scaled(w * h, &samples[k]);
        }
        out.push(acc.clone());
    }
    out
}

/// Fourth-order finite-difference derivative of uniformly spaced samples:
/// centred in the interior, one-sided at the two points nearest each end.
/// Needs at least five samples.
pub fn derivative<T: KernelValue>(samples: &[T], h: f64) -> Vec<T> {
    let n = samples.len();
    assert!(n >= 5, "fourth-order differences need five samples");
    let combo = |pairs: &[(f64, usize)]| {
        let mut acc = samples[0].zero_like();
        for &(w, k) in pairs {
            acc.add_scaled(w / (12.0 * h), &samples[k]);
        }
        acc
    };
    (0..n)
        .map(|i| {
            if i == 0 {
                combo(&[(-25.0, 0), (48.0, 1), (-36.0, 2), (16.0, 3), (-3.0, 4)])
            } else if i == 1 {
                combo(&[(-3.0, 0), (-10.0, 1), (18.0, 2), (-6.0, 3), (1.0, 4)])
            } else if i == n - 1 {
                combo(&[(25.0, n - 1), (-48.0, n - 2), (36.0, n - 3), (-16.0, n - 4), (3.0, n - 5)])
            } else if i == n - 2 {
                combo(&[(3.0, n - 1), (10.0, n - 2), (-18.0, n - 3), (6.0, n - 4), (-1.0, n - 5)])
            } else {
                combo(&[(1.0, i - 2), (-8.0, i - 1), (8.0, i + 1), (-1.0, i + 2)])
            }
        })
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;

    fn gregory(f: impl Fn(f64) -> f64, t: f64, n: usize) -> f64 {
        let h = t / n as f64;
        (0..=n).map(|m| gregory_weight(n, m) * f(m as f64 * h)).sum::<f64>() * h
    }

    #[test]
    fn gregory_integrates_cubics_exactly() {
        for n in 1..30 {
            let total: f64 = (0..=n).map(|m| gregory_weight(n, m)).sum();
            assert!((total - n as f64).abs() < 1e-12);
            if n >= 3 {
                let exact = 2.0_f64.powi(4) / 4.0 - 2.0_f64.powi(2);
                let approx = gregory(|x| x * x * x - 2.0 * x, 2.0, n);
                assert!((approx - exact).abs() < 1e-12, "n = {n}");
            }
        }
    }

    #[test]
    fn gregory_is_fourth_order() {
        let exact = 1.0 - (-3.0f64).exp();
        let err = |n| (gregory(|x: f64| (-x).exp(), 3.0, n) - exact).abs();
        let ratio = err(40) / err(80);
        assert!((ratio - 16.0).abs() < 1.0, "ratio {ratio}");
    }

    #[test]
    fn cumulative_rule_matches_primitive() {
        let h = 0.01;
        let samples: Vec<f64> = (0..301).map(|i| (i as f64 * h).cos()).collect();
        let cum = cumulative_integral(&samples, h);
        for (i, c) in cum.iter().enumerate() {
            assert!((c - (i as f64 * h).sin()).abs() < 1e-9);
        }
        let short = cumulative_integral(&[1.0, 3.0], 0.5);
        assert_eq!(short, vec![0.0, 1.0]);
    }

    #[test]
    fn derivative_matches_analytic() {
        let h = 0.01;
        let samples: Vec<f64> = (0..101).map(|i| (2.0 * i as f64 * h).sin()).collect();
        for (i, d) in derivative(&samples, h).iter().enumerate() {
            assert!((d - 2.0 * (2.0 * i as f64 * h).cos()).abs() < 1e-7);
        }
    }
}
