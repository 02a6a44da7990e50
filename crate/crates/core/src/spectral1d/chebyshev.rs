//! Chebyshev polynomials and the type-I cosine transform between values at the
//! Chebyshev–Gauss–Lobatto points and Chebyshev coefficients.

use std::cell::RefCell;
use std::f64::consts::PI;

use rustfft::num_complex::Complex;
use rustfft::FftPlanner;

use crate::error::{Error, Result};

thread_local! {
    static PLANNER: RefCell<FftPlanner<f64>> = RefCell::new(FftPlanner::new());
}

/// `T_m(x)` by the three-term recurrence.
pub fn chebyshev(m: usize, x: f64) -> Result<f64> {
    if !(x.abs() <= 1.0 + 1e-12) {
        return Err(Error::Domain(format!("Chebyshev argument {x} outside [-1, 1]")));
    }
    let (mut t0, mut t1) = (1.0, x);
    if m == 0 {
        return Ok(1.0);
    }
    for _ in 2..=m {
        let t2 = 2.0 * x * t1 - t0;
        t0 = t1;
        t1 = t2;
    }
    Ok(t1)
}

/// The `M + 1` extreme points `x_j = cos(πj/M)`, ordered from `+1` to `−1`.
/// Written as `sin(π(M − 2j)/(2M))` so the set is exactly antisymmetric.
/// For `M = 0` the single point is the interval midpoint.
pub fn chebyshev_points(order: usize) -> Vec<f64> {
    if order == 0 {
        return vec![0.0];
    }
    let m = order as f64;
    (0..=order)
        .map(|j| (PI * (m - 2.0 * j as f64) / (2.0 * m)).sin())
        .collect()
}

/// Evaluates `Σ c_m T_m(x)` with the Clenshaw recurrence.
pub fn chebyshev_series(coeffs: &[f64], x: f64) -> f64 {
    let (mut b1, mut b2) = (0.0, 0.0);
    for &c in coeffs.iter().skip(1).rev() {
        let b0 = c + 2.0 * x * b1 - b2;
        b2 = b1;
        b1 = b0;
    }
    coeffs.first().copied().unwrap_or(0.0) + x * b1 - b2
}

/// Chebyshev coefficients of the interpolant through `samples[j] = f(x_j)` at
/// [`chebyshev_points`], via a real-even FFT of length `2M` (DCT-I).
pub fn chebyshev_coeffs(samples: &[f64]) -> Result<Vec<f64>> {
    let n = samples.len();
    if n == 0 {
        return Err(Error::InvalidInput("Chebyshev transform needs at least one sample".into()));
    }
    if n == 1 {
        return Ok(vec![samples[0]]);
    }
    let m = n - 1;
    let mut buf: Vec<Complex<f64>> = Vec::with_capacity(2 * m);
    buf.extend(samples.iter().map(|&v| Complex::new(v, 0.0)));
    buf.extend(samples[1..m].iter().rev().map(|&v| Complex::new(v, 0.0)));
    let fft = PLANNER.with(|p| p.borrow_mut().plan_fft_forward(2 * m));
    fft.process(&mut buf);
    let scale = 1.0 / m as f64;
    let mut out: Vec<f64> = buf[..=m].iter().map(|c| c.re * scale).collect();
    out[0] *= 0.5;
    out[m] *= 0.5;
    Ok(out)
}

/// `½ ∫₋₁¹ Σ c_m T_m(x) dx`.
pub fn chebyshev_mean(coeffs: &[f64]) -> f64 {
    coeffs
        .iter()
        .enumerate()
        .filter(|(m, _)| m % 2 == 0)
        .map(|(m, &c)| c / (1.0 - (m * m) as f64))
        .sum()
}

/// Minimum of `Σ c_m T_m` on `[−1, 1]`: the smallest of `64(M+1)` equispaced
/// samples, polished by a golden-section search between its neighbours.
pub fn chebyshev_series_min(coeffs: &[f64]) -> f64 {
    let dense = 64 * coeffs.len().max(1);
    let x = |i: usize| -1.0 + 2.0 * i as f64 / dense as f64;
    let (i_min, v_min) = (0..=dense)
        .map(|i| (i, chebyshev_series(coeffs, x(i))))
        .fold((0, f64::INFINITY), |a, b| if b.1 < a.1 { b } else { a });
    let (mut a, mut b) = (x(i_min.saturating_sub(1)), x((i_min + 1).min(dense)));
    let g = 0.5 * (5f64.sqrt() - 1.0);
    let mut best = v_min;
    for _ in 0..80 {
        let c = b - g * (b - a);
        let d = a + g * (b - a);
        let (fc, fd) = (chebyshev_series(coeffs, c), chebyshev_series(coeffs, d));
        best = best.min(fc).min(fd);
        if fc < fd {
            b = d;
        } else {
            a = c;
        }
    }
    best
}

/// Scales the series about its mean, `c̄ + s (p − c̄)` with the largest
/// `s ∈ [0, 1]` for which its minimum on `[−1, 1]` is non-negative. A series
/// with negative mean is left unchanged. Returns `s`.
pub fn limit_nonnegative(coeffs: &mut [f64]) -> f64 {
    if coeffs.len() <= 1 {
        return 1.0;
    }
    let min = chebyshev_series_min(coeffs);
    let mean = chebyshev_mean(coeffs);
    if min >= 0.0 || mean < 0.0 {
        return 1.0;
    }
    let s = mean / (mean - min);
    coeffs[0] = mean + s * (coeffs[0] - mean);
    for c in &mut coeffs[1..] {
        *c *= s;
    }
    s
}

/// O(M²) reference implementation of [`chebyshev_coeffs`].
pub fn chebyshev_coeffs_direct(samples: &[f64]) -> Result<Vec<f64>> {
    let n = samples.len();
    if n == 0 {
        return Err(Error::InvalidInput("Chebyshev transform needs at least one sample".into()));
    }
    if n == 1 {
        return Ok(vec![samples[0]]);
    }
    let m = n - 1;
    let mf = m as f64;
    Ok((0..=m)
        .map(|k| {
            let s: f64 = samples
                .iter()
                .enumerate()
                .map(|(j, &f)| {
                    let w = if j == 0 || j == m { 0.5 } else { 1.0 };
                    w * f * (PI * (j * k % (2 * m)) as f64 / mf).cos()
                })
                .sum();
            let c = 2.0 * s / mf;
            if k == 0 || k == m {
                0.5 * c
            } else {
                c
            }
        })
        .collect())
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    #[test]
    fn limiter_keeps_mean_and_sign() {
        // interpolant of a kink that undershoots
        let samples: Vec<f64> = chebyshev_points(16).iter().map(|&x| (x - 0.3).max(0.0) * 1e10).collect();
        let mut c = chebyshev_coeffs(&samples).unwrap();
        let mean = chebyshev_mean(&c);
        let raw_min = (0..=400).map(|i| chebyshev_series(&c, -1.0 + i as f64 / 200.0)).fold(f64::INFINITY, f64::min);
        assert!(raw_min < 0.0);
        let s = limit_nonnegative(&mut c);
        assert!(s < 1.0 && s > 0.5, "{s}");
        assert!((chebyshev_mean(&c) - mean).abs() <= 1e-12 * mean);
        let min = (0..=400).map(|i| chebyshev_series(&c, -1.0 + i as f64 / 200.0)).fold(f64::INFINITY, f64::min);
        assert!(min >= -1e-12 * mean, "{min}");
        let mut smooth = chebyshev_coeffs(&chebyshev_points(8).iter().map(|&x| 2.0 + x).collect::<Vec<_>>()).unwrap();
        let before = smooth.clone();
        assert_eq!(limit_nonnegative(&mut smooth), 1.0);
        assert_eq!(smooth, before);
    }

    #[test]
    fn mean_matches_quadrature() {
        let c = [0.3, -1.2, 0.7, 0.25, -0.4];
        let g = crate::spectral1d::gauss_legendre(10).unwrap();
        let q: f64 = g.nodes.iter().zip(&g.weights).map(|(&x, &w)| w * chebyshev_series(&c, x)).sum::<f64>() / 2.0;
        assert!((chebyshev_mean(&c) - q).abs() < 1e-14);
    }

    #[test]
    fn recurrence_values() {
        assert_eq!(chebyshev(0, 0.7).unwrap(), 1.0);
        assert_eq!(chebyshev(1, 0.3).unwrap(), 0.3);
        assert!((chebyshev(2, 0.5).unwrap() + 0.5).abs() < 1e-15);
        assert!((chebyshev(7, 0.2).unwrap() - (7.0 * 0.2f64.acos()).cos()).abs() < 1e-14);
        assert!(chebyshev(3, 1.2).is_err());
    }

    #[test]
    fn constant_function() {
        let c = chebyshev_coeffs(&[5.0; 9]).unwrap();
        assert!((c[0] - 5.0).abs() < 1e-14);
        assert!(c[1..].iter().all(|v| v.abs() < 1e-14));
    }

    #[test]
    fn reproduces_t2() {
        let pts = chebyshev_points(6);
        let samples: Vec<f64> = pts.iter().map(|&x| 2.0 * x * x - 1.0).collect();
        let c = chebyshev_coeffs(&samples).unwrap();
        for (k, v) in c.iter().enumerate() {
            let expected = if k == 2 { 1.0 } else { 0.0 };
            assert!((v - expected).abs() < 1e-14, "c[{k}] = {v}");
        }
    }

    #[test]
    fn points_are_antisymmetric() {
        for m in 1..20 {
            let p = chebyshev_points(m);
            for j in 0..=m {
                assert_eq!(p[j], -p[m - j]);
            }
            assert_eq!(p[0], 1.0);
        }
    }

    #[test]
    fn empty_input_is_an_error() {
        assert!(chebyshev_coeffs(&[]).is_err());
        assert_eq!(chebyshev_coeffs(&[3.0]).unwrap(), vec![3.0]);
    }

    proptest! {
        #[test]
        fn fast_transform_matches_direct(samples in prop::collection::vec(-10.0f64..10.0, 2..40)) {
            let fast = chebyshev_coeffs(&samples).unwrap();
            let slow = chebyshev_coeffs_direct(&samples).unwrap();
            for (a, b) in fast.iter().zip(&slow) {
                prop_assert!((a - b).abs() < 1e-13 * 10.0);
            }
        }

        #[test]
        fn polynomial_round_trip(coeffs in prop::collection::vec(-1.0f64..1.0, 1..9),
                                 xs in prop::collection::vec(-1.0f64..1.0, 20)) {
            // degree ≤ 8 polynomial sampled at M = 8 points is reproduced exactly
            let f = |x: f64| coeffs.iter().enumerate().map(|(k, c)| c * x.powi(k as i32)).sum::<f64>();
            let samples: Vec<f64> = chebyshev_points(8).iter().map(|&x| f(x)).collect();
            let c = chebyshev_coeffs(&samples).unwrap();
            for x in xs {
                prop_assert!((chebyshev_series(&c, x) - f(x)).abs() < 1e-12);
            }
        }
    }
}
