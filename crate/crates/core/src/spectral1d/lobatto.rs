//! Hierarchical Lobatto basis on `[-1, 1]`.
//!
//! `φ_0 = (1 − ξ)/2` and `φ_1 = (1 + ξ)/2` are the vertex modes. For `q ≥ 2` the
//! interior modes are integrated Legendre polynomials
//! `φ_q = (L_q − L_{q−2}) / sqrt(2(2q − 1))`, which vanish at `ξ = ±1` and satisfy
//! `φ_q' = sqrt((2q − 1)/2) L_{q−1}`, so their stiffness block is the identity.

use crate::error::{Error, Result};

/// Identifier stored in the reference-tensor cache header.
pub const BASIS_ID: &str = "lobatto-ileg-v1";

pub const MAX_BASIS_ORDER: usize = 64;

const DOMAIN_SLACK: f64 = 1e-12;

/// Legendre polynomial `L_n(x)` by the Bonnet recurrence.
pub fn legendre(n: usize, x: f64) -> f64 {
    let (mut p0, mut p1) = (1.0, x);
    if n == 0 {
        return 1.0;
    }
    for k in 2..=n {
        let k = k as f64;
        let p2 = ((2.0 * k - 1.0) * x * p1 - (k - 1.0) * p0) / k;
        p0 = p1;
        p1 = p2;
    }
    p1
}

fn check(q: usize, xi: f64) -> Result<()> {
    if q > MAX_BASIS_ORDER {
        return Err(Error::Domain(format!(
            "basis index {q} exceeds maximum order {MAX_BASIS_ORDER}"
        )));
    }
    if !(xi.abs() <= 1.0 + DOMAIN_SLACK) {
        return Err(Error::Domain(format!("point {xi} outside [-1, 1]")));
    }
    Ok(())
}

pub fn lobatto(q: usize, xi: f64) -> Result<f64> {
    check(q, xi)?;
    Ok(match q {
        0 => 0.5 * (1.0 - xi),
        1 => 0.5 * (1.0 + xi),
        _ => (legendre(q, xi) - legendre(q - 2, xi)) / (2.0 * (2.0 * q as f64 - 1.0)).sqrt(),
    })
}

pub fn lobatto_derivative(q: usize, xi: f64) -> Result<f64> {
    check(q, xi)?;
    Ok(match q {
        0 => -0.5,
        1 => 0.5,
        _ => ((2.0 * q as f64 - 1.0) / 2.0).sqrt() * legendre(q - 1, xi),
    })
}

/// Values and derivatives of `φ_0..=φ_p` at `xi` in one recurrence sweep.
/// Slices must have length `p + 1`; `xi` is not range-checked.
pub fn lobatto_all(p: usize, xi: f64, vals: &mut [f64], ders: &mut [f64]) {
    debug_assert!(vals.len() > p && ders.len() > p);
    vals[0] = 0.5 * (1.0 - xi);
    ders[0] = -0.5;
    if p == 0 {
        return;
    }
    vals[1] = 0.5 * (1.0 + xi);
    ders[1] = 0.5;
    // leg[k] holds L_k(xi)
    let mut l_prev2 = 1.0; // L_{q-2}
    let mut l_prev1 = xi; // L_{q-1}
    for q in 2..=p {
        let k = q as f64;
        let l_q = ((2.0 * k - 1.0) * xi * l_prev1 - (k - 1.0) * l_prev2) / k;
        vals[q] = (l_q - l_prev2) / (2.0 * (2.0 * k - 1.0)).sqrt();
        ders[q] = ((2.0 * k - 1.0) / 2.0).sqrt() * l_prev1;
        l_prev2 = l_prev1;
        l_prev1 = l_q;
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::spectral1d::gauss_legendre;

    #[test]
    fn vertex_modes_interpolate() {
        assert_eq!(lobatto(0, -1.0).unwrap(), 1.0);
        assert_eq!(lobatto(0, 1.0).unwrap(), 0.0);
        assert_eq!(lobatto(1, 1.0).unwrap(), 1.0);
        for xi in [-0.7, 0.0, 0.33, 1.0] {
            let s = lobatto(0, xi).unwrap() + lobatto(1, xi).unwrap();
            assert!((s - 1.0).abs() < 1e-15);
        }
    }

    #[test]
    fn interior_modes_vanish_at_endpoints() {
        for q in 2..=12 {
            assert!(lobatto(q, 1.0).unwrap().abs() < 1e-14);
            assert!(lobatto(q, -1.0).unwrap().abs() < 1e-14);
        }
    }

    #[test]
    fn stiffness_of_vertex_mode() {
        let rule = gauss_legendre(4).unwrap();
        let k00 = rule.integrate(|x| lobatto_derivative(0, x).unwrap().powi(2));
        assert!((k00 - 0.5).abs() < 1e-15);
    }

    #[test]
    fn interior_stiffness_is_identity() {
        let rule = gauss_legendre(12).unwrap();
        for p in 2..=10 {
            for q in 2..=10 {
                let v = rule.integrate(|x| {
                    lobatto_derivative(p, x).unwrap() * lobatto_derivative(q, x).unwrap()
                });
                let expected = if p == q { 1.0 } else { 0.0 };
                assert!((v - expected).abs() < 1e-13, "({p},{q}) = {v}");
            }
        }
    }

    #[test]
    fn derivative_matches_finite_difference() {
        let h = 1e-6;
        for q in 0..=8 {
            for xi in [-0.9, -0.2, 0.4, 0.8] {
                let fd = (lobatto(q, xi + h).unwrap() - lobatto(q, xi - h).unwrap()) / (2.0 * h);
                assert!((fd - lobatto_derivative(q, xi).unwrap()).abs() < 1e-8);
            }
        }
    }

    #[test]
    fn sweep_matches_single_evaluations() {
        let mut v = [0.0; 9];
        let mut d = [0.0; 9];
        lobatto_all(8, 0.37, &mut v, &mut d);
        for q in 0..=8 {
            assert!((v[q] - lobatto(q, 0.37).unwrap()).abs() < 1e-15);
            assert!((d[q] - lobatto_derivative(q, 0.37).unwrap()).abs() < 1e-14);
        }
    }

    #[test]
    fn out_of_range_is_domain_error() {
        assert!(matches!(lobatto(2, 1.5), Err(Error::Domain(_))));
        assert!(matches!(lobatto(MAX_BASIS_ORDER + 1, 0.0), Err(Error::Domain(_))));
        assert!(lobatto_derivative(3, f64::NAN).is_err());
    }
}
