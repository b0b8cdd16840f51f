//! Oracles shared by the integration tests. Nothing here calls into the
//! library's own quadrature, so agreement is a genuine cross-check.

#![allow(dead_code)]

use std::f64::consts::FRAC_PI_2;

/// Tanh-sinh (double exponential) quadrature on `[a, b]`. Algebraic endpoint
/// singularities are handled without special care, but only abscissae next
/// to `a` keep full relative precision: place a strong singularity at `a`.
pub fn tanh_sinh<F: Fn(f64) -> f64>(f: F, a: f64, b: f64) -> f64 {
    let half = 0.5 * (b - a);
    let term = |tau: f64| -> f64 {
        let u = FRAC_PI_2 * tau.sinh();
        let cosh_u = u.cosh();
        // distance from the nearer endpoint, in units of `half`
        let gap = 1.0 / (u.abs().exp() * cosh_u);
        if gap == 0.0 {
            return 0.0;
        }
        let x = if tau >= 0.0 { b - half * gap } else { a + half * gap };
        if x <= a || x >= b {
            return 0.0;
        }
        let weight = FRAC_PI_2 * tau.cosh() / (cosh_u * cosh_u);
        let v = f(x) * weight;
        if v.is_finite() {
            v
        } else {
            0.0
        }
    };
    // far enough out that the abscissae underflow to the endpoint
    let limit = 6.5;
    let mut h = 0.5;
    let mut sum = term(0.0);
    let mut k = 1;
    while (k as f64) * h <= limit {
        sum += term(k as f64 * h) + term(-(k as f64) * h);
        k += 1;
    }
    let mut estimate = sum * h * half;
    for _ in 0..12 {
        h *= 0.5;
        let mut k = 1;
        while (k as f64) * h <= limit {
            sum += term(k as f64 * h) + term(-(k as f64) * h);
            k += 2;
        }
        let next = sum * h * half;
        let converged = (next - estimate).abs() <= 1e-15 * next.abs().max(1e-300);
        estimate = next;
        if converged {
            break;
        }
    }
    estimate
}

pub fn gamma(x: f64) -> f64 {
    statrs::function::gamma::gamma(x)
}

/// Relative error with a floor on the reference magnitude.
pub fn rel_err(value: f64, reference: f64) -> f64 {
    (value - reference).abs() / reference.abs().max(1e-300)
}
