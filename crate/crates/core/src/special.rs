//! Special functions and low-discrepancy sampling.

use statrs::function::gamma as sg;

/// Γ(x) for real x. Uses the Lanczos approximation directly on (0, 50) and
/// goes through ln Γ beyond, where the direct product would overflow sooner.
pub fn gamma(x: f64) -> f64 {
    if x >= 50.0 {
        sg::ln_gamma(x).exp()
    } else {
        sg::gamma(x)
    }
}

pub fn ln_gamma(x: f64) -> f64 {
    sg::ln_gamma(x)
}

/// Γ(a) / Γ(b) for positive a, b, computed in log space so that large
/// arguments (σ ≫ 1 in the weight identities) do not overflow.
pub fn gamma_ratio(a: f64, b: f64) -> f64 {
    debug_assert!(a > 0.0 && b > 0.0);
    if a < 50.0 && b < 50.0 {
        sg::gamma(a) / sg::gamma(b)
    } else {
        (sg::ln_gamma(a) - sg::ln_gamma(b)).exp()
    }
}

/// Surface area of the unit sphere `S^{d-1} ⊂ ℝ^d`, i.e. `2 π^{d/2} / Γ(d/2)`.
/// For d = 1 this is 2 (the two points ±1).
pub fn unit_sphere_area(d: u32) -> f64 {
    match d {
        1 => 2.0,
        2 => 2.0 * std::f64::consts::PI,
        3 => 4.0 * std::f64::consts::PI,
        _ => {
            let half = d as f64 / 2.0;
            2.0 * std::f64::consts::PI.powf(half) / gamma(half)
        }
    }
}

/// Radical inverse of `index` in the given prime base.
fn radical_inverse(mut index: u64, base: u64) -> f64 {
    let inv = 1.0 / base as f64;
    let mut scale = inv;
    let mut acc = 0.0;
    while index > 0 {
        acc += (index % base) as f64 * scale;
        index /= base;
        scale *= inv;
    }
    acc
}

/// Two-dimensional Halton sequence (bases 2 and 3) starting at index 1.
#[derive(Debug, Clone)]
pub struct Halton2 {
    next: u64,
}

impl Halton2 {
    pub fn new() -> Self {
        Self { next: 1 }
    }
}

impl Default for Halton2 {
    fn default() -> Self {
        Self::new()
    }
}

impl Iterator for Halton2 {
    type Item = (f64, f64);

    fn next(&mut self) -> Option<Self::Item> {
        let i = self.next;
        self.next += 1;
        Some((radical_inverse(i, 2), radical_inverse(i, 3)))
    }
}
