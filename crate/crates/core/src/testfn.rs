//! Rescaled cutoff test functions, the right-hand sides of the weak
//! estimates they produce, and the critical exponents those estimates
//! single out.
//!
//! The space-time test functions are products
//! `φ₁(|x|/T^{1/2})^ℓ φ₂(|y|/T)^ℓ φ₃(t/T)^ℓ` with `ℓ = 2p'`; the anisotropic
//! scaling matches the dilation `(x, y) ↦ (λx, λ²y)` of the Grushin
//! operator. Every right-hand term scales like a power of T, and the sign
//! of that power decides nonexistence.

use crate::error::{domain, Result};
use crate::fraccalc::{w1_dual_power_integral, FracOrder, WeightW1};
use crate::grushin::GrushinDims;
use crate::quad::{integrate_pieces, Tolerance};
use crate::special::unit_sphere_area;
use std::io::{self, Write};

/// Nonincreasing C² profile equal to 1 up to `plateau` and 0 from `support`
/// on, with a quintic smoothstep in between.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CutoffProfile {
    plateau: f64,
    support: f64,
}

impl CutoffProfile {
    /// Spatial profile Φ: plateau on `(-∞, 1]`, support in `(-∞, 2]`.
    pub const PHI: Self = Self { plateau: 1.0, support: 2.0 };
    /// Temporal profile η: plateau on `(-∞, ½]`, support in `(-∞, 1]`.
    pub const ETA: Self = Self { plateau: 0.5, support: 1.0 };

    pub fn new(plateau: f64, support: f64) -> Result<Self> {
        if !(plateau.is_finite() && support.is_finite() && support > plateau) {
            return Err(domain(format!("cutoff needs plateau < support, got {plateau}, {support}")));
        }
        Ok(Self { plateau, support })
    }

    pub fn plateau(&self) -> f64 {
        self.plateau
    }

    pub fn support(&self) -> f64 {
        self.support
    }

    /// `(Φ, Φ', Φ'')` at `xi`.
    pub fn derivatives(&self, xi: f64) -> (f64, f64, f64) {
        if xi <= self.plateau {
            return (1.0, 0.0, 0.0);
        }
        if xi >= self.support {
            return (0.0, 0.0, 0.0);
        }
        let width = self.support - self.plateau;
        let x = (xi - self.plateau) / width;
        let s = x * x * x * (10.0 - 15.0 * x + 6.0 * x * x);
        let ds = 30.0 * x * x * (1.0 - x) * (1.0 - x);
        let dds = 60.0 * x * (1.0 - x) * (1.0 - 2.0 * x);
        (1.0 - s, -ds / width, -dds / (width * width))
    }

    /// Sharp bounds `(max |Φ'|, max |Φ''|)`.
    pub fn derivative_bounds(&self) -> (f64, f64) {
        let width = self.support - self.plateau;
        (1.875 / width, 10.0 / 3f64.sqrt() / (width * width))
    }
}

/// `(Φ, Φ', Φ'')` of `profile` at `xi`.
pub fn phi_derivatives(profile: &CutoffProfile, xi: f64) -> (f64, f64, f64) {
    profile.derivatives(xi)
}

/// `p' = p/(p-1)`.
pub fn dual_exponent(p: f64) -> f64 {
    p / (p - 1.0)
}

/// Exponent of T shared by every term of [`weak_rhs_t1`]: `-p' + N/2 + k + 1`.
pub fn t1_exponent(p: f64, dims: GrushinDims) -> f64 {
    -dual_exponent(p) + dims.n() as f64 / 2.0 + dims.k() as f64 + 1.0
}

/// T-exponents of the two groups of [`weak_rhs_t2`] when `R = T`:
/// `1 - (1+α)p' + N/2 + k` and `1 - αp' - p' + N/2 + k`.
pub fn t2_exponents(p: f64, gamma: f64, dims: GrushinDims) -> (f64, f64) {
    let alpha = 1.0 - gamma;
    let dual = dual_exponent(p);
    let space = dims.n() as f64 / 2.0 + dims.k() as f64;
    (1.0 - (1.0 + alpha) * dual + space, 1.0 - alpha * dual - dual + space)
}

/// The five right-hand terms, in the order time, `|∇ₓφ₁|`, `Δₓφ₁`,
/// `|x||∇_yφ₂|`, `|x|²Δ_yφ₂`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct WeakTerms {
    pub total: f64,
    pub terms: [f64; 5],
}

impl WeakTerms {
    pub const NAMES: [&'static str; 5] = ["time", "grad_x", "lap_x", "grad_y", "lap_y"];
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct WeakPair {
    pub term_a: f64,
    pub term_b: f64,
}

fn check_p(p: f64) -> Result<()> {
    if !(p > 1.0 && p.is_finite()) {
        return Err(domain(format!("p must exceed 1, got {p}")));
    }
    Ok(())
}

fn tol() -> Tolerance {
    Tolerance::new(0.0, 1e-11)
}

/// `ω_{d-1} ∫₀^{2L} ρ^{d-1} f(ρ/L) dρ` with a breakpoint at the plateau edge.
fn radial(d: u32, scale: f64, f: impl Fn(f64) -> f64) -> Result<f64> {
    let pts = [0.0, scale, 2.0 * scale];
    let v = integrate_pieces(|rho| rho.powi(d as i32 - 1) * f(rho / scale), &pts, tol())?;
    Ok(unit_sphere_area(d) * v)
}

/// Radial Laplacian of `Φ(|z|/L)` in dimension d, at `ξ = |z|/L`, times L².
fn scaled_laplacian(d: u32, xi: f64) -> f64 {
    let (_, d1, d2) = CutoffProfile::PHI.derivatives(xi);
    if d1 == 0.0 {
        d2
    } else {
        d2 + (d as f64 - 1.0) / xi * d1
    }
}

/// The four spatial integrals that multiply `|∇ₓ|^{2p'}`, `|Δₓ|^{p'}`,
/// `|x|^{2p'}|∇_y|^{2p'}` and `|x|^{2p'}|Δ_y|^{p'}`, together with the bare
/// `∫ φ₁^ℓ φ₂^ℓ`, for `φ₁ = Φ(|x|/L^{1/2})`, `φ₂ = Φ(|y|/L)`.
struct Spatial {
    mass: f64,
    grad_x: f64,
    lap_x: f64,
    grad_y: f64,
    lap_y: f64,
}

fn spatial(scale: f64, dual: f64, dims: GrushinDims) -> Result<Spatial> {
    let (n, k) = (dims.n(), dims.k());
    let ell = 2.0 * dual;
    let lx = scale.sqrt();
    let ly = scale;
    let phi = |xi: f64| CutoffProfile::PHI.derivatives(xi);

    let x_mass = radial(n, lx, |xi| phi(xi).0.powf(ell))?;
    let y_mass = radial(k, ly, |xi| phi(xi).0.powf(ell))?;
    let x_grad = radial(n, lx, |xi| (phi(xi).1.abs() / lx).powf(2.0 * dual))?;
    let x_lap = radial(n, lx, |xi| phi(xi).0.powf(dual) * (scaled_laplacian(n, xi).abs() / scale).powf(dual))?;
    let x_weight = radial(n, lx, |xi| (xi * lx).powf(2.0 * dual) * phi(xi).0.powf(ell))?;
    let y_grad = radial(k, ly, |xi| (phi(xi).1.abs() / ly).powf(2.0 * dual))?;
    let y_lap = radial(k, ly, |xi| phi(xi).0.powf(dual) * (scaled_laplacian(k, xi).abs() / (ly * ly)).powf(dual))?;

    Ok(Spatial {
        mass: x_mass * y_mass,
        grad_x: x_grad * y_mass,
        lap_x: x_lap * y_mass,
        grad_y: x_weight * y_grad,
        lap_y: x_weight * y_lap,
    })
}

/// Right-hand side of the weak estimate with the plateau-in-time profile
/// `φ₃ = η(t/T)`, each term integrated over `[0, T] × ℝ^{N+k}` in the
/// bi-radial measure.
pub fn weak_rhs_t1(t_scale: f64, p: f64, dims: GrushinDims) -> Result<WeakTerms> {
    check_p(p)?;
    if !(t_scale >= 1.0 && t_scale.is_finite()) {
        return Err(domain(format!("T must be at least 1, got {t_scale}")));
    }
    let dual = dual_exponent(p);
    let ell = 2.0 * dual;
    let eta = |t: f64| CutoffProfile::ETA.derivatives(t / t_scale);
    let pts = [0.0, 0.5 * t_scale, t_scale];
    let time_derivative = integrate_pieces(|t| {
        let (e, de, _) = eta(t);
        e.powf(dual) * (de.abs() / t_scale).powf(dual)
    }, &pts, tol())?;
    let time_mass = integrate_pieces(|t| eta(t).0.powf(ell), &pts, tol())?;
    let s = spatial(t_scale, dual, dims)?;
    let terms = [
        time_derivative * s.mass,
        time_mass * s.grad_x,
        time_mass * s.lap_x,
        time_mass * s.grad_y,
        time_mass * s.lap_y,
    ];
    Ok(WeakTerms { total: terms.iter().sum(), terms })
}

/// The two groups on the right of the weak estimate with the fractional
/// time weight `φ₃ = (1 - t/T)₊`: group A pairs the order-`1+α` time factor
/// with `∫ φ₁^ℓ φ₂^ℓ`, group B pairs the order-`α` factor with the four
/// spatial derivative terms. Space is scaled by R, time by T, `α = 1 - γ`.
pub fn weak_rhs_t2(t_scale: f64, r_scale: f64, p: f64, gamma: f64, dims: GrushinDims) -> Result<WeakPair> {
    check_p(p)?;
    if !(t_scale >= 1.0 && r_scale >= 1.0 && t_scale.is_finite() && r_scale.is_finite()) {
        return Err(domain(format!("T and R must be at least 1, got {t_scale}, {r_scale}")));
    }
    let alpha = FracOrder::from_memory_exponent(gamma)?;
    let dual = dual_exponent(p);
    let weight = WeightW1::new(t_scale, 2.0 * dual)?;
    let time_a = w1_dual_power_integral(&weight, 1, alpha, p)?.value;
    let time_b = w1_dual_power_integral(&weight, 0, alpha, p)?.value;
    let s = spatial(r_scale, dual, dims)?;
    Ok(WeakPair {
        term_a: time_a * s.mass,
        term_b: time_b * (s.grad_x + s.lap_x + s.grad_y + s.lap_y),
    })
}

/// Critical exponents for the local and memory nonlinearities.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CriticalExponents {
    /// `1 + 2/(N+2k)`.
    pub p_c1: f64,
    /// `1 + 2(2-γ)/(N+2k-2+2γ)`.
    pub p_0: f64,
    /// `1/γ`, or `+∞` at γ = 0.
    pub inv_gamma: f64,
    /// `max(p_0, 1/γ)`.
    pub p_c2: f64,
}

pub fn critical_exponents(dims: GrushinDims, gamma: f64) -> Result<CriticalExponents> {
    if !(0.0..1.0).contains(&gamma) {
        return Err(domain(format!("γ must lie in [0, 1), got {gamma}")));
    }
    let q = dims.homogeneous_dimension() as f64;
    let p_c1 = 1.0 + 2.0 / q;
    let p_0 = 1.0 + 2.0 * (2.0 - gamma) / (q - 2.0 + 2.0 * gamma);
    let inv_gamma = if gamma == 0.0 { f64::INFINITY } else { 1.0 / gamma };
    Ok(CriticalExponents { p_c1, p_0, inv_gamma, p_c2: p_0.max(inv_gamma) })
}

/// Least-squares slope of `ln y` against `ln x`.
pub fn loglog_slope(xs: &[f64], ys: &[f64]) -> Result<f64> {
    if xs.len() != ys.len() || xs.len() < 2 {
        return Err(domain("slope fit needs at least two paired samples"));
    }
    if xs.iter().chain(ys).any(|v| !(*v > 0.0)) {
        return Err(domain("slope fit needs positive samples"));
    }
    let lx: Vec<f64> = xs.iter().map(|v| v.ln()).collect();
    let ly: Vec<f64> = ys.iter().map(|v| v.ln()).collect();
    let n = lx.len() as f64;
    let mx = lx.iter().sum::<f64>() / n;
    let my = ly.iter().sum::<f64>() / n;
    let sxy: f64 = lx.iter().zip(&ly).map(|(x, y)| (x - mx) * (y - my)).sum();
    let sxx: f64 = lx.iter().map(|x| (x - mx) * (x - mx)).sum();
    if sxx == 0.0 {
        return Err(domain("slope fit needs distinct abscissae"));
    }
    Ok(sxy / sxx)
}

/// One row of a slope report.
#[derive(Debug, Clone, PartialEq)]
pub struct SlopeRow {
    pub t: f64,
    pub r: f64,
    pub p: f64,
    pub gamma: f64,
    pub term: String,
    pub value: f64,
    /// Fitted slope over the window the row belongs to, e.g. `16..1024`.
    pub slope_window: String,
}

pub fn write_slope_csv<W: Write>(rows: &[SlopeRow], mut w: W) -> io::Result<()> {
    writeln!(w, "T,R,p,gamma,term,value,slope_window")?;
    for r in rows {
        writeln!(w, "{},{},{},{},{},{},{}", r.t, r.r, r.p, r.gamma, r.term, r.value, r.slope_window)?;
    }
    Ok(())
}
