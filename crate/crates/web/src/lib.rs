//! wasm-bindgen exports behind `www/index.html`.

use gfl_core::grushin::GrushinDims;
use gfl_core::memsolver::{run, GridSpec, InitialData, MemoryMode, SimConfig};
use gfl_core::odereduce::{run_ode, OdeConfig};
use gfl_core::testfn::critical_exponents;
use wasm_bindgen::prelude::*;

fn js_err(e: impl std::fmt::Display) -> JsError {
    JsError::new(&e.to_string())
}

/// A computed curve plus its outcome.
#[wasm_bindgen]
pub struct Trajectory {
    times: Vec<f64>,
    values: Vec<f64>,
    outcome: String,
    t_star: Option<f64>,
}

#[wasm_bindgen]
impl Trajectory {
    pub fn times(&self) -> Vec<f64> {
        self.times.clone()
    }

    pub fn values(&self) -> Vec<f64> {
        self.values.clone()
    }

    pub fn outcome(&self) -> String {
        self.outcome.clone()
    }

    /// Blow-up time, or NaN.
    pub fn t_star(&self) -> f64 {
        self.t_star.unwrap_or(f64::NAN)
    }
}

/// `f' + a f = b ∫ (t-s)^{-γ} f^{p1} ds + c f^{p2}`, compressed memory.
#[wasm_bindgen]
#[allow(clippy::too_many_arguments)]
pub fn ode_trajectory(a: f64, b: f64, c: f64, gamma: f64, p1: f64, p2: f64, f0: f64, horizon: f64) -> Result<Trajectory, JsError> {
    let dt = horizon / 4000.0;
    let cfg = OdeConfig {
        c,
        p2,
        memory: if gamma > 0.0 { MemoryMode::Soe { modes: 32 } } else { MemoryMode::Exact },
        ..OdeConfig::memory_only(a, b, gamma, p1, f0, dt, horizon)
    };
    let out = run_ode(&cfg).map_err(js_err)?;
    Ok(Trajectory {
        times: out.series.iter().map(|p| p.t).collect(),
        values: out.series.iter().map(|p| p.f).collect(),
        outcome: out.kind.label().into(),
        t_star: out.kind.t_star(),
    })
}

/// `[p_c1, p_0, 1/γ, p_c2]` for each γ in `gammas`, flattened.
#[wasm_bindgen]
pub fn exponent_curves(n: u32, k: u32, gammas: &[f64]) -> Result<Vec<f64>, JsError> {
    let dims = GrushinDims::new(n, k).map_err(js_err)?;
    let mut out = Vec::with_capacity(4 * gammas.len());
    for &g in gammas {
        let c = critical_exponents(dims, g).map_err(js_err)?;
        out.extend([c.p_c1, c.p_0, c.inv_gamma, c.p_c2]);
    }
    Ok(out)
}

/// Sup-norm history of the PDE on `ℝ × ℝ` from a Gaussian bump, on a
/// deliberately small grid.
#[wasm_bindgen]
pub fn pde_sup_series(kappa1: f64, kappa2: f64, gamma: f64, p: f64, amplitude: f64, horizon: f64) -> Result<Trajectory, JsError> {
    let cfg = SimConfig {
        dims: GrushinDims::new(1, 1).map_err(js_err)?,
        grid: GridSpec { r_max: 12.0, s_max: 36.0, n_r: 24, n_s: 36 },
        gamma,
        p1: p,
        p2: p,
        kappa1,
        kappa2,
        initial: InitialData::GaussianBump { amplitude, width: 1.0 },
        dt: 0.02,
        horizon,
        blowup_threshold: 1e8,
        dt_min: 1e-10,
        memory: if gamma > 0.0 { MemoryMode::Soe { modes: 24 } } else { MemoryMode::Exact },
        diffusion: true,
    };
    let out = run(cfg).map_err(js_err)?;
    Ok(Trajectory {
        times: out.series.iter().map(|p| p.t).collect(),
        values: out.series.iter().map(|p| p.sup_norm).collect(),
        outcome: out.kind.label().into(),
        t_star: out.kind.t_star(),
    })
}
