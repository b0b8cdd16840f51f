//! Product-integration weights for the kernel `(t-s)^{-γ}` and the ledger
//! that carries the history of `g = |u|^{p₁-1} u`.

use crate::error::{config, contract, Result};
use crate::special::gamma;
use serde::{Deserialize, Serialize};

/// Weights `w_j = [(t_n - t_j)^{1-γ} - (t_n - t_{j+1})^{1-γ}] / (1-γ)`,
/// `j = 0..n`, for a density that is constant on each `[t_j, t_{j+1})`.
/// `times` holds `t_0 < … < t_n`; the result has `n` entries.
pub fn kernel_weights(times: &[f64], gamma: f64) -> Vec<f64> {
    let Some(&t_n) = times.last() else {
        return Vec::new();
    };
    let a = 1.0 - gamma;
    times
        .windows(2)
        .map(|w| ((t_n - w[0]).powf(a) - (t_n - w[1]).powf(a)) / a)
        .collect()
}

/// [`kernel_weights`] on the uniform schedule `t_j = j dt`, `j = 0..=n`.
pub fn uniform_kernel_weights(n: usize, dt: f64, gamma: f64) -> Vec<f64> {
    let times: Vec<f64> = (0..=n).map(|j| j as f64 * dt).collect();
    kernel_weights(&times, gamma)
}

#[derive(Debug, Clone, Copy, Default, PartialEq, Serialize, Deserialize)]
#[serde(tag = "mode", rename_all = "snake_case", deny_unknown_fields)]
pub enum MemoryMode {
    /// Every past snapshot is kept; O(n) work per step.
    #[default]
    Exact,
    /// Sum-of-exponentials compression with `modes` auxiliary fields.
    Soe { modes: usize },
}


/// Exponential modes `Σ_m w_m e^{-λ_m t} ≈ t^{-γ}` on `[dt, horizon]`, from
/// the trapezoidal rule in `ln λ` applied to
/// `t^{-γ} = Γ(γ)^{-1} ∫₀^∞ λ^{γ-1} e^{-λt} dλ`.
#[derive(Debug, Clone, PartialEq)]
pub struct SoeKernel {
    pub rates: Vec<f64>,
    pub weights: Vec<f64>,
}

impl SoeKernel {
    pub const MIN_MODES: usize = 8;

    pub fn new(gamma: f64, dt: f64, horizon: f64, modes: usize) -> Result<Self> {
        if modes < Self::MIN_MODES {
            return Err(config(format!("sum-of-exponentials needs at least {} modes, got {modes}", Self::MIN_MODES)));
        }
        if !(gamma > 0.0 && gamma < 1.0) {
            return Err(config(format!("sum-of-exponentials kernel needs 0 < γ < 1, got {gamma}")));
        }
        // The rate band [1/horizon, 1/dt] is widened so the truncated top of
        // the λ-integral stays below the trapezoid error.
        let lo = (1e-3 / horizon).ln();
        let hi = (30.0 / dt).ln();
        let nodes = modes - TAIL.len() - 1;
        let step = (hi - lo) / (nodes - 1) as f64;
        let norm = gamma_inv(gamma);
        let mut rates = Vec::with_capacity(modes);
        let mut weights = Vec::with_capacity(modes);
        for m in 0..nodes {
            let lambda = (lo + m as f64 * step).exp();
            rates.push(lambda);
            weights.push(step * lambda.powf(gamma) * norm);
        }
        // Below the first trapezoid cell, λ = c v^{1/γ} turns
        // ∫₀^c λ^{γ-1} e^{-λt} dλ into (c^γ/γ) ∫₀¹ e^{-c t v^{1/γ}} dv.
        let cut = (lo - 0.5 * step).exp();
        for (v, w) in TAIL {
            rates.push(cut * v.powf(1.0 / gamma));
            weights.push(w * cut.powf(gamma) / gamma * norm);
        }
        // Euler–Maclaurin correction for the midpoint sum starting at the cut.
        rates.push(cut);
        weights.push(-step * step / 24.0 * gamma * cut.powf(gamma) * norm);
        Ok(Self { rates, weights })
    }

    pub fn eval(&self, t: f64) -> f64 {
        self.rates.iter().zip(&self.weights).map(|(l, w)| w * (-l * t).exp()).sum()
    }

    pub fn len(&self) -> usize {
        self.rates.len()
    }

    pub fn is_empty(&self) -> bool {
        self.rates.is_empty()
    }
}

/// Three-point Gauss–Legendre on [0, 1].
const TAIL: [(f64, f64); 3] = [
    (0.112_701_665_379_258_31, 5.0 / 18.0),
    (0.5, 8.0 / 18.0),
    (0.887_298_334_620_741_7, 5.0 / 18.0),
];

fn gamma_inv(g: f64) -> f64 {
    1.0 / gamma(g)
}

#[derive(Debug, Clone)]
enum Store {
    /// Snapshots `g_j` held on `[t_j, t_{j+1})`, with every `t_j`.
    Exact { times: Vec<f64>, snapshots: Vec<Vec<f64>> },
    /// γ = 0: the kernel is 1 and the memory is a running integral.
    Running { integral: Vec<f64> },
    /// History before the latest interval, per mode, plus that interval's density.
    Soe { kernel: SoeKernel, history: Vec<Vec<f64>>, latest: Option<Vec<f64>> },
}

/// History of `g(s) = |u|^{p₁-1} u(s)` at accepted steps.
#[derive(Debug, Clone)]
pub struct MemoryLedger {
    gamma: f64,
    nodes: usize,
    steps: usize,
    /// Start of the latest recorded interval and the current time.
    previous: f64,
    current: f64,
    store: Store,
}

impl MemoryLedger {
    pub fn new(mode: MemoryMode, gamma: f64, dt: f64, horizon: f64, nodes: usize) -> Result<Self> {
        if !(0.0..1.0).contains(&gamma) {
            return Err(config(format!("γ must lie in [0, 1), got {gamma}")));
        }
        let store = if gamma == 0.0 {
            Store::Running { integral: vec![0.0; nodes] }
        } else {
            match mode {
                MemoryMode::Exact => Store::Exact { times: vec![0.0], snapshots: Vec::new() },
                MemoryMode::Soe { modes } => {
                    let kernel = SoeKernel::new(gamma, dt, horizon, modes)?;
                    let history = vec![vec![0.0; nodes]; kernel.len()];
                    Store::Soe { kernel, history, latest: None }
                }
            }
        };
        Ok(Self { gamma, nodes, steps: 0, previous: 0.0, current: 0.0, store })
    }

    /// Number of accepted intervals recorded so far.
    pub fn steps(&self) -> usize {
        self.steps
    }

    pub fn current_time(&self) -> f64 {
        self.current
    }

    /// Records `g` as the density on `[current_time, t_next)`.
    pub fn record(&mut self, g: &[f64], t_next: f64) -> Result<()> {
        if g.len() != self.nodes {
            return Err(contract(format!("snapshot of {} values, ledger expects {}", g.len(), self.nodes)));
        }
        let t_now = self.current_time();
        if !(t_next > t_now) {
            return Err(contract(format!("time must advance: {t_next} after {t_now}")));
        }
        match &mut self.store {
            Store::Exact { times, snapshots } => {
                times.push(t_next);
                snapshots.push(g.to_vec());
            }
            Store::Running { integral } => {
                let dt = t_next - t_now;
                integral.iter_mut().zip(g).for_each(|(acc, v)| *acc += dt * v);
            }
            Store::Soe { kernel, history, latest } => {
                if let Some(prev) = latest.take() {
                    fold_interval(kernel, history, &prev, self.current - self.previous);
                }
                *latest = Some(g.to_vec());
            }
        }
        self.previous = t_now;
        self.current = t_next;
        self.steps += 1;
        Ok(())
    }

    /// `∫₀^{t_n} (t_n - s)^{-γ} g(s) ds` at the ledger's current time `t_n`,
    /// written into `out`. `expected_steps` must match [`Self::steps`].
    pub fn memory_term(&self, expected_steps: usize, out: &mut [f64]) -> Result<()> {
        if expected_steps != self.steps() {
            return Err(contract(format!("ledger holds {} steps, caller expects {expected_steps}", self.steps())));
        }
        if out.len() != self.nodes {
            return Err(contract("output buffer has the wrong length"));
        }
        out.fill(0.0);
        match &self.store {
            Store::Exact { times, snapshots } => {
                let a = 1.0 - self.gamma;
                let t_n = self.current;
                let mut upper = (t_n - times[0]).powf(a);
                for (t_next, g) in times[1..].iter().zip(snapshots) {
                    let lower = (t_n - t_next).powf(a);
                    let w = (upper - lower) / a;
                    upper = lower;
                    out.iter_mut().zip(g).for_each(|(o, v)| *o += w * v);
                }
            }
            Store::Running { integral } => out.copy_from_slice(integral),
            Store::Soe { kernel, history, latest } => {
                let Some(latest) = latest else {
                    return Ok(());
                };
                let span = self.current - self.previous;
                let a = 1.0 - self.gamma;
                let local = span.powf(a) / a;
                out.iter_mut().zip(latest).for_each(|(o, v)| *o = local * v);
                for ((rate, weight), y) in kernel.rates.iter().zip(&kernel.weights).zip(history) {
                    let factor = weight * (-rate * span).exp();
                    out.iter_mut().zip(y).for_each(|(o, v)| *o += factor * v);
                }
            }
        }
        Ok(())
    }

    /// Bytes held by exact-mode snapshots after `steps` steps on `nodes` nodes.
    pub fn exact_footprint(steps: usize, nodes: usize) -> u128 {
        steps as u128 * nodes as u128 * std::mem::size_of::<f64>() as u128
    }
}

/// `Y_m ← e^{-λ_m Δ} Y_m + g (1 - e^{-λ_m Δ}) / λ_m`.
fn fold_interval(kernel: &SoeKernel, history: &mut [Vec<f64>], g: &[f64], span: f64) {
    for (rate, y) in kernel.rates.iter().zip(history.iter_mut()) {
        let decay = (-rate * span).exp();
        let gain = -(-rate * span).exp_m1() / rate;
        y.iter_mut().zip(g).for_each(|(acc, v)| *acc = decay * *acc + gain * v);
    }
}
