//! Time integration of the memory equation on a bi-radial grid.
//!
//! Each step solves
//!
//! ```text
//! (I - dt L) u^{n+1} = u^n + dt [κ₁ M(t_n) + κ₂ |u^n|^{p₂-1} u^n],
//! M(t_n) = ∫₀^{t_n} (t_n - s)^{-γ} |u|^{p₁-1} u(s) ds,
//! ```
//!
//! with the diffusion implicit and both nonlinearities explicit. The memory
//! density is piecewise constant between accepted steps and integrated
//! exactly against the kernel on the realised (possibly nonuniform)
//! schedule.

mod linear;
mod memory;

pub use linear::{solve_implicit, RELATIVE_TOLERANCE};
pub use memory::{kernel_weights, uniform_kernel_weights, MemoryLedger, MemoryMode, SoeKernel};

use crate::error::{config, Error, Result};
use crate::grushin::{assemble, biradial_integral, BiRadialGrid, Field, GrushinDims, OperatorMatrix};
use serde::{Deserialize, Serialize};
use std::collections::VecDeque;
use std::io::{self, Write};

/// Exact-mode ledgers larger than this are refused.
pub const EXACT_LEDGER_BUDGET_BYTES: u128 = 4 << 30;

/// Consecutive growing steps required before a dt underflow counts as blow-up.
pub const GROWTH_WINDOW: usize = 10;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct GridSpec {
    pub r_max: f64,
    pub s_max: f64,
    pub n_r: usize,
    pub n_s: usize,
}

impl GridSpec {
    pub fn build(&self, dims: GrushinDims) -> Result<BiRadialGrid> {
        BiRadialGrid::new(dims, self.r_max, self.s_max, self.n_r, self.n_s)
    }
}

/// Named initial profiles, functions of `(|x|, |y|)`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case", deny_unknown_fields)]
pub enum InitialData {
    /// `amplitude · exp(-(r² + s²)/width²)`.
    GaussianBump { amplitude: f64, width: f64 },
    /// `amplitude` on `r² + s² ≤ radius²`, zero outside.
    Plateau { amplitude: f64, radius: f64 },
}

impl InitialData {
    pub fn eval(&self, r: f64, s: f64) -> f64 {
        match *self {
            Self::GaussianBump { amplitude, width } => amplitude * (-(r * r + s * s) / (width * width)).exp(),
            Self::Plateau { amplitude, radius } => {
                if r * r + s * s <= radius * radius {
                    amplitude
                } else {
                    0.0
                }
            }
        }
    }

    pub fn amplitude(&self) -> f64 {
        match *self {
            Self::GaussianBump { amplitude, .. } | Self::Plateau { amplitude, .. } => amplitude,
        }
    }

    pub fn with_amplitude(self, amplitude: f64) -> Self {
        match self {
            Self::GaussianBump { width, .. } => Self::GaussianBump { amplitude, width },
            Self::Plateau { radius, .. } => Self::Plateau { amplitude, radius },
        }
    }

    fn validate(&self) -> Result<()> {
        let (a, scale) = match *self {
            Self::GaussianBump { amplitude, width } => (amplitude, width),
            Self::Plateau { amplitude, radius } => (amplitude, radius),
        };
        if !a.is_finite() || !(scale > 0.0 && scale.is_finite()) {
            return Err(config(format!("initial data needs finite amplitude and positive scale, got {self:?}")));
        }
        Ok(())
    }
}

fn default_threshold() -> f64 {
    1e10
}

fn default_dt_min() -> f64 {
    1e-12
}

fn default_true() -> bool {
    true
}

/// Full description of one simulation.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SimConfig {
    pub dims: GrushinDims,
    pub grid: GridSpec,
    pub gamma: f64,
    pub p1: f64,
    pub p2: f64,
    pub kappa1: f64,
    pub kappa2: f64,
    pub initial: InitialData,
    pub dt: f64,
    pub horizon: f64,
    #[serde(default = "default_threshold")]
    pub blowup_threshold: f64,
    #[serde(default = "default_dt_min")]
    pub dt_min: f64,
    #[serde(default)]
    pub memory: MemoryMode,
    /// Switches the Grushin diffusion off (pointwise ODE per node).
    #[serde(default = "default_true")]
    pub diffusion: bool,
}

impl SimConfig {
    pub fn validate(&self) -> Result<BiRadialGrid> {
        let grid = self.grid.build(self.dims)?;
        if !(0.0..1.0).contains(&self.gamma) {
            return Err(config(format!("gamma must lie in [0, 1), got {}", self.gamma)));
        }
        if !(self.p1 > 1.0 && self.p2 > 1.0) || !self.p1.is_finite() || !self.p2.is_finite() {
            return Err(config(format!("p1, p2 must exceed 1, got {}, {}", self.p1, self.p2)));
        }
        if !self.kappa1.is_finite() || !self.kappa2.is_finite() {
            return Err(config("kappa1, kappa2 must be finite"));
        }
        if !(self.dt > 0.0 && self.horizon > 0.0 && self.dt <= self.horizon) || !self.horizon.is_finite() {
            return Err(config(format!("need 0 < dt <= horizon, got dt={}, horizon={}", self.dt, self.horizon)));
        }
        if !(self.dt_min > 0.0) {
            return Err(config("dt_min must be positive"));
        }
        self.initial.validate()?;
        let initial_sup = Field::from_fn(&grid, |r, s| self.initial.eval(r, s)).sup_norm();
        if !(self.blowup_threshold > initial_sup) {
            return Err(config(format!(
                "blow-up threshold {} must exceed the initial sup-norm {initial_sup}",
                self.blowup_threshold
            )));
        }
        if self.kappa1 != 0.0 && self.gamma > 0.0 && self.memory == MemoryMode::Exact {
            let steps = (self.horizon / self.dt).ceil() as usize + 1;
            let bytes = MemoryLedger::exact_footprint(steps, grid.len());
            if bytes > EXACT_LEDGER_BUDGET_BYTES {
                return Err(config(format!(
                    "exact memory ledger would need ~{} MiB; use memory mode \"soe\"",
                    bytes >> 20
                )));
            }
        }
        Ok(grid)
    }
}

/// `|u|^{p-1} u`.
pub(crate) fn signed_pow(u: f64, p: f64) -> f64 {
    if u >= 0.0 {
        u.powf(p)
    } else {
        -(-u).powf(p)
    }
}

/// `(sup |u|, ∫ |u|)` with the bi-radial measure.
pub fn norms(u: &Field) -> (f64, f64) {
    let abs = Field::from_values(u.grid(), u.values().iter().map(|v| v.abs()).collect())
        .expect("absolute values of a finite field are finite");
    (u.sup_norm(), biradial_integral(&abs))
}

/// Mutable state of one run: field, clock, memory ledger.
#[derive(Debug, Clone)]
pub struct Simulation {
    config: SimConfig,
    operator: Option<OperatorMatrix>,
    field: Field,
    ledger: Option<MemoryLedger>,
    time: f64,
    steps: usize,
}

impl Simulation {
    pub fn new(config: SimConfig) -> Result<Self> {
        let grid = config.validate()?;
        let operator = config.diffusion.then(|| assemble(&grid));
        let field = Field::from_fn(&grid, |r, s| config.initial.eval(r, s));
        let ledger = if config.kappa1 != 0.0 {
            Some(MemoryLedger::new(config.memory, config.gamma, config.dt, config.horizon, grid.len())?)
        } else {
            None
        };
        Ok(Self { config, operator, field, ledger, time: 0.0, steps: 0 })
    }

    /// Starts from an explicit field instead of the configured profile.
    pub fn with_field(config: SimConfig, field: Field) -> Result<Self> {
        let mut sim = Self::new(config)?;
        if field.grid() != sim.field.grid() {
            return Err(crate::error::contract("initial field is on a different grid"));
        }
        sim.field = field;
        Ok(sim)
    }

    pub fn config(&self) -> &SimConfig {
        &self.config
    }

    pub fn field(&self) -> &Field {
        &self.field
    }

    pub fn time(&self) -> f64 {
        self.time
    }

    pub fn steps(&self) -> usize {
        self.steps
    }

    /// Candidate `u^{n+1}` for step size `dt`, without committing it. A
    /// non-finite candidate is returned as-is (the caller treats it as a
    /// blow-up signal); linear-solver failure is an error.
    pub fn trial(&self, dt: f64) -> Result<Vec<f64>> {
        let cfg = &self.config;
        let u = self.field.values();
        let mut rhs = vec![0.0; u.len()];
        if let Some(ledger) = &self.ledger {
            ledger.memory_term(self.steps, &mut rhs)?;
            rhs.iter_mut().for_each(|m| *m *= cfg.kappa1);
        }
        if cfg.kappa2 != 0.0 {
            rhs.iter_mut().zip(u).for_each(|(acc, &v)| *acc += cfg.kappa2 * signed_pow(v, cfg.p2));
        }
        rhs.iter_mut().zip(u).for_each(|(acc, &v)| *acc = v + dt * *acc);
        if rhs.iter().any(|v| !v.is_finite()) {
            return Ok(rhs);
        }
        match &self.operator {
            Some(op) => {
                let mut next = u.to_vec();
                solve_implicit(op, dt, &rhs, &mut next)?;
                Ok(next)
            }
            None => Ok(rhs),
        }
    }

    /// Commits `candidate` as the state at `time + dt`.
    pub fn accept(&mut self, candidate: Vec<f64>, dt: f64) -> Result<()> {
        let next = Field::from_values(self.field.grid(), candidate)?;
        if let Some(ledger) = &mut self.ledger {
            let g: Vec<f64> = self.field.values().iter().map(|&v| signed_pow(v, self.config.p1)).collect();
            ledger.record(&g, self.time + dt)?;
        }
        self.field = next;
        self.time += dt;
        self.steps += 1;
        Ok(())
    }

    /// One unconditional step of size `dt`.
    pub fn step(&mut self, dt: f64) -> Result<()> {
        let next = self.trial(dt)?;
        self.accept(next, dt)
    }
}

#[derive(Debug, Clone, PartialEq)]
pub enum OutcomeKind {
    BlownUp { t_star: f64 },
    GlobalToHorizon,
    Undecided { reason: String },
}

impl OutcomeKind {
    pub fn label(&self) -> &'static str {
        match self {
            Self::BlownUp { .. } => "BlownUp",
            Self::GlobalToHorizon => "GlobalToHorizon",
            Self::Undecided { .. } => "Undecided",
        }
    }

    pub fn t_star(&self) -> Option<f64> {
        match self {
            Self::BlownUp { t_star } => Some(*t_star),
            _ => None,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SeriesPoint {
    pub t: f64,
    pub sup_norm: f64,
    pub l1_norm: f64,
    pub dt: f64,
}

#[derive(Debug, Clone)]
pub struct Outcome {
    pub kind: OutcomeKind,
    pub series: Vec<SeriesPoint>,
    pub final_field: Option<Field>,
}

impl Outcome {
    pub fn write_series_csv<W: Write>(&self, mut w: W) -> io::Result<()> {
        writeln!(w, "t,sup_norm,l1_norm,dt")?;
        for p in &self.series {
            writeln!(w, "{},{},{},{}", p.t, p.sup_norm, p.l1_norm, p.dt)?;
        }
        Ok(())
    }
}

/// Writes `r,s,u` rows in storage order.
pub fn write_field_csv<W: Write>(field: &Field, mut w: W) -> io::Result<()> {
    writeln!(w, "r,s,u")?;
    let g = field.grid();
    for (i, j, r, s) in g.nodes() {
        writeln!(w, "{},{},{}", r, s, field.at(i, j))?;
    }
    Ok(())
}

/// Runs to the horizon, a threshold crossing or a dt underflow.
///
/// dt is halved (and the step retried) whenever the sup-norm more than
/// doubles in one step; it is never increased again.
pub fn run(config: SimConfig) -> Result<Outcome> {
    let mut sim = Simulation::new(config)?;
    let cfg = sim.config.clone();
    let mut dt = cfg.dt;
    let (sup0, l10) = norms(&sim.field);
    let mut series = vec![SeriesPoint { t: 0.0, sup_norm: sup0, l1_norm: l10, dt }];
    let mut recent: VecDeque<(f64, f64)> = VecDeque::from([(sup0, l10)]);
    let end = cfg.horizon * (1.0 - 1e-12);

    let kind = loop {
        if sim.time >= end {
            break OutcomeKind::GlobalToHorizon;
        }
        let step_dt = dt.min(cfg.horizon - sim.time);
        let candidate = match sim.trial(step_dt) {
            Ok(c) => c,
            Err(Error::Solver { iterations, residual }) => {
                break OutcomeKind::Undecided {
                    reason: format!("linear solver stalled at t={} ({iterations} iterations, residual {residual:e})", sim.time),
                }
            }
            Err(e) => return Err(e),
        };
        let current_sup = sim.field.sup_norm();
        let finite = candidate.iter().all(|v| v.is_finite());
        let next_sup = if finite { candidate.iter().fold(0.0f64, |m, v| m.max(v.abs())) } else { f64::INFINITY };
        if next_sup > 2.0 * current_sup && current_sup > 0.0 || !finite {
            dt *= 0.5;
            if dt < cfg.dt_min {
                break if growing(&recent) {
                    OutcomeKind::BlownUp { t_star: sim.time }
                } else {
                    OutcomeKind::Undecided { reason: format!("dt fell below {} at t={} without sustained growth", cfg.dt_min, sim.time) }
                };
            }
            continue;
        }
        sim.accept(candidate, step_dt)?;
        let (sup, l1) = norms(&sim.field);
        series.push(SeriesPoint { t: sim.time, sup_norm: sup, l1_norm: l1, dt: step_dt });
        recent.push_back((sup, l1));
        if recent.len() > GROWTH_WINDOW + 1 {
            recent.pop_front();
        }
        if sup > cfg.blowup_threshold {
            break OutcomeKind::BlownUp { t_star: sim.time };
        }
    };
    Ok(Outcome { kind, series, final_field: Some(sim.field) })
}

/// Both norms strictly increased over each of the last [`GROWTH_WINDOW`] steps.
fn growing(recent: &VecDeque<(f64, f64)>) -> bool {
    recent.len() == GROWTH_WINDOW + 1
        && recent.iter().zip(recent.iter().skip(1)).all(|(a, b)| b.0 > a.0 && b.1 > a.1)
}

/// Settings for a pure-diffusion decay fit.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct DecaySetup {
    pub dims: GrushinDims,
    pub grid: GridSpec,
    /// Width of the Gaussian initial bump (amplitude 1).
    pub width: f64,
    /// Fit window.
    pub t_start: f64,
    pub t_end: f64,
    /// Step is `max(dt_floor, dt_rel · t)`.
    pub dt_floor: f64,
    pub dt_rel: f64,
}

impl DecaySetup {
    pub fn standard(dims: GrushinDims) -> Self {
        Self {
            dims,
            grid: GridSpec { r_max: 20.0, s_max: 100.0, n_r: 80, n_s: 200 },
            width: 0.5,
            t_start: 1.0,
            t_end: 50.0,
            dt_floor: 0.02,
            dt_rel: 0.02,
        }
    }

    /// `-(N+2k)/2`.
    pub fn expected_slope(&self) -> f64 {
        -(self.dims.homogeneous_dimension() as f64) / 2.0
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct DecayFit {
    pub slope: f64,
    pub expected: f64,
    /// `(t, sup-norm)` at every step inside the fit window.
    pub samples: Vec<(f64, f64)>,
}

/// Runs `u_t = Δ_G u` from a Gaussian bump with steps that grow linearly in
/// t and fits the log-log slope of the sup-norm over the window.
pub fn diffusion_decay(setup: &DecaySetup) -> Result<DecayFit> {
    if !(setup.t_start > 0.0 && setup.t_end > setup.t_start && setup.dt_floor > 0.0 && setup.dt_rel >= 0.0) {
        return Err(config("decay fit needs 0 < t_start < t_end and positive steps"));
    }
    let cfg = SimConfig {
        dims: setup.dims,
        grid: setup.grid,
        gamma: 0.0,
        p1: 2.0,
        p2: 2.0,
        kappa1: 0.0,
        kappa2: 0.0,
        initial: InitialData::GaussianBump { amplitude: 1.0, width: setup.width },
        dt: setup.dt_floor.min(setup.t_end),
        horizon: setup.t_end,
        blowup_threshold: default_threshold(),
        dt_min: default_dt_min(),
        memory: MemoryMode::Exact,
        diffusion: true,
    };
    let mut sim = Simulation::new(cfg)?;
    let mut samples = Vec::new();
    let end = setup.t_end * (1.0 - 1e-12);
    while sim.time() < end {
        let dt = (setup.dt_rel * sim.time()).max(setup.dt_floor).min(setup.t_end - sim.time());
        sim.step(dt)?;
        if sim.time() >= setup.t_start * (1.0 - 1e-12) {
            samples.push((sim.time(), sim.field().sup_norm()));
        }
    }
    let (ts, sups): (Vec<f64>, Vec<f64>) = samples.iter().copied().unzip();
    let slope = crate::testfn::loglog_slope(&ts, &sups)?;
    Ok(DecayFit { slope, expected: setup.expected_slope(), samples })
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;

    fn base(kappa1: f64, kappa2: f64, amplitude: f64) -> SimConfig {
        SimConfig {
            dims: GrushinDims::new(1, 1).unwrap(),
            grid: GridSpec { r_max: 6.0, s_max: 8.0, n_r: 24, n_s: 32 },
            gamma: 0.5,
            p1: 2.0,
            p2: 2.0,
            kappa1,
            kappa2,
            initial: InitialData::GaussianBump { amplitude, width: 1.0 },
            dt: 0.01,
            horizon: 0.5,
            blowup_threshold: 1e10,
            dt_min: 1e-12,
            memory: MemoryMode::Exact,
            diffusion: true,
        }
    }

    #[test]
    fn config_validation() {
        let mut c = base(0.0, 1.0, 1.0);
        assert!(c.validate().is_ok());
        c.gamma = 1.0;
        assert!(c.validate().is_err());
        let mut c = base(0.0, 1.0, 1.0);
        c.p2 = 1.0;
        assert!(c.validate().is_err());
        let mut c = base(0.0, 1.0, 1.0);
        c.dt = 1.0;
        assert!(c.validate().is_err());
        let mut c = base(0.0, 1.0, 1.0);
        c.blowup_threshold = 0.5;
        assert!(c.validate().is_err());
        let mut c = base(1.0, 0.0, 1.0);
        c.grid = GridSpec { r_max: 40.0, s_max: 40.0, n_r: 1000, n_s: 1000 };
        c.dt = 1e-4;
        c.horizon = 100.0;
        assert!(matches!(c.validate(), Err(Error::Config(msg)) if msg.contains("soe")));
    }

    #[test]
    fn config_json_round_trip_and_unknown_keys() {
        let c = base(1.0, 0.0, 1.0);
        let text = serde_json::to_string(&c).unwrap();
        let back: SimConfig = serde_json::from_str(&text).unwrap();
        assert_eq!(c, back);
        let mut value: serde_json::Value = serde_json::from_str(&text).unwrap();
        value["bogus"] = serde_json::json!(1);
        assert!(serde_json::from_value::<SimConfig>(value).is_err());
    }

    #[test]
    fn zero_data_stays_zero() {
        let mut c = base(1.0, 1.0, 0.0);
        c.horizon = 0.2;
        let out = run(c).unwrap();
        assert_eq!(out.kind, OutcomeKind::GlobalToHorizon);
        assert!(out.series.iter().all(|p| p.sup_norm == 0.0 && p.l1_norm == 0.0));
        assert_relative_eq!(out.series.last().unwrap().t, 0.2, max_relative = 1e-12);
    }

    #[test]
    fn pure_diffusion_is_a_sup_contraction() {
        let c = base(0.0, 0.0, 1.0);
        let grid = c.validate().unwrap();
        // Rough nonnegative data (deterministic pseudo-random).
        let mut state = 0x2545_f491_4f6c_dd1du64;
        let values: Vec<f64> = (0..grid.len())
            .map(|_| {
                state ^= state << 13;
                state ^= state >> 7;
                state ^= state << 17;
                (state >> 11) as f64 / (1u64 << 53) as f64
            })
            .collect();
        let mut sim = Simulation::with_field(c, Field::from_values(&grid, values).unwrap()).unwrap();
        let mut prev = sim.field().sup_norm();
        for _ in 0..20 {
            sim.step(0.05).unwrap();
            let sup = sim.field().sup_norm();
            assert!(sup <= prev * (1.0 + 1e-12));
            assert!(sim.field().values().iter().all(|&v| v >= -1e-12));
            prev = sup;
        }
    }

    #[test]
    fn comparison_principle_on_matched_schedule() {
        let lo = base(1.0, 1.0, 0.5);
        let hi = base(1.0, 1.0, 0.8);
        let mut a = Simulation::new(lo).unwrap();
        let mut b = Simulation::new(hi).unwrap();
        for _ in 0..30 {
            a.step(0.01).unwrap();
            b.step(0.01).unwrap();
            // Slack covers the linear-solver tolerance.
            let slack = 1e-9 * b.field().sup_norm();
            for (x, y) in a.field().values().iter().zip(b.field().values()) {
                assert!(x <= &(y + slack), "{x} > {y}");
                assert!(*x >= -1e-12);
            }
        }
    }

    #[test]
    fn local_reaction_blows_up() {
        let mut c = base(0.0, 1.0, 4.0);
        c.horizon = 5.0;
        let out = run(c).unwrap();
        assert!(matches!(out.kind, OutcomeKind::BlownUp { .. }), "{:?}", out.kind);
        // Pointwise ODE u' = u² from 4 blows up at 0.25; diffusion only delays it.
        assert!(out.kind.t_star().unwrap() > 0.25);
    }

    #[test]
    fn norms_homogeneous() {
        let c = base(0.0, 0.0, 1.0);
        let grid = c.validate().unwrap();
        let u = Field::from_fn(&grid, |r, s| (-(r * r + s)).exp());
        let (s1, l1) = norms(&u);
        let (s2, l2) = norms(&u.scaled(2.0));
        assert_relative_eq!(s2, 2.0 * s1);
        assert_relative_eq!(l2, 2.0 * l1, max_relative = 1e-14);
        assert_eq!(norms(&Field::zeros(&grid)), (0.0, 0.0));
    }

    #[test]
    fn decay_on_a_small_grid() {
        let mut setup = DecaySetup::standard(GrushinDims::new(1, 1).unwrap());
        setup.grid = GridSpec { r_max: 12.0, s_max: 48.0, n_r: 24, n_s: 48 };
        setup.t_end = 10.0;
        setup.dt_rel = 0.1;
        let fit = diffusion_decay(&setup).unwrap();
        assert!(fit.slope < -1.0 && fit.slope > -2.0, "{}", fit.slope);
        assert!(fit.samples.windows(2).all(|w| w[1].1 < w[0].1));
    }

    #[test]
    fn csv_headers() {
        let out = run(base(0.0, 0.0, 0.0)).unwrap();
        let mut buf = Vec::new();
        out.write_series_csv(&mut buf).unwrap();
        assert!(String::from_utf8(buf).unwrap().starts_with("t,sup_norm,l1_norm,dt\n0,0,0,0.01\n"));
        let mut buf = Vec::new();
        write_field_csv(out.final_field.as_ref().unwrap(), &mut buf).unwrap();
        let text = String::from_utf8(buf).unwrap();
        assert!(text.starts_with("r,s,u\n0.125,0.125,0\n"));
        assert_eq!(text.lines().count(), 24 * 32 + 1);
    }
}
