//! The scalar reduction
//!
//! ```text
//! f'(t) + a f(t) = b ∫₀ᵗ (t-s)^{-γ} f^{p₁}(s) ds + c f^{p₂}(t),   f(0) = f0 > 0,
//! ```
//!
//! obtained by testing the PDE against a normalised positive weight, with
//! blow-up time extraction and a bisection for the least datum that blows
//! up before `t = 1`.
//!
//! Each step is exponential Euler: the linear decay is integrated exactly
//! and the forcing is frozen at `t_n`. With `a = 0` this is the forward
//! Euler update the PDE solver uses once diffusion is switched off, so the
//! two produce the same trajectory for spatially constant data.

use crate::error::{config, Result};
use crate::memsolver::{signed_pow, MemoryLedger, MemoryMode, GROWTH_WINDOW};
use serde::{Deserialize, Serialize};
use std::collections::VecDeque;
use std::io::{self, Write};

fn default_threshold() -> f64 {
    1e12
}

fn default_dt_min() -> f64 {
    1e-12
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct OdeConfig {
    pub a: f64,
    pub b: f64,
    pub c: f64,
    pub gamma: f64,
    pub p1: f64,
    pub p2: f64,
    pub f0: f64,
    pub dt: f64,
    pub horizon: f64,
    #[serde(default = "default_threshold")]
    pub blowup_threshold: f64,
    #[serde(default = "default_dt_min")]
    pub dt_min: f64,
    #[serde(default)]
    pub memory: MemoryMode,
}

impl OdeConfig {
    /// `f' + a f = b ∫ (t-s)^{-γ} f^p ds` with the remaining fields at neutral values.
    pub fn memory_only(a: f64, b: f64, gamma: f64, p: f64, f0: f64, dt: f64, horizon: f64) -> Self {
        Self {
            a,
            b,
            c: 0.0,
            gamma,
            p1: p,
            p2: 2.0,
            f0,
            dt,
            horizon,
            blowup_threshold: default_threshold(),
            dt_min: default_dt_min(),
            memory: MemoryMode::Exact,
        }
    }

    pub fn validate(&self) -> Result<()> {
        for (name, v) in [("a", self.a), ("b", self.b), ("c", self.c)] {
            if !(v >= 0.0 && v.is_finite()) {
                return Err(config(format!("{name} must be finite and nonnegative, got {v}")));
            }
        }
        if !(0.0..1.0).contains(&self.gamma) {
            return Err(config(format!("gamma must lie in [0, 1), got {}", self.gamma)));
        }
        if !(self.p1 > 1.0 && self.p2 > 1.0 && self.p1.is_finite() && self.p2.is_finite()) {
            return Err(config(format!("p1, p2 must exceed 1, got {}, {}", self.p1, self.p2)));
        }
        if !(self.f0 > 0.0 && self.f0.is_finite()) {
            return Err(config(format!("f0 must be positive, got {}", self.f0)));
        }
        if !(self.dt > 0.0 && self.horizon.is_finite() && self.dt <= self.horizon) {
            return Err(config(format!("need 0 < dt <= horizon, got dt={}, horizon={}", self.dt, self.horizon)));
        }
        if !(self.dt_min > 0.0) {
            return Err(config("dt_min must be positive"));
        }
        if !(self.blowup_threshold > self.f0) {
            return Err(config(format!("blow-up threshold {} must exceed f0 = {}", self.blowup_threshold, self.f0)));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, PartialEq)]
pub enum OdeOutcomeKind {
    BlownUp { t_star: f64 },
    GlobalToHorizon,
    /// dt underflow without sustained growth.
    Undecided { reason: String },
}

impl OdeOutcomeKind {
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
pub struct OdePoint {
    pub t: f64,
    pub f: f64,
    pub dt: f64,
}

#[derive(Debug, Clone)]
pub struct OdeOutcome {
    pub kind: OdeOutcomeKind,
    pub series: Vec<OdePoint>,
}

impl OdeOutcome {
    pub fn write_csv<W: Write>(&self, mut w: W) -> io::Result<()> {
        writeln!(w, "t,f,dt")?;
        for p in &self.series {
            writeln!(w, "{},{},{}", p.t, p.f, p.dt)?;
        }
        Ok(())
    }

    pub fn final_value(&self) -> f64 {
        self.series.last().map_or(f64::NAN, |p| p.f)
    }
}

/// Runs the reduction, recording every accepted step.
pub fn run_ode(config: &OdeConfig) -> Result<OdeOutcome> {
    let mut series = Vec::new();
    let kind = integrate(config, |p| series.push(p))?;
    Ok(OdeOutcome { kind, series })
}

/// Runs the reduction and reports each accepted step (including `t = 0`) to
/// `observe` instead of storing it.
pub fn integrate(config: &OdeConfig, mut observe: impl FnMut(OdePoint)) -> Result<OdeOutcomeKind> {
    config.validate()?;
    let mut ledger = if config.b != 0.0 {
        Some(MemoryLedger::new(config.memory, config.gamma, config.dt, config.horizon, 1)?)
    } else {
        None
    };
    let mut dt = config.dt;
    let mut t = 0.0;
    let mut f = config.f0;
    let mut recent = VecDeque::from([f]);
    let mut memory = [0.0];
    let end = config.horizon * (1.0 - 1e-12);
    observe(OdePoint { t, f, dt });

    let kind = loop {
        if t >= end {
            break OdeOutcomeKind::GlobalToHorizon;
        }
        let step_dt = dt.min(config.horizon - t);
        let mut forcing = config.c * signed_pow(f, config.p2);
        if let Some(ledger) = &ledger {
            ledger.memory_term(ledger.steps(), &mut memory)?;
            forcing += config.b * memory[0];
        }
        let (decay, gain) = if config.a > 0.0 {
            let z = config.a * step_dt;
            ((-z).exp(), -(-z).exp_m1() / config.a)
        } else {
            (1.0, step_dt)
        };
        let next = decay * f + gain * forcing;
        // Growth is measured against the data scale as well, otherwise a
        // state decayed to ~0 by a long step could never grow again.
        if !next.is_finite() || next.abs() > 2.0 * f.abs().max(config.f0.abs()) {
            dt *= 0.5;
            if dt < config.dt_min {
                let growing = recent.len() == GROWTH_WINDOW + 1 && recent.iter().zip(recent.iter().skip(1)).all(|(x, y)| y > x);
                break if growing {
                    OdeOutcomeKind::BlownUp { t_star: t }
                } else {
                    OdeOutcomeKind::Undecided { reason: format!("dt fell below {} at t={t}", config.dt_min) }
                };
            }
            continue;
        }
        if let Some(ledger) = &mut ledger {
            ledger.record(&[signed_pow(f, config.p1)], t + step_dt)?;
        }
        t += step_dt;
        f = next;
        observe(OdePoint { t, f, dt: step_dt });
        recent.push_back(f);
        if recent.len() > GROWTH_WINDOW + 1 {
            recent.pop_front();
        }
        if f > config.blowup_threshold {
            break OdeOutcomeKind::BlownUp { t_star: t };
        }
    };
    Ok(kind)
}

/// Blow-up time from the run at `dt / 2`, provided the runs at `dt` and
/// `dt / 2` both blow up and agree within 10%.
pub fn blowup_time(config: &OdeConfig) -> Result<Option<f64>> {
    let coarse = integrate(config, |_| ())?.t_star();
    let fine_config = OdeConfig { dt: 0.5 * config.dt, ..config.clone() };
    let fine = integrate(&fine_config, |_| ())?.t_star();
    Ok(match (coarse, fine) {
        (Some(c), Some(f)) if (c - f).abs() <= 0.1 * f => Some(f),
        _ => None,
    })
}

/// [`blowup_time`] with dt chosen from pilot runs. The first pilot uses
/// `config` as given (a compressed memory and a coarse dt are fine for long
/// horizons). Its estimate `t₀` is refined by rerunning with exact memory
/// weights and `dt = min(t₀ / steps, config.dt)` until two successive estimates agree within
/// 10%; the checked pair then runs at that dt and `dt / 2` on the horizon
/// `4 t₀`. `None` when a stage fails to blow up or the estimates never settle.
pub fn resolved_blowup_time(config: &OdeConfig, steps: usize) -> Result<Option<f64>> {
    const MAX_REFINEMENTS: usize = 12;
    let Some(mut pilot) = integrate(config, |_| ())?.t_star() else {
        return Ok(None);
    };
    let resolved = |t0: f64| {
        let horizon = (4.0 * t0).min(config.horizon);
        let dt = (t0 / steps.max(1) as f64).min(config.dt).min(horizon);
        OdeConfig { dt, horizon, memory: MemoryMode::Exact, ..config.clone() }
    };
    for _ in 0..MAX_REFINEMENTS {
        let Some(next) = integrate(&resolved(pilot), |_| ())?.t_star() else {
            return Ok(None);
        };
        let settled = (next - pilot).abs() <= 0.1 * next;
        pilot = next;
        if settled {
            return blowup_time(&resolved(pilot));
        }
    }
    Ok(None)
}

/// Result of [`unit_time_threshold`].
#[derive(Debug, Clone, PartialEq)]
pub struct ThresholdProbe {
    /// Least probed `f0` that blows up before `t = 1`; `+∞` when none does.
    pub value: f64,
    pub diagnostic: Option<String>,
}

/// Largest datum probed by [`unit_time_threshold`].
pub const THRESHOLD_PROBE_MAX: f64 = 1e6;

/// Smallest datum probed by [`unit_time_threshold`].
pub const THRESHOLD_PROBE_MIN: f64 = 1e-6;

/// Bisection (in `ln f0`) for the least `f0` whose solution of
/// `f' + a f = b ∫ (t-s)^{-γ} f^p ds` blows up before `t = 1`, to relative
/// precision `1e-6`. Solutions are monotone in `f0`, so the set of such data
/// is an interval `[threshold, ∞)`.
pub fn unit_time_threshold(a: f64, b: f64, gamma: f64, p: f64, dt: f64) -> Result<ThresholdProbe> {
    if !(a > 0.0 && b > 0.0 && p > 1.0) {
        return Err(config(format!("threshold probe needs a, b > 0 and p > 1, got a={a}, b={b}, p={p}")));
    }
    let blows_up = |f0: f64| -> Result<bool> {
        let cfg = OdeConfig::memory_only(a, b, gamma, p, f0, dt, 1.0);
        Ok(matches!(integrate(&cfg, |_| ())?, OdeOutcomeKind::BlownUp { .. }))
    };
    let (mut lo, mut hi) = (THRESHOLD_PROBE_MIN, THRESHOLD_PROBE_MAX);
    if !blows_up(hi)? {
        return Ok(ThresholdProbe {
            value: f64::INFINITY,
            diagnostic: Some(format!("no blow-up before t = 1 for f0 up to {hi:e}")),
        });
    }
    if blows_up(lo)? {
        return Ok(ThresholdProbe {
            value: lo,
            diagnostic: Some(format!("already blows up at the smallest probed f0 = {lo:e}")),
        });
    }
    while hi / lo > 1.0 + 1e-6 {
        let mid = (lo * hi).sqrt();
        if blows_up(mid)? {
            hi = mid;
        } else {
            lo = mid;
        }
    }
    Ok(ThresholdProbe { value: hi, diagnostic: None })
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;

    fn local(p2: f64, f0: f64, dt: f64, horizon: f64) -> OdeConfig {
        OdeConfig { a: 0.0, b: 0.0, c: 1.0, p2, f0, ..OdeConfig::memory_only(0.0, 0.0, 0.5, 2.0, f0, dt, horizon) }
    }

    #[test]
    fn linear_decay_is_exact() {
        let cfg = OdeConfig { c: 0.0, ..OdeConfig::memory_only(1.3, 0.0, 0.5, 2.0, 2.0, 1e-4, 1.0) };
        let out = run_ode(&cfg).unwrap();
        assert_eq!(out.kind, OdeOutcomeKind::GlobalToHorizon);
        let last = out.series.last().unwrap();
        assert_relative_eq!(last.t, 1.0, max_relative = 1e-12);
        assert_relative_eq!(last.f, 2.0 * (-1.3f64).exp(), max_relative = 1e-6);
        assert_eq!(blowup_time(&cfg).unwrap(), None);
    }

    #[test]
    fn quadratic_blowup_time() {
        let cfg = local(2.0, 1.0, 1e-3, 2.0);
        let t = run_ode(&cfg).unwrap().kind.t_star().unwrap();
        assert!((0.95..=1.05).contains(&t), "{t}");
        let t = blowup_time(&cfg).unwrap().unwrap();
        assert!((0.95..=1.05).contains(&t), "{t}");
        let t = resolved_blowup_time(&local(2.0, 1.0, 0.1, 2.0), 1000).unwrap().unwrap();
        assert!((0.99..=1.01).contains(&t), "{t}");
    }

    #[test]
    fn blowup_time_scales_with_data() {
        for p2 in [2.0, 3.0] {
            let t1 = blowup_time(&local(p2, 1.0, 1e-4, 4.0)).unwrap().unwrap();
            let t2 = blowup_time(&local(p2, 2.0, 1e-4, 4.0)).unwrap().unwrap();
            let exact = 2f64.powf(1.0 - p2);
            assert!((t2 / t1 - exact).abs() < 0.02 * exact, "p2={p2}: {}", t2 / t1);
        }
    }

    #[test]
    fn memory_forcing_blows_up() {
        for f0 in [1.0, 1e2] {
            let cfg = OdeConfig::memory_only(1.0, 1.0, 0.4, 2.0, f0, 1e-3, 20.0);
            assert!(matches!(run_ode(&cfg).unwrap().kind, OdeOutcomeKind::BlownUp { .. }), "f0={f0}");
        }
    }

    #[test]
    fn monotone_in_data() {
        let lo = run_ode(&OdeConfig::memory_only(1.0, 1.0, 0.3, 2.0, 0.5, 1e-2, 1.0)).unwrap();
        let hi = run_ode(&OdeConfig::memory_only(1.0, 1.0, 0.3, 2.0, 0.6, 1e-2, 1.0)).unwrap();
        assert_eq!(lo.series.len(), hi.series.len());
        for (x, y) in lo.series.iter().zip(&hi.series) {
            assert!(x.f > 0.0 && x.f <= y.f);
        }
    }

    #[test]
    fn first_order_convergence() {
        let f1 = |dt: f64| run_ode(&OdeConfig::memory_only(1.0, 1.0, 0.5, 2.0, 1.0, dt, 1.0)).unwrap().final_value();
        let (a, b, c) = (f1(1e-2), f1(5e-3), f1(2.5e-3));
        let ratio = (a - b).abs() / (b - c).abs();
        assert!(ratio > 1.5 && ratio <= 4.0, "{ratio}");
    }

    #[test]
    fn threshold_monotone_in_forcing() {
        let weak = unit_time_threshold(1.0, 1.0, 0.0, 2.0, 1e-3).unwrap();
        let strong = unit_time_threshold(1.0, 4.0, 0.0, 2.0, 1e-3).unwrap();
        assert!(weak.value.is_finite() && weak.value > 0.0);
        assert!(strong.value <= weak.value);
        let finer = unit_time_threshold(1.0, 1.0, 0.0, 2.0, 5e-4).unwrap();
        assert!((finer.value / weak.value - 1.0).abs() < 0.1);
    }

    #[test]
    fn rejects_bad_configs() {
        let good = OdeConfig::memory_only(1.0, 1.0, 0.5, 2.0, 1.0, 1e-2, 1.0);
        assert!(good.validate().is_ok());
        assert!(OdeConfig { f0: 0.0, ..good.clone() }.validate().is_err());
        assert!(OdeConfig { a: -1.0, ..good.clone() }.validate().is_err());
        assert!(OdeConfig { gamma: 1.0, ..good.clone() }.validate().is_err());
        assert!(OdeConfig { p1: 1.0, ..good.clone() }.validate().is_err());
        assert!(unit_time_threshold(0.0, 1.0, 0.5, 2.0, 1e-2).is_err());
    }

    #[test]
    fn csv_header() {
        let out = run_ode(&OdeConfig { c: 0.0, ..OdeConfig::memory_only(1.0, 0.0, 0.5, 2.0, 1.0, 0.5, 1.0) }).unwrap();
        let mut buf = Vec::new();
        out.write_csv(&mut buf).unwrap();
        assert_eq!(String::from_utf8(buf).unwrap().lines().next(), Some("t,f,dt"));
    }
}
