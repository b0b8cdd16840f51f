//! Self-checks run by `gfl verify`, grouped by library module.

use clap::ValueEnum;
use gfl_core::fraccalc::*;
use gfl_core::grushin::*;
use gfl_core::memsolver::*;
use gfl_core::odereduce::*;
use gfl_core::quad::{integrate, Tolerance};
use gfl_core::special::gamma;
use gfl_core::testfn::*;
use std::fmt;
use std::io::{self, Write};

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum Module {
    Fraccalc,
    Grushin,
    Memsolver,
    Odereduce,
    Testfn,
}

impl Module {
    pub const ALL: [Module; 5] = [Self::Fraccalc, Self::Grushin, Self::Memsolver, Self::Odereduce, Self::Testfn];

    fn checks(self) -> gfl_core::Result<Vec<Check>> {
        match self {
            Self::Fraccalc => fraccalc_checks(),
            Self::Grushin => grushin_checks(),
            Self::Memsolver => memsolver_checks(),
            Self::Odereduce => odereduce_checks(),
            Self::Testfn => testfn_checks(),
        }
    }
}

impl fmt::Display for Module {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.to_possible_value().expect("no skipped variants").get_name())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Bound {
    /// Passes when `measured <= tolerance`. Scaled by `--tol-scale`.
    Upper,
    /// Passes when `measured >= tolerance`. Never scaled.
    Lower,
}

#[derive(Debug, Clone, PartialEq)]
pub struct Check {
    pub id: String,
    pub measured: f64,
    pub tolerance: f64,
    pub bound: Bound,
}

impl Check {
    fn upper(id: impl Into<String>, measured: f64, tolerance: f64) -> Self {
        Self { id: id.into(), measured, tolerance, bound: Bound::Upper }
    }

    fn lower(id: impl Into<String>, measured: f64, tolerance: f64) -> Self {
        Self { id: id.into(), measured, tolerance, bound: Bound::Lower }
    }

    fn scaled(mut self, scale: f64) -> Self {
        if self.bound == Bound::Upper {
            self.tolerance *= scale;
        }
        self
    }

    pub fn passed(&self) -> bool {
        match self.bound {
            Bound::Upper => self.measured <= self.tolerance,
            Bound::Lower => self.measured >= self.tolerance,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Default)]
pub struct Report {
    pub checks: Vec<Check>,
}

impl Report {
    pub fn passed(&self) -> bool {
        self.checks.iter().all(Check::passed)
    }

    pub fn write<W: Write>(&self, mut w: W) -> io::Result<()> {
        for c in &self.checks {
            writeln!(w, "{} {:e} {:e} {}", c.id, c.measured, c.tolerance, if c.passed() { "PASS" } else { "FAIL" })?;
        }
        Ok(())
    }
}

/// Runs the selected suites. A suite that errors out is reported as a single
/// failing `<module>.error` check rather than aborting the rest.
pub fn run(only: Option<Module>, tol_scale: f64) -> Report {
    let modules = only.map_or(Module::ALL.to_vec(), |m| vec![m]);
    let mut checks = Vec::new();
    for m in modules {
        match m.checks() {
            Ok(list) => checks.extend(list.into_iter().map(|c| c.scaled(tol_scale))),
            Err(e) => {
                eprintln!("{m}: {e}");
                checks.push(Check::upper(format!("{m}.error"), f64::INFINITY, 0.0));
            }
        }
    }
    Report { checks }
}

fn rel(a: f64, b: f64) -> f64 {
    (a - b).abs() / b.abs().max(1e-300)
}

fn fraccalc_checks() -> gfl_core::Result<Vec<Check>> {
    let mut out = Vec::new();
    let alphas = [0.25, 0.5, 0.75];

    // Closed-form right derivative of w₁ against product integration of samples.
    let grid = TimeGrid::uniform(0.0, 1.0, 2048)?;
    let w = WeightW1::new(1.0, 10.0)?;
    let sampled = SampledFunction::from_fn(&grid, |t| w.eval(t))?;
    let mut worst = 0.0f64;
    for a in alphas {
        let alpha = FracOrder::new(a)?;
        for i in 1..10 {
            let t = i as f64 / 20.0;
            let closed = rl_right_derivative_w1(t, &w, 0, alpha)?;
            worst = worst.max(rel(rl_right_derivative(&sampled, alpha, t)?, closed));
        }
    }
    out.push(Check::upper("fraccalc.w1-derivative.sampled-vs-closed", worst, 2e-3));

    let mut worst = 0.0f64;
    for a in alphas {
        worst = worst.max(derivative_shift_residual(&w, FracOrder::new(a)?, &TimeGrid::uniform(0.0, 0.9, 901)?)?);
    }
    out.push(Check::upper("fraccalc.derivative-shift.residual", worst, 3e-3));

    // Inversion: D^α I^α g = g away from the grid ends.
    let h = grid.derivative_step();
    let mut worst = 0.0f64;
    for a in alphas {
        let alpha = FracOrder::new(a)?;
        let g = |t: f64| t.cos();
        let integral = SampledFunction::from_fn(&grid, g)?.left_integral(alpha);
        for &t in grid.nodes() {
            if t - h > 0.05 && t + h <= 0.95 {
                worst = worst.max((rl_left_derivative(&integral, alpha, t)? - g(t)).abs());
            }
        }
    }
    out.push(Check::upper("fraccalc.inversion", worst, 1e-3));

    let mut worst = 0.0f64;
    for a in alphas {
        let alpha = FracOrder::new(a)?;
        let g = SampledFunction::from_fn(&grid, |t| (3.0 * t).cos() + t)?;
        worst = worst.max(ibp_residual(&sampled, &g.left_integral(alpha), alpha)?);
    }
    out.push(Check::upper("fraccalc.integration-by-parts", worst, 1e-3));

    let (mut dual, mut ratio) = (0.0f64, 0.0f64);
    for a in alphas {
        let alpha = FracOrder::new(a)?;
        for m in [0, 1] {
            let order = m as f64 + a;
            for p in [2.0, 3.0] {
                let w = WeightW1::new(2.0, 12.0)?;
                let cf = w1_dual_power_integral(&w, m, alpha, p)?.value;
                let k = gamma(13.0) / gamma(13.0 - order) * 2f64.powf(-order);
                let q = p / (p - 1.0);
                let direct = integrate(
                    |t| {
                        let x = 1.0 - t / 2.0;
                        x.powf(-12.0 / (p - 1.0)) * (k * x.powf(12.0 - order)).abs().powf(q)
                    },
                    0.0,
                    2.0,
                    Tolerance::new(0.0, 1e-13),
                )?;
                dual = dual.max(rel(cf, direct));
            }
            let at = |t: f64| w1_derivative_integral(&WeightW1::new(t, 12.0)?, m, alpha).map(|c| c.value);
            ratio = ratio.max(rel(at(2.0)? / at(1.0)?, 2f64.powf(1.0 - order)));
        }
    }
    out.push(Check::upper("fraccalc.dual-power-integral.vs-quadrature", dual, 1e-8));
    out.push(Check::upper("fraccalc.derivative-integral.T-ratio", ratio, 1e-12));
    Ok(out)
}

fn grushin_checks() -> gfl_core::Result<Vec<Check>> {
    let mut out = Vec::new();
    for (n, k) in [(1, 1), (2, 1), (2, 2), (3, 2)] {
        let dims = GrushinDims::new(n, k)?;
        let params = ThetaParams::new(1.0 / dims.theta_rate(), 1.0, 1.0)?;
        let margin = theta_inequality_margin(&params, dims, 100_000)?;
        out.push(Check::lower(format!("grushin.theta-margin.N{n}k{k}"), margin, -1e-12));
    }

    let dims = GrushinDims::new(1, 1)?;
    let params = ThetaParams::for_dims(dims);
    let mut errors = Vec::new();
    for n in [32, 64, 128] {
        let grid = BiRadialGrid::new(dims, 8.0, 8.0, n, n)?;
        let op = assemble(&grid);
        let lu = apply(&op, &Field::from_fn(&grid, |r, s| theta_eval(&params, r, s)))?;
        let (mut err, mut scale) = (0.0f64, 0.0f64);
        for (i, j, r, s) in grid.nodes() {
            if grid.is_interior(i, j) {
                let exact = grushin_theta_analytic(&params, dims, r, s);
                err = err.max((lu.at(i, j) - exact).abs());
                scale = scale.max(exact.abs());
            }
        }
        errors.push(err / scale);
    }
    out.push(Check::upper("grushin.theta-operator.rel-err.n128", errors[2], 4e-3));
    out.push(Check::lower("grushin.theta-operator.order", (errors[1] / errors[2]).log2(), 1.8));

    // W·L is symmetric.
    let grid = BiRadialGrid::new(GrushinDims::new(2, 1)?, 5.0, 7.0, 20, 24)?;
    let op = assemble(&grid);
    let u: Vec<f64> = grid.nodes().map(|(_, _, r, s)| (r - 0.3 * s).sin() + 0.1 * r).collect();
    let v: Vec<f64> = grid.nodes().map(|(_, _, r, s)| (-(r * r) - s).exp() * (1.0 + s)).collect();
    let (mut lu, mut lv) = (vec![0.0; grid.len()], vec![0.0; grid.len()]);
    op.apply_slice(&u, &mut lu);
    op.apply_slice(&v, &mut lv);
    let wt = op.weights();
    let uwlv: f64 = (0..grid.len()).map(|i| u[i] * wt[i] * lv[i]).sum();
    let vwlu: f64 = (0..grid.len()).map(|i| v[i] * wt[i] * lu[i]).sum();
    out.push(Check::upper("grushin.weighted-symmetry", (uwlv - vwlu).abs() / uwlv.abs().max(vwlu.abs()), 1e-12));
    Ok(out)
}

fn memsolver_checks() -> gfl_core::Result<Vec<Check>> {
    let mut out = Vec::new();
    let mut worst = 0.0f64;
    for g in [0.25, 0.5, 0.75] {
        let kernel = SoeKernel::new(g, 1e-3, 1.0, 32)?;
        for i in 0..=200 {
            let t = 1e-3 * 1e3f64.powf(i as f64 / 200.0);
            worst = worst.max(rel(kernel.eval(t), t.powf(-g)));
        }
    }
    out.push(Check::upper("memsolver.soe-kernel.rel-err", worst, 1e-5));

    let base = SimConfig {
        dims: GrushinDims::new(1, 1)?,
        grid: GridSpec { r_max: 4.0, s_max: 4.0, n_r: 8, n_s: 8 },
        gamma: 0.5,
        p1: 2.0,
        p2: 2.0,
        kappa1: 1.0,
        kappa2: 1.0,
        initial: InitialData::Plateau { amplitude: 0.5, radius: 100.0 },
        dt: 0.01,
        horizon: 1.0,
        blowup_threshold: 1e10,
        dt_min: 1e-12,
        memory: MemoryMode::Exact,
        diffusion: false,
    };
    let ode = OdeConfig { a: 0.0, b: 1.0, c: 1.0, ..OdeConfig::memory_only(0.0, 1.0, 0.5, 2.0, 0.5, 0.01, 1.0) };
    let reference = run_ode(&ode)?;
    let mut sim = Simulation::new(base.clone())?;
    let mut worst = 0.0f64;
    for point in &reference.series[1..] {
        sim.step(point.dt)?;
        worst = sim.field().values().iter().fold(worst, |m, &v| m.max(rel(v, point.f)));
    }
    out.push(Check::upper("memsolver.constant-state-vs-ode", worst, 1e-6));

    let diffusing = SimConfig {
        grid: GridSpec { r_max: 8.0, s_max: 8.0, n_r: 16, n_s: 16 },
        kappa2: 0.0,
        initial: InitialData::GaussianBump { amplitude: 0.25, width: 1.0 },
        horizon: 2.0,
        diffusion: true,
        ..base
    };
    let mut exact = Simulation::new(diffusing.clone())?;
    let mut soe = Simulation::new(SimConfig { memory: MemoryMode::Soe { modes: 32 }, ..diffusing })?;
    for _ in 0..200 {
        exact.step(0.01)?;
        soe.step(0.01)?;
    }
    let diff = exact.field().values().iter().zip(soe.field().values()).fold(0.0f64, |m, (a, b)| m.max((a - b).abs()));
    out.push(Check::upper("memsolver.soe-vs-exact.rel-sup", diff / exact.field().sup_norm(), 1e-3));
    Ok(out)
}

fn odereduce_checks() -> gfl_core::Result<Vec<Check>> {
    let mut out = Vec::new();
    let decay = OdeConfig { b: 0.0, ..OdeConfig::memory_only(1.0, 0.0, 0.0, 2.0, 1.0, 0.1, 2.0) };
    let end = run_ode(&decay)?.final_value();
    out.push(Check::upper("odereduce.linear-decay.rel-err", rel(end, (-2f64).exp()), 1e-12));

    // f' = f², f(0) = 1 blows up at t = 1.
    let quadratic = OdeConfig { a: 0.0, b: 0.0, c: 1.0, ..OdeConfig::memory_only(0.0, 0.0, 0.0, 2.0, 1.0, 1e-4, 2.0) };
    let t_star = blowup_time(&quadratic)?.unwrap_or(f64::INFINITY);
    out.push(Check::upper("odereduce.quadratic-blowup.abs-err", (t_star - 1.0).abs(), 1e-2));

    let t_star = resolved_blowup_time(&OdeConfig::memory_only(1.0, 1.0, 0.5, 2.0, 1.0, 0.01, 100.0), 1000)?;
    out.push(Check::lower("odereduce.memory-blowup.detected", if t_star.is_some() { 1.0 } else { 0.0 }, 1.0));
    Ok(out)
}

fn testfn_checks() -> gfl_core::Result<Vec<Check>> {
    let mut out = Vec::new();
    let dims = GrushinDims::new(1, 1)?;
    let ts: Vec<f64> = (4..=10).map(|e| 2f64.powi(e)).collect();
    for p in [1.3, 5.0 / 3.0, 2.5] {
        let values = ts.iter().map(|&t| weak_rhs_t1(t, p, dims).map(|w| w.total)).collect::<gfl_core::Result<Vec<_>>>()?;
        let slope = loglog_slope(&ts, &values)?;
        out.push(Check::upper(format!("testfn.t1-slope.p{p:.4}"), (slope - t1_exponent(p, dims)).abs(), 0.02));
    }
    for p in [2.0, 2.5, 3.0] {
        let values = ts.iter().map(|&t| weak_rhs_t2(t, t, p, 0.5, dims).map(|w| w.term_a)).collect::<gfl_core::Result<Vec<_>>>()?;
        let slope = loglog_slope(&ts, &values)?;
        out.push(Check::upper(format!("testfn.t2-slope.p{p}"), (slope - t2_exponents(p, 0.5, dims).0).abs(), 0.02));
    }
    for (name, profile) in [("phi", CutoffProfile::PHI), ("eta", CutoffProfile::ETA)] {
        let (b1, b2) = profile.derivative_bounds();
        let (mut d1, mut d2) = (0.0f64, 0.0f64);
        for i in 0..=4000 {
            let (_, f1, f2) = profile.derivatives(profile.support() * 1.25 * i as f64 / 4000.0);
            d1 = d1.max(f1.abs());
            d2 = d2.max(f2.abs());
        }
        out.push(Check::lower(format!("testfn.{name}.derivative-bound-slack"), (b1 - d1).min(b2 - d2), -1e-12));
    }
    Ok(out)
}
