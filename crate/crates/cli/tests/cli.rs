use gfl_cli::config::{self, SweepFile, SweepGrid, SweepTarget};
use gfl_cli::sweep::{run_sweep, write_sweep_csv};
use gfl_core::grushin::GrushinDims;
use gfl_core::memsolver::{GridSpec, InitialData, MemoryMode, OutcomeKind, SimConfig};
use std::fs;
use std::path::Path;
use std::process::Command;

fn gfl() -> Command {
    Command::new(env!("CARGO_BIN_EXE_gfl"))
}

fn base(kappa1: f64, kappa2: f64, amplitude: f64) -> SimConfig {
    SimConfig {
        dims: GrushinDims::new(1, 1).unwrap(),
        grid: GridSpec { r_max: 16.0, s_max: 64.0, n_r: 32, n_s: 64 },
        gamma: 0.5,
        p1: 2.0,
        p2: 2.0,
        kappa1,
        kappa2,
        initial: InitialData::GaussianBump { amplitude, width: 1.0 },
        dt: 0.01,
        horizon: 30.0,
        blowup_threshold: 1e10,
        dt_min: 1e-12,
        memory: MemoryMode::Soe { modes: 48 },
        diffusion: true,
    }
}

fn sweep_file(base: SimConfig, target: SweepTarget, p_range: [f64; 2], p_steps: usize) -> SweepFile {
    SweepFile {
        schema_version: config::SCHEMA_VERSION,
        output_dir: ".".into(),
        workers: None,
        base,
        sweep: SweepGrid { target, p_range, p_steps, gamma_range: [0.5, 0.5], gamma_steps: 1 },
    }
}

fn write_json(dir: &Path, name: &str, value: &serde_json::Value) -> std::path::PathBuf {
    let path = dir.join(name);
    fs::write(&path, serde_json::to_string_pretty(value).unwrap()).unwrap();
    path
}

#[test]
fn reaction_sweep_blows_up_below_first_critical_exponent() {
    let file = sweep_file(base(0.0, 1.0, 2.0), SweepTarget::P2, [1.1, 5.0 / 3.0], 4);
    let rows = run_sweep(&file, 1).unwrap();
    assert_eq!(rows.len(), 4);
    for r in &rows {
        assert!(matches!(r.outcome, OutcomeKind::BlownUp { .. }), "p = {}: {:?}", r.p, r.outcome);
    }
}

#[test]
fn memory_sweep_blows_up_up_to_second_critical_exponent() {
    let file = sweep_file(base(1.0, 0.0, 2.0), SweepTarget::P1, [1.5, 2.5], 3);
    for r in run_sweep(&file, 1).unwrap() {
        assert!(matches!(r.outcome, OutcomeKind::BlownUp { .. }), "p = {}: {:?}", r.p, r.outcome);
    }
}

#[test]
fn sweep_output_is_independent_of_worker_count() {
    let mut file = sweep_file(base(0.0, 1.0, 0.5), SweepTarget::P2, [1.5, 3.0], 4);
    file.base.grid = GridSpec { r_max: 8.0, s_max: 16.0, n_r: 12, n_s: 16 };
    file.base.horizon = 5.0;
    let render = |workers| {
        let mut buf = Vec::new();
        write_sweep_csv(&file, &run_sweep(&file, workers).unwrap(), &mut buf).unwrap();
        buf
    };
    let one = render(1);
    assert_eq!(one, render(3));
    let text = String::from_utf8(one).unwrap();
    let header = text.lines().find(|l| !l.starts_with('#')).unwrap();
    assert_eq!(header, "gamma,p,outcome,t_end,config_hash,p_c1,p_0,inv_gamma,detail");
    assert!(text.lines().filter(|l| l.starts_with('#')).any(|l| l.contains("not counterexamples")));
    let ps: Vec<f64> = text.lines().skip_while(|l| l.starts_with('#')).skip(1).map(|l| l.split(',').nth(1).unwrap().parse().unwrap()).collect();
    assert_eq!(ps, vec![1.5, 2.0, 2.5, 3.0]);
}

#[test]
fn failing_points_become_undecided_rows() {
    // The threshold sits below the datum for every point, so each run is rejected.
    let mut file = sweep_file(base(0.0, 1.0, 2.0), SweepTarget::P2, [1.5, 2.0], 2);
    file.base.blowup_threshold = 1.0;
    let rows = run_sweep(&file, 2).unwrap();
    assert_eq!(rows.len(), 2);
    assert!(rows.iter().all(|r| r.outcome.label() == "Undecided" && r.t_end == file.base.horizon));
}

#[test]
fn smaller_data_stays_global() {
    let mut file = sweep_file(base(0.0, 1.0, 0.5), SweepTarget::P2, [2.5, 3.0], 2);
    file.base.dt = 0.05;
    file.base.horizon = 20.0;
    let global = |file: &SweepFile| run_sweep(file, 1).unwrap().into_iter().map(|r| r.outcome == OutcomeKind::GlobalToHorizon).collect::<Vec<_>>();
    let at_a = global(&file);
    file.base.initial = InitialData::GaussianBump { amplitude: 0.05, width: 1.0 };
    let at_tenth = global(&file);
    assert!(at_a.iter().any(|&g| g));
    for (a, b) in at_a.iter().zip(&at_tenth) {
        assert!(!a || *b);
    }
}

#[test]
fn simulate_writes_series_and_reports_blow_up() {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().join("run");
    let cfg = serde_json::json!({
        "schema_version": 1,
        "output_dir": out,
        "config": {
            "dims": [1, 1],
            "grid": { "r_max": 16.0, "s_max": 64.0, "n_r": 32, "n_s": 64 },
            "gamma": 0.5, "p1": 2.0, "p2": 1.3, "kappa1": 0.0, "kappa2": 1.0,
            "initial": { "kind": "gaussian_bump", "amplitude": 1.0, "width": 1.0 },
            "dt": 0.01, "horizon": 60.0
        }
    });
    let path = write_json(dir.path(), "t1.json", &cfg);
    let output = gfl().arg("simulate").arg(&path).output().unwrap();
    assert!(output.status.success(), "{}", String::from_utf8_lossy(&output.stderr));
    let line = String::from_utf8(output.stdout).unwrap();
    let fields: Vec<&str> = line.split_whitespace().collect();
    assert_eq!(fields[..2], ["OUTCOME", "BlownUp"]);
    assert!(fields[2].parse::<f64>().unwrap() > 0.0);
    assert!(fs::read_to_string(out.join("series.csv")).unwrap().starts_with("t,sup_norm,l1_norm,dt\n"));
    assert!(fs::read_to_string(out.join("final.csv")).unwrap().starts_with("r,s,u\n"));
}

#[test]
fn zero_data_is_global_with_zero_series() {
    let dir = tempfile::tempdir().unwrap();
    let text = fs::read_to_string(concat!(env!("CARGO_MANIFEST_DIR"), "/../../configs/zero_data.json")).unwrap();
    let mut cfg: serde_json::Value = serde_json::from_str(&text).unwrap();
    cfg["output_dir"] = serde_json::json!(dir.path());
    let path = write_json(dir.path(), "zero.json", &cfg);
    assert_eq!(gfl_cli::simulate(&path).unwrap(), "OUTCOME GlobalToHorizon -");
    let series = fs::read_to_string(dir.path().join("series.csv")).unwrap();
    for row in series.lines().skip(1) {
        let cols: Vec<f64> = row.split(',').map(|c| c.parse().unwrap()).collect();
        assert_eq!((cols[1], cols[2]), (0.0, 0.0));
    }
}

#[test]
fn ode_mode_blows_up_when_p1_gamma_at_most_one() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = serde_json::json!({
        "schema_version": 1,
        "output_dir": dir.path(),
        "config": { "a": 1.0, "b": 1.0, "c": 1.0, "gamma": 0.5, "p1": 2.0, "p2": 2.0, "f0": 0.5, "dt": 0.001, "horizon": 20.0 }
    });
    let path = write_json(dir.path(), "ode.json", &cfg);
    let line = gfl_cli::simulate_ode(&path).unwrap();
    assert!(line.starts_with("OUTCOME BlownUp "), "{line}");
    assert!(fs::read_to_string(dir.path().join("series.csv")).unwrap().starts_with("t,f,dt\n"));
}

#[test]
fn config_errors_point_at_the_offending_line() {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("bad.json");
    fs::write(&path, "{\n  \"schema_version\": 1,\n  \"config\": {\n    \"a\": 1.0,\n    \"speed\": 3\n  }\n}\n").unwrap();
    let output = gfl().args(["simulate", "--ode"]).arg(&path).output().unwrap();
    assert!(!output.status.success());
    let err = String::from_utf8_lossy(&output.stderr);
    assert!(err.contains("bad.json:5:") && err.contains("unknown field `speed`"), "{err}");
}

#[test]
fn verify_writes_report_and_negative_control_fails() {
    let dir = tempfile::tempdir().unwrap();
    let status = gfl().args(["verify", "--only", "fraccalc", "--out"]).arg(dir.path()).output().unwrap().status;
    assert!(status.success());
    let report = fs::read_to_string(dir.path().join("verify_report.txt")).unwrap();
    assert!(!report.is_empty());
    for line in report.lines() {
        let cols: Vec<&str> = line.split(' ').collect();
        assert_eq!(cols.len(), 4, "{line}");
        assert!(cols[0].starts_with("fraccalc."));
        cols[1].parse::<f64>().unwrap();
        cols[2].parse::<f64>().unwrap();
        assert_eq!(cols[3], "PASS");
    }

    let tight = gfl().args(["verify", "--only", "grushin", "--tol-scale", "0.1", "--out"]).arg(dir.path()).output().unwrap();
    assert!(!tight.status.success());
    let report = fs::read_to_string(dir.path().join("verify_report.txt")).unwrap();
    assert!(report.lines().any(|l| l.starts_with("grushin.theta-operator.rel-err") && l.ends_with("FAIL")));
}

#[test]
fn full_verify_passes() {
    let report = gfl_cli::verify::run(None, 1.0);
    let failed: Vec<_> = report.checks.iter().filter(|c| !c.passed()).collect();
    assert!(failed.is_empty(), "{failed:?}");
}

#[test]
fn decay_slope_and_refinement() {
    let dir = tempfile::tempdir().unwrap();
    let report = gfl_cli::decay_to(GrushinDims::new(1, 1).unwrap(), true, dir.path()).unwrap();
    assert!(report.relative_deviation() <= 0.1, "{}", report.fit.slope);
    let fine = report.refined_slope.unwrap();
    assert!(((fine - report.fit.slope) / report.fit.slope).abs() <= 0.02);
    assert!(fs::read_to_string(dir.path().join("decay_N1k1.csv")).unwrap().starts_with("t,sup_norm\n"));
}

#[test]
fn shipped_configs_parse() {
    let dir = concat!(env!("CARGO_MANIFEST_DIR"), "/../../configs");
    for name in ["reaction_blowup.json", "zero_data.json", "sweep_reaction.json", "sweep_memory.json"] {
        let path = Path::new(dir).join(name);
        let ok = if name.starts_with("sweep") {
            config::load::<SweepFile>(&path).map(|_| ())
        } else {
            config::load::<config::SimulateFile>(&path).map(|_| ())
        };
        ok.unwrap_or_else(|e| panic!("{name}: {e}"));
    }
    config::load::<config::OdeFile>(&Path::new(dir).join("ode_memory.json")).unwrap();
}
