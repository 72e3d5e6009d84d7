use std::fs;
use std::path::Path;
use std::process::{Command, Output};

use chns_core::scenarios::{ic_bubble_merging, merging_centers};
use chns_core::GridSpec;

const SMALL: &str = r#"
scenario = "bubble-merging"
grid.nx = 16
grid.ny = 16
time.tau = 1e-2
time.t_end = 0.05

[output]
every = 2
"#;

fn chns(args: &[&str], envs: &[(&str, &str)]) -> Output {
    let mut cmd = Command::new(env!("CARGO_BIN_EXE_chns"));
    cmd.args(args);
    for (k, v) in envs {
        cmd.env(k, v);
    }
    cmd.output().expect("binary runs")
}

fn write_config(dir: &Path, text: &str) -> String {
    let path = dir.join("run.toml");
    fs::write(&path, text).unwrap();
    path.to_str().unwrap().to_string()
}

fn simulate(dir: &Path, config: &str, envs: &[(&str, &str)]) -> Output {
    let cfg = write_config(dir, config);
    let out = dir.join("out");
    chns(&["simulate", &cfg, "--out", out.to_str().unwrap()], envs)
}

fn read_values(path: &Path) -> Vec<f64> {
    let text = fs::read_to_string(path).unwrap();
    let mut lines = text.lines();
    assert_eq!(lines.next(), Some("x,y,value"));
    lines.map(|l| l.rsplit(',').next().unwrap().parse().unwrap()).collect()
}

#[test]
fn describe_is_deterministic_and_complete() {
    let a = chns(&["describe"], &[]);
    let b = chns(&["describe"], &[]);
    assert!(a.status.success());
    assert_eq!(a.stdout, b.stdout);
    let text = String::from_utf8(a.stdout).unwrap();
    for key in ["scenario", "scheme", "grid.nx", "time.tau", "phys.nu", "ic.seed", "buoyancy.chi", "output.format", "check.mode"] {
        assert!(text.contains(&format!("\n{key} = ")), "missing {key}");
    }
    let drip = String::from_utf8(chns(&["describe", "--scenario", "dripping-droplet"], &[]).stdout).unwrap();
    assert!(drip.contains("grid.ny = 500"));
}

#[test]
fn identical_runs_write_identical_files() {
    let (a, b) = (tempfile::tempdir().unwrap(), tempfile::tempdir().unwrap());
    let ra = simulate(a.path(), SMALL, &[]);
    assert!(ra.status.success(), "{}", String::from_utf8_lossy(&ra.stderr));
    assert!(simulate(b.path(), SMALL, &[]).status.success());
    let mut names: Vec<_> = fs::read_dir(a.path().join("out"))
        .unwrap()
        .map(|e| e.unwrap().file_name())
        .collect();
    names.sort();
    // energy.csv plus four files at steps 0, 2, 4 and the final step 5
    assert_eq!(names.len(), 1 + 4 * 4);
    for n in names {
        let fa = fs::read(a.path().join("out").join(&n)).unwrap();
        let fb = fs::read(b.path().join("out").join(&n)).unwrap();
        assert_eq!(fa, fb, "{n:?} differs");
    }
}

#[test]
fn initial_snapshot_round_trips_the_initial_condition() {
    let dir = tempfile::tempdir().unwrap();
    assert!(simulate(dir.path(), SMALL, &[]).status.success());
    let got = read_values(&dir.path().join("out/phi_000000.csv"));
    let g = GridSpec::unit_square(16).unwrap();
    let (a, b) = merging_centers(0.15);
    let want = ic_bubble_merging(&g, 0.15, 0.01, a, b);
    assert_eq!(got.len(), want.len());
    for (x, y) in got.iter().zip(want.data()) {
        assert_eq!(x.to_bits(), y.to_bits());
    }
    // face files hold every face, wall-normal ones included
    assert_eq!(read_values(&dir.path().join("out/u_000000.csv")).len(), 17 * 16);
    assert_eq!(read_values(&dir.path().join("out/v_000005.csv")).len(), 16 * 17);
}

#[test]
fn energy_series_has_one_row_per_level_and_decreases() {
    let dir = tempfile::tempdir().unwrap();
    assert!(simulate(dir.path(), SMALL, &[]).status.success());
    let text = fs::read_to_string(dir.path().join("out/energy.csv")).unwrap();
    let mut lines = text.lines();
    assert_eq!(
        lines.next(),
        Some("step,t,mass,energy_original,energy_modified,R,xi,kappa0,gamma,max_div")
    );
    let rows: Vec<Vec<f64>> = lines.map(|l| l.split(',').map(|v| v.parse().unwrap()).collect()).collect();
    assert_eq!(rows.len(), 6);
    for w in rows.windows(2) {
        assert!(w[1][4] <= w[0][4] * (1.0 + 1e-9));
        assert!((w[1][2] - w[0][2]).abs() < 1e-12);
    }
}

#[test]
fn environment_overrides_the_config_file() {
    let dir = tempfile::tempdir().unwrap();
    let out = simulate(dir.path(), SMALL, &[("CHNS_TIME__T_END", "0.02")]);
    assert!(out.status.success());
    let text = fs::read_to_string(dir.path().join("out/energy.csv")).unwrap();
    assert_eq!(text.lines().count(), 1 + 3);
}

#[test]
fn vtk_snapshots_are_structured_points() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = format!("{SMALL}format = \"vtk\"\n");
    assert!(simulate(dir.path(), &cfg, &[]).status.success());
    let text = fs::read_to_string(dir.path().join("out/state_000000.vtk")).unwrap();
    let head: Vec<&str> = text.lines().take(8).collect();
    assert_eq!(head[0], "# vtk DataFile Version 3.0");
    assert_eq!(head[2], "ASCII");
    assert_eq!(head[3], "DATASET STRUCTURED_POINTS");
    assert_eq!(head[4], "DIMENSIONS 17 17 1");
    assert_eq!(head[7], "CELL_DATA 256");
    assert!(text.contains("SCALARS phi double 1"));
    assert!(text.contains("VECTORS velocity double"));
}

#[test]
fn bad_config_exits_with_a_structured_report() {
    let dir = tempfile::tempdir().unwrap();
    let out = simulate(dir.path(), "phys.viscosity = 1.0\n", &[]);
    assert_eq!(out.status.code(), Some(2));
    let err = String::from_utf8(out.stderr).unwrap();
    assert!(err.contains("configuration error"));
    assert!(err.contains("phys.viscosity"));

    let out = simulate(dir.path(), SMALL, &[("CHNS_NOT__A_KEY", "1")]);
    assert_eq!(out.status.code(), Some(2));
}

#[test]
fn validate_runs_forced_manufactured_solution() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = write_config(dir.path(), "scenario = \"mms\"\ngrid.nx = 8\ngrid.ny = 8\ntime.tau = 0.05\ntime.t_end = 0.1\n");
    let out = chns(&["validate", "--config", &cfg], &[]);
    assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
    let text = String::from_utf8(out.stdout).unwrap();
    assert!(text.contains("steps: 2"));
    assert!(text.contains("energy checks: off"));
    assert!(text.contains("violations: 0"));
}

#[test]
fn converge_writes_the_error_table() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = write_config(
        dir.path(),
        "scenario = \"mms\"\nscheme = \"ivs2\"\nconverge.taus = [0.1, 0.05]\n",
    );
    let out_dir = dir.path().join("conv");
    let out = chns(
        &["converge", &cfg, "--out", out_dir.to_str().unwrap(), "--record-only", "--threads", "2"],
        &[],
    );
    assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
    let csv = fs::read_to_string(out_dir.join("convergence.csv")).unwrap();
    assert_eq!(csv.lines().count(), 3);
    assert!(csv.starts_with("tau,h,phi_linf_l2,"));

    // converge only makes sense for the manufactured solution
    let cfg = write_config(dir.path(), SMALL);
    assert_eq!(chns(&["converge", &cfg, "--out", out_dir.to_str().unwrap()], &[]).status.code(), Some(2));
}
