use std::fs;
use std::path::{Path, PathBuf};
use std::process::{Command, Output};

use mesojj::cli::output::{column, parse_csv, sha256_hex};
use tempfile::TempDir;

const BIN: &str = env!("CARGO_BIN_EXE_mesojj");

const SWEEP_CONFIG: &str = "\
[geometry]
kind = semi_infinite

[grid]
x_max = 100
dx = 0.25

[sweep]
L_start = 0
L_end = 40
L_count = 21
";

const ISLANDS_CONFIG: &str = "\
[geometry]
kind = finite_islands
L_bar = 10
a_bar = 40

[grid]
x_max = 100
dx = 0.25
";

fn write_config(dir: &Path, text: &str) -> PathBuf {
    let path = dir.join("run.ini");
    fs::write(&path, text).unwrap();
    path
}

fn mesojj(command: &str, config: &Path, out: &Path) -> Output {
    Command::new(BIN)
        .args([command, "--config"])
        .arg(config)
        .arg("--out")
        .arg(out)
        .env_remove("MESOJJ_THREADS")
        .output()
        .unwrap()
}

fn read_csv(path: &Path) -> (Vec<String>, Vec<Vec<String>>) {
    parse_csv(&fs::read_to_string(path).unwrap()).unwrap()
}

#[test]
fn sweep_writes_rows_fits_and_plot() {
    let dir = TempDir::new().unwrap();
    let config = write_config(dir.path(), SWEEP_CONFIG);
    let out = dir.path().join("out");
    let result = mesojj("sweep", &config, &out);
    assert_eq!(
        result.status.code(),
        Some(0),
        "{}",
        String::from_utf8_lossy(&result.stderr)
    );

    let (header, rows) = read_csv(&out.join("sweep.csv"));
    assert_eq!(rows.len(), 21);
    assert_eq!(header[..3], ["L_bar", "Ic1_bar", "Ic2_bar"]);
    let l = column(&header, &rows, "L_bar").unwrap();
    assert_eq!(l.first(), Some(&0.0));
    assert_eq!(l.last(), Some(&40.0));

    let fit: serde_json::Value =
        serde_json::from_str(&fs::read_to_string(out.join("fit.json")).unwrap()).unwrap();
    let mut coefficients = 0;
    for name in ["Ic1", "Ic2"] {
        for key in ["a", "b", "c"] {
            assert!(fit[name][key].is_f64(), "{name}.{key}");
            coefficients += 1;
        }
    }
    assert_eq!(coefficients, 6);

    let svg = fs::read_to_string(out.join("critical_currents.svg")).unwrap();
    assert!(svg.contains(r#"version="1.1""#));
    assert!(svg.contains("stroke-dasharray"));
}

#[test]
fn csv_uses_crlf_and_is_deterministic() {
    let dir = TempDir::new().unwrap();
    let config = write_config(
        dir.path(),
        &SWEEP_CONFIG.replace("L_count = 21", "L_count = 3"),
    );
    let first = dir.path().join("a");
    let second = dir.path().join("b");
    assert_eq!(mesojj("sweep", &config, &first).status.code(), Some(0));
    assert_eq!(mesojj("sweep", &config, &second).status.code(), Some(0));
    let a = fs::read(first.join("sweep.csv")).unwrap();
    let b = fs::read(second.join("sweep.csv")).unwrap();
    assert_eq!(a, b);
    let text = String::from_utf8(a).unwrap();
    assert!(text.ends_with("\r\n"));
    assert_eq!(text.matches("\r\n").count(), text.matches('\n').count());
}

#[test]
fn report_checksums_match_files() {
    let dir = TempDir::new().unwrap();
    let config = write_config(dir.path(), ISLANDS_CONFIG);
    let out = dir.path().join("out");
    assert_eq!(mesojj("params", &config, &out).status.code(), Some(0));
    let report: serde_json::Value =
        serde_json::from_str(&fs::read_to_string(out.join("report.json")).unwrap()).unwrap();
    assert_eq!(report["command"], "params");
    let files = report["files"].as_array().unwrap();
    let names: Vec<&str> = files.iter().map(|f| f["path"].as_str().unwrap()).collect();
    for expected in [
        "params.json",
        "physical.json",
        "ground_state.json",
        "qubit.json",
    ] {
        assert!(names.contains(&expected), "{names:?}");
    }
    for file in files {
        let bytes = fs::read(out.join(file["path"].as_str().unwrap())).unwrap();
        assert_eq!(file["sha256"].as_str().unwrap(), sha256_hex(&bytes));
        assert_eq!(file["bytes"].as_u64().unwrap(), bytes.len() as u64);
    }

    let params: serde_json::Value =
        serde_json::from_str(&fs::read_to_string(out.join("params.json")).unwrap()).unwrap();
    assert!(params["Ej1_bar"].as_f64().unwrap() > 0.0);
    assert!(params["Ej2_bar"].as_f64().unwrap() < 0.0);
    assert!((params["d_bar"].as_f64().unwrap() - 50.0).abs() < 0.1);
}

#[test]
fn solve_writes_full_line_states() {
    let dir = TempDir::new().unwrap();
    let config = write_config(dir.path(), "[geometry]\nkind = semi_infinite\nL_bar = 10\n");
    let out = dir.path().join("out");
    assert_eq!(mesojj("solve", &config, &out).status.code(), Some(0));
    let (header, rows) = read_csv(&out.join("parity_states.csv"));
    assert_eq!(
        header,
        ["x_bar", "psi_plus", "psi_minus", "v_plus", "v_minus"]
    );
    assert_eq!(rows.len(), 801);
    let x = column(&header, &rows, "x_bar").unwrap();
    assert_eq!((x[0], x[400], x[800]), (-100.0, 0.0, 100.0));
    let (header, _) = read_csv(&out.join("basis.csv"));
    assert_eq!(header, ["x_bar", "psi_L", "psi_R"]);
    assert!(out.join("wavefunctions.svg").exists());
    assert!(out.join("potentials.svg").exists());
}

#[test]
fn undriven_dynamics_conserves_energy() {
    let dir = TempDir::new().unwrap();
    let config = write_config(
        dir.path(),
        "[dynamics]\nej1 = 1.0\nej2 = -0.1\ncharging = 0.5\nn0 = 0.2\nphi0 = 0.3\ndt = 0.001\nt_end = 2\n",
    );
    let out = dir.path().join("out");
    assert_eq!(mesojj("dynamics", &config, &out).status.code(), Some(0));
    let (header, rows) = read_csv(&out.join("trajectory.csv"));
    assert_eq!(header, ["time", "n", "phi", "energy", "norm"]);
    assert_eq!(rows.len(), 2001);
    let energy = column(&header, &rows, "energy").unwrap();
    let drift = energy
        .iter()
        .map(|e| (e - energy[0]).abs())
        .fold(0.0, f64::max);
    assert!(drift < 1e-9, "drift {drift}");
}

#[test]
fn fit_reads_sweep_csv() {
    let dir = TempDir::new().unwrap();
    let config = write_config(
        dir.path(),
        &SWEEP_CONFIG.replace("L_count = 21", "L_count = 6"),
    );
    let sweep_out = dir.path().join("sweep");
    assert_eq!(mesojj("sweep", &config, &sweep_out).status.code(), Some(0));

    let input = sweep_out.join("sweep.csv");
    let fit_config = dir.path().join("fit.ini");
    fs::write(&fit_config, format!("[fit]\ninput = {}\n", input.display())).unwrap();
    let fit_out = dir.path().join("fit");
    assert_eq!(mesojj("fit", &fit_config, &fit_out).status.code(), Some(0));
    assert_eq!(
        fs::read(sweep_out.join("fit.json")).unwrap(),
        fs::read(fit_out.join("fit.json")).unwrap()
    );
}

#[test]
fn config_errors_exit_2() {
    let dir = TempDir::new().unwrap();
    let out = dir.path().join("out");
    for text in [
        "[geometry]\nkind = semi_infinite\nwidth = 3\n",
        "[grid]\nx_max = 100\ndx = 0.3\n",
        "[geometry]\nkind = finite_islands\nL_bar = 10\n",
        "[sweep]\nL_count = 0\n",
        "[solver]\ntol = -1\n",
    ] {
        let config = write_config(dir.path(), text);
        let result = mesojj("sweep", &config, &out);
        assert_eq!(result.status.code(), Some(2), "{text}");
        assert!(
            String::from_utf8_lossy(&result.stderr).contains("line"),
            "{text}"
        );
        assert!(!out.exists(), "{text}");
    }
    let missing = dir.path().join("missing.ini");
    assert_eq!(mesojj("solve", &missing, &out).status.code(), Some(2));
    let config = write_config(dir.path(), "");
    assert_eq!(mesojj("fit", &config, &out).status.code(), Some(2));
}

#[test]
fn non_convergence_exits_3() {
    let dir = TempDir::new().unwrap();
    let config = write_config(
        dir.path(),
        "[geometry]\nkind = semi_infinite\nL_bar = 20\n[solver]\nmax_iter = 1\n",
    );
    let out = dir.path().join("out");
    let result = mesojj("solve", &config, &out);
    assert_eq!(result.status.code(), Some(3));
    assert!(!out.exists());
}

#[test]
fn unwritable_output_exits_4() {
    let dir = TempDir::new().unwrap();
    let config = write_config(dir.path(), "[geometry]\nkind = semi_infinite\nL_bar = 4\n");
    let blocker = dir.path().join("file");
    fs::write(&blocker, "").unwrap();
    let result = mesojj("solve", &config, &blocker.join("out"));
    assert_eq!(result.status.code(), Some(4));
}

#[test]
fn thread_variable_is_validated() {
    let dir = TempDir::new().unwrap();
    let config = write_config(
        dir.path(),
        &SWEEP_CONFIG.replace("L_count = 21", "L_count = 3"),
    );
    let run = |threads: &str, out: &str| {
        Command::new(BIN)
            .args(["sweep", "--config"])
            .arg(&config)
            .arg("--out")
            .arg(dir.path().join(out))
            .env("MESOJJ_THREADS", threads)
            .output()
            .unwrap()
    };
    assert_eq!(run("many", "bad").status.code(), Some(2));
    assert_eq!(run("0", "serial").status.code(), Some(0));
    assert_eq!(run("4", "parallel").status.code(), Some(0));
}
