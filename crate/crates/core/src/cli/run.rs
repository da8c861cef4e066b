use std::fmt;
use std::fs;
use std::path::{Path, PathBuf};
use std::str::FromStr;
use std::time::{SystemTime, UNIX_EPOCH};

use serde::Serialize;
use serde_json::{json, Map, Value};

use super::config::{DriveMode, Format, RunConfig};
use super::output::{
    column, csv_string, json_string, parse_csv, read_file, sha256_hex, write_file, Cell,
};
use super::plot::{render_svg, Plot, Series, Style};
use crate::bvp::{mirror, solve_pair, Parity, ParityPair};
use crate::dynamics::{
    classify_ground_state, integrate, qubit_expansion, DriveKind, DriveSpec, IntegrationSpec,
    MadelungState, TwoModeParams,
};
use crate::junction::extract;
use crate::model::{derive_scales, sample_background};
use crate::par::Execution;
use crate::sweep::{
    extrapolate, fit_log_quadratic, fit_sweep, run_sweep, separation_values, SweepFits,
    SweepOptions,
};
use crate::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Command {
    Solve,
    Params,
    Sweep,
    Dynamics,
    Fit,
}

impl Command {
    pub fn as_str(self) -> &'static str {
        match self {
            Command::Solve => "solve",
            Command::Params => "params",
            Command::Sweep => "sweep",
            Command::Dynamics => "dynamics",
            Command::Fit => "fit",
        }
    }
}

impl fmt::Display for Command {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for Command {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "solve" => Ok(Command::Solve),
            "params" => Ok(Command::Params),
            "sweep" => Ok(Command::Sweep),
            "dynamics" => Ok(Command::Dynamics),
            "fit" => Ok(Command::Fit),
            other => Err(Error::Config(format!("unknown command {other:?}"))),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ReportFile {
    /// File name relative to the output directory.
    pub path: String,
    pub sha256: String,
    pub bytes: usize,
}

/// Manifest of a run, written as `report.json` next to the artifacts.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ReportBundle {
    pub command: String,
    pub version: &'static str,
    pub created_unix: u64,
    pub output_directory: PathBuf,
    /// Fully expanded configuration in INI form.
    pub config: String,
    pub files: Vec<ReportFile>,
    pub diagnostics: Map<String, Value>,
}

struct Emitter<'a> {
    dir: &'a Path,
    config: &'a RunConfig,
    files: Vec<ReportFile>,
}

impl Emitter<'_> {
    fn emit(&mut self, name: &str, format: Format, contents: &str) -> Result<()> {
        if !self.config.output.wants(format) {
            return Ok(());
        }
        let path = self.dir.join(name);
        write_file(&path, contents)?;
        self.files.push(ReportFile {
            path: name.to_string(),
            sha256: sha256_hex(contents.as_bytes()),
            bytes: contents.len(),
        });
        Ok(())
    }

    fn csv(&mut self, name: &str, headers: &[&str], rows: &[Vec<Cell>]) -> Result<()> {
        self.emit(name, Format::Csv, &csv_string(headers, rows)?)
    }

    fn json<T: Serialize>(&mut self, name: &str, value: &T) -> Result<()> {
        self.emit(name, Format::Json, &json_string(value)?)
    }

    fn svg(&mut self, name: &str, plot: &Plot) -> Result<()> {
        self.emit(name, Format::Svg, &render_svg(plot)?)
    }
}

/// Executes `command`, writes its artifacts and `report.json` into
/// `out_dir`, and returns the manifest.
pub fn run(
    config: &RunConfig,
    command: Command,
    out_dir: &Path,
    execution: Execution,
) -> Result<ReportBundle> {
    let mut diagnostics = Map::new();
    // compute before touching the file system so failures leave no output
    let artifacts = match command {
        Command::Solve => solve(config, &mut diagnostics)?,
        Command::Params => params(config, &mut diagnostics)?,
        Command::Sweep => sweep(config, execution, &mut diagnostics)?,
        Command::Dynamics => dynamics(config, &mut diagnostics)?,
        Command::Fit => fit(config, &mut diagnostics)?,
    };
    fs::create_dir_all(out_dir).map_err(|e| Error::io(out_dir, e))?;
    let mut emitter = Emitter {
        dir: out_dir,
        config,
        files: Vec::new(),
    };
    for artifact in artifacts {
        match artifact {
            Artifact::Csv {
                name,
                headers,
                rows,
            } => emitter.csv(name, &headers, &rows)?,
            Artifact::Json { name, value } => emitter.json(name, &value)?,
            Artifact::Svg { name, plot } => emitter.svg(name, &plot)?,
        }
    }
    let bundle = ReportBundle {
        command: command.to_string(),
        version: env!("CARGO_PKG_VERSION"),
        created_unix: SystemTime::now()
            .duration_since(UNIX_EPOCH)
            .map_or(0, |d| d.as_secs()),
        output_directory: out_dir.to_path_buf(),
        config: config.to_ini(),
        files: emitter.files,
        diagnostics,
    };
    let report = out_dir.join("report.json");
    write_file(&report, &json_string(&bundle)?)?;
    Ok(bundle)
}

enum Artifact {
    Csv {
        name: &'static str,
        headers: Vec<&'static str>,
        rows: Vec<Vec<Cell>>,
    },
    Json {
        name: &'static str,
        value: Value,
    },
    Svg {
        name: &'static str,
        plot: Plot,
    },
}

fn to_value<T: Serialize>(v: &T) -> Result<Value> {
    Ok(serde_json::to_value(v)?)
}

fn solve_configured(
    config: &RunConfig,
    diagnostics: &mut Map<String, Value>,
) -> Result<ParityPair> {
    let pair = solve_pair(&config.geometry, &config.grid, &config.solver.options())?;
    diagnostics.insert(
        "solver".into(),
        json!({
            "even": { "iterations": pair.even().iterations, "residual_norm": pair.even().residual_norm },
            "odd": { "iterations": pair.odd().iterations, "residual_norm": pair.odd().residual_norm },
        }),
    );
    Ok(pair)
}

fn line_plot(title: &str, y_label: &str, x: &[f64], series: Vec<(&str, Vec<f64>, Style)>) -> Plot {
    Plot {
        title: title.into(),
        x_label: "x / xi".into(),
        y_label: y_label.into(),
        log_y: false,
        series: series
            .into_iter()
            .enumerate()
            .map(|(k, (label, y, style))| Series::new(label, x.to_vec(), y, style, k))
            .collect(),
    }
}

fn solve(config: &RunConfig, diagnostics: &mut Map<String, Value>) -> Result<Vec<Artifact>> {
    let pair = solve_configured(config, diagnostics)?;
    let x = config.grid.full_line_nodes();
    let psi_plus = mirror(&pair.even().psi, Parity::Even);
    let psi_minus = mirror(&pair.odd().psi, Parity::Odd);
    let v_plus = mirror(&pair.even().v, Parity::Even);
    let v_minus = mirror(&pair.odd().v, Parity::Even);
    let rho = mirror(
        sample_background(&config.geometry, &config.grid)?.values(),
        Parity::Even,
    );

    let states = (0..x.len())
        .map(|i| {
            vec![
                x[i].into(),
                psi_plus[i].into(),
                psi_minus[i].into(),
                v_plus[i].into(),
                v_minus[i].into(),
            ]
        })
        .collect();
    let basis = (0..x.len())
        .map(|i| vec![x[i].into(), pair.psi_l()[i].into(), pair.psi_r()[i].into()])
        .collect();
    Ok(vec![
        Artifact::Csv {
            name: "parity_states.csv",
            headers: vec!["x_bar", "psi_plus", "psi_minus", "v_plus", "v_minus"],
            rows: states,
        },
        Artifact::Csv {
            name: "basis.csv",
            headers: vec!["x_bar", "psi_L", "psi_R"],
            rows: basis,
        },
        Artifact::Svg {
            name: "wavefunctions.svg",
            plot: line_plot(
                "Parity states",
                "psi",
                &x,
                vec![
                    ("psi+", psi_plus, Style::Solid),
                    ("psi-", psi_minus, Style::Solid),
                    ("background", rho, Style::Dotted),
                ],
            ),
        },
        Artifact::Svg {
            name: "potentials.svg",
            plot: line_plot(
                "Potentials",
                "V",
                &x,
                vec![("V+", v_plus, Style::Solid), ("V-", v_minus, Style::Solid)],
            ),
        },
    ])
}

fn params(config: &RunConfig, diagnostics: &mut Map<String, Value>) -> Result<Vec<Artifact>> {
    let pair = solve_configured(config, diagnostics)?;
    let params = extract(&pair)?;
    let scales = derive_scales(&config.material)?;
    let physical = params.to_physical(&scales, &config.material);
    let mut out = vec![
        Artifact::Json {
            name: "params.json",
            value: to_value(&params)?,
        },
        Artifact::Json {
            name: "physical.json",
            value: json!({ "scales": to_value(&scales)?, "params": to_value(&physical)? }),
        },
    ];
    match classify_ground_state(params.ej1_bar, params.ej2_bar) {
        Ok(ground) => out.push(Artifact::Json {
            name: "ground_state.json",
            value: to_value(&ground)?,
        }),
        Err(e) => {
            diagnostics.insert("ground_state".into(), Value::String(e.to_string()));
        }
    }
    if params.c_j_bar.is_some() {
        out.push(Artifact::Json {
            name: "qubit.json",
            value: to_value(&qubit_expansion(&params)?)?,
        });
    }
    Ok(out)
}

fn fit_artifacts(l: &[f64], ic1: &[f64], ic2: &[f64], fits: Option<&SweepFits>) -> Vec<Artifact> {
    let abs = |v: &[f64]| v.iter().map(|x| x.abs()).collect::<Vec<_>>();
    let mut series = vec![
        Series::new("|Ic1|", l.to_vec(), abs(ic1), Style::Markers, 0),
        Series::new("|Ic2|", l.to_vec(), abs(ic2), Style::Markers, 1),
    ];
    let mut out = Vec::new();
    if let Some(fits) = fits {
        let (lo, hi) = l
            .iter()
            .fold((f64::INFINITY, f64::NEG_INFINITY), |(a, b), &x| {
                (a.min(x), b.max(x))
            });
        let dense: Vec<f64> = (0..=200)
            .map(|k| lo + (hi - lo) * k as f64 / 200.0)
            .collect();
        for (label, fit, color) in [("Ic1 fit", &fits.ic1, 0), ("Ic2 fit", &fits.ic2, 1)] {
            let y = dense.iter().map(|&x| extrapolate(fit, x)).collect();
            series.push(Series::new(label, dense.clone(), y, Style::Dotted, color));
        }
        out.push(Artifact::Json {
            name: "fit.json",
            value: serde_json::to_value(fits).unwrap_or(Value::Null),
        });
    }
    out.push(Artifact::Svg {
        name: "critical_currents.svg",
        plot: Plot {
            title: "Critical currents".into(),
            x_label: "L / xi".into(),
            y_label: "|Ic| (prefactor units)".into(),
            log_y: true,
            series,
        },
    });
    out
}

fn sweep(
    config: &RunConfig,
    execution: Execution,
    diagnostics: &mut Map<String, Value>,
) -> Result<Vec<Artifact>> {
    let s = &config.sweep;
    let l = separation_values(s.l_start, s.l_end, s.l_count)?;
    let opts = SweepOptions {
        warm_start: s.warm_start,
        execution,
    };
    let result = run_sweep(
        &l,
        &config.geometry,
        &config.grid,
        &config.solver.options(),
        &opts,
    )?;
    diagnostics.insert("failures".into(), to_value(&result.failures)?);
    diagnostics.insert("points".into(), json!(result.records.len()));

    let rows = result
        .records
        .iter()
        .map(|r| {
            vec![
                r.l_bar.into(),
                r.ic1_bar.into(),
                r.ic2_bar.into(),
                r.ej1_bar.into(),
                r.ej2_bar.into(),
                r.ej1_dual_bar.into(),
                r.ej2_dual_bar.into(),
                r.eminus_minus_eplus.into(),
                r.iterations.into(),
                r.residual_norm.into(),
            ]
        })
        .collect();
    let fits = if result.records.len() >= 3 {
        Some(fit_sweep(&result)?)
    } else {
        diagnostics.insert(
            "fit".into(),
            Value::String("fewer than 3 converged points".into()),
        );
        None
    };
    let lv: Vec<f64> = result.records.iter().map(|r| r.l_bar).collect();
    let ic1: Vec<f64> = result.records.iter().map(|r| r.ic1_bar).collect();
    let ic2: Vec<f64> = result.records.iter().map(|r| r.ic2_bar).collect();
    let mut out = vec![Artifact::Csv {
        name: "sweep.csv",
        headers: SWEEP_HEADERS.to_vec(),
        rows,
    }];
    out.extend(fit_artifacts(&lv, &ic1, &ic2, fits.as_ref()));
    Ok(out)
}

/// Column order of `sweep.csv`.
pub const SWEEP_HEADERS: [&str; 10] = [
    "L_bar",
    "Ic1_bar",
    "Ic2_bar",
    "Ej1_bar",
    "Ej2_bar",
    "Ej1_dual_bar",
    "Ej2_dual_bar",
    "Eminus_minus_Eplus",
    "iterations",
    "residual_norm",
];

fn dynamics(config: &RunConfig, diagnostics: &mut Map<String, Value>) -> Result<Vec<Artifact>> {
    let d = &config.dynamics;
    let (mut params, solved_dipole) = match (d.ej1, d.ej2) {
        (Some(ej1), Some(ej2)) => (TwoModeParams::new(ej1, ej2, 0.0)?, None),
        _ => {
            let pair = solve_configured(config, diagnostics)?;
            let jp = extract(&pair)?;
            (TwoModeParams::from_junction(&jp), jp.d_bar)
        }
    };
    if let Some(c) = d.charging {
        params = TwoModeParams::new(params.ej1, params.ej2, c)?;
    }
    let dipole = d.dipole.or(solved_dipole).unwrap_or(1.0);
    let kind = match d.drive {
        DriveMode::None => DriveKind::Constant { v_ext_prime: 0.0 },
        DriveMode::Constant => DriveKind::Constant {
            v_ext_prime: d.drive_amplitude,
        },
        DriveMode::Sinusoid => DriveKind::Sinusoid {
            amplitude: d.drive_amplitude,
            frequency: d.drive_frequency,
            phase: d.drive_phase,
        },
    };
    let drive = DriveSpec { kind, dipole };
    let mut spec = IntegrationSpec::new(d.dt, d.t_end, d.form);
    spec.renormalize = d.renormalize;
    let traj = integrate(&MadelungState::new(d.n0, d.phi0)?, &params, &drive, &spec)?;
    diagnostics.insert("two_mode".into(), to_value(&params)?);
    diagnostics.insert("dipole".into(), json!(dipole));
    diagnostics.insert("norm_drift".into(), json!(traj.max_norm_drift()));
    diagnostics.insert("energy_drift".into(), json!(traj.max_energy_drift()));

    let rows = traj
        .samples
        .iter()
        .map(|s| {
            vec![
                s.time.into(),
                s.n.into(),
                s.phi.into(),
                s.energy.into(),
                s.norm.into(),
            ]
        })
        .collect();
    let stride = (traj.samples.len() / 2000).max(1);
    let thin: Vec<_> = traj.samples.iter().step_by(stride).collect();
    let t: Vec<f64> = thin.iter().map(|s| s.time).collect();
    let plot = Plot {
        title: "Two-mode trajectory".into(),
        x_label: "time".into(),
        y_label: "n, phi".into(),
        log_y: false,
        series: vec![
            Series::new(
                "n",
                t.clone(),
                thin.iter().map(|s| s.n).collect(),
                Style::Solid,
                0,
            ),
            Series::new(
                "phi",
                t,
                thin.iter().map(|s| s.phi).collect(),
                Style::Solid,
                1,
            ),
        ],
    };
    Ok(vec![
        Artifact::Csv {
            name: "trajectory.csv",
            headers: vec!["time", "n", "phi", "energy", "norm"],
            rows,
        },
        Artifact::Svg {
            name: "trajectory.svg",
            plot,
        },
    ])
}

fn fit(config: &RunConfig, diagnostics: &mut Map<String, Value>) -> Result<Vec<Artifact>> {
    let input = config
        .fit_input
        .as_ref()
        .ok_or_else(|| Error::Config("fit needs [fit] input = <sweep csv>".into()))?;
    let (header, rows) = parse_csv(&read_file(input)?)?;
    let l = column(&header, &rows, "L_bar")?;
    let ic1 = column(&header, &rows, "Ic1_bar")?;
    let ic2 = column(&header, &rows, "Ic2_bar")?;
    let fits = SweepFits {
        ic1: fit_log_quadratic(&l, &ic1)?,
        ic2: fit_log_quadratic(&l, &ic2)?,
    };
    diagnostics.insert("points".into(), json!(l.len()));
    Ok(fit_artifacts(&l, &ic1, &ic2, Some(&fits)))
}
