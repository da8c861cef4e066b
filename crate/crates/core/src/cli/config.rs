//! INI-style run configuration.
//!
//! ```ini
//! [geometry]
//! kind = finite_islands
//! L_bar = 10
//! a_bar = 40
//!
//! [grid]
//! x_max = 100
//! dx = 0.25
//! ```
//!
//! Lines starting with `#` or `;` are comments. Every section and key is
//! optional; unknown sections and keys are rejected.

use std::collections::BTreeMap;
use std::fmt::Write as _;
use std::path::PathBuf;
use std::str::FromStr;

use crate::bvp::{InitialGuess, SolverOptions, ISOLATED_MARGIN};
use crate::dynamics::Form;
use crate::model::{
    build_grid, density_for_london_depth, Geometry, GeometryKind, Grid, MaterialSpec,
    DEFAULT_LONDON_DEPTH,
};
use crate::{Error, Result};

#[derive(Debug, Clone, PartialEq)]
pub struct SolverConfig {
    pub tol: f64,
    pub max_iter: usize,
    pub damping: f64,
}

impl Default for SolverConfig {
    fn default() -> Self {
        let d = SolverOptions::default();
        SolverConfig {
            tol: d.tol,
            max_iter: d.max_iter,
            damping: d.damping,
        }
    }
}

impl SolverConfig {
    pub fn options(&self) -> SolverOptions {
        SolverOptions {
            tol: self.tol,
            max_iter: self.max_iter,
            damping: self.damping,
            initial_guess: InitialGuess::Bulk,
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct SweepConfig {
    pub l_start: f64,
    pub l_end: f64,
    pub l_count: usize,
    pub warm_start: bool,
}

impl Default for SweepConfig {
    fn default() -> Self {
        SweepConfig {
            l_start: 0.0,
            l_end: 40.0,
            l_count: 21,
            warm_start: true,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum DriveMode {
    None,
    Constant,
    Sinusoid,
}

impl DriveMode {
    fn as_str(self) -> &'static str {
        match self {
            DriveMode::None => "none",
            DriveMode::Constant => "constant",
            DriveMode::Sinusoid => "sinusoid",
        }
    }
}

impl FromStr for DriveMode {
    type Err = String;

    fn from_str(s: &str) -> std::result::Result<Self, String> {
        match s {
            "none" => Ok(DriveMode::None),
            "constant" => Ok(DriveMode::Constant),
            "sinusoid" => Ok(DriveMode::Sinusoid),
            _ => Err("expected none, constant or sinusoid".into()),
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct DynamicsConfig {
    pub form: Form,
    pub n0: f64,
    pub phi0: f64,
    pub dt: f64,
    pub t_end: f64,
    pub drive: DriveMode,
    /// `V'_ext` for a constant drive, peak value for a sinusoid.
    pub drive_amplitude: f64,
    pub drive_frequency: f64,
    pub drive_phase: f64,
    pub renormalize: bool,
    /// Overrides for the two-mode coefficients; when `ej1` and `ej2` are
    /// absent they are extracted from a solve of the configured geometry.
    pub ej1: Option<f64>,
    pub ej2: Option<f64>,
    pub charging: Option<f64>,
    pub dipole: Option<f64>,
}

impl Default for DynamicsConfig {
    fn default() -> Self {
        DynamicsConfig {
            form: Form::Complex,
            n0: 0.0,
            phi0: 0.0,
            dt: 1e-3,
            t_end: 10.0,
            drive: DriveMode::None,
            drive_amplitude: 0.0,
            drive_frequency: 0.0,
            drive_phase: 0.0,
            renormalize: false,
            ej1: None,
            ej2: None,
            charging: None,
            dipole: None,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord)]
pub enum Format {
    Csv,
    Json,
    Svg,
}

impl Format {
    fn as_str(self) -> &'static str {
        match self {
            Format::Csv => "csv",
            Format::Json => "json",
            Format::Svg => "svg",
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct OutputConfig {
    pub directory: PathBuf,
    pub formats: Vec<Format>,
}

impl Default for OutputConfig {
    fn default() -> Self {
        OutputConfig {
            directory: PathBuf::from("out"),
            formats: vec![Format::Csv, Format::Json, Format::Svg],
        }
    }
}

impl OutputConfig {
    pub fn wants(&self, format: Format) -> bool {
        self.formats.contains(&format)
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct RunConfig {
    pub material: MaterialSpec,
    pub geometry: Geometry,
    pub grid: Grid,
    pub solver: SolverConfig,
    pub sweep: SweepConfig,
    pub dynamics: DynamicsConfig,
    /// CSV file with `L_bar`, `Ic1_bar`, `Ic2_bar` columns for the `fit` command.
    pub fit_input: Option<PathBuf>,
    pub output: OutputConfig,
}

impl Default for RunConfig {
    fn default() -> Self {
        RunConfig {
            material: MaterialSpec::default(),
            geometry: Geometry::SemiInfinite { gap: 0.0 },
            grid: build_grid(100.0, 0.25).expect("default grid"),
            solver: SolverConfig::default(),
            sweep: SweepConfig::default(),
            dynamics: DynamicsConfig::default(),
            fit_input: None,
            output: OutputConfig::default(),
        }
    }
}

const SECTIONS: &[(&str, &[&str])] = &[
    ("material", &["q", "m", "n_s", "sigma"]),
    ("geometry", &["kind", "L_bar", "a_bar"]),
    ("grid", &["x_max", "dx"]),
    ("solver", &["tol", "max_iter", "damping"]),
    ("sweep", &["L_start", "L_end", "L_count", "warm_start"]),
    (
        "dynamics",
        &[
            "form",
            "n0",
            "phi0",
            "dt",
            "t_end",
            "drive",
            "drive_amplitude",
            "drive_frequency",
            "drive_phase",
            "renormalize",
            "ej1",
            "ej2",
            "charging",
            "dipole",
        ],
    ),
    ("fit", &["input"]),
    ("output", &["directory", "formats"]),
];

fn err(line: usize, msg: impl std::fmt::Display) -> Error {
    Error::Config(format!("line {line}: {msg}"))
}

/// Key/value pairs of one section with their line numbers.
#[derive(Default)]
struct Section {
    line: usize,
    entries: BTreeMap<String, (String, usize)>,
}

impl Section {
    fn raw(&self, key: &str) -> Option<(&str, usize)> {
        self.entries.get(key).map(|(v, l)| (v.as_str(), *l))
    }

    fn parse<T: FromStr>(&self, section: &str, key: &str, what: &str) -> Result<Option<T>> {
        match self.raw(key) {
            None => Ok(None),
            Some((v, line)) => v.parse::<T>().map(Some).map_err(|_| {
                err(
                    line,
                    format!("[{section}] {key}: expected {what}, got {v:?}"),
                )
            }),
        }
    }

    fn real(&self, section: &str, key: &str) -> Result<Option<f64>> {
        let value: Option<f64> = self.parse(section, key, "a number")?;
        match value {
            Some(v) if !v.is_finite() => Err(err(
                self.raw(key).map_or(self.line, |(_, l)| l),
                format!("[{section}] {key} must be finite"),
            )),
            v => Ok(v),
        }
    }

    fn line_of(&self, key: &str) -> usize {
        self.raw(key).map_or(self.line, |(_, l)| l)
    }
}

fn parse_bool(section: &Section, name: &str, key: &str) -> Result<Option<bool>> {
    match section.raw(key) {
        None => Ok(None),
        Some(("true" | "yes" | "on" | "1", _)) => Ok(Some(true)),
        Some(("false" | "no" | "off" | "0", _)) => Ok(Some(false)),
        Some((v, line)) => Err(err(
            line,
            format!("[{name}] {key}: expected a boolean, got {v:?}"),
        )),
    }
}

fn tokenize(text: &str) -> Result<BTreeMap<String, Section>> {
    let mut sections: BTreeMap<String, Section> = BTreeMap::new();
    let mut current: Option<String> = None;
    for (idx, raw) in text.lines().enumerate() {
        let line = idx + 1;
        let trimmed = raw.trim();
        if trimmed.is_empty() || trimmed.starts_with('#') || trimmed.starts_with(';') {
            continue;
        }
        if let Some(rest) = trimmed.strip_prefix('[') {
            let name = rest
                .strip_suffix(']')
                .ok_or_else(|| err(line, format!("malformed section header {trimmed:?}")))?
                .trim();
            if !SECTIONS.iter().any(|(s, _)| *s == name) {
                return Err(err(line, format!("unknown section [{name}]")));
            }
            if sections.contains_key(name) {
                return Err(err(line, format!("duplicate section [{name}]")));
            }
            sections.insert(
                name.to_string(),
                Section {
                    line,
                    entries: BTreeMap::new(),
                },
            );
            current = Some(name.to_string());
            continue;
        }
        let (key, value) = trimmed
            .split_once('=')
            .ok_or_else(|| err(line, format!("expected key = value, got {trimmed:?}")))?;
        let (key, value) = (key.trim(), value.trim());
        let name = current
            .as_deref()
            .ok_or_else(|| err(line, format!("key {key:?} appears before any section")))?;
        let allowed = SECTIONS
            .iter()
            .find(|(s, _)| *s == name)
            .map(|(_, k)| *k)
            .unwrap_or(&[]);
        if !allowed.contains(&key) {
            return Err(err(
                line,
                format!("unknown key {key:?} in section [{name}]"),
            ));
        }
        let section = sections.get_mut(name).expect("section registered");
        if section
            .entries
            .insert(key.to_string(), (value.to_string(), line))
            .is_some()
        {
            return Err(err(
                line,
                format!("duplicate key {key:?} in section [{name}]"),
            ));
        }
    }
    Ok(sections)
}

/// Parses and validates a configuration, applying defaults for absent keys.
pub fn parse_config(text: &str) -> Result<RunConfig> {
    let sections = tokenize(text)?;
    let empty = Section::default();
    let get = |name: &str| sections.get(name).unwrap_or(&empty);
    let mut cfg = RunConfig::default();

    let s = get("material");
    let default = MaterialSpec::default();
    let q = s.real("material", "q")?.unwrap_or(default.charge);
    let m = s.real("material", "m")?.unwrap_or(default.mass);
    let n_s = s
        .real("material", "n_s")?
        .unwrap_or_else(|| density_for_london_depth(q, m, DEFAULT_LONDON_DEPTH));
    let sigma = s
        .real("material", "sigma")?
        .unwrap_or(default.cross_section);
    cfg.material = MaterialSpec::new(q, m, n_s, sigma)
        .map_err(|e| err(s.line, format!("[material] {}", strip(e))))?;

    let s = get("geometry");
    let kind = match s.raw("kind") {
        None | Some(("semi_infinite", _)) => GeometryKind::SemiInfinite,
        Some(("finite_islands", _)) => GeometryKind::FiniteIslands,
        Some((v, line)) => {
            return Err(err(
                line,
                format!("[geometry] kind: expected semi_infinite or finite_islands, got {v:?}"),
            ))
        }
    };
    let gap = s.real("geometry", "L_bar")?.unwrap_or(0.0);
    let island = s.real("geometry", "a_bar")?;
    cfg.geometry = match (kind, island) {
        (GeometryKind::SemiInfinite, None) => Geometry::semi_infinite(gap),
        (GeometryKind::SemiInfinite, Some(_)) => {
            return Err(err(
                s.line_of("a_bar"),
                "[geometry] a_bar only applies to finite_islands",
            ))
        }
        (GeometryKind::FiniteIslands, Some(a)) => Geometry::finite_islands(gap, a),
        (GeometryKind::FiniteIslands, None) => {
            return Err(err(s.line, "[geometry] finite_islands needs a_bar"))
        }
    }
    .map_err(|e| err(s.line_of("L_bar"), format!("[geometry] {}", strip(e))))?;

    let s = get("grid");
    let x_max = s.real("grid", "x_max")?.unwrap_or(100.0);
    let dx = s.real("grid", "dx")?.unwrap_or(0.25);
    cfg.grid =
        build_grid(x_max, dx).map_err(|e| err(s.line_of("dx"), format!("[grid] {}", strip(e))))?;
    let needed = match cfg.geometry.kind() {
        GeometryKind::SemiInfinite => cfg.geometry.extent(),
        GeometryKind::FiniteIslands => cfg.geometry.extent() + ISOLATED_MARGIN,
    };
    if needed > x_max {
        return Err(err(
            s.line_of("x_max"),
            format!("[grid] x_max must be at least {needed} for this geometry"),
        ));
    }

    let s = get("solver");
    let d = SolverConfig::default();
    cfg.solver = SolverConfig {
        tol: s.real("solver", "tol")?.unwrap_or(d.tol),
        max_iter: s
            .parse("solver", "max_iter", "a non-negative integer")?
            .unwrap_or(d.max_iter),
        damping: s.real("solver", "damping")?.unwrap_or(d.damping),
    };
    cfg.solver
        .options()
        .validate()
        .map_err(|e| err(s.line, format!("[solver] {}", strip(e))))?;

    let s = get("sweep");
    let d = SweepConfig::default();
    cfg.sweep = SweepConfig {
        l_start: s.real("sweep", "L_start")?.unwrap_or(d.l_start),
        l_end: s.real("sweep", "L_end")?.unwrap_or(d.l_end),
        l_count: s
            .parse("sweep", "L_count", "a non-negative integer")?
            .unwrap_or(d.l_count),
        warm_start: parse_bool(s, "sweep", "warm_start")?.unwrap_or(d.warm_start),
    };
    crate::sweep::separation_values(cfg.sweep.l_start, cfg.sweep.l_end, cfg.sweep.l_count)
        .map_err(|e| err(s.line, format!("[sweep] {}", strip(e))))?;

    let s = get("dynamics");
    let d = DynamicsConfig::default();
    let form = match s.raw("form") {
        None => d.form,
        Some((v, line)) => v
            .parse::<Form>()
            .map_err(|e| err(line, format!("[dynamics] form: {}", strip(e))))?,
    };
    let drive = match s.raw("drive") {
        None => d.drive,
        Some((v, line)) => v
            .parse::<DriveMode>()
            .map_err(|e| err(line, format!("[dynamics] drive: {e}, got {v:?}")))?,
    };
    cfg.dynamics = DynamicsConfig {
        form,
        n0: s.real("dynamics", "n0")?.unwrap_or(d.n0),
        phi0: s.real("dynamics", "phi0")?.unwrap_or(d.phi0),
        dt: s.real("dynamics", "dt")?.unwrap_or(d.dt),
        t_end: s.real("dynamics", "t_end")?.unwrap_or(d.t_end),
        drive,
        drive_amplitude: s
            .real("dynamics", "drive_amplitude")?
            .unwrap_or(d.drive_amplitude),
        drive_frequency: s
            .real("dynamics", "drive_frequency")?
            .unwrap_or(d.drive_frequency),
        drive_phase: s.real("dynamics", "drive_phase")?.unwrap_or(d.drive_phase),
        renormalize: parse_bool(s, "dynamics", "renormalize")?.unwrap_or(d.renormalize),
        ej1: s.real("dynamics", "ej1")?,
        ej2: s.real("dynamics", "ej2")?,
        charging: s.real("dynamics", "charging")?,
        dipole: s.real("dynamics", "dipole")?,
    };
    let dy = &cfg.dynamics;
    if dy.n0.abs() > 1.0 {
        return Err(err(s.line_of("n0"), "[dynamics] n0 must lie in [-1, 1]"));
    }
    if !(dy.dt > 0.0) {
        return Err(err(s.line_of("dt"), "[dynamics] dt must be positive"));
    }
    if dy.t_end < 0.0 {
        return Err(err(
            s.line_of("t_end"),
            "[dynamics] t_end must be non-negative",
        ));
    }
    if dy.ej1.is_some() != dy.ej2.is_some() {
        return Err(err(s.line, "[dynamics] ej1 and ej2 must be given together"));
    }
    if dy.charging.is_some_and(|c| c < 0.0) {
        return Err(err(
            s.line_of("charging"),
            "[dynamics] charging must be non-negative",
        ));
    }

    let s = get("fit");
    cfg.fit_input = s.raw("input").map(|(v, _)| PathBuf::from(v));

    let s = get("output");
    if let Some((v, _)) = s.raw("directory") {
        cfg.output.directory = PathBuf::from(v);
    }
    if let Some((v, line)) = s.raw("formats") {
        let mut formats = Vec::new();
        for item in v.split(',').map(str::trim).filter(|t| !t.is_empty()) {
            let f = match item {
                "csv" => Format::Csv,
                "json" => Format::Json,
                "svg" => Format::Svg,
                other => return Err(err(line, format!("[output] unknown format {other:?}"))),
            };
            if !formats.contains(&f) {
                formats.push(f);
            }
        }
        formats.sort();
        cfg.output.formats = formats;
    }
    Ok(cfg)
}

/// Error message without the variant prefix.
fn strip(e: Error) -> String {
    match e {
        Error::Config(m) | Error::InvalidInput(m) => m,
        other => other.to_string(),
    }
}

impl RunConfig {
    /// Writes every setting explicitly; `parse_config(cfg.to_ini())` returns `cfg`.
    pub fn to_ini(&self) -> String {
        let mut s = String::new();
        let m = &self.material;
        let _ = writeln!(s, "[material]");
        let _ = writeln!(s, "q = {:?}", m.charge);
        let _ = writeln!(s, "m = {:?}", m.mass);
        let _ = writeln!(s, "n_s = {:?}", m.density);
        let _ = writeln!(s, "sigma = {:?}", m.cross_section);

        let _ = writeln!(s, "\n[geometry]");
        match self.geometry {
            Geometry::SemiInfinite { gap } => {
                let _ = writeln!(s, "kind = semi_infinite");
                let _ = writeln!(s, "L_bar = {gap:?}");
            }
            Geometry::FiniteIslands { gap, island } => {
                let _ = writeln!(s, "kind = finite_islands");
                let _ = writeln!(s, "L_bar = {gap:?}");
                let _ = writeln!(s, "a_bar = {island:?}");
            }
        }

        let _ = writeln!(s, "\n[grid]");
        let _ = writeln!(s, "x_max = {:?}", self.grid.x_max());
        let _ = writeln!(s, "dx = {:?}", self.grid.dx());

        let _ = writeln!(s, "\n[solver]");
        let _ = writeln!(s, "tol = {:?}", self.solver.tol);
        let _ = writeln!(s, "max_iter = {}", self.solver.max_iter);
        let _ = writeln!(s, "damping = {:?}", self.solver.damping);

        let w = &self.sweep;
        let _ = writeln!(s, "\n[sweep]");
        let _ = writeln!(s, "L_start = {:?}", w.l_start);
        let _ = writeln!(s, "L_end = {:?}", w.l_end);
        let _ = writeln!(s, "L_count = {}", w.l_count);
        let _ = writeln!(s, "warm_start = {}", w.warm_start);

        let d = &self.dynamics;
        let form = match d.form {
            Form::Complex => "complex",
            Form::Madelung => "madelung",
            Form::ChargeFlux => "charge_flux",
        };
        let _ = writeln!(s, "\n[dynamics]");
        let _ = writeln!(s, "form = {form}");
        let _ = writeln!(s, "n0 = {:?}", d.n0);
        let _ = writeln!(s, "phi0 = {:?}", d.phi0);
        let _ = writeln!(s, "dt = {:?}", d.dt);
        let _ = writeln!(s, "t_end = {:?}", d.t_end);
        let _ = writeln!(s, "drive = {}", d.drive.as_str());
        let _ = writeln!(s, "drive_amplitude = {:?}", d.drive_amplitude);
        let _ = writeln!(s, "drive_frequency = {:?}", d.drive_frequency);
        let _ = writeln!(s, "drive_phase = {:?}", d.drive_phase);
        let _ = writeln!(s, "renormalize = {}", d.renormalize);
        for (key, value) in [
            ("ej1", d.ej1),
            ("ej2", d.ej2),
            ("charging", d.charging),
            ("dipole", d.dipole),
        ] {
            if let Some(v) = value {
                let _ = writeln!(s, "{key} = {v:?}");
            }
        }

        if let Some(input) = &self.fit_input {
            let _ = writeln!(s, "\n[fit]");
            let _ = writeln!(s, "input = {}", input.display());
        }

        let _ = writeln!(s, "\n[output]");
        let _ = writeln!(s, "directory = {}", self.output.directory.display());
        let formats: Vec<&str> = self.output.formats.iter().map(|f| f.as_str()).collect();
        let _ = writeln!(s, "formats = {}", formats.join(","));
        s
    }
}
