//! `.scenario` files: TOML with a fixed set of sections and keys.
//!
//! Every problem found is collected, so one run reports all of them.

use std::fmt;
use std::path::{Path, PathBuf};

use chi2sim::model::{
    BandDispersion, BandLoss, CouplingModel, DispersionRelation, Envelope, InteractionWindow, LossProfile, UnitMode,
    WaveformShape, WaveguideModel,
};
use chi2sim::observables::Simulation;
use chi2sim::quadrature::{Grid1D, QuadratureConfig};
use chi2sim::scenario::{InputSpec, Scenario, Targets};
use num_complex::Complex64;
use toml::{Table, Value};

#[derive(Debug, Clone, PartialEq)]
pub struct ConfigError {
    pub source: String,
    pub problems: Vec<String>,
}

impl fmt::Display for ConfigError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "invalid scenario {}:", self.source)?;
        for p in &self.problems {
            write!(f, "\n  - {p}")?;
        }
        Ok(())
    }
}

impl std::error::Error for ConfigError {}

const SECTIONS: &[(&str, &[&str])] = &[
    ("units", &["mode"]),
    ("dispersion", &["v_F", "v_SH", "k_F0", "k_SH0", "omega_F0", "omega_SH0"]),
    ("loss", &["F", "SH", "F_table", "SH_table"]),
    ("coupling", &["s0", "envelope", "width", "offset"]),
    ("window", &["T", "L", "v_in"]),
    ("grids", &["F_min", "F_max", "F_n", "SH_min", "SH_max", "SH_n"]),
    ("quadrature", &["tolerance", "doublings", "nodes"]),
    ("targets", &["ks", "ki", "kp"]),
];

const PROCESSES: &[(&str, &[&str])] = &[
    ("spdc", &["pump"]),
    ("dfg", &["seed", "pump"]),
    ("sfg", &["signal", "idler"]),
];

const INPUT_KEYS: &[&str] = &["z_abs", "z_phase", "shape", "center", "width"];

struct Reader<'a> {
    root: &'a Table,
    base_dir: PathBuf,
    problems: Vec<String>,
}

impl<'a> Reader<'a> {
    fn problem(&mut self, msg: impl Into<String>) {
        self.problems.push(msg.into());
    }

    fn section(&mut self, path: &str) -> Option<&'a Table> {
        let mut table = self.root;
        for part in path.split('.') {
            match table.get(part) {
                None => return None,
                Some(Value::Table(t)) => table = t,
                Some(_) => {
                    self.problem(format!("`{path}` must be a section"));
                    return None;
                }
            }
        }
        Some(table)
    }

    fn check_keys(&mut self, path: &str, table: &Table, allowed: &[&str]) {
        for key in table.keys() {
            if !allowed.contains(&key.as_str()) {
                self.problem(format!("unknown key `{key}` in [{path}]"));
            }
        }
    }

    fn number(&mut self, path: &str, key: &str, required: bool) -> Option<f64> {
        let value = self.section(path).and_then(|t| t.get(key));
        match value {
            Some(Value::Float(x)) => Some(*x),
            Some(Value::Integer(n)) => Some(*n as f64),
            Some(_) => {
                self.problem(format!("{path}.{key} must be a number"));
                None
            }
            None => {
                if required {
                    self.problem(format!("{path}.{key} is required"));
                }
                None
            }
        }
    }

    fn count(&mut self, path: &str, key: &str, required: bool) -> Option<u64> {
        match self.section(path).and_then(|t| t.get(key)) {
            Some(Value::Integer(n)) if *n >= 0 => Some(*n as u64),
            Some(_) => {
                self.problem(format!("{path}.{key} must be a non-negative integer"));
                None
            }
            None => {
                if required {
                    self.problem(format!("{path}.{key} is required"));
                }
                None
            }
        }
    }

    fn string(&mut self, path: &str, key: &str) -> Option<&'a str> {
        match self.section(path).and_then(|t| t.get(key)) {
            Some(Value::String(s)) => Some(s.as_str()),
            Some(_) => {
                self.problem(format!("{path}.{key} must be a string"));
                None
            }
            None => None,
        }
    }

    fn keep<T>(&mut self, result: chi2sim::Result<T>) -> Option<T> {
        match result {
            Ok(v) => Some(v),
            Err(e) => {
                self.problem(e.to_string());
                None
            }
        }
    }
}

/// Reads a two-column `k beta` table; blank lines and `#` comments are skipped.
fn read_loss_table(path: &Path) -> Result<Vec<(f64, f64)>, String> {
    let text = std::fs::read_to_string(path).map_err(|e| format!("cannot read loss table {}: {e}", path.display()))?;
    let mut rows = Vec::new();
    for (n, line) in text.lines().enumerate() {
        let line = line.split('#').next().unwrap_or("").trim();
        if line.is_empty() {
            continue;
        }
        let cols: Vec<&str> = line.split(|c: char| c.is_whitespace() || c == ',').filter(|s| !s.is_empty()).collect();
        let parsed: Vec<f64> = cols.iter().filter_map(|c| c.parse().ok()).collect();
        if cols.len() != 2 || parsed.len() != 2 {
            return Err(format!("{}:{}: expected two numbers `k beta`", path.display(), n + 1));
        }
        rows.push((parsed[0], parsed[1]));
    }
    Ok(rows)
}

fn band_loss(r: &mut Reader, band: &str) -> Option<BandLoss> {
    let constant = r.number("loss", band, false);
    let table = r.string("loss", &format!("{band}_table"));
    match (constant, table) {
        (Some(_), Some(_)) => {
            r.problem(format!("loss.{band} and loss.{band}_table are mutually exclusive"));
            None
        }
        (Some(beta), None) => {
            let result = BandLoss::constant(beta);
            r.keep(result)
        }
        (None, Some(file)) => {
            let path = r.base_dir.join(file);
            match read_loss_table(&path) {
                Ok(rows) => {
                    let result = BandLoss::table(rows);
                    r.keep(result)
                }
                Err(e) => {
                    r.problem(e);
                    None
                }
            }
        }
        (None, None) => Some(BandLoss::Constant(0.0)),
    }
}

fn input(r: &mut Reader, path: &str) -> Option<InputSpec> {
    let table = r.section(path)?;
    r.check_keys(path, table, INPUT_KEYS);
    let z_abs = r.number(path, "z_abs", true);
    let z_phase = r.number(path, "z_phase", false).unwrap_or(0.0);
    let center = r.number(path, "center", true);
    let width = r.number(path, "width", false);
    let shape = match r.string(path, "shape") {
        Some("gaussian") => match width {
            Some(sigma) => Some(WaveformShape::Gaussian { sigma }),
            None => {
                r.problem(format!("{path}.width is required for gaussian waveforms"));
                None
            }
        },
        Some("delta") => {
            if width.is_some() {
                r.problem(format!("{path}.width does not apply to delta waveforms"));
            }
            Some(WaveformShape::GridDelta)
        }
        Some(other) => {
            r.problem(format!("{path}.shape must be \"gaussian\" or \"delta\", got \"{other}\""));
            None
        }
        None => {
            r.problem(format!("{path}.shape is required"));
            None
        }
    };
    if let Some(z) = z_abs {
        if !(z >= 0.0 && z.is_finite()) {
            r.problem(format!("{path}.z_abs must be finite and non-negative, got {z}"));
        }
    }
    Some(InputSpec::new(Complex64::from_polar(z_abs?, z_phase), shape?, center?))
}

fn grid(r: &mut Reader, band: &str) -> Option<Grid1D> {
    let min = r.number("grids", &format!("{band}_min"), true);
    let max = r.number("grids", &format!("{band}_max"), true);
    let n = r.count("grids", &format!("{band}_n"), true);
    let result = Grid1D::new(min?, max?, n? as usize);
    r.keep(result)
}

/// Parses and validates scenario text; relative table paths resolve against `base_dir`.
pub fn parse_scenario(text: &str, source: &str, base_dir: &Path) -> Result<Scenario, ConfigError> {
    let fail = |problems: Vec<String>| ConfigError {
        source: source.to_string(),
        problems,
    };
    let root: Table = text.parse().map_err(|e: toml::de::Error| fail(vec![e.message().to_string()]))?;
    let mut r = Reader {
        root: &root,
        base_dir: base_dir.to_path_buf(),
        problems: Vec::new(),
    };

    for (key, value) in root.iter() {
        let known = SECTIONS.iter().any(|(s, _)| s == key) || PROCESSES.iter().any(|(s, _)| s == key);
        if !known {
            r.problem(format!("unknown key `{key}`"));
        } else if !value.is_table() {
            r.problem(format!("`{key}` must be a section"));
        }
    }
    for (name, keys) in SECTIONS {
        if let Some(t) = r.section(name) {
            r.check_keys(name, t, keys);
        }
    }
    for (name, roles) in PROCESSES {
        if let Some(t) = r.section(name) {
            r.check_keys(name, t, roles);
        }
    }

    let units = match r.string("units", "mode") {
        None | Some("nondimensional") => Some(UnitMode::Nondimensional),
        Some("si") => Some(UnitMode::Si),
        Some(other) => {
            r.problem(format!("units.mode must be \"nondimensional\" or \"si\", got \"{other}\""));
            None
        }
    };

    let v_f = r.number("dispersion", "v_F", true);
    let v_sh = r.number("dispersion", "v_SH", true);
    let band = |r: &mut Reader, k: &str, w: &str, v: Option<f64>| {
        let k0 = r.number("dispersion", k, false).unwrap_or(0.0);
        let omega0 = r.number("dispersion", w, false).unwrap_or(0.0);
        v.map(|group_velocity| BandDispersion {
            k0,
            omega0,
            group_velocity,
        })
    };
    let f_disp = band(&mut r, "k_F0", "omega_F0", v_f);
    let sh_disp = band(&mut r, "k_SH0", "omega_SH0", v_sh);
    let dispersion = match (f_disp, sh_disp) {
        (Some(f), Some(sh)) => r.keep(DispersionRelation::new(f, sh)),
        _ => None,
    };

    let loss_f = band_loss(&mut r, "F");
    let loss_sh = band_loss(&mut r, "SH");

    let s0 = r.number("coupling", "s0", true);
    let width = r.number("coupling", "width", false);
    let offset = r.number("coupling", "offset", false).unwrap_or(0.0);
    let envelope = match r.string("coupling", "envelope") {
        None | Some("constant") => Some(Envelope::Constant),
        Some("gaussian") => width.map(|width| Envelope::Gaussian { width }),
        Some("sinc") => width.map(|length| Envelope::Sinc { length }),
        Some(other) => {
            r.problem(format!("coupling.envelope must be constant, gaussian or sinc, got \"{other}\""));
            None
        }
    };
    if matches!(r.string("coupling", "envelope"), Some("gaussian" | "sinc")) && width.is_none() {
        r.problem("coupling.width is required for gaussian and sinc envelopes");
    }
    let coupling = match (s0, envelope) {
        (Some(s0), Some(env)) => r.keep(CouplingModel::new(s0, env, offset)),
        _ => None,
    };

    let t = r.number("window", "T", false);
    let l = r.number("window", "L", false);
    let v_in = r.number("window", "v_in", false);
    let window = match (t, l, v_in) {
        (Some(t), None, None) => r.keep(InteractionWindow::symmetric(t)),
        (None, Some(l), Some(v)) => r.keep(InteractionWindow::from_length(l, v)),
        _ => {
            r.problem("window needs either T or both L and v_in");
            None
        }
    };

    let f_grid = grid(&mut r, "F");
    let sh_grid = grid(&mut r, "SH");

    let defaults = QuadratureConfig::default();
    let tolerance = r.number("quadrature", "tolerance", false).unwrap_or(defaults.tolerance);
    let doublings = r.count("quadrature", "doublings", false).map_or(defaults.max_doublings, |d| d as u32);
    let nodes = r.count("quadrature", "nodes", false).map_or(defaults.base_nodes, |n| n as usize);
    let quadrature = r.keep(QuadratureConfig::new(tolerance, doublings, nodes));

    let spdc_pump = input(&mut r, "spdc.pump");
    let dfg_seed = input(&mut r, "dfg.seed");
    let dfg_pump = input(&mut r, "dfg.pump");
    let sfg_signal = input(&mut r, "sfg.signal");
    let sfg_idler = input(&mut r, "sfg.idler");

    let ks = r.number("targets", "ks", true);
    let ki = r.number("targets", "ki", true);
    let kp = r.number("targets", "kp", true);

    let built = (|| {
        let model = WaveguideModel::new(dispersion?, LossProfile::new(loss_f?, loss_sh?), coupling?, window?, units?);
        Some((model, f_grid?, sh_grid?, quadrature?, ks?, ki?, kp?))
    })();
    if let Some((model, f, sh, q, ks, ki, kp)) = built {
        if let Some(simulation) = r.keep(Simulation::new(model, f, sh, q)) {
            let scenario = Scenario {
                simulation,
                spdc_pump,
                dfg_seed,
                dfg_pump,
                sfg_signal,
                sfg_idler,
                targets: Targets { ks, ki, kp },
            };
            for (k, grid_band, name) in [(ks, f, "targets.ks"), (ki, f, "targets.ki"), (kp, sh, "targets.kp")] {
                if grid_band.index_of(k).is_none() {
                    r.problem(format!("{name} = {k} is not a grid node"));
                }
            }
            // build every defined waveform once to surface grid problems now
            for (name, spec, band) in [
                ("spdc.pump", scenario.spdc_pump, chi2sim::model::Band::SH),
                ("dfg.seed", scenario.dfg_seed, chi2sim::model::Band::F),
                ("dfg.pump", scenario.dfg_pump, chi2sim::model::Band::SH),
                ("sfg.signal", scenario.sfg_signal, chi2sim::model::Band::F),
                ("sfg.idler", scenario.sfg_idler, chi2sim::model::Band::F),
            ] {
                if let Some(spec) = spec {
                    if let Err(e) = spec.on(band, *scenario.simulation.grid(band)) {
                        r.problem(format!("{name}: {e}"));
                    }
                }
            }
            if r.problems.is_empty() {
                return Ok(scenario);
            }
        }
    }
    if r.problems.is_empty() {
        r.problem("scenario is incomplete");
    }
    Err(fail(r.problems))
}

pub fn load_scenario(path: &Path) -> Result<Scenario, ConfigError> {
    let text = std::fs::read_to_string(path).map_err(|e| ConfigError {
        source: path.display().to_string(),
        problems: vec![format!("cannot read file: {e}")],
    })?;
    let base = path.parent().unwrap_or(Path::new("."));
    parse_scenario(&text, &path.display().to_string(), base)
}
