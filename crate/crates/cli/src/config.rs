//! Layered run configuration: built-in defaults, then a config file, then
//! environment variables, then command-line flags.
//!
//! The file format is flat `key = value` text grouped under `[section]`
//! headers. `#` and `;` start comments. Every key is optional and unknown
//! sections or keys are rejected.

use std::fmt::Write as _;
use std::path::{Path, PathBuf};
use std::str::FromStr;

use grazing_core::error::LabError;
use grazing_core::evolve::{LimitMode, Scheme};
use grazing_core::grid::VelocityGrid;
use grazing_core::kernel::KernelParams;
use grazing_core::operators::CollisionQuadrature;

use crate::error::CliError;

/// Environment override for the output directory.
pub const ENV_OUT: &str = "GRAZING_OUT";
/// Environment override for the thread budget.
pub const ENV_THREADS: &str = "GRAZING_THREADS";

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Command {
    Moments,
    Cancellation,
    Invariants,
    Spectrum,
    Coercivity,
    LandauLimit,
    Evolve,
}

impl Command {
    pub fn name(self) -> &'static str {
        match self {
            Command::Moments => "moments",
            Command::Cancellation => "cancellation",
            Command::Invariants => "invariants",
            Command::Spectrum => "spectrum",
            Command::Coercivity => "coercivity",
            Command::LandauLimit => "landau-limit",
            Command::Evolve => "evolve",
        }
    }

    fn default_epsilon(self) -> Vec<f64> {
        match self {
            Command::Moments => vec![1e-2, 1e-4, 1e-6],
            Command::Cancellation | Command::LandauLimit => vec![1e-2, 1e-4, 1e-6, 1e-8],
            Command::Invariants => vec![1e-2, 1e-4],
            Command::Spectrum | Command::Coercivity => vec![1e-2, 1e-3, 1e-4, 1e-5],
            Command::Evolve => vec![1e-2],
        }
    }
}

/// Everything one run needs. Fields are validated together by
/// [`RunConfig::validate`] before any computation starts.
#[derive(Debug, Clone, PartialEq)]
pub struct RunConfig {
    pub command: Command,
    pub epsilon: Vec<f64>,
    pub seed: u64,
    pub out: PathBuf,
    /// Zero keeps the runtime default.
    pub threads: usize,
    pub box_l: f64,
    pub grid_n: usize,
    pub gamma: f64,
    pub landau: bool,
    pub quadrature: CollisionQuadrature,
    pub weight_l: f64,
    pub delta: f64,
    pub null_space: bool,
    pub mode: LimitMode,
    pub time: f64,
    pub limit_amplitude: f64,
    pub slope_min: Option<f64>,
    pub slope_max: Option<f64>,
    pub dt: f64,
    pub t_end: f64,
    pub scheme: Scheme,
    pub cadence: usize,
    pub evolve_amplitude: f64,
    pub max_initial_norm: f64,
}

/// Keys accepted in a config file, by section.
pub const KEYS: &[(&str, &[&str])] = &[
    ("run", &["epsilon", "seed", "out", "threads"]),
    ("grid", &["l", "n"]),
    ("kernel", &["gamma", "landau"]),
    (
        "quadrature",
        &["azimuths", "top_nodes", "decade_nodes", "grazing_cutoff"],
    ),
    ("spectrum", &["weight_l"]),
    ("cancellation", &["delta"]),
    ("invariants", &["null_space"]),
    (
        "landau_limit",
        &["mode", "time", "amplitude", "slope_min", "slope_max"],
    ),
    (
        "evolve",
        &[
            "dt",
            "t_end",
            "scheme",
            "cadence",
            "amplitude",
            "max_initial_norm",
        ],
    ),
];

fn parse<T: FromStr>(key: &str, value: &str) -> Result<T, CliError>
where
    T::Err: std::fmt::Display,
{
    value
        .trim()
        .parse()
        .map_err(|e: T::Err| CliError::value(key, format!("`{value}`: {e}")))
}

fn parse_list(key: &str, value: &str) -> Result<Vec<f64>, CliError> {
    value
        .split(',')
        .map(str::trim)
        .filter(|s| !s.is_empty())
        .map(|s| parse(key, s))
        .collect()
}

impl RunConfig {
    pub fn defaults(command: Command) -> Self {
        Self {
            command,
            epsilon: command.default_epsilon(),
            seed: 42,
            out: PathBuf::from("results"),
            threads: 0,
            box_l: 5.0,
            grid_n: 12,
            gamma: -3.0,
            landau: command != Command::Evolve,
            quadrature: CollisionQuadrature::default(),
            weight_l: -1.5,
            delta: 0.5,
            null_space: true,
            mode: LimitMode::Operator,
            time: 1.0,
            limit_amplitude: 1.0,
            slope_min: None,
            slope_max: None,
            dt: 0.25,
            t_end: 5.0,
            scheme: Scheme::Exponential,
            cadence: 1,
            evolve_amplitude: 0.05,
            max_initial_norm: 0.5,
        }
    }

    /// Sets one `section.key` from its textual value.
    pub fn set(&mut self, key: &str, value: &str) -> Result<(), CliError> {
        match key {
            "run.epsilon" => self.epsilon = parse_list(key, value)?,
            "run.seed" => self.seed = parse(key, value)?,
            "run.out" => self.out = PathBuf::from(value.trim()),
            "run.threads" => self.threads = parse(key, value)?,
            "grid.l" => self.box_l = parse(key, value)?,
            "grid.n" => self.grid_n = parse(key, value)?,
            "kernel.gamma" => self.gamma = parse(key, value)?,
            "kernel.landau" => self.landau = parse(key, value)?,
            "quadrature.azimuths" => self.quadrature.azimuths = parse(key, value)?,
            "quadrature.top_nodes" => self.quadrature.top_nodes = parse(key, value)?,
            "quadrature.decade_nodes" => self.quadrature.decade_nodes = parse(key, value)?,
            "quadrature.grazing_cutoff" => self.quadrature.grazing_cutoff = parse(key, value)?,
            "spectrum.weight_l" => self.weight_l = parse(key, value)?,
            "cancellation.delta" => self.delta = parse(key, value)?,
            "invariants.null_space" => self.null_space = parse(key, value)?,
            "landau_limit.mode" => self.mode = parse(key, value)?,
            "landau_limit.time" => self.time = parse(key, value)?,
            "landau_limit.amplitude" => self.limit_amplitude = parse(key, value)?,
            "landau_limit.slope_min" => self.slope_min = Some(parse(key, value)?),
            "landau_limit.slope_max" => self.slope_max = Some(parse(key, value)?),
            "evolve.dt" => self.dt = parse(key, value)?,
            "evolve.t_end" => self.t_end = parse(key, value)?,
            "evolve.scheme" => self.scheme = parse(key, value)?,
            "evolve.cadence" => self.cadence = parse(key, value)?,
            "evolve.amplitude" => self.evolve_amplitude = parse(key, value)?,
            "evolve.max_initial_norm" => self.max_initial_norm = parse(key, value)?,
            _ => return Err(CliError::value(key, "unknown key")),
        }
        Ok(())
    }

    /// Applies a config file on top of the current values.
    pub fn apply_file(&mut self, path: &Path) -> Result<(), CliError> {
        let text = std::fs::read_to_string(path).map_err(|source| CliError::Io {
            path: path.display().to_string(),
            source,
        })?;
        self.apply_text(&text, &path.display().to_string())
    }

    pub fn apply_text(&mut self, text: &str, origin: &str) -> Result<(), CliError> {
        let fail = |line: usize, reason: String| CliError::ConfigFile {
            path: origin.to_string(),
            line,
            reason,
        };
        let mut section: Option<&str> = None;
        let mut seen = std::collections::BTreeSet::new();
        for (i, raw) in text.lines().enumerate() {
            let line = raw.split(['#', ';']).next().unwrap_or("").trim();
            if line.is_empty() {
                continue;
            }
            if let Some(name) = line.strip_prefix('[').and_then(|l| l.strip_suffix(']')) {
                let name = name.trim();
                match KEYS.iter().find(|(s, _)| *s == name) {
                    Some((s, _)) => section = Some(s),
                    None => return Err(fail(i + 1, format!("unknown section [{name}]"))),
                }
                continue;
            }
            let Some((k, v)) = line.split_once('=') else {
                return Err(fail(i + 1, format!("expected `key = value`, got `{line}`")));
            };
            let Some(s) = section else {
                return Err(fail(i + 1, "key outside of any section".into()));
            };
            let key = format!("{s}.{}", k.trim());
            if !seen.insert(key.clone()) {
                return Err(fail(i + 1, format!("duplicate key `{key}`")));
            }
            self.set(&key, v).map_err(|e| fail(i + 1, e.to_string()))?;
        }
        Ok(())
    }

    pub fn slope_range(&self) -> (f64, f64) {
        let (lo, hi) = match self.mode {
            LimitMode::Operator => (0.8, 1.2),
            LimitMode::Semigroup => (0.7, 1.3),
        };
        (self.slope_min.unwrap_or(lo), self.slope_max.unwrap_or(hi))
    }

    pub fn grid(&self) -> Result<VelocityGrid, CliError> {
        VelocityGrid::new(self.box_l, self.grid_n).map_err(|e| {
            let key = match &e {
                LabError::InvalidParameter { name: "n", .. } => "grid-n",
                _ => "box-l",
            };
            CliError::value(key, e.to_string())
        })
    }

    /// Checks every field before any computation.
    pub fn validate(&self) -> Result<(), CliError> {
        if self.epsilon.is_empty() {
            return Err(CliError::value("epsilon", "empty sweep"));
        }
        for &e in &self.epsilon {
            KernelParams::coulomb(e)
                .and_then(|p| p.with_gamma(self.gamma))
                .map_err(|err| CliError::value("epsilon", err.to_string()))?;
        }
        if self.command == Command::Evolve && self.epsilon.len() != 1 {
            return Err(CliError::value("epsilon", "evolve takes a single epsilon"));
        }
        if self.command != Command::Moments {
            self.grid()?;
        }
        self.quadrature
            .validate()
            .map_err(|e| CliError::value("quadrature", e.to_string()))?;
        if !(self.delta > 0.0 && self.delta <= 1.0) {
            return Err(CliError::value(
                "delta",
                format!("{} not in (0, 1]", self.delta),
            ));
        }
        if !(self.time >= 0.0 && self.time.is_finite()) {
            return Err(CliError::value("time", "must be nonnegative"));
        }
        let (lo, hi) = self.slope_range();
        if lo.is_nan() || hi.is_nan() || lo > hi {
            return Err(CliError::value(
                "slope-min",
                format!("{lo} exceeds slope-max {hi}"),
            ));
        }
        for (key, x) in [
            ("dt", self.dt),
            ("t-end", self.t_end + f64::MIN_POSITIVE),
            ("max-initial-norm", self.max_initial_norm),
        ] {
            if !(x > 0.0 && x.is_finite()) {
                return Err(CliError::value(key, format!("{x} must be positive")));
            }
        }
        if self.cadence == 0 {
            return Err(CliError::value("cadence", "must be at least 1"));
        }
        if !(self.evolve_amplitude >= 0.0 && self.limit_amplitude >= 0.0) {
            return Err(CliError::value("amplitude", "must be nonnegative"));
        }
        Ok(())
    }

    /// The effective configuration in the file format. Feeding it back
    /// through [`RunConfig::apply_text`] reproduces this run.
    pub fn to_config_string(&self) -> String {
        let list: Vec<String> = self.epsilon.iter().map(|e| format!("{e:e}")).collect();
        let (lo, hi) = self.slope_range();
        let q = &self.quadrature;
        let mode = match self.mode {
            LimitMode::Operator => "operator",
            LimitMode::Semigroup => "semigroup",
        };
        let scheme = match self.scheme {
            Scheme::Rk4 => "rk4",
            Scheme::Exponential => "exponential",
        };
        let mut s = String::new();
        let _ = writeln!(s, "# effective configuration of `{}`", self.command.name());
        let _ = writeln!(s, "[run]");
        let _ = writeln!(s, "epsilon = {}", list.join(", "));
        let _ = writeln!(s, "seed = {}", self.seed);
        let _ = writeln!(s, "out = {}", self.out.display());
        let _ = writeln!(s, "threads = {}", self.threads);
        let _ = writeln!(s, "\n[grid]\nl = {:e}\nn = {}", self.box_l, self.grid_n);
        let _ = writeln!(
            s,
            "\n[kernel]\ngamma = {:e}\nlandau = {}",
            self.gamma, self.landau
        );
        let _ = writeln!(
            s,
            "\n[quadrature]\nazimuths = {}\ntop_nodes = {}\ndecade_nodes = {}\ngrazing_cutoff = {:e}",
            q.azimuths, q.top_nodes, q.decade_nodes, q.grazing_cutoff
        );
        let _ = writeln!(s, "\n[spectrum]\nweight_l = {:e}", self.weight_l);
        let _ = writeln!(s, "\n[cancellation]\ndelta = {:e}", self.delta);
        let _ = writeln!(s, "\n[invariants]\nnull_space = {}", self.null_space);
        let _ = writeln!(
            s,
            "\n[landau_limit]\nmode = {mode}\ntime = {:e}\namplitude = {:e}\nslope_min = {lo:e}\nslope_max = {hi:e}",
            self.time, self.limit_amplitude
        );
        let _ = writeln!(
            s,
            "\n[evolve]\ndt = {:e}\nt_end = {:e}\nscheme = {scheme}\ncadence = {}\namplitude = {:e}\nmax_initial_norm = {:e}",
            self.dt, self.t_end, self.cadence, self.evolve_amplitude, self.max_initial_norm
        );
        s
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn file_values_and_rejections() {
        let mut c = RunConfig::defaults(Command::Spectrum);
        c.apply_text(
            "[grid]\nn = 16 # finer\n\n[run]\nepsilon = 1e-3, 1e-5\n",
            "t",
        )
        .unwrap();
        assert_eq!(c.grid_n, 16);
        assert_eq!(c.epsilon, vec![1e-3, 1e-5]);
        let mut c = RunConfig::defaults(Command::Spectrum);
        for bad in [
            "[grid]\nwidth = 3\n",
            "[nowhere]\n",
            "n = 3\n",
            "[grid]\nn = twelve\n",
            "[grid]\nn = 8\nn = 10\n",
            "[grid]\nn\n",
        ] {
            assert!(matches!(
                c.apply_text(bad, "t"),
                Err(CliError::ConfigFile { line, .. }) if line >= 1
            ));
        }
    }

    #[test]
    fn effective_config_round_trips() {
        for cmd in [Command::LandauLimit, Command::Evolve, Command::Moments] {
            let mut c = RunConfig::defaults(cmd);
            c.seed = 7;
            c.mode = LimitMode::Semigroup;
            c.epsilon = vec![3e-2];
            c.quadrature.grazing_cutoff = 1.5e-4;
            let mut back = RunConfig::defaults(cmd);
            back.apply_text(&c.to_config_string(), "t").unwrap();
            assert_eq!(back.slope_range(), c.slope_range());
            c.slope_min = back.slope_min;
            c.slope_max = back.slope_max;
            assert_eq!(back, c);
        }
    }

    #[test]
    fn validation_names_the_field() {
        let mut c = RunConfig::defaults(Command::Spectrum);
        c.epsilon.clear();
        assert!(matches!(c.validate(), Err(CliError::Value { key, .. }) if key == "epsilon"));
        let mut c = RunConfig::defaults(Command::Evolve);
        c.dt = 0.0;
        assert!(matches!(c.validate(), Err(CliError::Value { key, .. }) if key == "dt"));
        let mut c = RunConfig::defaults(Command::Spectrum);
        c.grid_n = 9;
        assert!(matches!(c.validate(), Err(CliError::Value { key, .. }) if key == "grid-n"));
        assert!(RunConfig::defaults(Command::LandauLimit).validate().is_ok());
    }
}
