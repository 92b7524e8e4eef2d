//! Flat `key = value` experiment configuration.
//!
//! One entry per line, `#` starts a comment, blank lines are ignored. Command-line
//! `--key value` pairs override file entries. Every key has a default, so an empty
//! file is a valid configuration.

use std::collections::BTreeMap;
use std::fmt;
use std::path::{Path, PathBuf};
use std::str::FromStr;

use rg2lab_core::geometry::{family_from_name, CurvatureConvention, FAMILY_NAMES};

#[derive(Debug, thiserror::Error)]
pub enum ConfigError {
    #[error("{path}: {source}")]
    Io { path: PathBuf, source: std::io::Error },
    #[error("line {line}: {message}")]
    Syntax { line: usize, message: String },
    #[error("{origin}: unknown key `{key}` (known keys: {})", KEYS.iter().map(|k| k.name).collect::<Vec<_>>().join(", "))]
    UnknownKey { key: String, origin: Origin },
    #[error("line {line}: key `{key}` already set on line {first}")]
    Duplicate { key: String, line: usize, first: usize },
    #[error("{origin}: key `{key}`: {message}")]
    Invalid { key: String, origin: Origin, message: String },
    #[error("inconsistent configuration: {0}")]
    Inconsistent(String),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Origin {
    Default,
    File { line: usize },
    CommandLine,
}

impl fmt::Display for Origin {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Origin::Default => write!(f, "default"),
            Origin::File { line } => write!(f, "line {line}"),
            Origin::CommandLine => write!(f, "command line"),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Command {
    Curvature,
    Symbol,
    Parabolicity,
    Sweep,
    Flow,
    Verify,
}

impl Command {
    pub const ALL: [Command; 6] =
        [Command::Curvature, Command::Symbol, Command::Parabolicity, Command::Sweep, Command::Flow, Command::Verify];

    pub fn name(self) -> &'static str {
        match self {
            Command::Curvature => "curvature",
            Command::Symbol => "symbol",
            Command::Parabolicity => "parabolicity",
            Command::Sweep => "sweep",
            Command::Flow => "flow",
            Command::Verify => "verify",
        }
    }
}

impl fmt::Display for Command {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for Command {
    type Err = String;
    fn from_str(s: &str) -> Result<Self, String> {
        Command::ALL.into_iter().find(|c| c.name() == s).ok_or_else(|| format!("unknown command `{s}`"))
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum FlowMode {
    Ansatz,
    Grid,
}

pub struct KeySpec {
    pub name: &'static str,
    pub default: &'static str,
    pub help: &'static str,
}

/// Every recognized key, its default and a one-line description.
pub const KEYS: &[KeySpec] = &[
    KeySpec { name: "command", default: "", help: "optional; must match the subcommand when given" },
    KeySpec { name: "family", default: "sphere", help: "metric family name" },
    KeySpec { name: "params", default: "", help: "comma-separated family parameters (empty: family defaults)" },
    KeySpec { name: "dim", default: "3", help: "manifold dimension" },
    KeySpec { name: "alpha", default: "1", help: "coupling α" },
    KeySpec { name: "alpha_min", default: "-2", help: "sweep lower end" },
    KeySpec { name: "alpha_max", default: "1", help: "sweep upper end" },
    KeySpec { name: "alpha_count", default: "31", help: "sweep grid size" },
    KeySpec { name: "points", default: "", help: "explicit chart points, `x1,x2,..; y1,y2,..` (empty: sample)" },
    KeySpec { name: "samples", default: "8", help: "number of sampled points when `points` is empty" },
    KeySpec { name: "seed", default: "1", help: "seed of every random draw" },
    KeySpec { name: "directions", default: "2", help: "random covectors per point on top of dx^a" },
    KeySpec { name: "planes", default: "8", help: "random planes per point" },
    KeySpec { name: "tolerance", default: "1e-9", help: "band around 0 in which 1+αK counts as degenerate" },
    KeySpec { name: "xi", default: "", help: "covector for `symbol` (empty: dx^1)" },
    KeySpec { name: "flow_mode", default: "ansatz", help: "`ansatz` (constant curvature) or `grid` (periodic families)" },
    KeySpec { name: "t_end", default: "1", help: "final time" },
    KeySpec { name: "dt", default: "auto", help: "time step (auto: 1e-3 ansatz, half the stability bound on grids)" },
    KeySpec { name: "c0", default: "auto", help: "initial ansatz scale (auto: r² of the family)" },
    KeySpec { name: "grid", default: "16", help: "grid shape, `m` or `m1xm2x..`" },
    KeySpec { name: "monitor_every", default: "1", help: "trace cadence in steps" },
    KeySpec { name: "allow_non_parabolic", default: "false", help: "run from non-parabolic data and through parabolicity loss" },
    KeySpec { name: "verify_points", default: "4", help: "points used by `verify`" },
    KeySpec { name: "convention", default: "standard", help: "`standard` or `corrupted` (negative control for `verify`)" },
    KeySpec { name: "output", default: "", help: "output path (empty: standard output)" },
];

fn key_spec(name: &str) -> Option<&'static KeySpec> {
    KEYS.iter().find(|k| k.name == name)
}

/// Untyped entries with their origin.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct RawConfig {
    entries: BTreeMap<String, (String, Origin)>,
}

impl RawConfig {
    pub fn parse(text: &str) -> Result<Self, ConfigError> {
        let mut raw = RawConfig::default();
        for (idx, line) in text.lines().enumerate() {
            let line_no = idx + 1;
            let content = line.split('#').next().unwrap_or("").trim();
            if content.is_empty() {
                continue;
            }
            let (key, value) = content.split_once('=').ok_or_else(|| ConfigError::Syntax {
                line: line_no,
                message: format!("expected `key = value`, found `{content}`"),
            })?;
            let key = key.trim();
            if key.is_empty() || key.contains(char::is_whitespace) {
                return Err(ConfigError::Syntax { line: line_no, message: format!("bad key `{key}`") });
            }
            let origin = Origin::File { line: line_no };
            if key_spec(key).is_none() {
                return Err(ConfigError::UnknownKey { key: key.to_string(), origin });
            }
            if let Some((_, Origin::File { line: first })) = raw.entries.get(key) {
                return Err(ConfigError::Duplicate { key: key.to_string(), line: line_no, first: *first });
            }
            raw.entries.insert(key.to_string(), (value.trim().to_string(), origin));
        }
        Ok(raw)
    }

    pub fn load(path: &Path) -> Result<Self, ConfigError> {
        let text = std::fs::read_to_string(path).map_err(|source| ConfigError::Io { path: path.to_path_buf(), source })?;
        Self::parse(&text)
    }

    /// Sets `key` from the command line; dashes in the key read as underscores.
    pub fn set_override(&mut self, key: &str, value: &str) -> Result<(), ConfigError> {
        let key = key.replace('-', "_");
        if key_spec(&key).is_none() {
            return Err(ConfigError::UnknownKey { key, origin: Origin::CommandLine });
        }
        self.entries.insert(key, (value.trim().to_string(), Origin::CommandLine));
        Ok(())
    }

    /// Applies `--key value` and `--key=value` tokens.
    pub fn apply_overrides<S: AsRef<str>>(&mut self, tokens: &[S]) -> Result<(), ConfigError> {
        let mut it = tokens.iter().map(|s| s.as_ref());
        while let Some(tok) = it.next() {
            let body = tok.strip_prefix("--").ok_or_else(|| ConfigError::Invalid {
                key: tok.to_string(),
                origin: Origin::CommandLine,
                message: "overrides take the form `--key value`".into(),
            })?;
            match body.split_once('=') {
                Some((k, v)) => self.set_override(k, v)?,
                None => {
                    let v = it.next().ok_or_else(|| ConfigError::Invalid {
                        key: body.to_string(),
                        origin: Origin::CommandLine,
                        message: "missing value".into(),
                    })?;
                    self.set_override(body, v)?;
                }
            }
        }
        Ok(())
    }

    fn get(&self, key: &'static str) -> (String, Origin) {
        match self.entries.get(key) {
            Some((v, o)) => (v.clone(), *o),
            None => (key_spec(key).map(|k| k.default).unwrap_or("").to_string(), Origin::Default),
        }
    }
}

/// Fully typed and validated configuration.
#[derive(Debug, Clone, PartialEq)]
pub struct ExperimentConfig {
    pub command: Command,
    pub family: String,
    pub params: Vec<f64>,
    pub dim: usize,
    pub alpha: f64,
    pub alpha_min: f64,
    pub alpha_max: f64,
    pub alpha_count: usize,
    pub points: Vec<Vec<f64>>,
    pub samples: usize,
    pub seed: u64,
    pub directions: usize,
    pub planes: usize,
    pub tolerance: f64,
    pub xi: Option<Vec<f64>>,
    pub flow_mode: FlowMode,
    pub t_end: f64,
    pub dt: Option<f64>,
    pub c0: Option<f64>,
    pub grid: Vec<usize>,
    pub monitor_every: usize,
    pub allow_non_parabolic: bool,
    pub verify_points: usize,
    pub convention: CurvatureConvention,
    pub output: Option<PathBuf>,
}

struct Reader<'a> {
    raw: &'a RawConfig,
}

impl Reader<'_> {
    fn invalid(key: &str, origin: Origin, message: impl Into<String>) -> ConfigError {
        ConfigError::Invalid { key: key.to_string(), origin, message: message.into() }
    }

    fn parsed<T: FromStr>(&self, key: &'static str, what: &str) -> Result<T, ConfigError> {
        let (v, o) = self.raw.get(key);
        v.parse().map_err(|_| Self::invalid(key, o, format!("expected {what}, found `{v}`")))
    }

    fn finite(&self, key: &'static str) -> Result<f64, ConfigError> {
        let x: f64 = self.parsed(key, "a number")?;
        if !x.is_finite() {
            return Err(Self::invalid(key, self.raw.get(key).1, "must be finite"));
        }
        Ok(x)
    }

    fn positive(&self, key: &'static str) -> Result<f64, ConfigError> {
        let x = self.finite(key)?;
        if x <= 0.0 {
            return Err(Self::invalid(key, self.raw.get(key).1, format!("must be positive, found {x}")));
        }
        Ok(x)
    }

    fn count(&self, key: &'static str, min: usize) -> Result<usize, ConfigError> {
        let n: usize = self.parsed(key, "a non-negative integer")?;
        if n < min {
            return Err(Self::invalid(key, self.raw.get(key).1, format!("must be at least {min}")));
        }
        Ok(n)
    }

    fn auto(&self, key: &'static str) -> Result<Option<f64>, ConfigError> {
        let (v, _) = self.raw.get(key);
        if v.is_empty() || v == "auto" {
            Ok(None)
        } else {
            self.positive(key).map(Some)
        }
    }

    fn list(&self, key: &'static str, text: &str) -> Result<Vec<f64>, ConfigError> {
        let o = self.raw.get(key).1;
        text.split(',')
            .map(|s| s.trim().parse::<f64>().ok().filter(|x| x.is_finite()))
            .collect::<Option<Vec<_>>>()
            .ok_or_else(|| Self::invalid(key, o, format!("expected comma-separated numbers, found `{text}`")))
    }

    fn optional_list(&self, key: &'static str) -> Result<Option<Vec<f64>>, ConfigError> {
        let (v, _) = self.raw.get(key);
        if v.is_empty() {
            Ok(None)
        } else {
            self.list(key, &v).map(Some)
        }
    }
}

impl ExperimentConfig {
    pub fn from_raw(command: Command, raw: &RawConfig) -> Result<Self, ConfigError> {
        let r = Reader { raw };
        let (file_command, origin) = raw.get("command");
        if !file_command.is_empty() {
            let c: Command = file_command.parse().map_err(|m: String| Reader::invalid("command", origin, m))?;
            if c != command {
                return Err(Reader::invalid("command", origin, format!("says `{c}` but `{command}` was requested")));
            }
        }
        let (family, fo) = raw.get("family");
        if !FAMILY_NAMES.contains(&family.as_str()) {
            return Err(Reader::invalid(
                "family",
                fo,
                format!("unknown family `{family}` (known: {})", FAMILY_NAMES.join(", ")),
            ));
        }
        let dim = r.count("dim", 2)?;
        let params = r.optional_list("params")?.unwrap_or_default();
        if let Err(e) = family_from_name(&family, dim, &params) {
            return Err(ConfigError::Inconsistent(format!("family `{family}` with dim = {dim}: {e}")));
        }

        let (pts, po) = raw.get("points");
        let points = if pts.is_empty() {
            Vec::new()
        } else {
            pts.split(';').map(|p| r.list("points", p)).collect::<Result<Vec<_>, _>>()?
        };
        if let Some(p) = points.iter().find(|p| p.len() != dim) {
            return Err(Reader::invalid("points", po, format!("point {p:?} does not have dim = {dim} coordinates")));
        }

        let xi = r.optional_list("xi")?;
        if let Some(x) = &xi {
            let o = raw.get("xi").1;
            if x.len() != dim {
                return Err(Reader::invalid("xi", o, format!("needs dim = {dim} components")));
            }
            if x.iter().all(|v| *v == 0.0) {
                return Err(Reader::invalid("xi", o, "must be nonzero"));
            }
        }

        let alpha_min = r.finite("alpha_min")?;
        let alpha_max = r.finite("alpha_max")?;
        let alpha_count = r.count("alpha_count", 1)?;
        if alpha_min > alpha_max || (alpha_count == 1 && alpha_min != alpha_max) {
            return Err(ConfigError::Inconsistent(format!(
                "sweep range [{alpha_min}, {alpha_max}] with {alpha_count} values is empty"
            )));
        }

        let (mode, mo) = raw.get("flow_mode");
        let flow_mode = match mode.as_str() {
            "ansatz" => FlowMode::Ansatz,
            "grid" => FlowMode::Grid,
            _ => return Err(Reader::invalid("flow_mode", mo, format!("expected `ansatz` or `grid`, found `{mode}`"))),
        };
        let (g, go) = raw.get("grid");
        let grid: Vec<usize> = g
            .split('x')
            .map(|s| s.trim().parse::<usize>().ok().filter(|m| *m >= 5))
            .collect::<Option<_>>()
            .ok_or_else(|| Reader::invalid("grid", go, format!("expected `m` or `m1xm2x..` with every m ≥ 5, found `{g}`")))?;
        let grid = match grid.len() {
            1 => vec![grid[0]; dim],
            n if n == dim => grid,
            n => return Err(Reader::invalid("grid", go, format!("{n} extents for dim = {dim}"))),
        };

        let (conv, co) = raw.get("convention");
        let convention = match conv.as_str() {
            "standard" => CurvatureConvention::Standard,
            "corrupted" => CurvatureConvention::CorruptedQuadraticSign,
            _ => return Err(Reader::invalid("convention", co, format!("expected `standard` or `corrupted`, found `{conv}`"))),
        };
        let (out, _) = raw.get("output");

        let cfg = ExperimentConfig {
            command,
            family,
            params,
            dim,
            alpha: r.finite("alpha")?,
            alpha_min,
            alpha_max,
            alpha_count,
            points,
            samples: r.count("samples", 1)?,
            seed: r.parsed("seed", "a non-negative integer")?,
            directions: r.count("directions", 0)?,
            planes: r.count("planes", 0)?,
            tolerance: {
                let t = r.finite("tolerance")?;
                if t < 0.0 {
                    return Err(Reader::invalid("tolerance", raw.get("tolerance").1, "must be non-negative"));
                }
                t
            },
            xi,
            flow_mode,
            t_end: r.positive("t_end")?,
            dt: r.auto("dt")?,
            c0: r.auto("c0")?,
            grid,
            monitor_every: r.count("monitor_every", 1)?,
            allow_non_parabolic: r.parsed("allow_non_parabolic", "`true` or `false`")?,
            verify_points: r.count("verify_points", 1)?,
            convention,
            output: (!out.is_empty()).then(|| PathBuf::from(out)),
        };
        Ok(cfg)
    }

    /// Every key with its resolved value, in [`KEYS`] order. Feeding these lines back
    /// through [`RawConfig::parse`] reproduces `self`.
    pub fn resolved(&self) -> Vec<(&'static str, String)> {
        let nums = |v: &[f64]| v.iter().map(|x| x.to_string()).collect::<Vec<_>>().join(",");
        let auto = |v: Option<f64>| v.map(|x| x.to_string()).unwrap_or_else(|| "auto".into());
        KEYS.iter()
            .map(|k| {
                let v = match k.name {
                    "command" => self.command.to_string(),
                    "family" => self.family.clone(),
                    "params" => nums(&self.params),
                    "dim" => self.dim.to_string(),
                    "alpha" => self.alpha.to_string(),
                    "alpha_min" => self.alpha_min.to_string(),
                    "alpha_max" => self.alpha_max.to_string(),
                    "alpha_count" => self.alpha_count.to_string(),
                    "points" => self.points.iter().map(|p| nums(p)).collect::<Vec<_>>().join("; "),
                    "samples" => self.samples.to_string(),
                    "seed" => self.seed.to_string(),
                    "directions" => self.directions.to_string(),
                    "planes" => self.planes.to_string(),
                    "tolerance" => self.tolerance.to_string(),
                    "xi" => self.xi.as_deref().map(nums).unwrap_or_default(),
                    "flow_mode" => match self.flow_mode {
                        FlowMode::Ansatz => "ansatz".into(),
                        FlowMode::Grid => "grid".into(),
                    },
                    "t_end" => self.t_end.to_string(),
                    "dt" => auto(self.dt),
                    "c0" => auto(self.c0),
                    "grid" => self.grid.iter().map(|m| m.to_string()).collect::<Vec<_>>().join("x"),
                    "monitor_every" => self.monitor_every.to_string(),
                    "allow_non_parabolic" => self.allow_non_parabolic.to_string(),
                    "verify_points" => self.verify_points.to_string(),
                    "convention" => match self.convention {
                        CurvatureConvention::Standard => "standard".into(),
                        CurvatureConvention::CorruptedQuadraticSign => "corrupted".into(),
                    },
                    "output" => self.output.as_ref().map(|p| p.display().to_string()).unwrap_or_default(),
                    other => unreachable!("key `{other}` has no renderer"),
                };
                (k.name, v)
            })
            .collect()
    }

    /// The configuration as a config file.
    pub fn to_config_text(&self) -> String {
        self.resolved().into_iter().map(|(k, v)| format!("{k} = {v}\n")).collect()
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn cfg(text: &str) -> Result<ExperimentConfig, ConfigError> {
        ExperimentConfig::from_raw(Command::Parabolicity, &RawConfig::parse(text)?)
    }

    #[test]
    fn defaults_are_valid() {
        let c = cfg("").unwrap();
        assert_eq!(c.family, "sphere");
        assert_eq!(c.dim, 3);
        assert_eq!(c.grid, vec![16, 16, 16]);
        assert_eq!(c.dt, None);
    }

    #[test]
    fn comments_and_blank_lines() {
        let c = cfg("# header\n\nfamily = hyperbolic  # trailing\nparams = 2\n").unwrap();
        assert_eq!(c.family, "hyperbolic");
        assert_eq!(c.params, vec![2.0]);
    }

    #[test]
    fn errors_carry_line_numbers() {
        let e = cfg("dim = 3\nalpha 2\n").unwrap_err().to_string();
        assert!(e.starts_with("line 2:"), "{e}");
        let e = cfg("dim = 3\n\nalpah = 2\n").unwrap_err().to_string();
        assert!(e.starts_with("line 3: unknown key `alpah`"), "{e}");
        let e = cfg("alpha = x\n").unwrap_err().to_string();
        assert!(e.contains("line 1: key `alpha`: expected a number"), "{e}");
        let e = cfg("dim = 3\ndim = 4\n").unwrap_err().to_string();
        assert_eq!(e, "line 2: key `dim` already set on line 1");
    }

    #[test]
    fn inconsistent_configs_are_rejected() {
        assert!(cfg("family = torus\n").unwrap_err().to_string().contains("unknown family"));
        assert!(matches!(cfg("alpha_min = 1\nalpha_max = 0\n"), Err(ConfigError::Inconsistent(_))));
        assert!(matches!(cfg("family = sphere\nparams = -1\n"), Err(ConfigError::Inconsistent(_))));
        assert!(cfg("dim = 2\npoints = 0.1,0.2,0.3\n").is_err());
        assert!(cfg("dim = 2\ngrid = 8x8x8\n").is_err());
        assert!(cfg("dim = 2\nxi = 0,0\n").is_err());
        assert!(cfg("command = sweep\n").is_err());
        assert!(cfg("command = parabolicity\n").is_ok());
    }

    #[test]
    fn overrides_win_and_are_validated() {
        let mut raw = RawConfig::parse("alpha = 1\n").unwrap();
        raw.apply_overrides(&["--alpha", "-2", "--flow-mode=grid"]).unwrap();
        let c = ExperimentConfig::from_raw(Command::Flow, &raw).unwrap();
        assert_eq!(c.alpha, -2.0);
        assert_eq!(c.flow_mode, FlowMode::Grid);
        let e = raw.apply_overrides(&["--nope", "1"]).unwrap_err().to_string();
        assert!(e.starts_with("command line: unknown key"), "{e}");
        assert!(raw.apply_overrides(&["--alpha"]).is_err());
        assert!(raw.apply_overrides(&["alpha", "1"]).is_err());
    }

    #[test]
    fn resolved_text_round_trips() {
        let c = cfg("family = product\ndim = 4\nparams = 2, 1, 0.5\npoints = 0.1,0,0,0; 0,0.2,0,0\nxi = 1,2,0,0\ndt = 0.01\n")
            .unwrap();
        let back = ExperimentConfig::from_raw(Command::Parabolicity, &RawConfig::parse(&c.to_config_text()).unwrap()).unwrap();
        assert_eq!(back, c);
    }
}
