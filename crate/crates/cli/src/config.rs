//! Line-based run configuration.
//!
//! ```text
//! # two-phase problem
//! u_minus = 0
//! u_plus = 2
//! breakpoints = [1]        # interior breakpoints u_1 < ... < u_n
//! coefficients = [1, 2]    # a_0 .. a_n
//! ```
//!
//! One `key = value` per line, lists in brackets, `#` starts a comment.

use std::collections::HashMap;
use std::fmt;
use std::path::PathBuf;
use std::str::FromStr;

use thiserror::Error;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Command {
    Solve,
    Evaluate,
    Validate,
    Continuum,
}

impl Command {
    pub fn as_str(&self) -> &'static str {
        match self {
            Command::Solve => "solve",
            Command::Evaluate => "evaluate",
            Command::Validate => "validate",
            Command::Continuum => "continuum",
        }
    }
}

impl fmt::Display for Command {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for Command {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s {
            "solve" => Ok(Command::Solve),
            "evaluate" => Ok(Command::Evaluate),
            "validate" => Ok(Command::Validate),
            "continuum" => Ok(Command::Continuum),
            other => Err(format!("unknown command `{other}`")),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Error)]
pub enum ConfigError {
    #[error("line {line}: {message}")]
    Syntax { line: usize, message: String },
    #[error("line {line}: unknown key `{key}`")]
    UnknownKey { line: usize, key: String },
    #[error("line {line}: duplicate key `{key}` (first set on line {first})")]
    DuplicateKey { line: usize, key: String, first: usize },
    #[error("line {line}: invalid value for `{key}`: {message}")]
    InvalidValue { line: usize, key: String, message: String },
    #[error("{breakpoints} interior breakpoints require {expected} coefficients, got {coefficients}")]
    Arity {
        breakpoints: usize,
        expected: usize,
        coefficients: usize,
    },
    #[error("`{command}` needs `{key}`")]
    Missing { command: Command, key: &'static str },
    #[error("config is for `{file}` but `{requested}` was requested")]
    CommandMismatch { file: Command, requested: Command },
}

/// States and partition exactly as written in the file.
#[derive(Debug, Clone, PartialEq)]
pub struct ProblemInput {
    pub u_minus: f64,
    pub u_plus: f64,
    /// Interior breakpoints `u_1 .. u_n`.
    pub breakpoints: Vec<f64>,
    pub coefficients: Vec<f64>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct RunConfig {
    /// Optional `command = ...` line; must match the requested command.
    pub command: Option<Command>,
    pub problem: Option<ProblemInput>,
    pub grad_tol: f64,
    pub max_iters: usize,
    /// `evaluate`: times and the `x` sampling.
    pub times: Vec<f64>,
    pub x_range: (f64, f64),
    pub x_samples: usize,
    /// `validate`: final time and the grid spacings, coarse to fine.
    pub fd_time: f64,
    pub fd_dx: Vec<f64>,
    /// `continuum`: table path as written, cell counts, common-grid size.
    pub diffusion_table: Option<PathBuf>,
    pub n_list: Vec<usize>,
    pub grid_samples: usize,
}

impl Default for RunConfig {
    fn default() -> Self {
        Self {
            command: None,
            problem: None,
            grad_tol: 1e-12,
            max_iters: 200,
            times: vec![1.0],
            x_range: (-5.0, 5.0),
            x_samples: 201,
            fd_time: 1.0,
            fd_dx: vec![0.04, 0.02, 0.01],
            diffusion_table: None,
            n_list: vec![2, 4, 8, 16, 32],
            grid_samples: 199,
        }
    }
}

const KEYS: &[&str] = &[
    "command",
    "u_minus",
    "u_plus",
    "breakpoints",
    "coefficients",
    "grad_tol",
    "max_iters",
    "t",
    "x_range",
    "x_samples",
    "fd_T",
    "fd_dx",
    "diffusion_table",
    "n_list",
    "grid_samples",
];

struct Entry<'a> {
    line: usize,
    key: &'a str,
    value: &'a str,
}

impl Entry<'_> {
    fn invalid(&self, message: impl Into<String>) -> ConfigError {
        ConfigError::InvalidValue {
            line: self.line,
            key: self.key.to_string(),
            message: message.into(),
        }
    }

    fn number<T: FromStr>(&self, raw: &str) -> Result<T, ConfigError> {
        raw.trim()
            .parse()
            .map_err(|_| self.invalid(format!("`{}` is not a number", raw.trim())))
    }

    fn scalar<T: FromStr>(&self) -> Result<T, ConfigError> {
        if self.value.starts_with('[') {
            return Err(self.invalid("expected a single value, not a list"));
        }
        self.number(self.value)
    }

    fn list<T: FromStr>(&self) -> Result<Vec<T>, ConfigError> {
        let inner = self
            .value
            .strip_prefix('[')
            .and_then(|v| v.strip_suffix(']'))
            .ok_or_else(|| self.invalid("expected a list like [1, 2]"))?;
        if inner.trim().is_empty() {
            return Ok(Vec::new());
        }
        inner.split(',').map(|item| self.number(item)).collect()
    }

    fn finite(&self, v: f64) -> Result<f64, ConfigError> {
        if v.is_finite() {
            Ok(v)
        } else {
            Err(self.invalid("must be finite"))
        }
    }

    fn positive(&self, v: f64) -> Result<f64, ConfigError> {
        if v > 0.0 && v.is_finite() {
            Ok(v)
        } else {
            Err(self.invalid("must be positive"))
        }
    }
}

/// Parses a configuration file. Problem semantics (ordering, signs) are left
/// to the solver's own validation.
pub fn parse_config(text: &str) -> Result<RunConfig, ConfigError> {
    let mut seen: HashMap<&str, usize> = HashMap::new();
    let mut entries = Vec::new();
    for (index, raw) in text.lines().enumerate() {
        let line = index + 1;
        let content = raw.split('#').next().unwrap_or("").trim();
        if content.is_empty() {
            continue;
        }
        let (key, value) = content.split_once('=').ok_or_else(|| ConfigError::Syntax {
            line,
            message: "expected `key = value`".into(),
        })?;
        let (key, value) = (key.trim(), value.trim());
        if key.is_empty() || value.is_empty() {
            return Err(ConfigError::Syntax {
                line,
                message: "empty key or value".into(),
            });
        }
        if !KEYS.contains(&key) {
            return Err(ConfigError::UnknownKey {
                line,
                key: key.to_string(),
            });
        }
        if let Some(&first) = seen.get(key) {
            return Err(ConfigError::DuplicateKey {
                line,
                key: key.to_string(),
                first,
            });
        }
        seen.insert(key, line);
        entries.push(Entry { line, key, value });
    }

    let mut config = RunConfig::default();
    let mut u_minus = None;
    let mut u_plus = None;
    let mut breakpoints = None;
    let mut coefficients = None;
    for e in &entries {
        match e.key {
            "command" => config.command = Some(e.value.parse().map_err(|m: String| e.invalid(m))?),
            "u_minus" => u_minus = Some(e.finite(e.scalar()?)?),
            "u_plus" => u_plus = Some(e.finite(e.scalar()?)?),
            "breakpoints" => breakpoints = Some(e.list::<f64>()?),
            "coefficients" => coefficients = Some(e.list::<f64>()?),
            "grad_tol" => config.grad_tol = e.positive(e.scalar()?)?,
            "max_iters" => config.max_iters = e.scalar()?,
            "t" => {
                let times = e.list::<f64>()?;
                if times.is_empty() {
                    return Err(e.invalid("needs at least one time"));
                }
                for &t in &times {
                    e.positive(t)?;
                }
                config.times = times;
            }
            "x_range" => match e.list::<f64>()?.as_slice() {
                &[lo, hi] if lo < hi && lo.is_finite() && hi.is_finite() => config.x_range = (lo, hi),
                _ => return Err(e.invalid("expected [x_min, x_max] with x_min < x_max")),
            },
            "x_samples" => {
                config.x_samples = e.scalar()?;
                if config.x_samples < 2 {
                    return Err(e.invalid("needs at least 2 samples"));
                }
            }
            "fd_T" => config.fd_time = e.positive(e.scalar()?)?,
            "fd_dx" => {
                let dx = e.list::<f64>()?;
                if dx.is_empty() {
                    return Err(e.invalid("needs at least one spacing"));
                }
                for &d in &dx {
                    e.positive(d)?;
                }
                config.fd_dx = dx;
            }
            "diffusion_table" => config.diffusion_table = Some(PathBuf::from(e.value.trim_matches('"'))),
            "n_list" => {
                let n = e.list::<usize>()?;
                if n.is_empty() || n.contains(&0) || n.windows(2).any(|w| w[1] <= w[0]) {
                    return Err(e.invalid("expected increasing positive cell counts"));
                }
                config.n_list = n;
            }
            "grid_samples" => {
                config.grid_samples = e.scalar()?;
                if config.grid_samples == 0 {
                    return Err(e.invalid("must be positive"));
                }
            }
            _ => unreachable!("key list checked above"),
        }
    }

    if let (Some(b), Some(c)) = (&breakpoints, &coefficients) {
        if c.len() != b.len() + 1 {
            return Err(ConfigError::Arity {
                breakpoints: b.len(),
                expected: b.len() + 1,
                coefficients: c.len(),
            });
        }
    }
    config.problem = match (u_minus, u_plus, coefficients) {
        (Some(u_minus), Some(u_plus), Some(coefficients)) => Some(ProblemInput {
            u_minus,
            u_plus,
            breakpoints: breakpoints.unwrap_or_default(),
            coefficients,
        }),
        _ => None,
    };
    Ok(config)
}

impl RunConfig {
    /// Checks that everything `command` needs is present.
    pub fn check(&self, command: Command) -> Result<(), ConfigError> {
        if let Some(file) = self.command {
            if file != command {
                return Err(ConfigError::CommandMismatch {
                    file,
                    requested: command,
                });
            }
        }
        match command {
            Command::Continuum => {
                if self.diffusion_table.is_none() {
                    return Err(ConfigError::Missing {
                        command,
                        key: "diffusion_table",
                    });
                }
            }
            _ => {
                if self.problem.is_none() {
                    return Err(ConfigError::Missing {
                        command,
                        key: "u_minus, u_plus and coefficients",
                    });
                }
            }
        }
        Ok(())
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn minimal_solve() {
        let c = parse_config("u_minus = 0\nu_plus = 2\nbreakpoints = [1]\ncoefficients = [1, 2]\n").unwrap();
        let p = c.problem.as_ref().unwrap();
        assert_eq!((p.u_minus, p.u_plus), (0.0, 2.0));
        assert_eq!(p.breakpoints, vec![1.0]);
        assert_eq!(p.coefficients, vec![1.0, 2.0]);
        assert!(c.check(Command::Solve).is_ok());
        assert!(c.check(Command::Continuum).is_err());
    }

    #[test]
    fn comments_and_blank_lines() {
        let c = parse_config("# heat\n\nu_minus = -1 # left\nu_plus=3\ncoefficients=[0.5]\n").unwrap();
        assert_eq!(c.problem.unwrap().breakpoints, Vec::<f64>::new());
    }

    #[test]
    fn arity_names_both_counts() {
        let e = parse_config("u_minus = 0\nu_plus = 3\nbreakpoints = [1, 2]\ncoefficients = [1, 2]\n").unwrap_err();
        assert_eq!(
            e,
            ConfigError::Arity {
                breakpoints: 2,
                expected: 3,
                coefficients: 2
            }
        );
        let msg = e.to_string();
        assert!(msg.contains('2') && msg.contains('3'), "{msg}");
    }

    #[test]
    fn duplicate_key_reports_line() {
        let e = parse_config("u_minus = 0\n\nu_minus = 1\n").unwrap_err();
        assert_eq!(
            e,
            ConfigError::DuplicateKey {
                line: 3,
                key: "u_minus".into(),
                first: 1
            }
        );
        assert!(e.to_string().starts_with("line 3:"));
    }

    #[test]
    fn unknown_key_and_syntax() {
        assert!(matches!(
            parse_config("u_minus = 0\nspeed = 3\n"),
            Err(ConfigError::UnknownKey { line: 2, .. })
        ));
        assert!(matches!(
            parse_config("u_minus 0\n"),
            Err(ConfigError::Syntax { line: 1, .. })
        ));
        assert!(matches!(
            parse_config("coefficients = 1, 2\n"),
            Err(ConfigError::InvalidValue { line: 1, .. })
        ));
        assert!(matches!(
            parse_config("u_plus = [1]\n"),
            Err(ConfigError::InvalidValue { line: 1, .. })
        ));
        assert!(matches!(
            parse_config("fd_dx = [0.01, -1]\n"),
            Err(ConfigError::InvalidValue { line: 1, .. })
        ));
    }

    #[test]
    fn command_key_must_match() {
        let c = parse_config("command = validate\nu_minus = 0\nu_plus = 1\ncoefficients = [1]\n").unwrap();
        assert!(c.check(Command::Validate).is_ok());
        assert!(matches!(
            c.check(Command::Solve),
            Err(ConfigError::CommandMismatch { .. })
        ));
    }

    #[test]
    fn lists_and_defaults() {
        let c = parse_config("t = [0.5, 2]\nx_range = [-1, 1]\nn_list = [4, 8]\ndiffusion_table = a.csv\n").unwrap();
        assert_eq!(c.times, vec![0.5, 2.0]);
        assert_eq!(c.x_range, (-1.0, 1.0));
        assert_eq!(c.n_list, vec![4, 8]);
        assert_eq!(c.fd_dx, vec![0.04, 0.02, 0.01]);
        assert!(c.check(Command::Continuum).is_ok());
        assert!(parse_config("n_list = [8, 4]\n").is_err());
    }
}
