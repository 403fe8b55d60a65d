use std::fmt::Write as _;
use std::fs;
use std::path::{Path, PathBuf};

use selfsim_core::continuum::{convergence_study, DiffusionFunction};
use selfsim_core::oracle::{compare_profiles, fd_solve_threaded};
use selfsim_core::{initial_guess, solve_problem, Entropy, RiemannProblem, SelfSimilarProfile, Solution, SolveOptions};
use thiserror::Error;

use crate::config::{parse_config, Command, ConfigError, ProblemInput, RunConfig};

/// Points in `profile.csv`.
const PROFILE_SAMPLES: usize = 2001;

#[derive(Debug, Error)]
pub enum CliError {
    #[error("{path}: {source}")]
    Config { path: PathBuf, source: ConfigError },
    #[error(transparent)]
    InvalidConfig(#[from] ConfigError),
    #[error("{path}: {source}")]
    Io { path: PathBuf, source: std::io::Error },
    #[error(transparent)]
    Solver(#[from] selfsim_core::Error),
    #[error(
        "optimizer stopped after {iterations} iterations with gradient norm {grad_norm:e} (tolerance {grad_tol:e})"
    )]
    NotConverged {
        iterations: usize,
        grad_norm: f64,
        grad_tol: f64,
    },
    #[error("continuum run with {cells} cells did not converge")]
    StudyNotConverged { cells: usize },
    #[error("{path}, line {line}: {message}")]
    Table {
        path: PathBuf,
        line: usize,
        message: String,
    },
}

/// One CSV table, named by its suffix (`boundaries.csv`, ...).
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Output {
    pub name: &'static str,
    pub contents: String,
}

/// Shortest representation that parses back to the same `f64`.
fn num(x: f64) -> String {
    format!("{x:?}")
}

fn options(config: &RunConfig) -> SolveOptions {
    SolveOptions {
        grad_tol: config.grad_tol,
        max_iters: config.max_iters,
        ..SolveOptions::default()
    }
}

fn solve_input(input: &ProblemInput, options: &SolveOptions) -> Result<Solution, CliError> {
    if input.u_minus == input.u_plus {
        return Ok(Solution {
            problem: None,
            layout: None,
            result: None,
            profile: SelfSimilarProfile::constant(input.u_minus),
            jumps: Vec::new(),
        });
    }
    let problem = RiemannProblem::from_interior(input.u_minus, input.u_plus, &input.breakpoints, &input.coefficients)?;
    let solution = solve_problem(problem, options)?;
    if let Some(r) = solution.result.as_ref().filter(|r| !r.converged) {
        return Err(CliError::NotConverged {
            iterations: r.iterations,
            grad_norm: r.grad_norm,
            grad_tol: r.grad_tol,
        });
    }
    Ok(solution)
}

/// Half-width of the sampled ξ window: 1.2 times the sublevel radius at the
/// initial guess's entropy. Without free boundaries the profile is either
/// constant or a single heat arc, which is flat to machine precision beyond
/// `12 a`.
fn profile_radius(solution: &Solution) -> f64 {
    let (Some(problem), Some(layout)) = (&solution.problem, &solution.layout) else {
        return 1.0;
    };
    if layout.m() == 0 {
        let a = problem.partition().coefficients().iter().copied().fold(0.0, f64::max);
        return if a > 0.0 { 12.0 * a } else { 1.0 };
    }
    let entropy = Entropy::new(problem, layout);
    let guess = initial_guess(problem, layout);
    let c = entropy.value(guess.values()).unwrap_or(f64::NAN);
    let r = 1.2 * entropy.sublevel_bounds(c).radius;
    if r.is_finite() && r > 0.0 {
        r
    } else {
        1.0
    }
}

fn linspace(lo: f64, hi: f64, count: usize) -> impl Iterator<Item = f64> {
    (0..count).map(move |i| {
        if i + 1 == count {
            hi
        } else {
            lo + (hi - lo) * i as f64 / (count - 1) as f64
        }
    })
}

fn solve_tables(solution: &Solution) -> Vec<Output> {
    let mut boundaries = String::from("slot,xi,classification,residual\n");
    for r in &solution.jumps {
        let _ = writeln!(
            boundaries,
            "{},{},{},{}",
            r.slot,
            num(r.location),
            r.classification.as_str(),
            num(r.rh_residual)
        );
    }

    let radius = profile_radius(solution);
    let mut profile = String::from("xi,v_left,v_right\n");
    for xi in linspace(-radius, radius, PROFILE_SAMPLES) {
        let v = solution.profile.eval_selfsimilar(xi);
        let _ = writeln!(profile, "{},{},{}", num(xi), num(v.left), num(v.right));
    }

    let mut trace = String::from("iteration,value,grad_norm,step_length\n");
    if let Some(r) = &solution.result {
        for row in &r.trace {
            let _ = writeln!(
                trace,
                "{},{},{},{}",
                row.iteration,
                num(row.value),
                num(row.grad_norm),
                num(row.step_length)
            );
        }
    }

    vec![
        Output {
            name: "boundaries.csv",
            contents: boundaries,
        },
        Output {
            name: "profile.csv",
            contents: profile,
        },
        Output {
            name: "trace.csv",
            contents: trace,
        },
    ]
}

fn evaluate_table(solution: &Solution, config: &RunConfig) -> Result<Vec<Output>, CliError> {
    let (lo, hi) = config.x_range;
    let mut out = String::from("t,x,u_left,u_right\n");
    for &t in &config.times {
        for x in linspace(lo, hi, config.x_samples) {
            let v = solution.profile.eval_solution(t, x)?;
            let _ = writeln!(out, "{},{},{},{}", num(t), num(x), num(v.left), num(v.right));
        }
    }
    Ok(vec![Output {
        name: "solution.csv",
        contents: out,
    }])
}

fn validate_table(solution: &Solution, config: &RunConfig, threads: usize) -> Result<Vec<Output>, CliError> {
    let mut out = String::from("dx,dt,steps,nodes,l1,relative_l1,linf_away_from_jumps,ratio\n");
    let Some(problem) = &solution.problem else {
        // Constant data: the scheme is exact.
        for &dx in &config.fd_dx {
            let _ = writeln!(out, "{},,0,0,0.0,0.0,0.0,", num(dx));
        }
        return Ok(vec![Output {
            name: "validation.csv",
            contents: out,
        }]);
    };
    let mut dx_list = config.fd_dx.clone();
    dx_list.sort_by(|a, b| b.total_cmp(a));
    let mut previous: Option<f64> = None;
    for dx in dx_list {
        let grid = fd_solve_threaded(problem, config.fd_time, dx, threads)?;
        let c = compare_profiles(&grid, &solution.profile);
        let ratio = previous.map(|p| num(p / c.l1)).unwrap_or_default();
        let _ = writeln!(
            out,
            "{},{},{},{},{},{},{},{}",
            num(dx),
            num(grid.dt),
            grid.steps,
            grid.values.len(),
            num(c.l1),
            num(c.relative_l1),
            num(c.linf_away_from_jumps),
            ratio
        );
        previous = Some(c.l1);
    }
    Ok(vec![Output {
        name: "validation.csv",
        contents: out,
    }])
}

/// Reads `u, a` rows (comma or whitespace separated). Blank lines, `#`
/// comments and a leading non-numeric header are skipped.
pub fn read_diffusion_table(path: &Path) -> Result<DiffusionFunction, CliError> {
    let text = fs::read_to_string(path).map_err(|source| CliError::Io {
        path: path.to_path_buf(),
        source,
    })?;
    let table_error = |line: usize, message: String| CliError::Table {
        path: path.to_path_buf(),
        line,
        message,
    };
    let mut samples = Vec::new();
    let mut header_allowed = true;
    for (index, raw) in text.lines().enumerate() {
        let line = index + 1;
        let content = raw.split('#').next().unwrap_or("").trim();
        if content.is_empty() {
            continue;
        }
        let fields: Vec<&str> = content
            .split(|c: char| c == ',' || c.is_whitespace())
            .filter(|f| !f.is_empty())
            .collect();
        let parsed: Option<Vec<f64>> = fields.iter().map(|f| f.parse().ok()).collect();
        match parsed.as_deref() {
            Some(&[u, a]) => samples.push((u, a)),
            None if header_allowed => {}
            _ => {
                return Err(table_error(
                    line,
                    format!("expected two numbers `u, a`, got `{content}`"),
                ))
            }
        }
        header_allowed = false;
    }
    DiffusionFunction::new(samples).map_err(|e| table_error(0, e.to_string()))
}

fn continuum_tables(config: &RunConfig, base_dir: &Path) -> Result<Vec<Output>, CliError> {
    let rel = config.diffusion_table.as_ref().ok_or(ConfigError::Missing {
        command: Command::Continuum,
        key: "diffusion_table",
    })?;
    let f = read_diffusion_table(&base_dir.join(rel))?;
    let study = convergence_study(&f, &config.n_list, config.grid_samples, None, &options(config))?;
    if let Some(row) = study.rows.iter().find(|r| !r.converged) {
        return Err(CliError::StudyNotConverged { cells: row.cells });
    }

    let successive = study.successive_distances();
    let mut table = String::from("cells,phases,iterations,entropy_shifted,distance_to_finest,distance_to_previous\n");
    for (i, row) in study.rows.iter().enumerate() {
        let prev = if i == 0 { String::new() } else { num(successive[i - 1]) };
        let _ = writeln!(
            table,
            "{},{},{},{},{},{}",
            row.cells,
            row.phases,
            row.iterations,
            num(row.entropy_shifted),
            num(row.sup_distance),
            prev
        );
    }

    let mut inverse = String::from("u");
    for row in &study.rows {
        let _ = write!(inverse, ",xi_{}", row.cells);
    }
    inverse.push('\n');
    for (i, &u) in study.grid.iter().enumerate() {
        inverse.push_str(&num(u));
        for row in &study.rows {
            let _ = write!(inverse, ",{}", num(row.inverse[i]));
        }
        inverse.push('\n');
    }

    Ok(vec![
        Output {
            name: "convergence.csv",
            contents: table,
        },
        Output {
            name: "inverse.csv",
            contents: inverse,
        },
    ])
}

/// Runs `command` and returns its tables without touching the filesystem,
/// except to read a continuum diffusion table relative to `base_dir`.
/// `threads` only affects the finite-difference oracle, never its output.
pub fn run(command: Command, config: &RunConfig, base_dir: &Path, threads: usize) -> Result<Vec<Output>, CliError> {
    config.check(command)?;
    if command == Command::Continuum {
        return continuum_tables(config, base_dir);
    }
    let input = config.problem.as_ref().expect("checked above");
    let solution = solve_input(input, &options(config))?;
    match command {
        Command::Solve => Ok(solve_tables(&solution)),
        Command::Evaluate => evaluate_table(&solution, config),
        Command::Validate => validate_table(&solution, config, threads),
        Command::Continuum => unreachable!(),
    }
}

fn write_outputs(prefix: &str, outputs: &[Output]) -> Result<Vec<PathBuf>, CliError> {
    let mut written = Vec::new();
    for o in outputs {
        let path = PathBuf::from(format!("{prefix}{}", o.name));
        let result = path
            .parent()
            .filter(|p| !p.as_os_str().is_empty())
            .map_or(Ok(()), fs::create_dir_all)
            .and_then(|_| fs::write(&path, &o.contents));
        if let Err(source) = result {
            for p in written.iter().chain(std::iter::once(&path)) {
                let _ = fs::remove_file(p);
            }
            return Err(CliError::Io { path, source });
        }
        written.push(path);
    }
    Ok(written)
}

/// Reads the config at `path`, runs `command`, and writes each table to
/// `{prefix}{name}`. Returns the written paths.
pub fn run_file(command: Command, path: &Path, prefix: &str, threads: usize) -> Result<Vec<PathBuf>, CliError> {
    let text = fs::read_to_string(path).map_err(|source| CliError::Io {
        path: path.to_path_buf(),
        source,
    })?;
    let config = parse_config(&text).map_err(|source| CliError::Config {
        path: path.to_path_buf(),
        source,
    })?;
    let base_dir = path.parent().unwrap_or(Path::new(""));
    let outputs = run(command, &config, base_dir, threads)?;
    write_outputs(prefix, &outputs)
}
