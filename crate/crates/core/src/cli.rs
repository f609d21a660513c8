//! Command-line surface: `spectrum`, `density`, `norm` and `verify`.
//!
//! Every subcommand reads a JSON run configuration, applies flag overrides and
//! writes a table as CSV (17 significant digits) or JSON. Exit codes: 0 pass,
//! 1 verification failure, 2 configuration error, 3 solver error.

use std::fmt::Write as _;
use std::io::Write as _;
use std::path::{Path, PathBuf};

use clap::{Args, Parser, Subcommand, ValueEnum};
use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::Error;
use crate::oracle::{compare_states, integrate_pair, shoot_energies, ShootingConfig};
use crate::potential::ScarfPotential;
use crate::quadrature::{modified_norm, normalized_overlap_matrix, ortho_overlap};
use crate::spectrum::{solve_energies, Branch, EnergyLevel};
use crate::wavefunction::{
    build_bound_state, definitional_residual, eval_psi1, eval_psi2, eval_spinor, ode_residual_psi1,
    BoundState,
};

pub const EXIT_PASS: i32 = 0;
pub const EXIT_VERIFY_FAILED: i32 = 1;
pub const EXIT_CONFIG: i32 = 2;
pub const EXIT_SOLVER: i32 = 3;

/// Thresholds applied by `verify` and `spectrum --verify`.
pub mod thresholds {
    pub const ODE_RESIDUAL: f64 = 1e-7;
    pub const DEFINITIONAL: f64 = 1e-12;
    pub const ORACLE_ENERGY: f64 = 1e-6;
    pub const ORACLE_SHAPE: f64 = 1e-5;
    pub const OVERLAP: f64 = 1e-7;
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize, ValueEnum)]
#[serde(rename_all = "lowercase")]
pub enum Format {
    #[default]
    Csv,
    Json,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct GridSpec {
    pub x_min: f64,
    pub x_max: f64,
    pub points: usize,
}

impl Default for GridSpec {
    fn default() -> Self {
        GridSpec {
            x_min: -8.0,
            x_max: 8.0,
            points: 401,
        }
    }
}

impl GridSpec {
    pub fn nodes(&self) -> Vec<f64> {
        let step = (self.x_max - self.x_min) / (self.points - 1) as f64;
        (0..self.points)
            .map(|i| {
                if i + 1 == self.points {
                    self.x_max
                } else {
                    self.x_min + step * i as f64
                }
            })
            .collect()
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct Tolerances {
    pub quad_tol: f64,
    pub ode_rel_tol: f64,
}

impl Default for Tolerances {
    fn default() -> Self {
        Tolerances {
            quad_tol: 1e-11,
            ode_rel_tol: 1e-10,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Default, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct OutputSpec {
    pub format: Format,
    /// Standard output when absent.
    pub path: Option<PathBuf>,
}

fn default_branch() -> Branch {
    Branch::Plus
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RunConfig {
    pub potential: ScarfPotential,
    pub k_y: f64,
    #[serde(default = "default_branch")]
    pub epsilon: Branch,
    #[serde(default)]
    pub n_max: usize,
    #[serde(default)]
    pub grid: GridSpec,
    #[serde(default)]
    pub tolerances: Tolerances,
    #[serde(default)]
    pub output: OutputSpec,
}

impl RunConfig {
    pub fn validate(&self) -> Result<(), CliError> {
        self.potential
            .validate()
            .map_err(|e| CliError::Config(e.to_string()))?;
        if self.k_y == 0.0 || !self.k_y.is_finite() {
            return Err(CliError::Config("k_y must be finite and nonzero".into()));
        }
        if self.grid.points < 2 {
            return Err(CliError::Config("grid.points must be at least 2".into()));
        }
        let ordered = self.grid.x_min < self.grid.x_max;
        if !ordered {
            return Err(CliError::Config(
                "grid.x_min must be below grid.x_max".into(),
            ));
        }
        let t = &self.tolerances;
        if !(t.quad_tol > 0.0 && t.ode_rel_tol > 0.0) {
            return Err(CliError::Config("tolerances must be positive".into()));
        }
        Ok(())
    }

    fn shooting(&self) -> ShootingConfig {
        ShootingConfig {
            rel_tol: self.tolerances.ode_rel_tol,
            abs_tol: self.tolerances.ode_rel_tol * 1e-2,
            ..ShootingConfig::default()
        }
    }
}

#[derive(Debug, thiserror::Error)]
pub enum CliError {
    #[error("configuration error: {0}")]
    Config(String),
    #[error("solver error: {0}")]
    Solver(#[from] Error),
    #[error("i/o error: {0}")]
    Io(#[from] std::io::Error),
}

impl CliError {
    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::Config(_) | CliError::Io(_) => EXIT_CONFIG,
            CliError::Solver(_) => EXIT_SOLVER,
        }
    }
}

#[derive(Debug, Parser)]
#[command(
    name = "edp-dirac",
    version,
    about = "Energy-dependent Scarf potential Dirac solver"
)]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Clone, Args)]
pub struct CommonArgs {
    /// Run configuration (JSON).
    #[arg(long)]
    pub config: PathBuf,
    #[arg(long = "k-y", allow_hyphen_values = true)]
    pub k_y: Option<f64>,
    #[arg(long)]
    pub n_max: Option<usize>,
    /// Branch sign, 1 or -1.
    #[arg(long, allow_hyphen_values = true)]
    pub epsilon: Option<i8>,
    /// Output file; overrides output.path.
    #[arg(long)]
    pub out: Option<PathBuf>,
    #[arg(long, value_enum)]
    pub format: Option<Format>,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Stationary energies for n = 0..=n_max.
    Spectrum {
        #[command(flatten)]
        common: CommonArgs,
        /// Also locate each level with the shooting oracle.
        #[arg(long)]
        verify: bool,
    },
    /// Peak-normalized densities |ψ+|², |ψ-|² on the configured grid.
    Density {
        #[command(flatten)]
        common: CommonArgs,
        /// Levels such as `0,1,2` or `0..3` (inclusive).
        #[arg(long, default_value = "")]
        levels: String,
    },
    /// Modified norms and pairwise overlaps.
    Norm {
        #[command(flatten)]
        common: CommonArgs,
        #[arg(long, default_value = "0")]
        levels: String,
    },
    /// Full residual, oracle, norm and orthogonality check suite.
    Verify {
        #[command(flatten)]
        common: CommonArgs,
    },
}

pub fn load_config(path: &Path) -> Result<RunConfig, CliError> {
    let text = std::fs::read_to_string(path)
        .map_err(|e| CliError::Config(format!("cannot read {}: {e}", path.display())))?;
    serde_json::from_str(&text).map_err(|e| CliError::Config(format!("{}: {e}", path.display())))
}

pub fn apply_overrides(mut cfg: RunConfig, args: &CommonArgs) -> Result<RunConfig, CliError> {
    if let Some(k) = args.k_y {
        cfg.k_y = k;
    }
    if let Some(n) = args.n_max {
        cfg.n_max = n;
    }
    if let Some(e) = args.epsilon {
        cfg.epsilon = Branch::try_from(e).map_err(CliError::Config)?;
    }
    if let Some(out) = &args.out {
        cfg.output.path = Some(out.clone());
    }
    if let Some(f) = args.format {
        cfg.output.format = f;
    }
    cfg.validate()?;
    Ok(cfg)
}

/// Parses `0,1,2`, `0..3` (inclusive), `0..=3`, or an empty list.
pub fn parse_levels(list: &str) -> Result<Vec<usize>, CliError> {
    let bad = |s: &str| CliError::Config(format!("invalid level list: {s}"));
    let mut out = Vec::new();
    for part in list.split(',').map(str::trim).filter(|p| !p.is_empty()) {
        if let Some((a, b)) = part.split_once("..") {
            let b = b.strip_prefix('=').unwrap_or(b);
            let lo: usize = a.trim().parse().map_err(|_| bad(part))?;
            let hi: usize = b.trim().parse().map_err(|_| bad(part))?;
            if hi < lo {
                return Err(bad(part));
            }
            out.extend(lo..=hi);
        } else {
            out.push(part.parse().map_err(|_| bad(part))?);
        }
    }
    Ok(out)
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum Cell {
    Bool(bool),
    Int(i64),
    Float(f64),
    Null,
}

impl Cell {
    fn csv(&self) -> String {
        match self {
            Cell::Bool(b) => b.to_string(),
            Cell::Int(i) => i.to_string(),
            Cell::Float(f) => format!("{f:.16e}"),
            Cell::Null => String::new(),
        }
    }
}

impl From<f64> for Cell {
    fn from(v: f64) -> Self {
        if v.is_finite() {
            Cell::Float(v)
        } else {
            Cell::Null
        }
    }
}

impl From<usize> for Cell {
    fn from(v: usize) -> Self {
        Cell::Int(v as i64)
    }
}

impl From<bool> for Cell {
    fn from(v: bool) -> Self {
        Cell::Bool(v)
    }
}

#[derive(Debug, Clone, PartialEq, Default, Serialize, Deserialize)]
pub struct Table {
    pub columns: Vec<String>,
    pub rows: Vec<Vec<Cell>>,
}

impl Table {
    pub fn to_csv(&self) -> String {
        let mut s = self.columns.join(",");
        s.push('\n');
        for row in &self.rows {
            let line: Vec<String> = row.iter().map(Cell::csv).collect();
            s.push_str(&line.join(","));
            s.push('\n');
        }
        s
    }

    pub fn to_json(&self) -> String {
        let mut s = serde_json::to_string_pretty(self).expect("table serializes");
        s.push('\n');
        s
    }

    pub fn render(&self, format: Format) -> String {
        match format {
            Format::Csv => self.to_csv(),
            Format::Json => self.to_json(),
        }
    }
}

fn bound_states(
    cfg: &RunConfig,
    levels: &[EnergyLevel],
    wanted: &[usize],
) -> Result<Vec<BoundState>, CliError> {
    wanted
        .iter()
        .map(|&n| {
            let level = levels
                .iter()
                .find(|l| l.n == n)
                .ok_or(Error::BracketingFailure { n })?;
            Ok(build_bound_state(
                &cfg.potential,
                *level,
                level.quantum_numbers(),
                false,
            )?)
        })
        .collect()
}

fn solve(cfg: &RunConfig, n_max: usize) -> Result<Vec<EnergyLevel>, CliError> {
    Ok(solve_energies(&cfg.potential, cfg.epsilon, cfg.k_y, n_max)?)
}

/// Energy window and scan density covering all levels with margin.
pub fn shooting_window(energies: &[f64], base: &ShootingConfig) -> ([f64; 2], ShootingConfig) {
    let mut sorted = energies.to_vec();
    sorted.sort_by(f64::total_cmp);
    let gaps: Vec<f64> = sorted.windows(2).map(|w| w[1] - w[0]).collect();
    let first = sorted[0];
    let last = *sorted.last().expect("at least one level");
    let lead = gaps.first().copied().unwrap_or(0.25 * first.abs().max(0.1));
    let trail = gaps.last().copied().unwrap_or(0.25 * last.abs().max(0.1));
    // Keep the window on one side of a possible singularity at E = 0.
    let mut lo = first - 0.5 * lead;
    let mut hi = last + 0.5 * trail;
    if last < 0.0 {
        hi = hi.min(0.5 * last);
    }
    if first > 0.0 {
        lo = lo.max(0.5 * first);
    }
    let min_gap = gaps.iter().copied().fold(lead.min(trail), f64::min);
    let points = ((20.0 * (hi - lo) / min_gap).ceil() as usize).max(base.scan_points);
    (
        [lo, hi],
        ShootingConfig {
            scan_points: points,
            ..*base
        },
    )
}

/// Matches each energy to the nearest shot energy; `None` when nothing was found.
pub fn match_shot(energies: &[f64], shot: &[f64]) -> Vec<Option<f64>> {
    energies
        .iter()
        .map(|&e| {
            shot.iter()
                .copied()
                .min_by(|a, b| (a - e).abs().total_cmp(&(b - e).abs()))
        })
        .collect()
}

pub fn spectrum_table(cfg: &RunConfig, verify: bool) -> Result<Table, CliError> {
    let levels = solve(cfg, cfg.n_max)?;
    let mut columns: Vec<String> = [
        "n",
        "energy",
        "kappa",
        "wavenumber_ok",
        "lambda_condition_ok",
        "sign_condition_ok",
    ]
    .map(String::from)
    .to_vec();
    let shots = if verify && !levels.is_empty() {
        columns.push("energy_shoot".into());
        columns.push("abs_dev".into());
        let energies: Vec<f64> = levels.iter().map(|l| l.energy).collect();
        let (range, shoot_cfg) = shooting_window(&energies, &cfg.shooting());
        let shot = shoot_energies(&cfg.potential, cfg.k_y, range, &shoot_cfg);
        Some(match_shot(&energies, &shot))
    } else {
        None
    };
    let rows = levels
        .iter()
        .enumerate()
        .map(|(i, l)| {
            let mut row = vec![
                Cell::from(l.n),
                l.energy.into(),
                l.kappa.into(),
                l.valid.wavenumber_ok.into(),
                l.valid.lambda_condition_ok.into(),
                l.valid.sign_condition_ok.into(),
            ];
            if let Some(shots) = &shots {
                match shots[i] {
                    Some(e) => {
                        row.push(e.into());
                        row.push((e - l.energy).abs().into());
                    }
                    None => row.extend([Cell::Null, Cell::Null]),
                }
            }
            row
        })
        .collect();
    Ok(Table { columns, rows })
}

pub fn density_table(cfg: &RunConfig, wanted: &[usize]) -> Result<Table, CliError> {
    let grid = cfg.grid.nodes();
    let mut columns = vec!["x".to_string()];
    if wanted.is_empty() {
        return Ok(Table {
            columns,
            rows: Vec::new(),
        });
    }
    let n_top = *wanted.iter().max().expect("nonempty");
    let levels = solve(cfg, n_top)?;
    let states = bound_states(cfg, &levels, wanted)?;

    let mut data: Vec<Vec<f64>> = Vec::with_capacity(2 * states.len());
    for (state, n) in states.iter().zip(wanted) {
        let samples: Vec<_> = grid
            .iter()
            .map(|&x| eval_spinor(state, &cfg.potential, x, 1.0))
            .collect();
        for (label, pick) in [
            (
                "density_plus",
                (|s: &crate::wavefunction::SpinorSample| s.density_plus) as fn(&_) -> f64,
            ),
            ("density_minus", |s: &crate::wavefunction::SpinorSample| {
                s.density_minus
            }),
        ] {
            let column: Vec<f64> = samples.iter().map(pick).collect();
            let peak = column.iter().copied().fold(0.0, f64::max);
            let peak = if peak > 0.0 { peak } else { 1.0 };
            data.push(column.iter().map(|v| v / peak).collect());
            columns.push(format!("{label}_n{n}"));
        }
    }
    let rows = grid
        .iter()
        .enumerate()
        .map(|(i, &x)| {
            std::iter::once(Cell::from(x))
                .chain(data.iter().map(|c| Cell::from(c[i])))
                .collect()
        })
        .collect();
    Ok(Table { columns, rows })
}

pub fn norm_table(cfg: &RunConfig, wanted: &[usize]) -> Result<Table, CliError> {
    let columns = [
        "m",
        "n",
        "energy_m",
        "energy_n",
        "value_re",
        "value_im",
        "error_estimate",
        "normalized_abs",
    ]
    .map(String::from)
    .to_vec();
    if wanted.is_empty() {
        return Ok(Table {
            columns,
            rows: Vec::new(),
        });
    }
    let n_top = *wanted.iter().max().expect("nonempty");
    let levels = solve(cfg, n_top)?;
    let states = bound_states(cfg, &levels, wanted)?;
    let tol = cfg.tolerances.quad_tol;
    let norms = states
        .iter()
        .map(|s| modified_norm(s, &cfg.potential, tol))
        .collect::<Result<Vec<_>, _>>()?;
    let mut rows = Vec::new();
    for (i, sm) in states.iter().enumerate() {
        for (j, sn) in states.iter().enumerate() {
            let (value, error) = if i == j {
                (Complex64::new(norms[i].value, 0.0), norms[i].error_estimate)
            } else {
                let r = ortho_overlap(sm, sn, &cfg.potential, tol)?;
                (r.value, r.error_estimate)
            };
            let normalized = value.norm() / (norms[i].value.abs() * norms[j].value.abs()).sqrt();
            rows.push(vec![
                Cell::from(wanted[i]),
                Cell::from(wanted[j]),
                sm.energy().into(),
                sn.energy().into(),
                value.re.into(),
                value.im.into(),
                error.into(),
                normalized.into(),
            ]);
        }
    }
    Ok(Table { columns, rows })
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct CheckLine {
    pub name: String,
    pub passed: bool,
    pub detail: String,
}

impl CheckLine {
    fn new(name: impl Into<String>, passed: bool, detail: impl Into<String>) -> Self {
        CheckLine {
            name: name.into(),
            passed,
            detail: detail.into(),
        }
    }

    fn threshold(name: impl Into<String>, value: f64, limit: f64) -> Self {
        CheckLine::new(
            name,
            value < limit,
            format!("value={value:.3e} threshold={limit:.0e}"),
        )
    }
}

fn check_grid(lo: f64, hi: f64, points: usize) -> Vec<f64> {
    GridSpec {
        x_min: lo,
        x_max: hi,
        points,
    }
    .nodes()
}

/// Runs every verification check. The result is the list of per-check lines;
/// the run passes iff every line passed.
pub fn verify_checks(cfg: &RunConfig) -> Vec<CheckLine> {
    let mut lines = Vec::new();
    let v = &cfg.potential;
    let sign = v.check_sign_condition();
    lines.push(CheckLine::new(
        "sign_condition",
        sign.admissible,
        format!(
            "lambda_increasing={} mu_constant={}",
            sign.lambda_increasing, sign.mu_constant
        ),
    ));

    let levels = match solve(cfg, cfg.n_max) {
        Ok(levels) => levels,
        Err(e) => {
            lines.push(CheckLine::new("spectrum", false, e.to_string()));
            return lines;
        }
    };

    let grid = check_grid(-6.0, 6.0, 241);
    let mut states = Vec::new();
    for level in &levels {
        let n = level.n;
        lines.push(CheckLine::new(
            format!("bound_state[n={n}]"),
            level.valid.is_bound_state(),
            format!("E={:.16e} flags={:?}", level.energy, level.valid),
        ));
        let state = match build_bound_state(v, *level, level.quantum_numbers(), true) {
            Ok(s) => s,
            Err(e) => {
                lines.push(CheckLine::new(
                    format!("closed_form[n={n}]"),
                    false,
                    e.to_string(),
                ));
                continue;
            }
        };
        let peak = grid
            .iter()
            .map(|&x| eval_psi1(&state, x).norm())
            .fold(0.0, f64::max);
        let ode = grid
            .iter()
            .map(|&x| ode_residual_psi1(&state, x).norm())
            .fold(0.0, f64::max)
            / peak;
        lines.push(CheckLine::threshold(
            format!("ode_residual[n={n}]"),
            ode,
            thresholds::ODE_RESIDUAL,
        ));

        let scale = grid
            .iter()
            .map(|&x| (state.k_y * eval_psi2(&state, v, x)).norm())
            .fold(0.0, f64::max);
        let ident = grid
            .iter()
            .map(|&x| definitional_residual(&state, v, x).map_or(f64::INFINITY, |r| r.norm()))
            .fold(0.0, f64::max)
            / scale;
        lines.push(CheckLine::threshold(
            format!("definitional[n={n}]"),
            ident,
            thresholds::DEFINITIONAL,
        ));
        states.push(state);
    }

    let shoot = cfg.shooting();
    let energies: Vec<f64> = states.iter().map(BoundState::energy).collect();
    if !energies.is_empty() {
        let (range, shoot_cfg) = shooting_window(&energies, &shoot);
        let shot = shoot_energies(v, cfg.k_y, range, &shoot_cfg);
        for (state, found) in states.iter().zip(match_shot(&energies, &shot)) {
            let n = state.n;
            let dev = found.map_or(f64::INFINITY, |e| (e - state.energy()).abs());
            lines.push(CheckLine::threshold(
                format!("oracle_energy[n={n}]"),
                dev,
                thresholds::ORACLE_ENERGY,
            ));
            let shape = integrate_pair(v, state.energy(), cfg.k_y, &grid, &shoot)
                .and_then(|pair| compare_states(state, &pair, &grid))
                .map_or(f64::INFINITY, |r| r.max_rel_dev);
            lines.push(CheckLine::threshold(
                format!("oracle_shape[n={n}]"),
                shape,
                thresholds::ORACLE_SHAPE,
            ));
        }
    }

    let tol = cfg.tolerances.quad_tol;
    for state in &states {
        let n = state.n;
        match modified_norm(state, v, tol) {
            Ok(r) => lines.push(CheckLine::new(
                format!("norm_positive[n={n}]"),
                r.value > 0.0,
                format!("value={:.6e} error={:.1e}", r.value, r.error_estimate),
            )),
            Err(e) => lines.push(CheckLine::new(
                format!("norm_positive[n={n}]"),
                false,
                e.to_string(),
            )),
        }
    }
    if states.len() > 1 {
        match normalized_overlap_matrix(&states, v, tol) {
            Ok(matrix) => {
                for (m, row) in matrix.iter().enumerate() {
                    for (n, value) in row.iter().enumerate().filter(|(n, _)| *n != m) {
                        lines.push(CheckLine::threshold(
                            format!("overlap[m={},n={}]", states[m].n, states[n].n),
                            value.norm(),
                            thresholds::OVERLAP,
                        ));
                    }
                }
            }
            Err(e) => lines.push(CheckLine::new("overlap", false, e.to_string())),
        }
    }
    lines
}

fn render_checks(lines: &[CheckLine], format: Format) -> String {
    match format {
        Format::Csv => {
            let mut s = String::from("check,status,detail\n");
            for l in lines {
                let status = if l.passed { "PASS" } else { "FAIL" };
                let _ = writeln!(s, "{},{},{}", l.name.replace(',', ";"), status, l.detail);
            }
            s
        }
        Format::Json => {
            let mut s = serde_json::to_string_pretty(lines).expect("checks serialize");
            s.push('\n');
            s
        }
    }
}

fn emit(cfg: &RunConfig, text: &str) -> Result<(), CliError> {
    match &cfg.output.path {
        Some(path) => std::fs::write(path, text)?,
        None => std::io::stdout().lock().write_all(text.as_bytes())?,
    }
    Ok(())
}

fn prepare(args: &CommonArgs) -> Result<RunConfig, CliError> {
    apply_overrides(load_config(&args.config)?, args)
}

fn execute(command: &Command) -> Result<i32, CliError> {
    match command {
        Command::Spectrum { common, verify } => {
            let cfg = prepare(common)?;
            let table = spectrum_table(&cfg, *verify)?;
            emit(&cfg, &table.render(cfg.output.format))?;
            Ok(EXIT_PASS)
        }
        Command::Density { common, levels } => {
            let cfg = prepare(common)?;
            let wanted = parse_levels(levels)?;
            let table = density_table(&cfg, &wanted)?;
            emit(&cfg, &table.render(cfg.output.format))?;
            Ok(EXIT_PASS)
        }
        Command::Norm { common, levels } => {
            let cfg = prepare(common)?;
            let wanted = parse_levels(levels)?;
            let table = norm_table(&cfg, &wanted)?;
            emit(&cfg, &table.render(cfg.output.format))?;
            Ok(EXIT_PASS)
        }
        Command::Verify { common } => {
            let cfg = prepare(common)?;
            let lines = verify_checks(&cfg);
            for l in lines.iter().filter(|l| !l.passed) {
                eprintln!("FAIL {}: {}", l.name, l.detail);
            }
            emit(&cfg, &render_checks(&lines, cfg.output.format))?;
            Ok(if lines.iter().all(|l| l.passed) {
                EXIT_PASS
            } else {
                EXIT_VERIFY_FAILED
            })
        }
    }
}

/// Runs a parsed command line and returns the process exit code.
pub fn run(cli: &Cli) -> i32 {
    match execute(&cli.command) {
        Ok(code) => code,
        Err(e) => {
            eprintln!("edp-dirac: {e}");
            e.exit_code()
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::potential::ParameterProfile;

    fn linear_config() -> RunConfig {
        RunConfig {
            potential: ScarfPotential::new(
                ParameterProfile::Linear { alpha: 1.0 },
                ParameterProfile::Constant { value: 1.5 },
            )
            .unwrap(),
            k_y: 2.0,
            epsilon: Branch::Plus,
            n_max: 2,
            grid: GridSpec::default(),
            tolerances: Tolerances::default(),
            output: OutputSpec::default(),
        }
    }

    #[test]
    fn level_lists() {
        assert_eq!(parse_levels("0,1,2").unwrap(), vec![0, 1, 2]);
        assert_eq!(parse_levels("0..3").unwrap(), vec![0, 1, 2, 3]);
        assert_eq!(parse_levels("1..=2, 5").unwrap(), vec![1, 2, 5]);
        assert!(parse_levels("").unwrap().is_empty());
        assert!(parse_levels("3..1").is_err());
        assert!(parse_levels("a").is_err());
    }

    #[test]
    fn config_parsing_and_validation() {
        let text = r#"{
            "potential": {"lambda": {"kind": "linear", "alpha": 1}, "mu": {"kind": "constant", "value": 1.5}},
            "k_y": 2, "epsilon": -1, "n_max": 3,
            "grid": {"x_min": -4, "x_max": 4, "points": 9},
            "output": {"format": "json"}
        }"#;
        let cfg: RunConfig = serde_json::from_str(text).unwrap();
        assert_eq!(cfg.epsilon, Branch::Minus);
        assert_eq!(cfg.output.format, Format::Json);
        assert_eq!(cfg.tolerances, Tolerances::default());
        cfg.validate().unwrap();
        assert_eq!(cfg.grid.nodes().len(), 9);
        assert_eq!(cfg.grid.nodes()[8], 4.0);

        let mut bad = cfg.clone();
        bad.grid.points = 1;
        assert_eq!(bad.validate().unwrap_err().exit_code(), EXIT_CONFIG);
        let mut bad = cfg;
        bad.grid.x_min = 5.0;
        assert!(bad.validate().is_err());
        assert!(
            serde_json::from_str::<RunConfig>(r#"{"potential": {}, "k_y": 1, "epsilon": 0}"#)
                .is_err()
        );
    }

    #[test]
    fn csv_uses_seventeen_significant_digits() {
        assert_eq!(Cell::Float(0.1).csv(), "1.0000000000000001e-1");
        let back: f64 = Cell::Float(1.0 / 3.0).csv().parse().unwrap();
        assert_eq!(back, 1.0 / 3.0);
    }

    #[test]
    fn spectrum_rows() {
        let table = spectrum_table(&linear_config(), false).unwrap();
        assert_eq!(table.rows.len(), 3);
        assert_eq!(table.columns[1], "energy");
        let Cell::Float(e0) = table.rows[0][1] else {
            panic!()
        };
        assert!((e0 - 1.822_875_655_532_295).abs() < 1e-10);
    }

    #[test]
    fn solver_error_maps_to_exit_three() {
        let mut cfg = linear_config();
        cfg.k_y = 1.0;
        let err = spectrum_table(&cfg, false).unwrap_err();
        assert_eq!(err.exit_code(), EXIT_SOLVER);
        assert!(err.to_string().contains("wavenumber"));
    }

    #[test]
    fn empty_density_is_header_only() {
        let table = density_table(&linear_config(), &[]).unwrap();
        assert_eq!(table.to_csv(), "x\n");
    }

    #[test]
    fn shooting_window_stays_off_singularity() {
        let energies = [-0.30, -0.23, -0.19];
        let ([lo, hi], cfg) = shooting_window(&energies, &ShootingConfig::default());
        assert!(lo < -0.30 && hi > -0.19 && hi < 0.0);
        assert!(cfg.scan_points >= 500);
    }
}
