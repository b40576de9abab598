//! Batch sweeps behind the `qfc` binary.
//!
//! Settings come from an optional `key = value` file, overridden by command-line
//! flags. Each sweep produces a [`Table`] whose rows are computed independently
//! (in parallel when enabled) and emitted in grid order as CSV.

use std::collections::BTreeMap;
use std::fmt::Write as _;
use std::path::PathBuf;

use thiserror::Error;

use crate::error::QfcError;
use crate::parallel;
use crate::params::SystemParams;
use crate::states::{
    apply_loss_channel, coherent_dimension, density_matrix_coherent, fidelity, input_variances,
    squeeze_parameter_from_db, DensityMatrix, InputState, DEFAULT_DIM,
};
use crate::transfer::{semiclassical_solve, SingleModeTransfer};
use crate::{noise, C64};

pub const EXIT_OK: i32 = 0;
pub const EXIT_CONFIG: i32 = 2;
pub const EXIT_NUMERICAL: i32 = 3;

/// Basis tail allowed for the coherent columns of the fidelity sweep.
const COHERENT_TAIL: f64 = 1e-15;

#[derive(Debug, Error)]
pub enum CliError {
    #[error("invalid configuration: {0}")]
    Config(String),
    #[error("numerical failure at {label} = {value}: {source}")]
    Numerical {
        label: &'static str,
        value: f64,
        #[source]
        source: QfcError,
    },
    #[error("i/o error: {0}")]
    Io(#[from] std::io::Error),
}

impl CliError {
    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::Config(_) => EXIT_CONFIG,
            CliError::Numerical { .. } | CliError::Io(_) => EXIT_NUMERICAL,
        }
    }
}

fn config_err(msg: impl Into<String>) -> CliError {
    CliError::Config(msg.into())
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Quantity {
    Fig2,
    Fig3,
    Fig4a,
    Fig4b,
    Custom,
}

impl Quantity {
    fn grid_label(self) -> &'static str {
        match self {
            Quantity::Fig2 | Quantity::Custom => "alpha",
            _ => "ce",
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum StateKind {
    Fock,
    Coherent,
    Squeezed,
}

/// Fully resolved settings for one run.
#[derive(Debug, Clone, PartialEq)]
pub struct Settings {
    pub alpha_max: f64,
    pub grid_points: Option<usize>,
    pub state: StateKind,
    pub fock_n: usize,
    pub nbar: f64,
    pub squeeze_db: Option<f64>,
    pub convention_scale: f64,
    pub variant: char,
    pub out: Option<PathBuf>,
    pub params: SystemParams,
}

impl Default for Settings {
    fn default() -> Self {
        Self {
            alpha_max: 400.0,
            grid_points: None,
            state: StateKind::Fock,
            fock_n: 1,
            nbar: 1.0,
            squeeze_db: None,
            convention_scale: 1.0,
            variant: 'a',
            out: None,
            params: SystemParams::symmetric(0.0, 1.0),
        }
    }
}

const KEYS: &[&str] = &[
    "alpha-max",
    "grid-points",
    "state",
    "fock-n",
    "nbar",
    "squeeze-db",
    "convention-scale",
    "variant",
    "out",
    "omega-c",
    "omega-d",
    "gamma31",
    "gamma41",
    "gamma21",
];

fn normalize_key(key: &str) -> String {
    key.trim().replace('_', "-").to_ascii_lowercase()
}

/// Parses a `key = value` file. Blank lines and `#` comments are ignored.
pub fn parse_config(text: &str) -> Result<BTreeMap<String, String>, CliError> {
    let mut out = BTreeMap::new();
    for (lineno, raw) in text.lines().enumerate() {
        let line = raw.split('#').next().unwrap_or("").trim();
        if line.is_empty() {
            continue;
        }
        let (k, v) = line
            .split_once('=')
            .ok_or_else(|| config_err(format!("line {}: expected key = value", lineno + 1)))?;
        let key = normalize_key(k);
        if !KEYS.contains(&key.as_str()) {
            return Err(config_err(format!(
                "line {}: unknown key '{}'",
                lineno + 1,
                key
            )));
        }
        out.insert(key, v.trim().to_string());
    }
    Ok(out)
}

fn parse_f64(key: &str, v: &str) -> Result<f64, CliError> {
    let x: f64 = v
        .trim()
        .parse()
        .map_err(|_| config_err(format!("{key}: '{v}' is not a number")))?;
    if !x.is_finite() {
        return Err(config_err(format!("{key}: '{v}' is not finite")));
    }
    Ok(x)
}

/// Accepts `re` or `re,im`.
fn parse_complex(key: &str, v: &str) -> Result<C64, CliError> {
    match v.split_once(',') {
        Some((re, im)) => Ok(C64::new(parse_f64(key, re)?, parse_f64(key, im)?)),
        None => Ok(C64::from(parse_f64(key, v)?)),
    }
}

impl Settings {
    /// Applies file values, then flag overrides, on top of the defaults.
    pub fn resolve(
        file: &BTreeMap<String, String>,
        flags: &BTreeMap<String, String>,
    ) -> Result<Self, CliError> {
        let mut merged = file.clone();
        for (k, v) in flags {
            merged.insert(normalize_key(k), v.clone());
        }
        let mut s = Settings::default();
        for (key, v) in &merged {
            match key.as_str() {
                "alpha-max" => s.alpha_max = parse_f64(key, v)?,
                "grid-points" => {
                    s.grid_points =
                        Some(v.trim().parse().map_err(|_| {
                            config_err(format!("grid-points: '{v}' is not an integer"))
                        })?)
                }
                "state" => {
                    s.state = match v.trim() {
                        "fock" => StateKind::Fock,
                        "coherent" => StateKind::Coherent,
                        "squeezed" => StateKind::Squeezed,
                        other => return Err(config_err(format!("state: unknown '{other}'"))),
                    }
                }
                "fock-n" => {
                    s.fock_n = v
                        .trim()
                        .parse()
                        .map_err(|_| config_err(format!("fock-n: '{v}' is not an integer")))?
                }
                "nbar" => s.nbar = parse_f64(key, v)?,
                "squeeze-db" => s.squeeze_db = Some(parse_f64(key, v)?),
                "convention-scale" => s.convention_scale = parse_f64(key, v)?,
                "variant" => {
                    s.variant = match v.trim() {
                        "a" => 'a',
                        "b" => 'b',
                        other => return Err(config_err(format!("variant: unknown '{other}'"))),
                    }
                }
                "out" => s.out = Some(PathBuf::from(v.trim())),
                "omega-c" => s.params.omega_c = parse_complex(key, v)?,
                "omega-d" => s.params.omega_d = parse_complex(key, v)?,
                "gamma31" => s.params.gamma31 = parse_f64(key, v)?,
                "gamma41" => s.params.gamma41 = parse_f64(key, v)?,
                "gamma21" => s.params.gamma21 = parse_f64(key, v)?,
                other => return Err(config_err(format!("unknown key '{other}'"))),
            }
        }
        if s.convention_scale != 1.0 && s.convention_scale != 2.0 {
            return Err(config_err("convention-scale must be 1 or 2"));
        }
        if !(0.0..=1e6).contains(&s.alpha_max) {
            return Err(config_err("alpha-max must lie in [0, 1e6]"));
        }
        if s.nbar < 0.0 {
            return Err(config_err("nbar must be non-negative"));
        }
        if matches!(s.grid_points, Some(n) if n == 0) {
            return Err(config_err("grid-points must be positive"));
        }
        s.params
            .validate()
            .map_err(|e| config_err(format!("medium parameters: {e}")))?;
        Ok(s)
    }

    fn input_state(&self) -> InputState {
        match self.state {
            StateKind::Fock => InputState::Fock(self.fock_n),
            StateKind::Coherent => InputState::coherent_with_mean(self.nbar),
            StateKind::Squeezed => self.squeezed(),
        }
    }

    fn squeezed(&self) -> InputState {
        let r = self
            .squeeze_db
            .map(squeeze_parameter_from_db)
            .unwrap_or(std::f64::consts::LN_2);
        InputState::Squeezed { r, theta: 0.0 }
    }

    /// Sweep description for a subcommand.
    pub fn sweep(&self, quantity: Quantity) -> Result<SweepSpec, CliError> {
        let (max, default_points) = match quantity {
            Quantity::Fig2 | Quantity::Custom => (self.alpha_max, 401),
            _ => (1.0, 101),
        };
        let n = self.grid_points.unwrap_or(default_points);
        let grid = if n == 1 {
            vec![max]
        } else {
            (0..n).map(|i| max * i as f64 / (n - 1) as f64).collect()
        };
        let input_state = match quantity {
            Quantity::Fig4a => self.squeezed(),
            Quantity::Fig4b | Quantity::Fig3 => InputState::Fock(1),
            _ => self.input_state(),
        };
        let spec = SweepSpec {
            quantity,
            grid,
            input_state,
            convention_scale: self.convention_scale,
            output_path: self.out.clone(),
            params: self.params,
        };
        spec.validate()?;
        Ok(spec)
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct SweepSpec {
    pub quantity: Quantity,
    pub grid: Vec<f64>,
    pub input_state: InputState,
    pub convention_scale: f64,
    pub output_path: Option<PathBuf>,
    /// Medium parameters; α is taken from the grid.
    pub params: SystemParams,
}

impl SweepSpec {
    pub fn validate(&self) -> Result<(), CliError> {
        if self.grid.is_empty() {
            return Err(config_err("grid is empty"));
        }
        if self.grid.windows(2).any(|w| !(w[0] < w[1])) {
            return Err(config_err("grid must be strictly increasing"));
        }
        let range = match self.quantity {
            Quantity::Fig2 | Quantity::Custom => 0.0..=1e6,
            _ => 0.0..=1.0,
        };
        if let Some(x) = self.grid.iter().find(|x| !range.contains(*x)) {
            return Err(config_err(format!(
                "{} = {x} outside {:?}",
                self.quantity.grid_label(),
                range
            )));
        }
        Ok(())
    }

    pub fn run(&self) -> Result<Table, CliError> {
        self.validate()?;
        match self.quantity {
            Quantity::Fig2 => run_fig2(&self.grid),
            Quantity::Fig3 => run_fig3(&self.grid),
            Quantity::Fig4a | Quantity::Fig4b => {
                run_fig4(&self.grid, self.input_state, self.convention_scale)
            }
            Quantity::Custom => run_custom(
                &self.params,
                &self.grid,
                self.input_state,
                self.convention_scale,
            ),
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Table {
    pub header: Vec<&'static str>,
    pub rows: Vec<Vec<f64>>,
}

/// 15 significant digits in scientific notation.
pub fn format_number(x: f64) -> String {
    format!("{x:.14e}")
}

impl Table {
    pub fn to_csv(&self) -> String {
        let mut out = self.header.join(",");
        out.push('\n');
        for row in &self.rows {
            let cells: Vec<String> = row.iter().map(|&x| format_number(x)).collect();
            let _ = writeln!(out, "{}", cells.join(","));
        }
        out
    }

    pub fn column(&self, name: &str) -> Option<Vec<f64>> {
        let i = self.header.iter().position(|h| *h == name)?;
        Some(self.rows.iter().map(|r| r[i]).collect())
    }
}

fn numerical(label: &'static str, value: f64) -> impl Fn(QfcError) -> CliError {
    move |source| CliError::Numerical {
        label,
        value,
        source,
    }
}

fn check_unit_grid(grid: &[f64]) -> Result<(), CliError> {
    match grid.iter().find(|x| !(0.0..=1.0).contains(*x)) {
        Some(x) => Err(config_err(format!("ce = {x} outside [0, 1]"))),
        None => Ok(()),
    }
}

/// Transmittance and efficiency from the quantum transfer matrix and the
/// classical shooting solver, symmetric medium with Ω = Γ.
pub fn run_fig2(grid: &[f64]) -> Result<Table, CliError> {
    let rows = parallel::try_map(grid, |&alpha| -> Result<Vec<f64>, CliError> {
        let p = SystemParams::symmetric(alpha, 1.0);
        let err = numerical("alpha", alpha);
        let q = SingleModeTransfer::new(&p).map_err(&err)?;
        let s = semiclassical_solve(&p).map_err(&err)?;
        Ok(vec![
            alpha,
            q.transmittance(),
            q.conversion_efficiency(),
            s.transmittance,
            s.conversion_efficiency,
        ])
    })?;
    Ok(Table {
        header: vec![
            "alpha",
            "T_p_quantum",
            "CE_quantum",
            "T_p_semiclassical",
            "CE_semiclassical",
        ],
        rows,
    })
}

/// Fidelity against CE for coherent inputs with n̄ = 1 and 10 and a single photon.
pub fn run_fig3(grid: &[f64]) -> Result<Table, CliError> {
    check_unit_grid(grid)?;
    let fock_in = DensityMatrix::fock(1, DEFAULT_DIM).map_err(numerical("ce", 0.0))?;
    let rows = parallel::try_map(grid, |&ce| -> Result<Vec<f64>, CliError> {
        let err = numerical("ce", ce);
        let c0 = C64::from(ce.sqrt());
        let coherent = |nbar: f64| -> Result<f64, QfcError> {
            let beta = C64::from(nbar.sqrt());
            let dim = coherent_dimension(nbar, COHERENT_TAIL);
            let rho = density_matrix_coherent(beta, c0, dim)?;
            fidelity(&InputState::Coherent(beta), &rho)
        };
        let fock_out = apply_loss_channel(&fock_in, c0).map_err(&err)?;
        Ok(vec![
            ce,
            coherent(1.0).map_err(&err)?,
            coherent(10.0).map_err(&err)?,
            fidelity(&InputState::Fock(1), &fock_out).map_err(&err)?,
        ])
    })?;
    Ok(Table {
        header: vec!["ce", "fid_coherent_n1", "fid_coherent_n10", "fid_fock1"],
        rows,
    })
}

/// Output quadrature variances against CE for `input`, multiplied by `convention_scale`.
pub fn run_fig4(grid: &[f64], input: InputState, convention_scale: f64) -> Result<Table, CliError> {
    check_unit_grid(grid)?;
    let var_in = input_variances(&input);
    let rows = parallel::map(grid, |&ce| {
        let out = var_in.through_channel(ce).scaled(convention_scale);
        vec![ce, out.var_x, out.var_y]
    });
    Ok(Table {
        header: vec!["ce", "var_x", "var_y"],
        rows,
    })
}

/// Optical-depth sweep for arbitrary medium parameters and input state.
pub fn run_custom(
    params: &SystemParams,
    grid: &[f64],
    input: InputState,
    convention_scale: f64,
) -> Result<Table, CliError> {
    let var_in = input_variances(&input);
    let rows = parallel::try_map(grid, |&alpha| -> Result<Vec<f64>, CliError> {
        let err = numerical("alpha", alpha);
        let p = params.with_alpha(alpha);
        let t = SingleModeTransfer::new(&p).map_err(&err)?;
        let ce = t.conversion_efficiency().min(1.0);
        let eta2 = noise::eta2(&p).map_err(&err)?;
        let fid = match input {
            InputState::Fock(n) => {
                let dim = (n + 3).max(DEFAULT_DIM);
                let rho = DensityMatrix::fock(n, dim).map_err(&err)?;
                let out = apply_loss_channel(&rho, t.c0).map_err(&err)?;
                fidelity(&input, &out).map_err(&err)?
            }
            InputState::Coherent(beta) => {
                let dim = coherent_dimension(beta.norm_sqr(), COHERENT_TAIL);
                let out = density_matrix_coherent(beta, t.c0, dim).map_err(&err)?;
                fidelity(&input, &out).map_err(&err)?
            }
            InputState::Squeezed { .. } => f64::NAN,
        };
        let var = var_in.through_channel(ce).scaled(convention_scale);
        Ok(vec![
            alpha,
            t.transmittance(),
            t.conversion_efficiency(),
            eta2,
            fid,
            var.var_x,
            var.var_y,
        ])
    })?;
    Ok(Table {
        header: vec![
            "alpha",
            "transmittance",
            "conversion_efficiency",
            "eta2",
            "fidelity",
            "var_x",
            "var_y",
        ],
        rows,
    })
}
