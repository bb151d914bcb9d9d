//! Figure data as CSV/JSON tables.
//!
//! Every panel is one [`Table`]. Grid points are evaluated in parallel and
//! collected in grid order, so output is identical across runs and thread
//! counts. Rows where the rotating-wave approximation fails carry
//! `rwa_valid = 0`; they are kept in the file but must not feed any
//! downstream metric.

use std::fmt;
use std::fmt::Write as _;
use std::path::{Path, PathBuf};
use std::str::FromStr;

use nalgebra::Vector3;
use rayon::prelude::*;
use serde::Serialize;

use crate::bloch::{
    cfi_axis, crossover_squeezing, optimal_time_decoherent, propagate_with_sensitivity, qfi_mixed,
    sld_axis, DriftSystem,
};
use crate::coherent::{benchmarks, sensitivity_coherent};
use crate::config::FIELDS;
use crate::error::{Error, Result};
use crate::numerics::{linspace, logspace};
use crate::params::{DerivedParams, SensorConfig};
use crate::rwa::{classify_grid, rwa_ratios, DEFAULT_EPSILON};

/// Cat-qubit benchmark photon number used for the reference line.
pub const MCQ_N: f64 = 10.0;

/// Interrogation window for the decoherent optimum, in units of π/ω_b.
const T_MAX_HALF_PERIODS: f64 = 4.0;

/// Span of the F_Q(t) panel, in units of π/ω_b.
const FQ_HALF_PERIODS: f64 = 6.0;
const FQ_POINTS: usize = 601;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize)]
pub enum Figure {
    Fig1,
    Fig2,
    FigA1,
    FigC1,
}

impl Figure {
    pub const ALL: [Figure; 4] = [Figure::Fig1, Figure::Fig2, Figure::FigA1, Figure::FigC1];
}

impl fmt::Display for Figure {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Figure::Fig1 => "fig1",
            Figure::Fig2 => "fig2",
            Figure::FigA1 => "figA1",
            Figure::FigC1 => "figC1",
        })
    }
}

impl FromStr for Figure {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        match s.to_ascii_lowercase().as_str() {
            "fig1" => Ok(Figure::Fig1),
            "fig2" => Ok(Figure::Fig2),
            "figa1" => Ok(Figure::FigA1),
            "figc1" => Ok(Figure::FigC1),
            _ => Err(Error::config("figure", format!("unknown figure `{s}`; expected fig1, fig2, figA1 or figC1"))),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum Scale {
    Linear,
    Log,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Axis {
    pub name: String,
    pub min: f64,
    pub max: f64,
    pub points: usize,
    pub scale: Scale,
}

impl Axis {
    pub fn new(name: &str, min: f64, max: f64, points: usize, scale: Scale) -> Result<Self> {
        if !FIELDS.contains(&name) {
            return Err(Error::config(name, "axis name must be a config field"));
        }
        if points < 2 {
            return Err(Error::config(name, "axis needs at least 2 points"));
        }
        if !(min.is_finite() && max.is_finite() && min < max) {
            return Err(Error::config(name, format!("need finite min < max, got [{min}, {max}]")));
        }
        if scale == Scale::Log && !(min > 0.0) {
            return Err(Error::config(name, "log axis needs min > 0"));
        }
        Ok(Axis { name: name.to_string(), min, max, points, scale })
    }

    /// Parse `name=min:max:points[:log]`.
    pub fn parse(spec: &str) -> Result<Self> {
        let (name, rest) = spec
            .split_once('=')
            .ok_or_else(|| Error::config(spec, "axis must look like name=min:max:points[:log]"))?;
        let name = name.trim();
        let parts: Vec<&str> = rest.split(':').map(str::trim).collect();
        let num = |s: &str| {
            s.parse::<f64>()
                .map_err(|_| Error::config(name, format!("cannot parse `{s}` as a number")))
        };
        let (min, max, points, scale) = match parts.as_slice() {
            [a, b, n] => (num(a)?, num(b)?, *n, Scale::Linear),
            [a, b, n, "log"] => (num(a)?, num(b)?, *n, Scale::Log),
            [a, b, n, "lin"] => (num(a)?, num(b)?, *n, Scale::Linear),
            _ => return Err(Error::config(name, "axis must look like name=min:max:points[:log]")),
        };
        let points = points
            .parse::<usize>()
            .map_err(|_| Error::config(name, format!("cannot parse `{points}` as a point count")))?;
        Axis::new(name, min, max, points, scale)
    }

    pub fn values(&self) -> Vec<f64> {
        match self.scale {
            Scale::Linear => linspace(self.min, self.max, self.points),
            Scale::Log => logspace(self.min, self.max, self.points),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SweepSpec {
    pub figure: Figure,
    pub base: SensorConfig,
    pub axes: Vec<Axis>,
    pub epsilon: f64,
    /// γ₀/ω values for the decoherent panels.
    pub gamma0_set: Vec<f64>,
    /// Squeezing values for the d_frac panels of Fig. 1.
    pub r_set: Vec<f64>,
    pub out_dir: PathBuf,
}

impl SweepSpec {
    /// Default grids for `figure` around the operating point `base`.
    pub fn new(figure: Figure, base: SensorConfig) -> Self {
        let ax = |n: &str, lo, hi, p, s| Axis::new(n, lo, hi, p, s).expect("default axis");
        let axes = match figure {
            Figure::Fig1 => vec![
                ax("r", 0.0, 1.4, 141, Scale::Linear),
                ax("d_frac", 0.0, 0.999, 334, Scale::Linear),
            ],
            Figure::Fig2 => vec![ax("r", 0.0, 2.0, 81, Scale::Linear)],
            Figure::FigA1 => vec![
                ax("r", 0.0, 2.0, 101, Scale::Linear),
                ax("d_frac", 0.0, 0.99, 100, Scale::Linear),
            ],
            Figure::FigC1 => vec![
                ax("gamma0_ratio", 1e-5, 1e-2, 13, Scale::Log),
                ax("r", 0.0, 1.4, 15, Scale::Linear),
            ],
        };
        SweepSpec {
            figure,
            base,
            axes,
            epsilon: DEFAULT_EPSILON,
            gamma0_set: vec![1e-4, 1e-3, 5e-3],
            r_set: vec![0.2, 0.4, 0.6, 0.8, 1.0, 1.2, 1.4],
            out_dir: PathBuf::from("."),
        }
    }

    /// Replace the default axis of the same name.
    pub fn set_axis(&mut self, axis: Axis) -> Result<()> {
        match self.axes.iter_mut().find(|a| a.name == axis.name) {
            Some(slot) => {
                *slot = axis;
                Ok(())
            }
            None => Err(Error::config(
                axis.name.clone(),
                format!("{} has no `{}` axis", self.figure, axis.name),
            )),
        }
    }

    fn axis(&self, name: &str) -> Result<Vec<f64>> {
        self.axes
            .iter()
            .find(|a| a.name == name)
            .map(Axis::values)
            .ok_or_else(|| Error::config(name, format!("{} needs a `{name}` axis", self.figure)))
    }

    fn check(&self) -> Result<()> {
        self.base.validate()?;
        if !(self.epsilon > 0.0 && self.epsilon.is_finite()) {
            return Err(Error::config("epsilon", "must be positive"));
        }
        for a in &self.axes {
            let bad = match a.name.as_str() {
                "r" | "gamma0_ratio" => a.min < 0.0,
                "d_frac" => a.min < 0.0 || a.max >= 1.0,
                _ => false,
            };
            if bad {
                return Err(Error::config(a.name.clone(), "axis range outside the parameter domain"));
            }
        }
        if self.gamma0_set.iter().any(|g| !(*g > 0.0)) {
            return Err(Error::config("gamma0_set", "values must be positive"));
        }
        if self.r_set.iter().any(|r| !(*r > 0.0)) {
            return Err(Error::config("r_set", "values must be positive"));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Column {
    pub name: String,
    pub unit: String,
    /// 0/1 flag rather than a measured value.
    pub flag: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Table {
    pub name: String,
    pub meta: Vec<(String, String)>,
    pub columns: Vec<Column>,
    pub rows: Vec<Vec<f64>>,
}

impl Table {
    /// Empty table; a column named `rwa_valid` is written as a 0/1 flag.
    pub fn new(name: &str, meta: Vec<(String, String)>, columns: &[(&str, &str)]) -> Self {
        Table {
            name: name.to_string(),
            meta,
            columns: columns
                .iter()
                .map(|(n, u)| Column { name: n.to_string(), unit: u.to_string(), flag: *n == "rwa_valid" })
                .collect(),
            rows: Vec::new(),
        }
    }

    pub fn column(&self, name: &str) -> Option<Vec<f64>> {
        let j = self.columns.iter().position(|c| c.name == name)?;
        Some(self.rows.iter().map(|row| row[j]).collect())
    }

    /// Rows with `rwa_valid = 1` (all rows when the table has no flag).
    pub fn valid_rows(&self) -> Vec<&Vec<f64>> {
        match self.columns.iter().position(|c| c.name == "rwa_valid") {
            Some(j) => self.rows.iter().filter(|row| row[j] == 1.0).collect(),
            None => self.rows.iter().collect(),
        }
    }

    pub fn to_csv(&self) -> String {
        let mut out = String::new();
        writeln!(out, "# table: {}", self.name).unwrap();
        for (k, v) in &self.meta {
            writeln!(out, "# {k}: {v}").unwrap();
        }
        let units: Vec<&str> = self.columns.iter().map(|c| c.unit.as_str()).collect();
        writeln!(out, "# units: {}", units.join(",")).unwrap();
        let names: Vec<&str> = self.columns.iter().map(|c| c.name.as_str()).collect();
        writeln!(out, "{}", names.join(",")).unwrap();
        for row in &self.rows {
            let cells: Vec<String> = row
                .iter()
                .zip(&self.columns)
                .map(|(x, c)| if c.flag { format!("{}", *x as u8) } else { format!("{x:.12e}") })
                .collect();
            writeln!(out, "{}", cells.join(",")).unwrap();
        }
        out
    }
}

fn num(x: f64) -> String {
    format!("{x:.12e}")
}

fn flag(b: bool) -> f64 {
    if b {
        1.0
    } else {
        0.0
    }
}

fn base_meta(spec: &SweepSpec) -> Vec<(String, String)> {
    let b = &spec.base;
    vec![
        ("figure".into(), spec.figure.to_string()),
        ("m".into(), num(b.m)),
        ("omega".into(), num(b.omega)),
        ("delta_ratio".into(), num(b.delta_ratio)),
        ("theta".into(), num(b.theta)),
        ("force_offset".into(), num(b.force_offset)),
        ("epsilon".into(), num(spec.epsilon)),
    ]
}

/// Effective parameters at (r, d_frac, γ₀/ω) on top of `base`.
///
/// At r = 0 the Duffing renormalization vanishes and D_crit is unbounded, so
/// that node is evaluated with D = 0 whatever `d_frac` says.
pub fn derive_point(base: &SensorConfig, r: f64, d_frac: f64, gamma0_ratio: f64) -> Result<DerivedParams> {
    if r == 0.0 {
        return DerivedParams::from_raw(
            base.m,
            base.omega,
            base.delta_ratio * base.omega,
            0.0,
            0.0,
            gamma0_ratio * base.omega,
            base.force_offset,
        );
    }
    SensorConfig { r, pump_ratio: None, d_frac, gamma0_ratio, ..base.clone() }.derive()
}

fn rwa_valid(p: &DerivedParams, epsilon: f64) -> Result<bool> {
    Ok(rwa_ratios(p.d, p.r, p.omega_b, epsilon)?.valid)
}

pub fn fig1_data(spec: &SweepSpec) -> Result<Vec<Table>> {
    spec.check()?;
    let b = &spec.base;
    let bench = benchmarks(b.m, b.omega, MCQ_N)?;
    let rs = spec.axis("r")?;
    let fs = spec.axis("d_frac")?;

    let mut meta = base_meta(spec);
    meta.push(("d_frac".into(), num(b.d_frac)));
    meta.push(("mcq_n".into(), num(MCQ_N)));
    let mut a = Table::new(
        "fig1a",
        meta,
        &[
            ("r", "1"),
            ("dg_sqrt_t", "m s^-2 s^1/2"),
            ("mq", "m s^-2 s^1/2"),
            ("mcq", "m s^-2 s^1/2"),
            ("omega_b_over_omega", "1"),
            ("max_ratio", "1"),
            ("rwa_valid", "1"),
        ],
    );
    a.rows = rs
        .par_iter()
        .map(|&r| {
            let p = derive_point(b, r, b.d_frac, b.gamma0_ratio)?;
            let s = sensitivity_coherent(p.m, p.omega, p.r, p.omega_b)?;
            let rep = rwa_ratios(p.d, p.r, p.omega_b, spec.epsilon)?;
            Ok(vec![r, s.dg_sqrt_t, bench.mq, bench.mcq, p.omega_b_over_omega, rep.max_ratio, flag(rep.valid)])
        })
        .collect::<Result<_>>()?;

    let grid: Vec<(f64, f64)> = spec.r_set.iter().flat_map(|&r| fs.iter().map(move |&f| (r, f))).collect();
    let points = grid
        .par_iter()
        .map(|&(r, f)| {
            let p = derive_point(b, r, f, b.gamma0_ratio)?;
            let s = sensitivity_coherent(p.m, p.omega, p.r, p.omega_b)?;
            Ok((r, f, s.dg_sqrt_t, p.omega_b_over_omega, p.u_b / p.omega, rwa_valid(&p, spec.epsilon)?))
        })
        .collect::<Result<Vec<_>>>()?;
    let panel = |name: &str, col: (&str, &str), pick: fn(&(f64, f64, f64, f64, f64, bool)) -> f64| {
        let mut t = Table::new(name, base_meta(spec), &[("r", "1"), ("d_frac", "1"), col, ("rwa_valid", "1")]);
        t.rows = points.iter().map(|x| vec![x.0, x.1, pick(x), flag(x.5)]).collect();
        t
    };
    let tb = panel("fig1b", ("dg_sqrt_t", "m s^-2 s^1/2"), |x| x.2);
    let tc = panel("fig1c", ("omega_b_over_omega", "1"), |x| x.3);
    let td = panel("fig1d", ("u_b_over_omega", "1"), |x| x.4);
    Ok(vec![a, tb, tc, td])
}

pub fn fig2_data(spec: &SweepSpec) -> Result<Vec<Table>> {
    spec.check()?;
    let b = &spec.base;
    let rs = spec.axis("r")?;
    let r_max = rs.iter().copied().fold(0.0, f64::max);
    let grid: Vec<(f64, f64)> = spec
        .gamma0_set
        .iter()
        .flat_map(|&g| rs.iter().map(move |&r| (g, r)))
        .collect();

    let mut meta = base_meta(spec);
    meta.push(("d_frac".into(), num(b.d_frac)));
    for &g in &spec.gamma0_set {
        let c = crossover_squeezing(g, b.delta_ratio, b.d_frac, r_max.max(f64::MIN_POSITIVE))?;
        meta.push((format!("r_star[gamma0_ratio={g:e}]"), c.r_star.map_or("none".into(), num)));
    }
    let mut a = Table::new(
        "fig2a",
        meta,
        &[("gamma0_ratio", "1"), ("r", "1"), ("xi", "1"), ("rwa_valid", "1")],
    );
    a.rows = grid
        .par_iter()
        .map(|&(g, r)| {
            let p = derive_point(b, r, b.d_frac, g)?;
            Ok(vec![g, r, p.xi, flag(rwa_valid(&p, spec.epsilon)?)])
        })
        .collect::<Result<_>>()?;

    let p0 = derive_point(b, b.squeezing()?, b.d_frac, 0.0)?;
    let times = linspace(0.0, FQ_HALF_PERIODS * std::f64::consts::PI / p0.omega_b, FQ_POINTS);
    let mut meta = base_meta(spec);
    meta.push(("r".into(), num(p0.r)));
    meta.push(("d_frac".into(), num(b.d_frac)));
    meta.push(("omega_b".into(), num(p0.omega_b)));
    meta.push(("rwa_valid".into(), (rwa_valid(&p0, spec.epsilon)? as u8).to_string()));
    let mut tb = Table::new(
        "fig2b",
        meta,
        &[("gamma0_ratio", "1"), ("t", "s"), ("omega_b_t", "1"), ("f_q", "s^4 m^-2")],
    );
    let gammas: Vec<f64> = std::iter::once(0.0).chain(spec.gamma0_set.iter().copied()).collect();
    let tgrid: Vec<(f64, f64)> = gammas.iter().flat_map(|&g| times.iter().map(move |&t| (g, t))).collect();
    tb.rows = tgrid
        .par_iter()
        .map(|&(g, t)| {
            let d = DriftSystem::from_params(&derive_point(b, p0.r, b.d_frac, g)?)?;
            let f = qfi_mixed(&propagate_with_sensitivity(&d, t)?, p0.kappa_g)?;
            Ok(vec![g, t, p0.omega_b * t, f])
        })
        .collect::<Result<_>>()?;

    let opt = grid
        .par_iter()
        .map(|&(g, r)| {
            let p = derive_point(b, r, b.d_frac, g)?;
            let d = DriftSystem::from_params(&p)?;
            let t_ref = std::f64::consts::PI / p.omega_b;
            let o = optimal_time_decoherent(&d, p.kappa_g, T_MAX_HALF_PERIODS * t_ref)?;
            let coh = sensitivity_coherent(p.m, p.omega, p.r, p.omega_b)?;
            Ok((g, r, o.dg_sqrt_t, coh.dg_sqrt_t, o.t_opt, t_ref, rwa_valid(&p, spec.epsilon)?))
        })
        .collect::<Result<Vec<_>>>()?;
    let mut meta = base_meta(spec);
    meta.push(("d_frac".into(), num(b.d_frac)));
    meta.push(("t_max_over_t_ref".into(), num(T_MAX_HALF_PERIODS)));
    let mut tc = Table::new(
        "fig2c",
        meta.clone(),
        &[
            ("gamma0_ratio", "1"),
            ("r", "1"),
            ("dg_sqrt_t_dec", "m s^-2 s^1/2"),
            ("dg_sqrt_t_coh", "m s^-2 s^1/2"),
            ("rwa_valid", "1"),
        ],
    );
    tc.rows = opt.iter().map(|x| vec![x.0, x.1, x.2, x.3, flag(x.6)]).collect();
    let mut td = Table::new(
        "fig2d",
        meta,
        &[("gamma0_ratio", "1"), ("r", "1"), ("t_opt_dec", "s"), ("t_ref", "s"), ("rwa_valid", "1")],
    );
    td.rows = opt.iter().map(|x| vec![x.0, x.1, x.4, x.5, flag(x.6)]).collect();
    Ok(vec![a, tb, tc, td])
}

pub fn fig_a1_data(spec: &SweepSpec) -> Result<Vec<Table>> {
    spec.check()?;
    let rs = spec.axis("r")?;
    let fs = spec.axis("d_frac")?;
    let map = classify_grid(&rs, &fs, spec.epsilon, spec.base.delta_ratio)?;
    let mut t = Table::new(
        "figA1",
        base_meta(spec),
        &[
            ("r", "1"),
            ("d_frac", "1"),
            ("max_ratio", "1"),
            ("rwa_valid", "1"),
            ("omega_b_over_omega", "1"),
            ("d_rwa_frac", "1"),
        ],
    );
    t.rows = map
        .cells
        .iter()
        .enumerate()
        .map(|(i, c)| {
            let (_, frac, _) = map.boundary[i / fs.len()];
            vec![c.r, c.d_frac, c.max_ratio, flag(c.valid), c.omega_b_over_omega, frac]
        })
        .collect();
    Ok(vec![t])
}

/// Optimal readout angles at the decoherent optimum t_opt^dec.
pub fn fig_c1_data(spec: &SweepSpec) -> Result<Vec<Table>> {
    spec.check()?;
    let b = &spec.base;
    let gs = spec.axis("gamma0_ratio")?;
    let rs = spec.axis("r")?;
    let grid: Vec<(f64, f64)> = gs.iter().flat_map(|&g| rs.iter().map(move |&r| (g, r))).collect();
    let mut meta = base_meta(spec);
    meta.push(("d_frac".into(), num(b.d_frac)));
    meta.push(("evaluated_at".into(), "t_opt_dec".into()));
    let mut t = Table::new(
        "figC1",
        meta,
        &[
            ("gamma0_ratio", "1"),
            ("r", "1"),
            ("t_opt_dec", "s"),
            ("theta_opt", "rad"),
            ("phi_opt", "rad"),
            ("n_x", "1"),
            ("n_y", "1"),
            ("n_z", "1"),
            ("cfi_over_qfi", "1"),
            ("rwa_valid", "1"),
        ],
    );
    t.rows = grid
        .par_iter()
        .map(|&(g, r)| {
            let p = derive_point(b, r, b.d_frac, g)?;
            let d = DriftSystem::from_params(&p)?;
            let o = optimal_time_decoherent(&d, p.kappa_g, T_MAX_HALF_PERIODS * std::f64::consts::PI / p.omega_b)?;
            let s = propagate_with_sensitivity(&d, o.t_opt)?;
            let ax = sld_axis(&s)?;
            let f_c = cfi_axis(&s, &Vector3::from(ax.n), p.kappa_g)?;
            let f_q = qfi_mixed(&s, p.kappa_g)?;
            Ok(vec![
                g,
                r,
                o.t_opt,
                ax.theta_opt,
                ax.phi_opt,
                ax.n[0],
                ax.n[1],
                ax.n[2],
                f_c / f_q,
                flag(rwa_valid(&p, spec.epsilon)?),
            ])
        })
        .collect::<Result<_>>()?;
    Ok(vec![t])
}

pub fn run(spec: &SweepSpec) -> Result<Vec<Table>> {
    match spec.figure {
        Figure::Fig1 => fig1_data(spec),
        Figure::Fig2 => fig2_data(spec),
        Figure::FigA1 => fig_a1_data(spec),
        Figure::FigC1 => fig_c1_data(spec),
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum Format {
    Csv,
    Json,
}

impl FromStr for Format {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        match s {
            "csv" => Ok(Format::Csv),
            "json" => Ok(Format::Json),
            _ => Err(Error::config("format", format!("expected csv or json, got `{s}`"))),
        }
    }
}

/// Write one file per table into `dir`; returns the paths in table order.
pub fn write_tables(tables: &[Table], dir: &Path, format: Format) -> Result<Vec<PathBuf>> {
    std::fs::create_dir_all(dir)?;
    tables
        .iter()
        .map(|t| {
            let (path, body) = match format {
                Format::Csv => (dir.join(format!("{}.csv", t.name)), t.to_csv()),
                Format::Json => (dir.join(format!("{}.json", t.name)), serde_json::to_string_pretty(t)? + "\n"),
            };
            std::fs::write(&path, body)?;
            Ok(path)
        })
        .collect()
}
