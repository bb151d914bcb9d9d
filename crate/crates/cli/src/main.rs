//! `msfq`: derived parameters, time series, RWA maps, figure sweeps and
//! validation runs for the squeezed-Fock mechanical qubit gravimeter.

use std::io::Write;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Parser, Subcommand, ValueEnum};
use msfq_core::bloch::{self, optimal_time_decoherent, DriftSystem};
use msfq_core::coherent::{self, benchmarks, sensitivity_coherent, RabiParams};
use msfq_core::numerics::linspace;
use msfq_core::oracle::run_suite;
use msfq_core::rwa::{rwa_ratios, DEFAULT_EPSILON};
use msfq_core::sweep::{self, Axis, Figure, SweepSpec, Table, MCQ_N};
use msfq_core::{config, validate, DerivedParams, Error, SensorConfig};

const EXIT_CONFIG: u8 = 2;
const EXIT_NUMERICAL: u8 = 3;
const EXIT_FAIL: u8 = 4;

/// Squeezed-Fock mechanical qubit gravimeter toolkit.
///
/// Exit codes: 0 ok, 2 config error, 3 numerical error, 4 oracle or
/// validation FAIL.
#[derive(Parser, Debug)]
#[command(name = "msfq", version)]
struct Cli {
    /// Flat TOML file with SensorConfig fields.
    #[arg(long, global = true, value_name = "PATH")]
    config: Option<PathBuf>,

    /// Override one config field, e.g. `--set r=1.2`. Repeatable; applied in order.
    #[arg(long = "set", global = true, value_name = "KEY=VALUE")]
    overrides: Vec<String>,

    /// Output file (directory for `sweep`). Defaults to stdout (`.` for `sweep`).
    #[arg(long, global = true, value_name = "PATH")]
    out: Option<PathBuf>,

    /// Output format. Tables default to csv, reports to json.
    #[arg(long, global = true, value_enum)]
    format: Option<OutFormat>,

    /// Cap on worker threads.
    #[arg(long, global = true, value_name = "N")]
    threads: Option<usize>,

    /// RWA validity threshold.
    #[arg(long, global = true, value_name = "E", default_value_t = DEFAULT_EPSILON)]
    epsilon: f64,

    #[command(subcommand)]
    command: Command,
}

#[derive(Copy, Clone, Debug, PartialEq, Eq, ValueEnum)]
enum OutFormat {
    Csv,
    Json,
}

impl From<OutFormat> for sweep::Format {
    fn from(f: OutFormat) -> Self {
        match f {
            OutFormat::Csv => sweep::Format::Csv,
            OutFormat::Json => sweep::Format::Json,
        }
    }
}

#[derive(Subcommand, Debug)]
enum Command {
    /// Print every derived effective-model quantity.
    Derive,
    /// Coherent Rabi time series: P₁, QFI and population CFI.
    Coherent {
        /// Samples over the window.
        #[arg(long, default_value_t = 401)]
        points: usize,
        /// Window length in qubit periods 2π/ω_b.
        #[arg(long, default_value_t = 2.0)]
        periods: f64,
    },
    /// Damped Bloch time series with QFI, CFI and optimal readout angles.
    Bloch {
        #[arg(long, default_value_t = 401)]
        points: usize,
        #[arg(long, default_value_t = 2.0)]
        periods: f64,
    },
    /// RWA validity over an (r, d_frac) grid with the D_RWA boundary.
    RwaMap {
        /// Grid override `name=min:max:points[:log]`; repeatable.
        #[arg(long = "axis", value_name = "SPEC")]
        axes: Vec<String>,
    },
    /// Regenerate figure tables, one file per panel.
    Sweep {
        /// fig1, fig2, figA1, figC1 or all.
        #[arg(long, default_value = "all")]
        figure: String,
        /// Grid override `name=min:max:points[:log]`; repeatable.
        #[arg(long = "axis", value_name = "SPEC")]
        axes: Vec<String>,
    },
    /// Brute-force Fock-space oracles; PASS/FAIL JSON.
    Oracle {
        /// Fock truncation for the spectrum check (default depends on r).
        #[arg(long)]
        dim: Option<usize>,
    },
    /// Deterministic invariant battery over all modules.
    Validate,
}

fn emit(out: Option<&Path>, body: &str) -> msfq_core::Result<()> {
    match out {
        Some(p) => {
            if let Some(dir) = p.parent().filter(|d| !d.as_os_str().is_empty()) {
                std::fs::create_dir_all(dir)?;
            }
            std::fs::write(p, body)?;
        }
        None => std::io::stdout().write_all(body.as_bytes())?,
    }
    Ok(())
}

impl Cli {
    fn table_format(&self) -> OutFormat {
        self.format.unwrap_or(OutFormat::Csv)
    }
}

fn emit_table(cli: &Cli, t: &Table) -> msfq_core::Result<()> {
    let body = match cli.table_format() {
        OutFormat::Csv => t.to_csv(),
        OutFormat::Json => serde_json::to_string_pretty(t)? + "\n",
    };
    emit(cli.out.as_deref(), &body)
}

fn emit_json<T: serde::Serialize>(cli: &Cli, v: &T) -> msfq_core::Result<()> {
    emit(cli.out.as_deref(), &(serde_json::to_string_pretty(v)? + "\n"))
}

fn num(x: f64) -> String {
    format!("{x:.12e}")
}

fn summary_meta(p: &DerivedParams, cfg: &SensorConfig, eps: f64) -> msfq_core::Result<Vec<(String, String)>> {
    let rep = rwa_ratios(p.d, p.r, p.omega_b, eps)?;
    Ok(vec![
        ("m".into(), num(p.m)),
        ("omega".into(), num(p.omega)),
        ("delta_ratio".into(), num(cfg.delta_ratio)),
        ("r".into(), num(p.r)),
        ("d_frac".into(), num(cfg.d_frac)),
        ("gamma0_ratio".into(), num(cfg.gamma0_ratio)),
        ("omega_b".into(), num(p.omega_b)),
        ("omega_g".into(), num(p.omega_g)),
        ("kappa_g".into(), num(p.kappa_g)),
        ("epsilon".into(), num(eps)),
        ("max_ratio".into(), num(rep.max_ratio)),
        ("rwa_valid".into(), (rep.valid as u8).to_string()),
    ])
}

fn window(points: usize, periods: f64, omega_b: f64) -> Result<Vec<f64>, Error> {
    if points < 2 || !(periods > 0.0 && periods.is_finite()) {
        return Err(Error::Config {
            field: "--points/--periods".into(),
            reason: "need at least 2 points over a positive window".into(),
        });
    }
    Ok(linspace(0.0, periods * std::f64::consts::TAU / omega_b, points))
}

fn apply_axes(spec: &mut SweepSpec, axes: &[String]) -> msfq_core::Result<()> {
    for a in axes {
        spec.set_axis(Axis::parse(a)?)?;
    }
    Ok(())
}

fn run(cli: &Cli) -> msfq_core::Result<bool> {
    if !(cli.epsilon > 0.0 && cli.epsilon.is_finite()) {
        return Err(Error::Config { field: "--epsilon".into(), reason: "must be positive".into() });
    }
    if let Some(n) = cli.threads {
        if n == 0 {
            return Err(Error::Config { field: "--threads".into(), reason: "must be at least 1".into() });
        }
        rayon::ThreadPoolBuilder::new()
            .num_threads(n)
            .build_global()
            .map_err(|e| Error::Config { field: "--threads".into(), reason: e.to_string() })?;
    }
    let cfg = config::load(cli.config.as_deref(), &cli.overrides)?;

    match &cli.command {
        Command::Derive => {
            let p = cfg.derive()?;
            match cli.format.unwrap_or(OutFormat::Json) {
                OutFormat::Json => emit_json(cli, &p)?,
                OutFormat::Csv => {
                    let v = serde_json::to_value(&p)?;
                    let mut body = String::from("key,value\n");
                    for (k, x) in v.as_object().expect("struct serializes to an object") {
                        let cell = x.as_f64().map_or_else(|| "inf".to_string(), num);
                        body.push_str(&format!("{k},{cell}\n"));
                    }
                    emit(cli.out.as_deref(), &body)?;
                }
            }
        }
        Command::Coherent { points, periods } => {
            let p = cfg.derive()?;
            let times = window(*points, *periods, p.omega_b)?;
            let rabi = RabiParams::new(p.omega_b, p.omega_g)?;
            let sens = sensitivity_coherent(p.m, p.omega, p.r, p.omega_b)?;
            let bench = benchmarks(p.m, p.omega, MCQ_N)?;
            let mut meta = summary_meta(&p, &cfg, cli.epsilon)?;
            meta.push(("t_opt".into(), num(sens.t_opt)));
            meta.push(("dg_sqrt_t".into(), num(sens.dg_sqrt_t)));
            meta.push(("mq".into(), num(bench.mq)));
            meta.push(("mcq".into(), num(bench.mcq)));
            let mut t = Table::new(
                "coherent",
                meta,
                &[("t", "s"), ("omega_b_t", "1"), ("p1", "1"), ("f_q", "s^4 m^-2"), ("f_c", "s^4 m^-2")],
            );
            t.rows = coherent::time_series(&rabi, p.kappa_g, &times)
                .into_iter()
                .map(|s| vec![s.t, p.omega_b * s.t, s.p1, s.f_q, s.f_c])
                .collect();
            emit_table(cli, &t)?;
        }
        Command::Bloch { points, periods } => {
            let p = cfg.derive()?;
            let times = window(*points, *periods, p.omega_b)?;
            let d = DriftSystem::from_params(&p)?;
            let opt = optimal_time_decoherent(&d, p.kappa_g, 4.0 * std::f64::consts::PI / p.omega_b)?;
            let mut meta = summary_meta(&p, &cfg, cli.epsilon)?;
            meta.push(("gamma_x".into(), num(p.gamma_x)));
            meta.push(("gamma_y".into(), num(p.gamma_y)));
            meta.push(("gamma_z".into(), num(p.gamma_z)));
            meta.push(("xi".into(), num(p.xi)));
            meta.push(("t_opt_dec".into(), num(opt.t_opt)));
            meta.push(("dg_sqrt_t_dec".into(), num(opt.dg_sqrt_t)));
            let mut t = Table::new(
                "bloch",
                meta,
                &[
                    ("t", "s"),
                    ("omega_b_t", "1"),
                    ("v_x", "1"),
                    ("v_y", "1"),
                    ("v_z", "1"),
                    ("u_x", "s"),
                    ("u_y", "s"),
                    ("u_z", "s"),
                    ("f_q", "s^4 m^-2"),
                    ("f_c_z", "s^4 m^-2"),
                    ("f_c_opt", "s^4 m^-2"),
                    ("theta_opt", "rad"),
                    ("phi_opt", "rad"),
                ],
            );
            t.rows = bloch::time_series(&d, p.kappa_g, &times)?
                .into_iter()
                .map(|s| {
                    let mut row = vec![s.t, p.omega_b * s.t];
                    row.extend(s.v);
                    row.extend(s.u);
                    row.extend([s.f_q, s.f_c_z, s.f_c_opt, s.theta_opt, s.phi_opt]);
                    row
                })
                .collect();
            emit_table(cli, &t)?;
        }
        Command::RwaMap { axes } => {
            let mut spec = SweepSpec::new(Figure::FigA1, cfg);
            spec.epsilon = cli.epsilon;
            apply_axes(&mut spec, axes)?;
            let tables = sweep::run(&spec)?;
            emit_table(cli, &tables[0])?;
        }
        Command::Sweep { figure, axes } => {
            let all = figure.eq_ignore_ascii_case("all");
            let figures: Vec<Figure> = if all {
                Figure::ALL.to_vec()
            } else {
                vec![figure.parse()?]
            };
            let dir = cli.out.clone().unwrap_or_else(|| PathBuf::from("."));
            for f in figures {
                let mut spec = SweepSpec::new(f, cfg.clone());
                spec.epsilon = cli.epsilon;
                spec.out_dir = dir.clone();
                for a in axes {
                    let axis = Axis::parse(a)?;
                    // with `all`, an axis only applies to the figures that have it
                    if !all || spec.axes.iter().any(|x| x.name == axis.name) {
                        spec.set_axis(axis)?;
                    }
                }
                let tables = sweep::run(&spec)?;
                for path in sweep::write_tables(&tables, &spec.out_dir, cli.table_format().into())? {
                    println!("{}", path.display());
                }
            }
        }
        Command::Oracle { dim } => {
            let suite = run_suite(&cfg, *dim)?;
            for c in &suite.checks {
                eprintln!(
                    "{} {}: {:.3e} (tolerance {:.3e})",
                    if c.pass { "PASS" } else { "FAIL" },
                    c.name,
                    c.value,
                    c.tolerance
                );
            }
            emit_json(cli, &suite)?;
            return Ok(suite.pass);
        }
        Command::Validate => {
            let report = validate::run_all()?;
            for c in &report.checks {
                eprintln!(
                    "{} {}: worst {:.3e} (tolerance {:.3e}, {} samples)",
                    if c.pass { "PASS" } else { "FAIL" },
                    c.name,
                    c.worst,
                    c.tolerance,
                    c.samples
                );
            }
            emit_json(cli, &report)?;
            return Ok(report.pass);
        }
    }
    Ok(true)
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(&cli) {
        Ok(true) => ExitCode::SUCCESS,
        Ok(false) => ExitCode::from(EXIT_FAIL),
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(if e.is_config() { EXIT_CONFIG } else { EXIT_NUMERICAL })
        }
    }
}
