use std::f64::consts::PI;

use msfq_core::bloch::{optimal_time_decoherent, DriftSystem};
use msfq_core::coherent::sensitivity_coherent;
use msfq_core::sweep::{self, Axis, Figure, Format, SweepSpec};
use msfq_core::{config, oracle, SensorConfig};

#[test]
fn file_config_feeds_every_stage() {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("sensor.toml");
    std::fs::write(&path, "r = 0.8\nd_frac = 0.05\ngamma0_ratio = 1e-4\n").unwrap();
    let cfg = config::load(Some(&path), &["d_frac=0.02".into()]).unwrap();
    assert_eq!(cfg.r, 0.8);
    assert_eq!(cfg.d_frac, 0.02);

    let p = cfg.derive().unwrap();
    let coh = sensitivity_coherent(p.m, p.omega, p.r, p.omega_b).unwrap();
    let dec = optimal_time_decoherent(&DriftSystem::from_params(&p).unwrap(), p.kappa_g, 4.0 * PI / p.omega_b).unwrap();
    assert!(dec.dg_sqrt_t > 0.9 * coh.dg_sqrt_t);
    assert!(dec.t_opt < PI / p.omega_b);

    let suite = oracle::run_suite(&cfg, None).unwrap();
    assert!(suite.pass, "{:?}", suite.checks);
}

#[test]
fn sweep_point_matches_direct_derivation() {
    let base = SensorConfig::default();
    let mut spec = SweepSpec::new(Figure::Fig1, base.clone());
    spec.set_axis(Axis::parse("r=0.5:1.0:2").unwrap()).unwrap();
    spec.set_axis(Axis::parse("d_frac=0:0.5:2").unwrap()).unwrap();
    let tables = sweep::run(&spec).unwrap();
    let c = &tables[2];
    assert_eq!(c.name, "fig1c");
    // panels b-d run over the fixed r set, the r axis only drives panel a
    let row = c.rows.iter().find(|x| (x[0] - 1.0).abs() < 1e-12 && x[1] == 0.5).unwrap();
    let p = SensorConfig { r: 1.0, d_frac: 0.5, ..base }.derive().unwrap();
    assert!((row[2] - p.omega_b / p.omega).abs() < 1e-15);

    let dir = tempfile::tempdir().unwrap();
    let files = sweep::write_tables(&tables, dir.path(), Format::Json).unwrap();
    assert_eq!(files.len(), 4);
    let back: serde_json::Value = serde_json::from_str(&std::fs::read_to_string(&files[2]).unwrap()).unwrap();
    assert_eq!(back["name"], "fig1c");
}
