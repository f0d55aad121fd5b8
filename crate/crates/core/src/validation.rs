//! Cross-checks between independent routes to the same quantity, collected
//! into a report with one row per check and grid point.

use std::io::{self, Write};

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::collective::transition_rates;
use crate::lindblad::{evolve, linspace, DensityMatrix, EvolveOptions, EG};
use crate::output::{format_number, write_footer};
use crate::rates::{coupling_geometry, derive_rates_closed_form, derive_rates_from_geometry, ConfigKind, DerivedRates, PhysicalParams};
use crate::single_excitation::{amplitudes, concurrence_closed_form, AmplitudePair};

/// Deliberate corruption of the oracle path, used to prove that the suite
/// detects a wrong sign.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Fault {
    FlipCollectiveDecaySign,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ValidationConfig {
    pub theta_points: usize,
    pub t_points: usize,
    pub t_max: f64,
    pub rate_grid_points: usize,
    /// θ₀ samples per configuration for the master-equation comparison.
    pub master_theta_points: usize,
    pub master_t_points: usize,
    pub step: f64,
    pub fault: Option<Fault>,
}

impl Default for ValidationConfig {
    fn default() -> Self {
        ValidationConfig {
            theta_points: 64,
            t_points: 1001,
            t_max: 10.0,
            rate_grid_points: 256,
            master_theta_points: 8,
            master_t_points: 101,
            step: EvolveOptions::default().step,
            fault: None,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum Status {
    Pass,
    Fail,
    Skipped,
}

impl Status {
    pub fn name(self) -> &'static str {
        match self {
            Status::Pass => "pass",
            Status::Fail => "fail",
            Status::Skipped => "skipped",
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct CheckRow {
    pub check: &'static str,
    pub kind: ConfigKind,
    /// NaN for rows that summarize a whole θ₀ grid.
    pub theta0: f64,
    pub max_deviation: f64,
    /// NaN where the check has no time axis.
    pub argmax_t: f64,
    pub tolerance: f64,
    pub status: Status,
    pub note: String,
}

impl CheckRow {
    fn judged(check: &'static str, kind: ConfigKind, theta0: f64, dev: (f64, f64), tolerance: f64) -> Self {
        let (max_deviation, argmax_t) = dev;
        // NaN deviations fail
        let status = if max_deviation <= tolerance { Status::Pass } else { Status::Fail };
        CheckRow { check, kind, theta0, max_deviation, argmax_t, tolerance, status, note: String::new() }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ValidationReport {
    pub config: ValidationConfig,
    pub rows: Vec<CheckRow>,
}

impl ValidationReport {
    pub fn passed(&self) -> bool {
        self.rows.iter().all(|r| r.status != Status::Fail)
    }

    pub fn failures(&self) -> impl Iterator<Item = &CheckRow> {
        self.rows.iter().filter(|r| r.status == Status::Fail)
    }

    pub fn write_csv<W: Write>(&self, out: W, config_hash: &str) -> io::Result<()> {
        let mut w = csv::Writer::from_writer(out);
        w.write_record(["check", "kind", "theta0", "max_deviation", "argmax_t", "tolerance", "status", "note"])?;
        for r in &self.rows {
            w.write_record([
                r.check,
                r.kind.name(),
                &format_number(r.theta0),
                &format_number(r.max_deviation),
                &format_number(r.argmax_t),
                &format_number(r.tolerance),
                r.status.name(),
                &r.note,
            ])?;
        }
        let mut inner = w.into_inner().map_err(|e| e.into_error())?;
        write_footer(&mut inner, config_hash)?;
        inner.flush()
    }
}

/// Tolerances of the closed-form comparison against the 2×2 exponential.
pub fn closed_form_tolerance(kind: ConfigKind) -> f64 {
    match kind {
        ConfigKind::Nested => 1e-6,
        _ => 1e-9,
    }
}

const GEOMETRY_TOL: f64 = 1e-12;
const RATE_SUM_TOL: f64 = 1e-10;
const MASTER_TOL: f64 = 1e-6;

fn oracle_rates(kind: ConfigKind, theta0: f64, fault: Option<Fault>) -> DerivedRates {
    let mut r = derive_rates_closed_form(kind, theta0, 1.0);
    if fault == Some(Fault::FlipCollectiveDecaySign) {
        r.gamma_coll = -r.gamma_coll;
    }
    r
}

/// Largest deviation and where it occurs; NaN wins.
fn worst(pairs: impl Iterator<Item = (f64, f64)>) -> (f64, f64) {
    pairs.fold((f64::NEG_INFINITY, f64::NAN), |best, (t, d)| {
        if best.0.is_nan() || !(d.is_nan() || d > best.0) {
            best
        } else {
            (d, t)
        }
    })
}

fn closed_form_rows(cfg: &ValidationConfig, kind: ConfigKind) -> Vec<CheckRow> {
    let times = linspace(0.0, cfg.t_max, cfg.t_points);
    let tol = closed_form_tolerance(kind);
    (0..cfg.theta_points)
        .into_par_iter()
        .map(|k| {
            let theta = k as f64 * std::f64::consts::TAU / cfg.theta_points as f64;
            let rates = oracle_rates(kind, theta, cfg.fault);
            let mut deviations = Vec::with_capacity(times.len());
            for &t in &times {
                let closed = match concurrence_closed_form(kind, theta, 1.0, 0.0, t) {
                    Ok(c) => c,
                    Err(e) => {
                        return CheckRow {
                            check: "closed_form_vs_oracle",
                            kind,
                            theta0: theta,
                            max_deviation: f64::NAN,
                            argmax_t: f64::NAN,
                            tolerance: tol,
                            status: Status::Skipped,
                            note: e.to_string(),
                        }
                    }
                };
                let oracle = amplitudes(&rates, 0.0, t, AmplitudePair::EG).concurrence();
                deviations.push((t, (closed - oracle).abs()));
            }
            CheckRow::judged("closed_form_vs_oracle", kind, theta, worst(deviations.into_iter()), tol)
        })
        .collect()
}

fn geometry_row(cfg: &ValidationConfig, kind: ConfigKind) -> CheckRow {
    let geometry = coupling_geometry(kind);
    let dev = (0..cfg.rate_grid_points)
        .map(|k| {
            let theta = k as f64 * std::f64::consts::TAU / cfg.rate_grid_points as f64;
            let a = derive_rates_from_geometry(&geometry, theta, 1.0);
            let b = derive_rates_closed_form(kind, theta, 1.0);
            a.max_abs_diff(&b)
        })
        .fold(0.0, |m: f64, d| if m.is_nan() || d.is_nan() { f64::NAN } else { m.max(d) });
    let mut row = CheckRow::judged("rates_geometry_vs_closed_form", kind, f64::NAN, (dev, f64::NAN), GEOMETRY_TOL);
    row.note = format!("{} theta0 points", cfg.rate_grid_points);
    row
}

fn rate_sum_row(cfg: &ValidationConfig, kind: ConfigKind) -> CheckRow {
    let mut dev: f64 = 0.0;
    let mut degenerate = 0usize;
    for k in 0..cfg.rate_grid_points {
        let theta = (k as f64 + 0.5) * std::f64::consts::TAU / cfg.rate_grid_points as f64;
        let r = derive_rates_closed_form(kind, theta, 1.0);
        match transition_rates(&r) {
            Ok(tr) => {
                let total = r.gamma_a + r.gamma_b;
                dev = dev.max((tr.g2p + tr.g2m - total).abs()).max((tr.gp0 + tr.gm0 - total).abs());
            }
            Err(_) => degenerate += 1,
        }
    }
    let mut row = CheckRow::judged("rate_sum_identities", kind, f64::NAN, (dev, f64::NAN), RATE_SUM_TOL);
    if degenerate > 0 {
        row.status = Status::Fail;
        row.note = format!("{degenerate} degenerate-basis points on a grid that should avoid them");
    } else {
        row.note = format!("{} midpoint theta0 values", cfg.rate_grid_points);
    }
    row
}

fn master_rows(cfg: &ValidationConfig, kind: ConfigKind) -> Vec<CheckRow> {
    let times = linspace(0.0, cfg.t_max, cfg.master_t_points);
    (0..cfg.master_theta_points)
        .into_par_iter()
        .map(|k| {
            let theta = (k as f64 + 0.25) * std::f64::consts::TAU / cfg.master_theta_points as f64;
            let rates = oracle_rates(kind, theta, cfg.fault);
            let params = PhysicalParams::new(theta, 1.0);
            let traj = evolve(&DensityMatrix::basis_state(EG), &rates, &params, &times, &EvolveOptions { step: cfg.step })
                .and_then(|t| t.concurrence());
            match traj {
                Ok(cs) => {
                    let pairs = times.iter().zip(cs).map(|(&t, c)| {
                        (t, (c - amplitudes(&rates, 0.0, t, AmplitudePair::EG).concurrence()).abs())
                    });
                    CheckRow::judged("master_equation_vs_amplitudes", kind, theta, worst(pairs), MASTER_TOL)
                }
                Err(e) => CheckRow {
                    check: "master_equation_vs_amplitudes",
                    kind,
                    theta0: theta,
                    max_deviation: f64::NAN,
                    argmax_t: f64::NAN,
                    tolerance: MASTER_TOL,
                    status: Status::Fail,
                    note: e.to_string(),
                },
            }
        })
        .collect()
}

/// Run all checks for all three configurations.
pub fn run_validation(cfg: &ValidationConfig) -> ValidationReport {
    let mut rows = Vec::new();
    for kind in ConfigKind::ALL {
        rows.extend(closed_form_rows(cfg, kind));
        rows.push(geometry_row(cfg, kind));
        rows.push(rate_sum_row(cfg, kind));
        rows.extend(master_rows(cfg, kind));
    }
    ValidationReport { config: cfg.clone(), rows }
}
