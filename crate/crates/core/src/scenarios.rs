//! Numeric experiments built on the master equation: (t, θ₀) sweeps, phase
//! cuts at fixed times, maximal-concurrence searches and sudden-birth times.
//!
//! Sweep cells are independent and run on the rayon pool; results are kept
//! in grid order regardless of completion order.

use std::io::{self, Write};
use std::time::Instant;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::collective::{collective_basis, collective_populations, CollectivePopulations, DEGENERACY_THRESHOLD};
use crate::error::{Error, Result};
use crate::lindblad::{
    evolve, linspace, validate_grid, DensityMatrix, EvolveOptions, InitialState, Trajectory, BASIS_LABELS,
    HERMITICITY_TOL, POSITIVITY_TOL, TRACE_TOL,
};
use crate::output::{config_hash, format_number, write_footer, VERSION};
use crate::rates::{rates_for, ConfigKind, PhysicalParams};

/// Output channel of a sweep.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Channel {
    Concurrence,
    Populations,
    RawState,
}

/// Physical and numerical settings shared by every cell of an experiment.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Settings {
    pub gamma: f64,
    pub delta: f64,
    pub gamma_nr: f64,
    pub gamma_phi: f64,
    /// Upper bound on the integrator step.
    pub step: f64,
}

impl Default for Settings {
    fn default() -> Self {
        Settings { gamma: 1.0, delta: 0.0, gamma_nr: 0.0, gamma_phi: 0.0, step: EvolveOptions::default().step }
    }
}

impl Settings {
    pub fn params(&self, theta0: f64) -> PhysicalParams {
        PhysicalParams {
            theta0,
            gamma: self.gamma,
            delta: self.delta,
            gamma_nr: self.gamma_nr,
            gamma_phi: self.gamma_phi,
        }
    }

    fn options(&self) -> EvolveOptions {
        EvolveOptions { step: self.step }
    }
}

fn default_gamma() -> f64 {
    1.0
}

fn default_step() -> f64 {
    EvolveOptions::default().step
}

fn default_channels() -> Vec<Channel> {
    vec![Channel::Concurrence]
}

/// One sweep over a θ₀ grid, sampling every trajectory on a shared time grid.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SweepSpec {
    pub kind: ConfigKind,
    pub initial: InitialState,
    pub theta_grid: Vec<f64>,
    pub t_grid: Vec<f64>,
    #[serde(default)]
    pub delta: f64,
    #[serde(default = "default_gamma")]
    pub gamma: f64,
    #[serde(default)]
    pub gamma_nr: f64,
    #[serde(default)]
    pub gamma_phi: f64,
    #[serde(default = "default_channels")]
    pub channels: Vec<Channel>,
    #[serde(default = "default_step")]
    pub step: f64,
}

impl SweepSpec {
    pub fn new(kind: ConfigKind, initial: InitialState, theta_grid: Vec<f64>, t_grid: Vec<f64>) -> Self {
        SweepSpec {
            kind,
            initial,
            theta_grid,
            t_grid,
            delta: 0.0,
            gamma: 1.0,
            gamma_nr: 0.0,
            gamma_phi: 0.0,
            channels: default_channels(),
            step: default_step(),
        }
    }

    pub fn with_settings(mut self, s: Settings) -> Self {
        self.gamma = s.gamma;
        self.delta = s.delta;
        self.gamma_nr = s.gamma_nr;
        self.gamma_phi = s.gamma_phi;
        self.step = s.step;
        self
    }

    pub fn with_channels(mut self, channels: &[Channel]) -> Self {
        self.channels = channels.to_vec();
        self
    }

    pub fn settings(&self) -> Settings {
        Settings {
            gamma: self.gamma,
            delta: self.delta,
            gamma_nr: self.gamma_nr,
            gamma_phi: self.gamma_phi,
            step: self.step,
        }
    }

    pub fn validate(&self) -> Result<()> {
        validate_grid(&self.theta_grid, "theta grid")?;
        validate_grid(&self.t_grid, "time grid")?;
        if self.t_grid[0] < 0.0 {
            return Err(Error::InvalidParameter("time grid must be nonnegative".into()));
        }
        if self.channels.is_empty() {
            return Err(Error::InvalidParameter("at least one channel is required".into()));
        }
        for (i, c) in self.channels.iter().enumerate() {
            if self.channels[..i].contains(c) {
                return Err(Error::InvalidParameter(format!("channel {c:?} listed twice")));
            }
        }
        if !(self.step.is_finite() && self.step > 0.0) {
            return Err(Error::StepSize(format!("step must be positive and finite, got {}", self.step)));
        }
        self.settings().params(self.theta_grid[0]).validate()?;
        self.initial.density_matrix()?;
        Ok(())
    }

    fn wants(&self, c: Channel) -> bool {
        self.channels.contains(&c)
    }
}

/// Evolve and return samples at exactly `times`, inserting `t = 0` for the
/// integration when the requested grid starts later.
pub fn evolve_sampled(
    initial: &DensityMatrix,
    params: &PhysicalParams,
    kind: ConfigKind,
    times: &[f64],
    options: &EvolveOptions,
) -> Result<Trajectory> {
    let rates = rates_for(kind, params);
    if times.first() == Some(&0.0) {
        return evolve(initial, &rates, params, times, options);
    }
    let mut grid = Vec::with_capacity(times.len() + 1);
    grid.push(0.0);
    grid.extend_from_slice(times);
    let mut traj = evolve(initial, &rates, params, &grid, options)?;
    traj.times.remove(0);
    traj.states.remove(0);
    Ok(traj)
}

/// Channel data for one θ₀.
#[derive(Debug, Clone, PartialEq, Default)]
pub struct CellData {
    pub concurrence: Option<Vec<f64>>,
    /// A degenerate collective basis fails this channel only.
    pub populations: Option<Result<Vec<CollectivePopulations>>>,
    pub states: Option<Vec<DensityMatrix>>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct SweepCell {
    pub theta0: f64,
    pub outcome: Result<CellData>,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SweepMetadata {
    pub version: String,
    pub step: f64,
    pub hermiticity_tol: f64,
    pub trace_tol: f64,
    pub positivity_tol: f64,
    pub degeneracy_threshold: f64,
    pub wall_time_s: f64,
    pub cells: usize,
    pub failed_cells: usize,
    pub config_sha256: String,
}

#[derive(Debug, Clone, PartialEq)]
pub struct SweepResult {
    pub spec: SweepSpec,
    pub cells: Vec<SweepCell>,
    pub metadata: SweepMetadata,
}

fn run_cell(spec: &SweepSpec, theta0: f64) -> Result<CellData> {
    let params = spec.settings().params(theta0);
    let initial = spec.initial.density_matrix()?;
    let traj = evolve_sampled(&initial, &params, spec.kind, &spec.t_grid, &spec.settings().options())?;
    traj.check_invariants()?;
    let mut data = CellData::default();
    if spec.wants(Channel::Concurrence) {
        data.concurrence = Some(traj.concurrence()?);
    }
    if spec.wants(Channel::Populations) {
        let rates = rates_for(spec.kind, &params);
        data.populations = Some(collective_basis(&rates).map(|b| collective_populations(&traj, &b)));
    }
    if spec.wants(Channel::RawState) {
        data.states = Some(traj.states);
    }
    Ok(data)
}

/// Run every θ₀ cell of `spec`. Invalid specs are rejected up front;
/// failures inside a cell are recorded in that cell.
pub fn run_sweep(spec: &SweepSpec) -> Result<SweepResult> {
    spec.validate()?;
    let start = Instant::now();
    let cells: Vec<SweepCell> = spec
        .theta_grid
        .par_iter()
        .map(|&theta0| SweepCell { theta0, outcome: run_cell(spec, theta0) })
        .collect();
    let failed_cells = cells.iter().filter(|c| c.outcome.is_err()).count();
    let metadata = SweepMetadata {
        version: VERSION.to_string(),
        step: spec.step,
        hermiticity_tol: HERMITICITY_TOL,
        trace_tol: TRACE_TOL,
        positivity_tol: POSITIVITY_TOL,
        degeneracy_threshold: DEGENERACY_THRESHOLD,
        wall_time_s: start.elapsed().as_secs_f64(),
        cells: cells.len(),
        failed_cells,
        config_sha256: config_hash(spec),
    };
    Ok(SweepResult { spec: spec.clone(), cells, metadata })
}

const POPULATION_CHANNELS: [&str; 6] = ["rho_22", "rho_pp", "rho_mm", "rho_00", "rho_pm_re", "rho_pm_im"];

impl SweepResult {
    /// Concurrence indexed `[θ₀][t]`; NaN where the cell failed or the
    /// channel was not requested.
    pub fn concurrence_matrix(&self) -> Vec<Vec<f64>> {
        let n = self.spec.t_grid.len();
        self.cells
            .iter()
            .map(|c| match &c.outcome {
                Ok(CellData { concurrence: Some(v), .. }) => v.clone(),
                _ => vec![f64::NAN; n],
            })
            .collect()
    }

    pub fn failures(&self) -> impl Iterator<Item = (f64, &Error)> {
        self.cells.iter().filter_map(|c| c.outcome.as_ref().err().map(|e| (c.theta0, e)))
    }

    /// Long-format CSV `kind,initial,theta0,t,delta,channel,value`, followed
    /// by the version/hash comment line. A failed cell is one `error` row
    /// with empty time and value; details go to the JSON sidecar.
    pub fn write_csv<W: Write>(&self, out: W) -> io::Result<()> {
        let spec = &self.spec;
        let kind = spec.kind.name();
        let initial = spec.initial.to_string();
        let delta = format_number(spec.delta);
        let mut w = csv::Writer::from_writer(out);
        w.write_record(["kind", "initial", "theta0", "t", "delta", "channel", "value"])?;
        for cell in &self.cells {
            let theta = format_number(cell.theta0);
            let mut row = |t: &str, channel: &str, value: String| {
                w.write_record([kind, initial.as_str(), theta.as_str(), t, delta.as_str(), channel, value.as_str()])
            };
            let data = match &cell.outcome {
                Ok(d) => d,
                Err(_) => {
                    row("", "error", String::new())?;
                    continue;
                }
            };
            if let Some(Err(_)) = &data.populations {
                row("", "populations_error", String::new())?;
            }
            for (k, &t) in spec.t_grid.iter().enumerate() {
                let ts = format_number(t);
                for channel in &spec.channels {
                    match channel {
                        Channel::Concurrence => {
                            if let Some(c) = &data.concurrence {
                                row(&ts, "C", format_number(c[k]))?;
                            }
                        }
                        Channel::Populations => {
                            if let Some(Ok(p)) = &data.populations {
                                let p = &p[k];
                                let values = [p.rho_22, p.rho_pp, p.rho_mm, p.rho_00, p.rho_pm.re, p.rho_pm.im];
                                for (name, v) in POPULATION_CHANNELS.iter().zip(values) {
                                    row(&ts, name, format_number(v))?;
                                }
                            }
                        }
                        Channel::RawState => {
                            if let Some(states) = &data.states {
                                for (i, j, z) in states[k].upper_triangle() {
                                    let name = format!("rho_{}_{}", BASIS_LABELS[i], BASIS_LABELS[j]);
                                    row(&ts, &format!("{name}_re"), format_number(z.re))?;
                                    row(&ts, &format!("{name}_im"), format_number(z.im))?;
                                }
                            }
                        }
                    }
                }
            }
        }
        let mut inner = w.into_inner().map_err(|e| e.into_error())?;
        write_footer(&mut inner, &self.metadata.config_sha256)?;
        inner.flush()
    }

    /// JSON sidecar: the spec echo, metadata and per-cell error messages.
    pub fn sidecar(&self) -> serde_json::Value {
        let errors: Vec<serde_json::Value> = self
            .cells
            .iter()
            .flat_map(|c| {
                let mut out = Vec::new();
                match &c.outcome {
                    Err(e) => out.push(serde_json::json!({"theta0": c.theta0, "channel": "all", "error": e.to_string()})),
                    Ok(CellData { populations: Some(Err(e)), .. }) => out.push(
                        serde_json::json!({"theta0": c.theta0, "channel": "populations", "error": e.to_string()}),
                    ),
                    Ok(_) => {}
                }
                out
            })
            .collect();
        serde_json::json!({
            "spec": self.spec,
            "metadata": self.metadata,
            "errors": errors,
        })
    }
}

/// Concurrence against θ₀ at fixed times.
#[derive(Debug, Clone, PartialEq)]
pub struct PhaseCut {
    pub t_values: Vec<f64>,
    pub theta_grid: Vec<f64>,
    /// `curves[i][j]` = C(t_values[i], theta_grid[j]); NaN for failed cells.
    pub curves: Vec<Vec<f64>>,
    pub failures: Vec<(f64, Error)>,
}

pub fn phase_cut(
    kind: ConfigKind,
    initial: InitialState,
    t_values: &[f64],
    theta_grid: &[f64],
    settings: &Settings,
) -> Result<PhaseCut> {
    let spec = SweepSpec::new(kind, initial, theta_grid.to_vec(), t_values.to_vec()).with_settings(*settings);
    let result = run_sweep(&spec)?;
    let by_theta = result.concurrence_matrix();
    let curves = (0..t_values.len()).map(|i| by_theta.iter().map(|row| row[i]).collect()).collect();
    let failures = result.failures().map(|(t, e)| (t, e.clone())).collect();
    Ok(PhaseCut { t_values: t_values.to_vec(), theta_grid: theta_grid.to_vec(), curves, failures })
}

/// Controls for [`max_concurrence`].
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct MaxSearch {
    /// Largest time searched.
    pub horizon: f64,
    /// Spacing of the coarse sampling grid.
    pub sample_dt: f64,
    /// Golden-section refinement stops once the bracket is this narrow.
    pub time_tolerance: f64,
}

impl Default for MaxSearch {
    fn default() -> Self {
        MaxSearch { horizon: 100.0, sample_dt: 0.01, time_tolerance: 1e-7 }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct ConcurrenceMax {
    pub value: f64,
    pub time: f64,
    /// The coarse maximum sat on the horizon; the true maximum may lie later.
    pub at_boundary: bool,
}

const INV_GOLDEN: f64 = 0.618_033_988_749_894_8;

/// Maximum of C(t) over `[0, horizon]`: coarse grid argmax, then golden
/// section search on the two neighbouring intervals, re-integrating from the
/// left neighbour's state.
pub fn max_concurrence(
    kind: ConfigKind,
    initial: InitialState,
    theta0: f64,
    settings: &Settings,
    search: &MaxSearch,
) -> Result<ConcurrenceMax> {
    if !(search.horizon > 0.0 && search.sample_dt > 0.0 && search.time_tolerance > 0.0) {
        return Err(Error::InvalidParameter("search horizon, spacing and tolerance must be positive".into()));
    }
    let n = (search.horizon / search.sample_dt).ceil().max(1.0) as usize;
    let grid = linspace(0.0, search.horizon, n + 1);
    let params = settings.params(theta0);
    let rates = rates_for(kind, &params);
    let options = settings.options();
    let traj = evolve(&initial.density_matrix()?, &rates, &params, &grid, &options)?;
    let values = traj.concurrence()?;
    let (k, &coarse) = values
        .iter()
        .enumerate()
        .fold((0, &values[0]), |best, cur| if *cur.1 > *best.1 { cur } else { best });
    let at_boundary = k == n;
    if coarse == 0.0 {
        return Ok(ConcurrenceMax { value: 0.0, time: grid[k], at_boundary });
    }

    let lo = k.saturating_sub(1);
    let hi = (k + 1).min(n);
    let origin = traj.states[lo];
    let t0 = grid[lo];
    let eval = |t: f64| -> Result<f64> {
        if t == t0 {
            return origin.concurrence();
        }
        let sub = evolve(&origin, &rates, &params, &[0.0, t - t0], &options)?;
        sub.final_state().concurrence()
    };

    let (mut a, mut b) = (grid[lo], grid[hi]);
    let mut c = b - INV_GOLDEN * (b - a);
    let mut d = a + INV_GOLDEN * (b - a);
    let (mut fc, mut fd) = (eval(c)?, eval(d)?);
    let (mut best, mut best_t) = (coarse, grid[k]);
    while b - a > search.time_tolerance {
        if fc >= fd {
            b = d;
            d = c;
            fd = fc;
            c = b - INV_GOLDEN * (b - a);
            fc = eval(c)?;
        } else {
            a = c;
            c = d;
            fc = fd;
            d = a + INV_GOLDEN * (b - a);
            fd = eval(d)?;
        }
        for (t, f) in [(c, fc), (d, fd)] {
            if f > best {
                best = f;
                best_t = t;
            }
        }
    }
    Ok(ConcurrenceMax { value: best, time: best_t, at_boundary })
}

/// [`max_concurrence`] at each detuning of `delta_grid`, in grid order.
pub fn max_concurrence_vs_detuning(
    kind: ConfigKind,
    initial: InitialState,
    theta0: f64,
    delta_grid: &[f64],
    settings: &Settings,
    search: &MaxSearch,
) -> Vec<Result<ConcurrenceMax>> {
    delta_grid
        .par_iter()
        .map(|&delta| max_concurrence(kind, initial, theta0, &Settings { delta, ..*settings }, search))
        .collect()
}

/// Default entanglement threshold for sudden birth.
pub const BIRTH_THRESHOLD: f64 = 1e-4;

/// First time C exceeds `threshold`, linearly interpolated between samples;
/// `None` if it never does.
pub fn sudden_birth_time(times: &[f64], values: &[f64], threshold: f64) -> Option<f64> {
    let k = values.iter().position(|&c| c > threshold)?;
    if k == 0 {
        return Some(times[0]);
    }
    let (t0, t1) = (times[k - 1], times[k]);
    let (c0, c1) = (values[k - 1], values[k]);
    Some(t0 + (threshold - c0) * (t1 - t0) / (c1 - c0))
}
