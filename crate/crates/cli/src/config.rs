//! JSON run configuration shared by `evolve` and `sweep`.

use std::f64::consts::PI;
use std::path::PathBuf;

use giant_atom_core::lindblad::linspace;
use giant_atom_core::scenarios::{Channel, SweepSpec};
use giant_atom_core::{ConfigKind, Error, InitialState, PhysicalParams, Result};
use serde::{Deserialize, Serialize};

/// A grid given either explicitly or as an evenly spaced range.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum Grid {
    Values(Vec<f64>),
    Range {
        start: f64,
        stop: f64,
        points: usize,
        /// Include `stop` (default). Periodic θ₀ grids usually exclude it.
        #[serde(default = "yes")]
        endpoint: bool,
    },
}

fn yes() -> bool {
    true
}

fn one() -> f64 {
    1.0
}

impl Grid {
    pub fn values(&self) -> Vec<f64> {
        match self {
            Grid::Values(v) => v.clone(),
            Grid::Range { start, stop, points, endpoint } => {
                if *endpoint {
                    linspace(*start, *stop, *points)
                } else {
                    let step = (stop - start) / *points as f64;
                    (0..*points).map(|k| start + k as f64 * step).collect()
                }
            }
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RunConfig {
    pub kind: ConfigKind,
    pub initial: InitialState,
    /// Single phase shift; used by `evolve`, or as a one-point sweep.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub theta0: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub theta_grid: Option<Grid>,
    pub t_grid: Grid,
    /// Phase values are multiples of π.
    #[serde(default)]
    pub pi_units: bool,
    #[serde(default)]
    pub delta: f64,
    #[serde(default = "one")]
    pub gamma: f64,
    #[serde(default)]
    pub gamma_nr: f64,
    #[serde(default)]
    pub gamma_phi: f64,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub channels: Option<Vec<Channel>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub step: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub output: Option<PathBuf>,
    /// Recorded in the metadata; the simulations themselves are deterministic.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub seed: Option<u64>,
}

impl RunConfig {
    pub fn from_json(text: &str) -> Result<RunConfig> {
        let cfg: RunConfig =
            serde_json::from_str(text).map_err(|e| Error::InvalidParameter(format!("config: {e}")))?;
        cfg.validate()?;
        Ok(cfg)
    }

    fn scale(&self) -> f64 {
        if self.pi_units {
            PI
        } else {
            1.0
        }
    }

    pub fn params(&self, theta0: f64) -> PhysicalParams {
        PhysicalParams {
            theta0,
            gamma: self.gamma,
            delta: self.delta,
            gamma_nr: self.gamma_nr,
            gamma_phi: self.gamma_phi,
        }
    }

    /// Phase shift in radians for `evolve`.
    pub fn single_theta(&self) -> Result<f64> {
        match (&self.theta0, &self.theta_grid) {
            (Some(t), None) => Ok(t * self.scale()),
            (None, Some(g)) => match g.values().as_slice() {
                [t] => Ok(t * self.scale()),
                _ => Err(Error::InvalidParameter("evolve needs a single theta0".into())),
            },
            _ => Err(Error::InvalidParameter("give exactly one of theta0 and theta_grid".into())),
        }
    }

    /// Phase grid in radians for `sweep`.
    pub fn theta_values(&self) -> Result<Vec<f64>> {
        let raw = match (&self.theta0, &self.theta_grid) {
            (Some(t), None) => vec![*t],
            (None, Some(g)) => g.values(),
            _ => return Err(Error::InvalidParameter("give exactly one of theta0 and theta_grid".into())),
        };
        Ok(raw.into_iter().map(|t| t * self.scale()).collect())
    }

    pub fn step(&self) -> f64 {
        self.step.unwrap_or(giant_atom_core::EvolveOptions::default().step)
    }

    pub fn validate(&self) -> Result<()> {
        let thetas = self.theta_values()?;
        for &t in &thetas {
            self.params(t).validate()?;
        }
        self.initial.density_matrix()?;
        let step = self.step();
        if !(step.is_finite() && step > 0.0) {
            return Err(Error::StepSize(format!("step must be positive and finite, got {step}")));
        }
        self.sweep_spec()?.validate()
    }

    pub fn sweep_spec(&self) -> Result<SweepSpec> {
        let mut spec = SweepSpec::new(self.kind, self.initial, self.theta_values()?, self.t_grid.values());
        spec.delta = self.delta;
        spec.gamma = self.gamma;
        spec.gamma_nr = self.gamma_nr;
        spec.gamma_phi = self.gamma_phi;
        spec.step = self.step();
        if let Some(c) = &self.channels {
            spec.channels = c.clone();
        }
        Ok(spec)
    }
}
