//! Coupling geometries and the six master-equation coefficients.
//!
//! Every coefficient is available two ways: summed over the coupling-point
//! positions of each geometry, and from the trigonometric closed form of
//! that geometry. The two routes must agree for every phase shift.

use std::f64::consts::TAU;
use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// The three arrangements of two two-point giant atoms on a waveguide.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum ConfigKind {
    Separate,
    Braided,
    Nested,
}

impl ConfigKind {
    pub const ALL: [ConfigKind; 3] = [ConfigKind::Separate, ConfigKind::Braided, ConfigKind::Nested];

    pub fn name(self) -> &'static str {
        match self {
            ConfigKind::Separate => "separate",
            ConfigKind::Braided => "braided",
            ConfigKind::Nested => "nested",
        }
    }
}

impl fmt::Display for ConfigKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for ConfigKind {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.to_ascii_lowercase().as_str() {
            "separate" | "s" => Ok(ConfigKind::Separate),
            "braided" | "b" => Ok(ConfigKind::Braided),
            "nested" | "n" => Ok(ConfigKind::Nested),
            other => Err(Error::InvalidParameter(format!(
                "unknown coupling configuration '{other}' (expected separate, braided or nested)"
            ))),
        }
    }
}

/// Coupling-point coordinates in units of the neighbouring-point spacing.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct CouplingConfig {
    pub kind: ConfigKind,
    /// `[x_a1, x_a2]`
    pub atom_a: [f64; 2],
    /// `[x_b1, x_b2]`
    pub atom_b: [f64; 2],
}

impl CouplingConfig {
    /// Positions in the order `(x_a1, x_a2, x_b1, x_b2)`.
    pub fn positions(&self) -> [f64; 4] {
        [self.atom_a[0], self.atom_a[1], self.atom_b[0], self.atom_b[1]]
    }

    /// Same geometry rigidly shifted along the waveguide.
    pub fn translated(&self, offset: f64) -> Self {
        CouplingConfig {
            kind: self.kind,
            atom_a: self.atom_a.map(|x| x + offset),
            atom_b: self.atom_b.map(|x| x + offset),
        }
    }
}

/// Canonical coupling-point table for each geometry.
pub fn coupling_geometry(kind: ConfigKind) -> CouplingConfig {
    let (atom_a, atom_b) = match kind {
        ConfigKind::Separate => ([0.0, 1.0], [2.0, 3.0]),
        ConfigKind::Braided => ([0.0, 2.0], [1.0, 3.0]),
        ConfigKind::Nested => ([0.0, 3.0], [1.0, 2.0]),
    };
    CouplingConfig { kind, atom_a, atom_b }
}

/// Physical inputs to one simulation.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct PhysicalParams {
    /// Phase shift between neighbouring coupling points (radians).
    pub theta0: f64,
    /// Radiative decay rate; sets the unit of time.
    pub gamma: f64,
    /// Frequency detuning between the two atoms.
    #[serde(default)]
    pub delta: f64,
    /// Extra local (nonradiative) damping per atom.
    #[serde(default)]
    pub gamma_nr: f64,
    /// Pure dephasing rate per atom.
    #[serde(default)]
    pub gamma_phi: f64,
}

impl PhysicalParams {
    pub fn new(theta0: f64, gamma: f64) -> Self {
        PhysicalParams { theta0, gamma, delta: 0.0, gamma_nr: 0.0, gamma_phi: 0.0 }
    }

    pub fn with_delta(mut self, delta: f64) -> Self {
        self.delta = delta;
        self
    }

    pub fn with_local_noise(mut self, gamma_nr: f64, gamma_phi: f64) -> Self {
        self.gamma_nr = gamma_nr;
        self.gamma_phi = gamma_phi;
        self
    }

    pub fn validate(&self) -> Result<()> {
        if !self.theta0.is_finite() {
            return Err(Error::InvalidParameter("theta0 must be finite".into()));
        }
        if !(self.gamma.is_finite() && self.gamma > 0.0) {
            return Err(Error::InvalidParameter(format!("gamma must be > 0, got {}", self.gamma)));
        }
        if !self.delta.is_finite() {
            return Err(Error::InvalidParameter("delta must be finite".into()));
        }
        if !(self.gamma_nr.is_finite() && self.gamma_nr >= 0.0) {
            return Err(Error::InvalidParameter(format!(
                "gamma_nr must be >= 0, got {}",
                self.gamma_nr
            )));
        }
        if !(self.gamma_phi.is_finite() && self.gamma_phi >= 0.0) {
            return Err(Error::InvalidParameter(format!(
                "gamma_phi must be >= 0, got {}",
                self.gamma_phi
            )));
        }
        Ok(())
    }

    /// Phase shift reduced to `[0, 2π)`.
    pub fn canonical_theta(&self) -> f64 {
        canonical_theta(self.theta0)
    }
}

/// Reduce a phase to `[0, 2π)`.
pub fn canonical_theta(theta0: f64) -> f64 {
    let r = theta0.rem_euclid(TAU);
    // rem_euclid can round up to exactly TAU for tiny negative inputs
    if r >= TAU {
        0.0
    } else {
        r
    }
}

/// Lamb shifts, exchange coupling and decay rates entering the master
/// equation, all in absolute units (multiples of `gamma`).
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct DerivedRates {
    pub delta_omega_a: f64,
    pub delta_omega_b: f64,
    pub g_ab: f64,
    pub gamma_a: f64,
    pub gamma_b: f64,
    pub gamma_coll: f64,
    /// The radiative rate these coefficients were evaluated at.
    pub gamma: f64,
}

impl DerivedRates {
    /// All couplings and decays switched off.
    pub fn zero(gamma: f64) -> Self {
        DerivedRates {
            delta_omega_a: 0.0,
            delta_omega_b: 0.0,
            g_ab: 0.0,
            gamma_a: 0.0,
            gamma_b: 0.0,
            gamma_coll: 0.0,
            gamma,
        }
    }

    pub fn as_array(&self) -> [f64; 6] {
        [
            self.delta_omega_a,
            self.delta_omega_b,
            self.g_ab,
            self.gamma_a,
            self.gamma_b,
            self.gamma_coll,
        ]
    }

    pub const FIELD_NAMES: [&'static str; 6] =
        ["delta_omega_a", "delta_omega_b", "g_ab", "Gamma_a", "Gamma_b", "Gamma_coll"];

    /// Componentwise maximum absolute difference.
    pub fn max_abs_diff(&self, other: &DerivedRates) -> f64 {
        self.as_array()
            .iter()
            .zip(other.as_array())
            .fold(0.0_f64, |acc, (a, b)| acc.max((a - b).abs()))
    }

    /// Ω = sqrt(4 g_ab² + (δω_a − δω_b)²).
    pub fn level_shift(&self) -> f64 {
        let d = self.delta_omega_a - self.delta_omega_b;
        (4.0 * self.g_ab * self.g_ab + d * d).sqrt()
    }
}

/// Sum the interference terms over all pairs of coupling points.
pub fn derive_rates_from_geometry(config: &CouplingConfig, theta0: f64, gamma: f64) -> DerivedRates {
    let theta = canonical_theta(theta0);
    let pair_sum = |xs: &[f64; 2], ys: &[f64; 2]| {
        let mut s = 0.0;
        let mut c = 0.0;
        for x in xs {
            for y in ys {
                let phase = theta * (x - y).abs();
                s += phase.sin();
                c += phase.cos();
            }
        }
        (s, c)
    };
    let (saa, caa) = pair_sum(&config.atom_a, &config.atom_a);
    let (sbb, cbb) = pair_sum(&config.atom_b, &config.atom_b);
    let (sab, cab) = pair_sum(&config.atom_a, &config.atom_b);
    DerivedRates {
        delta_omega_a: gamma * saa / 2.0,
        delta_omega_b: gamma * sbb / 2.0,
        g_ab: gamma * sab / 2.0,
        gamma_a: gamma * caa,
        gamma_b: gamma * cbb,
        gamma_coll: gamma * cab,
        gamma,
    }
}

/// Trigonometric closed forms of the same coefficients.
pub fn derive_rates_closed_form(kind: ConfigKind, theta0: f64, gamma: f64) -> DerivedRates {
    let t = canonical_theta(theta0);
    let (s1, s2, s3) = (t.sin(), (2.0 * t).sin(), (3.0 * t).sin());
    let (c1, c2, c3) = (t.cos(), (2.0 * t).cos(), (3.0 * t).cos());
    let (dwa, dwb, g, ga, gb, gc) = match kind {
        ConfigKind::Separate => {
            let dw = s1;
            let decay = 2.0 * (1.0 + c1);
            (dw, dw, (s1 + 2.0 * s2 + s3) / 2.0, decay, decay, c1 + 2.0 * c2 + c3)
        }
        ConfigKind::Braided => {
            let dw = s2;
            let decay = 2.0 * (1.0 + c2);
            (dw, dw, (3.0 * s1 + s3) / 2.0, decay, decay, 3.0 * c1 + c3)
        }
        ConfigKind::Nested => (
            s3,
            s1,
            s1 + s2,
            2.0 * (1.0 + c3),
            2.0 * (1.0 + c1),
            2.0 * (c1 + c2),
        ),
    };
    DerivedRates {
        delta_omega_a: gamma * dwa,
        delta_omega_b: gamma * dwb,
        g_ab: gamma * g,
        gamma_a: gamma * ga,
        gamma_b: gamma * gb,
        gamma_coll: gamma * gc,
        gamma,
    }
}

/// Rates for a geometry at the given physical parameters (closed forms).
pub fn rates_for(kind: ConfigKind, params: &PhysicalParams) -> DerivedRates {
    derive_rates_closed_form(kind, params.theta0, params.gamma)
}
