//! Two-atom master equation: Hamiltonian, Liouvillian and time evolution of
//! the 4×4 density matrix.
//!
//! Basis ordering throughout is `(|ee⟩, |eg⟩, |ge⟩, |gg⟩)` with atom `a`
//! written first.

use std::fmt;

use serde::{Deserialize, Serialize};

use crate::entanglement;
use crate::error::{Error, Result};
use crate::integrator::{LinearOperator, SparseMap};
use crate::linalg::{hermitian_eigenvalues, Mat4, C64, I, ONE, ZERO};
use crate::rates::{DerivedRates, PhysicalParams};

pub const EE: usize = 0;
pub const EG: usize = 1;
pub const GE: usize = 2;
pub const GG: usize = 3;

/// Labels of the basis states, in storage order.
pub const BASIS_LABELS: [&str; 4] = ["ee", "eg", "ge", "gg"];

pub const HERMITICITY_TOL: f64 = 1e-10;
pub const TRACE_TOL: f64 = 1e-9;
pub const POSITIVITY_TOL: f64 = 1e-8;

/// Lowering operator of atom `a`.
pub fn sigma_minus_a() -> Mat4 {
    let mut m = Mat4::zeros();
    m[(GE, EE)] = ONE;
    m[(GG, EG)] = ONE;
    m
}

/// Lowering operator of atom `b`.
pub fn sigma_minus_b() -> Mat4 {
    let mut m = Mat4::zeros();
    m[(EG, EE)] = ONE;
    m[(GG, GE)] = ONE;
    m
}

fn sigma_z_a() -> Mat4 {
    Mat4::from_real([
        [1.0, 0.0, 0.0, 0.0],
        [0.0, 1.0, 0.0, 0.0],
        [0.0, 0.0, -1.0, 0.0],
        [0.0, 0.0, 0.0, -1.0],
    ])
}

fn sigma_z_b() -> Mat4 {
    Mat4::from_real([
        [1.0, 0.0, 0.0, 0.0],
        [0.0, -1.0, 0.0, 0.0],
        [0.0, 0.0, 1.0, 0.0],
        [0.0, 0.0, 0.0, -1.0],
    ])
}

/// Named product states used as initial conditions.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Preset {
    Ee,
    Eg,
    Ge,
    Gg,
}

impl Preset {
    pub fn index(self) -> usize {
        match self {
            Preset::Ee => EE,
            Preset::Eg => EG,
            Preset::Ge => GE,
            Preset::Gg => GG,
        }
    }

    pub fn name(self) -> &'static str {
        BASIS_LABELS[self.index()]
    }
}

/// Initial condition: a named preset or an explicit pure-state amplitude
/// vector over `(|ee⟩, |eg⟩, |ge⟩, |gg⟩)` given as `[re, im]` pairs.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum InitialState {
    Preset(Preset),
    Amplitudes([[f64; 2]; 4]),
}

impl InitialState {
    pub const EG: InitialState = InitialState::Preset(Preset::Eg);
    pub const GE: InitialState = InitialState::Preset(Preset::Ge);
    pub const EE: InitialState = InitialState::Preset(Preset::Ee);
    pub const GG: InitialState = InitialState::Preset(Preset::Gg);

    pub fn density_matrix(&self) -> Result<DensityMatrix> {
        match self {
            InitialState::Preset(p) => Ok(DensityMatrix::basis_state(p.index())),
            InitialState::Amplitudes(a) => DensityMatrix::from_pure(&a.map(|[re, im]| C64::new(re, im))),
        }
    }
}

impl fmt::Display for InitialState {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            InitialState::Preset(p) => f.write_str(p.name()),
            InitialState::Amplitudes(_) => f.write_str("custom"),
        }
    }
}

impl std::str::FromStr for InitialState {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        let preset = match s.to_ascii_lowercase().as_str() {
            "ee" => Preset::Ee,
            "eg" => Preset::Eg,
            "ge" => Preset::Ge,
            "gg" => Preset::Gg,
            other => {
                return Err(Error::InvalidParameter(format!(
                    "unknown initial state '{other}' (expected ee, eg, ge or gg)"
                )))
            }
        };
        Ok(InitialState::Preset(preset))
    }
}

/// Two-qubit density matrix.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct DensityMatrix(Mat4);

impl DensityMatrix {
    /// Wraps a matrix without checking any invariant.
    pub fn from_matrix_unchecked(m: Mat4) -> Self {
        DensityMatrix(m)
    }

    /// Wraps a matrix after checking Hermiticity, trace and positivity.
    pub fn new(m: Mat4) -> Result<Self> {
        let rho = DensityMatrix(m);
        rho.check_invariants()?;
        Ok(rho)
    }

    pub fn basis_state(index: usize) -> Self {
        let mut m = Mat4::zeros();
        m[(index, index)] = ONE;
        DensityMatrix(m)
    }

    /// `|ψ⟩⟨ψ|`; the amplitudes must be normalized to within 1e-9.
    pub fn from_pure(amplitudes: &[C64; 4]) -> Result<Self> {
        let norm: f64 = amplitudes.iter().map(|z| z.norm_sqr()).sum();
        if !norm.is_finite() || (norm - 1.0).abs() > TRACE_TOL {
            return Err(Error::InvalidState(format!(
                "pure-state amplitudes must be normalized, got squared norm {norm}"
            )));
        }
        Ok(DensityMatrix(Mat4::outer(amplitudes, amplitudes)))
    }

    pub fn maximally_mixed() -> Self {
        DensityMatrix(Mat4::identity().scale_re(0.25))
    }

    pub fn matrix(&self) -> &Mat4 {
        &self.0
    }

    pub fn element(&self, i: usize, j: usize) -> C64 {
        self.0[(i, j)]
    }

    pub fn population(&self, i: usize) -> f64 {
        self.0[(i, i)].re
    }

    pub fn trace(&self) -> C64 {
        self.0.trace()
    }

    pub fn hermiticity_error(&self) -> f64 {
        self.0.hermiticity_error()
    }

    pub fn min_eigenvalue(&self) -> Result<f64> {
        Ok(hermitian_eigenvalues(&self.0)?[0])
    }

    pub fn check_invariants(&self) -> Result<()> {
        let herm = self.hermiticity_error();
        if !(herm <= HERMITICITY_TOL) {
            return Err(Error::InvalidState(format!("not Hermitian: max|rho - rho^dag| = {herm:e}")));
        }
        let tr = self.trace();
        if !((tr - ONE).norm() <= TRACE_TOL) {
            return Err(Error::InvalidState(format!("trace {tr} differs from 1")));
        }
        let min = self.min_eigenvalue()?;
        if !(min >= -POSITIVITY_TOL) {
            return Err(Error::InvalidState(format!("negative eigenvalue {min:e}")));
        }
        Ok(())
    }

    pub fn concurrence(&self) -> Result<f64> {
        entanglement::concurrence(self)
    }

    /// Entries in row-major order, index `4 i + j`.
    pub fn to_vector(&self) -> [C64; 16] {
        let mut v = [ZERO; 16];
        for i in 0..4 {
            for j in 0..4 {
                v[4 * i + j] = self.0[(i, j)];
            }
        }
        v
    }

    pub fn from_vector_unchecked(v: &[C64; 16]) -> Self {
        let mut m = Mat4::zeros();
        for i in 0..4 {
            for j in 0..4 {
                m[(i, j)] = v[4 * i + j];
            }
        }
        DensityMatrix(m)
    }

    /// Largest absolute entry of `self - other`.
    pub fn max_abs_diff(&self, other: &DensityMatrix) -> f64 {
        (self.0 - other.0).max_abs()
    }

    /// The ten independent entries `ρ_ij`, `i ≤ j`, with their labels.
    pub fn upper_triangle(&self) -> impl Iterator<Item = (usize, usize, C64)> + '_ {
        (0..4).flat_map(move |i| (i..4).map(move |j| (i, j, self.0[(i, j)])))
    }
}

/// Coherent part `H'` including the detuning split `±δ/2`.
pub fn hamiltonian_matrix(rates: &DerivedRates, delta: f64) -> Mat4 {
    let wa = rates.delta_omega_a + delta / 2.0;
    let wb = rates.delta_omega_b - delta / 2.0;
    let mut h = Mat4::zeros();
    h[(EE, EE)] = C64::new(wa + wb, 0.0);
    h[(EG, EG)] = C64::new(wa, 0.0);
    h[(GE, GE)] = C64::new(wb, 0.0);
    h[(EG, GE)] = C64::new(rates.g_ab, 0.0);
    h[(GE, EG)] = C64::new(rates.g_ab, 0.0);
    h
}

/// `c ρ d† − ½{d† c, ρ}`
fn cross_dissipator(c: &Mat4, d: &Mat4, rho: &Mat4) -> Mat4 {
    let dd = d.dagger();
    *c * *rho * dd - (dd * *c).anticommutator(rho).scale_re(0.5)
}

/// Right-hand side `dρ/dt` of the master equation.
///
/// Besides the waveguide-mediated terms, `params.gamma_nr` adds independent
/// amplitude damping on each atom and `params.gamma_phi` adds dephasing of
/// the form `(γ_φ/2)(σ_z ρ σ_z − ρ)`, which damps single-atom coherences at
/// rate `γ_φ`. The detuning only enters the Hamiltonian.
pub fn liouvillian_apply(rates: &DerivedRates, params: &PhysicalParams, rho: &Mat4) -> Mat4 {
    let h = hamiltonian_matrix(rates, params.delta);
    let sa = sigma_minus_a();
    let sb = sigma_minus_b();
    let mut out = h.commutator(rho).scale(-I);
    let gamma_a = rates.gamma_a + params.gamma_nr;
    let gamma_b = rates.gamma_b + params.gamma_nr;
    if gamma_a != 0.0 {
        out = out + cross_dissipator(&sa, &sa, rho).scale_re(gamma_a);
    }
    if gamma_b != 0.0 {
        out = out + cross_dissipator(&sb, &sb, rho).scale_re(gamma_b);
    }
    if rates.gamma_coll != 0.0 {
        let cross = cross_dissipator(&sa, &sb, rho) + cross_dissipator(&sb, &sa, rho);
        out = out + cross.scale_re(rates.gamma_coll);
    }
    if params.gamma_phi != 0.0 {
        for z in [sigma_z_a(), sigma_z_b()] {
            out = out + (z * *rho * z - *rho).scale_re(params.gamma_phi / 2.0);
        }
    }
    out
}

/// The Liouvillian as a 16×16 superoperator on row-major vectorized states.
pub fn liouvillian_superoperator(rates: &DerivedRates, params: &PhysicalParams) -> LinearOperator<16> {
    let mut m = Box::new([[ZERO; 16]; 16]);
    for col in 0..16 {
        let mut e = Mat4::zeros();
        e[(col / 4, col % 4)] = ONE;
        let out = liouvillian_apply(rates, params, &e);
        for row in 0..16 {
            m[row][col] = out[(row / 4, row % 4)];
        }
    }
    LinearOperator { matrix: m }
}

/// Integration controls.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct EvolveOptions {
    /// Upper bound on the RK4 step, in the same time units as the grid.
    pub step: f64,
}

impl Default for EvolveOptions {
    fn default() -> Self {
        EvolveOptions { step: 1e-3 }
    }
}

/// Largest `h·‖L‖∞` accepted; RK4 is stable on the real axis up to about 2.78.
const MAX_STABLE_STEP_NORM: f64 = 2.5;
const MAX_STEPS_PER_INTERVAL: f64 = 1e9;

/// Time grid plus the state at each sample.
#[derive(Debug, Clone, PartialEq)]
pub struct Trajectory {
    pub times: Vec<f64>,
    pub states: Vec<DensityMatrix>,
}

impl Trajectory {
    pub fn len(&self) -> usize {
        self.times.len()
    }

    pub fn is_empty(&self) -> bool {
        self.times.is_empty()
    }

    pub fn final_state(&self) -> &DensityMatrix {
        self.states.last().expect("trajectory has at least one sample")
    }

    pub fn concurrence(&self) -> Result<Vec<f64>> {
        self.states.iter().map(entanglement::concurrence).collect()
    }

    /// Checks the density-matrix invariants at every sample, reporting the
    /// first failing time.
    pub fn check_invariants(&self) -> Result<()> {
        for (t, rho) in self.times.iter().zip(&self.states) {
            rho.check_invariants()
                .map_err(|e| Error::InvalidState(format!("at t = {t}: {e}")))?;
        }
        Ok(())
    }
}

fn hermitize(v: &mut [C64; 16]) {
    for i in 0..4 {
        v[5 * i].im = 0.0;
        for j in i + 1..4 {
            let a = v[4 * i + j];
            let b = v[4 * j + i];
            let avg = (a + b.conj()) * 0.5;
            v[4 * i + j] = avg;
            v[4 * j + i] = avg.conj();
        }
    }
}

pub(crate) fn validate_grid(t_grid: &[f64], name: &str) -> Result<()> {
    if t_grid.is_empty() {
        return Err(Error::InvalidParameter(format!("{name} must not be empty")));
    }
    if t_grid.iter().any(|t| !t.is_finite()) {
        return Err(Error::InvalidParameter(format!("{name} contains non-finite values")));
    }
    if t_grid.windows(2).any(|w| w[1] <= w[0]) {
        return Err(Error::InvalidParameter(format!("{name} must be strictly increasing")));
    }
    Ok(())
}

/// Integrate the master equation from `initial` and sample it on `t_grid`,
/// which must start at 0. Each grid interval is split into the smallest
/// number of equal RK4 steps no longer than `options.step`; after each step
/// the state is replaced by its Hermitian part.
pub fn evolve(
    initial: &DensityMatrix,
    rates: &DerivedRates,
    params: &PhysicalParams,
    t_grid: &[f64],
    options: &EvolveOptions,
) -> Result<Trajectory> {
    params.validate()?;
    validate_grid(t_grid, "time grid")?;
    if t_grid[0] != 0.0 {
        return Err(Error::InvalidParameter(format!("time grid must start at 0, got {}", t_grid[0])));
    }
    initial.check_invariants()?;
    let step = options.step;
    if !(step.is_finite() && step > 0.0) {
        return Err(Error::StepSize(format!("step must be positive and finite, got {step}")));
    }
    let generator = liouvillian_superoperator(rates, params);
    let norm = generator.inf_norm();
    if step * norm > MAX_STABLE_STEP_NORM {
        return Err(Error::StepSize(format!(
            "step {step} too large for Liouvillian norm {norm:.3} (h*|L| must be <= {MAX_STABLE_STEP_NORM})"
        )));
    }

    let mut states = Vec::with_capacity(t_grid.len());
    states.push(*initial);
    let mut v = initial.to_vector();
    let mut cached: Option<SparseMap<16>> = None;
    for w in t_grid.windows(2) {
        let dt = w[1] - w[0];
        let n = (dt / step * (1.0 - 1e-12)).ceil().max(1.0);
        if n > MAX_STEPS_PER_INTERVAL {
            return Err(Error::StepSize(format!("interval {dt} needs {n:e} steps of size {step}")));
        }
        let h = dt / n;
        // grids built by linspace have intervals differing by a few ulps
        let reuse = matches!(&cached, Some(p) if (p.step() - h).abs() <= 1e-12 * h);
        if !reuse {
            cached = Some(generator.rk4_step_map(h));
        }
        let propagator = cached.as_ref().expect("propagator was just built");
        for _ in 0..n as u64 {
            v = propagator.apply(&v);
            hermitize(&mut v);
        }
        if v.iter().any(|z| !(z.re.is_finite() && z.im.is_finite())) {
            return Err(Error::StepSize(format!("state diverged before t = {}", w[1])));
        }
        states.push(DensityMatrix::from_vector_unchecked(&v));
    }
    Ok(Trajectory { times: t_grid.to_vec(), states })
}

/// `n` evenly spaced points from `start` to `stop` inclusive.
pub fn linspace(start: f64, stop: f64, n: usize) -> Vec<f64> {
    match n {
        0 => Vec::new(),
        1 => vec![start],
        _ => {
            let step = (stop - start) / (n - 1) as f64;
            (0..n).map(|k| if k == n - 1 { stop } else { start + k as f64 * step }).collect()
        }
    }
}
