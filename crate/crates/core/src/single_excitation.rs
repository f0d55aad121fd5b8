//! Non-Hermitian dynamics inside the single-excitation block and the
//! analytic concurrences for an initially excited atom `a`.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::linalg::{CMat, Mat2, C64, I, ONE, ZERO};
use crate::rates::{canonical_theta, ConfigKind, DerivedRates};

/// Amplitudes on `(|eg⟩, |ge⟩)`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct AmplitudePair {
    pub c_eg: C64,
    pub c_ge: C64,
}

impl AmplitudePair {
    pub const EG: AmplitudePair = AmplitudePair { c_eg: ONE, c_ge: ZERO };
    pub const GE: AmplitudePair = AmplitudePair { c_eg: ZERO, c_ge: ONE };

    pub fn norm_sqr(&self) -> f64 {
        self.c_eg.norm_sqr() + self.c_ge.norm_sqr()
    }

    /// `2|c_eg c_ge|`, the concurrence of the corresponding two-atom state.
    pub fn concurrence(&self) -> f64 {
        2.0 * (self.c_eg * self.c_ge).norm()
    }

    /// Embed in the four-dimensional two-atom space.
    pub fn full_state(&self) -> [C64; 4] {
        [ZERO, self.c_eg, self.c_ge, ZERO]
    }
}

/// Coherent couplings minus `i/2` times the decay matrix.
pub fn effective_hamiltonian(rates: &DerivedRates, delta: f64) -> Mat2 {
    let half = C64::new(0.0, 0.5);
    let off = rates.g_ab - half * rates.gamma_coll;
    CMat([
        [rates.delta_omega_a + 0.5 * delta - half * rates.gamma_a, off],
        [off, rates.delta_omega_b - 0.5 * delta - half * rates.gamma_b],
    ])
}

/// Below this `|s|` the exponential uses the series form, which also covers
/// the defective case of coinciding eigenvalues.
const SERIES_CUTOFF: f64 = 1e-3;

/// `exp(M)` for a complex 2×2 matrix.
///
/// With `μ = tr M / 2` and `s² = ((m₀₀ − m₁₁)/2)² + m₀₁ m₁₀`,
/// `exp(M) = e^μ [cosh s · I + (sinh s / s)(M − μI)]`.
pub fn expm2(m: &Mat2) -> Mat2 {
    let mu = (m[(0, 0)] + m[(1, 1)]) * 0.5;
    let half_diff = (m[(0, 0)] - m[(1, 1)]) * 0.5;
    let s2 = half_diff * half_diff + m[(0, 1)] * m[(1, 0)];
    let s = s2.sqrt();
    let (cosh_part, sinhc_part) = if s.norm() < SERIES_CUTOFF {
        let e = mu.exp();
        let cosh = ONE + s2 * (0.5 + s2 * (1.0 / 24.0 + s2 / 720.0));
        let sinhc = ONE + s2 * (1.0 / 6.0 + s2 * (1.0 / 120.0 + s2 / 5040.0));
        (e * cosh, e * sinhc)
    } else {
        // fold e^μ into each exponential so large cancelling exponents stay finite
        let up = (mu + s).exp();
        let down = (mu - s).exp();
        ((up + down) * 0.5, (up - down) / (s * 2.0))
    };
    let shifted = CMat([[half_diff, m[(0, 1)]], [m[(1, 0)], -half_diff]]);
    Mat2::identity().scale(cosh_part) + shifted.scale(sinhc_part)
}

/// Solve `i ∂ψ/∂t = H_eff ψ` from `initial` for a time `t`.
pub fn amplitudes(rates: &DerivedRates, delta: f64, t: f64, initial: AmplitudePair) -> AmplitudePair {
    let generator = effective_hamiltonian(rates, delta).scale(-I * t);
    let u = expm2(&generator);
    let out = u.apply(&[initial.c_eg, initial.c_ge]);
    AmplitudePair { c_eg: out[0], c_ge: out[1] }
}

/// Analytic concurrence for the initial state `|eg⟩` at zero detuning.
///
/// The nested form is singular at `θ₀ = π` and is not evaluated there.
pub fn concurrence_closed_form(kind: ConfigKind, theta0: f64, gamma: f64, delta: f64, t: f64) -> Result<f64> {
    if delta != 0.0 {
        return Err(Error::UnsupportedInput(format!(
            "closed-form concurrence exists only for zero detuning, got delta = {delta}"
        )));
    }
    if !(t >= 0.0) || !t.is_finite() {
        return Err(Error::InvalidParameter(format!("time must be finite and nonnegative, got {t}")));
    }
    let theta = canonical_theta(theta0);
    let tau = gamma * t;
    let c = match kind {
        ConfigKind::Separate => separate(theta, tau),
        ConfigKind::Braided => braided(theta, tau),
        ConfigKind::Nested => nested(theta, tau)?,
    };
    Ok(c.clamp(0.0, 1.0))
}

fn separate(theta: f64, tau: f64) -> f64 {
    let half_cos = (0.5 * theta).cos();
    let arg = C64::from_polar(4.0 * half_cos * half_cos * tau, 2.0 * theta);
    (-2.0 * (1.0 + theta.cos()) * tau).exp() * arg.sinh().norm()
}

fn braided(theta: f64, tau: f64) -> f64 {
    let arg = (C64::from_polar(3.0, theta) + C64::from_polar(1.0, 3.0 * theta)) * tau;
    (-4.0 * tau * theta.cos().powi(2)).exp() * arg.sinh().norm()
}

/// Prefactor magnitudes below this are treated as the singular point.
const NESTED_SINGULAR: f64 = 1e-12;

fn nested(theta: f64, tau: f64) -> Result<f64> {
    let (s, c) = theta.sin_cos();
    let denom = 4.0 * (0.5 * theta).cos() * ((3.0 * c - 1.0).powi(2) + 4.0 * s * s).sqrt();
    if denom.abs() < NESTED_SINGULAR {
        return Err(Error::UnsupportedInput(format!(
            "nested closed form is singular at theta0 = {theta}"
        )));
    }
    let e = |phi: f64| C64::from_polar(1.0, phi);
    let a = ((C64::new(5.0, 0.0) - e(theta) * 2.0 + e(2.0 * theta)) * (e(theta) + e(2.0 * theta)).powi(2)).sqrt();
    let half_cos = (0.5 * theta).cos();
    let b = (e(-4.0 * theta) * (8.0 * half_cos * half_cos) * C64::new(3.0 * c - 1.0, 2.0 * s)).sqrt();
    let d = C64::new(2.0 + c + (3.0 * theta).cos(), 0.0);

    // expanded so that no single exponential grows with time
    let x = |rate: C64| (rate * tau).exp();
    let term1 = a * (x(-(a + d)) + x(-d) - x(b - a - d) - x(b - d));
    let term2 = I * 2.0 * e(2.0 * theta) * s
        * (x(-(a + d)) - x(b - a - d) - x(b.conj() - a - d) + x(b + b.conj() - a - d));
    Ok(((term1 + term2) / denom).norm())
}
