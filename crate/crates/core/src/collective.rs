//! Collective single-excitation eigenstates, the transition rates between
//! collective levels, and projection of trajectories onto those levels.
//!
//! The collective states are `|ψ₂⟩ = |ee⟩`, `|ψ₀⟩ = |gg⟩` and the two
//! eigenvectors `|ψ±⟩` of the coherent Hamiltonian inside the
//! single-excitation block. Phase convention: the `|ge⟩` amplitude of `|ψ±⟩`
//! is nonnegative, and when it vanishes the `|eg⟩` amplitude is positive.

use serde::Serialize;

use crate::error::{Error, Result};
use crate::lindblad::{Trajectory, EE, EG, GE, GG};
use crate::linalg::{C64, ZERO};
use crate::rates::DerivedRates;

/// Default degeneracy threshold on Ω, in units of γ.
pub const DEGENERACY_THRESHOLD: f64 = 1e-10;

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct CollectiveBasis {
    /// Ω = sqrt(4 g² + (δω_a − δω_b)²)
    pub omega: f64,
    pub e_plus: f64,
    pub e_minus: f64,
    /// Normalization constants N± of the unnormalized `(α±/g, 2)` vectors.
    /// Zero (or ½) in the decoupled limit `g = 0`.
    pub n_plus: f64,
    pub n_minus: f64,
    /// Amplitudes over `(|eg⟩, |ge⟩)`.
    pub psi_plus: [f64; 2],
    pub psi_minus: [f64; 2],
    /// α± = (δω_a − δω_b) ± Ω
    pub alpha_plus: f64,
    pub alpha_minus: f64,
}

impl CollectiveBasis {
    /// `|ψ±⟩` embedded in the full two-atom space.
    pub fn full_vector(&self, plus: bool) -> [C64; 4] {
        let v = if plus { self.psi_plus } else { self.psi_minus };
        let mut out = [ZERO; 4];
        out[EG] = C64::new(v[0], 0.0);
        out[GE] = C64::new(v[1], 0.0);
        out
    }
}

/// Transition rates of the four-level collective ladder, in units of γ.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct TransitionRates {
    /// Γ_{2+}: |ψ₂⟩ → |ψ+⟩
    pub g2p: f64,
    /// Γ_{2−}: |ψ₂⟩ → |ψ−⟩
    pub g2m: f64,
    /// Γ_{+0}: |ψ+⟩ → |ψ₀⟩
    pub gp0: f64,
    /// Γ_{−0}: |ψ−⟩ → |ψ₀⟩
    pub gm0: f64,
    /// Γ_{+−} = Γ_{−+}: coherence coupling between |ψ+⟩ and |ψ−⟩
    pub gpm: f64,
    /// Δ: coherent coupling between |ψ+⟩ and |ψ−⟩ in the population equations
    pub delta_coh: f64,
}

impl TransitionRates {
    pub const FIELD_NAMES: [&'static str; 6] =
        ["Gamma_2p", "Gamma_2m", "Gamma_p0", "Gamma_m0", "Gamma_pm", "Delta"];

    pub fn as_array(&self) -> [f64; 6] {
        [self.g2p, self.g2m, self.gp0, self.gm0, self.gpm, self.delta_coh]
    }
}

fn checked_omega(rates: &DerivedRates, threshold: f64) -> Result<f64> {
    let omega = rates.level_shift();
    let eps = threshold * rates.gamma;
    if !(omega > eps) {
        return Err(Error::DegenerateBasis { omega, threshold: eps });
    }
    Ok(omega)
}

/// Collective basis with the default degeneracy threshold.
pub fn collective_basis(rates: &DerivedRates) -> Result<CollectiveBasis> {
    collective_basis_with_threshold(rates, DEGENERACY_THRESHOLD)
}

/// Collective basis; fails when Ω ≤ `threshold`·γ.
pub fn collective_basis_with_threshold(rates: &DerivedRates, threshold: f64) -> Result<CollectiveBasis> {
    let omega = checked_omega(rates, threshold)?;
    let d = rates.delta_omega_a - rates.delta_omega_b;
    let g = rates.g_ab;
    let alpha_plus = d + omega;
    let alpha_minus = d - omega;
    let e_plus = 0.5 * (rates.delta_omega_a + rates.delta_omega_b + omega);
    let e_minus = 0.5 * (rates.delta_omega_a + rates.delta_omega_b - omega);

    let normalization = |alpha: f64| {
        if g != 0.0 {
            (4.0 + alpha * alpha / (g * g)).powf(-0.5)
        } else if alpha == 0.0 {
            0.5
        } else {
            0.0
        }
    };

    // Two proportional forms of each eigenvector: (α±, 2g) and (2g, −α∓).
    // Use the longer one so that the decoupled limit stays well defined.
    let vector = |alpha_same: f64, alpha_other: f64| {
        let first = [alpha_same, 2.0 * g];
        let second = [2.0 * g, -alpha_other];
        let n1 = first[0].hypot(first[1]);
        let n2 = second[0].hypot(second[1]);
        let (v, n) = if n1 >= n2 { (first, n1) } else { (second, n2) };
        let mut u = [v[0] / n, v[1] / n];
        if u[1] < 0.0 || (u[1] == 0.0 && u[0] < 0.0) {
            u = [-u[0], -u[1]];
        }
        u
    };

    Ok(CollectiveBasis {
        omega,
        e_plus,
        e_minus,
        n_plus: normalization(alpha_plus),
        n_minus: normalization(alpha_minus),
        psi_plus: vector(alpha_plus, alpha_minus),
        psi_minus: vector(alpha_minus, alpha_plus),
        alpha_plus,
        alpha_minus,
    })
}

/// Transition rates between the collective levels.
///
/// The square roots are taken of the real nonnegative quantities
/// `−α₊α₋ = 4g²` and `−α∓/α±`. The ratio roots are combined as
/// `√(−α₋/α₊) − √(−α₊/α₋) = (|α₋| − |α₊|)/√(−α₊α₋)`, which keeps the
/// expression finite when `g → 0`. The symbols in the coherent coupling Δ are
/// taken to be the same α±.
pub fn transition_rates(rates: &DerivedRates) -> Result<TransitionRates> {
    let omega = checked_omega(rates, DEGENERACY_THRESHOLD)?;
    let d = rates.delta_omega_a - rates.delta_omega_b;
    let g = rates.g_ab;
    let (ga, gb, gc) = (rates.gamma_a, rates.gamma_b, rates.gamma_coll);
    let ap = d + omega;
    let am = d - omega;

    let g2p = (gb * ap - ga * am + 4.0 * g * gc) / (2.0 * omega);
    let g2m = (ga * ap - gb * am - 4.0 * g * gc) / (2.0 * omega);
    let gp0 = (ga * ap - gb * am + 4.0 * g * gc) / (2.0 * omega);
    let gm0 = (gb * ap - ga * am - 4.0 * g * gc) / (2.0 * omega);

    let root_product = (-ap * am).max(0.0).sqrt();
    // g·(√(−α₋/α₊) − √(−α₊/α₋)) with the limit sign(g) := +1 at g = 0, which
    // matches the eigenvector phase convention above
    let sign_g = if g < 0.0 { -1.0 } else { 1.0 };
    let g_times_ratio_diff = sign_g * 0.5 * (am.abs() - ap.abs());
    let gpm = ((ga - gb) * root_product + 2.0 * gc * g_times_ratio_diff) / (4.0 * omega);
    let delta_coh = (d * root_product + 2.0 * g * g_times_ratio_diff) / (2.0 * omega);

    Ok(TransitionRates { g2p, g2m, gp0, gm0, gpm, delta_coh })
}

/// Populations and the `+/−` coherence of one state in the collective basis.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct CollectivePopulations {
    pub rho_22: f64,
    pub rho_pp: f64,
    pub rho_mm: f64,
    pub rho_00: f64,
    pub rho_pm: C64,
}

impl CollectivePopulations {
    pub fn total(&self) -> f64 {
        self.rho_22 + self.rho_pp + self.rho_mm + self.rho_00
    }
}

pub fn project_state(rho: &crate::lindblad::DensityMatrix, basis: &CollectiveBasis) -> CollectivePopulations {
    let plus = basis.full_vector(true);
    let minus = basis.full_vector(false);
    let m = rho.matrix();
    CollectivePopulations {
        rho_22: m[(EE, EE)].re,
        rho_pp: m.sandwich(&plus, &plus).re,
        rho_mm: m.sandwich(&minus, &minus).re,
        rho_00: m[(GG, GG)].re,
        rho_pm: m.sandwich(&plus, &minus),
    }
}

/// Collective populations at every sample of a trajectory.
pub fn collective_populations(traj: &Trajectory, basis: &CollectiveBasis) -> Vec<CollectivePopulations> {
    traj.states.iter().map(|rho| project_state(rho, basis)).collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::lindblad::{evolve, hamiltonian_matrix, linspace, DensityMatrix, EvolveOptions};
    use crate::linalg::{Mat2, CMat};
    use crate::rates::{derive_rates_closed_form, ConfigKind, PhysicalParams};
    use std::f64::consts::{FRAC_1_SQRT_2, PI, TAU};

    fn with(dwa: f64, dwb: f64, g: f64) -> DerivedRates {
        DerivedRates { delta_omega_a: dwa, delta_omega_b: dwb, g_ab: g, ..DerivedRates::zero(1.0) }
    }

    /// Independent oracle: eigen-decomposition of the real symmetric 2×2
    /// single-excitation block by the Jacobi rotation angle.
    fn jacobi_2x2(a: f64, b: f64, g: f64) -> ([f64; 2], [[f64; 2]; 2]) {
        let phi = 0.5 * (2.0 * g).atan2(a - b);
        let (s, c) = phi.sin_cos();
        let l1 = a * c * c + 2.0 * g * s * c + b * s * s;
        let l2 = a * s * s - 2.0 * g * s * c + b * c * c;
        ([l1, l2], [[c, s], [-s, c]])
    }

    fn residual(rates: &DerivedRates, basis: &CollectiveBasis) -> f64 {
        let h = hamiltonian_matrix(rates, 0.0);
        let mut worst: f64 = 0.0;
        for (plus, e) in [(true, basis.e_plus), (false, basis.e_minus)] {
            let v = basis.full_vector(plus);
            let hv = h.apply(&v);
            for k in 0..4 {
                worst = worst.max((hv[k] - v[k] * e).norm());
            }
        }
        worst
    }

    #[test]
    fn symmetric_case_gives_bell_states() {
        let b = collective_basis(&with(0.3, 0.3, 1.0)).unwrap();
        assert!((b.psi_plus[0] - FRAC_1_SQRT_2).abs() < 1e-15);
        assert!((b.psi_plus[1] - FRAC_1_SQRT_2).abs() < 1e-15);
        assert!((b.psi_minus[0] + FRAC_1_SQRT_2).abs() < 1e-15);
        assert!((b.psi_minus[1] - FRAC_1_SQRT_2).abs() < 1e-15);
        assert!((b.e_plus - 1.3).abs() < 1e-15);
        assert!((b.e_minus + 0.7).abs() < 1e-15);
    }

    #[test]
    fn nested_third_pi_matches_jacobi_oracle() {
        let r = derive_rates_closed_form(ConfigKind::Nested, PI / 3.0, 1.0);
        assert!(r.delta_omega_a.abs() < 1e-15);
        assert!((r.delta_omega_b - 3f64.sqrt() / 2.0).abs() < 1e-15);
        let basis = collective_basis(&r).unwrap();
        let (vals, vecs) = jacobi_2x2(r.delta_omega_a, r.delta_omega_b, r.g_ab);
        let (hi, lo) = if vals[0] > vals[1] { (0, 1) } else { (1, 0) };
        assert!((basis.e_plus - vals[hi]).abs() < 1e-12);
        assert!((basis.e_minus - vals[lo]).abs() < 1e-12);
        // compare up to sign
        let overlap_p = (basis.psi_plus[0] * vecs[hi][0] + basis.psi_plus[1] * vecs[hi][1]).abs();
        let overlap_m = (basis.psi_minus[0] * vecs[lo][0] + basis.psi_minus[1] * vecs[lo][1]).abs();
        assert!((overlap_p - 1.0).abs() < 1e-12);
        assert!((overlap_m - 1.0).abs() < 1e-12);
        assert!(residual(&r, &basis) < 1e-10);
        // Ω and the norms of the (α±/g, 2) vectors
        assert!((basis.omega - (4.0 * 3.0 + 0.75f64).sqrt()).abs() < 1e-12);
        let np = basis.n_plus;
        let unnormalized = [basis.alpha_plus / r.g_ab, 2.0];
        let norm = (unnormalized[0].powi(2) + unnormalized[1].powi(2)).sqrt();
        assert!((np * norm - 1.0).abs() < 1e-12);
        assert!((basis.psi_plus[0] - np * unnormalized[0]).abs() < 1e-12);
        assert!((basis.psi_plus[1] - np * unnormalized[1]).abs() < 1e-12);
    }

    #[test]
    fn decoupled_limit() {
        for g in [1e-3, 1e-8, 0.0] {
            let b = collective_basis(&with(0.5, 0.1, g)).unwrap();
            assert!((b.psi_plus[0] - 1.0).abs() < 1e-5 && b.psi_plus[1].abs() < 1e-2);
            assert!(b.psi_minus[0].abs() < 1e-2 && (b.psi_minus[1] - 1.0).abs() < 1e-5);
        }
    }

    #[test]
    fn degenerate_point_is_an_error() {
        let r = derive_rates_closed_form(ConfigKind::Separate, 0.0, 1.0);
        assert!(matches!(collective_basis(&r), Err(Error::DegenerateBasis { .. })));
        assert!(matches!(transition_rates(&r), Err(Error::DegenerateBasis { .. })));
    }

    #[test]
    fn orthonormal_with_small_residual_on_grid() {
        for kind in ConfigKind::ALL {
            for k in 0..256 {
                let theta = (k as f64 + 0.5) * TAU / 256.0;
                let r = derive_rates_closed_form(kind, theta, 1.0);
                let b = collective_basis(&r).unwrap();
                let pp = b.psi_plus[0].powi(2) + b.psi_plus[1].powi(2);
                let mm = b.psi_minus[0].powi(2) + b.psi_minus[1].powi(2);
                let pm = b.psi_plus[0] * b.psi_minus[0] + b.psi_plus[1] * b.psi_minus[1];
                assert!((pp - 1.0).abs() < 1e-12 && (mm - 1.0).abs() < 1e-12 && pm.abs() < 1e-12);
                assert!(residual(&r, &b) <= 1e-10);
            }
        }
    }

    #[test]
    fn separate_near_half_pi_dark_rate() {
        let r = derive_rates_closed_form(ConfigKind::Separate, 0.5001 * PI, 1.0);
        let tr = transition_rates(&r).unwrap();
        let rounded = format!("{:.2e}", tr.gm0);
        assert_eq!(rounded, "3.95e-7");
    }

    #[test]
    fn braided_near_zero() {
        let r = derive_rates_closed_form(ConfigKind::Braided, 1e-4, 1.0);
        let tr = transition_rates(&r).unwrap();
        assert!((tr.g2p - 8.0).abs() < 1e-3 && (tr.gp0 - 8.0).abs() < 1e-3);
        assert!(tr.g2m.abs() < 1e-3 && tr.gm0.abs() < 1e-3);
    }

    #[test]
    fn nested_085_pi_rates() {
        let r = derive_rates_closed_form(ConfigKind::Nested, 0.85 * PI, 1.0);
        let tr = transition_rates(&r).unwrap();
        for (got, want) in [(tr.g2p, 0.99), (tr.g2m, 0.91), (tr.gp0, 1.88), (tr.gm0, 0.03)] {
            assert!((got - want).abs() <= 0.01, "{got} vs {want}");
        }
        assert!(tr.gp0 > tr.g2p && tr.g2p > tr.g2m && tr.g2m > 10.0 * tr.gm0);
    }

    /// The rates follow from the decay matrix D = [[Γa, Γc], [Γc, Γb]] on the
    /// single-excitation block: Γ_{±0} = ψ±ᵀ D ψ± and, by the mirrored
    /// structure of the |ee⟩ decay, Γ_{2±} = ψ±ᵀ D' ψ± with D' = [[Γb, Γc], [Γc, Γa]].
    #[test]
    fn rates_match_decay_matrix_projections() {
        for kind in ConfigKind::ALL {
            for k in 0..64 {
                let theta = (k as f64 + 0.5) * TAU / 64.0;
                let r = derive_rates_closed_form(kind, theta, 1.0);
                let b = collective_basis(&r).unwrap();
                let tr = transition_rates(&r).unwrap();
                let d: Mat2 = CMat::from_real([[r.gamma_a, r.gamma_coll], [r.gamma_coll, r.gamma_b]]);
                let dp: Mat2 = CMat::from_real([[r.gamma_b, r.gamma_coll], [r.gamma_coll, r.gamma_a]]);
                let q = |m: &Mat2, u: [f64; 2], v: [f64; 2]| {
                    m.sandwich(&u.map(|x| C64::new(x, 0.0)), &v.map(|x| C64::new(x, 0.0))).re
                };
                assert!((q(&d, b.psi_plus, b.psi_plus) - tr.gp0).abs() < 1e-10);
                assert!((q(&d, b.psi_minus, b.psi_minus) - tr.gm0).abs() < 1e-10);
                assert!((q(&dp, b.psi_plus, b.psi_plus) - tr.g2p).abs() < 1e-10);
                assert!((q(&dp, b.psi_minus, b.psi_minus) - tr.g2m).abs() < 1e-10);
                assert!((-0.5 * q(&d, b.psi_plus, b.psi_minus) - tr.gpm).abs() < 1e-10);
                assert!(tr.delta_coh.abs() < 1e-10);
            }
        }
    }

    #[test]
    fn literal_ratio_roots_agree_with_combined_form() {
        for k in 0..64 {
            let theta = (k as f64 + 0.5) * TAU / 64.0;
            let r = derive_rates_closed_form(ConfigKind::Nested, theta, 1.0);
            let tr = transition_rates(&r).unwrap();
            let om = r.level_shift();
            let d = r.delta_omega_a - r.delta_omega_b;
            let (ap, am) = (d + om, d - om);
            let literal = ((r.gamma_a - r.gamma_b) * (-ap * am).sqrt()
                + 2.0 * r.g_ab * r.gamma_coll * ((-am / ap).sqrt() - (-ap / am).sqrt()))
                / (4.0 * om);
            assert!((literal - tr.gpm).abs() < 1e-9, "theta={theta}: {literal} vs {}", tr.gpm);
        }
    }

    #[test]
    fn symmetric_geometries_have_no_cross_rates() {
        for kind in [ConfigKind::Separate, ConfigKind::Braided] {
            for k in 0..64 {
                let theta = (k as f64 + 0.5) * TAU / 64.0;
                let tr = transition_rates(&derive_rates_closed_form(kind, theta, 1.0)).unwrap();
                assert!((tr.g2p - tr.gp0).abs() < 1e-12);
                assert!((tr.g2m - tr.gm0).abs() < 1e-12);
                assert!(tr.gpm.abs() < 1e-12);
            }
        }
    }

    #[test]
    fn initial_eg_splits_evenly_for_equal_shifts() {
        let r = derive_rates_closed_form(ConfigKind::Separate, 0.3, 1.0);
        let b = collective_basis(&r).unwrap();
        let p = project_state(&DensityMatrix::basis_state(EG), &b);
        assert!((p.rho_pp - 0.5).abs() < 1e-14 && (p.rho_mm - 0.5).abs() < 1e-14);
    }

    #[test]
    fn doubly_excited_population_is_exponential() {
        let theta = 0.7;
        let r = derive_rates_closed_form(ConfigKind::Nested, theta, 1.0);
        let b = collective_basis(&r).unwrap();
        let t = linspace(0.0, 3.0, 31);
        let traj = evolve(
            &DensityMatrix::basis_state(EE),
            &r,
            &PhysicalParams::new(theta, 1.0),
            &t,
            &EvolveOptions::default(),
        )
        .unwrap();
        for (ti, p) in t.iter().zip(collective_populations(&traj, &b)) {
            let exact = (-(r.gamma_a + r.gamma_b) * ti).exp();
            assert!((p.rho_22 - exact).abs() < 1e-10);
            assert!((p.total() - 1.0).abs() < 1e-9);
            for x in [p.rho_22, p.rho_pp, p.rho_mm, p.rho_00] {
                assert!(x >= -1e-9);
            }
        }
    }
}
