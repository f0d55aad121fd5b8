//! Wootters concurrence of a two-qubit state.

use crate::error::{Error, Result};
use crate::lindblad::DensityMatrix;
use crate::linalg::{eigenvalues, hermitian_eigen, hermitian_eigenvalues, CMat, Mat4, C64};

/// Eigenvalues of ρρ̃ are real and nonnegative in exact arithmetic. Residual
/// imaginary parts and negative real parts are dropped up to this size;
/// anything larger is reported as a numerical error.
const SPECTRUM_FAIL: f64 = 1e-8;

/// `σ_y ⊗ σ_y` in the `(|ee⟩, |eg⟩, |ge⟩, |gg⟩)` basis.
fn sigma_y_sigma_y() -> Mat4 {
    Mat4::from_real([
        [0.0, 0.0, 0.0, -1.0],
        [0.0, 0.0, 1.0, 0.0],
        [0.0, 1.0, 0.0, 0.0],
        [-1.0, 0.0, 0.0, 0.0],
    ])
}

/// `ρ̃ = (σ_y⊗σ_y) ρ* (σ_y⊗σ_y)`.
pub fn spin_flip(rho: &Mat4) -> Mat4 {
    let yy = sigma_y_sigma_y();
    yy * rho.conj() * yy
}

/// Eigenvalues of `ρ ρ̃`, cleaned to real nonnegative values and sorted in
/// descending order.
pub fn flip_spectrum(rho: &DensityMatrix) -> Result<[f64; 4]> {
    let m = rho.matrix();
    let product = *m * spin_flip(m);
    let ev = eigenvalues(&product)?;
    let mut out = [0.0; 4];
    for (o, z) in out.iter_mut().zip(ev) {
        if z.im.abs() > SPECTRUM_FAIL || z.re < -SPECTRUM_FAIL || !z.re.is_finite() {
            return Err(Error::Numerical(format!(
                "eigenvalue {z} of rho*rho_tilde is not real and nonnegative"
            )));
        }
        *o = z.re.max(0.0);
    }
    out.sort_by(|a, b| b.total_cmp(a));
    Ok(out)
}

/// Square roots of the flip spectrum, descending.
///
/// These are the singular values of `√ρ (σ_y⊗σ_y) √ρ*`, obtained as the
/// positive half of the spectrum of the Hermitian dilation
/// `[[0, M], [M†, 0]]`. Unlike square roots of computed eigenvalues of `ρρ̃`,
/// small values keep an absolute error of order `ε`.
pub fn flip_singular_values(rho: &DensityMatrix) -> Result<[f64; 4]> {
    let (vals, vecs) = hermitian_eigen(rho.matrix())?;
    let roots = Mat4::from_diagonal(vals.map(|x| C64::new(x.max(0.0).sqrt(), 0.0)));
    let sqrt_rho = vecs * roots * vecs.dagger();
    let m = sqrt_rho * sigma_y_sigma_y() * sqrt_rho.conj();
    let md = m.dagger();
    let mut dilation = CMat::<8>::zeros();
    for i in 0..4 {
        for j in 0..4 {
            dilation[(i, j + 4)] = m[(i, j)];
            dilation[(i + 4, j)] = md[(i, j)];
        }
    }
    let spectrum = hermitian_eigenvalues(&dilation)?;
    let mut out = [0.0; 4];
    for (o, x) in out.iter_mut().zip(spectrum.iter().rev()) {
        *o = x.max(0.0);
    }
    Ok(out)
}

/// Wootters concurrence `max(0, √λ₁ − √λ₂ − √λ₃ − √λ₄)`.
///
/// The spectrum of `ρρ̃` is checked first and an unphysical state is
/// reported as a numerical error.
pub fn concurrence(rho: &DensityMatrix) -> Result<f64> {
    flip_spectrum(rho)?;
    let s = flip_singular_values(rho)?;
    Ok((s[0] - s[1] - s[2] - s[3]).clamp(0.0, 1.0))
}

/// `2|ad − bc|` for a pure state with amplitudes `(a, b, c, d)` on
/// `(|ee⟩, |eg⟩, |ge⟩, |gg⟩)`.
pub fn pure_state_concurrence(amplitudes: &[C64; 4]) -> f64 {
    let [a, b, c, d] = *amplitudes;
    2.0 * (a * d - b * c).norm()
}
