//! Small dense complex matrices and a general complex eigenvalue solver.
//!
//! Everything here is sized at compile time; the simulator only ever needs
//! 2×2 and 4×4 operators.

use std::ops::{Add, Index, IndexMut, Mul, Sub};

use num_complex::Complex64;

use crate::error::{Error, Result};

pub type C64 = Complex64;

pub const ZERO: C64 = C64::new(0.0, 0.0);
pub const ONE: C64 = C64::new(1.0, 0.0);
pub const I: C64 = C64::new(0.0, 1.0);

/// Dense `N`×`N` complex matrix stored row-major.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CMat<const N: usize>(pub [[C64; N]; N]);

pub type Mat2 = CMat<2>;
pub type Mat4 = CMat<4>;

impl<const N: usize> Default for CMat<N> {
    fn default() -> Self {
        Self::zeros()
    }
}

impl<const N: usize> CMat<N> {
    pub fn zeros() -> Self {
        CMat([[ZERO; N]; N])
    }

    pub fn identity() -> Self {
        let mut m = Self::zeros();
        for i in 0..N {
            m.0[i][i] = ONE;
        }
        m
    }

    pub fn from_real(rows: [[f64; N]; N]) -> Self {
        let mut m = Self::zeros();
        for i in 0..N {
            for j in 0..N {
                m.0[i][j] = C64::new(rows[i][j], 0.0);
            }
        }
        m
    }

    pub fn from_diagonal(diag: [C64; N]) -> Self {
        let mut m = Self::zeros();
        for i in 0..N {
            m.0[i][i] = diag[i];
        }
        m
    }

    /// Outer product `|u⟩⟨v|`.
    pub fn outer(u: &[C64; N], v: &[C64; N]) -> Self {
        let mut m = Self::zeros();
        for i in 0..N {
            for j in 0..N {
                m.0[i][j] = u[i] * v[j].conj();
            }
        }
        m
    }

    pub fn dagger(&self) -> Self {
        let mut m = Self::zeros();
        for i in 0..N {
            for j in 0..N {
                m.0[i][j] = self.0[j][i].conj();
            }
        }
        m
    }

    /// Elementwise complex conjugate (not transposed).
    pub fn conj(&self) -> Self {
        let mut m = *self;
        for row in m.0.iter_mut() {
            for z in row.iter_mut() {
                *z = z.conj();
            }
        }
        m
    }

    pub fn scale(&self, s: C64) -> Self {
        let mut m = *self;
        for row in m.0.iter_mut() {
            for z in row.iter_mut() {
                *z *= s;
            }
        }
        m
    }

    pub fn scale_re(&self, s: f64) -> Self {
        self.scale(C64::new(s, 0.0))
    }

    pub fn trace(&self) -> C64 {
        (0..N).map(|i| self.0[i][i]).sum()
    }

    /// Largest absolute entry.
    pub fn max_abs(&self) -> f64 {
        self.0
            .iter()
            .flat_map(|r| r.iter())
            .fold(0.0_f64, |acc, z| acc.max(z.norm()))
    }

    /// `max |A - A†|`.
    pub fn hermiticity_error(&self) -> f64 {
        (*self - self.dagger()).max_abs()
    }

    /// `(A + A†) / 2`.
    pub fn hermitian_part(&self) -> Self {
        (*self + self.dagger()).scale_re(0.5)
    }

    pub fn commutator(&self, other: &Self) -> Self {
        *self * *other - *other * *self
    }

    pub fn anticommutator(&self, other: &Self) -> Self {
        *self * *other + *other * *self
    }

    pub fn apply(&self, v: &[C64; N]) -> [C64; N] {
        let mut out = [ZERO; N];
        for i in 0..N {
            out[i] = (0..N).map(|j| self.0[i][j] * v[j]).sum();
        }
        out
    }

    /// `⟨u|A|v⟩`.
    pub fn sandwich(&self, u: &[C64; N], v: &[C64; N]) -> C64 {
        let av = self.apply(v);
        (0..N).map(|i| u[i].conj() * av[i]).sum()
    }

    /// Eigenvalues of a general complex matrix, unordered.
    pub fn eigenvalues(&self) -> Result<[C64; N]> {
        eigenvalues(self)
    }
}

impl<const N: usize> Index<(usize, usize)> for CMat<N> {
    type Output = C64;
    fn index(&self, (i, j): (usize, usize)) -> &C64 {
        &self.0[i][j]
    }
}

impl<const N: usize> IndexMut<(usize, usize)> for CMat<N> {
    fn index_mut(&mut self, (i, j): (usize, usize)) -> &mut C64 {
        &mut self.0[i][j]
    }
}

impl<const N: usize> Add for CMat<N> {
    type Output = Self;
    fn add(mut self, rhs: Self) -> Self {
        for i in 0..N {
            for j in 0..N {
                self.0[i][j] += rhs.0[i][j];
            }
        }
        self
    }
}

impl<const N: usize> Sub for CMat<N> {
    type Output = Self;
    fn sub(mut self, rhs: Self) -> Self {
        for i in 0..N {
            for j in 0..N {
                self.0[i][j] -= rhs.0[i][j];
            }
        }
        self
    }
}

impl<const N: usize> Mul for CMat<N> {
    type Output = Self;
    fn mul(self, rhs: Self) -> Self {
        let mut out = Self::zeros();
        for i in 0..N {
            for k in 0..N {
                let a = self.0[i][k];
                if a == ZERO {
                    continue;
                }
                for j in 0..N {
                    out.0[i][j] += a * rhs.0[k][j];
                }
            }
        }
        out
    }
}

/// Rotation `G = [[c, s], [-conj(s), c]]` with real `c`, chosen so that
/// `G · [a, b]ᵀ = [r, 0]ᵀ`.
fn givens(a: C64, b: C64) -> (f64, C64) {
    let na = a.norm();
    let nb = b.norm();
    if nb == 0.0 {
        return (1.0, ZERO);
    }
    if na == 0.0 {
        return (0.0, ONE);
    }
    let r = na.hypot(nb);
    let c = na / r;
    let s = (a / na) * b.conj() / r;
    (c, s)
}

/// Reduce to upper Hessenberg form by Householder reflections. The
/// similarity transform itself is not accumulated.
fn hessenberg<const N: usize>(h: &mut [[C64; N]; N]) {
    for k in 0..N.saturating_sub(2) {
        let norm_x: f64 = (k + 1..N).map(|i| h[i][k].norm_sqr()).sum::<f64>().sqrt();
        if norm_x == 0.0 {
            continue;
        }
        let x0 = h[k + 1][k];
        let phase = if x0.norm() == 0.0 { ONE } else { x0 / x0.norm() };
        let mut v = [ZERO; N];
        for i in k + 1..N {
            v[i] = h[i][k];
        }
        v[k + 1] += phase * norm_x;
        let vnorm2: f64 = (k + 1..N).map(|i| v[i].norm_sqr()).sum();
        if vnorm2 == 0.0 {
            continue;
        }
        // H <- (I - 2vv†/v†v) H (I - 2vv†/v†v)
        for j in 0..N {
            let dot: C64 = (k + 1..N).map(|i| v[i].conj() * h[i][j]).sum();
            let f = dot * (2.0 / vnorm2);
            for i in k + 1..N {
                h[i][j] -= v[i] * f;
            }
        }
        for row in h.iter_mut() {
            let dot: C64 = (k + 1..N).map(|j| row[j] * v[j]).sum();
            let f = dot * (2.0 / vnorm2);
            for j in k + 1..N {
                row[j] -= f * v[j].conj();
            }
        }
    }
}

/// Eigenvalues of the trailing 2×2 block `[[a, b], [c, d]]`, returning the one
/// closer to `d` first.
fn eig2(a: C64, b: C64, c: C64, d: C64) -> (C64, C64) {
    let half_tr = (a + d) * 0.5;
    let disc = ((a - d) * 0.5).powi(2) + b * c;
    let s = disc.sqrt();
    let l1 = half_tr + s;
    let l2 = half_tr - s;
    if (l1 - d).norm() <= (l2 - d).norm() {
        (l1, l2)
    } else {
        (l2, l1)
    }
}

const MAX_QR_SWEEPS_PER_EIGENVALUE: usize = 60;

/// Eigenvalues of a general complex square matrix via Hessenberg reduction
/// followed by single-shift QR iteration with Wilkinson shifts and
/// deflation.
pub fn eigenvalues<const N: usize>(m: &CMat<N>) -> Result<[C64; N]> {
    let mut h = m.0;
    if h.iter().flatten().any(|z| !z.re.is_finite() || !z.im.is_finite()) {
        return Err(Error::Numerical("non-finite matrix entry in eigenvalue solve".into()));
    }
    hessenberg(&mut h);
    let mut eig = [ZERO; N];
    if N == 0 {
        return Ok(eig);
    }
    let scale = m.max_abs().max(f64::MIN_POSITIVE);
    let mut hi = N - 1;
    let mut iter = 0usize;
    let mut since_deflation = 0usize;
    loop {
        if hi == 0 {
            eig[0] = h[0][0];
            break;
        }
        // find the start of the unreduced trailing block
        let mut lo = hi;
        while lo > 0 {
            let sub = h[lo][lo - 1].norm();
            let diag = h[lo][lo].norm() + h[lo - 1][lo - 1].norm();
            let tol = f64::EPSILON * if diag > 0.0 { diag } else { scale };
            if sub <= tol {
                h[lo][lo - 1] = ZERO;
                break;
            }
            lo -= 1;
        }
        if lo == hi {
            eig[hi] = h[hi][hi];
            hi -= 1;
            since_deflation = 0;
            continue;
        }
        if lo + 1 == hi {
            let (l1, l2) = eig2(h[lo][lo], h[lo][hi], h[hi][lo], h[hi][hi]);
            eig[hi] = l1;
            eig[lo] = l2;
            if lo == 0 {
                break;
            }
            hi = lo - 1;
            since_deflation = 0;
            continue;
        }
        iter += 1;
        since_deflation += 1;
        if iter > MAX_QR_SWEEPS_PER_EIGENVALUE * N {
            return Err(Error::Numerical("QR iteration did not converge".into()));
        }
        let mut shift = eig2(h[hi - 1][hi - 1], h[hi - 1][hi], h[hi][hi - 1], h[hi][hi]).0;
        if since_deflation % 11 == 10 {
            // exceptional shift to break cycles
            shift = h[hi][hi] + C64::new(0.75 * h[hi][hi - 1].norm(), 0.0);
        }
        qr_sweep(&mut h, lo, hi, shift);
    }
    Ok(eig)
}

/// One explicit shifted QR step `H - μI = QR, H <- RQ + μI` on the active
/// window `lo..=hi` of a Hessenberg matrix.
fn qr_sweep<const N: usize>(h: &mut [[C64; N]; N], lo: usize, hi: usize, shift: C64) {
    for i in lo..=hi {
        h[i][i] -= shift;
    }
    let mut rots = [(1.0_f64, ZERO); N];
    for k in lo..hi {
        let (c, s) = givens(h[k][k], h[k + 1][k]);
        rots[k] = (c, s);
        for j in k..=hi {
            let a = h[k][j];
            let b = h[k + 1][j];
            h[k][j] = a * c + s * b;
            h[k + 1][j] = -s.conj() * a + b * c;
        }
    }
    for k in lo..hi {
        let (c, s) = rots[k];
        // right-multiply columns k, k+1 by G†
        for i in lo..=(k + 1).min(hi) {
            let a = h[i][k];
            let b = h[i][k + 1];
            h[i][k] = a * c + b * s.conj();
            h[i][k + 1] = -a * s + b * c;
        }
    }
    for i in lo..=hi {
        h[i][i] += shift;
    }
}

const MAX_JACOBI_SWEEPS: usize = 64;

/// Eigen-decomposition of a Hermitian matrix by cyclic complex Jacobi
/// rotations. Returns eigenvalues in ascending order and the matching
/// eigenvectors as the columns of the second matrix. Eigenvalues carry an
/// absolute error of order `ε‖A‖`, including those near zero.
pub fn hermitian_eigen<const N: usize>(m: &CMat<N>) -> Result<([f64; N], CMat<N>)> {
    let mut a = m.hermitian_part().0;
    if a.iter().flatten().any(|z| !z.re.is_finite() || !z.im.is_finite()) {
        return Err(Error::Numerical("non-finite matrix entry in eigenvalue solve".into()));
    }
    let mut v = CMat::<N>::identity().0;
    let total: f64 = a.iter().flatten().map(|z| z.norm_sqr()).sum();
    let target = (f64::EPSILON * 1e-2).powi(2) * total;
    let mut converged = false;
    for _ in 0..MAX_JACOBI_SWEEPS {
        let off: f64 = (0..N)
            .flat_map(|i| (0..N).filter(move |&j| j != i).map(move |j| (i, j)))
            .map(|(i, j)| a[i][j].norm_sqr())
            .sum();
        if off <= target {
            converged = true;
            break;
        }
        for p in 0..N {
            for q in p + 1..N {
                let apq = a[p][q];
                let b = apq.norm();
                if b < f64::MIN_POSITIVE {
                    continue;
                }
                let phase = apq / b;
                let tau = (a[q][q].re - a[p][p].re) / (2.0 * b);
                let t = tau.signum() / (tau.abs() + tau.hypot(1.0));
                let c = 1.0 / t.hypot(1.0);
                let s = t * c;
                // J = [[c, s·phase], [-s·conj(phase), c]] on (p, q); A <- J† A J
                let jpq = phase * s;
                let jqp = -phase.conj() * s;
                for row in a.iter_mut() {
                    let (x, y) = (row[p], row[q]);
                    row[p] = x * c + y * jqp;
                    row[q] = x * jpq + y * c;
                }
                for j in 0..N {
                    let (x, y) = (a[p][j], a[q][j]);
                    a[p][j] = x * c + y * jqp.conj();
                    a[q][j] = x * jpq.conj() + y * c;
                }
                a[p][q] = ZERO;
                a[q][p] = ZERO;
                for row in v.iter_mut() {
                    let (x, y) = (row[p], row[q]);
                    row[p] = x * c + y * jqp;
                    row[q] = x * jpq + y * c;
                }
            }
        }
    }
    if !converged {
        return Err(Error::Numerical("Jacobi iteration did not converge".into()));
    }
    let mut order: [usize; N] = std::array::from_fn(|i| i);
    order.sort_by(|&i, &j| a[i][i].re.total_cmp(&a[j][j].re));
    let values = order.map(|i| a[i][i].re);
    let mut vectors = CMat::<N>::zeros();
    for (col, &src) in order.iter().enumerate() {
        for row in 0..N {
            vectors.0[row][col] = v[row][src];
        }
    }
    Ok((values, vectors))
}

/// Eigenvalues of a Hermitian matrix, sorted ascending.
pub fn hermitian_eigenvalues<const N: usize>(m: &CMat<N>) -> Result<[f64; N]> {
    Ok(hermitian_eigen(m)?.0)
}

/// Determinant by Gaussian elimination with partial pivoting.
pub fn determinant<const N: usize>(m: &CMat<N>) -> C64 {
    let mut a = m.0;
    let mut det = ONE;
    for k in 0..N {
        let p = (k..N)
            .max_by(|&x, &y| a[x][k].norm().total_cmp(&a[y][k].norm()))
            .unwrap_or(k);
        if a[p][k] == ZERO {
            return ZERO;
        }
        if p != k {
            a.swap(p, k);
            det = -det;
        }
        det *= a[k][k];
        for i in k + 1..N {
            let f = a[i][k] / a[k][k];
            for j in k..N {
                let akj = a[k][j];
                a[i][j] -= f * akj;
            }
        }
    }
    det
}
