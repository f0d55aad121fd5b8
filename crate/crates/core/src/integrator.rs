//! Classic fixed-step fourth-order Runge–Kutta.

use crate::linalg::{C64, ZERO};

fn axpy<const N: usize>(y: &[C64; N], a: f64, x: &[C64; N]) -> [C64; N] {
    let mut out = *y;
    for (o, xi) in out.iter_mut().zip(x) {
        *o += xi * a;
    }
    out
}

/// Advance `y' = f(y)` by one RK4 step of size `h`.
pub fn rk4_step<const N: usize, F>(f: F, y: &[C64; N], h: f64) -> [C64; N]
where
    F: Fn(&[C64; N]) -> [C64; N],
{
    let k1 = f(y);
    let k2 = f(&axpy(y, h / 2.0, &k1));
    let k3 = f(&axpy(y, h / 2.0, &k2));
    let k4 = f(&axpy(y, h, &k3));
    let mut out = *y;
    for i in 0..N {
        out[i] += (k1[i] + (k2[i] + k3[i]) * 2.0 + k4[i]) * (h / 6.0);
    }
    out
}

/// Dense linear map `y' = A y`.
#[derive(Debug, Clone, PartialEq)]
pub struct LinearOperator<const N: usize> {
    pub matrix: Box<[[C64; N]; N]>,
}

impl<const N: usize> LinearOperator<N> {
    pub fn apply(&self, v: &[C64; N]) -> [C64; N] {
        let mut out = [ZERO; N];
        for (o, row) in out.iter_mut().zip(self.matrix.iter()) {
            *o = row.iter().zip(v).map(|(a, b)| a * b).sum();
        }
        out
    }

    /// Maximum absolute row sum; bounds the spectral radius from above.
    pub fn inf_norm(&self) -> f64 {
        self.matrix
            .iter()
            .map(|row| row.iter().map(|z| z.norm()).sum::<f64>())
            .fold(0.0, f64::max)
    }

    /// The matrix of one RK4 step of size `h`, built by stepping each basis
    /// vector. For an autonomous linear system this map is exact RK4.
    pub fn rk4_step_map(&self, h: f64) -> SparseMap<N> {
        let mut columns = Vec::with_capacity(N);
        for k in 0..N {
            let mut e = [ZERO; N];
            e[k] = C64::new(1.0, 0.0);
            columns.push(rk4_step(|v| self.apply(v), &e, h));
        }
        let mut entries = Vec::new();
        for (row, _) in columns.iter().enumerate().take(N) {
            for (col, column) in columns.iter().enumerate() {
                let z = column[row];
                if z != ZERO {
                    entries.push((row as u16, col as u16, z));
                }
            }
        }
        SparseMap { entries, step: h }
    }
}

/// Sparse square matrix in coordinate form, used for repeated propagation.
#[derive(Debug, Clone, PartialEq)]
pub struct SparseMap<const N: usize> {
    entries: Vec<(u16, u16, C64)>,
    step: f64,
}

impl<const N: usize> SparseMap<N> {
    pub fn step(&self) -> f64 {
        self.step
    }

    pub fn nonzeros(&self) -> usize {
        self.entries.len()
    }

    pub fn apply(&self, v: &[C64; N]) -> [C64; N] {
        let mut out = [ZERO; N];
        for &(r, c, z) in &self.entries {
            out[r as usize] += z * v[c as usize];
        }
        out
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn scalar_decay_has_fourth_order_error() {
        // y' = -y, y(0)=1 integrated to t=1
        let f = |y: &[C64; 1]| [-y[0]];
        let run = |n: usize| {
            let h = 1.0 / n as f64;
            let mut y = [C64::new(1.0, 0.0)];
            for _ in 0..n {
                y = rk4_step(f, &y, h);
            }
            (y[0].re - (-1.0f64).exp()).abs()
        };
        let e1 = run(10);
        let e2 = run(20);
        let order = (e1 / e2).log2();
        assert!((order - 4.0).abs() < 0.2, "observed order {order}");
    }

    #[test]
    fn oscillator_phase() {
        // y' = -i y has solution e^{-it}
        let f = |y: &[C64; 1]| [C64::new(0.0, -1.0) * y[0]];
        let mut y = [C64::new(1.0, 0.0)];
        let h = 1e-3;
        for _ in 0..1000 {
            y = rk4_step(f, &y, h);
        }
        let exact = C64::new(0.0, -1.0).exp();
        assert!((y[0] - exact).norm() < 1e-12);
    }

    #[test]
    fn step_map_equals_direct_stepping() {
        let mut m = [[ZERO; 3]; 3];
        m[0][1] = C64::new(0.3, -1.0);
        m[1][0] = C64::new(-0.2, 0.5);
        m[2][2] = C64::new(-1.5, 0.0);
        m[1][1] = C64::new(-0.7, 0.2);
        let op = LinearOperator { matrix: Box::new(m) };
        let map = op.rk4_step_map(0.05);
        let v = [C64::new(0.1, 0.2), C64::new(-1.0, 0.4), C64::new(0.5, 0.0)];
        let direct = rk4_step(|x| op.apply(x), &v, 0.05);
        let mapped = map.apply(&v);
        for (a, b) in direct.iter().zip(&mapped) {
            assert!((a - b).norm() < 1e-15);
        }
        // the block structure survives: no coupling between {0,1} and {2}
        assert_eq!(map.nonzeros(), 5);
    }
}
