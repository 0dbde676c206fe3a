//! Direct solves for tridiagonal systems, real and complex.
//!
//! LU factorisation with partial pivoting in the style of LAPACK's `gttrf`:
//! row interchanges introduce a second superdiagonal but keep the growth
//! factor bounded by 2, so the solves stay backward stable even for the
//! nearly singular shifts used by inverse iteration.

use num_complex::Complex64;

pub(crate) trait Scalar:
    Copy
    + std::ops::Add<Output = Self>
    + std::ops::Sub<Output = Self>
    + std::ops::Mul<Output = Self>
    + std::ops::Div<Output = Self>
{
    const ZERO: Self;
    fn modulus(self) -> f64;
    fn from_f64(x: f64) -> Self;
}

impl Scalar for f64 {
    const ZERO: f64 = 0.0;
    fn modulus(self) -> f64 {
        self.abs()
    }
    fn from_f64(x: f64) -> f64 {
        x
    }
}

impl Scalar for Complex64 {
    const ZERO: Complex64 = Complex64::new(0.0, 0.0);
    fn modulus(self) -> f64 {
        self.norm()
    }
    fn from_f64(x: f64) -> Complex64 {
        Complex64::new(x, 0.0)
    }
}

/// Factored form of a tridiagonal matrix after partial pivoting.
pub(crate) struct TriLu<T> {
    n: usize,
    /// L multipliers.
    dl: Vec<T>,
    /// U diagonal.
    d: Vec<T>,
    /// U first superdiagonal.
    du: Vec<T>,
    /// U second superdiagonal (fill-in from interchanges).
    du2: Vec<T>,
    swapped: Vec<bool>,
}

/// Factor the matrix with subdiagonal `dl`, diagonal `d`, superdiagonal `du`.
///
/// Pivots whose modulus falls below `pivot_floor` are replaced by
/// `pivot_floor`; passing 0 keeps exact singularities (the solve then
/// produces non-finite entries, which callers must detect).
pub(crate) fn factor<T: Scalar>(
    mut dl: Vec<T>,
    mut d: Vec<T>,
    mut du: Vec<T>,
    pivot_floor: f64,
) -> TriLu<T> {
    let n = d.len();
    debug_assert_eq!(dl.len(), n.saturating_sub(1));
    debug_assert_eq!(du.len(), n.saturating_sub(1));
    let mut du2 = vec![T::ZERO; n.saturating_sub(2)];
    let mut swapped = vec![false; n.saturating_sub(1)];

    for i in 0..n.saturating_sub(1) {
        if dl[i].modulus() <= d[i].modulus() {
            if d[i].modulus() < pivot_floor {
                d[i] = T::from_f64(pivot_floor);
            }
            if d[i].modulus() != 0.0 {
                let m = dl[i] / d[i];
                dl[i] = m;
                d[i + 1] = d[i + 1] - m * du[i];
            } else {
                dl[i] = T::ZERO;
            }
        } else {
            swapped[i] = true;
            let m = d[i] / dl[i];
            d[i] = dl[i];
            dl[i] = m;
            let t = du[i];
            du[i] = d[i + 1];
            d[i + 1] = t - m * d[i + 1];
            if i + 2 < n {
                du2[i] = du[i + 1];
                du[i + 1] = T::ZERO - m * du[i + 1];
            }
        }
    }
    if n > 0 && d[n - 1].modulus() < pivot_floor {
        d[n - 1] = T::from_f64(pivot_floor);
    }

    TriLu {
        n,
        dl,
        d,
        du,
        du2,
        swapped,
    }
}

impl<T: Scalar> TriLu<T> {
    /// Solve the factored system in place.
    pub(crate) fn solve(&self, b: &mut [T]) {
        assert_eq!(b.len(), self.n);
        let n = self.n;
        for i in 0..n.saturating_sub(1) {
            if self.swapped[i] {
                b.swap(i, i + 1);
            }
            b[i + 1] = b[i + 1] - self.dl[i] * b[i];
        }
        if n == 0 {
            return;
        }
        b[n - 1] = b[n - 1] / self.d[n - 1];
        if n >= 2 {
            b[n - 2] = (b[n - 2] - self.du[n - 2] * b[n - 1]) / self.d[n - 2];
        }
        for i in (0..n.saturating_sub(2)).rev() {
            b[i] = (b[i] - self.du[i] * b[i + 1] - self.du2[i] * b[i + 2]) / self.d[i];
        }
    }
}

/// y = (shift - H) x for a symmetric tridiagonal H given by `diag`/`off`.
pub(crate) fn shifted_apply(
    diag: &[f64],
    off: &[f64],
    shift: Complex64,
    x: &[Complex64],
) -> Vec<Complex64> {
    let n = diag.len();
    let mut y = vec![Complex64::new(0.0, 0.0); n];
    for i in 0..n {
        let mut acc = (shift - diag[i]) * x[i];
        if i > 0 {
            acc -= off[i - 1] * x[i - 1];
        }
        if i + 1 < n {
            acc -= off[i] * x[i + 1];
        }
        y[i] = acc;
    }
    y
}

pub(crate) fn norm2_c(v: &[Complex64]) -> f64 {
    v.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt()
}

pub(crate) fn norm2_r(v: &[f64]) -> f64 {
    v.iter().map(|x| x * x).sum::<f64>().sqrt()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn real_solve_recovers_rhs() {
        let n = 50;
        let dl: Vec<f64> = (0..n - 1).map(|i| -1.0 + 0.01 * i as f64).collect();
        let d: Vec<f64> = (0..n).map(|i| 2.5 + (i as f64 * 0.7).sin()).collect();
        let du: Vec<f64> = (0..n - 1).map(|i| -1.0 - 0.02 * i as f64).collect();
        let x_true: Vec<f64> = (0..n).map(|i| (i as f64 * 0.3).cos()).collect();

        let mut b = vec![0.0; n];
        for i in 0..n {
            b[i] = d[i] * x_true[i];
            if i > 0 {
                b[i] += dl[i - 1] * x_true[i - 1];
            }
            if i + 1 < n {
                b[i] += du[i] * x_true[i + 1];
            }
        }
        let lu = factor(dl, d, du, 0.0);
        lu.solve(&mut b);
        let err: f64 = b
            .iter()
            .zip(&x_true)
            .map(|(a, b)| (a - b).abs())
            .fold(0.0, f64::max);
        assert!(err < 1e-12, "max err {err}");
    }

    #[test]
    fn complex_solve_residual_small() {
        let n = 200;
        let z = Complex64::new(0.3, 0.05);
        let diag: Vec<f64> = (0..n).map(|i| if i == n / 2 { -4.0 } else { 0.0 }).collect();
        let off = vec![1.0; n - 1];
        let dl: Vec<Complex64> = off.iter().map(|&e| Complex64::new(-e, 0.0)).collect();
        let du = dl.clone();
        let d: Vec<Complex64> = diag.iter().map(|&a| z - a).collect();
        let mut b = vec![Complex64::new(0.0, 0.0); n];
        b[n / 2] = Complex64::new(1.0, 0.0);
        let rhs = b.clone();
        let lu = factor(dl, d, du, 0.0);
        lu.solve(&mut b);
        let ax = shifted_apply(&diag, &off, z, &b);
        let res: f64 = ax
            .iter()
            .zip(&rhs)
            .map(|(a, r)| (a - r).norm())
            .fold(0.0, f64::max);
        assert!(res < 1e-12, "residual {res}");
    }
}
