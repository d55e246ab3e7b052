//! Small dense complex linear algebra used by the kernel and spectral code.

use nalgebra::{DMatrix, DVector};
use num_complex::Complex64;

/// Square complex matrix stored row-major.
#[derive(Debug, Clone, PartialEq)]
pub struct CMat {
    pub n: usize,
    pub data: Vec<Complex64>,
}

impl CMat {
    pub fn zeros(n: usize) -> CMat {
        CMat {
            n,
            data: vec![Complex64::new(0.0, 0.0); n * n],
        }
    }

    pub fn from_fn(n: usize, mut f: impl FnMut(usize, usize) -> Complex64) -> CMat {
        let mut m = CMat::zeros(n);
        for i in 0..n {
            for j in 0..n {
                m.data[i * n + j] = f(i, j);
            }
        }
        m
    }

    #[inline]
    pub fn get(&self, i: usize, j: usize) -> Complex64 {
        self.data[i * self.n + j]
    }

    #[inline]
    pub fn set(&mut self, i: usize, j: usize, v: Complex64) {
        self.data[i * self.n + j] = v;
    }

    /// Determinant by LU factorisation with partial pivoting.
    pub fn det(&self) -> Complex64 {
        let n = self.n;
        let mut a = self.data.clone();
        let mut det = Complex64::new(1.0, 0.0);
        for col in 0..n {
            let pivot = (col..n)
                .max_by(|&r, &s| a[r * n + col].norm().total_cmp(&a[s * n + col].norm()))
                .unwrap_or(col);
            let pv = a[pivot * n + col];
            if pv.norm() == 0.0 {
                return Complex64::new(0.0, 0.0);
            }
            if pivot != col {
                for j in 0..n {
                    a.swap(pivot * n + j, col * n + j);
                }
                det = -det;
            }
            det *= pv;
            let inv = pv.inv();
            for r in col + 1..n {
                let factor = a[r * n + col] * inv;
                if factor.norm() == 0.0 {
                    continue;
                }
                for j in col + 1..n {
                    let v = a[col * n + j];
                    a[r * n + j] -= factor * v;
                }
            }
        }
        det
    }

    /// Pivots `d_{k+1}/d_k` of the leading principal minors of a hermitian
    /// positive semidefinite matrix, from an unpivoted Cholesky sweep.
    ///
    /// Stops early (returning fewer pivots) once a pivot drops to `floor`.
    pub fn cholesky_pivots(&self, floor: f64) -> Vec<f64> {
        let n = self.n;
        let mut l = vec![Complex64::new(0.0, 0.0); n * n];
        let mut pivots = Vec::with_capacity(n);
        for j in 0..n {
            let mut d = self.get(j, j).re;
            for k in 0..j {
                d -= l[j * n + k].norm_sqr();
            }
            if d <= floor {
                break;
            }
            pivots.push(d);
            let s = d.sqrt();
            l[j * n + j] = Complex64::new(s, 0.0);
            for i in j + 1..n {
                let mut v = self.get(i, j);
                for k in 0..j {
                    v -= l[i * n + k] * l[j * n + k].conj();
                }
                l[i * n + j] = v / s;
            }
        }
        pivots
    }

    fn to_nalgebra(&self) -> DMatrix<Complex64> {
        DMatrix::from_row_slice(self.n, self.n, &self.data)
    }

    /// Eigenvalues of a hermitian matrix, ascending.
    pub fn hermitian_eigenvalues(&self) -> Vec<f64> {
        if self.n == 0 {
            return Vec::new();
        }
        let mut ev: Vec<f64> = self.to_nalgebra().symmetric_eigenvalues().iter().copied().collect();
        ev.sort_by(f64::total_cmp);
        ev
    }

    /// `cᴴ G⁺ c` for hermitian `G`, with eigenvalues below
    /// `rel_cutoff · λ_max` discarded.
    pub fn pinv_quadratic_form(&self, c: &[Complex64], rel_cutoff: f64) -> f64 {
        if self.n == 0 {
            return 0.0;
        }
        let eig = self.to_nalgebra().symmetric_eigen();
        let lmax = eig.eigenvalues.iter().fold(0.0f64, |m, v| m.max(v.abs()));
        if lmax == 0.0 {
            return 0.0;
        }
        let cv = DVector::from_column_slice(c);
        let proj = eig.eigenvectors.adjoint() * cv;
        eig.eigenvalues
            .iter()
            .zip(proj.iter())
            .filter(|(l, _)| **l > rel_cutoff * lmax)
            .map(|(l, p)| p.norm_sqr() / l)
            .sum()
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn c(re: f64) -> Complex64 {
        Complex64::new(re, 0.0)
    }

    #[test]
    fn det_of_small_matrices() {
        let m = CMat::from_fn(2, |i, j| c([[1.0, 2.0], [3.0, 4.0]][i][j]));
        assert!((m.det() - c(-2.0)).norm() < 1e-14);
        let m = CMat::from_fn(3, |i, j| c([[0.0, 1.0, 0.0], [0.0, 0.0, 1.0], [1.0, 0.0, 0.0]][i][j]));
        assert!((m.det() - c(1.0)).norm() < 1e-14);
    }

    #[test]
    fn cholesky_pivots_are_minor_ratios() {
        // sin^2 Toeplitz matrix: d1 = 1/2, d2 = 3/16, d3 = 1/16
        let t = |i: usize, j: usize| match (i as i64 - j as i64).abs() {
            0 => c(0.5),
            1 => c(-0.25),
            _ => c(0.0),
        };
        let m = CMat::from_fn(3, t);
        let p = m.cholesky_pivots(0.0);
        assert!((p[0] - 0.5).abs() < 1e-15);
        assert!((p[1] - 0.375).abs() < 1e-15);
        assert!((p[2] - 1.0 / 3.0).abs() < 1e-15);
    }

    #[test]
    fn pseudo_inverse_drops_null_space() {
        let m = CMat::from_fn(2, |_, _| c(1.0));
        let q = m.pinv_quadratic_form(&[c(1.0), c(1.0)], 1e-12);
        assert!((q - 1.0).abs() < 1e-12);
    }
}
