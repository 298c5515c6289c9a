//! Dense linear-algebra helpers shared by the Floquet engine.
//!
//! The propagator step generators are real symmetric tridiagonal matrices,
//! so the hot path goes through LAPACK's divide-and-conquer tridiagonal
//! eigensolver (`dstevd`) rather than a general dense solver. BLAS is pinned
//! to a single thread: reductions must not depend on the thread count, and
//! parallelism is applied at the sweep/tensor level instead.

use ndarray::prelude::*;
use ndarray::LinalgScalar;
use num_complex::Complex64;
use std::sync::Once;

use crate::error::{Error, Result};

extern "C" {
    fn dstevd_(
        jobz: *const u8,
        n: *const i32,
        d: *mut f64,
        e: *mut f64,
        z: *mut f64,
        ldz: *const i32,
        work: *mut f64,
        lwork: *const i32,
        iwork: *mut i32,
        liwork: *const i32,
        info: *mut i32,
    );
    fn openblas_set_num_threads(n: i32);
}

static BLAS_PIN: Once = Once::new();

/// Pin the BLAS backend to one thread. Called by every solver entry point;
/// results must be bitwise independent of the ambient thread configuration.
pub fn pin_blas_single_thread() {
    BLAS_PIN.call_once(|| unsafe { openblas_set_num_threads(1) });
}

/// Eigendecomposition of a real symmetric tridiagonal matrix.
///
/// `diag` has length n, `offdiag` length n-1. Returns eigenvalues in
/// ascending order and the orthogonal eigenvector matrix (column j is the
/// eigenvector of eigenvalue j).
pub fn sym_tridiag_eig(diag: &[f64], offdiag: &[f64]) -> Result<(Array1<f64>, Array2<f64>)> {
    pin_blas_single_thread();
    let n = diag.len();
    if n == 0 || offdiag.len() + 1 != n {
        return Err(Error::DimensionMismatch(format!(
            "tridiagonal sizes: diag {}, offdiag {}",
            n,
            offdiag.len()
        )));
    }
    let ni = n as i32;
    let mut d = diag.to_vec();
    let mut e = offdiag.to_vec();
    e.push(0.0); // LAPACK allows length n workspace for E
    let mut z = vec![0.0f64; n * n];
    let lwork = (1 + 4 * n + n * n) as i32;
    let liwork = (3 + 5 * n) as i32;
    let mut work = vec![0.0f64; lwork as usize];
    let mut iwork = vec![0i32; liwork as usize];
    let mut info: i32 = 0;
    unsafe {
        dstevd_(
            b"V".as_ptr(),
            &ni,
            d.as_mut_ptr(),
            e.as_mut_ptr(),
            z.as_mut_ptr(),
            &ni,
            work.as_mut_ptr(),
            &lwork,
            iwork.as_mut_ptr(),
            &liwork,
            &mut info,
        );
    }
    if info != 0 {
        return Err(Error::Lapack {
            routine: "dstevd",
            info,
        });
    }
    // LAPACK fills Z in column-major order.
    let vecs = Array2::from_shape_vec((n, n).f(), z)
        .map_err(|e| Error::Eigen(e.to_string()))?;
    Ok((Array1::from(d), vecs))
}

/// Max-norm residual ‖U†U − I‖_max.
pub fn unitarity_residual(u: &Array2<Complex64>) -> f64 {
    let gram = u.t().mapv(|x| x.conj()).dot(u);
    let n = gram.nrows();
    let mut worst = 0.0f64;
    for i in 0..n {
        for j in 0..n {
            let target = if i == j {
                Complex64::new(1.0, 0.0)
            } else {
                Complex64::new(0.0, 0.0)
            };
            worst = worst.max((gram[[i, j]] - target).norm());
        }
    }
    worst
}

/// Max-norm of the Hermitian deviation ‖A − A†‖_max.
pub fn hermiticity_residual(a: &Array2<Complex64>) -> f64 {
    let n = a.nrows();
    let mut worst = 0.0f64;
    for i in 0..n {
        for j in 0..n {
            worst = worst.max((a[[i, j]] - a[[j, i]].conj()).norm());
        }
    }
    worst
}

/// Max element magnitude.
pub fn max_abs(a: &Array2<Complex64>) -> f64 {
    a.iter().fold(0.0f64, |m, x| m.max(x.norm()))
}

/// A complex matrix stored as separate real and imaginary parts, so that
/// real orthogonal transforms can run through dgemm instead of zgemm.
#[derive(Clone, Debug)]
pub struct SplitMatrix {
    pub re: Array2<f64>,
    pub im: Array2<f64>,
}

impl SplitMatrix {
    pub fn zeros(rows: usize, cols: usize) -> Self {
        SplitMatrix {
            re: Array2::zeros((rows, cols)),
            im: Array2::zeros((rows, cols)),
        }
    }

    pub fn identity(n: usize) -> Self {
        SplitMatrix {
            re: Array2::eye(n),
            im: Array2::zeros((n, n)),
        }
    }

    pub fn from_complex(m: &Array2<Complex64>) -> Self {
        SplitMatrix {
            re: m.mapv(|x| x.re),
            im: m.mapv(|x| x.im),
        }
    }

    pub fn to_complex(&self) -> Array2<Complex64> {
        let mut out = Array2::zeros(self.re.raw_dim());
        azip!((o in &mut out, &r in &self.re, &i in &self.im) {
            *o = Complex64::new(r, i);
        });
        out
    }

    pub fn ncols(&self) -> usize {
        self.re.ncols()
    }

    pub fn nrows(&self) -> usize {
        self.re.nrows()
    }

    /// Squared 2-norm of each column.
    pub fn column_norms_sq(&self) -> Array1<f64> {
        let mut out = Array1::zeros(self.ncols());
        for (j, mut_sum) in out.iter_mut().enumerate() {
            let mut s = 0.0;
            for i in 0..self.nrows() {
                s += self.re[[i, j]] * self.re[[i, j]] + self.im[[i, j]] * self.im[[i, j]];
            }
            *mut_sum = s;
        }
        out
    }
}

/// BLAS-backed matrix product helper (f64 or Complex64).
pub fn mat_mul<T: LinalgScalar>(a: &ArrayView2<T>, b: &ArrayView2<T>, out: &mut Array2<T>) {
    pin_blas_single_thread();
    ndarray::linalg::general_mat_mul(T::one(), a, b, T::zero(), out);
}

#[cfg(test)]
mod tests {
    use super::*;
    use ndarray_linalg::{Eigh, UPLO};

    #[test]
    fn tridiag_matches_dense_eigh() {
        let diag = [1.0, -0.5, 2.0, 4.0, 0.25];
        let off = [0.7, -1.1, 0.3, 0.9];
        let n = diag.len();
        let (vals, vecs) = sym_tridiag_eig(&diag, &off).unwrap();

        let mut dense = Array2::<f64>::zeros((n, n));
        for i in 0..n {
            dense[[i, i]] = diag[i];
        }
        for i in 0..n - 1 {
            dense[[i, i + 1]] = off[i];
            dense[[i + 1, i]] = off[i];
        }
        let (dvals, _) = dense.eigh(UPLO::Lower).unwrap();
        for (a, b) in vals.iter().zip(dvals.iter()) {
            assert!((a - b).abs() < 1e-12, "{a} vs {b}");
        }
        // eigenvector residual ‖A v − λ v‖
        for j in 0..n {
            let v = vecs.column(j);
            let av = dense.dot(&v);
            for i in 0..n {
                assert!((av[i] - vals[j] * v[i]).abs() < 1e-12);
            }
        }
    }

    #[test]
    fn split_matrix_round_trip() {
        let m = array![
            [Complex64::new(1.0, -2.0), Complex64::new(0.5, 0.0)],
            [Complex64::new(0.0, 3.0), Complex64::new(-1.0, 1.0)]
        ];
        let s = SplitMatrix::from_complex(&m);
        let back = s.to_complex();
        assert_eq!(m, back);
    }
}
