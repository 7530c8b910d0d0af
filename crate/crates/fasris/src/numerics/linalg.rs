//! Dense complex matrices and a cyclic Jacobi eigensolver for Hermitian
//! matrices, built for the one job that matters here: the square root of a
//! spatial correlation matrix.
//!
//! Jakes correlation matrices at quarter-wavelength port spacing are close to
//! singular (trailing eigenvalues underflow toward zero), which rules out a
//! plain Cholesky factor. The eigensolver route clamps slightly negative
//! eigenvalues produced by roundoff and yields S = V diag(sqrt(lambda)) V^H
//! with S S^H = R to near machine precision.

use num_complex::Complex64;

use super::NumericsError;

/// Relative PSD clamp: eigenvalues in `[-PSD_CLAMP_REL * lambda_max, 0)` are
/// treated as roundoff and clamped to zero; anything lower is an error.
pub const PSD_CLAMP_REL: f64 = 1e-9;

/// Dense row-major complex matrix.
#[derive(Debug, Clone, PartialEq)]
pub struct ComplexMatrix {
    rows: usize,
    cols: usize,
    data: Vec<Complex64>,
}

impl ComplexMatrix {
    pub fn zeros(rows: usize, cols: usize) -> Self {
        Self {
            rows,
            cols,
            data: vec![Complex64::new(0.0, 0.0); rows * cols],
        }
    }

    pub fn identity(n: usize) -> Self {
        let mut m = Self::zeros(n, n);
        for i in 0..n {
            m[(i, i)] = Complex64::new(1.0, 0.0);
        }
        m
    }

    pub fn from_fn(rows: usize, cols: usize, mut f: impl FnMut(usize, usize) -> Complex64) -> Self {
        let mut data = Vec::with_capacity(rows * cols);
        for r in 0..rows {
            for c in 0..cols {
                data.push(f(r, c));
            }
        }
        Self { rows, cols, data }
    }

    pub fn rows(&self) -> usize {
        self.rows
    }

    pub fn cols(&self) -> usize {
        self.cols
    }

    /// Row `r` as a contiguous slice.
    pub fn row(&self, r: usize) -> &[Complex64] {
        &self.data[r * self.cols..(r + 1) * self.cols]
    }

    pub fn transpose(&self) -> Self {
        Self::from_fn(self.cols, self.rows, |r, c| self[(c, r)])
    }

    pub fn hermitian_transpose(&self) -> Self {
        Self::from_fn(self.cols, self.rows, |r, c| self[(c, r)].conj())
    }

    /// Plain triple-loop product; the matrices here top out at 100x100.
    pub fn mul(&self, rhs: &Self) -> Result<Self, NumericsError> {
        if self.cols != rhs.rows {
            return Err(NumericsError::DimensionMismatch {
                what: "matrix product inner dimension",
                left: self.cols,
                right: rhs.rows,
            });
        }
        let mut out = Self::zeros(self.rows, rhs.cols);
        for r in 0..self.rows {
            for k in 0..self.cols {
                let a = self[(r, k)];
                if a == Complex64::new(0.0, 0.0) {
                    continue;
                }
                let rhs_row = rhs.row(k);
                let out_row = &mut out.data[r * rhs.cols..(r + 1) * rhs.cols];
                for (o, &b) in out_row.iter_mut().zip(rhs_row) {
                    *o += a * b;
                }
            }
        }
        Ok(out)
    }

    pub fn frobenius_norm(&self) -> f64 {
        self.data.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt()
    }

    pub fn max_abs_entry(&self) -> f64 {
        self.data.iter().map(|z| z.norm()).fold(0.0, f64::max)
    }

    /// Largest entrywise |a_ij - b_ij|; panics on shape mismatch.
    pub fn max_abs_diff(&self, other: &Self) -> f64 {
        assert_eq!((self.rows, self.cols), (other.rows, other.cols));
        self.data
            .iter()
            .zip(&other.data)
            .map(|(a, b)| (a - b).norm())
            .fold(0.0, f64::max)
    }

    fn hermitian_deviation(&self) -> f64 {
        let mut dev = 0.0f64;
        for r in 0..self.rows {
            for c in r..self.cols {
                dev = dev.max((self[(r, c)] - self[(c, r)].conj()).norm());
            }
        }
        dev
    }
}

impl std::ops::Index<(usize, usize)> for ComplexMatrix {
    type Output = Complex64;
    #[inline]
    fn index(&self, (r, c): (usize, usize)) -> &Complex64 {
        &self.data[r * self.cols + c]
    }
}

impl std::ops::IndexMut<(usize, usize)> for ComplexMatrix {
    #[inline]
    fn index_mut(&mut self, (r, c): (usize, usize)) -> &mut Complex64 {
        &mut self.data[r * self.cols + c]
    }
}

// ── eigendecomposition ─────────────────────────────────────────────────────

/// Eigendecomposition of a Hermitian matrix by cyclic Jacobi rotations.
///
/// Returns `(eigenvalues, V)` with eigenvalues ascending and the columns of
/// `V` holding the matching orthonormal eigenvectors, so that
/// `A = V diag(lambda) V^H`.
pub fn hermitian_eigen(a: &ComplexMatrix) -> Result<(Vec<f64>, ComplexMatrix), NumericsError> {
    if a.rows != a.cols {
        return Err(NumericsError::NotSquare {
            rows: a.rows,
            cols: a.cols,
        });
    }
    let scale = a.max_abs_entry().max(1.0);
    let dev = a.hermitian_deviation();
    if dev > 1e-12 * scale {
        return Err(NumericsError::NotHermitian { deviation: dev });
    }

    let n = a.rows;
    let mut work = a.clone();
    // Exact hermitization so roundoff in the input cannot bias the sweep.
    for r in 0..n {
        work[(r, r)] = Complex64::new(work[(r, r)].re, 0.0);
        for c in (r + 1)..n {
            let avg = 0.5 * (work[(r, c)] + work[(c, r)].conj());
            work[(r, c)] = avg;
            work[(c, r)] = avg.conj();
        }
    }
    let mut v = ComplexMatrix::identity(n);
    if n == 1 {
        return Ok((vec![work[(0, 0)].re], v));
    }

    let fro = work.frobenius_norm().max(f64::MIN_POSITIVE);
    let target = 1e-14 * fro;
    const MAX_SWEEPS: usize = 42;
    let mut converged = false;
    for _ in 0..MAX_SWEEPS {
        if off_diagonal_norm(&work) <= target {
            converged = true;
            break;
        }
        for p in 0..n - 1 {
            for q in p + 1..n {
                jacobi_rotate(&mut work, &mut v, p, q);
            }
        }
    }
    if !converged && off_diagonal_norm(&work) > target {
        return Err(NumericsError::NoConvergence { sweeps: MAX_SWEEPS });
    }

    let mut order: Vec<usize> = (0..n).collect();
    order.sort_by(|&i, &j| {
        work[(i, i)]
            .re
            .partial_cmp(&work[(j, j)].re)
            .expect("eigenvalues are finite")
    });
    let values: Vec<f64> = order.iter().map(|&i| work[(i, i)].re).collect();
    let vectors = ComplexMatrix::from_fn(n, n, |r, c| v[(r, order[c])]);
    Ok((values, vectors))
}

fn off_diagonal_norm(a: &ComplexMatrix) -> f64 {
    let n = a.rows;
    let mut s = 0.0f64;
    for r in 0..n {
        for c in r + 1..n {
            s += 2.0 * a[(r, c)].norm_sqr();
        }
    }
    s.sqrt()
}

/// One complex Jacobi rotation zeroing the (p, q) element.
///
/// Factor a_pq = r u with |u| = 1; diag(u, 1)^H A diag(u, 1) has a real
/// off-diagonal r, which the classic real rotation annihilates. The combined
/// unitary is J = [[u c, u s], [-s, c]] applied as A <- J^H A J, V <- V J.
fn jacobi_rotate(a: &mut ComplexMatrix, v: &mut ComplexMatrix, p: usize, q: usize) {
    let apq = a[(p, q)];
    let r = apq.norm();
    if r <= f64::MIN_POSITIVE {
        a[(p, q)] = Complex64::new(0.0, 0.0);
        a[(q, p)] = Complex64::new(0.0, 0.0);
        return;
    }
    let u = apq / r;
    let alpha = a[(p, p)].re;
    let beta = a[(q, q)].re;
    let tau = (beta - alpha) / (2.0 * r);
    let t = if tau >= 0.0 {
        1.0 / (tau + (1.0 + tau * tau).sqrt())
    } else {
        -1.0 / (-tau + (1.0 + tau * tau).sqrt())
    };
    let c = 1.0 / (1.0 + t * t).sqrt();
    let s = t * c;

    let jpp = u * c;
    let jpq = u * s;
    let jqp = Complex64::new(-s, 0.0);
    let jqq = Complex64::new(c, 0.0);

    let n = a.rows;
    // A <- A J (columns p, q), then A <- J^H A (rows p, q).
    for i in 0..n {
        let aip = a[(i, p)];
        let aiq = a[(i, q)];
        a[(i, p)] = aip * jpp + aiq * jqp;
        a[(i, q)] = aip * jpq + aiq * jqq;
    }
    for j in 0..n {
        let apj = a[(p, j)];
        let aqj = a[(q, j)];
        a[(p, j)] = jpp.conj() * apj + jqp.conj() * aqj;
        a[(q, j)] = jpq.conj() * apj + jqq.conj() * aqj;
    }
    a[(p, q)] = Complex64::new(0.0, 0.0);
    a[(q, p)] = Complex64::new(0.0, 0.0);
    a[(p, p)] = Complex64::new(alpha - t * r, 0.0);
    a[(q, q)] = Complex64::new(beta + t * r, 0.0);

    for i in 0..v.rows {
        let vip = v[(i, p)];
        let viq = v[(i, q)];
        v[(i, p)] = vip * jpp + viq * jqp;
        v[(i, q)] = vip * jpq + viq * jqq;
    }
}

/// Hermitian PSD square root `S` with `S S^H = A`.
///
/// `tolerance` is the absolute eigenvalue clamp: eigenvalues in
/// `[-tolerance, 0)` are set to zero, anything below `-tolerance` is
/// rejected. `None` selects the default `PSD_CLAMP_REL * lambda_max`.
pub fn hermitian_sqrt(
    a: &ComplexMatrix,
    tolerance: Option<f64>,
) -> Result<ComplexMatrix, NumericsError> {
    let (values, v) = hermitian_eigen(a)?;
    let lambda_max = values.iter().cloned().fold(0.0f64, f64::max);
    let tol = tolerance.unwrap_or(PSD_CLAMP_REL * lambda_max);
    let min = values.iter().cloned().fold(f64::INFINITY, f64::min);
    if min < -tol {
        return Err(NumericsError::NotPositiveSemidefinite {
            min_eigenvalue: min,
            tolerance: tol,
        });
    }
    let roots: Vec<f64> = values.iter().map(|&l| l.max(0.0).sqrt()).collect();
    // S = V diag(sqrt(lambda)) V^H without forming the diagonal matrix.
    let n = a.rows();
    let mut scaled = ComplexMatrix::zeros(n, n);
    for r in 0..n {
        for c in 0..n {
            scaled[(r, c)] = v[(r, c)] * roots[c];
        }
    }
    scaled.mul(&v.hermitian_transpose())
}

// ── tests ──────────────────────────────────────────────────────────────────
