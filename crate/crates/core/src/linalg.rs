//! Small dense complex linear-algebra helpers on top of nalgebra.

use nalgebra::{DMatrix, SymmetricEigen};
use num_complex::Complex64;

use crate::error::{Error, Result};

pub type C64 = Complex64;
pub type CMat = DMatrix<Complex64>;

pub const I: C64 = C64::new(0.0, 1.0);

pub fn c(re: f64, im: f64) -> C64 {
    C64::new(re, im)
}

pub fn identity(n: usize) -> CMat {
    CMat::identity(n, n)
}

/// Frobenius norm.
pub fn fro(m: &CMat) -> f64 {
    m.norm()
}

pub fn dagger(m: &CMat) -> CMat {
    m.adjoint()
}

pub fn hermitian_part(m: &CMat) -> CMat {
    (m + m.adjoint()).scale(0.5)
}

/// `‖M − M†‖_F`.
pub fn hermiticity_residual(m: &CMat) -> f64 {
    (m - m.adjoint()).norm()
}

/// `‖U†U − I‖_F`.
pub fn unitarity_residual(u: &CMat) -> f64 {
    let n = u.nrows();
    (u.adjoint() * u - identity(n)).norm()
}

pub fn ensure_square(m: &CMat) -> Result<usize> {
    if m.nrows() != m.ncols() || m.nrows() == 0 {
        return Err(Error::NonSquare {
            rows: m.nrows(),
            cols: m.ncols(),
        });
    }
    Ok(m.nrows())
}

/// Nearest unitary matrix in Frobenius norm (unitary factor of the polar decomposition).
pub fn polar_unitary(m: &CMat) -> CMat {
    let svd = m.clone().svd(true, true);
    let u = svd.u.expect("svd u requested");
    let v_t = svd.v_t.expect("svd v_t requested");
    u * v_t
}

pub fn singular_values(m: &CMat) -> Vec<f64> {
    let mut s: Vec<f64> = m.clone().singular_values().iter().copied().collect();
    s.sort_by(|a, b| b.partial_cmp(a).unwrap());
    s
}

/// Ratio of largest to smallest singular value (∞ if singular).
pub fn condition_number(m: &CMat) -> f64 {
    let s = singular_values(m);
    let min = *s.last().unwrap_or(&0.0);
    if min == 0.0 {
        f64::INFINITY
    } else {
        s[0] / min
    }
}

/// Eigenvalues (ascending) and eigenvectors of a hermitian matrix.
pub fn hermitian_eigen(m: &CMat) -> (Vec<f64>, CMat) {
    let eig = SymmetricEigen::new(hermitian_part(m));
    let mut idx: Vec<usize> = (0..eig.eigenvalues.len()).collect();
    idx.sort_by(|&a, &b| eig.eigenvalues[a].partial_cmp(&eig.eigenvalues[b]).unwrap());
    let vals = idx.iter().map(|&i| eig.eigenvalues[i]).collect();
    let vecs = CMat::from_fn(m.nrows(), m.ncols(), |r, c| eig.eigenvectors[(r, idx[c])]);
    (vals, vecs)
}

/// Largest eigenvalue magnitude of a hermitian matrix (its operator norm).
pub fn hermitian_norm(m: &CMat) -> f64 {
    let (vals, _) = hermitian_eigen(m);
    vals.iter().fold(0.0_f64, |acc, v| acc.max(v.abs()))
}

/// Applies `f` to the spectrum of a hermitian matrix.
pub fn hermitian_function(m: &CMat, f: impl Fn(f64) -> f64) -> CMat {
    let (vals, vecs) = hermitian_eigen(m);
    let n = m.nrows();
    let d = CMat::from_diagonal(&nalgebra::DVector::from_iterator(
        n,
        vals.iter().map(|&v| C64::new(f(v), 0.0)),
    ));
    &vecs * d * vecs.adjoint()
}

/// `M^{-1/2}` for hermitian positive definite `M` (principal root).
pub fn hpd_inv_sqrt(m: &CMat) -> Result<CMat> {
    let (vals, _) = hermitian_eigen(m);
    let min = vals[0];
    let max = *vals.last().unwrap();
    if !(min > 1e-14 * max.abs().max(1e-300)) {
        return Err(Error::IndefiniteB { min_eigenvalue: min });
    }
    Ok(hermitian_function(m, |v| 1.0 / v.sqrt()))
}

/// Orthogonal projector onto the numerical null space of `m`.
///
/// Singular values below `rel_tol · σ_max` count as zero. Returns the
/// projector and the null-space dimension.
pub fn null_projector(m: &CMat, rel_tol: f64) -> (CMat, usize) {
    let smax = m.clone().singular_values().iter().fold(0.0_f64, |a, &b| a.max(b));
    null_projector_abs(m, rel_tol * smax)
}

/// Projector onto the span of right singular vectors with `σ ≤ tol`.
pub fn null_projector_abs(m: &CMat, tol: f64) -> (CMat, usize) {
    let n = m.ncols();
    let svd = m.clone().svd(false, true);
    let v_t = svd.v_t.expect("v_t requested");
    let mut p = CMat::zeros(n, n);
    let mut dim = 0;
    for (i, &s) in svd.singular_values.iter().enumerate() {
        if s <= tol {
            let row = v_t.row(i);
            // v = row†
            let v = row.adjoint();
            p += &v * v.adjoint();
            dim += 1;
        }
    }
    (p, dim)
}

pub fn try_inverse(m: &CMat) -> Option<CMat> {
    m.clone().try_inverse()
}

/// Dense lower Cholesky factor stored row-major, `A = L L†`.
///
/// Used for the large hermitian Nyström systems where nalgebra's generic
/// decomposition is too slow and we need access to leading blocks.
pub struct LowerCholesky {
    n: usize,
    l: Vec<C64>,
}

impl LowerCholesky {
    /// Factorizes the hermitian matrix given row-major in `a` (only the lower
    /// triangle is read). Fails if a pivot is not positive.
    pub fn factor(mut a: Vec<C64>, n: usize) -> Result<Self> {
        assert_eq!(a.len(), n * n);
        for i in 0..n {
            for j in 0..=i {
                let (head, tail) = a.split_at_mut(i * n);
                let row_i = &tail[..n];
                let row_j: &[C64] = if j == i { row_i } else { &head[j * n..j * n + n] };
                let mut re = 0.0;
                let mut im = 0.0;
                for k in 0..j {
                    let x = row_i[k];
                    let y = row_j[k];
                    // x * conj(y)
                    re += x.re * y.re + x.im * y.im;
                    im += x.im * y.re - x.re * y.im;
                }
                let s = tail[j] - C64::new(re, im);
                if i == j {
                    let d = s.re;
                    if !(d > 0.0) || !d.is_finite() {
                        return Err(Error::IllConditioned { condition: f64::INFINITY });
                    }
                    tail[i] = C64::new(d.sqrt(), 0.0);
                } else {
                    let d = head[j * n + j].re;
                    tail[j] = s / d;
                }
            }
            for j in i + 1..n {
                a[i * n + j] = C64::new(0.0, 0.0);
            }
        }
        Ok(Self { n, l: a })
    }

    pub fn dim(&self) -> usize {
        self.n
    }

    #[inline]
    pub fn get(&self, i: usize, j: usize) -> C64 {
        self.l[i * self.n + j]
    }

    /// Crude condition estimate `(max L_ii / min L_ii)²` over the leading `s` pivots.
    pub fn condition_estimate(&self, s: usize) -> f64 {
        let mut lo = f64::INFINITY;
        let mut hi = 0.0_f64;
        for i in 0..s {
            let d = self.l[i * self.n + i].re;
            lo = lo.min(d);
            hi = hi.max(d);
        }
        (hi / lo).powi(2)
    }

    /// Solves `(L_s L_s†) x = b` in place for the leading `s×s` block.
    pub fn solve_leading(&self, s: usize, b: &mut [C64]) {
        assert!(s <= self.n && b.len() == s);
        let n = self.n;
        for i in 0..s {
            let row = &self.l[i * n..i * n + i];
            let mut acc = b[i];
            for (k, &lik) in row.iter().enumerate() {
                acc -= lik * b[k];
            }
            b[i] = acc / self.l[i * n + i].re;
        }
        for i in (0..s).rev() {
            let acc = b[i] / self.l[i * n + i].re;
            b[i] = acc;
            for (bk, lik) in b[..i].iter_mut().zip(&self.l[i * n..i * n + i]) {
                *bk -= lik.conj() * acc;
            }
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn sample_hpd(n: usize) -> CMat {
        let a = CMat::from_fn(n, n, |i, j| c((i * 3 + j) as f64 * 0.1 - 0.4, ((i + 2 * j) % 5) as f64 * 0.07));
        a.adjoint() * &a + identity(n)
    }

    #[test]
    fn polar_of_scaled_unitary_is_unitary() {
        let u = CMat::from_row_slice(2, 2, &[c(0.0, 1.0), c(0.0, 0.0), c(0.0, 0.0), c(-1.0, 0.0)]);
        let p = polar_unitary(&u.scale(3.0));
        assert!((p - u).norm() < 1e-12);
    }

    #[test]
    fn inv_sqrt_squares_to_inverse() {
        let m = sample_hpd(3);
        let r = hpd_inv_sqrt(&m).unwrap();
        let prod = &r * &r * &m;
        assert!((prod - identity(3)).norm() < 1e-10);
    }

    #[test]
    fn null_projector_finds_kernel() {
        let m = CMat::from_row_slice(2, 2, &[c(1.0, 0.0), c(1.0, 0.0), c(1.0, 0.0), c(1.0, 0.0)]);
        let (p, dim) = null_projector(&m, 1e-8);
        assert_eq!(dim, 1);
        assert!((&p * &p - &p).norm() < 1e-12);
        assert!((&m * &p).norm() < 1e-12);
    }

    #[test]
    fn dense_cholesky_solves_leading_blocks() {
        let n = 6;
        let m = sample_hpd(n);
        let mut a = vec![C64::new(0.0, 0.0); n * n];
        for i in 0..n {
            for j in 0..n {
                a[i * n + j] = m[(i, j)];
            }
        }
        let chol = LowerCholesky::factor(a, n).unwrap();
        for s in [1, 3, 6] {
            let sub = m.view((0, 0), (s, s)).into_owned();
            let b: Vec<C64> = (0..s).map(|i| c(i as f64 + 1.0, -0.5)).collect();
            let mut x = b.clone();
            chol.solve_leading(s, &mut x);
            let xv = nalgebra::DVector::from_vec(x);
            let r = sub * xv - nalgebra::DVector::from_vec(b);
            assert!(r.norm() < 1e-12, "s={s} residual {}", r.norm());
        }
    }

    #[test]
    fn cholesky_rejects_indefinite() {
        let a = vec![c(1.0, 0.0), c(2.0, 0.0), c(2.0, 0.0), c(1.0, 0.0)];
        assert!(LowerCholesky::factor(a, 2).is_err());
    }
}
