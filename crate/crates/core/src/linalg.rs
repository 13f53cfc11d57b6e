//! Dense complex helpers shared by the modules. Everything here works on
//! `nalgebra` dynamic matrices with `Complex64` entries.

use nalgebra::{ComplexField, DMatrix, DVector};
use num_complex::Complex64;

pub type CMat = DMatrix<Complex64>;
pub type CVec = DVector<Complex64>;

pub const ZERO: Complex64 = Complex64 { re: 0.0, im: 0.0 };
pub const ONE: Complex64 = Complex64 { re: 1.0, im: 0.0 };

#[inline]
pub fn c(re: f64, im: f64) -> Complex64 {
    Complex64::new(re, im)
}

#[inline]
pub fn real(re: f64) -> Complex64 {
    Complex64::new(re, 0.0)
}

/// Hermitian eigendecomposition with eigenvalues in ascending order and the
/// matching eigenvectors as columns.
pub fn eigh(m: &CMat) -> (Vec<f64>, CMat) {
    let n = m.nrows();
    let herm = hermitian_part(m);
    let eig = herm.symmetric_eigen();
    let mut order: Vec<usize> = (0..n).collect();
    order.sort_by(|&a, &b| eig.eigenvalues[a].total_cmp(&eig.eigenvalues[b]));
    let values = order.iter().map(|&i| eig.eigenvalues[i]).collect();
    let vectors = CMat::from_fn(n, n, |r, col| eig.eigenvectors[(r, order[col])]);
    (values, vectors)
}

pub fn eigvalsh(m: &CMat) -> Vec<f64> {
    let mut v: Vec<f64> = hermitian_part(m).symmetric_eigenvalues().iter().copied().collect();
    v.sort_by(f64::total_cmp);
    v
}

pub fn hermitian_part(m: &CMat) -> CMat {
    (m + m.adjoint()).scale(0.5)
}

/// Largest elementwise modulus of `m - m†`.
pub fn hermiticity_deviation(m: &CMat) -> f64 {
    let mut worst = 0.0f64;
    for i in 0..m.nrows() {
        for j in i..m.ncols() {
            worst = worst.max((m[(i, j)] - m[(j, i)].conj()).norm());
        }
    }
    worst
}

pub fn trace(m: &CMat) -> Complex64 {
    m.diagonal().iter().sum()
}

pub fn kron(a: &CMat, b: &CMat) -> CMat {
    a.kronecker(b)
}

pub fn identity(n: usize) -> CMat {
    CMat::identity(n, n)
}

pub fn outer(u: &CVec, v: &CVec) -> CMat {
    u * v.adjoint()
}

pub fn projector(v: &CVec) -> CMat {
    outer(v, v)
}

/// Singular values (descending) with left and right singular vectors as
/// columns, so that `m = Σ s_k u_k v_k†`. Thin: `min(rows, cols)` triples.
pub fn svd(m: &CMat) -> (Vec<f64>, CMat, CMat) {
    jacobi_svd(m)
}

/// [`svd`] for real matrices.
pub fn svd_real(m: &DMatrix<f64>) -> (Vec<f64>, DMatrix<f64>, DMatrix<f64>) {
    jacobi_svd(m)
}

/// One-sided Jacobi SVD. nalgebra's SVD can return factors off by ~1e-2 on
/// rank-deficient input, which breaks the alternating solver and the
/// least-squares fits.
fn jacobi_svd<T>(m: &DMatrix<T>) -> (Vec<f64>, DMatrix<T>, DMatrix<T>)
where
    T: ComplexField<RealField = f64>,
{
    if m.nrows() < m.ncols() {
        let (s, u, v) = jacobi_svd(&m.adjoint());
        return (s, v, u);
    }
    let (rows, n) = (m.nrows(), m.ncols());
    let mut a = m.clone();
    let mut v = DMatrix::<T>::identity(n, n);
    for _ in 0..80 {
        let mut rotated = false;
        for p in 0..n {
            for q in p + 1..n {
                let alpha = a.column(p).norm_squared();
                let beta = a.column(q).norm_squared();
                let gamma = a.column(p).dotc(&a.column(q));
                let g = gamma.clone().modulus();
                if g == 0.0 || g <= f64::EPSILON * (alpha * beta).sqrt() {
                    continue;
                }
                rotated = true;
                let zeta = (beta - alpha) / (2.0 * g);
                let t = zeta.signum() / (zeta.abs() + (1.0 + zeta * zeta).sqrt());
                let cos = 1.0 / (1.0 + t * t).sqrt();
                let sin = cos * t;
                let phase = gamma.unscale(g);
                for mat in [&mut a, &mut v] {
                    for i in 0..mat.nrows() {
                        let (xp, xq) = (mat[(i, p)].clone(), mat[(i, q)].clone());
                        mat[(i, p)] = xp.clone().scale(cos) - (xq.clone() * phase.clone().conjugate()).scale(sin);
                        mat[(i, q)] = (xp * phase.clone()).scale(sin) + xq.scale(cos);
                    }
                }
            }
        }
        if !rotated {
            break;
        }
    }
    let norms: Vec<f64> = (0..n).map(|k| a.column(k).norm()).collect();
    let mut order: Vec<usize> = (0..n).collect();
    order.sort_by(|&x, &y| norms[y].total_cmp(&norms[x]));
    let scale = norms.iter().cloned().fold(0.0, f64::max);
    let mut u = DMatrix::<T>::zeros(rows, n);
    let mut v_sorted = DMatrix::<T>::zeros(n, n);
    let mut s = Vec::with_capacity(n);
    for (col, &k) in order.iter().enumerate() {
        s.push(norms[k]);
        v_sorted.set_column(col, &v.column(k));
        if norms[k] > 0.0 && norms[k] > 1e-14 * scale {
            u.set_column(col, &a.column(k).unscale(norms[k]));
            continue;
        }
        // complete with the standard basis vector least covered so far
        let mut best = DVector::<T>::zeros(rows);
        let mut best_norm = -1.0;
        for j in 0..rows {
            let mut e = DVector::<T>::zeros(rows);
            e[j] = T::one();
            for _ in 0..2 {
                for prev in 0..col {
                    let proj = u.column(prev).dotc(&e);
                    e -= u.column(prev) * proj;
                }
            }
            let en = e.norm();
            if en > best_norm {
                best_norm = en;
                best = e.unscale(en);
            }
        }
        u.set_column(col, &best);
    }
    (s, u, v_sorted)
}

/// Frobenius norm of a complex matrix.
pub fn fro(m: &CMat) -> f64 {
    m.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt()
}

pub fn vec_norm(v: &CVec) -> f64 {
    v.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt()
}

pub fn max_abs_diff(a: &CMat, b: &CMat) -> f64 {
    a.iter()
        .zip(b.iter())
        .map(|(x, y)| (x - y).norm())
        .fold(0.0, f64::max)
}

/// Rotates `v` by a global phase so that its largest-magnitude component is
/// real and positive. Ties go to the lowest index.
pub fn phase_align(v: &CVec) -> CVec {
    let max = v.iter().map(|z| z.norm()).fold(0.0, f64::max);
    if max == 0.0 {
        return v.clone();
    }
    let pivot = v
        .iter()
        .position(|z| z.norm() >= max * (1.0 - 1e-9))
        .unwrap_or(0);
    let phase = v[pivot].conj() / v[pivot].norm();
    v.map(|z| z * phase)
}

/// Inverse square root of a Hermitian PSD matrix restricted to its support
/// above `cutoff`: returns `W` (n × k) with `W† m W = I_k`.
pub fn inv_sqrt_support(m: &CMat, cutoff: f64) -> CMat {
    let (vals, vecs) = eigh(m);
    let keep: Vec<usize> = (0..vals.len()).rev().filter(|&i| vals[i] > cutoff).collect();
    CMat::from_fn(m.nrows(), keep.len(), |r, col| {
        vecs[(r, keep[col])] / vals[keep[col]].sqrt()
    })
}

pub fn matrix_sqrt_psd(m: &CMat) -> CMat {
    let (vals, vecs) = eigh(m);
    let d = CMat::from_diagonal(&CVec::from_iterator(
        vals.len(),
        vals.iter().map(|&x| real(x.max(0.0).sqrt())),
    ));
    &vecs * d * vecs.adjoint()
}
