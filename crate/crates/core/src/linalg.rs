//! Thin wrappers around dense complex kernels: Hermitian eigendecomposition,
//! SVD, PSD matrix functions. All matrices here are small (n ≤ 64), so dense
//! factorizations are cheap and well conditioned.

use nalgebra::{DMatrix, DVector};
use num_complex::Complex;

pub(crate) type C64 = Complex<f64>;
pub(crate) type CMatrix = DMatrix<C64>;
pub(crate) type CVector = DVector<C64>;

pub(crate) fn czero() -> C64 {
    Complex::new(0.0, 0.0)
}

pub(crate) fn cr(x: f64) -> C64 {
    Complex::new(x, 0.0)
}

/// Hermitian eigendecomposition with eigenvalues sorted descending.
/// The input is symmetrised first so that callers may pass matrices that are
/// Hermitian only up to rounding.
pub(crate) fn eigh_desc(m: &CMatrix) -> (Vec<f64>, CMatrix) {
    let n = m.nrows();
    assert_eq!(n, m.ncols(), "eigh requires a square matrix");
    if n == 0 {
        return (Vec::new(), CMatrix::zeros(0, 0));
    }
    let herm = (m + m.adjoint()).scale(0.5);
    let se = nalgebra::SymmetricEigen::new(herm);
    let mut order: Vec<usize> = (0..n).collect();
    order.sort_by(|&a, &b| {
        se.eigenvalues[b]
            .partial_cmp(&se.eigenvalues[a])
            .expect("eigenvalue is NaN")
    });
    let vals: Vec<f64> = order.iter().map(|&i| se.eigenvalues[i]).collect();
    let mut vecs = CMatrix::zeros(n, n);
    for (dst, &src) in order.iter().enumerate() {
        vecs.set_column(dst, &se.eigenvectors.column(src));
    }
    (vals, vecs)
}

/// SVD with singular values sorted descending; returns (u, sigma, v) with
/// `m = u * diag(sigma) * v.adjoint()`.
pub(crate) fn svd(m: &CMatrix) -> (CMatrix, Vec<f64>, CMatrix) {
    let svd = m.clone().svd(true, true);
    let u = svd.u.expect("svd requested u");
    let vt = svd.v_t.expect("svd requested v_t");
    let mut order: Vec<usize> = (0..svd.singular_values.len()).collect();
    order.sort_by(|&a, &b| {
        svd.singular_values[b]
            .partial_cmp(&svd.singular_values[a])
            .expect("singular value is NaN")
    });
    let sigma: Vec<f64> = order.iter().map(|&i| svd.singular_values[i]).collect();
    let mut u_s = CMatrix::zeros(u.nrows(), order.len());
    let mut v_s = CMatrix::zeros(vt.ncols(), order.len());
    for (dst, &src) in order.iter().enumerate() {
        u_s.set_column(dst, &u.column(src));
        v_s.set_column(dst, &vt.row(src).adjoint());
    }
    (u_s, sigma, v_s)
}

/// Apply a real function to a Hermitian matrix through its spectrum.
pub(crate) fn herm_fn(m: &CMatrix, f: impl Fn(f64) -> f64) -> CMatrix {
    let (vals, vecs) = eigh_desc(m);
    let n = m.nrows();
    let mut diag = CMatrix::zeros(n, n);
    for (i, &v) in vals.iter().enumerate() {
        diag[(i, i)] = cr(f(v));
    }
    &vecs * diag * vecs.adjoint()
}

/// Square root of a PSD matrix; eigenvalues in `[-clip, 0)` are treated as 0.
pub(crate) fn sqrt_psd(m: &CMatrix, clip: f64) -> CMatrix {
    herm_fn(m, |v| if v > clip { v.sqrt() } else { 0.0 })
}

/// Moore–Penrose inverse of a general matrix with a relative singular value
/// cutoff.
pub(crate) fn pinv(m: &CMatrix, rel_cutoff: f64) -> CMatrix {
    let (u, sigma, v) = svd(m);
    let top = sigma.first().copied().unwrap_or(0.0);
    let cut = top * rel_cutoff;
    let mut acc = CMatrix::zeros(m.ncols(), m.nrows());
    for (i, &s) in sigma.iter().enumerate() {
        if s > cut && s > 0.0 {
            acc += (v.column(i) * u.column(i).adjoint()) / cr(s);
        }
    }
    acc
}

/// Clamp the singular values of a matrix at 1, turning a numerically
/// slightly-expansive map into an honest contraction.
pub(crate) fn clip_contraction(m: &CMatrix) -> CMatrix {
    let (u, sigma, v) = svd(m);
    let mut acc = CMatrix::zeros(m.nrows(), m.ncols());
    for (i, &s) in sigma.iter().enumerate() {
        let sc = s.min(1.0);
        if sc > 0.0 {
            acc += (u.column(i) * v.column(i).adjoint()).scale(sc);
        }
    }
    acc
}

/// Operator (spectral) norm.
pub(crate) fn op_norm(m: &CMatrix) -> f64 {
    if m.nrows() == 0 || m.ncols() == 0 {
        return 0.0;
    }
    let (_, sigma, _) = svd(m);
    sigma.first().copied().unwrap_or(0.0)
}

/// Trace norm of an arbitrary matrix: sum of singular values.
pub(crate) fn trace_norm(m: &CMatrix) -> f64 {
    let (_, sigma, _) = svd(m);
    sigma.iter().sum()
}

/// Trace norm of a Hermitian matrix: sum of |eigenvalues|. Cheaper and more
/// accurate than the SVD route when Hermiticity is known.
pub(crate) fn trace_norm_herm(m: &CMatrix) -> f64 {
    let (vals, _) = eigh_desc(m);
    vals.iter().map(|v| v.abs()).sum()
}

/// Frobenius norm.
pub(crate) fn fro_norm(m: &CMatrix) -> f64 {
    m.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt()
}

#[cfg(test)]
mod tests {
    use super::*;

    fn c(re: f64, im: f64) -> C64 {
        Complex::new(re, im)
    }

    #[test]
    fn eigh_complex_hermitian() {
        // [[2, i], [-i, 2]] has eigenvalues 3, 1
        let m = CMatrix::from_row_slice(2, 2, &[c(2., 0.), c(0., 1.), c(0., -1.), c(2., 0.)]);
        let (vals, vecs) = eigh_desc(&m);
        assert!((vals[0] - 3.0).abs() < 1e-12);
        assert!((vals[1] - 1.0).abs() < 1e-12);
        let recon = &vecs
            * CMatrix::from_diagonal(&CVector::from_iterator(2, vals.iter().map(|&v| cr(v))))
            * vecs.adjoint();
        assert!(fro_norm(&(recon - m)) < 1e-12);
        // orthonormality
        let gram = vecs.adjoint() * &vecs;
        assert!(fro_norm(&(gram - CMatrix::identity(2, 2))) < 1e-12);
    }

    #[test]
    fn svd_complex_reconstruction() {
        let m = CMatrix::from_row_slice(
            3,
            3,
            &[
                c(1., 2.),
                c(0., -1.),
                c(3., 0.),
                c(0.5, 0.),
                c(-1., 1.),
                c(0., 0.),
                c(2., -2.),
                c(1., 0.),
                c(0., 4.),
            ],
        );
        let (u, sigma, v) = svd(&m);
        let mut s = CMatrix::zeros(3, 3);
        for (i, &x) in sigma.iter().enumerate() {
            s[(i, i)] = cr(x);
        }
        let recon = &u * s * v.adjoint();
        assert!(fro_norm(&(recon - &m)) < 1e-10, "svd reconstruction failed");
        assert!(sigma.windows(2).all(|w| w[0] >= w[1]));
        let gu = u.adjoint() * &u;
        assert!(fro_norm(&(gu - CMatrix::identity(3, 3))) < 1e-10);
    }

    #[test]
    fn sqrt_and_pinv_of_psd() {
        let a = CMatrix::from_row_slice(2, 2, &[c(2., 0.), c(1., 1.), c(1., -1.), c(3., 0.)]);
        let m = &a * a.adjoint();
        let r = sqrt_psd(&m, 1e-12);
        assert!(fro_norm(&(&r * &r - &m)) < 1e-10);
        let p = pinv(&m, 1e-12);
        let id = &m * p;
        assert!(fro_norm(&(id - CMatrix::identity(2, 2))) < 1e-9);
    }


}
