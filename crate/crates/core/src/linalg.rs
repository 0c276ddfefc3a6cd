//! Small dense helpers shared by the Hodge machinery and the interpolation step.

use nalgebra::{DMatrix, SymmetricEigen};

/// Moore-Penrose pseudoinverse with singular values below `rel_tol * sigma_max` treated as zero.
///
/// The SVD comes from faer: nalgebra's SVD loses about five digits on
/// rank-deficient incidence matrices.
pub fn pseudo_inverse(m: &DMatrix<f64>, rel_tol: f64) -> DMatrix<f64> {
    let (rows, cols) = m.shape();
    if rows == 0 || cols == 0 {
        return DMatrix::zeros(cols, rows);
    }
    let fm = faer::Mat::<f64>::from_fn(rows, cols, |r, c| m[(r, c)]);
    let svd = match fm.thin_svd() {
        Ok(svd) => svd,
        Err(_) => panic!("SVD failed to converge on a {rows}x{cols} matrix"),
    };
    let (u, s, v) = (svd.U(), svd.S().column_vector(), svd.V());
    let k = s.nrows();
    let sigma_max = (0..k).map(|i| s[i]).fold(0.0_f64, f64::max);
    let mut out = DMatrix::zeros(cols, rows);
    if sigma_max <= 0.0 {
        return out;
    }
    let cutoff = rel_tol * sigma_max;
    for i in 0..k {
        let sigma = s[i];
        if sigma <= cutoff {
            continue;
        }
        let inv = 1.0 / sigma;
        for c in 0..rows {
            let uc = u[(c, i)] * inv;
            if uc == 0.0 {
                continue;
            }
            for r in 0..cols {
                out[(r, c)] += v[(r, i)] * uc;
            }
        }
    }
    out
}

/// Applies the pseudoinverse of a symmetric PSD matrix to `rhs`, using its
/// eigendecomposition and dropping eigenvalues below `rel_tol * lambda_max`.
pub fn sym_psd_pinv_solve(a: &DMatrix<f64>, rhs: &DMatrix<f64>, rel_tol: f64) -> DMatrix<f64> {
    sym_psd_pinv_solve_scaled(a, rhs, rel_tol, 0.0)
}

/// Like [`sym_psd_pinv_solve`], with the cutoff taken relative to
/// `max(lambda_max, scale_floor)`. Used when `a` is one diagonal block of a
/// larger system whose spectrum reaches `scale_floor`.
pub fn sym_psd_pinv_solve_scaled(
    a: &DMatrix<f64>,
    rhs: &DMatrix<f64>,
    rel_tol: f64,
    scale_floor: f64,
) -> DMatrix<f64> {
    let n = a.nrows();
    assert_eq!(n, a.ncols(), "system matrix must be square");
    assert_eq!(n, rhs.nrows(), "rhs rows must match the system");
    if n == 0 {
        return DMatrix::zeros(0, rhs.ncols());
    }
    let eig = SymmetricEigen::new(a.clone());
    let lambda_max = eig.eigenvalues.iter().cloned().fold(scale_floor, f64::max);
    if lambda_max <= 0.0 {
        return DMatrix::zeros(n, rhs.ncols());
    }
    let cutoff = rel_tol * lambda_max;
    let u = &eig.eigenvectors;
    let mut coeffs = u.transpose() * rhs;
    for (k, &lam) in eig.eigenvalues.iter().enumerate() {
        let scale = if lam > cutoff { 1.0 / lam } else { 0.0 };
        coeffs.row_mut(k).scale_mut(scale);
    }
    u * coeffs
}

/// Smallest eigenvalue of a symmetric matrix (0 for an empty matrix).
pub fn min_eigenvalue(a: &DMatrix<f64>) -> f64 {
    if a.nrows() == 0 {
        return 0.0;
    }
    SymmetricEigen::new(a.clone()).eigenvalues.min()
}
