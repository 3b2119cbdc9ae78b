//! Small dense complex linear-algebra helpers on top of nalgebra.

use nalgebra::{DMatrix, DVector};
use num_complex::Complex64;

pub type CMat = DMatrix<Complex64>;
pub type CVec = DVector<Complex64>;

/// Relative singular-value tolerance used for rank decisions throughout.
pub const RANK_TOL: f64 = 1e-10;

/// Result of a tolerance-aware inversion.
#[derive(Debug, Clone)]
pub struct Inverse {
    pub matrix: CMat,
    pub rank: usize,
    /// True when the input was numerically singular and the
    /// Moore-Penrose pseudo-inverse was returned instead.
    pub pseudo: bool,
}

pub fn singular_values(m: &CMat) -> Vec<f64> {
    if m.is_empty() {
        return Vec::new();
    }
    m.clone().svd(false, false).singular_values.iter().copied().collect()
}

/// Number of singular values above `rel_tol * sigma_max`.
pub fn numerical_rank(m: &CMat, rel_tol: f64) -> usize {
    let sv = singular_values(m);
    let smax = sv.iter().copied().fold(0.0, f64::max);
    if smax == 0.0 {
        return 0;
    }
    sv.iter().filter(|&&s| s > rel_tol * smax).count()
}

/// Moore-Penrose pseudo-inverse, discarding singular values below
/// `rel_tol * sigma_max`. Returns the inverse and the retained rank.
pub fn pinv(m: &CMat, rel_tol: f64) -> (CMat, usize) {
    let (r, c) = m.shape();
    if m.is_empty() {
        return (CMat::zeros(c, r), 0);
    }
    let svd = m.clone().svd(true, true);
    let u = svd.u.as_ref().expect("svd computed u");
    let v_t = svd.v_t.as_ref().expect("svd computed v_t");
    let smax = svd.singular_values.iter().copied().fold(0.0, f64::max);
    let mut out = CMat::zeros(c, r);
    let mut rank = 0;
    if smax == 0.0 {
        return (out, 0);
    }
    for (i, &s) in svd.singular_values.iter().enumerate() {
        if s <= rel_tol * smax {
            continue;
        }
        rank += 1;
        // out += v_i * (1/s) * u_i^H
        let vi = v_t.row(i).adjoint();
        let ui_h = u.column(i).adjoint();
        out += (vi * ui_h).map(|z| z / s);
    }
    (out, rank)
}

/// Inverse of a square matrix, falling back to the pseudo-inverse when the
/// numerical rank (relative tolerance `rel_tol`) is deficient.
pub fn inverse_or_pinv(m: &CMat, rel_tol: f64) -> Inverse {
    assert!(m.is_square(), "inverse_or_pinv needs a square matrix");
    let n = m.nrows();
    let rank = numerical_rank(m, rel_tol);
    if rank == n {
        if let Some(inv) = m.clone().try_inverse() {
            return Inverse {
                matrix: inv,
                rank,
                pseudo: false,
            };
        }
    }
    let (matrix, rank) = pinv(m, rel_tol);
    Inverse {
        matrix,
        rank,
        pseudo: true,
    }
}

/// Largest singular value.
pub fn spectral_norm(m: &CMat) -> f64 {
    singular_values(m).into_iter().fold(0.0, f64::max)
}

pub fn frobenius_sq(m: &CMat) -> f64 {
    m.iter().map(|z| z.norm_sqr()).sum()
}

/// Real matrix promoted to complex.
pub fn to_complex(m: &DMatrix<f64>) -> CMat {
    m.map(|x| Complex64::new(x, 0.0))
}
