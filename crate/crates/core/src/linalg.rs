//! Small dense complex linear-algebra helpers shared by the other modules.

use nalgebra::{DMatrix, DVector};
use num_complex::Complex64;

use crate::error::{HoloError, Result};

pub type C64 = Complex64;
pub type CMatrix = DMatrix<C64>;
pub type CVector = DVector<C64>;

pub const I: C64 = C64::new(0.0, 1.0);

pub fn c(re: f64, im: f64) -> C64 {
    C64::new(re, im)
}

pub fn frobenius(m: &CMatrix) -> f64 {
    m.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt()
}

/// Largest absolute entry of `a - b`.
pub fn max_abs_diff(a: &CMatrix, b: &CMatrix) -> f64 {
    a.iter()
        .zip(b.iter())
        .map(|(x, y)| (x - y).norm())
        .fold(0.0, f64::max)
}

/// Frobenius norm of `U†U - 1`.
pub fn unitarity_error(u: &CMatrix) -> f64 {
    let n = u.ncols();
    frobenius(&(u.adjoint() * u - CMatrix::identity(n, n)))
}

/// Nearest unitary in Frobenius norm (the unitary factor of the polar
/// decomposition), computed from the SVD as `W V†`.
pub fn polar_unitary(m: &CMatrix) -> CMatrix {
    let svd = m.clone().svd(true, true);
    let u = svd.u.expect("svd u");
    let v_t = svd.v_t.expect("svd v_t");
    u * v_t
}

/// Smallest singular value of a square matrix.
pub fn min_singular_value(m: &CMatrix) -> f64 {
    m.clone()
        .singular_values()
        .iter()
        .cloned()
        .fold(f64::INFINITY, f64::min)
}

/// Rotate the columns of `basis` inside their span so that they are as close
/// as possible to `reference` (orthogonal Procrustes). Both are `n x k` with
/// orthonormal columns. Fails when the overlap is close to singular, i.e. the
/// two spans are nearly orthogonal somewhere.
pub fn procrustes_align(basis: &CMatrix, reference: &CMatrix, min_overlap: f64) -> Result<CMatrix> {
    let overlap = basis.adjoint() * reference;
    let smin = min_singular_value(&overlap);
    if smin < min_overlap {
        return Err(HoloError::GaugeAlignment(smin));
    }
    Ok(basis * polar_unitary(&overlap))
}

/// `min_θ ‖U − e^{iθ} V‖_F`, the distance between two operators with the
/// global phase stripped.
pub fn phase_stripped_distance(u: &CMatrix, v: &CMatrix) -> f64 {
    let overlap = (u.adjoint() * v).trace().norm();
    let sq = u.norm_squared() + v.norm_squared() - 2.0 * overlap;
    sq.max(0.0).sqrt()
}

/// The phase `e^{iθ}` minimising `‖U − e^{iθ} V‖_F`.
pub fn best_phase(u: &CMatrix, v: &CMatrix) -> C64 {
    let t = (v.adjoint() * u).trace();
    if t.norm() == 0.0 {
        C64::new(1.0, 0.0)
    } else {
        t / t.norm()
    }
}

/// Projector `B B†` onto the span of orthonormal columns.
pub fn projector(basis: &CMatrix) -> CMatrix {
    basis * basis.adjoint()
}

/// Modified Gram-Schmidt on the columns; columns that become (numerically)
/// dependent are dropped.
pub fn orthonormalize(m: &CMatrix, drop_tol: f64) -> CMatrix {
    let n = m.nrows();
    let mut cols: Vec<CVector> = Vec::with_capacity(m.ncols());
    for j in 0..m.ncols() {
        let mut v = m.column(j).into_owned();
        for q in &cols {
            let p = q.dotc(&v);
            v -= q * p;
        }
        for q in &cols {
            let p = q.dotc(&v);
            v -= q * p;
        }
        let nrm = v.norm();
        if nrm > drop_tol {
            cols.push(v / C64::new(nrm, 0.0));
        }
    }
    if cols.is_empty() {
        return CMatrix::zeros(n, 0);
    }
    CMatrix::from_columns(&cols)
}

/// Wrap an angle into `(-π, π]`.
pub fn wrap_angle(a: f64) -> f64 {
    use std::f64::consts::PI;
    let mut x = a % (2.0 * PI);
    if x <= -PI {
        x += 2.0 * PI;
    } else if x > PI {
        x -= 2.0 * PI;
    }
    x
}
