//! Thin wrappers over nalgebra's dense decompositions.

use super::matrix::{CMatrix, C64};
use crate::error::{Error, Result};

/// Eigen-decomposition of a Hermitian matrix: ascending real eigenvalues and
/// the matching orthonormal eigenvectors as columns.
pub fn eigh(h: &CMatrix) -> Result<(Vec<f64>, CMatrix)> {
    if !h.is_square() {
        return Err(Error::Shape(format!("eigh of {:?} matrix", h.shape())));
    }
    let n = h.rows();
    if n == 0 {
        return Ok((vec![], CMatrix::zeros(0, 0)));
    }
    // Symmetrize to keep rounding noise from leaking into the eigenvectors.
    let sym = CMatrix::from_fn(n, n, |i, j| (h[(i, j)] + h[(j, i)].conj()) * 0.5);
    let eig = sym.to_nalgebra().symmetric_eigen();
    let mut order: Vec<usize> = (0..n).collect();
    order.sort_by(|&a, &b| eig.eigenvalues[a].total_cmp(&eig.eigenvalues[b]));
    let vals = order.iter().map(|&k| eig.eigenvalues[k]).collect();
    let vecs = CMatrix::from_fn(n, n, |i, j| eig.eigenvectors[(i, order[j])]);
    Ok((vals, vecs))
}

/// Ascending eigenvalues of a Hermitian matrix.
pub fn eigvalsh(h: &CMatrix) -> Result<Vec<f64>> {
    if !h.is_square() {
        return Err(Error::Shape(format!("eigvalsh of {:?} matrix", h.shape())));
    }
    let n = h.rows();
    if n == 0 {
        return Ok(vec![]);
    }
    let sym = CMatrix::from_fn(n, n, |i, j| (h[(i, j)] + h[(j, i)].conj()) * 0.5);
    let mut v: Vec<f64> = sym
        .to_nalgebra()
        .symmetric_eigenvalues()
        .iter()
        .copied()
        .collect();
    v.sort_by(f64::total_cmp);
    Ok(v)
}

/// Eigenvalues of a general square matrix via the complex Schur form,
/// sorted by decreasing modulus.
pub fn eigenvalues(m: &CMatrix) -> Result<Vec<C64>> {
    if !m.is_square() {
        return Err(Error::Shape(format!(
            "eigenvalues of {:?} matrix",
            m.shape()
        )));
    }
    if m.rows() == 0 {
        return Ok(vec![]);
    }
    let schur = nalgebra::linalg::Schur::try_new(m.to_nalgebra(), 1e-15, 10_000)
        .ok_or_else(|| Error::Dominance("Schur iteration did not converge".into()))?;
    let (_, t) = schur.unpack();
    let mut ev: Vec<C64> = (0..t.nrows()).map(|i| t[(i, i)]).collect();
    ev.sort_by(|a, b| b.norm().total_cmp(&a.norm()));
    Ok(ev)
}

/// Thin QR factorization `m = q r`.
pub fn qr(m: &CMatrix) -> (CMatrix, CMatrix) {
    let qr = m.to_nalgebra().qr();
    (
        CMatrix::from_nalgebra(&qr.q()),
        CMatrix::from_nalgebra(&qr.r()),
    )
}

/// Singular values in decreasing order.
pub fn singular_values(m: &CMatrix) -> Vec<f64> {
    if m.rows() == 0 || m.cols() == 0 {
        return vec![];
    }
    let mut s: Vec<f64> = m.to_nalgebra().singular_values().iter().copied().collect();
    s.sort_by(|a, b| b.total_cmp(a));
    s
}

/// Numerical rank with a tolerance relative to the largest singular value.
pub fn rank(m: &CMatrix, rel_tol: f64) -> usize {
    let s = singular_values(m);
    match s.first() {
        Some(&top) if top > 0.0 => s.iter().filter(|&&x| x > rel_tol * top).count(),
        _ => 0,
    }
}

pub fn determinant(m: &CMatrix) -> C64 {
    m.to_nalgebra().determinant()
}
