//! Dense complex matrix kernels: exponential, Kronecker algebra, Sylvester
//! solves, eigendecomposition, fractional powers and adaptive quadrature.

mod eig;
mod expm;
mod kron;
mod power;
pub mod quad;
mod sylvester;

pub use eig::{eig, eigenvalues, schur, spectral_abscissa, Eigen};
pub use expm::expm;
pub use kron::{kron, kron_sum, vec_of, unvec};
pub use power::{logm, mat_frac_power, sqrtm};
pub use quad::{quad, quad_with_breaks, QuadOptions, QuadResult};
pub use sylvester::{sylvester, sylvester_vectorized, SylvesterMethod};

use crate::error::{Error, Result};
use nalgebra::{DMatrix, DVector, RowDVector};
pub use num_complex::Complex64 as C64;

pub type Matrix = DMatrix<C64>;
pub type ColVec = DVector<C64>;
pub type RowVec = RowDVector<C64>;

pub const ZERO: C64 = C64 { re: 0.0, im: 0.0 };
pub const ONE: C64 = C64 { re: 1.0, im: 0.0 };

#[inline]
pub fn c(re: f64) -> C64 {
    C64::new(re, 0.0)
}

pub fn from_real(rows: usize, cols: usize, data: &[f64]) -> Matrix {
    Matrix::from_row_iterator(rows, cols, data.iter().map(|&v| c(v)))
}

pub fn from_rows(rows: &[Vec<f64>]) -> Result<Matrix> {
    let n = rows.len();
    let m = rows.first().map_or(0, |r| r.len());
    if rows.iter().any(|r| r.len() != m) {
        return Err(Error::Dimension("ragged matrix rows".into()));
    }
    Ok(Matrix::from_fn(n, m, |i, j| c(rows[i][j])))
}

pub fn row(data: &[f64]) -> RowVec {
    RowVec::from_iterator(data.len(), data.iter().map(|&v| c(v)))
}

pub fn col(data: &[f64]) -> ColVec {
    ColVec::from_iterator(data.len(), data.iter().map(|&v| c(v)))
}

pub fn unit_row(n: usize, k: usize) -> RowVec {
    let mut r = RowVec::zeros(n);
    r[k] = ONE;
    r
}

pub fn unit_col(n: usize, k: usize) -> ColVec {
    let mut r = ColVec::zeros(n);
    r[k] = ONE;
    r
}

pub fn identity(n: usize) -> Matrix {
    Matrix::identity(n, n)
}

/// Induced 1-norm (max column sum).
pub fn norm1(m: &Matrix) -> f64 {
    (0..m.ncols())
        .map(|j| m.column(j).iter().map(|v| v.norm()).sum::<f64>())
        .fold(0.0, f64::max)
}

pub fn max_abs(m: &Matrix) -> f64 {
    m.iter().map(|v| v.norm()).fold(0.0, f64::max)
}

pub fn is_finite(m: &Matrix) -> bool {
    m.iter().all(|v| v.re.is_finite() && v.im.is_finite())
}

pub fn check_finite(m: &Matrix, what: &str) -> Result<()> {
    if is_finite(m) {
        Ok(())
    } else {
        Err(Error::NonFinite(what.into()))
    }
}

pub fn check_square(m: &Matrix, what: &str) -> Result<()> {
    if m.nrows() != m.ncols() {
        return Err(Error::Dimension(format!(
            "{what} is {}x{}, expected square",
            m.nrows(),
            m.ncols()
        )));
    }
    Ok(())
}

/// Solves `A X = B` by LU with partial pivoting, refusing numerically singular `A`.
pub fn solve(a: &Matrix, b: &Matrix) -> Result<Matrix> {
    check_square(a, "coefficient matrix")?;
    if a.nrows() != b.nrows() {
        return Err(Error::Dimension("solve: row mismatch".into()));
    }
    let lu = a.clone().lu();
    let u = lu.u();
    let scale = max_abs(a).max(f64::MIN_POSITIVE);
    let min_piv = (0..u.nrows()).map(|i| u[(i, i)].norm()).fold(f64::INFINITY, f64::min);
    if !(min_piv > scale * 1e-14) {
        return Err(Error::Singular(format!(
            "pivot {min_piv:e} relative to scale {scale:e}"
        )));
    }
    lu.solve(b)
        .ok_or_else(|| Error::Singular("LU solve failed".into()))
}

pub fn solve_vec(a: &Matrix, b: &ColVec) -> Result<ColVec> {
    let m = solve(a, &Matrix::from_column_slice(b.len(), 1, b.as_slice()))?;
    Ok(ColVec::from_column_slice(m.as_slice()))
}

/// Solves `x A = b` for a row vector `x`.
pub fn solve_row(b: &RowVec, a: &Matrix) -> Result<RowVec> {
    let at = a.transpose();
    let bt = ColVec::from_iterator(b.len(), b.iter().copied());
    let x = solve_vec(&at, &bt)?;
    Ok(RowVec::from_iterator(x.len(), x.iter().copied()))
}

pub fn inverse(a: &Matrix) -> Result<Matrix> {
    solve(a, &identity(a.nrows()))
}

/// Bilinear form `x M z`.
pub fn quad_form(x: &RowVec, m: &Matrix, z: &ColVec) -> C64 {
    (x * m * z)[(0, 0)]
}

/// Accepts a complex scalar as real when `|im| <= 1e-8 * max(|re|, scale)`.
pub fn assert_real(v: C64, scale: f64) -> Result<f64> {
    let s = v.re.abs().max(scale.abs());
    if v.im.abs() <= 1e-8 * s || v.im == 0.0 {
        Ok(v.re)
    } else {
        Err(Error::ImaginaryResidual {
            value: v.re,
            residual: v.im.abs(),
        })
    }
}

/// Block upper-triangular assembly from an `n x n` grid of optional blocks.
pub fn block(blocks: &[Vec<Option<Matrix>>]) -> Result<Matrix> {
    let nr = blocks.len();
    let nc = blocks.first().map_or(0, |r| r.len());
    let mut heights = vec![None; nr];
    let mut widths = vec![None; nc];
    for (i, r) in blocks.iter().enumerate() {
        if r.len() != nc {
            return Err(Error::Dimension("ragged block grid".into()));
        }
        for (j, b) in r.iter().enumerate() {
            if let Some(b) = b {
                for (slot, v) in [(&mut heights[i], b.nrows()), (&mut widths[j], b.ncols())] {
                    match slot {
                        Some(s) if *s != v => {
                            return Err(Error::Dimension("inconsistent block sizes".into()))
                        }
                        _ => *slot = Some(v),
                    }
                }
            }
        }
    }
    let h: Vec<usize> = heights.iter().map(|v| v.unwrap_or(0)).collect();
    let w: Vec<usize> = widths.iter().map(|v| v.unwrap_or(0)).collect();
    let mut out = Matrix::zeros(h.iter().sum(), w.iter().sum());
    let mut r0 = 0;
    for (i, r) in blocks.iter().enumerate() {
        let mut c0 = 0;
        for (j, b) in r.iter().enumerate() {
            if let Some(b) = b {
                out.view_mut((r0, c0), (h[i], w[j])).copy_from(b);
            }
            c0 += w[j];
        }
        r0 += h[i];
    }
    Ok(out)
}

pub fn block_diag(mats: &[&Matrix]) -> Matrix {
    let n: usize = mats.iter().map(|m| m.nrows()).sum();
    let k: usize = mats.iter().map(|m| m.ncols()).sum();
    let mut out = Matrix::zeros(n, k);
    let (mut r, mut cc) = (0, 0);
    for m in mats {
        out.view_mut((r, cc), (m.nrows(), m.ncols())).copy_from(*m);
        r += m.nrows();
        cc += m.ncols();
    }
    out
}

pub fn row_as_matrix(r: &RowVec) -> Matrix {
    Matrix::from_row_slice(1, r.len(), r.as_slice())
}

pub fn col_as_matrix(v: &ColVec) -> Matrix {
    Matrix::from_column_slice(v.len(), 1, v.as_slice())
}

pub fn to_real(m: &Matrix) -> Vec<Vec<f64>> {
    (0..m.nrows())
        .map(|i| (0..m.ncols()).map(|j| m[(i, j)].re).collect())
        .collect()
}

pub fn max_imag(m: &Matrix) -> f64 {
    m.iter().map(|v| v.im.abs()).fold(0.0, f64::max)
}
