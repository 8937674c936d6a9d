use super::{c, check_finite, check_square, identity, inverse, max_abs, norm1, ColVec, Matrix, C64, ONE, ZERO};
use crate::error::{Error, Result};
use nalgebra::Schur;

/// Complex Schur form `M = U T U^*` with `T` upper triangular.
pub fn schur(m: &Matrix) -> Result<(Matrix, Matrix)> {
    check_square(m, "schur argument")?;
    check_finite(m, "schur argument")?;
    let n = m.nrows();
    if n == 0 {
        return Ok((m.clone(), m.clone()));
    }
    let s = Schur::try_new(m.clone(), 1e-15, 10_000)
        .ok_or_else(|| Error::NoConvergence("Schur iteration".into()))?;
    let (mut u, mut t) = s.unpack();
    // Split any remaining 2x2 diagonal blocks with a unitary rotation.
    let tol = 1e-14 * norm1(m).max(f64::MIN_POSITIVE);
    for k in 0..n.saturating_sub(1) {
        if t[(k + 1, k)].norm() <= tol {
            t[(k + 1, k)] = ZERO;
            continue;
        }
        let (a, b, cc, d) = (t[(k, k)], t[(k, k + 1)], t[(k + 1, k)], t[(k + 1, k + 1)]);
        let tr = a + d;
        let det = a * d - b * cc;
        let disc = (tr * tr * 0.25 - det).sqrt();
        let lam = tr * 0.5 + disc;
        // eigenvector of the block for lam
        let (v0, v1) = if (lam - d).norm() >= (lam - a).norm() {
            (lam - d, cc)
        } else {
            (b, lam - a)
        };
        let nv = (v0.norm_sqr() + v1.norm_sqr()).sqrt();
        let (g0, g1) = (v0 / nv, v1 / nv);
        // G = [[g0, -conj(g1)], [g1, conj(g0)]] has first column v.
        let mut g = identity(n);
        g[(k, k)] = g0;
        g[(k + 1, k)] = g1;
        g[(k, k + 1)] = -g1.conj();
        g[(k + 1, k + 1)] = g0.conj();
        t = g.adjoint() * &t * &g;
        u = &u * &g;
        t[(k + 1, k)] = ZERO;
    }
    for j in 0..n {
        for i in j + 1..n {
            t[(i, j)] = ZERO;
        }
    }
    Ok((u, t))
}

#[derive(Debug, Clone)]
pub struct Eigen {
    pub values: Vec<C64>,
    /// Columns are eigenvectors.
    pub vectors: Matrix,
    pub vectors_inv: Option<Matrix>,
    /// 1-norm condition number of the eigenvector matrix.
    pub condition: f64,
    pub diagonalizable: bool,
}

/// Eigendecomposition through the complex Schur form.
pub fn eig(m: &Matrix) -> Result<Eigen> {
    let (u, t) = schur(m)?;
    let n = t.nrows();
    let scale = max_abs(&t).max(f64::MIN_POSITIVE);
    let small = scale * 1e-14;
    let mut vt = Matrix::zeros(n, n);
    for k in 0..n {
        let lam = t[(k, k)];
        vt[(k, k)] = ONE;
        for j in (0..k).rev() {
            let mut s = ZERO;
            for l in j + 1..=k {
                s += t[(j, l)] * vt[(l, k)];
            }
            let mut den = t[(j, j)] - lam;
            if den.norm() < small {
                den = c(small);
            }
            vt[(j, k)] = -s / den;
        }
        let nrm = vt.column(k).norm();
        vt.column_mut(k).unscale_mut(nrm);
    }
    let vectors = &u * vt;
    let values: Vec<C64> = (0..n).map(|k| t[(k, k)]).collect();
    let vectors_inv = inverse(&vectors).ok();
    let (condition, diagonalizable) = match &vectors_inv {
        Some(vi) => {
            let cond = norm1(&vectors) * norm1(vi);
            let d = Matrix::from_diagonal(&ColVec::from_vec(values.clone()));
            let rec = &vectors * d * vi;
            let err = max_abs(&(rec - m)) / max_abs(m).max(f64::MIN_POSITIVE);
            (cond, cond < 1e12 && err < 1e-9)
        }
        None => (f64::INFINITY, false),
    };
    Ok(Eigen {
        values,
        vectors,
        vectors_inv,
        condition,
        diagonalizable,
    })
}

/// Spectral abscissa `max Re(lambda)`.
pub fn spectral_abscissa(m: &Matrix) -> Result<f64> {
    let (_, t) = schur(m)?;
    Ok((0..t.nrows()).map(|k| t[(k, k)].re).fold(f64::NEG_INFINITY, f64::max))
}

pub fn eigenvalues(m: &Matrix) -> Result<Vec<C64>> {
    let (_, t) = schur(m)?;
    Ok((0..t.nrows()).map(|k| t[(k, k)]).collect())
}
