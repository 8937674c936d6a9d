use super::eig::schur;
use super::{check_finite, check_square, kron_sum, max_abs, solve, unvec, vec_of, Matrix, ZERO};
use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum SylvesterMethod {
    BartelsStewart,
    Vectorized,
}

/// Solves `A X + X B = C`.
pub fn sylvester(a: &Matrix, b: &Matrix, cm: &Matrix) -> Result<Matrix> {
    check_square(a, "sylvester A")?;
    check_square(b, "sylvester B")?;
    if cm.shape() != (a.nrows(), b.nrows()) {
        return Err(Error::Dimension("sylvester C shape".into()));
    }
    check_finite(cm, "sylvester C")?;
    let (ua, ta) = schur(a)?;
    let (ub, tb) = schur(b)?;
    let f = ua.adjoint() * cm * &ub;
    let (m, n) = cm.shape();
    let scale = (max_abs(a) + max_abs(b)).max(f64::MIN_POSITIVE);
    let mut y = Matrix::zeros(m, n);
    for k in 0..n {
        let mut rhs = f.column(k).clone_owned();
        for j in 0..k {
            let t = tb[(j, k)];
            if t != ZERO {
                rhs -= y.column(j) * t;
            }
        }
        let mu = tb[(k, k)];
        for i in (0..m).rev() {
            let mut s = rhs[i];
            for l in i + 1..m {
                s -= ta[(i, l)] * y[(l, k)];
            }
            let den = ta[(i, i)] + mu;
            if den.norm() <= 1e-13 * scale {
                return Err(Error::Singular(format!(
                    "eigenvalues of A and -B collide (|lambda + mu| = {:e})",
                    den.norm()
                )));
            }
            y[(i, k)] = s / den;
        }
    }
    Ok(ua * y * ub.adjoint())
}

/// Reference solver through `(B^T ⊕ A) vec(X) = vec(C)`.
pub fn sylvester_vectorized(a: &Matrix, b: &Matrix, cm: &Matrix) -> Result<Matrix> {
    if cm.shape() != (a.nrows(), b.nrows()) {
        return Err(Error::Dimension("sylvester C shape".into()));
    }
    let k = kron_sum(&b.transpose(), a)?;
    let v = solve(&k, &Matrix::from_column_slice(cm.len(), 1, vec_of(cm).as_slice()))?;
    Ok(unvec(&super::ColVec::from_column_slice(v.as_slice()), a.nrows(), b.nrows()))
}
