use super::eig::{eig, schur};
use super::{check_finite, check_square, expm, identity, inverse, max_abs, norm1, ColVec, Matrix};
use crate::error::{Error, Result};

/// Principal power `M^p` for real `p`.
///
/// Integer exponents use repeated squaring. Other exponents require that no
/// eigenvalue lies on the closed negative real axis.
pub fn mat_frac_power(m: &Matrix, p: f64) -> Result<Matrix> {
    check_square(m, "power base")?;
    check_finite(m, "power base")?;
    if !p.is_finite() {
        return Err(Error::Domain("non-finite exponent".into()));
    }
    if (p - p.round()).abs() < 1e-12 {
        return int_power(m, p.round() as i64);
    }
    let e = eig(m)?;
    let scale = max_abs(m).max(f64::MIN_POSITIVE);
    for l in &e.values {
        if l.norm() <= 1e-13 * scale {
            return Err(Error::Domain("zero eigenvalue under non-integer power".into()));
        }
        if l.re < 0.0 && l.im.abs() <= 1e-12 * l.norm() {
            return Err(Error::Domain(format!(
                "eigenvalue {} on the branch cut of the principal power",
                l.re
            )));
        }
    }
    if e.diagonalizable && e.condition < 1e8 {
        let vi = e.vectors_inv.as_ref().expect("diagonalizable implies inverse");
        let d = ColVec::from_iterator(e.values.len(), e.values.iter().map(|l| l.powf(p)));
        return Ok(&e.vectors * Matrix::from_diagonal(&d) * vi);
    }
    let twice = 2.0 * p;
    if (twice - twice.round()).abs() < 1e-12 {
        let r = sqrtm(m)?;
        return int_power(&r, twice.round() as i64);
    }
    let l = logm(m)?;
    expm(&l.scale(p))
}

fn int_power(m: &Matrix, k: i64) -> Result<Matrix> {
    let n = m.nrows();
    let mut base = if k < 0 { inverse(m)? } else { m.clone() };
    let mut e = k.unsigned_abs();
    let mut acc = identity(n);
    while e > 0 {
        if e & 1 == 1 {
            acc = &acc * &base;
        }
        e >>= 1;
        if e > 0 {
            base = &base * &base;
        }
    }
    Ok(acc)
}

fn sqrt_triangular(t: &Matrix) -> Result<Matrix> {
    let n = t.nrows();
    let mut r = Matrix::zeros(n, n);
    for j in 0..n {
        r[(j, j)] = t[(j, j)].sqrt();
        for i in (0..j).rev() {
            let mut s = t[(i, j)];
            for k in i + 1..j {
                s -= r[(i, k)] * r[(k, j)];
            }
            let den = r[(i, i)] + r[(j, j)];
            if den.norm() == 0.0 {
                return Err(Error::Domain("square root does not exist".into()));
            }
            r[(i, j)] = s / den;
        }
    }
    Ok(r)
}

/// Principal square root via the Schur form.
pub fn sqrtm(m: &Matrix) -> Result<Matrix> {
    let (u, t) = schur(m)?;
    let r = sqrt_triangular(&t)?;
    Ok(&u * r * u.adjoint())
}

/// Principal logarithm by inverse scaling and squaring.
pub fn logm(m: &Matrix) -> Result<Matrix> {
    let (u, mut t) = schur(m)?;
    let n = t.nrows();
    let i = identity(n);
    let mut s = 0;
    while norm1(&(&t - &i)) > 0.25 {
        t = sqrt_triangular(&t)?;
        s += 1;
        if s > 64 {
            return Err(Error::NoConvergence("logm square roots".into()));
        }
    }
    let x = &t - &i;
    let mut term = x.clone();
    let mut acc = Matrix::zeros(n, n);
    for k in 1..200 {
        let add = term.scale(if k % 2 == 1 { 1.0 } else { -1.0 } / k as f64);
        acc += &add;
        if max_abs(&add) < 1e-18 * max_abs(&acc).max(1e-300) {
            break;
        }
        term = &term * &x;
    }
    let l = acc.scale(2f64.powi(s));
    Ok(&u * l * u.adjoint())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::matfun::from_real;

    #[test]
    fn jordan_inverse_sqrt() {
        let m = from_real(2, 2, &[2.0, 1.0, 0.0, 2.0]);
        let r = mat_frac_power(&m, -0.5).unwrap();
        let sq = &r * &r * &m;
        assert!(max_abs(&(sq - identity(2))) < 1e-13);
        // closed form [[2^-1/2, -2^-5/2], [0, 2^-1/2]]
        assert!((r[(0, 1)].re + 2f64.powf(-2.5)).abs() < 1e-14);
    }

    #[test]
    fn negative_axis_rejected() {
        let m = from_real(2, 2, &[-1.0, 0.0, 0.0, 2.0]);
        assert!(matches!(mat_frac_power(&m, 0.5), Err(Error::Domain(_))));
        assert!(mat_frac_power(&m, -1.0).is_ok());
    }

    #[test]
    fn inverse_round_trip() {
        let m = from_real(3, 3, &[4.0, 1.0, 0.0, 0.5, 3.0, 1.0, 0.0, 0.2, 2.0]);
        for p in [0.5, -0.5, 1.5, 0.3, -2.5] {
            let a = mat_frac_power(&m, p).unwrap();
            let back = mat_frac_power(&a, 1.0 / p).unwrap();
            assert!(max_abs(&(back - &m)) < 1e-10, "p = {p}");
        }
    }

    #[test]
    fn defective_general_exponent() {
        let m = from_real(3, 3, &[2.0, 1.0, 0.0, 0.0, 2.0, 1.0, 0.0, 0.0, 2.0]);
        let a = mat_frac_power(&m, 1.0 / 3.0).unwrap();
        let cube = &a * &a * &a;
        assert!(max_abs(&(cube - &m)) < 1e-12);
    }

    #[test]
    fn complex_spectrum_principal_branch() {
        // I - Q/a for the oscillatory companion has eigenvalues off the cut
        let q = from_real(3, 3, &[0.0, 1.0, 0.0, 0.0, 0.0, 1.0, -50.0, -52.0, -3.0]);
        let m = identity(3) - q.scale(0.5);
        let r = mat_frac_power(&m, -0.5).unwrap();
        let back = &r * &r * &m;
        assert!(max_abs(&(back - identity(3))) < 1e-11);
    }
}
