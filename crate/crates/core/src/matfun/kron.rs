use super::{check_square, identity, ColVec, Matrix};
use crate::error::Result;

pub fn kron(a: &Matrix, b: &Matrix) -> Matrix {
    let (ar, ac) = a.shape();
    let (br, bc) = b.shape();
    let mut out = Matrix::zeros(ar * br, ac * bc);
    for i in 0..ar {
        for j in 0..ac {
            let s = a[(i, j)];
            if s.re == 0.0 && s.im == 0.0 {
                continue;
            }
            out.view_mut((i * br, j * bc), (br, bc)).copy_from(&(b * s));
        }
    }
    out
}

/// Kronecker sum `A ⊗ I + I ⊗ B`.
pub fn kron_sum(a: &Matrix, b: &Matrix) -> Result<Matrix> {
    check_square(a, "kron_sum left operand")?;
    check_square(b, "kron_sum right operand")?;
    Ok(kron(a, &identity(b.nrows())) + kron(&identity(a.nrows()), b))
}

/// Column-stacking vectorization.
pub fn vec_of(m: &Matrix) -> ColVec {
    ColVec::from_column_slice(m.as_slice())
}

pub fn unvec(v: &ColVec, rows: usize, cols: usize) -> Matrix {
    Matrix::from_column_slice(rows, cols, v.as_slice())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::matfun::{expm, from_real, max_abs};
    use proptest::prelude::*;

    fn mat(n: usize, v: &[f64]) -> Matrix {
        from_real(n, n, v)
    }

    #[test]
    fn mixed_product_small() {
        let a = mat(2, &[1.0, 2.0, 3.0, 4.0]);
        let b = mat(2, &[0.0, 1.0, -1.0, 2.0]);
        let k = kron(&a, &b);
        assert_eq!(k[(0, 1)].re, 1.0);
        assert_eq!(k[(3, 2)].re, -4.0);
        assert_eq!(k[(2, 3)].re, 4.0);
    }

    #[test]
    fn vec_identity() {
        let a = mat(2, &[1.0, 2.0, 3.0, 4.0]);
        let x = from_real(2, 3, &[1.0, -1.0, 2.0, 0.5, 3.0, 1.0]);
        let b = mat(3, &[1.0, 0.0, 2.0, 0.0, 1.0, 1.0, -1.0, 0.0, 1.0]);
        let lhs = vec_of(&(&a * &x * &b));
        let rhs = kron(&b.transpose(), &a) * vec_of(&x);
        assert!((lhs - rhs).iter().all(|v| v.norm() < 1e-13));
    }

    proptest! {
        #[test]
        fn exp_of_kron_sum_factorizes(v in proptest::collection::vec(-1.5f64..1.5, 8)) {
            let a = mat(2, &v[..4]);
            let b = mat(2, &v[4..]);
            let lhs = expm(&kron_sum(&a, &b).unwrap()).unwrap();
            let rhs = kron(&expm(&a).unwrap(), &expm(&b).unwrap());
            prop_assert!(max_abs(&(lhs - &rhs)) <= 1e-12 * max_abs(&rhs).max(1.0));
        }
    }
}
