use super::{Link, MetricResult, PathTag};
use crate::algebra::convolve_all;
use crate::error::{Error, Result};
use crate::matfun::{
    c, col_as_matrix, eigenvalues, expm, identity, kron, kron_sum, row_as_matrix, solve, sylvester,
    unvec, vec_of, ColVec, Matrix,
};
use crate::medist::MeDist;

/// Signal `Z` against aggregate interference `Z_I`; decoding succeeds when
/// `Z > Θ (1 + Z_I)`.
///
/// The joint density is `x_I e^{z_I Y_I} P12 e^{z Y} z`; independent laws use
/// `P12 = z_I x`.
#[derive(Debug, Clone)]
pub struct InterferenceScenario {
    pub signal: MeDist,
    pub interference: MeDist,
    pub coupling: Matrix,
    pub independent: bool,
}

impl InterferenceScenario {
    pub fn independent(signal: &MeDist, interferers: &[MeDist]) -> Result<Self> {
        let zi = convolve_all(interferers)?;
        let coupling = col_as_matrix(zi.z()) * row_as_matrix(signal.x());
        Ok(InterferenceScenario { signal: signal.clone(), interference: zi, coupling, independent: true })
    }

    /// Dependent pair with an explicit coupling matrix `P12` (`d_I x d`).
    pub fn joint(signal: &MeDist, interference: &MeDist, coupling: Matrix) -> Result<Self> {
        if coupling.shape() != (interference.degree(), signal.degree()) {
            return Err(Error::Dimension("coupling must be d_I x d".into()));
        }
        Ok(InterferenceScenario {
            signal: signal.clone(),
            interference: interference.clone(),
            coupling,
            independent: false,
        })
    }

    /// `-P12 Y^{-1} e^{ΘY}`.
    fn shifted_coupling(&self, theta: f64) -> Result<Matrix> {
        let y = self.signal.y();
        let yi = solve(y, &expm(&y.scale(theta))?)?;
        Ok(-(&self.coupling * yi))
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum InterferencePath {
    Kron,
    Sylvester,
    Vectorized,
    VanLoan,
}

/// `P(Z > Θ(1 + Z_I))`.
pub fn interference_success(sc: &InterferenceScenario, theta: f64, path: InterferencePath) -> Result<MetricResult> {
    if !(theta >= 0.0) {
        return Err(Error::Domain(format!("threshold {theta}")));
    }
    let (xi, yi, zi) = (sc.interference.x(), sc.interference.y(), sc.interference.z());
    let (x, y, z) = (sc.signal.x(), sc.signal.y(), sc.signal.z());
    let ty = y.scale(theta);
    let v = match path {
        InterferencePath::Kron => {
            if !sc.independent {
                return Err(Error::Precondition("Kronecker form needs independent laws".into()));
            }
            let left = kron_sum(yi, &ty)?;
            let right = kron(&identity(yi.nrows()), &(y * expm(&(-&ty))?));
            let m = left * right;
            let xx = kron(&row_as_matrix(xi), &row_as_matrix(x));
            let zz = kron(&col_as_matrix(zi), &col_as_matrix(z));
            (xx * solve(&m, &zz)?)[(0, 0)]
        }
        InterferencePath::Sylvester => {
            let pb = sc.shifted_coupling(theta)?;
            let xm = sylvester(yi, &ty, &(-pb))?;
            (xi * xm * z)[(0, 0)]
        }
        InterferencePath::Vectorized => {
            let pb = sc.shifted_coupling(theta)?;
            let k = kron_sum(&ty.transpose(), yi)?;
            let v = solve(&k, &col_as_matrix(&vec_of(&pb)))?;
            let xm = unvec(&ColVec::from_column_slice(v.as_slice()), yi.nrows(), y.nrows());
            -(xi * xm * z)[(0, 0)]
        }
        InterferencePath::VanLoan => {
            let pb = sc.shifted_coupling(theta)?;
            let xm = van_loan_integral(yi, &pb, &ty)?;
            (xi * xm * z)[(0, 0)]
        }
    };
    let tag = match path {
        InterferencePath::Kron | InterferencePath::Vectorized => PathTag::Kron,
        InterferencePath::Sylvester => PathTag::Sylvester,
        InterferencePath::VanLoan => PathTag::Vanloan,
    };
    MetricResult::from_complex(v, tag, 1.0)
}

/// `∫_0^∞ e^{tA} C e^{tB} dt` truncated at `60 / gap`.
pub fn van_loan_integral(a: &Matrix, cm: &Matrix, b: &Matrix) -> Result<Matrix> {
    let slow = |m: &Matrix| -> Result<f64> {
        Ok(eigenvalues(m)?.iter().map(|l| -l.re).fold(f64::INFINITY, f64::min))
    };
    let gap = slow(a)? + slow(b)?;
    if !(gap > 0.0) {
        return Err(Error::Domain("integrand does not decay".into()));
    }
    van_loan_integral_to(a, cm, b, 60.0 / gap)
}

/// `∫_0^t e^{sA} C e^{sB} ds`.
///
/// The block exponential of `[[-A, C], [0, B]]` is taken over a short step
/// `h = t / 2^k` and the integral is doubled back up with
/// `I(2h) = I(h) + e^{hA} I(h) e^{hB}`, so no growing factor is ever formed.
pub fn van_loan_integral_to(a: &Matrix, cm: &Matrix, b: &Matrix, t: f64) -> Result<Matrix> {
    let (m, n) = (a.nrows(), b.nrows());
    if cm.shape() != (m, n) {
        return Err(Error::Dimension("van Loan coupling shape".into()));
    }
    if !(t >= 0.0) || !t.is_finite() {
        return Err(Error::Domain(format!("horizon {t}")));
    }
    let mut g = Matrix::zeros(m + n, m + n);
    g.view_mut((0, 0), (m, m)).copy_from(&(-a));
    g.view_mut((0, m), (m, n)).copy_from(cm);
    g.view_mut((m, m), (n, n)).copy_from(b);
    let norm = crate::matfun::norm1(&g) * t;
    let k = if norm > 0.5 { (norm / 0.5).log2().ceil() as i32 } else { 0 };
    let h = t / 2f64.powi(k);
    let e = expm(&g.scale(h))?;
    let e11 = e.view((0, 0), (m, m)).clone_owned();
    let e12 = e.view((0, m), (m, n)).clone_owned();
    let mut acc = solve(&e11, &e12)?;
    let mut pa = expm(&a.scale(h))?;
    let mut pb = e.view((m, m), (n, n)).clone_owned();
    for _ in 0..k {
        acc = &acc + &pa * &acc * &pb;
        pa = &pa * &pa;
        pb = &pb * &pb;
    }
    Ok(acc)
}

/// Success probability and its derivative in `Θ`.
pub fn interference_success_derivative(sc: &InterferenceScenario, theta: f64) -> Result<(f64, f64)> {
    let (xi, yi) = (sc.interference.x(), sc.interference.y());
    let (y, z) = (sc.signal.y(), sc.signal.z());
    let ty = y.scale(theta);
    let pb = sc.shifted_coupling(theta)?;
    let xm = sylvester(yi, &ty, &(-&pb))?;
    let rhs = -((&pb + &xm) * y);
    let xd = sylvester(yi, &ty, &rhs)?;
    let p = crate::matfun::assert_real((xi * &xm * z)[(0, 0)], 1.0)?;
    let dp = crate::matfun::assert_real((xi * xd * z)[(0, 0)], 1.0)?;
    Ok((p, dp))
}

/// Always fails: the renewal transform of accumulated `ln(1 + Z/(1 + Z_I))`
/// is not rational, so persistent HARQ under interference has no matrix form.
pub fn harq_persistent_interference(_sc: &InterferenceScenario, _link: Link) -> Result<MetricResult> {
    Err(Error::Precondition(
        "persistent HARQ with interference has no rational Laplace transform".into(),
    ))
}

pub fn arq_interference(sc: &InterferenceScenario, link: Link, path: InterferencePath) -> Result<MetricResult> {
    let p = interference_success(sc, link.theta, path)?;
    Ok(MetricResult { value: link.rate * p.value, ..p })
}

/// Success probability for an exponential signal of mean `s`: `e^{-Θ/s} F_I(Θ/s)`.
pub fn success_exponential_signal(s: f64, interference: &MeDist, theta: f64) -> Result<f64> {
    let u = theta / s;
    Ok((-u).exp() * crate::matfun::assert_real(interference.lt(c(u))?, 1.0)?)
}

/// Success probability for an exponential interferer of mean `s_i`:
/// `-x Y^{-1} e^{ΘY} (I - Θ s_i Y)^{-1} z`.
pub fn success_exponential_interferer(signal: &MeDist, s_i: f64, theta: f64) -> Result<f64> {
    let y = signal.y();
    let n = y.nrows();
    let inner = solve(&(identity(n) - y.scale(theta * s_i)), &col_as_matrix(signal.z()))?;
    let w = solve(y, &(expm(&y.scale(theta))? * inner))?;
    crate::matfun::assert_real(-(signal.x() * w)[(0, 0)], 1.0)
}
