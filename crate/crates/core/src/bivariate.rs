//! Bivariate ME densities `p1 e^{z1 Q1} P12 e^{z2 Q2} r2` and the bilinear
//! integrals `∫ x1 e^{tY1} X12 e^{tY2} z2 dt` they lead to.

use crate::error::{Error, Result};
use crate::matfun::{
    assert_real, block, c, check_finite, check_square, col_as_matrix, eigenvalues, expm, from_rows,
    identity, kron, kron_sum, max_abs, quad, quad_with_breaks, row_as_matrix, solve, sylvester,
    to_real, vec_of, ColVec, Matrix, QuadOptions, RowVec, C64,
};
use crate::medist::MeDist;
use crate::metrics::{
    van_loan_integral_to, InterferenceScenario, MetricResult, PathTag,
};
use serde::{Deserialize, Serialize};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Support {
    /// `z1, z2 >= 0`.
    #[default]
    Quadrant,
    /// `0 <= z1 <= z2`.
    Ordered,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[allow(non_snake_case)]
pub struct BivMeJson {
    pub p1: Vec<f64>,
    pub Q1: Vec<Vec<f64>>,
    pub P12: Vec<Vec<f64>>,
    pub Q2: Vec<Vec<f64>>,
    pub r2: Vec<f64>,
    #[serde(default)]
    pub support: Support,
}

#[derive(Debug, Clone, PartialEq)]
pub struct BivMe {
    p1: RowVec,
    q1: Matrix,
    p12: Matrix,
    q2: Matrix,
    r2: ColVec,
    support: Support,
}

#[derive(Debug, Clone, PartialEq)]
pub struct BivValidation {
    pub min_pdf: f64,
    pub mass: f64,
    pub extent: f64,
}

impl BivValidation {
    pub fn is_valid(&self) -> bool {
        self.min_pdf >= -1e-9 && (self.mass - 1.0).abs() <= 1e-6
    }
}

impl BivMe {
    pub fn new(p1: RowVec, q1: Matrix, p12: Matrix, q2: Matrix, r2: ColVec, support: Support) -> Result<Self> {
        check_square(&q1, "Q1")?;
        check_square(&q2, "Q2")?;
        let (d1, d2) = (q1.nrows(), q2.nrows());
        if d1 == 0 || d2 == 0 {
            return Err(Error::Dimension("empty bivariate law".into()));
        }
        if p1.len() != d1 || r2.len() != d2 || p12.shape() != (d1, d2) {
            return Err(Error::Dimension(format!(
                "p1 {} / Q1 {d1} / P12 {:?} / Q2 {d2} / r2 {}",
                p1.len(),
                p12.shape(),
                r2.len()
            )));
        }
        for (m, what) in [(&q1, "Q1"), (&p12, "P12"), (&q2, "Q2")] {
            check_finite(m, what)?;
        }
        if !p1.iter().chain(r2.iter()).all(|v| v.re.is_finite() && v.im.is_finite()) {
            return Err(Error::NonFinite("p1 / r2".into()));
        }
        Ok(BivMe { p1, q1, p12, q2, r2, support })
    }

    /// Independent pair: `P12 = z1 x2`.
    pub fn independent(d1: &MeDist, d2: &MeDist) -> Result<Self> {
        let p12 = col_as_matrix(d1.z()) * row_as_matrix(d2.x());
        BivMe::new(d1.x().clone(), d1.y().clone(), p12, d2.y().clone(), d2.z().clone(), Support::Quadrant)
    }

    pub fn from_json_value(j: &BivMeJson) -> Result<Self> {
        let p1 = RowVec::from_iterator(j.p1.len(), j.p1.iter().map(|&v| c(v)));
        let r2 = ColVec::from_iterator(j.r2.len(), j.r2.iter().map(|&v| c(v)));
        BivMe::new(p1, from_rows(&j.Q1)?, from_rows(&j.P12)?, from_rows(&j.Q2)?, r2, j.support)
    }

    pub fn from_json(s: &str) -> Result<Self> {
        let j: BivMeJson = serde_json::from_str(s).map_err(|e| Error::Construction(e.to_string()))?;
        BivMe::from_json_value(&j)
    }

    pub fn to_json_value(&self) -> Result<BivMeJson> {
        let all = [&self.q1, &self.p12, &self.q2];
        let vecs = self.p1.iter().chain(self.r2.iter());
        if all.iter().any(|m| m.iter().any(|v| v.im != 0.0)) || vecs.clone().any(|v| v.im != 0.0) {
            return Err(Error::Domain("complex parameters have no real JSON form".into()));
        }
        Ok(BivMeJson {
            p1: self.p1.iter().map(|v| v.re).collect(),
            Q1: to_real(&self.q1),
            P12: to_real(&self.p12),
            Q2: to_real(&self.q2),
            r2: self.r2.iter().map(|v| v.re).collect(),
            support: self.support,
        })
    }

    pub fn to_json(&self) -> Result<String> {
        serde_json::to_string_pretty(&self.to_json_value()?).map_err(|e| Error::Construction(e.to_string()))
    }

    pub fn support(&self) -> Support {
        self.support
    }

    pub fn dims(&self) -> (usize, usize) {
        (self.q1.nrows(), self.q2.nrows())
    }

    pub fn p1(&self) -> &RowVec {
        &self.p1
    }
    pub fn q1(&self) -> &Matrix {
        &self.q1
    }
    pub fn p12(&self) -> &Matrix {
        &self.p12
    }
    pub fn q2(&self) -> &Matrix {
        &self.q2
    }
    pub fn r2(&self) -> &ColVec {
        &self.r2
    }

    fn in_support(&self, z1: f64, z2: f64) -> bool {
        z1 >= 0.0 && z2 >= 0.0 && (self.support == Support::Quadrant || z1 <= z2)
    }

    pub fn pdf(&self, z1: f64, z2: f64) -> Result<f64> {
        if !self.in_support(z1, z2) {
            return Ok(0.0);
        }
        let v = (&self.p1 * expm(&self.q1.scale(z1))? * &self.p12 * expm(&self.q2.scale(z2))? * &self.r2)[(0, 0)];
        assert_real(v, 1.0)
    }

    /// `E[e^{-s1 Z1 - s2 Z2}]` over the support.
    pub fn lt(&self, s1: C64, s2: C64) -> Result<C64> {
        let (d1, d2) = self.dims();
        let a1 = identity(d1) * s1 - &self.q1;
        let a2 = identity(d2) * s2 - &self.q2;
        match self.support {
            Support::Quadrant => {
                let right = solve(&a2, &col_as_matrix(&self.r2))?;
                let left = solve(&a1.transpose(), &row_as_matrix(&self.p1).transpose())?.transpose();
                Ok((left * &self.p12 * right)[(0, 0)])
            }
            Support::Ordered => {
                // inner integral over z2 in (z1, ∞) leaves a bilinear form in z1
                let x = &self.p12 * crate::matfun::inverse(&a2)?;
                let w = sylvester(&(-a1), &(-a2), &(-x))?;
                Ok((&self.p1 * w * &self.r2)[(0, 0)])
            }
        }
    }

    pub fn mass(&self) -> Result<f64> {
        assert_real(self.lt(c(0.0), c(0.0))?, 1.0)
    }

    /// Density of `Z1`.
    pub fn marginal_first(&self, z1: f64) -> Result<f64> {
        if z1 < 0.0 {
            return Ok(0.0);
        }
        let head = &self.p1 * expm(&self.q1.scale(z1))? * &self.p12;
        let tail = match solve(&self.q2, &col_as_matrix(&self.r2)) {
            Ok(q2r) => match self.support {
                Support::Quadrant => -q2r,
                Support::Ordered => -(expm(&self.q2.scale(z1))? * q2r),
            },
            Err(Error::Singular(_)) => {
                let lo = if self.support == Support::Ordered { z1 } else { 0.0 };
                return self.marginal_numeric(true, z1, lo, f64::INFINITY);
            }
            Err(e) => return Err(e),
        };
        assert_real((head * tail)[(0, 0)], 1.0)
    }

    /// Density of `Z2`.
    pub fn marginal_second(&self, z2: f64) -> Result<f64> {
        if z2 < 0.0 {
            return Ok(0.0);
        }
        let tail = &self.p12 * expm(&self.q2.scale(z2))? * &self.r2;
        let (d1, _) = self.dims();
        let head = match self.support {
            Support::Quadrant => match solve(&self.q1.transpose(), &row_as_matrix(&self.p1).transpose()) {
                Ok(m) => -m.transpose(),
                Err(Error::Singular(_)) => return self.marginal_numeric(false, z2, 0.0, f64::INFINITY),
                Err(e) => return Err(e),
            },
            Support::Ordered => {
                // ∫_0^{z2} e^{t Q1} dt read off an augmented exponential
                let g = block(&[
                    vec![Some(self.q1.clone()), Some(identity(d1))],
                    vec![None, Some(Matrix::zeros(d1, d1))],
                ])?;
                let e = expm(&g.scale(z2))?;
                row_as_matrix(&self.p1) * e.view((0, d1), (d1, d1))
            }
        };
        assert_real((head * tail)[(0, 0)], 1.0)
    }

    fn marginal_numeric(&self, first: bool, at: f64, lo: f64, hi: f64) -> Result<f64> {
        let f = |t: f64| {
            let v = if first { self.pdf(at, t) } else { self.pdf(t, at) };
            v.unwrap_or(f64::NAN)
        };
        let r = quad(f, lo, hi, &QuadOptions::tol(1e-12, 1e-10));
        if !r.value.is_finite() {
            return Err(Error::NonFinite("marginal".into()));
        }
        Ok(r.value)
    }

    pub fn marginal_first_dist(&self) -> Result<MeDist> {
        if self.support != Support::Quadrant {
            return Err(Error::Precondition("marginal triple needs quadrant support".into()));
        }
        let tail = -solve(&self.q2, &col_as_matrix(&self.r2))?;
        let z = ColVec::from_column_slice((&self.p12 * tail).as_slice());
        MeDist::new(self.p1.clone(), self.q1.clone(), z)
    }

    pub fn marginal_second_dist(&self) -> Result<MeDist> {
        if self.support != Support::Quadrant {
            return Err(Error::Precondition("marginal triple needs quadrant support".into()));
        }
        let head = -solve(&self.q1.transpose(), &row_as_matrix(&self.p1).transpose())?.transpose();
        let x = head * &self.p12;
        MeDist::new(RowVec::from_row_slice(x.as_slice()), self.q2.clone(), self.r2.clone())
    }

    /// `(Z_I, Z) = (Z1, Z2)` as an interference scenario.
    pub fn interference_scenario(&self) -> Result<InterferenceScenario> {
        InterferenceScenario::joint(&self.marginal_second_dist()?, &self.marginal_first_dist()?, self.p12.clone())
    }

    fn extent(&self) -> Result<f64> {
        let slow = eigenvalues(&self.q1)?
            .iter()
            .chain(eigenvalues(&self.q2)?.iter())
            .map(|l| -l.re)
            .fold(f64::INFINITY, f64::min);
        if !(slow > 0.0) {
            return Err(Error::Domain("bivariate law does not decay".into()));
        }
        Ok(30.0 / slow)
    }

    /// Nonnegativity on a 32 x 32 grid and total mass.
    pub fn validate(&self) -> Result<BivValidation> {
        let t = self.extent()?;
        let n = 32;
        let mut min_pdf = f64::INFINITY;
        for i in 0..n {
            for j in 0..n {
                let z1 = t * i as f64 / (n - 1) as f64;
                let z2 = t * j as f64 / (n - 1) as f64;
                if self.in_support(z1, z2) {
                    min_pdf = min_pdf.min(self.pdf(z1, z2)?);
                }
            }
        }
        Ok(BivValidation { min_pdf, mass: self.mass()?, extent: t })
    }

    /// `∫_0^∞ f(t, t) dt` as a bilinear form.
    pub fn diagonal_form(&self) -> BilinearForm {
        BilinearForm {
            x1: self.p1.clone(),
            y1: self.q1.clone(),
            x12: self.p12.clone(),
            y2: self.q2.clone(),
            z2: self.r2.clone(),
        }
    }
}

/// `∫_a^b x1 e^{tY1} X12 e^{tY2} z2 dt`.
#[derive(Debug, Clone, PartialEq)]
pub struct BilinearForm {
    pub x1: RowVec,
    pub y1: Matrix,
    pub x12: Matrix,
    pub y2: Matrix,
    pub z2: ColVec,
}

impl BilinearForm {
    pub fn new(x1: RowVec, y1: Matrix, x12: Matrix, y2: Matrix, z2: ColVec) -> Result<Self> {
        check_square(&y1, "Y1")?;
        check_square(&y2, "Y2")?;
        if x1.len() != y1.nrows() || z2.len() != y2.nrows() || x12.shape() != (y1.nrows(), y2.nrows()) {
            return Err(Error::Dimension("bilinear form shapes".into()));
        }
        Ok(BilinearForm { x1, y1, x12, y2, z2 })
    }

    fn pair(&self, m: &Matrix) -> C64 {
        (&self.x1 * m * &self.z2)[(0, 0)]
    }

    fn sandwich(&self, t: f64) -> Result<Matrix> {
        if t.is_infinite() {
            return Ok(Matrix::zeros(self.x12.nrows(), self.x12.ncols()));
        }
        Ok(expm(&self.y1.scale(t))? * &self.x12 * expm(&self.y2.scale(t))?)
    }

    /// Solves `Y1 X + X Y2 = e^{bY1} X12 e^{bY2} - e^{aY1} X12 e^{aY2}`;
    /// returns the value and `X`. `b` may be infinite.
    pub fn sylvester(&self, a: f64, b: f64) -> Result<(f64, Matrix)> {
        let rhs = self.sandwich(b)? - self.sandwich(a)?;
        let x = sylvester(&self.y1, &self.y2, &rhs)?;
        Ok((assert_real(self.pair(&x), 1.0)?, x))
    }

    /// Integral over `(0, b)` through `[[0, z2ᵀ⊗x1], [0, Y2ᵀ⊕Y1]]`.
    pub fn vectorized(&self, b: f64) -> Result<f64> {
        let head = kron(&col_as_matrix(&self.z2).transpose(), &row_as_matrix(&self.x1));
        let k = kron_sum(&self.y2.transpose(), &self.y1)?;
        let v = col_as_matrix(&vec_of(&self.x12));
        let out = if b.is_infinite() {
            -(head * solve(&k, &v)?)
        } else {
            let n = k.nrows();
            let g = block(&[vec![Some(Matrix::zeros(1, 1)), Some(head)], vec![None, Some(k)]])?;
            let e = expm(&g.scale(b))?;
            e.view((0, 1), (1, n)) * v
        };
        assert_real(out[(0, 0)], 1.0)
    }

    /// Integral over `(0, b)` from one block exponential.
    pub fn van_loan(&self, b: f64) -> Result<f64> {
        if b == 0.0 {
            return Ok(0.0);
        }
        let x = van_loan_integral_to(&self.y1, &self.x12, &self.y2, b)?;
        assert_real(self.pair(&x), 1.0)
    }

    /// Horizon `60 / gap` past which the truncated integral matches `(0, ∞)`.
    pub fn van_loan_horizon(&self) -> Result<f64> {
        let slow = |m: &Matrix| -> Result<f64> {
            Ok(eigenvalues(m)?.iter().map(|l| -l.re).fold(f64::INFINITY, f64::min))
        };
        let gap = slow(&self.y1)? + slow(&self.y2)?;
        if !(gap > 0.0) {
            return Err(Error::Domain("integrand does not decay".into()));
        }
        Ok(60.0 / gap)
    }

    /// Merged exponent `X12^{-1} Y1 X12 + Y2`; needs the two parts to commute.
    pub fn commuting(&self, a: f64, b: f64) -> Result<f64> {
        let m = solve(&self.x12, &(&self.y1 * &self.x12))?;
        let comm = &self.y2 * &m - &m * &self.y2;
        let scale = max_abs(&m).max(max_abs(&self.y2)).max(1.0);
        if max_abs(&comm) > 1e-10 * scale * scale {
            return Err(Error::Precondition("exponents do not commute".into()));
        }
        let g = m + &self.y2;
        let hi = if b.is_infinite() { Matrix::zeros(g.nrows(), g.ncols()) } else { expm(&g.scale(b))? };
        let lo = expm(&g.scale(a))?;
        let inner = solve(&g, &(hi - lo))?;
        assert_real(self.pair(&(&self.x12 * inner)), 1.0)
    }

    /// Entrywise quadrature reference.
    pub fn quadrature(&self, a: f64, b: f64) -> Result<f64> {
        let f = |t: f64| match self.sandwich(t) {
            Ok(m) => self.pair(&m).re,
            Err(_) => f64::NAN,
        };
        let r = quad(f, a, b, &QuadOptions::tol(1e-14, 1e-12));
        if !r.value.is_finite() {
            return Err(Error::NonFinite("bilinear quadrature".into()));
        }
        Ok(r.value)
    }
}

/// `∫_0^∞ f1(t) f2(t) dt = -(x1⊗x2)(Y1⊕Y2)^{-1}(z1⊗z2)`.
pub fn integral_product_independent(d1: &MeDist, d2: &MeDist) -> Result<f64> {
    let xx = kron(&row_as_matrix(d1.x()), &row_as_matrix(d2.x()));
    let zz = kron(&col_as_matrix(d1.z()), &col_as_matrix(d2.z()));
    let k = kron_sum(d1.y(), d2.y())?;
    assert_real(-(xx * solve(&k, &zz)?)[(0, 0)], 1.0)
}

/// `∫_0^b f1(t) f2(t) dt`.
pub fn integral_product_finite(d1: &MeDist, d2: &MeDist, b: f64) -> Result<f64> {
    if !(b >= 0.0) {
        return Err(Error::Domain(format!("upper limit {b}")));
    }
    if b.is_infinite() {
        return integral_product_independent(d1, d2);
    }
    let xx = kron(&row_as_matrix(d1.x()), &row_as_matrix(d2.x()));
    let zz = kron(&col_as_matrix(d1.z()), &col_as_matrix(d2.z()));
    let k = kron_sum(d1.y(), d2.y())?;
    let n = k.nrows();
    let g = block(&[vec![Some(Matrix::zeros(1, 1)), Some(xx)], vec![None, Some(k)]])?;
    let e = expm(&g.scale(b))?;
    assert_real((e.view((0, 1), (1, n)) * zz)[(0, 0)], 1.0)
}

/// Eigenvalue density of a 2 x 2 unit-variance complex Wishart matrix,
/// `e^{-z1-z2} (z1 - z2)^2` on `0 <= z1 <= z2`.
pub fn wishart2x2_bivme() -> BivMe {
    let q = crate::matfun::from_real(3, 3, &[-1.0, 1.0, 0.0, 0.0, -1.0, 1.0, 0.0, 0.0, -1.0]);
    let p12 = crate::matfun::from_real(3, 3, &[2.0, 0.0, 0.0, 0.0, -2.0, 0.0, 0.0, 0.0, 2.0]);
    BivMe {
        p1: crate::matfun::unit_row(3, 0),
        q1: q.clone(),
        p12,
        q2: q,
        r2: crate::matfun::unit_col(3, 2),
        support: Support::Ordered,
    }
}

/// `P(ln(1 + z1) + ln(1 + z2) <= R)` for the 2 x 2 Wishart eigenvalues.
///
/// With `Θ = e^R` the outage is `A + 1 - X/2`, where
/// `X = p1 e^{(Θ-1)Q1} Q1^{-1} P12 Q2^{-1} r2` and
/// `A = ½ ∫_1^Θ p1 e^{(t-1)Q1} P12 Q2^{-1} e^{(Θ/t-1)Q2} r2 dt` is left to quadrature.
pub fn sm_mimo_2x2_outage(rate: f64) -> Result<MetricResult> {
    if !(rate > 0.0) || !rate.is_finite() {
        return Err(Error::Domain(format!("rate {rate}")));
    }
    let theta = rate.exp();
    if !theta.is_finite() {
        return Ok(MetricResult::real(1.0, PathTag::Quadrature));
    }
    let w = wishart2x2_bivme();
    let u = &w.p12 * crate::matfun::inverse(&w.q2)?;
    let closed = &w.p1 * expm(&w.q1.scale(theta - 1.0))? * solve(&w.q1, &(&u * col_as_matrix(&w.r2)))?;
    let x = assert_real(closed[(0, 0)], 1.0)?;
    let g = |t: f64| -> f64 {
        let l = expm(&w.q1.scale(t - 1.0));
        let r = expm(&w.q2.scale(theta / t - 1.0));
        match (l, r) {
            (Ok(l), Ok(r)) => (&w.p1 * l * &u * r * &w.r2)[(0, 0)].re,
            _ => f64::NAN,
        }
    };
    let mid = theta.sqrt();
    let breaks: Vec<f64> = [2.0, 10.0, mid, theta / 10.0, theta / 2.0]
        .into_iter()
        .filter(|&b| b > 1.0 && b < theta)
        .collect();
    let mut breaks = breaks;
    breaks.sort_by(f64::total_cmp);
    let r = quad_with_breaks(g, 1.0, theta, &breaks, &QuadOptions::tol(1e-14, 1e-12));
    if !r.value.is_finite() {
        return Err(Error::NonFinite("outage integral".into()));
    }
    let value = (0.5 * r.value + 1.0 - 0.5 * x).clamp(0.0, 1.0);
    Ok(MetricResult::real(value, PathTag::Quadrature).with_quad(&r))
}

/// Same outage from a 2-D quadrature of the ordered Wishart density.
pub fn sm_mimo_2x2_outage_quadrature(rate: f64) -> Result<f64> {
    if !(rate > 0.0) {
        return Err(Error::Domain(format!("rate {rate}")));
    }
    let theta = rate.exp();
    let density = |z1: f64, z2: f64| (-z1 - z2).exp() * (z1 - z2) * (z1 - z2);
    let opts = QuadOptions::tol(1e-13, 1e-11);
    let outer = |z1: f64| {
        let top = theta / (1.0 + z1) - 1.0;
        if top <= z1 {
            return 0.0;
        }
        quad(|z2| density(z1, z2), z1, top, &opts).value
    };
    let r = quad(outer, 0.0, theta.sqrt() - 1.0, &opts);
    if !r.value.is_finite() {
        return Err(Error::NonFinite("outage quadrature".into()));
    }
    Ok(r.value)
}
