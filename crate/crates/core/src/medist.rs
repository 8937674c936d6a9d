//! The ME distribution triple and its scalar functionals.

use crate::algebra::check_degree;
use crate::error::{Error, Result};
use crate::matfun::{
    self, assert_real, block, c, check_finite, expm, identity, quad_form, row_as_matrix, solve_vec,
    spectral_abscissa, unit_col, ColVec, Matrix, RowVec, C64, ONE,
};

/// Rational Laplace transform `p(s) / q(s)` with `q` monic of degree `den.len()`.
///
/// Both coefficient lists are ascending in powers of `s`; the leading `s^d` of
/// `q` is implicit.
#[derive(Debug, Clone, PartialEq)]
pub struct RationalLt {
    pub num: Vec<f64>,
    pub den: Vec<f64>,
}

impl RationalLt {
    pub fn new(num: Vec<f64>, den: Vec<f64>) -> Result<Self> {
        if den.is_empty() {
            return Err(Error::Construction("denominator degree must be at least 1".into()));
        }
        if num.len() > den.len() {
            return Err(Error::Construction(format!(
                "numerator degree {} is not below denominator degree {}",
                num.len() - 1,
                den.len()
            )));
        }
        if num.iter().chain(den.iter()).any(|v| !v.is_finite()) {
            return Err(Error::NonFinite("rational transform coefficients".into()));
        }
        Ok(RationalLt { num, den })
    }

    pub fn degree(&self) -> usize {
        self.den.len()
    }

    pub fn eval(&self, s: C64) -> C64 {
        let horner = |cs: &[f64], lead: Option<f64>| {
            let mut acc = lead.map_or(C64::new(0.0, 0.0), c);
            for &k in cs.iter().rev() {
                acc = acc * s + k;
            }
            acc
        };
        horner(&self.num, None) / horner(&self.den, Some(1.0))
    }

    /// Companion realization without validity checks.
    pub fn companion(&self) -> MeDist {
        let d = self.den.len();
        let mut y = Matrix::zeros(d, d);
        for i in 0..d - 1 {
            y[(i, i + 1)] = ONE;
        }
        for (j, &q) in self.den.iter().enumerate() {
            y[(d - 1, j)] = c(-q);
        }
        let mut x = RowVec::zeros(d);
        for (j, &p) in self.num.iter().enumerate() {
            x[j] = c(p);
        }
        MeDist { x, y, z: unit_col(d, d - 1) }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct MeDist {
    x: RowVec,
    y: Matrix,
    z: ColVec,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum CdfPath {
    /// `[e^{t Y^I}]` read off the augmented generator.
    #[default]
    Augmented,
    /// `1 + x e^{tY} Y^{-1} z`.
    Classic,
}

#[derive(Debug, Clone, PartialEq)]
pub struct ValidationReport {
    pub stable: bool,
    pub nonneg_on_grid: bool,
    pub cdf_limit_one: bool,
    pub lt_at_zero_is_one: bool,
    pub p1_eq_q1: bool,
    pub min_pdf: f64,
    pub t_max: f64,
}

impl ValidationReport {
    pub fn is_valid(&self) -> bool {
        self.stable && self.nonneg_on_grid && self.cdf_limit_one && self.lt_at_zero_is_one && self.p1_eq_q1
    }

    pub fn failures(&self) -> Vec<&'static str> {
        let mut out = Vec::new();
        for (ok, name) in [
            (self.stable, "stable"),
            (self.nonneg_on_grid, "nonneg_on_grid"),
            (self.cdf_limit_one, "cdf_limit_one"),
            (self.lt_at_zero_is_one, "lt_at_zero_is_one"),
            (self.p1_eq_q1, "p1_eq_q1"),
        ] {
            if !ok {
                out.push(name);
            }
        }
        out
    }
}

impl MeDist {
    pub fn new(x: RowVec, y: Matrix, z: ColVec) -> Result<Self> {
        let d = y.nrows();
        if y.ncols() != d || x.len() != d || z.len() != d {
            return Err(Error::Dimension(format!(
                "triple has x:{} Y:{}x{} z:{}",
                x.len(),
                y.nrows(),
                y.ncols(),
                z.len()
            )));
        }
        if d == 0 {
            return Err(Error::Construction("empty triple".into()));
        }
        check_degree(d)?;
        check_finite(&y, "Y")?;
        if x.iter().chain(z.iter()).any(|v| !v.re.is_finite() || !v.im.is_finite()) {
            return Err(Error::NonFinite("x or z".into()));
        }
        Ok(MeDist { x, y, z })
    }

    pub fn from_real(x: &[f64], y: &[Vec<f64>], z: &[f64]) -> Result<Self> {
        MeDist::new(matfun::row(x), matfun::from_rows(y)?, matfun::col(z))
    }

    pub fn from_rational_lt(lt: &RationalLt) -> Result<Self> {
        check_degree(lt.degree())?;
        let q1 = lt.den[0];
        let p1 = lt.num.first().copied().unwrap_or(0.0);
        if q1 == 0.0 {
            return Err(Error::Construction("q(0) = 0: transform has a pole at the origin".into()));
        }
        if (p1 - q1).abs() > 1e-12 * q1.abs().max(1.0) {
            return Err(Error::Construction(format!(
                "p(0) = {p1} differs from q(0) = {q1}: the transform implies a point mass at zero"
            )));
        }
        Ok(lt.companion())
    }

    /// Block bidiagonal realization of a product of rational transforms.
    pub fn from_product_form(factors: &[RationalLt]) -> Result<Self> {
        if factors.is_empty() {
            return Err(Error::Construction("empty product".into()));
        }
        let dims: Vec<usize> = factors.iter().map(|f| f.degree()).collect();
        check_degree(dims.iter().sum())?;
        let prod: f64 = factors
            .iter()
            .map(|f| f.num.first().copied().unwrap_or(0.0) / f.den[0])
            .product();
        if !((prod - 1.0).abs() <= 1e-12) {
            return Err(Error::Construction(format!(
                "product of factors at s = 0 is {prod}, not 1"
            )));
        }
        let comps: Vec<MeDist> = factors.iter().map(|f| f.companion()).collect();
        let k = comps.len();
        let mut grid: Vec<Vec<Option<Matrix>>> = vec![vec![None; k]; k];
        for j in 0..k {
            grid[j][j] = Some(comps[j].y.clone());
            if j + 1 < k {
                grid[j][j + 1] =
                    Some(matfun::col_as_matrix(&comps[j].z) * row_as_matrix(&comps[j + 1].x));
            }
        }
        let y = block(&grid)?;
        let d = y.nrows();
        let mut x = RowVec::zeros(d);
        x.columns_mut(0, dims[0]).copy_from(&comps[0].x);
        MeDist::new(x, y, unit_col(d, d - 1))
    }

    /// Exponential law with the given mean.
    pub fn exponential(mean: f64) -> Result<Self> {
        if !(mean > 0.0) || !mean.is_finite() {
            return Err(Error::Domain(format!("exponential mean {mean}")));
        }
        MeDist::from_real(&[1.0 / mean], &[vec![-1.0 / mean]], &[1.0])
    }

    pub fn degree(&self) -> usize {
        self.y.nrows()
    }

    pub fn x(&self) -> &RowVec {
        &self.x
    }

    pub fn y(&self) -> &Matrix {
        &self.y
    }

    pub fn z(&self) -> &ColVec {
        &self.z
    }

    pub fn into_parts(self) -> (RowVec, Matrix, ColVec) {
        (self.x, self.y, self.z)
    }

    pub fn is_real(&self) -> bool {
        self.x.iter().chain(self.y.iter()).chain(self.z.iter()).all(|v| v.im == 0.0)
    }

    pub fn pdf_c(&self, t: f64) -> Result<C64> {
        if t < 0.0 {
            return Ok(C64::new(0.0, 0.0));
        }
        Ok(quad_form(&self.x, &expm(&self.y.scale(t))?, &self.z))
    }

    pub fn pdf(&self, t: f64) -> Result<f64> {
        let v = self.pdf_c(t)?;
        assert_real(v, 1.0)
    }

    /// Augmented generator `[[0, x], [0, Y]]`.
    pub fn augmented(&self) -> Matrix {
        let d = self.degree();
        let mut m = Matrix::zeros(d + 1, d + 1);
        m.view_mut((0, 1), (1, d)).copy_from(&self.x);
        m.view_mut((1, 1), (d, d)).copy_from(&self.y);
        m
    }

    pub fn augmented_z(&self) -> ColVec {
        let d = self.degree();
        let mut v = ColVec::zeros(d + 1);
        v.rows_mut(1, d).copy_from(&self.z);
        v
    }

    pub fn cdf_c(&self, t: f64, path: CdfPath) -> Result<C64> {
        if t <= 0.0 {
            return Ok(C64::new(0.0, 0.0));
        }
        match path {
            CdfPath::Augmented => {
                let e = expm(&self.augmented().scale(t))?;
                Ok((e.row(0) * self.augmented_z())[(0, 0)])
            }
            CdfPath::Classic => {
                let w = solve_vec(&self.y, &self.z)?;
                let v = &self.x * expm(&self.y.scale(t))? * w;
                Ok(ONE + v[(0, 0)])
            }
        }
    }

    pub fn cdf(&self, t: f64) -> Result<f64> {
        assert_real(self.cdf_c(t, CdfPath::Augmented)?, 1.0)
    }

    pub fn cdf_with(&self, t: f64, path: CdfPath) -> Result<f64> {
        assert_real(self.cdf_c(t, path)?, 1.0)
    }

    /// Complementary cdf `P(Z > t) = -x e^{tY} Y^{-1} z`.
    pub fn ccdf(&self, t: f64) -> Result<f64> {
        if t <= 0.0 {
            return Ok(1.0);
        }
        let w = solve_vec(&self.y, &self.z)?;
        let v = -(&self.x * expm(&self.y.scale(t))? * w)[(0, 0)];
        assert_real(v, 1.0)
    }

    /// Laplace transform `x (sI - Y)^{-1} z`.
    pub fn lt(&self, s: C64) -> Result<C64> {
        let d = self.degree();
        let m = identity(d) * s - &self.y;
        let v = solve_vec(&m, &self.z)?;
        Ok((&self.x * v)[(0, 0)])
    }

    pub fn moment(&self, k: u32) -> Result<f64> {
        let mut v = self.z.clone();
        for _ in 0..=k {
            v = solve_vec(&self.y, &v)?;
        }
        let fact: f64 = (1..=k).map(|i| i as f64).product();
        let sign = if k % 2 == 0 { -1.0 } else { 1.0 };
        let m = (&self.x * v)[(0, 0)] * (sign * fact);
        assert_real(m, m.re.abs().max(1.0))
    }

    pub fn mean(&self) -> Result<f64> {
        self.moment(1)
    }

    /// The law of `cZ`.
    pub fn scaled(&self, factor: f64) -> Result<Self> {
        if !(factor > 0.0) || !factor.is_finite() {
            return Err(Error::Domain(format!("scale factor {factor}")));
        }
        Ok(MeDist {
            x: self.x.unscale(factor),
            y: self.y.unscale(factor),
            z: self.z.clone(),
        })
    }

    /// Rescales a unit-mean law to mean `s`.
    pub fn scale_mean(&self, s: f64) -> Result<Self> {
        let m = self.mean()?;
        if (m - 1.0).abs() > 1e-8 {
            return Err(Error::Precondition(format!("mean is {m}, expected 1")));
        }
        self.scaled(s)
    }

    /// The same law rescaled to unit mean.
    pub fn unit_mean(&self) -> Result<Self> {
        self.scaled(1.0 / self.mean()?)
    }

    /// Row vectors `x e^{k h Y}` for `k = 0..n`.
    pub fn propagate(&self, h: f64, n: usize) -> Result<Vec<RowVec>> {
        let step = expm(&self.y.scale(h))?;
        let mut out = Vec::with_capacity(n + 1);
        let mut v = self.x.clone();
        for _ in 0..=n {
            out.push(v.clone());
            v = &v * &step;
        }
        Ok(out)
    }

    /// `p(0)` and `q(0)` of the minimal transform, as `x adj(-Y) z` and `det(-Y)`.
    pub fn constant_terms(&self) -> Result<(f64, f64)> {
        let neg = -self.y.clone();
        let q1 = neg.clone().determinant();
        let f0 = match solve_vec(&neg, &self.z) {
            Ok(v) => (&self.x * v)[(0, 0)],
            Err(_) => return Ok((f64::NAN, q1.re)),
        };
        Ok(((f0 * q1).re, q1.re))
    }

    pub fn validate(&self) -> ValidationReport {
        let abscissa = spectral_abscissa(&self.y).unwrap_or(f64::NAN);
        let stable = abscissa < 0.0;
        let t_max = if stable { 40.0 / abscissa.abs() } else { f64::NAN };
        let (mut nonneg, mut min_pdf, mut cdf_one) = (false, f64::NAN, false);
        if stable {
            let n = 512;
            let h = t_max / n as f64;
            if let Ok(rows) = self.propagate(h, n) {
                let vals: Vec<f64> = rows.iter().map(|r| (r * &self.z)[(0, 0)].re).collect();
                let peak = vals.iter().fold(0.0f64, |a, v| a.max(v.abs()));
                min_pdf = vals.iter().copied().fold(f64::INFINITY, f64::min);
                nonneg = min_pdf >= -1e-9 * peak.max(1.0);
            }
            cdf_one = self.cdf(t_max).map(|v| (v - 1.0).abs() < 1e-6).unwrap_or(false);
        }
        let lt0 = self
            .lt(C64::new(0.0, 0.0))
            .map(|v| (v - 1.0).norm() < 1e-8)
            .unwrap_or(false);
        let p1q1 = match self.constant_terms() {
            Ok((p1, q1)) => (p1 - q1).abs() <= 1e-8 * q1.abs().max(1e-300),
            Err(_) => false,
        };
        ValidationReport {
            stable,
            nonneg_on_grid: nonneg,
            cdf_limit_one: cdf_one,
            lt_at_zero_is_one: lt0,
            p1_eq_q1: p1q1,
            min_pdf,
            t_max,
        }
    }

    /// Error unless the triple passes every validity check.
    pub fn ensure_valid(&self) -> Result<()> {
        let r = self.validate();
        if r.is_valid() {
            Ok(())
        } else {
            Err(Error::Construction(format!("failed checks: {}", r.failures().join(", "))))
        }
    }
}

/// Oscillatory law with transform `50 / ((s + 1)(s^2 + 2s + 50))`
/// with density `(1 - cos 7t) e^{-t}`.
pub fn oscillatory_example() -> MeDist {
    RationalLt { num: vec![50.0], den: vec![50.0, 52.0, 3.0] }.companion()
}
