//! Entropy, additive-channel mutual information, scalar quantization and the
//! matrix Gaussian-like and Rayleigh-like generalizations.

use crate::algebra::convolve;
use crate::error::{Error, Result};
use crate::matfun::{
    assert_real, col_as_matrix, expm, inverse, mat_frac_power, quad, quad_with_breaks, row_as_matrix,
    ColVec, Matrix, QuadOptions, QuadResult, RowVec,
};
use crate::medist::MeDist;
use crate::special::gamma;
use std::f64::consts::PI;

const FLOOR: f64 = 1e-300;

#[derive(Debug, Clone, PartialEq)]
pub struct Entropy {
    pub nats: f64,
    pub quad: QuadResult,
    /// `(1/θ) ln ∫ f^{1-θ}` at `θ = 1e-4`, when requested.
    pub limit_check: Option<f64>,
}

impl Entropy {
    pub fn warning(&self) -> Option<String> {
        self.quad.warning()
    }
}

fn tail_breaks(d: &MeDist) -> Result<Vec<f64>> {
    let rate = crate::matfun::spectral_abscissa(d.y())?;
    if !(rate < 0.0) {
        return Err(Error::Domain("density does not decay".into()));
    }
    let s = 1.0 / -rate;
    Ok(vec![0.5 * s, s, 3.0 * s, 10.0 * s, 40.0 * s])
}

fn integrate_density<F: Fn(f64) -> f64>(d: &MeDist, g: F) -> Result<QuadResult> {
    let b = tail_breaks(d)?;
    let last = *b.last().unwrap();
    let head = quad_with_breaks(&g, 0.0, last, &b[..b.len() - 1], &QuadOptions::tol(1e-14, 1e-12));
    let tail = quad(&g, last, f64::INFINITY, &QuadOptions::tol(1e-14, 1e-12));
    Ok(QuadResult {
        value: head.value + tail.value,
        error: head.error + tail.error,
        converged: head.converged && tail.converged,
        evals: head.evals + tail.evals,
    })
}

/// Differential entropy `-∫ f ln f` by adaptive quadrature.
pub fn entropy_numeric(d: &MeDist, limit_check: bool) -> Result<Entropy> {
    let f = |t: f64| {
        let v = d.pdf(t).unwrap_or(f64::NAN).max(FLOOR);
        -v * v.ln()
    };
    let q = integrate_density(d, f)?;
    if !q.value.is_finite() {
        return Err(Error::NonFinite("entropy integral".into()));
    }
    let limit_check = if limit_check {
        let th = 1e-4;
        let g = |t: f64| d.pdf(t).unwrap_or(f64::NAN).max(0.0).powf(1.0 - th);
        let r = integrate_density(d, g)?;
        Some(r.value.ln() / th)
    } else {
        None
    };
    Ok(Entropy { nats: q.value, quad: q, limit_check })
}

#[derive(Debug, Clone, PartialEq)]
pub struct MutualInformation {
    pub nats: f64,
    /// `ln(1 + Sx/Sw)`, the value for exponential noise at the entropy-maximizing input.
    pub exp_noise_capacity: f64,
    pub h_y_unit: f64,
    pub h_w_unit: f64,
    pub warnings: Vec<String>,
}

/// `I(x; x + w)` for independent nonnegative ME input `x` and noise `w`.
///
/// With `y = x + w` scaled to unit mean,
/// `I = ln(1 + Sx/Sw) + h(y_um) - h(w_um)`; since the exponential law has the
/// largest entropy at fixed mean, `I <= ln(1 + Sx/Sw) + 1 - h(w_um)`.
pub fn mi_additive_channel(dx: &MeDist, dw: &MeDist) -> Result<MutualInformation> {
    let sx = dx.mean()?;
    let sw = dw.mean()?;
    if !(sx > 0.0 && sw > 0.0) {
        return Err(Error::Domain(format!("means {sx}, {sw}")));
    }
    let y = convolve(dx, dw)?.unit_mean()?;
    let hy = entropy_numeric(&y, false)?;
    let hw = entropy_numeric(&dw.unit_mean()?, false)?;
    let cap = (sx / sw).ln_1p();
    let nats = cap + hy.nats - hw.nats;
    let bound = cap + 1.0 - hw.nats;
    if nats > bound + 1e-9 {
        return Err(Error::Precondition(format!("mutual information {nats} exceeds bound {bound}")));
    }
    let warnings = [hy.warning(), hw.warning()].into_iter().flatten().collect();
    Ok(MutualInformation { nats, exp_noise_capacity: cap, h_y_unit: hy.nats, h_w_unit: hw.nats, warnings })
}

#[derive(Debug, Clone, PartialEq)]
pub struct Quantizer {
    /// Interior thresholds `l_1 .. l_{M-1}`.
    pub thresholds: Vec<f64>,
    pub centroids: Vec<f64>,
    pub mse: f64,
    pub mse_history: Vec<f64>,
    pub iterations: usize,
    pub converged: bool,
    pub warnings: Vec<String>,
}

/// Closed-form cell integrals of `f` and `t f`.
struct Cells<'a> {
    d: &'a MeDist,
    yinv: Matrix,
    yinv2: Matrix,
}

impl<'a> Cells<'a> {
    fn new(d: &'a MeDist) -> Result<Self> {
        let yinv = inverse(d.y())?;
        let yinv2 = &yinv * &yinv;
        Ok(Cells { d, yinv, yinv2 })
    }

    /// `(x e^{tY} Y^{-1} z, x e^{tY} (t Y^{-1} - Y^{-2}) z)`, both zero at `t = ∞`.
    fn anti(&self, t: f64) -> Result<(f64, f64)> {
        if t.is_infinite() {
            return Ok((0.0, 0.0));
        }
        let row = row_as_matrix(self.d.x()) * expm(&self.d.y().scale(t))?;
        let z = col_as_matrix(self.d.z());
        let p = (&row * &self.yinv * &z)[(0, 0)];
        let m = (&row * (self.yinv.scale(t) - &self.yinv2) * &z)[(0, 0)];
        Ok((assert_real(p, 1.0)?, assert_real(m, 1.0)?))
    }
}

fn bisect_quantile(d: &MeDist, p: f64, hi0: f64) -> Result<f64> {
    let mut hi = hi0.max(1e-12);
    while d.cdf(hi)? < p {
        hi *= 2.0;
        if hi > 1e300 {
            return Err(Error::NoConvergence("quantile bracket".into()));
        }
    }
    let mut lo = 0.0;
    for _ in 0..200 {
        let mid = 0.5 * (lo + hi);
        if d.cdf(mid)? < p {
            lo = mid;
        } else {
            hi = mid;
        }
        if hi - lo <= 1e-14 * hi {
            break;
        }
    }
    Ok(0.5 * (lo + hi))
}

/// Lloyd-Max quantizer with `levels` cells, seeded at equispaced quantiles.
pub fn lloyd_max(d: &MeDist, levels: usize, max_iter: usize) -> Result<Quantizer> {
    if levels == 0 {
        return Err(Error::Domain("at least one level".into()));
    }
    let cells = Cells::new(d)?;
    let m2 = d.moment(2)?;
    let mean = d.mean()?;
    let mut centroids = Vec::with_capacity(levels);
    for q in 0..levels {
        centroids.push(bisect_quantile(d, (q as f64 + 0.5) / levels as f64, mean)?);
    }
    let mut warnings = Vec::new();
    let mut history = Vec::new();
    let mut thresholds = vec![0.0; levels.saturating_sub(1)];
    let mut converged = false;
    let mut iterations = 0;
    let mut mse = f64::NAN;
    while iterations < max_iter {
        iterations += 1;
        for q in 1..levels {
            thresholds[q - 1] = 0.5 * (centroids[q - 1] + centroids[q]);
        }
        let mut edges = Vec::with_capacity(levels + 1);
        edges.push(cells.anti(0.0)?);
        for &l in &thresholds {
            edges.push(cells.anti(l)?);
        }
        edges.push((0.0, 0.0));
        let mut moved = 0.0f64;
        let mut energy = 0.0;
        for q in 0..levels {
            let p = edges[q + 1].0 - edges[q].0;
            let m1 = edges[q + 1].1 - edges[q].1;
            let lo = if q == 0 { 0.0 } else { thresholds[q - 1] };
            let new = if p > 1e-300 && (m1 / p).is_finite() {
                m1 / p
            } else {
                let hi = if q + 1 < levels { thresholds[q] } else { 2.0 * lo.max(mean) };
                warnings.push(format!("empty cell {q} reseeded at iteration {iterations}"));
                0.5 * (lo + hi)
            };
            moved = moved.max((new - centroids[q]).abs() / new.abs().max(1e-300));
            centroids[q] = new;
            energy += p * new * new;
        }
        mse = (m2 - energy).max(0.0);
        history.push(mse);
        if moved < 1e-10 {
            converged = true;
            break;
        }
    }
    for q in 1..levels {
        thresholds[q - 1] = 0.5 * (centroids[q - 1] + centroids[q]);
    }
    if !converged {
        warnings.push(format!("no convergence after {max_iter} iterations"));
    }
    Ok(Quantizer { thresholds, centroids, mse, mse_history: history, iterations, converged, warnings })
}

#[derive(Debug, Clone, PartialEq)]
pub struct PanterDite {
    pub mse: f64,
    /// `∫ f^{1/3}`.
    pub cube_root_integral: f64,
    pub exact: bool,
}

/// High-resolution MSE `(∫ f^{1/3})^3 / (12 M^2)`.
///
/// When `f = g^3` for a supplied ME triple `g`, the integral is `-x̆ Y̆^{-1} z̆`;
/// it is checked against quadrature before use.
pub fn panter_dite_mse(d: &MeDist, levels: usize, cube_root: Option<&MeDist>) -> Result<PanterDite> {
    if levels == 0 {
        return Err(Error::Domain("at least one level".into()));
    }
    let g = |t: f64| d.pdf(t).unwrap_or(f64::NAN).max(0.0).cbrt();
    let numeric = integrate_density(d, g)?.value;
    let (integral, exact) = match cube_root {
        Some(h) => {
            let w = crate::matfun::solve_vec(h.y(), h.z())?;
            let v = assert_real(-(h.x() * w)[(0, 0)], 1.0)?;
            if (v - numeric).abs() > 1e-8 * v.abs().max(1.0) {
                return Err(Error::Precondition(format!(
                    "cube-root triple gives {v}, quadrature gives {numeric}"
                )));
            }
            (v, true)
        }
        None => (numeric, false),
    };
    let m = levels as f64;
    Ok(PanterDite { mse: integral.powi(3) / (12.0 * m * m), cube_root_integral: integral, exact })
}

fn check_triple(x: &RowVec, y: &Matrix, z: &ColVec) -> Result<()> {
    if y.nrows() != y.ncols() || x.len() != y.nrows() || z.len() != y.nrows() {
        return Err(Error::Dimension("triple shapes".into()));
    }
    Ok(())
}

fn pair(x: &RowVec, m: &Matrix, z: &ColVec) -> Result<f64> {
    assert_real((x * m * z)[(0, 0)], 1.0)
}

/// `x (-Y)^{-p} z`.
fn neg_power_form(x: &RowVec, y: &Matrix, z: &ColVec, p: f64) -> Result<f64> {
    pair(x, &mat_frac_power(&(-y), -p)?, z)
}

fn normalizer(v: f64) -> Result<f64> {
    if !(v > 0.0 && v.is_finite()) {
        return Err(Error::Construction(format!("normalizing integral {v}")));
    }
    Ok(1.0 / v)
}

/// Density `c x e^{t^2 Y} z` on the real line.
#[derive(Debug, Clone, PartialEq)]
pub struct MatrixGaussian {
    x: RowVec,
    y: Matrix,
    z: ColVec,
    c: f64,
}

impl MatrixGaussian {
    pub fn new(x: RowVec, y: Matrix, z: ColVec) -> Result<Self> {
        check_triple(&x, &y, &z)?;
        let c = normalizer(PI.sqrt() * neg_power_form(&x, &y, &z, 0.5)?)?;
        Ok(MatrixGaussian { x, y, z, c })
    }

    pub fn from_dist(d: &MeDist) -> Result<Self> {
        MatrixGaussian::new(d.x().clone(), d.y().clone(), d.z().clone())
    }

    pub fn normalizer(&self) -> f64 {
        self.c
    }

    pub fn pdf(&self, t: f64) -> Result<f64> {
        Ok(self.c * pair(&self.x, &expm(&self.y.scale(t * t))?, &self.z)?)
    }

    pub fn moment(&self, n: u32) -> Result<f64> {
        if n % 2 == 1 {
            return Ok(0.0);
        }
        let p = (n as f64 + 1.0) / 2.0;
        Ok(self.c * gamma(p) * neg_power_form(&self.x, &self.y, &self.z, p)?)
    }
}

/// Density `(c/π) x e^{(u^2 + v^2) Y} z` on the plane; `c = 1` for an ME triple.
#[derive(Debug, Clone, PartialEq)]
pub struct MatrixGaussian2 {
    x: RowVec,
    y: Matrix,
    z: ColVec,
    c: f64,
}

impl MatrixGaussian2 {
    pub fn new(x: RowVec, y: Matrix, z: ColVec) -> Result<Self> {
        check_triple(&x, &y, &z)?;
        let c = normalizer(neg_power_form(&x, &y, &z, 1.0)?)?;
        Ok(MatrixGaussian2 { x, y, z, c })
    }

    pub fn from_dist(d: &MeDist) -> Result<Self> {
        MatrixGaussian2::new(d.x().clone(), d.y().clone(), d.z().clone())
    }

    pub fn pdf(&self, u: f64, v: f64) -> Result<f64> {
        Ok(self.c / PI * pair(&self.x, &expm(&self.y.scale(u * u + v * v))?, &self.z)?)
    }

    /// `E[U^n V^m] = (c/π) Γ((n+1)/2) Γ((m+1)/2) x (-Y)^{-(n+m+2)/2} z`.
    pub fn moment(&self, n: u32, m: u32) -> Result<f64> {
        if n % 2 == 1 || m % 2 == 1 {
            return Ok(0.0);
        }
        let (a, b) = ((n as f64 + 1.0) / 2.0, (m as f64 + 1.0) / 2.0);
        Ok(self.c / PI * gamma(a) * gamma(b) * neg_power_form(&self.x, &self.y, &self.z, a + b)?)
    }

    /// Density of either coordinate, `(c/√π) x e^{u^2 Y} (-Y)^{-1/2} z`.
    pub fn marginal(&self, u: f64) -> Result<f64> {
        let m = expm(&self.y.scale(u * u))? * mat_frac_power(&(-&self.y), -0.5)?;
        Ok(self.c / PI.sqrt() * pair(&self.x, &m, &self.z)?)
    }
}

/// Density `2 c t x e^{t^2 Y} z` on `t > 0`; `c = 1` for an ME triple.
#[derive(Debug, Clone, PartialEq)]
pub struct MatrixRayleigh {
    x: RowVec,
    y: Matrix,
    z: ColVec,
    c: f64,
}

impl MatrixRayleigh {
    pub fn new(x: RowVec, y: Matrix, z: ColVec) -> Result<Self> {
        check_triple(&x, &y, &z)?;
        let c = normalizer(neg_power_form(&x, &y, &z, 1.0)?)?;
        Ok(MatrixRayleigh { x, y, z, c })
    }

    pub fn from_dist(d: &MeDist) -> Result<Self> {
        MatrixRayleigh::new(d.x().clone(), d.y().clone(), d.z().clone())
    }

    pub fn pdf(&self, t: f64) -> Result<f64> {
        if t < 0.0 {
            return Ok(0.0);
        }
        Ok(2.0 * self.c * t * pair(&self.x, &expm(&self.y.scale(t * t))?, &self.z)?)
    }

    pub fn moment(&self, n: u32) -> Result<f64> {
        let p = (n as f64 + 2.0) / 2.0;
        Ok(self.c * gamma(p) * neg_power_form(&self.x, &self.y, &self.z, p)?)
    }
}
