//! Link-level metrics: outage, ARQ/HARQ throughput, effective and ergodic
//! capacity, error rates, diversity and rate optimization.

mod interference;
mod optimize;

pub use interference::{
    arq_interference, interference_success, interference_success_derivative,
    harq_persistent_interference, success_exponential_interferer, success_exponential_signal,
    van_loan_integral, van_loan_integral_to,
    InterferencePath, InterferenceScenario,
};
pub use optimize::{optimize_rate, OptimizeMetric, RatePoint};

use crate::algebra::kfold_block;
use crate::error::{Error, Result};
use crate::matfun::{
    assert_real, block, c, col_as_matrix, eig, expm, identity, quad, quad_form, row_as_matrix,
    solve_vec, ColVec, Matrix, QuadOptions, RowVec, C64,
};
use crate::medist::MeDist;
use crate::special::{gamma, upper_gamma};
use serde::Serialize;
use std::f64::consts::PI;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum PathTag {
    ClosedForm,
    Quadrature,
    Eigen,
    Sylvester,
    Kron,
    Vanloan,
}

#[derive(Debug, Clone, Default, PartialEq, Serialize)]
pub struct Diagnostics {
    pub imag_residual: f64,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub quad_error: Option<f64>,
    #[serde(skip_serializing_if = "Vec::is_empty")]
    pub warnings: Vec<String>,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct MetricResult {
    pub value: f64,
    pub path: PathTag,
    pub diagnostics: Diagnostics,
}

impl MetricResult {
    pub fn real(value: f64, path: PathTag) -> Self {
        MetricResult { value, path, diagnostics: Diagnostics::default() }
    }

    pub fn from_complex(v: C64, path: PathTag, scale: f64) -> Result<Self> {
        let value = assert_real(v, scale)?;
        Ok(MetricResult {
            value,
            path,
            diagnostics: Diagnostics { imag_residual: v.im.abs(), ..Default::default() },
        })
    }

    pub fn with_quad(mut self, q: &crate::matfun::QuadResult) -> Self {
        self.diagnostics.quad_error = Some(q.error);
        if let Some(w) = q.warning() {
            self.diagnostics.warnings.push(w);
        }
        self
    }

    pub fn warn(mut self, w: impl Into<String>) -> Self {
        self.diagnostics.warnings.push(w.into());
        self
    }
}

/// How the decoding threshold follows from the rate.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum ThetaConvention {
    /// `Θ = e^R - 1` against the channel as specified.
    #[default]
    Absolute,
    /// `Θ = (e^R - 1) / S` against the unit-mean channel.
    PerUnitMean,
}

/// Rate in nats per channel use and the SNR threshold it implies.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Link {
    pub rate: f64,
    pub theta: f64,
}

impl Link {
    pub fn new(rate: f64, snr: f64, conv: ThetaConvention) -> Result<Self> {
        if !(rate >= 0.0) || !rate.is_finite() {
            return Err(Error::Domain(format!("rate {rate}")));
        }
        let theta = match conv {
            ThetaConvention::Absolute => rate.exp_m1(),
            ThetaConvention::PerUnitMean => {
                if !(snr > 0.0) {
                    return Err(Error::Domain(format!("mean SNR {snr}")));
                }
                rate.exp_m1() / snr
            }
        };
        Ok(Link { rate, theta })
    }

    pub fn absolute(rate: f64) -> Self {
        Link { rate, theta: rate.exp_m1() }
    }

    pub fn with_theta(rate: f64, theta: f64) -> Self {
        Link { rate, theta }
    }
}

pub fn outage(d: &MeDist, theta: f64) -> Result<MetricResult> {
    MetricResult::from_complex(d.cdf_c(theta, Default::default())?, PathTag::ClosedForm, 1.0)
}

/// Largest rate `C` with `P(ln(1 + Z) <= C) <= q`.
pub fn outage_capacity(d: &MeDist, q: f64) -> Result<MetricResult> {
    if !(q > 0.0 && q < 1.0) {
        return Err(Error::Domain(format!("target outage {q} must lie in (0, 1)")));
    }
    let f = |cap: f64| d.cdf(cap.exp_m1());
    let mut hi = 1.0;
    while f(hi)? < q {
        hi *= 2.0;
        if hi > 700.0 {
            return Err(Error::Domain("target outage unreachable".into()));
        }
    }
    let mut lo = 0.0;
    for _ in 0..200 {
        let mid = 0.5 * (lo + hi);
        let v = f(mid)?;
        if (v - q).abs() < 1e-14 || hi - lo < 1e-15 * hi {
            lo = mid;
            hi = mid;
            break;
        }
        if v < q {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    Ok(MetricResult::real(0.5 * (lo + hi), PathTag::ClosedForm))
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum ArqPath {
    #[default]
    Augmented,
    /// `-x e^{ΘY} Y^{-1} z`.
    SuccessProbability,
}

pub fn arq_throughput(d: &MeDist, link: Link, path: ArqPath) -> Result<MetricResult> {
    let p = match path {
        ArqPath::Augmented => 1.0 - d.cdf(link.theta)?,
        ArqPath::SuccessProbability => d.ccdf(link.theta)?,
    };
    Ok(MetricResult::real(link.rate * p, PathTag::ClosedForm))
}

/// Throughput of HARQ with at most `k` transmissions per packet.
pub fn harq_truncated(d: &MeDist, link: Link, k: usize) -> Result<MetricResult> {
    let f = kfold_block(d, k)?.partial_cdfs(link.theta)?;
    let denom = 1.0 + f[..k - 1].iter().sum::<f64>();
    Ok(MetricResult::real(link.rate * (1.0 - f[k - 1]) / denom, PathTag::ClosedForm))
}

/// Mean number of renewals in `[0, Θ]`, that is `Σ_k P(Z_1 + ... + Z_k <= Θ)`.
pub fn renewal_mean(d: &MeDist, theta: f64) -> Result<f64> {
    if theta <= 0.0 {
        return Ok(0.0);
    }
    let n = d.degree();
    let mut g = Matrix::zeros(n + 1, n + 1);
    g.view_mut((0, 1), (1, n)).copy_from(d.x());
    let r = d.y() + col_as_matrix(d.z()) * row_as_matrix(d.x());
    g.view_mut((1, 1), (n, n)).copy_from(&r);
    let e = expm(&g.scale(theta))?;
    assert_real((e.row(0) * d.augmented_z())[(0, 0)], 1.0)
}

/// Renewal density `Σ_k f_k(Θ)` of the partial sums.
pub fn renewal_density(d: &MeDist, theta: f64) -> Result<f64> {
    let r = d.y() + col_as_matrix(d.z()) * row_as_matrix(d.x());
    assert_real(quad_form(d.x(), &expm(&r.scale(theta))?, d.z()), 1.0)
}

/// Throughput of HARQ that retransmits until the accumulated SNR exceeds `Θ`.
pub fn harq_persistent(d: &MeDist, link: Link) -> Result<MetricResult> {
    let m = renewal_mean(d, link.theta)?;
    Ok(MetricResult::real(link.rate / (1.0 + m), PathTag::ClosedForm))
}

/// Persistent HARQ where each round combines `n` independent copies of `d`,
/// evaluated through `n` root-of-unity blocks.
pub fn harq_persistent_diversity(d: &MeDist, link: Link, n: usize) -> Result<MetricResult> {
    if n == 0 {
        return Err(Error::Domain("diversity order must be at least 1".into()));
    }
    let dd = d.degree();
    crate::algebra::check_degree(1 + dd * n)?;
    let zx = col_as_matrix(d.z()) * row_as_matrix(d.x());
    let mut grid: Vec<Vec<Option<Matrix>>> = vec![vec![None; n + 1]; n + 1];
    grid[0][0] = Some(Matrix::zeros(1, 1));
    grid[0][1] = Some(row_as_matrix(d.x()));
    for k in 0..n {
        let w = C64::from_polar(1.0, 2.0 * PI * k as f64 / n as f64);
        grid[k + 1][k + 1] = Some(d.y() + &zx * w);
        if k + 1 < n {
            grid[k + 1][k + 2] = Some(zx.clone());
        }
    }
    let g = block(&grid)?;
    let e = expm(&g.scale(link.theta))?;
    let mut tail = ColVec::zeros(g.nrows());
    tail.rows_mut(g.nrows() - dd, dd).copy_from(d.z());
    let m = MetricResult::from_complex((e.row(0) * tail)[(0, 0)], PathTag::ClosedForm, 1.0)?;
    Ok(MetricResult {
        value: link.rate / (1.0 + m.value),
        ..m
    })
}

/// Persistent HARQ over the unit-rate Erlang law `1/(1+s)^n`, read from a single
/// `(n+1)`-dimensional exponential.
pub fn harq_persistent_erlang(n: usize, link: Link) -> Result<MetricResult> {
    if n == 0 {
        return Err(Error::Domain("shape must be at least 1".into()));
    }
    let d = n + 1;
    // u^{n+1} - u^n - u + 1, shifted by -1
    let mut den = vec![0.0; d];
    den[0] = 1.0;
    den[1] -= 1.0;
    den[n] -= 1.0;
    let mut y = Matrix::zeros(d, d);
    for i in 0..d - 1 {
        y[(i, i + 1)] = c(1.0);
    }
    for (j, &q) in den.iter().enumerate() {
        y[(d - 1, j)] = c(-q);
    }
    let g = y - identity(d);
    let m = expm(&g.scale(link.theta))?[(d - 1, d - 1)];
    let m = assert_real(m, 1.0)?;
    Ok(MetricResult::real(link.rate / m, PathTag::ClosedForm))
}

/// The four links of a two-way relay: 1→3, 3→2, 2→3, 3→1.
#[derive(Debug, Clone)]
pub struct NcbrLinks {
    pub l13: MeDist,
    pub l32: MeDist,
    pub l23: MeDist,
    pub l31: MeDist,
}

/// Throughput of network-coded bidirectional relaying over three phases.
pub fn ncbr_throughput(links: &NcbrLinks, r12: f64, r21: f64) -> Result<MetricResult> {
    let q = |a: &MeDist, b: &MeDist, r: f64| -> Result<f64> {
        let th = r.exp_m1();
        Ok(1.0 - (1.0 - a.cdf(th)?) * (1.0 - b.cdf(th)?))
    };
    let q12 = q(&links.l13, &links.l32, r12)?;
    let q21 = q(&links.l23, &links.l31, r21)?;
    Ok(MetricResult::real((r12 * (1.0 - q12) + r21 * (1.0 - q21)) / 3.0, PathTag::ClosedForm))
}

/// Effective capacity `-(1/θ) ln E[e^{-θ ζ}]` for a service rate `ζ` with law `d`.
pub fn eff_capacity_rate(d: &MeDist, theta: f64) -> Result<MetricResult> {
    if !(theta > 0.0) {
        return Err(Error::Domain(format!("QoS exponent {theta}")));
    }
    let v = d.lt(c(theta))?;
    let e = assert_real(v, 1.0)?;
    Ok(MetricResult::real(-e.ln() / theta, PathTag::ClosedForm))
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum EffCapPath {
    #[default]
    Quadrature,
    Eigen,
}

/// `E[(1 + Z)^{-θ}] - 1` through the gamma-kernel integral.
fn shannon_moment_m1_quad(d: &MeDist, theta: f64) -> Result<(f64, crate::matfun::QuadResult)> {
    let w = solve_vec(d.y(), d.z())?;
    let n = d.degree();
    let g = |u: f64| -> f64 {
        let m = identity(n) * c(u) - d.y();
        match solve_vec(&m, &w) {
            Ok(v) => (d.x() * v)[(0, 0)].re * u.powf(theta) * (-u).exp(),
            Err(_) => f64::NAN,
        }
    };
    let q = quad(g, 0.0, f64::INFINITY, &QuadOptions::tol(1e-15, 1e-12));
    Ok((q.value / gamma(theta), q))
}

fn shannon_moment_eigen(d: &MeDist, theta: f64) -> Result<Option<C64>> {
    let e = eig(d.y())?;
    if !e.diagonalizable || e.condition > 1e8 {
        return Ok(None);
    }
    let mut xi = Vec::with_capacity(e.values.len());
    for l in &e.values {
        if l.im.abs() > 1e-12 * l.norm() || l.re >= 0.0 {
            return Ok(None);
        }
        let v = -l.re;
        xi.push(c(v.powf(theta - 1.0) * v.exp() * upper_gamma(1.0 - theta, v)?));
    }
    let vi = e.vectors_inv.as_ref().expect("diagonalizable");
    let mid = Matrix::from_diagonal(&ColVec::from_vec(xi));
    Ok(Some(quad_form(d.x(), &(&e.vectors * mid * vi), d.z())))
}

/// Effective capacity of a Shannon-rate link, `-(1/θ) ln E[(1 + Z)^{-θ}]`.
pub fn eff_capacity_shannon(d: &MeDist, theta: f64, path: EffCapPath) -> Result<MetricResult> {
    if !(theta > 0.0) || !theta.is_finite() {
        return Err(Error::Domain(format!("QoS exponent {theta}")));
    }
    if path == EffCapPath::Eigen {
        if let Some(v) = shannon_moment_eigen(d, theta)? {
            let e = assert_real(v, 1.0)?;
            let mut r = MetricResult::real(-e.ln() / theta, PathTag::Eigen);
            r.diagnostics.imag_residual = v.im.abs();
            return Ok(r);
        }
        let r = eff_capacity_shannon(d, theta, EffCapPath::Quadrature)?;
        return Ok(r.warn("spectrum not real and simple; used quadrature"));
    }
    let (m1, q) = shannon_moment_m1_quad(d, theta)?;
    Ok(MetricResult::real(-m1.ln_1p() / theta, PathTag::Quadrature).with_quad(&q))
}

/// Ergodic capacity `E[ln(1 + Z)]` as the small-θ limit of the effective capacity.
pub fn ergodic_capacity(d: &MeDist) -> Result<MetricResult> {
    let ts = [1e-4, 5e-5, 1e-5];
    let mut vals = [0.0; 3];
    let mut worst: Option<crate::matfun::QuadResult> = None;
    for (v, &t) in vals.iter_mut().zip(&ts) {
        let (m1, q) = shannon_moment_m1_quad(d, t)?;
        *v = -m1.ln_1p() / t;
        if worst.map_or(true, |w| q.error > w.error) {
            worst = Some(q);
        }
    }
    // quadratic extrapolation to θ = 0
    let mut lim = 0.0;
    for i in 0..3 {
        let mut w = 1.0;
        for j in 0..3 {
            if i != j {
                w *= ts[j] / (ts[j] - ts[i]);
            }
        }
        lim += w * vals[i];
    }
    let r = MetricResult::real(lim, PathTag::Quadrature);
    Ok(match worst {
        Some(q) => r.with_quad(&q),
        None => r,
    })
}

/// Bit error rate of DBPSK (`a = 1`) and noncoherent FSK (`a = 1/2`).
pub fn ber_noncoherent(d: &MeDist, a: f64) -> Result<MetricResult> {
    if !(a > 0.0) {
        return Err(Error::Domain(format!("modulation constant {a}")));
    }
    let v = d.lt(c(a))? * 0.5;
    MetricResult::from_complex(v, PathTag::ClosedForm, v.re.abs())
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum BerPath {
    #[default]
    ClosedForm,
    Quadrature,
}

/// Bit error rate `E[Q(sqrt(2aZ))]` of coherent BPSK (`a = 1`) and FSK (`a = 1/2`).
pub fn ber_coherent(d: &MeDist, a: f64, path: BerPath) -> Result<MetricResult> {
    if !(a > 0.0) {
        return Err(Error::Domain(format!("modulation constant {a}")));
    }
    if path == BerPath::ClosedForm {
        let n = d.degree();
        let m = identity(n) - d.y().unscale(a);
        match crate::matfun::mat_frac_power(&m, -0.5) {
            Ok(r) => {
                let w = solve_vec(d.y(), &(r * d.z()))?;
                let v = (C64::new(1.0, 0.0) + (d.x() * w)[(0, 0)]) * 0.5;
                return MetricResult::from_complex(v, PathTag::ClosedForm, 1.0);
            }
            Err(Error::Domain(msg)) => {
                let r = pep(&[(d.clone(), a)])?;
                return Ok(r.warn(format!("principal root unavailable ({msg}); used quadrature")));
            }
            Err(e) => return Err(e),
        }
    }
    pep(&[(d.clone(), a)])
}

/// Pairwise error probability `E[Q(sqrt(2 Σ a_n Z_n))]` over independent branches.
pub fn pep(branches: &[(MeDist, f64)]) -> Result<MetricResult> {
    if branches.is_empty() {
        return Err(Error::Domain("no branches".into()));
    }
    for (_, a) in branches {
        if !(*a > 0.0) {
            return Err(Error::Domain(format!("modulation constant {a}")));
        }
    }
    let f = |t: f64| -> f64 {
        let s2 = t.sin().powi(2);
        let mut acc = C64::new(1.0, 0.0);
        for (d, a) in branches {
            match d.lt(c(a / s2)) {
                Ok(v) => acc *= v,
                Err(_) => return f64::NAN,
            }
        }
        acc.re / PI
    };
    let q = quad(f, 0.0, PI / 2.0, &QuadOptions::tol(1e-300, 1e-11));
    Ok(MetricResult::real(q.value, PathTag::Quadrature).with_quad(&q))
}

/// High-SNR slope of the error rate: the order of the first nonvanishing
/// Markov parameter `x Y^{k-1} z`.
pub fn diversity_gain(d: &MeDist) -> Result<usize> {
    let scale = crate::matfun::norm1(d.y()).max(1e-300);
    let xn = d.x().iter().map(|v| v.norm()).sum::<f64>();
    let zn = d.z().iter().map(|v| v.norm()).sum::<f64>();
    let mut v: RowVec = d.x().clone();
    for k in 1..=d.degree() {
        let m = (&v * d.z())[(0, 0)].norm();
        if m > 1e-10 * xn * zn * scale.powi(k as i32 - 1) {
            return Ok(k);
        }
        v = &v * d.y();
    }
    Err(Error::Domain("all Markov parameters vanish".into()))
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Detection {
    Coherent,
    Noncoherent,
}

/// Numeric log-log BER slope of a unit-mean law between `S = 1e3` and `S = 1e5`.
pub fn diversity_slope(d_um: &MeDist, detection: Detection, a: f64) -> Result<f64> {
    let ber = |s: f64| -> Result<f64> {
        let d = d_um.scale_mean(s)?;
        Ok(match detection {
            Detection::Noncoherent => ber_noncoherent(&d, a)?.value,
            Detection::Coherent => ber_coherent(&d, a, BerPath::Quadrature)?.value,
        })
    };
    let (s1, s2) = (1e3, 1e5);
    Ok(-(ber(s2)?.ln() - ber(s1)?.ln()) / (s2 / s1).ln())
}

/// Augmented generator for the high-SNR outage of an `n x n` Rayleigh MIMO link.
pub fn mimo_outage_generator(n: usize) -> Result<Matrix> {
    if n < 2 {
        return Err(Error::Domain("antenna count must be at least 2".into()));
    }
    let mut poles = Vec::new();
    for p in 1..=n {
        poles.extend(std::iter::repeat(p as f64).take(p));
    }
    for p in n + 1..2 * n {
        poles.extend(std::iter::repeat(p as f64).take(2 * n - p));
    }
    let d = poles.len() + 1;
    let mut g = Matrix::zeros(d, d);
    g[(0, 1)] = c(1.0);
    for (i, &p) in poles.iter().enumerate() {
        g[(i + 1, i + 1)] = c(p);
        if i + 2 < d {
            g[(i + 1, i + 2)] = c(1.0);
        }
    }
    Ok(g)
}

/// Outage probability of an `n x n` Rayleigh MIMO link at rate `r` and SNR `t`,
/// to leading order in `1/t`.
pub fn mimo_high_snr_outage(n: usize, r: f64, t: f64) -> Result<MetricResult> {
    if !(t > 0.0) || !(r > 0.0) {
        return Err(Error::Domain("rate and SNR must be positive".into()));
    }
    let g = mimo_outage_generator(n)?;
    let d = g.nrows();
    let e = expm(&g.scale(r))?;
    let scale: f64 = (0..n).map(|k| (1..=k).map(|i| i as f64).product::<f64>()).product();
    let v = assert_real(e[(0, d - 1)], 1.0)?;
    Ok(MetricResult::real(scale * v * t.powi(-((n * n) as i32)), PathTag::ClosedForm))
}
