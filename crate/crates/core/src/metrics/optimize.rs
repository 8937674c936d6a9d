use super::interference::{interference_success_derivative, InterferenceScenario};
use super::{renewal_density, renewal_mean};
use crate::error::{Error, Result};
use crate::medist::MeDist;
use crate::oracle::exec::{par_map, Exec};
use crate::special::lambert_w0;
use serde::Serialize;

#[derive(Debug, Clone)]
pub enum OptimizeMetric {
    Arq,
    HarqPersistent,
    /// The scenario's signal must be unit mean.
    ArqInterference(InterferenceScenario),
}

/// Throughput-optimal rate at a fixed normalized threshold `Θ`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct RatePoint {
    pub theta: f64,
    pub g: f64,
    pub interior: bool,
    pub rate: f64,
    pub throughput: f64,
    pub snr: f64,
    /// `|dT/dR| / T` at the returned rate, with the SNR held fixed.
    pub stationarity: f64,
}

/// `f(Θ)` with `T = R / f(Θ)`, and `f'(Θ)`.
fn f_and_deriv(d: &MeDist, metric: &OptimizeMetric, theta: f64) -> Result<(f64, f64)> {
    match metric {
        OptimizeMetric::Arq => {
            let surv = d.ccdf(theta)?;
            let dens = d.pdf(theta)?;
            Ok((1.0 / surv, dens / (surv * surv)))
        }
        OptimizeMetric::HarqPersistent => Ok((1.0 + renewal_mean(d, theta)?, renewal_density(d, theta)?)),
        OptimizeMetric::ArqInterference(sc) => {
            let (p, dp) = interference_success_derivative(sc, theta)?;
            Ok((1.0 / p, -dp / (p * p)))
        }
    }
}

fn f_only(d: &MeDist, metric: &OptimizeMetric, theta: f64) -> Result<f64> {
    match metric {
        OptimizeMetric::Arq => Ok(1.0 / d.ccdf(theta)?),
        OptimizeMetric::HarqPersistent => Ok(1.0 + renewal_mean(d, theta)?),
        OptimizeMetric::ArqInterference(sc) => {
            let p = super::interference_success(sc, theta, super::InterferencePath::Sylvester)?;
            Ok(1.0 / p.value)
        }
    }
}

fn point(d: &MeDist, metric: &OptimizeMetric, theta: f64) -> Result<RatePoint> {
    if !(theta > 0.0) {
        return Err(Error::Domain(format!("normalized threshold {theta}")));
    }
    let (f, df) = f_and_deriv(d, metric, theta)?;
    let g = f / (theta * df);
    let arg = -g * (-g).exp();
    // past g ≈ 700 the operating SNR e^R / Θ overflows
    if !(g > 1.0) || !(arg >= -1.0 / std::f64::consts::E) || !(g < 700.0) {
        return Ok(RatePoint {
            theta,
            g,
            interior: false,
            rate: 0.0,
            throughput: 0.0,
            snr: f64::NAN,
            stationarity: f64::NAN,
        });
    }
    let rate = g + lambert_w0(arg)?;
    let snr = rate.exp_m1() / theta;
    let throughput = rate / f;
    let t_of = |r: f64| -> Result<f64> { Ok(r / f_only(d, metric, r.exp_m1() / snr)?) };
    let h = 1e-4 * rate.max(1e-3);
    let slope = (t_of(rate + h)? - t_of(rate - h)?) / (2.0 * h);
    Ok(RatePoint {
        theta,
        g,
        interior: rate > 0.0,
        rate,
        throughput,
        snr,
        stationarity: slope.abs() / throughput,
    })
}

/// Sweeps `Θ` and returns the throughput-optimal operating point at each.
pub fn optimize_rate(d_um: &MeDist, metric: &OptimizeMetric, thetas: &[f64], exec: Exec) -> Result<Vec<RatePoint>> {
    if let OptimizeMetric::ArqInterference(sc) = metric {
        let m = sc.signal.mean()?;
        if (m - 1.0).abs() > 1e-8 {
            return Err(Error::Precondition(format!("signal mean is {m}, expected 1")));
        }
    } else {
        let m = d_um.mean()?;
        if (m - 1.0).abs() > 1e-8 {
            return Err(Error::Precondition(format!("channel mean is {m}, expected 1")));
        }
    }
    par_map(exec, thetas, |&t| point(d_um, metric, t)).into_iter().collect()
}
