//! Scalar special functions.

use crate::error::{Error, Result};
pub use statrs::function::gamma::{digamma, gamma, ln_gamma};

pub const EULER_GAMMA: f64 = 0.577_215_664_901_532_9;

/// Gaussian tail `Q(x) = P(N(0,1) > x)`.
pub fn q_func(x: f64) -> f64 {
    0.5 * libm::erfc(x / std::f64::consts::SQRT_2)
}

/// Exponential integral `E1(x)` for `x > 0`.
pub fn e1(x: f64) -> Result<f64> {
    upper_gamma(0.0, x)
}

/// Upper incomplete gamma `Γ(a, x)` for real `a` (any sign) and `x > 0`.
pub fn upper_gamma(a: f64, x: f64) -> Result<f64> {
    if !(x > 0.0) || !x.is_finite() || !a.is_finite() {
        return Err(Error::Domain(format!("upper_gamma({a}, {x})")));
    }
    if a > 1.5 {
        return Ok(if x < a + 1.0 {
            gamma(a) - lower_series(a, x)
        } else {
            continued_fraction(a, x)?
        });
    }
    if x > 1.5 {
        return continued_fraction(a, x);
    }
    if a > -1.0 {
        return Ok(small_a(a, x));
    }
    // recur downwards from a0 in (-1, 0]
    let n = (-a).floor() as i64;
    let mut a0 = a + n as f64;
    if a0 <= -1.0 {
        a0 += 1.0;
    }
    let steps = (a0 - a).round() as i64;
    let mut g = small_a(a0, x);
    let mut cur = a0;
    for _ in 0..steps {
        cur -= 1.0;
        g = (g - x.powf(cur) * (-x).exp()) / cur;
    }
    Ok(g)
}

fn lower_series(a: f64, x: f64) -> f64 {
    let mut term = 1.0 / a;
    let mut sum = term;
    let mut ap = a;
    for _ in 0..10_000 {
        ap += 1.0;
        term *= x / ap;
        sum += term;
        if term.abs() < sum.abs() * 1e-17 {
            break;
        }
    }
    sum * (a * x.ln() - x).exp()
}

fn continued_fraction(a: f64, x: f64) -> Result<f64> {
    const TINY: f64 = 1e-300;
    let mut b = x + 1.0 - a;
    let mut cc = 1.0 / TINY;
    let mut d = 1.0 / b;
    let mut h = d;
    for i in 1..100_000 {
        let an = -(i as f64) * (i as f64 - a);
        b += 2.0;
        d = an * d + b;
        if d.abs() < TINY {
            d = TINY;
        }
        cc = b + an / cc;
        if cc.abs() < TINY {
            cc = TINY;
        }
        d = 1.0 / d;
        let del = d * cc;
        h *= del;
        if (del - 1.0).abs() < 1e-16 {
            return Ok((a * x.ln() - x).exp() * h);
        }
    }
    Err(Error::NoConvergence(format!("continued fraction for Γ({a}, {x})")))
}

/// `(Γ(1 + a) - 1) / a`, accurate near `a = 0`.
fn gamma1pm1_over_a(a: f64) -> f64 {
    if a.abs() < 1e-3 {
        // ln Γ(1+a) = -γ a + Σ_{k≥2} (-1)^k ζ(k) a^k / k
        const ZETA: [f64; 6] = [
            1.644_934_066_848_226_4,
            1.202_056_903_159_594_3,
            1.082_323_233_711_138_2,
            1.036_927_755_143_37,
            1.017_343_061_984_449,
            1.008_349_277_381_922_8,
        ];
        let mut lg = -EULER_GAMMA * a;
        let mut p = a;
        for (k, z) in ZETA.iter().enumerate() {
            p *= -a;
            lg += z * p / (k + 2) as f64;
        }
        lg.exp_m1() / a
    } else {
        (gamma(1.0 + a) - 1.0) / a
    }
}

/// `Γ(a, x)` for `a ∈ (-1, 1.5]` and small `x`, without cancellation near `a = 0`.
fn small_a(a: f64, x: f64) -> f64 {
    let lx = x.ln();
    // x^a Σ_{n≥1} (-x)^n / (n! (a + n))
    let mut sum = 0.0;
    let mut t = 1.0;
    for n in 1..200 {
        t *= -x / n as f64;
        let add = t / (a + n as f64);
        sum += add;
        if add.abs() < 1e-18 * sum.abs().max(1e-300) {
            break;
        }
    }
    if a == 0.0 {
        return -EULER_GAMMA - lx - sum;
    }
    let xa = (a * lx).exp();
    gamma1pm1_over_a(a) - (a * lx).exp_m1() / a - xa * sum
}

/// Principal branch of the Lambert W function on `[-1/e, ∞)`.
pub fn lambert_w0(x: f64) -> Result<f64> {
    let branch = -1.0 / std::f64::consts::E;
    if !(x >= branch - 1e-16) || !x.is_finite() {
        return Err(Error::Domain(format!("lambert_w0({x})")));
    }
    let eps = x - branch;
    if eps.abs() < 1e-15 {
        return Ok(-1.0);
    }
    let mut w = if x < -0.25 {
        let p = (2.0 * std::f64::consts::E * eps).sqrt();
        -1.0 + p - p * p / 3.0 + 11.0 / 72.0 * p * p * p
    } else if x < 3.0 {
        0.567 * x / (1.0 + 0.567 * x).max(1e-3).powf(0.7).max(1e-300)
    } else {
        let l = x.ln();
        l - l.ln()
    };
    if x.abs() < 1e-3 {
        w = x * (1.0 - x + 1.5 * x * x);
    }
    for _ in 0..100 {
        let ew = w.exp();
        let f = w * ew - x;
        if f.abs() <= 1e-15 * x.abs().max(1e-300) {
            break;
        }
        let wp1 = w + 1.0;
        let dw = f / (ew * wp1 - (w + 2.0) * f / (2.0 * wp1));
        w -= dw;
        if dw.abs() <= 1e-16 * w.abs().max(1e-300) {
            break;
        }
    }
    let res = (w * w.exp() - x).abs();
    if !(res < 1e-12 * x.abs().max(1.0)) {
        return Err(Error::NoConvergence(format!("lambert_w0({x}) residual {res:e}")));
    }
    Ok(w)
}
