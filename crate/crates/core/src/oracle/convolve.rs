use super::exec::{par_range, Exec};
use crate::error::{Error, Result};
use crate::medist::MeDist;

/// Density of `Z1 + Z2` on the grid `t_k = k h`, `k = 0..=n`, by the
/// trapezoidal rule applied to the convolution integral.
pub fn numeric_convolve(a: &MeDist, b: &MeDist, h: f64, n: usize, exec: Exec) -> Result<Vec<f64>> {
    if !(h > 0.0) || n == 0 {
        return Err(Error::Domain("grid step and size must be positive".into()));
    }
    let fa: Vec<f64> = a.propagate(h, n)?.iter().map(|r| (r * a.z())[(0, 0)].re).collect();
    let fb: Vec<f64> = b.propagate(h, n)?.iter().map(|r| (r * b.z())[(0, 0)].re).collect();
    Ok(par_range(exec, n + 1, |k| {
        if k == 0 {
            return 0.0;
        }
        let mut s = 0.5 * (fa[0] * fb[k] + fa[k] * fb[0]);
        for j in 1..k {
            s += fa[j] * fb[k - j];
        }
        s * h
    }))
}
