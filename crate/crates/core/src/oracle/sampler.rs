use crate::error::{Error, Result};
use crate::matfun::{expm, norm1, Matrix};
use crate::medist::MeDist;
use rand::Rng;

/// Draws from an ME law: direct sampling for sums of exponentials, inverse cdf
/// otherwise.
#[derive(Debug, Clone)]
pub enum Sampler {
    /// Sum of independent exponentials with these rates.
    Hypoexponential(Vec<f64>),
    Grid(GridSampler),
}

impl Sampler {
    pub fn new(d: &MeDist) -> Result<Self> {
        if let Some(rates) = hypoexponential_rates(d) {
            return Ok(Sampler::Hypoexponential(rates));
        }
        Ok(Sampler::Grid(GridSampler::new(d)?))
    }

    /// Forces the inverse-cdf sampler.
    pub fn inverse_cdf(d: &MeDist) -> Result<Self> {
        Ok(Sampler::Grid(GridSampler::new(d)?))
    }

    pub fn sample<R: Rng + ?Sized>(&self, rng: &mut R) -> f64 {
        match self {
            Sampler::Hypoexponential(rates) => rates
                .iter()
                .map(|r| -(1.0 - rng.random::<f64>()).ln() / r)
                .sum(),
            Sampler::Grid(g) => g.quantile(rng.random::<f64>()),
        }
    }

    pub fn quantile(&self, u: f64) -> Option<f64> {
        match self {
            Sampler::Grid(g) => Some(g.quantile(u)),
            Sampler::Hypoexponential(r) if r.len() == 1 => Some(-(1.0 - u).ln() / r[0]),
            _ => None,
        }
    }
}

fn hypoexponential_rates(d: &MeDist) -> Option<Vec<f64>> {
    if !d.is_real() {
        return None;
    }
    let n = d.degree();
    let y = d.y();
    let mut rates = Vec::with_capacity(n);
    let mut sup = 1.0;
    for i in 0..n {
        for j in 0..n {
            let v = y[(i, j)].re;
            if j == i {
                if !(v < 0.0) {
                    return None;
                }
            } else if j == i + 1 {
                sup *= v;
            } else if v != 0.0 {
                return None;
            }
        }
        rates.push(-y[(i, i)].re);
    }
    let x = d.x();
    let z = d.z();
    if (1..n).any(|j| x[j].re != 0.0) || (0..n - 1).any(|j| z[j].re != 0.0) {
        return None;
    }
    let gain = x[0].re * sup * z[n - 1].re;
    let norm: f64 = rates.iter().product();
    ((gain - norm).abs() <= 1e-12 * norm).then_some(rates)
}

const TAYLOR: usize = 20;

/// Inverse-cdf sampler on a uniform grid; inside a cell the cdf is a Taylor
/// polynomial of the augmented exponential, solved by safeguarded secant.
#[derive(Debug, Clone)]
pub struct GridSampler {
    h: f64,
    /// `coef[i][k] = e_1 e^{t_i G} G^k w`.
    coef: Vec<[f64; TAYLOR + 2]>,
    t_max: f64,
}

impl GridSampler {
    pub fn new(d: &MeDist) -> Result<Self> {
        let g = d.augmented();
        let w = d.augmented_z();
        if crate::matfun::max_imag(&g) > 1e-12 * crate::matfun::max_abs(&g) {
            return Err(Error::Domain("sampling needs a real triple".into()));
        }
        let mut t_max = d.mean().unwrap_or(1.0).abs().max(1e-6);
        let mut tries = 0;
        while 1.0 - d.cdf(t_max)? > 1e-14 {
            t_max *= 2.0;
            tries += 1;
            if tries > 200 {
                return Err(Error::Domain("tail does not decay".into()));
            }
        }
        let n_min = 256.0;
        let mut h = (t_max / n_min).min(0.5 / norm1(&g).max(1e-300));
        let mut n = (t_max / h).ceil() as usize;
        if n > 2_000_000 {
            n = 2_000_000;
            h = t_max / n as f64;
        }
        let gr: Vec<Vec<f64>> = crate::matfun::to_real(&g);
        let dim = gr.len();
        let mut cols = vec![w.iter().map(|v| v.re).collect::<Vec<f64>>()];
        for _ in 0..=TAYLOR {
            let prev = cols.last().unwrap();
            let next: Vec<f64> = (0..dim).map(|i| (0..dim).map(|j| gr[i][j] * prev[j]).sum()).collect();
            cols.push(next);
        }
        let step: Matrix = expm(&g.scale(h))?;
        let step = crate::matfun::to_real(&step);
        let mut v = vec![0.0; dim];
        v[0] = 1.0;
        let mut coef = Vec::with_capacity(n + 1);
        for _ in 0..=n {
            let mut row = [0.0; TAYLOR + 2];
            for (k, c) in cols.iter().enumerate() {
                row[k] = v.iter().zip(c).map(|(a, b)| a * b).sum();
            }
            coef.push(row);
            v = (0..dim).map(|j| (0..dim).map(|i| v[i] * step[i][j]).sum()).collect();
        }
        for w in coef.windows(2) {
            if w[1][0] < w[0][0] - 1e-10 {
                return Err(Error::Domain("cdf decreases: not a valid distribution".into()));
            }
        }
        Ok(GridSampler { h, coef, t_max: n as f64 * h })
    }

    fn cell_cdf(&self, i: usize, dt: f64) -> f64 {
        let c = &self.coef[i];
        let mut acc = 0.0;
        for k in (0..=TAYLOR).rev() {
            acc = acc * dt / (k as f64 + 1.0) + c[k];
        }
        acc
    }

    pub fn cdf(&self, t: f64) -> f64 {
        if t <= 0.0 {
            return 0.0;
        }
        if t >= self.t_max {
            return self.coef.last().unwrap()[0];
        }
        let i = ((t / self.h) as usize).min(self.coef.len() - 1);
        self.cell_cdf(i, t - i as f64 * self.h)
    }

    pub fn quantile(&self, u: f64) -> f64 {
        let last = self.coef.last().unwrap()[0];
        if u >= last {
            return self.t_max;
        }
        if u <= 0.0 {
            return 0.0;
        }
        let (mut lo, mut hi) = (0usize, self.coef.len() - 1);
        while hi - lo > 1 {
            let mid = (lo + hi) / 2;
            if self.coef[mid][0] <= u {
                lo = mid;
            } else {
                hi = mid;
            }
        }
        let i = lo;
        let (mut a, mut b) = (0.0, self.h);
        let (mut fa, mut fb) = (self.cell_cdf(i, a) - u, self.cell_cdf(i, b) - u);
        if fa >= 0.0 {
            return i as f64 * self.h;
        }
        if fb <= 0.0 {
            return i as f64 * self.h + b;
        }
        let mut side = 0i8;
        for _ in 0..100 {
            let mut x = (a * fb - b * fa) / (fb - fa);
            if !(x > a && x < b) {
                x = 0.5 * (a + b);
            }
            let fx = self.cell_cdf(i, x) - u;
            if fx.abs() < 1e-13 || b - a < 1e-15 * self.h {
                a = x;
                b = x;
                break;
            }
            if fx < 0.0 {
                a = x;
                fa = fx;
                if side == -1 {
                    fb *= 0.5;
                }
                side = -1;
            } else {
                b = x;
                fb = fx;
                if side == 1 {
                    fa *= 0.5;
                }
                side = 1;
            }
        }
        i as f64 * self.h + 0.5 * (a + b)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::medist::oscillatory_example;

    #[test]
    fn exponential_detected() {
        let d = MeDist::exponential(2.0).unwrap();
        assert!(matches!(Sampler::new(&d).unwrap(), Sampler::Hypoexponential(ref r) if (r[0] - 0.5).abs() < 1e-15));
        assert!(matches!(Sampler::new(&oscillatory_example()).unwrap(), Sampler::Grid(_)));
    }

    #[test]
    fn grid_quantile_inverts_cdf() {
        let d = oscillatory_example();
        let g = GridSampler::new(&d).unwrap();
        for u in [1e-6, 0.01, 0.3, 0.5, 0.9, 0.999999] {
            let t = g.quantile(u);
            let back = d.cdf(t).unwrap();
            assert!((back - u).abs() < 1e-10, "u = {u}: {back}");
        }
        for t in [0.1, 0.9, 3.0] {
            assert!((g.cdf(t) - d.cdf(t).unwrap()).abs() < 1e-12);
        }
    }
}
