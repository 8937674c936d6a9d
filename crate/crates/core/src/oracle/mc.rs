use super::exec::{par_range, Exec};
use super::sampler::Sampler;
use crate::algebra::convolve_all;
use crate::error::{Error, Result};
use crate::medist::MeDist;
use crate::metrics::{Link, NcbrLinks};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;

const CHUNK: usize = 16_384;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct RngConfig {
    pub seed: u64,
    pub n: usize,
    pub exec: Exec,
}

impl RngConfig {
    pub fn new(seed: u64, n: usize) -> Self {
        RngConfig { seed, n, exec: Exec::default() }
    }

    /// Generator for one chunk; streams are fixed by chunk index, so results do
    /// not depend on the thread count.
    pub fn stream(&self, chunk: usize) -> ChaCha8Rng {
        let mut r = ChaCha8Rng::seed_from_u64(self.seed);
        r.set_stream(chunk as u64);
        r
    }
}

/// A link model to simulate.
#[derive(Debug, Clone)]
pub enum McScenario {
    Outage { d: MeDist, theta: f64 },
    Arq { d: MeDist, link: Link },
    HarqTruncated { d: MeDist, link: Link, k: usize },
    HarqPersistent { d: MeDist, link: Link },
    Ncbr { links: NcbrLinks, r12: f64, r21: f64 },
    ArqInterference { signal: MeDist, interferers: Vec<MeDist>, link: Link },
    BerNoncoherent { d: MeDist, a: f64 },
    BerCoherent { d: MeDist, a: f64 },
    Pep { branches: Vec<(MeDist, f64)> },
    EffCapacityRate { d: MeDist, theta: f64 },
    EffCapacityShannon { d: MeDist, theta: f64 },
    Ergodic { d: MeDist },
    /// Outage of a 2x2 Rayleigh MIMO link, `ln det(I + H^H H) <= rate`.
    SmMimoOutage { rate: f64 },
    Cdf { d: MeDist, t: f64 },
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct McEstimate {
    pub value: f64,
    pub std_err: f64,
    pub n: usize,
}

impl McEstimate {
    /// `(closed - value) / std_err`.
    pub fn z_score(&self, closed: f64) -> f64 {
        if self.std_err == 0.0 {
            if closed == self.value { 0.0 } else { f64::INFINITY }
        } else {
            (closed - self.value) / self.std_err
        }
    }
}

#[derive(Debug, Clone, Copy, Default)]
struct Moments {
    n: f64,
    a: f64,
    b: f64,
    aa: f64,
    bb: f64,
    ab: f64,
}

impl Moments {
    fn push(&mut self, a: f64, b: f64) {
        self.n += 1.0;
        self.a += a;
        self.b += b;
        self.aa += a * a;
        self.bb += b * b;
        self.ab += a * b;
    }

    fn merge(mut self, o: &Moments) -> Self {
        self.n += o.n;
        self.a += o.a;
        self.b += o.b;
        self.aa += o.aa;
        self.bb += o.bb;
        self.ab += o.ab;
        self
    }

    /// Ratio `Σa / Σb` and its delta-method standard error.
    fn ratio(&self) -> (f64, f64) {
        let n = self.n;
        let (ma, mb) = (self.a / n, self.b / n);
        let r = ma / mb;
        let va = self.aa / n - ma * ma;
        let vb = self.bb / n - mb * mb;
        let cab = self.ab / n - ma * mb;
        let var = (va - 2.0 * r * cab + r * r * vb).max(0.0) / (mb * mb) / (n - 1.0).max(1.0);
        (r, var.sqrt())
    }
}

enum Prepared {
    One(Sampler),
    Many(Vec<Sampler>),
    None,
}

fn samplers(list: &[&MeDist]) -> Result<Vec<Sampler>> {
    list.iter().map(|d| Sampler::new(d)).collect()
}

/// Simulates the scenario and returns the metric estimate with its standard error.
pub fn mc_metric(sc: &McScenario, cfg: &RngConfig) -> Result<McEstimate> {
    if cfg.n < 2 {
        return Err(Error::Domain("need at least two trials".into()));
    }
    use McScenario as S;
    let prep = match sc {
        S::Outage { d, .. }
        | S::Arq { d, .. }
        | S::HarqTruncated { d, .. }
        | S::HarqPersistent { d, .. }
        | S::BerNoncoherent { d, .. }
        | S::BerCoherent { d, .. }
        | S::EffCapacityRate { d, .. }
        | S::EffCapacityShannon { d, .. }
        | S::Ergodic { d }
        | S::Cdf { d, .. } => Prepared::One(Sampler::new(d)?),
        S::Ncbr { links, .. } => Prepared::Many(samplers(&[&links.l13, &links.l32, &links.l23, &links.l31])?),
        S::ArqInterference { signal, interferers, .. } => {
            let zi = convolve_all(interferers)?;
            Prepared::Many(samplers(&[signal, &zi])?)
        }
        S::Pep { branches } => Prepared::Many(samplers(&branches.iter().map(|b| &b.0).collect::<Vec<_>>())?),
        S::SmMimoOutage { .. } => Prepared::None,
    };
    let chunks = cfg.n.div_ceil(CHUNK);
    let run_chunk = |ci: usize| -> Moments {
        let mut rng = cfg.stream(ci);
        let count = CHUNK.min(cfg.n - ci * CHUNK);
        let mut m = Moments::default();
        let draw1 = |rng: &mut ChaCha8Rng| match &prep {
            Prepared::One(s) => s.sample(rng),
            _ => unreachable!(),
        };
        let many = |k: usize, rng: &mut ChaCha8Rng| match &prep {
            Prepared::Many(v) => v[k].sample(rng),
            _ => unreachable!(),
        };
        for _ in 0..count {
            let (a, b) = match sc {
                S::Outage { theta, .. } => ((draw1(&mut rng) <= *theta) as u8 as f64, 1.0),
                S::Cdf { t, .. } => ((draw1(&mut rng) <= *t) as u8 as f64, 1.0),
                S::Arq { link, .. } => (link.rate * (draw1(&mut rng) > link.theta) as u8 as f64, 1.0),
                S::HarqTruncated { link, k, .. } => {
                    let mut acc = 0.0;
                    let mut tx = 0.0;
                    let mut ok = 0.0;
                    for _ in 0..*k {
                        acc += draw1(&mut rng);
                        tx += 1.0;
                        if acc > link.theta {
                            ok = 1.0;
                            break;
                        }
                    }
                    (link.rate * ok, tx)
                }
                S::HarqPersistent { link, .. } => {
                    let mut acc = 0.0;
                    let mut tx = 0.0;
                    while acc <= link.theta {
                        acc += draw1(&mut rng);
                        tx += 1.0;
                    }
                    (link.rate, tx)
                }
                S::Ncbr { r12, r21, .. } => {
                    let z: Vec<f64> = (0..4).map(|k| many(k, &mut rng)).collect();
                    let (t12, t21) = (r12.exp_m1(), r21.exp_m1());
                    let ok12 = (z[0] > t12 && z[1] > t12) as u8 as f64;
                    let ok21 = (z[2] > t21 && z[3] > t21) as u8 as f64;
                    ((r12 * ok12 + r21 * ok21) / 3.0, 1.0)
                }
                S::ArqInterference { link, .. } => {
                    let s = many(0, &mut rng);
                    let i = many(1, &mut rng);
                    (link.rate * (s > link.theta * (1.0 + i)) as u8 as f64, 1.0)
                }
                S::BerNoncoherent { a, .. } => {
                    let z = draw1(&mut rng);
                    ((rng.random::<f64>() < 0.5 * (-a * z).exp()) as u8 as f64, 1.0)
                }
                S::BerCoherent { a, .. } => {
                    let z = draw1(&mut rng);
                    let n: f64 = rng.sample(StandardNormal);
                    ((n > (2.0 * a * z).sqrt()) as u8 as f64, 1.0)
                }
                S::Pep { branches } => {
                    let snr: f64 = (0..branches.len()).map(|k| branches[k].1 * many(k, &mut rng)).sum();
                    let n: f64 = rng.sample(StandardNormal);
                    ((n > (2.0 * snr).sqrt()) as u8 as f64, 1.0)
                }
                S::EffCapacityRate { theta, .. } => ((-theta * draw1(&mut rng)).exp(), 1.0),
                S::EffCapacityShannon { theta, .. } => ((1.0 + draw1(&mut rng)).powf(-theta), 1.0),
                S::Ergodic { .. } => (draw1(&mut rng).ln_1p(), 1.0),
                S::SmMimoOutage { rate } => {
                    let mut h = [[(0.0f64, 0.0f64); 2]; 2];
                    for row in h.iter_mut() {
                        for e in row.iter_mut() {
                            let re: f64 = rng.sample(StandardNormal);
                            let im: f64 = rng.sample(StandardNormal);
                            *e = (re * std::f64::consts::FRAC_1_SQRT_2, im * std::f64::consts::FRAC_1_SQRT_2);
                        }
                    }
                    // W = H^H H
                    let col = |j: usize| [h[0][j], h[1][j]];
                    let dot = |u: [(f64, f64); 2], v: [(f64, f64); 2]| {
                        u.iter().zip(v.iter()).fold((0.0, 0.0), |acc, (a, b)| {
                            (acc.0 + a.0 * b.0 + a.1 * b.1, acc.1 + a.0 * b.1 - a.1 * b.0)
                        })
                    };
                    let w11 = dot(col(0), col(0)).0;
                    let w22 = dot(col(1), col(1)).0;
                    let w12 = dot(col(0), col(1));
                    let det = (1.0 + w11) * (1.0 + w22) - (w12.0 * w12.0 + w12.1 * w12.1);
                    ((det.ln() <= *rate) as u8 as f64, 1.0)
                }
            };
            m.push(a, b);
        }
        m
    };
    let parts = par_range(cfg.exec, chunks, run_chunk);
    let total = parts.iter().fold(Moments::default(), |acc, m| acc.merge(m));
    let (r, se) = total.ratio();
    let (value, std_err) = match sc {
        S::EffCapacityRate { theta, .. } | S::EffCapacityShannon { theta, .. } => {
            (-r.ln() / theta, se / (theta * r))
        }
        _ => (r, se),
    };
    Ok(McEstimate { value, std_err, n: cfg.n })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn deterministic_across_exec_modes() {
        let d = MeDist::exponential(1.0).unwrap();
        let sc = McScenario::Outage { d, theta: 1.0 };
        let mut cfg = RngConfig::new(7, 50_000);
        cfg.exec = Exec::Sequential;
        let a = mc_metric(&sc, &cfg).unwrap();
        cfg.exec = Exec::Parallel;
        let b = mc_metric(&sc, &cfg).unwrap();
        assert_eq!(a, b);
    }

    #[test]
    fn dbpsk_rayleigh() {
        let d = MeDist::exponential(1.0).unwrap();
        let est = mc_metric(&McScenario::BerNoncoherent { d, a: 1.0 }, &RngConfig::new(11, 1_000_000)).unwrap();
        assert!(est.z_score(0.25).abs() < 4.0, "{est:?}");
    }
}
