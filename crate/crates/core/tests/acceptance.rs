//! Acceptance gate: one line per criterion, nonzero exit if any fails.

use me_kit::algebra::{convolve, max_dist, min_dist, sdc, standard_channel};
use me_kit::bivariate::{sm_mimo_2x2_outage, sm_mimo_2x2_outage_quadrature, wishart2x2_bivme, BilinearForm};
use me_kit::channel::ChannelSpec;
use me_kit::infoq::{entropy_numeric, lloyd_max, MatrixGaussian, MatrixGaussian2, MatrixRayleigh};
use me_kit::matfun::{c, quad, QuadOptions};
use me_kit::metrics::{self as m, ArqPath, BerPath, Detection, EffCapPath, InterferencePath, Link};
use me_kit::oracle::exec::{par_map, Exec};
use me_kit::oracle::testkit::{hyperexponential, random_medist};
use me_kit::oracle::{mc_metric, McScenario, RngConfig, Sampler};
use me_kit::special::lambert_w0;
use me_kit::{MeDist, Matrix, RationalLt};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use std::f64::consts::{E, LN_2, PI};
use std::time::Instant;

const EULER_GAMMA: f64 = 0.577_215_664_901_532_9;

struct Outcome {
    pass: bool,
    detail: String,
}

fn check(pass: bool, detail: impl Into<String>) -> Outcome {
    Outcome { pass, detail: detail.into() }
}

fn channel(spec: ChannelSpec) -> MeDist {
    standard_channel(&spec).unwrap().dist
}

fn oscillatory() -> MeDist {
    MeDist::from_rational_lt(&RationalLt::new(vec![50.0], vec![50.0, 52.0, 3.0]).unwrap()).unwrap()
}

fn rayleigh(s: f64) -> MeDist {
    MeDist::exponential(s).unwrap()
}

fn nakagami(m: u32, s: f64) -> MeDist {
    channel(ChannelSpec::Nakagami { m, s })
}

fn round_trip() -> Outcome {
    let start = Instant::now();
    let d = oscillatory();
    let mut worst = 0.0f64;
    for i in 1..=200 {
        let t = 15.0 * i as f64 / 200.0;
        let want = (1.0 + 1.0 / 49.0) * (1.0 - (7.0 * t).cos()) * (-t).exp();
        worst = worst.max((d.pdf(t).unwrap() - want).abs());
    }
    let secs = start.elapsed().as_secs_f64();
    check(worst < 1e-10 && secs < 1.0, format!("max abs error {worst:.2e}, {secs:.3} s"))
}

/// Kolmogorov–Smirnov statistic of sorted samples against `cdf`, with the cdf
/// tabulated on a fine grid and interpolated.
fn ks_stat(sorted: &[f64], d: &MeDist) -> f64 {
    let top = sorted[sorted.len() - 1];
    let n_grid = 40_000;
    let h = top / n_grid as f64;
    let table: Vec<f64> = (0..=n_grid).map(|i| d.cdf(i as f64 * h).unwrap()).collect();
    let n = sorted.len() as f64;
    let mut worst = 0.0f64;
    for (i, &s) in sorted.iter().enumerate() {
        let u = (s / h).min(n_grid as f64 - 1e-9);
        let k = u.floor() as usize;
        let f = table[k] + (u - k as f64) * (table[k + 1] - table[k]);
        worst = worst.max((f - i as f64 / n).abs()).max(((i + 1) as f64 / n - f).abs());
    }
    worst
}

fn closure_suite() -> Outcome {
    let start = Instant::now();
    let laws = [rayleigh(1.0), nakagami(2, 1.0), nakagami(3, 1.0), oscillatory(), sdc(3, 1.0).unwrap()];
    let pairs: Vec<(usize, usize)> = (0..laws.len()).map(|i| (i, (i + 1) % laws.len())).collect();
    let n = 1_000_000;
    let ks_limit = 1.63 / (n as f64).sqrt();
    let results = par_map(Exec::default(), &pairs, |&(i, j)| {
        let (a, b) = (&laws[i], &laws[j]);
        let sum = convolve(a, b).unwrap();
        let mx = max_dist(a, b).closure().unwrap();
        let mn = min_dist(a, b).closure().unwrap();
        let mut num_err = 0.0f64;
        for &t in &[0.3, 1.0, 2.5, 5.0] {
            let conv = quad(
                |u| a.pdf(u).unwrap() * b.cdf(t - u).unwrap(),
                0.0,
                t,
                &QuadOptions::tol(1e-14, 1e-13),
            )
            .value;
            let (fa, fb) = (a.cdf(t).unwrap(), b.cdf(t).unwrap());
            num_err = num_err
                .max((sum.cdf(t).unwrap() - conv).abs())
                .max((mx.cdf(t).unwrap() - fa * fb).abs())
                .max((mn.cdf(t).unwrap() - (fa + fb - fa * fb)).abs());
        }
        let (sa, sb) = (Sampler::new(a).unwrap(), Sampler::new(b).unwrap());
        let mut rng = ChaCha8Rng::seed_from_u64(1000 + i as u64);
        let mut xs = Vec::with_capacity(n);
        let mut hi = Vec::with_capacity(n);
        let mut lo = Vec::with_capacity(n);
        for _ in 0..n {
            let (u, v) = (sa.sample(&mut rng), sb.sample(&mut rng));
            xs.push(u + v);
            hi.push(u.max(v));
            lo.push(u.min(v));
        }
        let mut ks = 0.0f64;
        for (v, d) in [(&mut xs, &sum), (&mut hi, &mx), (&mut lo, &mn)] {
            v.sort_by(f64::total_cmp);
            ks = ks.max(ks_stat(v, d));
        }
        (num_err, ks)
    });
    let num = results.iter().map(|r| r.0).fold(0.0, f64::max);
    let ks = results.iter().map(|r| r.1).fold(0.0, f64::max);
    let secs = start.elapsed().as_secs_f64();
    check(
        num < 1e-8 && ks < ks_limit && secs < 120.0,
        format!("numeric {num:.2e}, KS {ks:.2e} (limit {ks_limit:.2e}), {secs:.1} s"),
    )
}

fn goldens() -> Outcome {
    let d = rayleigh(1.0);
    let link = Link::absolute(1.0);
    let th = link.theta;
    let ncbr = m::NcbrLinks { l13: d.clone(), l32: d.clone(), l23: d.clone(), l31: d.clone() };
    let int = m::InterferenceScenario::independent(&d, &[d.clone()]).unwrap();
    let cases: Vec<(&str, f64, f64, f64)> = vec![
        ("outage", m::outage(&d, th).unwrap().value, 1.0 - (1.0 - E).exp(), 1e-9),
        ("arq", m::arq_throughput(&d, link, ArqPath::Augmented).unwrap().value, (1.0 - E).exp(), 1e-9),
        ("harq K=2", m::harq_truncated(&d, link, 2).unwrap().value, 0.267814, 1e-6),
        ("harq persistent", m::harq_persistent(&d, link).unwrap().value, 1.0 / E, 1e-9),
        ("dbpsk", m::ber_noncoherent(&d, 1.0).unwrap().value, 0.25, 1e-9),
        ("bpsk", m::ber_coherent(&d, 1.0, BerPath::ClosedForm).unwrap().value, 0.5 - 0.5 / 2f64.sqrt(), 1e-9),
        ("eff capacity", m::eff_capacity_rate(&d, 1.0).unwrap().value, LN_2, 1e-9),
        ("interference", m::arq_interference(&int, Link::with_theta(1.0, th), InterferencePath::Sylvester).unwrap().value, (-E).exp(), 1e-9),
        ("ncbr", m::ncbr_throughput(&ncbr, 1.0, 1.0).unwrap().value, 0.021450, 1e-6),
    ];
    let bad: Vec<String> = cases
        .iter()
        .filter(|(_, got, want, tol)| !((got - want).abs() < *tol))
        .map(|(name, got, want, _)| format!("{name}: {got} vs {want}"))
        .collect();
    let worst = cases.iter().map(|(_, g, w, _)| (g - w).abs()).fold(0.0, f64::max);
    check(bad.is_empty(), if bad.is_empty() { format!("{} values, worst deviation {worst:.2e}", cases.len()) } else { bad.join("; ") })
}

fn rel(a: f64, b: f64) -> f64 {
    (a - b).abs() / b.abs().max(1.0)
}

fn multi_path() -> Outcome {
    let start = Instant::now();
    let mut rng = ChaCha8Rng::seed_from_u64(2024);
    let mut worst = [0.0f64; 6];
    for _ in 0..20 {
        let d = random_medist(&mut rng, 4).unwrap().unit_mean().unwrap();
        let link = Link::new(rng.random_range(0.2..2.0), rng.random_range(0.5..10.0), m::ThetaConvention::PerUnitMean).unwrap();

        let a = m::arq_throughput(&d, link, ArqPath::Augmented).unwrap().value;
        let b = m::arq_throughput(&d, link, ArqPath::SuccessProbability).unwrap().value;
        worst[0] = worst[0].max(rel(a, b));

        let k1 = m::harq_truncated(&d, link, 1).unwrap().value;
        worst[1] = worst[1].max(rel(k1, a));

        let n = rng.random_range(1..=3);
        let base = random_medist(&mut rng, 2).unwrap();
        let folded = (1..n).fold(base.clone(), |acc, _| convolve(&acc, &base).unwrap());
        let p = m::harq_persistent(&folded, link).unwrap().value;
        let q = m::harq_persistent_diversity(&base, link, n).unwrap().value;
        let erl = (1..n).fold(rayleigh(1.0), |acc, _| convolve(&acc, &rayleigh(1.0)).unwrap());
        let r1 = m::harq_persistent(&erl, link).unwrap().value;
        let r2 = m::harq_persistent_erlang(n, link).unwrap().value;
        worst[2] = worst[2].max(rel(p, q)).max(rel(r1, r2));

        let theta = rng.random_range(0.1..0.95);
        let phases = rng.random_range(1..=3);
        let hyp = hyperexponential(&mut rng, phases).unwrap();
        let e1 = m::eff_capacity_shannon(&hyp, theta, EffCapPath::Quadrature).unwrap().value;
        let e2 = m::eff_capacity_shannon(&hyp, theta, EffCapPath::Eigen).unwrap().value;
        worst[3] = worst[3].max(rel(e1, e2));

        let k = rng.random_range(1..=2);
        let interferers: Vec<MeDist> = (0..k)
            .map(|_| random_medist(&mut rng, 2).unwrap().scaled(rng.random_range(0.1..0.6)).unwrap())
            .collect();
        let sc = m::InterferenceScenario::independent(&d, &interferers).unwrap();
        let vals: Vec<f64> = [InterferencePath::Kron, InterferencePath::Sylvester, InterferencePath::Vectorized, InterferencePath::VanLoan]
            .iter()
            .map(|&p| m::interference_success(&sc, link.theta, p).unwrap().value)
            .collect();
        for v in &vals[1..] {
            worst[4] = worst[4].max(rel(*v, vals[0]));
        }

        let d2 = random_medist(&mut rng, 3).unwrap();
        let x12 = Matrix::from_fn(d.degree(), d2.degree(), |_, _| c(rng.random_range(-1.0..1.0)));
        let bf = BilinearForm::new(d.x().clone(), d.y().clone(), x12, d2.y().clone(), d2.z().clone()).unwrap();
        let syl = bf.sylvester(0.0, f64::INFINITY).unwrap().0;
        let vecd = bf.vectorized(f64::INFINITY).unwrap();
        let b = rng.random_range(0.5..3.0);
        let syl_b = bf.sylvester(0.0, b).unwrap().0;
        let vec_b = bf.vectorized(b).unwrap();
        let vl_b = bf.van_loan(b).unwrap();
        let vl_inf = bf.van_loan(bf.van_loan_horizon().unwrap()).unwrap();
        worst[5] = worst[5].max(rel(syl, vecd)).max(rel(syl_b, vec_b)).max(rel(syl_b, vl_b)).max(rel(syl, vl_inf));
    }
    let secs = start.elapsed().as_secs_f64();
    let ok = worst.iter().all(|w| *w < 1e-8) && secs < 300.0;
    check(
        ok,
        format!(
            "arq {:.1e}, harq K=1 {:.1e}, persistent {:.1e}, eff cap {:.1e}, interference {:.1e}, bilinear {:.1e}; {secs:.1} s",
            worst[0], worst[1], worst[2], worst[3], worst[4], worst[5]
        ),
    )
}

fn monte_carlo() -> Outcome {
    let start = Instant::now();
    let n = 1_000_000;
    let naka = nakagami(2, 3.0);
    let osc = oscillatory();
    let link = Link::absolute(1.0);
    let int_sig = rayleigh(8.0);
    let ints = vec![rayleigh(1.0), nakagami(2, 0.5)];
    let ncbr = m::NcbrLinks { l13: rayleigh(2.0), l32: naka.clone(), l23: osc.clone(), l31: rayleigh(5.0) };
    let branches = vec![(rayleigh(1.0), 1.0), (naka.clone(), 0.5)];
    let sc = m::InterferenceScenario::independent(&int_sig, &ints).unwrap();
    type Case = (&'static str, McScenario, f64);
    let cases: Vec<Case> = vec![
        ("outage", McScenario::Outage { d: naka.clone(), theta: link.theta }, m::outage(&naka, link.theta).unwrap().value),
        ("cdf", McScenario::Cdf { d: osc.clone(), t: 0.8 }, osc.cdf(0.8).unwrap()),
        ("arq", McScenario::Arq { d: osc.clone(), link }, m::arq_throughput(&osc, link, ArqPath::Augmented).unwrap().value),
        ("harq_truncated", McScenario::HarqTruncated { d: naka.clone(), link, k: 3 }, m::harq_truncated(&naka, link, 3).unwrap().value),
        ("harq_persistent", McScenario::HarqPersistent { d: osc.clone(), link }, m::harq_persistent(&osc, link).unwrap().value),
        ("ncbr", McScenario::Ncbr { links: ncbr.clone(), r12: 0.7, r21: 0.4 }, m::ncbr_throughput(&ncbr, 0.7, 0.4).unwrap().value),
        (
            "arq_interference",
            McScenario::ArqInterference { signal: int_sig.clone(), interferers: ints.clone(), link },
            m::arq_interference(&sc, link, InterferencePath::Sylvester).unwrap().value,
        ),
        ("ber_noncoherent", McScenario::BerNoncoherent { d: naka.clone(), a: 0.5 }, m::ber_noncoherent(&naka, 0.5).unwrap().value),
        ("ber_coherent", McScenario::BerCoherent { d: osc.clone(), a: 1.0 }, m::ber_coherent(&osc, 1.0, BerPath::ClosedForm).unwrap().value),
        ("pep", McScenario::Pep { branches: branches.clone() }, m::pep(&branches).unwrap().value),
        ("eff_capacity_rate", McScenario::EffCapacityRate { d: naka.clone(), theta: 0.5 }, m::eff_capacity_rate(&naka, 0.5).unwrap().value),
        (
            "eff_capacity_shannon",
            McScenario::EffCapacityShannon { d: osc.clone(), theta: 2.0 },
            m::eff_capacity_shannon(&osc, 2.0, EffCapPath::Quadrature).unwrap().value,
        ),
        ("ergodic", McScenario::Ergodic { d: naka.clone() }, m::ergodic_capacity(&naka).unwrap().value),
        ("sm_mimo_outage", McScenario::SmMimoOutage { rate: 1.0 }, sm_mimo_2x2_outage(1.0).unwrap().value),
    ];
    let mut bad = Vec::new();
    let mut worst = 0.0f64;
    for (i, (name, sc, closed)) in cases.iter().enumerate() {
        let est = mc_metric(sc, &RngConfig::new(42 + i as u64, n)).unwrap();
        let z = est.z_score(*closed);
        worst = worst.max(z.abs());
        if !(z.abs() < 4.0) {
            bad.push(format!("{name} z={z:.2}"));
        }
    }
    let secs = start.elapsed().as_secs_f64();
    check(
        bad.is_empty() && secs < 600.0,
        format!("{} modes, max |z| {worst:.2}, {secs:.1} s {}", cases.len(), bad.join(" ")),
    )
}

fn diversity() -> Outcome {
    let laws = [
        ("rayleigh", rayleigh(1.0), 1usize),
        ("nakagami-2", nakagami(2, 1.0), 2),
        ("ostbc 2x2", channel(ChannelSpec::OstbcMrc { n_tx: 2, n_rx: 2, r_stc: 1.0, s: 1.0 }), 4),
    ];
    let mut ok = true;
    let mut parts = Vec::new();
    for (name, d, want) in laws {
        let gain = m::diversity_gain(&d).unwrap();
        let d_um = d.unit_mean().unwrap();
        let s_nc = m::diversity_slope(&d_um, Detection::Noncoherent, 1.0).unwrap();
        let s_c = m::diversity_slope(&d_um, Detection::Coherent, 1.0).unwrap();
        ok &= gain == want && (s_nc - want as f64).abs() < 0.05 && (s_c - want as f64).abs() < 0.05;
        parts.push(format!("{name} {gain} ({s_nc:.3}, {s_c:.3})"));
    }
    check(ok, parts.join(", "))
}

fn optimization() -> Outcome {
    let thetas: Vec<f64> = (0..24).map(|i| 0.02 + 0.03 * i as f64).collect();
    let mut worst = 0.0f64;
    let mut interior = 0;
    for d in [rayleigh(1.0), nakagami(2, 1.0), oscillatory().unit_mean().unwrap()] {
        for metric in [m::OptimizeMetric::Arq, m::OptimizeMetric::HarqPersistent] {
            for p in m::optimize_rate(&d, &metric, &thetas, Exec::default()).unwrap() {
                if p.interior {
                    interior += 1;
                    worst = worst.max(p.stationarity);
                }
            }
        }
    }
    let mut lw = 0.0f64;
    for i in 0..2000 {
        let x = -1.0 / E + (i as f64 / 1999.0).powi(3) * 50.0;
        let w = lambert_w0(x).unwrap();
        lw = lw.max((w * w.exp() - x).abs() / x.abs().max(1.0));
    }
    check(
        worst < 1e-4 && lw < 1e-12 && interior > 0,
        format!("{interior} interior rows, max |dT/dR|/T {worst:.1e}, Lambert residual {lw:.1e}"),
    )
}

fn bivariate() -> Outcome {
    let w = wishart2x2_bivme();
    let mut worst = 0.0f64;
    for i in 0..40 {
        for j in 0..40 {
            let (z1, z2) = (0.25 * i as f64, 0.25 * j as f64);
            let want = (-z1 - z2).exp() * (z1 - z2).powi(2);
            let got = w.pdf(z1, z2).unwrap();
            let want = if z1 <= z2 { want } else { 0.0 };
            worst = worst.max((got - want).abs());
        }
    }
    let closed = sm_mimo_2x2_outage(1.0).unwrap().value;
    let oracle = sm_mimo_2x2_outage_quadrature(1.0).unwrap();
    let diff = (closed - oracle).abs();
    check(worst < 1e-10 && diff < 1e-6, format!("Wishart grid {worst:.1e}, SM-MIMO outage {closed:.8} vs {oracle:.8}"))
}

fn exp_two_level_mse(b: f64) -> f64 {
    let p1 = -(-b).exp_m1();
    let m1 = (1.0 - (-b).exp() * (1.0 + b)) / p1;
    let p2 = (-b).exp();
    let m2 = b + 1.0;
    2.0 - p1 * m1 * m1 - p2 * m2 * m2
}

fn information() -> Outcome {
    let mut parts = Vec::new();
    let h = entropy_numeric(&nakagami(2, 2.0), false).unwrap().nats;
    let h_ok = (h - (1.0 + EULER_GAMMA)).abs() < 1e-6;
    parts.push(format!("gamma entropy {:.1e}", (h - 1.0 - EULER_GAMMA).abs()));

    let q = lloyd_max(&rayleigh(1.0), 2, 1000).unwrap();
    let (mut best_b, mut best) = (0.0, f64::INFINITY);
    for i in 0..=1_500_000 {
        let b = 0.5 + i as f64 * 1e-6;
        let v = exp_two_level_mse(b);
        if v < best {
            best = v;
            best_b = b;
        }
    }
    let lm_ok = (q.thresholds[0] - best_b).abs() < 1e-4 && (q.mse - best).abs() < 1e-4;
    parts.push(format!("Lloyd-Max threshold {:.6} vs {best_b:.6}", q.thresholds[0]));

    let opts = QuadOptions::tol(1e-13, 1e-12);
    let mut worst = 0.0f64;
    for d in [rayleigh(1.0), nakagami(2, 1.5), oscillatory()] {
        let t1 = MatrixGaussian::from_dist(&d).unwrap();
        let norm = quad(|t| t1.pdf(t).unwrap(), f64::NEG_INFINITY, f64::INFINITY, &opts).value;
        let m2 = quad(|t| t * t * t1.pdf(t).unwrap(), f64::NEG_INFINITY, f64::INFINITY, &opts).value;
        worst = worst.max((norm - 1.0).abs()).max((m2 - t1.moment(2).unwrap()).abs());

        let t2 = MatrixGaussian2::from_dist(&d).unwrap();
        // polar coordinates: ∫∫ f = ∫ 2π r f(r, 0) dr
        let norm2 = quad(|r| 2.0 * PI * r * t2.pdf(r, 0.0).unwrap(), 0.0, f64::INFINITY, &opts).value;
        let marg = quad(|u| u * u * t2.marginal(u).unwrap(), f64::NEG_INFINITY, f64::INFINITY, &opts).value;
        let m22 = quad(|r| PI * r.powi(5) * t2.pdf(r, 0.0).unwrap() / 4.0, 0.0, f64::INFINITY, &opts).value;
        worst = worst
            .max((norm2 - 1.0).abs())
            .max((marg - t2.moment(2, 0).unwrap()).abs())
            .max((m22 - t2.moment(2, 2).unwrap()).abs());

        let t3 = MatrixRayleigh::from_dist(&d).unwrap();
        let norm3 = quad(|t| t3.pdf(t).unwrap(), 0.0, f64::INFINITY, &opts).value;
        let m3 = quad(|t| t.powi(3) * t3.pdf(t).unwrap(), 0.0, f64::INFINITY, &opts).value;
        worst = worst.max((norm3 - 1.0).abs()).max((m3 - t3.moment(3).unwrap()).abs());
    }
    parts.push(format!("Types I/II/III {worst:.1e}"));
    check(h_ok && lm_ok && worst < 1e-7, parts.join(", "))
}

fn main() {
    let criteria: [(&str, fn() -> Outcome); 9] = [
        ("oscillatory round trip", round_trip),
        ("closure suite", closure_suite),
        ("metric goldens", goldens),
        ("multi-path agreement", multi_path),
        ("Monte Carlo cross-validation", monte_carlo),
        ("diversity gain", diversity),
        ("rate optimization", optimization),
        ("bivariate laws", bivariate),
        ("information and quantization", information),
    ];
    let mut failed = 0;
    for (i, (name, f)) in criteria.iter().enumerate() {
        let o = f();
        if !o.pass {
            failed += 1;
        }
        println!("[{}] {} {name}: {}", if o.pass { "PASS" } else { "FAIL" }, i + 1, o.detail);
    }
    if failed > 0 {
        println!("{failed} of {} criteria failed", criteria.len());
        std::process::exit(1);
    }
}
