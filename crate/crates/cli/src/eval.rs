use crate::input::{self, Scenario};
use crate::{CliError, Convention, OptMetric};
use clap::{Args, ValueEnum};
use me_kit::bivariate::{sm_mimo_2x2_outage, BivMe};
use me_kit::channel::{ChannelSpec, MeTriple};
use me_kit::infoq::{entropy_numeric, lloyd_max, mi_additive_channel, panter_dite_mse};
use me_kit::metrics::{self as m, Link, MetricResult, NcbrLinks, ThetaConvention};
use me_kit::oracle::exec::{par_map, Exec};
use me_kit::oracle::{mc_metric, McScenario, RngConfig};
use me_kit::MeDist;
use serde_json::{json, Value};

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
#[value(rename_all = "snake_case")]
pub enum Metric {
    Outage,
    OutageCapacity,
    Cdf,
    Arq,
    #[value(alias = "harq")]
    HarqTruncated,
    HarqPersistent,
    Ncbr,
    ArqInterference,
    EffCapacityRate,
    EffCapacity,
    Ergodic,
    Ber,
    Pep,
    Diversity,
    SmMimoOutage,
    Entropy,
    Mi,
    LloydMax,
    PanterDite,
}

impl Metric {
    pub fn name(self) -> String {
        self.to_possible_value().map(|v| v.get_name().to_owned()).unwrap_or_default()
    }

    fn keys(self) -> &'static [SweepKey] {
        use Metric::*;
        use SweepKey as K;
        match self {
            Outage | Arq | HarqPersistent | Ncbr | ArqInterference => &[K::R, K::S],
            OutageCapacity => &[K::S, K::Q],
            Cdf => &[K::S, K::T],
            HarqTruncated => &[K::R, K::S, K::K],
            EffCapacityRate | EffCapacity => &[K::S, K::Theta],
            Ergodic | Pep | Entropy | Mi => &[K::S],
            Ber => &[K::S, K::A],
            Diversity => &[K::A],
            SmMimoOutage => &[K::R],
            LloydMax | PanterDite => &[K::S, K::M],
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum SweepKey {
    #[value(name = "R")]
    R,
    #[value(name = "S")]
    S,
    #[value(name = "K")]
    K,
    #[value(name = "theta")]
    Theta,
    #[value(name = "a")]
    A,
    #[value(name = "t")]
    T,
    #[value(name = "q")]
    Q,
    #[value(name = "M")]
    M,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum DetectionArg {
    Noncoherent,
    Coherent,
}

#[derive(Args, Debug, Clone)]
pub struct Params {
    /// Rate in nats per channel use.
    #[arg(long = "R", default_value_t = 1.0)]
    pub r: f64,
    /// Mean SNR.
    #[arg(long = "S")]
    pub s: Option<f64>,
    /// Maximum number of HARQ transmissions.
    #[arg(long = "K", default_value_t = 2)]
    pub k: usize,
    /// QoS exponent.
    #[arg(long, default_value_t = 1.0)]
    pub theta: f64,
    /// Modulation constant.
    #[arg(long, default_value_t = 1.0)]
    pub a: f64,
    /// Argument of the cdf.
    #[arg(long, default_value_t = 1.0)]
    pub t: f64,
    /// Target outage probability.
    #[arg(long, default_value_t = 0.01)]
    pub q: f64,
    /// Quantizer levels.
    #[arg(long = "M", default_value_t = 4)]
    pub m: usize,
    #[arg(long, value_enum, default_value_t = DetectionArg::Noncoherent)]
    pub detection: DetectionArg,
    /// Evaluation path: augmented|success_probability (arq),
    /// kron|sylvester|vectorized|van_loan (arq_interference),
    /// quadrature|eigen (eff_capacity), closed_form|quadrature (ber).
    #[arg(long)]
    pub path: Option<String>,
    #[arg(long = "Theta-convention", value_enum, default_value_t = Convention::Absolute)]
    pub theta_convention: Convention,
}

impl Params {
    fn with(&self, key: SweepKey, v: f64) -> Result<Params, CliError> {
        let mut p = self.clone();
        let count = |v: f64| -> Result<usize, CliError> {
            if v >= 1.0 && v.fract() == 0.0 {
                Ok(v as usize)
            } else {
                Err(CliError::usage(format!("sweep value {v} is not a positive integer")))
            }
        };
        match key {
            SweepKey::R => p.r = v,
            SweepKey::S => p.s = Some(v),
            SweepKey::K => p.k = count(v)?,
            SweepKey::Theta => p.theta = v,
            SweepKey::A => p.a = v,
            SweepKey::T => p.t = v,
            SweepKey::Q => p.q = v,
            SweepKey::M => p.m = count(v)?,
        }
        Ok(p)
    }

    fn get(&self, key: SweepKey) -> Option<f64> {
        Some(match key {
            SweepKey::R => self.r,
            SweepKey::S => self.s?,
            SweepKey::K => self.k as f64,
            SweepKey::Theta => self.theta,
            SweepKey::A => self.a,
            SweepKey::T => self.t,
            SweepKey::Q => self.q,
            SweepKey::M => self.m as f64,
        })
    }

    fn conv(&self) -> ThetaConvention {
        self.theta_convention.into()
    }
}

pub const INPUT_KEYS: [SweepKey; 8] =
    [SweepKey::R, SweepKey::S, SweepKey::K, SweepKey::Theta, SweepKey::A, SweepKey::T, SweepKey::Q, SweepKey::M];

pub fn key_name(k: SweepKey) -> String {
    k.to_possible_value().map(|v| v.get_name().to_owned()).unwrap_or_default()
}

#[derive(Debug, Clone)]
pub struct Row {
    pub metric: String,
    pub inputs: Vec<(SweepKey, f64)>,
    pub value: f64,
    pub path: String,
    pub imag_residual: f64,
    pub quad_error: Option<f64>,
    pub warnings: Vec<String>,
    pub extra: Option<Value>,
}

/// The primary channel in the form each metric family needs.
struct Law {
    d: MeDist,
    s: f64,
    conv: ThetaConvention,
}

impl Law {
    fn resolve(spec: &ChannelSpec, p: &Params) -> Result<Law, CliError> {
        let conv = p.conv();
        let law = match conv {
            ThetaConvention::Absolute => {
                let d = input::build(spec, p.s)?.dist;
                let s = match p.s {
                    Some(s) => s,
                    None => d.mean()?,
                };
                Law { d, s, conv }
            }
            ThetaConvention::PerUnitMean => {
                let phys = input::build(spec, None)?.dist;
                let s = match p.s {
                    Some(s) => s,
                    None => phys.mean()?,
                };
                Law { d: phys.unit_mean()?, s, conv }
            }
        };
        let report = law.d.validate();
        if !report.is_valid() {
            return Err(CliError::usage(format!("invalid channel: {}", report.failures().join(", "))));
        }
        Ok(law)
    }

    /// Law against which `link.theta` is compared.
    fn threshold_law(&self) -> &MeDist {
        &self.d
    }

    fn link(&self, rate: f64) -> Result<Link, CliError> {
        Ok(Link::new(rate, self.s, self.conv)?)
    }

    fn physical(&self) -> Result<MeDist, CliError> {
        Ok(match self.conv {
            ThetaConvention::Absolute => self.d.clone(),
            ThetaConvention::PerUnitMean => self.d.scale_mean(self.s)?,
        })
    }
}

fn absolute_only(p: &Params, what: &str) -> Result<(), CliError> {
    if p.theta_convention != Convention::Absolute {
        return Err(CliError::usage(format!("{what} supports only the absolute Θ convention")));
    }
    Ok(())
}

fn build_all(specs: &[ChannelSpec], s: Option<f64>) -> Result<Vec<MeDist>, CliError> {
    specs.iter().map(|c| Ok(input::build(c, s)?.dist)).collect()
}

fn ncbr_links(sc: &Scenario, s: Option<f64>) -> Result<NcbrLinks, CliError> {
    let n = sc.ncbr.as_ref().ok_or_else(|| CliError::usage("ncbr needs an `ncbr` block in the spec"))?;
    let b = |c: &ChannelSpec| -> Result<MeDist, CliError> { Ok(input::build(c, s)?.dist) };
    Ok(NcbrLinks { l13: b(&n.l13)?, l32: b(&n.l32)?, l23: b(&n.l23)?, l31: b(&n.l31)? })
}

fn pep_branches(sc: &Scenario, s: Option<f64>) -> Result<Vec<(MeDist, f64)>, CliError> {
    let br = sc.branches.as_ref().ok_or_else(|| CliError::usage("pep needs `branches` in the spec"))?;
    br.iter().map(|b| Ok((input::build(&b.channel, s)?.dist, b.a))).collect()
}

fn interference(sc: &Scenario, p: &Params) -> Result<m::InterferenceScenario, CliError> {
    match (&sc.interferers, &sc.bivariate) {
        (Some(list), None) => {
            let signal = input::build(sc.channel()?, p.s)?.dist;
            Ok(m::InterferenceScenario::independent(&signal, &build_all(list, None)?)?)
        }
        (None, Some(b)) => {
            if p.s.is_some() {
                return Err(CliError::usage("--S cannot rescale a bivariate law"));
            }
            Ok(BivMe::from_json_value(b)?.interference_scenario()?)
        }
        (Some(_), Some(_)) => Err(CliError::usage("give either `interferers` or `bivariate`, not both")),
        (None, None) => Err(CliError::usage("arq_interference needs `interferers` or `bivariate`")),
    }
}

fn path_err(metric: Metric, p: &str) -> CliError {
    CliError::usage(format!("path `{p}` does not apply to {}", metric.name()))
}

fn interference_path(p: Option<&str>) -> Result<m::InterferencePath, CliError> {
    use m::InterferencePath as P;
    Ok(match p.unwrap_or("sylvester") {
        "kron" => P::Kron,
        "sylvester" => P::Sylvester,
        "vectorized" => P::Vectorized,
        "van_loan" => P::VanLoan,
        o => return Err(path_err(Metric::ArqInterference, o)),
    })
}

fn from_result(metric: Metric, r: MetricResult) -> Row {
    let path = serde_json::to_value(r.path)
        .ok()
        .and_then(|v| v.as_str().map(str::to_owned))
        .unwrap_or_default();
    Row {
        metric: metric.name(),
        inputs: Vec::new(),
        value: r.value,
        path,
        imag_residual: r.diagnostics.imag_residual,
        quad_error: r.diagnostics.quad_error,
        warnings: r.diagnostics.warnings,
        extra: None,
    }
}

fn plain(metric: Metric, value: f64, path: &str) -> Row {
    Row {
        metric: metric.name(),
        inputs: Vec::new(),
        value,
        path: path.to_owned(),
        imag_residual: 0.0,
        quad_error: None,
        warnings: Vec::new(),
        extra: None,
    }
}

/// Evaluates one metric at one parameter point.
pub fn eval_point(metric: Metric, sc: &Scenario, p: &Params) -> Result<Row, CliError> {
    use Metric::*;
    let path = p.path.as_deref();
    let law = || Law::resolve(sc.channel()?, p);
    let mut s_used = p.s;
    let mut row = match metric {
        HarqPersistent if sc.has_interference() => {
            absolute_only(p, "harq_persistent with interference")?;
            let isc = interference(sc, p)?;
            from_result(metric, m::harq_persistent_interference(&isc, Link::absolute(p.r))?)
        }
        Outage | Arq | HarqTruncated | HarqPersistent => {
            let l = law()?;
            s_used = Some(l.s);
            let link = l.link(p.r)?;
            let d = l.threshold_law();
            let r = match metric {
                Outage => m::outage(d, link.theta)?,
                Arq => {
                    let ap = match path.unwrap_or("augmented") {
                        "augmented" => m::ArqPath::Augmented,
                        "success_probability" => m::ArqPath::SuccessProbability,
                        o => return Err(path_err(metric, o)),
                    };
                    m::arq_throughput(d, link, ap)?
                }
                HarqTruncated => {
                    if p.k == 0 {
                        return Err(CliError::usage("--K must be at least 1"));
                    }
                    m::harq_truncated(d, link, p.k)?
                }
                _ => m::harq_persistent(d, link)?,
            };
            from_result(metric, r)
        }
        Ncbr => {
            absolute_only(p, "ncbr")?;
            from_result(metric, m::ncbr_throughput(&ncbr_links(sc, p.s)?, p.r, p.r)?)
        }
        ArqInterference => {
            absolute_only(p, "arq_interference")?;
            let isc = interference(sc, p)?;
            s_used = Some(isc.signal.mean()?);
            from_result(metric, m::arq_interference(&isc, Link::absolute(p.r), interference_path(path)?)?)
        }
        OutageCapacity | Cdf | EffCapacityRate | EffCapacity | Ergodic | Ber | Entropy | LloydMax | PanterDite
        | Mi => {
            let l = law()?;
            s_used = Some(l.s);
            let d = l.physical()?;
            match metric {
                OutageCapacity => from_result(metric, m::outage_capacity(&d, p.q)?),
                Cdf => plain(metric, d.cdf(p.t)?, "closed_form"),
                EffCapacityRate => from_result(metric, m::eff_capacity_rate(&d, p.theta)?),
                EffCapacity => {
                    let ep = match path.unwrap_or("quadrature") {
                        "quadrature" => m::EffCapPath::Quadrature,
                        "eigen" => m::EffCapPath::Eigen,
                        o => return Err(path_err(metric, o)),
                    };
                    from_result(metric, m::eff_capacity_shannon(&d, p.theta, ep)?)
                }
                Ergodic => from_result(metric, m::ergodic_capacity(&d)?),
                Ber => match p.detection {
                    DetectionArg::Noncoherent => {
                        if let Some(o) = path.filter(|&o| o != "closed_form") {
                            return Err(path_err(metric, o));
                        }
                        from_result(metric, m::ber_noncoherent(&d, p.a)?)
                    }
                    DetectionArg::Coherent => {
                        let bp = match path.unwrap_or("closed_form") {
                            "closed_form" => m::BerPath::ClosedForm,
                            "quadrature" => m::BerPath::Quadrature,
                            o => return Err(path_err(metric, o)),
                        };
                        from_result(metric, m::ber_coherent(&d, p.a, bp)?)
                    }
                },
                Entropy => {
                    let e = entropy_numeric(&d, true)?;
                    let mut row = plain(metric, e.nats, "quadrature");
                    row.quad_error = Some(e.quad.error);
                    row.warnings.extend(e.warning());
                    row.extra = Some(json!({ "renyi_limit_check": e.limit_check }));
                    row
                }
                Mi => {
                    let w = sc.noise.as_ref().ok_or_else(|| CliError::usage("mi needs a `noise` channel"))?;
                    let dw = input::build(w, None)?.dist;
                    let r = mi_additive_channel(&d, &dw)?;
                    let mut row = plain(metric, r.nats, "quadrature");
                    row.warnings = r.warnings;
                    row.extra = Some(json!({
                        "exp_noise_capacity": r.exp_noise_capacity,
                        "h_y_unit": r.h_y_unit,
                        "h_w_unit": r.h_w_unit,
                    }));
                    row
                }
                LloydMax => {
                    let qz = lloyd_max(&d, p.m, 500)?;
                    let mut row = plain(metric, qz.mse, "closed_form");
                    row.warnings = qz.warnings;
                    row.extra = Some(json!({
                        "thresholds": qz.thresholds,
                        "centroids": qz.centroids,
                        "iterations": qz.iterations,
                        "converged": qz.converged,
                    }));
                    row
                }
                _ => {
                    let pd = panter_dite_mse(&d, p.m, None)?;
                    let mut row = plain(metric, pd.mse, "quadrature");
                    row.extra = Some(json!({ "cube_root_integral": pd.cube_root_integral }));
                    row
                }
            }
        }
        Pep => {
            absolute_only(p, "pep")?;
            from_result(metric, m::pep(&pep_branches(sc, p.s)?)?)
        }
        Diversity => {
            let spec = sc.channel()?;
            let d = input::build(spec, None)?.dist;
            let gain = m::diversity_gain(&d)?;
            let det = match p.detection {
                DetectionArg::Coherent => m::Detection::Coherent,
                DetectionArg::Noncoherent => m::Detection::Noncoherent,
            };
            let slope = m::diversity_slope(&d.unit_mean()?, det, p.a)?;
            let mut row = plain(metric, gain as f64, "closed_form");
            row.extra = Some(json!({ "numeric_slope": slope }));
            row
        }
        SmMimoOutage => from_result(metric, sm_mimo_2x2_outage(p.r)?),
    };
    row.inputs = metric
        .keys()
        .iter()
        .filter_map(|&k| match k {
            SweepKey::S => s_used.map(|s| (k, s)),
            _ => p.get(k).map(|v| (k, v)),
        })
        .collect();
    Ok(row)
}

pub fn metric_rows(
    metric: Metric,
    sc: &Scenario,
    p: &Params,
    sweep: Option<(SweepKey, Vec<f64>)>,
) -> Result<Vec<Row>, CliError> {
    match sweep {
        None => Ok(vec![eval_point(metric, sc, p)?]),
        Some((key, values)) => {
            if !metric.keys().contains(&key) {
                return Err(CliError::usage(format!("{} does not depend on {}", metric.name(), key_name(key))));
            }
            let points = values.iter().map(|&v| p.with(key, v)).collect::<Result<Vec<_>, _>>()?;
            par_map(Exec::default(), &points, |q| eval_point(metric, sc, q)).into_iter().collect()
        }
    }
}

pub struct Verification {
    pub metric: String,
    pub closed: f64,
    pub mc: f64,
    pub std_err: f64,
    pub z: f64,
    pub n: usize,
    pub seed: u64,
    pub pass: bool,
}

impl Verification {
    pub fn to_json(&self) -> Value {
        json!({
            "metric": self.metric,
            "closed": self.closed,
            "mc": self.mc,
            "std_err": self.std_err,
            "z": self.z,
            "n": self.n,
            "seed": self.seed,
            "pass": self.pass,
        })
    }
}

/// Simulation counterpart of a metric. Under the per-unit-mean convention the
/// simulated channel is the spec as written, with `Θ = e^R - 1`.
fn mc_scenario(metric: Metric, sc: &Scenario, p: &Params) -> Result<McScenario, CliError> {
    use Metric::*;
    let s = match p.theta_convention {
        Convention::Absolute => p.s,
        Convention::PerUnitMean => None,
    };
    let d = || -> Result<MeDist, CliError> { Ok(input::build(sc.channel()?, s)?.dist) };
    let link = Link::absolute(p.r);
    Ok(match metric {
        Outage => McScenario::Outage { d: d()?, theta: link.theta },
        Cdf => McScenario::Cdf { d: d()?, t: p.t },
        Arq => McScenario::Arq { d: d()?, link },
        HarqTruncated => McScenario::HarqTruncated { d: d()?, link, k: p.k },
        HarqPersistent if !sc.has_interference() => McScenario::HarqPersistent { d: d()?, link },
        Ncbr => McScenario::Ncbr { links: ncbr_links(sc, s)?, r12: p.r, r21: p.r },
        ArqInterference if sc.bivariate.is_none() => {
            let list = sc.interferers.as_deref().unwrap_or_default();
            McScenario::ArqInterference { signal: d()?, interferers: build_all(list, None)?, link }
        }
        Ber => match p.detection {
            DetectionArg::Noncoherent => McScenario::BerNoncoherent { d: d()?, a: p.a },
            DetectionArg::Coherent => McScenario::BerCoherent { d: d()?, a: p.a },
        },
        Pep => McScenario::Pep { branches: pep_branches(sc, s)? },
        EffCapacityRate => McScenario::EffCapacityRate { d: d()?, theta: p.theta },
        EffCapacity => McScenario::EffCapacityShannon { d: d()?, theta: p.theta },
        Ergodic => McScenario::Ergodic { d: d()? },
        SmMimoOutage => McScenario::SmMimoOutage { rate: p.r },
        _ => return Err(CliError::usage(format!("no Monte Carlo oracle for {}", metric.name()))),
    })
}

pub fn verify(metric: Metric, sc: &Scenario, p: &Params, n: usize, seed: u64) -> Result<Verification, CliError> {
    let mc_sc = mc_scenario(metric, sc, p)?;
    let closed = eval_point(metric, sc, p)?.value;
    let est = mc_metric(&mc_sc, &RngConfig::new(seed, n))?;
    let z = est.z_score(closed);
    Ok(Verification {
        metric: metric.name(),
        closed,
        mc: est.value,
        std_err: est.std_err,
        z,
        n,
        seed,
        pass: z.abs() < 4.0,
    })
}

pub fn optimize(metric: OptMetric, sc: &Scenario, thetas: &[f64]) -> Result<Vec<m::RatePoint>, CliError> {
    let (d_um, om) = match metric {
        OptMetric::Arq => (input::build(sc.channel()?, None)?.dist.unit_mean()?, m::OptimizeMetric::Arq),
        OptMetric::HarqPersistent => {
            if sc.has_interference() {
                let isc = interference(sc, &Params::default_values())?;
                m::harq_persistent_interference(&isc, Link::absolute(1.0))?;
            }
            (input::build(sc.channel()?, None)?.dist.unit_mean()?, m::OptimizeMetric::HarqPersistent)
        }
        OptMetric::ArqInterference => {
            let isc = match (&sc.interferers, &sc.bivariate) {
                (Some(list), None) => {
                    let signal = input::build(sc.channel()?, None)?.dist.unit_mean()?;
                    m::InterferenceScenario::independent(&signal, &build_all(list, None)?)?
                }
                _ => interference(sc, &Params::default_values())?,
            };
            (isc.signal.clone(), m::OptimizeMetric::ArqInterference(isc))
        }
    };
    Ok(m::optimize_rate(&d_um, &om, thetas, Exec::default())?)
}

impl Params {
    fn default_values() -> Params {
        Params {
            r: 1.0,
            s: None,
            k: 2,
            theta: 1.0,
            a: 1.0,
            t: 1.0,
            q: 0.01,
            m: 4,
            detection: DetectionArg::Noncoherent,
            path: None,
            theta_convention: Convention::Absolute,
        }
    }
}

/// Summary printed by the `channel` subcommand, and whether the law is valid.
pub fn channel_summary(spec: &ChannelSpec, s: Option<f64>) -> (Value, bool) {
    let (d, provenance, error) = match input::build(spec, s) {
        Ok(c) => (c.dist, c.provenance.to_string(), None),
        Err(e) => match raw_companion(spec) {
            Some(d) => (d, "rational_lt".to_owned(), Some(e.message)),
            None => {
                return (json!({ "kind": input::kind_name(spec), "valid": false, "failures": [e.message] }), false)
            }
        },
    };
    let d = &d;
    let rep = d.validate();
    let mut failures: Vec<String> = rep.failures().iter().map(|f| f.to_string()).collect();
    failures.extend(error.clone());
    let num = |r: me_kit::Result<f64>| r.ok().filter(|v| v.is_finite());
    let triple = MeTriple::from_dist(d).ok().and_then(|t| serde_json::to_value(t).ok());
    let v = json!({
        "kind": input::kind_name(spec),
        "provenance": provenance,
        "degree": d.degree(),
        "mean": num(d.mean()),
        "second_moment": num(d.moment(2)),
        "diversity_gain": m::diversity_gain(d).ok(),
        "valid": failures.is_empty(),
        "failures": failures,
        "report": {
            "stable": rep.stable,
            "nonneg_on_grid": rep.nonneg_on_grid,
            "cdf_limit_one": rep.cdf_limit_one,
            "lt_at_zero_is_one": rep.lt_at_zero_is_one,
            "p1_eq_q1": rep.p1_eq_q1,
            "min_pdf": rep.min_pdf,
            "t_max": rep.t_max,
        },
        "triple": triple,
    });
    (v, error.is_none() && rep.is_valid())
}

/// Companion triple of a rational transform that failed construction, so the
/// report can name the violated condition.
fn raw_companion(spec: &ChannelSpec) -> Option<MeDist> {
    match spec {
        ChannelSpec::RationalLt { num, den } => {
            me_kit::RationalLt::new(num.clone(), den.clone()).ok().map(|lt| lt.companion())
        }
        _ => None,
    }
}
