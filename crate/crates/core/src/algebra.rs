//! Closure operations on ME laws: sums, k-fold sums, maxima, minima, and the
//! standard fading channels.

use crate::channel::ChannelSpec;
use crate::error::{Error, Result};
use crate::matfun::{
    self, assert_real, block, col_as_matrix, expm, inverse, kron, kron_sum, row_as_matrix,
    ColVec, Matrix, RowVec,
};
use crate::medist::{oscillatory_example, MeDist, RationalLt};
use std::fmt;

pub const DEFAULT_MAX_DEGREE: usize = 4096;

/// Active degree limit; `ME_KIT_MAX_DEGREE` overrides the default.
pub fn degree_limit() -> usize {
    std::env::var("ME_KIT_MAX_DEGREE")
        .ok()
        .and_then(|v| v.trim().parse().ok())
        .unwrap_or(DEFAULT_MAX_DEGREE)
}

pub fn check_degree(d: usize) -> Result<()> {
    let limit = degree_limit();
    if d > limit {
        Err(Error::DegreeLimit { degree: d, limit })
    } else {
        Ok(())
    }
}

/// Law of `Z1 + Z2` for independent `Z1`, `Z2`.
pub fn convolve(a: &MeDist, b: &MeDist) -> Result<MeDist> {
    let (d1, d2) = (a.degree(), b.degree());
    check_degree(d1 + d2)?;
    let y = block(&[
        vec![Some(a.y().clone()), Some(col_as_matrix(a.z()) * row_as_matrix(b.x()))],
        vec![None, Some(b.y().clone())],
    ])?;
    let mut x = RowVec::zeros(d1 + d2);
    x.columns_mut(0, d1).copy_from(a.x());
    let mut z = ColVec::zeros(d1 + d2);
    z.rows_mut(d1, d2).copy_from(b.z());
    MeDist::new(x, y, z)
}

pub fn convolve_all(parts: &[MeDist]) -> Result<MeDist> {
    let (first, rest) = parts
        .split_first()
        .ok_or_else(|| Error::Construction("empty sum".into()))?;
    rest.iter().try_fold(first.clone(), |acc, d| convolve(&acc, d))
}

/// Augmented generator of the `k`-fold sum, exposing every partial-sum cdf
/// from a single exponential.
#[derive(Debug, Clone)]
pub struct KFold {
    pub generator: Matrix,
    pub base: MeDist,
    pub k: usize,
}

pub fn kfold_block(base: &MeDist, k: usize) -> Result<KFold> {
    if k == 0 {
        return Err(Error::Domain("k-fold sum needs k >= 1".into()));
    }
    let d = base.degree();
    check_degree(d * k + 1)?;
    let n = d * k + 1;
    let mut g = Matrix::zeros(n, n);
    g.view_mut((0, 1), (1, d)).copy_from(base.x());
    let coupling = col_as_matrix(base.z()) * row_as_matrix(base.x());
    for j in 0..k {
        let o = 1 + j * d;
        g.view_mut((o, o), (d, d)).copy_from(base.y());
        if j + 1 < k {
            g.view_mut((o, o + d), (d, d)).copy_from(&coupling);
        }
    }
    Ok(KFold { generator: g, base: base.clone(), k })
}

impl KFold {
    /// `P(Z_1 + ... + Z_j <= t)` for `j = 1..=k`.
    pub fn partial_cdfs(&self, t: f64) -> Result<Vec<f64>> {
        if t <= 0.0 {
            return Ok(vec![0.0; self.k]);
        }
        let e = expm(&self.generator.scale(t))?;
        let d = self.base.degree();
        (0..self.k)
            .map(|j| {
                let o = 1 + j * d;
                let v = (e.view((0, o), (1, d)) * self.base.z())[(0, 0)];
                assert_real(v, 1.0)
            })
            .collect()
    }

    /// The `k`-fold sum as a plain triple.
    pub fn dist(&self) -> Result<MeDist> {
        let n = self.generator.nrows();
        let y = self.generator.view((1, 1), (n - 1, n - 1)).clone_owned();
        let x = RowVec::from_iterator(n - 1, self.generator.view((0, 1), (1, n - 1)).iter().copied());
        let d = self.base.degree();
        let mut z = ColVec::zeros(n - 1);
        z.rows_mut(n - 1 - d, d).copy_from(self.base.z());
        MeDist::new(x, y, z)
    }
}

/// Max or min of two independent ME laws.
#[derive(Debug, Clone)]
pub struct Extremum {
    pub a: MeDist,
    pub b: MeDist,
    pub is_max: bool,
}

pub fn max_dist(a: &MeDist, b: &MeDist) -> Extremum {
    Extremum { a: a.clone(), b: b.clone(), is_max: true }
}

pub fn min_dist(a: &MeDist, b: &MeDist) -> Extremum {
    Extremum { a: a.clone(), b: b.clone(), is_max: false }
}

impl Extremum {
    /// Product of the augmented marginal cdfs.
    pub fn cdf(&self, t: f64) -> Result<f64> {
        let (f1, f2) = (self.a.cdf(t)?, self.b.cdf(t)?);
        Ok(if self.is_max {
            f1 * f2
        } else {
            1.0 - (1.0 - f1) * (1.0 - f2)
        })
    }

    /// One exponential of the Kronecker sum of the augmented generators.
    pub fn cdf_kron(&self, t: f64) -> Result<f64> {
        if t <= 0.0 {
            return Ok(0.0);
        }
        let g = kron_sum(&self.a.augmented(), &self.b.augmented())?;
        check_degree(g.nrows())?;
        let e = expm(&g.scale(t))?;
        let zz = kron(&col_as_matrix(&self.a.augmented_z()), &col_as_matrix(&self.b.augmented_z()));
        let both = assert_real((e.row(0) * zz)[(0, 0)], 1.0)?;
        Ok(if self.is_max {
            both
        } else {
            self.a.cdf(t)? + self.b.cdf(t)? - both
        })
    }

    /// Closed ME triple for the extremum.
    pub fn closure(&self) -> Result<MeDist> {
        let (a, b) = (&self.a, &self.b);
        let (d1, d2) = (a.degree(), b.degree());
        let ks = kron_sum(a.y(), b.y())?;
        let inv_sum = kron_sum(&inverse(a.y())?, &inverse(b.y())?)?;
        let zz = kron(&col_as_matrix(a.z()), &col_as_matrix(b.z()));
        let xx = kron(&row_as_matrix(a.x()), &row_as_matrix(b.x()));
        if self.is_max {
            let n = d1 * d2 + d1 + d2;
            check_degree(n)?;
            let y = matfun::block_diag(&[&ks, a.y(), b.y()]);
            let mut x = RowVec::zeros(n);
            x.columns_mut(0, d1 * d2).copy_from(&xx.row(0));
            x.columns_mut(d1 * d2, d1).copy_from(a.x());
            x.columns_mut(d1 * d2 + d1, d2).copy_from(b.x());
            let top = &inv_sum * &zz;
            let mut z = ColVec::zeros(n);
            z.rows_mut(0, d1 * d2).copy_from(&top.column(0));
            z.rows_mut(d1 * d2, d1).copy_from(a.z());
            z.rows_mut(d1 * d2 + d1, d2).copy_from(b.z());
            MeDist::new(x, y, z)
        } else {
            check_degree(d1 * d2)?;
            let z = -(&inv_sum * &zz);
            MeDist::new(
                RowVec::from_iterator(d1 * d2, xx.iter().copied()),
                ks,
                ColVec::from_iterator(d1 * d2, z.iter().copied()),
            )
        }
    }
}

/// How an effective channel was assembled.
#[derive(Debug, Clone, PartialEq)]
pub enum Provenance {
    Leaf(String),
    Sum(Vec<Provenance>),
    Max(Box<Provenance>, Box<Provenance>),
    Min(Box<Provenance>, Box<Provenance>),
}

impl fmt::Display for Provenance {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Provenance::Leaf(s) => write!(f, "{s}"),
            Provenance::Sum(v) => {
                write!(f, "sum(")?;
                for (i, p) in v.iter().enumerate() {
                    if i > 0 {
                        write!(f, ", ")?;
                    }
                    write!(f, "{p}")?;
                }
                write!(f, ")")
            }
            Provenance::Max(a, b) => write!(f, "max({a}, {b})"),
            Provenance::Min(a, b) => write!(f, "min({a}, {b})"),
        }
    }
}

#[derive(Debug, Clone)]
pub struct EffectiveChannel {
    pub dist: MeDist,
    pub provenance: Provenance,
}

impl EffectiveChannel {
    pub fn leaf(dist: MeDist, name: impl Into<String>) -> Self {
        EffectiveChannel { dist, provenance: Provenance::Leaf(name.into()) }
    }

    pub fn plus(&self, other: &EffectiveChannel) -> Result<Self> {
        let mut parts = match &self.provenance {
            Provenance::Sum(v) => v.clone(),
            p => vec![p.clone()],
        };
        parts.push(other.provenance.clone());
        Ok(EffectiveChannel {
            dist: convolve(&self.dist, &other.dist)?,
            provenance: Provenance::Sum(parts),
        })
    }

    pub fn max(&self, other: &EffectiveChannel) -> Result<Self> {
        Ok(EffectiveChannel {
            dist: max_dist(&self.dist, &other.dist).closure()?,
            provenance: Provenance::Max(Box::new(self.provenance.clone()), Box::new(other.provenance.clone())),
        })
    }

    pub fn min(&self, other: &EffectiveChannel) -> Result<Self> {
        Ok(EffectiveChannel {
            dist: min_dist(&self.dist, &other.dist).closure()?,
            provenance: Provenance::Min(Box::new(self.provenance.clone()), Box::new(other.provenance.clone())),
        })
    }
}

fn positive(name: &str, v: f64) -> Result<()> {
    if v > 0.0 && v.is_finite() {
        Ok(())
    } else {
        Err(Error::Domain(format!("{name} must be positive, got {v}")))
    }
}

/// `n` independent exponential factors of the given mean.
fn gamma_law(n: u32, mean_each: f64) -> Result<MeDist> {
    if n == 0 {
        return Err(Error::Domain("shape must be at least 1".into()));
    }
    let r = 1.0 / mean_each;
    let f = RationalLt::new(vec![r], vec![r])?;
    MeDist::from_product_form(&vec![f; n as usize])
}

/// Selection diversity over `n` unit-branch Rayleigh links, mean-normalized and
/// rescaled to mean `s`.
pub fn sdc(n: u32, s: f64) -> Result<MeDist> {
    if n == 0 {
        return Err(Error::Domain("N must be at least 1".into()));
    }
    positive("S", s)?;
    let n = n as usize;
    check_degree(n)?;
    let mut q = Matrix::zeros(n, n);
    for i in 0..n {
        q[(i, i)] = matfun::c(-((i + 1) as f64));
        if i + 1 < n {
            q[(i, i + 1)] = matfun::c(1.0);
        }
    }
    let fact: f64 = (1..=n).map(|k| k as f64).product();
    let um = MeDist::new(
        matfun::unit_row(n, 0) * matfun::c(fact),
        q,
        matfun::unit_col(n, n - 1),
    )?;
    um.scaled(s)
}

/// Builds the effective channel described by a spec.
pub fn standard_channel(spec: &ChannelSpec) -> Result<EffectiveChannel> {
    use ChannelSpec as K;
    let leaf = |d: MeDist, name: String| Ok(EffectiveChannel::leaf(d, name));
    match spec {
        K::RationalLt { num, den } => {
            let lt = RationalLt::new(num.clone(), den.clone())?;
            leaf(MeDist::from_rational_lt(&lt)?, "rational_lt".into())
        }
        K::ProductForm { factors } => {
            let fs = factors
                .iter()
                .map(|f| RationalLt::new(f.num.clone(), f.den.clone()))
                .collect::<Result<Vec<_>>>()?;
            leaf(MeDist::from_product_form(&fs)?, format!("product_form[{}]", fs.len()))
        }
        K::Rayleigh { s } => leaf(MeDist::exponential(*s)?, format!("rayleigh(S={s})")),
        K::Nakagami { m, s } => {
            positive("S", *s)?;
            leaf(gamma_law(*m, s / *m as f64)?, format!("nakagami(m={m}, S={s})"))
        }
        K::Sdc { n, s } => leaf(sdc(*n, *s)?, format!("sdc(N={n}, S={s})")),
        K::OstbcMrc { n_tx, n_rx, r_stc, s } => {
            positive("S", *s)?;
            positive("R_stc", *r_stc)?;
            if *n_tx == 0 || *n_rx == 0 {
                return Err(Error::Domain("antenna counts must be positive".into()));
            }
            let mean = s / (r_stc * *n_tx as f64);
            leaf(
                gamma_law(n_tx * n_rx, mean)?,
                format!("ostbc_mrc(N_tx={n_tx}, N_rx={n_rx}, R_stc={r_stc}, S={s})"),
            )
        }
        K::ZfMimo { n_tx, n_rx, s, exponent } => {
            positive("S", *s)?;
            let k = match exponent {
                Some(k) => *k,
                None => {
                    if n_rx < n_tx {
                        return Err(Error::Domain("zero-forcing needs N_rx >= N_tx".into()));
                    }
                    n_rx - n_tx + 1
                }
            };
            leaf(gamma_law(k, *s)?, format!("zf_mimo(N_tx={n_tx}, N_rx={n_rx}, k={k}, S={s})"))
        }
        K::MrcList { branches } | K::SumInterference { components: branches } => {
            let parts = branches.iter().map(standard_channel).collect::<Result<Vec<_>>>()?;
            let (first, rest) = parts
                .split_first()
                .ok_or_else(|| Error::Construction("empty branch list".into()))?;
            rest.iter().try_fold(first.clone(), |acc, b| acc.plus(b))
        }
        K::OscillatoryEx2 => leaf(oscillatory_example(), "oscillatory".into()),
        K::Me(t) => leaf(t.to_dist()?, format!("me[d={}]", t.x.len())),
    }
}
