//! Globally adaptive 21-point Gauss–Kronrod quadrature.
//!
//! Infinite ranges are folded onto `(0, 1]` with `x = a + (1 - t) / t`.

const XGK: [f64; 11] = [
    0.995657163025808080735527280689003,
    0.973906528517171720077964012084452,
    0.930157491355708226001207180059508,
    0.865063366688984510732096688423493,
    0.780817726586416897063717578345042,
    0.679409568299024406234327365114874,
    0.562757134668604683339000099272694,
    0.433395394129247190799265943165784,
    0.294392862701460198131126603103866,
    0.148874338981631210884826001129720,
    0.0,
];
const WGK: [f64; 11] = [
    0.011694638867371874278064396062192,
    0.032558162307964727478818972459390,
    0.054755896574351996031381300244580,
    0.075039674810919952767043140916190,
    0.093125454583697605535065465083366,
    0.109387158802297641899210590325805,
    0.123491976262065851077208067815230,
    0.134709217311473325928054001771707,
    0.142775938577060080797094273138717,
    0.147739104901338491374841515972068,
    0.149445554002916905664936468389821,
];
const WG: [f64; 5] = [
    0.066671344308688137593568809893332,
    0.149451349150580593145776339657697,
    0.219086362515982043995534934228163,
    0.269266719309996355091226921569469,
    0.295524224714752870173892994651338,
];

#[derive(Debug, Clone, Copy)]
pub struct QuadOptions {
    pub abs_tol: f64,
    pub rel_tol: f64,
    pub max_intervals: usize,
}

impl Default for QuadOptions {
    fn default() -> Self {
        QuadOptions {
            abs_tol: 1e-13,
            rel_tol: 1e-11,
            max_intervals: 4000,
        }
    }
}

impl QuadOptions {
    pub fn tol(abs_tol: f64, rel_tol: f64) -> Self {
        QuadOptions {
            abs_tol,
            rel_tol,
            ..Default::default()
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct QuadResult {
    pub value: f64,
    pub error: f64,
    pub converged: bool,
    pub evals: usize,
}

impl QuadResult {
    pub fn warning(&self) -> Option<String> {
        (!self.converged).then(|| {
            format!(
                "quadrature did not reach tolerance (estimated error {:e})",
                self.error
            )
        })
    }
}

struct Seg {
    a: f64,
    b: f64,
    val: f64,
    err: f64,
}

fn gk21<F: Fn(f64) -> f64>(f: &F, a: f64, b: f64) -> (f64, f64) {
    let center = 0.5 * (a + b);
    let half = 0.5 * (b - a);
    let fc = f(center);
    let mut resk = fc * WGK[10];
    let mut resabs = resk.abs();
    let mut resg = 0.0;
    let mut fv1 = [0.0; 10];
    let mut fv2 = [0.0; 10];
    for j in 0..10 {
        let dx = half * XGK[j];
        let f1 = f(center - dx);
        let f2 = f(center + dx);
        fv1[j] = f1;
        fv2[j] = f2;
        resk += WGK[j] * (f1 + f2);
        resabs += WGK[j] * (f1.abs() + f2.abs());
        if j % 2 == 1 {
            resg += WG[j / 2] * (f1 + f2);
        }
    }
    let reskh = 0.5 * resk;
    let mut resasc = WGK[10] * (fc - reskh).abs();
    for j in 0..10 {
        resasc += WGK[j] * ((fv1[j] - reskh).abs() + (fv2[j] - reskh).abs());
    }
    let result = resk * half;
    let resabs = resabs * half.abs();
    let resasc = resasc * half.abs();
    let mut err = ((resk - resg) * half).abs();
    if resasc != 0.0 && err != 0.0 {
        err = resasc * (200.0 * err / resasc).powf(1.5).min(1.0);
    }
    if resabs > f64::MIN_POSITIVE / (50.0 * f64::EPSILON) {
        err = err.max(50.0 * f64::EPSILON * resabs);
    }
    (result, err)
}

fn adapt<F: Fn(f64) -> f64>(f: &F, breaks: &[f64], opts: &QuadOptions) -> QuadResult {
    let mut segs: Vec<Seg> = Vec::new();
    let mut evals = 0;
    for w in breaks.windows(2) {
        if w[1] > w[0] {
            let (val, err) = gk21(f, w[0], w[1]);
            evals += 21;
            segs.push(Seg { a: w[0], b: w[1], val, err });
        }
    }
    loop {
        let total: f64 = segs.iter().map(|s| s.val).sum();
        let err: f64 = segs.iter().map(|s| s.err).sum();
        if !total.is_finite() || !err.is_finite() {
            return QuadResult { value: total, error: f64::INFINITY, converged: false, evals };
        }
        let target = opts.abs_tol.max(opts.rel_tol * total.abs());
        if err <= target {
            return QuadResult { value: total, error: err, converged: true, evals };
        }
        if segs.len() >= opts.max_intervals {
            return QuadResult { value: total, error: err, converged: false, evals };
        }
        let (k, _) = segs
            .iter()
            .enumerate()
            .filter(|(_, s)| (s.b - s.a) > 1e-14 * s.a.abs().max(s.b.abs()).max(1e-300))
            .max_by(|x, y| x.1.err.total_cmp(&y.1.err))
            .unwrap_or((usize::MAX, &segs[0]));
        if k == usize::MAX {
            return QuadResult { value: total, error: err, converged: false, evals };
        }
        let s = segs.swap_remove(k);
        let m = 0.5 * (s.a + s.b);
        let (v1, e1) = gk21(f, s.a, m);
        let (v2, e2) = gk21(f, m, s.b);
        evals += 42;
        segs.push(Seg { a: s.a, b: m, val: v1, err: e1 });
        segs.push(Seg { a: m, b: s.b, val: v2, err: e2 });
    }
}

/// Integrates `f` over `[a, b]`; either limit may be infinite.
pub fn quad<F: Fn(f64) -> f64>(f: F, a: f64, b: f64, opts: &QuadOptions) -> QuadResult {
    quad_with_breaks(f, a, b, &[], opts)
}

/// As [`quad`], seeding the subdivision with interior break points of a finite range.
pub fn quad_with_breaks<F: Fn(f64) -> f64>(
    f: F,
    a: f64,
    b: f64,
    breaks: &[f64],
    opts: &QuadOptions,
) -> QuadResult {
    dispatch(&f, a, b, breaks, opts)
}

fn dispatch(f: &dyn Fn(f64) -> f64, a: f64, b: f64, breaks: &[f64], opts: &QuadOptions) -> QuadResult {
    if a == b {
        return QuadResult { value: 0.0, error: 0.0, converged: true, evals: 0 };
    }
    if a > b {
        let r = dispatch(f, b, a, breaks, opts);
        return QuadResult { value: -r.value, ..r };
    }
    match (a.is_finite(), b.is_finite()) {
        (true, true) => {
            let mut pts = vec![a];
            let mut inner: Vec<f64> = breaks.iter().copied().filter(|&p| p > a && p < b).collect();
            inner.sort_by(f64::total_cmp);
            pts.extend(inner);
            pts.push(b);
            adapt(&f, &pts, opts)
        }
        (true, false) => {
            let g = |t: f64| {
                let x = a + (1.0 - t) / t;
                let v = f(x) / (t * t);
                if v.is_finite() { v } else if x > 1e12 { 0.0 } else { v }
            };
            adapt(&g, &[0.0, 1.0], opts)
        }
        (false, true) => {
            let g = |t: f64| {
                let x = b - (1.0 - t) / t;
                let v = f(x) / (t * t);
                if v.is_finite() { v } else if x < -1e12 { 0.0 } else { v }
            };
            adapt(&g, &[0.0, 1.0], opts)
        }
        (false, false) => {
            let half = QuadOptions { abs_tol: 0.5 * opts.abs_tol, ..*opts };
            let r1 = dispatch(f, f64::NEG_INFINITY, 0.0, &[], &half);
            let r2 = dispatch(f, 0.0, f64::INFINITY, &[], &half);
            QuadResult {
                value: r1.value + r2.value,
                error: r1.error + r2.error,
                converged: r1.converged && r2.converged,
                evals: r1.evals + r2.evals,
            }
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn exponential_tail() {
        let r = quad(|t| (-t).exp(), 0.0, f64::INFINITY, &QuadOptions::default());
        assert!(r.converged);
        assert!((r.value - 1.0).abs() < 1e-12);
    }

    #[test]
    fn gaussian_whole_line() {
        let r = quad(|t| (-t * t).exp(), f64::NEG_INFINITY, f64::INFINITY, &QuadOptions::default());
        assert!((r.value - std::f64::consts::PI.sqrt()).abs() < 1e-12);
    }

    #[test]
    fn endpoint_singularity() {
        let r = quad(|t| 1.0 / t.sqrt(), 0.0, 1.0, &QuadOptions::default());
        assert!((r.value - 2.0).abs() < 1e-9, "{r:?}");
    }

    #[test]
    fn non_convergence_flagged() {
        let opts = QuadOptions { max_intervals: 3, ..Default::default() };
        let r = quad(|t| (50.0 * t).sin().abs(), 0.0, 10.0, &opts);
        assert!(!r.converged);
        assert!(r.warning().is_some());
    }

    #[test]
    fn reversed_limits() {
        let r = quad(|t| t, 1.0, 0.0, &QuadOptions::default());
        assert!((r.value + 0.5).abs() < 1e-15);
    }

    #[test]
    fn oscillatory_decay() {
        // ∫ (1 - cos 7t) e^{-t} dt = 1 - 1/50
        let r = quad(|t| (1.0 - (7.0 * t).cos()) * (-t).exp(), 0.0, f64::INFINITY, &QuadOptions::default());
        assert!((r.value - 0.98).abs() < 1e-11, "{r:?}");
    }
}
