//! Adaptive Gauss-Kronrod quadrature with error estimates.
//!
//! A 7-point Gauss / 15-point Kronrod pair is applied per interval; the
//! interval with the largest error estimate is bisected until the global
//! estimate meets the absolute/relative targets or the subdivision budget
//! is exhausted. Semi-infinite integrals are mapped onto `(0, 1]` with
//! `x = a + t/(1-t)`; Kronrod abscissae are interior, so the singular
//! endpoint is never evaluated.

use std::fmt;

use thiserror::Error;

/// Abscissae of the 15-point Kronrod rule (positive half, descending).
/// Odd-indexed entries are the embedded 7-point Gauss abscissae.
const XGK: [f64; 8] = [
    0.991_455_371_120_812_6,
    0.949_107_912_342_758_5,
    0.864_864_423_359_769_1,
    0.741_531_185_599_394_5,
    0.586_087_235_467_691_1,
    0.405_845_151_377_397_2,
    0.207_784_955_007_898_48,
    0.0,
];

/// Weights of the 15-point Kronrod rule, matching `XGK`.
const WGK: [f64; 8] = [
    0.022_935_322_010_529_224,
    0.063_092_092_629_978_56,
    0.104_790_010_322_250_19,
    0.140_653_259_715_525_92,
    0.169_004_726_639_267_9,
    0.190_350_578_064_785_42,
    0.204_432_940_075_298_89,
    0.209_482_141_084_727_82,
];

/// Weights of the embedded 7-point Gauss rule (for `XGK[1]`, `XGK[3]`, `XGK[5]`, `XGK[7]`).
const WG: [f64; 4] = [
    0.129_484_966_168_869_7,
    0.279_705_391_489_276_64,
    0.381_830_050_505_118_9,
    0.417_959_183_673_469_4,
];

/// Tolerance targets and subdivision budget for an adaptive integration.
#[derive(Clone, Copy, Debug)]
pub struct QuadOptions {
    pub abs_tol: f64,
    pub rel_tol: f64,
    pub max_subdivisions: usize,
}

impl Default for QuadOptions {
    fn default() -> Self {
        Self {
            abs_tol: 1e-10,
            rel_tol: 1e-9,
            max_subdivisions: 2000,
        }
    }
}

impl QuadOptions {
    pub fn with_tols(abs_tol: f64, rel_tol: f64) -> Self {
        Self {
            abs_tol,
            rel_tol,
            ..Self::default()
        }
    }
}

/// Converged integral estimate.
#[derive(Clone, Copy, Debug)]
pub struct QuadResult {
    pub value: f64,
    pub abs_error: f64,
    pub subdivisions: usize,
}

/// The worst remaining intervals when an integration gives up, ordered by
/// decreasing error contribution.
#[derive(Clone, Debug)]
pub struct BisectionTrace(pub Vec<(f64, f64, f64)>);

impl fmt::Display for BisectionTrace {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for (i, (a, b, err)) in self.0.iter().enumerate() {
            if i > 0 {
                write!(f, ", ")?;
            }
            write!(f, "[{a:.6e}, {b:.6e}] err={err:.3e}")?;
        }
        Ok(())
    }
}

#[derive(Debug, Error)]
pub enum QuadError {
    #[error(
        "quadrature did not converge after {subdivisions} subdivisions: \
         estimate {value:e} +/- {abs_error:e} exceeds target {target:e}; \
         worst intervals: {trace}"
    )]
    NonConvergent {
        value: f64,
        abs_error: f64,
        target: f64,
        subdivisions: usize,
        trace: BisectionTrace,
    },
    #[error("integrand returned a non-finite value near x = {x:e}")]
    NonFinite { x: f64 },
}

#[derive(Clone, Copy)]
struct Segment {
    a: f64,
    b: f64,
    value: f64,
    error: f64,
}

/// QUADPACK-style error rescaling: sharpens the raw `|K15 - G7|` difference
/// using the deviation of the integrand from its mean over the interval.
fn rescale_error(err: f64, res_abs: f64, res_asc: f64) -> f64 {
    let mut scaled = err.abs();
    if res_asc != 0.0 && scaled != 0.0 {
        let scale = (200.0 * scaled / res_asc).powf(1.5);
        scaled = if scale < 1.0 { res_asc * scale } else { res_asc };
    }
    if res_abs > f64::MIN_POSITIVE / (50.0 * f64::EPSILON) {
        let min_err = 50.0 * f64::EPSILON * res_abs;
        if min_err > scaled {
            scaled = min_err;
        }
    }
    scaled
}

fn qk15<F: Fn(f64) -> f64>(f: &F, a: f64, b: f64) -> Segment {
    let center = 0.5 * (a + b);
    let half = 0.5 * (b - a);
    let f_center = f(center);

    let mut res_gauss = WG[3] * f_center;
    let mut res_kronrod = WGK[7] * f_center;
    let mut res_abs = res_kronrod.abs();
    let mut fv = [[0.0f64; 2]; 7];

    for j in 0..7 {
        let x = half * XGK[j];
        let f1 = f(center - x);
        let f2 = f(center + x);
        fv[j] = [f1, f2];
        let sum = f1 + f2;
        res_kronrod += WGK[j] * sum;
        res_abs += WGK[j] * (f1.abs() + f2.abs());
        if j % 2 == 1 {
            res_gauss += WG[j / 2] * sum;
        }
    }

    let mean = 0.5 * res_kronrod;
    let mut res_asc = WGK[7] * (f_center - mean).abs();
    for j in 0..7 {
        res_asc += WGK[j] * ((fv[j][0] - mean).abs() + (fv[j][1] - mean).abs());
    }

    let raw_err = (res_kronrod - res_gauss) * half;
    Segment {
        a,
        b,
        value: res_kronrod * half,
        error: rescale_error(raw_err, res_abs * half.abs(), res_asc * half.abs()),
    }
}

fn run<F: Fn(f64) -> f64>(
    f: &F,
    mut segments: Vec<Segment>,
    opts: &QuadOptions,
) -> Result<QuadResult, QuadError> {
    let mut subdivisions = 0usize;
    loop {
        let mut value = 0.0;
        let mut error = 0.0;
        let mut worst = 0usize;
        let mut worst_err = -1.0;
        for (i, s) in segments.iter().enumerate() {
            if !s.value.is_finite() {
                return Err(QuadError::NonFinite {
                    x: 0.5 * (s.a + s.b),
                });
            }
            value += s.value;
            error += s.error;
            if s.error > worst_err {
                worst_err = s.error;
                worst = i;
            }
        }
        let target = opts.abs_tol.max(opts.rel_tol * value.abs());
        if error <= target {
            return Ok(QuadResult {
                value,
                abs_error: error,
                subdivisions,
            });
        }
        if segments.len() >= opts.max_subdivisions {
            let mut ranked: Vec<_> = segments.iter().map(|s| (s.a, s.b, s.error)).collect();
            ranked.sort_by(|x, y| y.2.total_cmp(&x.2));
            ranked.truncate(5);
            return Err(QuadError::NonConvergent {
                value,
                abs_error: error,
                target,
                subdivisions,
                trace: BisectionTrace(ranked),
            });
        }
        let s = segments.swap_remove(worst);
        let mid = 0.5 * (s.a + s.b);
        if mid <= s.a || mid >= s.b {
            // interval narrower than f64 spacing: keep it and accept its error
            let mut ranked: Vec<_> = segments.iter().map(|t| (t.a, t.b, t.error)).collect();
            ranked.push((s.a, s.b, s.error));
            ranked.sort_by(|x, y| y.2.total_cmp(&x.2));
            ranked.truncate(5);
            return Err(QuadError::NonConvergent {
                value,
                abs_error: error,
                target,
                subdivisions,
                trace: BisectionTrace(ranked),
            });
        }
        segments.push(qk15(f, s.a, mid));
        segments.push(qk15(f, mid, s.b));
        subdivisions += 1;
    }
}

/// Integrate `f` over the bounded interval `[a, b]`.
pub fn integrate<F: Fn(f64) -> f64>(
    f: F,
    a: f64,
    b: f64,
    opts: &QuadOptions,
) -> Result<QuadResult, QuadError> {
    if a == b {
        return Ok(QuadResult {
            value: 0.0,
            abs_error: 0.0,
            subdivisions: 0,
        });
    }
    run(&f, vec![qk15(&f, a, b)], opts)
}

/// Integrate `f` over `[points[0], points[last]]` with initial subdivisions
/// at the interior points. Useful when the integrand is only piecewise
/// smooth and the breakpoints are known.
pub fn integrate_segments<F: Fn(f64) -> f64>(
    f: F,
    points: &[f64],
    opts: &QuadOptions,
) -> Result<QuadResult, QuadError> {
    assert!(points.len() >= 2, "need at least two breakpoints");
    let mut segments = Vec::with_capacity(points.len() - 1);
    for pair in points.windows(2) {
        if pair[1] > pair[0] {
            segments.push(qk15(&f, pair[0], pair[1]));
        }
    }
    if segments.is_empty() {
        return Ok(QuadResult {
            value: 0.0,
            abs_error: 0.0,
            subdivisions: 0,
        });
    }
    run(&f, segments, opts)
}

/// Integrate `f` over `[a, +inf)` via the map `x = a + t/(1-t)`.
///
/// The integrand must decay fast enough that `f(x) (1-t)^-2` stays bounded;
/// Gaussian or exponential tails are fine.
pub fn integrate_semi_infinite<F: Fn(f64) -> f64>(
    f: F,
    a: f64,
    opts: &QuadOptions,
) -> Result<QuadResult, QuadError> {
    let g = move |t: f64| {
        let u = 1.0 - t;
        let x = a + t / u;
        let jac = 1.0 / (u * u);
        let v = f(x);
        // guard underflow-times-overflow at t -> 1
        if v == 0.0 {
            0.0
        } else {
            v * jac
        }
    };
    run(&g, vec![qk15(&g, 0.0, 1.0)], opts)
}
