//! Special functions and quadrature primitives behind the closed-form rate
//! expressions: Chebyshev–Gauss nodes/weights, the Gauss hypergeometric
//! function on the single parameter ray the rate analysis needs, the
//! exponential integral Ei, and the finite-interval kernel
//! `phi_kernel(a,b) = ∫₀¹ exp(-bt)/(t+a) dt`.

use crate::{Error, Result};

mod dd;
use dd::{dd_ln, Dd, EULER};

/// Euler–Mascheroni constant.
pub const EULER_GAMMA: f64 = 0.577_215_664_901_532_9;

/// Everything below this magnitude switches the exponential integral from
/// the double-double power series to the continued fraction.
const EI_SWITCH: f64 = 10.0;

/// Chebyshev–Gauss node/weight pairs of the given order.
///
/// Node k is `cos((2k-1)π/(2·order))` with weight `π/order`, k = 1..order;
/// nodes are strictly decreasing and symmetric about zero. The rule computes
/// `∫₋₁¹ f(x)/√(1-x²) dx ≈ Σ ωₖ f(εₖ)`; to approximate a plain integral,
/// multiply each sample by `√(1-εₖ²)`.
pub fn chebyshev_nodes(order: usize) -> Result<Vec<(f64, f64)>> {
    if order == 0 {
        return Err(Error::InvalidArgument("quadrature order must be >= 1".into()));
    }
    let weight = std::f64::consts::PI / order as f64;
    Ok((1..=order)
        .map(|k| {
            let angle = (2 * k - 1) as f64 * std::f64::consts::PI / (2 * order) as f64;
            (angle.cos(), weight)
        })
        .collect())
}

/// Chebyshev–Gauss orders for the double sums, with the derived node tables.
///
/// `n_outer` (N) indexes the first summation variable and `n_inner` (M) the
/// second. Node tables are immutable after construction.
#[derive(Debug, Clone)]
pub struct QuadratureSpec {
    n_outer: usize,
    n_inner: usize,
    outer: Vec<(f64, f64)>,
    inner: Vec<(f64, f64)>,
}

impl QuadratureSpec {
    pub fn new(n_outer: usize, n_inner: usize) -> Result<Self> {
        Ok(QuadratureSpec {
            n_outer,
            n_inner,
            outer: chebyshev_nodes(n_outer)?,
            inner: chebyshev_nodes(n_inner)?,
        })
    }

    pub fn n_outer(&self) -> usize {
        self.n_outer
    }

    pub fn n_inner(&self) -> usize {
        self.n_inner
    }

    /// Node/weight pairs for the outer sum (the paper-side order N).
    pub fn outer(&self) -> &[(f64, f64)] {
        &self.outer
    }

    /// Node/weight pairs for the inner sum (order M).
    pub fn inner(&self) -> &[(f64, f64)] {
        &self.inner
    }
}

// ---------------------------------------------------------------------------
// Gauss hypergeometric function on the rate-analysis ray
// ---------------------------------------------------------------------------

/// ₂F₁(1, (2+α)/α; 2+2/α; z) for `alpha > 0` and `z <= 0`.
///
/// This is the exact parameter pattern produced by averaging the admission
/// rule over the disc (the path-loss exponent fixes all three parameters).
/// Only the non-positive-argument ray is supported; positive arguments are
/// refused rather than extrapolated.
pub fn hyp2f1_pathloss(alpha: f64, z: f64) -> Result<f64> {
    if !(alpha > 0.0) {
        return Err(Error::InvalidArgument(format!("alpha must be > 0, got {alpha}")));
    }
    if z > 0.0 {
        return Err(Error::OutOfDomain(format!("hyp2f1_pathloss requires z <= 0, got {z}")));
    }
    if z == 0.0 {
        return Ok(1.0);
    }
    if z >= -10.0 {
        return Ok(pfaff_series(alpha, z));
    }
    let r = 2.0 / alpha;
    if (r - r.round()).abs() < 1e-9 {
        // The reflection coefficients degenerate at integer r; use the exact
        // closed form for r = 1 (alpha = 2) and direct quadrature otherwise.
        if (r - 1.0).abs() < 1e-9 {
            return Ok(2.0 * (-(-z).ln_1p() - z) / (z * z));
        }
        return Ok(euler_integral(alpha, z));
    }
    Ok(reflection(r, z))
}

/// Pfaff transform: F = ₂F₁(1, 1; 2+2/α; w) / (1-z) with w = z/(z-1) ∈ [0,1).
/// All series terms are positive, so there is no cancellation.
fn pfaff_series(alpha: f64, z: f64) -> f64 {
    let c = 2.0 + 2.0 / alpha;
    let w = z / (z - 1.0);
    let mut term = 1.0;
    let mut sum = 1.0;
    for k in 0..20_000 {
        term *= (k + 1) as f64 * w / (c + k as f64);
        sum += term;
        if term < 1e-17 * sum {
            break;
        }
    }
    sum / (1.0 - z)
}

/// Large-|z| reflection (z -> 1/z connection). With a = 1, b = 1+r, c = 2+r
/// the second series terminates (b-c+1 = 0) and the first telescopes to
/// ₂F₁(1,-r;1-r;v) = Σₖ (-r/(k-r)) vᵏ, v = 1/z.
fn reflection(r: f64, z: f64) -> f64 {
    let v = 1.0 / z;
    let mut s = 1.0;
    let mut vk = 1.0;
    for k in 1..80 {
        vk *= v;
        s -= r * vk / (k as f64 - r);
        if vk.abs() < 1e-22 {
            break;
        }
    }
    let t1 = (1.0 + r) / r / (-z) * s;
    let t2 = (1.0 + r) * std::f64::consts::PI / (std::f64::consts::PI * r).sin()
        * (-z).powf(-(1.0 + r));
    t1 - t2
}

/// Fallback for integer 2/α at large |z|: the Euler integral with the
/// endpoint algebra smoothed by x = s^α, so
/// F = (2+α) ∫₀¹ s^{α+1} / (1 - z s^α) ds.
fn euler_integral(alpha: f64, z: f64) -> f64 {
    let f = |s: f64| s.powf(alpha + 1.0) / (1.0 - z * s.powf(alpha));
    (2.0 + alpha) * adaptive_simpson(&f, 0.0, 1.0, 1e-13, 40)
}

pub(crate) fn adaptive_simpson(f: &impl Fn(f64) -> f64, a: f64, b: f64, tol: f64, depth: u32) -> f64 {
    fn simpson(f: &impl Fn(f64) -> f64, a: f64, fa: f64, b: f64, fb: f64) -> (f64, f64, f64) {
        let m = 0.5 * (a + b);
        let fm = f(m);
        (m, fm, (b - a) / 6.0 * (fa + 4.0 * fm + fb))
    }
    fn rec(
        f: &impl Fn(f64) -> f64,
        a: f64,
        fa: f64,
        b: f64,
        fb: f64,
        m: f64,
        fm: f64,
        whole: f64,
        tol: f64,
        depth: u32,
    ) -> f64 {
        let (lm, flm, left) = simpson(f, a, fa, m, fm);
        let (rm, frm, right) = simpson(f, m, fm, b, fb);
        let delta = left + right - whole;
        if depth == 0 || delta.abs() <= 15.0 * tol {
            left + right + delta / 15.0
        } else {
            rec(f, a, fa, m, fm, lm, flm, left, 0.5 * tol, depth - 1)
                + rec(f, m, fm, b, fb, rm, frm, right, 0.5 * tol, depth - 1)
        }
    }
    let fa = f(a);
    let fb = f(b);
    let (m, fm, whole) = simpson(f, a, fa, b, fb);
    rec(f, a, fa, b, fb, m, fm, whole, tol, depth)
}

// ---------------------------------------------------------------------------
// Exponential integral
// ---------------------------------------------------------------------------

/// Exponential integral Ei(x) for `x < 0`.
///
/// Power series `γ + ln|x| + Σ xⁿ/(n·n!)` below |x| = 10 (summed in
/// double-double arithmetic; the cancellation between the log and the series
/// grows like e^|x| and would otherwise destroy the branch), continued
/// fraction above. Always negative on the supported domain.
pub fn exp_integral_ei(x: f64) -> Result<f64> {
    if !(x < 0.0) {
        return Err(Error::OutOfDomain(format!(
            "exp_integral_ei requires x < 0 (diverges at 0), got {x}"
        )));
    }
    let v = -x;
    if v < EI_SWITCH {
        Ok(ei_series(x))
    } else {
        // Ei(x) = -E1(v) = -e^{-v} · [e^v E1(v)]
        Ok(-(-v).exp() * e1_scaled_cf(v))
    }
}

/// e^x · E₁(x) for `x > 0`, overflow-safe for arbitrarily large x.
///
/// This is the fused form the rate expressions need: they multiply Ei(-x) by
/// e^{+x}, which overflows past x ≈ 709 if done naively.
pub fn exp_scaled_e1(x: f64) -> Result<f64> {
    if !(x > 0.0) {
        return Err(Error::OutOfDomain(format!("exp_scaled_e1 requires x > 0, got {x}")));
    }
    if x < EI_SWITCH {
        Ok(x.exp() * -ei_series(-x))
    } else {
        Ok(e1_scaled_cf(x))
    }
}

/// Convergent series, double-double accumulation. `x < 0`.
fn ei_series(x: f64) -> f64 {
    let mut acc = EULER.add(dd_ln(-x));
    let mut term = Dd::from_f64(1.0); // x^n / n!
    let mut past_peak_small = 0;
    for n in 1..500 {
        term = term.mul_f64(x).div_f64(n as f64);
        acc = acc.add(term.div_f64(n as f64));
        if term.hi.abs() < 1e-34 * acc.hi.abs().max(1e-300) {
            past_peak_small += 1;
            if past_peak_small > 2 {
                break;
            }
        }
    }
    acc.value()
}

/// Modified-Lentz evaluation of the continued fraction for e^x E₁(x):
/// `1/(x+1 - 1²/(x+3 - 2²/(x+5 - ...)))`.
fn e1_scaled_cf(x: f64) -> f64 {
    let mut b = x + 1.0;
    let mut c = 1e308;
    let mut d = 1.0 / b;
    let mut h = d;
    for i in 1..500u32 {
        let a = -((i * i) as f64);
        b += 2.0;
        d = 1.0 / (a * d + b);
        c = b + a / c;
        let del = c * d;
        h *= del;
        if (del - 1.0).abs() < 1e-16 {
            break;
        }
    }
    h
}

// ---------------------------------------------------------------------------
// Finite-interval exponential kernel
// ---------------------------------------------------------------------------

/// `phi_kernel(a, b) = ∫₀¹ exp(-bt)/(t+a) dt` for `a > 0`, `b >= 0`.
///
/// Evaluated as `e^{ab}·(E₁(ab) - E₁((1+a)b))`, with each factor in scaled
/// form so large `ab` neither overflows nor cancels. At `b = 0` the integral
/// is `ln((1+a)/a)` directly.
pub fn phi_kernel(a: f64, b: f64) -> Result<f64> {
    if !(a > 0.0) {
        return Err(Error::InvalidArgument(format!(
            "phi_kernel requires a > 0 (singularity inside [0,1]), got {a}"
        )));
    }
    if !(b >= 0.0) {
        return Err(Error::InvalidArgument(format!("phi_kernel requires b >= 0, got {b}")));
    }
    if b == 0.0 {
        return Ok((1.0 / a).ln_1p());
    }
    // e^{ab}E1(ab) - e^{-b}·e^{(1+a)b}E1((1+a)b)
    Ok(exp_scaled_e1(a * b)? - (-b).exp() * exp_scaled_e1((1.0 + a) * b)?)
}
