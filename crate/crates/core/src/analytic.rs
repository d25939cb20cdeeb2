//! Closed-form ergodic-rate expressions. Each rate is a double
//! Chebyshev–Gauss sum obtained from the defining triple integral by mapping
//! disc distances through `Ω₁(x) = R(x+1)/2` and the decoding-threshold
//! half-line through `Ω₂(x) = 2/(x+1)`, then reducing the fading averages to
//! special functions.
//!
//! Every expression here has an integral counterpart in [`crate::oracle`];
//! the two are developed independently and the test suites hold them
//! together. ERRATA.md records the normalization corrections the oracle
//! comparison forced.
//!
//! Distances passed to the public helper functions are in meters; internally
//! everything is scaled by the path-loss reference distance.

use crate::model::SystemParams;
use crate::specfun::{self, exp_scaled_e1, hyp2f1_pathloss, phi_kernel, QuadratureSpec};
use crate::Result;

use std::f64::consts::LN_2;

/// Maps a Chebyshev node x ∈ (-1,1) to a disc distance in (0, radius).
pub fn node_to_radius(radius: f64, x: f64) -> f64 {
    radius * (x + 1.0) / 2.0
}

/// Maps a Chebyshev node x ∈ (-1,1] to a decoding threshold in [1, ∞).
pub fn node_to_threshold(x: f64) -> f64 {
    2.0 / (x + 1.0)
}

/// The two power ratios shared by all closed forms, with the node maps.
#[derive(Debug, Clone, Copy)]
pub struct HelperBundle {
    /// Θ₁ = λ_GF·P_GF / (λ_GB·P_GB).
    pub theta1: f64,
    /// Θ₂ = σ² / (λ_GB·P_GB).
    pub theta2: f64,
    /// Disc radius in path-loss reference units.
    pub radius: f64,
}

impl HelperBundle {
    pub fn new(params: &SystemParams) -> Self {
        HelperBundle {
            theta1: params.fading_mean_gf * params.p_gf_mw()
                / (params.fading_mean_gb * params.p_gb_mw()),
            theta2: params.noise_mw() / (params.fading_mean_gb * params.p_gb_mw()),
            radius: params.normalized_radius(),
        }
    }

    /// Ω₁ on the normalized disc.
    pub fn omega1(&self, x: f64) -> f64 {
        node_to_radius(self.radius, x)
    }

    /// Ω₂ (threshold map, radius-independent).
    pub fn omega2(&self, x: f64) -> f64 {
        node_to_threshold(x)
    }
}

/// Combined exponential decay rate of the GF fading average,
/// `Ψ(y,z,t) = P_GF·y^{-α}·t / (λ_GB·P_GB·z^{-α}) + 1/λ_GF`.
///
/// `y_m`, `z_m` are the GF/GB distances in meters; the distance ratio makes
/// the value independent of the path-loss reference.
pub fn fading_rate(y_m: f64, z_m: f64, t: f64, params: &SystemParams) -> f64 {
    debug_assert!(y_m > 0.0 && z_m > 0.0 && t >= 0.0);
    let a = params.pathloss_exp;
    params.p_gf_mw() * (y_m / z_m).powf(-a) * t
        / (params.fading_mean_gb * params.p_gb_mw())
        + 1.0 / params.fading_mean_gf
}

/// Coefficients of the partial-fraction split of the below-one threshold
/// integral. `d1` carries a removable pole where the two mean received
/// powers coincide; `d1_singular` flags node pairs close enough to it that
/// the product `d1·Ξ` must be taken by perturbation instead.
#[derive(Debug, Clone, Copy)]
pub struct DeltaCoeffs {
    /// δ₁ = λ_GF·λ_GB·P_GB·z^{-α} / (λ_GB·P_GB·z^{-α} − λ_GF·P_GF·y^{-α}).
    pub d1: f64,
    /// δ₂ = σ²·z^α / (λ_GB·P_GB), z in reference units.
    pub d2: f64,
    /// δ₃ = exp(−σ²·y^α / (λ_GF·P_GF)), y in reference units.
    pub d3: f64,
    /// δ₄ = λ_GB·P_GB·z^{-α} / (λ_GF·P_GF·y^{-α}).
    pub d4: f64,
    /// True when the δ₁ denominator is within 1e-9 of its numerator's scale.
    pub d1_singular: bool,
}

/// Evaluates the δ coefficients at GF distance `y_m` and GB distance `z_m`
/// (meters).
pub fn delta_coeffs(y_m: f64, z_m: f64, params: &SystemParams) -> DeltaCoeffs {
    let a = params.pathloss_exp;
    let yn = y_m / params.pathloss_ref_m;
    let zn = z_m / params.pathloss_ref_m;
    let gb_side = params.fading_mean_gb * params.p_gb_mw() * zn.powf(-a);
    let gf_side = params.fading_mean_gf * params.p_gf_mw() * yn.powf(-a);
    let num = params.fading_mean_gf * gb_side;
    let den = gb_side - gf_side;
    DeltaCoeffs {
        d1: num / den,
        d2: params.noise_mw() * zn.powf(a) / (params.fading_mean_gb * params.p_gb_mw()),
        d3: (-params.noise_mw() * yn.powf(a) / (params.fading_mean_gf * params.p_gf_mw())).exp(),
        d4: gb_side / gf_side,
        d1_singular: den.abs() < 1e-9 * num.abs(),
    }
}

/// The four-kernel combination
/// `Ξ = Φ(1,δ₂) − δ₃·Φ(1,2δ₂) − Φ(δ₄,δ₂) + δ₃·Φ(δ₄,2δ₂)`.
#[derive(Debug, Clone, Copy)]
pub struct PhiMix {
    pub value: f64,
    /// Propagated δ₁ near-singularity flag for the node pair.
    pub d1_singular: bool,
}

/// Evaluates Ξ at the node pair, distances taken through Ω₁.
pub fn phi_mix(node_n: f64, node_m: f64, params: &SystemParams) -> Result<PhiMix> {
    let y = node_to_radius(params.radius_m, node_n);
    let z = node_to_radius(params.radius_m, node_m);
    let d = delta_coeffs(y, z, params);
    Ok(PhiMix { value: xi_of(&d)?, d1_singular: d.d1_singular })
}

fn xi_of(d: &DeltaCoeffs) -> Result<f64> {
    Ok(phi_kernel(1.0, d.d2)? - d.d3 * phi_kernel(1.0, 2.0 * d.d2)?
        - phi_kernel(d.d4, d.d2)?
        + d.d3 * phi_kernel(d.d4, 2.0 * d.d2)?)
}

/// `δ₁·Ξ` at distances in meters, switching to a symmetric two-point
/// perturbation (±1e-6 relative in y) where δ₁'s pole is removable.
fn pole_weighted_mix(y_m: f64, z_m: f64, params: &SystemParams) -> Result<f64> {
    let d = delta_coeffs(y_m, z_m, params);
    if !d.d1_singular {
        return Ok(d.d1 * xi_of(&d)?);
    }
    let eval = |ym: f64| -> Result<f64> {
        let dp = delta_coeffs(ym, z_m, params);
        Ok(dp.d1 * xi_of(&dp)?)
    };
    Ok(0.5 * (eval(y_m * (1.0 + 1e-6))? + eval(y_m * (1.0 - 1e-6))?))
}

/// Which per-node weight factor multiplies the Chebyshev weights.
///
/// `Standard` is `√(1-ε²)`, the factor the Chebyshev–Gauss identity requires
/// when the rule approximates a plain integral. `PlusVariant` is `√(1+ε²)`,
/// kept only so the two conventions can be compared numerically; it does not
/// match the defining integrals (see ERRATA.md).
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum NodeWeighting {
    #[default]
    Standard,
    PlusVariant,
}

impl NodeWeighting {
    #[inline]
    fn factor(self, node: f64) -> f64 {
        match self {
            NodeWeighting::Standard => (1.0 - node * node).sqrt(),
            NodeWeighting::PlusVariant => (1.0 + node * node).sqrt(),
        }
    }
}

/// Normalization of the above-one threshold sum.
///
/// `IntegralConsistent` is `4·R^{α-1}/(ln2·(2+α))`, the constant the
/// defining integral produces. `Literal` is `2·R^{α-1}·α/(α+1)` (no 1/ln2),
/// kept for the comparison recorded in ERRATA.md.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum GbHighNorm {
    #[default]
    IntegralConsistent,
    Literal,
}

/// Evaluation options for the closed-form sums.
#[derive(Debug, Clone, Copy, Default)]
pub struct RateOptions {
    pub weighting: NodeWeighting,
    pub gb_high_norm: GbHighNorm,
}

/// GB-user ergodic-rate share with decoding threshold ≥ 1 (BPCU).
pub fn rate_gb_high(params: &SystemParams, quad: &QuadratureSpec) -> Result<f64> {
    rate_gb_high_with(params, quad, RateOptions::default())
}

pub fn rate_gb_high_with(
    params: &SystemParams,
    quad: &QuadratureSpec,
    opts: RateOptions,
) -> Result<f64> {
    params.validate()?;
    let a = params.pathloss_exp;
    let h = HelperBundle::new(params);
    let radius_pow = h.radius.powf(a);

    let mut sum = 0.0;
    for &(en, wn) in quad.outer() {
        let o1 = h.omega1(en);
        let o1_pow = o1.powf(a);
        let outer = wn * opts.weighting.factor(en) / o1.powf(a - 1.0);
        for &(em, wm) in quad.inner() {
            let o2 = h.omega2(em);
            let hyp = hyp2f1_pathloss(a, -radius_pow / (o1_pow * h.theta1 * o2))?;
            sum += outer * wm * opts.weighting.factor(em) / ((em + 1.0) * (em + 1.0) * h.theta1)
                * (-h.theta2 * o1_pow * o2).exp()
                / (o2 + o2 * o2)
                * hyp;
        }
    }
    let prefactor = match opts.gb_high_norm {
        GbHighNorm::IntegralConsistent => 4.0 * h.radius.powf(a - 1.0) / (LN_2 * (2.0 + a)),
        GbHighNorm::Literal => 2.0 * h.radius.powf(a - 1.0) * a / (a + 1.0),
    };
    Ok(prefactor * sum)
}

/// GB-user ergodic-rate share with decoding threshold in [0, 1) (BPCU);
/// the sum of the two parts returned by [`rate_gb_low_parts`].
pub fn rate_gb_low(params: &SystemParams, quad: &QuadratureSpec) -> Result<f64> {
    let (mix, tail) = rate_gb_low_parts(params, quad)?;
    Ok(mix + tail)
}

/// The two pieces of the below-one threshold share: the Ξ-bearing sum and
/// the admission-tail sum.
pub fn rate_gb_low_parts(params: &SystemParams, quad: &QuadratureSpec) -> Result<(f64, f64)> {
    rate_gb_low_parts_with(params, quad, RateOptions::default())
}

pub fn rate_gb_low_parts_with(
    params: &SystemParams,
    quad: &QuadratureSpec,
    opts: RateOptions,
) -> Result<(f64, f64)> {
    params.validate()?;
    let a = params.pathloss_exp;
    let dref = params.pathloss_ref_m;
    let radius = params.normalized_radius();
    let lambda_gf = params.fading_mean_gf;
    let noise = params.noise_mw();
    let p_gf = params.p_gf_mw();

    let mut mix_sum = 0.0;
    let mut tail_sum = 0.0;
    for &(en, wn) in quad.outer() {
        let y_m = node_to_radius(params.radius_m, en);
        let yn = y_m / dref;
        let tail_exponent = noise * yn.powf(a) / p_gf;
        let outer = wn * opts.weighting.factor(en) * yn;
        for &(em, wm) in quad.inner() {
            let z_m = node_to_radius(params.radius_m, em);
            let zn = z_m / dref;
            let w = outer * wm * opts.weighting.factor(em) * zn;

            mix_sum += w * pole_weighted_mix(y_m, z_m, params)?;

            let psi = fading_rate(y_m, z_m, 1.0, params);
            tail_sum += w * (-psi * tail_exponent).exp() / psi;
        }
    }
    let r2 = radius * radius;
    Ok((mix_sum / (LN_2 * lambda_gf * r2), tail_sum / (lambda_gf * r2)))
}

/// Total GB-user ergodic rate (BPCU): sum of the two threshold regimes.
pub fn rate_gb(params: &SystemParams, quad: &QuadratureSpec) -> Result<f64> {
    Ok(rate_gb_high(params, quad)? + rate_gb_low(params, quad)?)
}

/// GF-user ergodic rate (BPCU), gated on admission and SIC success.
pub fn rate_gf(params: &SystemParams, quad: &QuadratureSpec) -> Result<f64> {
    gf_sum(params, quad, RateOptions::default(), false)
}

pub fn rate_gf_with(
    params: &SystemParams,
    quad: &QuadratureSpec,
    opts: RateOptions,
) -> Result<f64> {
    gf_sum(params, quad, opts, false)
}

/// High-SNR approximation of [`rate_gf`]: the scaled exponential-integral
/// factor `e^x·Ei(-x)` is replaced by `(ln x + C)·(1 - x)`, valid as
/// `x = Ψ·σ²·y^α/P_GF` vanishes.
pub fn rate_gf_approx(params: &SystemParams, quad: &QuadratureSpec) -> Result<f64> {
    gf_sum(params, quad, RateOptions::default(), true)
}

fn gf_sum(
    params: &SystemParams,
    quad: &QuadratureSpec,
    opts: RateOptions,
    approximate: bool,
) -> Result<f64> {
    params.validate()?;
    let a = params.pathloss_exp;
    let dref = params.pathloss_ref_m;
    let radius = params.normalized_radius();
    let noise = params.noise_mw();
    let gth = params.sic_threshold;
    let gb_mean_power = params.fading_mean_gb * params.p_gb_mw();

    let mut sum = 0.0;
    for &(en, wn) in quad.outer() {
        let y_m = node_to_radius(params.radius_m, en);
        let yn = y_m / dref;
        let beta_scale = noise * yn.powf(a) / params.p_gf_mw();
        let outer = wn * opts.weighting.factor(en) * yn;
        for &(em, wm) in quad.inner() {
            let z_m = node_to_radius(params.radius_m, em);
            let zn = z_m / dref;
            let psi = fading_rate(y_m, z_m, gth, params);
            let beta = psi * beta_scale;
            // -e^β·Ei(-β), positive; the asymptotic form swaps in
            // (ln β + C)(1-β) with the sign carried through.
            let core = if approximate {
                -(beta.ln() + specfun::EULER_GAMMA) * (1.0 - beta)
            } else {
                exp_scaled_e1(beta)?
            };
            sum += outer * wm * opts.weighting.factor(em) * zn
                * (-noise * gth * zn.powf(a) / gb_mean_power).exp()
                * core
                / psi;
        }
    }
    Ok(sum / (LN_2 * params.fading_mean_gf * radius * radius))
}
