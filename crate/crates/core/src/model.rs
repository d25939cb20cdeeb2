//! The physical link model: users dropped uniformly on a disc around the
//! base station, Rayleigh fading, the dynamic admission rule (the GF user
//! joins only while its received power at the BS stays below the GB user's),
//! and the resulting SINR pair.
//!
//! Power units: every user-facing power is in dBm, all internal arithmetic
//! is in linear milliwatts. Path gain is `(d/d_ref)^(-α)` with the reference
//! distance `pathloss_ref_m` an explicit parameter; `pathloss_ref_m = 1`
//! recovers a raw `d^(-α)` in meters.

use crate::{Error, Result};

/// dBm to linear milliwatts.
#[inline]
pub fn dbm_to_mw(dbm: f64) -> f64 {
    10f64.powf(dbm / 10.0)
}

/// Physical constants of one scenario.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SystemParams {
    /// Disc radius R_L in meters.
    pub radius_m: f64,
    /// Path-loss exponent α.
    pub pathloss_exp: f64,
    /// Reference distance of the path-loss law, meters.
    pub pathloss_ref_m: f64,
    /// GB transmit power, dBm.
    pub p_gb_dbm: f64,
    /// GF transmit power, dBm.
    pub p_gf_dbm: f64,
    /// Noise power σ², dBm.
    pub noise_dbm: f64,
    /// Rayleigh power-gain mean λ_GB.
    pub fading_mean_gb: f64,
    /// Rayleigh power-gain mean λ_GF.
    pub fading_mean_gf: f64,
    /// SIC decoding threshold on the GB SINR (linear).
    pub sic_threshold: f64,
}

impl Default for SystemParams {
    /// Reference scenario: 600 m disc, α = 2.8, 1 km path-loss reference,
    /// σ² = -90 dBm, unit fading means, SIC threshold 1 (0 dB), transmit
    /// SNRs ρ_GB = 30 dB and ρ_GF = 20 dB.
    fn default() -> Self {
        SystemParams {
            radius_m: 600.0,
            pathloss_exp: 2.8,
            pathloss_ref_m: 1000.0,
            p_gb_dbm: -60.0,
            p_gf_dbm: -70.0,
            noise_dbm: -90.0,
            fading_mean_gb: 1.0,
            fading_mean_gf: 1.0,
            sic_threshold: 1.0,
        }
    }
}

impl SystemParams {
    pub fn validate(&self) -> Result<()> {
        let positive = [
            ("radius_m", self.radius_m),
            ("pathloss_exp", self.pathloss_exp),
            ("pathloss_ref_m", self.pathloss_ref_m),
            ("fading_mean_gb", self.fading_mean_gb),
            ("fading_mean_gf", self.fading_mean_gf),
        ];
        for (name, v) in positive {
            if !(v > 0.0) || !v.is_finite() {
                return Err(Error::InvalidArgument(format!("{name} must be > 0, got {v}")));
            }
        }
        if !(self.sic_threshold >= 0.0) {
            return Err(Error::InvalidArgument(format!(
                "sic_threshold must be >= 0, got {}",
                self.sic_threshold
            )));
        }
        for (name, v) in [
            ("p_gb_dbm", self.p_gb_dbm),
            ("p_gf_dbm", self.p_gf_dbm),
            ("noise_dbm", self.noise_dbm),
        ] {
            if !v.is_finite() {
                return Err(Error::InvalidArgument(format!("{name} must be finite, got {v}")));
            }
        }
        Ok(())
    }

    pub fn p_gb_mw(&self) -> f64 {
        dbm_to_mw(self.p_gb_dbm)
    }

    pub fn p_gf_mw(&self) -> f64 {
        dbm_to_mw(self.p_gf_dbm)
    }

    pub fn noise_mw(&self) -> f64 {
        dbm_to_mw(self.noise_dbm)
    }

    /// Disc radius in units of the path-loss reference distance.
    pub fn normalized_radius(&self) -> f64 {
        self.radius_m / self.pathloss_ref_m
    }

    /// GB transmit SNR ρ_GB = P_GB/σ² in dB.
    pub fn rho_gb_db(&self) -> f64 {
        self.p_gb_dbm - self.noise_dbm
    }

    /// GF transmit SNR ρ_GF = P_GF/σ² in dB.
    pub fn rho_gf_db(&self) -> f64 {
        self.p_gf_dbm - self.noise_dbm
    }

    /// Set the GB power via its transmit SNR relative to the noise floor.
    pub fn with_rho_gb_db(mut self, rho_db: f64) -> Self {
        self.p_gb_dbm = self.noise_dbm + rho_db;
        self
    }

    /// Set the GF power via its transmit SNR relative to the noise floor.
    pub fn with_rho_gf_db(mut self, rho_db: f64) -> Self {
        self.p_gf_dbm = self.noise_dbm + rho_db;
        self
    }
}

/// Parameter fields a sweep may vary, by config/CLI name.
pub const SWEEP_AXES: &[&str] = &[
    "rho_gb_db",
    "rho_gf_db",
    "p_gb_dbm",
    "p_gf_dbm",
    "noise_dbm",
    "radius_m",
    "pathloss_exp",
    "sic_threshold",
];

/// Returns a copy of `params` with the named axis set to `value`.
pub fn with_axis(params: &SystemParams, axis: &str, value: f64) -> Result<SystemParams> {
    let mut p = *params;
    match axis {
        "rho_gb_db" => p.p_gb_dbm = p.noise_dbm + value,
        "rho_gf_db" => p.p_gf_dbm = p.noise_dbm + value,
        "p_gb_dbm" => p.p_gb_dbm = value,
        "p_gf_dbm" => p.p_gf_dbm = value,
        "noise_dbm" => p.noise_dbm = value,
        "radius_m" => p.radius_m = value,
        "pathloss_exp" => p.pathloss_exp = value,
        "sic_threshold" => p.sic_threshold = value,
        other => {
            return Err(Error::InvalidArgument(format!(
                "unknown sweep axis `{other}`; valid axes: {}",
                SWEEP_AXES.join(", ")
            )))
        }
    }
    p.validate()?;
    Ok(p)
}

/// One random realization: two distances and two fading power gains.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ChannelDraw {
    /// GF user distance, meters, in (0, R_L].
    pub d_gf_m: f64,
    /// GB user distance, meters, in (0, R_L].
    pub d_gb_m: f64,
    /// |h_GF|², exponential with mean λ_GF.
    pub h2_gf: f64,
    /// |h_GB|², exponential with mean λ_GB.
    pub h2_gb: f64,
}

/// Per-realization derived quantities.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct LinkOutcome {
    /// GF received power at the BS (linear mW) — the admission-rule left side.
    pub g_gf: f64,
    /// GB received power at the BS (linear mW) — the admission threshold.
    pub g_gb: f64,
    /// Strict comparison g_gf < g_gb.
    pub admitted: bool,
    /// GB SINR: over GF interference plus noise when admitted, over noise
    /// alone otherwise (diagnostic; the rate estimators gate on `admitted`).
    pub gamma_gb: f64,
    /// GF SNR g_gf/σ².
    pub gamma_gf: f64,
    /// admitted ∧ gamma_gb > sic_threshold.
    pub sic_ok: bool,
}

/// Inverse-CDF distance sampler for a uniform drop on the disc
/// (density 2x/R²): returns `radius_m·√u`.
pub fn sample_distance(radius_m: f64, u: f64) -> Result<f64> {
    if !(0.0..=1.0).contains(&u) {
        return Err(Error::InvalidArgument(format!("uniform variate must be in [0,1], got {u}")));
    }
    Ok(radius_m * u.sqrt())
}

/// Exponential fading power gain with the given mean: `-mean·ln(u)`.
pub fn sample_fading(mean: f64, u: f64) -> Result<f64> {
    if !(u > 0.0 && u <= 1.0) {
        return Err(Error::InvalidArgument(format!("uniform variate must be in (0,1], got {u}")));
    }
    Ok(-mean * u.ln())
}

/// Received power `10^(p_dbm/10) · h² · d^(-α)` in linear mW.
///
/// `d` is the propagation distance in units of the path-loss reference
/// distance (pass plain meters for a 1 m reference).
pub fn received_power(p_dbm: f64, h2: f64, d: f64, alpha: f64) -> Result<f64> {
    if !(d > 0.0) {
        return Err(Error::InvalidArgument(format!(
            "distance must be > 0 (path gain diverges), got {d}"
        )));
    }
    if !(h2 > 0.0) || !(alpha > 0.0) {
        return Err(Error::InvalidArgument(format!(
            "h2 and alpha must be > 0, got h2={h2} alpha={alpha}"
        )));
    }
    Ok(dbm_to_mw(p_dbm) * h2 * d.powf(-alpha))
}

/// Applies the admission rule and computes both SINRs for one realization.
pub fn evaluate_link(params: &SystemParams, draw: &ChannelDraw) -> LinkOutcome {
    debug_assert!(draw.d_gf_m > 0.0 && draw.d_gb_m > 0.0);
    let alpha = params.pathloss_exp;
    let dref = params.pathloss_ref_m;
    let noise = params.noise_mw();

    let g_gf = dbm_to_mw(params.p_gf_dbm) * draw.h2_gf * (draw.d_gf_m / dref).powf(-alpha);
    let g_gb = dbm_to_mw(params.p_gb_dbm) * draw.h2_gb * (draw.d_gb_m / dref).powf(-alpha);

    let admitted = g_gf < g_gb;
    let gamma_gb = if admitted { g_gb / (g_gf + noise) } else { g_gb / noise };
    let gamma_gf = g_gf / noise;
    let sic_ok = admitted && gamma_gb > params.sic_threshold;

    LinkOutcome { g_gf, g_gb, admitted, gamma_gb, gamma_gf, sic_ok }
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::{assert_abs_diff_eq, assert_relative_eq};
    use proptest::prelude::*;
    use rand::{Rng, SeedableRng};

    #[test]
    fn distance_inverse_cdf_endpoints() {
        assert_eq!(sample_distance(600.0, 0.0).unwrap(), 0.0);
        assert_eq!(sample_distance(600.0, 1.0).unwrap(), 600.0);
        assert!(sample_distance(600.0, -0.1).is_err());
        assert!(sample_distance(600.0, 1.1).is_err());
    }

    #[test]
    fn distance_empirical_mean_is_two_thirds_radius() {
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(1);
        let n = 1_000_000usize;
        let mut sum = 0.0;
        let mut sumsq = 0.0;
        for _ in 0..n {
            let d = sample_distance(600.0, rng.gen::<f64>()).unwrap();
            sum += d;
            sumsq += d * d;
        }
        let mean = sum / n as f64;
        let var = sumsq / n as f64 - mean * mean;
        let stderr = (var / n as f64).sqrt();
        assert!((mean - 400.0).abs() < 3.0 * stderr, "mean {mean}, stderr {stderr}");
    }

    #[test]
    fn fading_inverse_cdf_points() {
        assert_eq!(sample_fading(1.0, 1.0).unwrap(), 0.0);
        assert_relative_eq!(
            sample_fading(1.0, (-1.0f64).exp()).unwrap(),
            1.0,
            max_relative = 1e-12
        );
        assert!(sample_fading(1.0, 0.0).is_err());
    }

    #[test]
    fn fading_empirical_mean_matches() {
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(2);
        let n = 1_000_000usize;
        let mut sum = 0.0;
        let mut sumsq = 0.0;
        for _ in 0..n {
            let h = sample_fading(1.0, 1.0 - rng.gen::<f64>()).unwrap();
            sum += h;
            sumsq += h * h;
        }
        let mean = sum / n as f64;
        let var = sumsq / n as f64 - mean * mean;
        let stderr = (var / n as f64).sqrt();
        assert!((mean - 1.0).abs() < 3.0 * stderr, "mean {mean}, stderr {stderr}");
    }

    #[test]
    fn received_power_unit_cases() {
        assert_relative_eq!(received_power(0.0, 1.0, 1.0, 2.8).unwrap(), 1.0);
        assert_relative_eq!(received_power(0.0, 1.0, 10.0, 2.0).unwrap(), 0.01, max_relative = 1e-12);
        assert_relative_eq!(
            received_power(20.0, 0.5, 100.0, 2.8).unwrap(),
            100.0 * 0.5 * 100f64.powf(-2.8),
            max_relative = 1e-12
        );
        assert!(received_power(0.0, 1.0, 0.0, 2.8).is_err());
    }

    #[test]
    fn admission_boundary_is_strict() {
        // Equal received powers must not admit.
        let params = SystemParams {
            p_gb_dbm: 0.0,
            p_gf_dbm: 0.0,
            noise_dbm: 0.0,
            pathloss_ref_m: 1.0,
            radius_m: 10.0,
            ..Default::default()
        };
        let draw = ChannelDraw { d_gf_m: 2.0, d_gb_m: 2.0, h2_gf: 1.0, h2_gb: 1.0 };
        let out = evaluate_link(&params, &draw);
        assert_eq!(out.g_gf, out.g_gb);
        assert!(!out.admitted);
        assert!(!out.sic_ok);
    }

    #[test]
    fn sinr_direct_substitution() {
        // σ² = 1 mW (0 dBm), g_gb = 3, g_gf = 1.
        let params = SystemParams {
            radius_m: 10.0,
            pathloss_exp: 2.0,
            pathloss_ref_m: 1.0,
            p_gb_dbm: 10.0 * 3f64.log10(), // 3 mW at d=1, h2=1
            p_gf_dbm: 0.0,                 // 1 mW
            noise_dbm: 0.0,                // 1 mW
            fading_mean_gb: 1.0,
            fading_mean_gf: 1.0,
            sic_threshold: 1.0,
        };
        let draw = ChannelDraw { d_gf_m: 1.0, d_gb_m: 1.0, h2_gf: 1.0, h2_gb: 1.0 };
        let out = evaluate_link(&params, &draw);
        assert!(out.admitted);
        assert_relative_eq!(out.gamma_gb, 1.5, max_relative = 1e-12);
        assert_relative_eq!(out.gamma_gf, 1.0, max_relative = 1e-12);
        assert!(out.sic_ok); // 1.5 > 1
    }

    #[test]
    fn unknown_axis_lists_valid_names() {
        let err = with_axis(&SystemParams::default(), "bogus", 1.0).unwrap_err();
        let msg = err.to_string();
        assert!(msg.contains("bogus"));
        for axis in SWEEP_AXES {
            assert!(msg.contains(axis), "error should list `{axis}`: {msg}");
        }
    }

    #[test]
    fn rho_axes_set_power_relative_to_noise() {
        let p = with_axis(&SystemParams::default(), "rho_gb_db", 25.0).unwrap();
        assert_eq!(p.p_gb_dbm, p.noise_dbm + 25.0);
        assert_eq!(p.rho_gb_db(), 25.0);
    }

    fn arbitrary_draw() -> impl Strategy<Value = ChannelDraw> {
        (1e-3f64..600.0, 1e-3f64..600.0, 1e-6f64..50.0, 1e-6f64..50.0).prop_map(
            |(d_gf_m, d_gb_m, h2_gf, h2_gb)| ChannelDraw { d_gf_m, d_gb_m, h2_gf, h2_gb },
        )
    }

    proptest! {
        #[test]
        fn gamma_recomputation(draw in arbitrary_draw()) {
            let params = SystemParams::default();
            let out = evaluate_link(&params, &draw);
            // independent recomputation straight from the raw fields
            let a = params.pathloss_exp;
            let g_gf = dbm_to_mw(params.p_gf_dbm) * draw.h2_gf
                / (draw.d_gf_m / params.pathloss_ref_m).powf(a);
            let g_gb = dbm_to_mw(params.p_gb_dbm) * draw.h2_gb
                / (draw.d_gb_m / params.pathloss_ref_m).powf(a);
            let n = params.noise_mw();
            prop_assert!((out.gamma_gf - g_gf / n).abs() <= 1e-12 * out.gamma_gf.abs());
            let expect_gb = if g_gf < g_gb { g_gb / (g_gf + n) } else { g_gb / n };
            prop_assert!((out.gamma_gb - expect_gb).abs() <= 1e-12 * out.gamma_gb.abs());
            prop_assert_eq!(out.admitted, g_gf < g_gb);
            prop_assert_eq!(out.sic_ok, out.admitted && out.gamma_gb > params.sic_threshold);
        }

        #[test]
        fn admission_scale_invariant(draw in arbitrary_draw(), shift_db in -40.0f64..40.0) {
            let p1 = SystemParams::default();
            let mut p2 = p1;
            p2.p_gb_dbm += shift_db;
            p2.p_gf_dbm += shift_db;
            prop_assert_eq!(
                evaluate_link(&p1, &draw).admitted,
                evaluate_link(&p2, &draw).admitted
            );
        }

        #[test]
        fn admission_monotone_in_fading(draw in arbitrary_draw(), factor in 1.0f64..100.0) {
            let params = SystemParams::default();
            let base = evaluate_link(&params, &draw);
            // stronger GF fading can only lose admission
            let mut d = draw;
            d.h2_gf *= factor;
            let bumped_gf = evaluate_link(&params, &d);
            prop_assert!(!(bumped_gf.admitted && !base.admitted) || factor == 1.0);
            // stronger GB fading can only gain admission
            let mut d = draw;
            d.h2_gb *= factor;
            let bumped_gb = evaluate_link(&params, &d);
            prop_assert!(!(base.admitted && !bumped_gb.admitted));
        }

        #[test]
        fn gamma_gb_decreases_with_interference(draw in arbitrary_draw(), factor in 1.001f64..10.0) {
            let params = SystemParams::default();
            let base = evaluate_link(&params, &draw);
            let mut d = draw;
            d.h2_gf *= factor;
            let bumped = evaluate_link(&params, &d);
            if base.admitted && bumped.admitted {
                prop_assert!(bumped.gamma_gb < base.gamma_gb);
            }
            // gamma_gf never depends on the GB side
            let mut d2 = draw;
            d2.h2_gb *= factor;
            let other = evaluate_link(&params, &d2);
            prop_assert_eq!(other.gamma_gf, base.gamma_gf);
        }
    }

    #[test]
    fn symmetric_parameters_admit_half_the_time() {
        let params = SystemParams { p_gb_dbm: -70.0, p_gf_dbm: -70.0, ..Default::default() };
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(3);
        let n = 1_000_000usize;
        let mut admitted = 0usize;
        for _ in 0..n {
            let draw = ChannelDraw {
                d_gf_m: sample_distance(params.radius_m, 1.0 - rng.gen::<f64>()).unwrap(),
                d_gb_m: sample_distance(params.radius_m, 1.0 - rng.gen::<f64>()).unwrap(),
                h2_gf: sample_fading(params.fading_mean_gf, 1.0 - rng.gen::<f64>()).unwrap(),
                h2_gb: sample_fading(params.fading_mean_gb, 1.0 - rng.gen::<f64>()).unwrap(),
            };
            if evaluate_link(&params, &draw).admitted {
                admitted += 1;
            }
        }
        let p = admitted as f64 / n as f64;
        let stderr = (0.25 / n as f64).sqrt();
        assert!((p - 0.5).abs() < 3.0 * stderr, "admit prob {p}");
    }

    #[test]
    fn default_params_validate() {
        SystemParams::default().validate().unwrap();
        let mut bad = SystemParams::default();
        bad.pathloss_exp = -1.0;
        assert!(bad.validate().is_err());
    }

    #[test]
    fn linear_conversions_positive() {
        let p = SystemParams::default();
        assert!(p.p_gb_mw() > 0.0 && p.p_gf_mw() > 0.0 && p.noise_mw() > 0.0);
        assert_abs_diff_eq!(p.noise_mw(), 1e-9, epsilon = 1e-24); // -90 dBm
        assert_eq!(p.rho_gb_db(), 30.0);
        assert_eq!(p.rho_gf_db(), 20.0);
    }
}
