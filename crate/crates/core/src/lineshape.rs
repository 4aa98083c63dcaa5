//! Lorentzian line shape, spectral response and their ensemble averages.
//!
//! Averages are taken over detunings on `[0, inf)` weighted by the Lorentzian
//! `G(d) = (2 tau*/pi) / (1 + d^2 tau*^2)`, which integrates to one on that
//! half line. Closed forms are provided alongside an adaptive-quadrature
//! evaluation of the same integrals.

use std::f64::consts::PI;

use crate::error::{Result, SitError};
use crate::quadrature;

/// Below this distance from `y = 1` the closed form switches to its series.
pub const Y_SINGULARITY_BAND: f64 = 1e-6;

/// Relative tolerance of the quadrature oracle.
pub const QUADRATURE_REL_TOL: f64 = 1e-10;

const QUADRATURE_MAX_INTERVALS: usize = 4000;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct LineshapeAverages {
    /// `<F>`
    pub avg_f: f64,
    /// `<d F>`
    pub avg_delta_f: f64,
    /// Effective detuning `<d F> / <F>`.
    pub delta_tilde: f64,
}

impl LineshapeAverages {
    fn from_pair(avg_f: f64, delta_tilde: f64) -> Self {
        LineshapeAverages {
            avg_f,
            avg_delta_f: delta_tilde * avg_f,
            delta_tilde,
        }
    }
}

fn positive(name: &'static str, v: f64) -> Result<()> {
    if v.is_finite() && v > 0.0 {
        Ok(())
    } else {
        Err(SitError::invalid(name, format!("must be positive, got {v}")))
    }
}

/// Lorentzian line-shape density at detuning `delta`.
pub fn lorentzian_g(delta: f64, tau_star: f64) -> Result<f64> {
    positive("tau_star", tau_star)?;
    Ok(lorentzian_unchecked(delta, tau_star))
}

#[inline]
pub(crate) fn lorentzian_unchecked(delta: f64, tau_star: f64) -> f64 {
    (2.0 * tau_star / PI) / (1.0 + delta * delta * tau_star * tau_star)
}

/// Spectral response `F(d) = 1 / (1 + d^2 tau_p^2)`.
pub fn spectral_response_f(delta: f64, tau_p: f64) -> Result<f64> {
    positive("tau_p", tau_p)?;
    Ok(response_unchecked(delta, tau_p))
}

#[inline]
pub(crate) fn response_unchecked(delta: f64, tau_p: f64) -> f64 {
    1.0 / (1.0 + delta * delta * tau_p * tau_p)
}

/// `ln(1/y) / (1 - y)`, continuous through `y = 1`.
pub(crate) fn log_ratio(y: f64) -> f64 {
    let e = 1.0 - y;
    if e.abs() < Y_SINGULARITY_BAND {
        // -ln(1 - e)/e = 1 + e/2 + e^2/3 + ...
        1.0 + e / 2.0 + e * e / 3.0
    } else {
        -(-e).ln_1p() / e
    }
}

/// Closed-form averages for the Lorentzian line.
///
/// `<F> = 1/(1+y)` and `d~ = (2/(pi tau*)) ln(tau*/tau_p) / (1-y)` with
/// `y = tau_p/tau*`; `<d F>` follows as their product.
pub fn averages_analytic(tau_p: f64, tau_star: f64) -> Result<LineshapeAverages> {
    positive("tau_p", tau_p)?;
    positive("tau_star", tau_star)?;
    let y = tau_p / tau_star;
    let avg_f = 1.0 / (1.0 + y);
    let delta_tilde = 2.0 / (PI * tau_star) * log_ratio(y);
    Ok(LineshapeAverages::from_pair(avg_f, delta_tilde))
}

/// `∫_0^inf g(d) G(d) dd` by adaptive quadrature after mapping the half line
/// onto `[0, 1)` with `u = d tau* / (1 + d tau*)`.
pub fn average_quadrature<F: Fn(f64) -> f64>(tau_star: f64, g: F) -> Result<quadrature::Integral> {
    positive("tau_star", tau_star)?;
    // G(d) dd = (2/pi) du / ((1-u)^2 + u^2) under this map.
    let integrand = |u: f64| {
        let w = 1.0 - u;
        let delta = u / (tau_star * w);
        (2.0 / PI) / (w * w + u * u) * g(delta)
    };
    quadrature::integrate(integrand, 0.0, 1.0, QUADRATURE_REL_TOL, 1e-300, QUADRATURE_MAX_INTERVALS)
}

/// Averages by quadrature; the independent check on [`averages_analytic`].
pub fn averages_quadrature(tau_p: f64, tau_star: f64) -> Result<LineshapeAverages> {
    positive("tau_p", tau_p)?;
    let avg_f = average_quadrature(tau_star, |d| response_unchecked(d, tau_p))?.value;
    let avg_delta_f = average_quadrature(tau_star, |d| d * response_unchecked(d, tau_p))?.value;
    Ok(LineshapeAverages {
        avg_f,
        avg_delta_f,
        delta_tilde: avg_delta_f / avg_f,
    })
}

/// Sharp-line limit: the line shape collapses onto the single detuning
/// `d = 1 - x`, so averages are point values.
pub fn sharp_line_averages(x: f64, tau_p: f64) -> Result<LineshapeAverages> {
    positive("tau_p", tau_p)?;
    let delta = 1.0 - x;
    Ok(LineshapeAverages::from_pair(response_unchecked(delta, tau_p), delta))
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn rel(a: f64, b: f64) -> f64 {
        ((a - b) / b).abs()
    }

    #[test]
    fn lorentzian_peak_and_half_width() {
        let peak = lorentzian_g(0.0, 1.0).unwrap();
        assert!((peak - 2.0 / PI).abs() < 1e-15);
        assert!((peak - std::f64::consts::FRAC_2_PI).abs() < 1e-15);
        for t in [0.3, 1.0, 7.0] {
            let half = lorentzian_g(1.0 / t, t).unwrap();
            assert!((half - 0.5 * lorentzian_g(0.0, t).unwrap()).abs() < 1e-15);
        }
        assert!(lorentzian_g(0.0, 0.0).is_err());
    }

    #[test]
    fn lorentzian_normalized_on_half_line() {
        for t in [0.1, 1.0, 25.0] {
            let r = average_quadrature(t, |_| 1.0).unwrap();
            assert!((r.value - 1.0).abs() < 1e-8, "tau*={t}: {}", r.value);
        }
    }

    #[test]
    fn spectral_response_values() {
        assert_eq!(spectral_response_f(0.0, 2.0).unwrap(), 1.0);
        assert!((spectral_response_f(0.5, 2.0).unwrap() - 0.5).abs() < 1e-15);
        assert!((spectral_response_f(3.0, 1.0).unwrap() - 0.1).abs() < 1e-15);
        assert!(spectral_response_f(1.0, 0.0).is_err());
    }

    #[test]
    fn analytic_at_y_one() {
        let a = averages_analytic(1.0, 1.0).unwrap();
        assert_eq!(a.avg_f, 0.5);
        assert!((a.delta_tilde - 2.0 / PI).abs() < 1e-15);
        let q = averages_quadrature(1.0, 1.0).unwrap();
        assert!(rel(q.avg_f, 0.5) < 1e-9);
        assert!(rel(q.delta_tilde, 2.0 / PI) < 1e-8);
    }

    #[test]
    fn frozen_quadrature_values() {
        let q = averages_quadrature(0.5, 1.0).unwrap();
        assert!((q.avg_f - 2.0 / 3.0).abs() < 1e-8);
        assert!((q.avg_f - 0.666667).abs() < 1e-6);
        let q = averages_quadrature(2.0, 1.0).unwrap();
        assert!((q.avg_f - 1.0 / 3.0).abs() < 1e-8);
        let a = averages_analytic(0.5, 1.0).unwrap();
        assert!((a.avg_f - 2.0 / 3.0).abs() < 1e-15);
    }

    #[test]
    fn small_y_limit() {
        let a = averages_analytic(1e-9, 1.0).unwrap();
        assert!((a.avg_f - 1.0).abs() < 1e-8);
    }

    #[test]
    fn continuity_through_singularity() {
        let at = averages_analytic(3.0, 3.0).unwrap();
        for y in [1.0 - 1e-8, 1.0 + 1e-8] {
            let a = averages_analytic(y * 3.0, 3.0).unwrap();
            assert!(rel(a.delta_tilde, at.delta_tilde) <= 1e-6, "y={y}");
            assert!(rel(a.avg_delta_f, at.avg_delta_f) <= 1e-6, "y={y}");
        }
        // no jump where the series hands over to the direct formula
        for side in [-1.0, 1.0] {
            let inside = log_ratio(1.0 + side * Y_SINGULARITY_BAND * (1.0 - 1e-6));
            let outside = log_ratio(1.0 + side * Y_SINGULARITY_BAND * (1.0 + 1e-6));
            assert!((inside - outside).abs() < 1e-11, "{inside} {outside}");
        }
    }

    #[test]
    fn sharp_line_values() {
        let a = sharp_line_averages(1.0, 3.0).unwrap();
        assert_eq!((a.avg_f, a.delta_tilde, a.avg_delta_f), (1.0, 0.0, 0.0));
        let a = sharp_line_averages(0.0, 1.0).unwrap();
        assert_eq!((a.avg_f, a.delta_tilde), (0.5, 1.0));
        let a = sharp_line_averages(2.0, 1.0).unwrap();
        assert_eq!((a.avg_f, a.delta_tilde, a.avg_delta_f), (0.5, -1.0, -0.5));
    }

    #[test]
    fn narrow_line_approaches_sharp_resonance() {
        let q = averages_quadrature(1.0, 1e6).unwrap();
        let s = sharp_line_averages(1.0, 1.0).unwrap();
        assert!((q.avg_f - s.avg_f).abs() < 1e-4);
        assert!((q.delta_tilde - s.delta_tilde).abs() < 1e-4);
    }

    proptest! {
        #![proptest_config(ProptestConfig::with_cases(64))]

        #[test]
        fn quadrature_matches_closed_form(log_y in -2.0f64..2.0, tau_star in 0.2f64..20.0) {
            let y = 10f64.powf(log_y);
            let a = averages_analytic(y * tau_star, tau_star).unwrap();
            let q = averages_quadrature(y * tau_star, tau_star).unwrap();
            prop_assert!(rel(q.avg_f, a.avg_f) <= 1e-7);
            prop_assert!(rel(q.avg_delta_f, a.avg_delta_f) <= 1e-7);
        }

        #[test]
        fn avg_f_decreasing_in_y(y1 in 0.001f64..100.0, y2 in 0.001f64..100.0) {
            prop_assume!(y1 < y2);
            let a1 = averages_analytic(y1, 1.0).unwrap();
            let a2 = averages_analytic(y2, 1.0).unwrap();
            prop_assert!(a1.avg_f > a2.avg_f);
            prop_assert!(a2.avg_f > 0.0 && a1.avg_f < 1.0);
            prop_assert_eq!(a1.delta_tilde * a1.avg_f, a1.avg_delta_f);
        }
    }
}
