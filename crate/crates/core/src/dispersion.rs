//! Dispersion law `K(x)` and velocity delay `V` of the 2π soliton.
//!
//! Requiring a stationary carrier phase fixes the wave vector through
//! `d~ = G / Gamma`, with `Gamma = 1 - K/(xV)` and `G = (x^2 - K^2)/(2x)`.
//! Eliminating `Gamma` with the soliton amplitude gives, in internal units,
//!
//! ```text
//! K^2 = x^2 - 2 d~ nu S0 <F> tau0^2
//! V   = K / (x - nu S0 <F> tau0^2)
//! ```
//!
//! The sharp line uses `d~ = 1 - x`, `<F> = F(1 - x)`; the Lorentzian line
//! uses the closed-form averages from [`crate::lineshape`].
//!
//! Nonexistence (negative `K^2`, a velocity pole, or a backward velocity) is
//! reported as an error value or recorded on [`DispersionSolution`], never as
//! a NaN.

use std::f64::consts::PI;

use crate::error::{Result, SitError};
use crate::lineshape::{self, LineshapeAverages};
use crate::params::{validate, LineShape, MediumParams, PulseParams};
use crate::roots::{self, SCAN_POINTS};

/// Upper end of the `x` interval scanned for roots and thresholds.
pub const SCAN_X_MAX: f64 = 5.0;
/// Bisection tolerance in `x` for scanned roots.
pub const ROOT_TOL: f64 = 1e-10;
/// Golden-section tolerance in `x` for the critical-width minimum.
pub const MIN_TOL: f64 = 1e-8;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Regime {
    Subluminal,
    /// Exactly `V = 1`, e.g. the uncoupled medium.
    Luminal,
    Superluminal,
}

impl Regime {
    pub fn of(v: f64) -> Regime {
        if v < 1.0 {
            Regime::Subluminal
        } else if v > 1.0 {
            Regime::Superluminal
        } else {
            Regime::Luminal
        }
    }

    pub fn as_str(&self) -> &'static str {
        match self {
            Regime::Subluminal => "subluminal",
            Regime::Luminal => "luminal",
            Regime::Superluminal => "superluminal",
        }
    }
}

/// Which expression to use for the broadened dispersion law.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum BroadenedForm {
    /// Closed-form Lorentzian averages substituted into the general law.
    #[default]
    Canonical,
    /// `x^2 + (4 S0 nu w0t*/pi) y^4 ln y/(y^2-1)`, the `y^4` variant, kept so
    /// curves drawn from it can be reproduced.
    Quartic,
}

/// Dispersion law evaluated at one (medium, pulse) pair.
#[derive(Debug, Clone, PartialEq)]
pub struct DispersionSolution {
    pub x: f64,
    pub tau0: f64,
    pub averages: LineshapeAverages,
    pub k_squared: f64,
    /// `K = kc/omega0`
    pub k_dimless: Option<f64>,
    /// `V = v/c`
    pub v_dimless: Option<f64>,
    /// `Gamma` from the soliton amplitude relation, `nu S0 <F> tau0^2 / x`.
    pub gamma_factor: f64,
    /// `G = (x^2 - K^2)/(2x)`
    pub g_factor: Option<f64>,
    pub regime: Option<Regime>,
    /// Why the solution does not exist, if it does not.
    pub failure: Option<SitError>,
}

impl DispersionSolution {
    pub fn exists(&self) -> bool {
        self.failure.is_none()
    }

    pub fn is_superluminal(&self) -> bool {
        self.regime == Some(Regime::Superluminal)
    }
}

/// Averages appropriate to the medium's line shape.
pub fn line_averages(medium: &MediumParams, pulse: &PulseParams) -> Result<LineshapeAverages> {
    match medium.lineshape {
        LineShape::SharpLine => lineshape::sharp_line_averages(pulse.x, pulse.tau0),
        LineShape::Lorentzian => {
            let tau_star = medium
                .omega0_tau_star
                .ok_or_else(|| SitError::invalid("omega0_tau_star", "required for the Lorentzian line shape"))?;
            lineshape::averages_analytic(pulse.tau0, tau_star)
        }
    }
}

/// `Gamma = nu S0 <F> tau0^2 / x`.
pub fn gamma_from_soliton(medium: &MediumParams, pulse: &PulseParams, avg_f: f64) -> Result<f64> {
    validate(*medium, *pulse)?;
    Ok(medium.nu * medium.s0 * avg_f * pulse.tau0 * pulse.tau0 / pulse.x)
}

/// `K^2` of the general law for given averages.
pub fn k_squared_from_averages(x: f64, nu: f64, s0: f64, tau0: f64, avg: &LineshapeAverages) -> f64 {
    x * x - 2.0 * avg.delta_tilde * nu * s0 * avg.avg_f * tau0 * tau0
}

/// Velocity denominator `x - nu S0 <F> tau0^2`.
pub fn velocity_denominator(x: f64, nu: f64, s0: f64, tau0: f64, avg_f: f64) -> f64 {
    x - nu * s0 * avg_f * tau0 * tau0
}

fn k_from_squared(k_squared: f64) -> Result<f64> {
    if k_squared >= 0.0 {
        Ok(k_squared.sqrt())
    } else {
        Err(SitError::NoCarrier { k_squared })
    }
}

fn velocity(k: f64, denominator: f64) -> Result<f64> {
    if denominator == 0.0 {
        return Err(SitError::VelocityPole { denominator });
    }
    let v = k / denominator;
    if !v.is_finite() {
        return Err(SitError::VelocityPole { denominator });
    }
    if v < 0.0 {
        return Err(SitError::NegativeVelocity { v });
    }
    Ok(v)
}

fn require(medium: &MediumParams, shape: LineShape) -> Result<()> {
    if medium.lineshape != shape {
        return Err(SitError::invalid(
            "lineshape",
            format!("operation requires {shape:?}, medium is {:?}", medium.lineshape),
        ));
    }
    Ok(())
}

fn sharp_terms(medium: &MediumParams, pulse: &PulseParams) -> (f64, f64) {
    let d = 1.0 - pulse.x;
    let t2 = pulse.tau0 * pulse.tau0;
    let lorentz = t2 / (1.0 + d * d * t2);
    let k2 = pulse.x * pulse.x - 2.0 * medium.nu * medium.s0 * d * lorentz;
    let den = pulse.x - medium.nu * medium.s0 * lorentz;
    (k2, den)
}

/// Sharp-line wave number
/// `K = sqrt(x^2 - 2 nu S0 (1-x) tau0^2 / (1 + (1-x)^2 tau0^2))`.
pub fn sharp_line_k(medium: &MediumParams, pulse: &PulseParams) -> Result<f64> {
    validate(*medium, *pulse)?;
    require(medium, LineShape::SharpLine)?;
    k_from_squared(sharp_terms(medium, pulse).0)
}

/// Sharp-line velocity `V = K / (x - nu S0 tau0^2 / (1 + (1-x)^2 tau0^2))`.
pub fn sharp_line_v(medium: &MediumParams, pulse: &PulseParams) -> Result<f64> {
    validate(*medium, *pulse)?;
    require(medium, LineShape::SharpLine)?;
    let (k2, den) = sharp_terms(medium, pulse);
    velocity(k_from_squared(k2)?, den)
}

fn broadened_terms(medium: &MediumParams, pulse: &PulseParams, form: BroadenedForm) -> Result<(f64, f64)> {
    validate(*medium, *pulse)?;
    require(medium, LineShape::Lorentzian)?;
    let tau_star = medium.omega0_tau_star.expect("validated");
    let avg = lineshape::averages_analytic(pulse.tau0, tau_star)?;
    let k2 = match form {
        BroadenedForm::Canonical => k_squared_from_averages(pulse.x, medium.nu, medium.s0, pulse.tau0, &avg),
        BroadenedForm::Quartic => {
            let y = pulse.tau0 / tau_star;
            // ln y / (y^2 - 1) = [ln(1/y)/(1-y)] / (1+y)
            let ratio = lineshape::log_ratio(y) / (1.0 + y);
            pulse.x * pulse.x + 4.0 * medium.s0 * medium.nu * tau_star / PI * y.powi(4) * ratio
        }
    };
    let den = velocity_denominator(pulse.x, medium.nu, medium.s0, pulse.tau0, avg.avg_f);
    Ok((k2, den))
}

/// Broadened (Lorentzian) wave number.
pub fn broadened_k(medium: &MediumParams, pulse: &PulseParams, form: BroadenedForm) -> Result<f64> {
    k_from_squared(broadened_terms(medium, pulse, form)?.0)
}

/// Broadened velocity; the denominator `x - nu S0 (w0t*)^2 y^2/(1+y)` is the
/// same in both forms.
pub fn broadened_v(medium: &MediumParams, pulse: &PulseParams, form: BroadenedForm) -> Result<f64> {
    let (k2, den) = broadened_terms(medium, pulse, form)?;
    velocity(k_from_squared(k2)?, den)
}

/// Full dispersion solution with the canonical broadened form.
pub fn solve(medium: &MediumParams, pulse: &PulseParams) -> Result<DispersionSolution> {
    solve_with(medium, pulse, BroadenedForm::Canonical)
}

pub fn solve_with(medium: &MediumParams, pulse: &PulseParams, form: BroadenedForm) -> Result<DispersionSolution> {
    validate(*medium, *pulse)?;
    let averages = line_averages(medium, pulse)?;
    let (k_squared, den) = match medium.lineshape {
        LineShape::SharpLine => sharp_terms(medium, pulse),
        LineShape::Lorentzian => broadened_terms(medium, pulse, form)?,
    };
    let gamma_factor = gamma_from_soliton(medium, pulse, averages.avg_f)?;
    let mut sol = DispersionSolution {
        x: pulse.x,
        tau0: pulse.tau0,
        averages,
        k_squared,
        k_dimless: None,
        v_dimless: None,
        gamma_factor,
        g_factor: None,
        regime: None,
        failure: None,
    };
    match k_from_squared(k_squared) {
        Ok(k) => {
            sol.k_dimless = Some(k);
            sol.g_factor = Some((pulse.x * pulse.x - k_squared) / (2.0 * pulse.x));
            match velocity(k, den) {
                Ok(v) => {
                    sol.v_dimless = Some(v);
                    sol.regime = Some(Regime::of(v));
                }
                Err(e) => sol.failure = Some(e),
            }
        }
        Err(e) => sol.failure = Some(e),
    }
    Ok(sol)
}

/// Both roots of the alternate (velocity-parameterized) form of the law.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct AltRoots {
    pub plus: f64,
    pub minus: f64,
}

impl AltRoots {
    /// The root closest to `k`.
    pub fn nearest(&self, k: f64) -> f64 {
        if (self.plus - k).abs() <= (self.minus - k).abs() {
            self.plus
        } else {
            self.minus
        }
    }
}

/// Wave number from the velocity-parameterized form of the law,
/// `K = d~/V ± sqrt((x - d~)^2 + d~^2 (1/V^2 - 1))`.
///
/// This is the quadratic `d~ (1 - K/(xV)) = (x^2 - K^2)/(2x)` solved for `K`.
/// A variant with `+d~` in place of `-d~` is not satisfied by the
/// closed-form `(K, V)` pairs, see `plus_sign_alternate_form_fails_round_trip`
/// in the tests.
pub fn alt_dispersion_k(x: f64, v: f64, delta_tilde: f64) -> Result<AltRoots> {
    if !(v.is_finite() && v > 0.0) {
        return Err(SitError::invalid("v", format!("must be positive and finite, got {v}")));
    }
    let shifted = x - delta_tilde;
    let radicand = shifted * shifted + delta_tilde * delta_tilde * (1.0 / (v * v) - 1.0);
    if radicand < 0.0 {
        return Err(SitError::NoCarrier { k_squared: radicand });
    }
    let root = radicand.sqrt();
    let base = delta_tilde / v;
    Ok(AltRoots {
        plus: base + root,
        minus: base - root,
    })
}

/// `(1 - K/(xV)) S0 > 0`, equivalent to `Gamma S0 > 0`.
pub fn existence_condition(k: f64, x: f64, v: f64, s0: f64) -> bool {
    (1.0 - k / (x * v)) * s0 > 0.0
}

/// Denominator of the critical-width formula in its sign-corrected form,
/// `2 nu (x-1) - (x-1)^2 x^2`.
fn critical_denominator(x: f64, nu: f64) -> f64 {
    let d = x - 1.0;
    2.0 * nu * d - d * d * x * x
}

/// Pulse width at which the absorber (`S0 = -1`) sharp-line `K^2` vanishes:
/// `tau0^2 = x^2 / (2 nu (x-1) - (x-1)^2 x^2)`.
///
/// Writing `(1 - x)` in the linear term instead would make the
/// denominator negative for every `x > 1`. Setting the sharp-line `K^2` to
/// zero gives `(x - 1)`, and with that sign the minimum over `x` at `nu = 1`
/// is `tau0 = 1.9419` at `x = 1.3086`.
pub fn critical_width(x: f64, nu: f64) -> Result<f64> {
    if !(nu.is_finite() && nu > 0.0) {
        return Err(SitError::invalid("nu", format!("must be positive, got {nu}")));
    }
    if !(x.is_finite() && x > 0.0) {
        return Err(SitError::invalid("x", format!("must be positive, got {x}")));
    }
    if x <= 1.0 {
        return Err(SitError::OutOfDomain {
            x,
            reason: "stopping requires x > 1 in the sharp-line limit".into(),
        });
    }
    let den = critical_denominator(x, nu);
    if den <= 0.0 {
        return Err(SitError::OutOfDomain {
            x,
            reason: format!("denominator {den:.3e} is not positive"),
        });
    }
    Ok((x * x / den).sqrt())
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CriticalWidthResult {
    pub x_at_min: f64,
    pub tau0_crit: f64,
    /// Open interval of `x` with a finite critical width: `(1, x_c)` where
    /// `x_c` solves `x^3 - x^2 - 2 nu = 0`.
    pub domain: (f64, f64),
}

/// Minimum of [`critical_width`] over `x` by golden-section search.
pub fn minimize_critical_width(nu: f64) -> Result<CriticalWidthResult> {
    if !(nu.is_finite() && nu > 0.0) {
        return Err(SitError::invalid("nu", format!("must be positive, got {nu}")));
    }
    let upper = cubic_root(nu);
    let f = |x: f64| critical_width(x, nu).unwrap_or(f64::INFINITY);
    let (x_at_min, tau0_crit) = roots::golden_section(f, 1.0, upper, MIN_TOL);
    Ok(CriticalWidthResult {
        x_at_min,
        tau0_crit,
        domain: (1.0, upper),
    })
}

/// The single positive real root of `x^3 - x^2 - 2 nu = 0`, the `tau0 -> inf`
/// limit of the `K = 0` locus.
pub fn cubic_root(nu: f64) -> f64 {
    if nu <= 0.0 {
        return 1.0;
    }
    // f(1) = -2nu < 0 and f(1 + 2nu) = 2nu((1+2nu)^2 - 1) > 0
    roots::bisect(|x| x * x * x - x * x - 2.0 * nu, 1.0, 1.0 + 2.0 * nu, 1e-14)
}

#[derive(Debug, Clone, PartialEq)]
pub struct BranchRoots {
    /// Lower root of `K^2(x) = 0` at the given width.
    pub x1: Option<f64>,
    /// Upper root.
    pub x2: Option<f64>,
    /// Real roots of the cubic (the infinite-width limit).
    pub cubic_roots: Vec<f64>,
    pub description: String,
}

/// Zeros of the absorber sharp-line `K^2(x)` at width `tau0`, located by a
/// 2000-point scan of `(0, 5]` and bisection, together with the cubic's root.
pub fn stopping_roots(nu: f64, tau0: f64) -> Result<BranchRoots> {
    let medium = MediumParams::sharp_line(nu, -1.0);
    validate(medium, PulseParams::new(1.0, tau0))?;
    if nu == 0.0 {
        return Err(SitError::invalid("nu", "must be positive"));
    }
    let k2 = |x: f64| sharp_terms(&medium, &PulseParams::new(x, tau0)).0;
    let found = roots::scan_roots(k2, 0.0, SCAN_X_MAX, SCAN_POINTS, ROOT_TOL);
    let x1 = found.first().copied();
    let x2 = if found.len() > 1 { found.last().copied() } else { None };
    let description = match (x1, x2) {
        (Some(a), Some(b)) => format!("two branches: 0 < x < {a:.10} and {b:.10} < x"),
        (Some(a), None) => format!("single sign change at x = {a:.10}"),
        _ => "single branch: K exists for every scanned x".to_string(),
    };
    Ok(BranchRoots {
        x1,
        x2,
        cubic_roots: vec![cubic_root(nu)],
        description,
    })
}

/// Lowest `x` above which an amplifier (`S0 = +1`) pulse is superluminal,
/// found by scanning `(0, 5]` for the last `x` where the solution is missing
/// or has `V <= 1`, then bisecting on that boundary.
pub fn superluminal_threshold(medium: &MediumParams, tau0: f64, form: BroadenedForm) -> Result<f64> {
    validate(*medium, PulseParams::new(1.0, tau0))?;
    if medium.s0 != 1.0 {
        return Err(SitError::invalid("s0", "superluminal threshold is defined for S0 = +1"));
    }
    let superluminal = |x: f64| {
        solve_with(medium, &PulseParams::new(x, tau0), form)
            .map(|s| s.is_superluminal())
            .unwrap_or(false)
    };
    let grid: Vec<f64> = roots::open_grid(0.0, SCAN_X_MAX, SCAN_POINTS).collect();
    let flags: Vec<bool> = grid.iter().map(|&x| superluminal(x)).collect();
    if !flags[flags.len() - 1] {
        return Err(SitError::NoCrossing(format!("not superluminal at x = {SCAN_X_MAX}")));
    }
    match flags.iter().rposition(|f| !f) {
        None => Err(SitError::NoCrossing("superluminal over the entire scan".into())),
        Some(i) => Ok(roots::bisect_predicate(superluminal, grid[i], grid[i + 1], ROOT_TOL)),
    }
}

/// The estimate `1/3 + (nu/6) tau0^2 <F>` of the superluminal threshold.
/// It does not agree with [`superluminal_threshold`], whose small-coupling
/// limit is 1/2.
pub fn quoted_superluminal_estimate(nu: f64, tau0: f64, avg_f: f64) -> f64 {
    1.0 / 3.0 + nu / 6.0 * tau0 * tau0 * avg_f
}

/// Threshold for the broadened amplifier, where `d~` and `<F>` do not depend
/// on `x`: `V > 1` exactly when `x > max(a, d~ + a/2)` with
/// `a = nu <F> tau0^2`.
pub fn broadened_superluminal_threshold(medium: &MediumParams, tau0: f64) -> Result<f64> {
    validate(*medium, PulseParams::new(1.0, tau0))?;
    require(medium, LineShape::Lorentzian)?;
    let avg = lineshape::averages_analytic(tau0, medium.omega0_tau_star.expect("validated"))?;
    let a = medium.nu * avg.avg_f * tau0 * tau0;
    Ok(a.max(avg.delta_tilde + 0.5 * a))
}
