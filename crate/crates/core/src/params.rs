//! Nondimensional parameter types.
//!
//! Every quantity in this crate is expressed in units where the mean atomic
//! transition frequency, the in-medium speed of light and the field coupling
//! constant are all one (`omega0 = c = kappa = 1`). Frequencies are therefore
//! in units of `omega0`, times in `1/omega0`, lengths in `c/omega0`, and the
//! field envelope in units of `omega0/kappa`. The dipole density, refractive
//! index and coupling constants only ever appear through the material
//! parameter `nu`, so they are not represented separately.

use crate::error::{Result, SitError};

/// The fixed internal unit convention.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct UnitConvention {
    pub omega0: f64,
    pub c: f64,
    pub kappa: f64,
}

impl UnitConvention {
    /// Peak envelope of the 2π soliton, from `E0 * tau_p = 4 / kappa`.
    pub fn peak_field(&self, tau_p: f64) -> f64 {
        4.0 / (self.kappa * tau_p)
    }
}

pub fn nondimensionalize() -> UnitConvention {
    UnitConvention {
        omega0: 1.0,
        c: 1.0,
        kappa: 1.0,
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum LineShape {
    /// All atoms share one transition frequency.
    SharpLine,
    /// Lorentzian distribution of detunings on `[0, inf)` with width `1/tau*`.
    Lorentzian,
}

/// Material and environment constants.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct MediumParams {
    /// Material parameter `nu = gamma * kappa / (4 omega0)`. Zero is accepted
    /// as the uncoupled limit.
    pub nu: f64,
    /// Broadening time `omega0 * tau*`; required for the Lorentzian line.
    pub omega0_tau_star: Option<f64>,
    /// Initial inversion, -1 (absorber) or +1 (amplifier).
    pub s0: f64,
    pub lineshape: LineShape,
}

impl MediumParams {
    pub fn sharp_line(nu: f64, s0: f64) -> Self {
        MediumParams {
            nu,
            omega0_tau_star: None,
            s0,
            lineshape: LineShape::SharpLine,
        }
    }

    pub fn lorentzian(nu: f64, s0: f64, omega0_tau_star: f64) -> Self {
        MediumParams {
            nu,
            omega0_tau_star: Some(omega0_tau_star),
            s0,
            lineshape: LineShape::Lorentzian,
        }
    }

    pub fn is_absorber(&self) -> bool {
        self.s0 < 0.0
    }

    pub fn validate(&self) -> Result<()> {
        if !self.nu.is_finite() || self.nu < 0.0 {
            return Err(SitError::invalid(
                "nu",
                format!("nu must be positive (nu = 0 selects the uncoupled limit), got {}", self.nu),
            ));
        }
        if self.s0 != 1.0 && self.s0 != -1.0 {
            return Err(SitError::invalid(
                "s0",
                format!("s0 must be exactly -1 or +1, got {}", self.s0),
            ));
        }
        match (self.lineshape, self.omega0_tau_star) {
            (LineShape::Lorentzian, None) => Err(SitError::invalid(
                "omega0_tau_star",
                "required for the Lorentzian line shape",
            )),
            (LineShape::Lorentzian, Some(t)) if !(t.is_finite() && t > 0.0) => Err(
                SitError::invalid("omega0_tau_star", format!("must be positive and finite, got {t}")),
            ),
            (LineShape::SharpLine, Some(t)) if t.is_finite() => Err(SitError::invalid(
                "omega0_tau_star",
                "must be absent (or infinite) for the sharp line",
            )),
            _ => Ok(()),
        }
    }
}

/// Carrier and envelope parameters of the launched pulse.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PulseParams {
    /// Frequency ratio `omega / omega0`.
    pub x: f64,
    /// Pulse width `omega0 * tau_p`.
    pub tau0: f64,
}

impl PulseParams {
    pub fn new(x: f64, tau0: f64) -> Self {
        PulseParams { x, tau0 }
    }

    /// `y = tau_p / tau*`, defined only for a broadened line.
    pub fn y(&self, medium: &MediumParams) -> Option<f64> {
        match medium.lineshape {
            LineShape::Lorentzian => medium.omega0_tau_star.map(|t| self.tau0 / t),
            LineShape::SharpLine => None,
        }
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.x.is_finite() && self.x > 0.0) {
            return Err(SitError::invalid("x", format!("x must be positive, got {}", self.x)));
        }
        if !(self.tau0.is_finite() && self.tau0 > 0.0) {
            return Err(SitError::invalid(
                "tau0",
                format!("tau0 must be positive, got {}", self.tau0),
            ));
        }
        Ok(())
    }
}

/// Checks every invariant of the pair and returns it unchanged.
pub fn validate(medium: MediumParams, pulse: PulseParams) -> Result<(MediumParams, PulseParams)> {
    medium.validate()?;
    pulse.validate()?;
    if let Some(y) = pulse.y(&medium) {
        if !(y.is_finite() && y > 0.0) {
            return Err(SitError::invalid("y", format!("tau0 / omega0_tau_star = {y} is not finite")));
        }
    }
    Ok((medium, pulse))
}
