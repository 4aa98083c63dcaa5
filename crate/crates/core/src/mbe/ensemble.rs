use std::f64::consts::FRAC_PI_2;

use super::bloch::BlochVector;
use crate::error::{Result, SitError};
use crate::params::{LineShape, MediumParams};
use crate::quadrature::gauss_legendre;

pub const DEFAULT_ATOMS: usize = 200;
/// Default detuning cutoff in units of `1/tau*`.
pub const DEFAULT_CUTOFF: f64 = 50.0;

/// Discrete detuning ensemble standing in for the line-shape average.
#[derive(Debug, Clone, PartialEq)]
pub struct BlochEnsemble {
    pub detunings: Vec<f64>,
    pub weights: Vec<f64>,
    pub states: Vec<BlochVector>,
}

impl BlochEnsemble {
    pub fn len(&self) -> usize {
        self.detunings.len()
    }

    pub fn is_empty(&self) -> bool {
        self.detunings.is_empty()
    }

    pub fn weight_sum(&self) -> f64 {
        self.weights.iter().sum()
    }

    /// `Σ w_i g(d_i)`
    pub fn average<G: Fn(f64) -> f64>(&self, g: G) -> f64 {
        self.detunings.iter().zip(&self.weights).map(|(&d, &w)| w * g(d)).sum()
    }

    /// Puts every atom back into `(0, 0, S0)`.
    pub fn reset(&mut self, s0: f64) {
        for s in &mut self.states {
            *s = [0.0, 0.0, s0];
        }
    }
}

/// Ensemble for `medium` at carrier ratio `x`.
///
/// Sharp line: one atom at `d = 1 - x`. Lorentzian: `n_atoms` Gauss–Legendre
/// nodes in the cumulative variable `u = (2/pi) atan(d tau*)` on
/// `[0, u(cutoff)]`, each weighted by its share of the line-shape measure,
/// plus one node carrying the mass beyond the cutoff, placed at the median
/// of that tail.
pub fn build_ensemble(medium: &MediumParams, x: f64, n_atoms: usize, cutoff: f64) -> Result<BlochEnsemble> {
    medium.validate()?;
    let s0 = medium.s0;
    let (detunings, weights) = match medium.lineshape {
        LineShape::SharpLine => (vec![1.0 - x], vec![1.0]),
        LineShape::Lorentzian => {
            if n_atoms == 0 {
                return Err(SitError::invalid("atoms", "need at least one atom"));
            }
            if !(cutoff.is_finite() && cutoff > 0.0) {
                return Err(SitError::invalid("cutoff", format!("must be positive, got {cutoff}")));
            }
            let tau_star = medium.omega0_tau_star.expect("validated");
            let u_c = (cutoff * tau_star).atan() / FRAC_PI_2;
            let to_delta = |u: f64| (FRAC_PI_2 * u).tan() / tau_star;
            let (nodes, w) = gauss_legendre(n_atoms);
            let mut detunings: Vec<f64> = nodes.iter().map(|z| to_delta(0.5 * u_c * (z + 1.0))).collect();
            let mut weights: Vec<f64> = w.iter().map(|w| 0.5 * u_c * w).collect();
            let tail = 1.0 - u_c;
            if tail > 0.0 {
                detunings.push(to_delta(u_c + 0.5 * tail));
                weights.push(tail);
            }
            (detunings, weights)
        }
    };
    let states = vec![[0.0, 0.0, s0]; detunings.len()];
    Ok(BlochEnsemble {
        detunings,
        weights,
        states,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::lineshape::{averages_analytic, response_unchecked};

    #[test]
    fn sharp_line_single_atom() {
        let e = build_ensemble(&MediumParams::sharp_line(1.0, -1.0), 1.2, 200, 1.0).unwrap();
        assert_eq!(e.states, vec![[0.0, 0.0, -1.0]]);
        assert_eq!(e.weights, vec![1.0]);
        assert!((e.detunings[0] + 0.2).abs() < 1e-15);
    }

    #[test]
    fn lorentzian_weights_normalized() {
        let m = MediumParams::lorentzian(1.0, -1.0, 10.0);
        let e = build_ensemble(&m, 1.0, 200, DEFAULT_CUTOFF / 10.0).unwrap();
        assert_eq!(e.len(), 201);
        assert!((e.weight_sum() - 1.0).abs() < 1e-10);
        assert!(e.weights.iter().all(|&w| w >= 0.0));
        assert!(e.detunings.windows(2).all(|p| p[0] < p[1]));
        assert!(e.states.iter().all(|s| *s == [0.0, 0.0, -1.0]));
    }

    #[test]
    fn discrete_average_matches_closed_form() {
        for &(t, tau_p) in &[(10.0, 5.0), (2.0, 1.0), (1.0, 3.0)] {
            let m = MediumParams::lorentzian(1.0, -1.0, t);
            let e = build_ensemble(&m, 1.0, DEFAULT_ATOMS, DEFAULT_CUTOFF / t).unwrap();
            let a = averages_analytic(tau_p, t).unwrap();
            let f = e.average(|d| response_unchecked(d, tau_p));
            assert!((f - a.avg_f).abs() < 1e-4, "{f} vs {}", a.avg_f);
            let df = e.average(|d| d * response_unchecked(d, tau_p));
            assert!((df - a.avg_delta_f).abs() < 1e-3 * a.avg_delta_f.abs().max(1.0), "{df} vs {}", a.avg_delta_f);
        }
    }

    #[test]
    fn rejects_bad_counts() {
        let m = MediumParams::lorentzian(1.0, -1.0, 10.0);
        assert!(build_ensemble(&m, 1.0, 0, 5.0).unwrap_err().is_validation());
        assert!(build_ensemble(&m, 1.0, 10, 0.0).unwrap_err().is_validation());
        assert!(build_ensemble(&MediumParams::sharp_line(1.0, 0.2), 1.0, 1, 1.0).is_err());
    }
}
