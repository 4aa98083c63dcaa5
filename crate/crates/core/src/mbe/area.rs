use crate::error::{Result, SitError};
use crate::params::MediumParams;

/// Absorption coefficient of the area law, `beta = 8 nu (w0 tau*) / K`.
///
/// In physical units `beta = 2 gamma w0^2 tau* / (kappa^2 c^2 k)`. With
/// `gamma = 4 nu w0 / kappa`, `c = w0 = kappa = 1` and `k = K` this is
/// `8 nu tau* / K`.
pub fn beta_coefficient(medium: &MediumParams, k_dimless: f64, tau_star: f64) -> Result<f64> {
    medium.validate()?;
    if !(tau_star.is_finite() && tau_star > 0.0) {
        return Err(SitError::invalid("omega0_tau_star", format!("must be positive, got {tau_star}")));
    }
    if k_dimless.is_nan() || k_dimless < 0.0 {
        return Err(SitError::invalid("k", format!("must be non-negative, got {k_dimless}")));
    }
    let beta = 8.0 * medium.nu * tau_star / k_dimless;
    if !beta.is_finite() {
        return Err(SitError::InfiniteAbsorption { k: k_dimless });
    }
    Ok(beta)
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct AreaSample {
    pub x: f64,
    pub theta_numeric: f64,
    pub theta_closed_form: f64,
}

/// Solution of `theta' = (beta/2) sin theta`:
/// `tan(theta/2) = tan(theta0/2) exp(beta x / 2)`, continued through
/// `theta = pi` by writing it as an angle.
pub fn area_closed_form(theta0: f64, beta: f64, x: f64) -> f64 {
    let a = 0.5 * beta * x;
    let (s, c) = (0.5 * theta0).sin_cos();
    // atan2(s e^{a/2}, c e^{-a/2}) with both arguments scaled to stay finite
    let half = if a >= 0.0 {
        s.atan2(c * (-a).exp())
    } else {
        (s * a.exp()).atan2(c)
    };
    2.0 * half
}

const RTOL: f64 = 1e-12;
const ATOL: f64 = 1e-14;

/// Area law integrated with an adaptive Dormand–Prince 5(4) pair and sampled
/// at `steps + 1` evenly spaced positions on `[0, x_span]`, each next to the
/// closed form.
pub fn area_theorem_evolve(theta0: f64, beta: f64, x_span: f64, steps: usize) -> Result<Vec<AreaSample>> {
    if !beta.is_finite() {
        return Err(SitError::InfiniteAbsorption { k: 0.0 });
    }
    if steps == 0 {
        return Err(SitError::invalid("steps", "need at least one step"));
    }
    if !theta0.is_finite() {
        return Err(SitError::invalid("theta0", format!("must be finite, got {theta0}")));
    }
    if !(x_span.is_finite() && x_span >= 0.0) {
        return Err(SitError::invalid("x_span", format!("must be non-negative, got {x_span}")));
    }
    let f = |_x: f64, theta: f64| 0.5 * beta * theta.sin();
    let mut out = Vec::with_capacity(steps + 1);
    let mut theta = theta0;
    let mut h = (x_span / steps as f64).min(0.1 / beta.abs().max(1e-300));
    out.push(AreaSample {
        x: 0.0,
        theta_numeric: theta,
        theta_closed_form: theta0,
    });
    for i in 1..=steps {
        let x0 = x_span * (i - 1) as f64 / steps as f64;
        let x1 = x_span * i as f64 / steps as f64;
        theta = dopri5(&f, x0, x1, theta, &mut h)?;
        out.push(AreaSample {
            x: x1,
            theta_numeric: theta,
            theta_closed_form: area_closed_form(theta0, beta, x1),
        });
    }
    Ok(out)
}

/// Dormand–Prince 5(4) from `x0` to `x1`; `h` carries the step size across
/// calls.
fn dopri5<F: Fn(f64, f64) -> f64>(f: &F, x0: f64, x1: f64, mut y: f64, h: &mut f64) -> Result<f64> {
    const C2: f64 = 1.0 / 5.0;
    const C3: f64 = 3.0 / 10.0;
    const C4: f64 = 4.0 / 5.0;
    const C5: f64 = 8.0 / 9.0;
    const A21: f64 = 1.0 / 5.0;
    const A31: f64 = 3.0 / 40.0;
    const A32: f64 = 9.0 / 40.0;
    const A41: f64 = 44.0 / 45.0;
    const A42: f64 = -56.0 / 15.0;
    const A43: f64 = 32.0 / 9.0;
    const A51: f64 = 19372.0 / 6561.0;
    const A52: f64 = -25360.0 / 2187.0;
    const A53: f64 = 64448.0 / 6561.0;
    const A54: f64 = -212.0 / 729.0;
    const A61: f64 = 9017.0 / 3168.0;
    const A62: f64 = -355.0 / 33.0;
    const A63: f64 = 46732.0 / 5247.0;
    const A64: f64 = 49.0 / 176.0;
    const A65: f64 = -5103.0 / 18656.0;
    const B1: f64 = 35.0 / 384.0;
    const B3: f64 = 500.0 / 1113.0;
    const B4: f64 = 125.0 / 192.0;
    const B5: f64 = -2187.0 / 6784.0;
    const B6: f64 = 11.0 / 84.0;
    // fifth minus fourth order weights
    const E1: f64 = 71.0 / 57600.0;
    const E3: f64 = -71.0 / 16695.0;
    const E4: f64 = 71.0 / 1920.0;
    const E5: f64 = -17253.0 / 339200.0;
    const E6: f64 = 22.0 / 525.0;
    const E7: f64 = -1.0 / 40.0;

    let mut x = x0;
    if x1 <= x0 {
        return Ok(y);
    }
    let h_min = 1e-14 * (x1.abs() + 1.0);
    let mut k1 = f(x, y);
    while x < x1 {
        let last = x + *h >= x1;
        let step = if last { x1 - x } else { *h };
        let k2 = f(x + C2 * step, y + step * A21 * k1);
        let k3 = f(x + C3 * step, y + step * (A31 * k1 + A32 * k2));
        let k4 = f(x + C4 * step, y + step * (A41 * k1 + A42 * k2 + A43 * k3));
        let k5 = f(x + C5 * step, y + step * (A51 * k1 + A52 * k2 + A53 * k3 + A54 * k4));
        let k6 = f(x + step, y + step * (A61 * k1 + A62 * k2 + A63 * k3 + A64 * k4 + A65 * k5));
        let y_new = y + step * (B1 * k1 + B3 * k3 + B4 * k4 + B5 * k5 + B6 * k6);
        let k7 = f(x + step, y_new);
        let err = step * (E1 * k1 + E3 * k3 + E4 * k4 + E5 * k5 + E6 * k6 + E7 * k7);
        let scale = ATOL + RTOL * y.abs().max(y_new.abs());
        let ratio = (err / scale).abs();
        if ratio <= 1.0 {
            x = if last { x1 } else { x + step };
            y = y_new;
            k1 = k7;
        }
        let factor = if ratio == 0.0 { 5.0 } else { (0.9 * ratio.powf(-0.2)).clamp(0.2, 5.0) };
        if !(last && ratio <= 1.0) {
            *h = step * factor;
        }
        if *h < h_min {
            return Err(SitError::StepSizeUnderflow { at: x });
        }
    }
    Ok(y)
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::f64::consts::PI;

    #[test]
    fn beta_examples() {
        let m = MediumParams::lorentzian(1.0, -1.0, 1.0);
        assert_eq!(beta_coefficient(&m, 1.0, 1.0).unwrap(), 8.0);
        let b1 = beta_coefficient(&m, 0.7, 3.0).unwrap();
        let b2 = beta_coefficient(&m, 1.4, 3.0).unwrap();
        assert!((b1 - 2.0 * b2).abs() < 1e-14);
        assert!(matches!(
            beta_coefficient(&m, 0.0, 1.0),
            Err(SitError::InfiniteAbsorption { k }) if k == 0.0
        ));
        let mut last = 0.0;
        for k in [1e-2, 1e-5, 1e-8, 1e-11] {
            let b = beta_coefficient(&m, k, 1.0).unwrap();
            assert!(b > last);
            last = b;
        }
        assert!(last > 1e11);
    }

    #[test]
    fn fixed_points() {
        for theta0 in [0.0, PI] {
            let s = area_theorem_evolve(theta0, 3.0, 10.0 / 3.0, 50).unwrap();
            for p in &s {
                assert!((p.theta_numeric - theta0).abs() < 1e-12);
                assert!((p.theta_closed_form - theta0).abs() < 1e-12);
            }
        }
    }

    #[test]
    fn quarter_turn_matches_closed_form() {
        // beta x = 2 at the end of the span
        let s = area_theorem_evolve(0.5 * PI, 2.0, 1.0, 10).unwrap();
        let end = s.last().unwrap();
        let want = 2.0 * ((0.25 * PI).tan() * 1f64.exp()).atan();
        assert!((end.theta_closed_form - want).abs() < 1e-14);
        assert!((end.theta_numeric - want).abs() < 1e-6);
    }

    #[test]
    fn closed_form_stays_finite() {
        let t = area_closed_form(0.1, 1.0, 1e4);
        assert!((t - PI).abs() < 1e-12);
        let t = area_closed_form(0.1, -1.0, 1e4);
        assert!(t.abs() < 1e-12);
    }

    #[test]
    fn numeric_tracks_closed_form_over_range() {
        for theta0 in [0.1 * PI, 0.5 * PI, 0.9 * PI] {
            let s = area_theorem_evolve(theta0, 4.0, 2.5, 200).unwrap();
            let worst = s
                .iter()
                .map(|p| (p.theta_numeric - p.theta_closed_form).abs())
                .fold(0.0, f64::max);
            assert!(worst < 1e-9, "{worst}");
        }
    }

    #[test]
    fn infinite_beta_is_reported() {
        assert!(matches!(
            area_theorem_evolve(1.0, f64::INFINITY, 1.0, 10),
            Err(SitError::InfiniteAbsorption { .. })
        ));
        assert!(area_theorem_evolve(1.0, 1.0, 1.0, 0).unwrap_err().is_validation());
    }
}
