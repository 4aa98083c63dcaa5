//! Space marching of the reduced field equations in the retarded frame.
//!
//! With `xi` the position and `tau = t - xi x/K` the retarded time (frame
//! speed `K/x`, the advection speed of the envelope equation), the envelope
//! and phase equations combine into one equation for `A = E e^{i phi}`:
//!
//! ```text
//! dA/dxi = (2 nu / K) <P> - i ((K^2 - x^2) / (2K)) A,    P = (S_y + i S_x) e^{i phi}
//! ```
//!
//! `P` obeys `dP/dtau = -i d P + A S_z / 2`, `dS_z/dtau = -Re(conj(A) P) / 2`,
//! which is the Bloch system rewritten in a frame that does not need
//! `phi'`. In that form each atom is a rotation about
//! `(-Re A / 2, Im A / 2, d)` acting on `(Im P, Re P, S_z)`.

use num_complex::Complex64;
use rayon::prelude::*;

use super::bloch::magnus_step;
use super::ensemble::{build_ensemble, BlochEnsemble, DEFAULT_ATOMS, DEFAULT_CUTOFF};
use crate::dispersion::{line_averages, solve, velocity_denominator};
use crate::error::{Result, SitError};
use crate::params::{validate, LineShape, MediumParams, PulseParams};
use crate::soliton::sech;

/// Field on the retarded-time grid at one position.
#[derive(Debug, Clone, PartialEq)]
pub struct FieldState {
    pub position: f64,
    pub tau_grid: Vec<f64>,
    pub envelope: Vec<f64>,
    pub phase: Vec<f64>,
    /// `<S_y>` in the local phase frame; zero where not yet computed.
    pub sy_avg: Vec<f64>,
}

impl FieldState {
    /// Sech pulse of width `tau0` and area `area_pi * pi`, centred at
    /// `offset * tau0` on `points` nodes spanning `±window * tau0`.
    pub fn sech_pulse(tau0: f64, area_pi: f64, points: usize, window: f64, offset: f64) -> Result<FieldState> {
        if !(tau0.is_finite() && tau0 > 0.0) {
            return Err(SitError::invalid("tau0", format!("must be positive, got {tau0}")));
        }
        if points < 8 {
            return Err(SitError::invalid("points", format!("need at least 8 grid points, got {points}")));
        }
        if !(window.is_finite() && window > 0.0) || !offset.is_finite() || offset.abs() >= window {
            return Err(SitError::invalid("window", format!("need window > |offset|, got {window}, {offset}")));
        }
        if !area_pi.is_finite() {
            return Err(SitError::invalid("area_pi", "must be finite"));
        }
        let h = 2.0 * window * tau0 / (points - 1) as f64;
        let tau_grid: Vec<f64> = (0..points).map(|i| -window * tau0 + h * i as f64).collect();
        let e0 = 0.5 * area_pi * 4.0 / tau0;
        let envelope = tau_grid.iter().map(|t| e0 * sech((t - offset * tau0) / tau0)).collect();
        Ok(FieldState {
            position: 0.0,
            tau_grid,
            envelope,
            phase: vec![0.0; points],
            sy_avg: vec![0.0; points],
        })
    }

    pub fn step(&self) -> f64 {
        self.tau_grid[1] - self.tau_grid[0]
    }

    fn complex(&self) -> Vec<Complex64> {
        self.envelope
            .iter()
            .zip(&self.phase)
            .map(|(&e, &p)| Complex64::from_polar(e, p))
            .collect()
    }

    fn from_complex(position: f64, tau_grid: &[f64], a: &[Complex64], pol: &[Complex64]) -> FieldState {
        let sy_avg = a
            .iter()
            .zip(pol)
            .map(|(a, p)| {
                let m = a.norm();
                if m > 0.0 {
                    (p * a.conj()).re / m
                } else {
                    p.re
                }
            })
            .collect();
        FieldState {
            position,
            tau_grid: tau_grid.to_vec(),
            envelope: a.iter().map(|a| a.norm()).collect(),
            phase: a.iter().map(|a| a.arg()).collect(),
            sy_avg,
        }
    }

    /// `|(1/2) ∫ A dtau|`
    pub fn area(&self) -> f64 {
        0.5 * trapezoid_complex(&self.complex(), self.step()).norm()
    }

    pub fn energy(&self) -> f64 {
        self.step() * self.envelope.iter().map(|e| e * e).sum::<f64>()
    }

    /// `(tau, envelope)` at the envelope maximum, refined by a parabola
    /// through the logarithm of the three nodes around it.
    pub fn peak(&self) -> Option<(f64, f64)> {
        let (j, &m) = self
            .envelope
            .iter()
            .enumerate()
            .max_by(|a, b| a.1.total_cmp(b.1))?;
        if m <= 0.0 {
            return None;
        }
        if j == 0 || j + 1 == self.envelope.len() {
            return Some((self.tau_grid[j], m));
        }
        let (l, c, r) = (self.envelope[j - 1], m, self.envelope[j + 1]);
        if l <= 0.0 || r <= 0.0 {
            return Some((self.tau_grid[j], m));
        }
        let (l, c, r) = (l.ln(), c.ln(), r.ln());
        let curv = l - 2.0 * c + r;
        if curv >= 0.0 {
            return Some((self.tau_grid[j], m));
        }
        let d = 0.5 * (l - r) / curv;
        let value = (c - 0.25 * (l - r) * d).exp();
        Some((self.tau_grid[j] + d * self.step(), value))
    }

    /// Relative L² distance of the envelope from `e0 sech((tau - tau_c)/tau_p)`
    /// with `tau_c` the tracked peak.
    pub fn sech_deviation(&self, tau_p: f64, e0: f64) -> Option<f64> {
        let (center, _) = self.peak()?;
        let (mut diff, mut norm) = (0.0, 0.0);
        for (t, e) in self.tau_grid.iter().zip(&self.envelope) {
            let want = e0 * sech((t - center) / tau_p);
            diff += (e - want).powi(2);
            norm += want * want;
        }
        Some((diff / norm).sqrt())
    }
}

fn trapezoid_complex(a: &[Complex64], h: f64) -> Complex64 {
    let n = a.len();
    let inner: Complex64 = a[1..n - 1].iter().sum();
    (inner + 0.5 * (a[0] + a[n - 1])) * h
}

#[derive(Debug, Clone, PartialEq)]
pub struct PropagationSettings {
    pub steps: usize,
    /// Position step `dxi`.
    pub dx: f64,
    /// Keep a snapshot every this many steps (the first and last are always
    /// kept).
    pub snapshot_every: usize,
    pub atoms: usize,
    /// Detuning cutoff in units of `1/tau*`.
    pub cutoff: f64,
    /// Wave number used for the frame and the field equation; defaults to
    /// the dispersion-law value.
    pub wave_number: Option<f64>,
    /// Multiplies the wave number, for off-solution launches.
    pub k_scale: f64,
    /// Absorber runs abort once field energy exceeds this multiple of the
    /// launch energy.
    pub abort_growth: f64,
}

impl PropagationSettings {
    pub fn new(steps: usize, dx: f64) -> Self {
        PropagationSettings {
            steps,
            dx,
            snapshot_every: 10,
            atoms: DEFAULT_ATOMS,
            cutoff: DEFAULT_CUTOFF,
            wave_number: None,
            k_scale: 1.0,
            abort_growth: 1e3,
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct PropagationRecord {
    pub snapshots: Vec<FieldState>,
    /// `(position, tau of peak)` at every snapshot with a finite peak.
    pub peak_trajectory: Vec<(f64, f64)>,
    /// `(position, peak envelope)` alongside the trajectory.
    pub peak_amplitudes: Vec<(f64, f64)>,
    /// `(position, area)` at every snapshot.
    pub area_history: Vec<(f64, f64)>,
    pub measured_velocity: Option<f64>,
    pub x: f64,
    /// Wave number the run was launched with.
    pub k: f64,
    /// Velocity the phase drift is measured against (closed form where it
    /// exists, otherwise the frame speed).
    pub reference_velocity: f64,
    /// Largest `| |S|^2 - 1 |` over atoms, grid nodes and steps.
    pub max_norm_error: f64,
    /// Largest `|phi_tau|` where the envelope is at least a tenth of its peak.
    pub max_phase_tau: f64,
    /// Largest phase rate seen by an observer moving with the pulse, same
    /// region.
    pub max_phase_drift: f64,
    /// Final over initial field energy.
    pub energy_growth: f64,
    /// `dxi / (dtau x / K)`, the advection Courant number of a lab-frame
    /// scheme. Reported only: the retarded-frame march has no such limit.
    pub cfl_ratio: f64,
}

impl PropagationRecord {
    /// `max(max_phase_tau, max_phase_drift)`: zero for a field whose phase
    /// is stationary in the pulse frame.
    pub fn phase_stationarity(&self) -> f64 {
        self.max_phase_tau.max(self.max_phase_drift)
    }

    /// Largest relative deviation of the tracked peak from its launch value.
    pub fn peak_drift(&self) -> f64 {
        let Some(&(_, first)) = self.peak_amplitudes.first() else {
            return 0.0;
        };
        self.peak_amplitudes
            .iter()
            .map(|(_, a)| (a / first - 1.0).abs())
            .fold(0.0, f64::max)
    }
}

/// Distance over which the closed-form delay shifts the pulse by one width,
/// `K / (nu <F> tau0)`; `None` in the uncoupled limit.
pub fn characteristic_length(medium: &MediumParams, pulse: &PulseParams, k: f64) -> Result<Option<f64>> {
    validate(*medium, *pulse)?;
    if medium.nu == 0.0 {
        return Ok(None);
    }
    let avg = line_averages(medium, pulse)?;
    Ok(Some(k / (medium.nu * avg.avg_f * pulse.tau0)))
}

const ATOM_CHUNK: usize = 8;

/// Lagrange weights for the value at fraction `c` of the interval between
/// stencil nodes `base` and `base + 1`, stencil `{0, 1, 2, 3}`.
fn lagrange4(t: f64) -> [f64; 4] {
    [
        -(t - 1.0) * (t - 2.0) * (t - 3.0) / 6.0,
        t * (t - 2.0) * (t - 3.0) / 2.0,
        -t * (t - 1.0) * (t - 3.0) / 2.0,
        t * (t - 1.0) * (t - 2.0) / 6.0,
    ]
}

/// Field at the two Gauss points of every interval, as the rotation-vector
/// components `(-Re A / 2, Im A / 2)`.
fn gauss_point_drive(a: &[Complex64]) -> Vec<[[f64; 2]; 2]> {
    let g = 3f64.sqrt() / 6.0;
    let cs = [0.5 - g, 0.5 + g];
    let n = a.len();
    (0..n - 1)
        .map(|j| {
            // stencil start, shifted inwards at the grid ends
            let start = j.saturating_sub(1).min(n - 4);
            let offset = (j - start) as f64;
            let mut out = [[0.0; 2]; 2];
            for (k, &c) in cs.iter().enumerate() {
                let w = lagrange4(offset + c);
                let v: Complex64 = (0..4).map(|i| a[start + i] * w[i]).sum();
                out[k] = [-0.5 * v.re, 0.5 * v.im];
            }
            out
        })
        .collect()
}

/// Ensemble-averaged `P` over the grid for one field, plus the worst norm
/// error met along the way. Atoms start from `(0, 0, S0)`.
fn polarization(ens: &BlochEnsemble, s0: f64, a: &[Complex64], h: f64) -> (Vec<Complex64>, f64) {
    let n = a.len();
    let drive = gauss_point_drive(a);
    let atoms: Vec<(f64, f64)> = ens.detunings.iter().copied().zip(ens.weights.iter().copied()).collect();
    let partial: Vec<(Vec<Complex64>, f64)> = atoms
        .par_chunks(ATOM_CHUNK)
        .map(|chunk| {
            let mut p = vec![Complex64::new(0.0, 0.0); n];
            let mut worst: f64 = 0.0;
            for &(delta, weight) in chunk {
                let mut s = [0.0, 0.0, s0];
                for j in 0..n {
                    p[j] += Complex64::new(weight * s[1], weight * s[0]);
                    if j + 1 < n {
                        let [g1, g2] = drive[j];
                        s = magnus_step(s, [g1[0], g1[1], delta], [g2[0], g2[1], delta], h);
                    }
                }
                worst = worst.max((s[0] * s[0] + s[1] * s[1] + s[2] * s[2] - 1.0).abs());
            }
            (p, worst)
        })
        .collect();
    // fixed-order reduction keeps results independent of thread scheduling
    let mut total = vec![Complex64::new(0.0, 0.0); n];
    let mut worst: f64 = 0.0;
    for (p, w) in partial {
        for (t, v) in total.iter_mut().zip(p) {
            *t += v;
        }
        worst = worst.max(w);
    }
    (total, worst)
}

/// Marches `initial` through `settings.steps` position steps.
///
/// Each step is a Heun predictor–corrector in `xi`: the ensemble is swept
/// over the whole retarded-time grid with the current field, the field is
/// predicted, the ensemble is swept again with the prediction, and the two
/// polarizations are averaged. The linear `K^2 - x^2` term is integrated
/// exactly. Atoms are advanced with a fourth-order Magnus rotation per grid
/// interval, driven by cubic interpolation of the field.
pub fn propagate(
    medium: &MediumParams,
    pulse: &PulseParams,
    initial: &FieldState,
    settings: &PropagationSettings,
) -> Result<PropagationRecord> {
    validate(*medium, *pulse)?;
    let n = initial.tau_grid.len();
    if n < 8 || initial.envelope.len() != n || initial.phase.len() != n {
        return Err(SitError::invalid("initial_field", "grid and field lengths disagree or grid too short"));
    }
    let h = initial.step();
    if !(h > 0.0) {
        return Err(SitError::invalid("initial_field", "grid must be increasing"));
    }
    if settings.steps == 0 || !(settings.dx.is_finite() && settings.dx > 0.0) {
        return Err(SitError::invalid("steps", "need steps >= 1 and dx > 0"));
    }
    if settings.snapshot_every == 0 {
        return Err(SitError::invalid("snapshot_every", "must be at least 1"));
    }
    if !(settings.k_scale.is_finite() && settings.k_scale > 0.0) {
        return Err(SitError::invalid("k_scale", "must be positive"));
    }

    let x = pulse.x;
    let k = match settings.wave_number {
        Some(k) => k,
        None => {
            let sol = solve(medium, pulse)?;
            match (sol.k_dimless, &sol.failure) {
                (Some(k), _) => k,
                (None, Some(e)) => return Err(e.clone()),
                (None, None) => unreachable!("solution without K always records a failure"),
            }
        }
    } * settings.k_scale;
    if !(k.is_finite() && k > 0.0) {
        return Err(SitError::InfiniteAbsorption { k });
    }
    let avg = line_averages(medium, pulse)?;
    let den = velocity_denominator(x, medium.nu, medium.s0, pulse.tau0, avg.avg_f);
    let reference_velocity = if den > 0.0 { k / den } else { k / x };
    let drift_slope = 1.0 / reference_velocity - x / k;

    let cutoff = match medium.lineshape {
        LineShape::SharpLine => 1.0,
        LineShape::Lorentzian => settings.cutoff / medium.omega0_tau_star.expect("validated"),
    };
    let ens = build_ensemble(medium, x, settings.atoms, cutoff)?;
    let coupling = 2.0 * medium.nu / k;
    let rot = Complex64::from_polar(1.0, -(k * k - x * x) / (2.0 * k) * settings.dx);
    let dx = settings.dx;

    let mut a = initial.complex();
    let energy0 = initial.energy();
    let mut position = initial.position;
    let mut snapshots = Vec::new();
    let mut max_norm_error: f64 = 0.0;
    let mut max_phase_tau: f64 = 0.0;
    let mut max_phase_drift: f64 = 0.0;
    let mut growth = 1.0;

    for step in 0..=settings.steps {
        let (p0, e0) = polarization(&ens, medium.s0, &a, h);
        max_norm_error = max_norm_error.max(e0);
        if step % settings.snapshot_every == 0 || step == settings.steps {
            snapshots.push(FieldState::from_complex(position, &initial.tau_grid, &a, &p0));
        }
        if step == settings.steps {
            break;
        }
        let predicted: Vec<Complex64> = a
            .iter()
            .zip(&p0)
            .map(|(a, p)| rot * (a + dx * coupling * p))
            .collect();
        let (p1, e1) = polarization(&ens, medium.s0, &predicted, h);
        max_norm_error = max_norm_error.max(e1);
        let next: Vec<Complex64> = a
            .iter()
            .zip(p0.iter().zip(&p1))
            .map(|(a, (p0, p1))| rot * (a + 0.5 * dx * coupling * p0) + 0.5 * dx * coupling * p1)
            .collect();

        let peak = next.iter().map(|v| v.norm()).fold(0.0, f64::max);
        if peak > 0.0 {
            let floor = 0.1 * peak;
            for j in 1..n - 1 {
                if next[j].norm() < floor || a[j].norm() < floor {
                    continue;
                }
                let phi_tau = (next[j + 1] * next[j - 1].conj()).arg() / (2.0 * h);
                let phi_xi = (next[j] * a[j].conj()).arg() / dx;
                max_phase_tau = max_phase_tau.max(phi_tau.abs());
                max_phase_drift = max_phase_drift.max(reference_velocity * (phi_xi + drift_slope * phi_tau).abs());
            }
        }

        a = next;
        position += dx;
        let energy = h * a.iter().map(|v| v.norm_sqr()).sum::<f64>();
        if !energy.is_finite() {
            return Err(SitError::Instability {
                position,
                growth: f64::INFINITY,
            });
        }
        if energy0 > 0.0 {
            growth = energy / energy0;
            if medium.is_absorber() && growth > settings.abort_growth {
                return Err(SitError::Instability { position, growth });
            }
        }
    }

    let mut peak_trajectory = Vec::new();
    let mut peak_amplitudes = Vec::new();
    let mut area_history = Vec::new();
    for s in &snapshots {
        area_history.push((s.position, s.area()));
        if let Some((t, v)) = s.peak() {
            peak_trajectory.push((s.position, t));
            peak_amplitudes.push((s.position, v));
        }
    }
    let mut record = PropagationRecord {
        snapshots,
        peak_trajectory,
        peak_amplitudes,
        area_history,
        measured_velocity: None,
        x,
        k,
        reference_velocity,
        max_norm_error,
        max_phase_tau,
        max_phase_drift,
        energy_growth: growth,
        cfl_ratio: dx / (h * x / k),
    };
    record.measured_velocity = measure_velocity(&record).ok().map(|f| f.v);
    Ok(record)
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct VelocityFit {
    /// Lab-frame velocity `V = 1 / (x/K + slope)`.
    pub v: f64,
    /// Retarded-time drift of the peak per unit position.
    pub slope: f64,
    /// RMS residual of the linear fit, in retarded time.
    pub residual: f64,
    pub points: usize,
}

/// Least-squares line through the peak trajectory.
///
/// Peaks that have fallen below 1e-3 of the launch peak, or sit within two
/// nodes of the window edge, are not trackable.
pub fn measure_velocity(record: &PropagationRecord) -> Result<VelocityFit> {
    let Some(&(_, launch)) = record.peak_amplitudes.first() else {
        return Err(SitError::PeakUntrackable("no peak in any snapshot".into()));
    };
    let mut pts = Vec::new();
    for (s, (&(xi, tau), &(_, amp))) in record
        .snapshots
        .iter()
        .zip(record.peak_trajectory.iter().zip(&record.peak_amplitudes))
    {
        let h = s.step();
        let lo = s.tau_grid[0] + 2.0 * h;
        let hi = s.tau_grid[s.tau_grid.len() - 1] - 2.0 * h;
        if amp < 1e-3 * launch || tau < lo || tau > hi {
            return Err(SitError::PeakUntrackable(format!(
                "peak at position {xi} is lost (amplitude {amp:.3e}, tau {tau:.3e})"
            )));
        }
        pts.push((xi, tau));
    }
    if pts.len() < 3 {
        return Err(SitError::PeakUntrackable(format!("need at least 3 snapshots, have {}", pts.len())));
    }
    let m = pts.len() as f64;
    let mx = pts.iter().map(|p| p.0).sum::<f64>() / m;
    let my = pts.iter().map(|p| p.1).sum::<f64>() / m;
    let sxx: f64 = pts.iter().map(|p| (p.0 - mx).powi(2)).sum();
    let sxy: f64 = pts.iter().map(|p| (p.0 - mx) * (p.1 - my)).sum();
    let slope = sxy / sxx;
    let residual = (pts
        .iter()
        .map(|p| (p.1 - my - slope * (p.0 - mx)).powi(2))
        .sum::<f64>()
        / m)
        .sqrt();
    let v = 1.0 / (record.x / record.k + slope);
    if !(v.is_finite() && v > 0.0) {
        return Err(SitError::PeakUntrackable(format!("fitted slope {slope:.6e} gives no forward velocity")));
    }
    Ok(VelocityFit {
        v,
        slope,
        residual,
        points: pts.len(),
    })
}
