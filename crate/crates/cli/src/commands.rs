use std::path::Path;

use rayon::prelude::*;
use serde_json::{Map, Value};
use sit_core::dispersion::{critical_width, minimize_critical_width};
use sit_core::mbe::{area_theorem_evolve, beta_coefficient, characteristic_length, propagate, FieldState, PropagationSettings};
use sit_core::{solve, solve_with, validate, BroadenedForm, DispersionSolution, LineShape, MediumParams, PulseParams, SitError};

use crate::config::Params;
use crate::error::CliError;
use crate::output::{col, emit, object, Cell, Column, Format, Table, VERSION};

const MEDIUM_KEYS: [&str; 4] = ["nu", "s0", "lineshape", "omega0_tau_star"];
const PULSE_KEYS: [&str; 3] = ["x", "tau0", "y"];
const SWEEP_KEYS: [&str; 4] = ["sweep", "start", "stop", "count"];
const SIM_KEYS: [&str; 13] = [
    "area_pi",
    "points",
    "window",
    "launch_offset",
    "steps",
    "lengths",
    "length",
    "snapshot_every",
    "atoms",
    "cutoff",
    "k_scale",
    "abort_growth",
    "eq18_literal",
];

fn keys(groups: &[&[&'static str]]) -> Vec<&'static str> {
    groups.iter().flat_map(|g| g.iter().copied()).collect()
}

fn medium_from(p: &Params, echo: &mut Vec<(String, Cell)>) -> Result<MediumParams, CliError> {
    let nu = p.f64_or("nu", 1.0)?;
    let s0 = p.f64_or("s0", -1.0)?;
    let tau_star = p.f64("omega0_tau_star")?;
    let lineshape = match p.raw("lineshape") {
        Some("sharp") => LineShape::SharpLine,
        Some("lorentzian") => LineShape::Lorentzian,
        Some(other) => return Err(CliError::usage(format!("`lineshape`: expected sharp or lorentzian, got `{other}`"))),
        None if tau_star.is_some() => LineShape::Lorentzian,
        None => LineShape::SharpLine,
    };
    let medium = MediumParams {
        nu,
        omega0_tau_star: tau_star,
        s0,
        lineshape,
    };
    medium.validate()?;
    echo.push(("nu".into(), Cell::num(nu)));
    echo.push(("s0".into(), Cell::num(s0)));
    echo.push((
        "lineshape".into(),
        Cell::text(match lineshape {
            LineShape::SharpLine => "sharp",
            LineShape::Lorentzian => "lorentzian",
        }),
    ));
    if let Some(t) = tau_star {
        echo.push(("omega0_tau_star".into(), Cell::num(t)));
    }
    Ok(medium)
}

fn tau_star_for_y(medium: &MediumParams) -> Result<f64, CliError> {
    match (medium.lineshape, medium.omega0_tau_star) {
        (LineShape::Lorentzian, Some(t)) => Ok(t),
        _ => Err(CliError::usage("`y` needs the lorentzian line shape with omega0_tau_star")),
    }
}

/// Pulse width from `tau0` or `y`, whichever was given.
fn width_from(p: &Params, medium: &MediumParams, echo: &mut Vec<(String, Cell)>) -> Result<Option<f64>, CliError> {
    match (p.f64("tau0")?, p.f64("y")?) {
        (Some(_), Some(_)) => Err(CliError::usage("give either `tau0` or `y`, not both")),
        (Some(t), None) => {
            echo.push(("tau0".into(), Cell::num(t)));
            Ok(Some(t))
        }
        (None, Some(y)) => {
            let t = y * tau_star_for_y(medium)?;
            echo.push(("y".into(), Cell::num(y)));
            echo.push(("tau0".into(), Cell::num(t)));
            Ok(Some(t))
        }
        (None, None) => Ok(None),
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
enum SweepVar {
    X,
    Tau0,
    Y,
}

/// Grid of pulses: a sweep over one variable, or the single fixed point.
fn pulse_grid(p: &Params, medium: &MediumParams, echo: &mut Vec<(String, Cell)>) -> Result<Vec<PulseParams>, CliError> {
    let var = match p.raw("sweep") {
        None => None,
        Some("x") => Some(SweepVar::X),
        Some("tau0") => Some(SweepVar::Tau0),
        Some("y") => Some(SweepVar::Y),
        Some(other) => return Err(CliError::usage(format!("`sweep`: expected x, tau0 or y, got `{other}`"))),
    };
    let Some(var) = var else {
        if ["start", "stop", "count"].iter().any(|k| p.contains(k)) {
            return Err(CliError::usage("`start`/`stop`/`count` need `sweep`"));
        }
        let x = p.f64_or("x", 1.0)?;
        echo.push(("x".into(), Cell::num(x)));
        let tau0 = width_from(p, medium, echo)?.unwrap_or_else(|| {
            echo.push(("tau0".into(), Cell::num(1.0)));
            1.0
        });
        let pulse = PulseParams::new(x, tau0);
        validate(*medium, pulse)?;
        return Ok(vec![pulse]);
    };

    let swept_fixed = match var {
        SweepVar::X => p.contains("x"),
        SweepVar::Tau0 | SweepVar::Y => p.contains("tau0") || p.contains("y"),
    };
    if swept_fixed {
        return Err(CliError::usage("the swept variable cannot also be fixed"));
    }
    let (Some(start), Some(stop)) = (p.f64("start")?, p.f64("stop")?) else {
        return Err(CliError::usage("a sweep needs `start` and `stop`"));
    };
    let count = p.usize_or("count", 101)?;
    if count < 2 {
        return Err(CliError::usage(format!("`count` must be at least 2, got {count}")));
    }
    if !(start.is_finite() && stop.is_finite() && start < stop) {
        return Err(CliError::usage(format!("need start < stop, got {start} and {stop}")));
    }
    echo.push((
        "sweep".into(),
        Cell::text(match var {
            SweepVar::X => "x",
            SweepVar::Tau0 => "tau0",
            SweepVar::Y => "y",
        }),
    ));
    echo.push(("start".into(), Cell::num(start)));
    echo.push(("stop".into(), Cell::num(stop)));
    echo.push(("count".into(), Cell::Int(count as u64)));

    let values = linspace(start, stop, count);
    let grid: Vec<PulseParams> = match var {
        SweepVar::X => {
            let tau0 = width_from(p, medium, echo)?.unwrap_or_else(|| {
                echo.push(("tau0".into(), Cell::num(1.0)));
                1.0
            });
            values.iter().map(|&x| PulseParams::new(x, tau0)).collect()
        }
        SweepVar::Tau0 | SweepVar::Y => {
            let x = p.f64_or("x", 1.0)?;
            echo.push(("x".into(), Cell::num(x)));
            let scale = if var == SweepVar::Y { tau_star_for_y(medium)? } else { 1.0 };
            values.iter().map(|&v| PulseParams::new(x, v * scale)).collect()
        }
    };
    for end in [grid[0], grid[count - 1]] {
        validate(*medium, end)?;
    }
    Ok(grid)
}

fn linspace(start: f64, stop: f64, count: usize) -> Vec<f64> {
    let h = (stop - start) / (count - 1) as f64;
    (0..count)
        .map(|i| if i + 1 == count { stop } else { start + h * i as f64 })
        .collect()
}

fn form_from(p: &Params, echo: &mut Vec<(String, Cell)>) -> Result<BroadenedForm, CliError> {
    let literal = p.bool_or("eq18_literal", false)?;
    echo.push(("eq18_literal".into(), Cell::Bool(literal)));
    Ok(if literal { BroadenedForm::Quartic } else { BroadenedForm::Canonical })
}

fn solve_grid(medium: &MediumParams, grid: &[PulseParams], form: BroadenedForm) -> Result<Vec<DispersionSolution>, CliError> {
    let solved: Vec<Result<DispersionSolution, SitError>> =
        grid.par_iter().map(|pulse| solve_with(medium, pulse, form)).collect();
    solved.into_iter().map(|r| r.map_err(CliError::from)).collect()
}

fn pulse_cells(medium: &MediumParams, sol: &DispersionSolution) -> [Cell; 3] {
    let y = PulseParams::new(sol.x, sol.tau0).y(medium);
    [Cell::num(sol.x), Cell::num(sol.tau0), Cell::Num(y)]
}

fn reason(sol: &DispersionSolution) -> Cell {
    Cell::text(sol.failure.as_ref().map(SitError::kind).unwrap_or(""))
}

const PULSE_COLUMNS: [Column; 3] = [col("x", "omega/omega0"), col("tau0", "1/omega0"), col("y", "tau_p/tau*")];

type SweepSetup = (MediumParams, Vec<PulseParams>, BroadenedForm, Vec<(String, Cell)>);

fn sweep_setup(p: &Params) -> Result<SweepSetup, CliError> {
    p.check_keys(&keys(&[&MEDIUM_KEYS, &PULSE_KEYS, &SWEEP_KEYS, &["eq18_literal"]]))?;
    let mut echo = Vec::new();
    let medium = medium_from(p, &mut echo)?;
    let grid = pulse_grid(p, &medium, &mut echo)?;
    let form = form_from(p, &mut echo)?;
    Ok((medium, grid, form, echo))
}

/// `K` along the grid; rows without a carrier leave `k` empty.
pub fn dispersion(p: &Params) -> Result<Table, CliError> {
    let (medium, grid, form, echo) = sweep_setup(p)?;
    let mut columns = PULSE_COLUMNS.to_vec();
    columns.extend([
        col("k", "omega0/c"),
        col("k_squared", "(omega0/c)^2"),
        col("exists", ""),
        col("reason", ""),
    ]);
    let mut table = Table::new("dispersion", echo, columns);
    for sol in solve_grid(&medium, &grid, form)? {
        let mut row = pulse_cells(&medium, &sol).to_vec();
        row.extend([
            Cell::Num(sol.k_dimless),
            Cell::num(sol.k_squared),
            Cell::Bool(sol.exists()),
            reason(&sol),
        ]);
        table.rows.push(row);
    }
    Ok(table)
}

/// `V` and regime along the grid.
pub fn velocity(p: &Params) -> Result<Table, CliError> {
    let (medium, grid, form, echo) = sweep_setup(p)?;
    let mut columns = PULSE_COLUMNS.to_vec();
    columns.extend([
        col("v", "c"),
        col("regime", ""),
        col("k", "omega0/c"),
        col("gamma", ""),
        col("exists", ""),
        col("reason", ""),
    ]);
    let mut table = Table::new("velocity", echo, columns);
    for sol in solve_grid(&medium, &grid, form)? {
        let mut row = pulse_cells(&medium, &sol).to_vec();
        row.extend([
            Cell::Num(sol.v_dimless),
            Cell::text(sol.regime.map(|r| r.as_str()).unwrap_or("")),
            Cell::Num(sol.k_dimless),
            Cell::num(sol.gamma_factor),
            Cell::Bool(sol.exists()),
            reason(&sol),
        ]);
        table.rows.push(row);
    }
    Ok(table)
}

/// Critical width over `x` for a sharp-line absorber, with its minimum.
pub fn critical(p: &Params) -> Result<Table, CliError> {
    p.check_keys(&["nu", "start", "stop", "count"])?;
    let nu = p.f64_or("nu", 1.0)?;
    let start = p.f64_or("start", 0.5)?;
    let stop = p.f64_or("stop", 2.5)?;
    let count = p.usize_or("count", 201)?;
    if count < 2 {
        return Err(CliError::usage(format!("`count` must be at least 2, got {count}")));
    }
    if !(start.is_finite() && stop.is_finite() && 0.0 < start && start < stop) {
        return Err(CliError::usage(format!("need 0 < start < stop, got {start} and {stop}")));
    }
    let best = minimize_critical_width(nu)?;
    let echo = vec![
        ("nu".into(), Cell::num(nu)),
        ("start".into(), Cell::num(start)),
        ("stop".into(), Cell::num(stop)),
        ("count".into(), Cell::Int(count as u64)),
    ];
    let mut table = Table::new(
        "critical",
        echo,
        vec![col("x", "omega/omega0"), col("tau0_crit", "1/omega0"), col("in_domain", "")],
    );
    table.summary = vec![
        ("x_at_min".into(), Cell::num(best.x_at_min)),
        ("tau0_crit_min".into(), Cell::num(best.tau0_crit)),
        ("domain_lower".into(), Cell::num(best.domain.0)),
        ("domain_upper".into(), Cell::num(best.domain.1)),
    ];
    let xs = linspace(start, stop, count);
    let widths: Vec<Result<f64, SitError>> = xs.par_iter().map(|&x| critical_width(x, nu)).collect();
    for (x, w) in xs.into_iter().zip(widths) {
        let tau = match w {
            Ok(t) => Some(t),
            Err(SitError::OutOfDomain { .. }) => None,
            Err(e) => return Err(e.into()),
        };
        table.rows.push(vec![Cell::num(x), Cell::Num(tau), Cell::Bool(tau.is_some())]);
    }
    Ok(table)
}

/// Area law from `theta0`, with `beta` given or taken from the medium.
pub fn area(p: &Params) -> Result<Table, CliError> {
    p.check_keys(&keys(&[&MEDIUM_KEYS, &PULSE_KEYS, &["theta0", "beta", "x_max", "steps", "eq18_literal"]]))?;
    let theta0 = p.f64("theta0")?.ok_or_else(|| CliError::usage("`theta0` is required"))?;
    let x_max = p.f64_or("x_max", 10.0)?;
    let steps = p.usize_or("steps", 100)?;
    let mut echo = vec![("theta0".into(), Cell::num(theta0))];
    let mut summary = Vec::new();
    let beta = match p.f64("beta")? {
        Some(b) => {
            if MEDIUM_KEYS.iter().chain(&PULSE_KEYS).any(|k| p.contains(k)) {
                return Err(CliError::usage("give either `beta` or the medium and pulse, not both"));
            }
            b
        }
        None => {
            let medium = medium_from(p, &mut echo)?;
            let grid = pulse_grid(p, &medium, &mut echo)?;
            let form = form_from(p, &mut echo)?;
            let tau_star = medium
                .omega0_tau_star
                .ok_or_else(|| CliError::usage("deriving `beta` needs the lorentzian line shape"))?;
            let sol = solve_with(&medium, &grid[0], form)?;
            let k = match (sol.k_dimless, sol.failure) {
                (Some(k), _) => k,
                (None, Some(e)) => return Err(e.into()),
                (None, None) => unreachable!("missing K always records a failure"),
            };
            summary.push(("k".into(), Cell::num(k)));
            beta_coefficient(&medium, k, tau_star)?
        }
    };
    echo.push(("beta".into(), Cell::num(beta)));
    echo.push(("x_max".into(), Cell::num(x_max)));
    echo.push(("steps".into(), Cell::Int(steps as u64)));
    let samples = area_theorem_evolve(theta0, beta, x_max, steps)?;
    let mut table = Table::new(
        "area",
        echo,
        vec![col("x", "c/omega0"), col("theta_numeric", "rad"), col("theta_closed_form", "rad")],
    );
    table.summary = summary;
    table.rows = samples
        .iter()
        .map(|s| vec![Cell::num(s.x), Cell::num(s.theta_numeric), Cell::num(s.theta_closed_form)])
        .collect();
    Ok(table)
}

/// Runs one propagation and writes `snapshots.{csv,json}` and
/// `summary.json` into `dir`.
pub fn simulate(p: &Params, dir: &Path, format: Format) -> Result<(), CliError> {
    p.check_keys(&keys(&[&MEDIUM_KEYS, &PULSE_KEYS, &SIM_KEYS]))?;
    let mut echo = Vec::new();
    let medium = medium_from(p, &mut echo)?;
    let pulse = pulse_grid(p, &medium, &mut echo)?[0];
    let form = form_from(p, &mut echo)?;
    if form == BroadenedForm::Quartic {
        return Err(CliError::usage("`simulate` integrates the field equations; `eq18_literal` does not apply"));
    }

    let area_pi = p.f64_or("area_pi", 2.0)?;
    let points = p.usize_or("points", 2048)?;
    let window = p.f64_or("window", 20.0)?;
    let offset = p.f64_or("launch_offset", -5.0)?;
    let steps = p.usize_or("steps", 500)?;
    let mut settings = PropagationSettings::new(steps, 1.0);
    settings.snapshot_every = p.usize_or("snapshot_every", settings.snapshot_every)?;
    settings.atoms = p.usize_or("atoms", settings.atoms)?;
    settings.cutoff = p.f64_or("cutoff", settings.cutoff)?;
    settings.k_scale = p.f64_or("k_scale", settings.k_scale)?;
    settings.abort_growth = p.f64_or("abort_growth", settings.abort_growth)?;

    let sol = solve(&medium, &pulse)?;
    let k = match (sol.k_dimless, &sol.failure) {
        (Some(k), _) => k,
        (None, Some(e)) => return Err(e.clone().into()),
        (None, None) => unreachable!("missing K always records a failure"),
    };
    let length = match (p.f64("length")?, p.contains("lengths")) {
        (Some(_), true) => return Err(CliError::usage("give either `length` or `lengths`, not both")),
        (Some(l), false) => l,
        (None, _) => {
            let lengths = p.f64_or("lengths", 10.0)?;
            echo.push(("lengths".into(), Cell::num(lengths)));
            match characteristic_length(&medium, &pulse, k * settings.k_scale)? {
                Some(lc) => lengths * lc,
                None => return Err(CliError::usage("uncoupled medium: give `length` explicitly")),
            }
        }
    };
    if !(length.is_finite() && length > 0.0) || steps == 0 {
        return Err(CliError::usage(format!("need length > 0 and steps >= 1, got {length} and {steps}")));
    }
    settings.dx = length / steps as f64;
    echo.extend([
        ("area_pi".into(), Cell::num(area_pi)),
        ("points".into(), Cell::Int(points as u64)),
        ("window".into(), Cell::num(window)),
        ("launch_offset".into(), Cell::num(offset)),
        ("steps".into(), Cell::Int(steps as u64)),
        ("length".into(), Cell::num(length)),
        ("snapshot_every".into(), Cell::Int(settings.snapshot_every as u64)),
        ("atoms".into(), Cell::Int(settings.atoms as u64)),
        ("cutoff".into(), Cell::num(settings.cutoff)),
        ("k_scale".into(), Cell::num(settings.k_scale)),
        ("abort_growth".into(), Cell::num(settings.abort_growth)),
    ]);

    let initial = FieldState::sech_pulse(pulse.tau0, area_pi, points, window, offset)?;
    let record = propagate(&medium, &pulse, &initial, &settings)?;

    std::fs::create_dir_all(dir).map_err(|e| CliError::io(format!("cannot create {}: {e}", dir.display())))?;
    let mut snaps = Table::new(
        "simulate",
        echo.clone(),
        vec![
            col("position", "c/omega0"),
            col("tau", "1/omega0"),
            col("envelope", "omega0"),
            col("phase", "rad"),
            col("sy_avg", ""),
        ],
    );
    for s in &record.snapshots {
        for i in 0..s.tau_grid.len() {
            snaps.rows.push(vec![
                Cell::num(s.position),
                Cell::num(s.tau_grid[i]),
                Cell::num(s.envelope[i]),
                Cell::num(s.phase[i]),
                Cell::num(s.sy_avg[i]),
            ]);
        }
    }
    let name = match format {
        Format::Csv => "snapshots.csv",
        Format::Json => "snapshots.json",
    };
    emit(&snaps.render(format), Some(&dir.join(name)))?;

    let pairs = |v: &[(f64, f64)]| -> Value {
        Value::from(
            v.iter()
                .map(|&(a, b)| Value::from(vec![Cell::num(a).json(), Cell::num(b).json()]))
                .collect::<Vec<_>>(),
        )
    };
    let monotone = record.area_history.windows(2).all(|w| w[1].1 < w[0].1);
    let velocity_error = match (record.measured_velocity, sol.v_dimless) {
        (Some(m), Some(v)) => Some((m - v) / v),
        _ => None,
    };
    let scalars = vec![
        ("k".to_string(), Cell::num(record.k)),
        ("closed_form_velocity".into(), Cell::Num(sol.v_dimless)),
        ("measured_velocity".into(), Cell::Num(record.measured_velocity)),
        ("velocity_relative_error".into(), Cell::Num(velocity_error)),
        ("reference_velocity".into(), Cell::num(record.reference_velocity)),
        ("max_norm_error".into(), Cell::num(record.max_norm_error)),
        ("phase_stationarity".into(), Cell::num(record.phase_stationarity())),
        ("peak_drift".into(), Cell::num(record.peak_drift())),
        ("energy_growth".into(), Cell::num(record.energy_growth)),
        ("cfl_ratio".into(), Cell::num(record.cfl_ratio)),
        ("area_monotone_decreasing".into(), Cell::Bool(monotone)),
    ];
    let mut doc = Map::new();
    doc.insert("version".into(), Value::from(VERSION));
    doc.insert("command".into(), Value::from("simulate"));
    doc.insert("parameters".into(), object(&echo));
    if let Value::Object(m) = object(&scalars) {
        doc.extend(m);
    }
    doc.insert("area_history".into(), pairs(&record.area_history));
    doc.insert("peak_trajectory".into(), pairs(&record.peak_trajectory));
    doc.insert("peak_amplitudes".into(), pairs(&record.peak_amplitudes));
    let mut text = serde_json::to_string_pretty(&Value::Object(doc)).expect("serializable");
    text.push('\n');
    emit(&text, Some(&dir.join("summary.json")))
}
