//! Reduced Maxwell–Bloch oracle: the Bloch system driven by a propagating
//! envelope, marched in a retarded frame over a discretized detuning
//! ensemble, and the area-theorem ODE.

mod area;
mod bloch;
mod ensemble;
mod propagate;

pub use area::{area_closed_form, area_theorem_evolve, beta_coefficient, AreaSample};
pub use bloch::{bloch_rhs, magnus_step, BlochVector};
pub use ensemble::{build_ensemble, BlochEnsemble, DEFAULT_ATOMS, DEFAULT_CUTOFF};
pub use propagate::{
    characteristic_length, measure_velocity, propagate, FieldState, PropagationRecord, PropagationSettings,
    VelocityFit,
};
