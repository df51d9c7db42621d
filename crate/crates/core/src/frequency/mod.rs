//! Spectral checks, resolvent norms along the imaginary axis and power-law
//! fits of resolvent growth and energy decay.

mod fit;
mod resolvent;
mod spectrum;
mod sweep;

pub use fit::{
    decay_fit, decay_fit_above_floor, fit_power_law, thin_logarithmically, DecayFit, MIN_R_SQUARED, THINNED_SAMPLES,
};
pub use resolvent::{
    dense_resolvent_norm, energy_coordinates, resolvent_norm, resolvent_norm_with, ImaginaryResolvent,
    ResolventOptions, DENSE_FALLBACK_DIM, MAX_DENSE_DIM,
};
pub use spectrum::{spectrum_check, SpectrumReport};
pub use sweep::{
    damped_eigenvalue_near, fit_sweep, sweep, sweep_and_fit, undamped_frequencies, validity_window, ResolventSweep,
    SweepOptions, ValidityWindow, MIN_FIT_POINTS,
};
