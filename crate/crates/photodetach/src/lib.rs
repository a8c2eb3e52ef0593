//! Photodetachment of H- near a partially reflecting wall.
//!
//! The detached-electron wave reaches a distant observer along two paths,
//! directly and via one reflection off a wall a distance `d` from the ion.
//! A reflection parameter `K` (0 = transparent, 1 = mirror) and a phase
//! index `mu` characterize the wall; whatever is not reflected is absorbed.
//! The crate provides:
//!
//! - [`model`]: the closed-form cross sections, fluxes and the modulation
//!   function, as pure functions in Hartree atomic units;
//! - [`oracle`]: independent brute-force rebuilds of every closed form by
//!   adaptive quadrature and finite differences, plus the validation grid;
//! - [`quadrature`]: the adaptive Gauss-Kronrod integrator behind the
//!   oracles;
//! - [`fit`]: recovery of `(K, mu, d)` from a sampled cross-section
//!   spectrum by grid search plus damped Gauss-Newton refinement;
//! - [`sweep`]: deterministic parameter sweeps and CSV tables, including
//!   the bundled `fig2`/`fig3`/`fig4` presets;
//! - [`units`]: eV/hartree conversions.

pub mod fit;
pub mod model;
pub mod oracle;
pub mod quadrature;
pub mod sweep;
pub mod units;

pub use model::{
    a1, absorbed_flux, differential_cross_section, modulation, outgoing_wave, radial_flux,
    screen_flux, sigma0, sigma1, sigma2, sigma_total, Angle, DetachmentPoint, IonModel,
    ModelError, ScreenGeometry, SurfaceModel,
};
pub use oracle::{
    fringe_count, oracle_flux_from_wave, oracle_screen_total, oracle_sigma1, oracle_sigma2,
    run_validation_grid, OracleError, ValidationCheck, ValidationGrid, ValidationTolerances,
};
pub use quadrature::{integrate_adaptive, QuadratureError, QuadratureResult, QuadratureSpec};
pub use units::{ev_to_hartree, hartree_to_ev};
