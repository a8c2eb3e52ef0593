//! Unit conversions between experimental (eV) and Hartree atomic units.
//!
//! All model formulas work in atomic units: energies in hartree, lengths
//! in bohr, cross sections in bohr^2. Photon energies on external
//! interfaces are in eV.

/// One hartree expressed in electron volts (CODATA 2018).
pub const EV_PER_HARTREE: f64 = 27.211386245988;

/// One bohr^2 expressed in cm^2. Display-only conversion for cross sections.
pub const CM2_PER_BOHR2: f64 = 2.8002852e-17;

/// Convert an energy in eV to hartree.
pub fn ev_to_hartree(ev: f64) -> f64 {
    ev / EV_PER_HARTREE
}

/// Convert an energy in hartree to eV.
pub fn hartree_to_ev(hartree: f64) -> f64 {
    hartree * EV_PER_HARTREE
}

/// Convert a cross section in atomic units (bohr^2) to cm^2.
pub fn au_area_to_cm2(au: f64) -> f64 {
    au * CM2_PER_BOHR2
}
