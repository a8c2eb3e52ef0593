//! Interference fringes of the electron flux on a distant screen.
//!
//! Counts the local maxima of j_z(rho) for each wall in the fig4 parameter
//! set and writes the preset table to CSV.

use photodetach::sweep::{preset_fig4, write_table};
use photodetach::units::ev_to_hartree;
use photodetach::{fringe_count, IonModel, ScreenGeometry, SurfaceModel};
use std::path::Path;

fn main() {
    let ion = IonModel::h_minus();
    let geometry = ScreenGeometry::new(1e4, 4e5, 4001).unwrap();
    let energy = ev_to_hartree(1.0) - ion.binding_energy();

    println!("E_ph = 1 eV, d = 100 bohr, L = {} bohr", geometry.screen_distance());
    for mu in [1.0, 2.0] {
        for k in [1.0, 0.5, 0.1] {
            let surface = SurfaceModel::new(k, mu, 100.0).unwrap();
            let fringes = fringe_count(&ion, &surface, energy, &geometry).unwrap();
            let axis = photodetach::screen_flux(&ion, &surface, energy, &geometry, 0.0).unwrap();
            println!(
                "K = {k:>3}, mu = {mu}: {fringes} fringe maxima, j_z(0) = {axis:.6e} a.u."
            );
        }
    }

    let table = preset_fig4().unwrap();
    let path = Path::new("fig4_screen_flux.csv");
    write_table(&table, path).unwrap();
    println!(
        "\nwrote {} ({} rows x {} columns)",
        path.display(),
        table.rows().len(),
        table.columns().len()
    );
}
