//! Total photodetachment cross section against photon energy: the smooth
//! free-space sigma0 and the wall-modulated sigma for one wall, plus the
//! full fig3 preset written to CSV.

use photodetach::sweep::{preset_fig3, write_table};
use photodetach::units::ev_to_hartree;
use photodetach::{IonModel, SurfaceModel};
use std::path::Path;

fn main() {
    let ion = IonModel::h_minus();
    let surface = SurfaceModel::new(1.0, 2.0, 100.0).unwrap();

    println!("E_ph (eV)   sigma0 (a.u.)   sigma (a.u.)   sigma/sigma0");
    for i in 0..=10 {
        let eph = 0.8 + 0.1 * i as f64;
        let e = ev_to_hartree(eph) - ion.binding_energy();
        let s0 = photodetach::sigma0(&ion, e).unwrap();
        let st = photodetach::sigma_total(&ion, &surface, e).unwrap();
        println!("{eph:9.2}   {s0:13.6e}   {st:12.6e}   {:10.6}", st / s0);
    }

    let table = preset_fig3().unwrap();
    let path = Path::new("fig3_cross_section.csv");
    write_table(&table, path).unwrap();
    println!(
        "\nwrote {} ({} rows x {} columns)",
        path.display(),
        table.rows().len(),
        table.columns().len()
    );
}
