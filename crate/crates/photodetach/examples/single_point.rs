//! Evaluate every closed-form quantity at one working point.

use photodetach::model::{Angle, DetachmentPoint, IonModel, SurfaceModel};
use photodetach::units::{au_area_to_cm2, ev_to_hartree};
use std::f64::consts::PI;

fn main() {
    let ion = IonModel::h_minus();
    let surface = SurfaceModel::new(0.7, 1.5, 100.0).unwrap();

    let photon_ev = 1.0;
    let point =
        DetachmentPoint::from_photon_energy(&ion, &surface, ev_to_hartree(photon_ev)).unwrap();
    let e = point.electron_energy();

    println!("photon energy        : {photon_ev} eV");
    println!("electron energy      : {e:.6e} hartree");
    println!("wavenumber k         : {:.6e} a.u.", point.wavenumber());
    println!("round-trip action u  : {:.6e}", point.action());
    println!("absorption T         : {:.6e}", surface.absorption());
    println!();

    let s0 = photodetach::sigma0(&ion, e).unwrap();
    let s1 = photodetach::sigma1(&ion, &surface, e).unwrap();
    let s2 = photodetach::sigma2(&ion, &surface, e).unwrap();
    let st = photodetach::sigma_total(&ion, &surface, e).unwrap();
    let a = photodetach::modulation(point.action(), &surface).unwrap();
    println!("sigma0               : {s0:.9e} a.u.  ({:.3e} cm^2)", au_area_to_cm2(s0));
    println!("sigma1 (outgoing)    : {s1:.9e} a.u.");
    println!("sigma2 (absorbed)    : {s2:.9e} a.u.");
    println!("sigma  (total)       : {st:.9e} a.u.");
    println!("modulation A(u)      : {a:.9e}");
    println!("sigma1 + sigma2      : {:.9e} a.u.", s1 + s2);
    println!();

    // angular structure of the outgoing flux at r = 1e4 bohr
    let r = 1e4;
    println!("theta/pi  j_r*r^2 (a.u.)   dsigma/ds (a.u.)");
    for i in 0..=8 {
        let theta = PI / 2.0 * i as f64 / 8.0;
        let dir = Angle::polar(theta).unwrap();
        let jr = photodetach::radial_flux(&ion, &surface, e, r, dir).unwrap();
        let ds = photodetach::differential_cross_section(&ion, &surface, e, dir).unwrap();
        println!("{:8.4}  {:16.9e}  {:16.9e}", theta / PI, jr * r * r, ds);
    }
}
