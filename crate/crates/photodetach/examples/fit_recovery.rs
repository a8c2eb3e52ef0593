//! Round-trip a wall through a synthesized spectrum and the fitter:
//! noiseless, with 1% noise, and the degenerate transparent-wall case.

use photodetach::fit::{fit_surface, synthesize_spectrum, FitBounds};
use photodetach::units::hartree_to_ev;
use photodetach::{IonModel, SurfaceModel};

fn main() {
    let ion = IonModel::h_minus();
    let threshold = hartree_to_ev(ion.binding_energy());
    let grid: Vec<f64> =
        (0..200).map(|i| threshold + 0.05 + 0.95 * i as f64 / 199.0).collect();
    let bounds = FitBounds::default();

    let truth = SurfaceModel::new(0.7, 1.5, 100.0).unwrap();
    println!("truth: K = 0.7, mu = 1.5, d = 100 bohr\n");

    let clean = synthesize_spectrum(&ion, &truth, &grid, 0.0, 0).unwrap();
    let result = fit_surface(&clean, Some(100.0), &bounds).unwrap();
    println!("noiseless, d known:\n{}", result.to_key_value_block());

    let noisy = synthesize_spectrum(&ion, &truth, &grid, 0.01, 7).unwrap();
    let result = fit_surface(&noisy, Some(100.0), &bounds).unwrap();
    println!("1% multiplicative noise, d known:\n{}", result.to_key_value_block());

    let free_d = fit_surface(&noisy, None, &bounds).unwrap();
    println!("1% noise, d fitted too:\n{}", free_d.to_key_value_block());

    let flat = synthesize_spectrum(
        &ion,
        &SurfaceModel::new(0.0, 1.0, 100.0).unwrap(),
        &grid,
        0.0,
        0,
    )
    .unwrap();
    let degenerate = fit_surface(&flat, Some(100.0), &bounds).unwrap();
    println!("transparent wall (K = 0):\n{}", degenerate.to_key_value_block());
    assert!(degenerate.degenerate);
}
