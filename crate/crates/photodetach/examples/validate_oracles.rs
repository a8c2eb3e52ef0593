//! Check every closed form against its brute-force quadrature oracle on the
//! full validation grid and print the CSV report.

use photodetach::{run_validation_grid, IonModel, ValidationCheck, ValidationGrid, ValidationTolerances};

fn main() {
    let started = std::time::Instant::now();
    let rows = run_validation_grid(
        &IonModel::h_minus(),
        ValidationGrid::Full,
        &ValidationTolerances::default(),
    )
    .unwrap();

    println!("{}", ValidationCheck::csv_header());
    for row in &rows {
        println!("{}", row.to_csv_row());
    }

    let failed = rows.iter().filter(|r| !r.pass).count();
    let worst = rows.iter().map(|r| r.rel_diff).fold(0.0_f64, f64::max);
    eprintln!(
        "{} checks, {} failed, worst relative difference {:.3e}, {:.2} s",
        rows.len(),
        failed,
        worst,
        started.elapsed().as_secs_f64()
    );
    assert_eq!(failed, 0);
}
