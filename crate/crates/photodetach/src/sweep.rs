//! Parameter sweeps and deterministic CSV tables.
//!
//! A sweep evaluates a fixed set of quantities along one swept variable and
//! assembles the rows into a [`Table`]. Output is a pure function of the
//! sweep specification: rows may be computed on any number of threads, but
//! assembly order and the written bytes never change.
//!
//! The `fig2`/`fig3`/`fig4` presets bundle the modulation-function,
//! cross-section and screen-flux parameter sets exercised throughout the
//! test suite (K in {1, 0.7, 0.4} x mu in {1, 1.5, 2} for the first two,
//! d = 100 bohr, and K in {1, 0.5, 0.1} x mu in {1, 2} on a screen at
//! L = 10^4 bohr with E_ph = 1 eV for the third).

use crate::model::{self, IonModel, ModelError, ScreenGeometry, SurfaceModel};
use crate::units::ev_to_hartree;
use rayon::prelude::*;
use std::collections::BTreeMap;
use std::io::Write;
use std::path::Path;
use thiserror::Error;

#[derive(Debug, Error)]
pub enum SweepError {
    #[error(transparent)]
    Model(#[from] ModelError),
    #[error("invalid sweep range: {0}")]
    InvalidRange(String),
    #[error("quantity {quantity} is not defined for a {variable} sweep")]
    InconsistentQuantity { quantity: &'static str, variable: &'static str },
    #[error("screen flux sweep needs a screen geometry")]
    MissingGeometry,
    #[error("no output quantities requested")]
    NoQuantities,
    #[error("{path}: {source}")]
    Io { path: String, source: std::io::Error },
    #[error("malformed config line {line}: {reason}")]
    MalformedConfig { line: usize, reason: String },
}

/// What is being swept.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum SweepVariable {
    /// Dimensionless round-trip action u.
    Action,
    /// Photon energy in eV.
    PhotonEnergyEv,
    /// Radial screen coordinate in bohr.
    RhoBohr,
}

impl SweepVariable {
    pub fn column_name(self) -> &'static str {
        match self {
            SweepVariable::Action => "u",
            SweepVariable::PhotonEnergyEv => "E_ph_eV",
            SweepVariable::RhoBohr => "rho_bohr",
        }
    }

    fn name(self) -> &'static str {
        match self {
            SweepVariable::Action => "u",
            SweepVariable::PhotonEnergyEv => "E_ph_eV",
            SweepVariable::RhoBohr => "rho_bohr",
        }
    }
}

/// What is tabulated at each swept value.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Quantity {
    Modulation,
    Sigma0,
    Sigma1,
    Sigma2,
    SigmaTotal,
    ScreenFlux,
}

impl Quantity {
    pub fn column_name(self) -> &'static str {
        match self {
            Quantity::Modulation => "A",
            Quantity::Sigma0 => "sigma0_au",
            Quantity::Sigma1 => "sigma1_au",
            Quantity::Sigma2 => "sigma2_au",
            Quantity::SigmaTotal => "sigma_total_au",
            Quantity::ScreenFlux => "jz_au",
        }
    }

    fn compatible_with(self, variable: SweepVariable) -> bool {
        match variable {
            // u fixes only the phase argument, not an energy scale
            SweepVariable::Action => matches!(self, Quantity::Modulation),
            SweepVariable::PhotonEnergyEv => !matches!(self, Quantity::ScreenFlux),
            SweepVariable::RhoBohr => matches!(self, Quantity::ScreenFlux),
        }
    }
}

/// Full description of one sweep.
#[derive(Debug, Clone)]
pub struct SweepSpec {
    pub variable: SweepVariable,
    pub start: f64,
    pub stop: f64,
    pub count: usize,
    pub ion: IonModel,
    pub surface: SurfaceModel,
    pub geometry: Option<ScreenGeometry>,
    /// Photon energy in eV; required when sweeping rho.
    pub photon_energy_ev: Option<f64>,
    pub outputs: Vec<Quantity>,
}

impl SweepSpec {
    pub fn validate(&self) -> Result<(), SweepError> {
        if !(self.start < self.stop) || !self.start.is_finite() || !self.stop.is_finite() {
            return Err(SweepError::InvalidRange(format!(
                "start {} must be below stop {}",
                self.start, self.stop
            )));
        }
        if self.count < 2 {
            return Err(SweepError::InvalidRange(format!(
                "count must be at least 2, got {}",
                self.count
            )));
        }
        if self.outputs.is_empty() {
            return Err(SweepError::NoQuantities);
        }
        for q in &self.outputs {
            if !q.compatible_with(self.variable) {
                return Err(SweepError::InconsistentQuantity {
                    quantity: q.column_name(),
                    variable: self.variable.name(),
                });
            }
        }
        match self.variable {
            SweepVariable::Action => {
                if self.start < 0.0 {
                    return Err(SweepError::InvalidRange("u must be nonnegative".into()));
                }
            }
            SweepVariable::PhotonEnergyEv => {
                let threshold = crate::units::hartree_to_ev(self.ion.binding_energy());
                if self.start <= threshold {
                    return Err(SweepError::InvalidRange(format!(
                        "photon energy start {} eV is at or below threshold {} eV",
                        self.start, threshold
                    )));
                }
            }
            SweepVariable::RhoBohr => {
                if self.geometry.is_none() {
                    return Err(SweepError::MissingGeometry);
                }
                if self.photon_energy_ev.is_none() {
                    return Err(SweepError::InvalidRange(
                        "rho sweep needs a photon energy".into(),
                    ));
                }
                if self.start < 0.0 {
                    return Err(SweepError::InvalidRange("rho must be nonnegative".into()));
                }
            }
        }
        Ok(())
    }
}

/// Column-labelled numeric table.
#[derive(Debug, Clone, PartialEq)]
pub struct Table {
    columns: Vec<String>,
    rows: Vec<Vec<f64>>,
}

impl Table {
    pub fn new(columns: Vec<String>) -> Self {
        Self { columns, rows: Vec::new() }
    }

    pub fn columns(&self) -> &[String] {
        &self.columns
    }

    pub fn rows(&self) -> &[Vec<f64>] {
        &self.rows
    }

    pub fn push_row(&mut self, row: Vec<f64>) {
        assert_eq!(row.len(), self.columns.len(), "row width mismatch");
        self.rows.push(row);
    }

    /// Index of a named column.
    pub fn column_index(&self, name: &str) -> Option<usize> {
        self.columns.iter().position(|c| c == name)
    }

    /// Join tables sharing the identical first (swept) column.
    pub fn join_columns(mut self, other: Table) -> Table {
        assert_eq!(self.rows.len(), other.rows.len(), "row count mismatch");
        for (name, _) in other.columns.iter().zip(0..).skip(1) {
            self.columns.push(name.clone());
        }
        for (row, other_row) in self.rows.iter_mut().zip(other.rows) {
            debug_assert_eq!(row[0].to_bits(), other_row[0].to_bits(), "swept grids differ");
            row.extend_from_slice(&other_row[1..]);
        }
        self
    }

    /// CSV with LF line endings and every value in scientific notation with
    /// 12 significant digits. Identical inputs produce identical bytes.
    pub fn write_csv<W: Write>(&self, mut w: W) -> std::io::Result<()> {
        writeln!(w, "{}", self.columns.join(","))?;
        for row in &self.rows {
            let mut line = String::with_capacity(row.len() * 20);
            for (i, value) in row.iter().enumerate() {
                if i > 0 {
                    line.push(',');
                }
                line.push_str(&format!("{value:.11e}"));
            }
            writeln!(w, "{line}")?;
        }
        Ok(())
    }

    pub fn to_csv_string(&self) -> String {
        let mut buf = Vec::new();
        self.write_csv(&mut buf).expect("writing to memory cannot fail");
        String::from_utf8(buf).expect("CSV output is ASCII")
    }
}

/// Write a table to `destination`, reporting failures with the path.
pub fn write_table(table: &Table, destination: &Path) -> Result<(), SweepError> {
    let file = std::fs::File::create(destination).map_err(|source| SweepError::Io {
        path: destination.display().to_string(),
        source,
    })?;
    let mut writer = std::io::BufWriter::new(file);
    table
        .write_csv(&mut writer)
        .and_then(|()| writer.flush())
        .map_err(|source| SweepError::Io { path: destination.display().to_string(), source })
}

fn sweep_grid(start: f64, stop: f64, count: usize) -> Vec<f64> {
    let step = (stop - start) / (count - 1) as f64;
    (0..count)
        .map(|i| if i == count - 1 { stop } else { start + i as f64 * step })
        .collect()
}

/// Run one sweep. Rows are computed in parallel and assembled in ascending
/// order of the swept variable.
pub fn run_sweep(spec: &SweepSpec) -> Result<Table, SweepError> {
    spec.validate()?;
    let grid = sweep_grid(spec.start, spec.stop, spec.count);

    let mut columns = vec![spec.variable.column_name().to_string()];
    columns.extend(spec.outputs.iter().map(|q| q.column_name().to_string()));
    let mut table = Table::new(columns);

    let rows: Result<Vec<Vec<f64>>, SweepError> = grid
        .par_iter()
        .map(|&x| {
            let mut row = Vec::with_capacity(spec.outputs.len() + 1);
            row.push(x);
            for q in &spec.outputs {
                row.push(evaluate(spec, *q, x)?);
            }
            Ok(row)
        })
        .collect();
    for row in rows? {
        table.push_row(row);
    }
    Ok(table)
}

fn evaluate(spec: &SweepSpec, quantity: Quantity, x: f64) -> Result<f64, SweepError> {
    let ion = &spec.ion;
    let surface = &spec.surface;
    match spec.variable {
        SweepVariable::Action => Ok(model::modulation(x, surface)?),
        SweepVariable::PhotonEnergyEv => {
            let energy = ev_to_hartree(x) - ion.binding_energy();
            let value = match quantity {
                Quantity::Modulation => {
                    let u = 2.0 * surface.wall_distance() * (2.0 * energy).sqrt();
                    model::modulation(u, surface)?
                }
                Quantity::Sigma0 => model::sigma0(ion, energy)?,
                Quantity::Sigma1 => model::sigma1(ion, surface, energy)?,
                Quantity::Sigma2 => model::sigma2(ion, surface, energy)?,
                Quantity::SigmaTotal => model::sigma_total(ion, surface, energy)?,
                Quantity::ScreenFlux => unreachable!("rejected by validate"),
            };
            Ok(value)
        }
        SweepVariable::RhoBohr => {
            let geometry = spec.geometry.as_ref().expect("validated");
            let eph = spec.photon_energy_ev.expect("validated");
            let energy = ev_to_hartree(eph) - ion.binding_energy();
            Ok(model::screen_flux(ion, surface, energy, geometry, x)?)
        }
    }
}

fn label(value: f64) -> String {
    format!("{value}")
}

/// Modulation-function preset: A(u) on u in [0.5, 60] for
/// K in {1, 0.7, 0.4} x mu in {1, 1.5, 2}. The u range is a choice; it
/// covers the slow large-amplitude fringes and several decayed periods.
pub fn preset_fig2() -> Result<Table, SweepError> {
    let ion = IonModel::h_minus();
    let mut table: Option<Table> = None;
    for &k in &[1.0, 0.7, 0.4] {
        for &mu in &[1.0, 1.5, 2.0] {
            let spec = SweepSpec {
                variable: SweepVariable::Action,
                start: 0.5,
                stop: 60.0,
                count: 1191,
                ion,
                surface: SurfaceModel::new(k, mu, 100.0)?,
                geometry: None,
                photon_energy_ev: None,
                outputs: vec![Quantity::Modulation],
            };
            let mut one = run_sweep(&spec)?;
            let name = format!("A_K{}_mu{}", label(k), label(mu));
            one.columns[1] = name;
            table = Some(match table {
                None => one,
                Some(t) => t.join_columns(one),
            });
        }
    }
    Ok(table.expect("nine curves"))
}

/// Total-cross-section preset: sigma(E_ph) with d = 100 bohr for
/// K in {1, 0.7, 0.4} x mu in {1, 1.5, 2}, alongside sigma0 and the
/// modulation, on 2000 photon energies covering one eV above threshold.
pub fn preset_fig3() -> Result<Table, SweepError> {
    let ion = IonModel::h_minus();
    let threshold = crate::units::hartree_to_ev(ion.binding_energy());
    let (start, stop, count) = (threshold + 0.01, threshold + 1.0, 2000);

    let base = SweepSpec {
        variable: SweepVariable::PhotonEnergyEv,
        start,
        stop,
        count,
        ion,
        surface: SurfaceModel::new(0.0, 1.0, 100.0)?,
        geometry: None,
        photon_energy_ev: None,
        outputs: vec![Quantity::Sigma0],
    };
    let mut table = run_sweep(&base)?;

    for &k in &[1.0, 0.7, 0.4] {
        for &mu in &[1.0, 1.5, 2.0] {
            let spec = SweepSpec {
                surface: SurfaceModel::new(k, mu, 100.0)?,
                outputs: vec![Quantity::Modulation, Quantity::SigmaTotal],
                ..base.clone()
            };
            let mut one = run_sweep(&spec)?;
            one.columns[1] = format!("A_K{}_mu{}", label(k), label(mu));
            one.columns[2] = format!("sigma_K{}_mu{}_au", label(k), label(mu));
            table = table.join_columns(one);
        }
    }
    Ok(table)
}

/// Screen-flux preset: j_z(rho) for K in {1, 0.5, 0.1} x mu in {1, 2} at
/// E_ph = 1 eV, d = 100 bohr, L = 10^4 bohr. The radial range reaches 40 L:
/// the K = 1 curves keep a last, very shallow maximum out where the rising
/// cosine overtakes the falling envelope, and the range covers it.
pub fn preset_fig4() -> Result<Table, SweepError> {
    let ion = IonModel::h_minus();
    let geometry = ScreenGeometry::new(1e4, 4e5, 4001)?;
    let mut table: Option<Table> = None;
    for &k in &[1.0, 0.5, 0.1] {
        for &mu in &[1.0, 2.0] {
            let spec = SweepSpec {
                variable: SweepVariable::RhoBohr,
                start: 0.0,
                stop: geometry.rho_max(),
                count: geometry.rho_count(),
                ion,
                surface: SurfaceModel::new(k, mu, 100.0)?,
                geometry: Some(geometry),
                photon_energy_ev: Some(1.0),
                outputs: vec![Quantity::ScreenFlux],
            };
            let mut one = run_sweep(&spec)?;
            one.columns[1] = format!("jz_K{}_mu{}_au", label(k), label(mu));
            table = Some(match table {
                None => one,
                Some(t) => t.join_columns(one),
            });
        }
    }
    Ok(table.expect("six curves"))
}

/// Parse a flat `key = value` config file; `#` starts a comment.
pub fn parse_key_values(text: &str) -> Result<BTreeMap<String, String>, SweepError> {
    let mut map = BTreeMap::new();
    for (i, raw) in text.lines().enumerate() {
        let line = match raw.find('#') {
            Some(pos) => &raw[..pos],
            None => raw,
        }
        .trim();
        if line.is_empty() {
            continue;
        }
        let Some((key, value)) = line.split_once('=') else {
            return Err(SweepError::MalformedConfig {
                line: i + 1,
                reason: "expected 'key = value'".into(),
            });
        };
        let key = key.trim();
        if key.is_empty() {
            return Err(SweepError::MalformedConfig { line: i + 1, reason: "empty key".into() });
        }
        map.insert(key.to_string(), value.trim().to_string());
    }
    Ok(map)
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;

    fn base_spec() -> SweepSpec {
        SweepSpec {
            variable: SweepVariable::Action,
            start: 0.5,
            stop: 10.0,
            count: 20,
            ion: IonModel::h_minus(),
            surface: SurfaceModel::new(0.7, 1.5, 100.0).unwrap(),
            geometry: None,
            photon_energy_ev: None,
            outputs: vec![Quantity::Modulation],
        }
    }

    #[test]
    fn validation_names_the_offending_field() {
        let mut spec = base_spec();
        spec.stop = 0.1;
        assert!(matches!(spec.validate(), Err(SweepError::InvalidRange(_))));

        let mut spec = base_spec();
        spec.count = 1;
        assert!(matches!(spec.validate(), Err(SweepError::InvalidRange(_))));

        let mut spec = base_spec();
        spec.outputs = vec![Quantity::ScreenFlux];
        assert!(matches!(
            spec.validate(),
            Err(SweepError::InconsistentQuantity { quantity: "jz_au", variable: "u" })
        ));

        let mut spec = base_spec();
        spec.variable = SweepVariable::RhoBohr;
        spec.start = 0.0;
        spec.outputs = vec![Quantity::ScreenFlux];
        assert!(matches!(spec.validate(), Err(SweepError::MissingGeometry)));

        let mut spec = base_spec();
        spec.outputs.clear();
        assert!(matches!(spec.validate(), Err(SweepError::NoQuantities)));
    }

    #[test]
    fn rows_ascend_and_hit_the_endpoints() {
        let table = run_sweep(&base_spec()).unwrap();
        assert_eq!(table.rows().len(), 20);
        assert_eq!(table.rows()[0][0], 0.5);
        assert_eq!(table.rows()[19][0], 10.0);
        for pair in table.rows().windows(2) {
            assert!(pair[0][0] < pair[1][0]);
        }
        // spot check a value against the model
        let surface = SurfaceModel::new(0.7, 1.5, 100.0).unwrap();
        let row = &table.rows()[7];
        assert_eq!(row[1], model::modulation(row[0], &surface).unwrap());
    }

    #[test]
    fn identical_specs_give_identical_bytes_across_thread_counts() {
        let spec = base_spec();
        let reference = run_sweep(&spec).unwrap().to_csv_string();
        for threads in [1, 4] {
            let pool = rayon::ThreadPoolBuilder::new().num_threads(threads).build().unwrap();
            let csv = pool.install(|| run_sweep(&spec).unwrap().to_csv_string());
            assert_eq!(csv, reference);
        }
    }

    #[test]
    fn csv_format_contract() {
        let mut table = Table::new(vec!["u".into(), "A".into()]);
        table.push_row(vec![0.5, 1.0]);
        table.push_row(vec![1.0, 0.25]);
        let csv = table.to_csv_string();
        assert_eq!(csv, "u,A\n5.00000000000e-1,1.00000000000e0\n1.00000000000e0,2.50000000000e-1\n");

        let empty = Table::new(vec!["u".into(), "A".into()]);
        assert_eq!(empty.to_csv_string(), "u,A\n");
    }

    #[test]
    fn csv_round_trips_through_its_own_representation() {
        let table = run_sweep(&base_spec()).unwrap();
        let csv = table.to_csv_string();
        for (line, row) in csv.lines().skip(1).zip(table.rows()) {
            for (field, value) in line.split(',').zip(row) {
                let reparsed: f64 = field.parse().unwrap();
                // the printed representation is a fixed point of parse+print
                assert_eq!(format!("{reparsed:.11e}"), field);
                assert_relative_eq!(reparsed, *value, max_relative = 1e-11);
            }
        }
    }

    #[test]
    fn fig2_preset_shape_and_amplitude_ordering() {
        let table = preset_fig2().unwrap();
        assert_eq!(table.columns().len(), 10);
        assert_eq!(table.rows().len(), 1191);
        // oscillation amplitude shrinks with K at fixed mu
        for mu in ["1", "1.5", "2"] {
            let amp = |k: &str| -> f64 {
                let idx = table.column_index(&format!("A_K{k}_mu{mu}")).unwrap();
                let values: Vec<f64> = table.rows().iter().map(|r| r[idx]).collect();
                values.iter().cloned().fold(f64::MIN, f64::max)
                    - values.iter().cloned().fold(f64::MAX, f64::min)
            };
            assert!(amp("1") > amp("0.7"));
            assert!(amp("0.7") > amp("0.4"));
        }
    }

    #[test]
    fn fig3_preset_is_column_self_consistent() {
        let table = preset_fig3().unwrap();
        assert_eq!(table.rows().len(), 2000);
        let s0 = table.column_index("sigma0_au").unwrap();
        for (k, mu) in [("1", "1"), ("0.7", "1.5"), ("0.4", "2")] {
            let a = table.column_index(&format!("A_K{k}_mu{mu}")).unwrap();
            let s = table.column_index(&format!("sigma_K{k}_mu{mu}_au")).unwrap();
            for row in table.rows() {
                assert_relative_eq!(row[s], row[s0] * row[a], max_relative = 1e-12);
            }
        }
    }

    #[test]
    fn fig3_sigma_oscillates_around_sigma0() {
        let table = preset_fig3().unwrap();
        let s0 = table.column_index("sigma0_au").unwrap();
        let s = table.column_index("sigma_K1_mu2_au").unwrap();
        let crossings = table
            .rows()
            .windows(2)
            .filter(|pair| (pair[0][s] - pair[0][s0]).signum() != (pair[1][s] - pair[1][s0]).signum())
            .count();
        assert!(crossings >= 6, "only {crossings} crossings of sigma0");
    }

    #[test]
    fn fig4_preset_is_nonnegative() {
        let table = preset_fig4().unwrap();
        assert_eq!(table.rows().len(), 4001);
        for row in table.rows() {
            for value in &row[1..] {
                assert!(*value >= 0.0);
            }
        }
    }

    #[test]
    fn config_parsing() {
        let text = "# comment\n k = 0.7 \nmu=1.5\nd-bohr = 100 # trailing\n\n";
        let map = parse_key_values(text).unwrap();
        assert_eq!(map.get("k").map(String::as_str), Some("0.7"));
        assert_eq!(map.get("mu").map(String::as_str), Some("1.5"));
        assert_eq!(map.get("d-bohr").map(String::as_str), Some("100"));
        assert!(parse_key_values("novalue\n").is_err());
        assert!(parse_key_values("= 3\n").is_err());
    }
}
