//! Recovery of wall parameters from a photodetachment spectrum.
//!
//! The modulation of the total cross section carries the wall's signature:
//! its amplitude encodes the reflection parameter K and its phase encodes
//! mu and (through the oscillation rate in energy) the distance d. The
//! fitter minimizes the sum of squared residuals between a sampled spectrum
//! and the closed-form model, first on a coarse parameter grid (the
//! objective is oscillatory in mu and d, so local refinement alone would
//! strand in side minima), then by damped Gauss-Newton steps with a
//! finite-difference Jacobian.

use crate::model::{self, IonModel, ModelError, SurfaceModel};
use crate::units::{ev_to_hartree, hartree_to_ev};
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, Normal};
use std::io::{BufRead, Write};
use thiserror::Error;

/// The phase enters as mu*pi/2, so the objective repeats every 4 in mu.
pub const MU_PERIOD: f64 = 4.0;

const MAX_ITERATIONS: usize = 200;
const STEP_NORM_TOL: f64 = 1e-10;
const RESIDUAL_CHANGE_TOL: f64 = 1e-12;
const JACOBIAN_REL_STEP: f64 = 1e-6;
/// Below this fitted K the modulation is flat and mu, d carry no signal.
const DEGENERATE_REFLECTION: f64 = 1e-6;

#[derive(Debug, Error)]
pub enum FitError {
    #[error(transparent)]
    Model(#[from] ModelError),
    #[error("spectrum needs at least 8 samples, got {0}")]
    TooFewSamples(usize),
    #[error("photon energies must be strictly increasing (sample {index})")]
    NonMonotonicEnergies { index: usize },
    #[error("sample {index} at {photon_ev} eV is at or below the detachment threshold {threshold_ev} eV")]
    SampleBelowThreshold { index: usize, photon_ev: f64, threshold_ev: f64 },
    #[error("noise level must be nonnegative, got {0}")]
    NegativeNoise(f64),
    #[error("invalid bounds: {0}")]
    InvalidBounds(String),
    #[error("fixed wall distance must be positive, got {0} bohr")]
    NonPositiveFixedDistance(f64),
    #[error("malformed spectrum line {line}: {reason}")]
    MalformedSpectrum { line: usize, reason: String },
    #[error("spectrum I/O: {0}")]
    Io(#[from] std::io::Error),
}

/// One sampled point of a photodetachment spectrum.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SpectrumSample {
    pub photon_energy_ev: f64,
    pub sigma: f64,
}

/// A sampled cross-section spectrum together with the ion it refers to.
#[derive(Debug, Clone, PartialEq)]
pub struct Spectrum {
    samples: Vec<SpectrumSample>,
    ion: IonModel,
}

impl Spectrum {
    pub fn new(samples: Vec<SpectrumSample>, ion: IonModel) -> Result<Self, FitError> {
        if samples.len() < 8 {
            return Err(FitError::TooFewSamples(samples.len()));
        }
        let threshold_ev = hartree_to_ev(ion.binding_energy());
        for (index, s) in samples.iter().enumerate() {
            if s.photon_energy_ev <= threshold_ev {
                return Err(FitError::SampleBelowThreshold {
                    index,
                    photon_ev: s.photon_energy_ev,
                    threshold_ev,
                });
            }
            if index > 0 && s.photon_energy_ev <= samples[index - 1].photon_energy_ev {
                return Err(FitError::NonMonotonicEnergies { index });
            }
        }
        Ok(Self { samples, ion })
    }

    pub fn samples(&self) -> &[SpectrumSample] {
        &self.samples
    }

    pub fn ion(&self) -> &IonModel {
        &self.ion
    }

    /// Write as CSV with the `E_ph_eV,sigma_au` header.
    pub fn write_csv<W: Write>(&self, mut w: W) -> Result<(), FitError> {
        w.write_all(b"E_ph_eV,sigma_au\n")?;
        for s in &self.samples {
            writeln!(w, "{:.11e},{:.11e}", s.photon_energy_ev, s.sigma)?;
        }
        Ok(())
    }

    /// Read back the CSV form; `ion` supplies the metadata the file lacks.
    pub fn read_csv<R: BufRead>(r: R, ion: IonModel) -> Result<Self, FitError> {
        let mut samples = Vec::new();
        for (i, line) in r.lines().enumerate() {
            let line = line?;
            let trimmed = line.trim();
            if trimmed.is_empty() {
                continue;
            }
            if i == 0 {
                if trimmed != "E_ph_eV,sigma_au" {
                    return Err(FitError::MalformedSpectrum {
                        line: 1,
                        reason: format!("expected header 'E_ph_eV,sigma_au', got '{trimmed}'"),
                    });
                }
                continue;
            }
            let mut fields = trimmed.split(',');
            let parse = |field: Option<&str>, what: &str| -> Result<f64, FitError> {
                field
                    .ok_or_else(|| FitError::MalformedSpectrum {
                        line: i + 1,
                        reason: format!("missing {what}"),
                    })?
                    .trim()
                    .parse::<f64>()
                    .map_err(|e| FitError::MalformedSpectrum { line: i + 1, reason: e.to_string() })
            };
            let photon_energy_ev = parse(fields.next(), "photon energy")?;
            let sigma = parse(fields.next(), "cross section")?;
            samples.push(SpectrumSample { photon_energy_ev, sigma });
        }
        Self::new(samples, ion)
    }
}

/// Forward-model a spectrum on `photon_energies_ev`, optionally perturbed by
/// multiplicative Gaussian noise of relative width `noise_sigma`. All
/// randomness flows from `seed`.
pub fn synthesize_spectrum(
    ion: &IonModel,
    surface: &SurfaceModel,
    photon_energies_ev: &[f64],
    noise_sigma: f64,
    seed: u64,
) -> Result<Spectrum, FitError> {
    if !(noise_sigma >= 0.0) {
        return Err(FitError::NegativeNoise(noise_sigma));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let normal = Normal::new(0.0, 1.0).expect("unit normal");
    let mut samples = Vec::with_capacity(photon_energies_ev.len());
    for &eph in photon_energies_ev {
        let energy = ev_to_hartree(eph) - ion.binding_energy();
        let mut sigma = model::sigma_total(ion, surface, energy)?;
        if noise_sigma > 0.0 {
            sigma *= 1.0 + noise_sigma * normal.sample(&mut rng);
        }
        samples.push(SpectrumSample { photon_energy_ev: eph, sigma });
    }
    Spectrum::new(samples, *ion)
}

/// Search region for the fitter.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct FitBounds {
    pub reflection: (f64, f64),
    pub phase_index: (f64, f64),
    pub wall_distance: (f64, f64),
}

impl Default for FitBounds {
    fn default() -> Self {
        Self {
            reflection: (0.0, 1.0),
            phase_index: (0.0, MU_PERIOD),
            wall_distance: (50.0, 1000.0),
        }
    }
}

impl FitBounds {
    fn validate(&self) -> Result<(), FitError> {
        let ordered = |(lo, hi): (f64, f64)| lo < hi && lo.is_finite() && hi.is_finite();
        if !ordered(self.reflection) || self.reflection.0 < 0.0 || self.reflection.1 > 1.0 {
            return Err(FitError::InvalidBounds(format!(
                "reflection bounds {:?} must be ordered within [0, 1]",
                self.reflection
            )));
        }
        if !ordered(self.phase_index) {
            return Err(FitError::InvalidBounds(format!(
                "phase-index bounds {:?} must be ordered and finite",
                self.phase_index
            )));
        }
        if !ordered(self.wall_distance) || self.wall_distance.0 <= 0.0 {
            return Err(FitError::InvalidBounds(format!(
                "wall-distance bounds {:?} must be ordered and positive",
                self.wall_distance
            )));
        }
        Ok(())
    }
}

/// Outcome of [`fit_surface`].
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct FitResult {
    pub reflection: f64,
    pub phase_index: f64,
    pub wall_distance: f64,
    /// Euclidean norm of the residual vector at the returned iterate.
    pub residual_norm: f64,
    pub iterations: usize,
    pub converged: bool,
    /// Set when the fitted K is consistent with zero: a flat spectrum
    /// carries no phase information, so mu and d are meaningless.
    pub degenerate: bool,
}

impl FitResult {
    /// Flat `key = value` block.
    pub fn to_key_value_block(&self) -> String {
        format!(
            "k_hat = {:.12e}\nmu_hat = {:.12e}\nd_hat_bohr = {:.12e}\nresidual_norm = {:.6e}\niterations = {}\nconverged = {}\ndegenerate = {}\n",
            self.reflection,
            self.phase_index,
            self.wall_distance,
            self.residual_norm,
            self.iterations,
            self.converged,
            self.degenerate,
        )
    }

    pub fn csv_header() -> &'static str {
        "k_hat,mu_hat,d_hat_bohr,residual_norm,iterations,converged,degenerate"
    }

    pub fn to_csv_row(&self) -> String {
        format!(
            "{:.12e},{:.12e},{:.12e},{:.6e},{},{},{}",
            self.reflection,
            self.phase_index,
            self.wall_distance,
            self.residual_norm,
            self.iterations,
            self.converged,
            self.degenerate,
        )
    }
}

/// Reduce mu to the canonical window [0, MU_PERIOD).
fn canonical_mu(mu: f64) -> f64 {
    mu.rem_euclid(MU_PERIOD)
}

struct Objective<'a> {
    spectrum: &'a Spectrum,
    fixed_d: Option<f64>,
    bounds: FitBounds,
}

impl<'a> Objective<'a> {
    fn dim(&self) -> usize {
        if self.fixed_d.is_some() { 2 } else { 3 }
    }

    fn wall_distance(&self, params: &[f64]) -> f64 {
        self.fixed_d.unwrap_or_else(|| params[2])
    }

    fn clamp(&self, params: &mut [f64]) {
        params[0] = params[0].clamp(self.bounds.reflection.0, self.bounds.reflection.1);
        // mu is periodic: wrap instead of clamping so refinement can cross 0
        params[1] = canonical_mu(params[1]);
        if self.fixed_d.is_none() {
            params[2] = params[2].clamp(self.bounds.wall_distance.0, self.bounds.wall_distance.1);
        }
    }

    fn residuals(&self, params: &[f64]) -> Result<Vec<f64>, FitError> {
        let surface = SurfaceModel::new(params[0], params[1], self.wall_distance(params))?;
        let ion = self.spectrum.ion();
        self.spectrum
            .samples()
            .iter()
            .map(|s| {
                let energy = ev_to_hartree(s.photon_energy_ev) - ion.binding_energy();
                Ok(model::sigma_total(ion, &surface, energy)? - s.sigma)
            })
            .collect()
    }

    fn sse(&self, params: &[f64]) -> Result<f64, FitError> {
        Ok(self.residuals(params)?.iter().map(|r| r * r).sum())
    }

    /// One-sided finite-difference Jacobian, relative step 1e-6 per
    /// parameter, stepping away from whichever bound the iterate sits on.
    fn jacobian(&self, params: &[f64], base: &[f64]) -> Result<Vec<Vec<f64>>, FitError> {
        let n = self.dim();
        let mut columns = Vec::with_capacity(n);
        for j in 0..n {
            let mut shifted = params.to_vec();
            let mut h = JACOBIAN_REL_STEP * (params[j].abs() + 1e-3);
            let upper = match j {
                0 => Some(self.bounds.reflection.1),
                2 => Some(self.bounds.wall_distance.1),
                _ => None,
            };
            if let Some(hi) = upper {
                if params[j] + h > hi {
                    h = -h;
                }
            }
            shifted[j] += h;
            let bumped = self.residuals(&shifted)?;
            columns.push(
                bumped
                    .iter()
                    .zip(base)
                    .map(|(b, r)| (b - r) / h)
                    .collect::<Vec<f64>>(),
            );
        }
        Ok(columns)
    }
}

/// Solve the symmetric positive-semidefinite system (JtJ + ridge I) x = rhs
/// by Gaussian elimination with partial pivoting. n is 2 or 3.
fn solve_normal_equations(mut a: Vec<Vec<f64>>, mut rhs: Vec<f64>, ridge: f64) -> Option<Vec<f64>> {
    let n = rhs.len();
    for (i, row) in a.iter_mut().enumerate() {
        row[i] += ridge;
    }
    for col in 0..n {
        let pivot = (col..n).max_by(|&p, &q| a[p][col].abs().total_cmp(&a[q][col].abs()))?;
        if a[pivot][col].abs() < 1e-300 {
            return None;
        }
        a.swap(col, pivot);
        rhs.swap(col, pivot);
        for row in col + 1..n {
            let factor = a[row][col] / a[col][col];
            for k in col..n {
                a[row][k] -= factor * a[col][k];
            }
            rhs[row] -= factor * rhs[col];
        }
    }
    let mut x = vec![0.0; n];
    for row in (0..n).rev() {
        let mut acc = rhs[row];
        for k in row + 1..n {
            acc -= a[row][k] * x[k];
        }
        x[row] = acc / a[row][row];
    }
    Some(x)
}

/// Recover the wall parameters that generated `spectrum`.
///
/// With `fixed_d = Some(d)` only (K, mu) are fitted at the known distance;
/// with `None` the distance joins the search inside `bounds.wall_distance`.
/// Non-convergence is not an error: the best iterate is returned with
/// `converged = false`.
pub fn fit_surface(
    spectrum: &Spectrum,
    fixed_d: Option<f64>,
    bounds: &FitBounds,
) -> Result<FitResult, FitError> {
    bounds.validate()?;
    if let Some(d) = fixed_d {
        if !(d > 0.0) {
            return Err(FitError::NonPositiveFixedDistance(d));
        }
    }
    let objective = Objective { spectrum, fixed_d, bounds: *bounds };

    // coarse grid: dense enough in mu and d to land inside the basin of
    // the global minimum of the oscillatory objective
    let linspace = |lo: f64, hi: f64, n: usize| -> Vec<f64> {
        (0..n).map(|i| lo + (hi - lo) * i as f64 / (n - 1) as f64).collect()
    };
    let k_grid = linspace(bounds.reflection.0, bounds.reflection.1, 21);
    let mu_grid = linspace(bounds.phase_index.0, bounds.phase_index.1, 17);
    let d_grid = match fixed_d {
        Some(d) => vec![d],
        None => linspace(bounds.wall_distance.0, bounds.wall_distance.1, 15),
    };

    let mut best_params = vec![k_grid[0], mu_grid[0]];
    if fixed_d.is_none() {
        best_params.push(d_grid[0]);
    }
    let mut best_sse = f64::INFINITY;
    for &k in &k_grid {
        for &mu in &mu_grid {
            for &d in &d_grid {
                let mut params = vec![k, mu];
                if fixed_d.is_none() {
                    params.push(d);
                }
                let sse = objective.sse(&params)?;
                if sse < best_sse {
                    best_sse = sse;
                    best_params = params;
                }
            }
        }
    }

    // damped Gauss-Newton refinement
    let mut params = best_params;
    let mut sse = best_sse;
    let mut converged = false;
    let mut iterations = 0;
    let n = objective.dim();

    while iterations < MAX_ITERATIONS {
        iterations += 1;
        let residuals = objective.residuals(&params)?;
        let jacobian = objective.jacobian(&params, &residuals)?;

        let mut jtj = vec![vec![0.0; n]; n];
        let mut jtr = vec![0.0; n];
        for p in 0..n {
            for q in 0..n {
                jtj[p][q] = jacobian[p].iter().zip(&jacobian[q]).map(|(x, y)| x * y).sum();
            }
            jtr[p] = jacobian[p].iter().zip(&residuals).map(|(x, r)| x * r).sum();
        }

        let scale = (0..n).map(|i| jtj[i][i]).fold(0.0_f64, f64::max).max(1e-300);
        let mut ridge = 0.0;
        let mut improved = false;
        for _ in 0..12 {
            let Some(delta) =
                solve_normal_equations(jtj.clone(), jtr.iter().map(|v| -v).collect(), ridge)
            else {
                ridge = if ridge == 0.0 { 1e-10 * scale } else { ridge * 10.0 };
                continue;
            };
            let mut trial: Vec<f64> = params.iter().zip(&delta).map(|(p, d)| p + d).collect();
            objective.clamp(&mut trial);
            let trial_sse = objective.sse(&trial)?;
            if trial_sse <= sse {
                let step_norm = delta.iter().map(|d| d * d).sum::<f64>().sqrt();
                let residual_change = (sse.sqrt() - trial_sse.sqrt()).abs();
                let relative_change = residual_change / sse.sqrt().max(1e-300);
                params = trial;
                sse = trial_sse;
                improved = true;
                if step_norm < STEP_NORM_TOL || relative_change < RESIDUAL_CHANGE_TOL {
                    converged = true;
                }
                break;
            }
            ridge = if ridge == 0.0 { 1e-10 * scale } else { ridge * 10.0 };
        }
        if converged || !improved {
            // a step that cannot decrease the objective any further counts
            // as converged at this iterate
            converged = true;
            break;
        }
    }

    let reflection = params[0];
    let degenerate = reflection.abs() <= DEGENERATE_REFLECTION;
    Ok(FitResult {
        reflection,
        phase_index: canonical_mu(params[1]),
        wall_distance: objective.wall_distance(&params),
        residual_norm: sse.sqrt(),
        iterations,
        converged,
        degenerate,
    })
}
