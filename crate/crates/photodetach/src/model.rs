//! Closed-form model of H- photodetachment near a partially reflecting wall.
//!
//! The detached p-wave electron leaves the ion either directly or after one
//! reflection off a wall at distance `d`; the reflected branch carries an
//! amplitude factor `K` and a phase `mu*pi/2`. Interference of the two
//! branches modulates the smooth free-space cross section `sigma0` by the
//! factor `A(u)` with `u = 2*d*sqrt(2*E)`, the action of the round trip
//! ion -> wall -> ion. The wall absorbs the remainder of the incident wave
//! (`T^2 + K^2 = 1`), which contributes a smooth second term `sigma2`.
//!
//! Everything here is a pure function over immutable value types, in Hartree
//! atomic units.

use num_complex::Complex64;
use std::f64::consts::PI;
use thiserror::Error;

/// Default H- binding energy in hartree (0.7542 eV electron affinity).
pub const DEFAULT_BINDING_ENERGY: f64 = 0.027716;

/// Normalization constant of the H- bound-state wave function.
pub const DEFAULT_NORMALIZATION: f64 = 0.31552;

/// Speed of light in atomic units (inverse fine-structure constant).
pub const DEFAULT_LIGHT_SPEED: f64 = 137.035999084;

/// Wall distances at or below this many bohr fall outside the asymptotic
/// regime the closed forms assume.
pub const ASYMPTOTIC_WALL_DISTANCE: f64 = 50.0;

/// Below this action the closed form of [`a1`] loses precision to
/// cancellation and the Maclaurin series branch is used instead.
pub const A1_SERIES_THRESHOLD: f64 = 0.05;

#[derive(Debug, Clone, Error, PartialEq)]
pub enum ModelError {
    #[error("electron energy must be positive, got {0} hartree")]
    NonPositiveEnergy(f64),
    #[error("photon energy {photon_ev} eV is below detachment threshold {threshold_ev:.4} eV")]
    BelowThreshold { photon_ev: f64, threshold_ev: f64 },
    #[error("binding energy must be positive, got {0} hartree")]
    NonPositiveBindingEnergy(f64),
    #[error("normalization constant must be positive, got {0}")]
    NonPositiveNormalization(f64),
    #[error("light speed must be positive, got {0} a.u.")]
    NonPositiveLightSpeed(f64),
    #[error("reflection parameter must lie in [0, 1], got {0}")]
    ReflectionOutOfRange(f64),
    #[error("wall distance must be positive, got {0} bohr")]
    NonPositiveWallDistance(f64),
    #[error("radius must be positive, got {0} bohr")]
    NonPositiveRadius(f64),
    #[error("screen distance must be positive, got {0} bohr")]
    NonPositiveScreenDistance(f64),
    #[error("screen radius must be nonnegative, got {0} bohr")]
    NegativeRho(f64),
    #[error("action u must be nonnegative, got {0}")]
    NegativeAction(f64),
    #[error("polar angle {theta} rad outside [{lo}, {hi}]")]
    AngleOutOfRange { theta: f64, lo: f64, hi: f64 },
    #[error("azimuthal angle {0} rad outside [0, 2*pi)")]
    PhiOutOfRange(f64),
    #[error("screen grid needs at least 2 samples, got {0}")]
    ScreenGridTooSmall(usize),
}

/// The H- source: binding energy, bound-state normalization, light speed.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct IonModel {
    binding_energy: f64,
    normalization: f64,
    light_speed: f64,
}

impl IonModel {
    pub fn new(binding_energy: f64, normalization: f64, light_speed: f64) -> Result<Self, ModelError> {
        if !(binding_energy > 0.0) {
            return Err(ModelError::NonPositiveBindingEnergy(binding_energy));
        }
        if !(normalization > 0.0) {
            return Err(ModelError::NonPositiveNormalization(normalization));
        }
        if !(light_speed > 0.0) {
            return Err(ModelError::NonPositiveLightSpeed(light_speed));
        }
        Ok(Self { binding_energy, normalization, light_speed })
    }

    /// H- with the default binding energy, normalization and light speed.
    pub fn h_minus() -> Self {
        Self {
            binding_energy: DEFAULT_BINDING_ENERGY,
            normalization: DEFAULT_NORMALIZATION,
            light_speed: DEFAULT_LIGHT_SPEED,
        }
    }

    /// Binding energy E_b in hartree.
    pub fn binding_energy(&self) -> f64 {
        self.binding_energy
    }

    /// Bound-state wavenumber k_b = sqrt(2 E_b).
    pub fn bound_wavenumber(&self) -> f64 {
        (2.0 * self.binding_energy).sqrt()
    }

    /// Normalization constant B.
    pub fn normalization(&self) -> f64 {
        self.normalization
    }

    /// Speed of light c in a.u.
    pub fn light_speed(&self) -> f64 {
        self.light_speed
    }
}

impl Default for IonModel {
    fn default() -> Self {
        Self::h_minus()
    }
}

/// The wall: reflection amplitude K, reflection phase index mu, distance d.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SurfaceModel {
    reflection: f64,
    phase_index: f64,
    wall_distance: f64,
}

impl SurfaceModel {
    pub fn new(reflection: f64, phase_index: f64, wall_distance: f64) -> Result<Self, ModelError> {
        if !(0.0..=1.0).contains(&reflection) {
            return Err(ModelError::ReflectionOutOfRange(reflection));
        }
        if !(wall_distance > 0.0) {
            return Err(ModelError::NonPositiveWallDistance(wall_distance));
        }
        Ok(Self { reflection, phase_index, wall_distance })
    }

    /// Reflection parameter K in [0, 1].
    pub fn reflection(&self) -> f64 {
        self.reflection
    }

    /// Phase index mu; the reflected wave acquires phase mu*pi/2.
    pub fn phase_index(&self) -> f64 {
        self.phase_index
    }

    /// Ion-to-wall distance d in bohr.
    pub fn wall_distance(&self) -> f64 {
        self.wall_distance
    }

    /// Absorption amplitude T with T^2 + K^2 = 1.
    pub fn absorption(&self) -> f64 {
        ((1.0 - self.reflection) * (1.0 + self.reflection)).sqrt()
    }

    /// Soft diagnostic: the closed forms assume the wall sits beyond the
    /// asymptotic regime of the detached wave.
    pub fn asymptotic_warning(&self) -> Option<String> {
        if self.wall_distance <= ASYMPTOTIC_WALL_DISTANCE {
            Some(format!(
                "wall distance {} bohr is within {} bohr; asymptotic approximations may not hold",
                self.wall_distance, ASYMPTOTIC_WALL_DISTANCE
            ))
        } else {
            None
        }
    }
}

/// One photodetachment working point: electron energy plus derived scales.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct DetachmentPoint {
    electron_energy: f64,
    wavenumber: f64,
    photon_energy: f64,
    action: f64,
}

impl DetachmentPoint {
    /// Build from the detached-electron energy E > 0 (hartree).
    pub fn from_electron_energy(
        ion: &IonModel,
        surface: &SurfaceModel,
        electron_energy: f64,
    ) -> Result<Self, ModelError> {
        if !(electron_energy > 0.0) {
            return Err(ModelError::NonPositiveEnergy(electron_energy));
        }
        let wavenumber = (2.0 * electron_energy).sqrt();
        Ok(Self {
            electron_energy,
            wavenumber,
            photon_energy: electron_energy + ion.binding_energy(),
            action: 2.0 * surface.wall_distance() * wavenumber,
        })
    }

    /// Build from the photon energy E_ph > E_b (hartree).
    pub fn from_photon_energy(
        ion: &IonModel,
        surface: &SurfaceModel,
        photon_energy: f64,
    ) -> Result<Self, ModelError> {
        let electron_energy = photon_energy - ion.binding_energy();
        if !(electron_energy > 0.0) {
            return Err(ModelError::BelowThreshold {
                photon_ev: crate::units::hartree_to_ev(photon_energy),
                threshold_ev: crate::units::hartree_to_ev(ion.binding_energy()),
            });
        }
        Self::from_electron_energy(ion, surface, electron_energy)
    }

    /// Detached-electron energy E in hartree.
    pub fn electron_energy(&self) -> f64 {
        self.electron_energy
    }

    /// Electron wavenumber k = sqrt(2E).
    pub fn wavenumber(&self) -> f64 {
        self.wavenumber
    }

    /// Photon energy E_ph = E + E_b in hartree.
    pub fn photon_energy(&self) -> f64 {
        self.photon_energy
    }

    /// Round-trip action u = 2 d sqrt(2E).
    pub fn action(&self) -> f64 {
        self.action
    }
}

/// Spherical direction of the detached electron. The model is azimuthally
/// symmetric; phi is carried for interface completeness only.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Angle {
    theta: f64,
    phi: f64,
}

impl Angle {
    pub fn new(theta: f64, phi: f64) -> Result<Self, ModelError> {
        if !(0.0..=PI).contains(&theta) {
            return Err(ModelError::AngleOutOfRange { theta, lo: 0.0, hi: PI });
        }
        if !(0.0..2.0 * PI).contains(&phi) {
            return Err(ModelError::PhiOutOfRange(phi));
        }
        Ok(Self { theta, phi })
    }

    /// Polar angle with phi = 0.
    pub fn polar(theta: f64) -> Result<Self, ModelError> {
        Self::new(theta, 0.0)
    }

    pub fn theta(&self) -> f64 {
        self.theta
    }

    pub fn phi(&self) -> f64 {
        self.phi
    }
}

/// Wall-to-screen distance and the radial sample grid on the screen.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ScreenGeometry {
    screen_distance: f64,
    rho_max: f64,
    rho_count: usize,
}

impl ScreenGeometry {
    pub fn new(screen_distance: f64, rho_max: f64, rho_count: usize) -> Result<Self, ModelError> {
        if !(screen_distance > 0.0) {
            return Err(ModelError::NonPositiveScreenDistance(screen_distance));
        }
        if !(rho_max > 0.0) {
            return Err(ModelError::NegativeRho(rho_max));
        }
        if rho_count < 2 {
            return Err(ModelError::ScreenGridTooSmall(rho_count));
        }
        Ok(Self { screen_distance, rho_max, rho_count })
    }

    /// Wall-to-screen distance L in bohr.
    pub fn screen_distance(&self) -> f64 {
        self.screen_distance
    }

    pub fn rho_max(&self) -> f64 {
        self.rho_max
    }

    pub fn rho_count(&self) -> usize {
        self.rho_count
    }

    /// Uniform radial sample grid [0, rho_max].
    pub fn rho_grid(&self) -> Vec<f64> {
        let n = self.rho_count;
        let step = self.rho_max / (n - 1) as f64;
        (0..n)
            .map(|i| if i == n - 1 { self.rho_max } else { i as f64 * step })
            .collect()
    }
}

/// Free-space photodetachment cross section
/// `sigma0 = 16 sqrt(2) pi^2 B^2 E^(3/2) / (3 c (E_b + E)^3)`.
///
/// Smooth in E, vanishing at threshold and at high energy, with its maximum
/// exactly at E = E_b.
pub fn sigma0(ion: &IonModel, electron_energy: f64) -> Result<f64, ModelError> {
    if !(electron_energy > 0.0) {
        return Err(ModelError::NonPositiveEnergy(electron_energy));
    }
    let b = ion.normalization();
    let c = ion.light_speed();
    let eb = ion.binding_energy();
    let num = 16.0 * 2.0_f64.sqrt() * PI * PI * b * b * electron_energy.powf(1.5);
    let den = 3.0 * c * (eb + electron_energy).powi(3);
    Ok(num / den)
}

/// Oscillatory kernel of the interference term,
/// `A1(u) = sin(u-a)/u + 2 cos(u-a)/u^2 - 2 sin(u-a)/u^3 - 2 sin(a)/u^3`
/// with `a = mu*pi/2`. Equals `integral_0^1 t^2 cos(u t - a) dt`, so
/// |A1| <= 1/3 for all u >= 0.
///
/// Below [`A1_SERIES_THRESHOLD`] the closed form cancels catastrophically
/// (each term grows like 1/u^3 while the sum stays bounded) and the
/// Maclaurin series branch takes over; the two branches agree to better
/// than 1e-10 across the switch.
pub fn a1(u: f64, mu: f64) -> Result<f64, ModelError> {
    if !(u >= 0.0) {
        return Err(ModelError::NegativeAction(u));
    }
    if u < A1_SERIES_THRESHOLD {
        Ok(a1_series(u, mu))
    } else {
        Ok(a1_direct(u, mu))
    }
}

/// Closed-form branch of [`a1`]. Exact but cancellation-prone as u -> 0.
pub fn a1_direct(u: f64, mu: f64) -> f64 {
    let a = mu * PI / 2.0;
    let (s, c) = (u - a).sin_cos();
    s / u + 2.0 * c / (u * u) - 2.0 * s / (u * u * u) - 2.0 * a.sin() / (u * u * u)
}

/// Maclaurin-series branch of [`a1`]:
/// `cos(a) (1/3 - u^2/10 + u^4/168 - u^6/6480)
///  + sin(a) (u/4 - u^3/36 + u^5/960)`.
/// Truncation error is below 1e-12 for u <= 0.05.
pub fn a1_series(u: f64, mu: f64) -> f64 {
    let a = mu * PI / 2.0;
    let u2 = u * u;
    let even = 1.0 / 3.0 + u2 * (-0.1 + u2 * (1.0 / 168.0 - u2 / 6480.0));
    let odd = u * (0.25 + u2 * (-1.0 / 36.0 + u2 / 960.0));
    a.cos() * even + a.sin() * odd
}

/// Modulation of the total cross section by the wall: `A(u) = 1 - 3 K A1(u)`.
///
/// Equals 1 identically for K = 0 and tends to 1 as u grows, with
/// `|A - 1| <= 3K (1/u + 2/u^2 + 4/u^3)`.
pub fn modulation(u: f64, surface: &SurfaceModel) -> Result<f64, ModelError> {
    Ok(1.0 - 3.0 * surface.reflection() * a1(u, surface.phase_index())?)
}

/// Interference part of the cross section, from the outgoing hemisphere:
/// `sigma1 = (sigma0/2) [1 + K^2 - 6 K A1(u)]`.
///
/// The bracket is bounded below by (1-K)^2, so sigma1 is never negative.
pub fn sigma1(ion: &IonModel, surface: &SurfaceModel, electron_energy: f64) -> Result<f64, ModelError> {
    let point = DetachmentPoint::from_electron_energy(ion, surface, electron_energy)?;
    let s0 = sigma0(ion, electron_energy)?;
    let k = surface.reflection();
    let bracket = 1.0 + k * k - 6.0 * k * a1(point.action(), surface.phase_index())?;
    Ok(0.5 * s0 * bracket)
}

/// Absorbed part of the cross section, from the wall-facing hemisphere:
/// `sigma2 = sigma0 (1 - K^2) / 2`.
pub fn sigma2(ion: &IonModel, surface: &SurfaceModel, electron_energy: f64) -> Result<f64, ModelError> {
    let s0 = sigma0(ion, electron_energy)?;
    let k = surface.reflection();
    Ok(0.5 * s0 * (1.0 - k * k))
}

/// Total photodetachment cross section `sigma = sigma0(E) A(2 d sqrt(2E))`.
///
/// Identically equal to `sigma1 + sigma2`.
pub fn sigma_total(ion: &IonModel, surface: &SurfaceModel, electron_energy: f64) -> Result<f64, ModelError> {
    let point = DetachmentPoint::from_electron_energy(ion, surface, electron_energy)?;
    let s0 = sigma0(ion, electron_energy)?;
    Ok(s0 * modulation(point.action(), surface)?)
}

/// Flux prefactor `16 k^3 B^2 / (k_b^2 + k^2)^4` shared by the radial,
/// absorbed and screen flux expressions.
fn flux_prefactor(ion: &IonModel, wavenumber: f64) -> f64 {
    let b = ion.normalization();
    let kb2 = ion.bound_wavenumber().powi(2);
    16.0 * wavenumber.powi(3) * b * b / (kb2 + wavenumber * wavenumber).powi(4)
}

/// Radial electron flux of the two-branch outgoing wave,
/// `j_r = P(k) cos^2(theta) [1 + K^2 + 2K cos(2 k d cos(theta) + pi - mu*pi/2)] / r^2`,
/// on the hemisphere pointing away from the wall (theta in [0, pi/2]).
pub fn radial_flux(
    ion: &IonModel,
    surface: &SurfaceModel,
    electron_energy: f64,
    r: f64,
    direction: Angle,
) -> Result<f64, ModelError> {
    if !(r > 0.0) {
        return Err(ModelError::NonPositiveRadius(r));
    }
    let theta = direction.theta();
    if theta > PI / 2.0 {
        return Err(ModelError::AngleOutOfRange { theta, lo: 0.0, hi: PI / 2.0 });
    }
    let point = DetachmentPoint::from_electron_energy(ion, surface, electron_energy)?;
    let k = surface.reflection();
    let cos_t = theta.cos();
    let phase = 2.0 * point.wavenumber() * surface.wall_distance() * cos_t + PI
        - surface.phase_index() * PI / 2.0;
    let bracket = 1.0 + k * k + 2.0 * k * phase.cos();
    Ok(flux_prefactor(ion, point.wavenumber()) * cos_t * cos_t * bracket / (r * r))
}

/// Flux removed by the wall, `T^2 P(k) cos^2(theta) / r^2`, on the
/// wall-facing hemisphere (theta in [pi/2, pi]).
pub fn absorbed_flux(
    ion: &IonModel,
    surface: &SurfaceModel,
    electron_energy: f64,
    r: f64,
    direction: Angle,
) -> Result<f64, ModelError> {
    if !(r > 0.0) {
        return Err(ModelError::NonPositiveRadius(r));
    }
    let theta = direction.theta();
    if theta < PI / 2.0 {
        return Err(ModelError::AngleOutOfRange { theta, lo: PI / 2.0, hi: PI });
    }
    let point = DetachmentPoint::from_electron_energy(ion, surface, electron_energy)?;
    let t = surface.absorption();
    let cos_t = theta.cos();
    Ok(t * t * flux_prefactor(ion, point.wavenumber()) * cos_t * cos_t / (r * r))
}

/// Generalized differential cross section on the enclosing sphere,
/// `d(sigma)/ds = (2 pi E_ph / c) j r^2`, with the r^2 of the flux cancelled
/// against the spherical area element. The outgoing-wave flux is used for
/// theta <= pi/2 and the absorbed-wave flux beyond.
pub fn differential_cross_section(
    ion: &IonModel,
    surface: &SurfaceModel,
    electron_energy: f64,
    direction: Angle,
) -> Result<f64, ModelError> {
    let point = DetachmentPoint::from_electron_energy(ion, surface, electron_energy)?;
    let scale = 2.0 * PI * point.photon_energy() / ion.light_speed();
    // evaluated at r = 1 bohr; j * r^2 carries no r dependence
    let flux = if direction.theta() <= PI / 2.0 {
        radial_flux(ion, surface, electron_energy, 1.0, direction)?
    } else {
        absorbed_flux(ion, surface, electron_energy, 1.0, direction)?
    };
    Ok(scale * flux)
}

/// Electron flux through a screen at distance L behind the wall,
/// `j_z(rho) = 2 P(k) L^3 / (rho^2+L^2)^(5/2)
///            [1 + K cos(2 k d L / sqrt(rho^2+L^2) + pi - mu*pi/2)]`.
///
/// Nonnegative for K <= 1 and decaying like rho^-5.
pub fn screen_flux(
    ion: &IonModel,
    surface: &SurfaceModel,
    electron_energy: f64,
    geometry: &ScreenGeometry,
    rho: f64,
) -> Result<f64, ModelError> {
    if !(rho >= 0.0) {
        return Err(ModelError::NegativeRho(rho));
    }
    let point = DetachmentPoint::from_electron_energy(ion, surface, electron_energy)?;
    let k = surface.reflection();
    let l = geometry.screen_distance();
    let dist = (rho * rho + l * l).sqrt();
    let phase = point.action() * (l / dist) + PI - surface.phase_index() * PI / 2.0;
    let envelope = 2.0 * flux_prefactor(ion, point.wavenumber()) * l.powi(3) / dist.powi(5);
    Ok(envelope * (1.0 + k * phase.cos()))
}

/// Outgoing detached-electron wave at large distance,
/// `Psi+ = [4 k^2 B i / (k_b^2+k^2)^2] cos(theta)
///         [exp(-i k d cos(theta)) - K exp(i(k d cos(theta) - mu*pi/2))]
///         exp(i k r) / (k r)`.
pub fn outgoing_wave(
    ion: &IonModel,
    surface: &SurfaceModel,
    electron_energy: f64,
    r: f64,
    direction: Angle,
) -> Result<Complex64, ModelError> {
    if !(r > 0.0) {
        return Err(ModelError::NonPositiveRadius(r));
    }
    let theta = direction.theta();
    if theta > PI / 2.0 {
        return Err(ModelError::AngleOutOfRange { theta, lo: 0.0, hi: PI / 2.0 });
    }
    let point = DetachmentPoint::from_electron_energy(ion, surface, electron_energy)?;
    let k = point.wavenumber();
    let b = ion.normalization();
    let kb2 = ion.bound_wavenumber().powi(2);
    let cos_t = theta.cos();
    let amp = Complex64::new(0.0, 4.0 * k * k * b / (kb2 + k * k).powi(2)) * cos_t;
    let kd_cos = k * surface.wall_distance() * cos_t;
    let direct = Complex64::from_polar(1.0, -kd_cos);
    let reflected = Complex64::from_polar(
        surface.reflection(),
        kd_cos - surface.phase_index() * PI / 2.0,
    );
    let radial = Complex64::from_polar(1.0, k * r) / (k * r);
    Ok(amp * (direct - reflected) * radial)
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::{assert_abs_diff_eq, assert_relative_eq};
    use proptest::prelude::*;

    fn ion() -> IonModel {
        IonModel::h_minus()
    }

    fn wall(k: f64, mu: f64, d: f64) -> SurfaceModel {
        SurfaceModel::new(k, mu, d).unwrap()
    }

    #[test]
    fn ion_invariants_rejected() {
        assert!(IonModel::new(-0.1, 0.3, 137.0).is_err());
        assert!(IonModel::new(0.03, 0.0, 137.0).is_err());
        assert!(IonModel::new(0.03, 0.3, -1.0).is_err());
    }

    #[test]
    fn surface_invariants() {
        assert!(SurfaceModel::new(1.2, 1.0, 100.0).is_err());
        assert!(SurfaceModel::new(-0.1, 1.0, 100.0).is_err());
        assert!(SurfaceModel::new(0.5, 1.0, 0.0).is_err());
        let s = wall(0.6, 1.0, 100.0);
        let t = s.absorption();
        assert_relative_eq!(t * t + 0.36, 1.0, epsilon = 1e-15);
        // K = 1 absorbs nothing, exactly
        assert_eq!(wall(1.0, 2.0, 100.0).absorption(), 0.0);
    }

    #[test]
    fn near_field_warning() {
        assert!(wall(0.5, 1.0, 40.0).asymptotic_warning().is_some());
        assert!(wall(0.5, 1.0, 100.0).asymptotic_warning().is_none());
    }

    #[test]
    fn detachment_point_derived_quantities() {
        let s = wall(1.0, 2.0, 100.0);
        let p = DetachmentPoint::from_electron_energy(&ion(), &s, 0.009).unwrap();
        assert_relative_eq!(p.wavenumber(), (2.0_f64 * 0.009).sqrt(), epsilon = 1e-15);
        assert_relative_eq!(p.photon_energy(), 0.009 + 0.027716, epsilon = 1e-15);
        assert_relative_eq!(p.action(), 200.0 * (0.018_f64).sqrt(), epsilon = 1e-12);
        assert!(p.photon_energy() > ion().binding_energy());

        assert!(DetachmentPoint::from_electron_energy(&ion(), &s, 0.0).is_err());
        let below = DetachmentPoint::from_photon_energy(&ion(), &s, 0.01);
        assert!(matches!(below, Err(ModelError::BelowThreshold { .. })));
    }

    #[test]
    fn sigma0_limits_and_peak_value() {
        let i = ion();
        assert!(sigma0(&i, -1.0).is_err());
        assert!(sigma0(&i, 0.0).is_err());
        // E^(3/2) factor pushes the threshold value to zero
        assert!(sigma0(&i, 1e-12).unwrap() < 1e-14);
        assert!(sigma0(&i, 1e-14).unwrap() < sigma0(&i, 1e-12).unwrap());
        assert!(sigma0(&i, 1e6).unwrap() < 1e-10);
        // closed-form value at the maximum: 2 sqrt(2) pi^2 B^2 / (3 c E_b^(3/2))
        let eb = i.binding_energy();
        let expected = 2.0 * 2.0_f64.sqrt() * PI * PI * i.normalization().powi(2)
            / (3.0 * i.light_speed() * eb.powf(1.5));
        assert_relative_eq!(sigma0(&i, eb).unwrap(), expected, max_relative = 1e-14);
    }

    #[test]
    fn sigma0_peaks_at_binding_energy() {
        // golden-section search against the analytic stationary point
        let i = ion();
        let f = |e: f64| sigma0(&i, e).unwrap();
        let (mut lo, mut hi) = (1e-6, 10.0 * i.binding_energy());
        let inv_phi = (5.0_f64.sqrt() - 1.0) / 2.0;
        let (mut a, mut b) = (hi - inv_phi * (hi - lo), lo + inv_phi * (hi - lo));
        for _ in 0..200 {
            if f(a) > f(b) {
                hi = b;
            } else {
                lo = a;
            }
            a = hi - inv_phi * (hi - lo);
            b = lo + inv_phi * (hi - lo);
        }
        let argmax = 0.5 * (lo + hi);
        assert_relative_eq!(argmax, i.binding_energy(), max_relative = 1e-7);
    }

    #[test]
    fn a1_spot_values() {
        // u = pi, mu = 2: sin(pi - pi) = 0 leaves only 2 cos(0)/pi^2
        assert_relative_eq!(a1(PI, 2.0).unwrap(), 2.0 / (PI * PI), epsilon = 1e-13);
        // u -> 0 limit is cos(mu pi/2)/3
        for mu in [0.0, 0.5, 1.0, 1.5, 2.0, 3.0] {
            assert_relative_eq!(
                a1(1e-12, mu).unwrap(),
                (mu * PI / 2.0).cos() / 3.0,
                epsilon = 1e-12,
            );
        }
        // decay at large u
        assert!(a1(1e6, 1.5).unwrap().abs() < 2e-6);
        assert!(a1(-0.1, 1.0).is_err());
    }

    #[test]
    fn a1_series_matches_direct_across_threshold() {
        for mu in [0.0, 0.5, 1.0, 1.5, 2.0] {
            let mut u = 0.02;
            while u <= 0.08 {
                let diff = (a1_series(u, mu) - a1_direct(u, mu)).abs();
                assert!(diff <= 1e-10, "mu={mu} u={u} diff={diff:e}");
                u += 0.001;
            }
        }
    }

    #[test]
    fn modulation_spot_values() {
        let s = wall(1.0, 2.0, 100.0);
        // u = pi, K = 1, mu = 2: 1 - 6/pi^2
        assert_relative_eq!(
            modulation(PI, &s).unwrap(),
            1.0 - 6.0 / (PI * PI),
            epsilon = 1e-13,
        );
        // no wall for K = 0, exactly
        let transparent = wall(0.0, 1.3, 77.0);
        for u in [0.0, 0.3, 2.0, 55.0, 1e4] {
            assert_eq!(modulation(u, &transparent).unwrap(), 1.0);
        }
        // u -> 0 limit 1 - K cos(mu pi/2)
        let s = wall(0.7, 1.5, 100.0);
        assert_relative_eq!(
            modulation(1e-9, &s).unwrap(),
            1.0 - 0.7 * (1.5 * PI / 2.0).cos(),
            epsilon = 1e-9,
        );
    }

    #[test]
    fn sigma1_reduces_to_half_sigma0_for_transparent_wall() {
        let i = ion();
        let s = wall(0.0, 1.0, 100.0);
        for e in [0.001, 0.009, 0.05] {
            assert_relative_eq!(
                sigma1(&i, &s, e).unwrap(),
                0.5 * sigma0(&i, e).unwrap(),
                max_relative = 1e-15,
            );
        }
    }

    #[test]
    fn sigma1_fully_reflecting_wall_form() {
        // K = 1, d = 100 bohr: (sigma0/2)(2 - 6 A1(u))
        let i = ion();
        let s = wall(1.0, 2.0, 100.0);
        let e = 0.009;
        let u = 200.0 * (2.0 * e as f64).sqrt();
        let expected = 0.5 * sigma0(&i, e).unwrap() * (2.0 - 6.0 * a1(u, 2.0).unwrap());
        assert_relative_eq!(sigma1(&i, &s, e).unwrap(), expected, max_relative = 1e-14);
    }

    #[test]
    fn sigma2_limits() {
        let i = ion();
        assert_eq!(sigma2(&i, &wall(1.0, 2.0, 100.0), 0.009).unwrap(), 0.0);
        assert_relative_eq!(
            sigma2(&i, &wall(0.0, 2.0, 100.0), 0.009).unwrap(),
            0.5 * sigma0(&i, 0.009).unwrap(),
            max_relative = 1e-15,
        );
    }

    #[test]
    fn sigma_total_composition() {
        let i = ion();
        // K = 0 leaves sigma0 untouched
        let s = wall(0.0, 1.0, 100.0);
        assert_eq!(sigma_total(&i, &s, 0.01).unwrap(), sigma0(&i, 0.01).unwrap());
        // enormous d drives the modulation to 1
        let far = wall(1.0, 2.0, 1e12);
        assert_relative_eq!(
            sigma_total(&i, &far, 0.01).unwrap(),
            sigma0(&i, 0.01).unwrap(),
            max_relative = 1e-10,
        );
        // u = pi, K = 1, mu = 2
        let s = wall(1.0, 2.0, 100.0);
        let e = (PI / 200.0) * (PI / 200.0) / 2.0;
        assert_relative_eq!(
            sigma_total(&i, &s, e).unwrap(),
            sigma0(&i, e).unwrap() * (1.0 - 6.0 / (PI * PI)),
            max_relative = 1e-13,
        );
    }

    #[test]
    fn flipping_the_absorbed_sign_breaks_the_total() {
        // the opposite sign convention for sigma2 cannot satisfy
        // sigma1 + sigma2 = sigma0 * A; this guards the implemented choice
        let i = ion();
        let s = wall(0.6, 1.5, 100.0);
        let e = 0.009;
        let flipped = -sigma2(&i, &s, e).unwrap();
        let lhs = sigma1(&i, &s, e).unwrap() + flipped;
        let u = 2.0 * 100.0 * (2.0 * e as f64).sqrt();
        let rhs = sigma0(&i, e).unwrap() * modulation(u, &s).unwrap();
        assert!((lhs - rhs).abs() > 1e-3 * rhs.abs());
    }

    proptest! {
        // sign-corrected absorbed part against the total: exact identity
        #[test]
        fn sigma1_plus_sigma2_is_sigma0_times_modulation(
            e in 1e-4f64..0.2,
            k in 0.0f64..=1.0,
            mu in 0.0f64..4.0,
            d in 51.0f64..2000.0,
        ) {
            let i = ion();
            let s = wall(k, mu, d);
            let lhs = sigma1(&i, &s, e).unwrap() + sigma2(&i, &s, e).unwrap();
            let u = 2.0 * d * (2.0 * e).sqrt();
            let rhs = sigma0(&i, e).unwrap() * modulation(u, &s).unwrap();
            prop_assert!((lhs - rhs).abs() <= 1e-12 * rhs.abs().max(1e-300));
        }

        #[test]
        fn modulation_envelope(
            u in 0.1f64..1e4,
            k in 0.0f64..=1.0,
            mu in 0.0f64..4.0,
        ) {
            let s = wall(k, mu, 100.0);
            let a = modulation(u, &s).unwrap();
            let bound = 3.0 * k * (1.0 / u + 2.0 / (u * u) + 4.0 / (u * u * u));
            prop_assert!((a - 1.0).abs() <= bound + 1e-15);
        }

        #[test]
        fn flux_brackets_bounded(
            e in 1e-4f64..0.2,
            k in 0.0f64..=1.0,
            mu in 0.0f64..4.0,
            theta in 0.0f64..std::f64::consts::FRAC_PI_2,
            rho in 0.0f64..1e5,
        ) {
            let i = ion();
            let s = wall(k, mu, 100.0);
            let dir = Angle::polar(theta).unwrap();
            let p = flux_prefactor(&i, (2.0 * e).sqrt());
            let cos2 = theta.cos().powi(2);
            let jr = radial_flux(&i, &s, e, 10.0, dir).unwrap();
            let bracket = jr * 100.0 / (p * cos2);
            prop_assert!(jr >= 0.0);
            prop_assert!(bracket >= (1.0 - k).powi(2) - 1e-9);
            prop_assert!(bracket <= (1.0 + k).powi(2) + 1e-9);

            let g = ScreenGeometry::new(1e4, 8e4, 101).unwrap();
            let jz = screen_flux(&i, &s, e, &g, rho).unwrap();
            prop_assert!(jz >= 0.0);
            let envelope = 2.0 * p * 1e12 / (rho * rho + 1e8).powf(2.5);
            let jz_bracket = jz / envelope;
            prop_assert!(jz_bracket >= 1.0 - k - 1e-9);
            prop_assert!(jz_bracket <= 1.0 + k + 1e-9);
        }
    }

    #[test]
    fn radial_flux_edges() {
        let i = ion();
        let s = wall(1.0, 2.0, 100.0);
        // cos^2 kills the flux along the wall plane
        let side = Angle::polar(PI / 2.0).unwrap();
        assert_abs_diff_eq!(radial_flux(&i, &s, 0.009, 1e4, side).unwrap(), 0.0, epsilon = 1e-35);
        assert!(radial_flux(&i, &s, 0.009, 0.0, Angle::polar(0.1).unwrap()).is_err());
        assert!(radial_flux(&i, &s, 0.009, 1.0, Angle::polar(2.0).unwrap()).is_err());
        // theta = 0, K = 1, mu = 2: bracket collapses to 2 + 2 cos(2kd)
        let e = 0.009;
        let k = (2.0 * e as f64).sqrt();
        let fwd = radial_flux(&i, &s, e, 100.0, Angle::polar(0.0).unwrap()).unwrap();
        let expected = flux_prefactor(&i, k) * (2.0 + 2.0 * (2.0 * k * 100.0).cos()) / 1e4;
        assert_relative_eq!(fwd, expected, max_relative = 1e-12);
    }

    #[test]
    fn absorbed_flux_edges() {
        let i = ion();
        let e = 0.009;
        let back = Angle::polar(3.0).unwrap();
        // total reflection absorbs nothing
        assert_eq!(absorbed_flux(&i, &wall(1.0, 2.0, 100.0), e, 50.0, back).unwrap(), 0.0);
        // transparent wall absorbs the full one-source flux
        let k = (2.0 * e as f64).sqrt();
        let expected = flux_prefactor(&i, k) * back.theta().cos().powi(2) / 2500.0;
        assert_relative_eq!(
            absorbed_flux(&i, &wall(0.0, 2.0, 100.0), e, 50.0, back).unwrap(),
            expected,
            max_relative = 1e-14,
        );
        assert!(absorbed_flux(&i, &wall(0.5, 2.0, 100.0), e, 50.0, Angle::polar(0.3).unwrap()).is_err());
    }

    #[test]
    fn differential_cross_section_dispatches_on_hemisphere() {
        let i = ion();
        let s = wall(0.4, 1.5, 100.0);
        let e = 0.009;
        let p = DetachmentPoint::from_electron_energy(&i, &s, e).unwrap();
        let scale = 2.0 * PI * p.photon_energy() / i.light_speed();
        let out = Angle::polar(0.7).unwrap();
        assert_relative_eq!(
            differential_cross_section(&i, &s, e, out).unwrap(),
            scale * radial_flux(&i, &s, e, 1.0, out).unwrap(),
            max_relative = 1e-15,
        );
        let back = Angle::polar(2.5).unwrap();
        assert_relative_eq!(
            differential_cross_section(&i, &s, e, back).unwrap(),
            scale * absorbed_flux(&i, &s, e, 1.0, back).unwrap(),
            max_relative = 1e-15,
        );
        assert_abs_diff_eq!(
            differential_cross_section(&i, &s, e, Angle::polar(PI / 2.0).unwrap()).unwrap(),
            0.0,
            epsilon = 1e-30,
        );
    }

    #[test]
    fn screen_flux_edges() {
        let i = ion();
        let s = wall(0.8, 1.0, 100.0);
        let g = ScreenGeometry::new(1e4, 8e4, 101).unwrap();
        let e = 0.009;
        assert!(screen_flux(&i, &s, e, &g, -1.0).is_err());
        // rho = 0 closed form
        let p = DetachmentPoint::from_electron_energy(&i, &s, e).unwrap();
        let phase0 = p.action() + PI - 0.5 * PI;
        let expected = 2.0 * flux_prefactor(&i, p.wavenumber()) / 1e8 * (1.0 + 0.8 * phase0.cos());
        assert_relative_eq!(screen_flux(&i, &s, e, &g, 0.0).unwrap(), expected, max_relative = 1e-12);
        // far-field decay
        assert!(screen_flux(&i, &s, e, &g, 1e8).unwrap() < 1e-25);
    }

    #[test]
    fn outgoing_wave_edges() {
        let i = ion();
        let e = 0.009;
        // K = 0 keeps only the direct branch with its d cos(theta) phase lag
        let s0 = wall(0.0, 2.0, 100.0);
        let dir = Angle::polar(0.5).unwrap();
        let k = (2.0 * e as f64).sqrt();
        let psi = outgoing_wave(&i, &s0, e, 1e4, dir).unwrap();
        let kb2 = i.bound_wavenumber().powi(2);
        let amp = 4.0 * k * k * i.normalization() / (kb2 + k * k).powi(2) * dir.theta().cos();
        let r1 = 1e4 - 100.0 * dir.theta().cos();
        let expected = Complex64::new(0.0, amp) * Complex64::from_polar(1.0, k * r1) / (k * 1e4);
        assert_relative_eq!(psi.re, expected.re, max_relative = 1e-10);
        assert_relative_eq!(psi.im, expected.im, max_relative = 1e-10);
        // cos(theta) node at the wall plane
        let side = outgoing_wave(&i, &s0, e, 1e4, Angle::polar(PI / 2.0).unwrap()).unwrap();
        assert!(side.norm() < 1e-17);
        assert!(outgoing_wave(&i, &s0, e, -5.0, dir).is_err());
    }

    #[test]
    fn angle_bounds() {
        assert!(Angle::new(-0.1, 0.0).is_err());
        assert!(Angle::new(3.2, 0.0).is_err());
        assert!(Angle::new(1.0, -0.1).is_err());
        assert!(Angle::new(1.0, 2.0 * PI).is_err());
        assert!(Angle::new(PI, 0.0).is_ok());
    }

    #[test]
    fn screen_geometry_grid() {
        let g = ScreenGeometry::new(1e4, 100.0, 5).unwrap();
        assert_eq!(g.rho_grid(), vec![0.0, 25.0, 50.0, 75.0, 100.0]);
        assert!(ScreenGeometry::new(0.0, 1.0, 5).is_err());
        assert!(ScreenGeometry::new(1.0, 1.0, 1).is_err());
    }
}
