//! Globally adaptive Gauss-Kronrod quadrature.
//!
//! A 7-point Gauss rule nested inside a 15-point Kronrod rule gives a value
//! and an error estimate per interval; the interval with the worst estimate
//! is bisected until the summed estimate meets the tolerance. Subdivision
//! depth therefore scales with the oscillation count of the integrand, which
//! is what the flux integrals need (their phase grows linearly with the
//! round-trip action).

use std::collections::BinaryHeap;
use thiserror::Error;

// 15-point Kronrod abscissae on [-1, 1] (positive half, descending),
// odd-indexed entries are the embedded 7-point Gauss nodes.
const XGK: [f64; 8] = [
    0.991455371120813,
    0.949107912342759,
    0.864864423359769,
    0.741531185599394,
    0.586087235467691,
    0.405845151377397,
    0.207784955007898,
    0.000000000000000,
];

const WGK: [f64; 8] = [
    0.022935322010529,
    0.063092092629979,
    0.104790010322250,
    0.140653259715525,
    0.169004726639267,
    0.190350578064785,
    0.204432940075298,
    0.209482141084728,
];

const WG: [f64; 4] = [
    0.129484966168870,
    0.279705391489277,
    0.381830050505119,
    0.417959183673469,
];

#[derive(Debug, Clone, Error, PartialEq)]
pub enum QuadratureError {
    #[error("invalid quadrature spec: {0}")]
    InvalidSpec(String),
    #[error("integration bounds reversed: a={a} > b={b}")]
    ReversedBounds { a: f64, b: f64 },
    #[error(
        "adaptive quadrature did not converge within {max_subdivisions} subdivisions \
         (best estimate {best} +- {error_estimate})"
    )]
    NonConvergence {
        best: f64,
        error_estimate: f64,
        max_subdivisions: usize,
    },
}

/// Tolerances and subdivision budget for [`integrate_adaptive`].
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct QuadratureSpec {
    pub abs_tol: f64,
    pub rel_tol: f64,
    pub max_subdivisions: usize,
}

impl QuadratureSpec {
    pub fn new(abs_tol: f64, rel_tol: f64, max_subdivisions: usize) -> Result<Self, QuadratureError> {
        let spec = Self { abs_tol, rel_tol, max_subdivisions };
        spec.validate()?;
        Ok(spec)
    }

    pub fn validate(&self) -> Result<(), QuadratureError> {
        if !(self.abs_tol > 0.0) {
            return Err(QuadratureError::InvalidSpec(format!(
                "abs_tol must be positive, got {}",
                self.abs_tol
            )));
        }
        if !(self.rel_tol > 0.0) {
            return Err(QuadratureError::InvalidSpec(format!(
                "rel_tol must be positive, got {}",
                self.rel_tol
            )));
        }
        if self.max_subdivisions < 1 {
            return Err(QuadratureError::InvalidSpec(
                "max_subdivisions must be at least 1".into(),
            ));
        }
        Ok(())
    }
}

impl Default for QuadratureSpec {
    fn default() -> Self {
        Self {
            abs_tol: 1e-16,
            rel_tol: 1e-11,
            max_subdivisions: 4000,
        }
    }
}

/// Converged integral with its error estimate.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct QuadratureResult {
    pub value: f64,
    pub error_estimate: f64,
    pub subdivisions: usize,
}

#[derive(Debug, Clone, Copy)]
struct Segment {
    a: f64,
    b: f64,
    value: f64,
    error: f64,
    resabs: f64,
}

impl PartialEq for Segment {
    fn eq(&self, other: &Self) -> bool {
        self.error == other.error
    }
}
impl Eq for Segment {}
impl PartialOrd for Segment {
    fn partial_cmp(&self, other: &Self) -> Option<std::cmp::Ordering> {
        Some(self.cmp(other))
    }
}
impl Ord for Segment {
    fn cmp(&self, other: &Self) -> std::cmp::Ordering {
        self.error.total_cmp(&other.error)
    }
}

/// One 15-point Kronrod evaluation on [a, b] with the QUADPACK-style
/// conservative error estimate.
fn kronrod_15<F: Fn(f64) -> f64>(f: &F, a: f64, b: f64) -> Segment {
    let center = 0.5 * (a + b);
    let half = 0.5 * (b - a);

    let f_center = f(center);
    // the embedded 7-point Gauss rule shares the center node
    let mut result_gauss = f_center * WG[3];
    let mut result_kronrod = f_center * WGK[7];
    let mut result_abs = result_kronrod.abs();

    let mut fv = [0.0_f64; 15];
    fv[7] = f_center;

    for (j, xk) in XGK.iter().enumerate().take(7) {
        let abscissa = half * xk;
        let f_lo = f(center - abscissa);
        let f_hi = f(center + abscissa);
        fv[j] = f_lo;
        fv[14 - j] = f_hi;
        let sum = f_lo + f_hi;
        result_kronrod += WGK[j] * sum;
        result_abs += WGK[j] * (f_lo.abs() + f_hi.abs());
        if j % 2 == 1 {
            result_gauss += WG[j / 2] * sum;
        }
    }

    let mean = 0.5 * result_kronrod;
    let mut result_asc = WGK[7] * (f_center - mean).abs();
    for j in 0..7 {
        result_asc += WGK[j] * ((fv[j] - mean).abs() + (fv[14 - j] - mean).abs());
    }

    let value = result_kronrod * half;
    result_abs *= half.abs();
    result_asc *= half.abs();

    let mut error = ((result_kronrod - result_gauss) * half).abs();
    if result_asc != 0.0 && error != 0.0 {
        let scale = (200.0 * error / result_asc).powf(1.5);
        error = if scale < 1.0 { result_asc * scale } else { result_asc };
    }
    if result_abs > f64::MIN_POSITIVE / (50.0 * f64::EPSILON) {
        error = error.max(50.0 * f64::EPSILON * result_abs);
    }

    Segment { a, b, value, error, resabs: result_abs }
}

/// Integrate `f` over [a, b], bisecting the worst interval until the summed
/// error estimate satisfies `max(abs_tol, rel_tol * |value|)`.
///
/// Exhausting the subdivision budget returns
/// [`QuadratureError::NonConvergence`] carrying the best estimate so far.
pub fn integrate_adaptive<F: Fn(f64) -> f64>(
    f: F,
    a: f64,
    b: f64,
    spec: &QuadratureSpec,
) -> Result<QuadratureResult, QuadratureError> {
    spec.validate()?;
    if a > b {
        return Err(QuadratureError::ReversedBounds { a, b });
    }
    if a == b {
        return Ok(QuadratureResult { value: 0.0, error_estimate: 0.0, subdivisions: 0 });
    }

    let mut heap = BinaryHeap::new();
    heap.push(kronrod_15(&f, a, b));
    let mut subdivisions = 0usize;

    loop {
        let total_value: f64 = heap.iter().map(|s| s.value).sum();
        let total_error: f64 = heap.iter().map(|s| s.error).sum();
        // cancellation in oscillatory integrands caps the attainable
        // accuracy at the round-off of integral |f|; asking for less than
        // that would subdivide forever
        let roundoff_floor: f64 = 100.0 * f64::EPSILON * heap.iter().map(|s| s.resabs).sum::<f64>();
        let tolerance = spec
            .abs_tol
            .max(spec.rel_tol * total_value.abs())
            .max(roundoff_floor);

        if total_error <= tolerance {
            return Ok(QuadratureResult { value: total_value, error_estimate: total_error, subdivisions });
        }
        if subdivisions >= spec.max_subdivisions {
            return Err(QuadratureError::NonConvergence {
                best: total_value,
                error_estimate: total_error,
                max_subdivisions: spec.max_subdivisions,
            });
        }

        let worst = heap.pop().expect("heap holds at least one segment");
        let mid = 0.5 * (worst.a + worst.b);
        if mid <= worst.a || mid >= worst.b {
            // interval at floating-point resolution; keep its estimate as is
            let mut exhausted = worst;
            exhausted.error = 0.0;
            heap.push(exhausted);
            continue;
        }
        heap.push(kronrod_15(&f, worst.a, mid));
        heap.push(kronrod_15(&f, mid, worst.b));
        subdivisions += 1;
    }
}
