//! Mixed-state geometric phase of a qubit Bloch trajectory.
//!
//! The `λ+` eigenvector of `ρ = (1 + v·σ)/2` is parametrized as
//! `cos(ϑ/2)|↑⟩ + e^{iχ} sin(ϑ/2)|↓⟩`, where `ϑ` is the polar angle of `v` from
//! `+z` and `χ` its azimuth. The track stores `θ_t = π − ϑ`, the angle for which
//! `sin(θ_t/2) = 2R / sqrt(4R² + (ε+ − A)²)`, so the connection term reads
//! `∫ χ̇ cos²(θ_t/2) dt`.
//!
//! Three evaluators are provided: the closed form built from the track, its
//! south-pole reduction, and a discrete parallel-transport product over
//! eigenvectors that never looks at `χ`.

use std::f64::consts::{PI, TAU};
use std::fmt;
use std::str::FromStr;

use num_complex::Complex64 as C64;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::dynamics::{BlochTrajectory, TimeGrid};
use crate::model::{initial_bloch, BlochVector, InitialStateAngles};

#[derive(Debug, Clone, PartialEq, Error)]
pub enum PhaseError {
    #[error("time step {dt} exceeds {max_dt}; refine the grid (more steps)")]
    UnderResolved { dt: f64, max_dt: f64 },
    #[error("azimuth jumps by pi at node {index}; refine the grid (more steps)")]
    AmbiguousBranch { index: usize },
    #[error("indeterminate phase: overlap modulus {modulus:e} (orthogonal endpoint states)")]
    IndeterminatePhase { modulus: f64 },
    #[error("initial state is not at the south pole (theta0 = {theta0})")]
    NotSouthPole { theta0: f64 },
    #[error("initial state is mixed (|v| = {norm}); a pure start is required")]
    MixedInitialState { norm: f64 },
    #[error("degenerate density matrix at node {index}; eigenvector undefined")]
    DegenerateSpectrum { index: usize },
    #[error("eigenvectors at nodes {index} and {} nearly orthogonal (overlap {overlap:e}); refine the grid", index + 1)]
    NearlyOrthogonal { index: usize, overlap: f64 },
}

/// Tunables for building a [`PolarTrack`].
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TrackOptions {
    /// Required grid nodes per period of the fastest sector frequency.
    pub sampling_factor: f64,
    /// Below this `R` the azimuth is undefined and the node is flagged.
    pub r_tol: f64,
}

impl Default for TrackOptions {
    fn default() -> Self {
        TrackOptions { sampling_factor: 40.0, r_tol: 1e-12 }
    }
}

/// Smallest overlap modulus whose argument is still reported.
pub const Z_TOL: f64 = 1e-14;
/// Smallest accepted overlap between neighbouring eigenvectors.
pub const TRANSPORT_TOL: f64 = 1e-10;

/// Per-node series derived from a Bloch trajectory.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct PolarTrack {
    pub grid: TimeGrid,
    /// `A = ⟨σz⟩`.
    pub a: Vec<f64>,
    /// `R = |(⟨σx⟩, ⟨σy⟩)| / 2`.
    pub r: Vec<f64>,
    /// Continuously unwrapped azimuth.
    pub chi: Vec<f64>,
    pub theta_t: Vec<f64>,
    /// `ε+ = sqrt(A² + 4R²)`, the Bloch norm.
    pub eps_plus: Vec<f64>,
    pub singular: Vec<bool>,
    pub unwrap_jumps: usize,
}

impl PolarTrack {
    pub fn len(&self) -> usize {
        self.a.len()
    }

    pub fn is_empty(&self) -> bool {
        self.a.is_empty()
    }

    pub fn singular_count(&self) -> usize {
        self.singular.iter().filter(|s| **s).count()
    }

    /// Polar angle of the first node measured from `+z`.
    pub fn initial_polar(&self) -> f64 {
        PI - self.theta_t[0]
    }

    fn connection_increments(&self) -> impl Iterator<Item = (f64, f64, f64)> + '_ {
        (0..self.len() - 1).map(move |i| (self.chi[i + 1] - self.chi[i], self.theta_t[i], self.theta_t[i + 1]))
    }
}

/// Builds the track with [`TrackOptions::default`].
pub fn polar_track(traj: &BlochTrajectory) -> Result<PolarTrack, PhaseError> {
    polar_track_with(traj, &TrackOptions::default())
}

pub fn polar_track_with(traj: &BlochTrajectory, opts: &TrackOptions) -> Result<PolarTrack, PhaseError> {
    let gamma_max = traj.config.gamma_max();
    if gamma_max > 0.0 {
        let max_dt = TAU / (opts.sampling_factor * gamma_max);
        let dt = traj.grid.dt();
        if dt > max_dt {
            return Err(PhaseError::UnderResolved { dt, max_dt });
        }
    }

    let n = traj.len();
    let mut a = Vec::with_capacity(n);
    let mut r = Vec::with_capacity(n);
    let mut theta_t = Vec::with_capacity(n);
    let mut eps_plus = Vec::with_capacity(n);
    let mut singular = Vec::with_capacity(n);
    let mut raw = Vec::with_capacity(n);
    for v in &traj.points {
        let two_r = v.x.hypot(v.y);
        a.push(v.z);
        r.push(0.5 * two_r);
        eps_plus.push(v.z.hypot(two_r));
        theta_t.push(PI - two_r.atan2(v.z));
        singular.push(0.5 * two_r < opts.r_tol);
        raw.push(v.y.atan2(v.x));
    }

    let mut chi = vec![0.0; n];
    let mut unwrap_jumps = 0;
    let mut previous: Option<(f64, f64)> = None; // (unwrapped, raw) at last regular node
    for i in 0..n {
        if singular[i] {
            chi[i] = previous.map_or(0.0, |p| p.0);
            continue;
        }
        match previous {
            None => {
                chi[i] = raw[i];
                // leading singular nodes continue flat from the first regular one
                chi[..i].iter_mut().for_each(|c| *c = raw[i]);
            }
            Some((last, last_raw)) => {
                let step = raw[i] - last_raw;
                let wrapped = wrap_increment(step);
                if wrapped.abs() >= PI {
                    return Err(PhaseError::AmbiguousBranch { index: i });
                }
                if (wrapped - step).abs() > PI {
                    unwrap_jumps += 1;
                }
                chi[i] = last + wrapped;
            }
        }
        previous = Some((chi[i], raw[i]));
    }

    Ok(PolarTrack { grid: traj.grid, a, r, chi, theta_t, eps_plus, singular, unwrap_jumps })
}

// Representative of x in (-π, π].
fn wrap_increment(x: f64) -> f64 {
    let r = (x + PI).rem_euclid(TAU) - PI;
    if r == -PI { PI } else { r }
}

/// Principal value in `[−π, π)`: `−π` is reported in preference to `+π`.
pub fn wrap_phase(x: f64) -> f64 {
    let r = x.rem_euclid(TAU);
    if r >= PI { r - TAU } else { r }
}

/// `|wrap(a − b)|`, the distance between two phases on the circle.
pub fn phase_distance(a: f64, b: f64) -> f64 {
    wrap_phase(a - b).abs()
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum GpMethod {
    ClosedForm,
    SouthPole,
    DiscreteHolonomy,
}

impl fmt::Display for GpMethod {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            GpMethod::ClosedForm => "closed_form",
            GpMethod::SouthPole => "south_pole",
            GpMethod::DiscreteHolonomy => "discrete_holonomy",
        })
    }
}

impl FromStr for GpMethod {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s.replace('-', "_").as_str() {
            "closed_form" => Ok(GpMethod::ClosedForm),
            "south_pole" => Ok(GpMethod::SouthPole),
            "discrete_holonomy" | "holonomy" => Ok(GpMethod::DiscreteHolonomy),
            _ => Err(format!("unknown method '{s}' (expected closed-form, south-pole or holonomy)")),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct GpDiagnostics {
    pub nodes: usize,
    pub unwrap_jumps: usize,
    pub singular_nodes: usize,
    /// Modulus of the complex number whose argument is the phase.
    pub amplitude: f64,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct GpResult {
    /// Principal value in `[−π, π)`.
    pub gamma: f64,
    pub gamma_unwrapped: f64,
    pub method: GpMethod,
    pub diagnostics: GpDiagnostics,
}

impl GpResult {
    fn new(gamma_unwrapped: f64, method: GpMethod, diagnostics: GpDiagnostics) -> Self {
        GpResult { gamma: wrap_phase(gamma_unwrapped), gamma_unwrapped, method, diagnostics }
    }
}

/// The three factors of the closed form: the positive eigenvalue amplitude
/// `sqrt(λ+(τ))`, the endpoint overlap and the connection integral.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ClosedFormTerms {
    pub amplitude: f64,
    pub overlap: C64,
    pub connection: f64,
}

impl ClosedFormTerms {
    /// `arg[amplitude · overlap · e^{−i connection}]`, unwrapped. A positive
    /// amplitude never enters the argument.
    pub fn gamma_unwrapped(&self) -> f64 {
        self.overlap.arg() - self.connection
    }

    pub fn modulus(&self) -> f64 {
        self.amplitude * self.overlap.norm()
    }
}

/// Evaluates the closed-form factors; `θ0` comes from the prepared state.
pub fn closed_form_terms(track: &PolarTrack, angles: &InitialStateAngles) -> ClosedFormTerms {
    let z0 = initial_bloch(angles).z;
    let cos0 = (0.5 * (1.0 + z0)).max(0.0).sqrt();
    let sin0 = (0.5 * (1.0 - z0)).max(0.0).sqrt();
    let last = track.len() - 1;
    let (sin_tau, cos_tau) = (0.5 * track.theta_t[last]).sin_cos();
    let delta_chi = track.chi[last] - track.chi[0];
    let overlap = C64::new(cos0 * sin_tau, 0.0) + C64::from_polar(sin0 * cos_tau, delta_chi);

    // trapezoid on χ increments
    let connection = track
        .connection_increments()
        .map(|(d_chi, lo, hi)| d_chi * 0.5 * ((0.5 * lo).cos().powi(2) + (0.5 * hi).cos().powi(2)))
        .sum();
    let lambda_plus = 0.5 * (1.0 + track.eps_plus[last]);
    ClosedFormTerms { amplitude: lambda_plus.sqrt(), overlap, connection }
}

pub fn gp_closed_form(track: &PolarTrack, angles: &InitialStateAngles) -> Result<GpResult, PhaseError> {
    let terms = closed_form_terms(track, angles);
    if terms.modulus() < Z_TOL {
        return Err(PhaseError::IndeterminatePhase { modulus: terms.modulus() });
    }
    Ok(GpResult::new(
        terms.gamma_unwrapped(),
        GpMethod::ClosedForm,
        GpDiagnostics {
            nodes: track.len(),
            unwrap_jumps: track.unwrap_jumps,
            singular_nodes: track.singular_count(),
            amplitude: terms.modulus(),
        },
    ))
}

/// `γ = ½ ∫ χ̇ (1 − cos θ_t) dt`, valid for a start at the south pole.
pub fn gp_south_pole(track: &PolarTrack) -> Result<GpResult, PhaseError> {
    let theta0 = track.initial_polar();
    if theta0 < PI - 1e-9 {
        return Err(PhaseError::NotSouthPole { theta0 });
    }
    let gamma: f64 = track
        .connection_increments()
        .map(|(d_chi, lo, hi)| 0.5 * d_chi * 0.5 * ((1.0 - lo.cos()) + (1.0 - hi.cos())))
        .sum();
    Ok(GpResult::new(
        gamma,
        GpMethod::SouthPole,
        GpDiagnostics {
            nodes: track.len(),
            unwrap_jumps: track.unwrap_jumps,
            singular_nodes: track.singular_count(),
            amplitude: 1.0,
        },
    ))
}

/// Unit `λ+` eigenvector of `(1 + v·σ)/2`, using whichever hemisphere chart
/// is regular at `v`.
pub fn plus_eigenvector(v: &BlochVector) -> Option<[C64; 2]> {
    let norm = v.norm();
    if norm < 1e-12 {
        return None;
    }
    let (x, y, z) = (v.x / norm, v.y / norm, v.z / norm);
    Some(if z >= 0.0 {
        let up = (0.5 * (1.0 + z)).sqrt();
        [C64::new(up, 0.0), C64::new(x, y) / (2.0 * up)]
    } else {
        let down = (0.5 * (1.0 - z)).sqrt();
        [C64::new(x, -y) / (2.0 * down), C64::new(down, 0.0)]
    })
}

fn inner(a: &[C64; 2], b: &[C64; 2]) -> C64 {
    a[0].conj() * b[0] + a[1].conj() * b[1]
}

/// `arg[⟨φ0|φτ⟩ Π_i (⟨φi|φi+1⟩ / |⟨φi|φi+1⟩|)^*]`, unwrapped, with the
/// endpoint overlap modulus. Any per-node phase choice gives the same value.
pub fn holonomy_phase(eigenvectors: &[[C64; 2]]) -> Result<(f64, f64), PhaseError> {
    let mut transport = 0.0;
    for (index, pair) in eigenvectors.windows(2).enumerate() {
        let step = inner(&pair[0], &pair[1]);
        if step.norm() < TRANSPORT_TOL {
            return Err(PhaseError::NearlyOrthogonal { index, overlap: step.norm() });
        }
        transport += step.arg();
    }
    let (first, last) = (&eigenvectors[0], &eigenvectors[eigenvectors.len() - 1]);
    let closing = inner(first, last);
    Ok((closing.arg() - transport, closing.norm()))
}

pub fn gp_discrete_holonomy(traj: &BlochTrajectory) -> Result<GpResult, PhaseError> {
    let norm0 = traj.points[0].norm();
    if (norm0 - 1.0).abs() > 1e-9 {
        return Err(PhaseError::MixedInitialState { norm: norm0 });
    }
    let eigenvectors = traj
        .points
        .iter()
        .enumerate()
        .map(|(index, v)| plus_eigenvector(v).ok_or(PhaseError::DegenerateSpectrum { index }))
        .collect::<Result<Vec<_>, _>>()?;
    let (gamma, overlap) = holonomy_phase(&eigenvectors)?;
    let lambda = |v: &BlochVector| 0.5 * (1.0 + v.norm());
    let amplitude = (lambda(&traj.points[0]) * lambda(&traj.points[traj.len() - 1])).sqrt() * overlap;
    if amplitude < Z_TOL {
        return Err(PhaseError::IndeterminatePhase { modulus: amplitude });
    }
    Ok(GpResult::new(
        gamma,
        GpMethod::DiscreteHolonomy,
        GpDiagnostics { nodes: traj.len(), unwrap_jumps: 0, singular_nodes: 0, amplitude },
    ))
}

/// Closed-form phase of a pure state carried once around the `z` axis:
/// `−π(1 − cos θ0)`, with `θ0` the polar angle from `+z`.
pub fn gp_unitary_reference(theta0: f64) -> f64 {
    wrap_phase(-PI * (1.0 - theta0.cos()))
}
