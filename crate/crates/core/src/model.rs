//! Physical parameters, qubit state representations and collective bath sectors.
//!
//! Basis convention: `|↑⟩` is the +1 eigenvector of `σz` and every 2×2 matrix is
//! written in the ordered basis `(|↑⟩, |↓⟩)`. A Bloch vector `v` and a density
//! matrix are related by `ρ = (1 + v·σ)/2`.

use std::f64::consts::{PI, TAU};
use std::fmt;

use nalgebra::Matrix2;
use num_bigint::BigUint;
use num_complex::Complex64 as C64;
use num_traits::{One, ToPrimitive};
use serde::{Deserialize, Serialize};
use thiserror::Error;

/// Slack allowed on `|v| ≤ 1` and on density-matrix invariants.
pub const STATE_TOL: f64 = 1e-12;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum ModelError {
    #[error("invalid configuration: {}", .0.join(", "))]
    InvalidConfig(Vec<String>),
    #[error("theta {0} outside [0, pi]")]
    ThetaOutOfRange(f64),
    #[error("non-finite angle")]
    NonFiniteAngle,
    #[error("bath size must be at least 1")]
    EmptyBath,
    #[error("density matrix violates {0}")]
    InvalidDensity(&'static str),
}

/// Physical parameters of the model: the qubit splitting `omega`, the two
/// bath couplings, and the number of spins in each bath (`hbar = 1`).
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SystemConfig {
    pub omega: f64,
    pub alpha1: f64,
    pub alpha2: f64,
    pub bath_size: u32,
}

impl SystemConfig {
    /// Builds and validates a configuration.
    pub fn new(omega: f64, alpha1: f64, alpha2: f64, bath_size: u32) -> Result<Self, ModelError> {
        validate_config(SystemConfig { omega, alpha1, alpha2, bath_size })
    }

    /// Same physics with both couplings switched off.
    pub fn decoupled(&self) -> Self {
        SystemConfig { alpha1: 0.0, alpha2: 0.0, ..*self }
    }

    /// Largest sector frequency, reached at `m1 = m2 = N/2`.
    pub fn gamma_max(&self) -> f64 {
        let half = f64::from(self.bath_size) / 2.0;
        (self.omega.powi(2) + (self.alpha1 * half).powi(2) + (self.alpha2 * half).powi(2)).sqrt()
    }
}

/// Checks every invariant of a raw configuration and names each violation.
pub fn validate_config(raw: SystemConfig) -> Result<SystemConfig, ModelError> {
    let mut problems = Vec::new();
    for (name, value) in [("omega", raw.omega), ("alpha1", raw.alpha1), ("alpha2", raw.alpha2)] {
        if !value.is_finite() {
            problems.push(format!("{name} not finite"));
        } else if value < 0.0 {
            problems.push(format!("{name} negative"));
        }
    }
    if raw.bath_size == 0 {
        problems.push("bath_size zero".to_string());
    }
    if problems.is_empty() {
        Ok(raw)
    } else {
        Err(ModelError::InvalidConfig(problems))
    }
}

/// Preparation angles of the initial qubit state.
///
/// `theta` is the preparation polar angle: `theta = 0` prepares `|↓⟩` and
/// `theta = π` prepares `|↑⟩`. The polar angle of the resulting Bloch vector,
/// measured from `+z`, is therefore `π − theta` (see [`Self::bloch_polar`]).
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct InitialStateAngles {
    theta: f64,
    phi: f64,
}

impl InitialStateAngles {
    /// `phi` is reduced modulo 2π.
    pub fn new(theta: f64, phi: f64) -> Result<Self, ModelError> {
        if !theta.is_finite() || !phi.is_finite() {
            return Err(ModelError::NonFiniteAngle);
        }
        if !(0.0..=PI).contains(&theta) {
            return Err(ModelError::ThetaOutOfRange(theta));
        }
        let mut phi = phi.rem_euclid(TAU);
        if phi >= TAU {
            phi = 0.0;
        }
        Ok(InitialStateAngles { theta, phi })
    }

    /// Angles whose initial Bloch vector sits at polar angle `theta0` from `+z`.
    pub fn from_bloch_polar(theta0: f64, phi: f64) -> Result<Self, ModelError> {
        Self::new(PI - theta0, phi)
    }

    pub fn theta(&self) -> f64 {
        self.theta
    }

    pub fn phi(&self) -> f64 {
        self.phi
    }

    /// Polar angle of the initial Bloch vector measured from `+z`.
    pub fn bloch_polar(&self) -> f64 {
        PI - self.theta
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Default, Serialize, Deserialize)]
pub struct BlochVector {
    pub x: f64,
    pub y: f64,
    pub z: f64,
}

impl BlochVector {
    pub const fn new(x: f64, y: f64, z: f64) -> Self {
        BlochVector { x, y, z }
    }

    pub fn norm(&self) -> f64 {
        (self.x * self.x + self.y * self.y + self.z * self.z).sqrt()
    }

    pub fn dot(&self, other: &BlochVector) -> f64 {
        self.x * other.x + self.y * other.y + self.z * other.z
    }

    pub fn cross(&self, other: &BlochVector) -> BlochVector {
        BlochVector {
            x: self.y * other.z - self.z * other.y,
            y: self.z * other.x - self.x * other.z,
            z: self.x * other.y - self.y * other.x,
        }
    }

    pub fn scale(&self, s: f64) -> BlochVector {
        BlochVector { x: s * self.x, y: s * self.y, z: s * self.z }
    }

    pub fn add(&self, other: &BlochVector) -> BlochVector {
        BlochVector { x: self.x + other.x, y: self.y + other.y, z: self.z + other.z }
    }

    pub fn max_abs_diff(&self, other: &BlochVector) -> f64 {
        (self.x - other.x).abs().max((self.y - other.y).abs()).max((self.z - other.z).abs())
    }

    pub fn to_array(&self) -> [f64; 3] {
        [self.x, self.y, self.z]
    }

    pub fn is_physical(&self) -> bool {
        self.norm() <= 1.0 + STATE_TOL
    }
}

impl fmt::Display for BlochVector {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "({}, {}, {})", self.x, self.y, self.z)
    }
}

/// Reduced qubit density matrix in the basis `(|↑⟩, |↓⟩)`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct QubitDensity(Matrix2<C64>);

impl QubitDensity {
    /// Wraps a matrix after checking Hermiticity, unit trace and spectrum bounds.
    pub fn new(m: Matrix2<C64>) -> Result<Self, ModelError> {
        Self::with_tolerance(m, STATE_TOL)
    }

    pub fn with_tolerance(m: Matrix2<C64>, tol: f64) -> Result<Self, ModelError> {
        if (m - m.adjoint()).iter().any(|z| z.norm() > tol) {
            return Err(ModelError::InvalidDensity("hermiticity"));
        }
        if (m.trace() - C64::new(1.0, 0.0)).norm() > tol {
            return Err(ModelError::InvalidDensity("unit trace"));
        }
        let rho = QubitDensity(m);
        let (lo, hi) = rho.eigenvalues();
        if lo < -tol || hi > 1.0 + tol {
            return Err(ModelError::InvalidDensity("eigenvalue bounds"));
        }
        Ok(rho)
    }

    pub fn from_bloch(v: &BlochVector) -> Self {
        let half = 0.5;
        QubitDensity(Matrix2::new(
            C64::new(half * (1.0 + v.z), 0.0),
            C64::new(half * v.x, -half * v.y),
            C64::new(half * v.x, half * v.y),
            C64::new(half * (1.0 - v.z), 0.0),
        ))
    }

    pub fn matrix(&self) -> &Matrix2<C64> {
        &self.0
    }

    pub fn bloch(&self) -> BlochVector {
        let m = &self.0;
        BlochVector {
            x: (m[(0, 1)] + m[(1, 0)]).re,
            y: (m[(1, 0)] - m[(0, 1)]).im,
            z: (m[(0, 0)] - m[(1, 1)]).re,
        }
    }

    pub fn trace(&self) -> C64 {
        self.0.trace()
    }

    pub fn purity(&self) -> f64 {
        (self.0 * self.0).trace().re
    }

    /// `(λ−, λ+) = ((1 − |v|)/2, (1 + |v|)/2)`.
    pub fn eigenvalues(&self) -> (f64, f64) {
        let r = self.bloch().norm();
        let tr = self.0.trace().re;
        (0.5 * (tr - r), 0.5 * (tr + r))
    }
}

/// Bloch vector of the prepared state: `(−sinθ sinφ, −sinθ cosφ, −cosθ)`.
pub fn initial_bloch(angles: &InitialStateAngles) -> BlochVector {
    let (st, ct) = angles.theta.sin_cos();
    let (sp, cp) = angles.phi.sin_cos();
    BlochVector::new(-st * sp, -st * cp, -ct)
}

/// Density matrix `cos²(θ/2)|↓⟩⟨↓| + sin²(θ/2)|↑⟩⟨↑| + (i/2) sinθ (e^{iφ}|↑⟩⟨↓| − e^{−iφ}|↓⟩⟨↑|)`.
pub fn initial_density(angles: &InitialStateAngles) -> QubitDensity {
    let half = 0.5 * angles.theta;
    let coherence = C64::new(0.0, 0.5 * angles.theta.sin()) * C64::from_polar(1.0, angles.phi);
    QubitDensity(Matrix2::new(
        C64::new(half.sin().powi(2), 0.0),
        coherence,
        coherence.conj(),
        C64::new(half.cos().powi(2), 0.0),
    ))
}

/// One collective eigenvalue of a bath coupling operator, `m ∈ {−N/2, …, N/2}`.
#[derive(Debug, Clone, PartialEq)]
pub struct SectorWeight {
    /// `2m`, exact for both parities of `N`.
    pub twice_m: i64,
    /// Degeneracy `N! / ((N/2 − m)! (N/2 + m)!)`.
    pub zeta: BigUint,
    /// `zeta / 2^N`.
    pub weight: f64,
}

impl SectorWeight {
    pub fn m(&self) -> f64 {
        self.twice_m as f64 / 2.0
    }
}

/// Binomial row of the bath, ordered by ascending `m`.
pub fn sector_weights(bath_size: u32) -> Result<Vec<SectorWeight>, ModelError> {
    if bath_size == 0 {
        return Err(ModelError::EmptyBath);
    }
    let n = u64::from(bath_size);
    let mut zeta = BigUint::one();
    let mut out = Vec::with_capacity(bath_size as usize + 1);
    for k in 0..=n {
        if k > 0 {
            zeta = zeta * (n - k + 1) / k;
        }
        out.push(SectorWeight {
            twice_m: 2 * k as i64 - n as i64,
            weight: scaled_by_pow2(&zeta, bath_size),
            zeta: zeta.clone(),
        });
    }
    Ok(out)
}

// zeta * 2^-n without overflowing the f64 exponent range on the way.
fn scaled_by_pow2(zeta: &BigUint, n: u32) -> f64 {
    let bits = zeta.bits();
    let shift = bits.saturating_sub(64);
    let mantissa = (zeta >> shift).to_u64().unwrap_or(u64::MAX) as f64;
    let mut exponent = shift as i64 - i64::from(n);
    let mut value = mantissa;
    while exponent < -1000 {
        value *= 2f64.powi(-1000);
        exponent += 1000;
    }
    value * 2f64.powi(exponent as i32)
}
