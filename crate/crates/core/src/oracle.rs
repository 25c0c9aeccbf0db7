//! Brute-force reference: the full Hamiltonian on qubit ⊗ bath1 ⊗ bath2,
//! exact unitary evolution of `ρ_S(0) ⊗ 1/2^N ⊗ 1/2^N`, and a partial trace
//! over both baths.

use nalgebra::{DMatrix, DVector, Matrix2, SymmetricEigen};
use num_complex::Complex64 as C64;
use thiserror::Error;

use crate::dynamics::{BlochTrajectory, Dynamics, DynamicsError, TimeGrid};
use crate::model::{initial_density, InitialStateAngles, ModelError, QubitDensity, SystemConfig};

/// Largest bath size the oracle will build under any override (D = 8192).
pub const HARD_MAX_BATH_SIZE: u32 = 6;

const EIGEN_EPS: f64 = 1e-15;
const EIGEN_MAX_ITER: usize = 10_000;
const REDUCED_TOL: f64 = 1e-10;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum OracleError {
    #[error("bath size {bath_size} exceeds the oracle cap of {cap}")]
    BathTooLarge { bath_size: u32, cap: u32 },
    #[error("Hermitian eigensolver did not converge for dimension {0}")]
    Eigensolver(usize),
    #[error(transparent)]
    Density(#[from] ModelError),
    #[error(transparent)]
    Dynamics(#[from] DynamicsError),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct OracleLimits {
    pub max_bath_size: u32,
}

impl Default for OracleLimits {
    fn default() -> Self {
        OracleLimits { max_bath_size: 4 }
    }
}

impl OracleLimits {
    /// Raises the cap, clamped to [`HARD_MAX_BATH_SIZE`].
    pub fn with_override(max_bath_size: u32) -> Self {
        OracleLimits { max_bath_size: max_bath_size.min(HARD_MAX_BATH_SIZE) }
    }

    fn check(&self, bath_size: u32) -> Result<(), OracleError> {
        let cap = self.max_bath_size.min(HARD_MAX_BATH_SIZE);
        if bath_size > cap {
            return Err(OracleError::BathTooLarge { bath_size, cap });
        }
        Ok(())
    }
}

/// Dense Hermitian matrix on the `2^{2N+1}`-dimensional product space.
#[derive(Debug, Clone, PartialEq)]
pub struct HermitianOperator {
    matrix: DMatrix<C64>,
}

impl HermitianOperator {
    pub fn matrix(&self) -> &DMatrix<C64> {
        &self.matrix
    }

    pub fn dim(&self) -> usize {
        self.matrix.nrows()
    }

    /// `max |H − H†|` over all entries.
    pub fn hermiticity_defect(&self) -> f64 {
        (&self.matrix - self.matrix.adjoint()).iter().map(|z| z.norm()).fold(0.0, f64::max)
    }

    /// Ascending spectrum.
    pub fn eigenvalues(&self) -> Result<Vec<f64>, OracleError> {
        let eig = SymmetricEigen::try_new(self.matrix.clone(), EIGEN_EPS, EIGEN_MAX_ITER)
            .ok_or(OracleError::Eigensolver(self.dim()))?;
        let mut values: Vec<f64> = eig.eigenvalues.iter().copied().collect();
        values.sort_by(f64::total_cmp);
        Ok(values)
    }
}

fn c(re: f64, im: f64) -> C64 {
    C64::new(re, im)
}

fn pauli_x() -> DMatrix<C64> {
    DMatrix::from_row_slice(2, 2, &[c(0., 0.), c(1., 0.), c(1., 0.), c(0., 0.)])
}

fn pauli_y() -> DMatrix<C64> {
    DMatrix::from_row_slice(2, 2, &[c(0., 0.), c(0., -1.), c(0., 1.), c(0., 0.)])
}

fn pauli_z() -> DMatrix<C64> {
    DMatrix::from_row_slice(2, 2, &[c(1., 0.), c(0., 0.), c(0., 0.), c(-1., 0.)])
}

/// `Σ_k (1/2) σ^{(k)}` on `n` spins, site 0 most significant.
fn collective(single: &DMatrix<C64>, n: u32) -> DMatrix<C64> {
    let dim = 1usize << n;
    let mut total = DMatrix::zeros(dim, dim);
    for site in 0..n {
        let mut term = DMatrix::<C64>::identity(1, 1);
        for k in 0..n {
            term = if k == site {
                term.kronecker(&(single * c(0.5, 0.0)))
            } else {
                term.kronecker(&DMatrix::identity(2, 2))
            };
        }
        total += term;
    }
    total
}

/// `H = ω σz/2 ⊗ 1 ⊗ 1 + (α1/2) σx ⊗ S1x ⊗ 1 + (α2/2) σy ⊗ 1 ⊗ S2y`.
pub fn build_hamiltonian(config: &SystemConfig, limits: &OracleLimits) -> Result<HermitianOperator, OracleError> {
    limits.check(config.bath_size)?;
    let n = config.bath_size;
    let bath_dim = 1usize << n;
    let id = DMatrix::<C64>::identity(bath_dim, bath_dim);
    let half = |x: f64| c(0.5 * x, 0.0);

    let free = (pauli_z() * half(config.omega)).kronecker(&id).kronecker(&id);
    let first = (pauli_x() * half(config.alpha1)).kronecker(&collective(&pauli_x(), n)).kronecker(&id);
    let second = (pauli_y() * half(config.alpha2)).kronecker(&id).kronecker(&collective(&pauli_y(), n));
    Ok(HermitianOperator { matrix: free + first + second })
}

/// A diagonalized Hamiltonian ready to answer reduced-state queries.
///
/// Holds `V† (|j⟩⟨k| ⊗ 1) V` for the four qubit matrix units, so the initial
/// state, its evolution and the partial trace all happen in the eigenbasis.
#[derive(Debug, Clone)]
pub struct ExactOracle {
    config: SystemConfig,
    energies: DVector<f64>,
    units: [[DMatrix<C64>; 2]; 2],
}

impl ExactOracle {
    pub fn new(config: &SystemConfig, limits: &OracleLimits) -> Result<Self, OracleError> {
        let h = build_hamiltonian(config, limits)?;
        let dim = h.dim();
        let eig = SymmetricEigen::try_new(h.matrix, EIGEN_EPS, EIGEN_MAX_ITER)
            .ok_or(OracleError::Eigensolver(dim))?;
        let v = eig.eigenvectors;
        let half = dim / 2;
        let up = v.rows(0, half).into_owned();
        let down = v.rows(half, half).into_owned();
        let blocks = [&up, &down];
        let unit = |j: usize, k: usize| blocks[j].adjoint() * blocks[k];
        Ok(ExactOracle {
            config: *config,
            energies: eig.eigenvalues,
            units: [[unit(0, 0), unit(0, 1)], [unit(1, 0), unit(1, 1)]],
        })
    }

    pub fn config(&self) -> &SystemConfig {
        &self.config
    }

    pub fn dim(&self) -> usize {
        self.energies.len()
    }

    /// Eigenbasis representation of `ρ_S(0) ⊗ 1/2^{2N}`.
    fn initial_eigenbasis(&self, angles: &InitialStateAngles) -> DMatrix<C64> {
        let rho = initial_density(angles);
        let norm = 1.0 / (self.dim() / 2) as f64;
        let mut out = DMatrix::zeros(self.dim(), self.dim());
        for j in 0..2 {
            for k in 0..2 {
                out += &self.units[j][k] * (rho.matrix()[(j, k)] * norm);
            }
        }
        out
    }

    fn reduced_from(&self, rho0: &DMatrix<C64>, t: f64) -> Result<QubitDensity, OracleError> {
        let phases: Vec<C64> = self.energies.iter().map(|e| C64::from_polar(1.0, -e * t)).collect();
        let mut m = Matrix2::zeros();
        // ρ_S(t)_{jk} = Σ_ab ρ̃0_ab e^{-i(E_a - E_b)t} (Ũ_{kj})_ba
        for j in 0..2 {
            for k in 0..2 {
                let unit = &self.units[k][j];
                let mut acc = C64::new(0.0, 0.0);
                for b in 0..self.dim() {
                    let pb = phases[b].conj();
                    for a in 0..self.dim() {
                        acc += rho0[(a, b)] * phases[a] * pb * unit[(b, a)];
                    }
                }
                m[(j, k)] = acc;
            }
        }
        Ok(QubitDensity::with_tolerance(m, REDUCED_TOL)?)
    }

    pub fn evolve_reduced(&self, angles: &InitialStateAngles, t: f64) -> Result<QubitDensity, OracleError> {
        self.reduced_from(&self.initial_eigenbasis(angles), t)
    }

    /// One eigendecomposition shared by every node of the grid.
    pub fn trajectory(&self, angles: &InitialStateAngles, grid: &TimeGrid) -> Result<BlochTrajectory, OracleError> {
        let rho0 = self.initial_eigenbasis(angles);
        let points = grid
            .times()
            .map(|t| self.reduced_from(&rho0, t).map(|r| r.bloch()))
            .collect::<Result<Vec<_>, _>>()?;
        Ok(BlochTrajectory::new(*grid, points, self.config, *angles, Dynamics::Physical)?)
    }
}

/// Reduced qubit state at time `t` by exact evolution of the full system.
pub fn evolve_reduced(
    config: &SystemConfig,
    angles: &InitialStateAngles,
    t: f64,
    limits: &OracleLimits,
) -> Result<QubitDensity, OracleError> {
    ExactOracle::new(config, limits)?.evolve_reduced(angles, t)
}

pub fn oracle_trajectory(
    config: &SystemConfig,
    angles: &InitialStateAngles,
    grid: &TimeGrid,
    limits: &OracleLimits,
) -> Result<BlochTrajectory, OracleError> {
    ExactOracle::new(config, limits)?.trajectory(angles, grid)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::dynamics::bloch_at;
    use crate::model::initial_bloch;
    use std::f64::consts::FRAC_PI_2;

    fn cfg(omega: f64, a1: f64, a2: f64, n: u32) -> SystemConfig {
        SystemConfig::new(omega, a1, a2, n).unwrap()
    }

    #[test]
    fn free_qubit_spectrum() {
        let h = build_hamiltonian(&cfg(2.0, 0.0, 0.0, 1), &OracleLimits::default()).unwrap();
        assert_eq!(h.dim(), 8);
        let ev = h.eigenvalues().unwrap();
        for (i, e) in ev.iter().enumerate() {
            let expected = if i < 4 { -1.0 } else { 1.0 };
            assert!((e - expected).abs() < 1e-12);
        }
    }

    #[test]
    fn single_spin_coupling_spectrum() {
        // H = σx ⊗ σx ⊗ 1 / 4 squares to 1/16 and is traceless: ±1/4, four each
        let h = build_hamiltonian(&cfg(0.0, 1.0, 0.0, 1), &OracleLimits::default()).unwrap();
        let sq = h.matrix() * h.matrix();
        let target = DMatrix::<C64>::identity(8, 8) * c(1.0 / 16.0, 0.0);
        assert!((sq - target).iter().all(|z| z.norm() < 1e-15));
        assert!(h.matrix().trace().norm() < 1e-15);
        let ev = h.eigenvalues().unwrap();
        for (i, e) in ev.iter().enumerate() {
            let expected = if i < 4 { -0.25 } else { 0.25 };
            assert!((e - expected).abs() < 1e-12, "{ev:?}");
        }
    }

    #[test]
    fn hamiltonian_is_hermitian() {
        for n in 1..=3 {
            let h = build_hamiltonian(&cfg(1.3, 0.8, 1.7, n), &OracleLimits::default()).unwrap();
            assert_eq!(h.dim(), 1 << (2 * n + 1));
            assert!(h.hermiticity_defect() <= 1e-12);
        }
    }

    #[test]
    fn cap_is_enforced() {
        let err = build_hamiltonian(&cfg(1.0, 1.0, 1.0, 5), &OracleLimits::default()).unwrap_err();
        assert_eq!(err, OracleError::BathTooLarge { bath_size: 5, cap: 4 });
        let limits = OracleLimits::with_override(9);
        assert_eq!(limits.max_bath_size, HARD_MAX_BATH_SIZE);
        assert!(build_hamiltonian(&cfg(1.0, 1.0, 1.0, 7), &limits).is_err());
    }

    #[test]
    fn zero_time_returns_initial_state() {
        let a = InitialStateAngles::new(1.1, 0.4).unwrap();
        let oracle = ExactOracle::new(&cfg(2.0, 1.0, 0.5, 2), &OracleLimits::default()).unwrap();
        let rho = oracle.evolve_reduced(&a, 0.0).unwrap();
        let expected = initial_density(&a);
        assert!((rho.matrix() - expected.matrix()).iter().all(|z| z.norm() < 1e-12));
    }

    #[test]
    fn free_evolution_is_precession() {
        let a = InitialStateAngles::new(0.7, 2.0).unwrap();
        let v0 = initial_bloch(&a);
        for n in [1, 2] {
            let oracle = ExactOracle::new(&cfg(2.0, 0.0, 0.0, n), &OracleLimits::default()).unwrap();
            for t in [0.4, 3.0] {
                let v = oracle.evolve_reduced(&a, t).unwrap().bloch();
                let (s, co) = (2.0 * t).sin_cos();
                let closed = crate::model::BlochVector::new(co * v0.x - s * v0.y, s * v0.x + co * v0.y, v0.z);
                assert!(v.max_abs_diff(&closed) < 1e-12);
            }
        }
    }

    #[test]
    fn matches_sector_sum_at_reference_point() {
        let config = cfg(2.0, 1.0, 1.0, 2);
        let a = InitialStateAngles::new(FRAC_PI_2, 0.0).unwrap();
        let exact = evolve_reduced(&config, &a, 1.3, &OracleLimits::default()).unwrap().bloch();
        assert!(exact.max_abs_diff(&bloch_at(&config, &a, 1.3)) < 1e-10);
    }

    #[test]
    fn trajectory_preserves_trace_and_purity_at_start() {
        let config = cfg(1.0, 0.6, 1.4, 2);
        let a = InitialStateAngles::new(2.2, 5.0).unwrap();
        let oracle = ExactOracle::new(&config, &OracleLimits::default()).unwrap();
        let grid = TimeGrid::new(0.0, 4.0, 9).unwrap();
        let traj = oracle.trajectory(&a, &grid).unwrap();
        assert!((traj.points[0].norm() - 1.0).abs() < 1e-10);
        for t in grid.times() {
            let rho = oracle.evolve_reduced(&a, t).unwrap();
            assert!((rho.trace() - C64::new(1.0, 0.0)).norm() < 1e-10);
        }
        let ends = oracle_trajectory(&config, &a, &TimeGrid::new(0.0, 4.0, 2).unwrap(), &OracleLimits::default()).unwrap();
        assert!(ends.points[1].max_abs_diff(traj.points.last().unwrap()) < 1e-13);
    }

    #[test]
    fn spectrum_invariant_under_coupling_exchange() {
        let limits = OracleLimits::default();
        let a = build_hamiltonian(&cfg(0.9, 0.3, 1.2, 2), &limits).unwrap().eigenvalues().unwrap();
        let b = build_hamiltonian(&cfg(0.9, 1.2, 0.3, 2), &limits).unwrap().eigenvalues().unwrap();
        for (x, y) in a.iter().zip(&b) {
            assert!((x - y).abs() < 1e-10);
        }
    }
}
