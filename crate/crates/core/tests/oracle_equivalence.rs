//! Sector-sum dynamics against brute-force evolution of the full space.

use std::f64::consts::{PI, TAU};

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use frustra_gp::dynamics::{bloch_at, bloch_trajectory, literal_trajectory, DynamicalMap, Dynamics, TimeGrid};
use frustra_gp::model::{InitialStateAngles, SystemConfig};
use frustra_gp::oracle::{build_hamiltonian, evolve_reduced, oracle_trajectory, ExactOracle, OracleError, OracleLimits};

fn random_case(rng: &mut ChaCha8Rng, n: u32) -> (SystemConfig, InitialStateAngles) {
    let config = SystemConfig::new(rng.gen_range(0.0..2.0), rng.gen_range(0.0..2.0), rng.gen_range(0.0..2.0), n).unwrap();
    let angles = InitialStateAngles::new(rng.gen_range(0.0..=PI), rng.gen_range(0.0..TAU)).unwrap();
    (config, angles)
}

#[test]
fn trajectories_agree_up_to_four_spins_per_bath() {
    let mut rng = ChaCha8Rng::seed_from_u64(11);
    let grid = TimeGrid::new(0.0, 6.0, 25).unwrap();
    for n in 1..=4 {
        for _ in 0..3 {
            let (config, angles) = random_case(&mut rng, n);
            let exact = oracle_trajectory(&config, &angles, &grid, &OracleLimits::default()).unwrap();
            let analytic = bloch_trajectory(&config, &angles, &grid).unwrap();
            for (a, b) in analytic.points.iter().zip(&exact.points) {
                assert!(a.max_abs_diff(b) <= 1e-10, "N={n}: {a} vs {b}");
            }
        }
    }
}

#[test]
fn cached_map_matches_pointwise_evaluation() {
    let mut rng = ChaCha8Rng::seed_from_u64(12);
    let (config, angles) = random_case(&mut rng, 3);
    let grid = TimeGrid::new(0.0, 4.0, 41).unwrap();
    let map = DynamicalMap::new(&config, &grid, Dynamics::Physical);
    let traj = map.trajectory(&angles).unwrap();
    for (t, p) in grid.times().zip(&traj.points) {
        assert!(p.max_abs_diff(&bloch_at(&config, &angles, t)) <= 1e-13);
    }
}

#[test]
fn literal_formulas_are_half_the_exact_dynamics() {
    let mut rng = ChaCha8Rng::seed_from_u64(13);
    let grid = TimeGrid::new(0.0, 5.0, 21).unwrap();
    for n in 1..=3 {
        let (config, angles) = random_case(&mut rng, n);
        let oracle = ExactOracle::new(&config, &OracleLimits::default()).unwrap();
        let literal = literal_trajectory(&config, &angles, &grid).unwrap();
        for (t, p) in grid.times().zip(&literal.points) {
            let exact = oracle.evolve_reduced(&angles, t).unwrap().bloch();
            assert!(p.max_abs_diff(&exact.scale(0.5)) <= 1e-10, "N={n} t={t}");
        }
    }
}

#[test]
fn hamiltonian_is_hermitian_with_known_decoupled_spectrum() {
    let config = SystemConfig::new(2.0, 0.0, 0.0, 2).unwrap();
    let h = build_hamiltonian(&config, &OracleLimits::default()).unwrap();
    assert_eq!(h.dim(), 32);
    assert_eq!(h.hermiticity_defect(), 0.0);
    let eig = h.eigenvalues().unwrap();
    assert_eq!(eig.iter().filter(|e| (**e + 1.0).abs() < 1e-12).count(), 16);
    assert_eq!(eig.iter().filter(|e| (**e - 1.0).abs() < 1e-12).count(), 16);
}

#[test]
fn oracle_refuses_large_baths() {
    let config = SystemConfig::new(1.0, 0.5, 0.5, 5).unwrap();
    let angles = InitialStateAngles::new(1.0, 0.0).unwrap();
    assert!(matches!(
        evolve_reduced(&config, &angles, 1.0, &OracleLimits::default()),
        Err(OracleError::BathTooLarge { bath_size: 5, cap: 4 })
    ));
    assert_eq!(OracleLimits::with_override(99).max_bath_size, 6);
}

#[test]
fn reduced_state_is_a_valid_density_matrix() {
    let mut rng = ChaCha8Rng::seed_from_u64(14);
    let (config, angles) = random_case(&mut rng, 2);
    let oracle = ExactOracle::new(&config, &OracleLimits::default()).unwrap();
    for t in [0.0, 0.7, 3.3, 9.9] {
        let rho = oracle.evolve_reduced(&angles, t).unwrap();
        assert!((rho.trace() - 1.0).norm() <= 1e-12);
        assert!(rho.purity() <= 1.0 + 1e-12);
        let (lo, hi) = rho.eigenvalues();
        assert!(lo >= -1e-12 && hi <= 1.0 + 1e-12);
    }
}
