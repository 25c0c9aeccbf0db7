//! Phase evaluators against each other and against the decoupled cone phase.

use std::f64::consts::{PI, TAU};

use frustra_gp::dynamics::{bloch_trajectory, literal_trajectory, TimeGrid};
use frustra_gp::experiments::{cross_method_gap, smooth_cases};
use frustra_gp::model::{InitialStateAngles, SystemConfig};
use frustra_gp::phase::{
    gp_closed_form, gp_discrete_holonomy, gp_south_pole, gp_unitary_reference, phase_distance, polar_track,
    PhaseError,
};

fn cone_phase(theta0: f64) -> f64 {
    -0.5 * TAU * (1.0 - theta0.cos())
}

#[test]
fn every_method_recovers_the_cone_phase() {
    let config = SystemConfig::new(2.0, 0.0, 0.0, 3).unwrap();
    let grid = TimeGrid::new(0.0, PI, 8001).unwrap();
    for theta0 in [0.3, 0.9, 1.5, 2.1, 2.7] {
        let angles = InitialStateAngles::from_bloch_polar(theta0, 0.4).unwrap();
        let traj = bloch_trajectory(&config, &angles, &grid).unwrap();
        let closed = gp_closed_form(&polar_track(&traj).unwrap(), &angles).unwrap();
        let holonomy = gp_discrete_holonomy(&traj).unwrap();
        assert!(phase_distance(closed.gamma, cone_phase(theta0)) <= 1e-10);
        assert!(phase_distance(holonomy.gamma, cone_phase(theta0)) <= 1e-6);
        assert!(phase_distance(gp_unitary_reference(theta0), cone_phase(theta0)) <= 1e-15);
    }
}

#[test]
fn equator_reports_minus_pi() {
    // cos(π/2) rounds to 6e-17, so the value sits a hair inside the range
    let g = gp_unitary_reference(PI / 2.0);
    assert!((-PI..-PI + 1e-15).contains(&g));
}

#[test]
fn closed_form_and_holonomy_converge_together() {
    for (config, angles) in smooth_cases(21, 4) {
        let coarse = cross_method_gap(&config, &angles, 5.0, 2001).unwrap();
        let fine = cross_method_gap(&config, &angles, 5.0, 4001).unwrap();
        assert!(fine < coarse, "{config:?}");
        assert!(fine <= 1e-5);
    }
}

#[test]
fn south_pole_formula_needs_a_south_pole_start() {
    let config = SystemConfig::new(1.0, 0.6, 0.3, 2).unwrap();
    let grid = TimeGrid::new(0.0, 4.0, 2001).unwrap();
    let off = InitialStateAngles::new(1.0, 0.0).unwrap();
    let track = polar_track(&bloch_trajectory(&config, &off, &grid).unwrap()).unwrap();
    assert!(matches!(gp_south_pole(&track), Err(PhaseError::NotSouthPole { .. })));

    let south = InitialStateAngles::from_bloch_polar(PI, 0.0).unwrap();
    let track = polar_track(&bloch_trajectory(&config, &south, &grid).unwrap()).unwrap();
    let a = gp_south_pole(&track).unwrap();
    let b = gp_closed_form(&track, &south).unwrap();
    assert!(phase_distance(a.gamma, b.gamma) <= 1e-6);
}

#[test]
fn coarse_grids_are_rejected() {
    let config = SystemConfig::new(2.0, 1.0, 1.0, 4).unwrap();
    let angles = InitialStateAngles::new(1.0, 0.0).unwrap();
    let traj = bloch_trajectory(&config, &angles, &TimeGrid::new(0.0, 50.0, 101).unwrap()).unwrap();
    assert!(matches!(polar_track(&traj), Err(PhaseError::UnderResolved { .. })));
}

#[test]
fn literal_mode_phase_matches_physical_phase() {
    let config = SystemConfig::new(1.5, 0.4, 0.7, 3).unwrap();
    let angles = InitialStateAngles::new(2.0, 1.0).unwrap();
    let grid = TimeGrid::new(0.0, 6.0, 3001).unwrap();
    let physical = gp_closed_form(&polar_track(&bloch_trajectory(&config, &angles, &grid).unwrap()).unwrap(), &angles);
    let literal = gp_closed_form(&polar_track(&literal_trajectory(&config, &angles, &grid).unwrap()).unwrap(), &angles);
    assert!(phase_distance(physical.unwrap().gamma, literal.unwrap().gamma) <= 1e-12);
}

#[test]
fn holonomy_rejects_mixed_initial_states() {
    let config = SystemConfig::new(1.5, 0.4, 0.7, 3).unwrap();
    let angles = InitialStateAngles::new(2.0, 1.0).unwrap();
    let traj = literal_trajectory(&config, &angles, &TimeGrid::new(0.0, 1.0, 101).unwrap()).unwrap();
    assert!(matches!(gp_discrete_holonomy(&traj), Err(PhaseError::MixedInitialState { .. })));
}
