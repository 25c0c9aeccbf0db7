//! Open-system dynamics and mixed-state geometric phase of a qubit coupled to
//! two independent, unpolarized spin baths through non-commuting operators.
//!
//! The qubit Hamiltonian is `H = ω σz/2 + (α1/2) σx ⊗ Σ_k I_x^k + (α2/2) σy ⊗ Σ_l J_y^l`.
//! [`dynamics`] evaluates the reduced Bloch trajectory by an exact sum over
//! collective bath sectors, [`oracle`] recomputes it by brute-force evolution
//! of the full Hilbert space, and [`phase`] turns trajectories into geometric
//! phases. [`experiments`] sweeps phases over initial states and compares
//! coupling strategies, and [`cli`] is the command-line front end.

pub mod cli;
pub mod dynamics;
pub mod experiments;
pub mod model;
pub mod oracle;
pub mod phase;

pub use dynamics::{bloch_at, bloch_trajectory, BlochTrajectory, Dynamics, DynamicalMap, TimeGrid};
pub use experiments::{
    frustration_scan, gp_surface, strategy_compare, verify_suite, AngleGrid, GpSurface, Metric, StrategyReport,
};
pub use model::{
    initial_bloch, initial_density, sector_weights, validate_config, BlochVector, InitialStateAngles,
    QubitDensity, SectorWeight, SystemConfig,
};
pub use oracle::{evolve_reduced, ExactOracle, OracleLimits};
pub use phase::{gp_closed_form, gp_discrete_holonomy, gp_south_pole, polar_track, GpMethod, GpResult, PolarTrack};
