//! Geometric-phase surfaces over initial states, coupling-strategy comparison
//! and the cross-check suite tying the analytic, literal and exact paths together.

use std::cmp::Ordering;
use std::f64::consts::{PI, TAU};
use std::fmt;
use std::str::FromStr;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::Serialize;
use thiserror::Error;

use crate::dynamics::{
    bloch_at, bloch_trajectory, literal_polarizations, DynamicalMap, Dynamics, DynamicsError, TimeGrid,
};
use crate::model::{InitialStateAngles, ModelError, SystemConfig};
use crate::oracle::{ExactOracle, OracleLimits};
use crate::phase::{
    gp_closed_form, gp_discrete_holonomy, gp_south_pole, gp_unitary_reference, phase_distance, polar_track,
    polar_track_with, PhaseError, TrackOptions,
};

#[derive(Debug, Clone, PartialEq, Error)]
pub enum ExperimentError {
    #[error("invalid angle grid: {0}")]
    InvalidGrid(String),
    #[error("cell (theta={theta}, phi={phi}): {source}")]
    Cell { theta: f64, phi: f64, source: PhaseError },
    #[error("strategy comparison needs at least two configurations")]
    TooFewStrategies,
    #[error("strategy '{label}' has omega={omega}, N={bath_size}; all strategies must share omega and N")]
    MismatchedStrategy { label: String, omega: f64, bath_size: u32 },
    #[error(transparent)]
    Dynamics(#[from] DynamicsError),
    #[error(transparent)]
    Model(#[from] ModelError),
}

/// Uniform grid of initial states: `theta` spans `[theta_min, theta_max]`
/// inclusive, `phi` spans `[0, 2π)` with `n_phi` points.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct AngleGrid {
    pub n_theta: usize,
    pub theta_min: f64,
    pub theta_max: f64,
    pub n_phi: usize,
}

/// Distance kept from the Bloch poles by default, where the azimuth is ill-conditioned.
pub const POLE_MARGIN: f64 = 0.05;

impl Default for AngleGrid {
    fn default() -> Self {
        AngleGrid { n_theta: 61, theta_min: POLE_MARGIN, theta_max: PI - POLE_MARGIN, n_phi: 61 }
    }
}

impl AngleGrid {
    /// Rejects grids that touch a pole; see [`Self::including_poles`].
    pub fn new(n_theta: usize, theta_min: f64, theta_max: f64, n_phi: usize) -> Result<Self, ExperimentError> {
        if theta_min <= 0.0 || theta_max >= PI {
            return Err(ExperimentError::InvalidGrid(format!(
                "theta range [{theta_min}, {theta_max}] touches a pole"
            )));
        }
        Self::including_poles(n_theta, theta_min, theta_max, n_phi)
    }

    pub fn including_poles(n_theta: usize, theta_min: f64, theta_max: f64, n_phi: usize) -> Result<Self, ExperimentError> {
        if n_theta < 2 || n_phi < 2 {
            return Err(ExperimentError::InvalidGrid(format!("need at least 2x2 points, got {n_theta}x{n_phi}")));
        }
        if !(0.0..=PI).contains(&theta_min) || !(0.0..=PI).contains(&theta_max) || theta_min >= theta_max {
            return Err(ExperimentError::InvalidGrid(format!("bad theta range [{theta_min}, {theta_max}]")));
        }
        Ok(AngleGrid { n_theta, theta_min, theta_max, n_phi })
    }

    pub fn theta(&self, i: usize) -> f64 {
        if i + 1 == self.n_theta {
            self.theta_max
        } else {
            self.theta_min + i as f64 * (self.theta_max - self.theta_min) / (self.n_theta - 1) as f64
        }
    }

    pub fn phi(&self, j: usize) -> f64 {
        TAU * j as f64 / self.n_phi as f64
    }

    pub fn len(&self) -> usize {
        self.n_theta * self.n_phi
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SurfaceOptions {
    /// Time nodes per period of the fastest sector frequency.
    pub sampling_factor: f64,
    pub track: TrackOptions,
}

impl Default for SurfaceOptions {
    fn default() -> Self {
        SurfaceOptions { sampling_factor: 100.0, track: TrackOptions::default() }
    }
}

/// One initial state of a surface. `gamma` is `None` when the phase is
/// indeterminate (orthogonal endpoint states).
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct SurfaceCell {
    pub theta: f64,
    pub phi: f64,
    pub gamma: Option<f64>,
    pub gamma_unwrapped: Option<f64>,
    pub singular_count: usize,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct GpSurface {
    pub grid: AngleGrid,
    pub config: SystemConfig,
    pub t: f64,
    pub mode: Dynamics,
    pub time_steps: usize,
    /// Row-major, `theta` outer and `phi` inner.
    pub cells: Vec<SurfaceCell>,
}

impl GpSurface {
    pub fn cell(&self, i_theta: usize, j_phi: usize) -> &SurfaceCell {
        &self.cells[i_theta * self.grid.n_phi + j_phi]
    }

    pub fn missing(&self) -> usize {
        self.cells.iter().filter(|c| c.gamma.is_none()).count()
    }
}

pub fn gp_surface(config: &SystemConfig, grid: &AngleGrid, t: f64, mode: Dynamics) -> Result<GpSurface, ExperimentError> {
    gp_surface_with(config, grid, t, mode, &SurfaceOptions::default())
}

pub fn gp_surface_with(
    config: &SystemConfig,
    grid: &AngleGrid,
    t: f64,
    mode: Dynamics,
    opts: &SurfaceOptions,
) -> Result<GpSurface, ExperimentError> {
    let time_grid = TimeGrid::resolving(t, config.gamma_max(), opts.sampling_factor)?;
    let map = DynamicalMap::new(config, &time_grid, mode);
    let cells = (0..grid.len())
        .into_par_iter()
        .map(|k| {
            let (theta, phi) = (grid.theta(k / grid.n_phi), grid.phi(k % grid.n_phi));
            surface_cell(&map, theta, phi, &opts.track)
        })
        .collect::<Result<Vec<_>, _>>()?;
    Ok(GpSurface { grid: *grid, config: *config, t, mode, time_steps: time_grid.n_steps(), cells })
}

fn surface_cell(map: &DynamicalMap, theta: f64, phi: f64, opts: &TrackOptions) -> Result<SurfaceCell, ExperimentError> {
    let angles = InitialStateAngles::new(theta, phi)?;
    let traj = map.trajectory(&angles)?;
    let cell_err = |source| ExperimentError::Cell { theta, phi, source };
    let track = polar_track_with(&traj, opts).map_err(cell_err)?;
    let singular_count = track.singular_count();
    match gp_closed_form(&track, &angles) {
        Ok(gp) => Ok(SurfaceCell {
            theta,
            phi,
            gamma: Some(gp.gamma),
            gamma_unwrapped: Some(gp.gamma_unwrapped),
            singular_count,
        }),
        Err(PhaseError::IndeterminatePhase { .. }) => {
            Ok(SurfaceCell { theta, phi, gamma: None, gamma_unwrapped: None, singular_count })
        }
        Err(e) => Err(cell_err(e)),
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum Metric {
    MeanAbsGp,
    MeanDistToUnitary,
}

impl fmt::Display for Metric {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Metric::MeanAbsGp => "mean-abs-gp",
            Metric::MeanDistToUnitary => "mean-dist-to-unitary",
        })
    }
}

impl FromStr for Metric {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s.replace('_', "-").as_str() {
            "mean-abs-gp" => Ok(Metric::MeanAbsGp),
            "mean-dist-to-unitary" => Ok(Metric::MeanDistToUnitary),
            _ => Err(format!("unknown metric '{s}' (expected mean-abs-gp or mean-dist-to-unitary)")),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct LabeledConfig {
    pub label: String,
    pub config: SystemConfig,
}

impl LabeledConfig {
    pub fn new(label: impl Into<String>, config: SystemConfig) -> Self {
        LabeledConfig { label: label.into(), config }
    }
}

/// The four coupling pairs `(1,0)`, `(0,1)`, `(1/4,1/4)`, `(1/2,1/2)`.
pub fn figure_strategies(omega: f64, bath_size: u32) -> Result<Vec<LabeledConfig>, ExperimentError> {
    [("(1,0)", 1.0, 0.0), ("(0,1)", 0.0, 1.0), ("(1/4,1/4)", 0.25, 0.25), ("(1/2,1/2)", 0.5, 0.5)]
        .into_iter()
        .map(|(label, a1, a2)| Ok(LabeledConfig::new(label, SystemConfig::new(omega, a1, a2, bath_size)?)))
        .collect()
}

/// Statistics over the cells where both the surface and the decoupled
/// reference are defined.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct SurfaceSummary {
    pub mean_abs_gp: f64,
    /// Mean circular distance to the phase the same initial state acquires
    /// with both couplings switched off over the same time.
    pub mean_dist_to_unitary: f64,
    pub min: f64,
    pub max: f64,
    pub cells: usize,
    pub missing: usize,
}

impl SurfaceSummary {
    pub fn metric(&self, metric: Metric) -> f64 {
        match metric {
            Metric::MeanAbsGp => self.mean_abs_gp,
            Metric::MeanDistToUnitary => self.mean_dist_to_unitary,
        }
    }
}

pub fn summarize(surface: &GpSurface, reference: &GpSurface) -> SurfaceSummary {
    let (mut abs_sum, mut dist_sum, mut used) = (0.0, 0.0, 0usize);
    let (mut min, mut max) = (f64::INFINITY, f64::NEG_INFINITY);
    for (cell, ref_cell) in surface.cells.iter().zip(&reference.cells) {
        let (Some(g), Some(r)) = (cell.gamma, ref_cell.gamma) else { continue };
        abs_sum += g.abs();
        dist_sum += phase_distance(g, r);
        min = min.min(g);
        max = max.max(g);
        used += 1;
    }
    let mean = |s: f64| if used == 0 { f64::NAN } else { s / used as f64 };
    SurfaceSummary {
        mean_abs_gp: mean(abs_sum),
        mean_dist_to_unitary: mean(dist_sum),
        min,
        max,
        cells: used,
        missing: surface.cells.len() - used,
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct StrategyEntry {
    pub label: String,
    pub alpha1: f64,
    pub alpha2: f64,
    pub summary: SurfaceSummary,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct StrategyReport {
    pub omega: f64,
    pub bath_size: u32,
    pub t: f64,
    pub metric: Metric,
    /// In input order.
    pub entries: Vec<StrategyEntry>,
    /// Labels ordered best first under `metric`.
    pub ranking: Vec<String>,
    /// Best label on the distance-to-unitary metric.
    pub winner: String,
}

impl StrategyReport {
    pub fn entry(&self, label: &str) -> Option<&StrategyEntry> {
        self.entries.iter().find(|e| e.label == label)
    }
}

pub fn strategy_compare(
    configs: &[LabeledConfig],
    grid: &AngleGrid,
    t: f64,
    metric: Metric,
) -> Result<StrategyReport, ExperimentError> {
    strategy_compare_with(configs, grid, t, metric, &SurfaceOptions::default())
}

pub fn strategy_compare_with(
    configs: &[LabeledConfig],
    grid: &AngleGrid,
    t: f64,
    metric: Metric,
    opts: &SurfaceOptions,
) -> Result<StrategyReport, ExperimentError> {
    let [first, ..] = configs else { return Err(ExperimentError::TooFewStrategies) };
    if configs.len() < 2 {
        return Err(ExperimentError::TooFewStrategies);
    }
    if let Some(bad) = configs
        .iter()
        .find(|c| c.config.omega != first.config.omega || c.config.bath_size != first.config.bath_size)
    {
        return Err(ExperimentError::MismatchedStrategy {
            label: bad.label.clone(),
            omega: bad.config.omega,
            bath_size: bad.config.bath_size,
        });
    }

    let reference = gp_surface_with(&first.config.decoupled(), grid, t, Dynamics::Physical, opts)?;
    let entries = configs
        .iter()
        .map(|c| {
            let surface = gp_surface_with(&c.config, grid, t, Dynamics::Physical, opts)?;
            Ok(StrategyEntry {
                label: c.label.clone(),
                alpha1: c.config.alpha1,
                alpha2: c.config.alpha2,
                summary: summarize(&surface, &reference),
            })
        })
        .collect::<Result<Vec<_>, ExperimentError>>()?;

    let ranking = rank(&entries, metric);
    let winner = rank(&entries, Metric::MeanDistToUnitary)[0].clone();
    Ok(StrategyReport {
        omega: first.config.omega,
        bath_size: first.config.bath_size,
        t,
        metric,
        entries,
        ranking,
        winner,
    })
}

// Best first; NaN last; ties broken by label, then input position.
fn rank(entries: &[StrategyEntry], metric: Metric) -> Vec<String> {
    let mut order: Vec<usize> = (0..entries.len()).collect();
    let key = |i: usize| {
        let v = entries[i].summary.metric(metric);
        match metric {
            Metric::MeanDistToUnitary => v,
            Metric::MeanAbsGp => -v,
        }
    };
    order.sort_by(|&i, &j| {
        let (a, b) = (key(i), key(j));
        let by_value = match (a.is_nan(), b.is_nan()) {
            (true, true) => Ordering::Equal,
            (true, false) => Ordering::Greater,
            (false, true) => Ordering::Less,
            _ => a.total_cmp(&b),
        };
        by_value.then_with(|| entries[i].label.cmp(&entries[j].label)).then(i.cmp(&j))
    });
    order.into_iter().map(|i| entries[i].label.clone()).collect()
}

/// Outcome of the four-strategy comparison at one bath size.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct FrustrationRecord {
    pub bath_size: u32,
    pub report: StrategyReport,
    pub dual_distance: f64,
    pub single_distance: f64,
    /// Whether `(1/4,1/4)` stays closer to the decoupled phase than `(1,0)`.
    pub dual_beats_single: bool,
}

pub fn frustration_scan(
    omega: f64,
    t: f64,
    bath_sizes: &[u32],
    grid: &AngleGrid,
    opts: &SurfaceOptions,
) -> Result<Vec<FrustrationRecord>, ExperimentError> {
    bath_sizes
        .iter()
        .map(|&n| {
            let report = strategy_compare_with(&figure_strategies(omega, n)?, grid, t, Metric::MeanDistToUnitary, opts)?;
            let distance = |label: &str| {
                report.entry(label).map_or(f64::NAN, |e| e.summary.mean_dist_to_unitary)
            };
            let (dual_distance, single_distance) = (distance("(1/4,1/4)"), distance("(1,0)"));
            Ok(FrustrationRecord {
                bath_size: n,
                dual_beats_single: dual_distance < single_distance,
                dual_distance,
                single_distance,
                report,
            })
        })
        .collect()
}

/// One cross-check of [`verify_suite`].
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct CheckResult {
    pub name: String,
    pub passed: bool,
    pub measured: f64,
    pub tolerance: f64,
    pub detail: String,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct VerifyReport {
    pub checks: Vec<CheckResult>,
    pub all_passed: bool,
}

impl VerifyReport {
    pub fn check(&self, name: &str) -> Option<&CheckResult> {
        self.checks.iter().find(|c| c.name == name)
    }
}

const VERIFY_SEED: u64 = 0x6770_6672;

fn check(name: &str, measured: f64, tolerance: f64, detail: String) -> CheckResult {
    CheckResult { name: name.into(), passed: measured <= tolerance, measured, tolerance, detail }
}

fn failed(name: &str, tolerance: f64, detail: String) -> CheckResult {
    CheckResult { name: name.into(), passed: false, measured: f64::NAN, tolerance, detail }
}

/// Runs every cross-check; failures become report entries, never errors.
pub fn verify_suite(limits: &OracleLimits) -> VerifyReport {
    let checks = vec![
        verify_oracle_equivalence(limits),
        verify_unitary_limit(),
        verify_closed_form_vs_holonomy(),
        verify_south_pole(),
        verify_literal_norm(),
    ];
    let all_passed = checks.iter().all(|c| c.passed);
    VerifyReport { checks, all_passed }
}

fn random_angles(rng: &mut ChaCha8Rng, margin: f64) -> InitialStateAngles {
    InitialStateAngles::new(rng.gen_range(margin..PI - margin), rng.gen_range(0.0..TAU))
        .expect("sampled angles are in range")
}

fn verify_oracle_equivalence(limits: &OracleLimits) -> CheckResult {
    const NAME: &str = "oracle_vs_analytic";
    let mut rng = ChaCha8Rng::seed_from_u64(VERIFY_SEED);
    let mut worst = 0.0f64;
    let mut cases = 0;
    for n in (1..=3).filter(|n| *n <= limits.max_bath_size) {
        for _ in 0..20 {
            let config = SystemConfig::new(rng.gen_range(0.0..2.0), rng.gen_range(0.0..2.0), rng.gen_range(0.0..2.0), n)
                .expect("sampled config is valid");
            let angles = random_angles(&mut rng, 0.0);
            let t = rng.gen_range(0.0..10.0);
            let exact = match ExactOracle::new(&config, limits).and_then(|o| o.evolve_reduced(&angles, t)) {
                Ok(rho) => rho.bloch(),
                Err(e) => return failed(NAME, 1e-10, format!("oracle failed for N={n}: {e}")),
            };
            worst = worst.max(exact.max_abs_diff(&bloch_at(&config, &angles, t)));
            cases += 1;
        }
    }
    check(NAME, worst, 1e-10, format!("{cases} random cases, max Bloch component difference"))
}

fn verify_unitary_limit() -> CheckResult {
    const NAME: &str = "unitary_limit_gp";
    let config = SystemConfig::new(2.0, 0.0, 0.0, 1).expect("valid");
    let grid = TimeGrid::new(0.0, TAU / config.omega, 4001).expect("valid");
    let mut worst = 0.0f64;
    for theta0 in [0.3, 0.9, 1.5, 2.1, 2.7] {
        let angles = InitialStateAngles::from_bloch_polar(theta0, 0.0).expect("valid");
        let result = bloch_trajectory(&config, &angles, &grid)
            .map_err(|e| e.to_string())
            .and_then(|traj| polar_track(&traj).map_err(|e| e.to_string()))
            .and_then(|track| gp_closed_form(&track, &angles).map_err(|e| e.to_string()));
        match result {
            Ok(gp) => worst = worst.max(phase_distance(gp.gamma, gp_unitary_reference(theta0))),
            Err(e) => return failed(NAME, 1e-4, format!("theta0={theta0}: {e}")),
        }
    }
    check(NAME, worst, 1e-4, "max |gamma + pi(1 - cos theta0)| mod 2pi over 5 polar angles".into())
}

/// Randomized configurations without pole starts, shared by the
/// closed-form/holonomy cross-check.
pub fn smooth_cases(seed: u64, count: usize) -> Vec<(SystemConfig, InitialStateAngles)> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    (0..count)
        .map(|_| {
            let config = SystemConfig::new(
                rng.gen_range(0.5..2.0),
                rng.gen_range(0.0..1.0),
                rng.gen_range(0.0..1.0),
                rng.gen_range(1..=4),
            )
            .expect("sampled config is valid");
            (config, random_angles(&mut rng, 0.3))
        })
        .collect()
}

/// `|closed form − holonomy|` (circular) on `[0, tau]` with `n_steps` nodes.
pub fn cross_method_gap(
    config: &SystemConfig,
    angles: &InitialStateAngles,
    tau: f64,
    n_steps: usize,
) -> Result<f64, String> {
    let grid = TimeGrid::new(0.0, tau, n_steps).map_err(|e| e.to_string())?;
    let traj = bloch_trajectory(config, angles, &grid).map_err(|e| e.to_string())?;
    let track = polar_track(&traj).map_err(|e| e.to_string())?;
    let closed = gp_closed_form(&track, angles).map_err(|e| e.to_string())?;
    let holonomy = gp_discrete_holonomy(&traj).map_err(|e| e.to_string())?;
    Ok(phase_distance(closed.gamma, holonomy.gamma))
}

fn verify_closed_form_vs_holonomy() -> CheckResult {
    const NAME: &str = "closed_form_vs_holonomy";
    let mut worst = 0.0f64;
    for (config, angles) in smooth_cases(VERIFY_SEED + 1, 10) {
        match cross_method_gap(&config, &angles, 5.0, 10_001) {
            Ok(gap) => worst = worst.max(gap),
            Err(e) => return failed(NAME, 1e-3, e),
        }
    }
    check(NAME, worst, 1e-3, "10 random configs, tau = 5, 10^4 steps".into())
}

/// `|south pole − closed form|` (circular) for a start at the south pole.
pub fn south_pole_gap(config: &SystemConfig, tau: f64, n_steps: usize) -> Result<f64, String> {
    let angles = InitialStateAngles::from_bloch_polar(PI, 0.0).map_err(|e| e.to_string())?;
    let grid = TimeGrid::new(0.0, tau, n_steps).map_err(|e| e.to_string())?;
    let traj = bloch_trajectory(config, &angles, &grid).map_err(|e| e.to_string())?;
    let track = polar_track(&traj).map_err(|e| e.to_string())?;
    let south = gp_south_pole(&track).map_err(|e| e.to_string())?;
    let closed = gp_closed_form(&track, &angles).map_err(|e| e.to_string())?;
    Ok(phase_distance(south.gamma, closed.gamma))
}

fn verify_south_pole() -> CheckResult {
    const NAME: &str = "south_pole_consistency";
    let mut rng = ChaCha8Rng::seed_from_u64(VERIFY_SEED + 2);
    let mut worst = 0.0f64;
    for _ in 0..5 {
        let config = SystemConfig::new(rng.gen_range(0.5..2.0), rng.gen_range(0.0..1.0), rng.gen_range(0.0..1.0), rng.gen_range(1..=4))
            .expect("sampled config is valid");
        match south_pole_gap(&config, 5.0, 4001) {
            Ok(gap) => worst = worst.max(gap),
            Err(e) => return failed(NAME, 1e-6, e),
        }
    }
    check(NAME, worst, 1e-6, "5 random configs started at the south pole".into())
}

fn verify_literal_norm() -> CheckResult {
    const NAME: &str = "literal_norm_ratio";
    let mut rng = ChaCha8Rng::seed_from_u64(VERIFY_SEED + 3);
    let mut ratio = f64::NAN;
    let mut worst = 0.0f64;
    for _ in 0..10 {
        let config = SystemConfig::new(rng.gen_range(0.0..2.0), rng.gen_range(0.0..2.0), rng.gen_range(0.0..2.0), rng.gen_range(1..=6))
            .expect("sampled config is valid");
        let angles = random_angles(&mut rng, 0.0);
        let r = literal_polarizations(&config, &angles, 0.0).norm() / bloch_at(&config, &angles, 0.0).norm();
        worst = worst.max((r - 0.5).abs());
        ratio = r;
    }
    let mut result = check(
        NAME,
        worst,
        1e-12,
        format!("printed formulas at t = 0 give |v| = {ratio:.15} of the prepared pure state; prefactor 1/2^(2N+1) should be 1/2^(2N)"),
    );
    result.measured = ratio;
    result.passed = worst <= 1e-12;
    result
}

/// Unitary-limit reference for a surface cell: polar angle `π − theta` from `+z`.
pub fn unitary_reference_for_cell(theta: f64) -> f64 {
    gp_unitary_reference(PI - theta)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn angle_grid_excludes_poles_by_default() {
        let g = AngleGrid::default();
        assert_eq!((g.n_theta, g.n_phi), (61, 61));
        assert_eq!(g.theta(0), POLE_MARGIN);
        assert_eq!(g.theta(60), PI - POLE_MARGIN);
        assert!(g.phi(60) < TAU);
        assert!(AngleGrid::new(5, 0.0, 1.0, 5).is_err());
        assert!(AngleGrid::including_poles(5, 0.0, PI, 5).is_ok());
        assert!(AngleGrid::new(1, 0.1, 1.0, 5).is_err());
    }

    #[test]
    fn unitary_surface_is_phi_independent() {
        let config = SystemConfig::new(2.0, 0.0, 0.0, 3).unwrap();
        let grid = AngleGrid::new(7, 0.05, PI - 0.05, 9).unwrap();
        let surface = gp_surface(&config, &grid, PI, Dynamics::Physical).unwrap();
        for i in 0..grid.n_theta {
            let expected = unitary_reference_for_cell(grid.theta(i));
            for j in 0..grid.n_phi {
                let cell = surface.cell(i, j);
                assert!(phase_distance(cell.gamma.unwrap(), expected) < 1e-4);
                assert!(phase_distance(cell.gamma.unwrap(), surface.cell(i, 0).gamma.unwrap()) <= 1e-6);
            }
        }
    }

    #[test]
    fn literal_surface_matches_physical_surface() {
        let config = SystemConfig::new(2.0, 0.5, 0.25, 2).unwrap();
        let grid = AngleGrid::new(5, 0.2, 2.9, 6).unwrap();
        let phys = gp_surface(&config, &grid, 5.0, Dynamics::Physical).unwrap();
        let lit = gp_surface(&config, &grid, 5.0, Dynamics::Literal).unwrap();
        for (a, b) in phys.cells.iter().zip(&lit.cells) {
            assert!(phase_distance(a.gamma.unwrap(), b.gamma.unwrap()) < 1e-9);
        }
    }

    #[test]
    fn ranking_is_a_deterministic_permutation() {
        let config = SystemConfig::new(2.0, 0.5, 0.5, 2).unwrap();
        let configs = vec![LabeledConfig::new("b", config), LabeledConfig::new("a", config)];
        let grid = AngleGrid::new(4, 0.3, 2.8, 4).unwrap();
        let report = strategy_compare(&configs, &grid, 3.0, Metric::MeanAbsGp).unwrap();
        assert_eq!(report.entries[0].summary, report.entries[1].summary);
        assert_eq!(report.ranking, vec!["a", "b"]);
        assert_eq!(report.winner, "a");
    }

    #[test]
    fn comparison_rejects_mismatched_configs() {
        let grid = AngleGrid::new(3, 0.3, 2.8, 3).unwrap();
        let one = vec![LabeledConfig::new("x", SystemConfig::new(2.0, 1.0, 0.0, 2).unwrap())];
        assert_eq!(strategy_compare(&one, &grid, 1.0, Metric::MeanAbsGp), Err(ExperimentError::TooFewStrategies));
        let two = vec![
            LabeledConfig::new("x", SystemConfig::new(2.0, 1.0, 0.0, 2).unwrap()),
            LabeledConfig::new("y", SystemConfig::new(2.0, 1.0, 0.0, 3).unwrap()),
        ];
        assert!(matches!(
            strategy_compare(&two, &grid, 1.0, Metric::MeanAbsGp),
            Err(ExperimentError::MismatchedStrategy { .. })
        ));
    }

    #[test]
    fn verify_suite_passes() {
        let report = verify_suite(&OracleLimits::default());
        for c in &report.checks {
            assert!(c.passed, "{c:?}");
        }
        let literal = report.check("literal_norm_ratio").unwrap();
        assert!((literal.measured - 0.5).abs() < 1e-12);
    }
}
