//! Reduced qubit dynamics as a degeneracy-weighted sum over collective bath sectors.
//!
//! With both baths unpolarized and no bath self-Hamiltonian, the collective
//! operators `Σ_k I_x^k` and `Σ_l J_y^l` commute with the full Hamiltonian's
//! bath part and with each other, so the bath factorizes into joint sectors
//! `(m1, m2)`. The initial bath state is `1/2^{2N}`, which gives each sector the
//! product weight `w(m1) w(m2)` with `w(m) = ζ_m / 2^N`. Inside a sector the
//! qubit feels the static field `(α1 m1, α2 m2, ω)` and its Bloch vector
//! precesses rigidly about it at frequency `Γ = |field|`.

use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::model::{
    initial_bloch, sector_weights, BlochVector, InitialStateAngles, SystemConfig, STATE_TOL,
};

#[derive(Debug, Clone, PartialEq, Error)]
pub enum DynamicsError {
    #[error("invalid time grid: {0}")]
    InvalidGrid(String),
    #[error("trajectory has {points} points for a grid of {nodes} nodes")]
    LengthMismatch { points: usize, nodes: usize },
    #[error("Bloch vector at node {index} has norm {norm} > 1")]
    NonPhysical { index: usize, norm: f64 },
    #[error("initial Bloch vector has norm {0}, expected a pure state")]
    InitialNotPure(f64),
}

/// Uniform grid of `n_steps` nodes on `[t_start, t_end]`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct TimeGrid {
    t_start: f64,
    t_end: f64,
    n_steps: usize,
}

impl TimeGrid {
    pub fn new(t_start: f64, t_end: f64, n_steps: usize) -> Result<Self, DynamicsError> {
        if !t_start.is_finite() || !t_end.is_finite() {
            return Err(DynamicsError::InvalidGrid("non-finite endpoint".into()));
        }
        if t_start < 0.0 {
            return Err(DynamicsError::InvalidGrid(format!("t_start {t_start} negative")));
        }
        if t_end <= t_start {
            return Err(DynamicsError::InvalidGrid(format!(
                "t_end {t_end} must exceed t_start {t_start}"
            )));
        }
        if n_steps < 2 {
            return Err(DynamicsError::InvalidGrid(format!("n_steps {n_steps} < 2")));
        }
        Ok(TimeGrid { t_start, t_end, n_steps })
    }

    /// Grid from 0 to `t_end` fine enough to sample `gamma_max` with
    /// `sampling_factor` nodes per period.
    pub fn resolving(t_end: f64, gamma_max: f64, sampling_factor: f64) -> Result<Self, DynamicsError> {
        let intervals = (t_end * gamma_max * sampling_factor / std::f64::consts::TAU).ceil();
        let n_steps = if intervals.is_finite() { intervals.max(1.0) as usize + 1 } else { 2 };
        Self::new(0.0, t_end, n_steps)
    }

    pub fn t_start(&self) -> f64 {
        self.t_start
    }

    pub fn t_end(&self) -> f64 {
        self.t_end
    }

    pub fn n_steps(&self) -> usize {
        self.n_steps
    }

    pub fn dt(&self) -> f64 {
        (self.t_end - self.t_start) / (self.n_steps - 1) as f64
    }

    /// Node `i`; the last node is exactly `t_end`.
    pub fn time(&self, i: usize) -> f64 {
        if i + 1 == self.n_steps {
            self.t_end
        } else {
            self.t_start + i as f64 * self.dt()
        }
    }

    pub fn times(&self) -> impl Iterator<Item = f64> + '_ {
        (0..self.n_steps).map(move |i| self.time(i))
    }
}

/// Which evaluator produced a trajectory.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Dynamics {
    /// Normalized sector sum, validated against exact evolution.
    Physical,
    /// The printed polarization formulas evaluated as typeset.
    Literal,
}

impl fmt::Display for Dynamics {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Dynamics::Physical => "physical",
            Dynamics::Literal => "literal",
        })
    }
}

impl FromStr for Dynamics {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s {
            "physical" => Ok(Dynamics::Physical),
            "literal" => Ok(Dynamics::Literal),
            other => Err(format!("unknown mode '{other}' (expected physical or literal)")),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct BlochTrajectory {
    pub grid: TimeGrid,
    pub points: Vec<BlochVector>,
    pub config: SystemConfig,
    pub initial: InitialStateAngles,
    pub dynamics: Dynamics,
}

impl BlochTrajectory {
    /// Checks length and, for physical trajectories, contractivity and an
    /// initially pure state.
    pub fn new(
        grid: TimeGrid,
        points: Vec<BlochVector>,
        config: SystemConfig,
        initial: InitialStateAngles,
        dynamics: Dynamics,
    ) -> Result<Self, DynamicsError> {
        if points.len() != grid.n_steps() {
            return Err(DynamicsError::LengthMismatch { points: points.len(), nodes: grid.n_steps() });
        }
        if dynamics == Dynamics::Physical {
            if let Some((index, norm)) = points
                .iter()
                .map(BlochVector::norm)
                .enumerate()
                .find(|(_, n)| *n > 1.0 + STATE_TOL)
            {
                return Err(DynamicsError::NonPhysical { index, norm });
            }
            let n0 = points[0].norm();
            if grid.t_start() == 0.0 && (n0 - 1.0).abs() > 1e-10 {
                return Err(DynamicsError::InitialNotPure(n0));
            }
        }
        Ok(BlochTrajectory { grid, points, config, initial, dynamics })
    }

    pub fn len(&self) -> usize {
        self.points.len()
    }

    pub fn is_empty(&self) -> bool {
        self.points.is_empty()
    }

    pub fn times(&self) -> impl Iterator<Item = f64> + '_ {
        self.grid.times()
    }
}

/// `Γ = sqrt(ω² + α1² m1² + α2² m2²)`.
pub fn gamma_freq(config: &SystemConfig, m1: f64, m2: f64) -> f64 {
    let (b1, b2) = (config.alpha1 * m1, config.alpha2 * m2);
    (config.omega * config.omega + b1 * b1 + b2 * b2).sqrt()
}

/// Rodrigues rotation of `v0` about the sector field by angle `Γt`.
///
/// The sense of rotation gives `dv/dt = ω ẑ × v` when both couplings vanish.
pub fn sector_rotation(v0: &BlochVector, config: &SystemConfig, m1: f64, m2: f64, t: f64) -> BlochVector {
    let field = BlochVector::new(config.alpha1 * m1, config.alpha2 * m2, config.omega);
    rotate_about_field(v0, &field, t)
}

fn rotate_about_field(v0: &BlochVector, field: &BlochVector, t: f64) -> BlochVector {
    let gamma = field.norm();
    if gamma == 0.0 {
        return *v0;
    }
    let axis = field.scale(1.0 / gamma);
    let (s, c) = (gamma * t).sin_cos();
    v0.scale(c)
        .add(&axis.cross(v0).scale(s))
        .add(&axis.scale((1.0 - c) * axis.dot(v0)))
}

/// One distinct sector field with its accumulated weight.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Sector {
    pub m1: f64,
    pub m2: f64,
    pub field: BlochVector,
    pub weight: f64,
}

/// Sectors in ascending `(m1, m2)` order.
///
/// A bath with zero coupling contributes the same field for every `m`, so its
/// row collapses to a single entry of weight one.
pub fn sectors(config: &SystemConfig) -> Vec<Sector> {
    let row = |alpha: f64| -> Vec<(f64, f64)> {
        if alpha == 0.0 {
            vec![(0.0, 1.0)]
        } else {
            sector_weights(config.bath_size)
                .expect("validated config has a non-empty bath")
                .into_iter()
                .map(|s| (s.m(), s.weight))
                .collect()
        }
    };
    let (row1, row2) = (row(config.alpha1), row(config.alpha2));
    let mut out = Vec::with_capacity(row1.len() * row2.len());
    for &(m1, w1) in &row1 {
        for &(m2, w2) in &row2 {
            out.push(Sector {
                m1,
                m2,
                field: BlochVector::new(config.alpha1 * m1, config.alpha2 * m2, config.omega),
                weight: w1 * w2,
            });
        }
    }
    out
}

/// Reduced Bloch vector at time `t`: `Σ w(m1) w(m2) R_{m1 m2}(t) v(0)`.
pub fn bloch_at(config: &SystemConfig, angles: &InitialStateAngles, t: f64) -> BlochVector {
    let v0 = initial_bloch(angles);
    if t == 0.0 {
        return v0;
    }
    sectors(config)
        .iter()
        .fold(BlochVector::default(), |acc, s| acc.add(&rotate_about_field(&v0, &s.field, t).scale(s.weight)))
}

/// Pointwise [`bloch_at`] over every grid node.
pub fn bloch_trajectory(
    config: &SystemConfig,
    angles: &InitialStateAngles,
    grid: &TimeGrid,
) -> Result<BlochTrajectory, DynamicsError> {
    let points = grid.times().map(|t| bloch_at(config, angles, t)).collect();
    BlochTrajectory::new(*grid, points, *config, *angles, Dynamics::Physical)
}

/// The printed polarization formulas evaluated term by term, prefactor
/// `−1/2^{2N+1}` included and uncorrected.
///
/// Each product `ζ_{m1} ζ_{m2} / 2^{2N+1}` is formed as `w(m1) w(m2) / 2` so
/// that large baths stay inside the f64 range.
pub fn literal_polarizations(config: &SystemConfig, angles: &InitialStateAngles, t: f64) -> BlochVector {
    let (st, ct) = angles.theta().sin_cos();
    let (sp, cp) = angles.phi().sin_cos();
    let omega = config.omega;
    let row = sector_weights(config.bath_size).expect("validated config has a non-empty bath");

    let (mut sx, mut sy, mut sz) = (0.0, 0.0, 0.0);
    for s1 in &row {
        for s2 in &row {
            let a1 = s1.m() * config.alpha1;
            let a2 = s2.m() * config.alpha2;
            let gamma = gamma_freq(config, s1.m(), s2.m());
            let cos_gt = (gamma * t).cos();
            // sin(Γt)/Γ and (1 − cos Γt)/Γ², with their Γ → 0 limits
            let (sinc, versine) = if gamma == 0.0 {
                (t, 0.5 * t * t)
            } else {
                ((gamma * t).sin() / gamma, 2.0 * (0.5 * gamma * t).sin().powi(2) / (gamma * gamma))
            };
            let common = a1 * st * sp + a2 * st * cp + omega * ct;
            let weight = s1.weight * s2.weight;

            sz += weight
                * (cos_gt * ct + sinc * st * (a1 * cp - a2 * sp) + omega * common * versine);
            sx += weight
                * (cos_gt * st * sp - sinc * (omega * st * cp - a2 * ct) + a1 * common * versine);
            sy += weight
                * (cos_gt * st * cp - sinc * (-omega * st * sp + a1 * ct) + a2 * common * versine);
        }
    }
    let prefactor = -0.5;
    BlochVector::new(prefactor * sx, prefactor * sy, prefactor * sz)
}

pub fn literal_trajectory(
    config: &SystemConfig,
    angles: &InitialStateAngles,
    grid: &TimeGrid,
) -> Result<BlochTrajectory, DynamicsError> {
    let points = grid.times().map(|t| literal_polarizations(config, angles, t)).collect();
    BlochTrajectory::new(*grid, points, *config, *angles, Dynamics::Literal)
}

type Mat3 = [[f64; 3]; 3];

fn apply(m: &Mat3, v: &BlochVector) -> BlochVector {
    BlochVector::new(
        m[0][0] * v.x + m[0][1] * v.y + m[0][2] * v.z,
        m[1][0] * v.x + m[1][1] * v.y + m[1][2] * v.z,
        m[2][0] * v.x + m[2][1] * v.y + m[2][2] * v.z,
    )
}

/// The reduced dynamics is linear in the initial Bloch vector, `v(t) = M(t) v(0)`.
/// This caches `M(t)` on a grid so many initial states can share one sector sum.
#[derive(Debug, Clone)]
pub struct DynamicalMap {
    grid: TimeGrid,
    config: SystemConfig,
    dynamics: Dynamics,
    maps: Vec<Mat3>,
}

impl DynamicalMap {
    pub fn physical(config: &SystemConfig, grid: &TimeGrid) -> Self {
        let sectors = sectors(config);
        let maps = grid
            .times()
            .map(|t| {
                let mut m = [[0.0; 3]; 3];
                for s in &sectors {
                    let gamma = s.field.norm();
                    if gamma == 0.0 {
                        for (i, row) in m.iter_mut().enumerate() {
                            row[i] += s.weight;
                        }
                        continue;
                    }
                    let n = s.field.scale(1.0 / gamma).to_array();
                    let (sn, c) = (gamma * t).sin_cos();
                    let cross = [[0.0, -n[2], n[1]], [n[2], 0.0, -n[0]], [-n[1], n[0], 0.0]];
                    for i in 0..3 {
                        for j in 0..3 {
                            let id = if i == j { c } else { 0.0 };
                            m[i][j] += s.weight * (id + sn * cross[i][j] + (1.0 - c) * n[i] * n[j]);
                        }
                    }
                }
                m
            })
            .collect();
        DynamicalMap { grid: *grid, config: *config, dynamics: Dynamics::Physical, maps }
    }

    /// Columns come from evaluating the printed formulas on the three states
    /// whose vector `(sinθ sinφ, sinθ cosφ, cosθ)` is a unit axis; the formulas
    /// are linear in that vector and `v(0) = −(that vector)`.
    pub fn literal(config: &SystemConfig, grid: &TimeGrid) -> Self {
        let half_pi = std::f64::consts::FRAC_PI_2;
        let probes = [(half_pi, half_pi), (half_pi, 0.0), (0.0, 0.0)]
            .map(|(th, ph)| InitialStateAngles::new(th, ph).expect("probe angles are valid"));
        let maps = grid
            .times()
            .map(|t| {
                let cols = probes.map(|a| literal_polarizations(config, &a, t).to_array());
                let mut m = [[0.0; 3]; 3];
                for (j, col) in cols.iter().enumerate() {
                    for i in 0..3 {
                        m[i][j] = -col[i];
                    }
                }
                m
            })
            .collect();
        DynamicalMap { grid: *grid, config: *config, dynamics: Dynamics::Literal, maps }
    }

    pub fn new(config: &SystemConfig, grid: &TimeGrid, dynamics: Dynamics) -> Self {
        match dynamics {
            Dynamics::Physical => Self::physical(config, grid),
            Dynamics::Literal => Self::literal(config, grid),
        }
    }

    pub fn grid(&self) -> &TimeGrid {
        &self.grid
    }

    pub fn trajectory(&self, angles: &InitialStateAngles) -> Result<BlochTrajectory, DynamicsError> {
        let v0 = initial_bloch(angles);
        let points = self.maps.iter().map(|m| apply(m, &v0)).collect();
        BlochTrajectory::new(self.grid, points, self.config, *angles, self.dynamics)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::f64::consts::{FRAC_PI_2, FRAC_PI_4, PI, TAU};

    fn cfg(omega: f64, a1: f64, a2: f64, n: u32) -> SystemConfig {
        SystemConfig::new(omega, a1, a2, n).unwrap()
    }

    #[test]
    fn gamma_examples() {
        assert_eq!(gamma_freq(&cfg(2.0, 0.0, 0.0, 3), 1.5, -0.5), 2.0);
        assert!((gamma_freq(&cfg(2.0, 1.0, 1.0, 2), 1.0, -1.0) - 6f64.sqrt()).abs() < 1e-15);
        assert_eq!(gamma_freq(&cfg(0.0, 1.0, 0.0, 4), 2.0, 0.0), 2.0);
    }

    #[test]
    fn rotation_matches_free_precession() {
        // v̇ = ω ẑ × v from (0,1,0) gives (−sin ωt, cos ωt, 0)
        let v = sector_rotation(&BlochVector::new(0.0, 1.0, 0.0), &cfg(2.0, 0.0, 0.0, 1), 0.5, 0.5, FRAC_PI_4);
        assert!(v.max_abs_diff(&BlochVector::new(-1.0, 0.0, 0.0)) < 1e-15);
    }

    #[test]
    fn rotation_fixed_points_and_periods() {
        let c = cfg(1.3, 0.7, 0.4, 2);
        let (m1, m2) = (1.0, -1.0);
        let gamma = gamma_freq(&c, m1, m2);
        let axis = BlochVector::new(0.7 * m1, 0.4 * m2, 1.3).scale(1.0 / gamma);
        let along = sector_rotation(&axis.scale(0.8), &c, m1, m2, 3.7);
        assert!(along.max_abs_diff(&axis.scale(0.8)) < 1e-15);

        let v0 = BlochVector::new(0.2, -0.6, 0.3);
        let back = sector_rotation(&v0, &c, m1, m2, TAU / gamma);
        assert!(back.max_abs_diff(&v0) < 1e-12);
    }

    #[test]
    fn zero_field_sector_is_identity() {
        let v0 = BlochVector::new(0.1, 0.2, 0.3);
        assert_eq!(sector_rotation(&v0, &cfg(0.0, 1.0, 1.0, 2), 0.0, 0.0, 5.0), v0);
    }

    #[test]
    fn bloch_at_origin_is_initial_state() {
        let a = InitialStateAngles::new(1.1, 4.0).unwrap();
        assert_eq!(bloch_at(&cfg(2.0, 0.3, 1.7, 3), &a, 0.0), initial_bloch(&a));
    }

    #[test]
    fn uncoupled_dynamics_is_single_sector_precession() {
        let a = InitialStateAngles::new(0.9, 2.2).unwrap();
        let v0 = initial_bloch(&a);
        for n in [1, 5, 40] {
            for t in [0.3, 7.0, 50.0] {
                let expected = sector_rotation(&v0, &cfg(2.0, 0.0, 0.0, 1), 0.0, 0.0, t);
                assert_eq!(bloch_at(&cfg(2.0, 0.0, 0.0, n), &a, t), expected);
                let (s, c) = (2.0 * t).sin_cos();
                let closed = BlochVector::new(c * v0.x - s * v0.y, s * v0.x + c * v0.y, v0.z);
                assert!(expected.max_abs_diff(&closed) < 1e-13);
            }
        }
    }

    #[test]
    fn sector_spectrum_symmetric_under_bath_exchange() {
        let spectrum = |c: SystemConfig| {
            let row = sector_weights(c.bath_size).unwrap();
            let mut out = Vec::new();
            for s1 in &row {
                for s2 in &row {
                    out.push((gamma_freq(&c, s1.m(), s2.m()), &s1.zeta * &s2.zeta));
                }
            }
            out.sort_by(|a, b| a.0.total_cmp(&b.0).then(a.1.cmp(&b.1)));
            out
        };
        let a = spectrum(cfg(1.0, 0.3, 0.8, 5));
        let b = spectrum(cfg(1.0, 0.8, 0.3, 5));
        assert_eq!(a.len(), b.len());
        for (x, y) in a.iter().zip(&b) {
            assert!((x.0 - y.0).abs() < 1e-14);
            assert_eq!(x.1, y.1);
        }
    }

    #[test]
    fn literal_formulas_at_origin() {
        let c = cfg(2.0, 0.7, 1.1, 3);
        let a = InitialStateAngles::new(FRAC_PI_2, 0.0).unwrap();
        let lit = literal_polarizations(&c, &a, 0.0);
        assert!(lit.x.abs() < 1e-15);
        assert!((lit.z + 0.5 * FRAC_PI_2.cos()).abs() < 1e-15);

        let a = InitialStateAngles::new(FRAC_PI_2, FRAC_PI_2).unwrap();
        let lit = literal_polarizations(&cfg(2.0, 0.0, 0.0, 2), &a, 0.0);
        assert!((lit.x + 0.5).abs() < 1e-15);

        let a = InitialStateAngles::new(1.2, 0.4).unwrap();
        let lit = literal_polarizations(&c, &a, 0.0);
        assert!((lit.norm() - 0.5).abs() < 1e-15);
        assert!((bloch_at(&c, &a, 0.0).norm() - 1.0).abs() < 1e-15);
    }

    #[test]
    fn literal_formulas_are_half_the_normalized_dynamics() {
        for (c, a) in [
            (cfg(2.0, 1.0, 0.0, 4), InitialStateAngles::new(2.0, 1.0).unwrap()),
            (cfg(0.7, 0.3, 1.9, 3), InitialStateAngles::new(0.4, 5.0).unwrap()),
            (cfg(0.0, 0.5, 0.5, 2), InitialStateAngles::new(PI, 0.0).unwrap()),
        ] {
            for t in [0.0, 0.9, 4.3, 17.0] {
                let lit = literal_polarizations(&c, &a, t);
                let phys = bloch_at(&c, &a, t);
                assert!(lit.max_abs_diff(&phys.scale(0.5)) < 1e-13, "t={t}");
            }
        }
    }

    #[test]
    fn trajectory_points_are_pointwise() {
        let c = cfg(2.0, FRAC_PI_4.cos(), FRAC_PI_4.cos(), 2);
        let a = InitialStateAngles::new(PI / 3.0, FRAC_PI_4).unwrap();
        let coarse = bloch_trajectory(&c, &a, &TimeGrid::new(0.0, 10.0, 11).unwrap()).unwrap();
        let fine = bloch_trajectory(&c, &a, &TimeGrid::new(0.0, 10.0, 101).unwrap()).unwrap();
        for (i, p) in coarse.points.iter().enumerate() {
            assert_eq!(*p, fine.points[10 * i]);
        }
        assert!(fine.points.iter().all(BlochVector::is_physical));

        let two = bloch_trajectory(&c, &a, &TimeGrid::new(0.0, 3.0, 2).unwrap()).unwrap();
        assert_eq!(two.points, vec![initial_bloch(&a), bloch_at(&c, &a, 3.0)]);
    }

    #[test]
    fn cached_map_agrees_with_direct_sum() {
        let c = cfg(2.0, 0.25, 0.25, 6);
        let grid = TimeGrid::new(0.0, 20.0, 301).unwrap();
        let map = DynamicalMap::physical(&c, &grid);
        let lit_map = DynamicalMap::literal(&c, &grid);
        for (th, ph) in [(0.3, 0.1), (2.0, 1.0), (PI, 0.0)] {
            let a = InitialStateAngles::new(th, ph).unwrap();
            let direct = bloch_trajectory(&c, &a, &grid).unwrap();
            let cached = map.trajectory(&a).unwrap();
            let literal = literal_trajectory(&c, &a, &grid).unwrap();
            let cached_lit = lit_map.trajectory(&a).unwrap();
            for i in 0..grid.n_steps() {
                assert!(direct.points[i].max_abs_diff(&cached.points[i]) < 1e-13);
                assert!(literal.points[i].max_abs_diff(&cached_lit.points[i]) < 1e-13);
            }
        }
    }

    #[test]
    fn grid_validation() {
        assert!(TimeGrid::new(0.0, 1.0, 1).is_err());
        assert!(TimeGrid::new(1.0, 1.0, 5).is_err());
        assert!(TimeGrid::new(-1.0, 1.0, 5).is_err());
        let g = TimeGrid::new(0.0, PI, 4001).unwrap();
        assert_eq!(g.time(4000), PI);
        let r = TimeGrid::resolving(50.0, 2.0, 40.0).unwrap();
        assert!(r.dt() <= TAU / (40.0 * 2.0));
    }
}
