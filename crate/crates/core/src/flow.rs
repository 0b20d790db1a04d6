//! Combinatorial Calabi and Ricci flows, integrated in `u`-coordinates.
//!
//! | flow              | `du/dt`            |
//! |-------------------|--------------------|
//! | Calabi, hyperbolic| `-L K`             |
//! | Calabi, Euclidean | `-L (K - K_av)`    |
//! | Ricci, hyperbolic | `-K`               |
//! | Ricci, Euclidean  | `K_av - K`         |
//!
//! The Ricci rows are the radius equations `dr/dt = -K sinh r` and
//! `dr/dt = (K_av - K) r` rewritten through `du/dr`. Since `L 1 = 0` in the
//! Euclidean case, `-L (K - K_av) = -L K`.

use nalgebra::DVector;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::complex::Triangulation;
use crate::curvature::{calabi_energy, curvatures, jacobian, k_average, CurvatureError, PatternState};
use crate::geometry::Geometry;

/// Smallest step the integrator will shrink to before giving up.
pub const DT_FLOOR: f64 = 1e-12;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum FlowError {
    #[error("step size fell below {DT_FLOOR:e} (requested {requested:e})")]
    StepUnderflow { requested: f64 },
    #[error("need at least {needed} samples with positive energy, got {got}")]
    InsufficientSamples { needed: usize, got: usize },
    #[error("{flow:?} flow stopped with {reason:?} (residual {residual:e})")]
    NonConvergence { flow: FlowKind, reason: StopReason, residual: f64 },
    #[error("invalid flow configuration: {0}")]
    InvalidConfig(String),
    #[error("state geometry {state:?} does not match the {flow:?} flow")]
    GeometryMismatch { flow: FlowKind, state: Geometry },
    #[error(transparent)]
    Curvature(#[from] CurvatureError),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum FlowKind {
    CalabiHyperbolic,
    CalabiEuclidean,
    RicciHyperbolic,
    RicciEuclidean,
}

impl FlowKind {
    pub fn new(calabi: bool, geometry: Geometry) -> Self {
        match (calabi, geometry) {
            (true, Geometry::Hyperbolic) => Self::CalabiHyperbolic,
            (true, Geometry::Euclidean) => Self::CalabiEuclidean,
            (false, Geometry::Hyperbolic) => Self::RicciHyperbolic,
            (false, Geometry::Euclidean) => Self::RicciEuclidean,
        }
    }

    pub fn geometry(self) -> Geometry {
        match self {
            Self::CalabiHyperbolic | Self::RicciHyperbolic => Geometry::Hyperbolic,
            Self::CalabiEuclidean | Self::RicciEuclidean => Geometry::Euclidean,
        }
    }

    pub fn is_calabi(self) -> bool {
        matches!(self, Self::CalabiHyperbolic | Self::CalabiEuclidean)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum Method {
    Rk4,
    Euler,
}

#[derive(Debug, Clone, PartialEq)]
pub struct FlowConfig {
    pub kind: FlowKind,
    pub dt: f64,
    /// Stop once `max |K_i - K_target| < tol`.
    pub tol: f64,
    pub max_steps: usize,
    pub method: Method,
    pub record_every: usize,
}

impl FlowConfig {
    pub fn new(kind: FlowKind) -> Self {
        Self { kind, dt: 1e-2, tol: 1e-10, max_steps: 1_000_000, method: Method::Rk4, record_every: 1 }
    }

    pub fn validate(&self) -> Result<(), FlowError> {
        if !(self.dt > 0.0 && self.dt.is_finite()) {
            return Err(FlowError::InvalidConfig(format!("dt must be positive, got {}", self.dt)));
        }
        if self.tol.is_nan() || self.tol <= 0.0 {
            return Err(FlowError::InvalidConfig(format!("tol must be positive, got {}", self.tol)));
        }
        if self.max_steps == 0 {
            return Err(FlowError::InvalidConfig("max_steps must be at least 1".into()));
        }
        if self.record_every == 0 {
            return Err(FlowError::InvalidConfig("record_every must be at least 1".into()));
        }
        Ok(())
    }
}

/// Curvature every flow drives towards: 0 (hyperbolic) or `K_av` (Euclidean).
pub fn k_target(tri: &Triangulation, geometry: Geometry) -> f64 {
    match geometry {
        Geometry::Hyperbolic => 0.0,
        Geometry::Euclidean => k_average(tri.complex()),
    }
}

/// `du/dt` at `s`.
pub fn rhs(kind: FlowKind, tri: &Triangulation, s: &PatternState) -> Result<Vec<f64>, FlowError> {
    if s.geometry() != kind.geometry() {
        return Err(FlowError::GeometryMismatch { flow: kind, state: s.geometry() });
    }
    let target = k_target(tri, kind.geometry());
    let k = curvatures(tri, s)?;
    let excess: Vec<f64> = k.iter().map(|ki| ki - target).collect();
    Ok(if kind.is_calabi() {
        let l = jacobian(tri, s)?.l;
        (-(l * DVector::from_vec(excess))).iter().copied().collect()
    } else {
        excess.into_iter().map(|e| -e).collect()
    })
}

fn residual_energy(k: &[f64], target: f64) -> f64 {
    k.iter().map(|x| (x - target) * (x - target)).sum()
}

fn axpy(u: &[f64], h: f64, d: &[f64]) -> Vec<f64> {
    u.iter().zip(d).map(|(a, b)| a + h * b).collect()
}

fn try_step(
    cfg: &FlowConfig,
    tri: &Triangulation,
    s: &PatternState,
    k1: &[f64],
    dt: f64,
) -> Result<PatternState, FlowError> {
    let g = s.geometry();
    let u = s.u();
    let next = match cfg.method {
        Method::Euler => axpy(u, dt, k1),
        Method::Rk4 => {
            let k2 = rhs(cfg.kind, tri, &PatternState::from_u(g, axpy(u, dt / 2.0, k1))?)?;
            let k3 = rhs(cfg.kind, tri, &PatternState::from_u(g, axpy(u, dt / 2.0, &k2))?)?;
            let k4 = rhs(cfg.kind, tri, &PatternState::from_u(g, axpy(u, dt, &k3))?)?;
            u.iter().enumerate().map(|(i, ui)| ui + dt / 6.0 * (k1[i] + 2.0 * k2[i] + 2.0 * k3[i] + k4[i])).collect()
        }
    };
    Ok(PatternState::from_u(g, next)?)
}

/// Result of one accepted step.
#[derive(Debug, Clone, PartialEq)]
pub struct StepOutcome {
    pub state: PatternState,
    /// Step size actually taken (after any halving).
    pub dt: f64,
}

/// One RK4 (or Euler) step of size `dt`, halved until the candidate stays in
/// the domain with finite values and, for Calabi flows, does not raise the
/// energy.
pub fn step(cfg: &FlowConfig, tri: &Triangulation, s: &PatternState, dt: f64) -> Result<StepOutcome, FlowError> {
    let k1 = rhs(cfg.kind, tri, s)?;
    let target = k_target(tri, cfg.kind.geometry());
    let energy = if cfg.kind.is_calabi() { residual_energy(&curvatures(tri, s)?, target) } else { 0.0 };
    let requested = dt;
    let mut dt = dt;
    while dt >= DT_FLOOR {
        if let Ok(state) = try_step(cfg, tri, s, &k1, dt) {
            let accept = !cfg.kind.is_calabi()
                || curvatures(tri, &state)
                    .map(|k| residual_energy(&k, target) <= energy * (1.0 + 1e-9) + 1e-24)
                    .unwrap_or(false);
            if accept {
                return Ok(StepOutcome { state, dt });
            }
        }
        dt /= 2.0;
    }
    Err(FlowError::StepUnderflow { requested })
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum StopReason {
    Converged,
    MaxSteps,
    StepUnderflow,
}

#[derive(Debug, Clone, PartialEq)]
pub struct Sample {
    pub t: f64,
    pub r: Vec<f64>,
    pub k: Vec<f64>,
    /// Calabi energy `sum K_i^2`.
    pub energy: f64,
    /// `sum (K_i - K_target)^2`; equals `energy` in hyperbolic geometry.
    pub residual_energy: f64,
}

impl Sample {
    pub fn residual(&self, target: f64) -> f64 {
        self.k.iter().map(|x| (x - target).abs()).fold(0.0, f64::max)
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct RateFit {
    /// Decay rate of the energy: `E(t) ~ exp(-lambda t)`.
    pub lambda: f64,
    pub r2: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct Trajectory {
    pub kind: FlowKind,
    pub samples: Vec<Sample>,
    pub stop_reason: StopReason,
    pub steps: usize,
    pub k_target: f64,
    /// Final state; Euclidean radii are rescaled so that `sum u_i` matches
    /// the initial state.
    pub final_state: PatternState,
    /// Largest radius seen at any step.
    pub max_radius: f64,
    pub fitted_rate: Option<RateFit>,
}

impl Trajectory {
    pub fn final_sample(&self) -> &Sample {
        self.samples.last().expect("trajectory always records its final state")
    }

    pub fn final_residual(&self) -> f64 {
        self.final_sample().residual(self.k_target)
    }

    pub fn converged(&self) -> bool {
        self.stop_reason == StopReason::Converged
    }
}

fn sample(t: f64, s: &PatternState, k: Vec<f64>, target: f64) -> Sample {
    Sample { t, r: s.r().to_vec(), energy: calabi_energy(&k), residual_energy: residual_energy(&k, target), k }
}

/// Integrate from `s0` until the curvature residual drops below `cfg.tol`,
/// the step budget runs out, or the step size underflows.
pub fn run(cfg: &FlowConfig, tri: &Triangulation, s0: &PatternState) -> Result<Trajectory, FlowError> {
    cfg.validate()?;
    let geometry = cfg.kind.geometry();
    if s0.geometry() != geometry {
        return Err(FlowError::GeometryMismatch { flow: cfg.kind, state: s0.geometry() });
    }
    let target = k_target(tri, geometry);
    let mut state = s0.clone();
    let mut samples = Vec::new();
    let mut t = 0.0;
    let mut dt = cfg.dt;
    let mut steps = 0;
    let mut max_radius = state.r().iter().copied().fold(0.0, f64::max);
    let stop_reason = loop {
        let k = curvatures(tri, &state)?;
        let residual = k.iter().map(|x| (x - target).abs()).fold(0.0, f64::max);
        let converged = residual < cfg.tol;
        if converged || steps >= cfg.max_steps || steps % cfg.record_every == 0 {
            samples.push(sample(t, &state, k, target));
        }
        if converged {
            break StopReason::Converged;
        }
        if steps >= cfg.max_steps {
            break StopReason::MaxSteps;
        }
        match step(cfg, tri, &state, dt) {
            Ok(out) => {
                t += out.dt;
                dt = out.dt;
                state = out.state;
                max_radius = state.r().iter().copied().fold(max_radius, f64::max);
                steps += 1;
            }
            Err(FlowError::StepUnderflow { .. }) => {
                let k = curvatures(tri, &state)?;
                if samples.last().map(|s| s.t) != Some(t) {
                    samples.push(sample(t, &state, k, target));
                }
                break StopReason::StepUnderflow;
            }
            Err(e) => return Err(e),
        }
    };
    if geometry == Geometry::Euclidean {
        let shift = (s0.u().iter().sum::<f64>() - state.u().iter().sum::<f64>()) / state.len() as f64;
        state = PatternState::from_u(geometry, state.u().iter().map(|x| x + shift).collect())?;
    }
    let mut traj = Trajectory {
        kind: cfg.kind,
        samples,
        stop_reason,
        steps,
        k_target: target,
        final_state: state,
        max_radius,
        fitted_rate: None,
    };
    traj.fitted_rate = fit_rate(&traj).ok();
    Ok(traj)
}

pub const MIN_FIT_SAMPLES: usize = 10;

/// Least-squares fit of `ln E(t)` over the last half of the samples with
/// positive residual energy.
pub fn fit_rate(traj: &Trajectory) -> Result<RateFit, FlowError> {
    let points: Vec<(f64, f64)> = traj.samples.iter().map(|s| (s.t, s.residual_energy)).collect();
    fit_exponential(&points)
}

/// Fit `E(t) = E0 exp(-lambda t)` to the last half of the `(t, E)` points
/// with `E > 0`.
pub fn fit_exponential(points: &[(f64, f64)]) -> Result<RateFit, FlowError> {
    let positive: Vec<(f64, f64)> =
        points.iter().filter(|(_, e)| *e > 0.0 && e.is_finite()).map(|&(t, e)| (t, e.ln())).collect();
    if positive.len() < MIN_FIT_SAMPLES {
        return Err(FlowError::InsufficientSamples { needed: MIN_FIT_SAMPLES, got: positive.len() });
    }
    let tail = &positive[positive.len() / 2..];
    let n = tail.len() as f64;
    let mean_t = tail.iter().map(|p| p.0).sum::<f64>() / n;
    let mean_y = tail.iter().map(|p| p.1).sum::<f64>() / n;
    let stt: f64 = tail.iter().map(|p| (p.0 - mean_t).powi(2)).sum();
    let sty: f64 = tail.iter().map(|p| (p.0 - mean_t) * (p.1 - mean_y)).sum();
    let syy: f64 = tail.iter().map(|p| (p.1 - mean_y).powi(2)).sum();
    if stt == 0.0 {
        return Err(FlowError::InsufficientSamples { needed: MIN_FIT_SAMPLES, got: 1 });
    }
    let slope = sty / stt;
    let ss_res = (syy - slope * sty).max(0.0);
    let r2 = if syy <= f64::EPSILON * n * mean_y.abs().max(1.0) { 1.0 } else { 1.0 - ss_res / syy };
    Ok(RateFit { lambda: -slope, r2 })
}

/// Calabi and Ricci runs from the same initial state.
#[derive(Debug, Clone, PartialEq)]
pub struct CrossValidation {
    pub calabi: Trajectory,
    pub ricci: Trajectory,
    /// `max_i |r_i^Calabi - r_i^Ricci|`, after fixing the Euclidean scale by
    /// `sum u_i = 0`.
    pub max_radius_gap: f64,
}

pub const CROSS_TOL: f64 = 1e-6;

impl CrossValidation {
    pub fn agrees(&self) -> bool {
        self.max_radius_gap < CROSS_TOL
    }
}

/// Scale-normalized radii: `sum u_i = 0` in Euclidean geometry, unchanged
/// otherwise.
pub fn gauge_fixed_radii(s: &PatternState) -> Vec<f64> {
    match s.geometry() {
        Geometry::Hyperbolic => s.r().to_vec(),
        Geometry::Euclidean => {
            let mean = s.u().iter().sum::<f64>() / s.len() as f64;
            s.u().iter().map(|u| (u - mean).exp()).collect()
        }
    }
}

/// Run both flows from `s0` with otherwise identical settings taken from
/// `base`, and compare their limits.
pub fn cross_validate(tri: &Triangulation, s0: &PatternState, base: &FlowConfig) -> Result<CrossValidation, FlowError> {
    let geometry = s0.geometry();
    let mut runs = [true, false].into_iter().map(|calabi| {
        let cfg = FlowConfig { kind: FlowKind::new(calabi, geometry), ..base.clone() };
        let traj = run(&cfg, tri, s0)?;
        if !traj.converged() {
            return Err(FlowError::NonConvergence {
                flow: cfg.kind,
                reason: traj.stop_reason,
                residual: traj.final_residual(),
            });
        }
        Ok(traj)
    });
    let calabi = runs.next().unwrap()?;
    let ricci = runs.next().unwrap()?;
    let a = gauge_fixed_radii(&calabi.final_state);
    let b = gauge_fixed_radii(&ricci.final_state);
    let max_radius_gap = a.iter().zip(&b).map(|(x, y)| (x - y).abs()).fold(0.0, f64::max);
    Ok(CrossValidation { calabi, ricci, max_radius_gap })
}
