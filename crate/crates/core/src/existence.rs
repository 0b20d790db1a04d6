//! Combinatorial and empirical existence checks for zero / constant curvature
//! ideal patterns.

use std::f64::consts::PI;

use rand::rngs::StdRng;
use rand::seq::index::sample;
use rand::{Rng, SeedableRng};
use rayon::prelude::*;
use serde::Serialize;
use thiserror::Error;

use crate::complex::{check_star, triangulate, CellComplex, ComplexError, StarReport};
use crate::curvature::PatternState;
use crate::flow::{run, FlowConfig, FlowError, FlowKind, StopReason};
use crate::geometry::Geometry;

/// Largest vertex count enumerated exhaustively.
pub const EXACT_LIMIT: usize = 20;
/// Random subsets drawn above [`EXACT_LIMIT`].
pub const RANDOM_SUBSETS: usize = 100_000;
const SAMPLE_SEED: u64 = 0x1dea1;

#[derive(Debug, Error)]
pub enum ExistenceError {
    #[error(transparent)]
    Complex(#[from] ComplexError),
    #[error(transparent)]
    Flow(#[from] FlowError),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum Coverage {
    Exact,
    Sampled,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct H3Verdict {
    pub pass: bool,
    pub coverage: Coverage,
    /// A subset `A` with `sum_{e meets A} theta(e) <= pi |A|`, when one was found.
    pub witness: Option<Vec<usize>>,
    pub subsets_checked: u64,
}

struct EdgeWeights {
    ends: Vec<[usize; 2]>,
    theta: Vec<f64>,
}

impl EdgeWeights {
    fn new(c: &CellComplex) -> Self {
        Self { ends: c.edges().iter().map(|e| e.ends).collect(), theta: c.edges().iter().map(|e| e.theta()).collect() }
    }

    /// `sum theta(e) - pi |A|` over edges with an endpoint in `A`.
    fn margin(&self, member: impl Fn(usize) -> bool, size: usize) -> f64 {
        let total: f64 =
            self.ends.iter().zip(&self.theta).filter(|([a, b], _)| member(*a) || member(*b)).map(|(_, t)| t).sum();
        total - PI * size as f64
    }
}

fn violates(margin: f64, size: usize) -> bool {
    // strict inequality; equality up to rounding counts as failure
    margin <= 1e-12 * (1 + size) as f64
}

/// Check `sum_{e : e meets A} theta(e) > pi |A|` for every nonempty `A`.
///
/// Exhaustive up to [`EXACT_LIMIT`] vertices; beyond that all singletons,
/// all pairs, the full vertex set and [`RANDOM_SUBSETS`] seeded random
/// subsets are tested and the verdict is labelled [`Coverage::Sampled`].
pub fn check_h3(c: &CellComplex) -> H3Verdict {
    let n = c.num_vertices();
    let weights = EdgeWeights::new(c);
    if n <= EXACT_LIMIT {
        let masks: Vec<u32> = weights.ends.iter().map(|[a, b]| (1u32 << a) | (1u32 << b)).collect();
        let bad = (1u32..(1u32 << n)).into_par_iter().find_first(|&set| {
            let total: f64 = masks.iter().zip(&weights.theta).filter(|(m, _)| *m & set != 0).map(|(_, t)| t).sum();
            let size = set.count_ones() as usize;
            violates(total - PI * size as f64, size)
        });
        let witness = bad.map(|set| (0..n).filter(|v| set & (1 << v) != 0).collect());
        return H3Verdict {
            pass: witness.is_none(),
            coverage: Coverage::Exact,
            witness,
            subsets_checked: (1u64 << n) - 1,
        };
    }

    let mut checked = 0u64;
    let mut test = |set: &[usize]| -> bool {
        checked += 1;
        let mut member = vec![false; n];
        for &v in set {
            member[v] = true;
        }
        violates(weights.margin(|v| member[v], set.len()), set.len())
    };
    let mut witness = None;
    'search: {
        for i in 0..n {
            if test(&[i]) {
                witness = Some(vec![i]);
                break 'search;
            }
        }
        for i in 0..n {
            for j in i + 1..n {
                if test(&[i, j]) {
                    witness = Some(vec![i, j]);
                    break 'search;
                }
            }
        }
        let all: Vec<usize> = (0..n).collect();
        if test(&all) {
            witness = Some(all);
            break 'search;
        }
        let mut rng = StdRng::seed_from_u64(SAMPLE_SEED);
        for _ in 0..RANDOM_SUBSETS {
            let size = rng.gen_range(1..=n);
            let mut set = sample(&mut rng, n, size).into_vec();
            if test(&set) {
                set.sort_unstable();
                witness = Some(set);
                break 'search;
            }
        }
    }
    H3Verdict { pass: witness.is_none(), coverage: Coverage::Sampled, witness, subsets_checked: checked }
}

#[derive(Debug, Clone, PartialEq)]
pub enum EmpiricalVerdict {
    /// The Calabi flow reached the target curvature; by rigidity the final
    /// pattern is the unique one.
    Converged { state: PatternState, residual: f64, steps: usize },
    /// Budget exhausted or the step size underflowed. This is never evidence
    /// of non-existence on its own.
    Inconclusive { reason: StopReason, residual: f64, steps: usize, max_radius: f64, min_radius: f64 },
}

impl EmpiricalVerdict {
    pub fn converged(&self) -> bool {
        matches!(self, Self::Converged { .. })
    }
}

/// Run the Calabi flow from `r = 1` for at most `budget` steps.
pub fn classify_empirical(
    c: &CellComplex,
    geometry: Geometry,
    budget: usize,
) -> Result<EmpiricalVerdict, ExistenceError> {
    let tri = triangulate(c)?;
    let s0 = PatternState::constant(geometry, c.num_vertices(), 1.0).map_err(FlowError::from)?;
    let cfg =
        FlowConfig { max_steps: budget, record_every: budget.max(1), ..FlowConfig::new(FlowKind::new(true, geometry)) };
    let traj = run(&cfg, &tri, &s0)?;
    let residual = traj.final_residual();
    Ok(if traj.converged() {
        EmpiricalVerdict::Converged { state: traj.final_state, residual, steps: traj.steps }
    } else {
        let r = traj.final_state.r();
        EmpiricalVerdict::Inconclusive {
            reason: traj.stop_reason,
            residual,
            steps: traj.steps,
            max_radius: traj.max_radius,
            min_radius: r.iter().copied().fold(f64::INFINITY, f64::min),
        }
    })
}

#[derive(Debug, Clone, PartialEq)]
pub struct ExistenceVerdict {
    pub star: StarReport,
    /// Only evaluated in hyperbolic geometry.
    pub h3: Option<H3Verdict>,
    /// `None` when the angle-sum condition fails.
    pub empirical: Option<EmpiricalVerdict>,
}

pub fn assess(c: &CellComplex, geometry: Geometry, budget: usize) -> Result<ExistenceVerdict, ExistenceError> {
    let star = check_star(c);
    let h3 = (geometry == Geometry::Hyperbolic).then(|| check_h3(c));
    let empirical = if star.all_pass() { Some(classify_empirical(c, geometry, budget)?) } else { None };
    Ok(ExistenceVerdict { star, h3, empirical })
}
