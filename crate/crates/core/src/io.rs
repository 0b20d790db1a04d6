//! File formats: instance JSON, trajectory CSV and the run summary.
//!
//! Instance documents look like
//!
//! ```json
//! {"vertices": 1,
//!  "edges": [{"id": 1, "ends": [0, 0], "theta": "1/2 pi"},
//!            {"id": 2, "ends": [0, 0], "theta": 1.5707963267948966}],
//!  "faces": [[1, 2, -1, -2]]}
//! ```
//!
//! A positive id in a face traverses the edge from `ends[0]` to `ends[1]`,
//! a negative id traverses it backwards.

use std::collections::HashMap;
use std::io::{BufRead, Write};

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::complex::{build_complex, CellComplex, ComplexError, DirectedEdge, Edge, Weight};
use crate::flow::{StopReason, Trajectory};

#[derive(Debug, Error)]
pub enum IoError {
    #[error("I/O error: {0}")]
    Io(#[from] std::io::Error),
    #[error("malformed instance JSON: {0}")]
    Json(#[from] serde_json::Error),
    #[error("cannot parse weight {0:?}: expected radians or \"p/q pi\"")]
    BadWeight(String),
    #[error("edge id {0} is not a positive integer")]
    BadEdgeId(i64),
    #[error("edge id {0} is declared twice")]
    DuplicateEdgeId(i64),
    #[error("face {face} references undeclared edge id {id}")]
    UnknownEdgeId { face: usize, id: i64 },
    #[error("edge id {id}: endpoint {vertex} out of range")]
    BadEndpoint { id: i64, vertex: i64 },
    #[error(transparent)]
    Complex(#[from] ComplexError),
    #[error("malformed trajectory CSV, line {line}: {msg}")]
    Csv { line: usize, msg: String },
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum ThetaSpec {
    Radians(f64),
    Text(String),
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EdgeSpec {
    pub id: i64,
    pub ends: [i64; 2],
    pub theta: ThetaSpec,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct InstanceDoc {
    pub vertices: usize,
    pub edges: Vec<EdgeSpec>,
    pub faces: Vec<Vec<i64>>,
}

/// Parse `"p/q pi"`, `"p pi"`, `"pi"`, `"p/q*pi"` or a plain decimal in radians.
pub fn parse_weight(text: &str) -> Result<Weight, IoError> {
    let bad = || IoError::BadWeight(text.to_string());
    let t = text.trim();
    let Some(coef) = t.strip_suffix("pi").or_else(|| t.strip_suffix("π")) else {
        return t.parse::<f64>().map(Weight::radians).map_err(|_| bad());
    };
    let coef = coef.trim().trim_end_matches('*').trim();
    if coef.is_empty() {
        return Ok(Weight::pi_fraction(1, 1));
    }
    let (p, q) = match coef.split_once('/') {
        Some((p, q)) => (p.trim(), q.trim()),
        None => (coef, "1"),
    };
    let p: i64 = p.parse().map_err(|_| bad())?;
    let q: i64 = q.parse().map_err(|_| bad())?;
    if q == 0 {
        return Err(bad());
    }
    Ok(Weight::pi_fraction(p, q))
}

impl InstanceDoc {
    pub fn into_complex(self) -> Result<CellComplex, IoError> {
        let mut index: HashMap<i64, usize> = HashMap::new();
        let mut edges = Vec::with_capacity(self.edges.len());
        for spec in &self.edges {
            if spec.id <= 0 {
                return Err(IoError::BadEdgeId(spec.id));
            }
            if index.insert(spec.id, edges.len()).is_some() {
                return Err(IoError::DuplicateEdgeId(spec.id));
            }
            let mut ends = [0usize; 2];
            for (slot, &v) in ends.iter_mut().zip(&spec.ends) {
                if v < 0 || v as usize >= self.vertices {
                    return Err(IoError::BadEndpoint { id: spec.id, vertex: v });
                }
                *slot = v as usize;
            }
            let weight = match &spec.theta {
                ThetaSpec::Radians(x) => Weight::radians(*x),
                ThetaSpec::Text(s) => parse_weight(s)?,
            };
            edges.push(Edge { ends, weight });
        }
        let faces = self
            .faces
            .iter()
            .enumerate()
            .map(|(f, ids)| {
                ids.iter()
                    .map(|&id| {
                        let edge = *index.get(&id.abs()).ok_or(IoError::UnknownEdgeId { face: f, id })?;
                        Ok(DirectedEdge { edge, forward: id > 0 })
                    })
                    .collect::<Result<Vec<_>, IoError>>()
            })
            .collect::<Result<Vec<_>, IoError>>()?;
        Ok(build_complex(self.vertices, edges, faces)?)
    }

    /// Document for an existing complex; exact weights are written as `"p/q pi"`.
    pub fn from_complex(c: &CellComplex) -> Self {
        let edges = c
            .edges()
            .iter()
            .enumerate()
            .map(|(k, e)| EdgeSpec {
                id: k as i64 + 1,
                ends: [e.ends[0] as i64, e.ends[1] as i64],
                theta: match e.weight.pi_multiple() {
                    Some(q) => ThetaSpec::Text(format!("{}/{} pi", q.numer(), q.denom())),
                    None => ThetaSpec::Radians(e.theta()),
                },
            })
            .collect();
        let faces = c
            .faces()
            .iter()
            .map(|f| f.iter().map(|d| if d.forward { d.edge as i64 + 1 } else { -(d.edge as i64 + 1) }).collect())
            .collect();
        Self { vertices: c.num_vertices(), edges, faces }
    }
}

pub fn parse_instance(json: &str) -> Result<CellComplex, IoError> {
    serde_json::from_str::<InstanceDoc>(json)?.into_complex()
}

pub fn read_instance(path: &std::path::Path) -> Result<CellComplex, IoError> {
    parse_instance(&std::fs::read_to_string(path)?)
}

fn fmt_float(x: f64) -> String {
    format!("{x:.16e}")
}

/// Write `t, r_0..r_{n-1}, K_0..K_{n-1}, energy`, one row per sample, with
/// 17 significant digits.
pub fn write_trajectory_csv(traj: &Trajectory, mut out: impl Write) -> std::io::Result<()> {
    let n = traj.final_state.len();
    let mut header = vec!["t".to_string()];
    header.extend((0..n).map(|i| format!("r_{i}")));
    header.extend((0..n).map(|i| format!("K_{i}")));
    header.push("energy".into());
    writeln!(out, "{}", header.join(","))?;
    for s in &traj.samples {
        let mut row = Vec::with_capacity(2 * n + 2);
        row.push(fmt_float(s.t));
        row.extend(s.r.iter().map(|&x| fmt_float(x)));
        row.extend(s.k.iter().map(|&x| fmt_float(x)));
        row.push(fmt_float(s.energy));
        writeln!(out, "{}", row.join(","))?;
    }
    Ok(())
}

#[derive(Debug, Clone, PartialEq)]
pub struct TrajectoryRow {
    pub t: f64,
    pub r: Vec<f64>,
    pub k: Vec<f64>,
    pub energy: f64,
}

pub fn read_trajectory_csv(input: impl BufRead) -> Result<Vec<TrajectoryRow>, IoError> {
    let mut lines = input.lines().enumerate();
    let (_, header) = lines.next().ok_or(IoError::Csv { line: 1, msg: "empty file".into() })?;
    let header = header?;
    let cols: Vec<&str> = header.trim().split(',').collect();
    let n_r = cols.iter().filter(|c| c.starts_with("r_")).count();
    let n_k = cols.iter().filter(|c| c.starts_with("K_")).count();
    let well_formed = cols.len() >= 4
        && cols.first() == Some(&"t")
        && cols.last() == Some(&"energy")
        && n_r == n_k
        && n_r + n_k + 2 == cols.len();
    if !well_formed {
        return Err(IoError::Csv { line: 1, msg: format!("unexpected header {header:?}") });
    }
    let mut rows = Vec::new();
    for (i, line) in lines {
        let line = line?;
        if line.trim().is_empty() {
            continue;
        }
        let vals = line
            .split(',')
            .map(|v| v.trim().parse::<f64>())
            .collect::<Result<Vec<f64>, _>>()
            .map_err(|e| IoError::Csv { line: i + 1, msg: e.to_string() })?;
        if vals.len() != cols.len() {
            return Err(IoError::Csv {
                line: i + 1,
                msg: format!("expected {} fields, found {}", cols.len(), vals.len()),
            });
        }
        rows.push(TrajectoryRow {
            t: vals[0],
            r: vals[1..=n_r].to_vec(),
            k: vals[n_r + 1..=2 * n_r].to_vec(),
            energy: vals[2 * n_r + 1],
        });
    }
    Ok(rows)
}

/// Machine-readable outcome of a flow run.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RunSummary {
    pub stop_reason: StopReason,
    pub steps: usize,
    pub final_residual: f64,
    pub energy0: f64,
    #[serde(rename = "energyT")]
    pub energy_t: f64,
    pub lambda_fit: Option<f64>,
    pub r2_fit: Option<f64>,
    pub final_k: Vec<f64>,
    pub final_r: Vec<f64>,
}

impl RunSummary {
    pub fn from_trajectory(traj: &Trajectory) -> Self {
        let first = &traj.samples[0];
        let last = traj.final_sample();
        Self {
            stop_reason: traj.stop_reason,
            steps: traj.steps,
            final_residual: traj.final_residual(),
            energy0: first.energy,
            energy_t: last.energy,
            lambda_fit: traj.fitted_rate.map(|f| f.lambda),
            r2_fit: traj.fitted_rate.map(|f| f.r2),
            final_k: last.k.clone(),
            final_r: traj.final_state.r().to_vec(),
        }
    }
}
