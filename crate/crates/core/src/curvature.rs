//! Curvature map, its Jacobian in `u`-coordinates, Calabi energy, the Ricci
//! potential and Gauss-Bonnet accounting.
//!
//! Curvature is summed over triangulation corners: every (edge, face)
//! incidence at vertex `i` contributes one inner angle, so on a simple graph
//! each neighbour `j` appears twice (once per adjacent face), and loops and
//! multi-edges need no special casing.

use std::cell::RefCell;
use std::f64::consts::PI;

use gauss_quad::GaussLegendre;
use nalgebra::{DMatrix, DVector};
use thiserror::Error;

use crate::complex::{euler_characteristic, CellComplex, Triangulation};
use crate::geometry::{
    angle_partials_u, area_partial_u, inner_angle, triangle_area_hyp, At, Geometry, GeometryError, TwoCircleConfig,
};

#[derive(Debug, Error, Clone, PartialEq)]
pub enum CurvatureError {
    #[error("coordinate {index} = {value} is outside the {geometry:?} domain")]
    DomainViolation { geometry: Geometry, index: usize, value: f64 },
    #[error("state has {got} entries but the complex has {expected} vertices")]
    DimensionMismatch { expected: usize, got: usize },
    #[error("line-integral quadrature did not settle (last change {last_change:e})")]
    QuadratureNonConvergence { last_change: f64 },
    #[error(transparent)]
    Geometry(#[from] GeometryError),
}

/// Radius to `u`-coordinate: `ln tanh(r/2)` (hyperbolic) or `ln r` (Euclidean).
pub fn to_u(geometry: Geometry, r: &[f64]) -> Result<Vec<f64>, CurvatureError> {
    r.iter()
        .enumerate()
        .map(|(index, &ri)| {
            if !(ri > 0.0 && ri.is_finite()) {
                return Err(CurvatureError::DomainViolation { geometry, index, value: ri });
            }
            Ok(match geometry {
                Geometry::Euclidean => ri.ln(),
                Geometry::Hyperbolic if ri < 1.0 => (ri / 2.0).tanh().ln(),
                // ln(1 - 2/(e^r + 1)) without rounding tanh to 1
                Geometry::Hyperbolic => (-2.0 / (ri.exp() + 1.0)).ln_1p(),
            })
        })
        .collect()
}

/// Inverse of [`to_u`].
pub fn from_u(geometry: Geometry, u: &[f64]) -> Result<Vec<f64>, CurvatureError> {
    u.iter()
        .enumerate()
        .map(|(index, &ui)| {
            let ok = match geometry {
                Geometry::Euclidean => ui.is_finite(),
                Geometry::Hyperbolic => ui < 0.0 && ui.is_finite(),
            };
            if !ok {
                return Err(CurvatureError::DomainViolation { geometry, index, value: ui });
            }
            Ok(match geometry {
                Geometry::Euclidean => ui.exp(),
                // 2 artanh(e^u) = ln(1 + e^u) - ln(1 - e^u)
                Geometry::Hyperbolic if ui < -std::f64::consts::LN_2 => ui.exp().ln_1p() - (-ui.exp()).ln_1p(),
                Geometry::Hyperbolic => ui.exp().ln_1p() - (-ui.exp_m1()).ln(),
            })
        })
        .collect()
}

/// Radii together with their `u`-coordinate image.
#[derive(Debug, Clone, PartialEq)]
pub struct PatternState {
    geometry: Geometry,
    r: Vec<f64>,
    u: Vec<f64>,
}

impl PatternState {
    pub fn from_radii(geometry: Geometry, r: Vec<f64>) -> Result<Self, CurvatureError> {
        let u = to_u(geometry, &r)?;
        Ok(Self { geometry, r, u })
    }

    pub fn from_u(geometry: Geometry, u: Vec<f64>) -> Result<Self, CurvatureError> {
        let r = from_u(geometry, &u)?;
        if let Some(index) = r.iter().position(|x| !(*x > 0.0 && x.is_finite())) {
            return Err(CurvatureError::DomainViolation { geometry, index, value: u[index] });
        }
        Ok(Self { geometry, r, u })
    }

    pub fn constant(geometry: Geometry, n: usize, radius: f64) -> Result<Self, CurvatureError> {
        Self::from_radii(geometry, vec![radius; n])
    }

    pub fn geometry(&self) -> Geometry {
        self.geometry
    }

    pub fn r(&self) -> &[f64] {
        &self.r
    }

    pub fn u(&self) -> &[f64] {
        &self.u
    }

    pub fn len(&self) -> usize {
        self.r.len()
    }

    pub fn is_empty(&self) -> bool {
        self.r.is_empty()
    }

    fn config(&self, i: usize, j: usize, theta: f64) -> TwoCircleConfig {
        TwoCircleConfig { geometry: self.geometry, r_i: self.r[i], r_j: self.r[j], theta }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct CurvatureReport {
    pub k: Vec<f64>,
    pub calabi_energy: f64,
    /// Sum of hyperbolic triangle areas; `None` in Euclidean geometry.
    pub total_area: Option<f64>,
    pub gauss_bonnet_residual: f64,
}

fn check_dims(t: &Triangulation, s: &PatternState) -> Result<(), CurvatureError> {
    if s.len() != t.num_primal() {
        return Err(CurvatureError::DimensionMismatch { expected: t.num_primal(), got: s.len() });
    }
    Ok(())
}

/// Curvature vector only; the hot path of the flows.
pub fn curvatures(t: &Triangulation, s: &PatternState) -> Result<Vec<f64>, CurvatureError> {
    check_dims(t, s)?;
    let mut k = vec![2.0 * PI; t.num_primal()];
    for c in t.corners() {
        k[c.vertex] -= inner_angle(&s.config(c.vertex, c.other, t.theta(c.edge)), At::I);
    }
    Ok(k)
}

pub fn total_area(t: &Triangulation, s: &PatternState) -> Result<f64, CurvatureError> {
    check_dims(t, s)?;
    t.slots().iter().map(|sl| Ok(triangle_area_hyp(&s.config(sl.tail, sl.head, t.theta(sl.edge)))?)).sum()
}

pub fn curvature_map(t: &Triangulation, s: &PatternState) -> Result<CurvatureReport, CurvatureError> {
    let k = curvatures(t, s)?;
    let area = match s.geometry() {
        Geometry::Hyperbolic => Some(total_area(t, s)?),
        Geometry::Euclidean => None,
    };
    let mut report =
        CurvatureReport { calabi_energy: calabi_energy(&k), k, total_area: area, gauss_bonnet_residual: 0.0 };
    report.gauss_bonnet_residual = gauss_bonnet_residual(t, s, &report);
    Ok(report)
}

/// Constant curvature forced on a Euclidean pattern: `2 pi chi / |V|`.
pub fn k_average(c: &CellComplex) -> f64 {
    2.0 * PI * euler_characteristic(c) as f64 / c.num_vertices() as f64
}

/// `sum K_i - 2 pi chi` (Euclidean) or `sum K_i - 2 pi chi - Area` (hyperbolic).
pub fn gauss_bonnet_residual(t: &Triangulation, s: &PatternState, report: &CurvatureReport) -> f64 {
    let chi = euler_characteristic(t.complex()) as f64;
    let total: f64 = report.k.iter().sum();
    let area = match s.geometry() {
        Geometry::Hyperbolic => report.total_area.unwrap_or(0.0),
        Geometry::Euclidean => 0.0,
    };
    total - 2.0 * PI * chi - area
}

pub fn calabi_energy(k: &[f64]) -> f64 {
    k.iter().map(|x| x * x).sum()
}

/// `L = dK/du`, with its split into the area diagonal `A` and the
/// Laplacian-like part `L_B` (Euclidean: `A` is absent and `L = L_B`).
#[derive(Debug, Clone, PartialEq)]
pub struct JacobianMatrix {
    pub l: DMatrix<f64>,
    pub a_diag: Option<DVector<f64>>,
    pub l_b: DMatrix<f64>,
}

impl JacobianMatrix {
    pub fn dim(&self) -> usize {
        self.l.nrows()
    }

    pub fn asymmetry(&self) -> f64 {
        (&self.l - self.l.transpose()).amax()
    }

    /// Maximum absolute row sum.
    pub fn inf_norm(&self) -> f64 {
        self.l.row_iter().map(|row| row.iter().map(|x| x.abs()).sum::<f64>()).fold(0.0, f64::max)
    }
}

pub fn jacobian(t: &Triangulation, s: &PatternState) -> Result<JacobianMatrix, CurvatureError> {
    check_dims(t, s)?;
    let n = t.num_primal();
    let mut l = DMatrix::zeros(n, n);
    let mut l_b = DMatrix::zeros(n, n);
    let mut a = match s.geometry() {
        Geometry::Hyperbolic => Some(DVector::zeros(n)),
        Geometry::Euclidean => None,
    };
    for c in t.corners() {
        let (i, j) = (c.vertex, c.other);
        let cfg = s.config(i, j, t.theta(c.edge));
        let p = angle_partials_u(&cfg);
        // K_i carries -theta_i for this corner
        l[(i, j)] -= p.cross;
        l[(i, i)] -= p.own_i;
        l_b[(i, j)] -= p.cross;
        l_b[(i, i)] += p.cross;
        if let Some(a) = a.as_mut() {
            a[i] += area_partial_u(&cfg)?;
        }
    }
    Ok(JacobianMatrix { l, a_diag: a, l_b })
}

/// Smallest eigenvalue of `L` (hyperbolic), or smallest eigenvalue on the
/// complement of the constant vector (Euclidean; `None` when `|V| = 1`).
pub fn spectral_gap(jac: &JacobianMatrix, geometry: Geometry) -> Option<f64> {
    let n = jac.dim();
    if n == 0 {
        return None;
    }
    let sym = (&jac.l + jac.l.transpose()) * 0.5;
    match geometry {
        Geometry::Hyperbolic => Some(sym.symmetric_eigenvalues().min()),
        Geometry::Euclidean => {
            if n == 1 {
                return None;
            }
            // lift the constant direction above the rest of the spectrum
            let shift = jac.inf_norm() * 2.0 + 1.0;
            let lifted = sym + DMatrix::from_element(n, n, shift / n as f64);
            Some(lifted.symmetric_eigenvalues().min())
        }
    }
}

/// `grad_u C = 2 L K`.
pub fn calabi_gradient(jac: &JacobianMatrix, k: &[f64]) -> Vec<f64> {
    let kv = DVector::from_column_slice(k);
    (&jac.l * kv * 2.0).iter().copied().collect()
}

const QUAD_NODES: usize = 16;
const QUAD_TOL: f64 = 1e-10;
const QUAD_MAX_PANELS: usize = 1 << 12;

/// Line integral of `sum K_i du_i` along the straight segment from `u_base`
/// to `u`, by composite 16-point Gauss-Legendre with panel doubling.
pub fn ricci_potential(
    t: &Triangulation,
    geometry: Geometry,
    u_base: &[f64],
    u: &[f64],
) -> Result<f64, CurvatureError> {
    if u_base.len() != t.num_primal() || u.len() != t.num_primal() {
        return Err(CurvatureError::DimensionMismatch { expected: t.num_primal(), got: u.len().max(u_base.len()) });
    }
    // both endpoints must be admissible; the domain is convex
    PatternState::from_u(geometry, u_base.to_vec())?;
    PatternState::from_u(geometry, u.to_vec())?;
    let dir: Vec<f64> = u.iter().zip(u_base).map(|(a, b)| a - b).collect();
    if dir.iter().all(|d| *d == 0.0) {
        return Ok(0.0);
    }
    let rule = GaussLegendre::new(QUAD_NODES).expect("16-node rule");
    let failure = RefCell::new(None);
    let integrand = |s: f64| -> f64 {
        let point: Vec<f64> = u_base.iter().zip(&dir).map(|(b, d)| b + s * d).collect();
        match PatternState::from_u(geometry, point).and_then(|st| curvatures(t, &st)) {
            Ok(k) => k.iter().zip(&dir).map(|(ki, di)| ki * di).sum(),
            Err(e) => {
                failure.borrow_mut().get_or_insert(e);
                f64::NAN
            }
        }
    };
    let composite = |panels: usize| -> f64 {
        let h = 1.0 / panels as f64;
        (0..panels).map(|p| rule.integrate(p as f64 * h, (p + 1) as f64 * h, &integrand)).sum()
    };
    let mut panels = 1;
    let mut prev = composite(panels);
    loop {
        panels *= 2;
        let next = composite(panels);
        if let Some(e) = failure.borrow_mut().take() {
            return Err(e);
        }
        let change = (next - prev).abs();
        if change < QUAD_TOL {
            return Ok(next);
        }
        if panels >= QUAD_MAX_PANELS || !change.is_finite() {
            return Err(CurvatureError::QuadratureNonConvergence { last_change: change });
        }
        prev = next;
    }
}
