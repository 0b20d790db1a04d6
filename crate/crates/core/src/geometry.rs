//! Two-circle configurations.
//!
//! Circles of radii `r_i`, `r_j` centred at vertices `i`, `j` meet at a point
//! `p` with exterior intersection angle `theta`. The triangle `(i, j, p)` has
//! sides `r_i`, `r_j` at `p` enclosing the angle `pi - theta`, and third side
//! `l_ij`.
//!
//! All quantities are evaluated through the pair
//!
//! ```text
//! Y = S(r_j) sin(theta)
//! X = S'(r_j) S(r_i) + S(r_j) S'(r_i) cos(theta)      (hyperbolic: S = sinh)
//! X = r_i + r_j cos(theta)                              (Euclidean)
//! ```
//!
//! with `theta_i = atan2(Y, X)` and `|(X, Y)| = sinh(l)` (resp. `l`), which
//! avoids the cancellation of `arccos`/`arcosh` near the degenerate limits.

use std::f64::consts::PI;

use serde::{Deserialize, Serialize};
use thiserror::Error;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Geometry {
    Euclidean,
    Hyperbolic,
}

#[derive(Debug, Error, Clone, PartialEq)]
pub enum GeometryError {
    #[error("{0} is only defined in {1:?} background geometry")]
    GeometryMismatch(&'static str, Geometry),
    #[error("invalid two-circle configuration: r_i={r_i}, r_j={r_j}, theta={theta}")]
    InvalidConfig { r_i: f64, r_j: f64, theta: f64 },
}

/// Which end of the configuration an angle is measured at.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum At {
    I,
    J,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TwoCircleConfig {
    pub geometry: Geometry,
    pub r_i: f64,
    pub r_j: f64,
    pub theta: f64,
}

impl TwoCircleConfig {
    pub fn new(geometry: Geometry, r_i: f64, r_j: f64, theta: f64) -> Result<Self, GeometryError> {
        let ok = r_i > 0.0 && r_j > 0.0 && r_i.is_finite() && r_j.is_finite() && theta > 0.0 && theta < PI;
        if !ok {
            return Err(GeometryError::InvalidConfig { r_i, r_j, theta });
        }
        Ok(Self { geometry, r_i, r_j, theta })
    }

    pub fn euclidean(r_i: f64, r_j: f64, theta: f64) -> Self {
        Self::new(Geometry::Euclidean, r_i, r_j, theta).expect("valid Euclidean configuration")
    }

    pub fn hyperbolic(r_i: f64, r_j: f64, theta: f64) -> Self {
        Self::new(Geometry::Hyperbolic, r_i, r_j, theta).expect("valid hyperbolic configuration")
    }

    /// The same configuration seen from `j`.
    pub fn swapped(&self) -> Self {
        Self { r_i: self.r_j, r_j: self.r_i, ..*self }
    }

    fn xy(&self) -> (f64, f64) {
        let (s, c) = self.theta.sin_cos();
        match self.geometry {
            Geometry::Euclidean => (self.r_i + self.r_j * c, self.r_j * s),
            Geometry::Hyperbolic => {
                // cosh r_j sinh r_i + sinh r_j cosh r_i cos(theta), without the
                // cancellation between the two large terms as theta -> pi
                let (cos2, sin2) = self.half_angle_squares();
                let x = (self.r_i + self.r_j).sinh() * cos2 + (self.r_i - self.r_j).sinh() * sin2;
                (x, self.r_j.sinh() * s)
            }
        }
    }

    /// `(cos^2(theta/2), sin^2(theta/2))`.
    fn half_angle_squares(&self) -> (f64, f64) {
        let (s, c) = (self.theta / 2.0).sin_cos();
        (c * c, s * s)
    }

    /// `sinh(l)` (hyperbolic) or `l` (Euclidean).
    fn sine_length(&self) -> f64 {
        let (x, y) = self.xy();
        x.hypot(y)
    }

    fn cosh_length(&self) -> f64 {
        let (cos2, sin2) = self.half_angle_squares();
        (self.r_i + self.r_j).cosh() * cos2 + (self.r_i - self.r_j).cosh() * sin2
    }
}

pub fn edge_length(cfg: &TwoCircleConfig) -> f64 {
    match cfg.geometry {
        Geometry::Euclidean => cfg.sine_length(),
        Geometry::Hyperbolic => cfg.sine_length().asinh(),
    }
}

pub fn inner_angle(cfg: &TwoCircleConfig, at: At) -> f64 {
    let cfg = match at {
        At::I => *cfg,
        At::J => cfg.swapped(),
    };
    let (x, y) = cfg.xy();
    y.atan2(x)
}

/// Area of the hyperbolic triangle `(i, j, p)`, equal to the angle defect
/// `theta - theta_i - theta_j`.
///
/// Evaluated as `2 atan(t sin(theta) / (1 + t cos(theta)))` with
/// `t = tanh(r_i/2) tanh(r_j/2)`, which stays accurate as the triangle
/// shrinks.
pub fn triangle_area_hyp(cfg: &TwoCircleConfig) -> Result<f64, GeometryError> {
    if cfg.geometry != Geometry::Hyperbolic {
        return Err(GeometryError::GeometryMismatch("triangle area", cfg.geometry));
    }
    let t = (cfg.r_i / 2.0).tanh() * (cfg.r_j / 2.0).tanh();
    let (s, c) = cfg.theta.sin_cos();
    Ok(2.0 * (t * s).atan2(1.0 + t * c))
}

/// Radius derivatives of both inner angles.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct AnglePartials {
    pub di_dri: f64,
    pub di_drj: f64,
    pub dj_dri: f64,
    pub dj_drj: f64,
}

/// Closed-form radius derivatives of `theta_i` and `theta_j`.
///
/// Hyperbolic: `d theta_i/d r_j = sin(theta) sinh(r_i) / sinh^2(l)` and
/// `d theta_i/d r_i = -sin(theta) sinh(r_j) cosh(l) / sinh^2(l)`.
/// Euclidean: the same with `sinh -> identity`, `cosh(l) -> 1`.
pub fn angle_partials(cfg: &TwoCircleConfig) -> AnglePartials {
    let s = cfg.theta.sin();
    let sl2 = {
        let sl = cfg.sine_length();
        sl * sl
    };
    match cfg.geometry {
        Geometry::Euclidean => AnglePartials {
            di_dri: -cfg.r_j * s / sl2,
            di_drj: cfg.r_i * s / sl2,
            dj_dri: cfg.r_j * s / sl2,
            dj_drj: -cfg.r_i * s / sl2,
        },
        Geometry::Hyperbolic => {
            let (sh_i, sh_j) = (cfg.r_i.sinh(), cfg.r_j.sinh());
            let ch_l = cfg.cosh_length();
            AnglePartials {
                di_dri: -s * sh_j * ch_l / sl2,
                di_drj: s * sh_i / sl2,
                dj_dri: s * sh_j / sl2,
                dj_drj: -s * sh_i * ch_l / sl2,
            }
        }
    }
}

/// Derivatives of `theta_i` with respect to the `u`-coordinates
/// (`u = ln tanh(r/2)` hyperbolic, `u = ln r` Euclidean).
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct UPartials {
    /// `d theta_i / d u_j = d theta_j / d u_i`, always positive.
    pub cross: f64,
    /// `d theta_i / d u_i`.
    pub own_i: f64,
    /// `d theta_j / d u_j`.
    pub own_j: f64,
}

pub fn angle_partials_u(cfg: &TwoCircleConfig) -> UPartials {
    let s = cfg.theta.sin();
    let sl = cfg.sine_length();
    match cfg.geometry {
        Geometry::Euclidean => {
            let w = cfg.r_i * cfg.r_j * s / (sl * sl);
            UPartials { cross: w, own_i: -w, own_j: -w }
        }
        Geometry::Hyperbolic => {
            let w = s * cfg.r_i.sinh() * cfg.r_j.sinh() / (sl * sl);
            let ch_l = cfg.cosh_length();
            UPartials { cross: w, own_i: -w * ch_l, own_j: -w * ch_l }
        }
    }
}

/// `omega_ij = d_ij / l_ij = r_i r_j sin(theta) / l^2`, where `d_ij` is the
/// distance from the intersection point to the line through both centres.
pub fn omega(cfg: &TwoCircleConfig) -> Result<f64, GeometryError> {
    if cfg.geometry != Geometry::Euclidean {
        return Err(GeometryError::GeometryMismatch("omega", cfg.geometry));
    }
    Ok(angle_partials_u(cfg).cross)
}

/// `d Area / d u_i = sinh(r_i) d(theta - theta_i - theta_j)/d r_i`
/// `= sin(theta) sinh(r_i) sinh(r_j) / (1 + cosh(l))`.
pub fn area_partial_u(cfg: &TwoCircleConfig) -> Result<f64, GeometryError> {
    if cfg.geometry != Geometry::Hyperbolic {
        return Err(GeometryError::GeometryMismatch("area derivative", cfg.geometry));
    }
    let s = cfg.theta.sin();
    Ok(s * cfg.r_i.sinh() * cfg.r_j.sinh() / (1.0 + cfg.cosh_length()))
}
