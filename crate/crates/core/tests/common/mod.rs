#![allow(dead_code)]

use std::path::PathBuf;

use ideal_patterns::complex::{triangulate, CellComplex, Triangulation, Weight};
use ideal_patterns::curvature::curvatures;
use ideal_patterns::{fixtures, Geometry, PatternState};
use nalgebra::DMatrix;
use rand::Rng;

pub fn fixture_path(name: &str) -> PathBuf {
    PathBuf::from(env!("CARGO_MANIFEST_DIR")).join("fixtures").join(format!("{name}.json"))
}

pub struct Named {
    pub name: &'static str,
    pub complex: CellComplex,
    pub tri: Triangulation,
}

fn named(name: &'static str, complex: CellComplex) -> Named {
    let tri = triangulate(&complex).expect("fixture triangulates");
    Named { name, complex, tri }
}

pub fn torus() -> Named {
    named("torus", fixtures::square_torus())
}

pub fn octagon() -> Named {
    named("octagon", fixtures::genus2_octagon())
}

pub fn cube() -> Named {
    named("cube", fixtures::cube(Weight::pi_fraction(1, 2)))
}

/// Genus 2, five vertices; satisfies the subset inequality.
pub fn genus2_five() -> Named {
    named("genus2-5v", fixtures::subdivided_polygon(2, &[2, 2, 2, 2]))
}

pub fn random_radii(rng: &mut impl Rng, n: usize, lo: f64, hi: f64) -> Vec<f64> {
    (0..n).map(|_| rng.gen_range(lo..hi)).collect()
}

/// Radii drawn log-uniformly from `[0.1, 3]` (hyperbolic) or `[0.1, 10]`
/// (Euclidean).
pub fn random_state(rng: &mut impl Rng, geometry: Geometry, n: usize) -> PatternState {
    let hi: f64 = match geometry {
        Geometry::Hyperbolic => 3.0,
        Geometry::Euclidean => 10.0,
    };
    let (a, b) = (0.1f64.ln(), hi.ln());
    let r = (0..n).map(|_| rng.gen_range(a..b).exp()).collect();
    PatternState::from_radii(geometry, r).unwrap()
}

/// Central differences of `K(u)` with step `h` in every u-coordinate.
pub fn fd_jacobian(tri: &Triangulation, s: &PatternState, h: f64) -> DMatrix<f64> {
    let n = s.len();
    let mut m = DMatrix::zeros(n, n);
    for j in 0..n {
        let shifted = |d: f64| {
            let mut u = s.u().to_vec();
            u[j] += d;
            curvatures(tri, &PatternState::from_u(s.geometry(), u).unwrap()).unwrap()
        };
        let (kp, km) = (shifted(h), shifted(-h));
        for i in 0..n {
            m[(i, j)] = (kp[i] - km[i]) / (2.0 * h);
        }
    }
    m
}

pub fn max_abs(v: impl IntoIterator<Item = f64>) -> f64 {
    v.into_iter().map(f64::abs).fold(0.0, f64::max)
}

/// Largest increase between consecutive recorded energies.
pub fn max_energy_increase(energies: &[f64]) -> f64 {
    energies.windows(2).map(|w| w[1] - w[0]).fold(f64::NEG_INFINITY, f64::max)
}
