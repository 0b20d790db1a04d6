//! Weighted cellular decompositions of closed oriented surfaces.
//!
//! A [`CellComplex`] is stored as a combinatorial map: every face is a cyclic
//! sequence of directed edge references, so one-vertex gluings (loops, an edge
//! traversed twice by the same face) are representable. [`triangulate`] adds
//! one star vertex per face and records every (vertex, edge, face) corner of
//! the resulting triangulation.

use std::collections::VecDeque;
use std::f64::consts::PI;
use std::fmt;

use num_rational::Rational64;
use thiserror::Error;

/// Tolerance for the per-face angle-sum check when every weight on the face
/// was given as an exact rational multiple of pi.
pub const STAR_TOL_EXACT: f64 = 1e-12;
/// Tolerance for the per-face angle-sum check on floating-point weights.
pub const STAR_TOL_FLOAT: f64 = 1e-9;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum ComplexError {
    #[error("vertex index {vertex} out of range (complex has {num_vertices} vertices)")]
    VertexOutOfRange { vertex: usize, num_vertices: usize },
    #[error("face {face} references unknown edge {edge}")]
    EdgeOutOfRange { face: usize, edge: usize },
    #[error("face {face} is empty")]
    EmptyFace { face: usize },
    #[error("edge {edge} is used {count} times by the faces; a closed surface needs exactly 2")]
    EdgeUsedOnceOrThrice { edge: usize, count: usize },
    #[error("face {face} is not a closed walk: slot {slot} does not start where the previous edge ends")]
    BrokenFaceWalk { face: usize, slot: usize },
    #[error("complex is disconnected (vertex {vertex} is unreachable from vertex 0)")]
    DisconnectedComplex { vertex: usize },
    #[error("complex is not orientable")]
    NonOrientable,
    #[error("weight {theta} on edge {edge} is outside the open interval (0, pi)")]
    WeightOutOfRange { edge: usize, theta: f64 },
    #[error("complex has no vertices")]
    Empty,
    #[error("face {face} violates the ideal angle-sum condition (residual {residual:e})")]
    StarConditionViolated { face: usize, residual: f64 },
}

/// An intersection-angle weight in radians. Weights parsed from `"p/q pi"`
/// keep their exact rational coefficient.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Weight {
    radians: f64,
    pi_multiple: Option<Rational64>,
}

impl Weight {
    pub fn radians(theta: f64) -> Self {
        Self { radians: theta, pi_multiple: None }
    }

    /// `numer/denom * pi`, kept exactly.
    pub fn pi_fraction(numer: i64, denom: i64) -> Self {
        let q = Rational64::new(numer, denom);
        Self { radians: *q.numer() as f64 / *q.denom() as f64 * PI, pi_multiple: Some(q) }
    }

    pub fn value(&self) -> f64 {
        self.radians
    }

    pub fn pi_multiple(&self) -> Option<Rational64> {
        self.pi_multiple
    }
}

/// One slot of a face boundary: an edge traversed forward (`ends[0] -> ends[1]`)
/// or backward.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub struct DirectedEdge {
    pub edge: usize,
    pub forward: bool,
}

impl DirectedEdge {
    pub fn fwd(edge: usize) -> Self {
        Self { edge, forward: true }
    }

    pub fn rev(edge: usize) -> Self {
        Self { edge, forward: false }
    }

    fn reversed(self) -> Self {
        Self { edge: self.edge, forward: !self.forward }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Edge {
    pub ends: [usize; 2],
    pub weight: Weight,
}

impl Edge {
    pub fn theta(&self) -> f64 {
        self.weight.value()
    }

    pub fn is_loop(&self) -> bool {
        self.ends[0] == self.ends[1]
    }
}

/// Validated weighted cellular decomposition of a closed oriented surface.
///
/// Faces are coherently oriented after construction: every edge is traversed
/// once in each direction.
#[derive(Debug, Clone, PartialEq)]
pub struct CellComplex {
    num_vertices: usize,
    edges: Vec<Edge>,
    faces: Vec<Vec<DirectedEdge>>,
}

impl CellComplex {
    pub fn num_vertices(&self) -> usize {
        self.num_vertices
    }

    pub fn num_edges(&self) -> usize {
        self.edges.len()
    }

    pub fn num_faces(&self) -> usize {
        self.faces.len()
    }

    pub fn edges(&self) -> &[Edge] {
        &self.edges
    }

    pub fn faces(&self) -> &[Vec<DirectedEdge>] {
        &self.faces
    }

    /// Tail and head vertex of a directed edge slot.
    pub fn endpoints(&self, d: DirectedEdge) -> (usize, usize) {
        let [a, b] = self.edges[d.edge].ends;
        if d.forward {
            (a, b)
        } else {
            (b, a)
        }
    }

    /// Genus of the (orientable) surface, from `chi = 2 - 2g`.
    pub fn genus(&self) -> i64 {
        (2 - euler_characteristic(self)) / 2
    }
}

/// Validate raw combinatorial data and build a [`CellComplex`].
pub fn build_complex(
    num_vertices: usize,
    edges: Vec<Edge>,
    faces: Vec<Vec<DirectedEdge>>,
) -> Result<CellComplex, ComplexError> {
    if num_vertices == 0 {
        return Err(ComplexError::Empty);
    }
    for (k, e) in edges.iter().enumerate() {
        for &v in &e.ends {
            if v >= num_vertices {
                return Err(ComplexError::VertexOutOfRange { vertex: v, num_vertices });
            }
        }
        let theta = e.theta();
        if !(theta > 0.0 && theta < PI) {
            return Err(ComplexError::WeightOutOfRange { edge: k, theta });
        }
    }

    // (face, slot) uses per edge
    let mut uses: Vec<Vec<(usize, DirectedEdge)>> = vec![Vec::new(); edges.len()];
    for (f, face) in faces.iter().enumerate() {
        if face.is_empty() {
            return Err(ComplexError::EmptyFace { face: f });
        }
        for d in face {
            if d.edge >= edges.len() {
                return Err(ComplexError::EdgeOutOfRange { face: f, edge: d.edge });
            }
            uses[d.edge].push((f, *d));
        }
    }
    for (e, u) in uses.iter().enumerate() {
        if u.len() != 2 {
            return Err(ComplexError::EdgeUsedOnceOrThrice { edge: e, count: u.len() });
        }
    }

    let endpoints = |d: DirectedEdge| {
        let [a, b] = edges[d.edge].ends;
        if d.forward {
            (a, b)
        } else {
            (b, a)
        }
    };
    for (f, face) in faces.iter().enumerate() {
        let m = face.len();
        for s in 0..m {
            let (_, head) = endpoints(face[s]);
            let (tail, _) = endpoints(face[(s + 1) % m]);
            if head != tail {
                return Err(ComplexError::BrokenFaceWalk { face: f, slot: (s + 1) % m });
            }
        }
    }

    // Connectivity through the 1-skeleton; every vertex must carry an edge.
    let mut adjacency = vec![Vec::new(); num_vertices];
    for e in &edges {
        adjacency[e.ends[0]].push(e.ends[1]);
        adjacency[e.ends[1]].push(e.ends[0]);
    }
    let mut seen = vec![false; num_vertices];
    let mut queue = VecDeque::from([0usize]);
    seen[0] = true;
    while let Some(v) = queue.pop_front() {
        for &w in &adjacency[v] {
            if !seen[w] {
                seen[w] = true;
                queue.push_back(w);
            }
        }
    }
    if let Some(v) = seen.iter().position(|s| !s) {
        return Err(ComplexError::DisconnectedComplex { vertex: v });
    }

    let flips = orient_faces(faces.len(), &uses)?;
    let faces = faces
        .into_iter()
        .zip(flips)
        .map(|(face, flip)| if flip { face.into_iter().rev().map(DirectedEdge::reversed).collect() } else { face })
        .collect();

    Ok(CellComplex { num_vertices, edges, faces })
}

/// Two-colour the faces so that each edge ends up traversed once in each
/// direction. Returns, per face, whether it must be reversed.
fn orient_faces(num_faces: usize, uses: &[Vec<(usize, DirectedEdge)>]) -> Result<Vec<bool>, ComplexError> {
    // (neighbour face, must_differ)
    let mut links: Vec<Vec<(usize, bool)>> = vec![Vec::new(); num_faces];
    for u in uses {
        let (f, a) = u[0];
        let (g, b) = u[1];
        let differ = a.forward == b.forward;
        if f == g {
            if differ {
                return Err(ComplexError::NonOrientable);
            }
            continue;
        }
        links[f].push((g, differ));
        links[g].push((f, differ));
    }
    let mut flip: Vec<Option<bool>> = vec![None; num_faces];
    for start in 0..num_faces {
        if flip[start].is_some() {
            continue;
        }
        flip[start] = Some(false);
        let mut queue = VecDeque::from([start]);
        while let Some(f) = queue.pop_front() {
            let cf = flip[f].unwrap();
            for &(g, differ) in &links[f] {
                let want = cf ^ differ;
                match flip[g] {
                    None => {
                        flip[g] = Some(want);
                        queue.push_back(g);
                    }
                    Some(c) if c != want => return Err(ComplexError::NonOrientable),
                    Some(_) => {}
                }
            }
        }
    }
    Ok(flip.into_iter().map(|c| c.unwrap_or(false)).collect())
}

pub fn euler_characteristic(c: &CellComplex) -> i64 {
    c.num_vertices as i64 - c.edges.len() as i64 + c.faces.len() as i64
}

/// Angle-sum verdict for one face.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct FaceStar {
    pub face: usize,
    /// Number of boundary slots, counted with multiplicity.
    pub slots: usize,
    /// `|sum of weights - (m - 2) pi|`.
    pub residual: f64,
    pub exact: bool,
    pub pass: bool,
}

#[derive(Debug, Clone, PartialEq)]
pub struct StarReport {
    pub faces: Vec<FaceStar>,
}

impl StarReport {
    pub fn all_pass(&self) -> bool {
        self.faces.iter().all(|f| f.pass)
    }

    pub fn failures(&self) -> impl Iterator<Item = &FaceStar> {
        self.faces.iter().filter(|f| !f.pass)
    }
}

/// Check the ideal angle-sum condition on every face with the default
/// tolerances.
pub fn check_star(c: &CellComplex) -> StarReport {
    check_star_with(c, None)
}

/// Check the ideal angle-sum condition. `tol` overrides both default
/// tolerances when given.
///
/// Faces whose weights are all exact multiples of pi are summed in rational
/// arithmetic, so their residual is either exactly zero or a nonzero multiple
/// of pi.
pub fn check_star_with(c: &CellComplex, tol: Option<f64>) -> StarReport {
    let faces = c
        .faces
        .iter()
        .enumerate()
        .map(|(f, face)| {
            let m = face.len();
            let exact_sum: Option<Rational64> =
                face.iter().map(|d| c.edges[d.edge].weight.pi_multiple()).sum::<Option<Rational64>>();
            let (residual, exact) = match exact_sum {
                Some(s) => {
                    let diff = s - Rational64::from_integer(m as i64 - 2);
                    let diff = (*diff.numer() as f64 / *diff.denom() as f64).abs();
                    (diff * PI, true)
                }
                None => {
                    let sum: f64 = face.iter().map(|d| c.edges[d.edge].theta()).sum();
                    ((sum - (m as f64 - 2.0) * PI).abs(), false)
                }
            };
            let tol = tol.unwrap_or(if exact { STAR_TOL_EXACT } else { STAR_TOL_FLOAT });
            FaceStar { face: f, slots: m, residual, exact, pass: residual <= tol }
        })
        .collect();
    StarReport { faces }
}

/// A corner of the triangulation: the angle at primal vertex `vertex` in the
/// triangle spanned by `edge` and the star vertex of `face`.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct Corner {
    pub vertex: usize,
    /// The other endpoint of the edge (equal to `vertex` on loops).
    pub other: usize,
    pub edge: usize,
    pub face: usize,
}

/// One triangle `(tail, head, star)` per face slot.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct Slot {
    pub tail: usize,
    pub head: usize,
    pub edge: usize,
    pub face: usize,
}

/// The triangulation obtained by coning every face to a star vertex.
#[derive(Debug, Clone)]
pub struct Triangulation {
    complex: CellComplex,
    corners: Vec<Corner>,
    slots: Vec<Slot>,
    star_cone_angles: Vec<f64>,
}

impl Triangulation {
    pub fn complex(&self) -> &CellComplex {
        &self.complex
    }

    pub fn num_primal(&self) -> usize {
        self.complex.num_vertices
    }

    /// Star vertices are indexed by face.
    pub fn num_star(&self) -> usize {
        self.complex.faces.len()
    }

    pub fn corners(&self) -> &[Corner] {
        &self.corners
    }

    pub fn slots(&self) -> &[Slot] {
        &self.slots
    }

    pub fn star_cone_angles(&self) -> &[f64] {
        &self.star_cone_angles
    }

    pub fn theta(&self, edge: usize) -> f64 {
        self.complex.edges[edge].theta()
    }

    /// Number of corners incident to each primal vertex.
    pub fn corner_degrees(&self) -> Vec<usize> {
        let mut deg = vec![0; self.num_primal()];
        for c in &self.corners {
            deg[c.vertex] += 1;
        }
        deg
    }
}

pub fn triangulate(c: &CellComplex) -> Result<Triangulation, ComplexError> {
    if let Some(bad) = check_star(c).failures().next() {
        return Err(ComplexError::StarConditionViolated { face: bad.face, residual: bad.residual });
    }
    let mut corners = Vec::with_capacity(4 * c.edges.len());
    let mut slots = Vec::with_capacity(2 * c.edges.len());
    let mut star_cone_angles = Vec::with_capacity(c.faces.len());
    for (f, face) in c.faces.iter().enumerate() {
        let mut cone = 0.0;
        for d in face {
            let (tail, head) = c.endpoints(*d);
            slots.push(Slot { tail, head, edge: d.edge, face: f });
            corners.push(Corner { vertex: tail, other: head, edge: d.edge, face: f });
            corners.push(Corner { vertex: head, other: tail, edge: d.edge, face: f });
            cone += PI - c.edges[d.edge].theta();
        }
        star_cone_angles.push(cone);
    }
    Ok(Triangulation { complex: c.clone(), corners, slots, star_cone_angles })
}

impl fmt::Display for CellComplex {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(
            f,
            "|V|={} |E|={} |F|={} chi={} genus={}",
            self.num_vertices,
            self.edges.len(),
            self.faces.len(),
            euler_characteristic(self),
            self.genus()
        )
    }
}
