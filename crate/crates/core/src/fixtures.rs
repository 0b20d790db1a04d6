//! Bundled test complexes and a seeded generator of one-face surfaces.

use std::collections::HashMap;

use rand::rngs::StdRng;
use rand::{Rng, SeedableRng};

use crate::complex::{build_complex, CellComplex, DirectedEdge, Edge, Weight};

/// Build a complex on a simple graph from faces given as vertex cycles.
/// Every edge gets the same weight.
pub fn from_vertex_cycles(num_vertices: usize, cycles: &[Vec<usize>], weight: Weight) -> CellComplex {
    let mut ids: HashMap<(usize, usize), usize> = HashMap::new();
    let mut edges = Vec::new();
    let mut faces = Vec::with_capacity(cycles.len());
    for cycle in cycles {
        let m = cycle.len();
        let face = (0..m)
            .map(|k| {
                let (a, b) = (cycle[k], cycle[(k + 1) % m]);
                let key = (a.min(b), a.max(b));
                let id = *ids.entry(key).or_insert_with(|| {
                    edges.push(Edge { ends: [key.0, key.1], weight });
                    edges.len() - 1
                });
                DirectedEdge { edge: id, forward: a == key.0 }
            })
            .collect();
        faces.push(face);
    }
    build_complex(num_vertices, edges, faces).expect("fixture cycles form a closed surface")
}

/// One vertex, loops a and b, face `a b a^-1 b^-1`, both weights pi/2.
pub fn square_torus() -> CellComplex {
    one_face_word(1, &[1, 2, -1, -2], &[Weight::pi_fraction(1, 2); 2])
}

/// One vertex, four loops, face `a b a^-1 b^-1 c d c^-1 d^-1`, all weights 3pi/4.
pub fn genus2_octagon() -> CellComplex {
    one_face_word(1, &[1, 2, -1, -2, 3, 4, -3, -4], &[Weight::pi_fraction(3, 4); 4])
}

/// Cube graph on the sphere with the given weight on every edge.
pub fn cube(weight: Weight) -> CellComplex {
    // vertex id = x + 2y + 4z
    let cycles = vec![
        vec![0, 2, 3, 1],
        vec![4, 5, 7, 6],
        vec![0, 1, 5, 4],
        vec![2, 6, 7, 3],
        vec![0, 4, 6, 2],
        vec![1, 3, 7, 5],
    ];
    from_vertex_cycles(8, &cycles, weight)
}

/// Tetrahedron on the sphere with the given weight on every edge.
pub fn tetrahedron(weight: Weight) -> CellComplex {
    let cycles = vec![vec![0, 1, 2], vec![0, 3, 1], vec![1, 3, 2], vec![0, 2, 3]];
    from_vertex_cycles(4, &cycles, weight)
}

/// Single face given by a signed word in loop letters at vertex 0
/// (`k` forward, `-k` backward, letters numbered from 1).
fn one_face_word(num_vertices: usize, word: &[i64], weights: &[Weight]) -> CellComplex {
    let edges = weights.iter().map(|&w| Edge { ends: [0, 0], weight: w }).collect();
    let face = word.iter().map(|&s| DirectedEdge { edge: s.unsigned_abs() as usize - 1, forward: s > 0 }).collect();
    build_complex(num_vertices, edges, vec![face]).expect("fixture word forms a closed surface")
}

/// Genus-`genus` surface from the standard `4g`-gon word, with letter `x`
/// subdivided into `pieces[x]` edges. All weights are `(m - 2)/m * pi` where
/// `m` is the number of boundary slots, so the single face satisfies the
/// ideal angle-sum condition exactly.
pub fn subdivided_polygon(genus: usize, pieces: &[usize]) -> CellComplex {
    assert!(genus >= 1);
    assert_eq!(pieces.len(), 2 * genus);
    assert!(pieces.iter().all(|&k| k >= 1));
    let mut edges = Vec::new();
    let mut num_vertices = 1;
    // per letter: list of edge ids along the letter's forward direction
    let mut letters: Vec<Vec<usize>> = Vec::with_capacity(pieces.len());
    let m: usize = 2 * pieces.iter().sum::<usize>();
    let weight = Weight::pi_fraction(m as i64 - 2, m as i64);
    for &k in pieces {
        let mut path = Vec::with_capacity(k);
        let mut prev = 0;
        for step in 0..k {
            let next = if step + 1 == k {
                0
            } else {
                num_vertices += 1;
                num_vertices - 1
            };
            edges.push(Edge { ends: [prev, next], weight });
            path.push(edges.len() - 1);
            prev = next;
        }
        letters.push(path);
    }
    let mut face = Vec::with_capacity(m);
    for g in 0..genus {
        let (a, b) = (&letters[2 * g], &letters[2 * g + 1]);
        face.extend(a.iter().map(|&e| DirectedEdge::fwd(e)));
        face.extend(b.iter().map(|&e| DirectedEdge::fwd(e)));
        face.extend(a.iter().rev().map(|&e| DirectedEdge::rev(e)));
        face.extend(b.iter().rev().map(|&e| DirectedEdge::rev(e)));
    }
    build_complex(num_vertices, edges, vec![face]).expect("subdivided polygon is a closed surface")
}

/// Seeded random one-face surface of the given genus with `num_vertices`
/// vertices. Extra vertices are spread over the letters at random and the
/// weights are perturbed in pairs by exact multiples of pi so that the face
/// still satisfies the ideal angle-sum condition exactly.
pub fn random_one_face_surface(genus: usize, num_vertices: usize, seed: u64) -> CellComplex {
    assert!(num_vertices >= 1);
    let mut rng = StdRng::seed_from_u64(seed);
    let mut pieces = vec![1usize; 2 * genus];
    for _ in 1..num_vertices {
        let k = rng.gen_range(0..pieces.len());
        pieces[k] += 1;
    }
    let base = subdivided_polygon(genus, &pieces);
    let m = 2 * base.num_edges() as i64;
    let mut numers: Vec<i64> = vec![4 * (m - 2); base.num_edges()];
    let denom = 4 * m;
    // keep each weight in [pi/2, pi) so the result stays in range
    for _ in 0..base.num_edges() {
        let i = rng.gen_range(0..numers.len());
        let j = rng.gen_range(0..numers.len());
        let delta = rng.gen_range(1..=3);
        if i != j && numers[i] + delta < denom && numers[j] - delta >= denom / 2 {
            numers[i] += delta;
            numers[j] -= delta;
        }
    }
    let edges = base
        .edges()
        .iter()
        .zip(&numers)
        .map(|(e, &n)| Edge { ends: e.ends, weight: Weight::pi_fraction(n, denom) })
        .collect();
    build_complex(base.num_vertices(), edges, base.faces().to_vec()).expect("perturbed weights keep the surface")
}
