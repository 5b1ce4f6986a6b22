//! Analytic fixture meshes.

use std::collections::HashMap;

use nalgebra::Point3;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use super::Mesh;

pub fn single_triangle() -> Mesh {
    Mesh::new(
        vec![
            Point3::new(0.0, 0.0, 0.0),
            Point3::new(1.0, 0.0, 0.0),
            Point3::new(0.0, 1.0, 0.0),
        ],
        vec![[0, 1, 2]],
    )
    .expect("valid triangle")
}

/// Regular tetrahedron with the given edge length, centred at the origin.
pub fn tetrahedron(edge: f64) -> Mesh {
    let s = edge / (2.0 * 2f64.sqrt());
    let vertices = [[1.0, 1.0, 1.0], [1.0, -1.0, -1.0], [-1.0, 1.0, -1.0], [-1.0, -1.0, 1.0]]
        .iter()
        .map(|p| Point3::new(p[0] * s, p[1] * s, p[2] * s))
        .collect();
    Mesh::new(vertices, vec![[0, 1, 2], [0, 3, 1], [0, 2, 3], [1, 3, 2]]).expect("valid tetrahedron")
}

fn icosahedron_raw() -> (Vec<Point3<f64>>, Vec<[usize; 3]>) {
    let t = (1.0 + 5f64.sqrt()) / 2.0;
    let raw = [
        [-1.0, t, 0.0],
        [1.0, t, 0.0],
        [-1.0, -t, 0.0],
        [1.0, -t, 0.0],
        [0.0, -1.0, t],
        [0.0, 1.0, t],
        [0.0, -1.0, -t],
        [0.0, 1.0, -t],
        [t, 0.0, -1.0],
        [t, 0.0, 1.0],
        [-t, 0.0, -1.0],
        [-t, 0.0, 1.0],
    ];
    let vertices = raw
        .iter()
        .map(|p| Point3::from(Point3::new(p[0], p[1], p[2]).coords.normalize()))
        .collect();
    let faces = vec![
        [0, 11, 5],
        [0, 5, 1],
        [0, 1, 7],
        [0, 7, 10],
        [0, 10, 11],
        [1, 5, 9],
        [5, 11, 4],
        [11, 10, 2],
        [10, 7, 6],
        [7, 1, 8],
        [3, 9, 4],
        [3, 4, 2],
        [3, 2, 6],
        [3, 6, 8],
        [3, 8, 9],
        [4, 9, 5],
        [2, 4, 11],
        [6, 2, 10],
        [8, 6, 7],
        [9, 8, 1],
    ];
    (vertices, faces)
}

/// Icosahedron inscribed in the unit sphere.
pub fn icosahedron() -> Mesh {
    let (v, f) = icosahedron_raw();
    Mesh::new(v, f).expect("valid icosahedron")
}

/// Unit icosphere: `subdivisions` rounds of 1-to-4 midpoint splitting of the
/// icosahedron, every vertex projected onto the sphere. Vertex count is
/// `10 * 4^s + 2` (12, 42, 162, 642, 2562, ...).
pub fn icosphere(subdivisions: u32) -> Mesh {
    let (mut vertices, mut faces) = icosahedron_raw();
    for _ in 0..subdivisions {
        let mut midpoints: HashMap<(usize, usize), usize> = HashMap::new();
        let mut next = Vec::with_capacity(faces.len() * 4);
        let mut midpoint = |a: usize, b: usize, vertices: &mut Vec<Point3<f64>>| {
            let key = (a.min(b), a.max(b));
            *midpoints.entry(key).or_insert_with(|| {
                let m = (vertices[a].coords + vertices[b].coords).normalize();
                vertices.push(Point3::from(m));
                vertices.len() - 1
            })
        };
        for [a, b, c] in faces {
            let ab = midpoint(a, b, &mut vertices);
            let bc = midpoint(b, c, &mut vertices);
            let ca = midpoint(c, a, &mut vertices);
            next.extend_from_slice(&[[a, ab, ca], [b, bc, ab], [c, ca, bc], [ab, bc, ca]]);
        }
        faces = next;
    }
    Mesh::new(vertices, faces).expect("valid icosphere")
}

/// Flat `width x height` rectangle in the z=0 plane, split into
/// `nx x ny` cells, each cut along the diagonal from its lower-left to its
/// upper-right corner. Vertex `(i, j)` has index `j * (nx + 1) + i`.
pub fn grid(nx: usize, ny: usize, width: f64, height: f64) -> Mesh {
    assert!(nx > 0 && ny > 0, "grid needs at least one cell per side");
    let mut vertices = Vec::with_capacity((nx + 1) * (ny + 1));
    for j in 0..=ny {
        for i in 0..=nx {
            vertices.push(Point3::new(
                width * i as f64 / nx as f64,
                height * j as f64 / ny as f64,
                0.0,
            ));
        }
    }
    let id = |i: usize, j: usize| j * (nx + 1) + i;
    let mut faces = Vec::with_capacity(2 * nx * ny);
    for j in 0..ny {
        for i in 0..nx {
            faces.push([id(i, j), id(i + 1, j), id(i + 1, j + 1)]);
            faces.push([id(i, j), id(i + 1, j + 1), id(i, j + 1)]);
        }
    }
    Mesh::new(vertices, faces).expect("valid grid")
}

/// Unit square grid with `cells` cells per side.
pub fn unit_square(cells: usize) -> Mesh {
    grid(cells, cells, 1.0, 1.0)
}

/// Icosphere with each vertex pushed radially by a uniform factor in
/// `[1 - amplitude, 1 + amplitude]`. Breaks the icosahedral symmetry so
/// spectra have no exact multiplicities.
pub fn perturbed_sphere(subdivisions: u32, amplitude: f64, seed: u64) -> Mesh {
    let base = icosphere(subdivisions);
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let positions = base
        .vertices()
        .iter()
        .map(|p| Point3::from(p.coords * (1.0 + amplitude * rng.random_range(-1.0..=1.0))))
        .collect();
    base.with_positions(positions)
        .expect("radial perturbation keeps faces valid")
}
