//! Indexed triangle meshes.
//!
//! A [`Mesh`] is immutable once built. Construction filters degenerate faces
//! (repeated indices or zero area), rejects edges shared by more than two
//! faces, and precomputes the edge list, boundary flags and the vertex
//! adjacency used by the geodesic and sampling code.

mod io;
pub mod shapes;

use std::collections::HashMap;

use nalgebra::{Point3, Vector3};

use crate::error::{Error, Result};

pub use io::{load_mesh, parse_obj, parse_off, save_off, write_off, MeshFormat};

/// Relative area threshold below which a face counts as degenerate.
const SLIVER_TOLERANCE: f64 = 1e-12;

#[derive(Debug, Clone)]
pub struct Mesh {
    vertices: Vec<Point3<f64>>,
    faces: Vec<[usize; 3]>,
    boundary: Vec<bool>,
    edges: Vec<[usize; 2]>,
    // CSR adjacency: neighbours of v are adj_idx[adj_ptr[v]..adj_ptr[v + 1]]
    adj_ptr: Vec<usize>,
    adj_idx: Vec<usize>,
    dropped_faces: usize,
}

impl Mesh {
    /// Builds a mesh, dropping degenerate faces.
    ///
    /// Fails on out-of-range indices ([`Error::Parse`] with line 0), on edges
    /// bordering more than two faces and when no face survives filtering.
    pub fn new(vertices: Vec<Point3<f64>>, faces: Vec<[usize; 3]>) -> Result<Self> {
        let n = vertices.len();
        if let Some((f, &bad)) = faces
            .iter()
            .enumerate()
            .find_map(|(i, f)| f.iter().find(|&&v| v >= n).map(|v| (i, v)))
        {
            return Err(Error::Parse {
                line: 0,
                message: format!("face {f} references vertex {bad} but mesh has {n} vertices"),
            });
        }

        let total = faces.len();
        let faces: Vec<[usize; 3]> = faces.into_iter().filter(|f| !is_degenerate(&vertices, f)).collect();
        let dropped_faces = total - faces.len();
        if faces.is_empty() {
            return Err(Error::EmptyMesh);
        }

        let mut edge_faces: HashMap<[usize; 2], u32> = HashMap::with_capacity(faces.len() * 3 / 2);
        for f in &faces {
            for (a, b) in face_edges(f) {
                let count = edge_faces.entry(sorted_edge(a, b)).or_insert(0);
                *count += 1;
                if *count > 2 {
                    return Err(Error::NonManifold(a.min(b), a.max(b)));
                }
            }
        }

        let mut boundary = vec![false; n];
        let mut edges: Vec<[usize; 2]> = Vec::with_capacity(edge_faces.len());
        for (&e, &count) in &edge_faces {
            if count == 1 {
                boundary[e[0]] = true;
                boundary[e[1]] = true;
            }
            edges.push(e);
        }
        edges.sort_unstable();

        let mut degree = vec![0usize; n];
        for e in &edges {
            degree[e[0]] += 1;
            degree[e[1]] += 1;
        }
        let mut adj_ptr = vec![0usize; n + 1];
        for v in 0..n {
            adj_ptr[v + 1] = adj_ptr[v] + degree[v];
        }
        let mut fill = adj_ptr.clone();
        let mut adj_idx = vec![0usize; adj_ptr[n]];
        for e in &edges {
            adj_idx[fill[e[0]]] = e[1];
            fill[e[0]] += 1;
            adj_idx[fill[e[1]]] = e[0];
            fill[e[1]] += 1;
        }
        for v in 0..n {
            adj_idx[adj_ptr[v]..adj_ptr[v + 1]].sort_unstable();
        }

        Ok(Mesh {
            vertices,
            faces,
            boundary,
            edges,
            adj_ptr,
            adj_idx,
            dropped_faces,
        })
    }

    pub fn vertex_count(&self) -> usize {
        self.vertices.len()
    }

    pub fn face_count(&self) -> usize {
        self.faces.len()
    }

    pub fn vertices(&self) -> &[Point3<f64>] {
        &self.vertices
    }

    pub fn faces(&self) -> &[[usize; 3]] {
        &self.faces
    }

    /// Unique undirected edges, each stored as `[low, high]`, sorted.
    pub fn edges(&self) -> &[[usize; 2]] {
        &self.edges
    }

    pub fn boundary_flags(&self) -> &[bool] {
        &self.boundary
    }

    pub fn is_boundary(&self, v: usize) -> bool {
        self.boundary[v]
    }

    pub fn boundary_vertex_count(&self) -> usize {
        self.boundary.iter().filter(|&&b| b).count()
    }

    pub fn is_closed(&self) -> bool {
        !self.boundary.iter().any(|&b| b)
    }

    /// Faces removed during construction because they were degenerate.
    pub fn dropped_faces(&self) -> usize {
        self.dropped_faces
    }

    /// Sorted neighbours of `v` in the edge graph.
    pub fn neighbors(&self, v: usize) -> &[usize] {
        &self.adj_idx[self.adj_ptr[v]..self.adj_ptr[v + 1]]
    }

    pub fn edge_length(&self, a: usize, b: usize) -> f64 {
        (self.vertices[a] - self.vertices[b]).norm()
    }

    pub fn face_area(&self, f: usize) -> f64 {
        let [a, b, c] = self.faces[f];
        triangle_area(&self.vertices[a], &self.vertices[b], &self.vertices[c])
    }

    pub fn total_area(&self) -> f64 {
        (0..self.faces.len()).map(|f| self.face_area(f)).sum()
    }

    /// V - E + F.
    pub fn euler_characteristic(&self) -> i64 {
        self.vertices.len() as i64 - self.edges.len() as i64 + self.faces.len() as i64
    }

    /// Number of connected components of the edge graph, counting isolated
    /// vertices as their own components.
    pub fn component_count(&self) -> usize {
        let n = self.vertex_count();
        let mut seen = vec![false; n];
        let mut stack = Vec::new();
        let mut components = 0;
        for start in 0..n {
            if seen[start] {
                continue;
            }
            components += 1;
            seen[start] = true;
            stack.push(start);
            while let Some(v) = stack.pop() {
                for &w in self.neighbors(v) {
                    if !seen[w] {
                        seen[w] = true;
                        stack.push(w);
                    }
                }
            }
        }
        components
    }

    /// Copy of the mesh with every position multiplied by `factor`.
    pub fn scaled(&self, factor: f64) -> Mesh {
        let mut out = self.clone();
        for p in &mut out.vertices {
            *p = Point3::from(p.coords * factor);
        }
        out
    }

    /// Copy of the mesh with vertex `v` renamed to `perm[v]`.
    pub fn permuted(&self, perm: &[usize]) -> Result<Mesh> {
        let n = self.vertex_count();
        if perm.len() != n {
            return Err(Error::mismatch(n, perm.len()));
        }
        let mut vertices = vec![Point3::origin(); n];
        for (v, &p) in perm.iter().enumerate() {
            vertices[p] = self.vertices[v];
        }
        let faces = self
            .faces
            .iter()
            .map(|f| [perm[f[0]], perm[f[1]], perm[f[2]]])
            .collect();
        Mesh::new(vertices, faces)
    }

    /// Copy of the mesh with new positions and the same connectivity.
    pub fn with_positions(&self, positions: Vec<Point3<f64>>) -> Result<Mesh> {
        if positions.len() != self.vertex_count() {
            return Err(Error::mismatch(self.vertex_count(), positions.len()));
        }
        Mesh::new(positions, self.faces.clone())
    }

    /// Splits the vertex positions into x, y and z coordinate fields.
    pub fn coordinate_fields(&self) -> [Vec<f64>; 3] {
        let mut out = [Vec::new(), Vec::new(), Vec::new()];
        for p in &self.vertices {
            for (axis, field) in out.iter_mut().enumerate() {
                field.push(p[axis]);
            }
        }
        out
    }
}

pub(crate) fn face_edges(f: &[usize; 3]) -> [(usize, usize); 3] {
    [(f[0], f[1]), (f[1], f[2]), (f[2], f[0])]
}

fn sorted_edge(a: usize, b: usize) -> [usize; 2] {
    if a < b {
        [a, b]
    } else {
        [b, a]
    }
}

pub(crate) fn triangle_area(a: &Point3<f64>, b: &Point3<f64>, c: &Point3<f64>) -> f64 {
    0.5 * (b - a).cross(&(c - a)).norm()
}

/// Interior angle at `a` of the triangle (a, b, c).
pub(crate) fn corner_angle(a: &Point3<f64>, b: &Point3<f64>, c: &Point3<f64>) -> f64 {
    let u: Vector3<f64> = b - a;
    let v: Vector3<f64> = c - a;
    u.cross(&v).norm().atan2(u.dot(&v))
}

fn is_degenerate(vertices: &[Point3<f64>], f: &[usize; 3]) -> bool {
    if f[0] == f[1] || f[1] == f[2] || f[0] == f[2] {
        return true;
    }
    let (a, b, c) = (&vertices[f[0]], &vertices[f[1]], &vertices[f[2]]);
    let longest = (b - a)
        .norm_squared()
        .max((c - b).norm_squared())
        .max((a - c).norm_squared());
    let twice_area = (b - a).cross(&(c - a)).norm();
    twice_area.is_nan() || twice_area <= SLIVER_TOLERANCE * longest
}
