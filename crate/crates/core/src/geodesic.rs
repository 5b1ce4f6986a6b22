//! Geodesic distance fields.
//!
//! Distances are shortest paths on the edge graph with Euclidean edge
//! lengths. The optional refinement then relaxes every vertex through its
//! incident triangles by planar unfolding, the update used by fast marching,
//! and only ever lowers a distance.

use std::cmp::{Ordering, Reverse};
use std::collections::BinaryHeap;

use nalgebra::DMatrix;
use rayon::prelude::*;

use crate::error::{Error, Result};
use crate::mesh::Mesh;
use crate::sampling::SampleSet;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub struct GeodesicOptions {
    /// Run triangle-unfolding relaxation after Dijkstra.
    pub refine: bool,
}

#[derive(Debug, Clone, Copy, PartialEq)]
struct Key(f64);

impl Eq for Key {}

impl PartialOrd for Key {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

impl Ord for Key {
    fn cmp(&self, other: &Self) -> Ordering {
        self.0.total_cmp(&other.0)
    }
}

fn check_source(mesh: &Mesh, source: usize) -> Result<()> {
    if source >= mesh.vertex_count() {
        return Err(Error::InvalidCount {
            count: source,
            expected: format!("a vertex index below {}", mesh.vertex_count()),
        });
    }
    Ok(())
}

fn dijkstra(mesh: &Mesh, source: usize) -> Vec<f64> {
    let p = mesh.vertices();
    let mut dist = vec![f64::INFINITY; mesh.vertex_count()];
    let mut heap = BinaryHeap::new();
    dist[source] = 0.0;
    heap.push(Reverse((Key(0.0), source)));
    while let Some(Reverse((Key(d), u))) = heap.pop() {
        if d > dist[u] {
            continue;
        }
        for &v in mesh.neighbors(u) {
            let nd = d + (p[v] - p[u]).norm();
            if nd < dist[v] {
                dist[v] = nd;
                heap.push(Reverse((Key(nd), v)));
            }
        }
    }
    dist
}

/// Distance at `c` seen from a virtual planar source that sits `da` from `a`
/// and `db` from `b` on the far side of edge `ab`. `None` when the straight
/// path does not cross the edge.
fn unfold(a: &[f64; 3], b: &[f64; 3], c: &[f64; 3], da: f64, db: f64) -> Option<f64> {
    let sub = |x: &[f64; 3], y: &[f64; 3]| [x[0] - y[0], x[1] - y[1], x[2] - y[2]];
    let dot = |x: [f64; 3], y: [f64; 3]| x[0] * y[0] + x[1] * y[1] + x[2] * y[2];
    let ab = sub(b, a);
    let ac = sub(c, a);
    let e2 = dot(ab, ab);
    let e = e2.sqrt();
    let cx = dot(ac, ab) / e;
    let cy = (dot(ac, ac) - cx * cx).max(0.0).sqrt();
    let sx = (da * da - db * db + e2) / (2.0 * e);
    let sy2 = da * da - sx * sx;
    if sy2 < 0.0 || cy <= 0.0 {
        return None;
    }
    let sy = -sy2.sqrt();
    let t = -sy / (cy - sy);
    let cross = sx + t * (cx - sx);
    if !(0.0..=e).contains(&cross) {
        return None;
    }
    Some(((cx - sx).powi(2) + (cy - sy).powi(2)).sqrt())
}

fn refine(mesh: &Mesh, dist: &mut [f64]) {
    const MAX_POPS_PER_VERTEX: usize = 64;
    let n = mesh.vertex_count();
    let mut incident: Vec<Vec<usize>> = vec![Vec::new(); n];
    for (fi, f) in mesh.faces().iter().enumerate() {
        for &v in f {
            incident[v].push(fi);
        }
    }
    let coords: Vec<[f64; 3]> = mesh.vertices().iter().map(|p| [p.x, p.y, p.z]).collect();
    let mut heap: BinaryHeap<_> = (0..n).map(|v| Reverse((Key(dist[v]), v))).collect();
    let mut pops = 0usize;
    while let Some(Reverse((Key(d), u))) = heap.pop() {
        if d > dist[u] {
            continue;
        }
        pops += 1;
        if pops > MAX_POPS_PER_VERTEX * n {
            log::warn!("geodesic refinement stopped at its relaxation cap");
            break;
        }
        for &fi in &incident[u] {
            let f = mesh.faces()[fi];
            let k = f.iter().position(|&v| v == u).unwrap_or(0);
            let (v, w) = (f[(k + 1) % 3], f[(k + 2) % 3]);
            for (other, target) in [(v, w), (w, v)] {
                if let Some(cand) = unfold(&coords[u], &coords[other], &coords[target], dist[u], dist[other]) {
                    if cand < dist[target] * (1.0 - 1e-12) {
                        dist[target] = cand;
                        heap.push(Reverse((Key(cand), target)));
                    }
                }
            }
        }
    }
}

/// Distances from `source` to every vertex.
pub fn distance_field(mesh: &Mesh, source: usize, opts: &GeodesicOptions) -> Result<Vec<f64>> {
    check_source(mesh, source)?;
    let mut dist = dijkstra(mesh, source);
    if let Some(v) = dist.iter().position(|d| !d.is_finite()) {
        return Err(Error::DisconnectedMesh(v));
    }
    if opts.refine {
        refine(mesh, &mut dist);
    }
    Ok(dist)
}

/// Distance rows from a set of sample vertices.
#[derive(Debug, Clone)]
pub struct DistanceFieldSet {
    pub sources: SampleSet,
    /// `p x n`; row `i` is the field of `sources.indices[i]`.
    pub fields: DMatrix<f64>,
}

impl DistanceFieldSet {
    pub fn sample_count(&self) -> usize {
        self.fields.nrows()
    }

    pub fn vertex_count(&self) -> usize {
        self.fields.ncols()
    }

    /// The `p x p` block between samples.
    pub fn sample_block(&self) -> DMatrix<f64> {
        let idx = &self.sources.indices;
        DMatrix::from_fn(idx.len(), idx.len(), |i, j| self.fields[(i, idx[j])])
    }

    pub fn max_distance(&self) -> f64 {
        self.fields.iter().copied().fold(0.0, f64::max)
    }
}

pub fn distance_rows(mesh: &Mesh, samples: &SampleSet, opts: &GeodesicOptions) -> Result<DistanceFieldSet> {
    let rows: Vec<Vec<f64>> = samples
        .indices
        .par_iter()
        .map(|&s| distance_field(mesh, s, opts))
        .collect::<Result<_>>()?;
    let fields = DMatrix::from_fn(rows.len(), mesh.vertex_count(), |i, j| rows[i][j]);
    Ok(DistanceFieldSet {
        sources: samples.clone(),
        fields,
    })
}

/// All-pairs distances, for reference runs of classical scaling.
pub fn all_pairs(mesh: &Mesh, opts: &GeodesicOptions) -> Result<DMatrix<f64>> {
    let everything = SampleSet::explicit((0..mesh.vertex_count()).collect(), mesh.vertex_count())?;
    Ok(distance_rows(mesh, &everything, opts)?.fields)
}
