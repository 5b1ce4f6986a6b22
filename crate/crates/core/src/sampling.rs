//! Vertex sample sets and farthest point sampling.

use std::collections::HashSet;

use crate::error::{Error, Result};
use crate::geodesic::{distance_field, GeodesicOptions};
use crate::mesh::Mesh;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum SampleMethod {
    FarthestPoint,
    Explicit,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct SampleSet {
    pub indices: Vec<usize>,
    pub method: SampleMethod,
}

impl SampleSet {
    /// Validates a user-chosen set: indices distinct and below `vertex_count`.
    pub fn explicit(indices: Vec<usize>, vertex_count: usize) -> Result<Self> {
        let mut seen = HashSet::with_capacity(indices.len());
        for &i in &indices {
            if i >= vertex_count || !seen.insert(i) {
                return Err(Error::InvalidCount {
                    count: i,
                    expected: format!("distinct vertex indices below {vertex_count}"),
                });
            }
        }
        Ok(SampleSet {
            indices,
            method: SampleMethod::Explicit,
        })
    }

    pub fn len(&self) -> usize {
        self.indices.len()
    }

    pub fn is_empty(&self) -> bool {
        self.indices.is_empty()
    }
}

/// Greedy max-min sampling starting at `seed`. `dist(v)` must return the
/// distance field of vertex `v`. Ties go to the lowest vertex index.
pub fn farthest_point_sample<F>(mesh: &Mesh, p: usize, seed: usize, mut dist: F) -> Result<SampleSet>
where
    F: FnMut(usize) -> Result<Vec<f64>>,
{
    let n = mesh.vertex_count();
    if p == 0 || p > n {
        return Err(Error::InvalidCount {
            count: p,
            expected: format!("1..={n}"),
        });
    }
    if seed >= n {
        return Err(Error::InvalidCount {
            count: seed,
            expected: format!("a seed vertex below {n}"),
        });
    }
    let mut chosen = vec![false; n];
    let mut nearest = vec![f64::INFINITY; n];
    let mut indices = Vec::with_capacity(p);
    let mut next = seed;
    loop {
        indices.push(next);
        chosen[next] = true;
        if indices.len() == p {
            break;
        }
        let field = dist(next)?;
        if field.len() != n {
            return Err(Error::mismatch(n, field.len()));
        }
        for (m, d) in nearest.iter_mut().zip(&field) {
            *m = m.min(*d);
        }
        let mut best: Option<usize> = None;
        for v in (0..n).filter(|&v| !chosen[v]) {
            if best.is_none_or(|b| nearest[v] > nearest[b]) {
                best = Some(v);
            }
        }
        next = best.expect("p <= n leaves a candidate");
    }
    Ok(SampleSet {
        indices,
        method: SampleMethod::FarthestPoint,
    })
}

/// Farthest point sampling with geodesic distance fields as the oracle.
pub fn farthest_point_sample_geodesic(mesh: &Mesh, p: usize, seed: usize, opts: &GeodesicOptions) -> Result<SampleSet> {
    farthest_point_sample(mesh, p, seed, |v| distance_field(mesh, v, opts))
}

/// Largest distance from any vertex to its nearest sample, given the
/// sample rows of a distance matrix.
pub fn covering_radius<'a>(rows: impl IntoIterator<Item = &'a [f64]>) -> f64 {
    let mut nearest: Vec<f64> = Vec::new();
    for row in rows {
        if nearest.is_empty() {
            nearest = row.to_vec();
        } else {
            for (m, d) in nearest.iter_mut().zip(row) {
                *m = m.min(*d);
            }
        }
    }
    nearest.into_iter().fold(0.0, f64::max)
}
