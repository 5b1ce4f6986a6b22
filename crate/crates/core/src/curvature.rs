//! Angle-defect Gaussian curvature and curvature-weighted pseudometrics.
//!
//! The interpolated pseudometric multiplies the surface metric by a
//! conformal factor `|K|^alpha`. In two dimensions a conformal factor leaves
//! the Dirichlet form untouched and rescales only the area element, so the
//! whole change is carried by [`MetricWeights::area_factor`], which
//! [`crate::lbo::assemble_mass`] applies to the lumped vertex areas.

use std::f64::consts::{FRAC_PI_2, PI};

use crate::error::{Error, Result};
use crate::mesh::{corner_angle, Mesh};

pub const DEFAULT_EPSILON: f64 = 1e-8;

/// Per-vertex Gaussian curvature with the mixed Voronoi areas it was
/// normalised by.
#[derive(Debug, Clone)]
pub struct CurvatureField {
    pub values: Vec<f64>,
    pub vertex_areas: Vec<f64>,
    /// Angle defect per vertex (`values[v] * vertex_areas[v]`, computed directly).
    pub angle_defects: Vec<f64>,
}

impl CurvatureField {
    pub fn total_area(&self) -> f64 {
        self.vertex_areas.iter().sum()
    }

    /// `sum_v K_v * area_v`; equals `2 pi chi` on any mesh by construction.
    pub fn total_curvature(&self) -> f64 {
        self.angle_defects.iter().sum()
    }
}

/// One third of the incident face areas at every vertex.
pub fn barycentric_areas(mesh: &Mesh) -> Vec<f64> {
    let mut areas = vec![0.0; mesh.vertex_count()];
    for (fi, f) in mesh.faces().iter().enumerate() {
        let third = mesh.face_area(fi) / 3.0;
        for &v in f {
            areas[v] += third;
        }
    }
    areas
}

/// Mixed Voronoi vertex areas: the circumcentric cell inside non-obtuse
/// triangles, and the half/quarter split of obtuse ones. They partition the
/// surface like the barycentric areas but, unlike those, give pointwise
/// convergent curvature at irregular-valence vertices.
pub fn mixed_areas(mesh: &Mesh) -> Vec<f64> {
    let p = mesh.vertices();
    let mut areas = vec![0.0; mesh.vertex_count()];
    for (fi, f) in mesh.faces().iter().enumerate() {
        let area = mesh.face_area(fi);
        let angles = [
            corner_angle(&p[f[0]], &p[f[1]], &p[f[2]]),
            corner_angle(&p[f[1]], &p[f[2]], &p[f[0]]),
            corner_angle(&p[f[2]], &p[f[0]], &p[f[1]]),
        ];
        match angles.iter().position(|&t| t > FRAC_PI_2) {
            Some(obtuse) => {
                for (i, &v) in f.iter().enumerate() {
                    areas[v] += if i == obtuse { area / 2.0 } else { area / 4.0 };
                }
            }
            None => {
                for i in 0..3 {
                    let (a, b, c) = (f[i], f[(i + 1) % 3], f[(i + 2) % 3]);
                    let cot_b = 1.0 / angles[(i + 1) % 3].tan();
                    let cot_c = 1.0 / angles[(i + 2) % 3].tan();
                    areas[a] += ((p[b] - p[a]).norm_squared() * cot_c + (p[c] - p[a]).norm_squared() * cot_b) / 8.0;
                }
            }
        }
    }
    areas
}

/// Angle-defect curvature: `(2 pi - sum theta) / area` at interior vertices
/// and `(pi - sum theta) / area` on the boundary, over [`mixed_areas`].
pub fn gaussian_curvature(mesh: &Mesh) -> CurvatureField {
    let n = mesh.vertex_count();
    let mut angle_sum = vec![0.0; n];
    let p = mesh.vertices();
    for &[a, b, c] in mesh.faces() {
        angle_sum[a] += corner_angle(&p[a], &p[b], &p[c]);
        angle_sum[b] += corner_angle(&p[b], &p[c], &p[a]);
        angle_sum[c] += corner_angle(&p[c], &p[a], &p[b]);
    }
    let vertex_areas = mixed_areas(mesh);
    let angle_defects: Vec<f64> = (0..n)
        .map(|v| {
            let full = if mesh.is_boundary(v) { PI } else { 2.0 * PI };
            full - angle_sum[v]
        })
        .collect();
    let values = angle_defects
        .iter()
        .zip(&vertex_areas)
        .map(|(d, a)| if *a > 0.0 { d / a } else { 0.0 })
        .collect();
    CurvatureField {
        values,
        vertex_areas,
        angle_defects,
    }
}

/// Conformal weights of the pseudometric `|K|^alpha g`.
#[derive(Debug, Clone)]
pub struct MetricWeights {
    pub alpha: f64,
    pub epsilon: f64,
    /// `s^2 = total_area / (4 pi)`, the area scale used to make `|K|` dimensionless.
    pub area_scale: f64,
    /// Dimensionless weights `max(|K_v| s^2, epsilon)^alpha`.
    pub weights: Vec<f64>,
}

impl MetricWeights {
    /// The regular metric: every weight one.
    pub fn uniform(n: usize) -> Self {
        MetricWeights {
            alpha: 0.0,
            epsilon: DEFAULT_EPSILON,
            area_scale: 1.0,
            weights: vec![1.0; n],
        }
    }

    pub fn len(&self) -> usize {
        self.weights.len()
    }

    pub fn is_empty(&self) -> bool {
        self.weights.is_empty()
    }

    /// Dimensional area-element factor `max(|K_v|, epsilon / s^2)^alpha`.
    ///
    /// This is `weights[v] / s^(2 alpha)`. At `alpha = 1` the weighted vertex
    /// area becomes the (floored) angle defect and no longer depends on the
    /// size of the mesh.
    pub fn area_factor(&self, v: usize) -> f64 {
        self.weights[v] / self.area_scale.powf(self.alpha)
    }
}

pub fn metric_weights(curv: &CurvatureField, alpha: f64, epsilon: f64) -> Result<MetricWeights> {
    if !(0.0..=1.0).contains(&alpha) {
        return Err(Error::InvalidAlpha(alpha));
    }
    if !(epsilon > 0.0 && epsilon.is_finite()) {
        return Err(Error::InvalidEpsilon(epsilon));
    }
    let area_scale = curv.total_area() / (4.0 * PI);
    let weights = curv
        .values
        .iter()
        .map(|k| (k.abs() * area_scale).max(epsilon).powf(alpha))
        .collect();
    Ok(MetricWeights {
        alpha,
        epsilon,
        area_scale,
        weights,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::mesh::shapes;
    use proptest::prelude::*;

    #[test]
    fn flat_grid_interior_is_flat() {
        let mesh = shapes::unit_square(8);
        let curv = gaussian_curvature(&mesh);
        for v in 0..mesh.vertex_count() {
            if !mesh.is_boundary(v) {
                assert!(curv.values[v].abs() < 1e-10, "K = {}", curv.values[v]);
            }
        }
    }

    #[test]
    fn tetrahedron_angle_defect_is_pi() {
        for edge in [1.0, 0.3, 7.0] {
            let curv = gaussian_curvature(&shapes::tetrahedron(edge));
            for d in &curv.angle_defects {
                assert!((d - PI).abs() < 1e-12);
            }
            for (k, a) in curv.values.iter().zip(&curv.vertex_areas) {
                assert!((k * a - PI).abs() < 1e-12);
            }
        }
    }

    #[test]
    fn icosphere_curvature_close_to_one() {
        let curv = gaussian_curvature(&shapes::icosphere(4));
        let worst = curv.values.iter().map(|k| (k - 1.0).abs()).fold(0.0, f64::max);
        assert!(worst < 0.02, "worst deviation {worst}");
    }

    #[test]
    fn mixed_areas_partition_the_surface() {
        for mesh in [
            shapes::icosphere(3),
            shapes::unit_square(7),
            shapes::perturbed_sphere(2, 0.4, 2),
        ] {
            let total: f64 = mixed_areas(&mesh).iter().sum();
            assert!((total / mesh.total_area() - 1.0).abs() < 1e-12);
        }
    }

    #[test]
    fn alpha_zero_gives_unit_weights() {
        let curv = gaussian_curvature(&shapes::perturbed_sphere(2, 0.3, 5));
        let w = metric_weights(&curv, 0.0, 1e-8).unwrap();
        assert!(w.weights.iter().all(|&x| x == 1.0));
    }

    #[test]
    fn alpha_one_unit_sphere_weights_near_one() {
        let curv = gaussian_curvature(&shapes::icosphere(4));
        let w = metric_weights(&curv, 1.0, 1e-8).unwrap();
        assert!(w.weights.iter().all(|&x| (x - 1.0).abs() < 0.03));
    }

    #[test]
    fn invalid_parameters() {
        let curv = gaussian_curvature(&shapes::icosahedron());
        assert!(matches!(metric_weights(&curv, 1.5, 1e-8), Err(Error::InvalidAlpha(_))));
        assert!(matches!(
            metric_weights(&curv, f64::NAN, 1e-8),
            Err(Error::InvalidAlpha(_))
        ));
        assert!(matches!(metric_weights(&curv, 0.5, 0.0), Err(Error::InvalidEpsilon(_))));
        assert!(matches!(
            metric_weights(&curv, 0.5, f64::INFINITY),
            Err(Error::InvalidEpsilon(_))
        ));
    }

    #[test]
    fn epsilon_floor_keeps_flat_weights_positive() {
        let curv = gaussian_curvature(&shapes::unit_square(6));
        let w = metric_weights(&curv, 1.0, 1e-8).unwrap();
        assert!(w.weights.iter().all(|&x| x >= 1e-8));
    }

    proptest! {
        #[test]
        fn scaling_covariance(c in 0.05f64..20.0, alpha in 0.0f64..=1.0, seed in 0u64..50) {
            let mesh = shapes::perturbed_sphere(2, 0.25, seed);
            let base = gaussian_curvature(&mesh);
            let scaled = gaussian_curvature(&mesh.scaled(c));
            for v in 0..mesh.vertex_count() {
                let rk = scaled.values[v] * c * c / base.values[v];
                prop_assert!((rk - 1.0).abs() < 1e-9);
                let ra = scaled.vertex_areas[v] / (c * c * base.vertex_areas[v]);
                prop_assert!((ra - 1.0).abs() < 1e-12);
            }
            let w0 = metric_weights(&base, alpha, 1e-8).unwrap();
            let w1 = metric_weights(&scaled, alpha, 1e-8).unwrap();
            for (a, b) in w0.weights.iter().zip(&w1.weights) {
                prop_assert!((a - b).abs() <= 1e-10 * a.abs().max(1.0));
            }
        }

        #[test]
        fn gauss_bonnet_closed(seed in 0u64..100, amp in 0.0f64..0.4) {
            let mesh = shapes::perturbed_sphere(2, amp, seed);
            let curv = gaussian_curvature(&mesh);
            let chi = mesh.euler_characteristic() as f64;
            let rel = (curv.total_curvature() - 2.0 * PI * chi).abs() / (2.0 * PI * chi).abs();
            prop_assert!(rel < 1e-8);
        }
    }

    #[test]
    fn gauss_bonnet_with_boundary() {
        // boundary defects (pi - theta) carry the geodesic curvature term
        let mesh = shapes::grid(5, 7, 2.0, 3.0);
        let curv = gaussian_curvature(&mesh);
        assert!((curv.total_curvature() - 2.0 * PI).abs() < 1e-10);
    }
}
