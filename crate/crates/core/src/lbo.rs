//! Discrete Laplace-Beltrami operator: cotangent stiffness, lumped
//! (optionally curvature-weighted) mass, and the smallest eigenpairs of
//! `L phi = lambda A phi`.
//!
//! Boundaries get the natural (Neumann) condition of the weak form; there
//! are no constraint rows.

use nalgebra::{DMatrix, DVector};
use rayon::prelude::*;

use crate::curvature::{barycentric_areas, MetricWeights};
use crate::error::{Error, Result};
use crate::linalg::{self, KrylovOptions, KrylovProblem, Which};
use crate::mesh::Mesh;
use crate::sparse::{CsrMatrix, EnvelopeCholesky};

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum OperatorKind {
    Stiffness,
    Mass,
}

#[derive(Debug, Clone)]
pub struct SparseSymmetricOperator {
    kind: OperatorKind,
    matrix: CsrMatrix,
    diagonal: Vec<f64>,
}

impl SparseSymmetricOperator {
    pub fn kind(&self) -> OperatorKind {
        self.kind
    }

    pub fn dim(&self) -> usize {
        self.matrix.dim()
    }

    pub fn matrix(&self) -> &CsrMatrix {
        &self.matrix
    }

    pub fn diagonal(&self) -> &[f64] {
        &self.diagonal
    }

    pub fn trace(&self) -> f64 {
        self.diagonal.iter().sum()
    }

    pub fn quadratic_form(&self, x: &[f64]) -> f64 {
        self.matrix.quadratic_form(x)
    }

    pub fn apply(&self, x: &DVector<f64>) -> DVector<f64> {
        self.matrix.mul_vec(x)
    }

    pub fn apply_block(&self, x: &DMatrix<f64>) -> DMatrix<f64> {
        match self.kind {
            OperatorKind::Mass => DMatrix::from_fn(x.nrows(), x.ncols(), |r, c| self.diagonal[r] * x[(r, c)]),
            OperatorKind::Stiffness => self.matrix.mul_dense(x),
        }
    }

    pub fn to_dense(&self) -> DMatrix<f64> {
        self.matrix.to_dense()
    }

    /// Builds a lumped mass operator from its diagonal.
    pub fn lumped_mass(diagonal: Vec<f64>) -> Self {
        SparseSymmetricOperator {
            kind: OperatorKind::Mass,
            matrix: CsrMatrix::from_diagonal(&diagonal),
            diagonal,
        }
    }
}

/// Cotangent stiffness: `L_uv = -(cot a + cot b) / 2` on edges, rows sum to zero.
pub fn assemble_stiffness(mesh: &Mesh) -> SparseSymmetricOperator {
    let p = mesh.vertices();
    let mut trip = Vec::with_capacity(mesh.face_count() * 12);
    for f in mesh.faces() {
        for corner in 0..3 {
            let c = f[corner];
            let a = f[(corner + 1) % 3];
            let b = f[(corner + 2) % 3];
            let u = p[a] - p[c];
            let v = p[b] - p[c];
            let half_cot = 0.5 * u.dot(&v) / u.cross(&v).norm();
            trip.push((a, b, -half_cot));
            trip.push((b, a, -half_cot));
            trip.push((a, a, half_cot));
            trip.push((b, b, half_cot));
        }
    }
    let matrix = CsrMatrix::from_triplets(mesh.vertex_count(), &trip);
    let diagonal = matrix.diagonal();
    SparseSymmetricOperator {
        kind: OperatorKind::Stiffness,
        matrix,
        diagonal,
    }
}

/// Lumped mass `A_vv = area_v * |K_v|^alpha` (floored), the vertex area
/// under the interpolated pseudometric. `alpha = 0` is the plain lumped mass.
pub fn assemble_mass(mesh: &Mesh, weights: &MetricWeights) -> Result<SparseSymmetricOperator> {
    let areas = barycentric_areas(mesh);
    if weights.len() != areas.len() {
        return Err(Error::mismatch(areas.len(), weights.len()));
    }
    let diagonal = areas
        .iter()
        .enumerate()
        .map(|(v, a)| a * weights.area_factor(v))
        .collect();
    Ok(SparseSymmetricOperator::lumped_mass(diagonal))
}

/// Plain lumped mass of the regular metric.
pub fn regular_mass(mesh: &Mesh) -> SparseSymmetricOperator {
    SparseSymmetricOperator::lumped_mass(barycentric_areas(mesh))
}

/// The k smallest eigenpairs of `L phi = lambda A phi`, A-orthonormal.
#[derive(Debug, Clone)]
pub struct SpectralBasis {
    pub eigenvalues: Vec<f64>,
    /// n x k, one eigenvector per column.
    pub eigenvectors: DMatrix<f64>,
    /// Diagonal of the mass operator the basis is orthonormal in.
    pub mass: Vec<f64>,
}

impl SpectralBasis {
    pub fn len(&self) -> usize {
        self.eigenvalues.len()
    }

    pub fn is_empty(&self) -> bool {
        self.eigenvalues.is_empty()
    }

    pub fn vertex_count(&self) -> usize {
        self.eigenvectors.nrows()
    }

    pub fn eigenvector(&self, i: usize) -> DVector<f64> {
        self.eigenvectors.column(i).into_owned()
    }

    /// The first `k` pairs as a new basis.
    pub fn truncated(&self, k: usize) -> SpectralBasis {
        let k = k.min(self.len());
        SpectralBasis {
            eigenvalues: self.eigenvalues[..k].to_vec(),
            eigenvectors: self.eigenvectors.columns(0, k).into_owned(),
            mass: self.mass.clone(),
        }
    }

    /// Max entry of `|Phi^T A Phi - I|`.
    pub fn orthonormality_defect(&self) -> f64 {
        let g = linalg::weighted_gram(Some(&self.mass), &self.eigenvectors, &self.eigenvectors);
        (g - DMatrix::identity(self.len(), self.len())).amax()
    }

    /// `|L phi_i - lambda_i A phi_i| / |A phi_i|` per pair.
    pub fn residuals(&self, stiffness: &SparseSymmetricOperator) -> Vec<f64> {
        (0..self.len())
            .map(|i| {
                let phi = self.eigenvector(i);
                let aphi = DVector::from_fn(phi.len(), |r, _| self.mass[r] * phi[r]);
                let r = stiffness.apply(&phi) - &aphi * self.eigenvalues[i];
                r.norm() / aphi.norm()
            })
            .collect()
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum EigenMethod {
    /// Shift-invert block Krylov unless the block would cover the whole space.
    Auto,
    ShiftInvert,
    Dense,
}

#[derive(Debug, Clone)]
pub struct EigenOptions {
    pub method: EigenMethod,
    /// Relative residual tolerance.
    pub tol: f64,
    /// Restart-cycle cap.
    pub max_iterations: usize,
    /// Block size; `None` means `k + 8`.
    pub block: Option<usize>,
    /// Krylov blocks generated per cycle.
    pub steps: usize,
    pub seed: u64,
}

impl Default for EigenOptions {
    fn default() -> Self {
        EigenOptions {
            method: EigenMethod::Auto,
            tol: 1e-9,
            max_iterations: 300,
            block: None,
            steps: 5,
            seed: 0x5eed,
        }
    }
}

pub fn smallest_eigenpairs(
    stiffness: &SparseSymmetricOperator,
    mass: &SparseSymmetricOperator,
    k: usize,
) -> Result<SpectralBasis> {
    smallest_eigenpairs_with(stiffness, mass, k, &EigenOptions::default())
}

pub fn smallest_eigenpairs_with(
    stiffness: &SparseSymmetricOperator,
    mass: &SparseSymmetricOperator,
    k: usize,
    opts: &EigenOptions,
) -> Result<SpectralBasis> {
    let n = stiffness.dim();
    if mass.dim() != n {
        return Err(Error::mismatch(n, mass.dim()));
    }
    if k == 0 || k > n {
        return Err(Error::InvalidCount {
            count: k,
            expected: format!("1..={n}"),
        });
    }
    let block = opts.block.unwrap_or(k + 8).max(k);
    let dense = match opts.method {
        EigenMethod::Dense => true,
        EigenMethod::ShiftInvert => false,
        EigenMethod::Auto => block >= n,
    };
    let mut basis = if dense {
        dense_eigenpairs(stiffness, mass, k)?
    } else {
        shift_invert(stiffness, mass, k, block, opts)?
    };
    linalg::normalize_signs(&mut basis.eigenvectors);
    Ok(basis)
}

fn shift_invert(
    stiffness: &SparseSymmetricOperator,
    mass: &SparseSymmetricOperator,
    k: usize,
    block: usize,
    opts: &EigenOptions,
) -> Result<SpectralBasis> {
    let n = stiffness.dim();
    let a = mass.diagonal();
    let sigma = -1e-8 * stiffness.trace() / n as f64;
    let shifted = stiffness.matrix().add_diagonal(-sigma, a);
    let factor = EnvelopeCholesky::factor(&shifted)?;

    let expand = |x: &DMatrix<f64>| {
        let mut y = DMatrix::from_fn(n, x.ncols(), |r, c| a[r] * x[(r, c)]);
        y.as_mut_slice()
            .par_chunks_mut(n)
            .for_each(|col| factor.solve_in_place(col));
        y
    };
    let target = |x: &DMatrix<f64>| stiffness.apply_block(x);
    let problem = KrylovProblem {
        n,
        wanted: k,
        which: Which::Smallest,
        weight: Some(a),
        expand: &expand,
        target: &target,
        start: Some(DMatrix::from_element(n, 1, 1.0)),
    };
    let krylov = KrylovOptions {
        block,
        steps: opts.steps,
        max_cycles: opts.max_iterations,
        tol: opts.tol,
        seed: opts.seed,
    };
    let out = linalg::block_krylov(&problem, &krylov)?;
    Ok(SpectralBasis {
        eigenvalues: out.values,
        eigenvectors: out.vectors,
        mass: a.to_vec(),
    })
}

/// Dense reference solver through `A^{-1/2} L A^{-1/2}`.
pub fn dense_eigenpairs(
    stiffness: &SparseSymmetricOperator,
    mass: &SparseSymmetricOperator,
    k: usize,
) -> Result<SpectralBasis> {
    let n = stiffness.dim();
    if mass.dim() != n {
        return Err(Error::mismatch(n, mass.dim()));
    }
    if k == 0 || k > n {
        return Err(Error::InvalidCount {
            count: k,
            expected: format!("1..={n}"),
        });
    }
    let inv_sqrt: Vec<f64> = mass.diagonal().iter().map(|a| 1.0 / a.sqrt()).collect();
    let mut m = stiffness.to_dense();
    for r in 0..n {
        for c in 0..n {
            m[(r, c)] *= inv_sqrt[r] * inv_sqrt[c];
        }
    }
    let (values, vectors) = linalg::symmetric_eigen_ascending(m);
    let mut eigenvectors = DMatrix::from_fn(n, k, |r, c| inv_sqrt[r] * vectors[(r, c)]);
    linalg::normalize_signs(&mut eigenvectors);
    Ok(SpectralBasis {
        eigenvalues: values[..k].to_vec(),
        eigenvectors,
        mass: mass.diagonal().to_vec(),
    })
}
