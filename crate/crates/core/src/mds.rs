//! Classical scaling and its spectral acceleration.
//!
//! Classical scaling embeds the double-centred squared distances
//! `B = -1/2 J D2 J` through their top eigenpairs. The spectral variant never
//! forms `D2`: it fits `D2 ~ Phi C Phi^T` from the distances between a few
//! samples, then solves the same eigenproblem on `k x k` matrices.

use std::time::{Duration, Instant};

use nalgebra::DMatrix;

use crate::error::{Error, Result};
use crate::geodesic::DistanceFieldSet;
use crate::lbo::SpectralBasis;
use crate::linalg;

/// Largest `n` accepted by [`classical_mds`].
pub const DEFAULT_DENSE_CAP: usize = 4000;

const SYMMETRY_TOLERANCE: f64 = 1e-9;
const FIT_TOLERANCE: f64 = 1e-10;
const FIT_MAX_ITERATIONS: usize = 50_000;

#[derive(Debug, Clone)]
pub struct EmbeddingResult {
    /// `n x m`, columns centred.
    pub coords: DMatrix<f64>,
    /// `k x m` with `coords = Phi * beta` (spectral path only).
    pub beta: Option<DMatrix<f64>>,
    /// Normalised stress against a reference distance matrix, when one was given.
    pub stress: Option<f64>,
    /// Kept eigenvalues, descending; negative ones are reported but embed as zero.
    pub eigenvalues: Vec<f64>,
    pub elapsed: Duration,
}

impl EmbeddingResult {
    pub fn dimension(&self) -> usize {
        self.coords.ncols()
    }

    pub fn with_stress(mut self, d: &DMatrix<f64>) -> Result<Self> {
        self.stress = Some(stress(&self.coords, d)?);
        Ok(self)
    }

    /// Pairwise Euclidean distances of the embedding.
    pub fn pairwise_distances(&self) -> DMatrix<f64> {
        pairwise_distances(&self.coords)
    }
}

/// Symmetric `k x k` coefficients of `D2 ~ Phi C Phi^T`.
#[derive(Debug, Clone, PartialEq)]
pub struct CoefficientMatrix {
    pub c: DMatrix<f64>,
    pub eta: f64,
    /// PCG iterations (zero for the direct `eta = 0` solve).
    pub iterations: usize,
}

impl CoefficientMatrix {
    pub fn dim(&self) -> usize {
        self.c.nrows()
    }

    /// `Phi C Phi^T`, the interpolated squared distance matrix.
    pub fn reconstruct(&self, basis: &SpectralBasis) -> Result<DMatrix<f64>> {
        let phi = leading(basis, self.dim())?;
        Ok(&phi * &self.c * phi.transpose())
    }
}

fn leading(basis: &SpectralBasis, k: usize) -> Result<DMatrix<f64>> {
    if k > basis.len() {
        return Err(Error::mismatch(k, basis.len()));
    }
    Ok(basis.eigenvectors.columns(0, k).into_owned())
}

pub fn pairwise_distances(x: &DMatrix<f64>) -> DMatrix<f64> {
    let n = x.nrows();
    DMatrix::from_fn(n, n, |i, j| (x.row(i) - x.row(j)).norm())
}

/// `sum (|x_i - x_j| - D_ij)^2 / sum D_ij^2` over all ordered pairs.
pub fn stress(x: &DMatrix<f64>, d: &DMatrix<f64>) -> Result<f64> {
    let n = x.nrows();
    if d.nrows() != n || d.ncols() != n {
        return Err(Error::mismatch(n, d.nrows()));
    }
    let (mut num, mut den) = (0.0, 0.0);
    for j in 0..n {
        for i in 0..n {
            let e = (x.row(i) - x.row(j)).norm() - d[(i, j)];
            num += e * e;
            den += d[(i, j)] * d[(i, j)];
        }
    }
    Ok(if den > 0.0 {
        num / den
    } else if num > 0.0 {
        f64::INFINITY
    } else {
        0.0
    })
}

/// Stress restricted to the sample rows of a distance field set.
pub fn sampled_stress(x: &DMatrix<f64>, fields: &DistanceFieldSet) -> Result<f64> {
    if fields.vertex_count() != x.nrows() {
        return Err(Error::mismatch(x.nrows(), fields.vertex_count()));
    }
    let (mut num, mut den) = (0.0, 0.0);
    for (r, &s) in fields.sources.indices.iter().enumerate() {
        for v in 0..x.nrows() {
            let d = fields.fields[(r, v)];
            let e = (x.row(s) - x.row(v)).norm() - d;
            num += e * e;
            den += d * d;
        }
    }
    Ok(if den > 0.0 { num / den } else { 0.0 })
}

fn check_distance_matrix(d: &DMatrix<f64>) -> Result<()> {
    if d.nrows() != d.ncols() {
        return Err(Error::mismatch(d.nrows(), d.ncols()));
    }
    let scale = d.amax().max(f64::MIN_POSITIVE);
    let n = d.nrows();
    let mut worst = 0.0f64;
    for i in 0..n {
        worst = worst.max(d[(i, i)].abs());
        for j in 0..i {
            worst = worst.max((d[(i, j)] - d[(j, i)]).abs());
        }
    }
    if worst > SYMMETRY_TOLERANCE * scale {
        return Err(Error::AsymmetricInput(worst));
    }
    Ok(())
}

fn double_centre(mut b: DMatrix<f64>) -> DMatrix<f64> {
    let n = b.nrows();
    let row_means: Vec<f64> = (0..n).map(|i| b.row(i).sum() / n as f64).collect();
    let grand = row_means.iter().sum::<f64>() / n as f64;
    // b is symmetric, so column means equal row means
    for j in 0..n {
        for i in 0..n {
            b[(i, j)] = -0.5 * (b[(i, j)] - row_means[i] - row_means[j] + grand);
        }
    }
    b
}

/// Top `m` eigenpairs of a symmetric matrix, descending, with vectors scaled
/// by the square root of the (clamped) eigenvalue.
fn top_scaled(h: DMatrix<f64>, m: usize) -> (Vec<f64>, DMatrix<f64>) {
    let (values, vectors) = linalg::symmetric_eigen_ascending(h);
    let n = values.len();
    let kept: Vec<f64> = (0..m).map(|i| values[n - 1 - i]).collect();
    let scaled = DMatrix::from_fn(vectors.nrows(), m, |r, c| {
        vectors[(r, n - 1 - c)] * kept[c].max(0.0).sqrt()
    });
    (kept, scaled)
}

fn check_dimension(m: usize, available: usize) -> Result<()> {
    if m == 0 || m > available {
        return Err(Error::InvalidCount {
            count: m,
            expected: format!("1..={available}"),
        });
    }
    Ok(())
}

pub fn classical_mds(d: &DMatrix<f64>, m: usize) -> Result<EmbeddingResult> {
    classical_mds_capped(d, m, DEFAULT_DENSE_CAP)
}

pub fn classical_mds_capped(d: &DMatrix<f64>, m: usize, cap: usize) -> Result<EmbeddingResult> {
    let start = Instant::now();
    let n = d.nrows();
    if n > cap {
        return Err(Error::TooLarge { size: n, cap });
    }
    check_distance_matrix(d)?;
    check_dimension(m, n)?;
    let b = double_centre(d.map(|x| x * x));
    let (eigenvalues, coords) = top_scaled(b, m);
    let elapsed = start.elapsed();
    Ok(EmbeddingResult {
        stress: Some(stress(&coords, d)?),
        coords,
        beta: None,
        eigenvalues,
        elapsed,
    })
}

/// Relative weight of the biharmonic penalty used by [`default_eta`].
pub const DEFAULT_ETA_RATIO: f64 = 0.1;

/// `0.1 * |Psi^T Psi|^2 / (2 lambda_k)^2`: the penalty on the highest mode pair
/// is a tenth of the largest data-term curvature. Invariant under mesh
/// scaling, since both factors scale as `length^-4`.
pub fn default_eta(fields: &DistanceFieldSet, basis: &SpectralBasis) -> Result<f64> {
    if fields.vertex_count() != basis.vertex_count() {
        return Err(Error::mismatch(basis.vertex_count(), fields.vertex_count()));
    }
    let psi = sampled_rows(fields, basis);
    let gram = psi.transpose() * &psi;
    let top = gram.symmetric_eigenvalues().max();
    let lambda_k = basis.eigenvalues.last().copied().unwrap_or(0.0);
    if lambda_k <= 0.0 {
        return Ok(0.0);
    }
    Ok(DEFAULT_ETA_RATIO * top * top / (4.0 * lambda_k * lambda_k))
}

fn sampled_rows(fields: &DistanceFieldSet, basis: &SpectralBasis) -> DMatrix<f64> {
    let idx = &fields.sources.indices;
    DMatrix::from_fn(idx.len(), basis.len(), |r, c| basis.eigenvectors[(idx[r], c)])
}

fn squared_sample_block(fields: &DistanceFieldSet) -> DMatrix<f64> {
    let block = fields.sample_block();
    let sym = (&block + block.transpose()) * 0.5;
    sym.map(|x| x * x)
}

/// Fits `C = argmin |Psi C Psi^T - D2pp|^2 + eta sum (lambda_i + lambda_j)^2 C_ij^2`
/// with `Psi` the sample rows of the basis.
///
/// `eta = 0` takes the minimum-norm least-squares solution through the
/// pseudo-inverse of `Psi`; otherwise the normal equations are solved by
/// Jacobi-preconditioned conjugate gradients.
pub fn fit_coefficients(fields: &DistanceFieldSet, basis: &SpectralBasis, eta: f64) -> Result<CoefficientMatrix> {
    let n = basis.vertex_count();
    if fields.vertex_count() != n {
        return Err(Error::mismatch(n, fields.vertex_count()));
    }
    if !(eta >= 0.0 && eta.is_finite()) {
        return Err(Error::NegativeMu(eta));
    }
    let k = basis.len();
    let p = fields.sample_count();
    if k > p * (p + 1) / 2 {
        log::warn!(
            "{k} coefficients per row exceed the {} independent sample constraints",
            p * (p + 1) / 2
        );
    }
    let psi = sampled_rows(fields, basis);
    let svd = psi.clone().svd(true, true);
    let smax = svd.singular_values.max();
    let rank_tol = 1e-10 * smax.max(f64::MIN_POSITIVE);
    let rank = svd.singular_values.iter().filter(|&&s| s > rank_tol).count();
    if rank < p.min(k) {
        return Err(Error::DegenerateSampling {
            rank,
            required: p.min(k),
        });
    }
    let target = squared_sample_block(fields);

    let (c, iterations) = if eta == 0.0 {
        let pinv = svd.pseudo_inverse(rank_tol).map_err(|_| Error::DegenerateSampling {
            rank,
            required: p.min(k),
        })?;
        (&pinv * &target * pinv.transpose(), 0)
    } else {
        fit_pcg(&psi, &target, &basis.eigenvalues, eta)?
    };
    let c = (&c + c.transpose()) * 0.5;
    Ok(CoefficientMatrix { c, eta, iterations })
}

fn fit_pcg(psi: &DMatrix<f64>, target: &DMatrix<f64>, lambda: &[f64], eta: f64) -> Result<(DMatrix<f64>, usize)> {
    let k = psi.ncols();
    let gram = psi.transpose() * psi;
    let penalty = DMatrix::from_fn(k, k, |i, j| eta * (lambda[i] + lambda[j]).powi(2));
    let apply = |c: &DMatrix<f64>| &gram * c * &gram + penalty.component_mul(c);
    let diag = DMatrix::from_fn(k, k, |i, j| gram[(i, i)] * gram[(j, j)] + penalty[(i, j)]);
    let precondition = |r: &DMatrix<f64>| r.component_div(&diag);

    let rhs = psi.transpose() * target * psi;
    let rhs_norm = rhs.norm();
    if rhs_norm == 0.0 {
        return Ok((DMatrix::zeros(k, k), 0));
    }
    let mut c = DMatrix::zeros(k, k);
    let mut r = rhs;
    let mut z = precondition(&r);
    let mut dir = z.clone();
    let mut rz = r.dot(&z);
    for it in 1..=FIT_MAX_ITERATIONS {
        let q = apply(&dir);
        let step = rz / dir.dot(&q);
        c += step * &dir;
        r -= step * &q;
        if r.norm() <= FIT_TOLERANCE * rhs_norm {
            return Ok((c, it));
        }
        z = precondition(&r);
        let rz_next = r.dot(&z);
        dir = &z + (rz_next / rz) * &dir;
        rz = rz_next;
    }
    Err(Error::ConvergenceFailure {
        iterations: FIT_MAX_ITERATIONS,
        residual: r.norm() / rhs_norm,
    })
}

/// Embeds `B = -1/2 J Phi C Phi^T J` in `m` dimensions without forming it.
///
/// With the thin QR factorisation `J Phi = Q R`, the nonzero spectrum of `B`
/// is that of the `k x k` matrix `-1/2 R C R^T`, and its eigenvectors map back
/// through `Q`. The result is the classical-scaling solution for the
/// interpolated distances, in the same Euclidean Frobenius norm.
pub fn spectral_mds(coeffs: &CoefficientMatrix, basis: &SpectralBasis, m: usize) -> Result<EmbeddingResult> {
    let start = Instant::now();
    let k = coeffs.dim();
    let phi = leading(basis, k)?;
    check_dimension(m, k)?;
    let n = phi.nrows();

    let means: Vec<f64> = (0..k).map(|c| phi.column(c).mean()).collect();
    let centred = DMatrix::from_fn(n, k, |r, c| phi[(r, c)] - means[c]);
    let qr = centred.qr();
    let (q, rfac) = (qr.q(), qr.r());
    let h = (&rfac * &coeffs.c * rfac.transpose()) * -0.5;
    let h = (&h + h.transpose()) * 0.5;
    let (eigenvalues, w) = top_scaled(h, m);
    let coords = &q * &w;

    // coords = J Phi b needs R b = w. J Phi drops the constant mode, so R
    // is singular; w lies in its range and the pseudo-inverse is exact.
    // (R^T R)^+ comes from a symmetric eigensolve: a plain SVD of the
    // triangular factor is not accurate enough here.
    let (gv, gw) = linalg::symmetric_eigen_ascending(rfac.transpose() * &rfac);
    let gmax = gv.iter().copied().fold(0.0, f64::max);
    let inv: Vec<f64> = gv
        .iter()
        .map(|&x| if x > 1e-20 * gmax { 1.0 / x } else { 0.0 })
        .collect();
    let rtw = rfac.transpose() * &w;
    let projected = gw.transpose() * rtw;
    let scaled = DMatrix::from_fn(k, m, |r, c| inv[r] * projected[(r, c)]);
    let mut beta = &gw * scaled;
    let constant_mode = basis.eigenvector(0);
    let c0 = constant_mode[0];
    if c0 != 0.0 && constant_mode.iter().all(|&x| (x - c0).abs() <= 1e-8 * c0.abs()) {
        for col in 0..m {
            let shift: f64 = (0..k).map(|r| means[r] * beta[(r, col)]).sum();
            beta[(0, col)] -= shift / c0;
        }
    }
    Ok(EmbeddingResult {
        coords,
        beta: Some(beta),
        stress: None,
        eigenvalues,
        elapsed: start.elapsed(),
    })
}
