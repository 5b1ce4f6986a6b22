//! PCA of per-vertex fields, regularised by Dirichlet energy.
//!
//! For data columns `x_i` the basis `P` (with `P^T A P = I`) minimises
//!
//! ```text
//! sum_i |P P^T A x_i - x_i|_A^2 + mu sum_j P_j^T L P_j
//! ```
//!
//! which is the trace maximisation of `P^T (A X X^T A - mu L) P`, solved as
//! the top `m` eigenvectors of that pencil against `A`. At `mu = 0` this is
//! area-weighted PCA; as `mu` grows the basis tends to the first `m`
//! Laplace-Beltrami eigenvectors.
//!
//! All norms and inner products here are A-weighted.

use nalgebra::DMatrix;
use rayon::prelude::*;

use crate::error::{Error, Result};
use crate::lbo::{OperatorKind, SparseSymmetricOperator};
use crate::linalg::{self, KrylovOptions, KrylovProblem, Which};
use crate::sparse::EnvelopeCholesky;

const DENSE_AUTO_LIMIT: usize = 1000;
const DENSE_CAP: usize = 4000;

/// Data points as columns, one row per vertex.
#[derive(Debug, Clone, PartialEq)]
pub struct DataMatrix {
    x: DMatrix<f64>,
}

impl DataMatrix {
    pub fn new(x: DMatrix<f64>, vertex_count: usize) -> Result<Self> {
        if x.nrows() != vertex_count {
            return Err(Error::mismatch(vertex_count, x.nrows()));
        }
        Ok(DataMatrix { x })
    }

    pub fn from_columns(columns: &[Vec<f64>], vertex_count: usize) -> Result<Self> {
        if let Some(bad) = columns.iter().find(|c| c.len() != vertex_count) {
            return Err(Error::mismatch(vertex_count, bad.len()));
        }
        let x = DMatrix::from_fn(vertex_count, columns.len(), |r, c| columns[c][r]);
        Ok(DataMatrix { x })
    }

    pub fn matrix(&self) -> &DMatrix<f64> {
        &self.x
    }

    pub fn vertex_count(&self) -> usize {
        self.x.nrows()
    }

    pub fn len(&self) -> usize {
        self.x.ncols()
    }

    pub fn is_empty(&self) -> bool {
        self.x.ncols() == 0
    }
}

#[derive(Debug, Clone)]
pub struct RegularizedBasis {
    /// `n x m`, A-orthonormal columns.
    pub p: DMatrix<f64>,
    pub mu: f64,
    /// Eigenvalues of the pencil for the returned columns, descending.
    pub theta: Vec<f64>,
    /// `sum_i |P P^T A x_i - x_i|_A^2`.
    pub projection_error: f64,
    /// `sum_j P_j^T L P_j`; absent for plain PCA, which never sees `L`.
    pub dirichlet_energy: Option<f64>,
}

impl RegularizedBasis {
    pub fn dimension(&self) -> usize {
        self.p.ncols()
    }

    /// The objective `projection_error + mu * dirichlet_energy`.
    pub fn objective(&self) -> f64 {
        self.projection_error + self.mu * self.dirichlet_energy.unwrap_or(0.0)
    }

    pub fn orthonormality_defect(&self, mass: &SparseSymmetricOperator) -> f64 {
        let g = linalg::weighted_gram(Some(mass.diagonal()), &self.p, &self.p);
        (g - DMatrix::identity(self.p.ncols(), self.p.ncols())).amax()
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum RpcaMethod {
    /// Dense up to 1000 vertices, shift-invert block Krylov above.
    Auto,
    Dense,
    ShiftInvert,
}

#[derive(Debug, Clone)]
pub struct RpcaOptions {
    pub method: RpcaMethod,
    pub tol: f64,
    pub max_iterations: usize,
    pub steps: usize,
    pub seed: u64,
}

impl Default for RpcaOptions {
    fn default() -> Self {
        RpcaOptions {
            method: RpcaMethod::Auto,
            tol: 1e-10,
            max_iterations: 300,
            steps: 5,
            seed: 0x5eed,
        }
    }
}

fn check_mass(mass: &SparseSymmetricOperator, n: usize) -> Result<&[f64]> {
    if mass.dim() != n {
        return Err(Error::mismatch(n, mass.dim()));
    }
    debug_assert_eq!(mass.kind(), OperatorKind::Mass);
    Ok(mass.diagonal())
}

fn check_m(m: usize, max: usize) -> Result<()> {
    if m == 0 || m > max {
        return Err(Error::InvalidCount {
            count: m,
            expected: format!("1..={max}"),
        });
    }
    Ok(())
}

/// `sum_i |P P^T A x_i - x_i|_A^2` for an A-orthonormal `P`.
pub fn projection_error(data: &DataMatrix, p: &DMatrix<f64>, mass: &SparseSymmetricOperator) -> Result<f64> {
    let a = check_mass(mass, data.vertex_count())?;
    if p.nrows() != data.vertex_count() {
        return Err(Error::mismatch(data.vertex_count(), p.nrows()));
    }
    let coeff = linalg::weighted_gram(Some(a), p, &data.x);
    let residual = p * coeff - &data.x;
    Ok((0..residual.ncols())
        .map(|c| {
            let col = residual.column(c);
            linalg::weighted_dot(Some(a), col.as_slice(), col.as_slice())
        })
        .sum())
}

/// `sum_j P_j^T L P_j`.
pub fn dirichlet_energy(p: &DMatrix<f64>, stiffness: &SparseSymmetricOperator) -> Result<f64> {
    if p.nrows() != stiffness.dim() {
        return Err(Error::mismatch(stiffness.dim(), p.nrows()));
    }
    Ok((0..p.ncols())
        .map(|c| stiffness.quadratic_form(p.column(c).as_slice()))
        .sum())
}

/// Area-weighted PCA: the top `m` generalised eigenvectors of
/// `(A X X^T A) p = theta A p`, through the thin SVD of `A^{1/2} X`.
pub fn weighted_pca(data: &DataMatrix, mass: &SparseSymmetricOperator, m: usize) -> Result<RegularizedBasis> {
    let n = data.vertex_count();
    let a = check_mass(mass, n)?;
    check_m(m, n.min(data.len()))?;
    let sqrt_a: Vec<f64> = a.iter().map(|x| x.sqrt()).collect();
    let scaled = DMatrix::from_fn(n, data.len(), |r, c| sqrt_a[r] * data.x[(r, c)]);
    let svd = scaled.svd(true, false);
    let u = svd.u.as_ref().expect("requested");
    let mut order: Vec<usize> = (0..svd.singular_values.len()).collect();
    order.sort_by(|&i, &j| svd.singular_values[j].total_cmp(&svd.singular_values[i]));
    let mut p = DMatrix::from_fn(n, m, |r, c| u[(r, order[c])] / sqrt_a[r]);
    linalg::normalize_signs(&mut p);
    let theta = order[..m].iter().map(|&i| svd.singular_values[i].powi(2)).collect();
    Ok(RegularizedBasis {
        projection_error: projection_error(data, &p, mass)?,
        p,
        mu: 0.0,
        theta,
        dirichlet_energy: None,
    })
}

pub fn regularized_basis(
    data: &DataMatrix,
    stiffness: &SparseSymmetricOperator,
    mass: &SparseSymmetricOperator,
    mu: f64,
    m: usize,
) -> Result<RegularizedBasis> {
    regularized_basis_with(data, stiffness, mass, mu, m, &RpcaOptions::default())
}

/// Top `m` eigenpairs of `(A X X^T A - mu L) p = theta A p`, largest `theta`
/// first regardless of sign.
pub fn regularized_basis_with(
    data: &DataMatrix,
    stiffness: &SparseSymmetricOperator,
    mass: &SparseSymmetricOperator,
    mu: f64,
    m: usize,
    opts: &RpcaOptions,
) -> Result<RegularizedBasis> {
    let n = data.vertex_count();
    check_mass(mass, n)?;
    if stiffness.dim() != n {
        return Err(Error::mismatch(n, stiffness.dim()));
    }
    if !(mu.is_finite() && mu >= 0.0) {
        return Err(Error::NegativeMu(mu));
    }
    check_m(m, n)?;
    let block = m.max(data.len()) + 8;
    let dense = match opts.method {
        RpcaMethod::Dense => true,
        RpcaMethod::ShiftInvert => block >= n,
        RpcaMethod::Auto => n <= DENSE_AUTO_LIMIT || block >= n,
    };
    let (theta, mut p) = if dense {
        dense_pencil(data, stiffness, mass, mu, m)?
    } else {
        shift_invert_pencil(data, stiffness, mass, mu, m, block, opts)?
    };
    linalg::normalize_signs(&mut p);
    Ok(RegularizedBasis {
        projection_error: projection_error(data, &p, mass)?,
        dirichlet_energy: Some(dirichlet_energy(&p, stiffness)?),
        p,
        mu,
        theta,
    })
}

/// Dense reference: eigenvectors of `A^{1/2} X X^T A^{1/2} - mu A^{-1/2} L A^{-1/2}`.
fn dense_pencil(
    data: &DataMatrix,
    stiffness: &SparseSymmetricOperator,
    mass: &SparseSymmetricOperator,
    mu: f64,
    m: usize,
) -> Result<(Vec<f64>, DMatrix<f64>)> {
    let n = data.vertex_count();
    if n > DENSE_CAP {
        return Err(Error::TooLarge {
            size: n,
            cap: DENSE_CAP,
        });
    }
    let sqrt_a: Vec<f64> = mass.diagonal().iter().map(|x| x.sqrt()).collect();
    let y = DMatrix::from_fn(n, data.len(), |r, c| sqrt_a[r] * data.x[(r, c)]);
    let mut s = &y * y.transpose();
    let l = stiffness.to_dense();
    for c in 0..n {
        for r in 0..n {
            s[(r, c)] -= mu * l[(r, c)] / (sqrt_a[r] * sqrt_a[c]);
        }
    }
    let (values, vectors) = linalg::symmetric_eigen_ascending(s);
    let theta = (0..m).map(|i| values[n - 1 - i]).collect();
    let p = DMatrix::from_fn(n, m, |r, c| vectors[(r, n - 1 - c)] / sqrt_a[r]);
    Ok((theta, p))
}

/// Shift-invert on `K = mu L + s A - (A X)(A X)^T`, which is positive
/// definite once `s` exceeds `|A^{1/2} X|_2^2`; the top pencil eigenvalues are
/// `s - kappa` for the smallest eigenvalues `kappa` of `(K, A)`. Solves with
/// `K` use the sparse factor of `mu L + s A` and a Woodbury correction of
/// rank `d`.
fn shift_invert_pencil(
    data: &DataMatrix,
    stiffness: &SparseSymmetricOperator,
    mass: &SparseSymmetricOperator,
    mu: f64,
    m: usize,
    block: usize,
    opts: &RpcaOptions,
) -> Result<(Vec<f64>, DMatrix<f64>)> {
    let n = data.vertex_count();
    let a = mass.diagonal();
    let u = DMatrix::from_fn(n, data.len(), |r, c| a[r] * data.x[(r, c)]);
    // |A^{1/2} X|_2^2 is the top eigenvalue of X^T A X
    let data_gram = linalg::weighted_gram(Some(a), &data.x, &data.x);
    let top = data_gram.symmetric_eigenvalues().iter().copied().fold(0.0, f64::max);
    let energy_scale = if mu > 0.0 {
        mu * stiffness.trace() / a.iter().sum::<f64>()
    } else {
        0.0
    };
    let shift = top * (1.0 + 1e-2) + 1e-3 * energy_scale.max(top).max(f64::MIN_POSITIVE);

    let base = stiffness.matrix().scaled(mu).add_diagonal(shift, a);
    let factor = EnvelopeCholesky::factor(&base)?;
    let y = factor.solve_dense(&u);
    let capacitance = DMatrix::identity(data.len(), data.len()) - u.transpose() * &y;
    let capacitance = capacitance
        .cholesky()
        .ok_or(Error::NotPositiveDefinite { row: 0, pivot: 0.0 })?;

    let expand = |x: &DMatrix<f64>| {
        let w = DMatrix::from_fn(n, x.ncols(), |r, c| a[r] * x[(r, c)]);
        let mut z = w.clone();
        z.as_mut_slice()
            .par_chunks_mut(n)
            .for_each(|col| factor.solve_in_place(col));
        let corr = capacitance.solve(&(y.transpose() * &w));
        z + &y * corr
    };
    let target = |x: &DMatrix<f64>| {
        let mut out = stiffness.apply_block(x) * mu;
        for c in 0..x.ncols() {
            for r in 0..n {
                out[(r, c)] += shift * a[r] * x[(r, c)];
            }
        }
        out - &u * (u.transpose() * x)
    };
    let problem = KrylovProblem {
        n,
        wanted: m,
        which: Which::Smallest,
        weight: Some(a),
        expand: &expand,
        target: &target,
        start: Some(data.x.clone()),
    };
    let krylov = KrylovOptions {
        block,
        steps: opts.steps,
        max_cycles: opts.max_iterations,
        tol: opts.tol,
        seed: opts.seed,
    };
    let out = linalg::block_krylov(&problem, &krylov)?;
    let theta = out.values.iter().map(|k| shift - k).collect();
    Ok((theta, out.vectors))
}

/// `P P^T A f`.
pub fn reconstruct(f: &[f64], basis: &RegularizedBasis, mass: &SparseSymmetricOperator) -> Result<Vec<f64>> {
    let a = check_mass(mass, basis.p.nrows())?;
    if f.len() != basis.p.nrows() {
        return Err(Error::mismatch(basis.p.nrows(), f.len()));
    }
    let af: Vec<f64> = a.iter().zip(f).map(|(a, x)| a * x).collect();
    let coeff = basis.p.transpose() * nalgebra::DVector::from_column_slice(&af);
    Ok((&basis.p * coeff).as_slice().to_vec())
}

/// `|A X X^T A|_1 / |L|_1`, the factor between calibrated and raw `mu`.
pub fn mu_scale(data: &DataMatrix, stiffness: &SparseSymmetricOperator, mass: &SparseSymmetricOperator) -> Result<f64> {
    let n = data.vertex_count();
    let a = check_mass(mass, n)?;
    let u = DMatrix::from_fn(n, data.len(), |r, c| a[r] * data.x[(r, c)]);
    let gram_rows = &u * u.transpose();
    let data_norm = (0..n)
        .map(|c| gram_rows.column(c).iter().map(|x| x.abs()).sum::<f64>())
        .fold(0.0, f64::max);
    let l_norm = stiffness.matrix().norm_one();
    if l_norm == 0.0 {
        return Ok(0.0);
    }
    Ok(data_norm / l_norm)
}

/// Raw `mu` for a calibrated `mu_hat = mu |L|_1 / |A X X^T A|_1`.
pub fn mu_from_calibrated(
    mu_hat: f64,
    data: &DataMatrix,
    stiffness: &SparseSymmetricOperator,
    mass: &SparseSymmetricOperator,
) -> Result<f64> {
    Ok(mu_hat * mu_scale(data, stiffness, mass)?)
}

/// `steps` values from `lo` to `hi`, evenly spaced in log scale.
pub fn log_sweep(lo: f64, hi: f64, steps: usize) -> Vec<f64> {
    match steps {
        0 => Vec::new(),
        1 => vec![lo],
        _ => {
            let (a, b) = (lo.ln(), hi.ln());
            (0..steps)
                .map(|i| (a + (b - a) * i as f64 / (steps - 1) as f64).exp())
                .collect()
        }
    }
}

/// Bases for several raw `mu` values, computed in parallel.
pub fn regularized_sweep(
    data: &DataMatrix,
    stiffness: &SparseSymmetricOperator,
    mass: &SparseSymmetricOperator,
    mus: &[f64],
    m: usize,
    opts: &RpcaOptions,
) -> Result<Vec<RegularizedBasis>> {
    mus.par_iter()
        .map(|&mu| regularized_basis_with(data, stiffness, mass, mu, m, opts))
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::lbo::{assemble_stiffness, dense_eigenpairs, regular_mass};
    use crate::mesh::shapes;
    use proptest::prelude::*;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    struct Fixture {
        l: SparseSymmetricOperator,
        a: SparseSymmetricOperator,
        data: DataMatrix,
    }

    fn fixture(subdiv: u32, shapes_count: usize) -> Fixture {
        let mesh = shapes::icosphere(subdiv);
        let n = mesh.vertex_count();
        let mut cols = Vec::new();
        for s in 0..shapes_count {
            let pose = shapes::perturbed_sphere(subdiv, 0.3, 100 + s as u64);
            cols.extend(pose.coordinate_fields());
        }
        Fixture {
            l: assemble_stiffness(&mesh),
            a: regular_mass(&mesh),
            data: DataMatrix::from_columns(&cols, n).unwrap(),
        }
    }

    fn angle(f: &Fixture, x: &DMatrix<f64>, y: &DMatrix<f64>) -> f64 {
        linalg::principal_angle(Some(f.a.diagonal()), x, y)
    }

    #[test]
    fn rank_one_data() {
        let f = fixture(2, 1);
        let x = f.data.matrix().columns(0, 1).into_owned();
        let data = DataMatrix::new(x.clone(), x.nrows()).unwrap();
        let pca = weighted_pca(&data, &f.a, 1).unwrap();
        assert!(angle(&f, &pca.p, &x) < 1e-10);
        assert!(pca.orthonormality_defect(&f.a) < 1e-12);
    }

    #[test]
    fn eigenvector_data_spans_itself() {
        let f = fixture(2, 1);
        let basis = dense_eigenpairs(&f.l, &f.a, 6).unwrap();
        let mut x = DMatrix::zeros(basis.vertex_count(), 2);
        x.set_column(0, &basis.eigenvectors.column(1));
        x.set_column(1, &basis.eigenvectors.column(4));
        let data = DataMatrix::new(x.clone(), x.nrows()).unwrap();
        let pca = weighted_pca(&data, &f.a, 2).unwrap();
        assert!(angle(&f, &pca.p, &x) < 1e-8);
    }

    #[test]
    fn pca_matches_dense_oracle() {
        let f = fixture(2, 2);
        let d = f.data.len();
        let pca = weighted_pca(&f.data, &f.a, d).unwrap();
        // oracle: full eigendecomposition of A^{1/2} X X^T A^{1/2}
        let (sqrt_a, n) = (
            f.a.diagonal().iter().map(|x| x.sqrt()).collect::<Vec<_>>(),
            f.data.vertex_count(),
        );
        let y = DMatrix::from_fn(n, d, |r, c| sqrt_a[r] * f.data.matrix()[(r, c)]);
        let (values, vectors) = linalg::symmetric_eigen_ascending(&y * y.transpose());
        let oracle = DMatrix::from_fn(n, d, |r, c| vectors[(r, n - 1 - c)] / sqrt_a[r]);
        let oracle_err = projection_error(&f.data, &oracle, &f.a).unwrap();
        assert!(pca.projection_error <= oracle_err + 1e-9);
        for (t, v) in pca.theta.iter().zip(values.iter().rev()) {
            assert!((t - v).abs() <= 1e-9 * values[n - 1]);
        }
        assert!(angle(&f, &pca.p, &oracle) < 1e-6);
    }

    #[test]
    fn mu_zero_is_pca() {
        let f = fixture(2, 2);
        let pca = weighted_pca(&f.data, &f.a, 4).unwrap();
        for method in [RpcaMethod::Dense, RpcaMethod::ShiftInvert] {
            let opts = RpcaOptions {
                method,
                ..Default::default()
            };
            let reg = regularized_basis_with(&f.data, &f.l, &f.a, 0.0, 4, &opts).unwrap();
            assert!(angle(&f, &reg.p, &pca.p) < 1e-8, "{method:?}");
        }
    }

    #[test]
    fn large_mu_recovers_eigenbasis() {
        let f = fixture(2, 2);
        let basis = dense_eigenpairs(&f.l, &f.a, 4).unwrap();
        let mu = mu_from_calibrated(1e6, &f.data, &f.l, &f.a).unwrap();
        let reg = regularized_basis(&f.data, &f.l, &f.a, mu, 4).unwrap();
        assert!(angle(&f, &reg.p, &basis.eigenvectors) < 1e-3);
    }

    #[test]
    fn shift_invert_matches_dense() {
        let f = fixture(2, 2);
        for mu_hat in [0.0, 1e-3, 1.0, 1e3] {
            let mu = mu_from_calibrated(mu_hat, &f.data, &f.l, &f.a).unwrap();
            let run = |method| {
                let opts = RpcaOptions {
                    method,
                    ..Default::default()
                };
                regularized_basis_with(&f.data, &f.l, &f.a, mu, 5, &opts).unwrap()
            };
            let (dense, sparse) = (run(RpcaMethod::Dense), run(RpcaMethod::ShiftInvert));
            let scale = dense.theta.iter().map(|t| t.abs()).fold(0.0, f64::max);
            for (x, y) in dense.theta.iter().zip(&sparse.theta) {
                assert!((x - y).abs() <= 1e-8 * scale, "mu_hat {mu_hat}: {x} vs {y}");
            }
            assert!(angle(&f, &dense.p, &sparse.p) < 1e-6, "mu_hat {mu_hat}");
            assert!(sparse.orthonormality_defect(&f.a) < 1e-8);
        }
    }

    #[test]
    fn reconstruction_properties() {
        let f = fixture(2, 2);
        let pca = weighted_pca(&f.data, &f.a, f.data.len()).unwrap();
        let x1: Vec<f64> = f.data.matrix().column(0).iter().copied().collect();
        let back = reconstruct(&x1, &pca, &f.a).unwrap();
        let gap = back.iter().zip(&x1).map(|(a, b)| (a - b).abs()).fold(0.0, f64::max);
        assert!(gap < 1e-8);

        let reg = regularized_basis(&f.data, &f.l, &f.a, 1.0, 3).unwrap();
        let inside: Vec<f64> = (reg.p.column(0) * 2.0 - reg.p.column(2)).iter().copied().collect();
        let r = reconstruct(&inside, &reg, &f.a).unwrap();
        assert!(r.iter().zip(&inside).all(|(a, b)| (a - b).abs() < 1e-9));

        let mut outside = DMatrix::from_fn(reg.p.nrows(), 1, |r, _| ((r * 13) % 7) as f64);
        linalg::project_out(Some(f.a.diagonal()), &reg.p, &mut outside);
        let z = reconstruct(outside.as_slice(), &reg, &f.a).unwrap();
        assert!(z.iter().all(|x| x.abs() < 1e-9));

        let once = reconstruct(&x1, &reg, &f.a).unwrap();
        let twice = reconstruct(&once, &reg, &f.a).unwrap();
        assert!(once.iter().zip(&twice).all(|(a, b)| (a - b).abs() < 1e-9));
    }

    #[test]
    fn invalid_inputs() {
        let f = fixture(1, 1);
        assert!(matches!(
            regularized_basis(&f.data, &f.l, &f.a, -1.0, 2),
            Err(Error::NegativeMu(_))
        ));
        assert!(matches!(
            weighted_pca(&f.data, &f.a, 4),
            Err(Error::InvalidCount { .. })
        ));
        assert!(DataMatrix::new(DMatrix::zeros(3, 2), 4).is_err());
        let short = vec![0.0; 3];
        let pca = weighted_pca(&f.data, &f.a, 2).unwrap();
        assert!(matches!(
            reconstruct(&short, &pca, &f.a),
            Err(Error::DimensionMismatch { .. })
        ));
    }

    #[test]
    fn monotone_in_mu() {
        let f = fixture(2, 3);
        let mus: Vec<f64> = log_sweep(1e-4, 1e4, 20)
            .into_iter()
            .map(|h| mu_from_calibrated(h, &f.data, &f.l, &f.a).unwrap())
            .collect();
        let sweep = regularized_sweep(&f.data, &f.l, &f.a, &mus, 5, &RpcaOptions::default()).unwrap();
        for w in sweep.windows(2) {
            let (lo, hi) = (&w[0], &w[1]);
            let (dl, dh) = (lo.dirichlet_energy.unwrap(), hi.dirichlet_energy.unwrap());
            assert!(dh <= dl + 1e-9 * dl.max(1.0));
            assert!(hi.projection_error >= lo.projection_error - 1e-9 * lo.projection_error.max(1.0));
        }
    }

    proptest! {
        #![proptest_config(ProptestConfig::with_cases(12))]
        #[test]
        fn beats_random_frames(seed in 0u64..1000, mu_hat in 1e-3f64..1e3) {
            let f = fixture(1, 2);
            let mu = mu_from_calibrated(mu_hat, &f.data, &f.l, &f.a).unwrap();
            let m = 4;
            let best = regularized_basis(&f.data, &f.l, &f.a, mu, m).unwrap();
            prop_assert!(best.orthonormality_defect(&f.a) < 1e-8);
            let mut rng = ChaCha8Rng::seed_from_u64(seed);
            let n = f.data.vertex_count();
            for _ in 0..100 {
                let raw = DMatrix::from_fn(n, m, |_, _| rng.random_range(-1.0..1.0));
                let frame = linalg::orthonormalize(Some(f.a.diagonal()), &raw, 1e-10);
                let value = projection_error(&f.data, &frame, &f.a).unwrap()
                    + mu * dirichlet_energy(&frame, &f.l).unwrap();
                prop_assert!(best.objective() <= value * (1.0 + 1e-9));
            }
        }
    }
}
