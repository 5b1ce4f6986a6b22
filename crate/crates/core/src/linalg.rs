//! Dense helpers: sorted symmetric eigendecompositions, orthonormalization
//! in a diagonally weighted inner product, principal angles, and a block
//! Krylov Rayleigh-Ritz eigensolver shared by the Laplacian and MDS code.

use nalgebra::{DMatrix, DVector};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::error::{Error, Result};

/// Eigenpairs of a symmetric matrix, eigenvalues ascending.
pub fn symmetric_eigen_ascending(m: DMatrix<f64>) -> (Vec<f64>, DMatrix<f64>) {
    let n = m.nrows();
    let sym = (&m + m.transpose()) * 0.5;
    let eig = sym.symmetric_eigen();
    let mut order: Vec<usize> = (0..n).collect();
    order.sort_by(|&a, &b| eig.eigenvalues[a].total_cmp(&eig.eigenvalues[b]));
    let values = order.iter().map(|&i| eig.eigenvalues[i]).collect();
    let vectors = DMatrix::from_fn(n, n, |r, c| eig.eigenvectors[(r, order[c])]);
    (values, vectors)
}

/// `sum_i w_i x_i y_i`, or the plain dot product without weights.
pub fn weighted_dot(w: Option<&[f64]>, x: &[f64], y: &[f64]) -> f64 {
    match w {
        Some(w) => w.iter().zip(x).zip(y).map(|((w, a), b)| w * a * b).sum(),
        None => x.iter().zip(y).map(|(a, b)| a * b).sum(),
    }
}

fn weighted(w: Option<&[f64]>, x: &DMatrix<f64>) -> DMatrix<f64> {
    match w {
        Some(w) => DMatrix::from_fn(x.nrows(), x.ncols(), |r, c| w[r] * x[(r, c)]),
        None => x.clone(),
    }
}

fn weighted_norm(w: Option<&[f64]>, x: &DMatrix<f64>, j: usize) -> f64 {
    let col = x.column(j);
    weighted_dot(w, col.as_slice(), col.as_slice()).sqrt()
}

/// Gram matrix `X^T W Y`.
pub fn weighted_gram(w: Option<&[f64]>, x: &DMatrix<f64>, y: &DMatrix<f64>) -> DMatrix<f64> {
    x.transpose() * weighted(w, y)
}

/// Removes the span of the W-orthonormal columns `basis` from `block`
/// (classical Gram-Schmidt, applied twice).
pub fn project_out(w: Option<&[f64]>, basis: &DMatrix<f64>, block: &mut DMatrix<f64>) {
    if basis.ncols() == 0 {
        return;
    }
    for _ in 0..2 {
        let coeff = weighted_gram(w, basis, block);
        *block -= basis * coeff;
    }
}

/// W-orthonormalizes the columns of `block` with twice-applied modified
/// Gram-Schmidt. Columns whose remaining norm falls below `drop_tol` times
/// their incoming norm are discarded, so the result may have fewer columns.
pub fn orthonormalize(w: Option<&[f64]>, block: &DMatrix<f64>, drop_tol: f64) -> DMatrix<f64> {
    let n = block.nrows();
    let mut kept: Vec<DVector<f64>> = Vec::with_capacity(block.ncols());
    for j in 0..block.ncols() {
        let mut v: DVector<f64> = block.column(j).into_owned();
        let start = weighted_dot(w, v.as_slice(), v.as_slice()).sqrt();
        if !(start.is_finite() && start > 0.0) {
            continue;
        }
        for _ in 0..2 {
            for q in &kept {
                let c = weighted_dot(w, q.as_slice(), v.as_slice());
                v.axpy(-c, q, 1.0);
            }
        }
        let norm = weighted_dot(w, v.as_slice(), v.as_slice()).sqrt();
        if norm > drop_tol * start {
            kept.push(v / norm);
        }
    }
    DMatrix::from_fn(n, kept.len(), |r, c| kept[c][r])
}

/// Rank reported by [`orthonormalize`] with the given tolerance.
pub fn weighted_rank(w: Option<&[f64]>, block: &DMatrix<f64>, tol: f64) -> usize {
    orthonormalize(w, block, tol).ncols()
}

/// Largest principal angle (radians) between `span(x)` and `span(y)` in the
/// W inner product. Both inputs are orthonormalized internally; the angle is
/// measured from `span(x)` into `span(y)`, so for unequal dimensions it is
/// zero exactly when `span(x)` lies inside `span(y)`.
pub fn principal_angle(w: Option<&[f64]>, x: &DMatrix<f64>, y: &DMatrix<f64>) -> f64 {
    let qx = orthonormalize(w, x, 1e-12);
    let qy = orthonormalize(w, y, 1e-12);
    let mut r = qx.clone();
    project_out(w, &qy, &mut r);
    // W-norm of the residual block: scale rows by sqrt(w)
    let scaled = match w {
        Some(w) => DMatrix::from_fn(r.nrows(), r.ncols(), |i, j| w[i].sqrt() * r[(i, j)]),
        None => r,
    };
    if scaled.ncols() == 0 {
        return 0.0;
    }
    let sin_max = scaled.singular_values().iter().copied().fold(0.0, f64::max).min(1.0);
    sin_max.asin()
}

/// Flips each column so its entry of largest magnitude is positive
/// (first such entry on ties).
pub fn normalize_signs(v: &mut DMatrix<f64>) {
    for j in 0..v.ncols() {
        let mut best = 0usize;
        for i in 0..v.nrows() {
            if v[(i, j)].abs() > v[(best, j)].abs() {
                best = i;
            }
        }
        if v[(best, j)] < 0.0 {
            v.column_mut(j).neg_mut();
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Which {
    Smallest,
    Largest,
}

#[derive(Debug, Clone)]
pub struct KrylovOptions {
    /// Columns per Krylov block.
    pub block: usize,
    /// Blocks generated per restart cycle after the start block.
    pub steps: usize,
    /// Restart cap; exceeding it is a [`Error::ConvergenceFailure`].
    pub max_cycles: usize,
    /// Relative residual tolerance.
    pub tol: f64,
    pub seed: u64,
}

pub struct KrylovProblem<'a> {
    pub n: usize,
    pub wanted: usize,
    pub which: Which,
    /// Diagonal of the inner-product (mass) matrix; identity when `None`.
    pub weight: Option<&'a [f64]>,
    /// Generates the next Krylov block from the previous one.
    pub expand: &'a dyn Fn(&DMatrix<f64>) -> DMatrix<f64>,
    /// The operator `T` of the pencil `T x = theta W x` used for Rayleigh-Ritz.
    pub target: &'a dyn Fn(&DMatrix<f64>) -> DMatrix<f64>,
    /// Leading start columns; the block is padded with seeded random vectors.
    pub start: Option<DMatrix<f64>>,
}

#[derive(Debug, Clone)]
pub struct KrylovOutcome {
    pub values: Vec<f64>,
    pub vectors: DMatrix<f64>,
    pub residuals: Vec<f64>,
    pub cycles: usize,
}

/// Restarted block Krylov iteration with Rayleigh-Ritz on the weighted
/// pencil. Convergence is declared when every wanted Ritz pair satisfies
/// `|T x - theta W x| <= tol * |W x| * scale`, where `scale` is the largest
/// wanted `|theta|` (at least the first two), making the test invariant under
/// uniform rescaling of the pencil.
pub fn block_krylov(problem: &KrylovProblem<'_>, opts: &KrylovOptions) -> Result<KrylovOutcome> {
    let n = problem.n;
    let w = problem.weight;
    let block = opts.block.clamp(problem.wanted.max(1), n);
    let mut rng = ChaCha8Rng::seed_from_u64(opts.seed);
    let mut x = DMatrix::from_fn(n, block, |_, _| rng.random_range(-1.0..1.0));
    if let Some(start) = &problem.start {
        for j in 0..start.ncols().min(block) {
            x.set_column(j, &start.column(j));
        }
    }

    let mut worst = f64::INFINITY;
    for cycle in 1..=opts.max_cycles {
        let mut basis = orthonormalize(w, &x, 1e-10);
        let mut last = basis.clone();
        for _ in 0..opts.steps {
            if basis.ncols() >= n {
                break;
            }
            let mut next = (problem.expand)(&last);
            let before: Vec<f64> = (0..next.ncols()).map(|j| weighted_norm(w, &next, j)).collect();
            project_out(w, &basis, &mut next);
            // columns that lay (numerically) inside the basis leave only
            // rounding noise, which must not be normalised into the space
            for (j, b) in before.iter().enumerate() {
                if weighted_norm(w, &next, j) <= 1e-10 * b {
                    next.column_mut(j).fill(0.0);
                }
            }
            let mut fresh = orthonormalize(w, &next, 1e-10);
            project_out(w, &basis, &mut fresh);
            let fresh = orthonormalize(w, &fresh, 1e-10);
            if fresh.ncols() == 0 {
                break;
            }
            let take = fresh.ncols().min(n - basis.ncols());
            let fresh = fresh.columns(0, take).into_owned();
            let mut grown = DMatrix::zeros(n, basis.ncols() + take);
            grown.columns_mut(0, basis.ncols()).copy_from(&basis);
            grown.columns_mut(basis.ncols(), take).copy_from(&fresh);
            basis = grown;
            last = fresh;
        }

        let applied = (problem.target)(&basis);
        let projected = basis.transpose() * &applied;
        let (mut values, mut z) = symmetric_eigen_ascending(projected);
        if problem.which == Which::Largest {
            values.reverse();
            let cols = z.ncols();
            z = DMatrix::from_fn(z.nrows(), cols, |r, c| z[(r, cols - 1 - c)]);
        }
        let keep = block.min(values.len());
        let ritz = &basis * z.columns(0, keep);
        let ritz_applied = &applied * z.columns(0, keep);
        let wanted = problem.wanted.min(keep);
        let scale = values[..wanted.max(2).min(keep)]
            .iter()
            .map(|v| v.abs())
            .fold(0.0, f64::max);
        let wx = weighted(w, &ritz);
        let residuals: Vec<f64> = (0..wanted)
            .map(|j| {
                let r = ritz_applied.column(j) - wx.column(j) * values[j];
                let denom = wx.column(j).norm() * scale;
                if denom > 0.0 {
                    r.norm() / denom
                } else {
                    r.norm()
                }
            })
            .collect();
        worst = residuals.iter().copied().fold(0.0, f64::max);
        if worst <= opts.tol || basis.ncols() == n {
            return Ok(KrylovOutcome {
                values: values[..wanted].to_vec(),
                vectors: ritz.columns(0, wanted).into_owned(),
                residuals,
                cycles: cycle,
            });
        }
        x = ritz;
        if x.ncols() < block {
            // the Krylov space collapsed; refill with fresh random directions
            let mut refill = DMatrix::from_fn(n, block, |_, _| rng.random_range(-1.0..1.0));
            refill.columns_mut(0, x.ncols()).copy_from(&x);
            x = refill;
        }
    }
    Err(Error::ConvergenceFailure {
        iterations: opts.max_cycles,
        residual: worst,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn random_symmetric(n: usize, seed: u64) -> DMatrix<f64> {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let m = DMatrix::from_fn(n, n, |_, _| rng.random_range(-1.0..1.0));
        &m + m.transpose()
    }

    #[test]
    fn sorted_eigen_reconstructs() {
        let m = random_symmetric(12, 3);
        let (vals, vecs) = symmetric_eigen_ascending(m.clone());
        assert!(vals.windows(2).all(|p| p[0] <= p[1]));
        let rebuilt = &vecs * DMatrix::from_diagonal(&DVector::from_vec(vals)) * vecs.transpose();
        assert!((rebuilt - m).norm() < 1e-10);
    }

    #[test]
    fn orthonormalize_drops_dependent_columns() {
        let a = DMatrix::from_column_slice(3, 3, &[1.0, 0.0, 0.0, 2.0, 0.0, 0.0, 0.0, 1.0, 1.0]);
        let w = [1.0, 2.0, 3.0];
        let q = orthonormalize(Some(&w), &a, 1e-10);
        assert_eq!(q.ncols(), 2);
        let g = weighted_gram(Some(&w), &q, &q);
        assert!((g - DMatrix::identity(2, 2)).norm() < 1e-14);
    }

    #[test]
    fn principal_angle_of_rotated_plane() {
        let x = DMatrix::from_column_slice(3, 1, &[1.0, 0.0, 0.0]);
        let t = 0.3f64;
        let y = DMatrix::from_column_slice(3, 1, &[t.cos(), t.sin(), 0.0]);
        assert!((principal_angle(None, &x, &y) - t).abs() < 1e-12);
        assert!(principal_angle(None, &x, &x) < 1e-12);
    }

    #[test]
    fn krylov_matches_dense_at_both_ends() {
        let m = random_symmetric(80, 11);
        let (dense, _) = symmetric_eigen_ascending(m.clone());
        let op = |x: &DMatrix<f64>| &m * x;
        for which in [Which::Smallest, Which::Largest] {
            let problem = KrylovProblem {
                n: 80,
                wanted: 4,
                which,
                weight: None,
                expand: &op,
                target: &op,
                start: None,
            };
            let opts = KrylovOptions {
                block: 8,
                steps: 4,
                max_cycles: 200,
                tol: 1e-11,
                seed: 1,
            };
            let out = block_krylov(&problem, &opts).unwrap();
            for j in 0..4 {
                let expect = match which {
                    Which::Smallest => dense[j],
                    Which::Largest => dense[79 - j],
                };
                assert!((out.values[j] - expect).abs() < 1e-9, "{which:?} {j}");
            }
        }
    }

    #[test]
    fn krylov_reports_non_convergence() {
        let m = random_symmetric(60, 2);
        let op = |x: &DMatrix<f64>| &m * x;
        let problem = KrylovProblem {
            n: 60,
            wanted: 3,
            which: Which::Largest,
            weight: None,
            expand: &op,
            target: &op,
            start: None,
        };
        let opts = KrylovOptions {
            block: 3,
            steps: 0,
            max_cycles: 2,
            tol: 1e-14,
            seed: 0,
        };
        assert!(matches!(
            block_krylov(&problem, &opts),
            Err(Error::ConvergenceFailure { .. })
        ));
    }
}
