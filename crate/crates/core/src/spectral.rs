//! Truncated eigenbasis expansions and their optimality.
//!
//! For a field `f = sum_i beta_i phi_i` the truncation residual after `n`
//! terms is `sum_{i>n} beta_i^2` while the Dirichlet energy is
//! `sum_i lambda_i beta_i^2`, so
//!
//! ```text
//! |r_n|^2 <= f^T L f / lambda_{n+1}
//! ```
//!
//! holds exactly in the discrete model. [`bound_check`] evaluates the ratio of
//! the two sides. [`optimality_audit`] asks the converse question for an
//! arbitrary rival subspace: how large can that ratio get when the rival
//! replaces the leading eigenvectors? It is never below one.

use nalgebra::{DMatrix, DVector};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::error::{Error, Result};
use crate::lbo::{SparseSymmetricOperator, SpectralBasis};
use crate::linalg;

/// Energy below `CONSTANT_TOLERANCE * f^T A f` counts as a constant field.
pub const CONSTANT_TOLERANCE: f64 = 1e-12;

/// Rank tolerance for rival fields after A-orthonormalization.
pub const RIVAL_RANK_TOLERANCE: f64 = 1e-10;

/// Discrete inner products `beta_i = phi_i^T A f`.
#[derive(Debug, Clone, PartialEq)]
pub struct SpectralCoefficients {
    pub values: DVector<f64>,
}

fn check_field(f: &DVector<f64>, basis: &SpectralBasis) -> Result<()> {
    if f.len() != basis.vertex_count() {
        return Err(Error::mismatch(basis.vertex_count(), f.len()));
    }
    Ok(())
}

fn check_order(n: usize, available: usize) -> Result<()> {
    if n > available {
        return Err(Error::InvalidCount {
            count: n,
            expected: format!("at most {available}"),
        });
    }
    Ok(())
}

fn mass_norm_sq(mass: &[f64], f: &DVector<f64>) -> f64 {
    linalg::weighted_dot(Some(mass), f.as_slice(), f.as_slice())
}

/// Coefficients on the first `n` eigenvectors and the truncated expansion.
pub fn project(f: &DVector<f64>, basis: &SpectralBasis, n: usize) -> Result<(SpectralCoefficients, DVector<f64>)> {
    check_field(f, basis)?;
    check_order(n, basis.len())?;
    let phi = basis.eigenvectors.columns(0, n);
    let af = DVector::from_fn(f.len(), |r, _| basis.mass[r] * f[r]);
    let beta = phi.transpose() * af;
    let reconstruction = phi * &beta;
    Ok((SpectralCoefficients { values: beta }, reconstruction))
}

#[derive(Debug, Clone, PartialEq)]
pub struct BoundReport {
    pub n: usize,
    /// `|f - sum_{i<=n} beta_i phi_i|_A^2`.
    pub residual_sq: f64,
    /// `f^T L f`.
    pub dirichlet: f64,
    pub lambda_next: f64,
    /// `residual_sq * lambda_next / dirichlet`; at most one.
    pub ratio: f64,
}

pub fn bound_check(
    f: &DVector<f64>,
    stiffness: &SparseSymmetricOperator,
    basis: &SpectralBasis,
    n: usize,
) -> Result<BoundReport> {
    check_field(f, basis)?;
    if stiffness.dim() != f.len() {
        return Err(Error::mismatch(f.len(), stiffness.dim()));
    }
    if n + 1 > basis.len() {
        return Err(Error::InvalidCount {
            count: n,
            expected: format!(
                "at most {} (basis holds {} pairs)",
                basis.len().saturating_sub(1),
                basis.len()
            ),
        });
    }
    let dirichlet = stiffness.quadratic_form(f.as_slice());
    if dirichlet < CONSTANT_TOLERANCE * mass_norm_sq(&basis.mass, f) {
        return Err(Error::ConstantFunction);
    }
    let (_, reconstruction) = project(f, basis, n)?;
    let residual = f - reconstruction;
    let residual_sq = mass_norm_sq(&basis.mass, &residual);
    let lambda_next = basis.eigenvalues[n];
    Ok(BoundReport {
        n,
        residual_sq,
        dirichlet,
        lambda_next,
        ratio: residual_sq * lambda_next / dirichlet,
    })
}

/// Worst bound ratio a rival subspace achieves over `span{phi_1..phi_{n+1}}`,
/// with `n` the number of rival fields (columns of `rival`).
///
/// Writing `f = Phi b` over the first `n + 1` eigenvectors, the residual of
/// the A-orthogonal projection onto the rival span is the quadratic form
/// `b^T (I - M^T M) b` with `M = Q^T A Phi`, and the Dirichlet energy is
/// `b^T diag(lambda) b`. The supremum of their ratio times `lambda_{n+1}` is the
/// top eigenvalue of that small pencil.
///
/// A rival that misses a zero-energy mode makes the ratio unbounded; that is
/// reported as [`Error::ConstantFunction`].
pub fn optimality_audit(basis: &SpectralBasis, rival: &DMatrix<f64>) -> Result<f64> {
    let n = rival.ncols();
    if rival.nrows() != basis.vertex_count() {
        return Err(Error::mismatch(basis.vertex_count(), rival.nrows()));
    }
    if n == 0 || n + 1 > basis.len() {
        return Err(Error::InvalidCount {
            count: n,
            expected: format!("1..={}", basis.len().saturating_sub(1)),
        });
    }
    let q = linalg::orthonormalize(Some(&basis.mass), rival, RIVAL_RANK_TOLERANCE);
    if q.ncols() < n {
        return Err(Error::RankDeficientRival);
    }
    let phi = basis.eigenvectors.columns(0, n + 1).into_owned();
    let overlap = linalg::weighted_gram(Some(&basis.mass), &q, &phi);
    let residual_form = DMatrix::identity(n + 1, n + 1) - overlap.transpose() * &overlap;
    let lambda = &basis.eigenvalues[..=n];
    let lambda_next = lambda[n];

    let (null, active): (Vec<usize>, Vec<usize>) = (0..=n).partition(|&i| lambda[i] < CONSTANT_TOLERANCE);
    if null.iter().any(|&i| residual_form[(i, i)] > RIVAL_RANK_TOLERANCE) {
        return Err(Error::ConstantFunction);
    }
    let m = active.len();
    let scaled = DMatrix::from_fn(m, m, |r, c| {
        let (i, j) = (active[r], active[c]);
        residual_form[(i, j)] / (lambda[i] * lambda[j]).sqrt()
    });
    let (values, _) = linalg::symmetric_eigen_ascending(scaled);
    Ok(lambda_next * values.last().copied().unwrap_or(0.0))
}

/// How random rival frames are drawn in [`random_rival_audit`].
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum RivalSampler {
    /// Independent uniform noise at every vertex.
    VertexNoise,
    /// Random combinations of all eigenvectors in the basis; competitive
    /// rivals that share most of the smooth content of the true subspace.
    SpectralMix,
}

#[derive(Debug, Clone, PartialEq)]
pub struct AuditSummary {
    pub n: usize,
    pub trials: usize,
    /// Finite worst ratios, one per bounded trial.
    pub ratios: Vec<f64>,
    /// Trials whose rival missed the constant mode (unbounded ratio).
    pub unbounded: usize,
}

impl AuditSummary {
    /// Smallest worst-case ratio over the bounded trials.
    pub fn min_ratio(&self) -> Option<f64> {
        self.ratios.iter().copied().reduce(f64::min)
    }
}

/// Draws an `n`-column rival frame. With `include_constant` the first
/// column is the constant field, so zero-energy modes are captured and the
/// worst ratio stays finite.
pub fn random_rival(
    basis: &SpectralBasis,
    n: usize,
    sampler: RivalSampler,
    include_constant: bool,
    rng: &mut impl Rng,
) -> DMatrix<f64> {
    let rows = basis.vertex_count();
    let mut rival = match sampler {
        RivalSampler::VertexNoise => DMatrix::from_fn(rows, n, |_, _| rng.random_range(-1.0..1.0)),
        RivalSampler::SpectralMix => {
            let k = basis.len();
            let mix = DMatrix::from_fn(k, n, |_, _| rng.random_range(-1.0..1.0));
            &basis.eigenvectors * mix
        }
    };
    if include_constant {
        rival.column_mut(0).fill(1.0);
    }
    rival
}

pub fn random_rival_audit(
    basis: &SpectralBasis,
    n: usize,
    trials: usize,
    sampler: RivalSampler,
    include_constant: bool,
    seed: u64,
) -> Result<AuditSummary> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut ratios = Vec::with_capacity(trials);
    let mut unbounded = 0;
    for _ in 0..trials {
        let rival = random_rival(basis, n, sampler, include_constant, &mut rng);
        match optimality_audit(basis, &rival) {
            Ok(r) => ratios.push(r),
            Err(Error::ConstantFunction) => unbounded += 1,
            Err(e) => return Err(e),
        }
    }
    Ok(AuditSummary {
        n,
        trials,
        ratios,
        unbounded,
    })
}

/// Minimum Rayleigh quotient `f^T L f / f^T A f` over the A-orthogonal
/// complement of `fields`, by a dense eigensolve.
pub fn min_rayleigh_on_complement(
    stiffness: &SparseSymmetricOperator,
    mass: &SparseSymmetricOperator,
    fields: &DMatrix<f64>,
) -> Result<f64> {
    const CAP: usize = 2000;
    let n = stiffness.dim();
    if n > CAP {
        return Err(Error::TooLarge { size: n, cap: CAP });
    }
    if fields.nrows() != n {
        return Err(Error::mismatch(n, fields.nrows()));
    }
    let a = mass.diagonal();
    let q = linalg::orthonormalize(Some(a), fields, RIVAL_RANK_TOLERANCE);
    if q.ncols() >= n {
        return Err(Error::RankDeficientRival);
    }
    // in y = A^{1/2} f coordinates the constraint space is orthonormal
    let sqrt_a: Vec<f64> = a.iter().map(|x| x.sqrt()).collect();
    let u = DMatrix::from_fn(n, q.ncols(), |r, c| sqrt_a[r] * q[(r, c)]);
    let full = {
        let mut m = DMatrix::zeros(n, n);
        m.columns_mut(0, u.ncols()).copy_from(&u);
        let mut rng = ChaCha8Rng::seed_from_u64(7);
        for c in u.ncols()..n {
            for r in 0..n {
                m[(r, c)] = rng.random_range(-1.0..1.0);
            }
        }
        m.qr().q()
    };
    let z = full.columns(u.ncols(), n - u.ncols()).into_owned();
    let mut scaled = stiffness.to_dense();
    for r in 0..n {
        for c in 0..n {
            scaled[(r, c)] /= sqrt_a[r] * sqrt_a[c];
        }
    }
    let restricted = z.transpose() * scaled * &z;
    let (values, _) = linalg::symmetric_eigen_ascending(restricted);
    Ok(values[0])
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::lbo::{assemble_stiffness, dense_eigenpairs, regular_mass, smallest_eigenpairs};
    use crate::mesh::shapes;
    use proptest::prelude::*;
    use rand::Rng;

    fn fixture(k: usize) -> (SparseSymmetricOperator, SparseSymmetricOperator, SpectralBasis) {
        let mesh = shapes::perturbed_sphere(2, 0.2, 17);
        let l = assemble_stiffness(&mesh);
        let a = regular_mass(&mesh);
        let basis = smallest_eigenpairs(&l, &a, k).unwrap();
        (l, a, basis)
    }

    #[test]
    fn basis_vector_is_reproduced() {
        let (_, _, basis) = fixture(8);
        let f = basis.eigenvector(2);
        let (beta, rec) = project(&f, &basis, 5).unwrap();
        for i in 0..5 {
            let expect = if i == 2 { 1.0 } else { 0.0 };
            assert!((beta.values[i] - expect).abs() < 1e-9);
        }
        assert!((rec - f).amax() < 1e-9);
    }

    #[test]
    fn constant_is_captured_by_first_mode() {
        let (_, a, basis) = fixture(4);
        let f = DVector::from_element(basis.vertex_count(), 2.5);
        let (_, rec) = project(&f, &basis, 1).unwrap();
        let r = &f - rec;
        let total = mass_norm_sq(a.diagonal(), &f);
        assert!(mass_norm_sq(a.diagonal(), &r) <= 1e-12 * total);
    }

    #[test]
    fn residual_is_orthogonal_to_span() {
        let (_, a, basis) = fixture(10);
        let f = DVector::from_fn(basis.vertex_count(), |r, _| ((r * 37) % 11) as f64);
        let (_, rec) = project(&f, &basis, 6).unwrap();
        let r = f - rec;
        for i in 0..6 {
            let phi = basis.eigenvector(i);
            let dot = linalg::weighted_dot(Some(a.diagonal()), phi.as_slice(), r.as_slice());
            assert!(dot.abs() < 1e-9);
        }
    }

    #[test]
    fn parseval_with_full_basis() {
        let mesh = shapes::icosphere(1);
        let l = assemble_stiffness(&mesh);
        let a = regular_mass(&mesh);
        let basis = dense_eigenpairs(&l, &a, mesh.vertex_count()).unwrap();
        let f = DVector::from_fn(mesh.vertex_count(), |r, _| (r as f64 * 0.7).sin());
        let (beta, _) = project(&f, &basis, basis.len()).unwrap();
        let lhs = beta.values.norm_squared();
        let rhs = mass_norm_sq(a.diagonal(), &f);
        assert!((lhs - rhs).abs() <= 1e-9 * rhs);
    }

    #[test]
    fn bound_is_tight_on_next_eigenvector() {
        let (l, _, basis) = fixture(12);
        let n = 6;
        let report = bound_check(&basis.eigenvector(n), &l, &basis, n).unwrap();
        assert!((report.ratio - 1.0).abs() < 1e-9, "ratio {}", report.ratio);
    }

    #[test]
    fn bound_is_zero_inside_span() {
        let (l, _, basis) = fixture(6);
        let f = basis.eigenvector(0) + basis.eigenvector(1);
        let report = bound_check(&f, &l, &basis, 2).unwrap();
        assert!(report.ratio.abs() < 1e-9);
    }

    #[test]
    fn bound_rejects_constants_and_bad_orders() {
        let (l, _, basis) = fixture(6);
        let ones = DVector::from_element(basis.vertex_count(), 1.0);
        assert!(matches!(
            bound_check(&ones, &l, &basis, 2),
            Err(Error::ConstantFunction)
        ));
        let f = basis.eigenvector(3);
        assert!(matches!(
            bound_check(&f, &l, &basis, 6),
            Err(Error::InvalidCount { .. })
        ));
        let short = DVector::zeros(3);
        assert!(matches!(
            bound_check(&short, &l, &basis, 2),
            Err(Error::DimensionMismatch { .. })
        ));
    }

    #[test]
    fn eigenbasis_attains_the_bound() {
        let (_, _, basis) = fixture(12);
        let n = 7;
        let rival = basis.eigenvectors.columns(0, n).into_owned();
        let worst = optimality_audit(&basis, &rival).unwrap();
        assert!((worst - 1.0).abs() < 1e-8, "worst {worst}");
    }

    #[test]
    fn dropping_the_constant_is_unbounded() {
        let (_, _, basis) = fixture(12);
        let rival = basis.eigenvectors.columns(1, 7).into_owned();
        assert!(matches!(optimality_audit(&basis, &rival), Err(Error::ConstantFunction)));
    }

    #[test]
    fn rank_deficient_rival() {
        let (_, _, basis) = fixture(8);
        let mut rival = basis.eigenvectors.columns(0, 3).into_owned();
        let c0 = rival.column(0).into_owned();
        rival.set_column(2, &(c0 * 2.0));
        assert!(matches!(
            optimality_audit(&basis, &rival),
            Err(Error::RankDeficientRival)
        ));
    }

    #[test]
    fn random_rivals_never_beat_the_eigenbasis() {
        let (_, _, basis) = fixture(16);
        for sampler in [RivalSampler::VertexNoise, RivalSampler::SpectralMix] {
            let summary = random_rival_audit(&basis, 6, 20, sampler, true, 3).unwrap();
            assert_eq!(summary.unbounded, 0);
            assert!(summary.min_ratio().unwrap() >= 1.0 - 1e-6);
            let wild = random_rival_audit(&basis, 6, 5, sampler, false, 3).unwrap();
            assert_eq!(wild.unbounded, 5);
        }
    }

    #[test]
    fn courant_fischer_spot_check() {
        let mesh = shapes::perturbed_sphere(2, 0.2, 8);
        let l = assemble_stiffness(&mesh);
        let a = regular_mass(&mesh);
        let basis = dense_eigenpairs(&l, &a, 10).unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(1);
        for n in [1, 4, 9] {
            let fields = DMatrix::from_fn(mesh.vertex_count(), n, |_, _| rng.random_range(-1.0..1.0));
            let min = min_rayleigh_on_complement(&l, &a, &fields).unwrap();
            assert!(min <= basis.eigenvalues[n] + 1e-8);
            // the eigenvectors themselves achieve equality
            let own = basis.eigenvectors.columns(0, n).into_owned();
            let exact = min_rayleigh_on_complement(&l, &a, &own).unwrap();
            assert!((exact - basis.eigenvalues[n]).abs() < 1e-8 * basis.eigenvalues[n].max(1.0));
        }
    }

    proptest! {
        #![proptest_config(ProptestConfig::with_cases(24))]
        #[test]
        fn bound_and_monotone_residual(seed in 0u64..10_000) {
            let (l, _, basis) = fixture(21);
            let mut rng = ChaCha8Rng::seed_from_u64(seed);
            let f = DVector::from_fn(basis.vertex_count(), |_, _| rng.random_range(-1.0..1.0));
            let mut last = f64::INFINITY;
            for n in 1..=20 {
                let report = bound_check(&f, &l, &basis, n).unwrap();
                prop_assert!(report.ratio <= 1.0 + 1e-9);
                prop_assert!(report.residual_sq <= last * (1.0 + 1e-12));
                last = report.residual_sq;
            }
        }
    }
}
