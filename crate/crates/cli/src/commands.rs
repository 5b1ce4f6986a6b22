use std::f64::consts::PI;

use eigenshape::curvature::{gaussian_curvature, metric_weights, MetricWeights};
use eigenshape::geodesic::{all_pairs, distance_rows, GeodesicOptions};
use eigenshape::lbo::{
    assemble_mass, assemble_stiffness, smallest_eigenpairs_with, EigenMethod, EigenOptions, SparseSymmetricOperator,
    SpectralBasis,
};
use eigenshape::mds::{classical_mds, default_eta, fit_coefficients, sampled_stress, spectral_mds, stress};
use eigenshape::mesh::Mesh;
use eigenshape::rpca::{log_sweep, mu_scale, reconstruct, regularized_sweep, DataMatrix, RpcaMethod, RpcaOptions};
use eigenshape::sampling::{covering_radius, farthest_point_sample_geodesic, SampleSet};
use eigenshape::spectral::{bound_check, optimality_audit, random_rival_audit, RivalSampler};
use eigenshape::Error;
use nalgebra::{DMatrix, DVector, Point3};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde_json::{json, Value};

use crate::args::*;
use crate::error::CliError;
use crate::input::{is_mesh_spec, load_fields, load_matrix};
use crate::report::{num, Output};

/// Audit ratios below `1 - AUDIT_SLACK` count as violations.
const AUDIT_SLACK: f64 = 1e-6;
/// Bound ratios above `1 + BOUND_SLACK` count as violations.
const BOUND_SLACK: f64 = 1e-9;

pub struct Context<'a> {
    pub mesh: Mesh,
    pub seed: u64,
    pub out: &'a mut Output,
}

pub fn run(command: &Command, ctx: &mut Context<'_>) -> Result<Value, CliError> {
    match command {
        Command::Info => info(ctx),
        Command::Curvature(a) => curvature(a, ctx),
        Command::Eigs(a) => eigs(a, ctx),
        Command::BoundCheck(a) => bound(a, ctx),
        Command::Audit(a) => audit(a, ctx),
        Command::Geodesic(a) => geodesic(a, ctx),
        Command::Canonical(a) => canonical(a, ctx),
        Command::Rpca(a) => rpca(a, ctx),
    }
}

fn info(ctx: &mut Context<'_>) -> Result<Value, CliError> {
    let mesh = &ctx.mesh;
    let mut lo = [f64::INFINITY; 3];
    let mut hi = [f64::NEG_INFINITY; 3];
    for p in mesh.vertices() {
        for i in 0..3 {
            lo[i] = lo[i].min(p[i]);
            hi[i] = hi[i].max(p[i]);
        }
    }
    let chi = mesh.euler_characteristic();
    let components = mesh.component_count();
    let genus = (mesh.is_closed() && components == 1).then(|| (2 - chi) / 2);
    Ok(json!({
        "vertices": mesh.vertex_count(),
        "faces": mesh.face_count(),
        "edges": mesh.edges().len(),
        "boundary_vertices": mesh.boundary_vertex_count(),
        "closed": mesh.is_closed(),
        "components": components,
        "euler_characteristic": chi,
        "genus": genus,
        "dropped_faces": mesh.dropped_faces(),
        "total_area": mesh.total_area(),
        "bounding_box": { "min": lo, "max": hi },
    }))
}

struct Operators {
    stiffness: SparseSymmetricOperator,
    mass: SparseSymmetricOperator,
    weights: MetricWeights,
}

fn operators(mesh: &Mesh, metric: &MetricArgs) -> Result<Operators, CliError> {
    let curv = gaussian_curvature(mesh);
    let weights = metric_weights(&curv, metric.alpha, metric.epsilon)?;
    Ok(Operators {
        stiffness: assemble_stiffness(mesh),
        mass: assemble_mass(mesh, &weights)?,
        weights,
    })
}

fn eigen_options(solver: &SolverArgs) -> EigenOptions {
    EigenOptions {
        method: match solver.method {
            SolverMethod::Auto => EigenMethod::Auto,
            SolverMethod::ShiftInvert => EigenMethod::ShiftInvert,
            SolverMethod::Dense => EigenMethod::Dense,
        },
        tol: solver.tol,
        max_iterations: solver.max_iter,
        ..EigenOptions::default()
    }
}

fn basis(ops: &Operators, k: usize, solver: &SolverArgs, out: &mut Output) -> Result<SpectralBasis, CliError> {
    let opts = eigen_options(solver);
    Ok(out.timed("eigensolve", || {
        smallest_eigenpairs_with(&ops.stiffness, &ops.mass, k, &opts)
    })?)
}

fn curvature(a: &CurvatureArgs, ctx: &mut Context<'_>) -> Result<Value, CliError> {
    let mesh = &ctx.mesh;
    let curv = gaussian_curvature(mesh);
    let weights = metric_weights(&curv, a.metric.alpha, a.metric.epsilon)?;
    let mass = assemble_mass(mesh, &weights)?;
    let rows: Vec<Vec<String>> = (0..mesh.vertex_count())
        .map(|v| {
            vec![
                v.to_string(),
                num(curv.values[v]),
                num(curv.vertex_areas[v]),
                num(curv.angle_defects[v]),
                num(weights.weights[v]),
                num(mass.diagonal()[v]),
            ]
        })
        .collect();
    ctx.out.table(
        "curvature.csv",
        &[
            "vertex",
            "gaussian_curvature",
            "vertex_area",
            "angle_defect",
            "weight",
            "mass",
        ],
        &rows,
    )?;
    let total = curv.total_curvature();
    let expected = 2.0 * PI * mesh.euler_characteristic() as f64;
    let range = |xs: &[f64]| {
        let lo = xs.iter().copied().fold(f64::INFINITY, f64::min);
        let hi = xs.iter().copied().fold(f64::NEG_INFINITY, f64::max);
        json!({ "min": lo, "max": hi })
    };
    Ok(json!({
        "vertices": mesh.vertex_count(),
        "total_curvature": total,
        "euler_characteristic": mesh.euler_characteristic(),
        "gauss_bonnet_target": expected,
        "gauss_bonnet_relative_gap": mesh.is_closed().then(|| (total - expected).abs() / expected.abs().max(1.0)),
        "curvature": range(&curv.values),
        "weights": range(&weights.weights),
        "area_scale": weights.area_scale,
        "total_mass": mass.trace(),
    }))
}

fn eigs(a: &EigsArgs, ctx: &mut Context<'_>) -> Result<Value, CliError> {
    let ops = operators(&ctx.mesh, &a.metric)?;
    let basis = basis(&ops, a.k, &a.solver, ctx.out)?;
    let residuals = basis.residuals(&ops.stiffness);
    let rows: Vec<Vec<String>> = basis
        .eigenvalues
        .iter()
        .zip(&residuals)
        .enumerate()
        .map(|(i, (l, r))| vec![i.to_string(), num(*l), num(*r)])
        .collect();
    ctx.out
        .table("eigenvalues.csv", &["index", "eigenvalue", "residual"], &rows)?;
    let vectors = ctx.out.matrix("eigenvectors", &basis.eigenvectors, a.matrix_format)?;
    Ok(json!({
        "vertices": basis.vertex_count(),
        "k": basis.len(),
        "alpha": ops.weights.alpha,
        "eigenvalues": basis.eigenvalues,
        "max_residual": residuals.iter().copied().fold(0.0, f64::max),
        "orthonormality_defect": basis.orthonormality_defect(),
        "eigenvectors_file": vectors,
    }))
}

fn named_field(mesh: &Mesh, spec: &str) -> Result<Vec<(String, Vec<f64>)>, CliError> {
    let [x, y, z] = mesh.coordinate_fields();
    match spec {
        "x" => Ok(vec![("x".into(), x)]),
        "y" => Ok(vec![("y".into(), y)]),
        "z" => Ok(vec![("z".into(), z)]),
        path => {
            let m = load_matrix(path)?;
            if m.nrows() != mesh.vertex_count() {
                return Err(CliError::Usage(format!(
                    "'{path}' has {} rows but the mesh has {} vertices",
                    m.nrows(),
                    mesh.vertex_count()
                )));
            }
            Ok(m.column_iter()
                .enumerate()
                .map(|(j, c)| (format!("{path}#{j}"), c.iter().copied().collect()))
                .collect())
        }
    }
}

fn bound(a: &BoundCheckArgs, ctx: &mut Context<'_>) -> Result<Value, CliError> {
    let n_vertices = ctx.mesh.vertex_count();
    let mut fields = Vec::new();
    let mut rng = ChaCha8Rng::seed_from_u64(ctx.seed);
    for i in 0..a.random {
        let f: Vec<f64> = (0..n_vertices).map(|_| rng.random_range(-1.0..1.0)).collect();
        fields.push((format!("random#{i}"), f));
    }
    for spec in &a.fields {
        fields.extend(named_field(&ctx.mesh, spec)?);
    }
    if fields.is_empty() {
        return Err(CliError::Usage("no fields given (use --random N or --field)".into()));
    }
    let k = a.k.unwrap_or(a.n + 1);
    let ops = operators(&ctx.mesh, &a.metric)?;
    let basis = basis(&ops, k, &a.solver, ctx.out)?;
    let mut results = Vec::with_capacity(fields.len());
    let mut max_ratio: Option<f64> = None;
    for (name, f) in fields {
        let f = DVector::from_vec(f);
        match bound_check(&f, &ops.stiffness, &basis, a.n) {
            Ok(r) => {
                max_ratio = Some(max_ratio.map_or(r.ratio, |m| m.max(r.ratio)));
                results.push(json!({
                    "field": name,
                    "residual_sq": r.residual_sq,
                    "dirichlet": r.dirichlet,
                    "ratio": r.ratio,
                    "holds": r.ratio <= 1.0 + BOUND_SLACK,
                }));
            }
            Err(Error::ConstantFunction) => results.push(json!({ "field": name, "skipped": "constant-function" })),
            Err(e) => return Err(e.into()),
        }
    }
    Ok(json!({
        "n": a.n,
        "k": basis.len(),
        "lambda_next": basis.eigenvalues[a.n],
        "fields": results,
        "max_ratio": max_ratio,
        "all_hold": max_ratio.is_none_or(|m| m <= 1.0 + BOUND_SLACK),
    }))
}

fn audit(a: &AuditArgs, ctx: &mut Context<'_>) -> Result<Value, CliError> {
    let n_vertices = ctx.mesh.vertex_count();
    let k = a.k.unwrap_or(3 * a.n + 1).max(a.n + 1).min(n_vertices);
    let ops = operators(&ctx.mesh, &a.metric)?;
    let basis = basis(&ops, k, &a.solver, ctx.out)?;
    if a.n == 0 || a.n >= basis.len() {
        return Err(Error::InvalidCount {
            count: a.n,
            expected: format!("1..{}", basis.len()),
        }
        .into());
    }
    let own = basis.eigenvectors.columns(0, a.n).into_owned();
    let eigen_ratio = optimality_audit(&basis, &own)?;
    let sampler = match a.sampler {
        Sampler::Noise => RivalSampler::VertexNoise,
        Sampler::Spectral => RivalSampler::SpectralMix,
    };
    let summary = ctx.out.timed("audit", || {
        random_rival_audit(&basis, a.n, a.trials, sampler, !a.no_constant, ctx.seed)
    })?;
    let user = match &a.rival {
        Some(path) => {
            let rival = load_matrix(path)?;
            if rival.nrows() != n_vertices || rival.ncols() != a.n {
                return Err(CliError::Usage(format!(
                    "rival '{path}' must be {n_vertices} x {}, got {} x {}",
                    a.n,
                    rival.nrows(),
                    rival.ncols()
                )));
            }
            match optimality_audit(&basis, &rival) {
                Ok(r) => json!({ "file": path, "ratio": r }),
                Err(Error::ConstantFunction) => json!({ "file": path, "ratio": null, "unbounded": true }),
                Err(e) => return Err(e.into()),
            }
        }
        None => Value::Null,
    };
    let ratios = &summary.ratios;
    let mean = (!ratios.is_empty()).then(|| ratios.iter().sum::<f64>() / ratios.len() as f64);
    Ok(json!({
        "n": a.n,
        "k": basis.len(),
        "lambda_next": basis.eigenvalues[a.n],
        "eigenbasis_ratio": eigen_ratio,
        "trials": summary.trials,
        "bounded": ratios.len(),
        "unbounded": summary.unbounded,
        "min_ratio": summary.min_ratio(),
        "max_ratio": ratios.iter().copied().reduce(f64::max),
        "mean_ratio": mean,
        "violations": ratios.iter().filter(|&&r| r < 1.0 - AUDIT_SLACK).count(),
        "ratios": ratios,
        "user_rival": user,
    }))
}

fn samples(
    mesh: &Mesh,
    count: Option<usize>,
    explicit: &[usize],
    start: usize,
    opts: &GeodesicOptions,
    out: &mut Output,
) -> Result<SampleSet, CliError> {
    if !explicit.is_empty() {
        return Ok(SampleSet::explicit(explicit.to_vec(), mesh.vertex_count())?);
    }
    let p = count.unwrap_or(1);
    Ok(out.timed("sampling", || farthest_point_sample_geodesic(mesh, p, start, opts))?)
}

fn sample_table(out: &mut Output, set: &SampleSet) -> Result<(), CliError> {
    let rows: Vec<Vec<String>> = set
        .indices
        .iter()
        .enumerate()
        .map(|(i, v)| vec![i.to_string(), v.to_string()])
        .collect();
    out.table("samples.csv", &["order", "vertex"], &rows)
}

fn geodesic(a: &GeodesicArgs, ctx: &mut Context<'_>) -> Result<Value, CliError> {
    let opts = GeodesicOptions { refine: a.refine };
    let set = samples(&ctx.mesh, a.samples, &a.sources, a.start, &opts, ctx.out)?;
    let fields = ctx.out.timed("distances", || distance_rows(&ctx.mesh, &set, &opts))?;
    let file = ctx.out.matrix("distances", &fields.fields, a.matrix_format)?;
    sample_table(ctx.out, &set)?;
    let block = fields.sample_block();
    let asymmetry = (&block - block.transpose()).amax();
    let rows: Vec<Vec<f64>> = fields.fields.row_iter().map(|r| r.iter().copied().collect()).collect();
    Ok(json!({
        "vertices": fields.vertex_count(),
        "sample_count": fields.sample_count(),
        "sources": set.indices,
        "refine": a.refine,
        "max_distance": fields.max_distance(),
        "covering_radius": covering_radius(rows.iter().map(Vec::as_slice)),
        "block_asymmetry": asymmetry,
        "distances_file": file,
    }))
}

fn symmetric_all_pairs(mesh: &Mesh, opts: &GeodesicOptions) -> Result<DMatrix<f64>, CliError> {
    let d = all_pairs(mesh, opts)?;
    Ok((&d + d.transpose()) * 0.5)
}

fn canonical(a: &CanonicalArgs, ctx: &mut Context<'_>) -> Result<Value, CliError> {
    let opts = GeodesicOptions { refine: a.refine };
    let mesh = &ctx.mesh;
    let out = &mut *ctx.out;
    let (embedding, details) = match a.mds {
        MdsMethod::Classical => {
            let d = out.timed("distances", || symmetric_all_pairs(mesh, &opts))?;
            let e = out.timed("embed", || classical_mds(&d, a.m))?;
            let details = json!({ "stress": e.stress, "sampled_stress": null });
            (e, details)
        }
        MdsMethod::Spectral => {
            let set = samples(mesh, Some(a.samples), &[], a.start, &opts, out)?;
            sample_table(out, &set)?;
            let fields = out.timed("distances", || distance_rows(mesh, &set, &opts))?;
            let ops = operators(mesh, &a.metric)?;
            let basis = basis(&ops, a.k, &a.solver, out)?;
            let eta = match a.eta {
                Some(eta) => eta,
                None => default_eta(&fields, &basis)?,
            };
            let coeffs = out.timed("fit", || fit_coefficients(&fields, &basis, eta))?;
            let e = out.timed("embed", || spectral_mds(&coeffs, &basis, a.m))?;
            let sampled = sampled_stress(&e.coords, &fields)?;
            let full = if a.no_full_stress {
                None
            } else {
                let d = out.timed("stress", || symmetric_all_pairs(mesh, &opts))?;
                Some(stress(&e.coords, &d)?)
            };
            let details = json!({
                "stress": full,
                "sampled_stress": sampled,
                "samples": set.indices,
                "k": basis.len(),
                "eta": coeffs.eta,
                "solver_iterations": coeffs.iterations,
            });
            (e, details)
        }
    };
    let coords = &embedding.coords;
    out.matrix("embedding", coords, MatrixFormat::Csv)?;
    let positions = (0..coords.nrows())
        .map(|r| {
            let c = |j: usize| if j < coords.ncols() { coords[(r, j)] } else { 0.0 };
            Point3::new(c(0), c(1), c(2))
        })
        .collect();
    out.off("embedding.off", &mesh.with_positions(positions)?)?;
    let mut result = json!({
        "mds": a.mds,
        "vertices": mesh.vertex_count(),
        "m": a.m,
        "eigenvalues": embedding.eigenvalues,
    });
    if let (Value::Object(r), Value::Object(d)) = (&mut result, details) {
        r.extend(d);
    }
    Ok(result)
}

/// `lo:hi:steps` (log spaced) or a single value.
fn parse_mu(spec: &str) -> Result<Vec<f64>, CliError> {
    let bad = || CliError::Usage(format!("bad --mu '{spec}': expected a value or lo:hi:steps"));
    let parts: Vec<&str> = spec.split(':').collect();
    match parts.as_slice() {
        [v] => Ok(vec![v.parse().map_err(|_| bad())?]),
        [lo, hi, steps] => {
            let lo: f64 = lo.parse().map_err(|_| bad())?;
            let hi: f64 = hi.parse().map_err(|_| bad())?;
            let steps: usize = steps.parse().map_err(|_| bad())?;
            if !(lo > 0.0 && hi > 0.0 && lo.is_finite() && hi.is_finite()) || steps == 0 {
                return Err(CliError::Usage(format!(
                    "bad --mu sweep '{spec}': bounds must be positive and steps at least 1"
                )));
            }
            Ok(log_sweep(lo, hi, steps))
        }
        _ => Err(bad()),
    }
}

fn weighted_relative_error(f: &[f64], g: &[f64], mass: &[f64]) -> (f64, f64) {
    let err: f64 = f.iter().zip(g).zip(mass).map(|((a, b), w)| w * (a - b).powi(2)).sum();
    let norm: f64 = f.iter().zip(mass).map(|(a, w)| w * a * a).sum();
    (err, norm)
}

fn rpca(a: &RpcaArgs, ctx: &mut Context<'_>) -> Result<Value, CliError> {
    let mesh = &ctx.mesh;
    let n = mesh.vertex_count();
    let mut columns = Vec::new();
    for spec in &a.data {
        columns.extend(load_fields(spec, mesh)?);
    }
    let data = DataMatrix::from_columns(&columns, n)?;
    let mut shapes = Vec::new();
    for spec in a.data.iter().chain(&a.target) {
        if is_mesh_spec(spec) {
            shapes.push((spec.clone(), load_fields(spec, mesh)?));
        } else if a.target.contains(spec) {
            return Err(CliError::Usage(format!("target '{spec}' must be a mesh")));
        }
    }
    let ops = operators(mesh, &a.metric)?;
    let values = parse_mu(&a.mu)?;
    let scale = mu_scale(&data, &ops.stiffness, &ops.mass)?;
    let mus: Vec<f64> = if a.calibrated {
        values.iter().map(|v| v * scale).collect()
    } else {
        values.clone()
    };
    let opts = RpcaOptions {
        method: match a.solver {
            RpcaSolver::Auto => RpcaMethod::Auto,
            RpcaSolver::Dense => RpcaMethod::Dense,
            RpcaSolver::ShiftInvert => RpcaMethod::ShiftInvert,
        },
        seed: RpcaOptions::default().seed ^ ctx.seed,
        ..RpcaOptions::default()
    };
    let bases = ctx.out.timed("rpca", || {
        regularized_sweep(&data, &ops.stiffness, &ops.mass, &mus, a.m, &opts)
    })?;
    let mass = ops.mass.diagonal();
    let mut rows = Vec::with_capacity(bases.len());
    let mut sweep = Vec::with_capacity(bases.len());
    for (i, b) in bases.iter().enumerate() {
        let mu_hat = if scale > 0.0 { b.mu / scale } else { 0.0 };
        let dirichlet = b.dirichlet_energy.unwrap_or_default();
        rows.push(vec![
            i.to_string(),
            num(b.mu),
            num(mu_hat),
            num(b.projection_error),
            num(dirichlet),
            num(b.objective()),
        ]);
        let file = ctx.out.matrix(&format!("basis_{i:02}"), &b.p, a.matrix_format)?;
        let mut recon = Vec::with_capacity(shapes.len());
        for (j, (spec, fields)) in shapes.iter().enumerate() {
            let mut err = 0.0;
            let mut norm = 0.0;
            let mut coords = Vec::with_capacity(3);
            for f in fields {
                let g = reconstruct(f, b, &ops.mass)?;
                let (e, q) = weighted_relative_error(f, &g, mass);
                err += e;
                norm += q;
                coords.push(g);
            }
            let positions = (0..n)
                .map(|v| Point3::new(coords[0][v], coords[1][v], coords[2][v]))
                .collect();
            let name = format!("recon_{i:02}_{j:02}.off");
            ctx.out.off(&name, &mesh.with_positions(positions)?)?;
            recon.push(json!({
                "source": spec,
                "training": a.data.contains(spec),
                "relative_error": (err / norm).sqrt(),
                "file": name,
            }));
        }
        sweep.push(json!({
            "mu": b.mu,
            "mu_hat": mu_hat,
            "projection_error": b.projection_error,
            "dirichlet_energy": dirichlet,
            "objective": b.objective(),
            "theta": b.theta,
            "orthonormality_defect": b.orthonormality_defect(&ops.mass),
            "basis_file": file,
            "reconstructions": recon,
        }));
    }
    ctx.out.table(
        "objective.csv",
        &[
            "index",
            "mu",
            "mu_hat",
            "projection_error",
            "dirichlet_energy",
            "objective",
        ],
        &rows,
    )?;
    Ok(json!({
        "vertices": n,
        "data_columns": data.len(),
        "m": a.m,
        "alpha": ops.weights.alpha,
        "mu_scale": scale,
        "calibrated": a.calibrated,
        "sweep": sweep,
    }))
}
