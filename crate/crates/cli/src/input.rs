//! Mesh sources and field files.

use std::path::Path;

use eigenshape::matrix_io::{load_csv, load_spmx};
use eigenshape::mesh::{load_mesh, shapes, Mesh, MeshFormat};
use nalgebra::DMatrix;

use crate::error::CliError;

const BUILTINS: &str = "builtin:triangle, builtin:tetrahedron, builtin:icosahedron, \
builtin:icosphere:S, builtin:grid:N, builtin:grid:NX:NY, builtin:perturbed:S:AMP:SEED";

fn param<T: std::str::FromStr>(spec: &str, token: Option<&str>) -> Result<T, CliError> {
    token
        .and_then(|t| t.parse().ok())
        .ok_or_else(|| CliError::Usage(format!("bad builtin mesh '{spec}'; known: {BUILTINS}")))
}

fn builtin(spec: &str, rest: &str) -> Result<Mesh, CliError> {
    let mut parts = rest.split(':');
    let name = parts.next().unwrap_or_default();
    let mut next = || parts.next();
    let mesh = match name {
        "triangle" => shapes::single_triangle(),
        "tetrahedron" => shapes::tetrahedron(1.0),
        "icosahedron" => shapes::icosahedron(),
        "icosphere" => {
            let s: u32 = param(spec, next())?;
            if s > 7 {
                return Err(CliError::Usage(format!(
                    "icosphere subdivision {s} is too large (max 7)"
                )));
            }
            shapes::icosphere(s)
        }
        "grid" => {
            let nx: usize = param(spec, next())?;
            let ny = match next() {
                Some(t) => param(spec, Some(t))?,
                None => nx,
            };
            if nx == 0 || ny == 0 {
                return Err(CliError::Usage("grid needs at least one cell per side".into()));
            }
            shapes::grid(nx, ny, 1.0, 1.0)
        }
        "perturbed" => {
            let s: u32 = param(spec, next())?;
            let amp: f64 = param(spec, next())?;
            let seed: u64 = param(spec, next())?;
            if s > 7 || !(0.0..1.0).contains(&amp) {
                return Err(CliError::Usage(format!("bad perturbed sphere parameters in '{spec}'")));
            }
            shapes::perturbed_sphere(s, amp, seed)
        }
        _ => {
            return Err(CliError::Usage(format!(
                "unknown builtin mesh '{spec}'; known: {BUILTINS}"
            )))
        }
    };
    if parts.next().is_some() {
        return Err(CliError::Usage(format!("too many parameters in '{spec}'")));
    }
    Ok(mesh)
}

pub fn is_mesh_spec(spec: &str) -> bool {
    spec.starts_with("builtin:") || MeshFormat::from_path(Path::new(spec)).is_some()
}

pub fn load_mesh_spec(spec: &str) -> Result<Mesh, CliError> {
    if let Some(rest) = spec.strip_prefix("builtin:") {
        return builtin(spec, rest);
    }
    let path = Path::new(spec);
    let format = MeshFormat::from_path(path)
        .ok_or_else(|| CliError::Usage(format!("cannot tell the mesh format of '{spec}' (use .off or .obj)")))?;
    Ok(load_mesh(path, format)?)
}

/// Field matrix (one column per field) from a CSV or SPMX file.
pub fn load_matrix(spec: &str) -> Result<DMatrix<f64>, CliError> {
    let path = Path::new(spec);
    match path.extension().and_then(|e| e.to_str()) {
        Some("spmx") => Ok(load_spmx(path)?),
        Some("csv") => Ok(load_csv(path)?.1),
        _ => Err(CliError::Usage(format!(
            "cannot tell the matrix format of '{spec}' (use .csv or .spmx)"
        ))),
    }
}

/// Fields for `spec`: a mesh sharing `mesh`'s connectivity contributes its
/// three coordinate columns, a matrix file its columns.
pub fn load_fields(spec: &str, mesh: &Mesh) -> Result<Vec<Vec<f64>>, CliError> {
    let n = mesh.vertex_count();
    if is_mesh_spec(spec) {
        let other = load_mesh_spec(spec)?;
        if other.vertex_count() != n || other.faces() != mesh.faces() {
            return Err(CliError::Usage(format!(
                "'{spec}' does not share the connectivity of the base mesh"
            )));
        }
        return Ok(other.coordinate_fields().to_vec());
    }
    let m = load_matrix(spec)?;
    if m.nrows() != n {
        return Err(CliError::Usage(format!(
            "'{spec}' has {} rows but the mesh has {n} vertices",
            m.nrows()
        )));
    }
    Ok(m.column_iter().map(|c| c.iter().copied().collect()).collect())
}
