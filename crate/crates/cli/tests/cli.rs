use std::fs;
use std::path::Path;
use std::process::Command;

use eigenshape::matrix_io::{load_csv, load_spmx};
use serde_json::Value;

const BIN: &str = env!("CARGO_BIN_EXE_eigenshape");
const SPHERE: &str = "builtin:icosphere:2";

fn run(out: &Path, args: &[&str]) -> (i32, Value) {
    let status = Command::new(BIN)
        .arg("--out")
        .arg(out)
        .args(args)
        .output()
        .expect("binary runs");
    let text = fs::read_to_string(out.join("report.json")).expect("report written");
    (status.status.code().unwrap_or(-1), serde_json::from_str(&text).unwrap())
}

fn validate(report: &Value) {
    let schema: Value = serde_json::from_str(include_str!("../schema/report.schema.json")).expect("schema is JSON");
    let validator = jsonschema::validator_for(&schema).expect("schema compiles");
    let errors: Vec<String> = validator.iter_errors(report).map(|e| e.to_string()).collect();
    assert!(errors.is_empty(), "schema violations: {errors:?}\n{report:#}");
}

fn ok(args: &[&str]) -> Value {
    let dir = tempfile::tempdir().unwrap();
    let (code, report) = run(dir.path(), args);
    assert_eq!(code, 0, "{report:#}");
    assert_eq!(report["status"], "ok");
    validate(&report);
    report
}

#[test]
fn every_subcommand_writes_a_valid_report() {
    ok(&["--mesh", SPHERE, "info"]);
    ok(&["--mesh", SPHERE, "curvature", "--alpha", "0.5"]);
    ok(&["--mesh", SPHERE, "eigs", "--k", "9"]);
    ok(&[
        "--mesh",
        SPHERE,
        "bound-check",
        "--n",
        "5",
        "--random",
        "3",
        "--field",
        "x",
    ]);
    ok(&[
        "--mesh",
        SPHERE,
        "audit",
        "--n",
        "4",
        "--trials",
        "5",
        "--sampler",
        "noise",
    ]);
    ok(&["--mesh", SPHERE, "geodesic", "--sources", "0,7", "--refine"]);
    ok(&["--mesh", SPHERE, "canonical", "--samples", "20", "--k", "30"]);
    ok(&["--mesh", SPHERE, "canonical", "--mds", "classical"]);
    ok(&[
        "--mesh",
        SPHERE,
        "rpca",
        "--data",
        "builtin:perturbed:2:0.1:1",
        "builtin:perturbed:2:0.1:2",
        "--mu",
        "1e-2:1:2",
        "--calibrated",
        "--m",
        "3",
    ]);
}

#[test]
fn info_counts() {
    let r = ok(&["--mesh", "builtin:grid:4", "info"]);
    assert_eq!(r["result"]["vertices"], 25);
    assert_eq!(r["result"]["faces"], 32);
    assert_eq!(r["result"]["boundary_vertices"], 16);
    assert_eq!(r["result"]["closed"], false);
    assert_eq!(r["result"]["euler_characteristic"], 1);
}

#[test]
fn reports_are_byte_identical_across_runs() {
    let cases: [&[&str]; 3] = [
        &[
            "--mesh",
            SPHERE,
            "--seed",
            "7",
            "bound-check",
            "--n",
            "20",
            "--random",
            "10",
        ],
        &["--mesh", SPHERE, "--seed", "7", "audit", "--n", "6", "--trials", "10"],
        &[
            "--mesh",
            SPHERE,
            "--seed",
            "7",
            "canonical",
            "--samples",
            "15",
            "--k",
            "25",
        ],
    ];
    for args in cases {
        let a = tempfile::tempdir().unwrap();
        let b = tempfile::tempdir().unwrap();
        run(a.path(), args);
        run(b.path(), args);
        let ra = fs::read(a.path().join("report.json")).unwrap();
        let rb = fs::read(b.path().join("report.json")).unwrap();
        assert_eq!(ra, rb, "report differs for {args:?}");
    }
}

#[test]
fn input_errors_exit_one_with_an_error_report() {
    let dir = tempfile::tempdir().unwrap();
    let (code, report) = run(dir.path(), &["--mesh", "missing.off", "info"]);
    assert_eq!(code, 1);
    assert_eq!(report["error"]["kind"], "io");
    validate(&report);

    let (code, report) = run(dir.path(), &["--mesh", SPHERE, "curvature", "--alpha", "2"]);
    assert_eq!(code, 1);
    assert_eq!(report["error"]["kind"], "invalid-alpha");
    validate(&report);

    let (code, report) = run(dir.path(), &["--mesh", SPHERE, "eigs", "--k", "0"]);
    assert_eq!(code, 1);
    assert_eq!(report["error"]["kind"], "invalid-count");

    let (code, report) = run(dir.path(), &["info"]);
    assert_eq!(code, 1);
    assert_eq!(report["error"]["kind"], "usage");
}

#[test]
fn flag_errors_exit_one() {
    let status = Command::new(BIN).args(["eigs", "--bogus"]).output().unwrap();
    assert_eq!(status.status.code(), Some(1));
    let help = Command::new(BIN).arg("--help").output().unwrap();
    assert_eq!(help.status.code(), Some(0));
}

#[test]
fn numerical_failures_exit_two() {
    let dir = tempfile::tempdir().unwrap();
    let (code, report) = run(
        dir.path(),
        &[
            "--mesh",
            "builtin:icosphere:3",
            "eigs",
            "--k",
            "20",
            "--method",
            "shift-invert",
            "--max-iter",
            "1",
            "--tol",
            "1e-15",
        ],
    );
    assert_eq!(code, 2);
    assert_eq!(report["error"]["kind"], "convergence-failure");
    validate(&report);
}

#[test]
fn output_directory_from_the_environment() {
    let dir = tempfile::tempdir().unwrap();
    let status = Command::new(BIN)
        .env("EIGENSHAPE_OUT", dir.path())
        .args(["--mesh", SPHERE, "info"])
        .output()
        .unwrap();
    assert!(status.status.success());
    assert!(dir.path().join("report.json").exists());
    assert!(dir.path().join("timings.json").exists());
}

#[test]
fn spmx_and_csv_outputs_agree() {
    let a = tempfile::tempdir().unwrap();
    let b = tempfile::tempdir().unwrap();
    run(a.path(), &["--mesh", SPHERE, "geodesic", "--samples", "4"]);
    run(
        b.path(),
        &[
            "--mesh",
            SPHERE,
            "geodesic",
            "--samples",
            "4",
            "--matrix-format",
            "spmx",
        ],
    );
    let (_, csv) = load_csv(&a.path().join("distances.csv")).unwrap();
    let spmx = load_spmx(&b.path().join("distances.spmx")).unwrap();
    assert_eq!((spmx.nrows(), spmx.ncols()), (4, 162));
    assert_eq!(csv, spmx);
}

#[test]
fn rpca_reconstructs_training_shapes_exactly_in_full_dimension() {
    // three coordinate fields, m = 3: the PCA basis spans the data
    let r = ok(&[
        "--mesh",
        SPHERE,
        "rpca",
        "--data",
        "builtin:perturbed:2:0.2:4",
        "--m",
        "3",
    ]);
    let recon = &r["result"]["sweep"][0]["reconstructions"][0];
    assert!(recon["relative_error"].as_f64().unwrap() < 1e-10, "{recon}");
}

#[test]
fn canonical_writes_an_off_mesh() {
    let dir = tempfile::tempdir().unwrap();
    run(
        dir.path(),
        &["--mesh", SPHERE, "canonical", "--samples", "20", "--k", "30"],
    );
    let mesh =
        eigenshape::mesh::load_mesh(dir.path().join("embedding.off"), eigenshape::mesh::MeshFormat::Off).unwrap();
    assert_eq!(mesh.vertex_count(), 162);
}
