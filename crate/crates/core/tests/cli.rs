use std::path::Path;
use std::sync::Arc;

use q3d::cli::{build_wire_benchmark, main_with_args, precompute_tensors, sample_fields, RunConfig, VtkGrid, CSV_HEADER};
use q3d::spectral1d::{CacheStatus, ReferenceTensorSet};

fn coarse(out: &Path) -> RunConfig {
    let mut c = RunConfig::default();
    c.discretization.wire_nx = 2;
    c.discretization.wire_ny = 2;
    c.discretization.air_nx = 3;
    c.discretization.air_ny = 3;
    c.discretization.z_order = 4;
    c.discretization.cheb_order = 6;
    c.transient.n_steps = 2;
    c.transient.t_end_s = 0.08;
    c.transient.adapt.enabled = false;
    c.output.dir = out.to_path_buf();
    c.output.snapshot_dims = [3, 3, 5];
    c
}

fn csv_lines(dir: &Path) -> Vec<String> {
    std::fs::read_to_string(dir.join("energies.csv")).unwrap().lines().map(str::to_string).collect()
}

#[test]
fn precompute_is_idempotent() {
    let dir = tempfile::tempdir().unwrap();
    let first = precompute_tensors(dir.path(), 4, 6).unwrap();
    assert_eq!(first.status, CacheStatus::Built);
    let second = precompute_tensors(dir.path(), 4, 6).unwrap();
    assert_eq!(second.status, CacheStatus::Loaded);
    assert_eq!(first.checksum, second.checksum);
    std::fs::write(&first.path, b"garbage").unwrap();
    let third = precompute_tensors(dir.path(), 4, 6).unwrap();
    assert_eq!(third.status, CacheStatus::Rebuilt);
    assert_eq!(third.checksum, first.checksum);
}

#[test]
fn uniform_temperature_snapshot() {
    let config = coarse(Path::new("unused"));
    let refs = Arc::new(ReferenceTensorSet::build(4, 6).unwrap());
    let (model, _) = build_wire_benchmark(&config, refs).unwrap();
    let u = model.temperature_from_profile(|_| 7.5).unwrap();
    let a = vec![0.0; model.magnetic_dofs().len()];
    let grid = sample_fields(&model, &a, &u, [3, 4, 5], "uniform").unwrap();
    assert_eq!(grid.points.len(), 60);
    assert!(grid.scalar("temperature_K").unwrap().iter().all(|t| (t - 7.5).abs() < 1e-12));
    assert!(grid.scalar("B_abs_T").unwrap().iter().all(|b| *b == 0.0));
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("u.vtk");
    grid.write(&path).unwrap();
    let back = VtkGrid::read(&path).unwrap();
    assert_eq!(back.dims, [3, 4, 5]);
    assert!(back.scalar("temperature_K").unwrap().iter().all(|t| (t - 7.5).abs() < 1e-8));
}

// One test drives every subcommand so the cache variable is set only once.
#[test]
fn subcommands_and_exit_codes() {
    let root = tempfile::tempdir().unwrap();
    std::env::set_var("Q3D_CACHE_DIR", root.path().join("cache"));
    let out = root.path().join("out");
    let cfg_path = root.path().join("wire.json");
    std::fs::write(&cfg_path, coarse(&out).to_json().unwrap()).unwrap();
    let cfg = cfg_path.to_str().unwrap();

    assert_eq!(main_with_args(["q3d", "precompute-tensors", "--pmax", "4", "--mmax", "6"]), 0);
    assert_eq!(main_with_args(["q3d", "precompute-tensors", "--pmax", "4", "--mmax", "6"]), 0);

    assert_eq!(main_with_args(["q3d", "run", "--config", cfg]), 0);
    let lines = csv_lines(&out);
    assert_eq!(lines[0], CSV_HEADER);
    assert_eq!(lines.len(), 1 + 3);

    let zero = root.path().join("zero");
    assert_eq!(main_with_args(["q3d", "run", "--config", cfg, "--steps", "0", "--out", zero.to_str().unwrap()]), 0);
    let z = csv_lines(&zero);
    assert_eq!(z.len(), 2);
    assert_eq!(z[1], lines[1]);

    assert_eq!(main_with_args(["q3d", "export", "--step", "1", "--config", cfg]), 0);
    let grid = VtkGrid::read(&out.join("fields_step0001.vtk")).unwrap();
    assert_eq!(grid.dims, [3, 3, 5]);
    assert!(grid.scalar("temperature_K").unwrap().iter().all(|t| t.is_finite() && *t >= 1.9 - 1e-9));

    assert_eq!(main_with_args(["q3d", "export", "--step", "9", "--config", cfg]), 1);
    assert_eq!(main_with_args(["q3d", "run"]), 64);
    assert_eq!(main_with_args(["q3d", "frobnicate"]), 64);
    assert_eq!(main_with_args(["q3d", "run", "--config", root.path().join("missing.json").to_str().unwrap()]), 1);
    let bad = root.path().join("bad.json");
    std::fs::write(&bad, r#"{"transient": {"n_steps": "many"}}"#).unwrap();
    assert_eq!(main_with_args(["q3d", "run", "--config", bad.to_str().unwrap()]), 1);
}
