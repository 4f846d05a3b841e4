//! End-to-end runs of the `pdmd` binary: pipeline flows, exit codes and
//! output determinism.

use std::path::{Path, PathBuf};
use std::process::{Command, Output};

fn pdmd(dir: &Path, args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_pdmd"))
        .current_dir(dir)
        .args(args)
        .output()
        .expect("binary runs")
}

fn assert_ok(out: &Output) {
    assert!(
        out.status.success(),
        "expected success, got {:?}\nstdout: {}\nstderr: {}",
        out.status.code(),
        String::from_utf8_lossy(&out.stdout),
        String::from_utf8_lossy(&out.stderr)
    );
}

fn assert_code(out: &Output, code: i32) {
    assert_eq!(
        out.status.code(),
        Some(code),
        "stdout: {}\nstderr: {}",
        String::from_utf8_lossy(&out.stdout),
        String::from_utf8_lossy(&out.stderr)
    );
}

fn stdout(out: &Output) -> String {
    String::from_utf8_lossy(&out.stdout).into_owned()
}

/// Small toy archive shared by several tests.
fn toy_archive(dir: &Path) -> PathBuf {
    let path = dir.join("toy");
    let out = pdmd(
        dir,
        &[
            "generate",
            "toy",
            "--space-samples",
            "100",
            "--time-samples",
            "65",
            "--out",
            path.to_str().unwrap(),
        ],
    );
    assert_ok(&out);
    path
}

#[test]
fn toy_pipeline_reaches_analytic_accuracy() {
    let dir = tempfile::tempdir().unwrap();
    let archive = toy_archive(dir.path());

    let model = dir.path().join("model");
    let out = pdmd(
        dir.path(),
        &[
            "train",
            archive.to_str().unwrap(),
            "--variant",
            "monolithic",
            "--pod-rank",
            "2",
            "--svd-rank",
            "2",
            "--out",
            model.to_str().unwrap(),
        ],
    );
    assert_ok(&out);
    // reported spectrum: 2 eigenvalues, both on the unit circle at 1e-6
    assert!(stdout(&out).contains("2 eigenvalues, 2 on the unit circle"));

    // analytic truth for untested parameters over the doubled window, at the
    // training dt (the generate subcommand always spans [0, 4 pi])
    let truth = dir.path().join("truth");
    {
        use pdmd::benchmarks::toy::{truth as toy_truth, ToySpec};
        use pdmd::store::{ParameterPoint, ParametricSnapshotSet, SnapshotMatrix, TimeAxis};
        let spec = ToySpec { space_samples: 100, time_samples: 65, parameters: vec![] };
        let axis = TimeAxis::new(0.0, spec.time_axis().unwrap().dt(), 129, 0).unwrap();
        let members = [0.375, 0.525, 0.875]
            .iter()
            .map(|&mu| {
                let mut values = ndarray::Array2::zeros((100, 129));
                for k in 0..129 {
                    values.column_mut(k).assign(&toy_truth(&spec, mu, k as i64).unwrap());
                }
                SnapshotMatrix::new(ParameterPoint::from(mu), values)
            })
            .collect();
        let set = ParametricSnapshotSet::new(axis, "toy", members).unwrap();
        pdmd::store::write_archive(&set, &truth).unwrap();
    }

    let csv = dir.path().join("e.csv");
    let out = pdmd(
        dir.path(),
        &[
            "validate",
            model.to_str().unwrap(),
            truth.to_str().unwrap(),
            "--labels",
            "65..128",
            "--regressor",
            "linear",
            "--out",
            csv.to_str().unwrap(),
        ],
    );
    assert_ok(&out);
    let table = std::fs::read_to_string(&csv).unwrap();
    let mut rows = 0;
    for line in table.lines().skip(1) {
        let e_i: f64 = line.split(',').nth(2).unwrap().parse().unwrap();
        assert!(e_i < 1e-6, "row {line}");
        rows += 1;
    }
    assert_eq!(rows, 64);
    assert!(csv.with_file_name("e.by-parameter.csv").is_file());
}

#[test]
fn predict_matches_training_snapshots_and_writes_coefficients() {
    let dir = tempfile::tempdir().unwrap();
    let archive = toy_archive(dir.path());
    let model = dir.path().join("model");
    assert_ok(&pdmd(
        dir.path(),
        &[
            "train",
            archive.to_str().unwrap(),
            "--variant",
            "partitioned",
            "--pod-rank",
            "2",
            "--svd-rank",
            "2",
            "--out",
            model.to_str().unwrap(),
        ],
    ));
    let forecast = dir.path().join("forecast");
    assert_ok(&pdmd(
        dir.path(),
        &[
            "predict",
            model.to_str().unwrap(),
            "--mu",
            "0.3",
            "--labels",
            "10..12",
            "--out",
            forecast.to_str().unwrap(),
        ],
    ));
    // forecast archive is readable and matches the training member at mu=0.3
    let forecast_set = pdmd::store::read_archive(&forecast).unwrap();
    let training_set = pdmd::store::read_archive(&archive).unwrap();
    assert_eq!(forecast_set.member_count(), 1);
    assert_eq!(forecast_set.time_axis().label_origin(), 10);
    assert_eq!(forecast_set.time_axis().count(), 3);
    let predicted = forecast_set.members()[0].values();
    let expected = training_set.members()[3].values();
    for k in 0..3 {
        let mut err = 0.0;
        let mut norm = 0.0;
        for i in 0..predicted.nrows() {
            err += (predicted[[i, k]] - expected[[i, k + 10]]).norm_sqr();
            norm += expected[[i, k + 10]].norm_sqr();
        }
        assert!((err / norm).sqrt() < 1e-8);
    }
    let coeffs = std::fs::read_to_string(forecast.join("reduced_coefficients.csv")).unwrap();
    assert!(coeffs.starts_with("label,time,coeff_index,re,im"));
    assert_eq!(coeffs.lines().count(), 1 + 3 * 2); // header + 2 coefficients x 3 labels
}

#[test]
fn hodmd_depth_zero_is_a_usage_error() {
    let dir = tempfile::tempdir().unwrap();
    let archive = toy_archive(dir.path());
    let out = pdmd(
        dir.path(),
        &[
            "train",
            archive.to_str().unwrap(),
            "--variant",
            "monolithic",
            "--pod-rank",
            "2",
            "--hodmd-depth",
            "0",
            "--out",
            dir.path().join("m").to_str().unwrap(),
        ],
    );
    assert_code(&out, 2);
}

#[test]
fn info_on_an_empty_directory_exits_2() {
    let dir = tempfile::tempdir().unwrap();
    let empty = dir.path().join("empty");
    std::fs::create_dir(&empty).unwrap();
    let out = pdmd(dir.path(), &["info", empty.to_str().unwrap()]);
    assert_code(&out, 2);
}

#[test]
fn info_describes_archives_and_models() {
    let dir = tempfile::tempdir().unwrap();
    let archive = toy_archive(dir.path());
    let out = pdmd(dir.path(), &["info", archive.to_str().unwrap()]);
    assert_ok(&out);
    let text = stdout(&out);
    assert!(text.contains("p=10 m=100 N=65"), "{text}");
    assert!(text.contains("complex"), "{text}");

    let model = dir.path().join("model");
    assert_ok(&pdmd(
        dir.path(),
        &[
            "train",
            archive.to_str().unwrap(),
            "--variant",
            "monolithic",
            "--pod-rank",
            "2",
            "--out",
            model.to_str().unwrap(),
        ],
    ));
    let out = pdmd(dir.path(), &["info", model.to_str().unwrap()]);
    assert_ok(&out);
    let text = stdout(&out);
    assert!(text.contains("monolithic model"), "{text}");
    assert!(text.contains("eigenvalues"), "{text}");
}

#[test]
fn extrapolation_is_a_computational_error_with_hull_description() {
    let dir = tempfile::tempdir().unwrap();
    let archive = toy_archive(dir.path());
    let model = dir.path().join("model");
    assert_ok(&pdmd(
        dir.path(),
        &[
            "train",
            archive.to_str().unwrap(),
            "--variant",
            "monolithic",
            "--pod-rank",
            "2",
            "--out",
            model.to_str().unwrap(),
        ],
    ));
    let out = pdmd(
        dir.path(),
        &[
            "predict",
            model.to_str().unwrap(),
            "--mu",
            "1.5", // outside [0, 0.9]
            "--labels",
            "5..6",
            "--out",
            dir.path().join("f").to_str().unwrap(),
        ],
    );
    assert_code(&out, 1);
    let err = String::from_utf8_lossy(&out.stderr).into_owned();
    assert!(err.contains("outside the training region"), "{err}");
}

#[test]
fn sensitivity_outputs_are_byte_identical_across_runs() {
    let dir = tempfile::tempdir().unwrap();
    let archive = toy_archive(dir.path());
    let truth = dir.path().join("truth");
    assert_ok(&pdmd(
        dir.path(),
        &[
            "generate",
            "toy",
            "--space-samples",
            "100",
            "--time-samples",
            "65",
            "--mus",
            "0.22,0.67",
            "--out",
            truth.to_str().unwrap(),
        ],
    ));
    let run = |out: &Path| {
        assert_ok(&pdmd(
            dir.path(),
            &[
                "--seed",
                "11",
                "sensitivity",
                archive.to_str().unwrap(),
                "--mode",
                "parameter",
                "--truth",
                truth.to_str().unwrap(),
                "--variant",
                "monolithic",
                "--pod-rank",
                "2",
                "--svd-rank",
                "2",
                "--initial-size",
                "3",
                "--steps",
                "4",
                "--probe-label",
                "50",
                "--regressors",
                "linear,nearest",
                "--out",
                out.to_str().unwrap(),
            ],
        ));
        std::fs::read(out).unwrap()
    };
    let a = run(&dir.path().join("a.csv"));
    let b = run(&dir.path().join("b.csv"));
    assert_eq!(a, b, "identical invocations must produce byte-identical CSV");
    let text = String::from_utf8(a).unwrap();
    assert!(text.starts_with("# seed=11\n"), "{text}");
    // one row per (step, regressor)
    assert_eq!(text.lines().filter(|l| !l.starts_with('#')).count(), 1 + 5 * 2);
    // toy + linear: every subset of >= 2 parameters is exact
    for line in text.lines().skip(3) {
        let mut fields = line.split(',');
        let (_, _, kind, e_i) = (
            fields.next().unwrap(),
            fields.next().unwrap(),
            fields.next().unwrap(),
            fields.next().unwrap().parse::<f64>().unwrap(),
        );
        if kind == "linear" {
            assert!(e_i < 1e-6, "{line}");
        }
    }
}

#[test]
fn generate_synthetic_stable_dataset() {
    let dir = tempfile::tempdir().unwrap();
    let out_dir = dir.path().join("synthetic");
    let out = pdmd(
        dir.path(),
        &[
            "generate",
            "synthetic",
            "--rho",
            "1.0",
            "--fraction",
            "0.0",
            "--out",
            out_dir.to_str().unwrap(),
        ],
    );
    assert_ok(&out);
    let set = pdmd::store::read_archive(&out_dir).unwrap();
    assert_eq!(set.member_count(), 1);
    assert_eq!(set.space_dim(), 8);
    // purely stable: plain DMD spectrum sits on the unit circle
    let model = pdmd::DmdModel::fit(
        set.members()[0].values().view(),
        &pdmd::dmd::DmdConfig::default(),
        0,
    )
    .unwrap();
    for l in model.eigenvalues() {
        assert!((l.norm() - 1.0).abs() < 1e-8);
    }
}

#[test]
fn generate_heat_smoke_test() {
    let dir = tempfile::tempdir().unwrap();
    let out_dir = dir.path().join("heat");
    let out = pdmd(
        dir.path(),
        &[
            "generate",
            "heat",
            "--params",
            "1",
            "--grid",
            "8",
            "--substeps",
            "2",
            "--out",
            out_dir.to_str().unwrap(),
        ],
    );
    assert_ok(&out);
    let set = pdmd::store::read_archive(&out_dir).unwrap();
    assert_eq!(set.member_count(), 1);
    assert_eq!(set.space_dim(), 64);
    assert_eq!(set.time_axis().count(), 101);
}

#[test]
fn forecast_scale_hook_yields_unit_error() {
    let dir = tempfile::tempdir().unwrap();
    let archive = toy_archive(dir.path());
    let model = dir.path().join("model");
    assert_ok(&pdmd(
        dir.path(),
        &[
            "train",
            archive.to_str().unwrap(),
            "--variant",
            "monolithic",
            "--pod-rank",
            "2",
            "--svd-rank",
            "2",
            "--out",
            model.to_str().unwrap(),
        ],
    ));
    let csv = dir.path().join("doubled.csv");
    assert_ok(&pdmd(
        dir.path(),
        &[
            "validate",
            model.to_str().unwrap(),
            archive.to_str().unwrap(),
            "--labels",
            "8..10",
            "--forecast-scale",
            "2.0",
            "--out",
            csv.to_str().unwrap(),
        ],
    ));
    let table = std::fs::read_to_string(&csv).unwrap();
    for line in table.lines().skip(1) {
        let e_i: f64 = line.split(',').nth(2).unwrap().parse().unwrap();
        assert!((e_i - 1.0).abs() < 1e-6, "{line}");
    }
}

#[test]
fn config_file_supplies_defaults_under_flags() {
    let dir = tempfile::tempdir().unwrap();
    let archive = toy_archive(dir.path());
    let config = dir.path().join("conf.json");
    std::fs::write(&config, r#"{"variant": "monolithic", "pod_rank": 2, "svd_rank": 2}"#)
        .unwrap();
    let model = dir.path().join("model");
    let out = pdmd(
        dir.path(),
        &[
            "--config",
            config.to_str().unwrap(),
            "train",
            archive.to_str().unwrap(),
            "--out",
            model.to_str().unwrap(),
        ],
    );
    assert_ok(&out);
    let reloaded = pdmd::parametric::read_model(&model).unwrap();
    assert_eq!(reloaded.variant(), pdmd::parametric::Variant::Monolithic);
    assert_eq!(reloaded.pod().rank(), 2);
    // explicit flag wins over the config value
    let model2 = dir.path().join("model2");
    let out = pdmd(
        dir.path(),
        &[
            "--config",
            config.to_str().unwrap(),
            "train",
            archive.to_str().unwrap(),
            "--variant",
            "partitioned",
            "--out",
            model2.to_str().unwrap(),
        ],
    );
    assert_ok(&out);
    let reloaded = pdmd::parametric::read_model(&model2).unwrap();
    assert_eq!(reloaded.variant(), pdmd::parametric::Variant::Partitioned);
}

#[test]
fn validate_rejects_uncovered_labels_as_usage() {
    let dir = tempfile::tempdir().unwrap();
    let archive = toy_archive(dir.path());
    let model = dir.path().join("model");
    assert_ok(&pdmd(
        dir.path(),
        &[
            "train",
            archive.to_str().unwrap(),
            "--variant",
            "monolithic",
            "--pod-rank",
            "2",
            "--out",
            model.to_str().unwrap(),
        ],
    ));
    let out = pdmd(
        dir.path(),
        &[
            "validate",
            model.to_str().unwrap(),
            archive.to_str().unwrap(),
            "--labels",
            "60..70", // archive stops at 64
            "--out",
            dir.path().join("x.csv").to_str().unwrap(),
        ],
    );
    assert_code(&out, 2);
}

#[test]
fn quiet_suppresses_informational_output() {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("toy");
    let out = pdmd(
        dir.path(),
        &[
            "--quiet",
            "generate",
            "toy",
            "--space-samples",
            "50",
            "--time-samples",
            "33",
            "--out",
            path.to_str().unwrap(),
        ],
    );
    assert_ok(&out);
    assert!(stdout(&out).is_empty());
}
