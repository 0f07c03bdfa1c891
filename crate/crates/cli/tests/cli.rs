use std::path::Path;
use std::process::{Command, Output};

use anharmonic_cli::{run, CliError, RunConfig, Task};

fn binary(config: &Path, out: &Path, extra: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_anharmonic"))
        .arg("--config")
        .arg(config)
        .arg("--out")
        .arg(out)
        .args(extra)
        .output()
        .expect("binary runs")
}

fn write(dir: &Path, name: &str, text: &str) -> std::path::PathBuf {
    let p = dir.join(name);
    std::fs::write(&p, text).unwrap();
    p
}

const EIGS: &str = r#"
task = "eigs"

[oscillator]
family = "polynomial_l"
a = 1
re_coeffs = [1.0]
im_coeffs = [0.0, 1.0]

[basis]
size = 96

[eigs]
count = 10
"#;

#[test]
fn eigs_run_writes_a_headed_csv() {
    let tmp = tempfile::tempdir().unwrap();
    let cfg = write(tmp.path(), "run.toml", EIGS);
    let out = tmp.path().join("out");
    let o = binary(&cfg, &out, &["--threads", "2"]);
    assert!(o.status.success(), "{}", String::from_utf8_lossy(&o.stderr));

    let csv = std::fs::read_to_string(out.join("eigs.csv")).unwrap();
    let mut lines = csv.lines();
    assert_eq!(lines.next(), Some("# schema: anharmonic-eigs v1"));
    assert_eq!(lines.next(), Some("n,re_lambda,im_lambda,trusted"));
    let rows: Vec<Vec<&str>> = lines.map(|l| l.split(',').collect()).collect();
    assert_eq!(rows.len(), 10);
    // x² + i x + 1 = (x + i/2)² + 5/4, so λ_n = 2n + 1/4 for n ≥ 1.
    for (k, r) in rows.iter().enumerate() {
        let re: f64 = r[1].parse().unwrap();
        let im: f64 = r[2].parse().unwrap();
        assert!((re - (2.0 * k as f64 + 2.25)).abs() < 1e-9 && im.abs() < 1e-9, "row {k}: {r:?}");
        assert_eq!(r[3], "true");
    }
    assert!(!out.join(".eigs.csv.tmp").exists());
}

#[test]
fn output_is_byte_identical_across_runs_and_thread_counts() {
    let tmp = tempfile::tempdir().unwrap();
    let text = EIGS.replace("task = \"eigs\"", "task = \"proj\"").replace("[eigs]\ncount = 10", "[proj]\ncount = 12");
    let cfg = write(tmp.path(), "run.toml", &text);
    let a = tmp.path().join("a");
    let b = tmp.path().join("b");
    assert!(binary(&cfg, &a, &["--threads", "1"]).status.success());
    assert!(binary(&cfg, &b, &["--threads", "4"]).status.success());
    for name in ["proj.csv", "proj_fit.json"] {
        assert_eq!(std::fs::read(a.join(name)).unwrap(), std::fs::read(b.join(name)).unwrap(), "{name}");
    }
    assert!(std::fs::read_to_string(a.join("proj.csv")).unwrap().starts_with("# schema: anharmonic-proj v1\n"));
}

#[test]
fn wrong_sign_of_leading_coefficient_exits_2_and_names_the_constraint() {
    let tmp = tempfile::tempdir().unwrap();
    let text = EIGS.replace("a = 1", "a = 2").replace("im_coeffs = [0.0, 1.0]", "im_coeffs = [0.0, 0.0, -1.0]");
    let cfg = write(tmp.path(), "run.toml", &text);
    let o = binary(&cfg, &tmp.path().join("out"), &[]);
    assert_eq!(o.status.code(), Some(2));
    let err = String::from_utf8_lossy(&o.stderr);
    assert!(err.contains("c_b"), "{err}");
}

#[test]
fn unknown_keys_and_bad_thread_counts_are_configuration_errors() {
    let tmp = tempfile::tempdir().unwrap();
    let cfg = write(tmp.path(), "run.toml", &EIGS.replace("size = 96", "size = 96\nsizee = 3"));
    let o = binary(&cfg, &tmp.path().join("out"), &[]);
    assert_eq!(o.status.code(), Some(2));
    assert!(String::from_utf8_lossy(&o.stderr).contains("sizee"));

    let good = write(tmp.path(), "good.toml", EIGS);
    let o = binary(&good, &tmp.path().join("out"), &["--threads", "0"]);
    assert_eq!(o.status.code(), Some(2));

    assert!(matches!(RunConfig::parse("task = \"pspec\"\n[oscillator]\nfamily = \"odd_imaginary\"\nb = 1\n"), Err(CliError::Config(_))));
    assert!(matches!(RunConfig::parse("task = \"verify\"\n[verify]\ncriteria = [15]\n"), Err(CliError::Config(_))));
}

#[test]
fn environment_thread_count_applies_only_without_the_flag() {
    let tmp = tempfile::tempdir().unwrap();
    let cfg = write(tmp.path(), "run.toml", EIGS);
    let run = |flag: &[&str]| {
        Command::new(env!("CARGO_BIN_EXE_anharmonic"))
            .env("ANHARMONIC_THREADS", "zero")
            .arg("--config")
            .arg(&cfg)
            .arg("--out")
            .arg(tmp.path().join("out"))
            .args(flag)
            .output()
            .unwrap()
    };
    assert_eq!(run(&[]).status.code(), Some(2));
    assert!(run(&["--threads", "1"]).status.success());
}

#[test]
fn configuration_round_trip_is_idempotent() {
    let texts = [
        EIGS.to_string(),
        "task = \"pspec\"\n[oscillator]\nfamily = \"even_imaginary\"\nb = 2.0\n[basis]\nsize = 64\n[pspec]\nnx = 4\nny = 3\n[pspec.rect]\nre_min = 1.0\nre_max = 9.0\nim_min = 0.5\nim_max = 6.0\n".to_string(),
        "task = \"gauge\"\n[gauge]\nn_max = 5\npoints = [[1.0, 0.5]]\n[gauge.spec]\nnu = 1.0\nrho = 0.5\n".to_string(),
    ];
    for t in texts {
        let first = RunConfig::parse(&t).unwrap();
        let once = first.to_toml();
        let second = RunConfig::parse(&once).unwrap();
        assert_eq!(first, second);
        assert_eq!(once, second.to_toml());
    }
}

#[test]
fn too_few_trusted_modes_exit_3_with_a_convergence_report() {
    let tmp = tempfile::tempdir().unwrap();
    let text = EIGS.replace("size = 96", "size = 24").replace("count = 10", "count = 24");
    let cfg = write(tmp.path(), "run.toml", &text);
    let out = tmp.path().join("out");
    let o = binary(&cfg, &out, &[]);
    assert_eq!(o.status.code(), Some(3), "{}", String::from_utf8_lossy(&o.stderr));
    assert!(out.join("convergence.json").exists());
    assert!(out.join("eigs.csv").exists());
}

#[test]
fn gauge_pspec_and_pmode_tasks_write_their_artifacts() {
    let tmp = tempfile::tempdir().unwrap();
    let gauge = RunConfig::parse("task = \"gauge\"\n[gauge]\nn_max = 6\npoints = [[2.0, 1.0]]\n[gauge.spec]\nnu = 1.0\nrho = 0.5\n").unwrap();
    run(&gauge, Some(tmp.path())).unwrap();
    let g = std::fs::read_to_string(tmp.path().join("gauge.csv")).unwrap();
    assert_eq!(g.lines().count(), 2 + 6);
    let j: serde_json::Value = serde_json::from_slice(&std::fs::read(tmp.path().join("gauge.json")).unwrap()).unwrap();
    assert!(j["partial_fractions"][0]["residual"].as_f64().unwrap() < 1e-10);

    let mut pspec = RunConfig::parse(
        "task = \"pspec\"\n[oscillator]\nfamily = \"odd_imaginary\"\nb = 1\n[basis]\nsize = 48\n[pspec]\nnx = 3\nny = 2\n[pspec.rect]\nre_min = 1.0\nre_max = 5.0\nim_min = -1.0\nim_max = 1.0\n",
    )
    .unwrap();
    pspec.output.svg = true;
    run(&pspec, Some(tmp.path())).unwrap();
    let p = std::fs::read_to_string(tmp.path().join("pspec.csv")).unwrap();
    assert_eq!(p.lines().nth(1), Some("re_z,im_z,resolvent_norm,dist_to_spectrum"));
    assert_eq!(p.lines().count(), 2 + 6);
    assert!(std::fs::read_to_string(tmp.path().join("pspec.svg")).unwrap().starts_with("<svg"));

    let pmode = RunConfig::parse(
        "task = \"pmode\"\n[oscillator]\nfamily = \"polynomial_l\"\na = 1\nim_coeffs = [0.0, 1.0]\n[pmode]\ncurve = [[50.0, 0.0], [100.0, 0.0], [-5.0, 0.0]]\n[pmode.params]\ndelta_override = 1.0\nallow_beyond_turning_point = true\ncheb_order = 256\nquad_order = 512\n",
    )
    .unwrap();
    assert_eq!(pmode.task, Task::Pmode);
    run(&pmode, Some(tmp.path())).unwrap();
    let m = std::fs::read_to_string(tmp.path().join("pmode.csv")).unwrap();
    let rows: Vec<&str> = m.lines().skip(2).collect();
    assert_eq!(rows.len(), 3);
    assert!(rows[0].ends_with(",ok") && rows[2].ends_with(",failed"), "{m}");
}
