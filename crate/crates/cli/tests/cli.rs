//! End-to-end tests of the sweep runner, checkpoint resume, comparison
//! join, and diagnostic dumps on small, fast configurations.

use std::fs;
use std::path::Path;

use floquet_loss_cli::compare::compare;
use floquet_loss_cli::config::{RawConfig, ResolvedConfig};
use floquet_loss_cli::dump::{dump, DumpKind};
use floquet_loss_cli::sweep::{run_sweep, RunOptions, CHECKPOINT_FILE, RESULTS_FILE};

fn small_config(dir: &Path, extra: &str) -> ResolvedConfig {
    let toml_text = format!(
        r#"
        [transmon]
        n_g = 0.25
        [numerical]
        dim = 21
        k_max = 30
        n_t = 125
        n_big_t = 1001
        [baths]
        mechanisms = ["rad", "diel"]
        [sweep]
        omega_q = [0.0, 0.5, 1.0, 1.5]
        output_dir = "{}"
        {extra}
        "#,
        dir.display()
    );
    let raw: RawConfig = toml::from_str(&toml_text).unwrap();
    ResolvedConfig::resolve(raw).unwrap()
}

/// Strip provenance comments, keeping the data payload.
fn csv_payload(path: &Path) -> String {
    fs::read_to_string(path)
        .unwrap()
        .lines()
        .filter(|l| !l.starts_with('#'))
        .collect::<Vec<_>>()
        .join("\n")
}

#[test]
fn sweep_zero_drive_point_loses_nothing() {
    let dir = tempfile::tempdir().unwrap();
    let toml_text = format!(
        r#"
        [numerical]
        dim = 21
        k_max = 30
        n_t = 125
        n_big_t = 1001
        [baths]
        mechanisms = ["rad"]
        [sweep]
        omega_q = [0.0]
        output_dir = "{}"
        "#,
        dir.path().display()
    );
    let raw: RawConfig = toml::from_str(&toml_text).unwrap();
    let cfg = ResolvedConfig::resolve(raw).unwrap();
    let outcome = run_sweep(&cfg, &RunOptions::default()).unwrap();
    assert_eq!(outcome.completed, 1);
    assert_eq!(outcome.failed, 0);
    let payload = csv_payload(&outcome.results_path);
    let row = payload.lines().nth(1).unwrap();
    let fields: Vec<&str> = row.split(',').collect();
    // t_total_w column: the undriven steady state sits in the ground
    // state and radiates nothing
    let t_total: f64 = fields[3].parse().unwrap();
    assert_eq!(t_total, 0.0);
    // kappa_pred collapses to kappa_o at N_r = 0
    let kappa_pred: f64 = fields[8].parse().unwrap();
    assert!((kappa_pred - 16.82).abs() < 1e-9);
    assert_eq!(fields[11], "ok");
}

#[test]
fn resume_reproduces_uninterrupted_run_bitwise() {
    let dir_a = tempfile::tempdir().unwrap();
    let dir_b = tempfile::tempdir().unwrap();
    let cfg_a = small_config(dir_a.path(), "");
    let cfg_b = small_config(dir_b.path(), "");

    let full = run_sweep(&cfg_a, &RunOptions::default()).unwrap();
    assert_eq!(full.completed, 4);

    // interrupted run: two points, then resume
    let first = run_sweep(
        &cfg_b,
        &RunOptions {
            resume: false,
            max_new_points: Some(2),
        },
    )
    .unwrap();
    assert!(first.interrupted);
    assert_eq!(first.completed, 2);
    let resumed = run_sweep(
        &cfg_b,
        &RunOptions {
            resume: true,
            max_new_points: None,
        },
    )
    .unwrap();
    assert_eq!(resumed.completed, 4);

    let a = csv_payload(&full.results_path);
    let b = csv_payload(&resumed.results_path);
    assert_eq!(a, b, "resumed sweep differs from uninterrupted run");
}

#[test]
fn resume_rejects_changed_config() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = small_config(dir.path(), "");
    run_sweep(
        &cfg,
        &RunOptions {
            resume: false,
            max_new_points: Some(1),
        },
    )
    .unwrap();
    let changed = small_config(dir.path(), "parity_average = true");
    let err = run_sweep(
        &changed,
        &RunOptions {
            resume: true,
            max_new_points: None,
        },
    );
    assert!(err.is_err(), "config change must invalidate the checkpoint");
    assert!(dir.path().join(CHECKPOINT_FILE).exists());
}

#[test]
fn torn_checkpoint_line_recovers_on_resume() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = small_config(dir.path(), "");
    run_sweep(
        &cfg,
        &RunOptions {
            resume: false,
            max_new_points: Some(2),
        },
    )
    .unwrap();
    // simulate a kill mid-append
    let ckpt = dir.path().join(CHECKPOINT_FILE);
    let mut content = fs::read_to_string(&ckpt).unwrap();
    content.push_str("{\"kind\":\"point\",\"row\":{\"index\":3,\"omega");
    fs::write(&ckpt, content).unwrap();

    let resumed = run_sweep(
        &cfg,
        &RunOptions {
            resume: true,
            max_new_points: None,
        },
    )
    .unwrap();
    assert_eq!(resumed.completed, 4);

    // and the result matches a clean run
    let clean_dir = tempfile::tempdir().unwrap();
    let clean_cfg = small_config(clean_dir.path(), "");
    let clean = run_sweep(&clean_cfg, &RunOptions::default()).unwrap();
    assert_eq!(
        csv_payload(&clean.results_path),
        csv_payload(&resumed.results_path)
    );
}

#[test]
fn compare_self_consistency_and_empty_file() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = small_config(dir.path(), "");
    let outcome = run_sweep(&cfg, &RunOptions::default()).unwrap();

    // synthesize an experiment from the model's own predictions
    let payload = csv_payload(&outcome.results_path);
    let mut exp = String::from("n_r,omega_d_ghz,kappa_mhz,noise_photons\n");
    let mut n_rows = 0;
    for line in payload.lines().skip(1) {
        let f: Vec<&str> = line.split(',').collect();
        let n_r: f64 = f[2].parse().unwrap();
        if n_r <= 0.0 {
            continue; // zero-drive row has no photon number
        }
        let kappa_pred_mhz: f64 = f[8].parse().unwrap();
        exp.push_str(&format!("{},{},{},0.0\n", f[2], 4.284, kappa_pred_mhz));
        n_rows += 1;
    }
    let exp_path = dir.path().join("experiment.csv");
    fs::write(&exp_path, exp).unwrap();

    let out = compare(&cfg, &exp_path, None).unwrap();
    let text = csv_payload(&out);
    let mut checked = 0;
    for line in text.lines().skip(1) {
        let f: Vec<&str> = line.split(',').collect();
        let residual: f64 = f[6].parse().unwrap();
        assert!(
            residual.abs() < 1e-9,
            "self-consistency residual {residual} in {line}"
        );
        checked += 1;
    }
    assert_eq!(checked, n_rows);

    // empty experiment file: header-only output, success
    let empty_path = dir.path().join("empty.csv");
    fs::write(&empty_path, "n_r,omega_d_ghz,kappa_mhz\n").unwrap();
    let out = compare(&cfg, &empty_path, None).unwrap();
    let text = csv_payload(&out);
    assert_eq!(text.lines().count(), 1, "expected header only");
}

#[test]
fn compare_reports_schema_issues_with_line_numbers() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = small_config(dir.path(), "");
    run_sweep(&cfg, &RunOptions::default()).unwrap();

    let bad = dir.path().join("bad.csv");
    fs::write(&bad, "n_r,omega_d_ghz,kappa_mhz\n100.0,4.284,not_a_number\n").unwrap();
    let err = compare(&cfg, &bad, None).unwrap_err();
    let text = format!("{err:#}");
    assert!(text.contains("line 2"), "error lacks line number: {text}");

    let missing = dir.path().join("missing.csv");
    fs::write(&missing, "foo,bar\n1,2\n").unwrap();
    let err = compare(&cfg, &missing, None).unwrap_err();
    let text = format!("{err:#}");
    assert!(
        text.contains("n_r or p_r_dbm"),
        "unexpected schema error: {text}"
    );
}

#[test]
fn dump_spectra_and_rates_counts() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = small_config(dir.path(), "");
    let path = dump(&cfg, DumpKind::Spectra).unwrap();
    let text = csv_payload(&path);
    let rows: Vec<&str> = text.lines().skip(1).collect();
    assert_eq!(rows.len(), 600);
    for line in &rows {
        let f: Vec<&str> = line.split(',').collect();
        for v in &f[1..] {
            let x: f64 = v.parse().unwrap();
            assert!(x >= 0.0, "negative spectrum in {line}");
        }
    }

    // histogram counts per mechanism sum to the recounted nonzero entries
    let path = dump(&cfg, DumpKind::Rates).unwrap();
    let text = fs::read_to_string(&path).unwrap();
    let mut per_mechanism: std::collections::BTreeMap<String, (usize, usize)> =
        Default::default();
    for line in text.lines().filter(|l| !l.starts_with('#')).skip(1) {
        let f: Vec<&str> = line.split(',').collect();
        let entry = per_mechanism.entry(f[0].to_string()).or_insert((0, 0));
        entry.0 += f[3].parse::<usize>().unwrap();
        entry.1 = f[4].parse::<usize>().unwrap();
    }
    for (mech, (sum, total)) in per_mechanism {
        assert_eq!(sum, total, "histogram counts for {mech}");
    }
}

#[test]
fn dump_hbar_curves_shape() {
    let dir = tempfile::tempdir().unwrap();
    let toml_text = format!(
        r#"
        [numerical]
        dim = 21
        k_max = 10
        n_t = 125
        n_big_t = 1001
        [baths]
        mechanisms = ["rad"]
        [sweep]
        omega_q = [0.0, 2.0]
        output_dir = "{}"
        "#,
        dir.path().display()
    );
    let raw: RawConfig = toml::from_str(&toml_text).unwrap();
    let cfg = ResolvedConfig::resolve(raw).unwrap();
    let path = dump(&cfg, DumpKind::Hbar).unwrap();
    let text = csv_payload(&path);
    let rows: Vec<&str> = text.lines().skip(1).collect();
    assert_eq!(rows.len(), 2 * 21, "one row per (drive point, mode)");
    // zero-drive H̄_q ascends with the mode index by construction
    let hbar: Vec<f64> = rows
        .iter()
        .take(21)
        .map(|l| l.split(',').nth(2).unwrap().parse().unwrap())
        .collect();
    for pair in hbar.windows(2) {
        assert!(pair[1] >= pair[0]);
    }
}

#[test]
fn binary_runs_end_to_end() {
    let dir = tempfile::tempdir().unwrap();
    let config_path = dir.path().join("cfg.toml");
    fs::write(
        &config_path,
        format!(
            r#"
            [numerical]
            dim = 21
            k_max = 10
            n_t = 125
            n_big_t = 1001
            [baths]
            mechanisms = ["rad"]
            [sweep]
            omega_q = [0.0, 1.0]
            output_dir = "{}"
            "#,
            dir.path().display()
        ),
    )
    .unwrap();
    let bin = env!("CARGO_BIN_EXE_floquet-loss");
    let run = std::process::Command::new(bin)
        .args(["run", "--config"])
        .arg(&config_path)
        .args(["--threads", "2"])
        .output()
        .unwrap();
    assert!(
        run.status.success(),
        "run failed: {}",
        String::from_utf8_lossy(&run.stderr)
    );
    assert!(dir.path().join(RESULTS_FILE).exists());

    let dump_out = std::process::Command::new(bin)
        .args(["dump", "--config"])
        .arg(&config_path)
        .args(["--what", "spectra"])
        .output()
        .unwrap();
    assert!(
        dump_out.status.success(),
        "dump failed: {}",
        String::from_utf8_lossy(&dump_out.stderr)
    );
    assert!(dir.path().join("spectra.csv").exists());
}

#[test]
fn dump_overlap_rows_sum_to_one() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = small_config(dir.path(), "");
    let path = dump(&cfg, DumpKind::Overlaps).unwrap();
    let text = fs::read_to_string(&path).unwrap();
    for line in text.lines().filter(|l| !l.starts_with('#')).skip(1) {
        let f: Vec<&str> = line.split(',').collect();
        let sum: f64 = f[2..].iter().map(|v| v.parse::<f64>().unwrap()).sum();
        assert!((sum - 1.0).abs() < 1e-8, "mode {} row sums to {sum}", f[0]);
    }
}
