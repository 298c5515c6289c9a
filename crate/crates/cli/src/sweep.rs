//! Sweep orchestration: parallel evaluation of the drive-amplitude axis
//! with a single ordered committer, per-point checkpointing, and
//! deterministic CSV emission.
//!
//! Points run in a rayon pool; results stream to the committer, which
//! writes rows in index order, checkpoints each one, and regenerates the
//! final CSV from the checkpoint records so that an interrupted-and-resumed
//! sweep is bitwise identical to an uninterrupted one.

use anyhow::Context;
use std::collections::BTreeMap;
use std::fs::File;
use std::io::{BufWriter, Write};
use std::path::PathBuf;
use std::sync::mpsc;

use floquet_loss::charge::DriveParams;
use floquet_loss::dissipation::{parity_averaged_loss, run_point, LossReport};
use floquet_loss::resonator::predicted_kappa;

use crate::checkpoint::{load_checkpoint, CheckpointWriter, ResultRow};
use crate::config::{format_float, ResolvedConfig};

pub const RESULTS_FILE: &str = "results.csv";
pub const CHECKPOINT_FILE: &str = "checkpoint.jsonl";

pub const CSV_COLUMNS: [&str; 12] = [
    "index",
    "omega_q_ghz",
    "n_r",
    "t_total_w",
    "t_photons_per_s",
    "t_rad_w",
    "t_diel_w",
    "t_qpg_w",
    "kappa_pred_mhz",
    "n_ch",
    "d_active",
    "status",
];

#[derive(Clone, Debug, Default)]
pub struct RunOptions {
    pub resume: bool,
    /// Test hook: stop after committing this many new points, as if the
    /// process had been killed there.
    pub max_new_points: Option<usize>,
}

#[derive(Debug)]
pub struct SweepOutcome {
    pub results_path: PathBuf,
    pub completed: usize,
    pub failed: usize,
    pub interrupted: bool,
}

/// Evaluate one sweep point. Failures become rows with an error status so
/// the sweep continues.
pub fn compute_point(cfg: &ResolvedConfig, index: usize) -> ResultRow {
    let (omega_q, n_r) = cfg.drive_point(index);
    let omega_q_ghz = omega_q / (2.0 * std::f64::consts::PI * 1e9);
    let base = ResultRow {
        index,
        omega_q_ghz,
        n_r,
        t_total_w: None,
        t_photons_per_s: None,
        t_rad_w: None,
        t_diel_w: None,
        t_qpg_w: None,
        kappa_pred_mhz: None,
        n_ch: None,
        d_active: None,
        status: String::new(),
    };
    let report = point_report(cfg, omega_q);
    match report {
        Ok(report) => {
            let kappa_pred = predicted_kappa(
                &report,
                n_r,
                cfg.omega_d(),
                cfg.resonator_params().kappa_o,
                None,
            );
            ResultRow {
                t_total_w: Some(report.loss_total_w),
                t_photons_per_s: Some(report.loss_total_photons_per_s),
                t_rad_w: report.loss_by_mechanism_w.get("rad").copied(),
                t_diel_w: report.loss_by_mechanism_w.get("diel").copied(),
                t_qpg_w: report.loss_by_mechanism_w.get("qpg").copied(),
                kappa_pred_mhz: Some(kappa_pred / (2.0 * std::f64::consts::PI * 1e6)),
                n_ch: Some(report.n_ch_used),
                d_active: Some(report.d_active),
                status: "ok".into(),
                ..base
            }
        }
        Err(e) => ResultRow {
            status: format!("error: {e}"),
            ..base
        },
    }
}

fn point_report(cfg: &ResolvedConfig, omega_q: f64) -> floquet_loss::Result<LossReport> {
    let params = cfg.transmon_params()?;
    let drive = DriveParams::new(omega_q, cfg.omega_d())?;
    let numerical = cfg.numerical();
    let baths = cfg.bath_set();
    let mechanisms = cfg.mechanism_list();
    if cfg.parity_average {
        parity_averaged_loss(&params, &drive, &numerical, &baths, &mechanisms, params.n_g)
    } else {
        run_point(&params, &drive, &numerical, &baths, &mechanisms)
    }
}

/// Run (or resume) a sweep. Results land in `<output_dir>/results.csv`
/// with the resolved config echoed in comment lines.
pub fn run_sweep(cfg: &ResolvedConfig, opts: &RunOptions) -> anyhow::Result<SweepOutcome> {
    std::fs::create_dir_all(&cfg.output_dir)
        .with_context(|| format!("creating output dir {}", cfg.output_dir.display()))?;
    let ckpt_path = cfg.output_dir.join(CHECKPOINT_FILE);
    let results_path = cfg.output_dir.join(RESULTS_FILE);
    let hash = cfg.hash();

    let mut done: BTreeMap<usize, ResultRow> = BTreeMap::new();
    let mut writer = if opts.resume && ckpt_path.exists() {
        done = load_checkpoint(&ckpt_path, &hash)?;
        CheckpointWriter::append(&ckpt_path)?
    } else {
        CheckpointWriter::create(&ckpt_path, &hash)?
    };

    let n_points = cfg.axis.len();
    let mut pending: Vec<usize> = (0..n_points).filter(|i| !done.contains_key(i)).collect();
    let mut interrupted = false;
    if let Some(limit) = opts.max_new_points {
        if pending.len() > limit {
            pending.truncate(limit);
            interrupted = true;
        }
    }

    if !pending.is_empty() {
        let (tx, rx) = mpsc::channel::<ResultRow>();
        let cfg_ref = &*cfg;
        rayon::scope(|scope| -> anyhow::Result<()> {
            let pending_ref = &pending;
            scope.spawn(move |_| {
                use rayon::prelude::*;
                pending_ref.par_iter().for_each_with(tx, |tx, &idx| {
                    let row = compute_point(cfg_ref, idx);
                    // the committer hanging up just means we stop early
                    let _ = tx.send(row);
                });
            });
            // single committer: checkpoint rows in ascending index order
            let mut buffer: BTreeMap<usize, ResultRow> = BTreeMap::new();
            let mut waiting: Vec<usize> = pending.clone();
            waiting.reverse();
            for row in rx {
                buffer.insert(row.index, row);
                while let Some(&next) = waiting.last() {
                    if let Some(r) = buffer.remove(&next) {
                        writer.commit(&r)?;
                        done.insert(next, r);
                        waiting.pop();
                    } else {
                        break;
                    }
                }
            }
            Ok(())
        })?;
    }

    let failed = done.values().filter(|r| r.status != "ok").count();
    let completed = done.len();
    write_results_csv(&results_path, cfg, done.values())?;
    log::info!(
        "sweep: {completed}/{n_points} points committed ({failed} failed) -> {}",
        results_path.display()
    );
    Ok(SweepOutcome {
        results_path,
        completed,
        failed,
        interrupted,
    })
}

/// Deterministic CSV emission: provenance comments, header, then rows in
/// index order with 17-significant-digit floats.
pub fn write_results_csv<'a>(
    path: &PathBuf,
    cfg: &ResolvedConfig,
    rows: impl Iterator<Item = &'a ResultRow>,
) -> anyhow::Result<()> {
    let mut out = BufWriter::new(File::create(path)?);
    write_provenance(&mut out, cfg)?;
    writeln!(out, "{}", CSV_COLUMNS.join(","))?;
    for row in rows {
        writeln!(out, "{}", format_row(row))?;
    }
    out.flush()?;
    Ok(())
}

pub fn write_provenance<W: Write>(out: &mut W, cfg: &ResolvedConfig) -> anyhow::Result<()> {
    writeln!(
        out,
        "# floquet-loss {} | config_hash {}",
        env!("CARGO_PKG_VERSION"),
        cfg.hash()
    )?;
    writeln!(out, "# config {}", cfg.canonical_json())?;
    Ok(())
}

fn opt(x: Option<f64>) -> String {
    x.map(format_float).unwrap_or_default()
}

fn format_row(r: &ResultRow) -> String {
    format!(
        "{},{},{},{},{},{},{},{},{},{},{},{}",
        r.index,
        format_float(r.omega_q_ghz),
        format_float(r.n_r),
        opt(r.t_total_w),
        opt(r.t_photons_per_s),
        opt(r.t_rad_w),
        opt(r.t_diel_w),
        opt(r.t_qpg_w),
        opt(r.kappa_pred_mhz),
        r.n_ch.map(|v| v.to_string()).unwrap_or_default(),
        r.d_active.map(|v| v.to_string()).unwrap_or_default(),
        r.status
    )
}
