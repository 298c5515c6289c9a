//! Diagnostic CSV dumps: bath-spectra grids, Floquet-mode overlap
//! matrices, transition-rate histograms, and averaged-energy curves.

use anyhow::{bail, Context};
use std::fs::File;
use std::io::{BufWriter, Write};
use std::path::PathBuf;

use floquet_loss::charge::DriveParams;
use floquet_loss::constants::{angular_to_ghz, ghz_to_angular};
use floquet_loss::dissipation::{
    d_active, rate_tensors_from_transition, total_rate_matrix,
};
use floquet_loss::floquet::{analyze, mode_table_selected, ModeLabel};
use floquet_loss::spectra::{j_diel, j_qpg, j_rad, qpg_conductance, QpgBranch};

use crate::config::{format_float, ResolvedConfig};
use crate::sweep::write_provenance;

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum DumpKind {
    Spectra,
    Overlaps,
    Rates,
    Hbar,
}

impl std::str::FromStr for DumpKind {
    type Err = anyhow::Error;

    fn from_str(s: &str) -> anyhow::Result<Self> {
        match s {
            "spectra" => Ok(DumpKind::Spectra),
            "overlaps" => Ok(DumpKind::Overlaps),
            "rates" => Ok(DumpKind::Rates),
            "hbar" => Ok(DumpKind::Hbar),
            other => bail!("unknown dump kind '{other}' (spectra|overlaps|rates|hbar)"),
        }
    }
}

pub fn dump(cfg: &ResolvedConfig, what: DumpKind) -> anyhow::Result<PathBuf> {
    std::fs::create_dir_all(&cfg.output_dir)?;
    match what {
        DumpKind::Spectra => dump_spectra(cfg),
        DumpKind::Overlaps => dump_overlaps(cfg),
        DumpKind::Rates => dump_rates(cfg),
        DumpKind::Hbar => dump_hbar(cfg),
    }
}

/// Bath spectra over the configured grid:
/// (omega_ghz, j_rad, j_diel, j_qpg_plus, j_qpg_minus, sigma).
pub fn dump_spectra(cfg: &ResolvedConfig) -> anyhow::Result<PathBuf> {
    let path = cfg.output_dir.join("spectra.csv");
    let mut out = BufWriter::new(File::create(&path)?);
    write_provenance(&mut out, cfg)?;
    writeln!(out, "omega_ghz,j_rad,j_diel,j_qpg_plus,j_qpg_minus,sigma")?;
    let baths = cfg.bath_set();
    let (lo, hi, n) = cfg.spectra_grid;
    for i in 0..n {
        let f_ghz = lo + (hi - lo) * i as f64 / (n - 1) as f64;
        let w = ghz_to_angular(f_ghz);
        let jp = j_qpg(w, &baths.qpg, QpgBranch::Plus).context("j_qpg_plus")?;
        let jm = j_qpg(w, &baths.qpg, QpgBranch::Minus).context("j_qpg_minus")?;
        let sigma = qpg_conductance(w, &baths.qpg).context("sigma")?;
        writeln!(
            out,
            "{},{},{},{},{},{}",
            format_float(f_ghz),
            format_float(j_rad(w, &baths.rad)),
            format_float(j_diel(w, &baths.diel)),
            format_float(jp),
            format_float(jm),
            format_float(sigma),
        )?;
    }
    out.flush()?;
    Ok(path)
}

fn first_point_drive(cfg: &ResolvedConfig) -> DriveParams {
    // diagnostics default to the largest sweep amplitude
    let index = cfg.axis.len() - 1;
    let (omega_q, _) = cfg.drive_point(index);
    DriveParams {
        omega_q,
        omega_d: cfg.omega_d(),
    }
}

/// |⟨j|φ_i(0)⟩|² matrix with mode labels, at the largest sweep amplitude.
pub fn dump_overlaps(cfg: &ResolvedConfig) -> anyhow::Result<PathBuf> {
    let params = cfg.transmon_params()?;
    let drive = first_point_drive(cfg);
    let analysis = analyze(&params, &drive, &cfg.numerical())?;
    let path = cfg.output_dir.join("overlaps.csv");
    let mut out = BufWriter::new(File::create(&path)?);
    write_provenance(&mut out, cfg)?;
    writeln!(
        out,
        "# omega_q_ghz {} | n_ch {} | threshold {}",
        format_float(angular_to_ghz(drive.omega_q)),
        analysis.classification.n_ch,
        analysis.classification.threshold
    )?;
    let d = params.dim;
    let mut header = String::from("mode,label");
    for j in 0..d {
        header.push_str(&format!(",state_{j}"));
    }
    writeln!(out, "{header}")?;
    for i in 0..d {
        let label = match analysis.classification.labels[i] {
            ModeLabel::Chaotic => "chaotic",
            ModeLabel::Regular => "regular",
        };
        let mut line = format!("{i},{label}");
        for j in 0..d {
            line.push(',');
            line.push_str(&format_float(analysis.classification.overlaps[[i, j]]));
        }
        writeln!(out, "{line}")?;
    }
    out.flush()?;
    Ok(path)
}

/// Histogram of the nonzero total rates Γ_ij per mechanism, in logarithmic
/// bins (counts sum to the number of nonzero matrix entries).
pub fn dump_rates(cfg: &ResolvedConfig) -> anyhow::Result<PathBuf> {
    let params = cfg.transmon_params()?;
    let drive = first_point_drive(cfg);
    let numerical = cfg.numerical();
    let analysis = analyze(&params, &drive, &numerical)?;
    let selected: Vec<usize> =
        (0..d_active(analysis.classification.n_ch, params.dim)).collect();
    let table = mode_table_selected(&analysis.basis, &params, &drive, &numerical, &selected)?;

    let mut tensors = std::collections::BTreeMap::new();
    let mechanisms = cfg.mechanism_list();
    let mut kinds = Vec::new();
    for m in &mechanisms {
        for k in m.operator_kinds() {
            if !kinds.contains(k) {
                kinds.push(*k);
            }
        }
    }
    for kind in kinds {
        let op = floquet_loss::charge::build_coupling_operator(kind, params.dim)?;
        let key = match kind {
            floquet_loss::charge::ChargeOperatorKind::Number => "number",
            floquet_loss::charge::ChargeOperatorKind::Phase => "phase",
            floquet_loss::charge::ChargeOperatorKind::SinHalfPhase => "sin",
            floquet_loss::charge::ChargeOperatorKind::CosHalfPhase => "cos",
            _ => unreachable!(),
        };
        tensors.insert(
            key,
            floquet_loss::dissipation::fourier_components(&table, &op, numerical.k_max)?,
        );
    }
    drop(table);

    let path = cfg.output_dir.join("rates_histogram.csv");
    let mut out = BufWriter::new(File::create(&path)?);
    write_provenance(&mut out, cfg)?;
    writeln!(
        out,
        "# omega_q_ghz {}",
        format_float(angular_to_ghz(drive.omega_q))
    )?;
    writeln!(out, "mechanism,log10_rate_lo,log10_rate_hi,count,total_nonzero")?;
    for m in &mechanisms {
        let rt = rate_tensors_from_transition(
            &tensors,
            &analysis.basis,
            &cfg.bath_set(),
            cfg.omega_d(),
            std::slice::from_ref(m),
            None,
        )?;
        let gamma = total_rate_matrix(&rt)?;
        let nonzero: Vec<f64> = gamma.gamma.iter().copied().filter(|&x| x > 0.0).collect();
        let total = nonzero.len();
        if total == 0 {
            writeln!(out, "{},,,0,0", m.name())?;
            continue;
        }
        let lo = nonzero.iter().fold(f64::INFINITY, |a, &b| a.min(b)).log10().floor();
        let hi = nonzero.iter().fold(0.0f64, |a, &b| a.max(b)).log10().ceil();
        let n_bins = ((hi - lo) as usize).max(1);
        let mut counts = vec![0usize; n_bins];
        for &x in &nonzero {
            let bin = (((x.log10() - lo) / (hi - lo)) * n_bins as f64)
                .floor()
                .min(n_bins as f64 - 1.0) as usize;
            counts[bin] += 1;
        }
        for (b, count) in counts.iter().enumerate() {
            let bin_lo = lo + (hi - lo) * b as f64 / n_bins as f64;
            let bin_hi = lo + (hi - lo) * (b + 1) as f64 / n_bins as f64;
            writeln!(
                out,
                "{},{},{},{},{}",
                m.name(),
                format_float(bin_lo),
                format_float(bin_hi),
                count,
                total
            )?;
        }
    }
    out.flush()?;
    Ok(path)
}

/// H̄_q curves over the sweep axis: one row per (drive point, mode).
pub fn dump_hbar(cfg: &ResolvedConfig) -> anyhow::Result<PathBuf> {
    let params = cfg.transmon_params()?;
    let numerical = cfg.numerical();
    let path = cfg.output_dir.join("hbar_curves.csv");
    let mut out = BufWriter::new(File::create(&path)?);
    write_provenance(&mut out, cfg)?;
    writeln!(out, "omega_q_ghz,mode,hbar_q_ghz,quasienergy_ghz,label")?;
    for index in 0..cfg.axis.len() {
        let (omega_q, _) = cfg.drive_point(index);
        let drive = DriveParams {
            omega_q,
            omega_d: cfg.omega_d(),
        };
        let analysis = analyze(&params, &drive, &numerical)?;
        for i in 0..params.dim {
            let label = match analysis.classification.labels[i] {
                ModeLabel::Chaotic => "chaotic",
                ModeLabel::Regular => "regular",
            };
            writeln!(
                out,
                "{},{},{},{},{}",
                format_float(angular_to_ghz(omega_q)),
                i,
                format_float(angular_to_ghz(analysis.basis.avg_energy[i])),
                format_float(angular_to_ghz(analysis.basis.quasienergies[i])),
                label
            )?;
        }
    }
    out.flush()?;
    Ok(path)
}
