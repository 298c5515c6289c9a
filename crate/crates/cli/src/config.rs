//! Sweep configuration: TOML ingestion, device presets, validation, and
//! the canonical hash used to guard checkpoint resumption.
//!
//! Units follow the device tables: plain frequencies in GHz (value/2π),
//! linewidths in MHz, energies in h·GHz, the gap in μeV, temperatures in
//! mK where they appear.

use anyhow::{bail, Context};
use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};
use std::f64::consts::PI;
use std::path::{Path, PathBuf};

use floquet_loss::charge::TransmonParams;
use floquet_loss::constants::{ghz_to_angular, mhz_to_angular, microev_to_angular};
use floquet_loss::dissipation::Mechanism;
use floquet_loss::floquet::NumericalConfig;
use floquet_loss::resonator::ResonatorParams;
use floquet_loss::spectra::{BathSet, DielectricBath, QpgBath, RadiativeBath};

/// Raw, file-shaped configuration. Every field is optional; the device
/// preset (default Q1) fills the gaps.
#[derive(Clone, Debug, Default, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RawConfig {
    pub device: Option<String>,
    #[serde(default)]
    pub transmon: RawTransmon,
    #[serde(default)]
    pub drive: RawDrive,
    #[serde(default)]
    pub resonator: RawResonator,
    #[serde(default)]
    pub numerical: RawNumerical,
    #[serde(default)]
    pub baths: RawBaths,
    #[serde(default)]
    pub sweep: RawSweep,
    #[serde(default)]
    pub spectra_grid: RawSpectraGrid,
}

#[derive(Clone, Debug, Default, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RawTransmon {
    pub e_c: Option<f64>,
    pub e_j: Option<f64>,
    pub n_g: Option<f64>,
}

#[derive(Clone, Debug, Default, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RawDrive {
    /// ω_d/2π in GHz; defaults to the resonator frequency.
    pub omega_d: Option<f64>,
}

#[derive(Clone, Debug, Default, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RawResonator {
    pub omega_r: Option<f64>,
    pub g: Option<f64>,
    pub kappa_ex: Option<f64>,
    pub kappa_o: Option<f64>,
}

#[derive(Clone, Debug, Default, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RawNumerical {
    pub dim: Option<usize>,
    pub k_max: Option<usize>,
    pub n_t: Option<usize>,
    pub n_big_t: Option<usize>,
}

#[derive(Clone, Debug, Default, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RawBaths {
    pub mechanisms: Option<Vec<String>>,
    pub q_rad: Option<f64>,
    pub q_diel: Option<f64>,
    /// GHz
    pub omega_diel_c: Option<f64>,
    /// GHz
    pub omega_qpg_c: Option<f64>,
    /// μeV
    pub delta_al: Option<f64>,
}

#[derive(Clone, Debug, Default, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RawSweep {
    /// Ω_q/2π values in GHz (exclusive with n_r).
    pub omega_q: Option<Vec<f64>>,
    /// Photon-number axis (exclusive with omega_q).
    pub n_r: Option<Vec<f64>>,
    pub parity_average: Option<bool>,
    pub output_dir: Option<String>,
    pub checkpoint_interval: Option<usize>,
}

#[derive(Clone, Debug, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RawSpectraGrid {
    pub omega_min_ghz: f64,
    pub omega_max_ghz: f64,
    pub points: usize,
}

impl Default for RawSpectraGrid {
    fn default() -> Self {
        RawSpectraGrid {
            omega_min_ghz: 0.5,
            omega_max_ghz: 300.0,
            points: 600,
        }
    }
}

/// Per-device presets (Q1–Q4).
#[derive(Clone, Copy, Debug)]
pub struct DeviceProfile {
    pub name: &'static str,
    pub omega_r_ghz: f64,
    pub e_j_ghz: f64,
    pub e_c_ghz: f64,
    pub g_ghz: f64,
    pub kappa_ex_mhz: f64,
    pub kappa_o_mhz: f64,
    pub omega_qpg_c_ghz: f64,
}

pub const DEVICES: [DeviceProfile; 4] = [
    DeviceProfile {
        name: "q1",
        omega_r_ghz: 4.284,
        e_j_ghz: 14.24,
        e_c_ghz: 0.259,
        g_ghz: 0.231,
        kappa_ex_mhz: 15.586,
        kappa_o_mhz: 16.82,
        omega_qpg_c_ghz: 17.0,
    },
    DeviceProfile {
        name: "q2",
        omega_r_ghz: 4.297,
        e_j_ghz: 13.01,
        e_c_ghz: 0.257,
        g_ghz: 0.212,
        kappa_ex_mhz: 16.73,
        kappa_o_mhz: 16.79,
        omega_qpg_c_ghz: 17.0,
    },
    DeviceProfile {
        name: "q3",
        omega_r_ghz: 3.745,
        e_j_ghz: 13.02,
        e_c_ghz: 0.254,
        g_ghz: 0.188,
        kappa_ex_mhz: 27.38,
        kappa_o_mhz: 27.59,
        omega_qpg_c_ghz: 19.0,
    },
    DeviceProfile {
        name: "q4",
        omega_r_ghz: 7.5474,
        e_j_ghz: 12.06,
        e_c_ghz: 0.310,
        g_ghz: 0.041,
        kappa_ex_mhz: 6.43,
        kappa_o_mhz: 6.43,
        omega_qpg_c_ghz: 20.0,
    },
];

/// The sweep axis as resolved from the config.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub enum SweepAxis {
    /// Ω_q/2π values (GHz).
    OmegaQ(Vec<f64>),
    /// Photon numbers, mapped through Ω_q = 2g√N_r.
    PhotonNumber(Vec<f64>),
}

impl SweepAxis {
    pub fn len(&self) -> usize {
        match self {
            SweepAxis::OmegaQ(v) | SweepAxis::PhotonNumber(v) => v.len(),
        }
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }
}

/// Fully resolved configuration, the unit of provenance: its canonical
/// JSON is echoed into every output file and hashed for checkpoints.
#[derive(Clone, Debug, Serialize)]
pub struct ResolvedConfig {
    pub device: String,
    pub e_c_ghz: f64,
    pub e_j_ghz: f64,
    pub n_g: f64,
    pub omega_d_ghz: f64,
    pub omega_r_ghz: f64,
    pub g_ghz: f64,
    pub kappa_ex_mhz: f64,
    pub kappa_o_mhz: f64,
    pub dim: usize,
    pub k_max: usize,
    pub n_t: usize,
    pub n_big_t: usize,
    pub mechanisms: Vec<String>,
    pub q_rad: f64,
    pub q_diel: f64,
    pub omega_diel_c_ghz: f64,
    pub omega_qpg_c_ghz: f64,
    pub delta_al_microev: f64,
    pub axis: SweepAxis,
    pub parity_average: bool,
    pub output_dir: PathBuf,
    pub checkpoint_interval: usize,
    pub spectra_grid: (f64, f64, usize),
}

impl ResolvedConfig {
    pub fn from_file(path: &Path) -> anyhow::Result<Self> {
        let text = std::fs::read_to_string(path)
            .with_context(|| format!("reading config {}", path.display()))?;
        let raw: RawConfig = toml::from_str(&text)
            .with_context(|| format!("parsing config {}", path.display()))?;
        Self::resolve(raw)
    }

    pub fn resolve(raw: RawConfig) -> anyhow::Result<Self> {
        let device_name = raw.device.clone().unwrap_or_else(|| "q1".to_string());
        let profile = DEVICES
            .iter()
            .find(|d| d.name == device_name.to_lowercase())
            .with_context(|| format!("unknown device preset '{device_name}'"))?;

        let mechanisms = raw
            .baths
            .mechanisms
            .clone()
            .unwrap_or_else(|| vec!["rad".into(), "diel".into(), "qpg".into()]);
        if mechanisms.is_empty() {
            bail!("baths.mechanisms must be nonempty");
        }
        let mut parsed_mechanisms = Vec::new();
        for m in &mechanisms {
            let mech = match m.as_str() {
                "rad" => Mechanism::Rad,
                "diel" => Mechanism::Diel,
                "qpg" => Mechanism::Qpg,
                other => bail!("unknown mechanism '{other}' (expected rad|diel|qpg)"),
            };
            if parsed_mechanisms.contains(&mech) {
                bail!("mechanism '{m}' listed twice");
            }
            parsed_mechanisms.push(mech);
        }

        let mut dim = raw.numerical.dim.unwrap_or(401);
        // the radiative tensors are the most error-sensitive; their runs
        // are capped at D = 201
        if parsed_mechanisms.contains(&Mechanism::Rad) && dim > 201 {
            log::warn!(
                "radiative mechanism requested with dim = {dim}; capping at 201"
            );
            dim = 201;
        }

        let axis = match (&raw.sweep.omega_q, &raw.sweep.n_r) {
            (Some(_), Some(_)) => bail!("sweep.omega_q and sweep.n_r are exclusive"),
            (Some(v), None) => SweepAxis::OmegaQ(v.clone()),
            (None, Some(v)) => SweepAxis::PhotonNumber(v.clone()),
            (None, None) => bail!("sweep requires either omega_q or n_r"),
        };
        {
            let values = match &axis {
                SweepAxis::OmegaQ(v) | SweepAxis::PhotonNumber(v) => v,
            };
            if values.is_empty() {
                bail!("sweep axis must be nonempty");
            }
            for pair in values.windows(2) {
                if !(pair[1] > pair[0]) {
                    bail!("sweep axis must be strictly increasing");
                }
            }
            if values[0] < 0.0 {
                bail!("sweep axis values must be nonnegative");
            }
        }

        let cfg = ResolvedConfig {
            device: profile.name.to_string(),
            e_c_ghz: raw.transmon.e_c.unwrap_or(profile.e_c_ghz),
            e_j_ghz: raw.transmon.e_j.unwrap_or(profile.e_j_ghz),
            n_g: raw.transmon.n_g.unwrap_or(0.25),
            omega_r_ghz: raw.resonator.omega_r.unwrap_or(profile.omega_r_ghz),
            omega_d_ghz: raw
                .drive
                .omega_d
                .or(raw.resonator.omega_r)
                .unwrap_or(profile.omega_r_ghz),
            g_ghz: raw.resonator.g.unwrap_or(profile.g_ghz),
            kappa_ex_mhz: raw.resonator.kappa_ex.unwrap_or(profile.kappa_ex_mhz),
            kappa_o_mhz: raw.resonator.kappa_o.unwrap_or(profile.kappa_o_mhz),
            dim,
            k_max: raw.numerical.k_max.unwrap_or(200),
            n_t: raw.numerical.n_t.unwrap_or(2001),
            n_big_t: raw.numerical.n_big_t.unwrap_or(20001),
            mechanisms,
            q_rad: raw.baths.q_rad.unwrap_or(3830.0),
            q_diel: raw.baths.q_diel.unwrap_or(4.8e5),
            omega_diel_c_ghz: raw.baths.omega_diel_c.unwrap_or(1000.0),
            omega_qpg_c_ghz: raw
                .baths
                .omega_qpg_c
                .unwrap_or(profile.omega_qpg_c_ghz),
            delta_al_microev: raw.baths.delta_al.unwrap_or(180.0),
            axis,
            parity_average: raw.sweep.parity_average.unwrap_or(false),
            output_dir: PathBuf::from(
                raw.sweep.output_dir.unwrap_or_else(|| "out".to_string()),
            ),
            checkpoint_interval: raw.sweep.checkpoint_interval.unwrap_or(1),
            spectra_grid: (
                raw.spectra_grid.omega_min_ghz,
                raw.spectra_grid.omega_max_ghz,
                raw.spectra_grid.points,
            ),
        };
        cfg.validate()?;
        Ok(cfg)
    }

    fn validate(&self) -> anyhow::Result<()> {
        self.transmon_params()
            .map_err(|e| anyhow::anyhow!("{e}"))?;
        self.numerical().validate().map_err(|e| anyhow::anyhow!("{e}"))?;
        self.resonator_params()
            .validate()
            .map_err(|e| anyhow::anyhow!("{e}"))?;
        if self.checkpoint_interval == 0 {
            bail!("checkpoint_interval must be >= 1");
        }
        let (lo, hi, n) = self.spectra_grid;
        if !(hi > lo) || n < 2 {
            bail!("spectra_grid must satisfy omega_max > omega_min and points >= 2");
        }
        Ok(())
    }

    pub fn transmon_params(&self) -> floquet_loss::Result<TransmonParams> {
        TransmonParams::from_ghz(self.e_c_ghz, self.e_j_ghz, self.n_g, self.dim)
    }

    pub fn numerical(&self) -> NumericalConfig {
        NumericalConfig {
            dim: self.dim,
            k_max: self.k_max,
            n_t: self.n_t,
            n_big_t: self.n_big_t,
        }
    }

    pub fn resonator_params(&self) -> ResonatorParams {
        ResonatorParams {
            omega_r: ghz_to_angular(self.omega_r_ghz),
            g: ghz_to_angular(self.g_ghz),
            kappa_ex: mhz_to_angular(self.kappa_ex_mhz),
            kappa_o: mhz_to_angular(self.kappa_o_mhz),
        }
    }

    pub fn bath_set(&self) -> BathSet {
        BathSet {
            rad: RadiativeBath { q_rad: self.q_rad },
            diel: DielectricBath {
                q_diel: self.q_diel,
                omega_c: ghz_to_angular(self.omega_diel_c_ghz),
                e_c: ghz_to_angular(self.e_c_ghz),
            },
            qpg: QpgBath {
                e_j: ghz_to_angular(self.e_j_ghz),
                delta_al: microev_to_angular(self.delta_al_microev),
                omega_c: ghz_to_angular(self.omega_qpg_c_ghz),
            },
        }
    }

    pub fn mechanism_list(&self) -> Vec<Mechanism> {
        self.mechanisms
            .iter()
            .map(|m| match m.as_str() {
                "rad" => Mechanism::Rad,
                "diel" => Mechanism::Diel,
                _ => Mechanism::Qpg,
            })
            .collect()
    }

    /// Ω_q (rad/s) and N_r at sweep point `index`.
    pub fn drive_point(&self, index: usize) -> (f64, f64) {
        match &self.axis {
            SweepAxis::OmegaQ(v) => {
                let omega_q = ghz_to_angular(v[index]);
                let g = ghz_to_angular(self.g_ghz);
                let n_r = (omega_q / (2.0 * g)).powi(2);
                (omega_q, n_r)
            }
            SweepAxis::PhotonNumber(v) => {
                let g = ghz_to_angular(self.g_ghz);
                (2.0 * g * v[index].sqrt(), v[index])
            }
        }
    }

    pub fn omega_d(&self) -> f64 {
        2.0 * PI * 1e9 * self.omega_d_ghz
    }

    /// Canonical JSON used for provenance echoes and the checkpoint hash.
    pub fn canonical_json(&self) -> String {
        serde_json::to_string(self).expect("config serialization cannot fail")
    }

    pub fn hash(&self) -> String {
        let mut hasher = Sha256::new();
        hasher.update(self.canonical_json().as_bytes());
        hex_string(&hasher.finalize())
    }
}

fn hex_string(bytes: &[u8]) -> String {
    bytes.iter().map(|b| format!("{b:02x}")).collect()
}

/// Floats in output files carry 17 significant digits, enough to
/// round-trip f64 exactly.
pub fn format_float(x: f64) -> String {
    format!("{x:.16e}")
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn minimal_config_fills_q1_defaults() {
        let raw: RawConfig = toml::from_str(
            r#"
            [sweep]
            omega_q = [0.0, 20.0, 40.0]
            "#,
        )
        .unwrap();
        let cfg = ResolvedConfig::resolve(raw).unwrap();
        assert_eq!(cfg.device, "q1");
        assert_eq!(cfg.e_j_ghz, 14.24);
        assert_eq!(cfg.kappa_o_mhz, 16.82);
        // rad included by default, so dim capped to 201
        assert_eq!(cfg.dim, 201);
        assert_eq!(cfg.omega_d_ghz, 4.284);
        assert_eq!(cfg.axis.len(), 3);
    }

    #[test]
    fn qpg_only_keeps_full_dim() {
        let raw: RawConfig = toml::from_str(
            r#"
            [baths]
            mechanisms = ["qpg"]
            [sweep]
            omega_q = [10.0]
            "#,
        )
        .unwrap();
        let cfg = ResolvedConfig::resolve(raw).unwrap();
        assert_eq!(cfg.dim, 401);
        assert_eq!(cfg.mechanism_list(), vec![Mechanism::Qpg]);
    }

    #[test]
    fn axis_validation() {
        let bad: RawConfig = toml::from_str(
            r#"
            [sweep]
            omega_q = [10.0, 10.0]
            "#,
        )
        .unwrap();
        assert!(ResolvedConfig::resolve(bad).is_err());
        let empty: RawConfig = toml::from_str(
            r#"
            [sweep]
            omega_q = []
            "#,
        )
        .unwrap();
        assert!(ResolvedConfig::resolve(empty).is_err());
        let none: RawConfig = toml::from_str("").unwrap();
        assert!(ResolvedConfig::resolve(none).is_err());
    }

    #[test]
    fn q4_profile_and_hash_stability() {
        let raw: RawConfig = toml::from_str(
            r#"
            device = "q4"
            [sweep]
            n_r = [100.0, 400.0]
            "#,
        )
        .unwrap();
        let cfg = ResolvedConfig::resolve(raw).unwrap();
        assert_eq!(cfg.kappa_o_mhz, 6.43);
        assert_eq!(cfg.omega_qpg_c_ghz, 20.0);
        let h1 = cfg.hash();
        let h2 = cfg.clone().hash();
        assert_eq!(h1, h2);
        assert_eq!(h1.len(), 64);
    }

    #[test]
    fn float_format_round_trips() {
        for &x in &[0.0, 1.0, -3.5e-17, 2.0 * PI * 17e9, f64::MIN_POSITIVE] {
            let s = format_float(x);
            let back: f64 = s.parse().unwrap();
            assert_eq!(back.to_bits(), x.to_bits(), "{s}");
        }
    }
}
