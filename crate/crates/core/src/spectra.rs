//! Normalized bath spectra J(ω) for the radiative, dielectric, and
//! quasiparticle-generation (QPG) dissipation mechanisms, plus the S±(ω)
//! pair-breaking integrals and quasiparticle utilities.
//!
//! Zero-temperature contract: every spectrum is identically zero for
//! ω ≤ 0, and the QPG spectra vanish below the pair-breaking threshold
//! ħω < 2Δ_Al. All frequencies are angular (rad/s); the QPG prefactor
//! 16E_J/h follows the plain-frequency convention of its closed form.

use serde::{Deserialize, Serialize};
use std::collections::HashMap;
use std::f64::consts::PI;
use std::sync::RwLock;

use crate::constants::{microev_to_angular, CONDUCTANCE_QUANTUM, HBAR, BOLTZMANN};
use crate::error::{Error, Result};

/// Ohmic radiative bath, J(ω) = ω/Q_rad.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct RadiativeBath {
    pub q_rad: f64,
}

/// Dielectric bath with an exponential high-frequency cutoff,
/// J(ω) = (ħω²/4E_C)·(1/Q_diel)·e^(−ω/ω_c). `e_c` is E_C/ħ in rad/s.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct DielectricBath {
    pub q_diel: f64,
    pub omega_c: f64,
    pub e_c: f64,
}

/// QPG bath: J±(ω) = (16E_J/h)·S±(ω)/(1 + (ω/ω_c)²). `e_j` and `delta_al`
/// are E_J/ħ and Δ_Al/ħ in rad/s.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct QpgBath {
    pub e_j: f64,
    pub delta_al: f64,
    pub omega_c: f64,
}

impl QpgBath {
    /// Pair-breaking threshold 2Δ_Al/ħ (rad/s).
    pub fn gap_frequency(&self) -> f64 {
        2.0 * self.delta_al
    }
}

/// Which of the two QPG coupling operators a spectrum belongs to:
/// `Plus` pairs with sin(φ̂/2), `Minus` with cos(φ̂/2).
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum QpgBranch {
    Plus,
    Minus,
}

/// The default superconducting gap of aluminum, 180 μeV.
pub const DEFAULT_DELTA_AL_MICROEV: f64 = 180.0;

/// The full bath parameter set of one simulation.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct BathSet {
    pub rad: RadiativeBath,
    pub diel: DielectricBath,
    pub qpg: QpgBath,
}

impl BathSet {
    /// Paper-default bath parameters for a transmon with charging and
    /// Josephson energies `e_c`, `e_j` (rad/s): Q_rad = 3830,
    /// Q_diel = 4.8e5, ω_diel_c/2π = 1 THz, ω_QPG_c/2π = 17 GHz,
    /// Δ_Al = 180 μeV.
    pub fn defaults(e_c: f64, e_j: f64) -> Self {
        BathSet {
            rad: RadiativeBath { q_rad: 3830.0 },
            diel: DielectricBath {
                q_diel: 4.8e5,
                omega_c: 2.0 * PI * 1e12,
                e_c,
            },
            qpg: QpgBath {
                e_j,
                delta_al: microev_to_angular(DEFAULT_DELTA_AL_MICROEV),
                omega_c: 2.0 * PI * 17e9,
            },
        }
    }
}

// 15-point Gauss–Kronrod rule (7-point Gauss embedded).
const XGK: [f64; 8] = [
    0.991455371120813,
    0.949107912342759,
    0.864864423359769,
    0.741531185599394,
    0.586087235467691,
    0.405845151377397,
    0.207784955007898,
    0.0,
];
const WGK: [f64; 8] = [
    0.022935322010529,
    0.063092092629979,
    0.104790010322250,
    0.140653259715525,
    0.169004726639267,
    0.190350578064785,
    0.204432940075298,
    0.209482141084728,
];
const WG: [f64; 4] = [
    0.129484966168870,
    0.279705391489277,
    0.381830050505119,
    0.417959183673469,
];

fn gk15<F: Fn(f64) -> f64>(f: &F, a: f64, b: f64) -> (f64, f64) {
    let center = 0.5 * (a + b);
    let half = 0.5 * (b - a);
    let fc = f(center);
    let mut kronrod = WGK[7] * fc;
    let mut gauss = WG[3] * fc;
    for j in 0..7 {
        let dx = half * XGK[j];
        let fsum = f(center - dx) + f(center + dx);
        kronrod += WGK[j] * fsum;
        if j % 2 == 1 {
            gauss += WG[j / 2] * fsum;
        }
    }
    kronrod *= half;
    gauss *= half;
    (kronrod, (kronrod - gauss).abs())
}

/// Adaptive Gauss–Kronrod quadrature with bisection of the worst interval,
/// to a relative target (with a small absolute floor).
fn adaptive_gk<F: Fn(f64) -> f64>(f: &F, a: f64, b: f64, rel_tol: f64) -> Result<f64> {
    if a == b {
        return Ok(0.0);
    }
    let (v, e) = gk15(f, a, b);
    let mut intervals = vec![(a, b, v, e)];
    for _ in 0..2000 {
        let total: f64 = intervals.iter().map(|x| x.2).sum();
        let err: f64 = intervals.iter().map(|x| x.3).sum();
        let target = rel_tol * total.abs().max(1e-300);
        if err <= target {
            return Ok(total);
        }
        // split the interval with the largest error estimate
        let worst = intervals
            .iter()
            .enumerate()
            .max_by(|x, y| x.1 .3.total_cmp(&y.1 .3))
            .map(|(i, _)| i)
            .unwrap();
        let (lo, hi, _, _) = intervals.swap_remove(worst);
        let mid = 0.5 * (lo + hi);
        let (v1, e1) = gk15(f, lo, mid);
        let (v2, e2) = gk15(f, mid, hi);
        intervals.push((lo, mid, v1, e1));
        intervals.push((mid, hi, v2, e2));
    }
    let total: f64 = intervals.iter().map(|x| x.2).sum();
    let err: f64 = intervals.iter().map(|x| x.3).sum();
    Err(Error::QuadratureNonConvergence {
        estimate: total,
        bound: err,
        target: rel_tol * total.abs(),
    })
}

/// Reduced pair-breaking integral S±(w) with w = ħω/Δ_Al:
///
///   S±(w) = ∫₁^(w−1) dx (x(w−x) ± 1) / (√(x²−1)·√((w−x)²−1)),  w > 2,
///
/// and 0 at or below threshold. The inverse-square-root endpoint
/// singularities are removed by substituting x = 1 + u² at the lower
/// endpoint and x = (w−1) − v² at the upper one, splitting at the midpoint.
fn s_reduced(w: f64, plus: bool) -> Result<f64> {
    if !(w > 2.0) {
        return Ok(0.0);
    }
    let sign = if plus { 1.0 } else { -1.0 };
    let umax = (w / 2.0 - 1.0).sqrt();
    let left = move |u: f64| {
        let x = 1.0 + u * u;
        let y = w - x;
        // y² − 1 = ((w−2) − u²)(y + 1), cancellation-free near threshold
        let y2m1 = ((w - 2.0) - u * u) * (y + 1.0);
        2.0 * (x * y + sign) / ((u * u + 2.0).sqrt() * y2m1.max(0.0).sqrt())
    };
    let right = move |v: f64| {
        let x = (w - 1.0) - v * v;
        let y = w - x;
        let x2m1 = ((w - 2.0) - v * v) * (x + 1.0);
        2.0 * (x * y + sign) / ((v * v + 2.0).sqrt() * x2m1.max(0.0).sqrt())
    };
    let a = adaptive_gk(&left, 0.0, umax, 1e-8)?;
    let b = adaptive_gk(&right, 0.0, umax, 1e-8)?;
    Ok(a + b)
}

/// S⁺(ω); `delta_al` is Δ_Al/ħ in rad/s. Zero for ħω/Δ_Al ≤ 2.
pub fn s_plus(omega: f64, delta_al: f64) -> Result<f64> {
    s_reduced(omega / delta_al, true)
}

/// S⁻(ω); zero for ħω/Δ_Al ≤ 2.
pub fn s_minus(omega: f64, delta_al: f64) -> Result<f64> {
    s_reduced(omega / delta_al, false)
}

/// Radiative spectrum ω/Q_rad; 0 for ω ≤ 0.
pub fn j_rad(omega: f64, bath: &RadiativeBath) -> f64 {
    if omega <= 0.0 {
        0.0
    } else {
        omega / bath.q_rad
    }
}

/// Dielectric spectrum (ħω²/4E_C)·(1/Q_diel)·e^(−ω/ω_c); 0 for ω ≤ 0.
pub fn j_diel(omega: f64, bath: &DielectricBath) -> f64 {
    if omega <= 0.0 {
        0.0
    } else {
        omega * omega / (4.0 * bath.e_c) * (-omega / bath.omega_c).exp() / bath.q_diel
    }
}

/// QPG spectrum (16E_J/h)·S±(ω)/(1 + (ω/ω_c)²); exactly 0 below the
/// pair-breaking threshold ħω < 2Δ_Al.
pub fn j_qpg(omega: f64, bath: &QpgBath, branch: QpgBranch) -> Result<f64> {
    if omega <= bath.gap_frequency() {
        return Ok(0.0);
    }
    let s = match branch {
        QpgBranch::Plus => s_plus(omega, bath.delta_al)?,
        QpgBranch::Minus => s_minus(omega, bath.delta_al)?,
    };
    Ok(qpg_prefactor(bath) * s / lorentzian_cut(omega, bath.omega_c))
}

fn qpg_prefactor(bath: &QpgBath) -> f64 {
    // 16·E_J/h with E_J stored as E_J/ħ: E_J/h = (E_J/ħ)/2π
    16.0 * bath.e_j / (2.0 * PI)
}

fn lorentzian_cut(omega: f64, omega_c: f64) -> f64 {
    1.0 + (omega / omega_c) * (omega / omega_c)
}

/// QPG conductance σ(ω) = π·g_K·J^(QPG+)(ω)/ω in siemens; rejects ω ≤ 0.
pub fn qpg_conductance(omega: f64, bath: &QpgBath) -> Result<f64> {
    if omega <= 0.0 {
        return Err(Error::InvalidParameter(format!(
            "qpg_conductance requires omega > 0, got {omega}"
        )));
    }
    Ok(PI * CONDUCTANCE_QUANTUM * j_qpg(omega, bath, QpgBranch::Plus)? / omega)
}

/// Thermal quasiparticle density x_qp = √(2πk_BΘ/Δ_Al)·e^(−Δ_Al/k_BΘ).
/// `theta` in kelvin, `delta_al` as Δ_Al/ħ in rad/s. Underflows to 0 as
/// Θ → 0⁺.
pub fn x_qp_thermal(theta: f64, delta_al: f64) -> f64 {
    let ratio = HBAR * delta_al / (BOLTZMANN * theta);
    (2.0 * PI / ratio).sqrt() * (-ratio).exp()
}

/// Memoized S± evaluation on the discrete transition-frequency grid of a
/// sweep. Keys are ω quantized at 1e−6·ω_d and values are evaluated at the
/// bucket center (clamped above the pair-breaking threshold), so a cached
/// value depends only on its key and the cache is deterministic under any
/// insertion order or thread schedule. S± does not depend on the cutoff,
/// so one cache serves every ω_QPG_c at fixed Δ_Al.
pub struct SpectrumCache {
    quantum: f64,
    delta_al: f64,
    map: RwLock<HashMap<i64, (f64, f64)>>,
}

impl SpectrumCache {
    pub fn new(omega_d: f64, delta_al: f64) -> Self {
        SpectrumCache {
            quantum: 1e-6 * omega_d,
            delta_al,
            map: RwLock::new(HashMap::new()),
        }
    }

    /// (S⁺, S⁻) at ω, quantized. Exact zero at or below the threshold.
    pub fn s_pair(&self, omega: f64) -> Result<(f64, f64)> {
        let gap = 2.0 * self.delta_al;
        if omega <= gap {
            return Ok((0.0, 0.0));
        }
        let key = (omega / self.quantum).round() as i64;
        if let Some(hit) = self.map.read().unwrap().get(&key) {
            return Ok(*hit);
        }
        let eval_omega = (key as f64 * self.quantum).max(gap + 0.5 * self.quantum);
        let pair = (
            s_plus(eval_omega, self.delta_al)?,
            s_minus(eval_omega, self.delta_al)?,
        );
        self.map.write().unwrap().insert(key, pair);
        Ok(pair)
    }

    /// (J^(QPG+), J^(QPG−)) at ω for the given bath, through the cache.
    /// The bath must carry the Δ_Al this cache was built for.
    pub fn j_qpg_pair_with(&self, omega: f64, bath: &QpgBath) -> Result<(f64, f64)> {
        if bath.delta_al != self.delta_al {
            return Err(Error::InvalidParameter(format!(
                "spectrum cache built for delta_al = {}, bath has {}",
                self.delta_al, bath.delta_al
            )));
        }
        if omega <= bath.gap_frequency() {
            return Ok((0.0, 0.0));
        }
        let (sp, sm) = self.s_pair(omega)?;
        let scale = qpg_prefactor(bath) / lorentzian_cut(omega, bath.omega_c);
        Ok((scale * sp, scale * sm))
    }

    pub fn len(&self) -> usize {
        self.map.read().unwrap().len()
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::constants::ghz_to_angular;

    fn delta_al() -> f64 {
        microev_to_angular(180.0)
    }

    #[test]
    fn s_below_threshold_is_zero() {
        let d = delta_al();
        assert_eq!(s_plus(1.5 * d, d).unwrap(), 0.0);
        assert_eq!(s_minus(1.5 * d, d).unwrap(), 0.0);
        assert_eq!(s_plus(2.0 * d, d).unwrap(), 0.0);
    }

    #[test]
    fn s_near_threshold_matches_expansion() {
        // Taylor expansion of the reduced integral at w = 2 + δ:
        // S⁺ → π[1 + δ/4], S⁻ → (π/2)δ. The S⁻ leading order itself is
        // 5.3% off by δ = 0.5, so its 5% window ends at w = 2.45.
        let d = delta_al();
        for &w in &[2.01, 2.1, 2.25, 2.45, 2.5] {
            let sp = s_plus(w * d, d).unwrap();
            let sp_want = PI * (1.0 + (w - 2.0) / 4.0);
            assert!(
                (sp / sp_want - 1.0).abs() < 0.05,
                "S+({w}) = {sp} vs {sp_want}"
            );
        }
        for &w in &[2.01, 2.1, 2.25, 2.45] {
            let sm = s_minus(w * d, d).unwrap();
            let sm_want = PI / 2.0 * (w - 2.0);
            assert!(
                (sm / sm_want - 1.0).abs() < 0.05,
                "S-({w}) = {sm} vs {sm_want}"
            );
        }
    }

    #[test]
    fn s_frozen_oracle_values() {
        // frozen from an independent tanh-sinh quadrature of the double
        // integral in rotated coordinates (agreement ~1e-7 or better)
        let d = delta_al();
        let cases = [
            (2.1, 3.220611389, 0.1551869688),
            (3.0, 3.966359897, 1.427371341),
            (10.0, 10.50502227, 9.298577273),
            (40.0, 40.19425619, 39.75584187),
        ];
        for (w, sp_want, sm_want) in cases {
            let sp = s_plus(w * d, d).unwrap();
            let sm = s_minus(w * d, d).unwrap();
            assert!((sp / sp_want - 1.0).abs() < 1e-6, "S+({w}) = {sp}");
            assert!((sm / sm_want - 1.0).abs() < 1e-6, "S-({w}) = {sm}");
        }
    }

    #[test]
    fn s_large_argument_asymptote() {
        let d = delta_al();
        let sp = s_plus(40.0 * d, d).unwrap();
        let sm = s_minus(40.0 * d, d).unwrap();
        assert!((sp / 40.0 - 1.0).abs() < 0.10, "S+(40) = {sp}");
        assert!((sm / 40.0 - 1.0).abs() < 0.10, "S-(40) = {sm}");
    }

    #[test]
    fn s_monotone_and_branch_ordered() {
        let d = delta_al();
        let mut prev_p = 0.0;
        let mut prev_m = 0.0;
        for i in 0..1000 {
            let w = 2.0 + 1e-3 + 38.0 * i as f64 / 999.0;
            let sp = s_plus(w * d, d).unwrap();
            let sm = s_minus(w * d, d).unwrap();
            assert!(sp > prev_p, "S+ not increasing at w = {w}");
            assert!(sm >= prev_m, "S- not increasing at w = {w}");
            assert!(sm < sp, "S- >= S+ at w = {w}");
            prev_p = sp;
            prev_m = sm;
        }
    }

    #[test]
    fn j_rad_values() {
        let bath = RadiativeBath { q_rad: 3830.0 };
        assert_eq!(j_rad(0.0, &bath), 0.0);
        assert_eq!(j_rad(-1e9, &bath), 0.0);
        let w = ghz_to_angular(3.83);
        let want = 2.0 * PI * 1e6;
        assert!((j_rad(w, &bath) - want).abs() < 1e-6 * want);
        assert_eq!(j_rad(2.0 * w, &bath), 2.0 * j_rad(w, &bath));
    }

    #[test]
    fn j_diel_values() {
        let e_c = ghz_to_angular(0.259);
        let bath = DielectricBath {
            q_diel: 4.8e5,
            omega_c: 2.0 * PI * 1e12,
            e_c,
        };
        assert_eq!(j_diel(0.0, &bath), 0.0);
        // at ω = ω_c the cutoff contributes exactly e^{−1}
        let w = bath.omega_c;
        let uncut = w * w / (4.0 * e_c) / bath.q_diel;
        assert!((j_diel(w, &bath) - uncut * (-1.0f64).exp()).abs() < 1e-9 * uncut);
        // scalar arithmetic oracle at 5 GHz
        let w5 = ghz_to_angular(5.0);
        let want = w5 * w5 / (4.0 * e_c) * (-w5 / bath.omega_c).exp() / 4.8e5;
        assert!((j_diel(w5, &bath) - want).abs() < 1e-12 * want);
        assert!(j_diel(w5, &bath) > 0.0);
    }

    #[test]
    fn j_qpg_values() {
        let d = delta_al();
        let bath = QpgBath {
            e_j: ghz_to_angular(14.24),
            delta_al: d,
            omega_c: 2.0 * PI * 17e9,
        };
        assert_eq!(j_qpg(1.9 * d, &bath, QpgBranch::Plus).unwrap(), 0.0);

        // Lorentzian factor: ideal/cut ratio is 2 at ω = ω_c (with ω_c
        // above the gap so the spectrum is finite there)
        let wide = QpgBath {
            omega_c: 2.0 * PI * 100e9,
            ..bath
        };
        let ideal = QpgBath {
            omega_c: f64::INFINITY,
            ..bath
        };
        let at = wide.omega_c;
        let cut = j_qpg(at, &wide, QpgBranch::Plus).unwrap();
        let un = j_qpg(at, &ideal, QpgBranch::Plus).unwrap();
        assert!((un / cut - 2.0).abs() < 1e-9);

        // scalar arithmetic oracle at ħω/Δ = 2.1 with Q1 parameters
        let w = 2.1 * d;
        let s = s_plus(w, d).unwrap();
        let want = 16.0 * 14.24e9 * s / (1.0 + (w / bath.omega_c).powi(2));
        let got = j_qpg(w, &bath, QpgBranch::Plus).unwrap();
        assert!((got - want).abs() < 1e-9 * want, "{got} vs {want}");
    }

    #[test]
    fn conductance_cutoff_ratio() {
        let d = delta_al();
        let bath = QpgBath {
            e_j: ghz_to_angular(14.24),
            delta_al: d,
            omega_c: 2.0 * PI * 17e9,
        };
        let ideal = QpgBath {
            omega_c: f64::INFINITY,
            ..bath
        };
        assert_eq!(qpg_conductance(1.5 * d, &bath).unwrap(), 0.0);
        assert!(qpg_conductance(-1.0, &bath).is_err());
        for &w in &[2.5, 4.0, 10.0] {
            let sigma = qpg_conductance(w * d, &bath).unwrap();
            let sigma_ideal = qpg_conductance(w * d, &ideal).unwrap();
            let want = 1.0 / (1.0 + (w * d / bath.omega_c).powi(2));
            assert!((sigma / sigma_ideal - want).abs() < 1e-9);
            assert!(sigma.is_finite() && sigma > 0.0);
            // independent evaluation chain through j_qpg
            let recompute = PI * CONDUCTANCE_QUANTUM
                * j_qpg(w * d, &bath, QpgBranch::Plus).unwrap()
                / (w * d);
            assert!((sigma - recompute).abs() < 1e-12 * sigma);
        }
    }

    #[test]
    fn thermal_quasiparticle_density() {
        let d = delta_al();
        // 200 mK: the closed form gives ≈ 2.26e−5, the right order of 1e−5
        let x200 = x_qp_thermal(0.2, d);
        assert!((x200 / 1e-5).log10().abs() < 1.0, "x_qp(200 mK) = {x200:e}");
        // scalar oracle: recompute the closed form from raw constants
        let ratio = 180e-6 * crate::constants::ELEMENTARY_CHARGE / (BOLTZMANN * 0.3);
        let want = (2.0 * PI / ratio).sqrt() * (-ratio).exp();
        let x300 = x_qp_thermal(0.3, d);
        assert!((x300 - want).abs() < 1e-12 * want);
        assert!(x300 > x200);
        // Θ → 0⁺ underflows cleanly to zero
        assert_eq!(x_qp_thermal(1e-6, d), 0.0);
    }

    #[test]
    fn cache_quantization_and_threshold() {
        let d = delta_al();
        let omega_d = ghz_to_angular(4.284);
        let bath = QpgBath {
            e_j: ghz_to_angular(14.24),
            delta_al: d,
            omega_c: 2.0 * PI * 17e9,
        };
        let cache = SpectrumCache::new(omega_d, bath.delta_al);
        // below gap: exact zero, nothing cached
        assert_eq!(cache.s_pair(0.5 * bath.gap_frequency()).unwrap(), (0.0, 0.0));
        assert!(cache.is_empty());
        // above gap: cached value within the quantization granularity
        let w = 2.5 * d;
        let (cp, cm) = cache.s_pair(w).unwrap();
        let (dp, dm) = (s_plus(w, d).unwrap(), s_minus(w, d).unwrap());
        assert!((cp - dp).abs() < 1e-4 * dp);
        assert!((cm - dm).abs() < 1e-4 * dm.abs().max(1e-300));
        assert_eq!(cache.len(), 1);
        // same bucket hits the cache and returns the identical value
        let (cp2, _) = cache.s_pair(w + 0.1 * 1e-6 * omega_d).unwrap();
        assert_eq!(cp, cp2);
        // just above the gap the cached evaluation stays above threshold
        let (gp, _) = cache.s_pair(bath.gap_frequency() * (1.0 + 1e-12)).unwrap();
        assert!(gp > 0.0);
    }
}
