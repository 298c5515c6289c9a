//! Physical constants (2019 SI exact values) and the unit conventions used
//! throughout the crate.
//!
//! All internal computation is carried out in angular frequency units
//! (rad/s) with energies divided by ħ. Configuration values follow the
//! conventions of the experimental literature: plain frequencies are given
//! in GHz and mean (quantity)/2π, energies in h·GHz, the superconducting
//! gap in μeV, and temperatures in kelvin (mK at the CLI boundary).

use std::f64::consts::PI;

/// Reduced Planck constant ħ (J·s).
pub const HBAR: f64 = 1.054_571_817e-34;

/// Planck constant h (J·s), exact.
pub const PLANCK_H: f64 = 6.626_070_15e-34;

/// Elementary charge e (C), exact.
pub const ELEMENTARY_CHARGE: f64 = 1.602_176_634e-19;

/// Boltzmann constant k_B (J/K), exact.
pub const BOLTZMANN: f64 = 1.380_649e-23;

/// Conductance quantum g_K = e²/h (S), the inverse Klitzing constant.
pub const CONDUCTANCE_QUANTUM: f64 =
    ELEMENTARY_CHARGE * ELEMENTARY_CHARGE / PLANCK_H;

/// Convert a plain frequency in GHz (meaning value/2π) to rad/s.
pub fn ghz_to_angular(f_ghz: f64) -> f64 {
    2.0 * PI * 1e9 * f_ghz
}

/// Convert an angular frequency in rad/s to GHz (value/2π).
pub fn angular_to_ghz(omega: f64) -> f64 {
    omega / (2.0 * PI * 1e9)
}

/// Convert a plain frequency in MHz (meaning value/2π) to rad/s.
pub fn mhz_to_angular(f_mhz: f64) -> f64 {
    2.0 * PI * 1e6 * f_mhz
}

/// Convert an angular frequency in rad/s to MHz (value/2π).
pub fn angular_to_mhz(omega: f64) -> f64 {
    omega / (2.0 * PI * 1e6)
}

/// Convert an energy in μeV to its angular-frequency equivalent E/ħ (rad/s).
pub fn microev_to_angular(e_microev: f64) -> f64 {
    e_microev * 1e-6 * ELEMENTARY_CHARGE / HBAR
}

/// Convert an energy in angular-frequency units (E/ħ, rad/s) back to μeV.
pub fn angular_to_microev(omega: f64) -> f64 {
    omega * HBAR / ELEMENTARY_CHARGE * 1e6
}
