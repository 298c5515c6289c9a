//! Driven transmon in the Cooper-pair charge basis.
//!
//! The static Hamiltonian is H₀ = 4E_C(n̂ − n_g)² − E_J cos φ̂, which is
//! tridiagonal in the charge basis |C_m⟩ (cos φ̂ couples m ↔ m ± 1), and the
//! drive adds Ω_q n̂ cos(ω_d t) on the diagonal. Bath-coupling operators
//! (n̂, φ̂, sin(φ̂/2), cos(φ̂/2)) are built from their closed-form charge-basis
//! matrix elements.
//!
//! Internally every energy is expressed as E/ħ in rad/s; constructors taking
//! GHz apply the 2π factor.

use ndarray::prelude::*;
use num_complex::Complex64;
use serde::{Deserialize, Serialize};
use std::f64::consts::PI;

use crate::constants::ghz_to_angular;
use crate::error::{Error, Result};

/// Static transmon parameters. Energies are stored as angular frequencies
/// (E/ħ, rad/s); `dim` is the charge-basis truncation, odd so the charge
/// indices run m = −(D−1)/2 … +(D−1)/2.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct TransmonParams {
    pub e_c: f64,
    pub e_j: f64,
    pub n_g: f64,
    pub dim: usize,
}

impl TransmonParams {
    pub fn new(e_c: f64, e_j: f64, n_g: f64, dim: usize) -> Result<Self> {
        let p = TransmonParams { e_c, e_j, n_g, dim };
        p.validate()?;
        Ok(p)
    }

    /// Energies in h·GHz, as reported in device tables.
    pub fn from_ghz(e_c_ghz: f64, e_j_ghz: f64, n_g: f64, dim: usize) -> Result<Self> {
        Self::new(
            ghz_to_angular(e_c_ghz),
            ghz_to_angular(e_j_ghz),
            n_g,
            dim,
        )
    }

    pub fn validate(&self) -> Result<()> {
        if self.dim < 3 || self.dim % 2 == 0 {
            return Err(Error::InvalidParameter(format!(
                "dim must be odd and >= 3, got {}",
                self.dim
            )));
        }
        if !(self.e_c > 0.0) || !self.e_c.is_finite() {
            return Err(Error::InvalidParameter(format!("e_c must be > 0, got {}", self.e_c)));
        }
        if self.e_j < 0.0 || !self.e_j.is_finite() {
            return Err(Error::InvalidParameter(format!("e_j must be >= 0, got {}", self.e_j)));
        }
        if !self.n_g.is_finite() {
            return Err(Error::InvalidParameter("n_g must be finite".into()));
        }
        Ok(())
    }

    /// Charge index of basis row a.
    pub fn charge_index(&self, a: usize) -> f64 {
        a as f64 - (self.dim as f64 - 1.0) / 2.0
    }

    /// Diagonal of the static Hamiltonian, 4E_C(m − n_g)².
    pub fn static_diagonal(&self) -> Array1<f64> {
        Array1::from_iter((0..self.dim).map(|a| {
            let m = self.charge_index(a);
            4.0 * self.e_c * (m - self.n_g) * (m - self.n_g)
        }))
    }

    /// First off-diagonal of the static Hamiltonian, −E_J/2.
    pub fn static_offdiagonal(&self) -> Array1<f64> {
        Array1::from_elem(self.dim - 1, -self.e_j / 2.0)
    }
}

/// Semiclassical drive parameters, both angular (rad/s).
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct DriveParams {
    pub omega_q: f64,
    pub omega_d: f64,
}

impl DriveParams {
    pub fn new(omega_q: f64, omega_d: f64) -> Result<Self> {
        let d = DriveParams { omega_q, omega_d };
        d.validate()?;
        Ok(d)
    }

    /// Plain-frequency constructor: values are Ω_q/2π and ω_d/2π in GHz.
    pub fn from_ghz(omega_q_ghz: f64, omega_d_ghz: f64) -> Result<Self> {
        Self::new(ghz_to_angular(omega_q_ghz), ghz_to_angular(omega_d_ghz))
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.omega_d > 0.0) || !self.omega_d.is_finite() {
            return Err(Error::InvalidParameter(format!(
                "omega_d must be > 0, got {}",
                self.omega_d
            )));
        }
        if self.omega_q < 0.0 || !self.omega_q.is_finite() {
            return Err(Error::InvalidParameter(format!(
                "omega_q must be >= 0, got {}",
                self.omega_q
            )));
        }
        Ok(())
    }

    /// Drive period T = 2π/ω_d.
    pub fn period(&self) -> f64 {
        2.0 * PI / self.omega_d
    }
}

/// The transmon operators entering the model.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum ChargeOperatorKind {
    Number,
    Phase,
    SinHalfPhase,
    CosHalfPhase,
    StaticHamiltonian,
}

impl ChargeOperatorKind {
    /// Whether the stored matrix is Hermitian. The sin/cos(φ̂/2) matrices
    /// carry the literal global factor i of their closed-form elements and
    /// are consumed only through |·|², so Hermiticity is not asserted for
    /// them.
    pub fn is_hermitian(&self) -> bool {
        matches!(
            self,
            ChargeOperatorKind::Number
                | ChargeOperatorKind::Phase
                | ChargeOperatorKind::StaticHamiltonian
        )
    }
}

/// A dense charge-basis operator matrix tagged with its kind.
#[derive(Clone, Debug)]
pub struct ChargeOperator {
    pub kind: ChargeOperatorKind,
    pub matrix: Array2<Complex64>,
}

fn parity(k: i64) -> f64 {
    if k.rem_euclid(2) == 0 {
        1.0
    } else {
        -1.0
    }
}

/// Build H₀ = 4E_C(n̂ − n_g)² − E_J cos φ̂ as a dense operator (rad/s).
pub fn build_static_hamiltonian(params: &TransmonParams) -> Result<ChargeOperator> {
    params.validate()?;
    let d = params.dim;
    let mut h = Array2::<Complex64>::zeros((d, d));
    let diag = params.static_diagonal();
    for a in 0..d {
        h[[a, a]] = Complex64::new(diag[a], 0.0);
    }
    let off = -params.e_j / 2.0;
    for a in 0..d - 1 {
        h[[a, a + 1]] = Complex64::new(off, 0.0);
        h[[a + 1, a]] = Complex64::new(off, 0.0);
    }
    Ok(ChargeOperator {
        kind: ChargeOperatorKind::StaticHamiltonian,
        matrix: h,
    })
}

/// Build one of the dimensionless coupling operators from its charge-basis
/// matrix elements:
///
/// - `Number`:       ⟨C_n|n̂|C_m⟩ = m δ_nm
/// - `Phase`:        ⟨C_n|φ̂|C_m⟩ = i(−1)^(n−m+1)/(n−m), 0 on the diagonal
/// - `SinHalfPhase`: (i/π)(−1)^(n−m+1)(n−m)/((n−m)² − 1/4)
/// - `CosHalfPhase`: (i/2π)(−1)^(n−m)/((n−m)² − 1/4)
pub fn build_coupling_operator(kind: ChargeOperatorKind, dim: usize) -> Result<ChargeOperator> {
    if dim < 3 || dim % 2 == 0 {
        return Err(Error::InvalidParameter(format!(
            "dim must be odd and >= 3, got {dim}"
        )));
    }
    let half = (dim as i64 - 1) / 2;
    let mut m = Array2::<Complex64>::zeros((dim, dim));
    match kind {
        ChargeOperatorKind::Number => {
            for a in 0..dim {
                m[[a, a]] = Complex64::new((a as i64 - half) as f64, 0.0);
            }
        }
        ChargeOperatorKind::Phase => {
            for a in 0..dim {
                for b in 0..dim {
                    let k = a as i64 - b as i64;
                    if k != 0 {
                        m[[a, b]] = Complex64::new(0.0, parity(k + 1) / k as f64);
                    }
                }
            }
        }
        ChargeOperatorKind::SinHalfPhase => {
            for a in 0..dim {
                for b in 0..dim {
                    let k = (a as i64 - b as i64) as f64;
                    let v = parity(a as i64 - b as i64 + 1) * k / (k * k - 0.25) / PI;
                    m[[a, b]] = Complex64::new(0.0, v);
                }
            }
        }
        ChargeOperatorKind::CosHalfPhase => {
            for a in 0..dim {
                for b in 0..dim {
                    let k = (a as i64 - b as i64) as f64;
                    let v = parity(a as i64 - b as i64) / (k * k - 0.25) / (2.0 * PI);
                    m[[a, b]] = Complex64::new(0.0, v);
                }
            }
        }
        ChargeOperatorKind::StaticHamiltonian => {
            return Err(Error::InvalidParameter(
                "StaticHamiltonian requires transmon parameters; use build_static_hamiltonian"
                    .into(),
            ));
        }
    }
    Ok(ChargeOperator { kind, matrix: m })
}

/// H(t) = H₀ + Ω_q cos(ω_d t) n̂ as a dense matrix (rad/s).
pub fn hamiltonian_at_time(
    params: &TransmonParams,
    drive: &DriveParams,
    t: f64,
) -> Result<Array2<Complex64>> {
    params.validate()?;
    drive.validate()?;
    if !t.is_finite() {
        return Err(Error::InvalidParameter(format!("time must be finite, got {t}")));
    }
    let mut h = build_static_hamiltonian(params)?.matrix;
    let coeff = drive.omega_q * (drive.omega_d * t).cos();
    for a in 0..params.dim {
        let m = params.charge_index(a);
        h[[a, a]] += Complex64::new(coeff * m, 0.0);
    }
    Ok(h)
}
