//! Floquet engine: one-period propagator, Floquet modes and quasienergies,
//! mode tables over a drive period, period-averaged energies, and the
//! chaotic-subspace classification.
//!
//! The propagator uses piecewise-constant midpoint exponentiation: [0, T] is
//! split into n_big_t − 1 uniform steps and H(t_mid) is exponentiated per
//! step through an eigendecomposition of the (real symmetric tridiagonal)
//! step generator, which keeps every step exactly unitary. Because
//! cos(ω_d t) is symmetric about T/2, the mirrored second half-period equals
//! the transposed first-half product, so U(T,0) = P1ᵀ·P1 with P1 the
//! first-half product; this halves the work without changing the scheme.
//!
//! Quasienergies are folded into the first Brillouin zone (−ω_d/2, ω_d/2]
//! and modes are ordered by ascending period-averaged energy H̄_q.

use ndarray::prelude::*;
use ndarray_linalg::{Eig, QR};
use num_complex::Complex64;
use serde::{Deserialize, Serialize};
use std::f64::consts::PI;

use crate::charge::{DriveParams, TransmonParams};
use crate::error::{Error, Result};
use crate::linalg::{self, SplitMatrix};

/// Unitarity tolerance for accepted propagators.
pub const UNITARITY_TOL: f64 = 1e-8;
/// Column-norm drift tolerance for mode-table propagation.
pub const TABLE_DRIFT_TOL: f64 = 1e-6;
/// Max-overlap threshold separating regular from chaotic Floquet modes.
pub const CHAOTIC_OVERLAP_THRESHOLD: f64 = 0.5;

/// Numerical resolution parameters for the Floquet calculations.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct NumericalConfig {
    /// Hilbert-space dimension D (odd).
    pub dim: usize,
    /// Fourier order bound |k| ≤ k_max of the transition tensors.
    pub k_max: usize,
    /// Number of mode-table sampling points per period.
    pub n_t: usize,
    /// Number of time steps for propagation/integration (n_big_t − 1 steps).
    pub n_big_t: usize,
}

impl Default for NumericalConfig {
    fn default() -> Self {
        NumericalConfig {
            dim: 401,
            k_max: 200,
            n_t: 2001,
            n_big_t: 20001,
        }
    }
}

impl NumericalConfig {
    pub fn validate(&self) -> Result<()> {
        if self.dim < 3 || self.dim % 2 == 0 {
            return Err(Error::InvalidParameter(format!(
                "dim must be odd and >= 3, got {}",
                self.dim
            )));
        }
        if self.n_t < 3 {
            return Err(Error::InvalidParameter(format!(
                "n_t must be >= 3, got {}",
                self.n_t
            )));
        }
        if self.n_big_t < 3 {
            return Err(Error::InvalidParameter(format!(
                "n_big_t must be >= 3, got {}",
                self.n_big_t
            )));
        }
        Ok(())
    }

    /// Substeps per mode-table sample so that samples fall exactly on the
    /// propagation grid at comparable resolution to n_big_t.
    pub fn table_substeps(&self) -> usize {
        ((self.n_big_t - 1) + self.n_t - 1) / self.n_t
    }
}

/// cos(2π·num/den) evaluated after folding the phase into [0, π], so that
/// mirrored arguments produce bitwise-identical values.
fn cos_two_pi_frac(num: i64, den: i64) -> f64 {
    debug_assert!(den > 0);
    let r = num.rem_euclid(den);
    let r = r.min(den - r);
    (2.0 * PI * r as f64 / den as f64).cos()
}

/// Midpoint drive factor cos(ω_d t_j) at t_j = (j + 1/2)·T/n_steps.
fn midpoint_drive_factor(j: usize, n_steps: usize) -> f64 {
    cos_two_pi_frac(2 * j as i64 + 1, 2 * n_steps as i64)
}

/// Drive factor cos(ω_d t_s) at the sample time t_s = s·T/n_t.
fn sample_drive_factor(s: usize, n_t: usize) -> f64 {
    cos_two_pi_frac(s as i64, n_t as i64)
}

struct StepKernel {
    coeff: f64,
    vecs: Array2<f64>,
    cos_p: Array1<f64>,
    sin_p: Array1<f64>,
}

/// Sequential midpoint propagation of `state` through steps `range` of the
/// global n_steps grid. `after_step` observes the state after each step.
fn propagate_steps<F>(
    params: &TransmonParams,
    drive: &DriveParams,
    n_steps: usize,
    range: std::ops::Range<usize>,
    state: &mut SplitMatrix,
    mut after_step: F,
) -> Result<()>
where
    F: FnMut(usize, &SplitMatrix) -> Result<()>,
{
    let dt = drive.period() / n_steps as f64;
    let diag0 = params.static_diagonal();
    let off = params.static_offdiagonal();
    let d = params.dim;
    let cols = state.ncols();
    let mut kernel: Option<StepKernel> = None;
    let mut work = SplitMatrix::zeros(d, cols);

    for j in range {
        let coeff = drive.omega_q * midpoint_drive_factor(j, n_steps);
        let rebuild = kernel.as_ref().map_or(true, |k| k.coeff != coeff);
        if rebuild {
            let mut diag = diag0.clone();
            for a in 0..d {
                diag[a] += coeff * params.charge_index(a);
            }
            let (vals, vecs) =
                linalg::sym_tridiag_eig(diag.as_slice().unwrap(), off.as_slice().unwrap())?;
            let cos_p = vals.mapv(|v| (v * dt).cos());
            let sin_p = vals.mapv(|v| (v * dt).sin());
            kernel = Some(StepKernel {
                coeff,
                vecs,
                cos_p,
                sin_p,
            });
        }
        let k = kernel.as_ref().unwrap();

        // state ← V · e^{−iΛdt} · Vᵀ · state, kept in split re/im form
        linalg::mat_mul(&k.vecs.t(), &state.re.view(), &mut work.re);
        linalg::mat_mul(&k.vecs.t(), &state.im.view(), &mut work.im);
        for r in 0..d {
            let (c, s) = (k.cos_p[r], k.sin_p[r]);
            let mut row_re = work.re.row_mut(r);
            let mut row_im = work.im.row_mut(r);
            for x in 0..cols {
                let (re, im) = (row_re[x], row_im[x]);
                row_re[x] = c * re + s * im;
                row_im[x] = c * im - s * re;
            }
        }
        linalg::mat_mul(&k.vecs.view(), &work.re.view(), &mut state.re);
        linalg::mat_mul(&k.vecs.view(), &work.im.view(), &mut state.im);

        after_step(j, state)?;
    }
    Ok(())
}

/// P1ᵀ·P1 for a split matrix P1 (complex transpose-product).
fn transpose_product(p: &SplitMatrix) -> SplitMatrix {
    let n = p.nrows();
    let mut out = SplitMatrix::zeros(n, n);
    let mut tmp = Array2::<f64>::zeros((n, n));
    linalg::mat_mul(&p.re.t(), &p.re.view(), &mut out.re);
    linalg::mat_mul(&p.im.t(), &p.im.view(), &mut tmp);
    out.re -= &tmp;
    linalg::mat_mul(&p.re.t(), &p.im.view(), &mut out.im);
    linalg::mat_mul(&p.im.t(), &p.re.view(), &mut tmp);
    out.im += &tmp;
    out
}

/// One-period propagator U(T, 0).
///
/// Fails with `UnitarityLoss` if ‖U†U − I‖_max exceeds 1e−8, which signals
/// that n_big_t is too small for the requested parameters.
pub fn one_period_propagator(
    params: &TransmonParams,
    drive: &DriveParams,
    cfg: &NumericalConfig,
) -> Result<Array2<Complex64>> {
    params.validate()?;
    drive.validate()?;
    cfg.validate()?;
    if params.dim != cfg.dim {
        return Err(Error::DimensionMismatch(format!(
            "transmon dim {} != numerical dim {}",
            params.dim, cfg.dim
        )));
    }
    let n_steps = cfg.n_big_t - 1;
    let mut state = SplitMatrix::identity(params.dim);
    let u = if n_steps % 2 == 0 {
        propagate_steps(params, drive, n_steps, 0..n_steps / 2, &mut state, |_, _| Ok(()))?;
        transpose_product(&state).to_complex()
    } else {
        propagate_steps(params, drive, n_steps, 0..n_steps, &mut state, |_, _| Ok(()))?;
        state.to_complex()
    };
    let residual = linalg::unitarity_residual(&u);
    if residual > UNITARITY_TOL {
        return Err(Error::UnitarityLoss {
            residual,
            tolerance: UNITARITY_TOL,
        });
    }
    Ok(u)
}

/// Floquet modes at t = 0 with quasienergies folded into the first
/// Brillouin zone, ordered by ascending period-averaged energy H̄_q.
#[derive(Clone, Debug)]
pub struct FloquetBasis {
    /// Column i is |φ_i(0)⟩.
    pub modes0: Array2<Complex64>,
    /// Quasienergies ε_i ∈ (−ω_d/2, ω_d/2], rad/s, indexed like `modes0`.
    pub quasienergies: Array1<f64>,
    /// Period-averaged energies H̄_q[i], rad/s, ascending.
    pub avg_energy: Array1<f64>,
    /// Position of mode i in the quasienergy-ascending spectral ordering
    /// that preceded the H̄_q sort.
    pub order: Vec<usize>,
    /// Drive frequency defining the Brillouin zone.
    pub omega_d: f64,
}

impl FloquetBasis {
    pub fn dim(&self) -> usize {
        self.modes0.nrows()
    }
}

/// Eigendecompose U(T,0): returns modes (columns) and quasienergies sorted
/// ascending in ε, with degenerate eigenphase clusters re-orthonormalized
/// by QR and deterministically ordered.
fn floquet_eigenproblem(
    u: &Array2<Complex64>,
    drive: &DriveParams,
) -> Result<(Array2<Complex64>, Array1<f64>)> {
    linalg::pin_blas_single_thread();
    let d = u.nrows();
    let period = drive.period();
    let (lambdas, vecs) = u
        .eig()
        .map_err(|e| Error::Eigen(format!("propagator eigendecomposition: {e}")))?;

    // ε = −arg(λ)/T; arg ∈ (−π, π] gives ε ∈ [−ω_d/2, ω_d/2); remap the
    // lower edge onto the upper so the zone is (−ω_d/2, ω_d/2].
    let mut eps: Vec<f64> = lambdas
        .iter()
        .map(|l| {
            let e = -l.arg() / period;
            if e <= -drive.omega_d / 2.0 {
                e + drive.omega_d
            } else {
                e
            }
        })
        .collect();

    let mut idx: Vec<usize> = (0..d).collect();
    idx.sort_by(|&a, &b| eps[a].total_cmp(&eps[b]));
    let mut modes = Array2::<Complex64>::zeros((d, d));
    for (col, &i) in idx.iter().enumerate() {
        let mut c = modes.column_mut(col);
        let norm = vecs.column(i).mapv(|x| x.norm_sqr()).sum().sqrt();
        c.assign(&vecs.column(i).mapv(|x| x / norm));
    }
    let eps_sorted: Vec<f64> = idx.iter().map(|&i| eps[i]).collect();
    eps.copy_from_slice(&eps_sorted);

    for &tol_scale in &[1e-10, 1e-7] {
        let tol = tol_scale * drive.omega_d;
        canonicalize_clusters(&mut modes, &eps, drive.omega_d, tol)?;
        let gram = orthonormality_residual(&modes);
        if gram <= 1e-8 {
            apply_phase_convention(&mut modes);
            return Ok((modes, Array1::from(eps)));
        }
    }
    let gram = orthonormality_residual(&modes);
    Err(Error::Eigen(format!(
        "Floquet mode orthonormality residual {gram:.3e} exceeds 1e-8 after \
         degenerate-cluster re-orthonormalization"
    )))
}

fn orthonormality_residual(modes: &Array2<Complex64>) -> f64 {
    linalg::unitarity_residual(modes)
}

/// QR-orthonormalize degenerate quasienergy clusters (spacing below `tol`,
/// circular in the Brillouin zone) and order members by descending
/// |⟨C_0|φ⟩|², then by ascending charge-index centroid.
fn canonicalize_clusters(
    modes: &mut Array2<Complex64>,
    eps: &[f64],
    omega_d: f64,
    tol: f64,
) -> Result<()> {
    let d = eps.len();
    let mut clusters: Vec<Vec<usize>> = Vec::new();
    let mut current = vec![0usize];
    for i in 1..d {
        if eps[i] - eps[i - 1] < tol {
            current.push(i);
        } else {
            clusters.push(std::mem::take(&mut current));
            current = vec![i];
        }
    }
    clusters.push(current);
    // wrap-around: the zone is a circle, so the first and last cluster can
    // be one degenerate group
    if clusters.len() > 1 {
        let first = &clusters[0];
        let last = clusters.last().unwrap();
        if (eps[first[0]] + omega_d) - eps[*last.last().unwrap()] < tol {
            let mut merged = clusters.pop().unwrap();
            merged.extend(clusters.remove(0));
            clusters.push(merged);
        }
    }

    let center = (modes.nrows() - 1) / 2;
    for cluster in clusters.into_iter().filter(|c| c.len() > 1) {
        let mut block = Array2::<Complex64>::zeros((modes.nrows(), cluster.len()));
        for (c, &i) in cluster.iter().enumerate() {
            block.column_mut(c).assign(&modes.column(i));
        }
        let (q, _r) = block
            .qr()
            .map_err(|e| Error::Eigen(format!("cluster QR: {e}")))?;
        // rank the orthonormal members: descending central-charge weight,
        // then ascending charge centroid
        let mut keys: Vec<(usize, f64, f64)> = (0..cluster.len())
            .map(|c| {
                let col = q.column(c);
                let w0 = col[center].norm_sqr();
                let centroid: f64 = col
                    .iter()
                    .enumerate()
                    .map(|(a, x)| (a as f64 - center as f64) * x.norm_sqr())
                    .sum();
                (c, w0, centroid)
            })
            .collect();
        keys.sort_by(|x, y| y.1.total_cmp(&x.1).then(x.2.total_cmp(&y.2)));
        for (slot, (c, _, _)) in keys.into_iter().enumerate() {
            modes.column_mut(cluster[slot]).assign(&q.column(c));
        }
    }
    Ok(())
}

/// Rotate each column so its largest-magnitude entry is real positive.
fn apply_phase_convention(modes: &mut Array2<Complex64>) {
    for mut col in modes.columns_mut() {
        let mut best = 0usize;
        let mut best_mag = -1.0f64;
        for (a, x) in col.iter().enumerate() {
            let m = x.norm_sqr();
            if m > best_mag + 1e-30 {
                best_mag = m;
                best = a;
            }
        }
        let pivot = col[best];
        if pivot.norm() > 0.0 {
            let phase = pivot.conj() / pivot.norm();
            col.mapv_inplace(|x| x * phase);
        }
    }
}

/// Tridiagonal expectation v = H(t_s)ψ, accumulated as ⟨ψ|v⟩ per column.
/// Returns (re, im) pairs.
fn tridiag_expectations(
    state: &SplitMatrix,
    diag: &Array1<f64>,
    off: &Array1<f64>,
) -> Vec<(f64, f64)> {
    let d = state.nrows();
    let cols = state.ncols();
    let mut out = Vec::with_capacity(cols);
    for i in 0..cols {
        let mut acc_re = 0.0f64;
        let mut acc_im = 0.0f64;
        for a in 0..d {
            let (pr, pi) = (state.re[[a, i]], state.im[[a, i]]);
            let mut vr = diag[a] * pr;
            let mut vi = diag[a] * pi;
            if a > 0 {
                vr += off[a - 1] * state.re[[a - 1, i]];
                vi += off[a - 1] * state.im[[a - 1, i]];
            }
            if a + 1 < d {
                vr += off[a] * state.re[[a + 1, i]];
                vi += off[a] * state.im[[a + 1, i]];
            }
            // conj(ψ_a)·v_a
            acc_re += pr * vr + pi * vi;
            acc_im += pr * vi - pi * vr;
        }
        out.push((acc_re, acc_im));
    }
    out
}

/// Floquet basis from a one-period propagator: eigendecomposition,
/// Brillouin-zone folding, H̄_q via the period-averaged energy quadrature,
/// and the final ascending-H̄_q ordering.
pub fn compute_floquet_basis(
    u: &Array2<Complex64>,
    params: &TransmonParams,
    drive: &DriveParams,
    cfg: &NumericalConfig,
) -> Result<FloquetBasis> {
    let residual = linalg::unitarity_residual(u);
    if residual > UNITARITY_TOL {
        return Err(Error::UnitarityLoss {
            residual,
            tolerance: UNITARITY_TOL,
        });
    }
    let (modes, eps) = floquet_eigenproblem(u, drive)?;
    let hbar_q = averaged_energy_of_modes(&modes, params, drive, cfg)?;

    let d = params.dim;
    let mut perm: Vec<usize> = (0..d).collect();
    perm.sort_by(|&a, &b| {
        hbar_q[a]
            .total_cmp(&hbar_q[b])
            .then(eps[a].total_cmp(&eps[b]))
            .then(a.cmp(&b))
    });

    let mut modes0 = Array2::<Complex64>::zeros((d, d));
    let mut quasi = Array1::<f64>::zeros(d);
    let mut avg = Array1::<f64>::zeros(d);
    for (col, &i) in perm.iter().enumerate() {
        modes0.column_mut(col).assign(&modes.column(i));
        quasi[col] = eps[i];
        avg[col] = hbar_q[i];
    }
    Ok(FloquetBasis {
        modes0,
        quasienergies: quasi,
        avg_energy: avg,
        order: perm,
        omega_d: drive.omega_d,
    })
}

/// H̄_q for every column of `modes` (Floquet modes at t = 0), by composite
/// trapezoid over n_t uniform samples of the periodic integrand
/// ⟨φ(t)|H(t)|φ(t)⟩; the drive factor is evaluated analytically at each
/// sample. Phase gauges cancel in the expectation value, so the integrand
/// is accumulated directly on the propagated columns.
fn averaged_energy_of_modes(
    modes: &Array2<Complex64>,
    params: &TransmonParams,
    drive: &DriveParams,
    cfg: &NumericalConfig,
) -> Result<Array1<f64>> {
    let d = params.dim;
    let cols = modes.ncols();
    let n_t = cfg.n_t;
    let n_sub = cfg.table_substeps();
    let n_steps = n_t * n_sub;
    let diag0 = params.static_diagonal();
    let off = params.static_offdiagonal();

    let mut acc = vec![(0.0f64, 0.0f64); cols];
    let mut state = SplitMatrix::from_complex(modes);

    let sample = |s: usize, st: &SplitMatrix, acc: &mut Vec<(f64, f64)>| -> Result<()> {
        let coeff = drive.omega_q * sample_drive_factor(s, n_t);
        let mut diag = diag0.clone();
        for a in 0..d {
            diag[a] += coeff * params.charge_index(a);
        }
        for (i, (re, im)) in tridiag_expectations(st, &diag, &off).into_iter().enumerate() {
            acc[i].0 += re;
            acc[i].1 += im;
        }
        let norms = st.column_norms_sq();
        for n in norms.iter() {
            if (n.sqrt() - 1.0).abs() > TABLE_DRIFT_TOL {
                return Err(Error::TableDrift((n.sqrt() - 1.0).abs()));
            }
        }
        Ok(())
    };

    sample(0, &state, &mut acc)?;
    let mut next_sample = 1usize;
    propagate_steps(params, drive, n_steps, 0..n_steps, &mut state, |j, st| {
        if (j + 1) % n_sub == 0 && next_sample < n_t {
            sample(next_sample, st, &mut acc)?;
            next_sample += 1;
        }
        Ok(())
    })?;

    let mut out = Array1::<f64>::zeros(cols);
    let scale = drive.omega_d.max(1.0);
    for (i, (re, im)) in acc.into_iter().enumerate() {
        let val = re / n_t as f64;
        let imag = (im / n_t as f64).abs();
        if imag > 1e-6 * val.abs().max(scale) {
            return Err(Error::ImaginaryResidual(imag));
        }
        out[i] = val;
    }
    Ok(out)
}

/// Snapshots of Floquet modes over one drive period [0, T).
#[derive(Clone, Debug)]
pub struct ModeTable {
    pub period: f64,
    /// Sample times t_s = s·T/n_t.
    pub times: Vec<f64>,
    /// Basis indices of the stored mode columns.
    pub mode_indices: Vec<usize>,
    /// One D×K snapshot per sample; column c is |φ_{mode_indices[c]}(t_s)⟩.
    pub samples: Vec<Array2<Complex64>>,
}

impl ModeTable {
    pub fn n_t(&self) -> usize {
        self.samples.len()
    }
}

/// Mode table of every basis mode over one period.
pub fn mode_table(
    basis: &FloquetBasis,
    params: &TransmonParams,
    drive: &DriveParams,
    cfg: &NumericalConfig,
) -> Result<ModeTable> {
    let all: Vec<usize> = (0..basis.dim()).collect();
    mode_table_selected(basis, params, drive, cfg, &all)
}

/// Mode table restricted to the given basis modes; |φ_i(t_s)⟩ =
/// e^{+iε_i t_s}·U(t_s, 0)|φ_i(0)⟩ at n_t uniform samples.
pub fn mode_table_selected(
    basis: &FloquetBasis,
    params: &TransmonParams,
    drive: &DriveParams,
    cfg: &NumericalConfig,
    indices: &[usize],
) -> Result<ModeTable> {
    params.validate()?;
    drive.validate()?;
    cfg.validate()?;
    let d = basis.dim();
    if d != params.dim {
        return Err(Error::DimensionMismatch(format!(
            "basis dim {} != transmon dim {}",
            d, params.dim
        )));
    }
    let n_t = cfg.n_t;
    let n_sub = cfg.table_substeps();
    let n_steps = n_t * n_sub;
    let period = drive.period();
    let cols = indices.len();

    let mut init = Array2::<Complex64>::zeros((d, cols));
    for (c, &i) in indices.iter().enumerate() {
        init.column_mut(c).assign(&basis.modes0.column(i));
    }
    let eps: Vec<f64> = indices.iter().map(|&i| basis.quasienergies[i]).collect();

    let mut samples: Vec<Array2<Complex64>> = Vec::with_capacity(n_t);
    let times: Vec<f64> = (0..n_t).map(|s| s as f64 * period / n_t as f64).collect();
    // snapshot at t = 0 is the initial data itself
    samples.push(init.clone());

    let mut state = SplitMatrix::from_complex(&init);
    let mut next_sample = 1usize;
    propagate_steps(params, drive, n_steps, 0..n_steps, &mut state, |j, st| {
        if (j + 1) % n_sub == 0 && next_sample < n_t {
            let norms = st.column_norms_sq();
            for n in norms.iter() {
                let drift = (n.sqrt() - 1.0).abs();
                if drift > TABLE_DRIFT_TOL {
                    return Err(Error::TableDrift(drift));
                }
            }
            let t = times[next_sample];
            let mut snap = Array2::<Complex64>::zeros((d, cols));
            for c in 0..cols {
                let phase = Complex64::from_polar(1.0, eps[c] * t);
                for a in 0..d {
                    snap[[a, c]] = Complex64::new(st.re[[a, c]], st.im[[a, c]]) * phase;
                }
            }
            samples.push(snap);
            next_sample += 1;
        }
        Ok(())
    })?;

    Ok(ModeTable {
        period,
        times,
        mode_indices: indices.to_vec(),
        samples,
    })
}

/// Period-averaged energies from an existing mode table (public form of the
/// quadrature; identical to the values stored in the basis when the table
/// covers the same modes).
pub fn averaged_energy(
    basis: &FloquetBasis,
    table: &ModeTable,
    params: &TransmonParams,
    drive: &DriveParams,
) -> Result<Array1<f64>> {
    let n_t = table.n_t();
    let d = basis.dim();
    let diag0 = params.static_diagonal();
    let off = params.static_offdiagonal();
    let cols = table.mode_indices.len();
    let mut acc = vec![(0.0f64, 0.0f64); cols];
    for (s, snap) in table.samples.iter().enumerate() {
        let coeff = drive.omega_q * sample_drive_factor(s, n_t);
        let mut diag = diag0.clone();
        for a in 0..d {
            diag[a] += coeff * params.charge_index(a);
        }
        let split = SplitMatrix::from_complex(snap);
        for (i, (re, im)) in tridiag_expectations(&split, &diag, &off).into_iter().enumerate() {
            acc[i].0 += re;
            acc[i].1 += im;
        }
    }
    let mut out = Array1::<f64>::zeros(cols);
    let scale = drive.omega_d.max(1.0);
    for (i, (re, im)) in acc.into_iter().enumerate() {
        let val = re / n_t as f64;
        let imag = (im / n_t as f64).abs();
        if imag > 1e-6 * val.abs().max(scale) {
            return Err(Error::ImaginaryResidual(imag));
        }
        out[i] = val;
    }
    Ok(out)
}

/// Regular/chaotic label of one Floquet mode.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub enum ModeLabel {
    Chaotic,
    Regular,
}

/// Overlap-based classification of the Floquet modes against the undriven
/// eigenbasis: a mode is Regular when some eigenstate carries at least half
/// of its weight, otherwise it is a chaotic-layer member.
#[derive(Clone, Debug)]
pub struct ChaoticClassification {
    pub n_ch: usize,
    /// overlaps[(i, j)] = |⟨j|φ_i(0)⟩|² (mode i, eigenstate j).
    pub overlaps: Array2<f64>,
    pub labels: Vec<ModeLabel>,
    /// Max-overlap threshold used for the Regular label.
    pub threshold: f64,
}

/// Eigenbasis of the undriven Hamiltonian: (energies ascending, columns).
pub fn static_eigenbasis(params: &TransmonParams) -> Result<(Array1<f64>, Array2<f64>)> {
    params.validate()?;
    let diag = params.static_diagonal();
    let off = params.static_offdiagonal();
    linalg::sym_tridiag_eig(diag.as_slice().unwrap(), off.as_slice().unwrap())
}

/// Classify the basis modes against the undriven eigenbasis at the same
/// parameters.
pub fn classify_chaotic(
    basis: &FloquetBasis,
    static_states: &Array2<f64>,
) -> Result<ChaoticClassification> {
    classify_modes(&basis.modes0, static_states)
}

pub(crate) fn classify_modes(
    modes: &Array2<Complex64>,
    static_states: &Array2<f64>,
) -> Result<ChaoticClassification> {
    let d = modes.nrows();
    if static_states.nrows() != d || static_states.ncols() != d {
        return Err(Error::DimensionMismatch(format!(
            "eigenbasis {}x{} vs modes dim {}",
            static_states.nrows(),
            static_states.ncols(),
            d
        )));
    }
    let split = SplitMatrix::from_complex(modes);
    let mut g_re = Array2::<f64>::zeros((d, d));
    let mut g_im = Array2::<f64>::zeros((d, d));
    linalg::mat_mul(&static_states.t(), &split.re.view(), &mut g_re);
    linalg::mat_mul(&static_states.t(), &split.im.view(), &mut g_im);
    // overlaps[i][j] = |⟨j|φ_i⟩|², i.e. transpose of the Gram layout
    let mut overlaps = Array2::<f64>::zeros((d, d));
    for i in 0..d {
        for j in 0..d {
            overlaps[[i, j]] = g_re[[j, i]] * g_re[[j, i]] + g_im[[j, i]] * g_im[[j, i]];
        }
    }
    let mut labels = Vec::with_capacity(d);
    let mut n_ch = 0usize;
    for i in 0..d {
        let max = overlaps.row(i).iter().fold(0.0f64, |m, &x| m.max(x));
        if max >= CHAOTIC_OVERLAP_THRESHOLD {
            labels.push(ModeLabel::Regular);
        } else {
            labels.push(ModeLabel::Chaotic);
            n_ch += 1;
        }
    }
    Ok(ChaoticClassification {
        n_ch,
        overlaps,
        labels,
        threshold: CHAOTIC_OVERLAP_THRESHOLD,
    })
}

/// Summed population of the four outermost charge states, per mode; used as
/// the charge-basis truncation guard after Floquet computations.
#[derive(Clone, Copy, Debug, Serialize, Deserialize)]
pub struct TruncationReport {
    pub max_outer_population: f64,
    pub threshold: f64,
    pub ok: bool,
}

pub fn truncation_guard(modes: &Array2<Complex64>, retained: &[usize]) -> TruncationReport {
    let d = modes.nrows();
    let outer = [0usize, 1, d - 2, d - 1];
    let mut worst = 0.0f64;
    for &i in retained {
        let col = modes.column(i);
        let pop: f64 = outer.iter().map(|&a| col[a].norm_sqr()).sum();
        worst = worst.max(pop);
    }
    let threshold = 1e-6;
    let ok = worst < threshold;
    if !ok {
        log::warn!(
            "charge-basis truncation guard: outermost-state population {worst:.3e} \
             >= {threshold:.0e}; increase dim"
        );
    }
    TruncationReport {
        max_outer_population: worst,
        threshold,
        ok,
    }
}

/// Full Floquet analysis of one drive point: propagator, basis, undriven
/// eigenbasis, and chaotic classification.
#[derive(Clone, Debug)]
pub struct FloquetAnalysis {
    pub basis: FloquetBasis,
    pub static_energies: Array1<f64>,
    pub static_states: Array2<f64>,
    pub classification: ChaoticClassification,
}

pub fn analyze(
    params: &TransmonParams,
    drive: &DriveParams,
    cfg: &NumericalConfig,
) -> Result<FloquetAnalysis> {
    let u = one_period_propagator(params, drive, cfg)?;
    let basis = compute_floquet_basis(&u, params, drive, cfg)?;
    let (static_energies, static_states) = static_eigenbasis(params)?;
    let classification = classify_chaotic(&basis, &static_states)?;
    Ok(FloquetAnalysis {
        basis,
        static_energies,
        static_states,
        classification,
    })
}
