//! Floquet–Markov dissipation engine: Fourier-resolved transition matrix
//! elements Ψ_{ij,k}, per-mechanism transition rates Γ_{ij,k} = J(Δ_{ij,k})
//! |Ψ_{ij,k}|² at Δ_{ij,k} = ε_i − ε_j + kω_d, total rate matrices, the
//! steady state of the rate equation, and the energy-loss rate
//! 𝒯 = ħ·Σ p_i Γ_{ij,k} Δ_{ij,k}.
//!
//! Tensors and the steady state are restricted to the lowest (by H̄_q)
//! D_active modes, D_active = max(2·N_ch, 60) capped at D; populations of
//! modes above N_ch are dominated by numerical error and are excluded
//! before computing 𝒯.

use ndarray::prelude::*;
use num_complex::Complex64;
use rayon::prelude::*;
use rustfft::FftPlanner;
use serde::Serialize;
use std::collections::BTreeMap;
use std::f64::consts::PI;

use crate::charge::{
    build_coupling_operator, ChargeOperator, ChargeOperatorKind, DriveParams, TransmonParams,
};
use crate::constants::HBAR;
use crate::error::{Error, Result};
use crate::floquet::{
    self, analyze, mode_table_selected, truncation_guard, FloquetAnalysis, FloquetBasis,
    ModeTable, NumericalConfig, TruncationReport,
};
use crate::spectra::{j_diel, j_rad, BathSet, SpectrumCache};

/// Radiative matrix elements are dropped beyond |Δ| = 2π·100 GHz, where
/// they are dominated by numerical error.
pub const RAD_DELTA_CUTOFF: f64 = 2.0 * PI * 100e9;
/// Rate-tensor entries below this fraction of the maximum are pruned.
pub const RATE_PRUNE_REL: f64 = 1e-18;
/// Floor of the active-subspace size.
pub const D_ACTIVE_FLOOR: usize = 60;

/// Active-subspace size for rate tensors and the steady state.
pub fn d_active(n_ch: usize, dim: usize) -> usize {
    (2 * n_ch).max(D_ACTIVE_FLOOR).min(dim)
}

/// Dissipation mechanisms.
#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Serialize)]
pub enum Mechanism {
    Rad,
    Diel,
    Qpg,
}

impl Mechanism {
    pub fn name(&self) -> &'static str {
        match self {
            Mechanism::Rad => "rad",
            Mechanism::Diel => "diel",
            Mechanism::Qpg => "qpg",
        }
    }

    /// Coupling operators entering this mechanism's rates.
    pub fn operator_kinds(&self) -> &'static [ChargeOperatorKind] {
        match self {
            Mechanism::Rad => &[ChargeOperatorKind::Number],
            Mechanism::Diel => &[ChargeOperatorKind::Phase],
            Mechanism::Qpg => &[
                ChargeOperatorKind::SinHalfPhase,
                ChargeOperatorKind::CosHalfPhase,
            ],
        }
    }
}

/// Fourier-resolved matrix elements Ψ_{ij,k} of one coupling operator in
/// the Floquet basis, |k| ≤ k_max, for the modes listed in `mode_indices`.
#[derive(Clone, Debug)]
pub struct TransitionTensor {
    pub operator_kind: ChargeOperatorKind,
    pub k_max: usize,
    pub mode_indices: Vec<usize>,
    /// Indexed (i, j, k + k_max).
    pub elements: Array3<Complex64>,
}

impl TransitionTensor {
    pub fn n_modes(&self) -> usize {
        self.elements.shape()[0]
    }

    pub fn element(&self, i: usize, j: usize, k: i64) -> Complex64 {
        self.elements[[i, j, (k + self.k_max as i64) as usize]]
    }

    /// Largest deviation from elements[j][i][−k] = conj(elements[i][j][k]),
    /// normalized by the largest element magnitude. Meaningful for
    /// Hermitian operator kinds.
    pub fn hermitian_symmetry_residual(&self) -> f64 {
        let n = self.n_modes();
        let kk = 2 * self.k_max + 1;
        let mut scale = 0.0f64;
        for x in self.elements.iter() {
            scale = scale.max(x.norm());
        }
        if scale == 0.0 {
            return 0.0;
        }
        let mut worst = 0.0f64;
        for i in 0..n {
            for j in 0..n {
                for kidx in 0..kk {
                    let mirror = self.elements[[j, i, kk - 1 - kidx]];
                    let here = self.elements[[i, j, kidx]];
                    worst = worst.max((mirror - here.conj()).norm());
                }
            }
        }
        worst / scale
    }
}

/// Ψ_{ij,k} = (1/T)∫₀ᵀ ⟨φ_i(t)|Ψ̂|φ_j(t)⟩e^{−ikω_d t} dt, via the discrete
/// Fourier transform over the mode table (a period average).
pub fn fourier_components(
    table: &ModeTable,
    op: &ChargeOperator,
    k_max: usize,
) -> Result<TransitionTensor> {
    let n_t = table.n_t();
    let limit = (n_t - 1) / 2;
    if k_max > limit {
        return Err(Error::Aliasing { k_max, limit });
    }
    let n_modes = table.mode_indices.len();
    let dim = table.samples[0].nrows();
    if op.matrix.nrows() != dim {
        return Err(Error::DimensionMismatch(format!(
            "operator dim {} vs table dim {}",
            op.matrix.nrows(),
            dim
        )));
    }

    // inner products per sample: G_s = Φ(t_s)† Ψ Φ(t_s)
    let mut cube = Array3::<Complex64>::zeros((n_modes, n_modes, n_t));
    cube.axis_iter_mut(Axis(2))
        .into_par_iter()
        .enumerate()
        .for_each(|(s, mut slab)| {
            crate::linalg::pin_blas_single_thread();
            let snap = &table.samples[s];
            let p = op.matrix.dot(snap);
            let adjoint = snap.t().mapv(|x| x.conj());
            let g = adjoint.dot(&p);
            slab.assign(&g);
        });

    // period-averaged DFT along the time axis
    let mut planner = FftPlanner::new();
    let fft = planner.plan_fft_forward(n_t);
    let kk = 2 * k_max + 1;
    let mut elements = Array3::<Complex64>::zeros((n_modes, n_modes, kk));
    let scratch_len = fft.get_inplace_scratch_len();
    elements
        .outer_iter_mut()
        .into_par_iter()
        .enumerate()
        .for_each(|(i, mut row_out)| {
            let mut scratch = vec![Complex64::new(0.0, 0.0); scratch_len];
            let mut series = vec![Complex64::new(0.0, 0.0); n_t];
            for j in 0..n_modes {
                for s in 0..n_t {
                    series[s] = cube[[i, j, s]];
                }
                fft.process_with_scratch(&mut series, &mut scratch);
                for kidx in 0..kk {
                    let k = kidx as i64 - k_max as i64;
                    let bin = k.rem_euclid(n_t as i64) as usize;
                    row_out[[j, kidx]] = series[bin] / n_t as f64;
                }
            }
        });

    Ok(TransitionTensor {
        operator_kind: op.kind,
        k_max,
        mode_indices: table.mode_indices.clone(),
        elements,
    })
}

/// Transition tensors grouped per mechanism.
pub enum MechanismOperators<'a> {
    Rad(&'a TransitionTensor),
    Diel(&'a TransitionTensor),
    Qpg {
        sin: &'a TransitionTensor,
        cos: &'a TransitionTensor,
    },
}

impl MechanismOperators<'_> {
    pub fn mechanism(&self) -> Mechanism {
        match self {
            MechanismOperators::Rad(_) => Mechanism::Rad,
            MechanismOperators::Diel(_) => Mechanism::Diel,
            MechanismOperators::Qpg { .. } => Mechanism::Qpg,
        }
    }

    fn primary(&self) -> &TransitionTensor {
        match self {
            MechanismOperators::Rad(t) | MechanismOperators::Diel(t) => t,
            MechanismOperators::Qpg { sin, .. } => sin,
        }
    }
}

/// Per-mechanism transition rates Γ_{ij,k} ≥ 0 on the Δ_{ij,k} grid.
#[derive(Clone, Debug)]
pub struct RateTensor {
    pub mechanism: Mechanism,
    pub k_max: usize,
    pub mode_indices: Vec<usize>,
    /// Γ_{ij,k}, indexed (i, j, k + k_max), 1/s.
    pub rates: Array3<f64>,
    /// Δ_{ij,k} = ε_i − ε_j + kω_d, rad/s.
    pub delta: Array3<f64>,
}

impl RateTensor {
    pub fn n_modes(&self) -> usize {
        self.rates.shape()[0]
    }
}

/// Assemble Γ_{ij,k} = Σ_l J^(l)(Δ_{ij,k})|Ψ^(l)_{ij,k}|² for one mechanism.
/// Radiative elements with |Δ| > 2π·100 GHz are zeroed; entries below
/// 1e−18 of the tensor maximum are pruned.
pub fn transition_rates(
    ops: MechanismOperators,
    basis: &FloquetBasis,
    baths: &BathSet,
    omega_d: f64,
    cache: Option<&SpectrumCache>,
) -> Result<RateTensor> {
    let tensor = ops.primary();
    let k_max = tensor.k_max;
    let n = tensor.n_modes();
    let kk = 2 * k_max + 1;
    if let MechanismOperators::Qpg { sin, cos } = &ops {
        if sin.mode_indices != cos.mode_indices || sin.k_max != cos.k_max {
            return Err(Error::DimensionMismatch(
                "QPG sin/cos tensors must share modes and k_max".into(),
            ));
        }
    }
    let eps: Vec<f64> = tensor
        .mode_indices
        .iter()
        .map(|&i| basis.quasienergies[i])
        .collect();

    let mechanism = ops.mechanism();
    let local_cache;
    let qpg_cache = match (&ops, cache) {
        (MechanismOperators::Qpg { .. }, Some(c)) => Some(c),
        (MechanismOperators::Qpg { .. }, None) => {
            local_cache = SpectrumCache::new(omega_d, baths.qpg.delta_al);
            Some(&local_cache)
        }
        _ => None,
    };

    let mut rates = Array3::<f64>::zeros((n, n, kk));
    let mut delta = Array3::<f64>::zeros((n, n, kk));
    let results: Result<Vec<()>> = rates
        .outer_iter_mut()
        .into_par_iter()
        .zip(delta.outer_iter_mut().into_par_iter())
        .enumerate()
        .map(|(i, (mut rate_row, mut delta_row))| {
            for j in 0..n {
                for kidx in 0..kk {
                    let k = kidx as i64 - k_max as i64;
                    let d = eps[i] - eps[j] + k as f64 * omega_d;
                    delta_row[[j, kidx]] = d;
                    let rate = match &ops {
                        MechanismOperators::Rad(t) => {
                            if d.abs() > RAD_DELTA_CUTOFF {
                                0.0
                            } else {
                                j_rad(d, &baths.rad) * t.elements[[i, j, kidx]].norm_sqr()
                            }
                        }
                        MechanismOperators::Diel(t) => {
                            j_diel(d, &baths.diel) * t.elements[[i, j, kidx]].norm_sqr()
                        }
                        MechanismOperators::Qpg { sin, cos } => {
                            let (jp, jm) =
                                qpg_cache.unwrap().j_qpg_pair_with(d, &baths.qpg)?;
                            jp * sin.elements[[i, j, kidx]].norm_sqr()
                                + jm * cos.elements[[i, j, kidx]].norm_sqr()
                        }
                    };
                    rate_row[[j, kidx]] = rate;
                }
            }
            Ok(())
        })
        .collect();
    results?;

    // prune numerical noise relative to the tensor maximum
    let max_rate = rates.iter().fold(0.0f64, |m, &x| m.max(x));
    if max_rate > 0.0 {
        let floor = RATE_PRUNE_REL * max_rate;
        rates.mapv_inplace(|x| if x < floor { 0.0 } else { x });
    }

    Ok(RateTensor {
        mechanism,
        k_max,
        mode_indices: tensor.mode_indices.clone(),
        rates,
        delta,
    })
}

/// Total rate matrix Γ_{ij} = Σ_k Σ_Ψ Γ^(Ψ)_{ij,k}.
#[derive(Clone, Debug)]
pub struct RateMatrix {
    pub gamma: Array2<f64>,
}

pub fn total_rate_matrix(tensors: &[RateTensor]) -> Result<RateMatrix> {
    let first = tensors
        .first()
        .ok_or_else(|| Error::InvalidParameter("no rate tensors given".into()))?;
    let n = first.n_modes();
    for t in tensors {
        if t.n_modes() != n || t.mode_indices != first.mode_indices {
            return Err(Error::DimensionMismatch(
                "rate tensors disagree on the active mode set".into(),
            ));
        }
    }
    let mut gamma = Array2::<f64>::zeros((n, n));
    for t in tensors {
        for i in 0..n {
            for j in 0..n {
                let mut acc = KahanSum::default();
                for kidx in 0..2 * t.k_max + 1 {
                    acc.add(t.rates[[i, j, kidx]]);
                }
                gamma[[i, j]] += acc.value();
            }
        }
    }
    Ok(RateMatrix { gamma })
}

#[derive(Default, Clone, Copy)]
struct KahanSum {
    sum: f64,
    comp: f64,
}

impl KahanSum {
    fn add(&mut self, x: f64) {
        let y = x - self.comp;
        let t = self.sum + y;
        self.comp = (t - self.sum) - y;
        self.sum = t;
    }

    fn value(&self) -> f64 {
        self.sum
    }
}

/// Steady state of dp_j/dt = Σ_i p_i Γ_ij − Σ_i p_j Γ_ji, solved as the
/// null vector of the generator L (L[j][i] = Γ_ij for i≠j, L[i][i] =
/// −Σ_j Γ_ij). States with neither incoming nor outgoing rates are held at
/// zero population and excluded from the solve; a null space of dimension
/// > 1 among the connected states is reported as disconnected components.
/// Populations with index ≥ n_ch are zeroed afterwards and the remainder
/// renormalized (no exclusion when n_ch = 0).
pub fn steady_state(gamma: &RateMatrix, n_ch: usize) -> Result<Array1<f64>> {
    use ndarray_linalg::SVD;
    crate::linalg::pin_blas_single_thread();
    let g = &gamma.gamma;
    let n = g.nrows();
    if g.ncols() != n {
        return Err(Error::DimensionMismatch("rate matrix must be square".into()));
    }

    // active = states that exchange population at all
    let active: Vec<usize> = (0..n)
        .filter(|&i| {
            (0..n).any(|j| j != i && (g[[i, j]] != 0.0 || g[[j, i]] != 0.0))
        })
        .collect();
    if active.is_empty() {
        // no transitions anywhere: the zero-temperature fixed point is the
        // lowest mode
        let mut p = Array1::zeros(n);
        p[0] = 1.0;
        return Ok(p);
    }
    let m = active.len();
    let mut l = Array2::<f64>::zeros((m, m));
    for (aj, &j) in active.iter().enumerate() {
        for (ai, &i) in active.iter().enumerate() {
            if i != j {
                l[[aj, ai]] = g[[i, j]];
            }
        }
    }
    for (ai, &i) in active.iter().enumerate() {
        let mut out = KahanSum::default();
        for j in 0..n {
            if j != i {
                out.add(g[[i, j]]);
            }
        }
        l[[ai, ai]] = -out.value();
    }

    let (_, sigma, vt) = l
        .svd(false, true)
        .map_err(|e| Error::SteadyState(format!("SVD failed: {e}")))?;
    let vt = vt.ok_or_else(|| Error::SteadyState("SVD returned no right vectors".into()))?;
    let smax = sigma[0].max(f64::MIN_POSITIVE);
    let null_dim = sigma.iter().filter(|&&s| s <= 1e-12 * smax).count();
    if null_dim > 1 {
        return Err(Error::SteadyState(format!(
            "null space dimension {null_dim}: the rate matrix has disconnected \
             components"
        )));
    }
    let mut p_active = vt.row(m - 1).to_owned();
    let total: f64 = p_active.sum();
    if total < 0.0 {
        p_active.mapv_inplace(|x| -x);
    }
    let worst_negative = p_active.iter().fold(0.0f64, |w, &x| w.min(x));
    let norm: f64 = p_active.sum();
    if norm <= 0.0 {
        return Err(Error::SteadyState("null vector has no probability mass".into()));
    }
    if worst_negative / norm < -1e-10 {
        return Err(Error::SteadyState(format!(
            "steady state has negative population {:.3e}",
            worst_negative / norm
        )));
    }

    let mut p = Array1::<f64>::zeros(n);
    for (ai, &i) in active.iter().enumerate() {
        p[i] = (p_active[ai] / norm).max(0.0);
    }

    // exclude populations above the chaotic subspace
    if n_ch >= 1 && n_ch < n {
        for i in n_ch..n {
            p[i] = 0.0;
        }
        let kept: f64 = p.sum();
        if kept <= 0.0 {
            return Err(Error::SteadyState(format!(
                "all steady-state weight sits above N_ch = {n_ch}"
            )));
        }
        p.mapv_inplace(|x| x / kept);
    } else {
        let total: f64 = p.sum();
        p.mapv_inplace(|x| x / total);
    }

    // null-vector residuals at the machine-precision level are not
    // populations; zero them so absorbing fixed points are exact
    let pmax = p.iter().fold(0.0f64, |m, &x| m.max(x));
    p.mapv_inplace(|x| if x < 1e-12 * pmax { 0.0 } else { x });
    let total: f64 = p.sum();
    p.mapv_inplace(|x| x / total);
    Ok(p)
}

/// Steady-state energy-loss report.
#[derive(Clone, Debug, Serialize)]
pub struct LossReport {
    /// Steady-state populations over the active modes.
    pub populations: Vec<f64>,
    /// 𝒯 in watts (positive = energy flowing from qubit to baths).
    pub loss_total_w: f64,
    /// 𝒯/ħω_d in photons per second.
    pub loss_total_photons_per_s: f64,
    /// Per-mechanism parts of 𝒯 (watts).
    pub loss_by_mechanism_w: BTreeMap<String, f64>,
    pub n_ch_used: usize,
    pub d_active: usize,
    pub metadata: LossMetadata,
}

#[derive(Clone, Debug, Serialize)]
pub struct LossMetadata {
    pub transmon: TransmonParams,
    pub drive: DriveParams,
    pub numerical: NumericalConfig,
    pub baths: BathSet,
    pub mechanisms: Vec<String>,
    pub chaotic_threshold: f64,
    pub truncation: Option<TruncationReport>,
    pub notes: Vec<String>,
}

/// 𝒯 = ħ·Σ_{ijk} p_i Γ_{ij,k} Δ_{ij,k}, per mechanism and total. The
/// zero-temperature spectra guarantee every contributing Δ > 0, so 𝒯 ≥ 0.
pub fn loss_rate(
    p: &Array1<f64>,
    tensors: &[RateTensor],
    omega_d: f64,
    n_ch_used: usize,
    metadata: LossMetadata,
) -> Result<LossReport> {
    let first = tensors
        .first()
        .ok_or_else(|| Error::InvalidParameter("no rate tensors given".into()))?;
    let n = first.n_modes();
    if p.len() != n {
        return Err(Error::DimensionMismatch(format!(
            "populations {} vs active modes {}",
            p.len(),
            n
        )));
    }
    let psum: f64 = p.sum();
    if (psum - 1.0).abs() > 1e-9 {
        return Err(Error::InvalidParameter(format!(
            "populations must be normalized, sum = {psum}"
        )));
    }

    let mut by_mechanism = BTreeMap::new();
    let mut total = KahanSum::default();
    for t in tensors {
        let mut part = KahanSum::default();
        for i in 0..n {
            if p[i] == 0.0 {
                continue;
            }
            for j in 0..n {
                for kidx in 0..2 * t.k_max + 1 {
                    let r = t.rates[[i, j, kidx]];
                    if r != 0.0 {
                        part.add(p[i] * r * t.delta[[i, j, kidx]]);
                    }
                }
            }
        }
        let watts = HBAR * part.value();
        by_mechanism.insert(t.mechanism.name().to_string(), watts);
        total.add(part.value());
    }
    let loss_total_w = HBAR * total.value();
    Ok(LossReport {
        populations: p.to_vec(),
        loss_total_w,
        loss_total_photons_per_s: total.value() / omega_d,
        loss_by_mechanism_w: by_mechanism,
        n_ch_used,
        d_active: n,
        metadata,
    })
}

/// Full pipeline for one drive point: Floquet analysis, transition tensors
/// over the active subspace, per-mechanism rates, steady state, and 𝒯.
pub fn run_point(
    params: &TransmonParams,
    drive: &DriveParams,
    cfg: &NumericalConfig,
    baths: &BathSet,
    mechanisms: &[Mechanism],
) -> Result<LossReport> {
    let analysis = analyze(params, drive, cfg)?;
    run_point_with_analysis(&analysis, params, drive, cfg, baths, mechanisms, None)
}

/// Pipeline tail for an already-computed Floquet analysis. `cache` may be
/// shared across calls that keep Δ_Al fixed (e.g. cutoff sweeps).
pub fn run_point_with_analysis(
    analysis: &FloquetAnalysis,
    params: &TransmonParams,
    drive: &DriveParams,
    cfg: &NumericalConfig,
    baths: &BathSet,
    mechanisms: &[Mechanism],
    cache: Option<&SpectrumCache>,
) -> Result<LossReport> {
    if mechanisms.is_empty() {
        return Err(Error::InvalidParameter("no mechanisms requested".into()));
    }
    let n_ch = analysis.classification.n_ch;
    let d_act = d_active(n_ch, params.dim);
    let selected: Vec<usize> = (0..d_act).collect();
    let truncation = truncation_guard(&analysis.basis.modes0, &selected);

    let table = mode_table_selected(&analysis.basis, params, drive, cfg, &selected)?;
    let mut kinds: Vec<ChargeOperatorKind> = Vec::new();
    for m in mechanisms {
        for k in m.operator_kinds() {
            if !kinds.contains(k) {
                kinds.push(*k);
            }
        }
    }
    let mut tensors: BTreeMap<&'static str, TransitionTensor> = BTreeMap::new();
    for kind in kinds {
        let op = build_coupling_operator(kind, params.dim)?;
        let tensor = fourier_components(&table, &op, cfg.k_max)?;
        let key = match kind {
            ChargeOperatorKind::Number => "number",
            ChargeOperatorKind::Phase => "phase",
            ChargeOperatorKind::SinHalfPhase => "sin",
            ChargeOperatorKind::CosHalfPhase => "cos",
            ChargeOperatorKind::StaticHamiltonian => unreachable!(),
        };
        tensors.insert(key, tensor);
    }
    drop(table);

    let rate_tensors = rate_tensors_from_transition(
        &tensors, &analysis.basis, baths, drive.omega_d, mechanisms, cache,
    )?;
    let gamma = total_rate_matrix(&rate_tensors)?;
    let p = steady_state(&gamma, n_ch)?;

    let metadata = LossMetadata {
        transmon: params.clone(),
        drive: *drive,
        numerical: *cfg,
        baths: *baths,
        mechanisms: mechanisms.iter().map(|m| m.name().to_string()).collect(),
        chaotic_threshold: floquet::CHAOTIC_OVERLAP_THRESHOLD,
        truncation: Some(truncation),
        notes: Vec::new(),
    };
    loss_rate(&p, &rate_tensors, drive.omega_d, n_ch, metadata)
}

/// Per-mechanism rate tensors from a map of transition tensors keyed
/// "number"/"phase"/"sin"/"cos".
pub fn rate_tensors_from_transition(
    tensors: &BTreeMap<&'static str, TransitionTensor>,
    basis: &FloquetBasis,
    baths: &BathSet,
    omega_d: f64,
    mechanisms: &[Mechanism],
    cache: Option<&SpectrumCache>,
) -> Result<Vec<RateTensor>> {
    let mut out = Vec::new();
    for m in mechanisms {
        let ops = match m {
            Mechanism::Rad => MechanismOperators::Rad(
                tensors
                    .get("number")
                    .ok_or_else(|| Error::InvalidParameter("missing number tensor".into()))?,
            ),
            Mechanism::Diel => MechanismOperators::Diel(
                tensors
                    .get("phase")
                    .ok_or_else(|| Error::InvalidParameter("missing phase tensor".into()))?,
            ),
            Mechanism::Qpg => MechanismOperators::Qpg {
                sin: tensors
                    .get("sin")
                    .ok_or_else(|| Error::InvalidParameter("missing sin tensor".into()))?,
                cos: tensors
                    .get("cos")
                    .ok_or_else(|| Error::InvalidParameter("missing cos tensor".into()))?,
            },
        };
        out.push(transition_rates(ops, basis, baths, omega_d, cache)?);
    }
    Ok(out)
}

/// Mean of the full pipeline at n_g = n_g_static ± 0.25: the charge parity
/// switches rapidly between the two offsets, so observables average over
/// both. Populations of the two runs are averaged over the common active
/// range (padded with zeros) and renormalized.
pub fn parity_averaged_loss(
    params: &TransmonParams,
    drive: &DriveParams,
    cfg: &NumericalConfig,
    baths: &BathSet,
    mechanisms: &[Mechanism],
    n_g_static: f64,
) -> Result<LossReport> {
    let mut reports = Vec::with_capacity(2);
    for offset in [-0.25, 0.25] {
        let shifted = TransmonParams {
            n_g: n_g_static + offset,
            ..params.clone()
        };
        reports.push(run_point(&shifted, drive, cfg, baths, mechanisms)?);
    }
    let (a, b) = (reports.remove(0), reports.remove(0));
    let n = a.populations.len().max(b.populations.len());
    let mut populations = vec![0.0; n];
    for (i, pop) in populations.iter_mut().enumerate() {
        let pa = a.populations.get(i).copied().unwrap_or(0.0);
        let pb = b.populations.get(i).copied().unwrap_or(0.0);
        *pop = 0.5 * (pa + pb);
    }
    let mut by_mechanism = BTreeMap::new();
    for (k, va) in &a.loss_by_mechanism_w {
        let vb = b.loss_by_mechanism_w.get(k).copied().unwrap_or(0.0);
        by_mechanism.insert(k.clone(), 0.5 * (va + vb));
    }
    let mut metadata = a.metadata.clone();
    metadata.transmon.n_g = n_g_static;
    metadata.notes.push(format!(
        "parity average over n_g = {} and {}",
        n_g_static - 0.25,
        n_g_static + 0.25
    ));
    Ok(LossReport {
        populations,
        loss_total_w: 0.5 * (a.loss_total_w + b.loss_total_w),
        loss_total_photons_per_s: 0.5
            * (a.loss_total_photons_per_s + b.loss_total_photons_per_s),
        loss_by_mechanism_w: by_mechanism,
        n_ch_used: a.n_ch_used.max(b.n_ch_used),
        d_active: a.d_active.max(b.d_active),
        metadata,
    })
}
