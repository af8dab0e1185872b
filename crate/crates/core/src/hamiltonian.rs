//! Rotating-frame Hamiltonians, collapse operators and named states.
//!
//! All matrices built here are in angular units (rad/μs). The qubits rotate
//! at the first active pump frequency; each driven resonator rotates at its
//! own drive frequency.
//!
//! The cross-Kerr coupling is written as `χ (2 b†b − 1) c†c`, so `χ` is half
//! the resonator pull between the qubit's `|e⟩` and `|g⟩` states and a mean
//! photon number `n̄` shifts the qubit by `2 n̄ χ`.

use std::f64::consts::{FRAC_1_SQRT_2, TAU};
use std::sync::Arc;

use num_complex::Complex64 as C64;
use serde::{Deserialize, Serialize};

use crate::device::{PumpDrive, ResonatorFrame, ScenarioConfig};
use crate::error::{Error, Result};
use crate::hilbert::{
    local_lowering, local_number, lowering_op, number_op, CompositeSpace, LinearOperator, ModeSpec,
};
use crate::linalg::{hermitian_eigen, DenseMatrix, SparseMatrix};

const ONE: C64 = C64 { re: 1.0, im: 0.0 };

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ModelKind {
    Dispersive,
    JaynesCummings,
}

/// Frame frequencies (linear MHz) of the rotating frame.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Frame {
    pub qubit_mhz: f64,
    /// `(resonator index, frame frequency)` for every simulated resonator.
    pub resonators_mhz: Vec<(usize, f64)>,
}

/// How the configuration maps onto the simulated space.
#[derive(Clone, Debug, PartialEq)]
pub struct Layout {
    pub space: Arc<CompositeSpace>,
    pub n_qubits: usize,
    pub qubit_dim: usize,
    /// Configuration index of each simulated resonator, in mode order.
    pub resonators: Vec<usize>,
}

impl Layout {
    pub fn new(n_qubits: usize, qubit_dim: usize, resonators: Vec<usize>, resonator_dim: usize) -> Result<Self> {
        let mut modes: Vec<ModeSpec> = (0..n_qubits).map(|i| ModeSpec::qubit(format!("Q{}", i + 1), qubit_dim)).collect();
        modes.extend(resonators.iter().map(|&k| ModeSpec::resonator(format!("R{}", k + 1), resonator_dim)));
        Ok(Self { space: CompositeSpace::new(modes)?, n_qubits, qubit_dim, resonators })
    }

    pub fn from_config(cfg: &ScenarioConfig) -> Result<Self> {
        Self::new(
            cfg.n_qubits(),
            cfg.truncation.qubit_dim,
            cfg.simulated_resonators(),
            cfg.truncation.resonator_dim,
        )
    }

    pub fn qubit_space_dim(&self) -> usize {
        self.qubit_dim.pow(self.n_qubits as u32)
    }

    pub fn resonator_space_dim(&self) -> usize {
        self.space.total_dim() / self.qubit_space_dim()
    }

    /// Mode index of the simulated resonator with configuration index `k`.
    pub fn resonator_mode(&self, k: usize) -> Option<usize> {
        self.resonators.iter().position(|&r| r == k).map(|p| self.n_qubits + p)
    }

    /// `|ψ_q⟩ ⊗ |0…0⟩_res`.
    pub fn lift(&self, qubit_state: &[C64]) -> Result<Vec<C64>> {
        if qubit_state.len() != self.qubit_space_dim() {
            return Err(Error::Dimension("qubit state length does not match layout".into()));
        }
        let nr = self.resonator_space_dim();
        let mut v = vec![C64::default(); self.space.total_dim()];
        for (i, &c) in qubit_state.iter().enumerate() {
            v[i * nr] = c;
        }
        Ok(v)
    }

    /// `|ψ_q⟩⟨ψ_q| ⊗ I_res`.
    pub fn qubit_projector(&self, qubit_state: &[C64]) -> Result<LinearOperator> {
        if qubit_state.len() != self.qubit_space_dim() {
            return Err(Error::Dimension("qubit state length does not match layout".into()));
        }
        let p = SparseMatrix::from_dense(&DenseMatrix::outer(qubit_state, qubit_state));
        self.qubit_operator(&p)
    }

    /// `A_q ⊗ I_res` for a matrix on the qubit subspace.
    pub fn qubit_operator(&self, a: &SparseMatrix) -> Result<LinearOperator> {
        if a.nrows() != self.qubit_space_dim() || a.ncols() != self.qubit_space_dim() {
            return Err(Error::Dimension("qubit operator does not match layout".into()));
        }
        LinearOperator::new(self.space.clone(), a.kron(&SparseMatrix::identity(self.resonator_space_dim())))
    }
}

/// A rotating-frame Hamiltonian together with its layout.
#[derive(Clone, Debug)]
pub struct HamiltonianModel {
    pub kind: ModelKind,
    pub h: LinearOperator,
    pub frame: Frame,
    pub layout: Layout,
    /// Coherent amplitude α of each simulated resonator when the displaced
    /// frame is used (zero otherwise).
    pub displacements: Vec<C64>,
    pub resonator_frame: ResonatorFrame,
    /// Per-manifold frame offsets (MHz) when several pumps are active; empty
    /// for a single frame.
    pub manifold_offsets_mhz: Vec<f64>,
    /// Notes about approximations applied (secular pump terms and so on).
    pub notes: Vec<String>,
}

impl HamiltonianModel {
    /// Block of `H` with every resonator in its vacuum, as a matrix on the qubits.
    pub fn qubit_block(&self) -> DenseMatrix {
        let nq = self.layout.qubit_space_dim();
        let nr = self.layout.resonator_space_dim();
        let mut out = DenseMatrix::zeros(nq, nq);
        for (r, c, v) in self.h.matrix().triplets() {
            if r % nr == 0 && c % nr == 0 {
                out[(r / nr, c / nr)] += v;
            }
        }
        out
    }
}

fn qubit_label_state(name: &str, l: usize, qubit_dim: usize) -> Option<Vec<usize>> {
    if name.chars().count() != l {
        return None;
    }
    name.chars()
        .map(|ch| match ch {
            'g' => Some(0),
            'e' => Some(1),
            'f' if qubit_dim > 2 => Some(2),
            _ => None,
        })
        .collect()
}

/// A named state on the qubit subspace (`qubit_dim^L` entries).
///
/// Accepted names: product labels such as `"gg"`, `"egg"`; `"G"` for the
/// ground state; `"T"`, `"S"` for two qubits; `"W"`, `"A"`, `"B"`, `"C"`,
/// `"D"`, `"E"` for three qubits.
pub fn named_qubit_state(name: &str, l: usize, qubit_dim: usize) -> Result<Vec<C64>> {
    let dim = qubit_dim.pow(l as u32);
    let index = |occ: &[usize]| occ.iter().fold(0, |acc, &n| acc * qubit_dim + n);
    let mut v = vec![C64::default(); dim];
    let mut set = |occ: &[usize], c: f64| v[index(occ)] += C64::new(c, 0.0);
    if let Some(occ) = qubit_label_state(name, l, qubit_dim) {
        set(&occ, 1.0);
        return Ok(v);
    }
    let s2 = FRAC_1_SQRT_2;
    let s3 = 1.0 / 3f64.sqrt();
    let s6 = 1.0 / 6f64.sqrt();
    match (name, l) {
        ("G", _) => set(&vec![0; l], 1.0),
        ("T", 2) => {
            set(&[0, 1], s2);
            set(&[1, 0], s2);
        }
        ("S", 2) => {
            set(&[1, 0], s2);
            set(&[0, 1], -s2);
        }
        ("W", 3) => {
            set(&[1, 0, 0], s3);
            set(&[0, 1, 0], s3);
            set(&[0, 0, 1], s3);
        }
        ("A", 3) => {
            set(&[0, 0, 1], s2);
            set(&[1, 0, 0], -s2);
        }
        ("B", 3) => {
            set(&[0, 0, 1], s6);
            set(&[0, 1, 0], -2.0 * s6);
            set(&[1, 0, 0], s6);
        }
        ("C", 3) => {
            set(&[1, 1, 0], s6);
            set(&[1, 0, 1], 2.0 * s6);
            set(&[0, 1, 1], s6);
        }
        ("D", 3) => {
            set(&[1, 1, 0], s2);
            set(&[0, 1, 1], -s2);
        }
        ("E", 3) => {
            set(&[1, 1, 0], s3);
            set(&[1, 0, 1], -s3);
            set(&[0, 1, 1], s3);
        }
        _ => {
            return Err(Error::InvalidParameter(format!(
                "unknown state name {name:?} for {l} qubits"
            )))
        }
    }
    Ok(v)
}

/// Qubit-subspace state for an initial-state specification.
pub fn initial_qubit_state(init: &crate::device::InitialState, l: usize, qubit_dim: usize) -> Result<Vec<C64>> {
    match init {
        crate::device::InitialState::Named(n) => named_qubit_state(n, l, qubit_dim),
        crate::device::InitialState::Occupations(occ) => {
            if occ.len() != l || occ.iter().any(|&n| n >= qubit_dim) {
                return Err(Error::InvalidParameter(format!("bad qubit occupations {occ:?}")));
            }
            let mut v = vec![C64::default(); qubit_dim.pow(l as u32)];
            v[occ.iter().fold(0, |acc, &n| acc * qubit_dim + n)] = ONE;
            Ok(v)
        }
    }
}

/// Frame frequency of the qubits: the first active pump, else the first
/// pump, else the first qubit's working frequency.
pub fn qubit_frame_mhz(cfg: &ScenarioConfig) -> f64 {
    cfg.pumps
        .iter()
        .find(|p| p.is_active())
        .or_else(|| cfg.pumps.first())
        .map(|p| p.frequency_mhz)
        .unwrap_or_else(|| cfg.qubits[0].working_freq())
}

/// Qubit detunings (MHz) from the frame, including Stark compensation.
fn qubit_detunings(cfg: &ScenarioConfig, frame: f64, sim_resonators: &[usize], compensate: bool) -> Vec<f64> {
    let mut dq: Vec<f64> = cfg.qubits.iter().map(|q| q.working_freq() - frame).collect();
    if compensate && cfg.stark_compensation {
        for &k in sim_resonators {
            if let (Some(r), Some(chi)) = (cfg.raman_for(k), cfg.resonators[k].chi_mhz) {
                let n = r.photon_number(cfg.resonators[k].kappa_mhz);
                dq[k] -= crate::rates::stark_shift(n, chi);
            }
        }
    }
    dq
}

/// Qubit-only terms (detuning, anharmonicity, hopping) on the qubit subspace, rad/μs.
pub fn qubit_hamiltonian(detunings_mhz: &[f64], alphas_mhz: &[f64], j_mhz: &[f64], qubit_dim: usize) -> Result<SparseMatrix> {
    let l = detunings_mhz.len();
    let layout = Layout::new(l, qubit_dim, vec![], 2)?;
    let space = &layout.space;
    let mut h = SparseMatrix::zeros(space.total_dim(), space.total_dim());
    for i in 0..l {
        let n = number_op(space, i)?.into_matrix();
        let b = lowering_op(space, i)?.into_matrix();
        let bd = b.adjoint();
        h = h.add(&n.scale(C64::new(TAU * detunings_mhz[i], 0.0)));
        let kerr = bd.matmul(&bd).matmul(&b).matmul(&b);
        h = h.add(&kerr.scale(C64::new(TAU * alphas_mhz[i] / 2.0, 0.0)));
    }
    for (i, &j) in j_mhz.iter().enumerate() {
        let bi = lowering_op(space, i)?.into_matrix();
        let bj = lowering_op(space, i + 1)?.into_matrix();
        let hop = bi.adjoint().matmul(&bj).add(&bj.adjoint().matmul(&bi));
        h = h.add(&hop.scale(C64::new(-TAU * j, 0.0)));
    }
    Ok(h)
}

/// `Σ Ω_i b_i†` on the qubit subspace, in MHz (not multiplied by 2π).
pub fn pump_raising(pump: &PumpDrive, l: usize, qubit_dim: usize) -> Result<SparseMatrix> {
    if pump.amplitudes_mhz.len() != l {
        return Err(Error::Dimension(format!(
            "pump has {} amplitudes for {l} qubits",
            pump.amplitudes_mhz.len()
        )));
    }
    let layout = Layout::new(l, qubit_dim, vec![], 2)?;
    let mut v = SparseMatrix::zeros(layout.space.total_dim(), layout.space.total_dim());
    for (i, a) in pump.amplitudes_mhz.iter().enumerate() {
        let bd = lowering_op(&layout.space, i)?.adjoint().into_matrix();
        v = v.add(&bd.scale(a.0));
    }
    Ok(v)
}

/// `⟨bra| Σ Ω_i b_i† |ket⟩` in MHz for states on the qubit subspace.
pub fn pump_matrix_element(pump: &PumpDrive, bra: &[C64], ket: &[C64], qubit_dim: usize) -> Result<C64> {
    let l = pump.amplitudes_mhz.len();
    let dim = qubit_dim.pow(l as u32);
    if bra.len() != dim || ket.len() != dim {
        return Err(Error::Dimension("states do not match the pump's qubit space".into()));
    }
    let v = pump_raising(pump, l, qubit_dim)?;
    Ok(crate::hilbert::inner(bra, &v.matvec(ket)))
}

/// Total excitation number of each qubit-space basis index.
pub fn excitation_numbers(l: usize, qubit_dim: usize) -> Vec<usize> {
    (0..qubit_dim.pow(l as u32))
        .map(|mut i| {
            let mut n = 0;
            for _ in 0..l {
                n += i % qubit_dim;
                i /= qubit_dim;
            }
            n
        })
        .collect()
}

/// Qubit-space Hamiltonian for several pumps at distinct frequencies.
///
/// Every pump raises the excitation number by one, so each step
/// `N → N+1` between excitation manifolds is assigned to the pump that has
/// resonant matrix elements there (judged in the eigenbasis of the undriven
/// manifolds). Manifold `N` then rotates at the sum of the pump frequencies
/// of the steps below it, which makes every assigned pump static; the pump
/// components on other steps rotate at the pump separation and are dropped.
#[derive(Clone, Debug, PartialEq)]
pub struct ManifoldFrame {
    /// rad/μs, on the qubit subspace.
    pub h: SparseMatrix,
    /// Frame offset of each manifold relative to `N·ω_frame`, MHz.
    pub offsets_mhz: Vec<f64>,
    /// Index (into the active pumps) of the pump driving each step.
    pub step_pump: Vec<usize>,
}

pub fn manifold_frame(hq: &SparseMatrix, pumps: &[&PumpDrive], l: usize, qd: usize) -> Result<ManifoldFrame> {
    let f0 = pumps[0].frequency_mhz;
    let deltas: Vec<f64> = pumps.iter().map(|p| p.frequency_mhz - f0).collect();
    let mut min_sep = f64::INFINITY;
    for i in 0..pumps.len() {
        for j in 0..i {
            let sep = (deltas[i] - deltas[j]).abs();
            let limit = 10.0 * pumps[i].max_amplitude().max(pumps[j].max_amplitude());
            if sep <= limit {
                return Err(Error::Model(format!(
                    "pumps at {} and {} MHz are {sep} MHz apart; treating them separately needs more than {limit} MHz",
                    pumps[j].frequency_mhz, pumps[i].frequency_mhz
                )));
            }
            min_sep = min_sep.min(sep);
        }
    }
    let window = 0.5 * TAU * min_sep;
    let n_of = excitation_numbers(l, qd);
    let n_max = l * (qd - 1);
    let blocks: Vec<Vec<usize>> = (0..=n_max).map(|n| (0..n_of.len()).filter(|&i| n_of[i] == n).collect()).collect();
    let dense = hq.to_dense();
    let eig: Vec<(Vec<f64>, DenseMatrix)> = blocks
        .iter()
        .map(|idx| hermitian_eigen(&DenseMatrix::from_fn(idx.len(), idx.len(), |r, c| dense[(idx[r], idx[c])])))
        .collect();
    let raising: Vec<DenseMatrix> = pumps
        .iter()
        .map(|p| Ok(pump_raising(p, l, qd)?.scale(C64::new(TAU, 0.0)).to_dense()))
        .collect::<Result<_>>()?;

    let mut offsets = vec![0.0; n_max + 1];
    let mut step_pump = Vec::with_capacity(n_max);
    let mut h = dense.clone();
    for n in 0..n_max {
        let (lo, hi) = (&blocks[n], &blocks[n + 1]);
        let (e_lo, u_lo) = &eig[n];
        let (e_hi, u_hi) = &eig[n + 1];
        let weights: Vec<f64> = raising
            .iter()
            .zip(&deltas)
            .map(|(v, &d)| {
                let step = DenseMatrix::from_fn(hi.len(), lo.len(), |r, c| v[(hi[r], lo[c])]);
                let t = u_hi.adjoint().matmul(&step).matmul(u_lo);
                let mut w = 0.0;
                for a in 0..hi.len() {
                    for c in 0..lo.len() {
                        if (e_hi[a] - e_lo[c] - TAU * d).abs() < window {
                            w += t[(a, c)].norm_sqr();
                        }
                    }
                }
                w.sqrt()
            })
            .collect();
        let mut order: Vec<usize> = (0..pumps.len()).collect();
        order.sort_by(|&a, &b| weights[b].total_cmp(&weights[a]));
        let (p, runner_up) = (order[0], weights[order[1]]);
        if weights[p] > 0.0 && runner_up >= 0.5 * weights[p] {
            return Err(Error::Model(format!(
                "pumps {} and {} are comparably resonant on the {n} -> {} excitation step",
                order[0],
                order[1],
                n + 1
            )));
        }
        step_pump.push(p);
        offsets[n + 1] = offsets[n] + deltas[p];
        for &r in hi {
            for &c in lo {
                let v = raising[p][(r, c)];
                h[(r, c)] += v;
                h[(c, r)] += v.conj();
            }
        }
    }
    for (i, &n) in n_of.iter().enumerate() {
        h[(i, i)] -= C64::new(TAU * offsets[n], 0.0);
    }
    Ok(ManifoldFrame { h: SparseMatrix::from_dense(&h), offsets_mhz: offsets, step_pump })
}

fn push_hermitian(h: &mut SparseMatrix, v: &SparseMatrix) {
    *h = h.add(v).add(&v.adjoint());
}

/// Builds the dispersive model used by every scenario.
pub fn build_dispersive(cfg: &ScenarioConfig) -> Result<HamiltonianModel> {
    let layout = Layout::from_config(cfg)?;
    let l = cfg.n_qubits();
    let qd = cfg.truncation.qubit_dim;
    for &k in &layout.resonators {
        if cfg.resonators[k].chi_mhz.is_none() {
            return Err(Error::Model(format!("resonators[{k}].chi_mhz is required for the dispersive model")));
        }
    }
    let frame_q = qubit_frame_mhz(cfg);
    let dq = qubit_detunings(cfg, frame_q, &layout.resonators, true);
    let alphas: Vec<f64> = cfg.qubits.iter().map(|q| q.alpha_mhz).collect();
    let hq = qubit_hamiltonian(&dq, &alphas, &cfg.j_mhz, qd)?;

    let mut notes = Vec::new();
    let mut hq_total = hq.clone();
    let mut manifold_offsets_mhz = Vec::new();
    let active: Vec<&PumpDrive> = cfg.pumps.iter().filter(|p| p.is_active()).collect();
    if active.len() == 1 {
        let v = pump_raising(active[0], l, qd)?.scale(C64::new(TAU, 0.0));
        push_hermitian(&mut hq_total, &v);
    } else if active.len() > 1 {
        let mf = manifold_frame(&hq, &active, l, qd)?;
        for (n, &p) in mf.step_pump.iter().enumerate() {
            notes.push(format!(
                "excitation step {n} -> {} driven by the pump at {} MHz",
                n + 1,
                active[p].frequency_mhz
            ));
        }
        hq_total = mf.h;
        manifold_offsets_mhz = mf.offsets_mhz;
    }

    let nr = layout.resonator_space_dim();
    let mut h = hq_total.kron(&SparseMatrix::identity(nr));
    let space = layout.space.clone();
    let mut displacements = Vec::new();
    let mut frame_r = Vec::new();
    for &k in &layout.resonators {
        let mode = layout.resonator_mode(k).expect("simulated resonator");
        let res = &cfg.resonators[k];
        let chi = TAU * res.chi_mhz.expect("checked above");
        let kappa = TAU * res.kappa_mhz;
        let (delta_r, eps) = match cfg.raman_for(k) {
            Some(r) => (TAU * r.detuning_mhz, TAU * r.amplitude(res.kappa_mhz)),
            None => (0.0, 0.0),
        };
        frame_r.push((k, res.omega_r_mhz - delta_r / TAU));
        let c = lowering_op(&space, mode)?.into_matrix();
        let cd = c.adjoint();
        let nc = cd.matmul(&c);
        let nq = number_op(&space, k)?.into_matrix();
        // σ = 2 b†b − 1 of the coupled qubit
        let sigma = nq.scale(C64::new(2.0, 0.0)).add(&SparseMatrix::identity(space.total_dim()).scale(-ONE));
        h = h.add(&nc.scale(C64::new(delta_r, 0.0)));
        match cfg.resonator_frame {
            ResonatorFrame::Displaced => {
                let alpha = -eps / C64::new(delta_r, -kappa / 2.0);
                displacements.push(alpha);
                let inner = SparseMatrix::identity(space.total_dim())
                    .scale(C64::new(alpha.norm_sqr(), 0.0))
                    .add(&c.scale(alpha.conj()))
                    .add(&cd.scale(alpha))
                    .add(&nc);
                h = h.add(&sigma.matmul(&inner).scale(C64::new(chi, 0.0)));
            }
            ResonatorFrame::Lab => {
                displacements.push(C64::default());
                h = h.add(&sigma.matmul(&nc).scale(C64::new(chi, 0.0)));
                h = h.add(&c.add(&cd).scale(C64::new(eps, 0.0)));
            }
        }
    }
    // symmetrize away rounding so Hermiticity holds to machine precision
    let h = h.add(&h.adjoint()).scale(C64::new(0.5, 0.0));
    Ok(HamiltonianModel {
        kind: ModelKind::Dispersive,
        h: LinearOperator::new(space, h)?,
        frame: Frame { qubit_mhz: frame_q, resonators_mhz: frame_r },
        layout,
        displacements,
        resonator_frame: cfg.resonator_frame,
        manifold_offsets_mhz,
        notes,
    })
}

/// Builds the exchange-coupled model `g (c†b + b†c)` in a frame rotating at
/// the single drive frequency. Every resonator is simulated.
pub fn build_jaynes_cummings(cfg: &ScenarioConfig) -> Result<HamiltonianModel> {
    let l = cfg.n_qubits();
    for (k, r) in cfg.resonators.iter().enumerate() {
        if r.g_mhz.is_none() {
            return Err(Error::Model(format!("resonators[{k}].g_mhz is required for the Jaynes-Cummings model")));
        }
    }
    let mut freqs: Vec<f64> = Vec::new();
    for k in cfg.driven_resonators() {
        let r = cfg.raman_for(k).expect("driven resonator has a drive");
        freqs.push(cfg.resonators[k].omega_r_mhz - r.detuning_mhz);
    }
    for p in cfg.pumps.iter().filter(|p| p.is_active()) {
        freqs.push(p.frequency_mhz);
    }
    let frame = match freqs.first() {
        Some(&f) => {
            if freqs.iter().any(|&g| (g - f).abs() > 1e-9) {
                return Err(Error::Model(
                    "drives at several frequencies make the Jaynes-Cummings frame time dependent".into(),
                ));
            }
            f
        }
        None => qubit_frame_mhz(cfg),
    };
    let layout = Layout::new(l, cfg.truncation.qubit_dim, (0..l).collect(), cfg.truncation.resonator_dim)?;
    let space = layout.space.clone();
    let dq: Vec<f64> = cfg.qubits.iter().map(|q| q.working_freq() - frame).collect();
    let alphas: Vec<f64> = cfg.qubits.iter().map(|q| q.alpha_mhz).collect();
    let mut hq = qubit_hamiltonian(&dq, &alphas, &cfg.j_mhz, cfg.truncation.qubit_dim)?;
    if let Some(p) = cfg.pumps.iter().find(|p| p.is_active()) {
        let v = pump_raising(p, l, cfg.truncation.qubit_dim)?.scale(C64::new(TAU, 0.0));
        push_hermitian(&mut hq, &v);
    }
    let mut h = hq.kron(&SparseMatrix::identity(layout.resonator_space_dim()));
    for k in 0..l {
        let res = &cfg.resonators[k];
        let mode = l + k;
        let c = lowering_op(&space, mode)?.into_matrix();
        let b = lowering_op(&space, k)?.into_matrix();
        h = h.add(&c.adjoint().matmul(&c).scale(C64::new(TAU * (res.omega_r_mhz - frame), 0.0)));
        let g = TAU * res.g_mhz.expect("checked above");
        h = h.add(&c.adjoint().matmul(&b).add(&b.adjoint().matmul(&c)).scale(C64::new(g, 0.0)));
        if let Some(r) = cfg.raman_for(k) {
            let eps = TAU * r.amplitude(res.kappa_mhz);
            h = h.add(&c.add(&c.adjoint()).scale(C64::new(eps, 0.0)));
        }
    }
    let h = h.add(&h.adjoint()).scale(C64::new(0.5, 0.0));
    Ok(HamiltonianModel {
        kind: ModelKind::JaynesCummings,
        h: LinearOperator::new(space, h)?,
        frame: Frame { qubit_mhz: frame, resonators_mhz: (0..l).map(|k| (k, frame)).collect() },
        layout,
        displacements: vec![C64::default(); l],
        resonator_frame: ResonatorFrame::Lab,
        manifold_offsets_mhz: Vec::new(),
        notes: Vec::new(),
    })
}

/// A collapse operator with its rate (μs⁻¹); the dissipator is `rate · D(op)`.
#[derive(Clone, Debug)]
pub struct Collapse {
    pub label: String,
    pub op: LinearOperator,
    pub rate: f64,
}

/// Collapse operators for a layout: `κ_k` on every simulated resonator,
/// `Γ1` and `Γφ` on every qubit. Zero rates are omitted.
pub fn collapse_set_for(cfg: &ScenarioConfig, layout: &Layout) -> Result<Vec<Collapse>> {
    let space = &layout.space;
    let mut out = Vec::new();
    for &k in &layout.resonators {
        let mode = layout.resonator_mode(k).expect("simulated resonator");
        out.push(Collapse {
            label: format!("kappa_R{}", k + 1),
            op: lowering_op(space, mode)?,
            rate: TAU * cfg.resonators[k].kappa_mhz,
        });
    }
    for (i, q) in cfg.qubits.iter().enumerate() {
        let (g1, gphi) = crate::device::derive_rates(q, cfg.dephasing_convention)?;
        if g1 > 0.0 {
            out.push(Collapse { label: format!("gamma1_Q{}", i + 1), op: lowering_op(space, i)?, rate: g1 });
        }
        if gphi > 0.0 {
            out.push(Collapse { label: format!("gamma_phi_Q{}", i + 1), op: number_op(space, i)?, rate: gphi });
        }
    }
    Ok(out)
}

/// Collapse operators matching a model's frame. When excitation manifolds
/// rotate at different rates, each qubit's lowering operator is split into
/// parts with a common rotation frequency (secular approximation).
pub fn collapse_set(cfg: &ScenarioConfig, model: &HamiltonianModel) -> Result<Vec<Collapse>> {
    let base = collapse_set_for(cfg, &model.layout)?;
    let offsets = &model.manifold_offsets_mhz;
    if offsets.len() < 2 {
        return Ok(base);
    }
    let steps: Vec<f64> = offsets.windows(2).map(|w| w[1] - w[0]).collect();
    let mut groups: Vec<(f64, Vec<usize>)> = Vec::new();
    for (n, &d) in steps.iter().enumerate() {
        match groups.iter_mut().find(|g| (g.0 - d).abs() < 1e-9) {
            Some(g) => g.1.push(n + 1),
            None => groups.push((d, vec![n + 1])),
        }
    }
    if groups.len() < 2 {
        return Ok(base);
    }
    let layout = &model.layout;
    let (l, qd) = (layout.n_qubits, layout.qubit_dim);
    let n_of = excitation_numbers(l, qd);
    let qspace = Layout::new(l, qd, vec![], 2)?.space;
    let mut out = Vec::with_capacity(base.len() + l);
    for c in base {
        let qubit = (0..l).find(|&i| c.label == format!("gamma1_Q{}", i + 1));
        let Some(i) = qubit else {
            out.push(c);
            continue;
        };
        let b = lowering_op(&qspace, i)?.into_matrix();
        for (k, (_, upper)) in groups.iter().enumerate() {
            let part: Vec<(usize, usize, C64)> =
                b.triplets().filter(|&(_, col, _)| upper.contains(&n_of[col])).collect();
            if part.is_empty() {
                continue;
            }
            let m = SparseMatrix::from_triplets(b.nrows(), b.ncols(), part);
            out.push(Collapse {
                label: format!("{}_part{}", c.label, k + 1),
                op: layout.qubit_operator(&m)?,
                rate: c.rate,
            });
        }
    }
    Ok(out)
}

pub fn build_collapse_set(cfg: &ScenarioConfig) -> Result<Vec<Collapse>> {
    collapse_set_for(cfg, &Layout::from_config(cfg)?)
}

/// Dispersive shift `α (g/Δ)²` (MHz), with `Δ = ω_r − ω_q`.
pub fn dispersive_shift_simple(alpha_mhz: f64, g_mhz: f64, delta_rq_mhz: f64) -> f64 {
    alpha_mhz * (g_mhz / delta_rq_mhz).powi(2)
}

/// Dispersive shift `g² α / (Δ (Δ − α))` (MHz), with `Δ = ω_r − ω_q`.
pub fn dispersive_shift_transmon(alpha_mhz: f64, g_mhz: f64, delta_rq_mhz: f64) -> f64 {
    g_mhz * g_mhz * alpha_mhz / (delta_rq_mhz * (delta_rq_mhz - alpha_mhz))
}

/// Dispersive shift from exact diagonalization of one transmon and one
/// resonator: half the change of the resonator transition frequency
/// between qubit `|e⟩` and `|g⟩`.
pub fn jc_dispersive_shift(omega_q_mhz: f64, alpha_mhz: f64, omega_r_mhz: f64, g_mhz: f64) -> Result<f64> {
    let (qd, rd) = (5, 4);
    let b = SparseMatrix::identity(1).kron(&local_lowering(qd)).kron(&SparseMatrix::identity(rd));
    let c = SparseMatrix::identity(qd).kron(&local_lowering(rd));
    let nq = local_number(qd).kron(&SparseMatrix::identity(rd));
    let bd = b.adjoint();
    let cd = c.adjoint();
    // energies relative to the resonator frequency keep the numbers small
    let h = nq
        .scale(C64::new(omega_q_mhz - omega_r_mhz, 0.0))
        .add(&bd.matmul(&bd).matmul(&b).matmul(&b).scale(C64::new(alpha_mhz / 2.0, 0.0)))
        .add(&cd.matmul(&b).add(&bd.matmul(&c)).scale(C64::new(g_mhz, 0.0)));
    let (e, u) = hermitian_eigen(&h.to_dense());
    let dressed = |q: usize, n: usize| -> f64 {
        let idx = q * rd + n;
        let best = (0..e.len())
            .max_by(|&x, &y| u[(idx, x)].norm_sqr().total_cmp(&u[(idx, y)].norm_sqr()))
            .expect("nonempty spectrum");
        e[best]
    };
    let full = (dressed(1, 1) - dressed(1, 0)) - (dressed(0, 1) - dressed(0, 0));
    Ok(full / 2.0)
}
