//! Normal modes of the quadratic (harmonic) part of the array, the Kerr
//! tensors they induce, and the cooling matrix of the Raman process.
//!
//! Mode columns of `M` are ordered qubit-like first (ascending frequency),
//! then resonator-like in the order of the resonator they are dominated by.

use serde::{Deserialize, Serialize};

use crate::device::ScenarioConfig;
use crate::error::{Error, Result};
use crate::linalg::symmetric_eigen;

/// Real symmetric matrix of the harmonic Hamiltonian in the bare basis
/// `(b_1..b_L, c_1..c_R)`, entries in MHz.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct QuadraticForm {
    pub n_qubits: usize,
    pub n_resonators: usize,
    matrix: Vec<f64>,
}

impl QuadraticForm {
    pub fn new(n_qubits: usize, n_resonators: usize, matrix: Vec<f64>) -> Result<Self> {
        let n = n_qubits + n_resonators;
        if matrix.len() != n * n {
            return Err(Error::Dimension(format!("expected {n}x{n} entries, got {}", matrix.len())));
        }
        for r in 0..n {
            for c in 0..r {
                let (a, b) = (matrix[r * n + c], matrix[c * n + r]);
                if (a - b).abs() > 1e-12 * (1.0 + a.abs().max(b.abs())) {
                    return Err(Error::InvalidParameter(format!("quadratic form not symmetric at ({r}, {c})")));
                }
            }
        }
        Ok(Self { n_qubits, n_resonators, matrix })
    }

    /// One dedicated resonator per qubit: diagonals `Δq`, `Δr`; `−J` between
    /// neighbouring qubits; `g_i` between qubit `i` and resonator `i`.
    pub fn dedicated(dq: &[f64], dr: &[f64], j: &[f64], g: &[f64]) -> Result<Self> {
        let l = dq.len();
        if dr.len() != l || g.len() != l || j.len() + 1 != l {
            return Err(Error::Dimension("inconsistent parameter lengths".into()));
        }
        let n = 2 * l;
        let mut m = vec![0.0; n * n];
        for i in 0..l {
            m[i * n + i] = dq[i];
            m[(l + i) * n + l + i] = dr[i];
            m[i * n + l + i] = g[i];
            m[(l + i) * n + i] = g[i];
        }
        for (i, &ji) in j.iter().enumerate() {
            m[i * n + i + 1] = -ji;
            m[(i + 1) * n + i] = -ji;
        }
        Self::new(l, l, m)
    }

    pub fn dim(&self) -> usize {
        self.n_qubits + self.n_resonators
    }

    pub fn get(&self, r: usize, c: usize) -> f64 {
        self.matrix[r * self.dim() + c]
    }

    pub fn matrix(&self) -> &[f64] {
        &self.matrix
    }
}

/// Quadratic form of a scenario in the qubit (first pump) frame.
pub fn build_quadratic_form(cfg: &ScenarioConfig) -> Result<QuadraticForm> {
    let frame = crate::hamiltonian::qubit_frame_mhz(cfg);
    let mut g = Vec::with_capacity(cfg.resonators.len());
    for (k, r) in cfg.resonators.iter().enumerate() {
        g.push(r.g_mhz.ok_or_else(|| Error::Model(format!("resonators[{k}].g_mhz is required")))?);
    }
    let dq: Vec<f64> = cfg.qubits.iter().map(|q| q.working_freq() - frame).collect();
    let dr: Vec<f64> = cfg.resonators.iter().map(|r| r.omega_r_mhz - frame).collect();
    QuadraticForm::dedicated(&dq, &dr, &cfg.j_mhz, &g)
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ModeClass {
    QubitLike,
    ResonatorLike,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct NormalModeBasis {
    pub n_qubits: usize,
    pub n_resonators: usize,
    /// Row-major orthogonal matrix; column `c` is mode `c`.
    pub m: Vec<f64>,
    /// Eigenfrequency of every column, MHz.
    pub lambda: Vec<f64>,
    pub lambda_q: Vec<f64>,
    pub lambda_r: Vec<f64>,
    pub classes: Vec<ModeClass>,
}

impl NormalModeBasis {
    pub fn dim(&self) -> usize {
        self.n_qubits + self.n_resonators
    }

    pub fn get(&self, row: usize, col: usize) -> f64 {
        self.m[row * self.dim() + col]
    }

    pub fn column(&self, col: usize) -> Vec<f64> {
        (0..self.dim()).map(|r| self.get(r, col)).collect()
    }

    /// Largest deviation of `MᵀM` from the identity.
    pub fn orthogonality_error(&self) -> f64 {
        let n = self.dim();
        let mut worst: f64 = 0.0;
        for a in 0..n {
            for b in 0..n {
                let dot: f64 = (0..n).map(|r| self.get(r, a) * self.get(r, b)).sum();
                worst = worst.max((dot - if a == b { 1.0 } else { 0.0 }).abs());
            }
        }
        worst
    }

    /// `M diag(λ) Mᵀ`.
    pub fn reconstruct(&self) -> Vec<f64> {
        let n = self.dim();
        let mut out = vec![0.0; n * n];
        for r in 0..n {
            for c in 0..n {
                out[r * n + c] = (0..n).map(|k| self.get(r, k) * self.lambda[k] * self.get(c, k)).sum();
            }
        }
        out
    }
}

const TIE_TOL: f64 = 1e-9;

/// Sorted, sign-fixed eigen-decomposition with qubit/resonator classification.
///
/// A column is qubit-like when its dominant component sits on a qubit row.
/// Ties between components are accepted only inside one block; a tie that
/// straddles the blocks, or two resonator-like columns dominated by the same
/// resonator, is an error.
pub fn normal_modes(form: &QuadraticForm) -> Result<NormalModeBasis> {
    let n = form.dim();
    let nq = form.n_qubits;
    let (vals, vecs) = symmetric_eigen(n, form.matrix());
    let mut cols: Vec<(usize, ModeClass, usize)> = Vec::with_capacity(n); // (eigen index, class, dominant row)
    let mut fixed = vecs.clone();
    for c in 0..n {
        let max = (0..n).map(|r| vecs[r * n + c].abs()).fold(0.0, f64::max);
        let tied: Vec<usize> = (0..n).filter(|&r| vecs[r * n + c].abs() >= max - TIE_TOL).collect();
        let first = tied[0];
        if vecs[first * n + c] < 0.0 {
            for r in 0..n {
                fixed[r * n + c] = -vecs[r * n + c];
            }
        }
        let qubit = tied.iter().all(|&r| r < nq);
        let resonator = tied.iter().all(|&r| r >= nq);
        let class = match (qubit, resonator) {
            (true, false) => ModeClass::QubitLike,
            (false, true) => ModeClass::ResonatorLike,
            _ => {
                return Err(Error::Classification(format!(
                    "mode with eigenvalue {} has equal weight on qubit and resonator components",
                    vals[c]
                )))
            }
        };
        cols.push((c, class, first));
    }
    let mut q_cols: Vec<&(usize, ModeClass, usize)> =
        cols.iter().filter(|c| c.1 == ModeClass::QubitLike).collect();
    let mut r_cols: Vec<&(usize, ModeClass, usize)> =
        cols.iter().filter(|c| c.1 == ModeClass::ResonatorLike).collect();
    if q_cols.len() != nq {
        return Err(Error::Classification(format!(
            "{} qubit-like modes found for {nq} qubits",
            q_cols.len()
        )));
    }
    q_cols.sort_by(|a, b| vals[a.0].total_cmp(&vals[b.0]));
    r_cols.sort_by_key(|c| c.2);
    for w in r_cols.windows(2) {
        if w[0].2 == w[1].2 {
            return Err(Error::Classification(format!(
                "two resonator-like modes are dominated by bare mode {}",
                w[0].2
            )));
        }
    }
    let order: Vec<&(usize, ModeClass, usize)> = q_cols.into_iter().chain(r_cols).collect();
    let mut m = vec![0.0; n * n];
    for (new_c, col) in order.iter().enumerate() {
        for r in 0..n {
            m[r * n + new_c] = fixed[r * n + col.0];
        }
    }
    let lambda: Vec<f64> = order.iter().map(|c| vals[c.0]).collect();
    Ok(NormalModeBasis {
        n_qubits: nq,
        n_resonators: form.n_resonators,
        m,
        lambda_q: lambda[..nq].to_vec(),
        lambda_r: lambda[nq..].to_vec(),
        lambda,
        classes: order.iter().map(|c| c.1).collect(),
    })
}

/// Normal modes of the qubit array alone (hopping only), in the qubit frame.
pub fn qubit_eigenmodes(cfg: &ScenarioConfig) -> Result<NormalModeBasis> {
    let frame = crate::hamiltonian::qubit_frame_mhz(cfg);
    let l = cfg.n_qubits();
    let mut m = vec![0.0; l * l];
    for (i, q) in cfg.qubits.iter().enumerate() {
        m[i * l + i] = q.working_freq() - frame;
    }
    for (i, &j) in cfg.j_mhz.iter().enumerate() {
        m[i * l + i + 1] = -j;
        m[(i + 1) * l + i] = -j;
    }
    normal_modes(&QuadraticForm::new(l, 0, m)?)
}

/// Rank-4 Kerr tensors in MHz.
///
/// With `s, u` indexing resonator-like modes and `l, p` qubit-like modes:
/// `μ_sulp = Σᵢ αᵢ M_is M_iu M_il M_ip` over qubit-like columns,
/// `ξ` the same over resonator-like columns, and
/// `η_sulp = Σᵢ αᵢ M_i(L+s) M_i(L+u) M_il M_ip`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct KerrCoefficients {
    pub n_qubits: usize,
    pub n_resonators: usize,
    pub alphas: Vec<f64>,
    mu: Vec<f64>,
    xi: Vec<f64>,
    eta: Vec<f64>,
}

impl KerrCoefficients {
    fn idx(n: usize, a: usize, b: usize, c: usize, d: usize) -> usize {
        ((a * n + b) * n + c) * n + d
    }

    pub fn mu(&self, s: usize, u: usize, l: usize, p: usize) -> f64 {
        self.mu[Self::idx(self.n_qubits, s, u, l, p)]
    }

    pub fn xi(&self, s: usize, u: usize, l: usize, p: usize) -> f64 {
        self.xi[Self::idx(self.n_resonators, s, u, l, p)]
    }

    pub fn eta(&self, s: usize, u: usize, l: usize, p: usize) -> f64 {
        let (nr, nq) = (self.n_resonators, self.n_qubits);
        self.eta[((s * nr + u) * nq + l) * nq + p]
    }

    pub fn max_abs_mu(&self) -> f64 {
        self.mu.iter().fold(0.0, |a, &b| a.max(b.abs()))
    }

    pub fn max_abs_xi(&self) -> f64 {
        self.xi.iter().fold(0.0, |a, &b| a.max(b.abs()))
    }

    pub fn max_abs_eta(&self) -> f64 {
        self.eta.iter().fold(0.0, |a, &b| a.max(b.abs()))
    }
}

pub fn kerr_coefficients(basis: &NormalModeBasis, alphas: &[f64]) -> Result<KerrCoefficients> {
    let (nq, nr) = (basis.n_qubits, basis.n_resonators);
    if alphas.len() != nq {
        return Err(Error::Dimension(format!("{} anharmonicities for {nq} qubits", alphas.len())));
    }
    // rows of the qubits restricted to the qubit-like and resonator-like columns
    let qcol = |i: usize, c: usize| basis.get(i, c);
    let rcol = |i: usize, c: usize| basis.get(i, nq + c);
    let mut mu = vec![0.0; nq.pow(4)];
    let mut xi = vec![0.0; nr.pow(4)];
    let mut eta = vec![0.0; nr * nr * nq * nq];
    for (i, &a) in alphas.iter().enumerate() {
        let q: Vec<f64> = (0..nq).map(|c| qcol(i, c)).collect();
        let r: Vec<f64> = (0..nr).map(|c| rcol(i, c)).collect();
        for (k, v) in mu.iter_mut().enumerate() {
            let (s, u, l, p) = (k / nq.pow(3), (k / nq.pow(2)) % nq, (k / nq) % nq, k % nq);
            *v += a * q[s] * q[u] * q[l] * q[p];
        }
        for (k, v) in xi.iter_mut().enumerate() {
            let (s, u, l, p) = (k / nr.pow(3), (k / nr.pow(2)) % nr, (k / nr) % nr, k % nr);
            *v += a * r[s] * r[u] * r[l] * r[p];
        }
        for (k, v) in eta.iter_mut().enumerate() {
            let (s, u, l, p) = (k / (nr * nq * nq), (k / (nq * nq)) % nr, (k / nq) % nq, k % nq);
            *v += a * r[s] * r[u] * q[l] * q[p];
        }
    }
    Ok(KerrCoefficients { n_qubits: nq, n_resonators: nr, alphas: alphas.to_vec(), mu, xi, eta })
}

/// Raman cooling matrix `d^k_lp` (MHz) between qubit-like modes for resonator `k`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct CoolingMatrix {
    pub resonator: usize,
    pub n_bar: f64,
    /// `2 √n̄ η_kklp`, row-major over `(l, p)`.
    pub exact: Vec<f64>,
    /// `2 √n̄ χ_kk M_kl M_kp` with `χ_kk = α_k M_k(L+k)²`.
    pub approx: Vec<f64>,
    pub chi_kk: f64,
    n: usize,
}

impl CoolingMatrix {
    pub fn exact(&self, l: usize, p: usize) -> f64 {
        self.exact[l * self.n + p]
    }

    pub fn approx(&self, l: usize, p: usize) -> f64 {
        self.approx[l * self.n + p]
    }

    pub fn max_abs(&self) -> f64 {
        self.exact.iter().fold(0.0, |a, &b| a.max(b.abs()))
    }

    /// Whether `κ ≥ 5 max|d|`, the regime where the fluctuation mode can be
    /// treated as a fast bath.
    pub fn within_validity(&self, kappa_mhz: f64) -> bool {
        kappa_mhz >= 5.0 * self.max_abs()
    }
}

/// `d = 2 √n̄ χ M_kl M_kp` (MHz).
pub fn approx_cooling_element(n_bar: f64, chi_mhz: f64, m_kl: f64, m_kp: f64) -> f64 {
    2.0 * n_bar.sqrt() * chi_mhz * m_kl * m_kp
}

pub fn cooling_matrix(basis: &NormalModeBasis, kerr: &KerrCoefficients, k: usize, n_bar: f64) -> Result<CoolingMatrix> {
    if !(n_bar >= 0.0) {
        return Err(Error::InvalidParameter("n_bar must be >= 0".into()));
    }
    let nq = basis.n_qubits;
    if k >= basis.n_resonators || k >= nq {
        return Err(Error::InvalidParameter(format!("resonator index {k} out of range")));
    }
    let amp = 2.0 * n_bar.sqrt();
    let chi_kk = kerr.alphas[k] * basis.get(k, nq + k).powi(2);
    let mut exact = vec![0.0; nq * nq];
    let mut approx = vec![0.0; nq * nq];
    for l in 0..nq {
        for p in 0..nq {
            exact[l * nq + p] = amp * kerr.eta(k, k, l, p);
            approx[l * nq + p] = amp * chi_kk * basis.get(k, l) * basis.get(k, p);
        }
    }
    Ok(CoolingMatrix { resonator: k, n_bar, exact, approx, chi_kk, n: nq })
}
