//! Truncated Fock spaces, their tensor products and operators on them.
//!
//! Modes are ordered qubits first, then resonators. A basis index is the
//! row-major number built from the occupations, so the last mode varies
//! fastest: in a 2⊗2 space `|e,g⟩` has index 2.

use std::sync::Arc;

use num_complex::Complex64 as C64;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::linalg::{DenseMatrix, SparseMatrix};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ModeKind {
    Qubit,
    Resonator,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct ModeSpec {
    pub label: String,
    pub kind: ModeKind,
    pub dim: usize,
}

impl ModeSpec {
    pub fn qubit(label: impl Into<String>, dim: usize) -> Self {
        Self { label: label.into(), kind: ModeKind::Qubit, dim }
    }

    pub fn resonator(label: impl Into<String>, dim: usize) -> Self {
        Self { label: label.into(), kind: ModeKind::Resonator, dim }
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct CompositeSpace {
    modes: Vec<ModeSpec>,
    total_dim: usize,
}

impl CompositeSpace {
    pub fn new(modes: Vec<ModeSpec>) -> Result<Arc<Self>> {
        if modes.is_empty() {
            return Err(Error::Space("no modes".into()));
        }
        let mut seen_resonator = false;
        for (i, m) in modes.iter().enumerate() {
            if m.dim < 2 {
                return Err(Error::Space(format!("mode `{}` has dim {} < 2", m.label, m.dim)));
            }
            if modes[..i].iter().any(|o| o.label == m.label) {
                return Err(Error::Space(format!("duplicate mode label `{}`", m.label)));
            }
            match m.kind {
                ModeKind::Resonator => seen_resonator = true,
                ModeKind::Qubit if seen_resonator => {
                    return Err(Error::Space(format!(
                        "qubit `{}` listed after a resonator; qubits must come first",
                        m.label
                    )))
                }
                ModeKind::Qubit => {}
            }
        }
        let total_dim = modes.iter().map(|m| m.dim).product();
        Ok(Arc::new(Self { modes, total_dim }))
    }

    pub fn modes(&self) -> &[ModeSpec] {
        &self.modes
    }

    pub fn n_modes(&self) -> usize {
        self.modes.len()
    }

    pub fn total_dim(&self) -> usize {
        self.total_dim
    }

    pub fn dims(&self) -> Vec<usize> {
        self.modes.iter().map(|m| m.dim).collect()
    }

    pub fn qubit_indices(&self) -> Vec<usize> {
        (0..self.modes.len()).filter(|&i| self.modes[i].kind == ModeKind::Qubit).collect()
    }

    pub fn resonator_indices(&self) -> Vec<usize> {
        (0..self.modes.len()).filter(|&i| self.modes[i].kind == ModeKind::Resonator).collect()
    }

    fn check_mode(&self, mode: usize) -> Result<()> {
        if mode >= self.modes.len() {
            return Err(Error::ModeIndex { index: mode, count: self.modes.len() });
        }
        Ok(())
    }

    /// Basis index of an occupation list.
    pub fn index_of(&self, occupations: &[usize]) -> Result<usize> {
        if occupations.len() != self.modes.len() {
            return Err(Error::Dimension(format!(
                "{} occupations given for {} modes",
                occupations.len(),
                self.modes.len()
            )));
        }
        let mut idx = 0;
        for (mode, (&n, m)) in occupations.iter().zip(&self.modes).enumerate() {
            if n >= m.dim {
                return Err(Error::Occupation { mode, occupation: n, dim: m.dim });
            }
            idx = idx * m.dim + n;
        }
        Ok(idx)
    }

    /// Occupation list of a basis index.
    pub fn occupations(&self, mut index: usize) -> Vec<usize> {
        let mut occ = vec![0; self.modes.len()];
        for (k, m) in self.modes.iter().enumerate().rev() {
            occ[k] = index % m.dim;
            index /= m.dim;
        }
        occ
    }
}

/// Truncated annihilation operator `a` on a single mode of dimension `dim`.
pub fn local_lowering(dim: usize) -> SparseMatrix {
    SparseMatrix::from_triplets(dim, dim, (1..dim).map(|n| (n - 1, n, C64::new((n as f64).sqrt(), 0.0))))
}

pub fn local_number(dim: usize) -> SparseMatrix {
    SparseMatrix::from_triplets(dim, dim, (0..dim).map(|n| (n, n, C64::new(n as f64, 0.0))))
}

/// A sparse operator tied to a composite space.
#[derive(Clone, Debug, PartialEq)]
pub struct LinearOperator {
    space: Arc<CompositeSpace>,
    matrix: SparseMatrix,
}

impl LinearOperator {
    pub fn new(space: Arc<CompositeSpace>, matrix: SparseMatrix) -> Result<Self> {
        let d = space.total_dim();
        if matrix.nrows() != d || matrix.ncols() != d {
            return Err(Error::Dimension(format!(
                "matrix is {}x{}, space dim is {d}",
                matrix.nrows(),
                matrix.ncols()
            )));
        }
        Ok(Self { space, matrix })
    }

    pub fn zero(space: &Arc<CompositeSpace>) -> Self {
        let d = space.total_dim();
        Self { space: space.clone(), matrix: SparseMatrix::zeros(d, d) }
    }

    pub fn identity(space: &Arc<CompositeSpace>) -> Self {
        Self { space: space.clone(), matrix: SparseMatrix::identity(space.total_dim()) }
    }

    pub fn space(&self) -> &Arc<CompositeSpace> {
        &self.space
    }

    pub fn matrix(&self) -> &SparseMatrix {
        &self.matrix
    }

    pub fn into_matrix(self) -> SparseMatrix {
        self.matrix
    }

    fn check_space(&self, other: &Self) -> Result<()> {
        if *self.space != *other.space {
            return Err(Error::Dimension("operators live on different spaces".into()));
        }
        Ok(())
    }

    pub fn adjoint(&self) -> Self {
        Self { space: self.space.clone(), matrix: self.matrix.adjoint() }
    }

    /// Operator product `self · other`.
    pub fn compose(&self, other: &Self) -> Result<Self> {
        self.check_space(other)?;
        Ok(Self { space: self.space.clone(), matrix: self.matrix.matmul(&other.matrix) })
    }

    pub fn add(&self, other: &Self) -> Result<Self> {
        self.check_space(other)?;
        Ok(Self { space: self.space.clone(), matrix: self.matrix.add(&other.matrix) })
    }

    pub fn scale(&self, s: impl Into<C64>) -> Self {
        Self { space: self.space.clone(), matrix: self.matrix.scale(s.into()) }
    }

    pub fn apply(&self, psi: &[C64]) -> Result<Vec<C64>> {
        if psi.len() != self.space.total_dim() {
            return Err(Error::Dimension("state length does not match space".into()));
        }
        Ok(self.matrix.matvec(psi))
    }

    pub fn hermiticity_error(&self) -> f64 {
        self.matrix.hermiticity_error()
    }
}

/// Places `local` on mode `mode_index`, identity elsewhere.
pub fn embed(space: &Arc<CompositeSpace>, mode_index: usize, local: &SparseMatrix) -> Result<LinearOperator> {
    space.check_mode(mode_index)?;
    let dim = space.modes()[mode_index].dim;
    if local.nrows() != dim || local.ncols() != dim {
        return Err(Error::Dimension(format!(
            "local matrix is {}x{}, mode dim is {dim}",
            local.nrows(),
            local.ncols()
        )));
    }
    let dims = space.dims();
    let before: usize = dims[..mode_index].iter().product();
    let after: usize = dims[mode_index + 1..].iter().product();
    let matrix = SparseMatrix::identity(before).kron(local).kron(&SparseMatrix::identity(after));
    LinearOperator::new(space.clone(), matrix)
}

pub fn lowering_op(space: &Arc<CompositeSpace>, mode_index: usize) -> Result<LinearOperator> {
    space.check_mode(mode_index)?;
    embed(space, mode_index, &local_lowering(space.modes()[mode_index].dim))
}

pub fn raising_op(space: &Arc<CompositeSpace>, mode_index: usize) -> Result<LinearOperator> {
    Ok(lowering_op(space, mode_index)?.adjoint())
}

pub fn number_op(space: &Arc<CompositeSpace>, mode_index: usize) -> Result<LinearOperator> {
    space.check_mode(mode_index)?;
    embed(space, mode_index, &local_number(space.modes()[mode_index].dim))
}

/// Computational basis vector with the given occupations.
pub fn basis_state(space: &CompositeSpace, occupations: &[usize]) -> Result<Vec<C64>> {
    let idx = space.index_of(occupations)?;
    let mut v = vec![C64::default(); space.total_dim()];
    v[idx] = C64::new(1.0, 0.0);
    Ok(v)
}

/// Normalized superposition `Σ cᵢ |occᵢ⟩`.
pub fn superposition(space: &CompositeSpace, terms: &[(C64, Vec<usize>)]) -> Result<Vec<C64>> {
    let mut v = vec![C64::default(); space.total_dim()];
    for (c, occ) in terms {
        v[space.index_of(occ)?] += *c;
    }
    let norm = v.iter().map(|x| x.norm_sqr()).sum::<f64>().sqrt();
    if norm == 0.0 {
        return Err(Error::InvalidParameter("superposition has zero norm".into()));
    }
    v.iter_mut().for_each(|x| *x /= norm);
    Ok(v)
}

pub fn inner(a: &[C64], b: &[C64]) -> C64 {
    a.iter().zip(b).map(|(x, y)| x.conj() * y).sum()
}

/// Validation diagnostics of a density matrix.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct StateDiagnostics {
    pub trace_error: f64,
    pub hermiticity_error: f64,
    pub min_eigenvalue: f64,
}

impl StateDiagnostics {
    pub const HERMITICITY_TOL: f64 = 1e-10;
    pub const TRACE_TOL: f64 = 1e-9;
    pub const MIN_EIGENVALUE: f64 = -1e-8;

    pub fn is_valid(&self) -> bool {
        self.trace_error <= Self::TRACE_TOL
            && self.hermiticity_error <= Self::HERMITICITY_TOL
            && self.min_eigenvalue >= Self::MIN_EIGENVALUE
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct DensityMatrix {
    space: Arc<CompositeSpace>,
    matrix: DenseMatrix,
}

impl DensityMatrix {
    /// Wraps a matrix without checking physicality; see [`DensityMatrix::diagnostics`].
    pub fn new(space: Arc<CompositeSpace>, matrix: DenseMatrix) -> Result<Self> {
        let d = space.total_dim();
        if matrix.nrows() != d || matrix.ncols() != d {
            return Err(Error::Dimension(format!("density matrix is not {d}x{d}")));
        }
        Ok(Self { space, matrix })
    }

    pub fn pure(space: &Arc<CompositeSpace>, psi: &[C64]) -> Result<Self> {
        if psi.len() != space.total_dim() {
            return Err(Error::Dimension("state length does not match space".into()));
        }
        Self::new(space.clone(), DenseMatrix::outer(psi, psi))
    }

    pub fn maximally_mixed(space: &Arc<CompositeSpace>) -> Self {
        let d = space.total_dim();
        Self { space: space.clone(), matrix: DenseMatrix::identity(d).scale(C64::new(1.0 / d as f64, 0.0)) }
    }

    pub fn space(&self) -> &Arc<CompositeSpace> {
        &self.space
    }

    pub fn matrix(&self) -> &DenseMatrix {
        &self.matrix
    }

    pub fn trace(&self) -> C64 {
        self.matrix.trace()
    }

    pub fn diagnostics(&self) -> StateDiagnostics {
        let eig = self.matrix.hermitian_eigenvalues();
        StateDiagnostics {
            trace_error: (self.trace() - C64::new(1.0, 0.0)).norm(),
            hermiticity_error: self.matrix.hermiticity_error(),
            min_eigenvalue: eig.first().copied().unwrap_or(0.0),
        }
    }

    /// Populations of every computational basis state.
    pub fn populations(&self) -> Vec<f64> {
        (0..self.matrix.nrows()).map(|i| self.matrix[(i, i)].re).collect()
    }
}

/// Reduced state on the modes in `keep` (kept in their original order).
pub fn partial_trace(rho: &DensityMatrix, keep: &[usize]) -> Result<DensityMatrix> {
    let space = rho.space();
    if keep.is_empty() {
        return Err(Error::EmptyKeep);
    }
    for &k in keep {
        space.check_mode(k)?;
    }
    let mut keep_sorted: Vec<usize> = keep.to_vec();
    keep_sorted.sort_unstable();
    keep_sorted.dedup();
    let traced: Vec<usize> = (0..space.n_modes()).filter(|m| !keep_sorted.contains(m)).collect();
    let reduced_space =
        CompositeSpace::new(keep_sorted.iter().map(|&m| space.modes()[m].clone()).collect())?;
    let d = space.total_dim();
    let dr = reduced_space.total_dim();

    // split every full index into (kept index, traced index)
    let dims = space.dims();
    let split: Vec<(usize, usize)> = (0..d)
        .map(|i| {
            let occ = space.occupations(i);
            let kept = keep_sorted.iter().fold(0, |acc, &m| acc * dims[m] + occ[m]);
            let rest = traced.iter().fold(0, |acc, &m| acc * dims[m] + occ[m]);
            (kept, rest)
        })
        .collect();

    let mut out = DenseMatrix::zeros(dr, dr);
    let m = rho.matrix();
    for i in 0..d {
        let (ki, ri) = split[i];
        for j in 0..d {
            let (kj, rj) = split[j];
            if ri == rj {
                out[(ki, kj)] += m[(i, j)];
            }
        }
    }
    DensityMatrix::new(reduced_space, out)
}

/// `Tr(op · ρ)`.
pub fn expectation(op: &LinearOperator, rho: &DensityMatrix) -> Result<C64> {
    if **op.space() != **rho.space() {
        return Err(Error::Dimension("operator and state live on different spaces".into()));
    }
    let m = rho.matrix();
    let mut acc = C64::default();
    for (r, c, v) in op.matrix().triplets() {
        acc += v * m[(c, r)];
    }
    Ok(acc)
}

/// `⟨ψ|ρ|ψ⟩`.
pub fn fidelity_pure(psi: &[C64], rho: &DensityMatrix) -> Result<f64> {
    if psi.len() != rho.space().total_dim() {
        return Err(Error::Dimension("state length does not match density matrix".into()));
    }
    Ok(inner(psi, &rho.matrix().matvec(psi)).re)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn qubits(n: usize) -> Arc<CompositeSpace> {
        CompositeSpace::new((0..n).map(|i| ModeSpec::qubit(format!("q{i}"), 2)).collect()).unwrap()
    }

    #[test]
    fn two_level_lowering() {
        let s = qubits(1);
        let a = lowering_op(&s, 0).unwrap().matrix().to_dense();
        assert_eq!(a[(0, 1)], C64::new(1.0, 0.0));
        assert_eq!(a.max_abs(), 1.0);
        assert_eq!(a[(1, 0)], C64::default());
    }

    #[test]
    fn three_level_lowering_subdiagonal() {
        let s = CompositeSpace::new(vec![ModeSpec::resonator("r", 3)]).unwrap();
        let a = lowering_op(&s, 0).unwrap();
        assert!((a.matrix().get(0, 1).re - 1.0).abs() < 1e-15);
        assert!((a.matrix().get(1, 2).re - 2f64.sqrt()).abs() < 1e-15);
        assert_eq!(a.matrix().nnz(), 2);
    }

    #[test]
    fn number_op_is_diagonal() {
        let s = CompositeSpace::new(vec![ModeSpec::resonator("r", 4)]).unwrap();
        let n = number_op(&s, 0).unwrap();
        for k in 0..4 {
            assert_eq!(n.matrix().get(k, k).re, k as f64);
        }
        assert_eq!(n.matrix().nnz(), 3);
        let a = lowering_op(&s, 0).unwrap();
        let ada = a.adjoint().compose(&a).unwrap().matrix().to_dense();
        assert!(ada.max_abs_diff(&n.matrix().to_dense()) < 1e-14);
    }

    #[test]
    fn mode_index_out_of_range() {
        let s = qubits(2);
        assert!(matches!(lowering_op(&s, 2), Err(Error::ModeIndex { index: 2, count: 2 })));
        assert!(number_op(&s, 5).is_err());
    }

    #[test]
    fn ordering_convention() {
        let s = qubits(2);
        let eg = basis_state(&s, &[1, 0]).unwrap();
        assert_eq!(eg[2], C64::new(1.0, 0.0));
        let gg = basis_state(&s, &[0, 0]).unwrap();
        assert_eq!(gg[0], C64::new(1.0, 0.0));
        assert!(matches!(basis_state(&s, &[2, 0]), Err(Error::Occupation { .. })));
    }

    #[test]
    fn space_validation() {
        assert!(CompositeSpace::new(vec![ModeSpec::qubit("a", 1)]).is_err());
        assert!(CompositeSpace::new(vec![ModeSpec::qubit("a", 2), ModeSpec::qubit("a", 2)]).is_err());
        assert!(CompositeSpace::new(vec![ModeSpec::resonator("r", 3), ModeSpec::qubit("q", 2)]).is_err());
    }

    #[test]
    fn bell_partial_trace_is_maximally_mixed() {
        let s = qubits(2);
        let one = C64::new(1.0, 0.0);
        let psi = superposition(&s, &[(one, vec![0, 1]), (one, vec![1, 0])]).unwrap();
        let rho = DensityMatrix::pure(&s, &psi).unwrap();
        let red = partial_trace(&rho, &[1]).unwrap();
        let half = DenseMatrix::identity(2).scale(C64::new(0.5, 0.0));
        assert!(red.matrix().max_abs_diff(&half) < 1e-15);
        assert!(matches!(partial_trace(&rho, &[]), Err(Error::EmptyKeep)));
    }

    #[test]
    fn fidelity_examples() {
        let s = qubits(2);
        let one = C64::new(1.0, 0.0);
        let t = superposition(&s, &[(one, vec![0, 1]), (one, vec![1, 0])]).unwrap();
        let sg = superposition(&s, &[(one, vec![1, 0]), (-one, vec![0, 1])]).unwrap();
        let rho_t = DensityMatrix::pure(&s, &t).unwrap();
        assert!((fidelity_pure(&t, &rho_t).unwrap() - 1.0).abs() < 1e-15);
        assert!(fidelity_pure(&sg, &rho_t).unwrap().abs() < 1e-15);
        let mixed = DensityMatrix::maximally_mixed(&s);
        assert!((fidelity_pure(&t, &mixed).unwrap() - 0.25).abs() < 1e-15);
    }
}
