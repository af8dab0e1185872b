//! Readout-error mitigation by inverting the assignment matrix.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Column-stochastic assignment matrix: entry `(m, p)` is the probability of
/// reading outcome `m` when state `p` was prepared.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ReadoutMatrix {
    n: usize,
    /// Row-major entries.
    data: Vec<f64>,
}

impl ReadoutMatrix {
    pub fn new(rows: Vec<Vec<f64>>) -> Result<Self> {
        let n = rows.len();
        if n == 0 || rows.iter().any(|r| r.len() != n) {
            return Err(Error::Dimension("readout matrix must be square and nonempty".into()));
        }
        let data: Vec<f64> = rows.into_iter().flatten().collect();
        if data.iter().any(|v| !(0.0..=1.0).contains(v)) {
            return Err(Error::InvalidParameter("readout matrix entries must lie in [0, 1]".into()));
        }
        for c in 0..n {
            let s: f64 = (0..n).map(|r| data[r * n + c]).sum();
            if (s - 1.0).abs() > 1e-6 {
                return Err(Error::InvalidParameter(format!("column {c} sums to {s}, not 1")));
            }
        }
        Ok(Self { n, data })
    }

    pub fn identity(n: usize) -> Self {
        let mut data = vec![0.0; n * n];
        for i in 0..n {
            data[i * n + i] = 1.0;
        }
        Self { n, data }
    }

    pub fn dim(&self) -> usize {
        self.n
    }

    pub fn get(&self, r: usize, c: usize) -> f64 {
        self.data[r * self.n + c]
    }

    /// `M·p`.
    pub fn apply(&self, p: &[f64]) -> Vec<f64> {
        (0..self.n).map(|r| (0..self.n).map(|c| self.get(r, c) * p[c]).sum()).collect()
    }

    fn to_faer(&self) -> faer::Mat<f64> {
        faer::Mat::from_fn(self.n, self.n, |r, c| self.get(r, c))
    }

    /// 2-norm condition number.
    pub fn condition_number(&self) -> Result<f64> {
        let sv = self
            .to_faer()
            .singular_values()
            .map_err(|e| Error::Singular(format!("SVD failed: {e:?}")))?;
        let max = sv.iter().cloned().fold(0.0, f64::max);
        let min = sv.iter().cloned().fold(f64::INFINITY, f64::min);
        Ok(if min > 0.0 { max / min } else { f64::INFINITY })
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Mitigated {
    /// Clipped and renormalized probabilities.
    pub probabilities: Vec<f64>,
    /// `M⁻¹·measured` before clipping.
    pub raw: Vec<f64>,
    pub condition_number: f64,
}

/// `M⁻¹·measured`, then negative entries clipped to zero and the result
/// renormalized to unit sum.
pub fn apply_readout_mitigation(m: &ReadoutMatrix, measured: &[f64]) -> Result<Mitigated> {
    use faer::linalg::solvers::Solve;

    if measured.len() != m.dim() {
        return Err(Error::Dimension(format!(
            "measured vector has {} entries for a {}-outcome readout matrix",
            measured.len(),
            m.dim()
        )));
    }
    let cond = m.condition_number()?;
    if !(cond < 1e12) {
        return Err(Error::Singular(format!("readout matrix condition number {cond:e}")));
    }
    let lu = m.to_faer().partial_piv_lu();
    let mut rhs = faer::Mat::from_fn(m.dim(), 1, |r, _| measured[r]);
    lu.solve_in_place(rhs.as_mut());
    let raw: Vec<f64> = (0..m.dim()).map(|r| rhs[(r, 0)]).collect();
    let clipped: Vec<f64> = raw.iter().map(|v| v.max(0.0)).collect();
    let total: f64 = clipped.iter().sum();
    if !(total > 0.0) {
        return Err(Error::Singular("mitigated probabilities vanish after clipping".into()));
    }
    Ok(Mitigated { probabilities: clipped.iter().map(|v| v / total).collect(), raw, condition_number: cond })
}
