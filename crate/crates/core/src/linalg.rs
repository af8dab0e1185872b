//! Small complex linear-algebra layer: a CSR sparse matrix for operators and
//! superoperators, and a row-major dense matrix for density matrices.

use num_complex::Complex64 as C64;

/// Entries with magnitude below this are treated as structural zeros.
pub const PRUNE_TOL: f64 = 1e-15;

/// Compressed-sparse-row complex matrix.
#[derive(Clone, Debug, PartialEq)]
pub struct SparseMatrix {
    nrows: usize,
    ncols: usize,
    indptr: Vec<usize>,
    indices: Vec<usize>,
    values: Vec<C64>,
}

impl SparseMatrix {
    pub fn zeros(nrows: usize, ncols: usize) -> Self {
        Self {
            nrows,
            ncols,
            indptr: vec![0; nrows + 1],
            indices: Vec::new(),
            values: Vec::new(),
        }
    }

    pub fn identity(n: usize) -> Self {
        Self::from_triplets(n, n, (0..n).map(|i| (i, i, C64::new(1.0, 0.0))))
    }

    /// Builds a matrix from `(row, col, value)` triplets. Duplicates are
    /// summed, and the summed entries below [`PRUNE_TOL`] are dropped.
    pub fn from_triplets<I>(nrows: usize, ncols: usize, triplets: I) -> Self
    where
        I: IntoIterator<Item = (usize, usize, C64)>,
    {
        let mut rows: Vec<Vec<(usize, C64)>> = vec![Vec::new(); nrows];
        for (r, c, v) in triplets {
            assert!(r < nrows && c < ncols, "triplet ({r}, {c}) out of bounds");
            rows[r].push((c, v));
        }
        let mut indptr = Vec::with_capacity(nrows + 1);
        let mut indices = Vec::new();
        let mut values = Vec::new();
        indptr.push(0);
        for mut row in rows {
            row.sort_unstable_by_key(|e| e.0);
            let mut iter = row.into_iter().peekable();
            while let Some((c, mut v)) = iter.next() {
                while let Some(&(c2, v2)) = iter.peek() {
                    if c2 != c {
                        break;
                    }
                    v += v2;
                    iter.next();
                }
                if v.norm() > PRUNE_TOL {
                    indices.push(c);
                    values.push(v);
                }
            }
            indptr.push(indices.len());
        }
        Self { nrows, ncols, indptr, indices, values }
    }

    pub fn nrows(&self) -> usize {
        self.nrows
    }

    pub fn ncols(&self) -> usize {
        self.ncols
    }

    pub fn nnz(&self) -> usize {
        self.values.len()
    }

    /// Iterates over stored entries of one row.
    pub fn row(&self, r: usize) -> impl Iterator<Item = (usize, C64)> + '_ {
        let span = self.indptr[r]..self.indptr[r + 1];
        self.indices[span.clone()].iter().copied().zip(self.values[span].iter().copied())
    }

    pub fn triplets(&self) -> impl Iterator<Item = (usize, usize, C64)> + '_ {
        (0..self.nrows).flat_map(move |r| self.row(r).map(move |(c, v)| (r, c, v)))
    }

    pub fn get(&self, r: usize, c: usize) -> C64 {
        self.row(r).find(|e| e.0 == c).map(|e| e.1).unwrap_or_default()
    }

    pub fn matvec(&self, x: &[C64]) -> Vec<C64> {
        let mut y = vec![C64::default(); self.nrows];
        self.matvec_into(x, &mut y);
        y
    }

    pub fn matvec_into(&self, x: &[C64], y: &mut [C64]) {
        assert_eq!(x.len(), self.ncols);
        assert_eq!(y.len(), self.nrows);
        for (r, out) in y.iter_mut().enumerate() {
            let mut acc = C64::default();
            for k in self.indptr[r]..self.indptr[r + 1] {
                acc += self.values[k] * x[self.indices[k]];
            }
            *out = acc;
        }
    }

    pub fn adjoint(&self) -> Self {
        Self::from_triplets(
            self.ncols,
            self.nrows,
            self.triplets().map(|(r, c, v)| (c, r, v.conj())),
        )
    }

    pub fn transpose(&self) -> Self {
        Self::from_triplets(self.ncols, self.nrows, self.triplets().map(|(r, c, v)| (c, r, v)))
    }

    pub fn conj(&self) -> Self {
        let mut out = self.clone();
        out.values.iter_mut().for_each(|v| *v = v.conj());
        out
    }

    pub fn scale(&self, s: C64) -> Self {
        Self::from_triplets(self.nrows, self.ncols, self.triplets().map(|(r, c, v)| (r, c, v * s)))
    }

    pub fn add(&self, other: &Self) -> Self {
        assert_eq!((self.nrows, self.ncols), (other.nrows, other.ncols));
        Self::from_triplets(self.nrows, self.ncols, self.triplets().chain(other.triplets()))
    }

    pub fn matmul(&self, other: &Self) -> Self {
        assert_eq!(self.ncols, other.nrows);
        let mut trip = Vec::new();
        for r in 0..self.nrows {
            for (k, a) in self.row(r) {
                for (c, b) in other.row(k) {
                    trip.push((r, c, a * b));
                }
            }
        }
        Self::from_triplets(self.nrows, other.ncols, trip)
    }

    /// Kronecker product `self ⊗ other`.
    pub fn kron(&self, other: &Self) -> Self {
        let (m, n) = (other.nrows, other.ncols);
        let mut trip = Vec::with_capacity(self.nnz() * other.nnz());
        for (r1, c1, a) in self.triplets() {
            for (r2, c2, b) in other.triplets() {
                trip.push((r1 * m + r2, c1 * n + c2, a * b));
            }
        }
        Self::from_triplets(self.nrows * m, self.ncols * n, trip)
    }

    pub fn to_dense(&self) -> DenseMatrix {
        let mut d = DenseMatrix::zeros(self.nrows, self.ncols);
        for (r, c, v) in self.triplets() {
            d[(r, c)] += v;
        }
        d
    }

    pub fn from_dense(d: &DenseMatrix) -> Self {
        Self::from_triplets(
            d.nrows(),
            d.ncols(),
            (0..d.nrows()).flat_map(|r| (0..d.ncols()).map(move |c| (r, c, d[(r, c)]))),
        )
    }

    /// Largest entrywise magnitude of `self - self†`.
    pub fn hermiticity_error(&self) -> f64 {
        self.add(&self.adjoint().scale(C64::new(-1.0, 0.0)))
            .values
            .iter()
            .map(|v| v.norm())
            .fold(0.0, f64::max)
    }

    pub fn max_abs(&self) -> f64 {
        self.values.iter().map(|v| v.norm()).fold(0.0, f64::max)
    }
}

/// Row-major dense complex matrix.
#[derive(Clone, Debug, PartialEq)]
pub struct DenseMatrix {
    nrows: usize,
    ncols: usize,
    data: Vec<C64>,
}

impl DenseMatrix {
    pub fn zeros(nrows: usize, ncols: usize) -> Self {
        Self { nrows, ncols, data: vec![C64::default(); nrows * ncols] }
    }

    pub fn identity(n: usize) -> Self {
        let mut m = Self::zeros(n, n);
        for i in 0..n {
            m[(i, i)] = C64::new(1.0, 0.0);
        }
        m
    }

    pub fn from_fn(nrows: usize, ncols: usize, f: impl Fn(usize, usize) -> C64) -> Self {
        let mut data = Vec::with_capacity(nrows * ncols);
        for r in 0..nrows {
            for c in 0..ncols {
                data.push(f(r, c));
            }
        }
        Self { nrows, ncols, data }
    }

    pub fn outer(a: &[C64], b: &[C64]) -> Self {
        Self::from_fn(a.len(), b.len(), |r, c| a[r] * b[c].conj())
    }

    pub fn nrows(&self) -> usize {
        self.nrows
    }

    pub fn ncols(&self) -> usize {
        self.ncols
    }

    pub fn as_slice(&self) -> &[C64] {
        &self.data
    }

    /// Column-stacked vectorization, `vec(A)[r + c·n] = A[r, c]`.
    pub fn vectorize(&self) -> Vec<C64> {
        let mut v = vec![C64::default(); self.nrows * self.ncols];
        for r in 0..self.nrows {
            for c in 0..self.ncols {
                v[r + c * self.nrows] = self[(r, c)];
            }
        }
        v
    }

    /// Inverse of [`DenseMatrix::vectorize`] for a square `n × n` matrix.
    pub fn unvectorize(v: &[C64], n: usize) -> Self {
        assert_eq!(v.len(), n * n);
        Self::from_fn(n, n, |r, c| v[r + c * n])
    }

    pub fn trace(&self) -> C64 {
        (0..self.nrows.min(self.ncols)).map(|i| self[(i, i)]).sum()
    }

    pub fn adjoint(&self) -> Self {
        Self::from_fn(self.ncols, self.nrows, |r, c| self[(c, r)].conj())
    }

    pub fn matmul(&self, other: &Self) -> Self {
        assert_eq!(self.ncols, other.nrows);
        let mut out = Self::zeros(self.nrows, other.ncols);
        for r in 0..self.nrows {
            for k in 0..self.ncols {
                let a = self[(r, k)];
                if a == C64::default() {
                    continue;
                }
                for c in 0..other.ncols {
                    out.data[r * other.ncols + c] += a * other.data[k * other.ncols + c];
                }
            }
        }
        out
    }

    pub fn kron(&self, other: &Self) -> Self {
        let (m, n) = (other.nrows, other.ncols);
        Self::from_fn(self.nrows * m, self.ncols * n, |r, c| {
            self[(r / m, c / n)] * other[(r % m, c % n)]
        })
    }

    pub fn scale(&self, s: C64) -> Self {
        Self { nrows: self.nrows, ncols: self.ncols, data: self.data.iter().map(|v| v * s).collect() }
    }

    pub fn add(&self, other: &Self) -> Self {
        assert_eq!((self.nrows, self.ncols), (other.nrows, other.ncols));
        Self {
            nrows: self.nrows,
            ncols: self.ncols,
            data: self.data.iter().zip(&other.data).map(|(a, b)| a + b).collect(),
        }
    }

    pub fn sub(&self, other: &Self) -> Self {
        self.add(&other.scale(C64::new(-1.0, 0.0)))
    }

    pub fn matvec(&self, x: &[C64]) -> Vec<C64> {
        assert_eq!(x.len(), self.ncols);
        (0..self.nrows)
            .map(|r| (0..self.ncols).map(|c| self[(r, c)] * x[c]).sum())
            .collect()
    }

    pub fn max_abs(&self) -> f64 {
        self.data.iter().map(|v| v.norm()).fold(0.0, f64::max)
    }

    pub fn max_abs_diff(&self, other: &Self) -> f64 {
        assert_eq!((self.nrows, self.ncols), (other.nrows, other.ncols));
        self.data.iter().zip(&other.data).map(|(a, b)| (a - b).norm()).fold(0.0, f64::max)
    }

    /// Largest entrywise magnitude of `self - self†`.
    pub fn hermiticity_error(&self) -> f64 {
        self.max_abs_diff(&self.adjoint())
    }

    /// Eigenvalues of the Hermitian part, ascending.
    pub fn hermitian_eigenvalues(&self) -> Vec<f64> {
        assert_eq!(self.nrows, self.ncols);
        let n = self.nrows;
        let m = faer::Mat::<C64>::from_fn(n, n, |r, c| 0.5 * (self[(r, c)] + self[(c, r)].conj()));
        m.self_adjoint_eigenvalues(faer::Side::Lower)
            .expect("hermitian eigenvalue decomposition failed to converge")
    }
}

impl std::ops::Index<(usize, usize)> for DenseMatrix {
    type Output = C64;
    fn index(&self, (r, c): (usize, usize)) -> &C64 {
        &self.data[r * self.ncols + c]
    }
}

impl std::ops::IndexMut<(usize, usize)> for DenseMatrix {
    fn index_mut(&mut self, (r, c): (usize, usize)) -> &mut C64 {
        &mut self.data[r * self.ncols + c]
    }
}

/// Eigen-decomposition of a real symmetric matrix given row-major.
/// Returns ascending eigenvalues and eigenvectors as columns (row-major).
pub fn symmetric_eigen(n: usize, a: &[f64]) -> (Vec<f64>, Vec<f64>) {
    assert_eq!(a.len(), n * n);
    let m = faer::Mat::<f64>::from_fn(n, n, |r, c| 0.5 * (a[r * n + c] + a[c * n + r]));
    let evd = m
        .self_adjoint_eigen(faer::Side::Lower)
        .expect("symmetric eigen decomposition failed to converge");
    let s = evd.S();
    let u = evd.U();
    let values = (0..n).map(|i| s[i]).collect();
    let mut vecs = vec![0.0; n * n];
    for r in 0..n {
        for c in 0..n {
            vecs[r * n + c] = u[(r, c)];
        }
    }
    (values, vecs)
}

/// Eigen-decomposition of a dense Hermitian matrix: ascending eigenvalues and
/// eigenvectors as columns.
pub fn hermitian_eigen(m: &DenseMatrix) -> (Vec<f64>, DenseMatrix) {
    let n = m.nrows();
    let fm = faer::Mat::<C64>::from_fn(n, n, |r, c| 0.5 * (m[(r, c)] + m[(c, r)].conj()));
    let evd = fm
        .self_adjoint_eigen(faer::Side::Lower)
        .expect("hermitian eigen decomposition failed to converge");
    let s = evd.S();
    let u = evd.U();
    let values = (0..n).map(|i| s[i].re).collect();
    (values, DenseMatrix::from_fn(n, n, |r, c| u[(r, c)]))
}
