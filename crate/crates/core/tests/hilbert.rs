use num_complex::Complex64 as C64;
use proptest::prelude::*;

use bathsim::hilbert::{
    basis_state, embed, expectation, fidelity_pure, local_lowering, lowering_op, number_op, partial_trace,
    superposition, CompositeSpace, DensityMatrix, LinearOperator, ModeSpec,
};
use bathsim::linalg::{DenseMatrix, SparseMatrix};

type Dense = Vec<Vec<C64>>;

fn eye(n: usize) -> Dense {
    (0..n).map(|r| (0..n).map(|c| if r == c { C64::new(1.0, 0.0) } else { C64::default() }).collect()).collect()
}

fn kron(a: &Dense, b: &Dense) -> Dense {
    let (na, nb) = (a.len(), b.len());
    let mut out = vec![vec![C64::default(); na * nb]; na * nb];
    for i in 0..na {
        for j in 0..na {
            for k in 0..nb {
                for l in 0..nb {
                    out[i * nb + k][j * nb + l] = a[i][j] * b[k][l];
                }
            }
        }
    }
    out
}

fn lowering_dense(dim: usize) -> Dense {
    let mut m = vec![vec![C64::default(); dim]; dim];
    for n in 1..dim {
        m[n - 1][n] = C64::new((n as f64).sqrt(), 0.0);
    }
    m
}

fn max_diff(op: &SparseMatrix, want: &Dense) -> f64 {
    let mut worst: f64 = 0.0;
    for (r, row) in want.iter().enumerate() {
        for (c, v) in row.iter().enumerate() {
            worst = worst.max((op.get(r, c) - v).norm());
        }
    }
    worst
}

fn space(dims: &[usize]) -> std::sync::Arc<CompositeSpace> {
    CompositeSpace::new(dims.iter().enumerate().map(|(i, &d)| ModeSpec::resonator(format!("m{i}"), d)).collect())
        .unwrap()
}

fn random_matrix(n: usize, vals: &[(f64, f64)]) -> DenseMatrix {
    DenseMatrix::from_fn(n, n, |r, c| {
        let (re, im) = vals[(r * n + c) % vals.len()];
        C64::new(re, im)
    })
}

/// `A A† / Tr(A A†)`, a valid density matrix for any nonzero `A`.
fn random_density(n: usize, vals: &[(f64, f64)]) -> DenseMatrix {
    let a = random_matrix(n, vals);
    let p = a.matmul(&a.adjoint());
    let tr = p.trace();
    p.scale(tr.inv())
}

fn dims_strategy() -> impl Strategy<Value = Vec<usize>> {
    prop::collection::vec(2usize..=4, 1..=3).prop_filter("total dim <= 64", |d| d.iter().product::<usize>() <= 64)
}

fn entries() -> impl Strategy<Value = Vec<(f64, f64)>> {
    prop::collection::vec((-1.0f64..1.0, -1.0f64..1.0), 7..40)
}

#[test]
fn two_mode_lowering_matches_kronecker() {
    let s = space(&[2, 2]);
    let a = lowering_op(&s, 1).unwrap();
    let want = kron(&eye(2), &lowering_dense(2));
    assert_eq!(max_diff(a.matrix(), &want), 0.0);
}

#[test]
fn basic_identities() {
    let s = space(&[3, 2]);
    let id = embed(&s, 0, &SparseMatrix::identity(3)).unwrap();
    assert_eq!(max_diff(id.matrix(), &eye(6)), 0.0);
    let a = lowering_op(&s, 0).unwrap();
    let raising = embed(&s, 0, &local_lowering(3).adjoint()).unwrap();
    assert_eq!(a.adjoint().matrix(), raising.matrix());
    assert_eq!(a.compose(&LinearOperator::identity(&s)).unwrap().matrix(), a.matrix());
    let n = number_op(&s, 0).unwrap();
    assert!(a.adjoint().compose(&a).unwrap().matrix().to_dense().max_abs_diff(&n.matrix().to_dense()) < 1e-14);
}

#[test]
fn superposition_is_normalized() {
    let s = space(&[2, 2]);
    let h = std::f64::consts::FRAC_1_SQRT_2;
    let psi = superposition(&s, &[(C64::new(h, 0.0), vec![0, 1]), (C64::new(h, 0.0), vec![1, 0])]).unwrap();
    let norm: f64 = psi.iter().map(|c| c.norm_sqr()).sum();
    assert!((norm - 1.0).abs() < 1e-15);
    assert!(basis_state(&s, &[2, 0]).is_err());
}

#[test]
fn mixed_state_fidelity_with_bell_state() {
    let s = space(&[2, 2]);
    let h = std::f64::consts::FRAC_1_SQRT_2;
    let bell = superposition(&s, &[(C64::new(h, 0.0), vec![0, 0]), (C64::new(h, 0.0), vec![1, 1])]).unwrap();
    let f = fidelity_pure(&bell, &DensityMatrix::maximally_mixed(&s)).unwrap();
    assert!((f - 0.25).abs() < 1e-15);
}

#[test]
fn partial_trace_of_product_state() {
    let s = space(&[2, 3]);
    let ra = random_density(2, &[(0.3, 0.1), (0.2, -0.5), (0.9, 0.0), (-0.4, 0.2)]);
    let rb = random_density(3, &[(0.7, 0.0), (0.1, 0.3), (-0.2, 0.6), (0.5, -0.1), (0.3, 0.3)]);
    let rho = DensityMatrix::new(s.clone(), ra.kron(&rb)).unwrap();
    let red = partial_trace(&rho, &[0]).unwrap();
    assert!(red.matrix().max_abs_diff(&ra) < 1e-14);
    assert!(partial_trace(&rho, &[]).is_err());
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn embed_matches_kronecker(dims in dims_strategy(), pick in 0usize..3) {
        let mode = pick % dims.len();
        let s = space(&dims);
        let a = lowering_op(&s, mode).unwrap();
        let mut want = eye(1);
        for (i, &d) in dims.iter().enumerate() {
            want = kron(&want, &if i == mode { lowering_dense(d) } else { eye(d) });
        }
        prop_assert!(max_diff(a.matrix(), &want) <= 1e-12);
    }

    #[test]
    fn number_lowering_commutator(dims in dims_strategy(), pick in 0usize..3) {
        // [n, a] = -a holds on the whole truncated space: the top Fock level
        // only breaks [a, a†] = 1, not this relation
        let mode = pick % dims.len();
        let s = space(&dims);
        let a = lowering_op(&s, mode).unwrap();
        let n = number_op(&s, mode).unwrap();
        let comm = n.compose(&a).unwrap().add(&a.compose(&n).unwrap().scale(-1.0)).unwrap();
        let diff = comm.add(&a).unwrap();
        prop_assert!(diff.matrix().max_abs() <= 1e-12);
        // the canonical commutator fails exactly on the top level
        let ad = a.adjoint();
        let cc = a.compose(&ad).unwrap().add(&ad.compose(&a).unwrap().scale(-1.0)).unwrap();
        let d = dims[mode];
        for idx in 0..s.total_dim() {
            let occ = s.occupations(idx)[mode];
            let want = if occ + 1 == d { 1.0 - d as f64 } else { 1.0 };
            prop_assert!((cc.matrix().get(idx, idx).re - want).abs() <= 1e-12);
        }
    }

    #[test]
    fn adjoint_rules(vals_a in entries(), vals_b in entries(), d in 2usize..=6) {
        let s = space(&[d]);
        let a = LinearOperator::new(s.clone(), SparseMatrix::from_dense(&random_matrix(d, &vals_a))).unwrap();
        let b = LinearOperator::new(s.clone(), SparseMatrix::from_dense(&random_matrix(d, &vals_b))).unwrap();
        let aa = a.adjoint().adjoint();
        prop_assert_eq!(aa.matrix(), a.matrix());
        let lhs = a.compose(&b).unwrap().adjoint().matrix().to_dense();
        let rhs = b.adjoint().compose(&a.adjoint()).unwrap().matrix().to_dense();
        prop_assert!(lhs.max_abs_diff(&rhs) <= 1e-12);
    }

    #[test]
    fn partial_trace_matches_index_sum(vals in entries(), keep_first in any::<bool>()) {
        let (da, db) = (2, 3);
        let s = space(&[da, db]);
        let m = random_density(da * db, &vals);
        let rho = DensityMatrix::new(s, m.clone()).unwrap();
        let keep = if keep_first { 0 } else { 1 };
        let red = partial_trace(&rho, &[keep]).unwrap();
        let (nk, nt) = if keep_first { (da, db) } else { (db, da) };
        for i in 0..nk {
            for j in 0..nk {
                let mut acc = C64::default();
                for k in 0..nt {
                    let (r, c) = if keep_first { (i * db + k, j * db + k) } else { (k * db + i, k * db + j) };
                    acc += m[(r, c)];
                }
                prop_assert!((red.matrix()[(i, j)] - acc).norm() <= 1e-12);
            }
        }
        let diag = red.diagnostics();
        prop_assert!((red.trace().re - 1.0).abs() <= 1e-12);
        prop_assert!(diag.min_eigenvalue >= -1e-10);
    }

    #[test]
    fn expectation_of_identity_is_trace(vals in entries(), d in 2usize..=8) {
        let s = space(&[d]);
        let rho = DensityMatrix::new(s.clone(), random_density(d, &vals)).unwrap();
        let e = expectation(&LinearOperator::identity(&s), &rho).unwrap();
        prop_assert!((e - C64::new(1.0, 0.0)).norm() <= 1e-12);
        let f = fidelity_pure(&basis_state(&s, &[0]).unwrap(), &rho).unwrap();
        prop_assert!((-1e-12..=1.0 + 1e-12).contains(&f));
    }
}
