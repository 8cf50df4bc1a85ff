use nalgebra::{DMatrix, SymmetricEigen};
use proptest::prelude::*;
use rand::rngs::StdRng;
use rand::seq::SliceRandom;
use rand::SeedableRng;

use lasertherm::assembly::{assemble, assemble_with, element_mass, element_stiffness, MaterialProperties};
use lasertherm::mesh::{build_grid, Face};
use lasertherm::sparse::CsrMatrix;
use lasertherm::{Error, Execution};

fn tissue() -> MaterialProperties {
    MaterialProperties {
        c_v: 4.3,
        kappa: 0.0062,
        mu_a: 31.0,
        h: 0.022,
        t_inf: 24.0,
    }
}

fn dense(a: &CsrMatrix) -> DMatrix<f64> {
    DMatrix::from_fn(a.dim(), a.dim(), |i, j| a.get(i, j))
}

#[test]
fn element_order_does_not_matter() {
    let mesh = build_grid([3, 2, 4], [0.6, 0.5, 0.8], [0.1, -0.3, 0.0]).unwrap();
    let sys = assemble(&mesh, &tissue(), &[]).unwrap();
    let mut order: Vec<usize> = (0..mesh.element_count()).collect();
    order.shuffle(&mut StdRng::seed_from_u64(7));
    let mut mt = Vec::new();
    let mut kt = Vec::new();
    for &e in &order {
        let conn = mesh.elements()[e];
        let me = element_mass(&mesh, e, 4.3).unwrap();
        let ke = element_stiffness(&mesh, e, 0.0062).unwrap();
        for a in 0..8 {
            for b in 0..8 {
                mt.push((conn[a], conn[b], me[a][b]));
                kt.push((conn[a], conn[b], ke[a][b]));
            }
        }
    }
    let m = CsrMatrix::from_triplets(mesh.node_count(), &mt);
    let k = CsrMatrix::from_triplets(mesh.node_count(), &kt);
    for i in 0..mesh.node_count() {
        for j in 0..mesh.node_count() {
            assert!((m.get(i, j) - sys.m.get(i, j)).abs() <= 1e-15 * sys.m.get(i, i));
            assert!((k.get(i, j) - sys.k.get(i, j)).abs() <= 1e-15 * sys.k.get(i, i));
        }
    }
}

#[test]
fn sequential_and_parallel_assembly_match_exactly() {
    let mesh = build_grid([5, 4, 6], [2.0, 2.0, 0.5], [-1.0, -1.0, 0.0]).unwrap();
    let dirichlet = [(Face::Bottom, 24.0)];
    let a = assemble_with(&mesh, &tissue(), &dirichlet, Execution::Sequential).unwrap();
    let b = assemble_with(&mesh, &tissue(), &dirichlet, Execution::Parallel).unwrap();
    assert_eq!(a.m, b.m);
    assert_eq!(a.k, b.k);
}

#[test]
fn reduced_step_matrix_is_positive_definite() {
    let mesh = build_grid([3, 3, 3], [1.0, 1.0, 0.5], [0.0; 3]).unwrap();
    let sys = assemble(&mesh, &tissue(), &[(Face::Bottom, 24.0)]).unwrap();
    let free = sys.free_nodes();
    let k_ff = dense(&sys.k.principal_submatrix(free));
    let eig = SymmetricEigen::new(k_ff).eigenvalues;
    // the sink removes the constant null mode
    assert!(eig.min() > 0.0, "min eigenvalue {}", eig.min());
    let full = SymmetricEigen::new(dense(&sys.k)).eigenvalues;
    assert!(full.min().abs() < 1e-14 * full.max());
}

#[test]
fn conflicting_sinks_are_rejected() {
    let mesh = build_grid([2, 2, 2], [1.0; 3], [0.0; 3]).unwrap();
    let err = assemble(&mesh, &tissue(), &[(Face::Bottom, 24.0), (Face::XMin, 30.0)]).unwrap_err();
    assert!(matches!(err, Error::DirichletConflict { .. }), "{err}");
    assemble(&mesh, &tissue(), &[(Face::Bottom, 24.0), (Face::XMin, 24.0)]).unwrap();
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(24))]

    #[test]
    fn global_invariants(
        nx in 1usize..4, ny in 1usize..4, nz in 1usize..4,
        ex in 0.1f64..3.0, ey in 0.1f64..3.0, ez in 0.1f64..3.0,
        c_v in 0.5f64..5.0, kappa in 0.001f64..1.0,
    ) {
        let mesh = build_grid([nx, ny, nz], [ex, ey, ez], [0.0; 3]).unwrap();
        let mat = MaterialProperties { c_v, kappa, ..tissue() };
        let sys = assemble(&mesh, &mat, &[]).unwrap();
        let volume = ex * ey * ez;
        prop_assert!((sys.m.sum() - c_v * volume).abs() <= 1e-12 * c_v * volume);
        prop_assert_eq!(sys.m.asymmetry(), 0.0);
        prop_assert!(sys.k.asymmetry() <= 1e-15 * sys.k.frobenius_norm());
        let k1 = sys.k.mul_vec(&vec![1.0; mesh.node_count()]);
        let n1 = k1.iter().map(|x| x * x).sum::<f64>().sqrt();
        prop_assert!(n1 <= 1e-12 * sys.k.frobenius_norm());
        let eig = SymmetricEigen::new(dense(&sys.m)).eigenvalues;
        prop_assert!(eig.min() > 0.0);
    }
}
