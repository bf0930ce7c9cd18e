mod common;

use common::*;
use nalgebra::DMatrix;
use proptest::prelude::*;
use rotor_recon::basis::HilbertSpace;
use rotor_recon::hamiltonian::{build_hamiltonian, build_single_rotor_ops};
use rotor_recon::operator::LinearOperator;

#[test]
fn gauss_legendre_integrates_polynomials() {
    let nodes = gauss_legendre(10);
    let total: f64 = nodes.iter().map(|(_, w)| w).sum();
    assert!((total - 2.0).abs() < 1e-14);
    let x18: f64 = nodes.iter().map(|(x, w)| w * x.powi(18)).sum();
    assert!((x18 - 2.0 / 19.0).abs() < 1e-14);
}

#[test]
fn spherical_harmonics_are_orthonormal() {
    let id = quadrature_matrix(4, |_, _| nalgebra::Complex::new(1.0, 0.0));
    let d = id.nrows();
    assert!(max_abs_diff(&real_part(&id), &DMatrix::identity(d, d)) < 1e-13);
    assert!(max_imag(&id) < 1e-13);
}

#[test]
fn single_rotor_elements_match_quadrature() {
    for ell_max in 0..=5 {
        let ops = build_single_rotor_ops(ell_max);
        let (z, pp, pm) = quadrature_ops(ell_max);
        assert!(max_abs_diff(&ops.z_mat, &z) < 1e-12, "z, ell_max = {ell_max}");
        assert!(max_abs_diff(&ops.p_plus, &pp) < 1e-12, "p+, ell_max = {ell_max}");
        assert!(max_abs_diff(&ops.p_minus, &pm) < 1e-12, "p-, ell_max = {ell_max}");
    }
}

#[test]
fn matrix_free_apply_matches_dense_kronecker() {
    for n in 1..=3 {
        for ell_max in 0..=2 {
            for r in [1.0, 1.37, f64::INFINITY] {
                let h = build_hamiltonian(HilbertSpace::new(n, ell_max).unwrap(), r).unwrap();
                let dense = dense_hamiltonian(n, ell_max, r);
                let ours = h.to_dense();
                let err = max_abs_diff(&ours, &dense);
                assert!(err < 1e-12, "N = {n}, ell_max = {ell_max}, R = {r}: {err}");
            }
        }
    }
}

#[test]
fn connected_configs_match_dense_row_nonzeros() {
    let (n, ell_max, r) = (3, 2, 1.0);
    let space = HilbertSpace::new(n, ell_max).unwrap();
    let h = build_hamiltonian(space, r).unwrap();
    let v = (dense_hamiltonian(n, ell_max, r) - dense_hamiltonian(n, ell_max, f64::INFINITY)) * r.powi(3);
    for x in 0..space.total_dim() {
        let cfg = space.config_at(x).unwrap();
        let mut ours: Vec<(usize, f64)> = h
            .connected_configs(&cfg)
            .unwrap()
            .into_iter()
            .map(|(c, e)| (space.index_of(&c).unwrap(), e))
            .collect();
        ours.sort_by_key(|&(i, _)| i);
        let theirs: Vec<(usize, f64)> =
            (0..space.total_dim()).filter(|&y| v[(x, y)].abs() > 1e-12).map(|y| (y, v[(x, y)])).collect();
        assert_eq!(ours.len(), theirs.len(), "row {x}");
        for ((i, a), (j, b)) in ours.iter().zip(&theirs) {
            assert_eq!(i, j);
            assert!((a - b).abs() < 1e-12);
        }
    }
}

#[test]
fn potential_scales_as_inverse_cube() {
    let space = HilbertSpace::new(3, 2).unwrap();
    let k = build_hamiltonian(space, f64::INFINITY).unwrap().to_dense();
    let h1 = build_hamiltonian(space, 1.0).unwrap().to_dense();
    let h2 = build_hamiltonian(space, 2.0).unwrap().to_dense();
    let err = max_abs_diff(&((&h2 - &k) * 8.0), &(&h1 - &k));
    assert!(err < 1e-12);
}

fn vector(dim: usize) -> impl Strategy<Value = Vec<f64>> {
    prop::collection::vec(-1.0f64..1.0, dim)
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(48))]

    #[test]
    fn hamiltonian_is_symmetric(x in vector(81), y in vector(81), r in 0.8f64..4.0) {
        let h = build_hamiltonian(HilbertSpace::new(2, 2).unwrap(), r).unwrap();
        let a = h.matrix_element(&x, &y).unwrap();
        let b = h.matrix_element(&y, &x).unwrap();
        prop_assert!((a - b).abs() < 1e-11 * (1.0 + a.abs()));
    }

    #[test]
    fn symmetry_sectors_are_conserved(x in 0usize..729, r in 0.8f64..4.0) {
        let space = HilbertSpace::new(3, 2).unwrap();
        let h = build_hamiltonian(space, r).unwrap();
        let cfg = space.config_at(x).unwrap();
        for (c, _) in h.connected_configs(&cfg).unwrap() {
            prop_assert_eq!(c.total_m(), cfg.total_m());
            prop_assert_eq!(c.ell_parity(), cfg.ell_parity());
        }
        let mut e = vec![0.0; space.total_dim()];
        e[x] = 1.0;
        let he = h.apply(&e).unwrap();
        for (y, v) in he.iter().enumerate() {
            if v.abs() > 0.0 {
                let c = space.config_at(y).unwrap();
                prop_assert_eq!((c.total_m(), c.ell_parity()), (cfg.total_m(), cfg.ell_parity()));
            }
        }
    }

    #[test]
    fn apply_is_linear(x in vector(64), y in vector(64), a in -3.0f64..3.0) {
        let h = build_hamiltonian(HilbertSpace::new(3, 1).unwrap(), 1.2).unwrap();
        let combo: Vec<f64> = x.iter().zip(&y).map(|(p, q)| a * p + q).collect();
        let lhs = h.apply(&combo).unwrap();
        let hx = h.apply(&x).unwrap();
        let hy = h.apply(&y).unwrap();
        for i in 0..64 {
            prop_assert!((lhs[i] - (a * hx[i] + hy[i])).abs() < 1e-11);
        }
    }
}
