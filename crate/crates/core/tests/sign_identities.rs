use nalgebra::DMatrix;
use proptest::prelude::*;
use rand::Rng;
use rotor_recon::basis::HilbertSpace;
use rotor_recon::eigensolver::{ground_state_with, SolverOptions};
use rotor_recon::hamiltonian::build_hamiltonian;
use rotor_recon::operator::{dot, Diagonal};
use rotor_recon::rng::stream_rng;
use rotor_recon::signs::*;

fn random_state(dim: usize, seed: u64) -> Vec<f64> {
    let mut rng = stream_rng(seed, 1);
    let mut v: Vec<f64> = (0..dim).map(|_| rng.random::<f64>() - 0.5).collect();
    if v[0] == 0.0 {
        v[0] = 0.1;
    }
    let n = dot(&v, &v).sqrt();
    v.iter_mut().for_each(|x| *x /= n);
    v
}

fn random_symmetric(dim: usize, seed: u64) -> DMatrix<f64> {
    let mut rng = stream_rng(seed, 2);
    let m = DMatrix::from_fn(dim, dim, |_, _| rng.random::<f64>() - 0.5);
    &m + m.transpose()
}

#[test]
fn identities_on_random_systems() {
    for seed in 0..50u64 {
        let dim = 3 + (seed as usize * 7) % 40;
        let psi = random_state(dim, seed);
        let a = random_symmetric(dim, seed);
        let part = partition_signs(&psi, 0).unwrap();
        assert!((part.tau_plus + part.tau_minus - 1.0).abs() < 1e-12);
        let rect = rectify(&psi, &part);
        assert!((dot(&rect, &psi) - (1.0 - 2.0 * part.tau_minus)).abs() < 1e-12);
        let direct = epsilon_general(&psi, &a, &part).unwrap();
        let closed = epsilon_projector(&psi, &a, &part).unwrap();
        assert!((direct - closed).abs() < 1e-9, "seed {seed}: {direct} vs {closed}");
        let diag = Diagonal((0..dim).map(|i| (i as f64).sin()).collect());
        assert!(epsilon_general(&psi, &diag, &part).unwrap().abs() < 1e-12);
        assert!(epsilon_projector(&psi, &diag, &part).unwrap().abs() < 1e-12);
    }
}

#[test]
fn eigenstate_form_on_random_rotor_chains() {
    let mut rng = stream_rng(77, 0);
    for _ in 0..50 {
        let n = rng.random_range(2..=3usize);
        let ell_max = rng.random_range(1..=2u32);
        let r = rng.random_range(0.6..2.0);
        let h = build_hamiltonian(HilbertSpace::new(n, ell_max).unwrap(), r).unwrap();
        let sol = ground_state_with(&h, &SolverOptions::default()).unwrap();
        let part = partition_signs(&sol.amplitudes, 0).unwrap();
        let direct = epsilon_general(&sol.amplitudes, &h, &part).unwrap();
        let closed = epsilon_energy(&sol, &h, &part).unwrap();
        let projector = epsilon_projector(&sol.amplitudes, &h, &part).unwrap();
        assert!((direct - closed).abs() < 1e-9, "N = {n}, ell_max = {ell_max}, R = {r}");
        assert!((direct - projector).abs() < 1e-9);
        assert!(direct >= -1e-12, "rectification cannot lower the variational energy");
    }
}

#[test]
fn stoquastic_chain_has_no_sign_error() {
    let h = build_hamiltonian(HilbertSpace::new(3, 2).unwrap(), f64::INFINITY).unwrap();
    let (stoquastic, _) = stoquasticity_check(&h);
    assert!(stoquastic);
    let h = build_hamiltonian(HilbertSpace::new(3, 2).unwrap(), 1.0).unwrap();
    let (stoquastic, worst) = stoquasticity_check(&h);
    assert!(!stoquastic && worst > 0.0);
}

proptest! {
    #[test]
    fn partition_is_complete(seed in 0u64..100_000, dim in 2usize..60) {
        let psi = random_state(dim, seed);
        let part = partition_signs(&psi, 0).unwrap();
        prop_assert!((part.tau_plus + part.tau_minus - 1.0).abs() < 1e-12);
        let plus = part.project(&psi, false);
        let minus = part.project(&psi, true);
        for i in 0..dim {
            prop_assert_eq!(plus[i] + minus[i], psi[i]);
        }
        let flipped: Vec<f64> = psi.iter().map(|v| -v).collect();
        let other = partition_signs(&flipped, 0).unwrap();
        prop_assert_eq!(other.negative_mask, part.negative_mask);
    }
}
