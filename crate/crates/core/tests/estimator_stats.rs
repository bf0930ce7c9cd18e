mod common;

use common::dense_hamiltonian;
use nalgebra::DVector;
use rotor_recon::basis::HilbertSpace;
use rotor_recon::eigensolver::{ground_state_with, SolverOptions};
use rotor_recon::estimators::*;
use rotor_recon::hamiltonian::build_hamiltonian;
use rotor_recon::rbm::{gibbs_sample, GibbsChainState, RbmParameters};
use rotor_recon::sampling::sample_exact;

#[test]
fn kinetic_mean_of_exact_samples_matches_dense_expectation() {
    let (n, ell_max, r) = (2, 3, 1.0);
    let h = build_hamiltonian(HilbertSpace::new(n, ell_max).unwrap(), r).unwrap();
    let sol = ground_state_with(&h, &SolverOptions::default()).unwrap();
    let psi = DVector::from_vec(sol.amplitudes.clone());
    let k = dense_hamiltonian(n, ell_max, f64::INFINITY);
    let exact = psi.dot(&(&k * &psi));
    let ds = sample_exact(&sol, &h, 200_000, 8).unwrap();
    let (mean, se) = kinetic_estimator(&ds.samples).unwrap();
    assert!((mean - exact).abs() < 5.0 * se, "{mean} ± {se} vs {exact}");
}

fn uniform_samples(space: &HilbertSpace, count: usize, seed: u64) -> (RbmParameters, Vec<rotor_recon::basis::RotorConfiguration>) {
    let p = RbmParameters::zeros(space, 2);
    let start = GibbsChainState::all_zero(space.n_sites(), 2);
    let samples = gibbs_sample(&p, &start, 1, count, seed);
    (p, samples)
}

#[test]
fn uniform_model_potential_matches_enumeration() {
    let space = HilbertSpace::new(2, 1).unwrap();
    let h = build_hamiltonian(space, 1.0).unwrap();
    let v = dense_hamiltonian(2, 1, 1.0) - dense_hamiltonian(2, 1, f64::INFINITY);
    let exact = v.sum() / space.total_dim() as f64;
    let (p, samples) = uniform_samples(&space, 100_000, 3);
    let (mean, se) = potential_estimator(&p, &samples, &h).unwrap();
    assert!(se > 0.0);
    assert!((mean - exact).abs() < 5.0 * se, "{mean} ± {se} vs {exact}");
}

#[test]
fn uniform_model_violation_fraction_matches_enumeration() {
    let space = HilbertSpace::new(2, 1).unwrap();
    let outside = (0..space.total_dim())
        .filter(|&x| !space.config_at(x).unwrap().is_symmetric())
        .count() as f64
        / space.total_dim() as f64;
    let (_, samples) = uniform_samples(&space, 100_000, 4);
    let split = symmetry_violation_fraction(&samples).unwrap();
    let se = (outside * (1.0 - outside) / samples.len() as f64).sqrt();
    assert!((split.fraction - outside).abs() < 5.0 * se, "{} vs {outside}", split.fraction);
    assert_eq!(split.symmetric.len() + split.violating.len(), samples.len());
}

#[test]
fn exact_samples_conserve_symmetry() {
    let h = build_hamiltonian(HilbertSpace::new(3, 2).unwrap(), 1.0).unwrap();
    let sol = ground_state_with(&h, &SolverOptions::default()).unwrap();
    let ds = sample_exact(&sol, &h, 5000, 1).unwrap();
    assert_eq!(symmetry_violation_fraction(&ds.samples).unwrap().fraction, 0.0);
}

#[test]
fn delta_state_model_has_zero_energy() {
    let space = HilbertSpace::new(2, 1).unwrap();
    let h = build_hamiltonian(space, 1.0).unwrap();
    let mut p = RbmParameters::zeros(&space, 1);
    let n_weights = 2 * space.local_dim();
    for i in 0..2 {
        *p.flat_mut(n_weights + i * space.local_dim()) = 60.0;
    }
    assert_eq!(p.b(1, 0), 60.0);
    let ground = vec![rotor_recon::basis::RotorConfiguration::ground(2); 10];
    let est = energy_rbm(&p, &ground, &h).unwrap();
    assert!(est.total.abs() < 1e-20 && est.std_error < 1e-30, "{est:?}");
}

#[test]
fn exhaustive_weighting_matches_dense_expectation() {
    let space = HilbertSpace::new(2, 1).unwrap();
    for r in [1.0, 1.7] {
        let h = build_hamiltonian(space, r).unwrap();
        let mut p = RbmParameters::random(&space, 3, 6);
        for k in 0..p.n_params() {
            *p.flat_mut(k) += 0.3 * ((k as f64) * 1.3).sin();
        }
        let amps: Vec<f64> = (0..space.total_dim())
            .map(|x| p.unnormalized_psi(space.config_at(x).unwrap().sigmas()))
            .collect();
        let psi = DVector::from_vec(amps).normalize();
        let exact = psi.dot(&(dense_hamiltonian(2, 1, r) * &psi));
        let est = energy_rbm_exact(&p, &h).unwrap();
        assert!((est.total - exact).abs() < 1e-10, "{} vs {exact}", est.total);
    }
}
