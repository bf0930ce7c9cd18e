use rand::Rng;
use rotor_recon::basis::{HilbertSpace, RotorConfiguration};
use rotor_recon::rbm::{exact_distribution, gradients, RbmParameters};
use rotor_recon::rng::stream_rng;

pub fn tiny() -> HilbertSpace {
    HilbertSpace::new(2, 1).unwrap()
}

pub fn all_configs(space: &HilbertSpace) -> Vec<RotorConfiguration> {
    (0..space.total_dim()).map(|x| space.config_at(x).unwrap()).collect()
}

/// Joint energy of a visible configuration and a hidden bit vector.
pub fn joint_energy(p: &RbmParameters, sigmas: &[u32], h: &[u8]) -> f64 {
    let mut e = 0.0;
    for (i, &s) in sigmas.iter().enumerate() {
        e -= p.b(i, s as usize);
        for (j, &hj) in h.iter().enumerate() {
            e -= p.w(i, j, s as usize) * hj as f64;
        }
    }
    for (j, &hj) in h.iter().enumerate() {
        e -= p.hidden_bias[j] * hj as f64;
    }
    e
}

pub fn hidden_states(n_h: usize) -> Vec<Vec<u8>> {
    (0..1u32 << n_h).map(|bits| (0..n_h).map(|j| ((bits >> j) & 1) as u8).collect()).collect()
}

pub fn scaled(seed: u64, scale: f64) -> RbmParameters {
    let mut p = RbmParameters::random(&tiny(), 3, seed);
    let mut rng = stream_rng(seed, 99);
    for k in 0..p.n_params() {
        *p.flat_mut(k) = scale * (rng.random::<f64>() - 0.5);
    }
    p
}

pub fn exact_kl_gradient(p: &RbmParameters, q: &[f64], configs: &[RotorConfiguration]) -> Vec<f64> {
    let model = exact_distribution(p).unwrap();
    let reference = [configs[0].clone()];
    let mut g = vec![0.0; p.n_params()];
    for (x, c) in configs.iter().enumerate() {
        // the reference term cancels because Σ (q − p) = 0
        let d = gradients(p, std::slice::from_ref(c), &reference).unwrap().flat();
        for (gi, di) in g.iter_mut().zip(d) {
            *gi += (q[x] - model[x]) * di;
        }
    }
    g
}

pub fn relative_error(a: &[f64], b: &[f64]) -> f64 {
    let diff: f64 = a.iter().zip(b).map(|(x, y)| (x - y).powi(2)).sum::<f64>().sqrt();
    let scale: f64 = b.iter().map(|y| y * y).sum::<f64>().sqrt();
    diff / scale
}

pub fn target_distribution(space: &HilbertSpace) -> Vec<f64> {
    let mut rng = stream_rng(17, 0);
    let w: Vec<f64> = (0..space.total_dim()).map(|_| rng.random::<f64>().powi(3)).collect();
    let s: f64 = w.iter().sum();
    w.into_iter().map(|v| v / s).collect()
}
