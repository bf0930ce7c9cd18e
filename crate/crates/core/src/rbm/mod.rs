//! Restricted Boltzmann machine with multinomial (one-hot) visible units.
//!
//! Each of the `N` visible sites takes one of `D` values, encoded one-hot as
//! `σ[i][d]`; the `n_h` hidden units are binary. The joint energy is
//!
//! ```text
//! E(σ, h) = −Σ W[i][j][d] h_j σ[i][d] − Σ b[i][d] σ[i][d] − Σ c[j] h_j
//! ```
//!
//! and tracing out `h` gives the effective energy
//! `ℰ(σ) = −Σ b[i][σᵢ] − Σ_j softplus(c_j + Σ_i W[i][j][σᵢ])`, so
//! `p(σ) = e^{−ℰ(σ)}/Z` and the encoded wavefunction is `√p(σ)`.
//!
//! Visible configurations are passed as flattened labels (`&[u32]`, one per
//! site); this is the one-hot tensor stored by the index of its single 1.

mod checkpoint;
mod exact;
mod gibbs;
mod train;

pub use checkpoint::{load_params, read_params, save_params, write_params, CHECKPOINT_MAGIC, CHECKPOINT_VERSION};
pub use exact::{
    exact_distribution, exact_kl, exact_log_partition, exact_partition, ENUMERATION_LIMIT,
};
pub use gibbs::{gibbs_chain, gibbs_sample, GibbsChainState, GibbsSampler};
pub use train::{
    cd_gradient, gradients, train, Evaluation, Evaluator, TraceRow, TrainingConfig,
    TrainingOutcome, TrainingStatus,
};

use rand_distr::{Distribution, Normal};

use crate::basis::HilbertSpace;
use crate::error::{Error, Result};
use crate::rng;

/// Standard deviation of the initial weights.
pub const INIT_WEIGHT_STD: f64 = 0.01;

/// `ln(1 + eˣ)` without overflow.
pub fn softplus(x: f64) -> f64 {
    if x > 0.0 {
        x + (-x).exp().ln_1p()
    } else {
        x.exp().ln_1p()
    }
}

/// `1/(1 + e⁻ˣ)` without overflow.
pub fn logistic(x: f64) -> f64 {
    if x >= 0.0 {
        1.0 / (1.0 + (-x).exp())
    } else {
        let e = x.exp();
        e / (1.0 + e)
    }
}

/// Parameters `λ = (W, b, c)`, row-major `W[N][n_h][D]`, `b[N][D]`, `c[n_h]`.
///
/// Also used as the container for parameter-shaped gradients.
#[derive(Clone, Debug, PartialEq)]
pub struct RbmParameters {
    n_sites: usize,
    ell_max: u32,
    local_dim: usize,
    n_hidden: usize,
    pub weights: Vec<f64>,
    pub visible_bias: Vec<f64>,
    pub hidden_bias: Vec<f64>,
}

impl RbmParameters {
    pub fn zeros(space: &HilbertSpace, n_hidden: usize) -> Self {
        let (n, d) = (space.n_sites(), space.local_dim());
        Self {
            n_sites: n,
            ell_max: space.ell_max(),
            local_dim: d,
            n_hidden,
            weights: vec![0.0; n * n_hidden * d],
            visible_bias: vec![0.0; n * d],
            hidden_bias: vec![0.0; n_hidden],
        }
    }

    /// `W ~ Normal(0, 0.01²)`, `b = c = 0`.
    pub fn random(space: &HilbertSpace, n_hidden: usize, seed: u64) -> Self {
        let mut p = Self::zeros(space, n_hidden);
        let normal = Normal::new(0.0, INIT_WEIGHT_STD).expect("valid normal");
        let mut rng = rng::seeded(seed);
        for w in p.weights.iter_mut() {
            *w = normal.sample(&mut rng);
        }
        p
    }

    pub fn from_parts(
        space: &HilbertSpace,
        n_hidden: usize,
        weights: Vec<f64>,
        visible_bias: Vec<f64>,
        hidden_bias: Vec<f64>,
    ) -> Result<Self> {
        let mut p = Self::zeros(space, n_hidden);
        let check = |name: &str, want: usize, got: usize| {
            if want != got {
                Err(Error::Domain(format!("{name} has {got} entries, expected {want}")))
            } else {
                Ok(())
            }
        };
        check("weights", p.weights.len(), weights.len())?;
        check("visible_bias", p.visible_bias.len(), visible_bias.len())?;
        check("hidden_bias", p.hidden_bias.len(), hidden_bias.len())?;
        p.weights = weights;
        p.visible_bias = visible_bias;
        p.hidden_bias = hidden_bias;
        Ok(p)
    }

    /// Same shape, all zeros.
    pub fn zeros_like(&self) -> Self {
        Self {
            weights: vec![0.0; self.weights.len()],
            visible_bias: vec![0.0; self.visible_bias.len()],
            hidden_bias: vec![0.0; self.hidden_bias.len()],
            ..self.clone()
        }
    }

    pub fn n_sites(&self) -> usize {
        self.n_sites
    }

    pub fn ell_max(&self) -> u32 {
        self.ell_max
    }

    pub fn local_dim(&self) -> usize {
        self.local_dim
    }

    pub fn n_hidden(&self) -> usize {
        self.n_hidden
    }

    pub fn space(&self) -> HilbertSpace {
        HilbertSpace::new(self.n_sites, self.ell_max).expect("validated at construction")
    }

    #[inline]
    pub fn w_index(&self, site: usize, hidden: usize, d: usize) -> usize {
        (site * self.n_hidden + hidden) * self.local_dim + d
    }

    #[inline]
    pub fn w(&self, site: usize, hidden: usize, d: usize) -> f64 {
        self.weights[self.w_index(site, hidden, d)]
    }

    #[inline]
    pub fn b(&self, site: usize, d: usize) -> f64 {
        self.visible_bias[site * self.local_dim + d]
    }

    pub fn is_finite(&self) -> bool {
        self.weights
            .iter()
            .chain(&self.visible_bias)
            .chain(&self.hidden_bias)
            .all(|v| v.is_finite())
    }

    fn check_config(&self, sigmas: &[u32]) {
        debug_assert_eq!(sigmas.len(), self.n_sites);
        debug_assert!(sigmas.iter().all(|&s| (s as usize) < self.local_dim));
    }

    /// Hidden pre-activations `θ_j = c_j + Σ_i W[i][j][σᵢ]` into `out`.
    pub fn hidden_field_into(&self, sigmas: &[u32], out: &mut [f64]) {
        self.check_config(sigmas);
        out.copy_from_slice(&self.hidden_bias);
        for (i, &s) in sigmas.iter().enumerate() {
            for (j, o) in out.iter_mut().enumerate() {
                *o += self.w(i, j, s as usize);
            }
        }
    }

    pub fn hidden_field(&self, sigmas: &[u32]) -> Vec<f64> {
        let mut out = vec![0.0; self.n_hidden];
        self.hidden_field_into(sigmas, &mut out);
        out
    }

    /// `−Σᵢ b[i][σᵢ]`
    pub fn visible_term(&self, sigmas: &[u32]) -> f64 {
        -sigmas.iter().enumerate().map(|(i, &s)| self.b(i, s as usize)).sum::<f64>()
    }

    /// `ℰ(σ)`.
    pub fn effective_energy(&self, sigmas: &[u32]) -> f64 {
        let field = self.hidden_field(sigmas);
        self.visible_term(sigmas) - field.iter().map(|&t| softplus(t)).sum::<f64>()
    }

    /// `ℰ` of an arbitrary binary tensor `σ[N][D]` (need not be one-hot).
    pub fn effective_energy_one_hot(&self, one_hot: &[u8]) -> Result<f64> {
        let nd = self.n_sites * self.local_dim;
        if one_hot.len() != nd {
            return Err(Error::DimensionMismatch { expected: nd, found: one_hot.len() });
        }
        let mut e = 0.0;
        let mut field = self.hidden_bias.clone();
        for i in 0..self.n_sites {
            for d in 0..self.local_dim {
                if one_hot[i * self.local_dim + d] != 0 {
                    e -= self.b(i, d);
                    for (j, f) in field.iter_mut().enumerate() {
                        *f += self.w(i, j, d);
                    }
                }
            }
        }
        Ok(e - field.iter().map(|&t| softplus(t)).sum::<f64>())
    }

    /// `ψ̃(σ) = e^{−ℰ(σ)/2}`.
    pub fn unnormalized_psi(&self, sigmas: &[u32]) -> f64 {
        (-0.5 * self.effective_energy(sigmas)).exp()
    }

    /// `p(h_j = 1 | σ)`.
    pub fn conditional_hidden(&self, sigmas: &[u32]) -> Vec<f64> {
        self.hidden_field(sigmas).into_iter().map(logistic).collect()
    }

    /// Per-site softmax `p(σᵢ = d | h)`, row-major `[N][D]`.
    pub fn conditional_visible(&self, hidden: &[u8]) -> Vec<f64> {
        let mut out = vec![0.0; self.n_sites * self.local_dim];
        for i in 0..self.n_sites {
            let row = &mut out[i * self.local_dim..(i + 1) * self.local_dim];
            self.visible_logits_into(i, hidden, row);
            softmax_in_place(row);
        }
        out
    }

    /// `b[i][d] + Σ_j W[i][j][d] h_j` for all `d`.
    pub(crate) fn visible_logits_into(&self, site: usize, hidden: &[u8], out: &mut [f64]) {
        let d = self.local_dim;
        out.copy_from_slice(&self.visible_bias[site * d..(site + 1) * d]);
        for (j, &hj) in hidden.iter().enumerate() {
            if hj != 0 {
                let base = self.w_index(site, j, 0);
                for (o, w) in out.iter_mut().zip(&self.weights[base..base + d]) {
                    *o += w;
                }
            }
        }
    }

    /// `λ ← λ − η·g`.
    pub fn step(&mut self, grad: &RbmParameters, learning_rate: f64) {
        let pairs = [
            (&mut self.weights, &grad.weights),
            (&mut self.visible_bias, &grad.visible_bias),
            (&mut self.hidden_bias, &grad.hidden_bias),
        ];
        for (p, g) in pairs {
            for (pi, gi) in p.iter_mut().zip(g.iter()) {
                *pi -= learning_rate * gi;
            }
        }
    }

    /// All parameters in `W, b, c` order.
    pub fn flat(&self) -> Vec<f64> {
        let mut v = self.weights.clone();
        v.extend_from_slice(&self.visible_bias);
        v.extend_from_slice(&self.hidden_bias);
        v
    }

    pub fn flat_mut(&mut self, k: usize) -> &mut f64 {
        let (nw, nb) = (self.weights.len(), self.visible_bias.len());
        if k < nw {
            &mut self.weights[k]
        } else if k < nw + nb {
            &mut self.visible_bias[k - nw]
        } else {
            &mut self.hidden_bias[k - nw - nb]
        }
    }

    pub fn n_params(&self) -> usize {
        self.weights.len() + self.visible_bias.len() + self.hidden_bias.len()
    }
}

pub(crate) fn softmax_in_place(row: &mut [f64]) {
    let max = row.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    let mut sum = 0.0;
    for v in row.iter_mut() {
        *v = (*v - max).exp();
        sum += *v;
    }
    for v in row.iter_mut() {
        *v /= sum;
    }
}
