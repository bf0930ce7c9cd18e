use rand::Rng;

use super::{logistic, RbmParameters};
use crate::basis::{one_hot, RotorConfiguration};
use crate::rng::stream_rng;

/// State of one block-Gibbs chain.
#[derive(Clone, Debug, PartialEq)]
pub struct GibbsChainState {
    /// Visible layer as flattened labels (the index of each one-hot row).
    pub visible: Vec<u32>,
    pub hidden: Vec<u8>,
    pub steps_taken: usize,
}

impl GibbsChainState {
    pub fn new(visible: Vec<u32>, n_hidden: usize) -> Self {
        Self { visible, hidden: vec![0; n_hidden], steps_taken: 0 }
    }

    /// Every site in `|0 0⟩`.
    pub fn all_zero(n_sites: usize, n_hidden: usize) -> Self {
        Self::new(vec![0; n_sites], n_hidden)
    }

    pub fn visible_one_hot(&self, local_dim: usize) -> Vec<u8> {
        one_hot(&RotorConfiguration::from_sigmas(self.visible.clone()), local_dim)
    }
}

/// Reusable scratch space for block-Gibbs updates.
#[derive(Debug)]
pub struct GibbsSampler<'a> {
    params: &'a RbmParameters,
    field: Vec<f64>,
    logits: Vec<f64>,
}

impl<'a> GibbsSampler<'a> {
    pub fn new(params: &'a RbmParameters) -> Self {
        Self { params, field: vec![0.0; params.n_hidden()], logits: vec![0.0; params.local_dim()] }
    }

    pub fn sample_hidden<R: Rng + ?Sized>(&mut self, visible: &[u32], hidden: &mut [u8], rng: &mut R) {
        self.params.hidden_field_into(visible, &mut self.field);
        for (h, &t) in hidden.iter_mut().zip(&self.field) {
            *h = u8::from(rng.random::<f64>() < logistic(t));
        }
    }

    pub fn sample_visible<R: Rng + ?Sized>(&mut self, hidden: &[u8], visible: &mut [u32], rng: &mut R) {
        for (i, v) in visible.iter_mut().enumerate() {
            self.params.visible_logits_into(i, hidden, &mut self.logits);
            let max = self.logits.iter().copied().fold(f64::NEG_INFINITY, f64::max);
            let mut total = 0.0;
            for l in self.logits.iter_mut() {
                *l = (*l - max).exp();
                total += *l;
            }
            let u = rng.random::<f64>() * total;
            let mut acc = 0.0;
            let mut pick = self.logits.len() - 1;
            for (d, &w) in self.logits.iter().enumerate() {
                acc += w;
                if u < acc {
                    pick = d;
                    break;
                }
            }
            *v = pick as u32;
        }
    }

    /// One full alternation: `h ~ p(h|σ)`, then `σ ~ p(σ|h)`.
    pub fn step<R: Rng + ?Sized>(&mut self, state: &mut GibbsChainState, rng: &mut R) {
        self.sample_hidden(&state.visible, &mut state.hidden, rng);
        self.sample_visible(&state.hidden, &mut state.visible, rng);
        state.steps_taken += 1;
    }

    pub fn run<R: Rng + ?Sized>(&mut self, state: &mut GibbsChainState, k: usize, rng: &mut R) {
        for _ in 0..k {
            self.step(state, rng);
        }
    }
}

/// Final visible states of `count` independent chains, each started from
/// `start` and advanced `k` alternations. Chain `c` draws from stream `c` of
/// `seed`, so its output does not depend on the other chains.
pub fn gibbs_sample(
    params: &RbmParameters,
    start: &GibbsChainState,
    k: usize,
    count: usize,
    seed: u64,
) -> Vec<RotorConfiguration> {
    let mut sampler = GibbsSampler::new(params);
    (0..count)
        .map(|c| {
            let mut rng = stream_rng(seed, c as u64);
            let mut state = start.clone();
            sampler.run(&mut state, k.max(1), &mut rng);
            RotorConfiguration::from_sigmas(state.visible)
        })
        .collect()
}

/// Chain `c` alone; equals entry `c` of [`gibbs_sample`].
pub fn gibbs_chain(
    params: &RbmParameters,
    start: &GibbsChainState,
    k: usize,
    seed: u64,
    chain: u64,
) -> RotorConfiguration {
    let mut rng = stream_rng(seed, chain);
    let mut state = start.clone();
    GibbsSampler::new(params).run(&mut state, k.max(1), &mut rng);
    RotorConfiguration::from_sigmas(state.visible)
}
