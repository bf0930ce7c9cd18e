//! Contrastive-divergence training by plain stochastic gradient descent.
//!
//! The KL gradient is estimated as `⟨∇ℰ⟩_P − ⟨∇ℰ⟩_Γ`: the positive phase
//! averages over a data mini-batch `P`, the negative phase over `|Γ|`
//! block-Gibbs chains that start from the first `|Γ|` samples of that same
//! mini-batch and run `k` alternations. With
//!
//! ```text
//! ∂ℰ/∂W[i][j][d] = −p(h_j=1|σ)·σ[i][d],  ∂ℰ/∂c[j] = −p(h_j=1|σ),  ∂ℰ/∂b[i][d] = −σ[i][d]
//! ```

use rand::seq::SliceRandom;
use serde::{Deserialize, Serialize};

use super::gibbs::{GibbsChainState, GibbsSampler};
use super::{logistic, RbmParameters};
use crate::basis::RotorConfiguration;
use crate::error::{Error, Result};
use crate::rng;

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct TrainingConfig {
    pub learning_rate: f64,
    pub positive_batch: usize,
    pub negative_batch: usize,
    pub gibbs_k: usize,
    pub max_epochs: usize,
    /// Epochs between evaluations.
    pub eval_interval: usize,
    pub eval_samples: usize,
    pub eval_gibbs_steps: usize,
    pub seed: u64,
    /// Training stops at the first evaluation with `δ ≤ target_delta`. An
    /// infinite target disables early stopping.
    pub target_delta: f64,
}

impl Default for TrainingConfig {
    fn default() -> Self {
        Self {
            learning_rate: 0.001,
            positive_batch: 20,
            negative_batch: 10,
            gibbs_k: 10,
            max_epochs: 2000,
            eval_interval: 1,
            eval_samples: 10_000,
            eval_gibbs_steps: 1000,
            seed: 0,
            target_delta: 0.05,
        }
    }
}

impl TrainingConfig {
    pub fn validate(&self) -> Result<()> {
        let counts = [
            ("positive_batch", self.positive_batch),
            ("negative_batch", self.negative_batch),
            ("gibbs_k", self.gibbs_k),
            ("max_epochs", self.max_epochs),
            ("eval_interval", self.eval_interval),
            ("eval_samples", self.eval_samples),
            ("eval_gibbs_steps", self.eval_gibbs_steps),
        ];
        if let Some((name, _)) = counts.iter().find(|(_, v)| *v == 0) {
            return Err(Error::Config(format!("{name} must be at least 1")));
        }
        if !(self.learning_rate > 0.0 && self.learning_rate.is_finite()) {
            return Err(Error::Config(format!("learning_rate must be positive, got {}", self.learning_rate)));
        }
        if self.target_delta.is_nan() || self.target_delta <= 0.0 {
            return Err(Error::Config(format!("target_delta must be positive, got {}", self.target_delta)));
        }
        Ok(())
    }

    fn stops_at(&self, delta: f64) -> bool {
        self.target_delta.is_finite() && delta <= self.target_delta
    }
}

/// Result of one evaluation of the current parameters.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Evaluation {
    pub delta: f64,
    pub delta_stderr: f64,
    pub energy: f64,
    pub kinetic: f64,
    /// `⟨V⟩` without the `1/R³` factor.
    pub potential: f64,
}

pub trait Evaluator {
    fn evaluate(&mut self, params: &RbmParameters, epoch: usize) -> Result<Evaluation>;
}

impl<F> Evaluator for F
where
    F: FnMut(&RbmParameters, usize) -> Result<Evaluation>,
{
    fn evaluate(&mut self, params: &RbmParameters, epoch: usize) -> Result<Evaluation> {
        self(params, epoch)
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct TraceRow {
    pub epoch: usize,
    pub delta: f64,
    pub delta_stderr: f64,
    pub kinetic: f64,
    pub potential: f64,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum TrainingStatus {
    Reached,
    BudgetExhausted,
    Diverged,
}

#[derive(Clone, Debug)]
pub struct TrainingOutcome {
    /// Final parameters; the last finite snapshot if training diverged.
    pub params: RbmParameters,
    pub trace: Vec<TraceRow>,
    pub status: TrainingStatus,
    pub epochs_run: usize,
}

impl TrainingOutcome {
    pub fn reached(&self) -> bool {
        self.status == TrainingStatus::Reached
    }

    pub fn final_delta(&self) -> Option<f64> {
        self.trace.last().map(|r| r.delta)
    }

    /// Converts a divergence into [`Error::Divergence`].
    pub fn into_result(self) -> Result<Self> {
        if self.status == TrainingStatus::Diverged {
            return Err(Error::Divergence {
                epoch: self.epochs_run,
                message: "non-finite parameters".into(),
            });
        }
        Ok(self)
    }
}

/// Adds `weight·∇ℰ(σ)` to `grad`.
fn accumulate_energy_gradient(
    params: &RbmParameters,
    sigmas: &[u32],
    weight: f64,
    grad: &mut RbmParameters,
    field: &mut [f64],
) {
    params.hidden_field_into(sigmas, field);
    let d = params.local_dim();
    for (i, &s) in sigmas.iter().enumerate() {
        grad.visible_bias[i * d + s as usize] -= weight;
        for (j, &t) in field.iter().enumerate() {
            let idx = params.w_index(i, j, s as usize);
            grad.weights[idx] -= weight * logistic(t);
        }
    }
    for (g, &t) in grad.hidden_bias.iter_mut().zip(field.iter()) {
        *g -= weight * logistic(t);
    }
}

/// `⟨∇ℰ⟩_positive − ⟨∇ℰ⟩_negative`.
pub fn gradients(
    params: &RbmParameters,
    positive: &[RotorConfiguration],
    negative: &[RotorConfiguration],
) -> Result<RbmParameters> {
    if positive.is_empty() || negative.is_empty() {
        return Err(Error::Domain("gradient batches must be non-empty".into()));
    }
    let mut grad = params.zeros_like();
    let mut field = vec![0.0; params.n_hidden()];
    let wp = 1.0 / positive.len() as f64;
    for c in positive {
        accumulate_energy_gradient(params, c.sigmas(), wp, &mut grad, &mut field);
    }
    let wn = -1.0 / negative.len() as f64;
    for c in negative {
        accumulate_energy_gradient(params, c.sigmas(), wn, &mut grad, &mut field);
    }
    Ok(grad)
}

/// CD-k gradient for one mini-batch, written into `grad`.
fn cd_gradient_into<R: rand::Rng + ?Sized>(
    params: &RbmParameters,
    batch: &[&[u32]],
    negative_batch: usize,
    k: usize,
    rng: &mut R,
    grad: &mut RbmParameters,
    field: &mut [f64],
) {
    for v in grad.weights.iter_mut().chain(&mut grad.visible_bias).chain(&mut grad.hidden_bias) {
        *v = 0.0;
    }
    let wp = 1.0 / batch.len() as f64;
    for s in batch {
        accumulate_energy_gradient(params, s, wp, grad, field);
    }
    let mut sampler = GibbsSampler::new(params);
    let wn = -1.0 / negative_batch as f64;
    let mut state = GibbsChainState::new(batch[0].to_vec(), params.n_hidden());
    for c in 0..negative_batch {
        state.visible.copy_from_slice(batch[c % batch.len()]);
        state.steps_taken = 0;
        sampler.run(&mut state, k, rng);
        accumulate_energy_gradient(params, &state.visible, wn, grad, field);
    }
}

/// CD-k gradient with negative chains started from `batch`.
pub fn cd_gradient<R: rand::Rng + ?Sized>(
    params: &RbmParameters,
    batch: &[RotorConfiguration],
    negative_batch: usize,
    k: usize,
    rng: &mut R,
) -> Result<RbmParameters> {
    if batch.is_empty() || negative_batch == 0 {
        return Err(Error::Domain("gradient batches must be non-empty".into()));
    }
    let views: Vec<&[u32]> = batch.iter().map(|c| c.sigmas()).collect();
    let mut grad = params.zeros_like();
    let mut field = vec![0.0; params.n_hidden()];
    cd_gradient_into(params, &views, negative_batch, k.max(1), rng, &mut grad, &mut field);
    Ok(grad)
}

/// Trains from `initial` on `data` until the evaluator reports
/// `δ ≤ target_delta` or `max_epochs` epochs have run.
///
/// Each epoch shuffles the data and sweeps disjoint mini-batches of exactly
/// `positive_batch` samples (a trailing remainder is skipped; a dataset
/// smaller than one batch is used whole). Evaluation happens every
/// `eval_interval` epochs and after the final epoch.
pub fn train(
    initial: RbmParameters,
    data: &[RotorConfiguration],
    cfg: &TrainingConfig,
    evaluator: &mut dyn Evaluator,
) -> Result<TrainingOutcome> {
    cfg.validate()?;
    if data.is_empty() {
        return Err(Error::Domain("training data is empty".into()));
    }
    let space = initial.space();
    if let Some(bad) = data.iter().find(|c| !space.contains(c)) {
        return Err(Error::Domain(format!("sample {bad} does not fit the RBM visible layer")));
    }

    let mut params = initial;
    let mut rng = rng::seeded(rng::derive_seed(cfg.seed, 0x7a11));
    let mut order: Vec<usize> = (0..data.len()).collect();
    let batch_size = cfg.positive_batch.min(data.len());
    let mut grad = params.zeros_like();
    let mut field = vec![0.0; params.n_hidden()];
    let mut trace = Vec::new();
    let mut batch: Vec<&[u32]> = Vec::with_capacity(batch_size);
    let mut last_good = params.clone();

    for epoch in 1..=cfg.max_epochs {
        order.shuffle(&mut rng);
        for chunk in order.chunks_exact(batch_size) {
            batch.clear();
            batch.extend(chunk.iter().map(|&ix| data[ix].sigmas()));
            cd_gradient_into(
                &params,
                &batch,
                cfg.negative_batch,
                cfg.gibbs_k,
                &mut rng,
                &mut grad,
                &mut field,
            );
            params.step(&grad, cfg.learning_rate);
        }
        if !params.is_finite() {
            log::error!("training diverged during epoch {epoch}");
            return Ok(TrainingOutcome {
                params: last_good,
                trace,
                status: TrainingStatus::Diverged,
                epochs_run: epoch,
            });
        }
        last_good.clone_from(&params);

        if epoch % cfg.eval_interval == 0 || epoch == cfg.max_epochs {
            let ev = evaluator.evaluate(&params, epoch)?;
            log::debug!("epoch {epoch}: delta = {:.5} ± {:.5}", ev.delta, ev.delta_stderr);
            trace.push(TraceRow {
                epoch,
                delta: ev.delta,
                delta_stderr: ev.delta_stderr,
                kinetic: ev.kinetic,
                potential: ev.potential,
            });
            if cfg.stops_at(ev.delta) {
                return Ok(TrainingOutcome {
                    params,
                    trace,
                    status: TrainingStatus::Reached,
                    epochs_run: epoch,
                });
            }
        }
    }
    Ok(TrainingOutcome {
        params,
        trace,
        status: TrainingStatus::BudgetExhausted,
        epochs_run: cfg.max_epochs,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::basis::HilbertSpace;

    fn cfgs(v: &[&[u32]]) -> Vec<RotorConfiguration> {
        v.iter().map(|s| RotorConfiguration::from_sigmas(s.to_vec())).collect()
    }

    #[test]
    fn identical_batches_cancel() {
        let space = HilbertSpace::new(2, 1).unwrap();
        let p = RbmParameters::random(&space, 3, 1);
        let batch = cfgs(&[&[0, 1], &[3, 2], &[0, 0]]);
        let g = gradients(&p, &batch, &batch).unwrap();
        assert!(g.flat().iter().all(|&v| v.abs() < 1e-15));
        assert!(gradients(&p, &[], &batch).is_err());
    }

    #[test]
    fn config_validation() {
        let mut c = TrainingConfig::default();
        assert!(c.validate().is_ok());
        c.positive_batch = 0;
        assert!(c.validate().is_err());
        let c = TrainingConfig { target_delta: 0.0, ..Default::default() };
        assert!(c.validate().is_err());
        let c = TrainingConfig { learning_rate: -1.0, ..Default::default() };
        assert!(c.validate().is_err());
    }

    fn constant_eval(delta: f64) -> impl FnMut(&RbmParameters, usize) -> Result<Evaluation> {
        move |_, _| {
            Ok(Evaluation { delta, delta_stderr: 0.0, energy: 0.0, kinetic: 0.0, potential: 0.0 })
        }
    }

    #[test]
    fn infinite_target_runs_every_epoch() {
        let space = HilbertSpace::new(2, 1).unwrap();
        let data = cfgs(&[&[0, 0], &[2, 2], &[0, 0], &[1, 3]]);
        let cfg = TrainingConfig {
            max_epochs: 3,
            positive_batch: 2,
            negative_batch: 2,
            target_delta: f64::INFINITY,
            ..Default::default()
        };
        let mut ev = constant_eval(0.0);
        let out = train(RbmParameters::zeros(&space, 2), &data, &cfg, &mut ev).unwrap();
        assert_eq!(out.trace.len(), 3);
        assert_eq!(out.epochs_run, 3);
        assert_eq!(out.status, TrainingStatus::BudgetExhausted);
    }

    #[test]
    fn stops_when_target_reached() {
        let space = HilbertSpace::new(2, 1).unwrap();
        let data = cfgs(&[&[0, 0], &[2, 2]]);
        let cfg = TrainingConfig { max_epochs: 10, eval_interval: 2, ..Default::default() };
        let mut ev = constant_eval(0.01);
        let out = train(RbmParameters::zeros(&space, 2), &data, &cfg, &mut ev).unwrap();
        assert!(out.reached());
        assert_eq!(out.epochs_run, 2);
    }

    #[test]
    fn divergence_is_reported() {
        let space = HilbertSpace::new(2, 1).unwrap();
        let data = cfgs(&[&[0, 0], &[2, 2], &[1, 3], &[3, 0], &[0, 1]]);
        let cfg = TrainingConfig { max_epochs: 50, learning_rate: f64::MAX, ..Default::default() };
        let mut ev = constant_eval(1.0);
        let out = train(RbmParameters::random(&space, 2, 3), &data, &cfg, &mut ev).unwrap();
        assert_eq!(out.status, TrainingStatus::Diverged);
        assert!(out.params.is_finite());
        assert!(matches!(out.into_result(), Err(Error::Divergence { .. })));
    }

    #[test]
    fn rejects_foreign_samples() {
        let space = HilbertSpace::new(2, 1).unwrap();
        let data = cfgs(&[&[0, 7]]);
        let mut ev = constant_eval(1.0);
        let res = train(RbmParameters::zeros(&space, 2), &data, &TrainingConfig::default(), &mut ev);
        assert!(res.is_err());
    }
}
