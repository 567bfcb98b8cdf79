//! Teacher-forced training with Adam, plus the finite-difference
//! gradient checker that keeps the hand-written backward pass honest.

use super::data::{build_batch, encode_examples, Batch, EncodedExample};
use super::decoding::dataset_accuracy;
use super::model::Microformer;
use super::param::uniform01;
use super::{ModelConfig, ModelError, Real};
use crate::taskgen::Example;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};
use std::collections::BTreeMap;

/// Optimization settings. The defaults follow the small-transformer
/// protocol: 55 epochs at learning rate 1e-5 over a 9:1 split.
#[derive(Clone, PartialEq, Debug, Serialize, Deserialize)]
pub struct TrainConfig {
    pub epochs: usize,
    pub learning_rate: f64,
    pub batch_size: usize,
    pub seed: u64,
    /// Global-norm clip guarding against divergence; `None` disables.
    pub grad_clip: Option<f64>,
    /// Evaluate dev accuracy every this many epochs (and always on the
    /// last epoch).
    pub eval_every: usize,
    /// Reject datasets whose vocabulary exceeds this.
    pub vocab_limit: usize,
}

impl Default for TrainConfig {
    fn default() -> Self {
        TrainConfig {
            epochs: 55,
            learning_rate: 1e-5,
            batch_size: 8,
            seed: 0,
            grad_clip: Some(1.0),
            eval_every: 5,
            vocab_limit: 512,
        }
    }
}

#[derive(Clone, Copy, PartialEq, Debug, Serialize)]
pub struct EpochStat {
    pub epoch: usize,
    pub train_loss: f64,
    pub dev_accuracy: Option<f64>,
}

pub struct TrainOutcome<A: Real> {
    /// The best-dev snapshot, not the final-epoch parameters.
    pub model: Microformer<A>,
    pub log: Vec<EpochStat>,
    pub best_dev_accuracy: f64,
    pub best_epoch: usize,
    /// Adam step count at the end of training.
    pub optimizer_steps: u64,
}

/// Shuffles deterministically and splits 9:1 into (train, dev).
pub fn split_nine_to_one(examples: &[Example], seed: u64) -> (Vec<Example>, Vec<Example>) {
    let mut order: Vec<usize> = (0..examples.len()).collect();
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    shuffle(&mut order, &mut rng);
    let cut = examples.len() * 9 / 10;
    let train = order[..cut].iter().map(|&i| examples[i].clone()).collect();
    let dev = order[cut..].iter().map(|&i| examples[i].clone()).collect();
    (train, dev)
}

fn shuffle(indices: &mut [usize], rng: &mut ChaCha8Rng) {
    for i in (1..indices.len()).rev() {
        let j = (uniform01(rng) * (i + 1) as f64) as usize;
        indices.swap(i, j.min(i));
    }
}

struct Adam {
    lr: f64,
    beta1: f64,
    beta2: f64,
    eps: f64,
    t: u64,
}

impl Adam {
    fn new(lr: f64) -> Self {
        Adam { lr, beta1: 0.9, beta2: 0.999, eps: 1e-8, t: 0 }
    }

    fn step<A: Real>(&mut self, model: &mut Microformer<A>, grad_clip: Option<f64>) {
        if let Some(clip) = grad_clip {
            let mut sq = 0.0;
            model.for_each_param(&mut |_, p| sq += p.grad_sq_sum());
            let norm = sq.sqrt();
            if norm > clip {
                let scale = clip / norm;
                model.for_each_param(&mut |_, p| p.scale_grad(scale));
            }
        }
        self.t += 1;
        let (lr, b1, b2, eps, t) = (self.lr, self.beta1, self.beta2, self.eps, self.t);
        model.for_each_param(&mut |_, p| p.adam_step(lr, b1, b2, eps, t));
    }
}

/// Trains a fresh model and returns the best-dev checkpointed outcome.
/// Deterministic for a given `(model_cfg, train_cfg, data)`.
pub fn train<A: Real>(
    model_cfg: ModelConfig,
    train_cfg: &TrainConfig,
    train_set: &[Example],
    dev_set: &[Example],
) -> Result<TrainOutcome<A>, ModelError> {
    let model: Microformer<A> = Microformer::new(model_cfg, train_cfg.seed)?;
    train_from(model, train_cfg, train_set, dev_set)
}

/// Same as [`train`] but continues from an existing model.
pub fn train_from<A: Real>(
    mut model: Microformer<A>,
    train_cfg: &TrainConfig,
    train_set: &[Example],
    dev_set: &[Example],
) -> Result<TrainOutcome<A>, ModelError> {
    if model.config.vocabulary.len() > train_cfg.vocab_limit {
        return Err(ModelError::VocabularyOverflow {
            size: model.config.vocabulary.len(),
            limit: train_cfg.vocab_limit,
        });
    }
    let train_enc = encode_examples(train_set, &model.config)?;
    let dev_enc = encode_examples(dev_set, &model.config)?;

    let mut adam = Adam::new(train_cfg.learning_rate);
    let mut order: Vec<usize> = (0..train_enc.len()).collect();
    let mut rng = ChaCha8Rng::seed_from_u64(train_cfg.seed.wrapping_add(1));

    let mut log = Vec::with_capacity(train_cfg.epochs);
    let mut best_dev = f64::NEG_INFINITY;
    let mut best_epoch = 0;
    let mut best_snapshot: Option<Microformer<A>> = None;

    for epoch in 1..=train_cfg.epochs {
        shuffle(&mut order, &mut rng);
        let mut epoch_loss = 0.0;
        let mut batches = 0usize;
        for chunk in order.chunks(train_cfg.batch_size) {
            let items: Vec<&EncodedExample> = chunk.iter().map(|&i| &train_enc[i]).collect();
            let batch: Batch<A> = build_batch(&items, &model.config, true)?;
            model.zero_grads();
            let loss = model.loss_and_grads(&batch);
            if !loss.is_finite() {
                return Err(ModelError::Divergence { epoch, loss });
            }
            adam.step(&mut model, train_cfg.grad_clip);
            epoch_loss += loss;
            batches += 1;
        }
        let train_loss = epoch_loss / batches.max(1) as f64;

        let dev_accuracy = if !dev_enc.is_empty()
            && (epoch % train_cfg.eval_every == 0 || epoch == train_cfg.epochs)
        {
            Some(dataset_accuracy(&model, &dev_enc)?)
        } else {
            None
        };
        if let Some(acc) = dev_accuracy {
            if acc >= best_dev {
                best_dev = acc;
                best_epoch = epoch;
                best_snapshot = Some(clone_model(&mut model)?);
            }
        }
        log.push(EpochStat { epoch, train_loss, dev_accuracy });
    }

    let best_dev_accuracy = if best_dev.is_finite() { best_dev } else { 0.0 };
    let model = match best_snapshot {
        Some(snapshot) => snapshot,
        None => model,
    };
    Ok(TrainOutcome { model, log, best_dev_accuracy, best_epoch, optimizer_steps: adam.t })
}

/// Deep copy via the parameter visitor, so snapshots and checkpoints
/// share one code path.
fn clone_model<A: Real>(model: &mut Microformer<A>) -> Result<Microformer<A>, ModelError> {
    let mut copy = Microformer::new(model.config.clone(), 0)?;
    let mut tensors: BTreeMap<String, super::param::Param<A>> = BTreeMap::new();
    model.for_each_param(&mut |name, p| {
        tensors.insert(name.to_owned(), p.clone());
    });
    copy.for_each_param(&mut |name, p| {
        *p = tensors.remove(name).expect("identical parameter sets");
    });
    Ok(copy)
}

/// Training-log CSV: `epoch,train_loss,dev_accuracy` with empty cells
/// for epochs that skipped evaluation.
pub fn training_log_csv(log: &[EpochStat]) -> String {
    let mut out = String::from("epoch,train_loss,dev_accuracy\n");
    for s in log {
        match s.dev_accuracy {
            Some(acc) => out.push_str(&format!("{},{},{}\n", s.epoch, s.train_loss, acc)),
            None => out.push_str(&format!("{},{},\n", s.epoch, s.train_loss)),
        }
    }
    out
}

#[derive(Clone, Debug)]
pub struct GradCheckReport {
    pub max_rel_error: f64,
    pub checked: usize,
    /// Worst relative error per parameter-group prefix (embedding,
    /// attention, feedforward, layer norm, output head).
    pub per_group: BTreeMap<String, f64>,
}

/// Compares analytic gradients with central finite differences at step
/// `h`, sampling `per_tensor` entries from every parameter tensor.
/// Run this with `A = f64`; truncation plus roundoff at f32 would
/// swamp the comparison.
pub fn gradient_check<A: Real>(
    model: &mut Microformer<A>,
    batch: &Batch<A>,
    per_tensor: usize,
    h: f64,
    seed: u64,
) -> GradCheckReport {
    model.zero_grads();
    model.loss_and_grads(batch);

    let mut analytic: Vec<(String, Vec<(usize, usize)>, Vec<f64>)> = Vec::new();
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    model.for_each_param(&mut |name, p| {
        let (rows, cols) = p.grad.dim();
        let total = rows * cols;
        let take = per_tensor.min(total);
        let mut picks = Vec::with_capacity(take);
        let mut seen = std::collections::BTreeSet::new();
        while picks.len() < take {
            let flat = (uniform01(&mut rng) * total as f64) as usize % total;
            if seen.insert(flat) {
                picks.push((flat / cols, flat % cols));
            }
        }
        let grads = picks.iter().map(|&(r, c)| p.grad[[r, c]].as_f64()).collect();
        analytic.push((name.to_owned(), picks, grads));
    });

    let mut max_rel = 0.0f64;
    let mut checked = 0usize;
    let mut per_group: BTreeMap<String, f64> = BTreeMap::new();
    for (name, picks, grads) in &analytic {
        for (&(r, c), &g) in picks.iter().zip(grads) {
            let mut loss_at = |delta: f64| -> f64 {
                let mut old = A::zero();
                model.for_each_param(&mut |n, p| {
                    if n == name {
                        old = p.value[[r, c]];
                        p.value[[r, c]] = old + A::fr(delta);
                    }
                });
                let loss = model.loss(batch);
                model.for_each_param(&mut |n, p| {
                    if n == name {
                        p.value[[r, c]] = old;
                    }
                });
                loss
            };
            let numeric = (loss_at(h) - loss_at(-h)) / (2.0 * h);
            let rel = (g - numeric).abs() / (g.abs() + numeric.abs()).max(1e-6);
            checked += 1;
            max_rel = max_rel.max(rel);
            let group = group_of(name);
            let entry = per_group.entry(group).or_insert(0.0);
            *entry = entry.max(rel);
        }
    }

    GradCheckReport { max_rel_error: max_rel, checked, per_group }
}

fn group_of(name: &str) -> String {
    if name == "embedding" {
        "embedding".into()
    } else if name.starts_with("output") {
        "output".into()
    } else if name.contains("attn") {
        "attention".into()
    } else if name.contains(".ff.") {
        "feedforward".into()
    } else {
        "layer_norm".into()
    }
}
