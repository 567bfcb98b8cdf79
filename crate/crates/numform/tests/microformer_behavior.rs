//! Behavioral contracts of the miniature transformer: gradient
//! correctness against finite differences, masking, determinism, and
//! checkpoint fidelity.

use numform::microformer::{
    batched_greedy_decode, build_vocabulary, gradient_check, greedy_decode, load_checkpoint,
    save_checkpoint, train, CheckpointMeta, Microformer, ModelConfig, ModelError, PositionMode,
    TargetPositionMode, TrainConfig,
};
use numform::microformer as mf;
use numform::orthography::{OrthographySpec, Scheme};
use numform::taskgen::{exhaustive_pairs, Example, Operation};

fn char_spec() -> OrthographySpec {
    OrthographySpec::new(Scheme::Character)
}

fn small_examples() -> Vec<Example> {
    exhaustive_pairs(10, 24, Operation::Plus, &char_spec()).unwrap()
}

fn tiny_config(examples: &[Example]) -> ModelConfig {
    let vocab = build_vocabulary(examples, 512).unwrap();
    ModelConfig::new(char_spec(), vocab)
        .with_layers(1, 1)
        .with_width(16, 2, 32)
        .with_position_mode(PositionMode::PosMasked)
        .with_target_position_mode(TargetPositionMode::NoTgt)
}

fn batch_of<A: mf::Real>(
    examples: &[Example],
    config: &ModelConfig,
    take: usize,
    training: bool,
) -> mf::Batch<A> {
    let encoded: Vec<mf::EncodedExample> = examples
        .iter()
        .take(take)
        .map(|e| mf::encode_example(&e.question, &e.answer, config).unwrap())
        .collect();
    let refs: Vec<&mf::EncodedExample> = encoded.iter().collect();
    mf::build_batch(&refs, config, training).unwrap()
}

#[test]
fn analytic_gradients_match_finite_differences() {
    let examples = small_examples();
    let config = tiny_config(&examples);
    let mut model: Microformer<f64> = Microformer::new(config.clone(), 11).unwrap();
    let batch = batch_of::<f64>(&examples, &config, 4, true);

    let report = gradient_check(&mut model, &batch, 5, 1e-5, 99);
    assert!(report.checked >= 200, "only {} entries sampled", report.checked);
    assert!(
        report.max_rel_error < 1e-4,
        "max relative error {} (per group: {:?})",
        report.max_rel_error,
        report.per_group
    );
    // every parameter group is represented and within threshold
    for group in ["embedding", "attention", "feedforward", "layer_norm", "output"] {
        let worst = report.per_group.get(group).copied().unwrap_or(f64::NAN);
        assert!(worst < 1e-4, "group {group}: {worst}");
    }
}

#[test]
fn finite_difference_error_shrinks_with_the_step() {
    let examples = small_examples();
    let config = tiny_config(&examples);
    let mut model: Microformer<f64> = Microformer::new(config.clone(), 3).unwrap();
    let batch = batch_of::<f64>(&examples, &config, 2, true);

    let coarse = gradient_check(&mut model, &batch, 3, 1e-3, 7);
    let fine = gradient_check(&mut model, &batch, 3, 1e-5, 7);
    assert!(
        fine.max_rel_error < coarse.max_rel_error,
        "coarse {} vs fine {}",
        coarse.max_rel_error,
        fine.max_rel_error
    );
}

#[test]
fn gradient_check_with_target_positions_enabled() {
    let examples = small_examples();
    let config = tiny_config(&examples).with_target_position_mode(TargetPositionMode::WithTgt);
    let mut model: Microformer<f64> = Microformer::new(config.clone(), 5).unwrap();
    let batch = batch_of::<f64>(&examples, &config, 3, true);
    let report = gradient_check(&mut model, &batch, 3, 1e-5, 1);
    assert!(report.max_rel_error < 1e-4, "{}", report.max_rel_error);
}

#[test]
fn logits_cover_target_positions_by_vocabulary() {
    let examples = small_examples();
    let config = tiny_config(&examples);
    let model: Microformer<f32> = Microformer::new(config.clone(), 1).unwrap();
    let batch = batch_of::<f32>(&examples, &config, 3, true);
    let (logits, _) = model.forward(&batch);
    assert_eq!(logits.nrows(), batch.b * batch.lt);
    assert_eq!(logits.ncols(), config.vocabulary.len());
}

#[test]
fn extra_source_padding_leaves_logits_unchanged() {
    let examples = small_examples();
    let config = tiny_config(&examples);
    let model: Microformer<f64> = Microformer::new(config.clone(), 2).unwrap();

    // alone: no padding
    let alone = batch_of::<f64>(&examples[..1].to_vec(), &config, 1, true);
    let (logits_alone, _) = model.forward(&alone);

    // paired with a longer question, the first example gains pad tokens
    let mut pair = vec![examples[0].clone()];
    let longer = exhaustive_pairs(100, 100, Operation::Plus, &char_spec()).unwrap();
    pair.push(longer[0].clone());
    let padded = batch_of::<f64>(&pair, &config, 2, true);
    assert!(padded.ls > alone.ls, "second example must force padding");
    let (logits_padded, _) = model.forward(&padded);

    for p in 0..alone.lt {
        for v in 0..config.vocabulary.len() {
            let a = logits_alone[[p, v]];
            let b = logits_padded[[p, v]];
            assert!((a - b).abs() < 1e-9, "logit ({p},{v}) drifted: {a} vs {b}");
        }
    }
}

#[test]
fn doubling_the_output_head_doubles_logits() {
    let examples = small_examples();
    let config = tiny_config(&examples);
    let mut model: Microformer<f64> = Microformer::new(config.clone(), 4).unwrap();
    let batch = batch_of::<f64>(&examples, &config, 2, true);
    let (before, _) = model.forward(&batch);
    model.for_each_param(&mut |name, p| {
        if name.starts_with("output") {
            p.value.mapv_inplace(|x| x * 2.0);
        }
    });
    let (after, _) = model.forward(&batch);
    for (a, b) in before.iter().zip(after.iter()) {
        assert!((2.0 * a - b).abs() < 1e-12);
    }
}

#[test]
fn same_seed_same_model_same_logits() {
    let examples = small_examples();
    let config = tiny_config(&examples);
    let m1: Microformer<f32> = Microformer::new(config.clone(), 42).unwrap();
    let m2: Microformer<f32> = Microformer::new(config.clone(), 42).unwrap();
    let batch = batch_of::<f32>(&examples, &config, 4, true);
    let (l1, _) = m1.forward(&batch);
    let (l2, _) = m2.forward(&batch);
    assert_eq!(l1, l2);
    let m3: Microformer<f32> = Microformer::new(config, 43).unwrap();
    let (l3, _) = m3.forward(&batch);
    assert_ne!(l1, l3);
}

#[test]
fn one_epoch_of_training_reduces_the_training_loss() {
    let examples = small_examples();
    let config = tiny_config(&examples);
    let train_cfg = TrainConfig {
        epochs: 1,
        batch_size: 1,
        seed: 9,
        eval_every: 1,
        ..TrainConfig::default()
    };

    let baseline: Microformer<f32> = Microformer::new(config.clone(), 9).unwrap();
    let full = batch_of::<f32>(&examples, &config, examples.len(), true);
    let loss_before = baseline.loss(&full);

    let outcome = train::<f32>(config, &train_cfg, &examples, &examples[..20]).unwrap();
    let loss_after = outcome.model.loss(&full);
    assert!(
        loss_after < loss_before,
        "loss did not improve: {loss_before} -> {loss_after}"
    );
    assert_eq!(outcome.log.len(), 1);
    assert!(outcome.log[0].dev_accuracy.is_some());
}

#[test]
fn training_is_bit_reproducible() {
    let examples = small_examples();
    let config = tiny_config(&examples);
    let train_cfg = TrainConfig { epochs: 2, batch_size: 4, seed: 17, ..TrainConfig::default() };
    let mut a = train::<f32>(config.clone(), &train_cfg, &examples[..40], &examples[40..48])
        .unwrap();
    let mut b = train::<f32>(config, &train_cfg, &examples[..40], &examples[40..48]).unwrap();
    assert_eq!(a.log, b.log);
    let mut params_a = Vec::new();
    a.model.for_each_param(&mut |_, p| params_a.push(p.value.clone()));
    let mut i = 0;
    b.model.for_each_param(&mut |_, p| {
        assert_eq!(p.value, params_a[i]);
        i += 1;
    });
}

#[test]
fn divergent_loss_aborts_with_a_diagnostic() {
    let examples = small_examples();
    let config = tiny_config(&examples);
    let train_cfg = TrainConfig { epochs: 3, batch_size: 2, seed: 1, ..TrainConfig::default() };
    // poison one parameter; the first batch loss goes non-finite
    let mut model: Microformer<f32> = Microformer::new(config, 1).unwrap();
    model.for_each_param(&mut |name, p| {
        if name == "output.bias" {
            p.value[[0, 0]] = f32::NAN;
        }
    });
    match mf::train_from(model, &train_cfg, &examples[..16], &[]) {
        Err(ModelError::Divergence { epoch: 1, .. }) => {}
        Ok(_) => panic!("expected divergence"),
        Err(e) => panic!("unexpected error: {e}"),
    }
}

#[test]
fn checkpoints_reproduce_logits_bit_for_bit() {
    let examples = small_examples();
    let config = tiny_config(&examples);
    let train_cfg = TrainConfig { epochs: 1, batch_size: 4, seed: 5, ..TrainConfig::default() };
    let mut outcome =
        train::<f32>(config.clone(), &train_cfg, &examples[..30], &examples[30..36]).unwrap();

    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("model.ckpt");
    let meta = CheckpointMeta {
        epoch: outcome.best_epoch,
        dev_accuracy: outcome.best_dev_accuracy,
        optimizer: mf::OptimizerState::adam(outcome.optimizer_steps, train_cfg.learning_rate),
    };
    save_checkpoint(&mut outcome.model, &meta, &path).unwrap();

    let (reloaded, meta2): (Microformer<f32>, _) = load_checkpoint(&path).unwrap();
    assert_eq!(meta, meta2);

    let batch = batch_of::<f32>(&examples, &config, 5, true);
    let (l1, _) = outcome.model.forward(&batch);
    let (l2, _) = reloaded.forward(&batch);
    assert!(l1.iter().zip(l2.iter()).all(|(a, b)| a.to_bits() == b.to_bits()));

    // precision mismatch is refused
    assert!(matches!(
        load_checkpoint::<f64>(&path),
        Err(ModelError::CheckpointFormat(_))
    ));
}

#[test]
fn greedy_decode_is_deterministic_and_respects_eos() {
    let examples = small_examples();
    let config = tiny_config(&examples);
    let model: Microformer<f32> = Microformer::new(config, 77).unwrap();
    let q = &examples[0].question;
    let a = greedy_decode(&model, q, 10).unwrap();
    let b = greedy_decode(&model, q, 10).unwrap();
    assert_eq!(a, b);
    assert!(a.tokens.len() <= 10);
    if a.truncated {
        assert_eq!(a.tokens.len(), 10);
    }
    // shrinking the budget forces truncation reporting
    let c = greedy_decode(&model, q, 1).unwrap();
    assert!(c.tokens.len() <= 1);
    assert!(c.truncated || c.tokens.is_empty());
}

#[test]
fn decode_ignores_the_target_position_mode_at_inference() {
    let examples = small_examples();
    let config = tiny_config(&examples);
    let with_cfg = config.clone().with_target_position_mode(TargetPositionMode::WithTgt);
    let no_cfg = config.with_target_position_mode(TargetPositionMode::NoTgt);
    // identical parameters, only the mode flag differs
    let m_with: Microformer<f32> = Microformer::new(with_cfg, 13).unwrap();
    let m_no: Microformer<f32> = Microformer::new(no_cfg, 13).unwrap();
    for e in examples.iter().take(5) {
        let a = greedy_decode(&m_with, &e.question, 8).unwrap();
        let b = greedy_decode(&m_no, &e.question, 8).unwrap();
        assert_eq!(a, b, "inference consumed target digit positions");
    }
}

#[test]
fn batched_and_single_decoding_agree() {
    let examples = small_examples();
    let config = tiny_config(&examples);
    let model: Microformer<f32> = Microformer::new(config.clone(), 21).unwrap();
    let encoded: Vec<mf::EncodedExample> = examples
        .iter()
        .take(6)
        .map(|e| mf::encode_example(&e.question, &e.answer, &config).unwrap())
        .collect();
    let refs: Vec<&mf::EncodedExample> = encoded.iter().collect();
    let batched = batched_greedy_decode(&model, &refs, 8).unwrap();
    for (e, outcome) in examples.iter().take(6).zip(&batched) {
        let single = greedy_decode(&model, &e.question, 8).unwrap();
        assert_eq!(&single, outcome);
    }
}

#[test]
fn out_of_vocabulary_tokens_are_named_in_the_error() {
    let examples = small_examples();
    let config = tiny_config(&examples);
    let err = mf::encode_example("What is banana plus 1 2 ?", "", &config).unwrap_err();
    assert_eq!(err, ModelError::OutOfVocabulary("banana".into()));
}

#[test]
fn oversized_vocabularies_are_rejected() {
    let examples = exhaustive_pairs(10, 40, Operation::Plus, &OrthographySpec::new(Scheme::Decimal))
        .unwrap();
    let err = build_vocabulary(&examples, 50).unwrap_err();
    assert!(matches!(err, ModelError::VocabularyOverflow { .. }));
    // the bounded character vocabulary fits comfortably
    let char_examples = small_examples();
    assert!(build_vocabulary(&char_examples, 50).is_ok());
}

#[test]
fn width_must_cover_the_longest_number() {
    let examples = small_examples();
    let vocab = build_vocabulary(&examples, 512).unwrap();
    // width 1 cannot slice a 2-digit number
    let config = ModelConfig::new(char_spec(), vocab).with_width(1, 1, 4);
    let model: Microformer<f32> = Microformer::new(config.clone(), 0).unwrap();
    let encoded = mf::encode_example(&examples[0].question, &examples[0].answer, &config).unwrap();
    let err = mf::build_batch::<f32>(&[&encoded], &config, true).unwrap_err();
    assert!(matches!(err, ModelError::NumberTooLongForWidth { digits: 2, width: 1 }));
    drop(model);
}
