//! Trains the miniature transformer on exhaustive two-digit addition
//! and prints the dev-accuracy curve.
//!
//! ```bash
//! cargo run --release -p numform --example train_two_digit -- \
//!     --scheme 10ebased --position-mode pos-masked --epochs 55
//! ```

use numform::microformer::{
    build_vocabulary, split_nine_to_one, train, ModelConfig, PositionMode, TargetPositionMode,
    TrainConfig,
};
use numform::orthography::{OrthographySpec, Scheme};
use numform::taskgen::{exhaustive_pairs, Operation};
use std::time::Instant;

fn arg(name: &str, default: &str) -> String {
    let args: Vec<String> = std::env::args().collect();
    args.iter()
        .position(|a| a == name)
        .and_then(|i| args.get(i + 1).cloned())
        .unwrap_or_else(|| default.to_owned())
}

fn main() {
    let scheme = match arg("--scheme", "10ebased").as_str() {
        "char" => Scheme::Character,
        "10based" | "10" => Scheme::TenBased,
        "10ebased" | "10e" => Scheme::TenEBased,
        other => panic!("unsupported scheme {other}"),
    };
    let position_mode = match arg("--position-mode", "pos-masked").as_str() {
        "pos-masked" => PositionMode::PosMasked,
        "sinusoidal" => PositionMode::Sinusoidal,
        other => panic!("unsupported position mode {other}"),
    };
    let target_mode = match arg("--target-mode", "no-tgt").as_str() {
        "no-tgt" => TargetPositionMode::NoTgt,
        "with-tgt" => TargetPositionMode::WithTgt,
        other => panic!("unsupported target mode {other}"),
    };
    let epochs: usize = arg("--epochs", "55").parse().unwrap();
    let batch: usize = arg("--batch", "8").parse().unwrap();
    let width: usize = arg("--width", "64").parse().unwrap();
    let heads: usize = arg("--heads", "4").parse().unwrap();
    let ff: usize = arg("--ff", "256").parse().unwrap();
    let seed: u64 = arg("--seed", "1").parse().unwrap();
    let eval_every: usize = arg("--eval-every", "5").parse().unwrap();

    let spec = OrthographySpec::new(scheme);
    let examples = exhaustive_pairs(10, 99, Operation::Plus, &spec).expect("generation");
    let (train_set, dev_set) = split_nine_to_one(&examples, seed);
    println!(
        "two-digit addition, {} train / {} dev, scheme {scheme:?}, {position_mode:?}/{target_mode:?}",
        train_set.len(),
        dev_set.len()
    );

    let vocab = build_vocabulary(&examples, 512).expect("vocabulary");
    let config = ModelConfig::new(spec, vocab)
        .with_width(width, heads, ff)
        .with_position_mode(position_mode)
        .with_target_position_mode(target_mode);
    let train_cfg = TrainConfig {
        epochs,
        batch_size: batch,
        seed,
        eval_every,
        ..TrainConfig::default()
    };

    let start = Instant::now();
    let outcome = train::<f32>(config, &train_cfg, &train_set, &dev_set).expect("training");
    for stat in &outcome.log {
        match stat.dev_accuracy {
            Some(acc) => println!(
                "epoch {:>3}  loss {:.4}  dev accuracy {:.3}  [{:?}]",
                stat.epoch,
                stat.train_loss,
                acc,
                start.elapsed()
            ),
            None => println!("epoch {:>3}  loss {:.4}", stat.epoch, stat.train_loss),
        }
    }
    println!(
        "best dev accuracy {:.3} at epoch {} ({:?} total)",
        outcome.best_dev_accuracy,
        outcome.best_epoch,
        start.elapsed()
    );
}
