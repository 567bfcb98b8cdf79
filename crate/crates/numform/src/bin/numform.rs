//! Command-line front end: dataset generation, encoding/decoding,
//! evaluation, skip analysis, training, and inference as subcommands.
//! All logic lives in the library; this binary parses flags, routes
//! calls, and maps error categories to distinct exit codes.

use anyhow::{anyhow, bail, Context, Result};
use clap::{Args, Parser, Subcommand};
use numform::bignum::BigNumber;
use numform::evaluator::{
    align_predictions, analyze_position_skips, confidence_interval, evaluate, per_length_csv,
    render_table, GoldExample,
};
use numform::microformer as mf;
use numform::orthography::{decode, encode, DigitOrder, OrthographySpec, Scheme, TokenSequence};
use numform::presets;
use numform::taskgen::{
    exhaustive_pairs, generate_dataset, manifest_path, read_examples, read_predictions,
    verify_dataset, write_predictions, Dataset, DatasetManifest, Operation, PredictionRecord,
    SamplingConfig, SamplingMethod,
};
use serde::Serialize;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

/// Exit codes: 2 usage (clap), 3 invalid configuration, 4 file/io,
/// 5 malformed data, 1 anything else.
const EXIT_CONFIG: u8 = 3;
const EXIT_IO: u8 = 4;
const EXIT_DATA: u8 = 5;

#[derive(Parser)]
#[command(name = "numform", version, about = "Arithmetic seq2seq task harness")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Args, Clone)]
struct OrthographyArgs {
    /// Surface form: decimal|char|fixedchar|underscore|words|10based|10ebased
    #[arg(long, default_value = "10ebased")]
    scheme: String,
    /// Digit order: regular|inverse
    #[arg(long, default_value = "regular")]
    order: String,
    /// Numeral base (char/10based/10ebased only)
    #[arg(long, default_value_t = 10)]
    base: u32,
    /// Fixed width for the fixedchar scheme
    #[arg(long)]
    max_digits: Option<usize>,
}

impl OrthographyArgs {
    fn to_spec(&self) -> Result<OrthographySpec> {
        let scheme = match self.scheme.as_str() {
            "decimal" => Scheme::Decimal,
            "char" | "character" => Scheme::Character,
            "fixedchar" | "fixed_character" => Scheme::FixedCharacter,
            "underscore" => Scheme::Underscore,
            "words" => Scheme::Words,
            "10based" | "10" | "ten_based" => Scheme::TenBased,
            "10ebased" | "10e" | "ten_e_based" => Scheme::TenEBased,
            other => bail!("unknown scheme {other:?}"),
        };
        let order = match self.order.as_str() {
            "regular" => DigitOrder::Regular,
            "inverse" => DigitOrder::Inverse,
            other => bail!("unknown order {other:?}"),
        };
        let mut spec = OrthographySpec::new(scheme).with_order(order).with_base(self.base);
        spec.max_digits = self.max_digits;
        spec.validate().map_err(|e| anyhow!("{e}"))?;
        Ok(spec)
    }
}

#[derive(Subcommand)]
enum Command {
    /// Generate a dataset split as JSONL plus a manifest.
    Gen {
        /// Named preset; see `--preset help` for the list
        #[arg(long)]
        preset: Option<String>,
        /// Regenerate from an existing manifest and verify the digest
        #[arg(long)]
        from_manifest: Option<PathBuf>,
        /// Which split of the preset to produce
        #[arg(long, default_value = "train")]
        split: String,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        /// Example count (overrides the preset)
        #[arg(long)]
        count: Option<usize>,
        /// Sampling method without a preset: balanced|random
        #[arg(long)]
        method: Option<String>,
        /// Maximum operand digits without a preset
        #[arg(long)]
        digits: Option<usize>,
        #[arg(long, default_value_t = 2)]
        min_digits: usize,
        /// Operation: plus|minus
        #[arg(long, default_value = "plus")]
        op: String,
        /// Keep only examples whose longer operand exceeds this
        #[arg(long)]
        require_digits_over: Option<usize>,
        /// Re-check every answer against the arithmetic oracle
        #[arg(long)]
        verify: bool,
        #[command(flatten)]
        orthography: OrthographyArgs,
        #[arg(long)]
        out: PathBuf,
    },
    /// Encode decimal values into a surface form.
    Encode {
        #[command(flatten)]
        orthography: OrthographyArgs,
        /// Emit JSON instead of plain wire strings
        #[arg(long)]
        json: bool,
        /// Decimal values, e.g. 832 -165
        #[arg(required = true)]
        values: Vec<String>,
    },
    /// Decode a surface form back to a decimal value.
    Decode {
        #[command(flatten)]
        orthography: OrthographyArgs,
        #[arg(long)]
        json: bool,
        /// Token sequence, quoted: "8 10e2 3 10e1 2 10e0"
        sequence: String,
    },
    /// Score predictions against a gold dataset.
    Eval {
        /// Gold JSONL produced by `gen`
        #[arg(long)]
        gold: PathBuf,
        /// Predictions JSONL with {index, prediction}
        #[arg(long)]
        pred: PathBuf,
        /// Write <prefix>.report.json and <prefix>.per_length.csv
        #[arg(long)]
        out_prefix: Option<PathBuf>,
        /// Orthography override when no manifest sits next to the gold
        #[command(flatten)]
        orthography: OrthographyArgs,
    },
    /// Mean and 95% confidence interval over several accuracy values.
    Ci {
        /// Accuracies of repeated runs, e.g. 0.91 0.95 0.88
        #[arg(required = true)]
        accuracies: Vec<f64>,
    },
    /// Position-token ladder diagnostics for predictions.
    Analyze {
        /// Predictions JSONL; alternatively pass --sequence
        #[arg(long)]
        pred: Option<PathBuf>,
        /// One token sequence to analyze directly
        #[arg(long)]
        sequence: Option<String>,
        /// Write the per-example reports as JSON
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Train the miniature transformer.
    Train {
        /// Only `figure2-smoke` (exhaustive two-digit addition) for now
        #[arg(long, default_value = "figure2-smoke")]
        preset: String,
        /// Train on a generated JSONL instead of the preset's data
        #[arg(long)]
        data: Option<PathBuf>,
        /// Dev JSONL when --data is given; defaults to a 9:1 split
        #[arg(long)]
        dev: Option<PathBuf>,
        #[command(flatten)]
        orthography: OrthographyArgs,
        /// pos-masked|sinusoidal
        #[arg(long, default_value = "pos-masked")]
        position_mode: String,
        /// no-tgt|with-tgt
        #[arg(long, default_value = "no-tgt")]
        target_mode: String,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        #[arg(long)]
        epochs: Option<usize>,
        #[arg(long)]
        batch_size: Option<usize>,
        /// Derive the epoch count from the dataset size schedule
        #[arg(long)]
        epochs_auto: bool,
        /// Checkpoint output path; also writes <out>.log.csv and
        /// <out>.train.json
        #[arg(long)]
        out: PathBuf,
    },
    /// Greedy-decode a dataset with a trained checkpoint.
    Infer {
        #[arg(long)]
        checkpoint: PathBuf,
        /// Dataset JSONL whose questions are decoded
        #[arg(long)]
        data: PathBuf,
        #[arg(long)]
        out: PathBuf,
        /// Generation cap per example
        #[arg(long, default_value_t = 128)]
        max_len: usize,
    },
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(cli.command) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::from(classify_exit(&e))
        }
    }
}

fn classify_exit(e: &anyhow::Error) -> u8 {
    for cause in e.chain() {
        if cause.downcast_ref::<std::io::Error>().is_some() {
            return EXIT_IO;
        }
        if cause.downcast_ref::<numform::orthography::CodecError>().is_some() {
            return EXIT_DATA;
        }
        if cause.downcast_ref::<numform::evaluator::EvalError>().is_some() {
            return EXIT_DATA;
        }
        if cause.downcast_ref::<serde_json::Error>().is_some() {
            return EXIT_DATA;
        }
        let text = cause.to_string();
        if text.starts_with("invalid config")
            || text.starts_with("unknown")
            || text.starts_with("unsupported")
        {
            return EXIT_CONFIG;
        }
        if text.starts_with("io error") || text.contains("No such file") {
            return EXIT_IO;
        }
        if text.starts_with("codec error") || text.starts_with("malformed") {
            return EXIT_DATA;
        }
    }
    1
}

fn run(command: Command) -> Result<()> {
    match command {
        Command::Gen {
            preset,
            from_manifest,
            split,
            seed,
            count,
            method,
            digits,
            min_digits,
            op,
            require_digits_over,
            verify,
            orthography,
            out,
        } => {
            let op = parse_op(&op)?;
            let dataset = if let Some(mpath) = from_manifest {
                regenerate_from_manifest(&mpath)?
            } else if let Some(name) = preset {
                let split = presets::Split::parse(&split)
                    .ok_or_else(|| anyhow!("unknown split {split:?}"))?;
                let mut plan = presets::gen_preset(&name, split, seed)
                    .ok_or_else(|| anyhow!("unknown preset {name:?} (known: {})",
                        presets::GEN_PRESETS.join(", ")))?;
                if let Some(c) = count {
                    plan.sampling.count = c;
                }
                if name == "figure2-smoke" {
                    let mut spec = plan.orthography.clone();
                    if orthography.scheme != "10ebased" {
                        spec = orthography.to_spec()?;
                    }
                    let examples = exhaustive_pairs(10, 99, op, &spec)?;
                    exhaustive_dataset(examples, &plan, split.name(), op)?
                } else {
                    generate_dataset(
                        &plan.sampling,
                        &plan.orthography,
                        op,
                        split.name(),
                        plan.require_operand_digits_over,
                    )?
                }
            } else {
                let method = match method.as_deref() {
                    Some("balanced") => SamplingMethod::Balanced,
                    Some("random") => SamplingMethod::Random,
                    Some(other) => bail!("unknown method {other:?}"),
                    None => bail!("either --preset or --method/--digits is required"),
                };
                let digits = digits.context("--digits is required without a preset")?;
                let spec = orthography.to_spec()?;
                let cfg = SamplingConfig {
                    method,
                    max_digits: digits,
                    min_digits,
                    base: spec.base,
                    count: count.unwrap_or(1000),
                    seed,
                };
                generate_dataset(&cfg, &spec, op, &split, require_digits_over)?
            };

            if verify {
                verify_dataset(&dataset.examples)
                    .map_err(|i| anyhow!("answer re-verification failed at example {i}"))?;
            }
            dataset.write(&out)?;
            println!(
                "wrote {} examples to {} (digest {})",
                dataset.examples.len(),
                out.display(),
                &dataset.manifest.content_digest[..16]
            );
            Ok(())
        }

        Command::Encode { orthography, json, values } => {
            let spec = orthography.to_spec()?;
            for v in values {
                let n = BigNumber::from_decimal_string(&v)
                    .map_err(|e| anyhow!("bad value {v:?}: {e}"))?;
                let tokens = encode(&n, &spec)?;
                if json {
                    println!(
                        "{}",
                        serde_json::json!({ "value": v, "wire": tokens.wire() })
                    );
                } else {
                    println!("{}", tokens.wire());
                }
            }
            Ok(())
        }

        Command::Decode { orthography, json, sequence } => {
            let spec = orthography.to_spec()?;
            let n = decode(&TokenSequence::from_wire(&sequence), &spec)?;
            if json {
                println!(
                    "{}",
                    serde_json::json!({ "wire": sequence, "value": n.to_decimal_string() })
                );
            } else {
                println!("{n}");
            }
            Ok(())
        }

        Command::Eval { gold, pred, out_prefix, orthography } => {
            let records = read_examples(&gold)?;
            let preds = read_predictions(&pred)?;
            let spec = match read_manifest(&gold) {
                Some(m) => m.orthography,
                None => orthography.to_spec()?,
            };
            let golds: Vec<GoldExample> = records.iter().map(GoldExample::from).collect();
            let aligned = align_predictions(&preds, golds.len())?;
            let report = evaluate(&aligned, &golds, &spec)?;
            print!("{}", render_table(&report));
            if let Some(prefix) = out_prefix {
                let p = prefix.display();
                std::fs::write(
                    format!("{p}.report.json"),
                    serde_json::to_string_pretty(&report)? + "\n",
                )?;
                std::fs::write(format!("{p}.per_length.csv"), per_length_csv(&report))?;
                println!("wrote {p}.report.json and {p}.per_length.csv");
            }
            Ok(())
        }

        Command::Ci { accuracies } => {
            let ci = confidence_interval(&accuracies)?;
            println!("{}", serde_json::to_string_pretty(&ci)?);
            Ok(())
        }

        Command::Analyze { pred, sequence, out } => {
            let mut reports = Vec::new();
            match (pred, sequence) {
                (Some(path), None) => {
                    for p in read_predictions(&path)? {
                        let r = analyze_position_skips(&TokenSequence::from_wire(&p.prediction));
                        reports.push((p.index, r));
                    }
                }
                (None, Some(s)) => {
                    reports.push((0, analyze_position_skips(&TokenSequence::from_wire(&s))));
                }
                _ => bail!("pass exactly one of --pred or --sequence"),
            }
            let broken = reports.iter().filter(|(_, r)| !r.well_formed).count();
            println!(
                "{} sequences, {} with ladder defects",
                reports.len(),
                broken
            );
            for (i, r) in reports.iter().filter(|(_, r)| !r.well_formed).take(10) {
                println!(
                    "  #{i}: max {:?}, missing {:?}, duplicated {:?}, out_of_order {}",
                    r.max_exponent_seen, r.missing_exponents, r.duplicated_exponents,
                    r.out_of_order
                );
            }
            if let Some(path) = out {
                #[derive(Serialize)]
                struct Entry<'a> {
                    index: usize,
                    report: &'a numform::evaluator::SkipReport,
                }
                let entries: Vec<Entry> =
                    reports.iter().map(|(i, r)| Entry { index: *i, report: r }).collect();
                std::fs::write(&path, serde_json::to_string_pretty(&entries)? + "\n")?;
                println!("wrote {}", path.display());
            }
            Ok(())
        }

        Command::Train {
            preset,
            data,
            dev,
            orthography,
            position_mode,
            target_mode,
            seed,
            epochs,
            batch_size,
            epochs_auto,
            out,
        } => {
            let spec = orthography.to_spec()?;
            let position_mode = match position_mode.as_str() {
                "pos-masked" => mf::PositionMode::PosMasked,
                "sinusoidal" => mf::PositionMode::Sinusoidal,
                other => bail!("unknown position mode {other:?}"),
            };
            let target_mode = match target_mode.as_str() {
                "no-tgt" => mf::TargetPositionMode::NoTgt,
                "with-tgt" => mf::TargetPositionMode::WithTgt,
                other => bail!("unknown target mode {other:?}"),
            };

            let (train_set, dev_set) = match (&data, &dev) {
                (Some(train_path), dev_path) => {
                    let train_set = examples_from_jsonl(train_path, &spec)?;
                    match dev_path {
                        Some(p) => (train_set, examples_from_jsonl(p, &spec)?),
                        None => {
                            let all = train_set;
                            mf::split_nine_to_one(&all, seed)
                        }
                    }
                }
                (None, _) => {
                    if preset != "figure2-smoke" {
                        bail!("unknown preset {preset:?}; pass --data for custom sets");
                    }
                    let examples = exhaustive_pairs(10, 99, Operation::Plus, &spec)?;
                    mf::split_nine_to_one(&examples, seed)
                }
            };

            let mut all = train_set.clone();
            all.extend(dev_set.iter().cloned());
            let mut train_cfg = presets::figure2_train_config(seed);
            if epochs_auto {
                train_cfg.epochs = presets::epochs_for_dataset_size(train_set.len());
            }
            if let Some(e) = epochs {
                train_cfg.epochs = e;
            }
            if let Some(b) = batch_size {
                train_cfg.batch_size = b;
            }
            let vocab = mf::build_vocabulary(&all, train_cfg.vocab_limit)
                .map_err(|e| anyhow!("{e}"))?;
            let model_cfg = presets::figure2_model_config(spec, vocab)
                .with_position_mode(position_mode)
                .with_target_position_mode(target_mode);

            let echo = serde_json::json!({
                "preset": preset,
                "data": data.as_ref().map(|p| p.display().to_string()),
                "dev": dev.as_ref().map(|p| p.display().to_string()),
                "train_examples": train_set.len(),
                "dev_examples": dev_set.len(),
                "train_config": &train_cfg,
                "position_mode": position_mode,
                "target_position_mode": target_mode,
            });

            println!(
                "training on {} examples ({} dev), {} epochs, lr {}",
                train_set.len(),
                dev_set.len(),
                train_cfg.epochs,
                train_cfg.learning_rate
            );
            let mut outcome = mf::train::<f32>(model_cfg, &train_cfg, &train_set, &dev_set)
                .map_err(|e| anyhow!("{e}"))?;
            println!(
                "best dev accuracy {:.4} at epoch {}",
                outcome.best_dev_accuracy, outcome.best_epoch
            );

            let meta = mf::CheckpointMeta {
                epoch: outcome.best_epoch,
                dev_accuracy: outcome.best_dev_accuracy,
                optimizer: mf::OptimizerState::adam(
                    outcome.optimizer_steps,
                    train_cfg.learning_rate,
                ),
            };
            mf::save_checkpoint(&mut outcome.model, &meta, &out).map_err(|e| anyhow!("{e}"))?;
            let log_path = out.with_extension("log.csv");
            std::fs::write(&log_path, mf::training_log_csv(&outcome.log))?;
            let echo_path = out.with_extension("train.json");
            std::fs::write(&echo_path, serde_json::to_string_pretty(&echo)? + "\n")?;
            println!(
                "wrote {}, {}, {}",
                out.display(),
                log_path.display(),
                echo_path.display()
            );
            Ok(())
        }

        Command::Infer { checkpoint, data, out, max_len } => {
            let (model, meta) = mf::load_checkpoint::<f32>(&checkpoint)
                .map_err(|e| anyhow!("{e}"))?;
            let records = read_examples(&data)?;
            let mut predictions = Vec::with_capacity(records.len());
            for (index, chunk) in records.chunks(64).enumerate() {
                let encoded: Vec<mf::EncodedExample> = chunk
                    .iter()
                    .map(|r| mf::encode_example(&r.question, "", &model.config))
                    .collect::<Result<_, _>>()
                    .map_err(|e| anyhow!("{e}"))?;
                let refs: Vec<&mf::EncodedExample> = encoded.iter().collect();
                let outcomes = mf::batched_greedy_decode(&model, &refs, max_len)
                    .map_err(|e| anyhow!("{e}"))?;
                for (off, o) in outcomes.iter().enumerate() {
                    predictions.push(PredictionRecord {
                        index: index * 64 + off,
                        prediction: o.wire(),
                    });
                }
            }
            write_predictions(&out, &predictions)?;
            let echo = serde_json::json!({
                "checkpoint": checkpoint.display().to_string(),
                "checkpoint_dev_accuracy": meta.dev_accuracy,
                "data": data.display().to_string(),
                "max_len": max_len,
                "count": predictions.len(),
            });
            std::fs::write(
                out.with_extension("infer.json"),
                serde_json::to_string_pretty(&echo)? + "\n",
            )?;
            println!("wrote {} predictions to {}", predictions.len(), out.display());
            Ok(())
        }
    }
}

fn parse_op(s: &str) -> Result<Operation> {
    match s {
        "plus" | "add" => Ok(Operation::Plus),
        "minus" | "sub" => Ok(Operation::Minus),
        other => bail!("unknown operation {other:?}"),
    }
}

fn read_manifest(dataset_path: &Path) -> Option<DatasetManifest> {
    let text = std::fs::read_to_string(manifest_path(dataset_path)).ok()?;
    serde_json::from_str(&text).ok()
}

/// Loads a JSONL dataset back into full examples (values re-parsed so
/// answers can be re-verified and digit metadata recomputed).
fn examples_from_jsonl(
    path: &Path,
    spec: &OrthographySpec,
) -> Result<Vec<numform::taskgen::Example>> {
    let records = read_examples(path)?;
    records
        .iter()
        .map(|r| {
            let n1 = BigNumber::from_decimal_string(&r.n1).map_err(|e| anyhow!("{e}"))?;
            let n2 = BigNumber::from_decimal_string(&r.n2).map_err(|e| anyhow!("{e}"))?;
            let mut e = numform::taskgen::render_example(&n1, &n2, r.op, spec)?;
            if e.question != r.question || e.answer != r.answer {
                bail!(
                    "dataset row does not match the given orthography (expected {:?}, file has {:?})",
                    e.question,
                    r.question
                );
            }
            e.digits1 = r.digits1;
            e.digits2 = r.digits2;
            Ok(e)
        })
        .collect()
}

/// Wraps exhaustive pairs in a manifest so `gen --preset figure2-smoke`
/// produces the same artifact shape as the sampled presets.
fn exhaustive_dataset(
    examples: Vec<numform::taskgen::Example>,
    plan: &presets::GenPlan,
    split: &str,
    op: Operation,
) -> Result<Dataset> {
    use sha2::{Digest, Sha256};
    let bytes = numform::taskgen::jsonl_bytes(&examples)?;
    let manifest = DatasetManifest {
        schema_version: numform::taskgen::SCHEMA_VERSION,
        split: split.to_owned(),
        count: examples.len(),
        seed: plan.sampling.seed,
        method: plan.sampling.method,
        min_digits: plan.sampling.min_digits,
        max_digits: plan.sampling.max_digits,
        base: plan.sampling.base,
        operation: op,
        orthography: examples
            .first()
            .map(|e| e.spec.clone())
            .unwrap_or_else(|| plan.orthography.clone()),
        require_operand_digits_over: None,
        content_digest: hex::encode(Sha256::digest(&bytes)),
    };
    Ok(Dataset { examples, manifest })
}

/// Re-runs generation from a manifest and confirms the digest matches.
fn regenerate_from_manifest(path: &Path) -> Result<Dataset> {
    let manifest: DatasetManifest = serde_json::from_str(&std::fs::read_to_string(path)?)?;
    let cfg = SamplingConfig {
        method: manifest.method,
        max_digits: manifest.max_digits,
        min_digits: manifest.min_digits,
        base: manifest.base,
        count: manifest.count,
        seed: manifest.seed,
    };
    let ds = generate_dataset(
        &cfg,
        &manifest.orthography,
        manifest.operation,
        &manifest.split,
        manifest.require_operand_digits_over,
    )?;
    if ds.manifest.content_digest != manifest.content_digest {
        bail!(
            "regenerated digest {} does not match manifest {}",
            ds.manifest.content_digest,
            manifest.content_digest
        );
    }
    Ok(ds)
}
