//! Greedy autoregressive decoding. At inference the target side never
//! receives digit-position vectors: in masked mode its position rows
//! stay zero, in sinusoidal mode they carry the ordinary sequence
//! positions (which depend on nothing that is unknown at decode time).

use super::data::{build_batch, encode_example, Batch, EncodedExample};
use super::model::Microformer;
use super::posenc::sinusoidal_encoding;
use super::data::Vocabulary;
use super::{ModelError, PositionMode, Real};
use crate::evaluator::exact_match;
use ndarray::Array2;

#[derive(Clone, PartialEq, Eq, Debug)]
pub struct DecodeOutcome {
    pub tokens: Vec<String>,
    /// The decoder hit `max_len` before emitting the end marker.
    pub truncated: bool,
}

impl DecodeOutcome {
    pub fn wire(&self) -> String {
        self.tokens.join(" ")
    }
}

/// Decodes one source token sequence with argmax steps (first index
/// wins ties) until EOS or `max_len` generated tokens.
pub fn greedy_decode<A: Real>(
    model: &Microformer<A>,
    source_wire: &str,
    max_len: usize,
) -> Result<DecodeOutcome, ModelError> {
    let encoded = encode_example(source_wire, "", &model.config)?;
    let mut out = batched_greedy_decode(model, &[&encoded], max_len)?;
    Ok(out.remove(0))
}

/// Decodes a batch of sources in lockstep; one forward pass per step
/// for the whole batch.
pub fn batched_greedy_decode<A: Real>(
    model: &Microformer<A>,
    examples: &[&EncodedExample],
    max_len: usize,
) -> Result<Vec<DecodeOutcome>, ModelError> {
    let b = examples.len();
    if b == 0 {
        return Ok(Vec::new());
    }
    let d = model.config.model_width;
    let batch: Batch<A> = build_batch(examples, &model.config, false)?;
    let enc_out = model.encode_source(&batch);

    let mut prefixes: Vec<Vec<usize>> = vec![vec![Vocabulary::BOS]; b];
    let mut done = vec![false; b];

    for _ in 0..max_len {
        let lt = prefixes[0].len();
        let mut tgt_in = Vec::with_capacity(b * lt);
        for p in &prefixes {
            tgt_in.extend_from_slice(p);
        }
        let tgt_pos = inference_target_positions::<A>(model.config.position_mode, b, lt, d);
        let tgt_len = vec![lt; b];
        let logits =
            model.decode_prefix(&enc_out, &batch.src_len, batch.ls, &tgt_in, &tgt_pos, &tgt_len, lt);

        let mut all_done = true;
        for x in 0..b {
            if done[x] {
                prefixes[x].push(Vocabulary::PAD);
                continue;
            }
            let row = logits.row(x * lt + lt - 1);
            let mut best = 0usize;
            let mut best_v = row[0];
            for (j, &v) in row.iter().enumerate().skip(1) {
                if v > best_v {
                    best_v = v;
                    best = j;
                }
            }
            if best == Vocabulary::EOS {
                done[x] = true;
                prefixes[x].push(Vocabulary::PAD);
            } else {
                prefixes[x].push(best);
                all_done = false;
            }
        }
        if all_done {
            break;
        }
    }

    Ok(prefixes
        .into_iter()
        .zip(done)
        .map(|(prefix, finished)| {
            let tokens = prefix
                .into_iter()
                .skip(1)
                .take_while(|&id| id != Vocabulary::PAD)
                .map(|id| model.config.vocabulary.token(id).to_owned())
                .collect();
            DecodeOutcome { tokens, truncated: !finished }
        })
        .collect())
}

/// Zero rows in masked mode; plain sequence positions in sinusoidal
/// mode. This is the only target-position source the decode path has.
fn inference_target_positions<A: Real>(
    mode: PositionMode,
    b: usize,
    lt: usize,
    d: usize,
) -> Array2<A> {
    let mut pos = Array2::zeros((b * lt, d));
    if mode == PositionMode::Sinusoidal {
        for x in 0..b {
            for p in 0..lt {
                pos.row_mut(x * lt + p).assign(&sinusoidal_encoding(p, d));
            }
        }
    }
    pos
}

/// Exact-match accuracy of greedy decodes against the stored answers,
/// processed in chunks. The length cap is the longest gold answer plus
/// two, which cannot turn a correct decode into a truncated one.
pub fn dataset_accuracy<A: Real>(
    model: &Microformer<A>,
    examples: &[EncodedExample],
) -> Result<f64, ModelError> {
    if examples.is_empty() {
        return Ok(0.0);
    }
    let cap = examples.iter().map(|e| e.tgt_ids.len()).max().unwrap_or(0) + 2;
    let mut correct = 0usize;
    for chunk in examples.chunks(64) {
        let refs: Vec<&EncodedExample> = chunk.iter().collect();
        let outcomes = batched_greedy_decode(model, &refs, cap)?;
        for (outcome, e) in outcomes.iter().zip(chunk) {
            if exact_match(&outcome.wire(), &e.answer) {
                correct += 1;
            }
        }
    }
    Ok(correct as f64 / examples.len() as f64)
}
