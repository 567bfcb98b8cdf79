//! Tokenization, digit-position annotation, and batch assembly.
//!
//! Tokens are whitespace-split wire strings. The vocabulary is built
//! from the training split plus three reserved symbols and is sorted,
//! so ids are stable across runs. Digit annotations recover, for every
//! token of an encoded number, its big-endian digit index `i` and the
//! number's digit count `n` — the inputs of the position-wise masked
//! embedding.

use super::posenc::{positionwise_masked_embedding, sinusoidal_encoding};
use super::{ModelConfig, ModelError, PositionMode, Real, TargetPositionMode};
use crate::bignum::BigNumber;
use crate::orthography::{parse_position_token, DigitOrder, OrthographySpec, Scheme};
use crate::taskgen::Example;
use ndarray::Array2;
use serde::{Deserialize, Serialize};
use std::collections::{BTreeSet, HashMap, HashSet};

/// Token ↔ id map with reserved `<pad>`, `<bos>`, `<eos>` up front.
#[derive(Clone, PartialEq, Eq, Debug, Serialize, Deserialize)]
#[serde(from = "VocabTokens", into = "VocabTokens")]
pub struct Vocabulary {
    tokens: Vec<String>,
    index: HashMap<String, usize>,
}

#[derive(Serialize, Deserialize)]
struct VocabTokens(Vec<String>);

impl From<VocabTokens> for Vocabulary {
    fn from(t: VocabTokens) -> Self {
        Vocabulary::from_token_list(t.0)
    }
}

impl From<Vocabulary> for VocabTokens {
    fn from(v: Vocabulary) -> Self {
        VocabTokens(v.tokens)
    }
}

impl Vocabulary {
    pub const PAD: usize = 0;
    pub const BOS: usize = 1;
    pub const EOS: usize = 2;
    pub const RESERVED: usize = 3;

    const RESERVED_TOKENS: [&'static str; 3] = ["<pad>", "<bos>", "<eos>"];

    fn from_token_list(tokens: Vec<String>) -> Self {
        let index = tokens.iter().cloned().zip(0..).collect();
        Vocabulary { tokens, index }
    }

    /// Builds from a set of dataset tokens; reserved symbols first,
    /// dataset tokens sorted after them.
    pub fn new(dataset_tokens: impl IntoIterator<Item = String>) -> Self {
        let unique: BTreeSet<String> = dataset_tokens.into_iter().collect();
        let mut tokens: Vec<String> =
            Self::RESERVED_TOKENS.iter().map(|s| s.to_string()).collect();
        tokens.extend(unique);
        Self::from_token_list(tokens)
    }

    pub fn id(&self, token: &str) -> Option<usize> {
        self.index.get(token).copied()
    }

    pub fn token(&self, id: usize) -> &str {
        &self.tokens[id]
    }

    pub fn len(&self) -> usize {
        self.tokens.len()
    }

    pub fn is_empty(&self) -> bool {
        self.tokens.is_empty()
    }
}

/// Collects every question/answer token of a dataset into a vocabulary,
/// rejecting datasets whose surface form explodes the token space (the
/// plain decimal orthography above a couple of digits).
pub fn build_vocabulary(examples: &[Example], limit: usize) -> Result<Vocabulary, ModelError> {
    let mut tokens = BTreeSet::new();
    for e in examples {
        tokens.extend(e.question.split_whitespace().map(str::to_owned));
        tokens.extend(e.answer.split_whitespace().map(str::to_owned));
    }
    let size = tokens.len() + Vocabulary::RESERVED;
    if size > limit {
        return Err(ModelError::VocabularyOverflow { size, limit });
    }
    Ok(Vocabulary::new(tokens))
}

/// For each token, `Some((i, n))` when it is the `i`-th digit (big
/// endian, `i = n` at the most significant place) of an `n`-digit
/// number, `None` for everything else. Single-token schemes carry no
/// per-digit tokens, so everything is `None` there.
pub fn digit_annotations(
    tokens: &[String],
    spec: &OrthographySpec,
) -> Vec<Option<(usize, usize)>> {
    match spec.scheme {
        Scheme::Character | Scheme::FixedCharacter => annotate_digit_runs(tokens, spec),
        Scheme::TenEBased => annotate_position_pairs(tokens, spec),
        Scheme::TenBased => annotate_power_runs(tokens, spec),
        _ => vec![None; tokens.len()],
    }
}

fn is_digit_token(token: &str, base: u32) -> bool {
    crate::orthography::parse_digit_token(token, base).is_ok()
}

fn assign_run(
    ann: &mut [Option<(usize, usize)>],
    digit_positions: &[usize],
    order: DigitOrder,
) {
    let n = digit_positions.len();
    for (j, &pos) in digit_positions.iter().enumerate() {
        let i = match order {
            DigitOrder::Regular => n - j,
            DigitOrder::Inverse => j + 1,
        };
        ann[pos] = Some((i, n));
    }
}

fn annotate_digit_runs(
    tokens: &[String],
    spec: &OrthographySpec,
) -> Vec<Option<(usize, usize)>> {
    let mut ann = vec![None; tokens.len()];
    let mut run: Vec<usize> = Vec::new();
    for (p, t) in tokens.iter().enumerate() {
        if is_digit_token(t, spec.base) {
            run.push(p);
        } else if !run.is_empty() {
            assign_run(&mut ann, &run, spec.order);
            run.clear();
        }
    }
    if !run.is_empty() {
        assign_run(&mut ann, &run, spec.order);
    }
    ann
}

/// `8 10e2 3 10e1 2 10e0`: each digit's index comes straight from its
/// position token, which makes the annotation order-agnostic.
fn annotate_position_pairs(
    tokens: &[String],
    spec: &OrthographySpec,
) -> Vec<Option<(usize, usize)>> {
    let mut ann = vec![None; tokens.len()];
    let mut p = 0;
    while p < tokens.len() {
        let pair_at = |q: usize| -> Option<u64> {
            if q + 1 < tokens.len() && is_digit_token(&tokens[q], spec.base) {
                parse_position_token(&tokens[q + 1])
            } else {
                None
            }
        };
        if pair_at(p).is_none() {
            p += 1;
            continue;
        }
        let start = p;
        let mut exps = Vec::new();
        while let Some(e) = pair_at(p) {
            exps.push(e);
            p += 2;
        }
        let n = (exps.iter().max().copied().unwrap_or(0) + 1) as usize;
        for (k, &e) in exps.iter().enumerate() {
            ann[start + 2 * k] = Some((e as usize + 1, n));
        }
    }
    ann
}

/// `8 100 3 10 2` (or inverse `2 3 10 8 100`): digits interleaved with
/// decimal power tokens; a digit's index follows its slot in the run.
fn annotate_power_runs(
    tokens: &[String],
    spec: &OrthographySpec,
) -> Vec<Option<(usize, usize)>> {
    let powers = power_token_set(spec.base, 72);
    let is_power = |t: &str| powers.contains(t);
    let mut ann = vec![None; tokens.len()];
    let mut p = 0;
    while p < tokens.len() {
        if !is_digit_token(&tokens[p], spec.base) {
            p += 1;
            continue;
        }
        let mut digit_positions = vec![p];
        let mut q = p;
        match spec.order {
            DigitOrder::Regular => {
                // d (power d)*
                while q + 2 < tokens.len()
                    && is_power(&tokens[q + 1])
                    && is_digit_token(&tokens[q + 2], spec.base)
                {
                    digit_positions.push(q + 2);
                    q += 2;
                }
            }
            DigitOrder::Inverse => {
                // d (d power)*
                while q + 2 < tokens.len()
                    && is_digit_token(&tokens[q + 1], spec.base)
                    && is_power(&tokens[q + 2])
                {
                    digit_positions.push(q + 1);
                    q += 2;
                }
            }
        }
        assign_run(&mut ann, &digit_positions, spec.order);
        p = q + 1;
    }
    ann
}

fn power_token_set(base: u32, up_to: usize) -> HashSet<String> {
    let mut set = HashSet::new();
    let mut p = BigNumber::from_u64(base as u64);
    for _ in 0..up_to {
        set.insert(p.to_decimal_string());
        p = p.mul_small(base);
    }
    set
}

/// One example tokenized against a vocabulary, with annotations.
#[derive(Clone, Debug)]
pub struct EncodedExample {
    pub src_ids: Vec<usize>,
    pub src_ann: Vec<Option<(usize, usize)>>,
    pub tgt_ids: Vec<usize>,
    pub tgt_ann: Vec<Option<(usize, usize)>>,
    pub question: String,
    pub answer: String,
}

pub fn encode_example(
    question: &str,
    answer: &str,
    config: &ModelConfig,
) -> Result<EncodedExample, ModelError> {
    let lookup = |wire: &str| -> Result<(Vec<usize>, Vec<String>), ModelError> {
        let tokens: Vec<String> = wire.split_whitespace().map(str::to_owned).collect();
        let ids = tokens
            .iter()
            .map(|t| {
                config
                    .vocabulary
                    .id(t)
                    .ok_or_else(|| ModelError::OutOfVocabulary(t.clone()))
            })
            .collect::<Result<Vec<_>, _>>()?;
        Ok((ids, tokens))
    };
    let (src_ids, src_tokens) = lookup(question)?;
    let (tgt_ids, tgt_tokens) = lookup(answer)?;
    if src_ids.len() > config.max_sequence_length {
        return Err(ModelError::SequenceTooLong {
            len: src_ids.len(),
            max: config.max_sequence_length,
        });
    }
    if tgt_ids.len() + 1 > config.max_sequence_length {
        return Err(ModelError::SequenceTooLong {
            len: tgt_ids.len() + 1,
            max: config.max_sequence_length,
        });
    }
    Ok(EncodedExample {
        src_ann: digit_annotations(&src_tokens, &config.orthography),
        tgt_ann: digit_annotations(&tgt_tokens, &config.orthography),
        src_ids,
        tgt_ids,
        question: question.to_owned(),
        answer: answer.to_owned(),
    })
}

pub fn encode_examples(
    examples: &[Example],
    config: &ModelConfig,
) -> Result<Vec<EncodedExample>, ModelError> {
    examples
        .iter()
        .map(|e| encode_example(&e.question, &e.answer, config))
        .collect()
}

/// A padded training batch in flattened `(batch * seq, width)` layout.
#[derive(Debug)]
pub struct Batch<A> {
    pub b: usize,
    pub ls: usize,
    pub lt: usize,
    pub src_ids: Vec<usize>,
    pub src_len: Vec<usize>,
    /// Decoder input: BOS followed by the answer tokens.
    pub tgt_in: Vec<usize>,
    /// Decoder targets: answer tokens followed by EOS; PAD elsewhere.
    pub tgt_out: Vec<usize>,
    pub tgt_len: Vec<usize>,
    pub src_pos: Array2<A>,
    pub tgt_pos: Array2<A>,
}

/// Assembles a teacher-forcing batch. `training` controls whether
/// WithTgt digit positions are attached to the target side; inference
/// always leaves the target side at zero for the masked mode.
pub fn build_batch<A: Real>(
    items: &[&EncodedExample],
    config: &ModelConfig,
    training: bool,
) -> Result<Batch<A>, ModelError> {
    let b = items.len();
    let ls = items.iter().map(|e| e.src_ids.len()).max().unwrap_or(0);
    let lt = items.iter().map(|e| e.tgt_ids.len() + 1).max().unwrap_or(1);
    let d = config.model_width;

    let mut src_ids = vec![Vocabulary::PAD; b * ls];
    let mut src_len = Vec::with_capacity(b);
    let mut tgt_in = vec![Vocabulary::PAD; b * lt];
    let mut tgt_out = vec![Vocabulary::PAD; b * lt];
    let mut tgt_len = Vec::with_capacity(b);
    let mut src_pos: Array2<A> = Array2::zeros((b * ls, d));
    let mut tgt_pos: Array2<A> = Array2::zeros((b * lt, d));

    let with_tgt_positions = training
        && config.position_mode == PositionMode::PosMasked
        && config.target_position_mode == TargetPositionMode::WithTgt;

    for (x, e) in items.iter().enumerate() {
        src_len.push(e.src_ids.len());
        for (p, &id) in e.src_ids.iter().enumerate() {
            src_ids[x * ls + p] = id;
            let row = x * ls + p;
            match config.position_mode {
                PositionMode::Sinusoidal => {
                    src_pos.row_mut(row).assign(&sinusoidal_encoding(p, d));
                }
                PositionMode::PosMasked => {
                    if let Some((i, n)) = e.src_ann[p] {
                        src_pos.row_mut(row).assign(&positionwise_masked_embedding(i, n, d)?);
                    }
                }
            }
        }

        let t_len = e.tgt_ids.len() + 1;
        tgt_len.push(t_len);
        tgt_in[x * lt] = Vocabulary::BOS;
        for (p, &id) in e.tgt_ids.iter().enumerate() {
            tgt_in[x * lt + p + 1] = id;
            tgt_out[x * lt + p] = id;
        }
        tgt_out[x * lt + e.tgt_ids.len()] = Vocabulary::EOS;

        for p in 0..t_len {
            let row = x * lt + p;
            match config.position_mode {
                PositionMode::Sinusoidal => {
                    tgt_pos.row_mut(row).assign(&sinusoidal_encoding(p, d));
                }
                PositionMode::PosMasked => {
                    if with_tgt_positions && p >= 1 {
                        if let Some((i, n)) = e.tgt_ann[p - 1] {
                            tgt_pos
                                .row_mut(row)
                                .assign(&positionwise_masked_embedding(i, n, d)?);
                        }
                    }
                }
            }
        }
    }

    Ok(Batch { b, ls, lt, src_ids, src_len, tgt_in, tgt_out, tgt_len, src_pos, tgt_pos })
}
