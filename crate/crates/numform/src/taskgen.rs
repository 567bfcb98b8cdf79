//! Deterministic, seeded generation of arithmetic question/answer
//! datasets.
//!
//! Every example is rendered from the fixed template
//! `What is [number1] [operation] [number2] ?` with both numbers and the
//! answer encoded under one [`OrthographySpec`]. Sampling is keyed by a
//! ChaCha8 stream per example index, so datasets are reproducible
//! byte-for-byte for a given `(seed, config, spec)` and generation can
//! be parallelized without changing the output.

use crate::bignum::{BigNumber, RadixDigits, Sign};
use crate::orthography::{encode, CodecError, OrthographySpec, TokenSequence};
use rand::{RngCore, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};
use std::fmt;
use std::fs;
use std::io::Write as _;
use std::path::{Path, PathBuf};

/// Current JSONL/manifest schema version.
pub const SCHEMA_VERSION: u32 = 1;

#[derive(Clone, Copy, PartialEq, Eq, Debug, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum SamplingMethod {
    Balanced,
    Random,
}

#[derive(Clone, Copy, PartialEq, Eq, Debug, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Operation {
    Plus,
    Minus,
}

impl Operation {
    /// The template word between the two operands.
    pub fn word(self) -> &'static str {
        match self {
            Operation::Plus => "plus",
            Operation::Minus => "minus",
        }
    }

    pub fn apply(self, a: &BigNumber, b: &BigNumber) -> BigNumber {
        match self {
            Operation::Plus => a.add(b),
            Operation::Minus => a.sub(b),
        }
    }
}

impl fmt::Display for Operation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.word())
    }
}

/// How operands are drawn for one dataset.
///
/// `Balanced` draws a digit length `d` uniformly from
/// `[min_digits, max_digits]` once per example and then draws both
/// operands uniformly among the `d`-digit numbers, so every length is
/// equally represented. `Random` draws operands uniformly from
/// `[0, base^max_digits - 1]`, which concentrates roughly 90% of the
/// draws on the maximum length (in base 10).
#[derive(Clone, PartialEq, Eq, Debug, Serialize, Deserialize)]
pub struct SamplingConfig {
    pub method: SamplingMethod,
    pub max_digits: usize,
    pub min_digits: usize,
    pub base: u32,
    pub count: usize,
    pub seed: u64,
}

impl SamplingConfig {
    pub fn balanced(max_digits: usize, count: usize, seed: u64) -> Self {
        SamplingConfig {
            method: SamplingMethod::Balanced,
            max_digits,
            min_digits: 2,
            base: 10,
            count,
            seed,
        }
    }

    pub fn random(max_digits: usize, count: usize, seed: u64) -> Self {
        SamplingConfig {
            method: SamplingMethod::Random,
            max_digits,
            min_digits: 2,
            base: 10,
            count,
            seed,
        }
    }

    pub fn with_base(mut self, base: u32) -> Self {
        self.base = base;
        self
    }

    pub fn with_min_digits(mut self, min_digits: usize) -> Self {
        self.min_digits = min_digits;
        self
    }

    fn validate(&self) -> Result<(), GenError> {
        if self.base < 2 {
            return Err(GenError::InvalidConfig(format!("base {} must be >= 2", self.base)));
        }
        if self.count == 0 {
            return Err(GenError::InvalidConfig("count must be >= 1".into()));
        }
        if self.min_digits < 1 || self.min_digits > self.max_digits {
            return Err(GenError::InvalidConfig(format!(
                "digit range [{}, {}] is invalid",
                self.min_digits, self.max_digits
            )));
        }
        Ok(())
    }
}

/// One question/answer pair with the metadata needed to re-verify and
/// to break accuracy down by operand length.
#[derive(Clone, PartialEq, Eq, Debug)]
pub struct Example {
    pub question: String,
    pub answer: String,
    pub n1: BigNumber,
    pub n2: BigNumber,
    pub operation: Operation,
    pub digits1: usize,
    pub digits2: usize,
    pub spec: OrthographySpec,
    /// (dataset seed, example index) — enough to regenerate the example.
    pub seed_lineage: (u64, u64),
}

/// The JSONL wire form of an [`Example`]. Operand values are decimal
/// strings so external harnesses never need the codec to recompute
/// answers.
#[derive(Clone, PartialEq, Eq, Debug, Serialize, Deserialize)]
pub struct ExampleRecord {
    pub question: String,
    pub answer: String,
    pub n1: String,
    pub n2: String,
    pub op: Operation,
    pub digits1: usize,
    pub digits2: usize,
}

impl From<&Example> for ExampleRecord {
    fn from(e: &Example) -> Self {
        ExampleRecord {
            question: e.question.clone(),
            answer: e.answer.clone(),
            n1: e.n1.to_decimal_string(),
            n2: e.n2.to_decimal_string(),
            op: e.operation,
            digits1: e.digits1,
            digits2: e.digits2,
        }
    }
}

/// One model prediction, joined to the dataset by line index.
#[derive(Clone, PartialEq, Eq, Debug, Serialize, Deserialize)]
pub struct PredictionRecord {
    pub index: usize,
    pub prediction: String,
}

/// Everything needed to regenerate a dataset file and check that a copy
/// is intact.
#[derive(Clone, PartialEq, Debug, Serialize, Deserialize)]
pub struct DatasetManifest {
    pub schema_version: u32,
    pub split: String,
    pub count: usize,
    pub seed: u64,
    pub method: SamplingMethod,
    pub min_digits: usize,
    pub max_digits: usize,
    pub base: u32,
    pub operation: Operation,
    pub orthography: OrthographySpec,
    /// Keep only examples where `max(digits1, digits2)` exceeds this,
    /// used to hold test lengths out of the training range.
    #[serde(skip_serializing_if = "Option::is_none", default)]
    pub require_operand_digits_over: Option<usize>,
    /// SHA-256 of the JSONL bytes.
    pub content_digest: String,
}

/// A generated split: examples plus the manifest describing them.
#[derive(Clone, Debug)]
pub struct Dataset {
    pub examples: Vec<Example>,
    pub manifest: DatasetManifest,
}

#[derive(Debug)]
pub enum GenError {
    Codec(CodecError),
    InvalidConfig(String),
    Io(std::io::Error),
    Json(serde_json::Error),
}

impl fmt::Display for GenError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            GenError::Codec(e) => write!(f, "codec error: {e}"),
            GenError::InvalidConfig(m) => write!(f, "invalid config: {m}"),
            GenError::Io(e) => write!(f, "io error: {e}"),
            GenError::Json(e) => write!(f, "json error: {e}"),
        }
    }
}

impl std::error::Error for GenError {}

impl From<CodecError> for GenError {
    fn from(e: CodecError) -> Self {
        GenError::Codec(e)
    }
}

impl From<std::io::Error> for GenError {
    fn from(e: std::io::Error) -> Self {
        GenError::Io(e)
    }
}

impl From<serde_json::Error> for GenError {
    fn from(e: serde_json::Error) -> Self {
        GenError::Json(e)
    }
}

/// The RNG stream for example `index` of a dataset. ChaCha8 keyed by
/// the dataset seed with the example index as the stream id, so any
/// example can be regenerated in isolation.
pub fn example_rng(seed: u64, index: u64) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(index);
    rng
}

/// Uniform draw from `[0, bound)` by rejection, so the distribution is
/// exact for every bound and stable across library versions.
fn uniform_below(rng: &mut ChaCha8Rng, bound: u64) -> u64 {
    debug_assert!(bound > 0);
    let zone = u64::MAX - (u64::MAX % bound);
    loop {
        let v = rng.next_u64();
        if v < zone {
            return v % bound;
        }
    }
}

/// Uniform number with exactly `d` base-`base` digits: leading digit in
/// `[1, base)`, the rest in `[0, base)`.
fn sample_with_digit_count(rng: &mut ChaCha8Rng, d: usize, base: u32) -> BigNumber {
    let mut digits = Vec::with_capacity(d);
    digits.push(1 + uniform_below(rng, base as u64 - 1) as u32);
    for _ in 1..d {
        digits.push(uniform_below(rng, base as u64) as u32);
    }
    BigNumber::from_radix(&RadixDigits { base, sign: Sign::Plus, digits })
        .expect("digits are in range by construction")
}

/// Draws a shared digit length `d` uniform in `[min_digits, max_digits]`
/// and then both operands uniform among `d`-digit numbers. Returns the
/// operands and `d`.
pub fn sample_balanced(
    max_digits: usize,
    min_digits: usize,
    base: u32,
    rng: &mut ChaCha8Rng,
) -> (BigNumber, BigNumber, usize) {
    let span = (max_digits - min_digits + 1) as u64;
    let d = min_digits + uniform_below(rng, span) as usize;
    let n1 = sample_with_digit_count(rng, d, base);
    let n2 = sample_with_digit_count(rng, d, base);
    (n1, n2, d)
}

/// Draws one operand uniform over `[0, base^max_digits - 1]` by drawing
/// every digit independently; leading zeros collapse, which is what
/// concentrates the distribution on the top lengths.
pub fn sample_random(max_digits: usize, base: u32, rng: &mut ChaCha8Rng) -> BigNumber {
    let mut digits = Vec::with_capacity(max_digits);
    for _ in 0..max_digits {
        digits.push(uniform_below(rng, base as u64) as u32);
    }
    let first = digits.iter().position(|&d| d != 0).unwrap_or(max_digits - 1);
    BigNumber::from_radix(&RadixDigits { base, sign: Sign::Plus, digits: digits[first..].to_vec() })
        .expect("digits are in range by construction")
}

/// Base-`base` digit count of a non-negative value (1 for zero).
pub fn digit_count_in_base(n: &BigNumber, base: u32) -> usize {
    n.to_radix(base).map(|rd| rd.digits.len()).unwrap_or(1)
}

/// Renders one question/answer pair from the fixed template. The final
/// `?` is its own whitespace-delimited token.
pub fn render_example(
    n1: &BigNumber,
    n2: &BigNumber,
    op: Operation,
    spec: &OrthographySpec,
) -> Result<Example, CodecError> {
    let e1 = encode(n1, spec)?;
    let e2 = encode(n2, spec)?;
    let answer = encode(&op.apply(n1, n2), spec)?;

    let mut tokens: Vec<String> = vec!["What".into(), "is".into()];
    tokens.extend(e1.iter().cloned());
    tokens.push(op.word().into());
    tokens.extend(e2.iter().cloned());
    tokens.push("?".into());

    Ok(Example {
        question: TokenSequence::from_tokens(tokens).wire(),
        answer: answer.wire(),
        n1: n1.clone(),
        n2: n2.clone(),
        operation: op,
        digits1: digit_count_in_base(n1, spec.base),
        digits2: digit_count_in_base(n2, spec.base),
        spec: spec.clone(),
        seed_lineage: (0, 0),
    })
}

/// Generates a full split. Deterministic for `(cfg, spec, op, split)`;
/// examples are sampled independently, so duplicates may occur. With
/// `require_operand_digits_over`, draws are repeated until the longer
/// operand exceeds the threshold.
pub fn generate_dataset(
    cfg: &SamplingConfig,
    spec: &OrthographySpec,
    op: Operation,
    split: &str,
    require_operand_digits_over: Option<usize>,
) -> Result<Dataset, GenError> {
    cfg.validate()?;
    spec.validate().map_err(GenError::Codec)?;
    if cfg.base != spec.base {
        return Err(GenError::InvalidConfig(format!(
            "sampling base {} and orthography base {} disagree",
            cfg.base, spec.base
        )));
    }

    let examples: Vec<Example> = (0..cfg.count as u64)
        .into_par_iter()
        .map(|i| generate_one(cfg, spec, op, i, require_operand_digits_over))
        .collect::<Result<_, _>>()?;

    let digest = hex::encode(Sha256::digest(jsonl_bytes(&examples)?));
    let manifest = DatasetManifest {
        schema_version: SCHEMA_VERSION,
        split: split.to_owned(),
        count: cfg.count,
        seed: cfg.seed,
        method: cfg.method,
        min_digits: cfg.min_digits,
        max_digits: cfg.max_digits,
        base: cfg.base,
        operation: op,
        orthography: spec.clone(),
        require_operand_digits_over,
        content_digest: digest,
    };
    Ok(Dataset { examples, manifest })
}

fn generate_one(
    cfg: &SamplingConfig,
    spec: &OrthographySpec,
    op: Operation,
    index: u64,
    require_operand_digits_over: Option<usize>,
) -> Result<Example, GenError> {
    let mut rng = example_rng(cfg.seed, index);
    loop {
        let (n1, n2) = match cfg.method {
            SamplingMethod::Balanced => {
                let (n1, n2, _) =
                    sample_balanced(cfg.max_digits, cfg.min_digits, cfg.base, &mut rng);
                (n1, n2)
            }
            SamplingMethod::Random => (
                sample_random(cfg.max_digits, cfg.base, &mut rng),
                sample_random(cfg.max_digits, cfg.base, &mut rng),
            ),
        };
        let mut example = render_example(&n1, &n2, op, spec)?;
        example.seed_lineage = (cfg.seed, index);
        if let Some(threshold) = require_operand_digits_over {
            if example.digits1.max(example.digits2) <= threshold {
                continue;
            }
        }
        return Ok(example);
    }
}

/// Every addition/subtraction pair `(a, b)` with `a, b` in `[lo, hi]`,
/// in row-major order. This is the exhaustive small-digit protocol used
/// for the two-digit training experiments.
pub fn exhaustive_pairs(
    lo: u64,
    hi: u64,
    op: Operation,
    spec: &OrthographySpec,
) -> Result<Vec<Example>, GenError> {
    spec.validate().map_err(GenError::Codec)?;
    let side = hi - lo + 1;
    (0..side * side)
        .map(|i| {
            let a = BigNumber::from_u64(lo + i / side);
            let b = BigNumber::from_u64(lo + i % side);
            let mut e = render_example(&a, &b, op, spec)?;
            e.seed_lineage = (0, i);
            Ok(e)
        })
        .collect()
}

/// Re-derives every answer from the operands and checks it against the
/// stored wire string, decoding included. Returns the index of the
/// first offending example.
pub fn verify_dataset(examples: &[Example]) -> Result<(), usize> {
    for (i, e) in examples.iter().enumerate() {
        let expected = e.operation.apply(&e.n1, &e.n2);
        let decoded =
            crate::orthography::decode(&TokenSequence::from_wire(&e.answer), &e.spec);
        match decoded {
            Ok(v) if v == expected => {}
            _ => return Err(i),
        }
        match encode(&expected, &e.spec) {
            Ok(t) if t.wire() == e.answer => {}
            _ => return Err(i),
        }
    }
    Ok(())
}

/// JSONL bytes of the examples, one record per line, UTF-8.
pub fn jsonl_bytes(examples: &[Example]) -> Result<Vec<u8>, GenError> {
    let mut out = Vec::new();
    for e in examples {
        serde_json::to_writer(&mut out, &ExampleRecord::from(e))?;
        out.push(b'\n');
    }
    Ok(out)
}

/// The manifest path that pairs with a dataset path: same stem,
/// `.manifest.json` extension.
pub fn manifest_path(dataset_path: &Path) -> PathBuf {
    let stem = dataset_path.file_stem().unwrap_or_default().to_string_lossy();
    dataset_path.with_file_name(format!("{stem}.manifest.json"))
}

impl Dataset {
    /// Writes `<path>` as JSONL plus `<stem>.manifest.json` alongside.
    pub fn write(&self, path: &Path) -> Result<(), GenError> {
        let bytes = jsonl_bytes(&self.examples)?;
        debug_assert_eq!(hex::encode(Sha256::digest(&bytes)), self.manifest.content_digest);
        let mut f = fs::File::create(path)?;
        f.write_all(&bytes)?;
        let mut mf = fs::File::create(manifest_path(path))?;
        serde_json::to_writer_pretty(&mut mf, &self.manifest)?;
        mf.write_all(b"\n")?;
        Ok(())
    }
}

/// Reads a JSONL dataset written by [`Dataset::write`] (or produced by
/// an external harness with the same schema).
pub fn read_examples(path: &Path) -> Result<Vec<ExampleRecord>, GenError> {
    let content = fs::read_to_string(path)?;
    content
        .lines()
        .filter(|l| !l.trim().is_empty())
        .map(|l| serde_json::from_str(l).map_err(GenError::Json))
        .collect()
}

/// Reads predictions as JSONL records of `{index, prediction}`.
pub fn read_predictions(path: &Path) -> Result<Vec<PredictionRecord>, GenError> {
    let content = fs::read_to_string(path)?;
    content
        .lines()
        .filter(|l| !l.trim().is_empty())
        .map(|l| serde_json::from_str(l).map_err(GenError::Json))
        .collect()
}

/// Writes predictions in the import format, one record per line.
pub fn write_predictions(path: &Path, predictions: &[PredictionRecord]) -> Result<(), GenError> {
    let mut out = Vec::new();
    for p in predictions {
        serde_json::to_writer(&mut out, p)?;
        out.push(b'\n');
    }
    fs::write(path, out)?;
    Ok(())
}
