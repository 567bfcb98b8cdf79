//! A miniature encoder-decoder transformer, trained from scratch with a
//! hand-written backward pass.
//!
//! The model exists to compare position encodings on small arithmetic
//! tasks: the classic sinusoidal encoding against a position-wise
//! masked embedding that marks each digit's place inside its number,
//! with or without target-side digit positions during training. Widths
//! are small enough that everything runs single-threaded on a CPU, and
//! an f64 mode exists so the backward pass can be verified against
//! central finite differences.

mod checkpoint;
mod data;
mod decoding;
mod layers;
mod model;
mod param;
mod posenc;
mod train;

pub use checkpoint::{load_checkpoint, save_checkpoint, CheckpointMeta, OptimizerState};
pub use data::{
    build_batch, build_vocabulary, digit_annotations, encode_example, encode_examples, Batch,
    EncodedExample, Vocabulary,
};
pub use decoding::{batched_greedy_decode, dataset_accuracy, greedy_decode, DecodeOutcome};
pub use model::{ForwardCache, Microformer};
pub use param::Param;
pub use posenc::{positionwise_masked_embedding, sinusoidal_encoding};
pub use train::{
    gradient_check, split_nine_to_one, train, train_from, training_log_csv, EpochStat,
    GradCheckReport, TrainConfig, TrainOutcome,
};

use crate::orthography::OrthographySpec;
use serde::{Deserialize, Serialize};
use std::fmt;

/// Floating-point type the model runs in. f32 is the training default;
/// f64 exists for gradient checking.
pub trait Real:
    ndarray::NdFloat + num_traits::FromPrimitive + std::iter::Sum + Default
{
    const NAME: &'static str;
    const BYTES: usize;

    fn fr(v: f64) -> Self {
        num_traits::FromPrimitive::from_f64(v).expect("finite literal")
    }

    fn as_f64(self) -> f64;

    fn write_le(self, out: &mut Vec<u8>);

    /// Reads `Self::BYTES` from the front of `bytes`.
    fn read_le(bytes: &[u8]) -> Self;
}

impl Real for f32 {
    const NAME: &'static str = "f32";
    const BYTES: usize = 4;

    fn as_f64(self) -> f64 {
        self as f64
    }

    fn write_le(self, out: &mut Vec<u8>) {
        out.extend_from_slice(&self.to_le_bytes());
    }

    fn read_le(bytes: &[u8]) -> Self {
        f32::from_le_bytes(bytes[..4].try_into().expect("4 bytes"))
    }
}

impl Real for f64 {
    const NAME: &'static str = "f64";
    const BYTES: usize = 8;

    fn as_f64(self) -> f64 {
        self
    }

    fn write_le(self, out: &mut Vec<u8>) {
        out.extend_from_slice(&self.to_le_bytes());
    }

    fn read_le(bytes: &[u8]) -> Self {
        f64::from_le_bytes(bytes[..8].try_into().expect("8 bytes"))
    }
}

/// Which position signal source tokens (and optionally target tokens)
/// receive.
#[derive(Clone, Copy, PartialEq, Eq, Debug, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum PositionMode {
    /// Absolute sine/cosine sequence positions, both sides, train and
    /// inference.
    Sinusoidal,
    /// Ones on a digit-index slice for digit tokens, zeros elsewhere.
    PosMasked,
}

/// Whether digit-position vectors are supplied for the target sequence
/// during training. Inference never provides them.
#[derive(Clone, Copy, PartialEq, Eq, Debug, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum TargetPositionMode {
    WithTgt,
    NoTgt,
}

/// Architecture and tokenization for one model.
#[derive(Clone, PartialEq, Debug, Serialize, Deserialize)]
pub struct ModelConfig {
    pub layers_encoder: usize,
    pub layers_decoder: usize,
    pub model_width: usize,
    pub heads: usize,
    pub feedforward_width: usize,
    pub position_mode: PositionMode,
    pub target_position_mode: TargetPositionMode,
    pub max_sequence_length: usize,
    /// Surface form of the numbers in the task; drives digit-position
    /// annotation of raw token sequences at inference time.
    pub orthography: OrthographySpec,
    pub vocabulary: Vocabulary,
}

impl ModelConfig {
    /// 4+4 layers; width, heads and feedforward sized so two-to-four
    /// digit tasks train in minutes on one core.
    pub fn new(orthography: OrthographySpec, vocabulary: Vocabulary) -> Self {
        ModelConfig {
            layers_encoder: 4,
            layers_decoder: 4,
            model_width: 64,
            heads: 4,
            feedforward_width: 256,
            position_mode: PositionMode::PosMasked,
            target_position_mode: TargetPositionMode::NoTgt,
            max_sequence_length: 64,
            orthography,
            vocabulary,
        }
    }

    pub fn with_width(mut self, model_width: usize, heads: usize, feedforward: usize) -> Self {
        self.model_width = model_width;
        self.heads = heads;
        self.feedforward_width = feedforward;
        self
    }

    pub fn with_layers(mut self, encoder: usize, decoder: usize) -> Self {
        self.layers_encoder = encoder;
        self.layers_decoder = decoder;
        self
    }

    pub fn with_position_mode(mut self, mode: PositionMode) -> Self {
        self.position_mode = mode;
        self
    }

    pub fn with_target_position_mode(mut self, mode: TargetPositionMode) -> Self {
        self.target_position_mode = mode;
        self
    }

    pub fn validate(&self) -> Result<(), ModelError> {
        if self.model_width == 0 || self.heads == 0 || self.model_width % self.heads != 0 {
            return Err(ModelError::ConfigInvalid(format!(
                "width {} must be a positive multiple of heads {}",
                self.model_width, self.heads
            )));
        }
        if self.layers_encoder == 0 || self.layers_decoder == 0 {
            return Err(ModelError::ConfigInvalid("need at least one layer per side".into()));
        }
        if self.vocabulary.len() <= Vocabulary::RESERVED {
            return Err(ModelError::ConfigInvalid("vocabulary has no dataset tokens".into()));
        }
        Ok(())
    }
}

#[derive(Debug, PartialEq)]
pub enum ModelError {
    ConfigInvalid(String),
    OutOfVocabulary(String),
    SequenceTooLong { len: usize, max: usize },
    /// floor(width / digit_count) is zero: the number has more digits
    /// than the embedding has slots.
    NumberTooLongForWidth { digits: usize, width: usize },
    VocabularyOverflow { size: usize, limit: usize },
    Divergence { epoch: usize, loss: f64 },
    CheckpointFormat(String),
    Io(String),
}

impl fmt::Display for ModelError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            ModelError::ConfigInvalid(m) => write!(f, "invalid model config: {m}"),
            ModelError::OutOfVocabulary(t) => write!(f, "token {t:?} is not in the vocabulary"),
            ModelError::SequenceTooLong { len, max } => {
                write!(f, "sequence of {len} tokens exceeds maximum length {max}")
            }
            ModelError::NumberTooLongForWidth { digits, width } => {
                write!(f, "a {digits}-digit number cannot be sliced into width {width}")
            }
            ModelError::VocabularyOverflow { size, limit } => {
                write!(f, "vocabulary of {size} tokens exceeds the limit of {limit}")
            }
            ModelError::Divergence { epoch, loss } => {
                write!(f, "loss became non-finite ({loss}) in epoch {epoch}")
            }
            ModelError::CheckpointFormat(m) => write!(f, "bad checkpoint: {m}"),
            ModelError::Io(m) => write!(f, "io error: {m}"),
        }
    }
}

impl std::error::Error for ModelError {}

impl From<std::io::Error> for ModelError {
    fn from(e: std::io::Error) -> Self {
        ModelError::Io(e.to_string())
    }
}
