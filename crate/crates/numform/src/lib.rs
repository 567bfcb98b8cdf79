//! Exact integer arithmetic, number orthographies, and a miniature
//! encoder-decoder transformer for studying how the surface form of a
//! number affects learned arithmetic.
//!
//! The crate is organized around five building blocks:
//!
//! - [`bignum`] — exact signed integers of unbounded magnitude with
//!   addition, subtraction and radix conversion. Every generated answer
//!   and every value-level diagnostic goes through this module.
//! - [`orthography`] — bidirectional codecs between [`bignum::BigNumber`]
//!   and seven surface forms (plain decimal, digit-per-token, padded
//!   digits, underscore-separated, English words, and two position-token
//!   variants), in regular or inverse digit order and for arbitrary bases.
//! - [`taskgen`] — deterministic, seeded generation of arithmetic
//!   question/answer datasets with JSONL export and reproducibility
//!   manifests.
//! - [`evaluator`] — exact-match scoring with per-length breakdowns,
//!   confidence intervals over repeated runs, and a position-token skip
//!   analyzer for diagnosing truncated ladders in model output.
//! - [`microformer`] — a small encoder-decoder transformer trained from
//!   scratch with manual backpropagation, supporting sinusoidal and
//!   position-wise masked embeddings, with finite-difference gradient
//!   verification.
//!
//! The `examples/` directory contains one runnable program per
//! capability; the `numform` binary exposes the same operations as
//! subcommands for scripting.

pub mod bignum;
pub mod evaluator;
pub mod microformer;
pub mod orthography;
pub mod presets;
pub mod taskgen;

pub use bignum::{BigNumber, RadixDigits, Sign};
pub use orthography::{DigitOrder, OrthographySpec, Scheme, TokenSequence};
