//! Bidirectional codecs between [`BigNumber`] and the surface
//! orthographies used by the arithmetic tasks.
//!
//! Seven schemes are supported; `832` encodes as:
//!
//! | scheme            | surface form                 |
//! |-------------------|------------------------------|
//! | `Decimal`         | `832`                        |
//! | `Character`       | `8 3 2`                      |
//! | `FixedCharacter`  | `0 8 3 2` (max 4 digits)     |
//! | `Underscore`      | `8_3_2`                      |
//! | `Words`           | `eight hundred thirty-two`   |
//! | `TenBased`        | `8 100 3 10 2`               |
//! | `TenEBased`       | `8 10e2 3 10e1 2 10e0`       |
//!
//! Encoding is deterministic; decoding is strict — anything outside the
//! encoder's image is rejected with a [`MalformedReason`], never
//! repaired. The wire form of a token sequence is the tokens joined by
//! single ASCII spaces; that exact string is what enters datasets and
//! what models are expected to emit.

mod decode;
mod words;

pub use words::{number_to_words, words_to_number};

use crate::bignum::{BigNumber, Sign};
use serde::{Deserialize, Serialize};
use std::fmt;

/// Which surface form a number takes.
#[derive(Clone, Copy, PartialEq, Eq, Debug, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Scheme {
    Decimal,
    Character,
    FixedCharacter,
    Underscore,
    Words,
    TenBased,
    TenEBased,
}

impl Scheme {
    pub const ALL: [Scheme; 7] = [
        Scheme::Decimal,
        Scheme::Character,
        Scheme::FixedCharacter,
        Scheme::Underscore,
        Scheme::Words,
        Scheme::TenBased,
        Scheme::TenEBased,
    ];

    /// Schemes that may carry a base other than 10.
    pub fn supports_base(self, base: u32) -> bool {
        base == 10
            || matches!(self, Scheme::Character | Scheme::TenBased | Scheme::TenEBased)
    }
}

impl fmt::Display for Scheme {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let name = match self {
            Scheme::Decimal => "decimal",
            Scheme::Character => "character",
            Scheme::FixedCharacter => "fixed_character",
            Scheme::Underscore => "underscore",
            Scheme::Words => "words",
            Scheme::TenBased => "ten_based",
            Scheme::TenEBased => "ten_e_based",
        };
        f.write_str(name)
    }
}

/// Whether digit groups are emitted most-significant-first (`Regular`)
/// or least-significant-first (`Inverse`).
#[derive(Clone, Copy, PartialEq, Eq, Debug, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum DigitOrder {
    Regular,
    Inverse,
}

impl fmt::Display for DigitOrder {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            DigitOrder::Regular => "regular",
            DigitOrder::Inverse => "inverse",
        })
    }
}

/// Full description of a surface form: scheme, digit order, base, and
/// (for [`Scheme::FixedCharacter`]) the padded width.
#[derive(Clone, PartialEq, Eq, Debug, Serialize, Deserialize)]
pub struct OrthographySpec {
    pub scheme: Scheme,
    pub order: DigitOrder,
    pub base: u32,
    #[serde(skip_serializing_if = "Option::is_none", default)]
    pub max_digits: Option<usize>,
}

impl OrthographySpec {
    pub fn new(scheme: Scheme) -> Self {
        OrthographySpec { scheme, order: DigitOrder::Regular, base: 10, max_digits: None }
    }

    pub fn with_order(mut self, order: DigitOrder) -> Self {
        self.order = order;
        self
    }

    pub fn with_base(mut self, base: u32) -> Self {
        self.base = base;
        self
    }

    pub fn with_max_digits(mut self, max_digits: usize) -> Self {
        self.max_digits = Some(max_digits);
        self
    }

    /// Checks the cross-field invariants. `max_digits` is required for
    /// `FixedCharacter` and rejected elsewhere; only `Character`,
    /// `TenBased`, and `TenEBased` may use a base other than 10; `Words`
    /// has no inverse form.
    pub fn validate(&self) -> Result<(), CodecError> {
        if self.base < 2 {
            return Err(CodecError::InvalidBase(self.base));
        }
        if !self.scheme.supports_base(self.base) {
            return Err(CodecError::BaseNotSupported { scheme: self.scheme, base: self.base });
        }
        match (self.scheme, self.max_digits) {
            (Scheme::FixedCharacter, None) => return Err(CodecError::MissingMaxDigits),
            (Scheme::FixedCharacter, Some(0)) => return Err(CodecError::MissingMaxDigits),
            (Scheme::FixedCharacter, Some(_)) => {}
            (_, Some(_)) => return Err(CodecError::UnexpectedMaxDigits(self.scheme)),
            (_, None) => {}
        }
        if self.scheme == Scheme::Words && self.order == DigitOrder::Inverse {
            return Err(CodecError::WordsInverseUnsupported);
        }
        Ok(())
    }
}

/// An ordered sequence of non-empty, whitespace-free tokens. Joining
/// with single spaces and re-splitting reproduces the sequence exactly.
#[derive(Clone, PartialEq, Eq, Debug, Default)]
pub struct TokenSequence(Vec<String>);

impl TokenSequence {
    /// Builds from tokens; panics if a token is empty or contains
    /// whitespace, since that would break the wire round-trip.
    pub fn from_tokens<I, S>(tokens: I) -> Self
    where
        I: IntoIterator<Item = S>,
        S: Into<String>,
    {
        let tokens: Vec<String> = tokens.into_iter().map(Into::into).collect();
        for t in &tokens {
            assert!(
                !t.is_empty() && !t.chars().any(char::is_whitespace),
                "invalid token {t:?}"
            );
        }
        TokenSequence(tokens)
    }

    /// Splits a wire string on whitespace. Extra whitespace is
    /// normalized away; an all-whitespace string yields an empty
    /// sequence.
    pub fn from_wire(s: &str) -> Self {
        TokenSequence(s.split_whitespace().map(str::to_owned).collect())
    }

    /// Tokens joined by single ASCII spaces.
    pub fn wire(&self) -> String {
        self.0.join(" ")
    }

    pub fn tokens(&self) -> &[String] {
        &self.0
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    pub fn iter(&self) -> std::slice::Iter<'_, String> {
        self.0.iter()
    }
}

impl fmt::Display for TokenSequence {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.wire())
    }
}

/// Why a decoder rejected its input.
#[derive(Clone, PartialEq, Eq, Debug)]
pub enum MalformedReason {
    EmptyInput,
    UnknownToken(String),
    /// A position-token ladder jumped or ended early. `found` is `None`
    /// when the sequence stopped before reaching the expected token.
    PositionTokenGap { expected: String, found: Option<String> },
    PositionTokenDuplicate(String),
    DigitOutOfRange { token: String, base: u32 },
    LeadingZero,
    NegativeZero,
    MissingDigits,
    WrongTokenCount { expected: usize, actual: usize },
    IllFormedScale(String),
}

impl fmt::Display for MalformedReason {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            MalformedReason::EmptyInput => write!(f, "empty input"),
            MalformedReason::UnknownToken(t) => write!(f, "unknown token {t:?}"),
            MalformedReason::PositionTokenGap { expected, found: Some(found) } => {
                write!(f, "position-token gap: expected {expected:?}, found {found:?}")
            }
            MalformedReason::PositionTokenGap { expected, found: None } => {
                write!(f, "position-token gap: {expected:?} missing")
            }
            MalformedReason::PositionTokenDuplicate(t) => {
                write!(f, "duplicate position token {t:?}")
            }
            MalformedReason::DigitOutOfRange { token, base } => {
                write!(f, "digit {token:?} out of range for base {base}")
            }
            MalformedReason::LeadingZero => write!(f, "leading zero is not canonical"),
            MalformedReason::NegativeZero => write!(f, "negative zero is not canonical"),
            MalformedReason::MissingDigits => write!(f, "no digits after sign"),
            MalformedReason::WrongTokenCount { expected, actual } => {
                write!(f, "expected {expected} tokens, found {actual}")
            }
            MalformedReason::IllFormedScale(t) => write!(f, "ill-formed scale around {t:?}"),
        }
    }
}

/// Error from encoding or decoding a surface form.
#[derive(Clone, PartialEq, Eq, Debug)]
pub enum CodecError {
    Malformed(MalformedReason),
    MaxDigitsExceeded { digits: usize, max_digits: usize },
    WordsOutOfRange,
    WordsInverseUnsupported,
    BaseNotSupported { scheme: Scheme, base: u32 },
    InvalidBase(u32),
    MissingMaxDigits,
    UnexpectedMaxDigits(Scheme),
}

impl fmt::Display for CodecError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            CodecError::Malformed(r) => write!(f, "malformed sequence: {r}"),
            CodecError::MaxDigitsExceeded { digits, max_digits } => {
                write!(f, "{digits} digits exceed the fixed width of {max_digits}")
            }
            CodecError::WordsOutOfRange => {
                write!(f, "word form supports magnitudes below 10^64")
            }
            CodecError::WordsInverseUnsupported => {
                write!(f, "word form has no inverse digit order")
            }
            CodecError::BaseNotSupported { scheme, base } => {
                write!(f, "scheme {scheme} does not support base {base}")
            }
            CodecError::InvalidBase(b) => write!(f, "invalid base {b}, must be >= 2"),
            CodecError::MissingMaxDigits => {
                write!(f, "fixed_character requires max_digits >= 1")
            }
            CodecError::UnexpectedMaxDigits(s) => {
                write!(f, "max_digits is only meaningful for fixed_character, not {s}")
            }
        }
    }
}

impl std::error::Error for CodecError {}

impl From<MalformedReason> for CodecError {
    fn from(r: MalformedReason) -> Self {
        CodecError::Malformed(r)
    }
}

/// The explicit place-value token for one digit position: `10e59` for
/// the 59th power, `10e0` for units. No padding, literal `10e` prefix
/// regardless of base.
pub fn position_token(exponent: u64) -> String {
    format!("10e{exponent}")
}

/// Strict inverse of [`position_token`]: the exponent must be a
/// canonical decimal numeral (no leading zeros, no sign).
pub fn parse_position_token(token: &str) -> Option<u64> {
    let digits = token.strip_prefix("10e")?;
    if digits.is_empty() || !digits.bytes().all(|b| b.is_ascii_digit()) {
        return None;
    }
    if digits.len() > 1 && digits.starts_with('0') {
        return None;
    }
    digits.parse().ok()
}

/// Encodes a value into the surface form described by `spec`.
pub fn encode(n: &BigNumber, spec: &OrthographySpec) -> Result<TokenSequence, CodecError> {
    spec.validate()?;
    if spec.scheme == Scheme::Words {
        return number_to_words(n);
    }

    let rd = n.to_radix(spec.base).map_err(|_| CodecError::InvalidBase(spec.base))?;
    let digits = &rd.digits;
    let negative = rd.sign == Sign::Minus;
    let mut tokens: Vec<String> = Vec::new();

    match spec.scheme {
        Scheme::Decimal => {
            let ordered = ordered_digit_values(digits, spec.order);
            let body: String = ordered.iter().map(|d| digit_char(*d)).collect();
            let token = if negative { format!("-{body}") } else { body };
            tokens.push(token);
        }
        Scheme::Character => {
            if negative {
                tokens.push("-".to_owned());
            }
            for d in ordered_digit_values(digits, spec.order) {
                tokens.push(d.to_string());
            }
        }
        Scheme::FixedCharacter => {
            let max = spec.max_digits.expect("validated");
            if digits.len() > max {
                return Err(CodecError::MaxDigitsExceeded {
                    digits: digits.len(),
                    max_digits: max,
                });
            }
            if negative {
                tokens.push("-".to_owned());
            }
            let mut padded = vec![0u32; max - digits.len()];
            padded.extend_from_slice(digits);
            for d in ordered_digit_values(&padded, spec.order) {
                tokens.push(d.to_string());
            }
        }
        Scheme::Underscore => {
            if negative {
                tokens.push("-".to_owned());
            }
            let ordered = ordered_digit_values(digits, spec.order);
            let body: Vec<String> = ordered.iter().map(|d| d.to_string()).collect();
            tokens.push(body.join("_"));
        }
        Scheme::TenBased => {
            if negative {
                tokens.push("-".to_owned());
            }
            let powers = power_strings(spec.base, digits.len());
            let k = digits.len();
            match spec.order {
                DigitOrder::Regular => {
                    for (j, &d) in digits.iter().enumerate() {
                        let exp = k - 1 - j;
                        tokens.push(d.to_string());
                        if exp > 0 {
                            tokens.push(powers[exp].clone());
                        }
                    }
                }
                DigitOrder::Inverse => {
                    for (exp, &d) in digits.iter().rev().enumerate() {
                        tokens.push(d.to_string());
                        if exp > 0 {
                            tokens.push(powers[exp].clone());
                        }
                    }
                }
            }
        }
        Scheme::TenEBased => {
            if negative {
                tokens.push("-".to_owned());
            }
            let k = digits.len();
            match spec.order {
                DigitOrder::Regular => {
                    for (j, &d) in digits.iter().enumerate() {
                        tokens.push(d.to_string());
                        tokens.push(position_token((k - 1 - j) as u64));
                    }
                }
                DigitOrder::Inverse => {
                    for (exp, &d) in digits.iter().rev().enumerate() {
                        tokens.push(d.to_string());
                        tokens.push(position_token(exp as u64));
                    }
                }
            }
        }
        Scheme::Words => unreachable!("handled above"),
    }

    Ok(TokenSequence(tokens))
}

/// Decodes a surface form back into a value; strict inverse of
/// [`encode`] on its image.
pub fn decode(t: &TokenSequence, spec: &OrthographySpec) -> Result<BigNumber, CodecError> {
    spec.validate()?;
    decode::decode_tokens(t.tokens(), spec)
}

fn digit_char(d: u32) -> char {
    debug_assert!(d < 10);
    char::from(b'0' + d as u8)
}

fn ordered_digit_values(digits: &[u32], order: DigitOrder) -> Vec<u32> {
    match order {
        DigitOrder::Regular => digits.to_vec(),
        DigitOrder::Inverse => digits.iter().rev().copied().collect(),
    }
}

/// Decimal strings of base^0 .. base^(count-1).
fn power_strings(base: u32, count: usize) -> Vec<String> {
    let mut out = Vec::with_capacity(count);
    let mut p = BigNumber::from_u64(1);
    for _ in 0..count {
        out.push(p.to_decimal_string());
        p = p.mul_small(base);
    }
    out
}

pub(crate) fn parse_digit_token(token: &str, base: u32) -> Result<u32, MalformedReason> {
    if token.is_empty()
        || !token.bytes().all(|b| b.is_ascii_digit())
        || (token.len() > 1 && token.starts_with('0'))
    {
        return Err(MalformedReason::UnknownToken(token.to_owned()));
    }
    let value: u32 = token
        .parse()
        .map_err(|_| MalformedReason::UnknownToken(token.to_owned()))?;
    if value >= base {
        return Err(MalformedReason::DigitOutOfRange { token: token.to_owned(), base });
    }
    Ok(value)
}
