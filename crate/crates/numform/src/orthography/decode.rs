//! Strict decoders for the token-level surface forms. Each decoder
//! accepts exactly the image of the corresponding encoder; anything
//! else is rejected with a reason rather than repaired.

use super::{
    parse_digit_token, parse_position_token, power_strings, words, CodecError, DigitOrder,
    MalformedReason, OrthographySpec, Scheme,
};
use crate::bignum::{BigNumber, RadixDigits, Sign};

pub(super) fn decode_tokens(
    tokens: &[String],
    spec: &OrthographySpec,
) -> Result<BigNumber, CodecError> {
    if tokens.is_empty() {
        return Err(MalformedReason::EmptyInput.into());
    }
    if spec.scheme == Scheme::Words {
        return words::parse_words(tokens);
    }

    // All remaining schemes share the standalone leading sign token,
    // except Decimal which carries the sign inside its single token.
    let (sign, rest) = if spec.scheme != Scheme::Decimal && tokens[0] == "-" {
        (Sign::Minus, &tokens[1..])
    } else {
        (Sign::Plus, &tokens[..])
    };
    if rest.is_empty() {
        return Err(MalformedReason::MissingDigits.into());
    }

    let digits_msf: Vec<u32> = match spec.scheme {
        Scheme::Decimal => return decode_decimal(tokens, spec.order),
        Scheme::Character => {
            let raw = parse_all_digits(rest, spec.base)?;
            oriented(raw, spec.order)
        }
        Scheme::FixedCharacter => {
            let max = spec.max_digits.expect("validated");
            if rest.len() != max {
                return Err(MalformedReason::WrongTokenCount {
                    expected: max,
                    actual: rest.len(),
                }
                .into());
            }
            let raw = parse_all_digits(rest, spec.base)?;
            let padded = oriented(raw, spec.order);
            strip_padding(padded)
        }
        Scheme::Underscore => {
            if rest.len() != 1 {
                return Err(MalformedReason::WrongTokenCount { expected: 1, actual: rest.len() }
                    .into());
            }
            let parts: Vec<&str> = rest[0].split('_').collect();
            let mut raw = Vec::with_capacity(parts.len());
            for p in &parts {
                if p.len() != 1 || !p.bytes().all(|b| b.is_ascii_digit()) {
                    return Err(MalformedReason::UnknownToken(rest[0].clone()).into());
                }
                raw.push(parse_digit_token(p, spec.base).map_err(CodecError::Malformed)?);
            }
            oriented(raw, spec.order)
        }
        Scheme::TenBased => decode_ten_based(rest, spec)?,
        Scheme::TenEBased => decode_ten_e_based(rest, spec)?,
        Scheme::Words => unreachable!("handled above"),
    };

    finish(sign, digits_msf, spec.base, spec.scheme)
}

fn finish(
    sign: Sign,
    digits: Vec<u32>,
    base: u32,
    scheme: Scheme,
) -> Result<BigNumber, CodecError> {
    if digits.is_empty() {
        return Err(MalformedReason::MissingDigits.into());
    }
    // FixedCharacter strips its padding before this point; everywhere
    // else a leading zero is outside the encoder's image.
    if digits.len() > 1 && digits[0] == 0 {
        debug_assert!(scheme != Scheme::FixedCharacter);
        return Err(MalformedReason::LeadingZero.into());
    }
    if sign == Sign::Minus && digits.iter().all(|&d| d == 0) {
        return Err(MalformedReason::NegativeZero.into());
    }
    BigNumber::from_radix(&RadixDigits { base, sign, digits }).map_err(|e| match e {
        crate::bignum::RadixError::DigitOutOfRange { digit, base } => {
            CodecError::Malformed(MalformedReason::DigitOutOfRange {
                token: digit.to_string(),
                base,
            })
        }
        _ => CodecError::InvalidBase(base),
    })
}

fn parse_all_digits(tokens: &[String], base: u32) -> Result<Vec<u32>, CodecError> {
    tokens
        .iter()
        .map(|t| parse_digit_token(t, base).map_err(CodecError::Malformed))
        .collect()
}

fn oriented(raw: Vec<u32>, order: DigitOrder) -> Vec<u32> {
    match order {
        DigitOrder::Regular => raw,
        DigitOrder::Inverse => raw.into_iter().rev().collect(),
    }
}

fn strip_padding(padded: Vec<u32>) -> Vec<u32> {
    let first = padded.iter().position(|&d| d != 0).unwrap_or(padded.len() - 1);
    padded[first..].to_vec()
}

fn decode_decimal(tokens: &[String], order: DigitOrder) -> Result<BigNumber, CodecError> {
    if tokens.len() != 1 {
        return Err(
            MalformedReason::WrongTokenCount { expected: 1, actual: tokens.len() }.into()
        );
    }
    let token = &tokens[0];
    let (negative, body) = match token.strip_prefix('-') {
        Some(b) => (true, b),
        None => (false, token.as_str()),
    };
    if body.is_empty() {
        return Err(MalformedReason::MissingDigits.into());
    }
    if !body.bytes().all(|b| b.is_ascii_digit()) {
        return Err(MalformedReason::UnknownToken(token.clone()).into());
    }
    let value_form: String = match order {
        DigitOrder::Regular => body.to_owned(),
        DigitOrder::Inverse => body.chars().rev().collect(),
    };
    if value_form.len() > 1 && value_form.starts_with('0') {
        return Err(MalformedReason::LeadingZero.into());
    }
    if negative && value_form.bytes().all(|b| b == b'0') {
        return Err(MalformedReason::NegativeZero.into());
    }
    let full = if negative { format!("-{value_form}") } else { value_form };
    BigNumber::from_decimal_string(&full)
        .map_err(|_| MalformedReason::UnknownToken(token.clone()).into())
}

/// `8 100 3 10 2` style: digits interleaved with decimal renderings of
/// powers of the base, the units power omitted. Every power token must
/// be exactly the expected power for its slot.
fn decode_ten_based(rest: &[String], spec: &OrthographySpec) -> Result<Vec<u32>, CodecError> {
    if rest.len() % 2 == 0 {
        return Err(MalformedReason::WrongTokenCount {
            expected: rest.len() + 1,
            actual: rest.len(),
        }
        .into());
    }
    let k = rest.len() / 2 + 1;
    let powers = power_strings(spec.base, k);
    let mut digits = Vec::with_capacity(k);
    match spec.order {
        DigitOrder::Regular => {
            for j in 0..k {
                let d = parse_digit_token(&rest[2 * j], spec.base)
                    .map_err(CodecError::Malformed)?;
                digits.push(d);
                let exp = k - 1 - j;
                if exp > 0 {
                    expect_power(&rest[2 * j + 1], &powers[exp])?;
                }
            }
        }
        DigitOrder::Inverse => {
            let mut lsf = Vec::with_capacity(k);
            lsf.push(parse_digit_token(&rest[0], spec.base).map_err(CodecError::Malformed)?);
            for exp in 1..k {
                let d = parse_digit_token(&rest[2 * exp - 1], spec.base)
                    .map_err(CodecError::Malformed)?;
                expect_power(&rest[2 * exp], &powers[exp])?;
                lsf.push(d);
            }
            lsf.reverse();
            digits = lsf;
        }
    }
    Ok(digits)
}

fn expect_power(token: &str, expected: &str) -> Result<(), CodecError> {
    if token != expected {
        return Err(MalformedReason::PositionTokenGap {
            expected: expected.to_owned(),
            found: Some(token.to_owned()),
        }
        .into());
    }
    Ok(())
}

/// `8 10e2 3 10e1 2 10e0` style: every digit is followed by its
/// position token and the exponent ladder must be complete.
fn decode_ten_e_based(rest: &[String], spec: &OrthographySpec) -> Result<Vec<u32>, CodecError> {
    if rest.len() % 2 != 0 {
        return Err(MalformedReason::WrongTokenCount {
            expected: rest.len() + 1,
            actual: rest.len(),
        }
        .into());
    }
    let pairs = rest.len() / 2;
    let mut digits_in_emission_order = Vec::with_capacity(pairs);
    let mut exponents = Vec::with_capacity(pairs);
    for p in 0..pairs {
        let d = parse_digit_token(&rest[2 * p], spec.base).map_err(CodecError::Malformed)?;
        let pos_tok = &rest[2 * p + 1];
        let exp = parse_position_token(pos_tok)
            .ok_or_else(|| MalformedReason::UnknownToken(pos_tok.clone()))?;
        digits_in_emission_order.push(d);
        exponents.push(exp);
    }

    // The first position token anchors the ladder; it must then step by
    // one towards (or from) the units place with no gaps or repeats.
    match spec.order {
        DigitOrder::Regular => {
            let anchor = exponents[0];
            for (i, &e) in exponents.iter().enumerate() {
                match anchor.checked_sub(i as u64) {
                    Some(want) if e == want => {}
                    Some(want) => return Err(ladder_error(&exponents, i, want)),
                    // more pairs than the anchor admits
                    None => {
                        return Err(MalformedReason::WrongTokenCount {
                            expected: 2 * (anchor as usize + 1),
                            actual: rest.len(),
                        }
                        .into())
                    }
                }
            }
            let last = *exponents.last().expect("pairs >= 1");
            if last != 0 {
                return Err(MalformedReason::PositionTokenGap {
                    expected: super::position_token(last - 1),
                    found: None,
                }
                .into());
            }
            Ok(digits_in_emission_order)
        }
        DigitOrder::Inverse => {
            for (i, &e) in exponents.iter().enumerate() {
                if e != i as u64 {
                    return Err(ladder_error(&exponents, i, i as u64));
                }
            }
            digits_in_emission_order.reverse();
            Ok(digits_in_emission_order)
        }
    }
}

fn ladder_error(exponents: &[u64], at: usize, expected: u64) -> CodecError {
    let found = exponents[at];
    if exponents[..at].contains(&found) {
        return MalformedReason::PositionTokenDuplicate(super::position_token(found)).into();
    }
    MalformedReason::PositionTokenGap {
        expected: super::position_token(expected),
        found: Some(super::position_token(found)),
    }
    .into()
}
