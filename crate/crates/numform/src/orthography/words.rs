//! English short-scale cardinals: `832` ⇄ `eight hundred thirty-two`.
//!
//! The dialect is fixed: no "and", tens-units hyphenated into a single
//! token, scale words from `thousand` up to `vigintillion` (10^63),
//! negatives prefixed with `minus`. Parsing accepts exactly the
//! generator's image: scale groups must be strictly descending and each
//! group value must be in `[1, 999]`.

use super::{CodecError, MalformedReason, TokenSequence};
use crate::bignum::{BigNumber, Sign};

const ONES: [&str; 20] = [
    "zero", "one", "two", "three", "four", "five", "six", "seven", "eight", "nine", "ten",
    "eleven", "twelve", "thirteen", "fourteen", "fifteen", "sixteen", "seventeen", "eighteen",
    "nineteen",
];

const TENS: [&str; 10] = [
    "", "", "twenty", "thirty", "forty", "fifty", "sixty", "seventy", "eighty", "ninety",
];

/// Scale words by thousands-group index; index 21 is 10^63.
const SCALES: [&str; 22] = [
    "",
    "thousand",
    "million",
    "billion",
    "trillion",
    "quadrillion",
    "quintillion",
    "sextillion",
    "septillion",
    "octillion",
    "nonillion",
    "decillion",
    "undecillion",
    "duodecillion",
    "tredecillion",
    "quattuordecillion",
    "quindecillion",
    "sexdecillion",
    "septendecillion",
    "octodecillion",
    "novemdecillion",
    "vigintillion",
];

/// Supported magnitudes are below 10^64, i.e. at most 64 digits.
const MAX_DIGITS: usize = 64;

/// Renders a value as whitespace-separated cardinal tokens.
pub fn number_to_words(n: &BigNumber) -> Result<TokenSequence, CodecError> {
    if n.digit_count() > MAX_DIGITS {
        return Err(CodecError::WordsOutOfRange);
    }
    if n.is_zero() {
        return Ok(TokenSequence::from_tokens(["zero"]));
    }

    let mut tokens: Vec<String> = Vec::new();
    if n.is_negative() {
        tokens.push("minus".to_owned());
    }

    let digits = n.magnitude();
    let total_groups = digits.len().div_ceil(3);
    let mut idx = 0;
    for p in 0..total_groups {
        let take = if p == 0 { digits.len() - 3 * (total_groups - 1) } else { 3 };
        let val = digits[idx..idx + take]
            .iter()
            .fold(0u32, |acc, &d| acc * 10 + d as u32);
        idx += take;
        if val == 0 {
            continue;
        }
        push_three_digit(val, &mut tokens);
        let scale = total_groups - 1 - p;
        if scale > 0 {
            tokens.push(SCALES[scale].to_owned());
        }
    }
    Ok(TokenSequence::from_tokens(tokens))
}

fn push_three_digit(v: u32, tokens: &mut Vec<String>) {
    debug_assert!((1..=999).contains(&v));
    let hundreds = v / 100;
    let rest = v % 100;
    if hundreds > 0 {
        tokens.push(ONES[hundreds as usize].to_owned());
        tokens.push("hundred".to_owned());
    }
    if rest > 0 {
        tokens.push(below_hundred(rest));
    }
}

fn below_hundred(v: u32) -> String {
    debug_assert!((1..=99).contains(&v));
    if v < 20 {
        ONES[v as usize].to_owned()
    } else {
        let tens = (v / 10) as usize;
        let unit = v % 10;
        if unit == 0 {
            TENS[tens].to_owned()
        } else {
            format!("{}-{}", TENS[tens], ONES[unit as usize])
        }
    }
}

/// Parses cardinal tokens back into a value; inverse of
/// [`number_to_words`] on its image.
pub fn words_to_number(t: &TokenSequence) -> Result<BigNumber, CodecError> {
    parse_words(t.tokens())
}

pub(super) fn parse_words(tokens: &[String]) -> Result<BigNumber, CodecError> {
    if tokens.is_empty() {
        return Err(MalformedReason::EmptyInput.into());
    }
    let (negative, body) = if tokens[0] == "minus" {
        (true, &tokens[1..])
    } else {
        (false, tokens)
    };
    if body.is_empty() {
        return Err(MalformedReason::MissingDigits.into());
    }
    if body.len() == 1 && body[0] == "zero" {
        if negative {
            return Err(MalformedReason::NegativeZero.into());
        }
        return Ok(BigNumber::zero());
    }

    let mut acc = BigNumber::zero();
    let mut i = 0;
    let mut prev_scale: Option<usize> = None;
    while i < body.len() {
        let (part, next) = parse_part(body, i)?;
        i = next;
        let scale = match body.get(i).and_then(|t| scale_index(t)) {
            Some(g) => {
                i += 1;
                g
            }
            None => 0,
        };
        if scale == 0 && i != body.len() {
            // a scale-less group can only be the final units group
            return Err(MalformedReason::IllFormedScale(body[i].clone()).into());
        }
        if let Some(prev) = prev_scale {
            if scale >= prev {
                return Err(MalformedReason::IllFormedScale(SCALES[scale].to_owned()).into());
            }
        }
        prev_scale = Some(scale);
        acc = acc.add(&shifted_group(part, scale));
    }

    Ok(if negative { acc.negate() } else { acc })
}

fn shifted_group(part: u32, scale: usize) -> BigNumber {
    let mut digits = BigNumber::from_u64(part as u64).magnitude().to_vec();
    digits.extend(std::iter::repeat(0u8).take(3 * scale));
    BigNumber::from_parts(Sign::Plus, digits)
}

/// One value group in `[1, 999]`: `[unit "hundred"] [below-hundred]`.
fn parse_part(body: &[String], mut i: usize) -> Result<(u32, usize), CodecError> {
    let first = &body[i];
    if first == "hundred" || first == "zero" || first == "minus" {
        return Err(MalformedReason::IllFormedScale(first.clone()).into());
    }
    let (v0, is_unit) = number_word(first)?;
    i += 1;

    if body.get(i).map(String::as_str) == Some("hundred") {
        // only a bare unit may precede "hundred": "thirty hundred" and
        // "seventeen hundred" are outside the image
        if !is_unit {
            return Err(MalformedReason::IllFormedScale("hundred".to_owned()).into());
        }
        i += 1;
        let mut part = v0 * 100;
        if let Some(tok) = body.get(i) {
            if let Ok((v, _)) = number_word(tok) {
                part += v;
                i += 1;
                if body.get(i).map(String::as_str) == Some("hundred") {
                    return Err(MalformedReason::IllFormedScale("hundred".to_owned()).into());
                }
            }
        }
        Ok((part, i))
    } else {
        Ok((v0, i))
    }
}

/// Value of a below-hundred word. The second field marks bare units
/// (one..nine), the only words allowed before "hundred".
fn number_word(token: &str) -> Result<(u32, bool), CodecError> {
    if let Some(p) = ONES.iter().position(|&w| w == token) {
        if p == 0 {
            return Err(MalformedReason::IllFormedScale(token.to_owned()).into());
        }
        return Ok((p as u32, p <= 9));
    }
    if let Some(t) = TENS.iter().position(|&w| w == token) {
        return Ok((t as u32 * 10, false));
    }
    if let Some((tens, unit)) = token.split_once('-') {
        let t = TENS.iter().position(|&w| w == tens);
        let u = ONES.iter().position(|&w| w == unit);
        if let (Some(t), Some(u)) = (t, u) {
            if t >= 2 && (1..=9).contains(&u) {
                return Ok(((t * 10 + u) as u32, false));
            }
        }
    }
    Err(MalformedReason::UnknownToken(token.to_owned()).into())
}

fn scale_index(token: &str) -> Option<usize> {
    SCALES[1..].iter().position(|&w| w == token).map(|p| p + 1)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn n(s: &str) -> BigNumber {
        BigNumber::from_decimal_string(s).unwrap()
    }

    fn to_words(s: &str) -> String {
        number_to_words(&n(s)).unwrap().wire()
    }

    fn from_words(s: &str) -> Result<BigNumber, CodecError> {
        parse_words(&TokenSequence::from_wire(s).tokens().to_vec())
    }

    #[test]
    fn renders_reference_values() {
        assert_eq!(to_words("832"), "eight hundred thirty-two");
        assert_eq!(to_words("0"), "zero");
        assert_eq!(to_words("1000000"), "one million");
        assert_eq!(to_words("-165"), "minus one hundred sixty-five");
        assert_eq!(to_words("32"), "thirty-two");
        assert_eq!(to_words("15"), "fifteen");
        assert_eq!(to_words("90"), "ninety");
        assert_eq!(to_words("100"), "one hundred");
        assert_eq!(to_words("1001"), "one thousand one");
        assert_eq!(to_words("1100"), "one thousand one hundred");
        assert_eq!(
            to_words("123456789"),
            "one hundred twenty-three million four hundred fifty-six thousand seven hundred eighty-nine"
        );
        assert_eq!(to_words(&("1".to_owned() + &"0".repeat(63))), "one vigintillion");
    }

    #[test]
    fn parses_reference_values() {
        assert_eq!(from_words("minus one hundred sixty-five").unwrap(), n("-165"));
        assert_eq!(from_words("zero").unwrap(), n("0"));
        assert_eq!(from_words("eight hundred thirty-two").unwrap(), n("832"));
        assert_eq!(from_words("one million").unwrap(), n("1000000"));
        assert_eq!(from_words("one thousand one").unwrap(), n("1001"));
    }

    #[test]
    fn rejects_ill_formed_scale_structures() {
        assert!(from_words("thirty hundred").is_err());
        assert!(from_words("seventeen hundred").is_err());
        assert!(from_words("hundred").is_err());
        assert!(from_words("one thousand two million").is_err());
        assert!(from_words("one million one million").is_err());
        assert!(from_words("one two").is_err());
        assert!(from_words("twenty three").is_err());
        assert!(from_words("minus zero").is_err());
        assert!(from_words("one hundred and one").is_err());
        assert!(from_words("zero one").is_err());
        assert!(from_words("minus").is_err());
        assert!(from_words("twenty-ten").is_err());
        assert!(from_words("twenty-").is_err());
        assert!(from_words("one hundred two hundred").is_err());
    }

    #[test]
    fn round_trips_magnitude_boundaries() {
        let sixty_four_nines = "9".repeat(64);
        for s in ["1", "19", "20", "21", "99", "100", "101", "999", "1000", "999999",
            "1000000", "1000001", sixty_four_nines.as_str()]
        {
            let v = n(s);
            let w = number_to_words(&v).unwrap();
            assert_eq!(words_to_number(&w).unwrap(), v, "{s} via {:?}", w.wire());
            let m = v.negate();
            let w = number_to_words(&m).unwrap();
            assert_eq!(words_to_number(&w).unwrap(), m);
        }
    }

    #[test]
    fn rejects_values_of_65_digits_or_more() {
        let too_big = n(&"1".repeat(65));
        assert_eq!(number_to_words(&too_big).unwrap_err(), CodecError::WordsOutOfRange);
        let max_ok = n(&"9".repeat(64));
        assert!(number_to_words(&max_ok).is_ok());
    }
}
