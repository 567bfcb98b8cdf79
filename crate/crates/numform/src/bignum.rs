//! Exact signed integers of unbounded magnitude.
//!
//! Values are stored as base-10 digits, most significant first, with no
//! leading zeros; zero is the single digit `0` with positive sign. Only
//! the operations the arithmetic tasks need exist here: addition,
//! subtraction, comparison, and conversion to and from other radices.

use std::cmp::Ordering;
use std::fmt;
use std::str::FromStr;

/// Sign of a [`BigNumber`]. Zero is always `Plus`.
#[derive(Clone, Copy, PartialEq, Eq, Debug, Hash)]
pub enum Sign {
    Plus,
    Minus,
}

/// An exact signed integer. Digits are base 10, most significant first.
#[derive(Clone, PartialEq, Eq, Debug, Hash)]
pub struct BigNumber {
    sign: Sign,
    magnitude: Vec<u8>,
}

/// A signed integer expressed in an arbitrary base `>= 2`.
///
/// Digit values are in `[0, base)`, most significant first, with no
/// leading zeros except the canonical zero `[0]`.
#[derive(Clone, PartialEq, Eq, Debug)]
pub struct RadixDigits {
    pub base: u32,
    pub sign: Sign,
    pub digits: Vec<u32>,
}

/// Error from [`BigNumber::from_decimal_string`], pointing at the byte
/// offset of the offending character.
#[derive(Clone, PartialEq, Eq, Debug)]
pub struct ParseNumberError {
    pub position: usize,
    pub kind: ParseErrorKind,
}

#[derive(Clone, PartialEq, Eq, Debug)]
pub enum ParseErrorKind {
    Empty,
    BareMinus,
    InvalidCharacter(char),
}

impl fmt::Display for ParseNumberError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match &self.kind {
            ParseErrorKind::Empty => write!(f, "empty decimal string"),
            ParseErrorKind::BareMinus => write!(f, "bare '-' with no digits"),
            ParseErrorKind::InvalidCharacter(c) => {
                write!(f, "invalid character {c:?} at position {}", self.position)
            }
        }
    }
}

impl std::error::Error for ParseNumberError {}

/// Error from radix conversions.
#[derive(Clone, PartialEq, Eq, Debug)]
pub enum RadixError {
    InvalidBase(u32),
    DigitOutOfRange { digit: u32, base: u32 },
    EmptyDigits,
}

impl fmt::Display for RadixError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            RadixError::InvalidBase(b) => write!(f, "invalid base {b}, must be >= 2"),
            RadixError::DigitOutOfRange { digit, base } => {
                write!(f, "digit {digit} out of range for base {base}")
            }
            RadixError::EmptyDigits => write!(f, "digit sequence is empty"),
        }
    }
}

impl std::error::Error for RadixError {}

impl BigNumber {
    pub fn zero() -> Self {
        BigNumber { sign: Sign::Plus, magnitude: vec![0] }
    }

    pub fn from_u64(mut v: u64) -> Self {
        if v == 0 {
            return Self::zero();
        }
        let mut digits = Vec::new();
        while v > 0 {
            digits.push((v % 10) as u8);
            v /= 10;
        }
        digits.reverse();
        BigNumber { sign: Sign::Plus, magnitude: digits }
    }

    pub fn from_i64(v: i64) -> Self {
        let n = Self::from_u64(v.unsigned_abs());
        if v < 0 {
            n.negate()
        } else {
            n
        }
    }

    /// Parses an optional `-` followed by one or more decimal digits.
    /// Leading zeros are stripped; `-0` canonicalizes to zero.
    pub fn from_decimal_string(s: &str) -> Result<Self, ParseNumberError> {
        if s.is_empty() {
            return Err(ParseNumberError { position: 0, kind: ParseErrorKind::Empty });
        }
        let (sign, digits_part, offset) = match s.strip_prefix('-') {
            Some(rest) => (Sign::Minus, rest, 1),
            None => (Sign::Plus, s, 0),
        };
        if digits_part.is_empty() {
            return Err(ParseNumberError { position: 0, kind: ParseErrorKind::BareMinus });
        }
        let mut magnitude = Vec::with_capacity(digits_part.len());
        for (i, c) in digits_part.char_indices() {
            match c.to_digit(10) {
                Some(d) => magnitude.push(d as u8),
                None => {
                    return Err(ParseNumberError {
                        position: offset + i,
                        kind: ParseErrorKind::InvalidCharacter(c),
                    })
                }
            }
        }
        Ok(Self::from_parts(sign, magnitude))
    }

    /// Builds a canonical value from a sign and MSF digits, stripping
    /// leading zeros and normalizing zero to positive sign.
    pub fn from_parts(sign: Sign, mut magnitude: Vec<u8>) -> Self {
        let first_nonzero = magnitude.iter().position(|&d| d != 0);
        match first_nonzero {
            Some(i) => {
                magnitude.drain(..i);
                BigNumber { sign, magnitude }
            }
            None => Self::zero(),
        }
    }

    pub fn to_decimal_string(&self) -> String {
        let mut s = String::with_capacity(self.magnitude.len() + 1);
        if self.sign == Sign::Minus {
            s.push('-');
        }
        for &d in &self.magnitude {
            s.push((b'0' + d) as char);
        }
        s
    }

    pub fn sign(&self) -> Sign {
        self.sign
    }

    /// Base-10 digits, most significant first.
    pub fn magnitude(&self) -> &[u8] {
        &self.magnitude
    }

    /// Number of base-10 digits in the magnitude (1 for zero).
    pub fn digit_count(&self) -> usize {
        self.magnitude.len()
    }

    pub fn is_zero(&self) -> bool {
        self.magnitude == [0]
    }

    pub fn is_negative(&self) -> bool {
        self.sign == Sign::Minus
    }

    /// True iff the canonical-form invariants hold: non-empty magnitude,
    /// digits < 10, no leading zero except for zero itself, and zero has
    /// positive sign.
    pub fn is_canonical(&self) -> bool {
        if self.magnitude.is_empty() {
            return false;
        }
        if self.magnitude.iter().any(|&d| d > 9) {
            return false;
        }
        if self.magnitude.len() > 1 && self.magnitude[0] == 0 {
            return false;
        }
        if self.magnitude == [0] && self.sign == Sign::Minus {
            return false;
        }
        true
    }

    pub fn negate(&self) -> Self {
        if self.is_zero() {
            self.clone()
        } else {
            BigNumber {
                sign: if self.sign == Sign::Plus { Sign::Minus } else { Sign::Plus },
                magnitude: self.magnitude.clone(),
            }
        }
    }

    pub fn abs(&self) -> Self {
        BigNumber { sign: Sign::Plus, magnitude: self.magnitude.clone() }
    }

    /// Exact sum.
    pub fn add(&self, other: &Self) -> Self {
        if self.sign == other.sign {
            BigNumber {
                sign: self.sign,
                magnitude: add_magnitudes(&self.magnitude, &other.magnitude),
            }
            .renormalize()
        } else {
            // a + (-b) = a - b with the dominant magnitude deciding the sign
            match cmp_magnitudes(&self.magnitude, &other.magnitude) {
                Ordering::Equal => Self::zero(),
                Ordering::Greater => BigNumber {
                    sign: self.sign,
                    magnitude: sub_magnitudes(&self.magnitude, &other.magnitude),
                },
                Ordering::Less => BigNumber {
                    sign: other.sign,
                    magnitude: sub_magnitudes(&other.magnitude, &self.magnitude),
                },
            }
        }
    }

    /// Exact difference; may be negative.
    pub fn sub(&self, other: &Self) -> Self {
        self.add(&other.negate())
    }

    /// Converts to digits in `base`; round-trips exactly with
    /// [`BigNumber::from_radix`].
    pub fn to_radix(&self, base: u32) -> Result<RadixDigits, RadixError> {
        if base < 2 {
            return Err(RadixError::InvalidBase(base));
        }
        if self.is_zero() {
            return Ok(RadixDigits { base, sign: Sign::Plus, digits: vec![0] });
        }
        let mut quotient = self.magnitude.clone();
        let mut digits = Vec::new();
        while !quotient.is_empty() {
            let (q, r) = div_magnitude_small(&quotient, base);
            digits.push(r);
            quotient = q;
        }
        digits.reverse();
        Ok(RadixDigits { base, sign: self.sign, digits })
    }

    /// Exact value of a digit sequence; inverse of [`BigNumber::to_radix`].
    pub fn from_radix(d: &RadixDigits) -> Result<Self, RadixError> {
        d.validate()?;
        let mut acc = Self::zero();
        for &digit in &d.digits {
            acc = acc.mul_small(d.base).add(&Self::from_u64(digit as u64));
        }
        if d.sign == Sign::Minus {
            acc = acc.negate();
        }
        Ok(acc)
    }

    /// Number of base-`base` digits needed to cover every number with
    /// `decimal_digits` decimal digits, i.e. `ceil(decimal_digits *
    /// ln(10) / ln(base))`. Computed exactly by converting the largest
    /// such number, so no float rounding can creep in at exact powers.
    pub fn digit_count_for_equivalent(
        decimal_digits: usize,
        base: u32,
    ) -> Result<usize, RadixError> {
        if base < 2 {
            return Err(RadixError::InvalidBase(base));
        }
        assert!(decimal_digits >= 1, "decimal_digits must be >= 1");
        let all_nines = BigNumber { sign: Sign::Plus, magnitude: vec![9; decimal_digits] };
        Ok(all_nines.to_radix(base)?.digits.len())
    }

    /// Multiply by a small factor. Internal plumbing for radix
    /// conversion and position-token powers; not part of the arithmetic
    /// task surface.
    pub(crate) fn mul_small(&self, m: u32) -> Self {
        if m == 0 || self.is_zero() {
            return Self::zero();
        }
        let mut out: Vec<u8> = Vec::with_capacity(self.magnitude.len() + 10);
        let mut carry: u64 = 0;
        for &d in self.magnitude.iter().rev() {
            let cur = d as u64 * m as u64 + carry;
            out.push((cur % 10) as u8);
            carry = cur / 10;
        }
        while carry > 0 {
            out.push((carry % 10) as u8);
            carry /= 10;
        }
        out.reverse();
        BigNumber { sign: self.sign, magnitude: out }
    }

    fn renormalize(self) -> Self {
        Self::from_parts(self.sign, self.magnitude)
    }
}

impl RadixDigits {
    /// Checks the digit-range and canonical-form invariants.
    pub fn validate(&self) -> Result<(), RadixError> {
        if self.base < 2 {
            return Err(RadixError::InvalidBase(self.base));
        }
        if self.digits.is_empty() {
            return Err(RadixError::EmptyDigits);
        }
        for &d in &self.digits {
            if d >= self.base {
                return Err(RadixError::DigitOutOfRange { digit: d, base: self.base });
            }
        }
        Ok(())
    }

    /// True iff there is no leading zero (except canonical zero) and
    /// zero carries positive sign.
    pub fn is_canonical(&self) -> bool {
        if self.validate().is_err() {
            return false;
        }
        if self.digits.len() > 1 && self.digits[0] == 0 {
            return false;
        }
        if self.digits == [0] && self.sign == Sign::Minus {
            return false;
        }
        true
    }
}

impl fmt::Display for BigNumber {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.to_decimal_string())
    }
}

impl FromStr for BigNumber {
    type Err = ParseNumberError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        Self::from_decimal_string(s)
    }
}

impl PartialOrd for BigNumber {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

impl Ord for BigNumber {
    fn cmp(&self, other: &Self) -> Ordering {
        match (self.sign, other.sign) {
            (Sign::Plus, Sign::Minus) => Ordering::Greater,
            (Sign::Minus, Sign::Plus) => Ordering::Less,
            (Sign::Plus, Sign::Plus) => cmp_magnitudes(&self.magnitude, &other.magnitude),
            (Sign::Minus, Sign::Minus) => {
                cmp_magnitudes(&other.magnitude, &self.magnitude)
            }
        }
    }
}

impl std::ops::Add for &BigNumber {
    type Output = BigNumber;

    fn add(self, rhs: &BigNumber) -> BigNumber {
        BigNumber::add(self, rhs)
    }
}

impl std::ops::Sub for &BigNumber {
    type Output = BigNumber;

    fn sub(self, rhs: &BigNumber) -> BigNumber {
        BigNumber::sub(self, rhs)
    }
}

impl std::ops::Neg for &BigNumber {
    type Output = BigNumber;

    fn neg(self) -> BigNumber {
        self.negate()
    }
}

fn cmp_magnitudes(a: &[u8], b: &[u8]) -> Ordering {
    if a.len() != b.len() {
        return a.len().cmp(&b.len());
    }
    a.cmp(b)
}

fn add_magnitudes(a: &[u8], b: &[u8]) -> Vec<u8> {
    let mut out = Vec::with_capacity(a.len().max(b.len()) + 1);
    let mut carry = 0u8;
    let mut ia = a.iter().rev();
    let mut ib = b.iter().rev();
    loop {
        match (ia.next(), ib.next()) {
            (None, None) => break,
            (da, db) => {
                let sum = da.copied().unwrap_or(0) + db.copied().unwrap_or(0) + carry;
                out.push(sum % 10);
                carry = sum / 10;
            }
        }
    }
    if carry > 0 {
        out.push(carry);
    }
    out.reverse();
    out
}

/// Requires `a >= b` digit-wise; borrows propagate left to right.
fn sub_magnitudes(a: &[u8], b: &[u8]) -> Vec<u8> {
    debug_assert!(cmp_magnitudes(a, b) != Ordering::Less);
    let mut out = Vec::with_capacity(a.len());
    let mut borrow = 0i8;
    let mut ib = b.iter().rev();
    for &da in a.iter().rev() {
        let db = ib.next().copied().unwrap_or(0);
        let mut diff = da as i8 - db as i8 - borrow;
        if diff < 0 {
            diff += 10;
            borrow = 1;
        } else {
            borrow = 0;
        }
        out.push(diff as u8);
    }
    while out.len() > 1 && *out.last().unwrap() == 0 {
        out.pop();
    }
    out.reverse();
    out
}

/// Short division of an MSF decimal digit vector by a small divisor.
/// Returns (quotient digits, remainder); the quotient is empty when the
/// value is smaller than the divisor.
fn div_magnitude_small(digits: &[u8], divisor: u32) -> (Vec<u8>, u32) {
    let mut quotient = Vec::with_capacity(digits.len());
    let mut rem: u64 = 0;
    for &d in digits {
        let cur = rem * 10 + d as u64;
        quotient.push((cur / divisor as u64) as u8);
        rem = cur % divisor as u64;
    }
    let first_nonzero = quotient.iter().position(|&d| d != 0);
    let quotient = match first_nonzero {
        Some(i) => quotient[i..].to_vec(),
        None => Vec::new(),
    };
    (quotient, rem as u32)
}

#[cfg(test)]
mod tests {
    use super::*;

    // Independent schoolbook reference: least-significant-first digit
    // vectors with explicit carry/borrow bookkeeping. Deliberately kept
    // separate from the implementation above so the two can disagree.
    mod school {
        pub fn to_lsf(mut v: u32) -> Vec<u8> {
            if v == 0 {
                return vec![0];
            }
            let mut out = Vec::new();
            while v > 0 {
                out.push((v % 10) as u8);
                v /= 10;
            }
            out
        }

        pub fn add(a: &[u8], b: &[u8]) -> Vec<u8> {
            let mut out = Vec::new();
            let mut carry = 0;
            for i in 0..a.len().max(b.len()) {
                let da = if i < a.len() { a[i] } else { 0 };
                let db = if i < b.len() { b[i] } else { 0 };
                let s = da + db + carry;
                if s >= 10 {
                    out.push(s - 10);
                    carry = 1;
                } else {
                    out.push(s);
                    carry = 0;
                }
            }
            if carry == 1 {
                out.push(1);
            }
            out
        }

        // requires the value of a >= value of b
        pub fn sub(a: &[u8], b: &[u8]) -> Vec<u8> {
            let mut out = Vec::new();
            let mut borrow = 0i16;
            for i in 0..a.len() {
                let da = a[i] as i16;
                let db = if i < b.len() { b[i] as i16 } else { 0 };
                let mut d = da - db - borrow;
                if d < 0 {
                    d += 10;
                    borrow = 1;
                } else {
                    borrow = 0;
                }
                out.push(d as u8);
            }
            while out.len() > 1 && *out.last().unwrap() == 0 {
                out.pop();
            }
            out
        }

        pub fn to_string(lsf: &[u8]) -> String {
            lsf.iter().rev().map(|d| char::from(b'0' + d)).collect()
        }
    }

    fn n(s: &str) -> BigNumber {
        BigNumber::from_decimal_string(s).unwrap()
    }

    #[test]
    fn parses_canonical_forms() {
        assert_eq!(n("832").magnitude(), &[8, 3, 2]);
        assert_eq!(n("832").sign(), Sign::Plus);
        assert_eq!(n("-0"), BigNumber::zero());
        assert_eq!(n("00200").to_decimal_string(), "200");
        assert_eq!(n("-00200").to_decimal_string(), "-200");
    }

    #[test]
    fn parse_errors_identify_position() {
        let e = BigNumber::from_decimal_string("").unwrap_err();
        assert_eq!(e.kind, ParseErrorKind::Empty);
        let e = BigNumber::from_decimal_string("-").unwrap_err();
        assert_eq!(e.kind, ParseErrorKind::BareMinus);
        let e = BigNumber::from_decimal_string("12a3").unwrap_err();
        assert_eq!(e.position, 2);
        assert_eq!(e.kind, ParseErrorKind::InvalidCharacter('a'));
        let e = BigNumber::from_decimal_string("-4x").unwrap_err();
        assert_eq!(e.position, 2);
        let e = BigNumber::from_decimal_string("+5").unwrap_err();
        assert_eq!(e.position, 0);
        assert_eq!(e.kind, ParseErrorKind::InvalidCharacter('+'));
    }

    #[test]
    fn round_trips_decimal_strings() {
        for s in ["0", "7", "10", "999", "1000000000000000000000000000001"] {
            assert_eq!(n(s).to_decimal_string(), s);
            let neg = format!("-{s}");
            if s != "0" {
                assert_eq!(n(&neg).to_decimal_string(), neg);
            }
        }
    }

    #[test]
    fn adds_the_worked_example() {
        assert_eq!(n("52").add(&n("148")), n("200"));
    }

    #[test]
    fn subtracts_the_worked_example() {
        assert_eq!(n("20").sub(&n("185")), n("-165"));
        assert_eq!(n("20").sub(&n("185")).to_decimal_string(), "-165");
    }

    #[test]
    fn zero_is_additive_identity() {
        for s in ["0", "5", "-5", "123456789123456789123456789"] {
            let x = n(s);
            assert_eq!(x.add(&BigNumber::zero()), x);
            assert_eq!(BigNumber::zero().add(&x), x);
        }
    }

    #[test]
    fn self_difference_is_positive_zero() {
        for s in ["0", "17", "-394", "99999999999999999999"] {
            let x = n(s);
            let d = x.sub(&x);
            assert!(d.is_zero());
            assert_eq!(d.sign(), Sign::Plus);
            assert!(d.is_canonical());
        }
    }

    #[test]
    fn matches_schoolbook_reference_on_small_grid() {
        // The full million-pair sweep lives in the acceptance suite;
        // this keeps a fast slice of it next to the implementation.
        for a in (0u32..1000).step_by(7) {
            for b in (0u32..1000).step_by(13) {
                let (ba, bb) = (BigNumber::from_u64(a as u64), BigNumber::from_u64(b as u64));
                let sum = ba.add(&bb);
                let expected = school::to_string(&school::add(&school::to_lsf(a), &school::to_lsf(b)));
                assert_eq!(sum.to_decimal_string(), expected, "{a} + {b}");

                let (hi, lo) = if a >= b { (a, b) } else { (b, a) };
                let diff = school::to_string(&school::sub(&school::to_lsf(hi), &school::to_lsf(lo)));
                let got = BigNumber::from_u64(hi as u64).sub(&BigNumber::from_u64(lo as u64));
                assert_eq!(got.to_decimal_string(), diff, "{hi} - {lo}");

                // algebraic round-trip
                assert_eq!(ba.sub(&bb).add(&bb), ba, "({a} - {b}) + {b}");
            }
        }
    }

    #[test]
    fn addition_commutes_and_subtraction_antisymmetric() {
        let values = [
            "0", "1", "-1", "999", "-999", "1000", "123456789012345678901234567890",
            "-98765432109876543210",
        ];
        for a in &values {
            for b in &values {
                let (x, y) = (n(a), n(b));
                assert_eq!(x.add(&y), y.add(&x));
                assert_eq!(x.sub(&y), y.sub(&x).negate());
                assert!(x.add(&y).is_canonical());
                assert!(x.sub(&y).is_canonical());
            }
        }
    }

    #[test]
    fn converts_to_binary() {
        let d = n("10").to_radix(2).unwrap();
        assert_eq!(d.digits, vec![1, 0, 1, 0]);
        assert_eq!(d.sign, Sign::Plus);
    }

    #[test]
    fn zero_in_any_base_is_single_zero_digit() {
        for base in [2, 3, 10, 19, 255] {
            let d = BigNumber::zero().to_radix(base).unwrap();
            assert_eq!(d.digits, vec![0]);
            assert_eq!(d.sign, Sign::Plus);
        }
    }

    #[test]
    fn fifteen_decimal_digits_need_twelve_base19_digits() {
        let v = n(&"9".repeat(15));
        let d = v.to_radix(19).unwrap();
        assert_eq!(d.digits.len(), 12);
        assert_eq!(BigNumber::from_radix(&d).unwrap(), v);
    }

    #[test]
    fn from_radix_examples() {
        let three = BigNumber::from_radix(&RadixDigits {
            base: 2,
            sign: Sign::Plus,
            digits: vec![1, 1],
        })
        .unwrap();
        assert_eq!(three, n("3"));

        // 2*9 + 2*3 + 2 = 26
        let v = BigNumber::from_radix(&RadixDigits {
            base: 3,
            sign: Sign::Plus,
            digits: vec![2, 2, 2],
        })
        .unwrap();
        assert_eq!(v, n("26"));
        assert_eq!(v.to_radix(3).unwrap().digits, vec![2, 2, 2]);

        let v = BigNumber::from_radix(&RadixDigits {
            base: 10,
            sign: Sign::Plus,
            digits: vec![8, 3, 2],
        })
        .unwrap();
        assert_eq!(v, n("832"));
    }

    #[test]
    fn from_radix_rejects_bad_digits() {
        let err = BigNumber::from_radix(&RadixDigits {
            base: 3,
            sign: Sign::Plus,
            digits: vec![1, 3],
        })
        .unwrap_err();
        assert_eq!(err, RadixError::DigitOutOfRange { digit: 3, base: 3 });
        let err = BigNumber::from_radix(&RadixDigits {
            base: 1,
            sign: Sign::Plus,
            digits: vec![0],
        })
        .unwrap_err();
        assert_eq!(err, RadixError::InvalidBase(1));
    }

    #[test]
    fn to_radix_rejects_base_below_two() {
        assert_eq!(n("5").to_radix(1).unwrap_err(), RadixError::InvalidBase(1));
        assert_eq!(n("5").to_radix(0).unwrap_err(), RadixError::InvalidBase(0));
    }

    #[test]
    fn digit_budget_for_equivalent_lengths() {
        assert_eq!(BigNumber::digit_count_for_equivalent(15, 10).unwrap(), 15);
        assert_eq!(BigNumber::digit_count_for_equivalent(15, 2).unwrap(), 50);
        assert_eq!(BigNumber::digit_count_for_equivalent(15, 19).unwrap(), 12);
        assert_eq!(BigNumber::digit_count_for_equivalent(15, 3).unwrap(), 32);
        assert_eq!(BigNumber::digit_count_for_equivalent(1, 2).unwrap(), 4);
        assert!(BigNumber::digit_count_for_equivalent(15, 1).is_err());
    }

    #[test]
    fn radix_round_trip_holds_for_negatives() {
        for s in ["-1", "-10", "-123456789012345678901234567890"] {
            for base in [2, 3, 10, 19] {
                let v = n(s);
                let d = v.to_radix(base).unwrap();
                assert!(d.is_canonical());
                assert_eq!(BigNumber::from_radix(&d).unwrap(), v);
            }
        }
    }

    #[test]
    fn ordering_is_sign_and_magnitude_aware() {
        let mut vals: Vec<BigNumber> =
            ["-100", "-2", "0", "3", "99", "100"].iter().map(|s| n(s)).collect();
        let sorted = vals.clone();
        vals.reverse();
        vals.sort();
        assert_eq!(vals, sorted);
    }
}
