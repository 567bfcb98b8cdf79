//! Exact-match scoring and failure diagnostics for model predictions.
//!
//! The metric is binary: a prediction scores 1 iff its
//! whitespace-normalized token sequence equals the gold answer's.
//! Incorrect predictions are sorted into exactly one taxonomy bucket
//! (malformed > position skip > length mismatch > wrong digits), and
//! accuracy is broken down by the longer operand's digit count so
//! interpolation/extrapolation behavior is visible per length.

use crate::orthography::{
    decode, parse_position_token, CodecError, MalformedReason, OrthographySpec, TokenSequence,
};
use crate::taskgen::{digit_count_in_base, ExampleRecord, PredictionRecord};
use serde::Serialize;
use std::collections::BTreeMap;
use std::fmt;

/// Scoring-side view of one gold example.
#[derive(Clone, Debug)]
pub struct GoldExample {
    pub answer: String,
    pub digits1: usize,
    pub digits2: usize,
}

impl From<&ExampleRecord> for GoldExample {
    fn from(r: &ExampleRecord) -> Self {
        GoldExample { answer: r.answer.clone(), digits1: r.digits1, digits2: r.digits2 }
    }
}

/// Why an incorrect prediction was wrong, one bucket per example.
#[derive(Clone, Copy, PartialEq, Eq, Debug, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum ErrorKind {
    Malformed,
    PositionSkip,
    LengthMismatch,
    WrongDigits,
}

#[derive(Clone, Copy, PartialEq, Eq, Debug, Default, Serialize)]
pub struct TaxonomyCounts {
    pub malformed: usize,
    pub position_skip: usize,
    pub length_mismatch: usize,
    pub wrong_digits: usize,
}

impl TaxonomyCounts {
    pub fn total(&self) -> usize {
        self.malformed + self.position_skip + self.length_mismatch + self.wrong_digits
    }

    fn bump(&mut self, kind: ErrorKind) {
        match kind {
            ErrorKind::Malformed => self.malformed += 1,
            ErrorKind::PositionSkip => self.position_skip += 1,
            ErrorKind::LengthMismatch => self.length_mismatch += 1,
            ErrorKind::WrongDigits => self.wrong_digits += 1,
        }
    }
}

#[derive(Clone, Copy, PartialEq, Debug, Serialize)]
pub struct LengthBucket {
    pub count: usize,
    pub correct: usize,
    pub accuracy: f64,
}

/// Aggregated scores for one prediction file.
#[derive(Clone, PartialEq, Debug, Serialize)]
pub struct EvalReport {
    pub n: usize,
    pub correct: usize,
    pub overall_accuracy: f64,
    /// Keyed by `max(digits1, digits2)`.
    pub per_length: BTreeMap<usize, LengthBucket>,
    pub taxonomy: TaxonomyCounts,
}

/// Ladder diagnostics for a position-token sequence such as
/// `1 10e2 4 10e1 8 10e0`. `well_formed` holds iff the tokens are an
/// optionally signed alternation of digits and position tokens whose
/// exponents run from the maximum seen down to 0, stepping by one, with
/// no duplicates.
#[derive(Clone, PartialEq, Eq, Debug, Serialize)]
pub struct SkipReport {
    pub max_exponent_seen: Option<u64>,
    /// Exponents absent from `[0, max]`, largest first.
    pub missing_exponents: Vec<u64>,
    pub duplicated_exponents: Vec<u64>,
    pub out_of_order: bool,
    /// Sign/alternation structure parsed cleanly.
    pub structure_ok: bool,
    pub well_formed: bool,
}

/// Mean and 95% half-width over repeated runs.
#[derive(Clone, PartialEq, Debug, Serialize)]
pub struct CISummary {
    pub mean: f64,
    pub half_width: f64,
    pub run_accuracies: Vec<f64>,
}

#[derive(Debug, PartialEq, Eq)]
pub enum EvalError {
    StreamLengthMismatch { predictions: usize, golds: usize },
    EmptyStreams,
    TooFewRuns(usize),
    PredictionIndexOutOfRange { index: usize, n: usize },
    DuplicatePredictionIndex(usize),
    MissingPrediction(usize),
}

impl fmt::Display for EvalError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            EvalError::StreamLengthMismatch { predictions, golds } => {
                write!(f, "{predictions} predictions against {golds} gold examples")
            }
            EvalError::EmptyStreams => write!(f, "no examples to score"),
            EvalError::TooFewRuns(n) => {
                write!(f, "confidence interval needs at least 2 runs, got {n}")
            }
            EvalError::PredictionIndexOutOfRange { index, n } => {
                write!(f, "prediction index {index} out of range for {n} examples")
            }
            EvalError::DuplicatePredictionIndex(i) => {
                write!(f, "duplicate prediction for index {i}")
            }
            EvalError::MissingPrediction(i) => write!(f, "no prediction for index {i}"),
        }
    }
}

impl std::error::Error for EvalError {}

/// 1 iff the whitespace-normalized token sequences are identical.
pub fn exact_match(prediction: &str, gold: &str) -> bool {
    let p: Vec<&str> = prediction.split_whitespace().collect();
    let g: Vec<&str> = gold.split_whitespace().collect();
    p == g
}

/// Scores a prediction stream against golds of equal length.
pub fn evaluate(
    predictions: &[String],
    golds: &[GoldExample],
    spec: &OrthographySpec,
) -> Result<EvalReport, EvalError> {
    if predictions.len() != golds.len() {
        return Err(EvalError::StreamLengthMismatch {
            predictions: predictions.len(),
            golds: golds.len(),
        });
    }
    if golds.is_empty() {
        return Err(EvalError::EmptyStreams);
    }

    let mut correct = 0usize;
    let mut per_length: BTreeMap<usize, (usize, usize)> = BTreeMap::new();
    let mut taxonomy = TaxonomyCounts::default();

    for (pred, gold) in predictions.iter().zip(golds) {
        let key = gold.digits1.max(gold.digits2);
        let bucket = per_length.entry(key).or_insert((0, 0));
        bucket.0 += 1;
        if exact_match(pred, gold.answer.as_str()) {
            bucket.1 += 1;
            correct += 1;
        } else {
            taxonomy.bump(classify_error(pred, gold, spec));
        }
    }

    let n = golds.len();
    let per_length = per_length
        .into_iter()
        .map(|(k, (count, correct))| {
            (k, LengthBucket { count, correct, accuracy: correct as f64 / count as f64 })
        })
        .collect();

    Ok(EvalReport {
        n,
        correct,
        overall_accuracy: correct as f64 / n as f64,
        per_length,
        taxonomy,
    })
}

/// Matches predictions to golds by index; every gold must be covered
/// exactly once.
pub fn align_predictions(
    predictions: &[PredictionRecord],
    n_golds: usize,
) -> Result<Vec<String>, EvalError> {
    let mut slots: Vec<Option<String>> = vec![None; n_golds];
    for p in predictions {
        if p.index >= n_golds {
            return Err(EvalError::PredictionIndexOutOfRange { index: p.index, n: n_golds });
        }
        if slots[p.index].is_some() {
            return Err(EvalError::DuplicatePredictionIndex(p.index));
        }
        slots[p.index] = Some(p.prediction.clone());
    }
    slots
        .into_iter()
        .enumerate()
        .map(|(i, s)| s.ok_or(EvalError::MissingPrediction(i)))
        .collect()
}

/// Buckets an incorrect prediction. Priority: malformed beats position
/// skip beats length mismatch beats wrong digits.
fn classify_error(pred: &str, gold: &GoldExample, spec: &OrthographySpec) -> ErrorKind {
    let pred_tokens = TokenSequence::from_wire(pred);
    match decode(&pred_tokens, spec) {
        Ok(value) => {
            let gold_value = decode(&TokenSequence::from_wire(&gold.answer), spec);
            match gold_value {
                Ok(gv) => {
                    if digit_count_in_base(&value, spec.base)
                        != digit_count_in_base(&gv, spec.base)
                    {
                        ErrorKind::LengthMismatch
                    } else {
                        ErrorKind::WrongDigits
                    }
                }
                Err(_) => ErrorKind::WrongDigits,
            }
        }
        Err(CodecError::Malformed(reason)) => match reason {
            MalformedReason::PositionTokenGap { .. }
            | MalformedReason::PositionTokenDuplicate(_) => {
                // A broken ladder only counts as a skip when the rest of
                // the sequence still parses as digit/position pairs.
                let report = analyze_position_skips(&pred_tokens);
                if report.structure_ok {
                    ErrorKind::PositionSkip
                } else {
                    ErrorKind::Malformed
                }
            }
            _ => ErrorKind::Malformed,
        },
        Err(_) => ErrorKind::Malformed,
    }
}

/// Parses an optionally signed alternation of digit and position tokens
/// and reports how its exponent ladder deviates from `max..0`.
/// Malformation is data here, never an error.
pub fn analyze_position_skips(t: &TokenSequence) -> SkipReport {
    let tokens = t.tokens();
    let body = match tokens.first().map(String::as_str) {
        Some("-") => &tokens[1..],
        _ => tokens,
    };

    let mut structure_ok = !body.is_empty() && body.len() % 2 == 0;
    let mut exponents: Vec<u64> = Vec::new();
    let mut i = 0;
    while i + 1 < body.len() {
        let digit_ok = is_plain_numeral(&body[i]);
        match (digit_ok, parse_position_token(&body[i + 1])) {
            (true, Some(e)) => exponents.push(e),
            _ => {
                structure_ok = false;
                // keep scanning for position tokens so the ladder
                // diagnostics survive locally broken pairs
                for tok in &body[i..] {
                    if let Some(e) = parse_position_token(tok) {
                        exponents.push(e);
                    }
                }
                break;
            }
        }
        i += 2;
    }

    let max_exponent_seen = exponents.iter().max().copied();
    let mut missing = Vec::new();
    let mut duplicated = Vec::new();
    if let Some(max) = max_exponent_seen {
        for e in (0..=max).rev() {
            let hits = exponents.iter().filter(|&&x| x == e).count();
            if hits == 0 {
                missing.push(e);
            } else if hits > 1 {
                duplicated.push(e);
            }
        }
    }
    let out_of_order = exponents.windows(2).any(|w| w[1] >= w[0]);
    let well_formed = structure_ok
        && max_exponent_seen.is_some()
        && missing.is_empty()
        && duplicated.is_empty()
        && !out_of_order;

    SkipReport {
        max_exponent_seen,
        missing_exponents: missing,
        duplicated_exponents: duplicated,
        out_of_order,
        structure_ok,
        well_formed,
    }
}

fn is_plain_numeral(token: &str) -> bool {
    !token.is_empty()
        && token.bytes().all(|b| b.is_ascii_digit())
        && (token.len() == 1 || !token.starts_with('0'))
        && parse_position_token(token).is_none()
}

/// Mean and normal-approximation 95% half-width `1.96 * s / sqrt(n)`
/// with `s` the sample standard deviation.
pub fn confidence_interval(run_accuracies: &[f64]) -> Result<CISummary, EvalError> {
    let n = run_accuracies.len();
    if n < 2 {
        return Err(EvalError::TooFewRuns(n));
    }
    let mean = run_accuracies.iter().sum::<f64>() / n as f64;
    let var = run_accuracies.iter().map(|a| (a - mean).powi(2)).sum::<f64>() / (n - 1) as f64;
    let half_width = 1.96 * var.sqrt() / (n as f64).sqrt();
    Ok(CISummary { mean, half_width, run_accuracies: run_accuracies.to_vec() })
}

/// Plain-text table for terminals.
pub fn render_table(report: &EvalReport) -> String {
    let mut out = String::new();
    out.push_str(&format!(
        "examples {:>8}\ncorrect  {:>8}\naccuracy {:>8.4}\n",
        report.n, report.correct, report.overall_accuracy
    ));
    out.push_str(&format!(
        "errors: malformed {} / position_skip {} / length_mismatch {} / wrong_digits {}\n",
        report.taxonomy.malformed,
        report.taxonomy.position_skip,
        report.taxonomy.length_mismatch,
        report.taxonomy.wrong_digits
    ));
    out.push_str("max_digits  count  correct  accuracy\n");
    for (len, b) in &report.per_length {
        out.push_str(&format!(
            "{:>10}  {:>5}  {:>7}  {:>8.4}\n",
            len, b.count, b.correct, b.accuracy
        ));
    }
    out
}

/// Per-length CSV, one row per digit-length bucket.
pub fn per_length_csv(report: &EvalReport) -> String {
    let mut out = String::from("max_digits,count,correct,accuracy\n");
    for (len, b) in &report.per_length {
        out.push_str(&format!("{},{},{},{}\n", len, b.count, b.correct, b.accuracy));
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::orthography::Scheme;

    fn spec(scheme: Scheme) -> OrthographySpec {
        OrthographySpec::new(scheme)
    }

    fn gold(answer: &str, d1: usize, d2: usize) -> GoldExample {
        GoldExample { answer: answer.into(), digits1: d1, digits2: d2 }
    }

    #[test]
    fn exact_match_is_token_level() {
        assert!(exact_match("200", "200"));
        assert!(!exact_match("2 0 0", "200"));
        assert!(exact_match("8  10e2 3 10e1 2 10e0", "8 10e2 3 10e1 2 10e0"));
        assert!(exact_match("  200 ", "200"));
        assert!(!exact_match("200", "-200"));
    }

    #[test]
    fn all_correct_scores_one_everywhere() {
        let golds = vec![gold("200", 2, 3), gold("7 0", 2, 2), gold("-165", 2, 3)];
        let preds: Vec<String> = golds.iter().map(|g| g.answer.clone()).collect();
        let r = evaluate(&preds, &golds, &spec(Scheme::Decimal)).unwrap();
        assert_eq!(r.overall_accuracy, 1.0);
        assert_eq!(r.correct, 3);
        for b in r.per_length.values() {
            assert_eq!(b.accuracy, 1.0);
        }
        assert_eq!(r.taxonomy.total(), 0);
    }

    #[test]
    fn fixture_of_ten_with_three_annotated_errors() {
        // ten decimal predictions: 7 exact, 1 wrong-digit, 1 length
        // mismatch, 1 malformed
        let golds: Vec<GoldExample> = (0..10)
            .map(|i| gold(&format!("{}", 100 + i), 2, 3))
            .collect();
        let mut preds: Vec<String> = golds.iter().map(|g| g.answer.clone()).collect();
        preds[2] = "109".into();     // wrong digits, same length
        preds[5] = "17".into();      // decodes, different digit count
        preds[8] = "1x3".into();     // does not decode
        let r = evaluate(&preds, &golds, &spec(Scheme::Decimal)).unwrap();
        assert_eq!(r.overall_accuracy, 0.7);
        assert_eq!(r.taxonomy.wrong_digits, 1);
        assert_eq!(r.taxonomy.length_mismatch, 1);
        assert_eq!(r.taxonomy.malformed, 1);
        assert_eq!(r.taxonomy.position_skip, 0);
        assert_eq!(r.taxonomy.total(), 3);
    }

    #[test]
    fn empty_streams_are_an_error() {
        let r = evaluate(&[], &[], &spec(Scheme::Decimal));
        assert_eq!(r.unwrap_err(), EvalError::EmptyStreams);
        let r = evaluate(&["1".into()], &[], &spec(Scheme::Decimal));
        assert!(matches!(r.unwrap_err(), EvalError::StreamLengthMismatch { .. }));
    }

    #[test]
    fn position_skips_are_their_own_bucket() {
        let golds = vec![gold("1 10e2 4 10e1 8 10e0", 2, 2)];
        // ladder jumps from 10e2 to 10e0
        let preds = vec!["1 10e2 8 10e0".to_string()];
        let r = evaluate(&preds, &golds, &spec(Scheme::TenEBased)).unwrap();
        assert_eq!(r.taxonomy.position_skip, 1);
        // same ladder break but with garbage digits: malformed wins
        let preds = vec!["1 10e2 zz 10e0".to_string()];
        let r = evaluate(&preds, &golds, &spec(Scheme::TenEBased)).unwrap();
        assert_eq!(r.taxonomy.malformed, 1);
        assert_eq!(r.taxonomy.position_skip, 0);
    }

    #[test]
    fn skip_analyzer_reads_clean_ladders() {
        let r = analyze_position_skips(&TokenSequence::from_wire("2 10e1 0 10e0"));
        assert!(r.well_formed);
        assert!(r.structure_ok);
        assert_eq!(r.max_exponent_seen, Some(1));
        assert!(r.missing_exponents.is_empty());
        assert!(!r.out_of_order);
    }

    #[test]
    fn skip_analyzer_reports_gaps() {
        let r = analyze_position_skips(&TokenSequence::from_wire("1 10e2 1 10e0"));
        assert!(!r.well_formed);
        assert_eq!(r.missing_exponents, vec![1]);
        assert_eq!(r.max_exponent_seen, Some(2));
        assert!(r.structure_ok);
    }

    #[test]
    fn skip_analyzer_reports_duplicates_and_order() {
        let r = analyze_position_skips(&TokenSequence::from_wire("1 10e0 1 10e1"));
        assert!(!r.well_formed);
        assert!(r.out_of_order);
        let r = analyze_position_skips(&TokenSequence::from_wire("1 10e1 2 10e1"));
        assert_eq!(r.duplicated_exponents, vec![1]);
        assert!(!r.well_formed);
        // missing wraps negative sign fine
        let r = analyze_position_skips(&TokenSequence::from_wire("- 3 10e1 2 10e0"));
        assert!(r.well_formed);
    }

    #[test]
    fn skip_analyzer_tolerates_garbage() {
        let r = analyze_position_skips(&TokenSequence::from_wire("What is this"));
        assert!(!r.structure_ok);
        assert!(!r.well_formed);
        assert_eq!(r.max_exponent_seen, None);
        let r = analyze_position_skips(&TokenSequence::from_wire(""));
        assert!(!r.well_formed);
    }

    #[test]
    fn ci_matches_frozen_reference_values() {
        let c = confidence_interval(&[0.5, 0.5, 0.5]).unwrap();
        assert_eq!(c.mean, 0.5);
        assert_eq!(c.half_width, 0.0);

        let c = confidence_interval(&[0.9, 1.0]).unwrap();
        assert!((c.mean - 0.95).abs() < 1e-12);
        assert!((c.half_width - 0.098).abs() < 1e-12);

        // five-run fixture, reference values computed independently
        let c = confidence_interval(&[0.62, 0.71, 0.55, 0.68, 0.66]).unwrap();
        assert!((c.mean - 0.644).abs() < 1e-12);
        assert!((c.half_width - 0.05424634181214433).abs() < 1e-12);
    }

    #[test]
    fn ci_needs_two_runs() {
        assert_eq!(confidence_interval(&[0.5]).unwrap_err(), EvalError::TooFewRuns(1));
        assert_eq!(confidence_interval(&[]).unwrap_err(), EvalError::TooFewRuns(0));
    }

    #[test]
    fn alignment_validates_indices() {
        let p = |index, s: &str| PredictionRecord { index, prediction: s.into() };
        let aligned = align_predictions(&[p(1, "b"), p(0, "a")], 2).unwrap();
        assert_eq!(aligned, vec!["a".to_string(), "b".to_string()]);
        assert!(matches!(
            align_predictions(&[p(0, "a")], 2).unwrap_err(),
            EvalError::MissingPrediction(1)
        ));
        assert!(matches!(
            align_predictions(&[p(0, "a"), p(0, "b")], 2).unwrap_err(),
            EvalError::DuplicatePredictionIndex(0)
        ));
        assert!(matches!(
            align_predictions(&[p(5, "a")], 2).unwrap_err(),
            EvalError::PredictionIndexOutOfRange { index: 5, n: 2 }
        ));
    }

    #[test]
    fn report_renderers_cover_every_bucket() {
        let golds = vec![gold("11", 1, 1), gold("300", 2, 2), gold("300", 2, 2)];
        let preds = vec!["11".to_string(), "301".to_string(), "300".to_string()];
        let r = evaluate(&preds, &golds, &spec(Scheme::Decimal)).unwrap();
        let table = render_table(&r);
        assert!(table.contains("accuracy"));
        let csv = per_length_csv(&r);
        assert!(csv.starts_with("max_digits,count,correct,accuracy\n"));
        assert_eq!(csv.lines().count(), 3);
        let json = serde_json::to_string(&r).unwrap();
        assert!(json.contains("\"overall_accuracy\""));
    }
}
