//! Reference multiplication and bulk verification of the rule engine.
//!
//! `reference_multiply` is ordinary schoolbook long multiplication by a
//! single small factor, driven by a multiplication table. It shares no
//! position logic with [`crate::rules`].

use std::time::{Duration, Instant};

use rand_chacha::rand_core::{RngCore, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::Serialize;

use crate::digits::DigitString;
use crate::error::{Error, Result};
use crate::rules::{multiply_by_rule, Multiplier};

const MISMATCH_CAP: usize = 100;

const fn times_table() -> [[u8; 10]; 10] {
    let mut table = [[0u8; 10]; 10];
    let mut a = 0;
    while a < 10 {
        let mut b = 0;
        while b < 10 {
            table[a][b] = (a * b) as u8;
            b += 1;
        }
        a += 1;
    }
    table
}

static TIMES_TABLE: [[u8; 10]; 10] = times_table();

/// Elementary operations performed by one schoolbook multiplication.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq)]
pub struct SchoolbookTally {
    pub table_lookups: u64,
    pub additions: u64,
}

/// Product of `a` and a single-digit factor, digits least-significant first.
fn times_digit(a: &[u8], factor: u8, tally: &mut SchoolbookTally) -> Vec<u8> {
    let mut out = Vec::with_capacity(a.len() + 1);
    let mut carry = 0u8;
    for &digit in a.iter().rev() {
        let mut p = TIMES_TABLE[usize::from(digit)][usize::from(factor)];
        tally.table_lookups += 1;
        if carry > 0 {
            p += carry;
            tally.additions += 1;
        }
        out.push(p % 10);
        carry = p / 10;
    }
    if carry > 0 {
        out.push(carry);
    }
    out
}

/// Column addition of two least-significant-first digit vectors.
fn add_columns(x: &[u8], y: &[u8], tally: &mut SchoolbookTally) -> Vec<u8> {
    let width = x.len().max(y.len());
    let mut out = Vec::with_capacity(width + 1);
    let mut carry = 0u8;
    for i in 0..width {
        let mut column = carry;
        let mut operands = u64::from(carry > 0);
        for v in [x.get(i), y.get(i)].into_iter().flatten() {
            column += v;
            operands += 1;
        }
        tally.additions += operands.saturating_sub(1);
        out.push(column % 10);
        carry = column / 10;
    }
    if carry > 0 {
        out.push(carry);
    }
    out
}

fn to_digit_string(mut lsb_first: Vec<u8>) -> DigitString {
    lsb_first.reverse();
    DigitString::from_digits(lsb_first).expect("schoolbook digits are decimal")
}

/// Schoolbook multiplication that also counts its table lookups and
/// additions. Factors 10–12 are split as `a×10 + a×(m−10)`; the `×10` part
/// is a shift.
pub fn reference_multiply_counted(
    a: &DigitString,
    m: u32,
    tally: &mut SchoolbookTally,
) -> Result<DigitString> {
    let digits = a.digits();
    let product = match m {
        0..=9 => times_digit(digits, m as u8, tally),
        10..=12 => {
            let mut shifted = vec![0u8];
            shifted.extend(digits.iter().rev());
            let rest = times_digit(digits, (m - 10) as u8, tally);
            add_columns(&shifted, &rest, tally)
        }
        _ => return Err(Error::Domain(format!("reference multiplier must be 0..=12, got {m}"))),
    };
    Ok(to_digit_string(product))
}

/// Canonical product `a × m` for `0 <= m <= 12`.
pub fn reference_multiply(a: &DigitString, m: u32) -> Result<DigitString> {
    reference_multiply_counted(a, m, &mut SchoolbookTally::default())
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct Mismatch {
    pub multiplicand: String,
    pub multiplier: u8,
    pub expected: String,
    pub actual: String,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct InvariantViolation {
    pub multiplicand: String,
    pub multiplier: u8,
    pub detail: String,
}

#[derive(Debug, Clone, Default, Serialize)]
pub struct VerificationReport {
    pub cases_run: u64,
    /// At most 100 entries, smallest cases first.
    pub mismatches: Vec<Mismatch>,
    pub mismatch_count: u64,
    /// At most 100 entries, smallest cases first.
    pub violations: Vec<InvariantViolation>,
    pub violation_count: u64,
    #[serde(serialize_with = "as_secs")]
    pub duration: Duration,
}

fn as_secs<S: serde::Serializer>(d: &Duration, s: S) -> std::result::Result<S::Ok, S::Error> {
    s.serialize_f64(d.as_secs_f64())
}

impl VerificationReport {
    pub fn is_clean(&self) -> bool {
        self.mismatch_count == 0 && self.violation_count == 0
    }

    /// Merges two partial reports. Associative; the kept samples are the
    /// smallest by (multiplier, length, text), so the merged verdict does
    /// not depend on how the work was split.
    pub fn merge(mut self, other: VerificationReport) -> VerificationReport {
        self.cases_run += other.cases_run;
        self.mismatch_count += other.mismatch_count;
        self.violation_count += other.violation_count;
        self.mismatches.extend(other.mismatches);
        self.mismatches.sort_by(|a, b| {
            case_key(&a.multiplicand, a.multiplier).cmp(&case_key(&b.multiplicand, b.multiplier))
        });
        self.mismatches.truncate(MISMATCH_CAP);
        self.violations.extend(other.violations);
        self.violations.sort_by(|a, b| {
            case_key(&a.multiplicand, a.multiplier)
                .cmp(&case_key(&b.multiplicand, b.multiplier))
                .then_with(|| a.detail.cmp(&b.detail))
        });
        self.violations.truncate(MISMATCH_CAP);
        self.duration = self.duration.max(other.duration);
        self
    }

    pub fn summary_line(&self) -> String {
        format!(
            "cases: {}  mismatches: {}  invariant violations: {}  time: {:.3}s",
            self.cases_run,
            self.mismatch_count,
            self.violation_count,
            self.duration.as_secs_f64()
        )
    }
}

fn case_key(text: &str, m: u8) -> (u8, usize, &str) {
    (m, text.len(), text)
}

/// Runs one case through the rule engine and the oracle.
pub fn check_case(a: &DigitString, m: Multiplier) -> VerificationReport {
    let mut report = VerificationReport { cases_run: 1, ..Default::default() };
    let trace = multiply_by_rule(a, m);
    let expected = reference_multiply(a, u32::from(m.value())).expect("supported multipliers are <= 12");
    if trace.product != expected {
        report.mismatch_count = 1;
        report.mismatches.push(Mismatch {
            multiplicand: a.to_text(),
            multiplier: m.value(),
            expected: expected.to_text(),
            actual: trace.product.to_text(),
        });
    }
    let violations = trace.violations();
    report.violation_count = violations.len() as u64;
    report.violations = violations
        .into_iter()
        .take(MISMATCH_CAP)
        .map(|detail| InvariantViolation { multiplicand: a.to_text(), multiplier: m.value(), detail })
        .collect();
    report
}

/// Checks every multiplicand `0..=max_value` against every multiplier in
/// `multipliers`, in parallel.
pub fn exhaustive_verify(max_value: u64, multipliers: &[Multiplier]) -> VerificationReport {
    let started = Instant::now();
    let mut report = (0..=max_value)
        .into_par_iter()
        .fold(VerificationReport::default, |acc, v| {
            let a = DigitString::from_u64(v);
            multipliers.iter().fold(acc, |acc, &m| acc.merge_light(check_case(&a, m)))
        })
        .reduce(VerificationReport::default, VerificationReport::merge);
    report.duration = started.elapsed();
    report
}

impl VerificationReport {
    // Cheap merge for the common clean case; falls back to the sorting merge
    // only when there is something to keep.
    fn merge_light(mut self, other: VerificationReport) -> VerificationReport {
        if other.mismatches.is_empty() && other.violations.is_empty() {
            self.cases_run += other.cases_run;
            self
        } else {
            self.merge(other)
        }
    }
}

/// Seeded random multiplicand of exactly `len` digits with a nonzero first
/// digit (a single `0` is allowed for length 1).
pub fn random_multiplicand(rng: &mut ChaCha8Rng, len: usize) -> DigitString {
    let mut digits = Vec::with_capacity(len);
    for i in 0..len {
        let low = if i == 0 && len > 1 { 1 } else { 0 };
        digits.push(low + (rng.next_u32() % (10 - u32::from(low))) as u8);
    }
    DigitString::from_digits(digits).expect("generated digits are decimal")
}

/// Checks `cases` random multiplicands of length `1..=max_len`, each against
/// a randomly chosen supported multiplier.
pub fn random_verify(cases: u64, max_len: usize, seed: u64) -> VerificationReport {
    let started = Instant::now();
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let inputs: Vec<(DigitString, Multiplier)> = (0..cases)
        .map(|_| {
            let len = 1 + (rng.next_u64() % max_len.max(1) as u64) as usize;
            let a = random_multiplicand(&mut rng, len);
            let m = Multiplier::SUPPORTED[(rng.next_u32() % 9) as usize];
            (a, Multiplier::new(u32::from(m)).expect("listed as supported"))
        })
        .collect();
    let mut report = inputs
        .par_iter()
        .map(|(a, m)| check_case(a, *m))
        .reduce(VerificationReport::default, VerificationReport::merge_light);
    report.duration = started.elapsed();
    report
}
