//! Elementary-operation accounting for the rule engine and for schoolbook
//! multiplication.
//!
//! Cost model for a rule step:
//! - `2d` or `2(…)` is one doubling, `half(n)` one halving,
//!   `9−d` or `10−d` one complement;
//! - every binary addition or subtraction is one addition: `+n`, `+half(n)`,
//!   the `−1`/`−2` of the leading formulas, and `+carry` when the carry is
//!   nonzero;
//! - the odd bonus costs one parity check every time it appears in the
//!   formula, plus one addition when the digit is odd and 5 is added.
//!
//! The schoolbook baseline costs one table lookup per digit (the `×10` part
//! of 11 and 12 is a shift) and one addition per carry or partial-product
//! column absorbed.

use std::fmt;

use serde::Serialize;

use crate::digits::DigitString;
use crate::oracle::{reference_multiply_counted, SchoolbookTally};
use crate::rules::{BaseTerm, Multiplier, RuleSpec};
use crate::trace::ComputationTrace;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum Method {
    Trachtenberg,
    Schoolbook,
}

impl fmt::Display for Method {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Method::Trachtenberg => "trachtenberg",
            Method::Schoolbook => "schoolbook",
        })
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub struct OpCountReport {
    pub method: Method,
    pub multiplicand_length: usize,
    pub multiplier: Multiplier,
    pub additions: u64,
    pub doublings: u64,
    pub halvings: u64,
    pub complements: u64,
    pub odd_checks: u64,
    pub table_lookups: u64,
}

impl OpCountReport {
    fn empty(method: Method, multiplicand_length: usize, multiplier: Multiplier) -> Self {
        OpCountReport {
            method,
            multiplicand_length,
            multiplier,
            additions: 0,
            doublings: 0,
            halvings: 0,
            complements: 0,
            odd_checks: 0,
            table_lookups: 0,
        }
    }

    pub fn total(&self) -> u64 {
        self.additions
            + self.doublings
            + self.halvings
            + self.complements
            + self.odd_checks
            + self.table_lookups
    }

    pub const CSV_HEADER: &'static str =
        "method,multiplicand_length,multiplier,additions,doublings,halvings,complements,odd_checks,table_lookups";

    pub fn csv_row(&self) -> String {
        format!(
            "{},{},{},{},{},{},{},{},{}",
            self.method,
            self.multiplicand_length,
            self.multiplier,
            self.additions,
            self.doublings,
            self.halvings,
            self.complements,
            self.odd_checks,
            self.table_lookups
        )
    }
}

pub fn count_trace_ops(trace: &ComputationTrace) -> OpCountReport {
    let rule = RuleSpec::for_multiplier(trace.multiplier);
    let mut r = OpCountReport::empty(Method::Trachtenberg, trace.multiplicand.len(), trace.multiplier);
    for step in &trace.steps {
        let formula = rule.formula(step.role);
        match formula.base {
            BaseTerm::Zero | BaseTerm::Digit => {}
            BaseTerm::DoubleDigit => r.doublings += 1,
            BaseTerm::TenComplement | BaseTerm::NineComplement => r.complements += 1,
            BaseTerm::DoubleTenComplement | BaseTerm::DoubleNineComplement => {
                r.complements += 1;
                r.doublings += 1;
            }
            BaseTerm::NeighbourMinusOne | BaseTerm::NeighbourMinusTwo => r.additions += 1,
            BaseTerm::HalfNeighbourMinusOne | BaseTerm::HalfNeighbourMinusTwo => {
                r.halvings += 1;
                r.additions += 1;
            }
        }
        if formula.plus_neighbour {
            r.additions += 1;
        }
        if formula.plus_half_neighbour {
            r.halvings += 1;
            // With no base term, half(n) is the starting value, not an addend.
            if formula.base != BaseTerm::Zero {
                r.additions += 1;
            }
        }
        if formula.plus_odd_bonus {
            r.odd_checks += 1;
            if step.digit % 2 == 1 {
                r.additions += 1;
            }
        }
        if step.carry_in > 0 {
            r.additions += 1;
        }
    }
    r
}

pub fn count_schoolbook_ops(a: &DigitString, m: Multiplier) -> OpCountReport {
    let mut tally = SchoolbookTally::default();
    reference_multiply_counted(a, u32::from(m.value()), &mut tally)
        .expect("supported multipliers are within the reference range");
    let mut r = OpCountReport::empty(Method::Schoolbook, a.len(), m);
    r.table_lookups = tally.table_lookups;
    r.additions = tally.additions;
    r
}

/// Column widths for the aligned text form.
const COLUMNS: [(&str, usize); 9] = [
    ("method", 12),
    ("length", 6),
    ("m", 3),
    ("additions", 9),
    ("doublings", 9),
    ("halvings", 8),
    ("complements", 11),
    ("odd_checks", 10),
    ("table_lookups", 13),
];

pub fn text_header() -> String {
    COLUMNS
        .iter()
        .map(|(name, w)| format!("{name:>w$}"))
        .collect::<Vec<_>>()
        .join(" ")
}

pub fn text_row(r: &OpCountReport) -> String {
    let values = [
        r.method.to_string(),
        r.multiplicand_length.to_string(),
        r.multiplier.to_string(),
        r.additions.to_string(),
        r.doublings.to_string(),
        r.halvings.to_string(),
        r.complements.to_string(),
        r.odd_checks.to_string(),
        r.table_lookups.to_string(),
    ];
    values
        .iter()
        .zip(COLUMNS)
        .map(|(v, (_, w))| format!("{v:>w$}"))
        .collect::<Vec<_>>()
        .join(" ")
}
