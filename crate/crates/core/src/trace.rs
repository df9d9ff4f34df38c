//! Worked computations: the per-position record produced by the rule engine,
//! its printable four-row table, and its structured (JSON) form.

use serde::{Deserialize, Serialize};

use crate::digits::DigitString;
use crate::error::{Error, Result};
use crate::rules::{Multiplier, PositionRole, RuleSpec};

/// One position of a worked multiplication.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct TraceStep {
    /// 0 for the rightmost digit, increasing leftward.
    pub position_index: usize,
    pub role: PositionRole,
    pub digit: u8,
    pub neighbour: u8,
    pub raw_value: i32,
    pub carry_in: u8,
    pub sum: i32,
    pub result_digit: u8,
    pub carry_out: u8,
    #[serde(rename = "formula")]
    pub formula_rendering: String,
}

/// A complete worked multiplication, steps in evaluation (right-to-left) order.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct ComputationTrace {
    pub multiplicand: DigitString,
    pub multiplier: Multiplier,
    pub steps: Vec<TraceStep>,
    pub extra_leading_digit: Option<u8>,
    pub product: DigitString,
}

impl ComputationTrace {
    /// The carry out of the prepended-zero position.
    pub fn final_carry(&self) -> u8 {
        self.steps.last().map_or(0, |s| s.carry_out)
    }

    /// Lists every structural invariant the trace breaks. An empty list
    /// means the trace is internally consistent (it does not compare the
    /// product against an independent multiplication).
    pub fn violations(&self) -> Vec<String> {
        let mut out = Vec::new();
        let digits = self.multiplicand.digits();
        let len = digits.len();
        let rule = RuleSpec::for_multiplier(self.multiplier);

        if self.steps.len() != len + 1 {
            out.push(format!("expected {} steps, found {}", len + 1, self.steps.len()));
            return out;
        }

        let mut expected_carry_in = 0u8;
        for (i, s) in self.steps.iter().enumerate() {
            let (role, d, n) = if i == len {
                (PositionRole::Leading, 0, digits[0])
            } else {
                let at = len - 1 - i;
                let n = if i == 0 { 0 } else { digits[at + 1] };
                let role = if i == 0 { PositionRole::Rightmost } else { PositionRole::Interior };
                (role, digits[at], n)
            };
            if s.position_index != i {
                out.push(format!("step {i}: position_index {}", s.position_index));
            }
            if (s.role, s.digit, s.neighbour) != (role, d, n) {
                out.push(format!(
                    "step {i}: expected {role} d={d} n={n}, found {} d={} n={}",
                    s.role, s.digit, s.neighbour
                ));
            }
            let formula = rule.formula(role);
            let raw = formula.eval(i32::from(d), i32::from(n));
            if s.raw_value != raw {
                out.push(format!("step {i}: raw value {} but formula gives {raw}", s.raw_value));
            }
            if s.formula_rendering != formula.render(i32::from(d), i32::from(n)) {
                out.push(format!("step {i}: formula text {:?}", s.formula_rendering));
            }
            if s.carry_in != expected_carry_in {
                out.push(format!(
                    "step {i}: carry_in {} but previous carry_out {expected_carry_in}",
                    s.carry_in
                ));
            }
            if s.carry_in > 2 || s.carry_out > 2 {
                out.push(format!("step {i}: carry out of range ({}, {})", s.carry_in, s.carry_out));
            }
            if s.sum != s.raw_value + i32::from(s.carry_in) {
                out.push(format!("step {i}: sum {} != raw + carry_in", s.sum));
            }
            if s.sum < 0 {
                out.push(format!("step {i}: negative sum {}", s.sum));
            } else if i32::from(s.result_digit) != s.sum % 10 || i32::from(s.carry_out) != s.sum / 10
            {
                out.push(format!(
                    "step {i}: sum {} does not split into digit {} carry {}",
                    s.sum, s.result_digit, s.carry_out
                ));
            }
            if s.result_digit > 9 {
                out.push(format!("step {i}: result digit {}", s.result_digit));
            }
            expected_carry_in = s.carry_out;
        }

        let final_carry = self.final_carry();
        let bound = if self.multiplier.value() <= 9 { 0 } else { 1 };
        if final_carry > bound {
            out.push(format!("final carry {final_carry} exceeds {bound} for ×{}", self.multiplier));
        }
        if self.extra_leading_digit != (final_carry > 0).then_some(final_carry) {
            out.push(format!(
                "extra_leading_digit {:?} disagrees with final carry {final_carry}",
                self.extra_leading_digit
            ));
        }
        let mut rebuilt: Vec<u8> = self.extra_leading_digit.into_iter().collect();
        rebuilt.extend(self.steps.iter().rev().map(|s| s.result_digit.min(9)));
        match DigitString::from_digits(rebuilt) {
            Ok(p) if p == self.product => {}
            Ok(p) => out.push(format!("product {} but result digits spell {p}", self.product)),
            Err(e) => out.push(format!("result digits invalid: {e}")),
        }
        out
    }

    /// The four-row table: multiplicand, worked raw values with parenthesised
    /// carries, carry resolution, and final digits. Columns run
    /// most-significant first and are separated by ` | `.
    pub fn render_table(&self) -> String {
        let mut columns: Vec<[String; 4]> = Vec::with_capacity(self.steps.len() + 1);
        if let Some(extra) = self.extra_leading_digit {
            columns.push([String::new(), String::new(), format!("({extra})"), extra.to_string()]);
        }
        let mut significant = self.extra_leading_digit.is_some();
        for s in self.steps.iter().rev() {
            let top = match s.role {
                PositionRole::Leading => String::new(),
                _ => s.digit.to_string(),
            };
            let units = if s.raw_value >= 0 { s.raw_value % 10 } else { s.raw_value };
            let resolution = if s.carry_in > 0 {
                format!("{units}+({})", s.carry_in)
            } else {
                units.to_string()
            };
            // Zeros in front of the product are left blank; the last column
            // always shows its digit.
            significant |= s.result_digit != 0 || s.position_index == 0;
            let bottom = if significant { s.result_digit.to_string() } else { String::new() };
            columns.push([top, s.formula_rendering.clone(), resolution, bottom]);
        }

        let widths: Vec<usize> = columns
            .iter()
            .map(|c| c.iter().map(|cell| cell.chars().count()).max().unwrap_or(0))
            .collect();
        let mut out = String::new();
        for row in 0..4 {
            let line = columns
                .iter()
                .zip(&widths)
                .map(|(col, &w)| format!("{:>w$}", col[row]))
                .collect::<Vec<_>>()
                .join(" | ");
            out.push_str(&line);
            out.push('\n');
        }
        out
    }

    pub fn to_structured(&self) -> serde_json::Value {
        serde_json::to_value(self).expect("trace serialization cannot fail")
    }

    /// Rebuilds a trace from its structured form, rejecting documents that
    /// are malformed or internally inconsistent.
    pub fn from_structured(value: &serde_json::Value) -> Result<Self> {
        let trace: ComputationTrace = serde_json::from_value(value.clone())
            .map_err(|e| Error::Parse(format!("trace document: {e}")))?;
        let violations = trace.violations();
        if let Some(first) = violations.first() {
            return Err(Error::Domain(format!("inconsistent trace: {first}")));
        }
        Ok(trace)
    }
}

/// Splits a rendered table row into trimmed cells.
pub fn table_cells(row: &str) -> Vec<&str> {
    row.split('|').map(str::trim).collect()
}
