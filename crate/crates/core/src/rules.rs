//! The Trachtenberg rule engine.
//!
//! Each supported multiplier is described by a [`RuleSpec`]: one
//! [`PositionFormula`] for each of the three position roles. The multiplicand
//! is processed right to left with a single zero prepended in front of it.
//! At every position the role's formula is evaluated on the current digit
//! `d` and its neighbour `n` (the digit immediately to the right, 0 when
//! there is none), the incoming carry is added, the units digit is written
//! and the tens digit carries to the next position on the left.
//!
//! Rules for 5, 6, 7, 11 and 12 use the same formula for all three roles;
//! the rightmost position simply sees `n = 0` and the prepended position
//! sees `d = 0`. Rules for 3, 4, 8 and 9 distinguish the roles.

use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Deserializer, Serialize, Serializer};

use crate::digits::DigitString;
use crate::error::{Error, Result};
use crate::trace::{ComputationTrace, TraceStep};

/// One of the nine multipliers the rules cover: 3–9, 11 and 12.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct Multiplier(u8);

impl Multiplier {
    pub const SUPPORTED: [u8; 9] = [3, 4, 5, 6, 7, 8, 9, 11, 12];

    pub fn new(value: u32) -> Result<Self> {
        match u8::try_from(value) {
            Ok(v) if Self::SUPPORTED.contains(&v) => Ok(Multiplier(v)),
            _ => Err(Error::Domain(format!(
                "unsupported multiplier {value} (supported: 3-9, 11, 12)"
            ))),
        }
    }

    pub fn all() -> impl Iterator<Item = Multiplier> {
        Self::SUPPORTED.into_iter().map(Multiplier)
    }

    pub fn value(self) -> u8 {
        self.0
    }
}

impl fmt::Display for Multiplier {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self.0)
    }
}

impl FromStr for Multiplier {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        let value: u32 = s
            .trim()
            .parse()
            .map_err(|_| Error::Domain(format!("unsupported multiplier {s:?}")))?;
        Multiplier::new(value)
    }
}

impl TryFrom<u32> for Multiplier {
    type Error = Error;

    fn try_from(value: u32) -> Result<Self> {
        Multiplier::new(value)
    }
}

impl Serialize for Multiplier {
    fn serialize<S: Serializer>(&self, serializer: S) -> std::result::Result<S::Ok, S::Error> {
        serializer.serialize_u8(self.0)
    }
}

impl<'de> Deserialize<'de> for Multiplier {
    fn deserialize<D: Deserializer<'de>>(deserializer: D) -> std::result::Result<Self, D::Error> {
        let value = u32::deserialize(deserializer)?;
        Multiplier::new(value).map_err(serde::de::Error::custom)
    }
}

/// Where a position sits in the zero-extended multiplicand.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum PositionRole {
    /// The last digit of the multiplicand. It has no right neighbour.
    Rightmost,
    /// Every other actual digit, including the first one.
    Interior,
    /// The zero written in front of the multiplicand.
    Leading,
}

impl PositionRole {
    pub const ALL: [PositionRole; 3] =
        [PositionRole::Rightmost, PositionRole::Interior, PositionRole::Leading];
}

impl fmt::Display for PositionRole {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            PositionRole::Rightmost => "rightmost",
            PositionRole::Interior => "interior",
            PositionRole::Leading => "leading",
        })
    }
}

/// Floor of half a value in `0..=10`; the remainder is thrown away.
pub fn half_floor(x: i32) -> Result<i32> {
    if !(0..=10).contains(&x) {
        return Err(Error::Domain(format!("half_floor expects 0..=10, got {x}")));
    }
    Ok(x / 2)
}

/// 5 for an odd digit, 0 for an even one.
pub fn odd_bonus(d: i32) -> Result<i32> {
    check_digit("digit", d)?;
    Ok(if d % 2 == 1 { 5 } else { 0 })
}

fn check_digit(name: &str, v: i32) -> Result<()> {
    if (0..=9).contains(&v) {
        Ok(())
    } else {
        Err(Error::Domain(format!("{name} must be a digit 0..=9, got {v}")))
    }
}

/// Leading term of a position formula.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum BaseTerm {
    Zero,
    Digit,
    DoubleDigit,
    TenComplement,
    DoubleTenComplement,
    NineComplement,
    DoubleNineComplement,
    NeighbourMinusOne,
    NeighbourMinusTwo,
    HalfNeighbourMinusOne,
    HalfNeighbourMinusTwo,
}

impl BaseTerm {
    fn eval(self, d: i32, n: i32) -> i32 {
        match self {
            BaseTerm::Zero => 0,
            BaseTerm::Digit => d,
            BaseTerm::DoubleDigit => 2 * d,
            BaseTerm::TenComplement => 10 - d,
            BaseTerm::DoubleTenComplement => 2 * (10 - d),
            BaseTerm::NineComplement => 9 - d,
            BaseTerm::DoubleNineComplement => 2 * (9 - d),
            BaseTerm::NeighbourMinusOne => n - 1,
            BaseTerm::NeighbourMinusTwo => n - 2,
            BaseTerm::HalfNeighbourMinusOne => n / 2 - 1,
            BaseTerm::HalfNeighbourMinusTwo => n / 2 - 2,
        }
    }

    /// Symbolic form over `d` and `n`, e.g. `2(9-d)`.
    pub fn symbol(self) -> &'static str {
        match self {
            BaseTerm::Zero => "0",
            BaseTerm::Digit => "d",
            BaseTerm::DoubleDigit => "2d",
            BaseTerm::TenComplement => "10-d",
            BaseTerm::DoubleTenComplement => "2(10-d)",
            BaseTerm::NineComplement => "9-d",
            BaseTerm::DoubleNineComplement => "2(9-d)",
            BaseTerm::NeighbourMinusOne => "n-1",
            BaseTerm::NeighbourMinusTwo => "n-2",
            BaseTerm::HalfNeighbourMinusOne => "half(n)-1",
            BaseTerm::HalfNeighbourMinusTwo => "half(n)-2",
        }
    }

    /// Worked form with the digits substituted, in the notation of the
    /// printed tables (`9×2`, `(10-7)2`, `(4 over 2)-1`).
    fn worked(self, d: i32, n: i32) -> String {
        match self {
            BaseTerm::Zero => String::new(),
            BaseTerm::Digit => format!("{d}"),
            BaseTerm::DoubleDigit => format!("{d}×2"),
            BaseTerm::TenComplement => format!("10-{d}"),
            BaseTerm::DoubleTenComplement => format!("(10-{d})2"),
            BaseTerm::NineComplement => format!("9-{d}"),
            BaseTerm::DoubleNineComplement => format!("(9-{d})2"),
            BaseTerm::NeighbourMinusOne => format!("{n}-1"),
            BaseTerm::NeighbourMinusTwo => format!("{n}-2"),
            BaseTerm::HalfNeighbourMinusOne => format!("({n} over 2)-1"),
            BaseTerm::HalfNeighbourMinusTwo => format!("({n} over 2)-2"),
        }
    }
}

/// A per-role formula: a base term plus optional `+n`, `+half(n)` and
/// `+5 if d is odd` terms.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub struct PositionFormula {
    pub base: BaseTerm,
    pub plus_neighbour: bool,
    pub plus_half_neighbour: bool,
    pub plus_odd_bonus: bool,
}

impl PositionFormula {
    const fn new(base: BaseTerm) -> Self {
        PositionFormula {
            base,
            plus_neighbour: false,
            plus_half_neighbour: false,
            plus_odd_bonus: false,
        }
    }

    const fn neighbour(mut self) -> Self {
        self.plus_neighbour = true;
        self
    }

    const fn half(mut self) -> Self {
        self.plus_half_neighbour = true;
        self
    }

    const fn odd5(mut self) -> Self {
        self.plus_odd_bonus = true;
        self
    }

    /// Evaluates on digit inputs; both must already be in `0..=9`.
    pub fn eval(&self, d: i32, n: i32) -> i32 {
        let mut v = self.base.eval(d, n);
        if self.plus_neighbour {
            v += n;
        }
        if self.plus_half_neighbour {
            v += n / 2;
        }
        if self.plus_odd_bonus && d % 2 == 1 {
            v += 5;
        }
        v
    }

    /// Symbolic description, e.g. `2(9-d)+half(n)+odd5(d)`.
    pub fn describe(&self) -> String {
        let mut parts: Vec<&str> = Vec::new();
        if self.base != BaseTerm::Zero {
            parts.push(self.base.symbol());
        }
        if self.plus_neighbour {
            parts.push("n");
        }
        if self.plus_half_neighbour {
            parts.push("half(n)");
        }
        if self.plus_odd_bonus {
            parts.push("odd5(d)");
        }
        if parts.is_empty() {
            "0".to_string()
        } else {
            parts.join("+")
        }
    }

    /// Worked expression with the resulting value, e.g. `9+3+5=(1)7`.
    ///
    /// Neighbour terms are always written, even when they are zero. The odd
    /// bonus is written only for odd digits, except in a formula with no
    /// base term, where it is always written (`2+0`, `3+5`).
    pub fn render(&self, d: i32, n: i32) -> String {
        let mut out = self.base.worked(d, n);
        let mut push = |term: String| {
            if !out.is_empty() {
                out.push('+');
            }
            out.push_str(&term);
        };
        if self.plus_neighbour {
            push(n.to_string());
        }
        if self.plus_half_neighbour {
            push((n / 2).to_string());
        }
        if self.plus_odd_bonus {
            if d % 2 == 1 {
                push("5".to_string());
            } else if self.base == BaseTerm::Zero {
                push("0".to_string());
            }
        }
        if out.is_empty() {
            out.push('0');
        }
        out.push('=');
        out.push_str(&render_with_carry(self.eval(d, n)));
        out
    }
}

/// Writes a value with its tens part as a parenthesised carry: `17` → `(1)7`.
pub fn render_with_carry(value: i32) -> String {
    if value >= 10 {
        format!("({}){}", value / 10, value % 10)
    } else {
        value.to_string()
    }
}

/// The complete rule for one multiplier.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct RuleSpec {
    pub multiplier: Multiplier,
    pub rightmost: PositionFormula,
    pub interior: PositionFormula,
    pub leading: PositionFormula,
}

impl RuleSpec {
    pub fn for_multiplier(m: Multiplier) -> RuleSpec {
        use BaseTerm::*;
        let f = PositionFormula::new;
        let uniform = |formula: PositionFormula| (formula, formula, formula);
        let (rightmost, interior, leading) = match m.0 {
            11 => uniform(f(Digit).neighbour()),
            12 => uniform(f(DoubleDigit).neighbour()),
            6 => uniform(f(Digit).half().odd5()),
            7 => uniform(f(DoubleDigit).half().odd5()),
            5 => uniform(f(Zero).half().odd5()),
            9 => (
                f(TenComplement),
                f(NineComplement).neighbour(),
                f(NeighbourMinusOne),
            ),
            8 => (
                f(DoubleTenComplement),
                f(DoubleNineComplement).neighbour(),
                f(NeighbourMinusTwo),
            ),
            4 => (
                f(TenComplement).odd5(),
                f(NineComplement).half().odd5(),
                f(HalfNeighbourMinusOne),
            ),
            3 => (
                f(DoubleTenComplement).odd5(),
                f(DoubleNineComplement).half().odd5(),
                f(HalfNeighbourMinusTwo),
            ),
            other => unreachable!("Multiplier holds only supported values, got {other}"),
        };
        RuleSpec { multiplier: m, rightmost, interior, leading }
    }

    pub fn formula(&self, role: PositionRole) -> &PositionFormula {
        match role {
            PositionRole::Rightmost => &self.rightmost,
            PositionRole::Interior => &self.interior,
            PositionRole::Leading => &self.leading,
        }
    }

    /// True when all three roles share one formula.
    pub fn is_uniform(&self) -> bool {
        self.rightmost == self.interior && self.interior == self.leading
    }
}

/// The role formula's value at one position, before the incoming carry.
///
/// The prepended position must have `d = 0` and the rightmost position must
/// have `n = 0`.
pub fn position_raw_value(m: Multiplier, role: PositionRole, d: i32, n: i32) -> Result<i32> {
    check_digit("digit", d)?;
    check_digit("neighbour", n)?;
    match role {
        PositionRole::Leading if d != 0 => {
            return Err(Error::Domain(format!(
                "the leading position is the prepended zero, got digit {d}"
            )))
        }
        PositionRole::Rightmost if n != 0 => {
            return Err(Error::Domain(format!(
                "the rightmost position has no neighbour, got {n}"
            )))
        }
        _ => {}
    }
    Ok(RuleSpec::for_multiplier(m).formula(role).eval(d, n))
}

/// Multiplies `multiplicand` by `m` with the rule for `m`, recording every
/// position.
///
/// # Panics
///
/// Panics if a position sum turns negative or a carry leaves `0..=2`. Both
/// are impossible for the supported rules; the exhaustive verification
/// suite exercises this.
pub fn multiply_by_rule(multiplicand: &DigitString, m: Multiplier) -> ComputationTrace {
    let rule = RuleSpec::for_multiplier(m);
    let digits = multiplicand.digits();
    let len = digits.len();
    let mut steps = Vec::with_capacity(len + 1);
    let mut carry = 0i32;

    // position_index 0 is the rightmost digit; index `len` is the prepended zero.
    for position_index in 0..=len {
        let (role, d, n) = if position_index == len {
            (PositionRole::Leading, 0, i32::from(digits[0]))
        } else {
            let at = len - 1 - position_index;
            let n = if position_index == 0 { 0 } else { i32::from(digits[at + 1]) };
            let role = if position_index == 0 {
                PositionRole::Rightmost
            } else {
                PositionRole::Interior
            };
            (role, i32::from(digits[at]), n)
        };
        let formula = rule.formula(role);
        let raw_value = formula.eval(d, n);
        let sum = raw_value + carry;
        assert!(
            sum >= 0,
            "internal invariant violated: negative sum {sum} at position {position_index} of {multiplicand}×{m}"
        );
        let result_digit = sum % 10;
        let carry_out = sum / 10;
        assert!(
            carry_out <= 2,
            "internal invariant violated: carry {carry_out} at position {position_index} of {multiplicand}×{m}"
        );
        steps.push(TraceStep {
            position_index,
            role,
            digit: d as u8,
            neighbour: n as u8,
            raw_value,
            carry_in: carry as u8,
            sum,
            result_digit: result_digit as u8,
            carry_out: carry_out as u8,
            formula_rendering: formula.render(d, n),
        });
        carry = carry_out;
    }

    let extra_leading_digit = (carry > 0).then_some(carry as u8);
    let mut product_digits = Vec::with_capacity(len + 2);
    product_digits.extend(extra_leading_digit);
    product_digits.extend(steps.iter().rev().map(|s| s.result_digit));
    let product = DigitString::from_digits(product_digits)
        .expect("result digits are always in 0..=9");

    ComputationTrace {
        multiplicand: multiplicand.clone(),
        multiplier: m,
        steps,
        extra_leading_digit,
        product,
    }
}

/// Convenience wrapper returning only the product.
pub fn multiply(multiplicand: &DigitString, m: Multiplier) -> DigitString {
    multiply_by_rule(multiplicand, m).product
}
