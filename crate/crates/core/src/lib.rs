//! Trachtenberg rapid multiplication by 3–9, 11 and 12.
//!
//! - [`digits`]: canonical decimal digit strings.
//! - [`rules`]: the per-multiplier position formulas and the right-to-left
//!   carry procedure.
//! - [`trace`]: worked computations, printable tables and JSON form.
//! - [`oracle`]: schoolbook reference multiplication and bulk verification.
//! - [`opcount`]: elementary-operation counts for both methods.
//! - [`drill`]: seeded practice sessions with event-log persistence.
//! - `interface`: the command line and the HTTP service (feature
//!   `interface`, on by default).

pub mod digits;
pub mod drill;
pub mod error;
#[cfg(feature = "interface")]
pub mod interface;
pub mod opcount;
pub mod oracle;
pub mod rules;
pub mod trace;

pub use digits::DigitString;
pub use error::{Error, Result};
pub use rules::{multiply, multiply_by_rule, Multiplier, PositionRole, RuleSpec};
pub use trace::{ComputationTrace, TraceStep};
