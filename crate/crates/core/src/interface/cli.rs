//! Command-line front end.
//!
//! Exit status: 0 on success, 1 on a domain error or a failed verification,
//! 2 on a usage error.

use std::io::{BufRead, Write};
use std::path::PathBuf;
use std::time::Instant;

use clap::{Parser, Subcommand, ValueEnum};
use rand_chacha::rand_core::SeedableRng;
use rand_chacha::ChaCha8Rng;

use crate::digits::DigitString;
use crate::drill::{
    self, Answer, AskedValue, DrillConfig, DrillMode, DrillSession, NextChallenge, SessionStore,
    StepChallenge, Verdict,
};
use crate::error::{Error, Result};
use crate::interface::server;
use crate::opcount::{self, count_schoolbook_ops, count_trace_ops, OpCountReport};
use crate::oracle::{self, exhaustive_verify, random_multiplicand, random_verify};
use crate::rules::{multiply_by_rule, Multiplier};

#[derive(Debug, Parser)]
#[command(name = "trachtenberg", version, about = "Trachtenberg rapid multiplication by 3-9, 11 and 12")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum TraceFormat {
    Table,
    Structured,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum ModeArg {
    Guided,
    AnswerOnly,
}

fn parse_multiplier(s: &str) -> std::result::Result<Multiplier, String> {
    s.parse::<Multiplier>().map_err(|e| e.to_string())
}

fn parse_number(s: &str) -> std::result::Result<DigitString, String> {
    DigitString::parse(s).map_err(|e| e.to_string())
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Print the product of a number and a supported multiplier.
    Compute {
        #[arg(value_parser = parse_number)]
        number: DigitString,
        #[arg(long = "by", value_parser = parse_multiplier)]
        by: Multiplier,
    },
    /// Show the worked, position-by-position computation.
    Trace {
        #[arg(value_parser = parse_number)]
        number: DigitString,
        #[arg(long = "by", value_parser = parse_multiplier)]
        by: Multiplier,
        #[arg(long, value_enum, default_value_t = TraceFormat::Table)]
        format: TraceFormat,
    },
    /// Check the rules against schoolbook multiplication.
    Verify {
        /// Check every multiplicand from 0 to this value.
        #[arg(long, default_value_t = 99_999)]
        max: u64,
        /// Multipliers to check (default: all nine).
        #[arg(long = "by", value_parser = parse_multiplier, value_delimiter = ',')]
        by: Vec<Multiplier>,
        /// Additionally check this many random multiplicands.
        #[arg(long, default_value_t = 0)]
        random: u64,
        #[arg(long, default_value_t = 60)]
        max_len: usize,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        /// Print the report as JSON.
        #[arg(long)]
        json: bool,
    },
    /// Count elementary operations for both methods.
    Bench {
        #[arg(long = "by", value_parser = parse_multiplier, value_delimiter = ',')]
        by: Vec<Multiplier>,
        #[arg(long, value_delimiter = ',', default_values_t = [10usize, 20, 40])]
        lengths: Vec<usize>,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        /// Emit comma-separated rows instead of aligned text.
        #[arg(long)]
        csv: bool,
        /// Also time both methods over this many repetitions per row.
        #[arg(long)]
        timing: Option<u32>,
    },
    /// Practice interactively on the terminal.
    Drill {
        /// Multipliers to practise, comma separated (default: all).
        #[arg(long = "by", value_parser = parse_multiplier, value_delimiter = ',')]
        by: Vec<Multiplier>,
        #[arg(long, default_value_t = 2)]
        min_digits: usize,
        #[arg(long, default_value_t = 4)]
        max_digits: usize,
        /// Number of problems.
        #[arg(long, default_value_t = 5)]
        count: usize,
        /// Problem seed (default: current time).
        #[arg(long)]
        seed: Option<u64>,
        #[arg(long, value_enum, default_value_t = ModeArg::Guided)]
        mode: ModeArg,
        /// Also ask each position's raw value.
        #[arg(long)]
        raw: bool,
        /// Continue a saved session instead of starting a new one.
        #[arg(long)]
        resume: Option<String>,
        /// Session log directory (default: ./sessions).
        #[arg(long, env = drill::STORE_ENV)]
        store: Option<PathBuf>,
    },
    /// Run the HTTP/JSON service.
    Serve {
        #[arg(long, default_value_t = 8080)]
        port: u16,
        #[arg(long, default_value = "127.0.0.1")]
        host: String,
        #[arg(long, env = drill::STORE_ENV)]
        store: Option<PathBuf>,
        /// Allowed CORS origin; repeat for several, `*` for any.
        #[arg(long = "allow-origin", default_values_t = [
            "http://localhost:5173".to_string(),
            "http://127.0.0.1:5173".to_string(),
        ])]
        allow_origin: Vec<String>,
    },
}

/// Parses `args` (including the program name) and runs the command.
pub fn run<I, T>(args: I, stdin: &mut dyn BufRead, out: &mut dyn Write, err: &mut dyn Write) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<std::ffi::OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(cli) => cli,
        Err(e) => {
            let code = e.exit_code();
            let rendered = e.render().to_string();
            if code == 0 {
                let _ = write!(out, "{rendered}");
            } else {
                let _ = write!(err, "{rendered}");
            }
            return code;
        }
    };
    match execute(cli.command, stdin, out) {
        Ok(code) => code,
        Err(e) => {
            let _ = writeln!(err, "error: {e}");
            1
        }
    }
}

fn io(e: std::io::Error) -> Error {
    Error::Io(e.to_string())
}

fn all_if_empty(by: Vec<Multiplier>) -> Vec<Multiplier> {
    if by.is_empty() {
        Multiplier::all().collect()
    } else {
        by
    }
}

pub fn execute(command: Command, stdin: &mut dyn BufRead, out: &mut dyn Write) -> Result<i32> {
    match command {
        Command::Compute { number, by } => {
            writeln!(out, "{}", multiply_by_rule(&number, by).product).map_err(io)?;
            Ok(0)
        }
        Command::Trace { number, by, format } => {
            let trace = multiply_by_rule(&number, by);
            match format {
                TraceFormat::Table => {
                    writeln!(out, "{} × {} = {}", trace.multiplicand, trace.multiplier, trace.product)
                        .map_err(io)?;
                    write!(out, "{}", trace.render_table()).map_err(io)?;
                }
                TraceFormat::Structured => {
                    let text = serde_json::to_string_pretty(&trace.to_structured())
                        .map_err(|e| Error::Io(e.to_string()))?;
                    writeln!(out, "{text}").map_err(io)?;
                }
            }
            Ok(0)
        }
        Command::Verify { max, by, random, max_len, seed, json } => {
            let by = all_if_empty(by);
            let mut report = exhaustive_verify(max, &by);
            if random > 0 {
                report = report.merge(random_verify(random, max_len, seed));
            }
            if json {
                let text = serde_json::to_string_pretty(&report).map_err(|e| Error::Io(e.to_string()))?;
                writeln!(out, "{text}").map_err(io)?;
            } else {
                writeln!(out, "{}", report.summary_line()).map_err(io)?;
                for m in &report.mismatches {
                    writeln!(
                        out,
                        "mismatch: {} × {}: expected {}, got {}",
                        m.multiplicand, m.multiplier, m.expected, m.actual
                    )
                    .map_err(io)?;
                }
                for v in &report.violations {
                    writeln!(out, "violation: {} × {}: {}", v.multiplicand, v.multiplier, v.detail)
                        .map_err(io)?;
                }
            }
            Ok(if report.is_clean() { 0 } else { 1 })
        }
        Command::Bench { by, lengths, seed, csv, timing } => {
            bench(&all_if_empty(by), &lengths, seed, csv, timing, out)?;
            Ok(0)
        }
        Command::Drill { by, min_digits, max_digits, count, seed, mode, raw, resume, store } => {
            let store = SessionStore::new(store.unwrap_or_else(SessionStore::default_dir));
            let id = match resume {
                Some(id) => {
                    store.get(&id)?;
                    id
                }
                None => {
                    let config = DrillConfig {
                        multipliers: all_if_empty(by),
                        min_digits,
                        max_digits,
                        mode: match mode {
                            ModeArg::Guided => DrillMode::GuidedSteps,
                            ModeArg::AnswerOnly => DrillMode::AnswerOnly,
                        },
                        seed: seed.unwrap_or_else(drill::now_millis),
                        problem_count: count,
                        ask_raw_value: raw,
                    };
                    let shared = store.create(config)?;
                    let id = shared.lock().unwrap_or_else(|p| p.into_inner()).session_id.clone();
                    id
                }
            };
            drill_loop(&store, &id, stdin, out)?;
            Ok(0)
        }
        Command::Serve { port, host, store, allow_origin } => {
            let store = store.unwrap_or_else(SessionStore::default_dir);
            let runtime = tokio::runtime::Runtime::new().map_err(io)?;
            runtime.block_on(server::serve(&host, port, store, allow_origin))?;
            Ok(0)
        }
    }
}

fn bench(
    by: &[Multiplier],
    lengths: &[usize],
    seed: u64,
    csv: bool,
    timing: Option<u32>,
    out: &mut dyn Write,
) -> Result<()> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    if csv {
        writeln!(out, "{}", OpCountReport::CSV_HEADER).map_err(io)?;
    } else {
        writeln!(out, "{}", opcount::text_header()).map_err(io)?;
    }
    let mut timings = Vec::new();
    for &m in by {
        for &len in lengths {
            let a = random_multiplicand(&mut rng, len.max(1));
            let trace = multiply_by_rule(&a, m);
            for report in [count_trace_ops(&trace), count_schoolbook_ops(&a, m)] {
                let line = if csv { report.csv_row() } else { opcount::text_row(&report) };
                writeln!(out, "{line}").map_err(io)?;
            }
            if let Some(reps) = timing {
                let reps = reps.max(1);
                let started = Instant::now();
                for _ in 0..reps {
                    std::hint::black_box(multiply_by_rule(std::hint::black_box(&a), m));
                }
                let rule_ns = started.elapsed().as_nanos() as f64 / f64::from(reps);
                let started = Instant::now();
                for _ in 0..reps {
                    std::hint::black_box(oracle::reference_multiply(
                        std::hint::black_box(&a),
                        u32::from(m.value()),
                    )?);
                }
                let school_ns = started.elapsed().as_nanos() as f64 / f64::from(reps);
                timings.push((m, len, rule_ns, school_ns));
            }
        }
    }
    if !timings.is_empty() {
        writeln!(out).map_err(io)?;
        if csv {
            writeln!(out, "multiplier,multiplicand_length,trachtenberg_ns,schoolbook_ns").map_err(io)?;
        } else {
            writeln!(out, "{:>3} {:>6} {:>16} {:>14}", "m", "length", "trachtenberg_ns", "schoolbook_ns")
                .map_err(io)?;
        }
        for (m, len, rule_ns, school_ns) in timings {
            if csv {
                writeln!(out, "{m},{len},{rule_ns:.1},{school_ns:.1}").map_err(io)?;
            } else {
                writeln!(out, "{m:>3} {len:>6} {rule_ns:>16.1} {school_ns:>14.1}").map_err(io)?;
            }
        }
    }
    Ok(())
}

fn prompt(c: &StepChallenge) -> String {
    match c.asked {
        AskedValue::FinalProduct => format!("{} × {} = ? ", c.multiplicand, c.multiplier),
        asked => {
            let what = if asked == AskedValue::RawValue { "raw value" } else { "digit carry" };
            format!(
                "{} × {}  position {} ({}): digit {}, neighbour {}, carry in {}  → {what}? ",
                c.multiplicand,
                c.multiplier,
                c.position_index.unwrap_or(0),
                c.role.map(|r| r.to_string()).unwrap_or_default(),
                c.digit.unwrap_or(0),
                c.neighbour.unwrap_or(0),
                c.carry_in.unwrap_or(0),
            )
        }
    }
}

fn parse_answer(asked: AskedValue, line: &str) -> Option<Answer> {
    let words: Vec<&str> = line.split_whitespace().collect();
    match (asked, words.as_slice()) {
        (AskedValue::FinalProduct, [p]) => Some(Answer::product(*p)),
        (AskedValue::RawValue, [v]) => v.parse().ok().map(Answer::raw),
        (AskedValue::ResultDigitAndCarry, [d, c]) => {
            Some(Answer::digit_and_carry(d.parse().ok()?, c.parse().ok()?))
        }
        // "12" is read as carry 1, digit 2, the way the tables write it.
        (AskedValue::ResultDigitAndCarry, [dc]) if dc.len() <= 2 => {
            let v: i64 = dc.parse().ok()?;
            Some(Answer::digit_and_carry(v % 10, v / 10))
        }
        _ => None,
    }
}

fn drill_loop(store: &SessionStore, id: &str, stdin: &mut dyn BufRead, out: &mut dyn Write) -> Result<()> {
    writeln!(out, "session {id}  (answers: `digit carry`, or the product; empty line to stop)").map_err(io)?;
    loop {
        let next = store.with_session(id, |s: &mut DrillSession| Ok(s.next_challenge()))?;
        let challenge = match next {
            NextChallenge::Finished => break,
            NextChallenge::Challenge(c) => c,
        };
        write!(out, "{}", prompt(&challenge)).map_err(io)?;
        out.flush().map_err(io)?;
        let mut line = String::new();
        if stdin.read_line(&mut line).map_err(io)? == 0 || line.trim().is_empty() {
            writeln!(out).map_err(io)?;
            writeln!(out, "paused; resume with --resume {id}").map_err(io)?;
            break;
        }
        let Some(answer) = parse_answer(challenge.asked, &line) else {
            writeln!(out, "could not read that answer, try again").map_err(io)?;
            continue;
        };
        match store.with_session(id, |s| s.submit_response(&challenge.challenge_id, answer)) {
            Ok(r) if r.verdict == Verdict::Correct => writeln!(out, "correct   {}", r.explanation),
            Ok(r) => {
                let expected = match (r.expected.digit, r.expected.carry, r.expected.raw_value, &r.expected.product) {
                    (Some(d), Some(c), _, _) => format!("digit {d}, carry {c}"),
                    (_, _, Some(v), _) => format!("{v}"),
                    (_, _, _, Some(p)) => p.clone(),
                    _ => String::new(),
                };
                writeln!(out, "incorrect expected {expected}   {}", r.explanation)
            }
            Err(Error::Validation(msg)) => writeln!(out, "{msg}"),
            Err(e) => return Err(e),
        }
        .map_err(io)?;
    }
    let summary = store.with_session(id, |s| Ok(s.summary()))?;
    let accuracy = summary
        .score
        .accuracy
        .map(|a| format!("{:.0}%", a * 100.0))
        .unwrap_or_else(|| "n/a".into());
    writeln!(out, "score {}/{} ({accuracy})", summary.score.correct, summary.score.total).map_err(io)?;
    for (m, acc) in &summary.per_multiplier {
        writeln!(out, "  ×{m}: {}/{}", acc.correct, acc.total).map_err(io)?;
    }
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;

    fn run_args(args: &[&str]) -> (i32, String, String) {
        let mut out = Vec::new();
        let mut err = Vec::new();
        let mut stdin = std::io::empty();
        let mut argv = vec!["trachtenberg"];
        argv.extend_from_slice(args);
        let code = run(argv, &mut stdin, &mut out, &mut err);
        (code, String::from_utf8(out).unwrap(), String::from_utf8(err).unwrap())
    }

    #[test]
    fn compute() {
        assert_eq!(run_args(&["compute", "497", "--by", "7"]), (0, "3479\n".into(), String::new()));
    }

    #[test]
    fn usage_errors_exit_two() {
        assert_eq!(run_args(&["compute", "497", "--by", "13"]).0, 2);
        assert_eq!(run_args(&["compute", "4x7", "--by", "7"]).0, 2);
        assert_eq!(run_args(&["frobnicate"]).0, 2);
        assert_eq!(run_args(&["trace", "497", "--by", "9", "--format", "xml"]).0, 2);
    }

    #[test]
    fn trace_formats() {
        let (code, table, _) = run_args(&["trace", "497", "--by", "9"]);
        assert_eq!(code, 0);
        assert!(table.starts_with("497 × 9 = 4473\n"));
        let (code, json, _) = run_args(&["trace", "497", "--by", "9", "--format", "structured"]);
        assert_eq!(code, 0);
        let doc: serde_json::Value = serde_json::from_str(&json).unwrap();
        assert_eq!(doc["product"], "4473");
    }

    #[test]
    fn small_verify() {
        let (code, out, _) = run_args(&["verify", "--max", "999", "--random", "50", "--seed", "3"]);
        assert_eq!(code, 0);
        assert!(out.contains("cases: 9050  mismatches: 0  invariant violations: 0"), "{out}");
    }

    #[test]
    fn bench_csv() {
        let (code, out, _) = run_args(&["bench", "--by", "6", "--lengths", "10,20", "--csv"]);
        assert_eq!(code, 0);
        let lines: Vec<&str> = out.lines().collect();
        assert_eq!(lines[0], OpCountReport::CSV_HEADER);
        assert_eq!(lines.len(), 5);
        assert!(lines[1].starts_with("trachtenberg,10,6,"));
        assert!(lines[2].starts_with("schoolbook,10,6,"));
    }

    #[test]
    fn answer_parsing() {
        assert_eq!(parse_answer(AskedValue::ResultDigitAndCarry, "2 1"), Some(Answer::digit_and_carry(2, 1)));
        assert_eq!(parse_answer(AskedValue::ResultDigitAndCarry, "12"), Some(Answer::digit_and_carry(2, 1)));
        assert_eq!(parse_answer(AskedValue::FinalProduct, "2982\n"), Some(Answer::product("2982")));
        assert_eq!(parse_answer(AskedValue::RawValue, "-1"), Some(Answer::raw(-1)));
        assert_eq!(parse_answer(AskedValue::ResultDigitAndCarry, "x"), None);
    }

    #[test]
    fn drill_session_on_stdin() {
        let dir = tempfile::tempdir().unwrap();
        let store = dir.path().to_str().unwrap();
        let mut stdin = std::io::Cursor::new("2982\n0\n\n");
        let mut out = Vec::new();
        let mut err = Vec::new();
        let args = [
            "trachtenberg", "drill", "--by", "6", "--min-digits", "3", "--max-digits", "3", "--count", "3",
            "--seed", "1", "--mode", "answer-only", "--store", store,
        ];
        assert_eq!(run(args, &mut stdin, &mut out, &mut err), 0, "{}", String::from_utf8_lossy(&err));
        let out = String::from_utf8(out).unwrap();
        assert!(out.contains("paused; resume with --resume"), "{out}");
        assert!(out.contains("score "), "{out}");
        assert_eq!(std::fs::read_dir(dir.path()).unwrap().count(), 1);
    }
}
