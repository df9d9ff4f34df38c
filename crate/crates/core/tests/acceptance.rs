//! Acceptance suite. Runs every exit criterion, prints one PASS/FAIL line
//! per criterion, and exits nonzero if any fails.

use std::path::PathBuf;
use std::process::Command;
use std::time::{Duration, Instant};

use rayon::prelude::*;

use trachtenberg::drill::{
    load_session, save_session, Answer, DrillConfig, DrillMode, DrillSession, NextChallenge, StepChallenge,
};
use trachtenberg::opcount::{count_schoolbook_ops, count_trace_ops, OpCountReport};
use trachtenberg::oracle::{exhaustive_verify, random_multiplicand, random_verify, reference_multiply};
use trachtenberg::trace::table_cells;
use trachtenberg::{multiply_by_rule, ComputationTrace, DigitString, Multiplier};

type Outcome = Result<String, String>;
type Criterion = (&'static str, fn() -> Outcome);

macro_rules! ensure {
    ($cond:expr, $($msg:tt)+) => {
        if !$cond {
            return Err(format!($($msg)+));
        }
    };
}

fn m(v: u32) -> Multiplier {
    Multiplier::new(v).unwrap()
}

fn within(limit: Duration, elapsed: Duration) -> Result<(), String> {
    if elapsed < limit {
        Ok(())
    } else {
        Err(format!("took {elapsed:.2?}, limit {limit:?}"))
    }
}

fn golden_dir() -> PathBuf {
    PathBuf::from(env!("CARGO_MANIFEST_DIR")).join("tests/golden")
}

/// One worked example as printed: columns from the prepended zero to the
/// rightmost digit, with each cell's raw value and incoming carry.
struct WorkedExample {
    multiplicand: &'static str,
    multiplier: u32,
    product: &'static str,
    raw: [i32; 4],
    carry_in: [u8; 4],
}

const WORKED_EXAMPLES: [WorkedExample; 10] = [
    WorkedExample { multiplicand: "123", multiplier: 11, product: "1353", raw: [1, 3, 5, 3], carry_in: [0, 0, 0, 0] },
    WorkedExample { multiplicand: "497", multiplier: 11, product: "5467", raw: [4, 13, 16, 7], carry_in: [1, 1, 0, 0] },
    WorkedExample { multiplicand: "497", multiplier: 12, product: "5964", raw: [4, 17, 25, 14], carry_in: [1, 2, 1, 0] },
    WorkedExample { multiplicand: "497", multiplier: 6, product: "2982", raw: [2, 8, 17, 12], carry_in: [0, 1, 1, 0] },
    WorkedExample { multiplicand: "497", multiplier: 7, product: "3479", raw: [2, 12, 26, 19], carry_in: [1, 2, 1, 0] },
    WorkedExample { multiplicand: "497", multiplier: 5, product: "2485", raw: [2, 4, 8, 5], carry_in: [0, 0, 0, 0] },
    WorkedExample { multiplicand: "497", multiplier: 9, product: "4473", raw: [3, 14, 7, 3], carry_in: [1, 0, 0, 0] },
    WorkedExample { multiplicand: "497", multiplier: 8, product: "3976", raw: [2, 19, 7, 6], carry_in: [1, 0, 0, 0] },
    // The printed raw row shows 7 for the middle cell; 0+3+5 is 8, which the
    // printed carry and final rows also use.
    WorkedExample { multiplicand: "497", multiplier: 4, product: "1988", raw: [1, 9, 8, 8], carry_in: [0, 0, 0, 0] },
    WorkedExample { multiplicand: "497", multiplier: 3, product: "1491", raw: [0, 14, 8, 11], carry_in: [1, 0, 1, 0] },
];

/// Parenthesised-carry form of a raw value, e.g. `(1)3`.
fn paren(v: i32) -> String {
    if v >= 10 { format!("({}){}", v / 10, v % 10) } else { v.to_string() }
}

fn worked_examples() -> Outcome {
    let started = Instant::now();
    for ex in &WORKED_EXAMPLES {
        let label = format!("{}×{}", ex.multiplicand, ex.multiplier);
        let t = multiply_by_rule(&DigitString::parse(ex.multiplicand).unwrap(), m(ex.multiplier));
        ensure!(t.product.to_text() == ex.product, "{label}: product {} != {}", t.product, ex.product);
        let raw: Vec<i32> = t.steps.iter().rev().map(|s| s.raw_value).collect();
        let cin: Vec<u8> = t.steps.iter().rev().map(|s| s.carry_in).collect();
        ensure!(raw == ex.raw, "{label}: raw values {raw:?} != {:?}", ex.raw);
        ensure!(cin == ex.carry_in, "{label}: carries {cin:?} != {:?}", ex.carry_in);

        let table = t.render_table();
        let rows: Vec<&str> = table.lines().collect();
        let raw_cells: Vec<String> = table_cells(rows[1])
            .iter()
            .map(|c| c.rsplit('=').next().unwrap().to_string())
            .collect();
        let expected_cells: Vec<String> = ex.raw.iter().map(|&v| paren(v)).collect();
        ensure!(raw_cells == expected_cells, "{label}: table raw row {raw_cells:?}");
        let final_row = table_cells(rows[3]).join("");
        ensure!(final_row == ex.product, "{label}: table final row {final_row:?}");

        let golden = golden_dir().join(format!("{}x{}.txt", ex.multiplicand, ex.multiplier));
        let expected = std::fs::read_to_string(&golden).map_err(|e| format!("{}: {e}", golden.display()))?;
        let rendered = format!("{} × {} = {}\n{}", t.multiplicand, t.multiplier, t.product, table);
        ensure!(rendered == expected, "{label}: table differs from {}", golden.display());
    }
    let nine = multiply_by_rule(&DigitString::parse("497").unwrap(), m(9)).render_table();
    let row = table_cells(nine.lines().nth(1).unwrap()).join(" | ");
    ensure!(row == "4-1=3 | 9-4+9=(1)4 | 9-9+7=7 | 10-7=3", "×9 raw row {row:?}");

    let golden_json = std::fs::read_to_string(golden_dir().join("497x6.json")).map_err(|e| e.to_string())?;
    let doc: serde_json::Value = serde_json::from_str(&golden_json).map_err(|e| e.to_string())?;
    let t = multiply_by_rule(&DigitString::parse("497").unwrap(), m(6));
    ensure!(doc == t.to_structured(), "497×6 structured form differs from golden");

    within(Duration::from_secs(1), started.elapsed())?;
    Ok(format!("10 examples, products + raw values + carries + golden tables ({:.2?})", started.elapsed()))
}

fn exhaustive_equivalence() -> Outcome {
    let all: Vec<Multiplier> = Multiplier::all().collect();
    let report = exhaustive_verify(99_999, &all);
    ensure!(report.cases_run == 900_000, "ran {} cases", report.cases_run);
    ensure!(report.mismatch_count == 0, "{} mismatches, first {:?}", report.mismatch_count, report.mismatches.first());
    ensure!(report.violation_count == 0, "{} violations, first {:?}", report.violation_count, report.violations.first());
    within(Duration::from_secs(30), report.duration)?;
    Ok(format!("900000 cases, 0 mismatches, 0 violations ({:.2?})", report.duration))
}

fn random_equivalence() -> Outcome {
    let report = random_verify(10_000, 60, 0x7ac8_7e4b);
    ensure!(report.cases_run == 10_000, "ran {} cases", report.cases_run);
    ensure!(report.mismatch_count == 0, "{} mismatches, first {:?}", report.mismatch_count, report.mismatches.first());
    ensure!(report.violation_count == 0, "{} violations", report.violation_count);
    within(Duration::from_secs(10), report.duration)?;
    Ok(format!("10000 cases of length 1-60, 0 mismatches ({:.2?})", report.duration))
}

/// The random corpus: the same draws `random_verify` makes for a seed.
fn random_corpus(seed: u64) -> Vec<(DigitString, Multiplier)> {
    use rand_chacha::rand_core::{RngCore, SeedableRng};
    let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(seed);
    (0..10_000)
        .map(|_| {
            let len = 1 + (rng.next_u64() % 60) as usize;
            let a = random_multiplicand(&mut rng, len);
            let mult = Multiplier::SUPPORTED[(rng.next_u32() % 9) as usize];
            (a, m(u32::from(mult)))
        })
        .collect()
}

fn exhaustive_corpus() -> impl ParallelIterator<Item = (DigitString, Multiplier)> {
    (0u64..=99_999)
        .into_par_iter()
        .flat_map_iter(|v| Multiplier::all().map(move |mult| (DigitString::from_u64(v), mult)))
}

/// Direct per-step checks, written out independently of `violations()`.
fn invariant_failures(t: &ComputationTrace) -> Vec<String> {
    let mut bad = Vec::new();
    if t.steps.len() != t.multiplicand.len() + 1 {
        bad.push(format!("{} steps", t.steps.len()));
    }
    for (i, s) in t.steps.iter().enumerate() {
        if s.carry_in > 2 || s.carry_out > 2 {
            bad.push(format!("step {i} carry {}/{}", s.carry_in, s.carry_out));
        }
        if s.raw_value + i32::from(s.carry_in) < 0 {
            bad.push(format!("step {i} negative sum"));
        }
        if s.result_digit > 9 {
            bad.push(format!("step {i} digit {}", s.result_digit));
        }
        if i > 0 && s.carry_in != t.steps[i - 1].carry_out {
            bad.push(format!("step {i} carry chain"));
        }
    }
    let final_carry = t.steps.last().unwrap().carry_out;
    let bound = if t.multiplier.value() <= 9 { 0 } else { 1 };
    if final_carry > bound {
        bad.push(format!("final carry {final_carry}"));
    }
    let unpadded = t.steps.len() + usize::from(final_carry == 1);
    let digits_before_canonical = t.steps.len() + usize::from(t.extra_leading_digit.is_some());
    if unpadded != digits_before_canonical {
        bad.push("extra digit disagrees with final carry".into());
    }
    bad
}

fn invariant_suite() -> Outcome {
    let started = Instant::now();
    let exhaustive: (u64, u64) = exhaustive_corpus()
        .map(|(a, mult)| (1u64, invariant_failures(&multiply_by_rule(&a, mult)).len() as u64))
        .reduce(|| (0, 0), |x, y| (x.0 + y.0, x.1 + y.1));
    let random: Vec<String> = random_corpus(0x7ac8_7e4b)
        .par_iter()
        .flat_map_iter(|(a, mult)| invariant_failures(&multiply_by_rule(a, *mult)))
        .collect();
    ensure!(exhaustive.0 == 900_000, "exhaustive corpus ran {} traces", exhaustive.0);
    ensure!(exhaustive.1 == 0, "{} violations in the exhaustive corpus", exhaustive.1);
    ensure!(random.is_empty(), "{} violations in the random corpus, first {:?}", random.len(), random.first());
    Ok(format!("910000 traces, 0 violations ({:.2?})", started.elapsed()))
}

fn cost_counts_ok(t: &ComputationTrace) -> bool {
    let rule = count_trace_ops(t);
    let school = count_schoolbook_ops(&t.multiplicand, t.multiplier);
    rule.table_lookups == 0 && school.table_lookups >= t.multiplicand.len() as u64
}

/// Per-position ceilings of the cost model: at most four additions (term,
/// term, odd bonus, carry) and one of each other primitive per position.
fn within_linear_bound(r: &OpCountReport, len: usize) -> bool {
    let positions = len as u64 + 1;
    r.additions <= 4 * positions
        && r.doublings <= positions
        && r.halvings <= positions
        && r.complements <= positions
        && r.odd_checks <= positions
}

fn cost_claim() -> Outcome {
    let exhaustive_bad = exhaustive_corpus()
        .filter(|(a, mult)| !cost_counts_ok(&multiply_by_rule(a, *mult)))
        .count();
    ensure!(exhaustive_bad == 0, "{exhaustive_bad} exhaustive traces break the table-lookup property");
    let random_bad = random_corpus(0x7ac8_7e4b)
        .par_iter()
        .filter(|(a, mult)| !cost_counts_ok(&multiply_by_rule(a, *mult)))
        .count();
    ensure!(random_bad == 0, "{random_bad} random traces break the table-lookup property");

    // Linear growth at lengths 10, 20, 40.
    let block = "1234567890";
    for mult in Multiplier::all() {
        let mut totals = Vec::new();
        for (k, len) in [(1usize, 10usize), (2, 20), (4, 40)] {
            let periodic = DigitString::parse(&block.repeat(k)).unwrap();
            let t = multiply_by_rule(&periodic, mult);
            let r = count_trace_ops(&t);
            ensure!(within_linear_bound(&r, len), "×{mult} length {len}: {r:?}");
            let s = count_schoolbook_ops(&periodic, mult);
            ensure!(s.table_lookups == len as u64, "×{mult} schoolbook lookups {}", s.table_lookups);
            totals.push(r);

            let mut rng = <rand_chacha::ChaCha8Rng as rand_chacha::rand_core::SeedableRng>::seed_from_u64(len as u64);
            for _ in 0..200 {
                let a = random_multiplicand(&mut rng, len);
                let r = count_trace_ops(&multiply_by_rule(&a, mult));
                ensure!(within_linear_bound(&r, len), "×{mult} random length {len}: {r:?}");
            }
        }
        // Repeating a 10-digit block adds the same cost for every copy.
        let fields = |r: &OpCountReport| [r.additions, r.doublings, r.halvings, r.complements, r.odd_checks];
        let (c10, c20, c40) = (fields(&totals[0]), fields(&totals[1]), fields(&totals[2]));
        for i in 0..5 {
            let step = c20[i] - c10[i];
            ensure!(c40[i] == c20[i] + 2 * step, "×{mult}: counts {c10:?} {c20:?} {c40:?} not affine in length");
        }
    }
    Ok("0 table lookups on 910000 traces; schoolbook >= 1 per digit; counts affine at 10/20/40".into())
}

/// Plain repeated addition; shares nothing with the schoolbook oracle.
fn repeated_addition(a: u64, times: u64) -> u64 {
    (0..times).fold(0u64, |acc, _| acc + a)
}

fn oracle_independence() -> Outcome {
    let started = Instant::now();
    for a in 0..=999u64 {
        let digits = DigitString::from_u64(a);
        for times in 0..=12u32 {
            let expected = repeated_addition(a, u64::from(times)).to_string();
            let got = reference_multiply(&digits, times).map_err(|e| e.to_string())?.to_text();
            ensure!(got == expected, "{a}×{times}: oracle {got}, repeated addition {expected}");
        }
    }
    within(Duration::from_secs(5), started.elapsed())?;
    Ok(format!("13013 cases agree with repeated addition ({:.2?})", started.elapsed()))
}

fn drill_config() -> DrillConfig {
    DrillConfig {
        multipliers: Multiplier::all().collect(),
        min_digits: 1,
        max_digits: 12,
        mode: DrillMode::GuidedSteps,
        seed: 42,
        problem_count: 60,
        ask_raw_value: false,
    }
}

/// Drives `count` challenges, answering every third one wrongly.
fn drive(session: &mut DrillSession, count: usize) -> Vec<StepChallenge> {
    let mut seen = Vec::new();
    for i in 0..count {
        let NextChallenge::Challenge(c) = session.next_challenge() else { break };
        let step = &session.problems[c.problem_index].trace.steps[c.position_index.unwrap()];
        let (d, carry) = (i64::from(step.result_digit), i64::from(step.carry_out));
        let answer = if i % 3 == 0 { Answer::digit_and_carry((d + 1) % 10, carry) } else { Answer::digit_and_carry(d, carry) };
        session.submit_response(&c.challenge_id, answer).unwrap();
        seen.push(c);
    }
    seen
}

fn drill_determinism() -> Outcome {
    let mut a = DrillSession::new(drill_config()).map_err(|e| e.to_string())?;
    let mut b = DrillSession::new(drill_config()).map_err(|e| e.to_string())?;
    let seq_a = drive(&mut a, 100);
    let seq_b = drive(&mut b, 100);
    ensure!(seq_a.len() == 100, "only {} challenges issued", seq_a.len());
    ensure!(seq_a == seq_b, "challenge sequences differ");
    let verdicts = |s: &DrillSession| s.responses.iter().map(|r| r.verdict).collect::<Vec<_>>();
    ensure!(verdicts(&a) == verdicts(&b), "verdicts differ");

    let dir = tempfile::tempdir().map_err(|e| e.to_string())?;
    save_session(dir.path(), &mut a).map_err(|e| e.to_string())?;
    let loaded = load_session(dir.path(), &a.session_id).map_err(|e| e.to_string())?;
    ensure!(loaded.summary() == a.summary(), "summary changed across save/load");
    ensure!(loaded.cursor == a.cursor && loaded.score == a.score, "cursor or score changed across save/load");
    ensure!(verdicts(&loaded) == verdicts(&a), "verdicts changed across save/load");
    Ok("100-challenge sequences identical; save/load summary identical".into())
}

fn cli_contract() -> Outcome {
    let bin = env!("CARGO_BIN_EXE_trachtenberg");
    let run = |args: &[&str]| Command::new(bin).args(args).output().map_err(|e| e.to_string());

    let out = run(&["compute", "497", "--by", "7"])?;
    ensure!(out.status.code() == Some(0), "compute exit {:?}", out.status.code());
    ensure!(out.stdout == b"3479\n", "compute printed {:?}", String::from_utf8_lossy(&out.stdout));

    let out = run(&["compute", "497", "--by", "13"])?;
    ensure!(out.status.code() == Some(2), "unsupported multiplier exit {:?}", out.status.code());

    for by in ["9", "3", "12"] {
        let first = run(&["trace", "497", "--by", by])?;
        let second = run(&["trace", "497", "--by", by])?;
        ensure!(first.status.success() && first.stdout == second.stdout, "trace ×{by} not byte-stable");
        let golden = std::fs::read(golden_dir().join(format!("497x{by}.txt"))).map_err(|e| e.to_string())?;
        ensure!(first.stdout == golden, "trace ×{by} differs from golden file");
        let s1 = run(&["trace", "497", "--by", by, "--format", "structured"])?;
        let s2 = run(&["trace", "497", "--by", by, "--format", "structured"])?;
        ensure!(s1.status.success() && s1.stdout == s2.stdout, "structured trace ×{by} not byte-stable");
    }
    Ok("compute 497 --by 7 -> 3479 (exit 0); --by 13 exits 2; trace byte-stable".into())
}

fn main() {
    let criteria: [Criterion; 8] = [
        ("worked-example fidelity", worked_examples),
        ("exhaustive oracle equivalence", exhaustive_equivalence),
        ("randomized oracle equivalence", random_equivalence),
        ("invariant suite", invariant_suite),
        ("cost claim (op counts)", cost_claim),
        ("oracle independence", oracle_independence),
        ("drill determinism and persistence", drill_determinism),
        ("CLI contract", cli_contract),
    ];
    let mut failed = 0;
    for (name, check) in criteria {
        match check() {
            Ok(detail) => println!("PASS  {name}: {detail}"),
            Err(why) => {
                failed += 1;
                println!("FAIL  {name}: {why}");
            }
        }
    }
    println!("acceptance: {} passed, {failed} failed", criteria.len() - failed);
    if failed > 0 {
        std::process::exit(1);
    }
}
