//! Practice sessions: seeded problem generation, per-position quizzing,
//! scoring, and persistence as an append-only event log.
//!
//! A session log is one JSON record per line, tagged by `kind`:
//! `created` (identity and full config), `challenge`, `response` and
//! `finished`. Loading a session replays the records through the same code
//! paths that produced them, so a replayed session is indistinguishable
//! from the original.

use std::collections::{BTreeMap, HashMap};
use std::fs::{self, OpenOptions};
use std::io::Write;
use std::path::{Path, PathBuf};
use std::sync::{Arc, Mutex, RwLock};
use std::time::{SystemTime, UNIX_EPOCH};

use rand_chacha::rand_core::{RngCore, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::digits::DigitString;
use crate::error::{Error, Result};
use crate::rules::{multiply_by_rule, Multiplier, PositionRole};
use crate::trace::ComputationTrace;

pub const STORE_ENV: &str = "TRACHTENBERG_STORE";
pub const DEFAULT_STORE: &str = "./sessions";
pub const MAX_DIGITS: usize = 12;
pub const MAX_PROBLEMS: usize = 10_000;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum DrillMode {
    GuidedSteps,
    AnswerOnly,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct DrillConfig {
    pub multipliers: Vec<Multiplier>,
    pub min_digits: usize,
    pub max_digits: usize,
    pub mode: DrillMode,
    pub seed: u64,
    pub problem_count: usize,
    /// In guided mode, also ask for each position's raw value before its
    /// result digit and carry.
    #[serde(default)]
    pub ask_raw_value: bool,
}

impl DrillConfig {
    /// Checks the bounds and returns the config with its multiplier set
    /// sorted and deduplicated.
    pub fn validated(mut self) -> Result<Self> {
        if self.multipliers.is_empty() {
            return Err(Error::Config("multiplier set is empty".into()));
        }
        self.multipliers.sort();
        self.multipliers.dedup();
        if self.min_digits < 1 || self.min_digits > self.max_digits || self.max_digits > MAX_DIGITS {
            return Err(Error::Config(format!(
                "digit bounds must satisfy 1 <= min_digits <= max_digits <= {MAX_DIGITS}, got {}..{}",
                self.min_digits, self.max_digits
            )));
        }
        if self.problem_count < 1 || self.problem_count > MAX_PROBLEMS {
            return Err(Error::Config(format!(
                "problem_count must be in 1..={MAX_PROBLEMS}, got {}",
                self.problem_count
            )));
        }
        if self.ask_raw_value && self.mode == DrillMode::AnswerOnly {
            return Err(Error::Config("ask_raw_value applies only to guided_steps mode".into()));
        }
        Ok(self)
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Problem {
    pub multiplicand: DigitString,
    pub multiplier: Multiplier,
    pub trace: ComputationTrace,
}

/// Uniform draw from `0..bound` by rejection, so results do not depend on
/// anything but the ChaCha8 stream.
fn uniform(rng: &mut ChaCha8Rng, bound: u64) -> u64 {
    debug_assert!(bound > 0);
    let zone = (u64::MAX / bound) * bound;
    loop {
        let x = rng.next_u64();
        if x < zone {
            return x % bound;
        }
    }
}

/// Problems for a validated config. ChaCha8 seeded with `seed_from_u64`;
/// per problem the draws are: multiplier, length, then digits left to right.
pub fn generate_problems(config: &DrillConfig) -> Vec<Problem> {
    let mut rng = ChaCha8Rng::seed_from_u64(config.seed);
    (0..config.problem_count)
        .map(|_| {
            let multiplier =
                config.multipliers[uniform(&mut rng, config.multipliers.len() as u64) as usize];
            let span = (config.max_digits - config.min_digits + 1) as u64;
            let len = config.min_digits + uniform(&mut rng, span) as usize;
            let mut digits = Vec::with_capacity(len);
            digits.push(1 + uniform(&mut rng, 9) as u8);
            for _ in 1..len {
                digits.push(uniform(&mut rng, 10) as u8);
            }
            let multiplicand = DigitString::from_digits(digits).expect("generated digits are decimal");
            let trace = multiply_by_rule(&multiplicand, multiplier);
            Problem { multiplicand, multiplier, trace }
        })
        .collect()
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum AskedValue {
    RawValue,
    ResultDigitAndCarry,
    FinalProduct,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct StepChallenge {
    pub challenge_id: String,
    pub problem_index: usize,
    pub multiplicand: String,
    pub multiplier: Multiplier,
    pub asked: AskedValue,
    /// Position fields are absent for `final_product` challenges.
    pub position_index: Option<usize>,
    pub role: Option<PositionRole>,
    pub digit: Option<u8>,
    pub neighbour: Option<u8>,
    pub carry_in: Option<u8>,
}

/// A learner's answer. Which fields are required depends on the challenge.
#[derive(Debug, Clone, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Answer {
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub digit: Option<i64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub carry: Option<i64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub raw_value: Option<i64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub product: Option<String>,
}

impl Answer {
    pub fn digit_and_carry(digit: i64, carry: i64) -> Self {
        Answer { digit: Some(digit), carry: Some(carry), ..Default::default() }
    }

    pub fn raw(value: i64) -> Self {
        Answer { raw_value: Some(value), ..Default::default() }
    }

    pub fn product(text: impl Into<String>) -> Self {
        Answer { product: Some(text.into()), ..Default::default() }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Verdict {
    Correct,
    Incorrect,
}

#[derive(Debug, Clone, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct Expected {
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub digit: Option<u8>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub carry: Option<u8>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub raw_value: Option<i32>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub product: Option<String>,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct StepResponse {
    pub challenge_id: String,
    pub problem_index: usize,
    pub multiplier: Multiplier,
    pub asked: AskedValue,
    pub answer: Answer,
    pub verdict: Verdict,
    pub expected: Expected,
    pub explanation: String,
}

#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct Cursor {
    pub problem: usize,
    pub step: usize,
    /// 0 asks the raw value, 1 asks digit and carry (guided mode with raw
    /// values enabled); always 0 otherwise.
    pub stage: u8,
}

#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct Score {
    pub correct: usize,
    pub total: usize,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Accuracy {
    pub correct: usize,
    pub total: usize,
    pub accuracy: Option<f64>,
}

impl Accuracy {
    fn new(correct: usize, total: usize) -> Self {
        let accuracy = (total > 0).then(|| correct as f64 / total as f64);
        Accuracy { correct, total, accuracy }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SessionSummary {
    pub session_id: String,
    #[serde(flatten)]
    pub score: Accuracy,
    pub per_multiplier: BTreeMap<u8, Accuracy>,
    pub elapsed_seconds: f64,
    pub finished: bool,
    pub problems_total: usize,
    pub problems_completed: usize,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(tag = "status", rename_all = "snake_case")]
pub enum NextChallenge {
    Challenge(StepChallenge),
    Finished,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum SessionEvent {
    Created { session_id: String, created_at: u64, config: DrillConfig },
    Challenge { at: u64, challenge: StepChallenge },
    Response { at: u64, challenge_id: String, answer: Answer, verdict: Verdict },
    Finished { at: u64 },
}

pub fn now_millis() -> u64 {
    SystemTime::now()
        .duration_since(UNIX_EPOCH)
        .map(|d| d.as_millis() as u64)
        .unwrap_or(0)
}

#[derive(Debug, Clone)]
pub struct DrillSession {
    pub session_id: String,
    pub config: DrillConfig,
    /// Unix time in milliseconds.
    pub created_at: u64,
    pub problems: Vec<Problem>,
    pub cursor: Cursor,
    pub responses: Vec<StepResponse>,
    pub score: Score,
    pub finished: bool,
    open: Option<StepChallenge>,
    last_activity: u64,
    events: Vec<SessionEvent>,
    persisted: usize,
}

impl DrillSession {
    pub fn new(config: DrillConfig) -> Result<Self> {
        Self::with_identity(config, uuid::Uuid::new_v4().simple().to_string(), now_millis())
    }

    pub fn with_identity(config: DrillConfig, session_id: String, created_at: u64) -> Result<Self> {
        let config = config.validated()?;
        let problems = generate_problems(&config);
        let events = vec![SessionEvent::Created {
            session_id: session_id.clone(),
            created_at,
            config: config.clone(),
        }];
        Ok(DrillSession {
            session_id,
            config,
            created_at,
            problems,
            cursor: Cursor::default(),
            responses: Vec::new(),
            score: Score::default(),
            finished: false,
            open: None,
            last_activity: created_at,
            events,
            persisted: 0,
        })
    }

    pub fn events(&self) -> &[SessionEvent] {
        &self.events
    }

    pub fn open_challenge(&self) -> Option<&StepChallenge> {
        self.open.as_ref()
    }

    fn asks_raw(&self) -> bool {
        self.config.mode == DrillMode::GuidedSteps && self.config.ask_raw_value
    }

    fn build_challenge(&self) -> StepChallenge {
        let Cursor { problem, step, stage } = self.cursor;
        let p = &self.problems[problem];
        let base = StepChallenge {
            challenge_id: String::new(),
            problem_index: problem,
            multiplicand: p.multiplicand.to_text(),
            multiplier: p.multiplier,
            asked: AskedValue::FinalProduct,
            position_index: None,
            role: None,
            digit: None,
            neighbour: None,
            carry_in: None,
        };
        match self.config.mode {
            DrillMode::AnswerOnly => StepChallenge { challenge_id: format!("p{problem}-product"), ..base },
            DrillMode::GuidedSteps => {
                let s = &p.trace.steps[step];
                let (asked, tag) = if self.asks_raw() && stage == 0 {
                    (AskedValue::RawValue, "raw")
                } else {
                    (AskedValue::ResultDigitAndCarry, "digit")
                };
                StepChallenge {
                    challenge_id: format!("p{problem}-s{step}-{tag}"),
                    asked,
                    position_index: Some(s.position_index),
                    role: Some(s.role),
                    digit: Some(s.digit),
                    neighbour: Some(s.neighbour),
                    carry_in: Some(s.carry_in),
                    ..base
                }
            }
        }
    }

    /// The open challenge, issuing a new one if none is open.
    pub fn next_challenge(&mut self) -> NextChallenge {
        self.next_challenge_at(now_millis())
    }

    fn next_challenge_at(&mut self, at: u64) -> NextChallenge {
        if self.finished {
            return NextChallenge::Finished;
        }
        if let Some(open) = &self.open {
            return NextChallenge::Challenge(open.clone());
        }
        let challenge = self.build_challenge();
        self.open = Some(challenge.clone());
        self.last_activity = self.last_activity.max(at);
        self.events.push(SessionEvent::Challenge { at, challenge: challenge.clone() });
        NextChallenge::Challenge(challenge)
    }

    pub fn submit_response(&mut self, challenge_id: &str, answer: Answer) -> Result<StepResponse> {
        self.submit_response_at(challenge_id, answer, now_millis())
    }

    fn submit_response_at(&mut self, challenge_id: &str, answer: Answer, at: u64) -> Result<StepResponse> {
        let open = match &self.open {
            Some(open) if open.challenge_id == challenge_id => open.clone(),
            Some(open) => {
                return Err(Error::Challenge(format!(
                    "{challenge_id:?} is not the open challenge ({:?})",
                    open.challenge_id
                )))
            }
            None => {
                return Err(Error::Challenge(format!("{challenge_id:?} is not open")));
            }
        };
        let problem = &self.problems[open.problem_index];
        let (verdict, expected, explanation) = match open.asked {
            AskedValue::ResultDigitAndCarry => {
                let digit = answer_field("digit", answer.digit, 0..=9)?;
                let carry = answer_field("carry", answer.carry, 0..=9)?;
                let s = &problem.trace.steps[self.cursor.step];
                let ok = digit == i64::from(s.result_digit) && carry == i64::from(s.carry_out);
                let expected = Expected {
                    digit: Some(s.result_digit),
                    carry: Some(s.carry_out),
                    ..Default::default()
                };
                (ok, expected, s.formula_rendering.clone())
            }
            AskedValue::RawValue => {
                let raw = answer_field("raw_value", answer.raw_value, -99..=99)?;
                let s = &problem.trace.steps[self.cursor.step];
                let expected = Expected { raw_value: Some(s.raw_value), ..Default::default() };
                (raw == i64::from(s.raw_value), expected, s.formula_rendering.clone())
            }
            AskedValue::FinalProduct => {
                let text = answer
                    .product
                    .as_deref()
                    .ok_or_else(|| Error::Validation("missing field `product`".into()))?;
                let given = DigitString::parse(text.trim())
                    .map_err(|e| Error::Validation(format!("product: {e}")))?;
                let expected = Expected {
                    product: Some(problem.trace.product.to_text()),
                    ..Default::default()
                };
                (given == problem.trace.product, expected, product_explanation(&problem.trace))
            }
        };
        let verdict = if verdict { Verdict::Correct } else { Verdict::Incorrect };
        let response = StepResponse {
            challenge_id: challenge_id.to_string(),
            problem_index: open.problem_index,
            multiplier: open.multiplier,
            asked: open.asked,
            answer: answer.clone(),
            verdict,
            expected,
            explanation,
        };

        self.responses.push(response.clone());
        self.score.total += 1;
        if verdict == Verdict::Correct {
            self.score.correct += 1;
        }
        self.open = None;
        self.last_activity = self.last_activity.max(at);
        self.events.push(SessionEvent::Response {
            at,
            challenge_id: challenge_id.to_string(),
            answer,
            verdict,
        });
        self.advance(at);
        Ok(response)
    }

    fn advance(&mut self, at: u64) {
        let steps = self.problems[self.cursor.problem].trace.steps.len();
        let c = &mut self.cursor;
        match self.config.mode {
            DrillMode::AnswerOnly => c.problem += 1,
            DrillMode::GuidedSteps => {
                if self.config.ask_raw_value && c.stage == 0 {
                    c.stage = 1;
                    return;
                }
                c.stage = 0;
                c.step += 1;
                if c.step == steps {
                    c.step = 0;
                    c.problem += 1;
                }
            }
        }
        if c.problem == self.problems.len() {
            // Park the cursor on the last problem so it stays in bounds.
            c.problem = self.problems.len() - 1;
            c.step = match self.config.mode {
                DrillMode::AnswerOnly => 0,
                DrillMode::GuidedSteps => self.problems[c.problem].trace.steps.len() - 1,
            };
            self.finished = true;
            self.events.push(SessionEvent::Finished { at });
        }
    }

    fn problems_completed(&self) -> usize {
        if self.finished {
            self.problems.len()
        } else {
            self.cursor.problem
        }
    }

    pub fn summary(&self) -> SessionSummary {
        let mut per: BTreeMap<u8, (usize, usize)> = BTreeMap::new();
        for r in &self.responses {
            let e = per.entry(r.multiplier.value()).or_default();
            e.1 += 1;
            if r.verdict == Verdict::Correct {
                e.0 += 1;
            }
        }
        SessionSummary {
            session_id: self.session_id.clone(),
            score: Accuracy::new(self.score.correct, self.score.total),
            per_multiplier: per.into_iter().map(|(m, (c, t))| (m, Accuracy::new(c, t))).collect(),
            elapsed_seconds: self.last_activity.saturating_sub(self.created_at) as f64 / 1000.0,
            finished: self.finished,
            problems_total: self.problems.len(),
            problems_completed: self.problems_completed(),
        }
    }

    /// Rebuilds a session from its event records.
    pub fn replay<I>(records: I) -> Result<Self>
    where
        I: IntoIterator<Item = (usize, SessionEvent)>,
    {
        let mut records = records.into_iter();
        let mut session = match records.next() {
            Some((_, SessionEvent::Created { session_id, created_at, config })) => {
                DrillSession::with_identity(config, session_id, created_at)
                    .map_err(|e| Error::Persistence { line: 1, message: e.to_string() })?
            }
            Some((line, _)) => {
                return Err(Error::Persistence { line, message: "first record must be `created`".into() })
            }
            None => return Err(Error::Persistence { line: 0, message: "empty session log".into() }),
        };
        for (line, event) in records {
            let fail = |message: String| Error::Persistence { line, message };
            match event {
                SessionEvent::Created { .. } => return Err(fail("duplicate `created` record".into())),
                SessionEvent::Challenge { at, challenge } => {
                    if session.open.is_some() || session.finished {
                        return Err(fail("challenge issued while another is open".into()));
                    }
                    match session.next_challenge_at(at) {
                        NextChallenge::Challenge(c) if c == challenge => {}
                        _ => return Err(fail(format!("challenge {:?} does not match replay", challenge.challenge_id))),
                    }
                }
                SessionEvent::Response { at, challenge_id, answer, verdict } => {
                    let r = session
                        .submit_response_at(&challenge_id, answer, at)
                        .map_err(|e| fail(e.to_string()))?;
                    if r.verdict != verdict {
                        return Err(fail(format!("logged verdict {verdict:?} but replay gives {:?}", r.verdict)));
                    }
                }
                SessionEvent::Finished { at } => {
                    if !session.finished {
                        return Err(fail("`finished` record before the last response".into()));
                    }
                    session.last_activity = session.last_activity.max(at);
                }
            }
        }
        session.persisted = session.events.len();
        Ok(session)
    }
}

fn answer_field(name: &str, value: Option<i64>, range: std::ops::RangeInclusive<i64>) -> Result<i64> {
    let v = value.ok_or_else(|| Error::Validation(format!("missing field `{name}`")))?;
    if !range.contains(&v) {
        return Err(Error::Validation(format!(
            "`{name}` must be in {}..={}, got {v}",
            range.start(),
            range.end()
        )));
    }
    Ok(v)
}

fn product_explanation(trace: &ComputationTrace) -> String {
    let cells: Vec<&str> = trace.steps.iter().rev().map(|s| s.formula_rendering.as_str()).collect();
    format!(
        "{} × {}: {} → {}",
        trace.multiplicand,
        trace.multiplier,
        cells.join(" | "),
        trace.product
    )
}

fn valid_session_id(id: &str) -> bool {
    !id.is_empty() && id.len() <= 64 && id.chars().all(|c| c.is_ascii_alphanumeric() || c == '-' || c == '_')
}

fn log_path(dir: &Path, session_id: &str) -> PathBuf {
    dir.join(format!("{session_id}.log"))
}

/// Appends the session's not-yet-written events to `<dir>/<id>.log`.
pub fn save_session(dir: &Path, session: &mut DrillSession) -> Result<()> {
    if session.persisted == session.events.len() {
        return Ok(());
    }
    fs::create_dir_all(dir)?;
    let mut buf = String::new();
    for event in &session.events[session.persisted..] {
        buf.push_str(&serde_json::to_string(event).map_err(|e| Error::Io(e.to_string()))?);
        buf.push('\n');
    }
    let mut file = OpenOptions::new()
        .create(true)
        .append(true)
        .open(log_path(dir, &session.session_id))?;
    file.write_all(buf.as_bytes())?;
    file.flush()?;
    session.persisted = session.events.len();
    Ok(())
}

/// Replays `<dir>/<id>.log`. A final line without a newline that does not
/// parse is treated as a torn write and ignored.
pub fn load_session(dir: &Path, session_id: &str) -> Result<DrillSession> {
    if !valid_session_id(session_id) {
        return Err(Error::NotFound(format!("session {session_id:?}")));
    }
    let text = match fs::read_to_string(log_path(dir, session_id)) {
        Ok(text) => text,
        Err(e) if e.kind() == std::io::ErrorKind::NotFound => {
            return Err(Error::NotFound(format!("session {session_id:?}")))
        }
        Err(e) => return Err(e.into()),
    };
    let complete = text.ends_with('\n');
    let lines: Vec<&str> = text.lines().collect();
    let mut records = Vec::with_capacity(lines.len());
    for (i, line) in lines.iter().enumerate() {
        if line.trim().is_empty() {
            continue;
        }
        match serde_json::from_str::<SessionEvent>(line) {
            Ok(event) => records.push((i + 1, event)),
            Err(_) if i + 1 == lines.len() && !complete => break,
            Err(e) => return Err(Error::Persistence { line: i + 1, message: e.to_string() }),
        }
    }
    let session = DrillSession::replay(records)?;
    if session.session_id != session_id {
        return Err(Error::Persistence {
            line: 1,
            message: format!("log belongs to session {:?}", session.session_id),
        });
    }
    Ok(session)
}

pub type SharedSession = Arc<Mutex<DrillSession>>;

/// Directory-backed registry of live sessions. Each session sits behind its
/// own mutex; sessions not in memory are replayed from disk on first use.
#[derive(Debug)]
pub struct SessionStore {
    dir: PathBuf,
    sessions: RwLock<HashMap<String, SharedSession>>,
}

impl SessionStore {
    pub fn new(dir: impl Into<PathBuf>) -> Self {
        SessionStore { dir: dir.into(), sessions: RwLock::new(HashMap::new()) }
    }

    /// Store directory from `TRACHTENBERG_STORE`, falling back to `./sessions`.
    pub fn default_dir() -> PathBuf {
        std::env::var_os(STORE_ENV).map(PathBuf::from).unwrap_or_else(|| PathBuf::from(DEFAULT_STORE))
    }

    pub fn dir(&self) -> &Path {
        &self.dir
    }

    pub fn create(&self, config: DrillConfig) -> Result<SharedSession> {
        let mut session = DrillSession::new(config)?;
        save_session(&self.dir, &mut session)?;
        let id = session.session_id.clone();
        let shared = Arc::new(Mutex::new(session));
        self.sessions.write().expect("session map poisoned").insert(id, shared.clone());
        Ok(shared)
    }

    pub fn get(&self, session_id: &str) -> Result<SharedSession> {
        if let Some(s) = self.sessions.read().expect("session map poisoned").get(session_id) {
            return Ok(s.clone());
        }
        let loaded = load_session(&self.dir, session_id)?;
        let mut map = self.sessions.write().expect("session map poisoned");
        Ok(map
            .entry(session_id.to_string())
            .or_insert_with(|| Arc::new(Mutex::new(loaded)))
            .clone())
    }

    /// Runs `f` on the session under its lock and persists any new events.
    pub fn with_session<T>(&self, session_id: &str, f: impl FnOnce(&mut DrillSession) -> Result<T>) -> Result<T> {
        let shared = self.get(session_id)?;
        let mut session = shared.lock().unwrap_or_else(|p| p.into_inner());
        let out = f(&mut session);
        save_session(&self.dir, &mut session)?;
        out
    }
}
