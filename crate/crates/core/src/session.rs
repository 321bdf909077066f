//! Server-authoritative lifecycle of a candidate's attempt.
//!
//! A session moves strictly forward:
//!
//! ```text
//! Registered -> InfoShown -> InProgress -> Submitted
//!                                      \-> Expired
//! ```
//!
//! Every time-dependent operation takes the server's `now`; nothing here
//! trusts a client timestamp. Answers are accepted only while
//! `now < deadline`, so the answer sheet of a finished session holds exactly
//! the answers recorded before the deadline.

use std::collections::HashMap;
use std::fmt;
use std::sync::{Arc, Mutex, MutexGuard, RwLock};

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::clock::Timestamp;
use crate::exam::{
    assemble_exam, per_question_budget, score, AnswerSheet, Category, ExamBlueprint, ExamError,
    ExamForm, Question, QuestionId, ScoreReport, CHOICES_PER_QUESTION,
};

#[derive(Clone, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(transparent)]
pub struct SessionId(String);

impl SessionId {
    pub fn random() -> Self {
        SessionId(format!("{:032x}", rand::random::<u128>()))
    }

    pub fn as_str(&self) -> &str {
        &self.0
    }
}

impl fmt::Display for SessionId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.0)
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(tag = "state", rename_all = "snake_case")]
pub enum SessionState {
    Registered,
    InfoShown,
    InProgress {
        started_at: Timestamp,
        deadline: Timestamp,
    },
    Submitted {
        started_at: Timestamp,
        at: Timestamp,
    },
    Expired {
        started_at: Timestamp,
        at: Timestamp,
    },
}

impl SessionState {
    pub fn name(&self) -> &'static str {
        match self {
            SessionState::Registered => "registered",
            SessionState::InfoShown => "info_shown",
            SessionState::InProgress { .. } => "in_progress",
            SessionState::Submitted { .. } => "submitted",
            SessionState::Expired { .. } => "expired",
        }
    }

    pub fn is_terminal(&self) -> bool {
        matches!(
            self,
            SessionState::Submitted { .. } | SessionState::Expired { .. }
        )
    }

    pub fn is_started(&self) -> bool {
        !matches!(self, SessionState::Registered | SessionState::InfoShown)
    }
}

/// Operations a session accepts; used in error reports.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Operation {
    PresentInfo,
    Start,
    ViewForm,
    RecordAnswer,
    Submit,
    Feedback,
}

impl Operation {
    pub const ALL: [Operation; 6] = [
        Operation::PresentInfo,
        Operation::Start,
        Operation::ViewForm,
        Operation::RecordAnswer,
        Operation::Submit,
        Operation::Feedback,
    ];
}

impl fmt::Display for Operation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let s = match self {
            Operation::PresentInfo => "present_info",
            Operation::Start => "start",
            Operation::ViewForm => "view_form",
            Operation::RecordAnswer => "record_answer",
            Operation::Submit => "submit",
            Operation::Feedback => "feedback",
        };
        f.write_str(s)
    }
}

#[derive(Debug, Error, PartialEq, Eq)]
pub enum SessionError {
    #[error("cannot {op} while session is {state}")]
    InvalidState { op: Operation, state: &'static str },
    #[error("deadline {deadline} has passed")]
    DeadlineExceeded { deadline: Timestamp },
    #[error("question {0} is not on this form")]
    NotInForm(QuestionId),
    #[error("choice {0} is out of range")]
    ChoiceOutOfRange(u32),
    #[error("candidate {0} already has a session for this exam")]
    DuplicateSession(String),
    #[error("no such session {0}")]
    UnknownSession(SessionId),
    #[error(transparent)]
    Assembly(#[from] ExamError),
}

/// What the candidate sees before starting.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct ExamInfo {
    pub subject_name: String,
    pub n_questions: u32,
    pub duration_secs: u64,
    pub per_question_budget_secs: u64,
    pub weight: u32,
    pub max_score: u32,
    pub policy: String,
}

impl ExamInfo {
    pub fn for_blueprint(bp: &ExamBlueprint) -> Self {
        let minutes = bp.duration_secs() / 60;
        let secs = bp.duration_secs() % 60;
        let span = match (minutes, secs) {
            (0, s) => format!("{s} seconds"),
            (m, 0) => format!("{m} minutes"),
            (m, s) => format!("{m} minutes {s} seconds"),
        };
        ExamInfo {
            subject_name: bp.subject().to_owned(),
            n_questions: bp.n_questions(),
            duration_secs: bp.duration_secs(),
            per_question_budget_secs: per_question_budget(bp),
            weight: bp.weight(),
            max_score: bp.max_score(),
            policy: format!(
                "The exam starts when you press start and ends {span} later, measured on \
                 the server clock. Answers received after the end are not accepted and \
                 the exam is submitted automatically."
            ),
        }
    }
}

/// A question as shown to a candidate: no answer key.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct QuestionView {
    pub number: usize,
    pub id: QuestionId,
    pub text: String,
    pub choices: Vec<String>,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct FormView {
    pub form_id: String,
    pub items: Vec<QuestionView>,
}

impl FormView {
    fn of(form: &ExamForm) -> Self {
        FormView {
            form_id: form.form_id.clone(),
            items: form
                .items
                .iter()
                .enumerate()
                .map(|(i, q)| QuestionView {
                    number: i + 1,
                    id: q.id.clone(),
                    text: q.text.clone(),
                    choices: q.choices.clone(),
                })
                .collect(),
        }
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct StartedExam {
    pub started_at: Timestamp,
    pub deadline: Timestamp,
    pub per_question_budget_secs: u64,
    pub form: FormView,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct AnswerAck {
    pub question_id: QuestionId,
    pub choice: u32,
    pub recorded_at: Timestamp,
    pub answered: usize,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Outcome {
    Submitted,
    Expired,
}

/// A session that just reached a terminal state, with its report.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct Finalized {
    pub session_id: SessionId,
    pub candidate: String,
    pub outcome: Outcome,
    pub at: Timestamp,
    pub report: ScoreReport,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Verdict {
    Correct,
    Wrong,
    Unanswered,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct FeedbackItem {
    pub number: usize,
    pub question_id: QuestionId,
    pub category: Category,
    pub text: String,
    pub choices: Vec<String>,
    pub chosen: Option<u32>,
    pub correct_index: u32,
    pub verdict: Verdict,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct Feedback {
    pub outcome: Outcome,
    pub report: ScoreReport,
    pub items: Vec<FeedbackItem>,
}

/// One candidate's attempt.
#[derive(Clone, Debug)]
pub struct ExamSession {
    id: SessionId,
    candidate: String,
    blueprint: Arc<ExamBlueprint>,
    form: ExamForm,
    sheet: AnswerSheet,
    state: SessionState,
    report: Option<ScoreReport>,
}

impl ExamSession {
    pub fn new(
        id: SessionId,
        candidate: impl Into<String>,
        bank: &[Question],
        blueprint: Arc<ExamBlueprint>,
        seed: u64,
    ) -> Result<Self, SessionError> {
        let form = assemble_exam(bank, &blueprint, seed)?;
        Ok(ExamSession {
            id,
            candidate: candidate.into(),
            blueprint,
            form,
            sheet: AnswerSheet::new(),
            state: SessionState::Registered,
            report: None,
        })
    }

    pub fn id(&self) -> &SessionId {
        &self.id
    }

    pub fn candidate(&self) -> &str {
        &self.candidate
    }

    pub fn state(&self) -> SessionState {
        self.state
    }

    pub fn form(&self) -> &ExamForm {
        &self.form
    }

    pub fn sheet(&self) -> &AnswerSheet {
        &self.sheet
    }

    pub fn blueprint(&self) -> &ExamBlueprint {
        &self.blueprint
    }

    pub fn report(&self) -> Option<&ScoreReport> {
        self.report.as_ref()
    }

    fn invalid(&self, op: Operation) -> SessionError {
        SessionError::InvalidState {
            op,
            state: self.state.name(),
        }
    }

    pub fn present_info(&mut self) -> Result<ExamInfo, SessionError> {
        match self.state {
            SessionState::Registered | SessionState::InfoShown => {
                self.state = SessionState::InfoShown;
                Ok(ExamInfo::for_blueprint(&self.blueprint))
            }
            _ => Err(self.invalid(Operation::PresentInfo)),
        }
    }

    pub fn start(&mut self, now: Timestamp) -> Result<StartedExam, SessionError> {
        if self.state != SessionState::InfoShown {
            return Err(self.invalid(Operation::Start));
        }
        let deadline = now + self.blueprint.duration_secs();
        self.state = SessionState::InProgress {
            started_at: now,
            deadline,
        };
        Ok(StartedExam {
            started_at: now,
            deadline,
            per_question_budget_secs: per_question_budget(&self.blueprint),
            form: FormView::of(&self.form),
        })
    }

    /// The keyless form, available once the exam has started.
    pub fn form_view(&self) -> Result<FormView, SessionError> {
        if !self.state.is_started() {
            return Err(self.invalid(Operation::ViewForm));
        }
        Ok(FormView::of(&self.form))
    }

    pub fn record_answer(
        &mut self,
        question: QuestionId,
        choice: u32,
        now: Timestamp,
    ) -> Result<AnswerAck, SessionError> {
        let SessionState::InProgress { deadline, .. } = self.state else {
            return Err(self.invalid(Operation::RecordAnswer));
        };
        if now >= deadline {
            self.expire();
            return Err(SessionError::DeadlineExceeded { deadline });
        }
        if !self.form.contains(&question) {
            return Err(SessionError::NotInForm(question));
        }
        if choice as usize >= CHOICES_PER_QUESTION {
            return Err(SessionError::ChoiceOutOfRange(choice));
        }
        self.sheet.record(question.clone(), choice);
        Ok(AnswerAck {
            question_id: question,
            choice,
            recorded_at: now,
            answered: self.sheet.len(),
        })
    }

    /// Ends the attempt. On time it is `Submitted` with the real elapsed
    /// time; late it becomes `Expired` and is graded on what was recorded
    /// before the deadline, with elapsed set to the full duration.
    pub fn submit(&mut self, now: Timestamp) -> Result<Finalized, SessionError> {
        let SessionState::InProgress {
            started_at,
            deadline,
        } = self.state
        else {
            return Err(self.invalid(Operation::Submit));
        };
        if now > deadline {
            return Ok(self.expire());
        }
        let report = self.grade(now.secs_since(started_at));
        self.state = SessionState::Submitted {
            started_at,
            at: now,
        };
        self.report = Some(report);
        Ok(self.finalized().expect("terminal"))
    }

    /// Expires the session if its deadline is strictly before `now`.
    pub fn expire_if_overdue(&mut self, now: Timestamp) -> Option<Finalized> {
        match self.state {
            SessionState::InProgress { deadline, .. } if deadline < now => Some(self.expire()),
            _ => None,
        }
    }

    fn expire(&mut self) -> Finalized {
        let SessionState::InProgress {
            started_at,
            deadline,
        } = self.state
        else {
            unreachable!("expire called in state {}", self.state.name());
        };
        let report = self.grade(self.blueprint.duration_secs());
        self.state = SessionState::Expired {
            started_at,
            at: deadline,
        };
        self.report = Some(report);
        self.finalized().expect("terminal")
    }

    fn grade(&self, elapsed: u64) -> ScoreReport {
        score(&self.form, &self.sheet, &self.blueprint, elapsed)
            .expect("sheet only holds questions from the form")
    }

    /// The terminal record, if the session has finished.
    pub fn finalized(&self) -> Option<Finalized> {
        let (outcome, at) = match self.state {
            SessionState::Submitted { at, .. } => (Outcome::Submitted, at),
            SessionState::Expired { at, .. } => (Outcome::Expired, at),
            _ => return None,
        };
        Some(Finalized {
            session_id: self.id.clone(),
            candidate: self.candidate.clone(),
            outcome,
            at,
            report: self.report.clone()?,
        })
    }

    /// Per-question review. Answer keys are only released here, after the
    /// session has ended.
    pub fn feedback(&self) -> Result<Feedback, SessionError> {
        let Some(done) = self.finalized() else {
            return Err(self.invalid(Operation::Feedback));
        };
        let items = self
            .form
            .items
            .iter()
            .enumerate()
            .map(|(i, q)| {
                let chosen = self.sheet.get(&q.id);
                let verdict = match chosen {
                    None => Verdict::Unanswered,
                    Some(c) if c == q.correct_index => Verdict::Correct,
                    Some(_) => Verdict::Wrong,
                };
                FeedbackItem {
                    number: i + 1,
                    question_id: q.id.clone(),
                    category: q.category.clone(),
                    text: q.text.clone(),
                    choices: q.choices.clone(),
                    chosen,
                    correct_index: q.correct_index,
                    verdict,
                }
            })
            .collect();
        Ok(Feedback {
            outcome: done.outcome,
            report: done.report,
            items,
        })
    }
}

#[derive(Default)]
struct Registry {
    by_id: HashMap<SessionId, Arc<Mutex<ExamSession>>>,
    by_candidate: HashMap<String, SessionId>,
}

/// All live and finished sessions of one exam.
///
/// Each session sits behind its own mutex, so work on different candidates
/// never contends while calls on the same session are serialized. Sessions
/// that reach a terminal state through any path are queued in an outbox for
/// the caller to persist; see [`SessionManager::take_finalized`].
#[derive(Default)]
pub struct SessionManager {
    registry: RwLock<Registry>,
    outbox: Mutex<Vec<Finalized>>,
}

fn lock<T>(m: &Mutex<T>) -> MutexGuard<'_, T> {
    m.lock().unwrap_or_else(|e| e.into_inner())
}

impl SessionManager {
    pub fn new() -> Self {
        Self::default()
    }

    /// Registers a new attempt for `candidate`. Attempts are single-shot: a
    /// candidate who already has a session, finished or not, is refused.
    pub fn create_session(
        &self,
        candidate: &str,
        bank: &[Question],
        blueprint: Arc<ExamBlueprint>,
        seed: u64,
    ) -> Result<SessionId, SessionError> {
        let mut reg = self.registry.write().unwrap_or_else(|e| e.into_inner());
        if reg.by_candidate.contains_key(candidate) {
            return Err(SessionError::DuplicateSession(candidate.to_owned()));
        }
        let id = SessionId::random();
        let session = ExamSession::new(id.clone(), candidate, bank, blueprint, seed)?;
        reg.by_candidate.insert(candidate.to_owned(), id.clone());
        reg.by_id.insert(id.clone(), Arc::new(Mutex::new(session)));
        Ok(id)
    }

    pub fn session_of(&self, candidate: &str) -> Option<SessionId> {
        let reg = self.registry.read().unwrap_or_else(|e| e.into_inner());
        reg.by_candidate.get(candidate).cloned()
    }

    fn handle(&self, id: &SessionId) -> Result<Arc<Mutex<ExamSession>>, SessionError> {
        let reg = self.registry.read().unwrap_or_else(|e| e.into_inner());
        reg.by_id
            .get(id)
            .cloned()
            .ok_or_else(|| SessionError::UnknownSession(id.clone()))
    }

    fn with<R>(
        &self,
        id: &SessionId,
        f: impl FnOnce(&mut ExamSession) -> Result<R, SessionError>,
    ) -> Result<R, SessionError> {
        let handle = self.handle(id)?;
        let mut session = lock(&handle);
        let was_terminal = session.state.is_terminal();
        let result = f(&mut session);
        if !was_terminal {
            if let Some(done) = session.finalized() {
                lock(&self.outbox).push(done);
            }
        }
        result
    }

    pub fn snapshot(&self, id: &SessionId) -> Result<ExamSession, SessionError> {
        let handle = self.handle(id)?;
        let session = lock(&handle).clone();
        Ok(session)
    }

    pub fn present_info(&self, id: &SessionId) -> Result<ExamInfo, SessionError> {
        self.with(id, |s| s.present_info())
    }

    pub fn start_exam(&self, id: &SessionId, now: Timestamp) -> Result<StartedExam, SessionError> {
        self.with(id, |s| s.start(now))
    }

    pub fn form_view(&self, id: &SessionId) -> Result<FormView, SessionError> {
        self.with(id, |s| s.form_view())
    }

    pub fn record_answer(
        &self,
        id: &SessionId,
        question: QuestionId,
        choice: u32,
        now: Timestamp,
    ) -> Result<AnswerAck, SessionError> {
        self.with(id, |s| s.record_answer(question, choice, now))
    }

    pub fn submit(&self, id: &SessionId, now: Timestamp) -> Result<Finalized, SessionError> {
        self.with(id, |s| s.submit(now))
    }

    pub fn feedback(&self, id: &SessionId) -> Result<Feedback, SessionError> {
        self.with(id, |s| s.feedback())
    }

    /// Expires one session if it is overdue. Returns whether it did.
    pub fn expire_if_overdue(&self, id: &SessionId, now: Timestamp) -> Result<bool, SessionError> {
        self.with(id, |s| Ok(s.expire_if_overdue(now).is_some()))
    }

    /// Expires every in-progress session whose deadline is before `now`.
    pub fn expire_sweep(&self, now: Timestamp) -> Vec<Finalized> {
        let handles: Vec<_> = {
            let reg = self.registry.read().unwrap_or_else(|e| e.into_inner());
            reg.by_id.values().cloned().collect()
        };
        let mut done = Vec::new();
        for handle in handles {
            let mut session = lock(&handle);
            if let Some(f) = session.expire_if_overdue(now) {
                lock(&self.outbox).push(f.clone());
                done.push(f);
            }
        }
        done
    }

    /// Drains sessions finalized since the last call.
    pub fn take_finalized(&self) -> Vec<Finalized> {
        std::mem::take(&mut *lock(&self.outbox))
    }

    pub fn len(&self) -> usize {
        self.registry
            .read()
            .unwrap_or_else(|e| e.into_inner())
            .by_id
            .len()
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn bank() -> Vec<Question> {
        Category::canonical()
            .iter()
            .flat_map(|c| {
                (0..10).map(move |i| {
                    Question::new(
                        format!("{c}-{i}"),
                        c.as_str(),
                        format!("{c} {i}?"),
                        ["a", "b", "c", "d"],
                        (i % 4) as u32,
                    )
                })
            })
            .collect()
    }

    fn session() -> ExamSession {
        ExamSession::new(
            SessionId::random(),
            "aram.kamal",
            &bank(),
            Arc::new(ExamBlueprint::default()),
            11,
        )
        .unwrap()
    }

    fn started(at: i64) -> ExamSession {
        let mut s = session();
        s.present_info().unwrap();
        s.start(Timestamp(at)).unwrap();
        s
    }

    #[test]
    fn info_is_idempotent_until_start() {
        let mut s = session();
        let a = s.present_info().unwrap();
        let b = s.present_info().unwrap();
        assert_eq!(a, b);
        assert_eq!(a.duration_secs, 3600);
        assert_eq!(a.per_question_budget_secs, 72);
        assert_eq!(s.state(), SessionState::InfoShown);
    }

    #[test]
    fn start_requires_info() {
        let mut s = session();
        assert!(matches!(
            s.start(Timestamp(0)),
            Err(SessionError::InvalidState {
                op: Operation::Start,
                state: "registered"
            })
        ));
    }

    #[test]
    fn start_sets_deadline() {
        let mut s = session();
        s.present_info().unwrap();
        let st = s.start(Timestamp(0)).unwrap();
        assert_eq!(st.deadline, Timestamp(3600));
        assert_eq!(st.form.items.len(), 50);
        assert!(s.start(Timestamp(1)).is_err());
        assert!(s.present_info().is_err());
    }

    #[test]
    fn answer_window_boundaries() {
        let mut s = started(0);
        let q = s.form().items[0].id.clone();
        assert!(s.record_answer(q.clone(), 1, Timestamp(3599)).is_ok());
        assert_eq!(
            s.record_answer(q, 2, Timestamp(3601)),
            Err(SessionError::DeadlineExceeded {
                deadline: Timestamp(3600)
            })
        );
        assert!(matches!(s.state(), SessionState::Expired { .. }));
        // the late answer was discarded
        assert_eq!(s.sheet().get(&s.form().items[0].id), Some(1));
    }

    #[test]
    fn answer_at_deadline_is_late() {
        let mut s = started(0);
        let q = s.form().items[0].id.clone();
        assert!(matches!(
            s.record_answer(q, 1, Timestamp(3600)),
            Err(SessionError::DeadlineExceeded { .. })
        ));
    }

    #[test]
    fn reanswer_keeps_last() {
        let mut s = started(0);
        let q = s.form().items[3].id.clone();
        let log = [(q.clone(), 0), (q.clone(), 2), (q.clone(), 1)];
        for (i, (id, c)) in log.iter().enumerate() {
            s.record_answer(id.clone(), *c, Timestamp(i as i64))
                .unwrap();
        }
        // replay the log, keep last per question
        let mut expect = HashMap::new();
        for (id, c) in &log {
            expect.insert(id.clone(), *c);
        }
        assert_eq!(s.sheet().len(), expect.len());
        assert_eq!(s.sheet().get(&q), expect.get(&q).copied());
    }

    #[test]
    fn bad_answers_rejected() {
        let mut s = started(0);
        assert_eq!(
            s.record_answer("ghost".into(), 0, Timestamp(1)),
            Err(SessionError::NotInForm("ghost".into()))
        );
        let q = s.form().items[0].id.clone();
        assert_eq!(
            s.record_answer(q, 4, Timestamp(1)),
            Err(SessionError::ChoiceOutOfRange(4))
        );
        assert!(s.sheet().is_empty());
    }

    #[test]
    fn submit_on_time_reports_elapsed() {
        let mut s = started(1000);
        let done = s.submit(Timestamp(1000 + 681)).unwrap();
        assert_eq!(done.outcome, Outcome::Submitted);
        assert_eq!(done.report.elapsed_secs, 681);
        assert_eq!(done.report.final_score, 0);
        assert!(s.submit(Timestamp(1700)).is_err());
    }

    #[test]
    fn submit_at_deadline_is_on_time() {
        let mut s = started(0);
        let done = s.submit(Timestamp(3600)).unwrap();
        assert_eq!(done.outcome, Outcome::Submitted);
        assert_eq!(done.report.elapsed_secs, 3600);
    }

    #[test]
    fn late_submit_expires() {
        let mut s = started(0);
        let q = s.form().items[0].clone();
        s.record_answer(q.id.clone(), q.correct_index, Timestamp(10))
            .unwrap();
        let done = s.submit(Timestamp(3601)).unwrap();
        assert_eq!(done.outcome, Outcome::Expired);
        assert_eq!(done.at, Timestamp(3600));
        assert_eq!(done.report.elapsed_secs, 3600);
        assert_eq!(done.report.final_score, 2);
    }

    #[test]
    fn feedback_only_after_end() {
        let mut s = started(0);
        assert!(s.feedback().is_err());
        let ids: Vec<_> = s
            .form()
            .items
            .iter()
            .map(|q| (q.id.clone(), q.correct_index))
            .collect();
        // answer all but three, all correctly
        for (id, key) in &ids[3..] {
            s.record_answer(id.clone(), *key, Timestamp(5)).unwrap();
        }
        s.submit(Timestamp(6)).unwrap();
        let fb = s.feedback().unwrap();
        let unanswered: Vec<_> = fb
            .items
            .iter()
            .filter(|i| i.verdict == Verdict::Unanswered)
            .map(|i| i.question_id.clone())
            .collect();
        // set difference: form ids minus sheet keys
        let expected: Vec<_> = ids
            .iter()
            .map(|(id, _)| id.clone())
            .filter(|id| s.sheet().get(id).is_none())
            .collect();
        assert_eq!(unanswered, expected);
        assert_eq!(unanswered.len(), 3);
        assert_eq!(fb.report.final_score, 94);
    }

    #[test]
    fn manager_rejects_second_session_and_sweeps_once() {
        let m = SessionManager::new();
        let bp = Arc::new(ExamBlueprint::default());
        let id = m.create_session("a", &bank(), bp.clone(), 1).unwrap();
        assert_eq!(
            m.create_session("a", &bank(), bp.clone(), 2),
            Err(SessionError::DuplicateSession("a".into()))
        );
        assert!(m.expire_sweep(Timestamp(0)).is_empty());
        m.present_info(&id).unwrap();
        m.start_exam(&id, Timestamp(0)).unwrap();
        assert!(m.expire_sweep(Timestamp(3600)).is_empty());
        let first = m.expire_sweep(Timestamp(3601));
        assert_eq!(first.len(), 1);
        assert!(m.expire_sweep(Timestamp(3602)).is_empty());
        assert_eq!(m.take_finalized(), first);
        assert!(m.take_finalized().is_empty());
    }

    #[test]
    fn manager_outbox_catches_late_answer_expiry() {
        let m = SessionManager::new();
        let id = m
            .create_session("a", &bank(), Arc::new(ExamBlueprint::default()), 1)
            .unwrap();
        m.present_info(&id).unwrap();
        m.start_exam(&id, Timestamp(0)).unwrap();
        let q = m.form_view(&id).unwrap().items[0].id.clone();
        assert!(m.record_answer(&id, q, 0, Timestamp(4000)).is_err());
        let out = m.take_finalized();
        assert_eq!(out.len(), 1);
        assert_eq!(out[0].outcome, Outcome::Expired);
    }

    #[test]
    fn small_bank_propagates_assembly_error() {
        let m = SessionManager::new();
        let err = m
            .create_session("a", &bank()[..40], Arc::new(ExamBlueprint::default()), 1)
            .unwrap_err();
        assert!(matches!(
            err,
            SessionError::Assembly(ExamError::InsufficientBank(_))
        ));
        assert!(m.session_of("a").is_none());
    }
}
