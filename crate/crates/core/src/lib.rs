//! Core of the examd online examination service.
//!
//! - [`exam`]: question validation, randomized assembly, scoring, skill profiles
//! - [`session`]: the timed, server-authoritative attempt state machine
//! - [`store`]: line-delimited durable record store
//! - [`auth`]: password digests, provisioning, login and bearer tokens
//! - [`report`]: result and skill tables, CSV exports

pub mod auth;
pub mod clock;
pub mod exam;
pub mod report;
pub mod session;
pub mod store;

pub use auth::{AuthError, AuthToken, Authenticator, Credentials, Identity, PasswordPolicy};
pub use clock::{Clock, ManualClock, SystemClock, Timestamp};
pub use exam::{
    assemble_exam, per_question_budget, score, skill_profile, validate_bank, validate_question,
    AnswerSheet, BankReport, BlueprintError, Category, ExamBlueprint, ExamError, ExamForm,
    LabelStyle, Question, QuestionDefect, QuestionId, Quota, ScoreReport, SkillProfile,
};
pub use report::{ReportError, ResultsTable, SkillsTable};
pub use session::{
    ExamInfo, ExamSession, Feedback, Finalized, FormView, Outcome, SessionError, SessionId,
    SessionManager, SessionState,
};
pub use store::{Role, Store, StoreError, StoredResult, UserAccount};
