//! Exam domain: question bank validation, blueprint-driven assembly, scoring
//! and per-category skill analytics.
//!
//! Everything in here is pure. Callers supply randomness seeds and elapsed
//! times explicitly; nothing reads a clock or touches the filesystem.

mod assembly;
mod profile;
mod scoring;

use std::collections::{BTreeMap, HashMap};
use std::fmt;

use serde::{Deserialize, Serialize};
use thiserror::Error;

pub use assembly::{assemble_exam, validate_bank, BankReport, Deficiency};
pub use profile::{skill_profile, LabelStyle, SkillProfile};
pub use scoring::{score, ScoreReport};

/// Number of choices every question carries.
pub const CHOICES_PER_QUESTION: usize = 4;

/// Subject area a question belongs to.
#[derive(Clone, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(transparent)]
pub struct Category(String);

impl Category {
    pub const PROGRAMMING: &'static str = "Programming";
    pub const NETWORKING: &'static str = "Networking";
    pub const DATABASE: &'static str = "Database";
    pub const SECURITY: &'static str = "Security";
    pub const IT: &'static str = "IT";

    pub fn new(name: impl Into<String>) -> Self {
        Category(name.into().trim().to_owned())
    }

    pub fn as_str(&self) -> &str {
        &self.0
    }

    /// The five subject areas of the default exam, in report column order.
    pub fn canonical() -> Vec<Category> {
        [
            Self::PROGRAMMING,
            Self::NETWORKING,
            Self::DATABASE,
            Self::SECURITY,
            Self::IT,
        ]
        .into_iter()
        .map(Category::new)
        .collect()
    }
}

impl fmt::Display for Category {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.0)
    }
}

impl From<&str> for Category {
    fn from(s: &str) -> Self {
        Category::new(s)
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(transparent)]
pub struct QuestionId(String);

impl QuestionId {
    pub fn new(id: impl Into<String>) -> Self {
        QuestionId(id.into())
    }

    pub fn as_str(&self) -> &str {
        &self.0
    }
}

impl fmt::Display for QuestionId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.0)
    }
}

impl From<&str> for QuestionId {
    fn from(s: &str) -> Self {
        QuestionId::new(s)
    }
}

/// A multiple-choice item with exactly one correct choice.
///
/// This is also the on-disk and import representation, so the answer key
/// travels with it. Anything shown to a candidate before their session ends
/// must go through [`crate::session::QuestionView`] instead.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct Question {
    pub id: QuestionId,
    pub category: Category,
    pub text: String,
    pub choices: Vec<String>,
    pub correct_index: u32,
}

impl Question {
    pub fn new(
        id: impl Into<String>,
        category: impl Into<String>,
        text: impl Into<String>,
        choices: [&str; CHOICES_PER_QUESTION],
        correct_index: u32,
    ) -> Self {
        Question {
            id: QuestionId::new(id),
            category: Category::new(category),
            text: text.into(),
            choices: choices.iter().map(|c| c.to_string()).collect(),
            correct_index,
        }
    }
}

/// A single problem found by [`validate_question`].
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(tag = "defect", rename_all = "snake_case")]
pub enum QuestionDefect {
    EmptyId,
    EmptyCategory,
    EmptyText,
    ChoiceCount { found: usize },
    CorrectIndexOutOfRange { index: u32, choices: usize },
    BlankChoice { index: usize },
    DuplicateChoices { first: usize, second: usize },
}

impl fmt::Display for QuestionDefect {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            QuestionDefect::EmptyId => write!(f, "empty question id"),
            QuestionDefect::EmptyCategory => write!(f, "empty category"),
            QuestionDefect::EmptyText => write!(f, "empty question text"),
            QuestionDefect::ChoiceCount { found } => {
                write!(f, "choice count {found} != {CHOICES_PER_QUESTION}")
            }
            QuestionDefect::CorrectIndexOutOfRange { index, choices } => {
                write!(
                    f,
                    "correct index {index} out of range for {choices} choices"
                )
            }
            QuestionDefect::BlankChoice { index } => write!(f, "choice {index} is blank"),
            QuestionDefect::DuplicateChoices { first, second } => {
                write!(f, "duplicate choices at {first} and {second}")
            }
        }
    }
}

/// Checks a question against every structural rule and returns all defects
/// found, not just the first.
pub fn validate_question(q: &Question) -> Result<(), Vec<QuestionDefect>> {
    let mut defects = Vec::new();
    if q.id.as_str().trim().is_empty() {
        defects.push(QuestionDefect::EmptyId);
    }
    if q.category.as_str().trim().is_empty() {
        defects.push(QuestionDefect::EmptyCategory);
    }
    if q.text.trim().is_empty() {
        defects.push(QuestionDefect::EmptyText);
    }
    if q.choices.len() != CHOICES_PER_QUESTION {
        defects.push(QuestionDefect::ChoiceCount {
            found: q.choices.len(),
        });
    }
    let index = q.correct_index as usize;
    if index >= CHOICES_PER_QUESTION || index >= q.choices.len() {
        defects.push(QuestionDefect::CorrectIndexOutOfRange {
            index: q.correct_index,
            choices: q.choices.len(),
        });
    }
    let mut seen: HashMap<&str, usize> = HashMap::new();
    for (i, choice) in q.choices.iter().enumerate() {
        let trimmed = choice.trim();
        if trimmed.is_empty() {
            defects.push(QuestionDefect::BlankChoice { index: i });
            continue;
        }
        if let Some(&first) = seen.get(trimmed) {
            defects.push(QuestionDefect::DuplicateChoices { first, second: i });
        } else {
            seen.insert(trimmed, i);
        }
    }
    if defects.is_empty() {
        Ok(())
    } else {
        Err(defects)
    }
}

/// How many questions of one category a form must contain.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct Quota {
    pub category: Category,
    pub count: u32,
}

#[derive(Debug, Error, PartialEq, Eq)]
pub enum BlueprintError {
    #[error("exam must contain at least one question")]
    NoQuestions,
    #[error("duration must be positive")]
    ZeroDuration,
    #[error("weight must be positive")]
    ZeroWeight,
    #[error("composition sums to {sum}, expected {expected}")]
    CompositionMismatch { sum: u32, expected: u32 },
    #[error("category {0} listed twice in composition")]
    DuplicateCategory(Category),
    #[error("empty category name in composition")]
    EmptyCategory,
    #[error("{questions} questions at weight {weight} exceed a maximum score of 100")]
    ScoreOverflow { questions: u32, weight: u32 },
    #[error("{0} questions cannot be split over zero categories")]
    NoCategories(u32),
}

/// Parameters of an exam: question count, duration, per-question weight and
/// per-category composition.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct ExamBlueprint {
    subject: String,
    n_questions: u32,
    duration_secs: u64,
    weight: u32,
    composition: Vec<Quota>,
}

impl ExamBlueprint {
    pub const DEFAULT_SUBJECT: &'static str = "Computer Science Skills Evaluation";
    pub const DEFAULT_QUESTIONS: u32 = 50;
    pub const DEFAULT_DURATION_SECS: u64 = 3600;
    pub const DEFAULT_WEIGHT: u32 = 2;

    pub fn new(
        subject: impl Into<String>,
        duration_secs: u64,
        weight: u32,
        composition: Vec<Quota>,
    ) -> Result<Self, BlueprintError> {
        let n_questions: u32 = composition.iter().map(|q| q.count).sum();
        let bp = ExamBlueprint {
            subject: subject.into(),
            n_questions,
            duration_secs,
            weight,
            composition,
        };
        bp.check()?;
        Ok(bp)
    }

    /// Spreads `n_questions` over `categories` as evenly as possible; earlier
    /// categories take the remainder.
    pub fn balanced(
        categories: &[Category],
        n_questions: u32,
        duration_secs: u64,
        weight: u32,
    ) -> Result<Self, BlueprintError> {
        if categories.is_empty() {
            return Err(BlueprintError::NoCategories(n_questions));
        }
        let k = categories.len() as u32;
        let composition = categories
            .iter()
            .enumerate()
            .map(|(i, c)| Quota {
                category: c.clone(),
                count: n_questions / k + u32::from((i as u32) < n_questions % k),
            })
            .collect();
        Self::new(Self::DEFAULT_SUBJECT, duration_secs, weight, composition)
    }

    pub fn with_subject(mut self, subject: impl Into<String>) -> Self {
        self.subject = subject.into();
        self
    }

    /// Validates invariants; used after deserializing.
    pub fn check(&self) -> Result<(), BlueprintError> {
        if self.n_questions == 0 {
            return Err(BlueprintError::NoQuestions);
        }
        if self.duration_secs == 0 {
            return Err(BlueprintError::ZeroDuration);
        }
        if self.weight == 0 {
            return Err(BlueprintError::ZeroWeight);
        }
        let sum: u32 = self.composition.iter().map(|q| q.count).sum();
        if sum != self.n_questions {
            return Err(BlueprintError::CompositionMismatch {
                sum,
                expected: self.n_questions,
            });
        }
        let mut seen = Vec::with_capacity(self.composition.len());
        for quota in &self.composition {
            if quota.category.as_str().is_empty() {
                return Err(BlueprintError::EmptyCategory);
            }
            if seen.contains(&&quota.category) {
                return Err(BlueprintError::DuplicateCategory(quota.category.clone()));
            }
            seen.push(&quota.category);
        }
        if u64::from(self.n_questions) * u64::from(self.weight) > 100 {
            return Err(BlueprintError::ScoreOverflow {
                questions: self.n_questions,
                weight: self.weight,
            });
        }
        Ok(())
    }

    pub fn subject(&self) -> &str {
        &self.subject
    }

    pub fn n_questions(&self) -> u32 {
        self.n_questions
    }

    pub fn duration_secs(&self) -> u64 {
        self.duration_secs
    }

    pub fn weight(&self) -> u32 {
        self.weight
    }

    pub fn composition(&self) -> &[Quota] {
        &self.composition
    }

    pub fn categories(&self) -> impl Iterator<Item = &Category> {
        self.composition.iter().map(|q| &q.category)
    }

    pub fn max_score(&self) -> u32 {
        self.n_questions * self.weight
    }
}

impl Default for ExamBlueprint {
    /// 50 questions, 10 per canonical category, 60 minutes, 2 points each.
    fn default() -> Self {
        Self::balanced(
            &Category::canonical(),
            Self::DEFAULT_QUESTIONS,
            Self::DEFAULT_DURATION_SECS,
            Self::DEFAULT_WEIGHT,
        )
        .expect("default blueprint is valid")
    }
}

/// Advisory time share per question, floor(duration / count).
pub fn per_question_budget(bp: &ExamBlueprint) -> u64 {
    bp.duration_secs / u64::from(bp.n_questions)
}

/// An assembled, ordered question list for one candidate.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct ExamForm {
    pub form_id: String,
    pub seed: u64,
    pub items: Vec<Question>,
}

impl ExamForm {
    pub fn contains(&self, id: &QuestionId) -> bool {
        self.items.iter().any(|q| &q.id == id)
    }

    pub fn get(&self, id: &QuestionId) -> Option<&Question> {
        self.items.iter().find(|q| &q.id == id)
    }

    pub fn len(&self) -> usize {
        self.items.len()
    }

    pub fn is_empty(&self) -> bool {
        self.items.is_empty()
    }
}

/// A candidate's chosen answers, keyed by question. Unanswered questions are
/// simply absent; recording twice keeps the last choice.
#[derive(Clone, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(transparent)]
pub struct AnswerSheet(BTreeMap<QuestionId, u32>);

impl AnswerSheet {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn record(&mut self, id: QuestionId, choice: u32) {
        self.0.insert(id, choice);
    }

    pub fn get(&self, id: &QuestionId) -> Option<u32> {
        self.0.get(id).copied()
    }

    pub fn iter(&self) -> impl Iterator<Item = (&QuestionId, u32)> {
        self.0.iter().map(|(k, v)| (k, *v))
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }
}

impl FromIterator<(QuestionId, u32)> for AnswerSheet {
    fn from_iter<I: IntoIterator<Item = (QuestionId, u32)>>(iter: I) -> Self {
        let mut sheet = AnswerSheet::new();
        for (id, choice) in iter {
            sheet.record(id, choice);
        }
        sheet
    }
}

#[derive(Debug, Error, PartialEq, Eq)]
pub enum ExamError {
    #[error("question bank cannot satisfy the blueprint: {0}")]
    InsufficientBank(BankReport),
    #[error("answer sheet references question {0} which is not on the form")]
    NotInForm(QuestionId),
}
