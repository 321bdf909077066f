//! Embedded record store for accounts, questions and results.
//!
//! The backing file holds one JSON object per line, each tagged with a
//! `"kind"` of `user`, `question` or `result`. Every mutation is appended
//! and synced before it is applied in memory, so an acknowledged write is on
//! disk. On open the file is replayed in order; a torn final line left by a
//! crash mid-append is dropped and cut off, while corruption anywhere else
//! is an error.

use std::fs::{File, OpenOptions};
use std::io::{self, Read, Seek, SeekFrom, Write};
use std::path::{Path, PathBuf};

use indexmap::IndexMap;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::clock::Timestamp;
use crate::exam::{validate_question, Category, Question, QuestionDefect, QuestionId};
use crate::session::Outcome;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Role {
    Admin,
    Candidate,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct UserAccount {
    pub username: String,
    pub password_digest: String,
    pub role: Role,
    pub first_name: String,
    pub last_name: String,
}

/// A finished attempt as archived for reporting. Never edited once written.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct StoredResult {
    pub username: String,
    pub first_name: String,
    pub last_name: String,
    pub per_category_score: IndexMap<Category, u32>,
    pub final_score: u32,
    pub elapsed_secs: u64,
    pub submitted_at: Timestamp,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub outcome: Option<Outcome>,
}

impl StoredResult {
    pub fn display_name(&self) -> String {
        format!("{} {}", self.first_name, self.last_name)
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct UserRecord {
    #[serde(flatten)]
    pub account: UserAccount,
    /// Tombstone: the account was removed at this point in the log.
    #[serde(default, skip_serializing_if = "std::ops::Not::not")]
    pub removed: bool,
}

/// One line of the store file.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "lowercase")]
pub enum Record {
    User(UserRecord),
    Question(Question),
    Result(StoredResult),
}

impl Record {
    /// Serializes to a single line including the trailing newline.
    pub fn encode(&self) -> Vec<u8> {
        let mut line = serde_json::to_vec(self).expect("records always serialize");
        line.push(b'\n');
        line
    }

    pub fn decode(line: &[u8]) -> Result<Record, serde_json::Error> {
        serde_json::from_slice(line)
    }
}

#[derive(Debug, Error)]
pub enum StoreError {
    #[error("cannot open store {path}: {source}")]
    Open { path: PathBuf, source: io::Error },
    #[error("store is corrupt at line {line}: {source}")]
    Corrupt {
        line: usize,
        source: serde_json::Error,
    },
    #[error("durable write failed: {0}")]
    DurableWrite(io::Error),
    #[error("username {0} already exists")]
    DuplicateUser(String),
    #[error("no user named {0}")]
    UserNotFound(String),
    #[error("user {0} is an administrator and cannot be removed")]
    NotRemovable(String),
    #[error("invalid question: {}", join_defects(.0))]
    InvalidQuestion(Vec<QuestionDefect>),
    #[error("invalid account: {0}")]
    InvalidAccount(&'static str),
}

fn join_defects(d: &[QuestionDefect]) -> String {
    d.iter()
        .map(ToString::to_string)
        .collect::<Vec<_>>()
        .join(", ")
}

/// Where encoded records go. The file-backed journal is the real one; the
/// trait exists so tests can substitute memory or failing sinks.
pub trait Journal: Send + Sync {
    /// Appends one complete line and makes it durable.
    fn append(&mut self, line: &[u8]) -> io::Result<()>;
}

pub struct FileJournal {
    file: File,
    len: u64,
}

impl Journal for FileJournal {
    fn append(&mut self, line: &[u8]) -> io::Result<()> {
        let res = self
            .file
            .write_all(line)
            .and_then(|()| self.file.sync_data());
        match res {
            Ok(()) => {
                self.len += line.len() as u64;
                Ok(())
            }
            Err(e) => {
                // Cut any partial line so the next append starts clean.
                let _ = self.file.set_len(self.len);
                let _ = self.file.seek(SeekFrom::End(0));
                Err(e)
            }
        }
    }
}

/// Keeps appended lines in memory.
#[derive(Default)]
pub struct MemoryJournal {
    pub bytes: Vec<u8>,
}

impl Journal for MemoryJournal {
    fn append(&mut self, line: &[u8]) -> io::Result<()> {
        self.bytes.extend_from_slice(line);
        Ok(())
    }
}

/// What happened while replaying the file on open.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq)]
pub struct Recovery {
    pub records: usize,
    pub dropped_tail_bytes: usize,
}

pub struct Store {
    journal: Box<dyn Journal>,
    users: IndexMap<String, UserAccount>,
    questions: IndexMap<QuestionId, Question>,
    results: Vec<StoredResult>,
    recovery: Recovery,
}

/// Splits `bytes` into records and returns them with the length of the
/// valid prefix. Anything past that length is a torn final line.
pub fn replay(bytes: &[u8]) -> Result<(Vec<Record>, usize), StoreError> {
    let mut records = Vec::new();
    let mut offset = 0;
    let mut line_no = 0;
    while offset < bytes.len() {
        line_no += 1;
        let rest = &bytes[offset..];
        let (line, consumed, terminated) = match rest.iter().position(|&b| b == b'\n') {
            Some(i) => (&rest[..i], i + 1, true),
            None => (rest, rest.len(), false),
        };
        let is_last = offset + consumed == bytes.len();
        if line.iter().all(u8::is_ascii_whitespace) {
            if terminated {
                offset += consumed;
                continue;
            }
            break;
        }
        match Record::decode(line) {
            Ok(r) => {
                records.push(r);
                if !terminated {
                    // complete object missing only its newline
                    return Ok((records, offset + consumed));
                }
                offset += consumed;
            }
            Err(_) if is_last => break,
            Err(source) => {
                return Err(StoreError::Corrupt {
                    line: line_no,
                    source,
                })
            }
        }
    }
    Ok((records, offset))
}

impl Store {
    /// Opens or creates the store file at `path` and replays it.
    pub fn open(path: impl AsRef<Path>) -> Result<Store, StoreError> {
        let path = path.as_ref();
        let open_err = |source| StoreError::Open {
            path: path.to_owned(),
            source,
        };
        let mut file = OpenOptions::new()
            .read(true)
            .write(true)
            .create(true)
            .truncate(false)
            .open(path)
            .map_err(open_err)?;
        let mut bytes = Vec::new();
        file.read_to_end(&mut bytes).map_err(open_err)?;

        let (records, mut good) = replay(&bytes)?;
        let dropped = bytes.len() - good;
        if dropped > 0 {
            file.set_len(good as u64).map_err(open_err)?;
        }
        // A valid last record without its newline gets one now.
        if good > 0 && bytes[good - 1] != b'\n' {
            file.seek(SeekFrom::End(0)).map_err(open_err)?;
            file.write_all(b"\n").map_err(open_err)?;
            good += 1;
        }
        file.sync_data().map_err(open_err)?;
        file.seek(SeekFrom::End(0)).map_err(open_err)?;

        let mut store = Store::with_journal(Box::new(FileJournal {
            file,
            len: good as u64,
        }));
        store.recovery = Recovery {
            records: records.len(),
            dropped_tail_bytes: dropped,
        };
        for r in records {
            store.apply(r);
        }
        Ok(store)
    }

    pub fn in_memory() -> Store {
        Store::with_journal(Box::<MemoryJournal>::default())
    }

    pub fn with_journal(journal: Box<dyn Journal>) -> Store {
        Store {
            journal,
            users: IndexMap::new(),
            questions: IndexMap::new(),
            results: Vec::new(),
            recovery: Recovery::default(),
        }
    }

    pub fn recovery(&self) -> Recovery {
        self.recovery
    }

    fn apply(&mut self, record: Record) {
        match record {
            Record::User(UserRecord { account, removed }) => {
                if removed {
                    self.users.shift_remove(&account.username);
                } else {
                    self.users.insert(account.username.clone(), account);
                }
            }
            Record::Question(q) => {
                self.questions.insert(q.id.clone(), q);
            }
            Record::Result(r) => self.results.push(r),
        }
    }

    fn commit(&mut self, record: Record) -> Result<(), StoreError> {
        self.journal
            .append(&record.encode())
            .map_err(StoreError::DurableWrite)?;
        self.apply(record);
        Ok(())
    }

    pub fn put_user(&mut self, account: UserAccount) -> Result<(), StoreError> {
        if account.username.trim().is_empty() {
            return Err(StoreError::InvalidAccount("empty username"));
        }
        if account.password_digest.is_empty() {
            return Err(StoreError::InvalidAccount("missing password digest"));
        }
        if self.users.contains_key(&account.username) {
            return Err(StoreError::DuplicateUser(account.username));
        }
        self.commit(Record::User(UserRecord {
            account,
            removed: false,
        }))
    }

    pub fn get_user(&self, username: &str) -> Option<&UserAccount> {
        self.users.get(username)
    }

    pub fn users(&self) -> impl Iterator<Item = &UserAccount> {
        self.users.values()
    }

    /// Removes a candidate account. Administrators cannot be removed.
    pub fn remove_user(&mut self, username: &str) -> Result<UserAccount, StoreError> {
        let account = self
            .users
            .get(username)
            .cloned()
            .ok_or_else(|| StoreError::UserNotFound(username.to_owned()))?;
        if account.role != Role::Candidate {
            return Err(StoreError::NotRemovable(username.to_owned()));
        }
        self.commit(Record::User(UserRecord {
            account: account.clone(),
            removed: true,
        }))?;
        Ok(account)
    }

    /// Inserts or replaces a question by id. A replaced question keeps its
    /// original position.
    pub fn put_question(&mut self, question: Question) -> Result<(), StoreError> {
        validate_question(&question).map_err(StoreError::InvalidQuestion)?;
        self.commit(Record::Question(question))
    }

    pub fn get_question(&self, id: &QuestionId) -> Option<&Question> {
        self.questions.get(id)
    }

    pub fn list_questions(&self, category: Option<&Category>) -> Vec<Question> {
        self.questions
            .values()
            .filter(|q| category.is_none_or(|c| &q.category == c))
            .cloned()
            .collect()
    }

    pub fn append_result(&mut self, result: StoredResult) -> Result<(), StoreError> {
        self.commit(Record::Result(result))
    }

    pub fn list_results(&self) -> &[StoredResult] {
        &self.results
    }
}

/// A bank file that is not a JSON array of questions.
#[derive(Debug, Error)]
#[error("bank parse error at line {line}, column {column}: {message}")]
pub struct BankParseError {
    pub line: usize,
    pub column: usize,
    pub message: String,
}

/// Parses the question-bank import format: a JSON array of question
/// objects. An empty or all-whitespace file is an empty bank.
pub fn parse_bank(text: &str) -> Result<Vec<Question>, BankParseError> {
    if text.trim().is_empty() {
        return Ok(Vec::new());
    }
    serde_json::from_str(text).map_err(|e| BankParseError {
        line: e.line(),
        column: e.column(),
        message: e.to_string(),
    })
}

#[derive(Clone, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct ImportReport {
    pub imported: usize,
    pub rejected: Vec<RejectedQuestion>,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct RejectedQuestion {
    /// Zero-based position in the bank file.
    pub position: usize,
    pub id: QuestionId,
    pub defects: Vec<QuestionDefect>,
}

impl ImportReport {
    pub fn is_clean(&self) -> bool {
        self.imported > 0 && self.rejected.is_empty()
    }
}

/// Stores every valid question and lists the invalid ones with their
/// defects. Only a failed write aborts the import.
pub fn import_questions(
    store: &mut Store,
    questions: Vec<Question>,
) -> Result<ImportReport, StoreError> {
    let mut report = ImportReport::default();
    for (position, q) in questions.into_iter().enumerate() {
        let id = q.id.clone();
        match store.put_question(q) {
            Ok(()) => report.imported += 1,
            Err(StoreError::InvalidQuestion(defects)) => report.rejected.push(RejectedQuestion {
                position,
                id,
                defects,
            }),
            Err(e) => return Err(e),
        }
    }
    Ok(report)
}
