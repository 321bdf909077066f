//! Credentials, login and bearer tokens.
//!
//! Accounts are only ever created by an administrator (or the operator CLI);
//! the generated password is handed back once and only its digest is kept.

pub mod password;

use std::collections::HashMap;
use std::sync::RwLock;

use rand::seq::IndexedRandom;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::clock::Timestamp;
use crate::store::{Role, Store, StoreError, UserAccount};
pub use password::PasswordPolicy;

/// Four hours.
pub const DEFAULT_TOKEN_TTL_SECS: u64 = 4 * 60 * 60;
pub const TOKEN_BYTES: usize = 32;
const PASSWORD_LEN: usize = 12;
const PASSWORD_ALPHABET: &[u8] = b"abcdefghjkmnpqrstuvwxyzABCDEFGHJKLMNPQRSTUVWXYZ23456789";

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct AuthToken {
    pub token: String,
    pub username: String,
    pub role: Role,
    pub issued_at: Timestamp,
    pub expires_at: Timestamp,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct Identity {
    pub username: String,
    pub role: Role,
}

/// Username plus the one-time plaintext password.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct Credentials {
    pub username: String,
    pub password: String,
}

#[derive(Debug, Error)]
pub enum AuthError {
    /// Same error for unknown users and wrong passwords.
    #[error("wrong username or password")]
    BadCredentials,
    #[error("missing, unknown or expired token")]
    Unauthenticated,
    #[error("operation requires the administrator role")]
    Forbidden,
    #[error("first and last name must not both be empty")]
    EmptyName,
    #[error(transparent)]
    Store(#[from] StoreError),
}

pub struct Authenticator {
    policy: PasswordPolicy,
    ttl_secs: u64,
    tokens: RwLock<HashMap<String, AuthToken>>,
    dummy_digest: String,
}

impl Default for Authenticator {
    fn default() -> Self {
        Self::new(PasswordPolicy::default(), DEFAULT_TOKEN_TTL_SECS)
    }
}

impl Authenticator {
    pub fn new(policy: PasswordPolicy, ttl_secs: u64) -> Self {
        Authenticator {
            policy,
            ttl_secs,
            tokens: RwLock::new(HashMap::new()),
            dummy_digest: password::hash_password("", policy),
        }
    }

    pub fn policy(&self) -> PasswordPolicy {
        self.policy
    }

    /// Creates an account of any role without a caller check. This is the
    /// operator path used by the CLI against the store file.
    pub fn create_account(
        &self,
        store: &mut Store,
        first: &str,
        last: &str,
        role: Role,
    ) -> Result<Credentials, AuthError> {
        let base = username_base(first, last).ok_or(AuthError::EmptyName)?;
        let username = std::iter::once(base.clone())
            .chain((2..).map(|n| format!("{base}{n}")))
            .find(|u| store.get_user(u).is_none())
            .expect("unbounded suffixes");
        let password = generate_password();
        store.put_user(UserAccount {
            username: username.clone(),
            password_digest: password::hash_password(&password, self.policy),
            role,
            first_name: first.trim().to_owned(),
            last_name: last.trim().to_owned(),
        })?;
        Ok(Credentials { username, password })
    }

    pub fn provision_candidate(
        &self,
        caller: &Identity,
        store: &mut Store,
        first: &str,
        last: &str,
    ) -> Result<Credentials, AuthError> {
        require_admin(caller)?;
        self.create_account(store, first, last, Role::Candidate)
    }

    pub fn login(
        &self,
        store: &Store,
        username: &str,
        password: &str,
        now: Timestamp,
    ) -> Result<AuthToken, AuthError> {
        let account = store.get_user(username);
        // Unknown users still pay for a digest check.
        let digest = account.map_or(self.dummy_digest.as_str(), |a| a.password_digest.as_str());
        let ok = password::verify_password(password, digest);
        match account {
            Some(a) if ok => Ok(self.issue(&a.username, a.role, now)),
            _ => Err(AuthError::BadCredentials),
        }
    }

    fn issue(&self, username: &str, role: Role, now: Timestamp) -> AuthToken {
        let raw: [u8; TOKEN_BYTES] = rand::random();
        let token = AuthToken {
            token: hex::encode(raw),
            username: username.to_owned(),
            role,
            issued_at: now,
            expires_at: now + self.ttl_secs,
        };
        self.tokens
            .write()
            .unwrap_or_else(|e| e.into_inner())
            .insert(token.token.clone(), token.clone());
        token
    }

    pub fn authenticate(&self, token: &str, now: Timestamp) -> Result<Identity, AuthError> {
        if token.len() != TOKEN_BYTES * 2 || !token.bytes().all(|b| b.is_ascii_hexdigit()) {
            return Err(AuthError::Unauthenticated);
        }
        let tokens = self.tokens.read().unwrap_or_else(|e| e.into_inner());
        match tokens.get(token) {
            Some(t) if now < t.expires_at => Ok(Identity {
                username: t.username.clone(),
                role: t.role,
            }),
            _ => Err(AuthError::Unauthenticated),
        }
    }

    pub fn revoke(&self, token: &str) -> bool {
        self.tokens
            .write()
            .unwrap_or_else(|e| e.into_inner())
            .remove(token)
            .is_some()
    }

    /// Drops every token belonging to `username`.
    pub fn revoke_user(&self, username: &str) {
        self.tokens
            .write()
            .unwrap_or_else(|e| e.into_inner())
            .retain(|_, t| t.username != username);
    }

    /// Forgets expired tokens.
    pub fn purge_expired(&self, now: Timestamp) {
        self.tokens
            .write()
            .unwrap_or_else(|e| e.into_inner())
            .retain(|_, t| now < t.expires_at);
    }
}

pub fn require_admin(caller: &Identity) -> Result<(), AuthError> {
    match caller.role {
        Role::Admin => Ok(()),
        Role::Candidate => Err(AuthError::Forbidden),
    }
}

fn slug(s: &str) -> String {
    s.chars()
        .filter(|c| c.is_alphanumeric())
        .flat_map(char::to_lowercase)
        .collect()
}

/// `first.last`, lowercased with punctuation stripped.
fn username_base(first: &str, last: &str) -> Option<String> {
    match (slug(first), slug(last)) {
        (f, l) if f.is_empty() && l.is_empty() => None,
        (f, l) if l.is_empty() => Some(f),
        (f, l) if f.is_empty() => Some(l),
        (f, l) => Some(format!("{f}.{l}")),
    }
}

fn generate_password() -> String {
    let mut rng = rand::rng();
    (0..PASSWORD_LEN)
        .map(|_| *PASSWORD_ALPHABET.choose(&mut rng).expect("non-empty") as char)
        .collect()
}
