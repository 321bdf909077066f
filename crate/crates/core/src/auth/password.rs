//! Salted PBKDF2-HMAC-SHA256 password digests.
//!
//! Stored form: `pbkdf2-sha256$<iterations>$<salt hex>$<hash hex>`.

use pbkdf2::pbkdf2_hmac;
use rand::Rng;
use sha2::Sha256;
use subtle::ConstantTimeEq;

pub const SCHEME: &str = "pbkdf2-sha256";
pub const SALT_LEN: usize = 16;
pub const HASH_LEN: usize = 32;

/// Work factor for new digests.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct PasswordPolicy {
    pub iterations: u32,
}

impl Default for PasswordPolicy {
    fn default() -> Self {
        PasswordPolicy {
            iterations: 100_000,
        }
    }
}

pub fn derive(password: &str, salt: &[u8], iterations: u32) -> [u8; HASH_LEN] {
    let mut out = [0u8; HASH_LEN];
    pbkdf2_hmac::<Sha256>(password.as_bytes(), salt, iterations, &mut out);
    out
}

pub fn hash_password(password: &str, policy: PasswordPolicy) -> String {
    let salt: [u8; SALT_LEN] = rand::rng().random();
    format_digest(
        &salt,
        policy.iterations,
        &derive(password, &salt, policy.iterations),
    )
}

pub fn format_digest(salt: &[u8], iterations: u32, hash: &[u8]) -> String {
    format!(
        "{SCHEME}${iterations}${}${}",
        hex::encode(salt),
        hex::encode(hash)
    )
}

/// Parsed `(iterations, salt, hash)` of a stored digest.
pub fn parse_digest(digest: &str) -> Option<(u32, Vec<u8>, Vec<u8>)> {
    let mut parts = digest.split('$');
    if parts.next()? != SCHEME {
        return None;
    }
    let iterations: u32 = parts.next()?.parse().ok().filter(|&n| n > 0)?;
    let salt = hex::decode(parts.next()?).ok()?;
    let hash = hex::decode(parts.next()?).ok()?;
    if parts.next().is_some() || hash.len() != HASH_LEN {
        return None;
    }
    Some((iterations, salt, hash))
}

pub fn verify_password(password: &str, digest: &str) -> bool {
    let Some((iterations, salt, hash)) = parse_digest(digest) else {
        return false;
    };
    derive(password, &salt, iterations)
        .ct_eq(hash.as_slice())
        .into()
}
