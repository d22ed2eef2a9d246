use sha2::{Digest, Sha256};

/// Stable record id: the first 8 bytes of
/// `SHA-256(organisation 0x1F url 0x1F claim_text)` as 16 lowercase hex chars.
pub fn assign_id(organisation: &str, url: &str, claim_text: &str) -> String {
    let mut hasher = Sha256::new();
    hasher.update(organisation.as_bytes());
    hasher.update([0x1f]);
    hasher.update(url.as_bytes());
    hasher.update([0x1f]);
    hasher.update(claim_text.as_bytes());
    let digest = hasher.finalize();
    digest[..8].iter().map(|b| format!("{b:02x}")).collect()
}
