//! Per-trial seeds derived from one master seed.

use sha2::{Digest, Sha256};

/// First eight bytes of `SHA-256(master || trial || phase)`, little endian.
pub fn derive(master: u64, trial: u64, phase: &str) -> u64 {
    let mut h = Sha256::new();
    h.update(master.to_le_bytes());
    h.update(trial.to_le_bytes());
    h.update(phase.as_bytes());
    let digest = h.finalize();
    let mut bytes = [0u8; 8];
    bytes.copy_from_slice(&digest[..8]);
    u64::from_le_bytes(bytes)
}

/// Hex SHA-256 of arbitrary bytes.
pub fn hash_hex(bytes: &[u8]) -> String {
    hex::encode(Sha256::digest(bytes))
}
