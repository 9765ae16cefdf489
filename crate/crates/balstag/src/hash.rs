//! Configuration hashes stamped into every output file.

use serde::Serialize;
use sha2::{Digest, Sha256};

/// Hex SHA-256 of the compact JSON encoding of `config`.
///
/// Struct fields serialize in declaration order, so equal configurations
/// always hash equally.
pub fn config_hash<T: Serialize + ?Sized>(config: &T) -> String {
    let bytes = serde_json::to_vec(config).expect("configuration serializes to JSON");
    hex::encode(Sha256::digest(&bytes))
}

/// Hash of raw file contents, used to tie runs to their instance.
pub fn content_hash(bytes: &[u8]) -> String {
    hex::encode(Sha256::digest(bytes))
}
