//! Shared fixture for the integration suites: the six-key worked example
//! over a table-driven hash scheme, so digests and priorities stay small
//! legible numbers, plus helpers for building SHA-256 trees from u64 keys.
//!
//! Each suite pulls a different subset of these helpers.
#![allow(dead_code)]

use std::sync::Arc;

use cmt::{Digest, Key, Priority, Sha256Scheme, TableScheme, Tree};

/// Byte width used by the worked example.
pub const EXAMPLE_WIDTH: usize = 2;

pub fn key(v: u64) -> Key {
    Key::from_u64(EXAMPLE_WIDTH, v)
}

pub fn digest(v: u64) -> Digest {
    Digest::from_u64(EXAMPLE_WIDTH, v)
}

pub fn priority(v: u64) -> Priority {
    Priority::from_u64(EXAMPLE_WIDTH, v)
}

/// The worked example's hash table: keys {5, 10, 13, 15, 18, 20} with
/// priorities {50, 100, 250, 200, 70, 90} and pinned Merkle hashes for
/// every node state the example's final trees contain. States outside the
/// table (intermediate shapes while keys arrive) fall back to a
/// deterministic digest, which later updates overwrite.
pub fn example_scheme() -> TableScheme {
    let hash_rows = [
        // Leaf 18, then the right wing up to the root 13.
        ((key(18), digest(0), digest(0)), digest(100)),
        ((key(20), digest(0), digest(100)), digest(130)),
        ((key(15), digest(0), digest(130)), digest(160)),
        // Left wing.
        ((key(5), digest(0), digest(0)), digest(145)),
        ((key(10), digest(0), digest(145)), digest(180)),
        // Root once 13 is present.
        ((key(13), digest(160), digest(180)), digest(333)),
        // Root after 15 is removed and 20 heads the right wing directly.
        ((key(13), digest(130), digest(180)), digest(320)),
    ];
    let priority_rows = [
        (key(5), priority(50)),
        (key(10), priority(100)),
        (key(13), priority(250)),
        (key(15), priority(200)),
        (key(18), priority(70)),
        (key(20), priority(90)),
    ];
    TableScheme::new(EXAMPLE_WIDTH, hash_rows, priority_rows).unwrap()
}

/// Builds a tree over the example scheme by inserting `keys` in order.
pub fn example_tree(keys: &[u64]) -> Tree {
    let mut tree = Tree::new(Arc::new(example_scheme()));
    for &v in keys {
        tree.insert(key(v), None).unwrap();
    }
    tree
}

/// A 32-byte key for the production-width SHA-256 suites.
pub fn wide_key(v: u64) -> Key {
    Key::from_u64(32, v)
}

/// Builds a SHA-256 tree (32-byte digests) over `keys` given as u64s.
pub fn sha_tree(keys: &[u64]) -> Tree {
    let mut tree = Tree::new(Arc::new(Sha256Scheme::new()));
    for &v in keys {
        tree.insert(wide_key(v), None).unwrap();
    }
    tree
}
