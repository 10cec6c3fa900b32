//! Unit-test fixtures: the six-key worked example, hashed with a
//! [`TableScheme`] so every digest and priority is a small legible number.

use std::sync::Arc;

use crate::hash::{Digest, Key, Priority, TableScheme};
use crate::tree::Tree;

/// Byte width used by the worked example.
pub(crate) const EXAMPLE_WIDTH: usize = 2;

pub(crate) fn key(v: u64) -> Key {
    Key::from_u64(EXAMPLE_WIDTH, v)
}

pub(crate) fn digest(v: u64) -> Digest {
    Digest::from_u64(EXAMPLE_WIDTH, v)
}

pub(crate) fn priority(v: u64) -> Priority {
    Priority::from_u64(EXAMPLE_WIDTH, v)
}

/// The worked example's hash table: keys {5, 10, 13, 15, 18, 20} with
/// priorities {50, 100, 250, 200, 70, 90} and pinned Merkle hashes for
/// every node state the example's final trees contain. States outside the
/// table (intermediate shapes while keys arrive) fall back to a
/// deterministic digest, which later updates overwrite.
pub(crate) fn example_scheme() -> TableScheme {
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
        // Not part of the example; pinned low so tests can add it as a
        // leaf without reshaping anything above.
        (key(16), priority(10)),
    ];
    TableScheme::new(EXAMPLE_WIDTH, hash_rows, priority_rows).unwrap()
}

/// Builds a tree over the example scheme by inserting `keys` in order.
pub(crate) fn example_tree(keys: &[u64]) -> Tree {
    let mut tree = Tree::new(Arc::new(example_scheme()));
    for &v in keys {
        tree.insert(key(v), None).unwrap();
    }
    tree
}
