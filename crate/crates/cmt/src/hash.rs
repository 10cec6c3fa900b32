//! Hashing primitives shared by the tree, the proof verifier, and the
//! reference oracle.
//!
//! Everything in the tree is parameterized over a [`HashScheme`], which fixes
//! a digest width `W` and supplies the two derivations the structure needs:
//! the Merkle hash of a node (`H(key ‖ lo ‖ hi)` over the node's key and its
//! children's hashes in ascending order) and the deterministic priority of a
//! key. Keys, priorities, and digests are all `W`-byte strings ordered as
//! big-endian unsigned integers, which for equal widths is plain
//! lexicographic order on the bytes.
//!
//! The all-zero digest is reserved as the hash of an absent subtree; schemes
//! must never produce it for a real node.

use std::collections::HashMap;
use std::fmt;

use sha2::{Digest as _, Sha256};
use thiserror::Error;

/// Widest digest [`Sha256Scheme`] can produce (it truncates SHA-256 output).
pub const SHA256_MAX_WIDTH: usize = 32;

/// An input had a different byte width than the scheme expects.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Error)]
#[error("input is {actual} bytes wide, scheme expects {expected}")]
pub struct WidthError {
    pub expected: usize,
    pub actual: usize,
}

macro_rules! bytes_newtype {
    ($(#[$meta:meta])* $name:ident) => {
        $(#[$meta])*
        #[derive(Clone, PartialEq, Eq, PartialOrd, Ord, Hash)]
        pub struct $name(Box<[u8]>);

        impl $name {
            /// Wraps raw bytes. The length becomes the value's width.
            pub fn from_bytes(bytes: impl Into<Box<[u8]>>) -> Self {
                Self(bytes.into())
            }

            /// The all-zero value of the given width.
            pub fn zero(width: usize) -> Self {
                Self(vec![0u8; width].into())
            }

            /// Big-endian encoding of `value`, left-padded with zeros.
            ///
            /// Panics if `value` does not fit in `width` bytes; this is a
            /// test and fixture convenience, not a parser.
            pub fn from_u64(width: usize, value: u64) -> Self {
                let be = value.to_be_bytes();
                if width < 8 {
                    assert!(
                        be[..8 - width].iter().all(|&b| b == 0),
                        "{value} does not fit in {width} bytes"
                    );
                }
                let mut bytes = vec![0u8; width];
                let take = width.min(8);
                bytes[width - take..].copy_from_slice(&be[8 - take..]);
                Self(bytes.into())
            }

            /// Decodes a hex string; the width is half the string length.
            pub fn from_hex(s: &str) -> Result<Self, hex::FromHexError> {
                Ok(Self(hex::decode(s)?.into()))
            }

            /// Lowercase hex encoding, two characters per byte.
            pub fn to_hex(&self) -> String {
                hex::encode(&self.0)
            }

            pub fn as_bytes(&self) -> &[u8] {
                &self.0
            }

            pub fn width(&self) -> usize {
                self.0.len()
            }

            pub fn is_zero(&self) -> bool {
                self.0.iter().all(|&b| b == 0)
            }
        }

        impl AsRef<[u8]> for $name {
            fn as_ref(&self) -> &[u8] {
                &self.0
            }
        }

        impl fmt::Display for $name {
            fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
                f.write_str(&self.to_hex())
            }
        }

        impl fmt::Debug for $name {
            fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
                write!(f, concat!(stringify!($name), "({})"), self.to_hex())
            }
        }
    };
}

bytes_newtype! {
    /// A `W`-byte key, compared as a big-endian unsigned integer.
    Key
}

bytes_newtype! {
    /// A `W`-byte hash output. The all-zero digest is the sentinel for an
    /// absent subtree and never identifies a real node.
    Digest
}

bytes_newtype! {
    /// A node's heap rank, derived deterministically from its key. Kept at
    /// the full digest width so priorities collide only when the underlying
    /// hash does.
    Priority
}

/// Heap-order tie-break shared by the tree and the reference oracle: `a`
/// outranks `b` when its priority is strictly larger, or when the priorities
/// are equal and its key is larger. Distinct keys therefore never tie, and
/// the resulting shape stays a pure function of the key set.
pub fn outranks(a_priority: &Priority, a_key: &Key, b_priority: &Priority, b_key: &Key) -> bool {
    match a_priority.cmp(b_priority) {
        std::cmp::Ordering::Greater => true,
        std::cmp::Ordering::Less => false,
        std::cmp::Ordering::Equal => a_key > b_key,
    }
}

/// A choice of digest width plus the two derivations the tree needs.
///
/// Implementations supply the raw `W`-byte transforms; the provided
/// [`calculate_mh`](HashScheme::calculate_mh) and
/// [`priority_of`](HashScheme::priority_of) wrappers validate widths and
/// order the children, so callers never invoke the raw methods directly.
pub trait HashScheme: Send + Sync {
    /// Digest, key, and priority width in bytes.
    fn width(&self) -> usize;

    /// Hashes `key ‖ lo ‖ hi`. Callers guarantee all three inputs are
    /// exactly [`width`](HashScheme::width) bytes and `lo <= hi`.
    fn hash_sorted(&self, key: &[u8], lo: &[u8], hi: &[u8]) -> Digest;

    /// Derives the heap priority of a key of exactly
    /// [`width`](HashScheme::width) bytes.
    fn derive_priority(&self, key: &[u8]) -> Priority;

    /// Merkle hash of a node: its key concatenated with its children's
    /// hashes in ascending order. Absent children are represented by the
    /// all-zero digest, so a leaf hashes `key ‖ 0 ‖ 0`.
    fn calculate_mh(&self, key: &Key, a: &Digest, b: &Digest) -> Result<Digest, WidthError> {
        self.check_width(key.as_bytes())?;
        self.check_width(a.as_bytes())?;
        self.check_width(b.as_bytes())?;
        let (lo, hi) = if a <= b { (a, b) } else { (b, a) };
        Ok(self.hash_sorted(key.as_bytes(), lo.as_bytes(), hi.as_bytes()))
    }

    /// Width-checked wrapper around
    /// [`derive_priority`](HashScheme::derive_priority).
    fn priority_of(&self, key: &Key) -> Result<Priority, WidthError> {
        self.check_width(key.as_bytes())?;
        Ok(self.derive_priority(key.as_bytes()))
    }

    /// Rejects inputs whose width does not match the scheme's.
    fn check_width(&self, bytes: &[u8]) -> Result<(), WidthError> {
        if bytes.len() == self.width() {
            Ok(())
        } else {
            Err(WidthError {
                expected: self.width(),
                actual: bytes.len(),
            })
        }
    }
}

/// Requested digest width is outside the range a scheme supports.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Error)]
#[error("unsupported digest width {0} (supported: 1..={SHA256_MAX_WIDTH})")]
pub struct UnsupportedWidth(pub usize);

/// Production scheme: SHA-256 truncated to the configured width.
///
/// Both derivations are plain SHA-256 over the raw input bytes — no length
/// prefixes or domain tags, since every input is a fixed-width field — with
/// the output truncated to the leading `W` bytes.
#[derive(Debug, Clone)]
pub struct Sha256Scheme {
    width: usize,
}

impl Sha256Scheme {
    /// Full-width (32-byte) scheme.
    pub fn new() -> Self {
        Self {
            width: SHA256_MAX_WIDTH,
        }
    }

    /// Scheme truncating SHA-256 to `width` bytes, `1..=32`.
    pub fn with_width(width: usize) -> Result<Self, UnsupportedWidth> {
        if (1..=SHA256_MAX_WIDTH).contains(&width) {
            Ok(Self { width })
        } else {
            Err(UnsupportedWidth(width))
        }
    }

    fn truncate(&self, full: [u8; 32]) -> Digest {
        Digest::from_bytes(&full[..self.width])
    }
}

impl Default for Sha256Scheme {
    fn default() -> Self {
        Self::new()
    }
}

impl HashScheme for Sha256Scheme {
    fn width(&self) -> usize {
        self.width
    }

    fn hash_sorted(&self, key: &[u8], lo: &[u8], hi: &[u8]) -> Digest {
        let mut hasher = Sha256::new();
        hasher.update(key);
        hasher.update(lo);
        hasher.update(hi);
        self.truncate(hasher.finalize().into())
    }

    fn derive_priority(&self, key: &[u8]) -> Priority {
        Priority::from_bytes(&Sha256::digest(key)[..self.width])
    }
}

/// Two table rows assign different outputs to the same input.
#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum TableError {
    #[error("conflicting hash rows for key {0}")]
    ConflictingHash(Key),
    #[error("conflicting priority rows for key {0}")]
    ConflictingPriority(Key),
    #[error("table row has width {actual}, table expects {expected}")]
    Width { expected: usize, actual: usize },
}

/// Test scheme with pinned outputs: explicit `(key, children) -> digest` and
/// `key -> priority` rows, with a deterministic SHA-256-based fallback for
/// any input not listed.
///
/// This is what lets small worked examples use legible values (priorities
/// like 200, hashes like 333) while the tree code stays oblivious. Hash rows
/// are stored and looked up with the child pair in ascending order, matching
/// [`HashScheme::calculate_mh`]. Fallback digests are never all-zero, so
/// they cannot collide with the absent-subtree sentinel.
#[derive(Debug)]
pub struct TableScheme {
    width: usize,
    hashes: HashMap<(Key, Digest, Digest), Digest>,
    priorities: HashMap<Key, Priority>,
}

impl TableScheme {
    /// Builds a table over `width`-byte values. Hash rows are keyed by
    /// `(key, child, child)` with the children in either order; rows that
    /// disagree on the same input are rejected.
    pub fn new(
        width: usize,
        hash_rows: impl IntoIterator<Item = ((Key, Digest, Digest), Digest)>,
        priority_rows: impl IntoIterator<Item = (Key, Priority)>,
    ) -> Result<Self, TableError> {
        let check = |actual: usize| {
            if actual == width {
                Ok(())
            } else {
                Err(TableError::Width {
                    expected: width,
                    actual,
                })
            }
        };
        let mut hashes = HashMap::new();
        for ((key, a, b), out) in hash_rows {
            check(key.width())?;
            check(a.width())?;
            check(b.width())?;
            check(out.width())?;
            let (lo, hi) = if a <= b { (a, b) } else { (b, a) };
            let entry = (key, lo, hi);
            if let Some(prev) = hashes.get(&entry) {
                if *prev != out {
                    return Err(TableError::ConflictingHash(entry.0));
                }
            }
            hashes.insert(entry, out);
        }
        let mut priorities = HashMap::new();
        for (key, priority) in priority_rows {
            check(key.width())?;
            check(priority.width())?;
            if let Some(prev) = priorities.get(&key) {
                if *prev != priority {
                    return Err(TableError::ConflictingPriority(key));
                }
            }
            priorities.insert(key, priority);
        }
        Ok(Self {
            width,
            hashes,
            priorities,
        })
    }

    /// Deterministic non-zero fallback for inputs outside the table: SHA-256
    /// over a domain tag and the inputs, truncated to the table width.
    fn fallback(&self, tag: u8, parts: &[&[u8]]) -> Box<[u8]> {
        let mut hasher = Sha256::new();
        hasher.update([tag]);
        for part in parts {
            hasher.update(part);
        }
        let full = hasher.finalize();
        let mut out: Box<[u8]> = full[..self.width].into();
        if out.iter().all(|&b| b == 0) {
            // Reserve the all-zero digest for absent subtrees.
            out[self.width - 1] = 1;
        }
        out
    }
}

impl HashScheme for TableScheme {
    fn width(&self) -> usize {
        self.width
    }

    fn hash_sorted(&self, key: &[u8], lo: &[u8], hi: &[u8]) -> Digest {
        let entry = (
            Key::from_bytes(key),
            Digest::from_bytes(lo),
            Digest::from_bytes(hi),
        );
        match self.hashes.get(&entry) {
            Some(out) => out.clone(),
            None => Digest::from_bytes(self.fallback(b'h', &[key, lo, hi])),
        }
    }

    fn derive_priority(&self, key: &[u8]) -> Priority {
        match self.priorities.get(&Key::from_bytes(key)) {
            Some(p) => p.clone(),
            None => Priority::from_bytes(self.fallback(b'p', &[key])),
        }
    }
}
