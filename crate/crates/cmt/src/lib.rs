//! Cartesian Merkle tree: a deterministic authenticated search tree.
//!
//! The structure is a treap — a binary search tree on keys that is also a
//! heap on priorities — with every node carrying a Merkle hash over its key
//! and its children's hashes. Priorities are derived by hashing the key, so
//! the tree's shape and root digest depend only on the key *set*, never on
//! the order keys arrived or left. One node stores one key; there are no
//! separate leaves, and membership *and* non-membership can both be proven
//! against the root digest with a proof of `O(log n)` digests.
//!
//! Module map:
//!
//! - [`hash`] — digest/key/priority newtypes, the [`hash::HashScheme`]
//!   abstraction, SHA-256 and table-driven schemes, and the heap tie-break
//!   rule shared with the oracle.
//! - [`tree`] — the tree itself: arena storage, insert/remove/lookup,
//!   cost-counting [`tree::MutationReport`]s, and an invariant checker.
//! - [`proof`] — membership and non-membership proofs, their verifier, and
//!   a JSON wire format.
//! - [`oracle`] — an independent brute-force reference implementation used
//!   to cross-check the tree in tests.
//! - [`smt`] — a sparse Merkle tree baseline for cost comparisons.
//! - [`bench`] — deterministic workload runner emitting per-operation
//!   counter statistics as CSV.
//!
//! Serialized trees round-trip through [`Tree::to_bytes`] /
//! [`Tree::from_bytes`] in a canonical preorder layout.

pub mod bench;
mod dump;
pub mod hash;
pub mod oracle;
pub mod proof;
pub mod smt;
pub mod tree;

#[cfg(test)]
pub(crate) mod testutil;

pub use dump::DumpError;
pub use hash::{Digest, HashScheme, Key, Priority, Sha256Scheme, TableScheme, WidthError};
pub use proof::{generate_proof, verify_proof, Proof, ProofError};
pub use tree::{Found, InvariantViolation, MutationReport, NodeRef, Tree, TreeError};
