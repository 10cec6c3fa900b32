//! Sparse Merkle tree baseline used for cost comparisons.
//!
//! Keys are addressed by their bits, most significant first: the bit at
//! depth `d` picks the child to descend into. Only keys are stored — the
//! structure answers the same membership questions as the main tree. Leaf
//! and internal hashes are domain-separated full-width SHA-256
//! (`H(0x00 ‖ key)` and `H(0x01 ‖ left ‖ right)`), with the all-zero
//! digest standing in for an absent child.
//!
//! Keys sharing a bit prefix hang a chain of one-child internal nodes down
//! to their first disagreeing bit. Removal collapses the chain back: a
//! lone leaf rises until it has a sibling. That keeps the structure — like
//! the main tree — a pure function of the key set, whatever order keys
//! came and went in. Prefix chains deeper than [`MAX_DEPTH`] bits are
//! rejected rather than built.

use sha2::{Digest as _, Sha256};
use thiserror::Error;

use crate::hash::{Digest, Key, WidthError};
use crate::tree::{MutationReport, OpCounters};

const LEAF_TAG: u8 = 0x00;
const INTERNAL_TAG: u8 = 0x01;

/// Digest width; the baseline always hashes at full SHA-256 width.
pub const DIGEST_WIDTH: usize = 32;

/// Deepest bit the structure will resolve. Two keys agreeing on their
/// first `MAX_DEPTH` bits cannot coexist.
pub const MAX_DEPTH: usize = 64;

/// A mutation of the baseline could not be applied.
#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum SmtError {
    #[error("key {0} is already present")]
    DuplicateKey(Key),
    #[error("key {0} was not found")]
    KeyNotFound(Key),
    #[error("key {0} shares a {MAX_DEPTH}-bit prefix with an existing key")]
    DepthExhausted(Key),
    #[error(transparent)]
    Width(#[from] WidthError),
}

enum SmtNode {
    Leaf {
        key: Key,
        digest: Digest,
    },
    Internal {
        left: Option<Box<SmtNode>>,
        right: Option<Box<SmtNode>>,
        digest: Digest,
    },
}

impl SmtNode {
    fn digest(&self) -> &Digest {
        match self {
            SmtNode::Leaf { digest, .. } | SmtNode::Internal { digest, .. } => digest,
        }
    }
}

pub struct SparseMerkleTree {
    key_width: usize,
    root: Option<Box<SmtNode>>,
    count: usize,
}

/// Recursion result: the rebuilt slot plus the touched leaf's depth, or
/// the untouched slot handed back alongside the error.
type Descent<T> = Result<(T, usize), (T, SmtError)>;

fn leaf_digest(key: &Key, c: &mut OpCounters) -> Digest {
    c.hash_calls += 1;
    let mut hasher = Sha256::new();
    hasher.update([LEAF_TAG]);
    hasher.update(key.as_bytes());
    Digest::from_bytes(&hasher.finalize()[..])
}

fn internal_digest(
    left: &Option<Box<SmtNode>>,
    right: &Option<Box<SmtNode>>,
    c: &mut OpCounters,
) -> Digest {
    c.hash_calls += 1;
    let zero = Digest::zero(DIGEST_WIDTH);
    let side = |child: &Option<Box<SmtNode>>| match child {
        Some(node) => node.digest().clone(),
        None => zero.clone(),
    };
    let mut hasher = Sha256::new();
    hasher.update([INTERNAL_TAG]);
    hasher.update(side(left).as_bytes());
    hasher.update(side(right).as_bytes());
    Digest::from_bytes(&hasher.finalize()[..])
}

/// The key's bit at `depth`, most significant bit of byte 0 first.
fn bit(key: &Key, depth: usize) -> bool {
    (key.as_bytes()[depth / 8] >> (7 - depth % 8)) & 1 == 1
}

/// First bit position at which two (distinct) keys disagree.
fn first_divergence(a: &Key, b: &Key) -> usize {
    for (i, (x, y)) in a.as_bytes().iter().zip(b.as_bytes()).enumerate() {
        if x != y {
            return i * 8 + (x ^ y).leading_zeros() as usize;
        }
    }
    unreachable!("distinct keys of equal width must differ somewhere");
}

impl SparseMerkleTree {
    /// An empty baseline over `key_width`-byte keys.
    pub fn new(key_width: usize) -> Self {
        Self {
            key_width,
            root: None,
            count: 0,
        }
    }

    pub fn len(&self) -> usize {
        self.count
    }

    pub fn is_empty(&self) -> bool {
        self.count == 0
    }

    /// Root commitment; the all-zero digest when empty.
    pub fn root_digest(&self) -> Digest {
        match &self.root {
            Some(node) => node.digest().clone(),
            None => Digest::zero(DIGEST_WIDTH),
        }
    }

    fn check_width(&self, key: &Key) -> Result<(), SmtError> {
        if key.width() == self.key_width {
            Ok(())
        } else {
            Err(SmtError::Width(WidthError {
                expected: self.key_width,
                actual: key.width(),
            }))
        }
    }

    pub fn insert(&mut self, key: Key) -> Result<MutationReport, SmtError> {
        self.check_width(&key)?;
        let mut c = OpCounters::default();
        // The recursion owns the subtree while it works; on failure it
        // hands the untouched subtree back so nothing is lost.
        match Self::insert_at(self.root.take(), key, 0, &mut c) {
            Ok((node, depth)) => {
                self.root = node;
                self.count += 1;
                Ok(c.report(self.root_digest(), depth))
            }
            Err((node, err)) => {
                self.root = node;
                Err(err)
            }
        }
    }

    fn insert_at(
        slot: Option<Box<SmtNode>>,
        key: Key,
        depth: usize,
        c: &mut OpCounters,
    ) -> Descent<Option<Box<SmtNode>>> {
        let Some(node) = slot else {
            let digest = leaf_digest(&key, c);
            c.node_writes += 1;
            return Ok((Some(Box::new(SmtNode::Leaf { key, digest })), depth));
        };
        c.node_reads += 1;
        match *node {
            SmtNode::Leaf { key: existing, digest } => {
                if existing == key {
                    let node = Box::new(SmtNode::Leaf { key: existing, digest });
                    return Err((Some(node), SmtError::DuplicateKey(key)));
                }
                let split = first_divergence(&existing, &key);
                if split >= MAX_DEPTH {
                    let node = Box::new(SmtNode::Leaf { key: existing, digest });
                    return Err((Some(node), SmtError::DepthExhausted(key)));
                }
                let occupied = Box::new(SmtNode::Leaf { key: existing, digest });
                let (chain, leaf_depth) = Self::split_leaves(occupied, key, depth, split, c);
                Ok((Some(chain), leaf_depth))
            }
            SmtNode::Internal { mut left, mut right, digest } => {
                let side = if bit(&key, depth) { &mut right } else { &mut left };
                match Self::insert_at(side.take(), key, depth + 1, c) {
                    Ok((child, leaf_depth)) => {
                        *side = child;
                        let digest = internal_digest(&left, &right, c);
                        c.node_writes += 1;
                        let node = Box::new(SmtNode::Internal { left, right, digest });
                        Ok((Some(node), leaf_depth))
                    }
                    Err((child, err)) => {
                        // Nothing below changed; reassemble the node around
                        // its original digest.
                        *side = child;
                        let node = Box::new(SmtNode::Internal { left, right, digest });
                        Err((Some(node), err))
                    }
                }
            }
        }
    }

    /// Builds the internal chain separating an existing leaf from a new
    /// key whose first divergence is at bit `split` (>= `depth`).
    fn split_leaves(
        existing: Box<SmtNode>,
        key: Key,
        depth: usize,
        split: usize,
        c: &mut OpCounters,
    ) -> (Box<SmtNode>, usize) {
        // Both keys agree on every bit above the split; remember them for
        // the chain of one-child internals built below.
        let shared = key.clone();
        let new_bit = bit(&key, split);
        let digest = leaf_digest(&key, c);
        c.node_writes += 1;
        let fresh = Box::new(SmtNode::Leaf { key, digest });
        let (left, right) = if new_bit {
            (Some(existing), Some(fresh))
        } else {
            (Some(fresh), Some(existing))
        };
        let digest = internal_digest(&left, &right, c);
        c.node_writes += 1;
        let mut node = Box::new(SmtNode::Internal { left, right, digest });
        for d in (depth..split).rev() {
            let (left, right) = if bit(&shared, d) {
                (None, Some(node))
            } else {
                (Some(node), None)
            };
            let digest = internal_digest(&left, &right, c);
            c.node_writes += 1;
            node = Box::new(SmtNode::Internal { left, right, digest });
        }
        (node, split + 1)
    }

    pub fn remove(&mut self, key: &Key) -> Result<MutationReport, SmtError> {
        self.check_width(key)?;
        let mut c = OpCounters::default();
        match Self::remove_at(self.root.take(), key, 0, &mut c) {
            Ok((node, depth)) => {
                self.root = node;
                self.count -= 1;
                Ok(c.report(self.root_digest(), depth))
            }
            Err((node, err)) => {
                self.root = node;
                Err(err)
            }
        }
    }

    fn remove_at(
        slot: Option<Box<SmtNode>>,
        key: &Key,
        depth: usize,
        c: &mut OpCounters,
    ) -> Descent<Option<Box<SmtNode>>> {
        let Some(node) = slot else {
            return Err((None, SmtError::KeyNotFound(key.clone())));
        };
        c.node_reads += 1;
        match *node {
            SmtNode::Leaf { key: existing, digest } => {
                if &existing == key {
                    c.node_writes += 1;
                    Ok((None, depth))
                } else {
                    let node = Box::new(SmtNode::Leaf { key: existing, digest });
                    Err((Some(node), SmtError::KeyNotFound(key.clone())))
                }
            }
            SmtNode::Internal { mut left, mut right, digest } => {
                let side = if bit(key, depth) { &mut right } else { &mut left };
                match Self::remove_at(side.take(), key, depth + 1, c) {
                    Ok((child, leaf_depth)) => {
                        *side = child;
                        let node = match (left, right) {
                            // The subtree emptied out entirely.
                            (None, None) => None,
                            // A lone leaf rises; its chain collapses level
                            // by level as this case repeats upward.
                            (Some(only), None) | (None, Some(only))
                                if matches!(*only, SmtNode::Leaf { .. }) =>
                            {
                                Some(only)
                            }
                            (left, right) => {
                                let digest = internal_digest(&left, &right, c);
                                c.node_writes += 1;
                                Some(Box::new(SmtNode::Internal { left, right, digest }))
                            }
                        };
                        Ok((node, leaf_depth))
                    }
                    Err((child, err)) => {
                        *side = child;
                        let node = Box::new(SmtNode::Internal { left, right, digest });
                        Err((Some(node), err))
                    }
                }
            }
        }
    }

    /// Membership path length for `key`: the number of edges between the
    /// root and the leaf holding the key, which is also the number of
    /// sibling digests a membership proof for it would carry. `None` if
    /// the key is absent.
    pub fn path_len(&self, key: &Key) -> Option<usize> {
        let mut cur = self.root.as_deref()?;
        let mut depth = 0;
        loop {
            match cur {
                SmtNode::Leaf { key: existing, .. } => {
                    return (existing == key).then_some(depth);
                }
                SmtNode::Internal { left, right, .. } => {
                    let side = if bit(key, depth) { right } else { left };
                    cur = side.as_deref()?;
                    depth += 1;
                }
            }
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    /// 8-byte keys with the discriminating bits up front.
    fn k(head: u8, tail: u64) -> Key {
        let mut bytes = tail.to_be_bytes();
        bytes[0] = head;
        Key::from_bytes(&bytes[..])
    }

    #[test]
    fn empty_tree_has_zero_root() {
        let tree = SparseMerkleTree::new(8);
        assert!(tree.is_empty());
        assert_eq!(tree.root_digest(), Digest::zero(DIGEST_WIDTH));
    }

    #[test]
    fn first_insert_costs_one_hash() {
        let mut tree = SparseMerkleTree::new(8);
        let report = tree.insert(k(0x00, 1)).unwrap();
        assert_eq!(report.hash_calls, 1);
        assert_eq!(report.depth, 0);
        assert_eq!(report.rotations, 0);
        assert_eq!(tree.len(), 1);
    }

    #[test]
    fn split_at_the_first_bit_builds_one_internal() {
        let mut tree = SparseMerkleTree::new(8);
        tree.insert(k(0x00, 1)).unwrap();
        // 0x80 disagrees at bit 0: one new leaf plus one internal node.
        let report = tree.insert(k(0x80, 2)).unwrap();
        assert_eq!(report.hash_calls, 2);
        assert_eq!(report.depth, 1);
        assert_eq!(tree.path_len(&k(0x00, 1)), Some(1));
        assert_eq!(tree.path_len(&k(0x80, 2)), Some(1));
    }

    #[test]
    fn shared_prefix_hangs_a_chain() {
        let mut tree = SparseMerkleTree::new(8);
        tree.insert(k(0x00, 0)).unwrap();
        // 0x01 in the head byte: first divergence at bit 7, so the leaves
        // sit at depth 8 under a chain of 7 one-child internals.
        let report = tree.insert(k(0x01, 0)).unwrap();
        assert_eq!(report.depth, 8);
        assert_eq!(tree.path_len(&k(0x01, 0)), Some(8));
        // One leaf hash plus internals for depths 7 down to 0.
        assert_eq!(report.hash_calls, 1 + 8);
    }

    #[test]
    fn chain_collapses_on_removal() {
        let mut tree = SparseMerkleTree::new(8);
        tree.insert(k(0x00, 0)).unwrap();
        let solo_root = tree.root_digest();
        tree.insert(k(0x01, 0)).unwrap();
        tree.remove(&k(0x01, 0)).unwrap();
        assert_eq!(tree.root_digest(), solo_root);
        assert_eq!(tree.path_len(&k(0x00, 0)), Some(0));
    }

    #[test]
    fn root_depends_only_on_the_key_set() {
        let keys: Vec<Key> = (0u8..32).map(|i| k(i.wrapping_mul(37), i as u64)).collect();
        let mut forward = SparseMerkleTree::new(8);
        for key in &keys {
            forward.insert(key.clone()).unwrap();
        }
        let mut scenic = SparseMerkleTree::new(8);
        for key in keys.iter().rev() {
            scenic.insert(key.clone()).unwrap();
        }
        // Detour through extra keys and remove them again.
        for extra in [k(0xaa, 99), k(0x55, 98)] {
            scenic.insert(extra.clone()).unwrap();
            scenic.remove(&extra).unwrap();
        }
        assert_eq!(forward.root_digest(), scenic.root_digest());
        assert_eq!(forward.len(), scenic.len());
    }

    #[test]
    fn duplicate_and_missing_keys_leave_the_tree_intact() {
        let mut tree = SparseMerkleTree::new(8);
        tree.insert(k(0x00, 1)).unwrap();
        tree.insert(k(0x80, 2)).unwrap();
        let root = tree.root_digest();
        assert_eq!(
            tree.insert(k(0x00, 1)).unwrap_err(),
            SmtError::DuplicateKey(k(0x00, 1))
        );
        assert_eq!(
            tree.remove(&k(0x40, 3)).unwrap_err(),
            SmtError::KeyNotFound(k(0x40, 3))
        );
        assert_eq!(tree.root_digest(), root);
        assert_eq!(tree.len(), 2);
        assert_eq!(tree.path_len(&k(0x40, 3)), None);
    }

    #[test]
    fn deep_prefix_collision_is_rejected() {
        let mut tree = SparseMerkleTree::new(16);
        // Same first 8 bytes; divergence at bit 64 >= the cap.
        let a = Key::from_bytes(&[0u8; 16][..]);
        let mut b_bytes = [0u8; 16];
        b_bytes[8] = 0x80;
        let b = Key::from_bytes(&b_bytes[..]);
        tree.insert(a.clone()).unwrap();
        let root = tree.root_digest();
        assert_eq!(
            tree.insert(b.clone()).unwrap_err(),
            SmtError::DepthExhausted(b)
        );
        assert_eq!(tree.root_digest(), root);
        assert_eq!(tree.len(), 1);
        assert!(tree.path_len(&a).is_some());
    }

    #[test]
    fn foreign_width_keys_are_rejected() {
        let mut tree = SparseMerkleTree::new(8);
        assert!(matches!(
            tree.insert(Key::from_u64(4, 1)).unwrap_err(),
            SmtError::Width(_)
        ));
        assert!(matches!(
            tree.remove(&Key::from_u64(4, 1)).unwrap_err(),
            SmtError::Width(_)
        ));
    }

    #[test]
    fn remove_last_key_empties_the_tree() {
        let mut tree = SparseMerkleTree::new(8);
        tree.insert(k(0x42, 7)).unwrap();
        let report = tree.remove(&k(0x42, 7)).unwrap();
        assert_eq!(report.root, Digest::zero(DIGEST_WIDTH));
        assert_eq!(report.hash_calls, 0);
        assert!(tree.is_empty());
    }
}
