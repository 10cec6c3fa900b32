//! Brute-force reference implementation used to cross-check the tree.
//!
//! [`build_reference`] reconstructs the expected structure from first
//! principles: sort the key set, make the highest-ranking key (per the
//! shared tie-break) the root, recurse on each side, and hash bottom-up.
//! It is O(n²) and deliberately shares nothing with [`Tree`] except the
//! hashing module, so agreement between the two is evidence rather than
//! tautology.
//!
//! [`compare`] walks a reference tree and a real tree in lockstep and
//! reports the first node where they disagree.

use thiserror::Error;

use crate::hash::{outranks, Digest, HashScheme, Key, Priority, WidthError};
use crate::tree::{NodeRef, Tree};

pub struct ReferenceNode {
    pub key: Key,
    pub priority: Priority,
    pub mh: Digest,
    pub left: Option<Box<ReferenceNode>>,
    pub right: Option<Box<ReferenceNode>>,
}

/// The shape and hashes a tree over a key set must have.
pub struct ReferenceTree {
    width: usize,
    root: Option<Box<ReferenceNode>>,
}

impl ReferenceTree {
    pub fn root(&self) -> Option<&ReferenceNode> {
        self.root.as_deref()
    }

    /// Expected root commitment; all-zero when the key set is empty.
    pub fn root_digest(&self) -> Digest {
        match &self.root {
            Some(node) => node.mh.clone(),
            None => Digest::zero(self.width),
        }
    }
}

/// Builds the canonical structure over `keys` (duplicates collapse) by
/// exhaustive search for each subtree's root.
pub fn build_reference(
    keys: impl IntoIterator<Item = Key>,
    scheme: &dyn HashScheme,
) -> Result<ReferenceTree, WidthError> {
    let mut ranked: Vec<(Key, Priority)> = Vec::new();
    for key in keys {
        let priority = scheme.priority_of(&key)?;
        ranked.push((key, priority));
    }
    ranked.sort_by(|a, b| a.0.cmp(&b.0));
    ranked.dedup_by(|a, b| a.0 == b.0);
    Ok(ReferenceTree {
        width: scheme.width(),
        root: build(&ranked, scheme),
    })
}

fn build(ranked: &[(Key, Priority)], scheme: &dyn HashScheme) -> Option<Box<ReferenceNode>> {
    if ranked.is_empty() {
        return None;
    }
    let mut top = 0;
    for (i, (key, priority)) in ranked.iter().enumerate().skip(1) {
        if outranks(priority, key, &ranked[top].1, &ranked[top].0) {
            top = i;
        }
    }
    let (key, priority) = ranked[top].clone();
    let left = build(&ranked[..top], scheme);
    let right = build(&ranked[top + 1..], scheme);
    let zero = Digest::zero(scheme.width());
    let lmh = left.as_ref().map_or(&zero, |n| &n.mh);
    let rmh = right.as_ref().map_or(&zero, |n| &n.mh);
    let (lo, hi) = if lmh <= rmh { (lmh, rmh) } else { (rmh, lmh) };
    let mh = scheme.hash_sorted(key.as_bytes(), lo.as_bytes(), hi.as_bytes());
    Some(Box::new(ReferenceNode {
        key,
        priority,
        mh,
        left,
        right,
    }))
}

/// The first disagreement between a reference tree and a real tree.
#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum Difference {
    #[error("trees use different widths: reference {reference}, tree {tree}")]
    WidthMismatch { reference: usize, tree: usize },
    #[error("tree lacks a node at {0}")]
    MissingNode(Key),
    #[error("tree has an unexpected node at {0}")]
    UnexpectedNode(Key),
    #[error("expected key {expected} but found {found}")]
    KeyMismatch { expected: Key, found: Key },
    #[error("priority disagrees at {key}")]
    PriorityMismatch { key: Key },
    #[error("merkle hash disagrees at {key}")]
    MerkleHashMismatch { key: Key },
}

/// Walks both trees position by position. `Ok(())` means identical shape,
/// keys, priorities, and hashes everywhere.
pub fn compare(reference: &ReferenceTree, tree: &Tree) -> Result<(), Difference> {
    if reference.width != tree.width() {
        return Err(Difference::WidthMismatch {
            reference: reference.width,
            tree: tree.width(),
        });
    }
    let mut matched: Vec<(&ReferenceNode, NodeRef<'_>)> = Vec::new();
    let mut stack: Vec<(Option<&ReferenceNode>, Option<NodeRef<'_>>)> =
        vec![(reference.root(), tree.root_node())];
    while let Some(pair) = stack.pop() {
        match pair {
            (None, None) => {}
            (Some(expected), None) => {
                return Err(Difference::MissingNode(expected.key.clone()));
            }
            (None, Some(found)) => {
                return Err(Difference::UnexpectedNode(found.key().clone()));
            }
            (Some(expected), Some(found)) => {
                if &expected.key != found.key() {
                    return Err(Difference::KeyMismatch {
                        expected: expected.key.clone(),
                        found: found.key().clone(),
                    });
                }
                if &expected.priority != found.priority() {
                    return Err(Difference::PriorityMismatch {
                        key: expected.key.clone(),
                    });
                }
                matched.push((expected, found));
                stack.push((expected.right.as_deref(), found.right()));
                stack.push((expected.left.as_deref(), found.left()));
            }
        }
    }
    // Hashes are checked only once the whole shape has matched, deepest
    // nodes first (descendants were recorded after their ancestors), so a
    // disagreement is named at the node that causes it rather than at the
    // root it bubbles up to.
    for (expected, found) in matched.iter().rev() {
        if &expected.mh != found.mh() {
            return Err(Difference::MerkleHashMismatch {
                key: expected.key.clone(),
            });
        }
    }
    Ok(())
}
