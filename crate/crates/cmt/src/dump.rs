//! Binary serialization of a tree.
//!
//! Layout, all integers little-endian:
//!
//! ```text
//! magic  b"CMT1"      4 bytes
//! width  u8           key/digest width W
//! count  u64          number of nodes
//! count node records, in preorder:
//!   key        W bytes
//!   priority   W bytes
//!   mh         W bytes
//!   left       u32    preorder index of the left child, 0xffff_ffff if none
//!   right      u32    preorder index of the right child, 0xffff_ffff if none
//!   payload    u8     0 = none; 1 = followed by u32 length and that many bytes
//! ```
//!
//! Records are emitted in preorder regardless of how the in-memory arena is
//! laid out, so the encoding is canonical: two trees holding the same keys
//! and payloads serialize to identical bytes. The decoder validates the
//! whole structure — including every Merkle hash and derived priority —
//! before handing the tree back, so a decoded tree is always internally
//! consistent with its hash scheme.

use std::sync::Arc;

use thiserror::Error;

use crate::hash::{Digest, HashScheme, Key, Priority};
use crate::tree::{InvariantViolation, Node, NodeId, Slot, Tree};

const MAGIC: &[u8; 4] = b"CMT1";
const NO_CHILD: u32 = u32::MAX;

/// A byte stream could not be decoded into a tree.
#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum DumpError {
    #[error("not a tree dump (bad magic)")]
    BadMagic,
    #[error("dump encodes width {file}, the hash scheme expects {scheme}")]
    WidthMismatch { file: usize, scheme: usize },
    #[error("dump claims {0} nodes, more than this build supports")]
    TooManyNodes(u64),
    #[error("dump is truncated")]
    Truncated,
    #[error("{0} trailing bytes after the last record")]
    TrailingBytes(usize),
    #[error("record {index} links to record {target}, which does not exist")]
    BadLink { index: u32, target: u32 },
    #[error("decoded tree fails validation: {0}")]
    Invalid(#[from] InvariantViolation),
}

struct Reader<'a> {
    bytes: &'a [u8],
    pos: usize,
}

impl<'a> Reader<'a> {
    fn take(&mut self, n: usize) -> Result<&'a [u8], DumpError> {
        let end = self.pos.checked_add(n).ok_or(DumpError::Truncated)?;
        if end > self.bytes.len() {
            return Err(DumpError::Truncated);
        }
        let out = &self.bytes[self.pos..end];
        self.pos = end;
        Ok(out)
    }

    fn u8(&mut self) -> Result<u8, DumpError> {
        Ok(self.take(1)?[0])
    }

    fn u32(&mut self) -> Result<u32, DumpError> {
        Ok(u32::from_le_bytes(self.take(4)?.try_into().unwrap()))
    }

    fn u64(&mut self) -> Result<u64, DumpError> {
        Ok(u64::from_le_bytes(self.take(8)?.try_into().unwrap()))
    }

    fn remaining(&self) -> usize {
        self.bytes.len() - self.pos
    }
}

impl Tree {
    /// Serializes the tree. The encoding depends only on the logical tree,
    /// not on allocation history: re-encoding a decoded dump is the
    /// identity, and equal trees encode to equal bytes.
    pub fn to_bytes(&self) -> Vec<u8> {
        let width = self.width();
        let mut out = Vec::with_capacity(4 + 1 + 8 + self.len() * (3 * width + 9));
        out.extend_from_slice(MAGIC);
        out.push(width as u8);
        out.extend_from_slice(&(self.len() as u64).to_le_bytes());

        // First pass: assign each node its preorder rank.
        let mut rank = vec![NO_CHILD; self.slots.len()];
        let mut order: Vec<NodeId> = Vec::with_capacity(self.len());
        let mut stack: Vec<NodeId> = Vec::new();
        stack.extend(self.root);
        while let Some(id) = stack.pop() {
            rank[id as usize] = order.len() as u32;
            order.push(id);
            let node = self.node(id);
            // Right is pushed first so left pops (and ranks) first.
            stack.extend(node.right);
            stack.extend(node.left);
        }

        // Second pass: emit records in rank order with ranked links.
        for &id in &order {
            let node = self.node(id);
            out.extend_from_slice(node.key.as_bytes());
            out.extend_from_slice(node.priority.as_bytes());
            out.extend_from_slice(node.mh.as_bytes());
            for child in [node.left, node.right] {
                let link = match child {
                    Some(c) => rank[c as usize],
                    None => NO_CHILD,
                };
                out.extend_from_slice(&link.to_le_bytes());
            }
            match &node.payload {
                Some(payload) => {
                    out.push(1);
                    out.extend_from_slice(&(payload.len() as u32).to_le_bytes());
                    out.extend_from_slice(payload);
                }
                None => out.push(0),
            }
        }
        out
    }

    /// Decodes a dump produced by [`Tree::to_bytes`], validating structure,
    /// hashes, and priorities against `scheme` before returning.
    pub fn from_bytes(bytes: &[u8], scheme: Arc<dyn HashScheme>) -> Result<Tree, DumpError> {
        let mut r = Reader { bytes, pos: 0 };
        if r.take(4)? != MAGIC {
            return Err(DumpError::BadMagic);
        }
        let width = r.u8()? as usize;
        if width != scheme.width() {
            return Err(DumpError::WidthMismatch {
                file: width,
                scheme: scheme.width(),
            });
        }
        let count = r.u64()?;
        if count > (NO_CHILD - 1) as u64 {
            return Err(DumpError::TooManyNodes(count));
        }
        let count = count as usize;

        let mut slots = Vec::with_capacity(count);
        for index in 0..count {
            let key = Key::from_bytes(r.take(width)?);
            let priority = Priority::from_bytes(r.take(width)?);
            let mh = Digest::from_bytes(r.take(width)?);
            let mut links = [None, None];
            for link in &mut links {
                let raw = r.u32()?;
                if raw != NO_CHILD {
                    if raw as usize >= count {
                        return Err(DumpError::BadLink {
                            index: index as u32,
                            target: raw,
                        });
                    }
                    *link = Some(raw);
                }
            }
            let payload = match r.u8()? {
                0 => None,
                _ => {
                    let len = r.u32()? as usize;
                    Some(r.take(len)?.into())
                }
            };
            slots.push(Slot::Occupied(Node {
                key,
                priority,
                mh,
                left: links[0],
                right: links[1],
                payload,
            }));
        }
        if r.remaining() != 0 {
            return Err(DumpError::TrailingBytes(r.remaining()));
        }

        let root = if count == 0 { None } else { Some(0) };
        let tree = Tree::from_parts(scheme, slots, root, count);
        tree.check_invariants()?;
        Ok(tree)
    }
}
