//! The Cartesian Merkle tree itself: a binary search tree on keys that is
//! simultaneously a heap on priorities derived from those keys, where every
//! node carries a Merkle hash over its key and its children's hashes.
//!
//! Because priorities are a deterministic function of keys, the shape — and
//! therefore the root digest — is a pure function of the key *set*: any
//! insertion/removal history that ends at the same set of keys ends at the
//! same tree. Rotations restore the heap property after an insert; removal
//! sinks the doomed node by rotating toward its higher-priority child until
//! it has at most one child, then splices it out.
//!
//! Nodes live in an arena (`Vec` of slots with an embedded free list) and
//! link to each other by index; there are no parent pointers, so every
//! mutation walks down from the root with an explicit stack and repairs
//! hashes on the way back up.

use std::sync::Arc;

use thiserror::Error;

use crate::hash::{outranks, Digest, HashScheme, Key, Priority, WidthError};

pub(crate) type NodeId = u32;

/// Which child slot of a node a step descended into.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
enum Side {
    Left,
    Right,
}

impl Side {
    fn opposite(self) -> Side {
        match self {
            Side::Left => Side::Right,
            Side::Right => Side::Left,
        }
    }
}

#[derive(Clone)]
pub(crate) struct Node {
    pub(crate) key: Key,
    pub(crate) priority: Priority,
    pub(crate) mh: Digest,
    pub(crate) left: Option<NodeId>,
    pub(crate) right: Option<NodeId>,
    pub(crate) payload: Option<Box<[u8]>>,
}

pub(crate) enum Slot {
    Occupied(Node),
    Free { next: Option<NodeId> },
}

/// Per-operation cost counters, reset at the start of each mutation.
#[derive(Debug, Default, Clone, Copy)]
pub(crate) struct OpCounters {
    pub(crate) hash_calls: u64,
    pub(crate) rotations: u64,
    pub(crate) node_reads: u64,
    pub(crate) node_writes: u64,
}

impl OpCounters {
    pub(crate) fn report(self, root: Digest, depth: usize) -> MutationReport {
        MutationReport {
            root,
            depth,
            hash_calls: self.hash_calls,
            rotations: self.rotations,
            node_reads: self.node_reads,
            node_writes: self.node_writes,
        }
    }
}

/// What a mutation did: the new root digest plus cost counters.
///
/// `hash_calls` counts Merkle-hash computations only (priority derivation is
/// not included); `depth` is the number of ancestors above the touched node
/// at the start of the operation. Reads and writes count node accesses, not
/// bytes — they are meant for relative comparisons between structures, not
/// as a cycle-accurate cost model.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct MutationReport {
    pub root: Digest,
    pub depth: usize,
    pub hash_calls: u64,
    pub rotations: u64,
    pub node_reads: u64,
    pub node_writes: u64,
}

/// A mutation could not be applied.
#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum TreeError {
    #[error("key {0} is already present")]
    DuplicateKey(Key),
    #[error("key {0} was not found")]
    KeyNotFound(Key),
    #[error(transparent)]
    Width(#[from] WidthError),
}

/// A structural invariant does not hold; produced by
/// [`Tree::check_invariants`].
#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum InvariantViolation {
    #[error("keys out of search order at {key}")]
    BstOrder { key: Key },
    #[error("node {key} outranks its parent {parent}")]
    HeapOrder { key: Key, parent: Key },
    #[error("stored merkle hash at {key} does not match its children")]
    MerkleHash { key: Key },
    #[error("stored priority at {key} is not the one its key derives")]
    Priority { key: Key },
    #[error("node {key} holds a value {actual} bytes wide, tree expects {expected}")]
    Width {
        key: Key,
        expected: usize,
        actual: usize,
    },
    #[error("tree records {expected} nodes but {found} are reachable")]
    Count { expected: usize, found: usize },
    #[error("node arena corrupted: {0}")]
    Arena(String),
}

/// Successful lookup: how deep the key sits and its payload, if any.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct Found<'a> {
    /// Number of ancestors above the node (0 when the key is at the root).
    pub depth: usize,
    pub payload: Option<&'a [u8]>,
}

pub struct Tree {
    pub(crate) scheme: Arc<dyn HashScheme>,
    pub(crate) slots: Vec<Slot>,
    pub(crate) free_head: Option<NodeId>,
    pub(crate) root: Option<NodeId>,
    pub(crate) count: usize,
    counters: OpCounters,
}

impl Tree {
    /// An empty tree hashing with `scheme`.
    pub fn new(scheme: Arc<dyn HashScheme>) -> Self {
        Self {
            scheme,
            slots: Vec::new(),
            free_head: None,
            root: None,
            count: 0,
            counters: OpCounters::default(),
        }
    }

    /// Used by the decoder to rebuild a tree around a preassembled arena.
    pub(crate) fn from_parts(
        scheme: Arc<dyn HashScheme>,
        slots: Vec<Slot>,
        root: Option<NodeId>,
        count: usize,
    ) -> Self {
        Self {
            scheme,
            slots,
            free_head: None,
            root,
            count,
            counters: OpCounters::default(),
        }
    }

    /// Key/digest width in bytes, fixed by the hash scheme.
    pub fn width(&self) -> usize {
        self.scheme.width()
    }

    pub fn scheme(&self) -> &Arc<dyn HashScheme> {
        &self.scheme
    }

    pub fn len(&self) -> usize {
        self.count
    }

    pub fn is_empty(&self) -> bool {
        self.count == 0
    }

    /// The root Merkle hash; the all-zero digest when the tree is empty.
    /// This is the commitment proofs are verified against.
    pub fn root_digest(&self) -> Digest {
        match self.root {
            Some(id) => self.node(id).mh.clone(),
            None => Digest::zero(self.width()),
        }
    }

    pub fn root_node(&self) -> Option<NodeRef<'_>> {
        self.root.map(|id| NodeRef { tree: self, id })
    }

    /// Nodes in ascending key order.
    pub fn iter(&self) -> InOrder<'_> {
        let mut it = InOrder {
            tree: self,
            stack: Vec::new(),
        };
        it.descend(self.root);
        it
    }

    /// Number of nodes on the longest root-to-leaf path (0 when empty).
    pub fn max_depth(&self) -> usize {
        let mut max = 0;
        let mut stack = Vec::new();
        if let Some(root) = self.root {
            stack.push((root, 1usize));
        }
        while let Some((id, depth)) = stack.pop() {
            max = max.max(depth);
            let node = self.node(id);
            if let Some(l) = node.left {
                stack.push((l, depth + 1));
            }
            if let Some(r) = node.right {
                stack.push((r, depth + 1));
            }
        }
        max
    }

    /// Finds `key`, reporting its depth and payload. A key of a different
    /// width than the tree's cannot be present, so it is simply not found.
    pub fn lookup(&self, key: &Key) -> Option<Found<'_>> {
        let mut cur = self.root;
        let mut depth = 0;
        while let Some(id) = cur {
            let node = self.node(id);
            match key.cmp(&node.key) {
                std::cmp::Ordering::Equal => {
                    return Some(Found {
                        depth,
                        payload: node.payload.as_deref(),
                    });
                }
                std::cmp::Ordering::Less => cur = node.left,
                std::cmp::Ordering::Greater => cur = node.right,
            }
            depth += 1;
        }
        None
    }

    /// Inserts `key` with an optional payload. The payload rides along
    /// unauthenticated — it does not enter any hash.
    ///
    /// Cost shape: one hash for the new leaf, two per rotation while the
    /// node bubbles up, and one per remaining ancestor — `1 + d + k` hashes
    /// for a descent of `d` nodes and `k` rotations.
    pub fn insert(
        &mut self,
        key: Key,
        payload: Option<Vec<u8>>,
    ) -> Result<MutationReport, TreeError> {
        self.scheme.check_width(key.as_bytes())?;
        self.counters = OpCounters::default();

        // Descend to the attachment point, recording the path.
        let mut path: Vec<(NodeId, Side)> = Vec::new();
        let mut cur = self.root;
        while let Some(id) = cur {
            self.counters.node_reads += 1;
            let node = self.node(id);
            match key.cmp(&node.key) {
                std::cmp::Ordering::Equal => return Err(TreeError::DuplicateKey(key)),
                std::cmp::Ordering::Less => {
                    cur = node.left;
                    path.push((id, Side::Left));
                }
                std::cmp::Ordering::Greater => {
                    cur = node.right;
                    path.push((id, Side::Right));
                }
            }
        }
        let depth = path.len();

        let priority = self.scheme.derive_priority(key.as_bytes());
        let zero = Digest::zero(self.width());
        self.counters.hash_calls += 1;
        let mh = self
            .scheme
            .hash_sorted(key.as_bytes(), zero.as_bytes(), zero.as_bytes());
        let id = self.alloc(Node {
            key,
            priority,
            mh,
            left: None,
            right: None,
            payload: payload.map(Vec::into_boxed_slice),
        });
        match path.last() {
            Some(&(parent, side)) => self.set_child(parent, side, Some(id)),
            None => self.root = Some(id),
        }

        // Bubble the new node up while it outranks its parent.
        while let Some(&(parent, side)) = path.last() {
            self.counters.node_reads += 1;
            let node = self.node(id);
            let above = self.node(parent);
            if !outranks(&node.priority, &node.key, &above.priority, &above.key) {
                break;
            }
            path.pop();
            let promoted = match side {
                Side::Left => self.rotate_right(parent),
                Side::Right => self.rotate_left(parent),
            };
            debug_assert_eq!(promoted, id);
            self.relink(path.last(), promoted);
        }

        // Hashes along the rest of the path are now stale.
        for &(ancestor, _) in path.iter().rev() {
            self.refresh_mh(ancestor);
        }

        self.count += 1;
        Ok(self.finish_op(depth))
    }

    /// Removes `key`. The node is sunk with link-only rotations — hashes on
    /// the sink path would be overwritten anyway, so they are repaired once,
    /// in a single upward pass after the splice.
    pub fn remove(&mut self, key: &Key) -> Result<MutationReport, TreeError> {
        self.scheme.check_width(key.as_bytes())?;
        self.counters = OpCounters::default();

        let mut path: Vec<(NodeId, Side)> = Vec::new();
        let mut cur = self.root;
        let target = loop {
            let Some(id) = cur else {
                return Err(TreeError::KeyNotFound(key.clone()));
            };
            self.counters.node_reads += 1;
            let node = self.node(id);
            match key.cmp(&node.key) {
                std::cmp::Ordering::Equal => break id,
                std::cmp::Ordering::Less => {
                    cur = node.left;
                    path.push((id, Side::Left));
                }
                std::cmp::Ordering::Greater => {
                    cur = node.right;
                    path.push((id, Side::Right));
                }
            }
        };
        let depth = path.len();

        // Sink: while the target has two children, promote the one that
        // outranks the other. The missing child of a one-child node ranks
        // below everything, so reaching one child means the sink is done.
        loop {
            let node = self.node(target);
            let (Some(left), Some(right)) = (node.left, node.right) else {
                break;
            };
            self.counters.node_reads += 2;
            let l = self.node(left);
            let r = self.node(right);
            let toward = if outranks(&l.priority, &l.key, &r.priority, &r.key) {
                Side::Left
            } else {
                Side::Right
            };
            let promoted = self.rotate_links(target, toward);
            self.relink(path.last(), promoted);
            path.push((promoted, toward.opposite()));
        }

        // Splice the target out, attaching its remaining child (if any).
        let node = self.node(target);
        let remaining = node.left.or(node.right);
        match path.last() {
            Some(&(parent, side)) => self.set_child(parent, side, remaining),
            None => self.root = remaining,
        }
        self.release(target);
        self.count -= 1;

        for &(ancestor, _) in path.iter().rev() {
            self.refresh_mh(ancestor);
        }

        Ok(self.finish_op(depth))
    }

    /// Verifies every structural invariant: search order, heap order,
    /// stored Merkle hashes, widths, reachable-node count, and arena
    /// accounting. Children are checked before their parents, so a
    /// corrupted hash is reported at the deepest node it disagrees with.
    pub fn check_invariants(&self) -> Result<(), InvariantViolation> {
        let mut seen = vec![false; self.slots.len()];
        let mut live = 0usize;

        // First pass, walking down: links, widths, key intervals
        // (exclusive bounds), and heap order. Records the visit order so
        // the hash pass below can run children-before-parents.
        type Frame = (NodeId, Option<Key>, Option<Key>, Option<NodeId>);
        let mut visited: Vec<NodeId> = Vec::new();
        let mut bounds: Vec<Frame> = Vec::new();
        if let Some(root) = self.root {
            bounds.push((root, None, None, None));
        }
        while let Some((id, low, high, parent)) = bounds.pop() {
            let idx = id as usize;
            if idx >= self.slots.len() {
                return Err(InvariantViolation::Arena(format!(
                    "link to slot {id} is out of bounds"
                )));
            }
            let Slot::Occupied(node) = &self.slots[idx] else {
                return Err(InvariantViolation::Arena(format!(
                    "link to slot {id} points at a free slot"
                )));
            };
            if seen[idx] {
                return Err(InvariantViolation::Arena(format!(
                    "slot {id} is reachable twice"
                )));
            }
            seen[idx] = true;
            live += 1;

            for bytes in [node.key.as_bytes(), node.mh.as_bytes(), node.priority.as_bytes()] {
                if bytes.len() != self.width() {
                    return Err(InvariantViolation::Width {
                        key: node.key.clone(),
                        expected: self.width(),
                        actual: bytes.len(),
                    });
                }
            }
            if let Some(low) = &low {
                if node.key <= *low {
                    return Err(InvariantViolation::BstOrder {
                        key: node.key.clone(),
                    });
                }
            }
            if let Some(high) = &high {
                if node.key >= *high {
                    return Err(InvariantViolation::BstOrder {
                        key: node.key.clone(),
                    });
                }
            }
            if let Some(parent) = parent {
                let p = self.node(parent);
                if outranks(&node.priority, &node.key, &p.priority, &p.key) {
                    return Err(InvariantViolation::HeapOrder {
                        key: node.key.clone(),
                        parent: p.key.clone(),
                    });
                }
            }
            if let Some(left) = node.left {
                bounds.push((left, low.clone(), Some(node.key.clone()), Some(id)));
            }
            if let Some(right) = node.right {
                bounds.push((right, Some(node.key.clone()), high, Some(id)));
            }
            visited.push(id);
        }

        // Second pass: re-derive each stored priority and recompute each
        // stored hash. Children were recorded after their parents, so
        // walking in reverse checks them first and a corrupted hash is
        // named at the deepest node that disagrees.
        for &id in visited.iter().rev() {
            let node = self.node(id);
            if self.scheme.derive_priority(node.key.as_bytes()) != node.priority {
                return Err(InvariantViolation::Priority {
                    key: node.key.clone(),
                });
            }
            let lmh = self.child_mh(node.left);
            let rmh = self.child_mh(node.right);
            let (lo, hi) = if lmh <= rmh { (&lmh, &rmh) } else { (&rmh, &lmh) };
            let expected = self
                .scheme
                .hash_sorted(node.key.as_bytes(), lo.as_bytes(), hi.as_bytes());
            if expected != node.mh {
                return Err(InvariantViolation::MerkleHash {
                    key: node.key.clone(),
                });
            }
        }

        if live != self.count {
            return Err(InvariantViolation::Count {
                expected: self.count,
                found: live,
            });
        }

        // Arena accounting: every slot is either reachable or on the free
        // list, and the free list is acyclic.
        let mut free = 0usize;
        let mut cur = self.free_head;
        while let Some(id) = cur {
            let idx = id as usize;
            if idx >= self.slots.len() {
                return Err(InvariantViolation::Arena(format!(
                    "free list points out of bounds at {id}"
                )));
            }
            free += 1;
            if free > self.slots.len() {
                return Err(InvariantViolation::Arena("free list cycles".into()));
            }
            match &self.slots[idx] {
                Slot::Free { next } => cur = *next,
                Slot::Occupied(_) => {
                    return Err(InvariantViolation::Arena(format!(
                        "free list points at occupied slot {id}"
                    )));
                }
            }
        }
        if live + free != self.slots.len() {
            return Err(InvariantViolation::Arena(format!(
                "{} slots exist but {} are accounted for",
                self.slots.len(),
                live + free
            )));
        }
        Ok(())
    }

    // ---- internal helpers ----

    pub(crate) fn node(&self, id: NodeId) -> &Node {
        match &self.slots[id as usize] {
            Slot::Occupied(node) => node,
            Slot::Free { .. } => unreachable!("link to free slot {id}"),
        }
    }

    fn node_mut(&mut self, id: NodeId) -> &mut Node {
        match &mut self.slots[id as usize] {
            Slot::Occupied(node) => node,
            Slot::Free { .. } => unreachable!("link to free slot {id}"),
        }
    }

    fn alloc(&mut self, node: Node) -> NodeId {
        self.counters.node_writes += 1;
        match self.free_head {
            Some(id) => {
                let Slot::Free { next } = self.slots[id as usize] else {
                    unreachable!("free list points at occupied slot {id}");
                };
                self.free_head = next;
                self.slots[id as usize] = Slot::Occupied(node);
                id
            }
            None => {
                assert!(self.slots.len() < u32::MAX as usize, "node arena full");
                let id = self.slots.len() as NodeId;
                self.slots.push(Slot::Occupied(node));
                id
            }
        }
    }

    fn release(&mut self, id: NodeId) {
        self.counters.node_writes += 1;
        self.slots[id as usize] = Slot::Free {
            next: self.free_head,
        };
        self.free_head = Some(id);
    }

    fn child(&self, id: NodeId, side: Side) -> Option<NodeId> {
        let node = self.node(id);
        match side {
            Side::Left => node.left,
            Side::Right => node.right,
        }
    }

    fn set_child(&mut self, id: NodeId, side: Side, child: Option<NodeId>) {
        self.counters.node_writes += 1;
        let node = self.node_mut(id);
        match side {
            Side::Left => node.left = child,
            Side::Right => node.right = child,
        }
    }

    /// Points the slot above `promoted` (an ancestor entry, or the root) at
    /// it after a rotation.
    fn relink(&mut self, above: Option<&(NodeId, Side)>, promoted: NodeId) {
        match above {
            Some(&(ancestor, side)) => self.set_child(ancestor, side, Some(promoted)),
            None => self.root = Some(promoted),
        }
    }

    /// The Merkle hash a child slot contributes: the child's hash, or the
    /// all-zero digest for an absent subtree.
    fn child_mh(&self, child: Option<NodeId>) -> Digest {
        match child {
            Some(id) => self.node(id).mh.clone(),
            None => Digest::zero(self.width()),
        }
    }

    /// Recomputes and stores `id`'s Merkle hash from its current children.
    fn refresh_mh(&mut self, id: NodeId) {
        let node = self.node(id);
        let lmh = self.child_mh(node.left);
        let rmh = self.child_mh(node.right);
        let (lo, hi) = if lmh <= rmh { (&lmh, &rmh) } else { (&rmh, &lmh) };
        self.counters.hash_calls += 1;
        let mh = self
            .scheme
            .hash_sorted(self.node(id).key.as_bytes(), lo.as_bytes(), hi.as_bytes());
        self.counters.node_writes += 1;
        self.node_mut(id).mh = mh;
    }

    /// Rewires links so that `id`'s child on `toward` takes `id`'s place,
    /// with `id` demoted below it. No hashes are touched; the caller must
    /// also repoint whatever linked to `id`. Returns the promoted child.
    fn rotate_links(&mut self, id: NodeId, toward: Side) -> NodeId {
        self.counters.rotations += 1;
        let promoted = self
            .child(id, toward)
            .expect("rotation requires a child to promote");
        let transferred = self.child(promoted, toward.opposite());
        self.set_child(id, toward, transferred);
        self.set_child(promoted, toward.opposite(), Some(id));
        promoted
    }

    /// Promotes the left child of `id`, repairing both touched hashes
    /// (demoted node first — the promoted one hashes over it).
    fn rotate_right(&mut self, id: NodeId) -> NodeId {
        let promoted = self.rotate_links(id, Side::Left);
        self.refresh_mh(id);
        self.refresh_mh(promoted);
        promoted
    }

    /// Mirror image of [`rotate_right`](Self::rotate_right).
    fn rotate_left(&mut self, id: NodeId) -> NodeId {
        let promoted = self.rotate_links(id, Side::Right);
        self.refresh_mh(id);
        self.refresh_mh(promoted);
        promoted
    }

    fn finish_op(&mut self, depth: usize) -> MutationReport {
        std::mem::take(&mut self.counters).report(self.root_digest(), depth)
    }

    /// Test hook: flips one byte of the stored Merkle hash at `key`.
    #[cfg(test)]
    pub(crate) fn corrupt_mh(&mut self, key: &Key) {
        let mut cur = self.root;
        while let Some(id) = cur {
            match key.cmp(&self.node(id).key) {
                std::cmp::Ordering::Equal => {
                    let node = self.node_mut(id);
                    let mut bytes = node.mh.as_bytes().to_vec();
                    bytes[0] ^= 0x01;
                    node.mh = Digest::from_bytes(bytes);
                    return;
                }
                std::cmp::Ordering::Less => cur = self.node(id).left,
                std::cmp::Ordering::Greater => cur = self.node(id).right,
            }
        }
        panic!("corrupt_mh: key not present");
    }
}

impl std::fmt::Debug for Tree {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.debug_struct("Tree")
            .field("width", &self.width())
            .field("len", &self.count)
            .field("root", &self.root_digest())
            .finish_non_exhaustive()
    }
}

/// Read-only view of a node, exposing structure without arena indices.
#[derive(Clone, Copy)]
pub struct NodeRef<'a> {
    tree: &'a Tree,
    id: NodeId,
}

impl<'a> NodeRef<'a> {
    pub fn key(&self) -> &'a Key {
        &self.tree.node(self.id).key
    }

    pub fn priority(&self) -> &'a Priority {
        &self.tree.node(self.id).priority
    }

    pub fn mh(&self) -> &'a Digest {
        &self.tree.node(self.id).mh
    }

    pub fn payload(&self) -> Option<&'a [u8]> {
        self.tree.node(self.id).payload.as_deref()
    }

    pub fn left(&self) -> Option<NodeRef<'a>> {
        self.tree
            .node(self.id)
            .left
            .map(|id| NodeRef { tree: self.tree, id })
    }

    pub fn right(&self) -> Option<NodeRef<'a>> {
        self.tree
            .node(self.id)
            .right
            .map(|id| NodeRef { tree: self.tree, id })
    }
}

/// Ascending-key iterator over a tree's nodes.
pub struct InOrder<'a> {
    tree: &'a Tree,
    stack: Vec<NodeId>,
}

impl<'a> InOrder<'a> {
    fn descend(&mut self, mut cur: Option<NodeId>) {
        while let Some(id) = cur {
            self.stack.push(id);
            cur = self.tree.node(id).left;
        }
    }
}

impl<'a> Iterator for InOrder<'a> {
    type Item = NodeRef<'a>;

    fn next(&mut self) -> Option<Self::Item> {
        let id = self.stack.pop()?;
        self.descend(self.tree.node(id).right);
        Some(NodeRef {
            tree: self.tree,
            id,
        })
    }
}
