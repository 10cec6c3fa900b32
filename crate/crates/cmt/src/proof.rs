//! Membership and non-membership proofs against a root digest.
//!
//! A proof carries the search path to a *target* node, root-first: for each
//! ancestor, its key and the Merkle hash of the child *not* taken (the
//! sibling of the path), and finally the target's own two child hashes (the
//! `suffix`). The verifier rebuilds the target's hash from the suffix and
//! folds it upward through the ancestors; the result must equal the root
//! digest. Child hashes are combined in sorted order, so no left/right
//! flags travel with the path.
//!
//! For a membership proof the target is the key itself. For a
//! non-membership proof the target is the node where a search for the key
//! fell off the tree, recorded as `non_existence_key`; the verifier
//! additionally checks that the search for the key really would end there:
//! the key must sit on the same side as `non_existence_key` of every
//! ancestor, and the target's child slot on the key's side must be the
//! empty digest. Without the same-side check, a valid exclusion path for
//! one region could be replayed to "disprove" a key that lives elsewhere
//! in the tree.
//!
//! The proof encodes to a small JSON object (`to_json`/`from_json`) whose
//! `prefix` is the flattened `[key, sibling, key, sibling, …]` list, all
//! values lowercase hex.

use serde_json::{json, Value};
use thiserror::Error;

use crate::hash::{Digest, HashScheme, Key, WidthError};
use crate::tree::Tree;

/// One ancestor on the path to the proof target: the ancestor's key and
/// the hash of its child on the side the search did not take.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct PrefixEntry {
    pub key: Key,
    pub sibling: Digest,
}

/// A membership or non-membership proof.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Proof {
    /// Ancestors of the target, root first.
    pub prefix: Vec<PrefixEntry>,
    /// The target node's (left, right) child hashes.
    pub suffix: (Digest, Digest),
    /// True for membership: the target is the proven key itself.
    pub existence: bool,
    /// For non-membership, the key of the node where the search ended;
    /// the all-zero key on membership proofs.
    pub non_existence_key: Key,
}

/// A proof could not be generated.
#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum ProofError {
    /// An empty tree has nothing to anchor a path to; its root is the
    /// all-zero digest, which already proves every key absent.
    #[error("cannot build a proof against an empty tree")]
    EmptyTree,
    #[error(transparent)]
    Width(#[from] WidthError),
}

/// Builds a proof that `key` is or is not in `tree`, depending on which is
/// true. The proof is verified against [`Tree::root_digest`].
pub fn generate_proof(tree: &Tree, key: &Key) -> Result<Proof, ProofError> {
    tree.scheme().check_width(key.as_bytes())?;
    let width = tree.width();
    let zero = Digest::zero(width);
    let child_mh = |child: Option<crate::tree::NodeRef<'_>>| match child {
        Some(node) => node.mh().clone(),
        None => zero.clone(),
    };

    let mut prefix = Vec::new();
    let mut cur = tree.root_node().ok_or(ProofError::EmptyTree)?;
    loop {
        match key.cmp(cur.key()) {
            std::cmp::Ordering::Equal => {
                return Ok(Proof {
                    prefix,
                    suffix: (child_mh(cur.left()), child_mh(cur.right())),
                    existence: true,
                    non_existence_key: Key::zero(width),
                });
            }
            std::cmp::Ordering::Less => match cur.left() {
                Some(next) => {
                    prefix.push(PrefixEntry {
                        key: cur.key().clone(),
                        sibling: child_mh(cur.right()),
                    });
                    cur = next;
                }
                None => break,
            },
            std::cmp::Ordering::Greater => match cur.right() {
                Some(next) => {
                    prefix.push(PrefixEntry {
                        key: cur.key().clone(),
                        sibling: child_mh(cur.left()),
                    });
                    cur = next;
                }
                None => break,
            },
        }
    }
    // The search fell off `cur`: it becomes the non-membership target.
    Ok(Proof {
        prefix,
        suffix: (child_mh(cur.left()), child_mh(cur.right())),
        existence: false,
        non_existence_key: cur.key().clone(),
    })
}

/// Checks `proof` for `key` against a root digest. Returns false for any
/// inconsistency: wrong widths, a hash chain that does not reach `root`,
/// or a non-membership claim whose path could not be the search path for
/// `key`.
pub fn verify_proof(scheme: &dyn HashScheme, proof: &Proof, key: &Key, root: &Digest) -> bool {
    let width = scheme.width();
    let widths_ok = key.width() == width
        && root.width() == width
        && proof.non_existence_key.width() == width
        && proof.suffix.0.width() == width
        && proof.suffix.1.width() == width
        && proof
            .prefix
            .iter()
            .all(|e| e.key.width() == width && e.sibling.width() == width);
    if !widths_ok {
        return false;
    }

    let target = if proof.existence {
        // Membership fixes the target to the key; the slot is reserved.
        if !proof.non_existence_key.is_zero() {
            return false;
        }
        key
    } else {
        let nek = &proof.non_existence_key;
        // The key itself must be absent from the claimed path...
        if key == nek {
            return false;
        }
        // ...the search must fall off the target on the key's side...
        let missing_side = if key < nek {
            &proof.suffix.0
        } else {
            &proof.suffix.1
        };
        if !missing_side.is_zero() {
            return false;
        }
        nek
    };

    // A search for `key` must reach the target: the key may equal no
    // ancestor and must lie on the same side of each one as the target.
    for entry in &proof.prefix {
        if key == &entry.key {
            return false;
        }
        if proof.existence {
            continue;
        }
        if (key < &entry.key) != (target < &entry.key) {
            return false;
        }
    }

    // Rebuild the target hash, then fold upward, deepest ancestor first.
    let Ok(mut acc) = scheme.calculate_mh(target, &proof.suffix.0, &proof.suffix.1) else {
        return false;
    };
    for entry in proof.prefix.iter().rev() {
        let Ok(next) = scheme.calculate_mh(&entry.key, &acc, &entry.sibling) else {
            return false;
        };
        acc = next;
    }
    acc == *root
}

impl Proof {
    /// Number of keys and digests the proof carries: two per ancestor plus
    /// the two suffix hashes.
    pub fn size(&self) -> usize {
        2 * self.prefix.len() + 2
    }

    /// Serializes to the JSON wire form, all values lowercase hex.
    pub fn to_json(&self) -> String {
        let mut prefix = Vec::with_capacity(2 * self.prefix.len());
        for entry in &self.prefix {
            prefix.push(entry.key.to_hex());
            prefix.push(entry.sibling.to_hex());
        }
        json!({
            "prefix": prefix,
            "suffix": [self.suffix.0.to_hex(), self.suffix.1.to_hex()],
            "existence": self.existence,
            "nonExistenceKey": self.non_existence_key.to_hex(),
        })
        .to_string()
    }

    /// Parses the JSON wire form. All hex values must decode to one common
    /// width; the `prefix` list must alternate key/sibling pairs.
    pub fn from_json(text: &str) -> Result<Self, ProofJsonError> {
        let value: Value =
            serde_json::from_str(text).map_err(|e| ProofJsonError::Parse(e.to_string()))?;
        let Value::Object(map) = value else {
            return Err(ProofJsonError::NotAnObject);
        };
        for field in map.keys() {
            if !matches!(
                field.as_str(),
                "prefix" | "suffix" | "existence" | "nonExistenceKey"
            ) {
                return Err(ProofJsonError::UnknownField(field.clone()));
            }
        }
        let field = |name: &'static str| map.get(name).ok_or(ProofJsonError::Missing(name));

        let hex_bytes = |v: &Value, ctx: &'static str| -> Result<Box<[u8]>, ProofJsonError> {
            let Value::String(s) = v else {
                return Err(ProofJsonError::BadValue(ctx));
            };
            hex::decode(s)
                .map(Vec::into_boxed_slice)
                .map_err(|_| ProofJsonError::BadValue(ctx))
        };

        let Value::Bool(existence) = *field("existence")? else {
            return Err(ProofJsonError::BadValue("existence"));
        };
        let nek = hex_bytes(field("nonExistenceKey")?, "nonExistenceKey")?;

        let Value::Array(raw_suffix) = field("suffix")? else {
            return Err(ProofJsonError::BadValue("suffix"));
        };
        let [a, b] = raw_suffix.as_slice() else {
            return Err(ProofJsonError::BadValue("suffix"));
        };
        let suffix = (hex_bytes(a, "suffix")?, hex_bytes(b, "suffix")?);

        let Value::Array(raw_prefix) = field("prefix")? else {
            return Err(ProofJsonError::BadValue("prefix"));
        };
        if raw_prefix.len() % 2 != 0 {
            return Err(ProofJsonError::OddPrefix(raw_prefix.len()));
        }
        let mut prefix = Vec::with_capacity(raw_prefix.len() / 2);
        for pair in raw_prefix.chunks_exact(2) {
            prefix.push((hex_bytes(&pair[0], "prefix")?, hex_bytes(&pair[1], "prefix")?));
        }

        // One width must govern every value; the suffix always exists, so
        // anchor on it.
        let width = suffix.0.len();
        let all_widths = [suffix.1.len(), nek.len()]
            .into_iter()
            .chain(prefix.iter().flat_map(|(k, s)| [k.len(), s.len()]));
        if width == 0 || all_widths.into_iter().any(|w| w != width) {
            return Err(ProofJsonError::InconsistentWidths);
        }

        Ok(Proof {
            prefix: prefix
                .into_iter()
                .map(|(k, s)| PrefixEntry {
                    key: Key::from_bytes(k),
                    sibling: Digest::from_bytes(s),
                })
                .collect(),
            suffix: (Digest::from_bytes(suffix.0), Digest::from_bytes(suffix.1)),
            existence,
            non_existence_key: Key::from_bytes(nek),
        })
    }
}

/// The JSON wire form was malformed.
#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum ProofJsonError {
    #[error("invalid JSON: {0}")]
    Parse(String),
    #[error("proof must be a JSON object")]
    NotAnObject,
    #[error("missing field {0:?}")]
    Missing(&'static str),
    #[error("unknown field {0:?}")]
    UnknownField(String),
    #[error("field {0:?} has the wrong type or is not valid hex")]
    BadValue(&'static str),
    #[error("prefix has {0} entries; it must alternate key/sibling pairs")]
    OddPrefix(usize),
    #[error("values disagree on byte width")]
    InconsistentWidths,
}
