//! Golden tests over the six-key worked example: the pinned tree shapes
//! before and after mutating the root region, and the exact membership and
//! exclusion proofs those trees produce.

mod common;

use cmt::oracle::{build_reference, compare};
use cmt::{generate_proof, verify_proof, HashScheme, NodeRef};
use common::{digest, example_scheme, example_tree, key};

/// Asserts that `node` holds `expected` and hands back its children.
fn expect_key<'a>(
    node: Option<NodeRef<'a>>,
    expected: u64,
) -> (Option<NodeRef<'a>>, Option<NodeRef<'a>>) {
    let node = node.unwrap_or_else(|| panic!("expected a node holding {expected}"));
    assert_eq!(*node.key(), key(expected), "wrong key at this position");
    (node.left(), node.right())
}

fn expect_leaf(node: Option<NodeRef<'_>>, expected: u64) {
    let (left, right) = expect_key(node, expected);
    assert!(left.is_none(), "leaf {expected} has a left child");
    assert!(right.is_none(), "leaf {expected} has a right child");
}

#[test]
fn five_key_build_matches_the_pinned_shape() {
    let tree = example_tree(&[15, 10, 20, 5, 18]);
    tree.check_invariants().unwrap();

    // Highest priority (15) on top; each wing headed by its next-highest.
    let (left, right) = expect_key(tree.root_node(), 15);
    let (ll, lr) = expect_key(left, 10);
    expect_leaf(ll, 5);
    assert!(lr.is_none());
    let (rl, rr) = expect_key(right, 20);
    expect_leaf(rl, 18);
    assert!(rr.is_none());

    let reference =
        build_reference([15u64, 10, 20, 5, 18].map(key), tree.scheme().as_ref()).unwrap();
    compare(&reference, &tree).unwrap();
}

#[test]
fn inserting_the_top_priority_key_reroots_the_tree() {
    let mut tree = example_tree(&[15, 10, 20, 5, 18]);
    tree.insert(key(13), None).unwrap();
    tree.check_invariants().unwrap();
    assert_eq!(tree.root_digest(), digest(333));

    // 13 outranks everything, so it rises to the root; the old root 15
    // becomes its right child with the rest of the right wing below.
    let (left, right) = expect_key(tree.root_node(), 13);
    let (ll, lr) = expect_key(left, 10);
    expect_leaf(ll, 5);
    assert!(lr.is_none());
    let (rl, rr) = expect_key(right, 15);
    assert!(rl.is_none());
    let (rrl, rrr) = expect_key(rr, 20);
    expect_leaf(rrl, 18);
    assert!(rrr.is_none());

    let reference =
        build_reference([5u64, 10, 13, 15, 18, 20].map(key), tree.scheme().as_ref()).unwrap();
    compare(&reference, &tree).unwrap();
}

#[test]
fn removing_a_wing_head_promotes_its_child() {
    let mut tree = example_tree(&[15, 10, 20, 5, 18, 13]);
    tree.remove(&key(15)).unwrap();
    tree.check_invariants().unwrap();
    assert_eq!(tree.root_digest(), digest(320));

    // 20 (the higher-priority child of the removed 15) heads the right
    // wing directly; the left wing is untouched.
    let (left, right) = expect_key(tree.root_node(), 13);
    let (ll, lr) = expect_key(left, 10);
    expect_leaf(ll, 5);
    assert!(lr.is_none());
    let (rl, rr) = expect_key(right, 20);
    expect_leaf(rl, 18);
    assert!(rr.is_none());

    let reference =
        build_reference([5u64, 10, 13, 18, 20].map(key), tree.scheme().as_ref()).unwrap();
    compare(&reference, &tree).unwrap();
}

#[test]
fn membership_proof_for_a_leaf_walks_the_pinned_accumulator_chain() {
    let tree = example_tree(&[15, 10, 20, 5, 18, 13]);
    let proof = generate_proof(&tree, &key(18)).unwrap();

    assert!(proof.existence);
    assert!(proof.non_existence_key.is_zero());
    let path: Vec<_> = proof
        .prefix
        .iter()
        .map(|e| (e.key.clone(), e.sibling.clone()))
        .collect();
    assert_eq!(
        path,
        vec![
            (key(13), digest(180)),
            (key(15), digest(0)),
            (key(20), digest(0)),
        ]
    );
    assert_eq!(proof.suffix, (digest(0), digest(0)));
    assert_eq!(proof.size(), 8);

    // The verifier's accumulator takes exactly these values on the climb
    // from the target back to the root.
    let scheme = example_scheme();
    let acc = scheme.calculate_mh(&key(18), &digest(0), &digest(0)).unwrap();
    assert_eq!(acc, digest(100));
    let acc = scheme.calculate_mh(&key(20), &acc, &digest(0)).unwrap();
    assert_eq!(acc, digest(130));
    let acc = scheme.calculate_mh(&key(15), &acc, &digest(0)).unwrap();
    assert_eq!(acc, digest(160));
    let acc = scheme.calculate_mh(&key(13), &acc, &digest(180)).unwrap();
    assert_eq!(acc, digest(333));

    assert!(verify_proof(&scheme, &proof, &key(18), &digest(333)));
}

#[test]
fn exclusion_proof_anchors_on_the_search_terminal() {
    let tree = example_tree(&[15, 10, 20, 5, 18, 13]);
    let proof = generate_proof(&tree, &key(25)).unwrap();

    // The search for 25 falls off the right edge at node 20, which
    // becomes the witness for the empty slot.
    assert!(!proof.existence);
    assert_eq!(proof.non_existence_key, key(20));
    let path: Vec<_> = proof
        .prefix
        .iter()
        .map(|e| (e.key.clone(), e.sibling.clone()))
        .collect();
    assert_eq!(path, vec![(key(13), digest(180)), (key(15), digest(0))]);
    assert_eq!(proof.suffix, (digest(100), digest(0)));
    assert_eq!(proof.size(), 6);

    assert!(verify_proof(&example_scheme(), &proof, &key(25), &digest(333)));
}
