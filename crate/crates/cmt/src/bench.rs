//! Deterministic micro-benchmarks comparing the tree against the sparse
//! Merkle baseline.
//!
//! Work is measured in abstract units — hash calls, rotations, node reads
//! and writes, and touched depth — rather than wall time, so a run is
//! reproducible byte for byte from its seed. For each requested size `n`,
//! both structures insert the same `n` random 32-byte keys in the same
//! order, then remove them all in the same shuffled order, and the
//! per-operation counters are folded into min/mean/max statistics.

use std::fmt;
use std::sync::Arc;

use rand_chacha::ChaCha12Rng;
use rand_core::{Rng, SeedableRng};

use crate::hash::{Key, Sha256Scheme};
use crate::proof::generate_proof;
use crate::smt::SparseMerkleTree;
use crate::tree::{MutationReport, Tree};

/// Key width used for benchmark workloads.
pub const KEY_WIDTH: usize = 32;

/// Keeps the removal-order stream disjoint from the key stream.
const SHUFFLE_SALT: u64 = 0x7368_7566_666c_6573;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Structure {
    Cmt,
    Smt,
}

impl Structure {
    pub fn label(self) -> &'static str {
        match self {
            Structure::Cmt => "CMT",
            Structure::Smt => "SMT",
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Operation {
    Insert,
    Remove,
}

impl Operation {
    pub fn label(self) -> &'static str {
        match self {
            Operation::Insert => "insert",
            Operation::Remove => "remove",
        }
    }
}

/// Minimum, mean, and maximum of one counter across a batch of operations.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CounterStats {
    pub min: u64,
    pub mean: f64,
    pub max: u64,
}

fn stats(samples: &[u64]) -> CounterStats {
    let sum: u64 = samples.iter().sum();
    CounterStats {
        min: samples.iter().copied().min().unwrap_or(0),
        mean: sum as f64 / samples.len().max(1) as f64,
        max: samples.iter().copied().max().unwrap_or(0),
    }
}

/// Counter statistics for one (structure, operation, size) cell.
#[derive(Debug, Clone, PartialEq)]
pub struct BenchReport {
    pub structure: Structure,
    pub operation: Operation,
    pub n: usize,
    pub seed: u64,
    pub hash_calls: CounterStats,
    pub rotations: CounterStats,
    pub node_reads: CounterStats,
    pub node_writes: CounterStats,
    pub depth: CounterStats,
}

impl BenchReport {
    /// Counters in the order they appear in the CSV.
    pub fn counters(&self) -> [(&'static str, &CounterStats); 5] {
        [
            ("hash_calls", &self.hash_calls),
            ("rotations", &self.rotations),
            ("node_reads", &self.node_reads),
            ("node_writes", &self.node_writes),
            ("depth", &self.depth),
        ]
    }

    fn from_reports(
        structure: Structure,
        operation: Operation,
        n: usize,
        seed: u64,
        reports: &[MutationReport],
    ) -> Self {
        let collect = |f: fn(&MutationReport) -> u64| {
            let samples: Vec<u64> = reports.iter().map(f).collect();
            stats(&samples)
        };
        BenchReport {
            structure,
            operation,
            n,
            seed,
            hash_calls: collect(|r| r.hash_calls),
            rotations: collect(|r| r.rotations),
            node_reads: collect(|r| r.node_reads),
            node_writes: collect(|r| r.node_writes),
            depth: collect(|r| r.depth as u64),
        }
    }
}

/// `n` distinct random keys, a pure function of `(n, seed)`.
pub fn random_keys(n: usize, seed: u64) -> Vec<Key> {
    // Spread the per-size streams far apart in seed space.
    let mut rng = ChaCha12Rng::seed_from_u64(
        seed ^ (n as u64).wrapping_mul(0x9e37_79b9_7f4a_7c15),
    );
    let mut seen = std::collections::BTreeSet::new();
    let mut keys = Vec::with_capacity(n);
    while keys.len() < n {
        let mut bytes = [0u8; KEY_WIDTH];
        rng.fill_bytes(&mut bytes);
        let key = Key::from_bytes(&bytes[..]);
        if seen.insert(key.clone()) {
            keys.push(key);
        }
    }
    keys
}

fn shuffle<T>(items: &mut [T], rng: &mut ChaCha12Rng) {
    for i in (1..items.len()).rev() {
        let j = (rng.next_u64() % (i as u64 + 1)) as usize;
        items.swap(i, j);
    }
}

/// Runs the full grid: for every size, both structures insert the same
/// keys and then remove them in the same shuffled order. Returns one
/// report per (size, structure, operation), sizes outermost.
pub fn run_benchmark(sizes: &[usize], seed: u64) -> Vec<BenchReport> {
    let mut out = Vec::with_capacity(sizes.len() * 4);
    for &n in sizes {
        let keys = random_keys(n, seed);
        let mut removal_order = keys.clone();
        let mut rng = ChaCha12Rng::seed_from_u64(
            (seed ^ SHUFFLE_SALT).wrapping_add((n as u64).wrapping_mul(0x9e37_79b9_7f4a_7c15)),
        );
        shuffle(&mut removal_order, &mut rng);

        for structure in [Structure::Cmt, Structure::Smt] {
            let (inserts, removes) = match structure {
                Structure::Cmt => {
                    let mut tree = Tree::new(Arc::new(Sha256Scheme::new()));
                    let inserts: Vec<MutationReport> = keys
                        .iter()
                        .map(|k| tree.insert(k.clone(), None).expect("keys are distinct"))
                        .collect();
                    let removes: Vec<MutationReport> = removal_order
                        .iter()
                        .map(|k| tree.remove(k).expect("key was inserted"))
                        .collect();
                    assert!(tree.is_empty());
                    (inserts, removes)
                }
                Structure::Smt => {
                    let mut tree = SparseMerkleTree::new(KEY_WIDTH);
                    let inserts: Vec<MutationReport> = keys
                        .iter()
                        .map(|k| tree.insert(k.clone()).expect("keys are distinct"))
                        .collect();
                    let removes: Vec<MutationReport> = removal_order
                        .iter()
                        .map(|k| tree.remove(k).expect("key was inserted"))
                        .collect();
                    assert!(tree.is_empty());
                    (inserts, removes)
                }
            };
            out.push(BenchReport::from_reports(
                structure,
                Operation::Insert,
                n,
                seed,
                &inserts,
            ));
            out.push(BenchReport::from_reports(
                structure,
                Operation::Remove,
                n,
                seed,
                &removes,
            ));
        }
    }
    out
}

/// Renders reports as CSV: one row per counter, means to four decimals.
/// Output is byte-identical for identical inputs.
pub fn emit_csv(reports: &[BenchReport]) -> String {
    let mut out = String::from("structure,op,n,counter,min,avg,max,seed\n");
    for report in reports {
        for (name, stats) in report.counters() {
            out.push_str(&format!(
                "{},{},{},{},{},{:.4},{},{}\n",
                report.structure.label(),
                report.operation.label(),
                report.n,
                name,
                stats.min,
                stats.mean,
                stats.max,
                report.seed,
            ));
        }
    }
    out
}

/// Proof-size comparison over one key set: every key's membership proof
/// in the tree against its path in the baseline.
#[derive(Debug, Clone, PartialEq)]
pub struct ProofSizeReport {
    pub n: usize,
    pub seed: u64,
    /// Values (keys + digests) carried by tree proofs.
    pub tree_mean: f64,
    pub tree_max: usize,
    /// Root-to-leaf path lengths in the baseline — the number of sibling
    /// digests a baseline membership proof carries.
    pub baseline_mean: f64,
    pub baseline_max: usize,
}

impl fmt::Display for ProofSizeReport {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        writeln!(f, "proof sizes over {} keys (seed {}):", self.n, self.seed)?;
        writeln!(
            f,
            "  tree:     mean {:.2} values, max {}",
            self.tree_mean, self.tree_max
        )?;
        write!(
            f,
            "  baseline: mean {:.2} siblings, max {}",
            self.baseline_mean, self.baseline_max
        )
    }
}

/// Builds both structures over the same `n` random keys and measures every
/// key's proof size.
pub fn measure_proof_sizes(n: usize, seed: u64) -> ProofSizeReport {
    let keys = random_keys(n, seed);
    let mut tree = Tree::new(Arc::new(Sha256Scheme::new()));
    let mut baseline = SparseMerkleTree::new(KEY_WIDTH);
    for key in &keys {
        tree.insert(key.clone(), None).expect("keys are distinct");
        baseline.insert(key.clone()).expect("keys are distinct");
    }
    let mut tree_sum = 0usize;
    let mut tree_max = 0usize;
    let mut base_sum = 0usize;
    let mut base_max = 0usize;
    for key in &keys {
        let proof = generate_proof(&tree, key).expect("tree is non-empty");
        assert!(proof.existence);
        let size = proof.size();
        tree_sum += size;
        tree_max = tree_max.max(size);
        let path = baseline.path_len(key).expect("key is present");
        base_sum += path;
        base_max = base_max.max(path);
    }
    ProofSizeReport {
        n,
        seed,
        tree_mean: tree_sum as f64 / n.max(1) as f64,
        tree_max,
        baseline_mean: base_sum as f64 / n.max(1) as f64,
        baseline_max: base_max,
    }
}
