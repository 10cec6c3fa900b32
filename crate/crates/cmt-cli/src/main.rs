//! Command-line front end over the authenticated-treap library: build trees
//! from key files, mutate them in place, emit and check proofs, and run the
//! operation-counter benchmarks.
//!
//! Keys are fixed at 32 bytes (64 hex characters) and hashed with SHA-256;
//! the library underneath stays width-generic. Every failure is a coded
//! exit with a diagnostic on stderr:
//!
//! * 0 — success (for `verify`: the proof is valid)
//! * 1 — `verify` ran cleanly and the proof is invalid
//! * 2 — malformed input: unreadable or corrupt files, bad hex, wrong width
//! * 3 — `insert` of a key that is already present
//! * 4 — `remove` of a key that is absent

use std::collections::BTreeSet;
use std::fs;
use std::path::{Path, PathBuf};
use std::process::ExitCode;
use std::sync::Arc;

use clap::{Parser, Subcommand};
use cmt::bench::{emit_csv, measure_proof_sizes, run_benchmark};
use cmt::{generate_proof, verify_proof, Digest, Key, Proof, Sha256Scheme, Tree, TreeError};

/// Keys and digests are fixed at this many bytes on the command line.
const KEY_WIDTH: usize = 32;

const EXIT_INVALID_PROOF: u8 = 1;
const EXIT_MALFORMED: u8 = 2;
const EXIT_DUPLICATE_KEY: u8 = 3;
const EXIT_KEY_NOT_FOUND: u8 = 4;

#[derive(Parser)]
#[command(name = "cmt", version, about = "Authenticated treap toolkit")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Build a tree from a key file (one hex key per line, '#' comments)
    /// and write it to a tree file.
    Build {
        /// Key file to read.
        keyfile: PathBuf,
        /// Where to write the tree file.
        #[arg(long)]
        out: PathBuf,
    },
    /// Insert a key into a tree file, rewriting it in place.
    Insert {
        /// Tree file to mutate.
        #[arg(long)]
        tree: PathBuf,
        /// Key to insert, 64 hex characters.
        #[arg(long)]
        key: String,
    },
    /// Remove a key from a tree file, rewriting it in place.
    Remove {
        /// Tree file to mutate.
        #[arg(long)]
        tree: PathBuf,
        /// Key to remove, 64 hex characters.
        #[arg(long)]
        key: String,
    },
    /// Print a tree file's root digest as lowercase hex.
    Root {
        /// Tree file to read.
        #[arg(long)]
        tree: PathBuf,
    },
    /// Write a membership or exclusion proof for a key as JSON.
    Prove {
        /// Tree file to read.
        #[arg(long)]
        tree: PathBuf,
        /// Key to prove, 64 hex characters.
        #[arg(long)]
        key: String,
        /// Where to write the proof (stdout when omitted).
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Check a proof file against a key and an expected root digest.
    Verify {
        /// Proof file to check.
        #[arg(long)]
        proof: PathBuf,
        /// Key the proof is claimed for, 64 hex characters.
        #[arg(long)]
        key: String,
        /// Expected root digest, 64 hex characters.
        #[arg(long)]
        root: String,
    },
    /// Run the operation-counter benchmark and emit CSV, plus a proof-size
    /// comparison against the sparse baseline at the largest size.
    Bench {
        /// Comma-separated tree sizes to measure.
        #[arg(long, value_delimiter = ',', default_value = "100,1000,5000,10000")]
        sizes: Vec<usize>,
        /// Seed for the deterministic key generator.
        #[arg(long, default_value_t = 42)]
        seed: u64,
        /// Where to write the CSV (stdout when omitted).
        #[arg(long)]
        out: Option<PathBuf>,
    },
}

/// A failure the process reports as `error: <message>` and a coded exit.
struct Failure {
    code: u8,
    message: String,
}

impl Failure {
    fn malformed(message: impl Into<String>) -> Self {
        Self { code: EXIT_MALFORMED, message: message.into() }
    }
}

fn main() -> ExitCode {
    match run(Cli::parse().command) {
        Ok(code) => code,
        Err(failure) => {
            eprintln!("error: {}", failure.message);
            ExitCode::from(failure.code)
        }
    }
}

fn run(command: Command) -> Result<ExitCode, Failure> {
    match command {
        Command::Build { keyfile, out } => {
            let keys = read_key_file(&keyfile)?;
            let mut tree = Tree::new(Arc::new(Sha256Scheme::new()));
            for key in keys {
                // The key file was de-duplicated, so inserts cannot fail.
                tree.insert(key, None)
                    .map_err(|e| Failure::malformed(e.to_string()))?;
            }
            write_file(&out, &tree.to_bytes())?;
            Ok(ExitCode::SUCCESS)
        }
        Command::Insert { tree: path, key } => {
            let mut tree = read_tree_file(&path)?;
            let key = parse_hex::<Key>(&key, "--key")?;
            match tree.insert(key, None) {
                Ok(report) => {
                    write_file(&path, &tree.to_bytes())?;
                    println!("{}", report.root.to_hex());
                    Ok(ExitCode::SUCCESS)
                }
                Err(TreeError::DuplicateKey(key)) => Err(Failure {
                    code: EXIT_DUPLICATE_KEY,
                    message: format!("key {key} is already in the tree"),
                }),
                Err(e) => Err(Failure::malformed(e.to_string())),
            }
        }
        Command::Remove { tree: path, key } => {
            let mut tree = read_tree_file(&path)?;
            let key = parse_hex::<Key>(&key, "--key")?;
            match tree.remove(&key) {
                Ok(report) => {
                    write_file(&path, &tree.to_bytes())?;
                    println!("{}", report.root.to_hex());
                    Ok(ExitCode::SUCCESS)
                }
                Err(TreeError::KeyNotFound(key)) => Err(Failure {
                    code: EXIT_KEY_NOT_FOUND,
                    message: format!("key {key} is not in the tree"),
                }),
                Err(e) => Err(Failure::malformed(e.to_string())),
            }
        }
        Command::Root { tree: path } => {
            let tree = read_tree_file(&path)?;
            println!("{}", tree.root_digest().to_hex());
            Ok(ExitCode::SUCCESS)
        }
        Command::Prove { tree: path, key, out } => {
            let tree = read_tree_file(&path)?;
            let key = parse_hex::<Key>(&key, "--key")?;
            let proof = generate_proof(&tree, &key)
                .map_err(|e| Failure::malformed(e.to_string()))?;
            let text = proof.to_json();
            match out {
                Some(path) => write_file(&path, format!("{text}\n").as_bytes())?,
                None => println!("{text}"),
            }
            Ok(ExitCode::SUCCESS)
        }
        Command::Verify { proof: path, key, root } => {
            let text = read_text_file(&path)?;
            let proof = Proof::from_json(&text).map_err(|e| {
                Failure::malformed(format!("{} is not a valid proof: {e}", path.display()))
            })?;
            let key = parse_hex::<Key>(&key, "--key")?;
            let root = parse_hex::<Digest>(&root, "--root")?;
            let scheme = Sha256Scheme::new();
            if verify_proof(&scheme, &proof, &key, &root) {
                println!("valid");
                Ok(ExitCode::SUCCESS)
            } else {
                println!("invalid");
                Ok(ExitCode::from(EXIT_INVALID_PROOF))
            }
        }
        Command::Bench { sizes, seed, out } => {
            if sizes.is_empty() || sizes.contains(&0) {
                return Err(Failure::malformed("--sizes needs at least one positive size"));
            }
            let csv = emit_csv(&run_benchmark(&sizes, seed));
            let proof_sizes = measure_proof_sizes(sizes.iter().copied().max().unwrap(), seed);
            match out {
                Some(path) => {
                    write_file(&path, csv.as_bytes())?;
                    println!("{proof_sizes}");
                }
                None => {
                    // Keep stdout clean CSV; the comparison goes to stderr.
                    print!("{csv}");
                    eprintln!("{proof_sizes}");
                }
            }
            Ok(ExitCode::SUCCESS)
        }
    }
}

/// Parses a `Key` or `Digest` command-line argument: hex, exactly 32 bytes.
fn parse_hex<T: HexArg>(text: &str, flag: &str) -> Result<T, Failure> {
    let value = T::from_hex(text)
        .map_err(|e| Failure::malformed(format!("{flag} is not valid hex: {e}")))?;
    if value.width() != KEY_WIDTH {
        return Err(Failure::malformed(format!(
            "{flag} must be {KEY_WIDTH} bytes ({} hex characters), got {} bytes",
            2 * KEY_WIDTH,
            value.width()
        )));
    }
    Ok(value)
}

/// The two hex-encoded argument types, unified for `parse_hex`.
trait HexArg: Sized {
    fn from_hex(text: &str) -> Result<Self, String>;
    fn width(&self) -> usize;
}

impl HexArg for Key {
    fn from_hex(text: &str) -> Result<Self, String> {
        Key::from_hex(text).map_err(|e| e.to_string())
    }
    fn width(&self) -> usize {
        self.width()
    }
}

impl HexArg for Digest {
    fn from_hex(text: &str) -> Result<Self, String> {
        Digest::from_hex(text).map_err(|e| e.to_string())
    }
    fn width(&self) -> usize {
        self.width()
    }
}

/// Reads a key file: one hex key per line, `#` starts a comment, blank
/// lines ignored, duplicates rejected.
fn read_key_file(path: &Path) -> Result<Vec<Key>, Failure> {
    let text = read_text_file(path)?;
    let mut keys = Vec::new();
    let mut seen = BTreeSet::new();
    for (number, line) in text.lines().enumerate() {
        let line = line.split('#').next().unwrap_or("").trim();
        if line.is_empty() {
            continue;
        }
        let place = format!("{} line {}", path.display(), number + 1);
        let key = parse_hex::<Key>(line, &place)?;
        if !seen.insert(key.clone()) {
            return Err(Failure::malformed(format!("{place}: duplicate key {key}")));
        }
        keys.push(key);
    }
    Ok(keys)
}

fn read_tree_file(path: &Path) -> Result<Tree, Failure> {
    let bytes = fs::read(path)
        .map_err(|e| Failure::malformed(format!("cannot read {}: {e}", path.display())))?;
    Tree::from_bytes(&bytes, Arc::new(Sha256Scheme::new())).map_err(|e| {
        Failure::malformed(format!("{} is not a valid tree file: {e}", path.display()))
    })
}

fn read_text_file(path: &Path) -> Result<String, Failure> {
    fs::read_to_string(path)
        .map_err(|e| Failure::malformed(format!("cannot read {}: {e}", path.display())))
}

fn write_file(path: &Path, bytes: &[u8]) -> Result<(), Failure> {
    fs::write(path, bytes)
        .map_err(|e| Failure::malformed(format!("cannot write {}: {e}", path.display())))
}
