//! End-to-end tests of the `cmt` binary: file round trips, the pinned
//! five-key root digest, proof round trips, and the documented exit codes.

use std::fs;
use std::path::{Path, PathBuf};
use std::process::{Command, Output};

/// Root digest of the five-key demo set {5, 10, 15, 18, 20} (32-byte
/// big-endian keys) under the production SHA-256 scheme, computed once via
/// the exhaustive reference builder and pinned.
const FIVE_KEY_ROOT: &str = "5683d18b637595117fb79f7446a3f4b6848892a9012f60bfbf880e32fa59138a";

fn hex_key(v: u64) -> String {
    format!("{v:064x}")
}

fn cmt(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_cmt"))
        .args(args)
        .output()
        .expect("the binary should launch")
}

fn stdout_line(output: &Output) -> String {
    String::from_utf8_lossy(&output.stdout).trim().to_string()
}

fn exit_code(output: &Output) -> i32 {
    output.status.code().expect("the binary must exit, not die on a signal")
}

/// A fresh scratch directory per test, under the target tree.
fn scratch(test: &str) -> PathBuf {
    let dir = Path::new(env!("CARGO_TARGET_TMPDIR")).join(test);
    let _ = fs::remove_dir_all(&dir);
    fs::create_dir_all(&dir).unwrap();
    dir
}

fn write_five_key_file(dir: &Path) -> PathBuf {
    let path = dir.join("keys.txt");
    let mut text = String::from("# demo key set\n\n");
    for v in [15u64, 10, 20, 5, 18] {
        text.push_str(&hex_key(v));
        text.push_str(if v == 20 { " # inline comment\n" } else { "\n" });
    }
    fs::write(&path, text).unwrap();
    path
}

fn build_five_key_tree(dir: &Path) -> PathBuf {
    let keys = write_five_key_file(dir);
    let tree = dir.join("tree.bin");
    let out = cmt(&["build", keys.to_str().unwrap(), "--out", tree.to_str().unwrap()]);
    assert_eq!(exit_code(&out), 0, "build failed: {}", String::from_utf8_lossy(&out.stderr));
    tree
}

#[test]
fn build_then_root_matches_the_pinned_golden() {
    let dir = scratch("golden_root");
    let tree = build_five_key_tree(&dir);
    let out = cmt(&["root", "--tree", tree.to_str().unwrap()]);
    assert_eq!(exit_code(&out), 0);
    assert_eq!(stdout_line(&out), FIVE_KEY_ROOT);
}

#[test]
fn mutations_rewrite_the_tree_file_in_place() {
    let dir = scratch("mutate_in_place");
    let tree = build_five_key_tree(&dir);
    let tree = tree.to_str().unwrap();

    let out = cmt(&["insert", "--tree", tree, "--key", &hex_key(13)]);
    assert_eq!(exit_code(&out), 0);
    let grown = stdout_line(&out);
    assert_ne!(grown, FIVE_KEY_ROOT);

    // `root` agrees with what `insert` reported, and removing the key
    // restores the original digest: no trace of the detour remains.
    let out = cmt(&["root", "--tree", tree]);
    assert_eq!(stdout_line(&out), grown);
    let out = cmt(&["remove", "--tree", tree, "--key", &hex_key(13)]);
    assert_eq!(exit_code(&out), 0);
    assert_eq!(stdout_line(&out), FIVE_KEY_ROOT);
}

#[test]
fn prove_and_verify_round_trip_for_present_and_absent_keys() {
    let dir = scratch("prove_verify");
    let tree = build_five_key_tree(&dir);
    let tree = tree.to_str().unwrap();
    let proof = dir.join("proof.json");
    let proof = proof.to_str().unwrap();

    for key in [hex_key(18), hex_key(25)] {
        let out = cmt(&["prove", "--tree", tree, "--key", &key, "--out", proof]);
        assert_eq!(exit_code(&out), 0);
        let out = cmt(&["verify", "--proof", proof, "--key", &key, "--root", FIVE_KEY_ROOT]);
        assert_eq!(exit_code(&out), 0, "a fresh proof failed to verify");
        assert_eq!(stdout_line(&out), "valid");
    }

    // Without --out the proof lands on stdout and verifies all the same.
    let out = cmt(&["prove", "--tree", tree, "--key", &hex_key(18)]);
    assert_eq!(exit_code(&out), 0);
    fs::write(dir.join("stdout.json"), out.stdout).unwrap();
    let out = cmt(&[
        "verify",
        "--proof",
        dir.join("stdout.json").to_str().unwrap(),
        "--key",
        &hex_key(18),
        "--root",
        FIVE_KEY_ROOT,
    ]);
    assert_eq!(exit_code(&out), 0);
}

#[test]
fn a_tampered_root_nibble_turns_verification_into_exit_one() {
    let dir = scratch("tampered_root");
    let tree = build_five_key_tree(&dir);
    let proof = dir.join("proof.json");
    let out = cmt(&[
        "prove",
        "--tree",
        tree.to_str().unwrap(),
        "--key",
        &hex_key(18),
        "--out",
        proof.to_str().unwrap(),
    ]);
    assert_eq!(exit_code(&out), 0);

    let mut tampered = String::from("a");
    tampered.push_str(&FIVE_KEY_ROOT[1..]);
    assert_ne!(tampered, FIVE_KEY_ROOT);
    let out = cmt(&[
        "verify",
        "--proof",
        proof.to_str().unwrap(),
        "--key",
        &hex_key(18),
        "--root",
        &tampered,
    ]);
    assert_eq!(exit_code(&out), 1);
    assert_eq!(stdout_line(&out), "invalid");
}

#[test]
fn each_failure_class_gets_its_documented_exit_code() {
    let dir = scratch("exit_codes");
    let tree = build_five_key_tree(&dir);
    let tree = tree.to_str().unwrap();

    // 3: inserting a key that is already present.
    let out = cmt(&["insert", "--tree", tree, "--key", &hex_key(15)]);
    assert_eq!(exit_code(&out), 3);
    assert!(!out.stderr.is_empty(), "failures must carry a diagnostic");

    // 4: removing a key that is absent.
    let out = cmt(&["remove", "--tree", tree, "--key", &hex_key(999)]);
    assert_eq!(exit_code(&out), 4);

    // 2: malformed inputs of every kind.
    let keyfile = dir.join("keys.txt");
    let out = cmt(&["root", "--tree", keyfile.to_str().unwrap()]);
    assert_eq!(exit_code(&out), 2, "a key file is not a tree file");
    let out = cmt(&["insert", "--tree", tree, "--key", "zz"]);
    assert_eq!(exit_code(&out), 2, "bad hex");
    let out = cmt(&["insert", "--tree", tree, "--key", "abcd"]);
    assert_eq!(exit_code(&out), 2, "wrong key width");
    let out = cmt(&["verify", "--proof", keyfile.to_str().unwrap(), "--key", &hex_key(1), "--root", FIVE_KEY_ROOT]);
    assert_eq!(exit_code(&out), 2, "a key file is not a proof");
    let out = cmt(&["root", "--tree", dir.join("missing.bin").to_str().unwrap()]);
    assert_eq!(exit_code(&out), 2, "unreadable file");

    // The failed mutations must not have touched the tree file.
    let out = cmt(&["root", "--tree", tree]);
    assert_eq!(stdout_line(&out), FIVE_KEY_ROOT);
}

#[test]
fn key_files_reject_duplicates_with_a_line_diagnostic() {
    let dir = scratch("dup_keyfile");
    let path = dir.join("dup.txt");
    fs::write(&path, format!("{}\n{}\n", hex_key(7), hex_key(7))).unwrap();
    let out = cmt(&["build", path.to_str().unwrap(), "--out", dir.join("t.bin").to_str().unwrap()]);
    assert_eq!(exit_code(&out), 2);
    let diagnostic = String::from_utf8_lossy(&out.stderr).to_string();
    assert!(diagnostic.contains("line 2"), "diagnostic should name the line: {diagnostic}");
    assert!(diagnostic.contains("duplicate"), "diagnostic should name the problem");
}

#[test]
fn bench_csv_is_byte_identical_for_a_fixed_seed() {
    let dir = scratch("bench_csv");
    let first = dir.join("a.csv");
    let second = dir.join("b.csv");
    for path in [&first, &second] {
        let out = cmt(&[
            "bench",
            "--sizes",
            "50,100",
            "--seed",
            "9",
            "--out",
            path.to_str().unwrap(),
        ]);
        assert_eq!(exit_code(&out), 0);
        // The proof-size comparison rides on stdout when CSV goes to a file.
        assert!(stdout_line(&out).contains("proof sizes"));
    }
    let a = fs::read(&first).unwrap();
    assert_eq!(a, fs::read(&second).unwrap(), "same seed, same bytes");

    let text = String::from_utf8(a).unwrap();
    let mut lines = text.lines();
    assert_eq!(lines.next(), Some("structure,op,n,counter,min,avg,max,seed"));
    // 2 structures x 2 operations x 2 sizes x 5 counters.
    assert_eq!(lines.count(), 40);
}
