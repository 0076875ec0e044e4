//! End-to-end tests driving the compiled `ppsm` binary: the data-owner /
//! linkage-unit round trip, every designed error path with its exit code,
//! determinism, config-file handling, and secret hygiene.

use std::fs;
use std::path::PathBuf;
use std::process::{Command, Output};

const CHAIN_SECRET: &str = "e2e-chain-secret-77812";
const FIRST_SECRET: &str = "e2e-first-secret-90331";

struct Sandbox {
    dir: tempfile::TempDir,
}

impl Sandbox {
    fn new() -> Self {
        Sandbox { dir: tempfile::TempDir::new().expect("temp dir") }
    }

    fn path(&self, name: &str) -> PathBuf {
        self.dir.path().join(name)
    }

    fn write(&self, name: &str, content: &str) -> PathBuf {
        let path = self.path(name);
        fs::write(&path, content).expect("write fixture");
        path
    }

    /// Salt files most tests share.
    fn with_salts(self) -> Self {
        self.write("chain.salt", &format!("{CHAIN_SECRET}\n"));
        self.write("first.salt", &format!("{FIRST_SECRET}\n"));
        self
    }

    fn run_with_env(&self, args: &[&str], envs: &[(&str, &str)]) -> Output {
        let mut cmd = Command::new(env!("CARGO_BIN_EXE_ppsm"));
        cmd.args(args)
            .current_dir(self.dir.path())
            .env_remove("PPSM_SALT")
            .env_remove("PPSM_FIRST_SALT");
        for (key, value) in envs {
            cmd.env(key, value);
        }
        cmd.output().expect("run ppsm")
    }

    fn run(&self, args: &[&str]) -> Output {
        self.run_with_env(args, &[])
    }

    /// Runs and asserts success, returning stdout.
    fn ok(&self, args: &[&str]) -> String {
        let out = self.run(args);
        assert_eq!(
            code(&out),
            0,
            "expected success for {args:?}\nstderr: {}",
            text(&out.stderr)
        );
        text(&out.stdout)
    }
}

fn code(out: &Output) -> i32 {
    out.status.code().expect("exit code")
}

fn text(bytes: &[u8]) -> String {
    String::from_utf8_lossy(bytes).into_owned()
}

fn assert_no_secret(out: &Output, context: &str) {
    for stream in [&out.stdout, &out.stderr] {
        let s = text(stream);
        assert!(
            !s.contains(CHAIN_SECRET) && !s.contains(FIRST_SECRET),
            "{context}: output echoes a secret:\n{s}"
        );
    }
}

const WORKED_A: &str = "#alphabet=0123456789\nrecord_id,value\nA,83321\n";
const WORKED_B: &str = "#alphabet=0123456789\nrecord_id,value\nB,33327\n";

#[test]
fn encode_match_round_trip_reports_the_worked_pair() {
    let sb = Sandbox::new().with_salts();
    sb.write("a.csv", WORKED_A);
    sb.write("b.csv", WORKED_B);

    let enc_a = sb.run(&[
        "encode", "a.csv", "--out", "a.edb", "--salt-file", "chain.salt", "--min-len", "3",
    ]);
    assert_eq!(code(&enc_a), 0, "stderr: {}", text(&enc_a.stderr));
    assert_no_secret(&enc_a, "encode");
    let enc_b = sb.run(&[
        "encode", "b.csv", "--out", "b.edb", "--salt-file", "chain.salt", "--min-len", "3",
    ]);
    assert_eq!(code(&enc_b), 0);

    let matched = sb.run(&["match", "a.edb", "b.edb", "--min-len", "3"]);
    assert_eq!(code(&matched), 0, "stderr: {}", text(&matched.stderr));
    assert_no_secret(&matched, "match");
    let stdout = text(&matched.stdout);
    let lines: Vec<&str> = stdout.lines().collect();
    assert_eq!(
        lines,
        vec![
            "id_a,id_b,lcs_length,pos_a,pos_b,sim,common_prefix_len,common_suffix_len,has_common_middle",
            "A,B,3,2,2,0.600000,0,0,true",
        ],
    );
}

#[test]
fn mismatched_headers_exit_2_with_a_parameter_diff() {
    let sb = Sandbox::new().with_salts();
    sb.write("a.csv", WORKED_A);
    sb.write("b.csv", WORKED_B);
    sb.ok(&["encode", "a.csv", "--out", "a.edb", "--salt-file", "chain.salt", "--min-len", "3"]);
    sb.ok(&[
        "encode",
        "b.csv",
        "--out",
        "b.edb",
        "--salt-file",
        "chain.salt",
        "--min-len",
        "3",
        "--first-char-k",
        "3",
        "--first-salt-file",
        "first.salt",
    ]);

    let matched = sb.run(&["match", "a.edb", "b.edb", "--min-len", "3"]);
    assert_eq!(code(&matched), 2);
    let stderr = text(&matched.stderr);
    assert!(
        stderr.contains("disagree") && stderr.contains("first_char"),
        "stderr should name the disagreeing parameter: {stderr}"
    );

    // A minimum below the encoded suffix length is also a parameter error.
    let below = sb.run(&["match", "a.edb", "a.edb", "--min-len", "2"]);
    assert_eq!(code(&below), 2);
}

#[test]
fn gen_is_deterministic_and_well_formed() {
    let sb = Sandbox::new();
    for out in ["p1.csv", "p2.csv"] {
        sb.ok(&[
            "gen", "pairs", "--count", "12", "--min-length", "6", "--max-length", "10",
            "--max-edits", "3", "--seed", "7", "--out", out,
        ]);
    }
    let p1 = fs::read(sb.path("p1.csv")).unwrap();
    let p2 = fs::read(sb.path("p2.csv")).unwrap();
    assert_eq!(p1, p2, "same seed must reproduce the same pair file");
    let body = String::from_utf8(p1).unwrap();
    let mut lines = body.lines();
    assert_eq!(lines.next(), Some("#alphabet=0123456789"));
    assert_eq!(lines.next(), Some("pair_id,s1,s2"));
    assert_eq!(lines.count(), 12);

    for out in ["v1.csv", "v2.csv"] {
        sb.ok(&["gen", "benford", "--count", "9", "--length", "5", "--seed", "3", "--out", out]);
    }
    let v1 = fs::read(sb.path("v1.csv")).unwrap();
    assert_eq!(v1, fs::read(sb.path("v2.csv")).unwrap());
    let body = String::from_utf8(v1).unwrap();
    assert!(body.starts_with("#alphabet=0123456789\nrecord_id,value\n"));
    assert_eq!(body.lines().count(), 2 + 9);
}

#[test]
fn config_file_supplies_defaults_and_explicit_flags_win() {
    let sb = Sandbox::new().with_salts();
    sb.write("a.csv", WORKED_A);
    sb.write("b.csv", WORKED_B);
    // `sentinel` belongs to `match` only: encode must ignore it, match
    // must pick it up. Underscore and hyphen spellings both work.
    sb.write("pipe.toml", "min-len = 3\nsalt_file = \"chain.salt\"\nsentinel = 2000\n");

    sb.ok(&["encode", "a.csv", "--out", "flags.edb", "--salt-file", "chain.salt", "--min-len", "3"]);
    sb.ok(&["encode", "a.csv", "--out", "config.edb", "--config", "pipe.toml"]);
    assert_eq!(
        fs::read(sb.path("flags.edb")).unwrap(),
        fs::read(sb.path("config.edb")).unwrap(),
        "config-supplied flags must encode identically to explicit flags"
    );

    // An explicit flag beats the config value: m=2 differs from m=3.
    sb.ok(&["encode", "a.csv", "--out", "override.edb", "--config", "pipe.toml", "--min-len", "2"]);
    assert_ne!(
        fs::read(sb.path("override.edb")).unwrap(),
        fs::read(sb.path("config.edb")).unwrap(),
    );

    sb.ok(&["encode", "b.csv", "--out", "b.edb", "--config", "pipe.toml"]);
    let matched = sb.ok(&["match", "config.edb", "b.edb", "--config", "pipe.toml"]);
    assert!(matched.contains("A,B,3"), "match should run with config defaults: {matched}");

    let bad = sb.run(&["encode", "a.csv", "--out", "z.edb", "--config", "bad.toml"]);
    assert_eq!(code(&bad), 1, "missing config file is a usage error");
    sb.write("bad.toml", "no_such_flag = 1\n");
    let bad = sb.run(&["encode", "a.csv", "--out", "z.edb", "--config", "bad.toml"]);
    assert_eq!(code(&bad), 1);
    assert!(text(&bad.stderr).contains("no_such_flag"));
}

#[test]
fn secrets_come_from_files_or_env_and_are_never_echoed() {
    let sb = Sandbox::new().with_salts();
    sb.write("a.csv", WORKED_A);

    let missing = sb.run(&["encode", "a.csv", "--out", "x.edb"]);
    assert_eq!(code(&missing), 1);
    let stderr = text(&missing.stderr);
    assert!(
        stderr.contains("--salt-file") && stderr.contains("PPSM_SALT"),
        "the error should point at both secret channels: {stderr}"
    );

    sb.ok(&["encode", "a.csv", "--out", "file.edb", "--salt-file", "chain.salt"]);
    let via_env = sb.run_with_env(
        &["encode", "a.csv", "--out", "env.edb"],
        &[("PPSM_SALT", CHAIN_SECRET)],
    );
    assert_eq!(code(&via_env), 0);
    assert_no_secret(&via_env, "encode via env");
    assert_eq!(
        fs::read(sb.path("file.edb")).unwrap(),
        fs::read(sb.path("env.edb")).unwrap(),
        "file and environment salts must encode identically"
    );

    // The serialized database must not contain either secret.
    let db = fs::read(sb.path("file.edb")).unwrap();
    for secret in [CHAIN_SECRET, FIRST_SECRET] {
        let needle = secret.as_bytes();
        assert!(
            !db.windows(needle.len()).any(|w| w == needle),
            "encoded database leaks a secret"
        );
    }
}

#[test]
fn eval_scatter_suffix_rows_sit_on_the_diagonal() {
    let sb = Sandbox::new().with_salts();
    sb.ok(&[
        "gen", "pairs", "--count", "25", "--min-length", "8", "--max-edits", "4", "--seed", "21",
        "--out", "pairs.csv",
    ]);
    let stdout = sb.ok(&[
        "eval-scatter", "pairs.csv", "--method", "suffix_basic", "--salt-file", "chain.salt",
    ]);
    let lines: Vec<&str> = stdout.lines().collect();
    assert_eq!(lines[0], "pair_id,plain_sim,encoded_sim");
    assert_eq!(lines.len(), 26);
    for line in &lines[1..] {
        let cells: Vec<&str> = line.split(',').collect();
        assert_eq!(cells.len(), 3);
        assert_eq!(cells[1], cells[2], "suffix similarity must survive encoding: {line}");
    }

    let bad = sb.run(&["eval-scatter", "pairs.csv", "--method", "nope"]);
    assert_eq!(code(&bad), 1);
}

#[test]
fn eval_freq_writes_histograms_and_chi2_summaries() {
    let sb = Sandbox::new().with_salts();
    sb.ok(&["gen", "benford", "--count", "200", "--length", "6", "--seed", "5", "--out", "v.csv"]);
    sb.ok(&[
        "eval-freq", "v.csv", "--ks", "2,3", "--salt-file", "chain.salt", "--first-salt-file",
        "first.salt", "--out", "hist.csv", "--chi2-out", "chi2.csv",
    ]);

    let hist = fs::read_to_string(sb.path("hist.csv")).unwrap();
    let lines: Vec<&str> = hist.lines().collect();
    assert_eq!(lines[0], "series,bin,count");
    // one header + 10 plain bins + 10 bins per prefix length
    assert_eq!(lines.len(), 1 + 10 + 2 * 10);
    assert_eq!(lines.iter().filter(|l| l.starts_with("plain,")).count(), 10);
    assert_eq!(lines.iter().filter(|l| l.starts_with("k=2,")).count(), 10);
    assert_eq!(lines.iter().filter(|l| l.starts_with("k=3,")).count(), 10);

    let chi2 = fs::read_to_string(sb.path("chi2.csv")).unwrap();
    let lines: Vec<&str> = chi2.lines().collect();
    assert_eq!(lines[0], "series,chi2_to_uniform");
    assert_eq!(lines.len(), 4);

    let bad = sb.run(&[
        "eval-freq", "v.csv", "--ks", "1", "--salt-file", "chain.salt", "--first-salt-file",
        "first.salt",
    ]);
    assert_eq!(code(&bad), 1, "prefix length 1 is below the minimum");
}

#[test]
fn attack_scores_basic_encodings_against_truth() {
    let sb = Sandbox::new().with_salts();
    sb.ok(&["gen", "benford", "--count", "300", "--length", "6", "--seed", "9", "--out", "v.csv"]);
    sb.ok(&["encode", "v.csv", "--out", "v.edb", "--salt-file", "chain.salt"]);
    let stdout = sb.ok(&[
        "attack", "v.edb", "--reference", "v.csv", "--truth", "v.csv", "--out", "guesses.csv",
    ]);
    let accuracy_line = stdout
        .lines()
        .find(|l| l.starts_with("top-1 accuracy:"))
        .expect("accuracy line");
    let accuracy: f64 = accuracy_line
        .trim_start_matches("top-1 accuracy:")
        .trim()
        .parse()
        .expect("accuracy value");
    assert!(
        accuracy > 0.5,
        "the frequency attack should crack unhardened encodings: {accuracy}"
    );

    let guesses = fs::read_to_string(sb.path("guesses.csv")).unwrap();
    assert!(guesses.starts_with("rank,first_position_encoding,guessed_char\n"));
    assert!(guesses.lines().count() > 1);
}

#[test]
fn bench_emits_one_row_per_method() {
    let sb = Sandbox::new().with_salts();
    sb.ok(&[
        "gen", "pairs", "--count", "8", "--min-length", "6", "--max-edits", "2", "--seed", "2",
        "--out", "pairs.csv",
    ]);
    let stdout = sb.ok(&[
        "bench", "pairs.csv", "--reps", "3", "--salt-file", "chain.salt", "--first-salt-file",
        "first.salt", "--seed", "4",
    ]);
    let lines: Vec<&str> = stdout.lines().collect();
    assert_eq!(lines[0], "method,encode_ns_per_string,match_ns_per_pair,repetitions,machine");
    assert_eq!(lines.len(), 5);
    for method in ["suffix_basic", "suffix_firstchar", "bloom", "tabhash"] {
        assert!(
            lines.iter().any(|l| l.starts_with(&format!("{method},"))),
            "missing timing row for {method}"
        );
    }

    let too_few = sb.run(&["bench", "pairs.csv", "--reps", "2", "--salt-file", "chain.salt"]);
    assert_eq!(code(&too_few), 1);
}

#[test]
fn match_output_is_worker_count_independent() {
    let sb = Sandbox::new().with_salts();
    let mut a = String::from("#alphabet=0123456789\nrecord_id,value\n");
    let mut b = String::from("#alphabet=0123456789\nrecord_id,value\n");
    for i in 0..8 {
        a.push_str(&format!("a{i},9912{i}8834\n"));
        b.push_str(&format!("b{i},3{i}128857\n"));
    }
    sb.write("a.csv", &a);
    sb.write("b.csv", &b);
    sb.ok(&["encode", "a.csv", "--out", "a.edb", "--salt-file", "chain.salt"]);
    sb.ok(&["encode", "b.csv", "--out", "b.edb", "--salt-file", "chain.salt"]);

    let baseline = sb.ok(&["match", "a.edb", "b.edb", "--min-len", "3"]);
    assert!(baseline.lines().count() > 1, "fixture should produce matches");
    for workers in ["1", "3"] {
        let got = sb.ok(&["match", "a.edb", "b.edb", "--min-len", "3", "--workers", workers]);
        assert_eq!(got, baseline, "output changed with --workers {workers}");
    }
}

#[test]
fn malformed_and_unencodable_inputs_exit_3() {
    let sb = Sandbox::new().with_salts();
    sb.write("junk.edb", "this is not an encoded database");
    sb.write("a.csv", WORKED_A);
    sb.ok(&["encode", "a.csv", "--out", "a.edb", "--salt-file", "chain.salt"]);

    let bad_magic = sb.run(&["match", "junk.edb", "a.edb"]);
    assert_eq!(code(&bad_magic), 3);

    let valid = fs::read(sb.path("a.edb")).unwrap();
    fs::write(sb.path("cut.edb"), &valid[..valid.len() - 3]).unwrap();
    let truncated = sb.run(&["match", "cut.edb", "a.edb"]);
    assert_eq!(code(&truncated), 3);

    let dup = "#alphabet=0123456789\nrecord_id,value\nX,123456\nX,654321\n";
    sb.write("dup.csv", dup);
    let duplicate = sb.run(&["encode", "dup.csv", "--out", "dup.edb", "--salt-file", "chain.salt"]);
    assert_eq!(code(&duplicate), 3, "duplicate record ids are unencodable input");
    assert!(!sb.path("dup.edb").exists(), "a failed encode must not leave an output file");

    let outside = "#alphabet=01\nrecord_id,value\nY,012a\n";
    sb.write("outside.csv", outside);
    let outside = sb.run(&["encode", "outside.csv", "--out", "o.edb", "--salt-file", "chain.salt"]);
    assert_eq!(code(&outside), 3, "rows outside the declared alphabet are malformed");
}

#[test]
fn usage_errors_exit_1() {
    let sb = Sandbox::new().with_salts();
    sb.write("a.csv", WORKED_A);

    let unknown_flag = sb.run(&["match", "a.edb", "b.edb", "--no-such-flag"]);
    assert_eq!(code(&unknown_flag), 1);

    let unknown_subcommand = sb.run(&["frobnicate"]);
    assert_eq!(code(&unknown_subcommand), 1);

    let missing_out = sb.run(&["encode", "a.csv", "--salt-file", "chain.salt"]);
    assert_eq!(code(&missing_out), 1);

    let modulus_without_k = sb.run(&[
        "encode", "a.csv", "--out", "x.edb", "--salt-file", "chain.salt", "--modulus", "10",
    ]);
    assert_eq!(code(&modulus_without_k), 1);

    let bad_threshold = sb.run(&["match", "a.edb", "a.edb", "--threshold", "1.5"]);
    assert_eq!(code(&bad_threshold), 1);

    let bad_alphabet = sb.run(&[
        "gen", "pairs", "--count", "1", "--min-length", "4", "--alphabet", "",
    ]);
    assert_eq!(code(&bad_alphabet), 1);
}
