//! CLI behavior: exit codes, output formats, configuration precedence,
//! environment handling and the documented end-to-end workflow.

mod common;

use std::path::Path;

use seldiac::ambig::AmbigDict;

fn p(dir: &Path, name: &str) -> String {
    dir.join(name).display().to_string()
}

/// A small diacritized corpus with two planted homograph groups.
const RAW: &str = "katab Alwalad bEd yawm\n\
                   kutib Alktab fiy bayt\n\
                   katab qalam bEd madrsa\n\
                   kutib bayt fiy yawm\n\
                   katab Alwalad qalam bayt\n\
                   kutib madrsa bEd Alktab\n";

fn write_raw(dir: &Path) -> String {
    let path = p(dir, "raw.txt");
    common::write_file(dir.join("raw.txt").as_path(), RAW);
    path
}

// ------------------------------------------------------------ exit codes

#[test]
fn help_and_version_exit_zero() {
    let out = common::run(&["--help"]);
    assert_eq!(out.code, 0);
    assert!(out.stdout.contains("clean"), "help lists subcommands");
    assert_eq!(common::run(&["--version"]).code, 0);
}

#[test]
fn missing_required_flag_is_a_usage_error() {
    let out = common::run(&["clean"]);
    assert_eq!(out.code, 1, "stderr: {}", out.stderr);
}

#[test]
fn unknown_subcommand_is_a_usage_error() {
    assert_eq!(common::run(&["frobnicate"]).code, 1);
}

#[test]
fn bad_scheme_value_is_a_usage_error() {
    let dir = tempfile::tempdir().unwrap();
    let raw = write_raw(dir.path());
    let out = common::run(&[
        "embed",
        "--in",
        &raw,
        "--scheme",
        "sideways",
        "--out",
        &p(dir.path(), "e.tsv"),
        "--seed",
        "1",
    ]);
    assert_eq!(out.code, 1);
    assert!(out.stderr.contains("--scheme"), "stderr: {}", out.stderr);
}

#[test]
fn missing_input_file_is_a_data_error() {
    let dir = tempfile::tempdir().unwrap();
    let out = common::run(&[
        "clean",
        "--in",
        &p(dir.path(), "nonexistent.txt"),
        "--out",
        &p(dir.path(), "out.txt"),
    ]);
    assert_eq!(out.code, 2, "stderr: {}", out.stderr);
}

#[test]
fn malformed_dictionary_is_a_data_error() {
    let dir = tempfile::tempdir().unwrap();
    common::write_file(&dir.path().join("bad.tsv"), "no header here\n");
    let out = common::run(&["stats", &p(dir.path(), "bad.tsv")]);
    assert_eq!(out.code, 2, "stderr: {}", out.stderr);
}

#[test]
fn cw_clustering_rejects_k() {
    let dir = tempfile::tempdir().unwrap();
    let out = common::run(&[
        "cluster",
        "--algo",
        "cw",
        "--embeddings",
        &p(dir.path(), "e.tsv"),
        "--scheme",
        "none",
        "--word",
        "x",
        "--k",
        "3",
        "--out",
        &p(dir.path(), "c.tsv"),
        "--seed",
        "1",
    ]);
    assert_eq!(out.code, 1, "stderr: {}", out.stderr);
    assert!(out.stderr.contains("--k"), "stderr: {}", out.stderr);
}

// -------------------------------------------------- seeds and determinism

#[test]
fn deterministic_mode_requires_an_explicit_seed() {
    let dir = tempfile::tempdir().unwrap();
    let raw = write_raw(dir.path());
    let out = common::run(&[
        "embed",
        "--in",
        &raw,
        "--scheme",
        "none",
        "--out",
        &p(dir.path(), "e.tsv"),
        "--deterministic",
    ]);
    assert_eq!(out.code, 1);
    assert!(out.stderr.contains("--seed"), "stderr: {}", out.stderr);
}

#[test]
fn unseeded_randomized_stage_echoes_its_drawn_seed() {
    let dir = tempfile::tempdir().unwrap();
    let raw = write_raw(dir.path());
    let out = common::run(&[
        "embed",
        "--in",
        &raw,
        "--scheme",
        "none",
        "--out",
        &p(dir.path(), "e.tsv"),
        "--dim",
        "4",
        "--epochs",
        "1",
        "--min-count",
        "1",
    ]);
    assert_eq!(out.code, 0, "stderr: {}", out.stderr);
    assert!(
        out.stderr.lines().any(|l| l.starts_with("seed=")),
        "stderr must echo the drawn seed: {}",
        out.stderr
    );
}

#[test]
fn config_seed_satisfies_deterministic_mode() {
    let dir = tempfile::tempdir().unwrap();
    let raw = write_raw(dir.path());
    common::write_file(&dir.path().join("cfg.toml"), "seed = 9\n");
    let out = common::run(&[
        "--config",
        &p(dir.path(), "cfg.toml"),
        "--deterministic",
        "embed",
        "--in",
        &raw,
        "--scheme",
        "none",
        "--out",
        &p(dir.path(), "e.tsv"),
        "--dim",
        "4",
        "--epochs",
        "1",
        "--min-count",
        "1",
    ]);
    assert_eq!(out.code, 0, "stderr: {}", out.stderr);
    let meta = common::read_file(&dir.path().join("e.tsv.meta"));
    assert!(meta.contains("seed=9\n"), "meta: {meta}");
}

// ------------------------------------------------ config and environment

#[test]
fn flag_beats_config_beats_default() {
    let dir = tempfile::tempdir().unwrap();
    let raw = write_raw(dir.path());
    common::write_file(&dir.path().join("cfg.toml"), "dim = 6\nepochs = 1\nmin_count = 1\n");

    // config value wins over the built-in default
    common::run(&[
        "--config",
        &p(dir.path(), "cfg.toml"),
        "embed",
        "--in",
        &raw,
        "--scheme",
        "none",
        "--out",
        &p(dir.path(), "a.tsv"),
        "--seed",
        "1",
    ])
    .assert_ok();
    let meta = common::read_file(&dir.path().join("a.tsv.meta"));
    assert!(meta.contains("dim=6\n"), "meta: {meta}");

    // explicit flag wins over the config
    common::run(&[
        "--config",
        &p(dir.path(), "cfg.toml"),
        "embed",
        "--in",
        &raw,
        "--scheme",
        "none",
        "--out",
        &p(dir.path(), "b.tsv"),
        "--dim",
        "8",
        "--seed",
        "1",
    ])
    .assert_ok();
    let meta = common::read_file(&dir.path().join("b.tsv.meta"));
    assert!(meta.contains("dim=8\n"), "meta: {meta}");
}

#[test]
fn unknown_config_key_is_rejected() {
    let dir = tempfile::tempdir().unwrap();
    let raw = write_raw(dir.path());
    common::write_file(&dir.path().join("cfg.toml"), "dimension = 6\n");
    let out = common::run(&[
        "--config",
        &p(dir.path(), "cfg.toml"),
        "embed",
        "--in",
        &raw,
        "--scheme",
        "none",
        "--out",
        &p(dir.path(), "e.tsv"),
        "--seed",
        "1",
    ]);
    assert_eq!(out.code, 1, "stderr: {}", out.stderr);
}

#[test]
fn threads_env_is_read_and_validated() {
    let dir = tempfile::tempdir().unwrap();
    let raw = write_raw(dir.path());
    // a garbage value is a usage error…
    let out = common::run_with_env(
        &[
            "embed",
            "--in",
            &raw,
            "--scheme",
            "none",
            "--out",
            &p(dir.path(), "e.tsv"),
            "--dim",
            "4",
            "--epochs",
            "1",
            "--min-count",
            "1",
            "--seed",
            "1",
        ],
        &[("SELDIAC_THREADS", "many")],
    );
    assert_eq!(out.code, 1, "stderr: {}", out.stderr);
    assert!(out.stderr.contains("SELDIAC_THREADS"), "stderr: {}", out.stderr);

    // …a sane value is picked up…
    let out = common::run_with_env(
        &[
            "embed",
            "--in",
            &raw,
            "--scheme",
            "none",
            "--out",
            &p(dir.path(), "e.tsv"),
            "--dim",
            "4",
            "--epochs",
            "1",
            "--min-count",
            "1",
            "--seed",
            "1",
        ],
        &[("SELDIAC_THREADS", "2")],
    );
    assert_eq!(out.code, 0, "stderr: {}", out.stderr);
    let meta = common::read_file(&dir.path().join("e.tsv.meta"));
    assert!(meta.contains("threads=2\n"), "meta: {meta}");

    // …and deterministic mode overrides it with a single thread.
    let out = common::run_with_env(
        &[
            "embed",
            "--in",
            &raw,
            "--scheme",
            "none",
            "--out",
            &p(dir.path(), "d.tsv"),
            "--dim",
            "4",
            "--epochs",
            "1",
            "--min-count",
            "1",
            "--seed",
            "1",
            "--deterministic",
        ],
        &[("SELDIAC_THREADS", "many")],
    );
    assert_eq!(out.code, 0, "stderr: {}", out.stderr);
    let meta = common::read_file(&dir.path().join("d.tsv.meta"));
    assert!(meta.contains("threads=1\n"), "meta: {meta}");
}

// -------------------------------------------------- formats and sidecars

#[test]
fn meta_sidecar_lists_stage_first_then_sorted_settings() {
    let dir = tempfile::tempdir().unwrap();
    let raw = write_raw(dir.path());
    common::run(&["clean", "--in", &raw, "--out", &p(dir.path(), "full.txt"), "--buckwalter"])
        .assert_ok();
    let meta = common::read_file(&dir.path().join("full.txt.meta"));
    let lines: Vec<&str> = meta.lines().collect();
    assert!(lines[0].starts_with("stage="), "meta: {meta}");
    let keys: Vec<&str> = lines[1..]
        .iter()
        .map(|l| l.split_once('=').expect("key=value").0)
        .collect();
    let mut sorted = keys.clone();
    sorted.sort_unstable();
    assert_eq!(keys, sorted, "meta settings must be sorted: {meta}");
}

#[test]
fn stats_prints_one_machine_line() {
    let dir = tempfile::tempdir().unwrap();
    common::write_file(
        &dir.path().join("lex.tsv"),
        "ktb\tkatab|kutib\nqlm\tqalam\n",
    );
    common::run(&[
        "build-dict",
        "--method",
        "multi",
        "--lexicon",
        &p(dir.path(), "lex.tsv"),
        "--out",
        &p(dir.path(), "d.tsv"),
    ])
    .assert_ok();
    let out = common::run(&["stats", &p(dir.path(), "d.tsv")]);
    out.assert_ok();
    let fields: Vec<&str> = out.stdout.trim_end().split('\t').collect();
    assert_eq!(fields.len(), 3, "stdout: {}", out.stdout);
    assert_eq!(fields[0], "MULTI");
    assert_eq!(fields[1], "2");
    assert_eq!(fields[2], "50.00");
}

#[test]
fn bootstrap_prints_a_p_value_line() {
    let dir = tempfile::tempdir().unwrap();
    common::write_file(&dir.path().join("a.scores"), "0.9\n0.8\n0.7\n0.95\n");
    common::write_file(&dir.path().join("b.scores"), "0.1\n0.2\n0.15\n0.3\n");
    let out = common::run(&[
        "bootstrap",
        &p(dir.path(), "a.scores"),
        &p(dir.path(), "b.scores"),
        "--resamples",
        "500",
        "--seed",
        "3",
    ]);
    out.assert_ok();
    let line = out.stdout.trim_end();
    let (name, value) = line.split_once('\t').expect("p\\t<value>");
    assert_eq!(name, "p");
    let parsed: f64 = value.parse().expect("numeric p-value");
    assert!((0.0..=1.0).contains(&parsed));
}

#[test]
fn apply_without_out_streams_to_stdout() {
    let dir = tempfile::tempdir().unwrap();
    common::write_file(&dir.path().join("fullcm.txt"), "katab yawom\n");
    common::write_file(
        &dir.path().join("d.tsv"),
        "#keying=UNDIAC method=MULTI params=\nktb\tA\nywm\tU\n",
    );
    let out = common::run(&[
        "apply",
        "--dict",
        &p(dir.path(), "d.tsv"),
        "--in",
        &p(dir.path(), "fullcm.txt"),
    ]);
    out.assert_ok();
    assert_eq!(out.stdout, "katab ywm\n");
}

// --------------------------------------------------- documented workflow

#[test]
fn end_to_end_workflow_matches_its_documentation() {
    let dir = tempfile::tempdir().unwrap();
    let raw = write_raw(dir.path());

    common::run(&["clean", "--in", &raw, "--out", &p(dir.path(), "full.txt"), "--buckwalter"])
        .assert_ok();
    common::run(&[
        "views",
        "--in",
        &p(dir.path(), "full.txt"),
        "--none",
        &p(dir.path(), "none.txt"),
        "--fullcm",
        &p(dir.path(), "fullcm.txt"),
    ])
    .assert_ok();
    common::write_file(
        &dir.path().join("lex.tsv"),
        "ktb\tkatab|kutib\nbEd\tbaEoda|baEod\nywm\tyawm\n",
    );
    common::run(&[
        "build-dict",
        "--method",
        "multi",
        "--lexicon",
        &p(dir.path(), "lex.tsv"),
        "--out",
        &p(dir.path(), "d.tsv"),
    ])
    .assert_ok();
    common::run(&[
        "apply",
        "--dict",
        &p(dir.path(), "d.tsv"),
        "--in",
        &p(dir.path(), "fullcm.txt"),
        "--out",
        &p(dir.path(), "sel.txt"),
    ])
    .assert_ok();

    // Ambiguous spellings keep their marks, everything else is stripped.
    let sel = common::read_file(&dir.path().join("sel.txt"));
    for line in sel.lines() {
        for token in line.split(' ') {
            let has_marks = token
                .chars()
                .any(|c| "aiuoFNK~`".contains(c));
            let is_planted_homograph = token.starts_with("katab")
                || token.starts_with("kutib")
                || token.starts_with("baEod");
            if has_marks {
                assert!(
                    is_planted_homograph,
                    "unexpected marked token {token:?} in {line:?}"
                );
            }
        }
    }

    // Applying a dictionary that marks every surface form ambiguous must
    // reproduce the input byte for byte.
    let fullcm_text = common::read_file(&dir.path().join("fullcm.txt"));
    let mut all = String::from("#keying=DIAC method=TR params=\n");
    let mut types: Vec<&str> = fullcm_text.split_whitespace().collect();
    types.sort_unstable();
    types.dedup();
    for t in types {
        all.push_str(t);
        all.push_str("\tA\n");
    }
    common::write_file(&dir.path().join("all.tsv"), &all);
    common::run(&[
        "apply",
        "--dict",
        &p(dir.path(), "all.tsv"),
        "--in",
        &p(dir.path(), "fullcm.txt"),
        "--out",
        &p(dir.path(), "same.txt"),
    ])
    .assert_ok();
    assert_eq!(common::read_file(&dir.path().join("same.txt")), fullcm_text);

    // The dictionary file itself round-trips through the library loader.
    let dict = AmbigDict::load(&dir.path().join("d.tsv")).expect("dictionary parses");
    assert!(dict.is_ambiguous("ktb"));
    assert!(!dict.is_ambiguous("ywm"));
}
