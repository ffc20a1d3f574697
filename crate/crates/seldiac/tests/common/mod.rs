//! Shared fixtures for the integration suites: synthetic corpora with
//! planted homographs, random dictionaries, and a runner for the compiled
//! `seldiac` binary.

#![allow(dead_code)]

use std::collections::BTreeSet;
use std::path::Path;
use std::process::Command;

use rand::prelude::*;
use rand_chacha::ChaCha8Rng;

use seldiac::ambig::{AmbigDict, Keying, Label, Method};
use seldiac::corpus::{Corpus, Scheme};
use seldiac::textcore::{strip_diacritics, to_full_cm, DiacriticSet};

pub const CONSONANTS: &[char] = &[
    'b', 't', 'j', 'H', 'd', 'r', 'z', 's', 'S', 'T', 'E', 'f', 'q', 'k', 'l', 'm', 'n', 'h',
    'w', 'y',
];
pub const SHORT_VOWELS: &[char] = &['a', 'i', 'u', 'o'];

/// Path of the compiled CLI binary.
pub fn bin() -> &'static str {
    env!("CARGO_BIN_EXE_seldiac")
}

pub struct CmdOutput {
    pub code: i32,
    pub stdout: String,
    pub stderr: String,
}

impl CmdOutput {
    pub fn assert_ok(&self) -> &Self {
        assert_eq!(
            self.code, 0,
            "command failed\nstdout:\n{}\nstderr:\n{}",
            self.stdout, self.stderr
        );
        self
    }
}

/// Runs the binary with `args`, inheriting nothing that could perturb it.
pub fn run(args: &[&str]) -> CmdOutput {
    run_with_env(args, &[])
}

pub fn run_with_env(args: &[&str], envs: &[(&str, &str)]) -> CmdOutput {
    let mut cmd = Command::new(bin());
    cmd.args(args).env_remove("SELDIAC_THREADS");
    for (k, v) in envs {
        cmd.env(k, v);
    }
    let out = cmd.output().expect("spawn seldiac binary");
    CmdOutput {
        code: out.status.code().unwrap_or(-1),
        stdout: String::from_utf8_lossy(&out.stdout).into_owned(),
        stderr: String::from_utf8_lossy(&out.stderr).into_owned(),
    }
}

pub fn write_file(path: &Path, contents: &str) {
    std::fs::write(path, contents).expect("write fixture file");
}

pub fn read_file(path: &Path) -> String {
    std::fs::read_to_string(path)
        .unwrap_or_else(|e| panic!("read {}: {e}", path.display()))
}

/// Serializes a corpus exactly as `to_path` would.
pub fn corpus_bytes(c: &Corpus) -> Vec<u8> {
    let mut buf = Vec::new();
    c.write_to(&mut buf).expect("write corpus to memory");
    buf
}

/// A random consonant skeleton of `len` letters.
pub fn random_skeleton(rng: &mut impl Rng, len: usize) -> String {
    (0..len).map(|_| *CONSONANTS.choose(rng).unwrap()).collect()
}

/// Dresses a skeleton with random short vowels (and the odd shadda), then
/// normalizes away word-final case/mood marks so the result is stable under
/// `to_full_cm`.
pub fn dress_skeleton(rng: &mut impl Rng, skeleton: &str, d: &DiacriticSet) -> String {
    let mut word = String::new();
    for c in skeleton.chars() {
        word.push(c);
        if rng.gen_bool(0.08) {
            word.push('~');
        }
        if rng.gen_bool(0.55) {
            word.push(*SHORT_VOWELS.choose(rng).unwrap());
        }
    }
    to_full_cm(&word, d)
}

/// A vocabulary with `groups` planted homograph groups (two or three
/// distinct diacritizations of one skeleton) and `singles` one-variant
/// words. All surface forms are FULL-CM-stable and skeletons are unique
/// across the whole vocabulary.
pub fn synthetic_vocabulary(
    rng: &mut ChaCha8Rng,
    groups: usize,
    singles: usize,
    d: &DiacriticSet,
) -> Vec<String> {
    let mut skeletons = BTreeSet::new();
    while skeletons.len() < groups + singles {
        let len = rng.gen_range(2..=5);
        skeletons.insert(random_skeleton(rng, len));
    }
    let skeletons: Vec<String> = skeletons.into_iter().collect();
    let mut vocab = Vec::new();
    for (i, skeleton) in skeletons.iter().enumerate() {
        if i < groups {
            let want = rng.gen_range(2..=3);
            let mut variants = BTreeSet::new();
            for _ in 0..40 {
                variants.insert(dress_skeleton(rng, skeleton, d));
                if variants.len() == want {
                    break;
                }
            }
            vocab.extend(variants);
        } else {
            vocab.push(dress_skeleton(rng, skeleton, d));
        }
    }
    vocab
}

/// A synthetic FULL-CM corpus: `sentences` lines of 4–12 tokens drawn from
/// a skewed distribution over a planted-homograph vocabulary, with the odd
/// unified token mixed in.
pub fn synthetic_fullcm(sentences: usize, seed: u64) -> Corpus {
    let d = DiacriticSet::default();
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let vocab = synthetic_vocabulary(&mut rng, 40, 160, &d);
    let mut lines = Vec::with_capacity(sentences);
    for _ in 0..sentences {
        let len = rng.gen_range(4..=12);
        let mut sent = Vec::with_capacity(len);
        for _ in 0..len {
            if rng.gen_bool(0.02) {
                sent.push(["<NUM>", "<PUNC>", "<URL>"].choose(&mut rng).unwrap().to_string());
            } else {
                let u: f64 = rng.gen();
                let idx = ((u * u) * vocab.len() as f64) as usize;
                sent.push(vocab[idx.min(vocab.len() - 1)].clone());
            }
        }
        lines.push(sent);
    }
    Corpus::new(lines, Scheme::FullCm)
}

/// A random dictionary over the types of `fullcm`: each key is included
/// with probability one half and labeled ambiguous with probability one
/// half. `keying` decides whether keys are surface forms or stripped forms.
pub fn random_dict(fullcm: &Corpus, keying: Keying, seed: u64) -> AmbigDict {
    let d = DiacriticSet::default();
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let method = match keying {
        Keying::Undiac => Method::Multi,
        Keying::Diac => Method::Tr,
    };
    let mut dict = AmbigDict::new(keying, method);
    let mut keys = BTreeSet::new();
    for sentence in &fullcm.sentences {
        for token in sentence {
            match keying {
                Keying::Undiac => keys.insert(strip_diacritics(token, &d)),
                Keying::Diac => keys.insert(token.clone()),
            };
        }
    }
    for key in keys {
        if rng.gen_bool(0.5) {
            let label = if rng.gen_bool(0.5) {
                Label::Ambiguous
            } else {
                Label::Unambiguous
            };
            dict.insert(&key, label);
        }
    }
    dict
}

/// Every surface type of `fullcm` marked ambiguous (DIAC keying), so that
/// applying the dictionary must change nothing.
pub fn all_ambiguous_dict(fullcm: &Corpus) -> AmbigDict {
    let mut dict = AmbigDict::new(Keying::Diac, Method::Tr);
    for sentence in &fullcm.sentences {
        for token in sentence {
            dict.insert(token, Label::Ambiguous);
        }
    }
    dict
}
