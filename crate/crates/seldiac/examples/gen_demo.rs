//! Regenerates the bundled demo dataset under `data/demo/`.
//!
//! The dataset is synthetic Buckwalter-like text with planted homograph
//! groups, sized so the whole pipeline runs in well under two minutes on
//! one core. Everything is seeded, so rerunning this reproduces the files
//! byte for byte:
//!
//! ```text
//! cargo run -p seldiac --example gen_demo [-- <output-dir>]
//! ```

use std::collections::BTreeMap;
use std::fs;
use std::path::PathBuf;

use rand::prelude::*;
use rand_chacha::ChaCha8Rng;

use seldiac::textcore::{to_full_cm, DiacriticSet};

const CONSONANTS: &[char] = &[
    'b', 't', 'j', 'H', 'd', 'r', 'z', 's', 'S', 'T', 'E', 'f', 'q', 'k', 'l', 'm', 'n', 'h',
    'w', 'y',
];
const VOWELS: &[char] = &['a', 'i', 'u', 'o'];

const SENTENCES: usize = 5000;
const HOMOGRAPH_GROUPS: usize = 60;
const SINGLE_WORDS: usize = 240;
const PARALLEL_SENTENCES: usize = 1200;

fn skeleton(rng: &mut ChaCha8Rng, len: usize) -> String {
    (0..len).map(|_| *CONSONANTS.choose(rng).unwrap()).collect()
}

fn dress(rng: &mut ChaCha8Rng, skeleton: &str, d: &DiacriticSet) -> String {
    let mut word = String::new();
    for c in skeleton.chars() {
        word.push(c);
        if rng.gen_bool(0.08) {
            word.push('~');
        }
        if rng.gen_bool(0.55) {
            word.push(*VOWELS.choose(rng).unwrap());
        }
    }
    to_full_cm(&word, d)
}

/// FULL-CM surfaces grouped by skeleton: homograph groups first, then
/// single-variant words.
fn build_vocabulary(rng: &mut ChaCha8Rng, d: &DiacriticSet) -> Vec<Vec<String>> {
    let mut skeletons = std::collections::BTreeSet::new();
    while skeletons.len() < HOMOGRAPH_GROUPS + SINGLE_WORDS {
        let len = rng.gen_range(2..=5);
        skeletons.insert(skeleton(rng, len));
    }
    skeletons
        .into_iter()
        .enumerate()
        .map(|(i, s)| {
            let want = if i < HOMOGRAPH_GROUPS {
                rng.gen_range(2..=3)
            } else {
                1
            };
            let mut variants = std::collections::BTreeSet::new();
            for _ in 0..40 {
                variants.insert(dress(rng, &s, d));
                if variants.len() == want {
                    break;
                }
            }
            variants.into_iter().collect()
        })
        .collect()
}

fn zipf_index(rng: &mut ChaCha8Rng, len: usize) -> usize {
    let u: f64 = rng.gen();
    (((u * u) * len as f64) as usize).min(len - 1)
}

fn main() {
    let out_dir = std::env::args()
        .nth(1)
        .map(PathBuf::from)
        .unwrap_or_else(|| PathBuf::from("data/demo"));
    fs::create_dir_all(&out_dir).expect("create output directory");

    let d = DiacriticSet::default();
    let mut rng = ChaCha8Rng::seed_from_u64(20_24);
    let groups = build_vocabulary(&mut rng, &d);
    let flat: Vec<(usize, String)> = groups
        .iter()
        .enumerate()
        .flat_map(|(g, vs)| vs.iter().map(move |v| (g, v.clone())))
        .collect();

    // Raw corpus: diacritized text, word-final case vowels still present,
    // with a little punctuation and the odd number so cleaning has
    // something to normalize. Sentences come from two topics with disjoint
    // single-word pools; homograph variants are split across the topics,
    // so once diacritics are dropped the merged spelling really does occur
    // in two distributional senses.
    let single_pool: Vec<(usize, String)> = flat
        .iter()
        .filter(|(g, _)| *g >= HOMOGRAPH_GROUPS)
        .cloned()
        .collect();
    let topic_of_single = |g: usize| (g - HOMOGRAPH_GROUPS) % 2;
    let topic_singles: [Vec<&(usize, String)>; 2] = [
        single_pool.iter().filter(|(g, _)| topic_of_single(*g) == 0).collect(),
        single_pool.iter().filter(|(g, _)| topic_of_single(*g) == 1).collect(),
    ];
    let hom_variants: [Vec<&String>; 2] = [
        groups[..HOMOGRAPH_GROUPS].iter().map(|vs| &vs[0]).collect(),
        groups[..HOMOGRAPH_GROUPS].iter().flat_map(|vs| &vs[1..]).collect(),
    ];
    let mut raw = String::new();
    for _ in 0..SENTENCES {
        let topic = rng.gen_range(0..2usize);
        let len = rng.gen_range(4..=14);
        let mut toks = Vec::with_capacity(len + 2);
        for _ in 0..len {
            let surface = if rng.gen_bool(0.25) {
                hom_variants[topic][zipf_index(&mut rng, hom_variants[topic].len())].clone()
            } else {
                topic_singles[topic][zipf_index(&mut rng, topic_singles[topic].len())]
                    .1
                    .clone()
            };
            let mut word = surface;
            if rng.gen_bool(0.4) {
                word.push(*VOWELS[..3].choose(&mut rng).unwrap());
            }
            toks.push(word);
            if rng.gen_bool(0.03) {
                toks.push(rng.gen_range(2..2000u32).to_string());
            }
            if rng.gen_bool(0.04) {
                toks.push(",".to_string());
            }
        }
        toks.push(".".to_string());
        raw.push_str(&toks.join(" "));
        raw.push('\n');
    }
    fs::write(out_dir.join("raw.txt"), raw).expect("write raw.txt");

    // Morphological lexicon over a vocabulary sample: homograph groups get
    // one analysis per variant, singles get one or two spurious-free ones.
    let mut lexicon = String::new();
    for (i, vs) in groups.iter().enumerate().step_by(3) {
        let key = if i < HOMOGRAPH_GROUPS {
            // all variants share the skeleton by construction
            vs[0].chars().filter(|c| !VOWELS.contains(c) && *c != '~').collect::<String>()
        } else {
            vs[0].clone()
        };
        lexicon.push_str(&format!("{key}\t{}\n", vs.join("|")));
    }
    fs::write(out_dir.join("lexicon.tsv"), lexicon).expect("write lexicon.tsv");

    // Parallel corpus: source is FULL-CM text over the same vocabulary;
    // the synthetic translation gives each homograph variant its own
    // target word, so translation overlap genuinely separates senses.
    let mut translation: BTreeMap<&String, String> = BTreeMap::new();
    for (g, vs) in groups.iter().enumerate() {
        for (v, surface) in vs.iter().enumerate() {
            translation.insert(surface, format!("e{g}x{v}"));
        }
    }
    let mut src = String::new();
    let mut tgt = String::new();
    for _ in 0..PARALLEL_SENTENCES {
        let len = rng.gen_range(3..=9);
        let mut s = Vec::with_capacity(len);
        let mut t = Vec::with_capacity(len);
        for _ in 0..len {
            let (_, surface) = &flat[zipf_index(&mut rng, flat.len())];
            s.push(surface.clone());
            t.push(translation[surface].clone());
        }
        src.push_str(&s.join(" "));
        src.push('\n');
        tgt.push_str(&t.join(" "));
        tgt.push('\n');
    }
    fs::write(out_dir.join("source.txt"), src).expect("write source.txt");
    fs::write(out_dir.join("target.txt"), tgt).expect("write target.txt");

    // Tagged corpora (undiacritized scheme) for the tagger demo: a toy
    // grammar over dedicated word lists.
    let mut tag_vocab = |n: usize, len: usize| -> Vec<String> {
        (0..n).map(|_| skeleton(&mut rng, len)).collect()
    };
    let nouns = tag_vocab(25, 3);
    let fresh_nouns = tag_vocab(4, 3);
    let verbs = tag_vocab(18, 4);
    let adjs = tag_vocab(12, 3);
    let advs = tag_vocab(6, 2);
    let mut train_tags = String::new();
    let mut test_tags = String::new();
    for i in 0..1000usize {
        let test = i % 5 == 0;
        // a few nouns only ever occur in the test split, so the
        // out-of-vocabulary slice has something to measure
        let n1 = if test && rng.gen_bool(0.2) {
            fresh_nouns.choose(&mut rng).unwrap()
        } else {
            nouns.choose(&mut rng).unwrap()
        };
        let n2 = nouns.choose(&mut rng).unwrap();
        let v = verbs.choose(&mut rng).unwrap();
        let a = adjs.choose(&mut rng).unwrap();
        let r = advs.choose(&mut rng).unwrap();
        let line = match rng.gen_range(0..4) {
            0 => format!("Al/DET {n1}/NOUN {v}/VERB {r}/ADV\n"),
            1 => format!("{v}/VERB Al/DET {n1}/NOUN\n"),
            2 => format!("fiy/ADP {n1}/NOUN {a}/ADJ\n"),
            _ => format!("{n1}/NOUN {n2}/NOUN {a}/ADJ\n"),
        };
        if test {
            test_tags.push_str(&line);
        } else {
            train_tags.push_str(&line);
        }
    }
    fs::write(out_dir.join("train.tags"), train_tags).expect("write train.tags");
    fs::write(out_dir.join("test.tags"), test_tags).expect("write test.tags");

    // Two paired score columns for the significance-test demo: system A is
    // usually, but not always, ahead, so the p-value is small without
    // being degenerate.
    let mut a = String::new();
    let mut b = String::new();
    for _ in 0..40 {
        let base: f64 = rng.gen_range(0.5..0.9);
        a.push_str(&format!("{:.4}\n", base + rng.gen_range(-0.05..0.07)));
        b.push_str(&format!("{:.4}\n", base));
    }
    fs::write(out_dir.join("scores_a.txt"), a).expect("write scores_a.txt");
    fs::write(out_dir.join("scores_b.txt"), b).expect("write scores_b.txt");

    println!("demo dataset written to {}", out_dir.display());
}
