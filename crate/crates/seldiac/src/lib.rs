//! Selective diacritization toolkit for Arabic text.
//!
//! Arabic is usually written without diacritics, which collapses distinct
//! words onto the same undiacritized spelling. Restoring *all* diacritics
//! fixes the ambiguity but explodes the vocabulary; restoring *none* keeps
//! the text dense but ambiguous. This crate implements the middle road:
//! find the words that are actually ambiguous, record them in a dictionary,
//! and diacritize only those.
//!
//! The pipeline, end to end:
//!
//! 1. [`corpus`] — clean raw text and derive the three corpus views
//!    (undiacritized, fully diacritized, fully diacritized minus word-final
//!    case/mood marks).
//! 2. [`embeddings`] — train skip-gram vectors on a view.
//! 3. [`clustering`] — k-means / Gaussian mixtures over vectors, Brown
//!    classes over corpora, Chinese Whispers over similarity graphs.
//! 4. [`align`] — IBM Model 2 (log-linear diagonal prior) word alignment
//!    for translation-based disambiguation.
//! 5. [`ambig`] — the four ambiguity-dictionary builders (lexicon variants,
//!    sense induction, cluster separation, translation overlap) and the
//!    selective-diacritization transform itself.
//! 6. [`evalkit`] — sparsity/ambiguity statistics, diacritic-pattern
//!    reports, a perceptron POS tagger for downstream evaluation, and
//!    paired-bootstrap significance tests.
//!
//! [`textcore`] underpins everything with the character-level model of
//! diacritics and the Buckwalter transliteration. The `seldiac` binary
//! (see [`cli`]) exposes each stage as a subcommand.

pub mod align;
pub mod ambig;
pub mod cli;
pub mod clustering;
pub mod corpus;
pub mod embeddings;
pub mod evalkit;
pub mod textcore;
