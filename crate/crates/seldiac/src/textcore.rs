//! Character-level model of Arabic diacritics.
//!
//! Everything here works on abstract *mark membership*: a [`DiacriticSet`]
//! knows which characters count as diacritics in both Arabic script and
//! Buckwalter transliteration, so the rest of the crate behaves identically
//! on either encoding. The operations are the small closed set the pipeline
//! needs: strip all marks, strip the word-final (syntactic) marks, abstract
//! a word to its diacritic pattern, and transliterate between scripts.

use std::collections::BTreeSet;
use std::fmt;

use thiserror::Error;

/// Buckwalter transliteration table, sorted by Arabic code point.
///
/// Covers the standard table plus the common extensions (alef wasla and the
/// Persian letters used in loanwords).
const TRANSLIT: &[(char, char)] = &[
    ('\u{0621}', '\''), // hamza
    ('\u{0622}', '|'),  // alef with madda
    ('\u{0623}', '>'),  // alef with hamza above
    ('\u{0624}', '&'),  // waw with hamza
    ('\u{0625}', '<'),  // alef with hamza below
    ('\u{0626}', '}'),  // yeh with hamza
    ('\u{0627}', 'A'),  // alef
    ('\u{0628}', 'b'),
    ('\u{0629}', 'p'), // teh marbuta
    ('\u{062A}', 't'),
    ('\u{062B}', 'v'),
    ('\u{062C}', 'j'),
    ('\u{062D}', 'H'),
    ('\u{062E}', 'x'),
    ('\u{062F}', 'd'),
    ('\u{0630}', '*'),
    ('\u{0631}', 'r'),
    ('\u{0632}', 'z'),
    ('\u{0633}', 's'),
    ('\u{0634}', '$'),
    ('\u{0635}', 'S'),
    ('\u{0636}', 'D'),
    ('\u{0637}', 'T'),
    ('\u{0638}', 'Z'),
    ('\u{0639}', 'E'),
    ('\u{063A}', 'g'),
    ('\u{0640}', '_'), // tatweel
    ('\u{0641}', 'f'),
    ('\u{0642}', 'q'),
    ('\u{0643}', 'k'),
    ('\u{0644}', 'l'),
    ('\u{0645}', 'm'),
    ('\u{0646}', 'n'),
    ('\u{0647}', 'h'),
    ('\u{0648}', 'w'),
    ('\u{0649}', 'Y'), // alef maksura
    ('\u{064A}', 'y'),
    ('\u{064B}', 'F'), // fathatan
    ('\u{064C}', 'N'), // dammatan
    ('\u{064D}', 'K'), // kasratan
    ('\u{064E}', 'a'), // fatha
    ('\u{064F}', 'u'), // damma
    ('\u{0650}', 'i'), // kasra
    ('\u{0651}', '~'), // shadda
    ('\u{0652}', 'o'), // sukun
    ('\u{0670}', '`'), // superscript (dagger) alef
    ('\u{0671}', '{'), // alef wasla
    ('\u{067E}', 'P'), // peh
    ('\u{0686}', 'J'), // tcheh
    ('\u{06A4}', 'V'), // veh
    ('\u{06AF}', 'G'), // gaf
];

fn arabic_to_bw(c: char) -> Option<char> {
    TRANSLIT
        .binary_search_by_key(&c, |&(ar, _)| ar)
        .ok()
        .map(|i| TRANSLIT[i].1)
}

fn bw_to_arabic(c: char) -> Option<char> {
    TRANSLIT.iter().find(|&&(_, bw)| bw == c).map(|&(ar, _)| ar)
}

/// Errors from character-level operations.
#[derive(Debug, Error, PartialEq, Eq)]
pub enum TextError {
    /// A character with no transliteration mapping, at the given character
    /// position (0-based) of the input word.
    #[error("no transliteration for {ch:?} at character {position}")]
    UnknownCharacter { position: usize, ch: char },
    /// A custom mark set contained a character that is a base letter.
    #[error("{0:?} is a base letter, not a diacritic mark")]
    MarkIsBaseLetter(char),
}

/// Transliteration direction.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Direction {
    ArabicToBuckwalter,
    BuckwalterToArabic,
}

/// The set of characters treated as diacritic marks.
///
/// Holds both the Arabic-script marks and their Buckwalter counterparts so
/// membership tests are encoding-agnostic. `lexical_only` controls whether
/// shadda (gemination — a lexical, not syntactic, mark) survives word-final
/// stripping in [`to_full_cm`].
#[derive(Debug, Clone)]
pub struct DiacriticSet {
    marks: BTreeSet<char>,
    buckwalter_marks: BTreeSet<char>,
    pub lexical_only: bool,
}

impl Default for DiacriticSet {
    /// The eight harakat (U+064B–U+0652) plus the dagger alef (U+0670),
    /// with `lexical_only = true`.
    fn default() -> Self {
        let marks: BTreeSet<char> = ('\u{064B}'..='\u{0652}').chain(['\u{0670}']).collect();
        let buckwalter_marks = marks.iter().filter_map(|&c| arabic_to_bw(c)).collect();
        DiacriticSet {
            marks,
            buckwalter_marks,
            lexical_only: true,
        }
    }
}

impl DiacriticSet {
    /// Builds a custom set from Arabic-script mark characters. The
    /// Buckwalter side is derived through the transliteration table, so the
    /// two sets always correspond one-to-one. Only genuine combining marks
    /// are accepted — a base letter (which would collide with word material
    /// in both encodings) is rejected.
    pub fn from_marks(
        marks: impl IntoIterator<Item = char>,
        lexical_only: bool,
    ) -> Result<Self, TextError> {
        let marks: BTreeSet<char> = marks.into_iter().collect();
        let mut buckwalter_marks = BTreeSet::new();
        for &m in &marks {
            let is_combining = ('\u{064B}'..='\u{0652}').contains(&m) || m == '\u{0670}';
            if !is_combining {
                return Err(TextError::MarkIsBaseLetter(m));
            }
            let bw = arabic_to_bw(m).ok_or(TextError::MarkIsBaseLetter(m))?;
            buckwalter_marks.insert(bw);
        }
        Ok(DiacriticSet {
            marks,
            buckwalter_marks,
            lexical_only,
        })
    }

    /// Same marks, different word-final shadda behavior.
    pub fn with_lexical_only(mut self, lexical_only: bool) -> Self {
        self.lexical_only = lexical_only;
        self
    }

    /// Is `c` a diacritic in either encoding?
    pub fn is_mark(&self, c: char) -> bool {
        self.marks.contains(&c) || self.buckwalter_marks.contains(&c)
    }

    /// The Arabic-script marks, ascending by code point.
    pub fn marks(&self) -> impl Iterator<Item = char> + '_ {
        self.marks.iter().copied()
    }

    /// The Buckwalter marks, ascending by code point.
    pub fn buckwalter_marks(&self) -> impl Iterator<Item = char> + '_ {
        self.buckwalter_marks.iter().copied()
    }
}

/// Shadda in either encoding.
pub fn is_shadda(c: char) -> bool {
    c == '\u{0651}' || c == '~'
}

/// Dagger alef in either encoding.
pub fn is_dagger_alef(c: char) -> bool {
    c == '\u{0670}' || c == '`'
}

/// Removes every diacritic mark. `strip_diacritics("katab") == "ktb"`.
pub fn strip_diacritics(word: &str, d: &DiacriticSet) -> String {
    word.chars().filter(|&c| !d.is_mark(c)).collect()
}

/// Removes the maximal run of word-final diacritics — the position where
/// Arabic carries its syntactic case/mood vowels — leaving the word-internal
/// (lexical) diacritics intact. Two exceptions within the final run: shadda
/// is kept when the set is `lexical_only` (gemination is part of the word,
/// not its inflection), and the dagger alef is always kept (it is a vowel
/// letter in disguise, never a case ending).
///
/// `to_full_cm("Ealamu") == "Ealam"`, `to_full_cm("kul~u") == "kul~"`.
pub fn to_full_cm(word: &str, d: &DiacriticSet) -> String {
    let chars: Vec<char> = word.chars().collect();
    let mut start = chars.len();
    while start > 0 && d.is_mark(chars[start - 1]) {
        start -= 1;
    }
    let mut out: String = chars[..start].iter().collect();
    for &c in &chars[start..] {
        let keep = (d.lexical_only && is_shadda(c) && d.is_mark(c))
            || (is_dagger_alef(c) && d.is_mark(c));
        if keep {
            out.push(c);
        }
    }
    out
}

/// A word's diacritic pattern: every non-mark character becomes `C`, marks
/// stay put. `abstract_pattern("katab") == "CaCaC"`.
pub fn abstract_pattern(word: &str, d: &DiacriticSet) -> DiacPattern {
    DiacPattern(
        word.chars()
            .map(|c| if d.is_mark(c) { c } else { 'C' })
            .collect(),
    )
}

/// Transliterates between Arabic script and Buckwalter. The table is a
/// bijection, so a round trip reproduces the input exactly. In strict mode
/// any unmapped character is an error; otherwise it passes through.
pub fn transliterate(word: &str, direction: Direction, strict: bool) -> Result<String, TextError> {
    let mut out = String::with_capacity(word.len());
    for (position, ch) in word.chars().enumerate() {
        let mapped = match direction {
            Direction::ArabicToBuckwalter => arabic_to_bw(ch),
            Direction::BuckwalterToArabic => bw_to_arabic(ch),
        };
        match mapped {
            Some(m) => out.push(m),
            None if strict => return Err(TextError::UnknownCharacter { position, ch }),
            None => out.push(ch),
        }
    }
    Ok(out)
}

/// The diacritic pattern of a word (see [`abstract_pattern`]).
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct DiacPattern(String);

impl DiacPattern {
    pub fn as_str(&self) -> &str {
        &self.0
    }

    /// Pattern length in characters (equals the word's character length).
    pub fn len_chars(&self) -> usize {
        self.0.chars().count()
    }
}

impl fmt::Display for DiacPattern {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.0)
    }
}

/// A surface word together with its undiacritized key.
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct WordForm {
    surface: String,
    key: String,
}

impl WordForm {
    pub fn new(surface: impl Into<String>, d: &DiacriticSet) -> Self {
        let surface = surface.into();
        let key = strip_diacritics(&surface, d);
        WordForm { surface, key }
    }

    pub fn surface(&self) -> &str {
        &self.surface
    }

    /// The undiacritized spelling this form collapses to.
    pub fn key(&self) -> &str {
        &self.key
    }

    pub fn is_diacritized(&self) -> bool {
        self.surface != self.key
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn d() -> DiacriticSet {
        DiacriticSet::default()
    }

    #[test]
    fn strip_removes_all_marks() {
        assert_eq!(strip_diacritics("katab", &d()), "ktb");
        assert_eq!(strip_diacritics("kutub", &d()), "ktb");
        assert_eq!(strip_diacritics("kutib", &d()), "ktb");
        assert_eq!(strip_diacritics("bayot", &d()), "byt");
        assert_eq!(strip_diacritics("ktb", &d()), "ktb");
        assert_eq!(strip_diacritics("", &d()), "");
    }

    #[test]
    fn strip_handles_arabic_script() {
        assert_eq!(strip_diacritics("كَتَب", &d()), "كتب");
        assert_eq!(strip_diacritics("بَيْت", &d()), "بيت");
    }

    #[test]
    fn full_cm_drops_final_run_only() {
        assert_eq!(to_full_cm("Ealama", &d()), "Ealam");
        assert_eq!(to_full_cm("Ealamu", &d()), "Ealam");
        assert_eq!(to_full_cm("EalamN", &d()), "Ealam");
        // ends in a base letter: identity
        assert_eq!(to_full_cm("katab", &d()), "katab");
        // word-internal marks survive
        assert_eq!(to_full_cm("kutiba", &d()), "kutib");
        // no final marks: identity
        assert_eq!(to_full_cm("bayot", &d()), "bayot");
        assert_eq!(to_full_cm("ktb", &d()), "ktb");
    }

    #[test]
    fn full_cm_keeps_final_shadda_when_lexical_only() {
        assert_eq!(to_full_cm("kul~u", &d()), "kul~");
        assert_eq!(to_full_cm("kul~", &d()), "kul~");
        let syntactic = d().with_lexical_only(false);
        assert_eq!(to_full_cm("kul~u", &syntactic), "kul");
    }

    #[test]
    fn full_cm_never_drops_final_dagger_alef() {
        assert_eq!(to_full_cm("EalaY`", &d()), "EalaY`");
        assert_eq!(to_full_cm("rH`", &d().with_lexical_only(false)), "rH`");
        // dagger alef inside a final run survives while the rest goes
        assert_eq!(to_full_cm("rH`u", &d()), "rH`");
    }

    #[test]
    fn full_cm_on_marks_only_word() {
        // a pathological all-marks token reduces to its kept marks
        assert_eq!(to_full_cm("aui", &d()), "");
        assert_eq!(to_full_cm("a~u", &d()), "~");
    }

    #[test]
    fn patterns_abstract_base_characters() {
        assert_eq!(abstract_pattern("katab", &d()).as_str(), "CaCaC");
        assert_eq!(abstract_pattern("kutib", &d()).as_str(), "CuCiC");
        assert_eq!(abstract_pattern("ktb", &d()).as_str(), "CCC");
        assert_eq!(abstract_pattern("Ear~aD", &d()).as_str(), "CaC~aC");
        assert_eq!(abstract_pattern("EuriD", &d()).as_str(), "CuCiC");
        assert_eq!(abstract_pattern("كَتَب", &d()).as_str(), "CَCَC");
    }

    #[test]
    fn transliterate_worked_examples() {
        let bw = transliterate("كَتَب", Direction::ArabicToBuckwalter, true).unwrap();
        assert_eq!(bw, "katab");
        let ar = transliterate("katab", Direction::BuckwalterToArabic, true).unwrap();
        assert_eq!(ar, "كَتَب");
        let bw = transliterate("بَيْت", Direction::ArabicToBuckwalter, true).unwrap();
        assert_eq!(bw, "bayot");
    }

    #[test]
    fn transliterate_strict_rejects_unknown() {
        let err = transliterate("ka7ab", Direction::BuckwalterToArabic, true).unwrap_err();
        assert_eq!(
            err,
            TextError::UnknownCharacter {
                position: 2,
                ch: '7'
            }
        );
        // non-strict passes it through unchanged
        let out = transliterate("ka7", Direction::BuckwalterToArabic, false).unwrap();
        assert_eq!(out.chars().nth(2), Some('7'));
        // mixed script is rejected in strict mode, either direction
        assert!(transliterate("kتb", Direction::BuckwalterToArabic, true).is_err());
        assert!(transliterate("كq", Direction::ArabicToBuckwalter, true).is_err());
    }

    #[test]
    fn custom_mark_set_rejects_base_letters() {
        let err = DiacriticSet::from_marks(['\u{0627}'], true).unwrap_err();
        assert_eq!(err, TextError::MarkIsBaseLetter('\u{0627}'));
        // a legitimate subset works and only strips its own marks
        let fatha_only = DiacriticSet::from_marks(['\u{064E}'], true).unwrap();
        assert_eq!(strip_diacritics("katab", &fatha_only), "ktb");
        assert_eq!(strip_diacritics("kutib", &fatha_only), "kutib");
    }

    #[test]
    fn word_form_carries_surface_and_key() {
        let w = WordForm::new("katab", &d());
        assert_eq!(w.surface(), "katab");
        assert_eq!(w.key(), "ktb");
        assert!(w.is_diacritized());
        assert!(!WordForm::new("ktb", &d()).is_diacritized());
    }

    #[test]
    fn default_set_is_bijective_with_transliteration() {
        let set = d();
        for m in set.marks() {
            let bw = arabic_to_bw(m).unwrap();
            assert!(set.is_mark(bw), "{bw:?} missing from Buckwalter side");
            assert_eq!(bw_to_arabic(bw), Some(m));
        }
        assert_eq!(set.marks().count(), set.buckwalter_marks().count());
        let expected: BTreeSet<char> = "FNKaui~o`".chars().collect();
        assert_eq!(set.buckwalter_marks().collect::<BTreeSet<_>>(), expected);
    }

    /// Buckwalter words over base letters and marks, biased toward marks so
    /// final runs actually occur.
    fn bw_word() -> impl Strategy<Value = String> {
        let ch = prop::sample::select(
            "bktdrszSE'|<>&}AfqlmnhwyYpF N K a u i ~ o `"
                .chars()
                .filter(|c| !c.is_whitespace())
                .collect::<Vec<_>>(),
        );
        prop::collection::vec(ch, 0..12).prop_map(|cs| cs.into_iter().collect())
    }

    fn arabic_word() -> impl Strategy<Value = String> {
        let ch = prop::sample::select(TRANSLIT.iter().map(|&(ar, _)| ar).collect::<Vec<_>>());
        prop::collection::vec(ch, 0..12).prop_map(|cs| cs.into_iter().collect())
    }

    proptest! {
        #[test]
        fn strip_is_idempotent(w in bw_word()) {
            let s = strip_diacritics(&w, &d());
            prop_assert_eq!(strip_diacritics(&s, &d()), s.clone());
            prop_assert!(s.chars().all(|c| !d().is_mark(c)));
        }

        #[test]
        fn full_cm_is_idempotent(w in bw_word()) {
            let once = to_full_cm(&w, &d());
            prop_assert_eq!(to_full_cm(&once, &d()), once.clone());
        }

        #[test]
        fn strip_commutes_with_full_cm(w in bw_word()) {
            prop_assert_eq!(
                strip_diacritics(&to_full_cm(&w, &d()), &d()),
                strip_diacritics(&w, &d())
            );
        }

        #[test]
        fn lengths_are_ordered(w in bw_word()) {
            let n = |s: &str| s.chars().count();
            let stripped = strip_diacritics(&w, &d());
            let cm = to_full_cm(&w, &d());
            prop_assert!(n(&stripped) <= n(&cm));
            prop_assert!(n(&cm) <= n(&w));
        }

        #[test]
        fn pattern_length_matches_word(w in bw_word()) {
            prop_assert_eq!(abstract_pattern(&w, &d()).len_chars(), w.chars().count());
        }

        #[test]
        fn stripped_pattern_is_all_c(w in bw_word()) {
            let p = abstract_pattern(&strip_diacritics(&w, &d()), &d());
            prop_assert!(p.as_str().chars().all(|c| c == 'C'));
        }

        #[test]
        fn transliteration_round_trips(w in arabic_word()) {
            let bw = transliterate(&w, Direction::ArabicToBuckwalter, true).unwrap();
            let back = transliterate(&bw, Direction::BuckwalterToArabic, true).unwrap();
            prop_assert_eq!(back, w);
        }

        #[test]
        fn transliteration_commutes_with_strip(w in arabic_word()) {
            let bw = transliterate(&w, Direction::ArabicToBuckwalter, true).unwrap();
            let a = strip_diacritics(&bw, &d());
            let b = transliterate(&strip_diacritics(&w, &d()), Direction::ArabicToBuckwalter, true).unwrap();
            prop_assert_eq!(a, b);
        }
    }
}
