//! Deterministic sentence/token segmentation and syllable counting.

/// Punctuation classes tracked by the style schema, in schema order.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum PunctClass {
    Comma,
    Semicolon,
    Colon,
    Question,
    Exclamation,
    Parenthesis,
    DoubleQuote,
    Dash,
}

impl PunctClass {
    pub const ALL: [PunctClass; 8] = [
        PunctClass::Comma,
        PunctClass::Semicolon,
        PunctClass::Colon,
        PunctClass::Question,
        PunctClass::Exclamation,
        PunctClass::Parenthesis,
        PunctClass::DoubleQuote,
        PunctClass::Dash,
    ];

    pub fn of(c: char) -> Option<PunctClass> {
        Some(match c {
            ',' => PunctClass::Comma,
            ';' => PunctClass::Semicolon,
            ':' => PunctClass::Colon,
            '?' => PunctClass::Question,
            '!' => PunctClass::Exclamation,
            '(' | ')' => PunctClass::Parenthesis,
            '"' | '\u{201C}' | '\u{201D}' => PunctClass::DoubleQuote,
            '-' | '\u{2010}' | '\u{2011}' | '\u{2012}' | '\u{2013}' | '\u{2014}' | '\u{2015}' => PunctClass::Dash,
            _ => return None,
        })
    }

    pub fn index(self) -> usize {
        self as usize
    }
}

/// Segmented view of a document body.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct TokenizedText {
    /// Lowercased word tokens grouped by sentence. Sentences without any
    /// token are not recorded.
    pub sentences: Vec<Vec<String>>,
    /// Counts per [`PunctClass`], indexed by [`PunctClass::index`].
    pub punctuation_counts: [usize; 8],
    /// Letters across all tokens (apostrophes excluded).
    pub char_count_of_tokens: usize,
}

impl TokenizedText {
    pub fn token_count(&self) -> usize {
        self.sentences.iter().map(Vec::len).sum()
    }

    pub fn tokens(&self) -> impl Iterator<Item = &str> {
        self.sentences.iter().flatten().map(String::as_str)
    }

    pub fn punct(&self, class: PunctClass) -> usize {
        self.punctuation_counts[class.index()]
    }
}

fn is_apostrophe(c: char) -> bool {
    c == '\'' || c == '\u{2019}'
}

fn is_terminal(c: char) -> bool {
    matches!(c, '.' | '?' | '!')
}

/// Splits `text` into sentences and word tokens.
///
/// A sentence boundary is a maximal run of `.`, `?`, `!` followed by
/// whitespace or end of text. Tokens are maximal runs of letters, optionally
/// joined by single internal apostrophes, lowercased. Abbreviations such as
/// "Dr." end a sentence like any other full stop.
pub fn segment(text: &str) -> TokenizedText {
    let chars: Vec<char> = text.chars().collect();
    let mut out = TokenizedText::default();
    let mut sentence: Vec<String> = Vec::new();
    let mut i = 0;

    for &c in &chars {
        if let Some(class) = PunctClass::of(c) {
            out.punctuation_counts[class.index()] += 1;
        }
    }

    while i < chars.len() {
        let c = chars[i];
        if c.is_alphabetic() {
            let mut word = String::new();
            let mut letters = 0;
            loop {
                while i < chars.len() && chars[i].is_alphabetic() {
                    word.extend(chars[i].to_lowercase());
                    letters += 1;
                    i += 1;
                }
                // internal apostrophe: must be followed by another letter
                if i + 1 < chars.len() && is_apostrophe(chars[i]) && chars[i + 1].is_alphabetic() {
                    word.push('\'');
                    i += 1;
                    continue;
                }
                break;
            }
            out.char_count_of_tokens += letters;
            sentence.push(word);
        } else if is_terminal(c) {
            let start = i;
            while i < chars.len() && is_terminal(chars[i]) {
                i += 1;
            }
            debug_assert!(i > start);
            if (i == chars.len() || chars[i].is_whitespace()) && !sentence.is_empty() {
                out.sentences.push(std::mem::take(&mut sentence));
            }
        } else {
            i += 1;
        }
    }
    if !sentence.is_empty() {
        out.sentences.push(sentence);
    }
    out
}

fn is_vowel(c: char) -> bool {
    matches!(c, 'a' | 'e' | 'i' | 'o' | 'u' | 'y')
}

/// Heuristic syllable count of a lowercased token.
///
/// Counts maximal groups of `aeiouy`, drops one for a silent trailing "e"
/// (but not for a consonant + "le" ending), and never returns less than 1.
pub fn syllable_count(word: &str) -> usize {
    let letters: Vec<char> = word.chars().filter(|c| !is_apostrophe(*c)).collect();
    let mut groups = 0usize;
    let mut prev_vowel = false;
    for &c in &letters {
        let v = is_vowel(c);
        if v && !prev_vowel {
            groups += 1;
        }
        prev_vowel = v;
    }
    let n = letters.len();
    if n >= 1 && letters[n - 1] == 'e' {
        let consonant_le =
            n >= 3 && letters[n - 2] == 'l' && letters[n - 3].is_alphabetic() && !is_vowel(letters[n - 3]);
        if !consonant_le {
            groups = groups.saturating_sub(1);
        }
    }
    groups.max(1)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn two_simple_sentences() {
        let t = segment("The cat sat. The cat ran.");
        assert_eq!(t.sentences.len(), 2);
        let tokens: Vec<&str> = t.tokens().collect();
        assert_eq!(tokens, ["the", "cat", "sat", "the", "cat", "ran"]);
        assert_eq!(t.char_count_of_tokens, 18);
    }

    #[test]
    fn empty_text() {
        let t = segment("");
        assert!(t.sentences.is_empty());
        assert_eq!(t.token_count(), 0);
    }

    #[test]
    fn terminal_run_is_one_boundary() {
        let t = segment("Really?! Yes.");
        assert_eq!(t.sentences.len(), 2);
        assert_eq!(t.punct(PunctClass::Question), 1);
        assert_eq!(t.punct(PunctClass::Exclamation), 1);
    }

    #[test]
    fn period_inside_token_is_not_a_boundary() {
        let t = segment("See e.g.the result. Done");
        // "e.g.the" has no whitespace after the first two stops
        assert_eq!(t.sentences.len(), 2);
        assert_eq!(t.sentences[1], vec!["done".to_string()]);
    }

    #[test]
    fn apostrophes_inside_words() {
        let t = segment("Don't stop the authors' work 'now'.");
        let tokens: Vec<&str> = t.tokens().collect();
        assert_eq!(tokens, ["don't", "stop", "the", "authors", "work", "now"]);
        assert_eq!(t.char_count_of_tokens, 4 + 4 + 3 + 7 + 4 + 3);
    }

    #[test]
    fn punctuation_classes() {
        let t = segment("a, b; c: (d) \"e\" \u{201C}f\u{201D} g-h \u{2014} i?");
        assert_eq!(t.punctuation_counts, [1, 1, 1, 1, 0, 2, 4, 2]);
    }

    #[test]
    fn unicode_lowercasing() {
        let t = segment("Ärger ÜBER Straße.");
        let tokens: Vec<&str> = t.tokens().collect();
        assert_eq!(tokens, ["ärger", "über", "straße"]);
    }

    #[test]
    fn syllables() {
        assert_eq!(syllable_count("cat"), 1);
        assert_eq!(syllable_count("manuscript"), 3);
        assert_eq!(syllable_count("table"), 2);
        assert_eq!(syllable_count("cake"), 1);
        assert_eq!(syllable_count("the"), 1);
        assert_eq!(syllable_count("rhythm"), 1);
        assert_eq!(syllable_count("queue"), 1);
        assert_eq!(syllable_count("don't"), 1);
        assert_eq!(syllable_count("psst"), 1);
    }
}
