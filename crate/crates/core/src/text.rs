//! Character-offset helpers and the word rule shared by the annotation
//! backend and its clients.
//!
//! All offsets in this crate count Unicode scalar values (`char`s), never
//! bytes or UTF-16 units.
//!
//! A *word* is a maximal run of characters that are neither whitespace nor
//! punctuation. Apostrophes (`'` and `’`) are punctuation, so French
//! elisions split: `l'île` is the two words `l` and `île`.

/// Returns true for characters treated as punctuation by the word rule.
pub fn is_punctuation(c: char) -> bool {
    c.is_ascii_punctuation()
        || matches!(
            c,
            '\u{00A1}'
                | '\u{00A7}'
                | '\u{00AB}'
                | '\u{00B6}'
                | '\u{00B7}'
                | '\u{00BB}'
                | '\u{00BF}'
                | '\u{037E}'
                | '\u{0387}'
                | '\u{2010}'..='\u{2027}'
                | '\u{2030}'..='\u{205E}'
                | '\u{2E00}'..='\u{2E4F}'
                | '\u{3001}'..='\u{3003}'
                | '\u{FF01}'..='\u{FF0F}'
        )
}

#[inline]
pub fn is_word_char(c: char) -> bool {
    !c.is_whitespace() && !is_punctuation(c)
}

/// Half-open `[start, end)` character range.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct CharSpan {
    pub start: usize,
    pub end: usize,
}

impl CharSpan {
    pub fn new(start: usize, end: usize) -> Self {
        debug_assert!(start <= end);
        CharSpan { start, end }
    }

    pub fn len(&self) -> usize {
        self.end - self.start
    }

    pub fn is_empty(&self) -> bool {
        self.start == self.end
    }

    pub fn overlaps(&self, other: &CharSpan) -> bool {
        self.start < other.end && other.start < self.end
    }
}

/// Character spans of every word in `text`, in order.
pub fn word_spans(text: &str) -> Vec<CharSpan> {
    let mut spans = Vec::new();
    let mut start = None;
    let mut pos = 0;
    for c in text.chars() {
        match (is_word_char(c), start) {
            (true, None) => start = Some(pos),
            (false, Some(s)) => {
                spans.push(CharSpan::new(s, pos));
                start = None;
            }
            _ => {}
        }
        pos += 1;
    }
    if let Some(s) = start {
        spans.push(CharSpan::new(s, pos));
    }
    spans
}

/// True iff `[start, start + len)` begins at a word start and finishes at a
/// word end of `text`. Empty spans are never aligned.
pub fn is_word_aligned(text: &str, start: usize, len: usize) -> bool {
    if len == 0 {
        return false;
    }
    let end = start + len;
    let spans = word_spans(text);
    spans.iter().any(|w| w.start == start) && spans.iter().any(|w| w.end == end)
}

/// Number of characters in `text`.
#[inline]
pub fn char_len(text: &str) -> usize {
    text.chars().count()
}

/// Substring by character offsets; `None` when out of range.
pub fn char_slice(text: &str, start: usize, len: usize) -> Option<&str> {
    let mut indices = text.char_indices().map(|(i, _)| i).chain(std::iter::once(text.len()));
    let begin = indices.nth(start)?;
    if len == 0 {
        return Some(&text[begin..begin]);
    }
    let end = indices.nth(len - 1)?;
    Some(&text[begin..end])
}

/// Byte offset of the character at `char_pos`, or `text.len()` at the end.
pub fn byte_offset(text: &str, char_pos: usize) -> Option<usize> {
    text.char_indices()
        .map(|(i, _)| i)
        .chain(std::iter::once(text.len()))
        .nth(char_pos)
}

/// Collapse every whitespace run to a single space and trim both ends.
pub fn collapse_whitespace(text: &str) -> String {
    text.split_whitespace().collect::<Vec<_>>().join(" ")
}

/// Uppercase the first character, leave the rest untouched.
pub fn uppercase_first(text: &str) -> String {
    let mut chars = text.chars();
    match chars.next() {
        Some(first) => first.to_uppercase().chain(chars).collect(),
        None => String::new(),
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn words(text: &str) -> Vec<String> {
        word_spans(text)
            .into_iter()
            .map(|s| char_slice(text, s.start, s.len()).unwrap().to_string())
            .collect()
    }

    #[test]
    fn elision_splits_words() {
        assert_eq!(words("l'île de Ré"), ["l", "île", "de", "Ré"]);
        assert_eq!(words("aujourd’hui, c'est"), ["aujourd", "hui", "c", "est"]);
    }

    #[test]
    fn punctuation_is_a_boundary() {
        assert_eq!(words("« Paris » (France)."), ["Paris", "France"]);
        assert_eq!(words("score d'1-1"), ["score", "d", "1", "1"]);
    }

    #[test]
    fn mid_word_span_is_not_aligned() {
        let text = "Paris est belle";
        assert!(is_word_aligned(text, 0, 5));
        assert!(!is_word_aligned(text, 1, 4));
        assert!(!is_word_aligned(text, 0, 4));
        assert!(is_word_aligned(text, 0, 9));
        assert!(!is_word_aligned(text, 0, 0));
    }

    #[test]
    fn char_slice_counts_scalars() {
        let text = "Événements à Paris";
        assert_eq!(char_slice(text, 0, 10), Some("Événements"));
        assert_eq!(char_slice(text, 11, 1), Some("à"));
        assert_eq!(char_slice(text, 13, 5), Some("Paris"));
        assert_eq!(char_slice(text, 13, 6), None);
        assert_eq!(char_slice(text, 18, 0), Some(""));
        assert_eq!(char_slice(text, 19, 0), None);
    }

    #[test]
    fn uppercase_first_handles_accents() {
        assert_eq!(uppercase_first("école"), "École");
        assert_eq!(uppercase_first(""), "");
    }

    proptest! {
        #[test]
        fn word_spans_are_maximal_runs(text in "[a-zé' ,.\\-]{0,40}") {
            let chars: Vec<char> = text.chars().collect();
            let spans = word_spans(&text);
            for (i, s) in spans.iter().enumerate() {
                prop_assert!(!s.is_empty());
                prop_assert!(chars[s.start..s.end].iter().all(|&c| is_word_char(c)));
                prop_assert!(s.start == 0 || !is_word_char(chars[s.start - 1]));
                prop_assert!(s.end == chars.len() || !is_word_char(chars[s.end]));
                if i > 0 {
                    prop_assert!(spans[i - 1].end < s.start);
                }
            }
            let covered: usize = spans.iter().map(CharSpan::len).sum();
            prop_assert_eq!(covered, chars.iter().filter(|&&c| is_word_char(c)).count());
        }
    }
}
