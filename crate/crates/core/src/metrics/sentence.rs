//! Sentence boundaries for French prose.

use crate::text::CharSpan;

use super::MetricsError;

/// Tokens ending in a period that never end a sentence.
pub const ABBREVIATIONS: &[&str] = &["m.", "mm.", "mme.", "mmes.", "mlle.", "etc.", "cf.", "av.", "apr.", "j.-c."];

fn is_abbreviation(chars: &[char], period: usize) -> bool {
    let start = chars[..period].iter().rposition(|c| c.is_whitespace()).map_or(0, |p| p + 1);
    let token: String = chars[start..=period].iter().collect::<String>().to_lowercase();
    let token = token.trim_start_matches(['(', '«', '"', '\'']);
    ABBREVIATIONS.contains(&token)
}

/// Sentence spans of `text`, in characters, trimmed of surrounding
/// whitespace. A sentence ends at `.`, `?` or `!` followed by whitespace and
/// an uppercase letter, unless the period closes a listed abbreviation.
pub fn sentence_spans(text: &str) -> Vec<CharSpan> {
    let chars: Vec<char> = text.chars().collect();
    let mut spans = Vec::new();
    let mut start = 0;
    let push = |start: usize, end: usize, spans: &mut Vec<CharSpan>| {
        let s = (start..end).find(|&i| !chars[i].is_whitespace());
        if let Some(s) = s {
            let e = (s..end).rev().find(|&i| !chars[i].is_whitespace()).map_or(s, |e| e + 1);
            spans.push(CharSpan::new(s, e));
        }
    };
    let mut i = 0;
    while i < chars.len() {
        if matches!(chars[i], '.' | '?' | '!') {
            let mut j = i + 1;
            while j < chars.len() && chars[j].is_whitespace() {
                j += 1;
            }
            let boundary = j > i + 1
                && j < chars.len()
                && chars[j].is_uppercase()
                && !(chars[i] == '.' && is_abbreviation(&chars, i));
            if boundary {
                push(start, i + 1, &mut spans);
                start = j;
                i = j;
                continue;
            }
        }
        i += 1;
    }
    push(start, chars.len(), &mut spans);
    spans
}

/// The sentence containing `answer_start`, with its character range.
pub fn answer_sentence(context: &str, answer_start: usize, answer_len: usize) -> Result<(String, CharSpan), MetricsError> {
    let n = crate::text::char_len(context);
    if answer_start.checked_add(answer_len).map_or(true, |end| end > n) {
        return Err(MetricsError::SpanOutOfRange { start: answer_start, len: answer_len, context_len: n });
    }
    let spans = sentence_spans(context);
    let span = spans
        .iter()
        .copied()
        .find(|s| answer_start < s.end)
        .or_else(|| spans.last().copied())
        .unwrap_or(CharSpan::new(0, n));
    let text = crate::text::char_slice(context, span.start, span.len()).unwrap_or_default().to_string();
    Ok((text, span))
}
