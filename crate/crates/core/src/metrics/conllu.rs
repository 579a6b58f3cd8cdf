//! Reader for dependency parses in CoNLL-U, keyed by question id.
//!
//! Each sentence block carries `# qa_id = <id>` and `# role = question` or
//! `# role = sentence`, plus `# text = ...`. Character ranges come from a
//! `TokenRange=start:end` entry in MISC, relative to the block text; tokens
//! without one are aligned against the text left to right. Words of a
//! multiword token (`au` = `à` + `le`) take the surface token's range on the
//! first word and an empty range at its end on the others.

use std::collections::BTreeMap;

use crate::text::char_len;

use super::MetricsError;

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct DepToken {
    pub form: String,
    pub start: usize,
    pub end: usize,
    /// 1-based index of the head token, 0 for the root.
    pub head: usize,
    pub deprel: String,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct DepParse {
    pub text: String,
    pub tokens: Vec<DepToken>,
}

impl DepParse {
    /// 0-based parent of token `i`, `None` for the root.
    pub fn parent(&self, i: usize) -> Option<usize> {
        self.tokens[i].head.checked_sub(1)
    }

    /// Chain of ancestors from `i` (inclusive) up to the root.
    pub fn ancestors(&self, i: usize) -> Vec<usize> {
        let mut chain = vec![i];
        let mut cur = i;
        while let Some(p) = self.parent(cur) {
            chain.push(p);
            cur = p;
        }
        chain
    }

    pub fn validate(&self) -> Result<(), String> {
        let n = self.tokens.len();
        if n == 0 {
            return Err("empty parse".into());
        }
        let roots = self.tokens.iter().filter(|t| t.head == 0).count();
        if roots != 1 {
            return Err(format!("{roots} roots, expected exactly one"));
        }
        let text_len = char_len(&self.text);
        let mut prev_end = 0;
        for (i, t) in self.tokens.iter().enumerate() {
            if t.head > n {
                return Err(format!("token {} has head {} beyond {n} tokens", i + 1, t.head));
            }
            if t.start < prev_end || t.end < t.start || t.end > text_len {
                return Err(format!("token {} range {}:{} overlaps or leaves the text", i + 1, t.start, t.end));
            }
            prev_end = t.end;
        }
        for i in 0..n {
            let mut cur = i;
            for _ in 0..=n {
                match self.parent(cur) {
                    Some(p) => cur = p,
                    None => break,
                }
            }
            if self.parent(cur).is_some() {
                return Err(format!("token {} is on a head cycle", i + 1));
            }
        }
        Ok(())
    }
}

#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct ParsePair {
    pub question: Option<DepParse>,
    pub sentence: Option<DepParse>,
}

#[derive(Default)]
struct Block {
    first_line: usize,
    qa_id: Option<String>,
    role: Option<String>,
    text: Option<String>,
    rows: Vec<Row>,
    multiword: Option<(usize, usize, String, Option<(usize, usize)>)>,
}

enum Placement {
    Given(usize, usize),
    Align(String),
    AfterPrevious,
}

struct Row {
    form: String,
    head: usize,
    deprel: String,
    placement: Placement,
}

fn token_range(misc: &str) -> Option<Result<(usize, usize), String>> {
    let value = misc.split('|').find_map(|kv| kv.strip_prefix("TokenRange="))?;
    let parsed = value
        .split_once(':')
        .and_then(|(a, b)| Some((a.parse().ok()?, b.parse().ok()?)))
        .ok_or_else(|| format!("invalid TokenRange `{value}`"));
    Some(parsed)
}

fn align(text: &str, form: &str, from: usize) -> Option<(usize, usize)> {
    let byte_from = text.char_indices().nth(from).map_or(text.len(), |(b, _)| b);
    let found = text[byte_from..].find(form)? + byte_from;
    let start = text[..found].chars().count();
    Some((start, start + char_len(form)))
}

impl Block {
    fn finish(self, out: &mut BTreeMap<String, ParsePair>) -> Result<(), MetricsError> {
        let line = self.first_line;
        let err = |message: String| MetricsError::Conllu { line, message };
        let qa_id = self.qa_id.ok_or_else(|| err("block without `# qa_id`".into()))?;
        let role = self.role.ok_or_else(|| err("block without `# role`".into()))?;
        let text = self.text.unwrap_or_default();
        let mut cursor = 0;
        let mut tokens = Vec::with_capacity(self.rows.len());
        for Row { form, head, deprel, placement } in self.rows {
            let (start, end) = match placement {
                Placement::Given(s, e) => (s, e),
                Placement::Align(surface) => align(&text, &surface, cursor)
                    .ok_or_else(|| err(format!("cannot align token `{surface}` with `# text`")))?,
                Placement::AfterPrevious => (cursor, cursor),
            };
            cursor = end;
            tokens.push(DepToken { form, start, end, head, deprel });
        }
        let parse = DepParse { text, tokens };
        parse.validate().map_err(|m| err(format!("{qa_id}: {m}")))?;
        let pair = out.entry(qa_id.clone()).or_default();
        let slot = match role.as_str() {
            "question" => &mut pair.question,
            "sentence" => &mut pair.sentence,
            other => return Err(err(format!("unknown role `{other}`"))),
        };
        if slot.is_some() {
            return Err(err(format!("second {role} parse for `{qa_id}`")));
        }
        *slot = Some(parse);
        Ok(())
    }
}

pub fn parse_conllu(input: &str) -> Result<BTreeMap<String, ParsePair>, MetricsError> {
    let mut out = BTreeMap::new();
    let mut block: Option<Block> = None;
    for (i, raw) in input.lines().enumerate() {
        let line = i + 1;
        let err = |message: String| MetricsError::Conllu { line, message };
        let l = raw.trim_end_matches('\r');
        if l.trim().is_empty() {
            if let Some(b) = block.take() {
                b.finish(&mut out)?;
            }
            continue;
        }
        let b = block.get_or_insert_with(|| Block { first_line: line, ..Default::default() });
        if let Some(comment) = l.strip_prefix('#') {
            if let Some((key, value)) = comment.split_once('=') {
                let value = value.trim().to_string();
                match key.trim() {
                    "qa_id" => b.qa_id = Some(value),
                    "role" => b.role = Some(value),
                    "text" => b.text = Some(value),
                    _ => {}
                }
            }
            continue;
        }
        let cols: Vec<&str> = l.split('\t').collect();
        if cols.len() != 10 {
            return Err(err(format!("expected 10 tab-separated columns, found {}", cols.len())));
        }
        if cols[0].contains('.') {
            continue;
        }
        if let Some((a, z)) = cols[0].split_once('-') {
            let a: usize = a.parse().map_err(|_| err(format!("invalid range id `{}`", cols[0])))?;
            let z: usize = z.parse().map_err(|_| err(format!("invalid range id `{}`", cols[0])))?;
            let range = token_range(cols[9]).transpose().map_err(err)?;
            b.multiword = Some((a, z, cols[1].to_string(), range));
            continue;
        }
        let id: usize = cols[0].parse().map_err(|_| err(format!("invalid id `{}`", cols[0])))?;
        if id != b.rows.len() + 1 {
            return Err(err(format!("token id {id} out of sequence")));
        }
        let head: usize = cols[6].parse().map_err(|_| err(format!("invalid head `{}`", cols[6])))?;
        let placement = match &b.multiword {
            Some((a, _, surface, range)) if id == *a => match range {
                Some((s, e)) => Placement::Given(*s, *e),
                None => Placement::Align(surface.clone()),
            },
            Some((a, z, _, _)) if id > *a && id <= *z => Placement::AfterPrevious,
            _ => match token_range(cols[9]).transpose().map_err(err)? {
                Some((s, e)) => Placement::Given(s, e),
                None => Placement::Align(cols[1].to_string()),
            },
        };
        b.rows.push(Row { form: cols[1].to_string(), head, deprel: cols[7].to_string(), placement });
    }
    if let Some(b) = block.take() {
        b.finish(&mut out)?;
    }
    Ok(out)
}
