//! Minimal wikitext handling: section trees, internal links and a plain-text
//! renderer. Templates are never expanded; their content is dropped.

use std::collections::BTreeSet;
use std::sync::OnceLock;

use regex::Regex;
use serde::{Deserialize, Serialize};

use crate::text::{collapse_whitespace, uppercase_first};

const CATEGORY_PREFIXES: &[&str] = &["catégorie", "category"];
const FILE_PREFIXES: &[&str] = &["fichier", "file", "image", "média", "media"];

/// MediaWiki title normalization: underscores become spaces, whitespace
/// runs collapse, and the first character is uppercased.
pub fn normalize_title(raw: &str) -> String {
    uppercase_first(&collapse_whitespace(&raw.replace('_', " ")))
}

/// One node of the section tree. The root is the lead section: empty
/// heading, level 1.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct SectionNode {
    pub heading: String,
    pub level: u8,
    pub body: String,
    pub children: Vec<SectionNode>,
}

impl SectionNode {
    pub fn lead(body: impl Into<String>) -> Self {
        SectionNode { heading: String::new(), level: 1, body: body.into(), children: Vec::new() }
    }

    /// Visit nodes depth-first, parents before children.
    pub fn walk<'a>(&'a self, visit: &mut impl FnMut(&'a SectionNode)) {
        visit(self);
        for child in &self.children {
            child.walk(visit);
        }
    }

    pub fn headings(&self) -> Vec<&str> {
        let mut out = Vec::new();
        self.walk(&mut |n| {
            if n.level > 1 {
                out.push(n.heading.as_str());
            }
        });
        out
    }
}

fn heading_of(line: &str) -> Option<(u8, &str)> {
    let line = line.trim_end();
    let leading = line.chars().take_while(|&c| c == '=').count();
    let trailing = line.chars().rev().take_while(|&c| c == '=').count();
    if leading == line.len() {
        return None;
    }
    let level = leading.min(trailing).min(6);
    if level < 2 {
        return None;
    }
    let inner = line[level..line.len() - level].trim();
    if inner.is_empty() {
        return None;
    }
    Some((level as u8, inner))
}

/// Split wikitext into a section tree on `== Heading ==` lines (2 to 6
/// equals signs). Text before the first heading is the root body.
pub fn split_sections(wikitext: &str) -> SectionNode {
    // (node, has_body_line)
    let mut stack: Vec<(SectionNode, bool)> = vec![(SectionNode::lead(""), false)];
    for line in wikitext.lines() {
        if let Some((level, heading)) = heading_of(line) {
            while stack.len() > 1 && stack.last().unwrap().0.level >= level {
                let (done, _) = stack.pop().unwrap();
                stack.last_mut().unwrap().0.children.push(done);
            }
            let node = SectionNode {
                heading: heading.to_string(),
                level,
                body: String::new(),
                children: Vec::new(),
            };
            stack.push((node, false));
        } else {
            let (node, started) = stack.last_mut().unwrap();
            if *started {
                node.body.push('\n');
            }
            node.body.push_str(line);
            *started = true;
        }
    }
    while stack.len() > 1 {
        let (done, _) = stack.pop().unwrap();
        stack.last_mut().unwrap().0.children.push(done);
    }
    stack.pop().unwrap().0
}

/// Links found in a page body.
#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct Links {
    pub outlinks: Vec<String>,
    pub categories: BTreeSet<String>,
}

/// Remove `<!-- ... -->` comments. An unterminated comment runs to the end.
pub fn strip_comments(text: &str) -> String {
    let mut out = String::with_capacity(text.len());
    let mut rest = text;
    while let Some(open) = rest.find("<!--") {
        out.push_str(&rest[..open]);
        match rest[open + 4..].find("-->") {
            Some(close) => rest = &rest[open + 4 + close + 3..],
            None => return out,
        }
    }
    out.push_str(rest);
    out
}

/// Remove balanced `open ... close` regions, nested. Unmatched openers and
/// closers stay as text.
fn strip_nested(text: &str, open: &str, close: &str) -> String {
    let mut stack = Vec::new();
    let mut regions: Vec<(usize, usize)> = Vec::new();
    let mut i = 0;
    while i < text.len() {
        let rest = &text[i..];
        if rest.starts_with(open) {
            stack.push(i);
            i += open.len();
        } else if !stack.is_empty() && rest.starts_with(close) {
            let start = stack.pop().unwrap();
            i += close.len();
            regions.push((start, i));
        } else {
            i += rest.chars().next().unwrap().len_utf8();
        }
    }
    // matched pairs nest properly, so outermost regions are those not
    // contained in another one
    regions.sort_unstable();
    let mut out = String::with_capacity(text.len());
    let mut cursor = 0;
    for (start, end) in regions {
        if start >= cursor {
            out.push_str(&text[cursor..start]);
            cursor = end;
        }
    }
    out.push_str(&text[cursor..]);
    out
}

pub fn strip_templates(text: &str) -> String {
    strip_nested(text, "{{", "}}")
}

/// Find the `]]` closing a link whose `[[` ends just before `from`,
/// honouring nested `[[ ]]`. Returns the byte index of the closing `]]`.
fn link_close(text: &str, from: usize) -> Option<usize> {
    let mut depth = 1usize;
    let mut i = from;
    while i < text.len() {
        let rest = &text[i..];
        if rest.starts_with("[[") {
            depth += 1;
            i += 2;
        } else if rest.starts_with("]]") {
            depth -= 1;
            if depth == 0 {
                return Some(i);
            }
            i += 2;
        } else {
            i += rest.chars().next().unwrap().len_utf8();
        }
    }
    None
}

enum LinkKind {
    Article { target: String, label: Option<String> },
    Category(String),
    File,
    Invalid,
}

fn classify_link(inner: &str) -> LinkKind {
    let (target, label) = match inner.split_once('|') {
        Some((t, l)) => (t, Some(l)),
        None => (inner, None),
    };
    if target.contains(['[', ']', '{', '}', '\n', '<', '>']) {
        return LinkKind::Invalid;
    }
    let target = target.trim();
    let colon_link = target.starts_with(':');
    let target = target.trim_start_matches(':').trim();
    if let Some((prefix, rest)) = target.split_once(':') {
        let prefix = prefix.trim().to_lowercase();
        if FILE_PREFIXES.contains(&prefix.as_str()) {
            return LinkKind::File;
        }
        if !colon_link && CATEGORY_PREFIXES.contains(&prefix.as_str()) {
            let name = normalize_title(rest);
            return if name.is_empty() { LinkKind::Invalid } else { LinkKind::Category(name) };
        }
    }
    let label = label.map(|l| l.trim().to_string()).filter(|l| !l.is_empty());
    LinkKind::Article { target: target.to_string(), label }
}

/// Collect internal link targets and categories. `[[Target|label]]` yields
/// `Target`; section anchors are dropped; file links are ignored; links
/// inside templates and comments are ignored. Duplicates keep their first
/// position.
pub fn extract_internal_links(wikitext: &str) -> Links {
    let text = strip_templates(&strip_comments(wikitext));
    let mut links = Links::default();
    let mut seen = BTreeSet::new();
    let mut i = 0;
    while let Some(off) = text[i..].find("[[") {
        let open = i + off;
        let Some(close) = link_close(&text, open + 2) else {
            i = open + 2;
            continue;
        };
        match classify_link(&text[open + 2..close]) {
            LinkKind::Article { target, .. } => {
                let without_anchor = target.split('#').next().unwrap_or("");
                let title = normalize_title(without_anchor);
                if !title.is_empty() && seen.insert(title.clone()) {
                    links.outlinks.push(title);
                }
            }
            LinkKind::Category(name) => {
                links.categories.insert(name);
            }
            LinkKind::File | LinkKind::Invalid => {}
        }
        i = close + 2;
    }
    links
}

/// Parse `#REDIRECT [[Target]]` (or the French `#REDIRECTION`) at the start
/// of a body.
pub fn redirect_target(wikitext: &str) -> Option<String> {
    let body = wikitext.trim_start();
    let lower: String = body.chars().take(16).collect::<String>().to_lowercase();
    let keyword = ["#redirection", "#redirect"].into_iter().find(|k| lower.starts_with(k))?;
    let rest = &body[body.char_indices().nth(keyword.chars().count()).map(|(i, _)| i)?..];
    let rest = rest.trim_start().trim_start_matches(':').trim_start();
    let inner = rest.strip_prefix("[[")?;
    let close = inner.find("]]")?;
    let target = inner[..close].split('|').next()?.split('#').next()?;
    let title = normalize_title(target.trim_start_matches(':'));
    (!title.is_empty()).then_some(title)
}

fn ref_regex() -> &'static Regex {
    static RE: OnceLock<Regex> = OnceLock::new();
    RE.get_or_init(|| {
        Regex::new(r"(?is)<ref\b[^>]*/>|<ref\b[^>]*>.*?</ref\s*>").expect("valid ref regex")
    })
}

fn tag_regex() -> &'static Regex {
    static RE: OnceLock<Regex> = OnceLock::new();
    RE.get_or_init(|| Regex::new(r"</?[a-zA-Z][^<>]*>").expect("valid tag regex"))
}

fn external_link_regex() -> &'static Regex {
    static RE: OnceLock<Regex> = OnceLock::new();
    RE.get_or_init(|| {
        Regex::new(r"\[(?:https?:)?//[^\s\]]+(?:\s+([^\]]*))?\]").expect("valid link regex")
    })
}

fn replace_links(text: &str) -> String {
    let mut out = String::with_capacity(text.len());
    let mut i = 0;
    while let Some(off) = text[i..].find("[[") {
        let open = i + off;
        out.push_str(&text[i..open]);
        let Some(close) = link_close(text, open + 2) else {
            out.push_str("[[");
            i = open + 2;
            continue;
        };
        if let LinkKind::Article { target, label } = classify_link(&text[open + 2..close]) {
            match label {
                Some(l) => out.push_str(&replace_links(&l)),
                None => out.push_str(target.trim_start_matches(':')),
            }
        }
        i = close + 2;
    }
    out.push_str(&text[i..]);
    out
}

fn decode_entities(text: &str) -> String {
    text.replace("&nbsp;", " ")
        .replace("&#160;", " ")
        .replace("&lt;", "<")
        .replace("&gt;", ">")
        .replace("&quot;", "\"")
        .replace("&amp;", "&")
}

fn strip_emphasis(text: &str) -> String {
    let mut out = String::with_capacity(text.len());
    let mut chars = text.chars().peekable();
    while let Some(c) = chars.next() {
        if c == '\'' && chars.peek() == Some(&'\'') {
            while chars.peek() == Some(&'\'') {
                chars.next();
            }
            continue;
        }
        out.push(c);
    }
    out
}

/// Render a section body to plain text: comments, references, templates and
/// tables are removed, links become their labels, emphasis markers and HTML
/// tags are stripped. Line structure is preserved so blank lines still
/// separate blocks.
pub fn render_plain(body: &str) -> String {
    let text = strip_comments(body);
    let text = ref_regex().replace_all(&text, "");
    let text = strip_templates(&text);
    let text = strip_nested(&text, "{|", "|}");
    let text = replace_links(&text);
    let text = external_link_regex().replace_all(&text, "$1");
    let text = tag_regex().replace_all(&text, "");
    let text = decode_entities(&text);
    let text = text.replace("__NOTOC__", "").replace("__TOC__", "");
    strip_emphasis(&text)
}

/// Split rendered text into prose blocks: blank lines separate blocks and
/// list or table lines are not prose. Each block has its whitespace
/// collapsed.
pub fn prose_blocks(rendered: &str) -> Vec<String> {
    let mut blocks = Vec::new();
    let mut current: Vec<&str> = Vec::new();
    let flush = |current: &mut Vec<&str>, blocks: &mut Vec<String>| {
        if !current.is_empty() {
            let block = collapse_whitespace(&current.join(" "));
            if !block.is_empty() {
                blocks.push(block);
            }
            current.clear();
        }
    };
    for line in rendered.lines() {
        let trimmed = line.trim();
        let non_prose = trimmed.is_empty()
            || trimmed.starts_with(['*', '#', ':', ';', '|', '!'])
            || trimmed.starts_with("----");
        if non_prose {
            flush(&mut current, &mut blocks);
        } else {
            current.push(trimmed);
        }
    }
    flush(&mut current, &mut blocks);
    blocks
}
