use std::collections::{HashMap, HashSet};
use std::io::{BufRead, Write};

use super::{CorpusError, RawArticle};

/// Directed graph of internal links between articles. Node ids follow the
/// sorted order of titles.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct LinkGraph {
    titles: Vec<String>,
    index: HashMap<String, u32>,
    out_edges: Vec<Vec<u32>>,
}

impl LinkGraph {
    /// Build from titles and adjacency lists, checking every invariant.
    pub fn from_parts(titles: Vec<String>, mut out_edges: Vec<Vec<u32>>) -> Result<Self, CorpusError> {
        let invalid = |m: String| CorpusError::InvalidGraph(m);
        if titles.len() != out_edges.len() {
            return Err(invalid(format!("{} titles but {} adjacency lists", titles.len(), out_edges.len())));
        }
        let n = titles.len() as u32;
        let mut index = HashMap::with_capacity(titles.len());
        for (i, t) in titles.iter().enumerate() {
            if index.insert(t.clone(), i as u32).is_some() {
                return Err(invalid(format!("duplicate title `{t}`")));
            }
        }
        for (src, edges) in out_edges.iter_mut().enumerate() {
            edges.sort_unstable();
            edges.dedup();
            if let Some(&bad) = edges.iter().find(|&&d| d >= n) {
                return Err(invalid(format!("edge {src}->{bad} out of range")));
            }
        }
        Ok(LinkGraph { titles, index, out_edges })
    }

    pub fn node_count(&self) -> usize {
        self.titles.len()
    }

    pub fn edge_count(&self) -> usize {
        self.out_edges.iter().map(Vec::len).sum()
    }

    pub fn is_empty(&self) -> bool {
        self.titles.is_empty()
    }

    pub fn titles(&self) -> &[String] {
        &self.titles
    }

    pub fn title(&self, id: u32) -> &str {
        &self.titles[id as usize]
    }

    pub fn id(&self, title: &str) -> Option<u32> {
        self.index.get(title).copied()
    }

    pub fn out_edges(&self, id: u32) -> &[u32] {
        &self.out_edges[id as usize]
    }

    pub fn edges(&self) -> impl Iterator<Item = (u32, u32)> + '_ {
        self.out_edges
            .iter()
            .enumerate()
            .flat_map(|(s, d)| d.iter().map(move |&d| (s as u32, d)))
    }

    /// Text edge list: `nodes <n>`, `id<TAB>title` lines, `edges <m>`,
    /// `src<TAB>dst` lines. UTF-8 with LF endings.
    pub fn write_edge_list<W: Write>(&self, mut out: W) -> Result<(), CorpusError> {
        writeln!(out, "nodes {}", self.node_count())?;
        for (i, t) in self.titles.iter().enumerate() {
            if t.contains(['\t', '\n', '\r']) {
                return Err(CorpusError::InvalidGraph(format!("title `{t}` contains a tab or newline")));
            }
            writeln!(out, "{i}\t{t}")?;
        }
        writeln!(out, "edges {}", self.edge_count())?;
        for (s, d) in self.edges() {
            writeln!(out, "{s}\t{d}")?;
        }
        out.flush()?;
        Ok(())
    }

    pub fn read_edge_list<R: BufRead>(input: R) -> Result<Self, CorpusError> {
        let mut lines = input.lines().enumerate();
        let mut next = |expect: &str| -> Result<(usize, String), CorpusError> {
            match lines.next() {
                Some((n, line)) => Ok((n + 1, line?)),
                None => Err(CorpusError::EdgeList { line: 0, message: format!("missing {expect}") }),
            }
        };
        let bad = |line: usize, message: &str| CorpusError::EdgeList { line, message: message.to_string() };

        let (ln, header) = next("node header")?;
        let n: usize = header
            .strip_prefix("nodes ")
            .and_then(|v| v.parse().ok())
            .ok_or_else(|| bad(ln, "expected `nodes <n>`"))?;
        let mut titles = Vec::with_capacity(n);
        for expected in 0..n {
            let (ln, line) = next("node line")?;
            let (id, title) = line.split_once('\t').ok_or_else(|| bad(ln, "expected `id<TAB>title`"))?;
            if id.parse::<usize>().ok() != Some(expected) {
                return Err(bad(ln, "node ids must be 0..n-1 in order"));
            }
            titles.push(title.to_string());
        }
        let (ln, header) = next("edge header")?;
        let m: usize = header
            .strip_prefix("edges ")
            .and_then(|v| v.parse().ok())
            .ok_or_else(|| bad(ln, "expected `edges <m>`"))?;
        let mut out_edges = vec![Vec::new(); n];
        for _ in 0..m {
            let (ln, line) = next("edge line")?;
            let parsed = line
                .split_once('\t')
                .and_then(|(s, d)| Some((s.parse::<u32>().ok()?, d.parse::<u32>().ok()?)));
            let (s, d) = parsed.ok_or_else(|| bad(ln, "expected `src<TAB>dst`"))?;
            if s as usize >= n || d as usize >= n {
                return Err(bad(ln, "edge endpoint out of range"));
            }
            out_edges[s as usize].push(d);
        }
        Self::from_parts(titles, out_edges)
    }
}

/// Accumulates pages and redirects, then resolves them into a [`LinkGraph`].
/// Titles are interned as they arrive, so memory grows with the number of
/// distinct titles and links rather than with page text.
#[derive(Debug, Default)]
pub struct GraphBuilder {
    interned: HashMap<String, u32>,
    names: Vec<String>,
    articles: Vec<(u32, Vec<u32>)>,
    article_set: HashSet<u32>,
    redirects: HashMap<u32, u32>,
    warnings: Vec<String>,
}

impl GraphBuilder {
    pub fn new() -> Self {
        Self::default()
    }

    fn intern(&mut self, title: &str) -> u32 {
        if let Some(&id) = self.interned.get(title) {
            return id;
        }
        let id = self.names.len() as u32;
        self.names.push(title.to_string());
        self.interned.insert(title.to_string(), id);
        id
    }

    fn warn(&mut self, message: String) {
        log::warn!("{message}");
        self.warnings.push(message);
    }

    /// Add a page. Only namespace-0 pages take part in the graph.
    pub fn add_article(&mut self, article: &RawArticle) {
        if article.namespace != 0 {
            return;
        }
        match &article.redirect_target {
            Some(target) => self.add_redirect(&article.title, target),
            None => self.add_page(&article.title, &article.outlinks),
        }
    }

    pub fn add_page(&mut self, title: &str, outlinks: &[String]) {
        let id = self.intern(title);
        if !self.article_set.insert(id) {
            self.warn(format!("duplicate page `{title}` ignored"));
            return;
        }
        let links = outlinks.iter().map(|l| self.intern(l)).collect();
        self.articles.push((id, links));
    }

    pub fn add_redirect(&mut self, title: &str, target: &str) {
        let from = self.intern(title);
        let to = self.intern(target);
        if self.redirects.insert(from, to).is_some() {
            self.warn(format!("duplicate redirect `{title}` replaced"));
        }
    }

    fn resolve_all(&mut self) -> HashMap<u32, Option<u32>> {
        let mut resolved: HashMap<u32, Option<u32>> = HashMap::new();
        let mut sources: Vec<u32> = self.redirects.keys().copied().collect();
        sources.sort_unstable();
        for start in sources {
            if resolved.contains_key(&start) {
                continue;
            }
            let mut chain = Vec::new();
            let mut seen = HashSet::new();
            let mut cur = start;
            let outcome = loop {
                if self.article_set.contains(&cur) {
                    break Some(cur);
                }
                if let Some(&known) = resolved.get(&cur) {
                    break known;
                }
                if !seen.insert(cur) {
                    let members: Vec<&str> = chain.iter().map(|&c: &u32| self.names[c as usize].as_str()).collect();
                    let message = format!("redirect cycle through {}", members.join(" -> "));
                    log::warn!("{message}");
                    self.warnings.push(message);
                    break None;
                }
                chain.push(cur);
                match self.redirects.get(&cur) {
                    Some(&next) => cur = next,
                    None => break None,
                }
            };
            for c in chain {
                resolved.insert(c, outcome);
            }
        }
        resolved
    }

    /// Resolve redirects (transitively, cycle-safe), drop links to missing
    /// pages and self-loops, and number nodes by sorted title.
    pub fn finish(mut self) -> (LinkGraph, Vec<String>) {
        let resolved = self.resolve_all();
        let mut order: Vec<u32> = self.articles.iter().map(|(id, _)| *id).collect();
        order.sort_unstable_by(|a, b| self.names[*a as usize].cmp(&self.names[*b as usize]));
        let mut node_of: HashMap<u32, u32> = HashMap::with_capacity(order.len());
        for (node, &id) in order.iter().enumerate() {
            node_of.insert(id, node as u32);
        }
        let mut out_edges = vec![Vec::new(); order.len()];
        for (id, links) in &self.articles {
            let src = node_of[id];
            let edges = &mut out_edges[src as usize];
            for link in links {
                let target = if self.article_set.contains(link) {
                    Some(*link)
                } else {
                    resolved.get(link).copied().flatten()
                };
                if let Some(dst) = target.and_then(|t| node_of.get(&t).copied()) {
                    if dst != src {
                        edges.push(dst);
                    }
                }
            }
            edges.sort_unstable();
            edges.dedup();
        }
        let titles: Vec<String> = order.iter().map(|&id| self.names[id as usize].clone()).collect();
        let index = titles.iter().enumerate().map(|(i, t)| (t.clone(), i as u32)).collect();
        (LinkGraph { titles, index, out_edges }, self.warnings)
    }
}

/// Fold `(title, outlinks)` pages and `(title, target)` redirects into a graph.
pub fn build_link_graph<'a>(
    pages: impl IntoIterator<Item = (&'a str, &'a [String])>,
    redirects: impl IntoIterator<Item = (&'a str, &'a str)>,
) -> (LinkGraph, Vec<String>) {
    let mut builder = GraphBuilder::new();
    for (title, links) in pages {
        builder.add_page(title, links);
    }
    for (title, target) in redirects {
        builder.add_redirect(title, target);
    }
    builder.finish()
}
