//! Streaming reader for MediaWiki `pages-articles` XML exports.

use std::fs::File;
use std::io::{BufRead, BufReader};
use std::path::Path;

use bzip2::bufread::MultiBzDecoder;
use quick_xml::events::Event;
use quick_xml::Reader;

use super::wikitext::{extract_internal_links, normalize_title, redirect_target};
use super::{CorpusError, RawArticle};

#[derive(Debug, Clone, Copy, Default)]
pub struct DumpOptions {
    /// Transparently decompress bzip2 input (detected by its `BZh` magic).
    pub accept_compressed: bool,
}

/// Wrap `input` in a bzip2 decoder when allowed and the magic matches.
pub fn maybe_decompress<'a, R: BufRead + 'a>(
    mut input: R,
    options: DumpOptions,
) -> Result<Box<dyn BufRead + 'a>, CorpusError> {
    if options.accept_compressed && input.fill_buf()?.starts_with(b"BZh") {
        return Ok(Box::new(BufReader::new(MultiBzDecoder::new(input))));
    }
    Ok(Box::new(input))
}

pub fn open_dump(
    path: impl AsRef<Path>,
    options: DumpOptions,
) -> Result<DumpReader<Box<dyn BufRead>>, CorpusError> {
    let file = BufReader::with_capacity(1 << 16, File::open(path)?);
    Ok(DumpReader::new(maybe_decompress(file, options)?))
}

/// Convenience entry point: stream articles out of any buffered reader.
pub fn parse_dump<R: BufRead>(input: R) -> DumpReader<R> {
    DumpReader::new(input)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
enum Field {
    Title,
    Namespace,
    Text,
}

#[derive(Default)]
struct PageState {
    title: Option<String>,
    namespace: Option<i64>,
    redirect: Option<String>,
    text: Option<String>,
}

/// Iterator over the pages of a dump, one [`RawArticle`] at a time. Only the
/// page being read is held in memory.
pub struct DumpReader<R: BufRead> {
    reader: Reader<R>,
    buf: Vec<u8>,
    field_buf: String,
    path: Vec<Vec<u8>>,
    field: Option<Field>,
    page: Option<PageState>,
    finished: bool,
    peak_buffer_bytes: usize,
}

impl<R: BufRead> DumpReader<R> {
    pub fn new(input: R) -> Self {
        let mut reader = Reader::from_reader(input);
        reader.trim_text(false);
        reader.check_end_names(true);
        DumpReader {
            reader,
            buf: Vec::with_capacity(1 << 12),
            field_buf: String::new(),
            path: Vec::new(),
            field: None,
            page: None,
            finished: false,
            peak_buffer_bytes: 0,
        }
    }

    /// Largest combined size of the reader's internal buffers seen so far.
    /// Tracks the biggest single page rather than the dump size.
    pub fn peak_buffer_bytes(&self) -> usize {
        self.peak_buffer_bytes
    }

    fn error(&self, message: impl Into<String>) -> CorpusError {
        CorpusError::Xml { offset: self.reader.buffer_position(), message: message.into() }
    }

    fn parent_is(&self, name: &[u8]) -> bool {
        self.path.len() >= 2 && self.path[self.path.len() - 2] == name
    }

    fn start_element(&mut self, name: &[u8]) {
        self.path.push(name.to_vec());
        match name {
            b"page" => self.page = Some(PageState::default()),
            b"title" if self.parent_is(b"page") => self.begin_field(Field::Title),
            b"ns" if self.parent_is(b"page") => self.begin_field(Field::Namespace),
            b"text" if self.parent_is(b"revision") => self.begin_field(Field::Text),
            _ => {}
        }
    }

    fn begin_field(&mut self, field: Field) {
        self.field = Some(field);
        self.field_buf.clear();
    }

    fn end_element(&mut self) -> Result<Option<RawArticle>, CorpusError> {
        let name = self.path.pop().unwrap_or_default();
        if let Some(field) = self.field.take() {
            let value = std::mem::take(&mut self.field_buf);
            let namespace = match field {
                Field::Namespace => Some(
                    value
                        .trim()
                        .parse::<i64>()
                        .map_err(|_| self.error(format!("invalid namespace `{value}`")))?,
                ),
                _ => None,
            };
            let Some(page) = self.page.as_mut() else { return Ok(None) };
            match field {
                Field::Title => page.title = Some(value),
                Field::Namespace => page.namespace = namespace,
                // keep the first revision only
                Field::Text => {
                    page.text.get_or_insert(value);
                }
            }
            return Ok(None);
        }
        if name == b"page" {
            let page = self.page.take().unwrap_or_default();
            return self.finish_page(page);
        }
        Ok(None)
    }

    fn finish_page(&self, page: PageState) -> Result<Option<RawArticle>, CorpusError> {
        let title = normalize_title(page.title.as_deref().unwrap_or(""));
        if title.is_empty() {
            log::warn!("skipping page without title at byte {}", self.reader.buffer_position());
            return Ok(None);
        }
        let wikitext = page.text.unwrap_or_default();
        let links = extract_internal_links(&wikitext);
        let redirect = page.redirect.or_else(|| redirect_target(&wikitext));
        Ok(Some(RawArticle {
            title,
            namespace: page.namespace.unwrap_or(0),
            categories: links.categories,
            outlinks: if redirect.is_some() { Vec::new() } else { links.outlinks },
            redirect_target: redirect,
            wikitext,
        }))
    }

    fn read_next(&mut self) -> Result<Option<RawArticle>, CorpusError> {
        loop {
            self.buf.clear();
            let event = self
                .reader
                .read_event_into(&mut self.buf)
                .map_err(|e| CorpusError::Xml {
                    offset: self.reader.buffer_position(),
                    message: e.to_string(),
                })?;
            let pos = self.reader.buffer_position();
            let xml_err = |message: String| CorpusError::Xml { offset: pos, message };
            let mut emitted = None;
            match event {
                Event::Start(e) => {
                    let name = e.local_name().as_ref().to_vec();
                    self.start_element(&name);
                }
                Event::Empty(e) => {
                    if e.local_name().as_ref() == b"redirect" && self.page.is_some() {
                        let attr = e
                            .try_get_attribute("title")
                            .map_err(|err| xml_err(err.to_string()))?;
                        if let Some(attr) = attr {
                            let value = attr
                                .unescape_value()
                                .map_err(|err| xml_err(err.to_string()))?;
                            let title = normalize_title(value.split('#').next().unwrap_or(""));
                            if let Some(page) = self.page.as_mut() {
                                page.redirect = (!title.is_empty()).then_some(title);
                            }
                        }
                    }
                }
                Event::End(_) => emitted = self.end_element()?,
                Event::Text(e) => {
                    if self.field.is_some() {
                        let text = e.unescape().map_err(|err| xml_err(err.to_string()))?;
                        self.field_buf.push_str(&text);
                    }
                }
                Event::CData(e) => {
                    if self.field.is_some() {
                        let raw = e.into_inner();
                        let text = std::str::from_utf8(&raw)
                            .map_err(|err| xml_err(err.to_string()))?
                            .to_string();
                        self.field_buf.push_str(&text);
                    }
                }
                Event::Eof => {
                    if !self.path.is_empty() {
                        return Err(self.error("unexpected end of document inside an element"));
                    }
                    return Ok(None);
                }
                _ => {}
            }
            self.peak_buffer_bytes =
                self.peak_buffer_bytes.max(self.buf.capacity() + self.field_buf.capacity());
            if emitted.is_some() {
                return Ok(emitted);
            }
        }
    }
}

impl<R: BufRead> Iterator for DumpReader<R> {
    type Item = Result<RawArticle, CorpusError>;

    fn next(&mut self) -> Option<Self::Item> {
        if self.finished {
            return None;
        }
        match self.read_next() {
            Ok(Some(article)) => Some(Ok(article)),
            Ok(None) => {
                self.finished = true;
                None
            }
            Err(e) => {
                self.finished = true;
                Some(Err(e))
            }
        }
    }
}
