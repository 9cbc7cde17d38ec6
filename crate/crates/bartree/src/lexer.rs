//! Flat HTML tag lexer.
//!
//! Real-world pages are rarely well-formed, so nothing here builds a DOM.
//! [`tokenize`] makes a single pass over the source and produces a
//! [`TagStream`]: every surviving `<...>` construct becomes exactly one
//! [`TagEvent`], and the bytes between tags become entity-decoded
//! [`TextRun`]s. Comments, doctypes, processing instructions, and whole
//! `<script>`/`<style>` blocks produce no events and their contents are
//! skipped. Malformed input degrades to text or is dropped; tokenizing
//! never fails.
//!
//! Tags are classified into three buckets that drive the later cleaning
//! passes: text-format tags (inline styling, invisible to structure),
//! layout-format tags (the template skeleton), and everything else.

use std::collections::BTreeSet;
use std::ops::Range;

use serde::{Deserialize, Serialize};

/// Inline styling tags. These shape glyphs, not page structure.
pub const DEFAULT_TEXT_FORMAT_TAGS: &[&str] = &[
    "b", "i", "em", "strong", "u", "small", "sub", "sup", "font", "mark", "s", "strike", "tt",
];

/// Structural tags that carry the template skeleton.
pub const DEFAULT_LAYOUT_FORMAT_TAGS: &[&str] = &[
    "html", "body", "div", "table", "tr", "td", "th", "thead", "tbody", "ul", "ol", "li", "span",
    "p", "form", "section", "header", "footer", "nav", "h1", "h2", "h3", "h4", "h5", "h6",
];

/// Tags that never take a closing partner.
pub const DEFAULT_VOID_TAGS: &[&str] = &["br", "hr", "img", "input", "meta", "link"];

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum TagKind {
    Open,
    Close,
    Void,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum TagClass {
    TextFormat,
    LayoutFormat,
    Other,
}

/// One tag occurrence. `span` is the byte range of the whole `<...>`
/// construct in the original source; names are lowercased.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct TagEvent {
    pub name: String,
    pub kind: TagKind,
    pub class: TagClass,
    pub span: Range<usize>,
}

/// A maximal run of character data between tags. `text` has character
/// entities decoded; `span` still addresses the raw source bytes.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct TextRun {
    pub span: Range<usize>,
    pub text: String,
}

/// Ordered tag events plus ordered text runs, both sorted by source
/// position and non-overlapping.
#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct TagStream {
    pub events: Vec<TagEvent>,
    pub text_runs: Vec<TextRun>,
}

/// Tag classification tables. The defaults match common HTML; targets can
/// move or add names per [`TagClassConfig::with_overrides`].
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct TagClassConfig {
    text_format: BTreeSet<String>,
    layout_format: BTreeSet<String>,
    void: BTreeSet<String>,
}

impl Default for TagClassConfig {
    fn default() -> Self {
        TagClassConfig {
            text_format: DEFAULT_TEXT_FORMAT_TAGS.iter().map(|s| s.to_string()).collect(),
            layout_format: DEFAULT_LAYOUT_FORMAT_TAGS.iter().map(|s| s.to_string()).collect(),
            void: DEFAULT_VOID_TAGS.iter().map(|s| s.to_string()).collect(),
        }
    }
}

impl TagClassConfig {
    /// Extends the default tables. A name placed in one bucket is removed
    /// from the others, so overrides can reclassify built-ins (e.g. treat
    /// `span` as text-format).
    pub fn with_overrides(text_format: &[String], layout_format: &[String], void: &[String]) -> Self {
        let mut cfg = TagClassConfig::default();
        for name in text_format {
            let name = name.to_ascii_lowercase();
            cfg.layout_format.remove(&name);
            cfg.text_format.insert(name);
        }
        for name in layout_format {
            let name = name.to_ascii_lowercase();
            cfg.text_format.remove(&name);
            cfg.layout_format.insert(name);
        }
        for name in void {
            cfg.void.insert(name.to_ascii_lowercase());
        }
        cfg
    }

    pub fn classify(&self, name: &str) -> TagClass {
        if self.text_format.contains(name) {
            TagClass::TextFormat
        } else if self.layout_format.contains(name) {
            TagClass::LayoutFormat
        } else {
            TagClass::Other
        }
    }

    pub fn is_void(&self, name: &str) -> bool {
        self.void.contains(name)
    }
}

/// Classifies a (lowercase) tag name. Unlisted names fall through to
/// [`TagClass::Other`] and are treated like layout structure downstream.
pub fn classify_tag(name: &str, config: &TagClassConfig) -> TagClass {
    config.classify(name)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum CleanPolicy {
    /// Drop text-format tag events; keep all text runs.
    StripTextFormat,
    /// Drop all text runs and text-format events; keep layout and other tags.
    KeepLayoutOnly,
}

/// Applies a cleaning pass, preserving the relative order of what survives.
pub fn clean(stream: &TagStream, policy: CleanPolicy) -> TagStream {
    let events = stream
        .events
        .iter()
        .filter(|e| e.class != TagClass::TextFormat)
        .cloned()
        .collect();
    let text_runs = match policy {
        CleanPolicy::StripTextFormat => stream.text_runs.clone(),
        CleanPolicy::KeepLayoutOnly => Vec::new(),
    };
    TagStream { events, text_runs }
}

/// Tokenizes with the default tag tables.
pub fn tokenize(source: &str) -> TagStream {
    tokenize_with(source, &TagClassConfig::default())
}

/// Tokenizes `source` into a [`TagStream`].
///
/// A `<` begins a construct only when followed by an ASCII letter, `/`,
/// `!`, or `?`; otherwise it is literal text ("a < b" stays text). A
/// construct missing its closing `>` is dropped silently. Self-closing
/// syntax (`<div/>`) does not make a tag void: only names in the void
/// table produce [`TagKind::Void`], and a stray closer of a void name
/// (`</br>`) is folded into a void event as browsers do.
pub fn tokenize_with(source: &str, config: &TagClassConfig) -> TagStream {
    let bytes = source.as_bytes();
    let len = bytes.len();
    let mut events = Vec::new();
    let mut text_runs = Vec::new();
    let mut pos = 0usize;
    let mut text_start = 0usize;

    let flush_text = |from: usize, to: usize, runs: &mut Vec<TextRun>| {
        if to > from {
            runs.push(TextRun {
                span: from..to,
                text: decode_entities(&source[from..to]),
            });
        }
    };

    while pos < len {
        if bytes[pos] != b'<' {
            pos += 1;
            continue;
        }
        let next = bytes.get(pos + 1).copied();
        let construct_end = match next {
            Some(b'!') => {
                flush_text(text_start, pos, &mut text_runs);
                Some(skip_markup_declaration(source, pos))
            }
            Some(b'?') => {
                flush_text(text_start, pos, &mut text_runs);
                Some(skip_until(source, pos + 2, ">").unwrap_or(len))
            }
            Some(c) if c.is_ascii_alphabetic() => {
                flush_text(text_start, pos, &mut text_runs);
                Some(lex_tag(source, pos, false, config, &mut events))
            }
            Some(b'/') if bytes.get(pos + 2).is_some_and(|c| c.is_ascii_alphabetic()) => {
                flush_text(text_start, pos, &mut text_runs);
                Some(lex_tag(source, pos, true, config, &mut events))
            }
            _ => None,
        };
        match construct_end {
            Some(end) => {
                pos = end;
                text_start = end;
            }
            None => pos += 1, // literal '<'
        }
    }
    flush_text(text_start, len, &mut text_runs);

    TagStream { events, text_runs }
}

/// Lexes one tag starting at `start` (pointing at `<`). Returns the byte
/// position just past the construct. Emits at most one event; `<script>`
/// and `<style>` swallow their entire block without emitting anything.
fn lex_tag(
    source: &str,
    start: usize,
    closing: bool,
    config: &TagClassConfig,
    events: &mut Vec<TagEvent>,
) -> usize {
    let bytes = source.as_bytes();
    let len = bytes.len();
    let name_start = if closing { start + 2 } else { start + 1 };
    let mut i = name_start;
    while i < len && (bytes[i].is_ascii_alphanumeric() || bytes[i] == b'-' || bytes[i] == b':') {
        i += 1;
    }
    let name = source[name_start..i].to_ascii_lowercase();

    // Scan attributes to the terminating '>', honoring quotes so that a
    // '>' inside an attribute value does not end the tag.
    let mut quote: Option<u8> = None;
    let mut end = None;
    while i < len {
        let b = bytes[i];
        match quote {
            Some(q) => {
                if b == q {
                    quote = None;
                }
            }
            None => match b {
                b'"' | b'\'' => quote = Some(b),
                b'>' => {
                    end = Some(i + 1);
                    break;
                }
                _ => {}
            },
        }
        i += 1;
    }
    let Some(end) = end else {
        return len; // unterminated tag: drop it
    };

    if !closing && (name == "script" || name == "style") {
        let close_pat = format!("</{name}");
        let mut scan = end;
        while let Some(rel) = source[scan..].to_ascii_lowercase().find(&close_pat) {
            let close_start = scan + rel;
            match skip_until(source, close_start, ">") {
                Some(block_end) => return block_end,
                None => {
                    scan = close_start + close_pat.len();
                    continue;
                }
            }
        }
        return len; // unterminated block: swallow the rest
    }

    let kind = if config.is_void(&name) {
        TagKind::Void
    } else if closing {
        TagKind::Close
    } else {
        TagKind::Open
    };
    events.push(TagEvent {
        class: config.classify(&name),
        name,
        kind,
        span: start..end,
    });
    end
}

/// Skips `<!-- -->` comments, `<![CDATA[ ]]>` sections, and other `<!...>`
/// declarations (doctype). Returns the position just past the construct.
fn skip_markup_declaration(source: &str, start: usize) -> usize {
    let rest = &source[start..];
    if rest.starts_with("<!--") {
        skip_until(source, start + 4, "-->").unwrap_or(source.len())
    } else if rest.starts_with("<![CDATA[") {
        skip_until(source, start + 9, "]]>").unwrap_or(source.len())
    } else {
        skip_until(source, start + 2, ">").unwrap_or(source.len())
    }
}

fn skip_until(source: &str, from: usize, pat: &str) -> Option<usize> {
    source[from..].find(pat).map(|i| from + i + pat.len())
}

impl TagStream {
    /// Serializes the stream back to canonical markup: bare tags without
    /// attributes plus re-encoded text. Tokenizing the result reproduces
    /// the same event and text structure, which makes this useful both for
    /// diagnostics and for round-trip testing.
    pub fn to_source(&self) -> String {
        enum Piece<'a> {
            Event(&'a TagEvent),
            Text(&'a TextRun),
        }
        let mut pieces: Vec<(usize, Piece)> = self
            .events
            .iter()
            .map(|e| (e.span.start, Piece::Event(e)))
            .chain(self.text_runs.iter().map(|r| (r.span.start, Piece::Text(r))))
            .collect();
        pieces.sort_by_key(|(start, _)| *start);

        let mut out = String::new();
        for (_, piece) in pieces {
            match piece {
                Piece::Event(e) => match e.kind {
                    TagKind::Open | TagKind::Void => {
                        out.push('<');
                        out.push_str(&e.name);
                        out.push('>');
                    }
                    TagKind::Close => {
                        out.push_str("</");
                        out.push_str(&e.name);
                        out.push('>');
                    }
                },
                Piece::Text(r) => {
                    for ch in r.text.chars() {
                        match ch {
                            '<' => out.push_str("&lt;"),
                            '>' => out.push_str("&gt;"),
                            '&' => out.push_str("&amp;"),
                            c => out.push(c),
                        }
                    }
                }
            }
        }
        out
    }
}

/// Decodes named and numeric character entities against a fixed table.
/// Unknown entities pass through verbatim.
pub(crate) fn decode_entities(raw: &str) -> String {
    let mut out = String::with_capacity(raw.len());
    let bytes = raw.as_bytes();
    let mut i = 0;
    while i < bytes.len() {
        if bytes[i] == b'&' {
            // Entity bodies are short pure-ASCII; anything else ends the scan.
            let limit = (i + 34).min(bytes.len());
            let mut end = None;
            for (j, &b) in bytes.iter().enumerate().take(limit).skip(i + 1) {
                match b {
                    b';' => {
                        end = Some(j);
                        break;
                    }
                    b if b.is_ascii_alphanumeric() || b == b'#' => {}
                    _ => break,
                }
            }
            if let Some(end) = end {
                if let Some(ch) = decode_entity_body(&raw[i + 1..end]) {
                    out.push(ch);
                    i = end + 1;
                    continue;
                }
            }
            out.push('&');
            i += 1;
            continue;
        }
        let ch_len = utf8_len(bytes[i]);
        out.push_str(&raw[i..i + ch_len]);
        i += ch_len;
    }
    out
}

fn utf8_len(first: u8) -> usize {
    match first {
        b if b < 0x80 => 1,
        b if b >> 5 == 0b110 => 2,
        b if b >> 4 == 0b1110 => 3,
        _ => 4,
    }
}

fn decode_entity_body(body: &str) -> Option<char> {
    if let Some(num) = body.strip_prefix('#') {
        let code = if let Some(hex) = num.strip_prefix(['x', 'X']) {
            u32::from_str_radix(hex, 16).ok()?
        } else {
            num.parse::<u32>().ok()?
        };
        return char::from_u32(code);
    }
    let ch = match body {
        "amp" => '&',
        "lt" => '<',
        "gt" => '>',
        "quot" => '"',
        "apos" => '\'',
        "nbsp" => '\u{a0}',
        "copy" => '©',
        "reg" => '®',
        "trade" => '™',
        "mdash" => '—',
        "ndash" => '–',
        "hellip" => '…',
        "lsquo" => '\u{2018}',
        "rsquo" => '\u{2019}',
        "ldquo" => '\u{201c}',
        "rdquo" => '\u{201d}',
        "laquo" => '«',
        "raquo" => '»',
        "middot" => '·',
        "bull" => '•',
        "deg" => '°',
        "plusmn" => '±',
        "times" => '×',
        "divide" => '÷',
        "sect" => '§',
        "para" => '¶',
        "szlig" => 'ß',
        "agrave" => 'à',
        "eacute" => 'é',
        "egrave" => 'è',
        "ccedil" => 'ç',
        "auml" => 'ä',
        "ouml" => 'ö',
        "uuml" => 'ü',
        "ntilde" => 'ñ',
        "oslash" => 'ø',
        "aring" => 'å',
        "aelig" => 'æ',
        "pound" => '£',
        "euro" => '€',
        "cent" => '¢',
        "yen" => '¥',
        "minus" => '−',
        "le" => '≤',
        "ge" => '≥',
        "ne" => '≠',
        "larr" => '←',
        "rarr" => '→',
        _ => return None,
    };
    Some(ch)
}
