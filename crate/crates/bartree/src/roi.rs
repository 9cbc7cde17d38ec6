//! Region-of-interest location.
//!
//! The pattern for a page is keyed on a human-supplied piece of *displayed*
//! text (typically a pasted sentence, or title + authors + abstract for a
//! publication page). To find it again in page source, both sides are
//! normalized the same way: entities decoded, whitespace runs collapsed to
//! single spaces, ends trimmed. Matching runs over the concatenation of
//! normalized text runs, so a region may cross tag boundaries: consecutive
//! runs separated only by text-format tags join seamlessly (`Fi<b>re</b>`
//! matches "Fire") while any structural tag between runs acts as a word
//! separator, which is how a browser renders them.
//!
//! Spans map back to source bytes at text-run granularity: the located
//! region runs from the start of the run holding its first character to
//! the end of the run holding its last. Runs without entities map
//! per-character exactly; runs that decoded entities fall back to whole-run
//! spans.

use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};
use thiserror::Error;

use crate::lexer::{decode_entities, TagClass, TagStream};

#[derive(Debug, Error, PartialEq, Eq)]
pub enum RoiError {
    #[error("region text not found in page")]
    NotFound,
    #[error("region text occurs {count} times; give an occurrence index to disambiguate")]
    Ambiguous { count: usize },
    #[error("attribute {0:?} not found inside the located region")]
    SubRoiNotFound(String),
    #[error("invalid region spec: {0}")]
    InvalidSpec(String),
}

/// What to look for: the region text plus labeled attribute snippets that
/// must occur, in order, inside it.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct RoiSpec {
    roi_text: String,
    attributes: Vec<(String, String)>,
    occurrence: Option<usize>,
}

impl RoiSpec {
    /// Validates and builds a spec. The region text must be non-empty after
    /// normalization; every attribute text must be a non-empty normalized
    /// substring of it; labels must be unique.
    pub fn new(
        roi_text: impl Into<String>,
        attributes: Vec<(String, String)>,
        occurrence: Option<usize>,
    ) -> Result<Self, RoiError> {
        let roi_text = roi_text.into();
        let norm = normalize_text(&roi_text);
        if norm.is_empty() {
            return Err(RoiError::InvalidSpec("region text is empty after normalization".into()));
        }
        let mut seen = std::collections::BTreeSet::new();
        for (label, sub) in &attributes {
            if label.is_empty() {
                return Err(RoiError::InvalidSpec("empty attribute label".into()));
            }
            if !seen.insert(label.clone()) {
                return Err(RoiError::InvalidSpec(format!("duplicate attribute label {label:?}")));
            }
            let sub_norm = normalize_text(sub);
            if sub_norm.is_empty() {
                return Err(RoiError::InvalidSpec(format!("attribute {label:?} is empty after normalization")));
            }
            if !norm.contains(&sub_norm) {
                return Err(RoiError::InvalidSpec(format!(
                    "attribute {label:?} does not occur in the region text"
                )));
            }
        }
        Ok(RoiSpec { roi_text, attributes, occurrence })
    }

    pub fn roi_text(&self) -> &str {
        &self.roi_text
    }

    pub fn attributes(&self) -> &[(String, String)] {
        &self.attributes
    }

    pub fn occurrence(&self) -> Option<usize> {
        self.occurrence
    }
}

/// A located region: byte offsets into the page source plus the normalized
/// text that matched.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct RoiSpan {
    pub start: usize,
    pub end: usize,
    pub matched_text: String,
}

/// Entity-decodes, collapses whitespace runs to single spaces, trims ends.
pub fn normalize_text(raw: &str) -> String {
    let decoded = decode_entities(raw);
    let mut out = String::with_capacity(decoded.len());
    let mut pending_space = false;
    for ch in decoded.chars() {
        if ch.is_whitespace() {
            pending_space = !out.is_empty();
        } else {
            if pending_space {
                out.push(' ');
                pending_space = false;
            }
            out.push(ch);
        }
    }
    out
}

/// Hex SHA-256 of the normalized region text; stable identity for a
/// region independent of page layout.
pub fn digest(roi_text: &str) -> String {
    let mut hasher = Sha256::new();
    hasher.update(normalize_text(roi_text).as_bytes());
    hex::encode(hasher.finalize())
}

/// Finds the region described by `spec` in the stream. Fails with
/// [`RoiError::Ambiguous`] when the text occurs more than once and the spec
/// names no occurrence index.
pub fn locate_roi(stream: &TagStream, spec: &RoiSpec) -> Result<RoiSpan, RoiError> {
    let doc = NormalizedDoc::build(stream);
    let needle = normalize_text(&spec.roi_text);
    let matches = doc.find_all(&needle);
    let chosen = match (matches.len(), spec.occurrence) {
        (0, _) => return Err(RoiError::NotFound),
        (n, Some(k)) if k < n => matches[k],
        (_, Some(_)) => return Err(RoiError::NotFound),
        (1, None) => matches[0],
        (n, None) => return Err(RoiError::Ambiguous { count: n }),
    };
    let last = chosen + needle.chars().count() - 1;
    let first_run = doc.stops[chosen].run;
    let last_run = doc.stops[last].run;
    Ok(RoiSpan {
        start: stream.text_runs[first_run].span.start,
        end: stream.text_runs[last_run].span.end,
        matched_text: needle,
    })
}

/// Locates every attribute inside an already-located region, left to
/// right, each search resuming just past the previous match. Returns
/// `(label, span)` pairs in spec order.
pub fn locate_subrois(
    stream: &TagStream,
    roi: &RoiSpan,
    spec: &RoiSpec,
) -> Result<Vec<(String, RoiSpan)>, RoiError> {
    let doc = NormalizedDoc::build(stream);
    let (seg_start, seg_end) = doc.char_range_within(roi.start, roi.end);
    let mut cursor = seg_start;
    let mut found = Vec::with_capacity(spec.attributes.len());
    for (label, sub) in &spec.attributes {
        let needle = normalize_text(sub);
        let hit = doc
            .find_all(&needle)
            .into_iter()
            .find(|&c| c >= cursor && c + needle.chars().count() <= seg_end);
        let Some(at) = hit else {
            return Err(RoiError::SubRoiNotFound(label.clone()));
        };
        let n_chars = needle.chars().count();
        let last = at + n_chars - 1;
        found.push((
            label.clone(),
            RoiSpan {
                start: doc.stops[at].src_start,
                end: doc.stops[last].src_end,
                matched_text: needle,
            },
        ));
        cursor = at + n_chars;
    }
    Ok(found)
}

/// One character of the normalized document: where it came from.
#[derive(Debug, Clone, Copy)]
struct CharStop {
    run: usize,
    src_start: usize,
    src_end: usize,
}

/// The concatenation of a stream's normalized text runs, with a per-character
/// map back to source positions.
pub(crate) struct NormalizedDoc {
    pub(crate) text: String,
    stops: Vec<CharStop>,
    /// Byte offset in `text` of each character, for byte->char conversion.
    char_bytes: Vec<usize>,
}

impl NormalizedDoc {
    pub(crate) fn build(stream: &TagStream) -> Self {
        let runs = &stream.text_runs;
        let mut doc = NormalizedDoc {
            text: String::new(),
            stops: Vec::new(),
            char_bytes: Vec::new(),
        };
        // Pending collapsed whitespace, anchored at the first whitespace
        // source position seen since the last emitted character.
        let mut pending: Option<CharStop> = None;

        for (ri, run) in runs.iter().enumerate() {
            if ri > 0 && !doc.text.is_empty() && separator_between(stream, ri - 1, ri) {
                pending.get_or_insert(CharStop {
                    run: ri,
                    src_start: run.span.start,
                    src_end: run.span.start,
                });
            }
            // Entity-free runs map characters to exact source bytes; runs
            // that decoded entities fall back to whole-run spans.
            let exact = run.text.len() == run.span.len();
            let mut offset = 0usize;
            for ch in run.text.chars() {
                let stop = if exact {
                    CharStop {
                        run: ri,
                        src_start: run.span.start + offset,
                        src_end: run.span.start + offset + ch.len_utf8(),
                    }
                } else {
                    CharStop { run: ri, src_start: run.span.start, src_end: run.span.end }
                };
                offset += ch.len_utf8();
                if ch.is_whitespace() {
                    if !doc.text.is_empty() {
                        pending.get_or_insert(stop);
                    }
                } else {
                    if let Some(p) = pending.take() {
                        doc.push(' ', p);
                    }
                    doc.push(ch, stop);
                }
            }
        }
        doc
    }

    fn push(&mut self, ch: char, stop: CharStop) {
        self.char_bytes.push(self.text.len());
        self.text.push(ch);
        self.stops.push(stop);
    }

    /// All (possibly overlapping) occurrences of `needle`, as character
    /// indices in ascending order.
    pub(crate) fn find_all(&self, needle: &str) -> Vec<usize> {
        let mut out = Vec::new();
        if needle.is_empty() {
            return out;
        }
        let step = needle.chars().next().map(|c| c.len_utf8()).unwrap_or(1);
        let mut from = 0usize;
        while from <= self.text.len() {
            match self.text[from..].find(needle) {
                Some(rel) => {
                    let at = from + rel;
                    out.push(self.byte_to_char(at));
                    from = at + step;
                }
                None => break,
            }
        }
        out
    }

    fn byte_to_char(&self, byte: usize) -> usize {
        self.char_bytes.binary_search(&byte).expect("match starts on a char boundary")
    }

    /// Contiguous character range whose source positions fall inside
    /// `[start, end)`.
    pub(crate) fn char_range_within(&self, start: usize, end: usize) -> (usize, usize) {
        let lo = self.stops.partition_point(|s| s.src_start < start);
        let hi = self.stops.partition_point(|s| s.src_end <= end);
        (lo, hi.max(lo))
    }

    /// The normalized text between two character positions.
    pub(crate) fn slice_chars(&self, lo: usize, hi: usize) -> &str {
        let b0 = self.char_bytes.get(lo).copied().unwrap_or(self.text.len());
        let b1 = self.char_bytes.get(hi).copied().unwrap_or(self.text.len());
        &self.text[b0..b1]
    }
}

/// True when any structural (non-text-format) tag sits between two
/// consecutive text runs; such tags render as breaks between words.
fn separator_between(stream: &TagStream, left: usize, right: usize) -> bool {
    let gap_start = stream.text_runs[left].span.end;
    let gap_end = stream.text_runs[right].span.start;
    let from = stream.events.partition_point(|e| e.span.start < gap_start);
    stream.events[from..]
        .iter()
        .take_while(|e| e.span.end <= gap_end)
        .any(|e| e.class != TagClass::TextFormat)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::lexer::tokenize;

    fn spec(text: &str) -> RoiSpec {
        RoiSpec::new(text, vec![], None).unwrap()
    }

    #[test]
    fn normalize_collapses_and_decodes() {
        assert_eq!(normalize_text("  Fire\n &amp; Ice "), "Fire & Ice");
        assert_eq!(normalize_text("a&amp;b"), "a&b");
        assert_eq!(normalize_text("\t\n "), "");
        assert_eq!(normalize_text("one\u{a0}\u{a0}two"), "one two");
    }

    #[test]
    fn locates_single_occurrence() {
        let stream = tokenize("<div>A<p>R</p>B</div>");
        let span = locate_roi(&stream, &spec("R")).unwrap();
        assert_eq!((span.start, span.end), (9, 10));
        assert_eq!(span.matched_text, "R");
    }

    #[test]
    fn missing_text_is_not_found() {
        let stream = tokenize("<p>something else</p>");
        assert_eq!(locate_roi(&stream, &spec("R")), Err(RoiError::NotFound));
    }

    #[test]
    fn duplicate_text_is_ambiguous_without_index() {
        let stream = tokenize("<p>x</p><p>x</p>");
        assert_eq!(locate_roi(&stream, &spec("x")), Err(RoiError::Ambiguous { count: 2 }));

        let second = RoiSpec::new("x", vec![], Some(1)).unwrap();
        let span = locate_roi(&stream, &second).unwrap();
        assert_eq!((span.start, span.end), (11, 12));

        let missing = RoiSpec::new("x", vec![], Some(2)).unwrap();
        assert_eq!(locate_roi(&stream, &missing), Err(RoiError::NotFound));
    }

    #[test]
    fn region_may_cross_tag_boundaries() {
        let stream = tokenize("<h1>Fire</h1><p>and Ice</p>");
        let span = locate_roi(&stream, &spec("Fire and Ice")).unwrap();
        assert_eq!(span.start, 4); // start of "Fire" run
        assert_eq!(span.end, 23); // end of "and Ice" run
        assert_eq!(span.matched_text, "Fire and Ice");
    }

    #[test]
    fn text_format_tags_do_not_split_words() {
        let stream = tokenize("<p>Fi<b>re</b> and Ice</p>");
        let span = locate_roi(&stream, &spec("Fire and Ice")).unwrap();
        assert_eq!(span.matched_text, "Fire and Ice");
        assert_eq!(span.start, 3);
    }

    #[test]
    fn structural_tags_separate_words() {
        let stream = tokenize("<li>one</li><li>two</li>");
        assert!(locate_roi(&stream, &spec("onetwo")).is_err());
        assert!(locate_roi(&stream, &spec("one two")).is_ok());
    }

    #[test]
    fn subrois_in_order_within_region() {
        let stream = tokenize("<div><h1>Title</h1><p>Alice</p><p>Deep text</p></div>");
        let sp = RoiSpec::new(
            "Title Alice Deep text",
            vec![
                ("title".into(), "Title".into()),
                ("authors".into(), "Alice".into()),
                ("abstract".into(), "Deep text".into()),
            ],
            None,
        )
        .unwrap();
        let roi = locate_roi(&stream, &sp).unwrap();
        let subs = locate_subrois(&stream, &roi, &sp).unwrap();
        assert_eq!(subs.len(), 3);
        // pairwise non-overlapping and sorted, all inside the region
        for w in subs.windows(2) {
            assert!(w[0].1.end <= w[1].1.start);
        }
        for (_, s) in &subs {
            assert!(s.start >= roi.start && s.end <= roi.end);
        }
        assert_eq!(subs[0].1.matched_text, "Title");
    }

    #[test]
    fn whole_region_attribute_equals_region_span() {
        let stream = tokenize("<p>x</p>");
        let sp = RoiSpec::new("x", vec![("all".into(), "x".into())], None).unwrap();
        let roi = locate_roi(&stream, &sp).unwrap();
        let subs = locate_subrois(&stream, &roi, &sp).unwrap();
        assert_eq!(subs[0].1.start, roi.start);
        assert_eq!(subs[0].1.end, roi.end);
    }

    #[test]
    fn missing_attribute_is_reported_by_label() {
        let stream = tokenize("<p>Title music</p><p>Title</p>");
        // left-to-right search: after consuming "music" there is no later
        // "Title" inside the region, so label "b" must be reported missing
        let sp = RoiSpec::new(
            "Title music",
            vec![("a".into(), "music".into()), ("b".into(), "Title".into())],
            Some(0),
        )
        .unwrap();
        let roi = locate_roi(&stream, &sp).unwrap();
        let err = locate_subrois(&stream, &roi, &sp).unwrap_err();
        assert_eq!(err, RoiError::SubRoiNotFound("b".into()));
    }

    #[test]
    fn spec_validation() {
        assert!(RoiSpec::new("  \n ", vec![], None).is_err());
        assert!(RoiSpec::new("abc", vec![("x".into(), "zz".into())], None).is_err());
        assert!(RoiSpec::new(
            "abc",
            vec![("x".into(), "a".into()), ("x".into(), "b".into())],
            None
        )
        .is_err());
        // normalized containment is what counts
        assert!(RoiSpec::new("a  b", vec![("x".into(), "a b".into())], None).is_ok());
    }

    #[test]
    fn digest_is_normalization_invariant() {
        assert_eq!(digest("Fire  \n Ice"), digest("Fire Ice"));
        assert_ne!(digest("Fire Ice"), digest("Ice Fire"));
        assert_eq!(digest("x").len(), 64);
    }
}
