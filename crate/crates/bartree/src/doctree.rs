//! Whole-document layout tree for anchoring and extracting attributes.
//!
//! Fingerprints summarize a page; they cannot point back into it. For
//! extraction the harvester keeps, per attribute, a path of
//! `(name, depth, nth-of-same-name)` steps from the root down to the
//! node that held the attribute text when the target was registered. On a
//! later capture of the same template the path resolves to the matching
//! node and its text is pulled out, whatever that text now says.
//!
//! The tree is built from a raw tokenized stream: text-format and void
//! tags contribute no nodes, mismatched closers recover the same way the
//! depth-profile builder does, so sibling pages land on identical shapes.

use serde::{Deserialize, Serialize};
use std::ops::Range;

use crate::lexer::{TagClass, TagKind, TagStream};
use crate::roi::NormalizedDoc;

/// One step of an anchor path: take the `nth` child named `name` of the
/// current node. `depth` is recorded for verification — a step that
/// resolves at the wrong depth means the template moved underneath us.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct AnchorStep {
    pub name: String,
    pub depth: usize,
    pub nth: usize,
}

#[derive(Debug, Clone)]
pub struct DocNode {
    pub name: String,
    pub depth: usize,
    pub parent: Option<usize>,
    pub children: Vec<usize>,
    /// Source span from the opening tag to the end of the closing tag
    /// (or to end of input when never closed).
    pub span: Range<usize>,
    /// Index among same-name siblings, in document order.
    pub nth: usize,
}

pub struct DocTree {
    nodes: Vec<DocNode>,
    roots: Vec<usize>,
    norm: NormalizedDoc,
}

impl DocTree {
    /// Builds the tree from a tokenized page. Never fails; a page without
    /// structure yields an empty tree.
    pub fn build(stream: &TagStream) -> Self {
        let eof = stream
            .events
            .iter()
            .map(|e| e.span.end)
            .chain(stream.text_runs.iter().map(|r| r.span.end))
            .max()
            .unwrap_or(0);

        let mut nodes: Vec<DocNode> = Vec::new();
        let mut roots: Vec<usize> = Vec::new();
        let mut stack: Vec<usize> = Vec::new();

        for e in &stream.events {
            if e.class == TagClass::TextFormat || e.kind == TagKind::Void {
                continue;
            }
            match e.kind {
                TagKind::Open => {
                    let parent = stack.last().copied();
                    let siblings: &[usize] = match parent {
                        Some(p) => &nodes[p].children,
                        None => &roots,
                    };
                    let nth =
                        siblings.iter().filter(|&&s| nodes[s].name == e.name).count();
                    let idx = nodes.len();
                    nodes.push(DocNode {
                        name: e.name.clone(),
                        depth: stack.len(),
                        parent,
                        children: Vec::new(),
                        span: e.span.start..eof,
                        nth,
                    });
                    match parent {
                        Some(p) => nodes[p].children.push(idx),
                        None => roots.push(idx),
                    }
                    stack.push(idx);
                }
                TagKind::Close => {
                    if let Some(pos) = stack.iter().rposition(|&i| nodes[i].name == e.name) {
                        // unclosed descendants end where the enclosing
                        // closer begins; the matched node swallows it
                        for &i in &stack[pos + 1..] {
                            nodes[i].span.end = e.span.start;
                        }
                        nodes[stack[pos]].span.end = e.span.end;
                        stack.truncate(pos);
                    }
                }
                TagKind::Void => unreachable!(),
            }
        }

        DocTree { nodes, roots, norm: NormalizedDoc::build(stream) }
    }

    pub fn nodes(&self) -> &[DocNode] {
        &self.nodes
    }

    pub fn roots(&self) -> &[usize] {
        &self.roots
    }

    /// The deepest node whose span contains `[start, end)`; ties go to
    /// the tightest span, then to document order.
    pub fn deepest_containing(&self, start: usize, end: usize) -> Option<usize> {
        self.nodes
            .iter()
            .enumerate()
            .filter(|(_, n)| n.span.start <= start && end <= n.span.end)
            .min_by_key(|(i, n)| (usize::MAX - n.depth, n.span.len(), *i))
            .map(|(i, _)| i)
    }

    /// The root-to-node anchor path.
    pub fn path_to(&self, mut idx: usize) -> Vec<AnchorStep> {
        let mut rev = Vec::new();
        loop {
            let n = &self.nodes[idx];
            rev.push(AnchorStep { name: n.name.clone(), depth: n.depth, nth: n.nth });
            match n.parent {
                Some(p) => idx = p,
                None => break,
            }
        }
        rev.reverse();
        rev
    }

    /// Walks an anchor path down from the root. Returns `None` when a
    /// step finds no matching child or lands at an unexpected depth.
    pub fn resolve(&self, path: &[AnchorStep]) -> Option<usize> {
        let mut current: Option<usize> = None;
        for step in path {
            let group: &[usize] = match current {
                Some(i) => &self.nodes[i].children,
                None => &self.roots,
            };
            let found = group
                .iter()
                .copied()
                .filter(|&i| self.nodes[i].name == step.name)
                .nth(step.nth)?;
            if self.nodes[found].depth != step.depth {
                return None;
            }
            current = Some(found);
        }
        current
    }

    /// The normalized text inside a node, entity-decoded and
    /// whitespace-collapsed exactly like region location. Boundary
    /// whitespace is a run-join artifact, never content, so it is
    /// trimmed.
    pub fn node_text(&self, idx: usize) -> String {
        let span = &self.nodes[idx].span;
        let (lo, hi) = self.norm.char_range_within(span.start, span.end);
        self.norm.slice_chars(lo, hi).trim().to_string()
    }

    /// Anchor path for a source span: deepest containing node, as a path.
    pub fn anchor_for_span(&self, start: usize, end: usize) -> Option<Vec<AnchorStep>> {
        self.deepest_containing(start, end).map(|i| self.path_to(i))
    }

    /// Resolves a stored path and extracts the node's current text.
    pub fn extract(&self, path: &[AnchorStep]) -> Option<String> {
        self.resolve(path).map(|i| self.node_text(i))
    }
}
