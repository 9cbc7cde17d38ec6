//! Reverse analysis of page structure around a located region.
//!
//! Instead of parsing a page top-down, the page is split at the region of
//! interest and the surrounding template is read outward from there. The
//! upper part covers everything before the region, the lower part
//! everything after; both are cleaned down to layout tags. Two kinds of
//! measurements come out:
//!
//! * **tag balance** ([`count_tags`]): pairing tags within one part,
//!   scanning from the region outward. Tags that find their partner are
//!   structurally inert; the unpaired surplus Σ is what the template
//!   skeleton contributes on that side. Comparing the two sides
//!   ([`symmetry`]) gives Δ = Σ_upper − Σ_lower.
//! * **depth profile** ([`depth_profile`]): the unpaired opens of the
//!   upper part form the region's ancestor chain; paired subtrees from
//!   both parts attach as siblings at their nesting depths. Counting
//!   nodes per level yields the parallel-attribute counts P_d.

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::lexer::{clean, CleanPolicy, TagKind, TagStream};
use crate::roi::RoiSpan;

#[derive(Debug, Error, PartialEq, Eq)]
pub enum ReverseError {
    #[error("no layout structure outside the region")]
    DegenerateProfile,
    #[error("invalid depth profile: {0}")]
    InvalidProfile(String),
}

/// The page split at the region: layout-only tag streams before and after.
#[derive(Debug, Clone)]
pub struct Parts {
    pub upper: TagStream,
    pub lower: TagStream,
}

/// Which side of the region a part came from; determines the scan
/// direction used for pairing (always nearest-to-region first).
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum PartSide {
    Upper,
    Lower,
}

/// Tag balance of one part. `n_ot` counts open-tags — every opener plus
/// any closer that failed to pair (a partnerless tag is an open-tag no
/// matter which way it points). `n_ct` counts closed-tags: closers that
/// found their opener within the part. The surplus `sigma = n_ot - n_ct`
/// equals the number of unpaired tags, i.e. the number of trees the part
/// contributes around the region.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct TagCounts {
    pub n_ot: usize,
    pub n_ct: usize,
    pub sigma: i64,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum Symmetry {
    FullySymmetric,
    LowerAsymmetric,
    UpperAsymmetric,
}

/// Δ together with its sign classification.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct SymmetryClass {
    pub delta: i64,
    pub class: Symmetry,
}

/// Node counts per depth for the combined template tree around the region.
///
/// Depth 0 is the document root. `counts[d]` is P_d, the number of nodes
/// at depth `d`; the region itself anchors as an uncounted marker at
/// `roi_depth`. `d_max` is the number of populated levels, which is also
/// the depth of the deepest (content) level of the bar representation.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct DepthProfile {
    counts: Vec<u32>,
    roi_depth: usize,
}

impl DepthProfile {
    pub fn new(counts: Vec<u32>, roi_depth: usize) -> Result<Self, ReverseError> {
        if counts.contains(&0) {
            return Err(ReverseError::InvalidProfile("every P_d must be at least 1".into()));
        }
        if roi_depth > counts.len() {
            return Err(ReverseError::InvalidProfile(format!(
                "region depth {} exceeds profile depth {}",
                roi_depth,
                counts.len()
            )));
        }
        Ok(DepthProfile { counts, roi_depth })
    }

    /// The profile of a page with no layout structure at all.
    pub fn empty() -> Self {
        DepthProfile { counts: Vec::new(), roi_depth: 0 }
    }

    pub fn d_max(&self) -> usize {
        self.counts.len()
    }

    pub fn counts(&self) -> &[u32] {
        &self.counts
    }

    pub fn roi_depth(&self) -> usize {
        self.roi_depth
    }
}

/// Splits a stream at the located region. Events strictly before the
/// region go to the upper part, events strictly after to the lower; tags
/// inside the region are template-irrelevant and dropped. Both parts are
/// cleaned to layout-only form.
pub fn split(stream: &TagStream, roi: &RoiSpan) -> Parts {
    let mut upper = TagStream::default();
    let mut lower = TagStream::default();
    for e in &stream.events {
        if e.span.end <= roi.start {
            upper.events.push(e.clone());
        } else if e.span.start >= roi.end {
            lower.events.push(e.clone());
        }
    }
    Parts {
        upper: clean(&upper, CleanPolicy::KeepLayoutOnly),
        lower: clean(&lower, CleanPolicy::KeepLayoutOnly),
    }
}

/// Pairs tags within one part and reports the balance.
///
/// The scan starts at the region boundary and moves outward: right to
/// left for the upper part, left to right for the lower. A closer pairs
/// only with the nearest pending opener of the same name (and vice versa
/// in the mirrored scan); mismatched names never pair and count as open.
/// Void tags take no partner and are excluded entirely.
pub fn count_tags(part: &TagStream, side: PartSide) -> TagCounts {
    let mut events: Vec<(&str, TagKind)> = part
        .events
        .iter()
        .filter(|e| e.kind != TagKind::Void)
        .map(|e| (e.name.as_str(), e.kind))
        .collect();
    if side == PartSide::Upper {
        events.reverse();
    }
    // In the outward scan, one kind awaits a partner and the other
    // resolves it: openers await closers in the lower part, closers await
    // openers in the upper part.
    let await_kind = match side {
        PartSide::Lower => TagKind::Open,
        PartSide::Upper => TagKind::Close,
    };

    let mut opens = 0usize;
    let mut closes = 0usize;
    let mut pairs = 0usize;
    let mut pending: Vec<&str> = Vec::new();
    for (name, kind) in events {
        match kind {
            TagKind::Open => opens += 1,
            TagKind::Close => closes += 1,
            TagKind::Void => unreachable!(),
        }
        if kind == await_kind {
            pending.push(name);
        } else if pending.last() == Some(&name) {
            pending.pop();
            pairs += 1;
        }
    }

    let unpaired_closes = closes - pairs;
    let n_ot = opens + unpaired_closes;
    TagCounts { n_ot, n_ct: pairs, sigma: n_ot as i64 - pairs as i64 }
}

/// Classifies Δ = Σ_upper − Σ_lower by sign.
pub fn symmetry(sigma_upper: i64, sigma_lower: i64) -> SymmetryClass {
    let delta = sigma_upper - sigma_lower;
    let class = match delta.cmp(&0) {
        std::cmp::Ordering::Equal => Symmetry::FullySymmetric,
        std::cmp::Ordering::Less => Symmetry::LowerAsymmetric,
        std::cmp::Ordering::Greater => Symmetry::UpperAsymmetric,
    };
    SymmetryClass { delta, class }
}

/// Builds the combined template tree and counts nodes per depth.
///
/// The upper part is replayed in document order; whatever remains open
/// when it ends is the region's ancestor chain, and the region anchors
/// beneath it (that chain length is `roi_depth`). The lower part then
/// continues on the same stack: its closers walk back up the chain and
/// its complete subtrees attach wherever the walk currently stands. A
/// closer pops through unclosed descendants to the nearest matching open
/// (browser-style recovery); an unmatched closer is ignored. Should a
/// second top-level tree appear, everything is wrapped under a virtual
/// root so depth 0 always holds exactly one node.
pub fn depth_profile(parts: &Parts) -> Result<DepthProfile, ReverseError> {
    fn replay<'a>(
        events: impl Iterator<Item = (&'a str, TagKind)>,
        stack: &mut Vec<&'a str>,
        node_depths: &mut Vec<usize>,
        top_level_nodes: &mut usize,
    ) {
        for (name, kind) in events {
            match kind {
                TagKind::Open => {
                    if stack.is_empty() {
                        *top_level_nodes += 1;
                    }
                    node_depths.push(stack.len());
                    stack.push(name);
                }
                TagKind::Close => {
                    if let Some(pos) = stack.iter().rposition(|&n| n == name) {
                        stack.truncate(pos);
                    }
                }
                TagKind::Void => {}
            }
        }
    }

    let mut stack: Vec<&str> = Vec::new();
    let mut node_depths: Vec<usize> = Vec::new();
    let mut top_level_nodes = 0usize;

    let upper = parts.upper.events.iter().map(|e| (e.name.as_str(), e.kind));
    replay(upper, &mut stack, &mut node_depths, &mut top_level_nodes);
    let mut roi_depth = stack.len();
    let lower = parts.lower.events.iter().map(|e| (e.name.as_str(), e.kind));
    replay(lower, &mut stack, &mut node_depths, &mut top_level_nodes);

    if node_depths.is_empty() {
        return Err(ReverseError::DegenerateProfile);
    }

    let shift = usize::from(top_level_nodes > 1);
    let deepest = node_depths.iter().copied().max().unwrap_or(0);
    let mut counts = vec![0u32; deepest + 1 + shift];
    if shift == 1 {
        counts[0] = 1;
    }
    for d in node_depths {
        counts[d + shift] += 1;
    }
    roi_depth += shift;

    DepthProfile::new(counts, roi_depth)
}
