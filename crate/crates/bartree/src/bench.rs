//! Synthetic corpus generation and the desk-scale measurement harness.
//!
//! Pages are generated from a seeded RNG as nested layout trees of a
//! requested depth with random level widths, a unique sentinel sentence
//! as the region of interest, and filler text elsewhere. Because the
//! generator knows the tree it emitted, every page comes with an
//! independently derived ground-truth depth profile — the pipeline can
//! be checked against it rather than against itself.
//!
//! Mutations are single structural edits applied to the generated tree
//! (never to the region text), each with a predictable effect on the
//! measured variables. `PermuteSiblings` is the deliberate adversary: it
//! trades sibling counts between the two deepest levels in proportions
//! chosen so that `A_total` is preserved when `r = 0`, which is exactly
//! the blind spot of the scalar comparison mode.

use std::collections::BTreeMap;
use std::time::Instant;

use rand::prelude::*;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::bar::{parse_rational, BarParams};
use crate::detect::CompareMode;
use crate::fetch::MemoryFetcher;
use crate::harvest::{fingerprint_page, roi_spec_for, Harvester, HarvestError};
use crate::lexer::TagClassConfig;
use crate::reverse::DepthProfile;
use crate::store::{Registry, TargetConfig};

#[derive(Debug, Error)]
pub enum BenchError {
    #[error("mutation not applicable: {0}")]
    Inapplicable(String),
    #[error("invalid bench config: {0}")]
    InvalidConfig(String),
    #[error("pipeline failure during bench: {0}")]
    Pipeline(String),
}

impl From<HarvestError> for BenchError {
    fn from(e: HarvestError) -> Self {
        BenchError::Pipeline(e.to_string())
    }
}

const NAME_PALETTE: &[&str] = &["div", "section", "ul", "li", "p", "span"];

/// Maximum page depth the generator accepts.
pub const MAX_GEN_DEPTH: usize = 25;

#[derive(Debug, Clone)]
struct GenNode {
    name: String,
    text: Option<String>,
    children: Vec<GenNode>,
}

impl GenNode {
    fn leaf(name: &str, text: String) -> Self {
        GenNode { name: name.to_string(), text: Some(text), children: Vec::new() }
    }

    fn render(&self, out: &mut String) {
        out.push('<');
        out.push_str(&self.name);
        out.push('>');
        if let Some(t) = &self.text {
            out.push_str(t);
        }
        for c in &self.children {
            c.render(out);
        }
        out.push_str("</");
        out.push_str(&self.name);
        out.push('>');
    }

    fn follow_mut(&mut self, path: &[usize]) -> &mut GenNode {
        let mut cur = self;
        for &i in path {
            cur = &mut cur.children[i];
        }
        cur
    }
}

/// A generated page: rendered bytes, the embedded region sentence, and
/// the ground-truth profile derived from the generator's own tree.
#[derive(Debug, Clone)]
pub struct SyntheticPage {
    pub html: String,
    pub roi_text: String,
    pub profile: DepthProfile,
    tree: GenNode,
}

impl SyntheticPage {
    fn from_tree(tree: GenNode, roi_text: String) -> Self {
        let mut html = String::new();
        tree.render(&mut html);
        let profile = profile_from_tree(&tree, &roi_text);
        SyntheticPage { html, roi_text, profile, tree }
    }
}

/// Ground truth, independent of the measuring pipeline: walk the tree,
/// count nodes per depth, anchor the region under its holder.
fn profile_from_tree(tree: &GenNode, roi_text: &str) -> DepthProfile {
    fn walk(node: &GenNode, depth: usize, counts: &mut Vec<u32>, roi_depth: &mut usize, roi: &str) {
        if counts.len() <= depth {
            counts.resize(depth + 1, 0);
        }
        counts[depth] += 1;
        if node.text.as_deref() == Some(roi) {
            *roi_depth = depth + 1;
        }
        for c in &node.children {
            walk(c, depth + 1, counts, roi_depth, roi);
        }
    }
    let mut counts = Vec::new();
    let mut roi_depth = 0;
    walk(tree, 0, &mut counts, &mut roi_depth, roi_text);
    DepthProfile::new(counts, roi_depth).expect("generated trees are contiguous")
}

/// Child index path from the root to the node holding the region text.
fn chain_path(tree: &GenNode, roi_text: &str) -> Vec<usize> {
    fn dfs(node: &GenNode, roi: &str, path: &mut Vec<usize>) -> bool {
        if node.text.as_deref() == Some(roi) {
            return true;
        }
        for (i, c) in node.children.iter().enumerate() {
            path.push(i);
            if dfs(c, roi, path) {
                return true;
            }
            path.pop();
        }
        false
    }
    let mut path = Vec::new();
    assert!(dfs(tree, roi_text, &mut path), "region text missing from tree");
    path
}

fn pick_name(rng: &mut ChaCha8Rng) -> String {
    NAME_PALETTE[rng.gen_range(0..NAME_PALETTE.len())].to_string()
}

fn build_page(d_max: usize, rng: &mut ChaCha8Rng, terminal_pair: Option<(u32, u32)>) -> SyntheticPage {
    assert!((1..=MAX_GEN_DEPTH).contains(&d_max), "depth out of range");
    let roi_text = format!(
        "Sentinel article {} keeps this exact sentence as its region of interest",
        rng.gen::<u32>()
    );

    // level widths: root is alone; deeper levels take 1..=4 nodes, unless
    // a terminal pair is imposed (collision corpora)
    let mut widths = vec![1u32];
    for _ in 1..d_max {
        widths.push(rng.gen_range(1..=4));
    }
    if let Some((a, b)) = terminal_pair {
        assert!(d_max >= 3, "terminal pair needs a chain above it");
        widths[d_max - 2] = a;
        widths[d_max - 1] = b;
    }

    // one chain node per level carries the path down to the region
    let mut filler = 0usize;
    let mut pad = |rng: &mut ChaCha8Rng| {
        filler += 1;
        format!(
            "filler item {filler} with a line of steady prose to give the page some weight {}",
            rng.gen::<u16>()
        )
    };

    // build bottom-up; `below` holds the finished nodes of the level
    // underneath, which become children of the current chain node
    let mut below: Vec<GenNode> = Vec::new();
    for d in (0..d_max).rev() {
        let is_deepest = d == d_max - 1;
        let width = widths[d] as usize;
        let chain_at = rng.gen_range(0..width);
        let mut level: Vec<GenNode> = Vec::with_capacity(width);
        for i in 0..width {
            if i == chain_at {
                level.push(GenNode {
                    name: pick_name(rng),
                    text: Some(if is_deepest { roi_text.clone() } else { pad(rng) }),
                    children: std::mem::take(&mut below),
                });
            } else {
                level.push(GenNode::leaf(&pick_name(rng), pad(rng)));
            }
        }
        below = level;
    }
    assert_eq!(below.len(), 1, "single root");
    SyntheticPage::from_tree(below.pop().expect("single root"), roi_text)
}

/// Generates a page of the requested depth with random level widths
/// `P_d ∈ [1,4]`, a unique region sentence at the bottom of the chain,
/// and filler text elsewhere. Deterministic in `(d_max, seed)`.
pub fn generate_template(d_max: usize, seed: u64) -> SyntheticPage {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    build_page(d_max, &mut rng, None)
}

/// Like [`generate_template`], but the two deepest levels get widths from
/// the collision table, so a later [`MutationKind::PermuteSiblings`] can
/// swap them without moving `A_total` (under `r = 0`).
pub fn generate_collision_page(d_max: usize, seed: u64) -> SyntheticPage {
    assert!(d_max >= 3, "collision pages need a chain above the terminal pair");
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let pair = if rng.gen_bool(0.5) { (2, 3) } else { (3, 2) };
    build_page(d_max, &mut rng, Some(pair))
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum MutationKind {
    /// Add a paired leaf sibling next to the chain at a depth: `P_d += 1`.
    InsertNode,
    /// Remove a non-chain leaf at a depth: `P_d -= 1`.
    DeleteNode,
    /// Swap the two deepest level widths for the equal-`A_total` partner
    /// configuration: `P` changes, `A_total` (at `r = 0`) does not.
    PermuteSiblings,
    /// Wrap the region in a new node: Σ_upper and Σ_lower both grow by
    /// one, Δ is preserved.
    SymmetricDualEdit,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum Side {
    Upper,
    Lower,
    Both,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct Mutation {
    pub kind: MutationKind,
    pub side: Side,
    pub depth: usize,
}

/// Sibling counts `(P_t, P_{t+1})` at the two deepest levels.
type TerminalPair = (u32, u32);

/// Pairs with equal `Σ 1/P_t + 1/(P_t·P_{t+1})`, i.e. equal `A_total`
/// contribution when `r = 0`.
const COLLISION_SWAP: &[(TerminalPair, TerminalPair)] =
    &[((2, 3), (3, 1)), ((3, 1), (2, 3)), ((3, 2), (4, 1)), ((4, 1), (3, 2))];

/// Applies exactly one structural edit outside the region text and
/// returns the edited page (with refreshed ground truth). The region
/// sentence is preserved verbatim.
pub fn mutate(page: &SyntheticPage, mutation: &Mutation, seed: u64) -> Result<SyntheticPage, BenchError> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let chain = chain_path(&page.tree, &page.roi_text);
    let mut tree = page.tree.clone();
    let d_max = page.profile.d_max();

    match mutation.kind {
        MutationKind::InsertNode => {
            let d = mutation.depth;
            if d == 0 || d > chain.len() {
                return Err(BenchError::Inapplicable(format!(
                    "no chain parent above depth {d} to attach a sibling"
                )));
            }
            let at = match mutation.side {
                Side::Upper => chain[d - 1],
                Side::Lower => chain[d - 1] + 1,
                Side::Both => {
                    return Err(BenchError::Inapplicable(
                        "a single inserted node sits on one side only".into(),
                    ))
                }
            };
            let leaf = GenNode::leaf(&pick_name(&mut rng), format!("pad {}", rng.gen::<u32>()));
            tree.follow_mut(&chain[..d - 1]).children.insert(at, leaf);
        }
        MutationKind::DeleteNode => {
            let d = mutation.depth;
            let want_upper = match mutation.side {
                Side::Upper => true,
                Side::Lower => false,
                Side::Both => {
                    return Err(BenchError::Inapplicable(
                        "a single deleted node sits on one side only".into(),
                    ))
                }
            };
            let mut candidates: Vec<Vec<usize>> = Vec::new();
            collect_leaves(&tree, d, &mut Vec::new(), &mut candidates);
            candidates.retain(|p| {
                let on_chain = chain.len() >= p.len() && chain[..p.len()] == p[..];
                let upper = p[..] < chain[..p.len().min(chain.len())];
                !on_chain && upper == want_upper
            });
            if candidates.is_empty() {
                return Err(BenchError::Inapplicable(format!(
                    "no removable leaf at depth {d} on that side"
                )));
            }
            let victim = &candidates[rng.gen_range(0..candidates.len())];
            let (last, parent_path) = victim.split_last().expect("depth > 0 paths");
            tree.follow_mut(parent_path).children.remove(*last);
        }
        MutationKind::PermuteSiblings => {
            if d_max < 2 || mutation.depth != d_max - 2 {
                return Err(BenchError::Inapplicable(format!(
                    "sibling permutation operates on depth {} of this page",
                    d_max.saturating_sub(2)
                )));
            }
            let t = mutation.depth;
            let current = (page.profile.counts()[t], page.profile.counts()[t + 1]);
            let Some(&(_, next)) = COLLISION_SWAP.iter().find(|(from, _)| *from == current) else {
                return Err(BenchError::Inapplicable(format!(
                    "level widths {current:?} have no equal-total partner"
                )));
            };
            apply_terminal_swap(&mut tree, &chain, t, next, &mut rng);
        }
        MutationKind::SymmetricDualEdit => {
            if mutation.side != Side::Both {
                return Err(BenchError::Inapplicable(
                    "a wrap always touches both sides".into(),
                ));
            }
            let holder = tree.follow_mut(&chain);
            let wrapper = GenNode {
                name: pick_name(&mut rng),
                text: holder.text.take(),
                children: Vec::new(),
            };
            holder.children.insert(0, wrapper);
        }
    }

    Ok(SyntheticPage::from_tree(tree, page.roi_text.clone()))
}

fn collect_leaves(node: &GenNode, depth: usize, path: &mut Vec<usize>, out: &mut Vec<Vec<usize>>) {
    if path.len() == depth {
        if node.children.is_empty() {
            out.push(path.clone());
        }
        return;
    }
    for (i, c) in node.children.iter().enumerate() {
        path.push(i);
        collect_leaves(c, depth, path, out);
        path.pop();
    }
}

/// Rebuilds the two deepest levels around the preserved chain so that
/// `(P_t, P_{t+1})` becomes `target`. Requires `t >= 1` (the root level
/// never carries a collision pair).
fn apply_terminal_swap(
    tree: &mut GenNode,
    chain: &[usize],
    t: usize,
    target: (u32, u32),
    rng: &mut ChaCha8Rng,
) {
    assert!(t >= 1, "collision pairs never sit at the root level");

    // drop every depth-t node except the chain's, together with their
    // subtrees; parents of depth-t nodes are the depth-(t-1) nodes
    fn prune(node: &mut GenNode, depth: usize, t: usize, keep: &[usize], path: &mut Vec<usize>) {
        if depth + 1 == t {
            let keep_idx = (path[..] == keep[..t - 1]).then(|| keep[t - 1]);
            let mut i = 0usize;
            node.children.retain(|_| {
                let retain = Some(i) == keep_idx;
                i += 1;
                retain
            });
            return;
        }
        for (i, c) in node.children.iter_mut().enumerate() {
            path.push(i);
            prune(c, depth + 1, t, keep, path);
            path.pop();
        }
    }
    prune(tree, 0, t, chain, &mut Vec::new());

    // pruning renumbers the chain: the chain-t node is now its parent's
    // only child
    let keep_child = chain[t];
    let mut chain = chain.to_vec();
    chain[t - 1] = 0;

    // inside the surviving chain-t node, keep only the chain child
    let chain_t = tree.follow_mut(&chain[..t]);
    let mut i = 0usize;
    chain_t.children.retain(|_| {
        let retain = i == keep_child;
        i += 1;
        retain
    });

    // grow the levels back to the target widths with fresh leaves
    let (want_t, want_t1) = target;
    for n in 0..want_t.saturating_sub(1) {
        let leaf = GenNode::leaf(&pick_name(rng), format!("pad t{n} {}", rng.gen::<u32>()));
        tree.follow_mut(&chain[..t - 1]).children.push(leaf);
    }
    let chain_t = tree.follow_mut(&chain[..t]);
    for n in 0..want_t1.saturating_sub(1) {
        let leaf = GenNode::leaf(&pick_name(rng), format!("pad u{n} {}", rng.gen::<u32>()));
        chain_t.children.push(leaf);
    }
}

#[derive(Debug, Clone)]
pub struct BenchConfig {
    pub depth_classes: Vec<usize>,
    pub pages_per_class: usize,
    /// Fraction of pages per class that receive one mutation.
    pub mutation_rate: f64,
    pub modes: Vec<CompareMode>,
    pub seed: u64,
    /// Build the deliberate equal-`A_total` corpus (registers with
    /// `r = 0` and mutates via sibling permutation) instead of random
    /// structural edits.
    pub collisions: bool,
    /// Timed repetitions per page; the median is kept.
    pub timing_reps: usize,
}

impl Default for BenchConfig {
    fn default() -> Self {
        BenchConfig {
            depth_classes: vec![5, 10, 15, 20, 25],
            pages_per_class: 8,
            mutation_rate: 0.5,
            modes: vec![CompareMode::Simple, CompareMode::Full, CompareMode::FullWithDelta],
            seed: 42,
            collisions: false,
            timing_reps: 5,
        }
    }
}

/// One (depth class, mode) row. `detection_rate` is `null` when the
/// config produced no mutated samples to rate.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ClassReport {
    pub d_max: usize,
    pub mode: CompareMode,
    pub detection_rate: Option<f64>,
    pub mean_check_ms: f64,
    pub n: usize,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BenchReport {
    pub classes: Vec<ClassReport>,
    pub seed: u64,
}

impl BenchReport {
    /// Plain-text table, one row per (class, mode).
    pub fn to_table(&self) -> String {
        let mut out = String::from("d_max  mode             detection  mean_check_ms  n\n");
        for c in &self.classes {
            let rate = match c.detection_rate {
                Some(r) => format!("{:>9.3}", r),
                None => "      n/a".to_string(),
            };
            out.push_str(&format!(
                "{:>5}  {:<15}  {rate}  {:>13.4}  {:>3}\n",
                c.d_max,
                c.mode.to_string(),
                c.mean_check_ms,
                c.n
            ));
        }
        out.push_str(&format!("seed: {}\n", self.seed));
        out
    }
}

fn median(mut v: Vec<f64>) -> f64 {
    v.sort_by(|a, b| a.partial_cmp(b).expect("timings are finite"));
    if v.is_empty() {
        return 0.0;
    }
    let mid = v.len() / 2;
    if v.len() % 2 == 1 {
        v[mid]
    } else {
        (v[mid - 1] + v[mid]) / 2.0
    }
}

/// Generates a corpus per depth class, registers every page, mutates a
/// configured fraction, then rechecks each page once per mode, tallying
/// how often mutations are noticed and how long a recheck computation
/// takes (median of [`BenchConfig::timing_reps`] repetitions per page).
/// Deterministic in `(config, seed)` up to the timing fields.
pub fn run_bench(config: &BenchConfig) -> Result<BenchReport, BenchError> {
    validate(config)?;
    let mut report = BenchReport { classes: Vec::new(), seed: config.seed };
    let mut rng = ChaCha8Rng::seed_from_u64(config.seed);

    for &d_max in &config.depth_classes {
        // corpus: (page, mutated body or None)
        let n_pages = config.pages_per_class;
        let n_mutated = (config.mutation_rate * n_pages as f64).round() as usize;
        let mut pages = Vec::with_capacity(n_pages);
        for _ in 0..n_pages {
            let page = if config.collisions {
                generate_collision_page(d_max, rng.gen())
            } else {
                generate_template(d_max, rng.gen())
            };
            pages.push(page);
        }
        let mut mutated: Vec<Option<SyntheticPage>> = vec![None; n_pages];
        let mut order: Vec<usize> = (0..n_pages).collect();
        order.shuffle(&mut rng);
        for &i in order.iter().take(n_mutated) {
            mutated[i] = Some(pick_mutation(&pages[i], config.collisions, &mut rng)?);
        }

        // register the pristine corpus once
        let fetcher = MemoryFetcher::new();
        for (i, page) in pages.iter().enumerate() {
            fetcher.insert(&page_url(d_max, i), &page.html);
        }
        let mut base = Harvester::new(Registry::default(), fetcher);
        for (i, page) in pages.iter().enumerate() {
            let mut cfg =
                TargetConfig::new(&target_id(d_max, i), &page_url(d_max, i), &page.roi_text);
            if config.collisions {
                cfg.params = Some(
                    BarParams::new(
                        parse_rational("1").expect("literal"),
                        parse_rational("0").expect("literal"),
                    )
                    .expect("unit interval with zero ratio"),
                );
            }
            base.register_target(cfg)?;
        }
        let base_registry = base.into_registry();

        for &mode in &config.modes {
            // fresh harvester per mode over the post-mutation corpus, so
            // fingerprint auto-replacement in one mode never leaks into
            // the next
            let fetcher = MemoryFetcher::new();
            for (i, page) in pages.iter().enumerate() {
                let body = mutated[i].as_ref().map(|m| m.html.as_str()).unwrap_or(&page.html);
                fetcher.insert(&page_url(d_max, i), body);
            }
            let mut h = Harvester::new(base_registry.clone(), fetcher);

            let mut page_medians = Vec::with_capacity(n_pages);
            let mut hits = 0usize;
            for (i, page) in pages.iter().enumerate() {
                let id = target_id(d_max, i);
                let record = &base_registry.targets[&id];
                let spec = roi_spec_for(&record.config).expect("registered config");
                let params = record.fingerprint.params().expect("stored params");
                let body = mutated[i].as_ref().map(|m| m.html.as_str()).unwrap_or(&page.html);

                // timing: the pure recheck computation, repeated
                let mut times = Vec::with_capacity(config.timing_reps);
                for _ in 0..config.timing_reps {
                    let t0 = Instant::now();
                    let fresh = fingerprint_page(
                        body,
                        &spec,
                        &TagClassConfig::default(),
                        Some(&params),
                        "bench",
                    );
                    if let Ok(fp) = fresh {
                        let _ = crate::detect::compare(&record.fingerprint, &fp, mode);
                    }
                    times.push(t0.elapsed().as_secs_f64() * 1000.0);
                }
                page_medians.push(median(times));

                // detection: one real check through the harvester
                let (check, _action) = h.check_target(&id, Some(mode))?;
                if mutated[i].is_some() && (check.changed || !check.evaluated) {
                    hits += 1;
                }
            }

            report.classes.push(ClassReport {
                d_max,
                mode,
                detection_rate: (n_mutated > 0).then(|| hits as f64 / n_mutated as f64),
                mean_check_ms: page_medians.iter().sum::<f64>() / page_medians.len() as f64,
                n: n_pages,
            });
        }
    }
    Ok(report)
}

fn validate(config: &BenchConfig) -> Result<(), BenchError> {
    if config.depth_classes.is_empty() {
        return Err(BenchError::InvalidConfig("no depth classes".into()));
    }
    if let Some(&bad) = config.depth_classes.iter().find(|d| !(1..=MAX_GEN_DEPTH).contains(*d)) {
        return Err(BenchError::InvalidConfig(format!(
            "depth class {bad} outside 1..={MAX_GEN_DEPTH}"
        )));
    }
    if config.collisions && config.depth_classes.iter().any(|&d| d < 3) {
        return Err(BenchError::InvalidConfig("collision corpora need depth >= 3".into()));
    }
    if config.pages_per_class == 0 {
        return Err(BenchError::InvalidConfig("zero pages per class".into()));
    }
    if !(0.0..=1.0).contains(&config.mutation_rate) {
        return Err(BenchError::InvalidConfig("mutation rate outside [0, 1]".into()));
    }
    if config.modes.is_empty() {
        return Err(BenchError::InvalidConfig("no comparison modes".into()));
    }
    if config.timing_reps == 0 {
        return Err(BenchError::InvalidConfig("zero timing repetitions".into()));
    }
    Ok(())
}

fn page_url(d_max: usize, i: usize) -> String {
    format!("http://bench.invalid/d{d_max}/p{i}")
}

fn target_id(d_max: usize, i: usize) -> String {
    format!("d{d_max}-p{i}")
}

/// Chooses an applicable mutation for the page. Collision corpora always
/// permute the terminal siblings; random corpora draw kinds until one
/// applies (insertion at a valid depth always does, so this terminates).
fn pick_mutation(
    page: &SyntheticPage,
    collisions: bool,
    rng: &mut ChaCha8Rng,
) -> Result<SyntheticPage, BenchError> {
    let d_max = page.profile.d_max();
    if collisions {
        let m = Mutation {
            kind: MutationKind::PermuteSiblings,
            side: Side::Both,
            depth: d_max - 2,
        };
        return mutate(page, &m, rng.gen());
    }
    for _attempt in 0..32 {
        let kind = match rng.gen_range(0..4) {
            0 => MutationKind::InsertNode,
            1 => MutationKind::DeleteNode,
            2 => MutationKind::SymmetricDualEdit,
            _ => MutationKind::InsertNode,
        };
        let side = if kind == MutationKind::SymmetricDualEdit {
            Side::Both
        } else if rng.gen_bool(0.5) {
            Side::Upper
        } else {
            Side::Lower
        };
        let depth = if d_max > 1 { rng.gen_range(1..d_max) } else { 1 };
        let m = Mutation { kind, side, depth };
        match mutate(page, &m, rng.gen()) {
            Ok(p) => return Ok(p),
            Err(BenchError::Inapplicable(_)) => continue,
            Err(e) => return Err(e),
        }
    }
    // insertion one level below the root is always applicable on d_max ≥ 2
    let fallback = Mutation { kind: MutationKind::InsertNode, side: Side::Lower, depth: 1 };
    mutate(page, &fallback, rng.gen())
}

/// Per-label extraction summary used by examples and the CLI bench
/// output; maps each (class, mode) to its detection rate.
pub fn detection_by_mode(report: &BenchReport) -> BTreeMap<String, Vec<(usize, Option<f64>)>> {
    let mut out: BTreeMap<String, Vec<(usize, Option<f64>)>> = BTreeMap::new();
    for c in &report.classes {
        out.entry(c.mode.to_string()).or_default().push((c.d_max, c.detection_rate));
    }
    out
}
