//! Target lifecycle: register, recheck, extract.
//!
//! Registration runs the whole measuring pipeline once on a training
//! page — locate the region, split, count both sides, build the depth
//! profile, fingerprint — and stores the result together with anchor
//! paths for every labeled attribute. A later check refetches the page,
//! recomputes the fingerprint with the stored parameters and compares
//! under the configured mode. Unchanged pages cost one fetch and one
//! comparison; a confirmed change replaces the fingerprint (the old one
//! is retired to a bounded history) and re-derives what it can; pages
//! that cannot be measured (fetch failure, region gone) defer with a
//! warning and leave the stored state untouched.
//!
//! The registry is treated as single-writer. Fetches for distinct
//! targets may run in parallel against clones of the registry, but all
//! mutations go through one harvester at a time; every record handed out
//! is a snapshot.

use std::collections::BTreeMap;
use std::path::PathBuf;

use chrono::{SecondsFormat, Utc};
use log::{info, warn};
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::bar::{BarError, BarParams, Fingerprint};
use crate::detect::{compare, decide, Action, ChangeReport, CompareMode, DeltaCase, DetectError};
use crate::doctree::DocTree;
use crate::fetch::{FetchError, Fetcher};
use crate::lexer::{tokenize_with, TagClassConfig, TagStream};
use crate::reverse::{
    count_tags, depth_profile, split, DepthProfile, PartSide, ReverseError, SymmetryClass,
    TagCounts,
};
use crate::reverse;
use crate::roi::{digest, locate_roi, locate_subrois, RoiError, RoiSpan, RoiSpec};
use crate::store::{store_save, Registry, StoreError, TargetConfig, TargetRecord};

#[derive(Debug, Error)]
pub enum HarvestError {
    #[error("unknown target {0:?}")]
    UnknownTarget(String),
    #[error("target {0:?} is already registered")]
    DuplicateTarget(String),
    #[error("extraction pattern is stale: no stored anchor matches this page")]
    PatternStale,
    #[error("invalid target config: {0}")]
    InvalidConfig(String),
    #[error(transparent)]
    Fetch(#[from] FetchError),
    #[error(transparent)]
    Roi(#[from] RoiError),
    #[error(transparent)]
    Reverse(#[from] ReverseError),
    #[error(transparent)]
    Bar(#[from] BarError),
    #[error(transparent)]
    Detect(#[from] DetectError),
    #[error(transparent)]
    Store(#[from] StoreError),
}

/// All structural measurements taken from one page around its region.
#[derive(Debug, Clone)]
pub struct PageAnalysis {
    pub roi: RoiSpan,
    pub counts_upper: TagCounts,
    pub counts_lower: TagCounts,
    pub symmetry: SymmetryClass,
    pub profile: DepthProfile,
}

/// One extracted record: label → normalized text for every attribute
/// whose anchor still matched, plus a warning per attribute that did not.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct LabeledRecord {
    pub source_url: String,
    pub extracted_at: String,
    pub fields: BTreeMap<String, String>,
    pub warnings: Vec<String>,
}

/// The region spec a config describes.
pub fn roi_spec_for(config: &TargetConfig) -> Result<RoiSpec, RoiError> {
    let attributes = config
        .attributes
        .iter()
        .map(|a| (a.label.clone(), a.text.clone()))
        .collect();
    RoiSpec::new(&config.roi_text, attributes, config.occurrence)
}

/// Measures an already-tokenized page: locate region → split → count
/// both sides → symmetry → depth profile.
pub fn analyze_stream(stream: &TagStream, spec: &RoiSpec) -> Result<PageAnalysis, HarvestError> {
    let roi = locate_roi(stream, spec)?;
    let parts = split(stream, &roi);
    let counts_upper = count_tags(&parts.upper, PartSide::Upper);
    let counts_lower = count_tags(&parts.lower, PartSide::Lower);
    let symmetry = reverse::symmetry(counts_upper.sigma, counts_lower.sigma);
    let profile = depth_profile(&parts)?;
    Ok(PageAnalysis { roi, counts_upper, counts_lower, symmetry, profile })
}

/// Tokenizes and measures a raw page.
pub fn analyze_page(
    html: &str,
    spec: &RoiSpec,
    tags: &TagClassConfig,
) -> Result<PageAnalysis, HarvestError> {
    analyze_stream(&tokenize_with(html, tags), spec)
}

/// Full offline pipeline: page bytes in, fingerprint out. `params` of
/// `None` selects the defaults for the measured depth; `captured_at` is
/// injected so identical inputs produce identical bytes.
pub fn fingerprint_page(
    html: &str,
    spec: &RoiSpec,
    tags: &TagClassConfig,
    params: Option<&BarParams>,
    captured_at: &str,
) -> Result<Fingerprint, HarvestError> {
    let analysis = analyze_page(html, spec, tags)?;
    let resolved;
    let params = match params {
        Some(p) => p,
        None => {
            resolved = BarParams::default_for(analysis.profile.d_max());
            &resolved
        }
    };
    Ok(Fingerprint::from_analysis(
        &analysis.profile,
        params,
        analysis.counts_upper.sigma,
        analysis.counts_lower.sigma,
        digest(spec.roi_text()),
        captured_at.to_string(),
    )?)
}

fn now_rfc3339() -> String {
    Utc::now().to_rfc3339_opts(SecondsFormat::Secs, true)
}

pub struct Harvester<F: Fetcher> {
    registry: Registry,
    fetcher: F,
    store_path: Option<PathBuf>,
}

impl<F: Fetcher> Harvester<F> {
    pub fn new(registry: Registry, fetcher: F) -> Self {
        Harvester { registry, fetcher, store_path: None }
    }

    /// Persist the registry to `path` after every successful mutation.
    pub fn with_store_path(mut self, path: PathBuf) -> Self {
        self.store_path = Some(path);
        self
    }

    pub fn registry(&self) -> &Registry {
        &self.registry
    }

    pub fn fetcher(&self) -> &F {
        &self.fetcher
    }

    pub fn into_registry(self) -> Registry {
        self.registry
    }

    fn persist(&self) -> Result<(), StoreError> {
        match &self.store_path {
            Some(path) => store_save(&self.registry, path),
            None => Ok(()),
        }
    }

    /// Runs the training pipeline on the configured page and stores the
    /// resulting record. Nothing is stored when any step fails.
    pub fn register_target(&mut self, mut config: TargetConfig) -> Result<&TargetRecord, HarvestError> {
        if self.registry.targets.contains_key(&config.target_id) {
            return Err(HarvestError::DuplicateTarget(config.target_id));
        }
        url::Url::parse(&config.url)
            .map_err(|e| HarvestError::InvalidConfig(format!("url {:?}: {e}", config.url)))?;
        config
            .load_roi_text()
            .map_err(|e| HarvestError::InvalidConfig(format!("cannot read region text: {e}")))?;
        let spec = roi_spec_for(&config)?;
        let tags = config.tag_class_overrides.clone().unwrap_or_default();

        let page = self.fetcher.fetch(&config.url)?;
        let stream = tokenize_with(&page.body, &tags);
        let analysis = analyze_stream(&stream, &spec)?;
        let params = match &config.params {
            Some(p) => p.clone(),
            None => BarParams::default_for(analysis.profile.d_max()),
        };
        let fingerprint = Fingerprint::from_analysis(
            &analysis.profile,
            &params,
            analysis.counts_upper.sigma,
            analysis.counts_lower.sigma,
            digest(spec.roi_text()),
            now_rfc3339(),
        )?;
        let attribute_anchors = derive_anchors(&stream, &analysis.roi, &spec, true)?;

        let id = config.target_id.clone();
        let record = TargetRecord { config, fingerprint, attribute_anchors, history: Vec::new() };
        self.registry.targets.insert(id.clone(), record);
        if let Err(e) = self.persist() {
            self.registry.targets.remove(&id);
            return Err(e.into());
        }
        Ok(&self.registry.targets[&id])
    }

    /// Refetches the target, recomputes its fingerprint with the stored
    /// parameters, compares, and acts:
    ///
    /// * unmeasurable page (fetch error, region missing, structure gone)
    ///   → defer with a warning, store untouched;
    /// * changed → replace the fingerprint (old one retired to history),
    ///   re-derive anchors where possible, persist;
    /// * unchanged → accept.
    pub fn check_target(
        &mut self,
        target_id: &str,
        mode_override: Option<CompareMode>,
    ) -> Result<(ChangeReport, Action), HarvestError> {
        let record = self
            .registry
            .targets
            .get(target_id)
            .ok_or_else(|| HarvestError::UnknownTarget(target_id.to_string()))?
            .clone();
        let mode = mode_override.unwrap_or(record.config.mode);
        let spec = roi_spec_for(&record.config)?;
        let tags = record.config.tag_class_overrides.clone().unwrap_or_default();

        let page = match self.fetcher.fetch(&record.config.url) {
            Ok(p) => p,
            Err(e) => {
                warn!("target {target_id}: fetch failed ({e}); deferring");
                return Ok((ChangeReport::not_evaluated(mode), Action::DeferAndWarn));
            }
        };
        let stream = tokenize_with(&page.body, &tags);
        let analysis = match analyze_stream(&stream, &spec) {
            Ok(a) => a,
            Err(HarvestError::Roi(e)) => {
                warn!("target {target_id}: region not measurable ({e}); deferring");
                return Ok((ChangeReport::not_evaluated(mode), Action::DeferAndWarn));
            }
            Err(HarvestError::Reverse(ReverseError::DegenerateProfile)) => {
                warn!("target {target_id}: page has no layout structure; deferring");
                return Ok((ChangeReport::not_evaluated(mode), Action::DeferAndWarn));
            }
            Err(other) => return Err(other),
        };

        let stored_params = record.fingerprint.params()?;
        let fresh = Fingerprint::from_analysis(
            &analysis.profile,
            &stored_params,
            analysis.counts_upper.sigma,
            analysis.counts_lower.sigma,
            digest(spec.roi_text()),
            now_rfc3339(),
        );
        let (report, new_fp) = match fresh {
            Ok(fp) => {
                let report = compare(&record.fingerprint, &fp, mode)?;
                (report, fp)
            }
            Err(BarError::InvalidRatio(reason)) => {
                // The page grew deeper than the stored ratio allows. That
                // is a structural change by definition; refingerprint with
                // fresh default parameters for the new depth.
                warn!(
                    "target {target_id}: stored ratio invalid for new depth ({reason}); \
                     treating as depth change"
                );
                let params = BarParams::default_for(analysis.profile.d_max());
                let fp = Fingerprint::from_analysis(
                    &analysis.profile,
                    &params,
                    analysis.counts_upper.sigma,
                    analysis.counts_lower.sigma,
                    digest(spec.roi_text()),
                    now_rfc3339(),
                )?;
                let report = ChangeReport {
                    mode,
                    evaluated: true,
                    changed: true,
                    differing: ["d_max".to_string()].into(),
                    delta_case: DeltaCase::NotEvaluated,
                };
                (report, fp)
            }
            Err(e) => return Err(e.into()),
        };

        let action = decide(&report);
        if action == Action::ReExtractPattern {
            // best effort: attribute texts may have moved with the change
            let new_anchors = derive_anchors(&stream, &analysis.roi, &spec, false).ok();
            let rec = self.registry.targets.get_mut(target_id).expect("snapshot exists");
            let old = std::mem::replace(&mut rec.fingerprint, new_fp);
            info!(
                "target {target_id}: template change confirmed; fingerprint captured {} \
                 replaced by {}",
                old.captured_at, rec.fingerprint.captured_at
            );
            rec.push_history(old);
            match new_anchors {
                Some(anchors) => rec.attribute_anchors = anchors,
                None => warn!(
                    "target {target_id}: could not re-derive attribute anchors; keeping previous"
                ),
            }
            self.persist()?;
        }
        Ok((report, action))
    }

    /// Extracts the labeled attributes from a page using the stored
    /// anchors. `html` of `None` fetches the configured URL.
    pub fn extract_record(
        &self,
        target_id: &str,
        html: Option<&str>,
    ) -> Result<LabeledRecord, HarvestError> {
        let record = self
            .registry
            .targets
            .get(target_id)
            .ok_or_else(|| HarvestError::UnknownTarget(target_id.to_string()))?;
        let tags = record.config.tag_class_overrides.clone().unwrap_or_default();
        let (body, source_url) = match html {
            Some(h) => (h.to_string(), record.config.url.clone()),
            None => {
                let page = self.fetcher.fetch(&record.config.url)?;
                (page.body, page.final_url)
            }
        };
        let tree = DocTree::build(&tokenize_with(&body, &tags));
        let mut fields = BTreeMap::new();
        let mut warnings = Vec::new();
        for attr in &record.config.attributes {
            match record.attribute_anchors.get(&attr.label).and_then(|p| tree.extract(p)) {
                Some(text) => {
                    fields.insert(attr.label.clone(), text);
                }
                None => warnings.push(format!(
                    "attribute {:?}: stored anchor no longer matches this page",
                    attr.label
                )),
            }
        }
        if fields.is_empty() && !record.attribute_anchors.is_empty() {
            return Err(HarvestError::PatternStale);
        }
        Ok(LabeledRecord { source_url, extracted_at: now_rfc3339(), fields, warnings })
    }
}

/// Anchors every attribute to the deepest node containing its text. With
/// `strict`, any attribute that cannot be located or anchored fails the
/// whole derivation (registration); otherwise the error propagates for
/// the caller to log (re-derivation after a template change).
fn derive_anchors(
    stream: &TagStream,
    roi: &RoiSpan,
    spec: &RoiSpec,
    strict: bool,
) -> Result<BTreeMap<String, Vec<crate::doctree::AnchorStep>>, HarvestError> {
    let sub_rois = locate_subrois(stream, roi, spec)?;
    let tree = DocTree::build(stream);
    let mut anchors = BTreeMap::new();
    for (label, span) in &sub_rois {
        match tree.deepest_containing(span.start, span.end) {
            Some(node) => {
                let covered = tree.node_text(node);
                if strict && covered != span.matched_text {
                    warn!(
                        "attribute {label:?}: anchored node holds {covered:?}, wider than the \
                         configured text; extraction will return the whole node"
                    );
                }
                anchors.insert(label.clone(), tree.path_to(node));
            }
            None => {
                return Err(HarvestError::InvalidConfig(format!(
                    "attribute {label:?} is not inside any layout node"
                )))
            }
        }
    }
    Ok(anchors)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::reverse::Symmetry;
    use crate::fetch::MemoryFetcher;
    use crate::store::AttributeSpec;

    const PAGE: &str = "<html><body><div><h1>Fire and Ice</h1>\
                        <p>Robert Frost</p><p>Some say the world will end in fire.</p>\
                        </div><div><p>footer</p></div></body></html>";

    fn config() -> TargetConfig {
        let mut cfg = TargetConfig::new(
            "t1",
            "http://poems.test/fire",
            "Fire and Ice Robert Frost Some say the world will end in fire.",
        );
        cfg.attributes = vec![
            AttributeSpec { label: "title".into(), text: "Fire and Ice".into() },
            AttributeSpec { label: "author".into(), text: "Robert Frost".into() },
        ];
        cfg
    }

    fn harvester_with(page: &str) -> Harvester<MemoryFetcher> {
        let fetcher = MemoryFetcher::new();
        fetcher.insert("http://poems.test/fire", page);
        Harvester::new(Registry::default(), fetcher)
    }

    #[test]
    fn register_builds_a_complete_record() {
        let mut h = harvester_with(PAGE);
        let record = h.register_target(config()).unwrap();
        assert_eq!(record.fingerprint.roi_digest, digest(&config().roi_text));
        assert!(record.fingerprint.d_max >= 3);
        assert_eq!(record.attribute_anchors.len(), 2);
        assert!(record.history.is_empty());
        // well-formed page: both sides balance to the chain depth
        assert_eq!(record.fingerprint.delta, 0);
    }

    #[test]
    fn duplicate_registration_is_refused() {
        let mut h = harvester_with(PAGE);
        h.register_target(config()).unwrap();
        assert!(matches!(
            h.register_target(config()),
            Err(HarvestError::DuplicateTarget(id)) if id == "t1"
        ));
    }

    #[test]
    fn failed_registration_stores_nothing() {
        let mut h = harvester_with("<p>entirely unrelated</p>");
        assert!(matches!(
            h.register_target(config()),
            Err(HarvestError::Roi(RoiError::NotFound))
        ));
        assert!(h.registry().targets.is_empty());

        let mut cfg = config();
        cfg.url = "not a url".into();
        assert!(matches!(h.register_target(cfg), Err(HarvestError::InvalidConfig(_))));
    }

    #[test]
    fn immediate_recheck_reports_no_change() {
        let mut h = harvester_with(PAGE);
        h.register_target(config()).unwrap();
        let (report, action) = h.check_target("t1", None).unwrap();
        assert!(report.evaluated && !report.changed);
        assert_eq!(report.delta_case, DeltaCase::NoChange);
        assert_eq!(action, Action::Accept);
        assert!(h.registry().targets["t1"].history.is_empty());
    }

    #[test]
    fn unclosed_banner_in_upper_chain_is_upper_only() {
        let mut h = harvester_with(PAGE);
        h.register_target(config()).unwrap();
        // an unclosed div slips into the ancestor chain above the region
        let mutated = PAGE.replace("<div><h1>", "<div><div class=\"promo\"><h1>");
        h.fetcher.insert("http://poems.test/fire", &mutated);
        let (report, action) = h.check_target("t1", None).unwrap();
        assert!(report.changed);
        assert_eq!(report.delta_case, DeltaCase::UpperOnly);
        assert_eq!(action, Action::ReExtractPattern);
        let rec = &h.registry().targets["t1"];
        assert_eq!(rec.history.len(), 1, "old fingerprint retired to history");
        assert_eq!(rec.fingerprint.sigma_upper, rec.history[0].sigma_upper + 1);
    }

    #[test]
    fn missing_region_defers_and_leaves_store_alone() {
        let mut h = harvester_with(PAGE);
        h.register_target(config()).unwrap();
        let before = h.registry().clone();
        h.fetcher.insert("http://poems.test/fire", "<html><body><p>gone</p></body></html>");
        let (report, action) = h.check_target("t1", None).unwrap();
        assert!(!report.evaluated);
        assert_eq!(report.delta_case, DeltaCase::NotEvaluated);
        assert_eq!(action, Action::DeferAndWarn);
        assert_eq!(h.registry(), &before);
    }

    #[test]
    fn fetch_failure_defers() {
        let mut h = harvester_with(PAGE);
        h.register_target(config()).unwrap();
        h.fetcher.insert_error(
            "http://poems.test/fire",
            FetchError::HttpStatus { url: "http://poems.test/fire".into(), status: 404 },
        );
        let (report, action) = h.check_target("t1", None).unwrap();
        assert!(!report.evaluated);
        assert_eq!(action, Action::DeferAndWarn);
    }

    #[test]
    fn unknown_target_is_an_error() {
        let mut h = harvester_with(PAGE);
        assert!(matches!(
            h.check_target("nope", None),
            Err(HarvestError::UnknownTarget(_))
        ));
        assert!(matches!(
            h.extract_record("nope", None),
            Err(HarvestError::UnknownTarget(_))
        ));
    }

    #[test]
    fn extraction_is_identity_on_the_training_page() {
        let mut h = harvester_with(PAGE);
        h.register_target(config()).unwrap();
        let record = h.extract_record("t1", None).unwrap();
        assert_eq!(record.fields["title"], "Fire and Ice");
        assert_eq!(record.fields["author"], "Robert Frost");
        assert!(record.warnings.is_empty());
        assert_eq!(record.source_url, "http://poems.test/fire");
    }

    #[test]
    fn extraction_follows_anchors_on_sibling_pages() {
        let mut h = harvester_with(PAGE);
        h.register_target(config()).unwrap();
        let sibling = PAGE
            .replace("Fire and Ice", "Mending Wall")
            .replace("Robert Frost", "R. Frost")
            .replace("Some say the world will end in fire.", "Something there is.");
        let record = h.extract_record("t1", Some(&sibling)).unwrap();
        assert_eq!(record.fields["title"], "Mending Wall");
        assert_eq!(record.fields["author"], "R. Frost");
    }

    #[test]
    fn unrelated_page_is_pattern_stale() {
        let mut h = harvester_with(PAGE);
        h.register_target(config()).unwrap();
        let err = h.extract_record("t1", Some("<table><tr><td>x</td></tr></table>"));
        assert!(matches!(err, Err(HarvestError::PatternStale)));
    }

    #[test]
    fn partially_matched_anchors_come_back_with_warnings() {
        let mut h = harvester_with(PAGE);
        h.register_target(config()).unwrap();
        // drop every paragraph under the article div so the author path
        // (…>div>p #0) finds nothing; the title anchor (…>div>h1) still works
        let degraded = PAGE.replace(
            "<p>Robert Frost</p><p>Some say the world will end in fire.</p>",
            "",
        );
        let record = h.extract_record("t1", Some(&degraded)).unwrap();
        assert_eq!(record.fields["title"], "Fire and Ice");
        assert!(!record.fields.contains_key("author"));
        assert_eq!(record.warnings.len(), 1);
        assert!(record.warnings[0].contains("author"));
    }

    #[test]
    fn deepened_page_outgrows_stored_ratio() {
        let page = "<div><p>R</p></div>";
        let fetcher = MemoryFetcher::new();
        fetcher.insert("http://x.test/", page);
        let mut h = Harvester::new(Registry::default(), fetcher);
        let mut cfg = TargetConfig::new("t", "http://x.test/", "R");
        // r at the validity boundary for the registration depth (d_max = 2)
        cfg.params = Some(
            BarParams::new(
                crate::bar::parse_rational("1").unwrap(),
                crate::bar::parse_rational("1/2").unwrap(),
            )
            .unwrap(),
        );
        h.register_target(cfg).unwrap();
        assert_eq!(h.registry().targets["t"].fingerprint.d_max, 2);

        // page deepens to d_max = 4: stored r = 1/2 > 1/4 is now invalid
        h.fetcher.insert("http://x.test/", "<div><ul><li><p>R</p></li></ul></div>");
        let (report, action) = h.check_target("t", None).unwrap();
        assert!(report.evaluated && report.changed);
        assert!(report.differing.contains("d_max"));
        assert_eq!(report.delta_case, DeltaCase::NotEvaluated);
        assert_eq!(action, Action::ReExtractPattern);
        let rec = &h.registry().targets["t"];
        assert_eq!(rec.fingerprint.d_max, 4);
        // replacement fingerprint carries fresh defaults for the new depth
        assert_eq!(rec.fingerprint.ratio, crate::bar::parse_rational("1/5").unwrap());
        assert_eq!(rec.history.len(), 1);
    }

    #[test]
    fn symmetric_wrap_keeps_delta() {
        let mut h = harvester_with(PAGE);
        h.register_target(config()).unwrap();
        let wrapped = PAGE.replace(
            "<div><h1>Fire and Ice</h1>",
            "<div><section><h1>Fire and Ice</h1>",
        );
        // close the wrapper after the region so both sides gain one tag
        let wrapped = wrapped.replace("</div><div><p>footer", "</section></div><div><p>footer");
        h.fetcher.insert("http://poems.test/fire", &wrapped);
        let (report, _) = h.check_target("t1", None).unwrap();
        assert!(report.changed);
        assert_eq!(report.delta_case, DeltaCase::SymmetricSimultaneous);
    }

    #[test]
    fn analysis_exposes_symmetry_classification() {
        let spec = RoiSpec::new("R", vec![], None).unwrap();
        let tags = TagClassConfig::default();
        let a = analyze_page("<div><p>R</p></div>", &spec, &tags).unwrap();
        assert_eq!(a.symmetry.class, Symmetry::FullySymmetric);
        assert_eq!(a.counts_upper.sigma, 2);
        assert_eq!(a.counts_lower.sigma, 2);
        let b = analyze_page("<div><span><p>R</p></div>", &spec, &tags).unwrap();
        assert_eq!(b.symmetry.class, Symmetry::UpperAsymmetric);
    }
}
