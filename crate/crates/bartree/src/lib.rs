//! Layout fingerprints for scraped pages: notice that a template changed
//! before trusting another extraction.
//!
//! The idea: a harvested fragment of display text (the region of
//! interest) sits at some depth in the page's layout tree. Splitting the
//! page at that region and counting the unbalanced layout tags on each
//! side, then replaying the upper part to recover how many nodes share
//! each nesting level, yields a small structural signature. Treating the
//! nesting levels as recursively inset bars of a fixed display interval
//! turns the signature into exact rational areas whose total collapses
//! the whole profile into one comparable number. A page whose signature
//! moved has had its template edited; the harvester should re-derive its
//! extraction pattern instead of silently collecting garbage.
//!
//! The pieces, in pipeline order:
//!
//! * [`lexer`] — tag tokenizer and the format/layout/void tag classes;
//! * [`roi`] — locating the pasted display text in the page source;
//! * [`reverse`] — splitting at the region, tag-balance counts, the
//!   upper/lower symmetry classes, and the depth profile;
//! * [`bar`] — exact bar widths, areas, nett areas, and the fingerprint;
//! * [`detect`] — fingerprint comparison modes and the Δ taxonomy;
//! * [`doctree`] — positional anchors for attribute extraction;
//! * [`store`] — the JSON target registry with atomic saves;
//! * [`fetch`] — polite HTTP fetching plus an in-memory test double;
//! * [`harvest`] — register / check / extract orchestration;
//! * [`bench`] — synthetic corpora, structural mutations, and the
//!   detection/timing harness.
//!
//! Each capability has a runnable demonstration under `examples/`
//! (`fingerprint_page`, `locate_region`, `reverse_counts`,
//! `bar_tree_math`, `detect_change`, `harvest_workflow`,
//! `synthetic_bench`). The `bartree` binary exposes the same operations
//! as subcommands: `init`, `check`, `extract`, `fingerprint`, `bench`.

pub mod bar;
pub mod bench;
pub mod cli;
pub mod detect;
pub mod doctree;
pub mod fetch;
pub mod harvest;
pub mod lexer;
pub mod reverse;
pub mod roi;
pub mod store;

pub use bar::{BarError, BarParams, BarTree, Fingerprint, NettForm};
pub use detect::{compare, decide, Action, ChangeReport, CompareMode, DeltaCase};
pub use fetch::{FetchError, FetchedPage, Fetcher, HttpFetcher, MemoryFetcher};
pub use harvest::{
    analyze_page, fingerprint_page, HarvestError, Harvester, LabeledRecord, PageAnalysis,
};
pub use reverse::{
    count_tags, depth_profile, split, symmetry, DepthProfile, PartSide, Parts, ReverseError,
    Symmetry, SymmetryClass, TagCounts,
};
pub use roi::{digest, locate_roi, locate_subrois, RoiError, RoiSpan, RoiSpec};
pub use store::{
    store_load, store_save, AttributeSpec, Registry, StoreError, TargetConfig, TargetRecord,
};
