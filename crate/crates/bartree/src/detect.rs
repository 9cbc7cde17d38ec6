//! Change detection between two fingerprints of the same target.
//!
//! A comparison mode picks which variables participate: the cheap scalar
//! pair, the full depth vectors, or everything including the tag-balance
//! figures. Differences are reported per variable name; when the balance
//! figures are in play the (Σ_upper, Σ_lower, Δ) movement is classified
//! into one of the reachable change cases. Since Δ is defined as
//! Σ_upper − Σ_lower, three of the eight sign combinations cannot occur —
//! that arithmetic is asserted, not assumed.

use std::collections::BTreeSet;
use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::bar::Fingerprint;

#[derive(Debug, Error, PartialEq, Eq)]
pub enum DetectError {
    #[error("fingerprints were computed with different parameters: I {old_interval} vs {new_interval}, r {old_ratio} vs {new_ratio}")]
    ParamMismatch {
        old_interval: String,
        new_interval: String,
        old_ratio: String,
        new_ratio: String,
    },
}

/// Which variables a comparison considers.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum CompareMode {
    /// `d_max` and `A_total` only.
    Simple,
    /// Adds the per-depth vectors `P` and `A`.
    Full,
    /// Adds `sigma_upper`, `sigma_lower` and `delta`.
    FullWithDelta,
}

impl CompareMode {
    pub fn compared_variables(self) -> &'static [&'static str] {
        match self {
            CompareMode::Simple => &["d_max", "A_total"],
            CompareMode::Full => &["d_max", "A_total", "P", "A"],
            CompareMode::FullWithDelta => {
                &["d_max", "A_total", "P", "A", "sigma_upper", "sigma_lower", "delta"]
            }
        }
    }
}

impl fmt::Display for CompareMode {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let s = match self {
            CompareMode::Simple => "simple",
            CompareMode::Full => "full",
            CompareMode::FullWithDelta => "full_with_delta",
        };
        f.write_str(s)
    }
}

impl FromStr for CompareMode {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s {
            "simple" => Ok(CompareMode::Simple),
            "full" => Ok(CompareMode::Full),
            // the hyphenated spelling matches the command-line flag
            "full_with_delta" | "full-delta" => Ok(CompareMode::FullWithDelta),
            other => Err(format!(
                "unknown mode {other:?}; expected simple, full or full-delta"
            )),
        }
    }
}

/// How the tag-balance figures moved between two captures.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum DeltaCase {
    /// Neither Σ moved.
    NoChange,
    /// Both Σ moved by the same amount, leaving Δ intact.
    SymmetricSimultaneous,
    /// Only Σ_upper moved.
    UpperOnly,
    /// Only Σ_lower moved.
    LowerOnly,
    /// Both Σ moved by different amounts.
    BothDifferent,
    /// The balance figures were not part of this comparison.
    NotEvaluated,
}

/// What the harvester should do with the target after a check.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Action {
    /// Structure unchanged; keep extracting with the stored pattern.
    Accept,
    /// Structure changed; re-derive the extraction pattern from the new page.
    ReExtractPattern,
    /// The page could not be evaluated this round; keep the old state and warn.
    DeferAndWarn,
}

/// Outcome of checking one capture against the stored one.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct ChangeReport {
    pub mode: CompareMode,
    /// False when the new capture could not be measured (fetch failure,
    /// region missing); the rest of the report is then vacuous.
    pub evaluated: bool,
    pub changed: bool,
    /// Names of the compared variables that differ, sorted.
    pub differing: BTreeSet<String>,
    pub delta_case: DeltaCase,
}

impl ChangeReport {
    /// Report for a round where no comparison was possible.
    pub fn not_evaluated(mode: CompareMode) -> Self {
        ChangeReport {
            mode,
            evaluated: false,
            changed: false,
            differing: BTreeSet::new(),
            delta_case: DeltaCase::NotEvaluated,
        }
    }
}

/// Compares two fingerprints under the given mode. Both must have been
/// computed with identical parameters, otherwise every derived quantity
/// differs for uninteresting reasons.
pub fn compare(
    old: &Fingerprint,
    new: &Fingerprint,
    mode: CompareMode,
) -> Result<ChangeReport, DetectError> {
    if old.interval != new.interval || old.ratio != new.ratio {
        return Err(DetectError::ParamMismatch {
            old_interval: format!("{}/{}", old.interval.numer(), old.interval.denom()),
            new_interval: format!("{}/{}", new.interval.numer(), new.interval.denom()),
            old_ratio: format!("{}/{}", old.ratio.numer(), old.ratio.denom()),
            new_ratio: format!("{}/{}", new.ratio.numer(), new.ratio.denom()),
        });
    }

    let mut differing = BTreeSet::new();
    let mut record = |name: &str, differs: bool| {
        if differs {
            differing.insert(name.to_string());
        }
    };
    record("d_max", old.d_max != new.d_max);
    record("A_total", old.a_total != new.a_total);
    if mode != CompareMode::Simple {
        record("P", old.p != new.p);
        record("A", old.a != new.a);
    }
    let delta_case = if mode == CompareMode::FullWithDelta {
        record("sigma_upper", old.sigma_upper != new.sigma_upper);
        record("sigma_lower", old.sigma_lower != new.sigma_lower);
        record("delta", old.delta != new.delta);
        classify_delta(old, new)
    } else {
        DeltaCase::NotEvaluated
    };

    Ok(ChangeReport {
        mode,
        evaluated: true,
        changed: !differing.is_empty(),
        differing,
        delta_case,
    })
}

/// Classifies how (Σ_upper, Σ_lower, Δ) moved between two fingerprints.
pub fn classify_delta(old: &Fingerprint, new: &Fingerprint) -> DeltaCase {
    // Δ is derived, never free; a fingerprint violating this was not
    // produced by this crate and classification would be meaningless.
    assert_eq!(old.delta, old.sigma_upper - old.sigma_lower, "inconsistent stored delta");
    assert_eq!(new.delta, new.sigma_upper - new.sigma_lower, "inconsistent new delta");
    let upper_moved = old.sigma_upper != new.sigma_upper;
    let lower_moved = old.sigma_lower != new.sigma_lower;
    let delta_moved = old.delta != new.delta;
    match (upper_moved, lower_moved, delta_moved) {
        (false, false, false) => DeltaCase::NoChange,
        (true, true, false) => DeltaCase::SymmetricSimultaneous,
        (true, false, true) => DeltaCase::UpperOnly,
        (false, true, true) => DeltaCase::LowerOnly,
        (true, true, true) => DeltaCase::BothDifferent,
        // with Δ ≡ Σu − Σl: one side moving alone must move Δ, and Δ
        // cannot move while both sides stand still
        (true, false, false) | (false, true, false) | (false, false, true) => {
            unreachable!("delta moved inconsistently with the sigmas")
        }
    }
}

/// Maps a report to the follow-up action.
pub fn decide(report: &ChangeReport) -> Action {
    if !report.evaluated {
        Action::DeferAndWarn
    } else if report.changed {
        Action::ReExtractPattern
    } else {
        Action::Accept
    }
}
