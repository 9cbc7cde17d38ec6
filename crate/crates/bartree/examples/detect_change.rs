//! Compare fingerprints of a page before and after template edits under
//! each comparison mode, including an engineered change that the cheap
//! mode cannot see.

use bartree::bar::{parse_rational, BarParams};
use bartree::detect::{compare, decide, CompareMode};
use bartree::harvest::fingerprint_page;
use bartree::roi::RoiSpec;

const MODES: [CompareMode; 3] =
    [CompareMode::Simple, CompareMode::Full, CompareMode::FullWithDelta];

fn page(content: &str) -> String {
    format!("<html><body>{content}</body></html>")
}

fn main() -> Result<(), Box<dyn std::error::Error>> {
    let spec = RoiSpec::new("the harvested line", Vec::new(), None)?;
    // uninset bars make the two engineered subtrees below cover equal area
    let params = BarParams::new(parse_rational("1")?, parse_rational("0")?)?;
    let fp = |html: &str| fingerprint_page(html, &spec, &Default::default(), Some(&params), "t");

    let base = fp(&page(
        "<div><div><p>the harvested line</p><p>x</p></div><div>y</div></div>",
    ))?;

    // an ordinary edit: one extra pane appears beside the article
    let widened = fp(&page(
        "<div><div><p>the harvested line</p><p>x</p></div><div>y</div><div>z</div></div>",
    ))?;
    println!("-- widened layout --");
    for mode in MODES {
        let report = compare(&base, &widened, mode)?;
        println!(
            "{mode:?}: changed={} differing={:?} -> {:?}",
            report.changed,
            report.differing,
            decide(&report)
        );
    }

    // an area-preserving rearrangement: two blocks over three paragraphs
    // become three blocks over one. Depth and total area agree exactly,
    // so the cheap mode waves it through; the per-depth counts do not.
    let old = fp(&page(
        "<div><div><p>the harvested line</p><p>a</p></div><div><p>b</p></div></div>",
    ))?;
    let new = fp(&page(
        "<div><div><p>the harvested line</p></div><div></div><div></div></div>",
    ))?;
    assert_eq!(old.d_max, new.d_max);
    assert_eq!(old.a_total, new.a_total);
    println!("-- area-preserving rearrangement (A_total = {} on both sides) --", old.a_total);
    for mode in MODES {
        let report = compare(&old, &new, mode)?;
        println!(
            "{mode:?}: changed={} differing={:?} -> {:?}",
            report.changed,
            report.differing,
            decide(&report)
        );
    }
    Ok(())
}
