//! The full target lifecycle against an in-memory fetcher: register a
//! page, re-check it, watch a template edit get caught, and extract
//! labeled attributes from a sibling page afterwards.

use bartree::fetch::MemoryFetcher;
use bartree::store::{AttributeSpec, Registry, TargetConfig};
use bartree::Harvester;

const PAGE: &str = include_str!("../fixtures/publication.html");
const SIBLING: &str = include_str!("../fixtures/publication_issue2.html");
const ROI: &str = include_str!("../fixtures/roi.txt");

fn main() -> Result<(), Box<dyn std::error::Error>> {
    let url = "http://journal.example/v12/i3";
    let fetcher = MemoryFetcher::new();
    fetcher.insert(url, PAGE);
    let mut h = Harvester::new(Registry::default(), fetcher);

    let mut config = TargetConfig::new("pub-1", url, ROI.trim());
    config.attributes = vec![AttributeSpec {
        label: "title".into(),
        text: "Detecting template shifts with layout fingerprints".into(),
    }];
    let record = h.register_target(config)?;
    println!(
        "registered: d_max={} A_total={} sigma=({}, {}) delta={}",
        record.fingerprint.d_max,
        record.fingerprint.a_total,
        record.fingerprint.sigma_upper,
        record.fingerprint.sigma_lower,
        record.fingerprint.delta
    );

    // nothing moved: the stored pattern stays trustworthy
    let (report, action) = h.check_target("pub-1", None)?;
    println!("unchanged page -> changed={} action={action:?}", report.changed);

    // the site adds a banner above the ads cell: the profile moves
    let restyled = PAGE.replace(
        "<td class=\"ads\">",
        "<td class=\"ads\"><div class=\"banner\">New design</div>",
    );
    h.fetcher().insert(url, &restyled);
    let (report, action) = h.check_target("pub-1", None)?;
    println!(
        "restyled page -> changed={} differing={:?} delta_case={:?} action={action:?}",
        report.changed, report.differing, report.delta_case
    );
    println!("history now holds {} retired fingerprint(s)", h.registry().targets["pub-1"].history.len());

    // next issue, same template: the anchors still find the attributes
    h.fetcher().insert(url, SIBLING);
    let extracted = h.extract_record("pub-1", None)?;
    for (label, text) in &extracted.fields {
        println!("{label}: {text}");
    }
    Ok(())
}
