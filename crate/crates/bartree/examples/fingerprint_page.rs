//! Fingerprint a page file around a region of interest and print the
//! wire-format JSON.
//!
//! ```text
//! cargo run --example fingerprint_page [PAGE.html ROI.txt]
//! ```
//!
//! Without arguments the bundled journal fixture is used.

use bartree::harvest::fingerprint_page;
use bartree::roi::RoiSpec;

fn main() -> Result<(), Box<dyn std::error::Error>> {
    let mut args = std::env::args().skip(1);
    let (html, roi_text) = match (args.next(), args.next()) {
        (Some(page), Some(roi)) => (std::fs::read_to_string(page)?, std::fs::read_to_string(roi)?),
        _ => (
            include_str!("../fixtures/publication.html").to_string(),
            include_str!("../fixtures/roi.txt").to_string(),
        ),
    };

    let spec = RoiSpec::new(roi_text.trim(), Vec::new(), None)?;
    let captured_at = "2026-02-01T00:00:00Z"; // fixed stamp → reproducible bytes
    let fp = fingerprint_page(&html, &spec, &Default::default(), None, captured_at)?;

    println!("{}", serde_json::to_string_pretty(&fp)?);
    eprintln!(
        "\n{} levels, {} nodes, total area {}",
        fp.d_max,
        fp.p.iter().sum::<u32>(),
        fp.a_total
    );
    Ok(())
}
