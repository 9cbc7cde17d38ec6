//! Split a page at its region of interest and show the tag-balance
//! arithmetic on both sides: open events, paired closes, the surplus
//! sigma, and the resulting symmetry class.

use bartree::lexer::tokenize;
use bartree::reverse::{count_tags, depth_profile, split, symmetry, PartSide};
use bartree::roi::{locate_roi, RoiSpec};

const PAGE: &str = include_str!("../fixtures/publication.html");
const ROI: &str = include_str!("../fixtures/roi.txt");

fn main() -> Result<(), Box<dyn std::error::Error>> {
    let stream = tokenize(PAGE);
    let spec = RoiSpec::new(ROI.trim(), Vec::new(), None)?;
    let roi = locate_roi(&stream, &spec)?;
    let parts = split(&stream, &roi);

    let upper = count_tags(&parts.upper, PartSide::Upper);
    let lower = count_tags(&parts.lower, PartSide::Lower);
    println!("upper part: {} layout events", parts.upper.events.len());
    println!("  open-tags n_ot = {:2}  closed-tags n_ct = {:2}  sigma = {}", upper.n_ot, upper.n_ct, upper.sigma);
    println!("lower part: {} layout events", parts.lower.events.len());
    println!("  open-tags n_ot = {:2}  closed-tags n_ct = {:2}  sigma = {}", lower.n_ot, lower.n_ct, lower.sigma);

    let sym = symmetry(upper.sigma, lower.sigma);
    println!("delta = {} -> {:?}", sym.delta, sym.class);
    // this fixture has a deliberately unclosed <p> in its nav cell, which
    // is why the two sides disagree by one

    let profile = depth_profile(&parts)?;
    println!("\nnodes per depth (root at 0):");
    for (d, p) in profile.counts().iter().enumerate() {
        println!("  depth {d:2}: {} {}", "#".repeat(*p as usize), p);
    }
    println!("region anchors at depth {} of {}", profile.roi_depth(), profile.d_max());
    Ok(())
}
