//! Find where pasted display text actually lives in the page source,
//! including repeated text disambiguated by occurrence, and labeled
//! fragments within the region.

use bartree::lexer::tokenize;
use bartree::roi::{locate_roi, locate_subrois, RoiSpec};

fn main() -> Result<(), Box<dyn std::error::Error>> {
    let page = r#"<html><body>
      <div class="teaser"><p>An old pond - a frog leaps in</p></div>
      <div class="poem">
        <p><b>An old pond</b> - a frog leaps in - <i>the sound of water</i></p>
        <span>Basho</span>
      </div>
    </body></html>"#;

    let stream = tokenize(page);

    // the teaser repeats the opening words; occurrence 1 picks the poem
    let spec = RoiSpec::new(
        "An old pond - a frog leaps in",
        vec![("incipit".into(), "An old pond".into())],
        Some(1),
    )?;
    let roi = locate_roi(&stream, &spec)?;
    println!(
        "region source span: bytes {}..{}",
        roi.start, roi.end
    );
    println!("matched source: {:?}", &page[roi.start..roi.end]);

    // labeled fragments resolve to sub-spans inside the region
    for (label, span) in locate_subrois(&stream, &roi, &spec)? {
        println!("{label}: bytes {}..{} = {:?}", span.start, span.end, &page[span.start..span.end]);
    }

    // the same text without an occurrence is ambiguous on purpose
    let ambiguous = RoiSpec::new("An old pond - a frog leaps in", Vec::new(), None)?;
    match locate_roi(&stream, &ambiguous) {
        Err(e) => println!("without occurrence: {e}"),
        Ok(_) => unreachable!("two matches cannot silently resolve"),
    }
    Ok(())
}
