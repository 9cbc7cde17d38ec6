//! The exact bar arithmetic on its own: widths, areas, both nett-area
//! routes, and the scaling law, all as big rationals.

use bartree::bar::{areas, nett_areas, parse_rational, total_area, widths, BarParams, NettForm};
use bartree::reverse::DepthProfile;

fn main() -> Result<(), Box<dyn std::error::Error>> {
    // the worked three-level profile: one node, then two, then one
    let profile = DepthProfile::new(vec![1, 2, 1], 3)?;
    let params = BarParams::new(parse_rational("1")?, parse_rational("1/10")?)?;

    let w = widths(&profile, &params)?;
    let a = areas(&w);
    println!("I = {}, r = {}", params.interval(), params.ratio());
    println!("{:>5}  {:>8}  {:>8}", "depth", "width", "area");
    for d in 0..w.len() {
        println!("{d:>5}  {:>8}  {:>8}", w[d], a[d]);
    }
    println!("total area: {}", total_area(&w));

    // the recursive and product forms are independent derivations of the
    // same nett column; they must agree term by term
    let rec = nett_areas(&profile, &params, NettForm::Recursive)?;
    let prod = nett_areas(&profile, &params, NettForm::Product)?;
    assert_eq!(rec, prod);
    println!("nett areas (both routes): {:?}", rec.iter().map(|x| x.to_string()).collect::<Vec<_>>());

    // scaling both parameters by c scales w_d by c^(d+1): the fingerprint
    // shape carries no unit of its own
    let tripled = BarParams::new(params.interval() * parse_rational("3")?, params.ratio() * parse_rational("3")?)?;
    let wt = widths(&profile, &tripled)?;
    let mut c = parse_rational("3")?;
    for d in 0..w.len() {
        assert_eq!(wt[d], &c * &w[d]);
        c *= parse_rational("3")?;
    }
    println!("scaling check: w_d(3I, 3r) = 3^(d+1) w_d(I, r) holds");
    Ok(())
}
