//! Bar representation of a depth profile, in exact rational arithmetic.
//!
//! The template tree is drawn as a stack of horizontal bars, one level per
//! depth. The root bar has width `I`; each level down, the available width
//! shrinks by the narrowing ratio `r` and is divided evenly among that
//! level's nodes, so a single deep chain keeps wide bars while broad
//! levels thin out fast. Bar areas accumulate depth (`A_d = d * w_d`), and
//! the page's scalar summary `A_total` is the sum of bar widths below the
//! root. Everything is computed over `BigRational` — two pages compare
//! equal exactly or not at all, never within an epsilon.
//!
//! Nett areas have two independent formulations (a peeled recursive form
//! and a closed product form); [`nett_areas`] implements both so each can
//! check the other.

use num::{BigInt, BigRational, One, Signed, Zero};
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::reverse::DepthProfile;

#[derive(Debug, Error, PartialEq, Eq)]
pub enum BarError {
    #[error("interval must be positive, got {0}")]
    InvalidInterval(String),
    #[error("invalid narrowing ratio: {0}")]
    InvalidRatio(String),
    #[error("cannot parse rational number from {0:?}")]
    ParseRational(String),
}

/// Root interval `I` and narrowing ratio `r`. `I` must be positive and
/// `r` non-negative; `r <= I / d_max` is checked against the profile at
/// compute time, since it depends on the depth.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct BarParams {
    #[serde(rename = "I", with = "rational_string")]
    interval: BigRational,
    #[serde(rename = "r", with = "rational_string")]
    ratio: BigRational,
}

impl BarParams {
    pub fn new(interval: BigRational, ratio: BigRational) -> Result<Self, BarError> {
        if !interval.is_positive() {
            return Err(BarError::InvalidInterval(display_rational(&interval)));
        }
        if ratio.is_negative() {
            return Err(BarError::InvalidRatio(format!(
                "{} is negative",
                display_rational(&ratio)
            )));
        }
        Ok(BarParams { interval, ratio })
    }

    /// Unit interval with `r = 1 / (d_max + 1)`, which satisfies the
    /// ratio constraint for any profile of that depth with room to spare.
    pub fn default_for(d_max: usize) -> Self {
        BarParams {
            interval: BigRational::one(),
            ratio: BigRational::new(BigInt::one(), BigInt::from(d_max as u64 + 1)),
        }
    }

    pub fn interval(&self) -> &BigRational {
        &self.interval
    }

    pub fn ratio(&self) -> &BigRational {
        &self.ratio
    }

    fn validate_for_depth(&self, d_max: usize) -> Result<(), BarError> {
        if !self.interval.is_positive() {
            return Err(BarError::InvalidInterval(display_rational(&self.interval)));
        }
        if self.ratio.is_negative() {
            return Err(BarError::InvalidRatio(format!(
                "{} is negative",
                display_rational(&self.ratio)
            )));
        }
        if d_max > 0 {
            let limit = &self.interval / BigRational::from_integer(BigInt::from(d_max as u64));
            if self.ratio > limit {
                return Err(BarError::InvalidRatio(format!(
                    "{} exceeds I/d_max = {} at depth {}",
                    display_rational(&self.ratio),
                    display_rational(&limit),
                    d_max
                )));
            }
        }
        Ok(())
    }
}

/// Which formulation of the nett area to evaluate.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum NettForm {
    /// Peel the overlap off the gross area: `A_d - (d - 1) * w_d`.
    Recursive,
    /// Closed product over the ancestor levels, evaluated from scratch.
    Product,
}

/// Bar widths per depth, `w_0 = I` down to `w_{d_max}`.
///
/// Each level multiplies the previous width by `(I - (d-1) r) / P_{d-1}`:
/// the remaining interval after `d-1` narrowings, split across the nodes
/// of the level above.
pub fn widths(profile: &DepthProfile, params: &BarParams) -> Result<Vec<BigRational>, BarError> {
    params.validate_for_depth(profile.d_max())?;
    let mut w = Vec::with_capacity(profile.d_max() + 1);
    w.push(params.interval().clone());
    for d in 1..=profile.d_max() {
        let shrunk = params.interval()
            - BigRational::from_integer(BigInt::from(d as u64 - 1)) * params.ratio();
        let split = shrunk / BigRational::from_integer(BigInt::from(profile.counts()[d - 1]));
        let prev = w.last().expect("w_0 always present");
        w.push(split * prev);
    }
    Ok(w)
}

/// Gross bar areas: `A_0 = 0`, `A_d = d * w_d`.
pub fn areas(widths: &[BigRational]) -> Vec<BigRational> {
    widths
        .iter()
        .enumerate()
        .map(|(d, w)| BigRational::from_integer(BigInt::from(d as u64)) * w)
        .collect()
}

/// Nett area per depth. Both forms reduce to `w_d` algebraically; computing
/// them separately keeps each an independent check on the other, so this
/// deliberately does not share code between the branches.
pub fn nett_areas(
    profile: &DepthProfile,
    params: &BarParams,
    form: NettForm,
) -> Result<Vec<BigRational>, BarError> {
    match form {
        NettForm::Recursive => {
            let w = widths(profile, params)?;
            let a = areas(&w);
            Ok(a.iter()
                .zip(&w)
                .enumerate()
                .map(|(d, (a_d, w_d))| {
                    a_d - BigRational::from_integer(BigInt::from(d as i64 - 1)) * w_d
                })
                .collect())
        }
        NettForm::Product => {
            params.validate_for_depth(profile.d_max())?;
            let p = profile.counts();
            let mut out = Vec::with_capacity(profile.d_max() + 1);
            for d in 0..=profile.d_max() {
                let mut acc = params.interval().clone();
                for n in 0..d {
                    let level = d - 1 - n;
                    let shrunk = params.interval()
                        - BigRational::from_integer(BigInt::from(level as u64)) * params.ratio();
                    acc *= shrunk / BigRational::from_integer(BigInt::from(p[level]));
                }
                out.push(acc);
            }
            Ok(out)
        }
    }
}

/// `A_total`: the sum of bar widths below the root, `Σ_{d=1}^{d_max} w_d`.
pub fn total_area(widths: &[BigRational]) -> BigRational {
    widths.iter().skip(1).sum()
}

/// The fully evaluated bar stack for one profile.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct BarTree {
    widths: Vec<BigRational>,
    areas: Vec<BigRational>,
    total_area: BigRational,
}

impl BarTree {
    pub fn compute(profile: &DepthProfile, params: &BarParams) -> Result<Self, BarError> {
        let w = widths(profile, params)?;
        let a = areas(&w);
        let total = total_area(&w);
        Ok(BarTree { widths: w, areas: a, total_area: total })
    }

    pub fn widths(&self) -> &[BigRational] {
        &self.widths
    }

    pub fn areas(&self) -> &[BigRational] {
        &self.areas
    }

    pub fn total_area(&self) -> &BigRational {
        &self.total_area
    }
}

/// The full structural signature of a page around its region of interest.
/// Field order is the wire order; rationals serialize as `"num/den"`.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Fingerprint {
    pub d_max: usize,
    #[serde(rename = "A_total", with = "rational_string")]
    pub a_total: BigRational,
    #[serde(rename = "P")]
    pub p: Vec<u32>,
    #[serde(rename = "A", with = "rational_vec")]
    pub a: Vec<BigRational>,
    pub sigma_upper: i64,
    pub sigma_lower: i64,
    pub delta: i64,
    #[serde(rename = "I", with = "rational_string")]
    pub interval: BigRational,
    #[serde(rename = "r", with = "rational_string")]
    pub ratio: BigRational,
    pub captured_at: String,
    pub roi_digest: String,
}

impl Fingerprint {
    /// Assembles the signature from the measured pieces. `captured_at` is
    /// injected rather than read from the clock so identical inputs give
    /// byte-identical output.
    pub fn from_analysis(
        profile: &DepthProfile,
        params: &BarParams,
        sigma_upper: i64,
        sigma_lower: i64,
        roi_digest: String,
        captured_at: String,
    ) -> Result<Self, BarError> {
        let tree = BarTree::compute(profile, params)?;
        Ok(Fingerprint {
            d_max: profile.d_max(),
            a_total: tree.total_area().clone(),
            p: profile.counts().to_vec(),
            a: tree.areas().to_vec(),
            sigma_upper,
            sigma_lower,
            delta: sigma_upper - sigma_lower,
            interval: params.interval().clone(),
            ratio: params.ratio().clone(),
            captured_at,
            roi_digest,
        })
    }

    pub fn params(&self) -> Result<BarParams, BarError> {
        BarParams::new(self.interval.clone(), self.ratio.clone())
    }
}

fn display_rational(v: &BigRational) -> String {
    format!("{}/{}", v.numer(), v.denom())
}

/// Parses `"num/den"` or a bare integer.
pub fn parse_rational(s: &str) -> Result<BigRational, BarError> {
    let bad = || BarError::ParseRational(s.to_string());
    match s.split_once('/') {
        Some((num, den)) => {
            let num: BigInt = num.trim().parse().map_err(|_| bad())?;
            let den: BigInt = den.trim().parse().map_err(|_| bad())?;
            if den.is_zero() {
                return Err(bad());
            }
            Ok(BigRational::new(num, den))
        }
        None => {
            let num: BigInt = s.trim().parse().map_err(|_| bad())?;
            Ok(BigRational::from_integer(num))
        }
    }
}

pub(crate) mod rational_string {
    use super::{display_rational, parse_rational};
    use num::BigRational;
    use serde::{de, Deserialize, Deserializer, Serializer};

    pub fn serialize<S: Serializer>(v: &BigRational, s: S) -> Result<S::Ok, S::Error> {
        s.serialize_str(&display_rational(v))
    }

    pub fn deserialize<'de, D: Deserializer<'de>>(d: D) -> Result<BigRational, D::Error> {
        let raw = String::deserialize(d)?;
        parse_rational(&raw).map_err(de::Error::custom)
    }
}

pub(crate) mod rational_vec {
    use super::{display_rational, parse_rational};
    use num::BigRational;
    use serde::{de, Deserialize, Deserializer, Serializer};

    pub fn serialize<S: Serializer>(v: &[BigRational], s: S) -> Result<S::Ok, S::Error> {
        s.collect_seq(v.iter().map(display_rational))
    }

    pub fn deserialize<'de, D: Deserializer<'de>>(d: D) -> Result<Vec<BigRational>, D::Error> {
        let raw = Vec::<String>::deserialize(d)?;
        raw.iter().map(|s| parse_rational(s).map_err(de::Error::custom)).collect()
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn rat(s: &str) -> BigRational {
        parse_rational(s).unwrap()
    }

    fn profile(counts: &[u32]) -> DepthProfile {
        let roi = counts.len();
        DepthProfile::new(counts.to_vec(), roi).unwrap()
    }

    #[test]
    fn worked_example_widths_and_areas() {
        let p = profile(&[1, 2, 1]);
        let params = BarParams::new(rat("1"), rat("1/10")).unwrap();
        let w = widths(&p, &params).unwrap();
        assert_eq!(w, vec![rat("1"), rat("1"), rat("9/20"), rat("9/25")]);
        let a = areas(&w);
        assert_eq!(a, vec![rat("0"), rat("1"), rat("9/10"), rat("27/25")]);
        assert_eq!(total_area(&w), rat("181/100"));
    }

    #[test]
    fn nett_forms_agree_and_equal_widths() {
        let p = profile(&[1, 2, 1]);
        let params = BarParams::new(rat("1"), rat("1/10")).unwrap();
        let rec = nett_areas(&p, &params, NettForm::Recursive).unwrap();
        let prod = nett_areas(&p, &params, NettForm::Product).unwrap();
        assert_eq!(rec, prod);
        assert_eq!(rec, widths(&p, &params).unwrap());
        assert_eq!(&rec[1..], &[rat("1"), rat("9/20"), rat("9/25")]);
    }

    #[test]
    fn zero_ratio_chain_totals() {
        // at the operating point I = 1, zero inset keeps every chain
        // width at the interval, so the total is just the depth
        let p = profile(&[1, 1, 1, 1, 1]);
        let params = BarParams::new(rat("1"), rat("0")).unwrap();
        let w = widths(&p, &params).unwrap();
        assert!(w.iter().all(|x| x == &rat("1")));
        assert_eq!(total_area(&w), rat("5"));

        // away from I = 1 the recurrence compounds the interval itself:
        // w_d = I^(d+1) on a chain, a geometric stack rather than a
        // constant one
        let params = BarParams::new(rat("7/3"), rat("0")).unwrap();
        let w = widths(&p, &params).unwrap();
        assert_eq!(w[5], rat("117649/729")); // (7/3)^6
        assert_eq!(total_area(&w), rat("202909/729"));
    }

    #[test]
    fn ratio_constraint_boundary() {
        let p = profile(&[1, 1, 1]);
        // r = I/d_max is still valid
        let params = BarParams::new(rat("1"), rat("1/3")).unwrap();
        assert!(widths(&p, &params).is_ok());
        // anything past it is not
        let params = BarParams::new(rat("1"), rat("34/100")).unwrap();
        assert!(matches!(widths(&p, &params), Err(BarError::InvalidRatio(_))));
    }

    #[test]
    fn param_validation() {
        assert!(matches!(BarParams::new(rat("0"), rat("0")), Err(BarError::InvalidInterval(_))));
        assert!(matches!(BarParams::new(rat("-1"), rat("0")), Err(BarError::InvalidInterval(_))));
        assert!(matches!(BarParams::new(rat("1"), rat("-1/2")), Err(BarError::InvalidRatio(_))));
        let d = BarParams::default_for(9);
        assert_eq!(d.ratio(), &rat("1/10"));
        assert_eq!(d.interval(), &rat("1"));
    }

    #[test]
    fn scaling_both_params_scales_width_by_depth_plus_one_power() {
        let p = profile(&[1, 3, 2]);
        let base = BarParams::new(rat("1"), rat("1/10")).unwrap();
        let scaled = BarParams::new(rat("2"), rat("2/10")).unwrap();
        let w0 = widths(&p, &base).unwrap();
        let w1 = widths(&p, &scaled).unwrap();
        for (d, (a, b)) in w0.iter().zip(&w1).enumerate() {
            let mut factor = BigRational::one();
            for _ in 0..=d {
                factor *= rat("2");
            }
            assert_eq!(b, &(factor * a));
        }
    }

    #[test]
    fn empty_profile_has_zero_total() {
        let p = DepthProfile::empty();
        let params = BarParams::default_for(0);
        let tree = BarTree::compute(&p, &params).unwrap();
        assert_eq!(tree.widths(), &[rat("1")]);
        assert_eq!(tree.areas(), &[rat("0")]);
        assert_eq!(tree.total_area(), &rat("0"));
    }

    #[test]
    fn fingerprint_wire_format_is_stable() {
        let p = profile(&[1, 2, 1]);
        let params = BarParams::new(rat("1"), rat("1/10")).unwrap();
        let fp = Fingerprint::from_analysis(
            &p,
            &params,
            2,
            2,
            "ab".repeat(32),
            "2026-01-15T12:00:00Z".into(),
        )
        .unwrap();
        let json = serde_json::to_string(&fp).unwrap();
        let expected = format!(
            "{{\"d_max\":3,\"A_total\":\"181/100\",\"P\":[1,2,1],\
             \"A\":[\"0/1\",\"1/1\",\"9/10\",\"27/25\"],\
             \"sigma_upper\":2,\"sigma_lower\":2,\"delta\":0,\
             \"I\":\"1/1\",\"r\":\"1/10\",\
             \"captured_at\":\"2026-01-15T12:00:00Z\",\"roi_digest\":\"{}\"}}",
            "ab".repeat(32)
        );
        assert_eq!(json, expected);
        let back: Fingerprint = serde_json::from_str(&json).unwrap();
        assert_eq!(back, fp);
    }

    #[test]
    fn rational_parsing() {
        assert_eq!(rat("9/20"), BigRational::new(BigInt::from(9), BigInt::from(20)));
        assert_eq!(rat("4/8"), rat("1/2")); // reduced on construction
        assert_eq!(rat("-3"), BigRational::from_integer(BigInt::from(-3)));
        assert!(parse_rational("1/0").is_err());
        assert!(parse_rational("x/2").is_err());
        assert!(parse_rational("").is_err());
    }
}
