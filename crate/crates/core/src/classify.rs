//! Local-maximum structure of the advection profile.
//!
//! The slope-sign runs of `m` are turned into nine buckets:
//!
//! | bucket | item            | flanks (left, right)       |
//! |--------|-----------------|----------------------------|
//! | M1     | isolated point  | `+` then `-`, or an end    |
//! | M2     | `[a, b]`        | increasing, increasing     |
//! | M3     | `[a, b]`        | increasing, decreasing     |
//! | M4     | `[a, b]`        | decreasing, increasing     |
//! | M5     | `[a, b]`        | decreasing, decreasing     |
//! | M6     | `[0, a]`        | end, increasing            |
//! | M7     | `[0, a]`        | end, decreasing            |
//! | M8     | `[a, 1]`        | increasing, end            |
//! | M9     | `[a, 1]`        | decreasing, end            |

use serde::Serialize;

use crate::error::{Error, Result};
use crate::model::{PiecewiseProfile, SlopeSign};

/// Maximal interval on which `m'` keeps one sign (or vanishes).
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct Run {
    pub a: f64,
    pub b: f64,
    pub sign: SlopeSign,
}

/// Merged sign runs covering [0, 1]; neighbouring runs differ in sign.
pub fn critical_structure(m: &PiecewiseProfile) -> Result<Vec<Run>> {
    let bps = m.breakpoints();
    let mut runs: Vec<Run> = Vec::new();
    for (k, &sign) in m.signs().iter().enumerate() {
        match runs.last_mut() {
            Some(last) if last.sign == sign => last.b = bps[k + 1],
            _ => runs.push(Run { a: bps[k], b: bps[k + 1], sign }),
        }
    }
    if runs.iter().all(|r| r.sign == SlopeSign::Zero) {
        return Err(Error::ConstantProfile);
    }
    Ok(runs)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub enum Flank {
    /// `m` increases across this side, left to right.
    I,
    D,
    End,
}

impl Flank {
    fn from_sign(s: SlopeSign) -> Flank {
        match s {
            SlopeSign::Pos => Flank::I,
            SlopeSign::Neg => Flank::D,
            SlopeSign::Zero => unreachable!("merged runs never neighbour a zero run with a zero run"),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum Location {
    Interior,
    LeftEnd,
    RightEnd,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
#[serde(tag = "kind")]
pub enum MaxItem {
    IsolatedPoint { x: f64, location: Location },
    Segment { a: f64, b: f64, left: Flank, right: Flank },
}

impl MaxItem {
    /// Interval covered by the item; a point gives `(x, x)`.
    pub fn span(&self) -> (f64, f64) {
        match *self {
            MaxItem::IsolatedPoint { x, .. } => (x, x),
            MaxItem::Segment { a, b, .. } => (a, b),
        }
    }
}

#[derive(Debug, Clone, Default, PartialEq, Serialize)]
pub struct MaxStructure {
    #[serde(rename = "M1")]
    pub m1: Vec<MaxItem>,
    #[serde(rename = "M2")]
    pub m2: Vec<MaxItem>,
    #[serde(rename = "M3")]
    pub m3: Vec<MaxItem>,
    #[serde(rename = "M4")]
    pub m4: Vec<MaxItem>,
    #[serde(rename = "M5")]
    pub m5: Vec<MaxItem>,
    #[serde(rename = "M6")]
    pub m6: Vec<MaxItem>,
    #[serde(rename = "M7")]
    pub m7: Vec<MaxItem>,
    #[serde(rename = "M8")]
    pub m8: Vec<MaxItem>,
    #[serde(rename = "M9")]
    pub m9: Vec<MaxItem>,
    /// Interior `(-, +)` junctions: isolated local minima, no contribution.
    pub discarded_minima: Vec<f64>,
}

impl MaxStructure {
    /// Bucket by its 1-based index.
    pub fn bucket(&self, i: usize) -> &[MaxItem] {
        match i {
            1 => &self.m1,
            2 => &self.m2,
            3 => &self.m3,
            4 => &self.m4,
            5 => &self.m5,
            6 => &self.m6,
            7 => &self.m7,
            8 => &self.m8,
            9 => &self.m9,
            _ => panic!("bucket index {i} outside 1..=9"),
        }
    }

    fn bucket_mut(&mut self, i: usize) -> &mut Vec<MaxItem> {
        match i {
            1 => &mut self.m1,
            2 => &mut self.m2,
            3 => &mut self.m3,
            4 => &mut self.m4,
            5 => &mut self.m5,
            6 => &mut self.m6,
            7 => &mut self.m7,
            8 => &mut self.m8,
            _ => &mut self.m9,
        }
    }

    pub fn len(&self) -> usize {
        (1..=9).map(|i| self.bucket(i).len()).sum()
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    pub fn has_left_end(&self) -> bool {
        self.m1.iter().any(|p| matches!(p, MaxItem::IsolatedPoint { location: Location::LeftEnd, .. }))
    }

    pub fn has_right_end(&self) -> bool {
        self.m1.iter().any(|p| matches!(p, MaxItem::IsolatedPoint { location: Location::RightEnd, .. }))
    }

    /// `M = M1 ⊂ {0, 1}` with M nonempty.
    pub fn only_endpoints(&self) -> bool {
        !self.is_empty()
            && self.len() == self.m1.len()
            && self.m1.iter().all(|p| !matches!(p, MaxItem::IsolatedPoint { location: Location::Interior, .. }))
    }

    pub fn interior_points(&self) -> impl Iterator<Item = f64> + '_ {
        self.m1.iter().filter_map(|p| match p {
            MaxItem::IsolatedPoint { x, location: Location::Interior } => Some(*x),
            _ => None,
        })
    }
}

/// Buckets the local maxima of `m`.
pub fn local_maxima(m: &PiecewiseProfile) -> Result<MaxStructure> {
    let runs = critical_structure(m)?;
    let mut s = MaxStructure::default();
    let k = runs.len();
    if runs[0].sign == SlopeSign::Neg {
        s.m1.push(MaxItem::IsolatedPoint { x: 0.0, location: Location::LeftEnd });
    }
    for j in 0..k {
        let run = runs[j];
        if run.sign == SlopeSign::Zero {
            let left = if j == 0 { Flank::End } else { Flank::from_sign(runs[j - 1].sign) };
            let right = if j + 1 == k { Flank::End } else { Flank::from_sign(runs[j + 1].sign) };
            let bucket = match (left, right) {
                (Flank::I, Flank::I) => 2,
                (Flank::I, Flank::D) => 3,
                (Flank::D, Flank::I) => 4,
                (Flank::D, Flank::D) => 5,
                (Flank::End, Flank::I) => 6,
                (Flank::End, Flank::D) => 7,
                (Flank::I, Flank::End) => 8,
                (Flank::D, Flank::End) => 9,
                (Flank::End, Flank::End) => unreachable!("constant profiles are rejected"),
            };
            s.bucket_mut(bucket).push(MaxItem::Segment { a: run.a, b: run.b, left, right });
        } else if j + 1 < k && runs[j + 1].sign != SlopeSign::Zero {
            let x = run.b;
            match (run.sign, runs[j + 1].sign) {
                (SlopeSign::Pos, SlopeSign::Neg) => {
                    s.m1.push(MaxItem::IsolatedPoint { x, location: Location::Interior })
                }
                _ => s.discarded_minima.push(x),
            }
        }
    }
    if runs[k - 1].sign == SlopeSign::Pos {
        s.m1.push(MaxItem::IsolatedPoint { x: 1.0, location: Location::RightEnd });
    }
    Ok(s)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::poly::Poly;

    fn fig2a() -> PiecewiseProfile {
        build_slopes(&[0.0, 0.25, 0.6, 1.0], &[0.0, 1.0, -1.0])
    }

    #[test]
    fn runs_of_simple_profiles() {
        let up = critical_structure(&PiecewiseProfile::linear(1.0)).unwrap();
        assert_eq!(up, vec![Run { a: 0.0, b: 1.0, sign: SlopeSign::Pos }]);
        let down = critical_structure(&PiecewiseProfile::linear(-1.0)).unwrap();
        assert_eq!(down[0].sign, SlopeSign::Neg);
        assert!(matches!(
            critical_structure(&PiecewiseProfile::constant(1.0)),
            Err(Error::ConstantProfile)
        ));
    }

    #[test]
    fn plateau_then_hill() {
        let runs = critical_structure(&fig2a()).unwrap();
        let signs: Vec<_> = runs.iter().map(|r| r.sign).collect();
        assert_eq!(signs, [SlopeSign::Zero, SlopeSign::Pos, SlopeSign::Neg]);
        assert_eq!((runs[0].b, runs[1].b), (0.25, 0.6));
        let s = local_maxima(&fig2a()).unwrap();
        assert_eq!(s.m6, vec![MaxItem::Segment { a: 0.0, b: 0.25, left: Flank::End, right: Flank::I }]);
        assert_eq!(s.m1, vec![MaxItem::IsolatedPoint { x: 0.6, location: Location::Interior }]);
        assert_eq!(s.len(), 2);
    }

    #[test]
    fn monotone_profiles_have_one_endpoint_maximum() {
        let s = local_maxima(&PiecewiseProfile::linear(1.0)).unwrap();
        assert_eq!(s.m1, vec![MaxItem::IsolatedPoint { x: 1.0, location: Location::RightEnd }]);
        assert!(s.only_endpoints());
        let s = local_maxima(&PiecewiseProfile::linear(-1.0)).unwrap();
        assert_eq!(s.m1, vec![MaxItem::IsolatedPoint { x: 0.0, location: Location::LeftEnd }]);
    }

    #[test]
    fn valley_keeps_both_ends_and_discards_the_minimum() {
        // (x - 0.4)^2
        let m = PiecewiseProfile::with_inferred_signs(vec![0.0, 1.0], vec![Poly::new(vec![0.16, -0.8, 1.0])]).unwrap();
        let s = local_maxima(&m).unwrap();
        assert!(s.has_left_end() && s.has_right_end() && s.only_endpoints());
        assert_eq!(s.discarded_minima.len(), 1);
        assert!((s.discarded_minima[0] - 0.4).abs() < 1e-12);
    }

    #[test]
    fn shelves_and_plateaus() {
        // slope profile + 0 + 0... built from curvature bumps:
        // up, shelf, up, plateau max, down, shelf, down, plateau min, up
        let knots = [0.0, 0.1, 0.2, 0.3, 0.4, 0.5, 0.6, 0.7, 0.8, 0.9, 1.0];
        let m = build_slopes(&knots, &[1.0, 0.0, 1.0, 0.0, -1.0, 0.0, -1.0, 0.0, 1.0, 1.0]);
        let s = local_maxima(&m).unwrap();
        assert_eq!(s.m2.len(), 1);
        assert_eq!(s.m3.len(), 1);
        assert_eq!(s.m5.len(), 1);
        assert_eq!(s.m4.len(), 1);
        assert!(s.has_right_end());
        assert!(!s.has_left_end());
    }

    /// Profile with the given constant slope on each interval (C0 only; the
    /// classifier needs signs, not smoothness).
    fn build_slopes(knots: &[f64], slopes: &[f64]) -> PiecewiseProfile {
        let mut pieces = Vec::new();
        let mut signs = Vec::new();
        let mut value = 0.0;
        for (k, &s) in slopes.iter().enumerate() {
            pieces.push(Poly::new(vec![value, s]));
            value += s * (knots[k + 1] - knots[k]);
            signs.push(if s > 0.0 {
                SlopeSign::Pos
            } else if s < 0.0 {
                SlopeSign::Neg
            } else {
                SlopeSign::Zero
            });
        }
        PiecewiseProfile::new(knots.to_vec(), pieces, signs).unwrap()
    }

    #[test]
    fn boundary_plateaus() {
        let knots = [0.0, 0.3, 0.7, 1.0];
        let s = local_maxima(&build_slopes(&knots, &[0.0, 1.0, 0.0])).unwrap();
        assert_eq!((s.m6.len(), s.m8.len()), (1, 1));
        let s = local_maxima(&build_slopes(&knots, &[0.0, -1.0, 0.0])).unwrap();
        assert_eq!((s.m7.len(), s.m9.len()), (1, 1));
    }
}
