//! Exact `α → ∞` limit of the principal eigenvalue from the local-maximum
//! structure and the boundary sign classes.
//!
//! Divergence rules:
//!
//! * an end that is an isolated maximum of `m` with side class `-` sends the
//!   limit to `-∞`;
//! * otherwise, if every maximum is an isolated end point and each of those
//!   ends has `ℓ ≠ 0`, the limit is `+∞`;
//! * otherwise the limit is the minimum of the contributions below.
//!
//! Finite contributions: sub-interval eigenvalues on plateaus (Neumann where
//! `m` drops away from the plateau, Dirichlet where it rises, the physical
//! condition at a domain end), `V` at interior isolated maxima, and `V` at
//! an end that is an isolated maximum with a Neumann condition.

use rayon::prelude::*;
use serde::Serialize;

use crate::classify::{local_maxima, MaxItem, MaxStructure};
use crate::eig1d::{sub_eigenvalue_refined, BcKind};
use crate::error::Result;
use crate::model::{Potential, ProblemSpec1D, SignClass};

/// Which side conditions a plateau eigenvalue uses.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub enum SubKind {
    ND,
    NN,
    DD,
    DN,
    RD,
    RN,
    NR,
    DR,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum Source {
    Plateau { bucket: u8, sub: SubKind, a: f64, b: f64 },
    InteriorMax { x: f64 },
    EndpointMax { x: f64 },
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Contribution {
    pub source: Source,
    pub label: String,
    pub value: f64,
    /// Numerical error of `value` (zero for point evaluations of V).
    pub error: f64,
}

impl Contribution {
    /// Region of [0, 1] where the eigenfunction is expected to concentrate.
    pub fn support(&self) -> (f64, f64) {
        match self.source {
            Source::Plateau { a, b, .. } => (a, b),
            Source::InteriorMax { x } | Source::EndpointMax { x } => (x, x),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
#[serde(tag = "verdict")]
pub enum LimitPrediction {
    Finite { value: f64, error: f64, contributions: Vec<Contribution> },
    PlusInfinity { reason: String },
    MinusInfinity { reason: String },
}

impl LimitPrediction {
    pub fn value(&self) -> Option<f64> {
        match self {
            LimitPrediction::Finite { value, .. } => Some(*value),
            _ => None,
        }
    }

    /// Contributions attaining the minimum (ties within their errors).
    pub fn minimizers(&self) -> Vec<&Contribution> {
        match self {
            LimitPrediction::Finite { value, contributions, .. } => contributions
                .iter()
                .filter(|c| c.value - value <= c.error + 1e-9 * (1.0 + value.abs()))
                .collect(),
            _ => Vec::new(),
        }
    }

    pub fn verdict_name(&self) -> &'static str {
        match self {
            LimitPrediction::Finite { .. } => "Finite",
            LimitPrediction::PlusInfinity { .. } => "PlusInfinity",
            LimitPrediction::MinusInfinity { .. } => "MinusInfinity",
        }
    }
}

/// Minimum of the interior-plateau eigenvalues (M2 to M5); `+∞` if none.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct FrakL {
    pub value: f64,
    pub contributions: Vec<Contribution>,
}

fn plateau_bc(sub: SubKind, spec_left: BcKind, spec_right: BcKind) -> (BcKind, BcKind) {
    use BcKind::{Dirichlet as D, Neumann as N};
    match sub {
        SubKind::ND => (N, D),
        SubKind::NN => (N, N),
        SubKind::DD => (D, D),
        SubKind::DN => (D, N),
        SubKind::RD => (spec_left, D),
        SubKind::RN => (spec_left, N),
        SubKind::NR => (N, spec_right),
        SubKind::DR => (D, spec_right),
    }
}

fn sub_name(sub: SubKind) -> &'static str {
    match sub {
        SubKind::ND => "ND",
        SubKind::NN => "NN",
        SubKind::DD => "DD",
        SubKind::DN => "DN",
        SubKind::RD => "RD",
        SubKind::RN => "RN",
        SubKind::NR => "NR",
        SubKind::DR => "DR",
    }
}

struct PlateauJob {
    bucket: u8,
    sub: SubKind,
    a: f64,
    b: f64,
}

fn plateau_jobs(s: &MaxStructure, buckets: &[(usize, SubKind)]) -> Vec<PlateauJob> {
    let mut jobs = Vec::new();
    for &(i, sub) in buckets {
        for item in s.bucket(i) {
            let (a, b) = item.span();
            jobs.push(PlateauJob { bucket: i as u8, sub, a, b });
        }
    }
    jobs
}

const INTERIOR_PLATEAUS: [(usize, SubKind); 4] =
    [(2, SubKind::ND), (3, SubKind::NN), (4, SubKind::DD), (5, SubKind::DN)];
const END_PLATEAUS: [(usize, SubKind); 4] =
    [(6, SubKind::RD), (7, SubKind::RN), (8, SubKind::NR), (9, SubKind::DR)];

fn solve_jobs(
    jobs: Vec<PlateauJob>,
    v: &Potential,
    left: BcKind,
    right: BcKind,
    diffusion: f64,
) -> Result<Vec<Contribution>> {
    jobs.into_par_iter()
        .map(|job| {
            let (l, r) = plateau_bc(job.sub, left, right);
            let e = sub_eigenvalue_refined(v, job.a, job.b, l, r, diffusion)?;
            Ok(Contribution {
                label: format!("λ₁^{}({}, {}), M{} segment", sub_name(job.sub), job.a, job.b, job.bucket),
                source: Source::Plateau { bucket: job.bucket, sub: job.sub, a: job.a, b: job.b },
                value: e.value,
                error: e.error,
            })
        })
        .collect()
}

fn min_value(cs: &[Contribution]) -> f64 {
    cs.iter().map(|c| c.value).fold(f64::INFINITY, f64::min)
}

/// `𝔏` for `-φ'' + V φ`.
pub fn frak_l(structure: &MaxStructure, v: &Potential) -> Result<FrakL> {
    frak_l_with(structure, v, 1.0)
}

pub fn frak_l_with(structure: &MaxStructure, v: &Potential, diffusion: f64) -> Result<FrakL> {
    let jobs = plateau_jobs(structure, &INTERIOR_PLATEAUS);
    // interior plateaus never touch the physical ends, so the side kinds are unused
    let contributions = solve_jobs(jobs, v, BcKind::Neumann, BcKind::Neumann, diffusion)?;
    Ok(FrakL { value: min_value(&contributions), contributions })
}

/// Which divergence (if any) the boundary classes and maxima force.
fn divergence(spec: &ProblemSpec1D, s: &MaxStructure) -> Option<LimitPrediction> {
    let (c1, c2) = spec.classes();
    let zero = s.has_left_end();
    let one = s.has_right_end();
    let (l1, l2) = (spec.left.ell, spec.right.ell);
    let case = match (c1 == SignClass::Minus, c2 == SignClass::Minus) {
        (false, false) => "ħ₁ℓ₁ ≥ 0, ħ₂ℓ₂ ≥ 0",
        (true, false) => "ħ₁ℓ₁ < 0, ħ₂ℓ₂ ≥ 0",
        (false, true) => "ħ₁ℓ₁ ≥ 0, ħ₂ℓ₂ < 0",
        (true, true) => "ħ₁ℓ₁ < 0, ħ₂ℓ₂ < 0",
    };
    if zero && c1 == SignClass::Minus {
        return Some(LimitPrediction::MinusInfinity {
            reason: format!("{case}: 0 is an isolated local maximum of m"),
        });
    }
    if one && c2 == SignClass::Minus {
        return Some(LimitPrediction::MinusInfinity {
            reason: format!("{case}: 1 is an isolated local maximum of m"),
        });
    }
    if s.only_endpoints() && (!zero || l1 != 0.0) && (!one || l2 != 0.0) {
        let ends = match (zero, one) {
            (true, true) => "{0, 1}",
            (true, false) => "{0}",
            _ => "{1}",
        };
        return Some(LimitPrediction::PlusInfinity {
            reason: format!("{case}: M = M1 = {ends} with ℓ ≠ 0 at those ends"),
        });
    }
    None
}

pub fn predict_limit(spec: &ProblemSpec1D) -> Result<LimitPrediction> {
    let s = local_maxima(&spec.m)?;
    if let Some(d) = divergence(spec, &s) {
        return Ok(d);
    }
    let left = BcKind::from(&spec.left);
    let right = BcKind::from(&spec.right);
    let mut jobs = plateau_jobs(&s, &INTERIOR_PLATEAUS);
    jobs.extend(plateau_jobs(&s, &END_PLATEAUS));
    let mut contributions = solve_jobs(jobs, &spec.v, left, right, spec.diffusion)?;
    for x in s.interior_points() {
        contributions.push(Contribution {
            source: Source::InteriorMax { x },
            label: format!("V({x}) at interior M1 point"),
            value: spec.v.eval_unchecked(x),
            error: 0.0,
        });
    }
    for item in &s.m1 {
        if let MaxItem::IsolatedPoint { x, location } = *item {
            use crate::classify::Location;
            let neumann = match location {
                Location::LeftEnd => spec.left.ell == 0.0,
                Location::RightEnd => spec.right.ell == 0.0,
                Location::Interior => false,
            };
            if neumann {
                let which = if x == 0.0 { "ℓ₁" } else { "ℓ₂" };
                contributions.push(Contribution {
                    source: Source::EndpointMax { x },
                    label: format!("V({x}), {x}∈M1 and {which}=0"),
                    value: spec.v.eval_unchecked(x),
                    error: 0.0,
                });
            }
        }
    }
    let value = min_value(&contributions);
    let error = contributions
        .iter()
        .filter(|c| c.value == value)
        .map(|c| c.error)
        .fold(0.0, f64::max);
    Ok(LimitPrediction::Finite { value, error, contributions })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::model::{End, PiecewiseProfile, RobinSide, SlopeSign};
    use crate::poly::Poly;
    use std::f64::consts::PI;

    fn with_bc(m: PiecewiseProfile, v: f64, left: RobinSide, right: RobinSide) -> ProblemSpec1D {
        ProblemSpec1D::new(m, Potential::constant(v), left, right)
    }

    #[test]
    fn neumann_right_end_gives_v1() {
        let s = with_bc(PiecewiseProfile::linear(1.0), 5.0, RobinSide::neumann(End::Left), RobinSide::neumann(End::Right));
        let p = predict_limit(&s).unwrap();
        let LimitPrediction::Finite { value, contributions, .. } = p else { panic!("{p:?}") };
        assert_eq!(value, 5.0);
        assert_eq!(contributions.len(), 1);
        assert_eq!(contributions[0].label, "V(1), 1∈M1 and ℓ₂=0");
    }

    #[test]
    fn increasing_profile_with_plus_sides_diverges_up() {
        let s = with_bc(
            PiecewiseProfile::linear(1.0),
            0.0,
            RobinSide::new(End::Left, 1.0, 1.0),
            RobinSide::dirichlet(End::Right),
        );
        assert!(matches!(predict_limit(&s).unwrap(), LimitPrediction::PlusInfinity { .. }));
    }

    #[test]
    fn decreasing_profile_with_minus_left_diverges_down() {
        let s = with_bc(
            PiecewiseProfile::linear(-1.0),
            0.0,
            RobinSide::new(End::Left, 1.0, -1.0),
            RobinSide::neumann(End::Right),
        );
        let p = predict_limit(&s).unwrap();
        assert_eq!(p.verdict_name(), "MinusInfinity");
    }

    #[test]
    fn frak_l_examples() {
        let zero = Potential::constant(0.0);
        assert_eq!(frak_l(&MaxStructure::default(), &zero).unwrap().value, f64::INFINITY);

        let mut s = MaxStructure::default();
        s.m3.push(MaxItem::Segment { a: 0.3, b: 0.5, left: crate::classify::Flank::I, right: crate::classify::Flank::D });
        assert!(frak_l(&s, &zero).unwrap().value.abs() < 1e-12);

        let mut s = MaxStructure::default();
        s.m2.push(MaxItem::Segment { a: 0.2, b: 0.4, left: crate::classify::Flank::I, right: crate::classify::Flank::I });
        let l = frak_l(&s, &zero).unwrap();
        assert!((l.value - (PI / 0.4).powi(2)).abs() < 1e-6, "{}", l.value);
    }

    #[test]
    fn plateau_then_hill_is_finite_for_all_listed_classes() {
        // flat on [0, .25], rising to a peak at .6, falling afterwards
        let m = PiecewiseProfile::from_curvature(
            &[0.0, 0.25, 0.3, 0.55, 0.65, 1.0],
            &[0.0, 0.0, 4.0, -4.0, -4.0, 0.0],
            0.0,
            0.0,
        )
        .unwrap();
        assert_eq!(m.signs()[0], SlopeSign::Zero);
        let v = Potential::global(vec![1.0, 2.0]);
        let sides = [
            (RobinSide::new(End::Left, 1.0, 1.0), RobinSide::new(End::Right, 1.0, 1.0)),
            (RobinSide::neumann(End::Left), RobinSide::neumann(End::Right)),
            (RobinSide::new(End::Left, 1.0, -1.0), RobinSide::new(End::Right, 1.0, -1.0)),
        ];
        for (l, r) in sides {
            let spec = ProblemSpec1D::new(m.clone(), v.clone(), l, r);
            let p = predict_limit(&spec).unwrap();
            let LimitPrediction::Finite { value, contributions, .. } = &p else { panic!("{p:?}") };
            assert_eq!(contributions.len(), 2);
            let rd = sub_eigenvalue_refined(&v, 0.0, 0.25, BcKind::from(&l), BcKind::Dirichlet, 1.0).unwrap();
            let peak = contributions.iter().find(|c| matches!(c.source, Source::InteriorMax { .. })).unwrap();
            assert!((value - rd.value.min(peak.value)).abs() < 1e-12);
        }
    }

    #[test]
    fn constant_shift_moves_finite_limit() {
        let m = PiecewiseProfile::with_inferred_signs(vec![0.0, 1.0], vec![Poly::new(vec![0.0, 1.0, -1.0])]).unwrap();
        let base = ProblemSpec1D::new(
            m,
            Potential::global(vec![0.5, 1.0]),
            RobinSide::neumann(End::Left),
            RobinSide::dirichlet(End::Right),
        );
        let mut shifted = base.clone();
        shifted.v = base.v.plus_constant(2.5);
        let a = predict_limit(&base).unwrap().value().unwrap();
        let b = predict_limit(&shifted).unwrap().value().unwrap();
        assert!((b - a - 2.5).abs() < 1e-12);
    }
}
