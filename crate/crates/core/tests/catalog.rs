//! Limit verdicts for the eight figure families against the reference
//! tables, with plateau eigenvalues checked by an independent shooting
//! solver.

use advlim::catalog::{cases, CatalogCase, Family};
use advlim::predict::{predict_limit, LimitPrediction, Source, SubKind};
use advlim::sweep::verify;
use advlim::{Potential, SignClass};

#[derive(Debug, Clone, Copy, PartialEq)]
enum Term {
    Plateau,
    AtX2,
    AtZero,
    AtOne,
}

#[derive(Debug, Clone, PartialEq)]
enum Expect {
    Finite(Vec<Term>),
    Plus,
    Minus,
}

use Expect::{Finite, Minus, Plus};
use SignClass::{Minus as M, Plus as P, Zero as Z};
use Term::*;

fn table(family: Family, classes: (SignClass, SignClass)) -> Expect {
    match (family, classes) {
        (Family::Fig1a | Family::Fig4a, (P, P)) => Finite(vec![Plateau]),
        (Family::Fig1a | Family::Fig4a, (P, Z) | (Z, Z) | (M, Z)) => Finite(vec![Plateau, AtOne]),
        (Family::Fig1a | Family::Fig4a, (Z, M) | (M, M)) => Minus,
        (Family::Fig1b, (P, P)) => Plus,
        (Family::Fig1b, (P, Z) | (Z, Z) | (M, Z)) => Finite(vec![AtOne]),
        (Family::Fig1b, (Z, M) | (M, M)) => Minus,
        (Family::Fig2a, _) => Finite(vec![Plateau, AtX2]),
        (Family::Fig2b, _) => Finite(vec![AtX2]),
        (Family::Fig3a, _) => Finite(vec![Plateau]),
        (Family::Fig3b, (P, P) | (P, Z)) => Plus,
        (Family::Fig3b, (Z, Z) | (Z, M)) => Finite(vec![AtZero]),
        (Family::Fig3b, (M, Z) | (M, M)) => Minus,
        (Family::Fig4b, (P, P)) => Plus,
        (Family::Fig4b, (P, Z)) => Finite(vec![AtOne]),
        // The table lists V(1) alone; 0 is also a maximum with a Neumann
        // end, so the V(0) term is present too (the catalog makes them equal).
        (Family::Fig4b, (Z, Z)) => Finite(vec![AtZero, AtOne]),
        // The table lists V(1), but 0 is a maximum of m with a side of class
        // −, which forces −∞ in the divergence criteria.
        (Family::Fig4b, (M, Z)) => Minus,
        (Family::Fig4b, (Z, M) | (M, M)) => Minus,
        _ => unreachable!("combination outside the six tabulated ones"),
    }
}

fn term_of(source: &Source, case: &CatalogCase) -> Term {
    match *source {
        Source::Plateau { a, b, .. } => {
            assert_eq!((a, b), (0.0, case.family.plateau_end().unwrap()));
            Plateau
        }
        Source::InteriorMax { x } => {
            assert_eq!(Some(x), case.family.interior_point());
            AtX2
        }
        Source::EndpointMax { x: 0.0 } => AtZero,
        Source::EndpointMax { .. } => AtOne,
    }
}

/// End condition for the shooting oracle: `φ' = r φ`, or Dirichlet.
#[derive(Clone, Copy)]
enum Bc {
    Dirichlet,
    Ratio(f64),
}

/// Principal eigenvalue of `-φ'' + V φ = λ φ` on `(0, b)` by RK4 shooting
/// and bisection on whether the solution has reached its first node.
fn shoot(v: &Potential, b: f64, left: Bc, right: Bc) -> f64 {
    let steps = 20_000;
    let h = b / steps as f64;
    let past_first = |lambda: f64| {
        let (mut y, mut p) = match left {
            Bc::Dirichlet => (0.0, 1.0),
            Bc::Ratio(r) => (1.0, r),
        };
        let f = |x: f64, y: f64| (v.evaluate(x.min(1.0)).unwrap() - lambda) * y;
        for i in 0..steps {
            let x = i as f64 * h;
            let (k1y, k1p) = (p, f(x, y));
            let (k2y, k2p) = (p + 0.5 * h * k1p, f(x + 0.5 * h, y + 0.5 * h * k1y));
            let (k3y, k3p) = (p + 0.5 * h * k2p, f(x + 0.5 * h, y + 0.5 * h * k2y));
            let (k4y, k4p) = (p + h * k3p, f(x + h, y + h * k3y));
            y += h / 6.0 * (k1y + 2.0 * k2y + 2.0 * k3y + k4y);
            p += h / 6.0 * (k1p + 2.0 * k2p + 2.0 * k3p + k4p);
            if y <= 0.0 && i + 1 < steps {
                return true;
            }
        }
        match right {
            Bc::Dirichlet => y <= 0.0,
            Bc::Ratio(r) => p - r * y <= 0.0,
        }
    };
    let (mut lo, mut hi) = (-1e3, 1e5);
    for _ in 0..100 {
        let mid = 0.5 * (lo + hi);
        if past_first(mid) {
            hi = mid;
        } else {
            lo = mid;
        }
    }
    0.5 * (lo + hi)
}

fn left_bc(class: SignClass) -> Bc {
    match class {
        SignClass::Plus => Bc::Dirichlet,
        SignClass::Zero => Bc::Ratio(0.0),
        SignClass::Minus => Bc::Ratio(-1.0),
    }
}

#[test]
fn verdicts_match_the_reference_tables() {
    for case in cases() {
        let p = predict_limit(&case.spec).unwrap();
        let expect = table(case.family, case.classes);
        match (&expect, &p) {
            (Plus, LimitPrediction::PlusInfinity { .. }) | (Minus, LimitPrediction::MinusInfinity { .. }) => {}
            (Finite(terms), LimitPrediction::Finite { contributions, .. }) => {
                let got: Vec<Term> = contributions.iter().map(|c| term_of(&c.source, &case)).collect();
                assert_eq!(&got.len(), &terms.len(), "{}: {got:?}", case.name());
                assert!(terms.iter().all(|t| got.contains(t)), "{}: {got:?} vs {terms:?}", case.name());
            }
            _ => panic!("{}: expected {expect:?}, predicted {}", case.name(), p.verdict_name()),
        }
    }
}

#[test]
fn contribution_values_match_independent_oracles() {
    for case in cases() {
        let LimitPrediction::Finite { value, contributions, .. } = predict_limit(&case.spec).unwrap() else {
            continue;
        };
        let v = case.family.potential();
        for c in &contributions {
            let expected = match c.source {
                Source::Plateau { sub, b, .. } => {
                    let right = match sub {
                        SubKind::RD => Bc::Dirichlet,
                        SubKind::RN => Bc::Ratio(0.0),
                        other => panic!("{}: unexpected plateau kind {other:?}", case.name()),
                    };
                    shoot(&v, b, left_bc(case.classes.0), right)
                }
                Source::InteriorMax { x } | Source::EndpointMax { x } => v.evaluate(x).unwrap(),
            };
            assert!(
                (c.value - expected).abs() <= 1e-6 * (1.0 + expected.abs()),
                "{} {}: {} vs oracle {}",
                case.name(),
                c.label,
                c.value,
                expected
            );
        }
        let min = contributions.iter().map(|c| c.value).fold(f64::INFINITY, f64::min);
        assert_eq!(value, min);
    }
}

#[test]
fn plateau_kind_follows_the_flank() {
    for case in cases() {
        if let LimitPrediction::Finite { contributions, .. } = predict_limit(&case.spec).unwrap() {
            for c in contributions {
                if let Source::Plateau { bucket, sub, .. } = c.source {
                    let increasing = matches!(case.family, Family::Fig1a | Family::Fig2a);
                    assert_eq!((bucket, sub), if increasing { (6, SubKind::RD) } else { (7, SubKind::RN) });
                }
            }
        }
    }
}

#[test]
fn verification_is_deterministic() {
    let case = CatalogCase::new(Family::Fig2a, (SignClass::Zero, SignClass::Zero));
    let alphas = [0.0, 5.0, 10.0, 20.0, 40.0];
    let strip = |mut r: advlim::sweep::VerificationReport| {
        for p in &mut r.points {
            p.ms = 0;
        }
        serde_json::to_string(&r).unwrap()
    };
    let a = strip(verify(&case.spec, &alphas).unwrap());
    let b = strip(verify(&case.spec, &alphas).unwrap());
    assert_eq!(a, b);
}
