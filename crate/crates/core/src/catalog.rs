//! Reference problems: the four figure families, each as a plateau variant
//! (a) and a variant with the plateau shrunk into the boundary (b), under the
//! six sign-class combinations (+,+), (+,0), (0,0), (0,−), (−,0), (−,−).
//!
//! Class representatives: `+` is Dirichlet, `0` is Neumann, `−` is the Robin
//! side `ħ = 1, ℓ = −1`.

use crate::model::{End, PiecewiseProfile, Potential, ProblemSpec1D, RobinSide, SignClass};
use crate::poly::Poly;

pub const SIGN_COMBOS: [(SignClass, SignClass); 6] = [
    (SignClass::Plus, SignClass::Plus),
    (SignClass::Plus, SignClass::Zero),
    (SignClass::Zero, SignClass::Zero),
    (SignClass::Zero, SignClass::Minus),
    (SignClass::Minus, SignClass::Zero),
    (SignClass::Minus, SignClass::Minus),
];

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Family {
    Fig1a,
    Fig1b,
    Fig2a,
    Fig2b,
    Fig3a,
    Fig3b,
    Fig4a,
    Fig4b,
}

impl Family {
    pub const ALL: [Family; 8] = [
        Family::Fig1a,
        Family::Fig1b,
        Family::Fig2a,
        Family::Fig2b,
        Family::Fig3a,
        Family::Fig3b,
        Family::Fig4a,
        Family::Fig4b,
    ];

    pub fn name(self) -> &'static str {
        match self {
            Family::Fig1a => "fig1a",
            Family::Fig1b => "fig1b",
            Family::Fig2a => "fig2a",
            Family::Fig2b => "fig2b",
            Family::Fig3a => "fig3a",
            Family::Fig3b => "fig3b",
            Family::Fig4a => "fig4a",
            Family::Fig4b => "fig4b",
        }
    }

    /// Right end of the plateau `[0, x₁]`, if the family has one.
    pub fn plateau_end(self) -> Option<f64> {
        match self {
            Family::Fig1a | Family::Fig3a | Family::Fig4a => Some(0.5),
            Family::Fig2a => Some(0.3),
            _ => None,
        }
    }

    /// Interior extremum `x₂` (a maximum in figure 2, a minimum in figure 4).
    pub fn interior_point(self) -> Option<f64> {
        match self {
            Family::Fig2a => Some(0.6),
            Family::Fig2b => Some(0.5),
            Family::Fig4a => Some(0.75),
            Family::Fig4b => Some(0.5),
            _ => None,
        }
    }

    pub fn profile(self) -> PiecewiseProfile {
        let built = match self {
            Family::Fig1a => PiecewiseProfile::from_slope_hermite(
                &[0.0, 0.5, 0.51, 0.6, 1.0],
                &[0.0, 0.0, 5.0, 5.0, 1.0],
                &[0.0; 5],
                0.0,
            ),
            Family::Fig1b => Ok(PiecewiseProfile::linear(1.0)),
            Family::Fig2a => PiecewiseProfile::from_slope_hermite(
                &[0.0, 0.3, 0.31, 0.4, 0.6, 0.8, 1.0],
                &[0.0, 0.0, 20.0, 20.0, 0.0, -20.0, -20.0],
                &[0.0, 0.0, 0.0, 0.0, -100.0, 0.0, 0.0],
                0.0,
            ),
            Family::Fig2b => PiecewiseProfile::from_slope_hermite(
                &[0.0, 0.3, 0.5, 0.7, 1.0],
                &[20.0, 20.0, 0.0, -20.0, -20.0],
                &[0.0, 0.0, -100.0, 0.0, 0.0],
                0.0,
            ),
            Family::Fig3a => PiecewiseProfile::from_slope_hermite(
                &[0.0, 0.5, 0.51, 1.0],
                &[0.0, 0.0, -20.0, -20.0],
                &[0.0; 4],
                0.0,
            ),
            Family::Fig3b => Ok(PiecewiseProfile::linear(-1.0)),
            Family::Fig4a => PiecewiseProfile::from_slope_hermite(
                &[0.0, 0.5, 0.51, 0.6, 0.75, 0.8, 1.0],
                &[0.0, 0.0, -20.0, -20.0, 0.0, 5.0, 1.0],
                &[0.0, 0.0, 0.0, 0.0, 100.0, 0.0, 0.0],
                0.0,
            ),
            Family::Fig4b => Ok(PiecewiseProfile::with_inferred_signs(
                vec![0.0, 1.0],
                vec![Poly::new(vec![0.25, -1.0, 1.0])],
            )
            .expect("quadratic profile")),
        };
        built.expect("catalog profile is well formed")
    }

    pub fn potential(self) -> Potential {
        // Where the limit is V at a maximum of m, the global minimum of V is put
        // elsewhere so λ(α) rises towards its limit along the sweep.
        // plateau wells sit at x = 0, far from the plateau edge, so the edge
        // layer barely moves the sub-interval eigenvalue
        let well = |k: f64, v0: f64| Poly::new(vec![v0, 0.0, k]);
        let built = match self {
            Family::Fig1a => Potential::from_global(
                vec![0.0, 0.5, 0.8, 1.0],
                vec![well(2500.0, 0.0), towards(0.5, 625.0, 0.8, 100.0), Poly::constant(100.0)],
            ),
            Family::Fig1b => Ok(Potential::global(vec![50.0, 100.0, -50.0])),
            Family::Fig2a => Potential::from_global(
                vec![0.0, 0.3, 0.6, 0.8, 1.0],
                vec![
                    well(1600.0, 4.0),
                    towards(0.3, 148.0, 0.6, 0.0),
                    smoothstep(0.6, 0.0, 0.8, -60.0),
                    smoothstep(0.8, -60.0, 1.0, 0.0),
                ],
            ),
            Family::Fig2b => Potential::from_global(
                vec![0.0, 0.2, 0.5, 1.0],
                vec![smoothstep(0.0, 3.0, 0.2, -57.0), smoothstep(0.2, -57.0, 0.5, 3.0), Poly::constant(3.0)],
            ),
            Family::Fig3a => Potential::from_global(
                vec![0.0, 0.5, 0.8, 1.0],
                vec![well(2500.0, 0.0), towards(0.5, 625.0, 0.8, 100.0), Poly::constant(100.0)],
            ),
            Family::Fig3b => Ok(Potential::global(vec![100.0, 0.0, -50.0])),
            Family::Fig4a => Potential::from_global(
                vec![0.0, 0.5, 0.8, 1.0],
                vec![well(2500.0, 0.0), towards(0.5, 625.0, 0.8, 100.0), Poly::constant(100.0)],
            ),
            Family::Fig4b => Ok(Potential::global(vec![100.0, 0.0, -800.0, 1600.0, -800.0])),
        };
        built.expect("catalog potential is well formed")
    }
}

/// Quadratic through `(x0, y0)` with vertex `(x1, y1)`.
fn towards(x0: f64, y0: f64, x1: f64, y1: f64) -> Poly {
    let k = (y0 - y1) / ((x0 - x1) * (x0 - x1));
    Poly::new(vec![y1 + k * x1 * x1, -2.0 * k * x1, k])
}

/// Cubic from `(x0, y0)` to `(x1, y1)` with zero slope at both ends.
fn smoothstep(x0: f64, y0: f64, x1: f64, y1: f64) -> Poly {
    let (l, d) = (x1 - x0, y1 - y0);
    Poly::new(vec![y0, 0.0, 3.0 * d / (l * l), -2.0 * d / (l * l * l)]).shifted(-x0)
}

pub fn representative(end: End, class: SignClass) -> RobinSide {
    match class {
        SignClass::Plus => RobinSide::dirichlet(end),
        SignClass::Zero => RobinSide::neumann(end),
        SignClass::Minus => RobinSide::new(end, 1.0, -1.0),
    }
}

#[derive(Debug, Clone)]
pub struct CatalogCase {
    pub family: Family,
    pub classes: (SignClass, SignClass),
    pub spec: ProblemSpec1D,
}

impl CatalogCase {
    pub fn new(family: Family, classes: (SignClass, SignClass)) -> Self {
        let spec = ProblemSpec1D::new(
            family.profile(),
            family.potential(),
            representative(End::Left, classes.0),
            representative(End::Right, classes.1),
        );
        CatalogCase { family, classes, spec }
    }

    /// e.g. `fig2a_pluszero`
    pub fn name(&self) -> String {
        format!("{}_{}{}", self.family.name(), class_word(self.classes.0), class_word(self.classes.1))
    }
}

fn class_word(c: SignClass) -> &'static str {
    match c {
        SignClass::Plus => "plus",
        SignClass::Zero => "zero",
        SignClass::Minus => "minus",
    }
}

/// All 48 family × sign-class cases.
pub fn cases() -> Vec<CatalogCase> {
    Family::ALL
        .iter()
        .flat_map(|&f| SIGN_COMBOS.iter().map(move |&c| CatalogCase::new(f, c)))
        .collect()
}

/// `V ≡ 5`, `m = x`, Neumann ends: the eigenvalue is 5 for every α.
pub fn constant_v() -> ProblemSpec1D {
    ProblemSpec1D::new(
        PiecewiseProfile::linear(1.0),
        Potential::constant(5.0),
        RobinSide::neumann(End::Left),
        RobinSide::neumann(End::Right),
    )
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::model::validate;

    #[test]
    fn every_case_validates() {
        for case in cases() {
            let r = validate(&case.spec);
            assert!(r.is_valid(), "{}: {}", case.name(), r);
            assert_eq!(case.spec.classes(), case.classes);
        }
        assert!(validate(&constant_v()).is_valid());
    }

    #[test]
    fn potentials_hit_design_values() {
        assert!((Family::Fig1a.potential().evaluate(1.0).unwrap() - 100.0).abs() < 1e-9);
        assert!((Family::Fig2a.potential().evaluate(0.6).unwrap()).abs() < 1e-9);
        assert!((Family::Fig3b.potential().evaluate(0.0).unwrap() - 100.0).abs() < 1e-9);
        let v = Family::Fig4b.potential();
        assert!((v.evaluate(0.0).unwrap() - 100.0).abs() < 1e-9);
        assert!((v.evaluate(1.0).unwrap() - 100.0).abs() < 1e-9);
    }

    #[test]
    fn names_are_unique() {
        let mut names: Vec<String> = cases().iter().map(|c| c.name()).collect();
        names.sort();
        names.dedup();
        assert_eq!(names.len(), 48);
    }
}
