//! Problem data for the 1D eigenproblem
//!
//! ```text
//! -D φ'' - 2α m'(x) φ' + V(x) φ = λ φ   on (0, 1)
//! -ħ₁ φ'(0) + ℓ₁ φ(0) = 0,   ħ₂ φ'(1) + ℓ₂ φ(1) = 0
//! ```
//!
//! The advection profile `m` is a C² piecewise polynomial whose slope has a
//! fixed sign (or vanishes identically) on every open piece, so the sign
//! structure of `m'` is exact rather than sampled.

use std::fmt;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::poly::{isolate_roots, Poly, SturmChain};

/// Breakpoint matching tolerance on values.
pub const VALUE_MATCH_TOL: f64 = 1e-10;
/// Breakpoint matching tolerance on first and second derivatives.
pub const DERIVATIVE_MATCH_TOL: f64 = 1e-8;
/// A slope polynomial whose coefficients (scaled to the piece length) stay
/// below this is identically zero.
const ZERO_SLOPE_TOL: f64 = 1e-12;
/// Roots of `m'` this close to a piece end (relative to its length) are
/// taken to be the end root itself; a double root there splits by ~√ε.
const ROOT_EDGE: f64 = 1e-7;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum End {
    Left,
    Right,
}

impl fmt::Display for End {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            End::Left => f.write_str("left"),
            End::Right => f.write_str("right"),
        }
    }
}

/// Sign of `m'` on an open piece.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum SlopeSign {
    #[serde(rename = "+")]
    Pos,
    #[serde(rename = "-")]
    Neg,
    #[serde(rename = "zero")]
    Zero,
}

impl fmt::Display for SlopeSign {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            SlopeSign::Pos => "+",
            SlopeSign::Neg => "-",
            SlopeSign::Zero => "zero",
        })
    }
}

/// Sign class of a boundary side: `+` if ħℓ > 0 or ħ = 0, `0` if ℓ = 0,
/// `-` if ħℓ < 0.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum SignClass {
    #[serde(rename = "+")]
    Plus,
    #[serde(rename = "0")]
    Zero,
    #[serde(rename = "-")]
    Minus,
}

impl fmt::Display for SignClass {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            SignClass::Plus => "+",
            SignClass::Zero => "0",
            SignClass::Minus => "-",
        })
    }
}

/// Piecewise polynomial on [0, 1]; piece `k` is evaluated in `t = x - x_k`.
#[derive(Debug, Clone, PartialEq)]
pub struct PiecewisePoly {
    breakpoints: Vec<f64>,
    pieces: Vec<Poly>,
}

impl PiecewisePoly {
    pub fn new(breakpoints: Vec<f64>, pieces: Vec<Poly>) -> Result<Self> {
        if breakpoints.len() < 2 {
            return Err(Error::Malformed("need at least two breakpoints".into()));
        }
        if pieces.len() + 1 != breakpoints.len() {
            return Err(Error::Malformed(format!(
                "{} breakpoints need {} pieces, got {}",
                breakpoints.len(),
                breakpoints.len() - 1,
                pieces.len()
            )));
        }
        if breakpoints[0] != 0.0 || *breakpoints.last().unwrap() != 1.0 {
            return Err(Error::Malformed("breakpoints must start at 0 and end at 1".into()));
        }
        if breakpoints.windows(2).any(|w| !(w[1] > w[0])) {
            return Err(Error::Malformed("breakpoints must be strictly increasing".into()));
        }
        if pieces.iter().flat_map(|p| p.coeffs()).any(|c| !c.is_finite()) {
            return Err(Error::Malformed("non-finite polynomial coefficient".into()));
        }
        Ok(PiecewisePoly { breakpoints, pieces })
    }

    /// Pieces given as polynomials in the global coordinate `x`.
    pub fn from_global(breakpoints: Vec<f64>, pieces: Vec<Poly>) -> Result<Self> {
        let local = pieces.iter().zip(&breakpoints).map(|(p, &x0)| p.shifted(x0)).collect();
        PiecewisePoly::new(breakpoints, local)
    }

    pub fn constant(c: f64) -> Self {
        PiecewisePoly {
            breakpoints: vec![0.0, 1.0],
            pieces: vec![Poly::constant(c)],
        }
    }

    /// A single global polynomial in `x`.
    pub fn global(coeffs: Vec<f64>) -> Self {
        PiecewisePoly {
            breakpoints: vec![0.0, 1.0],
            pieces: vec![Poly::new(coeffs)],
        }
    }

    pub fn breakpoints(&self) -> &[f64] {
        &self.breakpoints
    }

    pub fn pieces(&self) -> &[Poly] {
        &self.pieces
    }

    pub fn piece_len(&self, k: usize) -> f64 {
        self.breakpoints[k + 1] - self.breakpoints[k]
    }

    /// Index of the piece owning `x`; breakpoints belong to the piece on
    /// their right, except x = 1.
    pub fn piece_index(&self, x: f64) -> usize {
        let k = self.breakpoints.partition_point(|&b| b <= x);
        k.saturating_sub(1).min(self.pieces.len() - 1)
    }

    pub fn evaluate(&self, x: f64, order: usize) -> Result<f64> {
        if !(0.0..=1.0).contains(&x) {
            return Err(Error::Domain { x });
        }
        Ok(self.eval_unchecked(x, order))
    }

    pub(crate) fn eval_unchecked(&self, x: f64, order: usize) -> f64 {
        let k = self.piece_index(x);
        self.pieces[k].eval_derivative(x - self.breakpoints[k], order)
    }

    /// Value of piece `k` (or its derivative) at the right end of the piece.
    fn right_limit(&self, k: usize, order: usize) -> f64 {
        self.pieces[k].eval_derivative(self.piece_len(k), order)
    }

    fn left_limit(&self, k: usize, order: usize) -> f64 {
        self.pieces[k].eval_derivative(0.0, order)
    }

    /// The same function with `x -> 1 - x`.
    pub fn reversed(&self) -> PiecewisePoly {
        let k = self.pieces.len();
        let breakpoints = self.breakpoints.iter().rev().map(|b| 1.0 - b).collect();
        let pieces = (0..k)
            .rev()
            .map(|j| {
                // new local t' runs from 1 - x_{j+1}; old t = len - t'
                let len = self.piece_len(j);
                let p = self.pieces[j].shifted(len);
                let c: Vec<f64> = p
                    .coeffs()
                    .iter()
                    .enumerate()
                    .map(|(i, &c)| if i % 2 == 1 { -c } else { c })
                    .collect();
                Poly::new(c)
            })
            .collect();
        PiecewisePoly { breakpoints, pieces }
    }

    /// Pointwise sum with a constant.
    pub fn plus_constant(&self, c: f64) -> PiecewisePoly {
        PiecewisePoly {
            breakpoints: self.breakpoints.clone(),
            pieces: self
                .pieces
                .iter()
                .map(|p| p.add(&Poly::constant(c)))
                .collect(),
        }
    }

    fn coeff_table(&self) -> Vec<Vec<f64>> {
        self.pieces.iter().map(|p| p.coeffs().to_vec()).collect()
    }
}

/// The advection profile `m`.
#[derive(Debug, Clone, PartialEq)]
pub struct PiecewiseProfile {
    poly: PiecewisePoly,
    signs: Vec<SlopeSign>,
    constant: bool,
}

impl PiecewiseProfile {
    /// Profile with caller-declared slope signs; `validate` checks them.
    pub fn new(breakpoints: Vec<f64>, pieces: Vec<Poly>, signs: Vec<SlopeSign>) -> Result<Self> {
        let poly = PiecewisePoly::new(breakpoints, pieces)?;
        if signs.len() != poly.pieces.len() {
            return Err(Error::Malformed(format!(
                "{} pieces need {} slope signs, got {}",
                poly.pieces.len(),
                poly.pieces.len(),
                signs.len()
            )));
        }
        Ok(PiecewiseProfile {
            poly,
            signs,
            constant: false,
        })
    }

    /// Profile whose pieces are split at every interior root of `m'` and
    /// whose signs are computed rather than declared.
    pub fn with_inferred_signs(breakpoints: Vec<f64>, pieces: Vec<Poly>) -> Result<Self> {
        let poly = PiecewisePoly::new(breakpoints, pieces)?;
        let mut bps = vec![0.0];
        let mut out_pieces = Vec::new();
        let mut signs = Vec::new();
        for (k, piece) in poly.pieces.iter().enumerate() {
            let x0 = poly.breakpoints[k];
            let len = poly.piece_len(k);
            let slope = piece.derivative();
            let mut cuts = vec![0.0];
            if !slope_is_zero(&slope, len) {
                cuts.extend(isolate_roots(&slope, 0.0, len, ROOT_EDGE * len, 1e-15));
            }
            cuts.push(len);
            for w in cuts.windows(2) {
                let (t0, t1) = (w[0], w[1]);
                let sub = piece.shifted(t0);
                signs.push(classify_slope(&sub.derivative(), t1 - t0));
                out_pieces.push(sub);
                bps.push(if t1 == len { poly.breakpoints[k + 1] } else { x0 + t1 });
            }
        }
        let constant = signs.iter().all(|s| *s == SlopeSign::Zero);
        Ok(PiecewiseProfile {
            poly: PiecewisePoly::new(bps, out_pieces)?,
            signs,
            constant,
        })
    }

    /// Builds `m` from a continuous piecewise-linear curvature `m''` given
    /// by its values at `knots`, plus `m(0)` and `m'(0)`. The result is C²
    /// by construction.
    pub fn from_curvature(knots: &[f64], curvature: &[f64], m0: f64, slope0: f64) -> Result<Self> {
        if knots.len() != curvature.len() {
            return Err(Error::Malformed("knots and curvature values differ in length".into()));
        }
        if knots.len() < 2 {
            return Err(Error::Malformed("need at least two curvature knots".into()));
        }
        let mut pieces = Vec::with_capacity(knots.len() - 1);
        let (mut value, mut slope) = (m0, slope0);
        for k in 0..knots.len() - 1 {
            let len = knots[k + 1] - knots[k];
            let c0 = curvature[k];
            let c1 = curvature[k + 1];
            let m2 = Poly::new(vec![c0, (c1 - c0) / len]);
            let m1 = m2.integral(slope);
            let m = m1.integral(value);
            value = m.eval(len);
            slope = m1.eval(len);
            pieces.push(m);
        }
        Self::with_inferred_signs(knots.to_vec(), pieces)
    }

    /// Builds `m` from slope and curvature values at `knots`: `m'` is the
    /// cubic Hermite interpolant of those values, so `m` is C² and quartic
    /// on each interval.
    pub fn from_slope_hermite(knots: &[f64], slopes: &[f64], curvatures: &[f64], m0: f64) -> Result<Self> {
        if knots.len() != slopes.len() || knots.len() != curvatures.len() || knots.len() < 2 {
            return Err(Error::Malformed("knots, slopes and curvatures must have equal length ≥ 2".into()));
        }
        let mut pieces = Vec::with_capacity(knots.len() - 1);
        let mut value = m0;
        for k in 0..knots.len() - 1 {
            let h = knots[k + 1] - knots[k];
            let (p0, p1) = (slopes[k], slopes[k + 1]);
            let (d0, d1) = (curvatures[k] * h, curvatures[k + 1] * h);
            // Hermite basis in s = t / h, expanded in powers of t
            let c2 = (-3.0 * p0 - 2.0 * d0 + 3.0 * p1 - d1) / (h * h);
            let c3 = (2.0 * p0 + d0 - 2.0 * p1 + d1) / (h * h * h);
            let slope = Poly::new(vec![p0, curvatures[k], c2, c3]);
            let m = slope.integral(value);
            value = m.eval(h);
            pieces.push(m);
        }
        Self::with_inferred_signs(knots.to_vec(), pieces)
    }

    pub fn constant(c: f64) -> Self {
        PiecewiseProfile {
            poly: PiecewisePoly::constant(c),
            signs: vec![SlopeSign::Zero],
            constant: true,
        }
    }

    /// `m(x) = slope * x`.
    pub fn linear(slope: f64) -> Self {
        let sign = if slope > 0.0 {
            SlopeSign::Pos
        } else if slope < 0.0 {
            SlopeSign::Neg
        } else {
            SlopeSign::Zero
        };
        PiecewiseProfile {
            poly: PiecewisePoly::global(vec![0.0, slope]),
            signs: vec![sign],
            constant: slope == 0.0,
        }
    }

    pub fn poly(&self) -> &PiecewisePoly {
        &self.poly
    }

    pub fn signs(&self) -> &[SlopeSign] {
        &self.signs
    }

    pub fn is_flagged_constant(&self) -> bool {
        self.constant
    }

    pub fn breakpoints(&self) -> &[f64] {
        self.poly.breakpoints()
    }

    /// m(x), m'(x) or m''(x) for `order` 0, 1, 2.
    pub fn evaluate(&self, x: f64, order: usize) -> Result<f64> {
        self.poly.evaluate(x, order)
    }

    pub(crate) fn eval_unchecked(&self, x: f64, order: usize) -> f64 {
        self.poly.eval_unchecked(x, order)
    }

    /// Upper bound on max |m'| over [0, 1] from per-piece coefficient sums.
    pub fn max_abs_slope(&self) -> f64 {
        let mut best = 0.0_f64;
        for (k, p) in self.poly.pieces.iter().enumerate() {
            let d = p.derivative();
            let len = self.poly.piece_len(k);
            // sample densely, then add the endpoint values
            let samples = 64;
            for i in 0..=samples {
                let t = len * i as f64 / samples as f64;
                best = best.max(d.eval(t).abs());
            }
        }
        best
    }

    /// (min m, max m) sampled on a fine grid plus breakpoints.
    pub fn range(&self) -> (f64, f64) {
        let mut lo = f64::INFINITY;
        let mut hi = f64::NEG_INFINITY;
        for (k, p) in self.poly.pieces.iter().enumerate() {
            let len = self.poly.piece_len(k);
            for i in 0..=64 {
                let v = p.eval(len * i as f64 / 64.0);
                lo = lo.min(v);
                hi = hi.max(v);
            }
        }
        (lo, hi)
    }

    /// m(1 - x), with the slope signs flipped and reordered.
    pub fn reversed(&self) -> PiecewiseProfile {
        PiecewiseProfile {
            poly: self.poly.reversed(),
            signs: self
                .signs
                .iter()
                .rev()
                .map(|s| match s {
                    SlopeSign::Pos => SlopeSign::Neg,
                    SlopeSign::Neg => SlopeSign::Pos,
                    SlopeSign::Zero => SlopeSign::Zero,
                })
                .collect(),
            constant: self.constant,
        }
    }

    pub fn plus_constant(&self, c: f64) -> PiecewiseProfile {
        PiecewiseProfile {
            poly: self.poly.plus_constant(c),
            signs: self.signs.clone(),
            constant: self.constant,
        }
    }
}

fn slope_is_zero(slope: &Poly, len: f64) -> bool {
    let mut scale = 1.0;
    slope.coeffs().iter().all(|c| {
        let ok = (c * scale).abs() <= ZERO_SLOPE_TOL;
        scale *= len;
        ok
    })
}

fn classify_slope(slope: &Poly, len: f64) -> SlopeSign {
    if slope_is_zero(slope, len) {
        return SlopeSign::Zero;
    }
    if slope.eval(0.5 * len) > 0.0 {
        SlopeSign::Pos
    } else {
        SlopeSign::Neg
    }
}

/// The potential `V`; only continuity is required.
#[derive(Debug, Clone, PartialEq)]
pub struct Potential {
    poly: PiecewisePoly,
}

impl Potential {
    pub fn new(breakpoints: Vec<f64>, pieces: Vec<Poly>) -> Result<Self> {
        Ok(Potential {
            poly: PiecewisePoly::new(breakpoints, pieces)?,
        })
    }

    pub fn constant(c: f64) -> Self {
        Potential {
            poly: PiecewisePoly::constant(c),
        }
    }

    /// Pieces given as polynomials in the global coordinate `x`.
    pub fn from_global(breakpoints: Vec<f64>, pieces: Vec<Poly>) -> Result<Self> {
        Ok(Potential {
            poly: PiecewisePoly::from_global(breakpoints, pieces)?,
        })
    }

    /// `V(x) = sum_k c_k x^k` on all of [0, 1].
    pub fn global(coeffs: Vec<f64>) -> Self {
        Potential {
            poly: PiecewisePoly::global(coeffs),
        }
    }

    pub fn poly(&self) -> &PiecewisePoly {
        &self.poly
    }

    pub fn evaluate(&self, x: f64) -> Result<f64> {
        self.poly.evaluate(x, 0)
    }

    pub(crate) fn eval_unchecked(&self, x: f64) -> f64 {
        self.poly.eval_unchecked(x, 0)
    }

    /// Sampled minimum over [0, 1].
    pub fn min_value(&self) -> f64 {
        let mut lo = f64::INFINITY;
        for (k, p) in self.poly.pieces.iter().enumerate() {
            let len = self.poly.piece_len(k);
            for i in 0..=512 {
                lo = lo.min(p.eval(len * i as f64 / 512.0));
            }
        }
        lo
    }

    pub fn reversed(&self) -> Potential {
        Potential {
            poly: self.poly.reversed(),
        }
    }

    pub fn plus_constant(&self, c: f64) -> Potential {
        Potential {
            poly: self.poly.plus_constant(c),
        }
    }
}

/// Boundary data `-ħ φ'(0) + ℓ φ(0) = 0` (left) or `ħ φ'(1) + ℓ φ(1) = 0`
/// (right). ħ = 0 is Dirichlet, ℓ = 0 is Neumann.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct RobinSide {
    pub end: End,
    pub hbar: f64,
    pub ell: f64,
}

impl RobinSide {
    pub fn new(end: End, hbar: f64, ell: f64) -> Self {
        RobinSide { end, hbar, ell }
    }

    pub fn dirichlet(end: End) -> Self {
        RobinSide::new(end, 0.0, 1.0)
    }

    pub fn neumann(end: End) -> Self {
        RobinSide::new(end, 1.0, 0.0)
    }

    pub fn is_dirichlet(&self) -> bool {
        self.hbar == 0.0
    }

    pub fn is_valid(&self) -> bool {
        self.hbar.abs() + self.ell.abs() > 0.0 && self.hbar.is_finite() && self.ell.is_finite()
    }

    /// ℓ/ħ, the coefficient of the boundary quadratic term; `None` for
    /// Dirichlet sides.
    pub fn robin_ratio(&self) -> Option<f64> {
        if self.is_dirichlet() {
            None
        } else {
            Some(self.ell / self.hbar)
        }
    }

    /// Same condition placed at the opposite end (for `x -> 1 - x`).
    pub fn mirrored(&self) -> RobinSide {
        RobinSide {
            end: match self.end {
                End::Left => End::Right,
                End::Right => End::Left,
            },
            ..*self
        }
    }
}

pub fn side_class(side: &RobinSide) -> SignClass {
    if side.hbar == 0.0 {
        SignClass::Plus
    } else if side.ell == 0.0 {
        SignClass::Zero
    } else if side.hbar * side.ell > 0.0 {
        SignClass::Plus
    } else {
        SignClass::Minus
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct ProblemSpec1D {
    pub m: PiecewiseProfile,
    pub v: Potential,
    pub left: RobinSide,
    pub right: RobinSide,
    pub diffusion: f64,
}

impl ProblemSpec1D {
    pub fn new(m: PiecewiseProfile, v: Potential, left: RobinSide, right: RobinSide) -> Self {
        ProblemSpec1D {
            m,
            v,
            left: RobinSide { end: End::Left, ..left },
            right: RobinSide { end: End::Right, ..right },
            diffusion: 1.0,
        }
    }

    pub fn with_diffusion(mut self, d: f64) -> Self {
        self.diffusion = d;
        self
    }

    pub fn side(&self, end: End) -> &RobinSide {
        match end {
            End::Left => &self.left,
            End::Right => &self.right,
        }
    }

    pub fn classes(&self) -> (SignClass, SignClass) {
        (side_class(&self.left), side_class(&self.right))
    }

    /// Errors with the full report when any invariant is violated.
    pub fn ensure_valid(&self) -> Result<()> {
        let report = validate(self);
        if report.is_valid() {
            Ok(())
        } else {
            Err(Error::Invalid(report))
        }
    }

    /// The problem on the mirrored interval, x -> 1 - x.
    pub fn reversed(&self) -> ProblemSpec1D {
        ProblemSpec1D {
            m: self.m.reversed(),
            v: self.v.reversed(),
            left: self.right.mirrored(),
            right: self.left.mirrored(),
            diffusion: self.diffusion,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum Violation {
    ValueMismatch { x: f64, jump: f64 },
    SlopeMismatch { x: f64, jump: f64 },
    CurvatureMismatch { x: f64, jump: f64 },
    SlopeRoot { piece: usize, a: f64, b: f64 },
    SignMismatch { piece: usize, declared: SlopeSign, actual: SlopeSign },
    ConstantProfile,
    PotentialJump { x: f64, jump: f64 },
    DegenerateBoundary { end: End },
    NonPositiveDiffusion { diffusion: f64 },
}

impl fmt::Display for Violation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Violation::ValueMismatch { x, jump } => write!(f, "C0 mismatch at {x} (jump {jump:.3e})"),
            Violation::SlopeMismatch { x, jump } => write!(f, "C1 mismatch at {x} (jump {jump:.3e})"),
            Violation::CurvatureMismatch { x, jump } => {
                write!(f, "C2 mismatch at {x} (jump {jump:.3e})")
            }
            Violation::SlopeRoot { piece, a, b } => {
                write!(f, "m' vanishes inside piece {piece} ({a}, {b})")
            }
            Violation::SignMismatch { piece, declared, actual } => {
                write!(f, "piece {piece} declared {declared} but m' is {actual}")
            }
            Violation::ConstantProfile => f.write_str("m' vanishes on every piece but the profile is not flagged constant"),
            Violation::PotentialJump { x, jump } => write!(f, "V discontinuous at {x} (jump {jump:.3e})"),
            Violation::DegenerateBoundary { end } => write!(f, "|ħ|+|ℓ|=0 at {end} end"),
            Violation::NonPositiveDiffusion { diffusion } => write!(f, "diffusion {diffusion} is not positive"),
        }
    }
}

#[derive(Debug, Clone, Default, PartialEq, Serialize)]
pub struct ValidationReport {
    pub violations: Vec<Violation>,
}

impl ValidationReport {
    pub fn is_valid(&self) -> bool {
        self.violations.is_empty()
    }

    pub fn messages(&self) -> Vec<String> {
        self.violations.iter().map(|v| v.to_string()).collect()
    }
}

impl fmt::Display for ValidationReport {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.violations.is_empty() {
            return f.write_str("valid");
        }
        for v in &self.violations {
            writeln!(f, "  - {v}")?;
        }
        Ok(())
    }
}

pub fn validate(spec: &ProblemSpec1D) -> ValidationReport {
    let mut violations = Vec::new();
    let m = &spec.m;
    let poly = &m.poly;

    for k in 1..poly.pieces.len() {
        let x = poly.breakpoints[k];
        let checks = [
            (0, VALUE_MATCH_TOL),
            (1, DERIVATIVE_MATCH_TOL),
            (2, DERIVATIVE_MATCH_TOL),
        ];
        for (order, tol) in checks {
            let jump = poly.left_limit(k, order) - poly.right_limit(k - 1, order);
            if jump.abs() > tol {
                violations.push(match order {
                    0 => Violation::ValueMismatch { x, jump },
                    1 => Violation::SlopeMismatch { x, jump },
                    _ => Violation::CurvatureMismatch { x, jump },
                });
            }
        }
    }

    for (k, (piece, &declared)) in poly.pieces.iter().zip(&m.signs).enumerate() {
        let len = poly.piece_len(k);
        let slope = piece.derivative();
        let zero = slope_is_zero(&slope, len);
        if !zero {
            let edge = ROOT_EDGE * len;
            let roots = SturmChain::new(&slope).count(edge, len - edge);
            if roots > 0 {
                violations.push(Violation::SlopeRoot {
                    piece: k,
                    a: poly.breakpoints[k],
                    b: poly.breakpoints[k + 1],
                });
                continue;
            }
        }
        let actual = classify_slope(&slope, len);
        if actual != declared {
            violations.push(Violation::SignMismatch { piece: k, declared, actual });
        }
    }
    if !m.constant && m.signs.iter().all(|s| *s == SlopeSign::Zero) {
        violations.push(Violation::ConstantProfile);
    }

    let vp = &spec.v.poly;
    for k in 1..vp.pieces.len() {
        let jump = vp.left_limit(k, 0) - vp.right_limit(k - 1, 0);
        if jump.abs() > VALUE_MATCH_TOL {
            violations.push(Violation::PotentialJump { x: vp.breakpoints[k], jump });
        }
    }

    for side in [&spec.left, &spec.right] {
        if !side.is_valid() {
            violations.push(Violation::DegenerateBoundary { end: side.end });
        }
    }
    if !(spec.diffusion > 0.0) || !spec.diffusion.is_finite() {
        violations.push(Violation::NonPositiveDiffusion { diffusion: spec.diffusion });
    }
    ValidationReport { violations }
}

/// On-disk shape of a piecewise polynomial block.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub(crate) struct PiecewiseTable {
    pub breakpoints: Vec<f64>,
    pub pieces: Vec<Vec<f64>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub signs: Option<Vec<SlopeSign>>,
    #[serde(default, skip_serializing_if = "std::ops::Not::not")]
    pub constant: bool,
}

impl PiecewiseTable {
    pub fn from_profile(m: &PiecewiseProfile) -> Self {
        PiecewiseTable {
            breakpoints: m.poly.breakpoints.clone(),
            pieces: m.poly.coeff_table(),
            signs: Some(m.signs.clone()),
            constant: m.constant,
        }
    }

    pub fn from_potential(v: &Potential) -> Self {
        PiecewiseTable {
            breakpoints: v.poly.breakpoints.clone(),
            pieces: v.poly.coeff_table(),
            signs: None,
            constant: false,
        }
    }

    pub fn into_profile(self) -> Result<PiecewiseProfile> {
        let pieces = self.pieces.into_iter().map(Poly::new).collect();
        let mut m = match self.signs {
            Some(signs) => PiecewiseProfile::new(self.breakpoints, pieces, signs)?,
            None => PiecewiseProfile::with_inferred_signs(self.breakpoints, pieces)?,
        };
        m.constant = self.constant;
        Ok(m)
    }

    pub fn into_potential(self) -> Result<Potential> {
        Potential::new(self.breakpoints, self.pieces.into_iter().map(Poly::new).collect())
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn quadratic() -> PiecewiseProfile {
        PiecewiseProfile::new(
            vec![0.0, 1.0],
            vec![Poly::new(vec![0.0, 0.0, 1.0])],
            vec![SlopeSign::Pos],
        )
        .unwrap()
    }

    fn neumann_spec(m: PiecewiseProfile, v: Potential) -> ProblemSpec1D {
        ProblemSpec1D::new(m, v, RobinSide::neumann(End::Left), RobinSide::neumann(End::Right))
    }

    #[test]
    fn evaluate_linear_and_quadratic() {
        let m = PiecewiseProfile::linear(1.0);
        assert_eq!(m.evaluate(0.5, 0).unwrap(), 0.5);
        assert_eq!(m.evaluate(0.5, 1).unwrap(), 1.0);
        assert_eq!(quadratic().evaluate(0.5, 2).unwrap(), 2.0);
    }

    #[test]
    fn evaluate_rejects_outside_unit_interval() {
        let m = PiecewiseProfile::linear(1.0);
        assert!(matches!(m.evaluate(1.5, 0), Err(Error::Domain { .. })));
        assert!(matches!(m.evaluate(-1e-9, 1), Err(Error::Domain { .. })));
        assert!(m.evaluate(1.0, 0).is_ok());
    }

    #[test]
    fn breakpoint_takes_right_piece() {
        // m = 0 on [0, 0.5], then (x - 0.5)^3 ; at 0.5 both pieces agree anyway,
        // but third derivative differs and exposes which piece was used
        let m = PiecewiseProfile::new(
            vec![0.0, 0.5, 1.0],
            vec![Poly::constant(0.0), Poly::new(vec![0.0, 0.0, 0.0, 1.0])],
            vec![SlopeSign::Zero, SlopeSign::Pos],
        )
        .unwrap();
        assert_eq!(m.evaluate(0.5, 3).unwrap(), 6.0);
        assert_eq!(m.evaluate(0.4999, 3).unwrap(), 0.0);
    }

    #[test]
    fn simple_problem_is_valid() {
        let spec = neumann_spec(PiecewiseProfile::linear(1.0), Potential::constant(0.0));
        assert!(validate(&spec).is_valid());
    }

    #[test]
    fn slope_jump_is_reported() {
        // x on [0, .5], then slope 1.1 afterwards: C0 ok, C1 jump 0.1
        let m = PiecewiseProfile::new(
            vec![0.0, 0.5, 1.0],
            vec![Poly::new(vec![0.0, 1.0]), Poly::new(vec![0.5, 1.1])],
            vec![SlopeSign::Pos, SlopeSign::Pos],
        )
        .unwrap();
        let report = validate(&neumann_spec(m, Potential::constant(0.0)));
        let msgs = report.messages();
        assert_eq!(msgs.len(), 1, "{msgs:?}");
        assert!(msgs[0].starts_with("C1 mismatch at 0.5"));
    }

    #[test]
    fn degenerate_robin_side_is_reported() {
        let mut spec = neumann_spec(PiecewiseProfile::linear(1.0), Potential::constant(0.0));
        spec.left = RobinSide::new(End::Left, 0.0, 0.0);
        let msgs = validate(&spec).messages();
        assert_eq!(msgs.len(), 1);
        assert!(msgs[0].starts_with("|ħ|+|ℓ|=0"));
    }

    #[test]
    fn interior_slope_root_is_reported() {
        // m = (x - 0.5)^2 declared increasing on [0, 1]
        let m = PiecewiseProfile::new(
            vec![0.0, 1.0],
            vec![Poly::new(vec![0.25, -1.0, 1.0])],
            vec![SlopeSign::Pos],
        )
        .unwrap();
        let report = validate(&neumann_spec(m, Potential::constant(0.0)));
        assert!(matches!(report.violations[0], Violation::SlopeRoot { piece: 0, .. }));
    }

    #[test]
    fn wrong_declared_sign_is_reported() {
        let m = PiecewiseProfile::new(vec![0.0, 1.0], vec![Poly::new(vec![0.0, -1.0])], vec![SlopeSign::Pos])
            .unwrap();
        let report = validate(&neumann_spec(m, Potential::constant(0.0)));
        assert!(matches!(
            report.violations[0],
            Violation::SignMismatch { declared: SlopeSign::Pos, actual: SlopeSign::Neg, .. }
        ));
    }

    #[test]
    fn side_classes() {
        assert_eq!(side_class(&RobinSide::new(End::Left, 1.0, 2.0)), SignClass::Plus);
        assert_eq!(side_class(&RobinSide::new(End::Left, 0.0, 1.0)), SignClass::Plus);
        assert_eq!(side_class(&RobinSide::new(End::Left, 1.0, -1.0)), SignClass::Minus);
        assert_eq!(side_class(&RobinSide::new(End::Right, -2.0, 0.0)), SignClass::Zero);
        assert_eq!(side_class(&RobinSide::new(End::Right, -1.0, -1.0)), SignClass::Plus);
    }

    #[test]
    fn inferred_signs_split_at_slope_roots() {
        // m = -(x - 0.3)^2 : increasing then decreasing
        let m = PiecewiseProfile::with_inferred_signs(vec![0.0, 1.0], vec![Poly::new(vec![-0.09, 0.6, -1.0])])
            .unwrap();
        assert_eq!(m.signs(), &[SlopeSign::Pos, SlopeSign::Neg]);
        assert!((m.breakpoints()[1] - 0.3).abs() < 1e-12);
        let spec = neumann_spec(m, Potential::constant(0.0));
        assert!(validate(&spec).is_valid(), "{}", validate(&spec));
    }

    #[test]
    fn curvature_builder_is_c2() {
        let m = PiecewiseProfile::from_curvature(
            &[0.0, 0.3, 0.35, 0.4, 0.7, 1.0],
            &[0.0, 0.0, 40.0, 0.0, -10.0, 0.0],
            0.0,
            0.0,
        )
        .unwrap();
        let spec = neumann_spec(m.clone(), Potential::constant(0.0));
        assert!(validate(&spec).is_valid(), "{}", validate(&spec));
        assert_eq!(m.signs()[0], SlopeSign::Zero);
        assert!((m.evaluate(0.5, 1).unwrap() - (2.0 - 10.0 / 0.3 * 0.1 * 0.1 / 2.0)).abs() < 1e-12);
    }

    #[test]
    fn hermite_builder_hits_slopes_and_curvatures() {
        let m = PiecewiseProfile::from_slope_hermite(
            &[0.0, 0.3, 0.31, 0.6, 1.0],
            &[0.0, 0.0, 20.0, 0.0, -3.0],
            &[0.0, 0.0, 0.0, -100.0, 0.0],
            0.5,
        )
        .unwrap();
        let spec = neumann_spec(m.clone(), Potential::constant(0.0));
        assert!(validate(&spec).is_valid(), "{}", validate(&spec));
        assert_eq!(m.evaluate(0.0, 0).unwrap(), 0.5);
        assert!((m.evaluate(0.31, 1).unwrap() - 20.0).abs() < 1e-9);
        assert!(m.evaluate(0.6, 1).unwrap().abs() < 1e-9);
        assert!((m.evaluate(0.6, 2).unwrap() + 100.0).abs() < 1e-7);
        assert_eq!(m.signs(), &[SlopeSign::Zero, SlopeSign::Pos, SlopeSign::Pos, SlopeSign::Neg]);
    }

    #[test]
    fn global_pieces_are_shifted() {
        let v = Potential::from_global(
            vec![0.0, 0.5, 1.0],
            vec![Poly::new(vec![0.0, 2.0]), Poly::new(vec![1.0, 0.0, 0.0])],
        )
        .unwrap();
        assert_eq!(v.evaluate(0.25).unwrap(), 0.5);
        assert_eq!(v.evaluate(0.75).unwrap(), 1.0);
    }

    #[test]
    fn reversal_round_trips() {
        let m = PiecewiseProfile::from_curvature(&[0.0, 0.4, 1.0], &[1.0, -2.0, 3.0], 0.2, -0.5).unwrap();
        let r = m.reversed();
        for &x in &[0.0, 0.13, 0.4, 0.77, 1.0] {
            let a = m.evaluate(x, 0).unwrap();
            let b = r.evaluate(1.0 - x, 0).unwrap();
            assert!((a - b).abs() < 1e-12);
            let da = m.evaluate(x, 1).unwrap();
            let db = r.evaluate(1.0 - x, 1).unwrap();
            assert!((da + db).abs() < 1e-12);
        }
        let rr = r.reversed();
        assert_eq!(rr.signs(), m.signs());
    }
}
