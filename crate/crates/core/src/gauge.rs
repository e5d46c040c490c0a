//! The substitution `w = e^{γ m} φ`, `γ = α / D`, which turns
//! `-D φ'' - 2α m' φ' + V φ` into the Schrödinger operator `-D w'' + Q_α w`
//! with `Q_α = α² m'² / D + α m'' + V`.

use serde::Serialize;

use crate::error::Result;
use crate::model::{End, PiecewiseProfile, ProblemSpec1D, RobinSide};

/// Beyond this exponent range `e^{γ m}` is never formed directly.
pub const LOG_SPACE_THRESHOLD: f64 = 600.0;

/// `Q_α` bound to a problem and a fixed α.
#[derive(Debug, Clone, Copy)]
pub struct EffectivePotentialField<'a> {
    pub spec: &'a ProblemSpec1D,
    pub alpha: f64,
}

impl EffectivePotentialField<'_> {
    pub fn eval(&self, x: f64) -> Result<f64> {
        effective_potential(self.spec, self.alpha, x)
    }
}

pub fn effective_potential(spec: &ProblemSpec1D, alpha: f64, x: f64) -> Result<f64> {
    let m1 = spec.m.evaluate(x, 1)?;
    let m2 = spec.m.evaluate(x, 2)?;
    let v = spec.v.evaluate(x)?;
    Ok(alpha * alpha * m1 * m1 / spec.diffusion + alpha * m2 + v)
}

/// Boundary condition on `w` in outward-slope form: `w'(0) = c w(0)` on the
/// left, `w'(1) = c w(1)` on the right.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
#[serde(tag = "kind", content = "c")]
pub enum TransformedBc {
    Dirichlet,
    RobinSlope(f64),
}

/// Transformed condition for one side. `end_slope` is `m'` at that end
/// divided by `D`; with `m = x` and `D = 1` it is 1.
pub fn transformed_bc(side: &RobinSide, alpha: f64, end_slope: f64) -> TransformedBc {
    if side.is_dirichlet() {
        return TransformedBc::Dirichlet;
    }
    let r = side.ell / side.hbar;
    match side.end {
        End::Left => TransformedBc::RobinSlope(alpha * end_slope + r),
        End::Right => TransformedBc::RobinSlope(alpha * end_slope - r),
    }
}

/// Both transformed conditions of a problem, using the actual end slopes.
pub fn transformed_bcs(spec: &ProblemSpec1D, alpha: f64) -> (TransformedBc, TransformedBc) {
    let d = spec.diffusion;
    let s0 = spec.m.eval_unchecked(0.0, 1) / d;
    let s1 = spec.m.eval_unchecked(1.0, 1) / d;
    (transformed_bc(&spec.left, alpha, s0), transformed_bc(&spec.right, alpha, s1))
}

/// Grid values `values[i] * e^{log_scale}`. `log_scale` is zero unless the
/// log-space guard was needed.
#[derive(Debug, Clone, PartialEq)]
pub struct ScaledField {
    pub values: Vec<f64>,
    pub log_scale: f64,
}

impl ScaledField {
    /// Plain values; overflows to infinity when the scale is too large.
    pub fn to_plain(&self) -> Vec<f64> {
        let s = self.log_scale.exp();
        self.values.iter().map(|v| v * s).collect()
    }
}

fn apply(values: &[f64], nodes: &[f64], m: &PiecewiseProfile, gamma: f64) -> ScaledField {
    assert_eq!(values.len(), nodes.len(), "grid function and nodes differ in length");
    let exps: Vec<f64> = nodes.iter().map(|&x| gamma * m.eval_unchecked(x, 0)).collect();
    let hi = exps.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
    let lo = exps.iter().cloned().fold(f64::INFINITY, f64::min);
    if hi - lo <= LOG_SPACE_THRESHOLD && hi.abs() <= LOG_SPACE_THRESHOLD {
        return ScaledField {
            values: values.iter().zip(&exps).map(|(v, e)| v * e.exp()).collect(),
            log_scale: 0.0,
        };
    }
    ScaledField {
        values: values.iter().zip(&exps).map(|(v, e)| v * (e - hi).exp()).collect(),
        log_scale: hi,
    }
}

/// `w_i = e^{γ m(x_i)} φ_i`; pass `gamma = α / D`.
pub fn gauge_forward(phi: &[f64], nodes: &[f64], m: &PiecewiseProfile, gamma: f64) -> ScaledField {
    apply(phi, nodes, m, gamma)
}

/// `φ_i = e^{-γ m(x_i)} w_i`.
pub fn gauge_backward(w: &[f64], nodes: &[f64], m: &PiecewiseProfile, gamma: f64) -> ScaledField {
    apply(w, nodes, m, -gamma)
}
