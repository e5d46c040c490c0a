//! α-sweeps, trend classification and agreement with the predicted limit.

use std::fmt::Write as _;
use std::time::Instant;

use rayon::prelude::*;
use serde::Serialize;

use crate::eig1d::{boundary_term, energy_functional, mesh_for_alpha, principal_eigenpair, EigenResult, Grid1D};
use crate::error::{Error, Result};
use crate::model::{End, ProblemSpec1D};
use crate::predict::{predict_limit, LimitPrediction};

pub const DEFAULT_SCHEDULE: [f64; 10] = [0.0, 1.0, 2.0, 5.0, 10.0, 20.0, 50.0, 100.0, 150.0, 200.0];
pub const DEFAULT_DELTA: f64 = 0.05;
/// Successive deltas must shrink at least this much to count as converging.
pub const SHRINK_FACTOR: f64 = 0.7;
/// Minimum ratio of successive slopes `Δλ/Δα` for a divergence verdict.
/// Slightly below 1 so that asymptotically linear growth, whose slope
/// settles from below, still counts.
pub const DIVERGENCE_RATIO: f64 = 0.95;
/// Absolute agreement floor for finite limits.
pub const AGREEMENT_FLOOR: f64 = 0.1;

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SweepPoint {
    pub alpha: f64,
    pub lambda: f64,
    pub n: usize,
    pub residual: f64,
    pub energy: f64,
    pub w0sq: f64,
    pub w1sq: f64,
    /// Signed boundary terms `D (ℓ/ħ) w²` at each end.
    pub left_term: f64,
    pub right_term: f64,
    pub ms: u64,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub error: Option<String>,
}

impl SweepPoint {
    pub fn ok(&self) -> bool {
        self.error.is_none()
    }
}

/// A sweep point together with the eigenpair it came from.
#[derive(Debug, Clone)]
pub struct SolvedPoint {
    pub point: SweepPoint,
    pub result: Option<EigenResult>,
}

fn check_schedule(alphas: &[f64]) -> Result<()> {
    if alphas.is_empty() {
        return Err(Error::Malformed("empty α schedule".into()));
    }
    if alphas.iter().any(|a| !(*a >= 0.0) || !a.is_finite()) {
        return Err(Error::Malformed("α values must be finite and nonnegative".into()));
    }
    if alphas.windows(2).any(|w| !(w[1] > w[0])) {
        return Err(Error::Malformed("α schedule must be strictly increasing".into()));
    }
    Ok(())
}

fn solve_point(spec: &ProblemSpec1D, alpha: f64, mesh: Option<usize>) -> SolvedPoint {
    let start = Instant::now();
    let grid = match mesh {
        Some(n) => Grid1D::new(n),
        None => Ok(mesh_for_alpha(spec, alpha)),
    };
    let solved = grid.and_then(|g| {
        let r = principal_eigenpair(spec, alpha, g)?;
        let e = energy_functional(spec, alpha, &r)?;
        Ok((r, e))
    });
    let ms = start.elapsed().as_millis() as u64;
    match solved {
        Ok((r, energy)) => {
            let (w0sq, w1sq) = r.boundary_masses();
            SolvedPoint {
                point: SweepPoint {
                    alpha,
                    lambda: r.lambda,
                    n: r.grid.n(),
                    residual: r.residual,
                    energy,
                    w0sq,
                    w1sq,
                    left_term: boundary_term(spec, End::Left, &r),
                    right_term: boundary_term(spec, End::Right, &r),
                    ms,
                    error: None,
                },
                result: Some(r),
            }
        }
        Err(e) => SolvedPoint {
            point: SweepPoint {
                alpha,
                lambda: f64::NAN,
                n: mesh.unwrap_or(0),
                residual: f64::NAN,
                energy: f64::NAN,
                w0sq: f64::NAN,
                w1sq: f64::NAN,
                left_term: f64::NAN,
                right_term: f64::NAN,
                ms,
                error: Some(e.to_string()),
            },
            result: None,
        },
    }
}

/// One solve per α, in parallel; failed points carry their error message.
pub fn run_sweep_solved(spec: &ProblemSpec1D, alphas: &[f64], mesh: Option<usize>) -> Result<Vec<SolvedPoint>> {
    check_schedule(alphas)?;
    spec.ensure_valid()?;
    Ok(alphas.par_iter().map(|&a| solve_point(spec, a, mesh)).collect())
}

pub fn run_sweep(spec: &ProblemSpec1D, alphas: &[f64]) -> Result<Vec<SweepPoint>> {
    Ok(run_sweep_solved(spec, alphas, None)?.into_iter().map(|s| s.point).collect())
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
#[serde(tag = "kind")]
pub enum TrendVerdict {
    Converging { estimate: f64, last_delta: f64 },
    DivergingUp,
    DivergingDown,
    Inconclusive,
}

/// Classifies the tail of `(α, λ)` samples; needs at least four.
pub fn classify_trend(alphas: &[f64], lambdas: &[f64]) -> TrendVerdict {
    let k = lambdas.len();
    if k < 4 || alphas.len() != k || lambdas.iter().any(|l| !l.is_finite()) {
        return TrendVerdict::Inconclusive;
    }
    let tail = k.min(5);
    let start = k - tail;
    let slopes: Vec<f64> = (start + 1..k)
        .map(|i| (lambdas[i] - lambdas[i - 1]) / (alphas[i] - alphas[i - 1]))
        .collect();
    let grows = |sign: f64| {
        slopes.iter().all(|s| s * sign > 0.0) && slopes.windows(2).all(|w| w[1] / w[0] >= DIVERGENCE_RATIO)
    };
    if grows(1.0) {
        return TrendVerdict::DivergingUp;
    }
    if grows(-1.0) {
        return TrendVerdict::DivergingDown;
    }
    let d: Vec<f64> = (k - 3..k).map(|i| lambdas[i] - lambdas[i - 1]).collect();
    let last = lambdas[k - 1];
    let tiny = 1e-9 * (1.0 + last.abs());
    let shrinking = d.windows(2).all(|w| w[1].abs() <= SHRINK_FACTOR * w[0].abs());
    if shrinking || d.iter().all(|x| x.abs() <= tiny) {
        return TrendVerdict::Converging { estimate: last, last_delta: d[2] };
    }
    TrendVerdict::Inconclusive
}

/// Trend of the successfully solved points of a sweep.
pub fn classify_points(points: &[SweepPoint]) -> TrendVerdict {
    let ok: Vec<&SweepPoint> = points.iter().filter(|p| p.ok()).collect();
    let a: Vec<f64> = ok.iter().map(|p| p.alpha).collect();
    let l: Vec<f64> = ok.iter().map(|p| p.lambda).collect();
    classify_trend(&a, &l)
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ConcentrationReport {
    /// Predicted support, before widening by `delta`.
    pub region: Vec<(f64, f64)>,
    pub delta: f64,
    pub alphas: Vec<f64>,
    pub mass_per_alpha: Vec<f64>,
}

/// Fraction of `∫ w²` on the union of `[a - δ, b + δ]` for the given regions,
/// taken as one minus the outside share so saturated values stay exactly 1.
pub fn concentration(result: &EigenResult, region: &[(f64, f64)], delta: f64) -> f64 {
    let g = result.grid;
    let (mut inside, mut outside) = (0.0, 0.0);
    for i in 0..g.n() {
        let x = g.x(i);
        let e = result.mass[i] * result.w[i] * result.w[i];
        if region.iter().any(|&(a, b)| x >= a - delta && x <= b + delta) {
            inside += e;
        } else {
            outside += e;
        }
    }
    1.0 - outside / (inside + outside)
}

/// Support of the contributions that attain a finite limit.
pub fn predicted_support(prediction: &LimitPrediction) -> Vec<(f64, f64)> {
    prediction.minimizers().iter().map(|c| c.support()).collect()
}

#[derive(Debug, Clone, Serialize)]
pub struct VerificationReport {
    pub prediction: LimitPrediction,
    pub points: Vec<SweepPoint>,
    pub trend: TrendVerdict,
    pub agree: bool,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub discrepancy: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub mid_discrepancy: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub tolerance: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub concentration: Option<ConcentrationReport>,
    pub notes: Vec<String>,
}

#[derive(Debug, Clone, Copy)]
pub struct VerifyOptions {
    pub mesh: Option<usize>,
    pub delta: f64,
}

impl Default for VerifyOptions {
    fn default() -> Self {
        VerifyOptions { mesh: None, delta: DEFAULT_DELTA }
    }
}

pub fn verify(spec: &ProblemSpec1D, alphas: &[f64]) -> Result<VerificationReport> {
    verify_with(spec, alphas, VerifyOptions::default())
}

pub fn verify_with(spec: &ProblemSpec1D, alphas: &[f64], opts: VerifyOptions) -> Result<VerificationReport> {
    let prediction = predict_limit(spec)?;
    let solved = run_sweep_solved(spec, alphas, opts.mesh)?;
    let points: Vec<SweepPoint> = solved.iter().map(|s| s.point.clone()).collect();
    let trend = classify_points(&points);
    let mut notes = Vec::new();
    let failed = points.iter().filter(|p| !p.ok()).count();
    if failed > 0 {
        notes.push(format!("{failed} sweep point(s) failed to solve"));
    }

    let mut report = VerificationReport {
        prediction: prediction.clone(),
        points,
        trend,
        agree: false,
        discrepancy: None,
        mid_discrepancy: None,
        tolerance: None,
        concentration: None,
        notes,
    };
    match &prediction {
        LimitPrediction::Finite { value, error, .. } => {
            let k = report.points.len();
            let last = report.points[k - 1].lambda;
            let mid = report.points[k / 2].lambda;
            let tol = AGREEMENT_FLOOR.max(3.0 * error);
            let disc = (last - value).abs();
            let disc_mid = (mid - value).abs();
            report.agree = failed == 0 && disc <= tol && disc <= disc_mid + 1e-9;
            if disc > disc_mid + 1e-9 {
                report.notes.push("discrepancy grew after mid-sweep".into());
            }
            report.discrepancy = Some(disc);
            report.mid_discrepancy = Some(disc_mid);
            report.tolerance = Some(tol);
            let region = predicted_support(&prediction);
            let mut alphas_ok = Vec::new();
            let mut masses = Vec::new();
            for s in &solved {
                if let Some(r) = &s.result {
                    alphas_ok.push(s.point.alpha);
                    masses.push(concentration(r, &region, opts.delta));
                }
            }
            report.concentration = Some(ConcentrationReport {
                region,
                delta: opts.delta,
                alphas: alphas_ok,
                mass_per_alpha: masses,
            });
        }
        LimitPrediction::PlusInfinity { .. } => {
            report.agree = failed == 0 && trend == TrendVerdict::DivergingUp;
        }
        LimitPrediction::MinusInfinity { .. } => {
            report.agree = failed == 0 && trend == TrendVerdict::DivergingDown;
        }
    }
    Ok(report)
}

pub const CSV_HEADER: &str = "alpha,lambda,n,residual,energy,w0sq,w1sq,ms";

fn g17(x: f64) -> String {
    if x.is_finite() {
        format!("{x:.16e}")
    } else {
        format!("{x}")
    }
}

/// One row per point, 17 significant digits, LF line endings.
pub fn points_to_csv(points: &[SweepPoint]) -> String {
    let mut out = String::from(CSV_HEADER);
    out.push('\n');
    for p in points {
        let _ = writeln!(
            out,
            "{},{},{},{},{},{},{},{}",
            g17(p.alpha),
            g17(p.lambda),
            p.n,
            g17(p.residual),
            g17(p.energy),
            g17(p.w0sq),
            g17(p.w1sq),
            p.ms
        );
    }
    out
}
