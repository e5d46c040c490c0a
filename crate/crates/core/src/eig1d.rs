//! Principal eigenpair of the 1D problem, computed two independent ways.
//!
//! The symmetric path discretizes the gauge-transformed quadratic form
//!
//! ```text
//! D ∫ (w' - γ m' w)² + ∫ V w² + D (ℓ₁/ħ₁) w(0)² + D (ℓ₂/ħ₂) w(1)²,   γ = α / D
//! ```
//!
//! cell by cell as `D/h (e^{-γΔ/2} w_{i+1} - e^{γΔ/2} w_i)²` with
//! `Δ = m(x_{i+1}) - m(x_i)`, which is exact for `w = e^{γ m}` and keeps the
//! stiffness an M-matrix for every α. Mass is trapezoidal (lumped), so the
//! pencil is symmetric tridiagonal and Sturm bisection applies.
//!
//! The direct path applies central differences to the untransformed operator
//! with ghost-point Robin closure and runs shifted inverse iteration whose
//! shifts come from Collatz–Wielandt bounds.

use serde::Serialize;

use crate::error::{Error, IterationRecord, Result};
use crate::gauge::gauge_forward;
use crate::model::{End, ProblemSpec1D, RobinSide};
use crate::model::Potential;

/// Smallest grid accepted by [`mesh_for_alpha`].
pub const MIN_MESH: usize = 2049;
/// Largest grid [`mesh_for_alpha`] will return.
pub const MAX_MESH: usize = 1 << 20;
/// Nodes per boundary-layer width `D / (α max|m'|)`.
const LAYER_NODES: f64 = 32.0;
/// Node count used for sub-interval eigenvalues.
pub const SUB_MESH: usize = 4097;

const MAX_SHIFT_RETRIES: usize = 5;
const INVERSE_ITERATIONS: usize = 50;
const DIRECT_ITERATIONS: usize = 300;
/// Cell exponents beyond this mean the grid cannot resolve the layer at all.
const MAX_CELL_EXPONENT: f64 = 300.0;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub struct Grid1D {
    n: usize,
}

impl Grid1D {
    pub fn new(n: usize) -> Result<Self> {
        if n < 3 {
            return Err(Error::GridTooSmall { min: 3, got: n });
        }
        Ok(Grid1D { n })
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn h(&self) -> f64 {
        1.0 / (self.n - 1) as f64
    }

    pub fn x(&self, i: usize) -> f64 {
        i as f64 / (self.n - 1) as f64
    }

    pub fn nodes(&self) -> Vec<f64> {
        (0..self.n).map(|i| self.x(i)).collect()
    }

    /// Grid with `2n - 1` nodes containing this one.
    pub fn refined(&self) -> Grid1D {
        Grid1D { n: 2 * self.n - 1 }
    }
}

/// End condition for sub-interval problems.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub enum BcKind {
    Neumann,
    Dirichlet,
    Robin { hbar: f64, ell: f64 },
}

impl BcKind {
    /// `ℓ/ħ` for non-Dirichlet ends.
    fn ratio(&self) -> Option<f64> {
        match *self {
            BcKind::Neumann => Some(0.0),
            BcKind::Dirichlet => None,
            BcKind::Robin { hbar: 0.0, .. } => None,
            BcKind::Robin { hbar, ell } => Some(ell / hbar),
        }
    }
}

impl From<&RobinSide> for BcKind {
    fn from(side: &RobinSide) -> Self {
        if side.is_dirichlet() {
            BcKind::Dirichlet
        } else if side.ell == 0.0 {
            BcKind::Neumann
        } else {
            BcKind::Robin { hbar: side.hbar, ell: side.ell }
        }
    }
}

/// Stiffness/mass pair of the discrete quadratic form. Matrices are over the
/// unknowns only (Dirichlet end nodes removed); the cell data needed to
/// evaluate the form as a sum of squares is kept alongside.
#[derive(Debug, Clone)]
pub struct SymTriSystem {
    pub diag: Vec<f64>,
    pub offdiag: Vec<f64>,
    pub mass: Vec<f64>,
    /// `[left, right]`: whether that end node was eliminated.
    pub dirichlet_mask: [bool; 2],
    h: f64,
    diffusion: f64,
    /// `e^{γΔ_i/2}` per cell.
    left_fac: Vec<f64>,
    /// `e^{-γΔ_i/2}` per cell.
    right_fac: Vec<f64>,
    v: Vec<f64>,
    full_mass: Vec<f64>,
    boundary: [Option<f64>; 2],
}

impl SymTriSystem {
    /// Full-grid node count.
    pub fn n_full(&self) -> usize {
        self.v.len()
    }

    fn first(&self) -> usize {
        usize::from(self.dirichlet_mask[0])
    }

    /// Embeds a vector over the unknowns into the full grid.
    pub fn expand(&self, reduced: &[f64]) -> Vec<f64> {
        let mut full = vec![0.0; self.n_full()];
        full[self.first()..self.first() + reduced.len()].copy_from_slice(reduced);
        full
    }

    /// Trapezoid weights on the full grid (zero at eliminated nodes).
    pub fn full_mass(&self) -> &[f64] {
        &self.full_mass
    }

    /// Dense-free product `A x` over the unknowns.
    pub fn apply(&self, x: &[f64]) -> Vec<f64> {
        let n = x.len();
        (0..n)
            .map(|i| {
                let mut s = self.diag[i] * x[i];
                if i > 0 {
                    s += self.offdiag[i - 1] * x[i - 1];
                }
                if i + 1 < n {
                    s += self.offdiag[i] * x[i + 1];
                }
                s
            })
            .collect()
    }

    /// Gradient part of the form plus boundary terms, for a full-grid `w`.
    pub fn energy(&self, w: &[f64]) -> f64 {
        let a = self.diffusion / self.h;
        let mut e = 0.0;
        for i in 0..w.len() - 1 {
            let d = self.right_fac[i] * w[i + 1] - self.left_fac[i] * w[i];
            e += a * d * d;
        }
        if let Some(b) = self.boundary[0] {
            e += b * w[0] * w[0];
        }
        if let Some(b) = self.boundary[1] {
            e += b * w[w.len() - 1] * w[w.len() - 1];
        }
        e
    }

    /// `∫ V w²` by the trapezoid rule.
    pub fn potential_energy(&self, w: &[f64]) -> f64 {
        w.iter().zip(&self.full_mass).zip(&self.v).map(|((w, m), v)| m * v * w * w).sum()
    }

    pub fn norm_sq(&self, w: &[f64]) -> f64 {
        w.iter().zip(&self.full_mass).map(|(w, m)| m * w * w).sum()
    }

    /// Rayleigh quotient evaluated as a sum of squares, for a full-grid `w`.
    pub fn rayleigh_quotient(&self, w: &[f64]) -> f64 {
        (self.energy(w) + self.potential_energy(w)) / self.norm_sq(w)
    }
}

struct IntervalData<'a> {
    h: f64,
    diffusion: f64,
    gamma: f64,
    m: &'a [f64],
    v: &'a [f64],
    left: BcKind,
    right: BcKind,
}

/// `∫₀¹ (1 - s) e^{t s} ds`, the hat-function weight of `e^{2γ(m - m_i)}`
/// over a cell on which `m` rises linearly by `t / 2γ`.
fn hat_weight(t: f64) -> f64 {
    if t.abs() < 0.5 {
        // Σ t^k / (k + 2)!, avoiding the cancellation in the closed form
        let (mut term, mut sum) = (0.5, 0.5);
        for k in 1..20 {
            term *= t / (k + 2) as f64;
            sum += term;
        }
        sum
    } else {
        (t.exp_m1() - t) / (t * t)
    }
}

fn assemble_interval(data: IntervalData<'_>) -> Result<SymTriSystem> {
    let n = data.v.len();
    let h = data.h;
    let a = data.diffusion / h;
    let mut diag = vec![0.0; n];
    let mut off = vec![-a; n - 1];
    let mut left_fac = Vec::with_capacity(n - 1);
    let mut right_fac = Vec::with_capacity(n - 1);
    for i in 0..n - 1 {
        let e = 0.5 * data.gamma * (data.m[i + 1] - data.m[i]);
        if e.abs() > MAX_CELL_EXPONENT {
            return Err(Error::MeshTooCoarse(format!(
                "cell {i} has gauge exponent {e:.1}; refine the grid"
            )));
        }
        let (lf, rf) = (e.exp(), (-e).exp());
        diag[i] += a * lf * lf;
        diag[i + 1] += a * rf * rf;
        left_fac.push(lf);
        right_fac.push(rf);
    }
    let rl = data.left.ratio();
    let rr = data.right.ratio();
    let mut full_mass = vec![0.0; n];
    for i in 0..n - 1 {
        let t = 2.0 * data.gamma * (data.m[i + 1] - data.m[i]);
        full_mass[i] += h * hat_weight(t);
        full_mass[i + 1] += h * hat_weight(-t);
    }
    if rl.is_none() {
        full_mass[0] = 0.0;
    }
    if rr.is_none() {
        full_mass[n - 1] = 0.0;
    }
    for i in 0..n {
        diag[i] += full_mass[i] * data.v[i];
    }
    let boundary = [rl.map(|r| data.diffusion * r), rr.map(|r| data.diffusion * r)];
    if let Some(b) = boundary[0] {
        diag[0] += b;
    }
    if let Some(b) = boundary[1] {
        diag[n - 1] += b;
    }
    let lo = usize::from(rl.is_none());
    let hi = n - usize::from(rr.is_none());
    if hi <= lo {
        return Err(Error::GridTooSmall { min: 3, got: n });
    }
    let diag_r = diag[lo..hi].to_vec();
    let off_r = off.drain(lo..hi - 1).collect();
    Ok(SymTriSystem {
        diag: diag_r,
        offdiag: off_r,
        mass: full_mass[lo..hi].to_vec(),
        dirichlet_mask: [rl.is_none(), rr.is_none()],
        h,
        diffusion: data.diffusion,
        left_fac,
        right_fac,
        v: data.v.to_vec(),
        full_mass,
        boundary,
    })
}

pub fn assemble_symmetric(spec: &ProblemSpec1D, alpha: f64, grid: Grid1D) -> Result<SymTriSystem> {
    spec.ensure_valid()?;
    if !(alpha >= 0.0) {
        return Err(Error::Malformed(format!("alpha must be nonnegative, got {alpha}")));
    }
    let xs = grid.nodes();
    let m: Vec<f64> = xs.iter().map(|&x| spec.m.eval_unchecked(x, 0)).collect();
    let v: Vec<f64> = xs.iter().map(|&x| spec.v.eval_unchecked(x)).collect();
    assemble_interval(IntervalData {
        h: grid.h(),
        diffusion: spec.diffusion,
        gamma: alpha / spec.diffusion,
        m: &m,
        v: &v,
        left: BcKind::from(&spec.left),
        right: BcKind::from(&spec.right),
    })
}

/// Number of eigenvalues of the standard-form matrix below `x`.
fn sturm_count(b: &[f64], e2: &[f64], x: f64) -> usize {
    let mut count = 0;
    let mut q = 1.0;
    for i in 0..b.len() {
        q = b[i] - x - if i > 0 { e2[i - 1] / q } else { 0.0 };
        if q == 0.0 {
            q = -f64::EPSILON * (b[i].abs() + x.abs() + f64::MIN_POSITIVE);
        }
        if q < 0.0 {
            count += 1;
        }
    }
    count
}

/// Smallest eigenvalue of `A w = λ M w` by Sturm bisection on
/// `M^{-1/2} A M^{-1/2}`.
pub fn smallest_eigenvalue(sys: &SymTriSystem) -> f64 {
    let n = sys.diag.len();
    let b: Vec<f64> = sys.diag.iter().zip(&sys.mass).map(|(d, m)| d / m).collect();
    let e: Vec<f64> = (0..n.saturating_sub(1))
        .map(|i| sys.offdiag[i] / (sys.mass[i] * sys.mass[i + 1]).sqrt())
        .collect();
    let e2: Vec<f64> = e.iter().map(|x| x * x).collect();
    let mut lo = f64::INFINITY;
    let mut hi = f64::NEG_INFINITY;
    for i in 0..n {
        let r = if i > 0 { e[i - 1].abs() } else { 0.0 } + if i + 1 < n { e[i].abs() } else { 0.0 };
        lo = lo.min(b[i] - r);
        hi = hi.max(b[i] + r);
    }
    while sturm_count(&b, &e2, lo) > 0 {
        lo -= 1.0;
    }
    while sturm_count(&b, &e2, hi) == 0 {
        hi += 1.0;
    }
    loop {
        let mid = 0.5 * (lo + hi);
        if mid <= lo || mid >= hi || hi - lo <= 1e-10 * mid.abs().max(1.0) {
            return mid;
        }
        if sturm_count(&b, &e2, mid) >= 1 {
            hi = mid;
        } else {
            lo = mid;
        }
    }
}

/// Solves `(A - σ M) y = rhs`; `None` when a pivot is not positive, i.e.
/// the shift is not below the smallest eigenvalue.
fn solve_shifted(sys: &SymTriSystem, sigma: f64, rhs: &[f64]) -> Option<Vec<f64>> {
    let n = rhs.len();
    let mut piv = Vec::with_capacity(n);
    let mut z = Vec::with_capacity(n);
    for i in 0..n {
        let mut p = sys.diag[i] - sigma * sys.mass[i];
        let mut r = rhs[i];
        if i > 0 {
            let l = sys.offdiag[i - 1] / piv[i - 1];
            p -= l * sys.offdiag[i - 1];
            r -= l * z[i - 1];
        }
        if !(p > 0.0) {
            return None;
        }
        piv.push(p);
        z.push(r);
    }
    let mut y = vec![0.0; n];
    for i in (0..n).rev() {
        let upper = if i + 1 < n { sys.offdiag[i] * y[i + 1] } else { 0.0 };
        y[i] = (z[i] - upper) / piv[i];
    }
    Some(y)
}

/// Principal eigenpair.
#[derive(Debug, Clone, Serialize)]
pub struct EigenResult {
    pub lambda: f64,
    /// Full grid, normalized so that `Σ mass_i w_i² = 1`.
    pub w: Vec<f64>,
    /// Trapezoid weights matching `w`.
    pub mass: Vec<f64>,
    pub residual: f64,
    pub grid: Grid1D,
    pub iterations: usize,
}

impl EigenResult {
    pub fn boundary_masses(&self) -> (f64, f64) {
        let n = self.w.len();
        (self.w[0] * self.w[0], self.w[n - 1] * self.w[n - 1])
    }
}

/// Eigenpair of an assembled system: bisection for the shift, inverse
/// iteration for the vector, and the Rayleigh quotient for λ.
pub fn solve_system(sys: &SymTriSystem, grid: Grid1D) -> Result<EigenResult> {
    let lambda_b = smallest_eigenvalue(sys);
    let n = sys.diag.len();
    let mut eps = 1e-8;
    for _ in 0..=MAX_SHIFT_RETRIES {
        let sigma = lambda_b - eps * (1.0 + lambda_b.abs());
        if let Some((v, iterations)) = inverse_iteration(sys, sigma, n) {
            let w = sys.expand(&v);
            let lambda = sys.rayleigh_quotient(&w);
            let av = sys.apply(&v);
            let residual = av
                .iter()
                .zip(&v)
                .zip(&sys.mass)
                .map(|((a, v), m)| (a - lambda * m * v).abs())
                .fold(0.0, f64::max);
            return Ok(EigenResult {
                lambda,
                w,
                mass: sys.full_mass.clone(),
                residual,
                grid,
                iterations,
            });
        }
        eps *= 100.0;
    }
    Err(Error::Breakdown { retries: MAX_SHIFT_RETRIES })
}

fn inverse_iteration(sys: &SymTriSystem, sigma: f64, n: usize) -> Option<(Vec<f64>, usize)> {
    let norm = |x: &[f64]| x.iter().zip(&sys.mass).map(|(x, m)| m * x * x).sum::<f64>().sqrt();
    let mut v = vec![1.0; n];
    let s = norm(&v);
    v.iter_mut().for_each(|x| *x /= s);
    for it in 1..=INVERSE_ITERATIONS {
        let rhs: Vec<f64> = v.iter().zip(&sys.mass).map(|(v, m)| v * m).collect();
        let mut y = solve_shifted(sys, sigma, &rhs)?;
        let s = norm(&y);
        if !(s.is_finite() && s > 0.0) {
            return None;
        }
        y.iter_mut().for_each(|x| *x /= s);
        let big = y.iter().fold(0.0_f64, |a, b| a.max(b.abs()));
        let change = y.iter().zip(&v).fold(0.0_f64, |a, (y, v)| a.max((y - v).abs())) / big;
        v = y;
        if change < 1e-12 {
            return Some((v, it));
        }
    }
    Some((v, INVERSE_ITERATIONS))
}

/// Principal eigenpair through the symmetric gauge form.
pub fn principal_eigenpair(spec: &ProblemSpec1D, alpha: f64, grid: Grid1D) -> Result<EigenResult> {
    let sys = assemble_symmetric(spec, alpha, grid)?;
    solve_system(&sys, grid)
}

/// Nonsymmetric tridiagonal matrix stored by row sums: the diagonal is
/// `s_i - lo_i - up_i`, so `T 1 = s` exactly.
struct RowSumTri {
    lo: Vec<f64>,
    up: Vec<f64>,
    s: Vec<f64>,
}

impl RowSumTri {
    /// Collatz–Wielandt ratios `(T v)_i / v_i` in difference form.
    fn ratios(&self, v: &[f64]) -> Vec<Option<f64>> {
        let n = v.len();
        (0..n)
            .map(|i| {
                if v[i] < 1e-280 {
                    return None;
                }
                let mut r = self.s[i];
                if i > 0 {
                    r -= self.lo[i] * (1.0 - v[i - 1] / v[i]);
                }
                if i + 1 < n {
                    r -= self.up[i] * (1.0 - v[i + 1] / v[i]);
                }
                Some(r)
            })
            .collect()
    }

    /// Solves `(T - σ I) y = b`, eliminating through row sums so that the
    /// large diffusive entries never cancel. `None` on a nonpositive pivot.
    fn solve_shifted(&self, sigma: f64, b: &[f64]) -> Option<Vec<f64>> {
        let n = b.len();
        let mut piv = Vec::with_capacity(n);
        let mut rho_prev = 0.0;
        let mut z = Vec::with_capacity(n);
        for i in 0..n {
            let mut rho = self.s[i] - sigma;
            let mut r = b[i];
            if i > 0 {
                let l = self.lo[i] / piv[i - 1];
                rho -= l * rho_prev;
                r -= l * z[i - 1];
            }
            let p = rho - if i + 1 < n { self.up[i] } else { 0.0 };
            if !(p > 0.0) {
                return None;
            }
            piv.push(p);
            z.push(r);
            rho_prev = rho;
        }
        let mut y = vec![0.0; n];
        for i in (0..n).rev() {
            let upper = if i + 1 < n { self.up[i] * y[i + 1] } else { 0.0 };
            y[i] = (z[i] - upper) / piv[i];
        }
        Some(y)
    }

    /// Two-sided Rayleigh quotient with the detailed-balance left vector
    /// `π ⊙ v`, evaluated in log space.
    fn balanced_rayleigh(&self, v: &[f64]) -> f64 {
        let n = v.len();
        let mut log_pi = vec![0.0; n];
        for i in 0..n - 1 {
            log_pi[i + 1] = log_pi[i] + (self.up[i] / self.lo[i + 1]).ln();
        }
        let node: Vec<Option<f64>> =
            (0..n).map(|i| (v[i] > 0.0).then(|| log_pi[i] + 2.0 * v[i].ln())).collect();
        let edge: Vec<Option<f64>> = (0..n - 1)
            .map(|i| {
                let d = (v[i + 1] - v[i]).abs();
                (d > 0.0).then(|| log_pi[i] + (-self.up[i]).ln() + 2.0 * d.ln())
            })
            .collect();
        let shift = node.iter().flatten().cloned().fold(f64::NEG_INFINITY, f64::max);
        let mut num = 0.0;
        let mut den = 0.0;
        for i in 0..n {
            if let Some(l) = node[i] {
                let wgt = (l - shift).exp();
                num += wgt * self.s[i];
                den += wgt;
            }
        }
        for l in edge.iter().flatten() {
            num += (l - shift).exp();
        }
        num / den
    }
}

fn assemble_direct(spec: &ProblemSpec1D, alpha: f64, grid: Grid1D) -> Result<(RowSumTri, usize)> {
    let n = grid.n();
    let h = grid.h();
    let d = spec.diffusion;
    let dl = spec.left.is_dirichlet();
    let dr = spec.right.is_dirichlet();
    let first = usize::from(dl);
    let last = n - 1 - usize::from(dr);
    let k = last + 1 - first;
    let mut lo = vec![0.0; k];
    let mut up = vec![0.0; k];
    let mut s = vec![0.0; k];
    for i in first..=last {
        let x = grid.x(i);
        let m1 = spec.m.eval_unchecked(x, 1);
        let v = spec.v.eval_unchecked(x);
        let l = -d / (h * h) + alpha * m1 / h;
        let u = -d / (h * h) - alpha * m1 / h;
        let j = i - first;
        if i == 0 {
            let r1 = spec.left.ell / spec.left.hbar;
            up[j] = l + u;
            s[j] = v - 2.0 * h * r1 * l;
        } else if i == n - 1 {
            let r2 = -spec.right.ell / spec.right.hbar;
            lo[j] = l + u;
            s[j] = v + 2.0 * h * r2 * u;
        } else {
            lo[j] = l;
            up[j] = u;
            s[j] = v;
            if i == 1 && dl {
                s[j] -= l;
                lo[j] = 0.0;
            }
            if i == n - 2 && dr {
                s[j] -= u;
                up[j] = 0.0;
            }
        }
        let couples = [(j > 0, lo[j]), (j + 1 < k, up[j])];
        for (present, c) in couples {
            if present && !(c < 0.0) {
                return Err(Error::MeshTooCoarse(format!(
                    "central differences lose monotonicity at x = {x}: α|m'|h/D = {:.3} ≥ 1",
                    alpha * m1.abs() * h / d
                )));
            }
        }
    }
    Ok((RowSumTri { lo, up, s }, first))
}

/// Independent oracle: central differences on the untransformed operator.
/// The returned `w` is `e^{γ m} φ` normalized with the trapezoid weights.
pub fn principal_eigen_direct(spec: &ProblemSpec1D, alpha: f64, grid: Grid1D) -> Result<EigenResult> {
    spec.ensure_valid()?;
    let (t, first) = assemble_direct(spec, alpha, grid)?;
    let k = t.s.len();
    let mut v = vec![1.0; k];
    let mut sigma = f64::NEG_INFINITY;
    let mut trace = Vec::new();
    let cmax = (0..k).map(|i| t.lo[i].abs() + t.up[i].abs()).fold(0.0, f64::max);
    let floor = 100.0 * f64::EPSILON * cmax;
    let mut best_width = f64::INFINITY;
    let mut stalled = 0;
    let mut settled = 0;
    let mut last_lb = f64::NAN;
    let mut iterations = 0;
    loop {
        let ratios = t.ratios(&v);
        let lb = ratios.iter().flatten().cloned().fold(f64::INFINITY, f64::min);
        let ub = ratios.iter().flatten().cloned().fold(f64::NEG_INFINITY, f64::max);
        let width = ub - lb;
        trace.push(IterationRecord { iteration: iterations, shift: sigma, estimate: lb, change: width });
        if width <= 1e-10 * (1.0 + lb.abs()) + floor {
            break;
        }
        // tiny components lose relative accuracy in the solves, which can
        // pin the upper bound; a settled lower bound is then the answer
        if (lb - last_lb).abs() <= 1e-13 * (1.0 + lb.abs()) {
            settled += 1;
            if settled >= 3 {
                break;
            }
        } else {
            settled = 0;
        }
        last_lb = lb;
        if width < best_width * 0.999 {
            best_width = width;
            stalled = 0;
        } else {
            stalled += 1;
            if stalled >= 3 && width <= 1e-6 * (1.0 + lb.abs()) {
                break;
            }
        }
        if iterations >= DIRECT_ITERATIONS {
            return Err(Error::NoConvergence { trace });
        }
        let floor_gap = 1e-8 * (1.0 + lb.abs());
        sigma = sigma.max(lb - width.max(floor_gap));
        // a positive factorization certifies s < λ₁, so try a shift close to
        // the lower bound first and back off towards the safe one
        let mut s = sigma.max(lb - width.min(1e-3 * (1.0 + lb.abs())).max(floor_gap));
        let mut y = None;
        for _ in 0..=MAX_SHIFT_RETRIES {
            y = t.solve_shifted(s, &v);
            if y.is_some() {
                break;
            }
            s = if s > sigma { 0.5 * (s + sigma) } else { s - 1e-6 * (1.0 + s.abs()) };
        }
        if y.is_none() {
            y = t.solve_shifted(sigma - floor_gap, &v);
        }
        let mut y = y.ok_or(Error::Breakdown { retries: MAX_SHIFT_RETRIES })?;
        let big = y.iter().cloned().fold(0.0, f64::max);
        if !(big.is_finite() && big > 0.0) {
            return Err(Error::NoConvergence { trace });
        }
        y.iter_mut().for_each(|x| *x /= big);
        v = y;
        iterations += 1;
    }
    let lambda = t.balanced_rayleigh(&v);
    let residual = t
        .ratios(&v)
        .iter()
        .zip(&v)
        .filter_map(|(r, v)| r.map(|r| ((r - lambda) * v).abs()))
        .fold(0.0, f64::max);

    let n = grid.n();
    let mut phi = vec![0.0; n];
    phi[first..first + k].copy_from_slice(&v);
    let field = gauge_forward(&phi, &grid.nodes(), &spec.m, alpha / spec.diffusion);
    let mut mass = vec![grid.h(); n];
    mass[0] = if spec.left.is_dirichlet() { 0.0 } else { 0.5 * grid.h() };
    mass[n - 1] = if spec.right.is_dirichlet() { 0.0 } else { 0.5 * grid.h() };
    // renormalize by the largest entry first so log-space fields stay finite
    let big = field.values.iter().cloned().fold(0.0, f64::max);
    let mut w: Vec<f64> = field.values.iter().map(|x| x / big).collect();
    let norm = w.iter().zip(&mass).map(|(w, m)| m * w * w).sum::<f64>().sqrt();
    w.iter_mut().for_each(|x| *x /= norm);
    Ok(EigenResult { lambda, w, mass, residual, grid, iterations })
}

fn check_interval(a: f64, b: f64) -> Result<()> {
    if !(0.0..=1.0).contains(&a) {
        return Err(Error::Domain { x: a });
    }
    if !(0.0..=1.0).contains(&b) {
        return Err(Error::Domain { x: b });
    }
    if !(b - a >= 1e-8) {
        return Err(Error::DegenerateInterval { a, b });
    }
    Ok(())
}

/// `λ₁` of `-D φ'' + V φ = λ φ` on `(a, b)` with `n` nodes.
pub fn sub_eigenvalue_with(
    v: &Potential,
    a: f64,
    b: f64,
    left: BcKind,
    right: BcKind,
    diffusion: f64,
    n: usize,
) -> Result<f64> {
    check_interval(a, b)?;
    if n < 3 {
        return Err(Error::GridTooSmall { min: 3, got: n });
    }
    let h = (b - a) / (n - 1) as f64;
    let vs: Vec<f64> = (0..n)
        .map(|i| {
            let x = if i == n - 1 { b } else { a + i as f64 * h };
            v.eval_unchecked(x)
        })
        .collect();
    let zeros = vec![0.0; n];
    let sys = assemble_interval(IntervalData { h, diffusion, gamma: 0.0, m: &zeros, v: &vs, left, right })?;
    let grid = Grid1D::new(n)?;
    Ok(solve_system(&sys, grid)?.lambda)
}

/// `λ₁^{ij}(a, b)` for `-φ'' + V φ = λ φ` at the default resolution.
pub fn sub_eigenvalue(v: &Potential, a: f64, b: f64, left: BcKind, right: BcKind) -> Result<f64> {
    sub_eigenvalue_with(v, a, b, left, right, 1.0, SUB_MESH)
}

/// Sub-interval eigenvalue with one Richardson step.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct SubEigen {
    pub value: f64,
    /// `|extrapolated - fine|`.
    pub error: f64,
}

pub fn sub_eigenvalue_refined(
    v: &Potential,
    a: f64,
    b: f64,
    left: BcKind,
    right: BcKind,
    diffusion: f64,
) -> Result<SubEigen> {
    let coarse = sub_eigenvalue_with(v, a, b, left, right, diffusion, SUB_MESH)?;
    let fine = sub_eigenvalue_with(v, a, b, left, right, diffusion, 2 * SUB_MESH - 1)?;
    let delta = (fine - coarse) / 3.0;
    Ok(SubEigen { value: fine + delta, error: delta.abs() })
}

/// `D ∫ (w' - γ m' w)² + D (ℓ₁/ħ₁) w(0)² + D (ℓ₂/ħ₂) w(1)²` for the
/// result's `w`, with boundary terms only on non-Dirichlet sides.
pub fn energy_functional(spec: &ProblemSpec1D, alpha: f64, result: &EigenResult) -> Result<f64> {
    let sys = assemble_symmetric(spec, alpha, result.grid)?;
    Ok(sys.energy(&result.w))
}

/// Only the signed boundary contribution `D (ℓ/ħ) w(end)²`, zero for
/// Dirichlet sides.
pub fn boundary_term(spec: &ProblemSpec1D, end: End, result: &EigenResult) -> f64 {
    let side = spec.side(end);
    if side.is_dirichlet() {
        return 0.0;
    }
    let w = match end {
        End::Left => result.w[0],
        End::Right => result.w[result.w.len() - 1],
    };
    spec.diffusion * side.ell / side.hbar * w * w
}

/// Grid resolving layers of width `D / (α max|m'|)` with 32 nodes.
pub fn mesh_for_alpha(spec: &ProblemSpec1D, alpha: f64) -> Grid1D {
    let want = (LAYER_NODES * alpha * spec.m.max_abs_slope() / spec.diffusion).ceil() + 1.0;
    let n = if want > MAX_MESH as f64 {
        log::warn!("mesh for alpha = {alpha} needs {want} nodes; capped at {MAX_MESH}");
        MAX_MESH
    } else {
        (want as usize).max(MIN_MESH)
    };
    Grid1D { n }
}

/// Error estimate `|λ_{2n-1} - λ_n| / 3` for the symmetric path.
pub fn richardson_estimate(spec: &ProblemSpec1D, alpha: f64, grid: Grid1D) -> Result<f64> {
    let coarse = principal_eigenpair(spec, alpha, grid)?.lambda;
    let fine = principal_eigenpair(spec, alpha, grid.refined())?.lambda;
    Ok((fine - coarse).abs() / 3.0)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::model::PiecewiseProfile;
    use std::f64::consts::PI;

    fn spec(m: PiecewiseProfile, v: Potential, left: RobinSide, right: RobinSide) -> ProblemSpec1D {
        ProblemSpec1D::new(m, v, left, right)
    }

    fn neumann() -> (RobinSide, RobinSide) {
        (RobinSide::neumann(End::Left), RobinSide::neumann(End::Right))
    }

    fn dirichlet() -> (RobinSide, RobinSide) {
        (RobinSide::dirichlet(End::Left), RobinSide::dirichlet(End::Right))
    }

    fn tri(diag: Vec<f64>, off: Vec<f64>, mass: Vec<f64>) -> SymTriSystem {
        let n = diag.len();
        SymTriSystem {
            diag,
            offdiag: off,
            mass: mass.clone(),
            dirichlet_mask: [false, false],
            h: 1.0,
            diffusion: 1.0,
            left_fac: vec![1.0; n - 1],
            right_fac: vec![1.0; n - 1],
            v: vec![0.0; n],
            full_mass: mass,
            boundary: [None, None],
        }
    }

    #[test]
    fn grid_rejects_tiny() {
        assert!(matches!(Grid1D::new(2), Err(Error::GridTooSmall { min: 3, got: 2 })));
    }

    #[test]
    fn bisection_examples() {
        let a = tri(vec![2.0, 2.0], vec![-1.0], vec![1.0, 1.0]);
        assert!((smallest_eigenvalue(&a) - 1.0).abs() < 1e-10);
        let b = tri(vec![2.0; 3], vec![-1.0; 2], vec![1.0; 3]);
        assert!((smallest_eigenvalue(&b) - (2.0 - 2f64.sqrt())).abs() < 1e-10);
        let c = tri(vec![2.0; 3], vec![-1.0; 2], vec![4.0; 3]);
        assert!((smallest_eigenvalue(&c) - (2.0 - 2f64.sqrt()) / 4.0).abs() < 1e-10);
    }

    #[test]
    fn four_node_dirichlet_system() {
        let (l, r) = dirichlet();
        let s = spec(PiecewiseProfile::constant(0.0), Potential::constant(0.0), l, r);
        let sys = assemble_symmetric(&s, 0.0, Grid1D::new(4).unwrap()).unwrap();
        assert_eq!(sys.diag.len(), 2);
        // stiffness 1/h, mass h: mass-scaled tridiag(-1/h², 2/h²)
        assert!((smallest_eigenvalue(&sys) - 9.0).abs() < 1e-9);
    }

    #[test]
    fn neumann_constant_potential_is_exact() {
        let (l, r) = neumann();
        let s = spec(PiecewiseProfile::constant(0.0), Potential::constant(3.25), l, r);
        let res = principal_eigenpair(&s, 0.0, Grid1D::new(65).unwrap()).unwrap();
        assert!((res.lambda - 3.25).abs() < 1e-12);
        let w0 = res.w[0];
        assert!(res.w.iter().all(|w| (w - w0).abs() < 1e-10));
    }

    #[test]
    fn dirichlet_sine_mode() {
        let (l, r) = dirichlet();
        let s = spec(PiecewiseProfile::constant(0.0), Potential::constant(0.0), l, r);
        let res = principal_eigenpair(&s, 0.0, Grid1D::new(4097).unwrap()).unwrap();
        assert!((res.lambda - PI * PI).abs() < 1e-4);
        assert!(res.residual <= 1e-8 * (1.0 + res.lambda));
    }

    #[test]
    fn constant_eigenfunction_both_paths() {
        let (l, r) = neumann();
        let s = spec(PiecewiseProfile::linear(1.0), Potential::constant(5.0), l, r);
        for &a in &[0.0, 10.0, 100.0] {
            let g = mesh_for_alpha(&s, a);
            let direct = principal_eigen_direct(&s, a, g).unwrap();
            assert!((direct.lambda - 5.0).abs() < 1e-12, "{a}: {}", direct.lambda);
            let sym = principal_eigenpair(&s, a, g).unwrap();
            assert!((sym.lambda - 5.0).abs() < 1e-9, "{a}: {}", sym.lambda);
        }
    }

    #[test]
    fn paths_agree_at_zero_alpha() {
        let left = RobinSide::new(End::Left, 1.0, 0.7);
        let right = RobinSide::new(End::Right, 1.0, -0.4);
        let s = spec(PiecewiseProfile::linear(1.0), Potential::global(vec![1.0, -2.0, 3.0]), left, right);
        let g = Grid1D::new(2049).unwrap();
        let a = principal_eigenpair(&s, 0.0, g).unwrap().lambda;
        let b = principal_eigen_direct(&s, 0.0, g).unwrap().lambda;
        assert!((a - b).abs() < 10.0 * g.h() * g.h() * (1.0 + a.abs()), "{a} vs {b}");
    }

    #[test]
    fn sub_eigenvalue_examples() {
        let zero = Potential::constant(0.0);
        let dd = sub_eigenvalue(&zero, 0.0, 1.0, BcKind::Dirichlet, BcKind::Dirichlet).unwrap();
        assert!((dd - PI * PI).abs() < 1e-5);
        let nd = sub_eigenvalue(&zero, 0.0, 0.5, BcKind::Neumann, BcKind::Dirichlet).unwrap();
        assert!((nd - PI * PI).abs() < 1e-4);
        let c = Potential::constant(-2.5);
        let nn = sub_eigenvalue(&c, 0.3, 0.8, BcKind::Neumann, BcKind::Neumann).unwrap();
        assert!((nn + 2.5).abs() < 1e-12);
        assert!(matches!(
            sub_eigenvalue(&zero, 0.5, 0.5 + 1e-9, BcKind::Neumann, BcKind::Neumann),
            Err(Error::DegenerateInterval { .. })
        ));
    }

    #[test]
    fn refined_sub_eigenvalue_is_sharper() {
        let zero = Potential::constant(0.0);
        let r = sub_eigenvalue_refined(&zero, 0.2, 0.4, BcKind::Neumann, BcKind::Dirichlet, 1.0).unwrap();
        let exact = (PI / 0.4).powi(2);
        assert!((r.value - exact).abs() < 1e-6, "{}", r.value - exact);
        assert!(r.error > 0.0 && r.error < 1e-4);
    }

    #[test]
    fn robin_sub_eigenvalue_matches_transcendental_root() {
        // -φ'' = λφ on (0,1), -φ'(0) + φ(0) = 0, φ(1) = 0: tan k = -k
        let f = |k: f64| k.tan() + k;
        let (mut lo, mut hi) = (PI / 2.0 + 1e-9, PI);
        for _ in 0..200 {
            let mid = 0.5 * (lo + hi);
            if f(lo) * f(mid) <= 0.0 {
                hi = mid;
            } else {
                lo = mid;
            }
        }
        let k = 0.5 * (lo + hi);
        let zero = Potential::constant(0.0);
        let r = sub_eigenvalue(&zero, 0.0, 1.0, BcKind::Robin { hbar: 1.0, ell: 1.0 }, BcKind::Dirichlet).unwrap();
        assert!((r - k * k).abs() < 1e-5, "{r} vs {}", k * k);
    }

    #[test]
    fn energy_of_constant_w() {
        let left = RobinSide::new(End::Left, 1.0, 1.0);
        let right = RobinSide::new(End::Right, 1.0, 1.0);
        let s = spec(PiecewiseProfile::linear(1.0), Potential::constant(0.0), left, right);
        let grid = Grid1D::new(2049).unwrap();
        let sys = assemble_symmetric(&s, 2.0, grid).unwrap();
        let w = vec![1.0; grid.n()];
        // each cell carries h · (sinh(t/2) / (t/2))² with t = 2γh
        let u = 2.0 * grid.h();
        let expected = (u.sinh() / u).powi(2);
        assert!((sys.norm_sq(&w) - expected).abs() < 1e-12, "{} vs {expected}", sys.norm_sq(&w));
        assert!((sys.energy(&w) - 6.0).abs() < 1e-5);
        let (l, r) = neumann();
        let flat = spec(PiecewiseProfile::linear(1.0), Potential::constant(0.0), l, r);
        let sys = assemble_symmetric(&flat, 0.0, grid).unwrap();
        assert_eq!(sys.energy(&w), 0.0);
    }

    #[test]
    fn mesh_rule() {
        let (l, r) = neumann();
        let s = spec(PiecewiseProfile::linear(1.0), Potential::constant(0.0), l, r);
        assert_eq!(mesh_for_alpha(&s, 0.0).n(), 2049);
        assert_eq!(mesh_for_alpha(&s, 100.0).n(), 3201);
        assert_eq!(mesh_for_alpha(&s, 1e9).n(), MAX_MESH);
    }

    #[test]
    fn coarse_direct_mesh_is_rejected() {
        let (l, r) = neumann();
        let s = spec(PiecewiseProfile::linear(1.0), Potential::constant(0.0), l, r);
        let err = principal_eigen_direct(&s, 100.0, Grid1D::new(33).unwrap()).unwrap_err();
        assert!(matches!(err, Error::MeshTooCoarse(_)));
    }
}
