//! Principal eigenvalue of `-Δφ - 2α ∇m·∇φ + Vφ = λφ` on a periodic cell or
//! on a rectangle with `∂φ/∂n + βφ = 0`, `β ≥ 0` constant per side.
//!
//! Same fitted edge form as the 1D symmetric path: every grid edge `p → q`
//! contributes `c (e^{-t/2} w_q - e^{t/2} w_p)²` with `t = α (m_q - m_p)`,
//! which is `c e^{α(m_p + m_q)} (φ_q - φ_p)²` in the original variable.

use std::f64::consts::PI;
use std::io::{Read, Write};
use std::path::{Path, PathBuf};
use std::time::Instant;

use rayon::prelude::*;
use serde::Serialize;

use crate::error::{Error, Result};
use crate::sweep::{classify_trend, TrendVerdict};

pub const MIN_GRID_2D: usize = 16;
pub const TABLE_MAGIC: [u8; 8] = *b"ADVLIM2D";
pub const TORUS_TOLERANCE: f64 = 0.15;
pub const RECTANGLE_TOLERANCE: f64 = 0.2;
pub const DEFAULT_SCHEDULE_2D: [f64; 6] = [0.0, 5.0, 10.0, 20.0, 30.0, 40.0];

const INNER_TOL: f64 = 1e-10;
const OUTER_TOL: f64 = 1e-9;
const MAX_OUTER: usize = 2000;
const GAUGE_LIMIT: f64 = 600.0;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, serde::Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Trig {
    Cos,
    Sin,
}

impl Trig {
    fn eval(self, s: f64) -> f64 {
        match self {
            Trig::Cos => s.cos(),
            Trig::Sin => s.sin(),
        }
    }

    fn deriv(self, s: f64) -> f64 {
        match self {
            Trig::Cos => -s.sin(),
            Trig::Sin => s.cos(),
        }
    }
}

/// `c · x(2π fx · x / Lx) · y(2π fy · y / Ly)`
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TrigTerm {
    pub c: f64,
    pub x: Trig,
    pub fx: f64,
    pub y: Trig,
    pub fy: f64,
}

impl TrigTerm {
    pub fn constant(c: f64) -> Self {
        TrigTerm { c, x: Trig::Cos, fx: 0.0, y: Trig::Cos, fy: 0.0 }
    }

    pub fn new(c: f64, x: Trig, fx: f64, y: Trig, fy: f64) -> Self {
        TrigTerm { c, x, fx, y, fy }
    }
}

/// Grid values in row-major order (`x` fastest).
#[derive(Debug, Clone, PartialEq)]
pub struct Table2D {
    pub nx: usize,
    pub ny: usize,
    pub values: Vec<f64>,
    pub source: Option<PathBuf>,
}

impl Table2D {
    pub fn new(nx: usize, ny: usize, values: Vec<f64>) -> Result<Self> {
        if values.len() != nx * ny {
            return Err(Error::Malformed(format!("table holds {} values, header says {nx}x{ny}", values.len())));
        }
        if values.iter().any(|v| !v.is_finite()) {
            return Err(Error::Malformed("table contains non-finite values".into()));
        }
        Ok(Table2D { nx, ny, values, source: None })
    }

    pub fn read(path: impl AsRef<Path>) -> Result<Self> {
        let mut bytes = Vec::new();
        std::fs::File::open(path.as_ref())?.read_to_end(&mut bytes)?;
        let mut t = Self::from_bytes(&bytes)?;
        t.source = Some(path.as_ref().to_path_buf());
        Ok(t)
    }

    pub fn from_bytes(bytes: &[u8]) -> Result<Self> {
        if bytes.len() < 16 || bytes[..8] != TABLE_MAGIC {
            return Err(Error::Malformed("table file lacks the ADVLIM2D header".into()));
        }
        let nx = u32::from_le_bytes(bytes[8..12].try_into().unwrap()) as usize;
        let ny = u32::from_le_bytes(bytes[12..16].try_into().unwrap()) as usize;
        let body = &bytes[16..];
        if body.len() != 8 * nx * ny {
            return Err(Error::Malformed(format!("table body has {} bytes, expected {}", body.len(), 8 * nx * ny)));
        }
        let values = body.chunks_exact(8).map(|c| f64::from_le_bytes(c.try_into().unwrap())).collect();
        Self::new(nx, ny, values)
    }

    pub fn to_bytes(&self) -> Vec<u8> {
        let mut out = Vec::with_capacity(16 + 8 * self.values.len());
        out.extend_from_slice(&TABLE_MAGIC);
        out.extend_from_slice(&(self.nx as u32).to_le_bytes());
        out.extend_from_slice(&(self.ny as u32).to_le_bytes());
        for v in &self.values {
            out.extend_from_slice(&v.to_le_bytes());
        }
        out
    }

    pub fn write(&self, path: impl AsRef<Path>) -> Result<()> {
        std::fs::File::create(path)?.write_all(&self.to_bytes())?;
        Ok(())
    }
}

#[derive(Debug, Clone, PartialEq)]
pub enum Field2D {
    Trig(Vec<TrigTerm>),
    Table(Table2D),
}

impl Field2D {
    pub fn constant(c: f64) -> Self {
        Field2D::Trig(vec![TrigTerm::constant(c)])
    }

    /// Analytic value; `None` for tabulated fields.
    pub fn eval(&self, domain: &Domain, x: f64, y: f64) -> Option<f64> {
        let (lx, ly) = domain.lengths();
        match self {
            Field2D::Trig(terms) => Some(
                terms
                    .iter()
                    .map(|t| t.c * t.x.eval(2.0 * PI * t.fx * x / lx) * t.y.eval(2.0 * PI * t.fy * y / ly))
                    .sum(),
            ),
            Field2D::Table(_) => None,
        }
    }

    /// Analytic `(∇f, Δf)`; `None` for tabulated fields.
    pub fn derivatives(&self, domain: &Domain, x: f64, y: f64) -> Option<((f64, f64), f64)> {
        let (lx, ly) = domain.lengths();
        let Field2D::Trig(terms) = self else { return None };
        let (mut gx, mut gy, mut lap) = (0.0, 0.0, 0.0);
        for t in terms {
            let (kx, ky) = (2.0 * PI * t.fx / lx, 2.0 * PI * t.fy / ly);
            let (sx, sy) = (kx * x, ky * y);
            let (ex, ey) = (t.x.eval(sx), t.y.eval(sy));
            gx += t.c * kx * t.x.deriv(sx) * ey;
            gy += t.c * ex * ky * t.y.deriv(sy);
            // sin and cos are both eigenfunctions of d²/ds² with eigenvalue -1
            lap -= t.c * (kx * kx + ky * ky) * ex * ey;
        }
        Some(((gx, gy), lap))
    }

    /// Nodal values on the `nx × ny` grid of `domain`.
    pub fn sample(&self, domain: &Domain, nx: usize, ny: usize) -> Result<Vec<f64>> {
        match self {
            Field2D::Trig(_) => {
                let mut out = Vec::with_capacity(nx * ny);
                for j in 0..ny {
                    for i in 0..nx {
                        let (x, y) = domain.node(nx, ny, i, j);
                        out.push(self.eval(domain, x, y).unwrap());
                    }
                }
                Ok(out)
            }
            Field2D::Table(t) => {
                if (t.nx, t.ny) != (nx, ny) {
                    return Err(Error::Malformed(format!(
                        "tabulated field is {}x{}, grid is {nx}x{ny}",
                        t.nx, t.ny
                    )));
                }
                Ok(t.values.clone())
            }
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct Beta {
    pub left: f64,
    pub right: f64,
    pub bottom: f64,
    pub top: f64,
}

impl Beta {
    pub fn uniform(b: f64) -> Self {
        Beta { left: b, right: b, bottom: b, top: b }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
#[serde(tag = "domain", rename_all = "lowercase")]
pub enum Domain {
    Torus { lx: f64, ly: f64 },
    Rectangle { lx: f64, ly: f64, beta: Beta },
}

impl Domain {
    pub fn lengths(&self) -> (f64, f64) {
        match *self {
            Domain::Torus { lx, ly } | Domain::Rectangle { lx, ly, .. } => (lx, ly),
        }
    }

    pub fn is_torus(&self) -> bool {
        matches!(self, Domain::Torus { .. })
    }

    /// Torus grids omit the duplicate periodic node; rectangle grids include
    /// both edges.
    pub fn spacing(&self, nx: usize, ny: usize) -> (f64, f64) {
        let (lx, ly) = self.lengths();
        match self {
            Domain::Torus { .. } => (lx / nx as f64, ly / ny as f64),
            Domain::Rectangle { .. } => (lx / (nx - 1) as f64, ly / (ny - 1) as f64),
        }
    }

    pub fn node(&self, nx: usize, ny: usize, i: usize, j: usize) -> (f64, f64) {
        let (hx, hy) = self.spacing(nx, ny);
        (i as f64 * hx, j as f64 * hy)
    }

    pub fn nearest_node(&self, nx: usize, ny: usize, x: f64, y: f64) -> (usize, usize) {
        let (hx, hy) = self.spacing(nx, ny);
        let (i, j) = ((x / hx).round() as i64, (y / hy).round() as i64);
        match self {
            Domain::Torus { .. } => (i.rem_euclid(nx as i64) as usize, j.rem_euclid(ny as i64) as usize),
            Domain::Rectangle { .. } => (i.clamp(0, nx as i64 - 1) as usize, j.clamp(0, ny as i64 - 1) as usize),
        }
    }

    /// `β` at a boundary point, `None` in the interior or on a torus.
    pub fn beta_at(&self, x: f64, y: f64) -> Option<f64> {
        let Domain::Rectangle { lx, ly, beta } = *self else { return None };
        let tol = 1e-12 * (1.0 + lx.max(ly));
        let mut sides = Vec::new();
        if x.abs() <= tol {
            sides.push(beta.left);
        }
        if (x - lx).abs() <= tol {
            sides.push(beta.right);
        }
        if y.abs() <= tol {
            sides.push(beta.bottom);
        }
        if (y - ly).abs() <= tol {
            sides.push(beta.top);
        }
        sides.into_iter().reduce(f64::max)
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Spec2D {
    pub domain: Domain,
    pub m: Field2D,
    pub v: Field2D,
    /// Declared maximum points of `m`.
    pub maxima: Vec<(f64, f64)>,
}

impl Spec2D {
    pub fn validate(&self) -> Result<()> {
        let (lx, ly) = self.domain.lengths();
        if !(lx > 0.0 && ly > 0.0 && lx.is_finite() && ly.is_finite()) {
            return Err(Error::Malformed(format!("domain lengths must be positive, got {lx} x {ly}")));
        }
        if let Domain::Rectangle { beta, .. } = self.domain {
            for (name, b) in [("left", beta.left), ("right", beta.right), ("bottom", beta.bottom), ("top", beta.top)] {
                if !(b >= 0.0 && b.is_finite()) {
                    return Err(Error::Malformed(format!("beta.{name} = {b}; only β ≥ 0 is supported in 2D")));
                }
            }
        }
        for &(x, y) in &self.maxima {
            if !(0.0..=lx).contains(&x) || !(0.0..=ly).contains(&y) {
                return Err(Error::Malformed(format!("declared maximum ({x}, {y}) lies outside the domain")));
            }
        }
        Ok(())
    }

    /// Effective potential `α²|∇m|² + αΔm + V` for analytic fields.
    pub fn effective_potential(&self, alpha: f64, x: f64, y: f64) -> Option<f64> {
        let ((gx, gy), lap) = self.m.derivatives(&self.domain, x, y)?;
        let v = self.v.eval(&self.domain, x, y)?;
        Some(alpha * alpha * (gx * gx + gy * gy) + alpha * lap + v)
    }

    /// Value of `V` at a declared point: analytic, or at the nearest node.
    pub fn v_at(&self, x: f64, y: f64) -> f64 {
        match &self.v {
            Field2D::Trig(_) => self.v.eval(&self.domain, x, y).unwrap(),
            Field2D::Table(t) => {
                let (i, j) = self.domain.nearest_node(t.nx, t.ny, x, y);
                t.values[j * t.nx + i]
            }
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Edge {
    pub p: usize,
    pub q: usize,
    /// Stencil weight: cross-section over spacing.
    pub c: f64,
    /// `α (m_q - m_p)`
    pub t: f64,
}

/// Symmetric `A` and lumped mass `M` of the gauge-transformed problem.
#[derive(Debug, Clone)]
pub struct SparseSymOperator {
    pub nx: usize,
    pub ny: usize,
    pub edges: Vec<Edge>,
    pub diag: Vec<f64>,
    pub mass: Vec<f64>,
    pub v: Vec<f64>,
    /// `β · (boundary length share)` per node.
    pub boundary: Vec<f64>,
}

impl SparseSymOperator {
    pub fn n(&self) -> usize {
        self.nx * self.ny
    }

    pub fn apply(&self, x: &[f64], y: &mut [f64]) {
        for ((yi, d), xi) in y.iter_mut().zip(&self.diag).zip(x) {
            *yi = d * xi;
        }
        for e in &self.edges {
            y[e.p] -= e.c * x[e.q];
            y[e.q] -= e.c * x[e.p];
        }
    }

    /// Quadratic form evaluated edge by edge, independently of `apply`.
    pub fn quadratic_form(&self, w: &[f64]) -> f64 {
        let kinetic: f64 = self
            .edges
            .iter()
            .map(|e| {
                let d = (-0.5 * e.t).exp() * w[e.q] - (0.5 * e.t).exp() * w[e.p];
                e.c * d * d
            })
            .sum();
        let rest: f64 = (0..self.n()).map(|i| (self.mass[i] * self.v[i] + self.boundary[i]) * w[i] * w[i]).sum();
        kinetic + rest
    }

    pub fn mass_norm_sq(&self, w: &[f64]) -> f64 {
        w.iter().zip(&self.mass).map(|(x, m)| m * x * x).sum()
    }

    /// Largest `|a_pq - a_qp|` over stored couplings.
    pub fn asymmetry(&self) -> f64 {
        let mut rows: Vec<Vec<(usize, f64)>> = vec![Vec::new(); self.n()];
        for e in &self.edges {
            rows[e.p].push((e.q, -e.c));
            rows[e.q].push((e.p, -e.c));
        }
        let mut worst: f64 = 0.0;
        for (p, row) in rows.iter().enumerate() {
            for &(q, _) in row {
                let back: f64 = rows[q].iter().filter(|(r, _)| *r == p).map(|(_, b)| b).sum();
                let fwd: f64 = row.iter().filter(|(r, _)| *r == q).map(|(_, b)| b).sum();
                worst = worst.max((fwd - back).abs());
            }
        }
        worst
    }
}

fn check_maxima(spec: &Spec2D, m: &[f64], nx: usize, ny: usize) -> Result<()> {
    let torus = spec.domain.is_torus();
    for &(x, y) in &spec.maxima {
        let (i, j) = spec.domain.nearest_node(nx, ny, x, y);
        let here = m[j * nx + i];
        for dj in -1i64..=1 {
            for di in -1i64..=1 {
                if di == 0 && dj == 0 {
                    continue;
                }
                let (mut a, mut b) = (i as i64 + di, j as i64 + dj);
                if torus {
                    a = a.rem_euclid(nx as i64);
                    b = b.rem_euclid(ny as i64);
                } else if a < 0 || b < 0 || a >= nx as i64 || b >= ny as i64 {
                    continue;
                }
                let there = m[b as usize * nx + a as usize];
                if there > here + 1e-12 * (1.0 + here.abs()) {
                    return Err(Error::NotALocalMaximum { x, y });
                }
            }
        }
    }
    Ok(())
}

pub fn assemble_2d(spec: &Spec2D, alpha: f64, nx: usize, ny: usize) -> Result<SparseSymOperator> {
    if nx < MIN_GRID_2D || ny < MIN_GRID_2D {
        return Err(Error::GridTooSmall { min: MIN_GRID_2D, got: nx.min(ny) });
    }
    spec.validate()?;
    let m = spec.m.sample(&spec.domain, nx, ny)?;
    let v = spec.v.sample(&spec.domain, nx, ny)?;
    check_maxima(spec, &m, nx, ny)?;
    let (hx, hy) = spec.domain.spacing(nx, ny);
    let torus = spec.domain.is_torus();
    let n = nx * ny;
    let idx = |i: usize, j: usize| j * nx + i;
    // half cells on rectangle edges
    let share = |k: usize, len: usize| if !torus && (k == 0 || k == len - 1) { 0.5 } else { 1.0 };

    let mut mass = vec![0.0; n];
    for j in 0..ny {
        for i in 0..nx {
            mass[idx(i, j)] = hx * hy * share(i, nx) * share(j, ny);
        }
    }

    let mut edges = Vec::with_capacity(2 * n);
    let mut push = |p: usize, q: usize, c: f64| -> Result<()> {
        let t = alpha * (m[q] - m[p]);
        if t.abs() > GAUGE_LIMIT {
            return Err(Error::MeshTooCoarse(format!(
                "gauge exponent {t:.1} on one edge; refine the grid for α = {alpha}"
            )));
        }
        edges.push(Edge { p, q, c, t });
        Ok(())
    };
    for j in 0..ny {
        for i in 0..nx {
            let p = idx(i, j);
            if i + 1 < nx || torus {
                push(p, idx((i + 1) % nx, j), hy * share(j, ny) / hx)?;
            }
            if j + 1 < ny || torus {
                push(p, idx(i, (j + 1) % ny), hx * share(i, nx) / hy)?;
            }
        }
    }

    let mut boundary = vec![0.0; n];
    if let Domain::Rectangle { beta, .. } = spec.domain {
        for j in 0..ny {
            boundary[idx(0, j)] += beta.left * hy * share(j, ny);
            boundary[idx(nx - 1, j)] += beta.right * hy * share(j, ny);
        }
        for i in 0..nx {
            boundary[idx(i, 0)] += beta.bottom * hx * share(i, nx);
            boundary[idx(i, ny - 1)] += beta.top * hx * share(i, nx);
        }
    }

    let mut diag: Vec<f64> = (0..n).map(|i| mass[i] * v[i] + boundary[i]).collect();
    for e in &edges {
        diag[e.p] += e.c * e.t.exp();
        diag[e.q] += e.c * (-e.t).exp();
    }
    Ok(SparseSymOperator { nx, ny, edges, diag, mass, v, boundary })
}

#[derive(Debug, Clone, Serialize)]
pub struct Eigen2D {
    pub lambda: f64,
    /// Gauge variable `w`, normalized so that `wᵀ M w = 1`.
    #[serde(skip)]
    pub w: Vec<f64>,
    pub shift: f64,
    pub iterations: usize,
    pub inner_iterations: usize,
    /// `‖A w - λ M w‖∞`
    pub residual: f64,
}

fn dot(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

/// Jacobi-preconditioned conjugate gradients for `(A - σM) x = b`, warm
/// started from `x`. Returns the iteration count.
fn pcg(op: &SparseSymOperator, sigma: f64, b: &[f64], x: &mut [f64]) -> Result<usize> {
    let n = op.n();
    let precond: Vec<f64> = (0..n).map(|i| 1.0 / (op.diag[i] - sigma * op.mass[i])).collect();
    let shifted = |x: &[f64], y: &mut [f64]| {
        op.apply(x, y);
        for i in 0..n {
            y[i] -= sigma * op.mass[i] * x[i];
        }
    };
    let bnorm = dot(b, b).sqrt();
    if bnorm == 0.0 {
        x.iter_mut().for_each(|v| *v = 0.0);
        return Ok(0);
    }
    let mut r = vec![0.0; n];
    shifted(x, &mut r);
    for i in 0..n {
        r[i] = b[i] - r[i];
    }
    let mut z: Vec<f64> = r.iter().zip(&precond).map(|(a, p)| a * p).collect();
    let mut p = z.clone();
    let mut rz = dot(&r, &z);
    let mut ap = vec![0.0; n];
    let max_iter = 20 * n.max(100);
    let mut history = Vec::new();
    let mut best = f64::INFINITY;
    let mut since_best = 0;
    for k in 0..max_iter {
        let rel = dot(&r, &r).sqrt() / bnorm;
        if k % 50 == 0 {
            history.push(rel);
        }
        if rel <= INNER_TOL {
            return Ok(k);
        }
        if rel < 0.5 * best {
            best = rel;
            since_best = 0;
        } else {
            since_best += 1;
            if since_best > 5000 {
                history.push(rel);
                return Err(Error::Stagnation { history });
            }
        }
        shifted(&p, &mut ap);
        let pap = dot(&p, &ap);
        if !(pap > 0.0) {
            history.push(rel);
            return Err(Error::Stagnation { history });
        }
        let a = rz / pap;
        for i in 0..n {
            x[i] += a * p[i];
            r[i] -= a * ap[i];
            z[i] = r[i] * precond[i];
        }
        let rz_new = dot(&r, &z);
        let beta = rz_new / rz;
        rz = rz_new;
        for i in 0..n {
            p[i] = z[i] + beta * p[i];
        }
    }
    Err(Error::Stagnation { history })
}

/// Inverse iteration with the fixed shift `min V - 1`, a lower bound for the
/// spectrum because the kinetic and boundary parts of the form are ≥ 0.
pub fn smallest_eig_2d(op: &SparseSymOperator) -> Result<Eigen2D> {
    let n = op.n();
    let sigma = op.v.iter().copied().fold(f64::INFINITY, f64::min) - 1.0;
    let mut w = vec![1.0; n];
    let s = op.mass_norm_sq(&w).sqrt();
    w.iter_mut().for_each(|x| *x /= s);
    let mut aw = vec![0.0; n];
    op.apply(&w, &mut aw);
    let mut lambda = dot(&w, &aw);
    let mut next = vec![0.0; n];
    let mut inner = 0;
    for it in 1..=MAX_OUTER {
        let rhs: Vec<f64> = w.iter().zip(&op.mass).map(|(x, m)| x * m).collect();
        // the exact update is w / (λ - σ) once converged
        let scale = 1.0 / (lambda - sigma).max(1e-12);
        for i in 0..n {
            next[i] = w[i] * scale;
        }
        inner += pcg(op, sigma, &rhs, &mut next)?;
        let s = op.mass_norm_sq(&next).sqrt();
        for i in 0..n {
            w[i] = next[i] / s;
        }
        op.apply(&w, &mut aw);
        let updated = dot(&w, &aw);
        let change = (updated - lambda).abs();
        lambda = updated;
        if change < OUTER_TOL {
            if w.iter().sum::<f64>() < 0.0 {
                w.iter_mut().for_each(|x| *x = -*x);
            }
            let residual = (0..n).map(|i| (aw[i] - lambda * op.mass[i] * w[i]).abs()).fold(0.0, f64::max);
            return Ok(Eigen2D { lambda, w, shift: sigma, iterations: it, inner_iterations: inner, residual });
        }
    }
    Err(Error::NoConvergence { trace: Vec::new() })
}

pub fn solve_2d(spec: &Spec2D, alpha: f64, nx: usize, ny: usize) -> Result<Eigen2D> {
    smallest_eig_2d(&assemble_2d(spec, alpha, nx, ny)?)
}

#[derive(Debug, Clone, PartialEq, Serialize)]
#[serde(tag = "verdict")]
pub enum Prediction2D {
    Finite { value: f64, points: Vec<(f64, f64)> },
    PlusInfinity { reason: String },
}

/// `min V` over the declared maxima that count: all of them on a torus;
/// interior ones and those on `β = 0` sides for a rectangle.
pub fn predict_2d(spec: &Spec2D) -> Result<Prediction2D> {
    if spec.maxima.is_empty() {
        return Err(Error::Malformed("no declared maxima".into()));
    }
    let counted: Vec<(f64, f64)> = spec
        .maxima
        .iter()
        .copied()
        .filter(|&(x, y)| spec.domain.beta_at(x, y).is_none_or(|b| b == 0.0))
        .collect();
    if counted.is_empty() {
        return Ok(Prediction2D::PlusInfinity { reason: "every declared maximum sits on a side with β > 0".into() });
    }
    let value = counted.iter().map(|&(x, y)| spec.v_at(x, y)).fold(f64::INFINITY, f64::min);
    let points = counted.into_iter().filter(|&(x, y)| spec.v_at(x, y) == value).collect();
    Ok(Prediction2D::Finite { value, points })
}

#[derive(Debug, Clone, Serialize)]
pub struct SweepPoint2D {
    pub alpha: f64,
    pub lambda: f64,
    pub iterations: usize,
    pub residual: f64,
    pub ms: f64,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub error: Option<String>,
}

#[derive(Debug, Clone, Serialize)]
pub struct Verification2D {
    pub prediction: Prediction2D,
    pub nx: usize,
    pub ny: usize,
    pub points: Vec<SweepPoint2D>,
    pub trend: TrendVerdict,
    pub agree: bool,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub discrepancy: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub mid_discrepancy: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub tolerance: Option<f64>,
}

pub fn verify_2d(spec: &Spec2D, alphas: &[f64], nx: usize, ny: usize) -> Result<Verification2D> {
    if alphas.is_empty() || alphas.windows(2).any(|w| w[1] <= w[0]) || alphas.iter().any(|a| !(*a >= 0.0)) {
        return Err(Error::Malformed("α schedule must be non-empty, nonnegative and strictly increasing".into()));
    }
    let prediction = predict_2d(spec)?;
    // surface structural errors once rather than per α
    assemble_2d(spec, 0.0, nx, ny)?;
    let points: Vec<SweepPoint2D> = alphas
        .par_iter()
        .map(|&alpha| {
            let start = Instant::now();
            match solve_2d(spec, alpha, nx, ny) {
                Ok(e) => SweepPoint2D {
                    alpha,
                    lambda: e.lambda,
                    iterations: e.iterations,
                    residual: e.residual,
                    ms: start.elapsed().as_secs_f64() * 1e3,
                    error: None,
                },
                Err(err) => SweepPoint2D {
                    alpha,
                    lambda: f64::NAN,
                    iterations: 0,
                    residual: f64::NAN,
                    ms: start.elapsed().as_secs_f64() * 1e3,
                    error: Some(err.to_string()),
                },
            }
        })
        .collect();
    let ok: Vec<&SweepPoint2D> = points.iter().filter(|p| p.error.is_none()).collect();
    let trend = classify_trend(
        &ok.iter().map(|p| p.alpha).collect::<Vec<_>>(),
        &ok.iter().map(|p| p.lambda).collect::<Vec<_>>(),
    );
    let all_ok = ok.len() == points.len();
    let mut report = Verification2D {
        prediction: prediction.clone(),
        nx,
        ny,
        points,
        trend,
        agree: false,
        discrepancy: None,
        mid_discrepancy: None,
        tolerance: None,
    };
    match prediction {
        Prediction2D::Finite { value, .. } => {
            let k = report.points.len();
            let tol = if spec.domain.is_torus() { TORUS_TOLERANCE } else { RECTANGLE_TOLERANCE };
            let disc = (report.points[k - 1].lambda - value).abs();
            let mid = (report.points[k / 2].lambda - value).abs();
            report.agree = all_ok && disc <= tol && disc <= mid + 1e-9;
            report.discrepancy = Some(disc);
            report.mid_discrepancy = Some(mid);
            report.tolerance = Some(tol);
        }
        Prediction2D::PlusInfinity { .. } => {
            report.agree = all_ok && trend == TrendVerdict::DivergingUp;
        }
    }
    Ok(report)
}

/// The periodic reference case: `m = cos 2πx cos 2πy`,
/// `V = 3 + cos 2πx + sin 2πy`, maxima at (0, 0) and (1/2, 1/2).
pub fn torus_example() -> Spec2D {
    Spec2D {
        domain: Domain::Torus { lx: 1.0, ly: 1.0 },
        m: Field2D::Trig(vec![TrigTerm::new(1.0, Trig::Cos, 1.0, Trig::Cos, 1.0)]),
        v: Field2D::Trig(vec![
            TrigTerm::constant(3.0),
            TrigTerm::new(1.0, Trig::Cos, 1.0, Trig::Cos, 0.0),
            TrigTerm::new(1.0, Trig::Cos, 0.0, Trig::Sin, 1.0),
        ]),
        maxima: vec![(0.0, 0.0), (0.5, 0.5)],
    }
}

/// Unit square, Neumann sides, `m = -cos 2πx - cos 2πy` with its single
/// maximum at the centre, `V = 3 + sin 2πx + cos 2πy / 2`.
pub fn rectangle_example() -> Spec2D {
    Spec2D {
        domain: Domain::Rectangle { lx: 1.0, ly: 1.0, beta: Beta::uniform(0.0) },
        m: Field2D::Trig(vec![
            TrigTerm::new(-1.0, Trig::Cos, 1.0, Trig::Cos, 0.0),
            TrigTerm::new(-1.0, Trig::Cos, 0.0, Trig::Cos, 1.0),
        ]),
        v: Field2D::Trig(vec![
            TrigTerm::constant(3.0),
            TrigTerm::new(1.0, Trig::Sin, 1.0, Trig::Cos, 0.0),
            TrigTerm::new(0.5, Trig::Cos, 0.0, Trig::Cos, 1.0),
        ]),
        maxima: vec![(0.5, 0.5)],
    }
}
