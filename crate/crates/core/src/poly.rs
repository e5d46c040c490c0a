//! Dense real polynomials with Sturm-chain root counting.
//!
//! Coefficients are stored lowest degree first, `c[0] + c[1] t + c[2] t^2 + ...`.
//! Piecewise profiles evaluate each piece in its local coordinate
//! `t = x - x_k`, so the intervals handed to the root counter are `[0, len]`.

use serde::{Deserialize, Serialize};

/// Relative size below which a coefficient is treated as zero when
/// trimming remainders inside a Sturm chain.
const CHAIN_ZERO_REL: f64 = 1e-11;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(transparent)]
pub struct Poly {
    coeffs: Vec<f64>,
}

impl Poly {
    pub fn new(coeffs: Vec<f64>) -> Self {
        let mut p = Poly { coeffs };
        p.trim_exact();
        p
    }

    pub fn constant(c: f64) -> Self {
        Poly::new(vec![c])
    }

    pub fn coeffs(&self) -> &[f64] {
        &self.coeffs
    }

    /// Degree of the polynomial; the zero polynomial reports degree 0.
    pub fn degree(&self) -> usize {
        self.coeffs.len().saturating_sub(1)
    }

    pub fn is_zero(&self) -> bool {
        self.coeffs.iter().all(|&c| c == 0.0)
    }

    pub fn max_abs_coeff(&self) -> f64 {
        self.coeffs.iter().fold(0.0_f64, |m, c| m.max(c.abs()))
    }

    pub fn eval(&self, t: f64) -> f64 {
        self.coeffs.iter().rev().fold(0.0, |acc, &c| acc * t + c)
    }

    pub fn derivative(&self) -> Poly {
        if self.coeffs.len() <= 1 {
            return Poly::constant(0.0);
        }
        Poly::new(
            self.coeffs
                .iter()
                .enumerate()
                .skip(1)
                .map(|(k, &c)| k as f64 * c)
                .collect(),
        )
    }

    /// The k-th derivative evaluated at `t`.
    pub fn eval_derivative(&self, t: f64, order: usize) -> f64 {
        let mut acc = 0.0;
        for (k, &c) in self.coeffs.iter().enumerate().skip(order).rev() {
            let falling: f64 = ((k - order + 1)..=k).map(|j| j as f64).product();
            acc = acc * t + c * falling;
        }
        acc
    }

    /// Antiderivative with the given value at `t = 0`.
    pub fn integral(&self, at_zero: f64) -> Poly {
        let mut c = Vec::with_capacity(self.coeffs.len() + 1);
        c.push(at_zero);
        c.extend(
            self.coeffs
                .iter()
                .enumerate()
                .map(|(k, &a)| a / (k as f64 + 1.0)),
        );
        Poly::new(c)
    }

    /// Re-expand around a new origin: returns `q` with `q(s) = p(s + shift)`.
    pub fn shifted(&self, shift: f64) -> Poly {
        // repeated synthetic division (Taylor shift)
        let mut c = self.coeffs.clone();
        let n = c.len();
        for i in 0..n {
            for j in (i..n - 1).rev() {
                c[j] += shift * c[j + 1];
            }
        }
        Poly::new(c)
    }

    pub fn scaled(&self, factor: f64) -> Poly {
        Poly::new(self.coeffs.iter().map(|c| c * factor).collect())
    }

    pub fn add(&self, other: &Poly) -> Poly {
        let n = self.coeffs.len().max(other.coeffs.len());
        Poly::new(
            (0..n)
                .map(|k| {
                    self.coeffs.get(k).copied().unwrap_or(0.0)
                        + other.coeffs.get(k).copied().unwrap_or(0.0)
                })
                .collect(),
        )
    }

    fn trim_exact(&mut self) {
        while self.coeffs.len() > 1 && *self.coeffs.last().unwrap() == 0.0 {
            self.coeffs.pop();
        }
        if self.coeffs.is_empty() {
            self.coeffs.push(0.0);
        }
    }

    fn trim_relative(&mut self, scale: f64) {
        let tol = CHAIN_ZERO_REL * scale;
        while self.coeffs.len() > 1 && self.coeffs.last().unwrap().abs() <= tol {
            self.coeffs.pop();
        }
        if self.coeffs.len() == 1 && self.coeffs[0].abs() <= tol {
            self.coeffs[0] = 0.0;
        }
    }

    /// Remainder of polynomial division `self mod divisor`.
    fn rem(&self, divisor: &Poly) -> Poly {
        let mut r = self.coeffs.clone();
        let d = &divisor.coeffs;
        let dn = d.len() - 1;
        let lead = d[dn];
        while r.len() > dn && !r.is_empty() {
            let k = r.len() - 1;
            let q = r[k] / lead;
            for (j, &dj) in d.iter().enumerate() {
                r[k - dn + j] -= q * dj;
            }
            r.pop();
            if r.is_empty() {
                break;
            }
        }
        if r.is_empty() {
            r.push(0.0);
        }
        Poly { coeffs: r }
    }
}

/// Sturm sequence of a polynomial, used to count distinct real roots.
#[derive(Debug, Clone)]
pub struct SturmChain {
    chain: Vec<Poly>,
}

impl SturmChain {
    pub fn new(p: &Poly) -> Self {
        let scale = p.max_abs_coeff().max(f64::MIN_POSITIVE);
        let mut chain = vec![p.clone()];
        let mut d = p.derivative();
        d.trim_relative(scale);
        if d.is_zero() {
            return SturmChain { chain };
        }
        chain.push(d);
        loop {
            let n = chain.len();
            let mut r = chain[n - 2].rem(&chain[n - 1]).scaled(-1.0);
            let s = chain[n - 2].max_abs_coeff().max(chain[n - 1].max_abs_coeff());
            r.trim_relative(s);
            if r.is_zero() {
                break;
            }
            // keep magnitudes tame; only signs matter
            let m = r.max_abs_coeff();
            chain.push(r.scaled(1.0 / m));
        }
        SturmChain { chain }
    }

    fn sign_changes(&self, t: f64) -> usize {
        let mut changes = 0;
        let mut last = 0.0_f64;
        for p in &self.chain {
            let v = p.eval(t);
            if v == 0.0 {
                continue;
            }
            if last != 0.0 && (v > 0.0) != (last > 0.0) {
                changes += 1;
            }
            last = v;
        }
        changes
    }

    /// Number of distinct real roots in the half-open interval `(a, b]`.
    pub fn count(&self, a: f64, b: f64) -> usize {
        self.sign_changes(a).saturating_sub(self.sign_changes(b))
    }
}

/// Distinct roots of `p` strictly inside `(a, b)`, each located to within
/// `tol`. Roots closer than `edge` to either end are ignored.
pub fn isolate_roots(p: &Poly, a: f64, b: f64, edge: f64, tol: f64) -> Vec<f64> {
    if p.is_zero() || p.degree() == 0 {
        return Vec::new();
    }
    let chain = SturmChain::new(p);
    let lo = a + edge;
    let hi = b - edge;
    if hi <= lo {
        return Vec::new();
    }
    let mut out = Vec::new();
    let mut stack = vec![(lo, hi, chain.count(lo, hi))];
    while let Some((l, r, k)) = stack.pop() {
        if k == 0 {
            continue;
        }
        if r - l <= tol {
            out.push(0.5 * (l + r));
            continue;
        }
        let mid = 0.5 * (l + r);
        let kl = chain.count(l, mid);
        stack.push((mid, r, k.saturating_sub(kl)));
        stack.push((l, mid, kl));
    }
    out.sort_by(|x, y| x.partial_cmp(y).unwrap());
    out
}
