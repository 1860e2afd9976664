//! Gauss–Legendre quadrature with declared-breakpoint handling.
//!
//! Every double integral in the production functionals goes through
//! [`integrate_spacetime`]: composite adaptive Gauss–Legendre in `t`, and
//! for each `t`-node an `x`-integral split at the breakpoints supplied by
//! the caller, so panels never straddle a declared discontinuity or kink.

use std::collections::HashMap;
use std::sync::{Arc, Mutex};

use once_cell::sync::Lazy;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::scalar::Scalar;

/// Quadrature parameters shared by all operations.
#[derive(Debug, Clone, Copy, Serialize, Deserialize, PartialEq)]
pub struct QuadratureSpec {
    /// Gauss–Legendre order per axis.
    pub gauss_order: usize,
    /// Maximum bisection depth of the adaptive driver.
    pub max_subdivision_depth: usize,
    /// Gauss order for integrals over the entropy parameter `k`.
    pub k_axis_order: usize,
    /// Absolute tolerance targeted by the adaptive driver.
    pub target_tolerance: f64,
}

impl Default for QuadratureSpec {
    fn default() -> Self {
        Self {
            gauss_order: 16,
            max_subdivision_depth: 14,
            k_axis_order: 24,
            target_tolerance: 1e-11,
        }
    }
}

impl QuadratureSpec {
    pub fn validate(&self) -> Result<()> {
        if self.gauss_order < 2 || self.k_axis_order < 2 {
            return Err(Error::InvalidArgument("quadrature orders must be >= 2".into()));
        }
        if !(self.target_tolerance > 0.0) {
            return Err(Error::InvalidArgument("quadrature tolerance must be positive".into()));
        }
        Ok(())
    }
}

/// Nodes and weights of the order-`n` Gauss–Legendre rule on [-1, 1].
#[derive(Debug, Clone)]
pub struct GaussRule {
    pub nodes: Vec<f64>,
    pub weights: Vec<f64>,
}

static RULE_CACHE: Lazy<Mutex<HashMap<usize, Arc<GaussRule>>>> =
    Lazy::new(|| Mutex::new(HashMap::new()));

/// Legendre P_n(x) and its derivative, by upward recurrence.
fn legendre(n: usize, x: f64) -> (f64, f64) {
    let mut p0 = 1.0;
    let mut p1 = x;
    for j in 2..=n {
        let p2 = ((2 * j - 1) as f64 * x * p1 - (j - 1) as f64 * p0) / j as f64;
        p0 = p1;
        p1 = p2;
    }
    let dp = n as f64 * (x * p1 - p0) / (x * x - 1.0);
    (p1, dp)
}

pub fn gauss_rule(n: usize) -> Arc<GaussRule> {
    assert!(n >= 1, "Gauss rule order must be >= 1");
    let mut cache = RULE_CACHE.lock().unwrap();
    if let Some(r) = cache.get(&n) {
        return r.clone();
    }
    let mut nodes = vec![0.0; n];
    let mut weights = vec![0.0; n];
    for i in 0..(n + 1) / 2 {
        // Tricomi initial guess, then Newton.
        let mut x = (std::f64::consts::PI * (i as f64 + 0.75) / (n as f64 + 0.5)).cos();
        for _ in 0..100 {
            let (p, dp) = legendre(n, x);
            let dx = p / dp;
            x -= dx;
            if dx.abs() < 1e-15 {
                break;
            }
        }
        let (_, dp) = legendre(n, x);
        let w = 2.0 / ((1.0 - x * x) * dp * dp);
        nodes[i] = -x;
        nodes[n - 1 - i] = x;
        weights[i] = w;
        weights[n - 1 - i] = w;
    }
    if n % 2 == 1 {
        nodes[n / 2] = 0.0;
    }
    let rule = Arc::new(GaussRule { nodes, weights });
    cache.insert(n, rule.clone());
    rule
}

/// Single-panel Gauss–Legendre on [a, b].
pub fn gauss_panel<S: Scalar>(f: &dyn Fn(f64) -> S, a: f64, b: f64, order: usize) -> S {
    let rule = gauss_rule(order);
    let mid = 0.5 * (a + b);
    let half = 0.5 * (b - a);
    let mut acc = S::zero();
    for (x, w) in rule.nodes.iter().zip(rule.weights.iter()) {
        acc += f(mid + half * x) * (w * half);
    }
    acc
}

fn adaptive<S: Scalar>(
    f: &dyn Fn(f64) -> S,
    a: f64,
    b: f64,
    order: usize,
    tol: f64,
    depth: usize,
    achieved: &mut f64,
    ok: &mut bool,
) -> S {
    let whole = gauss_panel(f, a, b, order);
    let m = 0.5 * (a + b);
    let halves = gauss_panel(f, a, m, order) + gauss_panel(f, m, b, order);
    let err = (halves - whole).modulus();
    if err <= tol || err <= 1e-15 * halves.modulus() {
        *achieved = achieved.max(err);
        return halves;
    }
    if depth == 0 {
        *achieved = achieved.max(err);
        *ok = false;
        return halves;
    }
    let left = adaptive(f, a, m, order, 0.5 * tol, depth - 1, achieved, ok);
    let right = adaptive(f, m, b, order, 0.5 * tol, depth - 1, achieved, ok);
    left + right
}

/// Outcome of an adaptive integration: the value plus an error estimate.
#[derive(Debug, Clone, Copy)]
pub struct QuadOutcome<S> {
    pub value: S,
    pub error_estimate: f64,
    pub converged: bool,
}

/// Adaptive Gauss–Legendre on [a, b], splitting first at the interior
/// `breakpoints` (unsorted input is fine; points outside (a, b) are ignored).
pub fn integrate_1d<S: Scalar>(
    f: &dyn Fn(f64) -> S,
    a: f64,
    b: f64,
    breakpoints: &[f64],
    spec: &QuadratureSpec,
) -> QuadOutcome<S> {
    integrate_1d_tol(f, a, b, breakpoints, spec, spec.target_tolerance)
}

pub fn integrate_1d_tol<S: Scalar>(
    f: &dyn Fn(f64) -> S,
    a: f64,
    b: f64,
    breakpoints: &[f64],
    spec: &QuadratureSpec,
    tol: f64,
) -> QuadOutcome<S> {
    if b <= a {
        return QuadOutcome { value: S::zero(), error_estimate: 0.0, converged: true };
    }
    let mut cuts: Vec<f64> = breakpoints
        .iter()
        .copied()
        .filter(|&p| p > a + 1e-300 && p < b - 1e-300)
        .collect();
    cuts.sort_by(|p, q| p.partial_cmp(q).unwrap());
    cuts.dedup_by(|p, q| (*p - *q).abs() <= 1e-14 * (b - a));
    let mut edges = Vec::with_capacity(cuts.len() + 2);
    edges.push(a);
    edges.extend(cuts);
    edges.push(b);

    let total = b - a;
    let mut value = S::zero();
    let mut achieved = 0.0f64;
    let mut ok = true;
    for pair in edges.windows(2) {
        let (lo, hi) = (pair[0], pair[1]);
        if hi - lo <= 0.0 {
            continue;
        }
        let piece_tol = tol * ((hi - lo) / total).max(1e-3);
        value += adaptive(f, lo, hi, spec.gauss_order, piece_tol, spec.max_subdivision_depth, &mut achieved, &mut ok);
    }
    QuadOutcome { value, error_estimate: achieved, converged: ok }
}

/// Space-time integral over `[t0, t1] x [x0, x1]` (n = 1).
///
/// `x_breakpoints(t, out)` appends the x-positions where the integrand may
/// lose smoothness at time `t`; `t_breakpoints` lists fixed times with the
/// same role (grid slab edges, curve degeneracies).
pub fn integrate_spacetime<S: Scalar>(
    integrand: &dyn Fn(f64, f64) -> S,
    t_span: (f64, f64),
    x_span: (f64, f64),
    t_breakpoints: &[f64],
    x_breakpoints: &dyn Fn(f64, &mut Vec<f64>),
    spec: &QuadratureSpec,
) -> QuadOutcome<S> {
    let inner_tol = spec.target_tolerance / (t_span.1 - t_span.0).max(1e-12) / 4.0;
    let mut converged = true;
    let mut inner_err = 0.0f64;
    let err_cell = std::cell::Cell::new((0.0f64, true));
    let slice = |t: f64| -> S {
        let mut cuts = Vec::new();
        x_breakpoints(t, &mut cuts);
        let out = integrate_1d_tol(&|x| integrand(t, x), x_span.0, x_span.1, &cuts, spec, inner_tol);
        let (e, c) = err_cell.get();
        err_cell.set((e.max(out.error_estimate), c && out.converged));
        out.value
    };
    let outer = integrate_1d(&slice, t_span.0, t_span.1, t_breakpoints, spec);
    let (e, c) = err_cell.get();
    inner_err = inner_err.max(e);
    converged = converged && c && outer.converged;
    QuadOutcome {
        value: outer.value,
        error_estimate: outer.error_estimate + inner_err * (t_span.1 - t_span.0),
        converged,
    }
}

/// Tensor Gauss integration of a globally smooth integrand over an
/// n-dimensional box. No breakpoint handling; intended for smooth data.
pub fn integrate_box_nd<S: Scalar>(
    integrand: &dyn Fn(&[f64]) -> S,
    lo: &[f64],
    hi: &[f64],
    order: usize,
) -> S {
    assert_eq!(lo.len(), hi.len());
    let rule = gauss_rule(order);
    let dim = lo.len();
    let mut point = vec![0.0; dim];
    fn recurse<S: Scalar>(
        integrand: &dyn Fn(&[f64]) -> S,
        lo: &[f64],
        hi: &[f64],
        rule: &GaussRule,
        axis: usize,
        point: &mut Vec<f64>,
    ) -> S {
        if axis == lo.len() {
            return integrand(point);
        }
        let mid = 0.5 * (lo[axis] + hi[axis]);
        let half = 0.5 * (hi[axis] - lo[axis]);
        let mut acc = S::zero();
        for (x, w) in rule.nodes.iter().zip(rule.weights.iter()) {
            point[axis] = mid + half * x;
            acc += recurse(integrand, lo, hi, rule, axis + 1, point) * (w * half);
        }
        acc
    }
    recurse(integrand, lo, hi, &rule, 0, &mut point)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn gauss_exact_for_polynomials() {
        // A rule of order m integrates degree 2m-1 exactly.
        for order in [2usize, 5, 8, 16] {
            let deg = 2 * order - 1;
            let f = |x: f64| x.powi(deg as i32) + 1.5 * x.powi((deg - 1) as i32);
            let exact = (2f64.powi(deg as i32 + 1) - 1.0) / (deg as f64 + 1.0)
                + 1.5 * (2f64.powi(deg as i32) - 1.0) / deg as f64;
            let got: f64 = gauss_panel(&f, 1.0, 2.0, order);
            assert!(
                ((got - exact) / exact).abs() <= 1e-13,
                "order {order}: rel err {}",
                ((got - exact) / exact).abs()
            );
        }
    }

    #[test]
    fn breakpoints_make_kinks_cheap() {
        let spec = QuadratureSpec::default();
        let f = |x: f64| (x - 0.3).abs();
        let out = integrate_1d(&f, 0.0, 1.0, &[0.3], &spec);
        let exact = 0.3f64.powi(2) / 2.0 + 0.7f64.powi(2) / 2.0;
        assert!((out.value - exact).abs() < 1e-14);
        assert!(out.converged);
    }

    #[test]
    fn unit_box_integral() {
        let spec = QuadratureSpec::default();
        let out = integrate_spacetime(&|_, _| 1.0, (0.0, 1.0), (0.0, 1.0), &[], &|_, _| {}, &spec);
        assert!((out.value - 1.0).abs() < 1e-14);
    }

    #[test]
    fn zero_integrand() {
        let spec = QuadratureSpec::default();
        let out = integrate_spacetime(&|_, _| 0.0, (0.0, 2.0), (-1.0, 3.0), &[], &|_, _| {}, &spec);
        assert_eq!(out.value, 0.0);
    }

    #[test]
    fn nd_box_matches_product() {
        let f = |p: &[f64]| p[0] * p[0] * p[1] + p[2];
        let got: f64 = integrate_box_nd(&f, &[0.0, 0.0, 0.0], &[1.0, 2.0, 1.0], 8);
        // int x^2 dx * int y dy * 1 + 1 * 2 * int z dz
        let exact = (1.0 / 3.0) * 2.0 + 2.0 * 0.5;
        assert!((got - exact).abs() < 1e-13);
    }
}
