//! Space-time domain, sign/jump primitives and compactly supported test
//! functions.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Space-time domain `[0, T) x box`.
#[derive(Debug, Clone, Serialize, Deserialize, PartialEq)]
pub struct Domain {
    pub t_end: f64,
    pub space_dim: usize,
    /// Per-axis spatial bounds.
    pub space_box: Vec<(f64, f64)>,
}

impl Domain {
    pub fn new(t_end: f64, space_box: Vec<(f64, f64)>) -> Result<Self> {
        if !(t_end > 0.0) {
            return Err(Error::InvalidArgument("t_end must be positive".into()));
        }
        if space_box.is_empty() {
            return Err(Error::InvalidArgument("space box must have at least one axis".into()));
        }
        for &(lo, hi) in &space_box {
            if !(hi > lo) {
                return Err(Error::InvalidArgument(format!(
                    "degenerate space box axis [{lo}, {hi}]"
                )));
            }
        }
        Ok(Self { t_end, space_dim: space_box.len(), space_box })
    }

    /// 1-D convenience constructor.
    pub fn line(t_end: f64, x_lo: f64, x_hi: f64) -> Result<Self> {
        Self::new(t_end, vec![(x_lo, x_hi)])
    }
}

/// Exact sign with sgn(0) = 0. NaN is rejected.
#[inline]
pub fn sign(z: f64) -> i8 {
    assert!(!z.is_nan(), "sign of NaN is undefined");
    if z > 0.0 {
        1
    } else if z < 0.0 {
        -1
    } else {
        0
    }
}

/// Half-open interval indicator: 1 on b <= xi < a, -1 on a <= xi < b, else 0.
#[inline]
pub fn chi(xi: f64, a: f64, b: f64) -> i8 {
    if b <= xi && xi < a {
        1
    } else if a <= xi && xi < b {
        -1
    } else {
        0
    }
}

/// A compactly supported C^(p-1) test function on `[0, T) x R`:
/// product of polynomial bumps `max(0, 1 - s^2)^p` per axis, with `s`
/// the offset normalized by the radius. Only evaluated for t >= 0; the
/// trace at t = 0 need not vanish.
#[derive(Debug, Clone, Serialize, Deserialize, PartialEq)]
pub struct TestFunction {
    pub t_center: f64,
    pub t_radius: f64,
    pub x_center: Vec<f64>,
    pub x_radius: Vec<f64>,
    /// Smoothness exponent, >= 3 so first derivatives are C^1 at the edge.
    pub p: u32,
}

#[inline]
fn bump(s: f64, p: u32) -> f64 {
    let v = 1.0 - s * s;
    if v <= 0.0 {
        0.0
    } else {
        v.powi(p as i32)
    }
}

#[inline]
fn bump_deriv(s: f64, p: u32) -> f64 {
    let v = 1.0 - s * s;
    if v <= 0.0 {
        0.0
    } else {
        -2.0 * p as f64 * s * v.powi(p as i32 - 1)
    }
}

impl TestFunction {
    pub fn new(t_center: f64, t_radius: f64, x_center: f64, x_radius: f64) -> Self {
        Self::with_exponent(t_center, t_radius, x_center, x_radius, 4)
    }

    pub fn with_exponent(
        t_center: f64,
        t_radius: f64,
        x_center: f64,
        x_radius: f64,
        p: u32,
    ) -> Self {
        assert!(p >= 3, "smoothness exponent must be >= 3");
        assert!(t_radius > 0.0 && x_radius > 0.0);
        Self { t_center, t_radius, x_center: vec![x_center], x_radius: vec![x_radius], p }
    }

    pub fn eval(&self, t: f64, x: f64) -> f64 {
        if t < 0.0 {
            return 0.0;
        }
        bump((t - self.t_center) / self.t_radius, self.p)
            * bump((x - self.x_center[0]) / self.x_radius[0], self.p)
    }

    pub fn dt(&self, t: f64, x: f64) -> f64 {
        if t < 0.0 {
            return 0.0;
        }
        bump_deriv((t - self.t_center) / self.t_radius, self.p) / self.t_radius
            * bump((x - self.x_center[0]) / self.x_radius[0], self.p)
    }

    pub fn dx(&self, t: f64, x: f64) -> f64 {
        if t < 0.0 {
            return 0.0;
        }
        bump((t - self.t_center) / self.t_radius, self.p)
            * bump_deriv((x - self.x_center[0]) / self.x_radius[0], self.p)
            / self.x_radius[0]
    }

    /// Support in time, clipped to t >= 0.
    pub fn t_support(&self) -> (f64, f64) {
        ((self.t_center - self.t_radius).max(0.0), self.t_center + self.t_radius)
    }

    pub fn x_support(&self) -> (f64, f64) {
        (self.x_center[0] - self.x_radius[0], self.x_center[0] + self.x_radius[0])
    }

    /// C^1 norm: max over a sample grid of |phi|, |dt phi|, |dx phi|.
    /// The bump maxima are attained on grid-aligned sections, so a 65-point
    /// grid per axis resolves the norm far beyond test tolerances.
    pub fn c1_norm(&self) -> f64 {
        let n = 65;
        let (t0, t1) = self.t_support();
        let (x0, x1) = self.x_support();
        let mut m: f64 = 0.0;
        for i in 0..=n {
            let t = t0 + (t1 - t0) * i as f64 / n as f64;
            for j in 0..=n {
                let x = x0 + (x1 - x0) * j as f64 / n as f64;
                m = m
                    .max(self.eval(t, x).abs())
                    .max(self.dt(t, x).abs())
                    .max(self.dx(t, x).abs());
            }
        }
        m
    }
}

/// A general C^1 test function given by closures; the polynomial bump is
/// the common case, but the representation-formula checks also test
/// against coefficient-weighted bumps and x-sections of entropies.
pub trait SpaceTimeTest: Send + Sync {
    fn eval(&self, t: f64, x: f64) -> f64;
    fn dt(&self, t: f64, x: f64) -> f64;
    fn dx(&self, t: f64, x: f64) -> f64;
    fn t_support(&self) -> (f64, f64);
    fn x_support(&self) -> (f64, f64);
}

impl SpaceTimeTest for TestFunction {
    fn eval(&self, t: f64, x: f64) -> f64 {
        TestFunction::eval(self, t, x)
    }
    fn dt(&self, t: f64, x: f64) -> f64 {
        TestFunction::dt(self, t, x)
    }
    fn dx(&self, t: f64, x: f64) -> f64 {
        TestFunction::dx(self, t, x)
    }
    fn t_support(&self) -> (f64, f64) {
        TestFunction::t_support(self)
    }
    fn x_support(&self) -> (f64, f64) {
        TestFunction::x_support(self)
    }
}

/// Test function scaled by a constant (used by the k-integrals of the
/// (t,x)-dependent representation formula).
pub struct ScaledTest<'a> {
    pub base: &'a dyn SpaceTimeTest,
    pub factor: f64,
}

impl SpaceTimeTest for ScaledTest<'_> {
    fn eval(&self, t: f64, x: f64) -> f64 {
        self.factor * self.base.eval(t, x)
    }
    fn dt(&self, t: f64, x: f64) -> f64 {
        self.factor * self.base.dt(t, x)
    }
    fn dx(&self, t: f64, x: f64) -> f64 {
        self.factor * self.base.dx(t, x)
    }
    fn t_support(&self) -> (f64, f64) {
        self.base.t_support()
    }
    fn x_support(&self) -> (f64, f64) {
        self.base.x_support()
    }
}

/// C^1 test function from closures, with an explicit support box.
pub struct ClosureTest {
    pub f: Box<dyn Fn(f64, f64) -> f64 + Send + Sync>,
    pub ft: Box<dyn Fn(f64, f64) -> f64 + Send + Sync>,
    pub fx: Box<dyn Fn(f64, f64) -> f64 + Send + Sync>,
    pub t_span: (f64, f64),
    pub x_span: (f64, f64),
}

impl SpaceTimeTest for ClosureTest {
    fn eval(&self, t: f64, x: f64) -> f64 {
        (self.f)(t, x)
    }
    fn dt(&self, t: f64, x: f64) -> f64 {
        (self.ft)(t, x)
    }
    fn dx(&self, t: f64, x: f64) -> f64 {
        (self.fx)(t, x)
    }
    fn t_support(&self) -> (f64, f64) {
        self.t_span
    }
    fn x_support(&self) -> (f64, f64) {
        self.x_span
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::quad::{gauss_panel, integrate_spacetime, QuadratureSpec};
    use proptest::prelude::*;
    use rand::{Rng, SeedableRng};

    #[test]
    fn sign_table() {
        assert_eq!(sign(3.5), 1);
        assert_eq!(sign(0.0), 0);
        assert_eq!(sign(-2.0), -1);
    }

    #[test]
    fn chi_table() {
        assert_eq!(chi(0.5, 1.0, 0.0), 1);
        assert_eq!(chi(0.5, 0.0, 1.0), -1);
        assert_eq!(chi(2.0, 1.0, 0.0), 0);
    }

    proptest! {
        #[test]
        fn sign_is_odd(z in -1e6f64..1e6) {
            prop_assert_eq!(sign(-z), -sign(z));
        }
    }

    #[test]
    fn chi_reconstructs_increments() {
        // eta(a) - eta(b) = int eta'(xi) chi(xi, a, b) dxi for C^1 eta.
        let etas: [(fn(f64) -> f64, fn(f64) -> f64); 3] = [
            (|u| u * u * u, |u| 3.0 * u * u),
            (|u| u.sin(), |u| u.cos()),
            (|u| (u * u).exp_m1(), |u| 2.0 * u * (u * u).exp()),
        ];
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(7);
        for (eta, deta) in etas {
            for _ in 0..50 {
                let a: f64 = rng.gen_range(-2.0..2.0);
                let b: f64 = rng.gen_range(-2.0..2.0);
                let (lo, hi) = (a.min(b), a.max(b));
                let integral: f64 =
                    gauss_panel(&|xi: f64| deta(xi) * chi(xi, a, b) as f64, lo, hi, 64);
                assert!(
                    (eta(a) - eta(b) - integral).abs() <= 1e-10,
                    "a={a} b={b}"
                );
            }
        }
    }

    #[test]
    fn bump_derivatives_match_finite_differences() {
        let phi = TestFunction::new(0.6, 0.5, 0.2, 0.8);
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(11);
        let h = 1e-5;
        for _ in 0..100 {
            let t: f64 = rng.gen_range(0.05..1.2);
            let x: f64 = rng.gen_range(-0.8..1.2);
            let dt_fd = (phi.eval(t + h, x) - phi.eval(t - h, x)) / (2.0 * h);
            let dx_fd = (phi.eval(t, x + h) - phi.eval(t, x - h)) / (2.0 * h);
            assert!((phi.dt(t, x) - dt_fd).abs() <= 1e-6);
            assert!((phi.dx(t, x) - dx_fd).abs() <= 1e-6);
        }
    }

    #[test]
    fn bump_vanishes_outside_support() {
        let phi = TestFunction::new(0.5, 0.3, 0.0, 0.4);
        for (t, x) in [(0.95, 0.0), (0.5, 0.45), (0.05, 0.0), (0.5, -0.41)] {
            assert_eq!(phi.eval(t, x), 0.0);
            assert_eq!(phi.dt(t, x), 0.0);
            assert_eq!(phi.dx(t, x), 0.0);
        }
    }

    #[test]
    fn time_derivative_integrates_to_boundary_term() {
        // Fundamental theorem in t: int int dt(phi) + int phi(0, .) = 0
        // for a bump whose support reaches t = 0.
        let phi = TestFunction::new(0.1, 0.4, 0.0, 0.5);
        let spec = QuadratureSpec::default();
        let (t0, t1) = phi.t_support();
        let (x0, x1) = phi.x_support();
        let inner =
            integrate_spacetime(&|t, x| phi.dt(t, x), (t0, t1), (x0, x1), &[], &|_, _| {}, &spec);
        let initial: f64 = gauss_panel(&|x| phi.eval(0.0, x), x0, x1, 32);
        assert!((inner.value + initial).abs() < 1e-12);
    }

    #[test]
    fn degenerate_domain_rejected() {
        assert!(Domain::line(0.0, 0.0, 1.0).is_err());
        assert!(Domain::line(1.0, 1.0, 1.0).is_err());
        assert!(Domain::line(1.0, -1.0, 1.0).is_ok());
    }
}
