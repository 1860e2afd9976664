//! Entropies in u, entropies in (t, x, u) with compact space-time
//! support, and the canonical entropy-flux constructor
//! F(t,x,u) = int_0^u dE(w) du f(t,x,w) dw.

use std::sync::Arc;

use crate::error::{Error, Result};
use crate::flux::FluxFunction;
use crate::ks::RegulatedBV;
use crate::quad::{gauss_rule, integrate_1d, QuadratureSpec};
use crate::scalar::Scalar;

type Eval1<S> = Arc<dyn Fn(f64) -> S + Send + Sync>;
type Eval3 = Arc<dyn Fn(f64, f64, f64) -> f64 + Send + Sync>;

/// Entropy E(u), either twice differentiable or absolutely continuous
/// with a regulated, midpoint-normalized derivative.
#[derive(Clone)]
pub enum Entropy1D<S: Scalar> {
    C2 {
        e: Eval1<S>,
        de: Eval1<S>,
        d2e: Eval1<S>,
    },
    Acr {
        e: Eval1<f64>,
        /// E' as a regulated BV function (density + jumps).
        de: RegulatedBV,
        /// Optional closed form for E'(u); falls back to integrating the
        /// density when absent.
        de_value: Option<Eval1<f64>>,
    },
}

impl<S: Scalar> Entropy1D<S> {
    pub fn c2(e: Eval1<S>, de: Eval1<S>, d2e: Eval1<S>) -> Self {
        Entropy1D::C2 { e, de, d2e }
    }

    pub fn eval(&self, u: f64) -> S {
        match self {
            Entropy1D::C2 { e, .. } => e(u),
            Entropy1D::Acr { e, .. } => S::from_real(e(u)),
        }
    }

    /// E'(u); for the regulated variant this is the midpoint-normalized
    /// pointwise value.
    pub fn deriv(&self, u: f64, spec: &QuadratureSpec) -> S {
        match self {
            Entropy1D::C2 { de, .. } => de(u),
            Entropy1D::Acr { de, de_value, .. } => match de_value {
                Some(v) => S::from_real(v(u)),
                None => S::from_real(de.value(u, spec)),
            },
        }
    }

    /// E''(u) where available (C2 variant only).
    pub fn second_deriv(&self, u: f64) -> Option<S> {
        match self {
            Entropy1D::C2 { d2e, .. } => Some(d2e(u)),
            Entropy1D::Acr { .. } => None,
        }
    }

    /// Jump locations of E' (empty for C2 entropies).
    pub fn deriv_kinks(&self) -> Vec<f64> {
        match self {
            Entropy1D::C2 { .. } => Vec::new(),
            Entropy1D::Acr { de, .. } => de.jumps.iter().map(|&(c, _)| c).collect(),
        }
    }
}

impl Entropy1D<f64> {
    pub fn identity() -> Self {
        Self::c2(Arc::new(|u| u), Arc::new(|_| 1.0), Arc::new(|_| 0.0))
    }

    /// u^2 / 2.
    pub fn quadratic_half() -> Self {
        Self::c2(Arc::new(|u| 0.5 * u * u), Arc::new(|u| u), Arc::new(|_| 1.0))
    }

    /// u^2.
    pub fn square() -> Self {
        Self::c2(Arc::new(|u| u * u), Arc::new(|u| 2.0 * u), Arc::new(|_| 2.0))
    }

    /// u^4.
    pub fn quartic() -> Self {
        Self::c2(
            Arc::new(|u| u.powi(4)),
            Arc::new(|u| 4.0 * u.powi(3)),
            Arc::new(|u| 12.0 * u * u),
        )
    }

    pub fn cosine() -> Self {
        Self::c2(Arc::new(|u| u.cos()), Arc::new(|u| -u.sin()), Arc::new(|u| -u.cos()))
    }

    /// a u + b.
    pub fn affine(a: f64, b: f64) -> Self {
        Self::c2(Arc::new(move |u| a * u + b), Arc::new(move |_| a), Arc::new(|_| 0.0))
    }

    /// The Kruzkov entropy |u - c|: regulated derivative sgn(u - c),
    /// a pure double jump at c with value 0 there.
    pub fn kruzkov(c: f64, working: (f64, f64)) -> Self {
        let support = (working.0.min(c - 1.0), working.1.max(c + 1.0));
        let de = RegulatedBV::jumps_only(support, vec![(c, 2.0)], -1.0).unwrap();
        Entropy1D::Acr {
            e: Arc::new(move |u| (u - c).abs()),
            de,
            de_value: Some(Arc::new(move |u| crate::domain::sign(u - c) as f64)),
        }
    }

    /// A C2 entropy reinterpreted as regulated (density = E'', no jumps).
    pub fn c2_as_acr(&self, working: (f64, f64)) -> Result<Self> {
        match self {
            Entropy1D::C2 { e, de, d2e } => {
                let d2e = d2e.clone();
                let de_c = de.clone();
                let base = de(working.0);
                Ok(Entropy1D::Acr {
                    e: e.clone(),
                    de: RegulatedBV::smooth(working, Arc::new(move |k| d2e(k)), base),
                    de_value: Some(de_c),
                })
            }
            Entropy1D::Acr { .. } => {
                Err(Error::InvalidArgument("entropy is already regulated".into()))
            }
        }
    }

    /// Pointwise linear combination self + lambda * other (C2 variants).
    pub fn linear_combination(&self, other: &Self, lambda: f64) -> Result<Self> {
        match (self, other) {
            (
                Entropy1D::C2 { e: e1, de: d1, d2e: s1 },
                Entropy1D::C2 { e: e2, de: d2, d2e: s2 },
            ) => {
                let (e1, d1, s1) = (e1.clone(), d1.clone(), s1.clone());
                let (e2, d2, s2) = (e2.clone(), d2.clone(), s2.clone());
                Ok(Self::c2(
                    Arc::new(move |u| e1(u) + lambda * e2(u)),
                    Arc::new(move |u| d1(u) + lambda * d2(u)),
                    Arc::new(move |u| s1(u) + lambda * s2(u)),
                ))
            }
            _ => Err(Error::InvalidArgument("linear combinations need C2 entropies".into())),
        }
    }

    /// Mollification by a normalized polynomial bump of the given width:
    /// E_w(u) = int E(u - s) rho_w(s) ds with rho_w(s) = c (1 - (s/w)^2)^4.
    pub fn mollify(&self, width: f64) -> Result<Self> {
        match self {
            Entropy1D::C2 { e, de, d2e } => {
                let rule = gauss_rule(40);
                // Normalization of (1 - v^2)^4 on [-1, 1] is 256/315.
                let norm = 315.0 / 256.0 / width;
                let make = |g: Eval1<f64>| -> Eval1<f64> {
                    let rule = rule.clone();
                    Arc::new(move |u: f64| {
                        let mut acc = 0.0;
                        for (v, w) in rule.nodes.iter().zip(rule.weights.iter()) {
                            let s = v * width;
                            let kernel = (1.0 - v * v).powi(4) * norm;
                            acc += w * width * kernel * g(u - s);
                        }
                        acc
                    })
                };
                Ok(Entropy1D::C2 {
                    e: make(e.clone()),
                    de: make(de.clone()),
                    d2e: make(d2e.clone()),
                })
            }
            Entropy1D::Acr { .. } => {
                Err(Error::InvalidArgument("mollification implemented for C2 entropies".into()))
            }
        }
    }
}

/// Entropy E(t, x, u) with compact (t, x)-support and the full mixed
/// derivative surface.
#[derive(Clone)]
pub struct EntropyTX {
    pub e: Eval3,
    pub de_dt: Eval3,
    pub de_dx: Eval3,
    pub de_du: Eval3,
    pub d2e_dtdu: Eval3,
    pub d2e_dxdu: Eval3,
    /// Second u-derivative, needed by the (t,x)-dependent representation
    /// formula.
    pub d2e_dudu: Option<Eval3>,
    /// dt and dx of the second u-derivative: required when
    /// (t,x) -> d2e_dudu(t,x,k) plays the role of a test function.
    pub d3e_dtduu: Option<Eval3>,
    pub d3e_dxduu: Option<Eval3>,
    pub t_support: (f64, f64),
    pub x_support: (f64, f64),
}

impl EntropyTX {
    /// Tensor product phi(t, x) * e(u) for a C2 entropy e.
    pub fn tensor(phi: &crate::domain::TestFunction, e: &Entropy1D<f64>) -> Result<Self> {
        let (ev, de, d2e) = match e {
            Entropy1D::C2 { e, de, d2e } => (e.clone(), de.clone(), d2e.clone()),
            Entropy1D::Acr { .. } => {
                return Err(Error::InvalidArgument("tensor entropies need a C2 factor".into()))
            }
        };
        let p = phi.clone();
        let p1 = phi.clone();
        let p2 = phi.clone();
        let p3 = phi.clone();
        let p4 = phi.clone();
        let p5 = phi.clone();
        let (e1, e2, e3, e4, e5) = (ev.clone(), de.clone(), de.clone(), de.clone(), d2e.clone());
        let ev2 = ev.clone();
        Ok(Self {
            e: Arc::new(move |t, x, u| p.eval(t, x) * ev(u)),
            de_dt: Arc::new(move |t, x, u| p1.dt(t, x) * ev2(u)),
            de_dx: {
                let ev = e1.clone();
                let p = phi.clone();
                Arc::new(move |t, x, u| p.dx(t, x) * ev(u))
            },
            de_du: Arc::new(move |t, x, u| p2.eval(t, x) * e2(u)),
            d2e_dtdu: Arc::new(move |t, x, u| p3.dt(t, x) * e3(u)),
            d2e_dxdu: Arc::new(move |t, x, u| p4.dx(t, x) * e4(u)),
            d2e_dudu: Some(Arc::new(move |t, x, u| p5.eval(t, x) * e5(u))),
            d3e_dtduu: {
                let p = phi.clone();
                let d2e = d2e.clone();
                Some(Arc::new(move |t, x, u| p.dt(t, x) * d2e(u)))
            },
            d3e_dxduu: {
                let p = phi.clone();
                let d2e = d2e.clone();
                Some(Arc::new(move |t, x, u| p.dx(t, x) * d2e(u)))
            },
            t_support: phi.t_support(),
            x_support: phi.x_support(),
        })
    }

    /// psi(t, x) * u for a C1 coefficient psi with known derivatives
    /// (the boundary term of the (t,x)-dependent representation).
    pub fn coefficient_times_identity(
        psi: Eval3,
        psi_t: Eval3,
        psi_x: Eval3,
        t_support: (f64, f64),
        x_support: (f64, f64),
    ) -> Self {
        let (p, pt, px) = (psi.clone(), psi_t.clone(), psi_x.clone());
        Self {
            e: Arc::new(move |t, x, u| p(t, x, 0.0) * u),
            de_dt: Arc::new(move |t, x, u| pt(t, x, 0.0) * u),
            de_dx: Arc::new(move |t, x, u| px(t, x, 0.0) * u),
            de_du: Arc::new(move |t, x, _| psi(t, x, 0.0)),
            d2e_dtdu: Arc::new(move |t, x, _| psi_t(t, x, 0.0)),
            d2e_dxdu: Arc::new(move |t, x, _| psi_x(t, x, 0.0)),
            d2e_dudu: Some(Arc::new(|_, _, _| 0.0)),
            d3e_dtduu: Some(Arc::new(|_, _, _| 0.0)),
            d3e_dxduu: Some(Arc::new(|_, _, _| 0.0)),
            t_support,
            x_support,
        }
    }

    pub fn zero() -> Self {
        let z: Eval3 = Arc::new(|_, _, _| 0.0);
        Self {
            e: z.clone(),
            de_dt: z.clone(),
            de_dx: z.clone(),
            de_du: z.clone(),
            d2e_dtdu: z.clone(),
            d2e_dxdu: z.clone(),
            d2e_dudu: Some(z.clone()),
            d3e_dtduu: Some(z.clone()),
            d3e_dxduu: Some(z),
            t_support: (0.0, 0.0),
            x_support: (0.0, 0.0),
        }
    }

    /// Declared (t, x)-support box.
    pub fn spt_tx(&self) -> ((f64, f64), (f64, f64)) {
        (self.t_support, self.x_support)
    }

    /// Sample outside the declared box and fail on any nonzero value.
    pub fn verify_support(&self, probe_margin: f64, u_range: (f64, f64)) -> Result<()> {
        let (ts, xs) = (self.t_support, self.x_support);
        let probes_t = [ts.0 - probe_margin, ts.1 + probe_margin];
        let probes_x = [xs.0 - probe_margin, xs.1 + probe_margin];
        for n in 0..=8 {
            let u = u_range.0 + (u_range.1 - u_range.0) * n as f64 / 8.0;
            for &t in &probes_t {
                for x in [xs.0, 0.5 * (xs.0 + xs.1), xs.1] {
                    if (self.e)(t.max(0.0), x, u) != 0.0 {
                        return Err(Error::ContractViolation(format!(
                            "entropy nonzero outside declared t-support at ({t}, {x}, {u})"
                        )));
                    }
                }
            }
            for &x in &probes_x {
                for t in [ts.0.max(0.0), 0.5 * (ts.0 + ts.1).max(0.0), ts.1] {
                    if (self.e)(t, x, u) != 0.0 {
                        return Err(Error::ContractViolation(format!(
                            "entropy nonzero outside declared x-support at ({t}, {x}, {u})"
                        )));
                    }
                }
            }
        }
        Ok(())
    }
}

/// Entropy flux F(t, x, u) with its u-derivative and divergence.
#[derive(Clone)]
pub struct EntropyFluxTX<S: Scalar> {
    pub f: Arc<dyn Fn(f64, f64, f64) -> S + Send + Sync>,
    pub df_du: Arc<dyn Fn(f64, f64, f64) -> S + Send + Sync>,
    pub div_x: Arc<dyn Fn(f64, f64, f64) -> S + Send + Sync>,
    pub df_dt: Arc<dyn Fn(f64, f64, f64) -> S + Send + Sync>,
}

fn anchored_integral<S: Scalar>(
    integrand: &dyn Fn(f64) -> S,
    u: f64,
    kinks: &[f64],
    spec: &QuadratureSpec,
) -> S {
    if u >= 0.0 {
        integrate_1d(integrand, 0.0, u, kinks, spec).value
    } else {
        -integrate_1d(integrand, u, 0.0, kinks, spec).value
    }
}

/// The canonical entropy flux paired to `e` with respect to `f`,
/// anchored at 0: F(t,x,u) = int_0^u E'(w) du f(t,x,w) dw, with
/// div_x F and dt F assembled from the mixed derivatives of f.
/// Jump points of E' outside [min(0,u), max(0,u)] are ignored by
/// construction of the w-integral.
pub fn entropy_flux<S: Scalar>(
    e: &Entropy1D<S>,
    f: &FluxFunction,
    spec: &QuadratureSpec,
) -> EntropyFluxTX<S> {
    let kinks = e.deriv_kinks();
    let spec = *spec;
    let (e1, e2, e3, e4) = (e.clone(), e.clone(), e.clone(), e.clone());
    let (f1, f2, f3, f4) = (f.clone(), f.clone(), f.clone(), f.clone());
    let (k1, k3, k4) = (kinks.clone(), kinks.clone(), kinks);
    EntropyFluxTX {
        f: Arc::new(move |t, x, u| {
            anchored_integral(&|w| e1.deriv(w, &spec) * (f1.df_du)(t, x, w), u, &k1, &spec)
        }),
        df_du: Arc::new(move |t, x, u| e2.deriv(u, &spec) * (f2.df_du)(t, x, u)),
        div_x: Arc::new(move |t, x, u| {
            anchored_integral(&|w| e3.deriv(w, &spec) * (f3.d2f_dxdu)(t, x, w), u, &k3, &spec)
        }),
        df_dt: Arc::new(move |t, x, u| {
            anchored_integral(&|w| e4.deriv(w, &spec) * (f4.d2f_dtdu)(t, x, w), u, &k4, &spec)
        }),
    }
}

/// Entropy flux for a (t, x)-dependent entropy: the w-integrals pick up
/// the mixed derivatives of both factors.
pub fn entropy_flux_tx(e: &EntropyTX, f: &FluxFunction, spec: &QuadratureSpec) -> EntropyFluxTX<f64> {
    let spec = *spec;
    let (e1, e2, e3, e4) = (e.clone(), e.clone(), e.clone(), e.clone());
    let (f1, f2, f3, f4) = (f.clone(), f.clone(), f.clone(), f.clone());
    EntropyFluxTX {
        f: Arc::new(move |t, x, u| {
            anchored_integral(&|w| (e1.de_du)(t, x, w) * (f1.df_du)(t, x, w), u, &[], &spec)
        }),
        df_du: Arc::new(move |t, x, u| (e2.de_du)(t, x, u) * (f2.df_du)(t, x, u)),
        div_x: Arc::new(move |t, x, u| {
            anchored_integral(
                &|w| {
                    (e3.d2e_dxdu)(t, x, w) * (f3.df_du)(t, x, w)
                        + (e3.de_du)(t, x, w) * (f3.d2f_dxdu)(t, x, w)
                },
                u,
                &[],
                &spec,
            )
        }),
        df_dt: Arc::new(move |t, x, u| {
            anchored_integral(
                &|w| {
                    (e4.d2e_dtdu)(t, x, w) * (f4.df_du)(t, x, w)
                        + (e4.de_du)(t, x, w) * (f4.d2f_dtdu)(t, x, w)
                },
                u,
                &[],
                &spec,
            )
        }),
    }
}

/// Box in (t, x, u) for seminorm evaluation.
#[derive(Debug, Clone, Copy)]
pub struct BoxTXU {
    pub t: (f64, f64),
    pub x: (f64, f64),
    pub u: (f64, f64),
}

/// Seminorm over K: sup |zeta| plus the largest first-derivative sup
/// (the C1 part), plus the sups of the two mixed second derivatives.
/// Estimated on a uniform sample grid.
pub fn seminorm_pk(zeta: &EntropyTX, k_box: &BoxTXU, samples_per_axis: usize) -> f64 {
    let n = samples_per_axis.max(2);
    let grid = |span: (f64, f64), i: usize| span.0 + (span.1 - span.0) * i as f64 / (n - 1) as f64;
    let mut sup = 0.0f64;
    let mut sup_dt = 0.0f64;
    let mut sup_dx = 0.0f64;
    let mut sup_du = 0.0f64;
    let mut sup_tu = 0.0f64;
    let mut sup_xu = 0.0f64;
    for i in 0..n {
        let t = grid(k_box.t, i);
        for j in 0..n {
            let x = grid(k_box.x, j);
            for m in 0..n {
                let u = grid(k_box.u, m);
                sup = sup.max((zeta.e)(t, x, u).abs());
                sup_dt = sup_dt.max((zeta.de_dt)(t, x, u).abs());
                sup_dx = sup_dx.max((zeta.de_dx)(t, x, u).abs());
                sup_du = sup_du.max((zeta.de_du)(t, x, u).abs());
                sup_tu = sup_tu.max((zeta.d2e_dtdu)(t, x, u).abs());
                sup_xu = sup_xu.max((zeta.d2e_dxdu)(t, x, u).abs());
            }
        }
    }
    sup + sup_dt.max(sup_dx).max(sup_du) + sup_tu + sup_xu
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::domain::TestFunction;
    use rand::{Rng, SeedableRng};

    fn spec() -> QuadratureSpec {
        QuadratureSpec::default()
    }

    #[test]
    fn cubic_flux_from_square_entropies() {
        // E = u^2/2, f = u^2/2 (x-independent): F(u) = u^3/3.
        let e = Entropy1D::quadratic_half();
        let f = FluxFunction::burgers();
        let flux = entropy_flux(&e, &f, &spec());
        for u in [-1.5, -0.3, 0.0, 0.7, 2.0] {
            assert!(((flux.f)(0.0, 0.0, u) - u * u * u / 3.0).abs() < 1e-13);
        }
    }

    #[test]
    fn kruzkov_flux_split_at_the_jump() {
        // E = |u - k|, f x-independent, u > k > 0:
        // F(u) = f(u) + f(0) - 2 f(k) (anchored at 0).
        let k = 0.4;
        let e = Entropy1D::kruzkov(k, (-1.0, 2.0));
        let f = FluxFunction::burgers();
        let flux = entropy_flux(&e, &f, &spec());
        let fb = |u: f64| 0.5 * u * u;
        for u in [0.9, 1.5] {
            let expect = fb(u) + fb(0.0) - 2.0 * fb(k);
            assert!(((flux.f)(0.0, 0.0, u) - expect).abs() < 1e-12);
        }
    }

    #[test]
    fn zero_entropy_gives_zero_flux() {
        let e = Entropy1D::affine(0.0, 0.0);
        let f = FluxFunction::linear_x2();
        let flux = entropy_flux(&e, &f, &spec());
        assert_eq!((flux.f)(0.3, -1.0, 1.7), 0.0);
        assert_eq!((flux.div_x)(0.3, -1.0, 1.7), 0.0);
    }

    #[test]
    fn flux_constructor_is_bilinear() {
        let e1 = Entropy1D::square();
        let e2 = Entropy1D::cosine();
        let lambda = -1.7;
        let sum = e1.linear_combination(&e2, lambda).unwrap();
        let f = FluxFunction::linear_x2();
        let fa = entropy_flux(&sum, &f, &spec());
        let f1 = entropy_flux(&e1, &f, &spec());
        let f2 = entropy_flux(&e2, &f, &spec());
        for (t, x, u) in [(0.2, -0.7, 1.3), (1.0, 0.5, -0.8)] {
            let lhs = (fa.f)(t, x, u);
            let rhs = (f1.f)(t, x, u) + lambda * (f2.f)(t, x, u);
            assert!((lhs - rhs).abs() < 1e-12);
        }
    }

    #[test]
    fn pair_identity_random_points() {
        let e = Entropy1D::quartic();
        let f = FluxFunction::linear_x2();
        let flux = entropy_flux(&e, &f, &spec());
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(5);
        for _ in 0..100 {
            let (t, x, u) =
                (rng.gen_range(0.0..2.0), rng.gen_range(-2.0..2.0_f64), rng.gen_range(-1.5..1.5));
            let lhs: f64 = (flux.df_du)(t, x, u);
            let rhs = e.deriv(u, &spec()) * (f.df_du)(t, x, u);
            assert!((lhs - rhs).abs() <= 1e-10 * (1.0 + rhs.abs()));
        }
    }

    #[test]
    fn mixed_derivative_of_constructed_flux() {
        // Finite-difference cross check of dt(F) on a flux with genuine
        // t-dependence.
        let f = FluxFunction::separable(vec![crate::flux::SeparableTerm {
            a: crate::flux::CoefficientFn { coeffs: vec![vec![1.0], vec![0.6]] },
            b: crate::flux::ProfileFn::Poly(vec![0.0, 0.0, 0.5]),
        }]);
        let e = Entropy1D::square();
        let flux = entropy_flux(&e, &f, &spec());
        let h = 1e-4;
        for (t, x, u) in [(0.5, 0.1, 1.1), (1.2, -0.4, -0.7)] {
            let fd = ((flux.f)(t + h, x, u) - (flux.f)(t - h, x, u)) / (2.0 * h);
            assert!(((flux.df_dt)(t, x, u) - fd).abs() < 1e-4);
        }
    }

    #[test]
    fn tensor_support_containment() {
        let phi = TestFunction::new(0.5, 0.3, 0.0, 0.4);
        let e = EntropyTX::tensor(&phi, &Entropy1D::square()).unwrap();
        e.verify_support(0.05, (-1.0, 1.0)).unwrap();
        let f = FluxFunction::burgers();
        let flux = entropy_flux_tx(&e, &f, &spec());
        // The constructed flux vanishes wherever the entropy does.
        assert_eq!((flux.f)(0.95, 0.0, 1.0), 0.0);
        assert_eq!((flux.f)(0.5, 0.5, 1.0), 0.0);
    }

    #[test]
    fn seminorm_worked_values() {
        let kb = BoxTXU { t: (0.0, 1.0), x: (0.0, 1.0), u: (0.0, 1.0) };
        let zero = EntropyTX::zero();
        assert_eq!(seminorm_pk(&zero, &kb, 9), 0.0);

        // zeta = u: sup 1 plus first-derivative max 1.
        let z: Eval3 = Arc::new(|_, _, _| 0.0);
        let u_only = EntropyTX {
            e: Arc::new(|_, _, u| u),
            de_dt: z.clone(),
            de_dx: z.clone(),
            de_du: Arc::new(|_, _, _| 1.0),
            d2e_dtdu: z.clone(),
            d2e_dxdu: z.clone(),
            d2e_dudu: Some(z.clone()),
            d3e_dtduu: None,
            d3e_dxduu: None,
            t_support: (0.0, 1.0),
            x_support: (0.0, 1.0),
        };
        assert!((seminorm_pk(&u_only, &kb, 33) - 2.0).abs() < 1e-12);

        // zeta = t u: adds the mixed dtdu term.
        let tu = EntropyTX {
            e: Arc::new(|t, _, u| t * u),
            de_dt: Arc::new(|_, _, u| u),
            de_dx: z.clone(),
            de_du: Arc::new(|t, _, _| t),
            d2e_dtdu: Arc::new(|_, _, _| 1.0),
            d2e_dxdu: z.clone(),
            d2e_dudu: Some(z),
            d3e_dtduu: None,
            d3e_dxduu: None,
            t_support: (0.0, 1.0),
            x_support: (0.0, 1.0),
        };
        assert!((seminorm_pk(&tu, &kb, 33) - 3.0).abs() < 1e-12);
    }

    #[test]
    fn c2_derivative_consistency() {
        let e = Entropy1D::cosine();
        let h = 1e-5;
        for u in [-1.2, 0.0, 0.8] {
            let fd = (e.eval(u + h) - e.eval(u - h)) / (2.0 * h);
            assert!((e.deriv(u, &spec()) - fd).abs() < 1e-6);
        }
    }
}
