//! Flux and source functions with the derivative surface the production
//! functionals need: f, df/du, div_x f, d2f/dtdu, d2f/dxdu.

use std::sync::Arc;

use crate::domain::sign;
use crate::error::{Error, Result};

type Eval3 = Arc<dyn Fn(f64, f64, f64) -> f64 + Send + Sync>;

/// Scalar flux f(t, x, u) on a 1-D strip, with first and mixed second
/// derivatives available in closed form.
#[derive(Clone)]
pub struct FluxFunction {
    pub f: Eval3,
    pub df_du: Eval3,
    /// div_x f, i.e. the partial x-derivative at fixed u.
    pub df_dx: Eval3,
    pub d2f_dtdu: Eval3,
    pub d2f_dxdu: Eval3,
    /// True when f does not depend on x (enables fast grid paths).
    pub x_independent: bool,
}

impl FluxFunction {
    /// Burgers flux f = u^2 / 2.
    pub fn burgers() -> Self {
        Self {
            f: Arc::new(|_, _, u| 0.5 * u * u),
            df_du: Arc::new(|_, _, u| u),
            df_dx: Arc::new(|_, _, _| 0.0),
            d2f_dtdu: Arc::new(|_, _, _| 0.0),
            d2f_dxdu: Arc::new(|_, _, _| 0.0),
            x_independent: true,
        }
    }

    /// f = x^2 u; pairs with the source g = 2 x u to make the transport
    /// equation u_t + x^2 u_x = 0.
    pub fn linear_x2() -> Self {
        Self {
            f: Arc::new(|_, x, u| x * x * u),
            df_du: Arc::new(|_, x, _| x * x),
            df_dx: Arc::new(|_, x, u| 2.0 * x * u),
            d2f_dtdu: Arc::new(|_, _, _| 0.0),
            d2f_dxdu: Arc::new(|_, x, _| 2.0 * x),
            x_independent: false,
        }
    }

    /// Linear advection f = c u.
    pub fn advection(c: f64) -> Self {
        Self {
            f: Arc::new(move |_, _, u| c * u),
            df_du: Arc::new(move |_, _, _| c),
            df_dx: Arc::new(|_, _, _| 0.0),
            d2f_dtdu: Arc::new(|_, _, _| 0.0),
            d2f_dxdu: Arc::new(|_, _, _| 0.0),
            x_independent: true,
        }
    }

    /// Separable flux sum a_i(t, x) * b_i(u).
    pub fn separable(terms: Vec<SeparableTerm>) -> Self {
        let t1 = terms.clone();
        let t2 = terms.clone();
        let t3 = terms.clone();
        let t4 = terms.clone();
        let t5 = terms.clone();
        let x_independent = terms.iter().all(|term| term.a.x_independent());
        Self {
            f: Arc::new(move |t, x, u| t1.iter().map(|s| s.a.eval(t, x) * s.b.eval(u)).sum()),
            df_du: Arc::new(move |t, x, u| {
                t2.iter().map(|s| s.a.eval(t, x) * s.b.deriv(u)).sum()
            }),
            df_dx: Arc::new(move |t, x, u| {
                t3.iter().map(|s| s.a.dx(t, x) * s.b.eval(u)).sum()
            }),
            d2f_dtdu: Arc::new(move |t, x, u| {
                t4.iter().map(|s| s.a.dt(t, x) * s.b.deriv(u)).sum()
            }),
            d2f_dxdu: Arc::new(move |t, x, u| {
                t5.iter().map(|s| s.a.dx(t, x) * s.b.deriv(u)).sum()
            }),
            x_independent,
        }
    }

    pub fn builtin(name: &str) -> Result<Self> {
        match name {
            "burgers" => Ok(Self::burgers()),
            "linear_x2" => Ok(Self::linear_x2()),
            other => Err(Error::UnknownName(format!("flux `{other}`"))),
        }
    }
}

/// One separable addend a(t, x) * b(u).
#[derive(Debug, Clone)]
pub struct SeparableTerm {
    pub a: CoefficientFn,
    pub b: ProfileFn,
}

/// Coefficient in (t, x): dense monomial array `coeffs[i][j] t^i x^j`.
#[derive(Debug, Clone)]
pub struct CoefficientFn {
    pub coeffs: Vec<Vec<f64>>,
}

impl CoefficientFn {
    pub fn eval(&self, t: f64, x: f64) -> f64 {
        let mut acc = 0.0;
        let mut tp = 1.0;
        for row in &self.coeffs {
            let mut xs = 1.0;
            for &c in row {
                acc += c * tp * xs;
                xs *= x;
            }
            tp *= t;
        }
        acc
    }

    pub fn dt(&self, t: f64, x: f64) -> f64 {
        let mut acc = 0.0;
        let mut tp = 1.0;
        for (i, row) in self.coeffs.iter().enumerate().skip(1) {
            let mut xs = 1.0;
            for &c in row {
                acc += c * i as f64 * tp * xs;
                xs *= x;
            }
            if i >= 1 {
                tp *= t;
            }
        }
        acc
    }

    pub fn dx(&self, t: f64, x: f64) -> f64 {
        let mut acc = 0.0;
        let mut tp = 1.0;
        for row in &self.coeffs {
            let mut xs = 1.0;
            for (j, &c) in row.iter().enumerate().skip(1) {
                acc += c * j as f64 * tp * xs;
                if j >= 1 {
                    xs *= x;
                }
            }
            tp *= t;
        }
        acc
    }

    fn x_independent(&self) -> bool {
        self.coeffs.iter().all(|row| row.len() <= 1)
    }
}

/// Profile in u: polynomial or trigonometric factor.
#[derive(Debug, Clone)]
pub enum ProfileFn {
    /// coeffs[m] u^m
    Poly(Vec<f64>),
    Cos { freq: f64 },
    Sin { freq: f64 },
}

impl ProfileFn {
    pub fn eval(&self, u: f64) -> f64 {
        match self {
            ProfileFn::Poly(c) => c.iter().rev().fold(0.0, |acc, &ci| acc * u + ci),
            ProfileFn::Cos { freq } => (freq * u).cos(),
            ProfileFn::Sin { freq } => (freq * u).sin(),
        }
    }

    pub fn deriv(&self, u: f64) -> f64 {
        match self {
            ProfileFn::Poly(c) => {
                let mut acc = 0.0;
                for (m, &cm) in c.iter().enumerate().skip(1) {
                    acc += cm * m as f64 * u.powi(m as i32 - 1);
                }
                acc
            }
            ProfileFn::Cos { freq } => -freq * (freq * u).sin(),
            ProfileFn::Sin { freq } => freq * (freq * u).cos(),
        }
    }
}

/// Source term g(t, x, u).
#[derive(Clone)]
pub struct SourceFunction {
    pub g: Eval3,
    pub dg_du: Option<Eval3>,
}

impl SourceFunction {
    pub fn zero() -> Self {
        Self { g: Arc::new(|_, _, _| 0.0), dg_du: Some(Arc::new(|_, _, _| 0.0)) }
    }

    /// g = 2 x u, the partner of [`FluxFunction::linear_x2`].
    pub fn linear_x2() -> Self {
        Self { g: Arc::new(|_, x, u| 2.0 * x * u), dg_du: Some(Arc::new(|_, x, _| 2.0 * x)) }
    }

    /// g = -u (exponential decay).
    pub fn decay() -> Self {
        Self { g: Arc::new(|_, _, u| -u), dg_du: Some(Arc::new(|_, _, _| -1.0)) }
    }

    pub fn builtin(name: &str) -> Result<Self> {
        match name {
            "zero" => Ok(Self::zero()),
            "linear_x2" => Ok(Self::linear_x2()),
            "decay" => Ok(Self::decay()),
            other => Err(Error::UnknownName(format!("source `{other}`"))),
        }
    }
}

/// The Kruzkov flux jump sgn(u - k) (f(t,x,u) - f(t,x,k)).
pub fn phi_jump(f: &FluxFunction, t: f64, x: f64, u: f64, k: f64) -> f64 {
    sign(u - k) as f64 * ((f.f)(t, x, u) - (f.f)(t, x, k))
}
