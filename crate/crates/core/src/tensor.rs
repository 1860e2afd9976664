//! Separable polynomial approximation of a test entropy zeta(t, x, u),
//! given on the doubled box 2K, by convolution with a Landau-type
//! kernel: on the target box K the smoothed function is exactly a
//! polynomial of degree <= 2 nu per variable, emitted as a sum of
//! u-monomial terms with (t, x) polynomial coefficients.

use serde_json::json;
use std::sync::Arc;

use crate::entropy::{BoxTXU, EntropyTX};
use crate::error::{Error, Result};
use crate::quad::gauss_rule;

/// rho_nu(xi) = c_nu (1 - (xi / 3R)^2)^nu on |xi| <= 3R, zero outside.
#[derive(Debug, Clone, Copy)]
pub struct LandauKernel {
    pub nu: u32,
    pub radius: f64,
    pub c: f64,
}

pub fn landau_kernel(nu: u32, radius: f64) -> Result<LandauKernel> {
    if nu < 1 || !(radius > 0.0) {
        return Err(Error::InvalidArgument("kernel needs nu >= 1 and R > 0".into()));
    }
    // int_{-1}^{1} (1 - v^2)^nu dv by the recurrence I_nu = I_{nu-1} 2nu/(2nu+1).
    let mut i_nu = 2.0;
    for m in 1..=nu {
        i_nu *= 2.0 * m as f64 / (2.0 * m as f64 + 1.0);
    }
    Ok(LandauKernel { nu, radius, c: 1.0 / (3.0 * radius * i_nu) })
}

impl LandauKernel {
    pub fn eval(&self, xi: f64) -> f64 {
        let v = xi / (3.0 * self.radius);
        let q = 1.0 - v * v;
        if q > 0.0 {
            self.c * q.powi(self.nu as i32)
        } else {
            0.0
        }
    }

    /// The polynomial branch without the support restriction (what the
    /// exactness argument integrates against).
    fn eval_poly(&self, xi: f64) -> f64 {
        let v = xi / (3.0 * self.radius);
        self.c * (1.0 - v * v).powi(self.nu as i32)
    }
}

/// Even C^1 reflection of an entropy across t = 0:
/// zeta_bar(t) = zeta(t) for t >= 0 and 2 zeta(0) - zeta(-t) below.
pub fn reflect_in_t(zeta: &EntropyTX) -> EntropyTX {
    let z = zeta.clone();
    let wrap = |pick: fn(&EntropyTX) -> &Arc<dyn Fn(f64, f64, f64) -> f64 + Send + Sync>,
                sign_flip: bool,
                reflect_base: bool| {
        let z = z.clone();
        let g: Arc<dyn Fn(f64, f64, f64) -> f64 + Send + Sync> =
            Arc::new(move |t: f64, x: f64, u: f64| {
                if t >= 0.0 {
                    pick(&z)(t, x, u)
                } else if reflect_base {
                    2.0 * pick(&z)(0.0, x, u) - pick(&z)(-t, x, u)
                } else if sign_flip {
                    pick(&z)(-t, x, u)
                } else {
                    2.0 * pick(&z)(0.0, x, u) - pick(&z)(-t, x, u)
                }
            });
        g
    };
    // Quantities even in the reflection (values, pure x/u derivatives)
    // reflect as 2 f(0) - f(-t); t-derivatives flip to +f'(-t).
    EntropyTX {
        e: wrap(|z| &z.e, false, true),
        de_dt: wrap(|z| &z.de_dt, true, false),
        de_dx: wrap(|z| &z.de_dx, false, true),
        de_du: wrap(|z| &z.de_du, false, true),
        d2e_dtdu: wrap(|z| &z.d2e_dtdu, true, false),
        d2e_dxdu: wrap(|z| &z.d2e_dxdu, false, true),
        d2e_dudu: zeta.d2e_dudu.clone().map(|f| {
            let f2 = f.clone();
            Arc::new(move |t: f64, x: f64, u: f64| {
                if t >= 0.0 {
                    f(t, x, u)
                } else {
                    2.0 * f2(0.0, x, u) - f2(-t, x, u)
                }
            }) as Arc<dyn Fn(f64, f64, f64) -> f64 + Send + Sync>
        }),
        d3e_dtduu: None,
        d3e_dxduu: None,
        t_support: (-zeta.t_support.1, zeta.t_support.1),
        x_support: zeta.x_support,
    }
}

/// Sum over u-powers of P_m(that, xhat) * uhat^m with the (t, x)
/// coefficients as dense monomial arrays in the scaled coordinates
/// that = (t - center)/half etc.
#[derive(Debug, Clone)]
pub struct SeparableFunction {
    pub center: [f64; 3],
    pub half: [f64; 3],
    /// terms[m][i][j]: coefficient of that^i xhat^j uhat^m.
    pub terms: Vec<Vec<Vec<f64>>>,
}

impl SeparableFunction {
    fn scale(&self, t: f64, x: f64, u: f64) -> (f64, f64, f64) {
        (
            (t - self.center[0]) / self.half[0],
            (x - self.center[1]) / self.half[1],
            (u - self.center[2]) / self.half[2],
        )
    }

    /// Partial derivative of order (dt, dx, du), each 0..=2.
    pub fn eval_partial(&self, dt: u32, dx: u32, du: u32, t: f64, x: f64, u: f64) -> f64 {
        let (th, xh, uh) = self.scale(t, x, u);
        let mut acc = 0.0;
        for (m, plane) in self.terms.iter().enumerate() {
            let m = m as u32;
            if du > m {
                continue;
            }
            // d^du/du^du of uhat^m with the chain factor folded in later.
            let mut upart = uh.powi((m - du) as i32);
            for r in 0..du {
                upart *= (m - r) as f64;
            }
            let mut txpart = 0.0;
            for (i, row) in plane.iter().enumerate() {
                let i = i as u32;
                if dt > i {
                    continue;
                }
                let mut tp = th.powi((i - dt) as i32);
                for r in 0..dt {
                    tp *= (i - r) as f64;
                }
                for (j, &c) in row.iter().enumerate() {
                    let j = j as u32;
                    if dx > j || c == 0.0 {
                        continue;
                    }
                    let mut xp = xh.powi((j - dx) as i32);
                    for r in 0..dx {
                        xp *= (j - r) as f64;
                    }
                    txpart += c * tp * xp;
                }
            }
            acc += txpart * upart;
        }
        acc / self.half[0].powi(dt as i32)
            / self.half[1].powi(dx as i32)
            / self.half[2].powi(du as i32)
    }

    pub fn eval(&self, t: f64, x: f64, u: f64) -> f64 {
        self.eval_partial(0, 0, 0, t, x, u)
    }

    pub fn max_u_power(&self) -> usize {
        self.terms.len().saturating_sub(1)
    }

    /// Wrap as a (t,x)-entropy with the full derivative surface.
    pub fn to_entropy_tx(&self, t_support: (f64, f64), x_support: (f64, f64)) -> EntropyTX {
        let mk = |dt: u32, dx: u32, du: u32| {
            let s = self.clone();
            Arc::new(move |t: f64, x: f64, u: f64| s.eval_partial(dt, dx, du, t, x, u))
                as Arc<dyn Fn(f64, f64, f64) -> f64 + Send + Sync>
        };
        EntropyTX {
            e: mk(0, 0, 0),
            de_dt: mk(1, 0, 0),
            de_dx: mk(0, 1, 0),
            de_du: mk(0, 0, 1),
            d2e_dtdu: mk(1, 0, 1),
            d2e_dxdu: mk(0, 1, 1),
            d2e_dudu: Some(mk(0, 0, 2)),
            d3e_dtduu: Some(mk(1, 0, 2)),
            d3e_dxduu: Some(mk(0, 1, 2)),
            t_support,
            x_support,
        }
    }

    /// One JSON object per u-power, coefficients as dense monomial
    /// arrays in the scaled (t, x) variables.
    pub fn to_json(&self) -> serde_json::Value {
        let terms: Vec<_> = self
            .terms
            .iter()
            .enumerate()
            .map(|(m, plane)| json!({ "u_power": m, "coefficients": plane }))
            .collect();
        json!({
            "center": self.center,
            "half_width": self.half,
            "terms": terms,
        })
    }
}

/// Chebyshev points of the second kind on [-1, 1], descending.
fn cheb_nodes(n: usize) -> Vec<f64> {
    (0..=n).map(|i| (std::f64::consts::PI * i as f64 / n as f64).cos()).collect()
}

/// Interpolation coefficients in the Chebyshev basis from values at the
/// second-kind nodes (type-I discrete cosine transform).
fn cheb_coeffs(values: &[f64]) -> Vec<f64> {
    let n = values.len() - 1;
    let mut out = vec![0.0; n + 1];
    for (j, o) in out.iter_mut().enumerate() {
        let mut acc = 0.0;
        for (i, &v) in values.iter().enumerate() {
            let w = if i == 0 || i == n { 0.5 } else { 1.0 };
            acc += w * v * (std::f64::consts::PI * (i * j) as f64 / n as f64).cos();
        }
        let edge = if j == 0 || j == n { 0.5 } else { 1.0 };
        *o = acc * 2.0 * edge / n as f64;
    }
    out
}

/// Monomial coefficients of T_0..T_n via the three-term recurrence.
fn cheb_to_monomial_matrix(n: usize) -> Vec<Vec<f64>> {
    let mut rows: Vec<Vec<f64>> = Vec::with_capacity(n + 1);
    rows.push(vec![1.0]);
    if n >= 1 {
        rows.push(vec![0.0, 1.0]);
    }
    for j in 2..=n {
        let mut next = vec![0.0; j + 1];
        for (p, &c) in rows[j - 1].iter().enumerate() {
            next[p + 1] += 2.0 * c;
        }
        for (p, &c) in rows[j - 2].iter().enumerate() {
            next[p] -= c;
        }
        rows.push(next);
    }
    rows
}

/// Degree cap of the emitted monomial representation: beyond this,
/// Chebyshev-to-monomial conversion amplifies roundoff faster than the
/// coefficients of a smooth input decay.
pub const DEGREE_CAP: usize = 30;

/// Convolve the entropy with the tensor Landau kernel over the doubled
/// box 2K and refit the result on K. The input must be defined on all of
/// 2K. For points of K the kernel never leaves its polynomial branch
/// (|t - s| <= 3 R_axis), so the output is exactly polynomial of degree
/// <= 2 nu per variable; the fit truncates at [`DEGREE_CAP`], which only
/// drops coefficients at roundoff level for smooth inputs.
pub fn tensor_approximate(zeta: &EntropyTX, k_box: &BoxTXU, nu: u32) -> Result<SeparableFunction> {
    if nu < 1 {
        return Err(Error::InvalidArgument("nu must be at least 1".into()));
    }
    let spans = [k_box.t, k_box.x, k_box.u];
    let mut center = [0.0; 3];
    let mut half = [0.0; 3];
    for a in 0..3 {
        if !(spans[a].1 > spans[a].0) {
            return Err(Error::InvalidArgument("degenerate approximation box".into()));
        }
        center[a] = 0.5 * (spans[a].0 + spans[a].1);
        half[a] = 0.5 * (spans[a].1 - spans[a].0);
    }
    // Per axis: kernel radius 3R = 3 * half-width, integration over 2K.
    let kernels = [
        landau_kernel(nu, half[0])?,
        landau_kernel(nu, half[1])?,
        landau_kernel(nu, half[2])?,
    ];

    let n_quad = (2 * nu + 8) as usize;
    let rule = gauss_rule(n_quad);
    // Composite quadrature over [-2, 2] in each normalized axis: four
    // unit panels with a full Gauss rule each, so narrow features of the
    // input are resolved without losing polynomial exactness.
    let mut qn: Vec<f64> = Vec::with_capacity(4 * n_quad);
    let mut qw: Vec<f64> = Vec::with_capacity(4 * n_quad);
    for panel in 0..4 {
        let lo = -2.0 + panel as f64;
        for (&z, &w) in rule.nodes.iter().zip(rule.weights.iter()) {
            qn.push(lo + 0.5 * (z + 1.0));
            qw.push(0.5 * w);
        }
    }

    let deg = (2 * nu as usize).min(DEGREE_CAP);
    let en = cheb_nodes(deg);

    // The input is required on the doubled box 2K directly; no cutoff is
    // applied (the kernel tail lost outside 2K vanishes geometrically in
    // nu, which is what makes the seminorm ladder decrease).
    let zeta_box = |sh: f64, yh: f64, wh: f64| {
        (zeta.e)(
            center[0] + half[0] * sh,
            center[1] + half[1] * yh,
            center[2] + half[2] * wh,
        )
    };

    // Cascade: contract the u, then x, then t quadrature axes. All
    // kernels are evaluated on the polynomial branch (valid since
    // |node - quad| <= 3 in normalized units). Kernel values against the
    // quadrature weights are tabulated once per axis.
    let nq = qn.len();
    let ne = en.len();
    // kmat[a][node * nq + q] = w_q * rho_a(half * (node - s_q)) * half
    // (the trailing half converts the normalized measure to physical).
    let kmat: Vec<Vec<f64>> = (0..3)
        .map(|a| {
            let mut m = vec![0.0; ne * nq];
            for (p, &node) in en.iter().enumerate() {
                for (q, (&s, &w)) in qn.iter().zip(qw.iter()).enumerate() {
                    m[p * nq + q] = w * kernels[a].eval_poly(half[a] * (node - s)) * half[a];
                }
            }
            m
        })
        .collect();

    // t1[(sq * nq + yq) * ne + pu]
    let mut t1 = vec![0.0; nq * nq * ne];
    for sq in 0..nq {
        for yq in 0..nq {
            let row = &mut t1[(sq * nq + yq) * ne..(sq * nq + yq + 1) * ne];
            for (wq, &w) in qn.iter().enumerate() {
                let z = zeta_box(qn[sq], qn[yq], w);
                if z == 0.0 {
                    continue;
                }
                for (pu, slot) in row.iter_mut().enumerate() {
                    *slot += z * kmat[2][pu * nq + wq];
                }
            }
        }
    }
    // t2[(sq * ne + jx) * ne + pu]
    let mut t2 = vec![0.0; nq * ne * ne];
    for sq in 0..nq {
        for yq in 0..nq {
            let src = &t1[(sq * nq + yq) * ne..(sq * nq + yq + 1) * ne];
            for jx in 0..ne {
                let k = kmat[1][jx * nq + yq];
                let dst = &mut t2[(sq * ne + jx) * ne..(sq * ne + jx + 1) * ne];
                for (slot, &v) in dst.iter_mut().zip(src.iter()) {
                    *slot += k * v;
                }
            }
        }
    }
    // values[(it * ne + jx) * ne + pu]
    let mut vals = vec![0.0; ne * ne * ne];
    for sq in 0..nq {
        for it in 0..ne {
            let k = kmat[0][it * nq + sq];
            for jx in 0..ne {
                let src = &t2[(sq * ne + jx) * ne..(sq * ne + jx + 1) * ne];
                let dst = &mut vals[(it * ne + jx) * ne..(it * ne + jx + 1) * ne];
                for (slot, &v) in dst.iter_mut().zip(src.iter()) {
                    *slot += k * v;
                }
            }
        }
    }

    // Chebyshev transform along each axis, then convert to monomials.
    let mut axis = vec![0.0; ne];
    for jx in 0..ne {
        for pu in 0..ne {
            for it in 0..ne {
                axis[it] = vals[(it * ne + jx) * ne + pu];
            }
            for (it, &c) in cheb_coeffs(&axis).iter().enumerate() {
                vals[(it * ne + jx) * ne + pu] = c;
            }
        }
    }
    for it in 0..ne {
        for pu in 0..ne {
            for jx in 0..ne {
                axis[jx] = vals[(it * ne + jx) * ne + pu];
            }
            for (jx, &c) in cheb_coeffs(&axis).iter().enumerate() {
                vals[(it * ne + jx) * ne + pu] = c;
            }
        }
    }
    for it in 0..ne {
        for jx in 0..ne {
            for pu in 0..ne {
                axis[pu] = vals[(it * ne + jx) * ne + pu];
            }
            for (pu, &c) in cheb_coeffs(&axis).iter().enumerate() {
                vals[(it * ne + jx) * ne + pu] = c;
            }
        }
    }

    // Coefficients at the numerical noise floor must be dropped before
    // leaving the Chebyshev basis: the monomial conversion factors grow
    // like 2^(i+j+m) across the three axes, which would turn roundoff-
    // level modes into large cancelling monomial coefficients.
    let floor = vals.iter().fold(0.0f64, |a, &c| a.max(c.abs())) * 1e-13;
    for c in vals.iter_mut() {
        if c.abs() < floor {
            *c = 0.0;
        }
    }

    let conv = cheb_to_monomial_matrix(deg);
    let mut mono = vec![vec![vec![0.0; ne]; ne]; ne]; // [m][i][j]
    for it in 0..ne {
        for jx in 0..ne {
            for pu in 0..ne {
                let c = vals[(it * ne + jx) * ne + pu];
                if c == 0.0 {
                    continue;
                }
                for (i, &a) in conv[it].iter().enumerate() {
                    if a == 0.0 {
                        continue;
                    }
                    for (j, &b) in conv[jx].iter().enumerate() {
                        if b == 0.0 {
                            continue;
                        }
                        for (m, &d) in conv[pu].iter().enumerate() {
                            mono[m][i][j] += c * a * b * d;
                        }
                    }
                }
            }
        }
    }
    Ok(SeparableFunction { center, half, terms: mono })
}

/// Pointwise difference of two entropies (for seminorm measurements).
pub fn entropy_difference(a: &EntropyTX, b: &EntropyTX) -> EntropyTX {
    fn sub(
        p: Arc<dyn Fn(f64, f64, f64) -> f64 + Send + Sync>,
        q: Arc<dyn Fn(f64, f64, f64) -> f64 + Send + Sync>,
    ) -> Arc<dyn Fn(f64, f64, f64) -> f64 + Send + Sync> {
        Arc::new(move |t, x, u| p(t, x, u) - q(t, x, u))
    }
    EntropyTX {
        e: sub(a.e.clone(), b.e.clone()),
        de_dt: sub(a.de_dt.clone(), b.de_dt.clone()),
        de_dx: sub(a.de_dx.clone(), b.de_dx.clone()),
        de_du: sub(a.de_du.clone(), b.de_du.clone()),
        d2e_dtdu: sub(a.d2e_dtdu.clone(), b.d2e_dtdu.clone()),
        d2e_dxdu: sub(a.d2e_dxdu.clone(), b.d2e_dxdu.clone()),
        d2e_dudu: match (a.d2e_dudu.clone(), b.d2e_dudu.clone()) {
            (Some(p), Some(q)) => Some(sub(p, q)),
            _ => None,
        },
        d3e_dtduu: None,
        d3e_dxduu: None,
        t_support: (
            a.t_support.0.min(b.t_support.0),
            a.t_support.1.max(b.t_support.1),
        ),
        x_support: (
            a.x_support.0.min(b.x_support.0),
            a.x_support.1.max(b.x_support.1),
        ),
    }
}
