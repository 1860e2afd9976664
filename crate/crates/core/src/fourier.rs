//! Fourier side of the Kruzkov curve: the xi-family of entropies
//!     E_xi(k) = -2 (e^{-i xi k} - 1 + i xi k) / xi^2
//! whose second derivative is 2 e^{-i xi k}, the transform
//! muhat(xi) = int mu_k(phi) e^{-i xi k} dk, and the moment expansion.

use std::io::Write;
use std::sync::Arc;

use num_complex::Complex64;

use crate::domain::SpaceTimeTest;
use crate::entropy::Entropy1D;
use crate::error::Result;
use crate::fields::{essential_range, Field, InitialDatum};
use crate::flux::{FluxFunction, SourceFunction};
use crate::production::{production, KruzkovSamples};
use crate::quad::QuadratureSpec;

/// Relative scale |xi| * k_max below which the closed form loses too many
/// digits to cancellation and the Taylor branch takes over.
pub const TAYLOR_SWITCH: f64 = 1e-3;

const I: Complex64 = Complex64 { re: 0.0, im: 1.0 };

/// Closed-form branch (do not call near xi = 0; see [`entropy_xi`]).
pub fn entropy_xi_exact(xi: Complex64) -> Entropy1D<Complex64> {
    let (x1, x2, x3) = (xi, xi, xi);
    Entropy1D::c2(
        Arc::new(move |k| {
            let z = (-I * x1 * k).exp();
            -2.0 * (z - 1.0 + I * x1 * k) / (x1 * x1)
        }),
        Arc::new(move |k| 2.0 * I / x2 * ((-I * x2 * k).exp() - 1.0)),
        Arc::new(move |k| 2.0 * (-I * x3 * k).exp()),
    )
}

/// Six-term Taylor branch, exact at xi = 0 (E_0(k) = k^2) and accurate to
/// machine precision while |xi k| stays below the switch threshold.
pub fn entropy_xi_taylor(xi: Complex64) -> Entropy1D<Complex64> {
    // E = -2 sum_{m=2}^{7} (-i)^m xi^{m-2} k^m / m!.
    let coeff: Vec<Complex64> = (2..=7)
        .map(|m| {
            let mut c = Complex64::new(-2.0, 0.0);
            for _ in 0..m {
                c *= -I;
            }
            c * xi.powu(m - 2)
        })
        .collect();
    let (c1, c2, c3) = (coeff.clone(), coeff.clone(), coeff);
    let fact = |m: u32| (1..=m).map(f64::from).product::<f64>();
    Entropy1D::c2(
        Arc::new(move |k: f64| {
            let mut acc = Complex64::default();
            for (i, c) in c1.iter().enumerate() {
                let m = (i + 2) as u32;
                acc += c * k.powi(m as i32) / fact(m);
            }
            acc
        }),
        Arc::new(move |k: f64| {
            let mut acc = Complex64::default();
            for (i, c) in c2.iter().enumerate() {
                let m = (i + 2) as u32;
                acc += c * k.powi(m as i32 - 1) / fact(m - 1);
            }
            acc
        }),
        Arc::new(move |k: f64| {
            let mut acc = Complex64::default();
            for (i, c) in c3.iter().enumerate() {
                let m = (i + 2) as u32;
                acc += c * k.powi(m as i32 - 2) / fact(m.saturating_sub(2));
            }
            acc
        }),
    )
}

/// The xi-entropy, branch-selected by |xi| k_max.
pub fn entropy_xi(xi: Complex64, k_max: f64) -> Entropy1D<Complex64> {
    if xi.norm() * k_max.abs() < TAYLOR_SWITCH {
        entropy_xi_taylor(xi)
    } else {
        entropy_xi_exact(xi)
    }
}

/// muhat(xi) from precomputed Kruzkov samples.
pub fn mu_hat(samples: &KruzkovSamples, xi: Complex64) -> Complex64 {
    samples.integrate_against(&|k| (-I * xi * k).exp())
}

/// muhat(xi) obtained instead from the complex production of E_xi,
/// corrected by the affine boundary term of the representation formula.
pub fn mu_hat_via_entropy(
    xi: Complex64,
    u: &dyn Field,
    u0: &InitialDatum,
    f: &FluxFunction,
    g: &SourceFunction,
    phi: &dyn SpaceTimeTest,
    spec: &QuadratureSpec,
) -> Result<Complex64> {
    let (a, b) = essential_range(u, u0);
    let k_max = a.abs().max(b.abs());
    let e = entropy_xi(xi, k_max);
    let m = production(&e, u, u0, f, g, phi, spec)?.value;
    let id = Entropy1D::identity();
    let m_id = production(&id, u, u0, f, g, phi, spec)?.value;
    let boundary = 0.5 * (e.deriv(a, spec) + e.deriv(b, spec)) * m_id;
    Ok(m - boundary)
}

/// One xi-row of the Fourier identity check.
#[derive(Debug, Clone, Copy)]
pub struct FourierRow {
    pub xi: Complex64,
    pub muhat: Complex64,
    pub via_entropy: Complex64,
    pub abs_err: f64,
}

pub fn fourier_check(
    xis: &[Complex64],
    samples: &KruzkovSamples,
    u: &dyn Field,
    u0: &InitialDatum,
    f: &FluxFunction,
    g: &SourceFunction,
    phi: &dyn SpaceTimeTest,
    spec: &QuadratureSpec,
) -> Result<Vec<FourierRow>> {
    let mut rows = Vec::with_capacity(xis.len());
    for &xi in xis {
        let muhat = mu_hat(samples, xi);
        let via = mu_hat_via_entropy(xi, u, u0, f, g, phi, spec)?;
        rows.push(FourierRow { xi, muhat, via_entropy: via, abs_err: (muhat - via).norm() });
    }
    Ok(rows)
}

pub fn write_rows_csv<W: Write>(rows: &[FourierRow], mut w: W) -> Result<()> {
    w.write_all(b"xi_re,xi_im,muhat_re,muhat_im,viaE_re,viaE_im,abs_err\n")?;
    for r in rows {
        writeln!(
            w,
            "{:e},{:e},{:e},{:e},{:e},{:e},{:e}",
            r.xi.re, r.xi.im, r.muhat.re, r.muhat.im, r.via_entropy.re, r.via_entropy.im, r.abs_err
        )?;
    }
    Ok(())
}

/// Derivative moments of the curve at xi = 0:
/// a_nu = (-i)^nu / nu! * int k^nu mu_k dk, so that
/// muhat(xi) = sum_nu a_nu xi^nu.
pub fn moment_series(samples: &KruzkovSamples, count: usize) -> Vec<Complex64> {
    let mut out = Vec::with_capacity(count);
    let mut pref = Complex64::new(1.0, 0.0);
    for nu in 0..count {
        if nu > 0 {
            pref *= -I / nu as f64;
        }
        let m: Complex64 =
            samples.integrate_against(&|k: f64| Complex64::new(k.powi(nu as i32), 0.0));
        out.push(pref * m);
    }
    out
}
