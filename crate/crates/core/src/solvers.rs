//! Reference solutions (Riemann problems for Burgers, characteristic
//! solutions for linear-in-u fluxes) and a first-order finite-volume
//! scheme producing grid fields.

use std::sync::Arc;

use crate::error::{Error, Result};
use crate::fields::{AnalyticPiecewiseField, GridField, InitialDatum, Region};
use crate::flux::{FluxFunction, SourceFunction};

/// Entropy solution of the Burgers Riemann problem (u_l, u_r):
/// a shock at the Rankine-Hugoniot speed for u_l > u_r, otherwise a
/// centered rarefaction fan.
pub fn riemann_burgers(u_l: f64, u_r: f64, t_end: f64) -> Result<AnalyticPiecewiseField> {
    let range = (u_l.min(u_r), u_l.max(u_r));
    if u_l > u_r {
        let s = 0.5 * (u_l + u_r);
        AnalyticPiecewiseField::new(
            vec![Region::Constant(u_l), Region::Constant(u_r)],
            vec![Arc::new(move |t: f64| s * t)],
            range,
            t_end,
        )
    } else if u_l < u_r {
        AnalyticPiecewiseField::new(
            vec![Region::Constant(u_l), Region::Fan { x_origin: 0.0 }, Region::Constant(u_r)],
            vec![Arc::new(move |t: f64| u_l * t), Arc::new(move |t: f64| u_r * t)],
            range,
            t_end,
        )
    } else {
        Ok(AnalyticPiecewiseField::constant(u_l, t_end))
    }
}

/// Weak but non-entropic solution: an upward jump u_l < u_r propagated
/// as a single discontinuity at the Rankine-Hugoniot speed.
pub fn nonentropic_shock_burgers(u_l: f64, u_r: f64, t_end: f64) -> Result<AnalyticPiecewiseField> {
    if u_l >= u_r {
        return Err(Error::InvalidArgument(
            "a downward jump would be the entropic shock; need u_l < u_r".into(),
        ));
    }
    let s = 0.5 * (u_l + u_r);
    AnalyticPiecewiseField::new(
        vec![Region::Constant(u_l), Region::Constant(u_r)],
        vec![Arc::new(move |t: f64| s * t)],
        (u_l, u_r),
        t_end,
    )
}

/// A two-state jump moved at an arbitrary speed; not a weak solution
/// unless `speed` happens to satisfy Rankine-Hugoniot.
pub fn shock_with_speed(u_l: f64, u_r: f64, speed: f64, t_end: f64) -> Result<AnalyticPiecewiseField> {
    AnalyticPiecewiseField::new(
        vec![Region::Constant(u_l), Region::Constant(u_r)],
        vec![Arc::new(move |t: f64| speed * t)],
        (u_l.min(u_r), u_l.max(u_r)),
        t_end,
    )
}

/// Riemann datum with the jump at x = 0.
pub fn riemann_datum(u_l: f64, u_r: f64) -> InitialDatum {
    if u_l == u_r {
        InitialDatum::constant(u_l)
    } else {
        InitialDatum::piecewise_constant(vec![0.0], vec![u_l, u_r]).unwrap()
    }
}

/// The C^3 profile w(s) = (1 - (s - 1)^2)^4 on (0, 2), zero elsewhere.
pub fn bump_profile(s: f64) -> f64 {
    let q = 1.0 - (s - 1.0) * (s - 1.0);
    if q > 0.0 {
        q.powi(4)
    } else {
        0.0
    }
}

/// Strong solution of u_t + (x^2 u)_x = 2 x u, i.e. u_t + x^2 u_x = 0:
/// the backward characteristic variable is s = t + 1/x, so
/// u(t, x) = w(t + 1/x) for x < 0 and 0 for x >= 0. The support stays in
/// {x < -1 / (t ...)}, and u is C^3 across its boundary.
pub fn quadratic_transport_solution(t_end: f64) -> AnalyticPiecewiseField {
    let formula = Arc::new(|t: f64, x: f64| {
        if x < 0.0 {
            bump_profile(t + 1.0 / x)
        } else {
            0.0
        }
    });
    // w = k on (0, 2) at s = 1 -+ sqrt(1 - k^(1/4)); map back via
    // x = 1 / (s - t), keeping the negative branch.
    let level_crossing = Arc::new(move |t: f64, k: f64| {
        let mut out = Vec::new();
        if k > 0.0 && k < 1.0 {
            let r = (1.0 - k.powf(0.25)).sqrt();
            for s in [1.0 - r, 1.0 + r] {
                if s - t < 0.0 {
                    out.push(1.0 / (s - t));
                }
            }
        }
        out
    });
    AnalyticPiecewiseField::new(
        vec![Region::Smooth { formula, level_crossing: Some(level_crossing) }],
        vec![],
        (0.0, 1.0),
        t_end,
    )
    .unwrap()
}

/// Initial trace of [`quadratic_transport_solution`].
pub fn quadratic_transport_datum() -> InitialDatum {
    InitialDatum::smooth(
        Arc::new(|x| if x < 0.0 { bump_profile(1.0 / x) } else { 0.0 }),
        (0.0, 1.0),
    )
}

/// Advected profile u(t, x) = p(x - c t) for f = c u.
pub fn advection_solution(
    c: f64,
    profile: Arc<dyn Fn(f64) -> f64 + Send + Sync>,
    range: (f64, f64),
    t_end: f64,
) -> AnalyticPiecewiseField {
    let p = profile.clone();
    AnalyticPiecewiseField::new(
        vec![Region::Smooth {
            formula: Arc::new(move |t, x| p(x - c * t)),
            level_crossing: None,
        }],
        vec![],
        range,
        t_end,
    )
    .unwrap()
}

/// u(t, x) = u0(x) e^{-t} for f = 0, g = -u.
pub fn decay_solution(
    u0: Arc<dyn Fn(f64) -> f64 + Send + Sync>,
    range: (f64, f64),
    t_end: f64,
) -> AnalyticPiecewiseField {
    AnalyticPiecewiseField::new(
        vec![Region::Smooth {
            formula: Arc::new(move |t, x| u0(x) * (-t).exp()),
            level_crossing: None,
        }],
        vec![],
        range,
        t_end,
    )
    .unwrap()
}

/// Mesh and stability parameters for the finite-volume solver.
#[derive(Debug, Clone, Copy)]
pub struct FVConfig {
    pub x_lo: f64,
    pub x_hi: f64,
    pub n_cells: usize,
    pub t_end: f64,
    /// Courant number in (0, 1].
    pub cfl: f64,
    /// Any cell exceeding this magnitude aborts the run.
    pub blow_up_threshold: f64,
}

impl Default for FVConfig {
    fn default() -> Self {
        Self {
            x_lo: -2.0,
            x_hi: 2.0,
            n_cells: 200,
            t_end: 1.0,
            cfl: 0.45,
            blow_up_threshold: 1e6,
        }
    }
}

/// First-order local Lax-Friedrichs scheme with outflow boundaries.
/// The x-dependence of the flux enters through frozen interface
/// positions in the conservative difference; the source is applied with
/// a midpoint state. The time step is fixed from a CFL bound sampled
/// over the initial data's range (inflated 20%) and the mesh.
pub fn fv_solve(
    f: &FluxFunction,
    g: &SourceFunction,
    u0: &InitialDatum,
    cfg: &FVConfig,
) -> Result<GridField> {
    if !(cfg.cfl > 0.0 && cfg.cfl <= 1.0) {
        return Err(Error::CflViolation { dt: f64::NAN, limit: cfg.cfl });
    }
    if cfg.n_cells < 2 || !(cfg.x_hi > cfg.x_lo) || !(cfg.t_end > 0.0) {
        return Err(Error::InvalidArgument("degenerate finite-volume mesh".into()));
    }
    let dx = (cfg.x_hi - cfg.x_lo) / cfg.n_cells as f64;

    // Speed bound: sample |df/du| over the mesh and an inflated range.
    let (r0, r1) = u0.range();
    let pad = 0.2 * (r1 - r0).max(1.0);
    let mut alpha: f64 = 1e-12;
    for j in 0..=cfg.n_cells {
        let x = cfg.x_lo + j as f64 * dx;
        for n in 0..=16 {
            let u = r0 - pad + (r1 - r0 + 2.0 * pad) * n as f64 / 16.0;
            for t in [0.0, 0.5 * cfg.t_end, cfg.t_end] {
                alpha = alpha.max((f.df_du)(t, x, u).abs());
            }
        }
    }
    // Source stiffness bound over the same sample set, when declared.
    let mut beta: f64 = 1e-12;
    if let Some(dg) = &g.dg_du {
        for j in 0..=cfg.n_cells {
            let x = cfg.x_lo + j as f64 * dx;
            for n in 0..=16 {
                let u = r0 - pad + (r1 - r0 + 2.0 * pad) * n as f64 / 16.0;
                for t in [0.0, 0.5 * cfg.t_end, cfg.t_end] {
                    beta = beta.max(dg(t, x, u).abs());
                }
            }
        }
    }
    let dt_cfl = (cfg.cfl * dx / alpha).min(cfg.cfl / beta);
    let n_steps = (cfg.t_end / dt_cfl).ceil().max(1.0) as usize;
    let dt = cfg.t_end / n_steps as f64;

    let mut state: Vec<f64> = (0..cfg.n_cells)
        .map(|j| u0.eval(cfg.x_lo + (j as f64 + 0.5) * dx))
        .collect();
    let mut values = Vec::with_capacity(cfg.n_cells * n_steps);
    let mut fluxes = vec![0.0; cfg.n_cells + 1];

    for step in 0..n_steps {
        values.extend_from_slice(&state);
        let t = step as f64 * dt;
        for j in 0..=cfg.n_cells {
            let x = cfg.x_lo + j as f64 * dx;
            let ul = state[j.saturating_sub(1).min(cfg.n_cells - 1)];
            let ur = state[j.min(cfg.n_cells - 1)];
            let a = (f.df_du)(t, x, ul).abs().max((f.df_du)(t, x, ur).abs());
            fluxes[j] = 0.5 * ((f.f)(t, x, ul) + (f.f)(t, x, ur)) - 0.5 * a * (ur - ul);
        }
        for j in 0..cfg.n_cells {
            let x_c = cfg.x_lo + (j as f64 + 0.5) * dx;
            let transported = state[j] - dt / dx * (fluxes[j + 1] - fluxes[j]);
            let mid = 0.5 * (state[j] + transported);
            let next = transported + dt * (g.g)(t + 0.5 * dt, x_c, mid);
            if !next.is_finite() || next.abs() > cfg.blow_up_threshold {
                return Err(Error::BlowUp { step, value: next });
            }
            state[j] = next;
        }
    }
    GridField::new(cfg.x_lo, dx, dt, cfg.n_cells, values)
}

/// Largest over- or undershoot of the grid values against the first
/// slab's range (zero for schemes satisfying the maximum principle with
/// zero sources).
pub fn max_principle_excess(grid: &GridField) -> f64 {
    let first = &grid.values[..grid.n_cells];
    let lo = first.iter().cloned().fold(f64::INFINITY, f64::min);
    let hi = first.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
    grid.values
        .iter()
        .map(|&v| (lo - v).max(v - hi).max(0.0))
        .fold(0.0, f64::max)
}

/// L1 distance between a grid field and a reference field at a fixed
/// time, sampled at cell midpoints.
pub fn l1_error_at(grid: &GridField, reference: &dyn crate::fields::Field, t: f64) -> f64 {
    let mut acc = 0.0;
    for j in 0..grid.n_cells {
        let x = grid.x_edge(j) + 0.5 * grid.dx;
        let gv = crate::fields::Field::eval(grid, t, x).value;
        acc += (gv - reference.eval(t, x).value).abs() * grid.dx;
    }
    acc
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::domain::TestFunction;
    use crate::fields::Field;
    use crate::production::solution_residual;
    use crate::quad::QuadratureSpec;

    fn spec() -> QuadratureSpec {
        QuadratureSpec::default()
    }

    fn phis() -> Vec<TestFunction> {
        vec![TestFunction::new(1.0, 0.9, 0.3, 0.9), TestFunction::new(0.7, 0.6, -0.2, 0.7)]
    }

    #[test]
    fn rarefaction_is_a_weak_solution() {
        let u = riemann_burgers(0.0, 1.0, 4.0).unwrap();
        let u0 = riemann_datum(0.0, 1.0);
        let f = FluxFunction::burgers();
        let g = SourceFunction::zero();
        let r = solution_residual(&u, &u0, &f, &g, &phis(), &spec()).unwrap();
        assert!(r < 1e-10, "residual {r}");
    }

    #[test]
    fn nonentropic_shock_is_still_weak() {
        let u = nonentropic_shock_burgers(0.0, 1.0, 4.0).unwrap();
        let u0 = riemann_datum(0.0, 1.0);
        let f = FluxFunction::burgers();
        let g = SourceFunction::zero();
        let r = solution_residual(&u, &u0, &f, &g, &phis(), &spec()).unwrap();
        assert!(r < 1e-10, "residual {r}");
        assert!(nonentropic_shock_burgers(1.0, 0.0, 4.0).is_err());
    }

    #[test]
    fn wrong_speed_is_not_a_solution() {
        let u = shock_with_speed(1.0, 0.0, 0.9, 4.0).unwrap();
        let u0 = riemann_datum(1.0, 0.0);
        let f = FluxFunction::burgers();
        let g = SourceFunction::zero();
        let r = solution_residual(&u, &u0, &f, &g, &phis(), &spec()).unwrap();
        assert!(r > 1e-3, "residual {r}");
    }

    #[test]
    fn quadratic_transport_pointwise_residual() {
        let u = quadratic_transport_solution(2.0);
        let h = 1e-5;
        let mut worst = 0.0f64;
        for i in 0..200 {
            let t = 0.1 + 1.5 * (i as f64 * 0.618_033_988_749) % 1.5;
            let x = -3.0 + 2.8 * ((i as f64 * 0.414_213_562_37) % 1.0);
            let ut = (u.eval(t + h, x).value - u.eval(t - h, x).value) / (2.0 * h);
            let ux = (u.eval(t, x + h).value - u.eval(t, x - h).value) / (2.0 * h);
            worst = worst.max((ut + x * x * ux).abs());
        }
        assert!(worst < 1e-4, "pointwise residual {worst}");
    }

    #[test]
    fn quadratic_transport_weak_residual() {
        let u = quadratic_transport_solution(3.0);
        let u0 = quadratic_transport_datum();
        let f = FluxFunction::linear_x2();
        let g = SourceFunction::linear_x2();
        let phis = vec![
            TestFunction::new(1.0, 0.9, -1.2, 0.9),
            TestFunction::new(1.5, 1.2, -0.8, 0.6),
        ];
        let r = solution_residual(&u, &u0, &f, &g, &phis, &spec()).unwrap();
        assert!(r < 1e-9, "residual {r}");
    }

    #[test]
    fn decay_weak_residual() {
        let u0f = Arc::new(|x: f64| bump_profile(x + 1.0));
        let u = decay_solution(u0f.clone(), (0.0, 1.0), 3.0);
        let u0 = InitialDatum::smooth(u0f, (0.0, 1.0));
        let f = FluxFunction::advection(0.0);
        let g = SourceFunction::decay();
        let r = solution_residual(&u, &u0, &f, &g, &phis(), &spec()).unwrap();
        assert!(r < 1e-10, "residual {r}");
    }

    #[test]
    fn fv_burgers_max_principle_and_convergence() {
        let u0 = riemann_datum(1.0, 0.0);
        let f = FluxFunction::burgers();
        let g = SourceFunction::zero();
        let exact = riemann_burgers(1.0, 0.0, 2.0).unwrap();
        let mut errs = Vec::new();
        for n in [100, 200, 400] {
            let cfg = FVConfig { n_cells: n, t_end: 1.0, ..FVConfig::default() };
            let grid = fv_solve(&f, &g, &u0, &cfg).unwrap();
            assert!(max_principle_excess(&grid) < 1e-12);
            errs.push(l1_error_at(&grid, &exact, 0.999));
        }
        assert!(errs[2] < errs[1] && errs[1] < errs[0], "errors {errs:?}");
    }

    #[test]
    fn fv_blow_up_detection() {
        // u_t = u^2 from u = 1 blows up at t = 1.
        let u0 = InitialDatum::constant(1.0);
        let f = FluxFunction::advection(0.0);
        let g = SourceFunction {
            g: Arc::new(|_, _, u| u * u),
            dg_du: Some(Arc::new(|_, _, u| 2.0 * u)),
        };
        let cfg = FVConfig { t_end: 3.0, blow_up_threshold: 1e4, ..FVConfig::default() };
        match fv_solve(&f, &g, &u0, &cfg) {
            Err(Error::BlowUp { .. }) => {}
            other => panic!("expected blow-up, got {other:?}"),
        }
    }

    #[test]
    fn fv_rejects_bad_cfl() {
        let u0 = InitialDatum::constant(0.0);
        let f = FluxFunction::burgers();
        let g = SourceFunction::zero();
        let cfg = FVConfig { cfl: 1.5, ..FVConfig::default() };
        assert!(matches!(fv_solve(&f, &g, &u0, &cfg), Err(Error::CflViolation { .. })));
    }
}
