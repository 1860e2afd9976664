//! Bounded field representations: analytic piecewise-smooth fields with
//! 1-D interface curves, finite-volume grid fields, and initial data.

use std::io::{BufRead, Write};
use std::sync::Arc;

use crate::error::{Error, Result};

/// Value of a field at a point together with the region it came from.
/// The region id makes sign evaluations exact at states equal to `k`:
/// constant regions return their stored state bit-for-bit.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct FieldValue {
    pub value: f64,
    pub region: usize,
}

/// A bounded measurable field u(t, x) restricted to the representations
/// the quadrature engine understands.
pub trait Field: Send + Sync {
    fn eval(&self, t: f64, x: f64) -> FieldValue;

    /// Append the x-positions where u(t, .) may be discontinuous or kinked.
    fn x_breakpoints(&self, t: f64, out: &mut Vec<f64>);

    /// Append the x-positions where u(t, .) crosses the level `k` inside
    /// non-constant regions (kinks of |u - k|).
    fn level_breakpoints(&self, t: f64, k: f64, out: &mut Vec<f64>);

    /// Fixed times where the time slices change character (grid slab
    /// edges); empty for analytic fields.
    fn t_breakpoints(&self) -> Vec<f64>;

    /// Declared constant states of the field, ascending: the kink set of
    /// k -> mu_k. Empty when too many distinct values exist.
    fn state_values(&self) -> Vec<f64>;

    /// Declared essential range.
    fn range(&self) -> (f64, f64);

    /// Downcast hook for the grid fast paths.
    fn as_grid(&self) -> Option<&GridField> {
        None
    }
}

/// One region of an [`AnalyticPiecewiseField`].
pub enum Region {
    Constant(f64),
    /// Self-similar fan u = (x - x0) / t between the enclosing interfaces.
    Fan { x_origin: f64 },
    /// Arbitrary smooth formula, with an optional solver for u(t, x) = k
    /// (returns the crossing positions at time t, possibly several).
    Smooth {
        formula: Arc<dyn Fn(f64, f64) -> f64 + Send + Sync>,
        level_crossing: Option<Arc<dyn Fn(f64, f64) -> Vec<f64> + Send + Sync>>,
    },
}

impl Region {
    fn eval(&self, t: f64, x: f64) -> f64 {
        match self {
            Region::Constant(c) => *c,
            Region::Fan { x_origin } => {
                if t > 0.0 {
                    (x - x_origin) / t
                } else {
                    0.0
                }
            }
            Region::Smooth { formula, .. } => formula(t, x),
        }
    }
}

/// Piecewise-smooth field on a 1-D strip: regions separated by ordered
/// non-crossing interface curves x = gamma_j(t). Region j occupies
/// gamma_j(t) <= x < gamma_{j+1}(t); points exactly on a curve belong to
/// the region on the right.
pub struct AnalyticPiecewiseField {
    regions: Vec<Region>,
    interfaces: Vec<Arc<dyn Fn(f64) -> f64 + Send + Sync>>,
    range: (f64, f64),
    t_end: f64,
}

impl AnalyticPiecewiseField {
    pub fn new(
        regions: Vec<Region>,
        interfaces: Vec<Arc<dyn Fn(f64) -> f64 + Send + Sync>>,
        range: (f64, f64),
        t_end: f64,
    ) -> Result<Self> {
        if regions.len() != interfaces.len() + 1 {
            return Err(Error::InvalidArgument(
                "need exactly one more region than interface".into(),
            ));
        }
        // Interfaces must not cross on [0, t_end]; sampled check.
        for i in 1..interfaces.len() {
            for s in 0..=64 {
                let t = t_end * s as f64 / 64.0;
                if interfaces[i - 1](t) > interfaces[i](t) + 1e-12 {
                    return Err(Error::InvalidArgument(format!(
                        "interfaces {i} and {} cross at t = {t}",
                        i - 1
                    )));
                }
            }
        }
        Ok(Self { regions, interfaces, range, t_end })
    }

    pub fn constant(c: f64, t_end: f64) -> Self {
        Self { regions: vec![Region::Constant(c)], interfaces: vec![], range: (c, c), t_end }
    }

    pub fn t_end(&self) -> f64 {
        self.t_end
    }

    fn region_index(&self, t: f64, x: f64) -> usize {
        let mut idx = 0;
        for g in &self.interfaces {
            if g(t) <= x {
                idx += 1;
            } else {
                break;
            }
        }
        idx
    }
}

impl Field for AnalyticPiecewiseField {
    fn eval(&self, t: f64, x: f64) -> FieldValue {
        let region = self.region_index(t, x);
        FieldValue { value: self.regions[region].eval(t, x), region }
    }

    fn x_breakpoints(&self, t: f64, out: &mut Vec<f64>) {
        for g in &self.interfaces {
            out.push(g(t));
        }
    }

    fn level_breakpoints(&self, t: f64, k: f64, out: &mut Vec<f64>) {
        for (j, region) in self.regions.iter().enumerate() {
            match region {
                Region::Constant(_) => {}
                Region::Fan { x_origin } => {
                    if t > 0.0 {
                        let x = x_origin + k * t;
                        // Only report crossings inside the fan's own span.
                        let lo = if j == 0 { f64::NEG_INFINITY } else { self.interfaces[j - 1](t) };
                        let hi = if j == self.regions.len() - 1 {
                            f64::INFINITY
                        } else {
                            self.interfaces[j](t)
                        };
                        if x > lo && x < hi {
                            out.push(x);
                        }
                    }
                }
                Region::Smooth { level_crossing, .. } => {
                    if let Some(solver) = level_crossing {
                        out.extend(solver(t, k));
                    }
                }
            }
        }
    }

    fn t_breakpoints(&self) -> Vec<f64> {
        Vec::new()
    }

    fn state_values(&self) -> Vec<f64> {
        let mut states: Vec<f64> = self
            .regions
            .iter()
            .filter_map(|r| match r {
                Region::Constant(c) => Some(*c),
                _ => None,
            })
            .collect();
        states.sort_by(|a, b| a.partial_cmp(b).unwrap());
        states.dedup();
        states
    }

    fn range(&self) -> (f64, f64) {
        self.range
    }
}

/// Uniform-mesh cell means with piecewise-constant space-time
/// reconstruction: constant on each slab `[t_m, t_{m+1}) x cell_j`.
/// Outside the mesh the nearest cell value extends (compactly perturbed
/// constants).
#[derive(Debug, Clone, PartialEq)]
pub struct GridField {
    pub x_lo: f64,
    pub dx: f64,
    pub dt: f64,
    pub n_cells: usize,
    pub n_slabs: usize,
    /// Row-major: `values[m * n_cells + j]` is the state on slab m, cell j.
    pub values: Vec<f64>,
}

impl GridField {
    pub fn new(x_lo: f64, dx: f64, dt: f64, n_cells: usize, values: Vec<f64>) -> Result<Self> {
        if values.len() % n_cells != 0 || values.is_empty() {
            return Err(Error::InvalidArgument("grid values do not tile the mesh".into()));
        }
        if values.iter().any(|v| !v.is_finite()) {
            return Err(Error::InvalidArgument("grid contains non-finite values".into()));
        }
        let n_slabs = values.len() / n_cells;
        Ok(Self { x_lo, dx, dt, n_cells, n_slabs, values })
    }

    pub fn cell_index(&self, x: f64) -> usize {
        let j = ((x - self.x_lo) / self.dx).floor();
        (j.max(0.0) as usize).min(self.n_cells - 1)
    }

    pub fn slab_index(&self, t: f64) -> usize {
        let m = (t / self.dt).floor();
        (m.max(0.0) as usize).min(self.n_slabs - 1)
    }

    pub fn x_edge(&self, j: usize) -> f64 {
        self.x_lo + j as f64 * self.dx
    }

    pub fn t_edge(&self, m: usize) -> f64 {
        m as f64 * self.dt
    }

    /// CSV layout `t_index,x_index,value`, one row per cell, LF endings.
    pub fn write_csv<W: Write>(&self, mut w: W) -> Result<()> {
        w.write_all(b"t_index,x_index,value\n")?;
        for m in 0..self.n_slabs {
            for j in 0..self.n_cells {
                writeln!(w, "{},{},{:e}", m, j, self.values[m * self.n_cells + j])?;
            }
        }
        Ok(())
    }

    /// Parse the CSV layout written by [`GridField::write_csv`]. Mesh
    /// geometry is not part of the file and must be supplied.
    pub fn read_csv<R: BufRead>(r: R, x_lo: f64, dx: f64, dt: f64) -> Result<Self> {
        let mut rows: Vec<(usize, usize, f64)> = Vec::new();
        for (i, line) in r.lines().enumerate() {
            let line = line?;
            if i == 0 {
                if line.trim() != "t_index,x_index,value" {
                    return Err(Error::Config(format!("bad CSV header: {line}")));
                }
                continue;
            }
            if line.trim().is_empty() {
                continue;
            }
            let mut parts = line.split(',');
            let m: usize = parts
                .next()
                .and_then(|s| s.trim().parse().ok())
                .ok_or_else(|| Error::Config(format!("bad row {i}")))?;
            let j: usize = parts
                .next()
                .and_then(|s| s.trim().parse().ok())
                .ok_or_else(|| Error::Config(format!("bad row {i}")))?;
            let v: f64 = parts
                .next()
                .and_then(|s| s.trim().parse().ok())
                .ok_or_else(|| Error::Config(format!("bad row {i}")))?;
            rows.push((m, j, v));
        }
        let n_cells = rows.iter().map(|r| r.1).max().map_or(0, |j| j + 1);
        let n_slabs = rows.iter().map(|r| r.0).max().map_or(0, |m| m + 1);
        if n_cells == 0 || rows.len() != n_cells * n_slabs {
            return Err(Error::Config("CSV does not tile a full mesh".into()));
        }
        let mut values = vec![f64::NAN; n_cells * n_slabs];
        for (m, j, v) in rows {
            values[m * n_cells + j] = v;
        }
        GridField::new(x_lo, dx, dt, n_cells, values)
    }
}

impl Field for GridField {
    fn eval(&self, t: f64, x: f64) -> FieldValue {
        let m = self.slab_index(t);
        let j = self.cell_index(x);
        FieldValue { value: self.values[m * self.n_cells + j], region: m * self.n_cells + j }
    }

    fn x_breakpoints(&self, _t: f64, out: &mut Vec<f64>) {
        for j in 0..=self.n_cells {
            out.push(self.x_edge(j));
        }
    }

    fn level_breakpoints(&self, _t: f64, _k: f64, _out: &mut Vec<f64>) {}

    fn t_breakpoints(&self) -> Vec<f64> {
        (0..=self.n_slabs).map(|m| self.t_edge(m)).collect()
    }

    fn state_values(&self) -> Vec<f64> {
        let mut v: Vec<f64> = self.values.clone();
        v.sort_by(|a, b| a.partial_cmp(b).unwrap());
        v.dedup();
        if v.len() > 64 {
            // Too many distinct states to be useful as quadrature kinks.
            Vec::new()
        } else {
            v
        }
    }

    fn range(&self) -> (f64, f64) {
        let mut lo = f64::INFINITY;
        let mut hi = f64::NEG_INFINITY;
        for &v in &self.values {
            lo = lo.min(v);
            hi = hi.max(v);
        }
        (lo, hi)
    }

    fn as_grid(&self) -> Option<&GridField> {
        Some(self)
    }
}

/// Piecewise-smooth initial datum with sorted breakpoints.
/// `formulas[i]` applies on `(breakpoints[i-1], breakpoints[i])`.
pub struct InitialDatum {
    pub breakpoints: Vec<f64>,
    formulas: Vec<Arc<dyn Fn(f64) -> f64 + Send + Sync>>,
    constants: Vec<Option<f64>>,
    range: (f64, f64),
}

impl InitialDatum {
    pub fn piecewise_constant(breakpoints: Vec<f64>, states: Vec<f64>) -> Result<Self> {
        if states.len() != breakpoints.len() + 1 {
            return Err(Error::InvalidArgument("need one more state than breakpoint".into()));
        }
        if breakpoints.windows(2).any(|w| w[0] >= w[1]) {
            return Err(Error::InvalidArgument("breakpoints must be sorted".into()));
        }
        let lo = states.iter().cloned().fold(f64::INFINITY, f64::min);
        let hi = states.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
        let formulas = states
            .iter()
            .map(|&c| Arc::new(move |_x: f64| c) as Arc<dyn Fn(f64) -> f64 + Send + Sync>)
            .collect();
        Ok(Self {
            breakpoints,
            formulas,
            constants: states.into_iter().map(Some).collect(),
            range: (lo, hi),
        })
    }

    pub fn constant(c: f64) -> Self {
        Self::piecewise_constant(vec![], vec![c]).unwrap()
    }

    pub fn smooth(
        formula: Arc<dyn Fn(f64) -> f64 + Send + Sync>,
        range: (f64, f64),
    ) -> Self {
        Self { breakpoints: vec![], formulas: vec![formula], constants: vec![None], range }
    }

    pub fn eval(&self, x: f64) -> f64 {
        let piece = self.breakpoints.iter().filter(|&&b| b <= x).count();
        (self.formulas[piece])(x)
    }

    /// Constant states of the datum (contributors to the kink set in k).
    pub fn state_values(&self) -> Vec<f64> {
        let mut v: Vec<f64> = self.constants.iter().filter_map(|c| *c).collect();
        v.sort_by(|a, b| a.partial_cmp(b).unwrap());
        v.dedup();
        v
    }

    pub fn range(&self) -> (f64, f64) {
        self.range
    }
}

/// Smallest declared interval containing the values of `u` and `u0`.
pub fn essential_range(u: &dyn Field, u0: &InitialDatum) -> (f64, f64) {
    let (a, b) = u.range();
    let (c, d) = u0.range();
    (a.min(c), b.max(d))
}
