use serde::{Deserialize, Serialize};

use super::function::FunctionSpec;
use crate::error::{Error, Result};

/// Uniform time grid `t0 + k·dt`, `k = 0..n`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "RawWindow")]
pub struct GridWindow {
    t0: f64,
    t1: f64,
    dt: f64,
    #[serde(skip)]
    n: usize,
}

#[derive(Deserialize)]
struct RawWindow {
    t0: f64,
    t1: f64,
    dt: f64,
}

impl TryFrom<RawWindow> for GridWindow {
    type Error = Error;

    fn try_from(raw: RawWindow) -> Result<Self> {
        GridWindow::new(raw.t0, raw.t1, raw.dt)
    }
}

impl GridWindow {
    pub fn new(t0: f64, t1: f64, dt: f64) -> Result<Self> {
        if !(t0.is_finite() && t1.is_finite() && dt.is_finite()) {
            return Err(Error::InvalidGrid("non-finite bounds".into()));
        }
        if t1 <= t0 {
            return Err(Error::InvalidGrid(format!("t1 = {t1} must exceed t0 = {t0}")));
        }
        if dt <= 0.0 {
            return Err(Error::InvalidGrid(format!("dt = {dt} must be positive")));
        }
        let steps = ((t1 - t0) / dt).round();
        if !(1.0..=1e9).contains(&steps) {
            return Err(Error::InvalidGrid(format!("{steps} steps")));
        }
        Ok(Self {
            t0,
            t1,
            dt,
            n: steps as usize + 1,
        })
    }

    pub fn t0(&self) -> f64 {
        self.t0
    }

    pub fn t1(&self) -> f64 {
        self.t1
    }

    pub fn dt(&self) -> f64 {
        self.dt
    }

    /// Number of nodes.
    pub fn len(&self) -> usize {
        self.n
    }

    pub fn is_empty(&self) -> bool {
        self.n == 0
    }

    /// Time of the last node (may differ from `t1` by rounding of the step count).
    pub fn end(&self) -> f64 {
        self.node(self.n - 1)
    }

    pub fn span(&self) -> f64 {
        (self.n - 1) as f64 * self.dt
    }

    #[inline]
    pub fn node(&self, k: usize) -> f64 {
        self.t0 + k as f64 * self.dt
    }

    pub fn nodes(&self) -> impl Iterator<Item = f64> + '_ {
        (0..self.n).map(move |k| self.node(k))
    }

    /// Index of `t` if it is a grid node (to within 1e-6 of a step).
    pub fn index_of(&self, t: f64) -> Option<usize> {
        let x = (t - self.t0) / self.dt;
        let k = x.round();
        if (x - k).abs() > 1e-6 || k < 0.0 || k as usize >= self.n {
            return None;
        }
        Some(k as usize)
    }

    /// Number of steps closest to a duration.
    pub fn steps_for(&self, duration: f64) -> usize {
        (duration / self.dt).round().max(0.0) as usize
    }

    /// Same step, shifted start: `[t0 - steps·dt, t1]`.
    pub fn extended_back(&self, steps: usize) -> GridWindow {
        GridWindow {
            t0: self.t0 - steps as f64 * self.dt,
            t1: self.t1,
            dt: self.dt,
            n: self.n + steps,
        }
    }

    pub fn same_grid(&self, other: &GridWindow) -> bool {
        self.n == other.n
            && (self.t0 - other.t0).abs() <= 1e-9 * self.dt
            && (self.dt - other.dt).abs() <= 1e-12 * self.dt
    }
}

/// Values of a `dim`-dimensional trajectory on a grid, row-major by node.
#[derive(Debug, Clone, PartialEq)]
pub struct SampledPath {
    window: GridWindow,
    dim: usize,
    values: Vec<f64>,
}

impl SampledPath {
    pub fn new(window: GridWindow, dim: usize, values: Vec<f64>) -> Result<Self> {
        if dim == 0 {
            return Err(Error::invalid("path dimension must be at least 1"));
        }
        if values.len() != window.len() * dim {
            return Err(Error::DimensionMismatch {
                expected: window.len() * dim,
                got: values.len(),
            });
        }
        if let Some(k) = values.iter().position(|v| !v.is_finite()) {
            return Err(Error::NonFinite {
                t: window.node(k / dim),
            });
        }
        Ok(Self { window, dim, values })
    }

    pub fn scalar(window: GridWindow, values: Vec<f64>) -> Result<Self> {
        Self::new(window, 1, values)
    }

    pub fn from_fn(window: GridWindow, f: impl Fn(f64) -> f64) -> Result<Self> {
        Self::scalar(window, window.nodes().map(f).collect())
    }

    pub fn window(&self) -> &GridWindow {
        &self.window
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn len(&self) -> usize {
        self.window.len()
    }

    pub fn is_empty(&self) -> bool {
        self.values.is_empty()
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    pub fn into_values(self) -> Vec<f64> {
        self.values
    }

    #[inline]
    pub fn at(&self, k: usize) -> &[f64] {
        &self.values[k * self.dim..(k + 1) * self.dim]
    }

    /// Euclidean norm of the state at each node.
    pub fn norms(&self) -> Vec<f64> {
        self.values
            .chunks_exact(self.dim)
            .map(|v| v.iter().map(|x| x * x).sum::<f64>().sqrt())
            .collect()
    }

    pub fn sup_norm(&self) -> f64 {
        self.norms().into_iter().fold(0.0, f64::max)
    }

    /// Pointwise map over all entries.
    pub fn map(&self, f: impl Fn(f64) -> f64) -> Result<SampledPath> {
        SampledPath::new(self.window, self.dim, self.values.iter().map(|&v| f(v)).collect())
    }

    /// `t,x_1..x_d` rows.
    pub fn write_csv<W: std::io::Write>(&self, out: W) -> Result<()> {
        let mut header = vec!["t".to_string()];
        header.extend((1..=self.dim).map(|i| format!("x_{i}")));
        let rows = (0..self.len())
            .map(|k| std::iter::once(self.window.node(k).to_string()).chain(self.at(k).iter().map(f64::to_string)));
        crate::table::write_table(out, &header, rows)
    }

    /// Restriction to nodes `start..start + count`.
    pub fn sub_path(&self, start: usize, count: usize) -> Result<SampledPath> {
        if count < 2 || start + count > self.len() {
            return Err(Error::OutOfRange {
                what: format!("node range {start}..{}", start + count),
            });
        }
        let window = GridWindow::new(
            self.window.node(start),
            self.window.node(start + count - 1),
            self.window.dt(),
        )?;
        Ok(SampledPath {
            window,
            dim: self.dim,
            values: self.values[start * self.dim..(start + count) * self.dim].to_vec(),
        })
    }
}

/// `values[k] = spec(t0 + k·dt)`.
pub fn sample(spec: &FunctionSpec, window: &GridWindow) -> Result<SampledPath> {
    spec.validate()?;
    let values = window.nodes().map(|t| spec.eval(t)).collect::<Result<Vec<_>>>()?;
    SampledPath::scalar(*window, values)
}

/// Samples several scalar specs into one multi-dimensional path.
pub fn sample_components(specs: &[FunctionSpec], window: &GridWindow) -> Result<SampledPath> {
    if specs.is_empty() {
        return Err(Error::invalid("no components"));
    }
    let mut values = Vec::with_capacity(window.len() * specs.len());
    for t in window.nodes() {
        for s in specs {
            values.push(s.eval(t)?);
        }
    }
    SampledPath::new(*window, specs.len(), values)
}

#[cfg(test)]
mod tests {
    use std::f64::consts::{FRAC_PI_2, PI};

    use super::*;
    use crate::corpus::primitives::levitan_g;

    #[test]
    fn node_count() {
        let w = GridWindow::new(0.0, 1.0, 0.1).unwrap();
        assert_eq!(w.len(), 11);
        assert_eq!(w.node(3), 0.0 + 3.0 * 0.1);
        assert!(GridWindow::new(1.0, 1.0, 0.1).is_err());
        assert!(GridWindow::new(0.0, 1.0, -0.1).is_err());
    }

    #[test]
    fn zero_path() {
        let w = GridWindow::new(-3.0, 7.0, 0.25).unwrap();
        let p = sample(&FunctionSpec::zero(), &w).unwrap();
        assert!(p.values().iter().all(|&v| v == 0.0));
    }

    #[test]
    fn sin_quarter_turns() {
        let w = GridWindow::new(0.0, 2.0 * PI, FRAC_PI_2).unwrap();
        let p = sample(&FunctionSpec::sin(), &w).unwrap();
        let expect = [0.0, 1.0, 0.0, -1.0, 0.0];
        assert_eq!(p.len(), 5);
        for (v, e) in p.values().iter().zip(expect) {
            assert!((v - e).abs() < 1e-15);
        }
    }

    #[test]
    fn levitan_g_samples() {
        let w = GridWindow::new(0.0, 1.0, 0.5).unwrap();
        let p = sample(&FunctionSpec::primitive("levitan_g"), &w).unwrap();
        let g_half = 2.0 + 0.5f64.cos() + (0.5 * 2f64.sqrt()).cos();
        let g_one = 2.0 + 1f64.cos() + 2f64.sqrt().cos();
        assert_eq!(p.values(), &[4.0, g_half, g_one]);
        assert_eq!(p.values()[1], levitan_g(0.5));
    }

    #[test]
    fn index_lookup() {
        let w = GridWindow::new(-1.0, 1.0, 0.01).unwrap();
        assert_eq!(w.index_of(0.0), Some(100));
        assert_eq!(w.index_of(0.005), None);
        assert_eq!(w.index_of(2.0), None);
    }

    #[test]
    fn serde_validates_window() {
        let ok: GridWindow = serde_json::from_str(r#"{"t0":0,"t1":2,"dt":0.5}"#).unwrap();
        assert_eq!(ok.len(), 5);
        assert!(serde_json::from_str::<GridWindow>(r#"{"t0":0,"t1":-2,"dt":0.5}"#).is_err());
    }
}
