//! Dense state history on a uniform grid, delayed-state interpolation, and
//! maximum-value (window supremum) evaluation.

use std::collections::VecDeque;
use std::fmt::Write as _;

use crate::delay::DelayProfile;
use crate::error::{Error, Result};

/// Grid-point tolerance, in units of the step size.
const GRID_SNAP: f64 = 1e-9;

/// Record of a trajectory from `t0` to the current time on the grid
/// `t0 + k h`, with optional gain columns recorded alongside.
#[derive(Clone, Debug)]
pub struct HistoryTrajectory {
    t0: f64,
    h: f64,
    dim: usize,
    states: Vec<f64>,
    gain_names: Vec<String>,
    gains: Vec<f64>,
    /// Constant pre-history used for queries before `t0`.
    initial: Vec<f64>,
}

impl HistoryTrajectory {
    pub fn new(t0: f64, h: f64, initial_state: &[f64]) -> Self {
        Self::with_gains(t0, h, initial_state, Vec::new(), &[])
    }

    pub fn with_gains(t0: f64, h: f64, initial_state: &[f64], gain_names: Vec<String>, initial_gains: &[f64]) -> Self {
        assert_eq!(gain_names.len(), initial_gains.len(), "gain names and values differ in length");
        Self {
            t0,
            h,
            dim: initial_state.len(),
            states: initial_state.to_vec(),
            gain_names,
            gains: initial_gains.to_vec(),
            initial: initial_state.to_vec(),
        }
    }

    pub fn t0(&self) -> f64 {
        self.t0
    }

    pub fn step(&self) -> f64 {
        self.h
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn len(&self) -> usize {
        self.states.len() / self.dim.max(1)
    }

    pub fn is_empty(&self) -> bool {
        self.states.is_empty()
    }

    pub fn gain_names(&self) -> &[String] {
        &self.gain_names
    }

    pub fn gain_dim(&self) -> usize {
        self.gain_names.len()
    }

    pub fn time(&self, k: usize) -> f64 {
        self.t0 + k as f64 * self.h
    }

    pub fn current_time(&self) -> f64 {
        self.time(self.len() - 1)
    }

    pub fn state(&self, k: usize) -> &[f64] {
        &self.states[k * self.dim..(k + 1) * self.dim]
    }

    pub fn last_state(&self) -> &[f64] {
        self.state(self.len() - 1)
    }

    pub fn gains(&self, k: usize) -> &[f64] {
        let g = self.gain_dim();
        &self.gains[k * g..(k + 1) * g]
    }

    /// Index of the gain column with the given name.
    pub fn gain_column(&self, name: &str) -> Option<usize> {
        self.gain_names.iter().position(|n| n == name)
    }

    /// Series of one gain column over the whole grid.
    pub fn gain_series(&self, column: usize) -> Vec<f64> {
        (0..self.len()).map(|k| self.gains(k)[column]).collect()
    }

    pub fn times(&self) -> impl Iterator<Item = f64> + '_ {
        (0..self.len()).map(move |k| self.time(k))
    }

    pub fn push(&mut self, state: &[f64], gains: &[f64]) {
        debug_assert_eq!(state.len(), self.dim);
        debug_assert_eq!(gains.len(), self.gain_dim());
        self.states.extend_from_slice(state);
        self.gains.extend_from_slice(gains);
    }

    /// Position of `t` on the grid: `Exact(k)` when `t` is a grid point,
    /// otherwise the bracketing index and weight.
    fn locate(&self, t: f64) -> Result<GridPos> {
        let end = self.current_time();
        let r = (t - self.t0) / self.h;
        let last = (self.len() - 1) as f64;
        if r > last + GRID_SNAP {
            return Err(Error::HistoryOutOfRange { query: t, start: self.t0, end });
        }
        if r < -GRID_SNAP {
            return Ok(GridPos::Before);
        }
        let nearest = r.round();
        if (r - nearest).abs() <= GRID_SNAP {
            return Ok(GridPos::Exact(nearest.clamp(0.0, last) as usize));
        }
        let k = r.floor();
        Ok(GridPos::Between(k as usize, r - k))
    }

    /// Linear interpolation of the state at `t`; constant initial history
    /// before `t0`; bitwise-exact at grid points.
    pub fn query(&self, t: f64, out: &mut [f64]) -> Result<()> {
        match self.locate(t)? {
            GridPos::Before => out.copy_from_slice(&self.initial),
            GridPos::Exact(k) => out.copy_from_slice(self.state(k)),
            GridPos::Between(k, w) => {
                let (a, b) = (self.state(k), self.state(k + 1));
                for ((o, &x0), &x1) in out.iter_mut().zip(a).zip(b) {
                    *o = x0 + w * (x1 - x0);
                }
            }
        }
        Ok(())
    }

    pub fn query_component(&self, t: f64, c: usize) -> Result<f64> {
        Ok(match self.locate(t)? {
            GridPos::Before => self.initial[c],
            GridPos::Exact(k) => self.states[k * self.dim + c],
            GridPos::Between(k, w) => {
                let x0 = self.states[k * self.dim + c];
                let x1 = self.states[(k + 1) * self.dim + c];
                x0 + w * (x1 - x0)
            }
        })
    }

    /// Gains at `t`, linearly interpolated.
    pub fn query_gains(&self, t: f64, out: &mut [f64]) -> Result<()> {
        let g = self.gain_dim();
        match self.locate(t)? {
            GridPos::Before => out.copy_from_slice(self.gains(0)),
            GridPos::Exact(k) => out.copy_from_slice(self.gains(k)),
            GridPos::Between(k, w) => {
                for (c, o) in out.iter_mut().enumerate().take(g) {
                    let (a, b) = (self.gains[k * g + c], self.gains[(k + 1) * g + c]);
                    *o = a + w * (b - a);
                }
            }
        }
        Ok(())
    }

    /// Grid indices whose times lie in `[left, right]`.
    pub(crate) fn grid_range(&self, left: f64, right: f64) -> (usize, usize) {
        let lo = ((left - self.t0) / self.h - GRID_SNAP).ceil().max(0.0) as usize;
        let hi = (((right - self.t0) / self.h + GRID_SNAP).floor().max(0.0) as usize).min(self.len() - 1);
        (lo, hi)
    }

    /// CSV export: `t,x_1,...,x_d[,gain columns]`, 17 significant digits,
    /// every `stride`-th grid point (the last point is always written).
    pub fn to_csv(&self, stride: usize) -> String {
        let stride = stride.max(1);
        let mut out = String::from("t");
        for i in 1..=self.dim {
            let _ = write!(out, ",x_{i}");
        }
        for name in &self.gain_names {
            let _ = write!(out, ",{name}");
        }
        out.push('\n');
        let last = self.len() - 1;
        for k in (0..self.len()).filter(|k| k % stride == 0 || *k == last) {
            let _ = write!(out, "{:.16e}", self.time(k));
            for v in self.state(k).iter().chain(self.gains(k)) {
                let _ = write!(out, ",{v:.16e}");
            }
            out.push('\n');
        }
        out
    }

    /// Parse a trajectory written by [`to_csv`](Self::to_csv) with stride 1
    /// (or any uniform stride; the step becomes the row spacing).
    pub fn from_csv(text: &str) -> Result<Self> {
        let mut lines = text.lines().filter(|l| !l.trim().is_empty());
        let header: Vec<&str> = lines.next().ok_or_else(|| Error::Csv("empty input".into()))?.split(',').collect();
        if header.first().map(|s| s.trim()) != Some("t") {
            return Err(Error::Csv("first column must be `t`".into()));
        }
        let dim = header[1..].iter().take_while(|c| c.trim().starts_with("x_")).count();
        if dim == 0 {
            return Err(Error::Csv("no state columns".into()));
        }
        let gain_names: Vec<String> = header[1 + dim..].iter().map(|s| s.trim().to_string()).collect();
        let mut times = Vec::new();
        let mut rows = Vec::new();
        for (n, line) in lines.enumerate() {
            let vals: std::result::Result<Vec<f64>, _> = line.split(',').map(|s| s.trim().parse::<f64>()).collect();
            let vals = vals.map_err(|e| Error::Csv(format!("row {}: {e}", n + 1)))?;
            if vals.len() != header.len() {
                return Err(Error::Csv(format!(
                    "row {} has {} fields, header has {}",
                    n + 1,
                    vals.len(),
                    header.len()
                )));
            }
            times.push(vals[0]);
            rows.push(vals[1..].to_vec());
        }
        if times.len() < 2 {
            return Err(Error::Csv("need at least two rows".into()));
        }
        let h = times[1] - times[0];
        if !(h > 0.0) {
            return Err(Error::Csv("time column must increase".into()));
        }
        for (k, t) in times.iter().enumerate() {
            let expected = times[0] + k as f64 * h;
            if (t - expected).abs() > 1e-6 * h.max(t.abs() * 1e-3) {
                return Err(Error::Csv(format!("non-uniform time grid at row {}", k + 1)));
            }
        }
        let mut traj = Self::with_gains(times[0], h, &rows[0][..dim], gain_names, &rows[0][dim..]);
        for row in &rows[1..] {
            traj.push(&row[..dim], &row[dim..]);
        }
        Ok(traj)
    }
}

enum GridPos {
    Before,
    Exact(usize),
    Between(usize, f64),
}

/// Scalar functional of a state evaluated inside the maximum-value window.
#[derive(Clone, Debug, PartialEq)]
pub enum WindowFunctional {
    /// `p^T p`
    SqNorm2,
    /// `||p||_1`
    Norm1,
    /// `||p||_inf`
    NormInf,
    /// `sum_i ξ_i e_i^T e_i` over `ξ.len()` equal blocks of the state.
    WeightedSq(Vec<f64>),
}

impl WindowFunctional {
    pub fn eval(&self, x: &[f64]) -> f64 {
        match self {
            WindowFunctional::SqNorm2 => x.iter().map(|v| v * v).sum(),
            WindowFunctional::Norm1 => x.iter().map(|v| v.abs()).sum(),
            WindowFunctional::NormInf => x.iter().fold(0.0, |m, v| m.max(v.abs())),
            WindowFunctional::WeightedSq(xi) => {
                let block = x.len() / xi.len();
                x.chunks(block).zip(xi).map(|(e, w)| w * e.iter().map(|v| v * v).sum::<f64>()).sum()
            }
        }
    }

    /// Whether the functional is quadratic in the state.
    pub fn is_squared(&self) -> bool {
        matches!(self, WindowFunctional::SqNorm2 | WindowFunctional::WeightedSq(_))
    }

    /// The norm matching the functional (square root of squared ones).
    pub fn norm(&self, x: &[f64]) -> f64 {
        let v = self.eval(x);
        if self.is_squared() {
            v.sqrt()
        } else {
            v
        }
    }
}

/// `sup_{t - π(t) <= s <= t} F(p(s))` by a direct scan of the grid points in
/// the window plus the interpolants at both ends.
pub fn window_sup(
    traj: &HistoryTrajectory,
    t: f64,
    profile: &DelayProfile,
    functional: &WindowFunctional,
) -> Result<f64> {
    let left = profile.window_start(t);
    if left < traj.t0() - GRID_SNAP * traj.step() {
        return Err(Error::HistoryOutOfRange { query: left, start: traj.t0(), end: traj.current_time() });
    }
    let mut buf = vec![0.0; traj.dim()];
    traj.query(t, &mut buf)?;
    let mut best = functional.eval(&buf);
    traj.query(left, &mut buf)?;
    best = best.max(functional.eval(&buf));
    let (lo, hi) = traj.grid_range(left, t);
    if lo <= hi {
        for k in lo..=hi {
            best = best.max(functional.eval(traj.state(k)));
        }
    }
    Ok(best)
}

/// Incremental sliding-window maximum over a grid series whose window
/// left end never moves backwards.
#[derive(Clone, Debug, Default)]
pub struct SlidingMax {
    deque: VecDeque<(usize, f64)>,
    lo: usize,
}

impl SlidingMax {
    pub fn new() -> Self {
        Self::default()
    }

    /// Append the value at grid index `k` (indices must increase by one).
    pub fn push(&mut self, k: usize, value: f64) {
        while let Some(&(_, v)) = self.deque.back() {
            if v <= value {
                self.deque.pop_back();
            } else {
                break;
            }
        }
        self.deque.push_back((k, value));
    }

    /// Maximum over indices `>= lo`, or `None` if empty. `lo` must be
    /// nondecreasing across calls.
    pub fn max_from(&mut self, lo: usize) -> Option<f64> {
        debug_assert!(lo >= self.lo, "window left end moved backwards");
        self.lo = lo;
        while let Some(&(k, _)) = self.deque.front() {
            if k < lo {
                self.deque.pop_front();
            } else {
                break;
            }
        }
        self.deque.front().map(|&(_, v)| v)
    }
}

/// Window supremum of a state functional tracked as the trajectory grows.
/// Produces exactly the value of [`window_sup`] at each grid time.
#[derive(Clone, Debug)]
pub struct WindowSupTracker {
    functional: WindowFunctional,
    max: SlidingMax,
    next: usize,
    buf: Vec<f64>,
    prehistory: bool,
}

impl WindowSupTracker {
    pub fn new(functional: WindowFunctional) -> Self {
        Self { functional, max: SlidingMax::new(), next: 0, buf: Vec::new(), prehistory: false }
    }

    /// Let windows reach before `t0`, where the constant initial history
    /// applies.
    pub fn allow_prehistory(mut self) -> Self {
        self.prehistory = true;
        self
    }

    pub fn functional(&self) -> &WindowFunctional {
        &self.functional
    }

    /// Window sup at the latest grid time of `traj`.
    pub fn update(&mut self, traj: &HistoryTrajectory, profile: &DelayProfile) -> Result<f64> {
        let last = traj.len() - 1;
        while self.next <= last {
            self.max.push(self.next, self.functional.eval(traj.state(self.next)));
            self.next += 1;
        }
        let t = traj.time(last);
        let left = profile.window_start(t);
        if !self.prehistory && left < traj.t0() - GRID_SNAP * traj.step() {
            return Err(Error::HistoryOutOfRange { query: left, start: traj.t0(), end: t });
        }
        self.buf.resize(traj.dim(), 0.0);
        traj.query(left, &mut self.buf)?;
        let boundary = self.functional.eval(&self.buf);
        let (lo, _) = traj.grid_range(left, t);
        Ok(self.max.max_from(lo).map_or(boundary, |m| m.max(boundary)))
    }
}
