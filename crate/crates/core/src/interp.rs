//! Per-channel interpolation of sparse segments onto a regular grid.
//!
//! Every channel is reconstructed independently from the knots
//! `(timestamp, value)` of the segment's readings. Outside the observed
//! range the first/last observed value is held. Grid points that coincide
//! with a knot (up to [`SNAP_TOLERANCE`] of the grid step) return the knot
//! value exactly.
//!
//! Kinds that need more distinct knots than the segment provides fall back
//! along `cubic → quadratic → linear → previous → constant`.

use serde::{Deserialize, Serialize};

use crate::dataio::SparseSegment;
use crate::nncore::Matrix;
use crate::{Error, Result};

/// Relative distance (in grid steps) below which a grid point is treated as
/// sitting on a knot.
pub const SNAP_TOLERANCE: f64 = 1e-9;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum InterpKind {
    Linear,
    Previous,
    #[serde(alias = "quadratic")]
    QuadraticSpline,
    #[serde(alias = "cubic")]
    CubicSpline,
}

impl InterpKind {
    pub const ALL: [InterpKind; 4] = [
        InterpKind::Linear,
        InterpKind::CubicSpline,
        InterpKind::QuadraticSpline,
        InterpKind::Previous,
    ];

    pub fn min_knots(self) -> usize {
        match self {
            InterpKind::Previous => 1,
            InterpKind::Linear => 2,
            InterpKind::QuadraticSpline => 3,
            InterpKind::CubicSpline => 4,
        }
    }

    pub fn name(self) -> &'static str {
        match self {
            InterpKind::Linear => "linear",
            InterpKind::Previous => "previous",
            InterpKind::QuadraticSpline => "quadratic_spline",
            InterpKind::CubicSpline => "cubic_spline",
        }
    }

    fn fallback(self) -> Option<InterpKind> {
        match self {
            InterpKind::CubicSpline => Some(InterpKind::QuadraticSpline),
            InterpKind::QuadraticSpline => Some(InterpKind::Linear),
            InterpKind::Linear => Some(InterpKind::Previous),
            InterpKind::Previous => None,
        }
    }

    /// The kind actually usable with `knots` distinct knots; `None` means a
    /// constant hold of the single knot.
    pub fn effective(self, knots: usize) -> Option<InterpKind> {
        let mut kind = self;
        while knots < kind.min_knots() {
            kind = kind.fallback()?;
        }
        if knots <= 1 {
            None
        } else {
            Some(kind)
        }
    }
}

impl std::fmt::Display for InterpKind {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(self.name())
    }
}

impl std::str::FromStr for InterpKind {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "linear" => Ok(InterpKind::Linear),
            "previous" => Ok(InterpKind::Previous),
            "quadratic" | "quadratic_spline" => Ok(InterpKind::QuadraticSpline),
            "cubic" | "cubic_spline" => Ok(InterpKind::CubicSpline),
            other => Err(Error::Config(format!("unknown interpolation kind {other:?}"))),
        }
    }
}

/// A segment resampled onto `m` regular grid points.
#[derive(Debug, Clone, PartialEq)]
pub struct DenseSegment {
    pub grid: Vec<f64>,
    /// (m × d)
    pub values: Matrix,
    pub label: usize,
    /// Interpolant actually applied after fallback; `None` for a constant hold.
    pub applied: Option<InterpKind>,
}

/// Number of grid points for a window: `round(f·δt)`, at least 1.
pub fn grid_len(target_rate: f64, window_len: f64) -> usize {
    ((target_rate * window_len).round() as usize).max(1)
}

/// Left-closed regular grid starting at `start`.
pub fn regular_grid(start: f64, window_len: f64, m: usize) -> Vec<f64> {
    (0..m)
        .map(|i| start + (i as f64 * window_len) / m as f64)
        .collect()
}

/// Interpolates every channel of `segment` onto its regular grid at `target_rate`.
pub fn resample(segment: &SparseSegment, kind: InterpKind, target_rate: f64) -> Result<DenseSegment> {
    if segment.is_empty() {
        return Err(Error::EmptySegment);
    }
    if !(target_rate > 0.0) {
        return Err(Error::Config(format!(
            "target rate must be positive, got {target_rate}"
        )));
    }
    let d = segment.dim();
    let m = grid_len(target_rate, segment.window_len);
    let grid = regular_grid(segment.window_start, segment.window_len, m);
    let step = segment.window_len / m as f64;

    let (times, columns) = knots(segment)?;
    let applied = kind.effective(times.len());
    let mut values = Matrix::zeros(m, d);
    for (j, ys) in columns.iter().enumerate() {
        let curve = Curve::build(applied, &times, ys);
        for (i, &t) in grid.iter().enumerate() {
            values.set(i, j, curve.eval(t, step));
        }
    }
    Ok(DenseSegment {
        grid,
        values,
        label: segment.label,
        applied,
    })
}

/// Distinct knot times (ascending) and per-channel values. For repeated
/// timestamps the last reading wins.
fn knots(segment: &SparseSegment) -> Result<(Vec<f64>, Vec<Vec<f64>>)> {
    let d = segment.dim();
    let mut order: Vec<usize> = (0..segment.len()).collect();
    order.sort_by(|&a, &b| {
        segment.readings[a]
            .timestamp
            .total_cmp(&segment.readings[b].timestamp)
    });
    let mut times: Vec<f64> = Vec::with_capacity(order.len());
    let mut columns: Vec<Vec<f64>> = vec![Vec::with_capacity(order.len()); d];
    for i in order {
        let r = &segment.readings[i];
        if r.dim() != d {
            return Err(Error::dim("segment readings disagree on channel count"));
        }
        if times.last() == Some(&r.timestamp) {
            for (col, &v) in columns.iter_mut().zip(&r.channels) {
                *col.last_mut().expect("nonempty") = v;
            }
        } else {
            times.push(r.timestamp);
            for (col, &v) in columns.iter_mut().zip(&r.channels) {
                col.push(v);
            }
        }
    }
    Ok((times, columns))
}

/// One channel's interpolant.
enum Curve<'a> {
    Constant(f64),
    Previous {
        x: &'a [f64],
        y: &'a [f64],
    },
    Linear {
        x: &'a [f64],
        y: &'a [f64],
    },
    /// Piecewise polynomial `y_i + b_i·u + c_i·u² + d_i·u³`, `u = t − x_i`.
    Piecewise {
        x: &'a [f64],
        y: &'a [f64],
        b: Vec<f64>,
        c: Vec<f64>,
        d: Vec<f64>,
    },
}

impl<'a> Curve<'a> {
    fn build(kind: Option<InterpKind>, x: &'a [f64], y: &'a [f64]) -> Self {
        match kind {
            None => Curve::Constant(y[0]),
            Some(InterpKind::Previous) => Curve::Previous { x, y },
            Some(InterpKind::Linear) => Curve::Linear { x, y },
            Some(InterpKind::QuadraticSpline) => {
                let (b, c) = quadratic_coefficients(x, y);
                let d = vec![0.0; b.len()];
                Curve::Piecewise { x, y, b, c, d }
            }
            Some(InterpKind::CubicSpline) => {
                let m = cubic_second_derivatives(x, y, 0.0, 0.0);
                let (b, c, d) = cubic_coefficients(x, y, &m);
                Curve::Piecewise { x, y, b, c, d }
            }
        }
    }

    fn eval(&self, t: f64, step: f64) -> f64 {
        let (x, y) = match self {
            Curve::Constant(v) => return *v,
            Curve::Previous { x, y } | Curve::Linear { x, y } | Curve::Piecewise { x, y, .. } => (*x, *y),
        };
        let n = x.len();
        // index of the last knot ≤ t (or 0)
        let i = x.partition_point(|&k| k <= t).saturating_sub(1);
        let tol = SNAP_TOLERANCE * step;
        if (t - x[i]).abs() <= tol {
            return y[i];
        }
        if i + 1 < n && (x[i + 1] - t).abs() <= tol {
            return y[i + 1];
        }
        if t <= x[0] {
            return y[0];
        }
        if t >= x[n - 1] {
            return y[n - 1];
        }
        let u = t - x[i];
        match self {
            Curve::Constant(_) => unreachable!(),
            Curve::Previous { .. } => y[i],
            Curve::Linear { .. } => {
                let w = u / (x[i + 1] - x[i]);
                y[i] + w * (y[i + 1] - y[i])
            }
            Curve::Piecewise { b, c, d, .. } => y[i] + u * (b[i] + u * (c[i] + u * d[i])),
        }
    }
}

/// Second derivatives at the knots of the interpolating cubic spline with
/// prescribed end curvatures (0, 0 for natural end conditions), from the
/// tridiagonal continuity system solved with the Thomas algorithm.
pub fn cubic_second_derivatives(x: &[f64], y: &[f64], left: f64, right: f64) -> Vec<f64> {
    let n = x.len();
    let mut m = vec![0.0; n];
    m[0] = left;
    m[n - 1] = right;
    if n < 3 {
        return m;
    }
    let h: Vec<f64> = x.windows(2).map(|w| w[1] - w[0]).collect();
    // unknowns m[1..n-1]; row k (for knot i = k+1):
    // h[i-1]·m[i-1] + 2(h[i-1]+h[i])·m[i] + h[i]·m[i+1] = rhs
    let k = n - 2;
    let mut diag = vec![0.0; k];
    let mut upper = vec![0.0; k];
    let mut rhs = vec![0.0; k];
    for r in 0..k {
        let i = r + 1;
        diag[r] = 2.0 * (h[i - 1] + h[i]);
        upper[r] = h[i];
        rhs[r] = 6.0 * ((y[i + 1] - y[i]) / h[i] - (y[i] - y[i - 1]) / h[i - 1]);
    }
    rhs[0] -= h[0] * left;
    rhs[k - 1] -= h[n - 2] * right;
    // forward sweep; sub-diagonal entry of row r is h[r]
    for r in 1..k {
        let w = h[r] / diag[r - 1];
        diag[r] -= w * upper[r - 1];
        rhs[r] -= w * rhs[r - 1];
    }
    m[k] = rhs[k - 1] / diag[k - 1];
    for r in (0..k - 1).rev() {
        m[r + 1] = (rhs[r] - upper[r] * m[r + 2]) / diag[r];
    }
    m
}

/// Power-basis coefficients of each cubic piece from knot second derivatives.
fn cubic_coefficients(x: &[f64], y: &[f64], m: &[f64]) -> (Vec<f64>, Vec<f64>, Vec<f64>) {
    let pieces = x.len() - 1;
    let mut b = Vec::with_capacity(pieces);
    let mut c = Vec::with_capacity(pieces);
    let mut d = Vec::with_capacity(pieces);
    for i in 0..pieces {
        let h = x[i + 1] - x[i];
        b.push((y[i + 1] - y[i]) / h - h * (2.0 * m[i] + m[i + 1]) / 6.0);
        c.push(m[i] / 2.0);
        d.push((m[i + 1] - m[i]) / (6.0 * h));
    }
    (b, c, d)
}

/// C¹ piecewise quadratic through all knots. The first piece has zero
/// curvature (its slope is the first secant); later slopes follow from
/// continuity of the derivative.
fn quadratic_coefficients(x: &[f64], y: &[f64]) -> (Vec<f64>, Vec<f64>) {
    let pieces = x.len() - 1;
    let mut b = Vec::with_capacity(pieces);
    let mut c = Vec::with_capacity(pieces);
    let mut slope = (y[1] - y[0]) / (x[1] - x[0]);
    for i in 0..pieces {
        let h = x[i + 1] - x[i];
        let secant = (y[i + 1] - y[i]) / h;
        b.push(slope);
        c.push((secant - slope) / h);
        slope = 2.0 * secant - slope;
    }
    (b, c)
}

/// Evaluates a cubic spline with given end curvatures at arbitrary points,
/// without the knot snapping used for grid resampling.
pub fn cubic_spline_eval(x: &[f64], y: &[f64], left: f64, right: f64, at: &[f64]) -> Vec<f64> {
    let m = cubic_second_derivatives(x, y, left, right);
    let (b, c, d) = cubic_coefficients(x, y, &m);
    let curve = Curve::Piecewise { x, y, b, c, d };
    at.iter().map(|&t| curve.eval(t, 0.0)).collect()
}

/// RMSE over all grid points and channels.
pub fn interpolation_error(dense: &DenseSegment, truth: &DenseSegment) -> Result<f64> {
    if dense.values.shape() != truth.values.shape() || dense.grid.len() != truth.grid.len() {
        return Err(Error::dim(format!(
            "grid {:?} does not match {:?}",
            dense.values.shape(),
            truth.values.shape()
        )));
    }
    let step = dense.grid.get(1).map_or(1.0, |g| g - dense.grid[0]).abs();
    if dense
        .grid
        .iter()
        .zip(&truth.grid)
        .any(|(a, b)| (a - b).abs() > SNAP_TOLERANCE * step.max(1.0))
    {
        return Err(Error::dim("grids have different timestamps"));
    }
    let n = dense.values.as_slice().len();
    if n == 0 {
        return Ok(0.0);
    }
    let sq: f64 = dense
        .values
        .as_slice()
        .iter()
        .zip(truth.values.as_slice())
        .map(|(a, b)| (a - b) * (a - b))
        .sum();
    Ok((sq / n as f64).sqrt())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::dataio::SensorReading;

    fn seg(points: &[(f64, f64)], start: f64, len: f64) -> SparseSegment {
        SparseSegment {
            readings: points
                .iter()
                .map(|&(t, v)| SensorReading::new(t, vec![v]))
                .collect(),
            window_start: start,
            window_len: len,
            label: 0,
        }
    }

    fn at(segment: &SparseSegment, kind: InterpKind, rate: f64, t: f64) -> f64 {
        let dense = resample(segment, kind, rate).unwrap();
        let i = dense
            .grid
            .iter()
            .position(|&g| (g - t).abs() < 1e-12)
            .expect("grid point");
        dense.values.get(i, 0)
    }

    #[test]
    fn linear_midpoint() {
        let s = seg(&[(0.0, 0.0), (2.0, 4.0)], 0.0, 2.0);
        assert_eq!(at(&s, InterpKind::Linear, 2.0, 1.0), 2.0);
    }

    #[test]
    fn previous_holds_value() {
        let s = seg(&[(0.0, 1.0), (2.0, 5.0)], 0.0, 2.0);
        assert_eq!(at(&s, InterpKind::Previous, 2.0, 1.0), 1.0);
    }

    #[test]
    fn holds_first_and_last_outside_knots() {
        let s = seg(&[(1.0, 3.0), (2.0, 5.0), (2.5, 4.0), (3.0, 7.0)], 0.0, 4.0);
        for kind in InterpKind::ALL {
            let d = resample(&s, kind, 2.0).unwrap();
            assert_eq!(d.values.get(0, 0), 3.0, "{kind}");
            assert_eq!(d.values.get(7, 0), 7.0, "{kind}");
        }
    }

    #[test]
    fn fallback_chain() {
        assert_eq!(
            InterpKind::CubicSpline.effective(4),
            Some(InterpKind::CubicSpline)
        );
        assert_eq!(
            InterpKind::CubicSpline.effective(3),
            Some(InterpKind::QuadraticSpline)
        );
        assert_eq!(InterpKind::CubicSpline.effective(2), Some(InterpKind::Linear));
        assert_eq!(InterpKind::QuadraticSpline.effective(2), Some(InterpKind::Linear));
        assert_eq!(InterpKind::Linear.effective(1), None);
        let s = seg(&[(0.5, 2.0)], 0.0, 2.0);
        let d = resample(&s, InterpKind::CubicSpline, 4.0).unwrap();
        assert_eq!(d.applied, None);
        assert!(d.values.as_slice().iter().all(|&v| v == 2.0));
    }

    #[test]
    fn duplicate_timestamps_keep_last() {
        let s = seg(&[(0.0, 1.0), (1.0, 2.0), (1.0, 9.0)], 0.0, 2.0);
        assert_eq!(at(&s, InterpKind::Linear, 2.0, 1.0), 9.0);
    }

    #[test]
    fn empty_segment_is_an_error() {
        let s = seg(&[], 0.0, 2.0);
        assert!(matches!(
            resample(&s, InterpKind::Linear, 10.0),
            Err(Error::EmptySegment)
        ));
    }

    #[test]
    fn grid_size_and_spacing() {
        let s = seg(&[(0.3, 1.0), (1.7, 2.0)], 0.0, 2.0);
        let d = resample(&s, InterpKind::Linear, 40.0).unwrap();
        assert_eq!(d.grid.len(), 80);
        assert_eq!(d.values.shape(), (80, 1));
        for w in d.grid.windows(2) {
            assert!((w[1] - w[0] - 0.025).abs() < 1e-12);
        }
    }

    #[test]
    fn quadratic_reproduces_linear_data() {
        let pts: Vec<(f64, f64)> = [0.0, 0.3, 0.9, 1.4, 1.9]
            .iter()
            .map(|&t| (t, 2.0 * t - 1.0))
            .collect();
        let s = seg(&pts, 0.0, 2.0);
        let d = resample(&s, InterpKind::QuadraticSpline, 20.0).unwrap();
        for (i, &t) in d.grid.iter().enumerate() {
            let expect = 2.0 * t.clamp(0.0, 1.9) - 1.0;
            assert!((d.values.get(i, 0) - expect).abs() < 1e-12);
        }
    }

    #[test]
    fn quadratic_is_c1_at_knots() {
        let x = [0.0, 0.4, 1.1, 1.5, 2.0];
        let y = [0.3, -0.2, 0.8, 0.1, 0.5];
        let (b, c) = quadratic_coefficients(&x, &y);
        for i in 0..b.len() - 1 {
            let h = x[i + 1] - x[i];
            assert!((b[i] + 2.0 * c[i] * h - b[i + 1]).abs() < 1e-12);
            assert!((y[i] + b[i] * h + c[i] * h * h - y[i + 1]).abs() < 1e-12);
        }
    }

    #[test]
    fn interpolation_error_cases() {
        let mk = |vals: &[f64]| DenseSegment {
            grid: (0..vals.len()).map(|i| i as f64).collect(),
            values: Matrix::from_vec(vals.len(), 1, vals.to_vec()).unwrap(),
            label: 0,
            applied: Some(InterpKind::Linear),
        };
        let a = mk(&[0.0, 2.0]);
        assert_eq!(interpolation_error(&a, &a).unwrap(), 0.0);
        assert_eq!(interpolation_error(&a, &mk(&[1.0, 3.0])).unwrap(), 1.0);
        assert_eq!(interpolation_error(&a, &mk(&[1.0, 1.0])).unwrap(), 1.0);
        assert!(interpolation_error(&a, &mk(&[1.0])).is_err());
    }

    #[test]
    fn kind_parsing() {
        assert_eq!("cubic".parse::<InterpKind>().unwrap(), InterpKind::CubicSpline);
        assert_eq!(
            serde_json::from_str::<InterpKind>("\"quadratic\"").unwrap(),
            InterpKind::QuadraticSpline
        );
        assert!("spline".parse::<InterpKind>().is_err());
    }
}
