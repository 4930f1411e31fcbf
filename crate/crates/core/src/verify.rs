//! Independent checks: KP-I residual by finite differences, convergence
//! order, lattice periodicity, envelope drift and peak structure.

use alloc::vec::Vec;
use core::fmt;


#[allow(unused_imports)]
use num_traits::Float;

use crate::linalg::RMat3;
use crate::periods::{Lattice, WaveData};
use crate::solution::{eval_field, Axis, FieldGrid, FieldKind, FieldRequest, GridPlane, SolutionError};

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum VerifyError {
    Solution(SolutionError),
    GridTooSmall,
    InvalidStep(f64),
    RoundoffFloor { coarse: f64, fine: f64, floor: f64 },
    FlatField,
    WindowTooShort { span: f64, required: f64 },
    NoPlaneSublattice,
}

impl fmt::Display for VerifyError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            VerifyError::Solution(e) => write!(f, "{e}"),
            VerifyError::GridTooSmall => write!(f, "GridTooSmall: sample grid has no interior points"),
            VerifyError::InvalidStep(h) => write!(f, "finite-difference step must be positive (got {h})"),
            VerifyError::RoundoffFloor { coarse, fine, floor } => write!(
                f,
                "RoundoffFloor: residuals {coarse:e} and {fine:e} are below the roundoff floor {floor:e}"
            ),
            VerifyError::FlatField => write!(f, "FlatField: correlation peak is not unique"),
            VerifyError::WindowTooShort { span, required } => {
                write!(f, "window spans {span}, needs at least two envelope periods ({required})")
            }
            VerifyError::NoPlaneSublattice => write!(f, "no lattice vector lies in the sampled plane"),
        }
    }
}

impl core::error::Error for VerifyError {}

impl From<SolutionError> for VerifyError {
    fn from(e: SolutionError) -> Self {
        VerifyError::Solution(e)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum StencilOrder {
    Two,
    Four,
    Six,
}

impl StencilOrder {
    pub fn as_u32(&self) -> u32 {
        match self {
            StencilOrder::Two => 2,
            StencilOrder::Four => 4,
            StencilOrder::Six => 6,
        }
    }

    /// Central stencils (offsets −r..=r) for d/dx, d²/dx² and d⁴/dx⁴.
    fn first(&self) -> &'static [f64] {
        match self {
            StencilOrder::Two => &[-0.5, 0.0, 0.5],
            StencilOrder::Four => &[1.0 / 12.0, -2.0 / 3.0, 0.0, 2.0 / 3.0, -1.0 / 12.0],
            StencilOrder::Six => &[-1.0 / 60.0, 3.0 / 20.0, -3.0 / 4.0, 0.0, 3.0 / 4.0, -3.0 / 20.0, 1.0 / 60.0],
        }
    }

    fn second(&self) -> &'static [f64] {
        match self {
            StencilOrder::Two => &[1.0, -2.0, 1.0],
            StencilOrder::Four => &[-1.0 / 12.0, 4.0 / 3.0, -5.0 / 2.0, 4.0 / 3.0, -1.0 / 12.0],
            StencilOrder::Six => &[
                1.0 / 90.0,
                -3.0 / 20.0,
                3.0 / 2.0,
                -49.0 / 18.0,
                3.0 / 2.0,
                -3.0 / 20.0,
                1.0 / 90.0,
            ],
        }
    }

    fn fourth(&self) -> &'static [f64] {
        match self {
            StencilOrder::Two => &[1.0, -4.0, 6.0, -4.0, 1.0],
            StencilOrder::Four => &[-1.0 / 6.0, 2.0, -13.0 / 2.0, 28.0 / 3.0, -13.0 / 2.0, 2.0, -1.0 / 6.0],
            StencilOrder::Six => &[
                7.0 / 240.0,
                -2.0 / 5.0,
                169.0 / 60.0,
                -122.0 / 15.0,
                91.0 / 8.0,
                -122.0 / 15.0,
                169.0 / 60.0,
                -2.0 / 5.0,
                7.0 / 240.0,
            ],
        }
    }
}

/// Rectangular sample set in (x, z, t).
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SampleGrid {
    pub x: Axis,
    pub z: Axis,
    pub t: Axis,
}

impl SampleGrid {
    /// 41×41×5 points over one region of the flow.
    pub fn standard() -> Self {
        SampleGrid {
            x: Axis { min: -4.0, max: 4.0, count: 41 },
            z: Axis { min: -1.0, max: 1.0, count: 41 },
            t: Axis { min: 0.0, max: 0.2, count: 5 },
        }
    }

    fn points(&self) -> impl Iterator<Item = (f64, f64, f64)> + '_ {
        (0..self.t.count).flat_map(move |it| {
            (0..self.z.count)
                .flat_map(move |iz| (0..self.x.count).map(move |ix| (self.x.value(ix), self.z.value(iz), self.t.value(it))))
        })
    }
}

/// Finite-difference steps along x, z and t.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Steps {
    pub x: f64,
    pub z: f64,
    pub t: f64,
}

impl Steps {
    pub fn uniform(h: f64) -> Self {
        Steps { x: h, z: h, t: h }
    }

    pub fn scaled(&self, s: f64) -> Self {
        Steps { x: self.x * s, z: self.z * s, t: self.t * s }
    }

    fn check(&self) -> Result<(), VerifyError> {
        for h in [self.x, self.z, self.t] {
            if !(h > 0.0 && h.is_finite()) {
                return Err(VerifyError::InvalidStep(h));
            }
        }
        Ok(())
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ResidualReport {
    pub max_abs_residual: f64,
    /// Largest magnitude among the four terms over the grid.
    pub normalizer: f64,
    /// max_abs_residual / normalizer, or 0 when every term vanishes.
    pub normalized_residual: f64,
    pub fd_order: u32,
    pub steps: Steps,
}

fn phase_column_max(wave: &WaveData, axis: usize) -> f64 {
    wave.phase.iter().fold(0.0f64, |m, row| m.max(row[axis].abs()))
}

/// Default isotropic step: 1e−2 over the largest wave number or frequency.
pub fn default_step(wave: &WaveData) -> f64 {
    1e-2 / (0..3).map(|a| phase_column_max(wave, a)).fold(0.0, f64::max)
}

/// Per-axis steps for a stencil order: a scale over the fastest phase along
/// each axis. Order 6 uses the smaller scale since it reaches the roundoff
/// floor of u_xxxx (∝ h⁻⁴) first; orders 2 and 4 stay well above it even
/// after halving.
pub fn tuned_steps(wave: &WaveData, order: StencilOrder) -> Steps {
    let scale = match order {
        StencilOrder::Two | StencilOrder::Four => 1.25e-2,
        StencilOrder::Six => 6.25e-3,
    };
    let h = |a| scale / phase_column_max(wave, a).max(1e-300);
    Steps { x: h(0), z: h(1), t: h(2) }
}

/// Residual of 3u_zz − (4u_t + u_xxx + 6uu_x)_x for the KP-I field with one
/// step along every axis.
pub fn kpi_residual(
    wave: &WaveData,
    grid: &SampleGrid,
    step: f64,
    order: StencilOrder,
    eps: f64,
) -> Result<ResidualReport, VerifyError> {
    kpi_residual_steps(wave, grid, Steps::uniform(step), order, eps)
}

pub fn kpi_residual_steps(
    wave: &WaveData,
    grid: &SampleGrid,
    steps: Steps,
    order: StencilOrder,
    eps: f64,
) -> Result<ResidualReport, VerifyError> {
    let u = |x: f64, z: f64, t: f64| eval_field(&FieldRequest { field: FieldKind::KpiU, x, z, t, wave, eps });
    kpi_residual_of(u, grid, steps, order)
}

/// Same residual for an arbitrary field u(x, z, t).
pub fn kpi_residual_of<F>(u: F, grid: &SampleGrid, steps: Steps, order: StencilOrder) -> Result<ResidualReport, VerifyError>
where
    F: Fn(f64, f64, f64) -> Result<f64, SolutionError>,
{
    steps.check()?;
    if grid.x.count == 0 || grid.z.count == 0 || grid.t.count == 0 {
        return Err(VerifyError::GridTooSmall);
    }
    let d1 = order.first();
    let d2 = order.second();
    let d4 = order.fourth();
    let Steps { x: hx, z: hz, t: ht } = steps;
    let mut max_res: f64 = 0.0;
    let mut norm: f64 = 0.0;
    for (x, z, t) in grid.points() {
        let r4 = (d4.len() / 2) as i32;
        let mut xline = [0.0f64; 9];
        for (k, v) in xline.iter_mut().enumerate().take(d4.len()) {
            *v = u(x + hx * f64::from(k as i32 - r4), z, t)?;
        }
        let c = xline[r4 as usize];
        let pick = |st: &[f64]| -> f64 {
            let r = (st.len() / 2) as i32;
            st.iter().enumerate().map(|(k, w)| w * xline[(r4 - r + k as i32) as usize]).sum()
        };
        let ux = pick(d1) / hx;
        let uxx = pick(d2) / (hx * hx);
        let uxxxx = pick(d4) / (hx * hx * hx * hx);
        let r2 = (d2.len() / 2) as i32;
        let mut uzz = 0.0;
        for (k, w) in d2.iter().enumerate() {
            let off = k as i32 - r2;
            let v = if off == 0 { c } else { u(x, z + hz * f64::from(off), t)? };
            uzz += w * v;
        }
        uzz /= hz * hz;
        let r1 = (d1.len() / 2) as i32;
        let mut uxt = 0.0;
        for (i, wi) in d1.iter().enumerate() {
            if *wi == 0.0 {
                continue;
            }
            for (j, wj) in d1.iter().enumerate() {
                if *wj == 0.0 {
                    continue;
                }
                let (oi, oj) = (i as i32 - r1, j as i32 - r1);
                uxt += wi * wj * u(x + hx * f64::from(oi), z, t + ht * f64::from(oj))?;
            }
        }
        uxt /= hx * ht;
        let terms = [3.0 * uzz, 4.0 * uxt, uxxxx, 6.0 * (ux * ux + c * uxx)];
        let res = terms[0] - terms[1] - terms[2] - terms[3];
        max_res = max_res.max(res.abs());
        for tv in terms {
            norm = norm.max(tv.abs());
        }
    }
    let normalized = if norm > 0.0 { max_res / norm } else { 0.0 };
    Ok(ResidualReport {
        max_abs_residual: max_res,
        normalizer: norm,
        normalized_residual: normalized,
        fd_order: order.as_u32(),
        steps,
    })
}

/// log2(R(h)/R(h/2)) for the KP-I residual.
pub fn convergence_order(
    wave: &WaveData,
    grid: &SampleGrid,
    steps: Steps,
    order: StencilOrder,
    eps: f64,
) -> Result<f64, VerifyError> {
    let u = |x: f64, z: f64, t: f64| eval_field(&FieldRequest { field: FieldKind::KpiU, x, z, t, wave, eps });
    convergence_order_of(u, grid, steps, order)
}

pub fn convergence_order_of<F>(u: F, grid: &SampleGrid, steps: Steps, order: StencilOrder) -> Result<f64, VerifyError>
where
    F: Fn(f64, f64, f64) -> Result<f64, SolutionError>,
{
    let coarse = kpi_residual_of(&u, grid, steps, order)?;
    let fine = kpi_residual_of(&u, grid, steps.scaled(0.5), order)?;
    order_from(&coarse, &fine)
}

/// Observed order from residuals at h and h/2.
pub fn order_from(coarse: &ResidualReport, fine: &ResidualReport) -> Result<f64, VerifyError> {
    let floor = 10.0 * f64::EPSILON * coarse.normalizer.max(fine.normalizer);
    if coarse.max_abs_residual <= floor && fine.max_abs_residual <= floor {
        return Err(VerifyError::RoundoffFloor { coarse: coarse.max_abs_residual, fine: fine.max_abs_residual, floor });
    }
    Ok((coarse.max_abs_residual / fine.max_abs_residual).log2())
}

/// Maximum of |u(p + s) − u(p)| / (1 + |u(p)|) over samples p and shifts s.
pub fn shift_deviation(
    wave: &WaveData,
    shifts: &[[f64; 3]],
    samples: &[[f64; 3]],
    eps: f64,
) -> Result<f64, VerifyError> {
    let u = |p: [f64; 3]| eval_field(&FieldRequest { field: FieldKind::KpiU, x: p[0], z: p[1], t: p[2], wave, eps });
    let mut worst: f64 = 0.0;
    for s in samples {
        let base = u(*s)?;
        for sh in shifts {
            let moved = if sh.iter().all(|v| *v == 0.0) { base } else { u([s[0] + sh[0], s[1] + sh[1], s[2] + sh[2]])? };
            worst = worst.max((moved - base).abs() / (1.0 + base.abs()));
        }
    }
    Ok(worst)
}

/// Deviation under each lattice edge (columns of `edges`).
pub fn periodicity_check(wave: &WaveData, edges: &RMat3, samples: &[[f64; 3]], eps: f64) -> Result<f64, VerifyError> {
    let shifts: [[f64; 3]; 3] = core::array::from_fn(|k| [edges[0][k], edges[1][k], edges[2][k]]);
    shift_deviation(wave, &shifts, samples, eps)
}

/// Signed shift of the long-wave envelope of u(·, z, t) between t0 and t1.
///
/// Each profile is low-passed by a cascade of moving averages over
/// 2/|k1+k3|, 2/|k1| and 2/|k3| (one spatial period of each carrier), and
/// the envelope is tracked over sub-steps no longer than 1/(8|κ1 − κ3|).
/// Positive means motion towards +x.
pub fn envelope_drift(wave: &WaveData, z: f64, t0: f64, t1: f64, window: &Axis, eps: f64) -> Result<f64, VerifyError> {
    window.validate()?;
    if t0 == t1 {
        return Ok(0.0);
    }
    let (lo, hi, sign) = if t0 < t1 { (t0, t1, 1.0) } else { (t1, t0, -1.0) };
    let k1 = wave.phase[0][0];
    let k3 = wave.phase[2][0];
    let w1 = wave.phase[0][2];
    let w3 = wave.phase[2][2];
    let envelope_period = 2.0 / (k1 - k3).abs();
    let span = window.max - window.min;
    if span < 2.0 * envelope_period {
        return Err(VerifyError::WindowTooShort { span, required: 2.0 * envelope_period });
    }
    let dx = window.spacing();
    let widths = [2.0 / (k1 + k3).abs(), 2.0 / k1.abs(), 2.0 / k3.abs()];
    let lens: Vec<usize> = widths.iter().map(|w| ((w / dx).round() as usize).max(1)).collect();
    let filter_margin: usize = lens.iter().sum();
    let max_lag = ((0.5 * envelope_period / dx).floor() as usize).max(1);
    let n = window.count;
    if n <= 2 * (filter_margin + max_lag) + 8 {
        return Err(VerifyError::WindowTooShort { span, required: span * 2.0 });
    }
    let beat = (w1 - w3).abs();
    let dt_max = if beat > 0.0 { 1.0 / (8.0 * beat) } else { hi - lo };
    let steps = (((hi - lo) / dt_max).ceil() as usize).max(1);

    let profile = |t: f64| -> Result<Vec<f64>, VerifyError> {
        let mut v = Vec::with_capacity(n);
        for i in 0..n {
            v.push(eval_field(&FieldRequest { field: FieldKind::KpiU, x: window.value(i), z, t, wave, eps })?);
        }
        for len in &lens {
            v = moving_average(&v, *len);
        }
        Ok(v)
    };
    let valid = (filter_margin, n - filter_margin);
    let mut prev = profile(lo)?;
    let mut total = 0.0;
    for s in 1..=steps {
        let t = if s == steps { hi } else { lo + (hi - lo) * (s as f64) / (steps as f64) };
        let cur = profile(t)?;
        total += correlation_lag(&prev, &cur, valid, max_lag)? * dx;
        prev = cur;
    }
    Ok(sign * total)
}

/// Centred box average; window start is offset by len/2.
fn moving_average(v: &[f64], len: usize) -> Vec<f64> {
    let n = v.len();
    let mut prefix = Vec::with_capacity(n + 1);
    prefix.push(0.0);
    let mut acc = 0.0;
    for x in v {
        acc += x;
        prefix.push(acc);
    }
    let half = len / 2;
    (0..n)
        .map(|i| {
            let a = i.saturating_sub(half);
            let b = (a + len).min(n);
            (prefix[b] - prefix[a]) / ((b - a) as f64)
        })
        .collect()
}

/// Lag (in samples, with parabolic refinement) maximizing
/// Σ a_j b_{j+L} over pairs with both indices inside `valid`.
fn correlation_lag(a: &[f64], b: &[f64], valid: (usize, usize), max_lag: usize) -> Result<f64, VerifyError> {
    let (lo, hi) = valid;
    let mean = |v: &[f64]| v[lo..hi].iter().sum::<f64>() / ((hi - lo) as f64);
    let (ma, mb) = (mean(a), mean(b));
    let spread = a[lo..hi].iter().map(|x| (x - ma).abs()).fold(0.0, f64::max);
    if !(spread > 1e-12 * ma.abs().max(1e-300)) {
        return Err(VerifyError::FlatField);
    }
    let lags: Vec<i64> = (-(max_lag as i64)..=(max_lag as i64)).collect();
    let cc: Vec<f64> = lags
        .iter()
        .map(|&l| {
            let mut s = 0.0;
            for j in lo as i64..hi as i64 {
                let k = j + l;
                if k >= lo as i64 && k < hi as i64 {
                    s += (a[j as usize] - ma) * (b[k as usize] - mb);
                }
            }
            s
        })
        .collect();
    let (best, _) = cc.iter().enumerate().fold((0, f64::NEG_INFINITY), |acc, (i, v)| if *v > acc.1 { (i, *v) } else { acc });
    if best == 0 || best + 1 == cc.len() {
        return Err(VerifyError::FlatField);
    }
    let (l, c, r) = (cc[best - 1], cc[best], cc[best + 1]);
    let den = (l + r) - 2.0 * c;
    if !(den < 0.0) {
        return Err(VerifyError::FlatField);
    }
    let off = 0.5 * (l - r) / den;
    Ok(lags[best] as f64 + off)
}

/// Shortest lattice vector (integer combination of edges with coefficients
/// in [−6, 6]) lying in the sampled plane, as (x, second-axis) components.
pub fn plane_sublattice(lattice: &Lattice, plane: GridPlane) -> Result<[f64; 2], VerifyError> {
    let (fixed, other) = match plane {
        GridPlane::XZ { .. } => (2, 1),
        GridPlane::XT { .. } => (1, 2),
    };
    let e = &lattice.edges;
    let scale = (0..3).fold(0.0f64, |m, k| m.max(e[fixed][k].abs()));
    let mut best: Option<([f64; 2], f64)> = None;
    for n0 in -6i32..=6 {
        for n1 in -6i32..=6 {
            for n2 in -6i32..=6 {
                if n0 == 0 && n1 == 0 && n2 == 0 {
                    continue;
                }
                let n = [f64::from(n0), f64::from(n1), f64::from(n2)];
                let comp = |row: usize| e[row][0] * n[0] + e[row][1] * n[1] + e[row][2] * n[2];
                if comp(fixed).abs() > 1e-9 * scale.max(1.0) {
                    continue;
                }
                let v = [comp(0), comp(other)];
                let len = (v[0] * v[0] + v[1] * v[1]).sqrt();
                if len > 1e-9 && best.map_or(true, |(_, b)| len < b - 1e-12) {
                    best = Some((v, len));
                }
            }
        }
    }
    best.map(|(v, _)| v).ok_or(VerifyError::NoPlaneSublattice)
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PeakReport {
    /// Position of the highest interior peak.
    pub peak: [f64; 2],
    pub translates_checked: usize,
    /// Largest |found − predicted| over translates, relative to |v|.
    pub max_position_error: f64,
    /// Largest relative difference of translate heights from the top peak.
    pub max_height_error: f64,
}

/// Checks that translates of the highest peak by multiples of `v` are peaks.
pub fn peak_lattice_check(grid: &FieldGrid, v: [f64; 2]) -> Result<PeakReport, VerifyError> {
    let (nx, ny) = (grid.spec.x.count, grid.spec.y.count);
    if nx < 5 || ny < 5 {
        return Err(VerifyError::GridTooSmall);
    }
    let (dx, dy) = (grid.spec.x.spacing(), grid.spec.y.spacing());
    let vlen = (v[0] * v[0] + v[1] * v[1]).sqrt();
    let radius = 0.02 * vlen;
    let is_local_max = |ix: usize, iy: usize| {
        let c = grid.get(ix, iy);
        (ix > 0 && ix + 1 < nx && iy > 0 && iy + 1 < ny)
            && (-1i64..=1).all(|a| (-1i64..=1).all(|b| (a == 0 && b == 0) || grid.get((ix as i64 + a) as usize, (iy as i64 + b) as usize) <= c))
    };
    let refine = |ix: usize, iy: usize| -> [f64; 2] {
        let c = grid.get(ix, iy);
        let para = |l: f64, r: f64| {
            let den = l + r - 2.0 * c;
            if den < 0.0 { 0.5 * (l - r) / den } else { 0.0 }
        };
        let ox = para(grid.get(ix - 1, iy), grid.get(ix + 1, iy));
        let oy = para(grid.get(ix, iy - 1), grid.get(ix, iy + 1));
        [grid.spec.x.value(ix) + ox * dx, grid.spec.y.value(iy) + oy * dy]
    };
    let mut top: Option<(usize, usize, f64)> = None;
    for iy in 1..ny - 1 {
        for ix in 1..nx - 1 {
            let c = grid.get(ix, iy);
            if is_local_max(ix, iy) && top.map_or(true, |t| c > t.2) {
                top = Some((ix, iy, c));
            }
        }
    }
    let (tx, ty, tv) = top.ok_or(VerifyError::FlatField)?;
    let peak = refine(tx, ty);
    let inner = |p: [f64; 2]| {
        p[0] > grid.spec.x.min + 2.0 * dx
            && p[0] < grid.spec.x.max - 2.0 * dx
            && p[1] > grid.spec.y.min + 2.0 * dy
            && p[1] < grid.spec.y.max - 2.0 * dy
    };
    let mut checked = 0;
    let mut pos_err: f64 = 0.0;
    let mut height_err: f64 = 0.0;
    for m in -50i32..=50 {
        if m == 0 {
            continue;
        }
        let target = [peak[0] + f64::from(m) * v[0], peak[1] + f64::from(m) * v[1]];
        if !inner(target) {
            continue;
        }
        let cx = ((target[0] - grid.spec.x.min) / dx).round() as i64;
        let cy = ((target[1] - grid.spec.y.min) / dy).round() as i64;
        let rx = (radius / dx).ceil() as i64 + 1;
        let ry = (radius / dy).ceil() as i64 + 1;
        let mut found: Option<(f64, [f64; 2], f64)> = None;
        for iy in (cy - ry).max(1)..=(cy + ry).min(ny as i64 - 2) {
            for ix in (cx - rx).max(1)..=(cx + rx).min(nx as i64 - 2) {
                let (ix, iy) = (ix as usize, iy as usize);
                if !is_local_max(ix, iy) {
                    continue;
                }
                let p = refine(ix, iy);
                let d = ((p[0] - target[0]).powi(2) + (p[1] - target[1]).powi(2)).sqrt();
                if found.map_or(true, |f| d < f.0) {
                    found = Some((d, p, grid.get(ix, iy)));
                }
            }
        }
        let (d, _, val) = found.unwrap_or((f64::INFINITY, target, 0.0));
        checked += 1;
        pos_err = pos_err.max(d / vlen);
        height_err = height_err.max((val - tv).abs() / tv);
    }
    Ok(PeakReport { peak, translates_checked: checked, max_position_error: pos_err, max_height_error: height_err })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::curve::CurveParams;
    use crate::pipeline::{solve, Solution, SolveOptions};
    use crate::reference;
    use std::sync::OnceLock;

    fn solved() -> &'static Solution {
        static S: OnceLock<Solution> = OnceLock::new();
        S.get_or_init(|| {
            let p = CurveParams::new(reference::A, reference::B, reference::PHI, 0.0, 0.1).unwrap();
            solve(&p, &SolveOptions::default()).unwrap()
        })
    }

    fn small_grid() -> SampleGrid {
        SampleGrid {
            x: Axis { min: -1.0, max: 1.0, count: 5 },
            z: Axis { min: -0.3, max: 0.3, count: 3 },
            t: Axis { min: 0.0, max: 0.1, count: 2 },
        }
    }

    #[test]
    fn constant_field_has_zero_residual() {
        let u = |_: f64, _: f64, _: f64| Ok(0.0);
        for order in [StencilOrder::Two, StencilOrder::Four, StencilOrder::Six] {
            let r = kpi_residual_of(u, &small_grid(), Steps::uniform(0.01), order).unwrap();
            assert_eq!(r.max_abs_residual, 0.0);
            assert_eq!(r.normalized_residual, 0.0);
        }
        let err = convergence_order_of(u, &small_grid(), Steps::uniform(0.01), StencilOrder::Two).unwrap_err();
        assert!(matches!(err, VerifyError::RoundoffFloor { .. }));
    }

    #[test]
    fn stencils_are_exact_on_polynomials() {
        // u = x⁴/24 + z²/2: u_xxxx = 1, u_zz = 1, u_xt = 0, u_x = x³/6, u_xx = x²/2
        let u = |x: f64, z: f64, _t: f64| Ok(x.powi(4) / 24.0 + z * z / 2.0);
        let g = SampleGrid { x: Axis { min: 0.0, max: 0.0, count: 1 }, ..small_grid() };
        let r = kpi_residual_of(u, &g, Steps::uniform(0.1), StencilOrder::Four).unwrap();
        // 3 − 0 − 1 − 6(0 + u·0) at x = 0
        assert!((r.max_abs_residual - 2.0).abs() < 1e-10);
    }

    #[test]
    fn stencil_weights_are_consistent() {
        for order in [StencilOrder::Two, StencilOrder::Four, StencilOrder::Six] {
            let s: f64 = order.second().iter().sum();
            let f: f64 = order.fourth().iter().sum();
            let d: f64 = order.first().iter().enumerate().map(|(k, w)| w * (k as f64 - (order.first().len() / 2) as f64)).sum();
            assert!(s.abs() < 1e-14 && f.abs() < 1e-13 && (d - 1.0).abs() < 1e-14);
        }
    }

    #[test]
    fn reference_residual_is_small_and_corrupted_is_not() {
        let s = solved();
        let g = small_grid();
        let h = tuned_steps(&s.wave, StencilOrder::Six);
        let good = kpi_residual_steps(&s.wave, &g, h, StencilOrder::Six, 1e-15).unwrap();
        assert!(good.normalized_residual < 5e-5, "{good:?}");
        let bad_wave = s.wave.with_amplitude(s.wave.amplitude * 1.01).unwrap();
        let bad = kpi_residual_steps(&bad_wave, &g, h, StencilOrder::Six, 1e-15).unwrap();
        assert!(bad.normalized_residual >= 100.0 * good.normalized_residual);
    }

    #[test]
    fn zero_shift_and_perturbed_edges() {
        let s = solved();
        let samples = [[0.1, 0.2, 0.0], [-1.7, 0.4, 0.13]];
        assert_eq!(shift_deviation(&s.wave, &[[0.0; 3]], &samples, 1e-15).unwrap(), 0.0);
        let good = periodicity_check(&s.wave, &s.lattice.edges, &samples, 1e-15).unwrap();
        assert!(good < 1e-9, "{good}");
        let mut edges = s.lattice.edges;
        for row in edges.iter_mut() {
            for v in row.iter_mut() {
                *v += 1e-3;
            }
        }
        let bad = periodicity_check(&s.wave, &edges, &samples, 1e-15).unwrap();
        assert!(bad >= 1e-4, "{bad}");
    }

    #[test]
    fn drift_is_antisymmetric() {
        let s = solved();
        let w = Axis { min: -30.0, max: 30.0, count: 1201 };
        assert_eq!(envelope_drift(&s.wave, 0.0, 0.1, 0.1, &w, 1e-15).unwrap(), 0.0);
        let fwd = envelope_drift(&s.wave, 0.0, 0.0, 0.1, &w, 1e-15).unwrap();
        let back = envelope_drift(&s.wave, 0.0, 0.1, 0.0, &w, 1e-15).unwrap();
        assert!(fwd > 0.0);
        assert_eq!(fwd, -back);
        let short = Axis { min: 0.0, max: 5.0, count: 101 };
        assert!(matches!(envelope_drift(&s.wave, 0.0, 0.0, 0.1, &short, 1e-15), Err(VerifyError::WindowTooShort { .. })));
    }

    #[test]
    fn plane_sublattice_at_zero_shift() {
        let s = solved();
        let v = plane_sublattice(&s.lattice, GridPlane::XZ { t: 0.0 }).unwrap();
        assert!(v[0].abs() < 1e-9);
        assert!((v[1].abs() - 2.0 / s.wave.k[1]).abs() < 1e-9);
    }
}
