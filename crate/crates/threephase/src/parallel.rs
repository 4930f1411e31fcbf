//! Rayon versions of the grid sweeps. Results are identical to the
//! sequential core functions because every node is evaluated independently
//! and collected in index order.

use rayon::prelude::*;
use threephase_core::curve::CurveParams;
use threephase_core::periods::WaveData;
use threephase_core::solution::{eval_field, grid_node, Axis, FieldGrid, FieldKind, FieldRequest, GridSpec, SolutionError};
use threephase_core::verify::{kpi_residual_of, order_from, ResidualReport, SampleGrid, Steps, StencilOrder, VerifyError};

pub fn par_grid_eval(
    field: FieldKind,
    spec: &GridSpec,
    params: &CurveParams,
    wave: &WaveData,
    eps: f64,
) -> Result<FieldGrid, SolutionError> {
    spec.validate(field)?;
    let values = (0..spec.len())
        .into_par_iter()
        .map(|i| grid_node(field, spec, wave, eps, i))
        .collect::<Result<Vec<_>, _>>()?;
    Ok(FieldGrid { field, spec: *spec, values, params: *params, wave: *wave })
}

/// KP-I residual with one task per (z, t) line of the sample grid.
pub fn par_kpi_residual(
    wave: &WaveData,
    grid: &SampleGrid,
    steps: Steps,
    order: StencilOrder,
    eps: f64,
) -> Result<ResidualReport, VerifyError> {
    let u = |x: f64, z: f64, t: f64| eval_field(&FieldRequest { field: FieldKind::KpiU, x, z, t, wave, eps });
    let point = |v: f64| Axis { min: v, max: v, count: 1 };
    let lines: Vec<(f64, f64)> = (0..grid.t.count)
        .flat_map(|it| (0..grid.z.count).map(move |iz| (grid.z.value(iz), grid.t.value(it))))
        .collect();
    let parts = lines
        .par_iter()
        .map(|&(z, t)| kpi_residual_of(u, &SampleGrid { x: grid.x, z: point(z), t: point(t) }, steps, order))
        .collect::<Result<Vec<_>, _>>()?;
    let mut out = *parts.first().ok_or(VerifyError::GridTooSmall)?;
    for p in &parts[1..] {
        out.max_abs_residual = out.max_abs_residual.max(p.max_abs_residual);
        out.normalizer = out.normalizer.max(p.normalizer);
    }
    out.normalized_residual = if out.normalizer > 0.0 { out.max_abs_residual / out.normalizer } else { 0.0 };
    Ok(out)
}

/// log2(R(h)/R(h/2)) with the parallel residual.
pub fn par_convergence_order(
    wave: &WaveData,
    grid: &SampleGrid,
    steps: Steps,
    order: StencilOrder,
    eps: f64,
) -> Result<f64, VerifyError> {
    let coarse = par_kpi_residual(wave, grid, steps, order, eps)?;
    let fine = par_kpi_residual(wave, grid, steps.scaled(0.5), order, eps)?;
    order_from(&coarse, &fine)
}
