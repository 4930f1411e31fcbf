//! End-to-end solver: curve parameters in, fully determined wave data out.

use crate::curve::{chi_coeffs, CurveParams};
use crate::periods::{
    check_edge_routes, elliptic_periods_with, period_matrices, reduction_constants, uvw_and_lattice, wave_data,
    wave_numbers, EllipticPeriods, Lattice, NomeConvention, PeriodMatrices, ReductionConstants, WaveData,
};
use crate::quadrature::{AbelOptions, QuadOptions};
use crate::solution::{
    delta_offsets, fit_amplitude_scale, median_and_variation, pointwise_scales, DeltaOffsets, ProbeGrid, ScaleFit,
};
use crate::Error;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SolveOptions {
    /// Absolute tolerance for every contour integral.
    pub quad_tol: f64,
    /// Truncation eps for theta series.
    pub theta_eps: f64,
    pub nome: NomeConvention,
    /// Also compute the lattice edges by the closed form and compare.
    pub paranoid: bool,
    pub z0: [f64; 3],
    pub probes: ProbeGrid,
    pub abel: AbelOptions,
}

impl Default for SolveOptions {
    fn default() -> Self {
        SolveOptions {
            quad_tol: 1e-12,
            theta_eps: 1e-15,
            nome: NomeConvention::Pi,
            paranoid: false,
            z0: [0.0; 3],
            probes: ProbeGrid::default(),
            abel: AbelOptions::default(),
        }
    }
}

/// Every intermediate object of a solve.
#[derive(Debug, Clone, PartialEq)]
pub struct Solution {
    pub params: CurveParams,
    pub periods: EllipticPeriods,
    pub constants: ReductionConstants,
    pub matrices: PeriodMatrices,
    pub chi: (f64, f64),
    pub lattice: Lattice,
    /// Relative difference of the two lattice-edge routes (paranoid mode).
    pub edge_route_difference: Option<f64>,
    pub delta: DeltaOffsets,
    /// Scale-fit variation of the Abel offset and of each half-period alternate.
    pub selected_variation: f64,
    pub alternate_variations: [f64; 7],
    pub scale: ScaleFit,
    pub wave: WaveData,
}

pub fn solve(params: &CurveParams, opts: &SolveOptions) -> Result<Solution, Error> {
    let quad = QuadOptions { tol: opts.quad_tol, ..opts.abel.quad };
    let periods = elliptic_periods_with(params, &quad)?;
    let constants = reduction_constants(&periods, opts.nome)?;
    let matrices = period_matrices(&constants, params);
    let chi = chi_coeffs(params);
    let lattice = uvw_and_lattice(&matrices.c, chi.0, chi.1)?;
    let edge_route_difference = if opts.paranoid {
        Some(check_edge_routes(&lattice, &matrices.c, chi.0, chi.1)?)
    } else {
        None
    };
    let abel = AbelOptions { quad, ..opts.abel };
    let delta = delta_offsets(params, &matrices, &abel)?;
    let draft = wave_data(params, &constants, &lattice, delta.delta, 1.0, opts.z0)?;

    // Half-period disambiguation: the Abel offset must give the most
    // constant pointwise scale.
    let spread = |d| -> Result<f64, Error> {
        let r = pointwise_scales(&draft.with_delta(d), &opts.probes, opts.theta_eps)?;
        Ok(median_and_variation(&r).1)
    };
    let selected_variation = spread(delta.delta)?;
    let mut alternate_variations = [0.0; 7];
    let mut best = (selected_variation, delta.delta);
    for (slot, alt) in alternate_variations.iter_mut().zip(delta.alternates.iter()) {
        *slot = spread(*alt)?;
        if *slot < best.0 {
            best = (*slot, *alt);
        }
    }
    let draft = draft.with_delta(best.1);
    let scale = fit_amplitude_scale(&draft, &opts.probes, opts.theta_eps)?;
    let wave = draft.with_amplitude(scale.amplitude)?;
    Ok(Solution {
        params: *params,
        periods,
        constants,
        matrices,
        chi,
        lattice,
        edge_route_difference,
        delta,
        selected_variation,
        alternate_variations,
        scale,
        wave,
    })
}

/// λ0 given literally or through the wave numbers.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Lambda0Spec {
    Value(f64),
    /// λ0 = k2/(4k1)
    K2Over4K1,
    /// λ0 = k2/(4k3)
    K2Over4K3,
}

/// Resolves λ0. Symbolic values are computed from k_j at λ0 = 0 and the
/// wave numbers are recomputed at the resolved λ0; returns the parameters
/// and the relative change of k (which should vanish).
pub fn resolve_lambda0(params: &CurveParams, spec: Lambda0Spec, opts: &SolveOptions) -> Result<(CurveParams, f64), Error> {
    let target = match spec {
        Lambda0Spec::Value(v) => return Ok((params.with_lambda0(v)?, 0.0)),
        other => other,
    };
    let quad = QuadOptions { tol: opts.quad_tol, ..opts.abel.quad };
    let k_at = |p: &CurveParams| -> Result<[f64; 3], Error> {
        let ep = elliptic_periods_with(p, &quad)?;
        Ok(wave_numbers(&reduction_constants(&ep, opts.nome)?)?)
    };
    let base = params.with_lambda0(0.0)?;
    let k = k_at(&base)?;
    let l0 = match target {
        Lambda0Spec::K2Over4K1 => k[1] / (4.0 * k[0]),
        _ => k[1] / (4.0 * k[2]),
    };
    let resolved = params.with_lambda0(l0)?;
    let k2 = k_at(&resolved)?;
    let change = (0..3).fold(0.0f64, |m, j| m.max(((k2[j] - k[j]) / k[j]).abs()));
    Ok((resolved, change))
}
