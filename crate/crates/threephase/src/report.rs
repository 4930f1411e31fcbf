//! Structured document for `threephase periods`.

use serde_json::{json, Value};
use threephase_core::linalg::CMat3;
use threephase_core::periods::WaveData;
use threephase_core::Complex64;

use crate::config::RunConfig;
use crate::Resolved;

/// Structure flags are green below these.
pub const SYMMETRY_TOL: f64 = 1e-12;
pub const REAL_PART_TOL: f64 = 1e-8;

fn c(z: Complex64) -> Value {
    json!([z.re, z.im])
}

fn cmat(m: &CMat3) -> Value {
    Value::Array(m.iter().map(|row| Value::Array(row.iter().map(|z| c(*z)).collect())).collect())
}

pub fn wave_json(w: &WaveData) -> Value {
    json!({
        "k": w.k,
        "kappa1": w.kappa1,
        "kappa3": w.kappa3,
        "phase_matrix": w.phase,
        "delta": w.delta.iter().map(|z| c(*z)).collect::<Vec<_>>(),
        "A": w.amplitude,
        "z0": w.z0,
        "h": w.h,
        "lambda0": w.lambda0,
        "alpha": w.alpha,
    })
}

pub fn periods_document(cfg: &RunConfig, resolved: &Resolved) -> Value {
    let s = &resolved.solution;
    let st = s.matrices.structure();
    let p = &s.params;
    json!({
        "params": {
            "a": p.a(), "b": p.b(), "phi": p.phi(), "lambda0": p.lambda0(), "alpha": p.alpha(),
            "lambda0_expr": cfg.lambda0.to_string(),
            "k_change_under_lambda0": resolved.k_change,
        },
        "elliptic_periods": {
            "alpha": s.periods.alpha.iter().map(|z| c(*z)).collect::<Vec<_>>(),
            "beta": s.periods.beta.iter().map(|z| c(*z)).collect::<Vec<_>>(),
        },
        "reduction_constants": {
            "c": s.constants.c.iter().map(|z| c(*z)).collect::<Vec<_>>(),
            "b": s.constants.b,
            "h": s.constants.h,
            "nome_convention": s.constants.convention.name(),
        },
        "B": cmat(&s.matrices.b),
        "C": cmat(&s.matrices.c),
        "structure": {
            "symmetry_defect": st.symmetry_defect,
            "symmetry_tolerance": SYMMETRY_TOL,
            "symmetric": st.symmetry_defect <= SYMMETRY_TOL,
            "real_part_defect": st.real_part_defect,
            "real_part_tolerance": REAL_PART_TOL,
            "real_part_is_minus_half_k": st.real_part_defect <= REAL_PART_TOL,
            "imag_leading_minors": st.imag_minors,
            "imag_positive_definite": st.imag_minors.iter().all(|m| *m > 0.0),
        },
        "chi": [s.chi.0, s.chi.1],
        "uvw": s.lattice.uvw,
        "lattice_edges": (0..3).map(|k| s.lattice.edge(k)).collect::<Vec<_>>(),
        "edge_route_difference": s.edge_route_difference,
        "abel": {
            "raw": s.delta.abel.raw.iter().map(|z| c(*z)).collect::<Vec<_>>(),
            "reduced": s.delta.delta_p.iter().map(|z| c(*z)).collect::<Vec<_>>(),
            "b_shift": s.delta.abel.b_shift,
            "error_estimate": s.delta.abel.error,
        },
        "scale_fit": {
            "A": s.scale.amplitude,
            "variation": s.scale.variation,
            "probes": s.scale.probes,
            "selected_offset_variation": s.selected_variation,
            "alternate_offset_variations": s.alternate_variations,
        },
        "wave": wave_json(&s.wave),
        "tolerances": cfg.tolerances,
    })
}
