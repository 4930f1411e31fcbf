//! Elliptic periods, reduction constants, the matrices B and C, wave
//! numbers and the space-time period lattice.

use core::fmt;

use num_complex::Complex64;
#[allow(unused_imports)]
use num_traits::Float;


use crate::curve::{chi_coeffs, CurveParams};
use crate::linalg::{
    cmat_im, cmat_inv, cmat_max_abs, cmat_mul, cmat_re, imat_mul, imat_sub, imat_to_real, imat_transpose,
    leading_minors, rmat_det, rmat_inv, rmat_max_abs, rmat_mul, CMat3, IMat3, RMat3,
};
use crate::quadrature::{elliptic_lattice, CurveTag, CycleTag, QuadOptions, QuadratureError};
use crate::theta::REDUCE_MATRIX;

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum PeriodsError {
    Quadrature(QuadratureError),
    DegeneratePeriods { index: usize },
    NonImaginaryConstant { index: usize, real_part: f64 },
    NonRealB { index: usize, imag_part: f64 },
    NonPositiveB { index: usize, value: f64 },
    NonRealUvw { max_imag: f64 },
    SingularUvw { det: f64 },
    EdgeRouteMismatch { difference: f64 },
    NonRealWaveNumber { index: usize },
    WaveRouteMismatch { difference: f64 },
    NonPositiveAmplitude(f64),
    NonFiniteOffset,
}

impl fmt::Display for PeriodsError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            PeriodsError::Quadrature(e) => write!(f, "{e}"),
            PeriodsError::DegeneratePeriods { index } => {
                write!(f, "DegeneratePeriods: vanishing denominator for constant {}", index + 1)
            }
            PeriodsError::NonImaginaryConstant { index, real_part } => {
                write!(f, "reduction constant c{} has real part {real_part:e}", index + 1)
            }
            PeriodsError::NonRealB { index, imag_part } => write!(f, "b{} has imaginary part {imag_part:e}", index + 1),
            PeriodsError::NonPositiveB { index, value } => write!(f, "b{} = {value} is not positive", index + 1),
            PeriodsError::NonRealUvw { max_imag } => write!(f, "period vectors U, V, W not real (|Im| up to {max_imag:e})"),
            PeriodsError::SingularUvw { det } => write!(f, "SingularUVW: det(U,V,W) = {det:e}"),
            PeriodsError::EdgeRouteMismatch { difference } => {
                write!(f, "lattice edges by inversion and closed form differ by {difference:e}")
            }
            PeriodsError::NonRealWaveNumber { index } => write!(f, "NonRealWaveNumber: k{} is not real", index + 1),
            PeriodsError::WaveRouteMismatch { difference } => {
                write!(f, "closed-form wave data disagree with the period vectors by {difference:e}")
            }
            PeriodsError::NonPositiveAmplitude(a) => write!(f, "amplitude scale A = {a} must be positive"),
            PeriodsError::NonFiniteOffset => write!(f, "phase offsets must be finite"),
        }
    }
}

impl core::error::Error for PeriodsError {}

impl From<QuadratureError> for PeriodsError {
    fn from(e: QuadratureError) -> Self {
        PeriodsError::Quadrature(e)
    }
}

/// Half-cycle integrals α_j, β_j (index 0 ↔ Γ+, 1 ↔ Γ1, 2 ↔ Γ−).
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct EllipticPeriods {
    pub alpha: [Complex64; 3],
    pub beta: [Complex64; 3],
}

pub fn elliptic_periods(params: &CurveParams, tol: f64) -> Result<EllipticPeriods, PeriodsError> {
    elliptic_periods_with(params, &QuadOptions::with_tol(tol))
}

pub fn elliptic_periods_with(params: &CurveParams, opts: &QuadOptions) -> Result<EllipticPeriods, PeriodsError> {
    let plus = elliptic_lattice(CurveTag::GammaPlus, params, opts)?;
    let one = elliptic_lattice(CurveTag::Gamma1, params, opts)?;
    let minus = elliptic_lattice(CurveTag::GammaMinus, params, opts)?;
    Ok(EllipticPeriods {
        alpha: [plus.half_cycle(CycleTag::APlus), one.half_cycle(CycleTag::A1), minus.half_cycle(CycleTag::AMinus)],
        beta: [plus.half_cycle(CycleTag::BPlus), one.half_cycle(CycleTag::B1), minus.half_cycle(CycleTag::BMinus)],
    })
}

/// Nome convention: `Pi` uses h = exp(−4π𝔟), `Plain` uses h = exp(−4𝔟).
/// Only `Pi` reproduces the lattice-sum theta function.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum NomeConvention {
    #[default]
    Pi,
    Plain,
}

impl NomeConvention {
    pub fn nome(&self, b: f64) -> f64 {
        match self {
            NomeConvention::Pi => (-4.0 * core::f64::consts::PI * b).exp(),
            NomeConvention::Plain => (-4.0 * b).exp(),
        }
    }

    pub fn name(&self) -> &'static str {
        match self {
            NomeConvention::Pi => "pi",
            NomeConvention::Plain => "plain",
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ReductionConstants {
    /// 𝔠_j, purely imaginary.
    pub c: [Complex64; 3],
    /// 𝔟_j > 0.
    pub b: [f64; 3],
    /// Nomes h_j ∈ (0, 1).
    pub h: [f64; 3],
    pub convention: NomeConvention,
}

/// 𝔠1 = 1/(2(α1 − 2β1)), 𝔠2 = 1/(2α2), 𝔠3 = 1/(2(α3 − 2β3)),
/// i𝔟1 = α1 𝔠1, i𝔟2 = β2 𝔠2, i𝔟3 = α3 𝔠3.
pub fn reduction_constants(ep: &EllipticPeriods, convention: NomeConvention) -> Result<ReductionConstants, PeriodsError> {
    let [a1, a2, a3] = ep.alpha;
    let [b1, b2, b3] = ep.beta;
    let dens = [(a1 - b1 * 2.0) * 2.0, a2 * 2.0, (a3 - b3 * 2.0) * 2.0];
    let nums = [a1, b2, a3];
    let scales = [a1.norm().max(b1.norm()), a2.norm(), a3.norm().max(b3.norm())];
    let mut c = [Complex64::new(0.0, 0.0); 3];
    let mut bb = [0.0; 3];
    let mut h = [0.0; 3];
    for j in 0..3 {
        if !(dens[j].norm() > 1e-14 * scales[j]) || !dens[j].re.is_finite() || !dens[j].im.is_finite() {
            return Err(PeriodsError::DegeneratePeriods { index: j });
        }
        c[j] = dens[j].inv();
        if c[j].re.abs() > 1e-10 * c[j].norm() {
            return Err(PeriodsError::NonImaginaryConstant { index: j, real_part: c[j].re });
        }
        let ib = nums[j] / dens[j];
        let bj = ib / Complex64::i();
        if bj.im.abs() > 1e-10 * bj.norm() {
            return Err(PeriodsError::NonRealB { index: j, imag_part: bj.im });
        }
        if !(bj.re > 0.0) {
            return Err(PeriodsError::NonPositiveB { index: j, value: bj.re });
        }
        bb[j] = bj.re;
        c[j].re = 0.0;
        h[j] = convention.nome(bb[j]);
    }
    Ok(ReductionConstants { c, b: bb, h, convention })
}

/// The 0/1 matrix of the anti-holomorphic involution.
pub const K: IMat3 = [[0, 1, 1], [1, 0, 1], [1, 1, 0]];
/// Cycle images under the coverings: a ↦ S a' + P b', b ↦ Q a' + R b'.
pub const S: IMat3 = [[-1, 1, 0], [1, 0, -1], [1, 0, 1]];
pub const P: IMat3 = [[0, -2, 0], [0, 0, 2], [0, 0, -2]];
pub const Q: IMat3 = [[-1, 1, 0], [0, 0, -1], [0, 0, 1]];
pub const R: IMat3 = [[0, 0, 0], [1, 1, 1], [1, 1, -1]];
/// Combined maps onto (a¹, a+, a−) and (b¹, b+, b−).
pub const MAP_A_A: IMat3 = [[-1, 1, 1], [1, 1, -1], [1, -1, 1]];
pub const MAP_A_B: IMat3 = [[0, -2, -2], [0, -2, 2], [0, 2, -2]];
pub const MAP_B_A: IMat3 = [[-1, 1, 1], [0, 1, -1], [0, -1, 1]];
pub const MAP_B_B: IMat3 = [[0, 0, 0], [1, 0, 2], [1, 2, 0]];
/// (a¹₂, a²₂) ↦ T (a+, a−), and the same for b-cycles.
pub const SECOND_COVER: [[i64; 2]; 2] = [[1, 1], [-1, 1]];

/// Defects of SᵗQ = QᵗS, RᵗP = PᵗR, SᵗR − QᵗP = 2I (all zero when exact).
pub fn covering_defects() -> [IMat3; 3] {
    let st = imat_transpose(&S);
    let qt = imat_transpose(&Q);
    let rt = imat_transpose(&R);
    let pt = imat_transpose(&P);
    let d1 = imat_sub(&imat_mul(&st, &Q), &imat_mul(&qt, &S));
    let d2 = imat_sub(&imat_mul(&rt, &P), &imat_mul(&pt, &R));
    let two = [[2, 0, 0], [0, 2, 0], [0, 0, 2]];
    let d3 = imat_sub(&imat_sub(&imat_mul(&st, &R), &imat_mul(&qt, &P)), &two);
    [d1, d2, d3]
}

/// Composes a first-level covering matrix with the second covering; the
/// first column (a¹ or b¹) passes through unchanged.
pub fn compose_second_cover(m: &IMat3) -> IMat3 {
    let mut out = [[0i64; 3]; 3];
    for i in 0..3 {
        out[i][0] = m[i][0];
        for j in 0..2 {
            out[i][j + 1] = m[i][1] * SECOND_COVER[0][j] + m[i][2] * SECOND_COVER[1][j];
        }
    }
    out
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PeriodMatrices {
    pub b: CMat3,
    pub c: CMat3,
}

pub fn period_matrices(rc: &ReductionConstants, params: &CurveParams) -> PeriodMatrices {
    let [c1, c2, c3] = rc.c;
    let [b1, b2, b3] = rc.b;
    let l = params.lambda0();
    let ab = params.a() * params.b();
    let (lm, lp) = (l * l - ab, l * l + ab);
    let c = [
        [c1 + c3, -(c1 + c3) * (2.0 * l), c1 * lm + c3 * lp],
        [c1, c2 - c1 * (2.0 * l), c1 * lm - c2 * l],
        [c3, c2 - c3 * (2.0 * l), c3 * lp - c2 * l],
    ];
    let e = |re: f64, im: f64| Complex64::new(re, im);
    let b = [
        [e(0.0, b1 + b3), e(-0.5, b1), e(-0.5, b3)],
        [e(-0.5, b1), e(0.0, b1 + b2), e(-0.5, b2)],
        [e(-0.5, b3), e(-0.5, b2), e(0.0, b2 + b3)],
    ];
    PeriodMatrices { b, c }
}

/// Measured structure of the period matrices.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct StructureReport {
    /// max |B − Bᵗ|
    pub symmetry_defect: f64,
    /// max |Re B + K/2|
    pub real_part_defect: f64,
    /// Leading principal minors of Im B.
    pub imag_minors: [f64; 3],
    /// max |C̄ + C|
    pub conjugation_defect: f64,
}

impl PeriodMatrices {
    pub fn structure(&self) -> StructureReport {
        let mut sym: f64 = 0.0;
        let mut rep: f64 = 0.0;
        let mut conj: f64 = 0.0;
        for i in 0..3 {
            for j in 0..3 {
                sym = sym.max((self.b[i][j] - self.b[j][i]).norm());
                rep = rep.max((self.b[i][j].re + 0.5 * K[i][j] as f64).abs());
                conj = conj.max((self.c[i][j].conj() + self.c[i][j]).norm());
            }
        }
        StructureReport {
            symmetry_defect: sym,
            real_part_defect: rep,
            imag_minors: leading_minors(&cmat_im(&self.b)),
            conjugation_defect: conj,
        }
    }
}

/// The upper-triangular factor T in (U, V, W) = iC·T.
pub fn uvw_factor(chi1: f64, chi2: f64) -> RMat3 {
    [
        [-2.0, 2.0 * chi1, 4.0 * chi2 - 3.0 * chi1 * chi1],
        [0.0, -4.0, 4.0 * chi1],
        [0.0, 0.0, -8.0],
    ]
}

/// Period vectors as columns (U | V | W) and the lattice edges
/// (columns of (U, V, W)⁻¹, each a shift (𝒳_k, 𝒵_k, 𝒯_k)).
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Lattice {
    pub uvw: RMat3,
    pub edges: RMat3,
}

impl Lattice {
    /// The k-th lattice edge as (x, z, t).
    pub fn edge(&self, k: usize) -> [f64; 3] {
        [self.edges[0][k], self.edges[1][k], self.edges[2][k]]
    }
}

pub fn uvw_and_lattice(c: &CMat3, chi1: f64, chi2: f64) -> Result<Lattice, PeriodsError> {
    let t = uvw_factor(chi1, chi2);
    let tc = crate::linalg::cmat_from_real(&t);
    let ic = crate::linalg::cmat_scale(c, Complex64::i());
    let uvw_c = cmat_mul(&ic, &tc);
    let scale = cmat_max_abs(&uvw_c);
    let max_imag = rmat_max_abs(&cmat_im(&uvw_c));
    if max_imag > 1e-10 * scale {
        return Err(PeriodsError::NonRealUvw { max_imag });
    }
    let uvw = cmat_re(&uvw_c);
    let det = rmat_det(&uvw);
    if !(det.abs() > 1e-12 * scale.powi(3)) {
        return Err(PeriodsError::SingularUvw { det });
    }
    let edges = rmat_inv(&uvw).ok_or(PeriodsError::SingularUvw { det })?;
    Ok(Lattice { uvw, edges })
}

/// Lattice edges by the closed form i·𝒯·C⁻¹, with
/// 𝒯 = [[½, χ1/4, χ2/4 − χ1²/16], [0, ¼, χ1/8], [0, 0, ⅛]].
pub fn lattice_edges_closed_form(c: &CMat3, chi1: f64, chi2: f64) -> Result<RMat3, PeriodsError> {
    let tri = [
        [0.5, chi1 / 4.0, chi2 / 4.0 - chi1 * chi1 / 16.0],
        [0.0, 0.25, chi1 / 8.0],
        [0.0, 0.0, 0.125],
    ];
    let cinv = cmat_inv(c).ok_or(PeriodsError::SingularUvw { det: 0.0 })?;
    let tri_c = crate::linalg::cmat_scale(&crate::linalg::cmat_from_real(&tri), Complex64::i());
    let e = cmat_mul(&tri_c, &cinv);
    let max_imag = rmat_max_abs(&cmat_im(&e));
    if max_imag > 1e-10 * cmat_max_abs(&e) {
        return Err(PeriodsError::NonRealUvw { max_imag });
    }
    Ok(cmat_re(&e))
}

/// Compares the two edge routes; errors above 1e−8 (relative).
pub fn check_edge_routes(lattice: &Lattice, c: &CMat3, chi1: f64, chi2: f64) -> Result<f64, PeriodsError> {
    let closed = lattice_edges_closed_form(c, chi1, chi2)?;
    let mut diff: f64 = 0.0;
    for i in 0..3 {
        for j in 0..3 {
            diff = diff.max((closed[i][j] - lattice.edges[i][j]).abs());
        }
    }
    let rel = diff / rmat_max_abs(&lattice.edges);
    if rel > 1e-8 {
        return Err(PeriodsError::EdgeRouteMismatch { difference: rel });
    }
    Ok(rel)
}

/// Wave numbers, frequencies and everything else needed to evaluate fields.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct WaveData {
    /// k_j = −4i𝔠1, −8i𝔠2, −4i𝔠3.
    pub k: [f64; 3],
    pub kappa1: f64,
    pub kappa3: f64,
    /// Reduced phases p̃ = phase·(x, z, t)ᵀ + z0 (R applied to U, V, W).
    pub phase: RMat3,
    /// Reduced offsets δ = R·Δ; complex in general (Re Δ is half-integer).
    pub delta: [Complex64; 3],
    /// A = −4K0².
    pub amplitude: f64,
    pub z0: [f64; 3],
    pub h: [f64; 3],
    pub lambda0: f64,
    pub alpha: f64,
}

impl WaveData {
    pub fn with_amplitude(&self, amplitude: f64) -> Result<Self, PeriodsError> {
        if !(amplitude > 0.0 && amplitude.is_finite()) {
            return Err(PeriodsError::NonPositiveAmplitude(amplitude));
        }
        Ok(WaveData { amplitude, ..*self })
    }

    pub fn with_delta(&self, delta: [Complex64; 3]) -> Self {
        WaveData { delta, ..*self }
    }

    /// Reduced phase at (x, z, t) without offsets.
    pub fn reduced_phase(&self, x: f64, z: f64, t: f64) -> [f64; 3] {
        let m = &self.phase;
        let mut out = [0.0; 3];
        for (j, o) in out.iter_mut().enumerate() {
            *o = m[j][0] * x + m[j][1] * z + m[j][2] * t + self.z0[j];
        }
        out
    }
}

/// κ1 = 4k1(3λ0² − ab + (a²+b²)cos2φ), κ3 = 4k3(3λ0² + ab + (a²+b²)cos2φ).
pub fn frequencies(params: &CurveParams, k: &[f64; 3]) -> (f64, f64) {
    let l = params.lambda0();
    let ab = params.a() * params.b();
    let s = (params.a() * params.a() + params.b() * params.b()) * params.cos2phi();
    (4.0 * k[0] * (3.0 * l * l - ab + s), 4.0 * k[2] * (3.0 * l * l + ab + s))
}

pub fn wave_numbers(rc: &ReductionConstants) -> Result<[f64; 3], PeriodsError> {
    let factors = [-4.0, -8.0, -4.0];
    let mut k = [0.0; 3];
    for j in 0..3 {
        let kj = rc.c[j] * Complex64::new(0.0, factors[j]);
        if kj.im.abs() > 1e-8 * kj.norm() || kj.norm() == 0.0 {
            return Err(PeriodsError::NonRealWaveNumber { index: j });
        }
        k[j] = kj.re;
    }
    Ok(k)
}

pub fn wave_data(
    params: &CurveParams,
    rc: &ReductionConstants,
    lattice: &Lattice,
    delta: [Complex64; 3],
    amplitude: f64,
    z0: [f64; 3],
) -> Result<WaveData, PeriodsError> {
    if !(amplitude > 0.0 && amplitude.is_finite()) {
        return Err(PeriodsError::NonPositiveAmplitude(amplitude));
    }
    if delta.iter().any(|d| !d.re.is_finite() || !d.im.is_finite()) || z0.iter().any(|v| !v.is_finite()) {
        return Err(PeriodsError::NonFiniteOffset);
    }
    let k = wave_numbers(rc)?;
    let (kappa1, kappa3) = frequencies(params, &k);
    let phase = rmat_mul(&imat_to_real(&REDUCE_MATRIX), &lattice.uvw);
    let scale = k.iter().chain([kappa1, kappa3].iter()).fold(0.0f64, |m, v| m.max(v.abs()));
    let pairs = [
        (phase[0][0], k[0]),
        (phase[1][1], k[1]),
        (phase[2][0], k[2]),
        (phase[0][2], kappa1),
        (phase[2][2], kappa3),
        (phase[1][0], 0.0),
    ];
    let diff = pairs.iter().fold(0.0f64, |m, (a, b)| m.max((a - b).abs()));
    if diff > 1e-8 * scale {
        return Err(PeriodsError::WaveRouteMismatch { difference: diff / scale });
    }
    Ok(WaveData {
        k,
        kappa1,
        kappa3,
        phase,
        delta,
        amplitude,
        z0,
        h: rc.h,
        lambda0: params.lambda0(),
        alpha: params.alpha(),
    })
}

/// χ1, χ2 and the lattice for the given period matrices.
pub fn lattice_for(params: &CurveParams, pm: &PeriodMatrices) -> Result<Lattice, PeriodsError> {
    let (chi1, chi2) = chi_coeffs(params);
    uvw_and_lattice(&pm.c, chi1, chi2)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::reference;
    use core::f64::consts::PI;

    fn reference_params(l0: f64) -> CurveParams {
        CurveParams::new(reference::A, reference::B, reference::PHI, l0, 0.1).unwrap()
    }

    fn constants(l0: f64) -> (CurveParams, ReductionConstants, PeriodMatrices) {
        let p = reference_params(l0);
        let ep = elliptic_periods(&p, 1e-12).unwrap();
        let rc = reduction_constants(&ep, NomeConvention::Pi).unwrap();
        let pm = period_matrices(&rc, &p);
        (p, rc, pm)
    }

    #[test]
    fn covering_relations_exact() {
        for d in covering_defects() {
            assert_eq!(d, [[0; 3]; 3]);
        }
    }

    #[test]
    fn combined_cycle_maps_compose() {
        assert_eq!(compose_second_cover(&S), MAP_A_A);
        assert_eq!(compose_second_cover(&P), MAP_A_B);
        assert_eq!(compose_second_cover(&Q), MAP_B_A);
        assert_eq!(compose_second_cover(&R), MAP_B_B);
    }

    #[test]
    fn k_matrix() {
        assert_eq!(K, [[0, 1, 1], [1, 0, 1], [1, 1, 0]]);
    }

    #[test]
    fn reduction_constants_frozen() {
        let (_, rc, _) = constants(0.0);
        let c = [0.199_386_22, 0.254_633_17, 0.137_273_75];
        let b = [0.782_129_08, 0.390_865_64, 0.255_420_67];
        for j in 0..3 {
            assert!((rc.c[j].im - c[j]).abs() < 1e-7, "c{j} = {}", rc.c[j]);
            assert!((rc.b[j] - b[j]).abs() < 1e-7, "b{j} = {}", rc.b[j]);
            assert!(rc.h[j] > 0.0 && rc.h[j] < 1.0);
        }
    }

    #[test]
    fn degenerate_periods_detected() {
        let ep = EllipticPeriods {
            alpha: [Complex64::new(2.0, 0.0), Complex64::new(0.0, -1.0), Complex64::new(1.0, 0.0)],
            beta: [Complex64::new(1.0, 0.0), Complex64::new(1.0, 0.0), Complex64::new(0.25, 0.5)],
        };
        assert_eq!(
            reduction_constants(&ep, NomeConvention::Pi),
            Err(PeriodsError::DegeneratePeriods { index: 0 })
        );
    }

    #[test]
    fn matrix_structure_reference_set() {
        for l0 in [0.0, 0.7, -2.0] {
            let (_, _, pm) = constants(l0);
            let s = pm.structure();
            assert!(s.symmetry_defect <= 1e-12);
            assert!(s.real_part_defect <= 1e-8);
            assert!(s.imag_minors.iter().all(|m| *m > 0.0));
            assert!(s.conjugation_defect <= 1e-10);
        }
    }

    #[test]
    fn alpha2_scales_as_inverse_square() {
        let p1 = CurveParams::new(0.6, 1.1, 0.35 * PI, 0.0, 0.0).unwrap();
        let p2 = CurveParams::new(1.2, 2.2, 0.35 * PI, 0.0, 0.0).unwrap();
        let e1 = elliptic_periods(&p1, 1e-12).unwrap();
        let e2 = elliptic_periods(&p2, 1e-12).unwrap();
        let ratio = e2.alpha[1] / e1.alpha[1];
        assert!((ratio - 0.25).norm() < 1e-8, "{ratio}");
    }

    #[test]
    fn wave_numbers_and_uvw_route_agree() {
        for l0 in [0.0, 0.638_542_54, 4.0] {
            let (p, rc, pm) = constants(l0);
            let lat = lattice_for(&p, &pm).unwrap();
            let w = wave_data(&p, &rc, &lat, [Complex64::new(0.0, 0.0); 3], 1.0, [0.0; 3]).unwrap();
            let expect_k = [0.797_544_88, 2.037_065_33, 0.549_095_00];
            for j in 0..3 {
                assert!((w.k[j] - expect_k[j]).abs() < 1e-7);
            }
            // couplings carried only by the period-vector route
            assert!((w.phase[0][1] - 4.0 * l0 * w.k[0]).abs() < 1e-9);
            assert!((w.phase[1][2] - 6.0 * l0 * w.k[1]).abs() < 1e-9);
            assert!((w.phase[2][1] - 4.0 * l0 * w.k[2]).abs() < 1e-9);
            if l0 == 0.0 {
                assert!((w.kappa1 + 5.439_540_08).abs() < 1e-7);
                assert!((w.kappa3 - 0.647_736_60).abs() < 1e-7);
            }
        }
    }

    #[test]
    fn edges_invert_uvw_and_match_closed_form() {
        for l0 in [0.0, 1.5] {
            let (p, _, pm) = constants(l0);
            let (chi1, chi2) = chi_coeffs(&p);
            let lat = uvw_and_lattice(&pm.c, chi1, chi2).unwrap();
            let id = rmat_mul(&lat.uvw, &lat.edges);
            for i in 0..3 {
                for j in 0..3 {
                    let e = if i == j { 1.0 } else { 0.0 };
                    assert!((id[i][j] - e).abs() < 1e-10);
                }
            }
            assert!(check_edge_routes(&lat, &pm.c, chi1, chi2).unwrap() < 1e-8);
            assert!(rmat_det(&lat.uvw).abs() > 1e-3);
        }
        let (_, _, pm) = constants(0.0);
        let lat = lattice_for(&reference_params(0.0), &pm).unwrap();
        let e1 = lat.edge(0);
        assert!((e1[0] - 1.7375).abs() < 1e-4 && (e1[1] + 0.4909).abs() < 1e-4 && (e1[2] - 0.0709).abs() < 1e-4);
    }

    #[test]
    fn uvw_factor_at_zero_shift() {
        let t = uvw_factor(0.0, 1.3);
        assert_eq!(t[0][1], 0.0);
        assert_eq!(t[1][2], 0.0);
        assert_eq!(t[0][2], 5.2);
    }

    #[test]
    fn kappa_cancellations() {
        let (a, b) = (reference::A, reference::B);
        let ab = a * b;
        let s = a * a + b * b;
        let phi3 = 0.5 * (-ab / s).acos();
        let p = CurveParams::new(a, b, phi3, 0.0, 0.0).unwrap();
        let (k1, k3) = frequencies(&p, &[1.0, 1.0, 1.0]);
        assert!(k3.abs() <= 1e-12 * k1.abs());
        let phi1 = 0.5 * (ab / s).acos();
        assert!(CurveParams::new(a, b, phi1, 0.0, 0.0).is_err());
        let p = CurveParams::validate(a, b, phi1, 0.0, 0.0, crate::curve::Validation::Relaxed).unwrap();
        let (k1, k3) = frequencies(&p, &[1.0, 1.0, 1.0]);
        assert!(k1.abs() <= 1e-12 * k3.abs());
    }

    #[test]
    fn amplitude_must_be_positive() {
        let (p, rc, pm) = constants(0.0);
        let lat = lattice_for(&p, &pm).unwrap();
        let z = [Complex64::new(0.0, 0.0); 3];
        assert_eq!(wave_data(&p, &rc, &lat, z, -1.0, [0.0; 3]), Err(PeriodsError::NonPositiveAmplitude(-1.0)));
    }
}
