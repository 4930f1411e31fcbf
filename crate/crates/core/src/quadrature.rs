//! Contour integrals of holomorphic differentials on Γ3 and its elliptic
//! quotients.
//!
//! Square roots are continued along straight segments by
//! `w(z) = w(z0) · ∏ sqrt((z − r)/(z0 − r))`. Each factor's argument moves
//! on a straight line starting at 1, which can only meet the principal cut
//! by passing through 0, i.e. through a branch point. Clearance checks
//! therefore make the continuation exact.

use alloc::vec::Vec;
use core::fmt;

use num_complex::Complex64;
use num_traits::Zero;
#[allow(unused_imports)]
use num_traits::Float;

use crate::curve::{branch_points, CurveParams};
use crate::linalg::{cmat_im, cmat_vec, rmat_inv, CMat3};

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum QuadratureError {
    InvalidTolerance(f64),
    BranchPointProximity { segment: usize, distance: f64, clearance: f64 },
    ToleranceNotMet { achieved: f64, requested: f64 },
    InvalidSheetSeed { relative_residual: f64 },
    EmptyPath,
    CurveMismatch,
    TailNotConverged { deviation: f64 },
    UnexpectedLattice { curve: CurveTag },
}

impl fmt::Display for QuadratureError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            QuadratureError::InvalidTolerance(t) => write!(f, "tolerance must be positive and finite (got {t})"),
            QuadratureError::BranchPointProximity { segment, distance, clearance } => write!(
                f,
                "BranchPointProximity: segment {segment} passes within {distance:e} of a branch point (clearance {clearance:e})"
            ),
            QuadratureError::ToleranceNotMet { achieved, requested } => write!(
                f,
                "ToleranceNotMet: adaptive quadrature reached error {achieved:e}, requested {requested:e}"
            ),
            QuadratureError::InvalidSheetSeed { relative_residual } => write!(
                f,
                "InvalidSheetSeed: seed squared misses the curve equation by {relative_residual:e} (relative)"
            ),
            QuadratureError::EmptyPath => write!(f, "path needs at least two waypoints"),
            QuadratureError::CurveMismatch => write!(f, "differential does not live on the path's curve"),
            QuadratureError::TailNotConverged { deviation } => write!(
                f,
                "TailNotConverged: continuation to infinity ends {deviation:e} away from a point at infinity"
            ),
            QuadratureError::UnexpectedLattice { curve } => {
                write!(f, "period lattice of {curve:?} has an unexpected shape")
            }
        }
    }
}

impl core::error::Error for QuadratureError {}

/// The curves on which integrals are taken.
///
/// * `Gamma3`: χ² = ∏(λ − λj) over the eight branch points.
/// * `Gamma1`: χ₊² = (t − t1)(t − t2)(t − t̄1)(t − t̄2).
/// * `Gamma2`: χ₋² = t · (same quartic).
/// * `GammaPlus`, `GammaMinus`: ν±² = (s ± 2ab)(s − s1)(s − s̄1).
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum CurveTag {
    Gamma3,
    Gamma1,
    Gamma2,
    GammaPlus,
    GammaMinus,
}

/// Finite branch points of a curve; the square root is of the monic product.
pub fn curve_roots(curve: CurveTag, params: &CurveParams) -> Vec<Complex64> {
    let bd = branch_points(params);
    match curve {
        CurveTag::Gamma3 => bd.lambda_points.to_vec(),
        CurveTag::Gamma1 => bd.t_points.to_vec(),
        CurveTag::Gamma2 => {
            let mut v = bd.t_points.to_vec();
            v.push(Complex64::zero());
            v
        }
        CurveTag::GammaPlus => bd.s_plus.to_vec(),
        CurveTag::GammaMinus => bd.s_minus.to_vec(),
    }
}

fn monic_product(roots: &[Complex64], z: Complex64) -> Complex64 {
    roots.iter().fold(Complex64::new(1.0, 0.0), |acc, r| acc * (z - r))
}

/// Principal-branch product of square roots, used as the default sheet seed.
pub fn principal_sheet(roots: &[Complex64], z: Complex64) -> Complex64 {
    roots.iter().fold(Complex64::new(1.0, 0.0), |acc, r| acc * (z - r).sqrt())
}

/// Holomorphic differentials used by the construction.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum DifferentialId {
    DtOverChiPlus,
    TdtOverChiMinus,
    DsOverNuPlus,
    DsOverNuMinus,
    /// λ^k dλ/χ on Γ3, k ∈ {0, 1, 2}.
    LamKOverChi(u8),
}

impl DifferentialId {
    pub fn curve(&self) -> CurveTag {
        match self {
            DifferentialId::DtOverChiPlus => CurveTag::Gamma1,
            DifferentialId::TdtOverChiMinus => CurveTag::Gamma2,
            DifferentialId::DsOverNuPlus => CurveTag::GammaPlus,
            DifferentialId::DsOverNuMinus => CurveTag::GammaMinus,
            DifferentialId::LamKOverChi(_) => CurveTag::Gamma3,
        }
    }

    fn numerator(&self, z: Complex64) -> Complex64 {
        match self {
            DifferentialId::TdtOverChiMinus => z,
            DifferentialId::LamKOverChi(k) => z.powu(u32::from(*k)),
            _ => Complex64::new(1.0, 0.0),
        }
    }
}

/// A piecewise-linear path on one of the curves.
#[derive(Debug, Clone, PartialEq)]
pub struct PathSpec {
    pub waypoints: Vec<Complex64>,
    /// Square-root value at the first waypoint; fixes the sheet.
    pub sheet_seed: Complex64,
    pub curve: CurveTag,
}

impl PathSpec {
    /// Path starting on the principal-product sheet.
    pub fn principal(curve: CurveTag, params: &CurveParams, waypoints: Vec<Complex64>) -> Self {
        let roots = curve_roots(curve, params);
        let seed = waypoints
            .first()
            .map(|z| principal_sheet(&roots, *z))
            .unwrap_or_else(Complex64::zero);
        PathSpec { waypoints, sheet_seed: seed, curve }
    }

    /// Mirror image under complex conjugation.
    pub fn conjugate(&self) -> Self {
        PathSpec {
            waypoints: self.waypoints.iter().map(|z| z.conj()).collect(),
            sheet_seed: self.sheet_seed.conj(),
            curve: self.curve,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct QuadOptions {
    /// Absolute error target for the whole path.
    pub tol: f64,
    /// Clearance as a fraction of the minimal pairwise branch-point distance.
    pub clearance_factor: f64,
    pub max_intervals: usize,
}

impl QuadOptions {
    pub fn with_tol(tol: f64) -> Self {
        QuadOptions { tol, ..Self::default() }
    }
}

impl Default for QuadOptions {
    fn default() -> Self {
        QuadOptions { tol: 1e-12, clearance_factor: 1e-3, max_intervals: 4000 }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PathIntegral {
    pub value: Complex64,
    pub error: f64,
    /// Square-root value at the last waypoint after continuation.
    pub end_sheet: Complex64,
}

/// Line integral along `path` with the branch continued from its seed.
pub fn integrate_segment(
    diff: DifferentialId,
    path: &PathSpec,
    params: &CurveParams,
    tol: f64,
) -> Result<Complex64, QuadratureError> {
    integrate_path(diff, path, params, &QuadOptions::with_tol(tol)).map(|r| r.value)
}

pub fn integrate_path(
    diff: DifferentialId,
    path: &PathSpec,
    params: &CurveParams,
    opts: &QuadOptions,
) -> Result<PathIntegral, QuadratureError> {
    check_tol(opts.tol)?;
    if diff.curve() != path.curve {
        return Err(QuadratureError::CurveMismatch);
    }
    if path.waypoints.len() < 2 {
        return Err(QuadratureError::EmptyPath);
    }
    let roots = curve_roots(path.curve, params);
    let z0 = path.waypoints[0];
    let target = monic_product(&roots, z0);
    let rel = (path.sheet_seed * path.sheet_seed - target).norm() / target.norm().max(f64::MIN_POSITIVE);
    if !(rel <= 1e-10) {
        return Err(QuadratureError::InvalidSheetSeed { relative_residual: rel });
    }
    let clearance = opts.clearance_factor * min_pairwise_distance(&roots);
    let nseg = path.waypoints.len() - 1;
    let seg_tol = opts.tol / nseg as f64;
    let mut sheet = path.sheet_seed;
    let mut total = Complex64::zero();
    let mut err = 0.0;
    for (i, w) in path.waypoints.windows(2).enumerate() {
        let (za, zb) = (w[0], w[1]);
        let dist = segment_distance(za, zb, &roots);
        if dist < clearance {
            return Err(QuadratureError::BranchPointProximity { segment: i, distance: dist, clearance });
        }
        let cont = Continuation::new(&roots, za, sheet);
        let d = zb - za;
        let (v, e) = adaptive_gk(
            |tau| {
                let z = za + d * tau;
                diff.numerator(z) / cont.at(z) * d
            },
            seg_tol,
            opts.max_intervals,
        )?;
        total += v;
        err += e;
        sheet = cont.at(zb);
    }
    Ok(PathIntegral { value: total, error: err, end_sheet: sheet })
}

fn check_tol(tol: f64) -> Result<(), QuadratureError> {
    if tol > 0.0 && tol.is_finite() {
        Ok(())
    } else {
        Err(QuadratureError::InvalidTolerance(tol))
    }
}

pub fn min_pairwise_distance(points: &[Complex64]) -> f64 {
    let mut m = f64::INFINITY;
    for i in 0..points.len() {
        for j in i + 1..points.len() {
            m = m.min((points[i] - points[j]).norm());
        }
    }
    m
}

/// Distance from the segment [za, zb] to the nearest point of `roots`.
pub fn segment_distance(za: Complex64, zb: Complex64, roots: &[Complex64]) -> f64 {
    roots
        .iter()
        .map(|r| point_segment_distance(*r, za, zb))
        .fold(f64::INFINITY, f64::min)
}

fn point_segment_distance(p: Complex64, za: Complex64, zb: Complex64) -> f64 {
    let d = zb - za;
    let len2 = d.norm_sqr();
    if len2 == 0.0 {
        return (p - za).norm();
    }
    let tau = ((p - za) * d.conj()).re / len2;
    let tau = tau.clamp(0.0, 1.0);
    (p - (za + d * tau)).norm()
}

/// Square root continued along straight segments from an anchor.
#[derive(Debug, Clone)]
pub struct Continuation<'a> {
    roots: &'a [Complex64],
    anchor: Complex64,
    value: Complex64,
}

impl<'a> Continuation<'a> {
    pub fn new(roots: &'a [Complex64], anchor: Complex64, value: Complex64) -> Self {
        Continuation { roots, anchor, value }
    }

    /// Value at `z`, valid for `z` on a straight segment from the anchor.
    pub fn at(&self, z: Complex64) -> Complex64 {
        self.roots
            .iter()
            .fold(self.value, |acc, r| acc * ((z - r) / (self.anchor - r)).sqrt())
    }
}

const XGK: [f64; 8] = [
    0.991_455_371_120_812_6,
    0.949_107_912_342_758_5,
    0.864_864_423_359_769_1,
    0.741_531_185_599_394_4,
    0.586_087_235_467_691_1,
    0.405_845_151_377_397_2,
    0.207_784_955_007_898_5,
    0.0,
];
const WGK: [f64; 8] = [
    0.022_935_322_010_529_22,
    0.063_092_092_629_978_55,
    0.104_790_010_322_250_2,
    0.140_653_259_715_525_9,
    0.169_004_726_639_267_9,
    0.190_350_578_064_785_4,
    0.204_432_940_075_298_9,
    0.209_482_141_084_727_8,
];
const WG: [f64; 4] = [
    0.129_484_966_168_869_7,
    0.279_705_391_489_276_7,
    0.381_830_050_505_118_9,
    0.417_959_183_673_469_4,
];

/// One G7K15 panel on [a, b]: (Kronrod value, |K − G|, Σ w|f|).
fn gk15<F: Fn(f64) -> Complex64>(f: &F, a: f64, b: f64) -> (Complex64, f64, f64) {
    let c = 0.5 * (a + b);
    let h = 0.5 * (b - a);
    let fc = f(c);
    let mut k = fc * WGK[7];
    let mut g = fc * WG[3];
    let mut abs = fc.norm() * WGK[7];
    for j in 0..7 {
        let x = h * XGK[j];
        let f1 = f(c - x);
        let f2 = f(c + x);
        k += (f1 + f2) * WGK[j];
        abs += (f1.norm() + f2.norm()) * WGK[j];
        if j % 2 == 1 {
            g += (f1 + f2) * WG[j / 2];
        }
    }
    (k * h, ((k - g) * h).norm(), abs * h.abs())
}

/// Globally adaptive G7K15 on τ ∈ [0, 1].
pub fn adaptive_gk<F: Fn(f64) -> Complex64>(
    f: F,
    tol: f64,
    max_intervals: usize,
) -> Result<(Complex64, f64), QuadratureError> {
    adaptive_gk_on(f, 0.0, 1.0, tol, max_intervals)
}

pub fn adaptive_gk_on<F: Fn(f64) -> Complex64>(
    f: F,
    a: f64,
    b: f64,
    tol: f64,
    max_intervals: usize,
) -> Result<(Complex64, f64), QuadratureError> {
    let (v, e, s) = gk15(&f, a, b);
    let mut panels: Vec<(f64, f64, Complex64, f64, f64)> = alloc::vec![(a, b, v, e, s)];
    loop {
        let err: f64 = panels.iter().map(|p| p.3).sum();
        let abs: f64 = panels.iter().map(|p| p.4).sum();
        let floor = 50.0 * f64::EPSILON * abs;
        if err <= tol.max(floor) {
            let val = panels.iter().fold(Complex64::zero(), |acc, p| acc + p.2);
            return Ok((val, err));
        }
        if panels.len() >= max_intervals || !err.is_finite() {
            return Err(QuadratureError::ToleranceNotMet { achieved: err, requested: tol });
        }
        let (idx, _) = panels
            .iter()
            .enumerate()
            .fold((0, -1.0), |best, (i, p)| if p.3 > best.1 { (i, p.3) } else { best });
        let (pa, pb, ..) = panels.swap_remove(idx);
        let mid = 0.5 * (pa + pb);
        let (v1, e1, s1) = gk15(&f, pa, mid);
        let (v2, e2, s2) = gk15(&f, mid, pb);
        panels.push((pa, mid, v1, e1, s1));
        panels.push((mid, pb, v2, e2, s2));
    }
}

/// Closed rectangular contour around the segment [e1, e2], counter-clockwise.
///
/// The margin is `margin_frac` times the smaller of |e2 − e1| and the distance
/// from the segment to every other root.
pub fn loop_around(e1: Complex64, e2: Complex64, roots: &[Complex64], margin_frac: f64) -> Vec<Complex64> {
    let others: Vec<Complex64> = roots
        .iter()
        .copied()
        .filter(|r| (r - e1).norm() > 1e-14 && (r - e2).norm() > 1e-14)
        .collect();
    let len = (e2 - e1).norm();
    let r = margin_frac * len.min(segment_distance(e1, e2, &others));
    let d = (e2 - e1) / len;
    let n = d * Complex64::i();
    let p0 = e1 - d * r - n * r;
    alloc::vec![p0, e2 + d * r - n * r, e2 + d * r + n * r, e1 - d * r + n * r, p0]
}

/// Cycles on the elliptic quotient curves.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum CycleTag {
    A1,
    B1,
    APlus,
    BPlus,
    AMinus,
    BMinus,
}

impl CycleTag {
    pub fn curve(&self) -> CurveTag {
        match self {
            CycleTag::A1 | CycleTag::B1 => CurveTag::Gamma1,
            CycleTag::APlus | CycleTag::BPlus => CurveTag::GammaPlus,
            CycleTag::AMinus | CycleTag::BMinus => CurveTag::GammaMinus,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum LatticeShape {
    Rectangular,
    Rhombic,
}

/// Period lattice of one elliptic quotient, found from two base loops.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct EllipticLattice {
    pub curve: CurveTag,
    pub shape: LatticeShape,
    /// Loop around the conjugate pair of roots.
    pub vertical_loop: Complex64,
    /// Loop around the remaining cut.
    pub slanted_loop: Complex64,
    /// Primitive real period, positive.
    pub real_period: f64,
    /// Modulus of the primitive imaginary period.
    pub imag_period: f64,
    /// Integer coefficients (on vertical, slanted) of the two primitive periods.
    pub real_combo: (i32, i32),
    pub imag_combo: (i32, i32),
}

impl EllipticLattice {
    /// ½∮ over the cycle.
    ///
    /// Γ1 is rectangular: a¹ ↦ −i|I|/2, b¹ ↦ R/2. Γ± are rhombic:
    /// a± ↦ R/2, b± ↦ (R + i|I|)/4. These orientations give positive 𝔟j and
    /// positive wave numbers.
    pub fn half_cycle(&self, cycle: CycleTag) -> Complex64 {
        let r = self.real_period;
        let y = self.imag_period;
        match cycle {
            CycleTag::A1 => Complex64::new(0.0, -0.5 * y),
            CycleTag::B1 => Complex64::new(0.5 * r, 0.0),
            CycleTag::APlus | CycleTag::AMinus => Complex64::new(0.5 * r, 0.0),
            CycleTag::BPlus | CycleTag::BMinus => Complex64::new(0.25 * r, 0.25 * y),
        }
    }
}

fn curve_differential(curve: CurveTag) -> DifferentialId {
    match curve {
        CurveTag::Gamma1 => DifferentialId::DtOverChiPlus,
        CurveTag::Gamma2 => DifferentialId::TdtOverChiMinus,
        CurveTag::GammaPlus => DifferentialId::DsOverNuPlus,
        CurveTag::GammaMinus => DifferentialId::DsOverNuMinus,
        CurveTag::Gamma3 => DifferentialId::LamKOverChi(0),
    }
}

/// The two base loops of an elliptic quotient as waypoint lists.
pub fn base_loops(curve: CurveTag, params: &CurveParams, margin_frac: f64) -> Option<(Vec<Complex64>, Vec<Complex64>)> {
    let roots = curve_roots(curve, params);
    let (upper, lower, other) = match curve {
        CurveTag::Gamma1 => (roots[1], roots[3], roots[0]),
        CurveTag::GammaPlus | CurveTag::GammaMinus => (roots[1], roots[2], roots[0]),
        _ => return None,
    };
    let vertical = loop_around(lower, upper, &roots, margin_frac);
    let slanted = match curve {
        CurveTag::Gamma1 => loop_around(upper, other, &roots, margin_frac),
        _ => loop_around(other, upper, &roots, margin_frac),
    };
    Some((vertical, slanted))
}

/// Computes the period lattice of Γ1 or Γ± from two base loops.
pub fn elliptic_lattice(curve: CurveTag, params: &CurveParams, opts: &QuadOptions) -> Result<EllipticLattice, QuadratureError> {
    elliptic_lattice_with_margin(curve, params, opts, 0.4)
}

pub fn elliptic_lattice_with_margin(
    curve: CurveTag,
    params: &CurveParams,
    opts: &QuadOptions,
    margin_frac: f64,
) -> Result<EllipticLattice, QuadratureError> {
    let (vl, sl) = base_loops(curve, params, margin_frac).ok_or(QuadratureError::UnexpectedLattice { curve })?;
    let diff = curve_differential(curve);
    let sub = QuadOptions { tol: 0.25 * opts.tol, ..*opts };
    let p = integrate_path(diff, &PathSpec::principal(curve, params, vl), params, &sub)?.value;
    let q = integrate_path(diff, &PathSpec::principal(curve, params, sl), params, &sub)?.value;
    let scale = p.norm().max(q.norm());
    let mut best_real: Option<(f64, (i32, i32))> = None;
    let mut best_imag: Option<(f64, (i32, i32))> = None;
    for m in -2i32..=2 {
        for n in -2i32..=2 {
            if m == 0 && n == 0 {
                continue;
            }
            let v = p * f64::from(m) + q * f64::from(n);
            if v.im.abs() <= 1e-9 * scale && v.re.abs() > 1e-6 * scale {
                let cand = v.re.abs();
                if best_real.map_or(true, |(b, _)| cand < b * (1.0 - 1e-12)) {
                    best_real = Some((cand, (m, n)));
                }
            }
            if v.re.abs() <= 1e-9 * scale && v.im.abs() > 1e-6 * scale {
                let cand = v.im.abs();
                if best_imag.map_or(true, |(b, _)| cand < b * (1.0 - 1e-12)) {
                    best_imag = Some((cand, (m, n)));
                }
            }
        }
    }
    let (real_period, real_combo) = best_real.ok_or(QuadratureError::UnexpectedLattice { curve })?;
    let (imag_period, imag_combo) = best_imag.ok_or(QuadratureError::UnexpectedLattice { curve })?;
    let covolume = (p.conj() * q).im.abs();
    let ratio = real_period * imag_period / covolume;
    let shape = if (ratio - 1.0).abs() < 1e-8 {
        LatticeShape::Rectangular
    } else if (ratio - 2.0).abs() < 1e-8 {
        LatticeShape::Rhombic
    } else {
        return Err(QuadratureError::UnexpectedLattice { curve });
    };
    let expected = match curve {
        CurveTag::Gamma1 => LatticeShape::Rectangular,
        _ => LatticeShape::Rhombic,
    };
    if shape != expected {
        return Err(QuadratureError::UnexpectedLattice { curve });
    }
    Ok(EllipticLattice {
        curve,
        shape,
        vertical_loop: p,
        slanted_loop: q,
        real_period,
        imag_period,
        real_combo,
        imag_combo,
    })
}

/// ½ of the closed-cycle integral of the curve's holomorphic differential.
pub fn cycle_integral(cycle: CycleTag, params: &CurveParams, tol: f64) -> Result<Complex64, QuadratureError> {
    check_tol(tol)?;
    let lat = elliptic_lattice(cycle.curve(), params, &QuadOptions::with_tol(tol))?;
    Ok(lat.half_cycle(cycle))
}

/// Which path is taken from the branch point E to infinity.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum AbelRoute {
    /// Leave E to the right, run horizontally, then radially outward.
    #[default]
    Horizontal,
    /// Leave E upwards, head for the imaginary direction, then radially.
    Vertical,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct AbelOptions {
    pub quad: QuadOptions,
    /// Radius |λ − λ0| where integration switches to ξ = 1/(λ − λ0).
    /// `None` selects 4b.
    pub switch_radius: Option<f64>,
    pub route: AbelRoute,
}

impl Default for AbelOptions {
    fn default() -> Self {
        AbelOptions { quad: QuadOptions::default(), switch_radius: None, route: AbelRoute::Horizontal }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct AbelResult {
    /// Δ before lattice reduction.
    pub raw: [Complex64; 3],
    /// Δ reduced modulo ℤ³ + Bℤ³.
    pub reduced: [Complex64; 3],
    /// The integer vector m with reduced ≡ raw + B·m (mod ℤ³).
    pub b_shift: [i64; 3],
    /// ∫ λ^k dλ/χ from E to P∞+, for k = 2, 1, 0.
    pub moments: [Complex64; 3],
    pub error: f64,
}

/// Δ = 2·∫ from E = λ0 + a e^{iφ} to P∞+ of the normalized differentials
/// (rows of `c` against (λ², λ, 1) dλ/χ), reduced modulo ℤ³ + `b`ℤ³.
pub fn abelian_to_infinity(
    params: &CurveParams,
    c: &CMat3,
    b: &CMat3,
    opts: &AbelOptions,
) -> Result<AbelResult, QuadratureError> {
    let (moments, error) = moments_to_infinity(params, opts)?;
    let raw = cmat_vec(c, &moments).map(|v| v * 2.0);
    let (reduced, b_shift) = reduce_mod_lattice(&raw, b);
    Ok(AbelResult { raw, reduced, b_shift, moments, error })
}

/// ∫ λ^k dλ/χ (k = 2, 1, 0) from E to P∞+, with an error estimate.
pub fn moments_to_infinity(params: &CurveParams, opts: &AbelOptions) -> Result<([Complex64; 3], f64), QuadratureError> {
    check_tol(opts.quad.tol)?;
    let roots = curve_roots(CurveTag::Gamma3, params);
    let e = roots[0];
    let others = &roots[1..];
    let l0 = Complex64::new(params.lambda0(), 0.0);
    let radius = opts.switch_radius.unwrap_or(4.0 * params.b());
    let clearance = opts.quad.clearance_factor * min_pairwise_distance(&roots);
    let piece_tol = opts.quad.tol / 6.0;
    let maxi = opts.quad.max_intervals;

    let (dir, exit) = match opts.route {
        AbelRoute::Horizontal => (Complex64::new(1.0, 0.0), l0 + Complex64::new(radius, e.im)),
        AbelRoute::Vertical => (Complex64::i(), l0 + Complex64::new(0.0, radius)),
    };
    if (exit - l0).norm() <= params.b() * (1.0 + 1e-9) {
        return Err(QuadratureError::BranchPointProximity { segment: 2, distance: 0.0, clearance });
    }

    // Piece 1: λ = E + dir·w², which removes the endpoint singularity.
    let near = others.iter().map(|r| (r - e).norm()).fold(f64::INFINITY, f64::min);
    let len = 0.5 * near;
    let sd = dir.sqrt();
    let h_e = principal_sheet(others, e);
    let cont_e = Continuation::new(others, e, h_e);
    let w_end = len.sqrt();
    let mut out = [Complex64::zero(); 3];
    let mut err = 0.0;
    for (slot, k) in [2u32, 1, 0].iter().enumerate() {
        let (v, er) = adaptive_gk_on(
            |w| {
                let lam = e + dir * (w * w);
                sd * 2.0 * lam.powu(*k) / cont_e.at(lam)
            },
            0.0,
            w_end,
            piece_tol,
            maxi,
        )?;
        out[slot] += v;
        err += er;
    }
    let p1 = e + dir * len;
    let chi_p1 = sd * w_end * cont_e.at(p1);

    // Piece 2: straight segment to the exit point.
    let dist = segment_distance(p1, exit, &roots);
    if dist < clearance {
        return Err(QuadratureError::BranchPointProximity { segment: 1, distance: dist, clearance });
    }
    let cont = Continuation::new(&roots, p1, chi_p1);
    let d = exit - p1;
    for (slot, k) in [2u32, 1, 0].iter().enumerate() {
        let (v, er) = adaptive_gk(|tau| {
            let lam = p1 + d * tau;
            lam.powu(*k) / cont.at(lam) * d
        }, piece_tol, maxi)?;
        out[slot] += v;
        err += er;
    }
    let chi_exit = cont.at(exit);

    // Piece 3: ξ = 1/(λ − λ0) from ξs to 0; g = χ ξ⁴ → ±1.
    let xi_s = (exit - l0).inv();
    let inv_mu: Vec<Complex64> = roots.iter().map(|r| (r - l0).inv()).collect();
    let g_s = chi_exit * xi_s.powu(4);
    let cont_xi = Continuation::new(&inv_mu, xi_s, g_s);
    for (slot, k) in [2u32, 1, 0].iter().enumerate() {
        let (v, er) = adaptive_gk(|tau| {
            let xi = xi_s * (1.0 - tau);
            let g = cont_xi.at(xi);
            let num = (l0 * xi + 1.0).powu(*k) * xi.powu(2 - *k);
            -num / g * (-xi_s)
        }, piece_tol, maxi)?;
        out[slot] += v;
        err += er;
    }
    let g0 = cont_xi.at(Complex64::zero());
    let sign = if g0.re > 0.0 { 1.0 } else { -1.0 };
    let deviation = (g0 - sign).norm();
    if deviation > 1e-8 {
        return Err(QuadratureError::TailNotConverged { deviation });
    }
    // Landing on P∞− gives −∫ to P∞+ (E is fixed by the hyperelliptic involution).
    Ok((out.map(|v| v * sign), err))
}

/// Reduces `v` modulo ℤ³ + Bℤ³: the B-shift minimizes Im vᵀ (Im B)⁻¹ Im v
/// over m ∈ [−3, 3]³, then real parts are wrapped into [−½, ½).
pub fn reduce_mod_lattice(v: &[Complex64; 3], b: &CMat3) -> ([Complex64; 3], [i64; 3]) {
    let y = cmat_im(b);
    let yinv = rmat_inv(&y).unwrap_or([[0.0; 3]; 3]);
    let im = [v[0].im, v[1].im, v[2].im];
    let mut best = (f64::INFINITY, [0i64; 3]);
    for m0 in -3i64..=3 {
        for m1 in -3i64..=3 {
            for m2 in -3i64..=3 {
                let m = [m0 as f64, m1 as f64, m2 as f64];
                let mut w = [0.0; 3];
                for i in 0..3 {
                    w[i] = im[i] + y[i][0] * m[0] + y[i][1] * m[1] + y[i][2] * m[2];
                }
                let mut q = 0.0;
                for i in 0..3 {
                    for j in 0..3 {
                        q += w[i] * yinv[i][j] * w[j];
                    }
                }
                if q < best.0 - 1e-12 {
                    best = (q, [m0, m1, m2]);
                }
            }
        }
    }
    let m = best.1;
    let mut out = *v;
    for i in 0..3 {
        for j in 0..3 {
            out[i] += b[i][j] * m[j] as f64;
        }
        out[i].re = wrap_half(out[i].re);
    }
    (out, m)
}

/// x − ⌊x + ½⌋, in [−½, ½).
pub fn wrap_half(x: f64) -> f64 {
    x - (x + 0.5).floor()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::reference;
    use proptest::prelude::*;
    use std::vec;

    fn reference_params() -> CurveParams {
        CurveParams::new(reference::A, reference::B, reference::PHI, 0.0, 0.1).unwrap()
    }

    fn c(re: f64, im: f64) -> Complex64 {
        Complex64::new(re, im)
    }

    /// Gauss–Legendre nodes by Newton iteration on P_n.
    fn gauss_legendre(n: usize) -> (vec::Vec<f64>, vec::Vec<f64>) {
        let mut x = vec![0.0; n];
        let mut w = vec![0.0; n];
        for i in 0..n {
            let mut z = (core::f64::consts::PI * (i as f64 + 0.75) / (n as f64 + 0.5)).cos();
            for _ in 0..100 {
                let (mut p0, mut p1) = (1.0, z);
                for k in 2..=n {
                    let p2 = ((2 * k - 1) as f64 * z * p1 - (k - 1) as f64 * p0) / k as f64;
                    p0 = p1;
                    p1 = p2;
                }
                let dp = n as f64 * (z * p1 - p0) / (z * z - 1.0);
                let dz = p1 / dp;
                z -= dz;
                if dz.abs() < 1e-16 {
                    let dp = {
                        let (mut q0, mut q1) = (1.0, z);
                        for k in 2..=n {
                            let q2 = ((2 * k - 1) as f64 * z * q1 - (k - 1) as f64 * q0) / k as f64;
                            q0 = q1;
                            q1 = q2;
                        }
                        n as f64 * (z * q1 - q0) / (z * z - 1.0)
                    };
                    x[i] = z;
                    w[i] = 2.0 / ((1.0 - z * z) * dp * dp);
                    break;
                }
            }
        }
        (x, w)
    }

    /// Composite Gauss–Legendre along the same path, branch tracked by the
    /// nearest-sign rule instead of the product formula.
    fn oracle_loop(diff: DifferentialId, path: &PathSpec, params: &CurveParams, panels: usize) -> Complex64 {
        let roots = curve_roots(path.curve, params);
        let (xs, ws) = gauss_legendre(12);
        let mut prev = path.sheet_seed;
        let mut total = Complex64::zero();
        for seg in path.waypoints.windows(2) {
            let (za, zb) = (seg[0], seg[1]);
            let d = zb - za;
            for p in 0..panels {
                let a = p as f64 / panels as f64;
                let b = (p + 1) as f64 / panels as f64;
                // Nodes are visited in increasing τ so the sign rule sees a fine walk.
                let mut idx: vec::Vec<usize> = (0..xs.len()).collect();
                idx.sort_by(|i, j| xs[*i].partial_cmp(&xs[*j]).unwrap());
                for i in idx {
                    let tau = 0.5 * (a + b) + 0.5 * (b - a) * xs[i];
                    let z = za + d * tau;
                    let mut w = monic_product(&roots, z).sqrt();
                    if (w - prev).norm() > (w + prev).norm() {
                        w = -w;
                    }
                    prev = w;
                    total += diff.numerator(z) / w * d * (0.5 * (b - a) * ws[i]);
                }
                let z = za + d * b;
                let mut w = monic_product(&roots, z).sqrt();
                if (w - prev).norm() > (w + prev).norm() {
                    w = -w;
                }
                prev = w;
            }
        }
        total
    }

    #[test]
    fn small_loop_without_branch_point_vanishes() {
        let p = reference_params();
        let z0 = c(3.0, 3.0);
        let wp = vec![z0, c(3.2, 3.0), c(3.2, 3.2), c(3.0, 3.2), z0];
        for diff in [DifferentialId::LamKOverChi(0), DifferentialId::LamKOverChi(2)] {
            let v = integrate_segment(diff, &PathSpec::principal(CurveTag::Gamma3, &p, wp.clone()), &p, 1e-13).unwrap();
            assert!(v.norm() < 1e-13, "{v}");
        }
    }

    #[test]
    fn loop_integral_matches_gauss_legendre_oracle() {
        let p = reference_params();
        let roots = curve_roots(CurveTag::Gamma1, &p);
        let wp = loop_around(roots[1], roots[0], &roots, 0.4);
        let path = PathSpec::principal(CurveTag::Gamma1, &p, wp);
        let v = integrate_segment(DifferentialId::DtOverChiPlus, &path, &p, 1e-13).unwrap();
        let o = oracle_loop(DifferentialId::DtOverChiPlus, &path, &p, 64);
        assert!((v - o).norm() <= 1e-10 * v.norm(), "{v} vs {o}");
        // frozen: loop around (t2, t1) on Γ1 for the figure parameters
        assert!((v.norm() - 3.070_029_3).abs() < 1e-6, "{v}");
    }

    #[test]
    fn homotopic_loops_agree() {
        let p = reference_params();
        for curve in [CurveTag::Gamma1, CurveTag::GammaPlus, CurveTag::GammaMinus] {
            let tol = 1e-12;
            let (v1, s1) = base_loops(curve, &p, 0.4).unwrap();
            let (v2, s2) = base_loops(curve, &p, 0.15).unwrap();
            let diff = curve_differential(curve);
            for (a, b) in [(v1, v2), (s1, s2)] {
                let ia = integrate_segment(diff, &PathSpec::principal(curve, &p, a), &p, tol).unwrap();
                let ib = integrate_segment(diff, &PathSpec::principal(curve, &p, b), &p, tol).unwrap();
                // The principal seed may sit on opposite sheets for the two contours.
                let d = (ia - ib).norm().min((ia + ib).norm());
                assert!(d <= 2.0 * tol, "{curve:?}: {ia} vs {ib}");
            }
        }
    }

    #[test]
    fn reflected_contour_gives_conjugate() {
        let p = reference_params();
        let roots = curve_roots(CurveTag::GammaPlus, &p);
        let wp = loop_around(roots[0], roots[1], &roots, 0.4);
        let path = PathSpec::principal(CurveTag::GammaPlus, &p, wp);
        let v = integrate_segment(DifferentialId::DsOverNuPlus, &path, &p, 1e-13).unwrap();
        let w = integrate_segment(DifferentialId::DsOverNuPlus, &path.conjugate(), &p, 1e-13).unwrap();
        assert!((v.conj() - w).norm() < 1e-12);
    }

    #[test]
    fn cycle_values_frozen() {
        let p = reference_params();
        let tol = 1e-12;
        let a1 = cycle_integral(CycleTag::APlus, &p, tol).unwrap();
        let b1 = cycle_integral(CycleTag::BPlus, &p, tol).unwrap();
        let a2 = cycle_integral(CycleTag::A1, &p, tol).unwrap();
        let b2 = cycle_integral(CycleTag::B1, &p, tol).unwrap();
        let a3 = cycle_integral(CycleTag::AMinus, &p, tol).unwrap();
        let b3 = cycle_integral(CycleTag::BMinus, &p, tol).unwrap();
        let close = |x: Complex64, y: Complex64| (x - y).norm() < 1e-7;
        assert!(close(a1, c(3.922_683_72, 0.0)), "{a1}");
        assert!(close(a2, c(0.0, -1.963_609_09)), "{a2}");
        assert!(close(a3, c(1.860_666_50, 0.0)), "{a3}");
        assert!(close(b1, c(1.961_341_86, 1.253_847_93)), "{b1}");
        assert!(close(b2, c(1.535_014_63, 0.0)), "{b2}");
        assert!(close(b3, c(0.930_333_25, 1.821_178_48)), "{b3}");
    }

    #[test]
    fn halving_tolerance_is_consistent() {
        let p = reference_params();
        for cyc in [CycleTag::A1, CycleTag::B1, CycleTag::APlus, CycleTag::BPlus, CycleTag::AMinus, CycleTag::BMinus] {
            let tol = 1e-9;
            let v1 = cycle_integral(cyc, &p, tol).unwrap();
            let v2 = cycle_integral(cyc, &p, tol / 2.0).unwrap();
            assert!((v1 - v2).norm() < tol, "{cyc:?}");
        }
    }

    #[test]
    fn proximity_and_seed_errors() {
        let p = reference_params();
        let roots = curve_roots(CurveTag::Gamma1, &p);
        let wp = vec![roots[0] - c(0.5, 0.0), roots[0] + c(0.5, 0.0)];
        let path = PathSpec::principal(CurveTag::Gamma1, &p, wp.clone());
        let err = integrate_segment(DifferentialId::DtOverChiPlus, &path, &p, 1e-10).unwrap_err();
        assert!(matches!(err, QuadratureError::BranchPointProximity { .. }));
        let bad = PathSpec { waypoints: wp, sheet_seed: c(1.0, 0.0), curve: CurveTag::Gamma1 };
        let err = integrate_segment(DifferentialId::DtOverChiPlus, &bad, &p, 1e-10).unwrap_err();
        assert!(matches!(err, QuadratureError::InvalidSheetSeed { .. }));
        let err = integrate_segment(DifferentialId::DsOverNuPlus, &PathSpec::principal(CurveTag::Gamma1, &p, vec![c(0.0, 5.0), c(1.0, 5.0)]), &p, 1e-10).unwrap_err();
        assert_eq!(err, QuadratureError::CurveMismatch);
    }

    #[test]
    fn exhausted_refinement_is_reported() {
        let p = reference_params();
        let roots = curve_roots(CurveTag::Gamma1, &p);
        let wp = loop_around(roots[1], roots[0], &roots, 0.4);
        let path = PathSpec::principal(CurveTag::Gamma1, &p, wp);
        let opts = QuadOptions { tol: 1e-30, max_intervals: 3, ..QuadOptions::default() };
        let err = integrate_path(DifferentialId::DtOverChiPlus, &path, &p, &opts).unwrap_err();
        assert!(matches!(err, QuadratureError::ToleranceNotMet { .. }));
    }

    #[test]
    fn continuation_has_no_sheet_flip() {
        let p = reference_params();
        let roots = curve_roots(CurveTag::Gamma3, &p);
        let wp = loop_around(roots[0], roots[4], &roots, 0.4);
        let mut sheet = principal_sheet(&roots, wp[0]);
        for seg in wp.windows(2) {
            let cont = Continuation::new(&roots, seg[0], sheet);
            let mut prev = sheet;
            for i in 1..=2000 {
                let z = seg[0] + (seg[1] - seg[0]) * (i as f64 / 2000.0);
                let w = cont.at(z);
                assert!((w - prev).norm() < prev.norm());
                prev = w;
            }
            sheet = prev;
        }
    }

    #[test]
    fn wrap_half_range() {
        for x in [-2.5, -0.5, -0.25, 0.0, 0.49, 0.5, 1.75, 3.0] {
            let w = wrap_half(x);
            assert!((-0.5..0.5).contains(&w), "{x} -> {w}");
            assert!(((x - w) - (x - w).round()).abs() < 1e-15);
        }
    }

    proptest! {
        #![proptest_config(ProptestConfig::with_cases(24))]

        #[test]
        fn deformation_invariance_on_gamma3(margin in 0.1f64..0.45, k in 0u8..3) {
            let p = reference_params();
            let roots = curve_roots(CurveTag::Gamma3, &p);
            let diff = DifferentialId::LamKOverChi(k);
            let a = loop_around(roots[0], roots[4], &roots, margin);
            let b = loop_around(roots[0], roots[4], &roots, 0.3);
            let ia = integrate_segment(diff, &PathSpec::principal(CurveTag::Gamma3, &p, a), &p, 1e-12).unwrap();
            let ib = integrate_segment(diff, &PathSpec::principal(CurveTag::Gamma3, &p, b), &p, 1e-12).unwrap();
            prop_assert!((ia - ib).norm().min((ia + ib).norm()) < 2e-12);
        }
    }
}
