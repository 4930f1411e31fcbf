//! Curve parameters, branch points and the leading coefficients of the
//! branch polynomial.

use core::f64::consts::{FRAC_PI_2, FRAC_PI_4};
use core::fmt;

use num_complex::Complex64;
#[allow(unused_imports)]
use num_traits::Float;


#[derive(Debug, Clone, Copy, PartialEq)]
pub enum CurveError {
    NonFinite(&'static str),
    NonPositiveModulus { a: f64 },
    ModulusOrder { a: f64, b: f64 },
    AngleRange { phi: f64, lo: f64, hi: f64 },
}

impl fmt::Display for CurveError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            CurveError::NonFinite(name) => write!(f, "parameter `{name}` is not finite"),
            CurveError::NonPositiveModulus { a } => write!(f, "modulus a = {a} must be positive"),
            CurveError::ModulusOrder { a, b } => {
                write!(f, "moduli must satisfy a < b (got a = {a}, b = {b})")
            }
            CurveError::AngleRange { phi, lo, hi } => {
                write!(f, "AngleRange: phi = {phi} outside the open interval ({lo}, {hi})")
            }
        }
    }
}

impl core::error::Error for CurveError {}

/// How strictly the angle is validated.
///
/// `Relaxed` admits φ ∈ (0, π/2); it exists for the κ1 = 0 configuration,
/// which needs cos2φ > 0.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum Validation {
    #[default]
    Strict,
    Relaxed,
}

/// Validated curve parameters. Construct with [`CurveParams::new`].
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CurveParams {
    a: f64,
    b: f64,
    phi: f64,
    lambda0: f64,
    alpha: f64,
}

impl CurveParams {
    pub fn new(a: f64, b: f64, phi: f64, lambda0: f64, alpha: f64) -> Result<Self, CurveError> {
        Self::validate(a, b, phi, lambda0, alpha, Validation::Strict)
    }

    pub fn validate(
        a: f64,
        b: f64,
        phi: f64,
        lambda0: f64,
        alpha: f64,
        mode: Validation,
    ) -> Result<Self, CurveError> {
        for (name, v) in [("a", a), ("b", b), ("phi", phi), ("lambda0", lambda0), ("alpha", alpha)] {
            if !v.is_finite() {
                return Err(CurveError::NonFinite(name));
            }
        }
        if a <= 0.0 {
            return Err(CurveError::NonPositiveModulus { a });
        }
        if b <= a {
            return Err(CurveError::ModulusOrder { a, b });
        }
        let lo = match mode {
            Validation::Strict => FRAC_PI_4,
            Validation::Relaxed => 0.0,
        };
        if !(phi > lo && phi < FRAC_PI_2) {
            return Err(CurveError::AngleRange { phi, lo, hi: FRAC_PI_2 });
        }
        Ok(CurveParams { a, b, phi, lambda0, alpha })
    }

    pub fn a(&self) -> f64 {
        self.a
    }
    pub fn b(&self) -> f64 {
        self.b
    }
    pub fn phi(&self) -> f64 {
        self.phi
    }
    pub fn lambda0(&self) -> f64 {
        self.lambda0
    }
    pub fn alpha(&self) -> f64 {
        self.alpha
    }

    /// Same curve shape with a different spectral shift. The shift never
    /// affects validity.
    pub fn with_lambda0(&self, lambda0: f64) -> Result<Self, CurveError> {
        if !lambda0.is_finite() {
            return Err(CurveError::NonFinite("lambda0"));
        }
        Ok(CurveParams { lambda0, ..*self })
    }

    pub fn with_alpha(&self, alpha: f64) -> Result<Self, CurveError> {
        if !alpha.is_finite() {
            return Err(CurveError::NonFinite("alpha"));
        }
        Ok(CurveParams { alpha, ..*self })
    }

    pub fn cos2phi(&self) -> f64 {
        (2.0 * self.phi).cos()
    }
}

/// Branch points of Γ3 and of the elliptic quotient curves.
///
/// Ordering is fixed:
/// * `lambda_points`: λ0 + a e^{iφ}, λ0 + a e^{−iφ}, λ0 − a e^{iφ}, λ0 − a e^{−iφ},
///   then the same four with b.
/// * `t_points`: t1 = b²e^{2iφ}, t2 = a²e^{2iφ}, t̄1, t̄2.
/// * `s_plus` / `s_minus`: ∓2ab, s1, s̄1 with s1 = a²e^{2iφ} + b²e^{−2iφ}.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct BranchData {
    pub lambda_points: [Complex64; 8],
    pub t_points: [Complex64; 4],
    pub s_plus: [Complex64; 3],
    pub s_minus: [Complex64; 3],
}

pub fn branch_points(params: &CurveParams) -> BranchData {
    let (a, b, phi, l0) = (params.a, params.b, params.phi, params.lambda0);
    let l0 = Complex64::new(l0, 0.0);
    let e = Complex64::from_polar(1.0, phi);
    let ec = e.conj();
    let lambda_points = [
        l0 + e * a,
        l0 + ec * a,
        l0 - e * a,
        l0 - ec * a,
        l0 + e * b,
        l0 + ec * b,
        l0 - e * b,
        l0 - ec * b,
    ];
    let e2 = Complex64::from_polar(1.0, 2.0 * phi);
    let t1 = e2 * (b * b);
    let t2 = e2 * (a * a);
    let s1 = e2 * (a * a) + e2.conj() * (b * b);
    let two_ab = Complex64::new(2.0 * a * b, 0.0);
    BranchData {
        lambda_points,
        t_points: [t1, t2, t1.conj(), t2.conj()],
        s_plus: [-two_ab, s1, s1.conj()],
        s_minus: [two_ab, s1, s1.conj()],
    }
}

/// Factored form of the right-hand side of the curve equation.
pub fn curve_polynomial(params: &CurveParams, lambda: Complex64) -> Complex64 {
    let mu = lambda - params.lambda0;
    let mu2 = mu * mu;
    let c = params.cos2phi();
    let (a2, b2) = (params.a * params.a, params.b * params.b);
    (mu2 * mu2 - mu2 * (2.0 * a2 * c) + a2 * a2) * (mu2 * mu2 - mu2 * (2.0 * b2 * c) + b2 * b2)
}

/// Coefficients of the monic polynomial ∏(λ − r), highest degree first.
pub fn expand_roots<const N: usize, const M: usize>(roots: &[Complex64; N]) -> [Complex64; M] {
    assert_eq!(M, N + 1, "coefficient array must have one more slot than roots");
    let mut coeffs = [Complex64::new(0.0, 0.0); M];
    coeffs[0] = Complex64::new(1.0, 0.0);
    for (n, r) in roots.iter().enumerate() {
        for k in (1..=n + 1).rev() {
            let prev = coeffs[k - 1];
            coeffs[k] -= prev * r;
        }
    }
    coeffs
}

/// Numerically expanded degree-8 branch polynomial, highest degree first.
pub fn branch_polynomial(params: &CurveParams) -> [Complex64; 9] {
    expand_roots::<8, 9>(&branch_points(params).lambda_points)
}

/// (χ1, χ2): coefficients of λ⁷ and λ⁶ in the monic branch polynomial.
///
/// Closed forms: χ1 = −8λ0, χ2 = 28λ0² − 2(a²+b²)cos2φ. The numerically
/// expanded polynomial is compared against them in debug builds.
pub fn chi_coeffs(params: &CurveParams) -> (f64, f64) {
    let l0 = params.lambda0;
    let chi1 = -8.0 * l0;
    let chi2 = 28.0 * l0 * l0 - 2.0 * (params.a * params.a + params.b * params.b) * params.cos2phi();
    #[cfg(debug_assertions)]
    {
        let (n1, n2) = chi_coeffs_expanded(params);
        let scale = 1.0 + chi1.abs() + chi2.abs();
        debug_assert!((n1 - chi1).norm() <= 1e-10 * scale);
        debug_assert!((n2 - chi2).norm() <= 1e-10 * scale);
    }
    (chi1, chi2)
}

/// (χ1, χ2) read off the numerically expanded polynomial.
pub fn chi_coeffs_expanded(params: &CurveParams) -> (Complex64, Complex64) {
    let p = branch_polynomial(params);
    (p[1], p[2])
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::reference;
    use core::f64::consts::PI;
    use proptest::prelude::*;

    fn reference_params() -> CurveParams {
        CurveParams::new(reference::A, reference::B, reference::PHI, 0.0, 0.1).unwrap()
    }

    #[test]
    fn reference_set_is_valid() {
        let p = reference_params();
        assert_eq!(p.alpha(), 0.1);
    }

    #[test]
    fn rejects_swapped_moduli() {
        let err = CurveParams::new(1.3, 1.0 / 1.3, 0.3 * PI, 0.0, 0.1).unwrap_err();
        assert!(matches!(err, CurveError::ModulusOrder { .. }));
    }

    #[test]
    fn rejects_small_angle() {
        let err = CurveParams::new(0.5, 1.0, 0.2 * PI, 0.0, 0.0).unwrap_err();
        assert!(matches!(err, CurveError::AngleRange { .. }));
        assert!(CurveParams::validate(0.5, 1.0, 0.2 * PI, 0.0, 0.0, Validation::Relaxed).is_ok());
    }

    #[test]
    fn rejects_boundaries_and_non_finite() {
        assert!(CurveParams::new(0.5, 1.0, FRAC_PI_4, 0.0, 0.0).is_err());
        assert!(CurveParams::new(0.5, 1.0, FRAC_PI_2, 0.0, 0.0).is_err());
        assert!(matches!(
            CurveParams::new(0.0, 1.0, 1.0, 0.0, 0.0),
            Err(CurveError::NonPositiveModulus { .. })
        ));
        assert!(matches!(
            CurveParams::new(0.5, f64::NAN, 1.0, 0.0, 0.0),
            Err(CurveError::NonFinite("b"))
        ));
        assert!(matches!(
            CurveParams::new(0.5, 1.0, 1.0, 0.0, f64::INFINITY),
            Err(CurveError::NonFinite("alpha"))
        ));
    }

    #[test]
    fn unit_and_double_circle_points() {
        let p = CurveParams::new(1.0, 2.0, PI / 3.0, 0.0, 0.0).unwrap();
        let bd = branch_points(&p);
        let e = Complex64::from_polar(1.0, PI / 3.0);
        let expected = [e, e.conj(), -e, -e.conj(), e * 2.0, e.conj() * 2.0, -e * 2.0, -e.conj() * 2.0];
        for (got, want) in bd.lambda_points.iter().zip(expected.iter()) {
            assert!((got - want).norm() < 1e-15);
        }
        let poly = branch_polynomial(&p);
        for z in bd.lambda_points {
            let direct = curve_polynomial(&p, z);
            let horner = poly.iter().fold(Complex64::new(0.0, 0.0), |acc, c| acc * z + c);
            assert!(direct.norm() <= 1e-12 * 16.0);
            assert!(horner.norm() <= 1e-12 * 16.0 * 10.0);
        }
    }

    #[test]
    fn chi_closed_forms_reference_set() {
        let p = reference_params();
        let (chi1, chi2) = chi_coeffs(&p);
        assert_eq!(chi1, 0.0);
        let expect = -2.0 * (p.a() * p.a() + p.b() * p.b()) * (0.6 * PI).cos();
        assert!((chi2 - expect).abs() < 1e-13);
        let (n1, n2) = chi_coeffs_expanded(&p);
        assert!(n1.norm() < 1e-13);
        assert!((n2 - expect).norm() < 1e-12);
    }

    #[test]
    fn t_points_match_definition() {
        let p = reference_params();
        let bd = branch_points(&p);
        let t1 = Complex64::from_polar(p.b() * p.b(), 2.0 * p.phi());
        let t2 = Complex64::from_polar(p.a() * p.a(), 2.0 * p.phi());
        assert_eq!(bd.t_points[0], t1);
        assert!((bd.t_points[1] - t2).norm() < 1e-15);
        assert!(bd.s_plus[1].im < 0.0);
    }

    fn arb_params() -> impl Strategy<Value = CurveParams> {
        (0.1f64..2.0, 0.05f64..2.0, 0.26f64..0.49, -5.0f64..5.0).prop_map(|(a, gap, frac, l0)| {
            CurveParams::new(a, a + gap, frac * PI, l0, 0.1).unwrap()
        })
    }

    proptest! {
        #![proptest_config(ProptestConfig::with_cases(1000))]

        #[test]
        fn expanded_polynomial_is_real(p in arb_params()) {
            let poly = branch_polynomial(&p);
            let scale = poly.iter().fold(1.0f64, |m, c| m.max(c.norm()));
            for c in poly {
                prop_assert!(c.im.abs() <= 1e-10 * scale);
            }
        }

        #[test]
        fn chi_closed_form_matches_expansion(p in arb_params()) {
            let (chi1, chi2) = chi_coeffs(&p);
            let (n1, n2) = chi_coeffs_expanded(&p);
            let scale = 1.0 + chi1.abs() + chi2.abs();
            prop_assert!((n1 - chi1).norm() <= 1e-10 * scale);
            prop_assert!((n2 - chi2).norm() <= 1e-10 * scale);
        }

        #[test]
        fn branch_set_symmetries(p in arb_params()) {
            let pts = branch_points(&p).lambda_points;
            let l0 = p.lambda0();
            for z in pts {
                prop_assert!(z.im != 0.0);
                let has = |w: Complex64| pts.iter().any(|q| (q - w).norm() <= 1e-12 * (1.0 + w.norm()));
                prop_assert!(has(z.conj()));
                prop_assert!(has(Complex64::new(2.0 * l0, 0.0) - z));
                let r = curve_polynomial(&p, z).norm();
                let scale = (z - l0).norm().powi(8) + p.b().powi(8);
                prop_assert!(r <= 1e-12 * scale);
            }
        }

        #[test]
        fn shift_commutes_with_branch_points(p in arb_params(), shift in -4.0f64..4.0) {
            let base = branch_points(&p.with_lambda0(0.0).unwrap());
            let moved = branch_points(&p.with_lambda0(shift).unwrap());
            for (u, v) in base.lambda_points.iter().zip(moved.lambda_points.iter()) {
                prop_assert!((u + shift - v).norm() <= 1e-14 * (1.0 + shift.abs() + u.norm()));
            }
            prop_assert_eq!(base.t_points, moved.t_points);
        }
    }
}
