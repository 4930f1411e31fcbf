//! Jacobi theta series, the brute-force Riemann theta function and the
//! reduced genus-3 theta function.
//!
//! Series conventions (nome h ∈ [0, 1)):
//!
//! ```text
//! ϑ1(p) = 2 Σ_{m≥1} (−1)^{m−1} h^{(m−½)²} sin((2m−1)πp)
//! ϑ2(p) = 2 Σ_{m≥1}            h^{(m−½)²} cos((2m−1)πp)
//! ϑ3(p) = 1 + 2 Σ_{m≥1}        h^{m²}     cos(2mπp)
//! ϑ4(p) = 1 + 2 Σ_{m≥1} (−1)^m h^{m²}     cos(2mπp)
//! ```

use core::f64::consts::PI;
use core::fmt;
use core::ops::{Add, Mul, Neg, Sub};

use num_complex::Complex64;
#[allow(unused_imports)]
use num_traits::Float;

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum ThetaError {
    NomeOutOfRange(f64),
    InvalidEps(f64),
    NotPositiveDefinite,
    TruncationOverflow { points: u64, cap: u64 },
    UnsupportedDimension(usize),
}

impl fmt::Display for ThetaError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            ThetaError::NomeOutOfRange(h) => write!(f, "NomeOutOfRange: nome {h} not in [0, 1)"),
            ThetaError::InvalidEps(e) => write!(f, "truncation eps must be positive (got {e})"),
            ThetaError::NotPositiveDefinite => write!(f, "NotPositiveDefinite: Im B is not positive definite"),
            ThetaError::TruncationOverflow { points, cap } => write!(
                f,
                "TruncationOverflow: ellipsoid holds more than {cap} lattice points ({points} counted)"
            ),
            ThetaError::UnsupportedDimension(g) => write!(f, "brute-force theta supports 1 ≤ g ≤ 4 (got {g})"),
        }
    }
}

impl core::error::Error for ThetaError {}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ThetaKind {
    One,
    Two,
    Three,
    Four,
}

/// Scalars the series can be evaluated on.
pub trait SeriesArg:
    Copy + Add<Output = Self> + Sub<Output = Self> + Mul<f64, Output = Self> + Neg<Output = Self>
{
    fn zero() -> Self;
    fn one() -> Self;
    fn sin(self) -> Self;
    fn cos(self) -> Self;
    fn magnitude(self) -> f64;
    fn imag_abs(self) -> f64;
}

impl SeriesArg for f64 {
    fn zero() -> Self {
        0.0
    }
    fn one() -> Self {
        1.0
    }
    fn sin(self) -> Self {
        Float::sin(self)
    }
    fn cos(self) -> Self {
        Float::cos(self)
    }
    fn magnitude(self) -> f64 {
        Float::abs(self)
    }
    fn imag_abs(self) -> f64 {
        0.0
    }
}

impl SeriesArg for Complex64 {
    fn zero() -> Self {
        Complex64::new(0.0, 0.0)
    }
    fn one() -> Self {
        Complex64::new(1.0, 0.0)
    }
    fn sin(self) -> Self {
        Complex64::sin(self)
    }
    fn cos(self) -> Self {
        Complex64::cos(self)
    }
    fn magnitude(self) -> f64 {
        self.norm()
    }
    fn imag_abs(self) -> f64 {
        Float::abs(self.im)
    }
}

/// Neumaier-compensated running sum.
#[derive(Debug, Clone, Copy)]
pub struct CompensatedSum<T> {
    sum: T,
    comp: T,
}

impl<T: SeriesArg> CompensatedSum<T> {
    pub fn new() -> Self {
        CompensatedSum { sum: T::zero(), comp: T::zero() }
    }

    pub fn add(&mut self, x: T) {
        let t = self.sum + x;
        if self.sum.magnitude() >= x.magnitude() {
            self.comp = self.comp + ((self.sum - t) + x);
        } else {
            self.comp = self.comp + ((x - t) + self.sum);
        }
        self.sum = t;
    }

    pub fn value(&self) -> T {
        self.sum + self.comp
    }
}

impl<T: SeriesArg> Default for CompensatedSum<T> {
    fn default() -> Self {
        Self::new()
    }
}

fn check_nome(h: f64) -> Result<(), ThetaError> {
    if (0.0..1.0).contains(&h) {
        Ok(())
    } else {
        Err(ThetaError::NomeOutOfRange(h))
    }
}

fn check_eps(eps: f64) -> Result<(), ThetaError> {
    if eps > 0.0 && eps.is_finite() {
        Ok(())
    } else {
        Err(ThetaError::InvalidEps(eps))
    }
}

/// ϑ_kind(p | h) for real arguments.
pub fn jacobi_theta(kind: ThetaKind, p: f64, h: f64, eps: f64) -> Result<f64, ThetaError> {
    theta_series(kind, p, h, eps)
}

/// ϑ_kind(p | h) for complex arguments.
pub fn jacobi_theta_complex(kind: ThetaKind, p: Complex64, h: f64, eps: f64) -> Result<Complex64, ThetaError> {
    theta_series(kind, p, h, eps)
}

/// Generic series evaluation. The tail after the last term is bounded by
/// `next / (1 − ratio)`, where `ratio` bounds successive term ratios; the
/// loop stops once that bound drops below eps·(1 + |partial sum|).
pub fn theta_series<T: SeriesArg>(kind: ThetaKind, p: T, h: f64, eps: f64) -> Result<T, ThetaError> {
    check_nome(h)?;
    check_eps(eps)?;
    let half = matches!(kind, ThetaKind::One | ThetaKind::Two);
    let mut acc = CompensatedSum::new();
    if !half {
        acc.add(T::one());
    }
    if h == 0.0 {
        return Ok(acc.value());
    }
    let ln_h = h.ln();
    let y = p.imag_abs();
    let mut m: u32 = 1;
    loop {
        let mf = f64::from(m);
        let (expo, freq) = if half { ((mf - 0.5) * (mf - 0.5), (2.0 * mf - 1.0) * PI) } else { (mf * mf, 2.0 * mf * PI) };
        let weight = 2.0 * (expo * ln_h).exp();
        let odd = m % 2 == 1;
        let term = match kind {
            ThetaKind::One => (p * freq).sin() * if odd { weight } else { -weight },
            ThetaKind::Two => (p * freq).cos() * weight,
            ThetaKind::Three => (p * freq).cos() * weight,
            ThetaKind::Four => (p * freq).cos() * if odd { -weight } else { weight },
        };
        acc.add(term);
        // Bound on the next term and the ratio of later successive terms.
        let next_expo = if half { (mf + 0.5) * (mf + 0.5) } else { (mf + 1.0) * (mf + 1.0) };
        let next_freq = freq + 2.0 * PI;
        let next = 2.0 * (next_expo * ln_h + next_freq * y).exp();
        let ratio_log = (next_expo - expo + 2.0) * ln_h + 2.0 * PI * y;
        if ratio_log < 0.0 {
            let tail = next / (1.0 - ratio_log.exp());
            if tail < eps * (1.0 + acc.value().magnitude()) {
                break;
            }
        }
        m += 1;
        if m > 1_000_000 {
            break;
        }
    }
    Ok(acc.value())
}

/// p̃_j = p_j + p_{j+1} − p_{j+2} (indices mod 3).
pub fn reduce_args<T: Copy + Add<Output = T> + Sub<Output = T>>(p: [T; 3]) -> [T; 3] {
    [p[0] + p[1] - p[2], p[1] + p[2] - p[0], p[2] + p[0] - p[1]]
}

/// The reduced-coordinate map as an integer matrix, p̃ = R·p.
pub const REDUCE_MATRIX: [[i64; 3]; 3] = [[1, 1, -1], [-1, 1, 1], [1, -1, 1]];

/// Reduced genus-3 theta function
///
/// ```text
/// f(p̃ | h) = ϑ4(p̃1|h1)ϑ4(p̃2|h2)ϑ4(p̃3|h3) − ϑ4ϑ1ϑ1 − ϑ1ϑ4ϑ1 − ϑ1ϑ1ϑ4
/// ```
///
/// With h_j = exp(−4π𝔟_j) this equals Θ(p|B) at p̃ = reduce_args(p).
pub fn reduced_f(ptilde: [f64; 3], h: [f64; 3], eps: f64) -> Result<f64, ThetaError> {
    reduced_f_generic(ptilde, h, eps)
}

pub fn reduced_f_complex(ptilde: [Complex64; 3], h: [f64; 3], eps: f64) -> Result<Complex64, ThetaError> {
    reduced_f_generic(ptilde, h, eps)
}

fn reduced_f_generic<T: SeriesArg + Mul<Output = T>>(ptilde: [T; 3], h: [f64; 3], eps: f64) -> Result<T, ThetaError> {
    let mut one = [T::zero(); 3];
    let mut four = [T::zero(); 3];
    for j in 0..3 {
        one[j] = theta_series(ThetaKind::One, ptilde[j], h[j], eps)?;
        four[j] = theta_series(ThetaKind::Four, ptilde[j], h[j], eps)?;
    }
    Ok(four[0] * four[1] * four[2]
        - four[0] * one[1] * one[2]
        - one[0] * four[1] * one[2]
        - one[0] * one[1] * four[2])
}

/// Options for the brute-force lattice sum.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct RiemannOptions {
    pub eps: f64,
    /// Maximum number of lattice points visited.
    pub max_points: u64,
}

impl Default for RiemannOptions {
    fn default() -> Self {
        RiemannOptions { eps: 1e-15, max_points: 10_000_000 }
    }
}

/// Θ(p | B) = Σ_{m∈ℤ^g} exp(iπ mᵀBm + 2πi mᵀp) for 1 ≤ g ≤ 4.
///
/// `b` is row-major g×g. Terms are summed over the ellipsoid
/// π(m − c)ᵀ Im B (m − c) ≤ Q_ref + ln(1/eps) + 3 + 2g with
/// c = −(Im B)⁻¹ Im p, where Q_ref is the form at the rounded centre.
pub fn riemann_theta(p: &[Complex64], b: &[Complex64], opts: &RiemannOptions) -> Result<Complex64, ThetaError> {
    let g = p.len();
    if g == 0 || g > 4 || b.len() != g * g {
        return Err(ThetaError::UnsupportedDimension(g));
    }
    check_eps(opts.eps)?;
    // Cholesky of πY (lower), then U = Lᵀ.
    let mut l = [[0.0f64; 4]; 4];
    for i in 0..g {
        for j in 0..=i {
            let mut s = PI * b[i * g + j].im;
            for k in 0..j {
                s -= l[i][k] * l[j][k];
            }
            if i == j {
                if !(s > 0.0) {
                    return Err(ThetaError::NotPositiveDefinite);
                }
                l[i][i] = s.sqrt();
            } else {
                l[i][j] = s / l[j][j];
            }
        }
    }
    // Centre c solves Y c = −Im p, via the Cholesky factor of πY.
    let mut rhs = [0.0f64; 4];
    for i in 0..g {
        rhs[i] = -PI * p[i].im;
    }
    let mut yv = [0.0f64; 4];
    for i in 0..g {
        let mut s = rhs[i];
        for k in 0..i {
            s -= l[i][k] * yv[k];
        }
        yv[i] = s / l[i][i];
    }
    let mut c = [0.0f64; 4];
    for i in (0..g).rev() {
        let mut s = yv[i];
        for k in i + 1..g {
            s -= l[k][i] * c[k];
        }
        c[i] = s / l[i][i];
    }
    let mut u = [[0.0f64; 4]; 4];
    for i in 0..g {
        for j in 0..g {
            u[i][j] = l[j][i];
        }
    }
    let form = |m: &[f64; 4]| {
        let mut q = 0.0;
        for i in 0..g {
            let mut s = 0.0;
            for j in i..g {
                s += u[i][j] * (m[j] - c[j]);
            }
            q += s * s;
        }
        q
    };
    let mut rounded = [0.0f64; 4];
    for i in 0..g {
        rounded[i] = c[i].round();
    }
    let budget = form(&rounded) + (1.0 / opts.eps).ln() + 3.0 + 2.0 * g as f64;

    let mut state = Enum {
        g,
        u,
        c,
        p,
        b,
        m: [0; 4],
        sum: CompensatedSum::new(),
        count: 0,
        cap: opts.max_points,
    };
    state.level(g - 1, budget, 0.0)?;
    Ok(state.sum.value())
}

struct Enum<'a> {
    g: usize,
    u: [[f64; 4]; 4],
    c: [f64; 4],
    p: &'a [Complex64],
    b: &'a [Complex64],
    m: [i64; 4],
    sum: CompensatedSum<Complex64>,
    count: u64,
    cap: u64,
}

impl Enum<'_> {
    fn level(&mut self, i: usize, remaining: f64, _acc: f64) -> Result<(), ThetaError> {
        let mut s = 0.0;
        for j in i + 1..self.g {
            s += self.u[i][j] * (self.m[j] as f64 - self.c[j]);
        }
        let uii = self.u[i][i];
        let centre = self.c[i] - s / uii;
        let half = remaining.max(0.0).sqrt() / uii;
        let lo = (centre - half).ceil() as i64;
        let hi = (centre + half).floor() as i64;
        for mi in lo..=hi {
            let v = uii * (mi as f64 - self.c[i]) + s;
            let rest = remaining - v * v;
            if rest < 0.0 {
                continue;
            }
            self.m[i] = mi;
            if i == 0 {
                self.count += 1;
                if self.count > self.cap {
                    return Err(ThetaError::TruncationOverflow { points: self.count, cap: self.cap });
                }
                self.sum.add(self.term());
            } else {
                self.level(i - 1, rest, 0.0)?;
            }
        }
        Ok(())
    }

    fn term(&self) -> Complex64 {
        let g = self.g;
        let mut quad = Complex64::new(0.0, 0.0);
        let mut lin = Complex64::new(0.0, 0.0);
        for i in 0..g {
            let mi = self.m[i] as f64;
            lin += self.p[i] * mi;
            for j in 0..g {
                quad += self.b[i * g + j] * (mi * self.m[j] as f64);
            }
        }
        (Complex64::i() * PI * (quad + lin * 2.0)).exp()
    }
}
