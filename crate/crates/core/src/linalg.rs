//! Fixed-size 3×3 linear algebra over `f64`, `Complex64` and `i64`.

use num_complex::Complex64;
use num_traits::Zero;

pub type CMat3 = [[Complex64; 3]; 3];
pub type RMat3 = [[f64; 3]; 3];
pub type IMat3 = [[i64; 3]; 3];

pub fn imat_mul(a: &IMat3, b: &IMat3) -> IMat3 {
    let mut out = [[0i64; 3]; 3];
    for (i, row) in out.iter_mut().enumerate() {
        for (j, v) in row.iter_mut().enumerate() {
            *v = (0..3).map(|k| a[i][k] * b[k][j]).sum();
        }
    }
    out
}

pub fn imat_transpose(a: &IMat3) -> IMat3 {
    let mut out = [[0i64; 3]; 3];
    for i in 0..3 {
        for j in 0..3 {
            out[i][j] = a[j][i];
        }
    }
    out
}

pub fn imat_sub(a: &IMat3, b: &IMat3) -> IMat3 {
    let mut out = *a;
    for i in 0..3 {
        for j in 0..3 {
            out[i][j] -= b[i][j];
        }
    }
    out
}

pub fn imat_to_real(a: &IMat3) -> RMat3 {
    let mut out = [[0.0; 3]; 3];
    for i in 0..3 {
        for j in 0..3 {
            out[i][j] = a[i][j] as f64;
        }
    }
    out
}

pub fn cmat_mul(a: &CMat3, b: &CMat3) -> CMat3 {
    let mut out = [[Complex64::zero(); 3]; 3];
    for (i, row) in out.iter_mut().enumerate() {
        for (j, v) in row.iter_mut().enumerate() {
            *v = a[i][0] * b[0][j] + a[i][1] * b[1][j] + a[i][2] * b[2][j];
        }
    }
    out
}

pub fn cmat_vec(a: &CMat3, v: &[Complex64; 3]) -> [Complex64; 3] {
    let mut out = [Complex64::zero(); 3];
    for (i, o) in out.iter_mut().enumerate() {
        *o = a[i][0] * v[0] + a[i][1] * v[1] + a[i][2] * v[2];
    }
    out
}

pub fn cmat_scale(a: &CMat3, s: Complex64) -> CMat3 {
    let mut out = *a;
    for row in out.iter_mut() {
        for v in row.iter_mut() {
            *v *= s;
        }
    }
    out
}

pub fn cmat_from_real(a: &RMat3) -> CMat3 {
    let mut out = [[Complex64::zero(); 3]; 3];
    for i in 0..3 {
        for j in 0..3 {
            out[i][j] = Complex64::new(a[i][j], 0.0);
        }
    }
    out
}

pub fn cmat_re(a: &CMat3) -> RMat3 {
    let mut out = [[0.0; 3]; 3];
    for i in 0..3 {
        for j in 0..3 {
            out[i][j] = a[i][j].re;
        }
    }
    out
}

pub fn cmat_im(a: &CMat3) -> RMat3 {
    let mut out = [[0.0; 3]; 3];
    for i in 0..3 {
        for j in 0..3 {
            out[i][j] = a[i][j].im;
        }
    }
    out
}

pub fn cmat_det(a: &CMat3) -> Complex64 {
    a[0][0] * (a[1][1] * a[2][2] - a[1][2] * a[2][1])
        - a[0][1] * (a[1][0] * a[2][2] - a[1][2] * a[2][0])
        + a[0][2] * (a[1][0] * a[2][1] - a[1][1] * a[2][0])
}

/// Inverse by the adjugate formula; `None` when the determinant is zero.
pub fn cmat_inv(a: &CMat3) -> Option<CMat3> {
    let det = cmat_det(a);
    if det.is_zero() || !det.re.is_finite() || !det.im.is_finite() {
        return None;
    }
    let mut out = [[Complex64::zero(); 3]; 3];
    for i in 0..3 {
        for j in 0..3 {
            let (r0, r1) = minor_idx(j);
            let (c0, c1) = minor_idx(i);
            let m = a[r0][c0] * a[r1][c1] - a[r0][c1] * a[r1][c0];
            let sign = if (i + j) % 2 == 0 { 1.0 } else { -1.0 };
            out[i][j] = m * sign / det;
        }
    }
    Some(out)
}

fn minor_idx(skip: usize) -> (usize, usize) {
    match skip {
        0 => (1, 2),
        1 => (0, 2),
        _ => (0, 1),
    }
}

pub fn rmat_mul(a: &RMat3, b: &RMat3) -> RMat3 {
    let mut out = [[0.0; 3]; 3];
    for (i, row) in out.iter_mut().enumerate() {
        for (j, v) in row.iter_mut().enumerate() {
            *v = a[i][0] * b[0][j] + a[i][1] * b[1][j] + a[i][2] * b[2][j];
        }
    }
    out
}

pub fn rmat_vec(a: &RMat3, v: &[f64; 3]) -> [f64; 3] {
    let mut out = [0.0; 3];
    for (i, o) in out.iter_mut().enumerate() {
        *o = a[i][0] * v[0] + a[i][1] * v[1] + a[i][2] * v[2];
    }
    out
}

pub fn rmat_det(a: &RMat3) -> f64 {
    a[0][0] * (a[1][1] * a[2][2] - a[1][2] * a[2][1])
        - a[0][1] * (a[1][0] * a[2][2] - a[1][2] * a[2][0])
        + a[0][2] * (a[1][0] * a[2][1] - a[1][1] * a[2][0])
}

pub fn rmat_inv(a: &RMat3) -> Option<RMat3> {
    let c = cmat_inv(&cmat_from_real(a))?;
    Some(cmat_re(&c))
}

/// Leading principal minors of a real symmetric matrix.
pub fn leading_minors(a: &RMat3) -> [f64; 3] {
    [
        a[0][0],
        a[0][0] * a[1][1] - a[0][1] * a[1][0],
        rmat_det(a),
    ]
}

/// Largest absolute entry.
pub fn rmat_max_abs(a: &RMat3) -> f64 {
    a.iter()
        .flat_map(|r| r.iter())
        .fold(0.0, |m: f64, v| m.max(v.abs()))
}

pub fn cmat_max_abs(a: &CMat3) -> f64 {
    a.iter()
        .flat_map(|r| r.iter())
        .fold(0.0, |m: f64, v| m.max(v.norm()))
}
