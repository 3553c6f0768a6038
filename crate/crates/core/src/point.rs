//! Fixed-size coordinate helpers.
//!
//! Points and vectors are stored as `[f64; 3]` regardless of the spatial
//! dimension; in 2D the third component is zero and ignored.

pub type Point = [f64; 3];

/// Row-major `3x3` matrix; only the leading `d x d` block is meaningful.
pub type Mat3 = [[f64; 3]; 3];

pub const ORIGIN: Point = [0.0; 3];

#[inline]
pub fn add(a: &Point, b: &Point) -> Point {
    [a[0] + b[0], a[1] + b[1], a[2] + b[2]]
}

#[inline]
pub fn sub(a: &Point, b: &Point) -> Point {
    [a[0] - b[0], a[1] - b[1], a[2] - b[2]]
}

#[inline]
pub fn scale(a: &Point, s: f64) -> Point {
    [a[0] * s, a[1] * s, a[2] * s]
}

#[inline]
pub fn axpy(a: &Point, s: f64, b: &Point) -> Point {
    [a[0] + s * b[0], a[1] + s * b[1], a[2] + s * b[2]]
}

#[inline]
pub fn dot(a: &Point, b: &Point) -> f64 {
    a[0] * b[0] + a[1] * b[1] + a[2] * b[2]
}

#[inline]
pub fn norm(a: &Point) -> f64 {
    dot(a, a).sqrt()
}

#[inline]
pub fn cross(a: &Point, b: &Point) -> Point {
    [
        a[1] * b[2] - a[2] * b[1],
        a[2] * b[0] - a[0] * b[2],
        a[0] * b[1] - a[1] * b[0],
    ]
}

#[inline]
pub fn lerp(a: &Point, b: &Point, t: f64) -> Point {
    [
        a[0] + t * (b[0] - a[0]),
        a[1] + t * (b[1] - a[1]),
        a[2] + t * (b[2] - a[2]),
    ]
}

/// Determinant of the leading `dim x dim` block.
pub fn det(m: &Mat3, dim: usize) -> f64 {
    match dim {
        1 => m[0][0],
        2 => m[0][0] * m[1][1] - m[0][1] * m[1][0],
        _ => {
            m[0][0] * (m[1][1] * m[2][2] - m[1][2] * m[2][1])
                - m[0][1] * (m[1][0] * m[2][2] - m[1][2] * m[2][0])
                + m[0][2] * (m[1][0] * m[2][1] - m[1][1] * m[2][0])
        }
    }
}

/// Inverse-transpose of the leading block, `J^{-T}`, given its determinant.
pub fn inv_transpose(m: &Mat3, dim: usize, det: f64) -> Mat3 {
    let mut out = [[0.0; 3]; 3];
    match dim {
        1 => out[0][0] = 1.0 / det,
        2 => {
            out[0][0] = m[1][1] / det;
            out[0][1] = -m[1][0] / det;
            out[1][0] = -m[0][1] / det;
            out[1][1] = m[0][0] / det;
        }
        _ => {
            // cofactor matrix divided by det is J^{-T}
            out[0][0] = (m[1][1] * m[2][2] - m[1][2] * m[2][1]) / det;
            out[0][1] = -(m[1][0] * m[2][2] - m[1][2] * m[2][0]) / det;
            out[0][2] = (m[1][0] * m[2][1] - m[1][1] * m[2][0]) / det;
            out[1][0] = -(m[0][1] * m[2][2] - m[0][2] * m[2][1]) / det;
            out[1][1] = (m[0][0] * m[2][2] - m[0][2] * m[2][0]) / det;
            out[1][2] = -(m[0][0] * m[2][1] - m[0][1] * m[2][0]) / det;
            out[2][0] = (m[0][1] * m[1][2] - m[0][2] * m[1][1]) / det;
            out[2][1] = -(m[0][0] * m[1][2] - m[0][2] * m[1][0]) / det;
            out[2][2] = (m[0][0] * m[1][1] - m[0][1] * m[1][0]) / det;
        }
    }
    out
}

/// `m * v` on the leading block.
#[inline]
pub fn mat_vec(m: &Mat3, v: &Point, dim: usize) -> Point {
    let mut out = ORIGIN;
    for i in 0..dim {
        for j in 0..dim {
            out[i] += m[i][j] * v[j];
        }
    }
    out
}

/// `m^T * v` on the leading block.
#[inline]
pub fn mat_t_vec(m: &Mat3, v: &Point, dim: usize) -> Point {
    let mut out = ORIGIN;
    for i in 0..dim {
        for j in 0..dim {
            out[j] += m[i][j] * v[i];
        }
    }
    out
}
