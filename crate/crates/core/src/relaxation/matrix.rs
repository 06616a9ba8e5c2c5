use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// A real 2x2 matrix, stored row-major.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct Matrix2x2(pub [[f64; 2]; 2]);

impl Matrix2x2 {
    pub const ZERO: Matrix2x2 = Matrix2x2([[0.0; 2]; 2]);

    pub fn new(a11: f64, a12: f64, a21: f64, a22: f64) -> Self {
        Matrix2x2([[a11, a12], [a21, a22]])
    }

    /// From four row-major entries.
    pub fn from_slice(x: &[f64]) -> Result<Self> {
        match x {
            [a, b, c, d] => Ok(Matrix2x2::new(*a, *b, *c, *d)),
            _ => Err(Error::DimensionMismatch { expected: 4, got: x.len() }),
        }
    }

    pub fn entries(&self) -> [f64; 4] {
        let [[a, b], [c, d]] = self.0;
        [a, b, c, d]
    }

    pub fn det(&self) -> f64 {
        let [[a, b], [c, d]] = self.0;
        a * d - b * c
    }

    pub fn trace(&self) -> f64 {
        self.0[0][0] + self.0[1][1]
    }

    pub fn frobenius(&self) -> f64 {
        self.entries().iter().map(|v| v * v).sum::<f64>().sqrt()
    }

    pub fn scale(&self, t: f64) -> Self {
        let [a, b, c, d] = self.entries();
        Matrix2x2::new(t * a, t * b, t * c, t * d)
    }

    pub fn add(&self, other: &Matrix2x2) -> Self {
        let ([a, b, c, d], [e, f, g, h]) = (self.entries(), other.entries());
        Matrix2x2::new(a + e, b + f, c + g, d + h)
    }

    pub fn mul(&self, other: &Matrix2x2) -> Self {
        let ([[a, b], [c, d]], [[e, f], [g, h]]) = (self.0, other.0);
        Matrix2x2::new(a * e + b * g, a * f + b * h, c * e + d * g, c * f + d * h)
    }

    pub fn transpose(&self) -> Self {
        let [[a, b], [c, d]] = self.0;
        Matrix2x2::new(a, c, b, d)
    }

    /// `a ⊗ b`, the rank-one matrix with entries `a_i b_j`.
    pub fn rank_one(a: [f64; 2], b: [f64; 2]) -> Self {
        Matrix2x2::new(a[0] * b[0], a[0] * b[1], a[1] * b[0], a[1] * b[1])
    }

    pub fn rotation(theta: f64) -> Self {
        let (s, c) = theta.sin_cos();
        Matrix2x2::new(c, -s, s, c)
    }

    /// `R self R^T`.
    pub fn conjugate(&self, r: &Matrix2x2) -> Self {
        r.mul(self).mul(&r.transpose())
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn closed_forms() {
        let m = Matrix2x2::new(1.0, 2.0, 3.0, 4.0);
        assert_eq!(m.det(), -2.0);
        assert_eq!(m.trace(), 5.0);
        assert_eq!(m.frobenius(), 30f64.sqrt());
        assert_eq!(Matrix2x2::rank_one([1.0, 2.0], [3.0, 4.0]).det(), 0.0);
        assert_eq!(Matrix2x2::from_slice(&m.entries()).unwrap(), m);
        assert!(Matrix2x2::from_slice(&[1.0]).is_err());
        let r = Matrix2x2::rotation(0.3);
        assert!((r.mul(&r.transpose()).entries()[1]).abs() < 1e-15);
    }
}
