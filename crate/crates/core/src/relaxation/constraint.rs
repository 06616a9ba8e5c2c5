use serde::{Deserialize, Serialize};

use super::matrix::Matrix2x2;
use crate::error::{Error, Result};
use crate::sampling::norm;

/// A set of admissible gradients. Gradients are flat row-major slices of
/// length `m d` (1 in one dimension, 4 for 2x2 matrices).
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "name", rename_all = "snake_case")]
pub enum ConstraintSet {
    /// `{ xi : eps + det(xi) > tr(xi)^2 }` in 2x2 matrices.
    SEpsilon { eps: f64 },
    /// The closed Frobenius ball of the given radius around 0.
    Ball { radius: f64 },
    /// No constraint.
    Whole,
}

impl ConstraintSet {
    pub fn s_epsilon(eps: f64) -> Result<Self> {
        if !(eps > 0.0) || !eps.is_finite() {
            return Err(Error::invalid(format!("eps = {eps} must be positive")));
        }
        Ok(ConstraintSet::SEpsilon { eps })
    }

    pub fn label(&self) -> String {
        match self {
            ConstraintSet::SEpsilon { eps } => format!("S_eps(eps = {eps})"),
            ConstraintSet::Ball { radius } => format!("ball(radius = {radius})"),
            ConstraintSet::Whole => "whole space".into(),
        }
    }

    /// The gradient length the set lives in, if fixed.
    pub fn gradient_len(&self) -> Option<usize> {
        match self {
            ConstraintSet::SEpsilon { .. } => Some(4),
            _ => None,
        }
    }

    pub fn contains(&self, xi: &[f64]) -> Result<bool> {
        self.closure_margin(xi).map(|m| match self {
            ConstraintSet::SEpsilon { .. } => m > 0.0,
            _ => m >= 0.0,
        })
    }

    /// Membership in the closure, up to `tol` on the defining inequality.
    pub fn closure_contains(&self, xi: &[f64], tol: f64) -> Result<bool> {
        Ok(self.closure_margin(xi)? >= -tol)
    }

    /// The slack of the defining inequality: `eps + det - tr^2` or
    /// `radius - |xi|`.
    pub fn closure_margin(&self, xi: &[f64]) -> Result<f64> {
        match self {
            ConstraintSet::SEpsilon { eps } => {
                let m = Matrix2x2::from_slice(xi)?;
                Ok(s_epsilon_margin(&m, *eps))
            }
            ConstraintSet::Ball { radius } => Ok(radius - norm(xi)),
            ConstraintSet::Whole => Ok(f64::INFINITY),
        }
    }
}

pub(crate) fn s_epsilon_margin(xi: &Matrix2x2, eps: f64) -> f64 {
    eps + xi.det() - xi.trace() * xi.trace()
}

/// `eps + det(xi) > tr(xi)^2`.
pub fn s_epsilon_contains(xi: &Matrix2x2, eps: f64) -> Result<bool> {
    if !(eps > 0.0) {
        return Err(Error::invalid(format!("eps = {eps} must be positive")));
    }
    Ok(s_epsilon_margin(xi, eps) > 0.0)
}
