use std::fmt;
use std::sync::Arc;

use serde::{Deserialize, Serialize};

use crate::error::{check_dim, Error, Result};
use crate::ext::ExtReal;

/// Analytic facts a function declares about itself. Verifiers treat these
/// as ground truth to be spot-checked, never as something to infer.
#[derive(Clone, Copy, Debug, Default, PartialEq, Serialize, Deserialize)]
pub struct Properties {
    #[serde(default)]
    pub convex: bool,
    /// Continuous on its effective domain.
    #[serde(default)]
    pub continuous: bool,
    /// A value `m` with `f >= m` everywhere.
    #[serde(default)]
    pub lower_bound: Option<f64>,
    /// A value `M` with `f <= M` on the effective domain.
    #[serde(default)]
    pub upper_bound: Option<f64>,
}

impl Properties {
    pub fn convex_continuous() -> Self {
        Properties { convex: true, continuous: true, ..Default::default() }
    }

    pub fn with_lower(mut self, m: f64) -> Self {
        self.lower_bound = Some(m);
        self
    }

    pub fn with_upper(mut self, m: f64) -> Self {
        self.upper_bound = Some(m);
        self
    }

    /// `sup |f|` over the effective domain, when both bounds are declared.
    pub fn abs_bound(&self) -> Option<f64> {
        Some(self.lower_bound?.abs().max(self.upper_bound?.abs()))
    }
}

type EvalFn = dyn Fn(&[f64]) -> Result<ExtReal> + Send + Sync;

/// A pure map `R^n -> ]-inf, +inf]`.
///
/// Immutable and cheap to clone; safe to evaluate from many threads.
#[derive(Clone)]
pub struct FunctionOracle {
    name: String,
    dim: usize,
    properties: Properties,
    eval_fn: Arc<EvalFn>,
}

impl FunctionOracle {
    pub fn new<F>(name: impl Into<String>, dim: usize, properties: Properties, f: F) -> Self
    where
        F: Fn(&[f64]) -> ExtReal + Send + Sync + 'static,
    {
        Self::try_new(name, dim, properties, move |x| Ok(f(x)))
    }

    /// Like [`FunctionOracle::new`] for evaluations that can fail.
    pub fn try_new<F>(name: impl Into<String>, dim: usize, properties: Properties, f: F) -> Self
    where
        F: Fn(&[f64]) -> Result<ExtReal> + Send + Sync + 'static,
    {
        assert!(dim > 0, "function oracle dimension must be positive");
        FunctionOracle { name: name.into(), dim, properties, eval_fn: Arc::new(f) }
    }

    pub fn name(&self) -> &str {
        &self.name
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn properties(&self) -> &Properties {
        &self.properties
    }

    /// Replaces the declared properties (e.g. to model a wrong declaration).
    pub fn with_properties(mut self, properties: Properties) -> Self {
        self.properties = properties;
        self
    }

    pub fn renamed(mut self, name: impl Into<String>) -> Self {
        self.name = name.into();
        self
    }

    pub fn eval(&self, x: &[f64]) -> Result<ExtReal> {
        check_dim(self.dim, x.len())?;
        match (self.eval_fn)(x)? {
            ExtReal::Finite(v) if !v.is_finite() => Err(Error::NumericalBlowup {
                context: format!("{} at {:?}", self.name, x),
                value: v,
            }),
            v => Ok(v),
        }
    }

    /// `f(x)`, required to be finite.
    pub fn eval_finite(&self, x: &[f64]) -> Result<f64> {
        self.eval(x)?.as_finite().ok_or_else(|| Error::OutsideDomain {
            point: x.to_vec(),
            context: self.name.clone(),
        })
    }

    pub fn dom_contains(&self, x: &[f64]) -> Result<bool> {
        Ok(self.eval(x)?.is_finite())
    }
}

impl fmt::Debug for FunctionOracle {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("FunctionOracle")
            .field("name", &self.name)
            .field("dim", &self.dim)
            .field("properties", &self.properties)
            .finish_non_exhaustive()
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn dimension_mismatch_is_an_error() {
        let f = FunctionOracle::new("zero", 2, Properties::default(), |_| ExtReal::ZERO);
        assert!(matches!(f.eval(&[1.0]), Err(Error::DimensionMismatch { expected: 2, got: 1 })));
    }

    #[test]
    fn overflow_is_detected_not_mapped_to_inf() {
        let f = FunctionOracle::new("huge", 1, Properties::default(), |x| ExtReal::Finite(x[0] * f64::MAX));
        assert!(matches!(f.eval(&[4.0]), Err(Error::NumericalBlowup { .. })));
        assert_eq!(f.eval(&[0.5]).unwrap(), ExtReal::Finite(0.5 * f64::MAX));
    }
}
