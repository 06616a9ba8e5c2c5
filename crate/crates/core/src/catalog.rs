//! Named test functions and their compositions.
//!
//! A [`FunctionExpr`] is both the JSON form of a function and its
//! construction tree: [`FunctionExpr::build`] turns it into an oracle, and
//! building the same expression twice yields bitwise-identical evaluations.

use serde::{Deserialize, Serialize};

use crate::error::{check_dim, Error, Result};
use crate::ext::ExtReal;
use crate::oracle::{FunctionOracle, Properties};
use crate::sampling::{dist, norm};
use crate::starshape::{indicator, Region};
use crate::tabulated::{min_plus, TabulatedFunction};

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "name", rename_all = "snake_case")]
pub enum FunctionExpr {
    Constant {
        value: f64,
    },
    /// `|u - center|^p` (center defaults to the origin).
    NormPower {
        p: f64,
        #[serde(default)]
        center: Option<Vec<f64>>,
    },
    /// `<weights, u> + offset`.
    Affine {
        weights: Vec<f64>,
        #[serde(default)]
        offset: f64,
    },
    /// `u^T A u + <linear, u> + constant`, `matrix` row-major `n x n`.
    Quadratic {
        matrix: Vec<Vec<f64>>,
        #[serde(default)]
        linear: Option<Vec<f64>>,
        #[serde(default)]
        constant: f64,
    },
    /// `x^2 + y^2 + x y^3` on the plane: continuous, not convex.
    NonconvexTest,
    /// `1 / (1 - |u|)` on the open unit ball, `+inf` outside.
    Barrier,
    /// `sin(1 / (1 - |u|))` on the open unit ball, `0` outside. Its radial
    /// values toward the unit sphere oscillate without a limit.
    SinRadial,
    /// `below` where `<normal, u> <= offset`, `above` elsewhere.
    Step {
        normal: Vec<f64>,
        offset: f64,
        below: f64,
        above: f64,
    },
    /// `base` everywhere except `value` at the single point `at`.
    Spike {
        at: Vec<f64>,
        value: f64,
        #[serde(default)]
        base: f64,
    },
    Indicator {
        region: Region,
    },
    /// Euclidean distance to the box `[lower, upper]`.
    BoxDistance {
        lower: Vec<f64>,
        upper: Vec<f64>,
    },
    Sum {
        terms: Vec<FunctionExpr>,
    },
    Product {
        factors: Vec<FunctionExpr>,
    },
    Scale {
        factor: f64,
        of: Box<FunctionExpr>,
    },
    Shift {
        by: f64,
        of: Box<FunctionExpr>,
    },
    /// `f + chi_D`.
    Restrict {
        region: Region,
        of: Box<FunctionExpr>,
    },
    /// Replaces the declared properties of `of`.
    Declared {
        properties: Properties,
        of: Box<FunctionExpr>,
    },
    Tabulated {
        table: TabulatedFunction,
        #[serde(default)]
        properties: Properties,
    },
    /// Grid min-plus convolution `min_v f(u - v) + g(v)` over the nodes of
    /// `axes`, interpolated between nodes.
    InfConvolution {
        f: Box<FunctionExpr>,
        g: Box<FunctionExpr>,
        axes: Vec<Vec<f64>>,
    },
}

impl FunctionExpr {
    pub fn norm_power(p: f64) -> Self {
        FunctionExpr::NormPower { p, center: None }
    }

    pub fn constant(value: f64) -> Self {
        FunctionExpr::Constant { value }
    }

    pub fn indicator(region: Region) -> Self {
        FunctionExpr::Indicator { region }
    }

    pub fn sum(terms: Vec<FunctionExpr>) -> Self {
        FunctionExpr::Sum { terms }
    }

    pub fn product(factors: Vec<FunctionExpr>) -> Self {
        FunctionExpr::Product { factors }
    }

    pub fn scaled(self, factor: f64) -> Self {
        FunctionExpr::Scale { factor, of: Box::new(self) }
    }

    pub fn shifted(self, by: f64) -> Self {
        FunctionExpr::Shift { by, of: Box::new(self) }
    }

    pub fn restricted(self, region: Region) -> Self {
        FunctionExpr::Restrict { region, of: Box::new(self) }
    }

    pub fn declared(self, properties: Properties) -> Self {
        FunctionExpr::Declared { properties, of: Box::new(self) }
    }

    /// Short human-readable form, used as the oracle name.
    pub fn label(&self) -> String {
        let join = |xs: &[FunctionExpr]| xs.iter().map(FunctionExpr::label).collect::<Vec<_>>().join(", ");
        match self {
            FunctionExpr::Constant { value } => format!("constant({value})"),
            FunctionExpr::NormPower { p, center: None } => format!("norm_power({p})"),
            FunctionExpr::NormPower { p, center: Some(c) } => format!("norm_power({p}, {c:?})"),
            FunctionExpr::Affine { .. } => "affine".into(),
            FunctionExpr::Quadratic { .. } => "quadratic".into(),
            FunctionExpr::NonconvexTest => "nonconvex_test".into(),
            FunctionExpr::Barrier => "barrier".into(),
            FunctionExpr::SinRadial => "sin_radial".into(),
            FunctionExpr::Step { .. } => "step".into(),
            FunctionExpr::Spike { .. } => "spike".into(),
            FunctionExpr::Indicator { .. } => "indicator".into(),
            FunctionExpr::BoxDistance { .. } => "box_distance".into(),
            FunctionExpr::Sum { terms } => format!("sum({})", join(terms)),
            FunctionExpr::Product { factors } => format!("product({})", join(factors)),
            FunctionExpr::Scale { factor, of } => format!("{factor}*{}", of.label()),
            FunctionExpr::Shift { by, of } => format!("{}+{by}", of.label()),
            FunctionExpr::Restrict { of, .. } => format!("{}+indicator", of.label()),
            FunctionExpr::Declared { of, .. } => of.label(),
            FunctionExpr::Tabulated { .. } => "tabulated".into(),
            FunctionExpr::InfConvolution { f, g, .. } => format!("infconv({}, {})", f.label(), g.label()),
        }
    }

    /// The dimension fixed by the expression itself, if any.
    pub fn intrinsic_dim(&self) -> Option<usize> {
        match self {
            FunctionExpr::NormPower { center: Some(c), .. } => Some(c.len()),
            FunctionExpr::Affine { weights, .. } => Some(weights.len()),
            FunctionExpr::Quadratic { matrix, .. } => Some(matrix.len()),
            FunctionExpr::NonconvexTest => Some(2),
            FunctionExpr::Step { normal, .. } => Some(normal.len()),
            FunctionExpr::Spike { at, .. } => Some(at.len()),
            FunctionExpr::Indicator { region } => Some(region.dim()),
            FunctionExpr::BoxDistance { lower, .. } => Some(lower.len()),
            FunctionExpr::Restrict { region, .. } => Some(region.dim()),
            FunctionExpr::Tabulated { table, .. } => Some(table.dim()),
            FunctionExpr::InfConvolution { axes, .. } => Some(axes.len()),
            FunctionExpr::Sum { terms: xs } | FunctionExpr::Product { factors: xs } => {
                xs.iter().find_map(FunctionExpr::intrinsic_dim)
            }
            FunctionExpr::Scale { of, .. } | FunctionExpr::Shift { of, .. } | FunctionExpr::Declared { of, .. } => {
                of.intrinsic_dim()
            }
            _ => None,
        }
    }

    /// Builds the oracle on `R^dim`.
    pub fn build(&self, dim: usize) -> Result<FunctionOracle> {
        if dim == 0 {
            return Err(Error::invalid("dimension must be positive"));
        }
        if let Some(d) = self.intrinsic_dim() {
            check_dim(d, dim)?;
        }
        let name = self.label();
        let cont = Properties { continuous: true, ..Default::default() };
        let oracle = match self.clone() {
            FunctionExpr::Constant { value } => {
                finite_param(value, "constant value")?;
                let props = Properties { convex: true, continuous: true, lower_bound: Some(value), upper_bound: Some(value) };
                FunctionOracle::new(name, dim, props, move |_| ExtReal::Finite(value))
            }
            FunctionExpr::NormPower { p, center } => {
                if !(p > 0.0 && p.is_finite()) {
                    return Err(Error::invalid(format!("norm power needs p > 0, got {p}")));
                }
                let center = center.unwrap_or_else(|| vec![0.0; dim]);
                let props = Properties { convex: p >= 1.0, ..cont }.with_lower(0.0);
                FunctionOracle::new(name, dim, props, move |x| ExtReal::Finite(norm_pow(dist(x, &center), p)))
            }
            FunctionExpr::Affine { weights, offset } => {
                let props = Properties { convex: true, ..cont };
                FunctionOracle::new(name, dim, props, move |x| {
                    ExtReal::Finite(weights.iter().zip(x).map(|(w, v)| w * v).sum::<f64>() + offset)
                })
            }
            FunctionExpr::Quadratic { matrix, linear, constant } => {
                if matrix.iter().any(|row| row.len() != dim) {
                    return Err(Error::invalid("quadratic matrix must be square"));
                }
                let linear = linear.unwrap_or_else(|| vec![0.0; dim]);
                check_dim(dim, linear.len())?;
                let props = Properties { convex: is_psd(&matrix), ..cont };
                FunctionOracle::new(name, dim, props, move |x| {
                    let mut q = constant;
                    for (i, row) in matrix.iter().enumerate() {
                        q += linear[i] * x[i];
                        for (j, a) in row.iter().enumerate() {
                            q += x[i] * a * x[j];
                        }
                    }
                    ExtReal::Finite(q)
                })
            }
            FunctionExpr::NonconvexTest => FunctionOracle::new(name, dim, cont, |x| {
                let (a, b) = (x[0], x[1]);
                ExtReal::Finite(a * a + b * b + a * b * b * b)
            }),
            FunctionExpr::Barrier => {
                let props = Properties { convex: true, ..cont }.with_lower(1.0);
                FunctionOracle::new(name, dim, props, |x| {
                    let r = norm(x);
                    if r < 1.0 {
                        ExtReal::Finite(1.0 / (1.0 - r))
                    } else {
                        ExtReal::PosInf
                    }
                })
            }
            FunctionExpr::SinRadial => {
                let props = Properties::default().with_lower(-1.0).with_upper(1.0);
                FunctionOracle::new(name, dim, props, |x| {
                    let r = norm(x);
                    if r < 1.0 {
                        ExtReal::Finite((1.0 / (1.0 - r)).sin())
                    } else {
                        ExtReal::ZERO
                    }
                })
            }
            FunctionExpr::Step { normal, offset, below, above } => {
                let props = Properties::default().with_lower(below.min(above)).with_upper(below.max(above));
                FunctionOracle::new(name, dim, props, move |x| {
                    let s: f64 = normal.iter().zip(x).map(|(n, v)| n * v).sum();
                    ExtReal::Finite(if s <= offset { below } else { above })
                })
            }
            FunctionExpr::BoxDistance { lower, upper } => {
                check_dim(lower.len(), upper.len())?;
                if lower.iter().zip(&upper).any(|(l, u)| !(l <= u)) {
                    return Err(Error::invalid("box distance needs lower <= upper"));
                }
                let props = Properties { convex: true, ..cont }.with_lower(0.0);
                FunctionOracle::new(name, dim, props, move |x| {
                    let d2: f64 = x
                        .iter()
                        .zip(lower.iter().zip(&upper))
                        .map(|(v, (l, u))| (l - v).max(v - u).max(0.0).powi(2))
                        .sum();
                    ExtReal::Finite(d2.sqrt())
                })
            }
            FunctionExpr::Spike { at, value, base } => {
                let props = Properties::default().with_lower(value.min(base)).with_upper(value.max(base));
                FunctionOracle::new(name, dim, props, move |x| {
                    ExtReal::Finite(if x == at.as_slice() { value } else { base })
                })
            }
            FunctionExpr::Indicator { region } => indicator(&region).renamed(name),
            FunctionExpr::Sum { terms } => {
                let parts = build_all(&terms, dim)?;
                let props = sum_properties(parts.iter().map(FunctionOracle::properties));
                FunctionOracle::try_new(name, dim, props, move |x| {
                    let mut acc = ExtReal::ZERO;
                    for f in &parts {
                        acc = acc + f.eval(x)?;
                    }
                    Ok(acc)
                })
            }
            FunctionExpr::Product { factors } => {
                let parts = build_all(&factors, dim)?;
                let props = product_properties(parts.iter().map(FunctionOracle::properties));
                FunctionOracle::try_new(name, dim, props, move |x| {
                    let mut acc = ExtReal::Finite(1.0);
                    for f in &parts {
                        acc = acc.dom_mul(f.eval(x)?);
                    }
                    Ok(acc)
                })
            }
            FunctionExpr::Scale { factor, of } => {
                finite_param(factor, "scale factor")?;
                let inner = of.build(dim)?;
                let props = scale_properties(inner.properties(), factor);
                FunctionOracle::try_new(name, dim, props, move |x| inner.eval(x)?.scale(factor))
            }
            FunctionExpr::Shift { by, of } => {
                finite_param(by, "shift")?;
                let inner = of.build(dim)?;
                let p = *inner.properties();
                let props = Properties {
                    lower_bound: p.lower_bound.map(|m| m + by),
                    upper_bound: p.upper_bound.map(|m| m + by),
                    ..p
                };
                FunctionOracle::try_new(name, dim, props, move |x| Ok(inner.eval(x)? + by))
            }
            FunctionExpr::Restrict { region, of } => {
                let inner = of.build(dim)?;
                let p = *inner.properties();
                let props = Properties { convex: p.convex && region.declared_convex(), ..p };
                FunctionOracle::try_new(name, dim, props, move |x| {
                    if region.contains(x) {
                        inner.eval(x)
                    } else {
                        Ok(ExtReal::PosInf)
                    }
                })
            }
            FunctionExpr::Declared { properties, of } => of.build(dim)?.with_properties(properties),
            FunctionExpr::Tabulated { table, properties } => table.into_oracle(name, properties),
            FunctionExpr::InfConvolution { f, g, axes } => {
                let (fo, go) = (f.build(dim)?, g.build(dim)?);
                let lower = match (fo.properties().lower_bound, go.properties().lower_bound) {
                    (Some(a), Some(b)) => Some(a + b),
                    _ => None,
                };
                let props = Properties { lower_bound: lower, ..Default::default() };
                min_plus(&fo, &go, axes)?.into_oracle(name, props)
            }
        };
        Ok(oracle)
    }
}

fn finite_param(v: f64, what: &str) -> Result<()> {
    if v.is_finite() {
        Ok(())
    } else {
        Err(Error::invalid(format!("{what} must be finite, got {v}")))
    }
}

fn norm_pow(r: f64, p: f64) -> f64 {
    if p == 2.0 {
        r * r
    } else if p == 1.0 {
        r
    } else {
        r.powf(p)
    }
}

fn build_all(exprs: &[FunctionExpr], dim: usize) -> Result<Vec<FunctionOracle>> {
    if exprs.is_empty() {
        return Err(Error::invalid("composition needs at least one operand"));
    }
    exprs.iter().map(|e| e.build(dim)).collect()
}

fn opt_fold(xs: impl Iterator<Item = Option<f64>>, f: impl Fn(f64, f64) -> f64, init: f64) -> Option<f64> {
    let mut acc = init;
    for x in xs {
        acc = f(acc, x?);
    }
    Some(acc)
}

pub(crate) fn sum_properties<'a>(parts: impl Iterator<Item = &'a Properties> + Clone) -> Properties {
    Properties {
        convex: parts.clone().all(|p| p.convex),
        continuous: parts.clone().all(|p| p.continuous),
        lower_bound: opt_fold(parts.clone().map(|p| p.lower_bound), |a, b| a + b, 0.0),
        upper_bound: opt_fold(parts.map(|p| p.upper_bound), |a, b| a + b, 0.0),
    }
}

pub(crate) fn product_properties<'a>(parts: impl Iterator<Item = &'a Properties> + Clone) -> Properties {
    let n = parts.clone().count();
    let nonneg = parts.clone().all(|p| p.lower_bound.is_some_and(|m| m >= 0.0));
    Properties {
        convex: n == 1 && parts.clone().all(|p| p.convex),
        continuous: parts.clone().all(|p| p.continuous),
        lower_bound: if nonneg { opt_fold(parts.clone().map(|p| p.lower_bound), |a, b| a * b, 1.0) } else { None },
        upper_bound: if nonneg { opt_fold(parts.map(|p| p.upper_bound), |a, b| a * b, 1.0) } else { None },
    }
}

pub(crate) fn scale_properties(p: &Properties, factor: f64) -> Properties {
    if factor >= 0.0 {
        Properties {
            lower_bound: p.lower_bound.map(|m| factor * m),
            upper_bound: p.upper_bound.map(|m| factor * m),
            ..*p
        }
    } else {
        Properties {
            convex: false,
            continuous: p.continuous,
            lower_bound: p.upper_bound.map(|m| factor * m),
            upper_bound: p.lower_bound.map(|m| factor * m),
        }
    }
}

/// Positive semidefiniteness of the symmetric part, by Cholesky with a
/// small diagonal shift.
fn is_psd(a: &[Vec<f64>]) -> bool {
    let n = a.len();
    let scale = a.iter().flatten().fold(0.0f64, |m, v| m.max(v.abs())).max(1.0);
    let shift = 1e-12 * scale;
    let mut l = vec![vec![0.0; n]; n];
    for i in 0..n {
        for j in 0..=i {
            let sym = 0.5 * (a[i][j] + a[j][i]);
            let mut s = sym - (0..j).map(|k| l[i][k] * l[j][k]).sum::<f64>();
            if i == j {
                s += shift;
                if s <= 0.0 {
                    return false;
                }
                l[i][i] = s.sqrt();
            } else {
                l[i][j] = s / l[j][j];
            }
        }
    }
    true
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::ext::PosInf;
    use crate::sampling::{make_samples, Provenance};

    fn unit_interval() -> Region {
        Region::closed_box(vec![0.0], vec![1.0]).unwrap()
    }

    #[test]
    fn direct_values() {
        let sq = FunctionExpr::norm_power(2.0).build(2).unwrap();
        assert_eq!(sq.eval(&[0.0, 0.0]).unwrap(), ExtReal::ZERO);
        let chi = FunctionExpr::indicator(unit_interval()).build(1).unwrap();
        assert_eq!(chi.eval(&[2.0]).unwrap(), PosInf);
        let barrier = FunctionExpr::Barrier.build(2).unwrap();
        assert_eq!(barrier.eval(&[0.3, 0.4]).unwrap(), ExtReal::Finite(2.0));
        assert_eq!(barrier.eval(&[0.6, 0.8]).unwrap(), PosInf);
    }

    #[test]
    fn declared_properties_propagate() {
        let f = FunctionExpr::sum(vec![FunctionExpr::norm_power(2.0), FunctionExpr::constant(1.0)]);
        let p = *f.build(1).unwrap().properties();
        assert!(p.convex && p.continuous);
        assert_eq!(p.lower_bound, Some(1.0));
        let neg = FunctionExpr::norm_power(2.0).scaled(-1.0).build(1).unwrap();
        assert!(!neg.properties().convex);
        assert_eq!(neg.properties().upper_bound, Some(-0.0));
        let prod = FunctionExpr::product(vec![
            FunctionExpr::sum(vec![FunctionExpr::constant(1.0), FunctionExpr::norm_power(2.0)]),
            FunctionExpr::sum(vec![FunctionExpr::constant(1.0), FunctionExpr::NormPower { p: 2.0, center: Some(vec![3.0]) }]),
        ]);
        let p = *prod.build(1).unwrap().properties();
        assert!(!p.convex);
        assert_eq!(p.lower_bound, Some(1.0));
    }

    #[test]
    fn psd_detection() {
        assert!(is_psd(&[vec![2.0, 1.0], vec![1.0, 2.0]]));
        assert!(is_psd(&[vec![1.0, 0.0], vec![0.0, 0.0]]));
        assert!(!is_psd(&[vec![1.0, 2.0], vec![2.0, 1.0]]));
    }

    #[test]
    fn negative_scale_of_inf_is_an_error() {
        let f = FunctionExpr::indicator(unit_interval()).scaled(-1.0).build(1).unwrap();
        assert!(f.eval(&[0.5]).is_ok());
        assert!(matches!(f.eval(&[3.0]), Err(Error::UndefinedArithmetic(_))));
    }

    #[test]
    fn json_round_trip_rebuilds_identical_oracle() {
        let expr = FunctionExpr::sum(vec![FunctionExpr::NonconvexTest, FunctionExpr::norm_power(1.5).shifted(2.0)]);
        let text = serde_json::to_string(&expr).unwrap();
        let back: FunctionExpr = serde_json::from_str(&text).unwrap();
        assert_eq!(back, expr);
        let (f, g) = (expr.build(2).unwrap(), back.build(2).unwrap());
        for x in [[0.1, -0.7], [1.3, 2.2]] {
            assert_eq!(f.eval(&x).unwrap().to_f64().to_bits(), g.eval(&x).unwrap().to_f64().to_bits());
        }
    }

    #[test]
    fn box_distance_by_cases() {
        let d = FunctionExpr::BoxDistance { lower: vec![-1.0, 0.0], upper: vec![1.0, 2.0] }.build(2).unwrap();
        let at = |x: [f64; 2]| d.eval_finite(&x).unwrap();
        assert_eq!(at([0.5, 1.0]), 0.0);
        assert_eq!(at([3.0, 1.0]), 2.0);
        assert_eq!(at([0.0, -0.5]), 0.5);
        assert!((at([4.0, 6.0]) - 5.0).abs() < 1e-15);
    }

    #[test]
    fn wrong_dimension_is_rejected_at_build() {
        assert!(FunctionExpr::NonconvexTest.build(3).is_err());
        let err = serde_json::from_str::<FunctionExpr>(r#"{"name": "no_such_function"}"#).unwrap_err();
        assert!(err.to_string().contains("no_such_function"));
    }

    fn entries() -> Vec<(FunctionExpr, usize)> {
        let ball = Region::ball(vec![0.0, 0.0], 1.0, true).unwrap();
        vec![
            (FunctionExpr::constant(-2.0), 2),
            (FunctionExpr::norm_power(2.0), 2),
            (FunctionExpr::norm_power(0.5), 2),
            (FunctionExpr::Affine { weights: vec![1.0, -2.0], offset: 0.5 }, 2),
            (FunctionExpr::Quadratic { matrix: vec![vec![1.0, 0.0], vec![0.0, 3.0]], linear: None, constant: 0.0 }, 2),
            (FunctionExpr::NonconvexTest, 2),
            (FunctionExpr::Barrier, 2),
            (FunctionExpr::SinRadial, 2),
            (FunctionExpr::Step { normal: vec![1.0, 0.0], offset: 0.0, below: 1.0, above: 0.0 }, 2),
            (FunctionExpr::Spike { at: vec![0.0, 0.0], value: 1.0, base: 0.0 }, 2),
            (FunctionExpr::indicator(ball.clone()), 2),
            (FunctionExpr::BoxDistance { lower: vec![-1.0, 0.0], upper: vec![1.0, 0.5] }, 2),
            (FunctionExpr::NonconvexTest.restricted(ball), 2),
            (FunctionExpr::product(vec![FunctionExpr::Barrier, FunctionExpr::norm_power(1.0)]), 2),
        ]
    }

    #[test]
    fn every_entry_evaluates_and_domain_agrees_with_finiteness() {
        let pts = make_samples(&Provenance::LowDiscrepancy {
            lower: vec![-2.0, -2.0],
            upper: vec![2.0, 2.0],
            count: 10_000,
            seed: 11,
        })
        .unwrap();
        for (expr, dim) in entries() {
            let f = expr.build(dim).unwrap();
            for x in pts.points() {
                let v = f.eval(x).unwrap();
                assert_eq!(f.dom_contains(x).unwrap(), v.is_finite(), "{} at {x:?}", f.name());
            }
        }
    }
}
