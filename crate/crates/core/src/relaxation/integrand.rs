use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::sampling::{dist, norm, unit_ball_points, unit_sphere_points, Point};

const SLACK: f64 = 1e-12;
/// Relative size of the nearby partner in the local Lipschitz pairs.
const LOCAL_STEP: f64 = 1e-3;

fn one() -> f64 {
    1.0
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "name", rename_all = "snake_case")]
pub enum IntegrandExpr {
    /// `weight |xi|^power + shift` with the Frobenius norm.
    FrobeniusPower {
        power: f64,
        #[serde(default = "one")]
        weight: f64,
        #[serde(default)]
        shift: f64,
    },
}

impl IntegrandExpr {
    pub fn eval(&self, xi: &[f64]) -> f64 {
        match self {
            IntegrandExpr::FrobeniusPower { power, weight, shift } => weight * norm(xi).powf(*power) + shift,
        }
    }
}

/// An integrand with its growth exponent `p` and declared constants:
/// `c |xi|^p <= L(xi) <= C (1 + |xi|^p)` and
/// `|L(xi) - L(zeta)| <= C' |xi - zeta| (1 + |xi|^(p-1) + |zeta|^(p-1))`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Integrand {
    pub expr: IntegrandExpr,
    pub p: f64,
    pub c: f64,
    #[serde(rename = "C")]
    pub c_upper: f64,
    #[serde(rename = "C_lip")]
    pub c_lip: f64,
}

impl Integrand {
    pub fn new(expr: IntegrandExpr, p: f64, c: f64, c_upper: f64, c_lip: f64) -> Result<Self> {
        if !(p > 1.0) {
            return Err(Error::invalid(format!("growth exponent p = {p} must exceed 1")));
        }
        if !(c > 0.0 && c_upper > 0.0 && c_lip > 0.0) {
            return Err(Error::invalid("growth and Lipschitz constants must be positive"));
        }
        Ok(Integrand { expr, p, c, c_upper, c_lip })
    }

    /// `|xi|^2` with `c = C = C' = 1`.
    pub fn frobenius_squared() -> Self {
        Integrand {
            expr: IntegrandExpr::FrobeniusPower { power: 2.0, weight: 1.0, shift: 0.0 },
            p: 2.0,
            c: 1.0,
            c_upper: 1.0,
            c_lip: 1.0,
        }
    }

    pub fn eval(&self, xi: &[f64]) -> f64 {
        self.expr.eval(xi)
    }

    /// `4 C' max{1, 1/c} (1 - t)`.
    pub fn modulus_bound(&self, t: f64) -> f64 {
        4.0 * self.c_lip * (1.0f64).max(1.0 / self.c) * (1.0 - t)
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct GrowthReport {
    /// `min L / |xi|^p` over nonzero samples.
    pub c_est: f64,
    /// `max L / (1 + |xi|^p)`.
    pub c_upper_est: f64,
    /// `max |L(xi) - L(zeta)| / (|xi - zeta| (1 + |xi|^(p-1) + |zeta|^(p-1)))`.
    pub c_lip_est: f64,
    pub pass: bool,
    /// Which inequality failed first, and where.
    pub witness: Option<(String, Point)>,
    pub samples: usize,
    pub pairs: usize,
}

/// Samples the ball of radius `radius` in `R^len` (interior and sphere) and
/// checks the declared constants of `l`.
pub fn check_growth_and_lipschitz(l: &Integrand, len: usize, count: usize, radius: f64, seed: u64) -> Result<GrowthReport> {
    if count == 0 || len == 0 {
        return Err(Error::EmptySamples("growth check".into()));
    }
    if !(radius > 0.0) {
        return Err(Error::invalid(format!("radius {radius} must be positive")));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let scale = |v: Vec<f64>| v.into_iter().map(|x| x * radius).collect::<Point>();
    let mut xs: Vec<Point> = unit_ball_points(len, count, seed, 0).into_iter().map(scale).collect();
    xs.extend(unit_sphere_points(len, count, &mut rng).into_iter().map(scale));
    xs.push(vec![0.0; len]);

    let p = l.p;
    let mut report = GrowthReport {
        c_est: f64::INFINITY,
        c_upper_est: 0.0,
        c_lip_est: 0.0,
        pass: true,
        witness: None,
        samples: xs.len(),
        pairs: 0,
    };
    let fail = |report: &mut GrowthReport, what: &str, x: &Point| {
        if report.pass {
            report.pass = false;
            report.witness = Some((what.to_string(), x.clone()));
        }
    };
    for x in &xs {
        let lx = l.eval(x);
        let np = norm(x).powf(p);
        if !lx.is_finite() || lx < 0.0 {
            fail(&mut report, "nonnegative", x);
            continue;
        }
        if np > 0.0 {
            report.c_est = report.c_est.min(lx / np);
        }
        report.c_upper_est = report.c_upper_est.max(lx / (1.0 + np));
        if l.c * np > lx + SLACK * lx.max(1.0) {
            fail(&mut report, "lower growth", x);
        }
        if lx > l.c_upper * (1.0 + np) + SLACK * lx.max(1.0) {
            fail(&mut report, "upper growth", x);
        }
    }
    let mut pairs: Vec<(Point, Point)> = xs.windows(2).map(|w| (w[0].clone(), w[1].clone())).collect();
    for x in &xs {
        let near: Point = x.iter().map(|v| v + LOCAL_STEP * radius * rng.random_range(-1.0..1.0)).collect();
        pairs.push((x.clone(), near));
    }
    for (x, z) in &pairs {
        let d = dist(x, z);
        if d == 0.0 {
            continue;
        }
        let lhs = (l.eval(x) - l.eval(z)).abs();
        let weight = d * (1.0 + norm(x).powf(p - 1.0) + norm(z).powf(p - 1.0));
        report.c_lip_est = report.c_lip_est.max(lhs / weight);
        if lhs > l.c_lip * weight + SLACK * lhs.max(1.0) {
            fail(&mut report, "lipschitz", x);
        }
        report.pairs += 1;
    }
    Ok(report)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn frob(power: f64, shift: f64) -> IntegrandExpr {
        IntegrandExpr::FrobeniusPower { power, weight: 1.0, shift }
    }

    #[test]
    fn squared_norm_constants() {
        let r = check_growth_and_lipschitz(&Integrand::frobenius_squared(), 4, 2000, 10.0, 1).unwrap();
        assert!(r.pass, "{r:?}");
        assert!((r.c_est - 1.0).abs() < 1e-12);
        assert!(r.c_upper_est < 1.0 && r.c_upper_est > 0.99);
        assert!(r.c_lip_est <= 1.0);
    }

    #[test]
    fn shifted_square_with_c_two() {
        let l = Integrand::new(frob(2.0, 1.0), 2.0, 1.0, 2.0, 1.0).unwrap();
        assert!(check_growth_and_lipschitz(&l, 4, 1000, 10.0, 2).unwrap().pass);
    }

    #[test]
    fn cubic_violates_quadratic_growth() {
        let l = Integrand::new(frob(3.0, 0.0), 2.0, 1e-3, 1.0, 1.0).unwrap();
        let r = check_growth_and_lipschitz(&l, 4, 1000, 10.0, 3).unwrap();
        assert!(!r.pass);
        let (what, x) = r.witness.unwrap();
        assert_eq!(what, "upper growth");
        assert!(l.eval(&x) > 1.0 + norm(&x).powi(2));
        assert!(r.c_upper_est > 1.0);
    }

    #[test]
    fn rejects_bad_constants() {
        assert!(Integrand::new(frob(2.0, 0.0), 1.0, 1.0, 1.0, 1.0).is_err());
        assert!(Integrand::new(frob(2.0, 0.0), 2.0, 0.0, 1.0, 1.0).is_err());
    }

    #[test]
    fn modulus_bound_formula() {
        let l = Integrand::new(frob(2.0, 0.0), 2.0, 0.5, 1.0, 3.0).unwrap();
        assert!((l.modulus_bound(0.9) - 4.0 * 3.0 * 2.0 * 0.1).abs() < 1e-12);
    }
}
