//! Values computed here by closed forms or brute force, independently of the
//! library routines they are compared against.

use ruusc::algebra::tabulate_inf_convolution;
use ruusc::relaxation::{energy_j, Integrand, Mesh, MeshField};
use ruusc::sampling::linspace;
use ruusc::*;

fn grid(lower: Vec<f64>, upper: Vec<f64>, resolution: usize) -> SampleSet {
    make_samples(&Provenance::UniformGrid { lower, upper, resolution }).unwrap()
}

#[test]
fn modulus_of_decreasing_affine_function() {
    // f(x) = -x on [-1, 1], u0 = 0: the ratio (1 - t) x / (a + |x|) peaks at x = 1.
    let region = Region::closed_box(vec![-1.0], vec![1.0]).unwrap();
    let f = FunctionExpr::Affine { weights: vec![-1.0], offset: 0.0 }.build(1).unwrap();
    let samples = grid(vec![-1.0], vec![1.0], 41);
    let ts = TSchedule::new(vec![0.0, 0.5, 0.9, 0.99]).unwrap();
    for a in [0.5, 1.0, 3.0] {
        let profile = modulus_profile(&f, &region, a, &ts, &samples, false).unwrap();
        for (t, d) in ts.values().iter().zip(&profile.delta) {
            let want = (1.0 - t) / (a + 1.0);
            assert!((d.to_f64() - want).abs() < 1e-14, "a = {a}, t = {t}");
        }
    }
}

#[test]
fn huber_inf_convolution() {
    // |x| inf-convolved with x^2 is x^2 for |x| <= 1/2 and |x| - 1/4 beyond.
    let abs = FunctionExpr::norm_power(1.0).build(1).unwrap();
    let sq = FunctionExpr::norm_power(2.0).build(1).unwrap();
    let nodes = grid(vec![-2.0], vec![2.0], 161);
    let h = 4.0 / 160.0;
    let table = tabulate_inf_convolution(&abs, &sq, &nodes).unwrap();
    for (x, v) in table.nodes().iter().zip(table.values()) {
        let x = x[0];
        let want = if x.abs() <= 0.5 { x * x } else { x.abs() - 0.25 };
        let got = v.to_f64();
        assert!(got >= want - 1e-12 && got <= want + h * h, "x = {x}: {got} vs {want}");
    }
}

#[test]
fn distance_to_a_square() {
    let norm = FunctionExpr::norm_power(1.0).build(2).unwrap();
    let square = Region::closed_box(vec![-1.0, -1.0], vec![1.0, 1.0]).unwrap();
    let nodes = grid(vec![-3.0, -3.0], vec![3.0, 3.0], 25);
    let table = tabulate_inf_convolution(&norm, &indicator(&square), &nodes).unwrap();
    for (x, v) in table.nodes().iter().zip(table.values()) {
        let want = x.iter().map(|c| (c.abs() - 1.0).max(0.0).powi(2)).sum::<f64>().sqrt();
        assert!((v.to_f64() - want).abs() < 1e-12, "{x:?}");
    }
    let q = table.lookup(&[0.1, 2.1]).unwrap();
    assert!(q.interpolated);
    assert!(!table.lookup(&[0.0, 2.0]).unwrap().interpolated);
}

#[test]
fn affine_field_energy_is_squared_norm() {
    let xi = [0.4, -0.3, 0.2, 0.1];
    let u = MeshField::affine(Mesh::new(2, 8).unwrap(), &xi).unwrap();
    let want: f64 = xi.iter().map(|v| v * v).sum();
    assert!((energy_j(&u, &Integrand::frobenius_squared()) - want).abs() < 1e-14);
    // piecewise affine in one dimension: slopes 2 on [0, 1/2] and 0 after
    let m = Mesh::new(1, 4).unwrap();
    let v = MeshField::from_fn(m, |x| vec![(2.0 * x[0]).min(1.0)]).unwrap();
    assert!((energy_j(&v, &Integrand::frobenius_squared()) - 2.0).abs() < 1e-14);
}

#[test]
fn envelope_of_step_matches_brute_force_minimum() {
    // below 0 for x <= 0, above 1: at the jump the envelope takes the lower value
    let f = FunctionExpr::Step { normal: vec![1.0], offset: 0.0, below: 0.0, above: 1.0 }.build(1).unwrap();
    let lower = FunctionExpr::Step { normal: vec![-1.0], offset: 0.0, below: 1.0, above: 0.0 }.build(1).unwrap();
    let params = EnvelopeParams::default();
    assert_eq!(lsc_envelope(&f, &[0.0], &params).unwrap().estimate, ExtReal::ZERO);
    // mirrored: 0 for x < 0 and 1 for x >= 0, again 0 at the jump
    assert_eq!(lsc_envelope(&lower, &[0.0], &params).unwrap().estimate, ExtReal::ZERO);
    let brute = linspace(-1e-3, 1e-3, 2001).into_iter().map(|x| lower.eval(&[x]).unwrap()).fold(ExtReal::PosInf, ExtReal::min);
    assert_eq!(brute, ExtReal::ZERO);
}

#[test]
fn radial_limit_of_squared_norm_plus_indicator() {
    let square = Region::open_box(vec![-1.0, -1.0], vec![1.0, 1.0]).unwrap();
    let f = FunctionExpr::norm_power(2.0).restricted(square.clone()).build(2).unwrap();
    let opts = RadialOptions::default();
    for u in [[1.0, 0.3], [-1.0, -1.0], [0.2, 1.0]] {
        let r = radial_extension(&f, square.center(), &u, &opts).unwrap();
        let want = u[0] * u[0] + u[1] * u[1];
        assert!(r.limit_exists);
        assert!((r.value().to_f64() - want).abs() < 1e-9);
    }
    assert!(radial_extension(&f, square.center(), &[1.5, 0.0], &opts).unwrap().value().is_inf());
}
