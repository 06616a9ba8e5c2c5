//! Acceptance criteria 1-10, one line each. Runs the shipped specs through the
//! library and checks their reports against independent computations.

use std::path::{Path, PathBuf};
use std::process::ExitCode;
use std::time::{Duration, Instant};

use serde_json::Value;

use ruusc::relaxation::{energy_j, sample_constrained_fields, ConstraintSet, Integrand, Mesh};
use ruusc::ExtReal;
use ruusc_cli::spec::{Ctx, ProblemSpec};
use ruusc_cli::statements::{run, Outcome};
use ruusc_cli::{run_suite, RunSettings};

type Check = Result<String, String>;
type Criterion = (&'static str, fn() -> Check);

fn suite_dir() -> PathBuf {
    Path::new(env!("CARGO_MANIFEST_DIR")).join("suites")
}

fn load(id: &str) -> Result<ProblemSpec, String> {
    ProblemSpec::from_path(&suite_dir().join("specs").join(format!("{id}.json"))).map_err(|e| e.0)
}

fn outcome(id: &str) -> Result<(Outcome, Duration), String> {
    let spec = load(id)?;
    let start = Instant::now();
    let out = run(&spec.params, &Ctx { seed: spec.seed, scale: 1 });
    Ok((out, start.elapsed()))
}

fn report(id: &str) -> Result<(ruusc::TheoremReport, Value, Duration), String> {
    match outcome(id)? {
        (Outcome::Report { report, details }, dt) => Ok((report, details, dt)),
        (Outcome::Refused(m), _) => Err(format!("{id} refused: {m}")),
        (Outcome::Error(m), _) => Err(format!("{id} errored: {m}")),
    }
}

fn ensure(cond: bool, msg: impl FnOnce() -> String) -> Result<(), String> {
    if cond {
        Ok(())
    } else {
        Err(msg())
    }
}

fn within_budget(dt: Duration, secs: f64) -> Result<(), String> {
    ensure(dt.as_secs_f64() < secs, || format!("took {:.2} s, budget {secs} s", dt.as_secs_f64()))
}

fn finite(x: ExtReal) -> f64 {
    x.as_finite().unwrap_or(f64::INFINITY)
}

fn criterion_1() -> Check {
    let (r, details, dt) = report("c01_convex_bound")?;
    ensure(details["samples"] == 1000, || format!("{} samples", details["samples"]))?;
    ensure(r.rows.len() == 20, || format!("{} t values", r.rows.len()))?;
    for (k, row) in r.rows.iter().enumerate() {
        let t = 1.0 - 0.5f64.powi(k as i32 + 1);
        ensure(row.point[0] == t, || format!("t schedule entry {k} is {}", row.point[0]))?;
        let ratio = finite(row.lhs);
        ensure(ratio <= (1.0 - t) + 1e-12, || format!("ratio {ratio} > 1 - t at t = {t}"))?;
        // (t^2 - 1) r^2 / (1 + r^2) is at most 0, attained at the center sample.
        ensure(ratio == 0.0, || format!("sampled max {ratio} at t = {t}, expected 0"))?;
    }
    ensure(r.passed(), || "report failed".into())?;
    within_budget(dt, 1.0)?;
    Ok(format!("20 t-values x 1000 samples, max ratio 0, {:.0} ms", dt.as_secs_f64() * 1e3))
}

fn boundary_points(r: &ruusc::TheoremReport) -> Vec<Vec<f64>> {
    r.rows.iter().filter(|row| row.kind == "boundary").map(|row| row.point.clone()).collect()
}

fn criterion_2() -> Check {
    let (r, _, dt) = report("c02_radial_representation")?;
    let boundary: Vec<_> = r.rows.iter().filter(|row| row.kind == "boundary").collect();
    ensure(boundary.len() == 50, || format!("{} boundary samples", boundary.len()))?;
    let worst = boundary.iter().map(|row| finite(row.gap)).fold(0.0, f64::max);
    ensure(worst <= 1e-3, || format!("boundary gap {worst}"))?;
    ensure(r.resolutions.len() == 2 && r.resolutions[1].scale == 2 * r.resolutions[0].scale, || {
        format!("resolutions {:?}", r.resolutions)
    })?;
    ensure(r.converged == Some(true), || format!("max gap grew: {:?}", r.resolutions))?;
    ensure(r.passed(), || "report failed".into())?;
    within_budget(dt, 30.0)?;
    Ok(format!(
        "50 boundary samples, max gap {:.2e} (coarse {:.2e}), {:.2} s",
        worst,
        finite(r.resolutions[0].max_gap),
        dt.as_secs_f64()
    ))
}

fn criterion_3() -> Check {
    let (r, _, _) = report("c03_limit_exists")?;
    let (c2, _, _) = report("c02_radial_representation")?;
    let pts: Vec<_> = r.rows.iter().map(|row| row.point.clone()).collect();
    ensure(pts == boundary_points(&c2), || "samples differ from criterion 2".into())?;
    let worst = r.rows.iter().map(|row| finite(row.gap)).fold(0.0, f64::max);
    ensure(worst <= 1e-6, || format!("tail oscillation {worst}"))?;
    ensure(r.passed(), || "report failed".into())?;
    Ok(format!("50 samples, max tail oscillation {worst:.2e}"))
}

fn criterion_4() -> Check {
    let (r, _, _) = report("c04_inf_equality")?;
    let gap = finite(r.max_gap);
    ensure(gap <= 1e-6, || format!("|inf_D - inf_closure| = {gap}"))?;
    ensure(r.passed(), || "report failed".into())?;
    Ok(format!("inf gap {gap:.2e}"))
}

fn det_tr(m: &Value) -> (f64, f64) {
    let e = |i: usize, j: usize| m[i][j].as_f64().unwrap_or(f64::NAN);
    (e(0, 0) * e(1, 1) - e(0, 1) * e(1, 0), e(0, 0) + e(1, 1))
}

fn criterion_5() -> Check {
    let (r, details, dt) = report("c05_s_epsilon")?;
    let eps = 1.0;
    let member = |m: &Value| {
        let (d, t) = det_tr(m);
        eps + d > t * t
    };
    let w = &details["nonconvex_witness"];
    let (s15, s1) = (1.5f64.sqrt(), 1.0);
    let expected = [
        [[s15, -s1], [s1, 0.0]],
        [[0.0, s1], [-s1, s15]],
        [[s15 / 2.0, 0.0], [0.0, s15 / 2.0]],
    ];
    for (k, want) in expected.iter().enumerate() {
        for i in 0..2 {
            for j in 0..2 {
                let got = w[k][i][j].as_f64().unwrap_or(f64::NAN);
                ensure((got - want[i][j]).abs() < 1e-15, || format!("witness {k} entry ({i},{j}) = {got}"))?;
            }
        }
    }
    ensure(member(&w[0]) && member(&w[1]) && !member(&w[2]), || "witness membership".into())?;
    let radial = details["radial"]["checked"].as_u64().unwrap_or(0);
    ensure(radial >= 10_000 * 20, || format!("{radial} radial pairs"))?;
    ensure(details["radial"]["violations"] == 0, || "radial violations".into())?;
    let rank_one = details["rank_one_convex"]["checked"].as_u64().unwrap_or(0);
    ensure(rank_one >= 10_000, || format!("{rank_one} rank-one points"))?;
    ensure(details["rank_one_convex"]["violations"] == 0, || "rank-one violations".into())?;
    ensure(r.passed(), || "report failed".into())?;
    within_budget(dt, 5.0)?;
    Ok(format!("witnesses exact, {radial} radial pairs, {rank_one} rank-one points, no violations"))
}

fn criterion_6() -> Check {
    let (r, details, dt) = report("c06_j_ruusc")?;
    ensure(details["fields"] == 100, || format!("{} fields", details["fields"]))?;
    ensure(r.rows.len() == 300, || format!("{} rows", r.rows.len()))?;
    let mut worst = f64::NEG_INFINITY;
    for row in &r.rows {
        let t = row.point[1];
        ensure([0.9, 0.99, 0.999].contains(&t), || format!("unexpected t = {t}"))?;
        let ratio = finite(row.lhs);
        ensure(ratio <= 4.0 * (1.0 - t) + 1e-9, || format!("ratio {ratio} at t = {t}"))?;
        worst = worst.max(ratio - 4.0 * (1.0 - t));
    }
    ensure(r.passed(), || "report failed".into())?;
    within_budget(dt, 10.0)?;
    Ok(format!("100 fields x 3 t-values, max(ratio - 4(1-t)) = {worst:.3}"))
}

fn criterion_7() -> Check {
    let spec = load("c07_radial_equals_j")?;
    let (r, details, _) = report("c07_radial_equals_j")?;
    ensure(details["fields"] == 20, || format!("{} fields", details["fields"]))?;
    let extrapolated: Vec<_> = r.rows.iter().filter(|row| row.kind == "extrapolated").collect();
    ensure(extrapolated.len() == 20, || format!("{} extrapolated rows", extrapolated.len()))?;
    let worst = extrapolated.iter().map(|row| finite(row.gap)).fold(0.0, f64::max);
    ensure(worst <= 1e-6, || format!("extrapolation gap {worst}"))?;
    ensure(r.passed(), || "report failed (gaps not geometric or extrapolation off)".into())?;

    let raw: Value = serde_json::from_str(&std::fs::read_to_string(suite_dir().join("specs/c07_radial_equals_j.json")).unwrap())
        .map_err(|e| e.to_string())?;
    let p = &raw["params"];
    let l: Integrand = serde_json::from_value(p["integrand"].clone()).map_err(|e| e.to_string())?;
    let s: ConstraintSet = serde_json::from_value(p["constraint"].clone()).map_err(|e| e.to_string())?;
    let mesh: Mesh = serde_json::from_value(p["mesh"].clone()).map_err(|e| e.to_string())?;
    let f = &p["fields"];
    let fields = sample_constrained_fields(
        &s,
        mesh,
        f["count"].as_u64().unwrap_or(0) as usize,
        f["amplitude"].as_f64().unwrap_or(0.0),
        spec.seed.wrapping_add(f["seed"].as_u64().unwrap_or(0)),
    )
    .map_err(|e| e.to_string())?;
    let mut law = 0.0f64;
    for u in &fields {
        let ju = energy_j(u, &l);
        for k in 1..=40 {
            let t = 1.0 - 0.5f64.powi(k);
            law = law.max((energy_j(&u.scaled(t), &l) - t * t * ju).abs());
        }
    }
    ensure(law <= 1e-12, || format!("|J(tu) - t^2 J(u)| = {law}"))?;
    Ok(format!("20 fields, extrapolation gap {worst:.2e}, t^2 law error {law:.1e}"))
}

fn criterion_8() -> Check {
    let (r, details, _) = report("c08_inf_convolution_oracle")?;
    let h = details["spacing"].as_f64().unwrap_or(f64::NAN);
    ensure((h - 0.01).abs() < 1e-15, || format!("spacing {h}"))?;
    let n = 601;
    let nodes: Vec<f64> = (0..n).map(|i| -3.0 + 6.0 * i as f64 / (n - 1) as f64).collect();
    ensure(r.rows.len() == n, || format!("{} nodes", r.rows.len()))?;
    for (row, &x) in r.rows.iter().zip(&nodes) {
        ensure((row.point[0] - x).abs() < 1e-12, || format!("node {} vs {x}", row.point[0]))?;
    }
    // Brute force over the same node coordinates the grid uses.
    let nodes: Vec<f64> = r.rows.iter().map(|row| row.point[0]).collect();
    let mut sup = 0.0f64;
    for (row, &x) in r.rows.iter().zip(&nodes) {
        let mut best = f64::INFINITY;
        for &v in &nodes {
            if (-1.0..=1.0).contains(&v) {
                best = best.min((x - v).abs());
            }
        }
        let got = finite(row.lhs);
        ensure(got == best, || format!("min-plus {got} vs brute force {best} at {x}"))?;
        sup = sup.max((got - (x.abs() - 1.0).max(0.0)).abs());
    }
    ensure(sup <= h, || format!("sup error {sup} > h = {h}"))?;
    ensure(r.passed(), || "report failed".into())?;
    Ok(format!("{n} nodes, brute force exact, sup error {sup:.1e} <= h = {h}"))
}

fn criterion_9() -> Check {
    let mut summary = Vec::new();
    for op in ["translate", "scale", "add", "multiply", "inf_convolution"] {
        let (r, details, _) = report(&format!("c09_{op}"))?;
        let verdict = &details["fresh_certificate"]["verdict"];
        ensure(verdict == "supported", || format!("{op}: recertification {verdict}"))?;
        ensure(r.passed(), || format!("{op}: report failed"))?;
        let (refused, _) = outcome(&format!("c09_{op}_refused"))?;
        ensure(refused.exit_code() == 2, || format!("{op}: refusal spec gave exit {}", refused.exit_code()))?;
        summary.push(op);
    }
    Ok(format!("{} supported after recertification, each refusal exits 2", summary.join("/")))
}

fn criterion_10() -> Check {
    let suite = suite_dir().join("acceptance.json");
    let dirs = [tempfile::tempdir().map_err(|e| e.to_string())?, tempfile::tempdir().map_err(|e| e.to_string())?];
    for d in &dirs {
        let (res, err) = run_suite(&suite, RunSettings::default(), d.path()).map_err(|e| e.to_string())?;
        ensure(res.exit_code == 0, || format!("suite exit {} ({err:?})", res.exit_code))?;
    }
    let mut names: Vec<_> = std::fs::read_dir(dirs[0].path())
        .map_err(|e| e.to_string())?
        .filter_map(|e| e.ok().map(|e| e.file_name()))
        .filter(|n| n.to_string_lossy().ends_with(".csv"))
        .collect();
    names.sort();
    for n in &names {
        let read = |d: &tempfile::TempDir| std::fs::read(d.path().join(n)).map_err(|e| e.to_string());
        let (mut a, mut b) = (read(&dirs[0])?, read(&dirs[1])?);
        if n == "summary.csv" {
            (a, b) = (without_last_column(&a), without_last_column(&b));
        }
        ensure(a == b, || format!("{} differs between runs", n.to_string_lossy()))?;
    }
    Ok(format!("{} CSV files identical across two runs (summary runtime column excluded)", names.len()))
}

/// Drops the runtime column of `summary.csv`.
fn without_last_column(bytes: &[u8]) -> Vec<u8> {
    String::from_utf8_lossy(bytes)
        .lines()
        .map(|l| l.rsplit_once(',').map_or(l, |(head, _)| head).to_string() + "\n")
        .collect::<String>()
        .into_bytes()
}

fn main() -> ExitCode {
    let criteria: [Criterion; 10] = [
        ("convex modulus bound", criterion_1),
        ("envelope equals radial limit on the boundary", criterion_2),
        ("radial limits exist", criterion_3),
        ("inf over D equals inf over the closure", criterion_4),
        ("S_eps geometry", criterion_5),
        ("energy modulus bound", criterion_6),
        ("radial limit of J", criterion_7),
        ("inf-convolution oracle", criterion_8),
        ("calculus suite", criterion_9),
        ("reproducibility", criterion_10),
    ];
    let mut failed = 0;
    for (k, (name, check)) in criteria.iter().enumerate() {
        match check() {
            Ok(detail) => println!("criterion {:>2} PASS  {name}: {detail}", k + 1),
            Err(detail) => {
                failed += 1;
                println!("criterion {:>2} FAIL  {name}: {detail}", k + 1);
            }
        }
    }
    if failed == 0 {
        ExitCode::SUCCESS
    } else {
        println!("{failed} criteria failed");
        ExitCode::FAILURE
    }
}
