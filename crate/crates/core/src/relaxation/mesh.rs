use std::io::Write;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::constraint::ConstraintSet;
use super::integrand::Integrand;
use crate::error::{check_dim, Error, Result};
use crate::modulus::{csv_err, fmt_f64};

/// Minimum acceptance rate of the rejection sampler.
const MIN_ACCEPTANCE: f64 = 0.01;

/// A uniform mesh of `]0,1[` (segments) or `]0,1[^2` (each square split into
/// two triangles along its rising diagonal). Fields on it are continuous and
/// affine on every cell, so cell gradients are exact.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct Mesh {
    pub dim: usize,
    /// Cells per axis.
    pub n: usize,
}

impl Mesh {
    pub fn new(dim: usize, n: usize) -> Result<Self> {
        if !(1..=2).contains(&dim) || n == 0 {
            return Err(Error::invalid(format!("mesh must be 1-D or 2-D with n > 0, got dim {dim}, n {n}")));
        }
        Ok(Mesh { dim, n })
    }

    pub fn h(&self) -> f64 {
        1.0 / self.n as f64
    }

    pub fn node_count(&self) -> usize {
        (self.n + 1).pow(self.dim as u32)
    }

    pub fn cell_count(&self) -> usize {
        if self.dim == 1 {
            self.n
        } else {
            2 * self.n * self.n
        }
    }

    pub fn cell_measure(&self) -> f64 {
        if self.dim == 1 {
            self.h()
        } else {
            self.h() * self.h() / 2.0
        }
    }

    /// Length of a flattened gradient: `m d` with `m = d = dim`.
    pub fn gradient_len(&self) -> usize {
        self.dim * self.dim
    }

    /// Node coordinates; in 2-D node `(ix, iy)` has index `iy (n+1) + ix`.
    pub fn node(&self, k: usize) -> Vec<f64> {
        let h = self.h();
        if self.dim == 1 {
            vec![k as f64 * h]
        } else {
            vec![(k % (self.n + 1)) as f64 * h, (k / (self.n + 1)) as f64 * h]
        }
    }

    pub fn on_boundary(&self, k: usize) -> bool {
        let n = self.n;
        if self.dim == 1 {
            k == 0 || k == n
        } else {
            let (ix, iy) = (k % (n + 1), k / (n + 1));
            ix == 0 || iy == 0 || ix == n || iy == n
        }
    }
}

/// Nodal values of `u: ]0,1[^d -> R^m` with `m = d`, node-major.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct MeshField {
    pub mesh: Mesh,
    pub values: Vec<f64>,
}

impl MeshField {
    pub fn new(mesh: Mesh, values: Vec<f64>) -> Result<Self> {
        check_dim(mesh.node_count() * mesh.dim, values.len())?;
        if values.iter().any(|v| !v.is_finite()) {
            return Err(Error::invalid("field values must be finite"));
        }
        Ok(MeshField { mesh, values })
    }

    pub fn zero(mesh: Mesh) -> Self {
        MeshField { mesh, values: vec![0.0; mesh.node_count() * mesh.dim] }
    }

    /// Interpolates `u` at the nodes.
    pub fn from_fn(mesh: Mesh, u: impl Fn(&[f64]) -> Vec<f64>) -> Result<Self> {
        let mut values = Vec::with_capacity(mesh.node_count() * mesh.dim);
        for k in 0..mesh.node_count() {
            let v = u(&mesh.node(k));
            check_dim(mesh.dim, v.len())?;
            values.extend(v);
        }
        MeshField::new(mesh, values)
    }

    /// The affine field `x -> xi x` (flattened row-major `xi`).
    pub fn affine(mesh: Mesh, xi: &[f64]) -> Result<Self> {
        check_dim(mesh.gradient_len(), xi.len())?;
        let d = mesh.dim;
        MeshField::from_fn(mesh, |x| (0..d).map(|i| (0..d).map(|j| xi[i * d + j] * x[j]).sum()).collect())
    }

    pub fn scaled(&self, t: f64) -> Self {
        MeshField { mesh: self.mesh, values: self.values.iter().map(|v| t * v).collect() }
    }

    fn at(&self, node: usize, comp: usize) -> f64 {
        self.values[node * self.mesh.dim + comp]
    }

    /// One flattened gradient per cell (row `i` holds the derivatives of
    /// component `i`). In 2-D, square `(ix, iy)` contributes its lower
    /// triangle and then its upper triangle.
    pub fn cell_gradients(&self) -> Vec<Vec<f64>> {
        let (n, h) = (self.mesh.n, self.mesh.h());
        if self.mesh.dim == 1 {
            return (0..n).map(|i| vec![(self.at(i + 1, 0) - self.at(i, 0)) / h]).collect();
        }
        let idx = |ix: usize, iy: usize| iy * (n + 1) + ix;
        let mut out = Vec::with_capacity(2 * n * n);
        for iy in 0..n {
            for ix in 0..n {
                let (p00, p10, p01, p11) = (idx(ix, iy), idx(ix + 1, iy), idx(ix, iy + 1), idx(ix + 1, iy + 1));
                let mut lower = Vec::with_capacity(4);
                let mut upper = Vec::with_capacity(4);
                for c in 0..2 {
                    lower.push((self.at(p10, c) - self.at(p00, c)) / h);
                    lower.push((self.at(p11, c) - self.at(p10, c)) / h);
                    upper.push((self.at(p11, c) - self.at(p01, c)) / h);
                    upper.push((self.at(p01, c) - self.at(p00, c)) / h);
                }
                out.push(lower);
                out.push(upper);
            }
        }
        out
    }

    /// Every cell gradient lies in `s`.
    pub fn admissible(&self, s: &ConstraintSet) -> Result<bool> {
        for g in self.cell_gradients() {
            if !s.contains(&g)? {
                return Ok(false);
            }
        }
        Ok(true)
    }

    /// Every cell gradient lies in the closure of `s` (up to `tol`).
    pub fn closure_admissible(&self, s: &ConstraintSet, tol: f64) -> Result<bool> {
        for g in self.cell_gradients() {
            if !s.closure_contains(&g, tol)? {
                return Ok(false);
            }
        }
        Ok(true)
    }

    pub fn vanishes_on_boundary(&self) -> bool {
        (0..self.mesh.node_count())
            .filter(|&k| self.mesh.on_boundary(k))
            .all(|k| (0..self.mesh.dim).all(|c| self.at(k, c) == 0.0))
    }

    /// CSV columns `x0[, x1], u0[, u1]`.
    pub fn write_csv<W: Write>(&self, w: W) -> Result<()> {
        let mut out = csv::Writer::from_writer(w);
        let d = self.mesh.dim;
        let mut header: Vec<String> = (0..d).map(|i| format!("x{i}")).collect();
        header.extend((0..d).map(|i| format!("u{i}")));
        out.write_record(&header).map_err(csv_err)?;
        for k in 0..self.mesh.node_count() {
            let mut row: Vec<String> = self.mesh.node(k).into_iter().map(fmt_f64).collect();
            row.extend((0..d).map(|c| fmt_f64(self.at(k, c))));
            out.write_record(&row).map_err(csv_err)?;
        }
        out.flush().map_err(|e| Error::invalid(e.to_string()))
    }
}

/// `J(u) = sum over cells of L(grad u) |cell|`.
pub fn energy_j(u: &MeshField, l: &Integrand) -> f64 {
    let m = u.mesh.cell_measure();
    u.cell_gradients().iter().map(|g| l.eval(g) * m).sum()
}

fn random_field(mesh: Mesh, amplitude: f64, rng: &mut ChaCha8Rng, pinned: bool) -> MeshField {
    let d = mesh.dim;
    let xi: Vec<f64> = (0..d * d).map(|_| rng.random_range(-amplitude..=amplitude)).collect();
    let noise = amplitude * mesh.h() / 2.0;
    let mut values = Vec::with_capacity(mesh.node_count() * d);
    for k in 0..mesh.node_count() {
        let x = mesh.node(k);
        for i in 0..d {
            let v = if pinned {
                if mesh.on_boundary(k) {
                    0.0
                } else {
                    rng.random_range(-amplitude..=amplitude) * mesh.h()
                }
            } else {
                (0..d).map(|j| xi[i * d + j] * x[j]).sum::<f64>() + rng.random_range(-noise..=noise)
            };
            values.push(v);
        }
    }
    MeshField { mesh, values }
}

fn attempt_rng(seed: u64, k: u64) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(k);
    rng
}

/// Rejection-samples `count` fields (the zero field first) whose every cell
/// gradient lies in `s`. A field is a random affine map of slope up to
/// `amplitude` plus nodal noise of size `amplitude h / 2`.
pub fn sample_constrained_fields(
    s: &ConstraintSet,
    mesh: Mesh,
    count: usize,
    amplitude: f64,
    seed: u64,
) -> Result<Vec<MeshField>> {
    if let Some(len) = s.gradient_len() {
        check_dim(len, mesh.gradient_len())?;
    }
    let zero = MeshField::zero(mesh);
    if !zero.admissible(s)? {
        return Err(Error::refused(format!("the zero field is not admissible for {}", s.label())));
    }
    if !(amplitude >= 0.0) || !amplitude.is_finite() {
        return Err(Error::invalid(format!("amplitude {amplitude} must be a nonnegative real")));
    }
    let mut out = vec![zero];
    if count <= 1 {
        out.truncate(count);
        return Ok(out);
    }
    let need = count - 1;
    let max_attempts = ((need as f64 / MIN_ACCEPTANCE).ceil() as usize).max(100);
    let batch = need.max(32);
    let mut tried = 0usize;
    while out.len() < count && tried < max_attempts {
        let hi = (tried + batch).min(max_attempts);
        let accepted: Vec<MeshField> = (tried..hi)
            .into_par_iter()
            .map(|k| {
                let f = random_field(mesh, amplitude, &mut attempt_rng(seed, k as u64), false);
                f.admissible(s).map(|ok| ok.then_some(f))
            })
            .collect::<Result<Vec<_>>>()?
            .into_iter()
            .flatten()
            .collect();
        out.extend(accepted);
        tried = hi;
    }
    if out.len() < count {
        return Err(Error::Sampling(format!(
            "only {} of {need} fields accepted in {tried} attempts for {}; use a smaller amplitude",
            out.len() - 1,
            s.label()
        )));
    }
    out.truncate(count);
    Ok(out)
}

/// Random fields vanishing on the boundary, with interior nodal values of
/// size up to `amplitude h`.
pub fn sample_perturbations(mesh: Mesh, count: usize, amplitude: f64, seed: u64) -> Vec<MeshField> {
    (0..count)
        .into_par_iter()
        .map(|k| random_field(mesh, amplitude, &mut attempt_rng(seed, k as u64), true))
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;

    fn squared() -> Integrand {
        Integrand::frobenius_squared()
    }

    #[test]
    fn mesh_counts() {
        let m = Mesh::new(2, 4).unwrap();
        assert_eq!(m.node_count(), 25);
        assert_eq!(m.cell_count(), 32);
        assert!((m.cell_measure() * m.cell_count() as f64 - 1.0).abs() < 1e-15);
        assert!(Mesh::new(3, 4).is_err());
        assert!(m.on_boundary(0) && !m.on_boundary(6));
    }

    #[test]
    fn constant_and_identity_energies() {
        let m1 = Mesh::new(1, 16).unwrap();
        let c = MeshField::from_fn(m1, |_| vec![3.0]).unwrap();
        assert_eq!(energy_j(&c, &squared()), 0.0);
        let id = MeshField::from_fn(m1, |x| vec![x[0]]).unwrap();
        assert!((energy_j(&id, &squared()) - 1.0).abs() < 1e-12);
        let m2 = Mesh::new(2, 8).unwrap();
        let xi = [0.3, -1.0, 2.0, 0.5];
        let a = MeshField::affine(m2, &xi).unwrap();
        for g in a.cell_gradients() {
            for (x, y) in g.iter().zip(&xi) {
                assert!((x - y).abs() < 1e-12);
            }
        }
    }

    /// P1 interpolation written independently of `cell_gradients`.
    fn interp(u: &MeshField, x: f64, y: f64, comp: usize) -> f64 {
        let n = u.mesh.n;
        let (sx, sy) = (x * n as f64, y * n as f64);
        let (ix, iy) = ((sx.floor() as usize).min(n - 1), (sy.floor() as usize).min(n - 1));
        let (lx, ly) = (sx - ix as f64, sy - iy as f64);
        let v = |i: usize, j: usize| u.values[((iy + j) * (n + 1) + ix + i) * 2 + comp];
        if lx >= ly {
            v(0, 0) + lx * (v(1, 0) - v(0, 0)) + ly * (v(1, 1) - v(1, 0))
        } else {
            v(0, 0) + ly * (v(0, 1) - v(0, 0)) + lx * (v(1, 1) - v(0, 1))
        }
    }

    /// Sub-cell midpoint quadrature with gradients by one-sided differences
    /// taken inside the owning triangle.
    fn dense_energy(u: &MeshField, l: &Integrand, k: usize) -> f64 {
        let n = u.mesh.n;
        let h = u.mesh.h();
        let w = h * h / (k * k) as f64;
        let step = 1e-3 * h / k as f64;
        let mut total = 0.0;
        for iy in 0..n {
            for ix in 0..n {
                for a in 0..k {
                    for b in 0..k {
                        let (lx, ly) = ((a as f64 + 0.5) / k as f64, (b as f64 + 0.5) / k as f64);
                        let sides: &[(bool, f64)] = if a == b { &[(true, 0.5), (false, 0.5)] } else { &[(a > b, 1.0)] };
                        for &(lower, frac) in sides {
                            let (x, y) = ((ix as f64 + lx) * h, (iy as f64 + ly) * h);
                            let (x, y) = if lower { (x + step, y - step) } else { (x - step, y + step) };
                            let (dx, dy) = if lower { (step, -step) } else { (-step, step) };
                            let mut g = Vec::with_capacity(4);
                            for c in 0..2 {
                                let f0 = interp(u, x, y, c);
                                g.push((interp(u, x + dx, y, c) - f0) / dx);
                                g.push((interp(u, x, y + dy, c) - f0) / dy);
                            }
                            total += frac * w * l.eval(&g);
                        }
                    }
                }
            }
        }
        total
    }

    #[test]
    fn energy_matches_dense_quadrature() {
        let mesh = Mesh::new(2, 6).unwrap();
        let s = ConstraintSet::s_epsilon(1.0).unwrap();
        let fields = sample_constrained_fields(&s, mesh, 4, 0.3, 5).unwrap();
        for u in &fields {
            let (j, oracle) = (energy_j(u, &squared()), dense_energy(u, &squared(), 8));
            assert!((j - oracle).abs() < 1e-10 * j.max(1.0), "{j} vs {oracle}");
        }
    }

    #[test]
    fn sampled_fields_are_admissible() {
        let ball = ConstraintSet::Ball { radius: 1.0 };
        let fields = sample_constrained_fields(&ball, Mesh::new(2, 4).unwrap(), 20, 0.2, 1).unwrap();
        assert_eq!(fields.len(), 20);
        assert_eq!(fields[0], MeshField::zero(Mesh::new(2, 4).unwrap()));
        let s = ConstraintSet::s_epsilon(1.0).unwrap();
        let fields = sample_constrained_fields(&s, Mesh::new(2, 8).unwrap(), 20, 0.3, 2).unwrap();
        for f in &fields {
            for g in f.cell_gradients() {
                let m = super::super::matrix::Matrix2x2::from_slice(&g).unwrap();
                assert!(super::super::constraint::s_epsilon_contains(&m, 1.0).unwrap());
            }
        }
        assert!(fields[1..].iter().any(|f| f.values.iter().any(|v| *v != 0.0)));
        let again = sample_constrained_fields(&s, Mesh::new(2, 8).unwrap(), 20, 0.3, 2).unwrap();
        assert_eq!(fields, again);
    }

    #[test]
    fn huge_amplitude_starves() {
        let s = ConstraintSet::s_epsilon(1.0).unwrap();
        let err = sample_constrained_fields(&s, Mesh::new(2, 8).unwrap(), 10, 100.0, 3).unwrap_err();
        assert!(matches!(err, Error::Sampling(_)));
        assert!(sample_constrained_fields(&s, Mesh::new(1, 8).unwrap(), 10, 0.1, 3).is_err());
    }

    #[test]
    fn perturbations_are_pinned() {
        for f in sample_perturbations(Mesh::new(2, 5).unwrap(), 10, 1.0, 4) {
            assert!(f.vanishes_on_boundary());
        }
    }

    #[test]
    fn csv_has_one_row_per_node() {
        let f = MeshField::affine(Mesh::new(1, 2).unwrap(), &[2.0]).unwrap();
        let mut buf = Vec::new();
        f.write_csv(&mut buf).unwrap();
        assert_eq!(String::from_utf8(buf).unwrap(), "x0,u0\n0e0,0e0\n5e-1,1e0\n1e0,2e0\n");
    }
}
