use std::f64::consts::PI;
use std::fmt::Write as _;
use std::sync::Arc;

use super::map::{Domain, SmoothMap, NEAR_ZERO_FLOOR};
use crate::error::{Error, Result};
use crate::geometry::{SphereLayout, SphereMesh};
use crate::linalg::{angle_between, norm};

/// Where the values of a [`GridMap`] live.
#[derive(Debug, Clone)]
pub enum GridSupport {
    /// Nodes of a sphere mesh (barycentric on S^2, linear on S^1,
    /// multilinear in Hopf coordinates on S^3).
    Sphere(Arc<SphereMesh>),
    /// The polar midpoint grid of the unit disk: `nr` radii by `nt`
    /// angles, radius-major (bilinear in polar cells).
    Polar { nr: usize, nt: usize },
}

/// Map values tabulated on a mesh plus an interpolation rule.
#[derive(Debug, Clone)]
pub struct GridMap {
    support: GridSupport,
    arity_out: usize,
    values: Vec<f64>,
    sphere_valued: bool,
}

fn polar_node(nr: usize, nt: usize, i: usize) -> [f64; 2] {
    let (ir, it) = (i / nt, i % nt);
    let r = (ir as f64 + 0.5) / nr as f64;
    let (s, c) = ((it as f64 + 0.5) * 2.0 * PI / nt as f64).sin_cos();
    [r * c, r * s]
}

/// Periodic cell lookup for midpoint samples `(j + 1/2) 2pi / n`.
fn periodic_cell(angle: f64, n: usize) -> (usize, usize, f64) {
    let pos = angle.rem_euclid(2.0 * PI) / (2.0 * PI) * n as f64 - 0.5;
    let fl = pos.floor();
    let i0 = (fl as i64).rem_euclid(n as i64) as usize;
    (i0, (i0 + 1) % n, pos - fl)
}

/// Clamped cell lookup for midpoint samples `(j + 1/2) / n` of `[0, 1]`.
fn clamped_cell(u: f64, n: usize) -> (usize, usize, f64) {
    let pos = (u * n as f64 - 0.5).clamp(0.0, (n - 1) as f64);
    let i0 = (pos.floor() as usize).min(n.saturating_sub(2));
    let i1 = (i0 + 1).min(n - 1);
    (i0, i1, pos - i0 as f64)
}

impl GridMap {
    pub fn from_values(
        support: GridSupport,
        arity_out: usize,
        values: Vec<f64>,
        sphere_valued: bool,
    ) -> Result<Self> {
        let len = match &support {
            GridSupport::Sphere(m) => m.len(),
            GridSupport::Polar { nr, nt } => nr * nt,
        };
        if values.len() != len * arity_out {
            return Err(Error::ArityMismatch {
                expected: len * arity_out,
                found: values.len(),
            });
        }
        Ok(Self {
            support,
            arity_out,
            values,
            sphere_valued,
        })
    }

    /// Samples `m` at the nodes of a sphere mesh.
    pub fn tabulate(m: &dyn SmoothMap, mesh: Arc<SphereMesh>) -> Result<Self> {
        if m.arity_in() != mesh.ambient_dim() {
            return Err(Error::ArityMismatch {
                expected: mesh.ambient_dim(),
                found: m.arity_in(),
            });
        }
        let rows = crate::par::try_map(0..mesh.len(), |i| m.eval(mesh.node(i)))?;
        let values = rows.concat();
        Self::from_values(GridSupport::Sphere(mesh), m.arity_out(), values, m.sphere_valued())
    }

    /// Samples a map on D^2 at the polar midpoint grid.
    pub fn tabulate_disk(m: &dyn SmoothMap, nr: usize, nt: usize) -> Result<Self> {
        if m.arity_in() != 2 {
            return Err(Error::ArityMismatch {
                expected: 2,
                found: m.arity_in(),
            });
        }
        let rows = crate::par::try_map(0..nr * nt, |i| m.eval(&polar_node(nr, nt, i)))?;
        Self::from_values(
            GridSupport::Polar { nr, nt },
            m.arity_out(),
            rows.concat(),
            m.sphere_valued(),
        )
    }

    pub fn support(&self) -> &GridSupport {
        &self.support
    }

    pub fn len(&self) -> usize {
        self.values.len() / self.arity_out
    }

    pub fn is_empty(&self) -> bool {
        self.values.is_empty()
    }

    pub fn node(&self, i: usize) -> Vec<f64> {
        match &self.support {
            GridSupport::Sphere(m) => m.node(i).to_vec(),
            GridSupport::Polar { nr, nt } => polar_node(*nr, *nt, i).to_vec(),
        }
    }

    pub fn value(&self, i: usize) -> &[f64] {
        &self.values[i * self.arity_out..(i + 1) * self.arity_out]
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    fn accumulate(&self, out: &mut [f64], node: usize, weight: f64) {
        for (o, v) in out.iter_mut().zip(self.value(node)) {
            *o += weight * v;
        }
    }

    fn interpolate(&self, x: &[f64], out: &mut [f64]) -> Result<()> {
        out.iter_mut().for_each(|o| *o = 0.0);
        match &self.support {
            GridSupport::Polar { nr, nt } => {
                let r = x[0].hypot(x[1]);
                let (r0, r1, fr) = clamped_cell(r, *nr);
                let (t0, t1, ft) = periodic_cell(x[1].atan2(x[0]), *nt);
                self.accumulate(out, r0 * nt + t0, (1.0 - fr) * (1.0 - ft));
                self.accumulate(out, r0 * nt + t1, (1.0 - fr) * ft);
                self.accumulate(out, r1 * nt + t0, fr * (1.0 - ft));
                self.accumulate(out, r1 * nt + t1, fr * ft);
            }
            GridSupport::Sphere(mesh) => match &mesh.layout {
                SphereLayout::Circle { n } => {
                    let (i0, i1, f) = periodic_cell(x[1].atan2(x[0]), *n);
                    self.accumulate(out, i0, 1.0 - f);
                    self.accumulate(out, i1, f);
                }
                SphereLayout::Hopf { n_u, n_xi } => {
                    let (nu, nx) = (*n_u, *n_xi);
                    let r = norm(x);
                    let u = (x[2] * x[2] + x[3] * x[3]) / (r * r);
                    let (u0, u1, fu) = clamped_cell(u, nu);
                    let (a0, a1, fa) = periodic_cell(x[1].atan2(x[0]), nx);
                    let (b0, b1, fb) = periodic_cell(x[3].atan2(x[2]), nx);
                    for (iu, wu) in [(u0, 1.0 - fu), (u1, fu)] {
                        for (ia, wa) in [(a0, 1.0 - fa), (a1, fa)] {
                            for (ib, wb) in [(b0, 1.0 - fb), (b1, fb)] {
                                self.accumulate(out, (ia * nx + ib) * nu + iu, wu * wa * wb);
                            }
                        }
                    }
                }
                SphereLayout::Icosphere { frequency, base } => {
                    let k = *frequency;
                    let (face, lam) = base
                        .faces
                        .iter()
                        .enumerate()
                        .map(|(fi, f)| {
                            let lam = solve3(
                                &base.vertices[f[0]],
                                &base.vertices[f[1]],
                                &base.vertices[f[2]],
                                x,
                            );
                            (fi, lam)
                        })
                        .max_by(|a, b| {
                            let ma = a.1[0].min(a.1[1]).min(a.1[2]);
                            let mb = b.1[0].min(b.1[1]).min(b.1[2]);
                            ma.total_cmp(&mb).then(b.0.cmp(&a.0))
                        })
                        .expect("icosahedron has faces");
                    let sum = lam[0] + lam[1] + lam[2];
                    let s = (lam[1] / sum * k as f64).clamp(0.0, k as f64);
                    let t = (lam[2] / sum * k as f64).clamp(0.0, k as f64 - s);
                    let i0 = (s.floor() as usize).min(k - 1);
                    let j0 = (t.floor() as usize).min(k - 1 - i0);
                    let (fs, ft) = (s - i0 as f64, t - j0 as f64);
                    let grid = &base.face_grid[face];
                    let at = |i: usize, j: usize| grid[i * (k + 1) + j];
                    let tri = if fs + ft <= 1.0 || i0 + j0 + 1 >= k {
                        [at(i0, j0), at(i0 + 1, j0), at(i0, j0 + 1)]
                    } else {
                        [at(i0 + 1, j0), at(i0 + 1, j0 + 1), at(i0, j0 + 1)]
                    };
                    let mu = solve3(mesh.node(tri[0]), mesh.node(tri[1]), mesh.node(tri[2]), x);
                    let total = mu[0] + mu[1] + mu[2];
                    for (node, w) in tri.iter().zip(mu) {
                        self.accumulate(out, *node, w / total);
                    }
                }
            },
        }
        if self.sphere_valued {
            let n = norm(out);
            if !(n > 0.0) {
                return Err(Error::NotSphereValued {
                    point: x.to_vec(),
                    norm: n,
                });
            }
            out.iter_mut().for_each(|o| *o /= n);
        }
        Ok(())
    }

    /// Kernel smoothing with `(1 - (d/w)^2)^2` in geodesic distance `d`,
    /// normalised to unit mass over the mesh.
    pub fn mollify(&self, width: f64) -> Result<GridMap> {
        let mesh = match &self.support {
            GridSupport::Sphere(m) => m.clone(),
            GridSupport::Polar { .. } => {
                return Err(Error::InvalidParameter(
                    "mollification is defined for sphere grids".into(),
                ))
            }
        };
        if !(width >= 2.0 * mesh.spacing) {
            return Err(Error::WidthTooSmall {
                width,
                spacing: mesh.spacing,
            });
        }
        let k = self.arity_out;
        let cos_w = width.min(PI).cos();
        let rows = crate::par::map(0..mesh.len(), |i| {
            let x = mesh.node(i);
            let mut acc = vec![0.0; k];
            let mut mass = 0.0;
            for j in 0..mesh.len() {
                let y = mesh.node(j);
                if crate::linalg::dot(x, y) < cos_w - 1e-12 {
                    continue;
                }
                let d = angle_between(x, y) / width;
                if d >= 1.0 {
                    continue;
                }
                let w = (1.0 - d * d).powi(2) * mesh.weights[j];
                mass += w;
                for (a, v) in acc.iter_mut().zip(self.value(j)) {
                    *a += w * v;
                }
            }
            acc.iter_mut().for_each(|a| *a /= mass);
            acc
        });
        GridMap::from_values(self.support.clone(), k, rows.concat(), false)
    }

    /// Normalises node values onto the unit sphere; fails on any node with
    /// norm below 0.1.
    pub fn project_to_sphere(&self) -> Result<GridMap> {
        let mut values = self.values.clone();
        for (i, chunk) in values.chunks_mut(self.arity_out).enumerate() {
            let n = norm(chunk);
            if !(n >= NEAR_ZERO_FLOOR) {
                return Err(Error::NearZeroValue { node: i, norm: n });
            }
            chunk.iter_mut().for_each(|c| *c /= n);
        }
        GridMap::from_values(self.support.clone(), self.arity_out, values, true)
    }

    /// CSV dump: header row, one node per line, coordinates then values.
    pub fn to_csv(&self) -> String {
        let dim = self.node(0).len();
        let mut out = String::from("node");
        for i in 1..=dim {
            let _ = write!(out, ",x{i}");
        }
        for i in 1..=self.arity_out {
            let _ = write!(out, ",f{i}");
        }
        out.push('\n');
        for i in 0..self.len() {
            let _ = write!(out, "{i}");
            for c in self.node(i).iter().chain(self.value(i)) {
                let _ = write!(out, ",{c:.16e}");
            }
            out.push('\n');
        }
        out
    }
}

/// Solves `[a b c] lambda = p` (columns a, b, c) by Cramer's rule.
fn solve3(a: &[f64], b: &[f64], c: &[f64], p: &[f64]) -> [f64; 3] {
    let det3 = |u: &[f64], v: &[f64], w: &[f64]| {
        u[0] * (v[1] * w[2] - v[2] * w[1]) - v[0] * (u[1] * w[2] - u[2] * w[1])
            + w[0] * (u[1] * v[2] - u[2] * v[1])
    };
    let d = det3(a, b, c);
    [det3(p, b, c) / d, det3(a, p, c) / d, det3(a, b, p) / d]
}

impl SmoothMap for GridMap {
    fn domain(&self) -> Domain {
        match &self.support {
            GridSupport::Sphere(m) => Domain::Sphere(m.dim),
            GridSupport::Polar { .. } => Domain::Disk(2),
        }
    }

    fn arity_out(&self) -> usize {
        self.arity_out
    }

    fn eval_into(&self, x: &[f64], out: &mut [f64]) -> Result<()> {
        self.interpolate(x, out)
    }

    fn sphere_valued(&self) -> bool {
        self.sphere_valued
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::geometry::make_sphere_mesh;
    use crate::mapexpr::{equivariance_defect, parse_map, MapExpr};

    fn mesh(n: usize, res: usize) -> Arc<SphereMesh> {
        Arc::new(make_sphere_mesh(n, res).unwrap())
    }

    #[test]
    fn reproduces_node_values() {
        for (n, res) in [(1, 64), (2, 64), (3, 8)] {
            let m = mesh(n, res);
            let f = MapExpr::identity(Domain::Sphere(n));
            let g = GridMap::tabulate(&f, m.clone()).unwrap();
            for i in (0..m.len()).step_by(7) {
                let v = g.eval(m.node(i)).unwrap();
                for (a, b) in v.iter().zip(m.node(i)) {
                    assert!((a - b).abs() < 1e-12, "S^{n} node {i}");
                }
            }
        }
    }

    #[test]
    fn interpolation_converges() {
        let f = parse_map("(x1*x2 + x3, x3^2)", Domain::Sphere(2)).unwrap();
        let x = crate::linalg::normalized(&[0.31, -0.52, 0.4]);
        let exact = f.eval(&x).unwrap();
        let err = |res| {
            let g = GridMap::tabulate(&f, mesh(2, res)).unwrap();
            let v = g.eval(&x).unwrap();
            crate::linalg::distance(&v, &exact)
        };
        let (e1, e2) = (err(64), err(128));
        assert!(e2 < e1 / 2.5, "{e1} {e2}");
        assert!(e2 < 1e-2);
    }

    #[test]
    fn polar_interpolation() {
        let f = parse_map("(x1 + 2*x2)", Domain::Disk(2)).unwrap();
        let g = GridMap::tabulate_disk(&f, 64, 128).unwrap();
        let v = g.eval(&[0.3, -0.1]).unwrap()[0];
        assert!((v - 0.1).abs() < 1e-3);
    }

    #[test]
    fn mollify_keeps_constants_and_oddness() {
        let m = mesh(2, 96);
        let c = parse_map("(0.5, -2)", Domain::Sphere(2)).unwrap();
        let g = GridMap::tabulate(&c, m.clone()).unwrap();
        let s = g.mollify(3.0 * m.spacing).unwrap();
        for i in 0..s.len() {
            assert!((s.value(i)[0] - 0.5).abs() < 1e-14);
            assert!((s.value(i)[1] + 2.0).abs() < 1e-14);
        }
        let odd = parse_map("(x1, x2 + 0.5 * x1^3, x3 - x1 * x2 * x3)", Domain::Sphere(2)).unwrap();
        let g = GridMap::tabulate(&odd, m.clone()).unwrap();
        let s = g.mollify(3.0 * m.spacing).unwrap();
        assert!(equivariance_defect(&s, &m).unwrap() <= 1e-12);
        let p = s.project_to_sphere().unwrap();
        assert!(equivariance_defect(&p, &m).unwrap() <= 1e-10);
        assert!(matches!(
            g.mollify(m.spacing),
            Err(Error::WidthTooSmall { .. })
        ));
    }

    #[test]
    fn csv_format() {
        let m = mesh(1, 8);
        let g = GridMap::tabulate(&MapExpr::identity(Domain::Sphere(1)), m).unwrap();
        let csv = g.to_csv();
        let mut lines = csv.lines();
        assert_eq!(lines.next(), Some("node,x1,x2,f1,f2"));
        let first: Vec<&str> = lines.next().unwrap().split(',').collect();
        assert_eq!(first.len(), 5);
        assert!(first[1].contains('e'));
        assert_eq!(csv.lines().count(), 9);
    }
}
