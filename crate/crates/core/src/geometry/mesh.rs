//! Quadrature meshes for D^n, S^n, closed curves and the cylinder
//! `C = D^2 x [-1, 1]`.
//!
//! Boundary orientation: every boundary node carries a tangent frame
//! `(e_1, ..., e_k)` such that `(outward normal, e_1, ..., e_k)` is
//! positively oriented in the ambient space.

use std::collections::HashMap;
use std::f64::consts::PI;

use serde::Serialize;

use crate::error::{Error, Result};
use crate::linalg::{angle_between, gauss_legendre, neg, norm, oriented_complement};

/// Interior quadrature: nodes (flat, `dim` coordinates each) and volume weights.
#[derive(Debug, Clone)]
pub struct QuadratureRule {
    pub dim: usize,
    pub points: Vec<f64>,
    pub weights: Vec<f64>,
}

impl QuadratureRule {
    pub fn len(&self) -> usize {
        self.weights.len()
    }

    pub fn is_empty(&self) -> bool {
        self.weights.is_empty()
    }

    pub fn point(&self, i: usize) -> &[f64] {
        &self.points[i * self.dim..(i + 1) * self.dim]
    }

    pub fn total_weight(&self) -> f64 {
        crate::linalg::compensated_sum(self.weights.iter().copied())
    }
}

/// Which piece of a boundary a node belongs to.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize)]
pub enum BoundaryTag {
    /// The round sphere `|x| = 1`.
    Sphere,
    /// Top face `D_+` of the cylinder (`z = 1`).
    Top,
    /// Bottom face `D_-` (`z = -1`).
    Bottom,
    /// Curved side `V = S^1 x [-1, 1]`.
    Side,
    /// The circle `partial D_+` (`|u| = 1, z = 1`).
    TopRim,
}

impl BoundaryTag {
    /// Pulls a slightly perturbed point back onto the boundary piece.
    pub fn retract(self, x: &mut [f64]) {
        match self {
            BoundaryTag::Sphere => {
                let n = norm(x);
                x.iter_mut().for_each(|c| *c /= n);
            }
            BoundaryTag::Top => x[2] = 1.0,
            BoundaryTag::Bottom => x[2] = -1.0,
            BoundaryTag::Side => {
                let n = x[0].hypot(x[1]);
                x[0] /= n;
                x[1] /= n;
            }
            BoundaryTag::TopRim => {
                let n = x[0].hypot(x[1]);
                x[0] /= n;
                x[1] /= n;
                x[2] = 1.0;
            }
        }
    }

    pub fn name(self) -> &'static str {
        match self {
            BoundaryTag::Sphere => "sphere",
            BoundaryTag::Top => "D+",
            BoundaryTag::Bottom => "D-",
            BoundaryTag::Side => "V",
            BoundaryTag::TopRim => "rim(D+)",
        }
    }
}

/// Oriented quadrature on a boundary (or any embedded k-manifold).
#[derive(Debug, Clone)]
pub struct BoundaryRule {
    pub ambient: usize,
    pub tangent_dim: usize,
    pub points: Vec<f64>,
    pub weights: Vec<f64>,
    /// Per node, `tangent_dim` vectors of length `ambient`.
    pub frames: Vec<f64>,
    pub tags: Vec<BoundaryTag>,
}

impl BoundaryRule {
    fn new(ambient: usize, tangent_dim: usize) -> Self {
        Self {
            ambient,
            tangent_dim,
            points: Vec::new(),
            weights: Vec::new(),
            frames: Vec::new(),
            tags: Vec::new(),
        }
    }

    fn push(&mut self, point: &[f64], weight: f64, frame: &[&[f64]], tag: BoundaryTag) {
        self.points.extend_from_slice(point);
        self.weights.push(weight);
        for v in frame {
            self.frames.extend_from_slice(v);
        }
        self.tags.push(tag);
    }

    pub fn len(&self) -> usize {
        self.weights.len()
    }

    pub fn is_empty(&self) -> bool {
        self.weights.is_empty()
    }

    pub fn point(&self, i: usize) -> &[f64] {
        &self.points[i * self.ambient..(i + 1) * self.ambient]
    }

    pub fn frame(&self, i: usize) -> &[f64] {
        let s = self.tangent_dim * self.ambient;
        &self.frames[i * s..(i + 1) * s]
    }

    pub fn total_weight(&self) -> f64 {
        crate::linalg::compensated_sum(self.weights.iter().copied())
    }

    /// The sub-rule of nodes carrying `tag`.
    pub fn restrict(&self, tag: BoundaryTag) -> Result<BoundaryRule> {
        let mut out = BoundaryRule::new(self.ambient, self.tangent_dim);
        for i in 0..self.len() {
            if self.tags[i] == tag {
                out.points.extend_from_slice(self.point(i));
                out.weights.push(self.weights[i]);
                out.frames.extend_from_slice(self.frame(i));
                out.tags.push(tag);
            }
        }
        if out.is_empty() {
            return Err(Error::MissingBoundary(tag.name().to_string()));
        }
        Ok(out)
    }
}

fn check_resolution(resolution: usize) -> Result<()> {
    if resolution < 4 {
        return Err(Error::InvalidParameter(format!(
            "mesh resolution must be at least 4, got {resolution}"
        )));
    }
    Ok(())
}

/// Centroid radii and exact annulus/shell measures of a uniform radial
/// partition. `power` is the radial Jacobian exponent (1 for the disk, 2 for
/// the ball).
fn radial_cells(n: usize, power: i32) -> Vec<(f64, f64)> {
    let k = f64::from(power + 1);
    (0..n)
        .map(|i| {
            let a = i as f64 / n as f64;
            let b = (i + 1) as f64 / n as f64;
            let measure = (b.powi(power + 1) - a.powi(power + 1)) / k;
            let moment = (b.powi(power + 2) - a.powi(power + 2)) / (k + 1.0);
            (moment / measure, measure)
        })
        .collect()
}

/// Interior and oriented boundary quadrature of the unit ball D^n.
#[derive(Debug, Clone)]
pub struct DiskMesh {
    pub dim: usize,
    pub resolution: usize,
    pub interior: QuadratureRule,
    pub boundary: BoundaryRule,
}

/// Polar (n = 2) or spherical-shell (n = 3) grid with `resolution` radial
/// cells weighted by their exact measure. For n = 2 there are `resolution`
/// angular midpoints and `4 * resolution` boundary nodes; for n = 3 each
/// shell and the boundary sphere carry a Gauss-Legendre (polar cosine) by
/// midpoint (azimuth) product rule.
pub fn make_disk_mesh(n: usize, resolution: usize) -> Result<DiskMesh> {
    if n != 2 && n != 3 {
        return Err(Error::UnsupportedDimension(n));
    }
    check_resolution(resolution)?;
    let radial = radial_cells(resolution, n as i32 - 1);
    match n {
        2 => {
            let n_theta = resolution.max(8);
            let dtheta = 2.0 * PI / n_theta as f64;
            let mut interior = QuadratureRule {
                dim: 2,
                points: Vec::with_capacity(2 * resolution * n_theta),
                weights: Vec::with_capacity(resolution * n_theta),
            };
            for &(r, area) in &radial {
                for j in 0..n_theta {
                    let (s, c) = ((j as f64 + 0.5) * dtheta).sin_cos();
                    interior.points.extend_from_slice(&[r * c, r * s]);
                    interior.weights.push(area * dtheta);
                }
            }
            Ok(DiskMesh {
                dim: 2,
                resolution,
                interior,
                boundary: circle_boundary(4 * resolution),
            })
        }
        _ => {
            // Gauss-Legendre in the polar cosine times midpoints in azimuth
            let n_phi = resolution.max(8);
            let (zs, zw) = gauss_legendre((resolution / 2).max(4));
            let dphi = 2.0 * PI / n_phi as f64;
            let mut interior = QuadratureRule {
                dim: 3,
                points: Vec::with_capacity(3 * resolution * zs.len() * n_phi),
                weights: Vec::with_capacity(resolution * zs.len() * n_phi),
            };
            for &(r, vol) in &radial {
                for (z, wz) in zs.iter().zip(&zw) {
                    let rho = (1.0 - z * z).sqrt();
                    for j in 0..n_phi {
                        let (s, c) = ((j as f64 + 0.5) * dphi).sin_cos();
                        interior.points.extend_from_slice(&[r * rho * c, r * rho * s, r * z]);
                        interior.weights.push(vol * wz * dphi);
                    }
                }
            }
            Ok(DiskMesh {
                dim: 3,
                resolution,
                interior,
                boundary: sphere_product_boundary((resolution / 2).max(4), resolution.max(8)),
            })
        }
    }
}

impl DiskMesh {
    pub fn refine(&self) -> Result<DiskMesh> {
        make_disk_mesh(self.dim, 2 * self.resolution)
    }

    /// Volume of D^n.
    pub fn volume(&self) -> f64 {
        ball_volume(self.dim)
    }
}

pub fn ball_volume(n: usize) -> f64 {
    match n {
        1 => 2.0,
        2 => PI,
        3 => 4.0 * PI / 3.0,
        4 => PI * PI / 2.0,
        _ => f64::NAN,
    }
}

/// Gauss-Legendre in the polar cosine by midpoints in azimuth on S^2.
fn sphere_product_boundary(n_z: usize, n_phi: usize) -> BoundaryRule {
    let mut rule = BoundaryRule::new(3, 2);
    let (zs, zw) = gauss_legendre(n_z);
    let dphi = 2.0 * PI / n_phi as f64;
    for (z, wz) in zs.iter().zip(&zw) {
        let rho = (1.0 - z * z).sqrt();
        for j in 0..n_phi {
            let (s, c) = ((j as f64 + 0.5) * dphi).sin_cos();
            let x = [rho * c, rho * s, *z];
            let frame = oriented_complement(&x);
            rule.push(&x, wz * dphi, &[&frame[0], &frame[1]], BoundaryTag::Sphere);
        }
    }
    rule
}

fn circle_boundary(n: usize) -> BoundaryRule {
    let mut rule = BoundaryRule::new(2, 1);
    let dtheta = 2.0 * PI / n as f64;
    for j in 0..n {
        let (s, c) = ((j as f64 + 0.5) * dtheta).sin_cos();
        rule.push(&[c, s], dtheta, &[&[-s, c]], BoundaryTag::Sphere);
    }
    rule
}

/// Quadrature on the unit sphere S^n with exact antipodal pairing.
#[derive(Debug, Clone)]
pub struct SphereMesh {
    pub dim: usize,
    pub resolution: usize,
    pub nodes: Vec<f64>,
    pub weights: Vec<f64>,
    /// `antipode[i]` is the index of the node `-x_i`.
    pub antipode: Vec<usize>,
    /// Triangles (S^2 only), used for barycentric interpolation.
    pub triangles: Vec<[usize; 3]>,
    /// Characteristic node spacing (radians).
    pub spacing: f64,
    pub(crate) layout: SphereLayout,
}

#[derive(Debug, Clone)]
pub(crate) enum SphereLayout {
    /// Angles `(j + 1/2) 2 pi / n` in increasing order.
    Circle { n: usize },
    /// Icosphere of the given frequency.
    Icosphere { frequency: usize, base: IcosphereIndex },
    /// Hopf-coordinate grid on S^3.
    Hopf { n_u: usize, n_xi: usize },
}

impl SphereMesh {
    pub fn len(&self) -> usize {
        self.weights.len()
    }

    pub fn is_empty(&self) -> bool {
        self.weights.is_empty()
    }

    pub fn ambient_dim(&self) -> usize {
        self.dim + 1
    }

    pub fn node(&self, i: usize) -> &[f64] {
        let d = self.dim + 1;
        &self.nodes[i * d..(i + 1) * d]
    }

    pub fn total_weight(&self) -> f64 {
        crate::linalg::compensated_sum(self.weights.iter().copied())
    }

    pub fn refine(&self) -> Result<SphereMesh> {
        make_sphere_mesh(self.dim, 2 * self.resolution)
    }

    /// Oriented boundary rule viewing S^n as the boundary of D^{n+1}.
    pub fn boundary_rule(&self) -> BoundaryRule {
        let d = self.dim + 1;
        let mut rule = BoundaryRule::new(d, self.dim);
        for i in 0..self.len() {
            let x = self.node(i);
            let frame = oriented_complement(x);
            let refs: Vec<&[f64]> = frame.iter().map(|v| v.as_slice()).collect();
            rule.push(x, self.weights[i], &refs, BoundaryTag::Sphere);
        }
        rule
    }
}

/// Builds a mesh of S^n: n = 1 uses `resolution` equally spaced nodes
/// (rounded up to even), n = 2 an icosphere of frequency `resolution / 8`
/// (at least 2) with vertex-dual weights, n = 3 a Hopf-coordinate grid with
/// `resolution / 2` equal-measure bands and `resolution` angles per fibre.
pub fn make_sphere_mesh(n: usize, resolution: usize) -> Result<SphereMesh> {
    check_resolution(resolution)?;
    let mut mesh = match n {
        1 => make_circle(resolution + resolution % 2),
        2 => make_icosphere((resolution / 8).max(2)),
        3 => make_hopf_grid((resolution / 2).max(2), resolution + resolution % 2),
        _ => return Err(Error::UnsupportedDimension(n)),
    };
    mesh.resolution = resolution;
    Ok(mesh)
}

fn make_circle(n: usize) -> SphereMesh {
    let half = n / 2;
    let dtheta = 2.0 * PI / n as f64;
    let mut nodes = vec![0.0; 2 * n];
    for j in 0..half {
        let (s, c) = ((j as f64 + 0.5) * dtheta).sin_cos();
        nodes[2 * j] = c;
        nodes[2 * j + 1] = s;
        nodes[2 * (j + half)] = -c;
        nodes[2 * (j + half) + 1] = -s;
    }
    SphereMesh {
        dim: 1,
        resolution: n,
        nodes,
        weights: vec![dtheta; n],
        antipode: (0..n).map(|i| (i + half) % n).collect(),
        triangles: Vec::new(),
        spacing: dtheta,
        layout: SphereLayout::Circle { n },
    }
}

fn make_hopf_grid(n_u: usize, n_xi: usize) -> SphereMesh {
    // x = (cos(eta) e^{i xi1}, sin(eta) e^{i xi2}), u = sin^2(eta), dV = du dxi1 dxi2 / 2
    let du = 1.0 / n_u as f64;
    let dxi = 2.0 * PI / n_xi as f64;
    let count = n_u * n_xi * n_xi;
    let index = |iu: usize, i1: usize, i2: usize| (i1 * n_xi + i2) * n_u + iu;
    let mut nodes = vec![0.0; 4 * count];
    let mut antipode = vec![0; count];
    for i1 in 0..n_xi / 2 {
        for i2 in 0..n_xi {
            for iu in 0..n_u {
                let u = (iu as f64 + 0.5) * du;
                let (ce, se) = ((1.0 - u).sqrt(), u.sqrt());
                let (s1, c1) = ((i1 as f64 + 0.5) * dxi).sin_cos();
                let (s2, c2) = ((i2 as f64 + 0.5) * dxi).sin_cos();
                let x = [ce * c1, ce * s1, se * c2, se * s2];
                let a = index(iu, i1, i2);
                let b = index(iu, i1 + n_xi / 2, (i2 + n_xi / 2) % n_xi);
                nodes[4 * a..4 * a + 4].copy_from_slice(&x);
                for k in 0..4 {
                    nodes[4 * b + k] = -x[k];
                }
                antipode[a] = b;
                antipode[b] = a;
            }
        }
    }
    SphereMesh {
        dim: 3,
        resolution: n_xi,
        nodes,
        weights: vec![0.5 * du * dxi * dxi; count],
        antipode,
        triangles: Vec::new(),
        spacing: dxi.max((0.5 * du).sqrt() * 2.0),
        layout: SphereLayout::Hopf { n_u, n_xi },
    }
}

/// Base icosahedron plus the lookup needed for point location.
#[derive(Debug, Clone)]
pub(crate) struct IcosphereIndex {
    pub vertices: Vec<[f64; 3]>,
    pub faces: Vec<[usize; 3]>,
    /// For each base face, the global node index of grid point `(i, j)`.
    pub face_grid: Vec<Vec<usize>>,
}

fn icosahedron() -> (Vec<[f64; 3]>, Vec<[usize; 3]>) {
    let t = (1.0 + 5f64.sqrt()) / 2.0;
    let raw = [
        [-1.0, t, 0.0],
        [1.0, t, 0.0],
        [-1.0, -t, 0.0],
        [1.0, -t, 0.0],
        [0.0, -1.0, t],
        [0.0, 1.0, t],
        [0.0, -1.0, -t],
        [0.0, 1.0, -t],
        [t, 0.0, -1.0],
        [t, 0.0, 1.0],
        [-t, 0.0, -1.0],
        [-t, 0.0, 1.0],
    ];
    let vertices = raw
        .iter()
        .map(|v| {
            let n = norm(v);
            [v[0] / n, v[1] / n, v[2] / n]
        })
        .collect();
    let faces = vec![
        [0, 11, 5],
        [0, 5, 1],
        [0, 1, 7],
        [0, 7, 10],
        [0, 10, 11],
        [1, 5, 9],
        [5, 11, 4],
        [11, 10, 2],
        [10, 7, 6],
        [7, 1, 8],
        [3, 9, 4],
        [3, 4, 2],
        [3, 2, 6],
        [3, 6, 8],
        [3, 8, 9],
        [4, 9, 5],
        [2, 4, 11],
        [6, 2, 10],
        [8, 6, 7],
        [9, 8, 1],
    ];
    (vertices, faces)
}

/// Area of the spherical triangle with unit-vector vertices.
pub(crate) fn spherical_triangle_area(a: &[f64], b: &[f64], c: &[f64]) -> f64 {
    let cross = [
        b[1] * c[2] - b[2] * c[1],
        b[2] * c[0] - b[0] * c[2],
        b[0] * c[1] - b[1] * c[0],
    ];
    let triple = (a[0] * cross[0] + a[1] * cross[1] + a[2] * cross[2]).abs();
    let dot = |p: &[f64], q: &[f64]| p[0] * q[0] + p[1] * q[1] + p[2] * q[2];
    2.0 * triple.atan2(1.0 + dot(a, b) + dot(b, c) + dot(c, a))
}

fn canonical_positive(x: &[f64]) -> bool {
    for &c in x {
        if c.abs() > 1e-9 {
            return c > 0.0;
        }
    }
    unreachable!("unit vector with all coordinates below 1e-9")
}

fn make_icosphere(k: usize) -> SphereMesh {
    let (base, faces) = icosahedron();
    let mut points: Vec<[f64; 3]> = base.clone();
    let mut edge_ids: HashMap<(usize, usize, usize), usize> = HashMap::new();
    let lerp = |p: usize, q: usize, s: f64| -> [f64; 3] {
        let v = [
            base[p][0] + (base[q][0] - base[p][0]) * s,
            base[p][1] + (base[q][1] - base[p][1]) * s,
            base[p][2] + (base[q][2] - base[p][2]) * s,
        ];
        let n = norm(&v);
        [v[0] / n, v[1] / n, v[2] / n]
    };
    let mut face_grid = Vec::with_capacity(faces.len());
    for face in &faces {
        let [a, b, c] = *face;
        // grid point (i, j) has barycentric (k - i - j, i, j) on (a, b, c)
        let mut grid = vec![usize::MAX; (k + 1) * (k + 1)];
        for i in 0..=k {
            for j in 0..=k - i {
                let id = if i == 0 && j == 0 {
                    a
                } else if i == k {
                    b
                } else if j == k {
                    c
                } else if j == 0 || i == 0 || i + j == k {
                    let (p, q, m) = if j == 0 {
                        (a, b, i)
                    } else if i == 0 {
                        (a, c, j)
                    } else {
                        (b, c, j)
                    };
                    let (lo, hi, pos) = if p < q { (p, q, m) } else { (q, p, k - m) };
                    *edge_ids.entry((lo, hi, pos)).or_insert_with(|| {
                        points.push(lerp(lo, hi, pos as f64 / k as f64));
                        points.len() - 1
                    })
                } else {
                    let (s, t) = (i as f64 / k as f64, j as f64 / k as f64);
                    let v = [
                        base[a][0] + (base[b][0] - base[a][0]) * s + (base[c][0] - base[a][0]) * t,
                        base[a][1] + (base[b][1] - base[a][1]) * s + (base[c][1] - base[a][1]) * t,
                        base[a][2] + (base[b][2] - base[a][2]) * s + (base[c][2] - base[a][2]) * t,
                    ];
                    let n = norm(&v);
                    points.push([v[0] / n, v[1] / n, v[2] / n]);
                    points.len() - 1
                };
                grid[i * (k + 1) + j] = id;
            }
        }
        face_grid.push(grid);
    }
    let mut triangles = Vec::with_capacity(faces.len() * k * k);
    for grid in &face_grid {
        let at = |i: usize, j: usize| grid[i * (k + 1) + j];
        for i in 0..k {
            for j in 0..k - i {
                triangles.push([at(i, j), at(i + 1, j), at(i, j + 1)]);
                if i + j < k - 1 {
                    triangles.push([at(i + 1, j), at(i + 1, j + 1), at(i, j + 1)]);
                }
            }
        }
    }
    let mut weights = vec![0.0; points.len()];
    for t in &triangles {
        let area = spherical_triangle_area(&points[t[0]], &points[t[1]], &points[t[2]]) / 3.0;
        for &v in t {
            weights[v] += area;
        }
    }

    // Enforce exact antipodal closure: keep the canonical half, pair each
    // with its numerical antipode, and overwrite the partner with -x.
    let cell = 1e-6;
    let key = |p: &[f64; 3]| -> (i64, i64, i64) {
        (
            (p[0] / cell).round() as i64,
            (p[1] / cell).round() as i64,
            (p[2] / cell).round() as i64,
        )
    };
    let mut lookup: HashMap<(i64, i64, i64), Vec<usize>> = HashMap::new();
    for (i, p) in points.iter().enumerate() {
        lookup.entry(key(p)).or_default().push(i);
    }
    let find = |target: [f64; 3]| -> usize {
        let (x, y, z) = key(&target);
        let mut best = (f64::INFINITY, usize::MAX);
        for dx in -1..=1 {
            for dy in -1..=1 {
                for dz in -1..=1 {
                    if let Some(list) = lookup.get(&(x + dx, y + dy, z + dz)) {
                        for &i in list {
                            let d = crate::linalg::distance(&points[i], &target);
                            if d < best.0 {
                                best = (d, i);
                            }
                        }
                    }
                }
            }
        }
        assert!(best.0 < 1e-9, "icosphere is not centrally symmetric");
        best.1
    };
    let positive: Vec<usize> = (0..points.len())
        .filter(|&i| canonical_positive(&points[i]))
        .collect();
    let half = positive.len();
    assert_eq!(2 * half, points.len());
    let mut new_index = vec![usize::MAX; points.len()];
    let mut nodes = vec![0.0; 3 * points.len()];
    let mut new_weights = vec![0.0; points.len()];
    for (slot, &i) in positive.iter().enumerate() {
        let p = points[i];
        let partner = find([-p[0], -p[1], -p[2]]);
        new_index[i] = slot;
        new_index[partner] = slot + half;
        nodes[3 * slot..3 * slot + 3].copy_from_slice(&p);
        nodes[3 * (slot + half)..3 * (slot + half) + 3].copy_from_slice(&neg(&p));
        let w = 0.5 * (weights[i] + weights[partner]);
        new_weights[slot] = w;
        new_weights[slot + half] = w;
    }
    let triangles: Vec<[usize; 3]> = triangles
        .iter()
        .map(|t| [new_index[t[0]], new_index[t[1]], new_index[t[2]]])
        .collect();
    let face_grid: Vec<Vec<usize>> = face_grid
        .into_iter()
        .map(|g| {
            g.into_iter()
                .map(|i| if i == usize::MAX { i } else { new_index[i] })
                .collect()
        })
        .collect();
    let node = |i: usize| &nodes[3 * i..3 * i + 3];
    let spacing = triangles
        .iter()
        .map(|t| {
            angle_between(node(t[0]), node(t[1]))
                .max(angle_between(node(t[1]), node(t[2])))
                .max(angle_between(node(t[2]), node(t[0])))
        })
        .fold(0.0, f64::max);
    let total = points.len();
    SphereMesh {
        dim: 2,
        resolution: k,
        nodes,
        weights: new_weights,
        antipode: (0..total).map(|i| (i + half) % total).collect(),
        triangles,
        spacing,
        layout: SphereLayout::Icosphere {
            frequency: k,
            base: IcosphereIndex {
                vertices: base,
                faces,
                face_grid,
            },
        },
    }
}

/// Uniform samples `t_i = i / n` of the parameter circle `R / Z`.
#[derive(Debug, Clone, PartialEq)]
pub struct CurveMesh {
    pub samples: usize,
    pub closed: bool,
}

impl CurveMesh {
    pub fn new(samples: usize) -> Result<Self> {
        check_resolution(samples)?;
        Ok(Self {
            samples,
            closed: true,
        })
    }

    pub fn spacing(&self) -> f64 {
        1.0 / self.samples as f64
    }

    pub fn t(&self, i: usize) -> f64 {
        i as f64 / self.samples as f64
    }

    pub fn refine(&self) -> Self {
        Self {
            samples: 2 * self.samples,
            closed: self.closed,
        }
    }
}

/// Quadrature on `C = D^2 x [-1, 1]` with its boundary `D_+ u D_- u V`.
#[derive(Debug, Clone)]
pub struct CylinderMesh {
    pub resolution: usize,
    pub interior: QuadratureRule,
    pub boundary: BoundaryRule,
    /// The circle `partial D_+`, counter-clockwise seen from `+z`.
    pub rim: BoundaryRule,
    /// Nodes of the equator `E` of `S = partial C` (the circle `z = 0` on `V`).
    pub equator: Vec<f64>,
    /// Number of angles used on `V`, and of heights per vertical line.
    pub side_angles: usize,
    pub side_heights: usize,
}

/// Cylinder mesh: the interior uses `resolution / 2` radial cells,
/// `resolution` angles and `resolution / 2` heights; each face uses `2 *
/// resolution` radial cells and `4 * resolution` angles; `V` uses `4 *
/// resolution` angles by `resolution / 2` heights.
pub fn make_cylinder_mesh(resolution: usize) -> Result<CylinderMesh> {
    check_resolution(resolution)?;
    let nr = (resolution / 2).max(4);
    let nt = resolution.max(8);
    let nz = (resolution / 2).max(4);
    let dtheta = 2.0 * PI / nt as f64;
    let dz = 2.0 / nz as f64;
    let mut interior = QuadratureRule {
        dim: 3,
        points: Vec::with_capacity(3 * nr * nt * nz),
        weights: Vec::with_capacity(nr * nt * nz),
    };
    for &(r, area) in &radial_cells(nr, 1) {
        for j in 0..nt {
            let (s, c) = ((j as f64 + 0.5) * dtheta).sin_cos();
            for l in 0..nz {
                let z = -1.0 + (l as f64 + 0.5) * dz;
                interior.points.extend_from_slice(&[r * c, r * s, z]);
                interior.weights.push(area * dtheta * dz);
            }
        }
    }

    let face_r = 2 * resolution;
    let face_t = 4 * resolution;
    let dphi = 2.0 * PI / face_t as f64;
    let mut boundary = BoundaryRule::new(3, 2);
    for (tag, z) in [(BoundaryTag::Top, 1.0), (BoundaryTag::Bottom, -1.0)] {
        let frame: [&[f64]; 2] = if z > 0.0 {
            [&[1.0, 0.0, 0.0], &[0.0, 1.0, 0.0]]
        } else {
            [&[0.0, 1.0, 0.0], &[1.0, 0.0, 0.0]]
        };
        for &(r, area) in &radial_cells(face_r, 1) {
            for j in 0..face_t {
                let (s, c) = ((j as f64 + 0.5) * dphi).sin_cos();
                boundary.push(&[r * c, r * s, z], area * dphi, &frame, tag);
            }
        }
    }
    let side_heights = nz;
    for j in 0..face_t {
        let (s, c) = ((j as f64 + 0.5) * dphi).sin_cos();
        for l in 0..side_heights {
            let z = -1.0 + (l as f64 + 0.5) * dz;
            boundary.push(
                &[c, s, z],
                dphi * dz,
                &[&[-s, c, 0.0], &[0.0, 0.0, 1.0]],
                BoundaryTag::Side,
            );
        }
    }
    let mut rim = BoundaryRule::new(3, 1);
    let mut equator = Vec::with_capacity(3 * face_t);
    for j in 0..face_t {
        let (s, c) = ((j as f64 + 0.5) * dphi).sin_cos();
        rim.push(&[c, s, 1.0], dphi, &[&[-s, c, 0.0]], BoundaryTag::TopRim);
        equator.extend_from_slice(&[c, s, 0.0]);
    }
    Ok(CylinderMesh {
        resolution,
        interior,
        boundary,
        rim,
        equator,
        side_angles: face_t,
        side_heights,
    })
}

impl CylinderMesh {
    pub fn refine(&self) -> Result<CylinderMesh> {
        make_cylinder_mesh(2 * self.resolution)
    }
}

/// Orthonormal coordinates on the equator `E = B^perp` of a sphere: the
/// equator is parametrised by the unit sphere of one dimension less via
/// an oriented basis of `B^perp`.
#[derive(Debug, Clone)]
pub struct EquatorFrame {
    pub pole: Vec<f64>,
    pub basis: Vec<Vec<f64>>,
}

impl EquatorFrame {
    pub fn new(pole: &[f64]) -> Self {
        Self {
            pole: pole.to_vec(),
            basis: oriented_complement(pole),
        }
    }

    /// Embeds a point of S^{n-1} (length n) into E (length n + 1).
    pub fn embed(&self, y: &[f64]) -> Vec<f64> {
        let mut out = vec![0.0; self.pole.len()];
        for (c, b) in y.iter().zip(&self.basis) {
            for (o, bk) in out.iter_mut().zip(b) {
                *o += c * bk;
            }
        }
        out
    }

    /// Coordinates of a point of E in the basis.
    pub fn coordinates(&self, x: &[f64]) -> Vec<f64> {
        self.basis.iter().map(|b| crate::linalg::dot(b, x)).collect()
    }

    /// A sphere mesh of E, embedded.
    pub fn mesh(&self, resolution: usize) -> Result<EquatorMesh> {
        let sphere = make_sphere_mesh(self.pole.len() - 2, resolution)?;
        let d = sphere.ambient_dim();
        let mut nodes = Vec::with_capacity(sphere.len() * self.pole.len());
        for i in 0..sphere.len() {
            nodes.extend(self.embed(sphere.node(i)));
        }
        Ok(EquatorMesh {
            ambient: d + 1,
            nodes,
            sphere,
        })
    }
}

/// A mesh of the equator of a sphere: an intrinsic sphere mesh together
/// with its nodes embedded in the ambient space.
#[derive(Debug, Clone)]
pub struct EquatorMesh {
    pub sphere: SphereMesh,
    ambient: usize,
    nodes: Vec<f64>,
}

impl EquatorMesh {
    pub fn len(&self) -> usize {
        self.sphere.len()
    }

    pub fn is_empty(&self) -> bool {
        self.sphere.is_empty()
    }

    pub fn node(&self, i: usize) -> &[f64] {
        &self.nodes[i * self.ambient..(i + 1) * self.ambient]
    }

    pub fn weight(&self, i: usize) -> f64 {
        self.sphere.weights[i]
    }

    pub fn spacing(&self) -> f64 {
        self.sphere.spacing
    }
}

/// Resolution-independent sanity bound used by tests.
pub fn unit_sphere_area(n: usize) -> f64 {
    match n {
        1 => 2.0 * PI,
        2 => 4.0 * PI,
        3 => 2.0 * PI * PI,
        _ => f64::NAN,
    }
}


#[cfg(test)]
mod tests {
    use super::*;
    use crate::linalg::normalized;

    fn rel(a: f64, b: f64) -> f64 {
        ((a - b) / b).abs()
    }

    #[test]
    fn disk_weights_sum_to_area() {
        let m = make_disk_mesh(2, 256).unwrap();
        assert!(rel(m.interior.total_weight(), PI) <= 1e-6);
        assert!(rel(m.boundary.total_weight(), 2.0 * PI) <= 1e-12);
        for i in 0..m.boundary.len() {
            assert!((norm(m.boundary.point(i)) - 1.0).abs() <= 1e-12);
        }
    }

    #[test]
    fn ball_weights_sum_to_volume() {
        let m = make_disk_mesh(3, 64).unwrap();
        assert!(rel(m.interior.total_weight(), 4.0 * PI / 3.0) <= 1e-6);
        assert!(rel(m.boundary.total_weight(), 4.0 * PI) <= 1e-12);
    }

    #[test]
    fn unsupported_dimensions() {
        assert_eq!(make_disk_mesh(4, 8).unwrap_err(), Error::UnsupportedDimension(4));
        assert!(make_sphere_mesh(4, 8).is_err());
    }

    #[test]
    fn sphere_weights_and_antipodal_closure() {
        for (n, res, area) in [(1, 1024, 2.0 * PI), (2, 128, 4.0 * PI), (3, 16, 2.0 * PI * PI)] {
            let m = make_sphere_mesh(n, res).unwrap();
            assert!(rel(m.total_weight(), area) <= 1e-6, "S^{n}");
            for i in 0..m.len() {
                let j = m.antipode[i];
                assert_eq!(m.antipode[j], i);
                for (a, b) in m.node(i).iter().zip(m.node(j)) {
                    assert_eq!(*a, -*b);
                }
                assert!((norm(m.node(i)) - 1.0).abs() < 1e-12);
            }
        }
    }

    #[test]
    fn icosphere_integrates_low_degree_exactly() {
        let m = make_sphere_mesh(2, 32).unwrap();
        let s: f64 = (0..m.len()).map(|i| m.weights[i] * m.node(i)[0].powi(2)).sum();
        assert!((s - 4.0 * PI / 3.0).abs() < 1e-12);
        assert_eq!(m.triangles.len(), 20 * 16);
    }

    #[test]
    fn cylinder_structure() {
        let m = make_cylinder_mesh(64).unwrap();
        assert!(rel(m.interior.total_weight(), 2.0 * PI) <= 1e-6);
        for i in 0..m.boundary.len() {
            let p = m.boundary.point(i);
            match m.boundary.tags[i] {
                BoundaryTag::Top => assert_eq!(p[2], 1.0),
                BoundaryTag::Bottom => assert_eq!(p[2], -1.0),
                BoundaryTag::Side => assert!((p[0] * p[0] + p[1] * p[1] - 1.0).abs() < 1e-14),
                other => panic!("unexpected tag {other:?}"),
            }
        }
        let top = m.boundary.restrict(BoundaryTag::Top).unwrap();
        assert!(rel(top.total_weight(), PI) < 1e-12);
        let side = m.boundary.restrict(BoundaryTag::Side).unwrap();
        assert!(rel(side.total_weight(), 4.0 * PI) < 1e-12);
    }

    #[test]
    fn equator_frame_round_trips() {
        let pole = normalized(&[0.2, -0.3, 0.9]);
        let f = EquatorFrame::new(&pole);
        let y = [0.6, 0.8];
        let x = f.embed(&y);
        assert!(crate::linalg::dot(&x, &pole).abs() < 1e-15);
        let back = f.coordinates(&x);
        assert!((back[0] - 0.6).abs() < 1e-15 && (back[1] - 0.8).abs() < 1e-15);
        let m = f.mesh(64).unwrap();
        assert_eq!(m.sphere.ambient_dim(), 2);
        assert_eq!(m.node(0).len(), 3);
        assert!(crate::linalg::dot(m.node(5), &pole).abs() < 1e-15);
    }
}
