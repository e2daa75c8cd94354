//! An odd diffeomorphism `psi` of S^n, isotopic to the identity through odd
//! diffeomorphisms `psi_t`, carrying the upper hemisphere over a prescribed
//! finite set `X` (and the lower one over `-X`).
//!
//! Along each meridian through `±B`, latitude `l` is remapped by
//! `l -> l + c (1 - P(|l|) / M)`, where `c = t * theta(x_bar)` is the new
//! latitude of the equator point `x_bar` and `P` is the primitive of a
//! plateau bump vanishing near the equator and near the poles, with total
//! mass `M`. The remap is odd in `(l, c)`, strictly increasing whenever
//! `|c| < M`, and the identity near `±B`.

use std::collections::HashMap;
use std::f64::consts::FRAC_PI_2;
use std::sync::Arc;

use serde::Serialize;

use crate::error::{Error, Result};
use crate::geometry::{
    at_latitude, horizontal, latitude, meridian_project, EquatorFrame, Pole,
    EquatorMesh,
};
use crate::linalg::{angle_between, dot, norm};
use crate::mapexpr::{Domain, SmoothMap};

/// `theta(x) = (pi/2 - eps)(d_+ - d_-)/(d_+ + d_-)`, with `d_±` the geodesic
/// distances from `x` to `±pix`. Zero when `pix` is empty.
pub fn latitude_shift(pix: &[Vec<f64>], eps: f64, x: &[f64]) -> f64 {
    if pix.is_empty() {
        return 0.0;
    }
    let mut d_plus = f64::INFINITY;
    let mut d_minus = f64::INFINITY;
    let mut minus = vec![0.0; x.len()];
    for p in pix {
        d_plus = d_plus.min(angle_between(x, p));
        minus.iter_mut().zip(p).for_each(|(m, c)| *m = -c);
        d_minus = d_minus.min(angle_between(x, &minus));
    }
    (FRAC_PI_2 - eps) * (d_plus - d_minus) / (d_plus + d_minus)
}

/// Parameters of the construction.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct IsotopyParams {
    /// Cap margin: `X` must avoid the caps of angular radius `2 eps` at `±B`.
    pub eps: f64,
    /// Kernel width for smoothing `theta`; defaults to `eps * sep / 8`
    /// (at least 2.5 equator-mesh spacings), `sep` the distance between
    /// the projections of `X` and `-X`.
    pub mollify_width: Option<f64>,
    /// Resolution of the equator mesh; defaults to 1024 nodes on a circle
    /// and resolution 256 on S^2.
    pub equator_resolution: Option<usize>,
}

impl IsotopyParams {
    pub fn new(eps: f64) -> Self {
        Self {
            eps,
            mollify_width: None,
            equator_resolution: None,
        }
    }
}

/// Bucket grid over unit vectors for fixed-radius neighbour queries.
#[derive(Debug)]
struct NodeIndex {
    cell: f64,
    buckets: HashMap<Vec<i64>, Vec<usize>>,
}

impl NodeIndex {
    fn new(mesh: &EquatorMesh, cell: f64) -> Self {
        let mut buckets: HashMap<Vec<i64>, Vec<usize>> = HashMap::new();
        for i in 0..mesh.len() {
            buckets.entry(Self::key(mesh.node(i), cell)).or_default().push(i);
        }
        Self { cell, buckets }
    }

    fn key(x: &[f64], cell: f64) -> Vec<i64> {
        x.iter().map(|c| (c / cell).floor() as i64).collect()
    }

    fn for_each_near(&self, x: &[f64], mut f: impl FnMut(usize)) {
        let base = Self::key(x, self.cell);
        let d = base.len();
        let mut offset = vec![-1i64; d];
        loop {
            let key: Vec<i64> = base.iter().zip(&offset).map(|(b, o)| b + o).collect();
            if let Some(list) = self.buckets.get(&key) {
                list.iter().for_each(|&i| f(i));
            }
            let mut k = 0;
            while k < d {
                offset[k] += 1;
                if offset[k] <= 1 {
                    break;
                }
                offset[k] = -1;
                k += 1;
            }
            if k == d {
                break;
            }
        }
    }
}

/// `theta` sampled on a mesh of the equator and smoothed with the kernel
/// `(1 - (d/w)^2)^2`. On a circle the kernel is integrated exactly against
/// the piecewise-linear interpolant of the samples; on S^2 the node sum is
/// used.
#[derive(Debug)]
pub struct SmoothedTheta {
    mesh: EquatorMesh,
    circle_basis: Option<[Vec<f64>; 2]>,
    values: Vec<f64>,
    width: f64,
    index: NodeIndex,
    pix: Vec<Vec<f64>>,
    eps: f64,
}

impl SmoothedTheta {
    pub fn width(&self) -> f64 {
        self.width
    }

    pub fn spacing(&self) -> f64 {
        self.mesh.spacing()
    }

    /// Unsmoothed `theta` at a point of the equator.
    pub fn raw(&self, x: &[f64]) -> f64 {
        latitude_shift(&self.pix, self.eps, x)
    }

    /// Smoothed `theta` at a point of the equator.
    pub fn eval(&self, x: &[f64]) -> f64 {
        match &self.circle_basis {
            Some(basis) => self.eval_circle(basis, x),
            None => self.eval_nodes(x),
        }
    }

    fn eval_circle(&self, basis: &[Vec<f64>; 2], x: &[f64]) -> f64 {
        const NODES: [f64; 3] = [-0.774_596_669_241_483_4, 0.0, 0.774_596_669_241_483_4];
        const WEIGHTS: [f64; 3] = [5.0 / 9.0, 8.0 / 9.0, 5.0 / 9.0];
        let n = self.values.len();
        let step = std::f64::consts::TAU / n as f64;
        let w = self.width;
        let phi = dot(x, &basis[1]).atan2(dot(x, &basis[0]));
        let (lo, hi) = (phi - w, phi + w);
        let mut k = (lo / step - 0.5).floor() as i64;
        let mut acc = 0.0;
        loop {
            let a = (k as f64 + 0.5) * step;
            if a >= hi {
                break;
            }
            let (s0, s1) = (a.max(lo), (a + step).min(hi));
            let v0 = self.values[k.rem_euclid(n as i64) as usize];
            let v1 = self.values[(k + 1).rem_euclid(n as i64) as usize];
            let (mid, half) = (0.5 * (s0 + s1), 0.5 * (s1 - s0));
            for (z, wt) in NODES.iter().zip(WEIGHTS) {
                let p = mid + half * z;
                let u = (p - phi) / w;
                let kern = (1.0 - u * u).powi(2);
                acc += wt * half * kern * (v0 + (v1 - v0) * (p - a) / step);
            }
            k += 1;
        }
        acc * 15.0 / (16.0 * w)
    }

    fn eval_nodes(&self, x: &[f64]) -> f64 {
        let (mut acc, mut mass) = (0.0, 0.0);
        self.index.for_each_near(x, |j| {
            let s = angle_between(x, self.mesh.node(j)) / self.width;
            if s < 1.0 {
                let w = (1.0 - s * s).powi(2) * self.mesh.weight(j);
                acc += w * self.values[j];
                mass += w;
            }
        });
        acc / mass
    }
}

/// The family `psi_t`, `t in [0, 1]`, with `psi_0 = id`.
#[derive(Debug)]
pub struct DiffeoFamily {
    pole: Pole,
    eps: f64,
    /// Latitude beyond which every `psi_t` is the identity.
    l0: f64,
    delta: f64,
    mass: f64,
    theta: Option<SmoothedTheta>,
    /// `min over X` of the latitude of `psi_1^{-1}(x)`.
    image_margin: f64,
    separation: f64,
}

fn smoothstep_primitive(u: f64) -> f64 {
    u * u * u * u * (2.5 + u * (-3.0 + u))
}

impl DiffeoFamily {
    pub fn pole(&self) -> &Pole {
        &self.pole
    }

    pub fn eps(&self) -> f64 {
        self.eps
    }

    pub fn dim(&self) -> usize {
        self.pole.coords().len() - 1
    }

    pub fn smoothed_theta(&self) -> Option<&SmoothedTheta> {
        self.theta.as_ref()
    }

    /// Smallest latitude of `psi_1^{-1}(x)` over `x in X` (`+inf` for empty `X`).
    pub fn image_margin(&self) -> f64 {
        self.image_margin
    }

    /// Geodesic distance between the projections of `X` and `-X`.
    pub fn separation(&self) -> f64 {
        self.separation
    }

    /// Smoothed `theta` at an equator point (0 for empty `X`).
    pub fn theta_tilde(&self, xbar: &[f64]) -> f64 {
        self.theta.as_ref().map_or(0.0, |t| t.eval(xbar))
    }

    fn plateau_primitive(&self, l: f64) -> f64 {
        let (d, l0) = (self.delta, self.l0);
        if l <= d {
            0.0
        } else if l <= 2.0 * d {
            d * smoothstep_primitive((l - d) / d)
        } else if l <= l0 - 2.0 * d {
            0.5 * d + (l - 2.0 * d)
        } else if l < l0 - d {
            0.5 * d + (l0 - 4.0 * d) + d * (0.5 - smoothstep_primitive((l0 - d - l) / d))
        } else {
            self.mass
        }
    }

    /// New latitude of a point at latitude `l` when the equator moves to `c`.
    pub fn remap(&self, l: f64, c: f64) -> f64 {
        l + c * (1.0 - self.plateau_primitive(l.abs()) / self.mass)
    }

    /// `psi_t(x)`.
    pub fn psi(&self, t: f64, x: &[f64]) -> Result<Vec<f64>> {
        let b = self.pole.coords();
        let l = latitude(x, &self.pole);
        if t == 0.0 || self.theta.is_none() || l.abs() >= self.l0 - self.delta {
            return Ok(x.to_vec());
        }
        let h = horizontal(x, b);
        let len = norm(&h);
        let xbar: Vec<f64> = h.iter().map(|c| c / len).collect();
        let c = t * self.theta_tilde(&xbar);
        Ok(at_latitude(&xbar, b, self.remap(l, c)))
    }

    /// `psi_t^{-1}(y)`, by bisection on the monotone latitude remap.
    pub fn psi_inverse(&self, t: f64, y: &[f64]) -> Result<Vec<f64>> {
        let b = self.pole.coords();
        let ly = latitude(y, &self.pole);
        if t == 0.0 || self.theta.is_none() || ly.abs() >= self.l0 - self.delta {
            return Ok(y.to_vec());
        }
        let ybar = meridian_project(y, &self.pole)?.into_coords();
        let c = t * self.theta_tilde(&ybar);
        let (mut lo, mut hi) = (-FRAC_PI_2, FRAC_PI_2);
        for _ in 0..200 {
            let mid = 0.5 * (lo + hi);
            if self.remap(mid, c) < ly {
                lo = mid;
            } else {
                hi = mid;
            }
            if hi - lo < 1e-15 {
                break;
            }
        }
        Ok(at_latitude(&ybar, b, 0.5 * (lo + hi)))
    }

    /// `psi_t` as a map of S^n.
    pub fn at(self: &Arc<Self>, t: f64) -> PsiMap {
        PsiMap {
            family: self.clone(),
            t,
        }
    }
}

/// One member `psi_t` of a [`DiffeoFamily`].
pub struct PsiMap {
    family: Arc<DiffeoFamily>,
    t: f64,
}

impl SmoothMap for PsiMap {
    fn domain(&self) -> Domain {
        Domain::Sphere(self.family.dim())
    }

    fn arity_out(&self) -> usize {
        self.family.dim() + 1
    }

    fn eval_into(&self, x: &[f64], out: &mut [f64]) -> Result<()> {
        out.copy_from_slice(&self.family.psi(self.t, x)?);
        Ok(())
    }

    fn sphere_valued(&self) -> bool {
        true
    }
}

fn equator_mesh(frame: &EquatorFrame, resolution: Option<usize>) -> Result<EquatorMesh> {
    match frame.pole.len() {
        3 => frame.mesh(resolution.unwrap_or(1024)),
        4 => frame.mesh(resolution.unwrap_or(256)),
        n => Err(Error::UnsupportedDimension(n - 1)),
    }
}

/// Builds `psi_t` for the finite set `x_set` on S^n (n = 2 or 3) with pole `b`.
pub fn equivariant_isotopy(x_set: &[Vec<f64>], b: &Pole, params: IsotopyParams) -> Result<DiffeoFamily> {
    let eps = params.eps;
    if !(eps > 0.0 && eps < FRAC_PI_2 / 4.0) {
        return Err(Error::InvalidParameter(format!(
            "cap margin eps must lie in (0, pi/8), got {eps}"
        )));
    }
    let l0 = FRAC_PI_2 - eps / 4.0;
    let delta = eps / 16.0;
    let mut family = DiffeoFamily {
        pole: b.clone(),
        eps,
        l0,
        delta,
        mass: l0 - 3.0 * delta,
        theta: None,
        image_margin: f64::INFINITY,
        separation: std::f64::consts::PI,
    };
    if x_set.is_empty() {
        return Ok(family);
    }
    for x in x_set {
        if latitude(x, b).abs() > FRAC_PI_2 - 2.0 * eps {
            return Err(Error::CapConditionViolated {
                point: x.clone(),
                radius: 2.0 * eps,
            });
        }
    }
    let pix: Vec<Vec<f64>> = x_set
        .iter()
        .map(|x| meridian_project(x, b).map(|u| u.into_coords()))
        .collect::<Result<_>>()?;
    let mut separation = f64::INFINITY;
    for p in &pix {
        for q in &pix {
            let minus_q: Vec<f64> = q.iter().map(|c| -c).collect();
            separation = separation.min(angle_between(p, &minus_q));
        }
    }
    if separation < 1e-9 {
        return Err(Error::MeridianConditionViolated {
            distance: separation,
        });
    }
    let frame = EquatorFrame::new(b.coords());
    let mesh = equator_mesh(&frame, params.equator_resolution)?;
    if separation < 2.0 * mesh.spacing() {
        return Err(Error::NotSeparated {
            distance: separation,
            required: 2.0 * mesh.spacing(),
        });
    }
    let width = match params.mollify_width {
        Some(w) => w,
        None => (eps * separation / 8.0).max(2.5 * mesh.spacing()),
    };
    if !(width >= 2.0 * mesh.spacing()) {
        return Err(Error::WidthTooSmall {
            width,
            spacing: mesh.spacing(),
        });
    }
    let values = crate::par::map(0..mesh.len(), |i| latitude_shift(&pix, eps, mesh.node(i)));
    let chord = 2.0 * (0.5 * width.min(std::f64::consts::PI)).sin() * (1.0 + 1e-9);
    let index = NodeIndex::new(&mesh, chord);
    let circle_basis = (frame.basis.len() == 2).then(|| [frame.basis[0].clone(), frame.basis[1].clone()]);
    let theta = SmoothedTheta {
        mesh,
        circle_basis,
        values,
        width,
        index,
        pix: pix.clone(),
        eps,
    };
    let band = FRAC_PI_2 - eps / 2.0;
    for node in 0..theta.mesh.len() {
        let v = theta.eval(theta.mesh.node(node));
        if v.abs() > band {
            return Err(Error::MollifyRangeViolated(format!(
                "smoothed theta = {v} exceeds pi/2 - eps/2 in magnitude"
            )));
        }
    }
    for p in &pix {
        let v = theta.eval(p);
        if v > -FRAC_PI_2 + 1.5 * eps {
            return Err(Error::MollifyRangeViolated(format!(
                "smoothed theta = {v} on the projection of X exceeds -pi/2 + 3 eps/2; \
                 reduce the mollifier width"
            )));
        }
    }
    family.theta = Some(theta);
    family.separation = separation;
    let mut margin = f64::INFINITY;
    for x in x_set {
        let pre = family.psi_inverse(1.0, x)?;
        let lat = latitude(&pre, b);
        if !(lat > 0.0) {
            return Err(Error::ImageConditionFailed { point: x.clone() });
        }
        margin = margin.min(lat);
    }
    family.image_margin = margin;
    Ok(family)
}

/// The largest admissible `eps` (capped at `cap`) for a set `X` and pole `B`:
/// `X` must avoid the `2 eps` caps with a 10% margin.
pub fn admissible_eps(x_set: &[Vec<f64>], b: &Pole, cap: f64) -> f64 {
    let worst = x_set
        .iter()
        .map(|x| latitude(x, b).abs())
        .fold(0.0, f64::max);
    ((FRAC_PI_2 - worst) / 2.0 * 0.9).min(cap)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::geometry::make_sphere_mesh;
    use crate::linalg::normalized;
    use crate::mapexpr::equivariance_defect;

    fn north() -> Pole {
        Pole::north(2)
    }

    #[test]
    fn theta_values() {
        let pix = vec![vec![1.0, 0.0, 0.0]];
        let eps = 0.2;
        assert!((latitude_shift(&pix, eps, &[1.0, 0.0, 0.0]) + FRAC_PI_2 - eps).abs() < 1e-15);
        assert!((latitude_shift(&pix, eps, &[-1.0, 0.0, 0.0]) - FRAC_PI_2 + eps).abs() < 1e-15);
        assert!(latitude_shift(&pix, eps, &[0.0, 1.0, 0.0]).abs() < 1e-15);
        assert_eq!(latitude_shift(&[], eps, &[0.0, 1.0, 0.0]), 0.0);
    }

    #[test]
    fn empty_set_gives_identity() {
        let fam = Arc::new(equivariant_isotopy(&[], &north(), IsotopyParams::new(0.2)).unwrap());
        let x = normalized(&[0.3, -0.2, 0.5]);
        assert_eq!(fam.psi(1.0, &x).unwrap(), x);
    }

    #[test]
    fn single_equator_point() {
        let x = vec![vec![0.0, 1.0, 0.0]];
        let fam = Arc::new(equivariant_isotopy(&x, &north(), IsotopyParams::new(0.2)).unwrap());
        assert!(fam.image_margin() > 0.0);
        let mesh = make_sphere_mesh(2, 128).unwrap();
        for t in [0.0, 0.25, 0.5, 1.0] {
            assert!(equivariance_defect(&fam.at(t), &mesh).unwrap() <= 1e-9);
        }
        for i in 0..mesh.len() {
            let p = mesh.node(i);
            assert_eq!(fam.psi(0.0, p).unwrap(), p.to_vec());
            let y = fam.psi(1.0, p).unwrap();
            assert!((norm(&y) - 1.0).abs() < 1e-12);
            let back = fam.psi_inverse(1.0, &y).unwrap();
            assert!(crate::linalg::distance(&back, p) < 1e-9);
        }
    }

    #[test]
    fn opposite_points_violate_meridian_condition() {
        let a = normalized(&[0.6, 0.0, 0.3]);
        let b = normalized(&[-0.6, 0.0, 0.5]);
        let err = equivariant_isotopy(&[a, b], &north(), IsotopyParams::new(0.2)).unwrap_err();
        assert!(matches!(err, Error::MeridianConditionViolated { .. }));
    }

    #[test]
    fn cap_points_rejected() {
        let x = vec![normalized(&[0.05, 0.0, 1.0])];
        assert!(matches!(
            equivariant_isotopy(&x, &north(), IsotopyParams::new(0.2)),
            Err(Error::CapConditionViolated { .. })
        ));
    }

    #[test]
    fn remap_is_monotone_and_odd() {
        let x = vec![vec![0.0, 1.0, 0.0]];
        let fam = equivariant_isotopy(&x, &north(), IsotopyParams::new(0.3)).unwrap();
        for c in [-1.3, -0.4, 0.0, 0.9, 1.3] {
            let mut prev = f64::NEG_INFINITY;
            for k in 0..=400 {
                let l = -FRAC_PI_2 + k as f64 * std::f64::consts::PI / 400.0;
                let v = fam.remap(l, c);
                assert!(v > prev);
                assert_eq!(fam.remap(-l, -c), -v);
                prev = v;
            }
            assert_eq!(fam.remap(0.0, c), c);
        }
    }
}
