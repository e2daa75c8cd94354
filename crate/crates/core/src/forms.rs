//! Quadrature of pulled-back volume forms and boundary forms
//! `m_k dm_1 ^ ... ^ dm_n` (with `dm_k` omitted), plus the degree and
//! winding certificates derived from them.

use serde::Serialize;

use crate::error::{Error, Result};
use crate::geometry::{
    ball_volume, BoundaryRule, CurveMesh, CylinderMesh, DiskMesh, QuadratureRule, SphereMesh,
};
use crate::linalg::{compensated_sum, det, norm};
use crate::mapexpr::{directional_derivative, jacobian, JacobianStencil, SmoothMap};

/// An integral value with a refinement-based error estimate.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct IntegralResult {
    pub value: f64,
    /// `|I(resolution) - I(2 * resolution)|`.
    pub error: f64,
    pub resolution: usize,
}

impl IntegralResult {
    pub fn exact(value: f64, resolution: usize) -> Self {
        Self {
            value,
            error: 0.0,
            resolution,
        }
    }

    pub fn refined(coarse: f64, fine: f64, resolution: usize) -> Self {
        Self {
            value: coarse,
            error: (coarse - fine).abs(),
            resolution,
        }
    }
}

/// A mesh with interior and oriented boundary quadrature that can be refined.
pub trait OrientedMesh: Sized {
    fn interior(&self) -> &QuadratureRule;
    fn boundary(&self) -> &BoundaryRule;
    fn resolution(&self) -> usize;
    fn refined(&self) -> Result<Self>;
}

impl OrientedMesh for DiskMesh {
    fn interior(&self) -> &QuadratureRule {
        &self.interior
    }
    fn boundary(&self) -> &BoundaryRule {
        &self.boundary
    }
    fn resolution(&self) -> usize {
        self.resolution
    }
    fn refined(&self) -> Result<Self> {
        self.refine()
    }
}

impl OrientedMesh for CylinderMesh {
    fn interior(&self) -> &QuadratureRule {
        &self.interior
    }
    fn boundary(&self) -> &BoundaryRule {
        &self.boundary
    }
    fn resolution(&self) -> usize {
        self.resolution
    }
    fn refined(&self) -> Result<Self> {
        self.refine()
    }
}

fn check_arity(m: &dyn SmoothMap, expected_in: usize, expected_out: usize) -> Result<()> {
    if m.arity_in() != expected_in {
        return Err(Error::ArityMismatch {
            expected: expected_in,
            found: m.arity_in(),
        });
    }
    if m.arity_out() != expected_out {
        return Err(Error::ArityMismatch {
            expected: expected_out,
            found: m.arity_out(),
        });
    }
    Ok(())
}

/// `sum_i w_i det Dm(x_i)` in node order with compensated summation.
pub fn volume_sum(m: &dyn SmoothMap, rule: &QuadratureRule, stencil: JacobianStencil) -> Result<f64> {
    check_arity(m, rule.dim, rule.dim)?;
    let n = rule.dim;
    let terms = crate::par::try_map(0..rule.len(), |i| {
        let j = jacobian(m, rule.point(i), stencil)?;
        Ok(rule.weights[i] * det(&j, n))
    })?;
    Ok(compensated_sum(terms))
}

/// `sum_i w_i c(x_i) det[D_{e_a} m_{forms[b]}]` over a boundary rule, where
/// `c` is the coordinate `coeff` of `m` (or 1) and `e_a` the node frame.
pub fn surface_sum(
    m: &dyn SmoothMap,
    rule: &BoundaryRule,
    coeff: Option<usize>,
    forms: &[usize],
    stencil: JacobianStencil,
) -> Result<f64> {
    if forms.len() != rule.tangent_dim {
        return Err(Error::ArityMismatch {
            expected: rule.tangent_dim,
            found: forms.len(),
        });
    }
    if m.arity_in() != rule.ambient {
        return Err(Error::ArityMismatch {
            expected: rule.ambient,
            found: m.arity_in(),
        });
    }
    let k = forms.len();
    let amb = rule.ambient;
    let terms = crate::par::try_map(0..rule.len(), |i| {
        let x = rule.point(i);
        let frame = rule.frame(i);
        let tag = rule.tags[i];
        let mut mat = vec![0.0; k * k];
        for a in 0..k {
            let e = &frame[a * amb..(a + 1) * amb];
            let d = directional_derivative(m, x, e, stencil, |y| tag.retract(y))?;
            for (b, &f) in forms.iter().enumerate() {
                mat[b * k + a] = d[f];
            }
        }
        let c = match coeff {
            Some(c) => m.eval(x)?[c],
            None => 1.0,
        };
        Ok(rule.weights[i] * c * det(&mat, k))
    })?;
    Ok(compensated_sum(terms))
}

/// The coordinates other than `k`, in order.
pub fn remaining(n: usize, k: usize) -> Vec<usize> {
    (0..n).filter(|&i| i != k).collect()
}

/// `int det Dm` over the interior, refined at twice the resolution for the
/// error estimate.
pub fn volume_pullback_integral<M: OrientedMesh>(
    m: &dyn SmoothMap,
    mesh: &M,
    stencil: JacobianStencil,
) -> Result<IntegralResult> {
    let coarse = volume_sum(m, mesh.interior(), stencil)?;
    let fine = volume_sum(m, mesh.refined()?.interior(), stencil)?;
    Ok(IntegralResult::refined(coarse, fine, mesh.resolution()))
}

/// `int m_k dm_rest` over the boundary (0-based `k`), optionally restricted
/// to one tagged boundary piece.
pub fn boundary_form_integral<M: OrientedMesh>(
    m: &dyn SmoothMap,
    mesh: &M,
    k: usize,
    part: Option<crate::geometry::BoundaryTag>,
    stencil: JacobianStencil,
) -> Result<IntegralResult> {
    let n = mesh.boundary().ambient;
    check_arity(m, n, n)?;
    if k >= n {
        return Err(Error::InvalidParameter(format!("coordinate index {k} out of range")));
    }
    let forms = remaining(n, k);
    let sum = |rule: &BoundaryRule| -> Result<f64> {
        match part {
            Some(tag) => surface_sum(m, &rule.restrict(tag)?, Some(k), &forms, stencil),
            None => surface_sum(m, rule, Some(k), &forms, stencil),
        }
    };
    let coarse = sum(mesh.boundary())?;
    let fine = sum(mesh.refined()?.boundary())?;
    Ok(IntegralResult::refined(coarse, fine, mesh.resolution()))
}

/// Both sides of the Stokes identity for the distinguished coordinate `k`.
#[derive(Debug, Clone, Copy, Serialize)]
pub struct StokesCheck {
    pub volume: IntegralResult,
    /// Raw `int m_k dm_rest`.
    pub boundary: IntegralResult,
    /// `(-1)^k` for 0-based `k`: `int det Dm = sign * boundary`.
    pub sign: f64,
    pub residual: f64,
    /// Residual at twice the resolution.
    pub refined_residual: f64,
}

/// Compares `int det Dm` with `(-1)^k int m_k dm_rest` (0-based `k`), at
/// the mesh resolution and at twice it.
pub fn stokes_check<M: OrientedMesh>(
    m: &dyn SmoothMap,
    mesh: &M,
    k: usize,
    stencil: JacobianStencil,
) -> Result<StokesCheck> {
    let n = mesh.interior().dim;
    check_arity(m, n, n)?;
    if k >= n {
        return Err(Error::InvalidParameter(format!("coordinate index {k} out of range")));
    }
    let forms = remaining(n, k);
    let sign = if k % 2 == 0 { 1.0 } else { -1.0 };
    let fine_mesh = mesh.refined()?;
    let v0 = volume_sum(m, mesh.interior(), stencil)?;
    let v1 = volume_sum(m, fine_mesh.interior(), stencil)?;
    let b0 = surface_sum(m, mesh.boundary(), Some(k), &forms, stencil)?;
    let b1 = surface_sum(m, fine_mesh.boundary(), Some(k), &forms, stencil)?;
    Ok(StokesCheck {
        volume: IntegralResult::refined(v0, v1, mesh.resolution()),
        boundary: IntegralResult::refined(b0, b1, mesh.resolution()),
        sign,
        residual: (v0 - sign * b0).abs(),
        refined_residual: (v1 - sign * b1).abs(),
    })
}

/// `|int det Dm - (-1)^k int m_k dm_rest|`.
pub fn stokes_residual<M: OrientedMesh>(
    m: &dyn SmoothMap,
    mesh: &M,
    k: usize,
    stencil: JacobianStencil,
) -> Result<f64> {
    Ok(stokes_check(m, mesh, k, stencil)?.residual)
}

/// Default stencil for curve derivatives: order 4 with `h = 1e-4`, which
/// keeps the truncation error below the trapezoid rule's spectral accuracy.
pub fn curve_stencil() -> JacobianStencil {
    JacobianStencil { h: 1e-4, order: 4 }
}

fn check_on_circle(g: &dyn SmoothMap, curve: &CurveMesh) -> Result<Vec<f64>> {
    check_arity(g, 1, 2)?;
    let values = crate::par::try_map(0..curve.samples, |i| g.eval(&[curve.t(i)]))?;
    for (i, v) in values.iter().enumerate() {
        let n = norm(v);
        if (n - 1.0).abs() > 1e-9 {
            return Err(Error::NotOnCircle { t: curve.t(i), norm: n });
        }
    }
    Ok(values.concat())
}

fn curve_sum(
    g: &dyn SmoothMap,
    curve: &CurveMesh,
    integrand: impl Fn(&[f64], &[f64]) -> f64 + Sync,
    stencil: JacobianStencil,
) -> Result<f64> {
    let dt = curve.spacing();
    let terms = crate::par::try_map(0..curve.samples, |i| {
        let t = [curve.t(i)];
        let v = g.eval(&t)?;
        let d = directional_derivative(g, &t, &[1.0], stencil, |_| {})?;
        Ok(dt * integrand(&v, &d))
    })?;
    Ok(compensated_sum(terms))
}

/// Net arclength `int_0^1 (g_1 g_2' - g_2 g_1') dt` of a closed curve in
/// S^1, by the trapezoid rule.
pub fn winding_integral(g: &dyn SmoothMap, curve: &CurveMesh) -> Result<IntegralResult> {
    check_on_circle(g, curve)?;
    let f = |v: &[f64], d: &[f64]| v[0] * d[1] - v[1] * d[0];
    let coarse = curve_sum(g, curve, f, curve_stencil())?;
    let fine = curve_sum(g, &curve.refine(), f, curve_stencil())?;
    Ok(IntegralResult::refined(coarse, fine, curve.samples))
}

/// `int_0^1 g_a g_b' dt` (0-based `a`, `b`) of a closed curve.
pub fn curve_form_integral(
    g: &dyn SmoothMap,
    curve: &CurveMesh,
    a: usize,
    b: usize,
) -> Result<IntegralResult> {
    check_arity(g, 1, g.arity_out())?;
    let f = move |v: &[f64], d: &[f64]| v[a] * d[b];
    let coarse = curve_sum(g, curve, f, curve_stencil())?;
    let fine = curve_sum(g, &curve.refine(), f, curve_stencil())?;
    Ok(IntegralResult::refined(coarse, fine, curve.samples))
}

/// Degree of a sphere self-map with its distance to the nearest integer.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct Degree {
    pub degree: i64,
    /// `int_{S^{n-1}} m_1 dm_2 ^ ... ^ dm_n / |D^n|`.
    pub value: f64,
    pub residual: f64,
}

/// Reliability threshold for rounding degree and winding estimates.
pub const RELIABILITY_THRESHOLD: f64 = 0.1;

/// Degree of `m: S^{n-1} -> S^{n-1}` as the normalised boundary integral.
pub fn mapping_degree(m: &dyn SmoothMap, mesh: &SphereMesh, stencil: JacobianStencil) -> Result<Degree> {
    let n = mesh.ambient_dim();
    check_arity(m, n, n)?;
    for i in 0..mesh.len() {
        let v = m.eval(mesh.node(i))?;
        let r = norm(&v);
        if (r - 1.0).abs() > 1e-6 {
            return Err(Error::NotSphereValued {
                point: mesh.node(i).to_vec(),
                norm: r,
            });
        }
    }
    let rule = mesh.boundary_rule();
    let value = surface_sum(m, &rule, Some(0), &remaining(n, 0), stencil)? / ball_volume(n);
    let degree = value.round();
    let residual = (value - degree).abs();
    if residual > RELIABILITY_THRESHOLD {
        return Err(Error::UnreliableDegree { value, residual });
    }
    Ok(Degree {
        degree: degree as i64,
        value,
        residual,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::geometry::{make_disk_mesh, make_sphere_mesh};
    use crate::mapexpr::{parse_map, Domain, MapExpr};
    use std::f64::consts::PI;

    fn st() -> JacobianStencil {
        JacobianStencil::default()
    }

    #[test]
    fn identity_boundary_integrals() {
        let d2 = make_disk_mesh(2, 64).unwrap();
        let id = MapExpr::identity(Domain::Disk(2));
        let b = boundary_form_integral(&id, &d2, 0, None, st()).unwrap();
        assert!((b.value - PI).abs() < 1e-6);
        let d3 = make_disk_mesh(3, 16).unwrap();
        let id3 = MapExpr::identity(Domain::Disk(3));
        let b = boundary_form_integral(&id3, &d3, 0, None, st()).unwrap();
        assert!((b.value - 4.0 * PI / 3.0).abs() < 1e-5);
    }

    #[test]
    fn square_map_residual() {
        let mesh = make_disk_mesh(2, 64).unwrap();
        let m = parse_map("(x1^2, x2)", Domain::Disk(2)).unwrap();
        let s = stokes_check(&m, &mesh, 0, st()).unwrap();
        assert!(s.residual <= 1e-5);
        assert!(s.volume.value.abs() < 1e-9);
    }

    #[test]
    fn winding_examples() {
        let curve = CurveMesh::new(256).unwrap();
        for (k, want) in [(1.0, 2.0 * PI), (3.0, 6.0 * PI), (-1.0, -2.0 * PI)] {
            let src = format!("(cos({k}*2*pi*x1), sin({k}*2*pi*x1))");
            let g = parse_map(&src, Domain::Curve).unwrap();
            let w = winding_integral(&g, &curve).unwrap();
            assert!((w.value - want).abs() <= 1e-10, "{k}: {}", w.value);
        }
        let off = parse_map("(2*cos(x1), sin(x1))", Domain::Curve).unwrap();
        assert!(matches!(winding_integral(&off, &curve), Err(Error::NotOnCircle { .. })));
    }

    #[test]
    fn degree_examples() {
        let s1 = make_sphere_mesh(1, 256).unwrap();
        let id = MapExpr::identity(Domain::Sphere(1));
        let d = mapping_degree(&id, &s1, st()).unwrap();
        assert_eq!(d.degree, 1);
        assert!(d.residual <= 1e-6);
        let triple = parse_map(
            "(cos(3*atan2(x2, x1)), sin(3*atan2(x2, x1)))",
            Domain::Sphere(1),
        )
        .unwrap();
        assert_eq!(mapping_degree(&triple, &s1, st()).unwrap().degree, 3);
        let s2 = make_sphere_mesh(2, 128).unwrap();
        let d = mapping_degree(&MapExpr::identity(Domain::Sphere(2)), &s2, st()).unwrap();
        assert_eq!(d.degree, 1);
        assert!(d.residual <= 1e-5);
        let flat = parse_map("(x1, x2, 0)", Domain::Sphere(2)).unwrap();
        assert!(matches!(
            mapping_degree(&flat, &s2, st()),
            Err(Error::NotSphereValued { .. })
        ));
    }

    #[test]
    fn arity_is_checked() {
        let mesh = make_disk_mesh(2, 8).unwrap();
        let m = parse_map("(x1, x2, x1)", Domain::Disk(2)).unwrap();
        assert!(matches!(
            volume_pullback_integral(&m, &mesh, st()),
            Err(Error::ArityMismatch { .. })
        ));
    }
}
