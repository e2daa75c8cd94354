//! Transfer of a map `D^3 -> S^2` to a map from the cylinder
//! `C = D^2 x [-1, 1]` to its boundary surface `S = ∂C`.
//!
//! The domain side is `kappa(u, z) = (sin(c(|u|)) u/|u|, z cos(c(|u|)))`
//! with the odd colatitude profile `c(s) = pi/2 (15s - 10s^3 + 3s^5)/8`.
//! It collapses each vertical line of `V` to a point of the equator and
//! sends `D_±` to the closed hemispheres. `c` is flat to second order at
//! `s = 1`, which widens the part of `D_±` spent near the equator. The target side sends `S^2` to
//! `S`: the caps `|p| < rho0` go onto `D_±` through `p -> q(|p|/rho0) p/|p|`
//! with `q(s) = (15s - 10s^3 + 3s^5)/8`, and the remaining band onto `V` by
//! `(p/|p|, y3/sqrt(1 - rho0^2))`.

use std::f64::consts::FRAC_PI_2;
use std::sync::Arc;

use serde::Serialize;

use crate::error::{Error, Result};
use crate::geometry::{CylinderMesh, Pole};
use crate::linalg::{distance, mat_t_vec, mat_vec, rotation_to_axis};
use crate::mapexpr::{Domain, SmoothMap};

/// Horizontal radius of the cap boundary on S^2.
pub const CAP_RADIUS: f64 = 0.9;

/// Colatitude profile of the collapse.
pub fn colatitude_profile(s: f64) -> f64 {
    let s2 = s * s;
    FRAC_PI_2 * s * (15.0 + s2 * (-10.0 + 3.0 * s2)) / 8.0
}

/// The collapse `C -> D^3`.
pub fn collapse_vertical(p: &[f64]) -> [f64; 3] {
    let rho = p[0].hypot(p[1]);
    let c = colatitude_profile(rho);
    // sin(c(rho)) / rho, continued to rho = 0
    let s = if rho < 1e-4 {
        let (a, b) = (FRAC_PI_2 * 15.0 / 8.0, -FRAC_PI_2 * 10.0 / 8.0);
        a + (b - a * a * a / 6.0) * rho * rho
    } else {
        c.sin() / rho
    };
    [s * p[0], s * p[1], p[2] * c.cos()]
}

/// The map `S^2 -> S` onto the cylinder surface.
pub fn sphere_to_cylinder_surface(y: &[f64]) -> [f64; 3] {
    let rho = y[0].hypot(y[1]);
    let height = (1.0 - CAP_RADIUS * CAP_RADIUS).sqrt();
    if rho < CAP_RADIUS {
        // p(rho / CAP_RADIUS) / rho with p(s) = (15s - 10s^3 + 3s^5)/8
        let s2 = (rho / CAP_RADIUS).powi(2);
        let scale = (15.0 + s2 * (-10.0 + 3.0 * s2)) / (8.0 * CAP_RADIUS);
        [scale * y[0], scale * y[1], 1f64.copysign(y[2])]
    } else {
        [y[0] / rho, y[1] / rho, (y[2] / height).clamp(-1.0, 1.0)]
    }
}

/// `f = tau ∘ R_A^T ∘ f† ∘ R_B ∘ kappa`.
pub struct CylinderMap {
    inner: Arc<dyn SmoothMap>,
    domain_rotation: Vec<f64>,
    target_rotation: Vec<f64>,
}

/// Checks of the transferred map on a cylinder mesh.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct CylinderChecks {
    /// Largest spread of values along a vertical line of `V`.
    pub vertical_spread: f64,
    /// Largest `|f_3|` on the equator of `V`.
    pub equator_height: f64,
    pub lines_checked: usize,
}

/// Transfers `inner: D^3 -> S^2`, hemisphere-preserving on the boundary
/// for the domain pole `b` and target pole `a`.
pub fn cylinder_map(inner: Arc<dyn SmoothMap>, b: &Pole, a: &Pole) -> Result<CylinderMap> {
    if inner.arity_in() != 3 || inner.arity_out() != 3 {
        return Err(Error::ArityMismatch {
            expected: 3,
            found: inner.arity_in(),
        });
    }
    Ok(CylinderMap {
        inner: inner,
        domain_rotation: rotation_to_axis(b.coords()),
        target_rotation: rotation_to_axis(a.coords()),
    })
}

impl CylinderMap {
    /// The value of `R_A^T f† R_B kappa` on S^2, before moving to `S`.
    pub fn sphere_value(&self, p: &[f64]) -> Result<Vec<f64>> {
        let y = mat_vec(&self.domain_rotation, &collapse_vertical(p));
        let v = self.inner.eval(&y)?;
        Ok(mat_t_vec(&self.target_rotation, &v))
    }

    /// Verifies constancy on vertical lines of `V` and that `D_±` land in `S_±`.
    pub fn verify(&self, mesh: &CylinderMesh) -> Result<CylinderChecks> {
        let mut spread: f64 = 0.0;
        let heights = mesh.side_heights.max(2);
        for i in 0..mesh.side_angles {
            let alpha = 2.0 * std::f64::consts::PI * (i as f64 + 0.5) / mesh.side_angles as f64;
            let (s, c) = alpha.sin_cos();
            let base = self.eval(&[c, s, 0.0])?;
            for j in 0..heights {
                let z = -1.0 + 2.0 * j as f64 / (heights - 1) as f64;
                let d = distance(&self.eval(&[c, s, z])?, &base);
                if d > 1e-9 {
                    return Err(Error::NotConstantOnV { angle: alpha, spread: d });
                }
                spread = spread.max(d);
            }
        }
        for (tag, sign) in [(crate::geometry::BoundaryTag::Top, 1.0), (crate::geometry::BoundaryTag::Bottom, -1.0)] {
            let face = mesh.boundary.restrict(tag)?;
            for i in 0..face.len() {
                let x = face.point(i);
                if sign * self.eval(x)?[2] < 0.0 {
                    return Err(Error::HemispherePreservationViolated { point: x.to_vec() });
                }
            }
        }
        let mut height: f64 = 0.0;
        for p in mesh.equator.chunks(3) {
            height = height.max(self.eval(p)?[2].abs());
        }
        Ok(CylinderChecks {
            vertical_spread: spread,
            equator_height: height,
            lines_checked: mesh.side_angles,
        })
    }
}

impl SmoothMap for CylinderMap {
    fn domain(&self) -> Domain {
        Domain::Cylinder
    }

    fn arity_out(&self) -> usize {
        3
    }

    fn eval_into(&self, p: &[f64], out: &mut [f64]) -> Result<()> {
        let w = self.sphere_value(p)?;
        out.copy_from_slice(&sphere_to_cylinder_surface(&w));
        Ok(())
    }
}

/// Degree-`k` analogue of the identity on S^2 in the horizontal plane:
/// `(rho e^{i phi}, x3) -> (rho e^{i k phi}, x3)`, odd for odd `k`.
pub fn horizontal_power(k: u32) -> impl Fn(&[f64], &mut [f64]) -> Result<()> + Send + Sync {
    move |x: &[f64], out: &mut [f64]| {
        let rho = x[0].hypot(x[1]);
        let phi = x[1].atan2(x[0]) * k as f64;
        out[0] = rho * phi.cos();
        out[1] = rho * phi.sin();
        out[2] = x[2];
        Ok(())
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::linalg::norm;

    #[test]
    fn collapse_sends_faces_to_hemispheres_and_lines_to_points() {
        let top = collapse_vertical(&[0.3, 0.4, 1.0]);
        assert!((norm(&top) - 1.0).abs() < 1e-15 && top[2] > 0.0);
        let a = collapse_vertical(&[0.6, 0.8, 0.7]);
        let b = collapse_vertical(&[0.6, 0.8, -0.2]);
        assert!(distance(&a, &b) < 1e-15);
        assert!(a[2].abs() < 1e-15);
        assert_eq!(collapse_vertical(&[0.0, 0.0, 0.5]), [0.0, 0.0, 0.5]);
        assert!(norm(&collapse_vertical(&[0.2, -0.1, 0.3])) < 1.0);
    }

    #[test]
    fn surface_map_lands_on_cylinder_boundary() {
        for y in [[0.0, 0.0, 1.0], [0.3, 0.0, 0.9539392014169456], [0.6, 0.8, 0.0], [0.8, 0.0, -0.6]] {
            let s = sphere_to_cylinder_surface(&y);
            let h = s[0].hypot(s[1]);
            assert!((h.max(s[2].abs()) - 1.0).abs() < 1e-12, "{y:?} -> {s:?}");
        }
        let rim = sphere_to_cylinder_surface(&[CAP_RADIUS, 0.0, (0.75f64).sqrt()]);
        assert!(distance(&rim, &[1.0, 0.0, 1.0]) < 1e-12);
    }
}
