//! The three-shell map on D^3: `f̂(3t x)` on the core `t <= 1/3`,
//! `g ∘ psi_{3t-1}` on the middle shell and the normalised blend
//! `(3t-2) g†(x) + (3-3t) g_*(x)` on the outer shell, for `y = t x`.
//!
//! The radius enters through a reparametrisation that is constant on bands
//! of width 0.02 around the seams `t = 1/3, 2/3` and joins the identity in
//! a C^2 way, so the pieces meet smoothly.

use std::sync::Arc;

use super::isotopy::DiffeoFamily;
use crate::error::{Error, Result};
use crate::geometry::SphereMesh;
use crate::linalg::{distance, neg, norm};
use crate::mapexpr::{Domain, SmoothMap};

/// Width of the flat band around each seam.
pub const SEAM_BAND: f64 = 0.02;

fn smoothstep(u: f64) -> f64 {
    u * u * u * (10.0 + u * (-15.0 + 6.0 * u))
}

/// Monotone C^2 reparametrisation of the radius, flat within `SEAM_BAND / 2`
/// of each seam and equal to the identity beyond `SEAM_BAND`.
pub fn seam_radius(t: f64) -> f64 {
    for seam in [1.0 / 3.0, 2.0 / 3.0] {
        let s = t - seam;
        let u = s.abs() / SEAM_BAND;
        if u < 1.0 {
            let phi = if u <= 0.5 { 0.0 } else { smoothstep(2.0 * u - 1.0) };
            return seam + s * phi;
        }
    }
    t
}

/// `y -> m(y / |y|)`: the radial extension of a sphere map to the ball,
/// singular at the origin.
pub struct RadialExtension {
    m: Arc<dyn SmoothMap>,
}

pub fn radial_extension(m: Arc<dyn SmoothMap>) -> RadialExtension {
    RadialExtension { m }
}

impl SmoothMap for RadialExtension {
    fn domain(&self) -> Domain {
        Domain::Disk(self.m.arity_in())
    }

    fn arity_out(&self) -> usize {
        self.m.arity_out()
    }

    fn eval_into(&self, y: &[f64], out: &mut [f64]) -> Result<()> {
        let r = norm(y);
        if r == 0.0 {
            return Err(Error::Domain {
                point: y.to_vec(),
                domain: "punctured ball".into(),
            });
        }
        let x: Vec<f64> = y.iter().map(|c| c / r).collect();
        self.m.eval_into(&x, out)
    }

    fn sphere_valued(&self) -> bool {
        self.m.sphere_valued()
    }
}

pub struct Graft {
    fhat: Arc<dyn SmoothMap>,
    psi: Arc<DiffeoFamily>,
    g: Arc<dyn SmoothMap>,
    replacement: Arc<dyn SmoothMap>,
    blend_margin: f64,
}

impl Graft {
    /// `min |g†(x) + g_*(x)|` over the validation mesh.
    pub fn blend_margin(&self) -> f64 {
        self.blend_margin
    }

    fn g_psi(&self, t: f64, x: &[f64]) -> Result<Vec<f64>> {
        self.g.eval(&self.psi.psi(t, x)?)
    }

    /// `g_*(x) = g(psi_1(x))`.
    pub fn g_star(&self, x: &[f64]) -> Result<Vec<f64>> {
        self.g_psi(1.0, x)
    }

    /// The shell value at radius `t` in direction `x`, without reparametrising.
    pub fn shell(&self, t: f64, x: &[f64]) -> Result<Vec<f64>> {
        if t <= 1.0 / 3.0 {
            let y: Vec<f64> = x.iter().map(|c| 3.0 * t * c).collect();
            return self.fhat.eval(&y);
        }
        if t <= 2.0 / 3.0 {
            return self.g_psi(3.0 * t - 1.0, x);
        }
        let a = self.replacement.eval(x)?;
        let b = self.g_star(x)?;
        let v: Vec<f64> = a
            .iter()
            .zip(&b)
            .map(|(p, q)| (3.0 * t - 2.0) * p + (3.0 - 3.0 * t) * q)
            .collect();
        let n = norm(&v);
        if !(n > 1e-12) {
            return Err(Error::DenominatorVanishes { point: x.to_vec(), t });
        }
        Ok(v.into_iter().map(|c| c / n).collect())
    }
}

/// Joins `f̂`, the homotopy `g ∘ psi_t` and `g†` into one map of D^3.
/// Fails when `g†(x) = -g_*(x)` at a node of `check`.
pub fn graft(
    fhat: Arc<dyn SmoothMap>,
    psi: Arc<DiffeoFamily>,
    g: Arc<dyn SmoothMap>,
    replacement: Arc<dyn SmoothMap>,
    check: &SphereMesh,
) -> Result<Graft> {
    if fhat.domain() != Domain::Disk(3) {
        return Err(Error::InvalidParameter(format!("f̂ must be defined on disk3, got {}", fhat.domain())));
    }
    let mut out = Graft {
        fhat,
        psi,
        g,
        replacement,
        blend_margin: f64::INFINITY,
    };
    let margins = crate::par::try_map(0..check.len(), |i| {
        let x = check.node(i);
        Ok(distance(&out.replacement.eval(x)?, &neg(&out.g_star(x)?)))
    })?;
    for (i, m) in margins.iter().enumerate() {
        if !(*m > 1e-9) {
            return Err(Error::DenominatorVanishes {
                point: check.node(i).to_vec(),
                t: 5.0 / 6.0,
            });
        }
    }
    out.blend_margin = margins.into_iter().fold(f64::INFINITY, f64::min);
    Ok(out)
}

impl SmoothMap for Graft {
    fn domain(&self) -> Domain {
        Domain::Disk(3)
    }

    fn arity_out(&self) -> usize {
        3
    }

    fn eval_into(&self, y: &[f64], out: &mut [f64]) -> Result<()> {
        let t = norm(y);
        if t == 0.0 {
            return self.fhat.eval_into(y, out);
        }
        let x: Vec<f64> = y.iter().map(|c| c / t).collect();
        out.copy_from_slice(&self.shell(seam_radius(t), &x)?);
        Ok(())
    }

    fn sphere_valued(&self) -> bool {
        true
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::constructions::{equivariant_isotopy, hemisphere_replacement, IsotopyParams, ReplacementParams};
    use crate::geometry::{make_sphere_mesh, Pole};
    use crate::mapexpr::MapExpr;

    #[test]
    fn seam_radius_is_flat_at_seams_and_monotone() {
        assert_eq!(seam_radius(1.0 / 3.0 + 0.004), 1.0 / 3.0);
        assert_eq!(seam_radius(2.0 / 3.0 - 0.009), 2.0 / 3.0);
        assert_eq!(seam_radius(0.1), 0.1);
        assert_eq!(seam_radius(1.0), 1.0);
        let mut prev = -1.0;
        for k in 0..=10_000 {
            let v = seam_radius(k as f64 / 10_000.0);
            assert!(v >= prev);
            prev = v;
        }
    }

    fn identity_graft() -> Graft {
        let b = Pole::new(vec![1.0, 0.0, 0.0]).unwrap();
        let psi = Arc::new(equivariant_isotopy(&[vec![0.0, 0.0, 1.0]], &b, IsotopyParams::new(0.3)).unwrap());
        let g: Arc<dyn SmoothMap> = Arc::new(MapExpr::identity(Domain::Sphere(2)));
        let gd: Arc<dyn SmoothMap> =
            Arc::new(hemisphere_replacement(g.clone(), psi.clone(), &Pole::north(2), ReplacementParams::default()).unwrap());
        let fhat = Arc::new(radial_extension(g.clone()));
        graft(fhat, psi, g, gd, &make_sphere_mesh(2, 64).unwrap()).unwrap()
    }

    #[test]
    fn pieces_agree_at_seams_and_boundary() {
        let gr = identity_graft();
        let mesh = make_sphere_mesh(2, 32).unwrap();
        for i in 0..mesh.len() {
            let x = mesh.node(i);
            for seam in [1.0 / 3.0, 2.0 / 3.0] {
                let below = gr.shell(seam - 1e-13, x).unwrap();
                let above = gr.shell(seam + 1e-13, x).unwrap();
                assert!(distance(&below, &above) < 1e-9);
            }
            let edge = gr.eval(x).unwrap();
            assert!(distance(&edge, &gr.replacement.eval(x).unwrap()) < 1e-9);
            assert!((norm(&gr.eval(&[0.3 * x[0], 0.3 * x[1], 0.3 * x[2]]).unwrap()) - 1.0).abs() < 1e-12);
        }
        assert!(gr.blend_margin() > 0.0);
    }

    #[test]
    fn antipodal_blend_is_rejected() {
        let b = Pole::new(vec![1.0, 0.0, 0.0]).unwrap();
        let psi = Arc::new(equivariant_isotopy(&[], &b, IsotopyParams::new(0.3)).unwrap());
        let g: Arc<dyn SmoothMap> = Arc::new(MapExpr::identity(Domain::Sphere(2)));
        let minus: Arc<dyn SmoothMap> =
            Arc::new(crate::mapexpr::parse_map("(-x1, -x2, -x3)", Domain::Sphere(2)).unwrap());
        let fhat = Arc::new(radial_extension(g.clone()));
        let err = graft(fhat, psi, g, minus, &make_sphere_mesh(2, 16).unwrap()).err().unwrap();
        assert!(matches!(err, Error::DenominatorVanishes { .. }));
    }
}
