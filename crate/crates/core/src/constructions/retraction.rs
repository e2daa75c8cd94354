use std::sync::Arc;

use crate::error::{Error, Result};
use crate::linalg::{dot, norm};
use crate::mapexpr::{Domain, SmoothMap};

/// Default threshold below which `f(x) = x` or `f(x) = f(-x)` is reported
/// as a witness.
pub const WITNESS_DELTA: f64 = 1e-6;

/// The retraction `D^n -> S^{n-1}` sending `x` to the point where the ray
/// from `f(x)` through `x` leaves the ball.
pub struct BrouwerRetraction {
    f: Arc<dyn SmoothMap>,
    delta: f64,
}

pub fn brouwer_retraction(f: Arc<dyn SmoothMap>, delta: f64) -> Result<BrouwerRetraction> {
    let n = match f.domain() {
        Domain::Disk(n) => n,
        other => {
            return Err(Error::InvalidParameter(format!(
                "retraction needs a map on a disk, got {other}"
            )))
        }
    };
    if f.arity_out() != n {
        return Err(Error::ArityMismatch {
            expected: n,
            found: f.arity_out(),
        });
    }
    Ok(BrouwerRetraction { f, delta })
}

impl SmoothMap for BrouwerRetraction {
    fn domain(&self) -> Domain {
        self.f.domain()
    }

    fn arity_out(&self) -> usize {
        self.f.arity_out()
    }

    fn eval_into(&self, x: &[f64], out: &mut [f64]) -> Result<()> {
        self.f.eval_into(x, out)?;
        let d: Vec<f64> = x.iter().zip(out.iter()).map(|(a, b)| a - b).collect();
        let dn = norm(&d);
        if dn < self.delta {
            return Err(Error::FixedPointEncountered {
                point: x.to_vec(),
                defect: dn,
            });
        }
        // larger root of |x + t d|^2 = 1, written to avoid cancellation
        let a = dn * dn;
        let b = 2.0 * dot(x, &d);
        let c = dot(x, x) - 1.0;
        let disc = (b * b - 4.0 * a * c).max(0.0).sqrt();
        let t = if b > 0.0 {
            (-2.0 * c / (b + disc)).max(0.0)
        } else {
            (-b + disc) / (2.0 * a)
        };
        for ((o, xi), di) in out.iter_mut().zip(x).zip(&d) {
            *o = xi + t * di;
        }
        let r = norm(out);
        out.iter_mut().for_each(|o| *o /= r);
        Ok(())
    }

    fn sphere_valued(&self) -> bool {
        true
    }
}

/// `x -> (f(x) - f(-x)) / |f(x) - f(-x)|`, odd by construction.
pub struct BorsukNormalized {
    f: Arc<dyn SmoothMap>,
    delta: f64,
}

pub fn borsuk_normalize(f: Arc<dyn SmoothMap>, delta: f64) -> Result<BorsukNormalized> {
    if !matches!(f.domain(), Domain::Sphere(_)) {
        return Err(Error::InvalidParameter(format!(
            "odd normalisation needs a map on a sphere, got {}",
            f.domain()
        )));
    }
    Ok(BorsukNormalized { f, delta })
}

impl SmoothMap for BorsukNormalized {
    fn domain(&self) -> Domain {
        self.f.domain()
    }

    fn arity_out(&self) -> usize {
        self.f.arity_out()
    }

    fn eval_into(&self, x: &[f64], out: &mut [f64]) -> Result<()> {
        let minus: Vec<f64> = x.iter().map(|c| -c).collect();
        let far = self.f.eval(&minus)?;
        self.f.eval_into(x, out)?;
        out.iter_mut().zip(&far).for_each(|(o, b)| *o -= b);
        let n = norm(out);
        if n < self.delta {
            return Err(Error::CoincidenceEncountered {
                point: x.to_vec(),
                defect: n,
            });
        }
        out.iter_mut().for_each(|o| *o /= n);
        Ok(())
    }

    fn sphere_valued(&self) -> bool {
        true
    }
}

/// `u -> f(u, sqrt(1 - |u|^2))`: a map on S^n read on the closed upper
/// hemisphere, identified with D^n.
pub struct HemisphereTransfer {
    f: Arc<dyn SmoothMap>,
}

pub fn hemisphere_disk_transfer(f: Arc<dyn SmoothMap>) -> Result<HemisphereTransfer> {
    match f.domain() {
        Domain::Sphere(_) => Ok(HemisphereTransfer { f }),
        other => Err(Error::InvalidParameter(format!(
            "hemisphere transfer needs a map on a sphere, got {other}"
        ))),
    }
}

impl SmoothMap for HemisphereTransfer {
    fn domain(&self) -> Domain {
        Domain::Disk(self.f.arity_in() - 1)
    }

    fn arity_out(&self) -> usize {
        self.f.arity_out()
    }

    fn eval_into(&self, u: &[f64], out: &mut [f64]) -> Result<()> {
        let mut x = u.to_vec();
        x.push((1.0 - dot(u, u)).max(0.0).sqrt());
        self.f.eval_into(&x, out)
    }

    fn sphere_valued(&self) -> bool {
        self.f.sphere_valued()
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::geometry::make_sphere_mesh;
    use crate::mapexpr::{equivariance_defect, parse_map, MapExpr};

    fn arc(src: &str, domain: Domain) -> Arc<dyn SmoothMap> {
        Arc::new(parse_map(src, domain).unwrap())
    }

    #[test]
    fn retraction_from_centre() {
        let g = brouwer_retraction(arc("(0, 0)", Domain::Disk(2)), WITNESS_DELTA).unwrap();
        let v = g.eval(&[0.6, 0.0]).unwrap();
        assert!((v[0] - 1.0).abs() < 1e-15 && v[1].abs() < 1e-15);
    }

    #[test]
    fn retraction_fixes_boundary() {
        let f = arc("(0.3*x1^2 - 0.2, 0.5*x2*x1 + 0.1)", Domain::Disk(2));
        let g = brouwer_retraction(f, WITNESS_DELTA).unwrap();
        for k in 0..16 {
            let (s, c) = (k as f64 * 0.4).sin_cos();
            let v = g.eval(&[c, s]).unwrap();
            assert!((v[0] - c).abs() < 1e-12 && (v[1] - s).abs() < 1e-12);
        }
    }

    #[test]
    fn retraction_reports_fixed_points() {
        let g = brouwer_retraction(Arc::new(MapExpr::identity(Domain::Disk(2))), WITNESS_DELTA)
            .unwrap();
        assert!(matches!(
            g.eval(&[0.2, 0.1]),
            Err(Error::FixedPointEncountered { .. })
        ));
    }

    #[test]
    fn odd_normalisation() {
        let proj = borsuk_normalize(arc("(x1, x2)", Domain::Sphere(2)), WITNESS_DELTA).unwrap();
        let v = proj.eval(&[0.6, 0.0, 0.8]).unwrap();
        assert!((v[0] - 1.0).abs() < 1e-15);
        assert!(matches!(
            proj.eval(&[0.0, 0.0, 1.0]),
            Err(Error::CoincidenceEncountered { .. })
        ));
        let constant = borsuk_normalize(arc("(1, 2)", Domain::Sphere(2)), WITNESS_DELTA).unwrap();
        assert!(constant.eval(&[1.0, 0.0, 0.0]).is_err());
        let circle = make_sphere_mesh(1, 64).unwrap();
        let c = borsuk_normalize(arc("(x1 + 0.3*x2^2, x2)", Domain::Sphere(1)), WITNESS_DELTA)
            .unwrap();
        assert_eq!(equivariance_defect(&c, &circle).unwrap(), 0.0);
    }

    #[test]
    fn hemisphere_transfer() {
        let f = hemisphere_disk_transfer(arc("(x3)", Domain::Sphere(2))).unwrap();
        assert!((f.eval(&[0.6, 0.0]).unwrap()[0] - 0.8).abs() < 1e-15);
        assert_eq!(f.domain(), Domain::Disk(2));
        let odd = hemisphere_disk_transfer(arc("(x1, x2, x3)", Domain::Sphere(2))).unwrap();
        let a = odd.eval(&[0.6, 0.8]).unwrap();
        let b = odd.eval(&[-0.6, -0.8]).unwrap();
        assert!(a.iter().zip(&b).all(|(p, q)| (p + q).abs() < 1e-12));
    }
}
