//! The dimension-lowering step: an odd `f: S^n -> S^{n-1}` becomes the odd
//! map `r o f o psi_1` on the equator `E` of `B`, where `psi` pushes
//! `f^{-1}(A)` into the upper hemisphere and `r` retracts onto the equator
//! of `A`.

use std::sync::Arc;

use serde::Serialize;

use super::isotopy::{equivariant_isotopy, DiffeoFamily, IsotopyParams};
use crate::audit::{find_pole, locate_preimages, random_unit};
use crate::error::{Error, Result};
use crate::geometry::{latitude, make_sphere_mesh, meridian_project, EquatorFrame, Pole};
use crate::linalg::{distance, neg, norm};
use crate::mapexpr::{equivariance_defect, Domain, FnMap, Normalized, SmoothMap, NEAR_ZERO_FLOOR};
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

/// How the poles `A` (target) and `B` (domain) are chosen.
#[derive(Debug, Clone)]
pub enum PoleSelection {
    Given { a: Pole, b: Pole },
    /// `A` uniform from the seed; `B` by rejection sampling against the
    /// meridian and cap conditions.
    Sampled { seed: u64, trials: usize },
}

#[derive(Debug, Clone)]
pub struct ReduceParams {
    pub eps: f64,
    /// Smallest admissible distance from `f o psi_1` to `±A` on `E`.
    pub pole_tolerance: f64,
    /// Resolution of the domain mesh used to locate `f^{-1}(A)`.
    pub preimage_resolution: usize,
    /// Resolution of the equator mesh used for the checks.
    pub check_resolution: usize,
    pub isotopy: IsotopyParams,
}

impl Default for ReduceParams {
    fn default() -> Self {
        Self {
            eps: 0.2,
            pole_tolerance: 1e-6,
            preimage_resolution: 64,
            check_resolution: 64,
            isotopy: IsotopyParams::new(0.2),
        }
    }
}

#[derive(Debug, Clone, Serialize)]
pub struct ReduceReport {
    pub a: Vec<f64>,
    pub b: Vec<f64>,
    /// Sampled points of `f^{-1}(A)` handed to the isotopy.
    pub preimages: Vec<Vec<f64>>,
    /// Preimages dropped for lying in the caps or where `|f|` is tiny.
    pub dropped: usize,
    /// `min over E` of the distance from `f o psi_1` to `±A`.
    pub pole_margin: f64,
    pub equivariance_defect: f64,
    pub nodes_checked: usize,
}

/// `y -> r(f(psi_1(y)))` in intrinsic coordinates: S^{n-1} -> S^{n-2}.
pub struct Reduced {
    f: Normalized<Arc<dyn SmoothMap>>,
    psi: Arc<DiffeoFamily>,
    domain_frame: EquatorFrame,
    target_frame: EquatorFrame,
    a: Pole,
    pub report: ReduceReport,
}

impl Reduced {
    pub fn psi(&self) -> &Arc<DiffeoFamily> {
        &self.psi
    }

    /// `f(psi_1(y))` before the retraction, for an intrinsic point `y`.
    pub fn lifted(&self, y: &[f64]) -> Result<Vec<f64>> {
        let x = self.psi.psi(1.0, &self.domain_frame.embed(y))?;
        self.f.eval(&x)
    }
}

impl SmoothMap for Reduced {
    fn domain(&self) -> Domain {
        Domain::Sphere(self.domain_frame.basis.len() - 1)
    }

    fn arity_out(&self) -> usize {
        self.target_frame.basis.len()
    }

    fn eval_into(&self, y: &[f64], out: &mut [f64]) -> Result<()> {
        let v = self.lifted(y)?;
        let r = meridian_project(&v, &self.a).map_err(|_| Error::PoleHit {
            point: y.to_vec(),
            distance: pole_distance(&v, &self.a),
        })?;
        out.copy_from_slice(&self.target_frame.coordinates(r.coords()));
        Ok(())
    }

    fn sphere_valued(&self) -> bool {
        true
    }
}

fn pole_distance(v: &[f64], a: &Pole) -> f64 {
    distance(v, a.coords()).min(distance(v, &neg(a.coords())))
}

/// Builds the reduced map, validating that `f o psi_1` avoids `±A` on `E`.
pub fn reduce_dimension(f: Arc<dyn SmoothMap>, poles: &PoleSelection, params: &ReduceParams) -> Result<Reduced> {
    let n = match f.domain() {
        Domain::Sphere(n) if n == 2 || n == 3 => n,
        Domain::Sphere(n) => return Err(Error::UnsupportedDimension(n)),
        other => {
            return Err(Error::InvalidParameter(format!("reduction needs a sphere domain, got {other}")));
        }
    };
    if f.arity_out() != n {
        return Err(Error::ArityMismatch {
            expected: n,
            found: f.arity_out(),
        });
    }
    let unit = Normalized(f.clone());
    // zeros of f are never preimages; map them far from every target
    let inner = f.clone();
    let search = FnMap::new(f.domain(), n, move |x: &[f64], out: &mut [f64]| {
        inner.eval_into(x, out)?;
        let r = norm(out);
        out.iter_mut().for_each(|c| *c = if r > 1e-12 { *c / r } else { 0.0 });
        Ok(())
    });
    let mesh = make_sphere_mesh(n, params.preimage_resolution)?;
    let starts = if n <= 2 { 64 } else { 256 };
    let cap = 2.0 * params.eps;
    let keep = |x: &Vec<f64>, b: &Pole| -> Result<bool> {
        Ok(norm(&f.eval(x)?) >= NEAR_ZERO_FLOOR && latitude(x, b).abs() < std::f64::consts::FRAC_PI_2 - cap)
    };
    let (a, b, found) = match poles {
        PoleSelection::Given { a, b } => {
            if a.coords().len() != n || b.coords().len() != n + 1 {
                return Err(Error::ArityMismatch {
                    expected: n,
                    found: a.coords().len(),
                });
            }
            let found = locate_preimages(&search, a.coords(), &mesh, starts)?;
            (a.clone(), b.clone(), found)
        }
        PoleSelection::Sampled { seed, trials } => {
            let mut rng = ChaCha8Rng::seed_from_u64(*seed);
            let a = Pole::new(random_unit(&mut rng, n))?;
            let found = locate_preimages(&search, a.coords(), &mesh, starts)?;
            let usable: Vec<Vec<f64>> = found
                .iter()
                .filter(|x| norm(&f.eval(x).unwrap_or_default()) >= NEAR_ZERO_FLOOR)
                .cloned()
                .collect();
            let choice = find_pole(&usable, n + 1, *trials, seed.wrapping_add(1), 0.05, cap)?;
            (a, Pole::new(choice.pole)?, found)
        }
    };
    let mut preimages = Vec::new();
    for x in &found {
        if keep(x, &b)? {
            preimages.push(x.clone());
        }
    }
    let dropped = found.len() - preimages.len();
    let mut isotopy_params = params.isotopy;
    isotopy_params.eps = params.eps;
    let psi = Arc::new(equivariant_isotopy(&preimages, &b, isotopy_params)?);
    let domain_frame = EquatorFrame::new(b.coords());
    let target_frame = EquatorFrame::new(a.coords());
    let mut reduced = Reduced {
        f: unit,
        psi,
        domain_frame,
        target_frame,
        a: a.clone(),
        report: ReduceReport {
            a: a.coords().to_vec(),
            b: b.coords().to_vec(),
            preimages,
            dropped,
            pole_margin: f64::INFINITY,
            equivariance_defect: 0.0,
            nodes_checked: 0,
        },
    };
    let check = make_sphere_mesh(n - 1, params.check_resolution)?;
    let lifted = crate::par::try_map(0..check.len(), |i| reduced.lifted(check.node(i)))?;
    let mut margin = f64::INFINITY;
    for (i, v) in lifted.iter().enumerate() {
        let d = pole_distance(v, &a);
        if d < params.pole_tolerance {
            return Err(Error::PoleHit {
                point: reduced.domain_frame.embed(check.node(i)),
                distance: d,
            });
        }
        margin = margin.min(d);
    }
    // the projections of X are where psi_1(E) passes closest to X
    for x in &reduced.report.preimages {
        let y = reduced.domain_frame.coordinates(meridian_project(x, &b)?.coords());
        let d = pole_distance(&reduced.lifted(&y)?, &a);
        if d < params.pole_tolerance {
            return Err(Error::PoleHit {
                point: reduced.domain_frame.embed(&y),
                distance: d,
            });
        }
        margin = margin.min(d);
    }
    reduced.report.pole_margin = margin;
    reduced.report.nodes_checked = check.len();
    reduced.report.equivariance_defect = equivariance_defect(&reduced, &check)?;
    Ok(reduced)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::linalg::normalized;
    use crate::mapexpr::parse_map;

    fn sphere_map(src: &str, n: usize) -> Arc<dyn SmoothMap> {
        Arc::new(parse_map(src, Domain::Sphere(n)).unwrap())
    }

    #[test]
    fn meridian_constant_map_hits_the_pole() {
        // (x1, x2) is constant on meridians of e3, so psi cannot move A off E
        let f = sphere_map("(x1, x2)", 2);
        let poles = PoleSelection::Given {
            a: Pole::new(vec![1.0, 0.0]).unwrap(),
            b: Pole::new(vec![0.0, 0.0, 1.0]).unwrap(),
        };
        let r = reduce_dimension(f, &poles, &ReduceParams::default());
        assert!(matches!(r, Err(Error::PoleHit { .. })), "{:?}", r.err());
    }

    #[test]
    fn odd_input_gives_odd_output() {
        let f = sphere_map("(x1 + x3, x2 - x3^3)", 2);
        let poles = PoleSelection::Given {
            a: Pole::new(normalized(&[0.3, 1.0])).unwrap(),
            b: Pole::new(normalized(&[0.2, -0.3, 1.0])).unwrap(),
        };
        let r = reduce_dimension(f, &poles, &ReduceParams::default()).unwrap();
        assert!(r.report.equivariance_defect <= 1e-8);
        assert!(r.report.pole_margin >= 1e-6);
        assert_eq!(r.domain(), Domain::Sphere(1));
        assert_eq!(r.arity_out(), 1);
    }

    #[test]
    fn sampled_poles_are_reproducible() {
        let f = sphere_map("(x1 + x3, x2 - x3^3)", 2);
        let poles = PoleSelection::Sampled { seed: 11, trials: 64 };
        let r = reduce_dimension(f.clone(), &poles, &ReduceParams::default()).unwrap();
        assert!(r.report.equivariance_defect <= 1e-8);
        let again = reduce_dimension(f, &poles, &ReduceParams::default()).unwrap();
        assert_eq!(r.report.b, again.report.b);
        assert_eq!(r.report.preimages, again.report.preimages);
    }

    #[test]
    fn retraction_is_idempotent_on_the_equator() {
        let a = Pole::new(vec![0.0, 0.0, 1.0]).unwrap();
        let y = normalized(&[0.6, -0.8, 0.0]);
        let r = meridian_project(&y, &a).unwrap();
        assert!(distance(r.coords(), &y) < 1e-15);
    }
}
