//! Regular values and admissible poles.

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, StandardNormal};
use serde::Serialize;

use super::witness::{sphere_newton, tangent_jacobian};
use crate::error::{Error, Result};
use crate::geometry::{latitude, make_sphere_mesh, meridian_project, Pole, SphereMesh};
use crate::linalg::{angle_between, distance, neg, normalized, singular_values, sub};
use crate::mapexpr::{Domain, SmoothMap};

/// Smallest singular value counted as full rank.
pub const RANK_THRESHOLD: f64 = 1e-6;

/// A uniformly random point of the unit sphere in `R^dim`.
pub fn random_unit(rng: &mut ChaCha8Rng, dim: usize) -> Vec<f64> {
    loop {
        let v: Vec<f64> = (0..dim).map(|_| StandardNormal.sample(rng)).collect();
        if crate::linalg::norm(&v) > 1e-3 {
            return normalized(&v);
        }
    }
}

/// Approximate preimages of `a` under a sphere-valued map, by Gauss-Newton
/// from the `starts` mesh nodes whose values are closest to `a`. Converged
/// points closer than `1e-6` are merged.
pub fn locate_preimages(m: &dyn SmoothMap, a: &[f64], mesh: &SphereMesh, starts: usize) -> Result<Vec<Vec<f64>>> {
    let values = crate::par::try_map(0..mesh.len(), |i| m.eval(mesh.node(i)))?;
    locate_from_values(m, a, mesh, &values, starts)
}

fn locate_from_values(
    m: &dyn SmoothMap,
    a: &[f64],
    mesh: &SphereMesh,
    values: &[Vec<f64>],
    starts: usize,
) -> Result<Vec<Vec<f64>>> {
    let mut order: Vec<usize> = (0..mesh.len()).collect();
    let dist: Vec<f64> = values.iter().map(|v| distance(v, a)).collect();
    order.sort_by(|&i, &j| dist[i].total_cmp(&dist[j]).then(i.cmp(&j)));
    let k = m.arity_out();
    let runs = crate::par::try_map(0..starts.min(order.len()), |s| {
        sphere_newton(|x| Ok(sub(&m.eval(x)?, a)), mesh.node(order[s]), k, 60)
    })?;
    let mut found: Vec<Vec<f64>> = Vec::new();
    for (x, err, _) in runs {
        if err < 1e-10 && found.iter().all(|p| distance(p, &x) > 1e-6) {
            found.push(x);
        }
    }
    Ok(found)
}

/// A sampled regular value with its preimages.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct RegularValue {
    pub value: Vec<f64>,
    pub preimages: Vec<Vec<f64>>,
    /// Smallest singular value over all preimages (`+inf` when there are none).
    pub min_singular_value: f64,
    /// 1-based index of the accepting trial.
    pub trial: usize,
    /// Why earlier candidates were rejected.
    pub rejected: Vec<String>,
}

/// Samples targets uniformly until one has only full-rank preimages. A
/// target without preimages is accepted with an empty preimage list.
pub fn sample_regular_value(m: &dyn SmoothMap, trials: usize, seed: u64, resolution: usize) -> Result<RegularValue> {
    let Domain::Sphere(n) = m.domain() else {
        return Err(Error::InvalidParameter(format!("regular values need a sphere domain, got {}", m.domain())));
    };
    if m.arity_out() != n + 1 {
        return Err(Error::ArityMismatch { expected: n + 1, found: m.arity_out() });
    }
    if trials == 0 {
        return Err(Error::InvalidParameter("trials must be at least 1".into()));
    }
    let mesh = make_sphere_mesh(n, resolution)?;
    let values = crate::par::try_map(0..mesh.len(), |i| m.eval(mesh.node(i)))?;
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut rejected = Vec::new();
    for trial in 1..=trials {
        let a = random_unit(&mut rng, n + 1);
        let pre = locate_from_values(m, &a, &mesh, &values, 64)?;
        let mut worst = f64::INFINITY;
        for x in &pre {
            let (j, frame) = tangent_jacobian(m, x)?;
            let sv = singular_values(&j, n + 1, frame.len());
            worst = worst.min(*sv.last().unwrap_or(&0.0));
        }
        if worst > RANK_THRESHOLD {
            return Ok(RegularValue {
                value: a,
                preimages: pre,
                min_singular_value: worst,
                trial,
                rejected,
            });
        }
        rejected.push(format!("trial {trial}: singular value {worst:.3e} at a preimage"));
    }
    Err(Error::NoRegularValueFound {
        trials,
        detail: rejected.join("; "),
    })
}

/// An admissible pole for the isotopy construction.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct PoleChoice {
    pub pole: Vec<f64>,
    pub trial: usize,
    /// Distance between the meridian projections of `X` and `-X`.
    pub separation: f64,
    /// Smallest angular distance from `X` to `±B`.
    pub cap_distance: f64,
}

/// Meridian separation of `X` and `-X` seen from `b`.
pub fn meridian_separation(x_set: &[Vec<f64>], b: &Pole) -> Result<f64> {
    let pix: Vec<Vec<f64>> = x_set
        .iter()
        .map(|x| meridian_project(x, b).map(|u| u.into_coords()))
        .collect::<Result<_>>()?;
    let mut sep = std::f64::consts::PI;
    for p in &pix {
        for q in &pix {
            sep = sep.min(angle_between(p, &neg(q)));
        }
    }
    Ok(sep)
}

/// Samples poles `B` of S^{dim-1} until `X` stays out of the caps of
/// angular radius `cap` at `±B` and the meridian projections of `X` and `-X`
/// are at least `min_separation` apart.
pub fn find_pole(
    x_set: &[Vec<f64>],
    dim: usize,
    trials: usize,
    seed: u64,
    min_separation: f64,
    cap: f64,
) -> Result<PoleChoice> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    for trial in 1..=trials {
        let b = Pole::new(random_unit(&mut rng, dim))?;
        let cap_distance = x_set
            .iter()
            .map(|x| std::f64::consts::FRAC_PI_2 - latitude(x, &b).abs())
            .fold(std::f64::consts::FRAC_PI_2, f64::min);
        if cap_distance <= cap {
            continue;
        }
        let separation = meridian_separation(x_set, &b)?;
        if separation >= min_separation {
            return Ok(PoleChoice {
                pole: b.coords().to_vec(),
                trial,
                separation,
                cap_distance,
            });
        }
    }
    Err(Error::NoPoleFound(trials))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::mapexpr::{parse_map, MapExpr};

    #[test]
    fn identity_has_one_preimage() {
        let id = MapExpr::identity(Domain::Sphere(2));
        let r = sample_regular_value(&id, 3, 7, 64).unwrap();
        assert_eq!(r.preimages.len(), 1);
        assert!(distance(&r.preimages[0], &r.value) < 1e-9);
        assert_eq!(r.trial, 1);
    }

    #[test]
    fn double_cover_has_two_preimages() {
        let m = parse_map("(x1^2 - x2^2, 2*x1*x2)", Domain::Sphere(1)).unwrap();
        let r = sample_regular_value(&m, 3, 1, 256).unwrap();
        assert_eq!(r.preimages.len(), 2);
    }

    #[test]
    fn constant_map_is_accepted_without_preimages() {
        let m = parse_map("(0, 0, 1)", Domain::Sphere(2)).unwrap();
        let r = sample_regular_value(&m, 3, 1, 32).unwrap();
        assert!(r.preimages.is_empty());
    }

    #[test]
    fn poles_respect_meridian_condition() {
        let x = vec![normalized(&[0.2, 0.1, 0.9])];
        let p = find_pole(&x, 3, 50, 3, 0.1, 0.2).unwrap();
        assert!(p.separation >= 0.1);
        assert_eq!(find_pole(&[], 3, 5, 3, 0.1, 0.2).unwrap().trial, 1);
        // x in X and -y in -X on one meridian of B
        let pair = vec![normalized(&[1.0, 0.0, 0.5]), normalized(&[-1.0, 0.0, 0.3])];
        let b = Pole::new(vec![0.0, 0.0, 1.0]).unwrap();
        assert!(meridian_separation(&pair, &b).unwrap() < 1e-12);
    }
}
