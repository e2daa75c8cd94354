//! A hemisphere-preserving odd replacement `g†` for `g_* = g ∘ psi_1` on S^2.
//!
//! On the equator `E` of the domain pole `B`, `g̃` is `g_*` followed by the
//! meridian projection onto the equator of the target pole `A`. A point at
//! latitude `l` over `x̄ ∈ E` goes to latitude `P(l)` over `g̃(x̄)`, where
//! `P = clamp(pi l / 2r, -pi/2, pi/2)` before smoothing; beyond the strip
//! `|l| <= r` this is `±A`. Smoothing replaces `P` by its convolution with
//! the kernel `(1 - (s/w)^2)^2`, which keeps it odd and monotone.

use std::f64::consts::FRAC_PI_2;
use std::sync::Arc;

use serde::Serialize;

use super::compose::compose;
use super::isotopy::DiffeoFamily;
use crate::error::{Error, Result};
use crate::geometry::{at_latitude, latitude, make_sphere_mesh, meridian_project, EquatorFrame, Pole, SphereMesh};
use crate::linalg::{angle_between, distance, gauss_legendre, neg};
use crate::mapexpr::{Domain, GridMap, SmoothMap};

/// Strip geometry of the construction.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct StripParams {
    /// Cap margin of the isotopy.
    pub eps: f64,
    /// Strip half-width.
    pub r: f64,
    /// `dist(±A, g_*(E))`.
    pub d: f64,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ReplacementParams {
    /// Strip half-width; chosen by halving from `pi/8` when absent.
    pub r: Option<f64>,
    /// Smoothing half-width as a fraction of `r`.
    pub band_fraction: f64,
    /// Equator nodes used to measure `d` and validate the strip.
    pub equator_nodes: usize,
    /// Latitude levels sampled across the strip.
    pub strip_levels: usize,
    /// Resolution of the sphere mesh used for node checks.
    pub check_resolution: usize,
}

impl Default for ReplacementParams {
    fn default() -> Self {
        Self {
            r: None,
            band_fraction: 0.25,
            equator_nodes: 1024,
            strip_levels: 16,
            check_resolution: 128,
        }
    }
}

/// Diagnostics recorded while building `g†`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct ReplacementReport {
    pub strip: StripParams,
    pub band: f64,
    /// Largest `d(g_*(x), g_*(x̄))` over strip samples.
    pub strip_spread: f64,
    /// `min d(g̃(x), -g_*(x))` before smoothing.
    pub raw_margin: f64,
    /// `min |g†(x) + g_*(x)|` after smoothing.
    pub margin: f64,
    /// Largest violation of `latitude(g†(x)) l(x) >= 0`.
    pub hemisphere_defect: f64,
    pub nodes_checked: usize,
}

/// The map `g†`.
pub struct HemisphereReplacement {
    g_star: Arc<dyn SmoothMap>,
    domain_pole: Pole,
    target_pole: Pole,
    r: f64,
    band: f64,
    abscissae: Vec<f64>,
    weights: Vec<f64>,
    report: Option<ReplacementReport>,
}

impl HemisphereReplacement {
    pub fn report(&self) -> &ReplacementReport {
        self.report.as_ref().expect("report is set on construction")
    }

    pub fn g_star(&self) -> Arc<dyn SmoothMap> {
        self.g_star.clone()
    }

    pub fn domain_pole(&self) -> &Pole {
        &self.domain_pole
    }

    pub fn target_pole(&self) -> &Pole {
        &self.target_pole
    }

    fn kernel_integral(&self, f: impl Fn(f64) -> f64, a: f64, b: f64) -> f64 {
        let (mid, half) = (0.5 * (a + b), 0.5 * (b - a));
        self.abscissae
            .iter()
            .zip(&self.weights)
            .map(|(x, w)| {
                let s = mid + half * x;
                let k = 1.0 - (s / self.band).powi(2);
                w * half * k * k * f(s)
            })
            .sum()
    }

    /// Smoothed latitude profile `P(l)`.
    pub fn profile(&self, l: f64) -> f64 {
        let w = self.band;
        if w == 0.0 {
            return raw_profile(l, self.r);
        }
        if l.abs() >= self.r + w {
            return FRAC_PI_2.copysign(l);
        }
        let mut cuts = vec![-w, w];
        for kink in [l - self.r, l + self.r] {
            if kink > -w && kink < w {
                cuts.push(kink);
            }
        }
        cuts.sort_by(f64::total_cmp);
        let value: f64 = cuts
            .windows(2)
            .map(|c| self.kernel_integral(|s| raw_profile(l - s, self.r), c[0], c[1]))
            .sum();
        // the kernel has mass 16 w / 15
        value * 15.0 / (16.0 * w)
    }

    fn eval_with_profile(&self, x: &[f64], profile: impl Fn(f64) -> f64) -> Result<Vec<f64>> {
        let a = self.target_pole.coords();
        let l = latitude(x, &self.domain_pole);
        let p = profile(l);
        if p.abs() >= FRAC_PI_2 {
            return Ok(if p > 0.0 { a.to_vec() } else { neg(a) });
        }
        let xbar = meridian_project(x, &self.domain_pole)?;
        let v = self.g_star.eval(xbar.coords())?;
        let base = meridian_project(&v, &self.target_pole)?;
        Ok(at_latitude(base.coords(), a, p))
    }

    /// `g̃`, the construction before smoothing.
    pub fn unsmoothed(&self, x: &[f64]) -> Result<Vec<f64>> {
        self.eval_with_profile(x, |l| raw_profile(l, self.r))
    }

    /// Tabulates `g†` on a sphere mesh.
    pub fn tabulate(self: &Arc<Self>, mesh: Arc<SphereMesh>) -> Result<GridMap> {
        GridMap::tabulate(self.as_ref(), mesh)
    }
}

fn raw_profile(l: f64, r: f64) -> f64 {
    (FRAC_PI_2 * l / r).clamp(-FRAC_PI_2, FRAC_PI_2)
}

impl SmoothMap for HemisphereReplacement {
    fn domain(&self) -> Domain {
        Domain::Sphere(2)
    }

    fn arity_out(&self) -> usize {
        3
    }

    fn eval_into(&self, x: &[f64], out: &mut [f64]) -> Result<()> {
        out.copy_from_slice(&self.eval_with_profile(x, |l| self.profile(l))?);
        Ok(())
    }

    fn sphere_valued(&self) -> bool {
        true
    }
}

struct StripSamples {
    /// `(x, x̄)` pairs.
    pairs: Vec<(Vec<f64>, Vec<f64>)>,
}

fn strip_samples(frame: &EquatorFrame, pole: &Pole, reach: f64, nodes: usize, levels: usize) -> Result<StripSamples> {
    let mesh = frame.mesh(nodes)?;
    let mut pairs = Vec::with_capacity(mesh.len() * (2 * levels + 1));
    for i in 0..mesh.len() {
        let xbar = mesh.node(i).to_vec();
        for k in -(levels as i64)..=(levels as i64) {
            let l = reach * k as f64 / levels as f64;
            pairs.push((at_latitude(&xbar, pole.coords(), l), xbar.clone()));
        }
    }
    Ok(StripSamples { pairs })
}

/// `dist(±A, g_*(E))`, measured on equator nodes.
pub fn equator_distance(g_star: &dyn SmoothMap, b: &Pole, a: &Pole, nodes: usize) -> Result<f64> {
    let mesh = EquatorFrame::new(b.coords()).mesh(nodes)?;
    let values = crate::par::try_map(0..mesh.len(), |i| g_star.eval(mesh.node(i)))?;
    let minus_a = neg(a.coords());
    Ok(values
        .iter()
        .map(|v| angle_between(v, a.coords()).min(angle_between(v, &minus_a)))
        .fold(f64::INFINITY, f64::min))
}

fn strip_spread(g_star: &dyn SmoothMap, samples: &StripSamples) -> Result<f64> {
    let spreads = crate::par::try_map(0..samples.pairs.len(), |i| {
        let (x, xbar) = &samples.pairs[i];
        Ok(angle_between(&g_star.eval(x)?, &g_star.eval(xbar)?))
    })?;
    Ok(spreads.into_iter().fold(0.0, f64::max))
}

/// Largest `r` of the form `r0 / 2^k` for which `g_*` moves by less than
/// `d/10` across the strip (including its smoothing band).
pub fn choose_strip_width(
    g_star: &dyn SmoothMap,
    b: &Pole,
    d: f64,
    r0: f64,
    params: &ReplacementParams,
) -> Result<(f64, f64)> {
    let frame = EquatorFrame::new(b.coords());
    let mut r = r0;
    let mut last = f64::NAN;
    for _ in 0..40 {
        let reach = r * (1.0 + params.band_fraction);
        let samples = strip_samples(&frame, b, reach, params.equator_nodes, params.strip_levels)?;
        let spread = strip_spread(g_star, &samples)?;
        if spread < d / 10.0 {
            return Ok((r, spread));
        }
        last = spread;
        r *= 0.5;
    }
    Err(Error::StripTooWide {
        r,
        reason: format!("g_* still moves by {last} across the strip, d/10 = {}", d / 10.0),
    })
}

/// Builds `g†` for an odd `g: S^2 -> S^2`, the isotopy `psi` (domain pole
/// `B`) and the target pole `A`.
pub fn hemisphere_replacement(
    g: Arc<dyn SmoothMap>,
    psi: Arc<DiffeoFamily>,
    a: &Pole,
    params: ReplacementParams,
) -> Result<HemisphereReplacement> {
    if g.domain() != Domain::Sphere(2) || g.arity_out() != 3 {
        return Err(Error::InvalidParameter(format!(
            "g must map sphere2 to S^2, got {} -> R^{}",
            g.domain(),
            g.arity_out()
        )));
    }
    let b = psi.pole().clone();
    let g_star: Arc<dyn SmoothMap> = Arc::new(compose(g, Arc::new(psi.at(1.0))));
    let d = equator_distance(g_star.as_ref(), &b, a, params.equator_nodes)?;
    if !(d > 0.0) {
        return Err(Error::StripTooWide {
            r: 0.0,
            reason: "g_*(E) meets ±A".into(),
        });
    }
    let (r, spread) = match params.r {
        Some(r) => {
            if !(r > 0.0 && r < FRAC_PI_2 / (1.0 + params.band_fraction)) {
                return Err(Error::InvalidParameter(format!("strip half-width {r} out of range")));
            }
            let frame = EquatorFrame::new(b.coords());
            let reach = r * (1.0 + params.band_fraction);
            let samples = strip_samples(&frame, &b, reach, params.equator_nodes, params.strip_levels)?;
            let spread = strip_spread(g_star.as_ref(), &samples)?;
            if !(spread < d / 10.0) {
                return Err(Error::StripTooWide {
                    r,
                    reason: format!("g_* moves by {spread} across the strip, d/10 = {}", d / 10.0),
                });
            }
            (r, spread)
        }
        None => choose_strip_width(g_star.as_ref(), &b, d, std::f64::consts::FRAC_PI_8, &params)?,
    };
    let (abscissae, weights) = gauss_legendre(4);
    let mut gd = HemisphereReplacement {
        g_star,
        domain_pole: b,
        target_pole: a.clone(),
        r,
        band: r * params.band_fraction,
        abscissae,
        weights,
        report: None,
    };
    let report = validate(&gd, params, StripParams { eps: psi.eps(), r, d }, spread)?;
    gd.report = Some(report);
    Ok(gd)
}

fn validate(gd: &HemisphereReplacement, params: ReplacementParams, strip: StripParams, spread: f64) -> Result<ReplacementReport> {
    let mesh = make_sphere_mesh(2, params.check_resolution)?;
    let frame = EquatorFrame::new(gd.domain_pole.coords());
    let samples = strip_samples(&frame, &gd.domain_pole, gd.r + gd.band, params.equator_nodes / 4, params.strip_levels)?;
    let mut points: Vec<Vec<f64>> = (0..mesh.len()).map(|i| mesh.node(i).to_vec()).collect();
    points.extend(samples.pairs.into_iter().map(|(x, _)| x));
    let rows = crate::par::try_map(0..points.len(), |i| {
        let x = &points[i];
        let minus = neg(&gd.g_star.eval(x)?);
        let raw = gd.unsmoothed(x)?;
        let smooth = gd.eval(x)?;
        let l = latitude(x, &gd.domain_pole);
        let lat = latitude(&smooth, &gd.target_pole);
        Ok((
            angle_between(&raw, &minus),
            distance(&smooth, &minus),
            if l.abs() > mesh.spacing { (-lat * l.signum()).max(0.0) } else { 0.0 },
        ))
    })?;
    let raw_margin = rows.iter().map(|r| r.0).fold(f64::INFINITY, f64::min);
    let margin = rows.iter().map(|r| r.1).fold(f64::INFINITY, f64::min);
    let hemisphere_defect = rows.iter().map(|r| r.2).fold(0.0, f64::max);
    if raw_margin < strip.d / 10.0 {
        let worst = rows.iter().position(|r| r.0 == raw_margin).unwrap_or(0);
        return Err(Error::StripTooWide {
            r: gd.r,
            reason: format!(
                "unsmoothed margin {raw_margin} below d/10 = {} at {:?}",
                strip.d / 10.0,
                points[worst]
            ),
        });
    }
    if !(margin > 1e-9) {
        let worst = rows.iter().position(|r| r.1 == margin).unwrap_or(0);
        return Err(Error::SeparationLost {
            point: points[worst].clone(),
        });
    }
    Ok(ReplacementReport {
        strip,
        band: gd.band,
        strip_spread: spread,
        raw_margin,
        margin,
        hemisphere_defect,
        nodes_checked: points.len(),
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::constructions::{equivariant_isotopy, IsotopyParams};
    use crate::mapexpr::{equivariance_defect, MapExpr};

    fn identity_pipeline(x: &[Vec<f64>], b: Pole) -> HemisphereReplacement {
        let psi = Arc::new(equivariant_isotopy(x, &b, IsotopyParams::new(0.3)).unwrap());
        let g: Arc<dyn SmoothMap> = Arc::new(MapExpr::identity(Domain::Sphere(2)));
        hemisphere_replacement(g, psi, &Pole::north(2), ReplacementParams::default()).unwrap()
    }

    #[test]
    fn profile_is_odd_monotone_and_flat_outside() {
        let gd = identity_pipeline(&[], Pole::north(2));
        let r = gd.r;
        let mut prev = f64::NEG_INFINITY;
        for k in -300..=300 {
            let l = 1.5 * r * k as f64 / 300.0;
            let p = gd.profile(l);
            assert!(p >= prev);
            assert!((gd.profile(-l) + p).abs() < 1e-15);
            prev = p;
        }
        assert_eq!(gd.profile(r * 1.3), FRAC_PI_2);
        assert!((gd.profile(0.5 * r) - FRAC_PI_2 * 0.5).abs() < 1e-14);
    }

    #[test]
    fn identity_pipeline_is_odd_and_hemisphere_preserving() {
        let gd = identity_pipeline(&[], Pole::north(2));
        let rep = *gd.report();
        assert!(rep.margin > 0.0);
        assert!(rep.raw_margin >= rep.strip.d / 10.0);
        assert!(rep.hemisphere_defect <= 1e-9);
        let mesh = make_sphere_mesh(2, 64).unwrap();
        assert!(equivariance_defect(&gd, &mesh).unwrap() <= 1e-9);
        let cap = gd.eval(&[0.0, 0.0, 1.0]).unwrap();
        assert_eq!(cap, vec![0.0, 0.0, 1.0]);
        let eq = gd.eval(&[0.6, 0.8, 0.0]).unwrap();
        assert!(eq[2].abs() < 1e-15);
    }

    #[test]
    fn tilted_pipeline() {
        let b = Pole::new(vec![1.0, 0.0, 0.0]).unwrap();
        let gd = identity_pipeline(&[vec![0.0, 0.0, 1.0]], b);
        let rep = *gd.report();
        assert!(rep.raw_margin >= rep.strip.d / 10.0, "{rep:?}");
        assert!(rep.hemisphere_defect <= 1e-9);
        let mesh = make_sphere_mesh(2, 64).unwrap();
        assert!(equivariance_defect(&gd, &mesh).unwrap() <= 1e-9);
    }
}
