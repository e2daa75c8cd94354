//! The full chain from an odd `g: S^2 -> S^2` to a map of the cylinder.

use std::sync::Arc;

use serde::Serialize;

use super::cylinder::{cylinder_map, horizontal_power, CylinderMap};
use super::graft::{graft, radial_extension, Graft};
use super::isotopy::{equivariant_isotopy, DiffeoFamily, IsotopyParams};
use super::replacement::{hemisphere_replacement, HemisphereReplacement, ReplacementReport, ReplacementParams};
use crate::error::Result;
use crate::geometry::{make_sphere_mesh, Pole};
use crate::mapexpr::{Domain, FnMap, SmoothMap};

#[derive(Debug, Clone, PartialEq)]
pub struct PipelineParams {
    /// Target pole.
    pub a: Pole,
    /// Domain pole of the isotopy and the strips.
    pub b: Pole,
    /// Points of `g^{-1}(A)` that must end up in the upper hemisphere.
    pub preimages: Vec<Vec<f64>>,
    pub isotopy: IsotopyParams,
    pub replacement: ReplacementParams,
}

impl PipelineParams {
    /// `A = e3`, `B = e1`, `g^{-1}(A) = {e3}`, which fits the identity and
    /// every [`horizontal_power`].
    pub fn standard() -> Self {
        Self {
            a: Pole::north(2),
            b: Pole::new(vec![1.0, 0.0, 0.0]).expect("unit vector"),
            preimages: vec![vec![0.0, 0.0, 1.0]],
            isotopy: IsotopyParams::new(0.3),
            replacement: ReplacementParams::default(),
        }
    }
}

/// Diagnostics of a pipeline run.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct PipelineReport {
    pub eps: f64,
    pub image_margin: f64,
    pub replacement: ReplacementReport,
    pub blend_margin: f64,
}

pub struct Pipeline {
    pub psi: Arc<DiffeoFamily>,
    pub replacement: Arc<HemisphereReplacement>,
    pub graft: Arc<Graft>,
    pub map: CylinderMap,
    pub report: PipelineReport,
}

/// The map `(rho e^{i phi}, x3) -> (rho e^{i k phi}, x3)` of S^2.
pub fn winding_sphere_map(k: u32) -> Arc<dyn SmoothMap> {
    Arc::new(FnMap::new(Domain::Sphere(2), 3, horizontal_power(k)).sphere_valued())
}

/// Runs the isotopy, the replacement `g†`, the graft (with the radial
/// extension of `g` as core) and the transfer to the cylinder.
pub fn cylinder_pipeline(g: Arc<dyn SmoothMap>, params: &PipelineParams) -> Result<Pipeline> {
    let psi = Arc::new(equivariant_isotopy(&params.preimages, &params.b, params.isotopy)?);
    let replacement = Arc::new(hemisphere_replacement(g.clone(), psi.clone(), &params.a, params.replacement)?);
    let check = make_sphere_mesh(2, params.replacement.check_resolution)?;
    let fhat = Arc::new(radial_extension(g.clone()));
    let grafted = Arc::new(graft(fhat, psi.clone(), g, replacement.clone(), &check)?);
    let map = cylinder_map(grafted.clone(), &params.b, &params.a)?;
    let report = PipelineReport {
        eps: psi.eps(),
        image_margin: psi.image_margin(),
        replacement: *replacement.report(),
        blend_margin: grafted.blend_margin(),
    };
    Ok(Pipeline {
        psi,
        replacement,
        graft: grafted,
        map,
        report,
    })
}
