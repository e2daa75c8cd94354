//! The constructions behind the two proofs: retractions, the odd isotopy of
//! the sphere, the hemisphere-preserving replacement map and the graft.

mod compose;
mod cylinder;
mod graft;
mod isotopy;
mod replacement;
mod pipeline;
mod reduce;
mod retraction;

pub use compose::{compose, Composition};
pub use isotopy::{admissible_eps, equivariant_isotopy, latitude_shift, DiffeoFamily, IsotopyParams, PsiMap, SmoothedTheta};
pub use replacement::{
    choose_strip_width, equator_distance, hemisphere_replacement, HemisphereReplacement, ReplacementReport, ReplacementParams, StripParams,
};
pub use cylinder::{
    colatitude_profile, collapse_vertical, cylinder_map, horizontal_power, sphere_to_cylinder_surface, CylinderChecks, CylinderMap, CAP_RADIUS,
};
pub use graft::{graft, radial_extension, seam_radius, Graft, RadialExtension, SEAM_BAND};
pub use pipeline::{cylinder_pipeline, winding_sphere_map, Pipeline, PipelineParams, PipelineReport};
pub use reduce::{reduce_dimension, PoleSelection, ReduceParams, ReduceReport, Reduced};
pub use retraction::*;
