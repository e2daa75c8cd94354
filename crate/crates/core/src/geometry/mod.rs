//! Points, poles and quadrature meshes.

mod mesh;
mod point;

pub use mesh::{
    ball_volume, make_cylinder_mesh, make_disk_mesh, make_sphere_mesh, unit_sphere_area,
    BoundaryRule, BoundaryTag, CurveMesh, CylinderMesh, DiskMesh, EquatorFrame, EquatorMesh, QuadratureRule,
    SphereMesh,
};
pub(crate) use mesh::SphereLayout;
pub use point::{
    antipode, equator_retract, latitude, meridian_project, DiskPoint, Pole, UnitVector,
    POLE_TOLERANCE,
};
pub(crate) use point::{at_latitude, horizontal};

/// Default mesh resolutions, chosen so the identity baselines and the
/// cylinder ledger meet their tolerances.
pub mod defaults {
    pub const DISK2_RESOLUTION: usize = 128;
    pub const DISK3_RESOLUTION: usize = 64;
    pub const SPHERE_RESOLUTION: usize = 64;
    pub const CURVE_SAMPLES: usize = 256;
    pub const CYLINDER_RESOLUTION: usize = 128;

    pub fn disk_resolution(n: usize) -> usize {
        if n >= 3 {
            DISK3_RESOLUTION
        } else {
            DISK2_RESOLUTION
        }
    }
}
