//! Smooth maps: the expression DSL, evaluation, finite-difference
//! Jacobians and tabulated maps.

mod ast;
mod gridmap;
mod jacobian;
mod map;
mod parser;

pub use ast::{Expr, Func};
pub use gridmap::{GridMap, GridSupport};
pub use jacobian::{directional_derivative, jacobian, JacobianStencil};
pub use map::{
    equivariance_defect, eval_map, parse_map, project_to_sphere, Domain, FnMap, MapExpr,
    Normalized, SmoothMap, DOMAIN_TOLERANCE, NEAR_ZERO_FLOOR,
};
pub use parser::parse_coordinates;
