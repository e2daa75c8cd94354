use std::fmt;
use std::sync::Arc;

use serde::{Deserialize, Serialize};

use super::ast::Expr;
use super::parser::parse_coordinates;
use crate::error::{Error, Result};
use crate::geometry::SphereMesh;
use crate::linalg::norm;

/// Tolerance for declared-domain membership.
pub const DOMAIN_TOLERANCE: f64 = 1e-9;

/// The declared domain of a map.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum Domain {
    /// The closed ball D^n in R^n.
    Disk(usize),
    /// The sphere S^n in R^{n+1}.
    Sphere(usize),
    /// The cylinder D^2 x [-1, 1].
    Cylinder,
    /// The parameter circle R / Z, coordinate `x1 = t`.
    Curve,
}

impl Domain {
    pub fn arity_in(self) -> usize {
        match self {
            Domain::Disk(n) => n,
            Domain::Sphere(n) => n + 1,
            Domain::Cylinder => 3,
            Domain::Curve => 1,
        }
    }

    pub fn contains(self, x: &[f64], tol: f64) -> bool {
        if x.len() != self.arity_in() || x.iter().any(|c| !c.is_finite()) {
            return false;
        }
        match self {
            Domain::Disk(_) => norm(x) <= 1.0 + tol,
            Domain::Sphere(_) => (norm(x) - 1.0).abs() <= tol,
            Domain::Cylinder => x[0].hypot(x[1]) <= 1.0 + tol && x[2].abs() <= 1.0 + tol,
            Domain::Curve => true,
        }
    }

    pub fn check(self, x: &[f64]) -> Result<()> {
        if x.len() != self.arity_in() {
            return Err(Error::ArityMismatch {
                expected: self.arity_in(),
                found: x.len(),
            });
        }
        if !self.contains(x, DOMAIN_TOLERANCE) {
            return Err(Error::Domain {
                point: x.to_vec(),
                domain: self.to_string(),
            });
        }
        Ok(())
    }
}

impl fmt::Display for Domain {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Domain::Disk(n) => write!(f, "disk{n}"),
            Domain::Sphere(n) => write!(f, "sphere{n}"),
            Domain::Cylinder => f.write_str("cylinder"),
            Domain::Curve => f.write_str("curve"),
        }
    }
}

impl std::str::FromStr for Domain {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        let dim = |rest: &str| {
            rest.parse::<usize>()
                .map_err(|_| Error::InvalidParameter(format!("unknown domain '{s}'")))
        };
        match s {
            "cylinder" => Ok(Domain::Cylinder),
            "curve" => Ok(Domain::Curve),
            _ if s.starts_with("disk") => Ok(Domain::Disk(dim(&s[4..])?)),
            _ if s.starts_with("sphere") => Ok(Domain::Sphere(dim(&s[6..])?)),
            _ => Err(Error::InvalidParameter(format!("unknown domain '{s}'"))),
        }
    }
}

/// A map between Euclidean spaces with a declared domain. Evaluation is
/// pure and may be called concurrently.
pub trait SmoothMap: Send + Sync {
    fn domain(&self) -> Domain;

    fn arity_out(&self) -> usize;

    /// Evaluates without checking domain membership.
    fn eval_into(&self, x: &[f64], out: &mut [f64]) -> Result<()>;

    /// True when every value has unit norm by construction.
    fn sphere_valued(&self) -> bool {
        false
    }

    fn arity_in(&self) -> usize {
        self.domain().arity_in()
    }

    fn eval(&self, x: &[f64]) -> Result<Vec<f64>> {
        let mut out = vec![0.0; self.arity_out()];
        self.eval_into(x, &mut out)?;
        Ok(out)
    }
}

impl<M: SmoothMap + ?Sized> SmoothMap for Arc<M> {
    fn domain(&self) -> Domain {
        (**self).domain()
    }
    fn arity_out(&self) -> usize {
        (**self).arity_out()
    }
    fn eval_into(&self, x: &[f64], out: &mut [f64]) -> Result<()> {
        (**self).eval_into(x, out)
    }
    fn sphere_valued(&self) -> bool {
        (**self).sphere_valued()
    }
}

impl<M: SmoothMap + ?Sized> SmoothMap for &M {
    fn domain(&self) -> Domain {
        (**self).domain()
    }
    fn arity_out(&self) -> usize {
        (**self).arity_out()
    }
    fn eval_into(&self, x: &[f64], out: &mut [f64]) -> Result<()> {
        (**self).eval_into(x, out)
    }
    fn sphere_valued(&self) -> bool {
        (**self).sphere_valued()
    }
}

/// Evaluates `m` at `x` after checking that `x` lies in the declared domain.
pub fn eval_map(m: &dyn SmoothMap, x: &[f64]) -> Result<Vec<f64>> {
    m.domain().check(x)?;
    m.eval(x)
}

/// A map given by one parsed expression per output coordinate.
#[derive(Debug, Clone, PartialEq)]
pub struct MapExpr {
    domain: Domain,
    coords: Vec<Expr>,
    source: String,
}

impl MapExpr {
    pub fn new(coords: Vec<Expr>, domain: Domain) -> Result<Self> {
        let used = coords.iter().map(Expr::var_count).max().unwrap_or(0);
        if used > domain.arity_in() {
            return Err(Error::Arity(format!(
                "map uses x{used} but the domain {domain} has {} coordinates",
                domain.arity_in()
            )));
        }
        let source = format_coordinates(&coords);
        Ok(Self {
            domain,
            coords,
            source,
        })
    }

    /// The identity map of the domain's ambient coordinates.
    pub fn identity(domain: Domain) -> Self {
        let coords = (0..domain.arity_in()).map(Expr::Var).collect();
        Self::new(coords, domain).expect("identity uses only domain variables")
    }

    pub fn coords(&self) -> &[Expr] {
        &self.coords
    }

    /// Canonical source text; reparses to an equal tree.
    pub fn source(&self) -> &str {
        &self.source
    }
}

impl fmt::Display for MapExpr {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.source)
    }
}

fn format_coordinates(coords: &[Expr]) -> String {
    let parts: Vec<String> = coords.iter().map(|e| e.to_string()).collect();
    format!("({})", parts.join(", "))
}

/// Parses DSL source into a map on `domain`. The keyword `identity` is
/// accepted as shorthand for `(x1, ..., xn)`.
pub fn parse_map(source: &str, domain: Domain) -> Result<MapExpr> {
    if source.trim() == "identity" {
        return Ok(MapExpr::identity(domain));
    }
    MapExpr::new(parse_coordinates(source)?, domain)
}

impl SmoothMap for MapExpr {
    fn domain(&self) -> Domain {
        self.domain
    }

    fn arity_out(&self) -> usize {
        self.coords.len()
    }

    fn eval_into(&self, x: &[f64], out: &mut [f64]) -> Result<()> {
        for (o, e) in out.iter_mut().zip(&self.coords) {
            *o = e.eval(x);
        }
        Ok(())
    }
}

/// A map defined by a closure.
pub struct FnMap<F> {
    domain: Domain,
    arity_out: usize,
    sphere_valued: bool,
    f: F,
}

impl<F> FnMap<F>
where
    F: Fn(&[f64], &mut [f64]) -> Result<()> + Send + Sync,
{
    pub fn new(domain: Domain, arity_out: usize, f: F) -> Self {
        Self {
            domain,
            arity_out,
            sphere_valued: false,
            f,
        }
    }

    pub fn sphere_valued(mut self) -> Self {
        self.sphere_valued = true;
        self
    }
}

impl<F> SmoothMap for FnMap<F>
where
    F: Fn(&[f64], &mut [f64]) -> Result<()> + Send + Sync,
{
    fn domain(&self) -> Domain {
        self.domain
    }
    fn arity_out(&self) -> usize {
        self.arity_out
    }
    fn eval_into(&self, x: &[f64], out: &mut [f64]) -> Result<()> {
        (self.f)(x, out)
    }
    fn sphere_valued(&self) -> bool {
        self.sphere_valued
    }
}

/// `x -> m(x) / |m(x)|`.
pub struct Normalized<M>(pub M);

impl<M: SmoothMap> SmoothMap for Normalized<M> {
    fn domain(&self) -> Domain {
        self.0.domain()
    }
    fn arity_out(&self) -> usize {
        self.0.arity_out()
    }
    fn eval_into(&self, x: &[f64], out: &mut [f64]) -> Result<()> {
        self.0.eval_into(x, out)?;
        let n = norm(out);
        if !(n > 0.0 && n.is_finite()) {
            return Err(Error::NotSphereValued {
                point: x.to_vec(),
                norm: n,
            });
        }
        out.iter_mut().for_each(|c| *c /= n);
        Ok(())
    }
    fn sphere_valued(&self) -> bool {
        true
    }
}

/// Minimum admissible norm for [`project_to_sphere`].
pub const NEAR_ZERO_FLOOR: f64 = 0.1;

/// Normalises `m` onto the unit sphere after checking `|m| >= 0.1` on
/// every node of `mesh`.
pub fn project_to_sphere<M: SmoothMap>(m: M, mesh: &SphereMesh) -> Result<Normalized<M>> {
    let mut out = vec![0.0; m.arity_out()];
    for i in 0..mesh.len() {
        m.eval_into(mesh.node(i), &mut out)?;
        let n = norm(&out);
        if !(n >= NEAR_ZERO_FLOOR) {
            return Err(Error::NearZeroValue { node: i, norm: n });
        }
    }
    Ok(Normalized(m))
}

/// `max |m(-x) + m(x)|` over the nodes of an antipodally closed mesh.
pub fn equivariance_defect(m: &dyn SmoothMap, mesh: &SphereMesh) -> Result<f64> {
    let k = m.arity_out();
    let values = crate::par::try_map(0..mesh.len(), |i| m.eval(mesh.node(i)))?;
    let mut worst: f64 = 0.0;
    for i in 0..mesh.len() {
        let j = mesh.antipode[i];
        let d = (0..k)
            .map(|c| (values[i][c] + values[j][c]).powi(2))
            .sum::<f64>()
            .sqrt();
        worst = worst.max(d);
    }
    Ok(worst)
}
