use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::linalg::{dot, norm};

/// Angular tolerance (radians) for coincidence with a pole.
pub const POLE_TOLERANCE: f64 = 1e-9;

/// A point of the unit sphere S^n, stored in ambient coordinates (length n + 1).
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct UnitVector(Vec<f64>);

impl UnitVector {
    /// Normalises `coords`; fails on a zero (or non-finite) vector.
    pub fn new(coords: Vec<f64>) -> Result<Self> {
        let n = norm(&coords);
        if !(n.is_finite() && n > 0.0) {
            return Err(Error::InvalidParameter(format!(
                "cannot normalise {coords:?} onto the sphere"
            )));
        }
        Ok(Self(coords.into_iter().map(|x| x / n).collect()))
    }

    /// The standard north pole `e_{n+1}` of S^n.
    pub fn north(sphere_dim: usize) -> Self {
        let mut c = vec![0.0; sphere_dim + 1];
        c[sphere_dim] = 1.0;
        Self(c)
    }

    pub fn coords(&self) -> &[f64] {
        &self.0
    }

    pub fn into_coords(self) -> Vec<f64> {
        self.0
    }

    pub fn ambient_dim(&self) -> usize {
        self.0.len()
    }

    pub fn sphere_dim(&self) -> usize {
        self.0.len() - 1
    }

    pub fn dot(&self, other: &UnitVector) -> f64 {
        dot(&self.0, &other.0)
    }
}

/// A point of the closed unit ball D^n.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DiskPoint(Vec<f64>);

impl DiskPoint {
    pub fn new(coords: Vec<f64>) -> Result<Self> {
        if norm(&coords) > 1.0 + 1e-12 {
            return Err(Error::Domain {
                point: coords.clone(),
                domain: format!("D^{}", coords.len()),
            });
        }
        Ok(Self(coords))
    }

    pub fn coords(&self) -> &[f64] {
        &self.0
    }
}

/// A distinguished point of a sphere used as a pole (`A` in a target
/// sphere, `B` in a domain sphere).
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Pole(pub UnitVector);

impl Pole {
    pub fn new(coords: Vec<f64>) -> Result<Self> {
        UnitVector::new(coords).map(Self)
    }

    pub fn north(sphere_dim: usize) -> Self {
        Self(UnitVector::north(sphere_dim))
    }

    pub fn coords(&self) -> &[f64] {
        self.0.coords()
    }
}

pub fn antipode(x: &UnitVector) -> UnitVector {
    UnitVector(x.0.iter().map(|c| -c).collect())
}

/// Signed latitude `arcsin <x, B>` in `[-pi/2, pi/2]`.
pub fn latitude(x: &[f64], pole: &Pole) -> f64 {
    dot(x, pole.coords()).clamp(-1.0, 1.0).asin()
}

/// Horizontal part `x - <x,B> B`; its norm is the cosine of the latitude.
pub(crate) fn horizontal(x: &[f64], pole: &[f64]) -> Vec<f64> {
    let p = dot(x, pole);
    x.iter().zip(pole).map(|(a, b)| a - p * b).collect()
}

/// Projects `x` along its meridian onto the equator `{y : <y, B> = 0}`.
pub fn meridian_project(x: &[f64], pole: &Pole) -> Result<UnitVector> {
    let h = horizontal(x, pole.coords());
    let len = norm(&h);
    // angular distance to the nearer pole is asin(len)
    if len < POLE_TOLERANCE.sin() {
        return Err(Error::PoleProjection { point: x.to_vec() });
    }
    Ok(UnitVector(h.into_iter().map(|c| c / len).collect()))
}

/// The standard retraction of `S^{n-1} \ {+-A}` onto the equator of `A`.
pub fn equator_retract(y: &[f64], pole: &Pole) -> Result<UnitVector> {
    meridian_project(y, pole)
}

/// The point on the meridian through the equatorial point `base` at latitude `lat`.
pub(crate) fn at_latitude(base: &[f64], pole: &[f64], lat: f64) -> Vec<f64> {
    let (s, c) = lat.sin_cos();
    base.iter().zip(pole).map(|(e, b)| c * e + s * b).collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::f64::consts::PI;

    #[test]
    fn antipode_negates() {
        let x = UnitVector::new(vec![0.6, 0.8, 0.0]).unwrap();
        assert_eq!(antipode(&x).coords(), &[-0.6, -0.8, -0.0]);
        assert_eq!(antipode(&antipode(&x)), x);
        let y = UnitVector::new(vec![1.0, 0.0]).unwrap();
        assert_eq!(antipode(&y).coords(), &[-1.0, -0.0]);
        let n = UnitVector::north(2);
        assert_eq!(antipode(&n).coords(), &[-0.0, -0.0, -1.0]);
    }

    #[test]
    fn latitude_values() {
        let b = Pole::north(2);
        assert!((latitude(&[0.0, 0.0, 1.0], &b) - PI / 2.0).abs() < 1e-15);
        assert_eq!(latitude(&[1.0, 0.0, 0.0], &b), 0.0);
        let x = [0.0, 3f64.sqrt() / 2.0, 0.5];
        assert!((latitude(&x, &b) - PI / 6.0).abs() < 1e-15);
        let mx = [0.0, -(3f64.sqrt()) / 2.0, -0.5];
        assert_eq!(latitude(&mx, &b), -latitude(&x, &b));
    }

    #[test]
    fn meridian_projection_examples() {
        let b = Pole::north(2);
        let p = meridian_project(&[0.6, 0.0, 0.8], &b).unwrap();
        assert!((p.coords()[0] - 1.0).abs() < 1e-15 && p.coords()[1] == 0.0);
        let q = meridian_project(&[0.0, -0.28, -0.96], &b).unwrap();
        assert!((q.coords()[1] + 1.0).abs() < 1e-15);
        assert!(matches!(
            meridian_project(&[0.0, 0.0, 1.0], &b),
            Err(Error::PoleProjection { .. })
        ));
        let near = [1e-12, 0.0, 1.0];
        assert!(meridian_project(&near, &b).is_err());
    }

    #[test]
    fn retraction_fixes_equator_and_rejects_poles() {
        let a = Pole::north(2);
        let y = [0.0, 1.0, 0.0];
        assert_eq!(equator_retract(&y, &a).unwrap().coords(), &y);
        let r = equator_retract(&[0.8, 0.0, 0.6], &a).unwrap();
        assert!((r.coords()[0] - 1.0).abs() < 1e-15);
        assert!(equator_retract(&[0.0, 0.0, -1.0], &a).is_err());
    }

    #[test]
    fn unit_vector_is_normalised() {
        let x = UnitVector::new(vec![3.0, 4.0, 12.0]).unwrap();
        assert!((norm(x.coords()) - 1.0).abs() < 1e-12);
        assert!(UnitVector::new(vec![0.0, 0.0]).is_err());
        assert!(DiskPoint::new(vec![2.0, 0.0]).is_err());
    }
}
