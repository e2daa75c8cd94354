use serde::{Deserialize, Serialize};

use super::map::{Domain, SmoothMap};
use crate::error::{Error, Result};
use crate::linalg::{norm, oriented_complement};

/// Finite-difference policy for derivatives.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct JacobianStencil {
    pub h: f64,
    /// 2 or 4.
    pub order: u8,
}

impl Default for JacobianStencil {
    fn default() -> Self {
        Self { h: 1e-5, order: 2 }
    }
}

impl JacobianStencil {
    pub fn new(h: f64, order: u8) -> Result<Self> {
        if !(h > 0.0 && h.is_finite()) {
            return Err(Error::InvalidParameter(format!("stencil step must be positive, got {h}")));
        }
        if order != 2 && order != 4 {
            return Err(Error::InvalidParameter(format!("stencil order must be 2 or 4, got {order}")));
        }
        Ok(Self { h, order })
    }

    fn offsets(&self) -> &'static [(f64, f64)] {
        // (multiple of h, weight / h)
        match self.order {
            4 => &[(2.0, -1.0 / 12.0), (1.0, 8.0 / 12.0), (-1.0, -8.0 / 12.0), (-2.0, 1.0 / 12.0)],
            _ => &[(1.0, 0.5), (-1.0, -0.5)],
        }
    }
}

/// Derivative of `m` at `x` along `v`, sampling at `retract(x + s h v)`.
pub fn directional_derivative<R>(
    m: &dyn SmoothMap,
    x: &[f64],
    v: &[f64],
    stencil: JacobianStencil,
    retract: R,
) -> Result<Vec<f64>>
where
    R: Fn(&mut [f64]),
{
    let k = m.arity_out();
    let mut acc = vec![0.0; k];
    let mut y = vec![0.0; x.len()];
    let mut val = vec![0.0; k];
    for &(s, w) in stencil.offsets() {
        for ((yi, xi), vi) in y.iter_mut().zip(x).zip(v) {
            *yi = xi + s * stencil.h * vi;
        }
        retract(&mut y);
        m.eval_into(&y, &mut val)?;
        for (a, b) in acc.iter_mut().zip(&val) {
            *a += w * b;
        }
    }
    acc.iter_mut().for_each(|a| *a /= stencil.h);
    Ok(acc)
}

fn one_sided(m: &dyn SmoothMap, x: &[f64], v: &[f64], h: f64) -> Result<Vec<f64>> {
    // second-order forward difference along v
    let at = |s: f64| -> Result<Vec<f64>> {
        let y: Vec<f64> = x.iter().zip(v).map(|(a, b)| a + s * h * b).collect();
        m.eval(&y)
    };
    let (f0, f1, f2) = (at(0.0)?, at(1.0)?, at(2.0)?);
    Ok((0..f0.len())
        .map(|i| (-3.0 * f0[i] + 4.0 * f1[i] - f2[i]) / (2.0 * h))
        .collect())
}

/// Row-major `arity_out x arity_in` Jacobian in ambient coordinates.
///
/// On sphere domains the partials are taken along an orthonormal tangent
/// frame with renormalised sample points, and the normal column is zero.
/// On disk and cylinder domains a one-sided stencil is used when the
/// central stencil would leave the domain.
pub fn jacobian(m: &dyn SmoothMap, x: &[f64], stencil: JacobianStencil) -> Result<Vec<f64>> {
    let n = m.arity_in();
    let k = m.arity_out();
    let mut jac = vec![0.0; k * n];
    match m.domain() {
        Domain::Sphere(_) => {
            for e in oriented_complement(x) {
                let d = directional_derivative(m, x, &e, stencil, |y| {
                    let r = norm(y);
                    y.iter_mut().for_each(|c| *c /= r);
                })?;
                for i in 0..k {
                    for j in 0..n {
                        jac[i * n + j] += d[i] * e[j];
                    }
                }
            }
        }
        domain => {
            let reach = if stencil.order == 4 { 2.0 } else { 1.0 } * stencil.h;
            for j in 0..n {
                let mut e = vec![0.0; n];
                e[j] = 1.0;
                let mut probe = x.to_vec();
                probe[j] = x[j] + reach;
                let fits_plus = domain.contains(&probe, 0.0);
                probe[j] = x[j] - reach;
                let fits_minus = domain.contains(&probe, 0.0);
                let d = if fits_plus && fits_minus {
                    directional_derivative(m, x, &e, stencil, |_| {})?
                } else {
                    if !fits_plus {
                        e[j] = -1.0;
                    }
                    let mut d = one_sided(m, x, &e, stencil.h)?;
                    if !fits_plus {
                        d.iter_mut().for_each(|c| *c = -*c);
                    }
                    d
                };
                for i in 0..k {
                    jac[i * n + j] = d[i];
                }
            }
        }
    }
    Ok(jac)
}
