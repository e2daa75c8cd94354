use std::sync::Arc;

use crate::error::Result;
use crate::mapexpr::{Domain, SmoothMap};

/// `outer ∘ inner`.
#[derive(Clone)]
pub struct Composition {
    outer: Arc<dyn SmoothMap>,
    inner: Arc<dyn SmoothMap>,
}

pub fn compose(outer: Arc<dyn SmoothMap>, inner: Arc<dyn SmoothMap>) -> Composition {
    Composition { outer, inner }
}

impl SmoothMap for Composition {
    fn domain(&self) -> Domain {
        self.inner.domain()
    }

    fn arity_out(&self) -> usize {
        self.outer.arity_out()
    }

    fn eval_into(&self, x: &[f64], out: &mut [f64]) -> Result<()> {
        let y = self.inner.eval(x)?;
        self.outer.eval_into(&y, out)
    }

    fn sphere_valued(&self) -> bool {
        self.outer.sphere_valued()
    }
}
