//! WebAssembly bindings for the browser demo. Every entry point takes DSL
//! source text and returns a JSON string, so the page needs no glue beyond
//! `JSON.parse`.

use serde::Serialize;
use wasm_bindgen::prelude::*;

use stokes_audit::audit::{antisymmetry_pair, find_antipodal, odd_winding_certificate, AntipodalOptions, Witness};
use stokes_audit::forms::stokes_check;
use stokes_audit::geometry::{make_disk_mesh, CurveMesh};
use stokes_audit::mapexpr::{parse_map, Domain, JacobianStencil, SmoothMap};

#[derive(Serialize)]
struct WindingView {
    k: i64,
    odd: bool,
    ratio: f64,
    residual: f64,
    antisymmetry: f64,
    /// Flattened `(h1, h2)` samples of the curve.
    curve: Vec<f64>,
}

#[derive(Serialize)]
struct StokesView {
    volume: f64,
    boundary: f64,
    residual: f64,
    refined_residual: f64,
}

#[derive(Serialize)]
struct AntipodalView {
    witness: Witness,
    image: Vec<f64>,
    image_antipode: Vec<f64>,
}

#[derive(Serialize)]
#[serde(tag = "status", rename_all = "lowercase")]
enum Reply<T> {
    Ok { result: T },
    Error { message: String },
}

fn reply<T: Serialize>(r: stokes_audit::Result<T>) -> String {
    let r = match r {
        Ok(result) => Reply::Ok { result },
        Err(e) => Reply::Error { message: e.to_string() },
    };
    serde_json::to_string(&r).unwrap_or_else(|e| format!(r#"{{"status":"error","message":"{e}"}}"#))
}

pub fn winding_json(source: &str, samples: usize) -> String {
    reply((|| {
        let h = parse_map(source, Domain::Curve)?;
        let mesh = CurveMesh::new(samples)?;
        let cert = odd_winding_certificate(&h, &mesh)?;
        let (a, b) = antisymmetry_pair(&h, &mesh)?;
        let mut curve = Vec::with_capacity(2 * (samples + 1));
        for i in 0..=samples {
            curve.extend(h.eval(&[i as f64 / samples as f64])?);
        }
        Ok(WindingView {
            k: cert.k,
            odd: cert.odd,
            ratio: cert.value / std::f64::consts::PI,
            residual: cert.residual,
            antisymmetry: (a.value + b.value).abs(),
            curve,
        })
    })())
}

pub fn stokes_json(source: &str, dim: usize, resolution: usize) -> String {
    reply((|| {
        let m = parse_map(source, Domain::Disk(dim))?;
        let mesh = make_disk_mesh(dim, resolution)?;
        let c = stokes_check(&m, &mesh, 0, JacobianStencil::default())?;
        Ok(StokesView {
            volume: c.volume.value,
            boundary: c.sign * c.boundary.value,
            residual: c.residual,
            refined_residual: c.refined_residual,
        })
    })())
}

pub fn antipodal_json(source: &str, sphere: usize) -> String {
    reply((|| {
        let m = parse_map(source, Domain::Sphere(sphere))?;
        let w = find_antipodal(&m, AntipodalOptions::default())?;
        let x = w.point.clone();
        let minus: Vec<f64> = x.iter().map(|c| -c).collect();
        Ok(AntipodalView {
            image: m.eval(&x)?,
            image_antipode: m.eval(&minus)?,
            witness: w,
        })
    })())
}

/// Winding certificate of `t -> (h1(t), h2(t))` with the sampled curve.
#[wasm_bindgen]
pub fn winding(source: &str, samples: usize) -> String {
    winding_json(source, samples)
}

/// Both sides of Stokes' identity for a map of the disk `D^dim`.
#[wasm_bindgen]
pub fn stokes(source: &str, dim: usize, resolution: usize) -> String {
    stokes_json(source, dim, resolution)
}

/// An antipodal coincidence `f(x) = f(-x)` for `f: S^n -> R^n`.
#[wasm_bindgen]
pub fn antipodal(source: &str, sphere: usize) -> String {
    antipodal_json(source, sphere)
}
