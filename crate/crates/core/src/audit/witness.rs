//! Witness finders for the two existence theorems: fixed points of self-maps
//! of the disk and antipodal coincidences of maps `S^n -> R^n`.

use serde::Serialize;

use crate::error::{Error, Result};
use crate::geometry::make_sphere_mesh;
use crate::linalg::{damped_step, norm, normalized, oriented_complement, sub};
use crate::mapexpr::{directional_derivative, jacobian, Domain, JacobianStencil, SmoothMap};

/// A point realising an existence claim up to `defect`.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Witness {
    pub point: Vec<f64>,
    /// `|f(x) - x|` or `|f(x) - f(-x)|`.
    pub defect: f64,
    pub method: String,
    pub iterations: usize,
}

fn better(a: &Witness, b: &Witness) -> bool {
    match a.defect.total_cmp(&b.defect) {
        std::cmp::Ordering::Less => true,
        std::cmp::Ordering::Greater => false,
        std::cmp::Ordering::Equal => a.point.iter().zip(&b.point).map(|(x, y)| x.total_cmp(y)).find(|o| o.is_ne()) == Some(std::cmp::Ordering::Less),
    }
}

fn best_of(ws: Vec<Witness>) -> Option<Witness> {
    ws.into_iter().reduce(|a, b| if better(&b, &a) { b } else { a })
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct FixedPointOptions {
    /// Seeds per axis of the start grid.
    pub grid: usize,
    pub damping: f64,
    pub iterations: usize,
    /// Best starts polished by Newton's method.
    pub polish: usize,
}

impl Default for FixedPointOptions {
    fn default() -> Self {
        Self {
            grid: 8,
            damping: 0.5,
            iterations: 200,
            polish: 8,
        }
    }
}

fn project_to_disk(x: &mut [f64]) {
    let r = norm(x);
    if r > 1.0 {
        x.iter_mut().for_each(|c| *c /= r);
    }
}

fn grid_seeds(n: usize, g: usize) -> Vec<Vec<f64>> {
    let axis: Vec<f64> = (0..g).map(|i| -1.0 + (2.0 * i as f64 + 1.0) / g as f64).collect();
    let mut seeds = vec![vec![0.0; n]];
    let mut idx = vec![0usize; n];
    loop {
        let p: Vec<f64> = idx.iter().map(|&i| axis[i]).collect();
        if norm(&p) <= 1.0 {
            seeds.push(p);
        }
        let mut k = 0;
        while k < n {
            idx[k] += 1;
            if idx[k] < g {
                break;
            }
            idx[k] = 0;
            k += 1;
        }
        if k == n {
            return seeds;
        }
    }
}

fn fixed_defect(f: &dyn SmoothMap, x: &[f64]) -> Result<f64> {
    Ok(norm(&sub(&f.eval(x)?, x)))
}

fn newton_fixed(f: &dyn SmoothMap, start: Witness, steps: usize) -> Result<Witness> {
    let n = start.point.len();
    let mut w = start;
    for _ in 0..steps {
        if w.defect < 1e-15 {
            break;
        }
        let mut j = jacobian(f, &w.point, JacobianStencil::default())?;
        for k in 0..n {
            j[k * n + k] -= 1.0;
        }
        let r = sub(&f.eval(&w.point)?, &w.point);
        let Some(d) = damped_step(&j, n, n, &r, 0.0) else { break };
        let mut scale = 1.0;
        let mut improved = false;
        for _ in 0..20 {
            let mut x: Vec<f64> = w.point.iter().zip(&d).map(|(a, b)| a + scale * b).collect();
            project_to_disk(&mut x);
            let defect = fixed_defect(f, &x)?;
            if defect < w.defect {
                w.point = x;
                w.defect = defect;
                improved = true;
                break;
            }
            scale *= 0.5;
        }
        w.iterations += 1;
        if !improved {
            break;
        }
    }
    Ok(w)
}

/// Best fixed-point witness of `f: D^n -> D^n`: damped iteration from a grid
/// of seeds, then Newton polishing of the best few.
pub fn find_fixed_point(f: &dyn SmoothMap, opts: FixedPointOptions) -> Result<Witness> {
    let Domain::Disk(n) = f.domain() else {
        return Err(Error::InvalidParameter(format!("fixed points need a disk domain, got {}", f.domain())));
    };
    if f.arity_out() != n {
        return Err(Error::ArityMismatch { expected: n, found: f.arity_out() });
    }
    let seeds = grid_seeds(n, opts.grid.max(1));
    let runs = crate::par::try_map(0..seeds.len(), |i| {
        let mut x = seeds[i].clone();
        let mut its = 0;
        for _ in 0..opts.iterations {
            let v = f.eval(&x)?;
            if norm(&sub(&v, &x)) < 1e-15 {
                break;
            }
            x.iter_mut().zip(&v).for_each(|(a, b)| *a += opts.damping * (b - *a));
            project_to_disk(&mut x);
            its += 1;
        }
        Ok(Witness {
            defect: fixed_defect(f, &x)?,
            point: x,
            method: "damped-iteration+newton".into(),
            iterations: its,
        })
    })?;
    let mut order: Vec<usize> = (0..runs.len()).collect();
    order.sort_by(|&a, &b| runs[a].defect.total_cmp(&runs[b].defect).then(a.cmp(&b)));
    let chosen: Vec<Witness> = order.iter().take(opts.polish.max(1)).map(|&i| runs[i].clone()).collect();
    let polished = crate::par::try_map(0..chosen.len(), |i| newton_fixed(f, chosen[i].clone(), 30))?;
    Ok(best_of(polished).expect("at least one seed"))
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct AntipodalOptions {
    /// Starts for the local search; `None` picks 64 on S^1 and S^2, 256 above.
    pub starts: Option<usize>,
    /// Resolution of the sphere mesh scanned for starts.
    pub resolution: usize,
    pub iterations: usize,
}

impl Default for AntipodalOptions {
    fn default() -> Self {
        Self {
            starts: None,
            resolution: 64,
            iterations: 60,
        }
    }
}

/// Searches for `x` with `f(x) = f(-x)`.
///
/// On the circle (a `curve` map of the parameter `t in [0, 1]`, or a map of
/// `sphere1`) this is bisection of `f(t) - f(t + 1/2)` on `[0, 1/2]`. On
/// higher spheres it is a damped Gauss-Newton search on the odd map
/// `f(x) - f(-x)` from the best mesh nodes.
pub fn find_antipodal(f: &dyn SmoothMap, opts: AntipodalOptions) -> Result<Witness> {
    match f.domain() {
        Domain::Curve | Domain::Sphere(1) => bisect_antipodal(f, opts.iterations),
        Domain::Sphere(n) => multistart_antipodal(f, n, opts),
        d => Err(Error::InvalidParameter(format!("antipodal search needs a sphere or curve domain, got {d}"))),
    }
}

fn circle_point(f: &dyn SmoothMap, t: f64) -> Vec<f64> {
    if f.domain() == Domain::Curve {
        vec![t]
    } else {
        let a = std::f64::consts::TAU * t;
        vec![a.cos(), a.sin()]
    }
}

fn bisect_antipodal(f: &dyn SmoothMap, iterations: usize) -> Result<Witness> {
    if f.arity_out() != 1 {
        return Err(Error::ArityMismatch { expected: 1, found: f.arity_out() });
    }
    let phi = |t: f64| -> Result<f64> {
        Ok(f.eval(&circle_point(f, t))?[0] - f.eval(&circle_point(f, t + 0.5))?[0])
    };
    let (mut a, mut b) = (0.0, 0.5);
    let (mut fa, fb) = (phi(a)?, phi(b)?);
    if fa * fb > 0.0 {
        // the curve is not closed; look for any sign change
        let grid = 1024;
        let mut found = None;
        let mut prev = fa;
        for k in 1..=grid {
            let t = 0.5 * k as f64 / grid as f64;
            let v = phi(t)?;
            if prev * v <= 0.0 {
                found = Some((t - 0.5 / grid as f64, t, prev));
                break;
            }
            prev = v;
        }
        match found {
            Some((lo, hi, flo)) => {
                a = lo;
                b = hi;
                fa = flo;
            }
            None => {
                return Ok(Witness {
                    point: circle_point(f, 0.0),
                    defect: fa.abs().min(fb.abs()),
                    method: "bisection".into(),
                    iterations: 0,
                })
            }
        }
    }
    let mut best = if fa.abs() <= fb.abs() { (a, fa) } else { (b, fb) };
    let mut its = 0;
    while its < iterations && best.1 != 0.0 && b - a > f64::EPSILON * 0.5 {
        let m = 0.5 * (a + b);
        let fm = phi(m)?;
        its += 1;
        if fm.abs() < best.1.abs() {
            best = (m, fm);
        }
        if fa * fm <= 0.0 {
            b = m;
        } else {
            a = m;
            fa = fm;
        }
    }
    Ok(Witness {
        point: circle_point(f, best.0),
        defect: best.1.abs(),
        method: "bisection".into(),
        iterations: its,
    })
}

fn coincidence(f: &dyn SmoothMap, x: &[f64]) -> Result<Vec<f64>> {
    let minus: Vec<f64> = x.iter().map(|c| -c).collect();
    Ok(sub(&f.eval(x)?, &f.eval(&minus)?))
}

fn tangent_jacobian_of<F>(g: F, x: &[f64], k: usize, h: f64) -> Result<(Vec<f64>, Vec<Vec<f64>>)>
where
    F: Fn(&[f64]) -> Result<Vec<f64>>,
{
    let frame = oriented_complement(x);
    let n = frame.len();
    let mut j = vec![0.0; k * n];
    for (a, e) in frame.iter().enumerate() {
        let at = |s: f64| -> Result<Vec<f64>> {
            let y: Vec<f64> = x.iter().zip(e).map(|(p, q)| p + s * q).collect();
            g(&normalized(&y))
        };
        let (p, m) = (at(h)?, at(-h)?);
        for i in 0..k {
            j[i * n + a] = (p[i] - m[i]) / (2.0 * h);
        }
    }
    Ok((j, frame))
}

/// Damped Gauss-Newton on a sphere for `g(x) = 0` with `g` of arity `k`.
pub(crate) fn sphere_newton<F>(g: F, start: &[f64], k: usize, iterations: usize) -> Result<(Vec<f64>, f64, usize)>
where
    F: Fn(&[f64]) -> Result<Vec<f64>>,
{
    let mut x = start.to_vec();
    let mut r = g(&x)?;
    let mut err = norm(&r);
    let mut lambda = 1e-6;
    let mut its = 0;
    while its < iterations && err > 1e-15 {
        its += 1;
        let (j, frame) = tangent_jacobian_of(&g, &x, k, 1e-6)?;
        let n = frame.len();
        let Some(d) = damped_step(&j, k, n, &r, lambda) else { break };
        let mut y = x.clone();
        for (a, e) in frame.iter().enumerate() {
            y.iter_mut().zip(e).for_each(|(p, q)| *p += d[a] * q);
        }
        let y = normalized(&y);
        let ry = g(&y)?;
        let ey = norm(&ry);
        if ey < err {
            x = y;
            r = ry;
            err = ey;
            lambda = (lambda / 4.0).max(1e-15);
        } else {
            lambda *= 16.0;
            if lambda > 1e8 {
                break;
            }
        }
    }
    Ok((x, err, its))
}

fn multistart_antipodal(f: &dyn SmoothMap, n: usize, opts: AntipodalOptions) -> Result<Witness> {
    if f.arity_out() != n {
        return Err(Error::ArityMismatch { expected: n, found: f.arity_out() });
    }
    let mesh = make_sphere_mesh(n, opts.resolution)?;
    let scores = crate::par::try_map(0..mesh.len(), |i| Ok(norm(&coincidence(f, mesh.node(i))?)))?;
    let mut order: Vec<usize> = (0..mesh.len()).filter(|&i| i < mesh.antipode[i]).collect();
    order.sort_by(|&a, &b| scores[a].total_cmp(&scores[b]).then(a.cmp(&b)));
    let starts = opts.starts.unwrap_or(if n <= 2 { 64 } else { 256 }).min(order.len());
    let runs = crate::par::try_map(0..starts, |s| {
        let start = mesh.node(order[s]);
        let (x, defect, its) = sphere_newton(|y| coincidence(f, y), start, n, opts.iterations)?;
        Ok(Witness {
            point: x,
            defect,
            method: "multistart-gauss-newton".into(),
            iterations: its,
        })
    })?;
    Ok(best_of(runs).expect("at least one start"))
}

/// Jacobian of a sphere map in the tangent frame `oriented_complement(x)`.
pub(crate) fn tangent_jacobian(m: &dyn SmoothMap, x: &[f64]) -> Result<(Vec<f64>, Vec<Vec<f64>>)> {
    let frame = oriented_complement(x);
    let k = m.arity_out();
    let n = frame.len();
    let mut j = vec![0.0; k * n];
    for (a, e) in frame.iter().enumerate() {
        let d = directional_derivative(m, x, e, JacobianStencil::default(), |y| {
            let r = norm(y);
            y.iter_mut().for_each(|c| *c /= r);
        })?;
        for i in 0..k {
            j[i * n + a] = d[i];
        }
    }
    Ok((j, frame))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::mapexpr::parse_map;

    #[test]
    fn fixed_point_examples() {
        let c = parse_map("(0.3, -0.2)", Domain::Disk(2)).unwrap();
        let w = find_fixed_point(&c, FixedPointOptions::default()).unwrap();
        assert!(w.defect <= 1e-12);
        assert!((w.point[0] - 0.3).abs() < 1e-12);
        let rot = parse_map("(cos(1)*x1 - sin(1)*x2, sin(1)*x1 + cos(1)*x2)", Domain::Disk(2)).unwrap();
        let w = find_fixed_point(&rot, FixedPointOptions::default()).unwrap();
        assert!(norm(&w.point) < 1e-8);
        let sq = parse_map("(x1^2/2, x2^2/2)", Domain::Disk(2)).unwrap();
        let w = find_fixed_point(&sq, FixedPointOptions::default()).unwrap();
        assert!(norm(&w.point) < 1e-8 && w.defect <= 1e-12);
    }

    #[test]
    fn antipodal_examples() {
        let proj = parse_map("(x1, x2)", Domain::Sphere(2)).unwrap();
        let w = find_antipodal(&proj, AntipodalOptions::default()).unwrap();
        assert!(w.defect <= 1e-9);
        assert!((w.point[2].abs() - 1.0).abs() < 1e-6);
        let cos = parse_map("(cos(2*pi*x1))", Domain::Curve).unwrap();
        let w = find_antipodal(&cos, AntipodalOptions::default()).unwrap();
        assert!(w.defect <= 1e-10 && w.iterations <= 60);
        assert!((w.point[0] - 0.25).abs() < 1e-9);
        let circ = parse_map("(x1 + x2^2)", Domain::Sphere(1)).unwrap();
        let w = find_antipodal(&circ, AntipodalOptions::default()).unwrap();
        assert!(w.defect <= 1e-10);
    }

    #[test]
    fn grid_seeds_stay_in_disk() {
        for n in 1..=3 {
            for s in grid_seeds(n, 5) {
                assert!(norm(&s) <= 1.0);
            }
        }
    }
}
