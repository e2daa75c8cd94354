//! Acceptance suite: each criterion prints one PASS/FAIL line; the process
//! fails if any criterion fails.

mod support;

use std::f64::consts::PI;
use std::sync::Arc;
use std::time::{Duration, Instant};

use stokes_audit::audit::{
    antisymmetry_pair, cylinder_ledger, find_antipodal, find_fixed_point, meridian_separation,
    odd_winding_certificate, random_unit, sample_regular_value, AntipodalOptions, AuditReport, FixedPointOptions,
    LedgerTolerances,
};
use stokes_audit::constructions::{
    cylinder_pipeline, equator_distance, equivariant_isotopy, reduce_dimension, winding_sphere_map, IsotopyParams,
    PipelineParams, PoleSelection, ReduceParams,
};
use stokes_audit::forms::{stokes_check, surface_sum, volume_pullback_integral};
use stokes_audit::geometry::{
    defaults, latitude, make_cylinder_mesh, make_disk_mesh, make_sphere_mesh, CurveMesh, Pole,
};
use stokes_audit::linalg::{distance, neg, norm, normalized};
use stokes_audit::mapexpr::{parse_map, Domain, JacobianStencil, MapExpr, SmoothMap};
use stokes_audit::Error;

use support::*;

type Check = Result<String, String>;

fn within(label: &str, observed: f64, tol: f64) -> Result<(), String> {
    if observed <= tol {
        Ok(())
    } else {
        Err(format!("{label}: {observed:.3e} exceeds {tol:.1e}"))
    }
}

fn timed(label: &str, elapsed: Duration, limit: f64) -> Result<(), String> {
    within(&format!("{label} runtime (s)"), elapsed.as_secs_f64(), limit)
}

fn e<E: std::fmt::Display>(err: E) -> String {
    err.to_string()
}

fn identity_volume() -> Check {
    let mut detail = Vec::new();
    for (n, exact, tol) in [(2, PI, 1e-6), (3, 4.0 * PI / 3.0, 1e-5)] {
        let start = Instant::now();
        let mesh = make_disk_mesh(n, defaults::disk_resolution(n)).map_err(e)?;
        let v = volume_pullback_integral(&MapExpr::identity(Domain::Disk(n)), &mesh, JacobianStencil::default())
            .map_err(e)?;
        let elapsed = start.elapsed();
        within(&format!("|int det DI - |D^{n}||"), (v.value - exact).abs(), tol)?;
        timed(&format!("D^{n}"), elapsed, 2.0)?;
        detail.push(format!("D^{n} error {:.1e} in {:.2}s", (v.value - exact).abs(), elapsed.as_secs_f64()));
    }
    Ok(detail.join(", "))
}

fn stokes_corpus() -> Check {
    let start = Instant::now();
    let stencil = JacobianStencil::default();
    let mut worst: f64 = 0.0;
    let mut worst_ratio = f64::INFINITY;
    let mut count = [0usize; 2];
    for (n, corpus) in [(2, DISK2_CORPUS), (3, DISK3_CORPUS)] {
        let mesh = make_disk_mesh(n, defaults::disk_resolution(n)).map_err(e)?;
        for src in corpus {
            let m = parse_map(src, Domain::Disk(n)).map_err(e)?;
            for k in 0..n {
                let c = stokes_check(&m, &mesh, k, stencil).map_err(e)?;
                within(&format!("residual of {src} (k={k})"), c.residual, 1e-4)?;
                let ratio = c.residual / c.refined_residual;
                if !(ratio >= 3.0) {
                    return Err(format!(
                        "{src} (k={k}): residual {:.3e} -> {:.3e} on refinement, ratio {ratio:.2}",
                        c.residual, c.refined_residual
                    ));
                }
                worst = worst.max(c.residual);
                worst_ratio = worst_ratio.min(ratio);
            }
            count[n - 2] += 1;
        }
    }
    let elapsed = start.elapsed();
    if count[0] < 20 || count[1] < 5 {
        return Err(format!("corpus too small: {} + {} maps", count[0], count[1]));
    }
    timed("corpus", elapsed, 60.0)?;
    Ok(format!(
        "{} + {} maps, worst residual {worst:.2e}, smallest refinement ratio {worst_ratio:.2} in {:.1}s",
        count[0],
        count[1],
        elapsed.as_secs_f64()
    ))
}

fn curve_family(seed: u64, pool: &[i32]) -> Vec<(i32, String)> {
    let mut rng = rng(seed);
    (0..50)
        .map(|i| {
            let k = pool[i % pool.len()];
            (k, harmonic_curve(&mut rng, k, pool))
        })
        .collect()
}

fn odd_winding() -> Check {
    let start = Instant::now();
    let curve = CurveMesh::new(defaults::CURVE_SAMPLES).map_err(e)?;
    let mut worst: f64 = 0.0;
    for (pool, want_odd) in [(ODD_HARMONICS, true), (EVEN_HARMONICS, false)] {
        for (k, src) in curve_family(if want_odd { 301 } else { 302 }, pool) {
            let h = parse_map(&src, Domain::Curve).map_err(e)?;
            let c = odd_winding_certificate(&h, &curve).map_err(e)?;
            if c.odd != want_odd || c.k != i64::from(k) {
                return Err(format!("harmonic {k} gave k = {} (odd = {})", c.k, c.odd));
            }
            within("winding residual", c.residual, 0.05)?;
            worst = worst.max(c.residual);
        }
    }
    let elapsed = start.elapsed();
    timed("winding", elapsed, 10.0)?;
    Ok(format!("50 odd + 50 even curves classified, worst residual {worst:.1e} in {:.2}s", elapsed.as_secs_f64()))
}

fn antisymmetry() -> Check {
    let curve = CurveMesh::new(defaults::CURVE_SAMPLES).map_err(e)?;
    let mut worst: f64 = 0.0;
    let mut count = 0;
    for pool in [ODD_HARMONICS, EVEN_HARMONICS] {
        for (_, src) in curve_family(400, pool) {
            let h = parse_map(&src, Domain::Curve).map_err(e)?;
            let (a, b) = antisymmetry_pair(&h, &curve).map_err(e)?;
            worst = worst.max((a.value + b.value).abs());
            count += 1;
        }
    }
    // boundary circles of the planar corpus
    let mesh = make_disk_mesh(2, defaults::DISK2_RESOLUTION).map_err(e)?;
    let stencil = JacobianStencil::default();
    for src in DISK2_CORPUS {
        let m = parse_map(src, Domain::Disk(2)).map_err(e)?;
        let a = surface_sum(&m, &mesh.boundary, Some(0), &[1], stencil).map_err(e)?;
        let b = surface_sum(&m, &mesh.boundary, Some(1), &[0], stencil).map_err(e)?;
        worst = worst.max((a + b).abs());
        count += 1;
    }
    within("|int g1 dg2 + int g2 dg1|", worst, 1e-8)?;
    Ok(format!("{count} closed curves, worst |sum| {worst:.1e}"))
}

fn borsuk_ulam() -> Check {
    let opts = AntipodalOptions::default();
    let planar = parse_map("(x1, x2)", Domain::Sphere(2)).map_err(e)?;
    let w = find_antipodal(&planar, opts).map_err(e)?;
    let pole_gap = distance(&w.point, &[0.0, 0.0, 1.0]).min(distance(&w.point, &[0.0, 0.0, -1.0]));
    within("distance of the (x1, x2) witness to ±e3", pole_gap, 1e-6)?;

    let mut rng = rng(500);
    let mut worst: f64 = 0.0;
    for _ in 0..20 {
        let src = trig_sphere_map(&mut rng);
        let m = parse_map(&src, Domain::Sphere(2)).map_err(e)?;
        let w = find_antipodal(&m, opts).map_err(e)?;
        // defect recomputed from the map, not taken from the finder
        let x = normalized(&w.point);
        let d = distance(&m.eval(&x).map_err(e)?, &m.eval(&neg(&x)).map_err(e)?);
        within(&format!("antipodal defect of {src}"), d, 1e-6)?;
        worst = worst.max(d);
    }

    let mut worst_bisect: f64 = 0.0;
    let mut max_iter = 0;
    for _ in 0..20 {
        let src = trig_curve_function(&mut rng);
        let m = parse_map(&src, Domain::Curve).map_err(e)?;
        let w = find_antipodal(&m, opts).map_err(e)?;
        let t = w.point[0];
        let d = (m.eval(&[t]).map_err(e)?[0] - m.eval(&[t + 0.5]).map_err(e)?[0]).abs();
        within(&format!("bisection defect of {src}"), d, 1e-10)?;
        within("bisection iterations", w.iterations as f64, 60.0)?;
        worst_bisect = worst_bisect.max(d);
        max_iter = max_iter.max(w.iterations);
    }
    Ok(format!(
        "(x1, x2) witness {pole_gap:.1e} from the pole, 20 random maps worst defect {worst:.1e}, \
         bisection worst {worst_bisect:.1e} in at most {max_iter} steps"
    ))
}

fn brouwer() -> Check {
    let mut rng = rng(600);
    let mut worst: f64 = 0.0;
    for _ in 0..20 {
        let src = contractive_polynomial(&mut rng);
        let m = parse_map(&src, Domain::Disk(2)).map_err(e)?;
        let w = find_fixed_point(&m, FixedPointOptions::default()).map_err(e)?;
        let d = distance(&m.eval(&w.point).map_err(e)?, &w.point);
        within(&format!("fixed-point defect of {src}"), d, 1e-8)?;
        worst = worst.max(d);
    }
    Ok(format!("20 contractions, worst defect {worst:.1e}"))
}

fn isotopy() -> Check {
    let b = Pole::new(vec![0.0, 0.0, 1.0]).map_err(e)?;
    let eps = 0.2;
    let mut rng = rng(700);
    let probes: Vec<Vec<f64>> = (0..200).map(|_| random_unit(&mut rng, 3)).collect();
    let mut built = 0;
    let mut worst_odd: f64 = 0.0;
    let mut worst_margin = f64::INFINITY;
    while built < 10 {
        let size = 1 + built % 4;
        let x_set: Vec<Vec<f64>> = (0..size)
            .map(|_| loop {
                let x = random_unit(&mut rng, 3);
                if latitude(&x, &b).abs() < PI / 2.0 - 3.0 * eps {
                    break x;
                }
            })
            .collect();
        if meridian_separation(&x_set, &b).map_err(e)? < 0.3 {
            continue;
        }
        let family = Arc::new(equivariant_isotopy(&x_set, &b, IsotopyParams::new(eps)).map_err(e)?);
        for x in &probes {
            let d = distance(&family.psi(0.0, x).map_err(e)?, x);
            within("psi_0 - identity", d, 1e-12)?;
            for t in [0.25, 0.5, 0.75, 1.0] {
                let odd = norm(
                    &family
                        .psi(t, x)
                        .map_err(e)?
                        .iter()
                        .zip(family.psi(t, &neg(x)).map_err(e)?)
                        .map(|(p, q)| p + q)
                        .collect::<Vec<f64>>(),
                );
                within("equivariance defect", odd, 1e-9)?;
                worst_odd = worst_odd.max(odd);
            }
        }
        for x in &x_set {
            let pre = family.psi_inverse(1.0, x).map_err(e)?;
            within("psi_1(psi_1^-1(x)) - x", distance(&family.psi(1.0, &pre).map_err(e)?, x), 1e-10)?;
            let lat = latitude(&pre, &b);
            if !(lat > 0.0) {
                return Err(format!("{x:?} is not in psi(upper hemisphere): preimage latitude {lat}"));
            }
            worst_margin = worst_margin.min(lat);
        }
        built += 1;
    }
    // negative control: x and -y on one meridian
    let pair = vec![normalized(&[1.0, 0.0, 0.5]), normalized(&[-1.0, 0.0, 0.3])];
    match equivariant_isotopy(&pair, &b, IsotopyParams::new(eps)) {
        Err(Error::MeridianConditionViolated { .. }) => {}
        other => return Err(format!("meridian control not rejected: {:?}", other.err())),
    }
    Ok(format!(
        "10 sets, worst equivariance defect {worst_odd:.1e}, smallest preimage latitude {worst_margin:.3}, control rejected"
    ))
}

fn replacement_map() -> Check {
    let params = PipelineParams::standard();
    let p = cylinder_pipeline(Arc::new(MapExpr::identity(Domain::Sphere(2))), &params).map_err(e)?;
    let gd = &p.replacement;
    let g_star = gd.g_star();
    let (a, b) = (&params.a, &params.b);
    let mesh = make_sphere_mesh(2, 64).map_err(e)?;
    let mut worst_odd: f64 = 0.0;
    let mut worst_hemi: f64 = 0.0;
    let mut min_sum = f64::INFINITY;
    for i in 0..mesh.len() {
        let x = mesh.node(i);
        let v = gd.eval(x).map_err(e)?;
        let w = gd.eval(&neg(x)).map_err(e)?;
        worst_odd = worst_odd.max(norm(&v.iter().zip(&w).map(|(p, q)| p + q).collect::<Vec<_>>()));
        let lx = latitude(x, b);
        if lx.abs() > 1e-9 {
            // a point of the open upper hemisphere must not land in the lower one
            worst_hemi = worst_hemi.max((-lx.signum() * latitude(&v, a)).max(0.0));
        }
        let s = g_star.eval(x).map_err(e)?;
        min_sum = min_sum.min(norm(&v.iter().zip(&s).map(|(p, q)| p + q).collect::<Vec<_>>()));
    }
    within("oddness defect", worst_odd, 1e-9)?;
    within("hemisphere violation", worst_hemi, 1e-12)?;
    if !(min_sum > 0.0) {
        return Err(format!("min |g† + g_*| = {min_sum}"));
    }
    let d = equator_distance(g_star.as_ref(), b, a, 4096).map_err(e)?;
    let report = gd.report();
    if !(report.raw_margin >= d / 10.0) {
        return Err(format!("pre-mollification margin {} below d/10 = {}", report.raw_margin, d / 10.0));
    }
    Ok(format!(
        "oddness {worst_odd:.1e}, min |g† + g_*| {min_sum:.3}, margin {:.3} vs d/10 = {:.3}",
        report.raw_margin,
        d / 10.0
    ))
}

fn cylinder() -> Check {
    let start = Instant::now();
    let mesh = make_cylinder_mesh(defaults::CYLINDER_RESOLUTION).map_err(e)?;
    let stencil = JacobianStencil::default();
    let tol = LedgerTolerances::default();
    let identity: Arc<dyn SmoothMap> = Arc::new(MapExpr::identity(Domain::Sphere(2)));
    let mut detail = Vec::new();
    for (label, g) in [("identity", identity), ("winding 3", winding_sphere_map(3))] {
        let p = cylinder_pipeline(g, &PipelineParams::standard()).map_err(e)?;
        let r = cylinder_ledger(&p.map, &mesh, stencil, tol).map_err(e)?;
        let q = |n: &str| r.quantities[n].value;
        within(&format!("{label}: |T2|"), q("T2_side").abs(), 1e-6)?;
        within(&format!("{label}: |T4 - T5|"), (q("T4_top_area") - q("T5_rim")).abs(), 1e-4)?;
        let ratio = q("T5_rim") / PI;
        let k = ratio.round();
        within(&format!("{label}: T5/pi residual"), (ratio - k).abs(), 0.05)?;
        if (k as i64).rem_euclid(2) != 1 {
            return Err(format!("{label}: T5/pi = {ratio} is not odd"));
        }
        if label == "winding 3" {
            within("|T5 - 3 pi|", (q("T5_rim") - 3.0 * PI).abs(), 1e-3)?;
        }
        detail.push(format!("{label}: T5/pi = {ratio:.6}, |T4 - T5| = {:.1e}", (q("T4_top_area") - q("T5_rim")).abs()));
    }
    let elapsed = start.elapsed();
    timed("ledger", elapsed, 300.0)?;
    Ok(format!("{} in {:.1}s", detail.join("; "), elapsed.as_secs_f64()))
}

fn seeded_report(seed: u64) -> Result<String, String> {
    let mut r = AuditReport::new("acceptance-reproducibility", "winding(3)").with_seed(seed);
    let g = winding_sphere_map(3);
    let rv = sample_regular_value(g.as_ref(), 8, seed, 32).map_err(e)?;
    r.certificate("regular_value", &rv);
    let mut rng = rng(seed);
    let m = parse_map(&trig_sphere_map(&mut rng), Domain::Sphere(2)).map_err(e)?;
    r.witness(find_antipodal(&m, AntipodalOptions::default()).map_err(e)?);
    let f = Arc::new(parse_map("(x1 + x3, x2 - x3^3)", Domain::Sphere(2)).map_err(e)?);
    let reduced = reduce_dimension(f, &PoleSelection::Sampled { seed, trials: 64 }, &ReduceParams::default())
        .map_err(e)?;
    r.certificate("reduction", &reduced.report);
    Ok(r.to_json())
}

fn reproducibility() -> Check {
    let first = seeded_report(1234)?;
    let second = seeded_report(1234)?;
    if first != second {
        return Err("two runs with the same seed differ".into());
    }
    let other = seeded_report(1235)?;
    if other == first {
        return Err("a different seed produced the same report".into());
    }
    Ok(format!("{} identical bytes", first.len()))
}

fn main() {
    let checks: [(&str, fn() -> Check); 10] = [
        ("identity volume baseline", identity_volume),
        ("Stokes identity on the disk corpus", stokes_corpus),
        ("odd winding certificate", odd_winding),
        ("antisymmetry of boundary integrals", antisymmetry),
        ("antipodal witness finder", borsuk_ulam),
        ("fixed-point witness finder", brouwer),
        ("equivariant isotopy", isotopy),
        ("hemisphere-preserving replacement", replacement_map),
        ("cylinder ledger", cylinder),
        ("reproducible reports", reproducibility),
    ];
    let mut failed = 0;
    for (i, (name, check)) in checks.iter().enumerate() {
        match check() {
            Ok(detail) => println!("PASS {:>2} {name}: {detail}", i + 1),
            Err(reason) => {
                failed += 1;
                println!("FAIL {:>2} {name}: {reason}", i + 1);
            }
        }
    }
    println!("{} of {} acceptance criteria passed", checks.len() - failed, checks.len());
    if failed > 0 {
        std::process::exit(1);
    }
}
