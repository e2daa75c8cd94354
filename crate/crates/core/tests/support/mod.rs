//! Map corpora and seeded random map families shared by the integration
//! tests.

#![allow(dead_code)]

use rand::Rng;
use rand_chacha::ChaCha8Rng;

/// Smooth maps of D^2 whose quadrature error is above roundoff at the
/// default resolution, so refinement is measurable.
pub const DISK2_CORPUS: &[&str] = &[
    "(exp(x1)*cos(x2), exp(x1)*sin(x2))",
    "(sin(2*x1 + x2), x1*x2^2)",
    "(x1/(2 + x2), x2/(2 + x1))",
    "(sqrt(2 + x1), x2*exp(-x1))",
    "(x1^5, x2^5)",
    "(x1*exp(x2), x2*exp(x1))",
    "(sin(x1 + x2), x1*x2^2)",
    "(exp(x1), exp(x2))",
    "(x1*x2^3, x1^2 + x2)",
    "(exp(0.5*x1)*x2, exp(x2)*x1)",
    "(1/(3 + x1 + x2), x1 - x2)",
    "(sqrt(3 + x1 + x2), sqrt(3 - x1 + x2))",
    "(exp(x1 + x2), x2*x1^2)",
    "(x1*sqrt(2 + x2), x2*sqrt(2 + x1))",
    "(atan2(x2, 3 + x1), x1 + x2^2/(2 + x1))",
    "(x1/(3 + x1*x2), x2 + x1^2)",
    "(sin(x1)*x2^2, exp(x1)*x2)",
    "(cos(x1 + x2)*x1, x2*exp(0.5*x1))",
    "(exp(x1*x2)*x1, x2)",
    "(sqrt(4 + x1^2 + x2), x1*x2)",
    "(x1*exp(-x2^2), x2*exp(-x1^2))",
    "(exp(x2)*x1^3, x2)",
];

/// Smooth maps of D^3 with the same property.
pub const DISK3_CORPUS: &[&str] = &[
    "(exp(x1)*x2, x3^3, cos(x1 + x2))",
    "(x1*exp(x3), x2*exp(x1), x3*exp(x2))",
    "(x1 + x2*x3, x2^3, sin(x3))",
    "(x1/(2 + x2), x2/(2 + x3), x3/(2 + x1))",
    "(sqrt(3 + x1), x2*exp(x3), x3 + x1*x2)",
    "(x1*exp(x2*x3), x2, x3)",
];

fn coeff(rng: &mut ChaCha8Rng, scale: f64) -> f64 {
    rng.random_range(-scale..scale)
}

/// A normalised harmonic sum `t -> z(t)/|z(t)|` with `z = e^{2 pi i k t} +
/// small terms`, where the other harmonics are drawn from `pool` with total
/// amplitude at most `0.6`. By Rouche's theorem the winding number is `k`.
pub fn harmonic_curve(rng: &mut ChaCha8Rng, k: i32, pool: &[i32]) -> String {
    let mut re = format!("cos({}*2*pi*x1)", k);
    let mut im = format!("sin({}*2*pi*x1)", k);
    let others: Vec<i32> = pool.iter().copied().filter(|&j| j != k).collect();
    let mut budget = 0.6;
    for &j in &others {
        let amp = rng.random_range(0.0..budget / 2.0);
        budget -= amp;
        let phase = rng.random_range(0.0..std::f64::consts::TAU);
        re.push_str(&format!(" + {amp:.6}*cos({j}*2*pi*x1 + {phase:.6})"));
        im.push_str(&format!(" + {amp:.6}*sin({j}*2*pi*x1 + {phase:.6})"));
    }
    let r = format!("sqrt(({re})^2 + ({im})^2)");
    format!("(({re})/{r}, ({im})/{r})")
}

pub const ODD_HARMONICS: &[i32] = &[-5, -3, -1, 1, 3, 5];
pub const EVEN_HARMONICS: &[i32] = &[-4, -2, 0, 2, 4];

/// A random map `S^2 -> R^2` with trigonometric-polynomial coordinates.
pub fn trig_sphere_map(rng: &mut ChaCha8Rng) -> String {
    let mut coords = Vec::new();
    for _ in 0..2 {
        let mut terms = Vec::new();
        for _ in 0..3 {
            let (a, b, c) = (coeff(rng, 2.0), coeff(rng, 2.0), coeff(rng, 2.0));
            let w = coeff(rng, 1.0);
            let func = if rng.random_bool(0.5) { "sin" } else { "cos" };
            terms.push(format!("{w:.6}*{func}({a:.6}*x1 + {b:.6}*x2 + {c:.6}*x3)"));
        }
        terms.push(format!("{:.6}*x1*x2", coeff(rng, 1.0)));
        coords.push(terms.join(" + "));
    }
    format!("({})", coords.join(", "))
}

/// A random quadratic self-map of D^2: every Jacobian entry is below 0.3,
/// so the Lipschitz constant is below 0.6, and the image lies inside the
/// disk of radius 0.9.
pub fn contractive_polynomial(rng: &mut ChaCha8Rng) -> String {
    let c = [coeff(rng, 0.25), coeff(rng, 0.25)];
    let l = [coeff(rng, 0.15), coeff(rng, 0.15), coeff(rng, 0.15), coeff(rng, 0.15)];
    let q = [coeff(rng, 0.05), coeff(rng, 0.05), coeff(rng, 0.05)];
    let p = [coeff(rng, 0.05), coeff(rng, 0.05), coeff(rng, 0.05)];
    let comp = |c: f64, l1: f64, l2: f64, q: [f64; 3]| {
        format!(
            "{c:.6} + {l1:.6}*x1 + {l2:.6}*x2 + {:.6}*x1^2 + {:.6}*x1*x2 + {:.6}*x2^2",
            q[0], q[1], q[2]
        )
    };
    format!("({}, {})", comp(c[0], l[0], l[1], q), comp(c[1], l[2], l[3], p))
}

/// A random smooth function of the circle parameter for bisection tests.
pub fn trig_curve_function(rng: &mut ChaCha8Rng) -> String {
    let mut terms = Vec::new();
    for j in 1..=4 {
        let (a, b) = (coeff(rng, 1.0), coeff(rng, 1.0));
        terms.push(format!("{a:.6}*cos({j}*2*pi*x1) + {b:.6}*sin({j}*2*pi*x1)"));
    }
    format!("({})", terms.join(" + "))
}

/// Seeded generator for a named test family.
pub fn rng(seed: u64) -> ChaCha8Rng {
    use rand::SeedableRng;
    ChaCha8Rng::seed_from_u64(seed)
}
