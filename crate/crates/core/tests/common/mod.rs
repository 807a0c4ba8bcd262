//! Random DSL expressions for property checks.

#![allow(dead_code)]

use nalgebra::Vector3;
use rand::rngs::StdRng;
use rand::{Rng, SeedableRng};

pub fn rng(seed: u64) -> StdRng {
    StdRng::seed_from_u64(seed)
}

const MONOMIALS: [&str; 10] = ["1", "x", "y", "z", "x^2", "y^2", "z^2", "x*y", "y*z", "x*z"];

/// Random polynomial of degree at most two with coefficients in `[-1, 1]`.
pub fn polynomial(rng: &mut StdRng) -> String {
    let mut terms = Vec::new();
    for m in MONOMIALS {
        if rng.random_bool(0.6) {
            terms.push(format!("({:.6})*{m}", rng.random_range(-1.0..1.0)));
        }
    }
    if terms.is_empty() {
        format!("{:.6}", rng.random_range(0.5..1.5))
    } else {
        terms.join(" + ")
    }
}

/// Random smooth scalar mixing polynomials with transcendental factors.
pub fn smooth_scalar(rng: &mut StdRng) -> String {
    let p = polynomial(rng);
    match rng.random_range(0..4) {
        0 => p,
        1 => format!("sin({p})"),
        2 => format!("exp(0.3*({p}))"),
        _ => format!("({p})*cos(x - y) + 1 + x^2"),
    }
}

pub fn polynomial_vector(rng: &mut StdRng) -> String {
    format!(
        "{}, {}, {}",
        polynomial(rng),
        polynomial(rng),
        polynomial(rng)
    )
}

pub fn point_in_cube(rng: &mut StdRng, half: f64) -> Vector3<f64> {
    Vector3::from_fn(|_, _| rng.random_range(-half..half))
}
