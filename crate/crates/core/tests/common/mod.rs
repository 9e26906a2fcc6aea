#![allow(dead_code)]

use std::f64::consts::{FRAC_PI_2, PI};

use rand::rngs::StdRng;
use rand::{Rng, SeedableRng};
use trifit::geom::{validate_config, validate_shape, LineConfig, TriangleShape};
use trifit::Vec3;

pub fn rng(seed: u64) -> StdRng {
    StdRng::seed_from_u64(seed)
}

/// Each angle at most pi/2 - 1e-3.
pub fn acute_shape(rng: &mut StdRng) -> TriangleShape {
    let top = FRAC_PI_2 - 1e-3;
    loop {
        let a = rng.random_range(0.0..top);
        let b = rng.random_range(0.0..top);
        let c = PI - a - b;
        if c > 0.0 && c <= top {
            return validate_shape(a, b, c).unwrap();
        }
    }
}

/// One angle strictly greater than pi/2, at a random vertex.
pub fn obtuse_shape(rng: &mut StdRng) -> TriangleShape {
    loop {
        let big = rng.random_range(FRAC_PI_2..PI);
        if big <= FRAC_PI_2 {
            continue;
        }
        let rest = PI - big;
        let x = rng.random_range(0.0..rest);
        let y = rest - x;
        if x <= 0.0 || y <= 0.0 {
            continue;
        }
        let mut v = [big, x, y];
        let k = rng.random_range(0..3);
        v.swap(0, k);
        if let Ok(s) = validate_shape(v[0], v[1], v[2]) {
            return s;
        }
    }
}

/// Any valid shape, angles at least 1e-3.
pub fn any_shape(rng: &mut StdRng) -> TriangleShape {
    loop {
        let a = rng.random_range(1e-3..PI);
        let b = rng.random_range(1e-3..PI);
        let c = PI - a - b;
        if c >= 1e-3 {
            if let Ok(s) = validate_shape(a, b, c) {
                return s;
            }
        }
    }
}

/// Valid config with every strict inequality satisfied by at least 1e-2.
pub fn config(rng: &mut StdRng) -> LineConfig {
    let m = 1e-2;
    loop {
        let al = rng.random_range(m..PI - m);
        let be = rng.random_range(m..PI - m);
        let ga = rng.random_range(m..PI - m);
        if al + be + ga <= 2.0 * PI - m && al + m <= be + ga && be + m <= ga + al && ga + m <= al + be {
            return validate_config(al, be, ga).unwrap();
        }
    }
}

pub fn gamma(rng: &mut StdRng) -> f64 {
    rng.random_range(1e-2..PI - 1e-2)
}

pub fn scale(rng: &mut StdRng) -> f64 {
    rng.random_range(0.25..4.0)
}

pub fn unit(rng: &mut StdRng) -> Vec3 {
    loop {
        let v = Vec3::new(
            rng.random_range(-1.0..1.0),
            rng.random_range(-1.0..1.0),
            rng.random_range(-1.0..1.0),
        );
        let n = v.norm();
        if n > 0.1 && n <= 1.0 {
            return v / n;
        }
    }
}

/// Random proper rotation (via a random unit quaternion).
pub fn rotation(rng: &mut StdRng) -> nalgebra::Rotation3<f64> {
    let axis = nalgebra::Unit::new_normalize(unit(rng));
    nalgebra::Rotation3::from_axis_angle(&axis, rng.random_range(0.0..2.0 * PI))
}
