use std::f64::consts::{PI, TAU};

/// Reduces an angle to `[0, 2π)`.
pub fn wrap_to_tau(x: f64) -> f64 {
    let r = x.rem_euclid(TAU);
    // rem_euclid can round up to exactly TAU for tiny negative inputs.
    if r >= TAU {
        0.0
    } else {
        r
    }
}

/// Reduces an angle to the principal interval `(-π, π]`.
pub fn wrap_to_pi(x: f64) -> f64 {
    let r = wrap_to_tau(x);
    if r > PI {
        r - TAU
    } else {
        r
    }
}
