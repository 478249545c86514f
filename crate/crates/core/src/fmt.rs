//! Number formatting shared by every CSV emitter.
//!
//! Rust's `Display` for `f64` prints the shortest decimal string that parses
//! back to the same bits, which is exactly what byte-reproducible output
//! needs.

pub fn num(x: f64) -> String {
    if x == 0.0 {
        // collapse -0 so reruns with sign-flipped zero rounding stay identical
        "0".to_string()
    } else {
        format!("{x}")
    }
}

/// Joins values with commas, no trailing separator.
pub fn row(values: &[f64]) -> String {
    values.iter().map(|v| num(*v)).collect::<Vec<_>>().join(",")
}
