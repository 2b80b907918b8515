//! Dimensional constants shared across modules.

use std::f64::consts::PI;

/// Surface measure of the unit sphere S^m ⊂ R^{m+1}.
///
/// Recurrence |S^m| = 2π/(m−1) · |S^{m−2}| with |S^0| = 2, |S^1| = 2π.
pub fn sphere_surface(m: usize) -> f64 {
    match m {
        0 => 2.0,
        1 => 2.0 * PI,
        _ => 2.0 * PI / (m as f64 - 1.0) * sphere_surface(m - 2),
    }
}

/// Volume of the unit ball in Rⁿ: |S^{n−1}| / n.
pub fn ball_volume(n: usize) -> f64 {
    sphere_surface(n - 1) / n as f64
}

pub fn factorial(k: usize) -> f64 {
    (2..=k).map(|v| v as f64).product()
}

/// `c_n = 2^{n−2} ((n−2)/2)! π^{n/2}` for even n ≥ 4.
///
/// The fundamental-solution normalization is `(−Δ)^{n/2} log(1/|x|) = 2c_n δ₀`
/// (n = 4: Δ² log(1/|x|) = 8π² δ₀), so the log-kernel potential with the
/// 1/c_n prefactor satisfies `Δ₀² w = 2P`.
pub fn c_n(n: usize) -> f64 {
    debug_assert!(n >= 4 && n % 2 == 0);
    let h = (n - 2) / 2;
    2f64.powi(n as i32 - 2) * factorial(h) * PI.powf(n as f64 / 2.0)
}

/// Quantization modulus `2 c_n` (8π² in dimension four).
pub fn quantization_modulus(n: usize) -> f64 {
    2.0 * c_n(n)
}

/// Pfaffian coefficient `A = 2^{n/2−2} ((n−2)/2)!`.
pub fn pfaffian_coefficient(n: usize) -> f64 {
    let h = (n - 2) / 2;
    2f64.powi(n as i32 / 2 - 2) * factorial(h)
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;

    #[test]
    fn sphere_surfaces() {
        assert_relative_eq!(sphere_surface(1), 2.0 * PI);
        assert_relative_eq!(sphere_surface(2), 4.0 * PI);
        assert_relative_eq!(sphere_surface(3), 2.0 * PI * PI, epsilon = 1e-12);
        assert_relative_eq!(sphere_surface(4), 8.0 * PI * PI / 3.0, epsilon = 1e-12);
    }

    #[test]
    fn ball_volumes() {
        assert_relative_eq!(ball_volume(4), PI * PI / 2.0, epsilon = 1e-12);
        assert_relative_eq!(ball_volume(2), PI, epsilon = 1e-12);
    }

    #[test]
    fn c_n_values() {
        assert_relative_eq!(c_n(4), 4.0 * PI * PI, epsilon = 1e-12);
        assert_relative_eq!(c_n(6), 32.0 * PI.powi(3), epsilon = 1e-9);
        assert_relative_eq!(quantization_modulus(4), 8.0 * PI * PI, epsilon = 1e-12);
    }
}
