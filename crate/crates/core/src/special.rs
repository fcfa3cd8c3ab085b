//! Special functions and dimension-dependent constants.

use std::f64::consts::PI;

pub use statrs::function::gamma::{gamma, ln_gamma};

/// Surface area of the unit sphere S^{n-1} in R^n.
pub fn sphere_area(n: usize) -> f64 {
    let h = n as f64 / 2.0;
    2.0 * PI.powf(h) / gamma(h)
}

/// Volume of the unit ball in R^n.
pub fn ball_volume(n: usize) -> f64 {
    sphere_area(n) / n as f64
}

/// Constant of the singular-integral representation whose Fourier symbol is
/// `|xi|^{2s}`, for `0 < s < 1`.
pub fn frac_normalization(n: usize, s: f64) -> f64 {
    let h = n as f64 / 2.0;
    4f64.powf(s) * gamma(h + s) / (PI.powf(h) * gamma(-s).abs())
}

/// Constant `c` of the fundamental solution `c |x|^{2g - n}` of `(-Delta)^g`,
/// `0 < g < n/2`.
pub fn riesz_constant(n: usize, g: f64) -> f64 {
    let h = n as f64 / 2.0;
    gamma(h - g) / (4f64.powf(g) * PI.powf(h) * gamma(g))
}

/// Modified Bessel function of the second kind `K_nu(z)` for real order and
/// `z > 0`, from `K_nu(z) = int_0^inf exp(-z cosh t) cosh(nu t) dt`.
///
/// The trapezoid rule is spectrally accurate for this integrand.
pub fn bessel_k(nu: f64, z: f64) -> f64 {
    assert!(z > 0.0, "bessel_k requires z > 0");
    // exp(-z cosh t) < 1e-300 * exp(-z) once z (cosh t - 1) > 700
    let t_max = (1.0 + 700.0 / z).acosh() + 1.0;
    let h = 0.02;
    let steps = (t_max / h).ceil() as usize;
    let mut sum = 0.5 * (-z).exp();
    for i in 1..=steps {
        let t = i as f64 * h;
        sum += (-z * t.cosh()).exp() * (nu * t).cosh();
    }
    sum * h
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;

    #[test]
    fn sphere_areas() {
        assert_relative_eq!(sphere_area(1), 2.0, max_relative = 1e-14);
        assert_relative_eq!(sphere_area(2), 2.0 * PI, max_relative = 1e-14);
        assert_relative_eq!(sphere_area(3), 4.0 * PI, max_relative = 1e-14);
        assert_relative_eq!(ball_volume(3), 4.0 * PI / 3.0, max_relative = 1e-14);
    }

    #[test]
    fn normalization_half_order() {
        assert_relative_eq!(frac_normalization(1, 0.5), 1.0 / PI, max_relative = 1e-13);
        assert_relative_eq!(frac_normalization(3, 0.5), 1.0 / (PI * PI), max_relative = 1e-13);
    }

    #[test]
    fn normalization_finite_on_interior_grid() {
        for n in 1..=5 {
            for i in 1..100 {
                let s = i as f64 / 100.0;
                let c = frac_normalization(n, s);
                assert!(c.is_finite() && c > 0.0, "n={n} s={s} c={c}");
            }
        }
    }

    #[test]
    fn newtonian_constant() {
        assert_relative_eq!(riesz_constant(3, 1.0), 1.0 / (4.0 * PI), max_relative = 1e-13);
    }

    #[test]
    fn bessel_half_order_closed_form() {
        for &z in &[0.01, 0.3, 1.0, 4.0, 20.0] {
            let exact = (PI / (2.0 * z)).sqrt() * (-z as f64).exp();
            assert_relative_eq!(bessel_k(0.5, z), exact, max_relative = 1e-12);
            let exact15 = exact * (1.0 + 1.0 / z);
            assert_relative_eq!(bessel_k(1.5, z), exact15, max_relative = 1e-12);
        }
    }
}
