//! One-dimensional smooth profiles used by cutoffs.

use serde::{Deserialize, Serialize};

use crate::series::Series;

fn bump_tail(s: f64) -> f64 {
    if s > 0.0 {
        (-1.0 / s).exp()
    } else {
        0.0
    }
}

/// `B(t-1) / (B(t-1) + B(2-t))` with `B(s) = exp(-1/s)` for `s > 0`:
/// 0 on `t <= 1`, 1 on `t >= 2`, smooth in between.
pub fn ramp(t: f64) -> f64 {
    if t <= 1.0 {
        0.0
    } else if t >= 2.0 {
        1.0
    } else {
        let a = bump_tail(t - 1.0);
        a / (a + bump_tail(2.0 - t))
    }
}

/// Taylor series of [`ramp`] composed with `t`.
pub fn ramp_series(t: &Series) -> Series {
    let t0 = t.value();
    let k = t.order();
    if t0 <= 1.0 {
        return Series::constant(0.0, k);
    }
    if t0 >= 2.0 {
        return Series::constant(1.0, k);
    }
    let b = |s: &Series| s.recip().scale(-1.0).exp();
    let a = b(&t.offset(-1.0));
    let c = b(&t.scale(-1.0).offset(2.0));
    a.div(&a.add(&c))
}

/// Profiles of a nonnegative scalar variable (a radius or a distance).
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "profile", rename_all = "snake_case")]
pub enum Profile {
    /// 0 on `[0, inner]`, 1 on `[outer, inf)`.
    RampUp { inner: f64, outer: f64 },
    /// 1 on `[0, inner]`, 0 on `[outer, inf)`.
    RampDown { inner: f64, outer: f64 },
    /// `RampUp{eps, 2 eps} * RampDown{outer/2, outer}`.
    Window { eps: f64, outer: f64 },
    /// `t^{-beta}`.
    Power { beta: f64 },
}

impl Profile {
    fn unit(t: f64, inner: f64, outer: f64) -> f64 {
        1.0 + (t - inner) / (outer - inner)
    }

    pub fn eval(&self, t: f64) -> f64 {
        match *self {
            Profile::RampUp { inner, outer } => ramp(Self::unit(t, inner, outer)),
            Profile::RampDown { inner, outer } => 1.0 - ramp(Self::unit(t, inner, outer)),
            Profile::Window { eps, outer } => ramp(t / eps) * (1.0 - ramp(2.0 * t / outer)),
            Profile::Power { beta } => t.powf(-beta),
        }
    }

    pub fn series(&self, t: &Series) -> Series {
        let unit = |inner: f64, outer: f64| t.offset(-inner).scale(1.0 / (outer - inner)).offset(1.0);
        match *self {
            Profile::RampUp { inner, outer } => ramp_series(&unit(inner, outer)),
            Profile::RampDown { inner, outer } => ramp_series(&unit(inner, outer)).scale(-1.0).offset(1.0),
            Profile::Window { eps, outer } => {
                let up = ramp_series(&t.scale(1.0 / eps));
                let down = ramp_series(&t.scale(2.0 / outer)).scale(-1.0).offset(1.0);
                up.mul(&down)
            }
            Profile::Power { beta } => t.powf(-beta),
        }
    }

    /// Values of the variable where the profile stops being smooth or
    /// changes regime.
    pub fn breaks(&self) -> Vec<f64> {
        match *self {
            Profile::RampUp { inner, outer } | Profile::RampDown { inner, outer } => vec![inner, outer],
            Profile::Window { eps, outer } => vec![eps, 2.0 * eps, outer / 2.0, outer],
            Profile::Power { .. } => vec![0.0],
        }
    }

    /// Whether the profile is constant near `t` (on a plateau).
    pub fn flat_at(&self, t: f64) -> bool {
        match *self {
            Profile::RampUp { inner, outer } | Profile::RampDown { inner, outer } => t < inner || t > outer,
            Profile::Window { eps, outer } => t < eps || (t > 2.0 * eps && t < outer / 2.0) || t > outer,
            Profile::Power { .. } => false,
        }
    }

    /// Distance from `t` to the nearest break, together with the intrinsic
    /// length scale of the profile near `t`.
    pub fn local_scale(&self, t: f64) -> f64 {
        match *self {
            Profile::Power { .. } => 0.5 * t,
            _ => {
                let b = self.breaks();
                let gap = b.iter().map(|v| (t - v).abs()).fold(f64::INFINITY, f64::min);
                if self.flat_at(t) {
                    gap
                } else {
                    // inside a ramp: Taylor radius is limited by the ramp ends
                    0.5 * gap
                }
            }
        }
    }

    pub fn is_compact(&self) -> bool {
        matches!(self, Profile::RampDown { .. } | Profile::Window { .. })
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;

    #[test]
    fn ramp_plateaus_and_symmetry() {
        assert_eq!(ramp(0.5), 0.0);
        assert_eq!(ramp(2.5), 1.0);
        assert_relative_eq!(ramp(1.5), 0.5, epsilon = 1e-15);
        for i in 1..20 {
            let t = 1.0 + i as f64 / 20.0;
            assert_relative_eq!(ramp(t) + ramp(3.0 - t), 1.0, epsilon = 1e-14);
        }
    }

    #[test]
    fn ramp_series_matches_finite_differences() {
        let t0 = 1.3;
        let s = ramp_series(&Series::variable(t0, 2));
        let h = 1e-4;
        let d1 = (ramp(t0 + h) - ramp(t0 - h)) / (2.0 * h);
        let d2 = (ramp(t0 + h) - 2.0 * ramp(t0) + ramp(t0 - h)) / (h * h);
        assert_relative_eq!(s.derivative(1), d1, max_relative = 1e-6);
        assert_relative_eq!(s.derivative(2), d2, max_relative = 1e-5);
    }
}
