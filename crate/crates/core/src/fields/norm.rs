//! Weighted `L^1` functionals `int |f| / (1 + |x|^p)`.

use serde::{Deserialize, Serialize};

use super::ScalarField;
use crate::error::{Error, Result};
use crate::quad::{self, Tolerance};
use crate::special::sphere_area;

/// Shells whose successive ratios all exceed this are not decaying.
const RATIO_THRESHOLD: f64 = 0.95;
/// Consecutive non-decaying shells that trigger the divergence verdict.
const DIVERGENT_RUN: usize = 8;
const MAX_SHELLS: usize = 400;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct WeightedNormResult {
    pub s: f64,
    pub value: f64,
    pub abs_error: f64,
    pub infinite: bool,
}

impl WeightedNormResult {
    pub fn is_finite(&self) -> bool {
        !self.infinite
    }
}

/// Integral of `|f|` over the spherical shell `a <= |x| <= b`.
fn shell(field: &ScalarField, a: f64, b: f64, weight: &dyn Fn(f64) -> f64, tol: Tolerance) -> quad::Estimate {
    let n = field.dim;
    let breaks: Vec<f64> = field.kind.radial_breaks();
    let pts = quad::breakpoints(a, b, breaks);
    if field.radial {
        let area = sphere_area(n);
        quad::integrate_breaks(|r| field.radial_value(r).abs() * r.powi(n as i32 - 1) * weight(r), &pts, tol)
            .scale(area)
    } else if n == 1 {
        quad::integrate_breaks(|r| (field.value(&[r]).abs() + field.value(&[-r]).abs()) * weight(r), &pts, tol)
    } else {
        let rule = quad::sphere_rule(n.min(3), 24);
        quad::integrate_breaks(
            |r| {
                let s: f64 = rule
                    .iter()
                    .map(|(w, wt)| {
                        let y: Vec<f64> = w.iter().map(|v| v * r).collect();
                        wt * field.value(&y).abs()
                    })
                    .sum();
                s * r.powi(n as i32 - 1) * weight(r)
            },
            &pts,
            tol,
        )
    }
}

/// Sums dyadic shells moving away from radius 1 (outward or inward),
/// returning `None` when the shells stop decaying geometrically.
fn dyadic_sum(
    field: &ScalarField,
    weight: &dyn Fn(f64) -> f64,
    tol: Tolerance,
    outward: bool,
) -> Result<Option<quad::Estimate>> {
    let mut total = quad::Estimate::exact(0.0);
    let mut prev: Option<f64> = None;
    let mut run = 0;
    let mut q_last = 0.0;
    for j in 0..MAX_SHELLS {
        let (a, b) = if outward {
            (2f64.powi(j as i32), 2f64.powi(j as i32 + 1))
        } else {
            (2f64.powi(-(j as i32) - 1), 2f64.powi(-(j as i32)))
        };
        let c = shell(field, a, b, weight, tol);
        if !c.value.is_finite() {
            return Ok(None);
        }
        total = total + c;
        if let Some(p) = prev {
            if p > 0.0 {
                let q = c.value / p;
                if q > RATIO_THRESHOLD {
                    run += 1;
                    if run >= DIVERGENT_RUN {
                        return Ok(None);
                    }
                } else {
                    run = 0;
                }
                q_last = q;
            }
        }
        prev = Some(c.value);
        let small = c.value <= 1e-17 * total.value.abs() || c.value == 0.0 && j > DIVERGENT_RUN;
        if small && run == 0 {
            // geometric remainder bound
            let rest = if q_last < 1.0 { c.value * q_last / (1.0 - q_last) } else { 0.0 };
            return Ok(Some(total + quad::Estimate::new(rest, rest)));
        }
        if !outward && b < 1e-300 {
            break;
        }
    }
    if run > 0 {
        return Ok(None);
    }
    Err(Error::QuadratureFailure("dyadic shells did not settle".into()))
}

/// `int |f(x)| / (1 + |x|^p) dx` with a divergence verdict.
pub fn weighted_integral(field: &ScalarField, p: f64, rel_tol: f64) -> Result<WeightedNormResult> {
    let tol = Tolerance::new(1e-300, rel_tol.min(1e-6));
    let weight = move |r: f64| 1.0 / (1.0 + r.powf(p));
    let inner = dyadic_sum(field, &weight, tol, false)?;
    let outer = dyadic_sum(field, &weight, tol, true)?;
    let s = (p - field.dim as f64) / 2.0;
    match (inner, outer) {
        (Some(a), Some(b)) => {
            let e = a + b;
            if e.abs_error > rel_tol.max(1e-12) * e.value.abs() + 1e-300 {
                return Err(Error::QuadratureFailure(format!(
                    "weighted integral error {} exceeds tolerance",
                    e.abs_error
                )));
            }
            Ok(WeightedNormResult { s, value: e.value, abs_error: e.abs_error, infinite: false })
        }
        _ => Ok(WeightedNormResult { s, value: f64::INFINITY, abs_error: 0.0, infinite: true }),
    }
}

/// The `L_s` functional `int |f| / (1 + |x|^{n + 2s})`.
pub fn weighted_l1_norm(field: &ScalarField, s: f64, rel_tol: f64) -> Result<WeightedNormResult> {
    weighted_integral(field, field.dim as f64 + 2.0 * s, rel_tol)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::fields::FieldKind;
    use std::f64::consts::PI;

    #[test]
    fn inverse_distance_norm() {
        let f = ScalarField::new(3, FieldKind::PowerLaw { alpha: 1.0 }).unwrap();
        let r = weighted_l1_norm(&f, 0.5, 1e-8).unwrap();
        assert!((r.value - PI * PI).abs() < 1e-4, "{r:?}");
    }

    #[test]
    fn divergence_verdicts() {
        let f = ScalarField::new(3, FieldKind::PowerLaw { alpha: 3.0 }).unwrap();
        assert!(weighted_l1_norm(&f, 0.5, 1e-8).unwrap().infinite);
        let c = ScalarField::new(3, FieldKind::constant(1.0)).unwrap();
        assert!(!weighted_l1_norm(&c, 0.5, 1e-8).unwrap().infinite);
        // tail r^{-1}: weight exponent n - 2 gamma + delta = 3
        assert!(weighted_integral(&c, 3.0, 1e-8).unwrap().infinite);
    }
}
