//! Riesz potentials `I_gamma F = Gamma_gamma * F` with
//! `Gamma_gamma(x) = c_{n,gamma} |x|^{2 gamma - n}`, the fundamental solution
//! of `(-Delta)^gamma`.

use serde::{Deserialize, Serialize};

use super::radial::{far_sphere_factor, FAR_RATIO};
use super::{EvalResult, Method, QuadratureSpec};
use crate::error::{invalid, Error, Result};
use crate::fields::{Decay, FieldKind, ScalarField};
use crate::quad::{self, Estimate, Tolerance};
use crate::special::{riesz_constant, sphere_area};
use std::f64::consts::PI;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct RieszKernel {
    pub n: usize,
    pub gamma: f64,
    pub c_fund: f64,
}

impl RieszKernel {
    pub fn new(n: usize, gamma: f64) -> Result<Self> {
        if n == 0 || !(gamma > 0.0 && gamma < n as f64 / 2.0) {
            return Err(Error::SigmaTooLarge { sigma: gamma, bound: n as f64 / 2.0 });
        }
        Ok(Self { n, gamma, c_fund: riesz_constant(n, gamma) })
    }

    pub fn value(&self, x: &[f64]) -> f64 {
        let r = x.iter().map(|v| v * v).sum::<f64>().sqrt();
        self.c_fund * r.powf(2.0 * self.gamma - self.n as f64)
    }
}

/// `int_{S^{n-1}} |r0 e - s w|^{2 gamma - n} dw`.
fn averaged_kernel(n: usize, gamma: f64, r0: f64, s: f64) -> f64 {
    let a = 2.0 * gamma - n as f64;
    if r0 == 0.0 || s == 0.0 {
        return sphere_area(n) * (r0 + s).powf(a);
    }
    let (lo, hi) = if r0 < s { (r0, s) } else { (s, r0) };
    if lo < FAR_RATIO * hi {
        return sphere_area(n) * hi.powf(a) * far_sphere_factor(n, -a, lo / hi);
    }
    match n {
        1 => (r0 - s).abs().powf(a) + (r0 + s).powf(a),
        3 => {
            let b = 2.0 * gamma - 1.0;
            if b.abs() < 1e-6 {
                2.0 * PI / (r0 * s) * ((r0 + s) / (r0 - s).abs()).ln()
            } else {
                2.0 * PI / (r0 * s * b) * ((r0 + s).powf(b) - (r0 - s).abs().powf(b))
            }
        }
        _ => {
            let gap = (r0 - s).abs();
            let th0 = (gap / (r0 * s).sqrt()).min(1.0);
            let mut pts = quad::graded_panels(th0 * 1e-3, 1.0);
            pts.push(PI);
            let pts = quad::breakpoints(0.0, PI, pts);
            let tol = Tolerance { abs: 1e-300, rel: 1e-13, max_intervals: 300 };
            let e = quad::integrate_breaks(
                |th: f64| {
                    let d2 = gap * gap + 2.0 * r0 * s * (1.0 - th.cos());
                    d2.powf(a / 2.0) * th.sin().powi(n as i32 - 2)
                },
                &pts,
                tol,
            );
            sphere_area(n - 1) * e.value
        }
    }
}

/// Riesz potential of the unit-ball indicator in three dimensions.
fn unit_ball_potential_3d(gamma: f64, r0: f64) -> Option<f64> {
    let c = riesz_constant(3, gamma);
    if r0 == 0.0 {
        return Some(c * 4.0 * PI / (2.0 * gamma));
    }
    let b = 2.0 * gamma - 1.0;
    if b.abs() < 1e-6 {
        return None;
    }
    if r0 >= 2.0 {
        // (r0 + s)^b - (r0 - s)^b = 2 r0^b sum_{k odd} C(b, k) (s / r0)^k, integrated against s ds
        let mut sum = 0.0;
        let mut binom = 1.0;
        let mut k = 0usize;
        loop {
            binom *= (b - k as f64) / (k as f64 + 1.0);
            k += 1;
            if k % 2 == 1 {
                let term = binom * r0.powi(-(k as i32)) / (k as f64 + 2.0);
                sum += term;
                if term.abs() < 1e-17 * sum.abs() || k > 200 {
                    break;
                }
            }
        }
        return Some(c * 4.0 * PI * r0.powf(b - 1.0) / b * sum);
    }
    // antiderivatives of w^{b} (w - r0) and w^{b} (r0 - w), (w + r0)
    let p = |w: f64| w.powf(b + 2.0) / (b + 2.0) - r0 * w.powf(b + 1.0) / (b + 1.0);
    let q = |w: f64| w.powf(b + 2.0) / (b + 2.0) + r0 * w.powf(b + 1.0) / (b + 1.0);
    // int_0^1 s (r0 + s)^b ds = [p]_{r0}^{r0+1}
    let i1 = p(r0 + 1.0) - p(r0);
    // int_0^1 s |r0 - s|^b ds
    let i2 = if r0 >= 1.0 {
        // w = r0 - s runs over [r0 - 1, r0]: s = r0 - w
        -(p(r0) - p(r0 - 1.0))
    } else {
        // s < r0: w = r0 - s in [0, r0]; s > r0: w = s - r0 in [0, 1 - r0]
        -(p(r0) - p(0.0)) + (q(1.0 - r0) - q(0.0))
    };
    Some(c * 2.0 * PI / (r0 * b) * (i1 - i2))
}

/// Whether a closed form applies, after peeling scalings.
fn closed_form(density: &FieldKind, gamma: f64, n: usize, r0: f64) -> Option<f64> {
    match density {
        FieldKind::Constant { c } if *c == 0.0 => Some(0.0),
        FieldKind::BallIndicator { radius } if n == 3 => {
            unit_ball_potential_3d(gamma, r0 / radius).map(|v| radius.powf(2.0 * gamma) * v)
        }
        FieldKind::Scaled { factor, field } => closed_form(field, gamma, n, r0).map(|v| factor * v),
        _ => None,
    }
}

fn decay_exponent(density: &FieldKind, n: usize) -> f64 {
    match density.decay(n) {
        Decay::Power(q) => q,
        Decay::Rapid => f64::INFINITY,
    }
}

/// `I_gamma F(r0)` for a radial density, switching to the renormalized form
/// `int (Gamma(x - y) - Gamma(y)) F(y) dy` when the plain integral diverges.
pub(crate) fn radial_potential(density: &FieldKind, gamma: f64, n: usize, r0: f64) -> Result<EvalResult> {
    if !density.is_radial(n) {
        return invalid("Riesz potentials are implemented for radial densities");
    }
    if !(gamma > 0.0 && gamma < n as f64 / 2.0) {
        return Err(Error::SigmaTooLarge { sigma: gamma, bound: n as f64 / 2.0 });
    }
    let q = decay_exponent(density, n);
    let plain = q > 2.0 * gamma;
    if !plain && q <= 2.0 * gamma - 1.0 {
        return Err(Error::PotentialDiverges(format!(
            "density decays like |x|^-{q}, renormalization needs more than {}",
            2.0 * gamma - 1.0
        )));
    }
    let method = if plain { Method::Plain } else { Method::Renormalized };
    if plain {
        if let Some(v) = closed_form(density, gamma, n, r0) {
            return Ok(EvalResult { value: v, abs_error: 1e-14 * v.abs(), method });
        }
    }
    let c = riesz_constant(n, gamma);
    let a = 2.0 * gamma - n as f64;
    let area = sphere_area(n);
    let f = |s: f64| {
        let mut x = vec![0.0; n];
        x[0] = s;
        density.eval(&x)
    };
    let integrand = |s: f64| {
        let fs = f(s);
        if fs == 0.0 {
            return 0.0;
        }
        let k = if plain {
            averaged_kernel(n, gamma, r0, s)
        } else if r0 < FAR_RATIO * s {
            area * s.powf(a) * (far_sphere_factor(n, -a, r0 / s) - 1.0)
        } else {
            averaged_kernel(n, gamma, r0, s) - area * s.powf(a)
        };
        fs * s.powi(n as i32 - 1) * k
    };
    let breaks = density.radial_breaks();
    let extent = breaks.iter().cloned().fold(0.0, f64::max);
    let big_s = 4.0 * (r0 + extent + 1.0);
    let mut pts: Vec<f64> = breaks.clone();
    pts.push(big_s);
    pts.extend(quad::graded_panels(1e-10 * big_s, big_s.min(1.0)));
    if r0 > 0.0 {
        pts.push(r0);
        pts.extend(quad::graded_panels(1e-10 * r0, r0).into_iter().flat_map(|h| [r0 - h, r0 + h]));
    }
    let pts = quad::breakpoints(0.0, big_s, pts.into_iter().filter(|p| *p > 0.0 && *p < big_s));
    let tol = Tolerance { abs: 1e-300, rel: 1e-11, max_intervals: 800 };
    let body = quad::integrate_breaks(integrand, &pts, tol);
    // integrand ~ s^{-1-mu} at infinity
    let mu = if plain { q - 2.0 * gamma } else { q + 1.0 - 2.0 * gamma };
    let tail = quad::power_tail(integrand, big_s, mu, &breaks, tol);
    let total = (body + tail).scale(c);
    if !total.value.is_finite() {
        return Err(Error::PotentialDiverges("non-finite Riesz integral".into()));
    }
    Ok(EvalResult::new(Estimate::new(total.value, total.abs_error + 1e-13 * total.value.abs()), method))
}

/// `(Gamma_gamma * F)(x)`.
pub fn riesz_potential(field: &ScalarField, kernel: &RieszKernel, x: &[f64], _spec: &QuadratureSpec) -> Result<EvalResult> {
    if kernel.n != field.dim || x.len() != field.dim {
        return invalid("dimension mismatch between density, kernel and point");
    }
    let r0 = x.iter().map(|v| v * v).sum::<f64>().sqrt();
    radial_potential(&field.kind, kernel.gamma, field.dim, r0)
}

/// `((-Delta)^sigma Gamma_gamma) * F (x)`, using
/// `(-Delta)^sigma Gamma_gamma = Gamma_{gamma - sigma}` for `0 < sigma < gamma < n/2`.
pub fn composed_kernel_value(
    field: &ScalarField,
    gamma: f64,
    sigma: f64,
    x: &[f64],
    spec: &QuadratureSpec,
) -> Result<EvalResult> {
    if !(sigma > 0.0 && sigma < gamma) {
        return invalid(format!("need 0 < sigma < gamma, got sigma = {sigma}, gamma = {gamma}"));
    }
    RieszKernel::new(field.dim, gamma)?;
    let k = RieszKernel::new(field.dim, gamma - sigma)?;
    riesz_potential(field, &k, x, spec)
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;

    #[test]
    fn ball_closed_form_matches_quadrature() {
        let gamma = 0.8;
        for &r0 in &[0.0, 0.3, 0.999, 1.0, 1.5, 4.0] {
            let exact = unit_ball_potential_3d(gamma, r0).unwrap();
            let c = riesz_constant(3, gamma);
            let tol = Tolerance { abs: 1e-300, rel: 1e-12, max_intervals: 800 };
            let mut pts = vec![0.0, 1.0];
            if r0 > 0.0 && r0 < 1.0 {
                pts.push(r0);
            }
            let pts = quad::breakpoints(0.0, 1.0, pts);
            let e = quad::integrate_breaks(|s| s * s * averaged_kernel(3, gamma, r0, s), &pts, tol);
            assert_relative_eq!(exact, c * e.value, max_relative = 1e-7);
        }
    }

    #[test]
    fn newtonian_potential_of_ball() {
        // gamma = 1 in n = 3: c = 1 / (4 pi), inside potential (3 - r^2) / 6
        let v = unit_ball_potential_3d(1.0, 0.5).unwrap();
        assert_relative_eq!(v, (3.0 - 0.25) / 6.0, max_relative = 1e-12);
        let v = unit_ball_potential_3d(1.0, 2.0).unwrap();
        assert_relative_eq!(v, 1.0 / 3.0 / 2.0, max_relative = 1e-12);
    }
}
