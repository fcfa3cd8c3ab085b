//! Spectral evaluation `(2 pi)^{-n} int |xi|^{2 sigma} F(|xi|) e^{i xi.x} dxi`
//! for radial fields with a known radial Fourier transform `F`.

use super::{EvalResult, FracOrder, Method};
use crate::error::{invalid, Error, Result};
use crate::fields::{FieldKind, ScalarField};
use crate::quad::{self, Estimate, Tolerance};
use crate::special::{bessel_k, gamma, sphere_area};
use std::f64::consts::PI;

/// `(1 + r^2)^{-beta}` in `n` dimensions.
fn shifted_power_transform(n: usize, beta: f64, k: f64) -> f64 {
    if beta == 0.0 {
        return 0.0;
    }
    let h = n as f64 / 2.0;
    let g = gamma(beta);
    if !g.is_finite() {
        // polynomial: transform supported at the origin
        return 0.0;
    }
    (2.0 * PI).powf(h) * 2f64.powf(1.0 - beta) / g * k.powf(beta - h) * bessel_k(h - beta, k)
}

/// Radial Fourier transform `F(k)` at `k > 0`, ignoring point masses at `k = 0`.
pub fn radial_transform(kind: &FieldKind, n: usize, k: f64) -> Result<f64> {
    let h = n as f64 / 2.0;
    Ok(match kind {
        FieldKind::Constant { .. } => 0.0,
        FieldKind::Gaussian => (2.0 * PI).powf(h) * (-0.5 * k * k).exp(),
        FieldKind::ShiftedPower { rho } => shifted_power_transform(n, rho / 2.0, k),
        FieldKind::Bubble { sigma } => shifted_power_transform(n, h - sigma, k),
        FieldKind::Scaled { factor, field } => factor * radial_transform(field, n, k)?,
        FieldKind::Dilated { scale, field } => scale.powi(n as i32) * radial_transform(field, n, scale * k)?,
        FieldKind::Sum { terms } => {
            let mut s = 0.0;
            for t in terms {
                s += radial_transform(t, n, k)?;
            }
            s
        }
        FieldKind::Spectral { base, sigma } => k.powf(2.0 * sigma) * radial_transform(base, n, k)?,
        FieldKind::NegLaplacian { k: m, field } => k.powi(2 * *m as i32) * radial_transform(field, n, k)?,
        other => {
            return Err(Error::OscillatoryQuadratureFailure(format!("no closed-form transform for {other:?}")));
        }
    })
}

/// Spherical average of `e^{i z cos theta}` over `S^{n-1}`.
fn plane_wave_mean(n: usize, z: f64) -> f64 {
    match n {
        1 => z.cos(),
        3 => {
            if z.abs() < 1e-4 {
                1.0 - z * z / 6.0
            } else {
                z.sin() / z
            }
        }
        5 => {
            if z.abs() < 1e-2 {
                1.0 - z * z / 10.0 + z.powi(4) / 280.0
            } else {
                3.0 * (z.sin() - z * z.cos()) / z.powi(3)
            }
        }
        _ => {
            let nodes = 64 + 2 * z.abs().ceil() as usize;
            let w = sphere_area(n - 1) / sphere_area(n);
            w * quad::gauss_fixed(|th: f64| (z * th.cos()).cos() * th.sin().powi(n as i32 - 2), 0.0, PI, nodes)
        }
    }
}

/// Lower cutoff of the frequency integral; the piece below it is extrapolated.
const K_LOW: f64 = 1e-8;

/// `(2 pi)^{-n} |S^{n-1}| int_0^inf k^{2 sigma + n - 1} F(k) j_n(k r) dk`.
fn invert(kind: &FieldKind, sigma: f64, n: usize, r: f64) -> Result<Estimate> {
    let w = |k: f64| -> Result<f64> { Ok(k.powf(2.0 * sigma + n as f64 - 1.0) * radial_transform(kind, n, k)?) };
    // frequency range: stop once the weight is negligible relative to its peak
    let mut peak = 0f64;
    let mut k_max = 1.0;
    loop {
        let mut grid_peak = 0f64;
        for i in 1..=64 {
            let k = k_max * i as f64 / 64.0;
            grid_peak = grid_peak.max(w(k)?.abs());
        }
        peak = peak.max(grid_peak);
        if w(k_max)?.abs() <= 1e-17 * peak && w(0.75 * k_max)?.abs() <= 1e-17 * peak {
            break;
        }
        k_max *= 2.0;
        if k_max > 1e8 {
            return Err(Error::OscillatoryQuadratureFailure("spectral weight does not decay".into()));
        }
    }
    let integrand = |k: f64| w(k).unwrap_or(f64::NAN) * plane_wave_mean(n, k * r);

    // power-law piece on (0, K_LOW)
    let (a, b) = (integrand(K_LOW), integrand(0.5 * K_LOW));
    let low = if a == 0.0 {
        0.0
    } else {
        let p = (a / b).abs().log2();
        if !(p > -1.0) {
            return Err(Error::OscillatoryQuadratureFailure(format!(
                "spectral integrand behaves like k^{p} at the origin"
            )));
        }
        a * K_LOW / (p + 1.0)
    };

    let width = if r > 0.0 { (PI / r).min(1.0) } else { 1.0 };
    let mut pts = quad::graded_panels(K_LOW, width.min(k_max));
    let m = (k_max / width).ceil() as usize;
    pts.extend((1..=m).map(|i| i as f64 * width));
    let pts = quad::breakpoints(K_LOW, k_max, pts);
    let tol = Tolerance { abs: 1e-300, rel: 1e-12, max_intervals: 200 };
    let body = quad::integrate_breaks(integrand, &pts, tol);
    if !body.value.is_finite() {
        return Err(Error::OscillatoryQuadratureFailure("non-finite spectral integral".into()));
    }
    let c = sphere_area(n) / (2.0 * PI).powi(n as i32);
    let total = body + Estimate::new(low, 1e-3 * low.abs());
    Ok(total.scale(c))
}

/// Value of `(-Delta)^sigma base` at radius `r` through the transform.
pub(crate) fn spectral_value(base: &FieldKind, sigma: f64, n: usize, r: f64) -> Result<f64> {
    Ok(invert(base, sigma, n, r)?.value)
}

/// Oracle value of `(-Delta)^sigma field` at radius `r`.
pub fn fourier_oracle(field: &ScalarField, order: &FracOrder, r: f64) -> Result<EvalResult> {
    if !field.radial {
        return invalid("the Fourier oracle needs a radial field");
    }
    if order.n != field.dim || !(r >= 0.0) {
        return invalid("dimension mismatch or negative radius");
    }
    let e = invert(&field.kind, order.sigma, field.dim, r)?;
    Ok(EvalResult::new(Estimate::new(e.value, e.abs_error + 1e-13 * e.value.abs()), Method::Oracle))
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;

    #[test]
    fn gaussian_round_trip() {
        // sigma -> 0 limit is not allowed; use sigma = 1: -Delta e^{-r^2/2} = (n - r^2) e^{-r^2/2}
        for n in [1usize, 2, 3, 5] {
            let f = ScalarField::new(n, FieldKind::Gaussian).unwrap();
            let o = FracOrder::new(n, 1.0).unwrap();
            for &r in &[0.0, 0.7, 2.0] {
                let v = fourier_oracle(&f, &o, r).unwrap().value;
                let exact = (n as f64 - r * r) * (-0.5 * r * r).exp();
                assert_relative_eq!(v, exact, epsilon = 1e-9);
            }
        }
    }

    #[test]
    fn lorentzian_half_laplacian() {
        let f = ScalarField::new(1, FieldKind::ShiftedPower { rho: 2.0 }).unwrap();
        let o = FracOrder::new(1, 0.5).unwrap();
        for &x in &[0.0, 0.5, 3.0] {
            let v = fourier_oracle(&f, &o, x).unwrap().value;
            assert_relative_eq!(v, (1.0 - x * x) / (1.0 + x * x).powi(2), epsilon = 1e-9);
        }
    }
}
