//! Radial reduction: `(-Delta)^s f(r0) = C_{n,s} int_0^inf (f(r0) - f(t)) t^{n-1} K(r0, t) dt`
//! with `K(r0, t) = int_{S^{n-1}} |r0 e - t w|^{-n-2s} dw`.

use super::realspace::{check_tail, reduced_field};
use super::{EvalResult, FracOrder, Method, QuadratureSpec};
use crate::error::{invalid, Result};
use crate::fields::{iterated_laplacian, ScalarField};
use crate::quad::{self, Estimate, Tolerance};
use crate::special::sphere_area;

/// Below this ratio of radii the sphere average uses its two-term expansion.
pub(crate) const FAR_RATIO: f64 = 1e-3;

/// Mean over the unit sphere of `|e - u w|^{-p}` up to `O(u^4)`.
pub(crate) fn far_sphere_factor(n: usize, p: f64, u: f64) -> f64 {
    let nf = n as f64;
    1.0 + u * u * p * (p + 2.0 - nf) / (2.0 * nf)
}

/// Sphere-integrated hypersingular kernel `K(r0, t)` for `t != r0`.
pub fn averaged_kernel(n: usize, s: f64, r0: f64, t: f64) -> f64 {
    let p = n as f64 + 2.0 * s;
    if r0 == 0.0 || t == 0.0 {
        return sphere_area(n) * (r0 + t).powf(-p);
    }
    let (lo, hi) = if r0 < t { (r0, t) } else { (t, r0) };
    if lo < FAR_RATIO * hi {
        return sphere_area(n) * hi.powf(-p) * far_sphere_factor(n, p, lo / hi);
    }
    match n {
        1 => (r0 - t).abs().powf(-p) + (r0 + t).powf(-p),
        3 => {
            let q = 1.0 + 2.0 * s;
            2.0 * std::f64::consts::PI / (r0 * t * q) * ((r0 - t).abs().powf(-q) - (r0 + t).powf(-q))
        }
        _ => {
            let gap = (r0 - t).abs();
            let rho = (r0 * t).sqrt();
            // the integrand peaks at theta ~ gap / rho
            let th0 = (gap / rho).min(1.0);
            let mut pts = quad::graded_panels(th0 * 1e-3, 1.0);
            pts.push(std::f64::consts::PI);
            let pts = quad::breakpoints(0.0, std::f64::consts::PI, pts);
            let tol = Tolerance { abs: 1e-300, rel: 1e-13, max_intervals: 300 };
            let e = quad::integrate_breaks(
                |th: f64| {
                    let d2 = gap * gap + 2.0 * r0 * t * (1.0 - th.cos());
                    d2.powf(-p / 2.0) * th.sin().powi(n as i32 - 2)
                },
                &pts,
                tol,
            );
            sphere_area(n - 1) * e.value
        }
    }
}

/// `(-Delta)^sigma f` at radius `r0` for a radial field.
pub fn frac_laplacian_radial(field: &ScalarField, order: &FracOrder, r0: f64, spec: &QuadratureSpec) -> Result<EvalResult> {
    spec.validate()?;
    if !field.radial {
        return invalid("the radial route needs a radial field");
    }
    if order.n != field.dim || !(r0 >= 0.0) {
        return invalid("dimension mismatch or negative radius");
    }
    let mut x = vec![0.0; field.dim];
    x[0] = r0;
    field.eval(&x)?;
    if order.is_integer {
        let v = iterated_laplacian(field, order.k, &x)?;
        return Ok(EvalResult::new(Estimate::new(v, 8.0 * f64::EPSILON * v.abs()), Method::Deterministic));
    }
    let g = reduced_field(field, order)?;
    let s = order.sigma_frac;
    check_tail(&g, s)?;
    let n = g.dim;
    let f = |t: f64| g.radial_value(t);
    let f0 = f(r0);
    let breaks = g.kind.radial_breaks();
    let extent = breaks.iter().cloned().fold(0.0, f64::max);
    let big_t = 4.0 * (r0 + extent + 1.0);
    let tol = Tolerance { abs: 1e-300, rel: spec.rel_tol, max_intervals: 600 };
    let integrand = |t: f64| (f0 - f(t)) * t.powi(n as i32 - 1) * averaged_kernel(n, s, r0, t);

    let mut total = Estimate::exact(0.0);
    let lo_far;
    if r0 == 0.0 {
        // f(0) - f(t) ~ c t^2 near the origin
        let scale = breaks.iter().cloned().filter(|b| *b > 0.0).fold(1.0, f64::min);
        let t_min = 1e-6 * scale;
        let c = integrand(t_min) / t_min.powf(1.0 - 2.0 * s);
        let head = c * t_min.powf(2.0 - 2.0 * s) / (2.0 - 2.0 * s);
        total = total + Estimate::new(head, 1e-3 * head.abs());
        let mut pts = quad::graded_panels(t_min, scale);
        pts.extend(breaks.iter().copied());
        pts.push(big_t);
        let pts = quad::breakpoints(t_min, big_t, pts);
        total = total + quad::integrate_breaks(integrand, &pts, tol);
        lo_far = big_t;
    } else {
        // pair t = r0 +- h on (0, r0) so the odd principal-value part cancels
        let sym = |h: f64| integrand(r0 + h) + integrand(r0 - h);
        let h_min = 1e-7 * r0;
        let c = sym(h_min) / h_min.powf(1.0 - 2.0 * s);
        let head = c * h_min.powf(2.0 - 2.0 * s) / (2.0 - 2.0 * s);
        total = total + Estimate::new(head, 1e-3 * head.abs());
        let mut pts = quad::graded_panels(h_min, r0);
        pts.extend(breaks.iter().map(|b| (b - r0).abs()));
        let pts = quad::breakpoints(h_min, r0, pts);
        total = total + quad::integrate_breaks(sym, &pts, tol);
        let mut pts = quad::graded_panels(r0, 2.0 * r0).into_iter().map(|h| h + r0).collect::<Vec<_>>();
        pts.extend(breaks.iter().copied());
        pts.push(big_t);
        let pts = quad::breakpoints(2.0 * r0, big_t.max(2.0 * r0), pts);
        total = total + quad::integrate_breaks(integrand, &pts, tol);
        lo_far = big_t.max(2.0 * r0);
    }
    total = total + quad::power_tail(integrand, lo_far, 2.0 * s, &breaks, tol);

    let value = order.c_norm * total.value;
    // rounding in f(r0) - f(t) against the kernel mass outside the excluded core
    let core = if r0 == 0.0 { 1e-6 } else { 1e-7 * r0 };
    let rounding = 8.0 * f64::EPSILON * f0.abs() * sphere_area(n) * core.powf(-2.0 * s) / (2.0 * s);
    let err = order.c_norm * (total.abs_error + rounding) + 4.0 * f64::EPSILON * value.abs();
    Ok(EvalResult { value, abs_error: err, method: Method::Deterministic })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::fields::FieldKind;
    use approx::assert_relative_eq;

    #[test]
    fn kernel_closed_forms_match_angular_quadrature() {
        // n = 3 closed form against the generic angular integral
        let s = 0.3;
        let p = 3.0 + 2.0 * s;
        let (r0, t) = (1.0, 1.7);
        let tol = Tolerance { abs: 1e-300, rel: 1e-13, max_intervals: 300 };
        let e = quad::integrate(
            |th: f64| (r0 * r0 + t * t - 2.0 * r0 * t * th.cos()).powf(-p / 2.0) * th.sin(),
            0.0,
            std::f64::consts::PI,
            tol,
        );
        assert_relative_eq!(averaged_kernel(3, s, r0, t), 2.0 * std::f64::consts::PI * e.value, max_relative = 1e-12);
    }

    #[test]
    fn lorentzian_in_one_dimension() {
        let f = ScalarField::new(1, FieldKind::ShiftedPower { rho: 2.0 }).unwrap();
        let o = FracOrder::new(1, 0.5).unwrap();
        for &x in &[0.0, 0.5, 2.0] {
            let r = frac_laplacian_radial(&f, &o, x, &QuadratureSpec::default()).unwrap();
            let exact = (1.0 - x * x) / (1.0 + x * x).powi(2);
            assert_relative_eq!(r.value, exact, epsilon = 1e-7);
        }
    }
}
