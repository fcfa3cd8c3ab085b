//! Real-space evaluation through spherical means.
//!
//! For `0 < s < 1`,
//! `(-Delta)^s g(x) = C_{n,s} |S^{n-1}| int_0^inf (g(x) - M(x, r)) r^{-1-2s} dr`
//! where `M(x, r)` is the mean of `g` over the sphere of radius `r` about `x`.
//! This is the polar form of the symmetric second-difference integral.
//! Small radii use the Pizzetti expansion
//! `M(x, r) = sum_j r^{2j} Delta^j g(x) / (2^j j! n (n+2) ... (n+2j-2))`.

use rand::Rng;

use super::{EvalResult, FracOrder, Method, QuadratureSpec};
use crate::error::{invalid, Error, Result};
use crate::fields::{iterated_laplacian, Decay, FieldKind, ScalarField};
use crate::mc::{self, unit_vector};
use crate::quad::{self, Estimate, Tolerance};
use crate::sets::SetVariant;
use crate::special::sphere_area;

/// Number of Pizzetti terms used below the Taylor radius.
const TAYLOR_TERMS: usize = 3;
/// Taylor radius as a fraction of the near-field radius.
const TAYLOR_FRACTION: f64 = 0.05;

fn norm(x: &[f64]) -> f64 {
    x.iter().map(|v| v * v).sum::<f64>().sqrt()
}

/// Replaces `field` by `(-Delta)^k field` when the order has an integer part.
pub(crate) fn reduced_field(field: &ScalarField, order: &FracOrder) -> Result<ScalarField> {
    if order.k == 0 {
        return Ok(field.clone());
    }
    ScalarField::new(field.dim, FieldKind::NegLaplacian { k: order.k, field: Box::new(field.kind.clone()) })
}

pub(crate) fn check_tail(g: &ScalarField, s: f64) -> Result<()> {
    if let Decay::Power(rho) = g.kind.decay(g.dim) {
        if rho <= -2.0 * s {
            return Err(Error::TailNotIntegrable(s));
        }
    }
    Ok(())
}

/// `int_0^{rt} (g(x) - M(x, r)) r^{-1-2s} dr` from the Pizzetti series.
fn taylor_head(g: &ScalarField, x: &[f64], rt: f64, s: f64) -> Option<Estimate> {
    let n = g.dim as f64;
    let jet = g.jet(x, 2 * TAYLOR_TERMS)?;
    let mut denom = 1.0;
    let mut sum = 0.0;
    let mut last = 0.0;
    for j in 1..=TAYLOR_TERMS {
        let jf = j as f64;
        denom *= 2.0 * jf * (n + 2.0 * (jf - 1.0));
        let lj = jet.neg_laplacian_power(j)?;
        // Delta^j = (-1)^j (-Delta)^j
        let delta_j = if j % 2 == 0 { lj } else { -lj };
        let p = 2.0 * jf - 2.0 * s;
        let term = -delta_j / denom * rt.powf(p) / p;
        sum += term;
        last = term;
    }
    if !sum.is_finite() {
        return None;
    }
    Some(Estimate::new(sum, last.abs() + 4.0 * f64::EPSILON * sum.abs()))
}

/// `M(x, r) - f0` for a radial field about a point at distance `a` from the
/// origin, with `f0` subtracted inside the average so constants cancel exactly.
pub(crate) fn radial_deviation(g: &ScalarField, a: f64, r: f64, breaks: &[f64], f0: f64) -> f64 {
    let n = g.dim;
    let f = |t: f64| g.radial_value(t) - f0;
    if n == 1 {
        return 0.5 * (f(a + r) + f((a - r).abs()));
    }
    if a == 0.0 || r == 0.0 {
        return f(a + r);
    }
    if a < 1e-8 * r {
        // the sphere is too thin in t to resolve in floating point; M = f(r) + O((a/r)^2)
        return f(r);
    }
    let tol = Tolerance { abs: 1e-300, rel: 1e-13, max_intervals: 200 };
    let lo = (a - r).abs();
    let hi = a + r;
    if n == 3 {
        // the weight t / (2 a r) has unit mass on [|a - r|, a + r]
        let pts = quad::breakpoints(lo, hi, breaks.iter().copied());
        let e = quad::integrate_breaks(|t| f(t) * t, &pts, tol);
        return e.value / (2.0 * a * r);
    }
    // general n: average over the polar angle with weight sin^{n-2}
    let thetas = breaks.iter().filter_map(|&b| {
        let c = (b * b - a * a - r * r) / (2.0 * a * r);
        (c.abs() < 1.0).then(|| c.acos())
    });
    let pts = quad::breakpoints(0.0, std::f64::consts::PI, thetas);
    let w = sphere_area(n - 1) / sphere_area(n);
    let e = quad::integrate_breaks(
        |th: f64| f((a * a + r * r + 2.0 * a * r * th.cos()).max(0.0).sqrt()) * th.sin().powi(n as i32 - 2),
        &pts,
        tol,
    );
    w * e.value
}

/// Radii where the integrand `r -> M(x, r)` has kinks.
fn kink_radii(g: &ScalarField, x: &[f64]) -> Vec<f64> {
    let a = norm(x);
    let mut out = Vec::new();
    if g.radial {
        for b in g.kind.radial_breaks() {
            out.push((a - b).abs());
            out.push(a + b);
        }
        out.push(a);
    } else if g.dim == 1 {
        // profiles of the distance to points on the line
        let mut stack = vec![&g.kind];
        while let Some(k) = stack.pop() {
            match k {
                FieldKind::DistanceProfile { set, profile } => {
                    if let SetVariant::FinitePoints { points } = &set.variant {
                        for p in points {
                            for b in profile.breaks() {
                                out.push((x[0] - p[0] - b).abs());
                                out.push((x[0] - p[0] + b).abs());
                            }
                        }
                    }
                }
                FieldKind::Scaled { field, .. } => stack.push(field),
                FieldKind::Sum { terms } => stack.extend(terms.iter()),
                FieldKind::Product { factors } => stack.extend(factors.iter()),
                _ => {}
            }
        }
    }
    out.retain(|r| r.is_finite() && *r > 0.0);
    out
}

/// `(-Delta)^sigma field (x)` by real-space quadrature.
pub fn frac_laplacian(field: &ScalarField, order: &FracOrder, x: &[f64], spec: &QuadratureSpec) -> Result<EvalResult> {
    spec.validate()?;
    if order.n != field.dim || x.len() != field.dim {
        return invalid("dimension mismatch between field, order and point");
    }
    field.eval(x)?;
    if order.is_integer {
        let v = iterated_laplacian(field, order.k, x)?;
        return Ok(EvalResult::new(Estimate::new(v, 8.0 * f64::EPSILON * v.abs()), Method::Deterministic));
    }
    let g = reduced_field(field, order)?;
    let s = order.sigma_frac;
    check_tail(&g, s)?;
    let g0 = g.value(x);
    let smooth = g.smooth_radius(x);
    if !(smooth > 0.0) || !g0.is_finite() {
        return Err(Error::NotSmoothAtPoint(format!("at {x:?}")));
    }
    let n = g.dim;
    let a = norm(x);
    let near = smooth.min(spec.split_radius_factor * (1.0 + a));
    let scale = order.c_norm * sphere_area(n);
    // sphere means carry relative noise from their own quadrature; the outer
    // integral is not refined below the level this noise reaches
    let noise = if n == 1 { 8.0 * f64::EPSILON } else { 1e-12 };
    let noise_floor = |start: f64| noise * g0.abs() * start.powf(-2.0 * s) / (2.0 * s);
    let mut tol = Tolerance { abs: 1e-300, rel: spec.rel_tol, max_intervals: 600 };

    let deterministic = n == 1 || g.radial;
    let radial_breaks = g.kind.radial_breaks();
    // g(x) - M(x, r)
    let defect = |r: f64| -> f64 {
        if n == 1 {
            -0.5 * ((g.value(&[x[0] + r]) - g0) + (g.value(&[x[0] - r]) - g0))
        } else {
            -radial_deviation(&g, a, r, &radial_breaks, g0)
        }
    };
    let kinks = kink_radii(&g, x);

    // head: [0, start]
    let rt = TAYLOR_FRACTION * near;
    let (start, head) = match taylor_head(&g, x, rt, s) {
        Some(e) => (rt, e),
        None => {
            // g - M ~ c r^2: extrapolate from the first sampled radius
            let r0 = 1e-3 * near;
            let d = if deterministic { defect(r0) } else { -sphere_deviation(&g, x, r0, spec.radial_nodes, g0) };
            let c = d / (r0 * r0);
            let v = c * r0.powf(2.0 - 2.0 * s) / (2.0 - 2.0 * s);
            (r0, Estimate::new(v, 0.05 * v.abs() + 1e-14 * g0.abs()))
        }
    };

    tol.abs = noise_floor(start) / 64.0;
    let body_far = if deterministic {
        let extent = kinks.iter().cloned().fold(0.0, f64::max);
        let big_r = 4.0 * (a + extent + near).max(1.0);
        let mut pts = quad::graded_panels(start, near);
        pts.extend(kinks.iter().copied());
        pts.push(big_r);
        let pts = quad::breakpoints(start, big_r, pts);
        let body = quad::integrate_breaks(|r| defect(r) * r.powf(-1.0 - 2.0 * s), &pts, tol);
        let tail = quad::power_tail(|r| defect(r) * r.powf(-1.0 - 2.0 * s), big_r, 2.0 * s, &kinks, tol);

        body + tail
    } else {
        let body = if n <= 3 {
            let pts = quad::breakpoints(start, near, quad::graded_panels(start, near));
            quad::integrate_breaks(|r| -sphere_deviation(&g, x, r, spec.radial_nodes, g0) * r.powf(-1.0 - 2.0 * s), &pts, tol)
        } else {
            near_mc(&g, x, g0, start, near, s, spec)
        };
        body + far_mc(&g, x, g0, near, s, spec)
    };

    let total = head + body_far;

    let value = scale * total.value;
    // noise in g(x) - M(x, r) accumulates like int_start^inf noise |g0| r^{-1-2s} dr
    let err = scale * (total.abs_error + noise_floor(start)) + 4.0 * f64::EPSILON * value.abs();
    let method = if deterministic { Method::Deterministic } else { Method::MonteCarlo };
    Ok(EvalResult { value, abs_error: err, method })
}

/// `M(x, r) - g0` from the fixed product rule (n <= 3).
pub(crate) fn sphere_deviation(g: &ScalarField, x: &[f64], r: f64, order: usize, g0: f64) -> f64 {
    let n = g.dim;
    let rule = quad::sphere_rule(n, order);
    let area = sphere_area(n);
    let mut y = x.to_vec();
    let mut acc = 0.0;
    for (w, wt) in rule.iter() {
        for i in 0..n {
            y[i] = x[i] + r * w[i];
        }
        acc += wt * (g.value(&y) - g0);
    }
    acc / area
}

/// `int_lo^hi (g(x) - M(x, r)) r^{-1-2s} dr` with uniform radii and
/// antithetic directions.
fn near_mc(g: &ScalarField, x: &[f64], g0: f64, lo: f64, hi: f64, s: f64, spec: &QuadratureSpec) -> Estimate {
    let n = g.dim;
    let m = mc::mean(&spec.mc(), |rng| {
        let r = lo + (hi - lo) * rng.random::<f64>();
        let w = unit_vector(rng, n);
        let yp: Vec<f64> = x.iter().zip(&w).map(|(a, b)| a + r * b).collect();
        let ym: Vec<f64> = x.iter().zip(&w).map(|(a, b)| a - r * b).collect();
        (g0 - 0.5 * (g.value(&yp) + g.value(&ym))) * r.powf(-1.0 - 2.0 * s)
    });
    Estimate::new(m.mean * (hi - lo), m.ci95() * (hi - lo))
}

/// `int_delta^inf (g(x) - M(x, r)) r^{-1-2s} dr` with Pareto radii
/// `r = delta u^{-1/(2s)}` and antithetic directions.
fn far_mc(g: &ScalarField, x: &[f64], g0: f64, delta: f64, s: f64, spec: &QuadratureSpec) -> Estimate {
    let n = g.dim;
    let m = mc::mean(&spec.mc(), |rng| {
        let u = 1.0 - rng.random::<f64>();
        let r = delta * u.powf(-1.0 / (2.0 * s));
        let w = unit_vector(rng, n);
        let yp: Vec<f64> = x.iter().zip(&w).map(|(a, b)| a + r * b).collect();
        let ym: Vec<f64> = x.iter().zip(&w).map(|(a, b)| a - r * b).collect();
        let h = g0 - 0.5 * (g.value(&yp) + g.value(&ym));
        if h.is_finite() {
            h
        } else {
            0.0
        }
    });
    let norm = 1.0 / (2.0 * s * delta.powf(2.0 * s));
    Estimate::new(m.mean * norm, m.ci95() * norm)
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;

    fn spec() -> QuadratureSpec {
        QuadratureSpec::default()
    }

    #[test]
    fn constants_are_annihilated() {
        for n in [1, 2, 3] {
            let f = ScalarField::new(n, FieldKind::constant(2.5)).unwrap();
            let mut x = vec![0.0; n];
            x[0] = 0.7;
            let r = frac_laplacian(&f, &FracOrder::new(n, 0.4).unwrap(), &x, &spec()).unwrap();
            assert!(r.value.abs() <= r.abs_error + 1e-15, "n={n}: {r:?}");
        }
    }

    #[test]
    fn half_laplacian_of_lorentzian_in_one_dimension() {
        // (-d^2)^{1/2} of 1/(1+x^2) is (1-x^2)/(1+x^2)^2 by the Fourier symbol |xi|
        let f = ScalarField::new(1, FieldKind::ShiftedPower { rho: 2.0 }).unwrap();
        let o = FracOrder::new(1, 0.5).unwrap();
        for &x in &[0.0, 0.5, 2.0] {
            let r = frac_laplacian(&f, &o, &[x], &spec()).unwrap();
            let exact = (1.0 - x * x) / (1.0 + x * x).powi(2);
            assert_relative_eq!(r.value, exact, epsilon = 1e-8);
        }
    }
}
