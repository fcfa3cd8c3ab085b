//! Dyadic mass bookkeeping for model singular solutions `u = c d(x)^{-beta}`.

use serde::{Deserialize, Serialize};

use super::{Check, LedgerReport, LedgerSample};
use crate::cutoffs::set_dimension;
use crate::error::{invalid, Error, Result};
use crate::fields::{FieldKind, Profile, ScalarField};
use crate::fit;
use crate::mc::McSpec;
use crate::quad::{self, Estimate, Tolerance};
use crate::sets::{tube_volume, CompactSet, SetVariant};
use crate::special::sphere_area;

/// Number of dyadic shells below each `eps`.
const SHELLS: usize = 6;
const RATIO_TOL: f64 = 0.05;
const EXPONENT_TOL: f64 = 0.02;

/// `u = coefficient * d(x)^{-beta}` for the distance to `set`.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct RemovabilityModel {
    pub coefficient: f64,
    pub beta: f64,
    pub set: CompactSet,
}

impl RemovabilityModel {
    /// Reads `c |x|^{-beta}`, `c d^{-beta}` or a constant off a field.
    pub fn from_field(u: &ScalarField, set: &CompactSet) -> Result<Self> {
        let origin = matches!(&set.variant, SetVariant::FinitePoints { points } if points.len() == 1 && points[0].iter().all(|v| *v == 0.0));
        let mut coefficient = 1.0;
        let mut kind = &u.kind;
        loop {
            match kind {
                FieldKind::Scaled { factor, field } => {
                    coefficient *= factor;
                    kind = field;
                }
                FieldKind::Constant { c } => return Ok(Self { coefficient: coefficient * c, beta: 0.0, set: set.clone() }),
                FieldKind::PowerLaw { alpha } if origin => {
                    return Ok(Self { coefficient, beta: *alpha, set: set.clone() });
                }
                FieldKind::DistanceProfile { set: s, profile: Profile::Power { beta } } if s == set => {
                    return Ok(Self { coefficient, beta: *beta, set: set.clone() });
                }
                _ => return invalid("model must be a constant or a power of the distance to the set"),
            }
        }
    }
}

/// Surface measure of `{d = t}` as `sum c_j t^j`, valid for `t < limit`.
fn tube_area_terms(set: &CompactSet) -> Option<(Vec<(f64, f64)>, f64)> {
    let n = set.dim;
    let nf = n as f64;
    match &set.variant {
        SetVariant::FinitePoints { points } => {
            let mut sep = f64::INFINITY;
            for (i, a) in points.iter().enumerate() {
                for b in &points[i + 1..] {
                    sep = sep.min(a.iter().zip(b).map(|(x, y)| (x - y) * (x - y)).sum::<f64>().sqrt());
                }
            }
            Some((vec![(points.len() as f64 * sphere_area(n), nf - 1.0)], sep / 2.0))
        }
        SetVariant::Segment { a, b } => {
            let len = a.iter().zip(b).map(|(x, y)| (x - y) * (x - y)).sum::<f64>().sqrt();
            if n == 1 {
                return Some((vec![(2.0, 0.0)], f64::INFINITY));
            }
            Some((vec![(len * sphere_area(n - 1), nf - 2.0), (sphere_area(n), nf - 1.0)], f64::INFINITY))
        }
        SetVariant::CircleInR3 { radius, .. } => {
            Some((vec![(4.0 * std::f64::consts::PI * std::f64::consts::PI * radius, 1.0)], *radius))
        }
        _ => None,
    }
}

/// `int_{a < d(x) <= b} u dx`.
pub fn shell_mass(model: &RemovabilityModel, a: f64, b: f64, mc: &McSpec) -> Result<Estimate> {
    if !(0.0 <= a && a < b) {
        return invalid("need 0 <= a < b");
    }
    let beta = model.beta;
    let c = model.coefficient;
    if let Some((terms, _)) = tube_area_terms(&model.set).filter(|(_, l)| b <= *l) {
        let lead = terms.iter().map(|t| t.1).fold(f64::INFINITY, f64::min);
        if lead - beta <= -1.0 {
            return Err(Error::ModelNotIntegrable(format!("d^-{beta} is not integrable near the set")));
        }
        let f = |t: f64| t.powf(-beta) * terms.iter().map(|(cj, j)| cj * t.powf(*j)).sum::<f64>();
        let tol = Tolerance::new(1e-300, 1e-13);
        let lo = if a > 0.0 { a } else { 1e-12 * b };
        let pts = quad::breakpoints(lo, b, quad::graded_panels(lo, b));
        let body = quad::integrate_breaks(f, &pts, tol);
        // t^{q} behaviour on (0, lo) when the shell reaches the set
        let head = if a > 0.0 {
            Estimate::exact(0.0)
        } else {
            let q = (f(lo) / f(0.5 * lo)).log2();
            let v = f(lo) * lo / (q + 1.0);
            Estimate::new(v, 1e-6 * v.abs())
        };
        return Ok((body + head).scale(c));
    }
    // mass = [t^{-beta} V(t)]_a^b + beta int_a^b t^{-beta-1} V(t) dt
    let lo = if a > 0.0 { a } else { b * 2f64.powi(-30) };
    let (x, w) = quad::gauss_legendre(12);
    let (la, lb) = (lo.ln(), b.ln());
    let vol = |t: f64| tube_volume(&model.set, t, mc).map(|m| (m.value, m.ci_halfwidth));
    let (vb, eb) = vol(b)?;
    let (va, ea) = if a > 0.0 { vol(a)? } else { (0.0, 0.0) };
    let mut integral = 0.0;
    let mut err = eb * b.powf(-beta) + ea * lo.powf(-beta);
    for (xi, wi) in x.iter().zip(&w) {
        let s = 0.5 * (la + lb) + 0.5 * (lb - la) * xi;
        let t = s.exp();
        let (v, e) = vol(t)?;
        let jac = 0.5 * (lb - la) * t;
        integral += wi * beta * t.powf(-beta - 1.0) * v * jac;
        err += wi * beta * t.powf(-beta - 1.0) * e * jac;
    }
    let value = b.powf(-beta) * vb - if a > 0.0 { a.powf(-beta) * va } else { 0.0 } + integral;
    Ok(Estimate::new(c * value, c.abs() * err))
}

/// Weighted masses `eps^{-2 gamma} int_{N_{2 eps}} u`, dyadic shell ratios and
/// the small-scale exponent of `int_{N_{2 eps}} u` for a model solution.
pub fn removability_ledger(
    u: &ScalarField,
    f_bounds: (f64, f64),
    p: f64,
    gamma: f64,
    set: &CompactSet,
    eps_sweep: &[f64],
    mc: &McSpec,
) -> Result<LedgerReport> {
    let n = set.dim as f64;
    if !(gamma > 0.0 && gamma < n / 2.0) {
        return invalid(format!("gamma = {gamma} outside (0, n/2)"));
    }
    if !(p > 1.0) {
        return invalid(format!("p = {p} must exceed 1"));
    }
    if !(f_bounds.0 > 0.0 && f_bounds.0 <= f_bounds.1) {
        return invalid("f bounds must satisfy 0 < lower <= upper");
    }
    if eps_sweep.len() < 2 {
        return invalid("need at least two scales");
    }
    let model = RemovabilityModel::from_field(u, set)?;
    let lambda = set_dimension(set);
    let n_eff = n - lambda;
    if model.beta >= n_eff {
        return Err(Error::ModelNotIntegrable(format!(
            "beta = {} is not below n - lambda = {n_eff}",
            model.beta
        )));
    }
    let p_prime = p / (p - 1.0);
    let predicted_ratio = 2f64.powf(-(n_eff - model.beta));

    let mut samples = Vec::new();
    let mut masses = Vec::new();
    let mut worst_ratio = 0f64;
    let mut decaying = true;
    for &eps in eps_sweep {
        let ball = shell_mass(&model, 0.0, 2.0 * eps, mc)?;
        masses.push(ball.value);
        let m = eps.powf(-2.0 * gamma) * ball.value;
        samples.push(LedgerSample::new(
            &[("eps", eps), ("near_mass", ball.value), ("f_lower", f_bounds.0), ("f_upper", f_bounds.1)],
            eps,
            m,
            eps.powf(-2.0 * gamma) * ball.abs_error,
            1.0,
        ));
        let shells: Vec<f64> = (0..=SHELLS)
            .map(|k| {
                let hi = eps / 2f64.powi(k as i32);
                shell_mass(&model, hi / 2.0, hi, mc).map(|e| e.value)
            })
            .collect::<Result<_>>()?;
        for w in shells.windows(2) {
            let ratio = w[1] / w[0];
            worst_ratio = worst_ratio.max((ratio / predicted_ratio - 1.0).abs());
            decaying &= ratio < 1.0;
        }
    }
    let logs: Vec<f64> = eps_sweep.iter().map(|e| e.ln()).collect();
    let log_mass: Vec<f64> = masses.iter().map(|m| m.ln()).collect();
    let exponent = fit::line(&logs, &log_mass).slope;
    let hoelder = n_eff / p_prime - 2.0 * gamma / p;
    let proof_exponent = (n_eff - 2.0 * gamma * p_prime / p).min(n_eff / p_prime);

    let mut checks = vec![Check::at_most("dyadic_ratio_relative_deviation", worst_ratio, RATIO_TOL, 0.0)];
    if hoelder > 0.0 {
        checks.push(Check::flag("dyadic_shells_decay_geometrically", decaying));
    }
    checks.push(Check::near("near_mass_exponent_exact", exponent, n_eff - model.beta, EXPONENT_TOL));
    checks.push(Check::at_least("near_mass_exponent_vs_proof", exponent, proof_exponent, EXPONENT_TOL));
    Ok(LedgerReport::assemble("removability", samples, checks))
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::f64::consts::PI;

    #[test]
    fn inverse_square_ball_mass() {
        // int_{B_r} |x|^{-2} dx = 4 pi r in three dimensions
        let set = CompactSet::point(vec![0.0; 3]).unwrap();
        let u = ScalarField::new(3, FieldKind::PowerLaw { alpha: 2.0 }).unwrap();
        let m = RemovabilityModel::from_field(&u, &set).unwrap();
        for r in [1e-3, 0.25, 2.0] {
            let e = shell_mass(&m, 0.0, r, &McSpec::default()).unwrap();
            assert!((e.value - 4.0 * PI * r).abs() < 1e-9 * r, "{e:?}");
        }
    }
}
