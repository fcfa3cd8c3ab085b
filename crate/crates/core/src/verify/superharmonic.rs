//! `(-Delta)^sigma v >= 0` for Riesz potentials `v = I_gamma F` with `F >= 0`,
//! and the weighted integrability functionals around them.

use super::{par_map, Check, LedgerReport, LedgerSample};
use crate::error::{invalid, Result};
use crate::fields::{weighted_integral, weighted_l1_norm, FieldKind, ScalarField, WeightedNormResult};
use crate::fraclap::{composed_kernel_value, frac_laplacian, FracOrder, QuadratureSpec};
use crate::quad::{self, Tolerance};
use crate::special::{riesz_constant, sphere_area};

/// Routes must agree within this many combined error bars.
const AGREEMENT_BARS: f64 = 3.0;

/// `int F` and the support radius of a compactly supported radial density.
fn mass_and_radius(f: &ScalarField) -> Option<(f64, f64)> {
    let n = f.dim;
    let radius = f.kind.support_radius(n)?;
    if !f.radial {
        return None;
    }
    let pts = quad::breakpoints(0.0, radius, f.kind.radial_breaks().into_iter().filter(|b| *b < radius));
    let e = quad::integrate_breaks(|r| f.radial_value(r) * r.powi(n as i32 - 1), &pts, Tolerance::new(1e-300, 1e-12));
    Some((sphere_area(n) * e.value, radius))
}

/// Evaluates `(-Delta)^sigma I_gamma F` at each point twice: through the
/// kernel `Gamma_{gamma - sigma}` and by quadrature on the potential. Rows
/// compare the value against the lower bound
/// `c_{n, gamma - sigma} |F|_1 (|x| + R)^{2(gamma - sigma) - n}` for `F` supported in `B_R`.
pub fn superharmonic_check(
    density: &ScalarField,
    gamma: f64,
    sigma_list: &[f64],
    points: &[Vec<f64>],
    spec: &QuadratureSpec,
) -> Result<LedgerReport> {
    let n = density.dim;
    if sigma_list.iter().any(|s| !(*s > 0.0 && *s < gamma)) {
        return invalid("each sigma must lie in (0, gamma)");
    }
    if !(gamma > 0.0 && gamma < n as f64 / 2.0) {
        return invalid(format!("gamma = {gamma} outside (0, n/2)"));
    }
    let potential = ScalarField::new(n, FieldKind::RieszPotential { density: Box::new(density.kind.clone()), gamma })?;
    let sandwich = mass_and_radius(density);
    let cells: Vec<(f64, usize)> = sigma_list.iter().flat_map(|&s| (0..points.len()).map(move |i| (s, i))).collect();
    let rows = par_map(spec.workers, &cells, |&(s, i)| -> Result<(LedgerSample, bool)> {
        let x = &points[i];
        let kernel = composed_kernel_value(density, gamma, s, x, spec)?;
        let direct = frac_laplacian(&potential, &FracOrder::new(n, s)?, x, spec)?;
        let r = x.iter().map(|v| v * v).sum::<f64>().sqrt();
        let lower = match sandwich {
            Some((mass, radius)) => riesz_constant(n, gamma - s) * mass * (r + radius).powf(2.0 * (gamma - s) - n as f64),
            None => 0.0,
        };
        let agree = (kernel.value - direct.value).abs() <= AGREEMENT_BARS * (kernel.abs_error + direct.abs_error);
        let row = LedgerSample::new(
            &[("sigma", s), ("r", r), ("kernel_route", kernel.value), ("direct_route", direct.value), ("direct_error", direct.abs_error)],
            s,
            lower,
            0.0,
            kernel.value,
        );
        Ok((row, agree))
    });
    let mut samples = Vec::with_capacity(rows.len());
    let mut disagreements = 0usize;
    for row in rows {
        let (s, a) = row?;
        disagreements += (!a) as usize;
        samples.push(s);
    }
    // the kernel route integrates a positive kernel against F >= 0
    let min_value = samples.iter().map(|s| s.rhs).fold(f64::INFINITY, f64::min);
    let worst_margin = samples.iter().map(|s| s.margin).fold(f64::INFINITY, f64::min);
    let checks = vec![
        Check::at_least("min_value", min_value, 0.0, 0.0),
        Check::at_least("sandwich_margin", worst_margin, 0.0, 0.0),
        Check::at_most("route_disagreements", disagreements as f64, 0.0, 0.0),
    ];
    Ok(LedgerReport::assemble("superharmonic", samples, checks))
}

/// `int F / (1 + |x|^{n - 2 gamma + delta})`.
pub fn weighted_finiteness(density: &ScalarField, gamma: f64, delta: f64, rel_tol: f64) -> Result<WeightedNormResult> {
    let n = density.dim as f64;
    if !(gamma > 0.0 && gamma < n / 2.0) || !(delta >= 0.0) {
        return invalid("need 0 < gamma < n/2 and delta >= 0");
    }
    weighted_integral(density, n - 2.0 * gamma + delta, rel_tol)
}

/// `L_s` functionals of a potential for each `s`.
pub fn l_s_membership(potential: &ScalarField, s_list: &[f64], rel_tol: f64) -> Result<Vec<WeightedNormResult>> {
    s_list.iter().map(|&s| weighted_l1_norm(potential, s, rel_tol)).collect()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn zero_density_gives_zero() {
        let f = ScalarField::new(3, FieldKind::constant(0.0)).unwrap();
        let pts = vec![vec![0.5, 0.0, 0.0], vec![2.0, 1.0, 0.0]];
        let r = superharmonic_check(&f, 0.8, &[0.5], &pts, &QuadratureSpec::default()).unwrap();
        for s in &r.samples {
            assert_eq!(s.rhs, 0.0);
            assert!(s.input["direct_route"].abs() <= s.input["direct_error"] + 1e-15);
        }
        assert!(r.pass);
    }

    #[test]
    fn weighted_finiteness_verdicts() {
        let c = ScalarField::new(3, FieldKind::constant(1.0)).unwrap();
        assert!(weighted_finiteness(&c, 0.5, 1.0, 1e-8).unwrap().infinite);
        let f = ScalarField::new(3, FieldKind::ShiftedPower { rho: 4.0 }).unwrap();
        assert!(weighted_finiteness(&f, 0.5, 1.0, 1e-8).unwrap().is_finite());
    }
}
