//! Far-field decay of `(-Delta)^sigma phi` and truncation `phi_eps = phi eta(eps x)`.

use super::{decay_fit, par_map, Check, DecayFit, LedgerReport, LedgerSample, Regime};
use crate::error::{invalid, Error, Result};
use crate::fields::profile::Profile;
use crate::fields::{FieldKind, ScalarField};
use crate::fraclap::{frac_laplacian, FracOrder, QuadratureSpec};

/// Allowed slope deviation below and above the dimension.
const SUB_SLOPE_TOL: f64 = 0.05;
const SUPER_SLOPE_TOL: f64 = 0.1;
/// Log-corrected ratios must stay within this factor at `rho = n`.
const LOG_RATIO_FACTOR: f64 = 2.0;

fn on_axis(n: usize, r: f64) -> Vec<f64> {
    let mut x = vec![0.0; n];
    x[0] = r;
    x
}

/// Predicted envelope `(1+r)^{-2 sigma - min(rho, n)}`, times `ln(2 + r)` at `rho = n`.
fn envelope(rho: f64, n: usize, sigma: f64, r: f64) -> f64 {
    let base = (1.0 + r).powf(-2.0 * sigma - rho.min(n as f64));
    match Regime::classify(rho, n) {
        Regime::EqualNLog => base * (2.0 + r).ln(),
        _ => base,
    }
}

/// Fits the far-field slope of `(-Delta)^sigma field` on `radii` and checks
/// it against the regime predicted by the decay exponent.
pub fn verify_phi0_decay(field: &ScalarField, sigma: f64, radii: &[f64], spec: &QuadratureSpec) -> Result<(DecayFit, LedgerReport)> {
    let rho = field.decay_hint.ok_or_else(|| Error::InvalidParameter("field has no decay exponent".into()))?;
    let n = field.dim;
    let order = FracOrder::new(n, sigma)?;
    let regime = Regime::classify(rho, n);
    let values = par_map(spec.workers, radii, |&r| frac_laplacian(field, &order, &on_axis(n, r), spec));
    let values: Vec<_> = values.into_iter().collect::<Result<_>>()?;
    let points: Vec<(f64, f64)> = radii.iter().zip(&values).map(|(r, v)| (*r, v.value.abs())).collect();
    let mut fit = decay_fit(&points, regime == Regime::EqualNLog)?;
    fit.regime = Some(regime);

    let predicted = -(2.0 * sigma + rho.min(n as f64));
    let samples: Vec<LedgerSample> = radii
        .iter()
        .zip(&values)
        .map(|(&r, v)| LedgerSample::new(&[("r", r)], r, v.value.abs(), v.abs_error, envelope(rho, n, sigma, r)))
        .collect();
    let ratios: Vec<f64> = samples.iter().map(|s| s.ratio()).collect();
    let hi = ratios.iter().cloned().fold(0.0, f64::max);
    let lo = ratios.iter().cloned().fold(f64::INFINITY, f64::min);
    let check = match regime {
        Regime::SubN => Check::near("slope", fit.slope, predicted, SUB_SLOPE_TOL),
        Regime::SuperN => Check::near("slope", fit.slope, predicted, SUPER_SLOPE_TOL),
        Regime::EqualNLog => Check::at_most("log_corrected_ratio_spread", hi / lo, LOG_RATIO_FACTOR, 0.0),
    };
    let report = LedgerReport::assemble(&format!("phi0_decay/{regime:?}"), samples, vec![check]);
    Ok((fit, report))
}

/// `phi eta(eps |x|)` with `eta = 1` on `[0, 1]` and `0` beyond 2.
fn truncated(phi: &FieldKind, eps: f64) -> FieldKind {
    FieldKind::Product {
        factors: vec![phi.clone(), FieldKind::RadialProfile { profile: Profile::RampDown { inner: 1.0 / eps, outer: 2.0 / eps } }],
    }
}

/// `phi_eps - phi = -phi (1 - eta(eps |x|))`, supported off `B_{1/eps}`.
fn truncation_defect(phi: &FieldKind, eps: f64) -> FieldKind {
    FieldKind::Scaled {
        factor: -1.0,
        field: Box::new(FieldKind::Product {
            factors: vec![phi.clone(), FieldKind::RadialProfile { profile: Profile::RampUp { inner: 1.0 / eps, outer: 2.0 / eps } }],
        }),
    }
}

/// Local uniform convergence `(-Delta)^gamma phi_eps -> (-Delta)^gamma phi` on
/// `|x| <= k_radius`, plus the uniform-in-eps bound
/// `|(-Delta)^gamma phi_eps(x)| <= C (1+|x|)^{-2 gamma - rho}` on `bound_radii`.
pub fn verify_truncation_convergence(
    phi: &ScalarField,
    gamma: f64,
    eps_sweep: &[f64],
    k_radius: f64,
    bound_radii: &[f64],
    spec: &QuadratureSpec,
) -> Result<LedgerReport> {
    let rho = phi.decay_hint.ok_or_else(|| Error::InvalidParameter("field has no decay exponent".into()))?;
    let n = phi.dim;
    if !phi.radial {
        return invalid("truncation ledgers need a radial field");
    }
    if eps_sweep.iter().any(|e| !(*e > 0.0 && 1.0 / e > k_radius)) {
        return invalid("each eps must keep the compact set inside B_{1/eps}");
    }
    let order = FracOrder::new(n, gamma)?;
    let k_grid: Vec<f64> = (0..=8).map(|i| k_radius * i as f64 / 8.0).collect();

    let cells: Vec<(f64, f64)> = eps_sweep.iter().flat_map(|&e| k_grid.iter().map(move |&r| (e, r))).collect();
    let defects = par_map(spec.workers, &cells, |&(e, r)| {
        let g = ScalarField::new(n, truncation_defect(&phi.kind, e))?;
        frac_laplacian(&g, &order, &on_axis(n, r), spec)
    });
    let mut sup = vec![0f64; eps_sweep.len()];
    for (i, d) in defects.into_iter().enumerate() {
        let d = d?;
        let j = i / k_grid.len();
        sup[j] = sup[j].max(d.value.abs());
    }
    let mut checks = Vec::new();
    for (j, w) in sup.windows(2).enumerate() {
        checks.push(Check::at_most(&format!("sup_error_step_{}", j + 1), w[1], w[0], 0.0));
    }
    checks.push(Check::at_most("final_sup_error", *sup.last().unwrap_or(&0.0), 1e-3, 0.0));

    let bound_cells: Vec<(f64, f64)> = eps_sweep.iter().flat_map(|&e| bound_radii.iter().map(move |&r| (e, r))).collect();
    let values = par_map(spec.workers, &bound_cells, |&(e, r)| {
        let g = ScalarField::new(n, truncated(&phi.kind, e))?;
        frac_laplacian(&g, &order, &on_axis(n, r), spec)
    });
    let mut samples = Vec::new();
    for ((e, r), v) in bound_cells.iter().zip(values) {
        let v = v?;
        samples.push(LedgerSample::new(&[("eps", *e), ("r", *r)], *e, v.value.abs(), v.abs_error, envelope(rho, n, gamma, *r)));
    }
    Ok(LedgerReport::assemble("truncation_convergence", samples, checks))
}
