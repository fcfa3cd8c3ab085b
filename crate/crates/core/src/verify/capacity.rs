//! Energies of the harmonic-weighted cutoff sequence `psi_k`.

use super::{par_map, Check, LedgerReport, LedgerSample};
use crate::cutoffs::{inner_cutoff, set_dimension, CapacitySequence};
use crate::error::{invalid, Result};
use crate::fit;
use crate::fraclap::{energy_cross, quadratic_energy, FracOrder, QuadratureSpec};

/// Relative tolerance on the cross-energy slope.
const SLOPE_TOL: f64 = 0.1;

/// `E(psi_k) = int psi_k (-Delta)^sigma psi_k` for every member, with
/// `E(psi_k) S_k` compared across `k`, monotonicity of `E`, and the slope of
/// `int eta_eps (-Delta)^sigma eta_delta` in `eps / delta` at `delta = eps_1`.
pub fn capacity_decay(seq: &CapacitySequence, sigma: f64, cross_ratios: &[f64], spec: &QuadratureSpec) -> Result<LedgerReport> {
    let set = &seq.members[0].set;
    let n = set.dim;
    let order = FracOrder::new(n, sigma)?;
    if cross_ratios.len() < 3 || cross_ratios.iter().any(|t| !(*t > 0.0 && *t < 1.0)) {
        return invalid("need at least three cross ratios in (0, 1)");
    }
    let ks: Vec<usize> = (1..=seq.k).collect();
    let energies = par_map(spec.workers, &ks, |&k| quadratic_energy(&seq.psi_field(k)?, &order, spec));
    let mut samples = Vec::new();
    let mut values = Vec::new();
    for (k, e) in ks.iter().zip(energies) {
        let e = e?;
        let s_k = CapacitySequence::harmonic(*k);
        samples.push(LedgerSample::new(&[("k", *k as f64), ("S_k", s_k)], *k as f64, e.value, e.abs_error, 1.0 / s_k));
        values.push(e);
    }
    let mut checks = Vec::new();
    for (i, w) in values.windows(2).enumerate() {
        let slack = w[0].abs_error + w[1].abs_error;
        checks.push(Check::at_most(&format!("energy_non_increasing_{}_{}", i + 1, i + 2), w[1].value, w[0].value, slack));
    }

    let delta = seq.eps_schedule[0];
    let outer = inner_cutoff(set, delta)?.field()?;
    let cross = par_map(spec.workers, cross_ratios, |&t| -> Result<f64> {
        let inner = inner_cutoff(set, t * delta)?.field()?;
        Ok(energy_cross(&inner, &outer, &order, spec)?.value)
    });
    let cross: Vec<f64> = cross.into_iter().collect::<Result<_>>()?;
    let slope = fit::log_log(cross_ratios, &cross.iter().map(|v| v.abs()).collect::<Vec<_>>()).slope;
    // the bound is eps^{n - lambda} delta^{-2 sigma}; at the critical order both exponents equal 2 sigma
    let target = n as f64 - set_dimension(set);
    checks.push(Check::near("cross_energy_slope", slope, target, SLOPE_TOL * target));
    Ok(LedgerReport::assemble("capacity_decay", samples, checks))
}
