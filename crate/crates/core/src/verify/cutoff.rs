//! `|(-Delta)^sigma eta_eps|` against the scale-covariant envelopes of the
//! point, manifold and mollified-tube cutoffs.

use serde::{Deserialize, Serialize};

use super::{par_map, probe_point, Check, LedgerReport, LedgerSample};
use crate::cutoffs::{set_dimension, CutoffFamily, CutoffKind};
use crate::error::{invalid, Result};
use crate::fields::ramp;
use crate::fraclap::{frac_laplacian, FracOrder, QuadratureSpec};

/// Error bars (Monte Carlo confidence half-widths included) must stay below
/// this fraction of each left-hand side.
const MAX_RELATIVE_ERROR: f64 = 0.1;

/// Where a probe sits: at distance `t eps` or at absolute distance `t` from the set.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Probe {
    Scaled(f64),
    Absolute(f64),
}

impl Probe {
    pub fn distance(&self, eps: f64) -> f64 {
        match *self {
            Probe::Scaled(t) => t * eps,
            Probe::Absolute(t) => t,
        }
    }
}

/// Right-hand side with unit constants at distance `d`, `|x| = r`.
fn envelope(c: &CutoffFamily, sigma: f64, lambda: f64, d: f64, r: f64) -> f64 {
    let n = c.set.dim as f64;
    let eps = c.eps;
    let far = (1.0 + r).powf(-(n + 2.0 * sigma));
    match c.kind {
        CutoffKind::PointAnnulus => eps.powf(-2.0 * sigma) * (1.0 + d / eps).powf(-(n + 2.0 * sigma)) + far,
        CutoffKind::ManifoldFermi => {
            let big_n = n - c.set.manifold_dim().unwrap_or(0) as f64;
            let outer = c.outer.unwrap_or(1.0);
            let eta2 = 1.0 - ramp(2.0 * d / outer);
            eps.powf(-2.0 * sigma) * eta2 * (1.0 + d / eps).powf(-(big_n + 2.0 * sigma)) + far
        }
        CutoffKind::MollifiedTube | CutoffKind::Inner => {
            if d < 1.0 {
                eps.powf(-2.0 * sigma) * (1.0 + d / eps).powf(-(n + 2.0 * sigma - lambda))
            } else {
                eps.powf(n - lambda) * d.powf(-(n + 2.0 * sigma))
            }
        }
    }
}

/// Sweeps `eps` and the probes, rebuilding `template` at each scale.
/// `lambda` is the tube exponent used by the mollified envelope; it defaults
/// to the known dimension of the set.
pub fn verify_cutoff_bound(
    template: &CutoffFamily,
    sigma: f64,
    eps_sweep: &[f64],
    probes: &[Probe],
    lambda: Option<f64>,
    spec: &QuadratureSpec,
) -> Result<LedgerReport> {
    if !(sigma > 0.0) || sigma.fract() == 0.0 {
        return invalid(format!("sigma = {sigma} must be positive and non-integer"));
    }
    if eps_sweep.is_empty() || probes.is_empty() {
        return invalid("empty sweep");
    }
    let n = template.set.dim;
    let order = FracOrder::new(n, sigma)?;
    let lambda = lambda.unwrap_or_else(|| set_dimension(&template.set));
    let families: Vec<CutoffFamily> = eps_sweep.iter().map(|&e| template.with_eps(e)).collect::<Result<_>>()?;
    let cells: Vec<(usize, Probe)> = (0..families.len()).flat_map(|i| probes.iter().map(move |p| (i, *p))).collect();
    let rows = par_map(spec.workers, &cells, |&(i, probe)| -> Result<LedgerSample> {
        let c = &families[i];
        let d = probe.distance(c.eps);
        let x = probe_point(&c.set, d)?;
        let r = x.iter().map(|v| v * v).sum::<f64>().sqrt();
        let v = frac_laplacian(&c.field()?, &order, &x, spec)?;
        let (kind, t) = match probe {
            Probe::Scaled(t) => (0.0, t),
            Probe::Absolute(t) => (1.0, t),
        };
        Ok(LedgerSample::new(
            &[("eps", c.eps), ("d", d), ("r", r), ("probe", t), ("absolute", kind)],
            c.eps,
            v.value.abs(),
            v.abs_error,
            envelope(c, sigma, lambda, d, r),
        ))
    });
    let samples: Vec<LedgerSample> = rows.into_iter().collect::<Result<_>>()?;
    let id = match template.kind {
        CutoffKind::PointAnnulus => "point_cutoff_bound",
        CutoffKind::ManifoldFermi => "manifold_cutoff_bound",
        CutoffKind::MollifiedTube => "tube_cutoff_bound",
        CutoffKind::Inner => "inner_cutoff_bound",
    };
    let worst = samples.iter().map(|s| if s.lhs > 0.0 { s.lhs_error / s.lhs } else { 0.0 }).fold(0.0, f64::max);
    let checks = vec![Check::at_most("max_relative_error", worst, MAX_RELATIVE_ERROR, 0.0)];
    Ok(LedgerReport::assemble(id, samples, checks))
}
