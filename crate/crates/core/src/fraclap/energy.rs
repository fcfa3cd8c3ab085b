//! Quadratic forms `int phi (-Delta)^sigma psi` for compactly supported test fields.

use std::cell::Cell;

use super::realspace::frac_laplacian;
use super::{EvalResult, FracOrder, Method, QuadratureSpec};
use crate::error::{invalid, Error, Result};
use crate::fields::ScalarField;
use crate::quad::{self, Estimate, Tolerance};
use crate::special::sphere_area;

/// `int phi (-Delta)^sigma psi dx`; `phi` must have compact support.
pub fn energy_cross(phi: &ScalarField, psi: &ScalarField, order: &FracOrder, spec: &QuadratureSpec) -> Result<EvalResult> {
    let n = phi.dim;
    if psi.dim != n || order.n != n {
        return invalid("dimension mismatch in energy");
    }
    let support = phi
        .kind
        .support_radius(n)
        .ok_or_else(|| Error::InvalidParameter("energy needs a compactly supported field".into()))?;
    let inner_err = Cell::new(0f64);
    let failure = Cell::new(None::<Error>);
    let lap = |x: &[f64]| -> f64 {
        match frac_laplacian(psi, order, x, spec) {
            Ok(r) => {
                inner_err.set(inner_err.get().max(r.abs_error));
                r.value
            }
            Err(e) => {
                failure.set(Some(e));
                0.0
            }
        }
    };
    let mut breaks = phi.kind.radial_breaks();
    breaks.extend(psi.kind.radial_breaks());
    let tol = Tolerance { abs: 1e-300, rel: spec.rel_tol.max(1e-9), max_intervals: 200 };
    let (outer, measure) = if phi.radial && psi.radial {
        let pts = quad::breakpoints(0.0, support, breaks.iter().copied().filter(|b| *b < support));
        let area = sphere_area(n);
        let e = quad::integrate_breaks(
            |r| {
                let f = phi.radial_value(r);
                if f == 0.0 {
                    return 0.0;
                }
                let mut x = vec![0.0; n];
                x[0] = r;
                f * lap(&x) * r.powi(n as i32 - 1)
            },
            &pts,
            tol,
        );
        (e.scale(area), area * support.powi(n as i32) / n as f64)
    } else if n == 1 {
        let pts = quad::breakpoints(
            -support,
            support,
            breaks.iter().flat_map(|b| [-*b, *b]).filter(|b| b.abs() < support),
        );
        let e = quad::integrate_breaks(
            |t| {
                let f = phi.value(&[t]);
                if f == 0.0 {
                    0.0
                } else {
                    f * lap(&[t])
                }
            },
            &pts,
            tol,
        );
        (e, 2.0 * support)
    } else {
        return invalid("energies are implemented for radial fields and for n = 1");
    };
    if let Some(e) = failure.take() {
        return Err(e);
    }
    let sup_phi = 1.0f64.max(phi.value(&vec![0.0; n]).abs());
    let err = outer.abs_error + inner_err.get() * sup_phi * measure;
    Ok(EvalResult::new(Estimate::new(outer.value, err), Method::Deterministic))
}

/// `int phi (-Delta)^sigma phi dx`, the squared `H^sigma` seminorm.
pub fn quadratic_energy(phi: &ScalarField, order: &FracOrder, spec: &QuadratureSpec) -> Result<EvalResult> {
    energy_cross(phi, phi, order, spec)
}
