//! Integrability bootstrap for `(-Delta)^gamma u = u^p`: partial sums
//! `s_m = sum_{k <= m} p^{-k}` and the first `m` with `n - 2 gamma - 2 gamma s_m <= 0`.

use serde::{Deserialize, Serialize};

use crate::error::{invalid, Result};

/// Longest list of partial sums reported when the recursion never closes.
pub const SUM_CAP: usize = 64;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BootstrapPlan {
    pub n: usize,
    pub gamma: f64,
    pub p: f64,
    pub p_prime: f64,
    pub s_m: Vec<f64>,
    /// `None` when no finite `m` closes the recursion.
    pub m0: Option<usize>,
    /// `n - 2 gamma / p`: weighted integrability of `u` beyond this power.
    pub q_threshold: f64,
    /// `n - 2 gamma p' / p`: the analogous threshold for `u^p`.
    pub s_threshold: f64,
    /// `p < n / (n - 2 gamma)`.
    pub subcritical: bool,
    /// `n / p' < 2 gamma`.
    pub contradiction_holds: bool,
}

pub fn bootstrap_exponents(n: usize, gamma: f64, p: f64) -> Result<BootstrapPlan> {
    let nf = n as f64;
    if n == 0 || !(gamma > 0.0 && gamma < nf / 2.0) {
        return invalid(format!("need 0 < gamma < n/2, got gamma = {gamma}, n = {n}"));
    }
    if !(p > 1.0 && p.is_finite()) {
        return invalid(format!("need p > 1, got {p}"));
    }
    let p_prime = p / (p - 1.0);
    // s_m >= T  <=>  p^{-m} <= 1 - T (p - 1) =: D, with T = (n - 2 gamma) / (2 gamma)
    let t = (nf - 2.0 * gamma) / (2.0 * gamma);
    let subcritical = p * (nf - 2.0 * gamma) < nf;
    let m0 = if subcritical {
        let d = 1.0 - t * (p - 1.0);
        Some(((-d.ln() / p.ln()).ceil() as usize).max(1))
    } else {
        None
    };
    let len = m0.unwrap_or(SUM_CAP);
    let mut s_m = Vec::with_capacity(len);
    let mut s = 0.0;
    let mut term = 1.0;
    let limit = 1.0 / (p - 1.0);
    for _ in 0..len {
        term /= p;
        let next = s + term;
        // past this point the sum is indistinguishable from its limit
        if next == s || next >= limit {
            break;
        }
        s = next;
        s_m.push(s);
    }
    Ok(BootstrapPlan {
        n,
        gamma,
        p,
        p_prime,
        s_m,
        m0,
        q_threshold: nf - 2.0 * gamma / p,
        s_threshold: nf - 2.0 * gamma * p_prime / p,
        subcritical,
        contradiction_holds: nf * (p - 1.0) < 2.0 * gamma * p,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn worked_cases() {
        let b = bootstrap_exponents(3, 0.5, 1.2).unwrap();
        assert_eq!(b.m0, Some(3));
        assert!((b.s_m[0] - 0.833333333333).abs() < 1e-10);
        assert!((b.s_m[1] - 1.527777777777).abs() < 1e-10);
        assert!((b.s_m[2] - 2.106481481481).abs() < 1e-10);
        assert_eq!(bootstrap_exponents(3, 1.4, 2.0).unwrap().m0, Some(1));
        let c = bootstrap_exponents(3, 0.5, 1.5).unwrap();
        assert_eq!(c.m0, None);
        assert!(c.s_m.iter().all(|s| *s < 2.0));
        assert!(bootstrap_exponents(3, 1.5, 2.0).is_err());
        assert!(bootstrap_exponents(3, 0.5, 1.0).is_err());
    }
}
