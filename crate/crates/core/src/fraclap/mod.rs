//! The fractional Laplacian `(-Delta)^sigma` with Fourier symbol `|xi|^{2 sigma}`.
//!
//! Three independent evaluation routes are provided:
//! * [`frac_laplacian`]: spherical means of the second-difference integrand
//!   (deterministic for radial fields and for `n = 1`, Monte Carlo far field
//!   otherwise);
//! * [`frac_laplacian_radial`]: one-dimensional radial integral against the
//!   sphere-averaged kernel;
//! * [`fourier_oracle`]: weighting the radial Fourier transform by `|xi|^{2 sigma}`.

pub mod energy;
pub mod oracle;
pub mod radial;
pub mod realspace;
pub mod riesz;

use serde::{Deserialize, Serialize};

use crate::error::{invalid, Result};
use crate::quad::Estimate;
use crate::special;

pub use energy::{energy_cross, quadratic_energy};
pub use oracle::fourier_oracle;
pub use radial::frac_laplacian_radial;
pub use realspace::frac_laplacian;
pub use riesz::{composed_kernel_value, riesz_potential, RieszKernel};

/// Order `sigma = k + sigma'` with `k` integer and `sigma'` in `[0, 1)`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct FracOrder {
    pub n: usize,
    pub sigma: f64,
    pub k: usize,
    pub sigma_frac: f64,
    /// `C_{n, sigma'}`; 1 for integer orders, where it is unused.
    pub c_norm: f64,
    pub is_integer: bool,
}

impl FracOrder {
    pub fn new(n: usize, sigma: f64) -> Result<Self> {
        if n == 0 {
            return invalid("dimension must be positive");
        }
        if !(sigma > 0.0 && sigma.is_finite()) {
            return invalid(format!("order sigma = {sigma} must be positive"));
        }
        let k = sigma.floor() as usize;
        let mut sigma_frac = sigma - k as f64;
        if sigma_frac < 1e-14 {
            sigma_frac = 0.0;
        }
        let is_integer = sigma_frac == 0.0;
        let c_norm = if is_integer { 1.0 } else { normalization_constant(n, sigma_frac) };
        Ok(Self { n, sigma, k, sigma_frac, c_norm, is_integer })
    }
}

/// `C_{n,s} = 4^s Gamma(n/2 + s) / (pi^{n/2} |Gamma(-s)|)`, `0 < s < 1`.
pub fn normalization_constant(n: usize, sigma_prime: f64) -> f64 {
    special::frac_normalization(n, sigma_prime)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum AngularRule {
    Gauss,
    ProductSphere,
    MonteCarlo,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct QuadratureSpec {
    /// Near/far split at `split_radius_factor * (1 + |x|)`.
    pub split_radius_factor: f64,
    /// Order of the fixed angular product rule.
    pub radial_nodes: usize,
    pub angular_rule: AngularRule,
    pub mc_samples: usize,
    pub seed: u64,
    pub rel_tol: f64,
    /// Worker threads for Monte Carlo; 0 uses the global pool.
    pub workers: usize,
}

impl Default for QuadratureSpec {
    fn default() -> Self {
        Self {
            split_radius_factor: 0.5,
            radial_nodes: 24,
            angular_rule: AngularRule::ProductSphere,
            mc_samples: 400_000,
            seed: 0x5eed,
            rel_tol: 1e-10,
            workers: 0,
        }
    }
}

impl QuadratureSpec {
    pub fn validate(&self) -> Result<()> {
        if self.radial_nodes < 16 {
            return invalid("radial_nodes must be at least 16");
        }
        if self.mc_samples < 1000 {
            return invalid("mc_samples must be at least 1000");
        }
        if !(self.rel_tol > 0.0 && self.rel_tol < 0.1) {
            return invalid("rel_tol must lie in (0, 0.1)");
        }
        if !(self.split_radius_factor > 0.0) {
            return invalid("split_radius_factor must be positive");
        }
        Ok(())
    }

    pub fn mc(&self) -> crate::mc::McSpec {
        crate::mc::McSpec { samples: self.mc_samples, seed: self.seed, workers: self.workers }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Method {
    Deterministic,
    MonteCarlo,
    Oracle,
    /// Plain Riesz convolution.
    Plain,
    /// Riesz convolution with the kernel value at the origin subtracted.
    Renormalized,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct EvalResult {
    pub value: f64,
    pub abs_error: f64,
    pub method: Method,
}

impl EvalResult {
    pub fn new(e: Estimate, method: Method) -> Self {
        Self { value: e.value, abs_error: e.abs_error, method }
    }

    /// `|a - b| <= k (err_a + err_b)`.
    pub fn agrees(&self, other: &EvalResult, k: f64) -> bool {
        (self.value - other.value).abs() <= k * (self.abs_error + other.abs_error)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn order_split() {
        let o = FracOrder::new(3, 1.3).unwrap();
        assert_eq!(o.k, 1);
        assert!((o.sigma_frac - 0.3).abs() < 1e-14);
        assert!(o.c_norm > 0.0);
        assert!(FracOrder::new(3, 1.0).unwrap().is_integer);
        assert!(FracOrder::new(3, -0.5).is_err());
    }
}
