//! Cutoff families vanishing near a compact set, and capacity test sequences.

use std::collections::BTreeMap;
use std::sync::OnceLock;

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::error::{invalid, Error, Result};
use crate::fields::profile::Profile;
use crate::fields::{FieldKind, ScalarField};
use crate::mc::unit_vector;
use crate::quad;
use crate::series::Series;
use crate::sets::{CompactSet, SetVariant};
use crate::special::sphere_area;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum CutoffKind {
    /// `eta_1(x / eps) eta_2(x)` around a point.
    PointAnnulus,
    /// The same profile applied to the distance to a positive-reach set.
    ManifoldFermi,
    /// `1 - rho_eps * 1_{N_{2 eps}}`.
    MollifiedTube,
    /// `1 - eta_1(d / eps)`: equal to 1 on `N_eps`, 0 off `N_{2 eps}`.
    Inner,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct CutoffFamily {
    pub kind: CutoffKind,
    pub eps: f64,
    pub set: CompactSet,
    /// Name of the smooth base profile.
    pub profile: String,
    /// Outer localization radius (`R` for points, `4 rho` for manifolds).
    pub outer: Option<f64>,
    /// `j -> sup |d^j eta / dt^j|` along the radial or distance variable.
    pub deriv_bound: BTreeMap<usize, f64>,
    pub field: FieldKind,
}

impl CutoffFamily {
    pub fn field(&self) -> Result<ScalarField> {
        ScalarField::new(self.set.dim, self.field.clone())
    }

    pub fn eval(&self, x: &[f64]) -> f64 {
        self.field.eval(x)
    }

    /// The same construction at another scale.
    pub fn with_eps(&self, eps: f64) -> Result<CutoffFamily> {
        match self.kind {
            CutoffKind::PointAnnulus => point_cutoff(self.set.dim, eps, self.outer.unwrap_or(2.0)),
            CutoffKind::ManifoldFermi => manifold_cutoff(&self.set, eps, self.outer.unwrap_or(1.0) / 4.0),
            CutoffKind::MollifiedTube => tube_cutoff(&self.set, eps),
            CutoffKind::Inner => inner_cutoff(&self.set, eps),
        }
    }

    /// `eps^j deriv_bound(j)`, which stays bounded as `eps -> 0`.
    pub fn scaled_bound(&self, j: usize) -> Option<f64> {
        self.deriv_bound.get(&j).map(|b| b * self.eps.powi(j as i32))
    }
}

const BASE_PROFILE: &str = "exp_ramp";
const BOUND_ORDER: usize = 4;

/// Sampled sup of the first four derivatives of a profile over its ramps.
fn profile_bounds(p: &Profile) -> BTreeMap<usize, f64> {
    let breaks = p.breaks();
    let mut sup = [0f64; BOUND_ORDER + 1];
    for w in breaks.windows(2) {
        let (a, b) = (w[0], w[1]);
        if !(b > a) || p.flat_at(0.5 * (a + b)) {
            continue;
        }
        for i in 1..2000 {
            let t = a + (b - a) * i as f64 / 2000.0;
            let s = p.series(&Series::variable(t, BOUND_ORDER));
            for (j, m) in sup.iter_mut().enumerate().skip(1) {
                let d = s.derivative(j);
                if d.is_finite() {
                    *m = m.max(d.abs());
                }
            }
        }
    }
    (1..=BOUND_ORDER).map(|j| (j, sup[j])).collect()
}

/// `eta_eps(x) = eta_1(x / eps) eta_2(x)` around the origin of `R^n`:
/// zero on `B_eps`, equal to `eta_2` off `B_{2 eps}`, with `eta_2 = 1` on
/// `B_{R/2}` and `0` off `B_R`.
pub fn point_cutoff(n: usize, eps: f64, outer_profile_radius: f64) -> Result<CutoffFamily> {
    if !(eps > 0.0) || !(eps < outer_profile_radius / 4.0) {
        return Err(Error::EpsTooLarge { eps, outer: outer_profile_radius });
    }
    let set = CompactSet::point(vec![0.0; n])?;
    let profile = Profile::Window { eps, outer: outer_profile_radius };
    Ok(CutoffFamily {
        kind: CutoffKind::PointAnnulus,
        eps,
        set,
        profile: BASE_PROFILE.into(),
        outer: Some(outer_profile_radius),
        deriv_bound: profile_bounds(&profile),
        field: FieldKind::RadialProfile { profile },
    })
}

/// The point-annulus construction in the distance variable `d(x) = |z|`
/// of a set with reach at least `4 rho`.
pub fn manifold_cutoff(set: &CompactSet, eps: f64, rho: f64) -> Result<CutoffFamily> {
    if !matches!(set.variant, SetVariant::Segment { .. } | SetVariant::CircleInR3 { .. }) {
        return invalid("manifold cutoffs need a segment or a circle");
    }
    let reach = set.reach();
    if !(rho > 0.0) || reach < 4.0 * rho {
        return Err(Error::ReachTooSmall { reach, required: 4.0 * rho });
    }
    if !(eps > 0.0 && eps < rho / 4.0) {
        return Err(Error::EpsTooLarge { eps, outer: rho });
    }
    let profile = Profile::Window { eps, outer: 4.0 * rho };
    Ok(CutoffFamily {
        kind: CutoffKind::ManifoldFermi,
        eps,
        set: set.clone(),
        profile: BASE_PROFILE.into(),
        outer: Some(4.0 * rho),
        deriv_bound: profile_bounds(&profile),
        field: FieldKind::DistanceProfile { set: set.clone(), profile },
    })
}

/// Mollified complement of the tube `N_{2 eps}`.
pub fn tube_cutoff(set: &CompactSet, eps: f64) -> Result<CutoffFamily> {
    if !(eps > 0.0 && eps.is_finite()) {
        return invalid("eps must be positive");
    }
    let deriv_bound = mollifier_bounds(set.dim, eps);
    Ok(CutoffFamily {
        kind: CutoffKind::MollifiedTube,
        eps,
        set: set.clone(),
        profile: "bump_mollifier".into(),
        outer: None,
        deriv_bound,
        field: FieldKind::TubeCutoff { set: set.clone(), eps },
    })
}

/// `|grad^j (rho_eps * 1_A)| <= ||grad^j rho_eps||_{L^1}`.
fn mollifier_bounds(n: usize, eps: f64) -> BTreeMap<usize, f64> {
    let z = mollifier_mass(n);
    (1..=BOUND_ORDER)
        .map(|j| {
            // radial derivative of the bump profile, integrated over the ball
            let l1 = quad::gauss_fixed(
                |t| {
                    let s = bump_series(t, j);
                    s.derivative(j).abs() * t.powi(n as i32 - 1)
                },
                0.0,
                1.0,
                200,
            ) * sphere_area(n);
            (j, l1 / z / eps.powi(j as i32))
        })
        .collect()
}

fn bump(t: f64) -> f64 {
    if t < 1.0 {
        (-1.0 / (1.0 - t * t)).exp()
    } else {
        0.0
    }
}

/// `int_a^b bump(t) t^{n-1} dt`.
fn bump_moment(n: usize, a: f64, b: f64) -> f64 {
    quad::integrate(|t| bump(t) * t.powi(n as i32 - 1), a, b, quad::Tolerance::new(1e-300, 1e-13)).value
}

fn bump_series(t: f64, order: usize) -> Series {
    if t >= 1.0 {
        return Series::constant(0.0, order);
    }
    let v = Series::variable(t, order);
    v.mul(&v).scale(-1.0).offset(1.0).recip().scale(-1.0).exp()
}

/// `|S^{n-1}| int_0^1 bump(t) t^{n-1} dt`.
fn mollifier_mass(n: usize) -> f64 {
    static CACHE: OnceLock<Vec<f64>> = OnceLock::new();
    let table = CACHE.get_or_init(|| {
        (0..=16)
            .map(|k| {
                if k == 0 {
                    return 0.0;
                }
                sphere_area(k) * bump_moment(k, 0.0, 1.0)
            })
            .collect()
    });
    table.get(n).copied().unwrap_or_else(|| {
        sphere_area(n) * bump_moment(n, 0.0, 1.0)
    })
}

/// Sub-intervals of `[0, 1]` where `inside(t)` holds, by scanning and bisection.
fn ray_intervals(inside: impl Fn(f64) -> bool, scan: usize) -> Vec<(f64, f64)> {
    let mut out = Vec::new();
    let mut prev_t = 0.0;
    let mut prev_in = inside(0.0);
    let mut start = if prev_in { Some(0.0) } else { None };
    for i in 1..=scan {
        let t = i as f64 / scan as f64;
        let now = inside(t);
        if now != prev_in {
            let (mut lo, mut hi) = (prev_t, t);
            for _ in 0..48 {
                let m = 0.5 * (lo + hi);
                if inside(m) == prev_in {
                    lo = m;
                } else {
                    hi = m;
                }
            }
            let c = 0.5 * (lo + hi);
            if now {
                start = Some(c);
            } else if let Some(s) = start.take() {
                out.push((s, c));
            }
        }
        prev_t = t;
        prev_in = now;
    }
    if let Some(s) = start {
        out.push((s, 1.0));
    }
    out
}

/// `eta_eps(x) = 1 - int_{N_{2 eps}} rho_eps(x - y) dy` with the normalized
/// bump mollifier `rho_eps` supported in `B_eps`.
pub fn tube_cutoff_value(set: &CompactSet, eps: f64, x: &[f64]) -> f64 {
    let d = set.distance(x);
    if d <= eps {
        return 0.0;
    }
    if d >= 3.0 * eps {
        return 1.0;
    }
    let n = set.dim;
    let z = mollifier_mass(n);
    let radial = |w: &[f64]| -> f64 {
        let inside = |t: f64| {
            let y: Vec<f64> = x.iter().zip(w).map(|(a, b)| a + eps * t * b).collect();
            set.distance(&y) < 2.0 * eps
        };
        ray_intervals(inside, 32)
            .into_iter()
            .map(|(a, b)| bump_moment(n, a, b))
            .sum()
    };
    let covered = if n <= 3 {
        quad::sphere_rule(n, 32).iter().map(|(w, wt)| wt * radial(w)).sum::<f64>()
    } else {
        // fixed stream: the value is a deterministic function of x
        let mut rng = ChaCha8Rng::seed_from_u64(0x7ab3);
        let m = 4096;
        let s: f64 = (0..m).map(|_| radial(&unit_vector(&mut rng, n))).sum();
        sphere_area(n) * s / m as f64
    };
    (1.0 - covered / z).clamp(0.0, 1.0)
}

/// Known (Assouad) dimension of the set.
pub fn set_dimension(set: &CompactSet) -> f64 {
    match &set.variant {
        SetVariant::ProductCantor { ratio, factors, .. } => *factors as f64 * 2f64.ln() / (1.0 / ratio).ln(),
        _ => set.manifold_dim().unwrap_or(set.dim) as f64,
    }
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct CapacitySequence {
    pub k: usize,
    #[serde(rename = "S_k")]
    pub s_k: f64,
    pub eps_schedule: Vec<f64>,
    pub members: Vec<CutoffFamily>,
    /// `psi_k = (1 / S_k) sum_{l <= k} eta_{eps_l} / l` for `k = 1..`.
    pub psi: Vec<FieldKind>,
}

impl CapacitySequence {
    pub fn harmonic(k: usize) -> f64 {
        (1..=k).map(|l| 1.0 / l as f64).sum()
    }

    pub fn psi_field(&self, k: usize) -> Result<ScalarField> {
        if k == 0 || k > self.k {
            return invalid(format!("psi_{k} outside 1..={}", self.k));
        }
        ScalarField::new(self.members[0].set.dim, self.psi[k - 1].clone())
    }
}

/// `eps_l = eps0 / l!`.
pub fn factorial_schedule(eps0: f64, k: usize) -> Vec<f64> {
    let mut out = Vec::with_capacity(k);
    let mut f = 1.0;
    for l in 1..=k {
        f *= l as f64;
        out.push(eps0 / f);
    }
    out
}

/// `1 - eta_1(d / eps)`: 1 on `N_eps`, 0 off `N_{2 eps}`.
pub fn inner_cutoff(set: &CompactSet, eps: f64) -> Result<CutoffFamily> {
    if !(eps > 0.0 && eps.is_finite()) {
        return invalid("eps must be positive");
    }
    let profile = Profile::RampDown { inner: eps, outer: 2.0 * eps };
    let field = match &set.variant {
        SetVariant::FinitePoints { points } if points.len() == 1 && points[0].iter().all(|v| *v == 0.0) => {
            FieldKind::RadialProfile { profile: profile.clone() }
        }
        _ => FieldKind::DistanceProfile { set: set.clone(), profile: profile.clone() },
    };
    Ok(CutoffFamily {
        kind: CutoffKind::Inner,
        eps,
        set: set.clone(),
        profile: BASE_PROFILE.into(),
        outer: None,
        deriv_bound: profile_bounds(&profile),
        field,
    })
}

/// Inner cutoffs `1 - eta_1(d / eps_l)` combined with harmonic weights.
pub fn capacity_sequence(set: &CompactSet, sigma: f64, k_max: usize, eps0: f64) -> Result<CapacitySequence> {
    let bound = (set.dim as f64 - set_dimension(set)) / 2.0;
    if !(sigma > 0.0) || sigma > bound + 1e-12 {
        return Err(Error::SigmaTooLarge { sigma, bound });
    }
    if k_max == 0 || k_max > 8 {
        return invalid("k_max must lie in 1..=8");
    }
    if !(eps0 > 0.0) {
        return invalid("eps0 must be positive");
    }
    let eps_schedule = factorial_schedule(eps0, k_max);
    let members: Vec<CutoffFamily> = eps_schedule.iter().map(|&eps| inner_cutoff(set, eps)).collect::<Result<_>>()?;
    let psi = (1..=k_max)
        .map(|k| {
            let s = CapacitySequence::harmonic(k);
            if k == 1 {
                return members[0].field.clone();
            }
            FieldKind::Sum {
                terms: (1..=k)
                    .map(|l| FieldKind::Scaled { factor: 1.0 / (s * l as f64), field: Box::new(members[l - 1].field.clone()) })
                    .collect(),
            }
        })
        .collect();
    Ok(CapacitySequence { k: k_max, s_k: CapacitySequence::harmonic(k_max), eps_schedule, members, psi })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn point_cutoff_plateaus() {
        let c = point_cutoff(1, 0.1, 2.0).unwrap();
        assert_eq!(c.eval(&[0.05]), 0.0);
        assert_eq!(c.eval(&[1.0]), 1.0);
        assert_eq!(c.eval(&[2.5]), 0.0);
        assert!(point_cutoff(1, 0.6, 2.0).is_err());
    }

    #[test]
    fn tube_cutoff_support() {
        let set = CompactSet::point(vec![0.0]).unwrap();
        let eps = 0.1;
        assert_eq!(tube_cutoff_value(&set, eps, &[0.05]), 0.0);
        assert_eq!(tube_cutoff_value(&set, eps, &[0.4]), 1.0);
        let mid = tube_cutoff_value(&set, eps, &[0.2]);
        assert!(mid > 0.0 && mid < 1.0);
        // n = 1: covered mass is the bump over t < (2 eps - d) / eps
        let d = 0.23;
        let lo = (2.0 * eps - d) / eps;
        let tol = quad::Tolerance::new(1e-300, 1e-14);
        let direct = quad::integrate(bump, -1.0, lo, tol).value / quad::integrate(bump, -1.0, 1.0, tol).value;
        let v = tube_cutoff_value(&set, eps, &[d]);
        assert!((v - (1.0 - direct)).abs() < 1e-10, "{v} vs {}", 1.0 - direct);
    }

    #[test]
    fn schedule_and_harmonic_sums() {
        assert!((CapacitySequence::harmonic(3) - 11.0 / 6.0).abs() < 1e-15);
        let e = factorial_schedule(1.0, 8);
        for l in 1..=8 {
            for m in 1..=8 {
                if l != m {
                    let r = (e[l - 1] / e[m - 1]).min(e[m - 1] / e[l - 1]);
                    assert!(r <= (1.0 / l as f64).min(1.0 / m as f64) + 1e-15);
                }
            }
        }
    }
}
