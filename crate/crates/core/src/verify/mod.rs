//! Estimate ledgers: both sides of each inequality evaluated numerically,
//! with the implied constant inferred from the data.

use std::collections::BTreeMap;

use rand::Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{invalid, Error, Result};
use crate::fit;
use crate::mc;
use crate::sets::{CompactSet, SetVariant};

mod bootstrap;
mod capacity;
mod cutoff;
mod decay;
mod removability;
mod superharmonic;

pub use bootstrap::{bootstrap_exponents, BootstrapPlan};
pub use capacity::capacity_decay;
pub use cutoff::{verify_cutoff_bound, Probe};
pub use decay::{verify_phi0_decay, verify_truncation_convergence};
pub use removability::{removability_ledger, shell_mass, RemovabilityModel};
pub use superharmonic::{l_s_membership, superharmonic_check, weighted_finiteness};

/// Per-group constants must agree within this factor to count as stable.
pub const STABILITY_FACTOR: f64 = 3.0;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Regime {
    /// Decay exponent below the dimension.
    SubN,
    /// Decay exponent equal to the dimension (logarithmic correction).
    EqualNLog,
    SuperN,
}

impl Regime {
    pub fn classify(rho: f64, n: usize) -> Regime {
        let nf = n as f64;
        if (rho - nf).abs() < 1e-12 {
            Regime::EqualNLog
        } else if rho < nf {
            Regime::SubN
        } else {
            Regime::SuperN
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DecayFit {
    pub slope: f64,
    pub intercept: f64,
    pub r_squared: f64,
    pub regime: Option<Regime>,
    pub window: (f64, f64),
}

/// Least-squares slope of `ln |value|` against `ln |x|`, optionally after
/// dividing by `ln(2 + |x|)`.
pub fn decay_fit(points: &[(f64, f64)], log_correction: bool) -> Result<DecayFit> {
    if points.len() < 8 {
        return invalid("decay fits need at least 8 points");
    }
    if points.iter().any(|&(r, v)| !(r > 0.0 && v > 0.0 && v.is_finite())) {
        return invalid("decay fits need positive radii and values");
    }
    let lo = points.iter().map(|p| p.0).fold(f64::INFINITY, f64::min);
    let hi = points.iter().map(|p| p.0).fold(0.0, f64::max);
    if hi < 10.0 * lo * (1.0 - 1e-12) {
        return invalid("decay fits need at least one decade of radii");
    }
    let x: Vec<f64> = points.iter().map(|p| p.0).collect();
    let y: Vec<f64> = points.iter().map(|&(r, v)| if log_correction { v / (2.0 + r).ln() } else { v }).collect();
    let f = fit::log_log(&x, &y);
    if f.r_squared < 0.9 {
        return Err(Error::FitUnstable { r_squared: f.r_squared });
    }
    Ok(DecayFit { slope: f.slope, intercept: f.intercept, r_squared: f.r_squared, regime: None, window: (lo, hi) })
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LedgerSample {
    /// Named inputs of this row (`eps`, `x`, `d`, `k`, ...).
    pub input: BTreeMap<String, f64>,
    /// Sweep value the row belongs to; constants are compared across groups.
    pub group: f64,
    pub lhs: f64,
    pub lhs_error: f64,
    pub rhs: f64,
    /// `rhs - lhs` with unit constant.
    pub margin: f64,
}

impl LedgerSample {
    pub fn new(input: &[(&str, f64)], group: f64, lhs: f64, lhs_error: f64, rhs: f64) -> Self {
        Self {
            input: input.iter().map(|(k, v)| (k.to_string(), *v)).collect(),
            group,
            lhs,
            lhs_error,
            rhs,
            margin: rhs - lhs,
        }
    }

    /// `lhs / rhs`, with `0 / 0 = 0`.
    pub fn ratio(&self) -> f64 {
        if self.lhs == 0.0 {
            0.0
        } else {
            self.lhs / self.rhs
        }
    }
}

/// A side condition of a ledger other than the constant itself.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Check {
    pub name: String,
    pub value: f64,
    pub target: f64,
    pub tolerance: f64,
    pub pass: bool,
}

impl Check {
    /// `|value - target| <= tolerance`.
    pub fn near(name: &str, value: f64, target: f64, tolerance: f64) -> Self {
        Self { name: name.into(), value, target, tolerance, pass: (value - target).abs() <= tolerance }
    }

    /// `value <= target + tolerance`.
    pub fn at_most(name: &str, value: f64, target: f64, tolerance: f64) -> Self {
        Self { name: name.into(), value, target, tolerance, pass: value <= target + tolerance }
    }

    /// `value >= target - tolerance`.
    pub fn at_least(name: &str, value: f64, target: f64, tolerance: f64) -> Self {
        Self { name: name.into(), value, target, tolerance, pass: value >= target - tolerance }
    }

    pub fn flag(name: &str, pass: bool) -> Self {
        let v = if pass { 1.0 } else { 0.0 };
        Self { name: name.into(), value: v, target: 1.0, tolerance: 0.0, pass }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LedgerReport {
    pub inequality_id: String,
    pub samples: Vec<LedgerSample>,
    /// Smallest `C` with `lhs <= C rhs` on every row; `None` when unbounded.
    pub inferred_constant: Option<f64>,
    /// `(group, constant)` pairs in sweep order.
    pub group_constants: Vec<(f64, f64)>,
    pub stable: bool,
    pub checks: Vec<Check>,
    pub pass: bool,
}

impl LedgerReport {
    /// Infers the constant and its stability; `pass` also requires every check.
    pub fn assemble(inequality_id: &str, samples: Vec<LedgerSample>, checks: Vec<Check>) -> Self {
        let mut groups: Vec<(f64, f64)> = Vec::new();
        let mut finite = true;
        for s in &samples {
            let r = s.ratio();
            if !r.is_finite() {
                finite = false;
            }
            match groups.iter_mut().find(|g| g.0 == s.group) {
                Some(g) => g.1 = g.1.max(r),
                None => groups.push((s.group, r)),
            }
        }
        let c = groups.iter().map(|g| g.1).fold(0.0, f64::max);
        let positive: Vec<f64> = groups.iter().map(|g| g.1).filter(|v| *v > 0.0).collect();
        let lo = positive.iter().cloned().fold(f64::INFINITY, f64::min);
        let stable = finite
            && (positive.is_empty() || (positive.len() == groups.len() && c <= STABILITY_FACTOR * lo));
        let inferred_constant = (finite && c.is_finite()).then_some(c);
        let pass = inferred_constant.is_some() && stable && checks.iter().all(|c| c.pass);
        Self { inequality_id: inequality_id.into(), samples, inferred_constant, group_constants: groups, stable, checks, pass }
    }

    /// Comma-separated sample table with a header row.
    pub fn samples_csv(&self) -> String {
        let keys: Vec<String> = {
            let mut k: Vec<String> = self.samples.iter().flat_map(|s| s.input.keys().cloned()).collect();
            k.sort();
            k.dedup();
            k
        };
        let mut out = String::new();
        for k in &keys {
            out.push_str(k);
            out.push(',');
        }
        out.push_str("group,lhs,lhs_error,rhs,margin\n");
        for s in &self.samples {
            for k in &keys {
                if let Some(v) = s.input.get(k) {
                    out.push_str(&format!("{v:e}"));
                }
                out.push(',');
            }
            out.push_str(&format!("{:e},{:e},{:e},{:e},{:e}\n", s.group, s.lhs, s.lhs_error, s.rhs, s.margin));
        }
        out
    }
}

/// Maps `f` over `items` on `workers` threads, keeping input order.
pub(crate) fn par_map<T: Sync, U: Send>(workers: usize, items: &[T], f: impl Fn(&T) -> U + Sync + Send) -> Vec<U> {
    mc::with_workers(workers, || items.par_iter().map(&f).collect())
}

/// A point at distance `d` from the set, placed along a fixed probe ray.
pub fn probe_point(set: &CompactSet, d: f64) -> Result<Vec<f64>> {
    let n = set.dim;
    let unit = |i: usize| {
        let mut e = vec![0.0; n];
        e[i % n] = 1.0;
        e
    };
    let shift = |base: &[f64], dir: &[f64], t: f64| -> Vec<f64> { base.iter().zip(dir).map(|(b, v)| b + t * v).collect() };
    let candidates: Vec<Vec<f64>> = match &set.variant {
        SetVariant::FinitePoints { points } => {
            let p = &points[0];
            (0..n).flat_map(|i| [shift(p, &unit(i), d), shift(p, &unit(i), -d)]).collect()
        }
        SetVariant::Segment { a, b } => {
            let mid: Vec<f64> = a.iter().zip(b).map(|(x, y)| 0.5 * (x + y)).collect();
            let dir: Vec<f64> = b.iter().zip(a).map(|(x, y)| x - y).collect();
            perpendiculars(&dir).into_iter().map(|w| shift(&mid, &w, d)).collect()
        }
        SetVariant::Polyline { vertices } => {
            let mid: Vec<f64> = vertices[0].iter().zip(&vertices[1]).map(|(x, y)| 0.5 * (x + y)).collect();
            let dir: Vec<f64> = vertices[1].iter().zip(&vertices[0]).map(|(x, y)| x - y).collect();
            perpendiculars(&dir).into_iter().flat_map(|w| [shift(&mid, &w, d), shift(&mid, &w, -d)]).collect()
        }
        SetVariant::CircleInR3 { center, radius, .. } => {
            // outward from a point of the circle, in its plane
            let dir = perpendicular_in_plane(set);
            vec![shift(center, &dir, radius + d)]
        }
        SetVariant::Sphere { center, radius } => vec![shift(center, &unit(0), radius + d)],
        SetVariant::ProductCantor { .. } => {
            let mut x = vec![0.0; n];
            x[0] = 1.0 + d;
            vec![x]
        }
    };
    candidates
        .into_iter()
        .find(|x| (set.distance(x) - d).abs() <= 1e-9 * d.max(1e-300))
        .ok_or_else(|| Error::InvalidParameter(format!("no probe point at distance {d} from the set")))
}

/// Unit vectors orthogonal to `dir` (Gram-Schmidt on the coordinate axes).
fn perpendiculars(dir: &[f64]) -> Vec<Vec<f64>> {
    let n = dir.len();
    let dn = dir.iter().map(|v| v * v).sum::<f64>().sqrt();
    let u: Vec<f64> = dir.iter().map(|v| v / dn).collect();
    let mut out = Vec::new();
    for i in 0..n {
        let mut e = vec![0.0; n];
        e[i] = 1.0;
        let dot = e.iter().zip(&u).map(|(a, b)| a * b).sum::<f64>();
        let w: Vec<f64> = e.iter().zip(&u).map(|(a, b)| a - dot * b).collect();
        let wn = w.iter().map(|v| v * v).sum::<f64>().sqrt();
        if wn > 0.5 {
            out.push(w.iter().map(|v| v / wn).collect());
        }
    }
    out
}

fn perpendicular_in_plane(set: &CompactSet) -> Vec<f64> {
    match &set.variant {
        SetVariant::CircleInR3 { normal, .. } => perpendiculars(normal).into_iter().next().unwrap_or(vec![1.0, 0.0, 0.0]),
        _ => vec![1.0; set.dim],
    }
}

/// `count` points uniform in the ball of radius `radius`, from `seed`.
pub fn sample_ball_points(n: usize, radius: f64, count: usize, seed: u64) -> Vec<Vec<f64>> {
    let mut rng = mc::chunk_rng(seed, 0);
    (0..count)
        .map(|_| {
            let w = mc::unit_vector(&mut rng, n);
            let r = radius * rng.random::<f64>().powf(1.0 / n as f64);
            w.iter().map(|v| v * r).collect()
        })
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn exact_power_data_recovers_slope() {
        let pts: Vec<(f64, f64)> = (0..10).map(|i| 10f64.powf(1.0 + i as f64 / 9.0)).map(|r| (r, 2.0 * r.powf(-1.8))).collect();
        let f = decay_fit(&pts, false).unwrap();
        assert!((f.slope + 1.8).abs() < 1e-10);
        let flat: Vec<(f64, f64)> = pts.iter().map(|p| (p.0, 3.0)).collect();
        assert!(decay_fit(&flat, false).unwrap().slope.abs() < 1e-12);
        assert!(decay_fit(&pts[..5], false).is_err());
    }

    #[test]
    fn constants_and_stability() {
        let rows = vec![
            LedgerSample::new(&[("eps", 0.1)], 0.1, 2.0, 0.0, 1.0),
            LedgerSample::new(&[("eps", 0.1)], 0.1, 1.0, 0.0, 1.0),
            LedgerSample::new(&[("eps", 0.05)], 0.05, 5.0, 0.0, 1.0),
        ];
        let r = LedgerReport::assemble("test", rows.clone(), vec![]);
        assert_eq!(r.inferred_constant, Some(5.0));
        assert!(r.stable && r.pass);
        let mut rows = rows;
        rows[2].lhs = 7.0;
        assert!(!LedgerReport::assemble("test", rows, vec![]).stable);
    }

    #[test]
    fn probes_sit_at_the_requested_distance() {
        let circle = CompactSet::new(3, SetVariant::CircleInR3 { center: [0.0; 3], radius: 1.0, normal: [0.0, 0.0, 1.0] }).unwrap();
        let seg = CompactSet::new(3, SetVariant::Segment { a: vec![0.0; 3], b: vec![1.0, 0.0, 0.0] }).unwrap();
        let pt = CompactSet::point(vec![0.0]).unwrap();
        for set in [circle, seg, pt] {
            for d in [1e-3, 0.1, 0.7] {
                let x = probe_point(&set, d).unwrap();
                assert!((set.distance(&x) - d).abs() < 1e-12);
            }
        }
    }
}
