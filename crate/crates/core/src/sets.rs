//! Compact sets with exact distance oracles and tube measurements.

use std::collections::HashSet;

use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::error::{invalid, Error, Result};
use crate::fit;
use crate::mc::{self, McSpec};
use crate::series::{jet_norm, Jet};

/// Two candidate minimizers closer than this in distance count as a tie.
pub const MULTIPLICITY_TOL: f64 = 1e-9;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "variant", rename_all = "snake_case")]
pub enum SetVariant {
    FinitePoints { points: Vec<Vec<f64>> },
    Segment { a: Vec<f64>, b: Vec<f64> },
    Polyline { vertices: Vec<Vec<f64>> },
    /// Circle in R^3 with the given center, radius and plane normal.
    CircleInR3 { center: [f64; 3], radius: f64, normal: [f64; 3] },
    Sphere { center: Vec<f64>, radius: f64 },
    /// Endpoints of the level-`levels` intervals of the middle-`ratio`
    /// Cantor construction on [0, 1], raised to the power `factors` in the
    /// first coordinates.
    ProductCantor { ratio: f64, levels: u32, factors: usize },
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(try_from = "SetSpec", into = "SetSpec")]
pub struct CompactSet {
    pub dim: usize,
    pub variant: SetVariant,
    pub diam: f64,
    // sorted 1-D Cantor points, or an in-plane basis for the circle
    cache: Vec<f64>,
}

/// Config form of a set: `{"dim": n, "variant": ..., params}`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SetSpec {
    pub dim: usize,
    #[serde(flatten)]
    pub variant: SetVariant,
}

impl TryFrom<SetSpec> for CompactSet {
    type Error = Error;
    fn try_from(s: SetSpec) -> Result<Self> {
        CompactSet::new(s.dim, s.variant)
    }
}

impl From<CompactSet> for SetSpec {
    fn from(s: CompactSet) -> Self {
        SetSpec { dim: s.dim, variant: s.variant }
    }
}

impl PartialEq for CompactSet {
    fn eq(&self, other: &Self) -> bool {
        self.dim == other.dim && self.variant == other.variant
    }
}

fn norm(v: &[f64]) -> f64 {
    v.iter().map(|a| a * a).sum::<f64>().sqrt()
}

fn dist(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| (x - y) * (x - y)).sum::<f64>().sqrt()
}

fn project_segment(x: &[f64], a: &[f64], b: &[f64]) -> Vec<f64> {
    let d: Vec<f64> = b.iter().zip(a).map(|(p, q)| p - q).collect();
    let dd: f64 = d.iter().map(|v| v * v).sum();
    let t = if dd == 0.0 {
        0.0
    } else {
        (x.iter().zip(a).zip(&d).map(|((xi, ai), di)| (xi - ai) * di).sum::<f64>() / dd).clamp(0.0, 1.0)
    };
    a.iter().zip(&d).map(|(ai, di)| ai + t * di).collect()
}

fn cantor_points(ratio: f64, levels: u32) -> Vec<f64> {
    let mut iv = vec![(0.0f64, 1.0f64)];
    for _ in 0..levels {
        let mut next = Vec::with_capacity(iv.len() * 2);
        for (a, l) in iv {
            let c = l * ratio;
            next.push((a, c));
            next.push((a + l - c, c));
        }
        iv = next;
    }
    let mut pts: Vec<f64> = iv.iter().flat_map(|&(a, l)| [a, a + l]).collect();
    pts.sort_by(f64::total_cmp);
    pts
}

/// Nearest points of a sorted list to `v`: (point, distance, tied).
fn nearest_sorted(pts: &[f64], v: f64) -> (f64, f64, bool) {
    let i = pts.partition_point(|&p| p < v);
    let mut cands: Vec<f64> = Vec::with_capacity(2);
    if i < pts.len() {
        cands.push(pts[i]);
    }
    if i > 0 {
        cands.push(pts[i - 1]);
    }
    let mut best = cands[0];
    for &c in &cands[1..] {
        if (c - v).abs() < (best - v).abs() {
            best = c;
        }
    }
    let d = (best - v).abs();
    let tied = cands.iter().any(|&c| c != best && ((c - v).abs() - d).abs() < MULTIPLICITY_TOL);
    (best, d, tied)
}

fn circle_basis(normal: &[f64; 3]) -> [f64; 9] {
    let nn = norm(normal);
    let n = [normal[0] / nn, normal[1] / nn, normal[2] / nn];
    let helper = if n[0].abs() < 0.9 { [1.0, 0.0, 0.0] } else { [0.0, 1.0, 0.0] };
    let dot = helper[0] * n[0] + helper[1] * n[1] + helper[2] * n[2];
    let mut u = [helper[0] - dot * n[0], helper[1] - dot * n[1], helper[2] - dot * n[2]];
    let un = norm(&u);
    u.iter_mut().for_each(|v| *v /= un);
    let w = [n[1] * u[2] - n[2] * u[1], n[2] * u[0] - n[0] * u[2], n[0] * u[1] - n[1] * u[0]];
    [n[0], n[1], n[2], u[0], u[1], u[2], w[0], w[1], w[2]]
}

impl CompactSet {
    pub fn new(dim: usize, variant: SetVariant) -> Result<Self> {
        if dim == 0 {
            return invalid("dimension must be positive");
        }
        let check = |p: &[f64]| -> Result<()> {
            if p.len() != dim || p.iter().any(|v| !v.is_finite()) {
                invalid(format!("point {p:?} is not a finite vector in R^{dim}"))
            } else {
                Ok(())
            }
        };
        let mut cache = Vec::new();
        let diam = match &variant {
            SetVariant::FinitePoints { points } => {
                if points.is_empty() {
                    return invalid("point set must be nonempty");
                }
                points.iter().try_for_each(|p| check(p))?;
                let mut d: f64 = 0.0;
                for (i, p) in points.iter().enumerate() {
                    for q in &points[i + 1..] {
                        d = d.max(dist(p, q));
                    }
                }
                d
            }
            SetVariant::Segment { a, b } => {
                check(a)?;
                check(b)?;
                dist(a, b)
            }
            SetVariant::Polyline { vertices } => {
                if vertices.len() < 2 {
                    return invalid("polyline needs at least two vertices");
                }
                vertices.iter().try_for_each(|p| check(p))?;
                let mut d: f64 = 0.0;
                for (i, p) in vertices.iter().enumerate() {
                    for q in &vertices[i + 1..] {
                        d = d.max(dist(p, q));
                    }
                }
                d
            }
            SetVariant::CircleInR3 { center, radius, normal } => {
                if dim != 3 {
                    return invalid("circle variant lives in R^3");
                }
                if !(*radius > 0.0) || norm(normal) == 0.0 || center.iter().any(|v| !v.is_finite()) {
                    return invalid("circle needs positive radius and nonzero normal");
                }
                cache = circle_basis(normal).to_vec();
                2.0 * radius
            }
            SetVariant::Sphere { center, radius } => {
                check(center)?;
                if !(*radius > 0.0) {
                    return invalid("sphere radius must be positive");
                }
                2.0 * radius
            }
            SetVariant::ProductCantor { ratio, levels, factors } => {
                if !(*ratio > 0.0 && *ratio < 0.5) || *factors == 0 || *factors > dim || *levels > 24 {
                    return invalid("cantor set needs ratio in (0, 1/2), 1 <= factors <= dim, levels <= 24");
                }
                cache = cantor_points(*ratio, *levels);
                (*factors as f64).sqrt()
            }
        };
        Ok(Self { dim, variant, diam, cache })
    }

    pub fn point(x: Vec<f64>) -> Result<Self> {
        let dim = x.len();
        Self::new(dim, SetVariant::FinitePoints { points: vec![x] })
    }

    /// Dimension of the set when it is a smooth manifold (with boundary).
    pub fn manifold_dim(&self) -> Option<usize> {
        match &self.variant {
            SetVariant::FinitePoints { .. } => Some(0),
            SetVariant::Segment { .. } | SetVariant::Polyline { .. } | SetVariant::CircleInR3 { .. } => Some(1),
            SetVariant::Sphere { .. } => Some(self.dim - 1),
            SetVariant::ProductCantor { .. } => None,
        }
    }

    /// Reach of the set (infinite for convex sets).
    pub fn reach(&self) -> f64 {
        match &self.variant {
            SetVariant::FinitePoints { points } => {
                if points.len() == 1 {
                    f64::INFINITY
                } else {
                    self.diam_min_pair(points) / 2.0
                }
            }
            SetVariant::Segment { .. } => f64::INFINITY,
            SetVariant::Polyline { vertices } => {
                if vertices.len() == 2 {
                    f64::INFINITY
                } else {
                    0.0
                }
            }
            SetVariant::CircleInR3 { radius, .. } | SetVariant::Sphere { radius, .. } => *radius,
            SetVariant::ProductCantor { .. } => {
                let gaps = self.cache.windows(2).map(|w| w[1] - w[0]).fold(f64::INFINITY, f64::min);
                gaps / 2.0
            }
        }
    }

    fn diam_min_pair(&self, points: &[Vec<f64>]) -> f64 {
        let mut d = f64::INFINITY;
        for (i, p) in points.iter().enumerate() {
            for q in &points[i + 1..] {
                d = d.min(dist(p, q));
            }
        }
        d
    }

    /// Nearest point of the set and whether the minimizer is non-unique.
    fn nearest_any(&self, x: &[f64]) -> (Vec<f64>, f64, bool) {
        assert_eq!(x.len(), self.dim, "point dimension mismatch");
        match &self.variant {
            SetVariant::FinitePoints { points } => {
                let ds: Vec<f64> = points.iter().map(|p| dist(p, x)).collect();
                let (i, &d) = ds.iter().enumerate().min_by(|a, b| a.1.total_cmp(b.1)).unwrap();
                let tied = ds
                    .iter()
                    .enumerate()
                    .any(|(j, &e)| j != i && (e - d).abs() < MULTIPLICITY_TOL && dist(&points[j], &points[i]) > MULTIPLICITY_TOL);
                (points[i].clone(), d, tied)
            }
            SetVariant::Segment { a, b } => {
                let p = project_segment(x, a, b);
                let d = dist(&p, x);
                (p, d, false)
            }
            SetVariant::Polyline { vertices } => {
                let cands: Vec<(Vec<f64>, f64)> = vertices
                    .windows(2)
                    .map(|w| {
                        let p = project_segment(x, &w[0], &w[1]);
                        let d = dist(&p, x);
                        (p, d)
                    })
                    .collect();
                let best = cands.iter().min_by(|a, b| a.1.total_cmp(&b.1)).unwrap().clone();
                let tied = cands
                    .iter()
                    .any(|(p, d)| (d - best.1).abs() < MULTIPLICITY_TOL && dist(p, &best.0) > MULTIPLICITY_TOL);
                (best.0, best.1, tied)
            }
            SetVariant::CircleInR3 { center, radius, .. } => {
                let b = &self.cache;
                let w = [x[0] - center[0], x[1] - center[1], x[2] - center[2]];
                let z = w[0] * b[0] + w[1] * b[1] + w[2] * b[2];
                let pu = w[0] * b[3] + w[1] * b[4] + w[2] * b[5];
                let pw = w[0] * b[6] + w[1] * b[7] + w[2] * b[8];
                let rho = pu.hypot(pw);
                let d = (rho - radius).hypot(z);
                let (cu, cw) = if rho > 0.0 { (pu / rho, pw / rho) } else { (1.0, 0.0) };
                let p = (0..3).map(|i| center[i] + radius * (cu * b[3 + i] + cw * b[6 + i])).collect();
                (p, d, rho < MULTIPLICITY_TOL)
            }
            SetVariant::Sphere { center, radius } => {
                let w: Vec<f64> = x.iter().zip(center).map(|(a, c)| a - c).collect();
                let r = norm(&w);
                let p = if r > 0.0 {
                    center.iter().zip(&w).map(|(c, v)| c + radius * v / r).collect()
                } else {
                    let mut p = center.clone();
                    p[0] += radius;
                    p
                };
                ((p), (r - radius).abs(), r < MULTIPLICITY_TOL)
            }
            SetVariant::ProductCantor { factors, .. } => {
                let mut p = vec![0.0; self.dim];
                let mut d2 = 0.0;
                let mut tied = false;
                for i in 0..self.dim {
                    if i < *factors {
                        let (q, d, t) = nearest_sorted(&self.cache, x[i]);
                        p[i] = q;
                        d2 += d * d;
                        tied |= t;
                    } else {
                        d2 += x[i] * x[i];
                    }
                }
                (p, d2.sqrt(), tied)
            }
        }
    }

    /// Exact Euclidean distance to the set.
    pub fn distance(&self, x: &[f64]) -> f64 {
        self.nearest_any(x).1
    }

    pub fn nearest_point(&self, x: &[f64]) -> Result<(Vec<f64>, bool)> {
        let (p, d, tied) = self.nearest_any(x);
        if d == 0.0 {
            return Err(Error::PointOnSet);
        }
        Ok((p, tied))
    }

    /// Unit gradient `(x - nearest) / d(x)`.
    pub fn distance_gradient(&self, x: &[f64]) -> Result<Vec<f64>> {
        let (p, d, tied) = self.nearest_any(x);
        if d == 0.0 {
            return Err(Error::PointOnSet);
        }
        if tied {
            return Err(Error::NotDifferentiable);
        }
        Ok(x.iter().zip(&p).map(|(a, b)| (a - b) / d).collect())
    }

    /// Points of the set such that every point of the set lies within
    /// `spacing / 2` of one of them.
    pub fn samples(&self, spacing: f64) -> Vec<Vec<f64>> {
        let along = |a: &[f64], b: &[f64]| -> Vec<Vec<f64>> {
            let m = (dist(a, b) / spacing).ceil().max(1.0) as usize;
            (0..=m)
                .map(|i| {
                    let t = i as f64 / m as f64;
                    a.iter().zip(b).map(|(p, q)| p + t * (q - p)).collect()
                })
                .collect()
        };
        match &self.variant {
            SetVariant::FinitePoints { points } => points.clone(),
            SetVariant::Segment { a, b } => along(a, b),
            SetVariant::Polyline { vertices } => vertices.windows(2).flat_map(|w| along(&w[0], &w[1])).collect(),
            SetVariant::CircleInR3 { center, radius, .. } => {
                let b = &self.cache;
                let m = (2.0 * std::f64::consts::PI * radius / spacing).ceil().max(8.0) as usize;
                (0..m)
                    .map(|i| {
                        let t = 2.0 * std::f64::consts::PI * i as f64 / m as f64;
                        (0..3).map(|k| center[k] + radius * (t.cos() * b[3 + k] + t.sin() * b[6 + k])).collect()
                    })
                    .collect()
            }
            SetVariant::Sphere { center, radius } => sphere_samples(center, *radius, spacing),
            SetVariant::ProductCantor { factors, .. } => {
                let pts = &self.cache;
                let mut out: Vec<Vec<f64>> = vec![vec![0.0; self.dim]];
                for i in 0..*factors {
                    out = out
                        .into_iter()
                        .flat_map(|p| {
                            pts.iter().map(move |&v| {
                                let mut q = p.clone();
                                q[i] = v;
                                q
                            })
                        })
                        .collect();
                }
                out
            }
        }
    }
}

/// Grid samples on a sphere, via the bounding cube projected radially.
fn sphere_samples(center: &[f64], radius: f64, spacing: f64) -> Vec<Vec<f64>> {
    let n = center.len();
    let m = (2.0 * radius / spacing).ceil().max(2.0) as i64 * 2;
    let mut out = Vec::new();
    // faces of the cube [-1,1]^n, projected to the sphere; projection is
    // 1-Lipschitz from the cube surface, so cube spacing bounds sphere spacing
    let mut idx = vec![0i64; n - 1];
    for face in 0..n {
        for sign in [-1.0, 1.0] {
            idx.iter_mut().for_each(|v| *v = 0);
            loop {
                let mut p = vec![0.0; n];
                let mut k = 0;
                for (j, pj) in p.iter_mut().enumerate() {
                    if j == face {
                        *pj = sign;
                    } else {
                        *pj = -1.0 + 2.0 * idx[k] as f64 / m as f64;
                        k += 1;
                    }
                }
                let r = norm(&p);
                out.push(center.iter().zip(&p).map(|(c, v)| c + radius * v / r).collect());
                let mut j = 0;
                while j < n - 1 {
                    idx[j] += 1;
                    if idx[j] <= m {
                        break;
                    }
                    idx[j] = 0;
                    j += 1;
                }
                if j == n - 1 || n == 1 {
                    break;
                }
            }
        }
    }
    out
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum TubeKind {
    Volume,
    BoundaryArea,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TubeMeasurement {
    pub r: f64,
    pub value: f64,
    pub ci_halfwidth: f64,
    pub kind: TubeKind,
    pub big_r: Option<f64>,
    pub center: Option<Vec<f64>>,
}

/// Cubes of side `cell` that may meet `{d < reach}`, restricted to cubes
/// that may meet `B(center, ball)` when a ball is given.
fn voxel_cover(set: &CompactSet, reach: f64, cell: f64, ball: Option<(&[f64], f64)>) -> Vec<Vec<i64>> {
    let n = set.dim;
    let half_diag = 0.5 * cell * (n as f64).sqrt();
    let spacing = cell;
    let samples = set.samples(spacing);
    let search = reach + half_diag + spacing / 2.0;
    let span = (search / cell).ceil() as i64 + 1;
    let mut seen: HashSet<Vec<i64>> = HashSet::new();
    let mut out = Vec::new();
    let mut off = vec![-span; n];
    for s in &samples {
        if let Some((c, rr)) = ball {
            if dist(s, c) > rr + search {
                continue;
            }
        }
        let base: Vec<i64> = s.iter().map(|v| (v / cell).floor() as i64).collect();
        off.iter_mut().for_each(|v| *v = -span);
        loop {
            let idx: Vec<i64> = base.iter().zip(&off).map(|(b, o)| b + o).collect();
            if !seen.contains(&idx) {
                let centre: Vec<f64> = idx.iter().map(|&i| (i as f64 + 0.5) * cell).collect();
                let near_set = set.distance(&centre) <= reach + half_diag;
                let in_ball = ball.is_none_or(|(c, rr)| dist(&centre, c) <= rr + half_diag);
                seen.insert(idx.clone());
                if near_set && in_ball {
                    out.push(idx);
                }
            }
            let mut j = 0;
            while j < n {
                off[j] += 1;
                if off[j] <= span {
                    break;
                }
                off[j] = -span;
                j += 1;
            }
            if j == n {
                break;
            }
        }
    }
    out.sort();
    out
}

/// MC estimate of the volume of `{y : pred(y)}` inside the voxel cover.
fn cover_volume(cells: &[Vec<i64>], cell: f64, mc: &McSpec, pred: impl Fn(&[f64]) -> bool + Sync) -> (f64, f64) {
    if cells.is_empty() {
        return (0.0, 0.0);
    }
    let n = cells[0].len();
    let total = cells.len() as f64 * cell.powi(n as i32);
    let m = mc::mean(mc, |rng| {
        let c = &cells[rng.random_range(0..cells.len())];
        let y: Vec<f64> = c.iter().map(|&i| (i as f64 + rng.random::<f64>()) * cell).collect();
        if pred(&y) {
            1.0
        } else {
            0.0
        }
    });
    (total * m.mean, total * m.ci95())
}

/// Lebesgue measure of the open tube `N_r`.
pub fn tube_volume(set: &CompactSet, r: f64, mc: &McSpec) -> Result<TubeMeasurement> {
    if !(r > 0.0) {
        return invalid("tube radius must be positive");
    }
    let cell = r / 2.0;
    let cells = voxel_cover(set, r, cell, None);
    let (value, ci) = cover_volume(&cells, cell, mc, |y| set.distance(y) < r);
    Ok(TubeMeasurement { r, value, ci_halfwidth: ci, kind: TubeKind::Volume, big_r: None, center: None })
}

/// `(n-1)`-measure of `dN_r` inside `B_R(center)` from the symmetric shell
/// `{r - h <= d < r + h}`, `h = r / 50`.
pub fn tube_boundary_area(set: &CompactSet, r: f64, big_r: f64, center: &[f64], mc: &McSpec) -> Result<TubeMeasurement> {
    if !(r > 0.0 && r < big_r) {
        return invalid("need 0 < r < R");
    }
    let singleton = matches!(&set.variant, SetVariant::FinitePoints { points } if points.len() == 1);
    if !singleton && big_r > set.diam * (1.0 + 1e-12) {
        return invalid(format!("R = {big_r} exceeds the diameter {}", set.diam));
    }
    let h = r / 50.0;
    let cell = (r + h) / 2.0;
    let cells = voxel_cover(set, r + h, cell, Some((center, big_r)));
    let (vol, ci) = cover_volume(&cells, cell, mc, |y| {
        let d = set.distance(y);
        d >= r - h && d < r + h && dist(y, center) < big_r
    });
    let value = vol / (2.0 * h);
    let ci = ci / (2.0 * h);
    if !(ci <= 0.5 * value) {
        return Err(Error::DegenerateShell { value, ci });
    }
    Ok(TubeMeasurement {
        r,
        value,
        ci_halfwidth: ci,
        kind: TubeKind::BoundaryArea,
        big_r: Some(big_r),
        center: Some(center.to_vec()),
    })
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ExponentFit {
    pub lambda_hat: f64,
    pub intercept: f64,
    pub r_squared: f64,
    pub window: (f64, f64),
}

/// Fits `log area = (n - 1 - lambda) log r + c` at fixed `R`.
pub fn fit_lambda(set: &CompactSet, radii: &[f64], big_r: f64, center: &[f64], mc: &McSpec) -> Result<(ExponentFit, Vec<TubeMeasurement>)> {
    if radii.len() < 5 {
        return invalid("need at least 5 radii");
    }
    let lo = radii.iter().cloned().fold(f64::INFINITY, f64::min);
    let hi = radii.iter().cloned().fold(0.0, f64::max);
    if hi / lo < 99.999 {
        return invalid("radii must span at least two decades");
    }
    let meas: Vec<TubeMeasurement> =
        radii.iter().map(|&r| tube_boundary_area(set, r, big_r, center, mc)).collect::<Result<_>>()?;
    let f = fit::log_log(radii, &meas.iter().map(|m| m.value).collect::<Vec<_>>());
    let out = ExponentFit {
        lambda_hat: (set.dim as f64 - 1.0) - f.slope,
        intercept: f.intercept,
        r_squared: f.r_squared,
        window: (lo, hi),
    };
    if f.r_squared < 0.9 {
        return Err(Error::FitUnstable { r_squared: f.r_squared });
    }
    Ok((out, meas))
}

/// Greedy cover of the set's samples inside `B_R(center)` by balls of radius `r`.
pub fn covering_number(set: &CompactSet, r: f64, big_r: f64, center: &[f64]) -> usize {
    let spacing = r / 4.0;
    let pts: Vec<Vec<f64>> = set.samples(spacing).into_iter().filter(|p| dist(p, center) <= big_r).collect();
    let mut centers: Vec<&Vec<f64>> = Vec::new();
    let tol = r * (1.0 + 1e-9);
    for p in &pts {
        if !centers.iter().any(|c| dist(c, p) <= tol) {
            centers.push(p);
        }
    }
    centers.len()
}

/// Covering exponent from `log M(r, R) ~ s log(R / r)`, maximized over up to
/// 8 centers spread along the set.
pub fn assouad_estimate(set: &CompactSet, scale_pairs: &[(f64, f64)]) -> Result<f64> {
    if scale_pairs.len() < 3 {
        return invalid("need at least 3 scale pairs");
    }
    for &(r, big_r) in scale_pairs {
        if !(r > 0.0 && r < big_r && big_r <= set.diam.max(big_r.min(1.0)) * (1.0 + 1e-12)) {
            return invalid(format!("scale pair ({r}, {big_r}) invalid"));
        }
    }
    let rmin = scale_pairs.iter().map(|p| p.0).fold(f64::INFINITY, f64::min);
    let all = set.samples(rmin);
    let stride = (all.len() / 8).max(1);
    let centers: Vec<&Vec<f64>> = all.iter().step_by(stride).take(8).collect();
    let x: Vec<f64> = scale_pairs.iter().map(|(r, rr)| (rr / r).ln()).collect();
    let mut best: Option<fit::LineFit> = None;
    for c in centers {
        let y: Vec<f64> = scale_pairs.iter().map(|&(r, rr)| (covering_number(set, r, rr, c) as f64).ln()).collect();
        let f = fit::line(&x, &y);
        if best.is_none_or(|b| f.slope > b.slope) {
            best = Some(f);
        }
    }
    let f = best.unwrap();
    if f.r_squared < 0.9 {
        return Err(Error::FitUnstable { r_squared: f.r_squared });
    }
    Ok(f.slope)
}

impl CompactSet {
    /// Taylor jet of the distance function, when `d` is smooth near the
    /// expansion point of `x`.
    pub fn distance_jet(&self, x: &[Jet]) -> Option<Jet> {
        let x0: Vec<f64> = x.iter().map(|j| j.value()).collect();
        let (p, d, tied) = self.nearest_any(&x0);
        if d == 0.0 || tied {
            return None;
        }
        let dist_to = |c: &[f64]| -> Jet {
            let diffs: Vec<Jet> = x.iter().zip(c).map(|(xi, ci)| xi.offset(-ci)).collect();
            jet_norm(&diffs)
        };
        match &self.variant {
            SetVariant::FinitePoints { .. } => Some(dist_to(&p)),
            SetVariant::Segment { a, b } => segment_jet(x, &x0, a, b),
            SetVariant::Polyline { vertices } => {
                let w = vertices.windows(2).find(|w| {
                    let q = project_segment(&x0, &w[0], &w[1]);
                    dist(&q, &p) < MULTIPLICITY_TOL
                })?;
                segment_jet(x, &x0, &w[0], &w[1])
            }
            SetVariant::CircleInR3 { center, radius, .. } => {
                let b = &self.cache;
                let w: Vec<Jet> = (0..3).map(|i| x[i].offset(-center[i])).collect();
                let comp = |k: usize| w[0].scale(b[k]).add(&w[1].scale(b[k + 1])).add(&w[2].scale(b[k + 2]));
                let z = comp(0);
                let rho = jet_norm(&[comp(3), comp(6)]);
                let dr = rho.offset(-radius);
                Some(jet_norm(&[dr, z]))
            }
            SetVariant::Sphere { center, radius } => {
                let r = dist_to(center);
                let d = r.offset(-radius);
                Some(if d.value() < 0.0 { d.scale(-1.0) } else { d })
            }
            SetVariant::ProductCantor { factors, .. } => {
                let mut sq = Jet::constant(self.dim, x[0].order(), 0.0);
                for (i, xi) in x.iter().enumerate() {
                    let t = if i < *factors { xi.offset(-p[i]) } else { xi.clone() };
                    sq = sq.add(&t.mul(&t));
                }
                Some(sq.map(|s| s.sqrt()))
            }
        }
    }
}

/// Distance jet to a segment away from the endpoint switching surfaces.
fn segment_jet(x: &[Jet], x0: &[f64], a: &[f64], b: &[f64]) -> Option<Jet> {
    let d: Vec<f64> = b.iter().zip(a).map(|(p, q)| p - q).collect();
    let len = norm(&d);
    let u: Vec<f64> = d.iter().map(|v| v / len).collect();
    let t0: f64 = x0.iter().zip(a).zip(&u).map(|((xi, ai), ui)| (xi - ai) * ui).sum();
    let w: Vec<Jet> = x.iter().zip(a).map(|(xi, ai)| xi.offset(-ai)).collect();
    if t0 <= 0.0 || t0 >= len {
        let c = if t0 <= 0.0 { a } else { b };
        let diffs: Vec<Jet> = x.iter().zip(c).map(|(xi, ci)| xi.offset(-ci)).collect();
        if (t0.abs() < 1e-12) || ((t0 - len).abs() < 1e-12) {
            return None;
        }
        return Some(jet_norm(&diffs));
    }
    let mut along = w[0].scale(u[0]);
    for (wi, ui) in w.iter().zip(&u).skip(1) {
        along = along.add(&wi.scale(*ui));
    }
    let mut sq = w[0].mul(&w[0]);
    for wi in &w[1..] {
        sq = sq.add(&wi.mul(wi));
    }
    Some(sq.sub(&along.mul(&along)).map(|s| s.sqrt()))
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;

    fn circle() -> CompactSet {
        CompactSet::new(3, SetVariant::CircleInR3 { center: [0.0; 3], radius: 1.0, normal: [0.0, 0.0, 1.0] }).unwrap()
    }

    #[test]
    fn closed_form_distances() {
        let p = CompactSet::point(vec![0.0; 3]).unwrap();
        assert_eq!(p.distance(&[0.0, 0.0, 2.0]), 2.0);
        assert_relative_eq!(circle().distance(&[0.0, 0.0, 1.0]), 2f64.sqrt(), epsilon = 1e-15);
        let s = CompactSet::new(3, SetVariant::Segment { a: vec![0.0; 3], b: vec![1.0, 0.0, 0.0] }).unwrap();
        assert_relative_eq!(s.distance(&[2.0, 1.0, 0.0]), 2f64.sqrt(), epsilon = 1e-15);
        assert_eq!(s.distance_gradient(&[0.5, 3.0, 0.0]).unwrap(), vec![0.0, 1.0, 0.0]);
    }

    #[test]
    fn nearest_points_and_ties() {
        let two = CompactSet::new(2, SetVariant::FinitePoints { points: vec![vec![-1.0, 0.0], vec![1.0, 0.0]] }).unwrap();
        assert!(two.nearest_point(&[0.0, 1.0]).unwrap().1);
        let (p, tied) = circle().nearest_point(&[2.0, 0.0, 0.0]).unwrap();
        assert!(!tied);
        assert_relative_eq!(p[0], 1.0, epsilon = 1e-15);
        assert!(circle().nearest_point(&[0.0, 0.0, 0.5]).unwrap().1);
        assert_eq!(two.nearest_point(&[1.0, 0.0]), Err(Error::PointOnSet));
    }

    #[test]
    fn cantor_construction() {
        let c = CompactSet::new(1, SetVariant::ProductCantor { ratio: 1.0 / 3.0, levels: 2, factors: 1 }).unwrap();
        assert_eq!(c.samples(1.0).len(), 8);
        assert_relative_eq!(c.distance(&[0.5]), 0.5 - 1.0 / 3.0, epsilon = 1e-15);
    }

    #[test]
    fn point_tube_volume() {
        let p = CompactSet::point(vec![0.0; 3]).unwrap();
        let m = tube_volume(&p, 1.0, &McSpec { samples: 200_000, seed: 1, workers: 0 }).unwrap();
        let exact = 4.0 * std::f64::consts::PI / 3.0;
        assert!((m.value - exact).abs() < m.ci_halfwidth * 1.5, "{m:?}");
    }
}
