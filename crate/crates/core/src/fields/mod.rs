//! Closed-form scalar fields on R^n.

mod norm;
pub mod profile;

use serde::{Deserialize, Serialize};

use crate::error::{invalid, Error, Result};
use crate::series::Jet;
use crate::sets::{CompactSet, SetVariant};

pub use norm::{weighted_integral, weighted_l1_norm, WeightedNormResult};
pub use profile::{ramp, Profile};

/// Highest derivative order served analytically.
pub const ORDER_CAP: usize = 8;

/// Catalog of fields. Radial kinds are functions of `|x|`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", content = "params", rename_all = "snake_case")]
pub enum FieldKind {
    Constant { c: f64 },
    /// `|x|^{-alpha}`.
    PowerLaw { alpha: f64 },
    /// `(1 + |x|^2)^{-rho/2}`.
    ShiftedPower { rho: f64 },
    /// `(1 + |x|^2)^{-(n - 2 sigma)/2}`.
    Bubble { sigma: f64 },
    /// `exp(-|x|^2 / 2)`.
    Gaussian,
    BallIndicator { radius: f64 },
    /// 1 on `|x| <= inner`, 0 on `|x| >= outer`.
    MollifiedIndicator { inner: f64, outer: f64 },
    /// `sum_k coeffs[k] |x|^{2k}`.
    Polynomial { coeffs: Vec<f64> },
    RadialProfile { profile: Profile },
    /// `profile(d(x))` for the distance `d` to a set.
    DistanceProfile { set: CompactSet, profile: Profile },
    /// `1 - (rho_eps * 1_{N_{2 eps}})(x)`.
    TubeCutoff { set: CompactSet, eps: f64 },
    Scaled { factor: f64, field: Box<FieldKind> },
    /// `field(x / scale)`.
    Dilated { scale: f64, field: Box<FieldKind> },
    Sum { terms: Vec<FieldKind> },
    Product { factors: Vec<FieldKind> },
    /// `(-Delta)^k field`.
    NegLaplacian { k: usize, field: Box<FieldKind> },
    /// `c_{n,gamma} int |x - y|^{2 gamma - n} density(y) dy` for radial densities.
    RieszPotential { density: Box<FieldKind>, gamma: f64 },
    /// `(-Delta)^sigma base`, evaluated spectrally.
    Spectral { base: Box<FieldKind>, sigma: f64 },
}

/// Far-field behaviour.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Decay {
    /// `|f(x)| <~ |x|^{-rho}`; negative `rho` means growth.
    Power(f64),
    /// Faster than any power (including compact support).
    Rapid,
}

impl Decay {
    fn min(self, o: Decay) -> Decay {
        match (self, o) {
            (Decay::Rapid, d) | (d, Decay::Rapid) => d,
            (Decay::Power(a), Decay::Power(b)) => Decay::Power(a.min(b)),
        }
    }

    fn plus(self, o: Decay) -> Decay {
        match (self, o) {
            (Decay::Power(a), Decay::Power(b)) => Decay::Power(a + b),
            _ => Decay::Rapid,
        }
    }
}

fn norm2(x: &[f64]) -> f64 {
    x.iter().map(|v| v * v).sum()
}

fn radial_jet(x: &[Jet]) -> Jet {
    let mut s = x[0].mul(&x[0]);
    for xi in &x[1..] {
        s = s.add(&xi.mul(xi));
    }
    s
}

impl FieldKind {
    pub fn constant(c: f64) -> Self {
        FieldKind::Constant { c }
    }

    pub fn scaled(self, factor: f64) -> Self {
        FieldKind::Scaled { factor, field: Box::new(self) }
    }

    pub fn dilated(self, scale: f64) -> Self {
        FieldKind::Dilated { scale, field: Box::new(self) }
    }

    /// Pointwise value; may be infinite or NaN on the singular set.
    pub fn eval(&self, x: &[f64]) -> f64 {
        let n = x.len() as f64;
        match self {
            FieldKind::Constant { c } => *c,
            FieldKind::PowerLaw { alpha } => norm2(x).powf(-alpha / 2.0),
            FieldKind::ShiftedPower { rho } => (1.0 + norm2(x)).powf(-rho / 2.0),
            FieldKind::Bubble { sigma } => (1.0 + norm2(x)).powf(-(n - 2.0 * sigma) / 2.0),
            FieldKind::Gaussian => (-0.5 * norm2(x)).exp(),
            FieldKind::BallIndicator { radius } => {
                if norm2(x).sqrt() <= *radius {
                    1.0
                } else {
                    0.0
                }
            }
            FieldKind::MollifiedIndicator { inner, outer } => {
                Profile::RampDown { inner: *inner, outer: *outer }.eval(norm2(x).sqrt())
            }
            FieldKind::Polynomial { coeffs } => {
                let t = norm2(x);
                coeffs.iter().rev().fold(0.0, |acc, c| acc * t + c)
            }
            FieldKind::RadialProfile { profile } => profile.eval(norm2(x).sqrt()),
            FieldKind::DistanceProfile { set, profile } => profile.eval(set.distance(x)),
            FieldKind::TubeCutoff { set, eps } => crate::cutoffs::tube_cutoff_value(set, *eps, x),
            FieldKind::Scaled { factor, field } => factor * field.eval(x),
            FieldKind::Dilated { scale, field } => {
                let y: Vec<f64> = x.iter().map(|v| v / scale).collect();
                field.eval(&y)
            }
            FieldKind::Sum { terms } => terms.iter().map(|t| t.eval(x)).sum(),
            FieldKind::Product { factors } => factors.iter().map(|t| t.eval(x)).product(),
            FieldKind::NegLaplacian { k, field } => {
                let jets = Jet::point(x, 2 * k);
                match field.jet(&jets) {
                    Some(j) => j.neg_laplacian_power(*k).unwrap_or(f64::NAN),
                    None => f64::NAN,
                }
            }
            FieldKind::RieszPotential { density, gamma } => {
                crate::fraclap::riesz::radial_potential(density, *gamma, x.len(), norm2(x).sqrt())
                    .map(|e| e.value)
                    .unwrap_or(f64::NAN)
            }
            FieldKind::Spectral { base, sigma } => {
                crate::fraclap::oracle::spectral_value(base, *sigma, x.len(), norm2(x).sqrt()).unwrap_or(f64::NAN)
            }
        }
    }

    /// Taylor jet at the expansion point of `x`, for kinds with analytic
    /// derivatives that are smooth there.
    pub fn jet(&self, x: &[Jet]) -> Option<Jet> {
        let n = x.len();
        let order = x[0].order();
        let x0: Vec<f64> = x.iter().map(|j| j.value()).collect();
        let r0 = norm2(&x0).sqrt();
        let constant = |v: f64| Some(Jet::constant(n, order, v));
        match self {
            FieldKind::Constant { c } => constant(*c),
            FieldKind::PowerLaw { alpha } => {
                if r0 == 0.0 {
                    return None;
                }
                let a = -alpha / 2.0;
                Some(radial_jet(x).map(|s| s.powf(a)))
            }
            FieldKind::ShiftedPower { rho } => Some(radial_jet(x).offset(1.0).map(|s| s.powf(-rho / 2.0))),
            FieldKind::Bubble { sigma } => {
                let e = -(n as f64 - 2.0 * sigma) / 2.0;
                Some(radial_jet(x).offset(1.0).map(|s| s.powf(e)))
            }
            FieldKind::Gaussian => Some(radial_jet(x).scale(-0.5).map(|s| s.exp())),
            FieldKind::BallIndicator { radius } => {
                if r0 == *radius {
                    None
                } else {
                    constant(if r0 < *radius { 1.0 } else { 0.0 })
                }
            }
            FieldKind::MollifiedIndicator { inner, outer } => {
                Self::radial_profile_jet(&Profile::RampDown { inner: *inner, outer: *outer }, x, r0)
            }
            FieldKind::Polynomial { coeffs } => {
                let t = radial_jet(x);
                let mut acc = Jet::constant(n, order, 0.0);
                for c in coeffs.iter().rev() {
                    acc = acc.mul(&t).offset(*c);
                }
                Some(acc)
            }
            FieldKind::RadialProfile { profile } => Self::radial_profile_jet(profile, x, r0),
            FieldKind::DistanceProfile { set, profile } => {
                let d0 = set.distance(&x0);
                if profile.flat_at(d0) {
                    return constant(profile.eval(d0));
                }
                let d = set.distance_jet(x)?;
                Some(d.map(|s| profile.series(s)))
            }
            FieldKind::TubeCutoff { set, eps } => {
                let d0 = set.distance(&x0);
                if d0 < *eps {
                    constant(0.0)
                } else if d0 > 3.0 * eps {
                    constant(1.0)
                } else {
                    None
                }
            }
            FieldKind::Scaled { factor, field } => Some(field.jet(x)?.scale(*factor)),
            FieldKind::Dilated { scale, field } => {
                let y: Vec<Jet> = x.iter().map(|j| j.scale(1.0 / scale)).collect();
                field.jet(&y)
            }
            FieldKind::Sum { terms } => {
                let mut acc = Jet::constant(n, order, 0.0);
                for t in terms {
                    acc = acc.add(&t.jet(x)?);
                }
                Some(acc)
            }
            FieldKind::Product { factors } => {
                let mut acc = Jet::constant(n, order, 1.0);
                for t in factors {
                    acc = acc.mul(&t.jet(x)?);
                }
                Some(acc)
            }
            FieldKind::NegLaplacian { k, field } => {
                let hi = Jet::point(&x0, order + 2 * k);
                let mut j = field.jet(&hi)?;
                for _ in 0..*k {
                    j = j.neg_laplacian();
                }
                Some(j.compose(x))
            }
            FieldKind::RieszPotential { .. } | FieldKind::Spectral { .. } => None,
        }
    }

    fn radial_profile_jet(profile: &Profile, x: &[Jet], r0: f64) -> Option<Jet> {
        let n = x.len();
        if profile.flat_at(r0) {
            return Some(Jet::constant(n, x[0].order(), profile.eval(r0)));
        }
        if r0 == 0.0 {
            return None;
        }
        Some(radial_jet(x).map(|t| profile.series(&t.sqrt())))
    }

    pub fn is_radial(&self, n: usize) -> bool {
        let centred = |set: &CompactSet| match &set.variant {
            SetVariant::FinitePoints { points } => points.len() == 1 && points[0].iter().all(|v| *v == 0.0),
            SetVariant::Sphere { center, .. } => center.iter().all(|v| *v == 0.0),
            _ => false,
        };
        match self {
            FieldKind::DistanceProfile { set, .. } | FieldKind::TubeCutoff { set, .. } => centred(set),
            FieldKind::Scaled { field, .. } | FieldKind::Dilated { field, .. } | FieldKind::NegLaplacian { field, .. } => {
                field.is_radial(n)
            }
            FieldKind::Sum { terms } => terms.iter().all(|t| t.is_radial(n)),
            FieldKind::Product { factors } => factors.iter().all(|t| t.is_radial(n)),
            FieldKind::RieszPotential { density, .. } => density.is_radial(n),
            FieldKind::Spectral { base, .. } => base.is_radial(n),
            _ => true,
        }
    }

    pub fn decay(&self, n: usize) -> Decay {
        let nf = n as f64;
        match self {
            FieldKind::Constant { c } => {
                if *c == 0.0 {
                    Decay::Rapid
                } else {
                    Decay::Power(0.0)
                }
            }
            FieldKind::PowerLaw { alpha } => Decay::Power(*alpha),
            FieldKind::ShiftedPower { rho } => Decay::Power(*rho),
            FieldKind::Bubble { sigma } => Decay::Power(nf - 2.0 * sigma),
            FieldKind::Gaussian | FieldKind::BallIndicator { .. } | FieldKind::MollifiedIndicator { .. } => Decay::Rapid,
            FieldKind::Polynomial { coeffs } => {
                match coeffs.iter().rposition(|c| *c != 0.0) {
                    Some(d) => Decay::Power(-2.0 * d as f64),
                    None => Decay::Rapid,
                }
            }
            FieldKind::RadialProfile { profile } | FieldKind::DistanceProfile { profile, .. } => match profile {
                Profile::RampUp { .. } => Decay::Power(0.0),
                Profile::Power { beta } => Decay::Power(*beta),
                _ => Decay::Rapid,
            },
            FieldKind::TubeCutoff { .. } => Decay::Power(0.0),
            FieldKind::Scaled { factor, field } => {
                if *factor == 0.0 {
                    Decay::Rapid
                } else {
                    field.decay(n)
                }
            }
            FieldKind::Dilated { field, .. } => field.decay(n),
            FieldKind::Sum { terms } => terms.iter().fold(Decay::Rapid, |d, t| d.min(t.decay(n))),
            FieldKind::Product { factors } => {
                factors.iter().fold(Decay::Power(0.0), |d, t| d.plus(t.decay(n)))
            }
            FieldKind::NegLaplacian { k, field } => match field.decay(n) {
                Decay::Power(r) if r != 0.0 => Decay::Power(r + 2.0 * *k as f64),
                Decay::Power(_) => Decay::Rapid,
                Decay::Rapid => Decay::Rapid,
            },
            FieldKind::RieszPotential { density, gamma } => match density.decay(n) {
                Decay::Power(q) if q < nf => Decay::Power(q - 2.0 * gamma),
                _ => Decay::Power(nf - 2.0 * gamma),
            },
            FieldKind::Spectral { base, sigma } => match base.decay(n) {
                Decay::Power(r) if r < nf && r != 0.0 => Decay::Power(r + 2.0 * sigma),
                Decay::Power(r) if r == 0.0 => Decay::Rapid,
                _ => Decay::Power(nf + 2.0 * sigma),
            },
        }
    }

    /// Set where the field fails to be smooth, if any.
    pub fn singular_set(&self, n: usize) -> Option<CompactSet> {
        let origin = || CompactSet::point(vec![0.0; n]).ok();
        let sphere = |r: f64| CompactSet::new(n, SetVariant::Sphere { center: vec![0.0; n], radius: r }).ok();
        match self {
            FieldKind::PowerLaw { alpha } if *alpha != 0.0 => origin(),
            FieldKind::BallIndicator { radius } => sphere(*radius),
            FieldKind::DistanceProfile { set, profile: Profile::Power { .. } } => Some(set.clone()),
            FieldKind::Scaled { field, .. } | FieldKind::NegLaplacian { field, .. } => field.singular_set(n),
            FieldKind::Dilated { scale, field } => match field.singular_set(n)? {
                s if matches!(s.variant, SetVariant::FinitePoints { .. }) => Some(s),
                CompactSet { variant: SetVariant::Sphere { radius, .. }, .. } => sphere(radius * scale),
                _ => None,
            },
            FieldKind::Sum { terms: fs } | FieldKind::Product { factors: fs } => fs.iter().find_map(|t| t.singular_set(n)),
            _ => None,
        }
    }

    /// Radii at which a radial field changes regime; used as quadrature
    /// breakpoints.
    pub fn radial_breaks(&self) -> Vec<f64> {
        match self {
            FieldKind::ShiftedPower { .. } | FieldKind::Bubble { .. } | FieldKind::Gaussian => vec![1.0],
            FieldKind::BallIndicator { radius } => vec![*radius],
            FieldKind::MollifiedIndicator { inner, outer } => vec![*inner, *outer],
            FieldKind::RadialProfile { profile } | FieldKind::DistanceProfile { profile, .. } => {
                let mut b = profile.breaks();
                if let FieldKind::DistanceProfile { set: CompactSet { variant: SetVariant::Sphere { radius, .. }, .. }, .. } = self {
                    b = b.iter().flat_map(|v| [radius - v, radius + v]).collect();
                }
                b
            }
            FieldKind::TubeCutoff { set, eps } => {
                let mut b = vec![*eps, 2.0 * eps, 3.0 * eps];
                if let SetVariant::Sphere { radius, .. } = set.variant {
                    b = b.iter().flat_map(|v| [radius - v, radius + v]).collect();
                }
                b
            }
            FieldKind::Scaled { field, .. } | FieldKind::NegLaplacian { field, .. } => field.radial_breaks(),
            FieldKind::Dilated { scale, field } => field.radial_breaks().iter().map(|b| b * scale).collect(),
            FieldKind::Sum { terms: fs } | FieldKind::Product { factors: fs } => {
                fs.iter().flat_map(|t| t.radial_breaks()).collect()
            }
            FieldKind::RieszPotential { density, .. } | FieldKind::Spectral { base: density, .. } => {
                let mut b = density.radial_breaks();
                b.push(1.0);
                b
            }
            FieldKind::Constant { .. } | FieldKind::PowerLaw { .. } | FieldKind::Polynomial { .. } => vec![],
        }
        .into_iter()
        .filter(|b| *b > 0.0)
        .collect()
    }

    /// Radius of a ball around `x` on which the field is smooth and its
    /// jets at `x` converge.
    pub fn smooth_radius(&self, x: &[f64]) -> f64 {
        let r = norm2(x).sqrt();
        match self {
            FieldKind::Constant { .. } | FieldKind::Polynomial { .. } => f64::INFINITY,
            FieldKind::PowerLaw { .. } => 0.5 * r,
            FieldKind::ShiftedPower { .. } | FieldKind::Bubble { .. } => 0.5 * (1.0 + r * r).sqrt(),
            FieldKind::Gaussian => 1.0,
            FieldKind::BallIndicator { radius } => (r - radius).abs(),
            FieldKind::MollifiedIndicator { inner, outer } => {
                Self::radial_profile_radius(&Profile::RampDown { inner: *inner, outer: *outer }, r)
            }
            FieldKind::RadialProfile { profile } => Self::radial_profile_radius(profile, r),
            FieldKind::DistanceProfile { set, profile } => {
                let d = set.distance(x);
                let s = profile.local_scale(d);
                if profile.flat_at(d) {
                    s
                } else {
                    s.min(0.5 * d).min(0.5 * (set.reach() - d).abs())
                }
            }
            FieldKind::TubeCutoff { set, eps } => {
                let d = set.distance(x);
                if d < *eps {
                    eps - d
                } else if d > 3.0 * eps {
                    d - 3.0 * eps
                } else {
                    0.25 * eps
                }
            }
            FieldKind::Scaled { field, .. } | FieldKind::NegLaplacian { field, .. } => field.smooth_radius(x),
            FieldKind::Dilated { scale, field } => {
                let y: Vec<f64> = x.iter().map(|v| v / scale).collect();
                scale * field.smooth_radius(&y)
            }
            FieldKind::Sum { terms: fs } | FieldKind::Product { factors: fs } => {
                fs.iter().map(|t| t.smooth_radius(x)).fold(f64::INFINITY, f64::min)
            }
            FieldKind::RieszPotential { .. } | FieldKind::Spectral { .. } => {
                let gap = self.radial_breaks().iter().map(|b| (r - b).abs()).fold(f64::INFINITY, f64::min);
                gap.min(0.5 * (1.0 + r))
            }
        }
    }

    fn radial_profile_radius(profile: &Profile, r: f64) -> f64 {
        let s = profile.local_scale(r);
        if profile.flat_at(r) {
            s
        } else {
            s.min(r)
        }
    }

    /// Whether every term is supported in a bounded set.
    pub fn compactly_supported(&self) -> bool {
        match self {
            FieldKind::Constant { c } => *c == 0.0,
            FieldKind::BallIndicator { .. } | FieldKind::MollifiedIndicator { .. } => true,
            FieldKind::RadialProfile { profile } | FieldKind::DistanceProfile { profile, .. } => profile.is_compact(),
            FieldKind::Scaled { field, .. } | FieldKind::Dilated { field, .. } | FieldKind::NegLaplacian { field, .. } => {
                field.compactly_supported()
            }
            FieldKind::Sum { terms } => terms.iter().all(|t| t.compactly_supported()),
            FieldKind::Product { factors } => factors.iter().any(|t| t.compactly_supported()),
            _ => false,
        }
    }

    /// Radius of a ball containing the support of a compactly supported field.
    pub fn support_radius(&self, n: usize) -> Option<f64> {
        if !self.compactly_supported() {
            return None;
        }
        let set_extent = |set: &CompactSet| {
            let s = set.samples(set.diam.max(1e-3));
            s.iter().map(|p| norm2(p).sqrt()).fold(0.0, f64::max) + 1e-12
        };
        match self {
            FieldKind::Constant { .. } => Some(0.0),
            FieldKind::BallIndicator { radius } => Some(*radius),
            FieldKind::MollifiedIndicator { outer, .. } => Some(*outer),
            FieldKind::RadialProfile { profile } => profile.breaks().last().copied(),
            FieldKind::DistanceProfile { set, profile } => Some(set_extent(set) + profile.breaks().last()?),
            FieldKind::Scaled { field, .. } | FieldKind::NegLaplacian { field, .. } => field.support_radius(n),
            FieldKind::Dilated { scale, field } => Some(scale * field.support_radius(n)?),
            FieldKind::Sum { terms } => terms.iter().map(|t| t.support_radius(n)).try_fold(0.0, |a: f64, b| Some(a.max(b?))),
            FieldKind::Product { factors } => {
                factors.iter().filter_map(|t| t.support_radius(n)).reduce(f64::min)
            }
            _ => None,
        }
    }
}

/// A validated field on R^n with its metadata.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "FieldSpec", into = "FieldSpec")]
pub struct ScalarField {
    pub dim: usize,
    pub kind: FieldKind,
    /// Far-field exponent; `None` for rapidly decaying fields.
    pub decay_hint: Option<f64>,
    pub singular_set: Option<CompactSet>,
    pub radial: bool,
}

/// Config form `{"dim": n, "kind": ..., "params": {...}}`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FieldSpec {
    pub dim: usize,
    #[serde(flatten)]
    pub kind: FieldKind,
}

impl TryFrom<FieldSpec> for ScalarField {
    type Error = Error;
    fn try_from(s: FieldSpec) -> Result<Self> {
        ScalarField::new(s.dim, s.kind)
    }
}

impl From<ScalarField> for FieldSpec {
    fn from(f: ScalarField) -> Self {
        FieldSpec { dim: f.dim, kind: f.kind }
    }
}

fn validate(kind: &FieldKind, n: usize) -> Result<()> {
    let pos = |v: f64, what: &str| if v > 0.0 && v.is_finite() { Ok(()) } else { invalid(format!("{what} must be positive")) };
    match kind {
        FieldKind::BallIndicator { radius } => pos(*radius, "ball radius"),
        FieldKind::MollifiedIndicator { inner, outer } => {
            if *inner > 0.0 && outer > inner {
                Ok(())
            } else {
                invalid("need 0 < inner < outer")
            }
        }
        FieldKind::Dilated { scale, field } => {
            pos(*scale, "dilation scale")?;
            validate(field, n)
        }
        FieldKind::DistanceProfile { set, .. } | FieldKind::TubeCutoff { set, .. } if set.dim != n => {
            invalid("set dimension differs from field dimension")
        }
        FieldKind::TubeCutoff { eps, .. } => pos(*eps, "eps"),
        FieldKind::Scaled { field, .. } | FieldKind::NegLaplacian { field, .. } => validate(field, n),
        FieldKind::Sum { terms: fs } | FieldKind::Product { factors: fs } => fs.iter().try_for_each(|t| validate(t, n)),
        FieldKind::RieszPotential { density, gamma } => {
            if !(*gamma > 0.0 && *gamma < n as f64 / 2.0) {
                return invalid(format!("gamma = {gamma} outside (0, n/2)"));
            }
            if !density.is_radial(n) {
                return invalid("Riesz potential fields need a radial density");
            }
            validate(density, n)
        }
        FieldKind::Spectral { base, sigma } => {
            pos(*sigma, "sigma")?;
            validate(base, n)
        }
        _ => Ok(()),
    }
}

impl ScalarField {
    pub fn new(dim: usize, kind: FieldKind) -> Result<Self> {
        if dim == 0 {
            return invalid("dimension must be positive");
        }
        validate(&kind, dim)?;
        let decay_hint = match kind.decay(dim) {
            Decay::Power(r) => Some(r),
            Decay::Rapid => None,
        };
        let singular_set = kind.singular_set(dim);
        let radial = kind.is_radial(dim);
        Ok(Self { dim, kind, decay_hint, singular_set, radial })
    }

    /// Value at `x`; fails on the singular set.
    pub fn eval(&self, x: &[f64]) -> Result<f64> {
        if x.len() != self.dim {
            return invalid(format!("point has dimension {}, field has {}", x.len(), self.dim));
        }
        if let Some(s) = &self.singular_set {
            if s.distance(x) == 0.0 {
                return Err(Error::EvalAtSingularity(x.to_vec()));
            }
        }
        Ok(self.kind.eval(x))
    }

    /// Value without the singular-set check.
    pub fn value(&self, x: &[f64]) -> f64 {
        self.kind.eval(x)
    }

    /// Radial profile `r -> f(r e_1)`.
    pub fn radial_value(&self, r: f64) -> f64 {
        let mut x = vec![0.0; self.dim];
        x[0] = r;
        self.kind.eval(&x)
    }

    pub fn jet(&self, x: &[f64], order: usize) -> Option<Jet> {
        self.kind.jet(&Jet::point(x, order))
    }

    pub fn smooth_radius(&self, x: &[f64]) -> f64 {
        self.kind.smooth_radius(x)
    }
}

/// Derivative value with a flag for the finite-difference fallback.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Derivative {
    pub value: f64,
    pub approximate: bool,
}

fn fd_step(x: &[f64]) -> f64 {
    f64::EPSILON.cbrt() * (1.0 + norm2(x).sqrt())
}

/// `D^alpha f(x)`: analytic through jets, central differences (order <= 2)
/// otherwise.
pub fn derivative(field: &ScalarField, x: &[f64], alpha: &[u8]) -> Result<Derivative> {
    if alpha.len() != field.dim {
        return invalid("multi-index length differs from dimension");
    }
    field.eval(x)?;
    let order: usize = alpha.iter().map(|&a| a as usize).sum();
    if order > ORDER_CAP {
        return Err(Error::UnsupportedOrder { order, cap: ORDER_CAP });
    }
    if let Some(j) = field.jet(x, order) {
        return Ok(Derivative { value: j.derivative(alpha).unwrap_or(0.0), approximate: false });
    }
    if order > 2 {
        return Err(Error::UnsupportedOrder { order, cap: 2 });
    }
    let h = fd_step(x);
    let f = |y: &[f64]| field.value(y);
    let shift = |i: usize, s: f64| {
        let mut y = x.to_vec();
        y[i] += s;
        y
    };
    let idx: Vec<usize> = alpha.iter().enumerate().flat_map(|(i, &a)| std::iter::repeat_n(i, a as usize)).collect();
    let value = match idx.as_slice() {
        [] => f(x),
        [i] => (f(&shift(*i, h)) - f(&shift(*i, -h))) / (2.0 * h),
        [i, j] if i == j => (f(&shift(*i, h)) - 2.0 * f(x) + f(&shift(*i, -h))) / (h * h),
        [i, j] => {
            let pp = {
                let mut y = shift(*i, h);
                y[*j] += h;
                y
            };
            let pm = {
                let mut y = shift(*i, h);
                y[*j] -= h;
                y
            };
            let mp = {
                let mut y = shift(*i, -h);
                y[*j] += h;
                y
            };
            let mm = {
                let mut y = shift(*i, -h);
                y[*j] -= h;
                y
            };
            (f(&pp) - f(&pm) - f(&mp) + f(&mm)) / (4.0 * h * h)
        }
        _ => unreachable!(),
    };
    Ok(Derivative { value, approximate: true })
}

/// `(-Delta)^k f(x)`.
pub fn iterated_laplacian(field: &ScalarField, k: usize, x: &[f64]) -> Result<f64> {
    if k == 0 {
        return field.eval(x);
    }
    field.eval(x)?;
    if 2 * k > ORDER_CAP {
        return Err(Error::UnsupportedOrder { order: 2 * k, cap: ORDER_CAP });
    }
    match field.jet(x, 2 * k) {
        Some(j) => Ok(j.neg_laplacian_power(k).expect("jet order covers 2k")),
        None => Err(Error::UnsupportedOrder { order: 2 * k, cap: 0 }),
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;

    fn field(n: usize, kind: FieldKind) -> ScalarField {
        ScalarField::new(n, kind).unwrap()
    }

    #[test]
    fn catalog_values() {
        assert_eq!(field(3, FieldKind::constant(1.0)).eval(&[0.3, 0.1, 2.0]).unwrap(), 1.0);
        assert_eq!(field(3, FieldKind::PowerLaw { alpha: 1.0 }).eval(&[2.0, 0.0, 0.0]).unwrap(), 0.5);
        assert_eq!(field(3, FieldKind::Bubble { sigma: 0.5 }).eval(&[0.0; 3]).unwrap(), 1.0);
        assert!(matches!(
            field(3, FieldKind::PowerLaw { alpha: 1.0 }).eval(&[0.0; 3]),
            Err(Error::EvalAtSingularity(_))
        ));
    }

    #[test]
    fn analytic_derivatives() {
        let p = field(3, FieldKind::PowerLaw { alpha: 1.0 });
        let d = derivative(&p, &[1.0, 0.0, 0.0], &[1, 0, 0]).unwrap();
        assert_relative_eq!(d.value, -1.0, epsilon = 1e-14);
        assert!(!d.approximate);
        let c = field(2, FieldKind::constant(3.0));
        assert_eq!(derivative(&c, &[0.2, 0.1], &[1, 1]).unwrap().value, 0.0);
        let s = field(1, FieldKind::ShiftedPower { rho: 2.0 });
        assert_relative_eq!(derivative(&s, &[0.0], &[2]).unwrap().value, -2.0, epsilon = 1e-14);
        assert!(matches!(derivative(&s, &[0.0], &[9]), Err(Error::UnsupportedOrder { .. })));
    }

    #[test]
    fn iterated_laplacians() {
        let q = field(3, FieldKind::Polynomial { coeffs: vec![0.0, 1.0] });
        assert_relative_eq!(iterated_laplacian(&q, 1, &[0.4, -1.0, 2.0]).unwrap(), -6.0, epsilon = 1e-13);
        let s = field(3, FieldKind::ShiftedPower { rho: 1.0 });
        assert_relative_eq!(iterated_laplacian(&s, 1, &[0.0; 3]).unwrap(), 3.0, epsilon = 1e-14);
        assert_eq!(iterated_laplacian(&s, 0, &[1.0, 0.0, 0.0]).unwrap(), s.eval(&[1.0, 0.0, 0.0]).unwrap());
    }

    #[test]
    fn config_round_trip() {
        let f = field(
            3,
            FieldKind::Sum { terms: vec![FieldKind::Gaussian, FieldKind::Bubble { sigma: 0.5 }.scaled(2.0)] },
        );
        let text = serde_json::to_string(&FieldSpec::from(f.clone())).unwrap();
        let back: FieldSpec = serde_json::from_str(&text).unwrap();
        assert_eq!(back.dim, 3);
        assert_eq!(ScalarField::try_from(back).unwrap(), f);
    }
}
