//! Experiment configuration and its range validation.

use std::fmt;
use std::path::PathBuf;

use serde::{Deserialize, Serialize};

use fraclab::cutoffs::{inner_cutoff, manifold_cutoff, point_cutoff, tube_cutoff, CutoffFamily};
use fraclab::fields::{FieldSpec, ScalarField};
use fraclab::fraclap::QuadratureSpec;
use fraclab::sets::{CompactSet, SetSpec};
use fraclab::verify::Probe;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, clap::ValueEnum)]
#[serde(rename_all = "kebab-case")]
pub enum Command {
    Eval,
    Oracle,
    Decay,
    CutoffBound,
    Truncation,
    Tube,
    Assouad,
    Capacity,
    Removability,
    Bootstrap,
    Superharmonic,
    Suite,
}

impl fmt::Display for Command {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let s = serde_json::to_value(self).ok().and_then(|v| v.as_str().map(str::to_owned)).unwrap_or_default();
        f.write_str(&s)
    }
}

/// Scalar problem parameters; each command reads the ones it needs.
#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct Problem {
    pub n: Option<usize>,
    pub gamma: Option<f64>,
    pub sigma: Option<f64>,
    pub p: Option<f64>,
    pub sigma_list: Option<Vec<f64>>,
    /// Bounds `0 < lower <= F <= upper` on the nonlinearity coefficient.
    pub f_bounds: Option<(f64, f64)>,
    /// Tube exponent override for the mollified cutoff envelope.
    pub lambda: Option<f64>,
    /// Radius of the compact set for truncation convergence.
    pub k_radius: Option<f64>,
    /// Ball `B_R(center)` for tube areas and covering numbers.
    pub big_r: Option<f64>,
    pub center: Option<Vec<f64>>,
    pub k_max: Option<usize>,
    pub eps0: Option<f64>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum CutoffChoice {
    Point,
    Manifold,
    Tube,
    Inner,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct CutoffConfig {
    pub kind: CutoffChoice,
    /// Radius `R` of the outer profile of the point cutoff.
    #[serde(default)]
    pub outer: Option<f64>,
    /// Normal-coordinate radius `rho` of the manifold cutoff.
    #[serde(default)]
    pub rho: Option<f64>,
}

/// `count` seeded points uniform in the ball of radius `radius`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SamplePoints {
    pub count: usize,
    pub radius: f64,
}

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct Sweeps {
    pub eps: Vec<f64>,
    pub radii: Vec<f64>,
    pub bound_radii: Vec<f64>,
    pub points: Vec<Vec<f64>>,
    pub sample_points: Option<SamplePoints>,
    pub probes: Vec<Probe>,
    pub cross_ratios: Vec<f64>,
    pub scale_pairs: Vec<(f64, f64)>,
    pub s_list: Vec<f64>,
}

/// Optional target turning a measured scalar into a pass/fail check.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Expectation {
    pub value: f64,
    pub tolerance: f64,
}

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct ExperimentConfig {
    pub command: Option<Command>,
    pub problem: Problem,
    pub field: Option<FieldSpec>,
    pub set: Option<SetSpec>,
    pub cutoff: Option<CutoffConfig>,
    pub quadrature: QuadratureSpec,
    pub sweeps: Sweeps,
    pub expect: Option<Expectation>,
    pub seed: Option<u64>,
    pub workers: Option<usize>,
    pub out_dir: Option<PathBuf>,
}

/// A violated range or a missing parameter, named for the user.
#[derive(Debug, Clone, PartialEq)]
pub struct ConfigInvalid(pub String);

impl fmt::Display for ConfigInvalid {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "invalid config: {}", self.0)
    }
}

impl std::error::Error for ConfigInvalid {}

fn bad<T>(msg: impl Into<String>) -> Result<T, ConfigInvalid> {
    Err(ConfigInvalid(msg.into()))
}

fn need<T: Clone>(v: &Option<T>, name: &str) -> Result<T, ConfigInvalid> {
    v.clone().ok_or_else(|| ConfigInvalid(format!("missing {name}")))
}

fn positive(v: f64, name: &str) -> Result<f64, ConfigInvalid> {
    if v > 0.0 && v.is_finite() {
        Ok(v)
    } else {
        bad(format!("{name} = {v} must be positive and finite"))
    }
}

fn nonempty<T>(v: &[T], name: &str) -> Result<(), ConfigInvalid> {
    if v.is_empty() {
        bad(format!("sweeps.{name} must be nonempty"))
    } else {
        Ok(())
    }
}

fn all_positive(v: &[f64], name: &str) -> Result<(), ConfigInvalid> {
    nonempty(v, name)?;
    v.iter().try_for_each(|x| positive(*x, &format!("sweeps.{name} entry")).map(|_| ()))
}

impl ExperimentConfig {
    pub fn from_json(text: &str) -> Result<Self, ConfigInvalid> {
        serde_json::from_str(text).map_err(|e| ConfigInvalid(e.to_string()))
    }

    /// `n`, taken from the problem or else from the field or set.
    pub fn dim(&self) -> Result<usize, ConfigInvalid> {
        let n = self.problem.n.or(self.field.as_ref().map(|f| f.dim)).or(self.set.as_ref().map(|s| s.dim));
        match n {
            Some(n) if n >= 1 => Ok(n),
            Some(_) => bad("problem.n must be at least 1"),
            None => bad("missing problem.n"),
        }
    }

    pub fn field(&self) -> Result<ScalarField, ConfigInvalid> {
        let spec = need(&self.field, "field")?;
        if spec.dim != self.dim()? {
            return bad(format!("field.dim = {} differs from n = {}", spec.dim, self.dim()?));
        }
        ScalarField::try_from(spec).map_err(|e| ConfigInvalid(format!("field: {e}")))
    }

    pub fn compact_set(&self) -> Result<CompactSet, ConfigInvalid> {
        let spec = need(&self.set, "set")?;
        if spec.dim != self.dim()? {
            return bad(format!("set.dim = {} differs from n = {}", spec.dim, self.dim()?));
        }
        CompactSet::try_from(spec).map_err(|e| ConfigInvalid(format!("set: {e}")))
    }

    pub fn sigma(&self) -> Result<f64, ConfigInvalid> {
        positive(need(&self.problem.sigma, "problem.sigma")?, "sigma")
    }

    /// `gamma` in `(0, n/2)`.
    pub fn gamma(&self) -> Result<f64, ConfigInvalid> {
        let n = self.dim()? as f64;
        let g = need(&self.problem.gamma, "problem.gamma")?;
        if !(g > 0.0 && g < n / 2.0) {
            return bad(format!("gamma = {g} must lie in (0, n/2) = (0, {})", n / 2.0));
        }
        Ok(g)
    }

    /// `p > 1`.
    pub fn p(&self) -> Result<f64, ConfigInvalid> {
        let p = need(&self.problem.p, "problem.p")?;
        if !(p > 1.0 && p.is_finite()) {
            return bad(format!("p = {p} must exceed 1"));
        }
        Ok(p)
    }

    /// The cutoff at the first `eps` of the sweep, after building it at every
    /// sweep value so that scale restrictions surface here.
    pub fn cutoff_template(&self) -> Result<CutoffFamily, ConfigInvalid> {
        let c = need(&self.cutoff, "cutoff")?;
        all_positive(&self.sweeps.eps, "eps")?;
        let n = self.dim()?;
        let eps0 = self.sweeps.eps[0];
        let wrap = |e: fraclab::Error| ConfigInvalid(format!("cutoff: {e}"));
        let template = match c.kind {
            CutoffChoice::Point => {
                if let Some(set) = &self.set {
                    let origin = matches!(&set.variant, fraclab::sets::SetVariant::FinitePoints { points } if points.len() == 1 && points[0].iter().all(|v| *v == 0.0));
                    if !origin {
                        return bad("the point cutoff is centred at the origin; set must be the origin or omitted");
                    }
                }
                point_cutoff(n, eps0, c.outer.unwrap_or(2.0)).map_err(wrap)?
            }
            CutoffChoice::Manifold => manifold_cutoff(&self.compact_set()?, eps0, need(&c.rho, "cutoff.rho")?).map_err(wrap)?,
            CutoffChoice::Tube => tube_cutoff(&self.compact_set()?, eps0).map_err(wrap)?,
            CutoffChoice::Inner => inner_cutoff(&self.compact_set()?, eps0).map_err(wrap)?,
        };
        for &e in &self.sweeps.eps[1..] {
            template.with_eps(e).map_err(wrap)?;
        }
        Ok(template)
    }

    /// Evaluation points: explicit ones, or seeded samples in a ball.
    pub fn points(&self, seed: u64) -> Result<Vec<Vec<f64>>, ConfigInvalid> {
        let n = self.dim()?;
        let mut pts = self.sweeps.points.clone();
        if let Some(sp) = self.sweeps.sample_points {
            positive(sp.radius, "sample_points.radius")?;
            pts.extend(fraclab::verify::sample_ball_points(n, sp.radius, sp.count, seed));
        }
        nonempty(&pts, "points")?;
        if let Some(p) = pts.iter().find(|p| p.len() != n) {
            return bad(format!("point {p:?} does not have dimension {n}"));
        }
        Ok(pts)
    }

    /// Checks every precondition the command's numerical stages rely on.
    pub fn validate(&self, cmd: Command) -> Result<(), ConfigInvalid> {
        if let Some(c) = self.command {
            if c != cmd {
                return bad(format!("config is for `{c}` but `{cmd}` was requested"));
            }
        }
        if cmd == Command::Suite {
            return Ok(());
        }
        self.quadrature.validate().map_err(|e| ConfigInvalid(format!("quadrature: {e}")))?;
        let n = self.dim()?;
        match cmd {
            Command::Eval | Command::Oracle => {
                self.field()?;
                self.sigma()?;
                if cmd == Command::Oracle {
                    all_positive_or_zero(&self.sweeps.radii, "radii")?;
                } else {
                    self.points(0)?;
                }
            }
            Command::Decay => {
                let f = self.field()?;
                if f.decay_hint.is_none() {
                    return bad("decay needs a field with a power-law decay exponent");
                }
                self.sigma()?;
                all_positive(&self.sweeps.radii, "radii")?;
            }
            Command::CutoffBound => {
                let s = self.sigma()?;
                if s.fract() == 0.0 {
                    return bad(format!("sigma = {s} must be non-integer"));
                }
                self.cutoff_template()?;
                nonempty(&self.sweeps.probes, "probes")?;
                if let Some(p) = self.sweeps.probes.iter().find(|p| !(p.distance(1.0) > 0.0)) {
                    return bad(format!("probe {p:?} must sit at a positive distance"));
                }
            }
            Command::Truncation => {
                let f = self.field()?;
                if f.decay_hint.is_none() || !f.radial {
                    return bad("truncation needs a radial field with a power-law decay exponent");
                }
                positive(need(&self.problem.gamma, "problem.gamma")?, "gamma")?;
                let k = positive(need(&self.problem.k_radius, "problem.k_radius")?, "k_radius")?;
                all_positive(&self.sweeps.eps, "eps")?;
                if let Some(e) = self.sweeps.eps.iter().find(|e| 1.0 / **e <= k) {
                    return bad(format!("eps = {e} must satisfy 1/eps > k_radius = {k}"));
                }
                all_positive(&self.sweeps.bound_radii, "bound_radii")?;
            }
            Command::Tube => {
                self.compact_set()?;
                all_positive(&self.sweeps.radii, "radii")?;
                positive(need(&self.problem.big_r, "problem.big_r")?, "big_r")?;
                let c = need(&self.problem.center, "problem.center")?;
                if c.len() != n {
                    return bad("problem.center has the wrong dimension");
                }
            }
            Command::Assouad => {
                self.compact_set()?;
                nonempty(&self.sweeps.scale_pairs, "scale_pairs")?;
                if let Some((r, big)) = self.sweeps.scale_pairs.iter().find(|(r, big)| !(*r > 0.0 && r < big)) {
                    return bad(format!("scale pair ({r}, {big}) must satisfy 0 < r < R"));
                }
            }
            Command::Capacity => {
                self.compact_set()?;
                self.sigma()?;
                let k = need(&self.problem.k_max, "problem.k_max")?;
                if k < 2 {
                    return bad("problem.k_max must be at least 2");
                }
                let eps0 = positive(need(&self.problem.eps0, "problem.eps0")?, "eps0")?;
                fraclab::cutoffs::capacity_sequence(&self.compact_set()?, self.sigma()?, k, eps0).map_err(|e| ConfigInvalid(format!("capacity sequence: {e}")))?;
                nonempty(&self.sweeps.cross_ratios, "cross_ratios")?;
                if let Some(t) = self.sweeps.cross_ratios.iter().find(|t| !(**t > 0.0 && **t < 1.0)) {
                    return bad(format!("cross ratio {t} must lie in (0, 1)"));
                }
            }
            Command::Removability => {
                self.field()?;
                self.compact_set()?;
                self.gamma()?;
                self.p()?;
                let (lo, hi) = need(&self.problem.f_bounds, "problem.f_bounds")?;
                if !(lo > 0.0 && lo <= hi) {
                    return bad("f_bounds must satisfy 0 < lower <= upper");
                }
                all_positive(&self.sweeps.eps, "eps")?;
            }
            Command::Bootstrap => {
                self.gamma()?;
                self.p()?;
            }
            Command::Superharmonic => {
                let f = self.field()?;
                let g = self.gamma()?;
                let list = need(&self.problem.sigma_list, "problem.sigma_list")?;
                nonempty(&list, "sigma_list")?;
                if let Some(s) = list.iter().find(|s| !(**s > 0.0 && **s < g)) {
                    return bad(format!("sigma = {s} must lie in (0, gamma) = (0, {g})"));
                }
                if !f.radial {
                    return bad("superharmonic needs a radial density");
                }
                if let Some(s) = self.sweeps.s_list.iter().find(|s| !(**s > 0.0 && s.is_finite())) {
                    return bad(format!("s_list entry {s} must be positive"));
                }
                self.points(0)?;
            }
            Command::Suite => unreachable!(),
        }
        Ok(())
    }
}

fn all_positive_or_zero(v: &[f64], name: &str) -> Result<(), ConfigInvalid> {
    nonempty(v, name)?;
    match v.iter().find(|x| !(**x >= 0.0 && x.is_finite())) {
        Some(x) => bad(format!("sweeps.{name} entry {x} must be nonnegative")),
        None => Ok(()),
    }
}
