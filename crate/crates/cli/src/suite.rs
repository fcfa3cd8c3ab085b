//! The acceptance battery: twelve criteria, the last of which (byte-identical
//! reruns) is checked by running the battery twice from outside.

use std::f64::consts::PI;

use serde::Serialize;
use serde_json::json;

use fraclab::cutoffs::{capacity_sequence, manifold_cutoff, point_cutoff};
use fraclab::fields::{FieldKind, ScalarField};
use fraclab::fit;
use fraclab::fraclap::{fourier_oracle, frac_laplacian, FracOrder, QuadratureSpec};
use fraclab::mc::McSpec;
use fraclab::sets::{assouad_estimate, fit_lambda, CompactSet, SetVariant};
use fraclab::verify::{self, Check, LedgerReport, Probe};

use crate::config::Command;
use std::time::Instant;

use crate::output::{Outcome, Stage, Table};
use crate::run::{capacity_table, ledger_table, superharmonic_table, RunContext};

/// Number of criteria evaluated inside one battery run.
pub const IN_RUN: usize = 11;

#[derive(Debug, Clone, Serialize)]
pub struct CriterionResult {
    pub id: usize,
    pub name: String,
    pub pass: bool,
    pub checks: Vec<Check>,
    pub reports: Vec<LedgerReport>,
    pub error: Option<String>,
}

struct Partial {
    checks: Vec<Check>,
    reports: Vec<LedgerReport>,
    tables: Vec<Table>,
}

impl Partial {
    fn new() -> Self {
        Self { checks: Vec::new(), reports: Vec::new(), tables: Vec::new() }
    }
}

type Step = fn(&RunContext) -> fraclab::Result<Partial>;

const CRITERIA: [(&str, Step); IN_RUN] = [
    ("bubble_oracle", bubble_oracle),
    ("power_law_mapping", power_law_mapping),
    ("decay_regimes", decay_regimes),
    ("point_cutoff_ledger", point_cutoff_ledger),
    ("manifold_cutoff_ledger", manifold_cutoff_ledger),
    ("capacity_energies", capacity_energies),
    ("tube_exponents", tube_exponents),
    ("bootstrap_arithmetic", bootstrap_arithmetic),
    ("removability_ledger", removability),
    ("superharmonicity", superharmonicity),
    ("distance_properties", distance_properties),
];

pub fn criterion_names() -> Vec<&'static str> {
    CRITERIA.iter().map(|c| c.0).collect()
}

/// Each criterion draws from its own stream derived from the run seed.
fn sub_context(ctx: &RunContext, id: usize) -> RunContext {
    RunContext { seed: ctx.seed.wrapping_add(0x9e37_79b9_7f4a_7c15u64.wrapping_mul(id as u64)), workers: ctx.workers }
}

/// Runs criterion `id` (1-based) and returns its verdict and data series.
pub fn run_criterion(id: usize, ctx: &RunContext) -> (CriterionResult, Vec<Table>) {
    let (name, step) = CRITERIA[id - 1];
    let sub = sub_context(ctx, id);
    match step(&sub) {
        Ok(p) => {
            let pass = !p.checks.is_empty() && p.checks.iter().all(|c| c.pass) && p.reports.iter().all(|r| r.pass);
            (CriterionResult { id, name: name.into(), pass, checks: p.checks, reports: p.reports, error: None }, p.tables)
        }
        Err(e) => (
            CriterionResult { id, name: name.into(), pass: false, checks: Vec::new(), reports: Vec::new(), error: Some(e.to_string()) },
            Vec::new(),
        ),
    }
}

pub fn run_suite(ctx: RunContext) -> Outcome {
    let mut results = Vec::new();
    let mut tables = Vec::new();
    let mut stages = Vec::new();
    for id in 1..=IN_RUN {
        let start = Instant::now();
        let (r, t) = run_criterion(id, &ctx);
        stages.push(Stage { name: format!("criterion_{id}_{}", r.name), seconds: start.elapsed().as_secs_f64() });
        results.push(r);
        tables.extend(t);
    }
    let pass = results.iter().all(|r| r.pass);
    Outcome { command: Command::Suite, pass, result: json!({ "seed": ctx.seed, "workers": ctx.workers, "criteria": results }), tables, stages }
}

fn spec(ctx: &RunContext) -> QuadratureSpec {
    ctx.spec(&QuadratureSpec::default())
}

fn on_axis(n: usize, r: f64) -> Vec<f64> {
    let mut x = vec![0.0; n];
    x[0] = r;
    x
}

fn log_grid(lo: f64, hi: f64, count: usize) -> Vec<f64> {
    (0..count).map(|i| lo * (hi / lo).powf(i as f64 / (count - 1) as f64)).collect()
}

fn dyadic(from: i32, to: i32) -> Vec<f64> {
    (from..=to).map(|k| 2f64.powi(-k)).collect()
}

fn bubble_oracle(ctx: &RunContext) -> fraclab::Result<Partial> {
    let spec = spec(ctx);
    let f = ScalarField::new(3, FieldKind::Bubble { sigma: 0.5 })?;
    let order = FracOrder::new(3, 0.5)?;
    let mut p = Partial::new();
    let v0 = frac_laplacian(&f, &order, &[0.0; 3], &spec)?;
    p.checks.push(Check::near("value_at_origin_relative_error", (v0.value - 2.0).abs() / 2.0, 0.0, 1e-3));
    let mut t = Table::new("c01_bubble", "(-Delta)^{1/2} (1+|x|^2)^{-1} in R^3: real space against the Fourier-Hankel oracle", &["r", "realspace", "oracle"]);
    let mut worst = 0f64;
    for i in 0..20 {
        let r = 5.0 * i as f64 / 19.0;
        let a = frac_laplacian(&f, &order, &on_axis(3, r), &spec)?;
        let b = fourier_oracle(&f, &order, r)?;
        worst = worst.max((a.value - b.value).abs());
        t.push(vec![r, a.value, b.value]);
    }
    p.checks.push(Check::at_most("max_oracle_difference", worst, 1e-4, 0.0));
    p.tables.push(t);
    Ok(p)
}

fn power_law_mapping(ctx: &RunContext) -> fraclab::Result<Partial> {
    let spec = spec(ctx);
    let (alpha, sigma) = (1.0, 0.5);
    let f = ScalarField::new(3, FieldKind::PowerLaw { alpha })?;
    let order = FracOrder::new(3, sigma)?;
    let radii = log_grid(0.25, 8.0, 10);
    let mut values = Vec::new();
    let mut t = Table::new("c02_power_law", "(-Delta)^sigma |x|^{-alpha} = C |x|^{-alpha - 2 sigma}", &["r", "value", "C"]);
    for &r in &radii {
        let v = frac_laplacian(&f, &order, &on_axis(3, r), &spec)?.value;
        values.push(v);
        t.push(vec![r, v, v * r.powf(alpha + 2.0 * sigma)]);
    }
    let slope = fit::log_log(&radii, &values).slope;
    let c = |r: f64| -> fraclab::Result<f64> { Ok(frac_laplacian(&f, &order, &on_axis(3, r), &spec)?.value * r.powf(alpha + 2.0 * sigma)) };
    let (c1, c2) = (c(1.0)?, c(4.0)?);
    let mut p = Partial::new();
    p.checks.push(Check::near("slope", slope, -alpha - 2.0 * sigma, 0.02));
    p.checks.push(Check::at_most("constant_relative_spread", (c1 - c2).abs() / c1.abs(), 1e-3, 0.0));
    p.tables.push(t);
    Ok(p)
}

fn decay_regimes(ctx: &RunContext) -> fraclab::Result<Partial> {
    let spec = spec(ctx);
    let radii = log_grid(10.0, 100.0, 10);
    let mut p = Partial::new();
    for rho in [1.0, 3.0, 5.0] {
        let f = ScalarField::new(3, FieldKind::ShiftedPower { rho })?;
        let (fit, report) = verify::verify_phi0_decay(&f, 0.5, &radii, &spec)?;
        let mut t = Table::new(
            &format!("c03_decay_rho{rho}"),
            "|(-Delta)^sigma (1+|x|^2)^{-rho/2}| against C (1+|x|)^{-2 sigma - min(rho, n)}, with ln|x| at rho = n",
            &["r", "value", "fitted"],
        );
        for s in &report.samples {
            let r = s.input["r"];
            let log = if rho == 3.0 { (2.0 + r).ln() } else { 1.0 };
            t.push(vec![r, s.lhs, (fit.intercept + fit.slope * r.ln()).exp() * log]);
        }
        p.tables.push(t);
        p.reports.push(report);
    }
    p.checks.push(Check::flag("all_regimes_evaluated", p.reports.len() == 3));
    Ok(p)
}

fn point_cutoff_ledger(ctx: &RunContext) -> fraclab::Result<Partial> {
    let spec = spec(ctx);
    let template = point_cutoff(1, 0.125, 2.0)?;
    // near (inside the inner plateau), mid (transition and beyond), far
    let probes = [Probe::Scaled(0.5), Probe::Scaled(1.5), Probe::Scaled(3.0), Probe::Scaled(12.0), Probe::Absolute(0.7), Probe::Absolute(10.0)];
    let report = verify::verify_cutoff_bound(&template, 0.5, &dyadic(3, 7), &probes, None, &spec)?;
    let mut p = Partial::new();
    p.checks.push(Check::flag("constant_stable_across_eps", report.stable));
    p.tables.push(ledger_table("c04_point_cutoff", "|(-Delta)^{1/2} eta_eps| <= C eps^{-1} (1+|x|/eps)^{-2} + C (1+|x|)^{-2} in R^1", &report));
    p.reports.push(report);
    Ok(p)
}

fn manifold_cutoff_ledger(ctx: &RunContext) -> fraclab::Result<Partial> {
    let spec = spec(ctx);
    let circle = CompactSet::new(3, SetVariant::CircleInR3 { center: [0.0; 3], radius: 1.0, normal: [0.0, 0.0, 1.0] })?;
    let eps = dyadic(12, 15);
    let template = manifold_cutoff(&circle, eps[0], 0.25)?;
    let probes = [Probe::Scaled(4.0), Probe::Scaled(8.0), Probe::Scaled(16.0)];
    let report = verify::verify_cutoff_bound(&template, 0.5, &eps, &probes, None, &spec)?;
    let mut p = Partial::new();
    p.checks.push(Check::flag("constant_stable_across_eps", report.stable));
    p.tables.push(ledger_table(
        "c05_circle_cutoff",
        "|(-Delta)^{1/2} eta_eps| <= C eps^{-1} (1+d/eps)^{-3} + C (1+|x|)^{-4} near a unit circle in R^3",
        &report,
    ));
    p.reports.push(report);
    Ok(p)
}

fn capacity_energies(ctx: &RunContext) -> fraclab::Result<Partial> {
    let spec = spec(ctx);
    let set = CompactSet::point(vec![0.0])?;
    let seq = capacity_sequence(&set, 0.5, 6, 0.5)?;
    let report = verify::capacity_decay(&seq, 0.5, &dyadic(2, 6), &spec)?;
    let mut p = Partial::new();
    p.checks.push(Check::flag("energy_times_harmonic_sum_bounded", report.stable));
    let mut t = capacity_table(&report);
    t.name = "c06_capacity_energies".into();
    p.tables.push(t);
    p.reports.push(report);
    Ok(p)
}

fn tube_exponents(ctx: &RunContext) -> fraclab::Result<Partial> {
    let mc = McSpec { samples: 400_000, seed: ctx.seed, workers: ctx.workers };
    let radii = log_grid(1e-3, 1e-1, 7);
    let cases = [
        ("point", CompactSet::point(vec![0.0; 3])?, 1.0, vec![0.0; 3], 0.0),
        ("segment", CompactSet::new(3, SetVariant::Segment { a: vec![0.0; 3], b: vec![1.0, 0.0, 0.0] })?, 0.5, vec![0.5, 0.0, 0.0], 1.0),
        (
            "circle",
            CompactSet::new(3, SetVariant::CircleInR3 { center: [0.0; 3], radius: 1.0, normal: [0.0, 0.0, 1.0] })?,
            1.0,
            vec![1.0, 0.0, 0.0],
            1.0,
        ),
    ];
    let mut p = Partial::new();
    for (name, set, big_r, center, lambda) in cases {
        let (f, rows) = fit_lambda(&set, &radii, big_r, &center, &mc)?;
        p.checks.push(Check::near(&format!("lambda_{name}"), f.lambda_hat, lambda, 0.1));
        let mut t = Table::new(&format!("c07_tube_areas_{name}"), "|{d = r} cap B_R| <= C r^{n - 1 - lambda}", &["r", "area", "ci"]);
        for m in rows {
            t.push(vec![m.r, m.value, m.ci_halfwidth]);
        }
        p.tables.push(t);
    }
    let cantor = CompactSet::new(1, SetVariant::ProductCantor { ratio: 1.0 / 3.0, levels: 8, factors: 1 })?;
    let pairs: Vec<(f64, f64)> = (1..=5).map(|j| (3f64.powi(-(j + 1)), 1.0 / 3.0)).collect();
    let s = assouad_estimate(&cantor, &pairs)?;
    p.checks.push(Check::near("cantor_covering_exponent", s, 2f64.ln() / 3f64.ln(), 0.08));
    Ok(p)
}

fn bootstrap_arithmetic(_: &RunContext) -> fraclab::Result<Partial> {
    let mut p = Partial::new();
    let a = verify::bootstrap_exponents(3, 0.5, 1.2)?;
    p.checks.push(Check::flag("m0(3, 0.5, 1.2) = 3", a.m0 == Some(3)));
    let b = verify::bootstrap_exponents(3, 1.4, 2.0)?;
    p.checks.push(Check::flag("m0(3, 1.4, 2) = 1", b.m0 == Some(1)));
    let mut flag_mismatch = 0usize;
    let mut contradiction_gaps = 0usize;
    let mut t = Table::new("c08_bootstrap_grid", "m0 finite exactly when p < n / (n - 2 gamma)", &["n", "gamma", "p", "m0"]);
    for n in [2usize, 3, 5] {
        let nf = n as f64;
        for i in 0..10 {
            for j in 0..10 {
                let gamma = (i as f64 + 0.5) / 10.0 * nf / 2.0;
                let crit = nf / (nf - 2.0 * gamma);
                // grid straddles the critical exponent
                let p_val = 1.0 + (crit - 1.0) * (0.1 + 0.2 * j as f64);
                let plan = verify::bootstrap_exponents(n, gamma, p_val)?;
                flag_mismatch += (plan.m0.is_none() != (p_val >= crit)) as usize;
                contradiction_gaps += (plan.subcritical && !plan.contradiction_holds) as usize;
                t.push(vec![nf, gamma, p_val, plan.m0.map_or(f64::INFINITY, |m| m as f64)]);
            }
        }
    }
    p.checks.push(Check::at_most("infinite_flag_mismatches", flag_mismatch as f64, 0.0, 0.0));
    p.checks.push(Check::at_most("subcritical_without_contradiction", contradiction_gaps as f64, 0.0, 0.0));
    p.tables.push(t);
    Ok(p)
}

fn removability(ctx: &RunContext) -> fraclab::Result<Partial> {
    let mc = McSpec { samples: 400_000, seed: ctx.seed, workers: ctx.workers };
    let set = CompactSet::point(vec![0.0; 3])?;
    let u = ScalarField::new(3, FieldKind::PowerLaw { alpha: 2.0 })?;
    let report = verify::removability_ledger(&u, (1.0, 1.0), 1.5, 0.5, &set, &dyadic(3, 7), &mc)?;
    let worst = report
        .samples
        .iter()
        .map(|s| (s.input["near_mass"] - 8.0 * PI * s.input["eps"]).abs() / (8.0 * PI * s.input["eps"]))
        .fold(0.0, f64::max);
    let mut p = Partial::new();
    p.checks.push(Check::at_most("near_mass_relative_error", worst, 1e-6, 0.0));
    p.checks.push(Check::flag("weighted_mass_bounded", report.stable));
    p.tables.push(ledger_table("c09_removability", "eps^{-1} int_{B_{2 eps}} |x|^{-2} bounded in eps", &report));
    p.reports.push(report);
    Ok(p)
}

fn superharmonicity(ctx: &RunContext) -> fraclab::Result<Partial> {
    let spec = spec(ctx);
    let f = ScalarField::new(3, FieldKind::BallIndicator { radius: 1.0 })?;
    let points = verify::sample_ball_points(3, 3.0, 100, ctx.seed);
    let report = verify::superharmonic_check(&f, 0.8, &[0.2, 0.5], &points, &spec)?;
    let mut p = Partial::new();
    p.checks.push(Check::flag("evaluated_every_point", report.samples.len() == 200));
    let mut t = superharmonic_table(&report);
    t.name = "c10_superharmonic".into();
    p.tables.push(t);
    p.reports.push(report);
    Ok(p)
}

fn distance_properties(ctx: &RunContext) -> fraclab::Result<Partial> {
    let sets = vec![
        CompactSet::new(3, SetVariant::FinitePoints { points: vec![vec![0.0; 3], vec![1.0, 0.5, 0.0], vec![-0.5, 0.0, 1.0]] })?,
        CompactSet::new(3, SetVariant::Segment { a: vec![0.0; 3], b: vec![1.0, 1.0, 0.0] })?,
        CompactSet::new(3, SetVariant::Polyline { vertices: vec![vec![0.0; 3], vec![1.0, 0.0, 0.0], vec![1.0, 1.0, 1.0]] })?,
        CompactSet::new(3, SetVariant::CircleInR3 { center: [0.0; 3], radius: 1.0, normal: [0.0, 1.0, 1.0] })?,
        CompactSet::new(3, SetVariant::Sphere { center: vec![0.5, 0.0, 0.0], radius: 0.7 })?,
        CompactSet::new(1, SetVariant::ProductCantor { ratio: 1.0 / 3.0, levels: 8, factors: 1 })?,
        CompactSet::new(2, SetVariant::ProductCantor { ratio: 1.0 / 4.0, levels: 6, factors: 2 })?,
    ];
    let mut p = Partial::new();
    for (k, set) in sets.iter().enumerate() {
        let n = set.dim;
        let pts = verify::sample_ball_points(n, 2.5, 20_000, ctx.seed.wrapping_add(k as u64));
        let mut worst_lip = f64::NEG_INFINITY;
        let mut worst_eik = 0f64;
        let mut differentiable = 0usize;
        for pair in pts.chunks(2) {
            let (x, y) = (&pair[0], &pair[1]);
            let dxy = x.iter().zip(y).map(|(a, b)| (a - b) * (a - b)).sum::<f64>().sqrt();
            worst_lip = worst_lip.max((set.distance(x) - set.distance(y)).abs() - dxy);
            if let Ok(g) = set.distance_gradient(x) {
                differentiable += 1;
                worst_eik = worst_eik.max((g.iter().map(|v| v * v).sum::<f64>().sqrt() - 1.0).abs());
            }
        }
        let label = format!("{}_{}", k, variant_name(&set.variant));
        p.checks.push(Check::at_most(&format!("lipschitz_excess_{label}"), worst_lip, 0.0, 1e-12));
        p.checks.push(Check::at_most(&format!("eikonal_deviation_{label}"), worst_eik, 0.0, 1e-12));
        p.checks.push(Check::at_least(&format!("differentiable_points_{label}"), differentiable as f64, 1.0, 0.0));
    }
    Ok(p)
}

fn variant_name(v: &SetVariant) -> &'static str {
    match v {
        SetVariant::FinitePoints { .. } => "points",
        SetVariant::Segment { .. } => "segment",
        SetVariant::Polyline { .. } => "polyline",
        SetVariant::CircleInR3 { .. } => "circle",
        SetVariant::Sphere { .. } => "sphere",
        SetVariant::ProductCantor { .. } => "cantor",
    }
}
