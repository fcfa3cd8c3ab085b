//! Dispatch of a validated config to the numerical modules.

use std::fmt;

use serde_json::{json, Value};

use fraclab::cutoffs::{capacity_sequence, CapacitySequence};
use fraclab::fields::{FieldKind, ScalarField};
use fraclab::fraclap::{fourier_oracle, frac_laplacian, FracOrder, QuadratureSpec};
use fraclab::sets::{assouad_estimate, covering_number, fit_lambda};
use fraclab::verify::{self, LedgerReport};

use crate::config::{Command, ConfigInvalid, ExperimentConfig};
use crate::output::{Outcome, Table};
use crate::suite;

#[derive(Debug)]
pub enum RunError {
    Config(ConfigInvalid),
    Numerical(fraclab::Error),
}

impl fmt::Display for RunError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            RunError::Config(e) => write!(f, "{e}"),
            RunError::Numerical(e) => write!(f, "numerical error: {e}"),
        }
    }
}

impl std::error::Error for RunError {}

impl From<ConfigInvalid> for RunError {
    fn from(e: ConfigInvalid) -> Self {
        RunError::Config(e)
    }
}

impl From<fraclab::Error> for RunError {
    fn from(e: fraclab::Error) -> Self {
        RunError::Numerical(e)
    }
}

/// Seed and worker count in force for a run, after command-line overrides.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct RunContext {
    pub seed: u64,
    pub workers: usize,
}

impl RunContext {
    pub fn resolve(cfg: &ExperimentConfig, seed: Option<u64>, workers: Option<usize>) -> Self {
        Self {
            seed: seed.or(cfg.seed).unwrap_or(cfg.quadrature.seed),
            workers: workers.or(cfg.workers).unwrap_or(cfg.quadrature.workers),
        }
    }

    pub fn spec(&self, base: &QuadratureSpec) -> QuadratureSpec {
        QuadratureSpec { seed: self.seed, workers: self.workers, ..*base }
    }
}

/// Ledger samples as a table: sorted input keys, then the row verdict columns.
pub fn ledger_table(name: &str, description: &str, r: &LedgerReport) -> Table {
    let mut keys: Vec<String> = r.samples.iter().flat_map(|s| s.input.keys().cloned()).collect();
    keys.sort();
    keys.dedup();
    let mut cols: Vec<&str> = keys.iter().map(String::as_str).collect();
    cols.extend(["group", "lhs", "lhs_error", "rhs", "margin"]);
    let mut t = Table::new(name, description, &cols);
    for s in &r.samples {
        let mut row: Vec<f64> = keys.iter().map(|k| s.input.get(k).copied().unwrap_or(f64::NAN)).collect();
        row.extend([s.group, s.lhs, s.lhs_error, s.rhs, s.margin]);
        t.push(row);
    }
    t
}

fn ledger_outcome(command: Command, report: LedgerReport, extra: Value, tables: Vec<Table>) -> Outcome {
    Outcome { command, pass: report.pass, result: json!({ "ledger": report, "details": extra }), tables, stages: Vec::new() }
}

/// Optional `expect` check on a scalar result.
fn expectation(cfg: &ExperimentConfig, measured: f64) -> (bool, Value) {
    match cfg.expect {
        Some(e) => {
            let pass = (measured - e.value).abs() <= e.tolerance;
            (pass, json!({ "target": e.value, "tolerance": e.tolerance, "measured": measured, "pass": pass }))
        }
        None => (measured.is_finite(), Value::Null),
    }
}

/// Validates `cfg` for `cmd` and runs it.
pub fn execute(cmd: Command, cfg: &ExperimentConfig, ctx: RunContext) -> Result<Outcome, RunError> {
    cfg.validate(cmd)?;
    if cmd == Command::Suite {
        return Ok(suite::run_suite(ctx));
    }
    let spec = ctx.spec(&cfg.quadrature);
    let n = cfg.dim()?;
    Ok(match cmd {
        Command::Eval => {
            let f = cfg.field()?;
            let order = FracOrder::new(n, cfg.sigma()?)?;
            let pts = cfg.points(ctx.seed)?;
            let mut cols: Vec<String> = (0..n).map(|i| format!("x{i}")).collect();
            cols.extend(["value".into(), "abs_error".into()]);
            let col_refs: Vec<&str> = cols.iter().map(String::as_str).collect();
            let mut t = Table::new("eval", "(-Delta)^sigma f at the requested points", &col_refs);
            let mut values = Vec::new();
            for x in &pts {
                let v = frac_laplacian(&f, &order, x, &spec)?;
                let mut row = x.clone();
                row.extend([v.value, v.abs_error]);
                t.push(row);
                values.push(json!({ "x": x, "value": v.value, "abs_error": v.abs_error, "method": v.method }));
            }
            Outcome { command: cmd, pass: true, result: json!({ "sigma": order.sigma, "values": values }), tables: vec![t], stages: Vec::new() }
        }
        Command::Oracle => {
            let f = cfg.field()?;
            let order = FracOrder::new(n, cfg.sigma()?)?;
            let mut t = Table::new(
                "oracle",
                "real-space quadrature against the Fourier-Hankel oracle |xi|^{2 sigma} f^(xi)",
                &["r", "realspace", "realspace_error", "oracle", "oracle_error"],
            );
            let mut agree = true;
            let mut rows = Vec::new();
            for &r in &cfg.sweeps.radii {
                let mut x = vec![0.0; n];
                x[0] = r;
                let a = frac_laplacian(&f, &order, &x, &spec)?;
                let b = fourier_oracle(&f, &order, r)?;
                let ok = a.agrees(&b, 1.0);
                agree &= ok;
                t.push(vec![r, a.value, a.abs_error, b.value, b.abs_error]);
                rows.push(json!({ "r": r, "realspace": a, "oracle": b, "agree": ok }));
            }
            Outcome { command: cmd, pass: agree, result: json!({ "rows": rows }), tables: vec![t], stages: Vec::new() }
        }
        Command::Decay => {
            let f = cfg.field()?;
            let (fit, report) = verify::verify_phi0_decay(&f, cfg.sigma()?, &cfg.sweeps.radii, &spec)?;
            let mut t = Table::new(
                "decay",
                "|(-Delta)^sigma phi(x)| against C (1+|x|)^{-2 sigma - min(rho, n)}, with ln|x| at rho = n",
                &["r", "value", "fitted"],
            );
            for s in &report.samples {
                let r = s.input["r"];
                let fitted = (fit.intercept + fit.slope * r.ln()).exp() * if fit.regime == Some(verify::Regime::EqualNLog) { (2.0 + r).ln() } else { 1.0 };
                t.push(vec![r, s.lhs, fitted]);
            }
            let extra = json!({ "fit": fit });
            ledger_outcome(cmd, report, extra, vec![t])
        }
        Command::CutoffBound => {
            let template = cfg.cutoff_template()?;
            let report = verify::verify_cutoff_bound(&template, cfg.sigma()?, &cfg.sweeps.eps, &cfg.sweeps.probes, cfg.problem.lambda, &spec)?;
            let t = ledger_table(
                "cutoff_bound",
                "|(-Delta)^sigma eta_eps(x)| against its scale-covariant envelope in eps and d(x)",
                &report,
            );
            ledger_outcome(cmd, report, Value::Null, vec![t])
        }
        Command::Truncation => {
            let f = cfg.field()?;
            let g = cfg.problem.gamma.expect("validated");
            let k = cfg.problem.k_radius.expect("validated");
            let report = verify::verify_truncation_convergence(&f, g, &cfg.sweeps.eps, k, &cfg.sweeps.bound_radii, &spec)?;
            let t = ledger_table(
                "truncation",
                "|(-Delta)^gamma (phi eta(eps x))| against C (1+|x|)^{-2 gamma - rho} uniformly in eps",
                &report,
            );
            ledger_outcome(cmd, report, Value::Null, vec![t])
        }
        Command::Tube => {
            let set = cfg.compact_set()?;
            let big_r = cfg.problem.big_r.expect("validated");
            let center = cfg.problem.center.clone().expect("validated");
            let (fit, rows) = fit_lambda(&set, &cfg.sweeps.radii, big_r, &center, &spec.mc())?;
            let mut t = Table::new("tube_areas", "|{d = r} cap B_R| against C r^{n - 1 - lambda}", &["r", "area", "ci"]);
            for m in &rows {
                t.push(vec![m.r, m.value, m.ci_halfwidth]);
            }
            let (pass, check) = expectation(cfg, fit.lambda_hat);
            Outcome { command: cmd, pass, result: json!({ "fit": fit, "areas": rows, "check": check }), tables: vec![t], stages: Vec::new() }
        }
        Command::Assouad => {
            let set = cfg.compact_set()?;
            let s = assouad_estimate(&set, &cfg.sweeps.scale_pairs)?;
            let center = set.samples(f64::INFINITY).into_iter().next().unwrap_or_else(|| vec![0.0; n]);
            let mut t = Table::new("covering", "covering numbers M(r, R) against C (R/r)^s", &["r", "R", "count"]);
            for &(r, big) in &cfg.sweeps.scale_pairs {
                t.push(vec![r, big, covering_number(&set, r, big, &center) as f64]);
            }
            let (pass, check) = expectation(cfg, s);
            Outcome { command: cmd, pass, result: json!({ "exponent": s, "check": check }), tables: vec![t], stages: Vec::new() }
        }
        Command::Capacity => {
            let set = cfg.compact_set()?;
            let sigma = cfg.sigma()?;
            let seq = capacity_sequence(&set, sigma, cfg.problem.k_max.expect("validated"), cfg.problem.eps0.expect("validated"))?;
            let report = verify::capacity_decay(&seq, sigma, &cfg.sweeps.cross_ratios, &spec)?;
            let t = capacity_table(&report);
            let extra = json!({ "eps_schedule": seq.eps_schedule, "S_k": seq.s_k });
            ledger_outcome(cmd, report, extra, vec![t])
        }
        Command::Removability => {
            let u = cfg.field()?;
            let set = cfg.compact_set()?;
            let report = verify::removability_ledger(&u, cfg.problem.f_bounds.expect("validated"), cfg.p()?, cfg.gamma()?, &set, &cfg.sweeps.eps, &spec.mc())?;
            let t = ledger_table(
                "removability",
                "eps^{-2 gamma} int_{N_{2 eps}} u against a constant, for the model u = c d^{-beta}",
                &report,
            );
            ledger_outcome(cmd, report, Value::Null, vec![t])
        }
        Command::Bootstrap => {
            let plan = verify::bootstrap_exponents(n, cfg.gamma()?, cfg.p()?)?;
            let mut t = Table::new("bootstrap", "partial sums s_m = sum_{k <= m} p^{-k}", &["m", "s_m"]);
            for (i, s) in plan.s_m.iter().enumerate() {
                t.push(vec![(i + 1) as f64, *s]);
            }
            Outcome { command: cmd, pass: true, result: json!({ "plan": plan }), tables: vec![t], stages: Vec::new() }
        }
        Command::Superharmonic => {
            let f = cfg.field()?;
            let g = cfg.gamma()?;
            let pts = cfg.points(ctx.seed)?;
            let report = verify::superharmonic_check(&f, g, cfg.problem.sigma_list.as_deref().unwrap_or_default(), &pts, &spec)?;
            let t = superharmonic_table(&report);
            let weighted = verify::weighted_finiteness(&f, g, 1.0, 1e-8)?;
            let l_s = if cfg.sweeps.s_list.is_empty() {
                Vec::new()
            } else {
                let u = ScalarField::new(f.dim, FieldKind::RieszPotential { density: Box::new(f.kind.clone()), gamma: g })?;
                verify::l_s_membership(&u, &cfg.sweeps.s_list, 1e-6)?
            };
            ledger_outcome(cmd, report, json!({ "weighted_integral": weighted, "potential_l_s": l_s }), vec![t])
        }
        Command::Suite => unreachable!(),
    })
}

pub fn capacity_table(report: &LedgerReport) -> Table {
    let mut t = Table::new("capacity_energies", "E(psi_k) S_k bounded for the harmonic-weighted cutoff sequence", &["k", "S_k", "E", "E_times_S_k"]);
    for s in &report.samples {
        let sk = s.input["S_k"];
        t.push(vec![s.input["k"], sk, s.lhs, s.lhs * sk]);
    }
    debug_assert!(report.samples.iter().all(|s| (s.input["S_k"] - CapacitySequence::harmonic(s.input["k"] as usize)).abs() < 1e-12));
    t
}

pub fn superharmonic_table(report: &LedgerReport) -> Table {
    let mut t = Table::new(
        "superharmonic",
        "(-Delta)^sigma I_gamma F >= c |F|_1 (|x| + R)^{2(gamma - sigma) - n} for F >= 0 in B_R",
        &["sigma", "r", "kernel_route", "direct_route", "direct_error", "lower_bound"],
    );
    for s in &report.samples {
        t.push(vec![s.input["sigma"], s.input["r"], s.input["kernel_route"], s.input["direct_route"], s.input["direct_error"], s.lhs]);
    }
    t
}
