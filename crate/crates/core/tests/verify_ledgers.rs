use std::f64::consts::PI;

use fraclab::cutoffs::point_cutoff;
use fraclab::fields::{FieldKind, Profile, ScalarField};
use fraclab::fraclap::QuadratureSpec;
use fraclab::mc::McSpec;
use fraclab::sets::CompactSet;
use fraclab::verify::*;

#[test]
fn bootstrap_closing_index_on_grid() {
    assert_eq!(bootstrap_exponents(3, 0.5, 1.2).unwrap().m0, Some(3));
    assert_eq!(bootstrap_exponents(3, 1.4, 2.0).unwrap().m0, Some(1));
    for n in [2usize, 3, 5] {
        let nf = n as f64;
        for i in 0..10 {
            for j in 0..10 {
                let gamma = (i as f64 + 0.5) / 10.0 * nf / 2.0;
                let p = 1.05 + 0.3 * j as f64;
                let plan = bootstrap_exponents(n, gamma, p).unwrap();
                assert_eq!(plan.m0.is_none(), p >= nf / (nf - 2.0 * gamma), "n={n} gamma={gamma} p={p}");
                if plan.subcritical {
                    assert!(plan.contradiction_holds);
                }
            }
        }
    }
}

#[test]
fn inverse_square_removability_ledger() {
    let set = CompactSet::point(vec![0.0; 3]).unwrap();
    let u = ScalarField::new(3, FieldKind::PowerLaw { alpha: 2.0 }).unwrap();
    let eps: Vec<f64> = (3..=7).map(|k| 2f64.powi(-k)).collect();
    let r = removability_ledger(&u, (1.0, 1.0), 1.5, 0.5, &set, &eps, &McSpec::default()).unwrap();
    for s in &r.samples {
        let exact = 8.0 * PI * s.input["eps"];
        assert!((s.input["near_mass"] - exact).abs() <= 1e-6 * exact);
    }
    assert!(r.pass, "{:?}", r.checks);
}

#[test]
fn non_integrable_model_is_rejected() {
    let set = CompactSet::point(vec![0.0; 3]).unwrap();
    let u = ScalarField::new(3, FieldKind::PowerLaw { alpha: 3.0 }).unwrap();
    assert!(removability_ledger(&u, (1.0, 1.0), 1.5, 0.5, &set, &[0.1, 0.05], &McSpec::default()).is_err());
}

#[test]
fn segment_model_shell_ratios() {
    // u = d^{-1/2} around a segment in R^3: shells scale like 2^{-(2 - 1/2)}
    let set = CompactSet::new(3, fraclab::sets::SetVariant::Segment { a: vec![0.0; 3], b: vec![1.0, 0.0, 0.0] }).unwrap();
    let u = ScalarField::new(3, FieldKind::DistanceProfile { set: set.clone(), profile: Profile::Power { beta: 0.5 } }).unwrap();
    let eps: Vec<f64> = (4..=7).map(|k| 2f64.powi(-k)).collect();
    let r = removability_ledger(&u, (1.0, 1.0), 2.0, 0.4, &set, &eps, &McSpec::default()).unwrap();
    let c = r.checks.iter().find(|c| c.name == "dyadic_ratio_relative_deviation").unwrap();
    assert!(c.pass, "{c:?}");
}

#[test]
fn point_cutoff_ledger_is_stable() {
    let tpl = point_cutoff(1, 0.125, 2.0).unwrap();
    let eps: Vec<f64> = (3..=7).map(|k| 2f64.powi(-k)).collect();
    let probes = [Probe::Scaled(0.5), Probe::Scaled(3.0), Probe::Absolute(0.7), Probe::Absolute(10.0)];
    let r = verify_cutoff_bound(&tpl, 0.5, &eps, &probes, None, &QuadratureSpec::default()).unwrap();
    assert!(r.pass && r.stable, "{:?}", r.group_constants);
    assert_eq!(r.samples.len(), eps.len() * probes.len());
}

#[test]
fn integer_order_is_rejected_by_cutoff_ledger() {
    let tpl = point_cutoff(1, 0.125, 2.0).unwrap();
    assert!(verify_cutoff_bound(&tpl, 1.0, &[0.125], &[Probe::Scaled(3.0)], None, &QuadratureSpec::default()).is_err());
}

#[test]
fn reports_serialize_deterministically() {
    let tpl = point_cutoff(1, 0.125, 2.0).unwrap();
    let run = || {
        let r = verify_cutoff_bound(&tpl, 0.5, &[0.125, 0.0625], &[Probe::Scaled(3.0)], None, &QuadratureSpec::default()).unwrap();
        serde_json::to_string(&r).unwrap()
    };
    assert_eq!(run(), run());
}
