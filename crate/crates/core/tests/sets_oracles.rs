use std::f64::consts::PI;

use fraclab::mc::McSpec;
use fraclab::sets::{assouad_estimate, fit_lambda, tube_boundary_area, tube_volume, CompactSet, SetVariant};

fn mc(seed: u64) -> McSpec {
    McSpec { samples: 400_000, seed, workers: 0 }
}

fn segment() -> CompactSet {
    CompactSet::new(3, SetVariant::Segment { a: vec![0.0; 3], b: vec![1.0, 0.0, 0.0] }).unwrap()
}

fn circle() -> CompactSet {
    CompactSet::new(3, SetVariant::CircleInR3 { center: [0.0; 3], radius: 1.0, normal: [0.0, 0.0, 1.0] }).unwrap()
}

fn radii() -> Vec<f64> {
    (0..7).map(|i| 10f64.powf(-3.0 + i as f64 / 3.0)).collect()
}

#[test]
fn segment_tube_volume_matches_cylinder_with_caps() {
    let r = 0.1;
    let exact = PI * r * r + 4.0 / 3.0 * PI * r.powi(3);
    let m = tube_volume(&segment(), r, &mc(3)).unwrap();
    assert!((m.value - exact).abs() <= m.ci_halfwidth * 1.5, "{} vs {exact} ± {}", m.value, m.ci_halfwidth);
}

#[test]
fn point_shell_area_is_sphere_area() {
    let p = CompactSet::point(vec![0.0; 3]).unwrap();
    for &r in &[0.01, 0.3] {
        let m = tube_boundary_area(&p, r, 1.0, &[0.0; 3], &mc(5)).unwrap();
        let exact = 4.0 * PI * r * r;
        assert!((m.value - exact).abs() <= 2.0 * m.ci_halfwidth + 1e-3 * exact, "r={r}: {m:?}");
    }
}

#[test]
fn segment_lateral_area() {
    // inside B_{1/2}(midpoint) only the lateral cylinder is seen
    let r = 0.01;
    let m = tube_boundary_area(&segment(), r, 0.5, &[0.5, 0.0, 0.0], &mc(9)).unwrap();
    let exact = 2.0 * PI * r * 2.0 * (0.25 - r * r).sqrt();
    assert!((m.value - exact).abs() <= 2.0 * m.ci_halfwidth + 1e-3 * exact, "{m:?} vs {exact}");
}

#[test]
fn tube_exponents_of_smooth_sets() {
    let p = CompactSet::point(vec![0.0; 3]).unwrap();
    let (f, _) = fit_lambda(&p, &radii(), 1.0, &[0.0; 3], &mc(11)).unwrap();
    assert!(f.lambda_hat.abs() < 0.1, "{f:?}");
    let (f, _) = fit_lambda(&segment(), &radii(), 0.5, &[0.5, 0.0, 0.0], &mc(12)).unwrap();
    assert!((f.lambda_hat - 1.0).abs() < 0.1, "{f:?}");
    let (f, _) = fit_lambda(&circle(), &radii(), 1.0, &[1.0, 0.0, 0.0], &mc(13)).unwrap();
    assert!((f.lambda_hat - 1.0).abs() < 0.1, "{f:?}");
}

#[test]
fn covering_exponents() {
    let pairs: Vec<(f64, f64)> = (1..=5).map(|j| (3f64.powi(-(j + 1)), 1.0 / 3.0)).collect();
    let p = CompactSet::point(vec![0.0; 3]).unwrap();
    assert!(assouad_estimate(&p, &pairs).unwrap().abs() < 0.1);
    let s = assouad_estimate(&segment(), &pairs).unwrap();
    assert!((s - 1.0).abs() < 0.15, "segment {s}");
    let cantor = CompactSet::new(1, SetVariant::ProductCantor { ratio: 1.0 / 3.0, levels: 8, factors: 1 }).unwrap();
    let s = assouad_estimate(&cantor, &pairs).unwrap();
    assert!((s - 2f64.ln() / 3f64.ln()).abs() < 0.08, "cantor {s}");
}
