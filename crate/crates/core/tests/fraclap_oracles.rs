use fraclab::fields::{FieldKind, ScalarField};
use fraclab::fraclap::{fourier_oracle, frac_laplacian, frac_laplacian_radial, FracOrder, QuadratureSpec};
use fraclab::special::gamma;

fn at(n: usize, r: f64) -> Vec<f64> {
    let mut x = vec![0.0; n];
    x[0] = r;
    x
}

/// `(-Delta)^s (1+|x|^2)^{-(n-2s)/2} = 4^s Gamma((n+2s)/2) / Gamma((n-2s)/2) (1+|x|^2)^{-(n+2s)/2}`.
fn bubble_exact(n: usize, s: f64, r: f64) -> f64 {
    let nf = n as f64;
    4f64.powf(s) * gamma((nf + 2.0 * s) / 2.0) / gamma((nf - 2.0 * s) / 2.0) * (1.0 + r * r).powf(-(nf + 2.0 * s) / 2.0)
}

#[test]
fn bubble_half_laplacian_three_dimensions() {
    let f = ScalarField::new(3, FieldKind::Bubble { sigma: 0.5 }).unwrap();
    let o = FracOrder::new(3, 0.5).unwrap();
    let spec = QuadratureSpec::default();
    for i in 0..20 {
        let r = 5.0 * i as f64 / 19.0;
        let a = frac_laplacian(&f, &o, &at(3, r), &spec).unwrap();
        let b = frac_laplacian_radial(&f, &o, r, &spec).unwrap();
        let c = fourier_oracle(&f, &o, r).unwrap();
        let e = bubble_exact(3, 0.5, r);
        println!("r={r:.3} A={:.12e} B={:.12e} F={:.12e} exact={e:.12e} errA={:.1e} errF={:.1e}", a.value, b.value, c.value, a.abs_error, c.abs_error);
        assert!((a.value - e).abs() <= 1e-8 * e.abs().max(1e-3), "A at {r}");
        assert!((b.value - e).abs() <= 1e-7 * e.abs().max(1e-3), "B at {r}");
        assert!((c.value - e).abs() <= 1e-8 * e.abs().max(1e-3), "F at {r}");
    }
}

#[test]
fn inverse_distance_maps_to_inverse_square() {
    // (-Delta)^{1/2} |x|^{-1} = (2 / pi) |x|^{-2} in three dimensions
    let f = ScalarField::new(3, FieldKind::PowerLaw { alpha: 1.0 }).unwrap();
    let o = FracOrder::new(3, 0.5).unwrap();
    for &r in &[0.5, 1.0, 4.0] {
        let a = frac_laplacian(&f, &o, &at(3, r), &QuadratureSpec::default()).unwrap();
        let c = a.value * r * r;
        println!("r={r} C={c:.12} err={:.2e}", a.abs_error);
        assert!((c - 2.0 / std::f64::consts::PI).abs() < 1e-7);
    }
}

#[test]
fn routes_agree_on_gaussian_and_bubble() {
    let spec = QuadratureSpec::default();
    for n in [1usize, 3] {
        for s in [0.25, 0.5, 0.75] {
            for kind in [FieldKind::Gaussian, FieldKind::Bubble { sigma: s }] {
                let f = ScalarField::new(n, kind.clone()).unwrap();
                let o = FracOrder::new(n, s).unwrap();
                let mut worst = 0f64;
                for i in 0..20 {
                    let r = 5.0 * i as f64 / 19.0;
                    let a = frac_laplacian(&f, &o, &at(n, r), &spec).unwrap();
                    let c = fourier_oracle(&f, &o, r).unwrap();
                    let ratio = (a.value - c.value).abs() / (a.abs_error + c.abs_error);
                    worst = worst.max(ratio);
                    assert!(a.agrees(&c, 1.0), "n={n} s={s} {kind:?} r={r}: {a:?} vs {c:?}");
                }
                println!("n={n} s={s} {kind:?}: worst diff/err = {worst:.3}");
            }
        }
    }
}
