//! One-dimensional quadrature building blocks: adaptive Gauss–Kronrod,
//! Gauss–Legendre rules, geometrically graded panels and sphere rules.

use std::collections::BinaryHeap;
use std::cmp::Ordering;
use std::f64::consts::PI;
use std::sync::{Mutex, OnceLock};
use std::collections::HashMap;

const XGK: [f64; 8] = [
    0.991455371120812639206854697526329,
    0.949107912342758524526189684047851,
    0.864864423359769072789712788640926,
    0.741531185599394439863864773280788,
    0.586087235467691130294144845693013,
    0.405845151377397166906606412076961,
    0.207784955007898467600689403773245,
    0.0,
];
const WGK: [f64; 8] = [
    0.022935322010529224963732008058970,
    0.063092092629978553290700663189204,
    0.104790010322250183839876322541518,
    0.140653259715525918745189590510238,
    0.169004726639267902826583426598550,
    0.190350578064785409913256402421014,
    0.204432940075298892414161999234649,
    0.209482141084727828012999174891714,
];
const WG: [f64; 4] = [
    0.129484966168869693270611432679082,
    0.279705391489276667901467771423780,
    0.381830050505118944950369775488975,
    0.417959183673469387755102040816327,
];

/// Value with an absolute error estimate.
#[derive(Debug, Clone, Copy, Default, PartialEq)]
pub struct Estimate {
    pub value: f64,
    pub abs_error: f64,
}

impl Estimate {
    pub fn new(value: f64, abs_error: f64) -> Self {
        Self { value, abs_error }
    }

    pub fn exact(value: f64) -> Self {
        Self { value, abs_error: 0.0 }
    }

    pub fn scale(self, c: f64) -> Self {
        Self { value: self.value * c, abs_error: self.abs_error * c.abs() }
    }
}

impl std::ops::Add for Estimate {
    type Output = Estimate;
    fn add(self, o: Estimate) -> Estimate {
        Estimate { value: self.value + o.value, abs_error: self.abs_error + o.abs_error }
    }
}

impl std::ops::Sub for Estimate {
    type Output = Estimate;
    fn sub(self, o: Estimate) -> Estimate {
        Estimate { value: self.value - o.value, abs_error: self.abs_error + o.abs_error }
    }
}

impl std::iter::Sum for Estimate {
    fn sum<I: Iterator<Item = Estimate>>(iter: I) -> Estimate {
        iter.fold(Estimate::default(), |a, b| a + b)
    }
}

/// Tolerances for the adaptive integrator.
#[derive(Debug, Clone, Copy)]
pub struct Tolerance {
    pub abs: f64,
    pub rel: f64,
    pub max_intervals: usize,
}

impl Default for Tolerance {
    fn default() -> Self {
        Self { abs: 1e-13, rel: 1e-10, max_intervals: 400 }
    }
}

impl Tolerance {
    pub fn new(abs: f64, rel: f64) -> Self {
        Self { abs, rel, ..Self::default() }
    }
}

struct Segment {
    a: f64,
    b: f64,
    value: f64,
    err: f64,
    resabs: f64,
}

impl PartialEq for Segment {
    fn eq(&self, o: &Self) -> bool {
        self.err == o.err
    }
}
impl Eq for Segment {}
impl PartialOrd for Segment {
    fn partial_cmp(&self, o: &Self) -> Option<Ordering> {
        Some(self.cmp(o))
    }
}
impl Ord for Segment {
    fn cmp(&self, o: &Self) -> Ordering {
        self.err.partial_cmp(&o.err).unwrap_or(Ordering::Equal)
    }
}

fn gk15<F: FnMut(f64) -> f64>(f: &mut F, a: f64, b: f64) -> Segment {
    let c = 0.5 * (a + b);
    let h = 0.5 * (b - a);
    let fc = f(c);
    let mut k = fc * WGK[7];
    let mut g = fc * WG[3];
    let mut resabs = fc.abs() * WGK[7];
    for j in 0..7 {
        let dx = h * XGK[j];
        let f1 = f(c - dx);
        let f2 = f(c + dx);
        k += WGK[j] * (f1 + f2);
        resabs += WGK[j] * (f1.abs() + f2.abs());
        if j % 2 == 1 {
            g += WG[j / 2] * (f1 + f2);
        }
    }
    let value = k * h;
    let resabs = resabs * h.abs();
    let err = ((k - g) * h).abs().max(50.0 * f64::EPSILON * resabs);
    Segment { a, b, value, err, resabs }
}

/// Globally adaptive Gauss–Kronrod (7/15) integration of `f` on `[a, b]`.
///
/// Non-finite values are reported through a non-finite `value`.
pub fn integrate<F: FnMut(f64) -> f64>(mut f: F, a: f64, b: f64, tol: Tolerance) -> Estimate {
    if a == b {
        return Estimate::exact(0.0);
    }
    let first = gk15(&mut f, a, b);
    let mut total = first.value;
    let mut total_err = first.err;
    let mut heap = BinaryHeap::new();
    heap.push(first);
    let mut intervals = 1;
    while total_err > tol.abs.max(tol.rel * total.abs()) && intervals < tol.max_intervals {
        let worst = match heap.pop() {
            Some(s) => s,
            None => break,
        };
        if !worst.value.is_finite() {
            heap.push(worst);
            break;
        }
        let m = 0.5 * (worst.a + worst.b);
        if m <= worst.a || m >= worst.b {
            heap.push(worst);
            break;
        }
        let left = gk15(&mut f, worst.a, m);
        let right = gk15(&mut f, m, worst.b);
        total += left.value + right.value - worst.value;
        total_err += left.err + right.err - worst.err;
        heap.push(left);
        heap.push(right);
        intervals += 1;
    }
    // re-sum to avoid drift from the incremental updates
    let mut value = 0.0;
    let mut err = 0.0;
    let mut resabs = 0.0;
    for s in heap.iter() {
        value += s.value;
        err += s.err;
        resabs += s.resabs;
    }
    Estimate::new(value, err.max(1e3 * f64::EPSILON * resabs))
}

/// Integrates over consecutive intervals between sorted breakpoints.
pub fn integrate_breaks<F: FnMut(f64) -> f64>(mut f: F, points: &[f64], tol: Tolerance) -> Estimate {
    points
        .windows(2)
        .map(|w| integrate(&mut f, w[0], w[1], tol))
        .sum()
}

/// `int_lo^inf f(t) dt` for `f(t) ~ t^{-1-mu}`, through `t = lo v^{-1/mu}`,
/// which makes the transformed integrand bounded at `v = 0`.
/// `breaks` are kinks of `f` beyond `lo`.
pub fn power_tail<F: FnMut(f64) -> f64>(mut f: F, lo: f64, mu: f64, breaks: &[f64], tol: Tolerance) -> Estimate {
    let mu = mu.min(1.0);
    let pts = breakpoints(0.0, 1.0, breaks.iter().filter(|b| **b > lo).map(|b| (lo / b).powf(mu)));
    let pts = {
        // resolve v -> 0 where t grows without bound
        let first = pts[1];
        breakpoints(0.0, 1.0, pts.iter().copied().chain(graded_panels(first * 1e-8, first)))
    };
    integrate_breaks(
        |v| {
            if v == 0.0 {
                return 0.0;
            }
            let t = lo * v.powf(-1.0 / mu);
            f(t) * t / (mu * v)
        },
        &pts,
        tol,
    )
}

/// Sorted breakpoints in `[a, b]`, always containing both ends.
pub fn breakpoints(a: f64, b: f64, extra: impl IntoIterator<Item = f64>) -> Vec<f64> {
    let mut pts: Vec<f64> = extra.into_iter().filter(|&p| p > a && p < b && p.is_finite()).collect();
    pts.push(a);
    pts.push(b);
    pts.sort_by(|x, y| x.partial_cmp(y).unwrap());
    pts.dedup_by(|x, y| (*x - *y).abs() <= 1e-14 * (1.0 + x.abs()));
    pts
}

/// Geometric panels `[lo * 2^j, lo * 2^{j+1}]` covering `[lo, hi]`.
pub fn graded_panels(lo: f64, hi: f64) -> Vec<f64> {
    let mut pts = vec![hi];
    let mut p = hi;
    while p * 0.5 > lo {
        p *= 0.5;
        pts.push(p);
    }
    pts.push(lo);
    pts.reverse();
    pts
}

/// Gauss–Legendre nodes and weights on `[-1, 1]`, cached per order.
pub fn gauss_legendre(n: usize) -> (Vec<f64>, Vec<f64>) {
    static CACHE: OnceLock<Mutex<HashMap<usize, (Vec<f64>, Vec<f64>)>>> = OnceLock::new();
    let cache = CACHE.get_or_init(|| Mutex::new(HashMap::new()));
    if let Some(r) = cache.lock().unwrap().get(&n) {
        return r.clone();
    }
    let mut x = vec![0.0; n];
    let mut w = vec![0.0; n];
    for i in 0..(n + 1) / 2 {
        let mut z = (PI * (i as f64 + 0.75) / (n as f64 + 0.5)).cos();
        let mut dp = 0.0;
        for _ in 0..100 {
            let (mut p0, mut p1) = (1.0, z);
            for k in 2..=n {
                let p2 = ((2 * k - 1) as f64 * z * p1 - (k - 1) as f64 * p0) / k as f64;
                p0 = p1;
                p1 = p2;
            }
            if n == 1 {
                p1 = z;
                p0 = 1.0;
            }
            dp = n as f64 * (z * p1 - p0) / (z * z - 1.0);
            let dz = p1 / dp;
            z -= dz;
            if dz.abs() < 1e-16 {
                break;
            }
        }
        if n == 1 {
            z = 0.0;
            dp = 1.0;
        }
        x[i] = -z;
        x[n - 1 - i] = z;
        let wi = 2.0 / ((1.0 - z * z) * dp * dp);
        w[i] = wi;
        w[n - 1 - i] = wi;
    }
    if n == 1 {
        w[0] = 2.0;
    }
    cache.lock().unwrap().insert(n, (x.clone(), w.clone()));
    (x, w)
}

/// Fixed Gauss–Legendre rule on `[a, b]`.
pub fn gauss_fixed<F: FnMut(f64) -> f64>(mut f: F, a: f64, b: f64, n: usize) -> f64 {
    let (x, w) = gauss_legendre(n);
    let c = 0.5 * (a + b);
    let h = 0.5 * (b - a);
    x.iter().zip(&w).map(|(xi, wi)| wi * f(c + h * xi)).sum::<f64>() * h
}

/// Unit directions with weights summing to the sphere area, for `n = 2, 3`.
/// The rule is invariant under `theta -> -theta`.
pub fn sphere_rule(n: usize, order: usize) -> Vec<(Vec<f64>, f64)> {
    match n {
        1 => vec![(vec![1.0], 1.0), (vec![-1.0], 1.0)],
        2 => {
            let m = 2 * order;
            (0..m)
                .map(|i| {
                    let t = 2.0 * PI * (i as f64 + 0.5) / m as f64;
                    (vec![t.cos(), t.sin()], 2.0 * PI / m as f64)
                })
                .collect()
        }
        3 => {
            let (ct, wt) = gauss_legendre(order);
            let m = 2 * order;
            let mut out = Vec::with_capacity(order * m);
            for (c, w) in ct.iter().zip(&wt) {
                let s = (1.0 - c * c).sqrt();
                for j in 0..m {
                    let p = 2.0 * PI * (j as f64 + 0.5) / m as f64;
                    out.push((vec![s * p.cos(), s * p.sin(), *c], w * 2.0 * PI / m as f64));
                }
            }
            out
        }
        _ => panic!("deterministic sphere rule only for n <= 3"),
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;

    #[test]
    fn gk_polynomial_and_smooth() {
        let r = integrate(|x| x * x, 0.0, 3.0, Tolerance::default());
        assert_relative_eq!(r.value, 9.0, max_relative = 1e-14);
        let r = integrate(|x: f64| x.exp(), 0.0, 1.0, Tolerance::default());
        assert_relative_eq!(r.value, std::f64::consts::E - 1.0, max_relative = 1e-13);
    }

    #[test]
    fn gk_endpoint_singularity() {
        let r = integrate(|x: f64| x.powf(-0.5), 0.0, 1.0, Tolerance::new(1e-12, 1e-10));
        assert!((r.value - 2.0).abs() < 1e-6, "{r:?}");
        assert!(r.abs_error >= (r.value - 2.0).abs());
    }

    #[test]
    fn gauss_legendre_exactness() {
        for n in [1, 2, 5, 16, 33] {
            let (x, w) = gauss_legendre(n);
            assert_relative_eq!(w.iter().sum::<f64>(), 2.0, max_relative = 1e-13);
            let deg = 2 * n - 2;
            let m: f64 = x.iter().zip(&w).map(|(xi, wi)| wi * xi.powi(deg as i32)).sum();
            assert_relative_eq!(m, 2.0 / (deg as f64 + 1.0), max_relative = 1e-12);
        }
    }

    #[test]
    fn sphere_rule_weights() {
        let s3: f64 = sphere_rule(3, 12).iter().map(|d| d.1).sum();
        assert_relative_eq!(s3, 4.0 * PI, max_relative = 1e-13);
        let z2: f64 = sphere_rule(3, 12).iter().map(|d| d.1 * d.0[2] * d.0[2]).sum();
        assert_relative_eq!(z2, 4.0 * PI / 3.0, max_relative = 1e-12);
    }

    #[test]
    fn graded_panels_cover() {
        let p = graded_panels(1e-3, 1.0);
        assert_eq!(p[0], 1e-3);
        assert_eq!(*p.last().unwrap(), 1.0);
        assert!(p.windows(2).all(|w| w[0] < w[1]));
    }
}
