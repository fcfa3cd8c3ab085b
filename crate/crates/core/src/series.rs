//! Truncated Taylor arithmetic: univariate [`Series`] and multivariate [`Jet`].
//!
//! Catalog fields are evaluated on jets to get exact derivatives up to a
//! fixed order without symbolic algebra.

use std::collections::HashMap;
use std::sync::{Arc, Mutex, OnceLock};

/// Univariate truncated power series `sum c_k (t - t0)^k`.
#[derive(Debug, Clone, PartialEq)]
pub struct Series {
    pub c: Vec<f64>,
}

impl Series {
    pub fn constant(v: f64, order: usize) -> Self {
        let mut c = vec![0.0; order + 1];
        c[0] = v;
        Self { c }
    }

    /// The identity `t` expanded at `t0`.
    pub fn variable(t0: f64, order: usize) -> Self {
        let mut c = vec![0.0; order + 1];
        c[0] = t0;
        if order >= 1 {
            c[1] = 1.0;
        }
        Self { c }
    }

    pub fn order(&self) -> usize {
        self.c.len() - 1
    }

    pub fn value(&self) -> f64 {
        self.c[0]
    }

    /// k-th derivative at the expansion point.
    pub fn derivative(&self, k: usize) -> f64 {
        let mut f = 1.0;
        for i in 2..=k {
            f *= i as f64;
        }
        self.c.get(k).copied().unwrap_or(0.0) * f
    }

    fn zip(&self, o: &Self, f: impl Fn(f64, f64) -> f64) -> Self {
        let k = self.order().min(o.order());
        Self { c: (0..=k).map(|i| f(self.c[i], o.c[i])).collect() }
    }

    pub fn add(&self, o: &Self) -> Self {
        self.zip(o, |a, b| a + b)
    }

    pub fn sub(&self, o: &Self) -> Self {
        self.zip(o, |a, b| a - b)
    }

    pub fn scale(&self, s: f64) -> Self {
        Self { c: self.c.iter().map(|v| v * s).collect() }
    }

    pub fn offset(&self, s: f64) -> Self {
        let mut r = self.clone();
        r.c[0] += s;
        r
    }

    pub fn mul(&self, o: &Self) -> Self {
        let k = self.order().min(o.order());
        let mut c = vec![0.0; k + 1];
        for i in 0..=k {
            for j in 0..=(k - i) {
                c[i + j] += self.c[i] * o.c[j];
            }
        }
        Self { c }
    }

    pub fn recip(&self) -> Self {
        let a = &self.c;
        let k = self.order();
        let mut b = vec![0.0; k + 1];
        b[0] = 1.0 / a[0];
        for n in 1..=k {
            let s: f64 = (1..=n).map(|j| a[j] * b[n - j]).sum();
            b[n] = -s / a[0];
        }
        Self { c: b }
    }

    pub fn div(&self, o: &Self) -> Self {
        self.mul(&o.recip())
    }

    pub fn exp(&self) -> Self {
        let a = &self.c;
        let k = self.order();
        let mut b = vec![0.0; k + 1];
        b[0] = a[0].exp();
        for n in 1..=k {
            let s: f64 = (1..=n).map(|j| j as f64 * a[j] * b[n - j]).sum();
            b[n] = s / n as f64;
        }
        Self { c: b }
    }

    pub fn ln(&self) -> Self {
        let a = &self.c;
        let k = self.order();
        let mut b = vec![0.0; k + 1];
        b[0] = a[0].ln();
        for n in 1..=k {
            let s: f64 = (1..n).map(|j| j as f64 * b[j] * a[n - j]).sum();
            b[n] = (a[n] - s / n as f64) / a[0];
        }
        Self { c: b }
    }

    /// `self^p` for a positive leading coefficient.
    pub fn powf(&self, p: f64) -> Self {
        let a = &self.c;
        let k = self.order();
        let mut b = vec![0.0; k + 1];
        b[0] = a[0].powf(p);
        for n in 1..=k {
            let s: f64 = (1..=n)
                .map(|j| ((p + 1.0) * j as f64 - n as f64) * a[j] * b[n - j])
                .sum();
            b[n] = s / (n as f64 * a[0]);
        }
        Self { c: b }
    }

    pub fn sqrt(&self) -> Self {
        self.powf(0.5)
    }

    /// Formal derivative, one order lower.
    pub fn deriv(&self) -> Self {
        if self.order() == 0 {
            return Self::constant(0.0, 0);
        }
        Self { c: (1..self.c.len()).map(|k| k as f64 * self.c[k]).collect() }
    }

    /// Taylor coefficients of `g(h)` where `self` holds the coefficients of
    /// `g` at `h.value()`.
    pub fn compose(&self, h: &Series) -> Series {
        let k = self.order().min(h.order());
        let mut dh = h.clone();
        dh.c.truncate(k + 1);
        dh.c[0] = 0.0;
        let mut r = Series::constant(self.c[k], k);
        for j in (0..k).rev() {
            r = r.mul(&dh).offset(self.c[j]);
        }
        r
    }
}

/// Radial Laplacian in the variable `t = |x|^2`: for `f(x) = g(|x|^2)`,
/// `-Delta f = -(4 t g'' + 2 n g')`. Returns a series two orders lower.
pub fn neg_laplacian_in_t(g: &Series, n: usize, t0: f64) -> Series {
    if g.order() < 2 {
        return Series::constant(0.0, 0);
    }
    let d1 = g.deriv();
    let d2 = d1.deriv();
    let k = d2.order();
    let mut d1 = d1;
    d1.c.truncate(k + 1);
    let t = Series::variable(t0, k);
    t.mul(&d2).scale(4.0).add(&d1.scale(2.0 * n as f64)).scale(-1.0)
}

/// Monomial bookkeeping for jets in `n` variables up to total order `k`.
#[derive(Debug)]
pub struct MonomialTable {
    pub n: usize,
    pub order: usize,
    pub exps: Vec<Vec<u8>>,
    index: HashMap<Vec<u8>, usize>,
    products: Vec<(usize, usize, usize)>,
}

impl MonomialTable {
    fn build(n: usize, order: usize) -> Self {
        let mut exps: Vec<Vec<u8>> = Vec::new();
        for deg in 0..=order {
            let mut cur = vec![0u8; n];
            enumerate(n, deg, 0, &mut cur, &mut exps);
        }
        let index: HashMap<Vec<u8>, usize> =
            exps.iter().enumerate().map(|(i, e)| (e.clone(), i)).collect();
        let degs: Vec<usize> = exps.iter().map(|e| e.iter().map(|&v| v as usize).sum()).collect();
        let mut products = Vec::new();
        for i in 0..exps.len() {
            for j in 0..exps.len() {
                if degs[i] + degs[j] <= order {
                    let e: Vec<u8> = exps[i].iter().zip(&exps[j]).map(|(a, b)| a + b).collect();
                    products.push((i, j, index[&e]));
                }
            }
        }
        Self { n, order, exps, index, products }
    }

    pub fn get(n: usize, order: usize) -> Arc<MonomialTable> {
        static CACHE: OnceLock<Mutex<HashMap<(usize, usize), Arc<MonomialTable>>>> = OnceLock::new();
        let cache = CACHE.get_or_init(|| Mutex::new(HashMap::new()));
        let mut guard = cache.lock().unwrap();
        guard
            .entry((n, order))
            .or_insert_with(|| Arc::new(MonomialTable::build(n, order)))
            .clone()
    }

    pub fn index_of(&self, e: &[u8]) -> Option<usize> {
        self.index.get(e).copied()
    }

    pub fn len(&self) -> usize {
        self.exps.len()
    }

    pub fn is_empty(&self) -> bool {
        self.exps.is_empty()
    }
}

fn enumerate(n: usize, left: usize, pos: usize, cur: &mut Vec<u8>, out: &mut Vec<Vec<u8>>) {
    if pos == n - 1 {
        cur[pos] = left as u8;
        out.push(cur.clone());
        return;
    }
    for v in (0..=left).rev() {
        cur[pos] = v as u8;
        enumerate(n, left - v, pos + 1, cur, out);
    }
    cur[pos] = 0;
}

/// Multivariate truncated Taylor polynomial around a point.
#[derive(Debug, Clone)]
pub struct Jet {
    pub table: Arc<MonomialTable>,
    pub c: Vec<f64>,
}

impl Jet {
    pub fn constant(n: usize, order: usize, v: f64) -> Self {
        let table = MonomialTable::get(n, order);
        let mut c = vec![0.0; table.len()];
        c[0] = v;
        Self { table, c }
    }

    /// Coordinate function `x_i` expanded at `x0`.
    pub fn coordinate(n: usize, order: usize, i: usize, x0: f64) -> Self {
        let mut j = Self::constant(n, order, x0);
        if order >= 1 {
            let mut e = vec![0u8; n];
            e[i] = 1;
            let k = j.table.index_of(&e).unwrap();
            j.c[k] = 1.0;
        }
        j
    }

    /// The coordinate jets of a point.
    pub fn point(x: &[f64], order: usize) -> Vec<Jet> {
        (0..x.len()).map(|i| Self::coordinate(x.len(), order, i, x[i])).collect()
    }

    pub fn value(&self) -> f64 {
        self.c[0]
    }

    pub fn order(&self) -> usize {
        self.table.order
    }

    pub fn add(&self, o: &Jet) -> Jet {
        Jet { table: self.table.clone(), c: self.c.iter().zip(&o.c).map(|(a, b)| a + b).collect() }
    }

    pub fn sub(&self, o: &Jet) -> Jet {
        Jet { table: self.table.clone(), c: self.c.iter().zip(&o.c).map(|(a, b)| a - b).collect() }
    }

    pub fn scale(&self, s: f64) -> Jet {
        Jet { table: self.table.clone(), c: self.c.iter().map(|a| a * s).collect() }
    }

    pub fn offset(&self, s: f64) -> Jet {
        let mut r = self.clone();
        r.c[0] += s;
        r
    }

    pub fn mul(&self, o: &Jet) -> Jet {
        let mut c = vec![0.0; self.c.len()];
        for &(i, j, k) in &self.table.products {
            c[k] += self.c[i] * o.c[j];
        }
        Jet { table: self.table.clone(), c }
    }

    /// Applies a univariate function given through its series action.
    pub fn map(&self, f: impl Fn(&Series) -> Series) -> Jet {
        let g = f(&Series::variable(self.value(), self.order()));
        let mut dh = self.clone();
        dh.c[0] = 0.0;
        let k = self.order();
        let mut r = Jet::constant(self.table.n, k, g.c[k]);
        for j in (0..k).rev() {
            r = r.mul(&dh).offset(g.c[j]);
        }
        r
    }

    /// `D^alpha` at the expansion point.
    pub fn derivative(&self, alpha: &[u8]) -> Option<f64> {
        let k = self.table.index_of(alpha)?;
        let fact: f64 = alpha.iter().map(|&a| (1..=a as u64).product::<u64>() as f64).product();
        Some(self.c[k] * fact)
    }

    /// Substitutes `x_i - x_i0 = args_i - args_i(0)` into the polynomial.
    pub fn compose(&self, args: &[Jet]) -> Jet {
        let n_out = args[0].table.n;
        let order = args[0].order();
        let shifted: Vec<Jet> = args.iter().map(|a| a.offset(-a.value())).collect();
        let mut powers: Vec<Vec<Jet>> = shifted
            .iter()
            .map(|a| vec![Jet::constant(n_out, order, 1.0), a.clone()])
            .collect();
        let mut out = Jet::constant(n_out, order, 0.0);
        for (idx, e) in self.table.exps.iter().enumerate() {
            if self.c[idx] == 0.0 {
                continue;
            }
            let mut term = Jet::constant(n_out, order, self.c[idx]);
            for (i, &p) in e.iter().enumerate() {
                while powers[i].len() <= p as usize {
                    let next = powers[i].last().unwrap().mul(&shifted[i]);
                    powers[i].push(next);
                }
                if p > 0 {
                    term = term.mul(&powers[i][p as usize]);
                }
            }
            out = out.add(&term);
        }
        out
    }

    /// Jet of `-Delta f`, two orders lower.
    pub fn neg_laplacian(&self) -> Jet {
        let n = self.table.n;
        let order = self.order().saturating_sub(2);
        let table = MonomialTable::get(n, order);
        let mut c = vec![0.0; table.len()];
        if self.order() >= 2 {
            for (idx, e) in self.table.exps.iter().enumerate() {
                for i in 0..n {
                    if e[i] >= 2 {
                        let mut f = e.clone();
                        f[i] -= 2;
                        if let Some(j) = table.index_of(&f) {
                            c[j] -= (e[i] as f64) * (e[i] as f64 - 1.0) * self.c[idx];
                        }
                    }
                }
            }
        }
        Jet { table, c }
    }

    /// `(-Delta)^k` at the expansion point, from derivatives of order `2k`.
    pub fn neg_laplacian_power(&self, k: usize) -> Option<f64> {
        if 2 * k > self.order() {
            return None;
        }
        let n = self.table.n;
        // Delta^k = sum_{|beta| = k} k!/beta! d^{2 beta}
        let mut total = 0.0;
        let mut betas = Vec::new();
        if k == 0 {
            return Some(self.value());
        }
        let mut cur = vec![0u8; n];
        enumerate(n, k, 0, &mut cur, &mut betas);
        let kf: f64 = (1..=k as u64).product::<u64>() as f64;
        for b in betas {
            let bf: f64 = b.iter().map(|&v| (1..=v as u64).product::<u64>() as f64).product();
            let two_b: Vec<u8> = b.iter().map(|v| 2 * v).collect();
            total += kf / bf * self.derivative(&two_b)?;
        }
        Some(if k % 2 == 0 { total } else { -total })
    }
}

/// Euclidean norm of a vector of jets.
pub fn jet_norm(v: &[Jet]) -> Jet {
    let mut s = v[0].mul(&v[0]);
    for j in &v[1..] {
        s = s.add(&j.mul(j));
    }
    s.map(|t| t.sqrt())
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;

    #[test]
    fn series_exp_ln_roundtrip() {
        let t = Series::variable(0.7, 6);
        let r = t.exp().ln();
        for (a, b) in r.c.iter().zip(&t.c) {
            assert_relative_eq!(a, b, epsilon = 1e-14);
        }
    }

    #[test]
    fn series_pow_matches_derivatives() {
        // (1+t)^{-1/2} at t = 0: derivatives 1, -1/2, 3/4, -15/8
        let s = Series::variable(0.0, 3).offset(1.0).powf(-0.5);
        assert_relative_eq!(s.derivative(1), -0.5, epsilon = 1e-15);
        assert_relative_eq!(s.derivative(2), 0.75, epsilon = 1e-15);
        assert_relative_eq!(s.derivative(3), -15.0 / 8.0, epsilon = 1e-14);
    }

    #[test]
    fn jet_derivatives_of_inverse_norm() {
        let x = Jet::point(&[1.0, 0.0, 0.0], 2);
        let r = jet_norm(&x).map(|s| s.recip());
        assert_relative_eq!(r.derivative(&[1, 0, 0]).unwrap(), -1.0, epsilon = 1e-14);
        assert_relative_eq!(r.derivative(&[2, 0, 0]).unwrap(), 2.0, epsilon = 1e-14);
        // harmonic away from the origin
        assert!(r.neg_laplacian_power(1).unwrap().abs() < 1e-13);
    }

    #[test]
    fn radial_laplacian_of_square() {
        // f = |x|^2 = t, -Delta f = -2n
        let g = Series::variable(2.0, 4);
        let l = neg_laplacian_in_t(&g, 3, 2.0);
        assert_relative_eq!(l.value(), -6.0, epsilon = 1e-14);
    }
}
