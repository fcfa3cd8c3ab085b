//! Ordinary least squares on log-log data.

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct LineFit {
    pub slope: f64,
    pub intercept: f64,
    pub r_squared: f64,
}

/// Least-squares line through `(x, y)`. Perfectly flat data reports `r^2 = 1`.
pub fn line(x: &[f64], y: &[f64]) -> LineFit {
    assert_eq!(x.len(), y.len());
    let n = x.len() as f64;
    let mx = x.iter().sum::<f64>() / n;
    let my = y.iter().sum::<f64>() / n;
    let sxx: f64 = x.iter().map(|a| (a - mx) * (a - mx)).sum();
    let sxy: f64 = x.iter().zip(y).map(|(a, b)| (a - mx) * (b - my)).sum();
    let syy: f64 = y.iter().map(|b| (b - my) * (b - my)).sum();
    let slope = sxy / sxx;
    let intercept = my - slope * mx;
    let r_squared = if syy <= 1e-30 * (1.0 + my * my) {
        1.0
    } else {
        (sxy * sxy / (sxx * syy)).clamp(0.0, 1.0)
    };
    LineFit { slope, intercept, r_squared }
}

/// Fit of `ln y` against `ln x`.
pub fn log_log(x: &[f64], y: &[f64]) -> LineFit {
    let lx: Vec<f64> = x.iter().map(|v| v.ln()).collect();
    let ly: Vec<f64> = y.iter().map(|v| v.ln()).collect();
    line(&lx, &ly)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn exact_power_law() {
        let x: Vec<f64> = (0..10).map(|i| 10f64.powf(1.0 + i as f64 / 9.0)).collect();
        let y: Vec<f64> = x.iter().map(|v| 3.0 * v.powf(-1.8)).collect();
        let f = log_log(&x, &y);
        assert!((f.slope + 1.8).abs() < 1e-10);
        assert!((f.intercept - 3f64.ln()).abs() < 1e-9);
    }
}
