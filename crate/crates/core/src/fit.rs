//! Least-squares fits used by the scaling experiments.

use serde::Serialize;

/// Unweighted ordinary least squares y = slope·x + intercept.
#[derive(Debug, Clone, Serialize)]
pub struct LinearFit {
    pub slope: f64,
    pub intercept: f64,
    pub r_squared: f64,
    /// Standard error of the slope estimate.
    pub slope_stderr: f64,
}

pub fn linear_fit(xs: &[f64], ys: &[f64]) -> LinearFit {
    assert_eq!(xs.len(), ys.len());
    let m = xs.len();
    assert!(m >= 2, "need at least two points");
    let mf = m as f64;
    let mean_x = xs.iter().sum::<f64>() / mf;
    let mean_y = ys.iter().sum::<f64>() / mf;
    let sxx: f64 = xs.iter().map(|x| (x - mean_x).powi(2)).sum();
    let sxy: f64 = xs.iter().zip(ys).map(|(x, y)| (x - mean_x) * (y - mean_y)).sum();
    let slope = sxy / sxx;
    let intercept = mean_y - slope * mean_x;
    let ss_res: f64 = xs
        .iter()
        .zip(ys)
        .map(|(x, y)| (y - (slope * x + intercept)).powi(2))
        .sum();
    let ss_tot: f64 = ys.iter().map(|y| (y - mean_y).powi(2)).sum();
    let r_squared = if ss_tot > 0.0 { 1.0 - ss_res / ss_tot } else { 1.0 };
    let slope_stderr = if m > 2 {
        (ss_res / (mf - 2.0) / sxx).sqrt()
    } else {
        0.0
    };
    LinearFit { slope, intercept, r_squared, slope_stderr }
}

/// Two-parameter fit y = a·x² + b.
#[derive(Debug, Clone, Serialize)]
pub struct QuadraticFit {
    pub a: f64,
    pub b: f64,
    pub r_squared: f64,
    pub ss_res: f64,
}

pub fn quadratic_fit(xs: &[f64], ys: &[f64]) -> QuadraticFit {
    // linear regression of y on x²
    let x2: Vec<f64> = xs.iter().map(|x| x * x).collect();
    let lf = linear_fit(&x2, ys);
    let ss_res: f64 = x2
        .iter()
        .zip(ys)
        .map(|(x, y)| (y - (lf.slope * x + lf.intercept)).powi(2))
        .sum();
    QuadraticFit { a: lf.slope, b: lf.intercept, r_squared: lf.r_squared, ss_res }
}

/// Sum of squared linear-space residuals of the best power law y = c·x^e,
/// fitted by least squares in log-log space.
pub fn power_law_ss_res(xs: &[f64], ys: &[f64]) -> f64 {
    let lx: Vec<f64> = xs.iter().map(|x| x.ln()).collect();
    let ly: Vec<f64> = ys.iter().map(|y| y.ln()).collect();
    let lf = linear_fit(&lx, &ly);
    xs.iter()
        .zip(ys)
        .map(|(x, y)| {
            let pred = (lf.intercept + lf.slope * x.ln()).exp();
            (y - pred).powi(2)
        })
        .sum()
}
