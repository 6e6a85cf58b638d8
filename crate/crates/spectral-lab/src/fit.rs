//! Ordinary least-squares line fits for exponent estimation.

use thiserror::Error;

/// Result of a straight-line fit `y = intercept + slope * x`.
#[derive(Clone, Copy, Debug)]
pub struct LineFit {
    pub slope: f64,
    pub intercept: f64,
    /// Standard error of the slope estimate (zero when the fit is exact).
    pub slope_stderr: f64,
    /// Largest absolute residual over the fitted points.
    pub max_residual: f64,
}

#[derive(Debug, Error, PartialEq)]
pub enum FitError {
    #[error("line fit needs at least {needed} points, got {got}")]
    TooFewPoints { needed: usize, got: usize },
    #[error("non-finite value in fit data at index {index}")]
    NonFinite { index: usize },
    #[error("fit abscissae are degenerate (zero spread)")]
    DegenerateAbscissae,
}

/// Unweighted least squares over `(xs, ys)` pairs. Requires at least three
/// points so the residual variance has a degree of freedom.
pub fn fit_line(xs: &[f64], ys: &[f64]) -> Result<LineFit, FitError> {
    let n = xs.len();
    if n < 3 || ys.len() != n {
        return Err(FitError::TooFewPoints {
            needed: 3,
            got: n.min(ys.len()),
        });
    }
    for (i, (x, y)) in xs.iter().zip(ys).enumerate() {
        if !x.is_finite() || !y.is_finite() {
            return Err(FitError::NonFinite { index: i });
        }
    }
    let nf = n as f64;
    let x_mean = xs.iter().sum::<f64>() / nf;
    let y_mean = ys.iter().sum::<f64>() / nf;
    let mut sxx = 0.0;
    let mut sxy = 0.0;
    for (x, y) in xs.iter().zip(ys) {
        sxx += (x - x_mean) * (x - x_mean);
        sxy += (x - x_mean) * (y - y_mean);
    }
    if sxx <= 0.0 {
        return Err(FitError::DegenerateAbscissae);
    }
    let slope = sxy / sxx;
    let intercept = y_mean - slope * x_mean;
    let mut ss_res = 0.0;
    let mut max_residual = 0.0f64;
    for (x, y) in xs.iter().zip(ys) {
        let r = y - (intercept + slope * x);
        ss_res += r * r;
        max_residual = max_residual.max(r.abs());
    }
    let slope_stderr = (ss_res / (nf - 2.0) / sxx).sqrt();
    Ok(LineFit {
        slope,
        intercept,
        slope_stderr,
        max_residual,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn exact_line_has_zero_stderr() {
        let xs: Vec<f64> = (0..6).map(|i| i as f64).collect();
        let ys: Vec<f64> = xs.iter().map(|x| 2.5 * x - 1.0).collect();
        let fit = fit_line(&xs, &ys).unwrap();
        assert!((fit.slope - 2.5).abs() < 1e-14);
        assert!((fit.intercept + 1.0).abs() < 1e-14);
        assert!(fit.slope_stderr < 1e-13);
        assert!(fit.max_residual < 1e-13);
    }

    #[test]
    fn noisy_line_stderr_is_positive() {
        let xs = [0.0, 1.0, 2.0, 3.0, 4.0, 5.0];
        let ys = [0.1, 0.9, 2.05, 3.0, 3.95, 5.1];
        let fit = fit_line(&xs, &ys).unwrap();
        assert!((fit.slope - 1.0).abs() < 0.05);
        assert!(fit.slope_stderr > 0.0);
    }

    #[test]
    fn rejects_degenerate_input() {
        assert!(matches!(
            fit_line(&[1.0, 2.0], &[1.0, 2.0]),
            Err(FitError::TooFewPoints { needed: 3, got: 2 })
        ));
        assert!(matches!(
            fit_line(&[1.0, 1.0, 1.0], &[1.0, 2.0, 3.0]),
            Err(FitError::DegenerateAbscissae)
        ));
        assert!(matches!(
            fit_line(&[1.0, 2.0, f64::NAN], &[1.0, 2.0, 3.0]),
            Err(FitError::NonFinite { index: 2 })
        ));
    }
}
