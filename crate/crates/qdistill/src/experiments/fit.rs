//! Least-squares fits of the final-step performance curves:
//! log₁₀(e_out) = A + B·e_in and D_partial = C − D·e^(E·e_in).

use crate::error::{Error, Result};

/// Result of the straight-line fit on (e_in, log₁₀ e_out).
#[derive(Debug, Clone, Copy)]
pub struct LogLinearFit {
    pub intercept: f64,
    pub slope: f64,
    pub residual_rms: f64,
}

/// Result of the exponential-yield fit.
#[derive(Debug, Clone, Copy)]
pub struct DPartialFit {
    pub c: f64,
    pub d: f64,
    pub e: f64,
    pub e_fixed: bool,
    pub residual_rms: f64,
}

fn linear_least_squares(xs: &[f64], ys: &[f64]) -> (f64, f64) {
    let n = xs.len() as f64;
    let sx: f64 = xs.iter().sum();
    let sy: f64 = ys.iter().sum();
    let sxx: f64 = xs.iter().map(|x| x * x).sum();
    let sxy: f64 = xs.iter().zip(ys).map(|(x, y)| x * y).sum();
    let denom = n * sxx - sx * sx;
    let slope = (n * sxy - sx * sy) / denom;
    let intercept = (sy - slope * sx) / n;
    (intercept, slope)
}

/// Fit log₁₀(e_out) = A + B·e_in over points (e_in, e_out); points with a
/// zero error estimate cannot enter a log fit and are rejected.
pub fn fit_log_e_out(points: &[(f64, f64)]) -> Result<LogLinearFit> {
    let usable: Vec<(f64, f64)> =
        points.iter().filter(|&&(_, e)| e > 0.0).map(|&(x, e)| (x, e.log10())).collect();
    if usable.len() < 4 {
        return Err(Error::InsufficientData { need: 4, got: usable.len() });
    }
    let xs: Vec<f64> = usable.iter().map(|p| p.0).collect();
    let ys: Vec<f64> = usable.iter().map(|p| p.1).collect();
    let (intercept, slope) = linear_least_squares(&xs, &ys);
    let rms = (usable
        .iter()
        .map(|&(x, y)| (y - intercept - slope * x).powi(2))
        .sum::<f64>()
        / usable.len() as f64)
        .sqrt();
    Ok(LogLinearFit { intercept, slope, residual_rms: rms })
}

fn d_partial_sse(points: &[(f64, f64)], e: f64) -> (f64, f64, f64) {
    // linear least squares in (C, D) for fixed E: D_partial = C − D·exp(E·x)
    let regress: Vec<f64> = points.iter().map(|&(x, _)| (e * x).exp()).collect();
    let ys: Vec<f64> = points.iter().map(|p| p.1).collect();
    let (c, neg_d) = linear_least_squares(&regress, &ys);
    let sse: f64 = points
        .iter()
        .zip(&regress)
        .map(|(&(_, y), &r)| (y - c - neg_d * r).powi(2))
        .sum();
    (c, -neg_d, sse)
}

/// Fit D_partial = C − D·e^(E·e_in); E is either pinned (the reference
/// value is 205.3) or optimized by golden-section search.
pub fn fit_d_partial(points: &[(f64, f64)], e_fixed: Option<f64>) -> Result<DPartialFit> {
    if points.len() < 4 {
        return Err(Error::InsufficientData { need: 4, got: points.len() });
    }
    let (c, d, e, sse) = match e_fixed {
        Some(e) => {
            let (c, d, sse) = d_partial_sse(points, e);
            (c, d, e, sse)
        }
        None => {
            let (mut lo, mut hi) = (10.0f64, 600.0f64);
            let phi = (5f64.sqrt() - 1.0) / 2.0;
            for _ in 0..80 {
                let m1 = hi - phi * (hi - lo);
                let m2 = lo + phi * (hi - lo);
                if d_partial_sse(points, m1).2 <= d_partial_sse(points, m2).2 {
                    hi = m2;
                } else {
                    lo = m1;
                }
            }
            let e = 0.5 * (lo + hi);
            let (c, d, sse) = d_partial_sse(points, e);
            (c, d, e, sse)
        }
    };
    Ok(DPartialFit {
        c,
        d,
        e,
        e_fixed: e_fixed.is_some(),
        residual_rms: (sse / points.len() as f64).sqrt(),
    })
}
