//! Least-squares fits of scaling laws, with automatic exclusion of points
//! sitting on a numeric noise floor.
//!
//! Convergence data in this crate follows err ≈ C e^{r x} or err ≈ C x^s
//! until it hits round-off; the floor shows up as a flat tail (or a flat
//! head when the error grows with x). Points within 10× of the measured
//! floor are excluded before the fit so the floor cannot bias the slope.

use crate::error::{Error, Result};

/// Ordinary least squares of y against x.
#[derive(Debug, Clone, Copy)]
pub struct LinearFit {
    pub slope: f64,
    pub intercept: f64,
    pub r_squared: f64,
    /// Root-mean-square residual of the fit.
    pub residual_rms: f64,
    pub n: usize,
}

pub fn linear_fit(xs: &[f64], ys: &[f64]) -> Result<LinearFit> {
    if xs.len() != ys.len() || xs.len() < 2 {
        return Err(Error::Fit(format!(
            "need at least two points, got {} and {}",
            xs.len(),
            ys.len()
        )));
    }
    let n = xs.len() as f64;
    let mx = xs.iter().sum::<f64>() / n;
    let my = ys.iter().sum::<f64>() / n;
    let sxx: f64 = xs.iter().map(|x| (x - mx) * (x - mx)).sum();
    let sxy: f64 = xs.iter().zip(ys).map(|(x, y)| (x - mx) * (y - my)).sum();
    let syy: f64 = ys.iter().map(|y| (y - my) * (y - my)).sum();
    if sxx == 0.0 {
        return Err(Error::Fit("degenerate fit: all x identical".into()));
    }
    let slope = sxy / sxx;
    let intercept = my - slope * mx;
    let ss_res: f64 = xs
        .iter()
        .zip(ys)
        .map(|(x, y)| {
            let r = y - (slope * x + intercept);
            r * r
        })
        .sum();
    let r_squared = if syy > 0.0 { 1.0 - ss_res / syy } else { 1.0 };
    Ok(LinearFit {
        slope,
        intercept,
        r_squared,
        residual_rms: (ss_res / xs.len() as f64).sqrt(),
        n: xs.len(),
    })
}

/// Fit of log(err) against x after floor exclusion.
#[derive(Debug, Clone)]
pub struct FloorFit {
    pub fit: LinearFit,
    /// Estimated noise floor, if one was detected.
    pub floor: Option<f64>,
    /// Which input points survived the exclusion.
    pub used: Vec<bool>,
}

impl FloorFit {
    pub fn n_used(&self) -> usize {
        self.used.iter().filter(|&&u| u).count()
    }
}

/// Fit ln(err) = slope·x + b, excluding floor points. Errors must be
/// positive; x in whatever scale the law calls for (linear for exponential
/// decay, ln for power laws).
pub fn fit_log_err(xs: &[f64], errs: &[f64]) -> Result<FloorFit> {
    if xs.len() != errs.len() || xs.len() < 2 {
        return Err(Error::Fit("need at least two (x, err) points".into()));
    }
    if errs.iter().any(|&e| !(e > 0.0)) {
        return Err(Error::Fit("errors must be positive for a log fit".into()));
    }
    let logs: Vec<f64> = errs.iter().map(|e| e.ln()).collect();
    let detected = detect_floor(xs, &logs);
    let (floor, used) = match detected {
        Some((floor_log, keep)) => {
            let kept = keep.iter().filter(|&&k| k).count();
            if kept < 2 {
                return Err(Error::Fit(format!(
                    "only {kept} points above the noise floor {:.3e}",
                    floor_log.exp()
                )));
            }
            (Some(floor_log.exp()), keep)
        }
        None => (None, vec![true; xs.len()]),
    };
    let fx: Vec<f64> = xs
        .iter()
        .zip(&used)
        .filter(|(_, &u)| u)
        .map(|(x, _)| *x)
        .collect();
    let fy: Vec<f64> = logs
        .iter()
        .zip(&used)
        .filter(|(_, &u)| u)
        .map(|(y, _)| *y)
        .collect();
    let fit = linear_fit(&fx, &fy)?;
    Ok(FloorFit { fit, floor, used })
}

/// Power-law convenience wrapper: slope of ln(err) vs ln(x).
pub fn fit_log_log(xs: &[f64], errs: &[f64]) -> Result<FloorFit> {
    if xs.iter().any(|&x| !(x > 0.0)) {
        return Err(Error::Fit("x values must be positive for a log-log fit".into()));
    }
    let lx: Vec<f64> = xs.iter().map(|x| x.ln()).collect();
    fit_log_err(&lx, errs)
}

/// Detect a flat noise-floor segment. Returns the floor (in log units) and
/// the keep mask (points more than 10× above the floor).
///
/// The floor is searched for where the data trend ends: at the tail when the
/// overall slope is negative, at the head when it is positive. A 3-point
/// window counts as floor when it is much flatter than the overall trend.
fn detect_floor(xs: &[f64], log_errs: &[f64]) -> Option<(f64, Vec<bool>)> {
    let n = xs.len();
    if n < 4 {
        return None;
    }
    let global = linear_fit(xs, log_errs).ok()?;
    let w = 3;
    let half = n / 2;
    let candidates: Vec<usize> = if global.slope <= 0.0 {
        (half.saturating_sub(1)..=n - w).collect()
    } else {
        (0..=half.min(n - w)).collect()
    };
    let mut best: Option<(f64, usize)> = None;
    for start in candidates {
        let sl = linear_fit(&xs[start..start + w], &log_errs[start..start + w])
            .ok()?
            .slope;
        if best.is_none() || sl.abs() < best.unwrap().0 {
            best = Some((sl.abs(), start));
        }
    }
    let (flattest, start) = best?;
    if flattest >= 0.3 * global.slope.abs() {
        return None;
    }
    let floor_log = log_errs[start..start + w].iter().sum::<f64>() / w as f64;
    let cut = floor_log + 10f64.ln();
    let keep: Vec<bool> = log_errs.iter().map(|&l| l > cut).collect();
    Some((floor_log, keep))
}
