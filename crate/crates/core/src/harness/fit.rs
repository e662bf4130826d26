use serde::Serialize;

use crate::error::{Error, Result};

pub const MIN_FIT_SAMPLES: usize = 6;

/// Least-squares line `log v = log c + s log t`.
#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct PowerFit {
    pub slope: f64,
    pub prefactor: f64,
    /// RMS residual in natural-log space.
    pub residual: f64,
    pub samples: usize,
}

/// Fits `values ≈ c·t^s` over samples with `t ∈ [window.0, window.1]`.
pub fn fit_decay(times: &[f64], values: &[f64], window: (f64, f64)) -> Result<PowerFit> {
    let mut xs = Vec::new();
    let mut ys = Vec::new();
    for (i, (&t, &v)) in times.iter().zip(values).enumerate() {
        if t < window.0 || t > window.1 {
            continue;
        }
        if !(v > 0.0) || !(t > 0.0) {
            return Err(Error::NonPositiveSample { index: i, value: v });
        }
        xs.push(t.ln());
        ys.push(v.ln());
    }
    if xs.len() < MIN_FIT_SAMPLES {
        return Err(Error::InsufficientSamples { needed: MIN_FIT_SAMPLES, got: xs.len() });
    }
    let m = xs.len() as f64;
    let mx = xs.iter().sum::<f64>() / m;
    let my = ys.iter().sum::<f64>() / m;
    let sxx: f64 = xs.iter().map(|x| (x - mx).powi(2)).sum();
    let sxy: f64 = xs.iter().zip(&ys).map(|(x, y)| (x - mx) * (y - my)).sum();
    let slope = sxy / sxx;
    let intercept = my - slope * mx;
    let rss: f64 = xs.iter().zip(&ys).map(|(x, y)| (y - intercept - slope * x).powi(2)).sum();
    Ok(PowerFit {
        slope,
        prefactor: intercept.exp(),
        residual: (rss / m).sqrt(),
        samples: xs.len(),
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::solver::geometric_times;

    #[test]
    fn exact_power_laws() {
        let t = geometric_times(1.0, 100.0, 24);
        let v: Vec<f64> = t.iter().map(|t| t.powf(-0.5)).collect();
        let fit = fit_decay(&t, &v, (1.0, 100.0)).unwrap();
        assert!((fit.slope + 0.5).abs() < 1e-12);
        assert!(fit.residual < 1e-12);

        let v: Vec<f64> = t.iter().map(|t| 3.0 / t).collect();
        let fit = fit_decay(&t, &v, (1.0, 100.0)).unwrap();
        assert!((fit.slope + 1.0).abs() < 1e-12);
        assert!((fit.prefactor - 3.0).abs() < 1e-10);
    }

    #[test]
    fn rejects_bad_samples() {
        let t = geometric_times(1.0, 100.0, 24);
        let mut v = vec![1.0; 24];
        assert!(matches!(
            fit_decay(&t, &v, (50.0, 100.0)),
            Err(Error::InsufficientSamples { needed: 6, .. })
        ));
        v[3] = 0.0;
        assert!(matches!(fit_decay(&t, &v, (1.0, 100.0)), Err(Error::NonPositiveSample { index: 3, .. })));
    }
}
