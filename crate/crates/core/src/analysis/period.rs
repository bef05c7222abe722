use serde::{Deserialize, Serialize};

#[derive(Debug, Clone, Copy, PartialEq, Default, Serialize, Deserialize)]
pub struct PeriodEstimate {
    pub period: Option<f64>,
    /// Coefficient of variation (std / mean) of the crossing spacings.
    pub cv: Option<f64>,
}

/// Mean spacing between upward zero crossings of the mean-removed signal.
/// Needs at least four crossings (three full cycles); otherwise both fields
/// are absent.
pub fn estimate_period(signal: &[(f64, f64)]) -> PeriodEstimate {
    if signal.len() < 2 {
        return PeriodEstimate::default();
    }
    let mean = signal.iter().map(|s| s.1).sum::<f64>() / signal.len() as f64;
    let amplitude = signal.iter().map(|s| (s.1 - mean).abs()).fold(0.0, f64::max);
    if amplitude <= 1e-9 * mean.abs().max(1.0) {
        return PeriodEstimate::default();
    }
    let crossings: Vec<f64> = signal
        .windows(2)
        .filter_map(|w| {
            let ((t0, y0), (t1, y1)) = (w[0], w[1]);
            let (y0, y1) = (y0 - mean, y1 - mean);
            (y0 < 0.0 && y1 >= 0.0).then(|| t0 + (t1 - t0) * (-y0) / (y1 - y0))
        })
        .collect();
    if crossings.len() < 4 {
        return PeriodEstimate::default();
    }
    let spacings: Vec<f64> = crossings.windows(2).map(|w| w[1] - w[0]).collect();
    let n = spacings.len() as f64;
    let period = spacings.iter().sum::<f64>() / n;
    let var = spacings.iter().map(|s| (s - period).powi(2)).sum::<f64>() / n;
    PeriodEstimate {
        period: Some(period),
        cv: Some(var.sqrt() / period),
    }
}
