use crate::error::{Error, Result};
use crate::signal::series::median_in_place;
use crate::signal::TimeSeries;

/// Centered running median. Windows shrink at the edges instead of padding,
/// so an edge sample with only one neighbour takes the mean of the two.
pub fn median_filter(series: &TimeSeries, window: usize) -> Result<TimeSeries> {
    let values = median_filter_values(series.values(), window)?;
    series.with_values(values, series.unit())
}

pub fn median_filter_values(values: &[f64], window: usize) -> Result<Vec<f64>> {
    if window == 0 || window.is_multiple_of(2) {
        return Err(Error::argument(format!(
            "median window must be odd and >= 1, got {window}"
        )));
    }
    if window > values.len() {
        return Err(Error::argument(format!(
            "median window {window} longer than series ({})",
            values.len()
        )));
    }
    if window == 1 {
        return Ok(values.to_vec());
    }
    let half = window / 2;
    let n = values.len();
    let mut scratch = Vec::with_capacity(window);
    Ok((0..n)
        .map(|i| {
            let lo = i.saturating_sub(half);
            let hi = (i + half + 1).min(n);
            scratch.clear();
            scratch.extend_from_slice(&values[lo..hi]);
            median_in_place(&mut scratch)
        })
        .collect())
}

/// Subtract the least-squares straight line (against sample index).
pub fn detrend_linear(values: &[f64]) -> Result<Vec<f64>> {
    let n = values.len();
    if n < 2 {
        return Err(Error::argument(format!("detrend needs >= 2 samples, got {n}")));
    }
    let (intercept, slope) = line_fit(values);
    Ok(values
        .iter()
        .enumerate()
        .map(|(i, &v)| v - (intercept + slope * i as f64))
        .collect())
}

/// Least-squares `(intercept, slope)` of `values` against their index.
pub(crate) fn line_fit(values: &[f64]) -> (f64, f64) {
    let n = values.len() as f64;
    let x_mean = (n - 1.0) / 2.0;
    let y_mean = values.iter().sum::<f64>() / n;
    let (mut sxy, mut sxx) = (0.0, 0.0);
    for (i, &y) in values.iter().enumerate() {
        let dx = i as f64 - x_mean;
        sxy += dx * (y - y_mean);
        sxx += dx * dx;
    }
    let slope = if sxx > 0.0 { sxy / sxx } else { 0.0 };
    (y_mean - slope * x_mean, slope)
}
