use crate::error::{Error, Result};
use crate::signal::series::mean;
use crate::signal::{TimeSeries, Unit};

/// Relative change against the mean of the samples inside `static_interval`
/// (closed, seconds): `(r - r_static) / r_static`.
pub fn normalize_static(series: &TimeSeries, static_interval: (f64, f64)) -> Result<TimeSeries> {
    let (t0, t1) = static_interval;
    if !(t0 <= t1) {
        return Err(Error::argument(format!("static interval [{t0}, {t1}] is reversed")));
    }
    let range = series.index_range(t0, t1);
    if range.is_empty() {
        return Err(Error::domain(format!("no samples inside static interval [{t0}, {t1}]")));
    }
    let baseline = mean(&series.values()[range]);
    if baseline == 0.0 {
        return Err(Error::domain("static-phase mean is zero"));
    }
    series.map(Unit::Dimensionless, |r| (r - baseline) / baseline)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn hand_evaluated_example() {
        let s = TimeSeries::uniform(0.0, 1.0, vec![700.0, 700.0, 1400.0], Unit::Ohms).unwrap();
        let n = normalize_static(&s, (0.0, 1.0)).unwrap();
        assert_eq!(n.values(), &[0.0, 0.0, 1.0]);
        assert_eq!(n.unit(), Unit::Dimensionless);
    }

    #[test]
    fn baseline_and_double() {
        let s = TimeSeries::uniform(0.0, 1.0, vec![600.0, 800.0, 700.0, 1400.0], Unit::Ohms).unwrap();
        let n = normalize_static(&s, (0.0, 1.0)).unwrap();
        assert_eq!(n.values()[2], 0.0);
        assert_eq!(n.values()[3], 1.0);
    }

    #[test]
    fn errors() {
        let s = TimeSeries::uniform(0.0, 1.0, vec![0.0, 0.0, 5.0], Unit::Ohms).unwrap();
        assert!(matches!(normalize_static(&s, (0.0, 1.0)), Err(Error::Domain(_))));
        assert!(matches!(normalize_static(&s, (10.0, 11.0)), Err(Error::Domain(_))));
    }
}
