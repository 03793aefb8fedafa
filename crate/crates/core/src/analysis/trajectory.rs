use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

pub const SERIES_LEN: usize = 10;
pub const FEATURE_COUNT: usize = 11;
/// `first_nonzero_year` value for a series that never leaves zero.
pub const NEVER_NONZERO: u32 = 11;

pub const FEATURE_NAMES: [&str; FEATURE_COUNT] = [
    "early_slope",
    "early_mean",
    "early_std",
    "late_slope",
    "late_mean",
    "late_std",
    "delta_slope",
    "delta_mean",
    "delta_std",
    "first_nonzero_year",
    "max_increment_year",
];

/// Early-career shape of a cumulative index over career years 1..=10.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct TrajectoryFeatures {
    pub early_slope: f64,
    pub early_mean: f64,
    pub early_std: f64,
    pub late_slope: f64,
    pub late_mean: f64,
    pub late_std: f64,
    pub delta_slope: f64,
    pub delta_mean: f64,
    pub delta_std: f64,
    pub first_nonzero_year: u32,
    pub max_increment_year: u32,
}

impl TrajectoryFeatures {
    /// Features in [`FEATURE_NAMES`] order.
    pub fn to_vector(&self) -> [f64; FEATURE_COUNT] {
        [
            self.early_slope,
            self.early_mean,
            self.early_std,
            self.late_slope,
            self.late_mean,
            self.late_std,
            self.delta_slope,
            self.delta_mean,
            self.delta_std,
            f64::from(self.first_nonzero_year),
            f64::from(self.max_increment_year),
        ]
    }
}

/// (OLS slope against the year index, mean, population std) of a window.
fn window_stats(values: &[f64]) -> (f64, f64, f64) {
    let n = values.len() as f64;
    let mean = values.iter().sum::<f64>() / n;
    let x_mean = (n + 1.0) / 2.0;
    let (mut sxy, mut sxx, mut ss) = (0.0, 0.0, 0.0);
    for (i, &v) in values.iter().enumerate() {
        let dx = (i + 1) as f64 - x_mean;
        sxy += dx * (v - mean);
        sxx += dx * dx;
        ss += (v - mean) * (v - mean);
    }
    (sxy / sxx, mean, (ss / n).sqrt())
}

pub fn trajectory_features(series: &[f64]) -> Result<TrajectoryFeatures> {
    if series.len() != SERIES_LEN {
        return Err(Error::InvalidParameter(format!(
            "trajectory series must have {SERIES_LEN} values, got {}",
            series.len()
        )));
    }
    let (early_slope, early_mean, early_std) = window_stats(&series[..5]);
    let (late_slope, late_mean, late_std) = window_stats(&series[5..]);
    let first_nonzero_year = series
        .iter()
        .position(|&v| v > 0.0)
        .map_or(NEVER_NONZERO, |i| i as u32 + 1);
    let mut max_increment_year = 2;
    let mut best = series[1] - series[0];
    for k in 3..=SERIES_LEN {
        let inc = series[k - 1] - series[k - 2];
        if inc > best {
            best = inc;
            max_increment_year = k as u32;
        }
    }
    Ok(TrajectoryFeatures {
        early_slope,
        early_mean,
        early_std,
        late_slope,
        late_mean,
        late_std,
        delta_slope: late_slope - early_slope,
        delta_mean: late_mean - early_mean,
        delta_std: late_std - early_std,
        first_nonzero_year,
        max_increment_year,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn arithmetic_sequence() {
        let s: Vec<f64> = (1..=10).map(f64::from).collect();
        let f = trajectory_features(&s).unwrap();
        assert!((f.early_slope - 1.0).abs() < 1e-12);
        assert_eq!(f.early_mean, 3.0);
        assert!((f.early_std - 2f64.sqrt()).abs() < 1e-12);
        assert!((f.late_slope - 1.0).abs() < 1e-12);
        assert_eq!(f.late_mean, 8.0);
        assert!(f.delta_slope.abs() < 1e-12);
        assert_eq!(f.delta_mean, 5.0);
        assert_eq!(f.first_nonzero_year, 1);
        assert_eq!(f.max_increment_year, 2);
    }

    #[test]
    fn all_zero_series() {
        let f = trajectory_features(&[0.0; 10]).unwrap();
        assert!(f.to_vector()[..9].iter().all(|&v| v == 0.0));
        assert_eq!(f.first_nonzero_year, NEVER_NONZERO);
        assert_eq!(f.max_increment_year, 2);
    }

    #[test]
    fn late_jump() {
        let mut s = [0.0; 10];
        s[9] = 10.0;
        let f = trajectory_features(&s).unwrap();
        assert_eq!(f.first_nonzero_year, 10);
        assert_eq!(f.max_increment_year, 10);
        assert_eq!(f.early_slope, 0.0);
    }

    #[test]
    fn wrong_length() {
        assert!(trajectory_features(&[1.0; 9]).is_err());
    }
}
