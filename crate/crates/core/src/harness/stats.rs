//! Median and quartiles over trials.

use statrs::statistics::{Data, OrderStatistics};

/// Median with lower and upper quartiles (median-unbiased R-8 estimator).
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Quartiles {
    pub median: f64,
    pub q1: f64,
    pub q3: f64,
}

impl Quartiles {
    /// NaN entries are dropped; an empty sample gives NaN everywhere.
    pub fn of(values: &[f64]) -> Self {
        let finite: Vec<f64> = values.iter().copied().filter(|v| !v.is_nan()).collect();
        if finite.is_empty() {
            return Quartiles {
                median: f64::NAN,
                q1: f64::NAN,
                q3: f64::NAN,
            };
        }
        let mut data = Data::new(finite);
        Quartiles {
            median: data.median(),
            q1: data.lower_quartile(),
            q3: data.upper_quartile(),
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn odd_and_even_medians() {
        assert_eq!(Quartiles::of(&[3.0, 1.0, 2.0]).median, 2.0);
        assert_eq!(Quartiles::of(&[4.0, 1.0, 3.0, 2.0]).median, 2.5);
    }

    #[test]
    fn quartiles_bracket_median() {
        let v: Vec<f64> = (0..20).map(|i| ((i * 7) % 20) as f64).collect();
        let q = Quartiles::of(&v);
        assert!(q.q1 < q.median && q.median < q.q3);
        assert_eq!(q.median, 9.5);
    }

    #[test]
    fn empty_and_nan() {
        assert!(Quartiles::of(&[]).median.is_nan());
        assert_eq!(Quartiles::of(&[f64::NAN, 5.0]).median, 5.0);
    }
}
