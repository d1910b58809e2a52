use statrs::distribution::{ContinuousCDF, StudentsT};

use super::MetricError;

/// Variance floor applied when both samples are constant but differ.
const VARIANCE_FLOOR: f64 = 1e-12;

fn mean(values: &[f64]) -> f64 {
    values.iter().sum::<f64>() / values.len() as f64
}

fn sample_variance(values: &[f64], mean: f64) -> f64 {
    if values.len() < 2 {
        return 0.0;
    }
    values.iter().map(|v| (v - mean).powi(2)).sum::<f64>() / (values.len() - 1) as f64
}

/// Arithmetic mean and sample standard deviation (n - 1 denominator; zero
/// for a single value).
pub fn aggregate_stats(values: &[f64]) -> Result<(f64, f64), MetricError> {
    if values.is_empty() {
        return Err(MetricError::EmptySample);
    }
    let m = mean(values);
    Ok((m, sample_variance(values, m).sqrt()))
}

/// Two-sided Welch's t-test p-value for a difference in means.
pub fn significance_p(sample_a: &[f64], sample_b: &[f64]) -> Result<f64, MetricError> {
    if sample_a.len() < 2 || sample_b.len() < 2 {
        return Err(MetricError::SampleTooSmall);
    }
    let (na, nb) = (sample_a.len() as f64, sample_b.len() as f64);
    let (ma, mb) = (mean(sample_a), mean(sample_b));
    let (mut va, mut vb) = (sample_variance(sample_a, ma), sample_variance(sample_b, mb));
    if va == 0.0 && vb == 0.0 {
        if ma == mb {
            return Ok(1.0);
        }
        va = VARIANCE_FLOOR;
        vb = VARIANCE_FLOOR;
    }
    let (sa, sb) = (va / na, vb / nb);
    let t = (ma - mb) / (sa + sb).sqrt();
    let df = (sa + sb).powi(2) / (sa * sa / (na - 1.0) + sb * sb / (nb - 1.0));
    let dist = StudentsT::new(0.0, 1.0, df).map_err(|e| MetricError::Domain(e.to_string()))?;
    Ok((2.0 * dist.sf(t.abs())).clamp(0.0, 1.0))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn aggregate_examples() {
        assert_eq!(aggregate_stats(&[1.0, 1.0, 1.0]).unwrap(), (1.0, 0.0));
        let (m, s) = aggregate_stats(&[0.0, 1.0]).unwrap();
        assert_eq!(m, 0.5);
        assert!((s - 0.5f64.sqrt()).abs() < 1e-12);
        let (m, s) = aggregate_stats(&[0.2, 0.4, 0.6]).unwrap();
        assert!((m - 0.4).abs() < 1e-12 && (s - 0.2).abs() < 1e-12);
        assert!(aggregate_stats(&[]).is_err());
        assert_eq!(aggregate_stats(&[0.3]).unwrap(), (0.3, 0.0));
    }

    #[test]
    fn identical_samples_give_p_one() {
        let a = [0.1, 0.2, 0.3];
        assert!((significance_p(&a, &a).unwrap() - 1.0).abs() < 1e-12);
        assert_eq!(significance_p(&[0.5, 0.5], &[0.5, 0.5]).unwrap(), 1.0);
    }

    #[test]
    fn separated_constant_samples() {
        assert!(significance_p(&[0.0; 4], &[1.0; 4]).unwrap() < 0.001);
    }

    #[test]
    fn matches_hand_computed_welch() {
        // a = [1,2,3,4], b = [2,4,6,8]: means 2.5 and 5, variances 5/3 and
        // 20/3, t = -1.7320508, df = 4.4117647; scipy's ttest_ind with
        // equal_var=False gives p = 0.1515805.
        let p = significance_p(&[1.0, 2.0, 3.0, 4.0], &[2.0, 4.0, 6.0, 8.0]).unwrap();
        assert!((p - 0.1515805).abs() < 1e-6, "{p}");
    }

    #[test]
    fn too_small() {
        assert!(significance_p(&[1.0], &[1.0, 2.0]).is_err());
    }
}
