use super::histogram::Histogram;
use crate::error::AnalysisError;

/// Two-sample Kolmogorov–Smirnov distance between binned samples.
pub fn ks_statistic(h1: &Histogram, h2: &Histogram) -> Result<f64, AnalysisError> {
    if h1.edges() != h2.edges() {
        return Err(AnalysisError::BinMismatch);
    }
    if h1.total() == 0 || h2.total() == 0 {
        return Err(AnalysisError::EmptyStream);
    }
    Ok(h1
        .cdf()
        .iter()
        .zip(h2.cdf())
        .map(|(a, b)| (a - b).abs())
        .fold(0.0, f64::max))
}

/// Asymptotic two-sample KS critical value `c(α) √((n₁ + n₂)/(n₁ n₂))`,
/// `c(α) = √(−ln(α/2)/2)`.
pub fn ks_critical_value(alpha: f64, n1: f64, n2: f64) -> f64 {
    (-(alpha / 2.0).ln() / 2.0).sqrt() * ((n1 + n2) / (n1 * n2)).sqrt()
}

/// Integrated autocorrelation time `τ = 1 + 2 Σ ρ_k`, truncated by Geyer's
/// initial positive sequence: pair sums `ρ_{2m} + ρ_{2m+1}` are added while
/// they stay positive.
pub fn integrated_autocorrelation_time(series: &[f64]) -> Result<f64, AnalysisError> {
    let n = series.len();
    if n < 2 {
        return Err(AnalysisError::EmptyStream);
    }
    let mean = series.iter().sum::<f64>() / n as f64;
    let centered: Vec<f64> = series.iter().map(|x| x - mean).collect();
    let autocov = |k: usize| -> f64 {
        centered[..n - k].iter().zip(&centered[k..]).map(|(a, b)| a * b).sum::<f64>() / n as f64
    };
    let c0 = autocov(0);
    if c0 <= 0.0 {
        return Ok(1.0);
    }
    // Γ_m = ρ_{2m} + ρ_{2m+1}, with ρ_0 = 1.
    let mut tau = -1.0;
    let mut m = 0;
    while 2 * m + 1 < n {
        let gamma = (autocov(2 * m) + autocov(2 * m + 1)) / c0;
        if gamma <= 0.0 {
            break;
        }
        tau += 2.0 * gamma;
        m += 1;
    }
    Ok(tau.max(1.0))
}

/// `n / τ`.
pub fn effective_sample_size(series: &[f64]) -> Result<f64, AnalysisError> {
    Ok(series.len() as f64 / integrated_autocorrelation_time(series)?)
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::{Rng, SeedableRng};

    fn hist(values: &[f64]) -> Histogram {
        let mut h = Histogram::uniform(0.0, 4.0, 8).unwrap();
        values.iter().for_each(|&v| h.add(v));
        h
    }

    #[test]
    fn ks_extremes_and_symmetry() {
        let a = hist(&[0.1, 0.2, 1.5]);
        let b = hist(&[3.1, 3.5]);
        assert_eq!(ks_statistic(&a, &a).unwrap(), 0.0);
        assert_eq!(ks_statistic(&a, &b).unwrap(), 1.0);
        let c = hist(&[0.3, 2.2, 2.9, 3.3]);
        assert_eq!(ks_statistic(&a, &c).unwrap(), ks_statistic(&c, &a).unwrap());
        let other = Histogram::uniform(0.0, 4.0, 4).unwrap();
        assert_eq!(ks_statistic(&a, &other), Err(AnalysisError::BinMismatch));
    }

    #[test]
    fn critical_value_at_one_percent() {
        let c = ks_critical_value(0.01, 1e4, 1e4);
        assert!((c - 1.6276 * (2e-4f64).sqrt()).abs() < 1e-5);
    }

    #[test]
    fn ar1_autocorrelation_time() {
        // AR(1) with coefficient a has τ = (1 + a)/(1 − a).
        let a = 0.8;
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(2);
        let mut x = 0.0;
        let series: Vec<f64> = (0..400_000)
            .map(|_| {
                let e: f64 = rng.sample(rand_distr::StandardNormal);
                x = a * x + e;
                x
            })
            .collect();
        let tau = integrated_autocorrelation_time(&series).unwrap();
        assert!((tau / 9.0 - 1.0).abs() < 0.1, "tau = {tau}");
    }

    #[test]
    fn white_noise_has_unit_time() {
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(5);
        let series: Vec<f64> = (0..100_000).map(|_| rng.random::<f64>()).collect();
        let tau = integrated_autocorrelation_time(&series).unwrap();
        assert!((tau - 1.0).abs() < 0.05);
        assert_eq!(integrated_autocorrelation_time(&[1.0; 10]).unwrap(), 1.0);
    }
}
