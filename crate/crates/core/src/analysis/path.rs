use crate::error::AnalysisError;
use crate::geometry::energy_pairwise;
use crate::model::{Configuration, ModelParams};

/// Modulus of continuity `w(f, δ) = sup_{|t − s| < δ} |f(t) − f(s)|` of a
/// path sampled at uniformly spaced `times`, with `points` flat of stride
/// `d`.
pub fn modulus_of_continuity(times: &[f64], points: &[f64], d: usize, delta: f64) -> Result<f64, AnalysisError> {
    let n = times.len();
    if n == 0 || d == 0 || points.len() != n * d {
        return Err(AnalysisError::EmptyStream);
    }
    if n == 1 {
        return Ok(0.0);
    }
    let h = (times[n - 1] - times[0]) / (n - 1) as f64;
    if !(h > 0.0) || times.windows(2).any(|w| ((w[1] - w[0]) - h).abs() > 1e-9 * h.max(1.0)) {
        return Err(AnalysisError::NonUniformGrid);
    }
    if delta <= h {
        return Err(AnalysisError::DeltaBelowResolution { delta, spacing: h });
    }
    // Largest lag k with k h < δ; the slack keeps δ = k h itself excluded.
    let max_lag = ((delta / h) * (1.0 - 1e-12)).ceil() as usize - 1;
    let max_lag = max_lag.min(n - 1);
    let mut best = 0.0f64;
    for a in 0..n {
        let pa = &points[a * d..(a + 1) * d];
        for b in (a + 1)..=(a + max_lag).min(n - 1) {
            let pb = &points[b * d..(b + 1) * d];
            let dist2: f64 = pa.iter().zip(pb).map(|(x, y)| (x - y) * (x - y)).sum();
            best = best.max(dist2);
        }
    }
    Ok(best.sqrt())
}

/// Pairwise energy of each configuration in the stream.
pub fn energy_trace<'a, I>(stream: I, params: &ModelParams) -> Vec<f64>
where
    I: IntoIterator<Item = &'a Configuration>,
{
    stream.into_iter().map(|c| energy_pairwise(c.spheres(), params)).collect()
}

/// Running minimum of a series.
pub fn running_minimum(series: &[f64]) -> Vec<f64> {
    let mut m = f64::INFINITY;
    series
        .iter()
        .map(|&x| {
            m = m.min(x);
            m
        })
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;

    fn grid(n: usize, h: f64) -> Vec<f64> {
        (0..n).map(|k| k as f64 * h).collect()
    }

    #[test]
    fn constant_and_linear_paths() {
        let t = grid(101, 0.01);
        let zero = vec![1.5; 202];
        assert_eq!(modulus_of_continuity(&t, &zero, 2, 0.1).unwrap(), 0.0);
        // Slope 3 in one coordinate; lags strictly below δ = 0.1 reach 9 cells.
        let lin: Vec<f64> = t.iter().map(|s| 3.0 * s).collect();
        let w = modulus_of_continuity(&t, &lin, 1, 0.1).unwrap();
        assert!(w <= 3.0 * 0.1 + 1e-12 && w >= 3.0 * (0.1 - 0.01) - 1e-12, "{w}");
    }

    #[test]
    fn monotone_in_delta() {
        let t = grid(200, 0.005);
        let f: Vec<f64> = t.iter().map(|s| (17.0 * s).sin() + s * s).collect();
        let mut prev = 0.0;
        for k in 2..40 {
            let w = modulus_of_continuity(&t, &f, 1, k as f64 * 0.004).unwrap();
            assert!(w >= prev);
            prev = w;
        }
    }

    #[test]
    fn grid_errors() {
        let t = [0.0, 0.1, 0.3];
        assert_eq!(modulus_of_continuity(&t, &[0.0; 3], 1, 1.0), Err(AnalysisError::NonUniformGrid));
        let t = grid(10, 0.1);
        assert!(matches!(
            modulus_of_continuity(&t, &[0.0; 10], 1, 0.05),
            Err(AnalysisError::DeltaBelowResolution { .. })
        ));
    }

    #[test]
    fn running_min_is_non_increasing() {
        let r = running_minimum(&[3.0, 1.0, 2.0, 0.5, 4.0]);
        assert_eq!(r, vec![3.0, 1.0, 1.0, 0.5, 0.5]);
    }
}
