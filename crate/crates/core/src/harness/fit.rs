use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Values at or below this are treated as having hit the metric floor.
pub const METRIC_FLOOR: f64 = 1e-13;

/// Ordinary least squares `y ≈ a + b x`; returns `(b, stderr(b), a)`.
pub fn least_squares_slope(xs: &[f64], ys: &[f64]) -> Option<(f64, f64, f64)> {
    let n = xs.len();
    if n < 2 || ys.len() != n {
        return None;
    }
    let nf = n as f64;
    let mx = xs.iter().sum::<f64>() / nf;
    let my = ys.iter().sum::<f64>() / nf;
    let sxx: f64 = xs.iter().map(|x| (x - mx) * (x - mx)).sum();
    if sxx == 0.0 {
        return None;
    }
    let sxy: f64 = xs.iter().zip(ys).map(|(x, y)| (x - mx) * (y - my)).sum();
    let b = sxy / sxx;
    let a = my - b * mx;
    let stderr = if n > 2 {
        let rss: f64 = xs
            .iter()
            .zip(ys)
            .map(|(x, y)| (y - a - b * x).powi(2))
            .sum();
        (rss / (nf - 2.0) / sxx).sqrt()
    } else {
        0.0
    };
    Some((b, stderr, a))
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct RateFit {
    pub slope: f64,
    pub stderr: f64,
    pub points_used: usize,
    /// Trailing values fell below the metric floor and were dropped.
    pub floor_reached: bool,
}

/// Log-log slope of `value` against `N`.
pub fn fit_rate(rows: &[(usize, f64)]) -> Result<RateFit> {
    if rows.len() < 3 {
        return Err(Error::TooFewPoints(rows.len()));
    }
    let prefix = rows
        .iter()
        .position(|&(_, v)| !(v > METRIC_FLOOR))
        .unwrap_or(rows.len());
    if prefix < 3 {
        return Err(Error::TooFewPoints(prefix));
    }
    let xs: Vec<f64> = rows[..prefix]
        .iter()
        .map(|(n, _)| (*n as f64).ln())
        .collect();
    let ys: Vec<f64> = rows[..prefix].iter().map(|(_, v)| v.ln()).collect();
    let (slope, stderr, _) = least_squares_slope(&xs, &ys).ok_or(Error::TooFewPoints(prefix))?;
    Ok(RateFit {
        slope,
        stderr,
        points_used: prefix,
        floor_reached: prefix < rows.len(),
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    #[test]
    fn exact_power_law() {
        let rows: Vec<_> = [32usize, 64, 128, 256]
            .iter()
            .map(|&n| (n, (n as f64).powi(-2)))
            .collect();
        let fit = fit_rate(&rows).unwrap();
        assert!((fit.slope + 2.0).abs() < 1e-12);
        assert!(fit.stderr < 1e-12);
    }

    #[test]
    fn noisy_power_law() {
        let mut rng = ChaCha8Rng::seed_from_u64(0);
        let rows: Vec<_> = [32usize, 48, 64, 96, 128, 192, 256]
            .iter()
            .map(|&n| (n, (1.0 + rng.random_range(-0.05..0.05)) / n as f64))
            .collect();
        let fit = fit_rate(&rows).unwrap();
        assert!((-1.15..=-0.85).contains(&fit.slope), "{fit:?}");
    }

    #[test]
    fn preconditions() {
        assert!(matches!(
            fit_rate(&[(1, 1.0), (2, 0.5)]),
            Err(Error::TooFewPoints(2))
        ));
        let rows = [(8, 1e-3), (16, 1e-5), (32, 1e-7), (64, 0.0), (128, -1.0)];
        let fit = fit_rate(&rows).unwrap();
        assert!(fit.floor_reached);
        assert_eq!(fit.points_used, 3);
        assert!(fit_rate(&[(8, 1e-3), (16, 0.0), (32, 1.0), (64, 1.0)]).is_err());
    }
}
