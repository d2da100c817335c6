//! Composite quadrature on uniform grids over `[0, pi]`.

use std::f64::consts::PI;

/// Uniform grid with `intervals` sub-intervals on `[0, pi]`, endpoints included.
pub fn uniform_grid(intervals: usize) -> Vec<f64> {
    let h = PI / intervals as f64;
    (0..=intervals).map(|i| i as f64 * h).collect()
}

/// Composite Simpson weights for `intervals` equal steps of width `h`.
///
/// An odd interval count is handled by closing the last three steps with
/// Simpson's 3/8 rule.
pub fn simpson_weights(intervals: usize, h: f64) -> Vec<f64> {
    assert!(intervals >= 2, "simpson needs at least two intervals");
    let mut w = vec![0.0; intervals + 1];
    let simpson_end = if intervals.is_multiple_of(2) { intervals } else { intervals - 3 };
    let mut i = 0;
    while i < simpson_end {
        w[i] += h / 3.0;
        w[i + 1] += 4.0 * h / 3.0;
        w[i + 2] += h / 3.0;
        i += 2;
    }
    if simpson_end < intervals {
        let c = 3.0 * h / 8.0;
        w[simpson_end] += c;
        w[simpson_end + 1] += 3.0 * c;
        w[simpson_end + 2] += 3.0 * c;
        w[simpson_end + 3] += c;
    }
    w
}

/// Weighted sum of samples.
pub fn integrate(weights: &[f64], values: &[f64]) -> f64 {
    debug_assert_eq!(weights.len(), values.len());
    weights.iter().zip(values).map(|(w, v)| w * v).sum()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn weights_sum_to_length() {
        for n in [2usize, 3, 4, 5, 7, 10, 101] {
            let w = simpson_weights(n, PI / n as f64);
            let total: f64 = w.iter().sum();
            assert!((total - PI).abs() < 1e-13, "n = {n}");
        }
    }

    #[test]
    fn exact_for_cubics() {
        for n in [4usize, 5, 9] {
            let x = uniform_grid(n);
            let w = simpson_weights(n, PI / n as f64);
            let f: Vec<f64> = x.iter().map(|x| x * x * x - 2.0 * x).collect();
            let exact = PI.powi(4) / 4.0 - PI * PI;
            assert!((integrate(&w, &f) - exact).abs() < 1e-12);
        }
    }

    #[test]
    fn sine_products_are_exact_on_fine_grids() {
        let n = 400;
        let x = uniform_grid(n);
        let w = simpson_weights(n, PI / n as f64);
        for (j, k) in [(1, 1), (3, 7), (50, 50), (99, 100)] {
            let f: Vec<f64> = x
                .iter()
                .map(|x| (j as f64 * x).sin() * (k as f64 * x).sin())
                .collect();
            let exact = if j == k { PI / 2.0 } else { 0.0 };
            assert!((integrate(&w, &f) - exact).abs() < 1e-13, "({j}, {k})");
        }
    }
}
