//! Least-squares line fit used by the power-law scaling diagnostics.

/// Ordinary least squares for `y = slope*x + intercept`.
/// Panics if fewer than two points are supplied; callers validate sample
/// counts against their own minimums first.
pub fn least_squares_line(xs: &[f64], ys: &[f64]) -> (f64, f64) {
    assert_eq!(xs.len(), ys.len(), "sample length mismatch");
    let n = xs.len();
    assert!(n >= 2, "line fit needs at least two points");
    let nf = n as f64;
    let mean_x = xs.iter().sum::<f64>() / nf;
    let mean_y = ys.iter().sum::<f64>() / nf;
    let mut sxx = 0.0;
    let mut sxy = 0.0;
    for i in 0..n {
        let dx = xs[i] - mean_x;
        sxx += dx * dx;
        sxy += dx * (ys[i] - mean_y);
    }
    assert!(sxx > 0.0, "degenerate fit: all abscissae equal");
    let slope = sxy / sxx;
    (slope, mean_y - slope * mean_x)
}
