//! Fixed-order quadrature on uniform grids.

/// Trapezoidal weights on `n` points with spacing `h`: `h/2` at the ends,
/// `h` inside. These are the weights every solver norm uses, so that discrete
/// balance identities close exactly against the solver stencils.
pub fn trapezoid_weights(n: usize, h: f64) -> Vec<f64> {
    assert!(n >= 2, "trapezoid rule needs at least two points");
    let mut w = vec![h; n];
    w[0] = 0.5 * h;
    w[n - 1] = 0.5 * h;
    w
}

/// Trapezoidal integral over a uniform grid (left-to-right summation order).
pub fn trapezoid(values: &[f64], h: f64) -> f64 {
    assert!(values.len() >= 2);
    let mut sum = 0.5 * h * (values[0] + values[values.len() - 1]);
    for v in &values[1..values.len() - 1] {
        sum += h * v;
    }
    sum
}

/// Composite Simpson integral; requires an even number of intervals
/// (odd point count >= 3). Fourth-order accurate, used where a tolerance is
/// tighter than trapezoid error allows.
pub fn simpson(values: &[f64], h: f64) -> f64 {
    let n = values.len();
    assert!(
        n >= 3 && n % 2 == 1,
        "Simpson rule needs an odd point count >= 3"
    );
    let mut sum = values[0] + values[n - 1];
    for (i, v) in values.iter().enumerate().take(n - 1).skip(1) {
        sum += if i % 2 == 1 { 4.0 * v } else { 2.0 * v };
    }
    sum * h / 3.0
}
