//! Polynomial extrapolation to zero of the abscissa (Neville tableau).

/// Extrapolates samples `(x_i, y_i)` to `x = 0`.
///
/// Returns the diagonal of the Neville tableau: entry `k` is the value at
/// zero of the degree-`k` polynomial through the last `k + 1` samples, so
/// `est[0]` is the raw final sample and `est[len-1]` uses every sample.
/// Samples should be ordered with decreasing `|x|`.
pub fn neville_to_zero(x: &[f64], y: &[f64]) -> Vec<f64> {
    assert_eq!(x.len(), y.len());
    let n = x.len();
    let mut p: Vec<f64> = y.to_vec();
    let mut diag = Vec::with_capacity(n);
    diag.push(p[n - 1]);
    for k in 1..n {
        for i in 0..n - k {
            let (xi, xk) = (x[i], x[i + k]);
            p[i] = (xi * p[i + 1] - xk * p[i]) / (xi - xk);
        }
        diag.push(p[n - 1 - k]);
    }
    // `diag[k]` so far is the polynomial through samples n-1-k ..= n-1.
    diag
}

/// Limit estimate with a spread between the two highest orders.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Extrapolated {
    pub value: f64,
    /// `|best − next best|`.
    pub spread: f64,
}

/// Highest-order extrapolant together with its spread against the
/// next-lower order.
pub fn extrapolate(x: &[f64], y: &[f64]) -> Extrapolated {
    let d = neville_to_zero(x, y);
    let value = *d.last().expect("at least one sample");
    let spread = if d.len() >= 2 {
        (value - d[d.len() - 2]).abs()
    } else {
        f64::INFINITY
    };
    Extrapolated { value, spread }
}

/// Richardson step for a sequence computed at parameters `h` and `h/ratio`
/// with leading error of order `order`.
pub fn richardson(coarse: f64, fine: f64, ratio: f64, order: i32) -> f64 {
    let f = ratio.powi(order);
    fine + (fine - coarse) / (f - 1.0)
}
