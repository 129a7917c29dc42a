//! Piecewise Hermite interpolation on strictly increasing grids.
//!
//! * [`QuinticHermite`] uses stored first and second derivatives and is the
//!   default for profiles whose derivatives are known at the nodes.
//! * [`CubicHermite`] uses first derivatives only.
//! * [`monotone_slopes`] builds derivative-limited slopes (Fritsch–Carlson)
//!   for tables that carry values alone.

use super::jet::Jet;

/// Index `i` with `x[i] <= t <= x[i+1]`, clamped to the grid.
pub fn locate(x: &[f64], t: f64) -> usize {
    debug_assert!(x.len() >= 2);
    if t <= x[0] {
        return 0;
    }
    let last = x.len() - 2;
    if t >= x[last + 1] {
        return last;
    }
    x.partition_point(|&xi| xi <= t).saturating_sub(1).min(last)
}

/// Returns true if the grid is strictly increasing and finite.
pub fn strictly_increasing(x: &[f64]) -> bool {
    x.iter().all(|v| v.is_finite()) && x.windows(2).all(|w| w[1] > w[0])
}

#[derive(Clone, Debug)]
pub struct QuinticHermite {
    x: Vec<f64>,
    y: Vec<f64>,
    d1: Vec<f64>,
    d2: Vec<f64>,
}

impl QuinticHermite {
    /// # Panics
    /// If lengths differ, fewer than two nodes are given, or the grid is not
    /// strictly increasing.
    pub fn new(x: Vec<f64>, y: Vec<f64>, d1: Vec<f64>, d2: Vec<f64>) -> Self {
        assert!(x.len() >= 2 && x.len() == y.len() && y.len() == d1.len() && d1.len() == d2.len());
        assert!(
            strictly_increasing(&x),
            "interpolation grid must be strictly increasing"
        );
        Self { x, y, d1, d2 }
    }

    pub fn nodes(&self) -> &[f64] {
        &self.x
    }

    pub fn values(&self) -> &[f64] {
        &self.y
    }

    pub fn first(&self) -> &[f64] {
        &self.d1
    }

    pub fn second(&self) -> &[f64] {
        &self.d2
    }

    /// Value and two derivatives at `t` (extrapolates with the end panels).
    pub fn eval(&self, t: f64) -> Jet {
        let i = locate(&self.x, t);
        let h = self.x[i + 1] - self.x[i];
        let u = (t - self.x[i]) / h;
        let (y0, y1) = (self.y[i], self.y[i + 1]);
        let (p0, p1) = (self.d1[i] * h, self.d1[i + 1] * h);
        let (q0, q1) = (self.d2[i] * h * h, self.d2[i + 1] * h * h);
        // Coefficients of the quintic in u.
        let c0 = y0;
        let c1 = p0;
        let c2 = 0.5 * q0;
        let c3 = 10.0 * (y1 - y0) - 6.0 * p0 - 4.0 * p1 - 1.5 * q0 + 0.5 * q1;
        let c4 = -15.0 * (y1 - y0) + 8.0 * p0 + 7.0 * p1 + 1.5 * q0 - q1;
        let c5 = 6.0 * (y1 - y0) - 3.0 * (p0 + p1) - 0.5 * q0 + 0.5 * q1;
        let v = c0 + u * (c1 + u * (c2 + u * (c3 + u * (c4 + u * c5))));
        let du = c1 + u * (2.0 * c2 + u * (3.0 * c3 + u * (4.0 * c4 + u * 5.0 * c5)));
        let ddu = 2.0 * c2 + u * (6.0 * c3 + u * (12.0 * c4 + u * 20.0 * c5));
        Jet::new(v, du / h, ddu / (h * h))
    }
}

#[derive(Clone, Debug)]
pub struct CubicHermite {
    x: Vec<f64>,
    y: Vec<f64>,
    d: Vec<f64>,
}

impl CubicHermite {
    /// # Panics
    /// On mismatched lengths, fewer than two nodes, or a non-increasing grid.
    pub fn new(x: Vec<f64>, y: Vec<f64>, d: Vec<f64>) -> Self {
        assert!(x.len() >= 2 && x.len() == y.len() && y.len() == d.len());
        assert!(
            strictly_increasing(&x),
            "interpolation grid must be strictly increasing"
        );
        Self { x, y, d }
    }

    /// Derivative-limited interpolant of values alone.
    pub fn monotone(x: Vec<f64>, y: Vec<f64>) -> Self {
        let d = monotone_slopes(&x, &y);
        Self::new(x, y, d)
    }

    pub fn nodes(&self) -> &[f64] {
        &self.x
    }

    pub fn values(&self) -> &[f64] {
        &self.y
    }

    pub fn slopes(&self) -> &[f64] {
        &self.d
    }

    pub fn eval(&self, t: f64) -> Jet {
        let i = locate(&self.x, t);
        let h = self.x[i + 1] - self.x[i];
        let u = (t - self.x[i]) / h;
        let (y0, y1) = (self.y[i], self.y[i + 1]);
        let (p0, p1) = (self.d[i] * h, self.d[i + 1] * h);
        let c2 = 3.0 * (y1 - y0) - 2.0 * p0 - p1;
        let c3 = -2.0 * (y1 - y0) + p0 + p1;
        let v = y0 + u * (p0 + u * (c2 + u * c3));
        let du = p0 + u * (2.0 * c2 + 3.0 * u * c3);
        let ddu = 2.0 * c2 + 6.0 * u * c3;
        Jet::new(v, du / h, ddu / (h * h))
    }
}

/// Fritsch–Carlson slopes: three-point estimates limited so that the cubic
/// Hermite interpolant is monotone on every panel where the data are.
pub fn monotone_slopes(x: &[f64], y: &[f64]) -> Vec<f64> {
    let n = x.len();
    assert!(n >= 2 && y.len() == n);
    let delta: Vec<f64> = (0..n - 1).map(|i| (y[i + 1] - y[i]) / (x[i + 1] - x[i])).collect();
    if n == 2 {
        return vec![delta[0]; 2];
    }
    let h: Vec<f64> = (0..n - 1).map(|i| x[i + 1] - x[i]).collect();
    let mut d = vec![0.0; n];
    for i in 1..n - 1 {
        if delta[i - 1] * delta[i] > 0.0 {
            // Weighted harmonic mean (Fritsch–Butland form).
            let w1 = 2.0 * h[i] + h[i - 1];
            let w2 = h[i] + 2.0 * h[i - 1];
            d[i] = (w1 + w2) / (w1 / delta[i - 1] + w2 / delta[i]);
        }
    }
    let end = |h0: f64, h1: f64, d0: f64, d1: f64| {
        let s = ((2.0 * h0 + h1) * d0 - h0 * d1) / (h0 + h1);
        if s * d0 <= 0.0 {
            0.0
        } else if d0 * d1 <= 0.0 && s.abs() > 3.0 * d0.abs() {
            3.0 * d0
        } else {
            s
        }
    };
    d[0] = end(h[0], h[1], delta[0], delta[1]);
    d[n - 1] = end(h[n - 2], h[n - 3], delta[n - 2], delta[n - 3]);
    d
}
