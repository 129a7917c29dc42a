//! Arclength charts over a radial coordinate with a simple horizon zero.
//!
//! Given `V(x) = (dx/ds)²` vanishing linearly at `x_h`, the arclength from
//! the horizon is `s(x) = ∫ dx/√V`. With `x = x_h + ξ²` the integrand
//! becomes `2ξ/√V`, which stays finite at `ξ = 0`. A cumulative table on a
//! graded ξ-grid supports inversion by Newton iteration on one panel.

use crate::error::{Error, Result};
use crate::numerics::interp::locate;
use crate::numerics::quad;

/// `V` and `dV/dx` as functions of the offset `δ = x − x_h ≥ 0`.
///
/// Implementations should evaluate `V` without cancellation for small `δ`.
pub trait Lapse {
    fn horizon(&self) -> f64;
    fn v(&self, delta: f64) -> f64;
    fn v_x(&self, delta: f64) -> f64;
}

#[derive(Clone, Debug)]
pub struct Chart {
    xi: Vec<f64>,
    s: Vec<f64>,
    quad_rel: f64,
}

fn integrand<L: Lapse + ?Sized>(lapse: &L, xi: f64) -> f64 {
    if xi == 0.0 {
        return 2.0 / lapse.v_x(0.0).sqrt();
    }
    2.0 * xi / lapse.v(xi * xi).sqrt()
}

impl Chart {
    /// Tabulates `s` up to the offset `delta_max` on `nodes` graded ξ-nodes.
    pub fn build<L: Lapse + ?Sized>(lapse: &L, delta_max: f64, nodes: usize, quad_rel: f64) -> Result<Self> {
        if !(delta_max > 0.0) || nodes < 8 {
            return Err(Error::Domain(
                "chart needs a positive extent and at least 8 nodes".into(),
            ));
        }
        if !(lapse.v_x(0.0) > 0.0) {
            return Err(Error::Construction("lapse must vanish linearly at the horizon".into()));
        }
        let xi_max = delta_max.sqrt();
        let scale = 0.1 * lapse.horizon().max(1e-300).sqrt();
        let kappa = (1.0 + xi_max / scale).ln();
        let xi: Vec<f64> = (0..nodes)
            .map(|i| xi_max * (kappa * i as f64 / (nodes - 1) as f64).exp_m1() / kappa.exp_m1())
            .collect();
        let s = quad::cumulative(|t| integrand(lapse, t), &xi, 0.0, quad_rel)?;
        if !s.windows(2).all(|w| w[1] > w[0]) {
            return Err(Error::Numeric("arclength table is not increasing".into()));
        }
        Ok(Self { xi, s, quad_rel })
    }

    /// Largest tabulated arclength.
    pub fn s_max(&self) -> f64 {
        *self.s.last().expect("non-empty chart")
    }

    pub fn delta_max(&self) -> f64 {
        let x = *self.xi.last().expect("non-empty chart");
        x * x
    }

    /// Arclength from the horizon to offset `delta`.
    pub fn s_of_delta<L: Lapse + ?Sized>(&self, lapse: &L, delta: f64) -> Result<f64> {
        let xi = delta.max(0.0).sqrt();
        let i = locate(&self.xi, xi);
        let piece = quad::integrate(|t| integrand(lapse, t), self.xi[i], xi, 0.0, self.quad_rel)?;
        Ok(self.s[i] + piece.value)
    }

    /// Offset `δ = x − x_h` at arclength `s`.
    pub fn delta_of_s<L: Lapse + ?Sized>(&self, lapse: &L, s: f64) -> Result<f64> {
        if s <= 0.0 {
            return Ok(0.0);
        }
        if s > self.s_max() * (1.0 + 1e-12) {
            return Err(Error::Domain(format!("s = {s} beyond chart end {}", self.s_max())));
        }
        let i = locate(&self.s, s);
        let (a, b) = (self.xi[i], self.xi[i + 1]);
        let (sa, sb) = (self.s[i], self.s[i + 1]);
        let residual = |xi: f64| -> Result<f64> {
            Ok(self.s[i] + quad::integrate(|t| integrand(lapse, t), a, xi, 0.0, self.quad_rel)?.value - s)
        };
        let (mut lo, mut hi) = (a, b);
        let mut xi = a + (b - a) * ((s - sa) / (sb - sa)).clamp(0.0, 1.0);
        for _ in 0..60 {
            let r = residual(xi)?;
            if r == 0.0 {
                break;
            }
            if r > 0.0 {
                hi = xi;
            } else {
                lo = xi;
            }
            let step = r / integrand(lapse, xi);
            let mut next = xi - step;
            if !(next > lo && next < hi) {
                next = 0.5 * (lo + hi);
            }
            if (next - xi).abs() <= 4.0 * f64::EPSILON * xi.abs().max(f64::MIN_POSITIVE) {
                xi = next;
                break;
            }
            xi = next;
        }
        Ok(xi * xi)
    }
}
