//! Globally adaptive Gauss–Kronrod (7, 15) quadrature.

use std::collections::BinaryHeap;
use thiserror::Error;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum QuadError {
    #[error("integrand is not finite at x = {x:e}")]
    NonFinite { x: f64 },
    #[error("tolerance not reached after {subdivisions} subdivisions (estimate {value:e} ± {error:e})")]
    NotConverged {
        value: f64,
        error: f64,
        subdivisions: usize,
    },
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct QuadResult {
    pub value: f64,
    pub error: f64,
}

const XGK: [f64; 8] = [
    0.991_455_371_120_812_6,
    0.949_107_912_342_758_5,
    0.864_864_423_359_769_1,
    0.741_531_185_599_394_4,
    0.586_087_235_467_691_1,
    0.405_845_151_377_397_2,
    0.207_784_955_007_898_5,
    0.0,
];
const WGK: [f64; 8] = [
    0.022_935_322_010_529_22,
    0.063_092_092_629_978_55,
    0.104_790_010_322_250_2,
    0.140_653_259_715_525_9,
    0.169_004_726_639_267_9,
    0.190_350_578_064_785_4,
    0.204_432_940_075_298_9,
    0.209_482_141_084_727_8,
];
const WG: [f64; 4] = [
    0.129_484_966_168_869_7,
    0.279_705_391_489_276_7,
    0.381_830_050_505_118_9,
    0.417_959_183_673_469_4,
];

/// One 15-point Kronrod panel with the embedded 7-point Gauss estimate.
pub fn gk15(f: &mut impl FnMut(f64) -> f64, a: f64, b: f64) -> Result<QuadResult, QuadError> {
    let c = 0.5 * (a + b);
    let hl = 0.5 * (b - a);
    let fc = f(c);
    if !fc.is_finite() {
        return Err(QuadError::NonFinite { x: c });
    }
    let mut kron = WGK[7] * fc;
    let mut gauss = WG[3] * fc;
    for j in 0..7 {
        let dx = hl * XGK[j];
        let (x1, x2) = (c - dx, c + dx);
        let (f1, f2) = (f(x1), f(x2));
        if !f1.is_finite() {
            return Err(QuadError::NonFinite { x: x1 });
        }
        if !f2.is_finite() {
            return Err(QuadError::NonFinite { x: x2 });
        }
        kron += WGK[j] * (f1 + f2);
        if j % 2 == 1 {
            gauss += WG[j / 2] * (f1 + f2);
        }
    }
    let value = kron * hl;
    let raw = ((kron - gauss) * hl).abs();
    // Standard QUADPACK-style sharpening of the raw difference.
    let error = if raw > 0.0 {
        raw * (200.0 * raw / value.abs().max(raw)).powf(1.5).min(1.0)
    } else {
        0.0
    };
    Ok(QuadResult { value, error })
}

#[derive(PartialEq)]
struct Panel {
    a: f64,
    b: f64,
    r: QuadResult,
}

impl Eq for Panel {}

impl PartialOrd for Panel {
    fn partial_cmp(&self, other: &Self) -> Option<std::cmp::Ordering> {
        Some(self.cmp(other))
    }
}

impl Ord for Panel {
    fn cmp(&self, other: &Self) -> std::cmp::Ordering {
        self.r.error.total_cmp(&other.r.error)
    }
}

/// Integrates `f` over `[a, b]` until the error estimate is below
/// `max(abs_tol, rel_tol · |value|)`.
pub fn integrate(
    mut f: impl FnMut(f64) -> f64,
    a: f64,
    b: f64,
    abs_tol: f64,
    rel_tol: f64,
) -> Result<QuadResult, QuadError> {
    if a == b {
        return Ok(QuadResult { value: 0.0, error: 0.0 });
    }
    const MAX_PANELS: usize = 2000;
    let first = gk15(&mut f, a, b)?;
    let mut total = first;
    let mut heap = BinaryHeap::new();
    heap.push(Panel { a, b, r: first });
    let mut subdivisions = 0;
    let rel_tol = rel_tol.max(4.0 * f64::EPSILON);
    while total.error > abs_tol.max(rel_tol * total.value.abs()) {
        if subdivisions >= MAX_PANELS {
            return Err(QuadError::NotConverged {
                value: total.value,
                error: total.error,
                subdivisions,
            });
        }
        let worst = heap.pop().expect("heap holds at least one panel");
        let m = 0.5 * (worst.a + worst.b);
        if m <= worst.a.min(worst.b) || m >= worst.a.max(worst.b) {
            // Panel cannot be split further in floating point.
            heap.push(worst);
            return Err(QuadError::NotConverged {
                value: total.value,
                error: total.error,
                subdivisions,
            });
        }
        let left = gk15(&mut f, worst.a, m)?;
        let right = gk15(&mut f, m, worst.b)?;
        total.value += left.value + right.value - worst.r.value;
        total.error += left.error + right.error - worst.r.error;
        heap.push(Panel {
            a: worst.a,
            b: m,
            r: left,
        });
        heap.push(Panel {
            a: m,
            b: worst.b,
            r: right,
        });
        subdivisions += 1;
        if subdivisions % 64 == 0 {
            // Re-sum to keep the running totals free of drift.
            total.value = heap.iter().map(|p| p.r.value).sum();
            total.error = heap.iter().map(|p| p.r.error).sum();
        }
    }
    total.value = heap.iter().map(|p| p.r.value).sum();
    Ok(total)
}

/// Running integral `∫_{nodes[0]}^{nodes[i]} f` for every node.
pub fn cumulative(
    mut f: impl FnMut(f64) -> f64,
    nodes: &[f64],
    abs_tol: f64,
    rel_tol: f64,
) -> Result<Vec<f64>, QuadError> {
    let mut out = Vec::with_capacity(nodes.len());
    let mut acc = 0.0;
    if let Some(_) = nodes.first() {
        out.push(0.0);
    }
    for w in nodes.windows(2) {
        let piece = integrate(&mut f, w[0], w[1], abs_tol, rel_tol)?;
        acc += piece.value;
        out.push(acc);
    }
    Ok(out)
}
