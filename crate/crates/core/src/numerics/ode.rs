//! Adaptive Dormand–Prince 5(4) integrator.
//!
//! The integrator lands exactly on each requested output node, lets the
//! caller project the state after every accepted step (used to clamp the
//! Jang slope below one), and treats a non-finite right-hand side as a
//! rejected step rather than a failure.

use thiserror::Error;

/// Failure modes of [`integrate`].
#[derive(Debug, Error, Clone, PartialEq)]
pub enum OdeError {
    #[error("step size underflow at t = {t:e} (h = {h:e})")]
    StepUnderflow { t: f64, h: f64 },
    #[error("step budget of {max_steps} exhausted at t = {t:e}")]
    TooManySteps { t: f64, max_steps: usize },
    #[error("integration aborted at t = {t:e}: {reason}")]
    Aborted { t: f64, reason: String },
}

#[derive(Clone, Copy, Debug)]
pub struct OdeOptions {
    pub rtol: f64,
    pub atol: f64,
    /// Upper bound on any single step.
    pub max_step: f64,
    /// Steps shorter than `min_step_rel · max(1, |t|)` count as underflow.
    pub min_step_rel: f64,
    pub max_steps: usize,
    pub initial_step: Option<f64>,
}

impl Default for OdeOptions {
    fn default() -> Self {
        Self {
            rtol: 1e-10,
            atol: 1e-12,
            max_step: f64::INFINITY,
            min_step_rel: 1e-15,
            max_steps: 2_000_000,
            initial_step: None,
        }
    }
}

/// A first-order system `y' = f(t, y)` of fixed dimension.
pub trait OdeSystem<const N: usize> {
    /// Returns `None` when the state lies outside the domain of the
    /// right-hand side; the step is then retried with a smaller size.
    fn rhs(&mut self, t: f64, y: &[f64; N]) -> Option<[f64; N]>;

    /// Called after every accepted step; may modify the state in place.
    fn project(&mut self, _t: f64, _y: &mut [f64; N]) -> Result<(), String> {
        Ok(())
    }
}

/// Counters collected during integration.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq)]
pub struct OdeStats {
    pub accepted: usize,
    pub rejected: usize,
    pub rhs_evals: usize,
}

#[derive(Clone, Debug)]
pub struct OdeOutput<const N: usize> {
    /// State at each requested node, in order.
    pub y: Vec<[f64; N]>,
    pub stats: OdeStats,
}

const C2: f64 = 1.0 / 5.0;
const C3: f64 = 3.0 / 10.0;
const C4: f64 = 4.0 / 5.0;
const C5: f64 = 8.0 / 9.0;
const A21: f64 = 1.0 / 5.0;
const A31: f64 = 3.0 / 40.0;
const A32: f64 = 9.0 / 40.0;
const A41: f64 = 44.0 / 45.0;
const A42: f64 = -56.0 / 15.0;
const A43: f64 = 32.0 / 9.0;
const A51: f64 = 19372.0 / 6561.0;
const A52: f64 = -25360.0 / 2187.0;
const A53: f64 = 64448.0 / 6561.0;
const A54: f64 = -212.0 / 729.0;
const A61: f64 = 9017.0 / 3168.0;
const A62: f64 = -355.0 / 33.0;
const A63: f64 = 46732.0 / 5247.0;
const A64: f64 = 49.0 / 176.0;
const A65: f64 = -5103.0 / 18656.0;
const B1: f64 = 35.0 / 384.0;
const B3: f64 = 500.0 / 1113.0;
const B4: f64 = 125.0 / 192.0;
const B5: f64 = -2187.0 / 6784.0;
const B6: f64 = 11.0 / 84.0;
// Differences between the fifth- and fourth-order weights.
const E1: f64 = 71.0 / 57600.0;
const E3: f64 = -71.0 / 16695.0;
const E4: f64 = 71.0 / 1920.0;
const E5: f64 = -17253.0 / 339200.0;
const E6: f64 = 22.0 / 525.0;
const E7: f64 = -1.0 / 40.0;

fn axpy<const N: usize>(y: &[f64; N], h: f64, terms: &[(f64, &[f64; N])]) -> [f64; N] {
    let mut out = *y;
    for (i, o) in out.iter_mut().enumerate() {
        let mut acc = 0.0;
        for (c, k) in terms {
            acc += c * k[i];
        }
        *o += h * acc;
    }
    out
}

fn finite<const N: usize>(y: &[f64; N]) -> bool {
    y.iter().all(|v| v.is_finite())
}

/// Integrates from `(t0, y0)` through the increasing `nodes`, all `>= t0`.
pub fn integrate<const N: usize, S: OdeSystem<N>>(
    sys: &mut S,
    t0: f64,
    y0: [f64; N],
    nodes: &[f64],
    opts: &OdeOptions,
) -> Result<OdeOutput<N>, OdeError> {
    let mut stats = OdeStats::default();
    let mut out = Vec::with_capacity(nodes.len());
    let mut t = t0;
    let mut y = y0;
    let Some(t_end) = nodes.last().copied() else {
        return Ok(OdeOutput { y: out, stats });
    };

    let mut k1 = sys.rhs(t, &y).filter(finite).ok_or_else(|| OdeError::Aborted {
        t,
        reason: "right-hand side undefined at start".into(),
    })?;
    stats.rhs_evals += 1;

    let span = (t_end - t0).abs().max(f64::MIN_POSITIVE);
    let mut h = opts.initial_step.unwrap_or_else(|| {
        let scale: f64 = y
            .iter()
            .zip(k1.iter())
            .map(|(yi, ki)| (ki.abs() / (opts.atol + opts.rtol * yi.abs())).powi(2))
            .sum::<f64>()
            / N as f64;
        let guess = if scale > 0.0 { 0.01 / scale.sqrt() } else { 1e-3 * span };
        guess.min(1e-2 * span)
    });
    h = h.min(opts.max_step).max(f64::MIN_POSITIVE);

    let mut node_idx = 0;
    while node_idx < nodes.len() && nodes[node_idx] <= t {
        out.push(y);
        node_idx += 1;
    }
    let mut last_error_norm: f64 = 1e-4;

    while node_idx < nodes.len() {
        if stats.accepted + stats.rejected >= opts.max_steps {
            return Err(OdeError::TooManySteps {
                t,
                max_steps: opts.max_steps,
            });
        }
        let target = nodes[node_idx];
        let mut hit = false;
        let mut step = h.min(opts.max_step);
        if t + step >= target || t + 1.01 * step >= target {
            step = target - t;
            hit = true;
        }
        if step <= opts.min_step_rel * t.abs().max(1.0) {
            return Err(OdeError::StepUnderflow { t, h: step });
        }

        let stages = (|| {
            let k2 = sys.rhs(t + C2 * step, &axpy(&y, step, &[(A21, &k1)]))?;
            let k3 = sys.rhs(t + C3 * step, &axpy(&y, step, &[(A31, &k1), (A32, &k2)]))?;
            let k4 = sys.rhs(t + C4 * step, &axpy(&y, step, &[(A41, &k1), (A42, &k2), (A43, &k3)]))?;
            let k5 = sys.rhs(
                t + C5 * step,
                &axpy(&y, step, &[(A51, &k1), (A52, &k2), (A53, &k3), (A54, &k4)]),
            )?;
            let k6 = sys.rhs(
                t + step,
                &axpy(&y, step, &[(A61, &k1), (A62, &k2), (A63, &k3), (A64, &k4), (A65, &k5)]),
            )?;
            let y_new = axpy(&y, step, &[(B1, &k1), (B3, &k3), (B4, &k4), (B5, &k5), (B6, &k6)]);
            let k7 = sys.rhs(t + step, &y_new)?;
            let all = [&k2, &k3, &k4, &k5, &k6, &k7];
            if !finite(&y_new) || all.iter().any(|k| !finite(k)) {
                return None;
            }
            Some((k3, k4, k5, k6, k7, y_new))
        })();
        stats.rhs_evals += 6;

        let Some((k3, k4, k5, k6, k7, mut y_new)) = stages else {
            stats.rejected += 1;
            h = 0.25 * step;
            continue;
        };

        let mut err = 0.0;
        for i in 0..N {
            let e = step * (E1 * k1[i] + E3 * k3[i] + E4 * k4[i] + E5 * k5[i] + E6 * k6[i] + E7 * k7[i]);
            let sc = opts.atol + opts.rtol * y[i].abs().max(y_new[i].abs());
            err += (e / sc).powi(2);
        }
        let err = (err / N as f64).sqrt();

        if err <= 1.0 {
            let t_new = if hit { target } else { t + step };
            sys.project(t_new, &mut y_new)
                .map_err(|reason| OdeError::Aborted { t: t_new, reason })?;
            stats.accepted += 1;
            t = t_new;
            y = y_new;
            k1 = match sys.rhs(t, &y).filter(finite) {
                Some(k) => k,
                None => k7,
            };
            stats.rhs_evals += 1;
            while node_idx < nodes.len() && nodes[node_idx] <= t {
                out.push(y);
                node_idx += 1;
            }
            // PI controller on the error norm.
            let e = err.max(1e-10);
            let fac = 0.9 * e.powf(-0.7 / 5.0) * last_error_norm.powf(0.4 / 5.0);
            last_error_norm = e;
            let grow = fac.clamp(0.2, 5.0);
            // A step shortened to hit a node says nothing about the natural step size.
            let base = if hit { h.max(step) } else { step };
            h = (base * grow).min(opts.max_step);
        } else {
            stats.rejected += 1;
            let fac = (0.9 * err.powf(-0.2)).clamp(0.1, 0.9);
            h = step * fac;
        }
    }
    Ok(OdeOutput { y: out, stats })
}

#[cfg(test)]
mod tests {
    use super::*;

    struct Decay;
    impl OdeSystem<1> for Decay {
        fn rhs(&mut self, _t: f64, y: &[f64; 1]) -> Option<[f64; 1]> {
            Some([-y[0]])
        }
    }

    struct Oscillator;
    impl OdeSystem<2> for Oscillator {
        fn rhs(&mut self, _t: f64, y: &[f64; 2]) -> Option<[f64; 2]> {
            Some([y[1], -y[0]])
        }
    }

    #[test]
    fn exponential_decay_hits_nodes_exactly() {
        let nodes: Vec<f64> = (0..=20).map(|i| 0.5 * f64::from(i)).collect();
        let out = integrate(&mut Decay, 0.0, [1.0], &nodes, &OdeOptions::default()).unwrap();
        assert_eq!(out.y.len(), nodes.len());
        for (t, y) in nodes.iter().zip(&out.y) {
            assert!((y[0] - (-t).exp()).abs() < 1e-10, "t={t}");
        }
    }

    #[test]
    fn harmonic_oscillator_conserves_phase() {
        let nodes = [std::f64::consts::PI, 2.0 * std::f64::consts::PI];
        let out = integrate(&mut Oscillator, 0.0, [0.0, 1.0], &nodes, &OdeOptions::default()).unwrap();
        assert!(out.y[0][0].abs() < 1e-9);
        assert!((out.y[1][1] - 1.0).abs() < 1e-9);
    }

    struct Blowup;
    impl OdeSystem<1> for Blowup {
        fn rhs(&mut self, _t: f64, y: &[f64; 1]) -> Option<[f64; 1]> {
            Some([y[0] * y[0]])
        }
    }

    #[test]
    fn finite_time_blowup_is_reported() {
        let r = integrate(&mut Blowup, 0.0, [1.0], &[2.0], &OdeOptions::default());
        assert!(r.is_err());
    }

    struct SqrtDomain;
    impl OdeSystem<1> for SqrtDomain {
        fn rhs(&mut self, t: f64, _y: &[f64; 1]) -> Option<[f64; 1]> {
            (t <= 1.0).then(|| [(1.0 - t).max(0.0).sqrt()])
        }
    }

    #[test]
    fn undefined_stages_shrink_the_step() {
        let out = integrate(&mut SqrtDomain, 0.0, [0.0], &[1.0], &OdeOptions::default()).unwrap();
        assert!((out.y[0][0] - 2.0 / 3.0).abs() < 1e-8);
    }

    #[test]
    fn max_step_is_respected() {
        let opts = OdeOptions {
            max_step: 0.01,
            ..OdeOptions::default()
        };
        let out = integrate(&mut Decay, 0.0, [1.0], &[1.0], &opts).unwrap();
        assert!(out.stats.accepted >= 100);
    }
}
