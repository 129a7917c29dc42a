//! The radial generalized Jang equation coupled to inverse mean curvature
//! flow.
//!
//! With `φ = √(1−v²) R'` the Jang equation for a graph `f(s)` becomes a
//! first-order ODE for the slope variable `v = φ f'/√(1 + φ² f'²)`:
//!
//! ```text
//! (1−v²) v' + (1−v²) F∓(s, v) ± θ∓ = 0,
//! F∓(s, v) = ∓ H/(1 ± v) + v R''/R' − k_a,   H = (d−1) R'/R.
//! ```
//!
//! Both signs describe the same equation. The solver uses the minus form
//! for `v ≥ 0` and the plus form for `v < 0`, so that the large terms
//! `H/(1∓v)` never appear next to a barrier they would cancel against.
//!
//! Boundary behaviour is selected by [`JangBC`]:
//!
//! * unit data `v(0) = ±1` start with the substitution `w = v − v²/2`,
//!   whose equation is regular at `|v| = 1`;
//! * `v(0) = 0` on a minimal boundary is reached through solutions started
//!   at `s = ε` and extrapolated to `ε → 0`;
//! * an interior value `|α| < 1` is integrated directly.

use std::io::Write;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::initial_data::{BoundaryType, Extrinsic, InitialDataSet, RadialProfile};
use crate::numerics::extrap::richardson;
use crate::numerics::fit::{exponential_rate, power_law_exponent};
use crate::numerics::ode::{integrate, OdeError, OdeOptions, OdeSystem};
use crate::numerics::Jet;
use crate::tolerances::Tolerances;

/// Boundary value of the Jang slope at the inner boundary.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "bc", rename_all = "kebab-case")]
pub enum JangBC {
    /// `v(0) = α` with `|α| < 1`; needs `H(0) ≠ 0`.
    Interior { alpha: f64 },
    /// `v(0) = +1` on a past apparent horizon (`θ₋(0) = 0`, `H(0) ≠ 0`).
    PastHorizonUnit,
    /// `v(0) = −1` on a future apparent horizon (`θ₊(0) = 0`, `H(0) ≠ 0`).
    FutureHorizonUnit,
    /// `v(0) = 0` on a minimal boundary (`H(0) = 0`).
    DegenerateZero,
}

impl JangBC {
    pub fn initial_value(&self) -> f64 {
        match *self {
            JangBC::Interior { alpha } => alpha,
            JangBC::PastHorizonUnit => 1.0,
            JangBC::FutureHorizonUnit => -1.0,
            JangBC::DegenerateZero => 0.0,
        }
    }

    /// The boundary-type rule: past horizon → `+1`, future horizon → `−1`,
    /// minimal → `0`.
    pub fn for_boundary(kind: BoundaryType) -> Result<Self> {
        match kind {
            BoundaryType::Minimal => Ok(JangBC::DegenerateZero),
            BoundaryType::PastHorizon => Ok(JangBC::PastHorizonUnit),
            BoundaryType::FutureHorizon => Ok(JangBC::FutureHorizonUnit),
            BoundaryType::NotHorizon => Err(Error::Precondition("inner boundary is not an apparent horizon".into())),
        }
    }

    /// Chooses the boundary condition from the data with tolerance `zero`.
    pub fn from_data(data: &InitialDataSet, zero: f64) -> Result<Self> {
        Self::for_boundary(data.boundary_type(zero)?)
    }

    /// Checks compatibility with the boundary of `data`.
    pub fn check(&self, data: &InitialDataSet, zero: f64) -> Result<()> {
        let h = data.mean_curvature(0.0)?;
        let (tp, tm) = data.null_expansions(0.0)?;
        let z = zero * (data.dimension() - 1) as f64 / data.radius.value(0.0);
        let fail = |why: &str| Err(Error::Precondition(format!("{self:?} needs {why}")));
        match *self {
            JangBC::Interior { alpha } if !(alpha.abs() < 1.0) => fail("|α| < 1"),
            JangBC::Interior { .. } if h.abs() <= z => fail("H(0) ≠ 0"),
            JangBC::PastHorizonUnit if h.abs() <= z || tm.abs() > z => fail("θ₋(0) = 0 and H(0) ≠ 0"),
            JangBC::FutureHorizonUnit if h.abs() <= z || tp.abs() > z => fail("θ₊(0) = 0 and H(0) ≠ 0"),
            JangBC::DegenerateZero if h.abs() > z => fail("H(0) = 0"),
            _ => Ok(()),
        }
    }
}

/// Which rearrangement of the equation to evaluate.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Branch {
    /// `(1−v²)v' + (1−v²)F₋ + θ₋ = 0`.
    Minus,
    /// `(1−v²)v' + (1−v²)F₊ − θ₊ = 0`.
    Plus,
}

/// Radial quantities entering the equation, with `k` multiplied by `sigma`.
#[derive(Clone, Copy, Debug)]
struct Coefficients {
    h: f64,
    /// `R''/R'`.
    curl: f64,
    k_a: f64,
    /// `Tr_Σ k`.
    t: f64,
}

impl Coefficients {
    fn at(data: &InitialDataSet, s: f64, sigma: f64) -> Result<Self> {
        let r = data.radius.eval(s);
        if r.d1 == 0.0 {
            return Err(Error::Singularity {
                s,
                what: "R' = 0 in the Jang equation".into(),
            });
        }
        Ok(Self {
            h: (data.dimension() - 1) as f64 * r.d1 / r.v,
            curl: r.d2 / r.d1,
            k_a: sigma * data.extrinsic.k_a.value(s),
            t: sigma * data.trace_sigma_k(s).v,
        })
    }

    fn rhs(&self, v: f64, branch: Branch) -> f64 {
        let q = 1.0 - v * v;
        match branch {
            Branch::Minus => {
                let theta = self.h - self.t;
                let f = -self.h / (1.0 + v) + v * self.curl - self.k_a;
                -f - theta / q
            }
            Branch::Plus => {
                let theta = self.h + self.t;
                let f = self.h / (1.0 - v) + v * self.curl - self.k_a;
                -f + theta / q
            }
        }
    }

    fn rhs_auto(&self, v: f64) -> f64 {
        self.rhs(v, if v >= 0.0 { Branch::Minus } else { Branch::Plus })
    }
}

/// `v'` from the selected rearrangement of the Jang equation.
pub fn jang_rhs(data: &InitialDataSet, s: f64, v: f64, branch: Branch) -> Result<f64> {
    if !(v.abs() <= 1.0) {
        return Err(Error::Domain(format!("Jang slope |v| = {} exceeds one", v.abs())));
    }
    if (branch == Branch::Minus && v == -1.0) || (branch == Branch::Plus && v == 1.0) {
        return Err(Error::Singularity {
            s,
            what: format!("{branch:?} form is singular at v = {v}"),
        });
    }
    let c = Coefficients::at(data, s, 1.0)?;
    let out = c.rhs(v, branch);
    if !out.is_finite() {
        return Err(Error::Singularity {
            s,
            what: format!("v' is not finite at v = {v}"),
        });
    }
    Ok(out)
}

/// Solver settings.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct JangOptions {
    pub rtol: f64,
    pub atol: f64,
    /// End of the `w`-substituted interval as a fraction of `R(0)`.
    pub w_switch_fraction: f64,
    /// Start offsets for the `v(0) = 0` scheme, as fractions of `R(0)`.
    pub eps_fractions: [f64; 3],
    /// Required agreement of successive `ε`-extrapolants.
    pub eps_richardson: f64,
    pub max_clamps: usize,
    /// Optional cap on the integrator step.
    pub max_step: Option<f64>,
    /// Zero tolerance for classifying the boundary.
    pub zero: f64,
}

impl Default for JangOptions {
    fn default() -> Self {
        Self::from_tolerances(&Tolerances::default())
    }
}

impl JangOptions {
    pub fn from_tolerances(t: &Tolerances) -> Self {
        Self {
            rtol: t.ode_rtol,
            atol: t.ode_atol,
            w_switch_fraction: t.w_switch_fraction,
            eps_fractions: [1e-3, 1e-4, 1e-5],
            eps_richardson: t.eps_richardson,
            max_clamps: t.max_clamps,
            max_step: None,
            zero: t.zero,
        }
    }

    fn ode(&self) -> OdeOptions {
        OdeOptions {
            rtol: self.rtol,
            atol: self.atol,
            max_step: self.max_step.unwrap_or(f64::INFINITY),
            ..OdeOptions::default()
        }
    }
}

/// Observed tail behaviour of `|v| + s|v'|` (flat) or `|v| + |v'|`
/// (hyperbolic).
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "kebab-case")]
pub enum Decay {
    /// The solution vanishes identically on the tail.
    Vanishing,
    /// Fitted `p` in `C s^p`.
    Power { exponent: f64 },
    /// Fitted `q` in `C e^{−q s}`.
    Exponential { rate: f64 },
}

impl Decay {
    /// Checks the flat bound `p ≤ −2τ₀ + slack` or the hyperbolic bound
    /// `q ≥ factor·min{q_data, 2n+2}`.
    pub fn meets(&self, data: &InitialDataSet, slack: f64, factor: f64) -> bool {
        let n = data.n() as f64;
        match (*self, data.asymptotic) {
            (Decay::Vanishing, _) => true,
            (Decay::Power { exponent }, crate::initial_data::AsymptoticClass::Flat { tau }) => {
                let tau0 = 0.95 * tau.min(n + 0.5);
                exponent <= -2.0 * tau0 + slack
            }
            (Decay::Exponential { rate }, crate::initial_data::AsymptoticClass::Hyperbolic { q }) => {
                rate >= factor * q.min(2.0 * n + 2.0)
            }
            _ => false,
        }
    }

    /// Exponent or rate as a single number (`−∞` / `+∞` when vanishing).
    pub fn value(&self) -> f64 {
        match *self {
            Decay::Vanishing => f64::NEG_INFINITY,
            Decay::Power { exponent } => exponent,
            Decay::Exponential { rate } => rate,
        }
    }
}

/// Jang slope on the grid of the data set, with the arclength of the Jang
/// metric and the warping function `φ`.
#[derive(Clone, Debug)]
pub struct JangSolution {
    pub bc: JangBC,
    pub s: Vec<f64>,
    pub v: Vec<f64>,
    pub dv: Vec<f64>,
    /// `s̄(s) = ∫₀ˢ (1−v²)^{−1/2}`.
    pub sbar: Vec<f64>,
    /// `φ = √(1−v²) R'`.
    pub phi: Vec<f64>,
    pub clamps: usize,
    pub decay: Decay,
    /// Largest disagreement between the two `ε`-extrapolants (zero-start
    /// scheme only).
    pub eps_spread: f64,
}

impl JangSolution {
    pub fn v_profile(&self) -> Result<RadialProfile> {
        RadialProfile::sampled_first(&self.s, self.v.clone(), self.dv.clone())
    }

    pub fn sbar_profile(&self) -> Result<RadialProfile> {
        RadialProfile::monotone(&self.s, self.sbar.clone())
    }

    pub fn phi_profile(&self) -> Result<RadialProfile> {
        RadialProfile::monotone(&self.s, self.phi.clone())
    }

    pub fn sup_norm(&self) -> f64 {
        self.v.iter().fold(0.0, |m, v| m.max(v.abs()))
    }

    /// Largest `|v|` over nodes with `s > 0`.
    pub fn interior_sup(&self) -> f64 {
        self.v[1..].iter().fold(0.0, |m, v| m.max(v.abs()))
    }

    /// Writes the table `s v v' sbar phi` and a summary line.
    pub fn write_dump<W: Write>(&self, mut out: W) -> Result<()> {
        let io = |e: std::io::Error| Error::Numeric(format!("write failed: {e}"));
        writeln!(out, "# penrose-jang v1").map_err(io)?;
        writeln!(
            out,
            "# bc = {:?}; decay = {:?}; clamps = {}; eps_spread = {:e}",
            self.bc, self.decay, self.clamps, self.eps_spread
        )
        .map_err(io)?;
        writeln!(out, "# s v v' sbar phi").map_err(io)?;
        for i in 0..self.s.len() {
            writeln!(
                out,
                "{:.16e} {:.16e} {:.16e} {:.16e} {:.16e}",
                self.s[i], self.v[i], self.dv[i], self.sbar[i], self.phi[i]
            )
            .map_err(io)?;
        }
        Ok(())
    }
}

/// Clamp bookkeeping shared by the two integration phases.
struct Clamp {
    events: usize,
    max: usize,
    last_s: f64,
}

impl Clamp {
    fn hit(&mut self, s: f64) -> std::result::Result<(), String> {
        self.events += 1;
        self.last_s = s;
        if self.events > self.max {
            Err("clamp budget exhausted".into())
        } else {
            Ok(())
        }
    }
}

const BARRIER: f64 = 1.0 - 1e-12;

/// State `[v, s̄]` away from the barrier.
struct SlopeSystem<'a> {
    data: &'a InitialDataSet,
    sigma: f64,
    clamp: &'a mut Clamp,
    failure: Option<Error>,
}

impl OdeSystem<2> for SlopeSystem<'_> {
    fn rhs(&mut self, s: f64, y: &[f64; 2]) -> Option<[f64; 2]> {
        let v = y[0];
        if !(v.abs() < 1.0) {
            return None;
        }
        match Coefficients::at(self.data, s, self.sigma) {
            Ok(c) => Some([c.rhs_auto(v), 1.0 / (1.0 - v * v).sqrt()]),
            Err(e) => {
                self.failure.get_or_insert(e);
                None
            }
        }
    }

    fn project(&mut self, s: f64, y: &mut [f64; 2]) -> std::result::Result<(), String> {
        if y[0].abs() > BARRIER {
            y[0] = BARRIER.copysign(y[0]);
            self.clamp.hit(s)?;
        }
        Ok(())
    }
}

/// State `[ζ, s̄]` near `u = 1`, where `ζ = ½ − w = (1−u)²/2` is the
/// complement of the substituted variable `w = u − u²/2`. Storing `ζ`
/// instead of `w` keeps full relative precision as `w → ½`.
struct UnitSystem<'a> {
    data: &'a InitialDataSet,
    sigma: f64,
    clamp: &'a mut Clamp,
    failure: Option<Error>,
}

/// `(1 − u, 1 + u)` from `ζ`.
fn unit_from_zeta(zeta: f64) -> (f64, f64) {
    let r = (2.0 * zeta).max(0.0).sqrt();
    (r, 2.0 - r)
}

impl OdeSystem<2> for UnitSystem<'_> {
    fn rhs(&mut self, s: f64, y: &[f64; 2]) -> Option<[f64; 2]> {
        let zeta = y[0];
        if !(zeta >= 0.0) {
            return None;
        }
        let c = match Coefficients::at(self.data, s, self.sigma) {
            Ok(c) => c,
            Err(e) => {
                self.failure.get_or_insert(e);
                return None;
            }
        };
        let (one_minus, one_plus) = unit_from_zeta(zeta);
        let u = 1.0 - one_minus;
        let theta = c.h - c.t;
        let f = -c.h / one_plus + u * c.curl - c.k_a;
        // (1+u) w' = −θ₋ + F₋ (1 − 2w − 2√(1−2w)) and ζ' = −w'.
        let dw = (-theta + f * (2.0 * zeta - 2.0 * one_minus)) / one_plus;
        let q = one_minus * one_plus;
        if q <= 0.0 {
            return None;
        }
        Some([-dw, 1.0 / q.sqrt()])
    }

    fn project(&mut self, s: f64, y: &mut [f64; 2]) -> std::result::Result<(), String> {
        if y[0] < 0.0 {
            y[0] = 0.0;
            self.clamp.hit(s)?;
        }
        Ok(())
    }
}

fn ode_error(e: OdeError, failure: Option<Error>, clamp: &Clamp) -> Error {
    if let Some(f) = failure {
        if !matches!(e, OdeError::Aborted { .. }) {
            return f;
        }
    }
    match e {
        OdeError::Aborted { t, .. } if clamp.events > clamp.max => Error::BlowUp {
            s: t,
            clamps: clamp.events,
        },
        OdeError::StepUnderflow { t, .. } if clamp.events > 0 => Error::BlowUp {
            s: t,
            clamps: clamp.events,
        },
        other => other.into(),
    }
}

/// Solves with default options.
pub fn solve_jang(data: &InitialDataSet, bc: JangBC) -> Result<JangSolution> {
    solve_jang_with(data, bc, &JangOptions::default())
}

/// Nonpositive root of `2a² + 2F a − θ' = 0`, the one-sided slope of `u`
/// at a unit boundary.
fn unit_start_slope(f: f64, dtheta: f64) -> Result<f64> {
    let disc = f * f + 2.0 * dtheta;
    if disc < 0.0 || dtheta < -1e-12 * f.abs().max(1.0) {
        return Err(Error::Precondition(format!(
            "θ'(0) = {dtheta:e} is negative: the horizon is not outermost"
        )));
    }
    let a = 0.5 * (-f - disc.max(0.0).sqrt());
    if !(a < 0.0) {
        return Err(Error::Singularity {
            s: 0.0,
            what: "unit boundary slope v'(0) vanishes".into(),
        });
    }
    Ok(a)
}

pub fn solve_jang_with(data: &InitialDataSet, bc: JangBC, opts: &JangOptions) -> Result<JangSolution> {
    bc.check(data, opts.zero)?;
    let grid = &data.grid;
    let n = grid.len();
    let mut v = vec![0.0; n];
    let mut sbar = vec![0.0; n];
    let mut clamp = Clamp {
        events: 0,
        max: opts.max_clamps,
        last_s: 0.0,
    };
    let mut eps_spread = 0.0;
    let r0 = data.radius.value(0.0);
    let ode = opts.ode();

    match bc {
        JangBC::Interior { alpha } => {
            let mut sys = SlopeSystem {
                data,
                sigma: 1.0,
                clamp: &mut clamp,
                failure: None,
            };
            let out = integrate(&mut sys, 0.0, [alpha, 0.0], grid, &ode);
            let failure = sys.failure.take();
            let out = out.map_err(|e| ode_error(e, failure, &clamp))?;
            for (i, y) in out.y.iter().enumerate() {
                v[i] = y[0];
                sbar[i] = y[1];
            }
        }
        JangBC::PastHorizonUnit | JangBC::FutureHorizonUnit => {
            let sigma = if bc == JangBC::PastHorizonUnit { 1.0 } else { -1.0 };
            let c0 = Coefficients::at(data, 0.0, sigma)?;
            let lv = data.level(0.0)?;
            let dtheta = lv.mean_curvature_prime - sigma * data.trace_sigma_k(0.0).d1;
            let f0 = -0.5 * c0.h + c0.curl - c0.k_a;
            let a = unit_start_slope(f0, dtheta)?;
            let s_switch = (opts.w_switch_fraction * r0).min(0.5 * data.s_max());
            let s0 = 1e-6 * s_switch;
            // Taylor start: 1 − u ≈ −a s and s̄ ≈ √(2s/−a).
            let one_minus = -a * s0;
            let zeta0 = 0.5 * one_minus * one_minus;
            let sb0 = (2.0 * s0 / -a).sqrt();
            let split = grid.partition_point(|&s| s <= s_switch);
            let mut nodes: Vec<f64> = grid[1..split].iter().copied().filter(|&s| s > s0).collect();
            let tiny = grid[1..split].iter().filter(|&&s| s <= s0).count();
            nodes.push(s_switch);
            let mut sys = UnitSystem {
                data,
                sigma,
                clamp: &mut clamp,
                failure: None,
            };
            // Both components are positive and start tiny, so control the relative error only.
            let unit_ode = OdeOptions {
                atol: f64::MIN_POSITIVE,
                initial_step: Some(1e-2 * s0),
                ..ode
            };
            let out = integrate(&mut sys, s0, [zeta0, sb0], &nodes, &unit_ode);
            let failure = sys.failure.take();
            let out = out.map_err(|e| ode_error(e, failure, &clamp))?;
            v[0] = 1.0;
            for i in 1..=tiny {
                v[i] = 1.0 + a * grid[i];
                sbar[i] = (2.0 * grid[i] / -a).sqrt();
            }
            for (k, y) in out.y[..out.y.len() - 1].iter().enumerate() {
                let (om, _) = unit_from_zeta(y[0]);
                v[1 + tiny + k] = 1.0 - om;
                sbar[1 + tiny + k] = y[1];
            }
            let last = out.y[out.y.len() - 1];
            let u_switch = 1.0 - unit_from_zeta(last[0]).0;
            let mut sys = SlopeSystem {
                data,
                sigma,
                clamp: &mut clamp,
                failure: None,
            };
            let out = integrate(
                &mut sys,
                s_switch,
                [u_switch.min(BARRIER), last[1]],
                &grid[split..],
                &ode,
            );
            let failure = sys.failure.take();
            let out = out.map_err(|e| ode_error(e, failure, &clamp))?;
            for (k, y) in out.y.iter().enumerate() {
                v[split + k] = y[0];
                sbar[split + k] = y[1];
            }
            if sigma < 0.0 {
                v.iter_mut().for_each(|x| *x = -*x);
            }
        }
        JangBC::DegenerateZero => {
            let trivial = data.extrinsic.k_a.is_zero() && data.extrinsic.diag.iter().all(RadialProfile::is_zero);
            if trivial {
                // The source terms k_a and Tr_Σ k vanish, so v ≡ 0 solves the equation exactly.
                for i in 1..n {
                    sbar[i] = grid[i];
                }
            } else {
                let eps: Vec<f64> = opts.eps_fractions.iter().map(|f| f * r0).collect();
                let mut runs = Vec::with_capacity(eps.len());
                for &e in &eps {
                    let first = grid.partition_point(|&s| s < e);
                    let mut sys = SlopeSystem {
                        data,
                        sigma: 1.0,
                        clamp: &mut clamp,
                        failure: None,
                    };
                    let start = OdeOptions {
                        initial_step: Some(1e-2 * e),
                        ..ode
                    };
                    let out = integrate(&mut sys, e, [0.0, e], &grid[first..], &start);
                    let failure = sys.failure.take();
                    let out = out.map_err(|err| ode_error(err, failure, &clamp))?;
                    runs.push((first, out.y));
                }
                let ratio = eps[0] / eps[1];
                let coarse_first = runs[0].0;
                for i in 1..n {
                    let at = |r: usize| -> Option<[f64; 2]> {
                        let (first, ref y) = runs[r];
                        (i >= first).then(|| y[i - first])
                    };
                    match (at(0), at(1), at(2)) {
                        (Some(a), Some(b), Some(c)) => {
                            let e1 = richardson(a[0], b[0], ratio, 2);
                            let e2 = richardson(b[0], c[0], ratio, 2);
                            eps_spread = f64::max(eps_spread, (e2 - e1).abs());
                            v[i] = e2;
                            sbar[i] = richardson(b[1], c[1], ratio, 2);
                        }
                        (_, _, Some(c)) => {
                            v[i] = c[0];
                            sbar[i] = c[1];
                        }
                        _ => {
                            v[i] = 0.0;
                            sbar[i] = grid[i];
                        }
                    }
                }
                let scale = v[coarse_first.max(1)..]
                    .iter()
                    .fold(0.0f64, |m, x| m.max(x.abs()))
                    .max(1e-300);
                if eps_spread > opts.eps_richardson * scale.max(1.0) {
                    return Err(Error::Asymptotics(format!(
                        "ε-extrapolants of the zero-start Jang solution disagree by {eps_spread:e}"
                    )));
                }
            }
        }
    }

    if let Some((i, _)) = v.iter().enumerate().skip(1).find(|(_, x)| !(x.abs() < 1.0)) {
        return Err(Error::BlowUp {
            s: grid[i],
            clamps: clamp.events,
        });
    }

    let mut dv = vec![0.0; n];
    for i in 0..n {
        dv[i] = if i == 0 {
            match bc {
                JangBC::DegenerateZero => 0.5 * (data.extrinsic.k_a.value(0.0) + data.trace_sigma_k(0.0).v),
                JangBC::Interior { .. } => Coefficients::at(data, 0.0, 1.0)?.rhs_auto(v[0]),
                _ => {
                    let sigma = v[0];
                    let c0 = Coefficients::at(data, 0.0, sigma)?;
                    let dtheta = data.level(0.0)?.mean_curvature_prime - sigma * data.trace_sigma_k(0.0).d1;
                    sigma * unit_start_slope(-0.5 * c0.h + c0.curl - c0.k_a, dtheta)?
                }
            }
        } else {
            Coefficients::at(data, grid[i], 1.0)?.rhs_auto(v[i])
        };
    }
    let phi: Vec<f64> = (0..n)
        .map(|i| (1.0 - v[i] * v[i]).max(0.0).sqrt() * data.radius.eval(grid[i]).d1)
        .collect();
    if let Some(i) = (1..n).find(|&i| !(phi[i] > 0.0)) {
        return Err(Error::Precondition(format!(
            "φ = {} is not positive at s = {}",
            phi[i], grid[i]
        )));
    }
    let decay = fit_decay(data, &v, &dv);
    Ok(JangSolution {
        bc,
        s: grid.clone(),
        v,
        dv,
        sbar,
        phi,
        clamps: clamp.events,
        decay,
        eps_spread,
    })
}

fn fit_decay(data: &InitialDataSet, v: &[f64], dv: &[f64]) -> Decay {
    let s_max = data.s_max();
    let hyperbolic = data.asymptotic.is_hyperbolic();
    let lo = if hyperbolic { 0.5 * s_max } else { 0.1 * s_max };
    let (s, f): (Vec<f64>, Vec<f64>) = data
        .grid
        .iter()
        .zip(v.iter().zip(dv))
        .filter(|(s, _)| **s >= lo)
        .map(|(&s, (&v, &dv))| {
            (
                s,
                if hyperbolic {
                    v.abs() + dv.abs()
                } else {
                    v.abs() + s * dv.abs()
                },
            )
        })
        .unzip();
    if f.iter().all(|x| *x == 0.0) {
        return Decay::Vanishing;
    }
    if hyperbolic {
        exponential_rate(&s, &f).map_or(Decay::Vanishing, |rate| Decay::Exponential { rate })
    } else {
        power_law_exponent(&s, &f).map_or(Decay::Vanishing, |exponent| Decay::Power { exponent })
    }
}

/// The time-symmetric data set `(ds̄² + g_{s(s̄)}, 0)` of the Jang graph.
pub fn jang_metric(data: &InitialDataSet, sol: &JangSolution) -> Result<InitialDataSet> {
    if sol.s != data.grid {
        return Err(Error::Domain("Jang solution was computed on a different grid".into()));
    }
    let n = sol.s.len();
    let grid = sol.sbar.clone();
    let reparam = |p: &RadialProfile| -> Result<RadialProfile> {
        if p.is_zero() {
            return Ok(RadialProfile::Zero);
        }
        let mut cols = (Vec::with_capacity(n), Vec::with_capacity(n), Vec::with_capacity(n));
        for i in 0..n {
            let j = p.eval(sol.s[i]);
            let (v, dv) = (sol.v[i], sol.dv[i]);
            let q = 1.0 - v * v;
            cols.0.push(j.v);
            cols.1.push(q.max(0.0).sqrt() * j.d1);
            cols.2.push(q * j.d2 - v * dv * j.d1);
        }
        RadialProfile::sampled(&grid, cols.0, cols.1, cols.2)
    };
    let radius = reparam(&data.radius)?;
    let shape = data.shape.iter().map(reparam).collect::<Result<Vec<_>>>()?;
    let mut md = (Vec::with_capacity(n), Vec::with_capacity(n));
    for i in 0..n {
        let s = sol.s[i];
        let r = data.radius.eval(s);
        let m = data.mass_deficit.eval(s);
        let (v, dv) = (sol.v[i], sol.dv[i]);
        md.0.push(m.v + v * v * r.d1 * r.d1);
        let ds = m.d1 + 2.0 * v * dv * r.d1 * r.d1 + 2.0 * v * v * r.d1 * r.d2;
        md.1.push((1.0 - v * v).max(0.0).sqrt() * ds);
    }
    let mass_deficit = RadialProfile::sampled_first(&grid, md.0, md.1)?;
    let groups = data.extrinsic.diag.len();
    InitialDataSet::new(
        format!("jang[{}]", data.label),
        data.orbit,
        data.asymptotic,
        grid,
        radius,
        shape,
        Extrinsic::zero(groups),
        Some(mass_deficit),
    )
}

/// Boundary flux `φ X(ν̄) = v R' (−v H + Tr_Σ k)` through the level set at `s`.
pub fn boundary_flux(data: &InitialDataSet, sol: &JangSolution, s: f64) -> Result<f64> {
    let v = sol.v_profile()?.value(s);
    let r = data.radius.eval(s);
    let h = data.mean_curvature(s)?;
    Ok(v * r.d1 * (-v * h + data.trace_sigma_k(s).v))
}

/// The flux in its `θ`-form, `v R' ((±1 − v) H ∓ θ∓)`; agrees with
/// [`boundary_flux`] for either sign.
pub fn boundary_flux_theta(data: &InitialDataSet, sol: &JangSolution, s: f64, branch: Branch) -> Result<f64> {
    let v = sol.v_profile()?.value(s);
    let r: Jet = data.radius.eval(s);
    let h = data.mean_curvature(s)?;
    let (tp, tm) = data.null_expansions(s)?;
    Ok(match branch {
        Branch::Minus => v * r.d1 * ((1.0 - v) * h - tm),
        Branch::Plus => v * r.d1 * ((-1.0 - v) * h + tp),
    })
}
