//! Radial conformal flow of time-symmetric, asymptotically flat data.
//!
//! The flow evolves `g_t = u_t^{4/(d−2)} g` with `du_t/dt = v_t`, where `v_t`
//! is the radial `g`-harmonic function outside the current horizon with
//! `v_t = 0` there and `v_t → −e^{−t}` at infinity. Writing
//! `T(s) = ∫_s^∞ ds'/|Σ_{s'}|`, that function is
//! `v_t(s) = −e^{−t}(1 − T(s)/T(s_t))` beyond `s_t` and zero inside.
//!
//! Time stepping freezes the horizon over a step, so each step adds one
//! "kick" `−w (T(s_k) − T(s))₊` to `u` with `w = (e^{−t} − e^{−t−h})/T(s_k)`.
//! The factor is therefore an explicit finite sum, and `u`, `u'` and the
//! `g_t` mean curvature are available in closed form between kicks.

use std::io::Write;
use std::sync::Arc;

use serde::Serialize;

use crate::error::{Error, Result};
use crate::imcf_hawking::monotonicity_defect;
use crate::initial_data::{AsymptoticClass, Extrinsic, InitialDataSet, RadialProfile};
use crate::numerics::fit::weighted_least_squares;
use crate::numerics::interp::locate;
use crate::numerics::root::brent;
use crate::numerics::{quad, unit_sphere_volume, Jet};
use crate::tolerances::Tolerances;

/// Largest accepted step.
pub const MAX_STEP: f64 = 1e-2;

#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct Kick {
    pub s: f64,
    pub weight: f64,
    /// `T(s)` at the kick location.
    pub tail: f64,
}

/// State of the flow at time `t`.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct ConformalState {
    pub t: f64,
    /// Horizon location in base arclength.
    pub s_t: f64,
    /// `g_t`-area of the horizon.
    pub area: f64,
    pub mass_estimate: f64,
    /// Limit of `u` at infinity (`e^{−t}` up to rounding).
    pub alpha: f64,
    pub kicks: Vec<Kick>,
    /// `u` at the base grid nodes.
    pub u_nodes: Vec<f64>,
    /// `Σ_{s_k ≤ s_i} w_k`, so that `u' = −C/|Σ|` between kicks.
    pub c_nodes: Vec<f64>,
}

/// Precomputed radial quantities of a base metric.
pub struct ConformalFlow<'a> {
    base: &'a InitialDataSet,
    d: usize,
    area: Vec<f64>,
    darea: Vec<f64>,
    tail: Arc<Vec<f64>>,
    base_mass: f64,
    step_tol: f64,
}

fn quad_err(e: quad::QuadError) -> Error {
    Error::Flow(format!("∫ ds/|Σ| failed: {e}"))
}

fn area_of(radius: &RadialProfile, omega: f64, k: i32, s: f64) -> (f64, f64) {
    let r = radius.eval(s);
    (omega * r.v.powi(k), omega * k as f64 * r.v.powi(k - 1) * r.d1)
}

impl<'a> ConformalFlow<'a> {
    pub fn new(base: &'a InitialDataSet, tol: &Tolerances) -> Result<Self> {
        if !base.is_time_symmetric() {
            return Err(Error::Precondition(
                "the conformal flow needs time-symmetric data".into(),
            ));
        }
        if base.asymptotic.is_hyperbolic() {
            return Err(Error::Flow("v_t → −e^{−t} needs an asymptotically flat end".into()));
        }
        let d = base.dimension();
        let k = d as i32 - 1;
        let omega = unit_sphere_volume(d - 1);
        let (area, darea): (Vec<f64>, Vec<f64>) = base.grid.iter().map(|&s| area_of(&base.radius, omega, k, s)).unzip();
        let n = base.grid.len();
        // Beyond S_max continue with R'² = 1 − 2m/R^{d−2}; then
        // ∫_{R_S}^∞ dR/(ωR^{d−1}R') = 2/((1 + √(1−q)) (d−2) ω R_S^{d−2}).
        let s_max = base.s_max();
        let r_s = base.radius.value(s_max);
        let q = base.mass_deficit.value(s_max);
        if !(q < 1.0) || !(r_s > 0.0) {
            return Err(Error::Flow("outer end is not in the asymptotic regime".into()));
        }
        let mut tail = vec![0.0; n];
        tail[n - 1] = 2.0 / ((1.0 + (1.0 - q.max(0.0)).sqrt()) * (d as f64 - 2.0) * omega * r_s.powi(d as i32 - 2));
        let radius = base.radius.clone();
        for i in (0..n - 1).rev() {
            let cell = quad::integrate(
                |s| 1.0 / area_of(&radius, omega, k, s).0,
                base.grid[i],
                base.grid[i + 1],
                0.0,
                1e-13,
            )
            .map_err(quad_err)?;
            tail[i] = tail[i + 1] + cell.value;
            if !tail[i].is_finite() {
                return Err(Error::Flow(format!("∫ ds/|Σ| diverges near s = {}", base.grid[i])));
            }
        }
        let base_mass = base
            .adm_energy(tol.extrapolation_spread)
            .map_err(|e| e.in_stage("base mass"))?;
        Ok(Self {
            base,
            d,
            area,
            darea,
            tail: Arc::new(tail),
            base_mass,
            step_tol: tol.conformal_step,
        })
    }

    pub fn base(&self) -> &InitialDataSet {
        self.base
    }

    pub fn base_mass(&self) -> f64 {
        self.base_mass
    }

    fn omega(&self) -> f64 {
        unit_sphere_volume(self.d - 1)
    }

    fn area_at(&self, s: f64) -> (f64, f64) {
        area_of(&self.base.radius, self.omega(), self.d as i32 - 1, s)
    }

    /// `T(s) = ∫_s^∞ ds'/|Σ_{s'}|`.
    pub fn tail(&self, s: f64) -> f64 {
        tail_at(
            &self.base.grid,
            &self.tail,
            &self.base.radius,
            self.omega(),
            self.d as i32 - 1,
            s,
        )
    }

    /// `u ≡ 1` with the horizon placed at `s_t`; used as the initial state
    /// and for probing the harmonic function at a prescribed location.
    pub fn unit_state(&self, t: f64, s_t: f64) -> Result<ConformalState> {
        self.base.mean_curvature(s_t)?;
        let n = self.base.grid.len();
        let mut st = ConformalState {
            t,
            s_t,
            area: self.area_at(s_t).0,
            mass_estimate: 0.0,
            alpha: 1.0,
            kicks: Vec::new(),
            u_nodes: vec![1.0; n],
            c_nodes: vec![0.0; n],
        };
        st.mass_estimate = self.mass_estimate(&st)?;
        Ok(st)
    }

    /// Initial state of the flow. The base boundary must be minimal.
    pub fn initial_state(&self, zero: f64) -> Result<ConformalState> {
        let h = self.base.mean_curvature(0.0)?;
        let scale = (self.d - 1) as f64 / self.base.radius.value(0.0);
        if h.abs() > zero * scale {
            return Err(Error::Precondition(format!(
                "base boundary is not minimal: H(0) = {h:e}"
            )));
        }
        self.unit_state(0.0, 0.0)
    }

    /// `u(s)` and `C(s)` (right limit at kicks).
    pub fn factor(&self, st: &ConformalState, s: f64) -> (f64, f64) {
        let grid = &self.base.grid;
        let j = locate(grid, s);
        let t_s = self.tail(s);
        let mut u = st.u_nodes[j] - st.c_nodes[j] * (self.tail[j] - t_s);
        let mut c = st.c_nodes[j];
        let lo = st.kicks.partition_point(|k| k.s <= grid[j]);
        for kick in st.kicks[lo..].iter().take_while(|k| k.s <= s) {
            u -= kick.weight * (kick.tail - t_s);
            c += kick.weight;
        }
        (u, c)
    }

    /// Sign-carrying part of the `g_t` mean curvature, `|Σ|' u − c_d C`.
    fn horizon_function(&self, st: &ConformalState, s: f64) -> f64 {
        let (u, c) = self.factor(st, s);
        self.darea_at(s) * u - self.cd() * c
    }

    fn darea_at(&self, s: f64) -> f64 {
        self.area_at(s).1
    }

    fn cd(&self) -> f64 {
        2.0 * (self.d - 1) as f64 / (self.d - 2) as f64
    }

    /// Mean curvature of `Σ_s` in `g_t`,
    /// `u^{−2/(d−2)} (H_g + c_d u'/u)` with `c_d = 2(d−1)/(d−2)`.
    pub fn mean_curvature(&self, st: &ConformalState, s: f64) -> Result<f64> {
        let h = self.base.mean_curvature(s)?;
        let (u, c) = self.factor(st, s);
        let du = -c / self.area_at(s).0;
        Ok(u.powf(-2.0 / (self.d - 2) as f64) * (h + self.cd() * du / u))
    }

    fn apply_kick(&self, st: &mut ConformalState, s: f64, weight: f64) {
        let tail = self.tail(s);
        for (i, &si) in self.base.grid.iter().enumerate() {
            if si >= s {
                st.u_nodes[i] -= weight * (tail - self.tail[i]);
                st.c_nodes[i] += weight;
            }
        }
        let at = st.kicks.partition_point(|k| k.s <= s);
        st.kicks.insert(at, Kick { s, weight, tail });
    }

    /// Outermost zero of the `g_t` mean curvature at or beyond the last kick.
    fn relocate(&self, st: &ConformalState) -> Result<f64> {
        let grid = &self.base.grid;
        let lo = st.kicks.last().map_or(st.s_t, |k| k.s.max(st.s_t));
        let f = |s: f64| self.horizon_function(st, s);
        let first = grid.partition_point(|&x| x <= lo);
        let mut bracket = None;
        for i in (first..grid.len()).rev() {
            if f(grid[i]) <= 0.0 {
                if i + 1 == grid.len() {
                    return Err(Error::Flow("the horizon has left the grid".into()));
                }
                bracket = Some((grid[i], grid[i + 1]));
                break;
            }
        }
        let (a, b) = match bracket {
            Some(br) => br,
            None if first < grid.len() && f(lo) <= 0.0 => (lo, grid[first]),
            None if f(lo).abs()
                <= 1e-12
                    * self
                        .darea_at(lo)
                        .abs()
                        .max(self.cd() * st.c_nodes[first.min(grid.len() - 1)]) =>
            {
                return Ok(lo)
            }
            None => return Err(Error::Flow(format!("no zero of the mean curvature beyond s = {lo}"))),
        };
        brent(a, b, f, 1e-14 * (1.0 + b)).map_err(|e| Error::Flow(format!("horizon search failed: {e:?}")))
    }

    fn finish(&self, mut st: ConformalState, t: f64) -> Result<ConformalState> {
        let s_new = self.relocate(&st)?;
        if s_new < st.s_t - 1e-12 * (1.0 + st.s_t) {
            return Err(Error::Flow(format!("horizon moved inward from {} to {s_new}", st.s_t)));
        }
        st.s_t = s_new.max(st.s_t);
        st.t = t;
        st.area = self.horizon_area(&st);
        Ok(st)
    }

    fn horizon_area(&self, st: &ConformalState) -> f64 {
        let (u, _) = self.factor(st, st.s_t);
        let p = 2.0 * (self.d - 1) as f64 / (self.d - 2) as f64;
        u.powf(p) * self.area_at(st.s_t).0
    }

    /// One explicit Euler step of length `h` with the horizon frozen.
    fn euler(&self, st: &ConformalState, h: f64) -> Result<ConformalState> {
        let mut next = st.clone();
        let drop = (-st.t).exp() * -(-h).exp_m1();
        let tail = self.tail(st.s_t);
        self.apply_kick(&mut next, st.s_t, drop / tail);
        next.alpha -= drop;
        self.finish(next, st.t + h)
    }

    /// Full step and two half steps; returns the Richardson combination and
    /// the sup-norm mismatch between the full and halved Euler factors.
    fn attempt(&self, st: &ConformalState, dt: f64) -> Result<(ConformalState, f64)> {
        let full = self.euler(st, dt)?;
        let half = self.euler(st, 0.5 * dt)?;
        let halves = self.euler(&half, 0.5 * dt)?;
        let mismatch = full
            .u_nodes
            .iter()
            .zip(&halves.u_nodes)
            .map(|(a, b)| (a - b).abs() / b.abs())
            .fold(0.0, f64::max);
        // 2·(two half kicks) − (one full kick); both kick weights stay positive.
        let mut comb = st.clone();
        let w_full = full.kicks.last().expect("kick").weight;
        let w_h1 = half.kicks.last().expect("kick").weight;
        let second = *halves.kicks.last().expect("kick");
        self.apply_kick(&mut comb, st.s_t, 2.0 * w_h1 - w_full);
        self.apply_kick(&mut comb, second.s, 2.0 * second.weight);
        comb.alpha = halves.alpha;
        let mut comb = self.finish(comb, st.t + dt)?;
        comb.mass_estimate = self.mass_estimate(&comb)?;
        Ok((comb, mismatch))
    }

    /// Advances by `dt ≤ 10⁻²`; rejects the step when full and halved Euler
    /// steps disagree by more than the configured tolerance.
    pub fn step(&self, st: &ConformalState, dt: f64) -> Result<ConformalState> {
        if !(0.0..=MAX_STEP * (1.0 + 1e-12)).contains(&dt) {
            return Err(Error::Domain(format!("conformal step {dt} outside [0, {MAX_STEP}]")));
        }
        if dt == 0.0 {
            return Ok(st.clone());
        }
        let (next, mismatch) = self.attempt(st, dt)?;
        if mismatch > self.step_tol {
            return Err(Error::Flow(format!(
                "step {dt} rejected: Richardson mismatch {mismatch:e}"
            )));
        }
        Ok(next)
    }

    /// Advances by `dt`, halving internally until each piece is accepted.
    pub fn advance(&self, st: &ConformalState, dt: f64, max_halvings: u32) -> Result<ConformalState> {
        let (next, mismatch) = self.attempt(st, dt)?;
        if mismatch <= self.step_tol {
            return Ok(next);
        }
        if max_halvings == 0 {
            return Err(Error::Flow(format!(
                "step {dt:e} rejected: Richardson mismatch {mismatch:e}"
            )));
        }
        let mid = self.advance(st, 0.5 * dt, max_halvings - 1)?;
        self.advance(&mid, 0.5 * dt, max_halvings - 1)
    }

    /// Mass of `g_t` from the tail of the factor.
    ///
    /// Far out `u ≈ α + β/R^{d−2}`, and `β` is fitted by least squares over
    /// the outer decade of the grid. Matching against Schwarzschild written
    /// as `(1 + m/(2r^{d−2}))^{4/(d−2)} δ` gives `m(t) = 2αβ + α² m₀` with
    /// `m₀` the mass of the base.
    pub fn mass_estimate(&self, st: &ConformalState) -> Result<f64> {
        let c_tot: f64 = st.kicks.iter().map(|k| k.weight).sum();
        let alpha = st.alpha;
        if c_tot == 0.0 {
            return Ok(alpha * alpha * self.base_mass);
        }
        let grid = &self.base.grid;
        let p = self.d as i32 - 2;
        let r_last = self.base.radius.value(self.base.s_max());
        let r_lo = 0.1 * r_last;
        let (mut rows, mut y) = (Vec::new(), Vec::new());
        for (i, &s) in grid.iter().enumerate() {
            let r = self.base.radius.value(s);
            if r >= r_lo && s > st.s_t {
                // u − α = C·T(s) beyond every kick; scaled by R^{d−2} this
                // tends to β.
                rows.push(vec![1.0, (r_lo / r).powi(p)]);
                y.push(c_tot * self.tail[i] * r.powi(p));
            }
        }
        if rows.len() < 3 {
            return Err(Error::Asymptotics("too few outer nodes for the mass fit".into()));
        }
        let w = vec![1.0; rows.len()];
        let coef =
            weighted_least_squares(&rows, &y, &w).ok_or_else(|| Error::Asymptotics("singular mass fit".into()))?;
        Ok(2.0 * alpha * coef[0] + alpha * alpha * self.base_mass)
    }

    /// The radial harmonic function `v_t` of the state.
    pub fn harmonic_radial(&self, st: &ConformalState) -> RadialProfile {
        let grid = self.base.grid.clone();
        let tail = Arc::clone(&self.tail);
        let radius = self.base.radius.clone();
        let (omega, k) = (self.omega(), self.d as i32 - 1);
        let s_t = st.s_t;
        let t_t = self.tail(s_t);
        let e = (-st.t).exp();
        RadialProfile::closed(move |s| {
            if s < s_t {
                return Jet::constant(0.0);
            }
            let (a, da) = area_of(&radius, omega, k, s);
            let t_s = tail_at(&grid, &tail, &radius, omega, k, s);
            Jet::new(-e * (1.0 - t_s / t_t), -e / (t_t * a), e * da / (t_t * a * a))
        })
    }

    /// Largest conservative discrete Laplacian of `v_t` over grid nodes
    /// strictly outside the horizon. Cell fluxes use three-point
    /// Gauss–Legendre for `∫ ds/|Σ|`.
    pub fn harmonicity_residual(&self, st: &ConformalState) -> f64 {
        let v = self.harmonic_radial(st);
        let grid = &self.base.grid;
        let first = grid.partition_point(|&x| x <= st.s_t);
        let resistance = |a: f64, b: f64| -> f64 {
            let (m, h) = (0.5 * (a + b), 0.5 * (b - a));
            let x = (0.6f64).sqrt() * h;
            h * (5.0 / self.area_at(m - x).0 + 8.0 / self.area_at(m).0 + 5.0 / self.area_at(m + x).0) / 9.0
        };
        let flux = |i: usize| (v.value(grid[i + 1]) - v.value(grid[i])) / resistance(grid[i], grid[i + 1]);
        let mut worst: f64 = 0.0;
        for i in first + 1..grid.len().saturating_sub(1) {
            let lap = (flux(i) - flux(i - 1)) / (self.area[i] * 0.5 * (grid[i + 1] - grid[i - 1]));
            worst = worst.max(lap.abs());
        }
        worst
    }

    /// The conformal factor on the base grid with its first two
    /// derivatives.
    pub fn factor_profile(&self, st: &ConformalState) -> Result<RadialProfile> {
        let n = self.base.grid.len();
        let mut cols = (Vec::with_capacity(n), Vec::with_capacity(n), Vec::with_capacity(n));
        for i in 0..n {
            let (a, da) = (self.area[i], self.darea[i]);
            cols.0.push(st.u_nodes[i]);
            cols.1.push(-st.c_nodes[i] / a);
            cols.2.push(st.c_nodes[i] * da / (a * a));
        }
        RadialProfile::sampled(&self.base.grid, cols.0, cols.1, cols.2)
    }

    /// Exterior of the current horizon with the metric `g_t`, in its own
    /// arclength, as time-symmetric data.
    pub fn conformal_data(&self, st: &ConformalState) -> Result<InitialDataSet> {
        let base = self.base;
        let d = self.d as f64;
        let q = 2.0 / (d - 2.0);
        let mut nodes = vec![st.s_t];
        let min_gap = 1e-9 * (1.0 + st.s_t);
        nodes.extend(base.grid.iter().copied().filter(|&s| s > st.s_t + min_gap));
        let n = nodes.len();
        if n < 8 {
            return Err(Error::Flow("too few grid nodes outside the horizon".into()));
        }
        let stretch = |s: f64| self.factor(st, s).0.powf(q);
        let sbar = quad::cumulative(stretch, &nodes, 0.0, 1e-13).map_err(quad_err)?;
        let mut r_cols = (Vec::with_capacity(n), Vec::with_capacity(n), Vec::with_capacity(n));
        let mut md_cols = (Vec::with_capacity(n), Vec::with_capacity(n));
        let mut shape_cols =
            vec![(Vec::with_capacity(n), Vec::with_capacity(n), Vec::with_capacity(n)); base.shape.len()];
        for &s in &nodes {
            let (u, c) = self.factor(st, s);
            let (a, da) = self.area_at(s);
            let du = -c / a;
            let ddu = c * da / (a * a);
            let r = base.radius.eval(s);
            let uq = u.powf(q);
            let delta = q * r.v * du / u;
            let rbar_d1 = r.d1 + delta;
            let rbar_d2 = (r.d2 + q * (r.d1 * du / u + r.v * ddu / u - r.v * du * du / (u * u))) / uq;
            r_cols.0.push(uq * r.v);
            r_cols.1.push(rbar_d1);
            r_cols.2.push(rbar_d2);
            md_cols
                .0
                .push(base.mass_deficit.value(s) - 2.0 * r.d1 * delta - delta * delta);
            md_cols.1.push(-2.0 * rbar_d1 * rbar_d2);
            for (p, col) in base.shape.iter().zip(shape_cols.iter_mut()) {
                let j = p.eval(s);
                col.0.push(j.v);
                col.1.push(j.d1 / uq);
                col.2.push((j.d2 - q * du / u * j.d1) / (uq * uq));
            }
        }
        let radius = RadialProfile::sampled(&sbar, r_cols.0, r_cols.1, r_cols.2)?;
        let shape = shape_cols
            .into_iter()
            .map(|c| RadialProfile::sampled(&sbar, c.0, c.1, c.2))
            .collect::<Result<Vec<_>>>()?;
        let mass_deficit = RadialProfile::sampled_first(&sbar, md_cols.0, md_cols.1)?;
        let tau = match base.asymptotic {
            AsymptoticClass::Flat { tau } => tau,
            AsymptoticClass::Hyperbolic { .. } => unreachable!("rejected in new"),
        };
        InitialDataSet::new(
            format!("conformal[{}; t = {}]", base.label, st.t),
            base.orbit,
            AsymptoticClass::Flat { tau },
            sbar,
            radius,
            shape,
            Extrinsic::zero(base.extrinsic.diag.len()),
            Some(mass_deficit),
        )
    }
}

fn tail_at(grid: &[f64], tail: &[f64], radius: &RadialProfile, omega: f64, k: i32, s: f64) -> f64 {
    let j = locate(grid, s);
    if s == grid[j] {
        return tail[j];
    }
    let piece = quad::gk15(&mut |x: f64| 1.0 / area_of(radius, omega, k, x).0, grid[j], s)
        .map(|r| r.value)
        .unwrap_or(f64::NAN);
    tail[j] - piece
}

/// Smallest grid node beyond which the orbit defect is nonnegative (within
/// `-slack`) on the rest of the grid.
pub fn defect_threshold(base: &InitialDataSet, slack: f64) -> Result<f64> {
    let mut threshold = 0.0;
    for &s in base.grid.iter().rev() {
        if monotonicity_defect(base, s)? < -slack {
            threshold = s;
            break;
        }
    }
    if threshold == 0.0 {
        return Ok(0.0);
    }
    let i = base.grid.partition_point(|&x| x <= threshold);
    base.grid
        .get(i)
        .copied()
        .ok_or_else(|| Error::Flow("the orbit defect is negative at the outer end".into()))
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct ConformalOptions {
    pub t_stop: f64,
    pub dt: f64,
    /// Horizon location whose first crossing is reported.
    pub target: Option<f64>,
    /// End the run at the first output time with `s_t ≥ target`.
    pub stop_at_target: bool,
    pub max_halvings: u32,
}

impl Default for ConformalOptions {
    fn default() -> Self {
        Self {
            t_stop: 1.0,
            dt: MAX_STEP,
            target: None,
            stop_at_target: false,
            max_halvings: 8,
        }
    }
}

/// States of a run on a uniform output grid in `t`.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct ConformalRun {
    pub states: Vec<ConformalState>,
    /// First output time with `s_t ≥ target`.
    pub reached: Option<f64>,
}

impl ConformalRun {
    pub fn last(&self) -> &ConformalState {
        self.states.last().expect("a run holds the initial state")
    }

    /// Largest relative deviation of the horizon area from its initial value.
    pub fn area_drift(&self) -> f64 {
        let a0 = self.states[0].area;
        self.states
            .iter()
            .map(|s| ((s.area - a0) / a0).abs())
            .fold(0.0, f64::max)
    }

    /// Largest increase of the mass estimate between consecutive states.
    pub fn max_mass_increase(&self) -> f64 {
        self.states
            .windows(2)
            .map(|w| w[1].mass_estimate - w[0].mass_estimate)
            .fold(f64::NEG_INFINITY, f64::max)
    }

    /// Writes the table `t s_t area mass`.
    pub fn write_table<W: Write>(&self, mut out: W) -> Result<()> {
        let io = |e: std::io::Error| Error::Numeric(format!("write failed: {e}"));
        writeln!(out, "# penrose-conformal v1").map_err(io)?;
        writeln!(out, "# reached = {:?}", self.reached).map_err(io)?;
        writeln!(out, "# t s_t area mass").map_err(io)?;
        for s in &self.states {
            writeln!(
                out,
                "{:.16e} {:.16e} {:.16e} {:.16e}",
                s.t, s.s_t, s.area, s.mass_estimate
            )
            .map_err(io)?;
        }
        Ok(())
    }
}

/// Runs the flow from `u ≡ 1` on `[0, t_stop]`.
pub fn run_conformal(base: &InitialDataSet, opts: &ConformalOptions, tol: &Tolerances) -> Result<ConformalRun> {
    let flow = ConformalFlow::new(base, tol)?;
    run_with(&flow, opts, tol.zero)
}

pub fn run_with(flow: &ConformalFlow<'_>, opts: &ConformalOptions, zero: f64) -> Result<ConformalRun> {
    if !(opts.dt > 0.0 && opts.dt <= MAX_STEP * (1.0 + 1e-12)) || !(opts.t_stop >= 0.0) {
        return Err(Error::Domain(format!("bad conformal run parameters {opts:?}")));
    }
    let mut st = flow.initial_state(zero)?;
    let reached_now = |st: &ConformalState| opts.target.is_some_and(|x| st.s_t >= x);
    let mut reached = reached_now(&st).then_some(0.0);
    let steps = (opts.t_stop / opts.dt - 1e-9).ceil().max(0.0) as usize;
    let mut states = vec![st.clone()];
    for i in 0..steps {
        if reached.is_some() && opts.stop_at_target {
            break;
        }
        let t_next = (opts.t_stop).min((i + 1) as f64 * opts.dt);
        st = flow.advance(&st, t_next - st.t, opts.max_halvings)?;
        if reached.is_none() && reached_now(&st) {
            reached = Some(st.t);
        }
        states.push(st.clone());
    }
    Ok(ConformalRun { states, reached })
}

/// Free-function form of [`ConformalFlow::harmonic_radial`].
pub fn harmonic_radial(state: &ConformalState, base: &InitialDataSet, tol: &Tolerances) -> Result<RadialProfile> {
    Ok(ConformalFlow::new(base, tol)?.harmonic_radial(state))
}

/// Free-function form of [`ConformalFlow::step`].
pub fn conformal_step(
    state: &ConformalState,
    base: &InitialDataSet,
    dt: f64,
    tol: &Tolerances,
) -> Result<ConformalState> {
    ConformalFlow::new(base, tol)?.step(state, dt)
}

#[cfg(test)]
mod tests;
