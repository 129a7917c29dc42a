//! Radial inverse mean curvature flow and the Hawking mass.
//!
//! In a cohomogeneity-one metric `ds² + g_s` the level sets `Σ_s` already
//! form a smooth IMCF once `H > 0`: the flow time is `t(s) = ∫₀ˢ H`, and
//! because `H = (d−1)R'/R` the areas obey `|Σ_t| = |Σ_0| e^t`. All surface
//! integrals are homogeneous, so the Hawking mass and the curvature bracket
//! of its evolution are closed-form in the radius and the orbit shape.

use std::io::Write;

use serde::Serialize;

use crate::error::{Error, Result};
use crate::initial_data::InitialDataSet;
use crate::numerics::extrap::extrapolate;
use crate::numerics::{quad, unit_sphere_volume};
use crate::orbit_geometry::curvature_deficit;

/// Which Hawking mass to evaluate.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
pub enum MassMode {
    Flat,
    Hyperbolic,
}

impl MassMode {
    /// The mode matching the asymptotic class of `data`.
    pub fn of(data: &InitialDataSet) -> Self {
        if data.asymptotic.is_hyperbolic() {
            MassMode::Hyperbolic
        } else {
            MassMode::Flat
        }
    }
}

/// Hawking mass of a closed hypersurface in a `d`-manifold from its area and
/// `∫H²`, in either mode.
pub fn hawking_mass_from_integrals(d: usize, area: f64, int_h2: f64, mode: MassMode) -> f64 {
    let k = (d - 1) as f64;
    let omega = unit_sphere_volume(d - 1);
    let x = area / omega;
    let mut bracket = 1.0 - int_h2 / (k * k * omega.powf(2.0 / k) * area.powf((k - 2.0) / k));
    if mode == MassMode::Hyperbolic {
        bracket += x.powf(2.0 / k);
    }
    0.5 * x.powf((k - 1.0) / k) * bracket
}

/// Hawking mass of the level set `Σ_s` of time-symmetric data.
///
/// This evaluates `½R^{d−2}(1 − R'²)` or `½R^{d−2}(1 + R² − R'²)` through the
/// data's stored mass deficit, which avoids the cancellation between `1` and
/// `R'²` far out.
pub fn hawking_mass(data: &InitialDataSet, s: f64, mode: MassMode) -> Result<f64> {
    if !data.is_time_symmetric() {
        return Err(Error::Precondition(
            "the Hawking mass along the level sets is only used for time-symmetric data".into(),
        ));
    }
    data.mean_curvature(s)?;
    let r = data.radius.value(s);
    let own = data.mass_deficit.value(s);
    let deficit = match (MassMode::of(data), mode) {
        (a, b) if a == b => own,
        (MassMode::Hyperbolic, MassMode::Flat) => own - r * r,
        _ => own + r * r,
    };
    Ok(0.5 * r.powi(data.dimension() as i32 - 2) * deficit)
}

/// First-line bracket of the Hawking-mass evolution along IMCF,
/// `(d−2)/(d−1) − ∫R_Σ / ((d−1)² ω^{2/(d−1)} |Σ|^{(d−3)/(d−1)})`.
///
/// For a homogeneous orbit this is the scale-invariant curvature deficit
/// divided by `(d−1)²`; it vanishes exactly on round spheres.
pub fn monotonicity_defect(data: &InitialDataSet, s: f64) -> Result<f64> {
    data.mean_curvature(s)?;
    let k = (data.dimension() - 1) as f64;
    Ok(curvature_deficit(&data.orbit_at(s)?)? / (k * k))
}

/// One level set of the radial flow.
#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct FlowRecord {
    /// Flow time `∫ H ds̄`.
    pub t: f64,
    pub sbar: f64,
    pub area: f64,
    pub mean_curvature: f64,
    pub hawking_mass: f64,
    pub defect: f64,
}

/// Radial IMCF trace of time-symmetric data.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct FlowTrace {
    pub d: usize,
    pub mode: MassMode,
    pub records: Vec<FlowRecord>,
    /// Highest-order tail extrapolant of `m_H`.
    pub energy_estimate: f64,
    /// Gap between the two highest extrapolation orders.
    pub energy_spread: f64,
    /// Smallest increment `m_H(i+1) − m_H(i)` along the trace.
    pub min_increment: f64,
    /// Largest `|area − area₀ e^t| / area` over the trace.
    pub area_law_residual: f64,
}

impl FlowTrace {
    pub fn horizon(&self) -> &FlowRecord {
        &self.records[0]
    }

    pub fn last(&self) -> &FlowRecord {
        self.records.last().expect("a trace has at least two records")
    }

    /// `max defect · area^{(d−3)/(d−1)}`, zero exactly when every leaf is
    /// round.
    pub fn rigidity_gap(&self) -> f64 {
        let k = (self.d - 1) as f64;
        self.records
            .iter()
            .map(|r| r.defect * r.area.powf((k - 1.0) / k))
            .fold(0.0, f64::max)
    }

    /// Writes the table `t sbar area H mH defect`.
    pub fn write_table<W: Write>(&self, mut out: W) -> Result<()> {
        let io = |e: std::io::Error| Error::Numeric(format!("write failed: {e}"));
        writeln!(out, "# penrose-flow v1").map_err(io)?;
        writeln!(
            out,
            "# d = {}; mode = {:?}; energy_estimate = {:.16e}; energy_spread = {:e}",
            self.d, self.mode, self.energy_estimate, self.energy_spread
        )
        .map_err(io)?;
        writeln!(out, "# t sbar area H mH defect").map_err(io)?;
        for r in &self.records {
            writeln!(
                out,
                "{:.16e} {:.16e} {:.16e} {:.16e} {:.16e} {:.16e}",
                r.t, r.sbar, r.area, r.mean_curvature, r.hawking_mass, r.defect
            )
            .map_err(io)?;
        }
        Ok(())
    }
}

/// Quadrature accuracy used for the flow time.
const TIME_QUAD_REL: f64 = 1e-13;

/// Sweeps the grid of time-symmetric data as a radial IMCF.
///
/// Fails with a flow error if `H ≤ 0` at some node with `s > 0`, and with a
/// precondition error for data with nonzero `k`.
pub fn flow_trace(data: &InitialDataSet) -> Result<FlowTrace> {
    if !data.is_time_symmetric() {
        return Err(Error::Precondition(
            "IMCF traces need time-symmetric data (run the Jang stage first)".into(),
        ));
    }
    let mode = MassMode::of(data);
    let d = data.dimension();
    for &s in &data.grid[1..] {
        let h = data.mean_curvature(s)?;
        if !(h > 0.0) {
            return Err(Error::Flow(format!(
                "level set at s = {s} has mean curvature {h:e} ≤ 0"
            )));
        }
    }
    let h = |s: f64| data.mean_curvature(s).unwrap_or(f64::NAN);
    let t = quad::cumulative(h, &data.grid, 0.0, TIME_QUAD_REL)?;
    let area0 = data.area(0.0);
    let mut records = Vec::with_capacity(data.grid.len());
    for (i, &s) in data.grid.iter().enumerate() {
        records.push(FlowRecord {
            t: t[i],
            sbar: s,
            area: data.area(s),
            mean_curvature: data.mean_curvature(s)?,
            hawking_mass: hawking_mass(data, s, mode)?,
            defect: monotonicity_defect(data, s)?,
        });
    }
    let area_law_residual = records
        .iter()
        .map(|r| ((r.area - area0 * r.t.exp()) / r.area).abs())
        .fold(0.0, f64::max);
    let min_increment = records
        .windows(2)
        .map(|w| w[1].hawking_mass - w[0].hawking_mass)
        .fold(f64::INFINITY, f64::min);
    let idx = data.tail_indices();
    if idx.len() < 3 {
        return Err(Error::Asymptotics("grid tail too short for extrapolation".into()));
    }
    let (x, y): (Vec<f64>, Vec<f64>) = idx
        .iter()
        .map(|&i| {
            let s = data.grid[i];
            let a = match mode {
                MassMode::Hyperbolic => (-2.0 * s).exp(),
                MassMode::Flat => 1.0 / data.radius.value(s),
            };
            (a, records[i].hawking_mass)
        })
        .unzip();
    let e = extrapolate(&x, &y);
    Ok(FlowTrace {
        d,
        mode,
        records,
        energy_estimate: e.value,
        energy_spread: e.spread,
        min_increment,
        area_law_residual,
    })
}

/// Limit of the Hawking mass along the trace. Fails when the two highest
/// extrapolation orders differ by more than `spread_tol` relative.
///
/// For flat data this is the one-sided energy estimate `lim m_H ≤ E`, which
/// is an equality for the radial traces here; for hyperbolic data it equals
/// the total energy.
pub fn energy_limit(trace: &FlowTrace, spread_tol: f64) -> Result<f64> {
    let scale = trace
        .energy_estimate
        .abs()
        .max(trace.horizon().hawking_mass.abs())
        .max(1e-300);
    if !(trace.energy_spread <= spread_tol * scale) {
        return Err(Error::Asymptotics(format!(
            "Hawking-mass extrapolants disagree: {} ± {:e}",
            trace.energy_estimate, trace.energy_spread
        )));
    }
    Ok(trace.energy_estimate)
}
