//! Cohomogeneity-one initial data sets `([0, S_max] × S^{d−1}, g, k)`.
//!
//! The metric is `ds² + g_s` with `g_s` a homogeneous orbit metric. It is
//! stored through the *volume radius* `R(s)`, defined by
//! `|Σ_s| = ω_{d−1} R^{d−1}`, together with the orbit shape parameters.
//! For Berger orbits `R` coincides with the scale factor `ρ`.
//!
//! The extrinsic curvature is diagonal in an adapted orthonormal frame
//! `{∂_s, e_j}` except for mixed components `k(∂_s, e_j)` along
//! multiplicity-one direction groups. For Berger orbits this reproduces the
//! component names `k_a` (radial), `k_b` (fibre), `k_c` (base) and `k_s`
//! (radial–fibre).

pub mod chart;
pub mod families;
pub mod hairy;
pub mod io;
pub mod profile;
pub mod synthetic;

use std::f64::consts::PI;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::numerics::extrap::{extrapolate, Extrapolated};
use crate::numerics::fit::power_law_exponent;
use crate::numerics::{unit_sphere_volume, Jet};
use crate::orbit_geometry::{curvature_deficit, OrbitKind};
pub use families::{build_family, build_family_with, penrose_bound, BlackHoleFamily, ClosedForms, FamilyOptions};
pub use profile::RadialProfile;

/// Fall-off class of the asymptotic end.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub enum AsymptoticClass {
    /// Asymptotically flat with metric decay `O(s^{−τ})`.
    Flat { tau: f64 },
    /// Asymptotically hyperbolic with decay `O(e^{−q s})`.
    Hyperbolic { q: f64 },
}

impl AsymptoticClass {
    pub fn is_hyperbolic(&self) -> bool {
        matches!(self, AsymptoticClass::Hyperbolic { .. })
    }

    /// Checks `τ > (d−2)/2` or `q > d/2`.
    pub fn validate(&self, d: usize) -> Result<()> {
        let d = d as f64;
        match *self {
            AsymptoticClass::Flat { tau } if tau > 0.5 * (d - 2.0) => Ok(()),
            AsymptoticClass::Hyperbolic { q } if q > 0.5 * d => Ok(()),
            other => Err(Error::Domain(format!("{other:?} violates the decay bound for d = {d}"))),
        }
    }
}

/// Extrinsic curvature components, one diagonal entry and one mixed entry
/// per direction group (mixed entries of higher-multiplicity groups must be
/// zero by symmetry).
#[derive(Clone, Debug)]
pub struct Extrinsic {
    pub k_a: RadialProfile,
    pub diag: Vec<RadialProfile>,
    pub cross: Vec<RadialProfile>,
}

impl Extrinsic {
    pub fn zero(groups: usize) -> Self {
        Self {
            k_a: RadialProfile::Zero,
            diag: vec![RadialProfile::Zero; groups],
            cross: vec![RadialProfile::Zero; groups],
        }
    }

    pub fn is_zero(&self) -> bool {
        self.k_a.is_zero() && self.diag.iter().all(|p| p.is_zero()) && self.cross.iter().all(|p| p.is_zero())
    }
}

/// Type of the inner boundary.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub enum BoundaryType {
    /// `H(0) = 0` (and `Tr_Σ k(0) = 0`).
    Minimal,
    /// `θ₋(0) = 0`, `H(0) ≠ 0`.
    PastHorizon,
    /// `θ₊(0) = 0`, `H(0) ≠ 0`.
    FutureHorizon,
    /// Neither expansion vanishes.
    NotHorizon,
}

/// Geometry of the level set through `s`.
#[derive(Clone, Debug)]
pub struct LevelGeometry {
    pub s: f64,
    /// Manifold dimension.
    pub d: usize,
    /// Volume radius with its two derivatives.
    pub r: Jet,
    pub mean_curvature: f64,
    pub mean_curvature_prime: f64,
    /// Curvature deficit of the orbit shape at `s`.
    pub deficit: f64,
    /// Squared norm of the trace-free second fundamental form.
    pub shear2: f64,
    /// `(multiplicity, principal curvature)` per direction group.
    pub principal: Vec<(f64, f64)>,
    /// `1 − R'²` (flat) or `1 + R² − R'²` (hyperbolic).
    pub mass_deficit: f64,
}

/// Energy and momentum density at a point.
#[derive(Clone, Debug, PartialEq)]
pub struct EnergyMomentum {
    pub mu: f64,
    /// `J(∂_s)`.
    pub j_radial: f64,
    /// `J(e_j)` for each direction group (zero where forbidden by symmetry).
    pub j_orbit: Vec<f64>,
}

impl EnergyMomentum {
    pub fn j_norm(&self) -> f64 {
        (self.j_radial.powi(2) + self.j_orbit.iter().map(|j| j * j).sum::<f64>()).sqrt()
    }
}

/// Fitted tail exponents of `|k_a|` and of the largest mixed component.
#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct MomentumDecay {
    /// `−∞` when the component vanishes identically.
    pub p_a: f64,
    pub p_s: f64,
}

impl MomentumDecay {
    /// Whether both exponents meet `p ≤ −(2τ+2) + slack`.
    pub fn certifies_zero_momentum(&self, tau: f64, slack: f64) -> bool {
        let bound = -(2.0 * tau + 2.0) + slack;
        self.p_a <= bound && self.p_s <= bound
    }
}

/// A cohomogeneity-one initial data set.
#[derive(Clone, Debug)]
pub struct InitialDataSet {
    pub label: String,
    pub orbit: OrbitKind,
    pub asymptotic: AsymptoticClass,
    /// Evaluation grid, starting at the boundary `s = 0`.
    pub grid: Vec<f64>,
    pub radius: RadialProfile,
    pub shape: Vec<RadialProfile>,
    pub extrinsic: Extrinsic,
    /// Cancellation-free `1 − R'²` (flat) or `1 + R² − R'²` (hyperbolic).
    pub mass_deficit: RadialProfile,
    /// Closed-form family this set was built from, if any.
    pub family: Option<BlackHoleFamily>,
}

/// `1 − R'²` or `1 + R² − R'²` evaluated directly from the radius profile.
pub fn direct_mass_deficit(radius: RadialProfile, hyperbolic: bool) -> RadialProfile {
    RadialProfile::closed(move |s| {
        let r = radius.eval(s);
        let base = 1.0 - r.d1 * r.d1;
        let (v, d1) = if hyperbolic {
            (base + r.v * r.v, 2.0 * r.v * r.d1 - 2.0 * r.d1 * r.d2)
        } else {
            (base, -2.0 * r.d1 * r.d2)
        };
        Jet::new(v, d1, f64::NAN)
    })
}

impl InitialDataSet {
    /// Assembles and validates a data set.
    #[allow(clippy::too_many_arguments)]
    pub fn new(
        label: impl Into<String>,
        orbit: OrbitKind,
        asymptotic: AsymptoticClass,
        grid: Vec<f64>,
        radius: RadialProfile,
        shape: Vec<RadialProfile>,
        extrinsic: Extrinsic,
        mass_deficit: Option<RadialProfile>,
    ) -> Result<Self> {
        let mass_deficit =
            mass_deficit.unwrap_or_else(|| direct_mass_deficit(radius.clone(), asymptotic.is_hyperbolic()));
        let data = Self {
            label: label.into(),
            orbit,
            asymptotic,
            grid,
            radius,
            shape,
            extrinsic,
            mass_deficit,
            family: None,
        };
        data.validate()?;
        Ok(data)
    }

    pub fn validate(&self) -> Result<()> {
        let groups = self
            .orbit
            .direction_groups(&vec![Jet::constant(1.0); self.orbit.param_count()])
            .len();
        if self.shape.len() != self.orbit.param_count() {
            return Err(Error::Domain(
                "shape profile count does not match the orbit class".into(),
            ));
        }
        if self.extrinsic.diag.len() != groups || self.extrinsic.cross.len() != groups {
            return Err(Error::Domain(
                "extrinsic components do not match the direction groups".into(),
            ));
        }
        if self.grid.len() < 2 || self.grid[0] != 0.0 || !crate::numerics::interp::strictly_increasing(&self.grid) {
            return Err(Error::Domain("grid must start at 0 and increase strictly".into()));
        }
        self.asymptotic.validate(self.dimension())?;
        for &s in &self.grid[1..] {
            let r = self.radius.value(s);
            if !(r > 0.0) {
                return Err(Error::Domain(format!("radius must be positive, got {r} at s = {s}")));
            }
        }
        Ok(())
    }

    /// Manifold dimension `d`.
    pub fn dimension(&self) -> usize {
        self.orbit.dimension() + 1
    }

    /// Group index `n` of the orbit class (Spin(9) reports 0).
    pub fn n(&self) -> usize {
        match self.orbit {
            OrbitKind::Berger { n } | OrbitKind::Sp { n } => n,
            OrbitKind::SU2 => 1,
            OrbitKind::Spin9 => 0,
            OrbitKind::Round { dim } => (dim.saturating_sub(1)) / 2,
        }
    }

    pub fn s_max(&self) -> f64 {
        *self.grid.last().expect("validated grid")
    }

    pub fn is_time_symmetric(&self) -> bool {
        self.extrinsic.is_zero()
    }

    fn check_s(&self, s: f64) -> Result<()> {
        if s < 0.0 || s > self.s_max() * (1.0 + 1e-12) || !s.is_finite() {
            return Err(Error::Domain(format!("s = {s} outside [0, {}]", self.s_max())));
        }
        Ok(())
    }

    fn shape_jets(&self, s: f64) -> Vec<Jet> {
        self.shape.iter().map(|p| p.eval(s)).collect()
    }

    /// Orbit metric at `s`, at unit overall scale.
    pub fn orbit_at(&self, s: f64) -> Result<crate::orbit_geometry::OrbitClass> {
        let p: Vec<f64> = self.shape_jets(s).iter().map(|j| j.v).collect();
        self.orbit.with_params(&p)
    }

    /// Scale factor `ρ` with `g_s = ρ² g_orbit`.
    pub fn scale_factor(&self, s: f64) -> Jet {
        let r = self.radius.eval(s);
        let groups = self.orbit.direction_groups(&self.shape_jets(s));
        let k = (self.dimension() - 1) as f64;
        let logvol = groups
            .iter()
            .fold(Jet::constant(0.0), |acc, g| acc + g.log_len * g.mult);
        (r.ln() - logvol / k).exp()
    }

    /// Length of the first direction group relative to `ρ` times `ρ`
    /// (the Hopf fibre for Berger orbits).
    pub fn fibre_length(&self, s: f64) -> Jet {
        let groups = self.orbit.direction_groups(&self.shape_jets(s));
        self.scale_factor(s) * groups[0].log_len.exp()
    }

    pub fn level(&self, s: f64) -> Result<LevelGeometry> {
        self.check_s(s)?;
        let d = self.dimension();
        let k = (d - 1) as f64;
        let r = self.radius.eval(s);
        let groups = self.orbit.direction_groups(&self.shape_jets(s));
        let logvol = groups
            .iter()
            .fold(Jet::constant(0.0), |acc, g| acc + g.log_len * g.mult);
        let mut shear2 = 0.0;
        let mut principal = Vec::with_capacity(groups.len());
        for g in &groups {
            let hat = g.log_len - logvol / k;
            shear2 += g.mult * hat.d1 * hat.d1;
            principal.push((g.mult, r.d1 / r.v + hat.d1));
        }
        let deficit = curvature_deficit(&self.orbit_at(s)?)?;
        Ok(LevelGeometry {
            s,
            d,
            r,
            mean_curvature: k * r.d1 / r.v,
            mean_curvature_prime: k * (r.d2 / r.v - (r.d1 / r.v).powi(2)),
            deficit,
            shear2,
            principal,
            mass_deficit: self.mass_deficit.value(s),
        })
    }

    /// Mean curvature `H` of the level set.
    pub fn mean_curvature(&self, s: f64) -> Result<f64> {
        self.check_s(s)?;
        let r = self.radius.eval(s);
        Ok((self.dimension() - 1) as f64 * r.d1 / r.v)
    }

    /// Trace of `k` over the level set, with its derivative.
    pub fn trace_sigma_k(&self, s: f64) -> Jet {
        let mults = self.group_mults();
        self.extrinsic
            .diag
            .iter()
            .zip(&mults)
            .fold(Jet::constant(0.0), |acc, (p, m)| acc + p.eval(s) * *m)
    }

    fn group_mults(&self) -> Vec<f64> {
        self.orbit
            .direction_groups(&vec![Jet::constant(1.0); self.orbit.param_count()])
            .iter()
            .map(|g| g.mult)
            .collect()
    }

    /// `(θ₊, θ₋) = (H + Tr_Σ k, H − Tr_Σ k)`.
    pub fn null_expansions(&self, s: f64) -> Result<(f64, f64)> {
        let h = self.mean_curvature(s)?;
        let t = self.trace_sigma_k(s).v;
        Ok((h + t, h - t))
    }

    /// Scalar curvature of `g`, assembled from the cancellation-free mass
    /// deficit.
    pub fn scalar_curvature(&self, s: f64) -> Result<f64> {
        let lv = self.level(s)?;
        let d = lv.d as f64;
        let r = lv.r;
        let mut bracket = (d - 2.0) * lv.mass_deficit - 2.0 * r.v * r.d2;
        let mut offset = 0.0;
        if self.asymptotic.is_hyperbolic() {
            offset = -(d - 1.0) * (d - 2.0);
        }
        // With the hyperbolic deficit 1 + R² − R'² the bracket carries an extra
        // (d−2)R², which the offset removes after division by R².
        bracket *= (d - 1.0) / (r.v * r.v);
        Ok(-lv.deficit / (r.v * r.v) + bracket + offset - lv.shear2)
    }

    /// Energy density `μ` and momentum density `J` from the constraints.
    pub fn energy_momentum_density(&self, s: f64) -> Result<EnergyMomentum> {
        let lv = self.level(s)?;
        let d = lv.d as f64;
        let scal = self.scalar_curvature(s)?;
        let mults = self.group_mults();
        let k_a = self.extrinsic.k_a.eval(s);
        let diag: Vec<Jet> = self.extrinsic.diag.iter().map(|p| p.eval(s)).collect();
        let cross: Vec<Jet> = self.extrinsic.cross.iter().map(|p| p.eval(s)).collect();
        let tr_sigma = diag
            .iter()
            .zip(&mults)
            .fold(Jet::constant(0.0), |acc, (k, m)| acc + *k * *m);
        let tr = k_a + tr_sigma;
        let norm2 = k_a.v * k_a.v
            + diag.iter().zip(&mults).map(|(k, m)| m * k.v * k.v).sum::<f64>()
            + 2.0 * cross.iter().map(|c| c.v * c.v).sum::<f64>();
        let mut sixteen_pi_mu = scal + tr.v * tr.v - norm2;
        if self.asymptotic.is_hyperbolic() {
            sixteen_pi_mu += d * (d - 1.0);
        }
        let h = lv.mean_curvature;
        // Divergence of π = k − (Tr k) g in the adapted frame.
        let pi_11 = -tr_sigma;
        let mut div_radial = pi_11.d1 + h * pi_11.v;
        for ((k, m), (_, kappa)) in diag.iter().zip(&mults).zip(&lv.principal) {
            div_radial -= m * kappa * (k.v - tr.v);
        }
        let j_orbit = cross
            .iter()
            .zip(&lv.principal)
            .map(|(c, (_, kappa))| (c.d1 + c.v * (h + kappa)) / (8.0 * PI))
            .collect();
        Ok(EnergyMomentum {
            mu: sixteen_pi_mu / (16.0 * PI),
            j_radial: div_radial / (8.0 * PI),
            j_orbit,
        })
    }

    /// `min (μ − |J|)` over the grid.
    pub fn dec_margin(&self) -> Result<f64> {
        let mut m = f64::INFINITY;
        for &s in &self.grid {
            let em = self.energy_momentum_density(s)?;
            m = m.min(em.mu - em.j_norm());
        }
        Ok(m)
    }

    /// Smallest scalar curvature over the grid.
    pub fn min_scalar_curvature(&self) -> Result<f64> {
        self.grid
            .iter()
            .try_fold(f64::INFINITY, |m, &s| Ok(m.min(self.scalar_curvature(s)?)))
    }

    /// Area of the inner boundary.
    pub fn horizon_area(&self) -> f64 {
        let k = self.dimension() - 1;
        unit_sphere_volume(k) * self.radius.value(0.0).powi(k as i32)
    }

    /// Area of the level set at `s`.
    pub fn area(&self, s: f64) -> f64 {
        let k = self.dimension() - 1;
        unit_sphere_volume(k) * self.radius.value(s).powi(k as i32)
    }

    /// Classifies the inner boundary with tolerance `zero` (relative to the
    /// boundary mean-curvature scale `(d−1)/R(0)`).
    pub fn boundary_type(&self, zero: f64) -> Result<BoundaryType> {
        let h = self.mean_curvature(0.0)?;
        let (tp, tm) = self.null_expansions(0.0)?;
        let scale = (self.dimension() - 1) as f64 / self.radius.value(0.0);
        let z = zero * scale;
        Ok(if h.abs() <= z && tp.abs() <= z && tm.abs() <= z {
            BoundaryType::Minimal
        } else if tm.abs() <= z {
            BoundaryType::PastHorizon
        } else if tp.abs() <= z {
            BoundaryType::FutureHorizon
        } else {
            BoundaryType::NotHorizon
        })
    }

    /// Checks `θ₊ > 0` and `θ₋ > 0` on every grid node with `s > 0`.
    pub fn check_outermost(&self) -> Result<()> {
        for &s in &self.grid[1..] {
            let (tp, tm) = self.null_expansions(s)?;
            if !(tp > 0.0 && tm > 0.0) {
                return Err(Error::Precondition(format!(
                    "boundary is not outermost: θ₊ = {tp:e}, θ₋ = {tm:e} at s = {s}"
                )));
            }
        }
        Ok(())
    }

    /// Hawking mass of the level set of `g` through grid node `i`, using the
    /// data's own asymptotic class.
    pub fn level_hawking_mass(&self, s: f64) -> f64 {
        let r = self.radius.value(s);
        0.5 * r.powi(self.dimension() as i32 - 2) * self.mass_deficit.value(s)
    }

    /// Grid indices whose radius is closest to `R_last`, `R_last/√10`, `R_last/10`.
    pub fn tail_indices(&self) -> Vec<usize> {
        let radii: Vec<f64> = self.grid.iter().map(|&s| self.radius.value(s)).collect();
        let r_last = *radii.last().expect("grid");
        let mut out: Vec<usize> = [0.1, 10f64.sqrt().recip(), 1.0]
            .iter()
            .map(|f| {
                let target = f * r_last;
                (0..radii.len())
                    .min_by(|&a, &b| (radii[a] - target).abs().total_cmp(&(radii[b] - target).abs()))
                    .expect("grid")
            })
            .collect();
        out.dedup();
        out
    }

    /// Tail extrapolation of the level-set Hawking mass: Neville in `1/R`
    /// (flat) or `e^{−2s}` (hyperbolic) on the last decade of the grid.
    pub fn adm_energy_estimate(&self) -> Result<Extrapolated> {
        let idx = self.tail_indices();
        if idx.len() < 3 {
            return Err(Error::Asymptotics("grid tail too short for extrapolation".into()));
        }
        let (x, y): (Vec<f64>, Vec<f64>) = idx
            .iter()
            .map(|&i| {
                let s = self.grid[i];
                let a = if self.asymptotic.is_hyperbolic() {
                    (-2.0 * s).exp()
                } else {
                    1.0 / self.radius.value(s)
                };
                (a, self.level_hawking_mass(s))
            })
            .unzip();
        Ok(extrapolate(&x, &y))
    }

    /// ADM energy (flat) or total energy `E_hyp` (hyperbolic).
    pub fn adm_energy(&self, spread_tol: f64) -> Result<f64> {
        let e = self.adm_energy_estimate()?;
        if e.spread > spread_tol * e.value.abs().max(1e-300) {
            return Err(Error::Asymptotics(format!(
                "energy extrapolants disagree: {} ± {:e}",
                e.value, e.spread
            )));
        }
        Ok(e.value)
    }

    /// Tail decay exponents of `|k_a|` and of the mixed components over
    /// `[S_max/2, S_max]`.
    pub fn momentum_decay_exponents(&self) -> MomentumDecay {
        let half = 0.5 * self.s_max();
        let tail: Vec<f64> = self.grid.iter().copied().filter(|&s| s >= half).collect();
        let fit = |p: &RadialProfile| -> f64 {
            if p.is_zero() {
                return f64::NEG_INFINITY;
            }
            let v: Vec<f64> = tail.iter().map(|&s| p.value(s)).collect();
            power_law_exponent(&tail, &v).unwrap_or(f64::NEG_INFINITY)
        };
        let p_a = fit(&self.extrinsic.k_a);
        let p_s = self.extrinsic.cross.iter().map(&fit).fold(f64::NEG_INFINITY, f64::max);
        MomentumDecay { p_a, p_s }
    }

    /// Angular momentum about the Hopf fibre, `lim P k_s R^{d−1} / d`.
    pub fn angular_momentum(&self, spread_tol: f64) -> Result<f64> {
        let fibre_group = match self.orbit {
            OrbitKind::Berger { .. } => 0,
            OrbitKind::SU2 => 2,
            other => return Err(Error::Domain(format!("no rotational Killing field for {other:?}"))),
        };
        let ks = &self.extrinsic.cross[fibre_group];
        if ks.is_zero() {
            return Ok(0.0);
        }
        let d = self.dimension() as f64;
        let idx = self.tail_indices();
        let (x, y): (Vec<f64>, Vec<f64>) = idx
            .iter()
            .map(|&i| {
                let s = self.grid[i];
                let groups = self.orbit.direction_groups(&self.shape_jets(s));
                let p = self.scale_factor(s).v * groups[fibre_group].log_len.v.exp();
                let r = self.radius.value(s);
                (1.0 / r, p * ks.value(s) * r.powi(self.dimension() as i32 - 1) / d)
            })
            .unzip();
        let e = extrapolate(&x, &y);
        if e.spread > spread_tol * e.value.abs().max(1e-300) {
            return Err(Error::Asymptotics(format!(
                "angular momentum tail disagrees: ± {:e}",
                e.spread
            )));
        }
        Ok(e.value)
    }
}

#[cfg(test)]
mod tests;
