//! Exact rotating and static black-hole slices with `U(n+1)` symmetry.
//!
//! All four families share the form
//! `U(r)² dr² + P(r)² (dψ + A)² + r² g_FS` with extrinsic curvature
//! supported on `dr (dψ + A)`. They are built on the arclength grid through a
//! [`Chart`] of the lapse `V = U^{−2}`, and every profile is sampled from
//! closed-form jets in `r` at the grid nodes.

use serde::{Deserialize, Serialize};

use super::chart::{Chart, Lapse};
use super::{AsymptoticClass, Extrinsic, InitialDataSet, RadialProfile};
use crate::error::{Error, Result};
use crate::numerics::root::{bracket_right, brent};
use crate::numerics::{unit_sphere_volume, Jet};
use crate::orbit_geometry::OrbitKind;
use crate::tolerances::Tolerances;

/// Closed-form black-hole families.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "family", rename_all = "kebab-case")]
pub enum BlackHoleFamily {
    Schwarzschild { n: usize, m: f64 },
    SchwarzschildAdS { n: usize, m: f64 },
    MyersPerry { n: usize, m: f64, a: f64 },
    MyersPerryAdS { n: usize, m: f64, a: f64 },
}

/// Closed-form quantities of a family.
#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct ClosedForms {
    pub r_plus: f64,
    pub m: f64,
    pub area: f64,
    /// ADM energy (flat) or `E_hyp` (hyperbolic).
    pub energy: f64,
    pub j_psi: f64,
    /// Horizon angular velocity.
    pub omega: f64,
    pub bound: f64,
    pub margin: f64,
}

/// Penrose bound for horizon area `area` in dimension `d`.
pub fn penrose_bound(d: usize, area: f64, hyperbolic: bool) -> f64 {
    let k = (d - 1) as f64;
    let x = area / unit_sphere_volume(d - 1);
    let flat = 0.5 * x.powf((k - 1.0) / k);
    if hyperbolic {
        flat + 0.5 * x.powf((k + 1.0) / k)
    } else {
        flat
    }
}

impl BlackHoleFamily {
    /// Myers–Perry data with prescribed horizon radius.
    pub fn myers_perry_from_horizon(n: usize, r_plus: f64, a: f64) -> Result<Self> {
        let y = r_plus * r_plus;
        let den = 2.0 * (y - a * a);
        if !(den > 0.0) {
            return Err(Error::Construction(format!("r₊ = {r_plus} requires |a| < r₊")));
        }
        let f = Self::MyersPerry {
            n,
            m: y.powi(n as i32 + 1) / den,
            a,
        };
        f.validate()?;
        Ok(f)
    }

    /// Myers–Perry–AdS data with prescribed horizon radius.
    pub fn myers_perry_ads_from_horizon(n: usize, r_plus: f64, a: f64) -> Result<Self> {
        let y = r_plus * r_plus;
        let den = 2.0 * (y * (1.0 - a * a) - a * a);
        if !(den > 0.0) {
            return Err(Error::Construction(format!("no horizon at r₊ = {r_plus} for a = {a}")));
        }
        let f = Self::MyersPerryAdS {
            n,
            m: (1.0 + y) * y.powi(n as i32 + 1) / den,
            a,
        };
        f.validate()?;
        Ok(f)
    }

    pub fn schwarzschild_ads_from_horizon(n: usize, r_plus: f64) -> Result<Self> {
        let y = r_plus * r_plus;
        let f = Self::SchwarzschildAdS {
            n,
            m: 0.5 * (1.0 + y) * y.powi(n as i32),
        };
        f.validate()?;
        Ok(f)
    }

    pub fn n(&self) -> usize {
        match *self {
            Self::Schwarzschild { n, .. }
            | Self::SchwarzschildAdS { n, .. }
            | Self::MyersPerry { n, .. }
            | Self::MyersPerryAdS { n, .. } => n,
        }
    }

    pub fn m(&self) -> f64 {
        match *self {
            Self::Schwarzschild { m, .. }
            | Self::SchwarzschildAdS { m, .. }
            | Self::MyersPerry { m, .. }
            | Self::MyersPerryAdS { m, .. } => m,
        }
    }

    pub fn a(&self) -> f64 {
        match *self {
            Self::MyersPerry { a, .. } | Self::MyersPerryAdS { a, .. } => a,
            _ => 0.0,
        }
    }

    pub fn is_hyperbolic(&self) -> bool {
        matches!(self, Self::SchwarzschildAdS { .. } | Self::MyersPerryAdS { .. })
    }

    pub fn dimension(&self) -> usize {
        2 * self.n() + 2
    }

    /// Short kebab-case name.
    pub fn name(&self) -> &'static str {
        match self {
            Self::Schwarzschild { .. } => "schwarzschild",
            Self::SchwarzschildAdS { .. } => "schwarzschild-ads",
            Self::MyersPerry { .. } => "myers-perry",
            Self::MyersPerryAdS { .. } => "myers-perry-ads",
        }
    }

    pub fn asymptotic(&self) -> AsymptoticClass {
        let n = self.n() as f64;
        if self.is_hyperbolic() {
            AsymptoticClass::Hyperbolic { q: 2.0 * n + 2.0 }
        } else {
            AsymptoticClass::Flat { tau: 2.0 * n }
        }
    }

    /// Parameter ranges only; existence of a horizon is checked by
    /// [`BlackHoleFamily::horizon_radius`].
    pub fn validate(&self) -> Result<()> {
        let (n, m, a) = (self.n(), self.m(), self.a());
        if n < 1 {
            return Err(Error::Domain("families need n ≥ 1".into()));
        }
        if !(m.is_finite() && m > 0.0) {
            return Err(Error::Domain(format!("mass parameter must be positive, got {m}")));
        }
        if !(a.is_finite() && a >= 0.0) {
            return Err(Error::Domain(format!(
                "rotation parameter must be nonnegative, got {a}"
            )));
        }
        if self.is_hyperbolic() && a >= 1.0 {
            return Err(Error::Domain(format!("hyperbolic rotation needs a < 1, got {a}")));
        }
        Ok(())
    }

    /// `(effective mass, 2ma²)` entering `1 − V` or `1 + r² − V`.
    fn lapse_coefficients(&self) -> (f64, f64) {
        let (m, a) = (self.m(), self.a());
        let meff = if self.is_hyperbolic() { m * (1.0 - a * a) } else { m };
        (meff, 2.0 * m * a * a)
    }

    /// `r^{2n+2} V(r)` as a polynomial in `y = r²`.
    fn horizon_polynomial(&self, y: f64) -> f64 {
        let (meff, c) = self.lapse_coefficients();
        let top = y.powi(self.n() as i32 + 1);
        let top = if self.is_hyperbolic() { top * (1.0 + y) } else { top };
        top - 2.0 * meff * y + c
    }

    fn horizon_polynomial_slope(&self, y: f64) -> f64 {
        let (meff, _) = self.lapse_coefficients();
        let n = self.n() as i32;
        let mut d = f64::from(n + 1) * y.powi(n);
        if self.is_hyperbolic() {
            d += f64::from(n + 2) * y.powi(n + 1);
        }
        d - 2.0 * meff
    }

    /// Largest positive root of `U^{−2}`.
    pub fn horizon_radius(&self) -> Result<f64> {
        self.validate()?;
        // The polynomial is convex on y > 0 with a negative slope at 0, so it
        // has a unique minimum; a horizon exists iff the minimum is negative.
        let mut slope = |y: f64| self.horizon_polynomial_slope(y);
        let (lo, hi) = bracket_right(0.0, 1.0, &mut slope, 200)
            .ok_or_else(|| Error::Numeric("could not bracket the lapse minimum".into()))?;
        let y_min = brent(lo, hi, slope, 0.0).map_err(|e| Error::Numeric(format!("{e:?}")))?;
        let f_min = self.horizon_polynomial(y_min);
        let (meff, c) = self.lapse_coefficients();
        let scale = 2.0 * meff * y_min + c;
        if f_min >= -1e-12 * scale {
            return Err(Error::Construction(format!(
                "{self:?} is extremal or has no horizon (minimum of the lapse polynomial {f_min:e})"
            )));
        }
        let mut f = |y: f64| self.horizon_polynomial(y);
        let (lo, hi) = bracket_right(y_min, 2.0 * y_min.max(1.0), &mut f, 200)
            .ok_or_else(|| Error::Numeric("could not bracket the horizon".into()))?;
        let y = brent(lo, hi, f, 0.0).map_err(|e| Error::Numeric(format!("{e:?}")))?;
        Ok(y.sqrt())
    }

    /// Lapse `V = U^{−2}` as a function of the offset from the horizon.
    pub fn lapse(&self) -> Result<FamilyLapse> {
        let xh = self.horizon_radius()?;
        let (meff, c) = self.lapse_coefficients();
        let n = self.n() as i32;
        let mut terms = vec![(1.0, 0), (-2.0 * meff, -2 * n), (c, -2 * n - 2)];
        if self.is_hyperbolic() {
            terms.push((1.0, 2));
        }
        Ok(FamilyLapse {
            xh,
            terms,
            meff,
            c,
            n: self.n(),
        })
    }

    pub fn closed_forms(&self) -> Result<ClosedForms> {
        let rp = self.horizon_radius()?;
        let (n, m, a) = (self.n(), self.m(), self.a());
        let nf = n as f64;
        let (_, c) = self.lapse_coefficients();
        let top = rp.powi(2 * n as i32 + 2);
        let p_plus = rp * (1.0 + c / top).sqrt();
        let area = unit_sphere_volume(2 * n + 1) * p_plus * rp.powi(2 * n as i32);
        let energy = if self.is_hyperbolic() {
            m * (1.0 + a * a / (2.0 * nf + 1.0))
        } else {
            m
        };
        let bound = penrose_bound(self.dimension(), area, self.is_hyperbolic());
        Ok(ClosedForms {
            r_plus: rp,
            m,
            area,
            energy,
            j_psi: m * a,
            omega: 2.0 * m * a / (top + c),
            bound,
            margin: energy - bound,
        })
    }
}

/// `V(r) = Σ a_k r^{p_k}` with `V(r₊) = 0`, evaluated relative to the
/// horizon to avoid cancellation.
#[derive(Clone, Debug)]
pub struct FamilyLapse {
    xh: f64,
    terms: Vec<(f64, i32)>,
    meff: f64,
    c: f64,
    n: usize,
}

impl FamilyLapse {
    /// `1 − V` (flat) or `1 + r² − V` (hyperbolic) at radius `x`.
    pub fn mass_term(&self, x: f64) -> f64 {
        let p = 2 * self.n as i32;
        2.0 * self.meff * x.powi(-p) - self.c * x.powi(-p - 2)
    }
}

impl Lapse for FamilyLapse {
    fn horizon(&self) -> f64 {
        self.xh
    }

    fn v(&self, delta: f64) -> f64 {
        let l = (delta / self.xh).ln_1p();
        self.terms
            .iter()
            .filter(|(_, p)| *p != 0)
            .map(|&(a, p)| a * self.xh.powi(p) * (f64::from(p) * l).exp_m1())
            .sum()
    }

    fn v_x(&self, delta: f64) -> f64 {
        let x = self.xh + delta;
        self.terms.iter().map(|&(a, p)| a * f64::from(p) * x.powi(p - 1)).sum()
    }
}

/// Grid and quadrature settings for [`build_family_with`].
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct FamilyOptions {
    /// Outer arclength; `None` selects the radius `10³ r₊` (flat) or
    /// `10² r₊` (hyperbolic).
    pub s_max: Option<f64>,
    pub nodes: usize,
    pub quad_rel: f64,
}

impl Default for FamilyOptions {
    fn default() -> Self {
        Self::from_tolerances(&Tolerances::strict())
    }
}

impl FamilyOptions {
    pub fn from_tolerances(t: &Tolerances) -> Self {
        Self {
            s_max: None,
            nodes: t.grid_nodes,
            quad_rel: t.quad_rel,
        }
    }
}

/// Builds a family with default grid settings.
pub fn build_family(family: BlackHoleFamily) -> Result<InitialDataSet> {
    build_family_with(family, &FamilyOptions::default())
}

/// Graded arclength grid `s_i = S·expm1(κ i/(N−1))/expm1(κ)`, dense near
/// the horizon and roughly geometric further out.
pub fn graded_grid(s_max: f64, scale: f64, nodes: usize) -> Vec<f64> {
    let kappa = (1.0 + s_max / scale).ln();
    let mut g: Vec<f64> = (0..nodes)
        .map(|i| s_max * (kappa * i as f64 / (nodes - 1) as f64).exp_m1() / kappa.exp_m1())
        .collect();
    g[nodes - 1] = s_max;
    g
}

const CHART_NODES: usize = 256;

pub fn build_family_with(family: BlackHoleFamily, opts: &FamilyOptions) -> Result<InitialDataSet> {
    family.validate()?;
    if opts.nodes < 256 {
        return Err(Error::Domain(format!(
            "sampled profiles need at least 256 nodes, got {}",
            opts.nodes
        )));
    }
    let lapse = family.lapse()?;
    let xh = lapse.xh;
    let factor = if family.is_hyperbolic() { 1e2 } else { 1e3 };
    let mut delta_max = (factor - 1.0) * xh;
    let mut chart = Chart::build(&lapse, delta_max, CHART_NODES, opts.quad_rel)?;
    let s_max = match opts.s_max {
        None => chart.s_max(),
        Some(s) if s.is_finite() && s > 0.0 => {
            while chart.s_max() < s {
                delta_max *= 4.0;
                if delta_max > 1e12 * xh {
                    return Err(Error::Domain(format!("S_max = {s} is out of reach")));
                }
                chart = Chart::build(&lapse, delta_max, CHART_NODES, opts.quad_rel)?;
            }
            s
        }
        Some(s) => return Err(Error::Domain(format!("S_max must be positive, got {s}"))),
    };
    let grid = graded_grid(s_max, xh, opts.nodes);

    let n = family.n();
    let nf = n as f64;
    let p = 2 * n as i32 + 2;
    let (_, c) = family.lapse_coefficients();
    let a_exp = 1.0 / (2.0 * (2.0 * nf + 1.0));
    let spin = family.m() * family.a() * (2.0 * nf + 2.0);
    let hyperbolic = family.is_hyperbolic();

    let mut cols: [Vec<f64>; 9] = Default::default();
    let mut deficit = (Vec::with_capacity(grid.len()), Vec::with_capacity(grid.len()));
    for &s in &grid {
        let delta = chart.delta_of_s(&lapse, s)?;
        let x = xh + delta;
        let v = lapse.v(delta).max(0.0);
        let (xs, xss) = (v.sqrt(), 0.5 * lapse.v_x(delta));
        let xj = Jet::var(x);
        let eps = xj.powi(-p) * c;
        let l = eps.ln_1p();
        let rho = (xj * (l * a_exp).exp()).reparametrize(xs, xss);
        let b = (l * -a_exp).reparametrize(xs, xss);
        let ks = ((xj.powi(p) + c).recip() * spin).reparametrize(xs, xss);

        // ρ_x − 1 and the mass deficit, written without cancellation.
        let e = eps.v;
        let dx = (a_exp * e.ln_1p() + (-(nf + 1.0) * e / ((2.0 * nf + 1.0) * (1.0 + e))).ln_1p()).exp_m1();
        let w = lapse.mass_term(x);
        let mut md = -dx * (2.0 + dx) + w * (1.0 + dx).powi(2);
        let mut md_s = -2.0 * rho.d1 * rho.d2;
        if hyperbolic {
            let alpha = (2.0 * a_exp * e.ln_1p()).exp_m1();
            md += x * x * (alpha - dx * (2.0 + dx));
            md_s += 2.0 * rho.v * rho.d1;
        }
        deficit.0.push(md);
        deficit.1.push(md_s);
        for (col, val) in cols
            .iter_mut()
            .zip([rho.v, rho.d1, rho.d2, b.v, b.d1, b.d2, ks.v, ks.d1, ks.d2])
        {
            col.push(val);
        }
    }
    let [r0, r1, r2, b0, b1, b2, k0, k1, k2] = cols;
    let radius = RadialProfile::sampled(&grid, r0, r1, r2)?;
    let shape = vec![RadialProfile::sampled(&grid, b0, b1, b2)?];
    let mut extrinsic = Extrinsic::zero(2);
    extrinsic.cross[0] = RadialProfile::sampled(&grid, k0, k1, k2)?;
    let mass_deficit = RadialProfile::sampled_first(&grid, deficit.0, deficit.1)?;
    let label = format!("{}(n={}, m={}, a={})", family.name(), n, family.m(), family.a());
    let mut data = InitialDataSet::new(
        label,
        OrbitKind::Berger { n },
        family.asymptotic(),
        grid,
        radius,
        shape,
        extrinsic,
        Some(mass_deficit),
    )?;
    data.family = Some(family);
    Ok(data)
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::f64::consts::PI;

    #[test]
    fn horizon_radii() {
        let s = BlackHoleFamily::Schwarzschild { n: 1, m: 1.0 };
        assert!((s.horizon_radius().unwrap() - 2f64.sqrt()).abs() < 1e-14);
        let mp = BlackHoleFamily::MyersPerry { n: 1, m: 1.0, a: 0.5 };
        let rp = mp.horizon_radius().unwrap();
        assert!((rp * rp - (1.0 + 0.5f64.sqrt())).abs() < 1e-13);
        let ads = BlackHoleFamily::SchwarzschildAdS { n: 1, m: 1.0 };
        assert!((ads.horizon_radius().unwrap() - 1.0).abs() < 1e-14);
    }

    #[test]
    fn horizon_parametrisations_round_trip() {
        let f = BlackHoleFamily::myers_perry_ads_from_horizon(1, 1.0, 0.5).unwrap();
        assert!((f.m() - 2.0).abs() < 1e-15);
        assert!((f.horizon_radius().unwrap() - 1.0).abs() < 1e-13);
        let g = BlackHoleFamily::myers_perry_from_horizon(2, 1.3, 0.4).unwrap();
        assert!((g.horizon_radius().unwrap() - 1.3).abs() < 1e-13);
        let h = BlackHoleFamily::schwarzschild_ads_from_horizon(2, 0.5).unwrap();
        assert!((h.horizon_radius().unwrap() - 0.5).abs() < 1e-13);
    }

    #[test]
    fn extremal_and_overspinning_parameters_are_rejected() {
        // Extremality for n = 1 sits at m = 2a².
        let over = BlackHoleFamily::MyersPerry { n: 1, m: 1.0, a: 0.75 };
        assert!(matches!(over.horizon_radius(), Err(Error::Construction(_))));
        let ext = BlackHoleFamily::MyersPerry { n: 1, m: 2.0, a: 1.0 };
        assert!(matches!(ext.horizon_radius(), Err(Error::Construction(_))));
        assert!(BlackHoleFamily::MyersPerryAdS { n: 1, m: 2.0, a: 1.0 }
            .validate()
            .is_err());
        assert!(BlackHoleFamily::Schwarzschild { n: 1, m: -1.0 }.validate().is_err());
    }

    #[test]
    fn closed_forms_match_direct_evaluation() {
        let mp = BlackHoleFamily::MyersPerry { n: 1, m: 1.0, a: 0.5 };
        let cf = mp.closed_forms().unwrap();
        let y = 1.0 + 0.5f64.sqrt();
        assert!((cf.area - 2.0 * PI * PI * y * y / (y - 0.25).sqrt()).abs() < 1e-12);
        assert!((cf.omega - 1.0 / (y * y + 0.5)).abs() < 1e-14);
        assert!((cf.j_psi - 0.5).abs() < 1e-15);
        let ratio = (y / (y - 0.25)).powf(2.0 / 3.0);
        assert!((cf.energy / cf.bound - ratio).abs() < 1e-12);
        let ads = BlackHoleFamily::myers_perry_ads_from_horizon(1, 1.0, 0.5)
            .unwrap()
            .closed_forms()
            .unwrap();
        assert!((ads.energy - 2.0 * (1.0 + 0.25 / 3.0)).abs() < 1e-14);
    }

    #[test]
    fn hyperbolic_mass_area_relation() {
        // With γ = 1 − a² − a²/r₊² the horizon data satisfy
        // m = ½X^{2n/(2n+1)}/γ^{(n+1)/(2n+1)} + ½X^{(2n+2)/(2n+1)}/γ^{n/(2n+1)}, X = A/ω.
        let (n, rp, a) = (2usize, 0.8f64, 0.3f64);
        let f = BlackHoleFamily::myers_perry_ads_from_horizon(n, rp, a).unwrap();
        let cf = f.closed_forms().unwrap();
        let nf = n as f64;
        let gamma = 1.0 - a * a - a * a / (rp * rp);
        let x = cf.area / unit_sphere_volume(2 * n + 1);
        let k = 2.0 * nf + 1.0;
        let m = 0.5 * x.powf(2.0 * nf / k) / gamma.powf((nf + 1.0) / k)
            + 0.5 * x.powf((2.0 * nf + 2.0) / k) / gamma.powf(nf / k);
        assert!((m / cf.m - 1.0).abs() < 1e-12);
        assert!(cf.margin > 0.0);
    }

    #[test]
    fn lapse_matches_naive_evaluation_away_from_horizon() {
        let f = BlackHoleFamily::MyersPerryAdS { n: 2, m: 3.0, a: 0.4 };
        let l = f.lapse().unwrap();
        let x: f64 = l.horizon() + 0.7;
        let naive = 1.0 + x * x - 2.0 * 3.0 * (1.0 - 0.16) / x.powi(4) + 2.0 * 3.0 * 0.16 / x.powi(6);
        assert!((l.v(0.7) - naive).abs() < 1e-13);
        assert!(l.v(0.0) == 0.0);
        assert!(l.v_x(0.0) > 0.0);
    }

    #[test]
    fn grid_is_graded_and_pinned() {
        let g = graded_grid(100.0, 1.0, 300);
        assert_eq!(g[0], 0.0);
        assert_eq!(*g.last().unwrap(), 100.0);
        assert!(g[1] - g[0] < g[299] - g[298]);
    }
}
